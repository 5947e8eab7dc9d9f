//! Assignments: which applications run where, and with how much CPU reserved.

use std::collections::BTreeMap;

use crate::error::Error;
use crate::scalar::Scalar;
use crate::types::{AppId, Load};

/// One instance of an application on one machine, with the CPU reserved for it.
#[derive(Debug, Clone, PartialEq)]
pub struct AssignmentEntry<T: Scalar> {
    pub app: AppId,
    pub machine: usize,
    pub reserved: Load<T>,
}

/// A placement of application instances on machines `0..machine_count`.
///
/// [`Assignment::new`] normalizes: duplicate `(app, machine)` entries are
/// merged by summing their reservations (two instances of one app on one
/// machine always merge into a cheaper single instance) and zero reservations
/// are dropped. Entries end up sorted by `(machine, app)`.
///
/// Whether a machine is "used" is derived: it is used iff it has an entry.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment<T: Scalar> {
    entries: Vec<AssignmentEntry<T>>,
    machine_count: usize,
}

impl<T: Scalar> Assignment<T> {
    /// Normalizing constructor. Fails if an entry addresses a machine index
    /// `>= machine_count`.
    pub fn new(
        machine_count: usize,
        entries: impl IntoIterator<Item = (AppId, usize, Load<T>)>,
    ) -> Result<Self, Error> {
        let mut merged: BTreeMap<(usize, AppId), T> = BTreeMap::new();
        for (app, machine, reserved) in entries {
            if machine >= machine_count {
                return Err(Error::MachineIndexOutOfRange {
                    index: machine,
                    machines: machine_count,
                });
            }
            let slot = merged.entry((machine, app)).or_insert_with(T::zero);
            *slot = *slot + reserved.value();
        }
        let entries = merged
            .into_iter()
            .filter(|(_, v)| *v != T::zero())
            .map(|((machine, app), v)| AssignmentEntry {
                app,
                machine,
                reserved: Load::from_nonneg(v),
            })
            .collect();
        Ok(Assignment {
            entries,
            machine_count,
        })
    }

    /// Bypasses normalization. Entries are kept verbatim, including duplicate
    /// `(app, machine)` pairs and out-of-range indices; the validator reports
    /// them. Intended for deserialized data and for tests.
    pub fn from_raw_entries(machine_count: usize, entries: Vec<AssignmentEntry<T>>) -> Self {
        Assignment {
            entries,
            machine_count,
        }
    }

    pub fn empty() -> Self {
        Assignment {
            entries: Vec::new(),
            machine_count: 0,
        }
    }

    pub fn entries(&self) -> &[AssignmentEntry<T>] {
        &self.entries
    }

    pub fn machine_count(&self) -> usize {
        self.machine_count
    }

    /// Total reserved CPU per machine, indexed `0..machine_count`. Entries
    /// beyond the machine range are ignored (the validator flags them).
    pub fn loads_per_machine(&self) -> Vec<Load<T>> {
        let mut loads = vec![Load::zero(); self.machine_count];
        for e in &self.entries {
            if e.machine < self.machine_count {
                loads[e.machine] += e.reserved;
            }
        }
        loads
    }

    /// The maximum per-machine CPU load; zero for an empty assignment.
    pub fn max_load(&self) -> Load<T> {
        self.loads_per_machine()
            .into_iter()
            .fold(Load::zero(), Load::max)
    }

    /// Number of machines hosting at least one instance.
    pub fn machines_used(&self) -> usize {
        let mut used = vec![false; self.machine_count];
        for e in &self.entries {
            if e.machine < self.machine_count {
                used[e.machine] = true;
            }
        }
        used.into_iter().filter(|u| *u).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rat;

    fn load(n: i128, d: i128) -> Load<Rat> {
        Load::new(Rat::new(n, d)).unwrap()
    }

    fn id(s: &str) -> AppId {
        AppId::from(s)
    }

    /// Three unit apps on two machines, the middle one split in half.
    fn split_three_apps() -> Assignment<Rat> {
        Assignment::new(
            2,
            vec![
                (id("1"), 0, load(1, 1)),
                (id("2"), 0, load(1, 2)),
                (id("2"), 1, load(1, 2)),
                (id("3"), 1, load(1, 1)),
            ],
        )
        .unwrap()
    }

    #[test]
    fn max_load_of_single_instance_placement() {
        // Two apps together on machine 0, one alone on machine 1.
        let a = Assignment::new(
            2,
            vec![
                (id("1"), 0, load(1, 1)),
                (id("2"), 0, load(1, 1)),
                (id("3"), 1, load(1, 1)),
            ],
        )
        .unwrap();
        assert_eq!(a.max_load(), load(2, 1));
    }

    #[test]
    fn max_load_of_split_placement() {
        assert_eq!(split_three_apps().max_load(), load(3, 2));
    }

    #[test]
    fn max_load_trivia() {
        let single = Assignment::new(1, vec![(id("x"), 0, load(7, 1))]).unwrap();
        assert_eq!(single.max_load(), load(7, 1));
        assert_eq!(Assignment::<Rat>::empty().max_load(), Load::zero());
    }

    #[test]
    fn machines_used_counts_nonempty_machines() {
        assert_eq!(split_three_apps().machines_used(), 2);
        assert_eq!(Assignment::<Rat>::empty().machines_used(), 0);

        // Dedicating a machine to an oversized app leaves three in use.
        let dedicated = Assignment::new(
            3,
            vec![
                (id("c"), 0, load(5, 1)),
                (id("a"), 1, load(2, 1)),
                (id("c"), 1, load(1, 1)),
                (id("b"), 2, load(2, 1)),
            ],
        )
        .unwrap();
        assert_eq!(dedicated.machines_used(), 3);
    }

    #[test]
    fn construction_merges_duplicates_and_drops_zeros() {
        let a = Assignment::new(
            2,
            vec![
                (id("a"), 0, load(1, 2)),
                (id("a"), 0, load(1, 2)),
                (id("b"), 1, Load::zero()),
            ],
        )
        .unwrap();
        assert_eq!(a.entries().len(), 1);
        assert_eq!(a.entries()[0].reserved, load(1, 1));
        assert_eq!(a.machines_used(), 1);
    }

    #[test]
    fn construction_rejects_out_of_range_machine() {
        let err = Assignment::new(1, vec![(id("a"), 3, load(1, 1))]).unwrap_err();
        assert_eq!(
            err,
            Error::MachineIndexOutOfRange {
                index: 3,
                machines: 1
            }
        );
    }
}
