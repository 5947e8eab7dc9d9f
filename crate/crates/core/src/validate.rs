//! Feasibility checking. Every assignment a solver returns must pass here.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use crate::assignment::Assignment;
use crate::error::Error;
use crate::scalar::Scalar;
use crate::types::{AppId, Load, ProblemInstance};

/// A single constraint violation, with the offending machine or application
/// and the amounts involved.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation<T: Scalar> {
    /// Instances on one machine demand more memory than it has.
    MemoryOverflow {
        machine: usize,
        used: u64,
        capacity: u64,
    },
    /// An application's reservations do not cover its load.
    LoadDeficit {
        app: AppId,
        assigned: Load<T>,
        required: Load<T>,
    },
    /// Reserved CPU on one machine exceeds the cap (only checked when the cap
    /// is enforced).
    CpuOverflow {
        machine: usize,
        load: Load<T>,
        capacity: Load<T>,
    },
    /// Two entries place the same application on the same machine, which only
    /// happens when normalization was bypassed.
    DuplicateInstance { app: AppId, machine: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ViolationKind {
    MemoryOverflow,
    LoadDeficit,
    CpuOverflow,
    DuplicateInstance,
}

impl<T: Scalar> Violation<T> {
    pub fn kind(&self) -> ViolationKind {
        match self {
            Violation::MemoryOverflow { .. } => ViolationKind::MemoryOverflow,
            Violation::LoadDeficit { .. } => ViolationKind::LoadDeficit,
            Violation::CpuOverflow { .. } => ViolationKind::CpuOverflow,
            Violation::DuplicateInstance { .. } => ViolationKind::DuplicateInstance,
        }
    }
}

/// Outcome of a validation pass: feasible iff there are no violations.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport<T: Scalar> {
    pub violations: Vec<Violation<T>>,
}

impl<T: Scalar> ValidationReport<T> {
    pub fn feasible(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn kinds(&self) -> BTreeSet<ViolationKind>
    where
        ViolationKind: Ord,
    {
        self.violations.iter().map(Violation::kind).collect()
    }
}

impl Ord for ViolationKind {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (*self as u8).cmp(&(*other as u8))
    }
}

impl PartialOrd for ViolationKind {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Checks an assignment against an instance.
///
/// Reported violations: memory overflow per machine (instances are counted
/// once per distinct `(app, machine)` pair, matching the 0-1 placement
/// model), load deficit per application, CPU overflow per machine when
/// `enforce_cpu_cap` is set, and duplicate instances.
///
/// An assignment referencing an unknown application or an out-of-range
/// machine index is structurally broken, which is an error rather than an
/// infeasibility.
pub fn validate<T: Scalar>(
    instance: &ProblemInstance<T>,
    assignment: &Assignment<T>,
    enforce_cpu_cap: bool,
) -> Result<ValidationReport<T>, Error> {
    let apps: HashMap<&AppId, _> = instance.apps().iter().map(|a| (a.id(), a)).collect();
    let cap = if enforce_cpu_cap {
        Some(instance.config().require_cpu_cap()?)
    } else {
        None
    };

    for e in assignment.entries() {
        if !apps.contains_key(&e.app) {
            return Err(Error::UnknownApp(e.app.clone()));
        }
        if e.machine >= assignment.machine_count() {
            return Err(Error::MachineIndexOutOfRange {
                index: e.machine,
                machines: assignment.machine_count(),
            });
        }
    }

    let mut violations = Vec::new();

    // Memory per machine over distinct (app, machine) pairs; duplicates are
    // flagged separately so each mutation maps to exactly one kind.
    let mut instances_per_machine: BTreeMap<usize, BTreeSet<&AppId>> = BTreeMap::new();
    let mut duplicates: BTreeSet<(usize, &AppId)> = BTreeSet::new();
    for e in assignment.entries() {
        let set = instances_per_machine.entry(e.machine).or_default();
        if !set.insert(&e.app) {
            duplicates.insert((e.machine, &e.app));
        }
    }
    for (&machine, set) in &instances_per_machine {
        let used: u64 = set.iter().map(|id| apps[*id].memory()).sum();
        if used > instance.config().memory() {
            violations.push(Violation::MemoryOverflow {
                machine,
                used,
                capacity: instance.config().memory(),
            });
        }
    }

    // Coverage per application.
    let mut assigned: BTreeMap<&AppId, Load<T>> = BTreeMap::new();
    for e in assignment.entries() {
        *assigned.entry(&e.app).or_insert_with(Load::zero) += e.reserved;
    }
    for app in instance.apps() {
        let got = assigned.get(app.id()).copied().unwrap_or_else(Load::zero);
        if got < app.load() {
            violations.push(Violation::LoadDeficit {
                app: app.id().clone(),
                assigned: got,
                required: app.load(),
            });
        }
    }

    if let Some(cap) = cap {
        for (machine, load) in assignment.loads_per_machine().into_iter().enumerate() {
            if load > cap {
                violations.push(Violation::CpuOverflow {
                    machine,
                    load,
                    capacity: cap,
                });
            }
        }
    }

    for (machine, app) in duplicates {
        violations.push(Violation::DuplicateInstance {
            app: app.clone(),
            machine,
        });
    }

    Ok(ValidationReport { violations })
}

/// The classic lower bound on the number of machines needed:
/// `max(ceil(total load / P), ceil(total memory / Q))`.
pub fn lower_bound_machines<T: Scalar>(instance: &ProblemInstance<T>) -> Result<usize, Error> {
    let cap = instance.config().require_cpu_cap()?;
    let cpu_bound = (instance.total_load().value() / cap.value()).ceil_u64();
    let mem = instance.total_memory();
    let mem_bound = mem.div_ceil(instance.config().memory());
    Ok(cpu_bound.max(mem_bound) as usize)
}
