//! Domain types: applications, machine configurations, problem instances.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign};

use crate::error::Error;
use crate::scalar::Scalar;

/// A non-negative CPU quantity (demand, reservation, or capacity).
///
/// The wrapped scalar carries the arithmetic; with the rational alias every
/// operation is exact and load comparisons are never approximate.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Load<T: Scalar>(T);

impl<T: Scalar> Load<T> {
    pub fn new(value: T) -> Result<Self, Error> {
        if value < T::zero() {
            return Err(Error::NegativeLoad);
        }
        Ok(Load(value))
    }

    pub fn zero() -> Self {
        Load(T::zero())
    }

    /// Builds a load from a value known to be non-negative.
    pub(crate) fn from_nonneg(value: T) -> Self {
        debug_assert!(value >= T::zero());
        Load(value)
    }

    pub fn from_u64(v: u64) -> Self {
        Load(T::from_u64(v))
    }

    pub fn value(&self) -> T {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0 == T::zero()
    }

    pub fn checked_sub(&self, other: &Load<T>) -> Option<Load<T>> {
        if self.0 < other.0 {
            None
        } else {
            Some(Load(self.0 - other.0))
        }
    }

    /// Total order; panics on incomparable values (float NaN).
    pub fn total_cmp(&self, other: &Load<T>) -> std::cmp::Ordering {
        self.partial_cmp(other).expect("loads must be comparable")
    }

    pub fn max(self, other: Load<T>) -> Load<T> {
        if self.0 < other.0 {
            other
        } else {
            self
        }
    }
}

impl<T: Scalar> Add for Load<T> {
    type Output = Load<T>;

    fn add(self, rhs: Load<T>) -> Load<T> {
        Load(self.0 + rhs.0)
    }
}

impl<T: Scalar> AddAssign for Load<T> {
    fn add_assign(&mut self, rhs: Load<T>) {
        self.0 = self.0 + rhs.0;
    }
}

impl<T: Scalar> Sum for Load<T> {
    fn sum<I: Iterator<Item = Load<T>>>(iter: I) -> Self {
        iter.fold(Load::zero(), |acc, x| acc + x)
    }
}

/// Opaque application identifier. Ordering (lexicographic) is the tie-breaker
/// used wherever solvers need a deterministic order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AppId(String);

impl AppId {
    pub fn new(id: impl Into<String>) -> Self {
        AppId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for AppId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for AppId {
    fn from(s: &str) -> Self {
        AppId(s.to_owned())
    }
}

/// One workload: a total CPU demand `p` that a load balancer may split across
/// instances, and a memory footprint `q` paid by every instance in full.
#[derive(Debug, Clone, PartialEq)]
pub struct Application<T: Scalar> {
    id: AppId,
    load: Load<T>,
    memory: u64,
}

impl<T: Scalar> Application<T> {
    pub fn new(id: AppId, load: Load<T>, memory: u64) -> Result<Self, Error> {
        if load.is_zero() {
            return Err(Error::NonPositiveLoad(id));
        }
        if memory == 0 {
            return Err(Error::ZeroMemory(id));
        }
        Ok(Application { id, load, memory })
    }

    pub fn id(&self) -> &AppId {
        &self.id
    }

    pub fn load(&self) -> Load<T> {
        self.load
    }

    pub fn memory(&self) -> u64 {
        self.memory
    }

    /// CPU demand per unit of memory.
    pub fn load_per_memory(&self) -> T {
        self.load.value() / T::from_u64(self.memory)
    }
}

/// Capacities shared by all machines: memory `Q` always, and a CPU cap `P`
/// when the objective enforces one (packing). Balancing leaves the cap unset.
#[derive(Debug, Clone, PartialEq)]
pub struct MachineConfig<T: Scalar> {
    memory: u64,
    cpu_cap: Option<Load<T>>,
}

impl<T: Scalar> MachineConfig<T> {
    pub fn new(memory: u64, cpu_cap: Option<Load<T>>) -> Result<Self, Error> {
        if memory == 0 {
            return Err(Error::ZeroMemoryCapacity);
        }
        if let Some(cap) = &cpu_cap {
            if cap.is_zero() {
                return Err(Error::NonPositiveCpuCap);
            }
        }
        Ok(MachineConfig { memory, cpu_cap })
    }

    pub fn memory(&self) -> u64 {
        self.memory
    }

    pub fn cpu_cap(&self) -> Option<Load<T>> {
        self.cpu_cap
    }

    pub fn require_cpu_cap(&self) -> Result<Load<T>, Error> {
        self.cpu_cap.ok_or(Error::MissingCpuCap)
    }
}

/// A full problem: applications, the machine configuration, and (for the
/// balancing objective) the externally fixed machine count.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance<T: Scalar> {
    apps: Vec<Application<T>>,
    config: MachineConfig<T>,
    fixed_m: Option<usize>,
}

impl<T: Scalar> ProblemInstance<T> {
    pub fn new(
        apps: Vec<Application<T>>,
        config: MachineConfig<T>,
        fixed_m: Option<usize>,
    ) -> Result<Self, Error> {
        let mut seen = std::collections::HashSet::new();
        for app in &apps {
            if !seen.insert(app.id().clone()) {
                return Err(Error::DuplicateAppId(app.id().clone()));
            }
            if app.memory() > config.memory() {
                return Err(Error::MemoryDemandTooLarge {
                    app: app.id().clone(),
                    demand: app.memory(),
                    capacity: config.memory(),
                });
            }
        }
        Ok(ProblemInstance {
            apps,
            config,
            fixed_m,
        })
    }

    pub fn apps(&self) -> &[Application<T>] {
        &self.apps
    }

    pub fn config(&self) -> &MachineConfig<T> {
        &self.config
    }

    pub fn fixed_m(&self) -> Option<usize> {
        self.fixed_m
    }

    pub fn app(&self, id: &AppId) -> Option<&Application<T>> {
        self.apps.iter().find(|a| a.id() == id)
    }

    pub fn total_load(&self) -> Load<T> {
        self.apps.iter().map(|a| a.load()).sum()
    }

    pub fn total_memory(&self) -> u64 {
        self.apps.iter().map(|a| a.memory()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rat;

    fn load(n: i128, d: i128) -> Load<Rat> {
        Load::new(Rat::new(n, d)).unwrap()
    }

    #[test]
    fn load_rejects_negative() {
        assert_eq!(Load::new(Rat::new(-1, 2)), Err(Error::NegativeLoad));
    }

    #[test]
    fn application_invariants() {
        let err = Application::new(AppId::from("a"), Load::zero(), 1).unwrap_err();
        assert_eq!(err, Error::NonPositiveLoad(AppId::from("a")));
        let err = Application::new(AppId::from("a"), load(1, 1), 0).unwrap_err();
        assert_eq!(err, Error::ZeroMemory(AppId::from("a")));
    }

    #[test]
    fn instance_rejects_duplicate_ids_and_oversized_memory() {
        let config = MachineConfig::<Rat>::new(2, None).unwrap();
        let a = Application::new(AppId::from("a"), load(1, 1), 1).unwrap();
        let b = Application::new(AppId::from("a"), load(2, 1), 1).unwrap();
        assert!(matches!(
            ProblemInstance::new(vec![a.clone(), b], config.clone(), None),
            Err(Error::DuplicateAppId(_))
        ));

        let big = Application::new(AppId::from("b"), load(1, 1), 3).unwrap();
        assert!(matches!(
            ProblemInstance::new(vec![a, big], config, None),
            Err(Error::MemoryDemandTooLarge { .. })
        ));
    }

    #[test]
    fn load_arithmetic_is_exact() {
        let sum: Load<Rat> = vec![load(1, 3), load(1, 6), load(1, 2)].into_iter().sum();
        assert_eq!(sum, load(1, 1));
        assert_eq!(load(3, 2).checked_sub(&load(1, 2)), Some(load(1, 1)));
        assert_eq!(load(1, 2).checked_sub(&load(3, 2)), None);
    }
}
