//! Exact polynomial algorithms for instances where every application has the
//! same demand pair `(p, q)`.
//!
//! With common requirements, both objectives are solvable in polynomial time:
//!
//! * Balancing over `m` machines. Let `s = Q div q` be the number of
//!   instances a machine can host. If `m` divides `n`, an even whole-app
//!   split reaches `p*n/m`. If memory leaves slack (`s > ceil(n/m)`), the
//!   leftover apps can be wrapped across machines at a fixed level and the
//!   ideal `p*n/m` is still reached. Otherwise each machine has room for at
//!   most one leftover instance, the leftover apps split into `floor(m/r)` or
//!   one more equal parts (`r = n mod m`), and the optimum is
//!   `p*(floor(n/m) + 1/floor(m/r))`.
//! * Packing under a CPU cap `P`: binary search on the machine count,
//!   testing whether the balancing optimum fits under the cap.
//!
//! [`balance_common`] is bound to the published optimum: the assignment it
//! builds validates and its peak equals [`optimal_max_load_common`] exactly.

use crate::assignment::Assignment;
use crate::error::Error;
use crate::scalar::Scalar;
use crate::types::{AppId, Application, Load, MachineConfig, ProblemInstance};

/// Parameters of a common-requirements instance: `n` applications, each with
/// CPU demand `p` and memory `q`, on `m` machines of memory `Q` (and CPU cap
/// `P` when packing).
#[derive(Debug, Clone, PartialEq)]
pub struct CommonCaseParams<T: Scalar> {
    n: usize,
    m: usize,
    load: Load<T>,
    memory: u64,
    mem_cap: u64,
    cpu_cap: Option<Load<T>>,
}

impl<T: Scalar> CommonCaseParams<T> {
    pub fn new(
        n: usize,
        m: usize,
        load: Load<T>,
        memory: u64,
        mem_cap: u64,
        cpu_cap: Option<Load<T>>,
    ) -> Result<Self, Error> {
        if n == 0 || m == 0 {
            return Err(Error::Infeasible(
                "common case needs at least one app and one machine".into(),
            ));
        }
        if load.is_zero() {
            return Err(Error::NonPositiveLoad(AppId::new("common")));
        }
        if memory == 0 {
            return Err(Error::ZeroMemory(AppId::new("common")));
        }
        if mem_cap == 0 {
            return Err(Error::ZeroMemoryCapacity);
        }
        if memory > mem_cap {
            return Err(Error::MemoryDemandTooLarge {
                app: AppId::new("common"),
                demand: memory,
                capacity: mem_cap,
            });
        }
        if let Some(cap) = &cpu_cap {
            if cap.is_zero() {
                return Err(Error::NonPositiveCpuCap);
            }
        }
        Ok(CommonCaseParams {
            n,
            m,
            load,
            memory,
            mem_cap,
            cpu_cap,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn load(&self) -> Load<T> {
        self.load
    }

    pub fn memory(&self) -> u64 {
        self.memory
    }

    pub fn mem_cap(&self) -> u64 {
        self.mem_cap
    }

    pub fn cpu_cap(&self) -> Option<Load<T>> {
        self.cpu_cap
    }

    /// Instances a single machine can host: `Q div q`, after the standard
    /// reduction that rounds `Q` down to a multiple of `q`.
    pub fn slots_per_machine(&self) -> u64 {
        self.mem_cap / self.memory
    }

    fn check_feasible(&self) -> Result<(), Error> {
        if (self.slots_per_machine() as u128) * (self.m as u128) < self.n as u128 {
            return Err(Error::Infeasible(format!(
                "{} machines with {} instance slots each cannot host {} applications",
                self.m,
                self.slots_per_machine(),
                self.n
            )));
        }
        Ok(())
    }

    /// Materializes the equivalent [`ProblemInstance`], with applications
    /// identified by their index (`"0"`, `"1"`, ...).
    pub fn instance(&self) -> ProblemInstance<T> {
        let apps = (0..self.n)
            .map(|i| {
                Application::new(AppId::new(i.to_string()), self.load, self.memory)
                    .expect("params are validated")
            })
            .collect();
        let config =
            MachineConfig::new(self.mem_cap, self.cpu_cap).expect("params are validated");
        ProblemInstance::new(apps, config, Some(self.m)).expect("params are validated")
    }
}

/// The minimum achievable peak load for a common-requirements instance.
pub fn optimal_max_load_common<T: Scalar>(params: &CommonCaseParams<T>) -> Result<Load<T>, Error> {
    params.check_feasible()?;
    let n = params.n;
    let m = params.m;
    let p = params.load.value();
    let value = if n % m == 0 || params.slots_per_machine() > n.div_ceil(m) as u64 {
        // Even split, or enough memory slack to wrap leftovers evenly.
        p * T::from_u64(n as u64) / T::from_u64(m as u64)
    } else {
        let parts = (m / (n % m)) as u64;
        p * (T::from_u64((n / m) as u64) + T::one() / T::from_u64(parts))
    };
    Ok(Load::from_nonneg(value))
}

/// Builds an assignment reaching [`optimal_max_load_common`].
///
/// Applications are identified by index, matching
/// [`CommonCaseParams::instance`]. Machines first receive `floor(n/m)` whole
/// applications each. Leftover applications are then either wrapped across
/// machines at the residual level (when memory allows an extra instance per
/// machine) or split into equal parts on distinct machines, handing each
/// machine at most one leftover instance; apps receiving more parts are laid
/// out first so the counts work out.
pub fn balance_common<T: Scalar>(params: &CommonCaseParams<T>) -> Result<Assignment<T>, Error> {
    params.check_feasible()?;
    let n = params.n;
    let m = params.m;
    let p = params.load.value();
    let id = |i: usize| AppId::new(i.to_string());

    let whole = n / m;
    let leftover = n % m;
    let mut entries: Vec<(AppId, usize, Load<T>)> = Vec::new();
    let mut next = 0usize;
    for machine in 0..m {
        for _ in 0..whole {
            entries.push((id(next), machine, params.load));
            next += 1;
        }
    }

    if leftover > 0 {
        if params.slots_per_machine() > n.div_ceil(m) as u64 {
            // Wrap-around: fill every machine up to the residual level
            // p * leftover / m, splitting an app across consecutive machines
            // whenever it straddles the boundary.
            let level = p * T::from_u64(leftover as u64) / T::from_u64(m as u64);
            let mut machine = 0usize;
            let mut room = level;
            for app in next..n {
                let mut left = p;
                while left > T::zero() {
                    if room == T::zero() {
                        machine += 1;
                        room = level;
                    }
                    let piece = if left < room { left } else { room };
                    entries.push((id(app), machine, Load::from_nonneg(piece)));
                    room = room - piece;
                    left = left - piece;
                }
            }
        } else {
            // Memory-tight: each machine takes exactly one leftover instance.
            // `m mod leftover` apps get one extra part.
            let parts_base = m / leftover;
            let extra = m % leftover;
            let mut machine = 0usize;
            for (idx, app) in (next..n).enumerate() {
                let parts = if idx < extra { parts_base + 1 } else { parts_base };
                let share = p / T::from_u64(parts as u64);
                for _ in 0..parts {
                    entries.push((id(app), machine, Load::from_nonneg(share)));
                    machine += 1;
                }
            }
        }
    }

    Assignment::new(m, entries)
}

/// The minimal number of machines for a common-requirements instance under a
/// CPU cap, found by binary search on the machine count. The search range is
/// `[ceil(max(n/(Q div q), n*p/P)), n*ceil(p/P)]` and the predicate is
/// whether the balancing optimum at `m` machines stays within the cap.
///
/// `p > P` is allowed: the load then spreads over several instances.
pub fn min_machines_common<T: Scalar>(
    n: usize,
    load: Load<T>,
    memory: u64,
    cpu_cap: Load<T>,
    mem_cap: u64,
) -> Result<usize, Error> {
    if n == 0 {
        return Ok(0);
    }
    // Parameter validation via a probe at the upper bound, which also pins
    // slots_per_machine.
    let slots = CommonCaseParams::new(n, 1, load, memory, mem_cap, Some(cpu_cap))?
        .slots_per_machine();
    let p = load.value();
    let cap = cpu_cap.value();

    let mem_lower = (n as u64).div_ceil(slots);
    let cpu_lower = (p * T::from_u64(n as u64) / cap).ceil_u64();
    let mut lo = mem_lower.max(cpu_lower).max(1) as usize;
    let mut hi = n * (p / cap).ceil_u64() as usize;
    debug_assert!(lo <= hi);

    while hi > lo {
        let mid = (lo + hi) / 2;
        let params = CommonCaseParams::new(n, mid, load, memory, mem_cap, Some(cpu_cap))?;
        let peak = optimal_max_load_common(&params)?;
        if peak > cpu_cap {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Machine count when the common load divides the cap and the common memory
/// divides the capacity (after the usual reduction of `Q` to a multiple of
/// `q`): whole-app greedy packing is optimal, so the answer is
/// `ceil(n / min(P div p, Q div q))`.
pub fn min_machines_divisible<T: Scalar>(
    n: usize,
    load: Load<T>,
    memory: u64,
    cpu_cap: Load<T>,
    mem_cap: u64,
) -> Result<usize, Error> {
    if n == 0 {
        return Ok(0);
    }
    let probe = CommonCaseParams::new(n, 1, load, memory, mem_cap, Some(cpu_cap))?;
    let slots = probe.slots_per_machine();
    let whole = (cpu_cap.value() / load.value()).floor_u64();
    if T::from_u64(whole) * load.value() != cpu_cap.value() {
        return Err(Error::NotDivisible);
    }
    let per_machine = whole.min(slots);
    Ok((n as u64).div_ceil(per_machine) as usize)
}

/// Machine count when every application must stay whole. With common
/// requirements each machine holds `min(P div p, Q div q)` applications, so
/// the optimum is the greedy `ceil(n / that)`. Fails when `p > P`.
pub fn min_machines_single_common<T: Scalar>(
    n: usize,
    load: Load<T>,
    memory: u64,
    cpu_cap: Load<T>,
    mem_cap: u64,
) -> Result<usize, Error> {
    if n == 0 {
        return Ok(0);
    }
    let probe = CommonCaseParams::new(n, 1, load, memory, mem_cap, Some(cpu_cap))?;
    let slots = probe.slots_per_machine();
    let whole = (cpu_cap.value() / load.value()).floor_u64();
    let per_machine = whole.min(slots);
    if per_machine == 0 {
        return Err(Error::Infeasible(
            "load exceeds the cpu capacity; no single-instance placement exists".into(),
        ));
    }
    Ok((n as u64).div_ceil(per_machine) as usize)
}
