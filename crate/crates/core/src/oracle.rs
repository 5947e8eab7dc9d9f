//! Exhaustive exact solver for desk-scale instances.
//!
//! The oracle enumerates every memory-feasible support matrix (which machines
//! each application's instances occupy), evaluates the exact min-max
//! splittable load for each support, and takes the best. It is the ground
//! truth the polynomial algorithms and heuristics are measured against, so it
//! favors obvious correctness over scale and refuses instances beyond its
//! size caps.
//!
//! For a fixed support, splitting load is a transportation problem. Its
//! min-max value has a closed form: the maximum over machine subsets `S` of
//! the load trapped inside `S` (applications whose whole support lies in `S`)
//! divided by `|S|`. The [`flow`] submodule checks the same quantity with a
//! max-flow feasibility test, giving an independent second route used by the
//! tests; production code only uses the subset formula.

use crate::error::Error;
use crate::scalar::Scalar;
use crate::types::{Load, ProblemInstance};
use crate::validate::lower_bound_machines;

/// Enumeration size caps. Supports are enumerated over `O((2^m)^n)` raw
/// candidates (minus machine symmetry), so both dimensions stay small.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleCaps {
    pub max_apps: usize,
    pub max_machines: usize,
}

impl Default for OracleCaps {
    fn default() -> Self {
        OracleCaps {
            max_apps: 6,
            max_machines: 4,
        }
    }
}

/// The support of an assignment: for each application, the non-empty set of
/// machines hosting one of its instances, as a bitmask over `0..machines`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportMatrix {
    masks: Vec<u32>,
    machines: usize,
}

impl SupportMatrix {
    pub fn new(masks: Vec<u32>, machines: usize) -> Result<Self, Error> {
        assert!(machines <= 32, "bitmask supports at most 32 machines");
        let full = mask_full(machines);
        for (i, &mask) in masks.iter().enumerate() {
            if mask == 0 || mask & !full != 0 {
                return Err(Error::Infeasible(format!(
                    "support of application {i} must be a non-empty subset of the {machines} machines"
                )));
            }
        }
        Ok(SupportMatrix { masks, machines })
    }

    pub fn masks(&self) -> &[u32] {
        &self.masks
    }

    pub fn machines(&self) -> usize {
        self.machines
    }

    /// Per-machine memory feasibility: each machine has enough memory for
    /// every instance its column hosts.
    pub fn memory_feasible(&self, memories: &[u64], mem_cap: u64) -> bool {
        debug_assert_eq!(memories.len(), self.masks.len());
        for j in 0..self.machines {
            let used: u64 = self
                .masks
                .iter()
                .zip(memories)
                .filter(|(mask, _)| *mask & (1 << j) != 0)
                .map(|(_, q)| *q)
                .sum();
            if used > mem_cap {
                return false;
            }
        }
        true
    }
}

fn mask_full(machines: usize) -> u32 {
    if machines == 32 {
        u32::MAX
    } else {
        (1u32 << machines) - 1
    }
}

/// Exact min-max load for a fixed support: the maximum over non-empty machine
/// subsets `S` of (load of applications supported entirely inside `S`) / |S|.
pub fn min_max_load_for_support<T: Scalar>(
    support: &SupportMatrix,
    loads: &[Load<T>],
) -> Load<T> {
    debug_assert_eq!(loads.len(), support.masks.len());
    let m = support.machines;
    if m == 0 {
        return Load::zero();
    }
    let mut best = T::zero();
    for subset in 1..=mask_full(m) {
        let mut trapped = T::zero();
        for (mask, load) in support.masks.iter().zip(loads) {
            if mask & !subset == 0 {
                trapped = trapped + load.value();
            }
        }
        let value = trapped / T::from_u64(subset.count_ones() as u64);
        if value > best {
            best = value;
        }
    }
    Load::from_nonneg(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SupportShape {
    /// Any non-empty machine subset per application.
    AnySubset,
    /// Exactly one machine per application (the single-instance model).
    Singletons,
}

/// Depth-first enumeration of supports, canonical up to machine permutation:
/// fresh machines are introduced in index order, so each equivalence class of
/// the identical machines is visited once. Memory is pruned per column as
/// rows are chosen.
struct Enumerator<T: Scalar> {
    loads: Vec<T>,
    memories: Vec<u64>,
    mem_cap: u64,
    machines: usize,
    shape: SupportShape,
    masks: Vec<u32>,
    mem_used: Vec<u64>,
    best: Option<T>,
}

impl<T: Scalar> Enumerator<T> {
    fn run(instance: &ProblemInstance<T>, machines: usize, shape: SupportShape) -> Option<T> {
        let loads: Vec<T> = instance.apps().iter().map(|a| a.load().value()).collect();
        let memories: Vec<u64> = instance.apps().iter().map(|a| a.memory()).collect();
        if loads.is_empty() {
            return Some(T::zero());
        }
        if machines == 0 {
            return None;
        }
        assert!(machines <= 31, "bitmask enumeration supports at most 31 machines");
        let mut this = Enumerator {
            masks: vec![0; loads.len()],
            mem_used: vec![0; machines],
            loads,
            memories,
            mem_cap: instance.config().memory(),
            machines,
            shape,
            best: None,
        };
        this.recurse(0, 0);
        this.best
    }

    fn place(&mut self, app: usize, mask: u32) -> bool {
        let q = self.memories[app];
        let mut bits = mask;
        while bits != 0 {
            let j = bits.trailing_zeros() as usize;
            if self.mem_used[j] + q > self.mem_cap {
                // roll back the columns already bumped
                let mut done = mask & ((1 << j) - 1);
                while done != 0 {
                    let k = done.trailing_zeros() as usize;
                    self.mem_used[k] -= q;
                    done &= done - 1;
                }
                return false;
            }
            self.mem_used[j] += q;
            bits &= bits - 1;
        }
        self.masks[app] = mask;
        true
    }

    fn unplace(&mut self, app: usize, mask: u32) {
        let q = self.memories[app];
        let mut bits = mask;
        while bits != 0 {
            let j = bits.trailing_zeros() as usize;
            self.mem_used[j] -= q;
            bits &= bits - 1;
        }
        self.masks[app] = 0;
    }

    fn recurse(&mut self, app: usize, introduced: usize) {
        if app == self.loads.len() {
            let support = SupportMatrix {
                masks: self.masks.clone(),
                machines: self.machines,
            };
            let loads: Vec<Load<T>> = self.loads.iter().map(|&p| Load::from_nonneg(p)).collect();
            let value = min_max_load_for_support(&support, &loads).value();
            if self.best.map_or(true, |b| value < b) {
                self.best = Some(value);
            }
            return;
        }
        match self.shape {
            SupportShape::Singletons => {
                let limit = (introduced + 1).min(self.machines);
                for j in 0..limit {
                    let mask = 1u32 << j;
                    if self.place(app, mask) {
                        self.recurse(app + 1, introduced.max(j + 1));
                        self.unplace(app, mask);
                    }
                }
            }
            SupportShape::AnySubset => {
                let old_cap = 1u32 << introduced;
                for fresh in 0..=(self.machines - introduced) as u32 {
                    let fresh_mask = (((1u64 << fresh) - 1) as u32) << introduced;
                    for old in 0..old_cap {
                        let mask = old | fresh_mask;
                        if mask == 0 {
                            continue;
                        }
                        if self.place(app, mask) {
                            self.recurse(app + 1, introduced + fresh as usize);
                            self.unplace(app, mask);
                        }
                    }
                }
            }
        }
    }
}

fn check_caps<T: Scalar>(
    instance: &ProblemInstance<T>,
    machines: usize,
    caps: OracleCaps,
) -> Result<(), Error> {
    if instance.apps().len() > caps.max_apps || machines > caps.max_machines {
        return Err(Error::SearchCapExceeded {
            apps: instance.apps().len(),
            machines,
            max_apps: caps.max_apps,
            max_machines: caps.max_machines,
        });
    }
    Ok(())
}

/// Exact balancing optimum over `m` machines: the minimum of
/// [`min_max_load_for_support`] over all memory-feasible supports.
pub fn min_max_load<T: Scalar>(
    instance: &ProblemInstance<T>,
    machines: usize,
    caps: OracleCaps,
) -> Result<Load<T>, Error> {
    check_caps(instance, machines, caps)?;
    Enumerator::run(instance, machines, SupportShape::AnySubset)
        .map(Load::from_nonneg)
        .ok_or_else(|| {
            Error::Infeasible(format!(
                "no memory-feasible support on {machines} machines"
            ))
        })
}

/// Balancing optimum with every application confined to a single machine
/// (classic two-dimensional packing restricted to a fixed machine count).
pub fn min_max_load_single<T: Scalar>(
    instance: &ProblemInstance<T>,
    machines: usize,
    caps: OracleCaps,
) -> Result<Load<T>, Error> {
    check_caps(instance, machines, caps)?;
    Enumerator::run(instance, machines, SupportShape::Singletons)
        .map(Load::from_nonneg)
        .ok_or_else(|| {
            Error::Infeasible(format!(
                "no memory-feasible single-instance placement on {machines} machines"
            ))
        })
}

fn min_machines_by<T: Scalar>(
    instance: &ProblemInstance<T>,
    caps: OracleCaps,
    solve: impl Fn(&ProblemInstance<T>, usize) -> Result<Load<T>, Error>,
) -> Result<usize, Error> {
    let cap = instance.config().require_cpu_cap()?;
    let lower = lower_bound_machines(instance)?;
    for m in lower..=caps.max_machines.max(lower) {
        check_caps(instance, m, caps)?;
        match solve(instance, m) {
            Ok(peak) if peak <= cap => return Ok(m),
            Ok(_) => continue,
            Err(Error::Infeasible(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::SearchCapExceeded {
        apps: instance.apps().len(),
        machines: caps.max_machines + 1,
        max_apps: caps.max_apps,
        max_machines: caps.max_machines,
    })
}

/// Exact packing optimum: the smallest machine count at or above the classic
/// lower bound whose balancing optimum fits under the CPU cap.
pub fn min_machines<T: Scalar>(
    instance: &ProblemInstance<T>,
    caps: OracleCaps,
) -> Result<usize, Error> {
    min_machines_by(instance, caps, |inst, m| min_max_load(inst, m, caps))
}

/// Exact packing optimum for the single-instance model.
pub fn min_machines_single<T: Scalar>(
    instance: &ProblemInstance<T>,
    caps: OracleCaps,
) -> Result<usize, Error> {
    min_machines_by(instance, caps, |inst, m| min_max_load_single(inst, m, caps))
}

pub mod flow {
    //! Transportation feasibility via max-flow, the independent check for the
    //! subset formula. Source -> application (capacity `p_i`), application ->
    //! supported machine (unbounded, `p_i` suffices), machine -> sink
    //! (capacity = the level under test). The level is achievable iff the max
    //! flow saturates every application edge.

    use super::SupportMatrix;
    use crate::scalar::Scalar;
    use crate::types::Load;

    /// Edmonds-Karp on a dense capacity matrix; node count here is tiny.
    fn max_flow<T: Scalar>(cap: &mut Vec<Vec<T>>, source: usize, sink: usize) -> T {
        let n = cap.len();
        let mut total = T::zero();
        loop {
            let mut parent = vec![usize::MAX; n];
            parent[source] = source;
            let mut queue = std::collections::VecDeque::from([source]);
            while let Some(u) = queue.pop_front() {
                for v in 0..n {
                    if parent[v] == usize::MAX && cap[u][v] > T::zero() {
                        parent[v] = u;
                        queue.push_back(v);
                    }
                }
            }
            if parent[sink] == usize::MAX {
                return total;
            }
            let mut bottleneck: Option<T> = None;
            let mut v = sink;
            while v != source {
                let u = parent[v];
                bottleneck = Some(match bottleneck {
                    Some(b) if b < cap[u][v] => b,
                    _ => cap[u][v],
                });
                v = u;
            }
            let push = bottleneck.expect("path found");
            let mut v = sink;
            while v != source {
                let u = parent[v];
                cap[u][v] = cap[u][v] - push;
                cap[v][u] = cap[v][u] + push;
                v = u;
            }
            total = total + push;
        }
    }

    /// Can every application's load be covered with no machine above `level`?
    pub fn feasible_at<T: Scalar>(
        support: &SupportMatrix,
        loads: &[Load<T>],
        level: Load<T>,
    ) -> bool {
        let n = loads.len();
        let m = support.machines();
        let nodes = n + m + 2;
        let source = 0;
        let sink = nodes - 1;
        let mut cap = vec![vec![T::zero(); nodes]; nodes];
        let mut demand = T::zero();
        for (i, load) in loads.iter().enumerate() {
            cap[source][1 + i] = load.value();
            demand = demand + load.value();
            for j in 0..m {
                if support.masks()[i] & (1 << j) != 0 {
                    cap[1 + i][1 + n + j] = load.value();
                }
            }
        }
        for j in 0..m {
            cap[1 + n + j][sink] = level.value();
        }
        max_flow(&mut cap, source, sink) == demand
    }

    /// Min-max level by searching the finite candidate set (subset load sums
    /// divided by subset sizes) with the flow feasibility predicate.
    pub fn min_max_load_via_flow<T: Scalar>(
        support: &SupportMatrix,
        loads: &[Load<T>],
    ) -> Load<T> {
        let m = support.machines();
        if m == 0 || loads.is_empty() {
            return Load::zero();
        }
        let full: u32 = if m == 32 { u32::MAX } else { (1 << m) - 1 };
        let mut candidates: Vec<T> = Vec::new();
        for subset in 1..=full {
            let mut trapped = T::zero();
            for (mask, load) in support.masks().iter().zip(loads) {
                if mask & !subset == 0 {
                    trapped = trapped + load.value();
                }
            }
            candidates.push(trapped / T::from_u64(subset.count_ones() as u64));
        }
        candidates.sort_by(|a, b| a.partial_cmp(b).expect("comparable levels"));
        candidates.dedup();
        // Feasibility is monotone in the level, so take the first that works.
        let mut lo = 0usize;
        let mut hi = candidates.len() - 1;
        while lo < hi {
            let mid = (lo + hi) / 2;
            if feasible_at(support, loads, Load::from_nonneg(candidates[mid])) {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        Load::from_nonneg(candidates[lo])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{AppId, Application, Load, MachineConfig};
    use crate::Rat;

    fn rload(n: i128, d: i128) -> Load<Rat> {
        Load::new(Rat::new(n, d)).unwrap()
    }

    fn instance(
        loads: &[(i128, u64)],
        mem_cap: u64,
        cpu_cap: Option<i128>,
    ) -> ProblemInstance<Rat> {
        let apps = loads
            .iter()
            .enumerate()
            .map(|(i, &(p, q))| {
                Application::new(AppId::new(i.to_string()), rload(p, 1), q).unwrap()
            })
            .collect();
        let config = MachineConfig::new(mem_cap, cpu_cap.map(|c| rload(c, 1))).unwrap();
        ProblemInstance::new(apps, config, None).unwrap()
    }

    fn caps(apps: usize, machines: usize) -> OracleCaps {
        OracleCaps {
            max_apps: apps,
            max_machines: machines,
        }
    }

    #[test]
    fn support_value_examples() {
        let loads = vec![rload(1, 1), rload(1, 1), rload(1, 1)];
        // a -> {0}, b -> {0,1}, c -> {1}
        let support = SupportMatrix::new(vec![0b01, 0b11, 0b10], 2).unwrap();
        assert_eq!(min_max_load_for_support(&support, &loads), rload(3, 2));

        // Everything everywhere balances perfectly.
        let support = SupportMatrix::new(vec![0b11, 0b11, 0b11], 2).unwrap();
        assert_eq!(min_max_load_for_support(&support, &loads), rload(3, 2));

        // Both apps pinned to machine 0.
        let loads = vec![rload(1, 1), rload(1, 1)];
        let support = SupportMatrix::new(vec![0b01, 0b01], 2).unwrap();
        assert_eq!(min_max_load_for_support(&support, &loads), rload(2, 1));
    }

    #[test]
    fn support_rejects_empty_rows() {
        assert!(SupportMatrix::new(vec![0b00], 2).is_err());
        assert!(SupportMatrix::new(vec![0b100], 2).is_err());
    }

    #[test]
    fn balancing_oracle_examples() {
        // Three unit apps, two machines, memory for two instances each.
        let inst = instance(&[(1, 1), (1, 1), (1, 1)], 2, None);
        assert_eq!(
            min_max_load(&inst, 2, OracleCaps::default()).unwrap(),
            rload(3, 2)
        );

        // Common case n=5, m=3, p=2, q=1, Q=2.
        let inst = instance(&[(2, 1); 5], 2, None);
        assert_eq!(min_max_load(&inst, 3, caps(6, 3)).unwrap(), rload(4, 1));

        // A single app carries its own load.
        let inst = instance(&[(7, 1)], 1, None);
        assert_eq!(
            min_max_load(&inst, 1, OracleCaps::default()).unwrap(),
            rload(7, 1)
        );
    }

    #[test]
    fn balancing_oracle_reports_memory_infeasibility() {
        let inst = instance(&[(1, 1); 5], 2, None);
        assert!(min_max_load(&inst, 2, OracleCaps::default())
            .unwrap_err()
            .is_infeasibility());
    }

    #[test]
    fn oracle_refuses_oversized_instances() {
        let inst = instance(&[(1, 1); 7], 7, None);
        assert!(matches!(
            min_max_load(&inst, 2, OracleCaps::default()),
            Err(Error::SearchCapExceeded { .. })
        ));
    }

    #[test]
    fn packing_oracle_examples() {
        // p=2 apps pair up under cap 3 when one may split.
        let inst = instance(&[(2, 1), (2, 1), (2, 1)], 2, Some(3));
        assert_eq!(min_machines(&inst, OracleCaps::default()).unwrap(), 2);

        // Splitting the big app beats dedicating machines to it.
        let inst = instance(&[(2, 2), (2, 2), (6, 1)], 3, Some(5));
        assert_eq!(min_machines(&inst, OracleCaps::default()).unwrap(), 2);

        // One app with p = 2P + 1 needs three machines.
        let inst = instance(&[(5, 1)], 1, Some(2));
        assert_eq!(min_machines(&inst, OracleCaps::default()).unwrap(), 3);
    }

    #[test]
    fn oracle_monotone_in_machine_count() {
        let inst = instance(&[(3, 1), (1, 1), (2, 1)], 2, None);
        let caps = caps(6, 4);
        let mut prev: Option<Load<Rat>> = None;
        for m in 2..=4 {
            let v = min_max_load(&inst, m, caps).unwrap();
            if let Some(p) = prev {
                assert!(v <= p, "m={m}: {v:?} > {p:?}");
            }
            prev = Some(v);
        }
    }

    #[test]
    fn singleton_restriction_matches_whole_app_packing() {
        // p=n=3, P=2n-1=5, Q=3: whole apps need one machine each, splitting
        // needs only ceil(9/5) = 2.
        let inst = instance(&[(3, 1), (3, 1), (3, 1)], 3, Some(5));
        assert_eq!(min_machines_single(&inst, caps(6, 5)).unwrap(), 3);
        assert_eq!(min_machines(&inst, caps(6, 5)).unwrap(), 2);
    }

    #[test]
    fn cut_formula_agrees_with_flow_on_fixed_supports() {
        let loads = vec![rload(3, 2), rload(2, 1), rload(1, 3)];
        let support = SupportMatrix::new(vec![0b011, 0b110, 0b101], 3).unwrap();
        let by_formula = min_max_load_for_support(&support, &loads);
        let by_flow = flow::min_max_load_via_flow(&support, &loads);
        assert_eq!(by_formula, by_flow);
        assert!(flow::feasible_at(&support, &loads, by_formula));
    }
}
