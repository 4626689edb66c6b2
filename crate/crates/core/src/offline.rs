//! Offline scheduling: randomized rounding for light instances, a
//! partial-elimination-order pass plus fractional local ratio for heavy
//! instances, the best-of-two LHJS driver, and the SortAll baseline.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::instance::{self, InstanceSet, Interval, ScheduleInstance};
use crate::lp::{self, FractionalSolution};
use crate::model::{MachineId, Scenario, Slot};
use crate::simplex::PivotRule;
use crate::{Error, Result};

/// A feasible set of selected instances, at most one per job.
#[derive(Debug, Clone)]
pub struct Schedule {
    pub selected: Vec<ScheduleInstance>,
    pub total_energy: f64,
}

impl Schedule {
    pub fn new(mut selected: Vec<ScheduleInstance>) -> Schedule {
        selected.sort_by_key(|i| i.job);
        // `+ 0.0` maps a negative zero (possible when summing no elements
        // after sign-flipping arithmetic upstream) to plain 0.
        let total_energy = selected.iter().map(|i| i.energy).sum::<f64>() + 0.0;
        Schedule {
            selected,
            total_energy,
        }
    }

    pub fn empty() -> Schedule {
        Schedule {
            selected: Vec::new(),
            total_energy: 0.0,
        }
    }
}

/// Slack tolerated on fractional capacity sums.
const CAP_TOL: f64 = 1e-9;
/// Slack tolerated on the elimination-order inequality (<= 6).
const ORDER_TOL: f64 = 1e-7;
/// Fractional values at or below this are treated as zero.
const SUPPORT_TOL: f64 = 1e-9;

/// Test helper: true iff the admitted (machine, interval, allocation)
/// operations respect capacity at every slot, not only at interval starts.
pub fn interval_admission_is_capacity_safe(ops: &[(MachineId, Interval, f64)]) -> bool {
    use std::collections::HashMap;
    let mut used: HashMap<(MachineId, Slot), f64> = HashMap::new();
    for (m, iv, c) in ops {
        for t in iv.start..=iv.end {
            let u = used.entry((*m, t)).or_insert(0.0);
            *u += c;
            if *u > 1.0 + CAP_TOL {
                return false;
            }
        }
    }
    true
}

/// Randomized rounding of an optimal LIS solution (three-step: job
/// selection with probability `y(L_j)/kappa`, per-job instance selection by
/// the prefix-sum rule, then greedy start-ordered interval admission).
/// Deterministic for a fixed seed: one generator consumed in job order, then
/// selected-job order.
pub fn rand_round(
    set: &InstanceSet,
    y: &FractionalSolution,
    kappa: f64,
    seed: u64,
) -> Result<Schedule> {
    if kappa < 1.0 {
        return Err(Error::BadKappa(kappa));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Group y over jobs.
    let njobs = set.job_count();
    let mut job_vars: Vec<Vec<(usize, f64)>> = vec![Vec::new(); njobs];
    for &(gi, v) in &y.values {
        job_vars[set.instances[gi].job].push((gi, v));
    }
    let job_mass: Vec<f64> = job_vars
        .iter()
        .map(|vs| vs.iter().map(|&(_, v)| v).sum())
        .collect();

    // Step 1: pick jobs.
    let mut picked_jobs = Vec::new();
    for j in 0..njobs {
        let val: f64 = rng.gen();
        if val <= job_mass[j] / kappa && job_mass[j] > 0.0 {
            picked_jobs.push(j);
        }
    }

    // Step 2: one instance per picked job via the prefix-sum rule.
    let mut selected: Vec<usize> = Vec::new();
    for &j in &picked_jobs {
        let val: f64 = 1.0 - rng.gen::<f64>(); // (0, 1]
        let mass = job_mass[j];
        let mut acc = 0.0;
        let mut chosen = None;
        for &(gi, v) in &job_vars[j] {
            acc += v / mass;
            if val <= acc {
                chosen = Some(gi);
                break;
            }
        }
        // Float shortfall: fall back to the last positive entry.
        let chosen = chosen.or_else(|| {
            job_vars[j]
                .iter()
                .rev()
                .find(|&&(_, v)| v > 0.0)
                .map(|&(gi, _)| gi)
        });
        if let Some(gi) = chosen {
            selected.push(gi);
        }
    }

    // Step 3: per-machine greedy interval admission in ascending start order.
    let mut machine_ops: std::collections::BTreeMap<MachineId, Vec<(Interval, f64, usize, u8)>> =
        std::collections::BTreeMap::new();
    for &gi in &selected {
        for (k, (m, iv, c)) in set.instances[gi].operations().into_iter().enumerate() {
            machine_ops.entry(m).or_default().push((iv, c, gi, k as u8));
        }
    }
    let mut admitted: std::collections::HashSet<(usize, u8)> = std::collections::HashSet::new();
    for (_m, ops) in machine_ops.iter_mut() {
        ops.sort_by_key(|&(iv, _, gi, k)| (iv.start, iv.end, gi, k));
        let mut taken: Vec<(Interval, f64, usize, u8)> = Vec::new();
        for &(iv, c, gi, k) in ops.iter() {
            let active: f64 = taken
                .iter()
                .filter(|(tiv, _, _, _)| tiv.contains(iv.start))
                .map(|&(_, tc, _, _)| tc)
                .sum();
            if c + active <= 1.0 + CAP_TOL {
                taken.push((iv, c, gi, k));
                admitted.insert((gi, k));
            }
        }
    }

    let kept: Vec<ScheduleInstance> = selected
        .iter()
        .filter(|&&gi| (0..3u8).all(|k| admitted.contains(&(gi, k))))
        .map(|&gi| set.instances[gi].clone())
        .collect();
    Ok(Schedule::new(kept))
}

/// For each member instance: positions (into `members`) of same-job
/// instances and of other-job instances sharing a machine-overlapping
/// operation interval.
#[derive(Debug, Clone)]
pub struct NeighborIndex {
    /// Global instance indices, ascending (enumeration order).
    pub members: Vec<usize>,
    pub same_job: Vec<Vec<u32>>,
    pub adjacent: Vec<Vec<u32>>,
}

pub fn build_neighbor_index(set: &InstanceSet, members: &[usize]) -> NeighborIndex {
    let n = members.len();
    let mut same_job: Vec<Vec<u32>> = vec![Vec::new(); n];
    let mut adjacent: Vec<Vec<u32>> = vec![Vec::new(); n];

    // Same-job lists by grouping.
    let mut by_job: std::collections::HashMap<usize, Vec<u32>> = std::collections::HashMap::new();
    for (p, &gi) in members.iter().enumerate() {
        by_job.entry(set.instances[gi].job).or_default().push(p as u32);
    }
    for group in by_job.values() {
        for &p in group {
            same_job[p as usize] = group.iter().copied().filter(|&q| q != p).collect();
        }
    }

    // Machine-overlap adjacency via per-machine sweep over start-sorted
    // intervals: for pairs sorted by start, overlap iff later.start <= earlier.end.
    let mut per_machine: std::collections::HashMap<MachineId, Vec<(Interval, u32)>> =
        std::collections::HashMap::new();
    for (p, &gi) in members.iter().enumerate() {
        for (m, iv, _) in set.instances[gi].operations() {
            per_machine.entry(m).or_default().push((iv, p as u32));
        }
    }
    for (_m, items) in per_machine.iter_mut() {
        items.sort_by_key(|&(iv, p)| (iv.start, iv.end, p));
        for i in 0..items.len() {
            let (iv_i, p_i) = items[i];
            for &(iv_j, p_j) in items[i + 1..].iter() {
                if iv_j.start > iv_i.end {
                    break;
                }
                if p_i == p_j {
                    continue;
                }
                let (a, b) = (p_i as usize, p_j as usize);
                if set.instances[members[a]].job != set.instances[members[b]].job {
                    adjacent[a].push(p_j);
                    adjacent[b].push(p_i);
                }
            }
        }
    }
    for list in adjacent.iter_mut() {
        list.sort_unstable();
        list.dedup();
    }
    NeighborIndex {
        members: members.to_vec(),
        same_job,
        adjacent,
    }
}

/// How the FracLR add-back step judges feasibility.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AddBackRule {
    /// Heavy exclusivity: no machine-overlap at all between selected
    /// instances (plus at most one per job).
    HeavyExclusive,
    /// Full fractional capacity per (7a)/(7b); used by SortAll.
    FractionalCapacity,
}

/// Fractional local ratio over an ordered instance list. `order` holds
/// positions into `index.members`, smallest index first. Implemented with an
/// explicit stack so recursion depth is bounded by the list length.
pub fn frac_lr(
    set: &InstanceSet,
    index: &NeighborIndex,
    order: &[u32],
    energies: &[f64],
    rule: AddBackRule,
) -> Schedule {
    // rank in F of each member position
    let mut rank: std::collections::HashMap<u32, usize> = std::collections::HashMap::new();
    for (r, &p) in order.iter().enumerate() {
        rank.insert(p, r);
    }

    let mut w: Vec<f64> = energies.to_vec(); // indexed by rank in `order`
    let mut alive: Vec<bool> = vec![true; order.len()];
    let mut picks: Vec<usize> = Vec::new(); // ranks, outermost layer first

    loop {
        let mut chosen = None;
        for r in 0..order.len() {
            if alive[r] && w[r] <= 0.0 {
                alive[r] = false;
            }
            if chosen.is_none() && alive[r] {
                chosen = Some(r);
            }
        }
        let Some(r) = chosen else { break };
        let p = order[r] as usize;
        let wl = w[r];
        picks.push(r);
        // w1 is supported on {l} ∪ L(l) ∪ A(l); subtract it layer by layer.
        w[r] -= wl;
        for &q in index.same_job[p].iter().chain(index.adjacent[p].iter()) {
            if let Some(&rq) = rank.get(&q) {
                if alive[rq] {
                    w[rq] -= wl;
                }
            }
        }
    }

    // Unwind from the innermost layer, adding each pick back when feasible.
    let mut chosen_global: Vec<usize> = Vec::new();
    let mut used: std::collections::HashMap<(MachineId, Slot), f64> =
        std::collections::HashMap::new();
    let mut jobs_taken: std::collections::HashSet<usize> = std::collections::HashSet::new();
    for &r in picks.iter().rev() {
        let gi = index.members[order[r] as usize];
        let inst = &set.instances[gi];
        if jobs_taken.contains(&inst.job) {
            continue;
        }
        let ok = match rule {
            AddBackRule::HeavyExclusive => chosen_global
                .iter()
                .all(|&og| !set.instances[og].machine_overlaps(inst)),
            AddBackRule::FractionalCapacity => inst.operations().iter().all(|(m, iv, c)| {
                (iv.start..=iv.end)
                    .all(|t| used.get(&(*m, t)).copied().unwrap_or(0.0) + c <= 1.0 + CAP_TOL)
            }),
        };
        if ok {
            if rule == AddBackRule::FractionalCapacity {
                for (m, iv, c) in inst.operations() {
                    for t in iv.start..=iv.end {
                        *used.entry((m, t)).or_insert(0.0) += c;
                    }
                }
            }
            jobs_taken.insert(inst.job);
            chosen_global.push(gi);
        }
    }

    Schedule::new(
        chosen_global
            .into_iter()
            .map(|gi| set.instances[gi].clone())
            .collect(),
    )
}

/// The elimination-order pass shared by SortSched and SortAll: repeatedly
/// take the smallest-index remaining instance whose load sum satisfies the
/// <= 6 bound, producing the FracLR processing order.
fn elimination_order(
    index: &NeighborIndex,
    z: &FractionalSolution,
    require_bound: bool,
) -> Result<Vec<u32>> {
    let n = index.members.len();
    let zv: Vec<f64> = index.members.iter().map(|&gi| z.value(gi)).collect();
    let mut load: Vec<f64> = (0..n)
        .map(|p| zv[p] + index.adjacent[p].iter().map(|&q| zv[q as usize]).sum::<f64>())
        .collect();
    let mut remaining: Vec<bool> = vec![true; n];
    let mut qualifying: BTreeSet<usize> = (0..n).filter(|&p| load[p] <= 6.0 + ORDER_TOL).collect();
    let mut order: Vec<u32> = Vec::with_capacity(n);
    let mut left = n;

    while left > 0 {
        let p = match qualifying.iter().next().copied() {
            Some(p) => p,
            None if require_bound => {
                return Err(Error::Internal(
                    "no instance satisfies the elimination-order bound; \
                     infeasible fractional solution"
                        .into(),
                ));
            }
            None => {
                // No guarantee outside HIS; fall back to the least-loaded
                // remaining instance (smallest index on ties).
                (0..n)
                    .filter(|&q| remaining[q])
                    .min_by(|&a, &b| load[a].total_cmp(&load[b]).then(a.cmp(&b)))
                    .expect("left > 0")
            }
        };
        debug_assert!(!require_bound || load[p] <= 6.0 + ORDER_TOL);
        qualifying.remove(&p);
        remaining[p] = false;
        order.push(p as u32);
        left -= 1;
        for &q in &index.adjacent[p] {
            let q = q as usize;
            if remaining[q] {
                let before = load[q];
                load[q] -= zv[p];
                if before > 6.0 + ORDER_TOL && load[q] <= 6.0 + ORDER_TOL {
                    qualifying.insert(q);
                }
            }
        }
    }
    Ok(order)
}

/// SortSched: elimination ordering over the support of an optimal HIS
/// solution followed by FracLR with heavy exclusivity.
pub fn sort_sched(set: &InstanceSet, heavy: &[usize], z: &FractionalSolution) -> Result<Schedule> {
    let support: Vec<usize> = heavy
        .iter()
        .copied()
        .filter(|&gi| z.value(gi) > SUPPORT_TOL)
        .collect();
    if support.is_empty() {
        return Ok(Schedule::empty());
    }
    let index = build_neighbor_index(set, &support);
    let order = elimination_order(&index, z, true)?;
    let energies: Vec<f64> = order
        .iter()
        .map(|&p| set.instances[index.members[p as usize]].energy)
        .collect();
    Ok(frac_lr(set, &index, &order, &energies, AddBackRule::HeavyExclusive))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Light,
    Heavy,
}

/// Everything LHJS produces, including the intermediate quantities reported
/// per run.
#[derive(Debug, Clone)]
pub struct LhjsOutcome {
    pub schedule: Schedule,
    pub light_schedule: Schedule,
    pub heavy_schedule: Schedule,
    pub lis_optimum: f64,
    pub his_optimum: f64,
    pub branch: Branch,
    pub instance_count: usize,
}

/// Algorithm 1: enumerate, split, solve LIS and HIS, round both sides, keep
/// the better schedule.
pub fn lhjs(scenario: &Scenario, seed: u64, kappa: f64, cap: usize) -> Result<LhjsOutcome> {
    let set = instance::enumerate_instances(scenario, cap)?;
    lhjs_on(&set, seed, kappa)
}

/// LHJS on a pre-enumerated instance set (lets callers reuse the LP solves
/// across rounding seeds).
pub fn lhjs_on(set: &InstanceSet, seed: u64, kappa: f64) -> Result<LhjsOutcome> {
    let (light, heavy) = instance::split_light_heavy(set);

    let y = if light.is_empty() {
        FractionalSolution::empty()
    } else {
        lp::solve(&lp::build_lis(set, &light), PivotRule::Dantzig)?
    };
    let light_schedule = rand_round(set, &y, kappa, seed)?;

    let z = if heavy.is_empty() {
        FractionalSolution::empty()
    } else {
        lp::solve(&lp::build_his(set, &heavy), PivotRule::Dantzig)?
    };
    let heavy_schedule = sort_sched(set, &heavy, &z)?;

    let branch = if light_schedule.total_energy >= heavy_schedule.total_energy {
        Branch::Light
    } else {
        Branch::Heavy
    };
    let schedule = match branch {
        Branch::Light => light_schedule.clone(),
        Branch::Heavy => heavy_schedule.clone(),
    };
    Ok(LhjsOutcome {
        schedule,
        light_schedule,
        heavy_schedule,
        lis_optimum: y.objective,
        his_optimum: z.objective,
        branch,
        instance_count: set.len(),
    })
}

/// SortAll baseline: the SortSched pipeline run over ALL instances on the
/// full relaxation, with fractional-capacity add-back.
pub fn sort_all(scenario: &Scenario, cap: usize) -> Result<Schedule> {
    let set = instance::enumerate_instances(scenario, cap)?;
    sort_all_on(&set)
}

pub fn sort_all_on(set: &InstanceSet) -> Result<Schedule> {
    if set.is_empty() {
        return Ok(Schedule::empty());
    }
    let all: Vec<usize> = (0..set.len()).collect();
    let x = lp::solve(&lp::build_full_relaxation(set, &all), PivotRule::Dantzig)?;
    let support: Vec<usize> = all
        .into_iter()
        .filter(|&gi| x.value(gi) > SUPPORT_TOL)
        .collect();
    if support.is_empty() {
        return Ok(Schedule::empty());
    }
    let index = build_neighbor_index(set, &support);
    let order = elimination_order(&index, &x, false)?;
    let energies: Vec<f64> = order
        .iter()
        .map(|&p| set.instances[index.members[p as usize]].energy)
        .collect();
    Ok(frac_lr(
        set,
        &index,
        &order,
        &energies,
        AddBackRule::FractionalCapacity,
    ))
}
