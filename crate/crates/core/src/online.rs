//! Online scheduling (LBS and its variants): per-arrival-batch candidate
//! generation and load-balanced commitment against a mutable resource
//! timeline.

use crate::instance::{Interval, ScheduleInstance};
use crate::model::{CoverageWindow, Direction, MachineId, Scenario, Slot};
use crate::offline::Schedule;
use crate::Result;

const CAP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperationTiming {
    Earliest,
    Latest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AllocationRule {
    SmallestFeasible,
    LargestOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OnlinePolicy {
    pub timing: OperationTiming,
    pub allocation: AllocationRule,
}

impl OnlinePolicy {
    pub const LBS: OnlinePolicy = OnlinePolicy {
        timing: OperationTiming::Earliest,
        allocation: AllocationRule::SmallestFeasible,
    };
    pub const LBS_LATE: OnlinePolicy = OnlinePolicy {
        timing: OperationTiming::Latest,
        allocation: AllocationRule::SmallestFeasible,
    };
    pub const LC_EARLY: OnlinePolicy = OnlinePolicy {
        timing: OperationTiming::Earliest,
        allocation: AllocationRule::LargestOnly,
    };
    pub const LC_LATE: OnlinePolicy = OnlinePolicy {
        timing: OperationTiming::Latest,
        allocation: AllocationRule::LargestOnly,
    };

    pub fn parse(name: &str) -> Option<OnlinePolicy> {
        match name {
            "lbs" => Some(Self::LBS),
            "lbs-late" => Some(Self::LBS_LATE),
            "lc-early" => Some(Self::LC_EARLY),
            "lc-late" => Some(Self::LC_LATE),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match (self.timing, self.allocation) {
            (OperationTiming::Earliest, AllocationRule::SmallestFeasible) => "lbs",
            (OperationTiming::Latest, AllocationRule::SmallestFeasible) => "lbs-late",
            (OperationTiming::Earliest, AllocationRule::LargestOnly) => "lc-early",
            (OperationTiming::Latest, AllocationRule::LargestOnly) => "lc-late",
        }
    }
}

/// Used resource fraction per machine per slot (1-based; index 0 unused).
#[derive(Debug, Clone)]
pub struct ResourceTimeline {
    pub used: Vec<Vec<f64>>,
}

impl ResourceTimeline {
    pub fn new(machines: usize, horizon: Slot) -> ResourceTimeline {
        ResourceTimeline {
            used: vec![vec![0.0; horizon as usize + 1]; machines],
        }
    }

    fn fits(&self, m: MachineId, iv: Interval, c: f64) -> bool {
        (iv.start..=iv.end).all(|t| self.used[m.0][t as usize] + c <= 1.0 + CAP_TOL)
    }

    fn idle(&self, m: MachineId, iv: Interval) -> bool {
        (iv.start..=iv.end).all(|t| self.used[m.0][t as usize] == 0.0)
    }

    fn commit(&mut self, m: MachineId, iv: Interval, c: f64) {
        for t in iv.start..=iv.end {
            self.used[m.0][t as usize] += c;
        }
    }
}

/// A window-pair choice for one job, before contention is considered.
#[derive(Debug, Clone)]
pub struct WindowCandidate {
    pub job: usize,
    pub uplink_window: usize,
    pub downlink_window: usize,
    pub energy: f64,
}

/// Candidates for an arrival batch with positive energy and window-feasible
/// timing, sorted by energy descending (ties by job and window starts).
pub fn generate_candidates(scenario: &Scenario, arrivals: &[usize]) -> Result<Vec<WindowCandidate>> {
    let mut out = Vec::new();
    for &j in arrivals {
        let job = &scenario.jobs[j];
        for (uw_idx, uw) in job.windows.iter().enumerate() {
            if scenario.window_direction(uw)? != Direction::Uplink {
                continue;
            }
            let d_u = scenario.offload_duration(job, uw)? as i64;
            let tu_lo = (job.release as i64).max(uw.start as i64);
            let tu_hi = uw.end as i64 - d_u + 1;
            if tu_lo > tu_hi {
                continue;
            }
            for (dw_idx, dw) in job.windows.iter().enumerate() {
                if scenario.window_direction(dw)? != Direction::Downlink {
                    continue;
                }
                let d_d = scenario.download_duration(job, dw)? as i64;
                let td_hi = (dw.end as i64).min(job.deadline as i64) - d_d + 1;
                if (dw.start as i64) > td_hi {
                    continue;
                }
                let energy = scenario.saved_energy(job, uw, dw)?;
                if energy > 0.0 {
                    out.push(WindowCandidate {
                        job: j,
                        uplink_window: uw_idx,
                        downlink_window: dw_idx,
                        energy,
                    });
                }
            }
        }
    }
    out.sort_by(|a, b| {
        b.energy
            .total_cmp(&a.energy)
            .then_with(|| a.job.cmp(&b.job))
            .then_with(|| a.uplink_window.cmp(&b.uplink_window))
            .then_with(|| a.downlink_window.cmp(&b.downlink_window))
    });
    Ok(out)
}

fn find_fit<F: Fn(Slot) -> bool>(lo: i64, hi: i64, timing: OperationTiming, ok: F) -> Option<Slot> {
    if lo > hi || lo < 1 {
        return None;
    }
    match timing {
        OperationTiming::Earliest => (lo..=hi).map(|t| t as Slot).find(|&t| ok(t)),
        OperationTiming::Latest => (lo..=hi).rev().map(|t| t as Slot).find(|&t| ok(t)),
    }
}

/// Attempts to commit one candidate; returns the bound instance on success,
/// None when the candidate is skipped.
pub fn schedule_step(
    scenario: &Scenario,
    candidate: &WindowCandidate,
    timelines: &mut ResourceTimeline,
    policy: OnlinePolicy,
) -> Result<Option<ScheduleInstance>> {
    let job = &scenario.jobs[candidate.job];
    let uw: &CoverageWindow = &job.windows[candidate.uplink_window];
    let dw: &CoverageWindow = &job.windows[candidate.downlink_window];
    let m_u = scenario.machine_id(&uw.vap).expect("validated");
    let m_d = scenario.machine_id(&dw.vap).expect("validated");
    let d_u = scenario.offload_duration(job, uw)? as i64;
    let d_d = scenario.download_duration(job, dw)? as i64;

    // Offload start: first (or last) idle fit inside the window.
    let tu_lo = (job.release as i64).max(uw.start as i64);
    let tu_hi = uw.end as i64 - d_u + 1;
    let Some(t_u) = find_fit(tu_lo, tu_hi, policy.timing, |t| {
        timelines.idle(m_u, Interval::new(t, d_u as Slot))
    }) else {
        return Ok(None);
    };

    // Provisional download start: latest idle fit (defines the processing
    // window upper end).
    let td_hi = (dw.end as i64).min(job.deadline as i64) - d_d + 1;
    let Some(t_d0) = find_fit(dw.start as i64, td_hi, OperationTiming::Latest, |t| {
        timelines.idle(m_d, Interval::new(t, d_d as Slot))
    }) else {
        return Ok(None);
    };

    // Per capable server: smallest feasible allocation (or largest only) and
    // the average-utilization score over the feasible processing span.
    struct ServerChoice {
        server: MachineId,
        server_idx: usize,
        alloc: f64,
        duration: i64,
        t_e: i64,
        t_l: i64,
        score: f64,
        d_up: i64,
        d_pd: i64,
    }
    let mut best: Option<ServerChoice> = None;
    let base = scenario.uplink_aps.len() + scenario.downlink_aps.len();
    for sid in &job.capable_servers {
        let m_p = scenario.machine_id(sid).expect("validated");
        let server_idx = m_p.0 - base;
        let d_up = scenario.forward_duration(job.input_mb, m_u, m_p)? as i64;
        let d_pd = scenario.forward_duration(job.output_mb, m_p, m_d)? as i64;
        let t_e = t_u as i64 + d_u + d_up; // earliest processing start
        let t_l = t_d0 as i64 - d_pd - 1; // latest processing finish
        if t_e > t_l || t_e < 1 {
            continue;
        }
        let options = &scenario.servers[server_idx].options;
        let considered: Vec<f64> = match policy.allocation {
            AllocationRule::SmallestFeasible => options.clone(),
            AllocationRule::LargestOnly => vec![*options.last().expect("nonempty")],
        };
        for c in considered {
            let d_p = scenario.processing_duration(job, server_idx, c)? as i64;
            let found = find_fit(t_e, t_l - d_p + 1, OperationTiming::Earliest, |t| {
                timelines.fits(m_p, Interval::new(t, d_p as Slot), c)
            });
            if found.is_some() {
                let span = (t_l - t_e + 1) as f64;
                let busy: f64 = (t_e..=t_l)
                    .map(|t| timelines.used[m_p.0][t as usize])
                    .sum();
                let score = (c * d_p as f64 + busy) / span;
                let better = best
                    .as_ref()
                    .map_or(true, |b| score < b.score - 1e-12);
                if better {
                    best = Some(ServerChoice {
                        server: m_p,
                        server_idx,
                        alloc: c,
                        duration: d_p,
                        t_e,
                        t_l,
                        score,
                        d_up,
                        d_pd,
                    });
                }
                break; // first feasible option for this server
            }
        }
    }
    let Some(choice) = best else {
        return Ok(None);
    };
    let _ = (choice.server_idx, choice.d_up);

    // Processing start: minimize peak load, tie-break by policy timing.
    let d_p = choice.duration;
    let c = choice.alloc;
    let starts: Vec<Slot> = (choice.t_e..=choice.t_l - d_p + 1)
        .map(|t| t as Slot)
        .filter(|&t| timelines.fits(choice.server, Interval::new(t, d_p as Slot), c))
        .collect();
    let peak = |t: Slot| -> f64 {
        (t..t + d_p as Slot)
            .map(|s| timelines.used[choice.server.0][s as usize] + c)
            .fold(0.0, f64::max)
    };
    let t_p = match policy.timing {
        OperationTiming::Earliest => starts
            .iter()
            .copied()
            .min_by(|&a, &b| peak(a).total_cmp(&peak(b)).then(a.cmp(&b))),
        OperationTiming::Latest => starts
            .iter()
            .copied()
            .min_by(|&a, &b| peak(a).total_cmp(&peak(b)).then(b.cmp(&a))),
    }
    .expect("a feasible start was found above");

    // Final download start.
    let t_d = match policy.timing {
        OperationTiming::Earliest => {
            let lo = (dw.start as i64).max(t_p as i64 + d_p + choice.d_pd);
            find_fit(lo, td_hi, OperationTiming::Earliest, |t| {
                timelines.idle(m_d, Interval::new(t, d_d as Slot))
            })
            .expect("t_d0 satisfies the bound")
        }
        OperationTiming::Latest => t_d0,
    };

    let offload = Interval::new(t_u, d_u as Slot);
    let process = Interval::new(t_p, d_p as Slot);
    let download = Interval::new(t_d, d_d as Slot);
    timelines.commit(m_u, offload, 1.0);
    timelines.commit(choice.server, process, c);
    timelines.commit(m_d, download, 1.0);
    Ok(Some(ScheduleInstance {
        job: candidate.job,
        uplink: m_u,
        server: choice.server,
        downlink: m_d,
        offload,
        process,
        download,
        alloc: c,
        energy: candidate.energy,
    }))
}

/// Runs the online scheduler over the scenario's jobs grouped by release
/// slot. Decisions for a batch depend only on state at its release, so any
/// prefix of the stream replays identically.
pub fn lbs(scenario: &Scenario, policy: OnlinePolicy) -> Result<Schedule> {
    let mut timelines =
        ResourceTimeline::new(scenario.machine_count(), scenario.time_grid.horizon);
    lbs_with_timeline(scenario, policy, &mut timelines)
}

pub fn lbs_with_timeline(
    scenario: &Scenario,
    policy: OnlinePolicy,
    timelines: &mut ResourceTimeline,
) -> Result<Schedule> {
    // Arrival batches in release order.
    let mut order: Vec<usize> = (0..scenario.jobs.len()).collect();
    order.sort_by_key(|&j| (scenario.jobs[j].release, j));

    let mut committed: Vec<ScheduleInstance> = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let slot = scenario.jobs[order[i]].release;
        let mut batch = Vec::new();
        while i < order.len() && scenario.jobs[order[i]].release == slot {
            batch.push(order[i]);
            i += 1;
        }
        let candidates = generate_candidates(scenario, &batch)?;
        let mut scheduled: std::collections::HashSet<usize> = std::collections::HashSet::new();
        for cand in &candidates {
            if scheduled.contains(&cand.job) {
                continue;
            }
            if let Some(inst) = schedule_step(scenario, cand, timelines, policy)? {
                scheduled.insert(cand.job);
                committed.push(inst);
            }
        }
    }
    Ok(Schedule::new(committed))
}
