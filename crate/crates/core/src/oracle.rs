//! Independent trust anchor: a slot-by-slot schedule validator, a literal
//! (range-free) instance enumerator, and an exhaustive branch-and-bound
//! integral optimum. Shares no generation logic with the production
//! enumerator on purpose.

use std::collections::HashMap;

use crate::instance::{Interval, ScheduleInstance};
use crate::model::{Direction, MachineId, Scenario, Slot};
use crate::offline::Schedule;
use crate::{Error, Result};

const CAP_TOL: f64 = 1e-9;
const ENERGY_TOL: f64 = 1e-9;

/// A single constraint violation, reported with enough context to locate it.
#[derive(Debug, Clone)]
pub struct Violation {
    pub constraint: &'static str,
    pub message: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{}] {}", self.constraint, self.message)
    }
}

/// Checks every per-instance constraint and every capacity row by direct
/// recomputation. Empty result means the schedule is feasible.
pub fn validate(scenario: &Scenario, schedule: &Schedule) -> Vec<Violation> {
    let mut violations = Vec::new();
    let horizon = scenario.time_grid.horizon;

    let mut per_job_count: HashMap<usize, usize> = HashMap::new();
    for inst in &schedule.selected {
        *per_job_count.entry(inst.job).or_insert(0) += 1;
    }
    for (&j, &count) in per_job_count.iter() {
        if count > 1 {
            violations.push(Violation {
                constraint: "7c",
                message: format!(
                    "job `{}` has {count} selected instances",
                    scenario.jobs[j].id
                ),
            });
        }
    }

    for inst in &schedule.selected {
        validate_instance(scenario, inst, horizon, &mut violations);
    }

    // Capacity rows, slot by slot.
    let mut usage: HashMap<(MachineId, Slot), Vec<(usize, f64)>> = HashMap::new();
    for inst in &schedule.selected {
        for (m, iv, c) in inst.operations() {
            for t in iv.start..=iv.end {
                usage.entry((m, t)).or_default().push((inst.job, c));
            }
        }
    }
    let mut keys: Vec<_> = usage.keys().copied().collect();
    keys.sort();
    for key in keys {
        let (m, t) = key;
        let users = &usage[&key];
        let is_server = scenario.server(m).is_some();
        if is_server {
            let total: f64 = users.iter().map(|&(_, c)| c).sum();
            if total > 1.0 + CAP_TOL {
                violations.push(Violation {
                    constraint: "7b",
                    message: format!(
                        "server `{}` overloaded at slot {t}: sum c = {total} (jobs {:?})",
                        scenario.machine_label(m),
                        users.iter().map(|&(j, _)| &scenario.jobs[j].id).collect::<Vec<_>>()
                    ),
                });
            }
        } else if users.len() > 1 {
            violations.push(Violation {
                constraint: "7a",
                message: format!(
                    "vAP `{}` used by {} intervals at slot {t} (jobs {:?})",
                    scenario.machine_label(m),
                    users.len(),
                    users.iter().map(|&(j, _)| &scenario.jobs[j].id).collect::<Vec<_>>()
                ),
            });
        }
    }
    violations
}

fn validate_instance(
    scenario: &Scenario,
    inst: &ScheduleInstance,
    horizon: Slot,
    violations: &mut Vec<Violation>,
) {
    let job = &scenario.jobs[inst.job];
    let jid = &job.id;
    let mut fail = |constraint: &'static str, msg: String| {
        violations.push(Violation {
            constraint,
            message: format!("job `{jid}`: {msg}"),
        });
    };

    for (name, iv) in [
        ("offload", inst.offload),
        ("process", inst.process),
        ("download", inst.download),
    ] {
        if iv.start < 1 || iv.end > horizon || iv.start > iv.end {
            fail(
                "interval",
                format!("{name} interval [{}, {}] outside [1, {horizon}]", iv.start, iv.end),
            );
        }
    }

    // Eq. 0 + Eq. 2: the offload interval must fit some uplink window on the
    // instance's vAP whose ring rate reproduces the interval length.
    let up_ok = job.windows.iter().any(|w| {
        matches!(scenario.window_direction(w), Ok(Direction::Uplink))
            && scenario.machine_id(&w.vap) == Some(inst.uplink)
            && w.start <= inst.offload.start
            && inst.offload.end <= w.end
            && scenario
                .offload_duration(job, w)
                .map_or(false, |d| d == inst.offload.len())
    });
    if !up_ok {
        fail("eq0/eq2", "no uplink coverage window matches the offload interval".into());
    }
    let down_ok = job.windows.iter().any(|w| {
        matches!(scenario.window_direction(w), Ok(Direction::Downlink))
            && scenario.machine_id(&w.vap) == Some(inst.downlink)
            && w.start <= inst.download.start
            && inst.download.end <= w.end
            && scenario
                .download_duration(job, w)
                .map_or(false, |d| d == inst.download.len())
    });
    if !down_ok {
        fail("eq0/eq5", "no downlink coverage window matches the download interval".into());
    }

    // Eq. 0: capable server with a declared option.
    let Some(server) = scenario.server(inst.server) else {
        fail("eq0", "processing machine is not a server".into());
        return;
    };
    if !job.capable_servers.contains(&server.id) {
        fail("eq0", format!("server `{}` not capable for this job", server.id));
    }
    if !server.options.contains(&inst.alloc) {
        fail("eq0", format!("allocation {} not offered by `{}`", inst.alloc, server.id));
        return;
    }
    let base = scenario.uplink_aps.len() + scenario.downlink_aps.len();
    match scenario.processing_duration(job, inst.server.0 - base, inst.alloc) {
        Ok(d) if d == inst.process.len() => {}
        Ok(d) => fail(
            "eq0",
            format!("processing interval length {} != table duration {d}", inst.process.len()),
        ),
        Err(e) => fail("eq0", e.to_string()),
    }

    // Eq. 1.
    if inst.offload.start < job.release {
        fail("eq1", format!("offload starts at {} before release {}", inst.offload.start, job.release));
    }
    // Eq. 3 / Eq. 4 with the backhaul forwarding durations.
    match scenario.forward_duration(job.input_mb, inst.uplink, inst.server) {
        Ok(d_up) => {
            if (inst.process.start as i64) < inst.offload.start as i64 + inst.offload.len() as i64 + d_up as i64 {
                fail("eq3", format!("processing starts before the input arrives (forward {d_up})"));
            }
        }
        Err(e) => fail("eq3", e.to_string()),
    }
    match scenario.forward_duration(job.output_mb, inst.server, inst.downlink) {
        Ok(d_pd) => {
            if (inst.download.start as i64) < inst.process.start as i64 + inst.process.len() as i64 + d_pd as i64 {
                fail("eq4", format!("download starts before the result arrives (forward {d_pd})"));
            }
        }
        Err(e) => fail("eq4", e.to_string()),
    }
    // Eq. 6.
    if inst.download.end > job.deadline {
        fail("eq6", format!("download ends at {} past deadline {}", inst.download.end, job.deadline));
    }

    // Positive energy, consistent with the model arithmetic.
    if inst.energy <= 0.0 {
        fail("energy", format!("non-positive saved energy {}", inst.energy));
    } else {
        let e_loc = scenario.local_energy(job);
        let slot_s = scenario.time_grid.slot_ms / 1000.0;
        let expected = e_loc
            - job.offload_power_w * inst.offload.len() as f64 * slot_s
            - job.download_power_w * inst.download.len() as f64 * slot_s;
        if (expected - inst.energy).abs() > ENERGY_TOL * (1.0 + expected.abs()) {
            fail("energy", format!("stored energy {} != recomputed {expected}", inst.energy));
        }
    }
}

/// Literal brute-force enumerator: nested loops over window pairs, servers,
/// options and all start-time triples in `[1, horizon]`, applying the
/// definition constraints one by one. Cross-checks the production
/// enumerator on tiny scenarios.
pub fn literal_enumerate(scenario: &Scenario) -> Result<Vec<ScheduleInstance>> {
    let horizon = scenario.time_grid.horizon as i64;
    let mut out = Vec::new();
    for (j, job) in scenario.jobs.iter().enumerate() {
        let mut per_job = Vec::new();
        for uw in &job.windows {
            if scenario.window_direction(uw)? != Direction::Uplink {
                continue;
            }
            for dw in &job.windows {
                if scenario.window_direction(dw)? != Direction::Downlink {
                    continue;
                }
                let energy = scenario.saved_energy(job, uw, dw)?;
                if energy <= 0.0 {
                    continue;
                }
                let d_u = scenario.offload_duration(job, uw)? as i64;
                let d_d = scenario.download_duration(job, dw)? as i64;
                let m_u = scenario.machine_id(&uw.vap).expect("validated");
                let m_d = scenario.machine_id(&dw.vap).expect("validated");
                for sid in &job.capable_servers {
                    let m_p = scenario.machine_id(sid).expect("validated");
                    let server_idx =
                        m_p.0 - scenario.uplink_aps.len() - scenario.downlink_aps.len();
                    let d_up = scenario.forward_duration(job.input_mb, m_u, m_p)? as i64;
                    let d_pd = scenario.forward_duration(job.output_mb, m_p, m_d)? as i64;
                    for &c in &scenario.servers[server_idx].options.clone() {
                        let d_p = scenario.processing_duration(job, server_idx, c)? as i64;
                        for t_u in 1..=horizon {
                            for t_p in 1..=horizon {
                                for t_d in 1..=horizon {
                                    let ok = job.release as i64 <= t_u
                                        && uw.start as i64 <= t_u
                                        && t_u + d_u - 1 <= uw.end as i64
                                        && t_u + d_u + d_up <= t_p
                                        && t_p + d_p + d_pd <= t_d
                                        && dw.start as i64 <= t_d
                                        && t_d + d_d - 1 <= dw.end as i64
                                        && t_d + d_d - 1 <= job.deadline as i64;
                                    if ok {
                                        per_job.push(ScheduleInstance {
                                            job: j,
                                            uplink: m_u,
                                            server: m_p,
                                            downlink: m_d,
                                            offload: Interval::new(t_u as Slot, d_u as Slot),
                                            process: Interval::new(t_p as Slot, d_p as Slot),
                                            download: Interval::new(t_d as Slot, d_d as Slot),
                                            alloc: c,
                                            energy,
                                        });
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        per_job.sort_by(key_cmp);
        per_job.dedup_by(|a, b| key_cmp(a, b) == std::cmp::Ordering::Equal);
        out.extend(per_job);
    }
    Ok(out)
}

fn key_cmp(a: &ScheduleInstance, b: &ScheduleInstance) -> std::cmp::Ordering {
    let key = |i: &ScheduleInstance| {
        (
            i.job,
            i.uplink,
            i.server,
            i.downlink,
            i.alloc.to_bits(),
            i.offload.start,
            i.process.start,
            i.download.start,
        )
    };
    key(a).cmp(&key(b))
}

/// Per-job counts from the literal enumerator.
pub fn independent_instance_count(scenario: &Scenario) -> Result<Vec<usize>> {
    let all = literal_enumerate(scenario)?;
    let mut counts = vec![0usize; scenario.jobs.len()];
    for inst in &all {
        counts[inst.job] += 1;
    }
    Ok(counts)
}

#[derive(Debug, Clone, Copy)]
pub struct OracleCaps {
    pub max_jobs: usize,
    pub max_instances: usize,
}

impl Default for OracleCaps {
    fn default() -> Self {
        OracleCaps {
            max_jobs: 8,
            max_instances: 20_000,
        }
    }
}

/// Exhaustive depth-first search over per-job choices (each instance or
/// skip), pruning by remaining-energy bound. Returns the true integral
/// optimum; refuses inputs past the caps rather than approximating.
pub fn exact_optimum(
    scenario: &Scenario,
    instances: &[ScheduleInstance],
    caps: OracleCaps,
) -> Result<(f64, Schedule)> {
    let njobs = scenario.jobs.len();
    if njobs > caps.max_jobs {
        return Err(Error::OracleRefused(format!(
            "{njobs} jobs exceeds cap {}",
            caps.max_jobs
        )));
    }
    if instances.len() > caps.max_instances {
        return Err(Error::OracleRefused(format!(
            "{} instances exceeds cap {}",
            instances.len(),
            caps.max_instances
        )));
    }

    let mut by_job: Vec<Vec<usize>> = vec![Vec::new(); njobs];
    for (i, inst) in instances.iter().enumerate() {
        by_job[inst.job].push(i);
    }
    let best_per_job: Vec<f64> = by_job
        .iter()
        .map(|g| {
            g.iter()
                .map(|&i| instances[i].energy)
                .fold(0.0f64, f64::max)
        })
        .collect();
    // Suffix sums of the best-case remaining energy.
    let mut suffix = vec![0.0; njobs + 1];
    for j in (0..njobs).rev() {
        suffix[j] = suffix[j + 1] + best_per_job[j];
    }

    struct Dfs<'a> {
        scenario: &'a Scenario,
        instances: &'a [ScheduleInstance],
        by_job: &'a [Vec<usize>],
        suffix: &'a [f64],
        used: HashMap<(MachineId, Slot), f64>,
        picked: Vec<usize>,
        best_energy: f64,
        best_set: Vec<usize>,
    }

    impl Dfs<'_> {
        fn fits(&self, inst: &ScheduleInstance) -> bool {
            inst.operations().iter().all(|(m, iv, c)| {
                let is_server = self.scenario.server(*m).is_some();
                (iv.start..=iv.end).all(|t| {
                    let u = self.used.get(&(*m, t)).copied().unwrap_or(0.0);
                    if is_server {
                        u + c <= 1.0 + CAP_TOL
                    } else {
                        u == 0.0
                    }
                })
            })
        }

        fn go(&mut self, job: usize, energy: f64) {
            if job == self.by_job.len() {
                if energy > self.best_energy {
                    self.best_energy = energy;
                    self.best_set = self.picked.clone();
                }
                return;
            }
            if energy + self.suffix[job] <= self.best_energy {
                return;
            }
            for &i in &self.by_job[job].to_vec() {
                let inst = &self.instances[i];
                if self.fits(inst) {
                    for (m, iv, c) in inst.operations() {
                        for t in iv.start..=iv.end {
                            *self.used.entry((m, t)).or_insert(0.0) += c;
                        }
                    }
                    self.picked.push(i);
                    self.go(job + 1, energy + inst.energy);
                    self.picked.pop();
                    for (m, iv, c) in inst.operations() {
                        for t in iv.start..=iv.end {
                            *self.used.get_mut(&(m, t)).unwrap() -= c;
                        }
                    }
                }
            }
            // Skip this job.
            self.go(job + 1, energy);
        }
    }

    let mut dfs = Dfs {
        scenario,
        instances,
        by_job: &by_job,
        suffix: &suffix,
        used: HashMap::new(),
        picked: Vec::new(),
        best_energy: 0.0,
        best_set: Vec::new(),
    };
    dfs.go(0, 0.0);

    let schedule = Schedule::new(
        dfs.best_set
            .iter()
            .map(|&i| instances[i].clone())
            .collect(),
    );
    Ok((dfs.best_energy, schedule))
}
