//! Schedule-instance enumeration: every feasible (mapping, allocation,
//! interval triple) combination with positive saved energy, the variable set
//! of the offline ILP.

use crate::model::{Direction, MachineId, Scenario, Slot};
use crate::{Error, Result};

/// Inclusive slot interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Interval {
    pub start: Slot,
    pub end: Slot,
}

impl Interval {
    pub fn new(start: Slot, duration: Slot) -> Interval {
        debug_assert!(duration >= 1);
        Interval {
            start,
            end: start + duration - 1,
        }
    }

    pub fn len(&self) -> Slot {
        self.end - self.start + 1
    }

    pub fn contains(&self, t: Slot) -> bool {
        self.start <= t && t <= self.end
    }

    pub fn overlaps(&self, other: &Interval) -> bool {
        self.start <= other.end && other.start <= self.end
    }
}

/// One fully bound candidate execution of a job.
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleInstance {
    pub job: usize,
    pub uplink: MachineId,
    pub server: MachineId,
    pub downlink: MachineId,
    pub offload: Interval,
    pub process: Interval,
    pub download: Interval,
    pub alloc: f64,
    pub energy: f64,
}

impl ScheduleInstance {
    /// The three (machine, interval, allocation) operations; offload and
    /// download occupy the full channel (c = 1).
    pub fn operations(&self) -> [(MachineId, Interval, f64); 3] {
        [
            (self.uplink, self.offload, 1.0),
            (self.server, self.process, self.alloc),
            (self.downlink, self.download, 1.0),
        ]
    }

    /// Indicator: does some operation interval of this instance occupy
    /// `machine` at slot `t`?
    pub fn on_machine_at(&self, machine: MachineId, t: Slot) -> bool {
        self.operations()
            .iter()
            .any(|(m, iv, _)| *m == machine && iv.contains(t))
    }

    /// True if some operation of `self` and some operation of `other` share a
    /// machine and overlap in time.
    pub fn machine_overlaps(&self, other: &ScheduleInstance) -> bool {
        self.operations().iter().any(|(m, iv, _)| {
            other
                .operations()
                .iter()
                .any(|(m2, iv2, _)| m == m2 && iv.overlaps(iv2))
        })
    }

    fn sort_key(&self) -> (usize, MachineId, MachineId, MachineId, u64, Slot, Slot, Slot) {
        (
            self.job,
            self.uplink,
            self.server,
            self.downlink,
            self.alloc.to_bits(),
            self.offload.start,
            self.process.start,
            self.download.start,
        )
    }
}

/// All enumerated instances, grouped contiguously by job in deterministic
/// order.
#[derive(Debug, Clone)]
pub struct InstanceSet {
    pub instances: Vec<ScheduleInstance>,
    job_ranges: Vec<(usize, usize)>,
}

impl InstanceSet {
    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn job_count(&self) -> usize {
        self.job_ranges.len()
    }

    /// Global indices of job `j`'s instances (a contiguous range).
    pub fn job_range(&self, j: usize) -> std::ops::Range<usize> {
        let (a, b) = self.job_ranges[j];
        a..b
    }

    pub fn of_job(&self, j: usize) -> &[ScheduleInstance] {
        let (a, b) = self.job_ranges[j];
        &self.instances[a..b]
    }

    /// Builds a set from pre-grouped instances (ascending job order);
    /// intended for tests that fabricate instance lists directly.
    #[cfg(test)]
    pub(crate) fn from_parts(instances: Vec<ScheduleInstance>, njobs: usize) -> InstanceSet {
        let mut job_ranges = Vec::with_capacity(njobs);
        let mut begin = 0;
        for j in 0..njobs {
            let end = instances[begin..]
                .iter()
                .position(|i| i.job != j)
                .map_or(instances.len(), |p| begin + p);
            job_ranges.push((begin, end));
            begin = end;
        }
        InstanceSet {
            instances,
            job_ranges,
        }
    }
}

/// Default guard against pseudo-polynomial blow-up.
pub const DEFAULT_INSTANCE_CAP: usize = 5_000_000;

/// Enumerates every tuple satisfying the per-instance constraints with
/// positive saved energy. Start-time ranges are derived by tightening the
/// timing chain, so no tuple outside `[1, horizon]` is ever generated.
/// Duplicate tuples reachable through several coverage windows are emitted
/// once.
pub fn enumerate_instances(scenario: &Scenario, cap: usize) -> Result<InstanceSet> {
    let mut instances = Vec::new();
    let mut job_ranges = Vec::with_capacity(scenario.jobs.len());

    for (j, job) in scenario.jobs.iter().enumerate() {
        let begin = instances.len();
        let mut per_job: Vec<ScheduleInstance> = Vec::new();

        let mut up_windows = Vec::new();
        let mut down_windows = Vec::new();
        for w in &job.windows {
            match scenario.window_direction(w)? {
                Direction::Uplink => up_windows.push(w),
                Direction::Downlink => down_windows.push(w),
            }
        }

        for uw in &up_windows {
            let d_u = scenario.offload_duration(job, uw)? as i64;
            let m_u = scenario.machine_id(&uw.vap).expect("validated");
            for dw in &down_windows {
                let energy = scenario.saved_energy(job, uw, dw)?;
                if energy <= 0.0 {
                    continue;
                }
                let d_d = scenario.download_duration(job, dw)? as i64;
                let m_d = scenario.machine_id(&dw.vap).expect("validated");

                let tu_lo = (job.release as i64).max(uw.start as i64);
                let tu_hi = uw.end as i64 - d_u + 1;
                let td_hi_global = (dw.end as i64).min(job.deadline as i64) - d_d + 1;

                for (s, sid) in job.capable_servers.iter().enumerate() {
                    let m_p = scenario.machine_id(sid).expect("validated");
                    let server_idx = m_p.0 - scenario.uplink_aps.len() - scenario.downlink_aps.len();
                    let _ = s;
                    let d_up = scenario.forward_duration(job.input_mb, m_u, m_p)? as i64;
                    let d_pd = scenario.forward_duration(job.output_mb, m_p, m_d)? as i64;
                    let options = scenario.servers[server_idx].options.clone();
                    for c in options {
                        let d_p = scenario.processing_duration(job, server_idx, c)? as i64;
                        for t_u in tu_lo..=tu_hi {
                            let tp_lo = t_u + d_u + d_up;
                            let tp_hi = td_hi_global - d_p - d_pd;
                            for t_p in tp_lo..=tp_hi {
                                let td_lo = (dw.start as i64).max(t_p + d_p + d_pd);
                                for t_d in td_lo..=td_hi_global {
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
                                    if per_job.len() + instances.len() > cap {
                                        return Err(Error::EnumerationOverflow {
                                            job: job.id.clone(),
                                            cap,
                                        });
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }

        per_job.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
        per_job.dedup_by(|a, b| a.sort_key() == b.sort_key());
        instances.extend(per_job);
        job_ranges.push((begin, instances.len()));
    }

    Ok(InstanceSet {
        instances,
        job_ranges,
    })
}

/// Partition into light (`c <= 1/2`) and heavy (`c > 1/2`) instance indices.
pub fn split_light_heavy(set: &InstanceSet) -> (Vec<usize>, Vec<usize>) {
    let mut light = Vec::new();
    let mut heavy = Vec::new();
    for (i, inst) in set.instances.iter().enumerate() {
        if inst.alloc <= 0.5 {
            light.push(i);
        } else {
            heavy.push(i);
        }
    }
    (light, heavy)
}

/// Debug dump, one row per instance.
pub fn dump_csv(scenario: &Scenario, set: &InstanceSet) -> String {
    let mut out = String::from(
        "job,uplink,server,downlink,offload_start,offload_end,process_start,process_end,download_start,download_end,alloc,energy_j\n",
    );
    for inst in &set.instances {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            scenario.jobs[inst.job].id,
            scenario.machine_label(inst.uplink),
            scenario.machine_label(inst.server),
            scenario.machine_label(inst.downlink),
            inst.offload.start,
            inst.offload.end,
            inst.process.start,
            inst.process.end,
            inst.download.start,
            inst.download.end,
            inst.alloc,
            inst.energy,
        ));
    }
    out
}
