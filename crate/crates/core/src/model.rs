//! Discrete-time MEC system model: machines, jobs, coverage windows, and the
//! duration/energy arithmetic every scheduler in this crate relies on.
//!
//! All temporal quantities are integer slots in `[1, horizon]`. Durations are
//! rounded up to whole slots at load/derivation time and energies are computed
//! from the rounded durations, so the objective, the validator and the oracle
//! all see identical numbers.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// 1-based time slot index.
pub type Slot = u32;

/// Global machine index: uplink vAPs first, then downlink vAPs, then servers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MachineId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MachineKind {
    Uplink,
    Downlink,
    Server,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Uplink,
    Downlink,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TimeGrid {
    /// Milliseconds per slot.
    pub slot_ms: f64,
    /// Number of slots available for scheduling (the latest deadline).
    pub horizon: Slot,
}

/// Shannon-rate parameters; when present the ring rate is derived at load
/// time as `bandwidth_mhz * log2(1 + tx_power * channel_gain / noise_density)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShannonParams {
    pub channel_gain: f64,
    pub noise_density: f64,
    pub tx_power: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Ring {
    pub ring_index: u32,
    /// Data rate in MB/s. Optional in the file when `shannon` is given.
    #[serde(default)]
    pub rate_mbps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shannon: Option<ShannonParams>,
}

impl Ring {
    /// Effective rate after load-time resolution; load() guarantees Some.
    pub fn rate(&self) -> f64 {
        self.rate_mbps.expect("ring rate resolved at load")
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AccessPoint {
    pub id: String,
    pub bandwidth_mhz: f64,
    pub rings: Vec<Ring>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Server {
    pub id: String,
    pub resource_type: String,
    pub capacity_units: u32,
    /// Allocation options, fractions of the full capacity, sorted ascending.
    pub options: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BackhaulEntry {
    pub vap: String,
    pub server: String,
    pub offset_ms: f64,
    pub per_mb_ms: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoverageWindow {
    pub vap: String,
    pub ring: u32,
    pub start: Slot,
    pub end: Slot,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProcessingEntry {
    pub server: String,
    pub option: f64,
    pub slots: Slot,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Job {
    pub id: String,
    pub input_mb: f64,
    pub output_mb: f64,
    pub release: Slot,
    pub deadline: Slot,
    pub capable_servers: Vec<String>,
    pub windows: Vec<CoverageWindow>,
    pub local_duration: Slot,
    pub local_power_w: f64,
    pub offload_power_w: f64,
    pub download_power_w: f64,
    pub processing: Vec<ProcessingEntry>,
}

/// The full MEC topology plus jobset. Immutable after `load`; safe for
/// concurrent read.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Scenario {
    pub time_grid: TimeGrid,
    pub uplink_aps: Vec<AccessPoint>,
    pub downlink_aps: Vec<AccessPoint>,
    pub servers: Vec<Server>,
    pub backhaul: Vec<BackhaulEntry>,
    pub jobs: Vec<Job>,

    #[serde(skip)]
    index: ScenarioIndex,
}

/// Resolved lookups rebuilt after deserialization.
#[derive(Debug, Clone, Default)]
struct ScenarioIndex {
    machine_by_id: HashMap<String, MachineId>,
    /// (min(machine), max(machine)) -> (offset_ms, per_mb_ms)
    backhaul: HashMap<(usize, usize), (f64, f64)>,
}

impl Scenario {
    /// Assembles and validates a scenario from parts.
    pub fn new(
        time_grid: TimeGrid,
        uplink_aps: Vec<AccessPoint>,
        downlink_aps: Vec<AccessPoint>,
        servers: Vec<Server>,
        backhaul: Vec<BackhaulEntry>,
        jobs: Vec<Job>,
    ) -> Result<Scenario> {
        let mut s = Scenario {
            time_grid,
            uplink_aps,
            downlink_aps,
            servers,
            backhaul,
            jobs,
            index: ScenarioIndex::default(),
        };
        s.load()?;
        Ok(s)
    }

    pub fn machine_count(&self) -> usize {
        self.uplink_aps.len() + self.downlink_aps.len() + self.servers.len()
    }

    pub fn machine_kind(&self, m: MachineId) -> MachineKind {
        let (mu, md) = (self.uplink_aps.len(), self.downlink_aps.len());
        if m.0 < mu {
            MachineKind::Uplink
        } else if m.0 < mu + md {
            MachineKind::Downlink
        } else {
            MachineKind::Server
        }
    }

    pub fn machine_label(&self, m: MachineId) -> &str {
        let (mu, md) = (self.uplink_aps.len(), self.downlink_aps.len());
        if m.0 < mu {
            &self.uplink_aps[m.0].id
        } else if m.0 < mu + md {
            &self.downlink_aps[m.0 - mu].id
        } else {
            &self.servers[m.0 - mu - md].id
        }
    }

    pub fn machine_id(&self, label: &str) -> Option<MachineId> {
        self.index.machine_by_id.get(label).copied()
    }

    pub fn server(&self, m: MachineId) -> Option<&Server> {
        let base = self.uplink_aps.len() + self.downlink_aps.len();
        if m.0 >= base {
            self.servers.get(m.0 - base)
        } else {
            None
        }
    }

    pub fn server_machine(&self, server_idx: usize) -> MachineId {
        MachineId(self.uplink_aps.len() + self.downlink_aps.len() + server_idx)
    }

    pub fn access_point(&self, m: MachineId) -> Option<&AccessPoint> {
        let mu = self.uplink_aps.len();
        match self.machine_kind(m) {
            MachineKind::Uplink => Some(&self.uplink_aps[m.0]),
            MachineKind::Downlink => Some(&self.downlink_aps[m.0 - mu]),
            MachineKind::Server => None,
        }
    }

    pub fn window_direction(&self, w: &CoverageWindow) -> Result<Direction> {
        let m = self
            .machine_id(&w.vap)
            .ok_or_else(|| Error::invalid(format!("window.vap: unknown vAP `{}`", w.vap)))?;
        match self.machine_kind(m) {
            MachineKind::Uplink => Ok(Direction::Uplink),
            MachineKind::Downlink => Ok(Direction::Downlink),
            MachineKind::Server => Err(Error::invalid(format!(
                "window.vap: `{}` is a server, not a vAP",
                w.vap
            ))),
        }
    }

    /// Rate of the ring a window refers to, MB/s.
    pub fn window_rate(&self, w: &CoverageWindow) -> Result<f64> {
        let m = self
            .machine_id(&w.vap)
            .ok_or_else(|| Error::invalid(format!("window.vap: unknown vAP `{}`", w.vap)))?;
        let ap = self
            .access_point(m)
            .ok_or_else(|| Error::invalid(format!("window.vap: `{}` is not a vAP", w.vap)))?;
        ap.rings
            .iter()
            .find(|r| r.ring_index == w.ring)
            .map(|r| r.rate())
            .ok_or_else(|| {
                Error::invalid(format!("window.ring: vAP `{}` has no ring {}", w.vap, w.ring))
            })
    }

    /// Processing duration of `job` on server index `server_idx` with option `c`.
    pub fn processing_duration(&self, job: &Job, server_idx: usize, c: f64) -> Result<Slot> {
        let sid = &self.servers[server_idx].id;
        job.processing
            .iter()
            .find(|p| &p.server == sid && p.option == c)
            .map(|p| p.slots)
            .ok_or_else(|| {
                Error::invalid(format!(
                    "job `{}`: no processing entry for server `{sid}` option {c}",
                    job.id
                ))
            })
    }

    fn ceil_slots(&self, ms: f64) -> Slot {
        // Guard against float noise on exact divisions.
        let raw = (ms / self.time_grid.slot_ms - 1e-9).ceil();
        if raw <= 0.0 {
            0
        } else {
            raw as Slot
        }
    }

    /// Offloading duration in slots, minimum 1.
    pub fn offload_duration(&self, job: &Job, window: &CoverageWindow) -> Result<Slot> {
        if self.window_direction(window)? != Direction::Uplink {
            return Err(Error::InvalidWindow {
                job: job.id.clone(),
                vap: window.vap.clone(),
                expected: "uplink",
            });
        }
        let rate = self.window_rate(window)?;
        Ok(self.ceil_slots(job.input_mb / rate * 1000.0).max(1))
    }

    /// Downloading duration in slots, minimum 1.
    pub fn download_duration(&self, job: &Job, window: &CoverageWindow) -> Result<Slot> {
        if self.window_direction(window)? != Direction::Downlink {
            return Err(Error::InvalidWindow {
                job: job.id.clone(),
                vap: window.vap.clone(),
                expected: "downlink",
            });
        }
        let rate = self.window_rate(window)?;
        Ok(self.ceil_slots(job.output_mb / rate * 1000.0).max(1))
    }

    /// Backhaul forwarding duration in slots; 0 when co-located.
    pub fn forward_duration(&self, data_mb: f64, vap: MachineId, server: MachineId) -> Result<Slot> {
        let key = (vap.0.min(server.0), vap.0.max(server.0));
        let (offset, coeff) = self.index.backhaul.get(&key).copied().ok_or_else(|| {
            Error::MissingBackhaul {
                a: self.machine_label(vap).to_string(),
                b: self.machine_label(server).to_string(),
            }
        })?;
        Ok(self.ceil_slots(offset + coeff * data_mb))
    }

    fn energy_joules(&self, power_w: f64, slots: Slot) -> f64 {
        power_w * (slots as f64 * self.time_grid.slot_ms / 1000.0)
    }

    pub fn local_energy(&self, job: &Job) -> f64 {
        self.energy_joules(job.local_power_w, job.local_duration)
    }

    /// Saved energy (may be non-positive) for offloading via the given window
    /// pair, computed from slot-rounded durations.
    pub fn saved_energy(
        &self,
        job: &Job,
        uplink_window: &CoverageWindow,
        downlink_window: &CoverageWindow,
    ) -> Result<f64> {
        let d_u = self.offload_duration(job, uplink_window)?;
        let d_d = self.download_duration(job, downlink_window)?;
        Ok(self.local_energy(job)
            - self.energy_joules(job.offload_power_w, d_u)
            - self.energy_joules(job.download_power_w, d_d))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serialization")
    }

    pub fn from_json(text: &str) -> Result<Scenario> {
        let mut s: Scenario = serde_json::from_str(text)?;
        s.load()?;
        Ok(s)
    }

    /// Validates every type invariant, resolves Shannon rates, and builds the
    /// lookup index. A scenario that loads successfully is fully consistent.
    pub fn load(&mut self) -> Result<()> {
        if !(self.time_grid.slot_ms > 0.0) {
            return Err(Error::invalid("time_grid.slot_ms: must be positive"));
        }
        if self.time_grid.horizon == 0 {
            return Err(Error::invalid("time_grid.horizon: must be positive"));
        }

        let mut index = ScenarioIndex::default();
        let mu = self.uplink_aps.len();
        let md = self.downlink_aps.len();
        for (i, ap) in self.uplink_aps.iter_mut().enumerate() {
            Self::load_ap(ap, &format!("uplink_aps[{i}]"))?;
            if index.machine_by_id.insert(ap.id.clone(), MachineId(i)).is_some() {
                return Err(Error::invalid(format!("uplink_aps[{i}].id: duplicate `{}`", ap.id)));
            }
        }
        for (i, ap) in self.downlink_aps.iter_mut().enumerate() {
            Self::load_ap(ap, &format!("downlink_aps[{i}]"))?;
            if index.machine_by_id.insert(ap.id.clone(), MachineId(mu + i)).is_some() {
                return Err(Error::invalid(format!("downlink_aps[{i}].id: duplicate `{}`", ap.id)));
            }
        }
        for (i, sv) in self.servers.iter().enumerate() {
            let path = format!("servers[{i}]");
            if sv.capacity_units == 0 {
                return Err(Error::invalid(format!("{path}.capacity_units: must be positive")));
            }
            if sv.options.is_empty() {
                return Err(Error::invalid(format!("{path}.options: must be nonempty")));
            }
            for (k, &c) in sv.options.iter().enumerate() {
                if !(c > 0.0 && c <= 1.0) {
                    return Err(Error::invalid(format!(
                        "{path}.options[{k}]: {c} outside (0, 1]"
                    )));
                }
                if k > 0 && sv.options[k - 1] >= c {
                    return Err(Error::invalid(format!(
                        "{path}.options: must be strictly ascending"
                    )));
                }
            }
            if index
                .machine_by_id
                .insert(sv.id.clone(), MachineId(mu + md + i))
                .is_some()
            {
                return Err(Error::invalid(format!("{path}.id: duplicate `{}`", sv.id)));
            }
        }

        for (i, e) in self.backhaul.iter().enumerate() {
            let path = format!("backhaul[{i}]");
            let v = index
                .machine_by_id
                .get(&e.vap)
                .copied()
                .ok_or_else(|| Error::invalid(format!("{path}.vap: unknown machine `{}`", e.vap)))?;
            let s = index
                .machine_by_id
                .get(&e.server)
                .copied()
                .ok_or_else(|| {
                    Error::invalid(format!("{path}.server: unknown machine `{}`", e.server))
                })?;
            if v.0 >= mu + md {
                return Err(Error::invalid(format!("{path}.vap: `{}` is not a vAP", e.vap)));
            }
            if s.0 < mu + md {
                return Err(Error::invalid(format!(
                    "{path}.server: `{}` is not a server",
                    e.server
                )));
            }
            if e.offset_ms < 0.0 || e.per_mb_ms < 0.0 {
                return Err(Error::invalid(format!("{path}: latency terms must be >= 0")));
            }
            let key = (v.0.min(s.0), v.0.max(s.0));
            if let Some(prev) = index.backhaul.insert(key, (e.offset_ms, e.per_mb_ms)) {
                if prev != (e.offset_ms, e.per_mb_ms) {
                    return Err(Error::invalid(format!(
                        "{path}: conflicting entry for ({}, {}); table must be symmetric",
                        e.vap, e.server
                    )));
                }
            }
        }

        self.index = index;

        let mut max_deadline: Slot = 0;
        let horizon = self.time_grid.horizon;
        let jobs = std::mem::take(&mut self.jobs);
        for (i, job) in jobs.iter().enumerate() {
            let path = format!("jobs[{i}]");
            self.load_job(job, &path, horizon)?;
            max_deadline = max_deadline.max(job.deadline);
        }
        self.jobs = jobs;
        if !self.jobs.is_empty() && max_deadline != horizon {
            return Err(Error::invalid(format!(
                "time_grid.horizon: {horizon} != max job deadline {max_deadline}"
            )));
        }
        Ok(())
    }

    fn load_ap(ap: &mut AccessPoint, path: &str) -> Result<()> {
        if !(ap.bandwidth_mhz > 0.0) {
            return Err(Error::invalid(format!("{path}.bandwidth_mhz: must be positive")));
        }
        if ap.rings.is_empty() {
            return Err(Error::invalid(format!("{path}.rings: must be nonempty")));
        }
        for (k, ring) in ap.rings.iter_mut().enumerate() {
            if ring.ring_index != (k + 1) as u32 {
                return Err(Error::invalid(format!(
                    "{path}.rings[{k}].ring_index: indices must be contiguous from 1"
                )));
            }
            if let Some(sh) = &ring.shannon {
                let snr = sh.tx_power * sh.channel_gain / sh.noise_density;
                ring.rate_mbps = Some(ap.bandwidth_mhz * (1.0 + snr).log2());
            }
            match ring.rate_mbps {
                Some(r) if r > 0.0 => {}
                _ => {
                    return Err(Error::invalid(format!(
                        "{path}.rings[{k}]: needs a positive rate_mbps or shannon params"
                    )))
                }
            }
        }
        Ok(())
    }

    fn load_job(&self, job: &Job, path: &str, horizon: Slot) -> Result<()> {
        if !(job.input_mb > 0.0) || !(job.output_mb > 0.0) {
            return Err(Error::invalid(format!("{path}: data sizes must be positive")));
        }
        for (p, w) in [
            ("local_power_w", job.local_power_w),
            ("offload_power_w", job.offload_power_w),
            ("download_power_w", job.download_power_w),
        ] {
            if !(w > 0.0) {
                return Err(Error::invalid(format!("{path}.{p}: must be positive")));
            }
        }
        if job.release < 1 || job.deadline > horizon || job.release > job.deadline {
            return Err(Error::invalid(format!(
                "{path}: release/deadline ({}, {}) outside [1, {horizon}]",
                job.release, job.deadline
            )));
        }
        if job.release + job.local_duration - 1 > job.deadline {
            return Err(Error::invalid(format!(
                "{path}: local processing cannot meet the deadline"
            )));
        }
        for (k, w) in job.windows.iter().enumerate() {
            let wpath = format!("{path}.windows[{k}]");
            if w.start > w.end || w.start < 1 || w.end > horizon {
                return Err(Error::invalid(format!(
                    "{wpath}: [{}, {}] outside [1, {horizon}]",
                    w.start, w.end
                )));
            }
            self.window_rate(w)
                .map_err(|e| Error::invalid(format!("{wpath}: {e}")))?;
        }
        for (k, sid) in job.capable_servers.iter().enumerate() {
            let spath = format!("{path}.capable_servers[{k}]");
            let m = self
                .machine_id(sid)
                .ok_or_else(|| Error::invalid(format!("{spath}: unknown server `{sid}`")))?;
            let server = self
                .server(m)
                .ok_or_else(|| Error::invalid(format!("{spath}: `{sid}` is not a server")))?;
            // Table must cover every option, with durations non-increasing in c.
            let mut prev: Option<Slot> = None;
            for &c in &server.options {
                let d = job
                    .processing
                    .iter()
                    .find(|e| &e.server == sid && e.option == c)
                    .map(|e| e.slots)
                    .ok_or_else(|| {
                        Error::invalid(format!(
                            "{path}.processing: missing entry for server `{sid}` option {c}"
                        ))
                    })?;
                if d == 0 {
                    return Err(Error::invalid(format!(
                        "{path}.processing: zero duration for server `{sid}` option {c}"
                    )));
                }
                if let Some(p) = prev {
                    if d > p {
                        return Err(Error::invalid(format!(
                            "{path}.processing: duration increases with allocation on `{sid}`"
                        )));
                    }
                }
                prev = Some(d);
            }
        }
        Ok(())
    }
}
