//! Synthetic scenario generator with utilization targeting, plus the
//! bandwidth/computation utilization metrics used to characterize jobsets.
//!
//! Generation is a pure function of the seeded config: rejection-samples
//! whole scenarios until the jobset's (u_b, u_c) land inside the target
//! bands, or fails with the closest achieved pair.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::model::{
    AccessPoint, BackhaulEntry, CoverageWindow, Direction, Job, ProcessingEntry, Ring, Scenario,
    Server, Slot, TimeGrid,
};
use crate::{Error, Result};

/// One application class: distribution parameters for the jobs it spawns.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AppProfile {
    pub name: String,
    /// Input size range, MB.
    pub input_mb: (f64, f64),
    pub output_mb: (f64, f64),
    pub local_power_w: (f64, f64),
    /// Local execution duration range, slots.
    pub local_duration: (Slot, Slot),
    /// Full-allocation processing duration range, slots.
    pub base_processing: (Slot, Slot),
    /// Serial fraction s of the processing workload: with allocation c the
    /// duration becomes ceil(base * (1 + s * (1/c - 1))), non-increasing in c.
    pub serial_fraction: f64,
    pub release: (Slot, Slot),
    /// Deadline = release + relative_deadline.
    pub relative_deadline: Slot,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub seed: u64,
    pub jobset_size: usize,
    /// Fallback horizon when the jobset is empty.
    pub window_slots: Slot,
    pub slot_ms: f64,
    pub uplink_count: usize,
    pub downlink_count: usize,
    pub server_count: usize,
    /// Ring rate tables (MB/s, fastest first), cycled across uplink vAPs.
    pub uplink_rate_tiers: Vec<Vec<f64>>,
    pub downlink_rate_tiers: Vec<Vec<f64>>,
    /// Allocation option sets, cycled across servers.
    pub option_sets: Vec<Vec<f64>>,
    pub max_windows_per_direction: usize,
    /// How far a coverage window extends beyond the anchored operation on
    /// each side. Directly bounds the start-time freedom of every operation,
    /// and with it the instance count per job.
    pub window_slack: Slot,
    /// Extra slots of freedom between the offload and download anchors for
    /// placing the processing interval.
    pub processing_slack: Slot,
    pub backhaul_offset_ms: (f64, f64),
    pub backhaul_per_mb_ms: (f64, f64),
    pub offload_power_w: f64,
    pub download_power_w: f64,
    pub profiles: Vec<AppProfile>,
    /// Inclusive acceptance band for the bandwidth utilization u_b.
    pub target_ub: (f64, f64),
    /// Inclusive acceptance band for the computation utilization u_c.
    pub target_uc: (f64, f64),
    pub max_attempts: usize,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            seed: 0,
            jobset_size: 8,
            window_slots: 180,
            slot_ms: 1.0,
            uplink_count: 2,
            downlink_count: 2,
            server_count: 2,
            uplink_rate_tiers: vec![vec![33.0, 23.0], vec![66.0, 46.5]],
            downlink_rate_tiers: vec![vec![77.0, 38.0]],
            option_sets: vec![vec![0.25, 0.5, 1.0], vec![0.25, 0.5, 0.75, 1.0]],
            max_windows_per_direction: 2,
            window_slack: 3,
            processing_slack: 4,
            backhaul_offset_ms: (0.0, 2.0),
            backhaul_per_mb_ms: (0.0, 1.0),
            offload_power_w: 2.08,
            download_power_w: 2.13,
            profiles: default_profiles(),
            target_ub: (0.0, f64::MAX),
            target_uc: (0.0, f64::MAX),
            max_attempts: 400,
        }
    }
}

/// Four application classes: two GPU-bound (face-recognition-like) and two
/// CPU-bound (feature-extraction-like), with staggered release windows and
/// relative deadlines of 80/110/90/130 slots.
pub fn default_profiles() -> Vec<AppProfile> {
    vec![
        AppProfile {
            name: "gpu-tight".into(),
            input_mb: (0.01, 1.2),
            output_mb: (0.01, 0.3),
            local_power_w: (1.8, 5.33),
            local_duration: (40, 70),
            base_processing: (4, 12),
            serial_fraction: 0.3,
            release: (1, 100),
            relative_deadline: 80,
        },
        AppProfile {
            name: "gpu-loose".into(),
            input_mb: (0.01, 1.2),
            output_mb: (0.01, 0.3),
            local_power_w: (1.8, 5.33),
            local_duration: (40, 70),
            base_processing: (4, 12),
            serial_fraction: 0.3,
            release: (1, 70),
            relative_deadline: 110,
        },
        AppProfile {
            name: "cpu-tight".into(),
            input_mb: (0.14, 0.6),
            output_mb: (0.05, 0.2),
            local_power_w: (0.97, 1.11),
            local_duration: (25, 60),
            base_processing: (6, 16),
            serial_fraction: 0.25,
            release: (1, 90),
            relative_deadline: 90,
        },
        AppProfile {
            name: "cpu-loose".into(),
            input_mb: (0.14, 0.6),
            output_mb: (0.05, 0.2),
            local_power_w: (0.97, 1.11),
            local_duration: (25, 60),
            base_processing: (6, 16),
            serial_fraction: 0.25,
            release: (1, 50),
            relative_deadline: 130,
        },
    ]
}

impl GeneratorConfig {
    fn validate(&self) -> Result<()> {
        if self.uplink_count == 0 || self.downlink_count == 0 || self.server_count == 0 {
            return Err(Error::invalid("generator: machine counts must be positive"));
        }
        if self.uplink_rate_tiers.is_empty()
            || self.downlink_rate_tiers.is_empty()
            || self.option_sets.is_empty()
        {
            return Err(Error::invalid(
                "generator: rate tiers and option sets must be nonempty",
            ));
        }
        if self.max_windows_per_direction == 0 {
            return Err(Error::invalid(
                "generator: max_windows_per_direction must be positive",
            ));
        }
        if self.jobset_size > 0 && self.profiles.is_empty() {
            return Err(Error::invalid("generator: profiles must be nonempty"));
        }
        if self.max_attempts == 0 {
            return Err(Error::invalid("generator: max_attempts must be positive"));
        }
        for (lo, hi) in [self.target_ub, self.target_uc] {
            if !(lo >= 0.0 && hi >= lo) {
                return Err(Error::invalid("generator: malformed utilization band"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct GeneratedScenario {
    pub scenario: Scenario,
    pub u_b: f64,
    pub u_c: f64,
    pub attempts: usize,
}

/// Processing duration under allocation `c` with serial fraction `s`:
/// the parallel share shrinks with c, the serial share does not.
pub fn scaled_processing(base: Slot, s: f64, c: f64) -> Slot {
    let slots = (base as f64 * (1.0 + s * (1.0 / c - 1.0)) - 1e-9).ceil();
    (slots as Slot).max(1)
}

pub fn generate(config: &GeneratorConfig) -> Result<GeneratedScenario> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut closest: Option<(f64, f64, f64)> = None; // (distance, u_b, u_c)
    for attempt in 1..=config.max_attempts {
        let scenario = sample_scenario(config, &mut rng)?;
        let u_b = jobset_bandwidth_utilization(&scenario);
        let u_c = jobset_computation_utilization(&scenario);
        let (bl, bh) = config.target_ub;
        let (cl, ch) = config.target_uc;
        if (bl..=bh).contains(&u_b) && (cl..=ch).contains(&u_c) {
            return Ok(GeneratedScenario {
                scenario,
                u_b,
                u_c,
                attempts: attempt,
            });
        }
        let dist = band_distance(u_b, config.target_ub) + band_distance(u_c, config.target_uc);
        if closest.map_or(true, |(d, _, _)| dist < d) {
            closest = Some((dist, u_b, u_c));
        }
    }
    let (_, ub, uc) = closest.expect("max_attempts >= 1");
    Err(Error::GenerationFailure {
        attempts: config.max_attempts,
        closest_ub: ub,
        closest_uc: uc,
    })
}

fn band_distance(v: f64, (lo, hi): (f64, f64)) -> f64 {
    if v < lo {
        lo - v
    } else if v > hi {
        v - hi
    } else {
        0.0
    }
}

fn draw_f64(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if hi <= lo {
        lo
    } else {
        rng.gen_range(lo..=hi)
    }
}

fn draw_slot(rng: &mut ChaCha8Rng, (lo, hi): (Slot, Slot)) -> Slot {
    if hi <= lo {
        lo
    } else {
        rng.gen_range(lo..=hi)
    }
}

fn sample_scenario(config: &GeneratorConfig, rng: &mut ChaCha8Rng) -> Result<Scenario> {
    let mut uplink_aps = Vec::with_capacity(config.uplink_count);
    for i in 0..config.uplink_count {
        let rates = &config.uplink_rate_tiers[i % config.uplink_rate_tiers.len()];
        uplink_aps.push(make_ap(format!("up{i}"), rates));
    }
    let mut downlink_aps = Vec::with_capacity(config.downlink_count);
    for i in 0..config.downlink_count {
        let rates = &config.downlink_rate_tiers[i % config.downlink_rate_tiers.len()];
        downlink_aps.push(make_ap(format!("down{i}"), rates));
    }
    let mut servers = Vec::with_capacity(config.server_count);
    for i in 0..config.server_count {
        servers.push(Server {
            id: format!("srv{i}"),
            resource_type: if i % 2 == 0 { "gpu".into() } else { "cpu".into() },
            capacity_units: 1,
            options: config.option_sets[i % config.option_sets.len()].clone(),
        });
    }

    let mut backhaul = Vec::new();
    for ap in uplink_aps.iter().chain(&downlink_aps) {
        for sv in &servers {
            backhaul.push(BackhaulEntry {
                vap: ap.id.clone(),
                server: sv.id.clone(),
                offset_ms: draw_f64(rng, config.backhaul_offset_ms),
                per_mb_ms: draw_f64(rng, config.backhaul_per_mb_ms),
            });
        }
    }

    // Temporal skeleton first so the horizon is known before windows.
    let mut skeleton = Vec::with_capacity(config.jobset_size);
    let mut horizon: Slot = 0;
    for j in 0..config.jobset_size {
        let profile = &config.profiles[j % config.profiles.len()];
        let release = draw_slot(rng, profile.release).max(1);
        let deadline = release + profile.relative_deadline;
        horizon = horizon.max(deadline);
        skeleton.push((profile, release, deadline));
    }
    if config.jobset_size == 0 {
        horizon = config.window_slots.max(1);
    }

    let mut jobs = Vec::with_capacity(config.jobset_size);
    for (j, (profile, release, deadline)) in skeleton.into_iter().enumerate() {
        let span = deadline - release + 1;
        let local_duration = draw_slot(rng, profile.local_duration).clamp(1, span);
        let base = draw_slot(rng, profile.base_processing).max(1);

        let count = rng.gen_range(1..=config.server_count);
        let mut pool: Vec<usize> = (0..config.server_count).collect();
        let mut capable_servers = Vec::with_capacity(count);
        for _ in 0..count {
            let k = rng.gen_range(0..pool.len());
            capable_servers.push(servers[pool.swap_remove(k)].id.clone());
        }
        capable_servers.sort();

        let mut processing = Vec::new();
        for sid in &capable_servers {
            let server = servers.iter().find(|s| &s.id == sid).expect("own id");
            for &c in &server.options {
                processing.push(ProcessingEntry {
                    server: sid.clone(),
                    option: c,
                    slots: scaled_processing(base, profile.serial_fraction, c),
                });
            }
        }

        let input_mb = draw_f64(rng, profile.input_mb);
        let output_mb = draw_f64(rng, profile.output_mb);

        // Windows are anchored around one sampled offload chain so each
        // operation has only window_slack slots of start-time freedom;
        // covering the whole [release, deadline] span would explode the
        // instance count cubically.
        let slots_for = |mb: f64, rate: f64| -> Slot {
            let raw = (mb / rate * 1000.0 / config.slot_ms - 1e-9).ceil();
            (raw.max(1.0)) as Slot
        };
        let d_p_min = scaled_processing(base, profile.serial_fraction, 1.0);
        let d_d_min = config
            .downlink_rate_tiers
            .iter()
            .flatten()
            .map(|&r| slots_for(output_mb, r))
            .min()
            .unwrap_or(1);

        let mut windows = Vec::new();
        let count_u = rng.gen_range(1..=config.max_windows_per_direction);
        let mut chain_anchor: Option<(Slot, Slot)> = None; // (t_u anchor, d_u)
        for _ in 0..count_u {
            let ap = &uplink_aps[rng.gen_range(0..uplink_aps.len())];
            let ring = rng.gen_range(1..=ap.rings.len() as u32);
            let d_u = slots_for(input_mb, ap.rings[ring as usize - 1].rate());
            // Leave room for the rest of the chain before the deadline.
            let reserve = d_u + d_p_min + d_d_min + config.processing_slack + 2;
            let latest = deadline.saturating_sub(reserve).max(release);
            let anchor = if latest > release {
                rng.gen_range(release..=latest)
            } else {
                release
            };
            let lead = rng.gen_range(0..=config.window_slack);
            let tail = rng.gen_range(0..=config.window_slack);
            let start = anchor.saturating_sub(lead).max(1);
            let end = (anchor + d_u - 1 + tail).min(horizon).max(start);
            windows.push(CoverageWindow {
                vap: ap.id.clone(),
                ring,
                start,
                end,
            });
            if chain_anchor.is_none() {
                chain_anchor = Some((anchor, d_u));
            }
        }
        let (t_u_anchor, d_u_anchor) = chain_anchor.expect("count_u >= 1");
        let count_d = rng.gen_range(1..=config.max_windows_per_direction);
        for _ in 0..count_d {
            let ap = &downlink_aps[rng.gen_range(0..downlink_aps.len())];
            let ring = rng.gen_range(1..=ap.rings.len() as u32);
            let d_d = slots_for(output_mb, ap.rings[ring as usize - 1].rate());
            let gap = d_p_min + 1 + rng.gen_range(0..=config.processing_slack);
            let anchor = (t_u_anchor + d_u_anchor + gap).min(horizon);
            let lead = rng.gen_range(0..=config.window_slack);
            let tail = rng.gen_range(0..=config.window_slack);
            let start = anchor.saturating_sub(lead).max(1);
            let end = (anchor + d_d - 1 + tail).min(horizon).max(start);
            windows.push(CoverageWindow {
                vap: ap.id.clone(),
                ring,
                start,
                end,
            });
        }

        jobs.push(Job {
            id: format!("job{j}"),
            input_mb,
            output_mb,
            release,
            deadline,
            capable_servers,
            windows,
            local_duration,
            local_power_w: draw_f64(rng, profile.local_power_w),
            offload_power_w: config.offload_power_w,
            download_power_w: config.download_power_w,
            processing,
        });
    }

    Scenario::new(
        TimeGrid {
            slot_ms: config.slot_ms,
            horizon,
        },
        uplink_aps,
        downlink_aps,
        servers,
        backhaul,
        jobs,
    )
}

fn make_ap(id: String, rates: &[f64]) -> AccessPoint {
    AccessPoint {
        id,
        bandwidth_mhz: 40.0,
        rings: rates
            .iter()
            .enumerate()
            .map(|(k, &r)| Ring {
                ring_index: (k + 1) as u32,
                rate_mbps: Some(r),
                shannon: None,
            })
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JobUtilization {
    pub value: f64,
    /// False when the job has no feasible mapping; the value is then 0.
    pub feasible: bool,
}

/// U_c of one job: over every (capable server, allocation option) whose
/// processing fits the least-constrained window pair, the minimum of
/// c * d_p / (|servers| * d_p_max), where d_p_max is the widest processing
/// span any uplink/downlink window pair allows on that server.
pub fn job_computation_utilization(scenario: &Scenario, job: &Job) -> JobUtilization {
    let d_total = scenario.servers.len() as f64;
    let base = scenario.uplink_aps.len() + scenario.downlink_aps.len();
    let mut best: Option<f64> = None;
    for sid in &job.capable_servers {
        let m_p = scenario.machine_id(sid).expect("loaded scenario");
        let server_idx = m_p.0 - base;
        let mut span_max: i64 = 0;
        for uw in &job.windows {
            if !matches!(scenario.window_direction(uw), Ok(Direction::Uplink)) {
                continue;
            }
            for dw in &job.windows {
                if !matches!(scenario.window_direction(dw), Ok(Direction::Downlink)) {
                    continue;
                }
                let m_u = scenario.machine_id(&uw.vap).expect("loaded scenario");
                let m_d = scenario.machine_id(&dw.vap).expect("loaded scenario");
                let d_u = scenario.offload_duration(job, uw).expect("uplink window") as i64;
                let d_d = scenario.download_duration(job, dw).expect("downlink window") as i64;
                let d_up = scenario
                    .forward_duration(job.input_mb, m_u, m_p)
                    .expect("loaded scenario") as i64;
                let d_pd = scenario
                    .forward_duration(job.output_mb, m_p, m_d)
                    .expect("loaded scenario") as i64;
                let t_u_min = (job.release as i64).max(uw.start as i64);
                if t_u_min + d_u - 1 > uw.end as i64 {
                    continue;
                }
                let t_d_max = (job.deadline as i64).min(dw.end as i64) - d_d + 1;
                if t_d_max < dw.start as i64 {
                    continue;
                }
                let t_e = t_u_min + d_u + d_up;
                let t_l = t_d_max - d_pd - 1;
                span_max = span_max.max(t_l - t_e + 1);
            }
        }
        if span_max <= 0 {
            continue;
        }
        for &c in &scenario.servers[server_idx].options {
            let d_p = scenario
                .processing_duration(job, server_idx, c)
                .expect("loaded scenario") as i64;
            if d_p <= span_max {
                let u = c * d_p as f64 / (d_total * span_max as f64);
                best = Some(best.map_or(u, |b: f64| b.min(u)));
            }
        }
    }
    match best {
        Some(value) => JobUtilization {
            value,
            feasible: true,
        },
        None => JobUtilization {
            value: 0.0,
            feasible: false,
        },
    }
}

/// u_c: sum of the per-job minimum computation utilizations.
pub fn jobset_computation_utilization(scenario: &Scenario) -> f64 {
    scenario
        .jobs
        .iter()
        .map(|j| job_computation_utilization(scenario, j).value)
        .sum()
}

/// U_b of one job: the c = 1 analog over uplink windows, d_u divided by
/// |uplink vAPs| times the widest offloading span any single window allows.
pub fn job_bandwidth_utilization(scenario: &Scenario, job: &Job) -> JobUtilization {
    let b_total = scenario.uplink_aps.len() as f64;
    let mut best: Option<f64> = None;
    for uw in &job.windows {
        if !matches!(scenario.window_direction(uw), Ok(Direction::Uplink)) {
            continue;
        }
        let d_u = scenario.offload_duration(job, uw).expect("uplink window") as i64;
        let span = (job.deadline as i64).min(uw.end as i64)
            - (job.release as i64).max(uw.start as i64)
            + 1;
        if span >= d_u && span > 0 {
            let u = d_u as f64 / (b_total * span as f64);
            best = Some(best.map_or(u, |b: f64| b.min(u)));
        }
    }
    match best {
        Some(value) => JobUtilization {
            value,
            feasible: true,
        },
        None => JobUtilization {
            value: 0.0,
            feasible: false,
        },
    }
}

/// u_b: sum of the per-job minimum bandwidth utilizations.
pub fn jobset_bandwidth_utilization(scenario: &Scenario) -> f64 {
    scenario
        .jobs
        .iter()
        .map(|j| job_bandwidth_utilization(scenario, j).value)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{self, processing, server};

    #[test]
    fn scaled_processing_follows_amdahl_form() {
        // No serial part: the duration is allocation-independent.
        for c in [0.25, 0.5, 1.0] {
            assert_eq!(scaled_processing(4, 0.0, c), 4);
        }
        // Fully serial: halving the allocation doubles the duration.
        assert_eq!(scaled_processing(4, 1.0, 1.0), 4);
        assert_eq!(scaled_processing(4, 1.0, 0.5), 8);
        assert_eq!(scaled_processing(4, 1.0, 0.25), 16);
        // Exact divisions do not round up an extra slot.
        assert_eq!(scaled_processing(3, 0.5, 0.5), 5); // 3 * 1.5 = 4.5 -> 5
        assert_eq!(scaled_processing(2, 0.5, 0.5), 3); // exactly 3.0
        assert_eq!(scaled_processing(1, 0.0, 1.0), 1);
    }

    #[test]
    fn generation_is_deterministic_per_seed() {
        let config = fixtures::tiny_config(11);
        let a = generate(&config).unwrap();
        let b = generate(&config).unwrap();
        assert_eq!(
            a.scenario.to_json(),
            b.scenario.to_json()
        );
        assert_eq!((a.u_b, a.u_c, a.attempts), (b.u_b, b.u_c, b.attempts));
    }

    #[test]
    fn wide_band_accepts_the_first_sample() {
        let out = generate(&fixtures::tiny_config(5)).unwrap();
        assert_eq!(out.attempts, 1);
        assert_eq!(out.scenario.jobs.len(), 3);
        // Round-trips through JSON (i.e. the sample passed full validation).
        let json = out.scenario.to_json();
        let back = Scenario::from_json(&json).unwrap();
        assert_eq!(back.to_json(), json);
    }

    #[test]
    fn impossible_band_reports_closest_attempt() {
        let mut config = fixtures::tiny_config(5);
        config.target_ub = (50.0, 60.0);
        config.max_attempts = 10;
        match generate(&config) {
            Err(Error::GenerationFailure { attempts, closest_ub, closest_uc }) => {
                assert_eq!(attempts, 10);
                assert!(closest_ub < 50.0);
                assert!(closest_uc >= 0.0);
            }
            other => panic!("expected GenerationFailure, got {other:?}"),
        }
    }

    #[test]
    fn utilization_targeting_lands_in_band() {
        let mut config = fixtures::tiny_config(2);
        config.target_uc = (0.05, 2.0);
        config.max_attempts = 200;
        let out = generate(&config).unwrap();
        assert!(out.u_c >= 0.05 && out.u_c <= 2.0, "u_c = {}", out.u_c);
        assert!((jobset_computation_utilization(&out.scenario) - out.u_c).abs() < 1e-12);
        assert!((jobset_bandwidth_utilization(&out.scenario) - out.u_b).abs() < 1e-12);
    }

    #[test]
    fn default_config_generates() {
        let config = GeneratorConfig::default();
        let out = generate(&config).unwrap();
        assert_eq!(out.scenario.jobs.len(), config.jobset_size);
        assert!(out.u_b >= 0.0 && out.u_c >= 0.0);
    }

    #[test]
    fn computation_utilization_saturates_at_full_span() {
        // Canonical layout: the only window pair leaves a 5-slot processing
        // span and d_p = 5 at c = 1 on the single server, so U_c = 1.
        let scenario = fixtures::canonical_single_job();
        let u = job_computation_utilization(&scenario, &scenario.jobs[0]);
        assert!(u.feasible);
        assert!((u.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn computation_utilization_takes_the_cheapest_option() {
        // Same layout with a half allocation that keeps the same duration
        // (no serial part): c * d_p halves, so U_c = 0.5.
        let base = fixtures::canonical_single_job();
        let mut job = base.jobs[0].clone();
        job.processing = vec![processing("s", 0.5, 5), processing("s", 1.0, 5)];
        let scenario = Scenario::new(
            base.time_grid,
            base.uplink_aps.clone(),
            base.downlink_aps.clone(),
            vec![server("s", &[0.5, 1.0])],
            base.backhaul.clone(),
            vec![job],
        )
        .unwrap();
        let u = job_computation_utilization(&scenario, &scenario.jobs[0]);
        assert!(u.feasible);
        assert!((u.value - 0.5).abs() < 1e-12);
    }

    #[test]
    fn oversized_processing_is_infeasible() {
        // d_p = 10 against a 5-slot maximum span: no mapping fits.
        let base = fixtures::canonical_single_job();
        let mut job = base.jobs[0].clone();
        job.processing = vec![processing("s", 1.0, 10)];
        let scenario = Scenario::new(
            base.time_grid,
            base.uplink_aps.clone(),
            base.downlink_aps.clone(),
            base.servers.clone(),
            base.backhaul.clone(),
            vec![job],
        )
        .unwrap();
        let u = job_computation_utilization(&scenario, &scenario.jobs[0]);
        assert!(!u.feasible);
        assert_eq!(u.value, 0.0);
        // The bandwidth side is unaffected.
        assert!(job_bandwidth_utilization(&scenario, &scenario.jobs[0]).feasible);
    }

    #[test]
    fn bandwidth_utilization_is_duration_over_span() {
        // d_u = 20 over the 30-slot window span on the single uplink.
        let scenario = fixtures::canonical_single_job();
        let u = job_bandwidth_utilization(&scenario, &scenario.jobs[0]);
        assert!(u.feasible);
        assert!((u.value - 20.0 / 30.0).abs() < 1e-12);
    }

    #[test]
    fn jobset_utilizations_are_sums() {
        let scenario = fixtures::tiny_scenario(4);
        let ub: f64 = scenario
            .jobs
            .iter()
            .map(|j| job_bandwidth_utilization(&scenario, j).value)
            .sum();
        let uc: f64 = scenario
            .jobs
            .iter()
            .map(|j| job_computation_utilization(&scenario, j).value)
            .sum();
        assert!((jobset_bandwidth_utilization(&scenario) - ub).abs() < 1e-12);
        assert!((jobset_computation_utilization(&scenario) - uc).abs() < 1e-12);
    }
}
