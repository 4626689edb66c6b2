//! Shared scenario builders for unit tests.

use crate::model::*;
use crate::workload::{AppProfile, GeneratorConfig};

/// Randomized tiny scenarios (horizon <= 20, <= 3 jobs, 4 machines) for
/// cross-checking against the brute-force oracle.
pub fn tiny_config(seed: u64) -> GeneratorConfig {
    GeneratorConfig {
        seed,
        jobset_size: 3,
        window_slots: 20,
        slot_ms: 1.0,
        uplink_count: 1,
        downlink_count: 1,
        server_count: 2,
        uplink_rate_tiers: vec![vec![66.0, 33.0]],
        downlink_rate_tiers: vec![vec![77.0, 38.0]],
        option_sets: vec![vec![0.5, 1.0]],
        max_windows_per_direction: 2,
        window_slack: 2,
        processing_slack: 2,
        backhaul_offset_ms: (0.0, 1.0),
        backhaul_per_mb_ms: (0.0, 0.5),
        offload_power_w: 2.08,
        download_power_w: 2.13,
        profiles: vec![AppProfile {
            name: "tiny".to_string(),
            input_mb: (0.05, 0.3),
            output_mb: (0.05, 0.3),
            local_power_w: (2.0, 5.0),
            local_duration: (8, 14),
            base_processing: (1, 3),
            serial_fraction: 0.4,
            release: (1, 6),
            relative_deadline: 14,
        }],
        target_ub: (0.0, f64::MAX),
        target_uc: (0.0, f64::MAX),
        max_attempts: 50,
    }
}

pub fn tiny_scenario(seed: u64) -> Scenario {
    crate::workload::generate(&tiny_config(seed))
        .expect("tiny config accepts the first sample")
        .scenario
}

pub fn ap(id: &str, rates: &[f64]) -> AccessPoint {
    AccessPoint {
        id: id.to_string(),
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

pub fn server(id: &str, options: &[f64]) -> Server {
    Server {
        id: id.to_string(),
        resource_type: "cpu".to_string(),
        capacity_units: 1,
        options: options.to_vec(),
    }
}

/// Zero-latency (co-located) backhaul entries for every (vAP, server) pair.
pub fn zero_backhaul(vaps: &[&str], servers: &[&str]) -> Vec<BackhaulEntry> {
    let mut out = Vec::new();
    for v in vaps {
        for s in servers {
            out.push(BackhaulEntry {
                vap: v.to_string(),
                server: s.to_string(),
                offset_ms: 0.0,
                per_mb_ms: 0.0,
            });
        }
    }
    out
}

pub fn window(vap: &str, start: Slot, end: Slot) -> CoverageWindow {
    CoverageWindow {
        vap: vap.to_string(),
        ring: 1,
        start,
        end,
    }
}

pub fn processing(server: &str, option: f64, slots: Slot) -> ProcessingEntry {
    ProcessingEntry {
        server: server.to_string(),
        option,
        slots,
    }
}

/// One uplink (rate 33), one downlink (rate 1), one co-located server with a
/// single full-capacity option; horizon 30. The single job mirrors the
/// canonical enumeration example: d_u = 20, d_p = 5, d_d = 5, release 1,
/// deadline 30, which admits exactly one schedule instance
/// (offload [1,20], process [21,25], download [26,30]).
pub fn canonical_single_job() -> Scenario {
    Scenario::new(
        TimeGrid {
            slot_ms: 1.0,
            horizon: 30,
        },
        vec![ap("u", &[33.0])],
        vec![ap("d", &[1.0])],
        vec![server("s", &[1.0])],
        zero_backhaul(&["u", "d"], &["s"]),
        vec![Job {
            id: "j0".to_string(),
            input_mb: 0.66,
            output_mb: 0.005,
            release: 1,
            deadline: 30,
            capable_servers: vec!["s".to_string()],
            windows: vec![window("u", 1, 30), window("d", 1, 30)],
            local_duration: 30,
            local_power_w: 5.33,
            offload_power_w: 2.08,
            download_power_w: 2.13,
            processing: vec![processing("s", 1.0, 5)],
        }],
    )
    .expect("canonical fixture is valid")
}

/// A job template with light data and a short chain; windows and processing
/// entries filled in by the caller.
pub fn quick_job(id: &str, release: Slot, deadline: Slot) -> Job {
    Job {
        id: id.to_string(),
        input_mb: 0.033,
        output_mb: 0.001,
        release,
        deadline,
        capable_servers: Vec::new(),
        windows: Vec::new(),
        local_duration: 20,
        local_power_w: 5.0,
        offload_power_w: 2.08,
        download_power_w: 2.13,
        processing: Vec::new(),
    }
}
