//! Serialized outputs: schedule documents, algorithm run reports, the
//! metrics CSV, and per-machine Gantt charts as SVG. All emitters are
//! deterministic so fixed inputs reproduce byte-identical files.

use serde::{Deserialize, Serialize};

use crate::model::{MachineKind, Scenario, Slot};
use crate::offline::{Branch, LhjsOutcome, Schedule};

/// One bound instance with machine/job names resolved to strings.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub job: String,
    pub uplink: String,
    pub server: String,
    pub downlink: String,
    /// Inclusive [start, end] slot pairs.
    pub offload: [Slot; 2],
    pub process: [Slot; 2],
    pub download: [Slot; 2],
    pub alloc: f64,
    pub energy_j: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScheduleDocument {
    pub algorithm: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub policy: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lp_bound_j: Option<f64>,
    pub total_energy_j: f64,
    pub runtime_ms: f64,
    pub instances: Vec<InstanceRecord>,
}

impl ScheduleDocument {
    pub fn new(scenario: &Scenario, schedule: &Schedule, algorithm: &str) -> ScheduleDocument {
        let instances = schedule
            .selected
            .iter()
            .map(|inst| InstanceRecord {
                job: scenario.jobs[inst.job].id.clone(),
                uplink: scenario.machine_label(inst.uplink).to_string(),
                server: scenario.machine_label(inst.server).to_string(),
                downlink: scenario.machine_label(inst.downlink).to_string(),
                offload: [inst.offload.start, inst.offload.end],
                process: [inst.process.start, inst.process.end],
                download: [inst.download.start, inst.download.end],
                alloc: inst.alloc,
                energy_j: inst.energy,
            })
            .collect();
        ScheduleDocument {
            algorithm: algorithm.to_string(),
            seed: None,
            kappa: None,
            policy: None,
            lp_bound_j: None,
            total_energy_j: schedule.total_energy,
            runtime_ms: 0.0,
            instances,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("schedule serialization");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> crate::Result<ScheduleDocument> {
        Ok(serde_json::from_str(text)?)
    }

    /// Maps the document back onto a scenario's indices so it can be
    /// validated or re-scored.
    pub fn resolve(&self, scenario: &Scenario) -> crate::Result<Schedule> {
        let mut selected = Vec::with_capacity(self.instances.len());
        for rec in &self.instances {
            let job = scenario
                .jobs
                .iter()
                .position(|j| j.id == rec.job)
                .ok_or_else(|| crate::Error::invalid(format!("unknown job `{}`", rec.job)))?;
            let machine = |label: &str| {
                scenario
                    .machine_id(label)
                    .ok_or_else(|| crate::Error::invalid(format!("unknown machine `{label}`")))
            };
            let span = |p: [Slot; 2], what: &str| {
                if p[0] >= 1 && p[0] <= p[1] {
                    Ok(crate::instance::Interval {
                        start: p[0],
                        end: p[1],
                    })
                } else {
                    Err(crate::Error::invalid(format!(
                        "job `{}`: malformed {what} interval [{}, {}]",
                        rec.job, p[0], p[1]
                    )))
                }
            };
            selected.push(crate::instance::ScheduleInstance {
                job,
                uplink: machine(&rec.uplink)?,
                server: machine(&rec.server)?,
                downlink: machine(&rec.downlink)?,
                offload: span(rec.offload, "offload")?,
                process: span(rec.process, "process")?,
                download: span(rec.download, "download")?,
                alloc: rec.alloc,
                energy: rec.energy_j,
            });
        }
        Ok(Schedule::new(selected))
    }
}

/// Per-run diagnostics of the two-branch offline algorithm.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub seed: u64,
    pub kappa: f64,
    pub instance_count: usize,
    pub lis_optimum: f64,
    pub his_optimum: f64,
    pub light_energy_j: f64,
    pub heavy_energy_j: f64,
    pub branch: String,
}

impl RunReport {
    pub fn from_outcome(outcome: &LhjsOutcome, seed: u64, kappa: f64) -> RunReport {
        RunReport {
            seed,
            kappa,
            instance_count: outcome.instance_count,
            lis_optimum: outcome.lis_optimum,
            his_optimum: outcome.his_optimum,
            light_energy_j: outcome.light_schedule.total_energy,
            heavy_energy_j: outcome.heavy_schedule.total_energy,
            branch: match outcome.branch {
                Branch::Light => "light".to_string(),
                Branch::Heavy => "heavy".to_string(),
            },
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("run report serialization");
        s.push('\n');
        s
    }
}

/// Documented, stable CSV header. The ratio's denominator is the optimum of
/// the LP relaxation — an upper bound on the integral optimum — so the
/// reported ratio understates true performance.
pub fn csv_header() -> String {
    String::from(
        "# ratio = energy_j / lp_bound_j; lp_bound_j is the LP-relaxation optimum (an upper bound on the integral optimum), so ratio is a lower bound on true performance\n\
         algorithm,energy_j,lp_bound_j,ratio,runtime_ms,seed,u_b,u_c\n",
    )
}

#[derive(Debug, Clone)]
pub struct CsvRow {
    pub algorithm: String,
    pub energy_j: f64,
    pub lp_bound_j: f64,
    pub runtime_ms: f64,
    pub seed: u64,
    pub u_b: f64,
    pub u_c: f64,
}

impl CsvRow {
    pub fn ratio(&self) -> f64 {
        if self.lp_bound_j > 0.0 {
            self.energy_j / self.lp_bound_j
        } else {
            0.0
        }
    }

    pub fn to_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}\n",
            self.algorithm,
            self.energy_j,
            self.lp_bound_j,
            self.ratio(),
            self.runtime_ms,
            self.seed,
            self.u_b,
            self.u_c
        )
    }
}

const LANE_HEIGHT: u32 = 28;
const LANE_GAP: u32 = 6;
const LEFT_MARGIN: u32 = 110;
const TOP_MARGIN: u32 = 30;
const SLOT_PX: f64 = 8.0;

/// One lane per machine (uplinks, downlinks, servers in index order),
/// intervals colored by operation kind, labeled with the job id.
pub fn gantt_svg(scenario: &Scenario, schedule: &Schedule) -> String {
    let machines = scenario.machine_count();
    let horizon = scenario.time_grid.horizon;
    let width = LEFT_MARGIN + (horizon as f64 * SLOT_PX).ceil() as u32 + 20;
    let height = TOP_MARGIN + machines as u32 * (LANE_HEIGHT + LANE_GAP) + 30;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" \
         font-family=\"sans-serif\" font-size=\"11\">\n"
    ));
    svg.push_str(&format!(
        "<rect x=\"0\" y=\"0\" width=\"{width}\" height=\"{height}\" fill=\"#ffffff\"/>\n"
    ));

    for m in 0..machines {
        let y = TOP_MARGIN + m as u32 * (LANE_HEIGHT + LANE_GAP);
        let id = crate::model::MachineId(m);
        let label = scenario.machine_label(id);
        let tag = match scenario.machine_kind(id) {
            MachineKind::Uplink => "uplink",
            MachineKind::Downlink => "downlink",
            MachineKind::Server => "server",
        };
        svg.push_str(&format!(
            "<text x=\"4\" y=\"{}\">{label} ({tag})</text>\n",
            y + LANE_HEIGHT / 2 + 4
        ));
        svg.push_str(&format!(
            "<rect x=\"{LEFT_MARGIN}\" y=\"{y}\" width=\"{}\" height=\"{LANE_HEIGHT}\" \
             fill=\"#f4f4f4\" stroke=\"#cccccc\"/>\n",
            (horizon as f64 * SLOT_PX) as u32
        ));
    }

    for inst in &schedule.selected {
        let job = &scenario.jobs[inst.job].id;
        for ((m, iv, c), color) in inst
            .operations()
            .into_iter()
            .zip(["#4c78a8", "#f58518", "#54a24b"])
        {
            let x = LEFT_MARGIN as f64 + (iv.start - 1) as f64 * SLOT_PX;
            let w = iv.len() as f64 * SLOT_PX;
            let lane_y = TOP_MARGIN + m.0 as u32 * (LANE_HEIGHT + LANE_GAP);
            // Server lanes stack by allocation: bar height scales with c.
            let h = if scenario.server(m).is_some() {
                ((LANE_HEIGHT as f64) * c).max(4.0)
            } else {
                LANE_HEIGHT as f64
            };
            let y = lane_y as f64 + LANE_HEIGHT as f64 - h;
            svg.push_str(&format!(
                "<rect x=\"{x}\" y=\"{y}\" width=\"{w}\" height=\"{h}\" fill=\"{color}\" \
                 fill-opacity=\"0.8\" stroke=\"#333333\"><title>{job} [{}, {}]</title></rect>\n",
                iv.start, iv.end
            ));
        }
    }

    // Time axis ticks every 10 slots.
    let axis_y = TOP_MARGIN + machines as u32 * (LANE_HEIGHT + LANE_GAP) + 14;
    let mut t = 1;
    while t <= horizon {
        let x = LEFT_MARGIN as f64 + (t - 1) as f64 * SLOT_PX;
        svg.push_str(&format!("<text x=\"{x}\" y=\"{axis_y}\">{t}</text>\n"));
        t += 10;
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::instance::{enumerate_instances, DEFAULT_INSTANCE_CAP};

    fn canonical_schedule() -> (Scenario, Schedule) {
        let scenario = fixtures::canonical_single_job();
        let set = enumerate_instances(&scenario, DEFAULT_INSTANCE_CAP).unwrap();
        let schedule = Schedule::new(vec![set.instances[0].clone()]);
        (scenario, schedule)
    }

    #[test]
    fn document_round_trips_through_json_and_resolve() {
        let (scenario, schedule) = canonical_schedule();
        let mut doc = ScheduleDocument::new(&scenario, &schedule, "lhjs");
        doc.seed = Some(42);
        doc.kappa = Some(8.0);
        let json = doc.to_json();
        let back = ScheduleDocument::from_json(&json).unwrap();
        assert_eq!(back.to_json(), json);
        assert_eq!(back.seed, Some(42));

        let resolved = back.resolve(&scenario).unwrap();
        assert_eq!(resolved.selected, schedule.selected);
        assert!(crate::oracle::validate(&scenario, &resolved).is_empty());
    }

    #[test]
    fn document_emission_is_deterministic() {
        let (scenario, schedule) = canonical_schedule();
        let a = ScheduleDocument::new(&scenario, &schedule, "lhjs").to_json();
        let b = ScheduleDocument::new(&scenario, &schedule, "lhjs").to_json();
        assert_eq!(a, b);
        assert!(a.ends_with('\n'));
    }

    #[test]
    fn absent_options_are_omitted() {
        let (scenario, schedule) = canonical_schedule();
        let json = ScheduleDocument::new(&scenario, &schedule, "sortall").to_json();
        assert!(!json.contains("\"seed\""));
        assert!(!json.contains("\"kappa\""));
        assert!(!json.contains("\"policy\""));
        assert!(!json.contains("\"lp_bound_j\""));
    }

    #[test]
    fn resolve_rejects_unknown_names_and_bad_intervals() {
        let (scenario, schedule) = canonical_schedule();
        let mut doc = ScheduleDocument::new(&scenario, &schedule, "lhjs");
        doc.instances[0].job = "ghost".to_string();
        assert!(doc.resolve(&scenario).is_err());

        let mut doc = ScheduleDocument::new(&scenario, &schedule, "lhjs");
        doc.instances[0].offload = [5, 2];
        assert!(doc.resolve(&scenario).is_err());
    }

    #[test]
    fn run_report_carries_outcome_fields() {
        let scenario = fixtures::canonical_single_job();
        let outcome = crate::offline::lhjs(&scenario, 7, 8.0, DEFAULT_INSTANCE_CAP).unwrap();
        let report = RunReport::from_outcome(&outcome, 7, 8.0);
        assert_eq!(report.branch, "heavy");
        assert_eq!(report.instance_count, 1);
        let json = report.to_json();
        assert!(json.contains("\"seed\": 7"));
        assert!(!json.contains("-0.0"));
    }

    #[test]
    fn csv_ratio_handles_zero_bound() {
        let mut row = CsvRow {
            algorithm: "lhjs".to_string(),
            energy_j: 0.5,
            lp_bound_j: 1.0,
            runtime_ms: 2.0,
            seed: 3,
            u_b: 0.4,
            u_c: 0.6,
        };
        assert!((row.ratio() - 0.5).abs() < 1e-12);
        assert_eq!(row.to_line(), "lhjs,0.5,1,0.5,2,3,0.4,0.6\n");
        row.lp_bound_j = 0.0;
        assert_eq!(row.ratio(), 0.0);
    }

    #[test]
    fn csv_header_matches_row_shape() {
        let header = csv_header();
        let columns = header.lines().last().unwrap();
        assert_eq!(columns, "algorithm,energy_j,lp_bound_j,ratio,runtime_ms,seed,u_b,u_c");
        let row = CsvRow {
            algorithm: "lbs".to_string(),
            energy_j: 1.0,
            lp_bound_j: 2.0,
            runtime_ms: 0.0,
            seed: 0,
            u_b: 0.0,
            u_c: 0.0,
        };
        assert_eq!(
            row.to_line().trim_end().split(',').count(),
            columns.split(',').count()
        );
    }

    #[test]
    fn gantt_has_a_lane_per_machine_and_a_bar_per_operation() {
        let (scenario, schedule) = canonical_schedule();
        let svg = gantt_svg(&scenario, &schedule);
        assert!(svg.starts_with("<svg"));
        assert!(svg.ends_with("</svg>\n"));
        assert!(svg.contains("u (uplink)"));
        assert!(svg.contains("s (server)"));
        assert!(svg.contains("d (downlink)"));
        for color in ["#4c78a8", "#f58518", "#54a24b"] {
            assert_eq!(svg.matches(color).count(), 1, "{color}");
        }
        assert!(svg.contains("<title>j0 [1, 20]</title>"));
        // Deterministic output.
        assert_eq!(svg, gantt_svg(&scenario, &schedule));
    }
}
