//! Command-line harness: scenario generation, offline/online scheduling,
//! verification, and CSV/SVG reporting. Every schedule is validated before
//! it is written; any violation exits nonzero without producing output.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use mecsched::instance::{self, InstanceSet, DEFAULT_INSTANCE_CAP};
use mecsched::model::Scenario;
use mecsched::offline::{self, Schedule};
use mecsched::online::{self, OnlinePolicy};
use mecsched::oracle::{self, OracleCaps};
use mecsched::report::{CsvRow, RunReport, ScheduleDocument};
use mecsched::workload::{self, GeneratorConfig};
use mecsched::{lp, Error};

#[derive(Parser)]
#[command(name = "mecsched", version, about = "Deadline-constrained offload job scheduling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic scenario with targeted utilizations.
    Generate(GenerateArgs),
    /// Run an offline algorithm over a scenario.
    Offline(OfflineArgs),
    /// Run an online policy over a scenario.
    Online(OnlineArgs),
    /// Validate a schedule; optionally compare against the exact optimum.
    Verify(VerifyArgs),
    /// Append a metrics CSV row for a schedule; optionally draw a Gantt SVG.
    Report(ReportArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Generator config JSON; defaults are used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the config's RNG seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the config's jobset size.
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct OfflineArgs {
    /// Scenario JSON path.
    #[arg(long)]
    scenario: PathBuf,
    /// lhjs | sortall
    #[arg(long, default_value = "lhjs")]
    algorithm: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Rounding parameter kappa (lhjs only).
    #[arg(long, default_value_t = 8.0)]
    kappa: f64,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Also write the instance LP in text form for external solvers.
    #[arg(long)]
    dump_lp: bool,
    /// Also write a per-machine Gantt chart SVG.
    #[arg(long)]
    gantt: bool,
}

#[derive(Args)]
struct OnlineArgs {
    #[arg(long)]
    scenario: PathBuf,
    /// lbs | lbs-late | lc-early | lc-late
    #[arg(long, default_value = "lbs")]
    policy: String,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    #[arg(long)]
    gantt: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    scenario: PathBuf,
    /// Schedule JSON to check.
    #[arg(long)]
    schedule: PathBuf,
    /// "jobs,instances" caps for the exact oracle; omit to skip the
    /// optimality comparison and only validate feasibility.
    #[arg(long)]
    oracle_caps: Option<String>,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long)]
    schedule: PathBuf,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// CSV file name inside out-dir; created with a documented header.
    #[arg(long, default_value = "metrics.csv")]
    csv: String,
    #[arg(long)]
    gantt: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Offline(a) => cmd_offline(a),
        Command::Online(a) => cmd_online(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Report(a) => cmd_report(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn read_scenario(path: &Path) -> Result<Scenario, Error> {
    let text = fs::read_to_string(path)?;
    Scenario::from_json(&text)
}

fn read_schedule(path: &Path, scenario: &Scenario) -> Result<(ScheduleDocument, Schedule), Error> {
    let text = fs::read_to_string(path)?;
    let doc = ScheduleDocument::from_json(&text)?;
    let schedule = doc.resolve(scenario)?;
    Ok((doc, schedule))
}

/// Fail-closed gate: refuses to write any schedule that does not validate.
fn checked_write(
    scenario: &Scenario,
    schedule: &Schedule,
    doc: &ScheduleDocument,
    path: &Path,
) -> Result<ExitCode, Error> {
    let violations = oracle::validate(scenario, schedule);
    if !violations.is_empty() {
        for v in &violations {
            eprintln!("violation: {v}");
        }
        return Err(Error::invalid(format!(
            "schedule failed validation with {} violation(s); nothing written",
            violations.len()
        )));
    }
    fs::write(path, doc.to_json())?;
    println!("wrote {}", path.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_generate(args: GenerateArgs) -> Result<ExitCode, Error> {
    let mut config = match &args.config {
        Some(path) => serde_json::from_str::<GeneratorConfig>(&fs::read_to_string(path)?)?,
        None => GeneratorConfig::default(),
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(jobs) = args.jobs {
        config.jobset_size = jobs;
    }
    let generated = workload::generate(&config)?;
    fs::create_dir_all(&args.out_dir)?;
    let scenario_path = args.out_dir.join(format!("scenario-{}.json", config.seed));
    fs::write(&scenario_path, generated.scenario.to_json())?;
    let metrics = serde_json::json!({
        "seed": config.seed,
        "jobs": generated.scenario.jobs.len(),
        "u_b": generated.u_b,
        "u_c": generated.u_c,
        "attempts": generated.attempts,
    });
    let metrics_path = args.out_dir.join(format!("scenario-{}.metrics.json", config.seed));
    fs::write(&metrics_path, format!("{metrics:#}\n"))?;
    println!(
        "wrote {} (u_b = {:.4}, u_c = {:.4}, {} attempt(s))",
        scenario_path.display(),
        generated.u_b,
        generated.u_c,
        generated.attempts
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_offline(args: OfflineArgs) -> Result<ExitCode, Error> {
    let scenario = read_scenario(&args.scenario)?;
    fs::create_dir_all(&args.out_dir)?;

    if args.dump_lp {
        let set = instance::enumerate_instances(&scenario, DEFAULT_INSTANCE_CAP)?;
        let members: Vec<usize> = (0..set.instances.len()).collect();
        let program = lp::build_full_relaxation(&set, &members);
        let path = args.out_dir.join("relaxation.lp.txt");
        fs::write(&path, lp::export_text(&set, &program))?;
        println!("wrote {}", path.display());
    }

    let started = Instant::now();
    let (schedule, mut doc) = match args.algorithm.as_str() {
        "lhjs" => {
            let outcome = offline::lhjs(&scenario, args.seed, args.kappa, DEFAULT_INSTANCE_CAP)?;
            let mut doc = ScheduleDocument::new(&scenario, &outcome.schedule, "lhjs");
            doc.seed = Some(args.seed);
            doc.kappa = Some(args.kappa);
            let report = RunReport::from_outcome(&outcome, args.seed, args.kappa);
            let report_path = args.out_dir.join("run-report.json");
            fs::write(&report_path, report.to_json())?;
            println!("wrote {}", report_path.display());
            (outcome.schedule, doc)
        }
        "sortall" => {
            let schedule = offline::sort_all(&scenario, DEFAULT_INSTANCE_CAP)?;
            let doc = ScheduleDocument::new(&scenario, &schedule, "sortall");
            (schedule, doc)
        }
        other => {
            return Err(Error::invalid(format!(
                "unknown algorithm `{other}` (expected lhjs or sortall)"
            )))
        }
    };
    doc.runtime_ms = started.elapsed().as_secs_f64() * 1000.0;

    if args.gantt {
        let path = args.out_dir.join(format!("{}-gantt.svg", args.algorithm));
        fs::write(&path, mecsched::report::gantt_svg(&scenario, &schedule))?;
        println!("wrote {}", path.display());
    }
    let path = args.out_dir.join(format!("{}-schedule.json", args.algorithm));
    checked_write(&scenario, &schedule, &doc, &path)
}

fn cmd_online(args: OnlineArgs) -> Result<ExitCode, Error> {
    let scenario = read_scenario(&args.scenario)?;
    let policy = OnlinePolicy::parse(&args.policy)
        .ok_or_else(|| Error::invalid(format!("unknown policy `{}`", args.policy)))?;
    fs::create_dir_all(&args.out_dir)?;

    let started = Instant::now();
    let schedule = online::lbs(&scenario, policy)?;
    let mut doc = ScheduleDocument::new(&scenario, &schedule, "online");
    doc.policy = Some(policy.name().to_string());
    doc.runtime_ms = started.elapsed().as_secs_f64() * 1000.0;

    if args.gantt {
        let path = args.out_dir.join(format!("{}-gantt.svg", policy.name()));
        fs::write(&path, mecsched::report::gantt_svg(&scenario, &schedule))?;
        println!("wrote {}", path.display());
    }
    let path = args.out_dir.join(format!("{}-schedule.json", policy.name()));
    checked_write(&scenario, &schedule, &doc, &path)
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode, Error> {
    let scenario = read_scenario(&args.scenario)?;
    let (_, schedule) = read_schedule(&args.schedule, &scenario)?;
    let violations = oracle::validate(&scenario, &schedule);
    if !violations.is_empty() {
        for v in &violations {
            println!("violation: {v}");
        }
        println!("INVALID: {} violation(s)", violations.len());
        return Ok(ExitCode::FAILURE);
    }
    println!("valid: {} instance(s), e(S) = {}", schedule.selected.len(), schedule.total_energy);

    if let Some(text) = &args.oracle_caps {
        let caps = parse_caps(text)?;
        let set = instance::enumerate_instances(&scenario, DEFAULT_INSTANCE_CAP)?;
        let (optimum, _) = oracle::exact_optimum(&scenario, &set.instances, caps)?;
        println!(
            "exact optimum = {optimum}; schedule achieves {:.4} of it",
            if optimum > 0.0 {
                schedule.total_energy / optimum
            } else {
                0.0
            }
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn parse_caps(text: &str) -> Result<OracleCaps, Error> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 2 {
        return Err(Error::invalid("oracle-caps must be `max_jobs,max_instances`"));
    }
    let max_jobs = parts[0]
        .trim()
        .parse()
        .map_err(|_| Error::invalid("oracle-caps: bad max_jobs"))?;
    let max_instances = parts[1]
        .trim()
        .parse()
        .map_err(|_| Error::invalid("oracle-caps: bad max_instances"))?;
    Ok(OracleCaps {
        max_jobs,
        max_instances,
    })
}

fn cmd_report(args: ReportArgs) -> Result<ExitCode, Error> {
    let scenario = read_scenario(&args.scenario)?;
    let (doc, schedule) = read_schedule(&args.schedule, &scenario)?;
    let violations = oracle::validate(&scenario, &schedule);
    if !violations.is_empty() {
        for v in &violations {
            eprintln!("violation: {v}");
        }
        return Err(Error::invalid("schedule failed validation; no row written"));
    }

    let set = instance::enumerate_instances(&scenario, DEFAULT_INSTANCE_CAP)?;
    let bound = full_relaxation_bound(&set)?;
    let row = CsvRow {
        algorithm: doc
            .policy
            .clone()
            .unwrap_or_else(|| doc.algorithm.clone()),
        energy_j: schedule.total_energy,
        lp_bound_j: bound,
        runtime_ms: doc.runtime_ms,
        seed: doc.seed.unwrap_or(0),
        u_b: workload::jobset_bandwidth_utilization(&scenario),
        u_c: workload::jobset_computation_utilization(&scenario),
    };
    fs::create_dir_all(&args.out_dir)?;
    let csv_path = args.out_dir.join(&args.csv);
    let mut text = if csv_path.exists() {
        fs::read_to_string(&csv_path)?
    } else {
        mecsched::report::csv_header()
    };
    text.push_str(&row.to_line());
    fs::write(&csv_path, text)?;
    println!("appended row to {}", csv_path.display());

    if args.gantt {
        let path = args.out_dir.join("gantt.svg");
        fs::write(&path, mecsched::report::gantt_svg(&scenario, &schedule))?;
        println!("wrote {}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn full_relaxation_bound(set: &InstanceSet) -> Result<f64, Error> {
    let members: Vec<usize> = (0..set.instances.len()).collect();
    let program = lp::build_full_relaxation(set, &members);
    let solution = lp::solve(&program, mecsched::simplex::PivotRule::Dantzig)?;
    Ok(solution.objective)
}
