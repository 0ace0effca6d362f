use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use pedrate::estimator::write_estimates_csv;
use pedrate::eventlog::EventLog;
use pedrate::experiment::{self, estimate_log, load_graph, ExperimentError, ExperimentKind, ExperimentSpec};
use pedrate::network::NetworkGraph;
use pedrate::simkit::simulate;

#[derive(Parser)]
#[command(name = "pedrate", version, about = "Pedestrian arrival-rate estimation from a moving vehicle")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Args)]
struct Opts {
    /// JSON experiment config (scenario, estimator and sweep settings).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Base seed; repetition i uses seed + i.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    reps: Option<usize>,
    /// Significance level of the confidence intervals.
    #[arg(long, global = true)]
    alpha: Option<f64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Moving-average window for profiles, seconds.
    #[arg(long, global = true)]
    window_sec: Option<f64>,
    /// Pedestrian speed assumed when nobody is visible, m/s.
    #[arg(long, global = true)]
    fallback_speed: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and write its event log.
    Simulate,
    /// Whole-log rate estimates for every link of a recorded log.
    Estimate { log_dir: PathBuf },
    /// DF vs MLF ROC study.
    Roc,
    /// Estimates against the number of traversals of one link.
    SweepVisits,
    /// Estimates against the true arrival rate.
    SweepRates,
    /// Moving observer vs stationary counters on every link.
    FullNetwork,
    /// Rate profiles and estimates from a recorded log.
    Replay { log_dir: PathBuf },
    /// Check a graph file or builtin graph.
    ValidateGraph { graph: String },
}

enum Failure {
    Config(String),
    Data(String),
}

impl From<ExperimentError> for Failure {
    fn from(e: ExperimentError) -> Self {
        if e.is_data_error() {
            Failure::Data(e.to_string())
        } else {
            Failure::Config(e.to_string())
        }
    }
}

fn data_io(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Data(format!("{}: {e}", path.display()))
}

fn resolve(opts: &Opts, kind: ExperimentKind) -> Result<ExperimentSpec, Failure> {
    let mut spec = match &opts.config {
        Some(path) => ExperimentSpec::load(path)?,
        None => ExperimentSpec::new(kind),
    };
    spec.kind = kind;
    if let Some(s) = opts.seed {
        spec.scenario.seed = s;
    }
    if let Some(r) = opts.reps {
        spec.reps = r;
    }
    if let Some(a) = opts.alpha {
        spec.estimator.alpha = a;
    }
    if let Some(w) = opts.window_sec {
        spec.estimator.window_s = w;
    }
    if let Some(v) = opts.fallback_speed {
        spec.estimator.fallback_speed = v;
    }
    if let Some(o) = &opts.out {
        spec.out_dir = o.clone();
    }
    Ok(spec)
}

fn write(dir: &Path, name: &str, body: &str) -> Result<PathBuf, Failure> {
    std::fs::create_dir_all(dir).map_err(|e| data_io(dir, e))?;
    let path = dir.join(name);
    std::fs::write(&path, body).map_err(|e| data_io(&path, e))?;
    Ok(path)
}

fn run(cli: Cli) -> Result<Vec<PathBuf>, Failure> {
    let opts = &cli.opts;
    match cli.command {
        Command::Simulate => {
            let spec = resolve(opts, ExperimentKind::FullNetwork)?;
            spec.validate()?;
            let graph = load_graph(spec.graph_name())?;
            let out = simulate(&graph, &spec.scenario).map_err(ExperimentError::from)?;
            let mut truth = String::from("link_id,true_rate_per_min\n");
            for (link, rate) in &out.true_link_rates {
                truth.push_str(&format!("{link},{rate}\n"));
            }
            let scenario = serde_json::to_string_pretty(&spec.scenario).expect("scenario serializes") + "\n";
            let dir = &spec.out_dir;
            Ok(vec![
                write(dir, "events.csv", &out.log.to_csv_string())?,
                write(dir, "graph.json", &(graph.to_json() + "\n"))?,
                write(dir, "scenario.json", &scenario)?,
                write(dir, "truth.csv", &truth)?,
            ])
        }
        Command::Estimate { log_dir } => {
            let spec = resolve(opts, ExperimentKind::HardwareReplay)?;
            spec.estimator.validate().map_err(ExperimentError::from)?;
            let events = log_dir.join("events.csv");
            let log = EventLog::load(&events).map_err(|e| data_io(&events, e))?;
            let graph_path = log_dir.join("graph.json");
            let graph = if graph_path.is_file() {
                Some(NetworkGraph::load(&graph_path).map_err(|e| data_io(&graph_path, e))?)
            } else {
                None
            };
            let r = estimate_log(&log, graph.as_ref(), spec.estimator, spec.profile_step_s)?;
            let mut buf = Vec::new();
            write_estimates_csv(&mut buf, &r.estimates).expect("writing to memory");
            let body = String::from_utf8(buf).expect("csv is utf-8");
            print!("{body}");
            Ok(vec![write(&spec.out_dir, "estimates.csv", &body)?])
        }
        Command::Replay { log_dir } => {
            let mut spec = resolve(opts, ExperimentKind::HardwareReplay)?;
            spec.log_dir = Some(log_dir);
            Ok(experiment::run(&spec)?.write(&spec.out_dir)?)
        }
        Command::Roc | Command::SweepVisits | Command::SweepRates | Command::FullNetwork => {
            let kind = match cli.command {
                Command::Roc => ExperimentKind::Roc,
                Command::SweepVisits => ExperimentKind::SingleLinkVisitsSweep,
                Command::SweepRates => ExperimentKind::RateSweep,
                _ => ExperimentKind::FullNetwork,
            };
            let spec = resolve(opts, kind)?;
            let report = experiment::run(&spec)?;
            println!("{}", serde_json::to_string_pretty(&report.summary).expect("summary serializes"));
            Ok(report.write(&spec.out_dir)?)
        }
        Command::ValidateGraph { graph } => {
            let g = if graph.starts_with("builtin:") {
                load_graph(&graph)?
            } else {
                let path = Path::new(&graph);
                let text = std::fs::read_to_string(path).map_err(|e| data_io(path, e))?;
                NetworkGraph::from_json(&text).map_err(|e| data_io(path, e))?
            };
            let violations = g.validate();
            if !violations.is_empty() {
                for v in &violations {
                    eprintln!("{v}");
                }
                return Err(Failure::Data(format!("{graph}: {} violation(s)", violations.len())));
            }
            let active = g.link_rates().values().filter(|&&r| r > 0.0).count();
            println!(
                "{graph}: ok, {} nodes, {} links, {} routes, {} active links",
                g.nodes().len(),
                g.links().len(),
                g.routes().len(),
                active
            );
            Ok(Vec::new())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(paths) => {
            for p in paths {
                eprintln!("wrote {}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(Failure::Config(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Data(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
