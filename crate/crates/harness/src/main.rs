use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use unified_ipp::belief::MapBelief;
use unified_ipp::unified::export_state_raster;
use unified_ipp_harness::config::{BenchmarkConfig, MissionConfig, PlannerKind, Protocol};
use unified_ipp_harness::heatmap::render_heatmap;
use unified_ipp_harness::results::{summary_csv, write_results};
use unified_ipp_harness::{run_benchmark, HarnessError, Mission, Result};

#[derive(Parser)]
#[command(name = "uipp", version, about = "Map-agnostic informative path planning simulator and benchmark")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one mission and write its episode log and metrics.
    Run(MissionArgs),
    /// Run a Static or Varying sweep over missions, seeds and planners.
    Benchmark(BenchArgs),
    /// Run one mission and render ground truth, belief, interest and uncertainty as PPM images.
    Render {
        #[command(flatten)]
        mission: MissionArgs,
        /// Pixels per grid cell.
        #[arg(long, default_value_t = 8)]
        scale: usize,
    },
    /// Dump the planning state after `--step` actions as a layered CSV raster.
    ExportState {
        #[command(flatten)]
        mission: MissionArgs,
        #[arg(long, default_value_t = 0)]
        step: usize,
    },
}

#[derive(Args)]
struct MissionArgs {
    /// Mission config JSON; missing keys take defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    planner: Option<PlannerKind>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// Benchmark config JSON; missing keys take defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Restrict the sweep to these planners (repeatable).
    #[arg(long, value_enum)]
    planner: Vec<PlannerKind>,
    #[arg(long, value_enum)]
    protocol: Option<Protocol>,
    #[arg(long)]
    missions: Option<usize>,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    parallel: usize,
    #[arg(long, default_value = "results")]
    out: PathBuf,
    /// Also write mean replanning time into summary.csv (not reproducible).
    #[arg(long)]
    timing: bool,
}

impl MissionArgs {
    fn load(&self) -> Result<MissionConfig> {
        let mut c = match &self.config {
            Some(p) => MissionConfig::load(p)?,
            None => MissionConfig::default(),
        };
        if let Some(s) = self.seed {
            c.seed = s;
        }
        if let Some(p) = self.planner {
            c.planner = p;
        }
        c.validate()?;
        Ok(c)
    }
}

fn run_to_end(config: &MissionConfig, limit: Option<usize>) -> Result<Mission> {
    let mut mission = Mission::new(config)?;
    while limit.is_none_or(|l| mission.steps.len() <= l) && mission.step()? {}
    Ok(mission)
}

fn cmd_run(args: &MissionArgs) -> Result<()> {
    let config = args.load()?;
    let log = unified_ipp_harness::run_mission(&config)?;
    std::fs::create_dir_all(&args.out)?;
    std::fs::write(args.out.join("episode.csv"), log.steps_csv())?;
    std::fs::write(args.out.join("config.json"), serde_json::to_string_pretty(&config)? + "\n")?;
    let header = unified_ipp::metrics::MetricsRecord::CSV_HEADER;
    match &log.metrics {
        Some(m) => {
            let text = format!("{header}\n{}\n", m.csv_row());
            std::fs::write(args.out.join("metrics.csv"), &text)?;
            print!("{text}");
        }
        None => {
            eprintln!("mission aborted: {}", log.error.as_deref().unwrap_or("unknown"));
            return Err(HarnessError::Core(unified_ipp::IppError::Numerical(log.error.clone().unwrap_or_default())));
        }
    }
    println!("actions: {}, mean replan time: {:.4} s", log.actions().len(), log.mean_replan_seconds());
    Ok(())
}

fn cmd_benchmark(args: &BenchArgs) -> Result<()> {
    let mut cfg = match &args.config {
        Some(p) => BenchmarkConfig::load(p)?,
        None => BenchmarkConfig::default(),
    };
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if !args.planner.is_empty() {
        cfg.planners = args.planner.clone();
    }
    if let Some(p) = args.protocol {
        cfg.protocol = p;
    }
    if let Some(m) = args.missions {
        cfg.missions = m;
    }
    let run = run_benchmark(&cfg, args.parallel)?;
    write_results(&run, &args.out, args.timing)?;
    print!("{}", summary_csv(&run.summary, args.timing));
    Ok(())
}

fn scaled(values: &[f64]) -> Vec<f64> {
    let max = values.iter().copied().fold(0.0, f64::max);
    values.iter().map(|v| if max > 0.0 { v / max } else { 0.0 }).collect()
}

fn cmd_render(args: &MissionArgs, scale: usize) -> Result<()> {
    let config = args.load()?;
    let mission = run_to_end(&config, None)?;
    let g = mission.belief.geometry();
    let (w, h) = (g.width(), g.height());
    let field = &mission.setup.field;
    let path: Vec<_> = mission.steps.iter().map(|s| s.pose).collect();
    let out = &args.out;
    std::fs::create_dir_all(out)?;
    let class_scale = |labels: Vec<u16>, k: u16| -> Vec<f64> {
        labels.iter().map(|l| (l - 1) as f64 / (k - 1) as f64).collect()
    };
    let (truth, belief) = match &mission.belief {
        MapBelief::Gaussian(b) => (field.continuous_values().expect("continuous").to_vec(), b.mean().to_vec()),
        MapBelief::Occupancy(b) => {
            let k = b.classes();
            let argmax = (0..g.len()).map(|c| b.argmax(c)).collect();
            (class_scale(field.labels().expect("discrete").to_vec(), k), class_scale(argmax, k))
        }
    };
    let state = mission.state()?;
    let write = |name: &str, v: &[f64], overlay: Option<&[unified_ipp::Pose]>| -> Result<()> {
        render_heatmap(v, w, h, out.join(name), overlay, scale)?;
        Ok(())
    };
    write("truth.ppm", &truth, Some(&path))?;
    write("belief.ppm", &belief, Some(&path))?;
    write("interest.ppm", &state.interest, Some(&path))?;
    write("uncertainty.ppm", &scaled(&state.uncertainty), None)?;
    println!("wrote truth.ppm, belief.ppm, interest.ppm, uncertainty.ppm to {}", out.display());
    Ok(())
}

fn cmd_export(args: &MissionArgs, step: usize) -> Result<()> {
    let config = args.load()?;
    let mission = run_to_end(&config, Some(step))?;
    let state = mission.state()?;
    let file = if args.out.extension().is_some() { args.out.clone() } else { args.out.join("state.csv") };
    if let Some(dir) = file.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    export_state_raster(&state, &file)?;
    println!("state after {} actions written to {}", mission.steps.len() - 1, display(&file));
    Ok(())
}

fn display(p: &Path) -> String {
    p.display().to_string()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Benchmark(a) => cmd_benchmark(a),
        Command::Render { mission, scale } => cmd_render(mission, *scale),
        Command::ExportState { mission, step } => cmd_export(mission, *step),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
