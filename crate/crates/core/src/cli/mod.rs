//! Batch front-end behind the `masense` binary.

mod config;
pub mod plot;
mod verify;

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

pub use config::Params;
pub use verify::{run_checks, write_report, CheckResult};

use crate::error::{Error, Result};
use crate::estimation::{sweep, Dataset, Experiment, McConfig, SignalOptions, Source, SweepConfig};
use crate::geometry::io::{read_trajectory_csv, write_positions_csv, write_trajectory_csv};
use crate::geometry::{apv_covariance, Positions, Trajectory};
use crate::metrics::{isotropy_report, msaeb_map, write_map_csv, AngleGrid, SensingScenario};
use crate::sca::{
    optimize, optimize_single_direction, sca_optimize, single_direction_problem, write_trace_csv, OptimizationProblem, ScaOutcome,
};
use crate::trajectories::{aperture, Benchmark, BenchmarkKind, BenchmarkSpec};
use plot::{heatmap, line_chart, Series};

/// Snapshot count above which runs need `--allow-large`.
pub const LARGE_N: usize = 5000;

#[derive(Debug, Parser)]
#[command(name = "masense", version, about = "Movable-antenna direction sensing: bounds, trajectory optimization and Monte Carlo")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct Common {
    /// Parameter file with `key = value` lines.
    #[arg(long, short)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, short, default_value = "out")]
    pub out: PathBuf,
    /// Overrides the `seed` key (the MASENSE_SEED variable takes precedence).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Extra `key=value` overrides, applied after the file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Render an SVG next to every CSV.
    #[arg(long)]
    pub plot: bool,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    /// Permit runs with more than 5000 snapshots.
    #[arg(long)]
    pub allow_large: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Worst-case trajectory optimization over the angular region.
    Optimize(Common),
    /// Trajectory optimization for the single target direction.
    OptimizeSingle(Common),
    /// Generate a benchmark trajectory or fixed array.
    Benchmark {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        kind: Option<BenchmarkKind>,
        #[arg(long = "N")]
        n: Option<usize>,
    },
    /// MSAEB over the whole sphere for a benchmark or trajectory file.
    MsaebMap(Common),
    /// Monte Carlo or correlation dataset.
    McSweep {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        experiment: Option<Experiment>,
    },
    /// Run the invariant suite and report PASS/FAIL.
    Verify(Common),
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Optimize(c) | Command::OptimizeSingle(c) | Command::MsaebMap(c) | Command::Verify(c) => c,
            Command::Benchmark { common, .. } | Command::McSweep { common, .. } => common,
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Command::Optimize(_) => "optimize",
            Command::OptimizeSingle(_) => "optimize-single",
            Command::Benchmark { .. } => "benchmark",
            Command::MsaebMap(_) => "msaeb-map",
            Command::McSweep { .. } => "mc-sweep",
            Command::Verify(_) => "verify",
        }
    }
}

/// Process exit status for an error: 1 for bad input, 2 for failures while
/// computing.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Numerical(_) | Error::InfeasibleStart(_) | Error::DimensionMismatch(_) | Error::NotPlanar(_) => 2,
        _ => 1,
    }
}

fn resolve(cmd: &Command) -> Result<Params> {
    let common = cmd.common();
    let mut p = Params::default();
    if let Some(path) = &common.config {
        p.load(path)?;
    }
    for pair in &common.set {
        p.set_pair(pair)?;
    }
    if let Command::Benchmark { kind, n, .. } = cmd {
        if let Some(k) = kind {
            p.set("kind", k.name())?;
        }
        if let Some(n) = n {
            p.set("N", &n.to_string())?;
        }
    }
    if let Command::McSweep { experiment: Some(e), .. } = cmd {
        p.set("experiment", e.name())?;
    }
    if let Some(s) = common.seed {
        p.set("seed", &s.to_string())?;
    }
    if let Ok(s) = std::env::var("MASENSE_SEED") {
        s.trim()
            .parse::<u64>()
            .map_err(|e| Error::Config(format!("MASENSE_SEED=`{s}`: {e}")))?;
        p.set("seed", s.trim())?;
    }
    Ok(p)
}

struct Run {
    out: PathBuf,
    plot: bool,
    written: Vec<String>,
}

impl Run {
    fn create(&mut self, name: &str) -> Result<BufWriter<File>> {
        self.written.push(name.to_string());
        Ok(BufWriter::new(File::create(self.out.join(name))?))
    }

    fn svg(&mut self, name: &str, body: String) -> Result<()> {
        if self.plot {
            self.written.push(name.to_string());
            std::fs::write(self.out.join(name), body)?;
        }
        Ok(())
    }
}

/// Seconds a run is expected to take, from rough per-operation costs.
fn runtime_estimate(cmd: &Command, p: &Params) -> Result<f64> {
    let n = p.n()? as f64;
    Ok(match cmd {
        Command::Optimize(_) | Command::OptimizeSingle(_) => {
            let blocks = n / p.get::<f64>("velocity_block")?;
            let q = if matches!(cmd, Command::Optimize(_)) { p.get::<f64>("Q")? } else { 1.0 };
            p.get::<f64>("max_iters")? * 100.0 * q * (3.0 * blocks).powi(2) * 5e-9
        }
        Command::McSweep { .. } => {
            let cells = (180.0 / p.get::<f64>("mle_resolution_deg")?) * (360.0 / p.get::<f64>("mle_resolution_deg")?);
            let points = p.list::<f64>("snr_list_db")?.len().max(p.list::<f64>("theta_list_deg")?.len()) as f64;
            let sources = p.list::<String>("sources")?.len() as f64;
            p.get::<f64>("trials")? * points * sources * cells * n * 1.5e-9
        }
        _ => n * 1e-6,
    })
}

/// Runs one command and returns the process exit status.
pub fn run(cli: Cli) -> i32 {
    match execute(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn execute(cmd: &Command) -> Result<i32> {
    let started = Instant::now();
    let common = cmd.common();
    let params = resolve(cmd)?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(common.threads.max(1))
        .build_global()
        .ok();
    if !matches!(cmd, Command::Verify(_)) && params.n()? > LARGE_N {
        let est = runtime_estimate(cmd, &params)?;
        eprintln!("N = {} with estimated runtime {:.0} s", params.n()?, est);
        if !common.allow_large {
            return Err(Error::Config(format!(
                "N above {LARGE_N} requires --allow-large"
            )));
        }
    }
    std::fs::create_dir_all(&common.out)?;
    let mut run = Run {
        out: common.out.clone(),
        plot: common.plot,
        written: Vec::new(),
    };
    let code = match cmd {
        Command::Optimize(_) => {
            let problem = params.problem()?;
            let file = params.raw("trajectory_file");
            let out = if file.is_empty() {
                optimize(&problem)?
            } else {
                sca_optimize(&problem, &read_trajectory_csv(File::open(Path::new(file))?)?)?
            };
            report_optimization(&mut run, &params, &problem, &out)?;
            0
        }
        Command::OptimizeSingle(_) => {
            let chi = params.target()?;
            let problem = single_direction_problem(&params.problem()?, chi);
            let out = optimize_single_direction(&problem, chi)?;
            report_optimization(&mut run, &params, &problem, &out)?;
            0
        }
        Command::Benchmark { .. } => {
            benchmark(&mut run, &params)?;
            0
        }
        Command::MsaebMap(_) => {
            map(&mut run, &params)?;
            0
        }
        Command::McSweep { .. } => {
            mc_sweep(&mut run, &params)?;
            0
        }
        Command::Verify(_) => {
            let results = run_checks(params.seed()?);
            println!("{:<44} result", "check");
            for r in &results {
                println!("{:<44} {}  {}", r.name, if r.pass { "PASS" } else { "FAIL" }, r.detail);
            }
            write_report(&results, run.create("verify_report.csv")?)?;
            if results.iter().all(|r| r.pass) {
                0
            } else {
                2
            }
        }
    };
    write_manifest(&run, cmd, &params, started)?;
    Ok(code)
}

fn write_manifest(run: &Run, cmd: &Command, params: &Params, started: Instant) -> Result<()> {
    let mut text = String::new();
    text.push_str(&format!("command = {}\n", cmd.name()));
    text.push_str(&format!("masense_version = {}\n", env!("CARGO_PKG_VERSION")));
    text.push_str(&format!("seed = {}\n", params.raw("seed")));
    text.push_str(&format!("threads = {}\n", cmd.common().threads));
    text.push_str(&format!("wall_seconds = {:.3}\n", started.elapsed().as_secs_f64()));
    text.push_str(&format!("outputs = {}\n", run.written.join(",")));
    text.push_str("\n# resolved parameters\n");
    text.push_str(&params.dump());
    std::fs::write(run.out.join("manifest.txt"), text)?;
    Ok(())
}

fn trajectory_plot(title: &str, pts: &[nalgebra::Vector3<f64>]) -> String {
    let proj = |a: usize, b: usize| pts.iter().map(|p| (p[a], p[b])).collect();
    line_chart(
        title,
        "first coordinate (m)",
        "second coordinate (m)",
        &[
            Series { label: "x-y".into(), points: proj(0, 1) },
            Series { label: "x-z".into(), points: proj(0, 2) },
            Series { label: "y-z".into(), points: proj(1, 2) },
        ],
        false,
    )
}

fn report_optimization(run: &mut Run, params: &Params, problem: &OptimizationProblem, out: &ScaOutcome) -> Result<()> {
    write_trajectory_csv(&out.trajectory, run.create("trajectory.csv")?)?;
    write_trace_csv(&out.trace, run.create("trace.csv")?)?;
    let it = |f: fn(&crate::sca::ScaIteration) -> f64| out.trace.iterations.iter().map(|r| (r.iter as f64, f(r))).collect();
    run.svg(
        "trace.svg",
        line_chart(
            "worst-case geometry factor",
            "iteration",
            "F (1/m^2)",
            &[
                Series { label: "grid".into(), points: it(|r| r.delta_grid) },
                Series { label: "dense".into(), points: it(|r| r.delta_dense) },
            ],
            true,
        ),
    )?;
    run.svg("trajectory.svg", trajectory_plot("trajectory projections", out.trajectory.positions()))?;
    let scen = SensingScenario::from_snr_db(params.get("wavelength")?, params.get("snr_db")?, problem.ts, problem.n)?;
    println!(
        "{} outer iterations, worst F on grid {:.6e}, on dense grid {:.6e}, worst MSAEB at {} dB {:.6e} rad^2",
        out.trace.outer_iterations(),
        out.trace.final_delta(),
        out.trace.final_dense(),
        params.raw("snr_db"),
        scen.rho() * out.trace.final_dense()
    );
    for d in &out.trace.diagnostics {
        eprintln!("note: {d}");
    }
    Ok(())
}

fn benchmark_spec(params: &Params, kind: BenchmarkKind) -> Result<BenchmarkSpec> {
    Ok(BenchmarkSpec {
        kind,
        n: params.n()?,
        delta: params.step()?,
        wavelength: params.get("wavelength")?,
        sampling_period: params.get("Ts")?,
    })
}

fn benchmark(run: &mut Run, params: &Params) -> Result<()> {
    let spec = benchmark_spec(params, params.kind()?)?;
    let b = spec.generate()?;
    match &b {
        Benchmark::Moving(t) => write_trajectory_csv(t, run.create("trajectory.csv")?)?,
        Benchmark::Fixed(s) => write_positions_csv(s.element_positions(), run.create("positions.csv")?)?,
    }
    let rep = isotropy_report(&apv_covariance(&b), 1e-9);
    let ap = aperture(&b);
    let mut w = csv::Writer::from_writer(run.create("isotropy.csv")?);
    w.write_record(["kind", "is_isotropic", "tau_m2", "deviation", "aperture_x_m", "aperture_y_m", "aperture_z_m"])?;
    w.write_record([
        spec.kind.name().to_string(),
        rep.is_isotropic.to_string(),
        format!("{:.16e}", rep.tau),
        format!("{:.16e}", rep.deviation),
        format!("{:.16e}", ap.x),
        format!("{:.16e}", ap.y),
        format!("{:.16e}", ap.z),
    ])?;
    w.flush()?;
    println!(
        "{}: {} samples, isotropic = {}, deviation {:.3e}, aperture {:.4e} x {:.4e} x {:.4e} m",
        spec.kind,
        b.sample_count(),
        rep.is_isotropic,
        rep.deviation,
        ap.x,
        ap.y,
        ap.z
    );
    run.svg("trajectory.svg", trajectory_plot(spec.kind.name(), b.positions()))?;
    Ok(())
}

fn full_sphere(params: &Params) -> Result<AngleGrid> {
    let step: f64 = params.get("map_resolution_deg")?;
    if !(step > 0.0) {
        return Err(Error::Config("map_resolution_deg must be positive".into()));
    }
    let nt = (180.0 / step).round() as usize + 1;
    let np = (360.0 / step).round() as usize + 1;
    AngleGrid::from_degrees((0.0, 180.0, nt), (0.0, 360.0, np))
}

fn map_source(params: &Params) -> Result<(String, Vec<nalgebra::Vector3<f64>>)> {
    let file = params.raw("trajectory_file");
    if !file.is_empty() {
        let t: Trajectory = read_trajectory_csv(File::open(Path::new(file))?)?;
        return Ok((file.to_string(), t.positions().to_vec()));
    }
    let spec = benchmark_spec(params, params.kind()?)?;
    Ok((spec.kind.name().to_string(), spec.generate()?.positions().to_vec()))
}

fn map(run: &mut Run, params: &Params) -> Result<()> {
    let (name, pts) = map_source(params)?;
    let grid = full_sphere(params)?.points();
    let scen = SensingScenario::from_snr_db(params.get("wavelength")?, params.get("snr_db")?, params.get("Ts")?, pts.len())?;
    let values = msaeb_map(&pts, &grid, &scen)?;
    write_map_csv(&grid, &values, run.create("msaeb_map.csv")?)?;
    let cells: Vec<_> = grid.iter().zip(&values).map(|(c, v)| (c.theta_deg(), c.phi_deg(), *v)).collect();
    run.svg("msaeb_map.svg", heatmap(&format!("MSAEB (rad^2), {name}"), &cells, true))?;
    let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    println!(
        "{name}: {} directions, {} unbounded, finite range [{:.4e}, {:.4e}] rad^2",
        values.len(),
        values.len() - finite.len(),
        finite.iter().copied().fold(f64::INFINITY, f64::min),
        finite.iter().copied().fold(0.0, f64::max)
    );
    Ok(())
}

fn sources(params: &Params) -> Result<Vec<Source>> {
    let mut out = Vec::new();
    for name in params.list::<String>("sources")? {
        let src = match name.as_str() {
            "optimized" => Source::new(name.clone(), &optimize(&params.problem()?)?.trajectory),
            "optimized-single" => {
                let chi = params.target()?;
                let p = single_direction_problem(&params.problem()?, chi);
                Source::new(name.clone(), &optimize_single_direction(&p, chi)?.trajectory)
            }
            other => {
                let kind: BenchmarkKind = other.parse()?;
                Source::new(kind.name(), &benchmark_spec(params, kind)?.generate()?)
            }
        };
        out.push(src);
    }
    Ok(out)
}

fn mc_sweep(run: &mut Run, params: &Params) -> Result<()> {
    let experiment = params.experiment()?;
    let mut mc = McConfig::new(params.get("trials")?, params.seed()?);
    mc.grid = params.mle_grid()?;
    mc.snr_db = params.list("snr_list_db")?;
    mc.signal = SignalOptions {
        noiseless: false,
        random_symbol_phase: params.get("random_phase")?,
    };
    let cfg = SweepConfig {
        sources: sources(params)?,
        wavelength: params.get("wavelength")?,
        sampling_period: params.get("Ts")?,
        target: params.target()?,
        theta_deg: params.list("theta_list_deg")?,
        phi_deg: params.get("sweep_phi_deg")?,
        snr_db: params.get("snr_db")?,
        mc,
        correlation_grid: full_sphere(params)?,
    };
    let data = sweep(experiment, &cfg)?;
    let csv_name = format!("{}.csv", experiment.name());
    data.write_csv(run.create(&csv_name)?)?;
    println!("{}: {} rows written to {}", experiment, data.len(), run.out.join(&csv_name).display());
    if run.plot {
        let names: Vec<String> = cfg.sources.iter().map(|s| s.name.clone()).collect();
        match &data {
            Dataset::Snr(rows) => {
                let mut series = Vec::new();
                for n in &names {
                    let pick = |f: fn(&crate::estimation::SnrRow) -> f64| {
                        rows.iter().filter(|r| &r.source == n && r.snr_db.is_finite()).map(|r| (r.snr_db, f(r))).collect()
                    };
                    series.push(Series { label: format!("{n} MLE"), points: pick(|r| r.msae) });
                    series.push(Series { label: format!("{n} bound"), points: pick(|r| r.msaeb) });
                }
                run.svg("msae_vs_snr.svg", line_chart("MSAE versus SNR", "SNR (dB)", "MSAE (rad^2)", &series, true))?;
            }
            Dataset::Theta(rows) => {
                let mut series = Vec::new();
                for n in &names {
                    let pick = |f: fn(&crate::estimation::ThetaRow) -> f64| {
                        rows.iter().filter(|r| &r.source == n).map(|r| (r.theta_deg, f(r))).collect()
                    };
                    series.push(Series { label: format!("{n} MLE"), points: pick(|r| r.msae) });
                    series.push(Series { label: format!("{n} bound"), points: pick(|r| r.msaeb) });
                }
                run.svg("msae_vs_theta.svg", line_chart("MSAE versus elevation", "theta (deg)", "MSAE (rad^2)", &series, true))?;
            }
            Dataset::Correlation(rows) => {
                for n in &names {
                    let cells: Vec<_> = rows.iter().filter(|r| &r.source == n).map(|r| (r.theta_deg, r.phi_deg, r.value)).collect();
                    run.svg(&format!("correlation_{n}.svg"), heatmap(&format!("steering correlation, {n}"), &cells, false))?;
                }
            }
        }
    }
    Ok(())
}
