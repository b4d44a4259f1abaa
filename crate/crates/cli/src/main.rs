use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use kinetic_parareal::io::pipeline::executor_for;
use kinetic_parareal::io::spec::ScalingSection;
use kinetic_parareal::io::{
    format_real, reference_to_dir, run_to_dir, write_scaling_csv, HomogenizeSetting, ModelSpec, ResolvedRun,
    RunArtifacts, RunManifest, ScalingRow, MANIFEST_FILE,
};
use kinetic_parareal::network::ModelName;
use kinetic_parareal::parareal::{parareal_run, StopReason};
use kinetic_parareal::validation::{fixtures, omega_scaling_study, run_suite, ScalingStudy};

const OUT_DIR_ENV: &str = "KPARAREAL_OUT_DIR";
const DEFAULT_OUT_DIR: &str = "kparareal-out";

#[derive(Parser)]
#[command(name = "kparareal", version, about = "Parareal for stochastic chemical kinetics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parareal run with a serial fine reference; writes convergence and trajectory CSVs.
    Run(RunArgs),
    /// Serial fine solve only.
    Reference(ReferenceArgs),
    /// Run validation suites and print a pass/fail table.
    Validate(ValidateArgs),
    /// Residual-versus-size sweep of the reaction-diffusion chain and the fluctuation scaling study.
    Scaling(ScalingArgs),
}

#[derive(Args, Clone)]
struct Common {
    /// TOML run specification.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Built-in model: toggle, dimer_iso or rdme_chain.
    #[arg(long)]
    model: Option<String>,
    /// Final time.
    #[arg(long = "T")]
    t_final: Option<f64>,
    /// Number of intervals.
    #[arg(long = "N")]
    intervals: Option<usize>,
    /// Maximum parareal iterations.
    #[arg(long)]
    iters: Option<usize>,
    /// Residual tolerance.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Coarse propagator: be, lbe or adaptive.
    #[arg(long)]
    coarse: Option<String>,
    #[arg(long)]
    coarse_rtol: Option<f64>,
    #[arg(long)]
    coarse_atol: Option<f64>,
    /// Window as a fraction of the interval, or "off".
    #[arg(long)]
    homogenize: Option<String>,
    #[arg(long)]
    threads: Option<usize>,
    /// Output directory (default: spec, then $KPARAREAL_OUT_DIR, then ./kparareal-out).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Validate and print the resolved spec without running.
    #[arg(long)]
    dry_run: bool,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct ReferenceArgs {
    #[command(flatten)]
    common: Common,
    /// Also write every event of the fine path.
    #[arg(long)]
    path: bool,
}

#[derive(Args)]
struct ValidateArgs {
    /// Suite name, or "all".
    #[arg(default_value = "all")]
    suite: String,
    /// Smaller sample sizes.
    #[arg(long)]
    quick: bool,
    /// Print results as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ScalingArgs {
    #[command(flatten)]
    common: Common,
    /// Molecules per cell for the size sweep, comma separated.
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<u32>>,
    /// System sizes for the fluctuation study, comma separated.
    #[arg(long, value_delimiter = ',')]
    omegas: Option<Vec<f64>>,
    #[arg(long)]
    replicas: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => cmd_run(&a.common),
        Command::Reference(a) => cmd_reference(&a.common, a.path),
        Command::Validate(a) => cmd_validate(&a),
        Command::Scaling(a) => cmd_scaling(&a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn load_spec(c: &Common, default_model: Option<ModelName>) -> anyhow::Result<ModelSpec> {
    let mut spec = match (&c.spec, &c.model) {
        (Some(path), _) => ModelSpec::load(path).with_context(|| format!("reading {}", path.display()))?,
        (None, Some(name)) => ModelSpec::builtin(name.parse()?),
        (None, None) => match default_model {
            Some(name) => ModelSpec::builtin(name),
            None => bail!("give --spec or --model"),
        },
    };
    if let (Some(_), Some(name)) = (&c.spec, &c.model) {
        if spec.model.network.is_some() {
            bail!("--model cannot replace an inline network");
        }
        name.parse::<ModelName>()?;
        spec.model.builtin = Some(name.clone());
    }
    let run = &mut spec.run;
    run.t_final = c.t_final.or(run.t_final);
    run.intervals = c.intervals.or(run.intervals);
    run.max_iterations = c.iters.or(run.max_iterations);
    run.tolerance = c.tol.or(run.tolerance);
    run.seed = c.seed.or(run.seed);
    run.coarse = c.coarse.clone().or(run.coarse.take());
    run.coarse_rtol = c.coarse_rtol.or(run.coarse_rtol);
    run.coarse_atol = c.coarse_atol.or(run.coarse_atol);
    run.threads = c.threads.or(run.threads);
    if let Some(h) = &c.homogenize {
        run.homogenize = Some(HomogenizeSetting::parse(h)?);
    }
    Ok(spec)
}

fn output_dir(c: &Common, r: &ResolvedRun) -> PathBuf {
    c.out
        .clone()
        .or_else(|| r.outputs.directory.as_ref().map(PathBuf::from))
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
}

fn dry_run(r: &ResolvedRun) -> anyhow::Result<ExitCode> {
    print!("{}", r.echo.to_toml()?);
    Ok(ExitCode::SUCCESS)
}

fn cmd_run(c: &Common) -> anyhow::Result<ExitCode> {
    let r = load_spec(c, None)?.resolve()?;
    if c.dry_run {
        return dry_run(&r);
    }
    let dir = output_dir(c, &r);
    let RunArtifacts { outcome, .. } = run_to_dir(&r, &dir)?;
    let report = &outcome.report;
    let last_res = report.residuals.last().copied().unwrap_or(f64::NAN);
    println!(
        "{}: {} iterations, stop {:?}, last residual {last_res:.3e}, output {}",
        r.label,
        report.iterations_run,
        report.stop_reason,
        dir.display()
    );
    Ok(match report.stop_reason {
        StopReason::ToleranceMet | StopReason::PrefixExact => ExitCode::SUCCESS,
        StopReason::MaxIterations => ExitCode::from(2),
    })
}

fn cmd_reference(c: &Common, full_path: bool) -> anyhow::Result<ExitCode> {
    let r = load_spec(c, None)?.resolve()?;
    if c.dry_run {
        return dry_run(&r);
    }
    let dir = output_dir(c, &r);
    let (reference, _) = reference_to_dir(&r, &dir, full_path)?;
    println!("{}: {} fine events, output {}", r.label, reference.events, dir.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_validate(a: &ValidateArgs) -> anyhow::Result<ExitCode> {
    let outcomes = run_suite(&a.suite, a.quick)?;
    if a.json {
        println!("{}", serde_json::to_string_pretty(&outcomes)?);
    } else {
        for o in &outcomes {
            let mark = if o.passed { "PASS" } else { "FAIL" };
            println!("{mark}  {:<12} {:<24} {:>8.2}s  {}", o.suite, o.check, o.seconds, o.detail);
        }
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    if !a.json {
        println!("{} passed, {failed} failed", outcomes.len() - failed);
    }
    Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn cmd_scaling(a: &ScalingArgs) -> anyhow::Result<ExitCode> {
    let c = &a.common;
    let mut spec = load_spec(c, Some(ModelName::RdmeChain))?;
    let mut section = spec.scaling.clone().unwrap_or_default();
    section.sizes = a.sizes.clone().or(section.sizes).or(Some(vec![25, 100, 400]));
    section.omegas = a.omegas.clone().or(section.omegas).or(Some(vec![1e2, 1e3, 1e4]));
    section.replicas = a.replicas.unwrap_or(section.replicas);
    spec.scaling = Some(section.clone());
    let base = spec.resolve()?;
    if base.builtin != Some(ModelName::RdmeChain) {
        bail!("the size sweep needs the rdme_chain model, got {}", base.label);
    }
    if c.dry_run {
        return dry_run(&base);
    }
    let mut manifest = RunManifest::new("scaling", &base.label, base.config.seed, base.echo.clone());

    let start = Instant::now();
    let rows = size_sweep(&spec, &section, &base)?;
    manifest.timings.insert("size_sweep".into(), start.elapsed().as_secs_f64());

    let start = Instant::now();
    let omegas = section.omegas.clone().unwrap_or_default();
    let study = if omegas.len() < 3 {
        println!("fluctuation study skipped: needs at least 3 sizes, got {}", omegas.len());
        None
    } else {
        Some(omega_scaling_study(fixtures::conversion, section.time, &omegas, section.replicas, base.config.seed)?)
    };
    manifest.timings.insert("omega_study".into(), start.elapsed().as_secs_f64());

    let dir = output_dir(c, &base);
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    write_scaling_csv(&dir.join("scaling.csv"), &rows)?;
    manifest.outputs.push("scaling.csv".into());
    if let Some(study) = &study {
        let mut w = std::fs::File::create(dir.join("omega_scaling.csv"))?;
        write_omega_csv(&mut w, study)?;
        manifest.outputs.push("omega_scaling.csv".into());
        match study.slope {
            Some(s) => {
                manifest.metrics.insert("omega_slope".into(), s);
                manifest
                    .metrics
                    .insert("omega_slope_standard_error".into(), study.slope_standard_error.unwrap_or(f64::NAN));
                println!("fluctuation slope {s:.4}");
            }
            None => println!("fluctuation study not applicable: no noise"),
        }
    }
    for row in rows.iter().filter(|r| r.iteration == 3) {
        println!("size {} residual at iteration 3: {:.4e}", row.size, row.residual);
    }
    manifest.outputs.push(MANIFEST_FILE.into());
    manifest.write_atomic(&dir.join(MANIFEST_FILE))?;
    Ok(ExitCode::SUCCESS)
}

/// Runs every size to the configured iteration count and collects residuals.
fn size_sweep(spec: &ModelSpec, section: &ScalingSection, base: &ResolvedRun) -> anyhow::Result<Vec<ScalingRow>> {
    let mut rows = Vec::new();
    for &size in section.sizes.as_deref().unwrap_or_default() {
        let mut s = spec.clone();
        let mut params = s.model.params.unwrap_or_default();
        params.n_omega = Some(size);
        s.model.params = Some(params);
        // the default initial state depends on the size
        s.model.initial_state = None;
        let mut r = s.resolve()?;
        // collect the full history rather than stop at the tolerance
        r.config.residual_tolerance = f64::MIN_POSITIVE;
        let outcome = parareal_run(&r.network, &r.initial_state, &r.config, executor_for(base), None)?;
        for (k, &residual) in outcome.report.residuals.iter().enumerate() {
            rows.push(ScalingRow { size: size as f64, iteration: k + 1, residual });
        }
    }
    Ok(rows)
}

fn write_omega_csv<W: std::io::Write>(w: &mut W, study: &ScalingStudy) -> anyhow::Result<()> {
    writeln!(w, "omega,rms")?;
    for p in &study.points {
        writeln!(w, "{},{}", format_real(p.omega), format_real(p.rms))?;
    }
    Ok(())
}
