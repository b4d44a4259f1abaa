//! End-to-end runs that write their artifacts into a directory.

use std::path::{Path, PathBuf};
use std::time::Instant;

use super::manifest::RunManifest;
use super::output::{write_convergence_csv, write_iterates_csv, write_trajectory_csv};
use super::spec::ResolvedRun;
use crate::error::Result;
use crate::parareal::{parareal_run, reference_solve, Executor, PararealOutcome, ReferenceSolution};

pub const MANIFEST_FILE: &str = "manifest.json";

pub fn executor_for(r: &ResolvedRun) -> Executor {
    match r.threads {
        Some(threads) => Executor::ParallelWith { threads },
        None => Executor::Parallel,
    }
}

fn grid_times(r: &ResolvedRun) -> Vec<f64> {
    (0..=r.config.intervals).map(|n| r.config.grid_time(n)).collect()
}

struct Artifacts {
    dir: PathBuf,
    written: Vec<String>,
}

impl Artifacts {
    fn create(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf(), written: Vec::new() })
    }

    fn path(&mut self, name: &str) -> PathBuf {
        self.written.push(name.to_string());
        self.dir.join(name)
    }

    fn finish(mut self, manifest: &mut RunManifest) -> Result<()> {
        self.written.push(MANIFEST_FILE.into());
        manifest.outputs = self.written;
        manifest.write_atomic(&self.dir.join(MANIFEST_FILE))
    }
}

fn write_reference(out: &mut Artifacts, r: &ResolvedRun, reference: &ReferenceSolution<f64>) -> Result<()> {
    let species = r.network.species();
    let times = grid_times(r);
    write_trajectory_csv(&out.path("reference.csv"), species, &times, &reference.states)?;
    if reference.exact_states != reference.states {
        write_trajectory_csv(&out.path("reference_exact.csv"), species, &times, &reference.exact_states)?;
    }
    Ok(())
}

pub struct RunArtifacts {
    pub reference: ReferenceSolution<f64>,
    pub outcome: PararealOutcome<f64>,
    pub manifest: RunManifest,
}

/// Serial reference, parareal against it, then CSVs and the manifest.
/// Nothing is written unless both solves succeed.
pub fn run_to_dir(r: &ResolvedRun, dir: &Path) -> Result<RunArtifacts> {
    let mut manifest = RunManifest::new("run", &r.label, r.config.seed, r.echo.clone());
    let start = Instant::now();
    let reference = reference_solve(&r.network, &r.initial_state, &r.config, false)?;
    manifest.timings.insert("reference".into(), start.elapsed().as_secs_f64());
    let start = Instant::now();
    let outcome = parareal_run(&r.network, &r.initial_state, &r.config, executor_for(r), Some(&reference.states))?;
    manifest.timings.insert("parareal".into(), start.elapsed().as_secs_f64());

    let report = &outcome.report;
    manifest.stop_reason = Some(format!("{:?}", report.stop_reason));
    manifest.iterations_run = Some(report.iterations_run);
    manifest.initial_error = report.error(0);

    let mut out = Artifacts::create(dir)?;
    let species = r.network.species();
    let times = grid_times(r);
    if r.outputs.convergence {
        write_convergence_csv(&out.path("convergence.csv"), report)?;
    }
    if r.outputs.trajectories {
        write_reference(&mut out, r, &reference)?;
        let last = outcome.grid.iterates.last().expect("row 0 always present");
        write_trajectory_csv(&out.path("final.csv"), species, &times, last)?;
    }
    if r.outputs.iterates {
        write_iterates_csv(&out.path("iterates.csv"), species, &times, &outcome.grid)?;
    }
    out.finish(&mut manifest)?;
    Ok(RunArtifacts { reference, outcome, manifest })
}

/// Serial fine solve only; `full_path` adds every event of the path.
pub fn reference_to_dir(r: &ResolvedRun, dir: &Path, full_path: bool) -> Result<(ReferenceSolution<f64>, RunManifest)> {
    let mut manifest = RunManifest::new("reference", &r.label, r.config.seed, r.echo.clone());
    let start = Instant::now();
    let reference = reference_solve(&r.network, &r.initial_state, &r.config, full_path)?;
    manifest.timings.insert("reference".into(), start.elapsed().as_secs_f64());
    manifest.metrics.insert("events".into(), reference.events as f64);

    let mut out = Artifacts::create(dir)?;
    write_reference(&mut out, r, &reference)?;
    if let Some(paths) = &reference.paths {
        let mut t = vec![0.0];
        let mut x = vec![r.initial_state.clone()];
        for path in paths {
            for (time, state) in path.breakpoints() {
                t.push(time);
                x.push(state.to_vec());
            }
        }
        t.push(r.config.t_final);
        x.push(reference.exact_states.last().cloned().unwrap_or_default());
        write_trajectory_csv(&out.path("reference_path.csv"), r.network.species(), &t, &x)?;
    }
    out.finish(&mut manifest)?;
    Ok((reference, manifest))
}
