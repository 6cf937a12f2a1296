//! Task execution and artifact files.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use hypequil::harness::{run_harness, PropertyVerdict};
use hypequil::ppa::{fmt_f64, run_ppa};
use hypequil::resolvent::{certification_grid, merit, oracle_resolve, resolve_on};
use hypequil::{HPoint, ResolventOutcome, TraceStatus};
use serde::Serialize;

use crate::config::{ExperimentConfig, Task};
use crate::error::{CliError, Result};
use crate::plot::PlotScene;

pub const CONFIG_FILE: &str = "config.json";
pub const RESOLVENT_FILE: &str = "resolvent.json";
pub const TRACE_FILE: &str = "trace.csv";
pub const VERDICTS_FILE: &str = "verdicts.jsonl";
pub const ORACLE_FILE: &str = "oracle.json";
pub const MERIT_TABLE_FILE: &str = "merit_table.csv";
pub const PLOT_FILE: &str = "plot.svg";
/// Written, with the error message, when a task fails after it started.
pub const ERROR_MARKER: &str = "ERROR";

/// The merit table costs one full grid scan per grid point.
pub const MAX_MERIT_TABLE_POINTS: usize = 20_000;

/// What a finished task reports back to the caller.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskReport {
    /// False iff some verdict failed.
    pub passed: bool,
    pub files: Vec<PathBuf>,
}

#[derive(Serialize)]
struct ResolveReport<'a> {
    x: &'a HPoint,
    #[serde(flatten)]
    outcome: &'a ResolventOutcome,
}

#[derive(Serialize)]
struct OracleReport<'a> {
    x: &'a HPoint,
    z: &'a HPoint,
    merit: f64,
    grid_points: usize,
    grid_spacing: f64,
}

struct Artifacts {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Artifacts {
    fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        // A stale marker from an earlier failed run would be misleading.
        let marker = dir.join(ERROR_MARKER);
        if marker.exists() {
            fs::remove_file(&marker).map_err(|e| CliError::io(&marker, e))?;
        }
        Ok(Artifacts { dir: dir.to_path_buf(), files: vec![] })
    }

    fn write(&mut self, name: &str, body: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<()> {
        let path = self.dir.join(name);
        let file = fs::File::create(&path).map_err(|e| CliError::io(&path, e))?;
        let mut w = BufWriter::new(file);
        body(&mut w)
            .and_then(|_| w.flush())
            .map_err(|e| CliError::io(&path, e))?;
        self.files.push(path);
        Ok(())
    }

    fn write_text(&mut self, name: &str, text: &str) -> Result<()> {
        self.write(name, |w| w.write_all(text.as_bytes()))
    }
}

/// Runs the configured task, writing into `cfg.output`. On failure after the
/// output directory exists, whatever was produced stays and [`ERROR_MARKER`]
/// is added.
pub fn run_task(cfg: &ExperimentConfig) -> Result<TaskReport> {
    let mut out = Artifacts::new(&cfg.output)?;
    match execute(cfg, &mut out) {
        Ok(passed) => Ok(TaskReport { passed, files: out.files }),
        Err(e) => {
            let marker = out.dir.join(ERROR_MARKER);
            // The original error matters more than a failure to record it.
            let _ = fs::write(&marker, format!("{e}\n"));
            Err(e)
        }
    }
}

fn execute(cfg: &ExperimentConfig, out: &mut Artifacts) -> Result<bool> {
    out.write_text(CONFIG_FILE, &cfg.echo())?;
    let plot = cfg.plot && cfg.dimension == 2;
    match cfg.task {
        Task::Verify => {
            let verdicts = run_harness(&cfg.harness)?;
            out.write(VERDICTS_FILE, |w| {
                for v in &verdicts {
                    writeln!(w, "{}", v.to_json_line())?;
                }
                Ok(())
            })?;
            Ok(verdicts.iter().all(|v: &PropertyVerdict| v.pass))
        }
        Task::Resolve => {
            let (k, f, x) = (cfg.build_region()?, cfg.build_bifunction()?, cfg.point());
            let grid = certification_grid(&k, &cfg.solver)?;
            let outcome = resolve_on(&f, &k, &x, &cfg.solver, &grid)?;
            let report = ResolveReport { x: &x, outcome: &outcome };
            out.write_text(RESOLVENT_FILE, &pretty(&report))?;
            if plot {
                let scene = PlotScene { region: &k, x: Some(&x), z: Some(&outcome.z), path: &[] };
                out.write_text(PLOT_FILE, &scene.to_svg())?;
            }
            Ok(true)
        }
        Task::Ppa => {
            let (k, f, x0) = (cfg.build_region()?, cfg.build_bifunction()?, cfg.point());
            let p = &cfg.ppa;
            let trace = run_ppa(&f, &k, &x0, &p.schedule, p.stop_tol, p.max_steps, &cfg.solver)?;
            out.write(TRACE_FILE, |w| trace.write_csv(w, p.timing))?;
            if plot {
                let scene = PlotScene { region: &k, x: Some(&x0), z: Some(trace.last()), path: &trace.iterates };
                out.write_text(PLOT_FILE, &scene.to_svg())?;
            }
            match &trace.status {
                TraceStatus::SolverFailed(msg) => Err(CliError::Core(hypequil::Error::Convergence {
                    message: format!("inner solve failed at step {}: {msg}", trace.len() + 1),
                    iterations: trace.len(),
                    best: Some(trace.last().clone()),
                })),
                _ => Ok(true),
            }
        }
        Task::GridOracle => {
            let (k, f, x) = (cfg.build_region()?, cfg.build_bifunction()?, cfg.point());
            let grid = certification_grid(&k, &cfg.solver)?;
            let z = oracle_resolve(&f, &k, &x, &grid);
            let report = OracleReport {
                x: &x,
                z: &z,
                merit: merit(&f, &x, &z, &grid)?,
                grid_points: grid.points.len(),
                grid_spacing: grid.spacing,
            };
            out.write_text(ORACLE_FILE, &pretty(&report))?;
            if plot {
                let scene = PlotScene { region: &k, x: Some(&x), z: Some(&z), path: &[] };
                out.write_text(PLOT_FILE, &scene.to_svg())?;
            }
            if grid.points.len() > MAX_MERIT_TABLE_POINTS {
                return Err(CliError::config(
                    "solver.grid_spacing",
                    format!(
                        "merit table needs at most {MAX_MERIT_TABLE_POINTS} grid points, got {}",
                        grid.points.len()
                    ),
                ));
            }
            let merits = grid
                .points
                .iter()
                .map(|u| merit(&f, &x, u, &grid))
                .collect::<hypequil::Result<Vec<f64>>>()?;
            out.write(MERIT_TABLE_FILE, |w| {
                let dim = x.coords().len();
                let coords: Vec<String> = (0..dim).map(|i| format!("coord_{i}")).collect();
                writeln!(w, "index,{},merit", coords.join(","))?;
                for (i, (u, m)) in grid.points.iter().zip(&merits).enumerate() {
                    let cs: Vec<String> = u.coords().iter().map(|c| fmt_f64(*c)).collect();
                    writeln!(w, "{i},{},{}", cs.join(","), fmt_f64(*m))?;
                }
                Ok(())
            })?;
            Ok(true)
        }
    }
}

fn pretty<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("reports serialize") + "\n"
}
