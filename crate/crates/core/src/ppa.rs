//! Proximal point iteration `x_{k+1} = L_{lambda_k f} x_k`.

use std::io::{self, Write};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::bifunction::Bifunction;
use crate::error::{Error, Result};
use crate::geometry::{dist, HPoint};
use crate::region::{ConvexRegion, PointGrid};
use crate::resolvent::{certification_grid, resolve_on, SolverOptions};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum LambdaSchedule {
    Constant { value: f64 },
    Geometric { initial: f64, ratio: f64 },
}

impl Default for LambdaSchedule {
    fn default() -> Self {
        LambdaSchedule::Constant { value: 1.0 }
    }
}

impl LambdaSchedule {
    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        let valid = match *self {
            LambdaSchedule::Constant { value } => ok(value),
            LambdaSchedule::Geometric { initial, ratio } => ok(initial) && ok(ratio),
        };
        if valid {
            Ok(())
        } else {
            Err(Error::input(format!("lambda schedule must be positive: {self:?}")))
        }
    }

    /// `lambda_k` for step `k` (zero-based).
    pub fn at(&self, k: usize) -> f64 {
        match *self {
            LambdaSchedule::Constant { value } => value,
            LambdaSchedule::Geometric { initial, ratio } => initial * ratio.powi(k as i32),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", content = "message", rename_all = "kebab-case")]
pub enum TraceStatus {
    Converged,
    MaxSteps,
    SolverFailed(String),
}

/// Every entry of the per-step lists refers to step `k >= 1`: the iterate
/// `x_k`, its equilibrium residual, `d(x_{k-1}, x_k)`, the `lambda` used and
/// the wall-clock cost of the step.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterTrace {
    pub x0: HPoint,
    pub iterates: Vec<HPoint>,
    pub residuals: Vec<f64>,
    pub step_distances: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub micros: Vec<u64>,
    pub status: TraceStatus,
}

impl IterTrace {
    pub fn len(&self) -> usize {
        self.iterates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.iterates.is_empty()
    }

    pub fn last(&self) -> &HPoint {
        self.iterates.last().unwrap_or(&self.x0)
    }

    /// CSV with columns `step, coord_0..coord_n, step_distance, residual,
    /// lambda, micros`. With `timing = false` the micros column is written as 0
    /// so that repeated runs produce identical files.
    pub fn write_csv<W: Write>(&self, mut w: W, timing: bool) -> io::Result<()> {
        let dim = self.x0.coords().len();
        let mut header = vec!["step".to_string()];
        header.extend((0..dim).map(|i| format!("coord_{i}")));
        header.extend(["step_distance", "residual", "lambda", "micros"].map(String::from));
        writeln!(w, "{}", header.join(","))?;
        for k in 0..self.len() {
            let mut row = vec![(k + 1).to_string()];
            row.extend(self.iterates[k].coords().iter().map(|c| fmt_f64(*c)));
            row.push(fmt_f64(self.step_distances[k]));
            row.push(fmt_f64(self.residuals[k]));
            row.push(fmt_f64(self.lambdas[k]));
            row.push(if timing { self.micros[k].to_string() } else { "0".into() });
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// 17 significant digits: exact round trip at double precision.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// `min_{y in Y} f(z, y)`; `z` is a grid-certified equilibrium iff this is `>= -tol`.
pub fn equilibrium_residual(f: &Bifunction, _k: &ConvexRegion, z: &HPoint, grid: &PointGrid) -> Result<f64> {
    if grid.is_empty() {
        return Err(Error::input("equilibrium residual needs a nonempty grid"));
    }
    Ok(grid
        .points
        .iter()
        .map(|y| f.eval(z, y))
        .fold(f64::INFINITY, f64::min))
}

/// Runs the proximal point algorithm until `d(x_k, x_{k+1}) < stop_tol` or
/// `max_steps` steps. A failing inner solve ends the trace with
/// [`TraceStatus::SolverFailed`] rather than an error.
pub fn run_ppa(
    f: &Bifunction,
    k: &ConvexRegion,
    x0: &HPoint,
    schedule: &LambdaSchedule,
    stop_tol: f64,
    max_steps: usize,
    opts: &SolverOptions,
) -> Result<IterTrace> {
    schedule.validate()?;
    opts.validate()?;
    if !(stop_tol.is_finite() && stop_tol > 0.0) {
        return Err(Error::input(format!("stop tolerance must be positive, got {stop_tol}")));
    }
    if x0.dim() != k.dim() {
        return Err(Error::input("starting point and region differ in dimension"));
    }
    let grid = certification_grid(k, opts)?;
    let mut trace = IterTrace {
        x0: x0.clone(),
        iterates: vec![],
        residuals: vec![],
        step_distances: vec![],
        lambdas: vec![],
        micros: vec![],
        status: TraceStatus::MaxSteps,
    };
    let mut x = x0.clone();
    for step in 0..max_steps {
        let lambda = schedule.at(step);
        let start = Instant::now();
        let scaled = f.scaled(lambda)?;
        let next = match resolve_on(&scaled, k, &x, opts, &grid) {
            Ok(out) => out.z,
            Err(e) => {
                trace.status = TraceStatus::SolverFailed(e.to_string());
                return Ok(trace);
            }
        };
        let elapsed = start.elapsed().as_micros() as u64;
        let moved = dist(&x, &next);
        trace.residuals.push(equilibrium_residual(f, k, &next, &grid)?);
        trace.step_distances.push(moved);
        trace.lambdas.push(lambda);
        trace.micros.push(elapsed);
        trace.iterates.push(next.clone());
        x = next;
        if moved < stop_tol {
            trace.status = TraceStatus::Converged;
            break;
        }
    }
    Ok(trace)
}
