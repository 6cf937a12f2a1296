//! The resolvent `L_f x`: descent for optimization-type bifunctions, a
//! multi-resolution merit search for general ones, and a brute-force oracle.

use serde::{Deserialize, Serialize};

use crate::bifunction::{Bifunction, Combine, Objective, TermKind};
use crate::error::{Error, Result};
use crate::geometry::{cosh_dist, dist, exp_map, HPoint, TangentVec};
use crate::model::max_model_step;
use crate::region::{ConvexRegion, PointGrid};

const RHO_SERIES_BELOW: f64 = 1e-4;
/// Finest spacing the general solver refines to below `grid_spacing`.
const POLISH_SPACING: f64 = 5e-8;
const MAX_RECENTRES: usize = 64;

fn default_tol() -> f64 {
    1e-8
}
fn default_max_iters() -> usize {
    10_000
}
fn default_grid_spacing() -> f64 {
    0.05
}
fn default_bounding_radius() -> f64 {
    6.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverOptions {
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default = "default_grid_spacing")]
    pub grid_spacing: f64,
    #[serde(default = "default_bounding_radius")]
    pub bounding_radius: f64,
    #[serde(default)]
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: default_tol(),
            max_iters: default_max_iters(),
            grid_spacing: default_grid_spacing(),
            bounding_radius: default_bounding_radius(),
            seed: 0,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("tol", self.tol),
            ("grid_spacing", self.grid_spacing),
            ("bounding_radius", self.bounding_radius),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::input(format!("solver.{name} must be positive, got {v}")));
            }
        }
        if self.max_iters == 0 {
            return Err(Error::input("solver.max_iters must be positive"));
        }
        Ok(())
    }

    /// Angular phase of the lattice, derived from the seed.
    pub fn grid_phase(&self) -> f64 {
        // Golden-ratio sequence keeps phases for nearby seeds well apart.
        (self.seed as f64 * 0.618_033_988_749_894_9).fract()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolverKind {
    #[serde(rename = "descent")]
    Descent,
    #[serde(rename = "merit-grid")]
    MeritGrid,
    #[serde(rename = "oracle")]
    Oracle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolventOutcome {
    pub z: HPoint,
    /// Certified over the verification grid.
    pub merit: f64,
    pub iterations: usize,
    pub solver: SolverKind,
}

/// `max_{y in Y} -(f(z, y) + cosh d(x, y) - cosh d(x, z))`.
pub fn merit(f: &Bifunction, x: &HPoint, z: &HPoint, grid: &PointGrid) -> Result<f64> {
    if grid.is_empty() {
        return Err(Error::input("merit needs a nonempty grid"));
    }
    let cz = cosh_dist(x, z);
    Ok(grid
        .points
        .iter()
        .map(|y| -(f.eval(z, y) + cosh_dist(x, y) - cz))
        .fold(f64::NEG_INFINITY, f64::max)
        + 0.0) // no negative zero in reports
}

/// `t / sinh t`, switching to its Taylor series near zero.
pub fn rho(t: f64) -> f64 {
    if t.abs() < RHO_SERIES_BELOW {
        let t2 = t * t;
        1.0 - t2 / 6.0 + 7.0 * t2 * t2 / 360.0
    } else {
        t / t.sinh()
    }
}

/// `f(z, w) + rho(d(z, w)) (cosh d(x, w) - cosh d(x, z) cosh d(z, w))`;
/// nonnegative for every `w` in `K` when `z = L_f x`.
pub fn characterization_residual(f: &Bifunction, x: &HPoint, z: &HPoint, w: &HPoint) -> f64 {
    let d = dist(z, w);
    f.eval(z, w) + rho(d) * (cosh_dist(x, w) - cosh_dist(x, z) * d.cosh())
}

/// Exhaustive maximin over the grid:
/// `argmax_{z} min_{y} f(z, y) + cosh d(x, y) - cosh d(x, z)`, lowest index on ties.
///
/// Pruning is exact: a candidate is abandoned as soon as its running minimum
/// can no longer beat the incumbent, and the `y` that last eliminated a
/// candidate is tried first.
pub fn oracle_resolve(f: &Bifunction, _k: &ConvexRegion, x: &HPoint, grid: &PointGrid) -> HPoint {
    let pts = &grid.points;
    let cy: Vec<f64> = pts.iter().map(|y| cosh_dist(x, y)).collect();
    let mut best = (0usize, f64::NEG_INFINITY);
    let mut killers: Vec<usize> = Vec::new();
    for (i, z) in pts.iter().enumerate() {
        let cz = cy[i];
        let value = |j: usize| f.eval(z, &pts[j]) + cy[j] - cz;
        let mut run = f64::INFINITY;
        let mut killed_by = None;
        for &j in killers.iter().rev() {
            run = run.min(value(j));
            if run <= best.1 {
                killed_by = Some(j);
                break;
            }
        }
        if killed_by.is_none() {
            for j in 0..pts.len() {
                run = run.min(value(j));
                if run <= best.1 {
                    killed_by = Some(j);
                    break;
                }
            }
        }
        match killed_by {
            Some(j) => {
                if let Some(pos) = killers.iter().position(|&k| k == j) {
                    killers.remove(pos);
                }
                killers.push(j);
                if killers.len() > 16 {
                    killers.remove(0);
                }
            }
            None => best = (i, run),
        }
    }
    pts[best.0].clone()
}

/// The grid used to certify outcomes on `K`: its own extent when bounded,
/// otherwise a ball of `opts.bounding_radius` around its witness.
pub fn certification_grid(k: &ConvexRegion, opts: &SolverOptions) -> Result<PointGrid> {
    region_grid(k, opts, opts.grid_spacing, opts.grid_phase())
}

fn region_grid(k: &ConvexRegion, opts: &SolverOptions, spacing: f64, phase: f64) -> Result<PointGrid> {
    let radius = k.enclosing_radius().unwrap_or(opts.bounding_radius);
    k.build_grid_with_phase(spacing, radius, phase)
}

/// Merit of `z` over the grid together with the slack `C * spacing`, where `C`
/// is the largest observed difference quotient of `y -> h(z, y)` between
/// consecutive grid points at most two spacings apart.
pub fn certify(f: &Bifunction, x: &HPoint, z: &HPoint, grid: &PointGrid) -> Result<(f64, f64)> {
    if grid.is_empty() {
        return Err(Error::input("certification needs a nonempty grid"));
    }
    let cz = cosh_dist(x, z);
    let vals: Vec<f64> = grid
        .points
        .iter()
        .map(|y| f.eval(z, y) + cosh_dist(x, y) - cz)
        .collect();
    let m = vals.iter().map(|v| -v).fold(f64::NEG_INFINITY, f64::max);
    let mut lip = 0.0f64;
    for (w, v) in grid.points.windows(2).zip(vals.windows(2)) {
        let d = dist(&w[0], &w[1]);
        if d > 1e-12 && d <= 2.0 * grid.spacing {
            lip = lip.max((v[1] - v[0]).abs() / d);
        }
    }
    Ok((m, lip * grid.spacing))
}

/// Sufficient decrease as a fraction of `disp^2 / s`. Smooth pieces admit half
/// of it for short steps; subgradient steps near a distance kink only a sliver.
const ARMIJO_SIGMA_SMOOTH: f64 = 0.25;
const ARMIJO_SIGMA_KINKED: f64 = 1e-4;
const ARMIJO_SHRINK: f64 = 0.5;
const ARMIJO_MAX_HALVINGS: usize = 60;

fn penalized(g: &Objective, x: &HPoint, z: &HPoint) -> f64 {
    g.value(z) + cosh_dist(x, z)
}

fn cosh_gradient(x: &HPoint, z: &HPoint) -> TangentVec {
    let neg_x: Vec<f64> = x.coords().iter().map(|c| -c).collect();
    TangentVec::project(z, &neg_x)
}

/// Trial step of length scale `s` from `z`.
fn trial_step(g: &Objective, k: &ConvexRegion, x: &HPoint, z: &HPoint, s: f64) -> TangentVec {
    let base = cosh_gradient(x, z);
    let cons = k.linearized_constraints(z);
    if g.combine == Combine::Max && g.terms.len() > 1 {
        let cx = cosh_dist(x, z);
        let vals: Vec<f64> = g.terms.iter().map(|t| t.value(z) + cx).collect();
        let grads: Vec<TangentVec> = g.terms.iter().map(|t| t.gradient(z).plus(&base)).collect();
        max_model_step(&vals, &grads, &cons, s)
    } else if cons.is_empty() {
        g.subgradient(z).plus(&base).scaled(-s)
    } else {
        // Without the linearized constraints a step with a large outward
        // component loses its tangential part to the projection.
        max_model_step(&[0.0], &[g.subgradient(z).plus(&base)], &cons, s)
    }
}

/// Projected Riemannian (sub)gradient descent on `g(z) + cosh d(x, z)` over `K`.
/// Returns the minimizer and the iteration count.
fn descend(g: &Objective, k: &ConvexRegion, x: &HPoint, opts: &SolverOptions) -> Result<(HPoint, usize)> {
    let mut z = k.project(x)?;
    let mut fz = penalized(g, x, &z);
    // Distance terms have kinks at their anchors, where subgradient steps stall.
    for t in g.terms.iter().filter(|t| t.kind == TermKind::Dist) {
        let c = k.project(&t.anchor)?;
        let fc = penalized(g, x, &c);
        if fc < fz {
            z = c;
            fz = fc;
        }
    }
    let sigma = if g.terms.iter().any(|t| t.kind == TermKind::Dist) {
        ARMIJO_SIGMA_KINKED
    } else {
        ARMIJO_SIGMA_SMOOTH
    };
    for it in 1..=opts.max_iters {
        let mut moved = None;
        let mut s = 1.0;
        for _ in 0..ARMIJO_MAX_HALVINGS {
            let step = trial_step(g, k, x, &z, s);
            if step.norm() < opts.tol * s {
                return Ok((z, it));
            }
            let c = k.project(&exp_map(&step)?)?;
            let fc = penalized(g, x, &c);
            let disp = dist(&z, &c);
            if fc.is_finite() && fc <= fz - sigma * disp * disp / s {
                moved = Some((c, fc, disp));
                break;
            }
            s *= ARMIJO_SHRINK;
        }
        match moved {
            Some((c, fc, disp)) => {
                z = c;
                fz = fc;
                if disp < opts.tol {
                    return Ok((z, it));
                }
            }
            // No direction decreases F: z is stationary to working precision.
            None => return Ok((z, it)),
        }
    }
    Err(Error::Convergence {
        message: "projected descent did not settle".into(),
        iterations: opts.max_iters,
        best: Some(z),
    })
}

fn certified(
    f: &Bifunction,
    x: &HPoint,
    z: HPoint,
    iterations: usize,
    solver: SolverKind,
    opts: &SolverOptions,
    grid: &PointGrid,
) -> Result<ResolventOutcome> {
    let (m, slack) = certify(f, x, &z, grid)?;
    let bound = opts.tol + slack;
    if !(m <= bound) {
        return Err(Error::NoCertificate { merit: m, bound, best: z });
    }
    Ok(ResolventOutcome { z, merit: m, iterations, solver })
}

/// `L_f x` for `f(x, y) = g(y) - g(x)`: the minimizer of `g + cosh d(x, .)` on `K`.
pub fn resolve_optimization(
    g: &Objective,
    k: &ConvexRegion,
    x: &HPoint,
    opts: &SolverOptions,
) -> Result<ResolventOutcome> {
    opts.validate()?;
    let grid = certification_grid(k, opts)?;
    resolve_optimization_on(g, k, x, opts, &grid)
}

/// As [`resolve_optimization`], certifying on a caller-supplied grid of `K`.
pub fn resolve_optimization_on(
    g: &Objective,
    k: &ConvexRegion,
    x: &HPoint,
    opts: &SolverOptions,
    grid: &PointGrid,
) -> Result<ResolventOutcome> {
    let (z, iters) = descend(g, k, x, opts)?;
    let f = crate::bifunction::make_optimization_bifunction(g.clone());
    certified(&f, x, z, iters, SolverKind::Descent, opts, grid)
}

/// Resolvent of `s (1 + c g(x)) (g(y) - g(x))`. Its value `z` minimizes
/// `lambda g + cosh d(x, .)` for `lambda = s (1 + c g(z))`, so the solve reduces
/// to a monotone scalar equation in `lambda`, settled by bisection.
fn resolve_gain_weighted_on(
    f: &Bifunction,
    g: &Objective,
    gain: f64,
    k: &ConvexRegion,
    x: &HPoint,
    opts: &SolverOptions,
    grid: &PointGrid,
) -> Result<ResolventOutcome> {
    let s = f.scale_factor();
    let mut total = 0usize;
    let mut solve = |lambda: f64| -> Result<HPoint> {
        let (z, it) = descend(&g.scaled(lambda), k, x, opts)?;
        total += it;
        Ok(z)
    };
    let mut lo = s;
    let z_lo = solve(lo)?;
    let mut hi = s * (1.0 + gain * g.value(&z_lo));
    let mut z = z_lo;
    for _ in 0..100 {
        if hi - lo <= 1e-14 * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let zm = solve(mid)?;
        if s * (1.0 + gain * g.value(&zm)) - mid > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        z = zm;
    }
    let z = if hi > lo { solve(0.5 * (lo + hi))? } else { z };
    certified(f, x, z, total, SolverKind::Descent, opts, grid)
}

/// `L_f x` by the most specific solver available for `f`.
pub fn resolve(f: &Bifunction, k: &ConvexRegion, x: &HPoint, opts: &SolverOptions) -> Result<ResolventOutcome> {
    opts.validate()?;
    let grid = certification_grid(k, opts)?;
    resolve_on(f, k, x, opts, &grid)
}

/// As [`resolve`], certifying on a caller-supplied grid of `K`.
pub fn resolve_on(
    f: &Bifunction,
    k: &ConvexRegion,
    x: &HPoint,
    opts: &SolverOptions,
    grid: &PointGrid,
) -> Result<ResolventOutcome> {
    if let Some(g) = f.as_objective_diff() {
        let (z, iters) = descend(&g, k, x, opts)?;
        return certified(f, x, z, iters, SolverKind::Descent, opts, grid);
    }
    if let Some((g, gain)) = f.as_gain_weighted() {
        return resolve_gain_weighted_on(f, &g, gain, k, x, opts, grid);
    }
    resolve_general_on(f, k, x, opts, grid)
}

/// Index of the candidate with the smallest merit over `ys`; lowest index on
/// ties. Pruning is exact.
fn best_candidate(f: &Bifunction, x: &HPoint, candidates: &[HPoint], ys: &[&HPoint]) -> (usize, f64) {
    let cy: Vec<f64> = ys.iter().map(|y| cosh_dist(x, y)).collect();
    let mut best = (0usize, f64::INFINITY);
    let mut killers: Vec<usize> = Vec::new();
    for (i, z) in candidates.iter().enumerate() {
        let cz = cosh_dist(x, z);
        let neg = |j: usize| -(f.eval(z, ys[j]) + cy[j] - cz);
        let mut run = f64::NEG_INFINITY;
        let mut killed_by = None;
        for &j in killers.iter().rev() {
            run = run.max(neg(j));
            if run >= best.1 {
                killed_by = Some(j);
                break;
            }
        }
        if killed_by.is_none() {
            for j in 0..ys.len() {
                run = run.max(neg(j));
                if run >= best.1 {
                    killed_by = Some(j);
                    break;
                }
            }
        }
        match killed_by {
            Some(j) => {
                if let Some(pos) = killers.iter().position(|&k| k == j) {
                    killers.remove(pos);
                }
                killers.push(j);
                if killers.len() > 16 {
                    killers.remove(0);
                }
            }
            None => best = (i, run),
        }
    }
    best
}

/// Multi-resolution merit search for a general monotone bifunction.
pub fn resolve_general(
    f: &Bifunction,
    k: &ConvexRegion,
    x: &HPoint,
    opts: &SolverOptions,
) -> Result<ResolventOutcome> {
    opts.validate()?;
    let grid = certification_grid(k, opts)?;
    resolve_general_on(f, k, x, opts, &grid)
}

/// As [`resolve_general`], certifying on a caller-supplied grid of `K`.
///
/// Grids halve from a coarse spacing down to `opts.grid_spacing`, each level
/// searching a ball of three spacings around the previous winner against the
/// full-region grid of that level plus the local points. Below
/// `opts.grid_spacing` the local refinement continues against the certification
/// grid, which sharpens `z` without changing what is certified.
pub fn resolve_general_on(
    f: &Bifunction,
    k: &ConvexRegion,
    x: &HPoint,
    opts: &SolverOptions,
    grid: &PointGrid,
) -> Result<ResolventOutcome> {
    let radius = k.enclosing_radius().unwrap_or(opts.bounding_radius);
    let phase = opts.grid_phase();
    let mut s = opts.grid_spacing;
    while 2.0 * s <= radius / 2.0 {
        s *= 2.0;
    }
    let coarse = if s == opts.grid_spacing { grid.clone() } else { region_grid(k, opts, s, phase)? };
    let ys: Vec<&HPoint> = coarse.points.iter().collect();
    let (i, _) = best_candidate(f, x, &coarse.points, &ys);
    let mut z = coarse.points[i].clone();
    let mut levels = 1;
    while s > POLISH_SPACING {
        s *= 0.5;
        let level_grid = if s > opts.grid_spacing {
            Some(region_grid(k, opts, s, phase)?)
        } else {
            None
        };
        let full = level_grid.as_ref().unwrap_or(grid);
        // Recentre until the centre itself wins, so the winner cannot run off
        // the edge of the local ball.
        for _ in 0..MAX_RECENTRES {
            let mut candidates = vec![z.clone()];
            candidates.extend(PointGrid::around(k, &z, 3.0 * s, s, phase)?.points);
            let ys: Vec<&HPoint> = candidates.iter().chain(full.points.iter()).collect();
            let (i, _) = best_candidate(f, x, &candidates, &ys);
            levels += 1;
            if i == 0 {
                break;
            }
            z = candidates[i].clone();
        }
    }
    // A grid point that does at least as well as the polished point wins.
    if let Some((j, _)) = grid.nearest(&z) {
        let local = PointGrid::around(k, &z, 3.0 * s, s, phase)?;
        let candidates = [grid.points[j].clone(), z.clone()];
        let ys: Vec<&HPoint> = local.points.iter().chain(grid.points.iter()).collect();
        let (i, _) = best_candidate(f, x, &candidates, &ys);
        z = candidates[i].clone();
    }
    certified(f, x, z, levels, SolverKind::MeritGrid, opts, grid)
}
