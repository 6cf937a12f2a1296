//! Seeded property suites with machine-readable verdicts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::bifunction::{make_optimization_bifunction, Bifunction, Objective, Term};
use crate::error::{Error, Result};
use crate::geometry::{cosh_dist, dist, interpolate, HPoint};
use crate::ppa::{equilibrium_residual, run_ppa, LambdaSchedule};
use crate::region::{convex_hull_samples, ConvexRegion, PointGrid};
use crate::resolvent::{
    certification_grid, oracle_resolve, resolve_general_on, resolve_on, SolverOptions,
};

pub const STEWART_TOL: f64 = 1e-9;
pub const CONVEXITY_TOL: f64 = 1e-10;
pub const SOLVER_TOL: f64 = 1e-6;
pub const CHARACTERIZATION_TOL: f64 = 1e-5;
pub const HULL_TOL: f64 = 1e-9;
/// Share of inconclusive trials above which a verdict fails.
pub const MAX_INCONCLUSIVE: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyVerdict {
    pub name: String,
    pub trials: usize,
    /// Most negative margin observed; nonnegative means satisfied.
    pub worst_slack: f64,
    pub tolerance: f64,
    pub inconclusive: usize,
    pub pass: bool,
    /// Inputs reproducing `worst_slack`.
    pub witness: Value,
}

impl PropertyVerdict {
    /// Builds a verdict from per-trial slacks (`None` = inconclusive); the
    /// witness is only materialized for the worst trial.
    pub fn from_slacks(
        name: impl Into<String>,
        tolerance: f64,
        slacks: &[Option<f64>],
        witness: impl Fn(usize) -> Value,
    ) -> Self {
        let trials = slacks.len();
        let inconclusive = slacks.iter().filter(|s| s.is_none()).count();
        // Sequential reduction: the lowest trial index wins ties.
        let mut worst: Option<(usize, f64)> = None;
        for (i, s) in slacks.iter().enumerate() {
            if let Some(v) = *s {
                if worst.map_or(true, |(_, w)| v < w) {
                    worst = Some((i, v));
                }
            }
        }
        let worst_slack = worst.map_or(f64::NEG_INFINITY, |(_, w)| w);
        let pass = worst_slack >= -tolerance
            && (inconclusive as f64) <= MAX_INCONCLUSIVE * trials as f64;
        PropertyVerdict {
            name: name.into(),
            trials,
            worst_slack,
            tolerance,
            inconclusive,
            pass,
            witness: worst.map_or(Value::Null, |(i, _)| witness(i)),
        }
    }

    /// Combines verdicts of the same property over several instances.
    pub fn merge(name: impl Into<String>, parts: Vec<PropertyVerdict>) -> Self {
        let tolerance = parts.first().map_or(0.0, |p| p.tolerance);
        let trials = parts.iter().map(|p| p.trials).sum();
        let inconclusive = parts.iter().map(|p| p.inconclusive).sum();
        let mut worst: Option<&PropertyVerdict> = None;
        for p in &parts {
            if worst.map_or(true, |w| p.worst_slack < w.worst_slack) {
                worst = Some(p);
            }
        }
        let worst_slack = worst.map_or(f64::NEG_INFINITY, |w| w.worst_slack);
        let pass = parts.iter().all(|p| p.worst_slack >= -p.tolerance)
            && (inconclusive as f64) <= MAX_INCONCLUSIVE * trials as f64;
        PropertyVerdict {
            name: name.into(),
            trials,
            worst_slack,
            tolerance,
            inconclusive,
            pass,
            witness: worst.map_or(Value::Null, |w| w.witness.clone()),
        }
    }

    /// One JSON object per line.
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("verdicts serialize")
    }
}

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

fn point_json(p: &HPoint) -> Value {
    json!(p.coords())
}

fn point_from(v: &Value) -> Result<HPoint> {
    let coords: Vec<f64> = serde_json::from_value(v.clone())
        .map_err(|e| Error::input(format!("witness point: {e}")))?;
    HPoint::new(coords)
}

fn number_from(v: &Value) -> Result<f64> {
    v.as_f64().ok_or_else(|| Error::input("witness number missing"))
}

/// Draws `count` triples and parameters `t` in `[0, 1]` from the radius-3 ball.
fn triples(seed: u64, count: usize) -> Result<Vec<(HPoint, HPoint, HPoint, f64)>> {
    let ball = ConvexRegion::ball(HPoint::origin(2), 3.0)?;
    let pts = ball.sample(seed, 3 * count, 3.0)?;
    let mut r = rng(seed, 1);
    Ok(pts
        .chunks(3)
        .map(|c| (c[0].clone(), c[1].clone(), c[2].clone(), r.gen::<f64>()))
        .collect())
}

/// `-|L - R| / R` for `L = cosh d(p, z) sinh D` and
/// `R = cosh d(x, z) sinh(tD) + cosh d(y, z) sinh((1 - t) D)`, `p = t x + (1 - t) y`.
pub fn stewart_slack(x: &HPoint, y: &HPoint, z: &HPoint, t: f64) -> f64 {
    let d = dist(x, y);
    let p = interpolate(x, y, t);
    let lhs = cosh_dist(&p, z) * d.sinh();
    let rhs = cosh_dist(x, z) * (t * d).sinh() + cosh_dist(y, z) * ((1.0 - t) * d).sinh();
    if rhs <= f64::MIN_POSITIVE {
        return 0.0;
    }
    -(lhs - rhs).abs() / rhs
}

/// `t cosh d(x, z) + (1 - t) cosh d(y, z) - cosh d(t x + (1 - t) y, z)`.
pub fn convexity_slack(x: &HPoint, y: &HPoint, z: &HPoint, t: f64) -> f64 {
    let p = interpolate(x, y, t);
    t * cosh_dist(x, z) + (1.0 - t) * cosh_dist(y, z) - cosh_dist(&p, z)
}

fn triple_witness(x: &HPoint, y: &HPoint, z: &HPoint, t: f64) -> Value {
    json!({"x": point_json(x), "y": point_json(y), "z": point_json(z), "t": t})
}

fn triple_check(
    name: &str,
    tol: f64,
    seed: u64,
    trials: usize,
    slack: fn(&HPoint, &HPoint, &HPoint, f64) -> f64,
) -> Result<PropertyVerdict> {
    if trials == 0 {
        return Err(Error::input("trials must be positive"));
    }
    let cases = triples(seed, trials)?;
    let slacks: Vec<Option<f64>> = cases.par_iter().map(|(x, y, z, t)| Some(slack(x, y, z, *t))).collect();
    Ok(PropertyVerdict::from_slacks(name, tol, &slacks, |i| {
        let (x, y, z, t) = &cases[i];
        triple_witness(x, y, z, *t)
    }))
}

/// The model-space equality behind the comparison inequality for geodesic triangles.
pub fn check_stewart(seed: u64, trials: usize) -> Result<PropertyVerdict> {
    triple_check("stewart", STEWART_TOL, seed, trials, stewart_slack)
}

/// Convexity of `cosh d(., z)` along geodesics.
pub fn check_cosh_convexity(seed: u64, trials: usize) -> Result<PropertyVerdict> {
    triple_check("cosh-convexity", CONVEXITY_TOL, seed, trials, convexity_slack)
}

fn replay_triple(w: &Value, slack: fn(&HPoint, &HPoint, &HPoint, f64) -> f64) -> Result<f64> {
    Ok(slack(
        &point_from(&w["x"])?,
        &point_from(&w["y"])?,
        &point_from(&w["z"])?,
        number_from(&w["t"])?,
    ))
}

pub fn replay_stewart(witness: &Value) -> Result<f64> {
    replay_triple(witness, stewart_slack)
}

pub fn replay_cosh_convexity(witness: &Value) -> Result<f64> {
    replay_triple(witness, convexity_slack)
}

/// Samples `count` starting points in a ball one unit wider than `K`.
fn starting_points(k: &ConvexRegion, opts: &SolverOptions, seed: u64, count: usize) -> Result<Vec<HPoint>> {
    let radius = k.enclosing_radius().unwrap_or(opts.bounding_radius) + 1.0;
    ConvexRegion::ball(k.witness(), radius)?.sample(seed, count, radius)
}

/// `cosh d(x1, z2) + cosh d(x2, z1) - (cosh d(x1, z1) + cosh d(x2, z2)) cosh d(z1, z2)`.
pub fn nonspreading_slack(x1: &HPoint, z1: &HPoint, x2: &HPoint, z2: &HPoint) -> f64 {
    cosh_dist(x1, z2) + cosh_dist(x2, z1) - (cosh_dist(x1, z1) + cosh_dist(x2, z2)) * cosh_dist(z1, z2)
}

fn nonspreading_trial(
    f: &Bifunction,
    k: &ConvexRegion,
    opts: &SolverOptions,
    grid: &PointGrid,
    x1: &HPoint,
    x2: &HPoint,
) -> Option<f64> {
    let z1 = resolve_on(f, k, x1, opts, grid).ok()?.z;
    let z2 = resolve_on(f, k, x2, opts, grid).ok()?.z;
    Some(nonspreading_slack(x1, &z1, x2, &z2))
}

/// Firm hyperbolic nonspreading of the resolvent, solver in the loop.
pub fn check_firmly_nonspreading(
    f: &Bifunction,
    k: &ConvexRegion,
    seed: u64,
    trials: usize,
    opts: &SolverOptions,
) -> Result<PropertyVerdict> {
    if trials == 0 {
        return Err(Error::input("trials must be positive"));
    }
    let grid = certification_grid(k, opts)?;
    let xs = starting_points(k, opts, seed, 2 * trials)?;
    let slacks: Vec<Option<f64>> = xs
        .par_chunks(2)
        .map(|c| nonspreading_trial(f, k, opts, &grid, &c[0], &c[1]))
        .collect();
    Ok(PropertyVerdict::from_slacks("firmly-nonspreading", SOLVER_TOL, &slacks, |i| {
        json!({"x1": point_json(&xs[2 * i]), "x2": point_json(&xs[2 * i + 1])})
    }))
}

pub fn replay_firmly_nonspreading(
    f: &Bifunction,
    k: &ConvexRegion,
    opts: &SolverOptions,
    witness: &Value,
) -> Result<f64> {
    let grid = certification_grid(k, opts)?;
    let (x1, x2) = (point_from(&witness["x1"])?, point_from(&witness["x2"])?);
    nonspreading_trial(f, k, opts, &grid, &x1, &x2)
        .ok_or_else(|| Error::input("witness solve failed"))
}

fn characterization_slack(f: &Bifunction, x: &HPoint, z: &HPoint, y: &HPoint, family: &str) -> f64 {
    let base = cosh_dist(x, y) - cosh_dist(x, z);
    let form1 = base - f.eval(y, z);
    let form2 = f.eval(z, y) + base;
    match family {
        "form-1" => form1,
        "form-2" => form2,
        _ => form1 - form2,
    }
}

const CHARACTERIZATION_FAMILIES: [&str; 3] = ["form-1", "form-2", "gap"];

/// Both inequality forms of the resolvent characterization at a given `z`,
/// plus the pointwise gap `form-1 - form-2 = -(f(y, z) + f(z, y))`.
pub fn characterization_at(f: &Bifunction, x: &HPoint, z: &HPoint, grid: &PointGrid) -> PropertyVerdict {
    let n = CHARACTERIZATION_FAMILIES.len();
    let slacks: Vec<Option<f64>> = grid
        .points
        .iter()
        .flat_map(|y| CHARACTERIZATION_FAMILIES.iter().map(move |fam| Some(characterization_slack(f, x, z, y, fam))))
        .collect();
    PropertyVerdict::from_slacks("characterization", CHARACTERIZATION_TOL, &slacks, |i| {
        let y = &grid.points[i / n];
        json!({"x": point_json(x), "z": point_json(z), "y": point_json(y), "family": CHARACTERIZATION_FAMILIES[i % n]})
    })
}

/// Solves `z = L_f x` and checks both inequality forms over the grid.
pub fn check_lemma32(
    f: &Bifunction,
    k: &ConvexRegion,
    x: &HPoint,
    grid: &PointGrid,
    opts: &SolverOptions,
) -> PropertyVerdict {
    match resolve_on(f, k, x, opts, grid) {
        Ok(out) => characterization_at(f, x, &out.z, grid),
        Err(e) => PropertyVerdict {
            name: "characterization".into(),
            trials: 1,
            worst_slack: f64::NEG_INFINITY,
            tolerance: CHARACTERIZATION_TOL,
            inconclusive: 1,
            pass: false,
            witness: json!({"x": point_json(x), "error": e.to_string()}),
        },
    }
}

pub fn replay_characterization(f: &Bifunction, witness: &Value) -> Result<f64> {
    let family = witness["family"].as_str().ok_or_else(|| Error::input("witness family missing"))?;
    Ok(characterization_slack(
        f,
        &point_from(&witness["x"])?,
        &point_from(&witness["z"])?,
        &point_from(&witness["y"])?,
        family,
    ))
}

/// Spacing of the grid on which the KKM intersection is searched.
pub const KKM_SPACING: f64 = 0.05;
const KKM_HULL_DEPTH: usize = 3;
const KKM_HULL_PER_LEVEL: usize = 32;

/// `h(y, u) = f(y, u) + cosh d(x, u) - cosh d(x, y)`; `u in M(y)` iff `h <= 0`.
fn kkm_h(f: &Bifunction, x: &HPoint, y: &HPoint, u: &HPoint) -> f64 {
    f.eval(y, u) + cosh_dist(x, u) - cosh_dist(x, y)
}

fn kkm_slack(f: &Bifunction, x: &HPoint, family: &[HPoint], point: &HPoint, part: &str, grid_slack: f64) -> f64 {
    let hs = family.iter().map(|y| kkm_h(f, x, y, point));
    match part {
        // Coverage: the point lies in at least one M(y_i).
        "hull" => -hs.fold(f64::INFINITY, f64::min),
        // Intersection: the point lies in every M(y_i), up to the grid slack,
        // rescaled so that both parts share the tolerance HULL_TOL.
        _ => -hs.fold(f64::NEG_INFINITY, f64::max) + grid_slack - HULL_TOL,
    }
}

/// Finite intersection property of the sets `M(y_i)` for a random family in `C`:
/// every sampled point of the hull of the family is covered, and some grid
/// point of `C` lies in all of them within `10 C_grid * spacing`.
pub fn check_kkm(
    f: &Bifunction,
    x: &HPoint,
    c: &ConvexRegion,
    family_size: usize,
    seed: u64,
) -> Result<PropertyVerdict> {
    if family_size == 0 {
        return Err(Error::input("family size must be positive"));
    }
    let radius = c
        .enclosing_radius()
        .ok_or_else(|| Error::input("KKM check needs a bounded region"))?;
    let family = c.sample(seed, family_size, radius)?;
    let grid = c.build_grid(KKM_SPACING, radius)?;
    let hull = convex_hull_samples(&family, KKM_HULL_DEPTH, KKM_HULL_PER_LEVEL, seed)?;

    let fam_json: Vec<Value> = family.iter().map(point_json).collect();
    let witness = |p: &HPoint, part: &str, grid_slack: f64| {
        json!({"x": point_json(x), "family": fam_json, "point": point_json(p), "part": part, "grid_slack": grid_slack})
    };

    let worst_h: Vec<f64> = grid
        .points
        .iter()
        .map(|u| family.iter().map(|y| kkm_h(f, x, y, u)).fold(f64::NEG_INFINITY, f64::max))
        .collect();
    let mut lip = 0.0f64;
    for (w, v) in grid.points.windows(2).zip(worst_h.windows(2)) {
        let d = dist(&w[0], &w[1]);
        if d > 1e-12 && d <= 2.0 * grid.spacing {
            lip = lip.max((v[1] - v[0]).abs() / d);
        }
    }
    let grid_slack = 10.0 * lip * grid.spacing;
    let best = worst_h
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |a, (i, v)| if *v < a.1 { (i, *v) } else { a });
    let u = &grid.points[best.0];

    let mut slacks: Vec<Option<f64>> = hull
        .iter()
        .map(|p| Some(kkm_slack(f, x, &family, p, "hull", 0.0)))
        .collect();
    slacks.push(Some(kkm_slack(f, x, &family, u, "intersection", grid_slack)));
    Ok(PropertyVerdict::from_slacks("kkm", HULL_TOL, &slacks, |i| match hull.get(i) {
        Some(p) => witness(p, "hull", 0.0),
        None => witness(u, "intersection", grid_slack),
    }))
}

pub fn replay_kkm(f: &Bifunction, witness: &Value) -> Result<f64> {
    let family = witness["family"]
        .as_array()
        .ok_or_else(|| Error::input("witness family missing"))?
        .iter()
        .map(point_from)
        .collect::<Result<Vec<_>>>()?;
    let part = witness["part"].as_str().ok_or_else(|| Error::input("witness part missing"))?;
    Ok(kkm_slack(
        f,
        &point_from(&witness["x"])?,
        &family,
        &point_from(&witness["point"])?,
        part,
        number_from(&witness["grid_slack"])?,
    ))
}

/// A test bifunction on the default region, with its minimizer when known.
#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub f: Bifunction,
    pub minimizer: Option<HPoint>,
    pub optimization_type: bool,
}

/// The radius-2 ball at the origin of H^2 on which the catalog lives.
pub fn default_region() -> ConvexRegion {
    ConvexRegion::ball(HPoint::origin(2), 2.0).expect("valid ball")
}

fn term_cosh(w: f64, r: f64, angle: f64) -> Term {
    Term::cosh(w, HPoint::from_polar(r, angle)).expect("valid term")
}

/// Zero, a cosh sum, a distance term, a max of two equally weighted cosh terms,
/// and the gain-weighted (non-antisymmetric) form of the cosh sum.
pub fn catalog() -> Vec<CatalogEntry> {
    let cosh_sum = Objective::sum(vec![term_cosh(0.7, 0.8, 0.3), term_cosh(0.5, 1.2, 2.5)]);
    let dist_term = Objective::sum(vec![
        Term::dist(1.0, HPoint::from_polar(0.6, -1.0)).expect("valid term"),
    ]);
    let cosh_max = Objective::max(vec![term_cosh(1.0, 0.8, 0.3), term_cosh(1.0, 1.2, 2.5)]);
    let entry = |name, g: Objective| CatalogEntry {
        name,
        minimizer: g.known_minimizer(),
        f: make_optimization_bifunction(g),
        optimization_type: true,
    };
    vec![
        CatalogEntry {
            name: "zero",
            f: Bifunction::zero(),
            minimizer: None,
            optimization_type: true,
        },
        entry("cosh-sum", cosh_sum.clone()),
        entry("distance", dist_term),
        entry("cosh-max", cosh_max),
        CatalogEntry {
            name: "gain-weighted",
            minimizer: cosh_sum.known_minimizer(),
            f: Bifunction::gain_weighted(cosh_sum, 0.5).expect("valid gain"),
            optimization_type: false,
        },
    ]
}

fn default_seed() -> u64 {
    0
}
fn default_geometry_trials() -> usize {
    10_000
}
fn default_instances() -> usize {
    20
}
fn default_pairs() -> usize {
    200
}
fn default_families() -> usize {
    50
}
fn default_ppa_steps() -> usize {
    200
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarnessConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_geometry_trials")]
    pub stewart_trials: usize,
    #[serde(default = "default_geometry_trials")]
    pub convexity_trials: usize,
    /// Random instances per catalog bifunction for solver comparisons.
    #[serde(default = "default_instances")]
    pub instances: usize,
    #[serde(default = "default_pairs")]
    pub nonspreading_pairs: usize,
    #[serde(default = "default_families")]
    pub kkm_families: usize,
    #[serde(default = "default_ppa_steps")]
    pub ppa_steps: usize,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        HarnessConfig {
            seed: default_seed(),
            stewart_trials: default_geometry_trials(),
            convexity_trials: default_geometry_trials(),
            instances: default_instances(),
            nonspreading_pairs: default_pairs(),
            kkm_families: default_families(),
            ppa_steps: default_ppa_steps(),
        }
    }
}

/// Worker count from `HYPEQUIL_THREADS`, if set.
pub fn thread_cap() -> Option<usize> {
    std::env::var("HYPEQUIL_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|n| *n > 0)
}

struct Instance {
    k: ConvexRegion,
    x: HPoint,
}

/// Radius-2 balls centred within 0.5 of the origin, with `x` drawn from the
/// concentric radius-3 ball.
fn solver_instances(seed: u64, stream: u64, count: usize) -> Result<Vec<Instance>> {
    let mut r = rng(seed, stream);
    (0..count)
        .map(|i| {
            let center = HPoint::from_polar(0.5 * r.gen::<f64>(), std::f64::consts::TAU * r.gen::<f64>());
            let k = ConvexRegion::ball(center.clone(), 2.0)?;
            let x = ConvexRegion::ball(center, 3.0)?.sample(seed ^ (stream << 16) ^ i as u64, 1, 3.0)?.remove(0);
            Ok(Instance { k, x })
        })
        .collect()
}

fn instance_json(inst: &Instance) -> Value {
    json!({"region": inst.k, "x": point_json(&inst.x)})
}

struct InstanceResult {
    agreement: Option<f64>,
    single_valued: Option<f64>,
    characterization: Vec<PropertyVerdict>,
}

fn solve_instance(f: &Bifunction, inst: &Instance, opts: &SolverOptions) -> Result<InstanceResult> {
    let s = opts.grid_spacing;
    let grid = certification_grid(&inst.k, opts)?;
    let general = resolve_general_on(f, &inst.k, &inst.x, opts, &grid).ok();
    let special = resolve_on(f, &inst.k, &inst.x, opts, &grid).ok();
    let oracle = oracle_resolve(f, &inst.k, &inst.x, &grid);
    let agreement = match (&general, &special) {
        (Some(g), Some(d)) => Some((2.0 * s - dist(&g.z, &oracle)).min(s - dist(&d.z, &oracle))),
        _ => None,
    };
    let shifted_opts = SolverOptions { seed: opts.seed.wrapping_add(1), ..opts.clone() };
    let shifted_grid = certification_grid(&inst.k, &shifted_opts)?;
    let shifted = resolve_general_on(f, &inst.k, &inst.x, &shifted_opts, &shifted_grid).ok();
    let single_valued = match (&general, &shifted) {
        (Some(a), Some(b)) => Some(s - dist(&a.z, &b.z)),
        _ => None,
    };
    let characterization = [general, special]
        .iter()
        .map(|o| match o {
            Some(o) => characterization_at(f, &inst.x, &o.z, &grid),
            None => PropertyVerdict::from_slacks("characterization", CHARACTERIZATION_TOL, &[None], |_| Value::Null),
        })
        .collect();
    Ok(InstanceResult { agreement, single_valued, characterization })
}

fn fixed_point_verdict(entry: &CatalogEntry, p: &HPoint, opts: &SolverOptions) -> Result<PropertyVerdict> {
    let k = default_region();
    let grid = certification_grid(&k, opts)?;
    let name = format!("fixed-point/{}", entry.name);
    let out = match resolve_on(&entry.f, &k, p, opts, &grid) {
        Ok(out) => out,
        Err(_) => return Ok(PropertyVerdict::from_slacks(name, 0.0, &[None], |_| Value::Null)),
    };
    let moved = dist(&out.z, p);
    let residual = equilibrium_residual(&entry.f, &k, &out.z, &grid)?;
    let slacks = [Some(1e-6 - moved), Some(residual + CHARACTERIZATION_TOL)];
    Ok(PropertyVerdict::from_slacks(name, 0.0, &slacks, |i| {
        const CHECKS: [&str; 2] = ["distance", "residual"];
        json!({"p": point_json(p), "z": point_json(&out.z), "check": CHECKS[i]})
    }))
}

fn ppa_verdict(entry: &CatalogEntry, p: &HPoint, x0: &HPoint, steps: usize, opts: &SolverOptions) -> Result<PropertyVerdict> {
    let k = default_region();
    let name = format!("ppa/{}", entry.name);
    let trace = run_ppa(&entry.f, &k, x0, &LambdaSchedule::default(), 1e-12, steps, opts)?;
    if trace.is_empty() || matches!(trace.status, crate::ppa::TraceStatus::SolverFailed(_)) {
        return Ok(PropertyVerdict::from_slacks(name, 0.0, &[None], |_| Value::Null));
    }
    // Fejer monotonicity at every step, then the final distance to p*.
    let mut prev = dist(x0, p);
    let mut slacks = Vec::with_capacity(trace.len() + 1);
    for x in &trace.iterates {
        let d = dist(x, p);
        slacks.push(Some(prev + 1e-6 - d));
        prev = d;
    }
    slacks.push(Some(1e-4 - prev));
    Ok(PropertyVerdict::from_slacks(name, 0.0, &slacks, |i| {
        json!({"x0": point_json(x0), "p": point_json(p), "step": i + 1})
    }))
}

/// Catalog clause checks on the default region as verdicts, one per clause.
fn condition_verdicts(entry: &CatalogEntry, seed: u64) -> Result<Vec<PropertyVerdict>> {
    let report = crate::bifunction::check_conditions(&entry.f, &default_region(), seed, 1000)?;
    Ok(report
        .checks
        .iter()
        .map(|c| {
            let slack = Some(-c.worst_violation);
            PropertyVerdict::from_slacks(
                format!("conditions/{}/{:?}", entry.name, c.clause).to_lowercase(),
                c.tolerance,
                &vec![slack],
                |_| json!(c.witness.iter().map(point_json).collect::<Vec<_>>()),
            )
            .with_trials(report.samples)
        })
        .collect())
}

impl PropertyVerdict {
    fn with_trials(mut self, trials: usize) -> Self {
        self.trials = trials;
        self
    }
}

/// Runs every property suite and returns the verdicts in a fixed order.
pub fn run_harness(cfg: &HarnessConfig) -> Result<Vec<PropertyVerdict>> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_cap() {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::input(format!("thread pool: {e}")))?;
    pool.install(|| run_suites(cfg))
}

fn run_suites(cfg: &HarnessConfig) -> Result<Vec<PropertyVerdict>> {
    let mut out = geometry_suite(cfg)?;
    out.extend(condition_suite(cfg)?);
    out.extend(instance_suite(cfg)?);
    out.extend(nonspreading_suite(cfg)?);
    out.extend(fixed_point_suite(cfg)?);
    out.extend(ppa_suite(cfg)?);
    out.push(kkm_suite(cfg)?);
    Ok(out)
}

fn solver_opts(cfg: &HarnessConfig) -> SolverOptions {
    SolverOptions { seed: cfg.seed, ..SolverOptions::default() }
}

fn entry_stream(index: usize) -> u64 {
    100 + index as u64
}

/// `stewart` and `cosh-convexity`.
pub fn geometry_suite(cfg: &HarnessConfig) -> Result<Vec<PropertyVerdict>> {
    Ok(vec![
        check_stewart(cfg.seed, cfg.stewart_trials)?,
        check_cosh_convexity(cfg.seed.wrapping_add(1), cfg.convexity_trials)?,
    ])
}

/// `conditions/<entry>/<clause>` for every catalog entry.
pub fn condition_suite(cfg: &HarnessConfig) -> Result<Vec<PropertyVerdict>> {
    let mut out = vec![];
    for e in &catalog() {
        out.extend(condition_verdicts(e, cfg.seed)?);
    }
    Ok(out)
}

/// Per catalog entry: `solver-oracle`, `single-valued` and `characterization`
/// over `cfg.instances` random instances.
pub fn instance_suite(cfg: &HarnessConfig) -> Result<Vec<PropertyVerdict>> {
    let opts = solver_opts(cfg);
    let mut out = vec![];
    for (ei, e) in catalog().iter().enumerate() {
        let instances = solver_instances(cfg.seed, entry_stream(ei), cfg.instances)?;
        let results: Vec<InstanceResult> = instances
            .par_iter()
            .map(|inst| solve_instance(&e.f, inst, &opts))
            .collect::<Result<_>>()?;
        let agreement: Vec<Option<f64>> = results.iter().map(|r| r.agreement).collect();
        let single: Vec<Option<f64>> = results.iter().map(|r| r.single_valued).collect();
        out.push(PropertyVerdict::from_slacks(format!("solver-oracle/{}", e.name), 0.0, &agreement, |i| {
            instance_json(&instances[i])
        }));
        out.push(PropertyVerdict::from_slacks(format!("single-valued/{}", e.name), 0.0, &single, |i| {
            instance_json(&instances[i])
        }));
        let characterization: Vec<PropertyVerdict> = results.into_iter().flat_map(|r| r.characterization).collect();
        out.push(PropertyVerdict::merge(format!("characterization/{}", e.name), characterization));
    }
    Ok(out)
}

/// `firmly-nonspreading/<entry>` on the default region.
pub fn nonspreading_suite(cfg: &HarnessConfig) -> Result<Vec<PropertyVerdict>> {
    let opts = solver_opts(cfg);
    catalog()
        .iter()
        .enumerate()
        .map(|(ei, e)| {
            let seed = cfg.seed.wrapping_add(entry_stream(ei));
            let mut v = check_firmly_nonspreading(&e.f, &default_region(), seed, cfg.nonspreading_pairs, &opts)?;
            v.name = format!("firmly-nonspreading/{}", e.name);
            Ok(v)
        })
        .collect()
}

/// `fixed-point/<entry>` for entries with a known minimizer.
pub fn fixed_point_suite(cfg: &HarnessConfig) -> Result<Vec<PropertyVerdict>> {
    let opts = solver_opts(cfg);
    catalog()
        .iter()
        .filter_map(|e| e.minimizer.as_ref().map(|p| fixed_point_verdict(e, p, &opts)))
        .collect()
}

/// `ppa/<entry>` for entries with a known minimizer, with `lambda = 1`.
pub fn ppa_suite(cfg: &HarnessConfig) -> Result<Vec<PropertyVerdict>> {
    let opts = solver_opts(cfg);
    let mut out = vec![];
    for (ei, e) in catalog().iter().enumerate() {
        if let Some(p) = &e.minimizer {
            let seed = cfg.seed.wrapping_add(entry_stream(ei)) ^ 0x5eed;
            let x0 = default_region().sample(seed, 1, 2.0)?.remove(0);
            out.push(ppa_verdict(e, p, &x0, cfg.ppa_steps, &opts)?);
        }
    }
    Ok(out)
}

/// Families of sizes `1 + i mod 8` over the default region, cycling through the catalog.
pub fn kkm_suite(cfg: &HarnessConfig) -> Result<PropertyVerdict> {
    let entries = catalog();
    let c = default_region();
    let xs = ConvexRegion::ball(HPoint::origin(2), 3.0)?.sample(cfg.seed ^ 0xcc, cfg.kkm_families.max(1), 3.0)?;
    let parts: Vec<PropertyVerdict> = (0..cfg.kkm_families)
        .into_par_iter()
        .map(|i| {
            let e = &entries[i % entries.len()];
            let mut v = check_kkm(&e.f, &xs[i], &c, 1 + i % 8, cfg.seed.wrapping_add(i as u64))?;
            if let Value::Object(m) = &mut v.witness {
                m.insert("bifunction".into(), json!(e.name));
            }
            Ok(v)
        })
        .collect::<Result<_>>()?;
    Ok(PropertyVerdict::merge("kkm", parts))
}
