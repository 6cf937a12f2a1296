//! Closed geodesically convex subsets of H^n.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{self, boost_from_origin, dist, log_map, mdot, HPoint, TangentVec};
use crate::model::max_model_step;

/// Maximum number of cyclic sweeps when projecting onto an intersection.
pub const MAX_SWEEPS: usize = 10_000;

const SWEEP_TOL: f64 = 1e-10;
const REFINE_PASSES: usize = 100;
const REFINE_TOL: f64 = 1e-13;
const MAX_GRID_POINTS: usize = 5_000_000;

/// A strictly positive, finite real.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Positive(f64);

impl Positive {
    pub fn new(v: f64) -> Result<Self> {
        if v.is_finite() && v > 0.0 {
            Ok(Positive(v))
        } else {
            Err(Error::input(format!("expected a positive finite number, got {v}")))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Positive {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        Positive::new(v)
    }
}

impl From<Positive> for f64 {
    fn from(p: Positive) -> f64 {
        p.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum RegionSpec {
    Ball { center: HPoint, radius: Positive },
    Halfspace { normal: Vec<f64> },
    Intersection { members: Vec<RegionSpec> },
    Whole { dimension: usize },
}

/// `K` or `C`: a ball, a Minkowski half-space `{x : <x, n> <= 0}`, a nonempty
/// finite intersection, or all of H^n.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RegionSpec", into = "RegionSpec")]
pub enum ConvexRegion {
    Ball {
        center: HPoint,
        radius: f64,
    },
    HalfSpace {
        /// Unit spacelike: `<normal, normal> = 1`.
        normal: Vec<f64>,
    },
    Intersection {
        members: Vec<ConvexRegion>,
        /// A point certified to lie in every member.
        witness: HPoint,
    },
    WholeSpace {
        dim: usize,
    },
}

impl TryFrom<RegionSpec> for ConvexRegion {
    type Error = Error;

    fn try_from(spec: RegionSpec) -> Result<Self> {
        match spec {
            RegionSpec::Ball { center, radius } => ConvexRegion::ball(center, radius.get()),
            RegionSpec::Halfspace { normal } => ConvexRegion::half_space(normal),
            RegionSpec::Intersection { members } => ConvexRegion::intersection(
                members
                    .into_iter()
                    .map(ConvexRegion::try_from)
                    .collect::<Result<_>>()?,
            ),
            RegionSpec::Whole { dimension } => {
                if dimension == 0 {
                    return Err(Error::input("dimension must be at least 1"));
                }
                Ok(ConvexRegion::WholeSpace { dim: dimension })
            }
        }
    }
}

impl From<ConvexRegion> for RegionSpec {
    fn from(r: ConvexRegion) -> Self {
        match r {
            ConvexRegion::Ball { center, radius } => RegionSpec::Ball {
                center,
                radius: Positive(radius),
            },
            ConvexRegion::HalfSpace { normal } => RegionSpec::Halfspace { normal },
            ConvexRegion::Intersection { members, .. } => RegionSpec::Intersection {
                members: members.into_iter().map(RegionSpec::from).collect(),
            },
            ConvexRegion::WholeSpace { dim } => RegionSpec::Whole { dimension: dim },
        }
    }
}

impl ConvexRegion {
    pub fn ball(center: HPoint, radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::input(format!("ball radius must be positive, got {radius}")));
        }
        Ok(ConvexRegion::Ball { center, radius })
    }

    /// `{x : <x, normal> <= 0}`; the normal is rescaled to unit length.
    pub fn half_space(normal: Vec<f64>) -> Result<Self> {
        if normal.len() < 2 {
            return Err(Error::input("half-space normal needs at least 2 components"));
        }
        let form = mdot(&normal, &normal);
        if !(form.is_finite() && form > 0.0) {
            return Err(Error::input(format!(
                "half-space normal must be spacelike, <n, n> = {form}"
            )));
        }
        let s = form.sqrt();
        Ok(ConvexRegion::HalfSpace {
            normal: normal.into_iter().map(|c| c / s).collect(),
        })
    }

    /// Builds an intersection, locating a witness by alternating projection.
    pub fn intersection(members: Vec<ConvexRegion>) -> Result<Self> {
        let first = members
            .first()
            .ok_or_else(|| Error::input("intersection needs at least one member"))?;
        let dim = first.dim();
        if members.iter().any(|m| m.dim() != dim) {
            return Err(Error::input("intersection members differ in dimension"));
        }
        let start = first.witness();
        let witness = alternating_projection(&members, &start).map_err(|e| match e {
            Error::Convergence { .. } => {
                Error::DegenerateRegion("intersection appears to be empty".into())
            }
            other => other,
        })?;
        if !members.iter().all(|m| m.contains(&witness, 1e-8)) {
            return Err(Error::DegenerateRegion(
                "intersection appears to be empty".into(),
            ));
        }
        Ok(ConvexRegion::Intersection { members, witness })
    }

    pub fn whole(dim: usize) -> Self {
        ConvexRegion::WholeSpace { dim }
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexRegion::Ball { center, .. } => center.dim(),
            ConvexRegion::HalfSpace { normal } => normal.len() - 1,
            ConvexRegion::Intersection { witness, .. } => witness.dim(),
            ConvexRegion::WholeSpace { dim } => *dim,
        }
    }

    /// A point known to lie in the region.
    pub fn witness(&self) -> HPoint {
        match self {
            ConvexRegion::Ball { center, .. } => center.clone(),
            ConvexRegion::HalfSpace { normal } => half_space_project(normal, &HPoint::origin(normal.len() - 1)),
            ConvexRegion::Intersection { witness, .. } => witness.clone(),
            ConvexRegion::WholeSpace { dim } => HPoint::origin(*dim),
        }
    }

    /// Radius of a ball around the witness known to contain the region, if any.
    pub fn enclosing_radius(&self) -> Option<f64> {
        match self {
            ConvexRegion::Ball { radius, .. } => Some(*radius),
            ConvexRegion::Intersection { members, witness } => members
                .iter()
                .filter_map(|m| match m {
                    ConvexRegion::Ball { center, radius } => Some(radius + dist(center, witness)),
                    _ => None,
                })
                .reduce(f64::min),
            _ => None,
        }
    }

    /// Constraints `c_j(z) <= 0` describing the region near `z`, each as its
    /// value (a signed distance) and Riemannian gradient at `z`.
    pub fn linearized_constraints(&self, z: &HPoint) -> Vec<(f64, TangentVec)> {
        match self {
            ConvexRegion::Ball { center, radius } => {
                let d = dist(z, center);
                if d < geometry::ZERO_TANGENT {
                    return vec![];
                }
                let v = log_map(z, center);
                vec![(d - radius, v.scaled(-1.0 / v.norm()))]
            }
            ConvexRegion::HalfSpace { normal } => {
                let a = mdot(z.coords(), normal);
                let g = TangentVec::project(z, normal);
                vec![(a.asinh(), g.scaled(1.0 / (1.0 + a * a).sqrt()))]
            }
            ConvexRegion::Intersection { members, .. } => members
                .iter()
                .flat_map(|m| m.linearized_constraints(z))
                .collect(),
            ConvexRegion::WholeSpace { .. } => vec![],
        }
    }

    pub fn contains(&self, x: &HPoint, tol: f64) -> bool {
        match self {
            ConvexRegion::Ball { center, radius } => dist(x, center) <= radius + tol,
            ConvexRegion::HalfSpace { normal } => mdot(x.coords(), normal) <= tol,
            ConvexRegion::Intersection { members, .. } => members.iter().all(|m| m.contains(x, tol)),
            ConvexRegion::WholeSpace { .. } => true,
        }
    }

    /// Metric projection onto the region.
    ///
    /// Balls and half-spaces use closed forms. Intersections use cyclic
    /// alternating projection, refined by linearized steps when several
    /// members are active at the answer.
    pub fn project(&self, x: &HPoint) -> Result<HPoint> {
        match self {
            ConvexRegion::Ball { center, radius } => {
                let d = dist(x, center);
                if d <= *radius {
                    return Ok(x.clone());
                }
                // Point of [x, center] at distance `radius` from the center.
                Ok(geometry::interpolate(x, center, radius / d))
            }
            ConvexRegion::HalfSpace { normal } => Ok(half_space_project(normal, x)),
            ConvexRegion::Intersection { members, .. } => {
                if self.contains(x, 0.0) {
                    return Ok(x.clone());
                }
                let start = alternating_projection(members, x)?;
                Ok(refine_projection(self, members, x, start))
            }
            ConvexRegion::WholeSpace { .. } => Ok(x.clone()),
        }
    }

    /// `count` points drawn by rejection from the geodesic ball of radius
    /// `bounding_radius` around the witness; deterministic in `seed`.
    pub fn sample(&self, seed: u64, count: usize, bounding_radius: f64) -> Result<Vec<HPoint>> {
        if !(bounding_radius > 0.0) {
            return Err(Error::input("bounding radius must be positive"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = self.witness();
        let n = self.dim();
        let mut out = Vec::with_capacity(count);
        let mut proposals: u64 = 0;
        while out.len() < count {
            proposals += 1;
            let p = random_point_in_ball(&mut rng, &w, n, bounding_radius);
            if self.contains(&p, 1e-9) {
                out.push(p);
            }
            if proposals >= 1_000_000 && (out.len() as f64) < 1e-3 * proposals as f64 {
                return Err(Error::Sampling(format!(
                    "acceptance rate {} / {proposals} below 0.1%",
                    out.len()
                )));
            }
        }
        Ok(out)
    }

    /// Grid over the region intersected with the ball of radius `bounding_radius`
    /// around the witness; every point of that set lies within `spacing` of a grid point.
    pub fn build_grid(&self, spacing: f64, bounding_radius: f64) -> Result<PointGrid> {
        self.build_grid_with_phase(spacing, bounding_radius, 0.0)
    }

    /// As [`build_grid`](Self::build_grid), with the angular lattice rotated by
    /// `phase` (a fraction of one angular step).
    pub fn build_grid_with_phase(
        &self,
        spacing: f64,
        bounding_radius: f64,
        phase: f64,
    ) -> Result<PointGrid> {
        PointGrid::around(self, &self.witness(), bounding_radius, spacing, phase)
    }
}

fn half_space_project(normal: &[f64], x: &HPoint) -> HPoint {
    let a = mdot(x.coords(), normal);
    if a <= 0.0 {
        return x.clone();
    }
    // Foot of the perpendicular on the bounding hyperplane <p, n> = 0.
    let raw = x
        .coords()
        .iter()
        .zip(normal)
        .map(|(xi, ni)| xi - a * ni)
        .collect::<Vec<f64>>();
    // <raw, raw> = -(1 + a^2), so rescale rather than lift.
    geometry::project_to_hyperboloid(&raw).unwrap_or_else(|_| geometry::renormalize(raw))
}

fn alternating_projection(members: &[ConvexRegion], x: &HPoint) -> Result<HPoint> {
    let mut cur = x.clone();
    let mut best = cur.clone();
    for sweep in 0..MAX_SWEEPS {
        let mut moved = 0.0f64;
        for m in members {
            let next = m.project(&cur)?;
            moved = moved.max(dist(&cur, &next));
            cur = next;
        }
        best = cur.clone();
        if moved < SWEEP_TOL {
            return Ok(cur);
        }
        if sweep + 1 == MAX_SWEEPS {
            break;
        }
    }
    Err(Error::Convergence {
        message: "alternating projection did not settle".into(),
        iterations: MAX_SWEEPS,
        best: Some(best),
    })
}

/// Alternating projection lands in the intersection but, with several
/// members active, not at the nearest point. Each pass projects `log_z x`
/// onto the constraints linearized at `z`, steps there and restores
/// feasibility, keeping the step only if it gets closer to `x`.
fn refine_projection(k: &ConvexRegion, members: &[ConvexRegion], x: &HPoint, mut z: HPoint) -> HPoint {
    let mut dz = dist(x, &z);
    for _ in 0..REFINE_PASSES {
        let v = log_map(&z, x);
        if v.norm() < geometry::ZERO_TANGENT {
            break;
        }
        let mut step = max_model_step(&[0.0], &[v.scaled(-1.0)], &k.linearized_constraints(&z), 1.0);
        let mut accepted = None;
        while step.norm() > REFINE_TOL {
            let trial = geometry::exp_map(&step).and_then(|p| alternating_projection(members, &p));
            if let Ok(t) = trial {
                let dt = dist(x, &t);
                if dt < dz {
                    accepted = Some((t, dt));
                    break;
                }
            }
            step = step.scaled(0.5);
        }
        match accepted {
            Some((t, dt)) => {
                let moved = dist(&z, &t);
                z = t;
                dz = dt;
                if moved < REFINE_TOL {
                    break;
                }
            }
            None => break,
        }
    }
    z
}

fn random_point_in_ball<R: Rng>(rng: &mut R, w: &HPoint, n: usize, radius: f64) -> HPoint {
    // Uniform in the Euclidean unit ball of the tangent space at the origin.
    let v = loop {
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let sq: f64 = v.iter().map(|c| c * c).sum();
        if sq <= 1.0 && sq > 0.0 {
            break v;
        }
    };
    let len: f64 = v.iter().map(|c| c * c).sum::<f64>().sqrt();
    let r = radius * len;
    let mut u = Vec::with_capacity(n + 1);
    u.push(r.cosh());
    u.extend(v.iter().map(|c| r.sinh() * c / len));
    geometry::renormalize(boost_from_origin(w, &u))
}

/// A finite point set covering a region up to `spacing`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointGrid {
    pub points: Vec<HPoint>,
    pub spacing: f64,
}

impl PointGrid {
    /// Geodesic polar grid of the ball `B(center, radius)` restricted to
    /// `region`. Lattice points that fall outside the region are replaced by
    /// their projections, which keeps the covering bound near the boundary.
    pub fn around(
        region: &ConvexRegion,
        center: &HPoint,
        radius: f64,
        spacing: f64,
        phase: f64,
    ) -> Result<PointGrid> {
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::input(format!("grid spacing must be positive, got {spacing}")));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::input(format!("grid radius must be positive, got {radius}")));
        }
        let raw = if center.dim() == 2 {
            polar_lattice(center, radius, spacing, phase)?
        } else {
            tangent_lattice(center, radius, spacing, phase)?
        };
        let mut points = Vec::with_capacity(raw.len());
        for p in raw {
            if region.contains(&p, 1e-12) {
                points.push(p);
            } else if let Ok(q) = region.project(&p) {
                if region.contains(&q, 1e-9) {
                    points.push(q);
                }
            }
        }
        if points.is_empty() {
            return Err(Error::DegenerateRegion(
                "grid has no points inside the region".into(),
            ));
        }
        Ok(PointGrid { points, spacing })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Index and distance of the nearest grid point; lowest index wins ties.
    pub fn nearest(&self, x: &HPoint) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for (i, p) in self.points.iter().enumerate() {
            let d = dist(p, x);
            if best.map_or(true, |(_, b)| d < b) {
                best = Some((i, d));
            }
        }
        best
    }
}

fn polar_lattice(center: &HPoint, radius: f64, spacing: f64, phase: f64) -> Result<Vec<HPoint>> {
    let rings = (radius / spacing).ceil().max(1.0) as usize;
    let dr = radius / rings as f64;
    let mut pts = vec![center.clone()];
    for k in 1..=rings {
        let r = k as f64 * dr;
        let m = (std::f64::consts::TAU * r.sinh() / spacing).ceil().max(3.0) as usize;
        if pts.len() + m > MAX_GRID_POINTS {
            return Err(Error::input("grid would exceed the point budget; raise the spacing"));
        }
        for j in 0..m {
            let theta = std::f64::consts::TAU * (j as f64 + phase) / m as f64;
            let local = HPoint::from_polar(r, theta);
            pts.push(geometry::renormalize(boost_from_origin(center, local.coords())));
        }
    }
    Ok(pts)
}

fn tangent_lattice(center: &HPoint, radius: f64, spacing: f64, phase: f64) -> Result<Vec<HPoint>> {
    let n = center.dim();
    // exp at the origin is sinh(R)/R-Lipschitz on the tangent ball of radius R.
    let stretch = if radius < 1e-6 { 1.0 } else { radius.sinh() / radius };
    let h = 2.0 * spacing / (stretch * (n as f64).sqrt());
    let reach = radius + h * (n as f64).sqrt() / 2.0;
    let per_axis = (2.0 * reach / h).ceil() as usize + 1;
    if (per_axis as f64).powi(n as i32) > MAX_GRID_POINTS as f64 {
        return Err(Error::input("grid would exceed the point budget; raise the spacing"));
    }
    let lo = -reach + phase.rem_euclid(1.0) * h;
    let mut idx = vec![0usize; n];
    let mut pts = vec![center.clone()];
    loop {
        let v: Vec<f64> = idx.iter().map(|&i| lo + i as f64 * h).collect();
        let len = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if len <= reach && len > 0.0 {
            let r = len.min(radius);
            let mut u = Vec::with_capacity(n + 1);
            u.push(r.cosh());
            u.extend(v.iter().map(|c| r.sinh() * c / len));
            pts.push(geometry::renormalize(boost_from_origin(center, &u)));
        }
        let mut axis = 0;
        loop {
            if axis == n {
                return Ok(pts);
            }
            idx[axis] += 1;
            if idx[axis] < per_axis {
                break;
            }
            idx[axis] = 0;
            axis += 1;
        }
    }
}

/// Finite-depth samples of the iterated geodesic hull of `points`.
///
/// Level 0 is `points`; level k holds `per_level` points `t u ⊕ (1 - t) v`
/// with `u, v` drawn from level k - 1 and `t` uniform in [0, 1]. Returns the
/// union of all levels with exact duplicates removed.
pub fn convex_hull_samples(
    points: &[HPoint],
    depth: usize,
    per_level: usize,
    seed: u64,
) -> Result<Vec<HPoint>> {
    if points.is_empty() {
        return Err(Error::input("hull of an empty set"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut all: Vec<HPoint> = Vec::new();
    let push = |all: &mut Vec<HPoint>, p: HPoint| {
        if !all.contains(&p) {
            all.push(p);
        }
    };
    for p in points {
        push(&mut all, p.clone());
    }
    let mut level: Vec<HPoint> = points.to_vec();
    for _ in 0..depth {
        let mut next = Vec::with_capacity(per_level);
        for _ in 0..per_level {
            let u = &level[rng.gen_range(0..level.len())];
            let v = &level[rng.gen_range(0..level.len())];
            let t: f64 = rng.gen_range(0.0..=1.0);
            next.push(geometry::interpolate(u, v, t));
        }
        for p in &next {
            push(&mut all, p.clone());
        }
        level = next;
    }
    Ok(all)
}
