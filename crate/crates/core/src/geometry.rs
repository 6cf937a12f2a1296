//! Hyperboloid model of H^n.
//!
//! Points are stored in ambient Minkowski coordinates `(x_0, x_1, ..., x_n)`
//! with `<x, x> = -x_0^2 + x_1^2 + ... + x_n^2 = -1` and `x_0 >= 1`. The
//! interpolation `geodesic_point(x, y, t)` follows the convex-combination
//! convention `t x ⊕ (1 - t) y`: the result sits at distance `(1 - t) d(x, y)`
//! from `x`, so `t = 1` gives `x` and `t = 0` gives `y`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `|<x, x> + 1|`, relative to `max(1, x_0^2)`.
pub const ON_SHEET_TOL: f64 = 1e-9;

/// Below this length a geodesic is treated as a single point.
pub const DEGENERATE_GEODESIC: f64 = 1e-8;

/// Below this norm a tangent vector is treated as zero.
pub const ZERO_TANGENT: f64 = 1e-12;

/// `-u_0 v_0 + sum_{i >= 1} u_i v_i` without a length check.
#[inline]
pub(crate) fn mdot(u: &[f64], v: &[f64]) -> f64 {
    debug_assert_eq!(u.len(), v.len());
    let space: f64 = u[1..].iter().zip(&v[1..]).map(|(a, b)| a * b).sum();
    space - u[0] * v[0]
}

/// Minkowski bilinear form `<u, v> = -u_0 v_0 + sum_{i >= 1} u_i v_i`.
pub fn minkowski_form(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::input(format!(
            "dimension mismatch: {} vs {}",
            u.len(),
            v.len()
        )));
    }
    if u.is_empty() {
        return Err(Error::input("empty vectors"));
    }
    Ok(mdot(u, v))
}

/// `t / sinh t`, with a series switch near zero.
pub fn t_over_sinh(t: f64) -> f64 {
    if t.abs() < 1e-4 {
        let t2 = t * t;
        1.0 - t2 / 6.0 + 7.0 * t2 * t2 / 360.0
    } else {
        t / t.sinh()
    }
}

/// A point on the upper sheet of the hyperboloid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct HPoint {
    coords: Vec<f64>,
}

impl TryFrom<Vec<f64>> for HPoint {
    type Error = Error;

    fn try_from(coords: Vec<f64>) -> Result<Self> {
        HPoint::new(coords)
    }
}

impl From<HPoint> for Vec<f64> {
    fn from(p: HPoint) -> Self {
        p.coords
    }
}

impl HPoint {
    /// Validates the sheet invariants; does not renormalize.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::input(format!(
                "a point of H^n needs at least 2 ambient coordinates, got {}",
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::Invariant(format!("non-finite coordinates {coords:?}")));
        }
        let scale = coords[0].abs().max(1.0);
        let form = mdot(&coords, &coords);
        if (form + 1.0).abs() > ON_SHEET_TOL * scale * scale {
            return Err(Error::Invariant(format!(
                "<x, x> = {form} is not -1 for {coords:?}"
            )));
        }
        if coords[0] < 1.0 - ON_SHEET_TOL * scale {
            return Err(Error::Invariant(format!(
                "x_0 = {} is below the upper sheet",
                coords[0]
            )));
        }
        Ok(HPoint { coords })
    }

    /// The base point `(1, 0, ..., 0)` of H^n.
    pub fn origin(n: usize) -> Self {
        let mut coords = vec![0.0; n + 1];
        coords[0] = 1.0;
        HPoint { coords }
    }

    /// Lifts spatial coordinates `(x_1, ..., x_n)` onto the sheet.
    pub fn from_spatial(spatial: &[f64]) -> Self {
        let sq: f64 = spatial.iter().map(|s| s * s).sum();
        let mut coords = Vec::with_capacity(spatial.len() + 1);
        coords.push((1.0 + sq).sqrt());
        coords.extend_from_slice(spatial);
        HPoint { coords }
    }

    /// Geodesic polar coordinates around the origin for n = 2.
    pub fn from_polar(radius: f64, angle: f64) -> Self {
        HPoint {
            coords: vec![
                radius.cosh(),
                radius.sinh() * angle.cos(),
                radius.sinh() * angle.sin(),
            ],
        }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Intrinsic dimension n (ambient dimension minus one).
    pub fn dim(&self) -> usize {
        self.coords.len() - 1
    }

    pub fn spatial(&self) -> &[f64] {
        &self.coords[1..]
    }

    /// Poincaré-ball coordinates `x_s / (1 + x_0)`.
    pub fn to_poincare(&self) -> Vec<f64> {
        let denom = 1.0 + self.coords[0];
        self.coords[1..].iter().map(|c| c / denom).collect()
    }

    /// `cosh d(self, other)`, read directly off the bilinear form.
    #[inline]
    pub fn cosh_dist(&self, other: &HPoint) -> f64 {
        cosh_dist(self, other)
    }

    #[inline]
    pub fn dist(&self, other: &HPoint) -> f64 {
        dist(self, other)
    }
}

/// `cosh d(x, y) = max(1, -<x, y>)`.
#[inline]
pub fn cosh_dist(x: &HPoint, y: &HPoint) -> f64 {
    (-mdot(&x.coords, &y.coords)).max(1.0)
}

/// Geodesic distance `arccosh(-<x, y>)`.
///
/// Near the diagonal the chordal form `2 asinh(sqrt(<x-y, x-y>) / 2)` is used
/// instead; it is the same function but keeps full relative precision where
/// `arccosh` loses half the digits.
pub fn dist(x: &HPoint, y: &HPoint) -> f64 {
    assert_eq!(x.coords.len(), y.coords.len(), "dimension mismatch");
    let c = -mdot(&x.coords, &y.coords);
    if c < 2.0 {
        let (t, s) = x.coords.iter().zip(&y.coords).enumerate().fold(
            (0.0, 0.0),
            |(t, s), (i, (a, b))| {
                let d = a - b;
                if i == 0 {
                    (t + d * d, s)
                } else {
                    (t, s + d * d)
                }
            },
        );
        let chord_sq = (s - t).max(0.0);
        2.0 * (chord_sq.sqrt() / 2.0).asinh()
    } else {
        c.acosh()
    }
}

/// Rescales a future timelike vector onto the sheet.
pub fn project_to_hyperboloid(raw: &[f64]) -> Result<HPoint> {
    if raw.len() < 2 {
        return Err(Error::input("need at least 2 ambient coordinates"));
    }
    let form = mdot(raw, raw);
    if !(form < 0.0) || !(raw[0] > 0.0) || !form.is_finite() {
        return Err(Error::input(format!(
            "cannot project {raw:?}: <v, v> = {form} (needs timelike vector on the future sheet)"
        )));
    }
    let s = (-form).sqrt();
    Ok(HPoint {
        coords: raw.iter().map(|c| c / s).collect(),
    })
}

/// Puts a vector that is close to the sheet back on it by recomputing the
/// time coordinate from the spatial part. Unlike rescaling, this does not
/// amplify a small sheet error of the inputs by the size of the coordinates.
pub(crate) fn renormalize(mut raw: Vec<f64>) -> HPoint {
    let sq: f64 = raw[1..].iter().map(|s| s * s).sum();
    raw[0] = (1.0 + sq).sqrt();
    HPoint { coords: raw }
}

/// `t x ⊕ (1 - t) y`: the point of `[x, y]` at distance `(1 - t) d(x, y)` from `x`.
pub fn geodesic_point(x: &HPoint, y: &HPoint, t: f64) -> Result<HPoint> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::input(format!("interpolation parameter {t} outside [0, 1]")));
    }
    Ok(interpolate(x, y, t))
}

pub(crate) fn interpolate(x: &HPoint, y: &HPoint, t: f64) -> HPoint {
    if t == 1.0 || x == y {
        return x.clone();
    }
    if t == 0.0 {
        return y.clone();
    }
    let d = dist(x, y);
    let raw: Vec<f64> = if d < DEGENERATE_GEODESIC {
        x.coords
            .iter()
            .zip(&y.coords)
            .map(|(a, b)| t * a + (1.0 - t) * b)
            .collect()
    } else {
        let sd = d.sinh();
        let a = (t * d).sinh() / sd;
        let b = ((1.0 - t) * d).sinh() / sd;
        x.coords
            .iter()
            .zip(&y.coords)
            .map(|(p, q)| a * p + b * q)
            .collect()
    };
    renormalize(raw)
}

/// A vector tangent to the hyperboloid at `base`.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVec {
    base: HPoint,
    vec: Vec<f64>,
}

impl TangentVec {
    pub fn new(base: HPoint, vec: Vec<f64>) -> Result<Self> {
        if vec.len() != base.coords.len() {
            return Err(Error::input(format!(
                "tangent vector has {} components, base point has {}",
                vec.len(),
                base.coords.len()
            )));
        }
        let scale = base.coords[0] * vec.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let form = mdot(&base.coords, &vec);
        if form.abs() > ON_SHEET_TOL * scale.max(1.0) {
            return Err(Error::Invariant(format!(
                "<base, v> = {form} is not zero"
            )));
        }
        Ok(TangentVec { base, vec })
    }

    pub fn zero(base: HPoint) -> Self {
        let vec = vec![0.0; base.coords.len()];
        TangentVec { base, vec }
    }

    /// Orthogonal projection of an ambient vector onto the tangent space at `base`.
    pub fn project(base: &HPoint, ambient: &[f64]) -> Self {
        let a = mdot(&base.coords, ambient);
        let vec = ambient
            .iter()
            .zip(&base.coords)
            .map(|(u, b)| u + a * b)
            .collect();
        TangentVec {
            base: base.clone(),
            vec,
        }
    }

    pub fn base(&self) -> &HPoint {
        &self.base
    }

    pub fn vec(&self) -> &[f64] {
        &self.vec
    }

    pub fn norm(&self) -> f64 {
        mdot(&self.vec, &self.vec).max(0.0).sqrt()
    }

    pub fn inner(&self, other: &TangentVec) -> f64 {
        mdot(&self.vec, &other.vec)
    }

    pub fn scaled(&self, s: f64) -> Self {
        TangentVec {
            base: self.base.clone(),
            vec: self.vec.iter().map(|v| v * s).collect(),
        }
    }

    /// Sum of two vectors tangent at the same base.
    pub fn plus(&self, other: &TangentVec) -> Self {
        debug_assert_eq!(self.base, other.base);
        TangentVec {
            base: self.base.clone(),
            vec: self.vec.iter().zip(&other.vec).map(|(a, b)| a + b).collect(),
        }
    }
}

/// `cosh(|v|) base + sinh(|v|) v / |v|`.
pub fn exp_map(v: &TangentVec) -> Result<HPoint> {
    let form = mdot(&v.vec, &v.vec);
    let scale = v.vec.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    if form < -ON_SHEET_TOL * (scale * scale).max(1e-300) {
        return Err(Error::input(format!(
            "tangent vector is not spacelike: <v, v> = {form}"
        )));
    }
    let n = form.max(0.0).sqrt();
    if n < ZERO_TANGENT {
        return Ok(v.base.clone());
    }
    // Work in the frame where the base is the origin.
    let base = renormalize(v.base.coords.clone());
    let inv = inverse_boost_point(&base);
    let local = boost_from_origin(&inv, &v.vec);
    let s = n.sinh() / n;
    let mut at_origin: Vec<f64> = local.iter().map(|c| s * c).collect();
    at_origin[0] = n.cosh();
    Ok(renormalize(boost_from_origin(&base, &at_origin)))
}

fn inverse_boost_point(w: &HPoint) -> HPoint {
    let mut c = w.coords.clone();
    for x in &mut c[1..] {
        *x = -*x;
    }
    HPoint { coords: c }
}

/// Inverse of [`exp_map`]: the tangent vector at `x` pointing to `y` with length `d(x, y)`.
pub fn log_map(x: &HPoint, y: &HPoint) -> TangentVec {
    let d = dist(x, y);
    if d < ZERO_TANGENT {
        return TangentVec::zero(x.clone());
    }
    // Boosts are only isometries for bases exactly on the sheet.
    let base = renormalize(x.coords.clone());
    let inv = inverse_boost_point(&base);
    let local = boost_from_origin(&inv, &y.coords);
    let sn = local[1..].iter().map(|c| c * c).sum::<f64>().sqrt();
    if sn == 0.0 {
        return TangentVec::zero(x.clone());
    }
    let mut at_origin: Vec<f64> = local.iter().map(|c| c * d / sn).collect();
    at_origin[0] = 0.0;
    // Remove the residual normal component left by rounding.
    TangentVec {
        base: x.clone(),
        vec: boost_from_origin(&base, &at_origin),
    }
}

/// Lorentz boost taking the origin to `w`, applied to an ambient vector `u`.
pub fn boost_from_origin(w: &HPoint, u: &[f64]) -> Vec<f64> {
    let w0 = w.coords[0];
    let ws = &w.coords[1..];
    let dot: f64 = ws.iter().zip(&u[1..]).map(|(a, b)| a * b).sum();
    let k = dot / (1.0 + w0) + u[0];
    let mut out = Vec::with_capacity(u.len());
    out.push(w0 * u[0] + dot);
    out.extend(ws.iter().zip(&u[1..]).map(|(a, b)| b + a * k));
    out
}

/// The geodesic segment `[a, b]` parametrized by the combination weight of `a`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicSegment {
    pub a: HPoint,
    pub b: HPoint,
    pub length: f64,
}

impl GeodesicSegment {
    pub fn new(a: HPoint, b: HPoint) -> Self {
        let length = dist(&a, &b);
        GeodesicSegment { a, b, length }
    }

    /// `t a ⊕ (1 - t) b`; `point_at(1) = a`, `point_at(0) = b`.
    pub fn point_at(&self, t: f64) -> Result<HPoint> {
        geodesic_point(&self.a, &self.b, t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn p(c: &[f64]) -> HPoint {
        HPoint::new(c.to_vec()).unwrap()
    }

    fn c1() -> f64 {
        1f64.cosh()
    }

    fn s1() -> f64 {
        1f64.sinh()
    }

    #[test]
    fn form_examples() {
        assert_eq!(minkowski_form(&[1., 0., 0.], &[1., 0., 0.]).unwrap(), -1.0);
        assert_eq!(minkowski_form(&[0., 1., 0.], &[0., 0., 1.]).unwrap(), 0.0);
        let v = minkowski_form(&[1., 0., 0.], &[c1(), s1(), 0.]).unwrap();
        assert_abs_diff_eq!(v, -1.5430806348152437, epsilon = 1e-15);
        assert!(matches!(
            minkowski_form(&[1., 0.], &[1., 0., 0.]),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn dist_examples() {
        let o = HPoint::origin(2);
        assert_eq!(dist(&o, &o), 0.0);
        assert_abs_diff_eq!(dist(&o, &p(&[c1(), s1(), 0.])), 1.0, epsilon = 1e-14);
        let d = dist(&p(&[c1(), s1(), 0.]), &p(&[c1(), 0., s1()]));
        // 30-digit evaluation of arccosh(cosh^2 1).
        assert_abs_diff_eq!(d, 1.513374006596504, epsilon = 1e-13);
    }

    #[test]
    fn off_sheet_points_are_rejected() {
        assert!(matches!(HPoint::new(vec![1.0, 0.5, 0.0]), Err(Error::Invariant(_))));
        assert!(matches!(HPoint::new(vec![-1.0, 0.0, 0.0]), Err(Error::Invariant(_))));
        assert!(HPoint::new(vec![1.0]).is_err());
    }

    #[test]
    fn geodesic_examples() {
        let x = HPoint::origin(2);
        let y = p(&[c1(), s1(), 0.]);
        assert_eq!(geodesic_point(&x, &y, 1.0).unwrap(), x);
        assert_eq!(geodesic_point(&x, &y, 0.0).unwrap(), y);
        let m = geodesic_point(&x, &y, 0.5).unwrap();
        assert_abs_diff_eq!(m.coords()[0], 1.1276259652063808, epsilon = 1e-14);
        assert_abs_diff_eq!(m.coords()[1], 0.5210953054937474, epsilon = 1e-14);
        assert_abs_diff_eq!(dist(&x, &m), 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(dist(&y, &m), 0.5, epsilon = 1e-14);
        assert_eq!(geodesic_point(&x, &x, 0.3).unwrap(), x);
        assert!(geodesic_point(&x, &y, 1.5).is_err());
        assert!(geodesic_point(&x, &y, -0.1).is_err());
    }

    #[test]
    fn segment_endpoints_follow_combination_convention() {
        let seg = GeodesicSegment::new(HPoint::origin(2), HPoint::from_polar(2.0, 1.0));
        assert_eq!(seg.point_at(1.0).unwrap(), seg.a);
        assert_eq!(seg.point_at(0.0).unwrap(), seg.b);
        let q = seg.point_at(0.25).unwrap();
        assert_abs_diff_eq!(dist(&seg.a, &q), 0.75 * seg.length, epsilon = 1e-12);
    }

    #[test]
    fn exp_log_examples() {
        let o = HPoint::origin(2);
        assert_eq!(exp_map(&TangentVec::zero(o.clone())).unwrap(), o);
        let v = TangentVec::new(o.clone(), vec![0., 1., 0.]).unwrap();
        let e = exp_map(&v).unwrap();
        assert_abs_diff_eq!(e.coords()[0], c1(), epsilon = 1e-14);
        assert_abs_diff_eq!(e.coords()[1], s1(), epsilon = 1e-14);
        assert_eq!(log_map(&o, &o).vec(), &[0., 0., 0.]);
        let l = log_map(&o, &p(&[c1(), s1(), 0.]));
        for (a, b) in l.vec().iter().zip([0., 1., 0.]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-14);
        }
    }

    #[test]
    fn timelike_tangent_is_rejected() {
        // Not tangent at the origin, and timelike.
        let bad = TangentVec {
            base: HPoint::origin(2),
            vec: vec![1.0, 0.0, 0.0],
        };
        assert!(matches!(exp_map(&bad), Err(Error::Input(_))));
        assert!(TangentVec::new(HPoint::origin(2), vec![1.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn projection_examples() {
        assert_eq!(project_to_hyperboloid(&[2., 0., 0.]).unwrap(), HPoint::origin(2));
        let q = p(&[c1(), s1(), 0.]);
        assert_eq!(project_to_hyperboloid(q.coords()).unwrap(), q);
        let r = project_to_hyperboloid(&[2., 1., 0.]).unwrap();
        assert_abs_diff_eq!(r.coords()[0], 1.1547005383792515, epsilon = 1e-15);
        assert_abs_diff_eq!(r.coords()[1], 0.5773502691896258, epsilon = 1e-15);
        assert_abs_diff_eq!(mdot(r.coords(), r.coords()), -1.0, epsilon = 1e-15);
        assert!(project_to_hyperboloid(&[1., 2., 0.]).is_err());
        assert!(project_to_hyperboloid(&[-2., 0., 0.]).is_err());
    }

    #[test]
    fn boost_is_an_isometry_sending_origin_to_target() {
        let w = HPoint::from_polar(1.7, 0.4);
        let o = HPoint::origin(2);
        let img = boost_from_origin(&w, o.coords());
        for (a, b) in img.iter().zip(w.coords()) {
            assert_abs_diff_eq!(*a, *b, epsilon = 1e-12);
        }
        let q = HPoint::from_polar(0.9, 2.0);
        let bq = HPoint::new(boost_from_origin(&w, q.coords())).unwrap();
        assert_abs_diff_eq!(dist(&w, &bq), dist(&o, &q), epsilon = 1e-12);
    }

    #[test]
    fn small_distances_keep_precision() {
        let x = HPoint::from_polar(2.0, 0.3);
        let v = TangentVec::project(&x, &[0.0, 1e-10, 0.0]);
        let y = exp_map(&v).unwrap();
        // Ambient coordinates of size cosh 2 bound the attainable relative precision.
        assert!((dist(&x, &y) - v.norm()).abs() <= 1e-5 * v.norm());
    }

    fn point_in_ball(radius: f64) -> impl Strategy<Value = HPoint> {
        (0.0..radius, 0.0..std::f64::consts::TAU).prop_map(|(r, a)| HPoint::from_polar(r, a))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(256))]

        #[test]
        fn dist_is_symmetric_and_separates(x in point_in_ball(4.0), y in point_in_ball(4.0)) {
            let (a, b) = (dist(&x, &y), dist(&y, &x));
            prop_assert!(a >= 0.0);
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a));
            let sup = x.coords().iter().zip(y.coords()).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
            prop_assert_eq!(a == 0.0, sup == 0.0);
        }

        #[test]
        fn geodesic_is_unit_speed(x in point_in_ball(3.0), y in point_in_ball(3.0)) {
            let d = dist(&x, &y);
            let ts = [0.0, 0.25, 0.5, 0.75, 1.0];
            let pts: Vec<_> = ts.iter().map(|&t| geodesic_point(&x, &y, t).unwrap()).collect();
            for i in 0..ts.len() {
                for j in 0..ts.len() {
                    let got = dist(&pts[i], &pts[j]);
                    prop_assert!((got - (ts[i] - ts[j]).abs() * d).abs() <= 1e-9);
                }
            }
        }

        #[test]
        fn stewart_identity_holds(
            x in point_in_ball(3.0), y in point_in_ball(3.0), z in point_in_ball(3.0), t in 0.0..=1.0f64
        ) {
            let d = dist(&x, &y);
            prop_assume!(d > 1e-6);
            let m = geodesic_point(&x, &y, t).unwrap();
            let lhs = cosh_dist(&m, &z) * d.sinh();
            let rhs = cosh_dist(&x, &z) * (t * d).sinh() + cosh_dist(&y, &z) * ((1.0 - t) * d).sinh();
            prop_assert!((lhs - rhs).abs() / rhs <= 1e-9);
        }

        #[test]
        fn cosh_is_geodesically_convex(
            x in point_in_ball(3.0), y in point_in_ball(3.0), z in point_in_ball(3.0), t in 0.0..=1.0f64
        ) {
            let m = geodesic_point(&x, &y, t).unwrap();
            let lhs = cosh_dist(&m, &z);
            let rhs = t * cosh_dist(&x, &z) + (1.0 - t) * cosh_dist(&y, &z);
            prop_assert!(lhs <= rhs + 1e-10 * rhs);
        }

        #[test]
        fn exp_log_round_trip(x in point_in_ball(3.0), offset in point_in_ball(10.0)) {
            let y = renormalize(boost_from_origin(&x, offset.coords()));
            let v = log_map(&x, &y);
            prop_assert!((v.norm() - dist(&x, &y)).abs() <= 1e-8);
            let back = exp_map(&v).unwrap();
            prop_assert!(dist(&back, &y) <= 1e-8);
        }

        #[test]
        fn exp_preserves_length(x in point_in_ball(3.0), a in -3.0..3.0f64, b in -3.0..3.0f64) {
            let v = TangentVec::project(&x, &[0.0, a, b]);
            prop_assume!(v.norm() <= 10.0);
            let y = exp_map(&v).unwrap();
            prop_assert!((dist(&x, &y) - v.norm()).abs() <= 1e-9 * (1.0 + v.norm()));
        }

        #[test]
        fn projection_is_idempotent(s0 in 1.5..4.0f64, s1 in -1.0..1.0f64, s2 in -1.0..1.0f64) {
            let once = project_to_hyperboloid(&[s0, s1, s2]).unwrap();
            let twice = project_to_hyperboloid(once.coords()).unwrap();
            for (a, b) in once.coords().iter().zip(twice.coords()) {
                prop_assert!((a - b).abs() <= 1e-15 * (1.0 + a.abs()));
            }
        }
    }
}
