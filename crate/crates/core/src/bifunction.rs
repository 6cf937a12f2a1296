//! Bifunctions `f: K x K -> R` and a sampling checker for the monotonicity
//! conditions the resolvent needs:
//!
//! 1. `f(x, x) = 0`;
//! 2. `f(x, y) + f(y, x) <= 0`;
//! 3. `f(x, .)` convex along geodesics;
//! 4. `f(., y)` upper hemicontinuous along geodesics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{self, cosh_dist, dist, HPoint, TangentVec};
use crate::region::ConvexRegion;

/// A nonnegative finite real.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct NonNegative(f64);

impl NonNegative {
    pub fn new(v: f64) -> Result<Self> {
        if v.is_finite() && v >= 0.0 {
            Ok(NonNegative(v))
        } else {
            Err(Error::input(format!("expected a nonnegative finite number, got {v}")))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for NonNegative {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        NonNegative::new(v)
    }
}

impl From<NonNegative> for f64 {
    fn from(v: NonNegative) -> f64 {
        v.0
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TermKind {
    /// `w cosh d(p, anchor)`
    #[default]
    Cosh,
    /// `w d(p, anchor)`
    Dist,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Term {
    pub w: NonNegative,
    pub anchor: HPoint,
    #[serde(default)]
    pub kind: TermKind,
}

impl Term {
    pub fn cosh(w: f64, anchor: HPoint) -> Result<Self> {
        Ok(Term {
            w: NonNegative::new(w)?,
            anchor,
            kind: TermKind::Cosh,
        })
    }

    pub fn dist(w: f64, anchor: HPoint) -> Result<Self> {
        Ok(Term {
            w: NonNegative::new(w)?,
            anchor,
            kind: TermKind::Dist,
        })
    }

    pub fn value(&self, p: &HPoint) -> f64 {
        let w = self.w.get();
        match self.kind {
            TermKind::Cosh => w * cosh_dist(p, &self.anchor),
            TermKind::Dist => w * dist(p, &self.anchor),
        }
    }

    /// Riemannian (sub)gradient at `p`.
    ///
    /// For `cosh d(p, a)` this is `-a + cosh d(p, a) p`; the distance term
    /// divides by `sinh d` and takes the zero subgradient at the anchor.
    pub fn gradient(&self, p: &HPoint) -> TangentVec {
        let w = self.w.get();
        let neg_a: Vec<f64> = self.anchor.coords().iter().map(|c| -c).collect();
        let g = TangentVec::project(p, &neg_a);
        match self.kind {
            TermKind::Cosh => g.scaled(w),
            TermKind::Dist => {
                let d = dist(p, &self.anchor);
                if d < geometry::ZERO_TANGENT {
                    TangentVec::zero(p.clone())
                } else {
                    g.scaled(w / d.sinh())
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Combine {
    #[default]
    Sum,
    Max,
}

/// A convex objective `g`: a weighted sum or maximum of cosh/distance terms.
/// An empty term list is `g = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Objective {
    pub terms: Vec<Term>,
    #[serde(default)]
    pub combine: Combine,
}

impl Objective {
    pub fn zero() -> Self {
        Objective {
            terms: Vec::new(),
            combine: Combine::Sum,
        }
    }

    pub fn sum(terms: Vec<Term>) -> Self {
        Objective {
            terms,
            combine: Combine::Sum,
        }
    }

    pub fn max(terms: Vec<Term>) -> Self {
        Objective {
            terms,
            combine: Combine::Max,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.w.get() == 0.0)
    }

    pub fn value(&self, p: &HPoint) -> f64 {
        if self.terms.is_empty() {
            return 0.0;
        }
        match self.combine {
            Combine::Sum => self.terms.iter().map(|t| t.value(p)).sum(),
            Combine::Max => self
                .terms
                .iter()
                .map(|t| t.value(p))
                .fold(f64::NEG_INFINITY, f64::max),
        }
    }

    /// Index of the first term attaining the maximum (max objectives only).
    pub fn active_term(&self, p: &HPoint) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (i, t) in self.terms.iter().enumerate() {
            let v = t.value(p);
            if best.map_or(true, |(_, b)| v > b) {
                best = Some((i, v));
            }
        }
        best.map(|(i, _)| i)
    }

    /// A Riemannian subgradient; for max objectives the lowest-index active term.
    pub fn subgradient(&self, p: &HPoint) -> TangentVec {
        let zero = TangentVec::zero(p.clone());
        match self.combine {
            Combine::Sum => self.terms.iter().fold(zero, |acc, t| acc.plus(&t.gradient(p))),
            Combine::Max => match self.active_term(p) {
                Some(i) => self.terms[i].gradient(p),
                None => zero,
            },
        }
    }

    /// Every weight multiplied by `lambda >= 0`.
    pub fn scaled(&self, lambda: f64) -> Objective {
        Objective {
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    w: NonNegative(t.w.get() * lambda),
                    anchor: t.anchor.clone(),
                    kind: t.kind,
                })
                .collect(),
            combine: self.combine,
        }
    }

    /// Minimizer over all of H^n, for the forms where it is known exactly.
    ///
    /// A positive sum of cosh terms is `-<p, sum w_i a_i>`, minimized at the
    /// normalized weighted anchor sum; a lone distance term at its anchor; the
    /// maximum of two equally weighted cosh terms at the midpoint.
    pub fn known_minimizer(&self) -> Option<HPoint> {
        let live: Vec<&Term> = self.terms.iter().filter(|t| t.w.get() > 0.0).collect();
        if live.is_empty() {
            return None;
        }
        match self.combine {
            Combine::Sum if live.iter().all(|t| t.kind == TermKind::Cosh) => {
                let n = live[0].anchor.coords().len();
                let mut acc = vec![0.0; n];
                for t in &live {
                    for (a, c) in acc.iter_mut().zip(t.anchor.coords()) {
                        *a += t.w.get() * c;
                    }
                }
                geometry::project_to_hyperboloid(&acc).ok()
            }
            _ if live.len() == 1 => Some(live[0].anchor.clone()),
            Combine::Max
                if live.len() == 2
                    && live.iter().all(|t| t.kind == TermKind::Cosh)
                    && live[0].w == live[1].w =>
            {
                Some(geometry::interpolate(&live[0].anchor, &live[1].anchor, 0.5))
            }
            _ => None,
        }
    }
}

/// Serializable description of a bifunction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BifunctionSpec {
    /// `f = 0`; its resolvent is the metric projection.
    Zero {},
    /// `f(x, y) = g(y) - g(x)`.
    ObjectiveDiff {
        terms: Vec<Term>,
        #[serde(default)]
        combine: Combine,
    },
    /// `f(x, y) = (1 + gain g(x)) (g(y) - g(x))` for a nonnegative objective `g`.
    ///
    /// Monotone because `f(x, y) + f(y, x) = -gain (g(x) - g(y))^2`, strictly
    /// negative wherever `g` separates the pair.
    GainWeighted {
        terms: Vec<Term>,
        #[serde(default)]
        combine: Combine,
        gain: NonNegative,
    },
    /// `f(x, y) = max(g(y) - g(x), c (h(y) - h(x)))`. Not monotone in
    /// general: `f(x, y) + f(y, x) = |Δg - c Δh|`.
    MaxDiff { g: Objective, h: Objective, c: NonNegative },
    /// `f(x, y) = d(x, y)`, violating monotonicity.
    Distance,
    /// `f(x, y) = -d(x, y)^2`, concave in the second argument.
    NegSquaredDistance,
}

/// A bifunction together with a positive scale factor.
#[derive(Debug, Clone, PartialEq)]
pub struct Bifunction {
    spec: BifunctionSpec,
    scale: f64,
}

impl From<BifunctionSpec> for Bifunction {
    fn from(spec: BifunctionSpec) -> Self {
        Bifunction { spec, scale: 1.0 }
    }
}

/// `f(x, y) = g(y) - g(x)`.
pub fn make_optimization_bifunction(g: Objective) -> Bifunction {
    Bifunction::from(BifunctionSpec::ObjectiveDiff {
        terms: g.terms,
        combine: g.combine,
    })
}

impl Bifunction {
    pub fn zero() -> Self {
        BifunctionSpec::Zero {}.into()
    }

    pub fn gain_weighted(g: Objective, gain: f64) -> Result<Self> {
        Ok(BifunctionSpec::GainWeighted {
            terms: g.terms,
            combine: g.combine,
            gain: NonNegative::new(gain)?,
        }
        .into())
    }

    pub fn spec(&self) -> &BifunctionSpec {
        &self.spec
    }

    pub fn scale_factor(&self) -> f64 {
        self.scale
    }

    /// `lambda f`, for `lambda > 0`.
    pub fn scaled(&self, lambda: f64) -> Result<Bifunction> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::input(format!("scale must be positive, got {lambda}")));
        }
        Ok(Bifunction {
            spec: self.spec.clone(),
            scale: self.scale * lambda,
        })
    }

    pub fn eval(&self, x: &HPoint, y: &HPoint) -> f64 {
        self.scale * self.eval_unscaled(x, y)
    }

    fn eval_unscaled(&self, x: &HPoint, y: &HPoint) -> f64 {
        match &self.spec {
            BifunctionSpec::Zero {} => 0.0,
            BifunctionSpec::ObjectiveDiff { terms, combine } => {
                let g = objective_of(terms, *combine);
                g.value(y) - g.value(x)
            }
            BifunctionSpec::GainWeighted {
                terms,
                combine,
                gain,
            } => {
                let g = objective_of(terms, *combine);
                let gx = g.value(x);
                (1.0 + gain.get() * gx) * (g.value(y) - gx)
            }
            BifunctionSpec::MaxDiff { g, h, c } => {
                (g.value(y) - g.value(x)).max(c.get() * (h.value(y) - h.value(x)))
            }
            BifunctionSpec::Distance => dist(x, y),
            BifunctionSpec::NegSquaredDistance => -dist(x, y).powi(2),
        }
    }

    /// The objective `λ g` when `f = λ (g(y) - g(x))`; `g = 0` for the zero bifunction.
    pub fn as_objective_diff(&self) -> Option<Objective> {
        match &self.spec {
            BifunctionSpec::Zero {} => Some(Objective::zero()),
            BifunctionSpec::ObjectiveDiff { terms, combine } => {
                Some(objective_of(terms, *combine).scaled(self.scale))
            }
            _ => None,
        }
    }

    /// `(λ g, gain)` for the gain-weighted family.
    pub fn as_gain_weighted(&self) -> Option<(Objective, f64)> {
        match &self.spec {
            BifunctionSpec::GainWeighted {
                terms,
                combine,
                gain,
            } => Some((objective_of(terms, *combine), gain.get())),
            _ => None,
        }
    }
}

fn objective_of(terms: &[Term], combine: Combine) -> Objective {
    Objective {
        terms: terms.to_vec(),
        combine,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Clause {
    Reflexive,
    Monotone,
    Convex,
    Hemicontinuous,
}

impl Clause {
    pub fn tolerance(self) -> f64 {
        match self {
            Clause::Reflexive | Clause::Monotone => 1e-10,
            Clause::Convex => 1e-8,
            Clause::Hemicontinuous => 1e-6,
        }
    }

    /// Violation magnitude (`>= 0`) of this clause at the given inputs.
    ///
    /// Inputs are `[x]`, `[x, y]`, `[x, y, z]` (convexity of `f(x, .)` at the
    /// midpoint of `[y, z]`), and `[x, y, w]` (hemicontinuity of `f(., w)` at
    /// `x` along `[x, y]`) respectively.
    pub fn violation(self, f: &Bifunction, pts: &[HPoint]) -> f64 {
        match self {
            Clause::Reflexive => f.eval(&pts[0], &pts[0]).abs(),
            Clause::Monotone => {
                (f.eval(&pts[0], &pts[1]) + f.eval(&pts[1], &pts[0])).max(0.0)
            }
            Clause::Convex => {
                let (x, y, z) = (&pts[0], &pts[1], &pts[2]);
                let m = geometry::interpolate(y, z, 0.5);
                (f.eval(x, &m) - 0.5 * f.eval(x, y) - 0.5 * f.eval(x, z)).max(0.0)
            }
            Clause::Hemicontinuous => {
                let (x, y, w) = (&pts[0], &pts[1], &pts[2]);
                let v = |t: f64| f.eval(&geometry::interpolate(x, y, 1.0 - t), w);
                let (v2, v3, v4) = (v(1e-3), v(1e-4), v(1e-5));
                // Two rounds of Richardson extrapolation with step ratio 10.
                let l34 = (10.0 * v4 - v3) / 9.0;
                let l23 = (10.0 * v3 - v2) / 9.0;
                let limit = (100.0 * l34 - l23) / 99.0;
                (limit - f.eval(x, w)).max(0.0)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClauseCheck {
    pub clause: Clause,
    pub passed: bool,
    pub worst_violation: f64,
    pub tolerance: f64,
    /// Inputs attaining `worst_violation`; empty when nothing was evaluated.
    pub witness: Vec<HPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub samples: usize,
    pub checks: Vec<ClauseCheck>,
}

impl ConditionReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn clause(&self, clause: Clause) -> &ClauseCheck {
        self.checks
            .iter()
            .find(|c| c.clause == clause)
            .expect("every clause is checked")
    }
}

/// Checks all four clauses on `samples` seeded draws from `region`.
///
/// Only sampled inputs are examined; a pass certifies nothing beyond them.
pub fn check_conditions(
    f: &Bifunction,
    region: &ConvexRegion,
    seed: u64,
    samples: usize,
) -> Result<ConditionReport> {
    let radius = region.enclosing_radius().unwrap_or(2.0);
    let pts = region.sample(seed, 3 * samples.max(1), radius)?;
    let triples: Vec<&[HPoint]> = pts.chunks_exact(3).take(samples).collect();
    let checks = [
        Clause::Reflexive,
        Clause::Monotone,
        Clause::Convex,
        Clause::Hemicontinuous,
    ]
    .into_iter()
    .map(|clause| {
        let arity = match clause {
            Clause::Reflexive => 1,
            Clause::Monotone => 2,
            _ => 3,
        };
        let mut worst = 0.0f64;
        let mut witness = Vec::new();
        for tri in &triples {
            let v = clause.violation(f, &tri[..arity]);
            if witness.is_empty() || v > worst {
                worst = v;
                witness = tri[..arity].to_vec();
            }
        }
        ClauseCheck {
            clause,
            passed: worst <= clause.tolerance(),
            worst_violation: worst,
            tolerance: clause.tolerance(),
            witness,
        }
    })
    .collect();
    Ok(ConditionReport { samples, checks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn polar(r: f64, a: f64) -> HPoint {
        HPoint::from_polar(r, a)
    }

    fn ball2() -> ConvexRegion {
        ConvexRegion::ball(HPoint::origin(2), 2.0).unwrap()
    }

    fn cosh_pair() -> Objective {
        Objective::sum(vec![
            Term::cosh(1.0, polar(0.8, 0.2)).unwrap(),
            Term::cosh(0.5, polar(1.0, 2.4)).unwrap(),
        ])
    }

    #[test]
    fn optimization_bifunction_examples() {
        let g = Objective::sum(vec![Term::cosh(1.0, HPoint::origin(2)).unwrap()]);
        let f = make_optimization_bifunction(g);
        let x = polar(1.0, 0.0);
        assert_eq!(f.eval(&x, &x), 0.0);
        assert_abs_diff_eq!(
            f.eval(&x, &HPoint::origin(2)),
            -0.5430806348152437,
            epsilon = 1e-14
        );
        let y = polar(0.3, 2.0);
        assert_eq!(f.eval(&x, &y) + f.eval(&y, &x), 0.0);
        assert!(Term::cosh(-1.0, x).is_err());
    }

    #[test]
    fn scaling_examples() {
        let f = make_optimization_bifunction(cosh_pair());
        assert!(f.scaled(0.0).is_err());
        assert!(f.scaled(-2.0).is_err());
        let one = f.scaled(1.0).unwrap();
        let two = f.scaled(2.0).unwrap();
        for p in ball2().sample(1, 40, 2.0).unwrap().chunks(2) {
            assert_eq!(one.eval(&p[0], &p[1]), f.eval(&p[0], &p[1]));
            assert_abs_diff_eq!(two.eval(&p[0], &p[1]), 2.0 * f.eval(&p[0], &p[1]), epsilon = 1e-12);
        }
    }

    #[test]
    fn subgradient_matches_finite_differences() {
        let objectives = [
            cosh_pair(),
            Objective::sum(vec![Term::dist(1.0, polar(0.5, 1.0)).unwrap()]),
            Objective::max(vec![
                Term::cosh(1.0, polar(0.8, 0.2)).unwrap(),
                Term::cosh(1.0, polar(1.0, 2.4)).unwrap(),
            ]),
        ];
        let p = polar(0.9, -1.3);
        for g in &objectives {
            let grad = g.subgradient(&p);
            for dir in [[0.0, 1.0, 0.0], [0.0, 0.0, 1.0]] {
                let v = TangentVec::project(&p, &dir);
                let v = v.scaled(1.0 / v.norm());
                let h = 1e-6;
                let fwd = g.value(&geometry::exp_map(&v.scaled(h)).unwrap());
                let bwd = g.value(&geometry::exp_map(&v.scaled(-h)).unwrap());
                assert_abs_diff_eq!((fwd - bwd) / (2.0 * h), grad.inner(&v), epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn known_minimizers_are_stationary() {
        let g = cosh_pair();
        let p = g.known_minimizer().unwrap();
        assert!(g.subgradient(&p).norm() < 1e-12);
        let a = polar(0.8, 0.2);
        let b = polar(1.0, 2.4);
        let m = Objective::max(vec![Term::cosh(1.0, a.clone()).unwrap(), Term::cosh(1.0, b.clone()).unwrap()]);
        let mid = m.known_minimizer().unwrap();
        assert_abs_diff_eq!(dist(&mid, &a), dist(&mid, &b), epsilon = 1e-12);
        for q in ball2().sample(3, 200, 2.0).unwrap() {
            assert!(m.value(&q) >= m.value(&mid) - 1e-12);
            assert!(g.value(&q) >= g.value(&p) - 1e-12);
        }
    }

    #[test]
    fn catalog_forms_pass_every_clause() {
        let fs = [
            Bifunction::zero(),
            make_optimization_bifunction(cosh_pair()),
            make_optimization_bifunction(Objective::sum(vec![Term::dist(1.0, polar(0.5, 1.0)).unwrap()])),
            make_optimization_bifunction(Objective::max(vec![
                Term::cosh(1.0, polar(0.8, 0.2)).unwrap(),
                Term::cosh(1.0, polar(1.0, 2.4)).unwrap(),
            ])),
            Bifunction::gain_weighted(cosh_pair(), 0.5).unwrap(),
        ];
        for f in &fs {
            let report = check_conditions(f, &ball2(), 7, 1000).unwrap();
            assert!(report.all_passed(), "{f:?}: {report:?}");
            for c in &report.checks {
                assert!(c.worst_violation <= 1e-8, "{f:?}: {c:?}");
            }
        }
    }

    #[test]
    fn gain_weighted_is_strictly_monotone_somewhere() {
        let f = Bifunction::gain_weighted(cosh_pair(), 0.5).unwrap();
        let (x, y) = (polar(1.5, 0.0), polar(0.2, 1.0));
        let sum = f.eval(&x, &y) + f.eval(&y, &x);
        let g = cosh_pair();
        assert_abs_diff_eq!(sum, -0.5 * (g.value(&x) - g.value(&y)).powi(2), epsilon = 1e-12);
        assert!(sum < -1e-3);
    }

    #[test]
    fn distance_bifunction_fails_monotonicity() {
        let f = Bifunction::from(BifunctionSpec::Distance);
        let report = check_conditions(&f, &ball2(), 1, 200).unwrap();
        let mono = report.clause(Clause::Monotone);
        assert!(!mono.passed);
        let w = &mono.witness;
        assert_abs_diff_eq!(mono.worst_violation, 2.0 * dist(&w[0], &w[1]), epsilon = 1e-12);
        assert_eq!(Clause::Monotone.violation(&f, w), mono.worst_violation);
    }

    #[test]
    fn negative_squared_distance_fails_convexity() {
        let f = Bifunction::from(BifunctionSpec::NegSquaredDistance);
        let report = check_conditions(&f, &ball2(), 2, 200).unwrap();
        let cvx = report.clause(Clause::Convex);
        assert!(!cvx.passed);
        assert_eq!(Clause::Convex.violation(&f, &cvx.witness), cvx.worst_violation);
        assert!(report.clause(Clause::Monotone).passed);
    }

    #[test]
    fn max_combination_of_differences_is_rejected() {
        let h = Objective::sum(vec![Term::cosh(1.0, polar(1.2, -2.0)).unwrap()]);
        let f = Bifunction::from(BifunctionSpec::MaxDiff {
            g: cosh_pair(),
            h,
            c: NonNegative::new(0.5).unwrap(),
        });
        let report = check_conditions(&f, &ball2(), 3, 300).unwrap();
        assert!(!report.clause(Clause::Monotone).passed);
    }

    #[test]
    fn spec_json_round_trip() {
        let text = r#"{"type":"objective-diff","terms":[{"w":1.0,"anchor":[1.0,0.0,0.0]}]}"#;
        let spec: BifunctionSpec = serde_json::from_str(text).unwrap();
        let again: BifunctionSpec = serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(spec, again);
        assert!(serde_json::from_str::<BifunctionSpec>(
            r#"{"type":"objective-diff","terms":[{"w":-1.0,"anchor":[1.0,0.0,0.0]}]}"#
        )
        .is_err());
        assert!(serde_json::from_str::<BifunctionSpec>(r#"{"type":"zero","extra":1}"#).is_err());
    }
}
