//! Poincaré-disk SVG rendering for two-dimensional runs.

use std::fmt::Write;

use hypequil::geometry::{boost_from_origin, minkowski_form};
use hypequil::{ConvexRegion, HPoint};

const SIZE: f64 = 420.0;
const SCALE: f64 = 200.0;
const OUTLINE_SAMPLES: usize = 256;
/// Geodesic boundary lines are drawn for parameters in `[-T, T]`.
const LINE_EXTENT: f64 = 12.0;

pub struct PlotScene<'a> {
    pub region: &'a ConvexRegion,
    pub x: Option<&'a HPoint>,
    pub z: Option<&'a HPoint>,
    /// Iterates drawn as a polyline, e.g. a PPA trace.
    pub path: &'a [HPoint],
}

fn to_screen(p: &HPoint) -> (f64, f64) {
    let d = p.to_poincare();
    (SIZE / 2.0 + SCALE * d[0], SIZE / 2.0 - SCALE * d[1])
}

fn raw_to_screen(c: &[f64]) -> (f64, f64) {
    let s = 1.0 + c[0];
    (SIZE / 2.0 + SCALE * c[1] / s, SIZE / 2.0 - SCALE * c[2] / s)
}

fn polyline(pts: &[(f64, f64)], closed: bool, style: &str) -> String {
    let coords: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.3},{y:.3}")).collect();
    let tag = if closed { "polygon" } else { "polyline" };
    format!("<{tag} points=\"{}\" {style}/>\n", coords.join(" "))
}

/// Circle of hyperbolic radius `r` about `c`.
fn circle_outline(c: &HPoint, r: f64) -> Vec<(f64, f64)> {
    (0..OUTLINE_SAMPLES)
        .map(|i| {
            let a = std::f64::consts::TAU * i as f64 / OUTLINE_SAMPLES as f64;
            let local = [r.cosh(), r.sinh() * a.cos(), r.sinh() * a.sin()];
            raw_to_screen(&boost_from_origin(c, &local))
        })
        .collect()
}

/// The geodesic `{<x, n> = 0}` in H^2.
fn geodesic_line(n: &[f64]) -> Vec<(f64, f64)> {
    let dot = |u: &[f64], v: &[f64]| minkowski_form(u, v).unwrap_or(0.0);
    let e = |i: usize| {
        let mut v = vec![0.0; 3];
        v[i] = 1.0;
        v
    };
    // Timelike unit a and spacelike unit b spanning n's orthogonal plane.
    let e0 = e(0);
    let k = dot(&e0, n);
    let scale = (1.0 + k * k).sqrt();
    let a: Vec<f64> = e0.iter().zip(n).map(|(ei, ni)| (ei - k * ni) / scale).collect();
    let candidates = [e(1), e(2)].map(|v| {
        let (va, vn) = (dot(&v, &a), dot(&v, n));
        let w: Vec<f64> = (0..3).map(|i| v[i] + va * a[i] - vn * n[i]).collect();
        let norm = dot(&w, &w).max(0.0).sqrt();
        (norm, w)
    });
    let (norm, w) = if candidates[0].0 >= candidates[1].0 { &candidates[0] } else { &candidates[1] };
    let b: Vec<f64> = w.iter().map(|c| c / norm).collect();
    (0..=OUTLINE_SAMPLES)
        .map(|i| {
            let t = -LINE_EXTENT + 2.0 * LINE_EXTENT * i as f64 / OUTLINE_SAMPLES as f64;
            let p: Vec<f64> = (0..3).map(|j| t.cosh() * a[j] + t.sinh() * b[j]).collect();
            raw_to_screen(&p)
        })
        .collect()
}

fn region_svg(region: &ConvexRegion, out: &mut String) {
    match region {
        ConvexRegion::Ball { center, radius } => out.push_str(&polyline(
            &circle_outline(center, *radius),
            true,
            "fill=\"#dde8f5\" stroke=\"#3a6ea5\" stroke-width=\"1.2\"",
        )),
        ConvexRegion::HalfSpace { normal } => out.push_str(&polyline(
            &geodesic_line(normal),
            false,
            "fill=\"none\" stroke=\"#3a6ea5\" stroke-width=\"1.2\"",
        )),
        ConvexRegion::Intersection { members, .. } => {
            for m in members {
                region_svg(m, out);
            }
        }
        ConvexRegion::WholeSpace { .. } => {}
    }
}

fn marker(p: &HPoint, color: &str, label: &str) -> String {
    let (x, y) = to_screen(p);
    format!(
        "<circle cx=\"{x:.3}\" cy=\"{y:.3}\" r=\"3.5\" fill=\"{color}\"/>\n\
         <text x=\"{:.3}\" y=\"{:.3}\" font-size=\"12\" font-family=\"sans-serif\">{label}</text>\n",
        x + 5.0,
        y - 5.0
    )
}

impl PlotScene<'_> {
    /// Deterministic SVG: fixed precision, no timestamps or random ids.
    pub fn to_svg(&self) -> String {
        let mut s = String::new();
        let c = SIZE / 2.0;
        let _ = writeln!(
            s,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SIZE}\" height=\"{SIZE}\" viewBox=\"0 0 {SIZE} {SIZE}\">"
        );
        let _ = writeln!(s, "<rect width=\"{SIZE}\" height=\"{SIZE}\" fill=\"white\"/>");
        let _ = writeln!(s, "<clipPath id=\"disk\"><circle cx=\"{c}\" cy=\"{c}\" r=\"{SCALE}\"/></clipPath>");
        let _ = writeln!(s, "<g clip-path=\"url(#disk)\">");
        region_svg(self.region, &mut s);
        if !self.path.is_empty() {
            let mut pts: Vec<(f64, f64)> = self.x.map(to_screen).into_iter().collect();
            pts.extend(self.path.iter().map(to_screen));
            s.push_str(&polyline(&pts, false, "fill=\"none\" stroke=\"#777\" stroke-width=\"0.8\""));
            for p in self.path {
                let (x, y) = to_screen(p);
                let _ = writeln!(s, "<circle cx=\"{x:.3}\" cy=\"{y:.3}\" r=\"1.5\" fill=\"#777\"/>");
            }
        }
        s.push_str("</g>\n");
        let _ = writeln!(
            s,
            "<circle cx=\"{c}\" cy=\"{c}\" r=\"{SCALE}\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>"
        );
        if let Some(x) = self.x {
            s.push_str(&marker(x, "#1f6fd1", "x"));
        }
        if let Some(z) = self.z {
            s.push_str(&marker(z, "#d1361f", "z"));
        }
        s.push_str("</svg>\n");
        s
    }
}
