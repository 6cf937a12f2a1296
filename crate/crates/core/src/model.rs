//! Proximal linearized models shared by the descent solver and projections.

use nalgebra::{DMatrix, DVector};

use crate::geometry::TangentVec;

/// Beyond this many model rows the dual is solved iteratively.
const MAX_ACTIVE_SET_ROWS: usize = 12;

/// Euclidean projection onto the probability simplex.
fn project_simplex(v: &mut [f64]) {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut acc = 0.0;
    let mut theta = 0.0;
    for (i, ui) in u.iter().enumerate() {
        acc += ui;
        let t = (acc - 1.0) / (i + 1) as f64;
        if ui - t > 0.0 {
            theta = t;
        }
    }
    for x in v.iter_mut() {
        *x = (*x - theta).max(0.0);
    }
}

/// Step of the proximal model `min_d max_i (F_i + <G_i, d>) + |d|^2 / (2 s)`
/// subject to the linearized constraints `c_j + <N_j, d> <= 0`, computed from
/// its dual `max sum lambda_i F_i + sum mu_j c_j - s/2 |sum lambda_i G_i + sum mu_j N_j|^2`
/// over `lambda` in the simplex and `mu >= 0`.
pub(crate) fn max_model_step(vals: &[f64], grads: &[TangentVec], cons: &[(f64, TangentVec)], s: f64) -> TangentVec {
    let m = vals.len();
    let rows: Vec<&TangentVec> = grads.iter().chain(cons.iter().map(|(_, n)| n)).collect();
    let lin: Vec<f64> = vals.iter().cloned().chain(cons.iter().map(|(c, _)| *c)).collect();
    let n = rows.len();
    let gram: Vec<Vec<f64>> = rows
        .iter()
        .map(|a| rows.iter().map(|b| a.inner(b)).collect())
        .collect();
    let combine = |dual: &[f64]| {
        let mut d = TangentVec::zero(grads[0].base().clone());
        for (l, g) in dual.iter().zip(&rows) {
            d = d.plus(&g.scaled(-s * l));
        }
        d
    };
    if n <= MAX_ACTIVE_SET_ROWS {
        if let Some(dual) = active_set_dual(&lin, &gram, m, grads[0].base().dim(), s) {
            return combine(&dual);
        }
    }
    let trace: f64 = (0..n).map(|i| gram[i][i]).sum();
    let top = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut dual: Vec<f64> = lin
        .iter()
        .enumerate()
        .map(|(i, v)| if i < m && *v == top { 1.0 } else { 0.0 })
        .collect();
    let total: f64 = dual[..m].iter().sum();
    dual[..m].iter_mut().for_each(|l| *l /= total);
    let project = |v: &mut [f64]| {
        project_simplex(&mut v[..m]);
        v[m..].iter_mut().for_each(|u| *u = u.max(0.0));
    };
    if trace > 0.0 {
        let step = 1.0 / (s * trace);
        // Accelerated projected gradient ascent on the concave dual.
        let mut prev = dual.clone();
        for k in 0..4000 {
            let beta = k as f64 / (k as f64 + 3.0);
            let y: Vec<f64> = dual.iter().zip(&prev).map(|(l, p)| l + beta * (l - p)).collect();
            let mut next: Vec<f64> = (0..n)
                .map(|i| {
                    let gl: f64 = (0..n).map(|j| gram[i][j] * y[j]).sum();
                    y[i] + step * (lin[i] - s * gl)
                })
                .collect();
            project(&mut next);
            let change: f64 = next.iter().zip(&dual).map(|(a, b)| (a - b).abs()).sum();
            prev = std::mem::replace(&mut dual, next);
            if change < 1e-15 {
                break;
            }
        }
    }
    combine(&dual)
}

/// Exact dual of the model by enumerating active sets: the first `m` rows are
/// objective pieces, the rest constraints. `None` if no candidate set passes
/// the KKT checks, which only happens through rounding.
fn active_set_dual(lin: &[f64], gram: &[Vec<f64>], m: usize, dim: usize, s: f64) -> Option<Vec<f64>> {
    let n = lin.len();
    let scale = 1.0 + lin.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let tol = 1e-10 * scale;
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 1u32..(1 << n) {
        let set: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        let pieces = set.iter().filter(|i| **i < m).count();
        if pieces == 0 || set.len() > dim + 1 {
            continue;
        }
        // Unknowns: the multipliers of `set`, then the level `t`.
        let q = set.len();
        let mut a = DMatrix::<f64>::zeros(q + 1, q + 1);
        let mut b = DVector::<f64>::zeros(q + 1);
        for (r, &i) in set.iter().enumerate() {
            for (c, &j) in set.iter().enumerate() {
                a[(r, c)] = s * gram[i][j];
            }
            if i < m {
                a[(r, q)] = 1.0;
            }
            b[r] = lin[i];
            if i < m {
                a[(q, r)] = 1.0;
            }
        }
        b[q] = 1.0;
        let Some(sol) = a.lu().solve(&b) else { continue };
        if sol.iter().take(q).any(|v| !v.is_finite() || *v < -1e-12) {
            continue;
        }
        let mut dual = vec![0.0; n];
        for (r, &i) in set.iter().enumerate() {
            dual[i] = sol[r].max(0.0);
        }
        // <row_i, d> with d = -s sum dual_j row_j.
        let slope = |i: usize| -> f64 { -s * (0..n).map(|j| gram[i][j] * dual[j]).sum::<f64>() };
        let level = (0..m).map(|i| lin[i] + slope(i)).fold(f64::NEG_INFINITY, f64::max);
        let feasible = (m..n).all(|j| lin[j] + slope(j) <= tol)
            && set.iter().filter(|i| **i < m).all(|&i| lin[i] + slope(i) >= level - tol);
        if !feasible {
            continue;
        }
        let norm2 = s * s * (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| dual[i] * dual[j] * gram[i][j]).sum::<f64>();
        let value = level + norm2 / (2.0 * s);
        if best.as_ref().map_or(true, |(v, _)| value < *v - tol) {
            best = Some((value, dual));
        }
    }
    best.map(|(_, d)| d)
}

