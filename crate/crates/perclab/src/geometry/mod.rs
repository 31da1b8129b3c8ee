//! The inverse correlation length as an abstract norm, and its polar
//! geometry: unit ball, polar body, polar points, surcharge cones.
//!
//! Two evaluator families are provided. Synthetic norms (scaled Euclidean,
//! a smoothed l1) have closed forms and exist for unit tests. Tabulated
//! norms carry empirically measured directional decay rates and evaluate
//! the convex positively homogeneous envelope of the table in
//! support-function form, lightly smoothed so gradients exist everywhere.

pub mod matrix;
pub mod triple;

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum NormKind {
    /// `scale * ||x||`
    Euclidean { scale: f64 },
    /// `scale * sum_i sqrt(x_i^2 + eps^2 ||x||^2)`; smooth, anisotropic,
    /// with closed-form derivatives for cross-checks.
    SmoothedL1 { scale: f64, eps: f64 },
    /// Support-function envelope of tabulated directional values.
    Tabulated {
        /// vertices of the polar polytope (after symmetry expansion)
        duals: Vec<Vec<f64>>,
        /// softmax temperature for the smoothed envelope
        temperature: f64,
        /// original rows (unit direction, value) kept for serialization
        rows: Vec<(Vec<f64>, f64)>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DirectionalNorm {
    pub d: usize,
    pub kind: NormKind,
    /// Recorded equivalence constants `c_minus ||x|| <= xi(x) <= c_plus ||x||`.
    pub c_minus: f64,
    pub c_plus: f64,
    /// Declared invariance under coordinate permutations and reflections.
    pub symmetric: bool,
}

impl DirectionalNorm {
    pub fn euclidean(d: usize, scale: f64) -> Self {
        DirectionalNorm {
            d,
            kind: NormKind::Euclidean { scale },
            c_minus: scale,
            c_plus: scale,
            symmetric: true,
        }
    }

    pub fn smoothed_l1(d: usize, scale: f64, eps: f64) -> Self {
        // per direction: sum_i sqrt(x_i^2 + eps^2) over the unit sphere is
        // minimized on axes (1 + (d-1) eps ... ) and maximized near the
        // diagonal; cheap conservative constants are fine here.
        let c_minus = scale * (1.0 + ((d - 1) as f64) * eps * eps).sqrt();
        let c_plus = scale * (d as f64) * (1.0 + eps * eps * d as f64).sqrt();
        DirectionalNorm {
            d,
            kind: NormKind::SmoothedL1 { scale, eps },
            c_minus,
            c_plus,
            symmetric: true,
        }
    }

    /// Build a tabulated norm from `(direction, value)` rows, d = 2 only.
    ///
    /// Rows are normalized, expanded through the symmetry group of the
    /// square when `symmetric` is set, and turned into the vertices of the
    /// polar polytope `{t : (t, u_j) <= v_j}`; evaluation is the support
    /// function of that polytope, softened by `temperature`.
    pub fn tabulated(
        rows_in: &[(Vec<f64>, f64)],
        temperature: f64,
        symmetric: bool,
    ) -> Result<Self> {
        if rows_in.is_empty() {
            return Err(Error::InvalidParameter("empty tabulation".into()));
        }
        let d = rows_in[0].0.len();
        if d != 2 {
            return Err(Error::InvalidParameter(
                "tabulated norms are built for d = 2".into(),
            ));
        }
        let mut rows: Vec<(Vec<f64>, f64)> = Vec::new();
        for (u, v) in rows_in {
            if *v <= 0.0 {
                return Err(Error::InvalidParameter(
                    "tabulated values must be positive".into(),
                ));
            }
            let n = norm2(u);
            if n == 0.0 {
                return Err(Error::InvalidParameter("zero direction".into()));
            }
            let unit = vec![u[0] / n, u[1] / n];
            let val = v / n;
            if symmetric {
                for (sx, sy) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                    rows.push((vec![sx * unit[0], sy * unit[1]], val));
                    rows.push((vec![sx * unit[1], sy * unit[0]], val));
                }
            } else {
                rows.push((unit, val));
            }
        }
        // dedupe by angle
        rows.sort_by(|a, b| {
            a.0[1]
                .atan2(a.0[0])
                .total_cmp(&b.0[1].atan2(b.0[0]))
                .then(a.1.total_cmp(&b.1))
        });
        rows.dedup_by(|a, b| {
            (a.0[0] - b.0[0]).abs() < 1e-12 && (a.0[1] - b.0[1]).abs() < 1e-12
        });
        if rows.len() < 3 {
            return Err(Error::InvalidParameter(
                "need at least three distinct directions".into(),
            ));
        }
        // Dual points for the support-function evaluator. A smooth fit of
        // the directional profile gives the boundary curve of the polar
        // body analytically (t(th) = g x_hat + g' x_hat_perp), and sampling
        // it densely keeps the envelope's curvature meaningful; raw
        // polytope vertices would have flat facets and useless Hessians.
        // Strongly anisotropic tables that no convex harmonic fit can
        // match fall back to the polytope-vertex construction.
        let duals = match cosine_fit_duals(&rows) {
            Some(d) => d,
            None => polytope_duals(&rows)?,
        };
        let mut xi = DirectionalNorm {
            d,
            kind: NormKind::Tabulated {
                duals,
                temperature,
                rows,
            },
            c_minus: 0.0,
            c_plus: 0.0,
            symmetric,
        };
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for u in direction_grid(2, 360) {
            let v = xi.eval(&u);
            lo = lo.min(v);
            hi = hi.max(v);
        }
        xi.c_minus = lo;
        xi.c_plus = hi;
        Ok(xi)
    }

    /// Norm value; zero iff `x = 0`.
    pub fn eval(&self, x: &[f64]) -> f64 {
        match &self.kind {
            NormKind::Euclidean { scale } => scale * norm2(x),
            NormKind::SmoothedL1 { scale, eps } => {
                let n2 = dot(x, x);
                scale
                    * x.iter()
                        .map(|xi| (xi * xi + eps * eps * n2).sqrt())
                        .sum::<f64>()
            }
            NormKind::Tabulated {
                duals, temperature, ..
            } => {
                let n = norm2(x);
                if n == 0.0 {
                    return 0.0;
                }
                let xhat: Vec<f64> = x.iter().map(|v| v / n).collect();
                // exact support value and softmax correction, evaluated on
                // the unit vector so homogeneity is exact by construction
                let vals: Vec<f64> = duals.iter().map(|w| dot(w, &xhat)).collect();
                let vmax = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let t = *temperature;
                let lse: f64 = vals.iter().map(|v| ((v - vmax) / t).exp()).sum();
                n * (vmax + t * lse.ln())
            }
        }
    }

    /// Closed-form gradient (softmax gradient for tabulated norms).
    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        if norm2(x) == 0.0 {
            return Err(Error::Degenerate("gradient at the origin".into()));
        }
        Ok(match &self.kind {
            NormKind::Euclidean { scale } => {
                let n = norm2(x);
                x.iter().map(|v| scale * v / n).collect()
            }
            NormKind::SmoothedL1 { scale, eps } => {
                let n2 = dot(x, x);
                let r: Vec<f64> = x.iter().map(|xi| (xi * xi + eps * eps * n2).sqrt()).collect();
                let s: f64 = r.iter().map(|ri| 1.0 / ri).sum();
                x.iter()
                    .enumerate()
                    .map(|(j, xj)| scale * (xj / r[j] + eps * eps * xj * s))
                    .collect()
            }
            NormKind::Tabulated {
                duals, temperature, ..
            } => {
                let n = norm2(x);
                let xhat: Vec<f64> = x.iter().map(|v| v / n).collect();
                let vals: Vec<f64> = duals.iter().map(|w| dot(w, &xhat)).collect();
                let vmax = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let t = *temperature;
                let weights: Vec<f64> = vals.iter().map(|v| ((v - vmax) / t).exp()).collect();
                let z: f64 = weights.iter().sum();
                let s = vmax + t * (z.ln());
                let mut wbar = vec![0.0; self.d];
                for (wi, w) in weights.iter().zip(duals) {
                    for a in 0..self.d {
                        wbar[a] += wi * w[a] / z;
                    }
                }
                // grad = s * xhat + (I - xhat xhat^T) wbar
                let proj = dot(&wbar, &xhat);
                (0..self.d)
                    .map(|a| s * xhat[a] + wbar[a] - proj * xhat[a])
                    .collect()
            }
        })
    }

    /// Public finite-difference gradient: central differences with
    /// step `max(1e-6, 1e-6 ||x||)`.
    pub fn gradient_fd(&self, x: &[f64]) -> Result<Vec<f64>> {
        if norm2(x) == 0.0 {
            return Err(Error::Degenerate("gradient at the origin".into()));
        }
        let h = (1e-6f64).max(1e-6 * norm2(x));
        let mut g = vec![0.0; self.d];
        let mut xp = x.to_vec();
        for a in 0..self.d {
            let keep = xp[a];
            xp[a] = keep + h;
            let fp = self.eval(&xp);
            xp[a] = keep - h;
            let fm = self.eval(&xp);
            xp[a] = keep;
            g[a] = (fp - fm) / (2.0 * h);
        }
        Ok(g)
    }

    /// Polar point `t_x` on the boundary of the polar body: `(t_x, x) = xi(x)`.
    pub fn polar_point(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.gradient(x)
    }

    /// Membership in the polar body `K`, by a quasi-uniform direction grid.
    /// Returns `(inside, margin)` with `margin = sup (t,u)/xi(u)`.
    pub fn polar_body_margin(&self, t: &[f64]) -> (bool, f64) {
        let n = default_grid_size(self.d);
        let mut margin = 0.0f64;
        for u in direction_grid(self.d, n) {
            let v = dot(t, &u) / self.eval(&u);
            margin = margin.max(v);
        }
        (margin <= 1.0 + 1e-9, margin)
    }

    pub fn in_polar_body(&self, t: &[f64]) -> bool {
        self.polar_body_margin(t).0
    }

    /// Surcharge `S_t(x) = xi(x) - (t, x)` for a boundary point `t` of `K`.
    pub fn surcharge(&self, t: &[f64], x: &[f64]) -> Result<f64> {
        let (_, margin) = self.polar_body_margin(t);
        if (margin - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidParameter(format!(
                "t must lie on the polar body boundary (margin {margin})"
            )));
        }
        Ok(self.eval(x) - dot(t, x))
    }

    /// Cone test `(t, x) >= (1 - eta) xi(x)` without the boundary guard;
    /// the guard belongs to the public `surcharge` entry point.
    pub fn in_surcharge_cone(&self, t: &[f64], eta: f64, x: &[f64]) -> bool {
        dot(t, x) >= (1.0 - eta) * self.eval(x)
    }

    /// Dual point `x_t` on the unit-ball boundary, polar to `t`:
    /// maximizes `(t, u)/xi(u)`. Grid search plus a local polish in d = 2.
    pub fn dual_point(&self, t: &[f64]) -> Result<Vec<f64>> {
        if norm2(t) == 0.0 {
            return Err(Error::Degenerate("dual point of t = 0".into()));
        }
        let n = default_grid_size(self.d);
        let mut best = (f64::NEG_INFINITY, vec![0.0; self.d]);
        for u in direction_grid(self.d, n) {
            let v = dot(t, &u) / self.eval(&u);
            if v > best.0 {
                best = (v, u);
            }
        }
        let mut u = best.1;
        if self.d == 2 {
            let mut theta = u[1].atan2(u[0]);
            let mut half = std::f64::consts::PI / n as f64;
            let score = |th: f64| {
                let c = [th.cos(), th.sin()];
                dot(t, &c) / self.eval(&c)
            };
            for _ in 0..60 {
                let (lo, hi) = (theta - half, theta + half);
                let cand = [lo, theta, hi];
                theta = cand
                    .into_iter()
                    .max_by(|a, b| score(*a).total_cmp(&score(*b)))
                    .unwrap();
                half *= 0.5;
            }
            u = vec![theta.cos(), theta.sin()];
        }
        let v = self.eval(&u);
        Ok(u.into_iter().map(|c| c / v).collect())
    }

    /// CSV rows `(direction components..., value)` for tabulated norms, or
    /// a grid sample for synthetic ones.
    pub fn to_csv_rows(&self) -> Vec<(Vec<f64>, f64)> {
        match &self.kind {
            NormKind::Tabulated { rows, .. } => rows.clone(),
            _ => direction_grid(self.d, 64)
                .into_iter()
                .map(|u| {
                    let v = self.eval(&u);
                    (u, v)
                })
                .collect(),
        }
    }
}

/// Least-squares fit of the directional profile by the square-symmetric
/// harmonics `g(th) = a0 + a4 cos 4th (+ a8 cos 8th)`, returning a dense
/// sample of the polar-body boundary `g x_hat + g' x_hat_perp`. None when
/// the fitted profile is not strictly convex (`g + g'' <= 0` somewhere).
fn cosine_fit_duals(rows: &[(Vec<f64>, f64)]) -> Option<Vec<Vec<f64>>> {
    let angles: Vec<f64> = rows.iter().map(|(u, _)| u[1].atan2(u[0])).collect();
    // distinct angles modulo the symmetry group decide how many harmonics
    // the data can support
    let mut folded: Vec<f64> = angles
        .iter()
        .map(|&a| {
            let mut t = a.abs() % (std::f64::consts::PI / 2.0);
            if t > std::f64::consts::PI / 4.0 {
                t = std::f64::consts::PI / 2.0 - t;
            }
            t
        })
        .collect();
    folded.sort_by(f64::total_cmp);
    folded.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    let n_harm = if folded.len() >= 4 { 3 } else { 2.min(folded.len()) };
    if n_harm < 1 {
        return None;
    }
    // normal equations for coefficients of [1, cos 4th, cos 8th]
    let basis = |th: f64, j: usize| match j {
        0 => 1.0,
        1 => (4.0 * th).cos(),
        _ => (8.0 * th).cos(),
    };
    let mut ata = vec![vec![0.0; n_harm]; n_harm];
    let mut atb = vec![0.0; n_harm];
    for ((_, v), &th) in rows.iter().zip(&angles) {
        for i in 0..n_harm {
            atb[i] += basis(th, i) * v;
            for j in 0..n_harm {
                ata[i][j] += basis(th, i) * basis(th, j);
            }
        }
    }
    let coef = matrix::solve(&ata, &atb)?;
    let g = |th: f64| -> f64 { (0..n_harm).map(|j| coef[j] * basis(th, j)).sum() };
    let gp = |th: f64| -> f64 {
        let mut v = 0.0;
        if n_harm > 1 {
            v += -4.0 * coef[1] * (4.0 * th).sin();
        }
        if n_harm > 2 {
            v += -8.0 * coef[2] * (8.0 * th).sin();
        }
        v
    };
    let gpp = |th: f64| -> f64 {
        let mut v = 0.0;
        if n_harm > 1 {
            v += -16.0 * coef[1] * (4.0 * th).cos();
        }
        if n_harm > 2 {
            v += -64.0 * coef[2] * (8.0 * th).cos();
        }
        v
    };
    let samples = 512;
    for i in 0..samples {
        let th = std::f64::consts::TAU * i as f64 / samples as f64;
        if g(th) + gpp(th) <= 1e-9 || g(th) <= 0.0 {
            return None;
        }
    }
    // fit quality: reject when the harmonics cannot represent the data
    let mut worst = 0.0f64;
    for ((_, v), &th) in rows.iter().zip(&angles) {
        worst = worst.max((g(th) - v).abs() / v);
    }
    if worst > 0.05 {
        return None;
    }
    Some(
        (0..samples)
            .map(|i| {
                let th = std::f64::consts::TAU * i as f64 / samples as f64;
                let (c, s) = (th.cos(), th.sin());
                vec![g(th) * c - gp(th) * s, g(th) * s + gp(th) * c]
            })
            .collect(),
    )
}

/// Feasible vertices of the polar polytope `{t : (t, u_j) <= v_j}`.
fn polytope_duals(rows: &[(Vec<f64>, f64)]) -> Result<Vec<Vec<f64>>> {
    let m = rows.len();
    let vmax = rows.iter().map(|r| r.1).fold(0.0f64, f64::max);
    let tol = 1e-9 * vmax.max(1.0);
    let mut duals: Vec<Vec<f64>> = Vec::new();
    for i in 0..m {
        for j in i + 1..m {
            let (u1, v1) = (&rows[i].0, rows[i].1);
            let (u2, v2) = (&rows[j].0, rows[j].1);
            let det = u1[0] * u2[1] - u1[1] * u2[0];
            if det.abs() < 1e-12 {
                continue;
            }
            let w = vec![
                (v1 * u2[1] - v2 * u1[1]) / det,
                (u1[0] * v2 - u2[0] * v1) / det,
            ];
            if rows.iter().all(|(u, v)| dot(&w, u) <= v + tol)
                && !duals
                    .iter()
                    .any(|d| (d[0] - w[0]).abs() < 1e-12 && (d[1] - w[1]).abs() < 1e-12)
            {
                duals.push(w);
            }
        }
    }
    if duals.is_empty() {
        return Err(Error::InvalidParameter(
            "tabulation has no feasible polar vertices".into(),
        ));
    }
    Ok(duals)
}

pub fn default_grid_size(d: usize) -> usize {
    match d {
        2 => 720,
        3 => 2562,
        _ => 4096,
    }
}

/// Quasi-uniform unit directions: uniform angles in d = 2, a Fibonacci
/// sphere in d = 3, a seeded pseudo-uniform set plus the axes otherwise.
pub fn direction_grid(d: usize, n: usize) -> Vec<Vec<f64>> {
    match d {
        2 => (0..n)
            .map(|i| {
                let th = std::f64::consts::TAU * i as f64 / n as f64;
                vec![th.cos(), th.sin()]
            })
            .collect(),
        3 => {
            let phi = std::f64::consts::PI * (3.0 - 5.0f64.sqrt());
            (0..n)
                .map(|i| {
                    let y = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
                    let r = (1.0 - y * y).sqrt();
                    let th = phi * i as f64;
                    vec![r * th.cos(), y, r * th.sin()]
                })
                .collect()
        }
        _ => {
            let mut out: Vec<Vec<f64>> = Vec::with_capacity(n + 2 * d);
            for a in 0..d {
                let mut e = vec![0.0; d];
                e[a] = 1.0;
                out.push(e.clone());
                e[a] = -1.0;
                out.push(e);
            }
            let mut s = crate::rng::KeyedStream::new(0x9eed5, 0);
            while out.len() < n {
                let x: Vec<f64> = (0..d).map(|_| s.next_normal()).collect();
                let r = norm2(&x);
                if r > 1e-9 {
                    out.push(x.into_iter().map(|v| v / r).collect());
                }
            }
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euclidean_345() {
        let xi = DirectionalNorm::euclidean(2, 1.0);
        assert_eq!(xi.eval(&[3.0, 4.0]), 5.0);
        assert_eq!(xi.eval(&[0.0, 0.0]), 0.0);
    }

    #[test]
    fn gradient_fd_matches_analytic_on_smoothed_l1() {
        let xi = DirectionalNorm::smoothed_l1(2, 1.0, 0.1);
        let x = [1.0, 1.0];
        let fd = xi.gradient_fd(&x).unwrap();
        let an = xi.gradient(&x).unwrap();
        for a in 0..2 {
            assert!((fd[a] - an[a]).abs() < 1e-5, "{fd:?} vs {an:?}");
        }
        // closed form at (1,1): each component sqrt(1 + 2 eps^2)
        let expect = (1.0f64 + 2.0 * 0.01).sqrt();
        assert!((an[0] - expect).abs() < 1e-12);
        assert!((an[1] - expect).abs() < 1e-12);
    }

    #[test]
    fn euler_identity_on_gradients() {
        let xi = DirectionalNorm::smoothed_l1(2, 0.8, 0.07);
        let mut s = crate::rng::KeyedStream::new(11, 0);
        for _ in 0..200 {
            let x = [4.0 * s.next_unit() - 2.0, 4.0 * s.next_unit() - 2.0];
            if norm2(&x) < 1e-3 {
                continue;
            }
            let g = xi.gradient_fd(&x).unwrap();
            let lhs = dot(&g, &x);
            let rhs = xi.eval(&x);
            assert!((lhs - rhs).abs() <= 1e-6 * rhs.max(1e-12), "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn gradient_is_homogeneous_of_order_zero() {
        let xi = DirectionalNorm::smoothed_l1(2, 1.0, 0.05);
        let x = [0.4, -1.3];
        let x2 = [0.8, -2.6];
        let g1 = xi.gradient_fd(&x).unwrap();
        let g2 = xi.gradient_fd(&x2).unwrap();
        for a in 0..2 {
            assert!((g1[a] - g2[a]).abs() < 1e-6);
        }
    }

    #[test]
    fn polar_point_of_euclidean_is_radial() {
        let c = 1.7;
        let xi = DirectionalNorm::euclidean(2, c);
        let t = xi.polar_point(&[1.0, 0.0]).unwrap();
        assert!((t[0] - c).abs() < 1e-9 && t[1].abs() < 1e-12);
        // reflected input gives reflected polar point
        let tr = xi.polar_point(&[-1.0, 0.0]).unwrap();
        assert!((tr[0] + c).abs() < 1e-9);
    }

    #[test]
    fn polar_body_membership_euclidean() {
        let c = 2.0;
        let xi = DirectionalNorm::euclidean(2, c);
        // K is the ball of radius c
        let (inside, m0) = xi.polar_body_margin(&[0.0, 0.0]);
        assert!(inside && m0 == 0.0);
        assert!(xi.in_polar_body(&[c * 0.999, 0.0]));
        let (out, margin) = xi.polar_body_margin(&[2.0 * c, 0.0]);
        assert!(!out);
        assert!((margin - 2.0).abs() < 1e-3);
    }

    #[test]
    fn surcharge_nonnegative_and_zero_at_dual_point() {
        let xi = DirectionalNorm::euclidean(2, 1.0);
        let t = [1.0, 0.0];
        let xt = xi.dual_point(&t).unwrap();
        let s0 = xi.surcharge(&t, &xt).unwrap();
        assert!(s0.abs() < 1e-9);
        let mut s = crate::rng::KeyedStream::new(5, 0);
        for _ in 0..100 {
            let y = [2.0 * s.next_unit() - 1.0, 2.0 * s.next_unit() - 1.0];
            assert!(xi.surcharge(&t, &y).unwrap() >= -1e-9);
        }
    }

    #[test]
    fn eta_one_cone_accepts_everything_forward() {
        let xi = DirectionalNorm::euclidean(2, 1.0);
        let t = [1.0, 0.0];
        assert!(xi.in_surcharge_cone(&t, 1.0, &[0.1, 5.0]));
        assert!(xi.in_surcharge_cone(&t, 1.0, &[3.0, -4.0]));
        assert!(!xi.in_surcharge_cone(&t, 1.0, &[-0.1, 1.0]));
    }

    #[test]
    fn tabulated_reproduces_euclidean_circle() {
        let rows: Vec<(Vec<f64>, f64)> = (0..16)
            .map(|i| {
                let th = std::f64::consts::TAU * i as f64 / 16.0;
                (vec![th.cos(), th.sin()], 1.0)
            })
            .collect();
        let xi = DirectionalNorm::tabulated(&rows, 1e-3, false).unwrap();
        // polygon support inscribes the circle within ~ sec(pi/16) - 1
        for u in direction_grid(2, 40) {
            let v = xi.eval(&u);
            assert!(v > 0.97 && v < 1.03, "v = {v}");
        }
        // exact homogeneity by construction
        let a = xi.eval(&[0.3, 0.4]);
        let b = xi.eval(&[0.6, 0.8]);
        assert!((2.0 * a - b).abs() < 1e-12);
    }

    #[test]
    fn tabulated_symmetry_expansion() {
        let rows = vec![
            (vec![1.0, 0.0], 1.0),
            (vec![std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2], 1.2),
        ];
        let xi = DirectionalNorm::tabulated(&rows, 1e-3, true).unwrap();
        let v1 = xi.eval(&[0.6, 0.8]);
        for w in [[-0.6, 0.8], [0.6, -0.8], [0.8, 0.6], [-0.8, -0.6]] {
            assert!((xi.eval(&w) - v1).abs() < 1e-9);
        }
    }
}
