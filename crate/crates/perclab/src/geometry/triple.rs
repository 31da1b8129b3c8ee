//! The three-point potential: sum of norm distances to three anchors, its
//! minimizer (the predicted junction location), Hessian, and the
//! admissibility test that keeps the minimizer away from the anchors.

use super::matrix::{self, Matrix};
use super::DirectionalNorm;
use crate::error::{Error, Result};
use crate::rng::KeyedStream;
use serde::{Deserialize, Serialize};

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Potential `phi(y) = sum_i xi(y - x_i)`.
pub fn phi(xi: &DirectionalNorm, anchors: &[Vec<f64>; 3], y: &[f64]) -> f64 {
    anchors.iter().map(|x| xi.eval(&sub(y, x))).sum()
}

fn phi_gradient(xi: &DirectionalNorm, anchors: &[Vec<f64>; 3], y: &[f64]) -> Result<Vec<f64>> {
    let mut g = vec![0.0; y.len()];
    for x in anchors {
        let gi = xi.gradient(&sub(y, x))?;
        for a in 0..y.len() {
            g[a] += gi[a];
        }
    }
    Ok(g)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TripleConfig {
    pub anchors: [Vec<f64>; 3],
    /// Minimizer of the potential; at the colliding anchor when degenerate.
    pub x0: Vec<f64>,
    pub admissible: bool,
    /// Polar points of `x_i - x0`, present when admissible.
    pub polar: Option<[Vec<f64>; 3]>,
    /// Hessian of the potential at the minimizer, present when admissible.
    pub hessian: Option<Matrix>,
    /// `|grad phi(x0)| / max_i xi(x_i - x0)` at exit.
    pub gradient_residual: f64,
}

/// Diagnostics bundled with a finite-difference Hessian.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HessianReport {
    pub matrix: Matrix,
    pub min_eigenvalue: f64,
    /// max over the three summands of the relative defect in
    /// `H_xi(2 y) = H_xi(y) / 2`.
    pub homogeneity_defect: f64,
}

fn check_distinct(anchors: &[Vec<f64>; 3]) -> Result<f64> {
    let mut scale = 0.0f64;
    for i in 0..3 {
        for j in i + 1..3 {
            let d = norm2(&sub(&anchors[i], &anchors[j]));
            if d == 0.0 {
                return Err(Error::SitesNotDistinct);
            }
            scale = scale.max(d);
        }
    }
    Ok(scale)
}

/// Minimize the potential by damped Newton from the centroid, with a
/// gradient-descent fallback when the local Hessian is unusable. A
/// minimizer that lands within `1e-6 * scale` of an anchor is reported as
/// the degenerate Fermat case (`admissible = false`, `x0` at that anchor).
pub fn minimize_phi(xi: &DirectionalNorm, anchors: &[Vec<f64>; 3]) -> Result<TripleConfig> {
    let d = anchors[0].len();
    let scale = check_distinct(anchors)?;
    let collide_tol = 1e-6 * scale;

    let mut y: Vec<f64> = (0..d)
        .map(|a| (anchors[0][a] + anchors[1][a] + anchors[2][a]) / 3.0)
        .collect();
    // a centroid sitting exactly on an anchor (collinear symmetric data)
    // gives an undefined gradient; nudge off it
    if nearest_anchor(anchors, &y).1 < 1e-12 * scale {
        y[0] += 1e-3 * scale;
    }

    let fd_step = 1e-7 * scale;
    let mut degenerate_at: Option<usize> = None;
    for _iter in 0..500 {
        let (near, dist) = nearest_anchor(anchors, &y);
        if dist <= collide_tol {
            degenerate_at = Some(near);
            break;
        }
        let g = phi_gradient(xi, anchors, &y)?;
        let residual_scale = anchors
            .iter()
            .map(|x| xi.eval(&sub(x, &y)))
            .fold(0.0f64, f64::max);
        if norm2(&g) <= 1e-8 * residual_scale {
            break;
        }
        // finite-difference Hessian of the gradient
        let mut h: Matrix = vec![vec![0.0; d]; d];
        let mut yp = y.clone();
        let mut ok = true;
        for a in 0..d {
            let keep = yp[a];
            yp[a] = keep + fd_step;
            let gp = phi_gradient(xi, anchors, &yp);
            yp[a] = keep - fd_step;
            let gm = phi_gradient(xi, anchors, &yp);
            yp[a] = keep;
            match (gp, gm) {
                (Ok(gp), Ok(gm)) => {
                    for b in 0..d {
                        h[b][a] = (gp[b] - gm[b]) / (2.0 * fd_step);
                    }
                }
                _ => {
                    ok = false;
                    break;
                }
            }
        }
        let step = if ok {
            matrix::transpose_sym(&mut h);
            matrix::solve(&h, &g.iter().map(|v| -v).collect::<Vec<_>>())
        } else {
            None
        };
        let mut dir = match step {
            Some(s) if dot(&s, &g) < 0.0 => s,
            _ => g.iter().map(|v| -v * scale / (1.0 + norm2(&g))).collect(),
        };
        // backtracking line search
        let f0 = phi(xi, anchors, &y);
        let slope = dot(&dir, &g);
        let mut t = 1.0f64;
        let mut accepted = false;
        for _ in 0..60 {
            let cand: Vec<f64> = (0..d).map(|a| y[a] + t * dir[a]).collect();
            if phi(xi, anchors, &cand) <= f0 + 1e-4 * t * slope {
                y = cand;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            // try a pure gradient nibble before giving up
            dir = g.iter().map(|v| -v).collect();
            let mut t2 = 1e-3 * scale / norm2(&g).max(1e-300);
            let mut moved = false;
            for _ in 0..40 {
                let cand: Vec<f64> = (0..d).map(|a| y[a] + t2 * dir[a]).collect();
                if phi(xi, anchors, &cand) < f0 {
                    y = cand;
                    moved = true;
                    break;
                }
                t2 *= 0.5;
            }
            if !moved {
                break;
            }
        }
    }

    if degenerate_at.is_none() {
        let (near, dist) = nearest_anchor(anchors, &y);
        if dist <= collide_tol {
            degenerate_at = Some(near);
        }
    }

    if let Some(i) = degenerate_at {
        return Ok(TripleConfig {
            anchors: anchors.clone(),
            x0: anchors[i].clone(),
            admissible: false,
            polar: None,
            hessian: None,
            gradient_residual: f64::NAN,
        });
    }

    let g = phi_gradient(xi, anchors, &y)?;
    let residual_scale = anchors
        .iter()
        .map(|x| xi.eval(&sub(x, &y)))
        .fold(0.0f64, f64::max);
    let residual = norm2(&g) / residual_scale.max(1e-300);
    let polar = [
        xi.polar_point(&sub(&anchors[0], &y))?,
        xi.polar_point(&sub(&anchors[1], &y))?,
        xi.polar_point(&sub(&anchors[2], &y))?,
    ];
    let hess = phi_hessian(xi, &y, anchors)?;
    Ok(TripleConfig {
        anchors: anchors.clone(),
        x0: y,
        admissible: true,
        polar: Some(polar),
        hessian: Some(hess.matrix),
        gradient_residual: residual,
    })
}

fn nearest_anchor(anchors: &[Vec<f64>; 3], y: &[f64]) -> (usize, f64) {
    (0..3)
        .map(|i| (i, norm2(&sub(&anchors[i], y))))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap()
}

/// Second-order central differences of the potential at `x0`, step
/// `1e-4 * scale`, symmetrized, with a PSD check and the order minus one
/// homogeneity check on the three norm-Hessian summands.
pub fn phi_hessian(
    xi: &DirectionalNorm,
    x0: &[f64],
    anchors: &[Vec<f64>; 3],
) -> Result<HessianReport> {
    let d = x0.len();
    let scale = anchors
        .iter()
        .map(|x| norm2(&sub(x, x0)))
        .fold(f64::INFINITY, f64::min);
    let collide_tol = 1e-6 * check_distinct(anchors)?;
    if scale <= collide_tol {
        return Err(Error::Degenerate(
            "Hessian requested at an anchor collision".into(),
        ));
    }
    let h = 1e-4 * scale;
    let f = |y: &[f64]| phi(xi, anchors, y);
    let mut m: Matrix = vec![vec![0.0; d]; d];
    let f0 = f(x0);
    let mut yp = x0.to_vec();
    for a in 0..d {
        let keep = yp[a];
        yp[a] = keep + h;
        let fp = f(&yp);
        yp[a] = keep - h;
        let fm = f(&yp);
        yp[a] = keep;
        m[a][a] = (fp - 2.0 * f0 + fm) / (h * h);
    }
    for a in 0..d {
        for b in a + 1..d {
            let probe = |sa: f64, sb: f64| {
                let mut y = x0.to_vec();
                y[a] += sa * h;
                y[b] += sb * h;
                f(&y)
            };
            let v =
                (probe(1.0, 1.0) - probe(1.0, -1.0) - probe(-1.0, 1.0) + probe(-1.0, -1.0))
                    / (4.0 * h * h);
            m[a][b] = v;
            m[b][a] = v;
        }
    }
    let eig = matrix::sym_eigenvalues(&m);
    let min_eig = eig[0];
    let tr = matrix::trace(&m);
    if min_eig < -1e-8 * tr.abs() {
        return Err(Error::Degenerate(format!(
            "potential Hessian not PSD: min eigenvalue {min_eig}"
        )));
    }

    // order -1 homogeneity of the norm Hessian on each summand
    let mut defect = 0.0f64;
    for x in anchors {
        let y1 = sub(x0, x);
        let h1 = norm_hessian_fd(xi, &y1, 1e-4 * norm2(&y1));
        let y2: Vec<f64> = y1.iter().map(|v| 2.0 * v).collect();
        let h2 = norm_hessian_fd(xi, &y2, 1e-4 * norm2(&y2));
        let n1 = matrix::sym_operator_norm(&h1);
        let diff = matrix::sub(&matrix::scale(&h1, 0.5), &h2);
        if n1 > 1e-12 {
            defect = defect.max(matrix::sym_operator_norm(&diff) / (0.5 * n1));
        }
    }

    Ok(HessianReport {
        matrix: m,
        min_eigenvalue: min_eig,
        homogeneity_defect: defect,
    })
}

fn norm_hessian_fd(xi: &DirectionalNorm, y: &[f64], h: f64) -> Matrix {
    let d = y.len();
    let f = |z: &[f64]| xi.eval(z);
    let mut m: Matrix = vec![vec![0.0; d]; d];
    let f0 = f(y);
    for a in 0..d {
        let mut yp = y.to_vec();
        yp[a] += h;
        let fp = f(&yp);
        yp[a] -= 2.0 * h;
        let fm = f(&yp);
        m[a][a] = (fp - 2.0 * f0 + fm) / (h * h);
    }
    for a in 0..d {
        for b in a + 1..d {
            let probe = |sa: f64, sb: f64| {
                let mut z = y.to_vec();
                z[a] += sa * h;
                z[b] += sb * h;
                f(&z)
            };
            let v =
                (probe(1.0, 1.0) - probe(1.0, -1.0) - probe(-1.0, 1.0) + probe(-1.0, -1.0))
                    / (4.0 * h * h);
            m[a][b] = v;
            m[b][a] = v;
        }
    }
    m
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct X3Report {
    pub accepted: bool,
    /// `u_i = sum_{j != i} grad xi(x_j - x_i)` and its polar-body margin.
    pub u: [Vec<f64>; 3],
    pub margins: [f64; 3],
}

/// Membership in the admissible class: every `u_i` must fall outside the
/// polar body (margin > 1), which keeps the minimizer off the anchors.
pub fn in_x3_prime(xi: &DirectionalNorm, anchors: &[Vec<f64>; 3]) -> Result<X3Report> {
    check_distinct(anchors)?;
    let d = anchors[0].len();
    let mut u: [Vec<f64>; 3] = [vec![0.0; d], vec![0.0; d], vec![0.0; d]];
    let mut margins = [0.0f64; 3];
    let mut accepted = true;
    for i in 0..3 {
        for j in 0..3 {
            if j == i {
                continue;
            }
            let g = xi.gradient(&sub(&anchors[j], &anchors[i]))?;
            for a in 0..d {
                u[i][a] += g[a];
            }
        }
        let (inside, margin) = xi.polar_body_margin(&u[i]);
        margins[i] = margin;
        if inside {
            accepted = false;
        }
    }
    Ok(X3Report {
        accepted,
        u,
        margins,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProbeResult {
    pub min_ratio: f64,
    pub samples: usize,
    pub radius: f64,
}

/// Empirical strict-convexity constant: over random `y` in the ball of
/// radius `r` around the minimizer, the smallest value of
/// `(phi(x0+y) - phi(x0)) / sum_i |P_i^perp y|^2`, where `P_i^perp`
/// projects onto the hyperplane orthogonal to the polar direction `t_i`.
pub fn quadratic_bound_probe(
    xi: &DirectionalNorm,
    triple: &TripleConfig,
    radius: f64,
    samples: usize,
    seed: u64,
) -> Result<ProbeResult> {
    if !triple.admissible {
        return Err(Error::Degenerate(
            "quadratic bound probe needs an admissible triple".into(),
        ));
    }
    let polar = triple.polar.as_ref().unwrap();
    let d = triple.x0.len();
    let that: Vec<Vec<f64>> = polar
        .iter()
        .map(|t| {
            let n = norm2(t);
            t.iter().map(|v| v / n).collect()
        })
        .collect();
    let f0 = phi(xi, &triple.anchors, &triple.x0);
    let mut stream = KeyedStream::new(seed, 0);
    let mut min_ratio = f64::INFINITY;
    let mut used = 0usize;
    while used < samples {
        let ball = stream.next_in_ball(d);
        let y: Vec<f64> = ball.iter().map(|v| v * radius).collect();
        let mut denom = 0.0;
        for t in &that {
            let proj = dot(&y, t);
            let perp2 = dot(&y, &y) - proj * proj;
            denom += perp2.max(0.0);
        }
        if denom < 1e-30 {
            continue;
        }
        let z: Vec<f64> = (0..d).map(|a| triple.x0[a] + y[a]).collect();
        let ratio = (phi(xi, &triple.anchors, &z) - f0) / denom;
        min_ratio = min_ratio.min(ratio);
        used += 1;
    }
    Ok(ProbeResult {
        min_ratio,
        samples: used,
        radius,
    })
}
