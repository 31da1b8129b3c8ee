//! Conditioned junction fluctuations against the Gaussian predicted by the
//! Hessian of the three-point potential.

use super::Scratch;
use crate::error::{Error, Result};
use crate::events::junction_indices;
use crate::geometry::matrix::{self, Matrix};
use crate::geometry::triple::{in_x3_prime, minimize_phi};
use crate::geometry::DirectionalNorm;
use crate::lattice::LatticeBox;
use crate::rng::KeyedStream;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LltReport {
    pub n_scale: i64,
    pub p: f64,
    pub anchors: [Vec<i64>; 3],
    /// minimizer of the potential for the realized anchors, lattice units
    pub x0: Vec<f64>,
    pub hessian_lattice: Matrix,
    /// predicted covariance of `y = (k - x0)/sqrt(N)`
    pub predicted_cov: Matrix,
    pub trials: u64,
    /// trials where the triple connection held
    pub conditioned: u64,
    /// conditioned trials that produced at least one junction site
    pub with_junction: u64,
    pub mean_y: Vec<f64>,
    pub cov_y: Matrix,
    /// operator-norm relative error of `cov_y` against the prediction
    pub cov_rel_error: f64,
    /// per-component `|mean| / stderr`
    pub mean_sigmas: Vec<f64>,
    pub multi_junction_trials: u64,
    /// fraction of junction trials with two junctions further than N^beta
    pub spread_fraction: f64,
    pub beta: f64,
    pub max_spread: f64,
    pub master_seed: u64,
    pub margin: i64,
}

#[derive(Clone)]
struct Accum {
    conditioned: u64,
    with_junction: u64,
    multi: u64,
    far_spread: u64,
    sum_k: Vec<i64>,
    sum_kk: Vec<i128>,
    max_spread: f64,
}

impl Accum {
    fn new(d: usize) -> Self {
        Accum {
            conditioned: 0,
            with_junction: 0,
            multi: 0,
            far_spread: 0,
            sum_k: vec![0; d],
            sum_kk: vec![0; d * d],
            max_spread: 0.0,
        }
    }

    fn merge(mut self, other: Accum) -> Accum {
        self.conditioned += other.conditioned;
        self.with_junction += other.with_junction;
        self.multi += other.multi;
        self.far_spread += other.far_spread;
        for (a, b) in self.sum_k.iter_mut().zip(&other.sum_k) {
            *a += b;
        }
        for (a, b) in self.sum_kk.iter_mut().zip(&other.sum_kk) {
            *a += b;
        }
        self.max_spread = self.max_spread.max(other.max_spread);
        self
    }
}

/// Sample junction fluctuations conditioned on the triple connection.
///
/// Anchors are the componentwise floors of `N x_i`; the reference point is
/// the real minimizer for those realized anchors, so anchor rounding does
/// not bias the recorded fluctuations. The representative junction of a
/// trial is the lexicographically smallest one; all moments accumulate as
/// exact integer sums, so the report is bit-stable under any parallelism.
#[allow(clippy::too_many_arguments)]
pub fn llt_junction_histogram(
    xi: &DirectionalNorm,
    p: f64,
    triple_x: &[Vec<f64>; 3],
    n_scale: i64,
    trials: u64,
    master_seed: u64,
    margin: i64,
    beta: f64,
) -> Result<LltReport> {
    if !(0.0 < beta && beta < 0.5) {
        return Err(Error::InvalidParameter(format!(
            "beta = {beta} not in (0, 1/2)"
        )));
    }
    let d = triple_x[0].len();
    let x3 = in_x3_prime(xi, triple_x)?;
    if !x3.accepted {
        return Err(Error::Degenerate(format!(
            "triple outside the admissible class, margins {:?}",
            x3.margins
        )));
    }
    let anchors: [Vec<i64>; 3] = [
        floor_scale(&triple_x[0], n_scale),
        floor_scale(&triple_x[1], n_scale),
        floor_scale(&triple_x[2], n_scale),
    ];
    let anchors_f: [Vec<f64>; 3] = [
        anchors[0].iter().map(|&v| v as f64).collect(),
        anchors[1].iter().map(|&v| v as f64).collect(),
        anchors[2].iter().map(|&v| v as f64).collect(),
    ];
    let triple = minimize_phi(xi, &anchors_f)?;
    if !triple.admissible {
        return Err(Error::Degenerate(
            "realized anchors give a degenerate minimizer".into(),
        ));
    }
    let h_lattice = triple.hessian.clone().unwrap();
    let h_inv = matrix::inverse(&h_lattice)
        .ok_or_else(|| Error::Degenerate("potential Hessian not invertible".into()))?;
    let predicted_cov = matrix::scale(&h_inv, 1.0 / n_scale as f64);

    let refs: Vec<&[i64]> = anchors.iter().map(|a| a.as_slice()).collect();
    let lattice = LatticeBox::hull_with_margin(&refs, margin)?;
    let targets = [
        lattice.index_of(&anchors[0])?,
        lattice.index_of(&anchors[1])?,
        lattice.index_of(&anchors[2])?,
    ];
    let radius_beta = (n_scale as f64).powf(beta);

    let acc = (0..trials)
        .into_par_iter()
        .fold(
            || (Scratch::new(&lattice, p), Accum::new(d)),
            |(mut scratch, mut acc), trial| {
                scratch.sample(master_seed, trial, p);
                let connected = targets[1..]
                    .iter()
                    .all(|&x| scratch.uf.same(targets[0] as u32, x as u32));
                if connected {
                    acc.conditioned += 1;
                    let part = crate::cluster::finalize(&mut scratch.uf, lattice.n_sites());
                    let junctions = junction_indices(&scratch.config, &part, targets);
                    if !junctions.is_empty() {
                        acc.with_junction += 1;
                        let mut coords = vec![0i64; d];
                        lattice.coords_of(junctions[0], &mut coords);
                        for a in 0..d {
                            acc.sum_k[a] += coords[a];
                            for b in 0..d {
                                acc.sum_kk[a * d + b] += coords[a] as i128 * coords[b] as i128;
                            }
                        }
                        if junctions.len() > 1 {
                            acc.multi += 1;
                            let spread = max_pairwise(&lattice, &junctions);
                            acc.max_spread = acc.max_spread.max(spread);
                            if spread > radius_beta {
                                acc.far_spread += 1;
                            }
                        }
                    }
                }
                (scratch, acc)
            },
        )
        .map(|(_, acc)| acc)
        .reduce(|| Accum::new(d), Accum::merge);

    let m = acc.with_junction.max(1) as f64;
    let sqrt_n = (n_scale as f64).sqrt();
    let mean_k: Vec<f64> = acc.sum_k.iter().map(|&s| s as f64 / m).collect();
    let mean_y: Vec<f64> = (0..d)
        .map(|a| (mean_k[a] - triple.x0[a]) / sqrt_n)
        .collect();
    let mut cov_y: Matrix = vec![vec![0.0; d]; d];
    for a in 0..d {
        for b in 0..d {
            let second = acc.sum_kk[a * d + b] as f64 / m;
            cov_y[a][b] = (second - mean_k[a] * mean_k[b]) / n_scale as f64;
        }
    }
    let denom = matrix::sym_operator_norm(&predicted_cov);
    let cov_rel_error = if acc.with_junction > 0 && denom > 0.0 {
        matrix::sym_operator_norm(&matrix::sub(&cov_y, &predicted_cov)) / denom
    } else {
        f64::NAN
    };
    let mean_sigmas: Vec<f64> = (0..d)
        .map(|a| {
            let se = (cov_y[a][a] / m).sqrt();
            if se > 0.0 {
                mean_y[a].abs() / se
            } else {
                f64::NAN
            }
        })
        .collect();
    if acc.conditioned == 0 {
        return Err(Error::StatisticalGuard(
            "no trial realized the triple connection".into(),
        ));
    }

    Ok(LltReport {
        n_scale,
        p,
        anchors,
        x0: triple.x0.clone(),
        hessian_lattice: h_lattice,
        predicted_cov,
        trials,
        conditioned: acc.conditioned,
        with_junction: acc.with_junction,
        mean_y,
        cov_y,
        cov_rel_error,
        mean_sigmas,
        multi_junction_trials: acc.multi,
        spread_fraction: acc.far_spread as f64 / acc.with_junction.max(1) as f64,
        beta,
        max_spread: acc.max_spread,
        master_seed,
        margin,
    })
}

fn floor_scale(x: &[f64], n: i64) -> Vec<i64> {
    x.iter().map(|v| (v * n as f64).floor() as i64).collect()
}

fn max_pairwise(lattice: &LatticeBox, sites: &[usize]) -> f64 {
    let d = lattice.dimension();
    let mut ca = vec![0i64; d];
    let mut cb = vec![0i64; d];
    let mut best = 0.0f64;
    for i in 0..sites.len() {
        lattice.coords_of(sites[i], &mut ca);
        for j in i + 1..sites.len() {
            lattice.coords_of(sites[j], &mut cb);
            let r2: f64 = ca
                .iter()
                .zip(&cb)
                .map(|(&a, &b)| ((a - b) as f64).powi(2))
                .sum();
            best = best.max(r2.sqrt());
        }
    }
    best
}

/// Moment-pipeline self-test: draw lattice junctions from the Gaussian the
/// theorem predicts and push them through the same estimator path.
/// Returns `(mean_y, cov_y)`.
pub fn synthetic_gaussian_moments(
    h_lattice: &Matrix,
    x0: &[f64],
    n_scale: i64,
    samples: u64,
    seed: u64,
) -> Result<(Vec<f64>, Matrix)> {
    let d = x0.len();
    let cov = matrix::inverse(h_lattice)
        .ok_or_else(|| Error::Degenerate("Hessian not invertible".into()))?;
    let chol = matrix::cholesky(&cov)
        .ok_or_else(|| Error::Degenerate("covariance not positive definite".into()))?;
    let mut sum_k = vec![0i64; d];
    let mut sum_kk = vec![0i128; d * d];
    let mut stream = KeyedStream::new(seed, 1);
    for _ in 0..samples {
        let z: Vec<f64> = (0..d).map(|_| stream.next_normal()).collect();
        let mut k = vec![0i64; d];
        for a in 0..d {
            let v: f64 = (0..d).map(|b| chol[a][b] * z[b]).sum();
            k[a] = (x0[a] + v).floor() as i64;
        }
        for a in 0..d {
            sum_k[a] += k[a];
            for b in 0..d {
                sum_kk[a * d + b] += k[a] as i128 * k[b] as i128;
            }
        }
    }
    let m = samples as f64;
    let sqrt_n = (n_scale as f64).sqrt();
    let mean_k: Vec<f64> = sum_k.iter().map(|&s| s as f64 / m).collect();
    let mean_y: Vec<f64> = (0..d).map(|a| (mean_k[a] - x0[a]) / sqrt_n).collect();
    let mut cov_y: Matrix = vec![vec![0.0; d]; d];
    for a in 0..d {
        for b in 0..d {
            let second = sum_kk[a * d + b] as f64 / m;
            cov_y[a][b] = (second - mean_k[a] * mean_k[b]) / n_scale as f64;
        }
    }
    Ok((mean_y, cov_y))
}
