//! Prefactor flatness scan: rescale two-point estimates by the power law
//! and the exponential decay and watch the sequence level off.

use super::mc_estimate;
use crate::error::Result;
use crate::events::EventSpec;
use crate::lattice::LatticeBox;
use crate::rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PrefactorRow {
    pub n: i64,
    pub mean: f64,
    pub stderr: f64,
    /// `p_hat * (2 pi N)^{(d-1)/2} * exp(xi_hat * N)`
    pub rescaled: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PrefactorEstimate {
    pub rows: Vec<PrefactorRow>,
    pub dropped_n: Vec<i64>,
    /// `(max - min) / median` over the top half of the scales
    pub flatness: f64,
    pub xi_hat: f64,
    pub master_seed: u64,
}

/// Rescale a `(N, p_hat, stderr)` table; used directly by the synthetic
/// self-test and by the Monte Carlo driver below.
pub fn rescale_rows(d: usize, xi_hat: f64, raw: &[(i64, f64, f64)]) -> Vec<PrefactorRow> {
    raw.iter()
        .map(|&(n, mean, stderr)| {
            let power = (std::f64::consts::TAU * n as f64).powf((d as f64 - 1.0) / 2.0);
            PrefactorRow {
                n,
                mean,
                stderr,
                rescaled: mean * power * (xi_hat * n as f64).exp(),
            }
        })
        .collect()
}

/// Flatness of the top half of the rescaled sequence.
pub fn flatness(rows: &[PrefactorRow]) -> f64 {
    let half = &rows[rows.len() / 2..];
    let mut vals: Vec<f64> = half.iter().map(|r| r.rescaled).collect();
    vals.sort_by(f64::total_cmp);
    if vals.is_empty() || vals[vals.len() / 2] == 0.0 {
        return f64::NAN;
    }
    (vals[vals.len() - 1] - vals[0]) / vals[vals.len() / 2]
}

#[allow(clippy::too_many_arguments)]
pub fn oz_prefactor_scan(
    p: f64,
    direction: &[f64],
    n_list: &[i64],
    trials: u64,
    master_seed: u64,
    margin: i64,
    xi_hat: f64,
) -> Result<PrefactorEstimate> {
    let d = direction.len();
    let origin = vec![0i64; d];
    let mut raw = Vec::new();
    let mut dropped = Vec::new();
    for (i, &n) in n_list.iter().enumerate() {
        let target: Vec<i64> = direction
            .iter()
            .map(|x| (x * n as f64).floor() as i64)
            .collect();
        let lattice = LatticeBox::hull_with_margin(&[&origin, &target], margin)?;
        let est = mc_estimate(
            &EventSpec::TwoPoint {
                a: origin.clone(),
                b: target,
            },
            p,
            &lattice,
            trials,
            rng::keyed_bits(master_seed, 0x02f1a7, i as u64),
        )?;
        if est.hits == 0 {
            dropped.push(n);
        } else {
            raw.push((n, est.mean, est.stderr));
        }
    }
    let rows = rescale_rows(d, xi_hat, &raw);
    let flat = flatness(&rows);
    Ok(PrefactorEstimate {
        rows,
        dropped_n: dropped,
        flatness: flat,
        xi_hat,
        master_seed,
    })
}
