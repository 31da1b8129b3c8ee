//! Directional decay-rate estimation: weighted regression of
//! `-log P[0 <-> [N dir]]` on N, the finite-box stand-in for the inverse
//! correlation length.

use super::mc_estimate;
use crate::error::{Error, Result};
use crate::events::EventSpec;
use crate::lattice::LatticeBox;
use crate::rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct XiRow {
    pub n: i64,
    pub target: Vec<i64>,
    pub hits: u64,
    pub trials: u64,
    pub mean: f64,
    pub minus_log_p: f64,
    /// delta-method standard deviation of `-log p_hat`
    pub sigma: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct XiEstimate {
    pub direction: Vec<f64>,
    pub p: f64,
    pub rows: Vec<XiRow>,
    /// rows dropped because no trial connected
    pub unusable_n: Vec<i64>,
    pub slope: f64,
    pub slope_stderr: f64,
    pub intercept: f64,
    pub largest_usable_n: Option<i64>,
    pub master_seed: u64,
    pub margin: i64,
}

/// Default subcriticality ceiling for the plane.
pub const D2_SUBCRITICAL_MAX_P: f64 = 0.45;

fn floor_scale(direction: &[f64], n: i64) -> Vec<i64> {
    direction
        .iter()
        .map(|x| (x * n as f64).floor() as i64)
        .collect()
}

/// Estimate the decay rate along one direction over a ladder of scales.
///
/// Boxes are the padded hulls of `{0, [N dir]}`. Scales whose estimate is
/// zero are reported in `unusable_n` rather than failing the run. The
/// subcritical guard on `p` (d = 2) is lifted by `override_guard`.
#[allow(clippy::too_many_arguments)]
pub fn estimate_xi(
    p: f64,
    direction: &[f64],
    n_list: &[i64],
    trials: u64,
    master_seed: u64,
    margin: i64,
    override_guard: bool,
) -> Result<XiEstimate> {
    let d = direction.len();
    if d == 2 && p > D2_SUBCRITICAL_MAX_P && !override_guard {
        return Err(Error::InvalidParameter(format!(
            "p = {p} above the d=2 subcritical guard {D2_SUBCRITICAL_MAX_P}"
        )));
    }
    if d != 2 && !override_guard {
        return Err(Error::InvalidParameter(
            "dimensions other than 2 need the explicit guard override".into(),
        ));
    }
    if p <= 0.0 {
        return Err(Error::InvalidParameter(
            "p = 0 yields zero hits by design".into(),
        ));
    }
    let origin = vec![0i64; d];
    let mut rows = Vec::new();
    let mut unusable = Vec::new();
    for (i, &n) in n_list.iter().enumerate() {
        let target = floor_scale(direction, n);
        if target == origin {
            return Err(Error::InvalidParameter(format!(
                "scale {n} rounds the target onto the origin"
            )));
        }
        let lattice = LatticeBox::hull_with_margin(&[&origin, &target], margin)?;
        let seed_n = rng::keyed_bits(master_seed, 0xa11c_e5ed, i as u64);
        let est = mc_estimate(
            &EventSpec::TwoPoint {
                a: origin.clone(),
                b: target.clone(),
            },
            p,
            &lattice,
            trials,
            seed_n,
        )?;
        if est.hits == 0 {
            unusable.push(n);
            continue;
        }
        let mean = est.mean;
        rows.push(XiRow {
            n,
            target,
            hits: est.hits,
            trials,
            mean,
            minus_log_p: -mean.ln(),
            sigma: ((1.0 - mean) / (mean * trials as f64)).sqrt(),
        });
    }
    if rows.len() < 2 {
        return Err(Error::StatisticalGuard(format!(
            "only {} usable scales; need at least 2 for a slope",
            rows.len()
        )));
    }
    let (slope, intercept, slope_stderr) = weighted_fit(
        &rows
            .iter()
            .map(|r| (r.n as f64, r.minus_log_p, r.sigma))
            .collect::<Vec<_>>(),
    );
    Ok(XiEstimate {
        direction: direction.to_vec(),
        p,
        largest_usable_n: rows.last().map(|r| r.n),
        rows,
        unusable_n: unusable,
        slope,
        slope_stderr,
        intercept,
        master_seed,
        margin,
    })
}

/// Weighted least squares `y = intercept + slope x` with per-point sigma.
pub fn weighted_fit(points: &[(f64, f64, f64)]) -> (f64, f64, f64) {
    let w: Vec<f64> = points.iter().map(|(_, _, s)| 1.0 / (s * s)).collect();
    let sw: f64 = w.iter().sum();
    let sx: f64 = points.iter().zip(&w).map(|((x, _, _), w)| w * x).sum();
    let sy: f64 = points.iter().zip(&w).map(|((_, y, _), w)| w * y).sum();
    let xbar = sx / sw;
    let ybar = sy / sw;
    let sxx: f64 = points
        .iter()
        .zip(&w)
        .map(|((x, _, _), w)| w * (x - xbar) * (x - xbar))
        .sum();
    let sxy: f64 = points
        .iter()
        .zip(&w)
        .map(|((x, y, _), w)| w * (x - xbar) * (y - ybar))
        .sum();
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let stderr = (1.0 / sxx).sqrt();
    (slope, intercept, stderr)
}

/// Tabulation rows `(direction, slope)` ready for the tabulated norm.
pub fn tabulation_row(est: &XiEstimate) -> (Vec<f64>, f64) {
    let norm: f64 = est.direction.iter().map(|v| v * v).sum::<f64>().sqrt();
    (
        est.direction.iter().map(|v| v / norm).collect(),
        est.slope / norm,
    )
}
