//! Far-junction tail: probability that a junction lands far from the
//! predicted location, relative to the probability of the triple
//! connection itself. Several exponents are scored on the same trials, so
//! the inclusion ordering in alpha is exact by construction.

use super::Scratch;
use crate::error::{Error, Result};
use crate::events::junction_indices;
use crate::geometry::triple::minimize_phi;
use crate::geometry::DirectionalNorm;
use crate::lattice::LatticeBox;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TailRow {
    pub n: i64,
    pub anchors: [Vec<i64>; 3],
    pub x0: Vec<f64>,
    pub trials: u64,
    /// trials with the triple connection
    pub conditioned: u64,
    /// per alpha: trials with a junction at distance >= n^alpha from x0
    pub far_hits: Vec<u64>,
    pub radii: Vec<f64>,
}

impl TailRow {
    /// Conditional ratio and its binomial standard error for one alpha.
    pub fn ratio(&self, alpha_index: usize) -> (f64, f64) {
        if self.conditioned == 0 {
            return (f64::NAN, f64::NAN);
        }
        let e = self.conditioned as f64;
        let r = self.far_hits[alpha_index] as f64 / e;
        (r, (r * (1.0 - r) / e).sqrt())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TailReport {
    pub p: f64,
    pub alphas: Vec<f64>,
    pub rows: Vec<TailRow>,
    pub master_seed: u64,
    pub margin: i64,
}

/// Scan the far-junction probability over a ladder of scales, scoring all
/// exponents on the same sampled trials.
#[allow(clippy::too_many_arguments)]
pub fn far_junction_tail(
    xi: &DirectionalNorm,
    p: f64,
    triple_x: &[Vec<f64>; 3],
    alphas: &[f64],
    n_list: &[i64],
    trials: u64,
    master_seed: u64,
    margin: i64,
) -> Result<TailReport> {
    for &a in alphas {
        if !(0.5 < a && a < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha = {a} not in (1/2, 1)"
            )));
        }
    }
    let d = triple_x[0].len();
    let mut rows = Vec::new();
    for (ni, &n) in n_list.iter().enumerate() {
        let anchors: [Vec<i64>; 3] = [
            scale_floor(&triple_x[0], n),
            scale_floor(&triple_x[1], n),
            scale_floor(&triple_x[2], n),
        ];
        let anchors_f: [Vec<f64>; 3] = [
            anchors[0].iter().map(|&v| v as f64).collect(),
            anchors[1].iter().map(|&v| v as f64).collect(),
            anchors[2].iter().map(|&v| v as f64).collect(),
        ];
        let triple = minimize_phi(xi, &anchors_f)?;
        let x0 = triple.x0.clone();
        let refs: Vec<&[i64]> = anchors.iter().map(|v| v.as_slice()).collect();
        let lattice = LatticeBox::hull_with_margin(&refs, margin)?;
        let targets = [
            lattice.index_of(&anchors[0])?,
            lattice.index_of(&anchors[1])?,
            lattice.index_of(&anchors[2])?,
        ];
        let radii: Vec<f64> = alphas.iter().map(|&a| (n as f64).powf(a)).collect();
        let seed_n = crate::rng::keyed_bits(master_seed, 0x7a11, ni as u64);

        let (conditioned, far_hits) = (0..trials)
            .into_par_iter()
            .fold(
                || (Scratch::new(&lattice, p), 0u64, vec![0u64; radii.len()]),
                |(mut scratch, mut cond, mut far), trial| {
                    scratch.sample(seed_n, trial, p);
                    let connected = targets[1..]
                        .iter()
                        .all(|&x| scratch.uf.same(targets[0] as u32, x as u32));
                    if connected {
                        cond += 1;
                        let part =
                            crate::cluster::finalize(&mut scratch.uf, lattice.n_sites());
                        let junctions = junction_indices(&scratch.config, &part, targets);
                        if !junctions.is_empty() {
                            let mut coords = vec![0i64; d];
                            let mut maxdist = 0.0f64;
                            for &j in &junctions {
                                lattice.coords_of(j, &mut coords);
                                let r2: f64 = coords
                                    .iter()
                                    .zip(&x0)
                                    .map(|(&c, x)| (c as f64 - x).powi(2))
                                    .sum();
                                maxdist = maxdist.max(r2.sqrt());
                            }
                            for (fi, &r) in radii.iter().enumerate() {
                                if maxdist >= r {
                                    far[fi] += 1;
                                }
                            }
                        }
                    }
                    (scratch, cond, far)
                },
            )
            .map(|(_, c, f)| (c, f))
            .reduce(
                || (0u64, vec![0u64; radii.len()]),
                |(c1, f1), (c2, f2)| {
                    (
                        c1 + c2,
                        f1.iter().zip(&f2).map(|(a, b)| a + b).collect(),
                    )
                },
            );

        rows.push(TailRow {
            n,
            anchors,
            x0,
            trials,
            conditioned,
            far_hits,
            radii,
        });
    }
    Ok(TailReport {
        p,
        alphas: alphas.to_vec(),
        rows,
        master_seed,
        margin,
    })
}

fn scale_floor(x: &[f64], n: i64) -> Vec<i64> {
    x.iter().map(|v| (v * n as f64).floor() as i64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_inclusion_is_exact() {
        let xi = DirectionalNorm::euclidean(2, 1.0);
        let triple = [
            vec![0.5, 0.0],
            vec![-0.25, 0.375],
            vec![-0.25, -0.375],
        ];
        let rep = far_junction_tail(
            &xi,
            0.45,
            &triple,
            &[0.6, 0.75, 0.9],
            &[8],
            30_000,
            3,
            4,
        )
        .unwrap();
        let row = &rep.rows[0];
        // larger alpha = larger radius = subset event
        assert!(row.far_hits[0] >= row.far_hits[1]);
        assert!(row.far_hits[1] >= row.far_hits[2]);
    }

    #[test]
    fn rejects_alpha_outside_range() {
        let xi = DirectionalNorm::euclidean(2, 1.0);
        let triple = [
            vec![0.5, 0.0],
            vec![-0.25, 0.375],
            vec![-0.25, -0.375],
        ];
        assert!(
            far_junction_tail(&xi, 0.3, &triple, &[0.4], &[8], 10, 1, 4).is_err()
        );
    }
}
