//! Mass-gap surrogate: on narrow strips the exactly enumerated ratio of
//! irreducible to pinned connections must drop with the strip length.

use crate::error::Result;
use crate::geometry::DirectionalNorm;
use crate::lattice::LatticeBox;
use crate::oracle::exact_h_f;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MassGapRow {
    pub length: i64,
    pub h_t: f64,
    pub f_t: f64,
    pub h_bar: f64,
    pub f_bar: f64,
    /// `f_bar / h_bar`, the scanned decay quantity
    pub ratio_bar: f64,
    /// `f_t / h_t` for reference (0/0 -> NaN)
    pub ratio_plain: f64,
}

/// Exact `f/h` table on axis strips `[0, L] x [0, width-1]`, endpoints on
/// the bottom row.
#[allow(clippy::too_many_arguments)]
pub fn mass_gap_scan(
    p: f64,
    xi: &DirectionalNorm,
    t: &[f64],
    eta: f64,
    cap_k: f64,
    width: i64,
    lengths: &[i64],
) -> Result<Vec<MassGapRow>> {
    let mut rows = Vec::new();
    for &len in lengths {
        let lattice = LatticeBox::new(&[0, 0], &[len, width - 1])?;
        let conn = exact_h_f(&lattice, p, xi, t, eta, cap_k, &[0, 0], &[len, 0])?;
        rows.push(MassGapRow {
            length: len,
            h_t: conn.h_t,
            f_t: conn.f_t,
            h_bar: conn.h_bar,
            f_bar: conn.f_bar_eta_k,
            ratio_bar: conn.f_bar_eta_k / conn.h_bar,
            ratio_plain: conn.f_t / conn.h_t,
        });
    }
    Ok(rows)
}

/// Scan verdicts: the exactly-true decay properties on the table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MassGapVerdict {
    /// exact pinned values strictly decreasing over the scanned lengths
    pub h_bar_decreasing: bool,
    /// exact irreducible values strictly decreasing over the lengths
    pub f_bar_decreasing: bool,
    /// plain ratio strictly decreasing over its positive support
    pub plain_ratio_decreasing: bool,
    /// lengths where the plain ratio is positive
    pub plain_support: Vec<i64>,
}

pub fn assess(rows: &[MassGapRow]) -> MassGapVerdict {
    let dec = |vals: Vec<f64>| vals.windows(2).all(|w| w[1] < w[0]);
    let support: Vec<&MassGapRow> = rows.iter().filter(|r| r.f_t > 0.0).collect();
    MassGapVerdict {
        h_bar_decreasing: dec(rows.iter().map(|r| r.h_bar).collect()),
        f_bar_decreasing: dec(rows.iter().map(|r| r.f_bar).collect()),
        plain_ratio_decreasing: dec(support.iter().map(|r| r.ratio_plain).collect()),
        plain_support: support.iter().map(|r| r.length).collect(),
    }
}
