//! Exhaustive enumeration over all bond configurations of tiny graphs:
//! exact event probabilities, exact connection functions, and the exact
//! renewal identity on width-restricted strips.
//!
//! Enumeration walks the `2^m` configurations in fixed-size chunks that are
//! processed independently and combined in chunk order, so the floating
//! result is identical regardless of worker count. With a rational `p` the
//! probability is also available as an exact fraction.

use crate::config::BondConfiguration;
use crate::error::{Error, Result};
use crate::geometry::DirectionalNorm;
use crate::lattice::LatticeBox;
use crate::renewal::{classify_connection, DirectionContext};
use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Hard guard: at most `2^26` configurations.
pub const MAX_EDGES: usize = 26;

const CHUNK_BITS: usize = 16;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExactResult {
    pub probability: f64,
    pub edge_count: usize,
    /// exact fraction as strings, present when computed over rational p
    pub rational: Option<(String, String)>,
}

fn guard(lattice: &LatticeBox) -> Result<usize> {
    let m = lattice.n_edges();
    if m > MAX_EDGES {
        return Err(Error::EnumerationGuard {
            edges: m,
            limit: MAX_EDGES,
        });
    }
    Ok(m)
}

/// Enumerate all configurations, scoring each with a small bitmask of
/// outcomes; returns one exact-up-to-rounding probability per outcome bit.
pub fn enumerate_outcomes<F>(
    lattice: &LatticeBox,
    p: f64,
    n_outcomes: usize,
    eval: F,
) -> Result<Vec<f64>>
where
    F: Fn(&BondConfiguration) -> u64 + Sync,
{
    let m = guard(lattice)?;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("p = {p} outside [0, 1]")));
    }
    // weight by open-edge count
    let mut pw = vec![0.0f64; m + 1];
    for (k, w) in pw.iter_mut().enumerate() {
        *w = p.powi(k as i32) * (1.0 - p).powi((m - k) as i32);
    }
    let total: u64 = 1u64 << m;
    let chunk: u64 = 1u64 << CHUNK_BITS.min(m);
    let n_chunks = total.div_ceil(chunk);

    let partials: Vec<Vec<f64>> = (0..n_chunks)
        .into_par_iter()
        .map(|ci| {
            let mut config = BondConfiguration::empty(lattice, p);
            let mut sums = vec![0.0f64; n_outcomes];
            let mut comps = vec![0.0f64; n_outcomes];
            let lo = ci * chunk;
            let hi = (lo + chunk).min(total);
            for bits in lo..hi {
                for e in 0..m {
                    config.open[e] = bits >> e & 1 == 1;
                }
                let mask = eval(&config);
                if mask == 0 {
                    continue;
                }
                let w = pw[bits.count_ones() as usize];
                for (o, (s, c)) in sums.iter_mut().zip(comps.iter_mut()).enumerate() {
                    if mask >> o & 1 == 1 {
                        // Kahan step
                        let yv = w - *c;
                        let t = *s + yv;
                        *c = (t - *s) - yv;
                        *s = t;
                    }
                }
            }
            sums
        })
        .collect();

    let mut out = vec![0.0f64; n_outcomes];
    let mut comp = vec![0.0f64; n_outcomes];
    for part in partials {
        for o in 0..n_outcomes {
            let yv = part[o] - comp[o];
            let t = out[o] + yv;
            comp[o] = (t - out[o]) - yv;
            out[o] = t;
        }
    }
    Ok(out)
}

/// Exact probability of one event.
pub fn exact_probability<F>(lattice: &LatticeBox, p: f64, event: F) -> Result<ExactResult>
where
    F: Fn(&BondConfiguration) -> bool + Sync,
{
    let v = enumerate_outcomes(lattice, p, 1, |c| u64::from(event(c)))?;
    Ok(ExactResult {
        probability: v[0],
        edge_count: lattice.n_edges(),
        rational: None,
    })
}

/// Exact probability as a fraction, for rational `p = num/den`.
pub fn exact_probability_rational<F>(
    lattice: &LatticeBox,
    p: Ratio<u64>,
    event: F,
) -> Result<ExactResult>
where
    F: Fn(&BondConfiguration) -> bool + Sync,
{
    let m = guard(lattice)?;
    if p > Ratio::one() {
        return Err(Error::InvalidParameter("p > 1".into()));
    }
    let a = BigUint::from(*p.numer());
    let b = BigUint::from(p.denom() - p.numer());
    // a^k b^(m-k), tabulated once
    let mut weights = Vec::with_capacity(m + 1);
    for k in 0..=m {
        weights.push(a.pow(k as u32) * b.pow((m - k) as u32));
    }
    let total: u64 = 1u64 << m;
    let chunk: u64 = 1u64 << CHUNK_BITS.min(m);
    let n_chunks = total.div_ceil(chunk);
    let num: BigUint = (0..n_chunks)
        .into_par_iter()
        .map(|ci| {
            let mut config = BondConfiguration::empty(lattice, 0.5);
            let mut acc = BigUint::zero();
            let lo = ci * chunk;
            let hi = (lo + chunk).min(total);
            for bits in lo..hi {
                for e in 0..m {
                    config.open[e] = bits >> e & 1 == 1;
                }
                if event(&config) {
                    acc += &weights[bits.count_ones() as usize];
                }
            }
            acc
        })
        .reduce(BigUint::zero, |x, y| x + y);
    let den = BigUint::from(*p.denom()).pow(m as u32);
    let frac = num_rational::Ratio::new(num.clone(), den.clone());
    let probability = {
        // to f64 via string split at reasonable precision
        let scaled = &num * BigUint::from(1u64 << 53) / &den;
        let s: f64 = scaled.to_string().parse().unwrap_or(0.0);
        s / (1u64 << 53) as f64
    };
    Ok(ExactResult {
        probability,
        edge_count: m,
        rational: Some((frac.numer().to_string(), frac.denom().to_string())),
    })
}

/// Exact fraction for a float `p` that is (within 1e-12) a ratio with
/// denominator at most 10^6, e.g. a short decimal.
pub fn exact_probability_from_float<F>(
    lattice: &LatticeBox,
    p: f64,
    event: F,
) -> Result<ExactResult>
where
    F: Fn(&BondConfiguration) -> bool + Sync,
{
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("p = {p} outside [0, 1]")));
    }
    let (num, den) = crate::renewal::rational_approx_pub(p, 1_000_000);
    if num < 0 || (p - num as f64 / den as f64).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "p = {p} has no exact fraction with denominator <= 1e6"
        )));
    }
    exact_probability_rational(lattice, Ratio::new(num as u64, den as u64), event)
}

/// The exact connection probabilities for one pair in one direction: the
/// eight h/f variants plus the irreducible renewal factor.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ExactConnection {
    pub h_t: f64,
    pub f_t: f64,
    pub h_bar: f64,
    pub f_bar_eta_k: f64,
    pub h_tilde_eta_k: f64,
    pub f_tilde_eta_k: f64,
    pub h_eta_k: f64,
    pub f_eta_k: f64,
    /// probability of the irreducible piece of the renewal decomposition
    pub f_renewal: f64,
}

/// Exact h/f connection values between `k` and `n` on the given (small)
/// box, with the break-point detector as the event predicate. `k = n`
/// returns the conventional values h = 1, f = 0.
pub fn exact_h_f(
    lattice: &LatticeBox,
    p: f64,
    xi: &DirectionalNorm,
    t: &[f64],
    eta: f64,
    cap_k: f64,
    k: &[i64],
    n: &[i64],
) -> Result<ExactConnection> {
    if k == n {
        return Ok(ExactConnection {
            h_t: 1.0,
            f_t: 0.0,
            h_bar: 1.0,
            f_bar_eta_k: 0.0,
            h_tilde_eta_k: 1.0,
            f_tilde_eta_k: 0.0,
            h_eta_k: 1.0,
            f_eta_k: 0.0,
            f_renewal: 0.0,
        });
    }
    let ctx = DirectionContext::new(xi, t, eta, cap_k)?;
    // validate the pair once (site membership, (t, n-k) > 0)
    {
        let probe = BondConfiguration::empty(lattice, p);
        classify_connection(&probe, &ctx, k, n)?;
    }
    let sums = enumerate_outcomes(lattice, p, 9, |config| {
        let f = classify_connection(config, &ctx, k, n).expect("validated pair");
        u64::from(f.h_t)
            | u64::from(f.f_t) << 1
            | u64::from(f.h_bar) << 2
            | u64::from(f.f_bar_eta_k) << 3
            | u64::from(f.h_tilde_eta_k) << 4
            | u64::from(f.f_tilde_eta_k) << 5
            | u64::from(f.h_eta_k) << 6
            | u64::from(f.f_eta_k) << 7
            | u64::from(f.f_renewal) << 8
    })?;
    Ok(ExactConnection {
        h_t: sums[0],
        f_t: sums[1],
        h_bar: sums[2],
        f_bar_eta_k: sums[3],
        h_tilde_eta_k: sums[4],
        f_tilde_eta_k: sums[5],
        h_eta_k: sums[6],
        f_eta_k: sums[7],
        f_renewal: sums[8],
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RenewalCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    /// per-site contributions `(b, h(k,b), f(b,n))`, the `b = k` term first
    pub terms: Vec<(Vec<i64>, f64, f64)>,
    pub transverse_width: usize,
}

/// Exact renewal identity on a width-restricted strip:
/// `h(k,n) = f(k,n) + sum_b h(k,b) f(b,n)`, every factor enumerated on its
/// own sub-strip. The strip runs along the axis `e` of `t`; its transverse
/// width must not exceed `max_width`.
#[allow(clippy::too_many_arguments)]
pub fn verify_renewal(
    lattice: &LatticeBox,
    p: f64,
    xi: &DirectionalNorm,
    t: &[f64],
    eta: f64,
    cap_k: f64,
    k: &[i64],
    n: &[i64],
    max_width: usize,
) -> Result<RenewalCheck> {
    guard(lattice)?;
    let ctx = DirectionContext::new(xi, t, eta, cap_k)?;
    let e = ctx.e_axis;
    let d = lattice.dimension();
    for a in 0..d {
        if a != e {
            let w = (lattice.upper()[a] - lattice.lower()[a] + 1) as usize;
            if w > max_width {
                return Err(Error::EnumerationGuard {
                    edges: w,
                    limit: max_width,
                });
            }
        }
    }
    if k[e] >= n[e] {
        return Err(Error::InvalidParameter(
            "strip must run from k up to n along the t axis".into(),
        ));
    }

    let sub_box = |lo_e: i64, hi_e: i64| -> Result<LatticeBox> {
        let mut lo = lattice.lower().to_vec();
        let mut hi = lattice.upper().to_vec();
        lo[e] = lo_e;
        hi[e] = hi_e;
        LatticeBox::new(&lo, &hi)
    };

    let full = sub_box(k[e], n[e])?;
    let both = exact_h_f(&full, p, xi, t, eta, cap_k, k, n)?;
    let lhs = both.h_eta_k;

    // b = k term: the fully irreducible piece
    let f_full = both.f_renewal;
    let mut rhs = f_full;
    let mut terms = vec![(k.to_vec(), 1.0, f_full)];

    // interior decomposition sites, level strictly between the endpoints
    let mut coords = vec![0i64; d];
    for idx in 0..full.n_sites() {
        full.coords_of(idx, &mut coords);
        if coords[e] <= k[e] || coords[e] >= n[e] {
            continue;
        }
        let b_site = coords.clone();
        let lower = sub_box(k[e], b_site[e])?;
        let h_low = exact_h_f(&lower, p, xi, t, eta, cap_k, k, &b_site)?.h_eta_k;
        if h_low == 0.0 {
            continue;
        }
        let upper = sub_box(b_site[e], n[e])?;
        let f_up = exact_h_f(&upper, p, xi, t, eta, cap_k, &b_site, n)?.f_renewal;
        rhs += h_low * f_up;
        terms.push((b_site, h_low, f_up));
    }

    let width = (0..d)
        .filter(|&a| a != e)
        .map(|a| (lattice.upper()[a] - lattice.lower()[a] + 1) as usize)
        .max()
        .unwrap_or(1);
    Ok(RenewalCheck {
        lhs,
        rhs,
        residual: (lhs - rhs).abs(),
        terms,
        transverse_width: width,
    })
}
