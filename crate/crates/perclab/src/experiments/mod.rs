//! Monte Carlo estimation and the verification harnesses.
//!
//! Trials are farmed out with rayon; every trial derives its randomness
//! from `(master_seed, trial, edge)`, and all reducers are commutative
//! integer sums, so results are bit-identical for any worker count.

pub mod llt;
pub mod massgap;
pub mod oz;
pub mod tail;
pub mod xi;

use crate::cluster::{finalize, UnionFind};
use crate::config::BondConfiguration;
use crate::error::Result;
use crate::events::{junction_indices, EventSpec};
use crate::lattice::LatticeBox;
use crate::rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// One Monte Carlo frequency estimate with its provenance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Estimate {
    pub event: String,
    pub hits: u64,
    pub trials: u64,
    pub mean: f64,
    pub stderr: f64,
    pub master_seed: u64,
    pub p: f64,
    pub box_lo: Vec<i64>,
    pub box_hi: Vec<i64>,
}

impl Estimate {
    pub fn from_counts(
        event: String,
        hits: u64,
        trials: u64,
        master_seed: u64,
        p: f64,
        lattice: &LatticeBox,
    ) -> Self {
        let mean = hits as f64 / trials as f64;
        let stderr = (mean * (1.0 - mean) / trials as f64).sqrt();
        Estimate {
            event,
            hits,
            trials,
            mean,
            stderr,
            master_seed,
            p,
            box_lo: lattice.lower().to_vec(),
            box_hi: lattice.upper().to_vec(),
        }
    }
}

/// Per-thread scratch for the sampling loop.
pub(crate) struct Scratch {
    pub config: BondConfiguration,
    pub uf: UnionFind,
}

impl Scratch {
    pub fn new(lattice: &LatticeBox, p: f64) -> Self {
        Scratch {
            config: BondConfiguration::empty(lattice, p),
            uf: UnionFind::new(lattice.n_sites()),
        }
    }

    /// Sample the configuration for `trial` and rebuild the union-find.
    pub fn sample(&mut self, master_seed: u64, trial: u64, p: f64) {
        let lattice = &self.config.lattice;
        let n = lattice.n_sites();
        self.uf.reset(n);
        for (e, edge) in lattice.edges().iter().enumerate() {
            let open = rng::edge_open(master_seed, trial, e as u64, p);
            self.config.open[e] = open;
            if open {
                self.uf.union(edge.a, edge.b);
            }
        }
    }
}

/// Unbiased frequency estimator for a named event; deterministic given the
/// master seed, independent of how trials are scheduled.
pub fn mc_estimate(
    spec: &EventSpec,
    p: f64,
    lattice: &LatticeBox,
    trials: u64,
    master_seed: u64,
) -> Result<Estimate> {
    spec.validate(lattice)?;
    if trials == 0 {
        return Err(crate::error::Error::InvalidParameter(
            "trials must be >= 1".into(),
        ));
    }

    enum Fast {
        Always,
        Two(usize, usize),
        Three([usize; 3]),
        Junction(usize, [usize; 3]),
        Far([usize; 3], Vec<f64>, f64),
    }
    let fast = match spec {
        EventSpec::Always => Fast::Always,
        EventSpec::TwoPoint { a, b } => {
            Fast::Two(lattice.index_of(a)?, lattice.index_of(b)?)
        }
        EventSpec::Triple { n } => Fast::Three([
            lattice.index_of(&n[0])?,
            lattice.index_of(&n[1])?,
            lattice.index_of(&n[2])?,
        ]),
        EventSpec::Junction { k, n } => Fast::Junction(
            lattice.index_of(k)?,
            [
                lattice.index_of(&n[0])?,
                lattice.index_of(&n[1])?,
                lattice.index_of(&n[2])?,
            ],
        ),
        EventSpec::FarJunction { n, center, radius } => Fast::Far(
            [
                lattice.index_of(&n[0])?,
                lattice.index_of(&n[1])?,
                lattice.index_of(&n[2])?,
            ],
            center.clone(),
            *radius,
        ),
    };

    let hits: u64 = (0..trials)
        .into_par_iter()
        .map_init(
            || Scratch::new(lattice, p),
            |scratch, trial| {
                scratch.sample(master_seed, trial, p);
                let hit = match &fast {
                    Fast::Always => true,
                    Fast::Two(a, b) => scratch.uf.same(*a as u32, *b as u32),
                    Fast::Three([a, b, c]) => {
                        scratch.uf.same(*a as u32, *b as u32)
                            && scratch.uf.same(*a as u32, *c as u32)
                    }
                    Fast::Junction(k, t) => {
                        let connected = t
                            .iter()
                            .all(|&x| scratch.uf.same(*k as u32, x as u32));
                        if connected {
                            let part = finalize(&mut scratch.uf, lattice.n_sites());
                            let members = part.members(*k);
                            let mut g = crate::flow::ClusterFlow::new(&scratch.config, &members);
                            !t.contains(k) && g.triple_flow(*k, *t) == 3
                        } else {
                            false
                        }
                    }
                    Fast::Far(t, center, radius) => {
                        let connected = t[1..]
                            .iter()
                            .all(|&x| scratch.uf.same(t[0] as u32, x as u32));
                        if connected {
                            let part = finalize(&mut scratch.uf, lattice.n_sites());
                            let junctions = junction_indices(&scratch.config, &part, *t);
                            let d = lattice.dimension();
                            let mut coords = vec![0i64; d];
                            junctions.iter().any(|&j| {
                                lattice.coords_of(j, &mut coords);
                                let r2: f64 = coords
                                    .iter()
                                    .zip(center)
                                    .map(|(c, x)| (*c as f64 - x).powi(2))
                                    .sum();
                                r2.sqrt() >= *radius
                            })
                        } else {
                            false
                        }
                    }
                };
                u64::from(hit)
            },
        )
        .sum();

    Ok(Estimate::from_counts(
        event_name(spec),
        hits,
        trials,
        master_seed,
        p,
        lattice,
    ))
}

/// Frequency estimator for an arbitrary configuration predicate. Slower
/// than `mc_estimate` (one configuration allocation per trial) but fully
/// general; same determinism contract.
pub fn mc_probability<F>(
    name: &str,
    p: f64,
    lattice: &LatticeBox,
    trials: u64,
    master_seed: u64,
    event: F,
) -> Result<Estimate>
where
    F: Fn(&BondConfiguration) -> bool + Sync,
{
    let hits: u64 = (0..trials)
        .into_par_iter()
        .map_init(
            || BondConfiguration::empty(lattice, p),
            |config, trial| {
                for e in 0..config.open.len() {
                    config.open[e] = rng::edge_open(master_seed, trial, e as u64, p);
                }
                u64::from(event(config))
            },
        )
        .sum();
    Ok(Estimate::from_counts(
        name.to_string(),
        hits,
        trials,
        master_seed,
        p,
        lattice,
    ))
}

pub fn event_name(spec: &EventSpec) -> String {
    match spec {
        EventSpec::Always => "always".into(),
        EventSpec::TwoPoint { a, b } => format!("two-point {a:?}<->{b:?}"),
        EventSpec::Triple { n } => format!("triple E{:?}", n),
        EventSpec::Junction { k, n } => format!("junction F({k:?}; {n:?})"),
        EventSpec::FarJunction { n, radius, .. } => {
            format!("far-junction {n:?} r>={radius:.3}")
        }
    }
}
