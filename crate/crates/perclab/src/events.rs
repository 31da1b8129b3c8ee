//! Connection events on a sampled configuration.

use crate::cluster::{build_clusters, ClusterPartition};
use crate::config::BondConfiguration;
use crate::error::{Error, Result};
use crate::flow::{ClusterFlow, PathSet};
use crate::lattice::Site;
use serde::{Deserialize, Serialize};

fn check_distinct(sites: &[&[i64]]) -> Result<()> {
    for i in 0..sites.len() {
        for j in i + 1..sites.len() {
            if sites[i] == sites[j] {
                return Err(Error::SitesNotDistinct);
            }
        }
    }
    Ok(())
}

/// Event E: the three sites lie in one open cluster.
pub fn event_e(config: &BondConfiguration, n1: &[i64], n2: &[i64], n3: &[i64]) -> Result<bool> {
    check_distinct(&[n1, n2, n3])?;
    let i1 = config.lattice.index_of(n1)?;
    let i2 = config.lattice.index_of(n2)?;
    let i3 = config.lattice.index_of(n3)?;
    let part = build_clusters(config);
    Ok(part.same_cluster(i1, i2) && part.same_cluster(i1, i3))
}

/// Event F: `k` is joined to the three targets by open self-avoiding paths
/// that are vertex-disjoint except at `k`. Returns the witness when it holds.
pub fn event_f(
    config: &BondConfiguration,
    k: &[i64],
    n1: &[i64],
    n2: &[i64],
    n3: &[i64],
) -> Result<Option<PathSet>> {
    check_distinct(&[k, n1, n2, n3])?;
    let ki = config.lattice.index_of(k)?;
    let t = [
        config.lattice.index_of(n1)?,
        config.lattice.index_of(n2)?,
        config.lattice.index_of(n3)?,
    ];
    let part = build_clusters(config);
    if !(part.same_cluster(ki, t[0]) && part.same_cluster(ki, t[1]) && part.same_cluster(ki, t[2]))
    {
        return Ok(None);
    }
    let members = part.members(ki);
    let mut g = ClusterFlow::new(config, &members);
    Ok(g.triple_paths(ki, t).map(|paths| PathSet {
        k: k.to_vec(),
        targets: [n1.to_vec(), n2.to_vec(), n3.to_vec()],
        paths: paths.map(|p| {
            p.into_iter()
                .map(|idx| config.lattice.site_vec(idx))
                .collect()
        }),
    }))
}

/// All junction sites: `{ k in the common cluster : F(k; n) }`.
/// Empty when E fails.
pub fn find_junctions(
    config: &BondConfiguration,
    n1: &[i64],
    n2: &[i64],
    n3: &[i64],
) -> Result<Vec<Site>> {
    check_distinct(&[n1, n2, n3])?;
    let t = [
        config.lattice.index_of(n1)?,
        config.lattice.index_of(n2)?,
        config.lattice.index_of(n3)?,
    ];
    let part = build_clusters(config);
    let idxs = junction_indices(config, &part, t);
    Ok(idxs
        .into_iter()
        .map(|i| config.lattice.site_vec(i))
        .collect())
}

/// Index-level junction scan over a prebuilt partition (hot path for the
/// Monte Carlo harness). Returns site indices in increasing index order,
/// which is lexicographic in the coordinates. Junction candidates exclude
/// the targets themselves (event F requires `k` distinct from the `n_i`).
pub fn junction_indices(
    config: &BondConfiguration,
    part: &ClusterPartition,
    targets: [usize; 3],
) -> Vec<usize> {
    if !(part.same_cluster(targets[0], targets[1]) && part.same_cluster(targets[0], targets[2])) {
        return Vec::new();
    }
    let members = part.members(targets[0]);
    let mut g = ClusterFlow::new(config, &members);
    let mut out = Vec::new();
    for &k in &members {
        if targets.contains(&k) {
            continue;
        }
        // an interior junction needs three open edges at k
        let deg = config
            .lattice
            .incident(k)
            .iter()
            .filter(|(ei, _)| config.open[*ei as usize])
            .count();
        if deg < 3 {
            continue;
        }
        if g.triple_flow(k, targets) == 3 {
            out.push(k);
        }
    }
    out
}

/// Named events the Monte Carlo engine can evaluate per configuration.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub enum EventSpec {
    /// Two-point connection `a <-> b`.
    TwoPoint { a: Site, b: Site },
    /// Triple connection E(n1, n2, n3).
    Triple { n: [Site; 3] },
    /// F(k; n1, n2, n3).
    Junction { k: Site, n: [Site; 3] },
    /// E holds and some junction lies at Euclidean distance >= `radius`
    /// from `center` (the far-junction event).
    FarJunction { n: [Site; 3], center: Vec<f64>, radius: f64 },
    /// Always true (estimator calibration).
    Always,
}

impl EventSpec {
    /// Site coordinates the event references (for box checks).
    pub fn sites(&self) -> Vec<&Site> {
        match self {
            EventSpec::TwoPoint { a, b } => vec![a, b],
            EventSpec::Triple { n } => n.iter().collect(),
            EventSpec::Junction { k, n } => {
                let mut v: Vec<&Site> = n.iter().collect();
                v.push(k);
                v
            }
            EventSpec::FarJunction { n, .. } => n.iter().collect(),
            EventSpec::Always => vec![],
        }
    }

    pub fn validate(&self, config_box: &crate::lattice::LatticeBox) -> Result<()> {
        for s in self.sites() {
            if !config_box.contains(s) {
                return Err(Error::SiteOutsideBox { site: s.clone() });
            }
        }
        Ok(())
    }

    /// Evaluate on one configuration. `scratch` carries reusable buffers.
    pub fn holds(&self, config: &BondConfiguration) -> Result<bool> {
        match self {
            EventSpec::Always => Ok(true),
            EventSpec::TwoPoint { a, b } => {
                let ia = config.lattice.index_of(a)?;
                let ib = config.lattice.index_of(b)?;
                let part = build_clusters(config);
                Ok(part.same_cluster(ia, ib))
            }
            EventSpec::Triple { n } => event_e(config, &n[0], &n[1], &n[2]),
            EventSpec::Junction { k, n } => {
                Ok(event_f(config, k, &n[0], &n[1], &n[2])?.is_some())
            }
            EventSpec::FarJunction { n, center, radius } => {
                let t = [
                    config.lattice.index_of(&n[0])?,
                    config.lattice.index_of(&n[1])?,
                    config.lattice.index_of(&n[2])?,
                ];
                let part = build_clusters(config);
                let junctions = junction_indices(config, &part, t);
                let d = config.lattice.dimension();
                let mut coords = vec![0i64; d];
                Ok(junctions.iter().any(|&j| {
                    config.lattice.coords_of(j, &mut coords);
                    let r2: f64 = coords
                        .iter()
                        .zip(center)
                        .map(|(c, x)| (*c as f64 - x).powi(2))
                        .sum();
                    r2.sqrt() >= *radius
                }))
            }
        }
    }
}
