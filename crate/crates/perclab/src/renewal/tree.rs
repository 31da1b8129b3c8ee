//! Three-armed tree skeletons: trunks from the witness paths, leaves grown
//! where cluster mass escapes the covered region, and the delta-goodness
//! verdict used by the coarse-grained counting.

use super::skeleton::{m_skeleton, skeleton_classify, Skeleton};
use super::{box_cluster, DirectionContext};
use crate::config::BondConfiguration;
use crate::error::Result;
use crate::flow::PathSet;
use crate::geometry::{direction_grid, DirectionalNorm};
use crate::lattice::Site;
use serde::{Deserialize, Serialize};

fn diff_f(a: &[i64], b: &[i64]) -> Vec<f64> {
    a.iter().zip(b).map(|(&x, &y)| (x - y) as f64).collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TreeSkeleton {
    pub k: Site,
    pub targets: [Site; 3],
    pub m_scale: f64,
    /// trunks run from each target down to `k`
    pub trunks: [Skeleton; 3],
    pub leaves: [Vec<Site>; 3],
    /// how many of each arm's leaves were added by the final coverage sweep
    /// rather than the boundary-escape loop
    pub sweep_leaves: [usize; 3],
    pub cluster_size: usize,
    /// every cluster site within norm distance M of some skeleton point
    pub coverage_ok: bool,
}

impl TreeSkeleton {
    pub fn arm_points(&self, i: usize) -> Vec<Site> {
        let mut v = self.trunks[i].points.clone();
        v.extend(self.leaves[i].iter().cloned());
        v
    }

    pub fn all_points(&self) -> Vec<Site> {
        let mut v = Vec::new();
        for i in 0..3 {
            v.extend(self.arm_points(i));
        }
        v.sort();
        v.dedup();
        v
    }
}

/// Grow the tree skeleton of the common cluster from an event-F witness.
///
/// Trunks are the M-skeletons of the witness paths (reoriented to run from
/// the target to `k`). The leaf loop walks the arm's skeleton points in
/// order, screens lattice sites where edges cross the M-ball boundary, and
/// admits a site as a leaf when an open self-avoiding path escapes from it
/// to norm distance M while avoiding the already covered region. A final
/// deterministic sweep covers any cluster mass the literal loop missed, so
/// the compatibility invariant holds by construction; sweep admissions are
/// counted separately.
pub fn tree_skeleton(
    config: &BondConfiguration,
    witness: &PathSet,
    m_scale: f64,
    xi: &DirectionalNorm,
) -> Result<TreeSkeleton> {
    let b = &config.lattice;
    let k_idx = b.index_of(&witness.k)?;
    let trunks: [Skeleton; 3] = {
        let mk = |i: usize| -> Result<Skeleton> {
            let mut path = witness.paths[i].clone();
            path.reverse();
            m_skeleton(&path, m_scale, xi)
        };
        [mk(0)?, mk(1)?, mk(2)?]
    };

    let cluster = box_cluster(config, k_idx);
    let d = b.dimension();
    let cluster_sites: Vec<Site> = cluster.iter().map(|&s| b.site_vec(s)).collect();

    // region bookkeeping over skeleton points
    let mut arm_pts: [Vec<Site>; 3] = [
        trunks[0].points.clone(),
        trunks[1].points.clone(),
        trunks[2].points.clone(),
    ];
    let mut leaves: [Vec<Site>; 3] = Default::default();
    let mut sweep_leaves = [0usize; 3];

    let dist_to = |y: &Site, pts: &[Site]| -> f64 {
        pts.iter()
            .map(|z| xi.eval(&diff_f(y, z)))
            .fold(f64::INFINITY, f64::min)
    };

    for i in 0..3 {
        'arm: loop {
            // termination: every cluster site not strictly inside the other
            // arms' region sits within distance M of this arm's cells
            let all_pts: Vec<Site> = (0..3).flat_map(|a| arm_pts[a].iter().cloned()).collect();
            let mut done = true;
            for y in &cluster_sites {
                let di = dist_to(y, &arm_pts[i]);
                let dall = all_pts
                    .iter()
                    .map(|z| xi.eval(&diff_f(y, z)))
                    .fold(f64::INFINITY, f64::min);
                let covered_by_others_only = dall <= m_scale && di > m_scale;
                if covered_by_others_only {
                    continue;
                }
                if di > 2.0 * m_scale {
                    done = false;
                    break;
                }
            }
            if done {
                break 'arm;
            }

            // update step: this arm's points, target first, then lex order
            let mut order = arm_pts[i].clone();
            let first = order.remove(0);
            order.sort();
            order.insert(0, first);

            for yj in &order {
                // screening: cluster sites on or outside the M-ball of yj,
                // endpoints of open edges crossing its boundary, lex order
                let mut candidates: Vec<Site> = Vec::new();
                for y in &cluster_sites {
                    if xi.eval(&diff_f(y, yj)) < m_scale {
                        continue;
                    }
                    let yi = b.index_of(y).unwrap();
                    let crossing = b.incident(yi).iter().any(|&(ei, u)| {
                        config.open[ei as usize] && {
                            let us = b.site_vec(u as usize);
                            xi.eval(&diff_f(&us, yj)) < m_scale
                        }
                    });
                    if crossing {
                        candidates.push(y.clone());
                    }
                }
                candidates.sort();
                for y in candidates {
                    if escapes(config, xi, &y, m_scale, &all_pts) {
                        arm_pts[i].push(y.clone());
                        leaves[i].push(y);
                        continue 'arm;
                    }
                }
            }
            break 'arm; // no admissible candidate anywhere
        }
    }

    // coverage sweep: deterministic cleanup for mass the literal loop
    // cannot reach (small blobs hovering beyond M of every cell)
    loop {
        let all_pts: Vec<Site> = (0..3).flat_map(|a| arm_pts[a].iter().cloned()).collect();
        let mut uncovered: Vec<Site> = cluster_sites
            .iter()
            .filter(|y| dist_to(y, &all_pts) > m_scale)
            .cloned()
            .collect();
        if uncovered.is_empty() {
            break;
        }
        uncovered.sort();
        let y = uncovered.remove(0);
        let arm = (0..3)
            .min_by(|&a, &b| {
                dist_to(&y, &arm_pts[a]).total_cmp(&dist_to(&y, &arm_pts[b]))
            })
            .unwrap();
        arm_pts[arm].push(y.clone());
        leaves[arm].push(y);
        sweep_leaves[arm] += 1;
    }

    let all_pts: Vec<Site> = (0..3).flat_map(|a| arm_pts[a].iter().cloned()).collect();
    let coverage_ok = cluster_sites
        .iter()
        .all(|y| dist_to(y, &all_pts) <= m_scale);

    let _ = d;
    Ok(TreeSkeleton {
        k: witness.k.clone(),
        targets: witness.targets.clone(),
        m_scale,
        trunks,
        leaves,
        sweep_leaves,
        cluster_size: cluster.len(),
        coverage_ok,
    })
}

/// Open self-avoiding escape: a path from `y` to norm distance >= M of `y`
/// staying strictly outside the covered region.
fn escapes(
    config: &BondConfiguration,
    xi: &DirectionalNorm,
    y: &Site,
    m_scale: f64,
    covered_pts: &[Site],
) -> bool {
    let b = &config.lattice;
    let uncovered = |s: &Site| -> bool {
        covered_pts
            .iter()
            .all(|z| xi.eval(&diff_f(s, z)) > m_scale)
    };
    if !uncovered(y) {
        return false;
    }
    let start = b.index_of(y).unwrap();
    let mut seen = vec![false; b.n_sites()];
    seen[start] = true;
    let mut stack = vec![start];
    while let Some(u) = stack.pop() {
        let us = b.site_vec(u);
        if xi.eval(&diff_f(&us, y)) >= m_scale {
            return true;
        }
        for &(ei, v) in b.incident(u) {
            if !config.open[ei as usize] || seen[v as usize] {
                continue;
            }
            let vs = b.site_vec(v as usize);
            if uncovered(&vs) {
                seen[v as usize] = true;
                stack.push(v as usize);
            }
        }
    }
    false
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ArmBadness {
    pub bad_leaves: usize,
    pub bad_skeleton_indices: usize,
    pub threshold: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DeltaGoodReport {
    pub verdict: bool,
    pub arms: [ArmBadness; 3],
}

/// The two-inequality delta-goodness verdict: per arm, both the bad-leaf
/// count and the bad-skeleton-index count must stay below
/// `(delta / M) * ||n_i - k||` (inclusive).
pub fn delta_good(
    tree: &mut TreeSkeleton,
    xi: &DirectionalNorm,
    eta: f64,
    delta: f64,
    r_window: f64,
) -> Result<DeltaGoodReport> {
    let mut arms: Vec<ArmBadness> = Vec::with_capacity(3);
    for i in 0..3 {
        let leg = diff_f(&tree.targets[i], &tree.k);
        let t_i = xi.polar_point(&leg)?;
        let ctx = DirectionContext::new(xi, &t_i, eta, 1.0)?;
        let mut trunk = tree.trunks[i].clone();
        skeleton_classify(&mut trunk, &ctx);
        let bad_skeleton = trunk.bad.len();
        let bad_leaves = bad_leaf_count(
            &trunk,
            &tree.leaves[i],
            xi,
            &ctx,
            r_window * tree.m_scale,
        );
        tree.trunks[i] = trunk;
        let euclid: f64 = leg.iter().map(|v| v * v).sum::<f64>().sqrt();
        arms.push(ArmBadness {
            bad_leaves,
            bad_skeleton_indices: bad_skeleton,
            threshold: delta / tree.m_scale * euclid,
        });
    }
    let verdict = arms.iter().all(|a| {
        a.bad_leaves as f64 <= a.threshold && a.bad_skeleton_indices as f64 <= a.threshold
    });
    Ok(DeltaGoodReport {
        verdict,
        arms: [arms[0].clone(), arms[1].clone(), arms[2].clone()],
    })
}

/// Count leaves outside every good-window region
/// `[RM ball(x_{j_l}) + cone] ∩ slab(x_{j_l}, x_{j_{l-1}})`.
fn bad_leaf_count(
    trunk: &Skeleton,
    leaves: &[Site],
    xi: &DirectionalNorm,
    ctx: &DirectionContext,
    window_radius: f64,
) -> usize {
    if leaves.is_empty() {
        return 0;
    }
    let pts = &trunk.points;
    // window anchors: good points spaced at least `window_radius` apart in
    // Euclidean distance, scanned in trunk order
    let good: Vec<usize> = trunk.good.clone();
    let mut anchors: Vec<usize> = Vec::new();
    for &j in &good {
        match anchors.last() {
            None => anchors.push(j),
            Some(&prev) => {
                let v = diff_f(&pts[j], &pts[prev]);
                let eu: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                if eu >= window_radius {
                    anchors.push(j);
                }
            }
        }
    }
    if anchors.len() < 2 {
        return leaves.len();
    }
    // support-function machinery for the Minkowski sum membership test
    let d = pts[0].len();
    let grid = direction_grid(d, crate::geometry::default_grid_size(d));
    let cone_dirs: Vec<&Vec<f64>> = grid
        .iter()
        .filter(|v| ctx.in_cone_f(v, ctx.eta))
        .collect();
    let mut tests: Vec<(Vec<f64>, f64)> = Vec::new();
    for u in &grid {
        let in_polar_cone = cone_dirs
            .iter()
            .all(|c| c.iter().zip(u).map(|(a, b)| a * b).sum::<f64>() <= 1e-9);
        if !in_polar_cone {
            continue;
        }
        let xi_star = grid
            .iter()
            .map(|v| {
                let num: f64 = v.iter().zip(u).map(|(a, b)| a * b).sum();
                num / xi.eval(v)
            })
            .fold(f64::NEG_INFINITY, f64::max);
        tests.push((u.clone(), xi_star));
    }

    let mut bad = 0usize;
    for leaf in leaves {
        let mut covered = false;
        for w in anchors.windows(2) {
            let (upper, lower) = (w[0], w[1]); // trunk order: decreasing (t, .)
            let lo = ctx.t.level(&pts[lower]);
            let hi = ctx.t.level(&pts[upper]);
            let ll = ctx.t.level(leaf);
            if ll < lo.min(hi) || ll > lo.max(hi) {
                continue;
            }
            let wvec = diff_f(leaf, &pts[lower]);
            let inside = tests.iter().all(|(u, xi_star)| {
                let proj: f64 = wvec.iter().zip(u).map(|(a, b)| a * b).sum();
                proj <= window_radius * xi_star + 1e-9
            });
            if inside {
                covered = true;
                break;
            }
        }
        if !covered {
            bad += 1;
        }
    }
    bad
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::events::event_f;
    use crate::lattice::LatticeBox;

    fn arms_config() -> (BondConfiguration, PathSet) {
        let b = LatticeBox::new(&[-8, -8], &[8, 8]).unwrap();
        let mut c = BondConfiguration::empty(&b, 0.4);
        c.open_segment(&[0, 0], &[8, 0]).unwrap();
        c.open_segment(&[0, 0], &[-8, 0]).unwrap();
        c.open_segment(&[0, 0], &[0, -8]).unwrap();
        let w = event_f(&c, &[0, 0], &[8, 0], &[-8, 0], &[0, -8])
            .unwrap()
            .unwrap();
        (c, w)
    }

    #[test]
    fn pure_arms_have_no_leaves_and_meet_at_k() {
        let xi = DirectionalNorm::euclidean(2, 1.0);
        let (c, w) = arms_config();
        let t = tree_skeleton(&c, &w, 3.0, &xi).unwrap();
        assert!(t.leaves.iter().all(|l| l.is_empty()), "{:?}", t.leaves);
        assert!(t.coverage_ok);
        // trunks pairwise intersect exactly at k
        for i in 0..3 {
            for j in i + 1..3 {
                let a: Vec<&Site> = t.trunks[i]
                    .points
                    .iter()
                    .filter(|p| t.trunks[j].points.contains(p))
                    .collect();
                assert_eq!(a, vec![&vec![0i64, 0]]);
            }
        }
        // trunk orientation: first point is the target, last is k
        assert_eq!(t.trunks[0].points.first().unwrap(), &vec![8, 0]);
        assert_eq!(t.trunks[0].points.last().unwrap(), &vec![0, 0]);
    }

    #[test]
    fn big_m_covers_everything_without_leaves() {
        let xi = DirectionalNorm::euclidean(2, 1.0);
        let (c, w) = arms_config();
        let t = tree_skeleton(&c, &w, 20.0, &xi).unwrap();
        assert!(t.leaves.iter().all(|l| l.is_empty()));
        assert!(t.coverage_ok);
    }

    #[test]
    fn hanging_blob_becomes_a_leaf() {
        let xi = DirectionalNorm::euclidean(2, 1.0);
        let b = LatticeBox::new(&[-10, -10], &[10, 10]).unwrap();
        let mut c = BondConfiguration::empty(&b, 0.4);
        c.open_segment(&[0, 0], &[10, 0]).unwrap();
        c.open_segment(&[0, 0], &[-10, 0]).unwrap();
        c.open_segment(&[0, 0], &[0, -10]).unwrap();
        // a long spur hanging off arm 1 at (5,0), rising past the M scale
        c.open_segment(&[5, 0], &[5, 8]).unwrap();
        let w = event_f(&c, &[0, 0], &[10, 0], &[-10, 0], &[0, -10])
            .unwrap()
            .unwrap();
        let t = tree_skeleton(&c, &w, 3.0, &xi).unwrap();
        let total: usize = t.leaves.iter().map(Vec::len).sum();
        assert!(total >= 1, "expected leaf growth, got {t:?}");
        assert!(t.coverage_ok);
    }

    #[test]
    fn delta_good_on_clean_tree() {
        let xi = DirectionalNorm::euclidean(2, 1.0);
        let (c, w) = arms_config();
        let mut t = tree_skeleton(&c, &w, 3.0, &xi).unwrap();
        let rep = delta_good(&mut t, &xi, 0.4, 0.5, 2.0).unwrap();
        assert!(rep.verdict, "{rep:?}");
        for a in rep.arms.iter() {
            assert_eq!(a.bad_leaves, 0);
            assert_eq!(a.bad_skeleton_indices, 0);
        }
    }

    #[test]
    fn boundary_counts_are_inclusive() {
        let arms = [
            ArmBadness {
                bad_leaves: 2,
                bad_skeleton_indices: 2,
                threshold: 2.0,
            },
            ArmBadness {
                bad_leaves: 0,
                bad_skeleton_indices: 0,
                threshold: 2.0,
            },
            ArmBadness {
                bad_leaves: 0,
                bad_skeleton_indices: 0,
                threshold: 2.0,
            },
        ];
        let verdict = arms.iter().all(|a| {
            a.bad_leaves as f64 <= a.threshold
                && a.bad_skeleton_indices as f64 <= a.threshold
        });
        assert!(verdict);
    }
}
