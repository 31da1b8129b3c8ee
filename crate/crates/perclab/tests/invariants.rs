//! Cross-module invariants: event implications and monotonicity, estimator
//! consistency against the exact oracle, geometry identities on random
//! inputs, and the exact renewal identity over a strip matrix.

use perclab::cluster::build_clusters;
use perclab::events::{event_e, event_f, find_junctions, EventSpec};
use perclab::experiments::{mc_estimate, xi};
use perclab::geometry::triple::{in_x3_prime, minimize_phi, phi};
use perclab::geometry::DirectionalNorm;
use perclab::lattice::LatticeBox;
use perclab::oracle;
use perclab::rng::KeyedStream;
use perclab::BondConfiguration;
use proptest::prelude::*;

#[test]
fn event_f_implies_event_e() {
    let b = LatticeBox::new(&[0, 0], &[5, 5]).unwrap();
    let n = ([0, 0], [5, 5], [0, 5]);
    let mut seen = 0;
    for trial in 0..400 {
        let c = BondConfiguration::sample(0.6, &b, 99, trial).unwrap();
        if let Ok(Some(_)) = event_f(&c, &[2, 2], &n.0, &n.1, &n.2) {
            seen += 1;
            assert!(event_e(&c, &n.0, &n.1, &n.2).unwrap());
        }
    }
    assert!(seen > 0, "test never exercised the implication");
}

#[test]
fn events_monotone_under_edge_insertion() {
    let b = LatticeBox::new(&[0, 0], &[4, 4]).unwrap();
    let n = ([0, 0], [4, 4], [0, 4]);
    let k = [2, 2];
    let mut stream = KeyedStream::new(5, 0);
    for trial in 0..200 {
        let mut c = BondConfiguration::sample(0.45, &b, 7, trial).unwrap();
        let e_before = event_e(&c, &n.0, &n.1, &n.2).unwrap();
        let f_before = event_f(&c, &k, &n.0, &n.1, &n.2).unwrap().is_some();
        // open a handful of random extra edges
        for _ in 0..4 {
            let e = (stream.next_u64() % c.open.len() as u64) as usize;
            c.open[e] = true;
        }
        let e_after = event_e(&c, &n.0, &n.1, &n.2).unwrap();
        let f_after = event_f(&c, &k, &n.0, &n.1, &n.2).unwrap().is_some();
        assert!(!e_before || e_after, "E lost by adding an edge");
        assert!(!f_before || f_after, "F lost by adding an edge");
    }
}

#[test]
fn bk_consistency_of_estimators() {
    // P[F(k; n)] <= prod_i P[k <-> n_i] within combined error
    let b = LatticeBox::new(&[0, 0], &[4, 4]).unwrap();
    let k = vec![2i64, 2];
    let n = [vec![0i64, 0], vec![4i64, 4], vec![0i64, 4]];
    let trials = 20_000;
    let f = mc_estimate(
        &EventSpec::Junction {
            k: k.clone(),
            n: n.clone(),
        },
        0.45,
        &b,
        trials,
        11,
    )
    .unwrap();
    let mut prod = 1.0;
    let mut err = 0.0;
    for t in &n {
        let two = mc_estimate(
            &EventSpec::TwoPoint {
                a: k.clone(),
                b: t.clone(),
            },
            0.45,
            &b,
            trials,
            13,
        )
        .unwrap();
        err = f64::max(err, two.stderr);
        prod *= two.mean;
    }
    assert!(
        f.mean <= prod + 3.0 * (f.stderr + err),
        "BK violated: {} vs {}",
        f.mean,
        prod
    );
}

#[test]
fn junctions_agree_with_per_site_flow_on_random_configs() {
    let b = LatticeBox::new(&[0, 0], &[4, 4]).unwrap();
    let n = ([0i64, 0], [4i64, 0], [2i64, 4]);
    for trial in 0..120 {
        let c = BondConfiguration::sample(0.55, &b, 31, trial).unwrap();
        let fast = find_junctions(&c, &n.0, &n.1, &n.2).unwrap();
        let mut slow = Vec::new();
        for idx in 0..b.n_sites() {
            let s = b.site_vec(idx);
            if [&n.0[..], &n.1[..], &n.2[..]].contains(&&s[..]) {
                continue;
            }
            if let Ok(Some(_)) = event_f(&c, &s, &n.0, &n.1, &n.2) {
                slow.push(s);
            }
        }
        assert_eq!(fast, slow, "trial {trial}");
    }
}

#[test]
fn mc_within_four_sigma_of_exact_on_most_seeds() {
    // |MC - exact| <= 4 stderr on >= 95% of 100 seeds
    let b = LatticeBox::new(&[0, 0], &[3, 2]).unwrap();
    let spec = EventSpec::TwoPoint {
        a: vec![0, 0],
        b: vec![3, 2],
    };
    let exact = oracle::exact_probability(&b, 0.45, |c| spec.holds(c).unwrap())
        .unwrap()
        .probability;
    let trials = 10_000;
    let mut covered = 0;
    for seed in 0..100 {
        let est = mc_estimate(&spec, 0.45, &b, trials, seed).unwrap();
        if (est.mean - exact).abs() <= 4.0 * est.stderr.max(1e-12) {
            covered += 1;
        }
    }
    assert!(covered >= 95, "only {covered}/100 seeds within 4 sigma");
}

#[test]
fn renewal_residual_over_strip_matrix() {
    let xi = DirectionalNorm::euclidean(2, 1.0);
    for width in [1i64, 2, 3] {
        for len in [2i64, 3, 4, 5] {
            if width == 3 && len > 4 {
                continue; // 27 edges would trip the enumeration guard
            }
            for p in [0.2, 0.3] {
                let b = LatticeBox::new(&[0, 0], &[len, width - 1]).unwrap();
                let check = oracle::verify_renewal(
                    &b,
                    p,
                    &xi,
                    &[1.0, 0.0],
                    0.6,
                    1.0,
                    &[0, 0],
                    &[len, 0],
                    3,
                )
                .unwrap();
                assert!(
                    check.residual <= 1e-12,
                    "width {width} len {len} p {p}: residual {}",
                    check.residual
                );
            }
        }
    }
}

#[test]
fn phi_minimum_beats_random_points() {
    let xi = DirectionalNorm::smoothed_l1(2, 1.0, 0.06);
    let anchors = [vec![2.0, 0.3], vec![-1.0, 1.8], vec![-0.7, -2.1]];
    let t = minimize_phi(&xi, &anchors).unwrap();
    assert!(t.admissible);
    let f0 = phi(&xi, &anchors, &t.x0);
    let scale = anchors
        .iter()
        .map(|a| {
            let d: f64 = a
                .iter()
                .zip(&t.x0)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>();
            xi.eval(&[d.sqrt(), 0.0])
        })
        .fold(f64::INFINITY, f64::min);
    let mut s = KeyedStream::new(99, 0);
    for _ in 0..1000 {
        let ball = s.next_in_ball(2);
        let z: Vec<f64> = (0..2).map(|a| t.x0[a] + ball[a] * scale).collect();
        assert!(phi(&xi, &anchors, &z) >= f0 - 1e-9);
    }
}

#[test]
fn phi_hessian_is_second_order() {
    // phi(x0+y) - phi(x0) - y.Hy/2 = o(|y|^2) across dyadic scales
    let xi = DirectionalNorm::euclidean(2, 1.0);
    let anchors = [vec![1.5, 0.0], vec![-0.75, 1.3], vec![-0.75, -1.3]];
    let t = minimize_phi(&xi, &anchors).unwrap();
    let h = t.hessian.clone().unwrap();
    let dir = [0.6f64, -0.8];
    let mut prev_ratio = f64::INFINITY;
    let mut scale = 0.2;
    for _ in 0..4 {
        let y = [dir[0] * scale, dir[1] * scale];
        let z = [t.x0[0] + y[0], t.x0[1] + y[1]];
        let quad = 0.5
            * (y[0] * (h[0][0] * y[0] + h[0][1] * y[1])
                + y[1] * (h[1][0] * y[0] + h[1][1] * y[1]));
        let rem = (phi(&xi, &anchors, &z) - phi(&xi, &anchors, &t.x0) - quad).abs();
        let ratio = rem / (scale * scale);
        assert!(
            ratio <= prev_ratio * 1.05 + 1e-9,
            "remainder/scale^2 did not shrink: {ratio} after {prev_ratio}"
        );
        prev_ratio = ratio;
        scale *= 0.5;
    }
}

#[test]
fn x3_prime_invariant_under_translation_and_symmetry() {
    let xi = DirectionalNorm::euclidean(2, 1.0);
    let anchors = [vec![1.0, 0.2], vec![-0.8, 0.9], vec![-0.1, -1.1]];
    let base = in_x3_prime(&xi, &anchors).unwrap().accepted;
    // translation
    let shifted: [Vec<f64>; 3] = [
        anchors[0].iter().map(|v| v + 3.7).collect(),
        anchors[1].iter().map(|v| v + 3.7).collect(),
        anchors[2].iter().map(|v| v + 3.7).collect(),
    ];
    assert_eq!(in_x3_prime(&xi, &shifted).unwrap().accepted, base);
    // reflection and axis swap (declared symmetry group)
    let reflected: [Vec<f64>; 3] = [
        vec![-anchors[0][0], anchors[0][1]],
        vec![-anchors[1][0], anchors[1][1]],
        vec![-anchors[2][0], anchors[2][1]],
    ];
    assert_eq!(in_x3_prime(&xi, &reflected).unwrap().accepted, base);
    let swapped: [Vec<f64>; 3] = [
        vec![anchors[0][1], anchors[0][0]],
        vec![anchors[1][1], anchors[1][0]],
        vec![anchors[2][1], anchors[2][0]],
    ];
    assert_eq!(in_x3_prime(&xi, &swapped).unwrap().accepted, base);
}

#[test]
fn xi_slope_stable_under_margin_doubling() {
    let e1 = xi::estimate_xi(0.3, &[1.0, 0.0], &[3, 4, 5, 6], 150_000, 2024, 4, false).unwrap();
    let e2 = xi::estimate_xi(0.3, &[1.0, 0.0], &[3, 4, 5, 6], 150_000, 2024, 8, false).unwrap();
    let sigma = (e1.slope_stderr.powi(2) + e2.slope_stderr.powi(2)).sqrt();
    assert!(
        (e1.slope - e2.slope).abs() <= 3.0 * sigma,
        "margin doubling moved the slope: {} vs {}",
        e1.slope,
        e2.slope
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn partition_matches_bfs(seed in 0u64..5000, p in 0.0f64..1.0) {
        let b = LatticeBox::new(&[0, 0], &[3, 3]).unwrap();
        let c = BondConfiguration::sample(p, &b, seed, 0).unwrap();
        let part = build_clusters(&c);
        // BFS oracle
        let mut comp = vec![u32::MAX; b.n_sites()];
        let mut next = 0u32;
        for s in 0..b.n_sites() {
            if comp[s] != u32::MAX { continue; }
            let mut stack = vec![s];
            comp[s] = next;
            while let Some(u) = stack.pop() {
                for (ei, v) in b.incident(u) {
                    if c.open[*ei as usize] && comp[*v as usize] == u32::MAX {
                        comp[*v as usize] = next;
                        stack.push(*v as usize);
                    }
                }
            }
            next += 1;
        }
        for s in 0..b.n_sites() {
            for t in 0..b.n_sites() {
                prop_assert_eq!(
                    part.cluster_of[s] == part.cluster_of[t],
                    comp[s] == comp[t]
                );
            }
        }
    }

    #[test]
    fn dump_roundtrip(seed in 0u64..10_000, p in 0.0f64..1.0) {
        let b = LatticeBox::new(&[-1, 2], &[3, 5]).unwrap();
        let c = BondConfiguration::sample(p, &b, seed, 3).unwrap();
        let mut buf = Vec::new();
        c.dump(&mut buf).unwrap();
        let d = BondConfiguration::load(&mut buf.as_slice()).unwrap();
        prop_assert_eq!(c.open, d.open);
        prop_assert_eq!(c.seed, d.seed);
    }

    #[test]
    fn norm_triangle_inequality(ax in -3.0f64..3.0, ay in -3.0f64..3.0,
                                bx in -3.0f64..3.0, by in -3.0f64..3.0) {
        let xi = DirectionalNorm::smoothed_l1(2, 0.9, 0.08);
        let a = [ax, ay];
        let b2 = [bx, by];
        let s = [ax + bx, ay + by];
        prop_assert!(xi.eval(&s) <= xi.eval(&a) + xi.eval(&b2) + 1e-10);
    }

    #[test]
    fn norm_homogeneity(x in -3.0f64..3.0, y in -3.0f64..3.0, lam in 0.01f64..10.0) {
        let xi = DirectionalNorm::euclidean(2, 1.3);
        let v = [x, y];
        let s = [lam * x, lam * y];
        let lhs = xi.eval(&s);
        let rhs = lam * xi.eval(&v);
        prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs.max(1e-12));
    }
}
