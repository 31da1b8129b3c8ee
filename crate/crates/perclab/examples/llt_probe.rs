use perclab::experiments::llt::llt_junction_histogram;
use perclab::experiments::xi::{estimate_xi, tabulation_row};
use perclab::geometry::triple::in_x3_prime;
use perclab::geometry::DirectionalNorm;

fn main() {
    let p = 0.35;
    let dirs: Vec<(Vec<f64>, Vec<i64>)> = vec![
        (vec![1.0, 0.0], (3..=9).collect()),
        (vec![3.0, 1.0], vec![1, 2, 3]),
        (vec![2.0, 1.0], vec![2, 3, 4]),
        (vec![3.0, 2.0], vec![1, 2]),
        (vec![1.0, 1.0], vec![2, 3, 4, 5, 6]),
    ];
    let mut rows = Vec::new();
    for (d, ms) in &dirs {
        let est = estimate_xi(p, d, ms, 2_000_000, 777, 7, false).unwrap();
        let row = tabulation_row(&est);
        println!("dir {:?} slope/unit {:.4}", d, row.1);
        rows.push(row);
    }
    let xi = DirectionalNorm::tabulated(&rows, 1e-3, true).unwrap();
    println!("tabulated c- {:.4} c+ {:.4}", xi.c_minus, xi.c_plus);

    let n = 24i64;
    let triple = [vec![7.0/24.0, 0.0], vec![-3.0/24.0, 6.0/24.0], vec![-3.0/24.0, -6.0/24.0]];
    let x3 = in_x3_prime(&xi, &triple).unwrap();
    println!("X3' accepted {} margins {:?}", x3.accepted, x3.margins);
    let r = llt_junction_histogram(&xi, p, &triple, n, 30_000_000, 20260809, 8, 0.3).unwrap();
    println!("cond {} junc {} multi {}", r.conditioned, r.with_junction, r.multi_junction_trials);
    println!("mean_y [{:.4},{:.4}] sigmas [{:.2},{:.2}]", r.mean_y[0], r.mean_y[1], r.mean_sigmas[0], r.mean_sigmas[1]);
    println!("pred [[{:.4},{:.4}],[..,{:.4}]]", r.predicted_cov[0][0], r.predicted_cov[0][1], r.predicted_cov[1][1]);
    println!("cov  [[{:.4},{:.4}],[..,{:.4}]]", r.cov_y[0][0], r.cov_y[0][1], r.cov_y[1][1]);
    println!("covrel {:.3} spread {:.4}", r.cov_rel_error, r.spread_fraction);
    println!("x0 {:?}", r.x0);
}
