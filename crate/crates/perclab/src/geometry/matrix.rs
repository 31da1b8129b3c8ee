//! Small dense matrix helpers (d is 2 or 3 in practice).

pub type Matrix = Vec<Vec<f64>>;

pub fn identity(d: usize) -> Matrix {
    (0..d)
        .map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

pub fn mat_vec(m: &Matrix, x: &[f64]) -> Vec<f64> {
    m.iter()
        .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
        .collect()
}

pub fn transpose_sym(m: &mut Matrix) {
    let d = m.len();
    for i in 0..d {
        for j in i + 1..d {
            let s = 0.5 * (m[i][j] + m[j][i]);
            m[i][j] = s;
            m[j][i] = s;
        }
    }
}

pub fn trace(m: &Matrix) -> f64 {
    (0..m.len()).map(|i| m[i][i]).sum()
}

/// Solve `a x = b` by Gaussian elimination with partial pivoting.
/// Returns None when the pivot collapses.
pub fn solve(a: &Matrix, b: &[f64]) -> Option<Vec<f64>> {
    let d = a.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .zip(b)
        .map(|(row, &rhs)| {
            let mut r = row.clone();
            r.push(rhs);
            r
        })
        .collect();
    for col in 0..d {
        let (piv, pval) = (col..d)
            .map(|r| (r, m[r][col].abs()))
            .max_by(|x, y| x.1.total_cmp(&y.1))?;
        if pval < 1e-14 {
            return None;
        }
        m.swap(col, piv);
        for r in 0..d {
            if r != col {
                let f = m[r][col] / m[col][col];
                for c in col..=d {
                    m[r][c] -= f * m[col][c];
                }
            }
        }
    }
    Some((0..d).map(|r| m[r][d] / m[r][r]).collect())
}

pub fn inverse(a: &Matrix) -> Option<Matrix> {
    let d = a.len();
    let mut cols = Vec::with_capacity(d);
    for j in 0..d {
        let e: Vec<f64> = (0..d).map(|i| if i == j { 1.0 } else { 0.0 }).collect();
        cols.push(solve(a, &e)?);
    }
    Some((0..d).map(|i| (0..d).map(|j| cols[j][i]).collect()).collect())
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
pub fn sym_eigenvalues(a: &Matrix) -> Vec<f64> {
    let d = a.len();
    let mut m = a.clone();
    for _sweep in 0..64 {
        let mut off = 0.0;
        for i in 0..d {
            for j in i + 1..d {
                off += m[i][j] * m[i][j];
            }
        }
        if off < 1e-28 {
            break;
        }
        for p in 0..d {
            for q in p + 1..d {
                if m[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = 0.5 * (m[q][q] - m[p][p]) / m[p][q];
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..d {
                    let (mkp, mkq) = (m[k][p], m[k][q]);
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..d {
                    let (mpk, mqk) = (m[p][k], m[q][k]);
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..d).map(|i| m[i][i]).collect();
    eig.sort_by(f64::total_cmp);
    eig
}

/// Spectral norm of a symmetric matrix.
pub fn sym_operator_norm(a: &Matrix) -> f64 {
    sym_eigenvalues(a)
        .into_iter()
        .map(f64::abs)
        .fold(0.0, f64::max)
}

/// Lower-triangular Cholesky factor of a symmetric positive definite
/// matrix; None when a pivot is nonpositive.
pub fn cholesky(a: &Matrix) -> Option<Matrix> {
    let d = a.len();
    let mut l: Matrix = vec![vec![0.0; d]; d];
    for i in 0..d {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let v = a[i][i] - s;
                if v <= 0.0 {
                    return None;
                }
                l[i][j] = v.sqrt();
            } else {
                l[i][j] = (a[i][j] - s) / l[j][j];
            }
        }
    }
    Some(l)
}

pub fn sub(a: &Matrix, b: &Matrix) -> Matrix {
    a.iter()
        .zip(b)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x - y).collect())
        .collect()
}

pub fn scale(a: &Matrix, s: f64) -> Matrix {
    a.iter()
        .map(|r| r.iter().map(|x| x * s).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_and_inverse_roundtrip() {
        let a = vec![vec![4.0, 1.0], vec![1.0, 3.0]];
        let x = solve(&a, &[1.0, 2.0]).unwrap();
        assert!((4.0 * x[0] + x[1] - 1.0).abs() < 1e-12);
        assert!((x[0] + 3.0 * x[1] - 2.0).abs() < 1e-12);
        let inv = inverse(&a).unwrap();
        let prod = mat_vec(&inv, &[4.0, 1.0]);
        assert!((prod[0] - 1.0).abs() < 1e-12 && prod[1].abs() < 1e-12);
    }

    #[test]
    fn jacobi_eigenvalues_of_known_matrix() {
        let a = vec![vec![2.0, 1.0], vec![1.0, 2.0]];
        let e = sym_eigenvalues(&a);
        assert!((e[0] - 1.0).abs() < 1e-10);
        assert!((e[1] - 3.0).abs() < 1e-10);
        assert!((sym_operator_norm(&a) - 3.0).abs() < 1e-10);
    }

    #[test]
    fn eigen_3x3_diagonalish() {
        let a = vec![
            vec![1.0, 0.2, 0.0],
            vec![0.2, 2.0, -0.1],
            vec![0.0, -0.1, 3.0],
        ];
        let e = sym_eigenvalues(&a);
        let tr: f64 = trace(&a);
        assert!((e.iter().sum::<f64>() - tr).abs() < 1e-9);
    }
}
