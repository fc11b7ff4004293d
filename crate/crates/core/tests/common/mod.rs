//! Reference implementations for tests, written on plain `Vec`s without the
//! library's linear algebra.

#![allow(dead_code)]

pub type Dense = Vec<Vec<f64>>;

pub fn to_dense(a: &nalgebra::DMatrix<f64>) -> Dense {
    (0..a.nrows()).map(|i| (0..a.ncols()).map(|j| a[(i, j)]).collect()).collect()
}

/// Cyclic Jacobi eigensolver for a symmetric matrix. Returns eigenvalues in
/// descending order and the matching eigenvectors as columns.
pub fn jacobi_eigen(a: &Dense) -> (Vec<f64>, Dense) {
    let n = a.len();
    let mut a = a.clone();
    let mut v: Dense = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        let total: f64 = a.iter().flatten().map(|x| x * x).sum();
        if off <= 1e-30 * total.max(f64::MIN_POSITIVE) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j][j].total_cmp(&a[i][i]));
    let values = order.iter().map(|&i| a[i][i]).collect();
    let vectors = (0..n).map(|r| order.iter().map(|&c| v[r][c]).collect()).collect();
    (values, vectors)
}

pub fn sub(a: &Dense, b: &Dense) -> Dense {
    a.iter().zip(b).map(|(x, y)| x.iter().zip(y).map(|(p, q)| p - q).collect()).collect()
}

pub fn frobenius(a: &Dense) -> f64 {
    a.iter().flatten().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn max_abs(a: &Dense) -> f64 {
    a.iter().flatten().fold(0.0, |m, x| m.max(x.abs()))
}

/// `sum_{lambda_i < -threshold} |lambda_i| u_i u_i^T`, assembled entry by entry.
pub fn negative_part(a: &Dense, threshold: f64) -> Dense {
    let n = a.len();
    let (values, vectors) = jacobi_eigen(a);
    let mut e = vec![vec![0.0; n]; n];
    for (k, &lambda) in values.iter().enumerate() {
        if lambda < -threshold {
            for i in 0..n {
                for j in 0..n {
                    e[i][j] += -lambda * vectors[i][k] * vectors[j][k];
                }
            }
        }
    }
    e
}

/// Oracle for `k_E` with the same drop threshold as the library.
pub fn oracle_k_e(a: &Dense, b: &Dense, psd_tol: f64) -> f64 {
    let threshold = psd_tol * max_abs(a).max(max_abs(b));
    let e = negative_part(&sub(b, a), threshold);
    1.0 - frobenius(&e) / frobenius(a)
}

/// Oracle for `k_BA` with the same drop threshold as the library.
pub fn oracle_k_ba(a: &Dense, b: &Dense, psd_tol: f64) -> f64 {
    let threshold = psd_tol * max_abs(a).max(max_abs(b));
    let (values, _) = jacobi_eigen(&sub(b, a));
    let kept: Vec<f64> = values.into_iter().filter(|l| l.abs() > threshold).collect();
    let abs: f64 = kept.iter().map(|l| l.abs()).sum();
    if abs == 0.0 {
        1.0
    } else {
        kept.iter().sum::<f64>() / abs
    }
}

/// AUC by comparing every positive with every negative.
pub fn brute_force_auc(scores: &[f64], labels: &[bool]) -> f64 {
    let mut wins = 0.0;
    let mut pairs = 0.0;
    for (i, &li) in labels.iter().enumerate() {
        if !li {
            continue;
        }
        for (j, &lj) in labels.iter().enumerate() {
            if lj {
                continue;
            }
            pairs += 1.0;
            if scores[i] > scores[j] {
                wins += 1.0;
            } else if scores[i] == scores[j] {
                wins += 0.5;
            }
        }
    }
    wins / pairs
}

/// Two-sided Welch p-value for `{0.1, 0.2, 0.3}` vs `{0.4, 0.5, 0.6}`,
/// computed beforehand with an independent statistics package.
pub const WELCH_REFERENCE_P: f64 = 0.021311641128756;
