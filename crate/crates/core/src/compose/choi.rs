//! Choi matrices of linear maps on `m x m` matrices.
//!
//! Convention: `C = sum_ij Φ(E_ij) ⊗ E_ij`, a `(d m) x (d m)` matrix whose
//! row index `a * m + b` pairs an output index `a` with an input index `b`.
//! Then `Φ(n)[a, c] = sum_bd C[(a, b), (c, d)] n[b, d]`, i.e. the partial
//! trace over the input factor of `C (I ⊗ n^T)`.

use nalgebra::DMatrix;
use rand::Rng;

use super::rule::CompositionRule;
use super::{BilinearMap, BilinearRule};
use crate::error::{Error, Result};
use crate::linalg::{max_abs, min_eigenvalue, symmetrize, PsdMatrix, Tolerance};
use crate::random::{random_psd_any_rank, random_unit_vector, rng_for};

#[derive(Debug, Clone, PartialEq)]
pub struct ChoiMatrix {
    in_dim: usize,
    out_dim: usize,
    entries: DMatrix<f64>,
}

impl ChoiMatrix {
    pub fn new(in_dim: usize, out_dim: usize, entries: DMatrix<f64>) -> Result<Self> {
        let size = in_dim * out_dim;
        if entries.shape() != (size, size) {
            return Err(Error::DimensionMismatch {
                expected: size,
                found: entries.nrows(),
            });
        }
        if entries.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidMatrix("Choi matrix has non-finite entries".into()));
        }
        let slack = 1e-10 * max_abs(&entries);
        if (&entries - entries.transpose()).iter().any(|x| x.abs() > slack) {
            return Err(Error::InvalidMatrix("Choi matrix is not symmetric".into()));
        }
        Ok(ChoiMatrix {
            in_dim,
            out_dim,
            entries: symmetrize(&entries),
        })
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn min_eigenvalue(&self) -> f64 {
        min_eigenvalue(&self.entries)
    }

    /// psd up to `psd_tol` relative to the largest entry.
    pub fn is_psd(&self, tol: &Tolerance) -> bool {
        self.min_eigenvalue() >= -tol.psd_threshold(max_abs(&self.entries))
    }
}

fn unit(m: usize, i: usize, j: usize) -> DMatrix<f64> {
    let mut e = DMatrix::zeros(m, m);
    e[(i, j)] = 1.0;
    e
}

/// `sum_ij f(E_ij) ⊗ E_ij` for a linear map `f` from `in_dim x in_dim`
/// matrices to `out_dim x out_dim` matrices.
pub fn choi_of_map(
    in_dim: usize,
    out_dim: usize,
    f: impl Fn(&DMatrix<f64>) -> DMatrix<f64>,
) -> Result<ChoiMatrix> {
    ChoiMatrix::new(in_dim, out_dim, choi_entries(in_dim, out_dim, f)?)
}

// Unvalidated: images of non-symmetric inputs give non-symmetric blocks.
fn choi_entries(
    in_dim: usize,
    out_dim: usize,
    f: impl Fn(&DMatrix<f64>) -> DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let size = in_dim * out_dim;
    let mut entries = DMatrix::zeros(size, size);
    for i in 0..in_dim {
        for j in 0..in_dim {
            let image = f(&unit(in_dim, i, j));
            if image.shape() != (out_dim, out_dim) {
                return Err(Error::DimensionMismatch {
                    expected: out_dim,
                    found: image.nrows(),
                });
            }
            // Only the (i, j) entry of E_ij is nonzero.
            for a in 0..out_dim {
                for c in 0..out_dim {
                    entries[(a * in_dim + i, c * in_dim + j)] += image[(a, c)];
                }
            }
        }
    }
    Ok(entries)
}

/// Recovers `Φ(n)` from the Choi matrix of `Φ`.
pub fn apply_choi(choi: &ChoiMatrix, n: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (m, d) = (choi.in_dim, choi.out_dim);
    if n.shape() != (m, m) {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: n.nrows(),
        });
    }
    let c = &choi.entries;
    Ok(DMatrix::from_fn(d, d, |a, cc| {
        let mut acc = 0.0;
        for b in 0..m {
            for dd in 0..m {
                acc += c[(a * m + b, cc * m + dd)] * n[(b, dd)];
            }
        }
        acc
    }))
}

pub(crate) fn choi_of_bilinear(map: &dyn BilinearMap, v: &DMatrix<f64>) -> Result<ChoiMatrix> {
    let m = v.nrows();
    choi_of_map(m, m, |e| map.apply(e, v))
}

/// Choi matrix of the lifted verb map `n -> Compr(n, v)`.
pub fn choi_of_rule(rule: CompositionRule, v: &PsdMatrix) -> Result<ChoiMatrix> {
    let bilinear = BilinearRule::new(rule)?;
    choi_of_bilinear(&bilinear, v.as_matrix())
}

/// Choi matrix of `v -> Choi(Compr(., v))`, an `m^3 x m^3` matrix. It is
/// psd exactly when the lifting itself is completely positive.
pub fn outer_choi(map: &dyn BilinearMap, m: usize) -> Result<ChoiMatrix> {
    let size = m * m * m;
    let mut entries = DMatrix::zeros(size, size);
    for x in 0..m {
        for y in 0..m {
            let v = unit(m, x, y);
            let block = choi_entries(m, m, |e| map.apply(e, &v))?;
            for r in 0..m * m {
                for c in 0..m * m {
                    entries[(r * m + x, c * m + y)] += block[(r, c)];
                }
            }
        }
    }
    ChoiMatrix::new(m, m * m, entries)
}

/// Outcome of [`cp_certificate`].
#[derive(Debug, Clone, PartialEq)]
pub struct CpCertificate {
    pub name: String,
    pub m: usize,
    pub trials: usize,
    /// Smallest eigenvalue of `Choi(Compr(., v))` over the sampled `v`,
    /// divided by the largest entry of that Choi matrix.
    pub min_relative_choi_eigenvalue: f64,
    /// Smallest eigenvalue of the outer Choi matrix.
    pub min_outer_eigenvalue: f64,
    pub completely_positive: bool,
}

/// Samples `trials` random psd verbs and checks that each lifted map has a
/// psd Choi matrix, then checks the outer Choi matrix.
pub fn cp_certificate(
    map: &dyn BilinearMap,
    m: usize,
    trials: usize,
    seed: u64,
    tol: &Tolerance,
) -> Result<CpCertificate> {
    if m == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    let mut rng = rng_for(seed, 0);
    let mut min_relative = f64::INFINITY;
    let mut all_psd = true;
    for _ in 0..trials {
        let v = random_psd_any_rank(&mut rng, m);
        let choi = choi_of_bilinear(map, v.as_matrix())?;
        let scale = max_abs(choi.entries());
        let min = choi.min_eigenvalue();
        if scale > 0.0 {
            min_relative = min_relative.min(min / scale);
        }
        all_psd &= choi.is_psd(tol);
    }
    let outer = outer_choi(map, m)?;
    let min_outer = outer.min_eigenvalue();
    Ok(CpCertificate {
        name: map.name().to_string(),
        m,
        trials,
        min_relative_choi_eigenvalue: if min_relative.is_finite() { min_relative } else { 0.0 },
        min_outer_eigenvalue: min_outer,
        completely_positive: all_psd && outer.is_psd(tol),
    })
}

pub fn is_completely_positive(
    rule: CompositionRule,
    m: usize,
    trials: usize,
    seed: u64,
    tol: &Tolerance,
) -> Result<bool> {
    let bilinear = BilinearRule::new(rule)?;
    Ok(cp_certificate(&bilinear, m, trials, seed, tol)?.completely_positive)
}

/// One-sided block positivity test: `false` as soon as a random unit product
/// vector `v ⊗ w` gives a quadratic form below `-psd_tol * max|C|`.
pub fn block_positive_sampled(choi: &ChoiMatrix, samples: usize, seed: u64, tol: &Tolerance) -> bool {
    let threshold = tol.psd_threshold(max_abs(choi.entries()));
    let mut rng = rng_for(seed, 1);
    (0..samples).all(|_| product_form(choi, &mut rng) >= -threshold)
}

fn product_form<R: Rng + ?Sized>(choi: &ChoiMatrix, rng: &mut R) -> f64 {
    let v = random_unit_vector(rng, choi.out_dim);
    let w = random_unit_vector(rng, choi.in_dim);
    let x: Vec<f64> = v
        .iter()
        .flat_map(|&vi| w.iter().map(move |&wj| vi * wj))
        .collect();
    let c = &choi.entries;
    let mut q = 0.0;
    for (i, xi) in x.iter().enumerate() {
        for (j, xj) in x.iter().enumerate() {
            q += xi * c[(i, j)] * xj;
        }
    }
    q
}
