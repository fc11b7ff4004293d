//! Real symmetric and positive semidefinite matrix algebra.
//!
//! Everything here works on `nalgebra::DMatrix<f64>`. [`PsdMatrix`] is the
//! certified wrapper used for word and phrase meanings; the free functions
//! accept plain matrices because composition rules and Choi assembly also
//! need to evaluate off the psd cone.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Numerical tolerances shared by the psd checks and eigenspace grouping.
///
/// All three are relative to the magnitude of the matrices involved, except
/// `zero_tol`, which is an absolute floor on the largest eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    /// Eigenvalues down to `-psd_tol * scale` still count as nonnegative.
    pub psd_tol: f64,
    /// Eigenvalues within `eig_group_tol * |lambda|_max` share an eigenspace.
    pub eig_group_tol: f64,
    /// Largest eigenvalue below this means the matrix is zero.
    pub zero_tol: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            psd_tol: 1e-9,
            eig_group_tol: 1e-8,
            zero_tol: 1e-12,
        }
    }
}

impl Tolerance {
    pub fn new(psd_tol: f64, eig_group_tol: f64, zero_tol: f64) -> Result<Self> {
        for (name, value) in [
            ("psd_tol", psd_tol),
            ("eig_group_tol", eig_group_tol),
            ("zero_tol", zero_tol),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be finite and strictly positive, got {value}"
                )));
            }
        }
        Ok(Tolerance {
            psd_tol,
            eig_group_tol,
            zero_tol,
        })
    }

    /// Absolute eigenvalue threshold for matrices whose entries are at most
    /// `scale` in magnitude.
    pub fn psd_threshold(&self, scale: f64) -> f64 {
        self.psd_tol * scale
    }
}

/// Largest absolute entry.
pub fn max_abs(a: &DMatrix<f64>) -> f64 {
    a.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

fn check_finite(a: &DMatrix<f64>) -> Result<()> {
    if a.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidMatrix("matrix has non-finite entries".into()))
    }
}

fn check_square(a: &DMatrix<f64>) -> Result<()> {
    if a.is_square() {
        Ok(())
    } else {
        Err(Error::InvalidMatrix(format!(
            "expected a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )))
    }
}

fn check_symmetric(a: &DMatrix<f64>) -> Result<()> {
    check_square(a)?;
    let slack = 1e-10 * max_abs(a);
    let m = a.nrows();
    for i in 0..m {
        for j in (i + 1)..m {
            if (a[(i, j)] - a[(j, i)]).abs() > slack {
                return Err(Error::InvalidMatrix(format!(
                    "matrix is not symmetric at ({i}, {j}): {} vs {}",
                    a[(i, j)],
                    a[(j, i)]
                )));
            }
        }
    }
    Ok(())
}

pub(crate) fn check_same_dim(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            found: b.nrows(),
        });
    }
    Ok(())
}

/// `(A + A^T) / 2`
pub fn symmetrize(a: &DMatrix<f64>) -> DMatrix<f64> {
    (a + a.transpose()) * 0.5
}

/// A real symmetric matrix certified positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct PsdMatrix {
    entries: DMatrix<f64>,
}

impl PsdMatrix {
    /// Symmetrizes `entries` and checks that its minimum eigenvalue is at
    /// least `-psd_tol * max|entry|`.
    pub fn new(entries: DMatrix<f64>, tol: &Tolerance) -> Result<Self> {
        check_square(&entries)?;
        check_finite(&entries)?;
        if entries.nrows() == 0 {
            return Err(Error::InvalidMatrix("matrix has dimension 0".into()));
        }
        let entries = symmetrize(&entries);
        let threshold = tol.psd_threshold(max_abs(&entries));
        if !shifted_cholesky_succeeds(&entries, threshold) {
            let min = min_eigenvalue(&entries);
            if min < -threshold {
                return Err(Error::NotPsd { min_eigenvalue: min });
            }
        }
        Ok(PsdMatrix { entries })
    }

    pub fn from_rows(rows: &[Vec<f64>], tol: &Tolerance) -> Result<Self> {
        let m = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != m) {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: bad.len(),
            });
        }
        Self::new(DMatrix::from_fn(m, m, |i, j| rows[i][j]), tol)
    }

    /// Wraps a matrix that is psd by construction (e.g. the output of a
    /// positivity-preserving rule). Symmetrizes but skips the eigenvalue check.
    pub(crate) fn from_psd_unchecked(entries: DMatrix<f64>) -> Self {
        debug_assert!(entries.is_square());
        PsdMatrix {
            entries: symmetrize(&entries),
        }
    }

    pub fn identity(m: usize) -> Self {
        PsdMatrix {
            entries: DMatrix::identity(m, m),
        }
    }

    pub fn zeros(m: usize) -> Self {
        PsdMatrix {
            entries: DMatrix::zeros(m, m),
        }
    }

    pub fn from_diagonal(diag: &[f64], tol: &Tolerance) -> Result<Self> {
        let m = diag.len();
        Self::new(DMatrix::from_fn(m, m, |i, j| if i == j { diag[i] } else { 0.0 }), tol)
    }

    /// `|x><x|`
    pub fn outer(x: &[f64]) -> Self {
        let m = x.len();
        PsdMatrix {
            entries: DMatrix::from_fn(m, m, |i, j| x[i] * x[j]),
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.entries
    }

    pub fn scale(&self, factor: f64) -> Result<Self> {
        if !(factor.is_finite() && factor >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "psd matrices can only be scaled by a nonnegative factor, got {factor}"
            )));
        }
        Ok(PsdMatrix {
            entries: &self.entries * factor,
        })
    }

    /// Sum of two psd matrices, which is again psd.
    pub fn add(&self, other: &PsdMatrix) -> Result<Self> {
        check_same_dim(&self.entries, &other.entries)?;
        Ok(PsdMatrix {
            entries: &self.entries + &other.entries,
        })
    }

    pub fn spectral(&self, tol: &Tolerance) -> SpectralDecomposition {
        decompose_symmetric(&self.entries, tol)
    }

    pub fn trace(&self) -> f64 {
        self.entries.trace()
    }

    pub fn max_eigenvalue(&self) -> f64 {
        max_eigenvalue(&self.entries)
    }
}

/// One eigenspace: eigenvalue and orthogonal projector onto its span.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenGroup {
    pub value: f64,
    pub projector: DMatrix<f64>,
    pub multiplicity: usize,
}

/// `A = sum_i p_i P_i` with the `P_i` orthogonal projectors onto the
/// eigenspaces of `A`, ordered by decreasing eigenvalue.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    groups: Vec<EigenGroup>,
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<f64>,
    grouping_tol: f64,
}

impl SpectralDecomposition {
    pub fn groups(&self) -> &[EigenGroup] {
        &self.groups
    }

    /// All eigenvalues with multiplicity, decreasing.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Orthonormal eigenvectors as columns, in the order of [`Self::eigenvalues`].
    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    pub fn grouping_tol(&self) -> f64 {
        self.grouping_tol
    }

    pub fn dim(&self) -> usize {
        self.eigenvectors.nrows()
    }

    /// `sum_i f(p_i) P_i`
    pub fn map_eigenvalues(&self, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let m = self.dim();
        self.groups
            .iter()
            .fold(DMatrix::zeros(m, m), |acc, g| acc + &g.projector * f(g.value))
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        self.map_eigenvalues(|p| p)
    }
}

fn eigen_sorted(a: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(a.clone());
    let m = a.nrows();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(m, m, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

fn decompose_symmetric(a: &DMatrix<f64>, tol: &Tolerance) -> SpectralDecomposition {
    let (values, vectors) = eigen_sorted(a);
    let m = a.nrows();
    let spread = values.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    let grouping_tol = tol.eig_group_tol * spread;

    // Runs of eigenvalues closer than grouping_tol to their neighbour merge.
    let mut groups: Vec<EigenGroup> = Vec::new();
    let mut start = 0;
    while start < m {
        let mut end = start + 1;
        while end < m && (values[end - 1] - values[end]).abs() <= grouping_tol {
            end += 1;
        }
        let block = vectors.columns(start, end - start);
        let projector = block * block.transpose();
        let value = values[start..end].iter().sum::<f64>() / (end - start) as f64;
        groups.push(EigenGroup {
            value,
            projector,
            multiplicity: end - start,
        });
        start = end;
    }

    SpectralDecomposition {
        groups,
        eigenvalues: values,
        eigenvectors: vectors,
        grouping_tol,
    }
}

/// Spectral decomposition of a real symmetric matrix (not necessarily psd).
pub fn sym_eigendecompose(a: &DMatrix<f64>, tol: &Tolerance) -> Result<SpectralDecomposition> {
    check_finite(a)?;
    check_symmetric(a)?;
    Ok(decompose_symmetric(&symmetrize(a), tol))
}

/// Eigenvalues only, in descending order.
pub(crate) fn eigenvalues_of(a: &DMatrix<f64>) -> Vec<f64> {
    let mut values: Vec<f64> = a.clone().symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(|x, y| y.total_cmp(x));
    values
}

pub(crate) fn min_eigenvalue(a: &DMatrix<f64>) -> f64 {
    if a.nrows() == 0 {
        return 0.0;
    }
    a.clone().symmetric_eigenvalues().min()
}

pub(crate) fn max_eigenvalue(a: &DMatrix<f64>) -> f64 {
    if a.nrows() == 0 {
        return 0.0;
    }
    a.clone().symmetric_eigenvalues().max()
}

/// True iff the minimum eigenvalue of `a` is at least `-psd_tol * max|a|`.
pub fn is_psd(a: &DMatrix<f64>, tol: &Tolerance) -> Result<bool> {
    check_finite(a)?;
    check_symmetric(a)?;
    let threshold = tol.psd_threshold(max_abs(a));
    Ok(shifted_cholesky_succeeds(a, threshold) || is_psd_at_scale(a, max_abs(a), tol)?)
}

/// Cholesky of `a + threshold * I`. Success means every eigenvalue of `a`
/// exceeds `-threshold`; failure is inconclusive near the boundary, so
/// callers fall back to the eigenvalues.
fn shifted_cholesky_succeeds(a: &DMatrix<f64>, threshold: f64) -> bool {
    if threshold <= 0.0 {
        return false;
    }
    let mut shifted = a.clone();
    for i in 0..shifted.nrows() {
        shifted[(i, i)] += threshold;
    }
    shifted.cholesky().is_some()
}

/// psd check with the threshold scaled by an externally supplied magnitude,
/// used when `a` is a difference of two larger matrices.
pub(crate) fn is_psd_at_scale(a: &DMatrix<f64>, scale: f64, tol: &Tolerance) -> Result<bool> {
    Ok(min_eigenvalue(&symmetrize(a)) >= -tol.psd_threshold(scale))
}

/// Loewner order: `a <= b` iff `b - a` is psd. The threshold is scaled by the
/// larger of the two operands, so identical inputs compare equal.
pub fn loewner_leq(a: &PsdMatrix, b: &PsdMatrix, tol: &Tolerance) -> Result<bool> {
    loewner_leq_raw(a.as_matrix(), b.as_matrix(), tol)
}

pub(crate) fn loewner_leq_raw(a: &DMatrix<f64>, b: &DMatrix<f64>, tol: &Tolerance) -> Result<bool> {
    check_same_dim(a, b)?;
    let scale = max_abs(a).max(max_abs(b));
    is_psd_at_scale(&(b - a), scale, tol)
}

/// Divides by the largest eigenvalue, so the result has spectral norm 1.
pub fn normalize_max_eig(a: &PsdMatrix, tol: &Tolerance) -> Result<PsdMatrix> {
    let lambda_max = a.max_eigenvalue();
    if lambda_max < tol.zero_tol {
        return Err(Error::ZeroMatrix {
            max_eigenvalue: lambda_max,
        });
    }
    Ok(PsdMatrix {
        entries: a.as_matrix() / lambda_max,
    })
}

/// Square root via the spectral decomposition; eigenvalues slightly below
/// zero are clamped before taking the root.
pub fn psd_sqrt(a: &PsdMatrix, tol: &Tolerance) -> DMatrix<f64> {
    a.spectral(tol).map_eigenvalues(|p| p.max(0.0).sqrt())
}

/// `sqrt(tr(A^T A))`
pub fn frobenius_norm(a: &DMatrix<f64>) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Elementwise product.
pub fn hadamard(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_same_dim(a, b)?;
    Ok(a.component_mul(b))
}

/// Copy of `a` with every off-diagonal entry set to zero.
pub fn diag_of(a: &DMatrix<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| if i == j { a[(i, j)] } else { 0.0 })
}

/// `1^T A 1`
pub fn sum_entries(a: &DMatrix<f64>) -> f64 {
    a.iter().sum()
}

pub fn trace(a: &DMatrix<f64>) -> f64 {
    a.trace()
}

pub fn all_ones(m: usize) -> DMatrix<f64> {
    DMatrix::from_element(m, m, 1.0)
}

/// Kronecker product `a ⊗ b`, with row index `(i_a, i_b) -> i_a * rows(b) + i_b`.
pub fn kron(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    a.kronecker(b)
}
