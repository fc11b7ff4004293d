//! Graded and crisp hyponymy between psd matrices.
//!
//! Both graded measures look at the spectrum of `B - A`. Eigenvalues whose
//! magnitude is below `psd_tol * max(max|A|, max|B|)` are treated as zero,
//! which makes `k_e(A, B) == 1`, `k_ba(A, B) == 1` and `crisp(A, B)` agree.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{check_same_dim, eigenvalues_of, frobenius_norm, loewner_leq, max_abs, PsdMatrix, Tolerance};

/// Which hyponymy measure to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Measure {
    KE,
    KBA,
    Crisp,
}

impl Measure {
    pub fn id(self) -> &'static str {
        match self {
            Measure::KE => "ke",
            Measure::KBA => "kba",
            Measure::Crisp => "crisp",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            Measure::KE => "k_E",
            Measure::KBA => "k_BA",
            Measure::Crisp => "crisp",
        }
    }

    pub fn all() -> [Measure; 3] {
        [Measure::KE, Measure::KBA, Measure::Crisp]
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "").as_str() {
            "ke" => Ok(Measure::KE),
            "kba" => Ok(Measure::KBA),
            "crisp" => Ok(Measure::Crisp),
            _ => Err(Error::UnknownMeasure { given: s.to_string() }),
        }
    }
}

impl serde::Serialize for Measure {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(self.id())
    }
}

impl<'de> serde::Deserialize<'de> for Measure {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A measured value tagged with the measure that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyponymyScore {
    pub value: f64,
    pub measure: Measure,
}

fn drop_threshold(a: &DMatrix<f64>, b: &DMatrix<f64>, tol: &Tolerance) -> f64 {
    tol.psd_threshold(max_abs(a).max(max_abs(b)))
}

/// Negative part of `B - A`: `E = sum_{lambda_i < -tol} |lambda_i| u_i u_i^T`.
/// It is the smallest psd `E` with `A + D = B + E` for some psd `D`.
pub fn error_term(a: &PsdMatrix, b: &PsdMatrix, tol: &Tolerance) -> Result<DMatrix<f64>> {
    check_same_dim(a.as_matrix(), b.as_matrix())?;
    let threshold = drop_threshold(a.as_matrix(), b.as_matrix(), tol);
    let diff = b.as_matrix() - a.as_matrix();
    let eig = nalgebra::SymmetricEigen::new(crate::linalg::symmetrize(&diff));
    let m = diff.nrows();
    let mut e = DMatrix::zeros(m, m);
    for (i, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda < -threshold {
            let u = eig.eigenvectors.column(i);
            e += (u * u.transpose()) * (-lambda);
        }
    }
    Ok(e)
}

/// `k_E = 1 - ||E|| / ||A||` with `E` from [`error_term`] and Frobenius norms.
pub fn k_e(a: &PsdMatrix, b: &PsdMatrix, tol: &Tolerance) -> Result<f64> {
    check_same_dim(a.as_matrix(), b.as_matrix())?;
    let norm_a = frobenius_norm(a.as_matrix());
    if norm_a <= tol.zero_tol {
        return Err(Error::ZeroMatrix { max_eigenvalue: a.max_eigenvalue() });
    }
    let e = error_term(a, b, tol)?;
    Ok(1.0 - frobenius_norm(&e) / norm_a)
}

/// `k_BA = sum lambda_i / sum |lambda_i|` over the eigenvalues of `B - A`,
/// ignoring eigenvalues within tolerance of zero. Returns 1 when none are left.
pub fn k_ba(a: &PsdMatrix, b: &PsdMatrix, tol: &Tolerance) -> Result<f64> {
    check_same_dim(a.as_matrix(), b.as_matrix())?;
    let threshold = drop_threshold(a.as_matrix(), b.as_matrix(), tol);
    let diff = b.as_matrix() - a.as_matrix();
    let (sum, abs_sum) = eigenvalues_of(&crate::linalg::symmetrize(&diff))
        .into_iter()
        .filter(|l| l.abs() > threshold)
        .fold((0.0, 0.0), |(s, a), l| (s + l, a + l.abs()));
    if abs_sum == 0.0 {
        return Ok(1.0);
    }
    Ok(sum / abs_sum)
}

/// Crisp Loewner order `A <= B`.
pub fn crisp(a: &PsdMatrix, b: &PsdMatrix, tol: &Tolerance) -> Result<bool> {
    loewner_leq(a, b, tol)
}

/// Evaluates `measure` on `(A, B)`; crisp is reported as 0 or 1.
pub fn measure(measure: Measure, a: &PsdMatrix, b: &PsdMatrix, tol: &Tolerance) -> Result<HyponymyScore> {
    let value = match measure {
        Measure::KE => k_e(a, b, tol)?,
        Measure::KBA => k_ba(a, b, tol)?,
        Measure::Crisp => {
            if crisp(a, b, tol)? {
                1.0
            } else {
                0.0
            }
        }
    };
    Ok(HyponymyScore { value, measure })
}
