//! Composition of a noun matrix `n` with a verb matrix `v`.
//!
//! The bilinear rules are all evaluated by [`closed_form`], which is written
//! for arbitrary (not necessarily symmetric) real matrices so that the same
//! expression can be applied to matrix units when assembling Choi matrices.
//! Indices of the noun and the verb are paired row with row and column with
//! column, e.g. `tr(n v)` is extended as `sum_ij n_ij v_ij`. With that
//! pairing every bilinear rule here has a psd outer Choi matrix.

mod choi;
mod kraus;
mod rule;

pub use choi::{
    apply_choi, block_positive_sampled, choi_of_map, choi_of_rule, cp_certificate, is_completely_positive,
    outer_choi, ChoiMatrix, CpCertificate,
};
pub use kraus::{kraus_apply, kraus_for_rule, KrausSet};
pub use rule::{CompositionRule, RuleFamily};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{check_same_dim, diag_of, psd_sqrt, sum_entries, PsdMatrix, Tolerance};

/// A map that is linear in each argument. Implemented by the bilinear
/// [`CompositionRule`]s through [`BilinearRule`], and by test fixtures.
pub trait BilinearMap: Sync {
    fn name(&self) -> &str;
    fn apply(&self, n: &DMatrix<f64>, v: &DMatrix<f64>) -> DMatrix<f64>;
}

/// A [`CompositionRule`] known to be bilinear.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BilinearRule(CompositionRule);

impl BilinearRule {
    pub fn new(rule: CompositionRule) -> Result<Self> {
        if rule.is_bilinear() {
            Ok(BilinearRule(rule))
        } else {
            Err(Error::NotLinearRule(rule.id()))
        }
    }

    pub fn rule(self) -> CompositionRule {
        self.0
    }
}

impl BilinearMap for BilinearRule {
    fn name(&self) -> &str {
        self.0.id()
    }

    fn apply(&self, n: &DMatrix<f64>, v: &DMatrix<f64>) -> DMatrix<f64> {
        closed_form(self.0, n, v).expect("BilinearRule wraps a bilinear rule")
    }
}

/// `sum_ij a_ij b_ij`
fn frobenius_inner(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.component_mul(b).sum()
}

/// Closed-form value of a bilinear rule on arbitrary `m x m` matrices.
/// Returns `None` for the baselines, which are not bilinear.
pub fn closed_form(rule: CompositionRule, n: &DMatrix<f64>, v: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    use CompositionRule::*;
    let m = n.nrows();
    let mf = m as f64;
    let ones = || DMatrix::from_element(m, m, 1.0);
    let identity = || DMatrix::identity(m, m);
    let out = match rule {
        VerbOnly | Fuzz | FuzzSwitched | Phaser | PhaserSwitched => return None,

        TracedNoun => v * (n.trace() / mf),
        TracedVerb => n * (v.trace() / mf),
        Diag | RawDiagDiag => diag_of(n).component_mul(&diag_of(v)),
        SummedNoun => v * (sum_entries(n) / (mf * mf)),
        SummedVerb => n * (sum_entries(v) / (mf * mf)),
        DiagVerb => diag_of(v) * (sum_entries(n) / (mf * mf)),
        DiagNoun => diag_of(n) * (sum_entries(v) / (mf * mf)),
        Mult | RawMult => n.component_mul(v),
        TracedAddition => v * (n.trace() / (2.0 * mf)) + n * (v.trace() / (2.0 * mf)),
        SummedAddition => v * (sum_entries(n) / (mf * mf)) + n * (sum_entries(v) / (mf * mf)),

        RawTrNV => v * n.trace(),
        RawTrNVIdentity => identity() * frobenius_inner(n, v),
        RawTrVN => n * v.trace(),
        RawMNSumV => n * (mf * sum_entries(v)),
        RawMTrNVJ => ones() * (mf * frobenius_inner(n, v)),
        RawMVSumN => v * (mf * sum_entries(n)),
        RawTrNSumVJ => ones() * (n.trace() * sum_entries(v)),
        RawISumNSumV => identity() * (sum_entries(n) * sum_entries(v)),
        RawTrVSumNJ => ones() * (v.trace() * sum_entries(n)),
        RawDiagProdTraceJ => ones() * n.component_mul(v).trace(),
        RawSumNDiagV => diag_of(v) * sum_entries(n),
        RawSumVDiagN => diag_of(n) * sum_entries(v),
        RawFourSpider => ones() * (mf * sum_entries(n) * sum_entries(v)),
    };
    Some(out)
}

/// `sum_i p_i P_i n P_i` over the eigenspaces of `v`.
pub fn fuzz(n: &DMatrix<f64>, v: &PsdMatrix, tol: &Tolerance) -> DMatrix<f64> {
    let m = n.nrows();
    v.spectral(tol).groups().iter().fold(DMatrix::zeros(m, m), |acc, g| {
        let p = g.value.max(0.0);
        acc + (&g.projector * n * &g.projector) * p
    })
}

/// `sqrt(v) n sqrt(v)`
pub fn phaser(n: &DMatrix<f64>, v: &PsdMatrix, tol: &Tolerance) -> DMatrix<f64> {
    let root = psd_sqrt(v, tol);
    &root * n * &root
}

/// `Compr(n, v)` for the given rule. The noun is the argument of the lifted
/// verb map; for switched baselines the roles are exchanged.
pub fn compose(rule: CompositionRule, n: &PsdMatrix, v: &PsdMatrix, tol: &Tolerance) -> Result<PsdMatrix> {
    use CompositionRule::*;
    check_same_dim(n.as_matrix(), v.as_matrix())?;
    let out = match rule {
        VerbOnly => v.as_matrix().clone(),
        Fuzz => fuzz(n.as_matrix(), v, tol),
        FuzzSwitched => fuzz(v.as_matrix(), n, tol),
        Phaser => phaser(n.as_matrix(), v, tol),
        PhaserSwitched => phaser(v.as_matrix(), n, tol),
        bilinear => closed_form(bilinear, n.as_matrix(), v.as_matrix()).expect("bilinear rule"),
    };
    Ok(PsdMatrix::from_psd_unchecked(out))
}

/// [`compose`] on unchecked inputs: both are validated as psd first.
pub fn compose_matrices(
    rule: CompositionRule,
    n: &DMatrix<f64>,
    v: &DMatrix<f64>,
    tol: &Tolerance,
) -> Result<PsdMatrix> {
    let n = PsdMatrix::new(n.clone(), tol)?;
    let v = PsdMatrix::new(v.clone(), tol)?;
    compose(rule, &n, &v, tol)
}

/// Test fixtures that deliberately break complete positivity.
#[doc(hidden)]
pub mod fixtures {
    use super::*;

    /// `n ⊙ v` with the sign of the `(0, 0)` output entry flipped. Still
    /// bilinear, but neither positivity preserving nor completely positive.
    #[derive(Debug, Clone, Copy, Default)]
    pub struct CorruptedMult;

    impl BilinearMap for CorruptedMult {
        fn name(&self) -> &str {
            "corrupted-mult"
        }

        fn apply(&self, n: &DMatrix<f64>, v: &DMatrix<f64>) -> DMatrix<f64> {
            let mut out = n.component_mul(v);
            out[(0, 0)] = -out[(0, 0)];
            out
        }
    }
}
