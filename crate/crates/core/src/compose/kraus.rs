//! Kraus operators for the structural rules.
//!
//! A bilinear rule `Compr(n, v)` is represented by the map
//! `v -> sum_l K_l v K_l^T`, whose value is the Choi matrix of
//! `Compr(., v)`. Each `K_l` is `m^2 x m`, rows indexed by `(out, in)` pairs
//! `a * m + b`, columns by the verb index `x`.

use nalgebra::DMatrix;

use super::choi::ChoiMatrix;
use super::rule::CompositionRule;
use crate::error::{Error, Result};
use crate::linalg::PsdMatrix;

/// Operators `K_l` of shape `m^2 x m` realizing `v -> sum_l K_l v K_l^T`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausSet {
    m: usize,
    operators: Vec<DMatrix<f64>>,
}

impl KrausSet {
    pub fn new(m: usize, operators: Vec<DMatrix<f64>>) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidArgument("Kraus dimension must be positive".into()));
        }
        if operators.is_empty() {
            return Err(Error::InvalidArgument("a Kraus set needs at least one operator".into()));
        }
        for k in &operators {
            if k.shape() != (m * m, m) {
                return Err(Error::DimensionMismatch {
                    expected: m * m,
                    found: k.nrows(),
                });
            }
        }
        Ok(KrausSet { m, operators })
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn operators(&self) -> &[DMatrix<f64>] {
        &self.operators
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    fn extend_scaled(&mut self, other: KrausSet, factor: f64) {
        self.operators
            .extend(other.operators.into_iter().map(|k| k * factor));
    }
}

/// `sum_l K_l v K_l^T`, interpreted as the Choi matrix of `Compr(., v)`.
pub fn kraus_apply(kraus: &KrausSet, v: &PsdMatrix) -> Result<ChoiMatrix> {
    kraus_apply_raw(kraus, v.as_matrix())
}

pub(crate) fn kraus_apply_raw(kraus: &KrausSet, v: &DMatrix<f64>) -> Result<ChoiMatrix> {
    let m = kraus.m;
    if v.shape() != (m, m) {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: v.nrows(),
        });
    }
    let size = m * m;
    let entries = kraus
        .operators
        .iter()
        .fold(DMatrix::zeros(size, size), |acc, k| acc + k * v * k.transpose());
    ChoiMatrix::new(m, m, entries)
}

/// Builds `count` operators whose entry at `((a, b), x)` is `f(l, a, b, x)`.
fn indexed(m: usize, count: usize, f: impl Fn(usize, usize, usize, usize) -> f64) -> KrausSet {
    let operators = (0..count)
        .map(|l| DMatrix::from_fn(m * m, m, |row, x| f(l, row / m, row % m, x)))
        .collect();
    KrausSet { m, operators }
}

fn delta(i: usize, j: usize) -> f64 {
    if i == j {
        1.0
    } else {
        0.0
    }
}

/// Kraus operators of an unnormalized structural closed form.
fn structural(rule: CompositionRule, m: usize) -> Option<KrausSet> {
    use CompositionRule::*;
    let root_m = (m as f64).sqrt();
    let set = match rule {
        // I ⊗ e_l: v ⊗ I, i.e. tr(n) v
        RawTrNV => indexed(m, m, |l, a, b, x| delta(a, x) * delta(b, l)),
        // e_l ⊗ I: I ⊗ v, i.e. sum_ij n_ij v_ij I
        RawTrNVIdentity => indexed(m, m, |l, a, b, x| delta(a, l) * delta(b, x)),
        // |Ω><e_l|: tr(v) |Ω><Ω|, i.e. tr(v) n
        RawTrVN => indexed(m, m, |l, a, b, x| delta(a, b) * delta(x, l)),
        RawDiagDiag => indexed(m, m, |l, a, b, x| delta(a, l) * delta(b, l) * delta(x, l)),
        RawMNSumV => indexed(m, 1, |_, a, b, _| root_m * delta(a, b)),
        RawMTrNVJ => indexed(m, 1, |_, _, b, x| root_m * delta(b, x)),
        RawMVSumN => indexed(m, 1, |_, a, _, x| root_m * delta(a, x)),
        RawTrNSumVJ => indexed(m, m, |l, _, b, _| delta(b, l)),
        RawISumNSumV => indexed(m, m, |l, a, _, _| delta(a, l)),
        RawTrVSumNJ => indexed(m, m, |l, _, _, x| delta(x, l)),
        RawDiagProdTraceJ => indexed(m, m, |l, _, b, x| delta(b, l) * delta(x, l)),
        RawSumNDiagV => indexed(m, m, |l, a, _, x| delta(a, l) * delta(x, l)),
        RawSumVDiagN => indexed(m, m, |l, a, b, _| delta(a, l) * delta(b, l)),
        // copy map sum_i |ii><i|
        RawMult => indexed(m, 1, |_, a, b, x| delta(a, b) * delta(a, x)),
        RawFourSpider => indexed(m, 1, |_, _, _, _| root_m),
        _ => return None,
    };
    Some(set)
}

/// Each model as a nonnegative combination of structural closed forms.
fn structural_terms(rule: CompositionRule, m: usize) -> Option<Vec<(f64, CompositionRule)>> {
    use CompositionRule::*;
    let mf = m as f64;
    let m2 = mf * mf;
    let m3 = m2 * mf;
    let terms = match rule {
        VerbOnly | Fuzz | FuzzSwitched | Phaser | PhaserSwitched => return None,
        TracedNoun => vec![(1.0 / mf, RawTrNV)],
        TracedVerb => vec![(1.0 / mf, RawTrVN)],
        Diag => vec![(1.0, RawDiagDiag)],
        SummedNoun => vec![(1.0 / m3, RawMVSumN)],
        SummedVerb => vec![(1.0 / m3, RawMNSumV)],
        DiagVerb => vec![(1.0 / m2, RawSumNDiagV)],
        DiagNoun => vec![(1.0 / m2, RawSumVDiagN)],
        Mult => vec![(1.0, RawMult)],
        TracedAddition => vec![(0.5 / mf, RawTrNV), (0.5 / mf, RawTrVN)],
        SummedAddition => vec![(1.0 / m3, RawMVSumN), (1.0 / m3, RawMNSumV)],
        raw => vec![(1.0, raw)],
    };
    Some(terms)
}

/// Kraus operators for a bilinear rule, assembled from cup, cap, swap and
/// spider structure. Scaled models get their Kraus operators scaled by the
/// square root of the model's coefficient.
pub fn kraus_for_rule(rule: CompositionRule, m: usize) -> Result<KrausSet> {
    if m == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    let terms = structural_terms(rule, m).ok_or(Error::NotStructural(rule.id()))?;
    let mut set = KrausSet {
        m,
        operators: Vec::new(),
    };
    for (coefficient, raw) in terms {
        let part = structural(raw, m).expect("terms only reference structural rules");
        set.extend_scaled(part, coefficient.sqrt());
    }
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compose::choi::apply_choi;
    use crate::compose::{compose, CompositionRule::*};
    use crate::linalg::{frobenius_norm, Tolerance};
    use crate::random::{random_psd_any_rank, rng_for};

    #[test]
    fn mult_is_a_single_copy_operator() {
        let k = kraus_for_rule(Mult, 2).unwrap();
        assert_eq!(k.len(), 1);
        let op = &k.operators()[0];
        assert_eq!(op.shape(), (4, 2));
        let mut expected = DMatrix::zeros(4, 2);
        expected[(0, 0)] = 1.0;
        expected[(3, 1)] = 1.0;
        assert_eq!(op, &expected);
    }

    #[test]
    fn traced_noun_operators() {
        let k = kraus_for_rule(TracedNoun, 2).unwrap();
        assert_eq!(k.len(), 2);
        let s = 0.5f64.sqrt();
        for (l, op) in k.operators().iter().enumerate() {
            let e_l = DMatrix::from_fn(2, 1, |i, _| if i == l { 1.0 } else { 0.0 });
            let expected = DMatrix::<f64>::identity(2, 2).kronecker(&e_l) * s;
            assert!(frobenius_norm(&(op - expected)) < 1e-15);
        }
    }

    #[test]
    fn traced_noun_kraus_image_is_v_tensor_identity() {
        let t = Tolerance::default();
        let v = PsdMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 3.0]], &t).unwrap();
        let k = indexed(2, 2, |l, a, b, x| delta(a, x) * delta(b, l));
        let choi = kraus_apply(&k, &v).unwrap();
        let expected = v.as_matrix().kronecker(&DMatrix::<f64>::identity(2, 2));
        assert_eq!(choi.entries(), &expected);
    }

    #[test]
    fn zero_verb_maps_to_zero() {
        let k = kraus_for_rule(SummedAddition, 3).unwrap();
        let choi = kraus_apply(&k, &PsdMatrix::zeros(3)).unwrap();
        assert_eq!(choi.entries(), &DMatrix::zeros(9, 9));
    }

    #[test]
    fn baselines_have_no_structural_form() {
        for rule in [VerbOnly, Fuzz, FuzzSwitched, Phaser, PhaserSwitched] {
            assert!(matches!(kraus_for_rule(rule, 2), Err(Error::NotStructural(_))));
        }
    }

    #[test]
    fn round_trip_reproduces_closed_forms() {
        let t = Tolerance::default();
        let mut rng = rng_for(11, 0);
        for m in 2..5 {
            for rule in CompositionRule::bilinear() {
                let k = kraus_for_rule(rule, m).unwrap();
                for _ in 0..3 {
                    let n = random_psd_any_rank(&mut rng, m);
                    let v = random_psd_any_rank(&mut rng, m);
                    let via_kraus = apply_choi(&kraus_apply(&k, &v).unwrap(), n.as_matrix()).unwrap();
                    let direct = compose(rule, &n, &v, &t).unwrap();
                    let err = frobenius_norm(&(via_kraus - direct.as_matrix()));
                    assert!(err < 1e-8 * frobenius_norm(direct.as_matrix()).max(1.0), "{rule} m={m}: {err}");
                }
            }
        }
    }

    #[test]
    fn shape_validation() {
        assert!(KrausSet::new(2, vec![DMatrix::zeros(3, 2)]).is_err());
        assert!(KrausSet::new(2, vec![]).is_err());
        let k = kraus_for_rule(Mult, 2).unwrap();
        assert!(matches!(
            kraus_apply(&k, &PsdMatrix::identity(3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
