//! Randomized checks of the composition rules: positivity, bilinearity,
//! order preservation and complete positivity for the bilinear models, and
//! a search for inputs on which Fuzz and Phaser break order preservation or
//! additivity in the verb.

use std::fmt;

use log::info;
use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::compose::{
    apply_choi, compose, cp_certificate, kraus_apply, kraus_for_rule, BilinearMap, BilinearRule, CompositionRule,
};
use crate::error::{Error, Result};
use crate::linalg::{frobenius_norm, is_psd, loewner_leq_raw, max_abs, min_eigenvalue, symmetrize, PsdMatrix, Tolerance};
use crate::random::{random_psd, random_psd_any_rank, rng_for, StreamRng};

/// Relative Frobenius error allowed in the bilinearity identities.
pub const BILINEARITY_TOL: f64 = 1e-9;
/// Error allowed in the Kraus round trip, relative to `max(1, |Compr(n, v)|)`.
pub const ROUND_TRIP_TOL: f64 = 1e-8;
/// Margin (relative to the operands) a violation must exceed to count as a
/// counterexample, well clear of rounding.
pub const WITNESS_MARGIN: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyConfig {
    pub dims: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    /// Trial budget of the Fuzz/Phaser counterexample search.
    pub search_trials: usize,
    /// Adds a deliberately broken rule to the suite.
    pub inject_corrupt: bool,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            dims: vec![3],
            trials: 500,
            seed: 0,
            search_trials: 10_000,
            inject_corrupt: false,
        }
    }
}

/// Inputs on which a property failed, or a counterexample that was found.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub rule: String,
    pub property: String,
    pub m: usize,
    pub trial: usize,
    /// Named input matrices, row major.
    pub inputs: Vec<(String, Vec<Vec<f64>>)>,
    /// Smallest eigenvalue or relative error that decided the outcome.
    pub value: f64,
}

impl Witness {
    fn new(rule: &str, property: &str, m: usize, trial: usize, inputs: &[(&str, &DMatrix<f64>)], value: f64) -> Self {
        Witness {
            rule: rule.to_string(),
            property: property.to_string(),
            m,
            trial,
            inputs: inputs.iter().map(|(name, a)| (name.to_string(), rows(a))).collect(),
            value,
        }
    }

    pub fn input(&self, name: &str) -> Option<DMatrix<f64>> {
        self.inputs.iter().find(|(n, _)| n == name).map(|(_, r)| {
            let m = r.len();
            DMatrix::from_fn(m, m, |i, j| r[i][j])
        })
    }
}

fn rows(a: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..a.nrows()).map(|i| a.row(i).iter().copied().collect()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub property: String,
    pub rule: String,
    pub m: usize,
    pub passed: bool,
    pub detail: String,
    pub witness: Option<Witness>,
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {:<24} {:<22} m={} {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.property,
            self.rule,
            self.m,
            self.detail
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub outcomes: Vec<CheckOutcome>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckOutcome> {
        self.outcomes.iter().filter(|o| !o.passed)
    }

    /// Counterexamples found for the non-bilinear baselines.
    pub fn counterexamples(&self) -> Vec<&Witness> {
        self.outcomes
            .iter()
            .filter(|o| o.property.starts_with("counterexample"))
            .filter_map(|o| o.witness.as_ref())
            .collect()
    }
}

fn outcome(property: &str, rule: &str, m: usize, result: std::result::Result<String, (String, Witness)>) -> CheckOutcome {
    match result {
        Ok(detail) => CheckOutcome {
            property: property.into(),
            rule: rule.into(),
            m,
            passed: true,
            detail,
            witness: None,
        },
        Err((detail, witness)) => CheckOutcome {
            property: property.into(),
            rule: rule.into(),
            m,
            passed: false,
            detail,
            witness: Some(witness),
        },
    }
}

type Check = std::result::Result<String, (String, Witness)>;

fn relative_error(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let scale = frobenius_norm(a).max(frobenius_norm(b));
    if scale == 0.0 {
        0.0
    } else {
        frobenius_norm(&(a - b)) / scale
    }
}

fn psd_margin(a: &DMatrix<f64>) -> f64 {
    let s = max_abs(a);
    if s == 0.0 {
        0.0
    } else {
        min_eigenvalue(&symmetrize(a)) / s
    }
}

pub fn check_positivity(map: &dyn BilinearMap, m: usize, trials: usize, seed: u64, tol: &Tolerance) -> Result<Check> {
    let mut rng = rng_for(seed, 10);
    let mut worst = f64::INFINITY;
    for trial in 0..trials {
        let n = random_psd_any_rank(&mut rng, m);
        let v = random_psd_any_rank(&mut rng, m);
        let out = map.apply(n.as_matrix(), v.as_matrix());
        let sym_err = max_abs(&(&out - out.transpose()));
        let margin = psd_margin(&out);
        worst = worst.min(margin);
        if sym_err > 1e-12 * max_abs(&out).max(1.0) || !is_psd(&symmetrize(&out), tol)? {
            let w = Witness::new(map.name(), "positivity", m, trial, &[("n", n.as_matrix()), ("v", v.as_matrix())], margin);
            return Ok(Err((format!("output not psd at trial {trial} (min eig / max entry {margin:.3e})"), w)));
        }
    }
    Ok(Ok(format!("{trials} trials, worst min eig / max entry {worst:.2e}")))
}

/// Largest error over the four bilinearity identities. Each error is taken
/// relative to `|f(|a|, |b|)|`, the magnitude of the same computation on
/// entrywise absolute values, so that cancellation inside sums such as
/// `sum_ij v_ij` is not mistaken for nonlinearity.
pub fn bilinearity_error(
    map: &dyn BilinearMap,
    n: &DMatrix<f64>,
    n2: &DMatrix<f64>,
    v: &DMatrix<f64>,
    v2: &DMatrix<f64>,
    alpha: f64,
) -> f64 {
    let f = |a: &DMatrix<f64>, b: &DMatrix<f64>| map.apply(a, b);
    let err = |lhs: DMatrix<f64>, rhs: DMatrix<f64>, a: DMatrix<f64>, b: DMatrix<f64>| {
        let scale = frobenius_norm(&lhs)
            .max(frobenius_norm(&rhs))
            .max(frobenius_norm(&f(&a.abs(), &b.abs())));
        if scale == 0.0 {
            0.0
        } else {
            frobenius_norm(&(lhs - rhs)) / scale
        }
    };
    let base = f(n, v);
    [
        err(f(&(n * alpha), v), &base * alpha, n * alpha, v.clone()),
        err(f(&(n + n2), v), &base + f(n2, v), n.abs() + n2.abs(), v.clone()),
        err(f(n, &(v * alpha)), &base * alpha, n.clone(), v * alpha),
        err(f(n, &(v + v2)), &base + f(n, v2), n.clone(), v.abs() + v2.abs()),
    ]
    .into_iter()
    .fold(0.0, f64::max)
}

pub fn check_bilinearity(map: &dyn BilinearMap, m: usize, trials: usize, seed: u64) -> Check {
    let mut rng = rng_for(seed, 11);
    let mut worst: f64 = 0.0;
    for trial in 0..trials {
        let n = random_psd_any_rank(&mut rng, m).into_matrix();
        let n2 = random_psd_any_rank(&mut rng, m).into_matrix();
        let v = random_psd_any_rank(&mut rng, m).into_matrix();
        let v2 = random_psd_any_rank(&mut rng, m).into_matrix();
        let alpha: f64 = rng.random_range(0.1..10.0);
        let err = bilinearity_error(map, &n, &n2, &v, &v2, alpha);
        worst = worst.max(err);
        if err > BILINEARITY_TOL {
            let w = Witness::new(
                map.name(),
                "bilinearity",
                m,
                trial,
                &[("n", &n), ("n2", &n2), ("v", &v), ("v2", &v2)],
                err,
            );
            return Err((format!("relative error {err:.3e} at trial {trial}"), w));
        }
    }
    Ok(format!("{trials} trials, worst relative error {worst:.2e}"))
}

/// Random `(n1, v1, n2, v2)` with `n1 <= n2` and `v1 <= v2`.
fn ordered_quadruple(rng: &mut StreamRng, m: usize) -> [DMatrix<f64>; 4] {
    let n1 = random_psd_any_rank(rng, m).into_matrix();
    let v1 = random_psd_any_rank(rng, m).into_matrix();
    let p = random_psd(rng, m, 1).into_matrix();
    let q = random_psd(rng, m, 1).into_matrix();
    let n2 = &n1 + p;
    let v2 = &v1 + q;
    [n1, v1, n2, v2]
}

pub fn check_order_preservation(
    map: &dyn BilinearMap,
    m: usize,
    trials: usize,
    seed: u64,
    tol: &Tolerance,
) -> Result<Check> {
    let mut rng = rng_for(seed, 12);
    for trial in 0..trials {
        let [n1, v1, n2, v2] = ordered_quadruple(&mut rng, m);
        let a = map.apply(&n1, &v1);
        let b = map.apply(&n2, &v2);
        if !loewner_leq_raw(&symmetrize(&a), &symmetrize(&b), tol)? {
            let value = psd_margin(&(&b - &a));
            let w = Witness::new(
                map.name(),
                "order preservation",
                m,
                trial,
                &[("n1", &n1), ("v1", &v1), ("n2", &n2), ("v2", &v2)],
                value,
            );
            return Ok(Err((format!("order broken at trial {trial}"), w)));
        }
    }
    Ok(Ok(format!("{trials} ordered quadruples")))
}

pub fn check_complete_positivity(map: &dyn BilinearMap, m: usize, trials: usize, seed: u64, tol: &Tolerance) -> Result<Check> {
    let cert = cp_certificate(map, m, trials, seed, tol)?;
    let detail = format!(
        "min outer Choi eig {:.2e}, worst relative Choi eig {:.2e}",
        cert.min_outer_eigenvalue, cert.min_relative_choi_eigenvalue
    );
    if cert.completely_positive {
        Ok(Ok(detail))
    } else {
        let w = Witness::new(map.name(), "complete positivity", m, 0, &[], cert.min_outer_eigenvalue);
        Ok(Err((detail, w)))
    }
}

pub fn check_kraus_round_trip(rule: CompositionRule, m: usize, trials: usize, seed: u64, tol: &Tolerance) -> Result<Check> {
    let kraus = kraus_for_rule(rule, m)?;
    let mut rng = rng_for(seed, 13);
    let mut worst: f64 = 0.0;
    for trial in 0..trials {
        let n = random_psd_any_rank(&mut rng, m);
        let v = random_psd_any_rank(&mut rng, m);
        let via = apply_choi(&kraus_apply(&kraus, &v)?, n.as_matrix())?;
        let direct = compose(rule, &n, &v, tol)?;
        let err = frobenius_norm(&(&via - direct.as_matrix())) / frobenius_norm(direct.as_matrix()).max(1.0);
        worst = worst.max(err);
        if err > ROUND_TRIP_TOL {
            let w = Witness::new(rule.id(), "kraus round trip", m, trial, &[("n", n.as_matrix()), ("v", v.as_matrix())], err);
            return Ok(Err((format!("error {err:.3e} at trial {trial}"), w)));
        }
    }
    Ok(Ok(format!("{trials} trials, worst error {worst:.2e}")))
}

fn psd(a: DMatrix<f64>) -> PsdMatrix {
    PsdMatrix::from_psd_unchecked(a)
}

/// Whether `w` (an order-preservation counterexample) still violates the
/// order by more than [`WITNESS_MARGIN`].
pub fn replay_order_witness(rule: CompositionRule, w: &Witness, tol: &Tolerance) -> Result<bool> {
    let get = |name: &str| {
        w.input(name)
            .ok_or_else(|| Error::InvalidArgument(format!("witness lacks `{name}`")))
    };
    let (n1, v1, n2, v2) = (get("n1")?, get("v1")?, get("n2")?, get("v2")?);
    let a = compose(rule, &psd(n1), &psd(v1), tol)?;
    let b = compose(rule, &psd(n2), &psd(v2), tol)?;
    Ok(order_violation(a.as_matrix(), b.as_matrix()) < -WITNESS_MARGIN)
}

/// Whether `w` (an additivity counterexample) still has relative error
/// above [`WITNESS_MARGIN`].
pub fn replay_additivity_witness(rule: CompositionRule, w: &Witness, tol: &Tolerance) -> Result<bool> {
    let get = |name: &str| {
        w.input(name)
            .ok_or_else(|| Error::InvalidArgument(format!("witness lacks `{name}`")))
    };
    Ok(additivity_error(rule, &get("n")?, &get("v1")?, &get("v2")?, tol)? > WITNESS_MARGIN)
}

/// Smallest eigenvalue of `b - a`, relative to the larger operand.
fn order_violation(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let scale = max_abs(a).max(max_abs(b));
    if scale == 0.0 {
        return 0.0;
    }
    min_eigenvalue(&symmetrize(&(b - a))) / scale
}

fn additivity_error(rule: CompositionRule, n: &DMatrix<f64>, v1: &DMatrix<f64>, v2: &DMatrix<f64>, tol: &Tolerance) -> Result<f64> {
    let n = psd(n.clone());
    let sum = compose(rule, &n, &psd(v1 + v2), tol)?;
    let parts = compose(rule, &n, &psd(v1.clone()), tol)?.into_matrix() + compose(rule, &n, &psd(v2.clone()), tol)?.into_matrix();
    Ok(relative_error(sum.as_matrix(), &parts))
}

/// Searches for ordered inputs whose composition is not ordered.
/// Dimensions alternate between 2 and 3.
pub fn search_order_counterexample(rule: CompositionRule, max_trials: usize, seed: u64, tol: &Tolerance) -> Result<Option<Witness>> {
    let mut rng = rng_for(seed, 20 + rule as u64);
    for trial in 0..max_trials {
        let m = 2 + trial % 2;
        let [n1, v1, n2, v2] = ordered_quadruple(&mut rng, m);
        let a = compose(rule, &psd(n1.clone()), &psd(v1.clone()), tol)?;
        let b = compose(rule, &psd(n2.clone()), &psd(v2.clone()), tol)?;
        let value = order_violation(a.as_matrix(), b.as_matrix());
        if value < -WITNESS_MARGIN {
            return Ok(Some(Witness::new(
                rule.id(),
                "counterexample: order",
                m,
                trial,
                &[("n1", &n1), ("v1", &v1), ("n2", &n2), ("v2", &v2)],
                value,
            )));
        }
    }
    Ok(None)
}

/// Searches for `n, v1, v2` with `Compr(n, v1 + v2) != Compr(n, v1) + Compr(n, v2)`.
pub fn search_additivity_counterexample(
    rule: CompositionRule,
    max_trials: usize,
    seed: u64,
    tol: &Tolerance,
) -> Result<Option<Witness>> {
    let mut rng = rng_for(seed, 60 + rule as u64);
    for trial in 0..max_trials {
        let m = 2 + trial % 2;
        let n = random_psd_any_rank(&mut rng, m).into_matrix();
        let v1 = random_psd_any_rank(&mut rng, m).into_matrix();
        let v2 = random_psd_any_rank(&mut rng, m).into_matrix();
        let err = additivity_error(rule, &n, &v1, &v2, tol)?;
        if err > WITNESS_MARGIN {
            return Ok(Some(Witness::new(
                rule.id(),
                "counterexample: additivity",
                m,
                trial,
                &[("n", &n), ("v1", &v1), ("v2", &v2)],
                err,
            )));
        }
    }
    Ok(None)
}

/// Positivity, bilinearity, order preservation, complete positivity and the
/// Kraus round trip for every model, plus positivity of Fuzz and Phaser and
/// the counterexample searches.
pub fn run_suite(config: &VerifyConfig, tol: &Tolerance) -> Result<VerifyReport> {
    if config.trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    if config.search_trials == 0 {
        return Err(Error::InvalidArgument("search trials must be at least 1".into()));
    }
    if config.dims.is_empty() || config.dims.contains(&0) {
        return Err(Error::InvalidArgument("dimensions must be positive".into()));
    }
    let seed = config.seed;
    let trials = config.trials;
    let mut maps: Vec<(Box<dyn BilinearMap>, Option<CompositionRule>)> = CompositionRule::compr_models()
        .iter()
        .map(|&r| (Box::new(BilinearRule::new(r).expect("models are bilinear")) as Box<dyn BilinearMap>, Some(r)))
        .collect();
    if config.inject_corrupt {
        maps.push((Box::new(crate::compose::fixtures::CorruptedMult), None));
    }

    let mut outcomes = Vec::new();
    for &m in &config.dims {
        for (map, rule) in &maps {
            let name = map.name().to_string();
            outcomes.push(outcome("positivity", &name, m, check_positivity(map.as_ref(), m, trials, seed, tol)?));
            outcomes.push(outcome("bilinearity", &name, m, check_bilinearity(map.as_ref(), m, trials, seed)));
            outcomes.push(outcome(
                "order preservation",
                &name,
                m,
                check_order_preservation(map.as_ref(), m, trials, seed, tol)?,
            ));
            outcomes.push(outcome(
                "complete positivity",
                &name,
                m,
                check_complete_positivity(map.as_ref(), m, trials.min(50), seed, tol)?,
            ));
            if let Some(rule) = rule {
                outcomes.push(outcome(
                    "kraus round trip",
                    &name,
                    m,
                    check_kraus_round_trip(*rule, m, trials.min(100), seed, tol)?,
                ));
            }
        }
        for rule in [
            CompositionRule::Fuzz,
            CompositionRule::FuzzSwitched,
            CompositionRule::Phaser,
            CompositionRule::PhaserSwitched,
        ] {
            let mut rng = rng_for(seed, 14);
            let mut result: Check = Ok(format!("{trials} trials"));
            for trial in 0..trials {
                let n = random_psd_any_rank(&mut rng, m);
                let v = random_psd_any_rank(&mut rng, m);
                let out = compose(rule, &n, &v, tol)?;
                if !is_psd(out.as_matrix(), tol)? {
                    let margin = psd_margin(out.as_matrix());
                    let w = Witness::new(rule.id(), "positivity", m, trial, &[("n", n.as_matrix()), ("v", v.as_matrix())], margin);
                    result = Err((format!("output not psd at trial {trial}"), w));
                    break;
                }
            }
            outcomes.push(outcome("positivity", rule.id(), m, result));
        }
        info!("m={m}: property checks done");
    }

    for rule in [CompositionRule::Fuzz, CompositionRule::Phaser] {
        for (property, found) in [
            ("counterexample: order", search_order_counterexample(rule, config.search_trials, seed, tol)?),
            (
                "counterexample: additivity",
                search_additivity_counterexample(rule, config.search_trials, seed, tol)?,
            ),
        ] {
            let m = found.as_ref().map_or(0, |w| w.m);
            outcomes.push(match found {
                Some(w) => CheckOutcome {
                    property: property.into(),
                    rule: rule.id().into(),
                    m,
                    passed: true,
                    detail: format!("found at trial {} (m={}, value {:.3e})", w.trial, w.m, w.value),
                    witness: Some(w),
                },
                None => CheckOutcome {
                    property: property.into(),
                    rule: rule.id().into(),
                    m,
                    passed: false,
                    detail: format!("none found in {} trials", config.search_trials),
                    witness: None,
                },
            });
        }
    }
    Ok(VerifyReport { outcomes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compose::fixtures::CorruptedMult;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn models_pass_small_suite() {
        let config = VerifyConfig {
            dims: vec![2, 3],
            trials: 40,
            search_trials: 2000,
            ..VerifyConfig::default()
        };
        let report = run_suite(&config, &tol()).unwrap();
        let failures: Vec<String> = report.failures().map(|o| o.to_string()).collect();
        assert!(report.passed(), "{failures:#?}");
        assert_eq!(report.counterexamples().len(), 4);
    }

    #[test]
    fn corrupted_rule_fails_with_witness() {
        let config = VerifyConfig {
            dims: vec![2],
            trials: 40,
            search_trials: 2000,
            inject_corrupt: true,
            ..VerifyConfig::default()
        };
        let report = run_suite(&config, &tol()).unwrap();
        assert!(!report.passed());
        let failed: Vec<&CheckOutcome> = report.failures().collect();
        assert!(failed.iter().all(|o| o.rule == CorruptedMult.name()));
        assert!(failed.iter().any(|o| o.property == "complete positivity"));
        assert!(failed.iter().any(|o| o.property == "positivity" && o.witness.is_some()));
    }

    #[test]
    fn witnesses_replay() {
        let t = tol();
        for rule in [CompositionRule::Fuzz, CompositionRule::Phaser] {
            let w = search_order_counterexample(rule, 10_000, 0, &t).unwrap().unwrap();
            assert!(replay_order_witness(rule, &w, &t).unwrap());
            let json = serde_json::to_string(&w).unwrap();
            let back: Witness = serde_json::from_str(&json).unwrap();
            assert_eq!(back, w);
            let w = search_additivity_counterexample(rule, 10_000, 0, &t).unwrap().unwrap();
            assert!(replay_additivity_witness(rule, &w, &t).unwrap());
        }
    }

    #[test]
    fn bilinear_models_have_no_order_counterexample() {
        let t = tol();
        let w = search_order_counterexample(CompositionRule::Mult, 500, 0, &t).unwrap();
        assert!(w.is_none());
    }

    #[test]
    fn zero_trials_rejected() {
        let config = VerifyConfig {
            trials: 0,
            ..VerifyConfig::default()
        };
        assert!(matches!(run_suite(&config, &tol()), Err(Error::InvalidArgument(_))));
    }
}
