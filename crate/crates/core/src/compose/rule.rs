use std::fmt;
use std::str::FromStr;

use crate::error::Error;

/// Which family a rule belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RuleFamily {
    /// Verb only, Fuzz and Phaser in both directions.
    Baseline,
    /// Normalized bilinear models used for evaluation.
    Model,
    /// Unnormalized closed forms of the structural Kraus diagrams.
    Structural,
}

/// Composition rule identifiers.
///
/// The `Raw*` variants are the unnormalized closed forms obtained from
/// Kraus operators built out of cups, caps and spiders. The named models are
/// rescaled by `1/m` or `1/m^2` so that word matrices with largest
/// eigenvalue 1 compose to matrices of comparable size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CompositionRule {
    VerbOnly,
    Fuzz,
    FuzzSwitched,
    Phaser,
    PhaserSwitched,
    Mult,
    TracedNoun,
    TracedVerb,
    Diag,
    SummedNoun,
    SummedVerb,
    DiagVerb,
    DiagNoun,
    TracedAddition,
    SummedAddition,
    /// `tr(n) v`
    RawTrNV,
    /// `tr(n v) I`
    RawTrNVIdentity,
    /// `tr(v) n`
    RawTrVN,
    /// `diag(n) diag(v)`
    RawDiagDiag,
    /// `m n sum(v)`
    RawMNSumV,
    /// `m tr(n v) J`
    RawMTrNVJ,
    /// `m v sum(n)`
    RawMVSumN,
    /// `tr(n) sum(v) J`
    RawTrNSumVJ,
    /// `sum(n) sum(v) I`
    RawISumNSumV,
    /// `tr(v) sum(n) J`
    RawTrVSumNJ,
    /// `tr(n ⊙ v) J`
    RawDiagProdTraceJ,
    /// `sum(n) diag(v)`
    RawSumNDiagV,
    /// `sum(v) diag(n)`
    RawSumVDiagN,
    /// `n ⊙ v`
    RawMult,
    /// `m sum(n) sum(v) J`
    RawFourSpider,
}

use CompositionRule::*;

const ALL: [CompositionRule; 30] = [
    VerbOnly,
    Fuzz,
    FuzzSwitched,
    Phaser,
    PhaserSwitched,
    TracedNoun,
    TracedVerb,
    Diag,
    SummedNoun,
    SummedVerb,
    DiagVerb,
    DiagNoun,
    Mult,
    TracedAddition,
    SummedAddition,
    RawTrNV,
    RawTrNVIdentity,
    RawTrVN,
    RawDiagDiag,
    RawMNSumV,
    RawMTrNVJ,
    RawMVSumN,
    RawTrNSumVJ,
    RawISumNSumV,
    RawTrVSumNJ,
    RawDiagProdTraceJ,
    RawSumNDiagV,
    RawSumVDiagN,
    RawMult,
    RawFourSpider,
];

impl CompositionRule {
    /// Every rule, baselines first, then models in table order, then the
    /// structural closed forms.
    pub fn all() -> &'static [CompositionRule] {
        &ALL
    }

    pub fn baselines() -> &'static [CompositionRule] {
        &ALL[0..5]
    }

    /// The ten bilinear models evaluated alongside the baselines.
    pub fn compr_models() -> &'static [CompositionRule] {
        &ALL[5..15]
    }

    pub fn structural() -> &'static [CompositionRule] {
        &ALL[15..30]
    }

    /// Baselines and models; the raw closed forms are opt-in.
    pub fn default_evaluation() -> &'static [CompositionRule] {
        &ALL[0..15]
    }

    /// Every rule that is linear in both arguments.
    pub fn bilinear() -> impl Iterator<Item = CompositionRule> {
        ALL.iter().copied().filter(|r| r.is_bilinear())
    }

    pub fn id(self) -> &'static str {
        match self {
            VerbOnly => "verb-only",
            Fuzz => "fuzz",
            FuzzSwitched => "fuzz-switched",
            Phaser => "phaser",
            PhaserSwitched => "phaser-switched",
            Mult => "mult",
            TracedNoun => "traced-noun",
            TracedVerb => "traced-verb",
            Diag => "diag",
            SummedNoun => "summed-noun",
            SummedVerb => "summed-verb",
            DiagVerb => "diag-verb",
            DiagNoun => "diag-noun",
            TracedAddition => "traced-addition",
            SummedAddition => "summed-addition",
            RawTrNV => "raw-tr-n-v",
            RawTrNVIdentity => "raw-tr-nv-identity",
            RawTrVN => "raw-tr-v-n",
            RawDiagDiag => "raw-diag-diag",
            RawMNSumV => "raw-m-n-sum-v",
            RawMTrNVJ => "raw-m-tr-nv-j",
            RawMVSumN => "raw-m-v-sum-n",
            RawTrNSumVJ => "raw-tr-n-sum-v-j",
            RawISumNSumV => "raw-i-sum-n-sum-v",
            RawTrVSumNJ => "raw-tr-v-sum-n-j",
            RawDiagProdTraceJ => "raw-diag-prod-trace-j",
            RawSumNDiagV => "raw-sum-n-diag-v",
            RawSumVDiagN => "raw-sum-v-diag-n",
            RawMult => "raw-mult",
            RawFourSpider => "raw-four-spider",
        }
    }

    /// Row label used in report tables.
    pub fn display_name(self) -> &'static str {
        match self {
            VerbOnly => "Verb only",
            Fuzz => "Fuzz",
            FuzzSwitched => "Fuzz switched",
            Phaser => "Phaser",
            PhaserSwitched => "Phaser switched",
            Mult => "Mult",
            TracedNoun => "Traced noun",
            TracedVerb => "Traced verb",
            Diag => "Diag",
            SummedNoun => "Summed noun",
            SummedVerb => "Summed verb",
            DiagVerb => "Diag verb",
            DiagNoun => "Diag noun",
            TracedAddition => "Traced addition",
            SummedAddition => "Summed addition",
            other => other.id(),
        }
    }

    pub fn family(self) -> RuleFamily {
        match self {
            VerbOnly | Fuzz | FuzzSwitched | Phaser | PhaserSwitched => RuleFamily::Baseline,
            Mult | TracedNoun | TracedVerb | Diag | SummedNoun | SummedVerb | DiagVerb | DiagNoun
            | TracedAddition | SummedAddition => RuleFamily::Model,
            _ => RuleFamily::Structural,
        }
    }

    /// Linear in the noun and in the verb.
    pub fn is_bilinear(self) -> bool {
        self.family() != RuleFamily::Baseline
    }

    pub fn is_fuzz(self) -> bool {
        matches!(self, Fuzz | FuzzSwitched)
    }

    pub fn is_phaser(self) -> bool {
        matches!(self, Phaser | PhaserSwitched)
    }

    /// Output is a scalar multiple of `I` or of the all-ones matrix `J`, so
    /// every phrase collapses onto one direction.
    pub fn is_degenerate(self) -> bool {
        matches!(
            self,
            RawTrNVIdentity
                | RawMTrNVJ
                | RawTrNSumVJ
                | RawISumNSumV
                | RawTrVSumNJ
                | RawDiagProdTraceJ
                | RawFourSpider
        )
    }

    pub fn valid_ids() -> String {
        ALL.iter().map(|r| r.id()).collect::<Vec<_>>().join(", ")
    }
}

impl fmt::Display for CompositionRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for CompositionRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        ALL.iter()
            .copied()
            .find(|r| r.id() == key)
            .ok_or_else(|| Error::UnknownRule {
                given: s.to_string(),
                valid: CompositionRule::valid_ids(),
            })
    }
}

impl serde::Serialize for CompositionRule {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.id())
    }
}

impl<'de> serde::Deserialize<'de> for CompositionRule {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
