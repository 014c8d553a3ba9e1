//! Static entanglement witnesses and correlation measures.

pub mod concurrence;
pub mod discord;
pub mod susceptibility;
pub mod tangle;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::LogBase;

pub use concurrence::{
    concurrence_dimer, concurrence_disorder_free, concurrence_general_parity, concurrence_heisenberg,
    concurrence_parity, concurrence_parity_state, concurrence_translation_real, concurrence_wootters,
    entanglement_of_formation,
};
pub use discord::{discord_general, discord_heisenberg, discord_xyz, discord_xyz_state, DiscordOptions, DiscordResult};
pub use susceptibility::{susceptibility_witness, SusceptibilityInput};
pub use tangle::{one_tangle, two_tangle_all_partners, two_tangle_one_sided, TwoTangle, TwoTangleConvention};

/// Default margin by which a witness inequality must be violated before
/// entanglement is claimed.
pub const DEFAULT_TOLERANCE: f64 = 1e-10;

/// Slack within which an out-of-range result is treated as round-off and
/// clamped; anything beyond it is an error.
pub const CLAMP_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Certification {
    Certified,
    NotCertified,
    Inapplicable,
}

impl Certification {
    pub fn as_str(self) -> &'static str {
        match self {
            Certification::Certified => "certified",
            Certification::NotCertified => "not-certified",
            Certification::Inapplicable => "inapplicable",
        }
    }

    pub fn is_certified(self) -> bool {
        self == Certification::Certified
    }
}

/// Which formula produced a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    General,
    Parity,
    TranslationInvariant,
    Heisenberg,
    DisorderFree,
    Dimer,
    Xyz,
    Variance,
}

impl Branch {
    pub fn as_str(self) -> &'static str {
        match self {
            Branch::General => "general",
            Branch::Parity => "parity",
            Branch::TranslationInvariant => "translation-invariant",
            Branch::Heisenberg => "heisenberg",
            Branch::DisorderFree => "disorder-free",
            Branch::Dimer => "dimer",
            Branch::Xyz => "xyz",
            Branch::Variance => "variance",
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One evaluated witness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub witness: String,
    pub value: f64,
    pub bound: Option<f64>,
    pub certification: Certification,
    pub branch: Branch,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub log_base: Option<LogBase>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub temperature: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pair: Option<(usize, usize)>,
    /// Free-form description of the inputs (model, file, k ...).
    pub inputs: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub extra: BTreeMap<String, f64>,
}

impl WitnessReport {
    pub fn new(witness: impl Into<String>, value: f64, branch: Branch) -> Self {
        WitnessReport {
            witness: witness.into(),
            value,
            bound: None,
            certification: Certification::NotCertified,
            branch,
            log_base: None,
            temperature: None,
            pair: None,
            inputs: String::new(),
            extra: BTreeMap::new(),
        }
    }

    pub fn with_bound(mut self, bound: f64) -> Self {
        self.bound = Some(bound);
        self
    }

    pub fn with_certification(mut self, c: Certification) -> Self {
        self.certification = c;
        self
    }

    pub fn with_temperature(mut self, t: f64) -> Self {
        self.temperature = Some(t);
        self
    }

    pub fn with_pair(mut self, i: usize, j: usize) -> Self {
        self.pair = Some((i, j));
        self
    }

    pub fn with_log_base(mut self, base: LogBase) -> Self {
        self.log_base = Some(base);
        self
    }

    pub fn with_inputs(mut self, inputs: impl Into<String>) -> Self {
        self.inputs = inputs.into();
        self
    }

    pub fn with_extra(mut self, key: &str, value: f64) -> Self {
        self.extra.insert(key.to_string(), value);
        self
    }

    pub const CSV_HEADER: [&'static str; 7] = ["witness", "value", "bound", "certified", "branch", "T", "pair"];

    /// Fields in [`Self::CSV_HEADER`] order.
    pub fn csv_record(&self) -> [String; 7] {
        [
            self.witness.clone(),
            format_float(self.value),
            self.bound.map(format_float).unwrap_or_default(),
            self.certification.as_str().to_string(),
            self.branch.as_str().to_string(),
            self.temperature.map(format_float).unwrap_or_default(),
            self.pair.map(|(i, j)| format!("{i}-{j}")).unwrap_or_default(),
        ]
    }

    /// Single-line JSON record.
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

/// Shortest round-trip representation; infinities spelled out, negative
/// zero printed as `0`.
pub fn format_float(x: f64) -> String {
    if x == 0.0 {
        "0".into()
    } else if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x}")
    }
}

/// `Certified` iff `value` exceeds `bound` by more than `tol`.
pub fn certify_above(value: f64, bound: f64, tol: f64) -> Certification {
    if value > bound + tol {
        Certification::Certified
    } else {
        Certification::NotCertified
    }
}

/// `Certified` iff `value` is below `bound` by more than `tol`.
pub fn certify_below(value: f64, bound: f64, tol: f64) -> Certification {
    if value < bound - tol {
        Certification::Certified
    } else {
        Certification::NotCertified
    }
}

/// Clamps `v` into `[lo, hi]` when it is outside by at most
/// [`CLAMP_SLACK`]; larger excursions are reported as errors.
pub fn clamp_range(v: f64, lo: f64, hi: f64, what: &str) -> Result<f64> {
    if v.is_nan() || v < lo - CLAMP_SLACK || v > hi + CLAMP_SLACK {
        return Err(Error::Domain(format!("{what} = {v} outside [{lo}, {hi}]")));
    }
    Ok(v.clamp(lo, hi))
}
