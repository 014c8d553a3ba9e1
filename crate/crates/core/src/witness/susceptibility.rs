//! Magnetic-susceptibility entanglement witness.
//!
//! For a separable state of `N` spin-`S` moments the summed variance of the
//! total magnetization obeys `sum_a Delta^2(M^a) >= N S` (natural units).
//! The witness certifies entanglement when the inequality is violated.

use serde::{Deserialize, Serialize};

use super::{certify_below, Branch, Certification, WitnessReport};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SusceptibilityInput {
    /// `Delta^2(M^a_tot)` for `a = x, y, z`.
    pub variances: [f64; 3],
    pub n_sites: usize,
    pub spin: f64,
    /// Needed only to report the susceptibility itself.
    pub temperature: Option<f64>,
    pub g_factor: f64,
    /// The witness assumes an isotropic g tensor.
    pub anisotropic_g: bool,
}

impl SusceptibilityInput {
    pub fn new(variances: [f64; 3], n_sites: usize) -> Self {
        SusceptibilityInput {
            variances,
            n_sites,
            spin: 0.5,
            temperature: None,
            g_factor: 2.0,
            anisotropic_g: false,
        }
    }
}

/// Reports `value = sum_a Delta^2(M^a)` against `bound = N S`.
///
/// When a positive temperature is given, the averaged susceptibility
/// `chi = g^2 sum Delta^2 / (3T)` and its separable bound are attached as
/// `chi` and `chi_bound` (units of `mu_B^2` per energy).
pub fn susceptibility_witness(input: &SusceptibilityInput, tol: f64) -> Result<WitnessReport> {
    if input.variances.iter().any(|v| !v.is_finite() || *v < -1e-12) {
        return Err(Error::Domain(format!(
            "variances {:?} must be finite and nonnegative",
            input.variances
        )));
    }
    if input.n_sites == 0 || !(input.spin > 0.0) {
        return Err(Error::Domain("need at least one site and S > 0".into()));
    }
    let value: f64 = input.variances.iter().sum();
    let bound = input.n_sites as f64 * input.spin;
    let certification = if input.anisotropic_g {
        Certification::Inapplicable
    } else {
        certify_below(value, bound, tol)
    };
    let mut report = WitnessReport::new("susceptibility", value, Branch::Variance)
        .with_bound(bound)
        .with_certification(certification);
    if let Some(t) = input.temperature {
        report = report.with_temperature(t);
        if t > 0.0 && t.is_finite() {
            let g2 = input.g_factor * input.g_factor;
            report = report
                .with_extra("chi", g2 * value / (3.0 * t))
                .with_extra("chi_bound", g2 * bound / (3.0 * t));
        }
    }
    Ok(report)
}
