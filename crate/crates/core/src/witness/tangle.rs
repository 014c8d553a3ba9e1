//! One-tangle and two-tangle.

use serde::{Deserialize, Serialize};

use super::clamp_range;
use crate::error::{Error, Result};

/// `tau_1 = 4 det rho^(1) = 1 - 4 |<S>|^2` from the one-site moments.
pub fn one_tangle(m: [f64; 3]) -> Result<f64> {
    let s: f64 = m.iter().map(|x| x * x).sum();
    if !s.is_finite() {
        return Err(Error::Domain("non-finite magnetization".into()));
    }
    if s > 0.25 + 1e-9 {
        return Err(Error::Domain(format!("|<S>|^2 = {s} exceeds the Bloch ball")));
    }
    clamp_range(1.0 - 4.0 * s, 0.0, 1.0, "one-tangle")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TwoTangleConvention {
    /// `sum_{j != i} C_ij^2` for a fixed site `i` (the form bounded by
    /// `tau_1` through monogamy).
    AllPartners,
    /// `sum_{r > 0} C_r^2` over separations on one side of a site.
    OneSided,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoTangle {
    pub value: f64,
    pub convention: TwoTangleConvention,
    /// Largest separation (or number of partners) included.
    pub radius: usize,
}

/// Two-tangle of `site` from a list of pair concurrences. Pairs not
/// involving `site` are ignored.
pub fn two_tangle_all_partners(site: usize, pairs: &[((usize, usize), f64)]) -> TwoTangle {
    let mut value = 0.0;
    let mut count = 0;
    for &((i, j), c) in pairs {
        if i != j && (i == site || j == site) {
            value += c * c;
            count += 1;
        }
    }
    TwoTangle {
        value,
        convention: TwoTangleConvention::AllPartners,
        radius: count,
    }
}

/// Translation-invariant chain form; `by_distance[r - 1] = C_r`.
pub fn two_tangle_one_sided(by_distance: &[f64]) -> TwoTangle {
    TwoTangle {
        value: by_distance.iter().map(|c| c * c).sum(),
        convention: TwoTangleConvention::OneSided,
        radius: by_distance.len(),
    }
}
