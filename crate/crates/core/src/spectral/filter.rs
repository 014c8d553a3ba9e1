//! Quantum filter functions `h(x)` with `x = beta * omega`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FilterKind {
    /// `4 tanh(x/2)`; the coherence measure is then the QFI density.
    Qfi,
    /// Langevin filter `L(x/2)`, `L(y) = coth y - 1/y`.
    QuantumVariance,
    /// Wigner-Yanase-Dyson filter with parameter `alpha` in `(0, 1)`.
    Skew(f64),
}

impl FilterKind {
    pub fn skew(alpha: f64) -> Result<Self> {
        let f = FilterKind::Skew(alpha);
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        if let FilterKind::Skew(a) = *self {
            if !(a > 0.0 && a < 1.0) {
                return Err(Error::Domain(format!("skew parameter {a} outside (0, 1)")));
            }
        }
        Ok(())
    }

    /// `h(x)` for `x >= 0`; `x = inf` gives the zero-temperature limit.
    pub fn eval(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        match *self {
            FilterKind::Qfi => 4.0 * (0.5 * x).tanh(),
            FilterKind::QuantumVariance => langevin(0.5 * x),
            FilterKind::Skew(alpha) => skew_filter(alpha, x),
        }
    }

    /// `lim_{x -> inf} h(x)`.
    pub fn limit(&self) -> f64 {
        match self {
            FilterKind::Qfi => 4.0,
            _ => 1.0,
        }
    }

    /// Slope `h'(0)`.
    pub fn slope_at_zero(&self) -> f64 {
        match *self {
            FilterKind::Qfi => 2.0,
            FilterKind::QuantumVariance => 1.0 / 6.0,
            FilterKind::Skew(a) => a * (1.0 - a),
        }
    }

    pub fn label(&self) -> String {
        match self {
            FilterKind::Qfi => "qfi".into(),
            FilterKind::QuantumVariance => "qv".into(),
            FilterKind::Skew(a) => format!("skew-{a}"),
        }
    }
}

impl fmt::Display for FilterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for FilterKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        match s.as_str() {
            "qfi" => Ok(FilterKind::Qfi),
            "qv" | "quantum-variance" => Ok(FilterKind::QuantumVariance),
            "wy" | "skew" => Ok(FilterKind::Skew(0.5)),
            _ => {
                if let Some(a) = s.strip_prefix("skew-").or_else(|| s.strip_prefix("skew:")) {
                    let a: f64 = a
                        .parse()
                        .map_err(|_| Error::Domain(format!("bad skew parameter in '{s}'")))?;
                    FilterKind::skew(a)
                } else {
                    Err(Error::Domain(format!("unknown filter '{s}'")))
                }
            }
        }
    }
}

/// Langevin function, with a series near zero.
pub fn langevin(y: f64) -> f64 {
    if y.abs() < 0.1 {
        let y2 = y * y;
        y * (1.0 / 3.0 + y2 * (-1.0 / 45.0 + y2 * (2.0 / 945.0 + y2 * (-1.0 / 4725.0 + y2 * 2.0 / 93555.0))))
    } else {
        1.0 / y.tanh() - 1.0 / y
    }
}

// cosh(u) - cosh(v) = 2 sinh((u+v)/2) sinh((u-v)/2), so with p + q = r
// h = 2 sinh p sinh q / sinh r = (1 - e^-2p)(1 - e^-2q) / (1 - e^-2r),
// which is free of cancellation and overflow for every x > 0.
fn skew_filter(alpha: f64, x: f64) -> f64 {
    let a = (alpha - 0.5).abs();
    let p = 0.5 * (0.5 + a) * x;
    let q = 0.5 * (0.5 - a) * x;
    let r = 0.5 * x;
    if r.is_infinite() {
        return 1.0;
    }
    (-(-2.0 * p).exp_m1()) * (-(-2.0 * q).exp_m1()) / (-(-2.0 * r).exp_m1())
}
