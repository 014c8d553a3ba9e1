//! Dynamical response: Lehmann poles of the imaginary susceptibility and
//! the structure factor, fluctuation-dissipation conversion, the quantum
//! Fisher information family, entanglement-depth bounds and real-space
//! transforms.
//!
//! Spectra are kept as exact pole lists. For an observable `O` with real
//! eigenvectors the pole at `omega = E_l' - E_l` of
//!
//! * `chi''` carries `pi (p_l - p_l') W_ll'`,
//! * `S` carries `p_l W_ll'`,
//!
//! where `W` is the symmetrized squared matrix element stored in
//! [`OperatorElements`]. Feeding the normalized collective operator
//! `S_k = N^{-1/2} sum_r e^{ikr} S_r` yields the per-site (intensive)
//! response.

mod elements;
pub mod filter;
mod lehmann;
mod qfi;
mod spatial;
mod vanhove;

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::thermal::Temperature;
use crate::witness::format_float;

pub use elements::{Block, OperatorElements};
pub use filter::FilterKind;
pub use lehmann::{
    dynamical_structure_factor, dynamical_structure_factor_from, fdt_convert, lehmann_chi, lehmann_chi_from,
    FdtDirection,
};
pub use qfi::{
    coherence_measure, entanglement_depth, nqfi, nqfi_depth, qfi_direct, qfi_direct_from, qfi_integral,
    separable_bound, BoundRow, DepthMode, DepthReport,
};
pub use spatial::{spatial_chi, spatial_quantum_correlation, structure_from_spatial};
pub use vanhove::{van_hove, VanHove};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectralKind {
    /// Imaginary part of the dynamical susceptibility.
    Chi,
    /// Dynamical structure factor.
    StructureFactor,
}

impl SpectralKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SpectralKind::Chi => "chi",
            SpectralKind::StructureFactor => "structure-factor",
        }
    }
}

/// One delta function `weight * delta(omega - omega_n)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pole {
    pub omega: f64,
    pub weight: f64,
    /// Occupations `(p_l, p_l')` of the transition, when known.
    pub populations: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralFunction {
    pub kind: SpectralKind,
    pub poles: Vec<Pole>,
    pub temperature: Option<Temperature>,
    pub label: String,
    pub k: Option<f64>,
}

impl SpectralFunction {
    pub fn new(
        kind: SpectralKind,
        poles: Vec<Pole>,
        temperature: Option<Temperature>,
        label: impl Into<String>,
    ) -> Self {
        let mut s = SpectralFunction {
            kind,
            poles,
            temperature,
            label: label.into(),
            k: None,
        };
        s.sort();
        s
    }

    pub fn with_k(mut self, k: f64) -> Self {
        self.k = Some(k);
        self
    }

    fn sort(&mut self) {
        // full key, so the unstable sort is still deterministic
        self.poles.sort_unstable_by(|a, b| {
            let pa = a.populations.unwrap_or_default();
            let pb = b.populations.unwrap_or_default();
            a.omega
                .total_cmp(&b.omega)
                .then(a.weight.total_cmp(&b.weight))
                .then(pa.0.total_cmp(&pb.0))
                .then(pa.1.total_cmp(&pb.1))
        });
    }

    pub fn len(&self) -> usize {
        self.poles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poles.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.poles.iter().map(|p| p.weight).sum()
    }

    pub fn max_abs_weight(&self) -> f64 {
        self.poles.iter().map(|p| p.weight.abs()).fold(0.0, f64::max)
    }

    pub fn max_abs_omega(&self) -> f64 {
        self.poles.iter().map(|p| p.omega.abs()).fold(0.0, f64::max)
    }

    /// Groups poles whose frequencies differ by at most `tol` (chained) and
    /// sums their weights. Populations are dropped.
    pub fn merged(&self, tol: f64) -> SpectralFunction {
        let mut out: Vec<Pole> = Vec::new();
        let mut last = f64::NEG_INFINITY;
        for p in &self.poles {
            match out.last_mut() {
                Some(q) if p.omega - last <= tol => {
                    q.weight += p.weight;
                }
                _ => out.push(Pole {
                    omega: p.omega,
                    weight: p.weight,
                    populations: None,
                }),
            }
            last = p.omega;
        }
        SpectralFunction {
            kind: self.kind,
            poles: out,
            temperature: self.temperature,
            label: self.label.clone(),
            k: self.k,
        }
    }

    /// Default frequency resolution for merging and symmetry checks.
    pub fn omega_tolerance(&self) -> f64 {
        1e-9 * self.max_abs_omega().max(1.0)
    }

    fn weight_near(merged: &[Pole], omega: f64, tol: f64) -> f64 {
        let i = merged.partition_point(|p| p.omega < omega - tol);
        merged[i..]
            .iter()
            .take_while(|p| p.omega <= omega + tol)
            .map(|p| p.weight)
            .sum()
    }

    /// `max |chi''(omega) + chi''(-omega)|` over merged poles, relative to
    /// the largest weight.
    pub fn antisymmetry_error(&self) -> f64 {
        let tol = self.omega_tolerance();
        let m = self.merged(tol);
        let scale = m.max_abs_weight().max(f64::MIN_POSITIVE);
        let mut err: f64 = 0.0;
        for p in &m.poles {
            let image = Self::weight_near(&m.poles, -p.omega, tol);
            if p.omega.abs() <= tol {
                err = err.max(p.weight.abs() / scale);
            } else {
                err = err.max((p.weight + image).abs() / scale);
            }
        }
        err
    }

    /// `max |S(-omega) - e^{-beta omega} S(omega)|` over merged poles with
    /// `omega > 0`, relative to the largest weight.
    pub fn detailed_balance_error(&self) -> Result<f64> {
        let t = self
            .temperature
            .ok_or_else(|| Error::MissingTemperature(self.label.clone()))?;
        let beta = t.beta();
        let tol = self.omega_tolerance();
        let m = self.merged(tol);
        // each pole gets its own factor before merging, so poles a hair
        // apart inside one group are compared exactly
        let mut damped = self.clone();
        for p in damped.poles.iter_mut().filter(|p| p.omega > 0.0) {
            p.weight *= boltzmann_factor(beta, p.omega);
        }
        let damped = damped.merged(tol);
        let scale = m.max_abs_weight().max(f64::MIN_POSITIVE);
        let mut err: f64 = 0.0;
        for (p, d) in m.poles.iter().zip(&damped.poles).filter(|(p, _)| p.omega > tol) {
            let image = Self::weight_near(&m.poles, -p.omega, tol);
            err = err.max((image - d.weight).abs() / scale);
        }
        Ok(err)
    }

    /// `max |tanh(beta omega / 2) - (p - p') / (p + p')|` over poles that
    /// carry populations and are not elastic.
    pub fn tanh_identity_error(&self) -> Result<f64> {
        let t = self
            .temperature
            .ok_or_else(|| Error::MissingTemperature(self.label.clone()))?;
        let beta = t.beta();
        let tol = self.omega_tolerance();
        let mut err: f64 = 0.0;
        for p in &self.poles {
            let Some((a, b)) = p.populations else { continue };
            if p.omega.abs() <= tol || a + b == 0.0 {
                continue;
            }
            let lhs = half_tanh(beta, p.omega);
            err = err.max((lhs - (a - b) / (a + b)).abs());
        }
        Ok(err)
    }

    /// Writes `omega,weight,p_initial,p_final` rows with round-trip floats.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["omega", "weight", "p_initial", "p_final"])?;
        for p in &self.poles {
            let (a, b) = p
                .populations
                .map(|(a, b)| (format_float(a), format_float(b)))
                .unwrap_or_default();
            wr.write_record([format_float(p.omega), format_float(p.weight), a, b])?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// `e^{-beta omega}` with the `beta = inf` limit taken per sign.
pub(crate) fn boltzmann_factor(beta: f64, omega: f64) -> f64 {
    if beta.is_infinite() {
        if omega > 0.0 {
            0.0
        } else if omega < 0.0 {
            f64::INFINITY
        } else {
            1.0
        }
    } else {
        (-beta * omega).exp()
    }
}

/// `tanh(beta omega / 2)`, including `beta = inf`.
pub(crate) fn half_tanh(beta: f64, omega: f64) -> f64 {
    if beta.is_infinite() {
        omega.signum() * (omega != 0.0) as i32 as f64
    } else {
        (0.5 * beta * omega).tanh()
    }
}
