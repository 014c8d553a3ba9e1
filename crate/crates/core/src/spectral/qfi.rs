//! Quantum Fisher information, filtered coherence measures and
//! entanglement-depth bounds.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{FilterKind, OperatorElements, SpectralFunction, SpectralKind};
use crate::error::{Error, Result};
use crate::model::Observable;
use crate::thermal::{Temperature, ThermalEnsemble};

/// `F_Q = 2 sum (p - p')^2 / (p + p') W` for the state of `ens`.
///
/// Works from the support of the state: pairs with an unoccupied partner
/// contribute `4 sum_l p_l (|O psi_l|^2 - sum_{l' occupied} W_ll')`, so the
/// result is exact for pure states (`4 Var O`) and for incomplete
/// (ground-manifold) decompositions.
pub fn qfi_direct(ens: &ThermalEnsemble, obs: &Observable) -> Result<f64> {
    let el = OperatorElements::new(&ens.eig, obs)?;
    qfi_direct_from(&el, ens)
}

pub fn qfi_direct_from(el: &OperatorElements, ens: &ThermalEnsemble) -> Result<f64> {
    if el.n_sites != ens.n_sites() {
        return Err(Error::DimensionMismatch {
            expected: ens.n_sites(),
            got: el.n_sites,
        });
    }
    if !el.diagonal {
        return Err(Error::InvalidOperator("QFI needs diagonal operator elements".into()));
    }
    let probs = &ens.probabilities;
    let mut inside: Vec<Vec<f64>> = probs.iter().map(|p| vec![0.0; p.len()]).collect();
    let mut pairs = 0.0;
    for blk in &el.blocks {
        let (pa, pb) = (&probs[blk.a], &probs[blk.b]);
        for j in 0..blk.w.ncols() {
            let q = pb[j];
            if q == 0.0 {
                continue;
            }
            for i in 0..blk.w.nrows() {
                let p = pa[i];
                if p == 0.0 {
                    continue;
                }
                let w = blk.w[(i, j)];
                inside[blk.a][i] += w;
                if blk.a == blk.b && i == j {
                    continue;
                }
                let d = p - q;
                pairs += 2.0 * d * d / (p + q) * w;
            }
        }
    }
    let mut outside = 0.0;
    for (s, ps) in probs.iter().enumerate() {
        for (i, &p) in ps.iter().enumerate() {
            if p > 0.0 {
                outside += p * (el.norm2[s][i] - inside[s][i]);
            }
        }
    }
    let f = pairs + 4.0 * outside;
    if f < -1e-12 * (1.0 + pairs.abs()) {
        return Err(Error::Domain(format!("negative quantum Fisher information {f}")));
    }
    Ok(f.max(0.0))
}

/// `(1/pi) sum_{omega > 0} h(beta omega) w` over the `chi''` poles.
pub fn coherence_measure(chi: &SpectralFunction, t: Temperature, filter: FilterKind) -> Result<f64> {
    if chi.kind != SpectralKind::Chi {
        return Err(Error::Domain(format!(
            "coherence measures integrate chi'', got {}",
            chi.kind.as_str()
        )));
    }
    filter.validate()?;
    let beta = t.beta();
    let sum: f64 = chi
        .poles
        .iter()
        .filter(|p| p.omega > 0.0)
        .map(|p| filter.eval(beta * p.omega) * p.weight)
        .sum();
    Ok(sum / PI)
}

/// QFI density `(4/pi) sum_{omega > 0} tanh(beta omega / 2) w`.
pub fn qfi_integral(chi: &SpectralFunction, t: Temperature) -> Result<f64> {
    coherence_measure(chi, t, FilterKind::Qfi)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DepthMode {
    /// `F_Q > (s m^2 + r^2) dl^2` for a finite system of `N` sites.
    Exact,
    /// `f_Q > m dl^2`, assuming every `m` divides `N`.
    Divisor,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub m: usize,
    pub bound: f64,
    pub exceeded: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepthReport {
    pub mode: DepthMode,
    pub value: f64,
    pub spectral_width: f64,
    /// Largest `m` whose bound is strictly exceeded.
    pub largest_m: Option<usize>,
    /// `largest_m + 1`, or 1 when nothing is certified.
    pub certified_depth: usize,
    pub table: Vec<BoundRow>,
}

/// `(s m^2 + r^2) dl^2` with `s = floor(N/m)`, `r = N - s m`.
pub fn separable_bound(n_sites: usize, m: usize, width: f64) -> f64 {
    let s = n_sites / m;
    let r = n_sites - s * m;
    (s * m * m + r * r) as f64 * width * width
}

/// Certified entanglement depth from `value` (`F_Q` in exact mode, `f_Q`
/// in divisor mode). Only presence is ever certified.
pub fn entanglement_depth(
    value: f64,
    n_sites: Option<usize>,
    width: f64,
    mode: DepthMode,
    tol: f64,
) -> Result<DepthReport> {
    if !(width > 0.0 && width.is_finite()) {
        return Err(Error::Domain(format!("spectrum width {width} must be positive")));
    }
    if !value.is_finite() {
        return Err(Error::Domain(format!("QFI value {value} is not finite")));
    }
    let rows = match (mode, n_sites) {
        (DepthMode::Exact, Some(n)) if n > 0 => n,
        (DepthMode::Exact, _) => return Err(Error::Domain("exact depth bounds need N".into())),
        (DepthMode::Divisor, Some(n)) if n > 0 => n,
        (DepthMode::Divisor, _) => ((value / (width * width)).max(0.0).floor() as usize + 1).min(100_000),
    };
    let table: Vec<BoundRow> = (1..=rows)
        .map(|m| {
            let bound = match mode {
                DepthMode::Exact => separable_bound(rows, m, width),
                DepthMode::Divisor => m as f64 * width * width,
            };
            BoundRow {
                m,
                bound,
                exceeded: value > bound + tol,
            }
        })
        .collect();
    let largest_m = table.iter().rev().find(|r| r.exceeded).map(|r| r.m);
    let mut certified_depth = largest_m.map_or(1, |m| m + 1);
    if let Some(n) = n_sites {
        certified_depth = certified_depth.min(n);
    }
    Ok(DepthReport {
        mode,
        value,
        spectral_width: width,
        largest_m,
        certified_depth,
        table,
    })
}

/// `nQFI = f_Q / (12 S^2)`.
pub fn nqfi(f_q: f64, spin: f64) -> Result<f64> {
    if !(spin > 0.0) {
        return Err(Error::Domain(format!("spin {spin} must be positive")));
    }
    Ok(f_q / (12.0 * spin * spin))
}

/// Depth from `nQFI > m` (unit-width divisor bound).
pub fn nqfi_depth(nqfi: f64, tol: f64) -> Result<DepthReport> {
    entanglement_depth(nqfi, None, 1.0, DepthMode::Divisor, tol)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::model::{Axis, Boundary, SpinModel};
    use crate::spectral::lehmann_chi;
    use crate::thermal::{diagonalize, thermal_state, EngineOptions};

    fn ghz(n: usize) -> ThermalEnsemble {
        let mut v = vec![0.0; 1 << n];
        v[0] = std::f64::consts::FRAC_1_SQRT_2;
        v[(1 << n) - 1] = std::f64::consts::FRAC_1_SQRT_2;
        ThermalEnsemble::pure(n, v).unwrap()
    }

    #[test]
    fn ghz_saturates_heisenberg_limit() {
        for n in 2..=8 {
            let f = qfi_direct(&ghz(n), &Observable::total(n, Axis::Z)).unwrap();
            assert!((f - (n * n) as f64).abs() < 1e-12, "{n}: {f}");
        }
    }

    #[test]
    fn maximally_mixed_has_none() {
        let model = SpinModel::heisenberg(4, 1.0, Boundary::Open);
        let eig = Arc::new(diagonalize(&model, &EngineOptions::default()).unwrap());
        let ens = thermal_state(eig, Temperature::Infinite).unwrap();
        assert!(qfi_direct(&ens, &Observable::total(4, Axis::X)).unwrap().abs() < 1e-12);
    }

    #[test]
    fn dual_route_on_dimer_sweep() {
        let model = SpinModel::heisenberg(2, 1.0, Boundary::Open);
        let eig = Arc::new(diagonalize(&model, &EngineOptions::default()).unwrap());
        let obs = Observable::collective(2, Axis::Z, std::f64::consts::PI);
        let big = obs.clone().scaled(2f64.sqrt());
        for t in [0.05, 0.3, 1.0, 4.0] {
            let ens = thermal_state(eig.clone(), Temperature::Finite(t)).unwrap();
            let f = qfi_integral(&lehmann_chi(&ens, &obs).unwrap(), Temperature::Finite(t)).unwrap();
            let direct = qfi_direct(&ens, &big).unwrap();
            assert!((2.0 * f - direct).abs() < 1e-12, "{t}: {f} {direct}");
            // dimer: F = 4 tanh(1/2T)^2 ... pole at J with weight difference
            let p0 = 1.0 / (1.0 + 3.0 * (-1.0 / t).exp());
            let p1 = (1.0 - p0) / 3.0;
            let want = 2.0 * 2.0 * (p0 - p1).powi(2) / (p0 + p1);
            assert!((direct - want).abs() < 1e-12, "{t}: {direct} vs {want}");
        }
    }

    #[test]
    fn pure_ground_state_variance() {
        let model = SpinModel::heisenberg(6, 1.0, Boundary::Periodic);
        let eig = Arc::new(diagonalize(&model, &EngineOptions::default()).unwrap());
        let ens = thermal_state(eig, Temperature::Zero).unwrap();
        assert!(ens.is_pure());
        let obs = Observable::collective(6, Axis::Z, std::f64::consts::PI).scaled(6f64.sqrt());
        let v = crate::thermal::expectation_matrix(&ens, &{
            let m = obs.to_matrix();
            &m * &m
        })
        .unwrap()
        .re;
        let f = qfi_direct(&ens, &obs).unwrap();
        assert!((f - 4.0 * v).abs() < 1e-10, "{f} vs {}", 4.0 * v);
    }

    #[test]
    fn depth_examples() {
        assert_eq!(separable_bound(10, 3, 1.0), 28.0);
        let r = entanglement_depth(3.5, None, 1.0, DepthMode::Divisor, 0.0).unwrap();
        assert_eq!(r.certified_depth, 4);
        assert_eq!(r.largest_m, Some(3));
        let r = entanglement_depth(3.0, None, 1.0, DepthMode::Divisor, 0.0).unwrap();
        assert_eq!(r.certified_depth, 3);
        let r = entanglement_depth(64.0, Some(8), 1.0, DepthMode::Exact, 1e-10).unwrap();
        assert_eq!(r.certified_depth, 8);
        let r = entanglement_depth(8.0, Some(8), 1.0, DepthMode::Exact, 1e-10).unwrap();
        assert_eq!(r.certified_depth, 1);
        assert!(entanglement_depth(1.0, Some(4), 0.0, DepthMode::Exact, 0.0).is_err());
    }

    #[test]
    fn nqfi_examples() {
        assert!((nqfi(9.3, 0.5).unwrap() - 3.1).abs() < 1e-14);
        assert_eq!(nqfi_depth(3.1, 0.0).unwrap().certified_depth, 4);
        assert_eq!(nqfi_depth(0.7, 0.0).unwrap().certified_depth, 1);
        assert!(nqfi(1.0, 0.0).is_err());
    }
}
