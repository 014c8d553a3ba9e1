//! Two-site response and real-space quantum correlations.

use super::lehmann::{check, poles};
use super::{coherence_measure, FilterKind, OperatorElements, SpectralFunction, SpectralKind};
use crate::error::{Error, Result};
use crate::model::{Axis, Observable};
use crate::thermal::{Temperature, ThermalEnsemble};

/// `chi''_{O_i O_j}` poles `pi (p_l - p_l') Re <l|O_i|l'><l'|O_j|l>` for
/// `O = S^axis`.
pub fn spatial_chi(ens: &ThermalEnsemble, axis: Axis, i: usize, j: usize) -> Result<SpectralFunction> {
    let n = ens.n_sites();
    for s in [i, j] {
        if s >= n {
            return Err(Error::SiteOutOfRange { index: s, n_sites: n });
        }
    }
    let a = Observable::site(n, axis, i);
    let b = Observable::site(n, axis, j);
    let el = OperatorElements::cross(&ens.eig, &a, &b)?;
    let t = check(&el, ens)?;
    Ok(SpectralFunction::new(
        SpectralKind::Chi,
        poles(&el, ens, SpectralKind::Chi),
        Some(t),
        el.label,
    ))
}

/// `C[O_i, O_j; h] = (1/pi) sum_{omega > 0} h(beta omega) chi''_ij`.
pub fn spatial_quantum_correlation(chi_ij: &SpectralFunction, t: Temperature, filter: FilterKind) -> Result<f64> {
    coherence_measure(chi_ij, t, filter)
}

/// `(1/N) sum_ij cos(k (i - j)) C_ij`, the coherence measure of the
/// normalized collective operator at `k`.
pub fn structure_from_spatial(c: &[Vec<f64>], k: f64) -> f64 {
    let n = c.len();
    let mut s = 0.0;
    for (i, row) in c.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            s += (k * (i as f64 - j as f64)).cos() * v;
        }
    }
    s / n as f64
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::model::{k_grid, Boundary, SpinModel};
    use crate::spectral::lehmann_chi;
    use crate::thermal::{diagonalize, thermal_state, EngineOptions};

    fn ens(model: &SpinModel, t: Temperature) -> ThermalEnsemble {
        thermal_state(Arc::new(diagonalize(model, &EngineOptions::default()).unwrap()), t).unwrap()
    }

    #[test]
    fn singlet_quantum_variance() {
        let e = ens(&SpinModel::heisenberg(2, 1.0, Boundary::Open), Temperature::Zero);
        let chi = spatial_chi(&e, Axis::Z, 0, 1).unwrap();
        let c = spatial_quantum_correlation(&chi, Temperature::Zero, FilterKind::QuantumVariance).unwrap();
        assert!((c + 0.25).abs() < 1e-14, "{c}");
    }

    #[test]
    fn product_state_has_no_cross_correlation() {
        // decoupled spins in a field
        let mut model = SpinModel::custom(3, vec![]);
        model.h_x = Some(0.7);
        let e = ens(&model, Temperature::Finite(0.4));
        for axis in Axis::ALL {
            let chi = spatial_chi(&e, axis, 0, 2).unwrap();
            let c = spatial_quantum_correlation(&chi, Temperature::Finite(0.4), FilterKind::Qfi).unwrap();
            assert!(c.abs() < 1e-14);
        }
    }

    #[test]
    fn fourier_consistency_on_ring() {
        let n = 6;
        let t = Temperature::Finite(0.5);
        let e = ens(&SpinModel::transverse_xxz(n, 1.0, 0.6, 0.0, Boundary::Periodic), t);
        for filter in [FilterKind::Qfi, FilterKind::QuantumVariance, FilterKind::Skew(0.3)] {
            let c: Vec<Vec<f64>> = (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| {
                            let chi = spatial_chi(&e, Axis::X, i, j).unwrap();
                            spatial_quantum_correlation(&chi, t, filter).unwrap()
                        })
                        .collect()
                })
                .collect();
            for k in k_grid(n) {
                let chi = lehmann_chi(&e, &Observable::collective(n, Axis::X, k)).unwrap();
                let direct = coherence_measure(&chi, t, filter).unwrap();
                assert!((structure_from_spatial(&c, k) - direct).abs() < 1e-10, "{filter} {k}");
            }
            if filter == FilterKind::Qfi {
                let f0 = qfi_k0(&e, n, t);
                let row: f64 = c[0].iter().sum();
                assert!((row - f0).abs() < 1e-10);
            }
        }
    }

    fn qfi_k0(e: &ThermalEnsemble, n: usize, t: Temperature) -> f64 {
        let chi = lehmann_chi(e, &Observable::collective(n, Axis::X, 0.0)).unwrap();
        crate::spectral::qfi_integral(&chi, t).unwrap()
    }
}
