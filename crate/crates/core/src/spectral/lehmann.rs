//! Lehmann pole lists and the fluctuation-dissipation conversion.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{OperatorElements, Pole, SpectralFunction, SpectralKind};
use crate::error::{Error, Result};
use crate::model::Observable;
use crate::thermal::{Temperature, ThermalEnsemble, DEGENERACY_TOLERANCE};

/// Pairs with `W` below this fraction of the largest weight are treated as
/// selection-rule zeros. Eigenvectors carry errors of order
/// `eps |H| / gap`, so forbidden amplitudes come out near 1e-12 relative
/// when levels are close; their squares sit just above 1e-24.
const WEIGHT_FLOOR: f64 = 1e-20;

pub(super) fn check(el: &OperatorElements, ens: &ThermalEnsemble) -> Result<Temperature> {
    if el.n_sites != ens.n_sites() {
        return Err(Error::DimensionMismatch {
            expected: ens.n_sites(),
            got: el.n_sites,
        });
    }
    if !ens.eig.complete || !el.complete {
        return Err(Error::IncompleteSpectrum);
    }
    ens.temperature
        .ok_or_else(|| Error::MissingTemperature("spectra need a Gibbs ensemble".into()))
}

pub(super) fn poles(el: &OperatorElements, ens: &ThermalEnsemble, kind: SpectralKind) -> Vec<Pole> {
    let wmax = el.blocks.iter().map(|b| b.w.amax()).fold(0.0, f64::max);
    let floor = WEIGHT_FLOOR * wmax;
    // transitions inside a degenerate multiplet are elastic; their energy
    // differences and population differences are pure round-off
    let elastic = DEGENERACY_TOLERANCE * ens.eig.spectral_width;
    let mut out = Vec::new();
    for blk in &el.blocks {
        let (sa, sb) = (&ens.eig.sectors[blk.a], &ens.eig.sectors[blk.b]);
        let (pa, pb) = (&ens.probabilities[blk.a], &ens.probabilities[blk.b]);
        for j in 0..blk.w.ncols() {
            for i in 0..blk.w.nrows() {
                let w = blk.w[(i, j)];
                if w.abs() <= floor {
                    continue;
                }
                let (p, q) = (pa[i], pb[j]);
                if p + q == 0.0 {
                    continue;
                }
                let mut omega = sb.energies[j] - sa.energies[i];
                if omega.abs() <= elastic {
                    if kind == SpectralKind::Chi {
                        continue;
                    }
                    omega = 0.0;
                }
                let weight = match kind {
                    SpectralKind::Chi => PI * (p - q) * w,
                    SpectralKind::StructureFactor => p * w,
                };
                if weight == 0.0 {
                    continue;
                }
                out.push(Pole {
                    omega,
                    weight,
                    populations: Some((p, q)),
                });
            }
        }
    }
    out
}

/// `chi''` poles `pi (p_l - p_l') W_ll'` at `omega = E_l' - E_l`.
pub fn lehmann_chi(ens: &ThermalEnsemble, obs: &Observable) -> Result<SpectralFunction> {
    let el = OperatorElements::new(&ens.eig, obs)?;
    lehmann_chi_from(&el, ens)
}

/// As [`lehmann_chi`] with precomputed matrix elements.
pub fn lehmann_chi_from(el: &OperatorElements, ens: &ThermalEnsemble) -> Result<SpectralFunction> {
    let t = check(el, ens)?;
    Ok(SpectralFunction::new(
        SpectralKind::Chi,
        poles(el, ens, SpectralKind::Chi),
        Some(t),
        el.label.clone(),
    ))
}

/// Structure-factor poles `p_l W_ll'` at `omega = E_l' - E_l`, including
/// the elastic line. The total weight is `<(O O^dag + O^dag O) / 2>`.
pub fn dynamical_structure_factor(ens: &ThermalEnsemble, obs: &Observable) -> Result<SpectralFunction> {
    let el = OperatorElements::new(&ens.eig, obs)?;
    dynamical_structure_factor_from(&el, ens)
}

pub fn dynamical_structure_factor_from(el: &OperatorElements, ens: &ThermalEnsemble) -> Result<SpectralFunction> {
    let t = check(el, ens)?;
    Ok(SpectralFunction::new(
        SpectralKind::StructureFactor,
        poles(el, ens, SpectralKind::StructureFactor),
        Some(t),
        el.label.clone(),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FdtDirection {
    /// `chi'' = pi (1 - e^{-beta omega}) S`.
    StructureToChi,
    /// `S = chi'' / (pi (1 - e^{-beta omega}))`.
    ChiToStructure,
}

/// Converts between `S` and `chi''` pole lists at temperature `t`.
///
/// The elastic line (`|omega|` within the spectrum's frequency tolerance)
/// carries no `chi''` weight and is dropped in both directions; a nonzero
/// elastic `chi''` weight is an error.
pub fn fdt_convert(input: &SpectralFunction, t: Temperature, direction: FdtDirection) -> Result<SpectralFunction> {
    let expected = match direction {
        FdtDirection::StructureToChi => SpectralKind::StructureFactor,
        FdtDirection::ChiToStructure => SpectralKind::Chi,
    };
    if input.kind != expected {
        return Err(Error::Domain(format!(
            "expected a {} spectrum, got {}",
            expected.as_str(),
            input.kind.as_str()
        )));
    }
    let beta = t.beta();
    let tol = input.omega_tolerance();
    let mut out = Vec::with_capacity(input.len());
    for p in &input.poles {
        if p.omega.abs() <= tol {
            if direction == FdtDirection::ChiToStructure && p.weight != 0.0 {
                return Err(Error::Domain(format!(
                    "elastic chi'' weight {} at omega = {}",
                    p.weight, p.omega
                )));
            }
            continue;
        }
        // 1 - e^{-beta omega}
        let factor = if beta.is_infinite() {
            if p.omega > 0.0 {
                1.0
            } else {
                f64::NEG_INFINITY
            }
        } else {
            -(-beta * p.omega).exp_m1()
        };
        let weight = match direction {
            FdtDirection::StructureToChi => {
                if factor.is_infinite() {
                    if p.weight != 0.0 {
                        return Err(Error::DetailedBalance(format!(
                            "S weight {} at omega = {} < 0 at zero temperature",
                            p.weight, p.omega
                        )));
                    }
                    continue;
                }
                PI * factor * p.weight
            }
            FdtDirection::ChiToStructure => {
                if factor == 0.0 {
                    return Err(Error::Domain("chi'' to S needs a finite temperature".into()));
                }
                if factor.is_infinite() {
                    if p.weight != 0.0 {
                        return Err(Error::Domain(format!(
                            "chi'' to S at zero temperature is undefined for omega = {} < 0",
                            p.omega
                        )));
                    }
                    continue;
                }
                p.weight / (PI * factor)
            }
        };
        if weight == 0.0 {
            continue;
        }
        out.push(Pole {
            omega: p.omega,
            weight,
            populations: p.populations,
        });
    }
    let kind = match direction {
        FdtDirection::StructureToChi => SpectralKind::Chi,
        FdtDirection::ChiToStructure => SpectralKind::StructureFactor,
    };
    let mut s = SpectralFunction::new(kind, out, Some(t), input.label.clone());
    s.k = input.k;
    Ok(s)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::model::{Axis, Boundary, SpinModel};
    use crate::thermal::{diagonalize, expectation_matrix, thermal_state, EngineOptions};

    fn ensemble(model: &SpinModel, t: Temperature) -> ThermalEnsemble {
        let eig = Arc::new(diagonalize(model, &EngineOptions::default()).unwrap());
        thermal_state(eig, t).unwrap()
    }

    #[test]
    fn single_spin_in_field() {
        // H = h (S^x_0 + S^x_1) with no exchange: site 1 is a spectator and
        // S^z_0 connects the two levels of site 0 at +-h
        let h = 0.8;
        let t = 0.5;
        let mut model = SpinModel::custom(2, vec![]);
        model.h_x = Some(h);
        let ens = ensemble(&model, Temperature::Finite(t));
        let chi = lehmann_chi(&ens, &Observable::site(2, Axis::Z, 0)).unwrap();
        let m = chi.merged(1e-12);
        assert_eq!(m.len(), 2);
        let (pm, pp) = (1.0 / (1.0 + (-h / t).exp()), 1.0 / (1.0 + (h / t).exp()));
        // |<-|S^z|+>|^2 = 1/4
        let want = PI * (pm - pp) * 0.25;
        assert!((m.poles[1].omega.abs() - h).abs() < 1e-14);
        assert!((m.poles[1].weight - want).abs() < 1e-14);
        assert!((m.poles[0].weight + want).abs() < 1e-14);
    }

    #[test]
    fn conserved_operator_has_no_response() {
        let model = SpinModel::heisenberg(4, 1.0, Boundary::Periodic);
        let ens = ensemble(&model, Temperature::Finite(0.7));
        let chi = lehmann_chi(&ens, &Observable::total(4, Axis::Z)).unwrap();
        assert!(chi.poles.iter().all(|p| p.weight.abs() < 1e-14));
    }

    #[test]
    fn infinite_temperature_response_vanishes() {
        let model = SpinModel::heisenberg(4, 1.0, Boundary::Open);
        let ens = ensemble(&model, Temperature::Infinite);
        let chi = lehmann_chi(&ens, &Observable::site(4, Axis::X, 1)).unwrap();
        assert!(chi.is_empty());
    }

    #[test]
    fn singlet_dimer_structure_factor() {
        let model = SpinModel::heisenberg(2, 1.0, Boundary::Open);
        let ens = ensemble(&model, Temperature::Zero);
        let s = dynamical_structure_factor(&ens, &Observable::collective(2, Axis::Z, PI)).unwrap();
        let m = s.merged(1e-12);
        // S^z_pi |singlet> = |triplet_0> / sqrt 2 up to sign
        assert_eq!(m.len(), 1);
        assert!((m.poles[0].omega - 1.0).abs() < 1e-14);
        assert!((m.poles[0].weight - 0.5).abs() < 1e-14);
    }

    #[test]
    fn static_sum_rule() {
        let model = SpinModel::alternating(6, 1.0, 0.5, Boundary::Periodic);
        let ens = ensemble(&model, Temperature::Finite(0.6));
        let obs = Observable::collective(6, Axis::X, PI / 3.0);
        let s = dynamical_structure_factor(&ens, &obs).unwrap();
        let o = obs.to_matrix();
        let sym = (&o * o.adjoint() + o.adjoint() * &o) * crate::linalg::C64::new(0.5, 0.0);
        let want = expectation_matrix(&ens, &sym).unwrap().re;
        assert!(
            (s.total_weight() - want).abs() < 1e-12,
            "{} vs {want}",
            s.total_weight()
        );
    }

    #[test]
    fn zero_temperature_has_no_negative_frequencies() {
        let model = SpinModel::heisenberg(6, 1.0, Boundary::Periodic);
        let ens = ensemble(&model, Temperature::Zero);
        let s = dynamical_structure_factor(&ens, &Observable::collective(6, Axis::Z, PI)).unwrap();
        assert!(s.poles.iter().all(|p| p.omega > -1e-12));
    }

    #[test]
    fn fdt_round_trip_and_direct_agreement() {
        let model = SpinModel::heisenberg(2, 1.0, Boundary::Open);
        let t = Temperature::Finite(1.0);
        let ens = ensemble(&model, t);
        let obs = Observable::site(2, Axis::Z, 0);
        let s = dynamical_structure_factor(&ens, &obs).unwrap();
        let chi = fdt_convert(&s, t, FdtDirection::StructureToChi).unwrap();
        let direct = lehmann_chi(&ens, &obs).unwrap();
        let (a, b) = (chi.merged(1e-12), direct.merged(1e-12));
        assert_eq!(a.len(), b.len());
        for (x, y) in a.poles.iter().zip(&b.poles) {
            assert!((x.omega - y.omega).abs() < 1e-14);
            assert!((x.weight - y.weight).abs() < 1e-12);
        }
        let back = fdt_convert(&chi, t, FdtDirection::ChiToStructure).unwrap();
        let inelastic: Vec<&Pole> = s.poles.iter().filter(|p| p.omega.abs() > 1e-9).collect();
        assert_eq!(back.len(), inelastic.len());
        for (x, y) in back.poles.iter().zip(inelastic) {
            assert!((x.weight - y.weight).abs() < 1e-12 * y.weight.abs().max(1.0));
        }
    }

    #[test]
    fn fdt_errors() {
        let model = SpinModel::heisenberg(2, 1.0, Boundary::Open);
        let ens = ensemble(&model, Temperature::Finite(1.0));
        let obs = Observable::site(2, Axis::Z, 0);
        let s = dynamical_structure_factor(&ens, &obs).unwrap();
        assert!(matches!(
            fdt_convert(&s, Temperature::Zero, FdtDirection::StructureToChi),
            Err(Error::DetailedBalance(_))
        ));
        assert!(fdt_convert(&s, Temperature::Finite(1.0), FdtDirection::ChiToStructure).is_err());
        let chi = lehmann_chi(&ens, &obs).unwrap();
        assert!(fdt_convert(&chi, Temperature::Infinite, FdtDirection::ChiToStructure).is_err());
        let elastic = SpectralFunction::new(
            SpectralKind::Chi,
            vec![Pole {
                omega: 0.0,
                weight: 0.1,
                populations: None,
            }],
            None,
            "bad",
        );
        assert!(fdt_convert(&elastic, Temperature::Finite(1.0), FdtDirection::ChiToStructure).is_err());
    }

    #[test]
    fn symmetry_checks_on_thermal_spectra() {
        let model = SpinModel::transverse_xxz(5, 1.0, 0.5, 0.3, Boundary::Periodic);
        for t in [Temperature::Finite(0.3), Temperature::Finite(2.0), Temperature::Zero] {
            let ens = ensemble(&model, t);
            let obs = Observable::collective(5, Axis::Y, 2.0 * PI / 5.0);
            let chi = lehmann_chi(&ens, &obs).unwrap();
            assert!(chi.antisymmetry_error() < 1e-12);
            assert!(chi.tanh_identity_error().unwrap() < 1e-12);
            let s = dynamical_structure_factor(&ens, &obs).unwrap();
            assert!(s.detailed_balance_error().unwrap() < 1e-12);
        }
    }

    #[test]
    fn incomplete_spectrum_rejected() {
        let ens = ThermalEnsemble::pure(2, vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(matches!(
            lehmann_chi(&ens, &Observable::site(2, Axis::Z, 0)),
            Err(Error::IncompleteSpectrum)
        ));
    }
}
