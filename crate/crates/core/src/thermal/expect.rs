//! Static expectation values and reduced density matrices.

use nalgebra::{DMatrix, Matrix2, Matrix4};

use super::ThermalEnsemble;
use crate::error::{Error, Result};
use crate::linalg::{C64, I, ONE, ZERO};
use crate::model::{apply_terms, site_mask, Axis, Observable, SkeletonTerm};
use crate::two_site::TwoSiteState;

/// Calls `f(p, psi)` for every state of nonzero weight, with `psi` in the
/// full computational basis.
pub(crate) fn for_each_state(ens: &ThermalEnsemble, mut f: impl FnMut(f64, &[f64])) {
    let mut buf = vec![0.0; ens.dim()];
    for (level, p) in ens.support() {
        ens.eig.sectors[level.sector].scatter(level.index, &mut buf);
        f(p, &buf);
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn phase(axis: Axis) -> C64 {
    if axis == Axis::Y {
        I
    } else {
        ONE
    }
}

fn check_site(i: usize, n: usize) -> Result<()> {
    if i >= n {
        Err(Error::SiteOutOfRange { index: i, n_sites: n })
    } else {
        Ok(())
    }
}

/// `<O> = Tr[rho O]`.
pub fn expectation(ens: &ThermalEnsemble, obs: &Observable) -> Result<C64> {
    if obs.n_sites != ens.n_sites() {
        return Err(Error::DimensionMismatch {
            expected: ens.n_sites(),
            got: obs.n_sites,
        });
    }
    let mut out = vec![0.0; ens.dim()];
    let mut total = ZERO;
    for_each_state(ens, |p, psi| {
        for part in &obs.parts {
            out.iter_mut().for_each(|x| *x = 0.0);
            apply_terms(&part.terms, obs.n_sites, psi, &mut out);
            total += part.factor * (p * dot(psi, &out));
        }
    });
    Ok(total)
}

/// `Tr[rho M]` for a dense operator in the computational basis.
pub fn expectation_matrix(ens: &ThermalEnsemble, m: &DMatrix<C64>) -> Result<C64> {
    let dim = ens.dim();
    if m.nrows() != dim || m.ncols() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: m.nrows(),
        });
    }
    let mut total = ZERO;
    for_each_state(ens, |p, psi| {
        let v = nalgebra::DVector::from_iterator(dim, psi.iter().map(|&x| C64::new(x, 0.0)));
        total += (v.adjoint() * m * &v)[(0, 0)] * p;
    });
    Ok(total)
}

/// `g^{ab}_{ij} = <S^a_i S^b_j>`.
pub fn two_point(ens: &ThermalEnsemble, a: Axis, i: usize, b: Axis, j: usize) -> Result<C64> {
    let n = ens.n_sites();
    check_site(i, n)?;
    check_site(j, n)?;
    let ta = [SkeletonTerm {
        site: i,
        axis: a,
        coeff: 1.0,
    }];
    let tb = [SkeletonTerm {
        site: j,
        axis: b,
        coeff: 1.0,
    }];
    // <psi| R_a R_b |psi> = (R_a^T psi) . (R_b psi), with R^T = -R for y
    let sign = if a == Axis::Y { -1.0 } else { 1.0 };
    let mut ua = vec![0.0; ens.dim()];
    let mut ub = vec![0.0; ens.dim()];
    let mut acc = 0.0;
    for_each_state(ens, |p, psi| {
        ua.iter_mut().for_each(|x| *x = 0.0);
        ub.iter_mut().for_each(|x| *x = 0.0);
        apply_terms(&ta, n, psi, &mut ua);
        apply_terms(&tb, n, psi, &mut ub);
        acc += p * sign * dot(&ua, &ub);
    });
    Ok(phase(a) * phase(b) * acc)
}

/// One-site reduced density matrix in the basis `{up, down}`.
pub fn reduce_one_site(ens: &ThermalEnsemble, i: usize) -> Result<Matrix2<C64>> {
    let n = ens.n_sites();
    check_site(i, n)?;
    let mask = site_mask(i, n);
    let mut rho = Matrix2::<f64>::zeros();
    for_each_state(ens, |p, psi| {
        for (s, &v) in psi.iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            let r = usize::from(s & mask != 0);
            let rest = s & !mask;
            for c in 0..2 {
                let t = if c == 1 { rest | mask } else { rest };
                rho[(r, c)] += p * v * psi[t];
            }
        }
    });
    Ok(rho.map(|x| C64::new(x, 0.0)))
}

/// Two-site reduced density matrix of sites `(i, j)` in the standard basis.
pub fn reduce_two_site(ens: &ThermalEnsemble, i: usize, j: usize) -> Result<TwoSiteState> {
    let n = ens.n_sites();
    check_site(i, n)?;
    check_site(j, n)?;
    if i == j {
        return Err(Error::InvalidOperator(format!(
            "two-site reduction needs distinct sites, got ({i}, {i})"
        )));
    }
    let mi = site_mask(i, n);
    let mj = site_mask(j, n);
    let bits = |c: usize| -> usize { (if c & 2 != 0 { mi } else { 0 }) | (if c & 1 != 0 { mj } else { 0 }) };
    let mut rho = Matrix4::<f64>::zeros();
    for_each_state(ens, |p, psi| {
        for (s, &v) in psi.iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            let r = 2 * usize::from(s & mi != 0) + usize::from(s & mj != 0);
            let rest = s & !(mi | mj);
            for c in 0..4 {
                let w = psi[rest | bits(c)];
                if w != 0.0 {
                    rho[(r, c)] += p * v * w;
                }
            }
        }
    });
    Ok(TwoSiteState::from_real(rho)?.with_sites(i, j))
}

/// `Delta^2(M^a) = <M_a^2> - <M_a>^2` for the total moment along `axis`.
pub fn magnetization_variance(ens: &ThermalEnsemble, axis: Axis) -> Result<f64> {
    let n = ens.n_sites();
    let m = Observable::total(n, axis);
    let terms = &m.parts[0].terms;
    let mut out = vec![0.0; ens.dim()];
    let mut second = 0.0;
    let mut first = 0.0;
    for_each_state(ens, |p, psi| {
        out.iter_mut().for_each(|x| *x = 0.0);
        apply_terms(terms, n, psi, &mut out);
        // <M^2> = |R psi|^2 for every axis (R^T R = -R^2 for y cancels i^2)
        second += p * dot(&out, &out);
        if axis != Axis::Y {
            first += p * dot(psi, &out);
        }
    });
    Ok((second - first * first).max(0.0))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::model::{Boundary, SpinModel};
    use crate::thermal::{diagonalize, thermal_state, EngineOptions, Temperature};

    fn ensemble(model: &SpinModel, t: Temperature) -> ThermalEnsemble {
        let eig = Arc::new(diagonalize(model, &EngineOptions::default()).unwrap());
        thermal_state(eig, t).unwrap()
    }

    fn basis_state(n: usize, s: usize) -> ThermalEnsemble {
        let mut v = vec![0.0; 1 << n];
        v[s] = 1.0;
        ThermalEnsemble::pure(n, v).unwrap()
    }

    #[test]
    fn singlet_correlators() {
        let ens = ensemble(&SpinModel::heisenberg(2, 1.0, Boundary::Open), Temperature::Zero);
        for a in Axis::ALL {
            let g = two_point(&ens, a, 0, a, 1).unwrap();
            assert!((g.re + 0.25).abs() < 1e-14 && g.im.abs() < 1e-14);
        }
        let r1 = reduce_one_site(&ens, 0).unwrap();
        assert!((r1[(0, 0)].re - 0.5).abs() < 1e-14 && r1[(0, 1)].norm() < 1e-14);
        assert!(magnetization_variance(&ens, Axis::Z).unwrap() < 1e-14);
    }

    #[test]
    fn product_state_correlators() {
        let ens = basis_state(2, 0);
        let g = two_point(&ens, Axis::Z, 0, Axis::Z, 1).unwrap();
        assert!((g.re - 0.25).abs() < 1e-15);
        let rho = reduce_two_site(&ens, 0, 1).unwrap();
        assert_eq!(rho.a(), 1.0);
        assert!(magnetization_variance(&ens, Axis::Z).unwrap() < 1e-15);
        // transverse variance of a polarized state: N/4
        assert!((magnetization_variance(&ens, Axis::X).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn free_spin_infinite_temperature() {
        let ens = ensemble(&SpinModel::custom(2, vec![]), Temperature::Infinite);
        for a in Axis::ALL {
            assert!((magnetization_variance(&ens, a).unwrap() - 0.5).abs() < 1e-14);
        }
    }

    #[test]
    fn thermal_dimer_rdm_spectrum() {
        let ens = ensemble(&SpinModel::heisenberg(2, 1.0, Boundary::Open), Temperature::Finite(1.0));
        let ev = reduce_two_site(&ens, 0, 1).unwrap().eigenvalues();
        let z = (0.75f64).exp() + 3.0 * (-0.25f64).exp();
        let ps = (0.75f64).exp() / z;
        let pt = (-0.25f64).exp() / z;
        for (i, e) in ev.iter().enumerate() {
            let want = if i < 3 { pt } else { ps };
            assert!((e - want).abs() < 1e-14);
        }
    }

    #[test]
    fn dimer_bond_energy_at_threshold_temperature() {
        let t = 1.0 / 3f64.ln();
        let ens = ensemble(&SpinModel::heisenberg(2, 1.0, Boundary::Open), Temperature::Finite(t));
        let ss: f64 = Axis::ALL.iter().map(|&a| two_point(&ens, a, 0, a, 1).unwrap().re).sum();
        assert!((ss + 0.25).abs() < 1e-12);
    }

    #[test]
    fn partial_trace_consistency_and_bloch_form() {
        let model = SpinModel::transverse_xxz(5, 1.0, 0.4, 0.7, Boundary::Open);
        let ens = ensemble(&model, Temperature::Finite(0.6));
        for i in 0..5 {
            let r1 = reduce_one_site(&ens, i).unwrap();
            let mut bloch = Matrix2::<C64>::identity() * C64::new(0.5, 0.0);
            for a in Axis::ALL {
                let m = expectation(&ens, &Observable::site(5, a, i)).unwrap();
                assert!(m.im.abs() < 1e-12);
                bloch += crate::two_site::pauli(a as usize + 1) * m;
            }
            assert!((r1 - bloch).norm() < 1e-12);
            for j in (0..5).filter(|&j| j != i) {
                let r2 = reduce_two_site(&ens, i, j).unwrap();
                assert!((r2.reduce_first() - r1).norm() < 1e-12);
                let r2b = reduce_two_site(&ens, j, i).unwrap();
                assert!((r2b.reduce_second() - r1).norm() < 1e-12);
                assert!((r2.rho.trace().re - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn heisenberg_correlators_isotropic() {
        let ens = ensemble(
            &SpinModel::heisenberg(6, 1.0, Boundary::Periodic),
            Temperature::Finite(0.3),
        );
        for j in 1..6 {
            let g: Vec<f64> = Axis::ALL
                .iter()
                .map(|&a| two_point(&ens, a, 0, a, j).unwrap().re)
                .collect();
            assert!((g[0] - g[2]).abs() < 1e-12 && (g[1] - g[2]).abs() < 1e-12);
            let gji = two_point(&ens, Axis::Z, j, Axis::Z, 0).unwrap().re;
            assert!((gji - g[2]).abs() < 1e-14);
        }
        assert!(reduce_two_site(&ens, 0, 3).unwrap().is_parity_symmetric(1e-12));
        let sz = expectation(&ens, &Observable::site(6, Axis::Z, 2)).unwrap();
        assert!(sz.norm() < 1e-12);
    }

    #[test]
    fn identity_expectation_and_dense_agreement() {
        let model = SpinModel::alternating(4, 1.0, 0.5, Boundary::Periodic);
        let ens = ensemble(&model, Temperature::Finite(0.8));
        let id = DMatrix::<C64>::identity(16, 16);
        assert!((expectation_matrix(&ens, &id).unwrap() - ONE).norm() < 1e-12);
        let obs = Observable::collective(4, Axis::Y, std::f64::consts::FRAC_PI_2);
        let a = expectation(&ens, &obs).unwrap();
        let b = expectation_matrix(&ens, &obs.to_matrix()).unwrap();
        assert!((a - b).norm() < 1e-13);
    }

    #[test]
    fn index_errors() {
        let ens = basis_state(3, 0);
        assert!(matches!(reduce_one_site(&ens, 3), Err(Error::SiteOutOfRange { .. })));
        assert!(reduce_two_site(&ens, 1, 1).is_err());
        assert!(two_point(&ens, Axis::X, 0, Axis::X, 4).is_err());
    }
}
