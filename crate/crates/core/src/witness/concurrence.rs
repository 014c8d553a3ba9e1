//! Two-site concurrence and entanglement of formation.

use nalgebra::Matrix4;

use super::clamp_range;
use crate::error::{Error, Result};
use crate::linalg::{binary_entropy, kron2, pauli_y, psd_sqrt4, LogBase, C64};
use crate::two_site::{Correlators, TwoSiteState};

const PSD_SLACK: f64 = 1e-12;

/// Wootters concurrence `max{0, 2 l_max - Tr R}` with `R` the square root
/// of `rho rho~`.
///
/// The eigenvalues of `R` are the singular values of
/// `sqrt(rho) sqrt(rho~)`, which avoids the square-root amplification of
/// round-off near zero eigenvalues of `rho rho~`.
pub fn concurrence_wootters(state: &TwoSiteState) -> Result<f64> {
    let yy = kron2(&pauli_y(), &pauli_y());
    let s = psd_sqrt4(&state.rho);
    let s_tilde: Matrix4<C64> = yy * s.conjugate() * yy;
    let sv = (s * s_tilde).singular_values();
    let mut l: Vec<f64> = sv.iter().copied().collect();
    l.sort_by(f64::total_cmp);
    if l.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidState("non-finite singular value".into()));
    }
    let c = l[3] - l[2] - l[1] - l[0];
    clamp_range(c.max(0.0), 0.0, 1.0, "concurrence")
}

/// `C = 2 max{0, |c| - sqrt(xy), |z| - sqrt(ab)}` for a parity-symmetric
/// state.
pub fn concurrence_parity(a: f64, b: f64, x: f64, y: f64, c: C64, z: C64) -> Result<f64> {
    for (name, v) in [("a", a), ("b", b), ("x", x), ("y", y)] {
        if !(v >= -PSD_SLACK) {
            return Err(Error::InvalidState(format!("{name} = {v} is negative")));
        }
    }
    let sab = (a.max(0.0) * b.max(0.0)).sqrt();
    let sxy = (x.max(0.0) * y.max(0.0)).sqrt();
    if c.norm() > sab + PSD_SLACK {
        return Err(Error::InvalidState(format!(
            "|c| = {} exceeds sqrt(ab) = {sab}",
            c.norm()
        )));
    }
    if z.norm() > sxy + PSD_SLACK {
        return Err(Error::InvalidState(format!(
            "|z| = {} exceeds sqrt(xy) = {sxy}",
            z.norm()
        )));
    }
    let v = 2.0 * (c.norm() - sxy).max(z.norm() - sab).max(0.0);
    clamp_range(v, 0.0, 1.0, "concurrence")
}

/// Parity-symmetric formula applied to a full state; inapplicable when
/// the state has weight outside the X pattern.
pub fn concurrence_parity_state(state: &TwoSiteState) -> Result<f64> {
    if !state.is_parity_symmetric(1e-10) {
        return Err(Error::Inapplicable(format!(
            "state breaks parity symmetry (off-pattern weight {:e})",
            state.parity_violation()
        )));
    }
    concurrence_parity(state.a(), state.b(), state.x(), state.y(), state.c(), state.z())
}

/// General parity-symmetric case written with spin correlators.
pub fn concurrence_general_parity(g: &Correlators) -> Result<f64> {
    let m = 0.5 * (g.sz_i + g.sz_j);
    let d = 0.5 * (g.sz_i - g.sz_j);
    let first = ((g.gxx - g.gyy).powi(2) + (g.gxy + g.gyx).powi(2)).sqrt() - radicand((0.25 - g.gzz).powi(2) - d * d)?;
    let second = ((g.gxx + g.gyy).powi(2) + (g.gxy - g.gyx).powi(2)).sqrt() - radicand((0.25 + g.gzz).powi(2) - m * m)?;
    clamp_range(2.0 * first.max(second).max(0.0), 0.0, 1.0, "concurrence")
}

/// Translation-invariant chain with a real Hamiltonian.
pub fn concurrence_translation_real(gxx: f64, gyy: f64, gzz: f64, mz: f64) -> Result<f64> {
    let first = (gxx - gyy).abs() - 0.25 + gzz;
    let second = (gxx + gyy).abs() - radicand((0.25 + gzz).powi(2) - mz * mz)?;
    clamp_range(2.0 * first.max(second).max(0.0), 0.0, 1.0, "concurrence")
}

/// Isotropic Heisenberg model with uniform magnetization `mz`.
pub fn concurrence_heisenberg(gzz: f64, mz: f64) -> Result<f64> {
    let v = 2.0 * gzz.abs() - radicand((0.25 + gzz).powi(2) - mz * mz)?;
    clamp_range(2.0 * v.max(0.0), 0.0, 1.0, "concurrence")
}

/// Isotropic Heisenberg model without magnetic order.
pub fn concurrence_disorder_free(gzz: f64) -> Result<f64> {
    let v = 2.0 * gzz.abs() - 0.25 - gzz;
    clamp_range(2.0 * v.max(0.0), 0.0, 1.0, "concurrence")
}

/// Heisenberg dimer from the intradimer correlation `<S_0 . S_1>`.
pub fn concurrence_dimer(s_dot_s: f64) -> Result<f64> {
    if !(-0.75 - PSD_SLACK..=0.25 + PSD_SLACK).contains(&s_dot_s) {
        return Err(Error::Domain(format!("<S.S> = {s_dot_s} outside [-3/4, 1/4]")));
    }
    clamp_range(2.0 * (-s_dot_s - 0.25).max(0.0), 0.0, 1.0, "concurrence")
}

fn radicand(v: f64) -> Result<f64> {
    if v < -PSD_SLACK {
        return Err(Error::InvalidState(format!("negative radicand {v}")));
    }
    Ok(v.max(0.0).sqrt())
}

/// `E_form = h((1 + sqrt(1 - C^2)) / 2)` in bits.
pub fn entanglement_of_formation(c: f64) -> Result<f64> {
    let c = clamp_range(c, 0.0, 1.0, "concurrence")?;
    Ok(binary_entropy(0.5 * (1.0 + (1.0 - c * c).sqrt()), LogBase::Bits))
}
