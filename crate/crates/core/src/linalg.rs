//! Small dense helpers shared across modules: Pauli matrices, Hermitian
//! eigenvalues of 2x2/4x4 blocks, and entropy kernels.

use nalgebra::{Matrix2, Matrix4, SymmetricEigen};
use num_complex::Complex64;

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Logarithm base used when reporting an entropy-like quantity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogBase {
    Bits,
    Nats,
}

impl LogBase {
    pub fn as_str(self) -> &'static str {
        match self {
            LogBase::Bits => "bits",
            LogBase::Nats => "nats",
        }
    }
}

pub fn pauli_x() -> Matrix2<C64> {
    Matrix2::new(ZERO, ONE, ONE, ZERO)
}

pub fn pauli_y() -> Matrix2<C64> {
    Matrix2::new(ZERO, -I, I, ZERO)
}

pub fn pauli_z() -> Matrix2<C64> {
    Matrix2::new(ONE, ZERO, ZERO, -ONE)
}

pub fn kron2(a: &Matrix2<C64>, b: &Matrix2<C64>) -> Matrix4<C64> {
    Matrix4::from_fn(|r, c| a[(r / 2, c / 2)] * b[(r % 2, c % 2)])
}

/// `x log x` with the `0 log 0 = 0` convention. Tiny negative inputs from
/// round-off are treated as zero.
pub fn xlogx(x: f64, base: LogBase) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    match base {
        LogBase::Bits => x * x.log2(),
        LogBase::Nats => x * x.ln(),
    }
}

/// Shannon/von Neumann entropy of a probability vector.
pub fn entropy(probs: &[f64], base: LogBase) -> f64 {
    -probs.iter().map(|&p| xlogx(p, base)).sum::<f64>()
}

/// Binary entropy `h(x) = -x log x - (1-x) log(1-x)`.
pub fn binary_entropy(x: f64, base: LogBase) -> f64 {
    -(xlogx(x, base) + xlogx(1.0 - x, base))
}

/// Eigenvalues (ascending) of a Hermitian 2x2 matrix in closed form.
pub fn hermitian_eigenvalues2(m: &Matrix2<C64>) -> [f64; 2] {
    let a = m[(0, 0)].re;
    let d = m[(1, 1)].re;
    let b = m[(0, 1)];
    let mean = 0.5 * (a + d);
    let half = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
    [mean - half, mean + half]
}

/// Eigenvalues (ascending) of a Hermitian 4x4 matrix.
pub fn hermitian_eigenvalues4(m: &Matrix4<C64>) -> [f64; 4] {
    let eig = SymmetricEigen::new(*m);
    let mut ev = [0.0; 4];
    for (dst, src) in ev.iter_mut().zip(eig.eigenvalues.iter()) {
        *dst = *src;
    }
    ev.sort_by(f64::total_cmp);
    ev
}

/// Principal square root of a Hermitian PSD 4x4 matrix. Eigenvalues at the
/// round-off level (below zero or within a few ulps of the largest) are set
/// to zero.
pub fn psd_sqrt4(m: &Matrix4<C64>) -> Matrix4<C64> {
    let eig = SymmetricEigen::new(*m);
    let floor = 8.0 * f64::EPSILON * eig.eigenvalues.amax();
    let mut out = Matrix4::zeros();
    for k in 0..4 {
        let e = eig.eigenvalues[k];
        if e <= floor {
            continue;
        }
        let s = e.sqrt();
        if s == 0.0 {
            continue;
        }
        let v = eig.eigenvectors.column(k);
        out += (v * v.adjoint()) * C64::new(s, 0.0);
    }
    out
}

pub fn max_abs_diff4(a: &Matrix4<C64>, b: &Matrix4<C64>) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn is_hermitian4(m: &Matrix4<C64>, tol: f64) -> bool {
    max_abs_diff4(m, &m.adjoint()) <= tol
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_log_zero_is_zero() {
        assert_eq!(xlogx(0.0, LogBase::Bits), 0.0);
        assert_eq!(xlogx(-1e-18, LogBase::Nats), 0.0);
        assert!((binary_entropy(0.5, LogBase::Bits) - 1.0).abs() < 1e-15);
        assert_eq!(binary_entropy(1.0, LogBase::Bits), 0.0);
    }

    #[test]
    fn two_by_two_eigenvalues() {
        let m = pauli_x() * C64::new(0.3, 0.0) + pauli_z() * C64::new(0.4, 0.0);
        let ev = hermitian_eigenvalues2(&m);
        assert!((ev[0] + 0.5).abs() < 1e-15);
        assert!((ev[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn sqrt_squares_back() {
        let a = kron2(&pauli_x(), &pauli_y());
        let rho = (Matrix4::identity() + a * C64::new(0.5, 0.0)) * C64::new(0.25, 0.0);
        let s = psd_sqrt4(&rho);
        assert!(max_abs_diff4(&(s * s), &rho) < 1e-14);
    }
}
