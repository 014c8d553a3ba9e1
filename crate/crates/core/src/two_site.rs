//! Two-site reduced density matrices in the standard basis
//! `{uu, ud, du, dd}`.

use nalgebra::{Matrix2, Matrix4};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues4, is_hermitian4, C64, ZERO};

pub const TRACE_TOLERANCE: f64 = 1e-12;
pub const PSD_TOLERANCE: f64 = 1e-12;

/// Validated 4x4 density matrix of a pair of spins.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoSiteState {
    pub rho: Matrix4<C64>,
    pub sites: Option<(usize, usize)>,
}

/// Two-site correlators that fix a parity-symmetric RDM.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Correlators {
    /// `<S^z_i>`, `<S^z_j>`.
    pub sz_i: f64,
    pub sz_j: f64,
    pub gxx: f64,
    pub gyy: f64,
    pub gzz: f64,
    pub gxy: f64,
    pub gyx: f64,
}

impl TwoSiteState {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(rho: Matrix4<C64>) -> Result<Self> {
        if rho.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidState("non-finite entry".into()));
        }
        if !is_hermitian4(&rho, 1e-10) {
            return Err(Error::InvalidState("not Hermitian".into()));
        }
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > TRACE_TOLERANCE || tr.im.abs() > TRACE_TOLERANCE {
            return Err(Error::InvalidState(format!("trace {tr}")));
        }
        let rho = (rho + rho.adjoint()) * C64::new(0.5, 0.0);
        let ev = hermitian_eigenvalues4(&rho);
        if ev[0] < -PSD_TOLERANCE {
            return Err(Error::InvalidState(format!("negative eigenvalue {:e}", ev[0])));
        }
        Ok(TwoSiteState { rho, sites: None })
    }

    pub fn from_real(rho: Matrix4<f64>) -> Result<Self> {
        Self::new(rho.map(|x| C64::new(x, 0.0)))
    }

    pub fn with_sites(mut self, i: usize, j: usize) -> Self {
        self.sites = Some((i, j));
        self
    }

    /// Parity-symmetric ("X") state from its six parameters.
    pub fn parity(a: f64, b: f64, x: f64, y: f64, c: C64, z: C64) -> Result<Self> {
        let r = |v: f64| C64::new(v, 0.0);
        let rho = Matrix4::new(
            r(a),
            ZERO,
            ZERO,
            c,
            ZERO,
            r(x),
            z,
            ZERO,
            ZERO,
            z.conj(),
            r(y),
            ZERO,
            c.conj(),
            ZERO,
            ZERO,
            r(b),
        );
        Self::new(rho)
    }

    /// Parity-symmetric state assembled from spin correlators.
    pub fn from_correlators(g: &Correlators) -> Result<Self> {
        let m = 0.5 * (g.sz_i + g.sz_j);
        let d = 0.5 * (g.sz_i - g.sz_j);
        let a = 0.25 + m + g.gzz;
        let b = 0.25 - m + g.gzz;
        let x = 0.25 + d - g.gzz;
        let y = 0.25 - d - g.gzz;
        let c = C64::new(g.gxx - g.gyy, -(g.gxy + g.gyx));
        let z = C64::new(g.gxx + g.gyy, g.gxy - g.gyx);
        Self::parity(a, b, x, y, c, z)
    }

    pub fn a(&self) -> f64 {
        self.rho[(0, 0)].re
    }
    pub fn b(&self) -> f64 {
        self.rho[(3, 3)].re
    }
    pub fn x(&self) -> f64 {
        self.rho[(1, 1)].re
    }
    pub fn y(&self) -> f64 {
        self.rho[(2, 2)].re
    }
    pub fn c(&self) -> C64 {
        self.rho[(0, 3)]
    }
    pub fn z(&self) -> C64 {
        self.rho[(1, 2)]
    }

    /// `c_1 .. c_5` of the Pauli expansion
    /// `rho = 1/4 [I + sum c_i s^i s^i + c_4 I s^3 + c_5 s^3 I]`.
    /// Uses the real parts of `c` and `z`.
    pub fn coefficients(&self) -> [f64; 5] {
        let (a, b, x, y) = (self.a(), self.b(), self.x(), self.y());
        let (c, z) = (self.c().re, self.z().re);
        [
            2.0 * z + 2.0 * c,
            2.0 * z - 2.0 * c,
            a + b - x - y,
            a - b - x + y,
            a - b + x - y,
        ]
    }

    /// Largest magnitude of an entry outside the parity-symmetric pattern.
    pub fn parity_violation(&self) -> f64 {
        const OFF: [(usize, usize); 8] = [(0, 1), (0, 2), (1, 3), (2, 3), (1, 0), (2, 0), (3, 1), (3, 2)];
        OFF.iter().map(|&(r, c)| self.rho[(r, c)].norm()).fold(0.0, f64::max)
    }

    pub fn is_parity_symmetric(&self, tol: f64) -> bool {
        self.parity_violation() <= tol
    }

    /// Largest imaginary part of any entry.
    pub fn imaginary_part(&self) -> f64 {
        self.rho.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }

    pub fn eigenvalues(&self) -> [f64; 4] {
        hermitian_eigenvalues4(&self.rho)
    }

    /// State of the first site.
    pub fn reduce_first(&self) -> Matrix2<C64> {
        let r = &self.rho;
        Matrix2::new(
            r[(0, 0)] + r[(1, 1)],
            r[(0, 2)] + r[(1, 3)],
            r[(2, 0)] + r[(3, 1)],
            r[(2, 2)] + r[(3, 3)],
        )
    }

    /// State of the second site.
    pub fn reduce_second(&self) -> Matrix2<C64> {
        let r = &self.rho;
        Matrix2::new(
            r[(0, 0)] + r[(2, 2)],
            r[(0, 1)] + r[(2, 3)],
            r[(1, 0)] + r[(3, 2)],
            r[(1, 1)] + r[(3, 3)],
        )
    }

    /// `<sigma^mu (x) sigma^nu>` for Pauli indices `0..4` (0 = identity).
    pub fn pauli_expectation(&self, mu: usize, nu: usize) -> C64 {
        let op = crate::linalg::kron2(&pauli(mu), &pauli(nu));
        (self.rho * op).trace()
    }

    /// Maximally mixed state `I/4`.
    pub fn maximally_mixed() -> Self {
        TwoSiteState {
            rho: Matrix4::identity() * C64::new(0.25, 0.0),
            sites: None,
        }
    }

    /// Projector onto a normalized pure state.
    pub fn pure(psi: [C64; 4]) -> Result<Self> {
        let v = nalgebra::Vector4::from(psi);
        Self::new(v * v.adjoint())
    }

    /// Two-site singlet `(ud - du)/sqrt 2`.
    pub fn singlet() -> Self {
        let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self::pure([ZERO, h, -h, ZERO]).expect("singlet is a valid state")
    }
}

pub(crate) fn pauli(mu: usize) -> Matrix2<C64> {
    match mu {
        0 => Matrix2::identity(),
        1 => crate::linalg::pauli_x(),
        2 => crate::linalg::pauli_y(),
        3 => crate::linalg::pauli_z(),
        _ => panic!("Pauli index {mu} out of range"),
    }
}
