//! Spin-1/2 lattice models, their Hamiltonians and spin operators.
//!
//! Basis convention: a computational basis state is an integer whose bit
//! `n_sites - 1 - i` holds site `i` (site 0 is the most significant bit),
//! with bit value 0 meaning spin up. For two sites this gives the standard
//! ordering `{uu, ud, du, dd}`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{C64, I, ONE, ZERO};

/// Largest site count accepted anywhere in the engine.
pub const MAX_SITES: usize = 16;

/// Default cap on the site count for which full dense `2^N x 2^N` matrices
/// are materialized.
pub const DEFAULT_DENSE_SITES: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelKind {
    HeisenbergChain,
    AlternatingChain,
    TransverseFieldXXZ,
    DimerArray,
    CustomCouplings,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Boundary {
    #[default]
    Open,
    Periodic,
}

/// An exchange bond `Jxx SxSx + Jyy SySy + Jzz SzSz` between two sites.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bond {
    pub i: usize,
    pub j: usize,
    pub jxx: f64,
    pub jyy: f64,
    pub jzz: f64,
}

impl Bond {
    pub fn isotropic(i: usize, j: usize, coupling: f64) -> Self {
        Bond {
            i,
            j,
            jxx: coupling,
            jyy: coupling,
            jzz: coupling,
        }
    }
}

/// Declarative description of a spin-1/2 Hamiltonian.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpinModel {
    pub kind: ModelKind,
    pub n_sites: usize,
    #[serde(default = "default_j")]
    pub j: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_x: Option<f64>,
    #[serde(default)]
    pub boundary: Boundary,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub custom_bonds: Option<Vec<Bond>>,
}

fn default_j() -> f64 {
    1.0
}

impl SpinModel {
    fn base(kind: ModelKind, n_sites: usize, j: f64, boundary: Boundary) -> Self {
        SpinModel {
            kind,
            n_sites,
            j,
            alpha: None,
            delta: None,
            h_x: None,
            boundary,
            custom_bonds: None,
        }
    }

    pub fn heisenberg(n_sites: usize, j: f64, boundary: Boundary) -> Self {
        Self::base(ModelKind::HeisenbergChain, n_sites, j, boundary)
    }

    pub fn alternating(n_sites: usize, j: f64, alpha: f64, boundary: Boundary) -> Self {
        SpinModel {
            alpha: Some(alpha),
            ..Self::base(ModelKind::AlternatingChain, n_sites, j, boundary)
        }
    }

    pub fn transverse_xxz(n_sites: usize, j: f64, delta: f64, h_x: f64, boundary: Boundary) -> Self {
        SpinModel {
            delta: Some(delta),
            h_x: Some(h_x),
            ..Self::base(ModelKind::TransverseFieldXXZ, n_sites, j, boundary)
        }
    }

    pub fn dimers(n_sites: usize, j: f64) -> Self {
        Self::base(ModelKind::DimerArray, n_sites, j, Boundary::Open)
    }

    pub fn custom(n_sites: usize, bonds: Vec<Bond>) -> Self {
        SpinModel {
            custom_bonds: Some(bonds),
            ..Self::base(ModelKind::CustomCouplings, n_sites, 0.0, Boundary::Open)
        }
    }

    pub fn dim(&self) -> usize {
        1usize << self.n_sites
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidModel(msg));
        if self.n_sites < 2 {
            return bad(format!("n_sites must be at least 2, got {}", self.n_sites));
        }
        if self.n_sites > MAX_SITES {
            return Err(Error::Capacity {
                what: "sites",
                requested: self.n_sites,
                limit: MAX_SITES,
            });
        }
        let finite = |name: &str, v: Option<f64>| -> Result<()> {
            match v {
                Some(x) if !x.is_finite() => bad(format!("{name} must be finite")),
                _ => Ok(()),
            }
        };
        finite("j", Some(self.j))?;
        finite("alpha", self.alpha)?;
        finite("delta", self.delta)?;
        finite("h_x", self.h_x)?;

        use ModelKind::*;
        let (alpha, delta, field, custom) = match self.kind {
            HeisenbergChain | DimerArray => (false, false, false, false),
            AlternatingChain => (true, false, false, false),
            TransverseFieldXXZ => (false, true, true, false),
            CustomCouplings => (false, false, self.h_x.is_some(), true),
        };
        let check = |name: &str, present: bool, required: bool| -> Result<()> {
            match (present, required) {
                (true, false) => bad(format!("{name} is not used by {:?}", self.kind)),
                (false, true) => bad(format!("{name} is required by {:?}", self.kind)),
                _ => Ok(()),
            }
        };
        check("alpha", self.alpha.is_some(), alpha)?;
        check("delta", self.delta.is_some(), delta)?;
        check("h_x", self.h_x.is_some(), field)?;
        check("custom_bonds", self.custom_bonds.is_some(), custom)?;

        if self.kind == DimerArray && !self.n_sites.is_multiple_of(2) {
            return bad("DimerArray needs an even number of sites".into());
        }
        if let Some(bonds) = &self.custom_bonds {
            for b in bonds {
                if b.i >= self.n_sites || b.j >= self.n_sites {
                    return bad(format!("bond ({}, {}) cites a site >= {}", b.i, b.j, self.n_sites));
                }
                if b.i == b.j {
                    return bad(format!("bond ({}, {}) couples a site to itself", b.i, b.j));
                }
                if ![b.jxx, b.jyy, b.jzz].iter().all(|x| x.is_finite()) {
                    return bad("bond couplings must be finite".into());
                }
            }
        }
        Ok(())
    }

    /// Nearest-neighbour chain bonds `(i, i+1)`, plus the closing bond for
    /// periodic boundaries. A two-site ring gets a single bond.
    fn chain_pairs(&self) -> Vec<(usize, usize)> {
        let n = self.n_sites;
        let mut pairs: Vec<(usize, usize)> = (0..n - 1).map(|i| (i, i + 1)).collect();
        if self.boundary == Boundary::Periodic && n > 2 {
            pairs.push((n - 1, 0));
        }
        pairs
    }

    /// All exchange bonds of the model.
    pub fn bonds(&self) -> Vec<Bond> {
        let j = self.j;
        match self.kind {
            ModelKind::HeisenbergChain => self
                .chain_pairs()
                .into_iter()
                .map(|(a, b)| Bond::isotropic(a, b, j))
                .collect(),
            ModelKind::AlternatingChain => {
                let alpha = self.alpha.unwrap_or(1.0);
                self.chain_pairs()
                    .into_iter()
                    .map(|(a, b)| {
                        // even-odd bonds carry J, odd-even bonds carry alpha*J
                        let strong = a % 2 == 0;
                        Bond::isotropic(a, b, if strong { j } else { alpha * j })
                    })
                    .collect()
            }
            ModelKind::TransverseFieldXXZ => {
                let delta = self.delta.unwrap_or(1.0);
                self.chain_pairs()
                    .into_iter()
                    .map(|(a, b)| Bond {
                        i: a,
                        j: b,
                        jxx: j,
                        jyy: j,
                        jzz: delta * j,
                    })
                    .collect()
            }
            ModelKind::DimerArray => (0..self.n_sites / 2)
                .map(|d| Bond::isotropic(2 * d, 2 * d + 1, j))
                .collect(),
            ModelKind::CustomCouplings => self.custom_bonds.clone().unwrap_or_default(),
        }
    }

    /// Uniform transverse field `h_x` coupling to every `S^x_i`.
    pub fn field_x(&self) -> f64 {
        self.h_x.unwrap_or(0.0)
    }

    /// Allowed wavevectors `2 pi n / N`, `n = 0..N`.
    pub fn k_grid(&self) -> Vec<f64> {
        k_grid(self.n_sites)
    }

    /// The symmetry used to block-diagonalize the Hamiltonian in the
    /// computational basis.
    pub fn conserved(&self) -> Conserved {
        let bonds = self.bonds();
        if self.field_x() != 0.0 {
            return Conserved::None;
        }
        if bonds.iter().all(|b| b.jxx == b.jyy) {
            Conserved::Magnetization
        } else {
            Conserved::ZParity
        }
    }

    /// Hamiltonian action on one basis state: calls `emit(target, amplitude)`
    /// for every nonzero matrix element `<target|H|state>`.
    pub fn for_each_element(&self, bonds: &[Bond], state: usize, mut emit: impl FnMut(usize, f64)) {
        let n = self.n_sites;
        let mut diag = 0.0;
        for b in bonds {
            let bi = bit(state, b.i, n);
            let bj = bit(state, b.j, n);
            let parallel = bi == bj;
            diag += 0.25 * b.jzz * if parallel { 1.0 } else { -1.0 };
            let flip = if parallel {
                0.25 * (b.jxx - b.jyy)
            } else {
                0.25 * (b.jxx + b.jyy)
            };
            if flip != 0.0 {
                emit(state ^ site_mask(b.i, n) ^ site_mask(b.j, n), flip);
            }
        }
        if diag != 0.0 {
            emit(state, diag);
        }
        let h = self.field_x();
        if h != 0.0 {
            for site in 0..n {
                emit(state ^ site_mask(site, n), 0.5 * h);
            }
        }
    }
}

/// Symmetry of the Hamiltonian that is diagonal in the computational basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Conserved {
    /// Total `S^z` commutes with `H`.
    Magnetization,
    /// Only the parity of the number of down spins is conserved.
    ZParity,
    None,
}

impl Conserved {
    pub fn label(self, state: usize) -> usize {
        match self {
            Conserved::Magnetization => state.count_ones() as usize,
            Conserved::ZParity => (state.count_ones() % 2) as usize,
            Conserved::None => 0,
        }
    }
}

pub fn k_grid(n_sites: usize) -> Vec<f64> {
    (0..n_sites).map(|m| 2.0 * PI * m as f64 / n_sites as f64).collect()
}

#[inline]
pub fn site_mask(site: usize, n_sites: usize) -> usize {
    1usize << (n_sites - 1 - site)
}

/// Bit of `site` in `state`: 0 = up, 1 = down.
#[inline]
pub fn bit(state: usize, site: usize, n_sites: usize) -> usize {
    (state >> (n_sites - 1 - site)) & 1
}

/// Dense Hamiltonian in the full `2^N` basis.
///
/// Fails with a capacity error when `N` exceeds `max_sites`; the matrix is
/// never truncated.
pub fn build_hamiltonian(model: &SpinModel, max_sites: usize) -> Result<DMatrix<f64>> {
    model.validate()?;
    if model.n_sites > max_sites {
        return Err(Error::Capacity {
            what: "dense Hamiltonian sites",
            requested: model.n_sites,
            limit: max_sites,
        });
    }
    let dim = model.dim();
    let bonds = model.bonds();
    let mut h = DMatrix::<f64>::zeros(dim, dim);
    for s in 0..dim {
        model.for_each_element(&bonds, s, |t, amp| h[(t, s)] += amp);
    }
    Ok(h)
}

// ---------------------------------------------------------------------------
// Operators
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Axis {
    #[serde(alias = "Sx", alias = "sx")]
    X,
    #[serde(alias = "Sy", alias = "sy")]
    Y,
    #[serde(alias = "Sz", alias = "sz")]
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn as_str(self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        }
    }

    /// Dense 2x2 spin-1/2 matrix.
    pub fn spin_matrix(self) -> nalgebra::Matrix2<C64> {
        let h = C64::new(0.5, 0.0);
        match self {
            Axis::X => nalgebra::Matrix2::new(ZERO, h, h, ZERO),
            Axis::Y => nalgebra::Matrix2::new(ZERO, -I * 0.5, I * 0.5, ZERO),
            Axis::Z => nalgebra::Matrix2::new(h, ZERO, ZERO, -h),
        }
    }

    /// Phase relating the spin operator to its real skeleton:
    /// `S^x = X`, `S^y = i Y~`, `S^z = Z` with real `X`, `Y~`, `Z`.
    fn skeleton_phase(self) -> C64 {
        match self {
            Axis::Y => I,
            _ => ONE,
        }
    }
}

/// One-site or collective spin operator request.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SiteOperatorSpec {
    /// `S^axis_site`.
    Site { axis: Axis, site: usize },
    /// `S^axis_k = N^{-1/2} sum_i e^{i k i} S^axis_i`.
    Collective { axis: Axis, k: f64 },
}

/// Real-valued skeleton term `coeff * R^axis_site` where `R^x = S^x`,
/// `R^y = -i S^y` and `R^z = S^z` are real matrices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkeletonTerm {
    pub site: usize,
    pub axis: Axis,
    pub coeff: f64,
}

/// A Hermitian piece `factor * sum(terms)` of an observable, with `factor`
/// one of `1, i, -1, -i`. All terms in a part share the symmetry of their
/// skeleton (real symmetric for x/z, real antisymmetric for y).
#[derive(Debug, Clone, PartialEq)]
pub struct Part {
    pub factor: C64,
    pub terms: Vec<SkeletonTerm>,
}

/// Sum of one-site spin operators, decomposed as `O = A + iB` with `A`, `B`
/// Hermitian. Hermitian observables have a single part.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    pub n_sites: usize,
    pub parts: Vec<Part>,
    pub label: String,
}

impl Observable {
    /// `sum_i coeffs[i] * S^axis_i` with complex coefficients.
    pub fn from_coefficients(n_sites: usize, axis: Axis, coeffs: &[C64], label: impl Into<String>) -> Self {
        let phase = axis.skeleton_phase();
        // S = phase * R; coefficient c = a + ib gives
        // O = phase * (sum a R) + i * phase * (sum b R)
        let re: Vec<SkeletonTerm> = coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| c.re.abs() > 1e-15)
            .map(|(site, c)| SkeletonTerm {
                site,
                axis,
                coeff: c.re,
            })
            .collect();
        let im: Vec<SkeletonTerm> = coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| c.im.abs() > 1e-15)
            .map(|(site, c)| SkeletonTerm {
                site,
                axis,
                coeff: c.im,
            })
            .collect();
        let mut parts = Vec::new();
        if !re.is_empty() {
            parts.push(Part {
                factor: phase,
                terms: re,
            });
        }
        if !im.is_empty() {
            parts.push(Part {
                factor: phase * I,
                terms: im,
            });
        }
        Observable {
            n_sites,
            parts,
            label: label.into(),
        }
    }

    pub fn site(n_sites: usize, axis: Axis, site: usize) -> Self {
        let mut c = vec![ZERO; n_sites];
        c[site] = ONE;
        Self::from_coefficients(n_sites, axis, &c, format!("S{}_{}", axis.as_str(), site))
    }

    /// `M^axis_tot = sum_i S^axis_i`.
    pub fn total(n_sites: usize, axis: Axis) -> Self {
        Self::from_coefficients(n_sites, axis, &vec![ONE; n_sites], format!("M{}", axis.as_str()))
    }

    /// Normalized collective operator `S^axis_k`.
    pub fn collective(n_sites: usize, axis: Axis, k: f64) -> Self {
        let norm = 1.0 / (n_sites as f64).sqrt();
        let coeffs: Vec<C64> = (0..n_sites)
            .map(|r| C64::from_polar(norm, k * r as f64))
            .map(|c| C64::new(snap(c.re), snap(c.im)))
            .collect();
        Self::from_coefficients(n_sites, axis, &coeffs, format!("S{}(k={:.6})", axis.as_str(), k))
    }

    pub fn scaled(mut self, factor: f64) -> Self {
        for p in &mut self.parts {
            for t in &mut p.terms {
                t.coeff *= factor;
            }
        }
        self
    }

    pub fn is_hermitian(&self) -> bool {
        self.parts.len() <= 1
    }

    pub fn dim(&self) -> usize {
        1usize << self.n_sites
    }

    /// Dense matrix of the observable (small systems only).
    pub fn to_matrix(&self) -> DMatrix<C64> {
        let dim = self.dim();
        let mut m = DMatrix::<C64>::zeros(dim, dim);
        let mut out = vec![0.0; dim];
        let mut input = vec![0.0; dim];
        for part in &self.parts {
            for s in 0..dim {
                input.iter_mut().for_each(|x| *x = 0.0);
                input[s] = 1.0;
                out.iter_mut().for_each(|x| *x = 0.0);
                apply_terms(&part.terms, self.n_sites, &input, &mut out);
                for (t, &v) in out.iter().enumerate() {
                    if v != 0.0 {
                        m[(t, s)] += part.factor * v;
                    }
                }
            }
        }
        m
    }
}

/// Rounds values within 1e-15 of 0, +-1 or +-N^{-1/2} multiples to exact zero
/// so that e.g. `sin(pi)` does not leave a spurious imaginary part.
fn snap(x: f64) -> f64 {
    if x.abs() < 1e-14 {
        0.0
    } else {
        x
    }
}

/// Adds `sum_terms coeff * R^axis_site |input>` to `out`. Both vectors live
/// in the full `2^N` basis.
pub fn apply_terms(terms: &[SkeletonTerm], n_sites: usize, input: &[f64], out: &mut [f64]) {
    for t in terms {
        let mask = site_mask(t.site, n_sites);
        let c = 0.5 * t.coeff;
        match t.axis {
            Axis::Z => {
                for (s, &v) in input.iter().enumerate() {
                    if v != 0.0 {
                        out[s] += if s & mask == 0 { c * v } else { -c * v };
                    }
                }
            }
            Axis::X => {
                for (s, &v) in input.iter().enumerate() {
                    if v != 0.0 {
                        out[s ^ mask] += c * v;
                    }
                }
            }
            Axis::Y => {
                // Y~ |up> = +1/2 |down>, Y~ |down> = -1/2 |up>
                for (s, &v) in input.iter().enumerate() {
                    if v != 0.0 {
                        out[s ^ mask] += if s & mask == 0 { c * v } else { -c * v };
                    }
                }
            }
        }
    }
}

/// Result of [`build_operator`]: the dense matrix and whether it is
/// Hermitian (collective operators at `k != 0, pi` are not).
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    pub matrix: DMatrix<C64>,
    pub hermitian: bool,
}

impl SiteOperatorSpec {
    pub fn observable(&self, n_sites: usize, boundary: Boundary) -> Result<Observable> {
        match *self {
            SiteOperatorSpec::Site { axis, site } => {
                if site >= n_sites {
                    return Err(Error::SiteOutOfRange { index: site, n_sites });
                }
                Ok(Observable::site(n_sites, axis, site))
            }
            SiteOperatorSpec::Collective { axis, k } => {
                if !k.is_finite() {
                    return Err(Error::InvalidOperator(format!("wavevector {k} is not finite")));
                }
                if boundary == Boundary::Periodic && !on_k_grid(k, n_sites) {
                    return Err(Error::InvalidOperator(format!(
                        "k = {k} is not of the form 2 pi n / {n_sites}"
                    )));
                }
                Ok(Observable::collective(n_sites, axis, k))
            }
        }
    }
}

pub fn on_k_grid(k: f64, n_sites: usize) -> bool {
    let n = k * n_sites as f64 / (2.0 * PI);
    (n - n.round()).abs() < 1e-9
}

/// Dense operator for a single-site or collective spin component.
pub fn build_operator(spec: &SiteOperatorSpec, n_sites: usize, boundary: Boundary) -> Result<OperatorMatrix> {
    if n_sites == 0 || n_sites > DEFAULT_DENSE_SITES {
        return Err(Error::Capacity {
            what: "dense operator sites",
            requested: n_sites,
            limit: DEFAULT_DENSE_SITES,
        });
    }
    let obs = spec.observable(n_sites, boundary)?;
    Ok(OperatorMatrix {
        hermitian: obs.is_hermitian(),
        matrix: obs.to_matrix(),
    })
}
