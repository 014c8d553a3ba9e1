//! Exact diagonalization and Boltzmann ensembles.
//!
//! Hamiltonians are block-diagonalized by the symmetry that is diagonal in
//! the computational basis (total `S^z` or its parity). Each block is
//! diagonalized densely. For ground-state work beyond the dense limit a
//! Lanczos solver returns the lowest manifold only; such decompositions are
//! marked incomplete and cannot feed the spectral pipeline.

mod expect;
mod lanczos;

use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Conserved, SpinModel};
use crate::parallel;

pub use expect::{
    expectation, expectation_matrix, magnetization_variance, reduce_one_site, reduce_two_site, two_point,
};
pub use lanczos::LanczosOptions;

/// Relative degeneracy threshold (fraction of the spectral width) used by the
/// zero-temperature sentinel.
pub const DEGENERACY_TOLERANCE: f64 = 1e-10;

/// Temperature in energy units (`k_B = 1`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Temperature {
    /// Ground-state manifold with equal weights.
    Zero,
    Finite(f64),
    /// Uniform weights over the whole spectrum.
    Infinite,
}

impl Temperature {
    pub fn new(t: f64) -> Result<Self> {
        if t.is_nan() || t < 0.0 {
            Err(Error::NegativeTemperature(t))
        } else if t == 0.0 {
            Ok(Temperature::Zero)
        } else if t.is_infinite() {
            Ok(Temperature::Infinite)
        } else {
            Ok(Temperature::Finite(t))
        }
    }

    pub fn beta(self) -> f64 {
        match self {
            Temperature::Zero => f64::INFINITY,
            Temperature::Finite(t) => 1.0 / t,
            Temperature::Infinite => 0.0,
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Temperature::Zero => 0.0,
            Temperature::Finite(t) => t,
            Temperature::Infinite => f64::INFINITY,
        }
    }
}

/// Knobs for [`diagonalize`] and [`ground_states`].
#[derive(Debug, Clone)]
pub struct EngineOptions {
    /// Largest symmetry block diagonalized densely.
    pub max_dense_block: usize,
    /// Reconstruction residual allowed relative to `max|H|`.
    pub residual_tolerance: f64,
    pub lanczos: LanczosOptions,
}

impl Default for EngineOptions {
    fn default() -> Self {
        EngineOptions {
            max_dense_block: 4096,
            residual_tolerance: 1e-9,
            lanczos: LanczosOptions::default(),
        }
    }
}

/// Eigenpairs of one symmetry block. `vectors` has one column per stored
/// level, expressed in the block basis.
#[derive(Debug, Clone)]
pub struct Sector {
    pub label: usize,
    pub basis: Vec<usize>,
    pub energies: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

impl Sector {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    /// Scatters level `idx` into a full-basis vector.
    pub fn scatter(&self, idx: usize, out: &mut [f64]) {
        out.iter_mut().for_each(|x| *x = 0.0);
        for (row, &s) in self.basis.iter().enumerate() {
            out[s] = self.vectors[(row, idx)];
        }
    }
}

/// Position of one level inside an [`Eigendecomposition`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Level {
    pub sector: usize,
    pub index: usize,
    pub energy: f64,
}

#[derive(Debug, Clone)]
pub struct Eigendecomposition {
    pub n_sites: usize,
    pub sectors: Vec<Sector>,
    /// True when every eigenpair of the Hamiltonian is present.
    pub complete: bool,
    /// `E_max - E_min` (estimated when incomplete).
    pub spectral_width: f64,
    pub conserved: Conserved,
}

impl Eigendecomposition {
    pub fn dim(&self) -> usize {
        1usize << self.n_sites
    }

    /// All stored levels, ascending in energy.
    pub fn levels(&self) -> Vec<Level> {
        let mut out: Vec<Level> = self
            .sectors
            .iter()
            .enumerate()
            .flat_map(|(si, s)| {
                s.energies.iter().enumerate().map(move |(index, &energy)| Level {
                    sector: si,
                    index,
                    energy,
                })
            })
            .collect();
        out.sort_by(|a, b| a.energy.total_cmp(&b.energy));
        out
    }

    pub fn energies(&self) -> Vec<f64> {
        self.levels().iter().map(|l| l.energy).collect()
    }

    pub fn ground_energy(&self) -> f64 {
        self.sectors
            .iter()
            .flat_map(|s| s.energies.iter().copied())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn len(&self) -> usize {
        self.sectors.iter().map(Sector::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn state_vector(&self, level: &Level) -> Vec<f64> {
        let mut v = vec![0.0; self.dim()];
        self.sectors[level.sector].scatter(level.index, &mut v);
        v
    }

    /// `max |V^T V - I|` over all sectors.
    pub fn unitarity_error(&self) -> f64 {
        self.sectors
            .iter()
            .map(|s| {
                let g = s.vectors.transpose() * &s.vectors;
                (g - DMatrix::identity(s.len(), s.len())).amax()
            })
            .fold(0.0, f64::max)
    }

    /// Full eigenvector matrix in the computational basis, columns ordered
    /// by ascending energy (small systems only).
    pub fn dense_vectors(&self) -> DMatrix<f64> {
        let levels = self.levels();
        let mut u = DMatrix::zeros(self.dim(), levels.len());
        let mut buf = vec![0.0; self.dim()];
        for (c, l) in levels.iter().enumerate() {
            self.sectors[l.sector].scatter(l.index, &mut buf);
            u.column_mut(c).copy_from_slice(&buf);
        }
        u
    }
}

/// Basis states grouped by conserved label.
pub(crate) fn sector_bases(model: &SpinModel) -> (Conserved, Vec<(usize, Vec<usize>)>) {
    let conserved = model.conserved();
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for s in 0..model.dim() {
        groups.entry(conserved.label(s)).or_default().push(s);
    }
    (conserved, groups.into_iter().collect())
}

fn index_map(dim: usize, basis: &[usize]) -> Vec<u32> {
    let mut map = vec![u32::MAX; dim];
    for (i, &s) in basis.iter().enumerate() {
        map[s] = i as u32;
    }
    map
}

pub(crate) fn block_matrix(model: &SpinModel, basis: &[usize]) -> DMatrix<f64> {
    let map = index_map(model.dim(), basis);
    let bonds = model.bonds();
    let n = basis.len();
    let mut h = DMatrix::<f64>::zeros(n, n);
    for (col, &s) in basis.iter().enumerate() {
        model.for_each_element(&bonds, s, |t, amp| {
            let row = map[t];
            debug_assert!(row != u32::MAX, "Hamiltonian leaves its symmetry block");
            h[(row as usize, col)] += amp;
        });
    }
    h
}

fn diagonalize_block(label: usize, basis: Vec<usize>, h: DMatrix<f64>, tol: f64) -> Result<Sector> {
    let scale = h.amax().max(f64::MIN_POSITIVE);
    let eig = SymmetricEigen::try_new(h.clone(), f64::EPSILON, 100_000)
        .ok_or(Error::NonConvergence { residual: f64::NAN })?;
    let n = basis.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let energies: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);

    // post-condition: H V = V diag(E)
    let hv = &h * &vectors;
    let mut residual: f64 = 0.0;
    for c in 0..n {
        for r in 0..n {
            residual = residual.max((hv[(r, c)] - vectors[(r, c)] * energies[c]).abs());
        }
    }
    if residual > tol * scale {
        return Err(Error::NonConvergence { residual });
    }
    Ok(Sector {
        label,
        basis,
        energies,
        vectors,
    })
}

/// Full spectrum and eigenbasis of `model`.
pub fn diagonalize(model: &SpinModel, opts: &EngineOptions) -> Result<Eigendecomposition> {
    model.validate()?;
    let (conserved, groups) = sector_bases(model);
    if let Some(big) = groups.iter().map(|(_, b)| b.len()).max() {
        if big > opts.max_dense_block {
            return Err(Error::Capacity {
                what: "dense symmetry block",
                requested: big,
                limit: opts.max_dense_block,
            });
        }
    }
    let tol = opts.residual_tolerance;
    let sectors: Vec<Result<Sector>> = parallel::map(&groups, |(label, basis)| {
        let h = block_matrix(model, basis);
        diagonalize_block(*label, basis.clone(), h, tol)
    });
    let sectors = sectors.into_iter().collect::<Result<Vec<_>>>()?;
    let emin = sectors
        .iter()
        .flat_map(|s| s.energies.first())
        .copied()
        .fold(f64::INFINITY, f64::min);
    let emax = sectors
        .iter()
        .flat_map(|s| s.energies.last())
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(Eigendecomposition {
        n_sites: model.n_sites,
        sectors,
        complete: true,
        spectral_width: emax - emin,
        conserved,
    })
}

/// Lowest (possibly degenerate) manifold of `model`.
///
/// When every block is small the full spectrum is computed and kept.
/// Otherwise small blocks are solved densely and large ones by Lanczos, and
/// the result is marked incomplete.
pub fn ground_states(model: &SpinModel, opts: &EngineOptions) -> Result<Eigendecomposition> {
    model.validate()?;
    let (_, groups) = sector_bases(model);
    let fits = groups.iter().all(|(_, b)| b.len() <= opts.lanczos.dense_below);
    if fits {
        return diagonalize(model, opts);
    }
    lanczos::ground_manifold(model, groups, opts)
}

/// Boltzmann ensemble over an eigendecomposition (or an explicit mixture of
/// orthonormal states).
#[derive(Debug, Clone)]
pub struct ThermalEnsemble {
    pub eig: Arc<Eigendecomposition>,
    /// `None` for ensembles that are not Gibbs states.
    pub temperature: Option<Temperature>,
    /// Occupation probability of each stored level, per sector.
    pub probabilities: Vec<Vec<f64>>,
    /// `ln Z` with `Z = sum exp(-E/T)` (meaningful for finite `T` only).
    pub log_partition: f64,
}

/// Gibbs state of `eig` at `temperature`.
///
/// Probabilities are computed relative to the ground energy so that
/// `exp` never overflows.
pub fn thermal_state(eig: Arc<Eigendecomposition>, temperature: Temperature) -> Result<ThermalEnsemble> {
    if let Temperature::Finite(t) = temperature {
        if t.is_nan() || t < 0.0 {
            return Err(Error::NegativeTemperature(t));
        }
    }
    if !eig.complete && temperature != Temperature::Zero {
        return Err(Error::IncompleteSpectrum);
    }
    let e0 = eig.ground_energy();
    let threshold = DEGENERACY_TOLERANCE * eig.spectral_width;
    let weight = |e: f64| -> f64 {
        match temperature {
            Temperature::Zero => {
                if e - e0 <= threshold {
                    1.0
                } else {
                    0.0
                }
            }
            Temperature::Finite(t) => (-(e - e0) / t).exp(),
            Temperature::Infinite => 1.0,
        }
    };
    let mut probabilities: Vec<Vec<f64>> = eig
        .sectors
        .iter()
        .map(|s| s.energies.iter().map(|&e| weight(e)).collect())
        .collect();
    let z_shifted: f64 = probabilities.iter().flatten().sum();
    for p in probabilities.iter_mut().flatten() {
        *p /= z_shifted;
    }
    let log_partition = match temperature {
        Temperature::Finite(t) => -e0 / t + z_shifted.ln(),
        Temperature::Infinite => (eig.len() as f64).ln(),
        Temperature::Zero => f64::NAN,
    };
    Ok(ThermalEnsemble {
        eig,
        temperature: Some(temperature),
        probabilities,
        log_partition,
    })
}

impl ThermalEnsemble {
    pub fn n_sites(&self) -> usize {
        self.eig.n_sites
    }

    pub fn dim(&self) -> usize {
        self.eig.dim()
    }

    pub fn partition_function(&self) -> f64 {
        self.log_partition.exp()
    }

    pub fn probability(&self, level: &Level) -> f64 {
        self.probabilities[level.sector][level.index]
    }

    /// Probabilities in ascending-energy order.
    pub fn sorted_probabilities(&self) -> Vec<f64> {
        self.eig.levels().iter().map(|l| self.probability(l)).collect()
    }

    /// Levels carrying nonzero weight.
    pub fn support(&self) -> Vec<(Level, f64)> {
        self.eig
            .levels()
            .into_iter()
            .map(|l| (l, self.probability(&l)))
            .filter(|(_, p)| *p > 0.0)
            .collect()
    }

    pub fn is_pure(&self) -> bool {
        self.support().len() == 1
    }

    /// Pure state `|psi>` given in the full computational basis.
    pub fn pure(n_sites: usize, state: Vec<f64>) -> Result<Self> {
        Self::mixture(n_sites, vec![(1.0, state)])
    }

    /// Mixture `sum p_l |v_l><v_l|` of mutually orthonormal real vectors.
    pub fn mixture(n_sites: usize, states: Vec<(f64, Vec<f64>)>) -> Result<Self> {
        let dim = 1usize << n_sites;
        let total: f64 = states.iter().map(|(p, _)| *p).sum();
        if (total - 1.0).abs() > 1e-12 || states.iter().any(|(p, _)| *p < 0.0) {
            return Err(Error::InvalidState(format!("weights sum to {total}")));
        }
        let m = states.len();
        let mut vectors = DMatrix::<f64>::zeros(dim, m);
        for (c, (_, v)) in states.iter().enumerate() {
            if v.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: v.len(),
                });
            }
            vectors.column_mut(c).copy_from_slice(v);
        }
        let gram = vectors.transpose() * &vectors;
        if (gram - DMatrix::identity(m, m)).amax() > 1e-10 {
            return Err(Error::InvalidState("mixture vectors are not orthonormal".into()));
        }
        let sector = Sector {
            label: 0,
            basis: (0..dim).collect(),
            energies: vec![0.0; m],
            vectors,
        };
        let eig = Eigendecomposition {
            n_sites,
            sectors: vec![sector],
            complete: false,
            spectral_width: 0.0,
            conserved: Conserved::None,
        };
        Ok(ThermalEnsemble {
            eig: Arc::new(eig),
            temperature: None,
            probabilities: vec![states.iter().map(|(p, _)| *p).collect()],
            log_partition: f64::NAN,
        })
    }

    /// Ensemble from a real symmetric density matrix via its eigenbasis.
    pub fn from_density_matrix(n_sites: usize, rho: &DMatrix<f64>) -> Result<Self> {
        let dim = 1usize << n_sites;
        if rho.nrows() != dim || rho.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: rho.nrows(),
            });
        }
        let eig = SymmetricEigen::new(rho.clone());
        let mut states = Vec::new();
        for (k, &p) in eig.eigenvalues.iter().enumerate() {
            if p < -1e-10 {
                return Err(Error::InvalidState(format!("negative eigenvalue {p}")));
            }
            if p > 1e-14 {
                states.push((p, eig.eigenvectors.column(k).iter().copied().collect::<Vec<_>>()));
            }
        }
        let total: f64 = states.iter().map(|(p, _)| *p).sum();
        for s in &mut states {
            s.0 /= total;
        }
        Self::mixture(n_sites, states)
    }
}
