//! Lanczos solver for the lowest manifold of large symmetry blocks.
//!
//! Full reorthogonalization is used throughout; the Krylov spaces stay
//! small (a few hundred vectors) so the cost is dominated by sparse
//! matrix-vector products. Degenerate ground states are found one at a time
//! by deflating against the states already converged.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{block_matrix, diagonalize_block, Eigendecomposition, EngineOptions, Sector, DEGENERACY_TOLERANCE};
use crate::error::{Error, Result};
use crate::model::SpinModel;
use crate::parallel;

#[derive(Debug, Clone)]
pub struct LanczosOptions {
    /// Blocks up to this size are diagonalized densely instead.
    pub dense_below: usize,
    pub max_krylov: usize,
    pub max_restarts: usize,
    /// Residual `||Hx - Ex||` relative to the Gershgorin bound of `H`.
    pub tolerance: f64,
    /// Safety cap on the size of the ground manifold.
    pub max_degeneracy: usize,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        LanczosOptions {
            dense_below: 256,
            max_krylov: 160,
            max_restarts: 40,
            tolerance: 1e-11,
            max_degeneracy: 64,
        }
    }
}

/// Compressed sparse rows of one Hamiltonian block.
struct Csr {
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
}

impl Csr {
    fn build(model: &SpinModel, basis: &[usize]) -> Self {
        let mut map = vec![u32::MAX; model.dim()];
        for (i, &s) in basis.iter().enumerate() {
            map[s] = i as u32;
        }
        let bonds = model.bonds();
        let mut row_ptr = Vec::with_capacity(basis.len() + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        // H is symmetric, so column action of a state gives its row
        for &s in basis {
            model.for_each_element(&bonds, s, |t, amp| {
                cols.push(map[t]);
                vals.push(amp);
            });
            row_ptr.push(cols.len());
        }
        Csr { row_ptr, cols, vals }
    }

    fn dim(&self) -> usize {
        self.row_ptr.len() - 1
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (r, yr) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.cols[k] as usize];
            }
            *yr = acc;
        }
    }

    fn gershgorin(&self) -> f64 {
        (0..self.dim())
            .map(|r| {
                self.vals[self.row_ptr[r]..self.row_ptr[r + 1]]
                    .iter()
                    .map(|v| v.abs())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn normalize(v: &mut [f64]) -> f64 {
    let n = dot(v, v).sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

fn project_out(v: &mut [f64], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        for q in basis {
            let c = dot(q, v);
            axpy(-c, q, v);
        }
    }
}

struct Ritz {
    value: f64,
    vector: Vec<f64>,
    top: f64,
}

/// Lowest eigenpair of `h` in the orthogonal complement of `deflate`.
/// Returns `None` when the complement is empty.
fn lowest(h: &Csr, deflate: &[Vec<f64>], opts: &LanczosOptions) -> Result<Option<Ritz>> {
    let n = h.dim();
    if deflate.len() >= n {
        return Ok(None);
    }
    let scale = h.gershgorin().max(f64::MIN_POSITIVE);
    let tol = opts.tolerance * scale;

    // a fresh vector per deflation round: reusing one start vector leaves
    // it with no overlap on the rest of a degenerate manifold
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed ^ deflate.len() as u64);
    let mut start: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    project_out(&mut start, deflate);
    if normalize(&mut start) < 1e-8 {
        // start vector lies in the deflated space; fall back to unit vectors
        let mut found = false;
        for e in 0..n {
            start.iter_mut().for_each(|x| *x = 0.0);
            start[e] = 1.0;
            project_out(&mut start, deflate);
            if normalize(&mut start) > 1e-3 {
                found = true;
                break;
            }
        }
        if !found {
            return Ok(None);
        }
    }

    let m_max = opts.max_krylov.min(n - deflate.len()).max(1);
    let mut best_residual = f64::INFINITY;
    let mut w = vec![0.0; n];
    for _ in 0..opts.max_restarts {
        let mut q: Vec<Vec<f64>> = vec![start.clone()];
        let mut alphas: Vec<f64> = Vec::new();
        let mut betas: Vec<f64> = Vec::new();
        for j in 0..m_max {
            h.apply(&q[j], &mut w);
            let alpha = dot(&q[j], &w);
            alphas.push(alpha);
            project_out(&mut w, &q);
            project_out(&mut w, deflate);
            let beta = dot(&w, &w).sqrt();
            let last = j + 1 == m_max;
            let breakdown = beta <= 1e-13 * scale;
            if last || breakdown || j % 8 == 7 {
                let m = alphas.len();
                let t = DMatrix::from_fn(m, m, |r, c| {
                    if r == c {
                        alphas[r]
                    } else if r + 1 == c {
                        betas[r]
                    } else if c + 1 == r {
                        betas[c]
                    } else {
                        0.0
                    }
                });
                let eig = SymmetricEigen::new(t);
                let (imin, _) = eig
                    .eigenvalues
                    .iter()
                    .enumerate()
                    .min_by(|a, b| a.1.total_cmp(b.1))
                    .expect("nonempty tridiagonal");
                let top = eig.eigenvalues.max();
                let y = eig.eigenvectors.column(imin);
                let estimate = beta * y[m - 1].abs();
                if estimate <= tol || breakdown || last {
                    let mut x = vec![0.0; n];
                    for (qi, &yi) in q.iter().zip(y.iter()) {
                        axpy(yi, qi, &mut x);
                    }
                    project_out(&mut x, deflate);
                    normalize(&mut x);
                    let mut hx = vec![0.0; n];
                    h.apply(&x, &mut hx);
                    let value = dot(&x, &hx);
                    axpy(-value, &x, &mut hx);
                    let residual = dot(&hx, &hx).sqrt();
                    best_residual = best_residual.min(residual);
                    if residual <= tol * 10.0 {
                        return Ok(Some(Ritz { value, vector: x, top }));
                    }
                    // thick start: continue from the current Ritz vector
                    start = x;
                    break;
                }
            }
            betas.push(beta);
            let mut next = w.clone();
            next.iter_mut().for_each(|x| *x /= beta);
            q.push(next);
        }
    }
    Err(Error::NonConvergence {
        residual: best_residual,
    })
}

/// Ground manifold of `model` over the given symmetry blocks.
pub(super) fn ground_manifold(
    model: &SpinModel,
    groups: Vec<(usize, Vec<usize>)>,
    opts: &EngineOptions,
) -> Result<Eigendecomposition> {
    let lz = &opts.lanczos;
    let conserved = model.conserved();

    enum Block {
        Dense(Sector),
        Sparse {
            label: usize,
            basis: Vec<usize>,
            h: Csr,
            first: Ritz,
        },
    }

    let blocks: Vec<Result<Block>> = parallel::map(&groups, |(label, basis)| {
        if basis.len() <= lz.dense_below {
            let h = block_matrix(model, basis);
            Ok(Block::Dense(diagonalize_block(
                *label,
                basis.clone(),
                h,
                opts.residual_tolerance,
            )?))
        } else {
            let h = Csr::build(model, basis);
            let first = lowest(&h, &[], lz)?.expect("nonempty block");
            Ok(Block::Sparse {
                label: *label,
                basis: basis.clone(),
                h,
                first,
            })
        }
    });
    let blocks = blocks.into_iter().collect::<Result<Vec<_>>>()?;

    let mut e0 = f64::INFINITY;
    let mut top = f64::NEG_INFINITY;
    for b in &blocks {
        match b {
            Block::Dense(s) => {
                e0 = e0.min(s.energies[0]);
                top = top.max(*s.energies.last().expect("nonempty"));
            }
            Block::Sparse { first, .. } => {
                e0 = e0.min(first.value);
                top = top.max(first.top);
            }
        }
    }
    let width = top - e0;
    let threshold = DEGENERACY_TOLERANCE * width;

    let mut sectors = Vec::new();
    for b in blocks {
        match b {
            Block::Dense(s) => {
                let keep = s.energies.iter().take_while(|&&e| e - e0 <= threshold).count();
                if keep > 0 {
                    sectors.push(Sector {
                        label: s.label,
                        energies: s.energies[..keep].to_vec(),
                        vectors: s.vectors.columns(0, keep).into_owned(),
                        basis: s.basis,
                    });
                }
            }
            Block::Sparse { label, basis, h, first } => {
                if first.value - e0 > threshold {
                    continue;
                }
                let mut energies = vec![first.value];
                let mut found = vec![first.vector];
                while found.len() < lz.max_degeneracy {
                    match lowest(&h, &found, lz)? {
                        Some(r) if r.value - e0 <= threshold => {
                            energies.push(r.value);
                            found.push(r.vector);
                        }
                        _ => break,
                    }
                }
                let dim = basis.len();
                let vectors = DMatrix::from_fn(dim, found.len(), |r, c| found[c][r]);
                sectors.push(Sector {
                    label,
                    basis,
                    energies,
                    vectors,
                });
            }
        }
    }
    Ok(Eigendecomposition {
        n_sites: model.n_sites,
        sectors,
        complete: false,
        spectral_width: width,
        conserved,
    })
}
