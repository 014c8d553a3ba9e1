//! Operator matrix elements in the energy eigenbasis.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::model::{apply_terms, Axis, Observable, Part};
use crate::parallel;
use crate::thermal::Eigendecomposition;

/// Weights between levels of sector `a` (rows) and sector `b` (columns).
#[derive(Debug, Clone)]
pub struct Block {
    pub a: usize,
    pub b: usize,
    pub w: DMatrix<f64>,
}

/// Pair weights `W_{lambda lambda'}` of an observable, evaluated once per
/// eigendecomposition and reused for every temperature.
///
/// For `O = A + iB` (`A`, `B` Hermitian) the stored weight is the
/// symmetrized `(|<l|O|l'>|^2 + |<l'|O|l>|^2) / 2 = |A_ll'|^2 + |B_ll'|^2`.
/// For a cross pair `(O_i, O_j)` of Hermitian single-axis operators it is
/// `Re <l|O_i|l'><l'|O_j|l>`.
#[derive(Debug, Clone)]
pub struct OperatorElements {
    pub n_sites: usize,
    pub label: String,
    pub blocks: Vec<Block>,
    /// `sum_parts |R_p psi|^2` per stored level (diagonal case only).
    pub norm2: Vec<Vec<f64>>,
    pub complete: bool,
    /// False for cross weights.
    pub diagonal: bool,
}

impl OperatorElements {
    pub fn new(eig: &Eigendecomposition, obs: &Observable) -> Result<Self> {
        check(eig, obs)?;
        let parts: Vec<&Part> = obs.parts.iter().collect();
        let (blocks, norm2) = compute(eig, &parts, None);
        Ok(OperatorElements {
            n_sites: eig.n_sites,
            label: obs.label.clone(),
            blocks,
            norm2,
            complete: eig.complete,
            diagonal: true,
        })
    }

    /// Cross weights for two single-axis Hermitian observables.
    pub fn cross(eig: &Eigendecomposition, a: &Observable, b: &Observable) -> Result<Self> {
        check(eig, a)?;
        check(eig, b)?;
        let axis_a = single_axis(a)?;
        let axis_b = single_axis(b)?;
        if axis_a != axis_b {
            return Err(Error::InvalidOperator(format!(
                "cross response needs a common axis, got {} and {}",
                axis_a.as_str(),
                axis_b.as_str()
            )));
        }
        let (blocks, norm2) = compute(eig, &[&a.parts[0]], Some(&b.parts[0]));
        Ok(OperatorElements {
            n_sites: eig.n_sites,
            label: format!("{},{}", a.label, b.label),
            blocks,
            norm2,
            complete: eig.complete,
            diagonal: false,
        })
    }

    /// Sum of all pair weights.
    pub fn total(&self) -> f64 {
        self.blocks.iter().map(|b| b.w.sum()).sum()
    }
}

fn check(eig: &Eigendecomposition, obs: &Observable) -> Result<()> {
    if obs.n_sites != eig.n_sites {
        return Err(Error::DimensionMismatch {
            expected: eig.n_sites,
            got: obs.n_sites,
        });
    }
    Ok(())
}

fn single_axis(obs: &Observable) -> Result<Axis> {
    if obs.parts.len() != 1 {
        return Err(Error::InvalidOperator(format!("{} is not Hermitian", obs.label)));
    }
    let part = &obs.parts[0];
    let axis = part.terms.first().map(|t| t.axis).unwrap_or(Axis::Z);
    if part.terms.iter().any(|t| t.axis != axis) {
        return Err(Error::InvalidOperator(format!("{} mixes axes", obs.label)));
    }
    // Hermitian single parts are `+-R` for x/z skeletons and `+-iR` for y
    let expected_real = axis != Axis::Y;
    let is_real = part.factor.im == 0.0;
    if expected_real != is_real {
        return Err(Error::InvalidOperator(format!("{} is not Hermitian", obs.label)));
    }
    Ok(axis)
}

/// `(V_a^T R V_b)` for every pair of sectors, combined into weights.
fn compute(eig: &Eigendecomposition, parts: &[&Part], other: Option<&Part>) -> (Vec<Block>, Vec<Vec<f64>>) {
    let dim = eig.dim();
    let n = eig.n_sites;
    let mut sector_of = vec![usize::MAX; dim];
    let mut row_of = vec![0usize; dim];
    for (si, s) in eig.sectors.iter().enumerate() {
        for (r, &state) in s.basis.iter().enumerate() {
            sector_of[state] = si;
            row_of[state] = r;
        }
    }

    // For cross pairs the product is f_a f_b s_b (M_a)_ll' (M_b)_ll' where
    // s_b = +-1 is the symmetry of the skeleton; for Hermitian parts of a
    // common axis this sign is +1 up to the sign carried by the factors.
    let cross_sign = other.map(|b| {
        let fa = parts[0].factor;
        let fb = b.factor;
        let sym = if b.terms.first().map(|t| t.axis) == Some(Axis::Y) {
            -1.0
        } else {
            1.0
        };
        (fa * fb).re * sym
    });

    let per_source = parallel::map_range(eig.sectors.len(), |b| {
        let src = &eig.sectors[b];
        let cols = src.len();
        let mut norm2 = vec![0.0; cols];
        if cols == 0 {
            return (Vec::new(), norm2);
        }
        let n_parts = parts.len() + other.is_some() as usize;
        // gathered[p][a]: rows of sector a, one column per source level
        let mut gathered: Vec<Vec<Option<DMatrix<f64>>>> = vec![vec![None; eig.sectors.len()]; n_parts];
        let mut psi = vec![0.0; dim];
        let mut out = vec![0.0; dim];
        for j in 0..cols {
            src.scatter(j, &mut psi);
            for p in 0..n_parts {
                let terms = if p < parts.len() {
                    &parts[p].terms
                } else {
                    &other.unwrap().terms
                };
                out.iter_mut().for_each(|x| *x = 0.0);
                apply_terms(terms, n, &psi, &mut out);
                if p < parts.len() && other.is_none() {
                    norm2[j] += out.iter().map(|x| x * x).sum::<f64>();
                }
                for (state, &v) in out.iter().enumerate() {
                    if v == 0.0 {
                        continue;
                    }
                    let a = sector_of[state];
                    if a == usize::MAX || eig.sectors[a].is_empty() {
                        continue;
                    }
                    let g = gathered[p][a].get_or_insert_with(|| DMatrix::zeros(eig.sectors[a].dim(), cols));
                    g[(row_of[state], j)] = v;
                }
            }
        }
        let mut blocks = Vec::new();
        for a in 0..eig.sectors.len() {
            if gathered.iter().all(|g| g[a].is_none()) {
                continue;
            }
            // explicit transpose: `*` takes the blocked gemm kernel, `tr_mul` does not
            let vt = eig.sectors[a].vectors.transpose();
            let mut w: Option<DMatrix<f64>> = None;
            match cross_sign {
                None => {
                    for g in gathered[..parts.len()].iter().filter_map(|g| g[a].as_ref()) {
                        let m = &vt * g;
                        let sq = m.component_mul(&m);
                        w = Some(match w {
                            Some(acc) => acc + sq,
                            None => sq,
                        });
                    }
                }
                Some(sign) => {
                    if let (Some(ga), Some(gb)) = (&gathered[0][a], &gathered[1][a]) {
                        let ma = &vt * ga;
                        let mb = &vt * gb;
                        w = Some(ma.component_mul(&mb) * sign);
                    }
                }
            }
            if let Some(w) = w {
                blocks.push(Block { a, b, w });
            }
        }
        (blocks, norm2)
    });

    let mut blocks = Vec::new();
    let mut norm2 = Vec::new();
    for (bl, n2) in per_source {
        blocks.extend(bl);
        norm2.push(n2);
    }
    (blocks, norm2)
}
