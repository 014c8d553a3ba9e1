//! Van Hove correlation function from structure-factor poles.

use std::f64::consts::PI;

use serde::Serialize;

use super::{SpectralFunction, SpectralKind};
use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::model::on_k_grid;

/// `G(r, t) = <S_i(0) S_{i+r}(t)>`, averaged over `+-r` (the structure
/// factor weights are symmetrized in `k -> -k`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VanHove {
    pub n_sites: usize,
    pub r: Vec<usize>,
    pub t: Vec<f64>,
    /// `values[r][t]`.
    pub values: Vec<Vec<C64>>,
}

impl VanHove {
    pub fn get(&self, r: usize, t: usize) -> C64 {
        self.values[r][t]
    }
}

/// `G(r, t) = (1/N) sum_k e^{ikr} sum_n w_n(k) e^{i omega_n t}` from the
/// structure factors of the normalized collective operators, one per grid
/// wavevector.
pub fn van_hove(spectra: &[SpectralFunction], n_sites: usize, r: &[usize], t: &[f64]) -> Result<VanHove> {
    let mut seen = vec![false; n_sites];
    for s in spectra {
        if s.kind != SpectralKind::StructureFactor {
            return Err(Error::Domain(format!("{} is not a structure factor", s.label)));
        }
        let k =
            s.k.ok_or_else(|| Error::Domain(format!("{} carries no wavevector", s.label)))?;
        if !on_k_grid(k, n_sites) {
            return Err(Error::Domain(format!("k = {k} is not on the {n_sites}-site grid")));
        }
        let m = ((k / (2.0 * PI) * n_sites as f64).round() as i64).rem_euclid(n_sites as i64) as usize;
        if seen[m] {
            return Err(Error::Domain(format!("k = {k} given twice")));
        }
        seen[m] = true;
    }
    if seen.iter().any(|s| !s) {
        return Err(Error::Domain("van Hove transform needs every grid wavevector".into()));
    }
    if let Some(&bad) = r.iter().find(|&&x| x >= n_sites) {
        return Err(Error::SiteOutOfRange { index: bad, n_sites });
    }
    // F(k, t) first, then the spatial transform
    let f: Vec<Vec<C64>> = spectra
        .iter()
        .map(|s| {
            t.iter()
                .map(|&time| s.poles.iter().map(|p| C64::from_polar(p.weight, p.omega * time)).sum())
                .collect()
        })
        .collect();
    let values = r
        .iter()
        .map(|&dist| {
            (0..t.len())
                .map(|ti| {
                    spectra
                        .iter()
                        .zip(&f)
                        .map(|(s, fk)| C64::from_polar(1.0, s.k.unwrap() * dist as f64) * fk[ti])
                        .sum::<C64>()
                        / n_sites as f64
                })
                .collect()
        })
        .collect();
    Ok(VanHove {
        n_sites,
        r: r.to_vec(),
        t: t.to_vec(),
        values,
    })
}
