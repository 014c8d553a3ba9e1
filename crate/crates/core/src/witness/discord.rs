//! Two-site quantum discord with projective measurements on the second
//! site.
//!
//! The classical correlation `sup_n J(n)` is approximated by a
//! deterministic grid over measurement rotations followed by Nelder-Mead
//! refinement of the best grid points. Entropies are in bits.

use std::f64::consts::PI;

use serde::Serialize;

use super::clamp_range;
use crate::error::{Error, Result};
use crate::linalg::{binary_entropy, entropy, xlogx, LogBase};
use crate::two_site::TwoSiteState;

const BITS: LogBase = LogBase::Bits;

#[derive(Debug, Clone, Serialize)]
pub struct DiscordOptions {
    /// Points of the grid over measurement rotations.
    pub grid_points: usize,
    /// Number of best grid points refined locally.
    pub refine_starts: usize,
    pub max_iterations: usize,
    /// Convergence threshold on the simplex spread of `J` (bits).
    pub tolerance: f64,
}

impl Default for DiscordOptions {
    fn default() -> Self {
        DiscordOptions {
            grid_points: 2000,
            refine_starts: 4,
            max_iterations: 4000,
            tolerance: 1e-14,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DiscordResult {
    /// `Q = I - C` in bits.
    pub discord: f64,
    pub mutual_information: f64,
    pub classical_correlation: f64,
    /// Measurement axis on the second site attaining the supremum.
    pub direction: [f64; 3],
    /// Best value of `J` on the grid alone.
    pub grid_value: f64,
    /// Improvement of the refinement over the grid, an estimate of how far
    /// the grid alone is from the supremum.
    pub optimizer_gap: f64,
    pub converged: bool,
}

/// Real correlation tensor `T_{mu nu} = <sigma^mu (x) sigma^nu>`.
fn correlation_tensor(state: &TwoSiteState) -> [[f64; 4]; 4] {
    let mut t = [[0.0; 4]; 4];
    for (mu, row) in t.iter_mut().enumerate() {
        for (nu, v) in row.iter_mut().enumerate() {
            *v = state.pauli_expectation(mu, nu).re;
        }
    }
    t
}

fn bloch_entropy(r: f64) -> f64 {
    binary_entropy(0.5 * (1.0 + r.min(1.0)), BITS)
}

/// `sum_k p_k S(rho_A | k)` for a measurement of `n . sigma` on site B.
fn conditional_entropy(t: &[[f64; 4]; 4], n: [f64; 3]) -> f64 {
    let bn: f64 = (0..3).map(|k| t[0][k + 1] * n[k]).sum();
    let mut total = 0.0;
    for sign in [1.0, -1.0] {
        let p = 0.5 * (1.0 + sign * bn);
        if p <= 0.0 {
            continue;
        }
        let mut r2 = 0.0;
        for i in 1..4 {
            let tn: f64 = (0..3).map(|k| t[i][k + 1] * n[k]).sum();
            let ri = (t[i][0] + sign * tn) / (2.0 * p);
            r2 += ri * ri;
        }
        total += p * bloch_entropy(r2.sqrt());
    }
    total
}

fn one_site_entropy(t: &[[f64; 4]; 4], first: bool) -> f64 {
    let r2: f64 = (1..4)
        .map(|k| if first { t[k][0] * t[k][0] } else { t[0][k] * t[0][k] })
        .sum();
    bloch_entropy(r2.sqrt())
}

/// `J(n) = S(rho_A) - S(rho | {B_n})` in bits.
pub fn classical_correlation_along(state: &TwoSiteState, n: [f64; 3]) -> f64 {
    let t = correlation_tensor(state);
    one_site_entropy(&t, true) - conditional_entropy(&t, normalize(n))
}

fn normalize(n: [f64; 3]) -> [f64; 3] {
    let l = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
    [n[0] / l, n[1] / l, n[2] / l]
}

/// Measurement axis `V sigma^3 V^dagger` for `V = t I + i y . sigma`.
pub fn axis_from_rotation(t: f64, y: [f64; 3]) -> [f64; 3] {
    let [y1, y2, y3] = y;
    [
        2.0 * (-t * y2 + y1 * y3),
        2.0 * (t * y1 + y2 * y3),
        t * t + y3 * y3 - y1 * y1 - y2 * y2,
    ]
}

/// Deterministic, near-uniform points on the unit 3-sphere
/// (super-Fibonacci spirals).
pub fn rotation_grid(n: usize) -> Vec<(f64, [f64; 3])> {
    const PHI: f64 = std::f64::consts::SQRT_2;
    const PSI: f64 = 1.533_751_168_755_204_3;
    (0..n)
        .map(|i| {
            let s = i as f64 + 0.5;
            let r = (s / n as f64).sqrt();
            let big_r = (1.0 - s / n as f64).sqrt();
            let alpha = 2.0 * PI * s / PHI;
            let beta = 2.0 * PI * s / PSI;
            (
                r * alpha.sin(),
                [r * alpha.cos(), big_r * beta.sin(), big_r * beta.cos()],
            )
        })
        .collect()
}

fn spherical(theta: f64, phi: f64) -> [f64; 3] {
    [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()]
}

fn angles(n: [f64; 3]) -> [f64; 2] {
    [n[2].clamp(-1.0, 1.0).acos(), n[1].atan2(n[0])]
}

/// Nelder-Mead minimization of `f` in two dimensions.
fn nelder_mead(
    f: impl Fn([f64; 2]) -> f64,
    start: [f64; 2],
    step: f64,
    tol: f64,
    max_iter: usize,
) -> ([f64; 2], f64, bool) {
    let mut pts = [start, [start[0] + step, start[1]], [start[0], start[1] + step]];
    let mut vals = pts.map(&f);
    let lerp = |a: [f64; 2], b: [f64; 2], t: f64| [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
    for _ in 0..max_iter {
        let mut idx = [0, 1, 2];
        idx.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        pts = idx.map(|i| pts[i]);
        vals = idx.map(|i| vals[i]);
        let size = (pts[1][0] - pts[0][0])
            .abs()
            .max((pts[1][1] - pts[0][1]).abs())
            .max((pts[2][0] - pts[0][0]).abs().max((pts[2][1] - pts[0][1]).abs()));
        if vals[2] - vals[0] <= tol && size < 1e-7 {
            return (pts[0], vals[0], true);
        }
        let centroid = lerp(pts[0], pts[1], 0.5);
        let reflected = lerp(centroid, pts[2], -1.0);
        let fr = f(reflected);
        if fr < vals[0] {
            let expanded = lerp(centroid, pts[2], -2.0);
            let fe = f(expanded);
            if fe < fr {
                pts[2] = expanded;
                vals[2] = fe;
            } else {
                pts[2] = reflected;
                vals[2] = fr;
            }
        } else if fr < vals[1] {
            pts[2] = reflected;
            vals[2] = fr;
        } else {
            let (target, ft) = if fr < vals[2] {
                (reflected, fr)
            } else {
                (pts[2], vals[2])
            };
            let contracted = lerp(centroid, target, 0.5);
            let fc = f(contracted);
            if fc < ft {
                pts[2] = contracted;
                vals[2] = fc;
            } else {
                for k in 1..3 {
                    pts[k] = lerp(pts[0], pts[k], 0.5);
                    vals[k] = f(pts[k]);
                }
            }
        }
    }
    let best = (0..3)
        .min_by(|&a, &b| vals[a].total_cmp(&vals[b]))
        .expect("three vertices");
    (pts[best], vals[best], false)
}

/// Quantum discord `Q = I(rho) - sup_n J(n)` with the measurement on the
/// second site.
pub fn discord_general(state: &TwoSiteState, opts: &DiscordOptions) -> Result<DiscordResult> {
    if state.eigenvalues()[0] < -1e-10 {
        return Err(Error::InvalidState("density matrix is not positive".into()));
    }
    let t = correlation_tensor(state);
    let s_a = one_site_entropy(&t, true);
    let s_b = one_site_entropy(&t, false);
    let s_ab = entropy(&state.eigenvalues(), BITS);
    let mutual = s_a + s_b - s_ab;

    let j = |n: [f64; 3]| s_a - conditional_entropy(&t, n);
    let mut grid: Vec<([f64; 3], f64)> = rotation_grid(opts.grid_points.max(1))
        .into_iter()
        .map(|(t0, y)| {
            let n = normalize(axis_from_rotation(t0, y));
            (n, j(n))
        })
        .collect();
    // the coordinate axes are cheap and often optimal for symmetric states
    for n in [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]] {
        grid.push((n, j(n)));
    }
    grid.sort_by(|a, b| b.1.total_cmp(&a.1));
    let grid_value = grid[0].1;

    let mut best = grid[0];
    let mut converged = true;
    for &(n0, _) in grid.iter().take(opts.refine_starts.max(1)) {
        let objective = |a: [f64; 2]| -j(spherical(a[0], a[1]));
        let (a, v, ok) = nelder_mead(objective, angles(n0), 0.05, opts.tolerance, opts.max_iterations);
        converged &= ok;
        if -v > best.1 {
            best = (spherical(a[0], a[1]), -v);
        }
    }
    let classical = best.1;
    let discord = clamp_range(mutual - classical, 0.0, s_b.max(0.0), "discord")?;
    if !converged {
        log::warn!("discord refinement hit the iteration cap; best value kept");
    }
    Ok(DiscordResult {
        discord,
        mutual_information: mutual,
        classical_correlation: classical,
        direction: best.0,
        grid_value,
        optimizer_gap: classical - grid_value,
        converged,
    })
}

fn xlog2(x: f64) -> f64 {
    xlogx(x, BITS)
}

fn check_log_argument(v: f64) -> Result<f64> {
    if v < -1e-12 {
        return Err(Error::Domain(format!("logarithm argument {v} is negative")));
    }
    Ok(v.max(0.0))
}

/// Closed form for XYZ correlations without magnetic order.
///
/// The classical part uses `c_max = max|c_i| = 4 max|g|`, the largest
/// correlation-tensor entry.
pub fn discord_xyz(gxx: f64, gyy: f64, gzz: f64) -> Result<f64> {
    let (x, y, z) = (4.0 * gxx, 4.0 * gyy, 4.0 * gzz);
    // 4 lambda_i for the four eigenvalues of rho
    let args = [1.0 - x - y - z, 1.0 - x + y + z, 1.0 + x - y + z, 1.0 + x + y - z];
    let mut mutual = 0.0;
    for a in args {
        let a = check_log_argument(a)?;
        // (a/4) log2(a)
        mutual += 0.25 * xlog2(a);
    }
    let cmax = x.abs().max(y.abs()).max(z.abs());
    if cmax > 1.0 + 1e-12 {
        return Err(Error::Domain(format!("c_max = {cmax} exceeds 1")));
    }
    let cmax = cmax.min(1.0);
    let classical = 0.5 * (xlog2(1.0 - cmax) + xlog2(1.0 + cmax));
    clamp_range(mutual - classical, 0.0, 1.0, "discord")
}

/// Closed form for isotropic correlations, `G = 4 g^zz`.
pub fn discord_heisenberg(g: f64) -> Result<f64> {
    let a = check_log_argument(1.0 - 3.0 * g)?;
    let b = check_log_argument(1.0 + g)?;
    let abs = g.abs();
    if abs > 1.0 + 1e-12 {
        return Err(Error::Domain(format!("|G| = {abs} exceeds 1")));
    }
    let abs = abs.min(1.0);
    let q = 0.25 * (xlog2(a) + 3.0 * xlog2(b)) - 0.5 * (xlog2(1.0 + abs) + xlog2(1.0 - abs));
    clamp_range(q, 0.0, 1.0, "discord")
}

/// Applies [`discord_xyz`] to a state, checking that it has the required
/// form (real X pattern with `c_4 = c_5 = 0`).
pub fn discord_xyz_state(state: &TwoSiteState, tol: f64) -> Result<f64> {
    let c = state.coefficients();
    if !state.is_parity_symmetric(tol) || state.imaginary_part() > tol {
        return Err(Error::Inapplicable("state is not a real parity-symmetric state".into()));
    }
    if c[3].abs() > tol || c[4].abs() > tol {
        return Err(Error::Inapplicable(format!(
            "ordered state (c4 = {:e}, c5 = {:e}); use the general optimizer",
            c[3], c[4]
        )));
    }
    discord_xyz(c[0] / 4.0, c[1] / 4.0, c[2] / 4.0)
}
