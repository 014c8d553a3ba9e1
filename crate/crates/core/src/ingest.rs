//! Binned spectra: the CSV interchange format, convention normalization,
//! background subtraction and numeric filtered integration.
//!
//! File layout (UTF-8, comma separated):
//!
//! ```text
//! # weights=1,1,1            optional metadata lines: key=value
//! # note=free text
//! chi,0.5,0.5,2,3            kind, T, S, k count, omega count (T may be empty)
//! k,0,3.141592653589793      wavevectors
//! 0.25,0.1,0.2               omega centre, one value per k
//! 0.75,0.0,0.4
//! 1.25,0.0,0.1
//! ```
//!
//! Values are spectral densities per unit energy and per site. Bin edges
//! are the midpoints between neighbouring centres; the outer bins are
//! symmetric about their centres.

use std::f64::consts::PI;
use std::fmt;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{FilterKind, SpectralFunction, SpectralKind};
use crate::thermal::Temperature;
use crate::witness::format_float;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridKind {
    ChiDoublePrime,
    StructureFactor,
    /// `S~(omega) = S(omega) + S(-omega)`.
    SymmetrizedStructureFactor,
}

impl GridKind {
    pub fn as_str(self) -> &'static str {
        match self {
            GridKind::ChiDoublePrime => "chi",
            GridKind::StructureFactor => "S",
            GridKind::SymmetrizedStructureFactor => "S-sym",
        }
    }
}

impl fmt::Display for GridKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GridKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "chi" | "chi''" | "ChiDoublePrime" => Ok(GridKind::ChiDoublePrime),
            "S" | "s" | "StructureFactor" => Ok(GridKind::StructureFactor),
            "S-sym" | "s-sym" | "Ssym" | "SymmetrizedStructureFactor" => Ok(GridKind::SymmetrizedStructureFactor),
            other => Err(Error::Domain(format!("unknown spectrum kind '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumGrid {
    pub kind: GridKind,
    pub k: Vec<f64>,
    /// Bin centres, strictly increasing.
    pub omega: Vec<f64>,
    /// `values[omega_bin][k]`.
    pub values: Vec<Vec<f64>>,
    pub temperature: Option<f64>,
    pub spin: f64,
    /// Polarization weights of the x, y, z components.
    pub component_weights: [f64; 3],
    pub notes: Vec<String>,
}

impl SpectrumGrid {
    pub fn new(kind: GridKind, k: Vec<f64>, omega: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Self> {
        let g = SpectrumGrid {
            kind,
            k,
            omega,
            values,
            temperature: None,
            spin: 0.5,
            component_weights: [1.0; 3],
            notes: Vec::new(),
        };
        g.validate()?;
        Ok(g)
    }

    pub fn with_temperature(mut self, t: f64) -> Self {
        self.temperature = Some(t);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Domain(m));
        if self.omega.is_empty() || self.k.is_empty() {
            return bad("empty spectrum grid".into());
        }
        if self.omega.iter().any(|w| !w.is_finite()) || self.k.iter().any(|k| !k.is_finite()) {
            return bad("non-finite axis value".into());
        }
        if self.omega.windows(2).any(|w| w[1] <= w[0]) {
            return bad("omega bins are not strictly increasing".into());
        }
        if self.values.len() != self.omega.len() {
            return Err(Error::DimensionMismatch {
                expected: self.omega.len(),
                got: self.values.len(),
            });
        }
        for row in &self.values {
            if row.len() != self.k.len() {
                return Err(Error::DimensionMismatch {
                    expected: self.k.len(),
                    got: row.len(),
                });
            }
            if row.iter().any(|v| !v.is_finite()) {
                return bad("non-finite spectrum value".into());
            }
        }
        if let Some(t) = self.temperature {
            if t.is_nan() || t < 0.0 {
                return Err(Error::NegativeTemperature(t));
            }
        }
        if !(self.spin > 0.0) {
            return bad(format!("spin {} must be positive", self.spin));
        }
        Ok(())
    }

    pub fn n_omega(&self) -> usize {
        self.omega.len()
    }

    pub fn n_k(&self) -> usize {
        self.k.len()
    }

    /// `n + 1` bin edges derived from the centres.
    pub fn edges(&self) -> Vec<f64> {
        edges_from_centres(&self.omega)
    }

    pub fn widths(&self) -> Vec<f64> {
        self.edges().windows(2).map(|e| e[1] - e[0]).collect()
    }

    pub fn column(&self, k_index: usize) -> Vec<f64> {
        self.values.iter().map(|r| r[k_index]).collect()
    }

    pub fn temperature(&self) -> Result<Temperature> {
        match self.temperature {
            Some(t) => Temperature::new(t),
            None => Err(Error::MissingTemperature(format!(
                "{} grid has no temperature",
                self.kind
            ))),
        }
    }

    /// Number of positive-frequency `chi''` cells with negative value.
    pub fn negative_chi_cells(&self) -> usize {
        if self.kind != GridKind::ChiDoublePrime {
            return 0;
        }
        self.omega
            .iter()
            .zip(&self.values)
            .filter(|(w, _)| **w > 0.0)
            .map(|(_, row)| row.iter().filter(|v| **v < 0.0).count())
            .sum()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let cw = self.component_weights;
        writeln!(
            w,
            "# weights={},{},{}",
            format_float(cw[0]),
            format_float(cw[1]),
            format_float(cw[2])
        )?;
        for n in &self.notes {
            writeln!(w, "# note={}", n.replace('\n', " "))?;
        }
        let t = self.temperature.map(format_float).unwrap_or_default();
        writeln!(
            w,
            "{},{},{},{},{}",
            self.kind,
            t,
            format_float(self.spin),
            self.k.len(),
            self.omega.len()
        )?;
        let ks: Vec<String> = self.k.iter().map(|&k| format_float(k)).collect();
        writeln!(w, "k,{}", ks.join(","))?;
        for (om, row) in self.omega.iter().zip(&self.values) {
            let vals: Vec<String> = row.iter().map(|&v| format_float(v)).collect();
            writeln!(w, "{},{}", format_float(*om), vals.join(","))?;
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        let mut w = std::io::BufWriter::new(f);
        self.write_csv(&mut w)?;
        w.flush()?;
        Ok(())
    }
}

fn edges_from_centres(c: &[f64]) -> Vec<f64> {
    let n = c.len();
    let mut e = Vec::with_capacity(n + 1);
    if n == 1 {
        return vec![c[0] - 0.5, c[0] + 0.5];
    }
    e.push(c[0] - 0.5 * (c[1] - c[0]));
    for i in 0..n - 1 {
        e.push(0.5 * (c[i] + c[i + 1]));
    }
    e.push(c[n - 1] + 0.5 * (c[n - 1] - c[n - 2]));
    e
}

/// Options for [`read_spectrum`].
#[derive(Debug, Clone, Default)]
pub struct LoadOptions {
    /// Replaces the file temperature; a mismatch is recorded in the notes.
    pub temperature_override: Option<f64>,
}

pub fn load_spectrum(path: &Path, opts: &LoadOptions) -> Result<SpectrumGrid> {
    let f = std::fs::File::open(path)?;
    let mut g = read_spectrum(f, opts)?;
    g.notes.push(format!("source={}", path.display()));
    Ok(g)
}

fn parse_f64(s: &str, line: usize, what: &str) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|_| Error::Parse {
        line,
        message: format!("{what}: '{}' is not a number", s.trim()),
    })
}

pub fn read_spectrum<R: Read>(r: R, opts: &LoadOptions) -> Result<SpectrumGrid> {
    let reader = BufReader::new(r);
    let mut weights: Option<[f64; 3]> = None;
    let mut notes = Vec::new();
    let mut header: Option<(GridKind, Option<f64>, f64, usize, usize)> = None;
    let mut ks: Option<Vec<f64>> = None;
    let mut omega = Vec::new();
    let mut values = Vec::new();
    let mut last_line = 0;
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        let line = line?;
        let text = line.trim();
        if text.is_empty() {
            continue;
        }
        if let Some(meta) = text.strip_prefix('#') {
            let meta = meta.trim();
            if let Some(v) = meta.strip_prefix("weights=") {
                let w: Vec<f64> = v
                    .split(',')
                    .map(|x| parse_f64(x, line_no, "weights"))
                    .collect::<Result<_>>()?;
                if w.len() != 3 {
                    return Err(Error::Parse {
                        line: line_no,
                        message: format!("expected 3 component weights, got {}", w.len()),
                    });
                }
                weights = Some([w[0], w[1], w[2]]);
            } else if let Some(v) = meta.strip_prefix("note=") {
                notes.push(v.to_string());
            }
            continue;
        }
        let cells: Vec<&str> = text.split(',').map(str::trim).collect();
        if header.is_none() {
            if cells.len() != 5 {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!(
                        "header needs 5 fields (kind,T,S,k count,omega count), got {}",
                        cells.len()
                    ),
                });
            }
            let kind: GridKind = cells[0].parse().map_err(|e: Error| Error::Parse {
                line: line_no,
                message: e.to_string(),
            })?;
            let t = if cells[1].is_empty() {
                None
            } else {
                Some(parse_f64(cells[1], line_no, "T")?)
            };
            let spin = parse_f64(cells[2], line_no, "S")?;
            let nk = cells[3].parse::<usize>().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("bad k count '{}'", cells[3]),
            })?;
            let nw = cells[4].parse::<usize>().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("bad omega count '{}'", cells[4]),
            })?;
            header = Some((kind, t, spin, nk, nw));
            continue;
        }
        let (_, _, _, nk, _) = header.unwrap();
        if ks.is_none() {
            if cells.first() != Some(&"k") || cells.len() != nk + 1 {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("expected 'k' row with {nk} values"),
                });
            }
            ks = Some(
                cells[1..]
                    .iter()
                    .map(|c| parse_f64(c, line_no, "k"))
                    .collect::<Result<_>>()?,
            );
            continue;
        }
        if cells.len() != nk + 1 {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected {} fields, got {}", nk + 1, cells.len()),
            });
        }
        let w = parse_f64(cells[0], line_no, "omega")?;
        if let Some(&prev) = omega.last() {
            if w <= prev {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("omega {w} does not increase (previous {prev})"),
                });
            }
        }
        let row: Vec<f64> = cells[1..]
            .iter()
            .map(|c| parse_f64(c, line_no, "value"))
            .collect::<Result<_>>()?;
        if let Some(v) = row.iter().find(|v| !v.is_finite()) {
            return Err(Error::Parse {
                line: line_no,
                message: format!("non-finite value {v}"),
            });
        }
        omega.push(w);
        values.push(row);
    }
    let Some((kind, t_file, spin, _, nw)) = header else {
        return Err(Error::Parse {
            line: last_line,
            message: "missing header row".into(),
        });
    };
    let ks = ks.ok_or(Error::Parse {
        line: last_line,
        message: "missing k row".into(),
    })?;
    if omega.len() != nw {
        return Err(Error::Parse {
            line: last_line,
            message: format!("header announces {nw} omega rows, found {}", omega.len()),
        });
    }
    let component_weights = match weights {
        Some(w) => w,
        None => {
            log::warn!("spectrum file declares no component weights; using 1,1,1");
            notes.push("weights defaulted to 1,1,1".into());
            [1.0; 3]
        }
    };
    let mut temperature = t_file;
    if let Some(t) = opts.temperature_override {
        if t_file != Some(t) {
            let msg = format!(
                "temperature override {} replaces file value {}",
                format_float(t),
                t_file.map(format_float).unwrap_or_else(|| "none".into())
            );
            log::warn!("{msg}");
            notes.push(msg);
        }
        temperature = Some(t);
    }
    if temperature.is_none() && kind != GridKind::ChiDoublePrime {
        return Err(Error::MissingTemperature(format!("{kind} grids need T for conversion")));
    }
    let g = SpectrumGrid {
        kind,
        k: ks,
        omega,
        values,
        temperature,
        spin,
        component_weights,
        notes,
    };
    g.validate().map_err(|e| Error::Parse {
        line: last_line,
        message: e.to_string(),
    })?;
    let neg = g.negative_chi_cells();
    if neg > 0 {
        log::warn!("{neg} positive-frequency chi'' cells are negative");
    }
    Ok(g)
}

/// Bins pole lists (one per wavevector, each with `k` set) into densities
/// on `n_bins` uniform bins over `[lo, hi)`. Returns the grid and the
/// absolute weight that fell outside the range.
pub fn bin_poles(spectra: &[SpectralFunction], lo: f64, hi: f64, n_bins: usize) -> Result<(SpectrumGrid, f64)> {
    if spectra.is_empty() || n_bins == 0 || !(hi > lo) {
        return Err(Error::Domain("binning needs spectra and a nonempty range".into()));
    }
    let kind = match spectra[0].kind {
        SpectralKind::Chi => GridKind::ChiDoublePrime,
        SpectralKind::StructureFactor => GridKind::StructureFactor,
    };
    if spectra.iter().any(|s| s.kind != spectra[0].kind) {
        return Err(Error::Domain("mixed spectrum kinds".into()));
    }
    let step = (hi - lo) / n_bins as f64;
    let omega: Vec<f64> = (0..n_bins).map(|i| lo + (i as f64 + 0.5) * step).collect();
    let edges = edges_from_centres(&omega);
    let widths: Vec<f64> = edges.windows(2).map(|e| e[1] - e[0]).collect();
    let mut values = vec![vec![0.0; spectra.len()]; n_bins];
    let mut outside = 0.0;
    for (c, s) in spectra.iter().enumerate() {
        for p in &s.poles {
            if p.omega < edges[0] || p.omega >= edges[n_bins] {
                outside += p.weight.abs();
                continue;
            }
            let b = (edges.partition_point(|&e| e <= p.omega) - 1).min(n_bins - 1);
            values[b][c] += p.weight / widths[b];
        }
    }
    let k = spectra
        .iter()
        .map(|s| {
            s.k.ok_or_else(|| Error::Domain(format!("{} carries no wavevector", s.label)))
        })
        .collect::<Result<Vec<f64>>>()?;
    let temperature = spectra[0].temperature.map(|t| t.value());
    let mut g = SpectrumGrid::new(kind, k, omega, values)?;
    g.temperature = temperature;
    g.notes.push(format!("binned from exact poles, {n_bins} bins"));
    Ok((g, outside))
}

/// Converts any grid to `chi''`, recording the relation used:
/// `chi'' = pi (1 - e^{-beta omega}) S` or `chi'' = pi tanh(beta omega / 2) S~`.
pub fn normalize_conventions(grid: &SpectrumGrid) -> Result<SpectrumGrid> {
    convert(grid, GridKind::ChiDoublePrime)
}

/// Converts between kinds where the relation is defined. The elastic
/// (`omega = 0`) bin carries no `chi''` weight and maps to zero.
pub fn convert(grid: &SpectrumGrid, to: GridKind) -> Result<SpectrumGrid> {
    if grid.kind == to {
        return Ok(grid.clone());
    }
    let t = grid.temperature()?;
    let beta = t.beta();
    // factor f(omega) with chi'' = f * X for the source kind X
    let to_chi = |kind: GridKind, w: f64| -> f64 {
        match kind {
            GridKind::ChiDoublePrime => 1.0,
            GridKind::StructureFactor => {
                if beta.is_infinite() {
                    if w > 0.0 {
                        PI
                    } else {
                        f64::NEG_INFINITY
                    }
                } else {
                    -PI * (-beta * w).exp_m1()
                }
            }
            GridKind::SymmetrizedStructureFactor => PI * crate::spectral::half_tanh(beta, w),
        }
    };
    let mut out = grid.clone();
    for (i, &w) in grid.omega.iter().enumerate() {
        let f_from = to_chi(grid.kind, w);
        let f_to = to_chi(to, w);
        for (c, v) in grid.values[i].iter().enumerate() {
            let chi = if f_from.is_infinite() {
                if *v != 0.0 {
                    return Err(Error::DetailedBalance(format!(
                        "{} weight {v} at omega = {w} < 0 at zero temperature",
                        grid.kind
                    )));
                }
                0.0
            } else {
                f_from * v
            };
            out.values[i][c] = if to == GridKind::ChiDoublePrime {
                chi
            } else if f_to == 0.0 || f_to.is_infinite() {
                if chi != 0.0 {
                    return Err(Error::Domain(format!(
                        "{to} is undefined at omega = {w} for nonzero chi''"
                    )));
                }
                0.0
            } else {
                chi / f_to
            };
        }
    }
    out.kind = to;
    let relation = match (grid.kind, to) {
        (GridKind::StructureFactor, GridKind::ChiDoublePrime) => "chi''=pi(1-exp(-beta w))S",
        (GridKind::SymmetrizedStructureFactor, GridKind::ChiDoublePrime) => "chi''=pi tanh(beta w/2) S~",
        _ => "via chi''",
    };
    out.notes.push(format!("converted {} -> {}: {relation}", grid.kind, to));
    Ok(out)
}

/// Weighted sum of per-component `chi''_aa` grids on a common axis.
pub fn combine_components(grids: &[SpectrumGrid; 3], weights: [f64; 3]) -> Result<SpectrumGrid> {
    let first = &grids[0];
    for g in grids.iter() {
        if g.kind != GridKind::ChiDoublePrime {
            return Err(Error::Domain("component grids must be chi''".into()));
        }
        if g.k != first.k || g.omega != first.omega || g.temperature != first.temperature {
            return Err(Error::Domain("component grids do not share axes".into()));
        }
    }
    let mut out = first.clone();
    for (i, row) in out.values.iter_mut().enumerate() {
        for (c, v) in row.iter_mut().enumerate() {
            *v = (0..3).map(|a| weights[a] * grids[a].values[i][c]).sum();
        }
    }
    out.component_weights = weights;
    out.notes.push("unpolarized combination".into());
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum Background {
    None,
    /// Mean over bins with centres in `[lo, hi]`.
    Constant {
        lo: f64,
        hi: f64,
    },
    /// Least-squares line over bins with centres in `[lo, hi]`.
    Linear {
        lo: f64,
        hi: f64,
    },
}

/// Subtracts a background fitted independently for every wavevector.
pub fn subtract_background(grid: &SpectrumGrid, bg: &Background) -> Result<SpectrumGrid> {
    let (lo, hi, linear) = match *bg {
        Background::None => return Ok(grid.clone()),
        Background::Constant { lo, hi } => (lo, hi, false),
        Background::Linear { lo, hi } => (lo, hi, true),
    };
    let idx: Vec<usize> = (0..grid.n_omega())
        .filter(|&i| grid.omega[i] >= lo && grid.omega[i] <= hi)
        .collect();
    let need = if linear { 2 } else { 1 };
    if idx.len() < need {
        return Err(Error::Domain(format!(
            "background window [{lo}, {hi}] holds {} bins, need {need}",
            idx.len()
        )));
    }
    let mut out = grid.clone();
    for c in 0..grid.n_k() {
        let n = idx.len() as f64;
        let mx = idx.iter().map(|&i| grid.omega[i]).sum::<f64>() / n;
        let my = idx.iter().map(|&i| grid.values[i][c]).sum::<f64>() / n;
        let slope = if linear {
            let sxy: f64 = idx
                .iter()
                .map(|&i| (grid.omega[i] - mx) * (grid.values[i][c] - my))
                .sum();
            let sxx: f64 = idx.iter().map(|&i| (grid.omega[i] - mx).powi(2)).sum();
            sxy / sxx
        } else {
            0.0
        };
        for i in 0..grid.n_omega() {
            out.values[i][c] -= my + slope * (grid.omega[i] - mx);
        }
    }
    out.notes.push(format!(
        "{} background over [{}, {}] subtracted",
        if linear { "linear" } else { "constant" },
        format_float(lo),
        format_float(hi)
    ));
    Ok(out)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct IntegrationOptions {
    /// Bins with centres above the cutoff are excluded and reported as
    /// tail.
    pub cutoff: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NumericIntegral {
    pub value: f64,
    /// Filtered weight beyond the cutoff, or an estimate of the weight
    /// beyond the last bin when no cutoff is set.
    pub tail: f64,
    /// `|I(dw) - I(2 dw)|` from merging neighbouring bins.
    pub richardson: f64,
    /// `(1/pi) sum |v| dw (h(hi) - h(lo))`: the largest error a pole
    /// anywhere inside its bin can cause, since `h` is monotone.
    pub binning: f64,
    pub uncertainty: f64,
    pub bins_used: usize,
}

impl NumericIntegral {
    pub fn brackets(&self, exact: f64) -> bool {
        (self.value - exact).abs() <= self.uncertainty
    }
}

/// `(1/pi) int_0^inf h(beta omega) chi''(omega) d omega` for one wavevector.
///
/// Grids of other kinds are normalized first. Each bin with a positive
/// centre contributes `width * h(beta centre) * value`; a bin straddling
/// zero contributes only through the uncertainty.
pub fn integrate_qfi_numeric(
    grid: &SpectrumGrid,
    k_index: usize,
    filter: FilterKind,
    opts: &IntegrationOptions,
) -> Result<NumericIntegral> {
    filter.validate()?;
    if k_index >= grid.n_k() {
        return Err(Error::DimensionMismatch {
            expected: grid.n_k(),
            got: k_index,
        });
    }
    let t = grid.temperature()?;
    let chi = normalize_conventions(grid)?;
    let beta = t.beta();
    let h = |w: f64| filter.eval(beta * w.max(0.0));
    let edges = chi.edges();
    let col = chi.column(k_index);
    let cut = opts.cutoff.unwrap_or(f64::INFINITY);

    let mut value = 0.0;
    let mut binning = 0.0;
    let mut tail = 0.0;
    let mut used = Vec::new();
    for (i, &c) in chi.omega.iter().enumerate() {
        let (lo, hi) = (edges[i], edges[i + 1]);
        let width = hi - lo;
        let v = col[i];
        if hi <= 0.0 {
            continue;
        }
        if c > cut {
            tail += width * h(c) * v.abs() / PI;
            continue;
        }
        if c <= 0.0 {
            // positive half of a bin that straddles zero
            binning += hi * h(hi) * v.abs() / PI;
            continue;
        }
        value += width * h(c) * v / PI;
        binning += width * (h(hi) - h(lo.max(0.0))) * v.abs() / PI;
        used.push(i);
    }
    if opts.cutoff.is_none() {
        if let Some(&last) = used.last() {
            let width = edges[last + 1] - edges[last];
            tail = filter.limit() * width * col[last].abs() / PI;
        }
    }
    // coarse estimate from pairs of neighbouring bins
    let mut coarse = 0.0;
    for pair in used.chunks(2) {
        let lo = edges[pair[0]];
        let hi = edges[pair[pair.len() - 1] + 1];
        let mass: f64 = pair.iter().map(|&i| (edges[i + 1] - edges[i]) * col[i]).sum();
        let centre = 0.5 * (lo.max(0.0) + hi);
        coarse += mass * h(centre) / PI;
    }
    let richardson = (value - coarse).abs();
    Ok(NumericIntegral {
        value,
        tail,
        richardson,
        binning,
        uncertainty: binning + richardson + tail,
        bins_used: used.len(),
    })
}
