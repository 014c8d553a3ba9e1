//! Sweep evaluation. Coordinates are computed in parallel; results come
//! back in coordinate order so output never depends on scheduling.

use std::sync::Arc;

use qwitness_core::linalg::LogBase;
use qwitness_core::model::{Axis, Observable};
use qwitness_core::parallel;
use qwitness_core::spectral::{
    coherence_measure, entanglement_depth, lehmann_chi_from, nqfi, nqfi_depth, qfi_integral, DepthMode, FilterKind,
    OperatorElements,
};
use qwitness_core::thermal::{
    diagonalize, magnetization_variance, reduce_one_site, reduce_two_site, thermal_state, EngineOptions,
};
use qwitness_core::witness::{
    certify_above, concurrence_wootters, discord_general, entanglement_of_formation, one_tangle,
    susceptibility_witness, two_tangle_all_partners, Branch, Certification, DiscordOptions, SusceptibilityInput,
    WitnessReport,
};
use qwitness_core::{Eigendecomposition, Temperature, ThermalEnsemble};

use crate::config::{Resolved, WitnessKind};
use crate::error::CliError;

/// Spin of the model sites.
const SPIN: f64 = 0.5;

/// One evaluated coordinate.
#[derive(Debug, Clone)]
pub struct Row {
    pub witness: WitnessKind,
    pub t: f64,
    pub k: Option<f64>,
    pub report: WitnessReport,
}

#[derive(Debug)]
pub struct Failure {
    pub witness: WitnessKind,
    pub t: Option<f64>,
    pub k: Option<f64>,
    pub error: CliError,
}

impl Failure {
    pub fn coordinate(&self) -> String {
        coordinate(self.witness, self.t, self.k)
    }
}

fn coordinate(w: WitnessKind, t: Option<f64>, k: Option<f64>) -> String {
    let mut s = format!("witness={w}");
    if let Some(t) = t {
        s.push_str(&format!(" T={t}"));
    }
    if let Some(k) = k {
        s.push_str(&format!(" k={k}"));
    }
    s
}

#[derive(Debug, Default)]
pub struct SweepResult {
    pub rows: Vec<Row>,
    pub failures: Vec<Failure>,
}

pub fn engine(resolved: &Resolved) -> Result<Arc<Eigendecomposition>, CliError> {
    let model = resolved.model.as_ref().expect("thermal commands carry a model");
    let eig = diagonalize(model, &EngineOptions::default())?;
    Ok(Arc::new(eig))
}

pub fn ensemble(eig: &Arc<Eigendecomposition>, t: f64) -> Result<ThermalEnsemble, qwitness_core::Error> {
    thermal_state(eig.clone(), Temperature::new(t)?)
}

pub fn run_sweep(resolved: &Resolved) -> Result<SweepResult, CliError> {
    let eig = engine(resolved)?;
    let n = eig.n_sites;
    let spectral = resolved.witnesses.iter().any(|w| w.is_spectral());
    let elements: Vec<Result<OperatorElements, qwitness_core::Error>> = if spectral {
        parallel::map(&resolved.k, |&k| {
            OperatorElements::new(&eig, &Observable::collective(n, resolved.axis, k))
        })
    } else {
        Vec::new()
    };

    let per_t = parallel::map(&resolved.temperatures, |&t| evaluate_at(resolved, &eig, &elements, t));
    let mut out = SweepResult::default();
    for (rows, failures) in per_t {
        out.rows.extend(rows);
        out.failures.extend(failures);
    }
    // group by witness, keeping temperature and k order within each
    let order = |w: WitnessKind| resolved.witnesses.iter().position(|x| *x == w).unwrap_or(usize::MAX);
    out.rows.sort_by_key(|r| order(r.witness));
    out.failures.sort_by_key(|f| order(f.witness));
    Ok(out)
}

fn evaluate_at(
    resolved: &Resolved,
    eig: &Arc<Eigendecomposition>,
    elements: &[Result<OperatorElements, qwitness_core::Error>],
    t: f64,
) -> (Vec<Row>, Vec<Failure>) {
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    let ens = match ensemble(eig, t) {
        Ok(e) => e,
        Err(e) => {
            for &w in &resolved.witnesses {
                failures.push(Failure {
                    witness: w,
                    t: Some(t),
                    k: None,
                    error: CliError::from_core(&e, &coordinate(w, Some(t), None)),
                });
            }
            return (rows, failures);
        }
    };
    for &w in &resolved.witnesses {
        if w.is_spectral() {
            for (&k, el) in resolved.k.iter().zip(elements) {
                let res = el
                    .as_ref()
                    .map_err(|e| CliError::from_core(e, &coordinate(w, Some(t), Some(k))))
                    .and_then(|el| {
                        spectral_witness(resolved, w, el, &ens, t)
                            .map_err(|e| CliError::from_core(&e, &coordinate(w, Some(t), Some(k))))
                    });
                match res {
                    Ok(report) => rows.push(Row {
                        witness: w,
                        t,
                        k: Some(k),
                        report: report.with_extra("k", k),
                    }),
                    Err(error) => failures.push(Failure {
                        witness: w,
                        t: Some(t),
                        k: Some(k),
                        error,
                    }),
                }
            }
        } else {
            match static_witness(resolved, w, &ens, t) {
                Ok(report) => rows.push(Row {
                    witness: w,
                    t,
                    k: None,
                    report,
                }),
                Err(e) => failures.push(Failure {
                    witness: w,
                    t: Some(t),
                    k: None,
                    error: CliError::from_core(&e, &coordinate(w, Some(t), None)),
                }),
            }
        }
    }
    (rows, failures)
}

fn static_witness(
    resolved: &Resolved,
    w: WitnessKind,
    ens: &ThermalEnsemble,
    t: f64,
) -> Result<WitnessReport, qwitness_core::Error> {
    let tol = resolved.tolerance;
    let (i, j) = resolved.config.pair;
    let n = ens.n_sites();
    let report = match w {
        WitnessKind::Concurrence | WitnessKind::EntanglementOfFormation => {
            let c = concurrence_wootters(&reduce_two_site(ens, i, j)?)?;
            let v = if w == WitnessKind::Concurrence {
                c
            } else {
                entanglement_of_formation(c)?
            };
            let r = WitnessReport::new(w.as_str(), v, Branch::General)
                .with_bound(0.0)
                .with_certification(certify_above(c, 0.0, tol))
                .with_pair(i, j);
            if w == WitnessKind::EntanglementOfFormation {
                r.with_log_base(LogBase::Bits)
            } else {
                r
            }
        }
        WitnessKind::Discord => {
            let q = discord_general(&reduce_two_site(ens, i, j)?, &DiscordOptions::default())?;
            WitnessReport::new(w.as_str(), q.discord, Branch::General)
                .with_certification(Certification::Inapplicable)
                .with_pair(i, j)
                .with_log_base(LogBase::Bits)
                .with_extra("classical_correlation", q.classical_correlation)
                .with_extra("mutual_information", q.mutual_information)
                .with_extra("optimizer_gap", q.optimizer_gap)
        }
        WitnessKind::Susceptibility => {
            let [vx, vy, vz] = [Axis::X, Axis::Y, Axis::Z].map(|a| magnetization_variance(ens, a));
            let mut input = SusceptibilityInput::new([vx?, vy?, vz?], n);
            input.temperature = (t > 0.0).then_some(t);
            susceptibility_witness(&input, tol)?
        }
        WitnessKind::Tangle => {
            let r1 = reduce_one_site(ens, i)?;
            let m = [r1[(0, 1)].re, -r1[(0, 1)].im, 0.5 * (r1[(0, 0)].re - r1[(1, 1)].re)];
            let tau1 = one_tangle(m)?;
            let pairs = (0..n)
                .filter(|&p| p != i)
                .map(|p| Ok(((i, p), concurrence_wootters(&reduce_two_site(ens, i, p)?)?)))
                .collect::<Result<Vec<_>, qwitness_core::Error>>()?;
            let tau2 = two_tangle_all_partners(i, &pairs).value;
            // tau1 - tau2 > 0 leaves room for entanglement beyond pairs
            WitnessReport::new(w.as_str(), tau2, Branch::General)
                .with_bound(tau1)
                .with_certification(Certification::Inapplicable)
                .with_extra("tau1", tau1)
                .with_extra("residual", tau1 - tau2)
        }
        _ => unreachable!("spectral witness {w} evaluated per wavevector"),
    };
    Ok(report.with_temperature(t).with_inputs(inputs_label(resolved)))
}

fn spectral_witness(
    resolved: &Resolved,
    w: WitnessKind,
    el: &OperatorElements,
    ens: &ThermalEnsemble,
    t: f64,
) -> Result<WitnessReport, qwitness_core::Error> {
    let tol = resolved.tolerance;
    let n = ens.n_sites();
    let temp = Temperature::new(t)?;
    let chi = lehmann_chi_from(el, ens)?;
    let report = match w {
        WitnessKind::Qfi => {
            let f = qfi_integral(&chi, temp)?;
            // S^a has eigenvalue spread 2S = 1 per site
            let depth = entanglement_depth(n as f64 * f, Some(n), 2.0 * SPIN, DepthMode::Exact, tol)?;
            WitnessReport::new(w.as_str(), f, Branch::General)
                .with_bound(1.0)
                .with_certification(certified_beyond_one(depth.certified_depth))
                .with_extra("depth", depth.certified_depth as f64)
                .with_extra("fq_total", n as f64 * f)
        }
        WitnessKind::Nqfi => {
            let f = qfi_integral(&chi, temp)?;
            let v = nqfi(f, SPIN)?;
            let depth = nqfi_depth(v, tol)?;
            WitnessReport::new(w.as_str(), v, Branch::General)
                .with_bound(1.0)
                .with_certification(certified_beyond_one(depth.certified_depth))
                .with_extra("depth", depth.certified_depth as f64)
        }
        WitnessKind::Coherence => {
            let v = coherence_measure(&chi, temp, resolved.filter)?;
            WitnessReport::new(format!("coherence-{}", resolved.filter), v, Branch::General)
                .with_certification(Certification::Inapplicable)
        }
        _ => unreachable!("static witness {w} evaluated per temperature"),
    };
    Ok(report.with_temperature(t).with_inputs(inputs_label(resolved)))
}

fn certified_beyond_one(depth: usize) -> Certification {
    if depth >= 2 {
        Certification::Certified
    } else {
        Certification::NotCertified
    }
}

fn inputs_label(resolved: &Resolved) -> String {
    match &resolved.model {
        Some(m) => {
            let mut s = format!("{:?} N={} J={} {:?}", m.kind, m.n_sites, m.j, m.boundary);
            for (name, v) in [("alpha", m.alpha), ("delta", m.delta), ("h_x", m.h_x)] {
                if let Some(v) = v {
                    s.push_str(&format!(" {name}={v}"));
                }
            }
            s
        }
        None => String::new(),
    }
}

/// Thermal summary and binned `chi''` for one temperature.
#[derive(Debug)]
pub struct Simulated {
    pub t: f64,
    pub energy: f64,
    pub variances: [f64; 3],
    pub spectrum: qwitness_core::ingest::SpectrumGrid,
}

pub fn run_simulate(resolved: &Resolved) -> Result<Vec<Simulated>, CliError> {
    let eig = engine(resolved)?;
    let n = eig.n_sites;
    let elements = resolved
        .k
        .iter()
        .map(|&k| OperatorElements::new(&eig, &Observable::collective(n, resolved.axis, k)))
        .collect::<Result<Vec<_>, _>>()?;
    // bins reach just past the largest possible transition energy
    let reach = eig.spectral_width * (1.0 + 1.0 / resolved.config.bins as f64) + 1e-9;
    let results = parallel::map(&resolved.temperatures, |&t| -> Result<Simulated, CliError> {
        let at = |e: &qwitness_core::Error| CliError::from_core(e, &format!("simulate T={t}"));
        let ens = ensemble(&eig, t).map_err(|e| at(&e))?;
        let energy = ens.support().iter().map(|(l, p)| p * l.energy).sum();
        let [vx, vy, vz] = [Axis::X, Axis::Y, Axis::Z].map(|a| magnetization_variance(&ens, a).map_err(|e| at(&e)));
        let variances = [vx?, vy?, vz?];
        let spectra = resolved
            .k
            .iter()
            .zip(&elements)
            .map(|(&k, el)| lehmann_chi_from(el, &ens).map(|s| s.with_k(k)))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| at(&e))?;
        let (grid, outside) =
            qwitness_core::ingest::bin_poles(&spectra, -reach, reach, resolved.config.bins).map_err(|e| at(&e))?;
        if outside != 0.0 {
            return Err(CliError::Numeric(format!(
                "simulate T={t}: weight {outside} outside the binned range"
            )));
        }
        let mut grid = grid;
        grid.spin = SPIN;
        if t > 0.0 {
            grid = grid.with_temperature(t);
        }
        Ok(Simulated {
            t,
            energy,
            variances,
            spectrum: grid,
        })
    });
    results.into_iter().collect()
}

/// Per-wavevector numeric QFI of a measured or exported spectrum.
#[derive(Debug)]
pub struct IngestResult {
    pub rows: Vec<Row>,
    pub warnings: Vec<String>,
}

pub fn run_ingest(resolved: &Resolved) -> Result<IngestResult, CliError> {
    use qwitness_core::ingest::{integrate_qfi_numeric, load_spectrum, IntegrationOptions, LoadOptions};

    let ing = resolved.config.ingest.as_ref().expect("validated");
    let opts = LoadOptions {
        temperature_override: ing.temperature_override,
    };
    let grid = load_spectrum(&ing.file, &opts).map_err(|e| CliError::from_core(&e, &ing.file.display().to_string()))?;
    let t = grid
        .temperature()
        .map_err(|e| CliError::from_core(&e, &ing.file.display().to_string()))?
        .value();
    let mut warnings: Vec<String> = grid
        .notes
        .iter()
        .filter(|n| !n.starts_with("source="))
        .cloned()
        .collect();
    if let Some(o) = ing.temperature_override {
        warnings.push(format!("temperature override T={o} applied"));
    }
    let iopts = IntegrationOptions { cutoff: ing.cutoff };
    let mut rows = Vec::new();
    for (ki, &k) in grid.k.iter().enumerate() {
        let at = |e: qwitness_core::Error| CliError::from_core(&e, &coordinate(WitnessKind::Qfi, Some(t), Some(k)));
        let num = integrate_qfi_numeric(&grid, ki, FilterKind::Qfi, &iopts).map_err(at)?;
        let nq = nqfi(num.value, grid.spin).map_err(at)?;
        let depth = nqfi_depth(nq, resolved.tolerance).map_err(at)?;
        // certification uses the lower end of the error bar
        let lower = nqfi((num.value - num.uncertainty).max(0.0), grid.spin).map_err(at)?;
        let depth_lower = nqfi_depth(lower, resolved.tolerance).map_err(at)?;
        let report = WitnessReport::new("qfi", num.value, Branch::General)
            .with_bound(12.0 * grid.spin * grid.spin)
            .with_certification(certified_beyond_one(depth_lower.certified_depth))
            .with_temperature(t)
            .with_inputs(ing.file.display().to_string())
            .with_extra("k", k)
            .with_extra("nqfi", nq)
            .with_extra("depth", depth.certified_depth as f64)
            .with_extra("depth_lower", depth_lower.certified_depth as f64)
            .with_extra("uncertainty", num.uncertainty)
            .with_extra("tail", num.tail)
            .with_extra("richardson", num.richardson)
            .with_extra("binning", num.binning);
        rows.push(Row {
            witness: WitnessKind::Qfi,
            t,
            k: Some(k),
            report,
        });
    }
    Ok(IngestResult { rows, warnings })
}
