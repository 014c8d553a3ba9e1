//! Artifact writing. Everything is written from one thread after the
//! computation, so file contents depend only on the inputs.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use qwitness_core::witness::{format_float, WitnessReport};

use crate::config::{Command, Format, Resolved, RunConfig, WitnessKind};
use crate::error::CliError;
use crate::run::{Failure, IngestResult, Row, Simulated};
use crate::svg::{Plot, Series};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub command: Command,
    /// sha256 over the tool version, the config (less the output
    /// directory) and the contents of every input file.
    pub digest: String,
    pub inputs: Vec<InputDigest>,
    pub warnings: Vec<String>,
    pub config: RunConfig,
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn provenance(resolved: &Resolved, inputs: &[PathBuf], warnings: Vec<String>) -> Result<Provenance, CliError> {
    let mut config = resolved.config.clone();
    config.command = Some(resolved.command);
    config.tolerance = Some(resolved.tolerance);
    config.formats = resolved.formats.iter().copied().collect();
    let mut keyed = config.clone();
    keyed.out = PathBuf::new();

    let mut h = Sha256::new();
    h.update(format!("qwitness/{}\n", env!("CARGO_PKG_VERSION")));
    h.update(serde_json::to_string(&keyed).expect("config serializes"));
    let mut digests = Vec::new();
    for p in inputs {
        let bytes = fs::read(p).map_err(|e| CliError::Data(format!("{}: {e}", p.display())))?;
        let d = hex(&Sha256::digest(&bytes));
        h.update(&d);
        digests.push(InputDigest {
            path: p.display().to_string(),
            sha256: d,
        });
    }
    Ok(Provenance {
        tool: "qwitness".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: resolved.command,
        digest: hex(&h.finalize()),
        inputs: digests,
        warnings,
        config,
    })
}

/// One line of `summary.jsonl`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SummaryLine {
    pub witness: String,
    #[serde(rename = "T", default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<WitnessReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exit_code: Option<i32>,
    pub provenance: String,
}

pub struct Writer<'a> {
    dir: &'a Path,
    resolved: &'a Resolved,
    prov: &'a Provenance,
    pub written: Vec<PathBuf>,
}

impl<'a> Writer<'a> {
    pub fn new(dir: &'a Path, resolved: &'a Resolved, prov: &'a Provenance) -> Result<Self, CliError> {
        fs::create_dir_all(dir)?;
        Ok(Writer {
            dir,
            resolved,
            prov,
            written: Vec::new(),
        })
    }

    fn put(&mut self, name: &str, contents: &[u8]) -> Result<(), CliError> {
        let path = self.dir.join(name);
        let mut f = fs::File::create(&path)?;
        f.write_all(contents)?;
        self.written.push(path);
        Ok(())
    }

    pub fn provenance(&mut self) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(self.prov).expect("provenance serializes");
        text.push('\n');
        self.put("provenance.json", text.as_bytes())
    }

    fn summary(&mut self, lines: &[SummaryLine]) -> Result<(), CliError> {
        if !self.resolved.wants(Format::Json) {
            return Ok(());
        }
        let mut text = String::new();
        for l in lines {
            text.push_str(&serde_json::to_string(l).expect("summary serializes"));
            text.push('\n');
        }
        self.put("summary.jsonl", text.as_bytes())
    }

    pub fn sweep(&mut self, rows: &[Row], failures: &[Failure]) -> Result<(), CliError> {
        let digest = self.prov.digest.clone();
        let by_witness = group(rows);
        if self.resolved.wants(Format::Csv) {
            for (w, rows) in &by_witness {
                let bytes = witness_csv(rows, &digest)?;
                self.put(&format!("{w}.csv"), &bytes)?;
            }
        }
        let mut lines: Vec<SummaryLine> = rows
            .iter()
            .map(|r| SummaryLine {
                witness: r.witness.as_str().into(),
                t: Some(r.t),
                k: r.k,
                report: Some(r.report.clone()),
                error: None,
                exit_code: None,
                provenance: digest.clone(),
            })
            .collect();
        lines.extend(failures.iter().map(|f| SummaryLine {
            witness: f.witness.as_str().into(),
            t: f.t,
            k: f.k,
            report: None,
            error: Some(f.error.to_string()),
            exit_code: Some(f.error.exit_code()),
            provenance: digest.clone(),
        }));
        self.summary(&lines)?;
        if self.resolved.wants(Format::Svg) {
            for (name, svg) in plots(&by_witness) {
                self.put(&name, svg.as_bytes())?;
            }
        }
        Ok(())
    }

    pub fn simulate(&mut self, sims: &[Simulated]) -> Result<(), CliError> {
        let digest = self.prov.digest.clone();
        let mut lines = Vec::new();
        let mut table = csv::Writer::from_writer(Vec::new());
        table.write_record(["T", "energy", "var_x", "var_y", "var_z", "spectrum", "provenance"])?;
        for (i, s) in sims.iter().enumerate() {
            let name = format!("spectrum-{i:03}.csv");
            let mut grid = s.spectrum.clone();
            grid.notes.push(format!("provenance={digest}"));
            let mut bytes = Vec::new();
            grid.write_csv(&mut bytes)?;
            self.put(&name, &bytes)?;
            table.write_record([
                format_float(s.t),
                format_float(s.energy),
                format_float(s.variances[0]),
                format_float(s.variances[1]),
                format_float(s.variances[2]),
                name.clone(),
                digest.clone(),
            ])?;
            let mut report = WitnessReport::new("thermal", s.energy, qwitness_core::witness::Branch::General)
                .with_certification(qwitness_core::witness::Certification::Inapplicable)
                .with_temperature(s.t)
                .with_inputs(name);
            for (axis, v) in ["var_x", "var_y", "var_z"].iter().zip(s.variances) {
                report = report.with_extra(axis, v);
            }
            lines.push(SummaryLine {
                witness: "thermal".into(),
                t: Some(s.t),
                k: None,
                report: Some(report),
                error: None,
                exit_code: None,
                provenance: digest.clone(),
            });
        }
        if self.resolved.wants(Format::Csv) {
            let bytes = table.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
            self.put("thermal.csv", &bytes)?;
        }
        self.summary(&lines)?;
        if self.resolved.wants(Format::Svg) {
            let plot = Plot {
                title: "Internal energy".into(),
                x_label: "T / J".into(),
                y_label: "E / J".into(),
                series: vec![Series {
                    label: "E".into(),
                    points: sims.iter().map(|s| (s.t, s.energy)).collect(),
                }],
                threshold: None,
                staircase: false,
            };
            self.put("energy.svg", plot.render().as_bytes())?;
        }
        Ok(())
    }

    pub fn ingest(&mut self, res: &IngestResult) -> Result<(), CliError> {
        let digest = self.prov.digest.clone();
        if self.resolved.wants(Format::Csv) {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record([
                "k",
                "T",
                "f_q",
                "nqfi",
                "depth",
                "depth_lower",
                "uncertainty",
                "certified",
                "provenance",
            ])?;
            for r in &res.rows {
                let x = |key: &str| r.report.extra.get(key).copied().map(format_float).unwrap_or_default();
                let depth = |key: &str| {
                    r.report
                        .extra
                        .get(key)
                        .map(|d| format!("{}", *d as usize))
                        .unwrap_or_default()
                };
                w.write_record([
                    r.k.map(format_float).unwrap_or_default(),
                    format_float(r.t),
                    format_float(r.report.value),
                    x("nqfi"),
                    depth("depth"),
                    depth("depth_lower"),
                    x("uncertainty"),
                    r.report.certification.as_str().to_string(),
                    digest.clone(),
                ])?;
            }
            let bytes = w.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
            self.put("ingest-qfi.csv", &bytes)?;
        }
        let lines: Vec<SummaryLine> = res
            .rows
            .iter()
            .map(|r| SummaryLine {
                witness: "qfi".into(),
                t: Some(r.t),
                k: r.k,
                report: Some(r.report.clone()),
                error: None,
                exit_code: None,
                provenance: digest.clone(),
            })
            .collect();
        self.summary(&lines)?;
        if self.resolved.wants(Format::Svg) {
            let plot = Plot {
                title: "nQFI from spectrum".into(),
                x_label: "k".into(),
                y_label: "nQFI".into(),
                series: vec![Series {
                    label: "nQFI".into(),
                    points: res
                        .rows
                        .iter()
                        .filter_map(|r| Some((r.k?, *r.report.extra.get("nqfi")?)))
                        .collect(),
                }],
                threshold: Some(1.0),
                staircase: false,
            };
            self.put("ingest-qfi.svg", plot.render().as_bytes())?;
        }
        Ok(())
    }

    /// Plots and a text table rebuilt from an earlier `summary.jsonl`.
    pub fn report(&mut self, lines: &[SummaryLine]) -> Result<String, CliError> {
        let rows: Vec<Row> = lines
            .iter()
            .filter_map(|l| {
                let report = l.report.clone()?;
                let witness = WitnessKind::ALL.into_iter().find(|w| w.as_str() == l.witness)?;
                Some(Row {
                    witness,
                    t: l.t.unwrap_or(f64::NAN),
                    k: l.k,
                    report,
                })
            })
            .collect();
        let by_witness = group(&rows);
        let mut text = String::new();
        for (w, rows) in &by_witness {
            text.push_str(&format!("{w}\n"));
            text.push_str(&format!(
                "{:>10} {:>10} {:>14} {:>10} {}\n",
                "T", "k", "value", "bound", "certified"
            ));
            for r in rows {
                text.push_str(&format!(
                    "{:>10} {:>10} {:>14} {:>10} {}\n",
                    fixed(r.t),
                    r.k.map(fixed).unwrap_or_default(),
                    format!("{:.6e}", r.report.value),
                    r.report.bound.map(fixed).unwrap_or_default(),
                    r.report.certification.as_str()
                ));
            }
            text.push('\n');
        }
        let errors = lines.iter().filter(|l| l.error.is_some()).count();
        if errors > 0 {
            text.push_str(&format!("{errors} failed coordinates\n"));
        }
        self.put("report.txt", text.as_bytes())?;
        if self.resolved.wants(Format::Svg) {
            for (name, svg) in plots(&by_witness) {
                self.put(&name, svg.as_bytes())?;
            }
        }
        Ok(text)
    }
}

fn fixed(x: f64) -> String {
    format!("{x:.4}")
}

fn group(rows: &[Row]) -> BTreeMap<WitnessKind, Vec<&Row>> {
    let mut m: BTreeMap<WitnessKind, Vec<&Row>> = BTreeMap::new();
    for r in rows {
        m.entry(r.witness).or_default().push(r);
    }
    m
}

fn witness_csv(rows: &[&Row], digest: &str) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "T",
        "k",
        "pair",
        "value",
        "bound",
        "certified",
        "branch",
        "depth",
        "provenance",
    ])?;
    for r in rows {
        let rep = &r.report;
        w.write_record([
            format_float(r.t),
            r.k.map(format_float).unwrap_or_default(),
            rep.pair.map(|(i, j)| format!("{i}-{j}")).unwrap_or_default(),
            format_float(rep.value),
            rep.bound.map(format_float).unwrap_or_default(),
            rep.certification.as_str().to_string(),
            rep.branch.as_str().to_string(),
            rep.extra
                .get("depth")
                .map(|d| format!("{}", *d as usize))
                .unwrap_or_default(),
            digest.to_string(),
        ])?;
    }
    w.into_inner().map_err(|e| CliError::Io(e.into_error()))
}

/// Witness-versus-temperature curves, one series per wavevector, plus the
/// depth staircase for nQFI.
fn plots(by_witness: &BTreeMap<WitnessKind, Vec<&Row>>) -> Vec<(String, String)> {
    let mut out = Vec::new();
    for (w, rows) in by_witness {
        let mut series: Vec<(Option<u64>, Series)> = Vec::new();
        let mut depth: Vec<(Option<u64>, Series)> = Vec::new();
        for r in rows {
            let key = r.k.map(f64::to_bits);
            let label =
                r.k.map(|k| format!("k = {k:.4}"))
                    .unwrap_or_else(|| w.as_str().to_string());
            let idx = match series.iter().position(|(kk, _)| *kk == key) {
                Some(i) => i,
                None => {
                    series.push((
                        key,
                        Series {
                            label: label.clone(),
                            points: Vec::new(),
                        },
                    ));
                    depth.push((
                        key,
                        Series {
                            label,
                            points: Vec::new(),
                        },
                    ));
                    series.len() - 1
                }
            };
            series[idx].1.points.push((r.t, r.report.value));
            if let Some(d) = r.report.extra.get("depth") {
                depth[idx].1.points.push((r.t, *d));
            }
        }
        let bounds: Vec<f64> = rows.iter().filter_map(|r| r.report.bound).collect();
        let threshold = match bounds.first() {
            Some(&b) if bounds.iter().all(|&x| x == b) => Some(b),
            _ => None,
        };
        let plot = Plot {
            title: format!("{w} versus temperature"),
            x_label: "T / J".into(),
            y_label: rows.first().map(|r| r.report.witness.clone()).unwrap_or_default(),
            series: series.into_iter().map(|s| s.1).collect(),
            threshold,
            staircase: false,
        };
        out.push((format!("{w}.svg"), plot.render()));
        if *w == WitnessKind::Nqfi {
            let plot = Plot {
                title: "Certified entanglement depth".into(),
                x_label: "T / J".into(),
                y_label: "depth".into(),
                series: depth.into_iter().map(|s| s.1).collect(),
                threshold: None,
                staircase: true,
            };
            out.push(("nqfi-depth.svg".into(), plot.render()));
        }
    }
    out
}

pub fn read_summary(path: &Path) -> Result<Vec<SummaryLine>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| CliError::Data(format!("{} line {}: {e}", path.display(), i + 1)))
        })
        .collect()
}
