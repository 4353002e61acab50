//! Subcommand implementations.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use rydberg_dress::couplings::{count_transitions, enumerate_couplings, export_diagram, reachable_origin, FieldKind};
use rydberg_dress::dressing::{build_rf_hamiltonian, default_cluster_tolerance, diagonalize_with_tolerance, fine_structure_reference, DressedSummary};
use rydberg_dress::model::{build_basis, Role, StateBasis};
use rydberg_dress::spectrum::scan_spectrum;
use rydberg_dress::validate::{run_validation, CheckResult, Fault, ValidationOptions};

use crate::config::{Format, RunConfig};
use crate::{CliError, CliResult};

/// Unit convention recorded in every output.
pub const UNITS: &str = "frequencies in MHz (linear; angular = 2π × value)";

/// Resolved command-line context for one run.
#[derive(Clone, Debug)]
pub struct Invocation {
    pub config: RunConfig,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub jobs: Option<usize>,
}

/// What a command leaves for standard output, and whether it succeeded.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub stdout: String,
    pub passed: bool,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome { stdout, passed: true }
    }
}

impl Invocation {
    pub fn new(config: RunConfig) -> Self {
        let out = config.output.path.clone();
        let format = config.output.format;
        Invocation { config, out, format, jobs: None }
    }

    fn basis(&self) -> CliResult<StateBasis> {
        Ok(build_basis(&self.config.scenario()?, self.config.optical_polarizations())?)
    }

    /// Writes `text` to the output path, or hands it back for standard output.
    fn emit(&self, text: String) -> CliResult<String> {
        match &self.out {
            Some(path) => {
                write_file(path, &text)?;
                Ok(format!("wrote {}\n", path.display()))
            }
            None => Ok(text),
        }
    }
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| CliError::config(format!("cannot write {}: {e}", path.display())))
}

fn to_json<T: Serialize>(value: &T) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::config(format!("cannot serialize output: {e}")))?;
    s.push('\n');
    Ok(s)
}

fn describe(basis: &StateBasis, i: usize) -> String {
    let s = basis.state(i);
    format!("{} F={} mF={}", basis.scenario().level(s.role).label, s.f, s.m)
}

#[derive(Serialize)]
struct CouplingRow {
    from: usize,
    to: usize,
    from_label: String,
    to_label: String,
    q: i32,
    amplitude: f64,
    amplitude_im: f64,
    strength: f64,
    reachable_origin: bool,
}

#[derive(Serialize)]
struct FieldCount {
    field: FieldKind,
    count: usize,
    reachable_origin: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    couplings: Option<Vec<CouplingRow>>,
}

#[derive(Serialize)]
struct TransitionsDocument {
    units: &'static str,
    scenario: String,
    fields: Vec<FieldCount>,
}

/// Per-field coupling counts, raw and restricted to optically reachable
/// lower sublevels, optionally with the full listing.
pub fn transitions(inv: &Invocation, list: bool) -> CliResult<Outcome> {
    let basis = inv.basis()?;
    let keep = reachable_origin(&basis);
    let mut fields = Vec::new();
    for kind in FieldKind::ALL {
        if inv.config.fields.get(kind).is_none() {
            continue;
        }
        let set = enumerate_couplings(&basis, &inv.config.fields.spec(kind)?)?;
        let rows = list.then(|| {
            set.iter()
                .map(|c| CouplingRow {
                    from: c.from,
                    to: c.to,
                    from_label: describe(&basis, c.from),
                    to_label: describe(&basis, c.to),
                    q: c.q,
                    amplitude: c.amplitude.re,
                    amplitude_im: c.amplitude.im,
                    strength: c.strength,
                    reachable_origin: keep(c),
                })
                .collect()
        });
        fields.push(FieldCount { field: kind, count: set.len(), reachable_origin: count_transitions(&set, Some(&keep)), couplings: rows });
    }
    let doc = TransitionsDocument { units: UNITS, scenario: basis.scenario().name.clone(), fields };

    let text = match inv.format {
        Some(Format::Json) => to_json(&doc)?,
        Some(Format::Csv) => return Err(CliError::config("transitions writes text or json")),
        None => {
            let mut t = format!("# scenario {}; {UNITS}\n", doc.scenario);
            for f in &doc.fields {
                let _ = writeln!(t, "{}: {} (reachable-origin: {})", f.field, f.count, f.reachable_origin);
                for r in f.couplings.iter().flatten() {
                    let _ = writeln!(
                        t,
                        "  {} -> {}  q={:+}  amplitude={:.9}{}  strength={:.9}{}",
                        r.from_label,
                        r.to_label,
                        r.q,
                        r.amplitude,
                        if r.amplitude_im != 0.0 { format!("{:+.9}i", r.amplitude_im) } else { String::new() },
                        r.strength,
                        if r.reachable_origin { "" } else { "  (unreachable origin)" },
                    );
                }
            }
            t
        }
    };
    Ok(Outcome::ok(inv.emit(text)?))
}

#[derive(Serialize)]
struct FineStructureComparison {
    /// Fine-structure eigenvalues, each standing for `multiplicity` hyperfine ones.
    eigenvalues_mhz: Vec<f64>,
    multiplicity: usize,
    max_deviation_mhz: f64,
}

#[derive(Serialize)]
struct DressDocument {
    units: &'static str,
    scenario: String,
    rf_rabi_mhz: f64,
    rf_polarization: [f64; 3],
    rf_detuning_mhz: f64,
    #[serde(flatten)]
    dressed: DressedSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    fine_structure: Option<FineStructureComparison>,
}

/// Diagonalizes the RF Hamiltonian of the Rydberg pair.
pub fn dress(inv: &Invocation) -> CliResult<Outcome> {
    let basis = inv.basis()?;
    let scenario = basis.scenario();
    let rf = inv.config.fields.spec(FieldKind::Rf)?;
    let detuning = inv.config.drive.rf_detuning_mhz;
    let h = build_rf_hamiltonian::<f64>(&basis, &rf)?.with_rf_detuning(detuning);
    let tolerance = inv.config.cluster_tolerance_mhz.unwrap_or_else(|| default_cluster_tolerance(rf.rabi_mhz));
    let dressed = diagonalize_with_tolerance(&h, tolerance)?;

    let degenerate = [Role::RydbergLower, Role::RydbergUpper]
        .iter()
        .all(|&r| scenario.included(r).iter().all(|&f| scenario.energy_offset_mhz(r, f) == 0.0));
    let fine_structure = if scenario.rydberg_manifolds_complete() && degenerate && detuning == 0.0 {
        let reference = fine_structure_reference(scenario.j(Role::RydbergLower), scenario.j(Role::RydbergUpper), &rf)?;
        let multiplicity = scenario.nuclear_spin.multiplicity() as usize;
        let mut expanded: Vec<f64> = reference.iter().flat_map(|&e| std::iter::repeat(e).take(multiplicity)).collect();
        expanded.sort_by(f64::total_cmp);
        let max_deviation_mhz = expanded.iter().zip(&dressed.eigenvalues).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        Some(FineStructureComparison { eigenvalues_mhz: reference, multiplicity, max_deviation_mhz })
    } else {
        None
    };

    let doc = DressDocument {
        units: UNITS,
        scenario: scenario.name.clone(),
        rf_rabi_mhz: rf.rabi_mhz,
        rf_polarization: rf.polarization.vector(),
        rf_detuning_mhz: detuning,
        dressed: dressed.summary(),
        fine_structure,
    };
    let text = match inv.format {
        None | Some(Format::Json) => to_json(&doc)?,
        Some(Format::Csv) => {
            let mut t = format!("# scenario {}; unique {}; {UNITS}\n", doc.scenario, doc.dressed.unique_count);
            t.push_str("eigenvalue_mhz\n");
            for e in &doc.dressed.eigenvalues_mhz {
                let _ = writeln!(t, "{e}");
            }
            t
        }
    };
    Ok(Outcome::ok(inv.emit(text)?))
}

#[derive(Serialize)]
struct SpectrumPeaks<'a> {
    units: &'static str,
    scenario: String,
    peaks_mhz: &'a [f64],
    dressed_unique_eigenvalues_mhz: Vec<f64>,
    absorption_scale: f64,
    optical_depth: f64,
    prominence: f64,
}

#[derive(Serialize)]
struct SpectrumDocument<'a> {
    #[serde(flatten)]
    peaks: SpectrumPeaks<'a>,
    detuning_mhz: &'a [f64],
    absorption: &'a [f64],
    transmission: &'a [f64],
}

/// Path of the peaks sidecar written next to a spectrum file.
pub fn peaks_path(out: &Path) -> PathBuf {
    out.with_extension("peaks.json")
}

/// Scans the coupling detuning and writes the transmission series plus the
/// detected peaks and dressed eigenvalues.
pub fn spectrum(inv: &Invocation) -> CliResult<Outcome> {
    let basis = inv.basis()?;
    let cfg = &inv.config;
    let drive = cfg.drive()?;
    let series = scan_spectrum(&basis, &drive, &cfg.decay, &cfg.grid()?, &cfg.scan_options(inv.jobs))?;

    let h = build_rf_hamiltonian::<f64>(&basis, &drive.rf)?.with_rf_detuning(drive.rf_detuning_mhz);
    let tolerance = cfg.cluster_tolerance_mhz.unwrap_or_else(|| default_cluster_tolerance(drive.rf.rabi_mhz));
    let dressed = diagonalize_with_tolerance(&h, tolerance)?;

    let peaks = SpectrumPeaks {
        units: UNITS,
        scenario: basis.scenario().name.clone(),
        peaks_mhz: &series.peaks,
        dressed_unique_eigenvalues_mhz: dressed.unique.clone(),
        absorption_scale: series.absorption_scale,
        optical_depth: series.optical_depth,
        prominence: cfg.scan.prominence,
    };

    if inv.format == Some(Format::Json) {
        let doc = SpectrumDocument {
            peaks,
            detuning_mhz: &series.detunings,
            absorption: &series.absorption,
            transmission: &series.transmission,
        };
        return Ok(Outcome::ok(inv.emit(to_json(&doc)?)?));
    }

    let mut body = format!(
        "# scenario {}; probe {} MHz, coupling {} MHz, RF {} MHz; absorption scale {:e}; optical depth {}; {UNITS}\n",
        peaks.scenario, drive.probe.rabi_mhz, drive.coupling.rabi_mhz, drive.rf.rabi_mhz, series.absorption_scale, series.optical_depth
    );
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_error = |e: csv::Error| CliError::config(format!("cannot format spectrum: {e}"));
    w.write_record(["detuning_mhz", "absorption", "transmission"]).map_err(csv_error)?;
    for k in 0..series.detunings.len() {
        w.serialize((series.detunings[k], series.absorption[k], series.transmission[k])).map_err(csv_error)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::config(format!("cannot format spectrum: {e}")))?;
    body.push_str(&String::from_utf8_lossy(&bytes));

    let mut stdout = String::new();
    match &inv.out {
        Some(path) => {
            write_file(path, &body)?;
            let sidecar = peaks_path(path);
            write_file(&sidecar, &to_json(&peaks)?)?;
            let _ = writeln!(stdout, "wrote {} and {}", path.display(), sidecar.display());
            let _ = writeln!(stdout, "peaks (MHz): {:?}", series.peaks);
        }
        None => stdout.push_str(&body),
    }
    Ok(Outcome::ok(stdout))
}

#[derive(Serialize)]
struct DiagramDocument {
    units: &'static str,
    #[serde(flatten)]
    graph: rydberg_dress::couplings::DiagramGraph,
}

/// Transition-diagram graph for every configured field.
pub fn diagram(inv: &Invocation) -> CliResult<Outcome> {
    if inv.format == Some(Format::Csv) {
        return Err(CliError::config("the diagram is written as json only"));
    }
    let basis = inv.basis()?;
    let mut sets = Vec::new();
    for kind in FieldKind::ALL {
        if inv.config.fields.get(kind).is_some() {
            sets.push(enumerate_couplings(&basis, &inv.config.fields.spec(kind)?)?);
        }
    }
    let doc = DiagramDocument { units: UNITS, graph: export_diagram(&basis, &sets) };
    Ok(Outcome::ok(inv.emit(to_json(&doc)?)?))
}

#[derive(Serialize)]
struct ValidationDocument<'a> {
    passed: bool,
    fault: Option<Fault>,
    checks: &'a [CheckResult],
}

/// Runs the oracle suite; the outcome fails when any check does.
pub fn validate(inv: &Invocation, fault: Option<Fault>) -> CliResult<Outcome> {
    let options = ValidationOptions { tolerances: inv.config.validate, fault, ..ValidationOptions::default() };
    let report = run_validation(&options)?;
    let passed = report.all_passed();
    let text = match inv.format {
        Some(Format::Json) => to_json(&ValidationDocument { passed, fault, checks: &report.checks })?,
        Some(Format::Csv) => return Err(CliError::config("validate writes text or json")),
        None => {
            let mut t = String::new();
            for c in &report.checks {
                let _ = writeln!(t, "{c}");
            }
            let failed = report.checks.iter().filter(|c| !c.passed).count();
            let _ = writeln!(t, "{} of {} checks passed", report.checks.len() - failed, report.checks.len());
            t
        }
    };
    Ok(Outcome { stdout: inv.emit(text)?, passed })
}

/// The effective configuration as TOML.
pub fn show_config(inv: &Invocation) -> CliResult<Outcome> {
    inv.config.validate()?;
    Ok(Outcome::ok(inv.emit(inv.config.to_toml()?)?))
}
