//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero on any failure.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rydberg_dress::couplings::{count_transitions, enumerate_couplings, reachable_origin, FieldKind, FieldSpec};
use rydberg_dress::dressing::{build_rf_hamiltonian, diagonalize, unique_eigenvalues};
use rydberg_dress::model::{build_basis, scenario_full, scenario_truncated, StateBasis};
use rydberg_dress::polarization::Polarization;
use rydberg_dress::spectrum::{default_grid, scan_spectrum, DecayModel, DriveConfig, ScanOptions, WeakProbeSolver};
use rydberg_dress::validate::{
    cross_check_drive, enumeration_diff, fine_structure_reduction, ladder_three_state, ladder_twelve_state,
    solver_agreement, symbol_identity_deviation, symbol_oracle_deviation, test_polarizations,
};

const OMEGA_RF: f64 = 200.0;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn basis(full: bool) -> StateBasis {
    let scenario = if full { scenario_full() } else { scenario_truncated() };
    build_basis(&scenario, Default::default()).expect("preset basis")
}

fn rf(pol: Polarization) -> FieldSpec {
    FieldSpec::rf(OMEGA_RF, pol).expect("valid field")
}

fn dressed(full: bool, pol: Polarization) -> Vec<f64> {
    let b = basis(full);
    diagonalize(&build_rf_hamiltonian::<f64>(&b, &rf(pol)).unwrap()).unwrap().eigenvalues
}

fn unique(full: bool, pol: Polarization) -> Vec<f64> {
    unique_eigenvalues(&dressed(full, pol), 1e-6 * OMEGA_RF).unwrap()
}

fn timed(limit: Duration, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut o = f();
    let elapsed = start.elapsed();
    o.detail = format!("{} [{:.3} s, limit {} s]", o.detail, elapsed.as_secs_f64(), limit.as_secs());
    o.passed &= elapsed < limit;
    o
}

fn transition_counts() -> Outcome {
    timed(Duration::from_secs(1), || {
        let full = basis(true);
        let raw = enumerate_couplings(&full, &rf(Polarization::Z)).unwrap().len();
        let truncated = basis(false);
        let set = enumerate_couplings(&truncated, &rf(Polarization::Z)).unwrap();
        let keep = reachable_origin(&truncated);
        let filtered = count_transitions(&set, Some(&keep));
        outcome(raw == 84 && filtered == 50, format!("full = {raw} (84), truncated reachable-origin = {filtered} (50)"))
    })
}

fn unique_counts() -> Outcome {
    timed(Duration::from_secs(1), || {
        let (f, t) = (unique(true, Polarization::Z).len(), unique(false, Polarization::Z).len());
        outcome(f == 5 && t == 25, format!("full = {f} (5), truncated = {t} (25)"))
    })
}

fn reduction() -> Outcome {
    let r = fine_structure_reduction(&basis(true), &rf(Polarization::Z), None).unwrap();
    let ratio_error = (r.positive_ratio - 6f64.sqrt() / 2.0).abs();
    outcome(
        r.max_deviation_mhz <= 1e-9 * OMEGA_RF && ratio_error <= 1e-9,
        format!("max |Δλ| = {:.2e} MHz, ratio error = {ratio_error:.2e}", r.max_deviation_mhz),
    )
}

fn rotation_invariance() -> Outcome {
    let reference = unique(true, Polarization::in_xz_plane(0.0));
    let mut worst = 0.0f64;
    let mut same_count = true;
    for angle in [30.0, 45.0, 90.0] {
        let u = unique(true, Polarization::in_xz_plane(angle));
        same_count &= u.len() == reference.len();
        worst = reference.iter().zip(&u).map(|(a, b)| (a - b).abs()).fold(worst, f64::max);
    }
    outcome(same_count && worst <= 1e-9 * OMEGA_RF, format!("{} unique values, max shift {worst:.2e} MHz", reference.len()))
}

fn reference_drive(rf_pol: Polarization) -> DriveConfig {
    DriveConfig::linear(0.5, 20.0, OMEGA_RF, rf_pol).unwrap()
}

fn single_threaded() -> ScanOptions {
    ScanOptions { jobs: Some(1), ..ScanOptions::default() }
}

fn co_polarized_spectrum() -> Outcome {
    timed(Duration::from_secs(60), || {
        let grid = default_grid();
        let step = grid[1] - grid[0];
        let s = scan_spectrum(&basis(true), &reference_drive(Polarization::Z), &DecayModel::default(), &grid, &single_threaded()).unwrap();
        let eigen: Vec<f64> = unique(true, Polarization::Z).into_iter().filter(|e| e.abs() > 1e-6 * OMEGA_RF).collect();
        let window = step.max(0.02 * OMEGA_RF);
        let mut matched = vec![false; eigen.len()];
        let mut aligned = true;
        for p in &s.peaks {
            match eigen.iter().position(|e| (e - p).abs() <= window) {
                Some(k) if !matched[k] => matched[k] = true,
                _ => aligned = false,
            }
        }
        let central = s.peaks.iter().any(|p| p.abs() <= step);
        outcome(
            s.peaks.len() == 4 && aligned && !central,
            format!("peaks {:?} vs eigenvalues {:?}", round(&s.peaks), round(&eigen)),
        )
    })
}

fn perpendicular_spectrum() -> Outcome {
    let grid = default_grid();
    let step = grid[1] - grid[0];
    let s = scan_spectrum(&basis(true), &reference_drive(Polarization::X), &DecayModel::default(), &grid, &ScanOptions::default()).unwrap();
    let central = s.peaks.iter().any(|p| p.abs() <= step);
    outcome(central, format!("peaks {:?}", round(&s.peaks)))
}

fn round(v: &[f64]) -> Vec<f64> {
    v.iter().map(|x| (x * 100.0).round() / 100.0).collect()
}

fn solver_cross_validation() -> Outcome {
    let decay = DecayModel::default();
    let grid = default_grid();
    let drive = cross_check_drive(&decay, 20.0, 40.0).unwrap();
    let three = solver_agreement(&ladder_three_state(), &drive, &decay, &grid).unwrap();
    let twelve = solver_agreement(&ladder_twelve_state(), &drive, &decay, &grid).unwrap();
    outcome(three < 0.01 && twelve < 0.01, format!("3-state {:.3}%, 12-state {:.3}%", 100.0 * three, 100.0 * twelve))
}

fn property_suites() -> Outcome {
    let oracle = symbol_oracle_deviation(8).unwrap();
    let identities = symbol_identity_deviation(8).unwrap();

    let mut chiral = 0.0f64;
    for full in [true, false] {
        for pol in test_polarizations() {
            let e = dressed(full, pol);
            let n = e.len();
            chiral = (0..n).map(|k| (e[k] + e[n - 1 - k]).abs()).fold(chiral, f64::max);
        }
    }

    let solver = WeakProbeSolver::new(&basis(true), &reference_drive(Polarization::Z), &DecayModel::default()).unwrap();
    let mut parity = 0.0f64;
    for d in default_grid().into_iter().filter(|&d| d > 0.0) {
        let (a, b) = (solver.response_at(d).unwrap().im, solver.response_at(-d).unwrap().im);
        parity = parity.max((a - b).abs() / a.abs().max(b.abs()));
    }

    let mut mismatched = 0;
    let mut amplitude = 0.0f64;
    for full in [true, false] {
        let b = basis(full);
        for kind in FieldKind::ALL {
            for pol in test_polarizations() {
                let d = enumeration_diff(&b, &FieldSpec::new(kind, 1.0, pol).unwrap()).unwrap();
                mismatched += d.mismatched;
                amplitude = amplitude.max(d.max_amplitude_error);
            }
        }
    }

    outcome(
        oracle <= 1e-12 && identities <= 1e-12 && chiral <= 1e-9 * OMEGA_RF && parity <= 1e-9 && mismatched == 0 && amplitude <= 1e-12,
        format!(
            "symbols {oracle:.1e}, identities {identities:.1e}, chiral {chiral:.1e} MHz, parity {parity:.1e}, enumeration {mismatched} mismatched / {amplitude:.1e}"
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("1 transition counts", transition_counts),
        ("2 unique dressed energies", unique_counts),
        ("3 fine-structure reduction", reduction),
        ("4 rotation invariance", rotation_invariance),
        ("5 co-polarized spectrum", co_polarized_spectrum),
        ("6 perpendicular spectrum", perpendicular_spectrum),
        ("7 solver cross-validation", solver_cross_validation),
        ("8 property suites", property_suites),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let o = run();
        println!("{} {name}: {}", if o.passed { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.passed);
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
