//! Probe transmission of the ladder versus coupling-laser detuning.
//!
//! The workhorse is a weak-probe linear-response solver: first order in the
//! probe, exact in the coupling and RF fields. A dense Lindblad steady-state
//! solver ([`lindblad`]) serves as an oracle on small systems.
//!
//! All inputs are linear frequencies in MHz. The factor `2π` is applied once,
//! when the angular-frequency matrices are assembled. The rotating-frame
//! energy of a state is its hyperfine offset minus the cumulative detuning of
//! the fields below it: `0` (ground), `-Δp`, `-(Δp + Δc)`, `-(Δp + Δc + Δrf)`.

pub mod lindblad;
pub mod peaks;

use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::couplings::{enumerate_couplings, FieldKind, FieldSpec};
use crate::error::{invalid, Error, Result};
use crate::linalg::{Lu, Matrix};
use crate::model::{Role, StateBasis};
use crate::polarization::Polarization;
use crate::Complex64;

pub use lindblad::{lindblad_susceptibility, steady_state_lindblad, DensityMatrix, MAX_LINDBLAD_STATES};
pub use peaks::find_peaks;

/// Default peak prominence, as a fraction of the transmission range.
pub const DEFAULT_PROMINENCE: f64 = 0.02;

/// Natural linewidths (MHz, linear frequency) of the excited levels plus an
/// extra pure dephasing applied to every excited sublevel.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecayModel {
    pub intermediate_mhz: f64,
    pub rydberg_lower_mhz: f64,
    pub rydberg_upper_mhz: f64,
    pub extra_dephasing_mhz: f64,
}

impl Default for DecayModel {
    /// 6P3/2 natural linewidth and a narrow Rydberg linewidth.
    fn default() -> Self {
        DecayModel { intermediate_mhz: 5.2, rydberg_lower_mhz: 0.01, rydberg_upper_mhz: 0.01, extra_dephasing_mhz: 0.0 }
    }
}

impl DecayModel {
    pub fn gamma_mhz(&self, role: Role) -> f64 {
        match role {
            Role::Ground => 0.0,
            Role::Intermediate => self.intermediate_mhz,
            Role::RydbergLower => self.rydberg_lower_mhz,
            Role::RydbergUpper => self.rydberg_upper_mhz,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let rates = [
            ("intermediate", self.intermediate_mhz),
            ("rydberg_lower", self.rydberg_lower_mhz),
            ("rydberg_upper", self.rydberg_upper_mhz),
            ("extra_dephasing", self.extra_dephasing_mhz),
        ];
        for (name, rate) in rates {
            if !(rate >= 0.0 && rate.is_finite()) {
                return Err(invalid(format!("{name} rate {rate} MHz must be finite and non-negative")));
            }
        }
        Ok(())
    }
}

/// The three fields, their detunings and the ground-state populations.
#[derive(Clone, Debug, PartialEq)]
pub struct DriveConfig {
    pub probe: FieldSpec,
    pub coupling: FieldSpec,
    pub rf: FieldSpec,
    pub probe_detuning_mhz: f64,
    pub coupling_detuning_mhz: f64,
    pub rf_detuning_mhz: f64,
    /// One weight per ground sublevel in basis order; `None` is uniform.
    pub ground_populations: Option<Vec<f64>>,
}

impl DriveConfig {
    pub fn new(probe: FieldSpec, coupling: FieldSpec, rf: FieldSpec) -> Self {
        DriveConfig {
            probe,
            coupling,
            rf,
            probe_detuning_mhz: 0.0,
            coupling_detuning_mhz: 0.0,
            rf_detuning_mhz: 0.0,
            ground_populations: None,
        }
    }

    /// Probe and coupling along `z`, RF along `rf_polarization`.
    pub fn linear(probe_mhz: f64, coupling_mhz: f64, rf_mhz: f64, rf_polarization: Polarization) -> Result<Self> {
        Ok(Self::new(
            FieldSpec::probe(probe_mhz, Polarization::Z)?,
            FieldSpec::coupling(coupling_mhz, Polarization::Z)?,
            FieldSpec::rf(rf_mhz, rf_polarization)?,
        ))
    }

    pub fn with_coupling_detuning(mut self, detuning_mhz: f64) -> Self {
        self.coupling_detuning_mhz = detuning_mhz;
        self
    }

    /// Copy with the coupling and RF fields switched off.
    pub fn probe_only(&self) -> Self {
        DriveConfig {
            coupling: self.coupling.with_rabi(0.0),
            rf: self.rf.with_rabi(0.0),
            ..self.clone()
        }
    }

    pub fn validate(&self, basis: &StateBasis) -> Result<()> {
        for (field, kind) in [(&self.probe, FieldKind::Probe), (&self.coupling, FieldKind::Coupling), (&self.rf, FieldKind::Rf)] {
            if field.kind != kind || field.connects != kind.default_roles() {
                return Err(invalid(format!(
                    "the {kind} slot needs a {kind} field from {} to {}",
                    kind.default_roles().0,
                    kind.default_roles().1
                )));
            }
        }
        for d in [self.probe_detuning_mhz, self.coupling_detuning_mhz, self.rf_detuning_mhz] {
            if !d.is_finite() {
                return Err(invalid(format!("detuning {d} MHz is not finite")));
            }
        }
        self.populations(basis).map(|_| ())
    }

    /// Ground populations in basis order, defaulting to uniform.
    pub fn populations(&self, basis: &StateBasis) -> Result<Vec<f64>> {
        let n = basis.count(Role::Ground);
        match &self.ground_populations {
            None => Ok(vec![1.0 / n as f64; n]),
            Some(p) => {
                if p.len() != n {
                    return Err(invalid(format!("{} ground populations given for {n} ground sublevels", p.len())));
                }
                if p.iter().any(|&w| !(w >= 0.0 && w.is_finite())) {
                    return Err(invalid("ground populations must be finite and non-negative"));
                }
                let total: f64 = p.iter().sum();
                if (total - 1.0).abs() > 1e-9 {
                    return Err(invalid(format!("ground populations sum to {total}, not 1")));
                }
                Ok(p.clone())
            }
        }
    }
}

/// Everything about a drive that does not depend on the coupling detuning,
/// in angular units (rad/µs).
#[derive(Clone, Debug)]
pub(crate) struct Ladder {
    roles: Vec<Role>,
    /// Hyperfine offsets, MHz.
    offsets: Vec<f64>,
    ground: Vec<usize>,
    excited: Vec<usize>,
    /// `(ground, excited, unit probe amplitude)`.
    probe: Vec<(usize, usize, Complex64)>,
    /// `(lower, upper, H[upper, lower])`, angular.
    dressing: Vec<(usize, usize, Complex64)>,
    probe_rabi: f64,
    decay: DecayModel,
}

impl Ladder {
    pub(crate) fn new(basis: &StateBasis, drive: &DriveConfig, decay: &DecayModel) -> Result<Self> {
        drive.validate(basis)?;
        decay.validate()?;
        let roles: Vec<Role> = basis.states().iter().map(|s| s.role).collect();
        let offsets = (0..basis.len()).map(|i| basis.energy_offset_mhz(i)).collect();
        let probe = enumerate_couplings(basis, &drive.probe)?
            .iter()
            .map(|c| (c.from, c.to, c.amplitude))
            .collect();
        let mut dressing = Vec::new();
        for field in [&drive.coupling, &drive.rf] {
            if field.rabi_mhz == 0.0 {
                continue;
            }
            let half = TAU * field.rabi_mhz / 2.0;
            dressing.extend(enumerate_couplings(basis, field)?.iter().map(|c| (c.from, c.to, c.amplitude * half)));
        }
        Ok(Ladder {
            ground: basis.indices_of(Role::Ground),
            excited: (0..basis.len()).filter(|&i| roles[i] != Role::Ground).collect(),
            roles,
            offsets,
            probe,
            dressing,
            probe_rabi: drive.probe.rabi_mhz,
            decay: *decay,
        })
    }

    pub(crate) fn len(&self) -> usize {
        self.roles.len()
    }

    /// Rotating-frame energy of state `i`, angular.
    fn energy(&self, i: usize, d: &Detunings) -> f64 {
        let shift = match self.roles[i] {
            Role::Ground => 0.0,
            Role::Intermediate => d.probe,
            Role::RydbergLower => d.probe + d.coupling,
            Role::RydbergUpper => d.probe + d.coupling + d.rf,
        };
        TAU * (self.offsets[i] - shift)
    }

    /// Coherence damping rate of state `i` against the ground manifold, angular.
    fn damping(&self, i: usize) -> f64 {
        match self.roles[i] {
            Role::Ground => 0.0,
            role => TAU * (self.decay.gamma_mhz(role) / 2.0 + self.decay.extra_dephasing_mhz),
        }
    }

    /// Closed-system Hamiltonian including the probe, angular.
    pub(crate) fn hamiltonian(&self, d: &Detunings) -> Matrix<f64> {
        let n = self.len();
        let mut h = Matrix::zeros(n, n);
        for i in 0..n {
            h[(i, i)] = Complex64::new(self.energy(i, d), 0.0);
        }
        let half_probe = TAU * self.probe_rabi / 2.0;
        let probe = self.probe.iter().map(|&(g, e, a)| (g, e, a * half_probe));
        for (l, u, z) in probe.chain(self.dressing.iter().copied()) {
            h[(u, l)] += z;
            h[(l, u)] += z.conj();
        }
        h
    }

    /// `-Σ_g p_g Σ_e conj(u_eg) y_e` with `H_eff y = -u_g`.
    pub(crate) fn weak_probe(&self, d: &Detunings, populations: &[f64]) -> Result<Complex64> {
        let ne = self.excited.len();
        let mut position = vec![usize::MAX; self.len()];
        for (k, &i) in self.excited.iter().enumerate() {
            position[i] = k;
        }
        let mut m = Matrix::zeros(ne, ne);
        for (k, &i) in self.excited.iter().enumerate() {
            m[(k, k)] = Complex64::new(self.energy(i, d), -self.damping(i));
        }
        for &(l, u, z) in &self.dressing {
            let (pl, pu) = (position[l], position[u]);
            if pl == usize::MAX || pu == usize::MAX {
                continue;
            }
            m[(pu, pl)] += z;
            m[(pl, pu)] += z.conj();
        }
        let lu = Lu::factor(&m).map_err(|e| match e {
            Error::SingularSystem(msg) => Error::SingularSystem(format!(
                "weak-probe matrix is singular ({msg}); give the excited levels a nonzero decay rate"
            )),
            other => other,
        })?;

        let mut chi = Complex64::new(0.0, 0.0);
        for (slot, &g) in self.ground.iter().enumerate() {
            let p = populations[slot];
            if p == 0.0 {
                continue;
            }
            let mut rhs = vec![Complex64::new(0.0, 0.0); ne];
            for &(_, e, a) in self.probe.iter().filter(|c| c.0 == g) {
                rhs[position[e]] -= a;
            }
            if rhs.iter().all(|z| *z == Complex64::new(0.0, 0.0)) {
                continue;
            }
            let y = lu.solve(&rhs);
            let overlap: Complex64 = rhs.iter().zip(&y).map(|(b, y)| b.conj() * y).sum();
            // rhs = -u, so conj(u)·y = -overlap.
            chi += overlap * p;
        }
        Ok(chi)
    }
}

/// Detunings in MHz.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Detunings {
    pub probe: f64,
    pub coupling: f64,
    pub rf: f64,
}

impl Detunings {
    pub(crate) fn of(drive: &DriveConfig) -> Self {
        Detunings { probe: drive.probe_detuning_mhz, coupling: drive.coupling_detuning_mhz, rf: drive.rf_detuning_mhz }
    }
}

/// Weak-probe solver prepared for repeated evaluation at different coupling
/// detunings.
#[derive(Clone, Debug)]
pub struct WeakProbeSolver {
    ladder: Ladder,
    detunings: Detunings,
    populations: Vec<f64>,
}

impl WeakProbeSolver {
    pub fn new(basis: &StateBasis, drive: &DriveConfig, decay: &DecayModel) -> Result<Self> {
        Ok(WeakProbeSolver {
            ladder: Ladder::new(basis, drive, decay)?,
            detunings: Detunings::of(drive),
            populations: drive.populations(basis)?,
        })
    }

    /// Susceptibility at the drive's own detunings.
    pub fn response(&self) -> Result<Complex64> {
        self.ladder.weak_probe(&self.detunings, &self.populations)
    }

    /// Susceptibility with the coupling detuning replaced by `detuning_mhz`.
    pub fn response_at(&self, detuning_mhz: f64) -> Result<Complex64> {
        let d = Detunings { coupling: detuning_mhz, ..self.detunings };
        self.ladder.weak_probe(&d, &self.populations)
    }

    /// Susceptibility with explicit (not necessarily normalized) ground
    /// populations in basis order.
    pub fn response_with_populations(&self, populations: &[f64]) -> Result<Complex64> {
        if populations.len() != self.populations.len() {
            return Err(invalid("population vector length differs from the ground manifold"));
        }
        self.ladder.weak_probe(&self.detunings, populations)
    }
}

/// Probe susceptibility to first order in the probe field.
///
/// Arbitrary units, independent of the probe Rabi frequency; `Im χ > 0` is
/// absorption. Valid while the probe Rabi frequency is well below the
/// intermediate linewidth, which is not enforced.
pub fn weak_probe_response(basis: &StateBasis, drive: &DriveConfig, decay: &DecayModel) -> Result<Complex64> {
    WeakProbeSolver::new(basis, drive, decay)?.response()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanOptions {
    pub optical_depth: f64,
    pub prominence: f64,
    /// Worker threads; `None` uses the global pool.
    pub jobs: Option<usize>,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions { optical_depth: 1.0, prominence: DEFAULT_PROMINENCE, jobs: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumSeries {
    /// Coupling detunings, MHz.
    pub detunings: Vec<f64>,
    /// `Im χ`, same units as [`weak_probe_response`].
    pub absorption: Vec<f64>,
    /// `exp(-OD · absorption / absorption_scale)`.
    pub transmission: Vec<f64>,
    /// Probe absorption with the coupling and RF fields off.
    pub absorption_scale: f64,
    pub optical_depth: f64,
    /// Detunings of transmission maxima, MHz.
    pub peaks: Vec<f64>,
}

/// `n` evenly spaced points from `start` to `stop` inclusive.
pub fn linear_grid(start: f64, stop: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..n).map(|k| start + (stop - start) * k as f64 / (n - 1) as f64).collect(),
    }
}

/// Default scan: ±300 MHz in 1 MHz steps.
pub fn default_grid() -> Vec<f64> {
    linear_grid(-300.0, 300.0, 601)
}

/// Scans the coupling detuning over `grid` at the drive's probe and RF
/// detunings.
///
/// Grid points are solved independently, in parallel when a pool is
/// available, and assembled in grid order, so the result does not depend on
/// the number of threads.
pub fn scan_spectrum(
    basis: &StateBasis,
    drive: &DriveConfig,
    decay: &DecayModel,
    grid: &[f64],
    options: &ScanOptions,
) -> Result<SpectrumSeries> {
    if grid.is_empty() {
        return Err(invalid("detuning grid is empty"));
    }
    if grid.iter().any(|d| !d.is_finite()) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("detuning grid must be finite and strictly increasing"));
    }
    if !(options.optical_depth >= 0.0 && options.optical_depth.is_finite()) {
        return Err(invalid(format!("optical depth {} must be finite and non-negative", options.optical_depth)));
    }
    if !(options.prominence > 0.0 && options.prominence < 1.0) {
        return Err(invalid(format!("peak prominence {} must lie in (0, 1)", options.prominence)));
    }
    if options.jobs == Some(0) {
        return Err(invalid("jobs must be at least 1"));
    }

    let solver = WeakProbeSolver::new(basis, drive, decay)?;
    let scale = WeakProbeSolver::new(basis, &drive.probe_only(), decay)?.response()?.im;
    if !(scale > 0.0) {
        return Err(invalid("the probe alone is not absorbed; check the probe polarization and ground populations"));
    }

    let evaluate = || -> Result<Vec<f64>> {
        grid.par_iter().map(|&d| solver.response_at(d).map(|chi| chi.im)).collect()
    };
    let absorption = match options.jobs {
        None => evaluate()?,
        Some(jobs) => rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| invalid(format!("cannot start {jobs} worker threads: {e}")))?
            .install(evaluate)?,
    };

    let transmission: Vec<f64> = absorption.iter().map(|a| (-options.optical_depth * a / scale).exp()).collect();
    let peaks = find_peaks(grid, &transmission, options.prominence);
    Ok(SpectrumSeries {
        detunings: grid.to_vec(),
        absorption,
        transmission,
        absorption_scale: scale,
        optical_depth: options.optical_depth,
        peaks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_basis, scenario_full, scenario_truncated, Sublevel};
    use crate::HalfInteger;

    fn ladder3() -> StateBasis {
        let s = |role, f, m| Sublevel { role, f: HalfInteger::integer(f), m: HalfInteger::integer(m) };
        StateBasis::from_states(
            scenario_full(),
            vec![s(Role::Ground, 4, 0), s(Role::Intermediate, 5, 0), s(Role::RydbergLower, 6, 0)],
        )
        .unwrap()
    }

    fn drive(p: f64, c: f64, rf: f64) -> DriveConfig {
        DriveConfig::linear(p, c, rf, Polarization::Z).unwrap()
    }

    #[test]
    fn two_level_lorentzian() {
        let b = ladder3();
        let decay = DecayModel::default();
        let on = weak_probe_response(&b, &drive(0.5, 0.0, 0.0), &decay).unwrap();
        assert!(on.im > 0.0);
        for dp in [-10.0, -2.6, 2.6, 10.0] {
            let mut d = drive(0.5, 0.0, 0.0);
            d.probe_detuning_mhz = dp;
            let off = weak_probe_response(&b, &d, &decay).unwrap();
            let lorentz = 1.0 / (1.0 + (2.0 * dp / decay.intermediate_mhz).powi(2));
            assert!((off.im / on.im - lorentz).abs() < 1e-12);
        }
    }

    #[test]
    fn eit_window_at_zero() {
        let b = ladder3();
        let decay = DecayModel::default();
        let grid = linear_grid(-40.0, 40.0, 161);
        let s = scan_spectrum(&b, &drive(0.5, 20.0, 0.0), &decay, &grid, &ScanOptions::default()).unwrap();
        assert_eq!(s.peaks.len(), 1);
        assert!(s.peaks[0].abs() < 0.5);
        assert!(s.transmission.iter().all(|&t| t > 0.0 && t <= 1.0));
    }

    #[test]
    fn independent_of_probe_strength() {
        let b = build_basis(&scenario_truncated(), Default::default()).unwrap();
        let decay = DecayModel::default();
        let a = weak_probe_response(&b, &drive(0.5, 20.0, 200.0).with_coupling_detuning(25.0), &decay).unwrap();
        let h = weak_probe_response(&b, &drive(0.25, 20.0, 200.0).with_coupling_detuning(25.0), &decay).unwrap();
        assert!((a - h).norm() <= 1e-9 * a.norm());
    }

    #[test]
    fn absorption_even_in_coupling_detuning() {
        let b = build_basis(&scenario_full(), Default::default()).unwrap();
        let solver = WeakProbeSolver::new(&b, &drive(0.5, 20.0, 200.0), &DecayModel::default()).unwrap();
        for d in [3.0, 26.0, 31.6, 117.0] {
            let (p, m) = (solver.response_at(d).unwrap().im, solver.response_at(-d).unwrap().im);
            assert!((p - m).abs() <= 1e-9 * p.abs().max(m.abs()), "{d}: {p} vs {m}");
        }
    }

    #[test]
    fn zero_decay_is_singular() {
        let b = ladder3();
        let none = DecayModel { intermediate_mhz: 0.0, rydberg_lower_mhz: 0.0, rydberg_upper_mhz: 0.0, extra_dephasing_mhz: 0.0 };
        let err = weak_probe_response(&b, &drive(0.5, 0.0, 0.0), &none).unwrap_err();
        assert!(matches!(err, Error::SingularSystem(_)));
    }

    #[test]
    fn scan_rejects_bad_grids() {
        let b = ladder3();
        let d = drive(0.5, 20.0, 0.0);
        let decay = DecayModel::default();
        let o = ScanOptions::default();
        assert!(matches!(scan_spectrum(&b, &d, &decay, &[], &o), Err(Error::InvalidArgument(_))));
        assert!(scan_spectrum(&b, &d, &decay, &[1.0, 1.0], &o).is_err());
        assert!(scan_spectrum(&b, &d, &decay, &[0.0], &ScanOptions { prominence: 1.0, ..o }).is_err());
    }

    #[test]
    fn populations_checked() {
        let b = ladder3();
        let mut d = drive(0.5, 0.0, 0.0);
        d.ground_populations = Some(vec![0.5]);
        assert!(weak_probe_response(&b, &d, &DecayModel::default()).is_err());
        d.ground_populations = Some(vec![1.0, 0.0]);
        assert!(weak_probe_response(&b, &d, &DecayModel::default()).is_err());
    }

    #[test]
    fn parallel_scan_is_bitwise_stable() {
        let b = build_basis(&scenario_truncated(), Default::default()).unwrap();
        let grid = linear_grid(-60.0, 60.0, 41);
        let d = drive(0.5, 20.0, 200.0);
        let decay = DecayModel::default();
        let one = scan_spectrum(&b, &d, &decay, &grid, &ScanOptions { jobs: Some(1), ..Default::default() }).unwrap();
        let four = scan_spectrum(&b, &d, &decay, &grid, &ScanOptions { jobs: Some(4), ..Default::default() }).unwrap();
        assert_eq!(one, four);
    }
}
