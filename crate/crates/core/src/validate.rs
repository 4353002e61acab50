//! Self-validation against independent oracles.
//!
//! * Wigner symbols against a direct Racah sum in exact big-integer
//!   arithmetic, plus their symmetry and orthogonality identities.
//! * Coupling enumeration against an all-pairs scan that evaluates the
//!   angular factor from the exact symbols.
//! * The full hyperfine RF spectrum against the fine-structure `J = 5/2 ↔ 3/2`
//!   problem solved block by block in closed form.
//! * The weak-probe solver against the Lindblad steady state on small ladders.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::angular::{wigner3j, wigner6j, HalfInteger};
use crate::couplings::{enumerate_couplings, FieldKind, FieldSpec};
use crate::dressing::{build_rf_hamiltonian, diagonalize, unique_eigenvalues};
use crate::error::{invalid, Result};
use crate::model::{build_basis, preset, FineLevel, Role, Scenario, StateBasis};
use crate::polarization::Polarization;
use crate::spectrum::{lindblad_susceptibility, steady_state_lindblad, DecayModel, DriveConfig, WeakProbeSolver};

/// Exact Racah-sum evaluation of the Wigner symbols. Arguments are
/// twice-values; results are exact up to the final square root.
pub mod oracle {
    use super::*;

    fn factorial(n: i32) -> BigUint {
        (1..=n.max(0) as u32).fold(BigUint::one(), |acc, k| acc * k)
    }

    fn f(twice: i32) -> BigUint {
        debug_assert!(twice >= 0 && twice % 2 == 0);
        factorial(twice / 2)
    }

    fn triad(a: i32, b: i32, c: i32) -> bool {
        c >= (a - b).abs() && c <= a + b && (a + b + c) % 2 == 0
    }

    /// `(num, den)` with `Δ(abc) = num / den`.
    fn delta(a: i32, b: i32, c: i32) -> (BigUint, BigUint) {
        (f(a + b - c) * f(a - b + c) * f(-a + b + c), f(a + b + c + 2))
    }

    /// `sign(s) · sqrt(s² · r_num / r_den)` for the exact sum `s = s_num / s_den`.
    fn finish(s_num: BigInt, s_den: BigUint, r_num: BigUint, r_den: BigUint) -> f64 {
        if s_num.is_zero() {
            return 0.0;
        }
        let sign = if s_num.is_negative() { -1.0 } else { 1.0 };
        let mag = s_num.magnitude();
        let num = mag * mag * r_num;
        let den = &s_den * &s_den * r_den;
        sign * ratio(&num, &den).sqrt()
    }

    /// `num / den` rounded once, for operands of any size.
    fn ratio(num: &BigUint, den: &BigUint) -> f64 {
        let shift = (num.bits() as i64 - den.bits() as i64 - 64).max(0) as u64;
        let lift = (den.bits() as i64 - num.bits() as i64 + 64).max(0) as u64;
        let q = (num << lift) / (den << shift);
        q.to_f64().unwrap_or(f64::INFINITY) * 2f64.powi(shift as i32 - lift as i32)
    }

    fn accumulate(terms: impl Iterator<Item = (bool, BigUint, BigUint)>) -> (BigInt, BigUint) {
        // Σ ± n_k / d_k over a common denominator.
        let mut num = BigInt::zero();
        let mut den = BigUint::one();
        for (negative, n, d) in terms {
            let t = BigInt::from(n * &den);
            num = num * BigInt::from(d.clone()) + if negative { -t } else { t };
            den *= d;
        }
        (num, den)
    }

    pub fn wigner3j_exact(j1: i32, j2: i32, j3: i32, m1: i32, m2: i32, m3: i32) -> f64 {
        let ok = [(j1, m1), (j2, m2), (j3, m3)]
            .iter()
            .all(|&(j, m)| j >= 0 && m.abs() <= j && (j + m) % 2 == 0);
        if !ok || m1 + m2 + m3 != 0 || !triad(j1, j2, j3) {
            return 0.0;
        }
        let (dn, dd) = delta(j1, j2, j3);
        let r_num = dn * f(j1 + m1) * f(j1 - m1) * f(j2 + m2) * f(j2 - m2) * f(j3 + m3) * f(j3 - m3);
        let kmin = 0.max(j2 - j3 - m1).max(j1 - j3 + m2);
        let kmax = (j1 + j2 - j3).min(j1 - m1).min(j2 + m2);
        let terms = (kmin..=kmax).step_by(2).map(|k| {
            let d = f(k) * f(j3 - j2 + k + m1) * f(j3 - j1 + k - m2) * f(j1 + j2 - j3 - k) * f(j1 - k - m1) * f(j2 - k + m2);
            ((k / 2) % 2 == 1, BigUint::one(), d)
        });
        let (s_num, s_den) = accumulate(terms);
        let phase = if ((j1 - j2 - m3) / 2).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        phase * finish(s_num, s_den, r_num, dd)
    }

    pub fn wigner6j_exact(j1: i32, j2: i32, j3: i32, j4: i32, j5: i32, j6: i32) -> f64 {
        let triads = [(j1, j2, j3), (j1, j5, j6), (j4, j2, j6), (j4, j5, j3)];
        if !triads.iter().all(|&(a, b, c)| triad(a, b, c)) {
            return 0.0;
        }
        let mut r_num = BigUint::one();
        let mut r_den = BigUint::one();
        for &(a, b, c) in &triads {
            let (n, d) = delta(a, b, c);
            r_num *= n;
            r_den *= d;
        }
        let alphas = triads.map(|(a, b, c)| a + b + c);
        let betas = [j1 + j2 + j4 + j5, j2 + j3 + j5 + j6, j3 + j1 + j6 + j4];
        let tmin = *alphas.iter().max().unwrap();
        let tmax = *betas.iter().min().unwrap();
        let terms = (tmin..=tmax).step_by(2).map(|t| {
            let d = alphas.iter().map(|&a| f(t - a)).chain(betas.iter().map(|&b| f(b - t))).product();
            ((t / 2) % 2 == 1, f(t + 2), d)
        });
        let (s_num, s_den) = accumulate(terms);
        finish(s_num, s_den, r_num, r_den)
    }

    /// Dipole angular factor `|J F m> -> |J' F' m'>` from the exact symbols,
    /// in the convention of [`crate::angular::dipole_angular_factor`].
    pub fn dipole_factor_exact(j: i32, f: i32, m: i32, j_to: i32, f_to: i32, m_to: i32, q: i32, spin: i32) -> f64 {
        if m_to != m + 2 * q {
            return 0.0;
        }
        let sign = |twice: i32| if (twice / 2).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        sign(f_to - m_to)
            * wigner3j_exact(f_to, 2, f, -m_to, 2 * q, m)
            * sign(j_to + spin + f + 2)
            * (((f + 1) * (f_to + 1)) as f64).sqrt()
            * wigner6j_exact(j_to, f_to, spin, f, j, 2)
    }
}

fn twice_range(max_twice: i32) -> impl Iterator<Item = i32> + Clone {
    0..=max_twice
}

fn projections(twice_j: i32) -> impl Iterator<Item = i32> + Clone {
    (-twice_j..=twice_j).step_by(2)
}

fn h(twice: i32) -> HalfInteger {
    HalfInteger::from_twice(twice)
}

fn threej(t: [i32; 6]) -> Result<f64> {
    Ok(wigner3j(h(t[0]), h(t[1]), h(t[2]), h(t[3]), h(t[4]), h(t[5]))?.value)
}

fn sixj(t: [i32; 6]) -> Result<f64> {
    Ok(wigner6j(h(t[0]), h(t[1]), h(t[2]), h(t[3]), h(t[4]), h(t[5]))?.value)
}

fn parity_of(twice_sum: i32) -> f64 {
    if twice_sum % 2 != 0 {
        return 0.0;
    }
    if (twice_sum / 2).rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Largest `|value - exact|` over every 3j and 6j symbol with all angular
/// momenta `≤ max_twice_j / 2`.
pub fn symbol_oracle_deviation(max_twice_j: i32) -> Result<f64> {
    let mut worst = 0.0f64;
    let js = twice_range(max_twice_j);
    for j1 in js.clone() {
        for j2 in js.clone() {
            for j3 in js.clone() {
                if (j1 + j2 + j3) % 2 != 0 {
                    continue;
                }
                for m1 in projections(j1) {
                    for m2 in projections(j2) {
                        let m3 = -m1 - m2;
                        if m3.abs() > j3 {
                            continue;
                        }
                        let t = [j1, j2, j3, m1, m2, m3];
                        worst = worst.max((threej(t)? - oracle::wigner3j_exact(j1, j2, j3, m1, m2, m3)).abs());
                    }
                }
                for j4 in js.clone() {
                    for j5 in js.clone() {
                        for j6 in js.clone() {
                            let t = [j1, j2, j3, j4, j5, j6];
                            worst = worst.max((sixj(t)? - oracle::wigner6j_exact(j1, j2, j3, j4, j5, j6)).abs());
                        }
                    }
                }
            }
        }
    }
    Ok(worst)
}

/// Largest violation of the 3j and 6j symmetry and orthogonality identities
/// with all angular momenta `≤ max_twice_j / 2` (the 6j orthogonality sum runs
/// over every allowed intermediate value).
pub fn symbol_identity_deviation(max_twice_j: i32) -> Result<f64> {
    let mut worst = 0.0f64;
    let js = twice_range(max_twice_j);

    for j1 in js.clone() {
        for j2 in js.clone() {
            for j3 in js.clone() {
                if (j1 + j2 + j3) % 2 != 0 {
                    continue;
                }
                let odd = parity_of(j1 + j2 + j3);
                for m1 in projections(j1) {
                    for m2 in projections(j2) {
                        let m3 = -m1 - m2;
                        if m3.abs() > j3 {
                            continue;
                        }
                        let w = threej([j1, j2, j3, m1, m2, m3])?;
                        for (perm, phase) in [
                            ([j2, j3, j1, m2, m3, m1], 1.0),
                            ([j3, j1, j2, m3, m1, m2], 1.0),
                            ([j2, j1, j3, m2, m1, m3], odd),
                            ([j1, j3, j2, m1, m3, m2], odd),
                            ([j1, j2, j3, -m1, -m2, -m3], odd),
                        ] {
                            worst = worst.max((threej(perm)? - phase * w).abs());
                        }
                    }
                }
            }
            // Σ_{m1 m2} (2j3+1) (j1 j2 j3; m1 m2 m3)(j1 j2 j3'; m1 m2 m3) = δ_{j3 j3'}
            for j3 in js.clone() {
                for j3p in js.clone() {
                    if (j1 + j2 + j3) % 2 != 0 || (j1 + j2 + j3p) % 2 != 0 {
                        continue;
                    }
                    for m3 in projections(j3.min(j3p)) {
                        let mut sum = 0.0;
                        for m1 in projections(j1) {
                            let m2 = -m1 - m3;
                            if m2.abs() > j2 {
                                continue;
                            }
                            sum += threej([j1, j2, j3, m1, m2, m3])? * threej([j1, j2, j3p, m1, m2, m3])?;
                        }
                        sum *= f64::from(j3 + 1);
                        let triangle = j3 >= (j1 - j2).abs() && j3 <= j1 + j2;
                        let expected = if j3 == j3p && triangle { 1.0 } else { 0.0 };
                        worst = worst.max((sum - expected).abs());
                    }
                }
            }
        }
    }

    for a in js.clone() {
        for b in js.clone() {
            for c in js.clone() {
                for d in js.clone() {
                    for e in js.clone() {
                        for g in js.clone() {
                            let w = sixj([a, b, c, d, e, g])?;
                            for sym in [[b, a, c, e, d, g], [a, c, b, d, g, e], [d, e, c, a, b, g], [a, e, g, d, b, c]] {
                                worst = worst.max((sixj(sym)? - w).abs());
                            }
                        }
                        // Σ_x (2x+1)(2g+1) {a b x; d e g}{a b x; d e g'} = δ_{g g'}
                        for g in js.clone() {
                            for gp in js.clone() {
                                let valid = |t: i32| oracle_triad(a, e, t) && oracle_triad(d, b, t);
                                if !valid(g) || !valid(gp) {
                                    continue;
                                }
                                let mut sum = 0.0;
                                let mut x = (a - b).abs();
                                while x <= a + b {
                                    sum += f64::from(x + 1) * sixj([a, b, x, d, e, g])? * sixj([a, b, x, d, e, gp])?;
                                    x += 2;
                                }
                                sum *= f64::from(g + 1);
                                let expected = if g == gp { 1.0 } else { 0.0 };
                                worst = worst.max((sum - expected).abs());
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(worst)
}

fn oracle_triad(a: i32, b: i32, c: i32) -> bool {
    c >= (a - b).abs() && c <= a + b && (a + b + c) % 2 == 0
}

/// Differences between [`enumerate_couplings`] and an all-pairs scan using the
/// exact symbols: the number of couplings present in only one of them, and the
/// largest amplitude difference among the shared ones.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnumerationDiff {
    pub enumerated: usize,
    pub brute_force: usize,
    pub mismatched: usize,
    pub max_amplitude_error: f64,
}

pub fn enumeration_diff(basis: &StateBasis, field: &FieldSpec) -> Result<EnumerationDiff> {
    let set = enumerate_couplings(basis, field)?;
    let scenario = basis.scenario();
    let (lower, upper) = field.connects;
    let spin = scenario.nuclear_spin.twice();

    let mut brute = Vec::new();
    for from in 0..basis.len() {
        for to in 0..basis.len() {
            let (a, b) = (basis.state(from), basis.state(to));
            if a.role != lower || b.role != upper {
                continue;
            }
            for q in -1..=1 {
                let weight = field.polarization.drive_weight(q);
                let factor = oracle::dipole_factor_exact(
                    scenario.j(lower).twice(),
                    a.f.twice(),
                    a.m.twice(),
                    scenario.j(upper).twice(),
                    b.f.twice(),
                    b.m.twice(),
                    q,
                    spin,
                );
                let amplitude = weight * factor;
                if amplitude.norm() > 1e-14 {
                    brute.push((from, to, q, amplitude));
                }
            }
        }
    }

    let mut mismatched = 0;
    let mut max_amplitude_error = 0.0f64;
    for c in set.iter() {
        match brute.iter().find(|b| (b.0, b.1, b.2) == (c.from, c.to, c.q)) {
            Some(b) => max_amplitude_error = max_amplitude_error.max((b.3 - c.amplitude).norm()),
            None => mismatched += 1,
        }
    }
    for b in &brute {
        if !set.iter().any(|c| (b.0, b.1, b.2) == (c.from, c.to, c.q)) {
            mismatched += 1;
        }
    }
    Ok(EnumerationDiff { enumerated: set.len(), brute_force: brute.len(), mismatched, max_amplitude_error })
}

/// Polarizations exercised by the enumeration check.
pub fn test_polarizations() -> Vec<Polarization> {
    let mut out = vec![Polarization::Z, Polarization::X, Polarization::Y];
    out.extend([30.0, 45.0, 60.0].map(Polarization::in_xz_plane));
    out.push(Polarization::new([1.0, 2.0, 3.0]).expect("non-zero vector"));
    out
}

/// Deliberate faults for exercising the validation suite.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Fault {
    /// Negate the RF couplings between 52D5/2 F=4 and 53P3/2 F=4.
    RfBlockSign,
}

/// Comparison of the full hyperfine RF spectrum with the fine-structure one.
#[derive(Clone, Debug, PartialEq)]
pub struct ReductionCheck {
    /// Largest elementwise difference of the sorted eigenvalue lists, MHz.
    pub max_deviation_mhz: f64,
    /// Ratio of the two positive unique eigenvalues (expected `√6 / 2`).
    pub positive_ratio: f64,
}

/// Fine-structure `J ↔ J'` eigenvalues from the `m`-blocks of a `z`-polarized
/// field: `±(Ω/2)|<J' m|d_0|J m>|` per shared `m`, `0` for unpaired `m`.
pub fn fine_structure_closed_form(j_lower: HalfInteger, j_upper: HalfInteger, rabi_mhz: f64) -> Vec<f64> {
    let (jl, ju) = (j_lower.twice(), j_upper.twice());
    let mut out = Vec::new();
    for m in projections(jl.max(ju)) {
        let (in_lower, in_upper) = (m.abs() <= jl, m.abs() <= ju);
        match (in_lower, in_upper) {
            (true, true) => {
                let sign = if ((ju - m) / 2).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                let a = sign * oracle::wigner3j_exact(ju, 2, jl, -m, 0, m);
                let e = (rabi_mhz / 2.0 * a).abs();
                out.extend([e, -e]);
            }
            (true, false) | (false, true) => out.push(0.0),
            (false, false) => {}
        }
    }
    out.sort_by(f64::total_cmp);
    out
}

/// Diagonalizes the full-scenario RF Hamiltonian and compares it with the
/// fine-structure spectrum repeated once per nuclear projection.
pub fn fine_structure_reduction(basis: &StateBasis, rf: &FieldSpec, fault: Option<Fault>) -> Result<ReductionCheck> {
    let scenario = basis.scenario();
    if !scenario.rydberg_manifolds_complete() {
        return Err(invalid("the fine-structure reduction needs every Rydberg hyperfine manifold"));
    }
    let mut hamiltonian = build_rf_hamiltonian::<f64>(basis, rf)?;
    if let Some(Fault::RfBlockSign) = fault {
        hamiltonian.negate_block(basis, HalfInteger::integer(4), HalfInteger::integer(4));
    }
    let dressed = diagonalize(&hamiltonian)?;

    // Quantization along the field makes the reference rotation invariant.
    let reference = fine_structure_closed_form(scenario.j(Role::RydbergLower), scenario.j(Role::RydbergUpper), rf.rabi_mhz);
    let copies = scenario.nuclear_spin.multiplicity() as usize;
    let mut expected: Vec<f64> = reference.iter().flat_map(|&e| std::iter::repeat(e).take(copies)).collect();
    expected.sort_by(f64::total_cmp);
    if expected.len() != dressed.eigenvalues.len() {
        return Err(invalid(format!(
            "reference has {} eigenvalues, the hyperfine problem {}",
            expected.len(),
            dressed.eigenvalues.len()
        )));
    }
    let max_deviation_mhz = expected
        .iter()
        .zip(&dressed.eigenvalues)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);

    let tolerance = 1e-6 * rf.rabi_mhz.max(1.0);
    let positive: Vec<f64> = unique_eigenvalues(&dressed.eigenvalues, tolerance)?
        .into_iter()
        .filter(|&e| e > tolerance)
        .collect();
    let positive_ratio = match positive.as_slice() {
        [low, high] => high / low,
        _ => f64::NAN,
    };
    Ok(ReductionCheck { max_deviation_mhz, positive_ratio })
}

/// Three-state ladder `6S1/2(4,0) → 6P3/2(5,0) → 52D5/2(6,0)` for solver
/// cross-checks.
pub fn ladder_three_state() -> StateBasis {
    let s = |role, f| crate::model::Sublevel { role, f: HalfInteger::integer(f), m: HalfInteger::ZERO };
    StateBasis::from_states(
        preset("full").expect("built-in preset"),
        vec![s(Role::Ground, 4), s(Role::Intermediate, 5), s(Role::RydbergLower, 6)],
    )
    .expect("valid sublevels")
}

/// Twelve-state ladder without nuclear spin:
/// `S1/2 → P3/2 → D3/2 ↔ P1/2`, every Zeeman sublevel kept.
pub fn ladder_twelve_state() -> StateBasis {
    let level = |label: &str, twice_j, role| FineLevel { label: label.into(), j: h(twice_j), role };
    let scenario = Scenario {
        name: "twelve_state".into(),
        levels: [
            level("S1/2", 1, Role::Ground),
            level("P3/2", 3, Role::Intermediate),
            level("D3/2", 3, Role::RydbergLower),
            level("P1/2", 1, Role::RydbergUpper),
        ],
        nuclear_spin: HalfInteger::ZERO,
        included_f: [vec![h(1)], vec![h(3)], vec![h(3)], vec![h(1)]],
        m_restriction: [None; 4],
        hyperfine_offsets: Vec::new(),
    };
    build_basis(&scenario, Default::default()).expect("valid scenario")
}

/// Largest `|χ_Lindblad - χ_weak|` over the coupling-detuning grid, relative
/// to the largest `|χ_Lindblad|`.
///
/// The weak-probe side is evaluated with the ground populations of the
/// Lindblad steady state at each detuning, so the comparison isolates the
/// coherence response from the optical pumping of the ground manifold.
pub fn solver_agreement(basis: &StateBasis, drive: &DriveConfig, decay: &DecayModel, grid: &[f64]) -> Result<f64> {
    let ground = basis.indices_of(Role::Ground);
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for &d in grid {
        let drive = drive.clone().with_coupling_detuning(d);
        let rho = steady_state_lindblad(basis, &drive, decay)?;
        let exact = lindblad_susceptibility(basis, &drive, &rho)?;
        let populations: Vec<f64> = ground.iter().map(|&g| rho[(g, g)].re).collect();
        let linear = WeakProbeSolver::new(basis, &drive, decay)?.response_with_populations(&populations)?;
        worst = worst.max((exact - linear).norm());
        scale = scale.max(exact.norm());
    }
    if !(scale > 0.0) {
        return Err(invalid("the probe is not absorbed anywhere on the grid"));
    }
    Ok(worst / scale)
}

/// Drive used for the cross-check: `Ω_p = γ / 10`, all fields along `z`.
pub fn cross_check_drive(decay: &DecayModel, coupling_mhz: f64, rf_mhz: f64) -> Result<DriveConfig> {
    DriveConfig::linear(decay.intermediate_mhz / 10.0, coupling_mhz, rf_mhz, Polarization::Z)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Absolute, on symbol values.
    pub symbols: f64,
    /// Absolute, on amplitudes.
    pub enumeration: f64,
    /// Relative to the RF Rabi frequency.
    pub reduction: f64,
    /// Relative susceptibility deviation.
    pub solver: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { symbols: 1e-12, enumeration: 1e-12, reduction: 1e-9, solver: 0.01 }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        for (name, t) in [
            ("symbols", self.symbols),
            ("enumeration", self.enumeration),
            ("reduction", self.reduction),
            ("solver", self.solver),
        ] {
            if !(t > 0.0 && t.is_finite()) {
                return Err(invalid(format!("{name} tolerance must be positive and finite, got {t}")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValidationOptions {
    pub tolerances: Tolerances,
    /// Largest `2j` covered by the symbol checks.
    pub max_twice_j: i32,
    pub fault: Option<Fault>,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        ValidationOptions { tolerances: Tolerances::default(), max_twice_j: 8, fault: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{verdict} {}: {:.3e} (tolerance {:.1e}) {}", self.name, self.measured, self.tolerance, self.detail)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn check(name: &str, measured: f64, tolerance: f64, detail: String) -> CheckResult {
    CheckResult { name: name.into(), passed: measured <= tolerance, measured, tolerance, detail }
}

/// Runs every oracle check. Tolerances are validated before anything runs.
pub fn run_validation(options: &ValidationOptions) -> Result<ValidationReport> {
    options.tolerances.validate()?;
    if !(0..=16).contains(&options.max_twice_j) {
        return Err(invalid(format!("max_twice_j {} must lie in 0..=16", options.max_twice_j)));
    }
    let tol = options.tolerances;
    let mut checks = Vec::new();
    let jmax = format!("j <= {}", h(options.max_twice_j));

    checks.push(check("racah_symbols", symbol_oracle_deviation(options.max_twice_j)?, tol.symbols, jmax.clone()));
    checks.push(check("symbol_identities", symbol_identity_deviation(options.max_twice_j)?, tol.symbols, jmax));

    let mut mismatched = 0;
    let mut amplitude = 0.0f64;
    let mut cases = 0;
    for name in ["full", "truncated"] {
        let basis = build_basis(&preset(name).expect("built-in preset"), Default::default())?;
        for kind in FieldKind::ALL {
            for pol in test_polarizations() {
                let diff = enumeration_diff(&basis, &FieldSpec::new(kind, 1.0, pol)?)?;
                mismatched += diff.mismatched;
                amplitude = amplitude.max(diff.max_amplitude_error);
                cases += 1;
            }
        }
    }
    let mut c = check("enumeration_brute_force", amplitude, tol.enumeration, format!("{cases} cases, {mismatched} mismatched"));
    c.passed &= mismatched == 0;
    checks.push(c);

    let full = build_basis(&preset("full").expect("built-in preset"), Default::default())?;
    let rf = FieldSpec::rf(200.0, Polarization::Z)?;
    let r = fine_structure_reduction(&full, &rf, options.fault)?;
    let ratio_error = (r.positive_ratio - 6f64.sqrt() / 2.0).abs();
    let measured = (r.max_deviation_mhz / rf.rabi_mhz).max(if ratio_error.is_nan() { f64::INFINITY } else { ratio_error });
    checks.push(check(
        "fine_structure_reduction",
        measured,
        tol.reduction,
        format!("max |Δλ| = {:.3e} MHz, ratio = {:.12}", r.max_deviation_mhz, r.positive_ratio),
    ));

    let decay = DecayModel::default();
    let grid = crate::spectrum::linear_grid(-150.0, 150.0, 61);
    for (name, basis) in [("weak_probe_vs_lindblad_3", ladder_three_state()), ("weak_probe_vs_lindblad_12", ladder_twelve_state())] {
        let drive = cross_check_drive(&decay, 20.0, 40.0)?;
        let dev = solver_agreement(&basis, &drive, &decay, &grid)?;
        checks.push(check(name, dev, tol.solver, format!("{} states, Ω_p = γ/10", basis.len())));
    }
    Ok(ValidationReport { checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_symbols_known_values() {
        assert!((oracle::wigner3j_exact(2, 2, 2, 0, 0, 0)).abs() < 1e-15);
        assert!((oracle::wigner3j_exact(2, 2, 0, 2, -2, 0) - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!((oracle::wigner6j_exact(2, 2, 2, 2, 2, 2) - 1.0 / 6.0).abs() < 1e-15);
        assert_eq!(oracle::wigner3j_exact(2, 2, 6, 0, 0, 0), 0.0);
    }

    #[test]
    fn symbols_match_oracle_small_j() {
        assert!(symbol_oracle_deviation(4).unwrap() < 1e-13);
        assert!(symbol_identity_deviation(4).unwrap() < 1e-13);
    }

    #[test]
    fn enumeration_matches_brute_force() {
        let b = build_basis(&preset("truncated").unwrap(), Default::default()).unwrap();
        let d = enumeration_diff(&b, &FieldSpec::rf(1.0, Polarization::in_xz_plane(30.0)).unwrap()).unwrap();
        assert_eq!(d.mismatched, 0);
        assert_eq!(d.enumerated, d.brute_force);
        assert!(d.max_amplitude_error < 1e-12);
    }

    #[test]
    fn reduction_holds_and_fault_breaks_it() {
        let b = build_basis(&preset("full").unwrap(), Default::default()).unwrap();
        let rf = FieldSpec::rf(200.0, Polarization::Z).unwrap();
        let good = fine_structure_reduction(&b, &rf, None).unwrap();
        assert!(good.max_deviation_mhz < 1e-9 * 200.0);
        assert!((good.positive_ratio - 6f64.sqrt() / 2.0).abs() < 1e-9);
        let bad = fine_structure_reduction(&b, &rf, Some(Fault::RfBlockSign)).unwrap();
        assert!(bad.max_deviation_mhz > 1e-3 * 200.0);
    }

    #[test]
    fn closed_form_reference() {
        let e = fine_structure_closed_form(h(5), h(3), 200.0);
        assert_eq!(e.len(), 10);
        let positive: Vec<f64> = e.iter().copied().filter(|&x| x > 1e-9).collect();
        assert_eq!(positive.len(), 4);
        assert!((positive[3] / positive[0] - 6f64.sqrt() / 2.0).abs() < 1e-12);
    }

    #[test]
    fn zero_tolerance_rejected() {
        let options = ValidationOptions { tolerances: Tolerances { reduction: 0.0, ..Default::default() }, ..Default::default() };
        assert!(matches!(run_validation(&options), Err(crate::Error::InvalidArgument(_))));
    }

    #[test]
    fn twelve_state_ladder() {
        assert_eq!(ladder_twelve_state().len(), 12);
        assert_eq!(ladder_three_state().len(), 3);
    }
}
