//! Dense Lindblad steady state for small ladders.
//!
//! The density matrix is vectorized row-major, `vec(ρ)[i n + j] = ρ_ij`, so
//! `vec(A ρ B) = (A ⊗ Bᵀ) vec(ρ)`. One equation of `L vec(ρ) = 0` is replaced
//! by the trace condition and the system is solved directly.
//!
//! Decay routing: an intermediate sublevel decays to the ground sublevels it
//! has a dipole-allowed line to, with equal branching; Rydberg sublevels decay
//! straight to the ground manifold with equal branching over all ground
//! sublevels. Extra dephasing damps every excited–other coherence at the
//! given rate.

use std::f64::consts::TAU;

use super::{DecayModel, Detunings, DriveConfig, Ladder};
use crate::error::{invalid, Error, Result};
use crate::linalg::{eigh, Lu, Matrix};
use crate::model::{Role, StateBasis};
use crate::Complex64;

/// Largest basis accepted by [`steady_state_lindblad`] (`N^2 = 1600` unknowns).
pub const MAX_LINDBLAD_STATES: usize = 40;

/// Hermiticity and positivity tolerance of the returned state.
const STATE_TOLERANCE: f64 = 1e-8;

pub type DensityMatrix = Matrix<f64>;

/// `√rate |to><from|`, rate angular.
struct Jump {
    to: usize,
    from: usize,
    rate: f64,
}

fn jumps(basis: &StateBasis, decay: &DecayModel) -> Result<Vec<Jump>> {
    let ground = basis.indices_of(Role::Ground);
    let mut out = Vec::new();
    for e in 0..basis.len() {
        let role = basis.state(e).role;
        if role == Role::Ground {
            continue;
        }
        let gamma = TAU * decay.gamma_mhz(role);
        if gamma > 0.0 {
            let mut targets = Vec::new();
            if role == Role::Intermediate {
                for &g in &ground {
                    let q = (basis.state(e).m - basis.state(g).m).as_integer();
                    if let Some(q) = q.filter(|q| q.abs() <= 1) {
                        if basis.dipole_factor(g, e, q)? != 0.0 {
                            targets.push(g);
                        }
                    }
                }
            }
            if targets.is_empty() {
                targets = ground.clone();
            }
            let share = gamma / targets.len() as f64;
            out.extend(targets.into_iter().map(|g| Jump { to: g, from: e, rate: share }));
        }
        if decay.extra_dephasing_mhz > 0.0 {
            out.push(Jump { to: e, from: e, rate: 2.0 * TAU * decay.extra_dephasing_mhz });
        }
    }
    Ok(out)
}

/// Steady state `L(ρ) = 0`, `tr ρ = 1`, with every field at full strength.
///
/// Fails with [`Error::SystemTooLarge`] above [`MAX_LINDBLAD_STATES`] states
/// and with [`Error::DegenerateSteadyState`] when the null space of `L` is
/// not one-dimensional, e.g. several ground sublevels and no fields.
pub fn steady_state_lindblad(basis: &StateBasis, drive: &DriveConfig, decay: &DecayModel) -> Result<DensityMatrix> {
    let n = basis.len();
    if n > MAX_LINDBLAD_STATES {
        return Err(Error::SystemTooLarge { states: n, limit: MAX_LINDBLAD_STATES });
    }
    if n == 0 {
        return Err(invalid("empty basis"));
    }
    let ladder = Ladder::new(basis, drive, decay)?;
    let h = ladder.hamiltonian(&Detunings::of(drive));
    let jumps = jumps(basis, decay)?;

    let dim = n * n;
    let at = |i: usize, j: usize| i * n + j;
    let mut l = Matrix::<f64>::zeros(dim, dim);
    let minus_i = Complex64::new(0.0, -1.0);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                // -i (H ρ - ρ H)
                l[(at(i, j), at(k, j))] += minus_i * h[(i, k)];
                l[(at(i, j), at(i, k))] -= minus_i * h[(k, j)];
            }
        }
    }
    for jump in &jumps {
        let (t, f, r) = (jump.to, jump.from, jump.rate);
        l[(at(t, t), at(f, f))] += Complex64::new(r, 0.0);
        for k in 0..n {
            l[(at(f, k), at(f, k))] -= Complex64::new(0.5 * r, 0.0);
            l[(at(k, f), at(k, f))] -= Complex64::new(0.5 * r, 0.0);
        }
    }

    let mut rhs = vec![Complex64::new(0.0, 0.0); dim];
    for c in 0..dim {
        l[(0, c)] = Complex64::new(0.0, 0.0);
    }
    for i in 0..n {
        l[(0, at(i, i))] = Complex64::new(1.0, 0.0);
    }
    rhs[0] = Complex64::new(1.0, 0.0);

    let lu = Lu::factor(&l).map_err(|e| match e {
        Error::SingularSystem(msg) => Error::DegenerateSteadyState(format!(
            "Liouvillian has more than one steady state ({msg}); drive or couple every ground sublevel"
        )),
        other => other,
    })?;
    let x = lu.solve(&rhs);
    let rho = Matrix::from_fn(n, n, |i, j| x[at(i, j)]);
    check_state(&rho)?;
    Ok(rho)
}

fn check_state(rho: &DensityMatrix) -> Result<()> {
    let deviation = rho.hermitian_deviation();
    if deviation > STATE_TOLERANCE {
        return Err(Error::ContractViolation(format!("steady state is not Hermitian ({deviation:e})")));
    }
    let lowest = eigh(rho)?.values[0];
    if lowest < -STATE_TOLERANCE {
        return Err(Error::ContractViolation(format!("steady state has a negative eigenvalue {lowest:e}")));
    }
    Ok(())
}

/// Probe susceptibility read off a density matrix, in the units of
/// [`super::weak_probe_response`]: `-Σ conj(u_eg) ρ_eg / (2π Ω_p / 2)`.
pub fn lindblad_susceptibility(basis: &StateBasis, drive: &DriveConfig, rho: &DensityMatrix) -> Result<Complex64> {
    if !(drive.probe.rabi_mhz > 0.0) {
        return Err(invalid("the probe Rabi frequency must be positive to read off a susceptibility"));
    }
    let couplings = crate::couplings::enumerate_couplings(basis, &drive.probe)?;
    let sum: Complex64 = couplings.iter().map(|c| c.amplitude.conj() * rho[(c.to, c.from)]).sum();
    Ok(-sum / (TAU * drive.probe.rabi_mhz / 2.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_basis, scenario_full, Sublevel};
    use crate::polarization::Polarization;
    use crate::spectrum::{weak_probe_response, WeakProbeSolver};
    use crate::HalfInteger;

    fn sub(role: Role, f: i32, m: i32) -> Sublevel {
        Sublevel { role, f: HalfInteger::integer(f), m: HalfInteger::integer(m) }
    }

    fn ladder3() -> StateBasis {
        StateBasis::from_states(
            scenario_full(),
            vec![sub(Role::Ground, 4, 0), sub(Role::Intermediate, 5, 0), sub(Role::RydbergLower, 6, 0)],
        )
        .unwrap()
    }

    fn drive(p: f64, c: f64) -> DriveConfig {
        DriveConfig::linear(p, c, 0.0, Polarization::Z).unwrap()
    }

    #[test]
    fn no_fields_relaxes_to_ground() {
        let rho = steady_state_lindblad(&ladder3(), &drive(0.0, 0.0), &DecayModel::default()).unwrap();
        assert!((rho[(0, 0)].re - 1.0).abs() < 1e-12);
        assert!(rho[(1, 1)].norm() < 1e-12 && rho[(2, 2)].norm() < 1e-12);
    }

    #[test]
    fn saturation_limit() {
        let decay = DecayModel::default();
        let rho = steady_state_lindblad(&ladder3(), &drive(100.0 * decay.intermediate_mhz, 0.0), &decay).unwrap();
        assert!((rho[(1, 1)].re - 0.5).abs() < 1e-3);
    }

    #[test]
    fn two_level_closed_form() {
        let decay = DecayModel::default();
        let omega = 3.0;
        let rho = steady_state_lindblad(&ladder3(), &drive(omega, 0.0), &decay).unwrap();
        let s = 2.0 * omega * omega / (decay.intermediate_mhz * decay.intermediate_mhz);
        // Angular factor of the line rescales the effective Rabi frequency.
        let a = ladder3().dipole_factor(0, 1, 0).unwrap();
        let s = s * a * a;
        assert!((rho[(1, 1)].re - s / (2.0 * (1.0 + s))).abs() < 1e-12);
    }

    #[test]
    fn weak_probe_limit_matches() {
        let decay = DecayModel::default();
        let b = ladder3();
        let d = drive(1e-4, 20.0).with_coupling_detuning(7.0);
        let rho = steady_state_lindblad(&b, &d, &decay).unwrap();
        let exact = lindblad_susceptibility(&b, &d, &rho).unwrap();
        let linear = weak_probe_response(&b, &d, &decay).unwrap();
        assert!((exact - linear).norm() < 1e-6 * linear.norm());
        let solver = WeakProbeSolver::new(&b, &d, &decay).unwrap();
        assert_eq!(solver.response().unwrap(), linear);
    }

    #[test]
    fn degenerate_ground_manifold() {
        let b = StateBasis::from_states(
            scenario_full(),
            vec![sub(Role::Ground, 4, -1), sub(Role::Ground, 4, 0), sub(Role::Intermediate, 5, 0)],
        )
        .unwrap();
        let err = steady_state_lindblad(&b, &drive(0.0, 0.0), &DecayModel::default()).unwrap_err();
        assert!(matches!(err, Error::DegenerateSteadyState(_)));
    }

    #[test]
    fn refuses_large_systems() {
        let b = build_basis(&scenario_full(), Default::default()).unwrap();
        let err = steady_state_lindblad(&b, &drive(0.5, 20.0), &DecayModel::default()).unwrap_err();
        assert_eq!(err, Error::SystemTooLarge { states: 100, limit: MAX_LINDBLAD_STATES });
    }

    #[test]
    fn dephasing_keeps_a_valid_state() {
        let decay = DecayModel { extra_dephasing_mhz: 0.3, ..DecayModel::default() };
        let rho = steady_state_lindblad(&ladder3(), &drive(1.0, 20.0), &decay).unwrap();
        let trace: f64 = (0..3).map(|i| rho[(i, i)].re).sum();
        assert!((trace - 1.0).abs() < 1e-12);
    }
}
