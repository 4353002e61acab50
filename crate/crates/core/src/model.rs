//! Atomic level scheme for a four-level Rydberg ladder in the hyperfine
//! sublevel basis.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::angular::{check_hyperfine, dipole_angular_factor, wigner6j, HalfInteger};
use crate::error::{Error, Result};
use crate::polarization::Polarization;

/// Position of a fine-structure level in the ladder.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Ground,
    Intermediate,
    RydbergLower,
    RydbergUpper,
}

impl Role {
    pub const ALL: [Role; 4] = [Role::Ground, Role::Intermediate, Role::RydbergLower, Role::RydbergUpper];

    pub const fn index(self) -> usize {
        self as usize
    }

    pub fn is_rydberg(self) -> bool {
        matches!(self, Role::RydbergLower | Role::RydbergUpper)
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Ground => "ground",
            Role::Intermediate => "intermediate",
            Role::RydbergLower => "rydberg_lower",
            Role::RydbergUpper => "rydberg_upper",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FineLevel {
    pub label: String,
    pub j: HalfInteger,
    pub role: Role,
}

/// Energy offset of one hyperfine manifold relative to its fine-structure
/// level. Presets leave every manifold degenerate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HyperfineOffset {
    pub role: Role,
    pub f: HalfInteger,
    pub offset_mhz: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    /// One level per role, in [`Role::ALL`] order.
    pub levels: [FineLevel; 4],
    pub nuclear_spin: HalfInteger,
    /// Included hyperfine manifolds per role.
    pub included_f: [Vec<HalfInteger>; 4],
    /// Optional bound on `|m_F|` per role. Serialized as a table keyed by
    /// role holding only the bounded roles.
    #[serde(default, with = "m_bounds")]
    pub m_restriction: [Option<HalfInteger>; 4],
    #[serde(default)]
    pub hyperfine_offsets: Vec<HyperfineOffset>,
}

mod m_bounds {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use super::Role;
    use crate::HalfInteger;

    pub fn serialize<S: Serializer>(bounds: &[Option<HalfInteger>; 4], s: S) -> Result<S::Ok, S::Error> {
        let map: BTreeMap<Role, HalfInteger> =
            Role::ALL.iter().filter_map(|&r| bounds[r.index()].map(|b| (r, b))).collect();
        map.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<[Option<HalfInteger>; 4], D::Error> {
        let map = BTreeMap::<Role, HalfInteger>::deserialize(d)?;
        let mut out = [None; 4];
        for (role, bound) in map {
            out[role.index()] = Some(bound);
        }
        Ok(out)
    }
}

/// Hyperfine manifolds `|J - I| ..= J + I`, ascending.
pub fn hyperfine_manifolds(j: HalfInteger, nuclear_spin: HalfInteger) -> Vec<HalfInteger> {
    let lo = (j - nuclear_spin).abs().twice();
    let hi = (j + nuclear_spin).twice();
    (lo..=hi).step_by(2).map(HalfInteger::from_twice).collect()
}

const CS_NUCLEAR_SPIN: HalfInteger = HalfInteger::half(7);

fn cs_levels() -> [FineLevel; 4] {
    let level = |label: &str, twice_j, role| FineLevel { label: label.into(), j: HalfInteger::from_twice(twice_j), role };
    [
        level("6S1/2", 1, Role::Ground),
        level("6P3/2", 3, Role::Intermediate),
        level("52D5/2", 5, Role::RydbergLower),
        level("53P3/2", 3, Role::RydbergUpper),
    ]
}

fn ints(values: &[i32]) -> Vec<HalfInteger> {
    values.iter().map(|&f| HalfInteger::integer(f)).collect()
}

/// 133Cs ladder 6S1/2(F=4) → 6P3/2(F=5) → 52D5/2 ↔ 53P3/2 with every
/// Rydberg hyperfine manifold included.
pub fn scenario_full() -> Scenario {
    Scenario {
        name: "full".into(),
        levels: cs_levels(),
        nuclear_spin: CS_NUCLEAR_SPIN,
        included_f: [ints(&[4]), ints(&[5]), ints(&[1, 2, 3, 4, 5, 6]), ints(&[2, 3, 4, 5])],
        m_restriction: [None; 4],
        hyperfine_offsets: Vec::new(),
    }
}

/// Same ladder keeping only 52D5/2(F=4,5,6) and 53P3/2(F=3,4,5).
pub fn scenario_truncated() -> Scenario {
    Scenario {
        name: "truncated".into(),
        included_f: [ints(&[4]), ints(&[5]), ints(&[4, 5, 6]), ints(&[3, 4, 5])],
        ..scenario_full()
    }
}

/// Looks up a preset by name (`"full"` or `"truncated"`).
pub fn preset(name: &str) -> Option<Scenario> {
    match name {
        "full" => Some(scenario_full()),
        "truncated" => Some(scenario_truncated()),
        _ => None,
    }
}

impl Scenario {
    pub fn level(&self, role: Role) -> &FineLevel {
        &self.levels[role.index()]
    }

    pub fn j(&self, role: Role) -> HalfInteger {
        self.level(role).j
    }

    pub fn included(&self, role: Role) -> &[HalfInteger] {
        &self.included_f[role.index()]
    }

    pub fn energy_offset_mhz(&self, role: Role, f: HalfInteger) -> f64 {
        self.hyperfine_offsets
            .iter()
            .filter(|o| o.role == role && o.f == f)
            .map(|o| o.offset_mhz)
            .sum()
    }

    /// True when every hyperfine manifold of both Rydberg levels is present
    /// without an `m_F` bound.
    pub fn rydberg_manifolds_complete(&self) -> bool {
        [Role::RydbergLower, Role::RydbergUpper].iter().all(|&role| {
            self.m_restriction[role.index()].is_none()
                && hyperfine_manifolds(self.j(role), self.nuclear_spin) == self.included(role)
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.nuclear_spin.check_j().map_err(|e| Error::InvalidScenario(e.to_string()))?;
        for role in Role::ALL {
            let level = self.level(role);
            if level.role != role {
                return Err(Error::InvalidScenario(format!(
                    "level {:?} sits in the {role} slot but declares role {}",
                    level.label, level.role
                )));
            }
            let fs = self.included(role);
            if fs.is_empty() {
                return Err(Error::InvalidScenario(format!("no hyperfine manifolds included for {role}")));
            }
            for (k, &f) in fs.iter().enumerate() {
                check_hyperfine(level.j, f, self.nuclear_spin)
                    .map_err(|e| Error::InvalidScenario(format!("{}: {e}", level.label)))?;
                if fs[..k].contains(&f) {
                    return Err(Error::InvalidScenario(format!("{}: F = {f} listed twice", level.label)));
                }
            }
        }
        Ok(())
    }
}

/// One hyperfine sublevel `|role, F, m_F>`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Sublevel {
    pub role: Role,
    pub f: HalfInteger,
    pub m: HalfInteger,
}

/// Ordered set of sublevels with optical-reachability flags.
#[derive(Clone, Debug)]
pub struct StateBasis {
    scenario: Scenario,
    states: Vec<Sublevel>,
    index: HashMap<Sublevel, usize>,
    optical: Vec<bool>,
}

/// Polarizations of the probe and coupling lasers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OpticalPolarizations {
    pub probe: Polarization,
    pub coupling: Polarization,
}

impl Default for OpticalPolarizations {
    fn default() -> Self {
        OpticalPolarizations { probe: Polarization::Z, coupling: Polarization::Z }
    }
}

/// How a probe or coupling step decides that a sublevel is reached.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ReachabilityRule {
    /// `Δm_F = q` for a component present in the polarization and a non-zero
    /// reduced hyperfine matrix element between the two manifolds. Sublevels
    /// sitting on a Clebsch–Gordan node (such as `F -> F`, `0 -> 0` for
    /// `q = 0`) still count as reached.
    #[default]
    SelectionRules,
    /// The full angular factor of the step must be non-zero.
    ExactAmplitude,
}

/// Builds the basis ordered by role, then `F`, then `m_F`, and marks the
/// sublevels reachable from the ground manifold through probe then coupling
/// dipole transitions under [`ReachabilityRule::SelectionRules`].
pub fn build_basis(scenario: &Scenario, optical: OpticalPolarizations) -> Result<StateBasis> {
    build_basis_with_rule(scenario, optical, ReachabilityRule::default())
}

pub fn build_basis_with_rule(
    scenario: &Scenario,
    optical: OpticalPolarizations,
    rule: ReachabilityRule,
) -> Result<StateBasis> {
    scenario.validate()?;
    let mut states = Vec::new();
    for role in Role::ALL {
        let bound = scenario.m_restriction[role.index()];
        let mut fs = scenario.included(role).to_vec();
        fs.sort();
        let before = states.len();
        for f in fs {
            states.extend(
                f.projections()
                    .filter(|m| bound.is_none_or(|b| m.abs() <= b))
                    .map(|m| Sublevel { role, f, m }),
            );
        }
        if states.len() == before {
            return Err(Error::InvalidScenario(format!("{role} manifold is empty after the m_F restriction")));
        }
    }
    let mut basis = StateBasis::from_states(scenario.clone(), states)?;
    basis.optical = reachability(&basis, optical, rule)?;
    Ok(basis)
}

fn reachability(basis: &StateBasis, optical: OpticalPolarizations, rule: ReachabilityRule) -> Result<Vec<bool>> {
    let mut reached = vec![false; basis.len()];
    let mut queue = VecDeque::new();
    for i in basis.indices_of(Role::Ground) {
        reached[i] = true;
        queue.push_back(i);
    }
    let steps = [
        (Role::Ground, Role::Intermediate, optical.probe),
        (Role::Intermediate, Role::RydbergLower, optical.coupling),
    ];
    while let Some(i) = queue.pop_front() {
        let from = basis.states[i];
        for &(lower, upper, pol) in &steps {
            if from.role != lower {
                continue;
            }
            for j in basis.indices_of(upper) {
                if reached[j] {
                    continue;
                }
                let to = basis.states[j];
                let Some(q) = (to.m - from.m).as_integer().filter(|q| q.abs() <= 1) else {
                    continue;
                };
                if pol.drive_weight(q).norm() == 0.0 {
                    continue;
                }
                let allowed = match rule {
                    ReachabilityRule::ExactAmplitude => basis.dipole_factor(i, j, q)? != 0.0,
                    ReachabilityRule::SelectionRules => basis.reduced_factor_nonzero(i, j)?,
                };
                if allowed {
                    reached[j] = true;
                    queue.push_back(j);
                }
            }
        }
    }
    Ok(reached)
}

impl StateBasis {
    /// Basis over an explicit state list in the given order. Reachability is
    /// left unset (all `false`).
    pub fn from_states(scenario: Scenario, states: Vec<Sublevel>) -> Result<Self> {
        let mut index = HashMap::with_capacity(states.len());
        for (k, s) in states.iter().enumerate() {
            HalfInteger::check_projection(s.f, s.m).map_err(|e| Error::InvalidScenario(e.to_string()))?;
            if !scenario.included(s.role).contains(&s.f) {
                return Err(Error::InvalidScenario(format!("{s:?} is not in an included manifold")));
            }
            if index.insert(*s, k).is_some() {
                return Err(Error::InvalidScenario(format!("duplicate state {s:?}")));
            }
        }
        let optical = vec![false; states.len()];
        Ok(StateBasis { scenario, states, index, optical })
    }

    /// The same states and flags in a new order: position `k` of the result
    /// holds state `order[k]` of `self`.
    pub fn reordered(&self, order: &[usize]) -> Result<Self> {
        let states = order.iter().map(|&k| self.states[k]).collect();
        let mut out = Self::from_states(self.scenario.clone(), states)?;
        if out.len() != self.len() {
            return Err(Error::InvalidArgument("reordering must be a permutation".into()));
        }
        out.optical = order.iter().map(|&k| self.optical[k]).collect();
        Ok(out)
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[Sublevel] {
        &self.states
    }

    pub fn state(&self, i: usize) -> Sublevel {
        self.states[i]
    }

    pub fn index_of(&self, s: &Sublevel) -> Option<usize> {
        self.index.get(s).copied()
    }

    pub fn optically_reachable(&self, i: usize) -> bool {
        self.optical[i]
    }

    pub fn optical_flags(&self) -> &[bool] {
        &self.optical
    }

    pub fn indices_of(&self, role: Role) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.states[i].role == role).collect()
    }

    pub fn count(&self, role: Role) -> usize {
        self.states.iter().filter(|s| s.role == role).count()
    }

    pub fn energy_offset_mhz(&self, i: usize) -> f64 {
        let s = self.states[i];
        self.scenario.energy_offset_mhz(s.role, s.f)
    }

    /// Whether the reduced hyperfine dipole element between the manifolds of
    /// two states is non-zero (`|ΔF| <= 1` and a non-vanishing 6j symbol).
    pub fn reduced_factor_nonzero(&self, from: usize, to: usize) -> Result<bool> {
        let (a, b) = (self.states[from], self.states[to]);
        let sixj = wigner6j(
            self.scenario.j(b.role),
            b.f,
            self.scenario.nuclear_spin,
            a.f,
            self.scenario.j(a.role),
            HalfInteger::ONE,
        )?;
        Ok(!sixj.is_zero())
    }

    /// Dipole angular factor for `states[from] -> states[to]` with component `q`.
    pub fn dipole_factor(&self, from: usize, to: usize, q: i32) -> Result<f64> {
        let (a, b) = (self.states[from], self.states[to]);
        dipole_angular_factor(
            self.scenario.j(a.role),
            a.f,
            a.m,
            self.scenario.j(b.role),
            b.f,
            b.m,
            q,
            self.scenario.nuclear_spin,
        )
    }
}
