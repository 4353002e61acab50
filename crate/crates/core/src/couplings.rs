//! Dipole couplings between sublevels for each applied field, and the
//! transition-diagram export.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::model::{Role, StateBasis, Sublevel};
use crate::polarization::Polarization;
use crate::{Complex64, HalfInteger};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    Probe,
    Coupling,
    Rf,
}

impl FieldKind {
    pub const ALL: [FieldKind; 3] = [FieldKind::Probe, FieldKind::Coupling, FieldKind::Rf];

    /// `(lower, upper)` roles the field connects in the ladder.
    pub fn default_roles(self) -> (Role, Role) {
        match self {
            FieldKind::Probe => (Role::Ground, Role::Intermediate),
            FieldKind::Coupling => (Role::Intermediate, Role::RydbergLower),
            FieldKind::Rf => (Role::RydbergLower, Role::RydbergUpper),
        }
    }
}

impl fmt::Display for FieldKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FieldKind::Probe => "probe",
            FieldKind::Coupling => "coupling",
            FieldKind::Rf => "rf",
        })
    }
}

/// A monochromatic field. `rabi_mhz` is the radial Rabi frequency as a linear
/// frequency: the angular Rabi frequency is `2π × rabi_mhz`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub kind: FieldKind,
    pub rabi_mhz: f64,
    pub polarization: Polarization,
    pub connects: (Role, Role),
}

impl FieldSpec {
    pub fn new(kind: FieldKind, rabi_mhz: f64, polarization: Polarization) -> Result<Self> {
        if !(rabi_mhz >= 0.0 && rabi_mhz.is_finite()) {
            return Err(invalid(format!("{kind} Rabi frequency {rabi_mhz} MHz must be finite and non-negative")));
        }
        Ok(FieldSpec { kind, rabi_mhz, polarization, connects: kind.default_roles() })
    }

    pub fn probe(rabi_mhz: f64, polarization: Polarization) -> Result<Self> {
        Self::new(FieldKind::Probe, rabi_mhz, polarization)
    }

    pub fn coupling(rabi_mhz: f64, polarization: Polarization) -> Result<Self> {
        Self::new(FieldKind::Coupling, rabi_mhz, polarization)
    }

    pub fn rf(rabi_mhz: f64, polarization: Polarization) -> Result<Self> {
        Self::new(FieldKind::Rf, rabi_mhz, polarization)
    }

    pub fn with_rabi(self, rabi_mhz: f64) -> Self {
        FieldSpec { rabi_mhz, ..self }
    }
}

/// One dipole coupling `from -> to` (from the lower to the upper role).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Coupling {
    pub from: usize,
    pub to: usize,
    /// `m_F(to) - m_F(from)`.
    pub q: i32,
    /// Angular factor times polarization weight; real for polarizations in
    /// the x–z plane.
    pub amplitude: Complex64,
    /// `|amplitude|^2`.
    pub strength: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CouplingSet {
    pub field: FieldSpec,
    pub couplings: Vec<Coupling>,
}

impl CouplingSet {
    pub fn len(&self) -> usize {
        self.couplings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.couplings.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Coupling> {
        self.couplings.iter()
    }

    pub fn total_strength(&self) -> f64 {
        self.couplings.iter().map(|c| c.strength).sum()
    }
}

/// Enumerates every dipole-allowed coupling the field drives in `basis`.
///
/// Walks each lower sublevel over the three spherical components and the
/// upper manifolds with `|ΔF| <= 1`, keeping pairs whose angular factor and
/// polarization weight are both non-zero.
pub fn enumerate_couplings(basis: &StateBasis, field: &FieldSpec) -> Result<CouplingSet> {
    let (lower, upper) = field.connects;
    if lower == upper {
        return Err(invalid(format!("{} field connects {lower} to itself", field.kind)));
    }
    let upper_fs = basis.scenario().included(upper).to_vec();
    let weights: Vec<(i32, Complex64)> = (-1..=1)
        .map(|q| (q, field.polarization.drive_weight(q)))
        .filter(|(_, w)| w.norm() > 0.0)
        .collect();

    let mut couplings = Vec::new();
    for from in basis.indices_of(lower) {
        let s = basis.state(from);
        for &(q, weight) in &weights {
            let m_to = s.m + HalfInteger::integer(q);
            for &f_to in &upper_fs {
                if (f_to - s.f).abs() > HalfInteger::ONE {
                    continue;
                }
                let Some(to) = basis.index_of(&Sublevel { role: upper, f: f_to, m: m_to }) else {
                    continue;
                };
                let factor = basis.dipole_factor(from, to, q)?;
                if factor == 0.0 {
                    continue;
                }
                let amplitude = weight * factor;
                couplings.push(Coupling { from, to, q, amplitude, strength: amplitude.norm_sqr() });
            }
        }
    }
    Ok(CouplingSet { field: *field, couplings })
}

/// Number of couplings accepted by `filter` (all of them when `None`).
pub fn count_transitions(set: &CouplingSet, filter: Option<&dyn Fn(&Coupling) -> bool>) -> usize {
    match filter {
        Some(keep) => set.couplings.iter().filter(|c| keep(c)).count(),
        None => set.couplings.len(),
    }
}

/// Filter keeping couplings whose lower-side sublevel is optically reachable.
pub fn reachable_origin(basis: &StateBasis) -> impl Fn(&Coupling) -> bool + '_ {
    move |c| basis.optically_reachable(c.from)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagramNode {
    pub id: usize,
    pub role: Role,
    pub level: String,
    #[serde(rename = "F")]
    pub f: HalfInteger,
    #[serde(rename = "mF")]
    pub m_f: HalfInteger,
    /// Layout hint: role rank plus a small per-F offset so degenerate
    /// manifolds can be told apart.
    pub vertical_offset: f64,
    pub optically_reachable: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagramEdge {
    pub from: usize,
    pub to: usize,
    pub field: FieldKind,
    pub q: i32,
    pub amplitude: f64,
    /// Imaginary part of the amplitude; zero for x–z plane polarizations.
    pub amplitude_im: f64,
    /// Line strength normalized to the strongest line of the same field.
    pub strength: f64,
    pub reachable_origin: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagramGraph {
    pub scenario: String,
    pub nodes: Vec<DiagramNode>,
    pub edges: Vec<DiagramEdge>,
}

const MANIFOLD_SPACING: f64 = 0.08;

pub fn export_diagram(basis: &StateBasis, sets: &[CouplingSet]) -> DiagramGraph {
    let scenario = basis.scenario();
    let nodes = basis
        .states()
        .iter()
        .enumerate()
        .map(|(id, s)| {
            let mut fs = scenario.included(s.role).to_vec();
            fs.sort();
            let rank = fs.iter().position(|&f| f == s.f).unwrap_or(0);
            DiagramNode {
                id,
                role: s.role,
                level: scenario.level(s.role).label.clone(),
                f: s.f,
                m_f: s.m,
                vertical_offset: s.role.index() as f64 + MANIFOLD_SPACING * rank as f64,
                optically_reachable: basis.optically_reachable(id),
            }
        })
        .collect();

    let mut edges = Vec::new();
    for set in sets {
        let max = set.couplings.iter().map(|c| c.strength).fold(0.0, f64::max);
        edges.extend(set.couplings.iter().map(|c| DiagramEdge {
            from: c.from,
            to: c.to,
            field: set.field.kind,
            q: c.q,
            amplitude: c.amplitude.re,
            amplitude_im: c.amplitude.im,
            strength: c.strength / max,
            reachable_origin: basis.optically_reachable(c.from),
        }));
    }
    DiagramGraph { scenario: scenario.name.clone(), nodes, edges }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_basis, scenario_full, scenario_truncated};

    fn rf_pi() -> FieldSpec {
        FieldSpec::rf(200.0, Polarization::Z).unwrap()
    }

    #[test]
    fn rf_counts() {
        let full = build_basis(&scenario_full(), Default::default()).unwrap();
        let set = enumerate_couplings(&full, &rf_pi()).unwrap();
        assert_eq!(count_transitions(&set, None), 84);

        let trunc = build_basis(&scenario_truncated(), Default::default()).unwrap();
        let set = enumerate_couplings(&trunc, &rf_pi()).unwrap();
        assert_eq!(count_transitions(&set, None), 54);
        assert_eq!(count_transitions(&set, Some(&reachable_origin(&trunc))), 50);
        assert_eq!(count_transitions(&set, Some(&|_: &Coupling| false)), 0);
    }

    #[test]
    fn optical_counts() {
        let b = build_basis(&scenario_truncated(), Default::default()).unwrap();
        let probe = enumerate_couplings(&b, &FieldSpec::probe(0.5, Polarization::Z).unwrap()).unwrap();
        assert_eq!(probe.len(), 9);
        let coupling = enumerate_couplings(&b, &FieldSpec::coupling(20.0, Polarization::Z).unwrap()).unwrap();
        // F=5 -> F'=4 (9), 5 (10, no 0->0), 6 (11)
        assert_eq!(coupling.len(), 30);
        assert_eq!(count_transitions(&coupling, Some(&reachable_origin(&b))), 26);
    }

    #[test]
    fn couplings_obey_selection_rules() {
        let b = build_basis(&scenario_full(), Default::default()).unwrap();
        for pol in [Polarization::Z, Polarization::X, Polarization::Y, Polarization::in_xz_plane(30.0)] {
            let set = enumerate_couplings(&b, &FieldSpec::rf(1.0, pol).unwrap()).unwrap();
            for c in set.iter() {
                let (a, z) = (b.state(c.from), b.state(c.to));
                assert!((z.f - a.f).abs() <= HalfInteger::ONE);
                assert_eq!((z.m - a.m).twice(), 2 * c.q);
                assert!(c.strength > 0.0);
            }
        }
    }

    #[test]
    fn diagram_normalization() {
        let b = build_basis(&scenario_truncated(), Default::default()).unwrap();
        let sets: Vec<_> = [
            FieldSpec::probe(0.5, Polarization::Z),
            FieldSpec::coupling(20.0, Polarization::Z),
            FieldSpec::rf(200.0, Polarization::Z),
        ]
        .into_iter()
        .map(|f| enumerate_couplings(&b, &f.unwrap()).unwrap())
        .collect();
        let g = export_diagram(&b, &sets);
        assert_eq!(g.nodes.len(), 80);
        assert_eq!(g.edges.len(), 9 + 30 + 54);
        assert!(g.edges.iter().all(|e| e.strength > 0.0 && e.strength <= 1.0));
        for kind in FieldKind::ALL {
            let max = g.edges.iter().filter(|e| e.field == kind).map(|e| e.strength).fold(0.0, f64::max);
            assert_eq!(max, 1.0);
        }
        let rf_flagged = g.edges.iter().filter(|e| e.field == FieldKind::Rf && e.reachable_origin).count();
        assert_eq!(rf_flagged, 50);
        assert!(export_diagram(&b, &[]).edges.is_empty());
    }

    #[test]
    fn negative_rabi_rejected() {
        assert!(FieldSpec::rf(-1.0, Polarization::Z).is_err());
        assert!(FieldSpec::rf(f64::NAN, Polarization::Z).is_err());
    }
}
