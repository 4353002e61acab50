//! Linear field polarizations and their spherical-basis components.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::Complex64;

/// Components smaller than this are treated as exactly zero when deciding
/// whether a polarization drives a given `q`.
pub const COMPONENT_CUTOFF: f64 = 1e-12;

/// Real unit polarization vector in the lab frame (quantization axis `z`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct Polarization([f64; 3]);

impl Polarization {
    pub const Z: Polarization = Polarization([0.0, 0.0, 1.0]);
    pub const X: Polarization = Polarization([1.0, 0.0, 0.0]);
    pub const Y: Polarization = Polarization([0.0, 1.0, 0.0]);

    /// Normalizes `v`; the zero vector is rejected. Vectors already of unit
    /// length to within a few ulps are kept bit for bit.
    pub fn new(v: [f64; 3]) -> Result<Self> {
        let n = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if !n.is_finite() || n == 0.0 {
            return Err(invalid(format!("polarization {v:?} cannot be normalized")));
        }
        if (n - 1.0).abs() <= 4.0 * f64::EPSILON {
            return Ok(Polarization(v));
        }
        Ok(Polarization(v.map(|c| c / n)))
    }

    /// Linear polarization in the x–z plane at `angle_deg` from the z axis.
    pub fn in_xz_plane(angle_deg: f64) -> Self {
        let a = angle_deg.to_radians();
        Polarization([a.sin(), 0.0, a.cos()])
    }

    pub fn vector(&self) -> [f64; 3] {
        self.0
    }

    /// Spherical components `(e_-1, e_0, e_+1)` with
    /// `e_0 = z·ε` and `e_±1 = ∓(x·ε ± i y·ε)/√2`.
    pub fn spherical_components(&self) -> [Complex64; 3] {
        spherical_components_of(self.0)
    }

    /// Weight of spherical component `q` in the dipole operator `d·ε*`;
    /// for a real `ε` this is `conj(e_q)`. Components below
    /// [`COMPONENT_CUTOFF`] are returned as zero.
    pub fn drive_weight(&self, q: i32) -> Complex64 {
        let e = self.spherical_components()[(q + 1) as usize].conj();
        if e.norm() < COMPONENT_CUTOFF {
            Complex64::new(0.0, 0.0)
        } else {
            e
        }
    }
}

/// Spherical components of an arbitrary (non-zero) real vector; see
/// [`Polarization::spherical_components`] for the convention.
pub fn spherical_components(v: [f64; 3]) -> Result<[Complex64; 3]> {
    Ok(Polarization::new(v)?.spherical_components())
}

fn spherical_components_of([x, y, z]: [f64; 3]) -> [Complex64; 3] {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    [
        Complex64::new(x, -y) * r,
        Complex64::new(z, 0.0),
        -Complex64::new(x, y) * r,
    ]
}

impl TryFrom<[f64; 3]> for Polarization {
    type Error = crate::Error;
    fn try_from(v: [f64; 3]) -> Result<Self> {
        Polarization::new(v)
    }
}

impl From<Polarization> for [f64; 3] {
    fn from(p: Polarization) -> Self {
        p.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-15
    }

    #[test]
    fn axis_components() {
        let z = Polarization::Z.spherical_components();
        assert!(close(z[0], 0.0.into()) && close(z[1], 1.0.into()) && close(z[2], 0.0.into()));
        let r = 0.5f64.sqrt();
        let x = Polarization::X.spherical_components();
        assert!(close(x[0], r.into()) && close(x[1], 0.0.into()) && close(x[2], (-r).into()));
    }

    #[test]
    fn normalization() {
        let c = spherical_components([1.0, 0.0, 1.0]).unwrap();
        let total: f64 = c.iter().map(|z| z.norm_sqr()).sum();
        assert!((total - 1.0).abs() < 1e-15);
        assert!(spherical_components([0.0; 3]).is_err());
    }

    #[test]
    fn rotated_to_x_drops_pi_component() {
        let p = Polarization::in_xz_plane(90.0);
        assert_eq!(p.drive_weight(0), Complex64::new(0.0, 0.0));
        assert!(p.drive_weight(1).norm() > 0.7);
    }
}
