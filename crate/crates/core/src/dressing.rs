//! RF dressing of the two Rydberg levels: Hamiltonian assembly,
//! diagonalization and clustering of the dressed energies.
//!
//! The Hamiltonian is written in the frame rotating with the RF field, in MHz
//! (linear frequency). For a coupling `lower -> upper` with amplitude `a`,
//! `H[upper, lower] = (Ω_RF / 2) a` and `H[lower, upper]` is its conjugate.
//! With a resonant field and degenerate hyperfine manifolds the diagonal is
//! zero, so the spectrum comes in `±` pairs.

use num_complex::Complex;
use serde::Serialize;

use crate::angular::{fine_dipole_factor, HalfInteger};
use crate::couplings::{enumerate_couplings, FieldSpec};
use crate::error::{invalid, Error, Result};
use crate::linalg::{eigh, norm, Matrix};
use crate::model::{Role, StateBasis};
use crate::scalar::Real;

/// Relative cluster tolerance applied to the RF Rabi frequency.
pub const DEFAULT_RELATIVE_CLUSTER_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct RfHamiltonian<T: Real = f64> {
    /// Basis indices of the matrix rows: lower-level states first, then upper.
    pub basis_slice: Vec<usize>,
    pub lower_count: usize,
    pub matrix: Matrix<T>,
    pub rabi_mhz: f64,
}

/// Default clustering tolerance, `1e-6 · Ω_RF` (or `1e-6` MHz when the field is off).
pub fn default_cluster_tolerance(rabi_mhz: f64) -> f64 {
    let scale = if rabi_mhz > 0.0 { rabi_mhz } else { 1.0 };
    DEFAULT_RELATIVE_CLUSTER_TOLERANCE * scale
}

pub fn build_rf_hamiltonian<T: Real>(basis: &StateBasis, rf: &FieldSpec) -> Result<RfHamiltonian<T>> {
    if rf.connects != (Role::RydbergLower, Role::RydbergUpper) {
        return Err(invalid(format!(
            "RF dressing needs a field from {} to {}, got {} to {}",
            Role::RydbergLower,
            Role::RydbergUpper,
            rf.connects.0,
            rf.connects.1
        )));
    }
    let lower = basis.indices_of(Role::RydbergLower);
    let upper = basis.indices_of(Role::RydbergUpper);
    let lower_count = lower.len();
    let basis_slice: Vec<usize> = lower.into_iter().chain(upper).collect();
    let n = basis_slice.len();
    let mut position = vec![usize::MAX; basis.len()];
    for (k, &i) in basis_slice.iter().enumerate() {
        position[i] = k;
    }

    let mut matrix = Matrix::<T>::zeros(n, n);
    for (k, &i) in basis_slice.iter().enumerate() {
        matrix[(k, k)] = Complex::new(T::of(basis.energy_offset_mhz(i)), T::zero());
    }
    let half_rabi = rf.rabi_mhz / 2.0;
    for c in enumerate_couplings(basis, rf)?.iter() {
        let z = c.amplitude * half_rabi;
        let element = Complex::new(T::of(z.re), T::of(z.im));
        let (u, l) = (position[c.to], position[c.from]);
        matrix[(u, l)] += element;
        matrix[(l, u)] += element.conj();
    }
    Ok(RfHamiltonian { basis_slice, lower_count, matrix, rabi_mhz: rf.rabi_mhz })
}

impl<T: Real> RfHamiltonian<T> {
    pub fn dim(&self) -> usize {
        self.basis_slice.len()
    }

    /// Shifts the upper level by `-detuning_mhz`, the rotating-frame energy for
    /// an RF field detuned by `detuning_mhz` above resonance.
    pub fn with_rf_detuning(mut self, detuning_mhz: f64) -> Self {
        for k in self.lower_count..self.dim() {
            self.matrix[(k, k)] -= Complex::new(T::of(detuning_mhz), T::zero());
        }
        self
    }

    /// Negates every coupling between the given lower and upper manifolds.
    /// Used to inject a sign fault when exercising the validation suite.
    pub fn negate_block(&mut self, basis: &StateBasis, f_lower: HalfInteger, f_upper: HalfInteger) {
        let n = self.dim();
        for l in 0..self.lower_count {
            if basis.state(self.basis_slice[l]).f != f_lower {
                continue;
            }
            for u in self.lower_count..n {
                if basis.state(self.basis_slice[u]).f == f_upper {
                    self.matrix[(u, l)] = -self.matrix[(u, l)];
                    self.matrix[(l, u)] = -self.matrix[(l, u)];
                }
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct DressedResult<T: Real = f64> {
    /// Ascending, MHz.
    pub eigenvalues: Vec<T>,
    /// Column `k` is the eigenvector of `eigenvalues[k]`, rows follow `basis_slice`.
    pub eigenvectors: Matrix<T>,
    pub unique: Vec<T>,
    pub cluster_tolerance: T,
    pub basis_slice: Vec<usize>,
}

/// Serializable summary of a [`DressedResult`].
#[derive(Clone, Debug, Serialize)]
pub struct DressedSummary {
    pub eigenvalues_mhz: Vec<f64>,
    pub unique_eigenvalues_mhz: Vec<f64>,
    pub unique_count: usize,
    pub cluster_tolerance_mhz: f64,
}

impl<T: Real> DressedResult<T> {
    pub fn summary(&self) -> DressedSummary {
        DressedSummary {
            eigenvalues_mhz: self.eigenvalues.iter().map(|v| v.as_f64()).collect(),
            unique_eigenvalues_mhz: self.unique.iter().map(|v| v.as_f64()).collect(),
            unique_count: self.unique.len(),
            cluster_tolerance_mhz: self.cluster_tolerance.as_f64(),
        }
    }

    /// Indices of eigenvalues within the cluster tolerance of `energy`.
    pub fn cluster_members(&self, energy: T) -> Vec<usize> {
        (0..self.eigenvalues.len())
            .filter(|&k| (self.eigenvalues[k] - energy).abs() <= self.cluster_tolerance)
            .collect()
    }
}

/// Diagonalizes with the default tolerance `1e-6 · Ω_RF`.
pub fn diagonalize<T: Real>(h: &RfHamiltonian<T>) -> Result<DressedResult<T>> {
    diagonalize_with_tolerance(h, T::of(default_cluster_tolerance(h.rabi_mhz)))
}

pub fn diagonalize_with_tolerance<T: Real>(h: &RfHamiltonian<T>, tolerance: T) -> Result<DressedResult<T>> {
    if !(tolerance > T::zero()) {
        return Err(invalid(format!("cluster tolerance must be positive, got {tolerance}")));
    }
    let scale = h.matrix.frobenius_norm();
    let hermitian_tol = T::of(1e-12).max(T::of(10.0) * T::epsilon()) * scale.max(T::one());
    let deviation = h.matrix.hermitian_deviation();
    if deviation > hermitian_tol {
        return Err(Error::ContractViolation(format!("RF Hamiltonian is not Hermitian (deviation {deviation})")));
    }

    let decomposition = eigh(&h.matrix)?;
    let residual_tol = T::of(1e-9).max(T::of(1e3) * T::epsilon()) * scale;
    for (k, &lambda) in decomposition.values.iter().enumerate() {
        let v = decomposition.vectors.column(k);
        let hv = h.matrix.mul_vec(&v);
        let r: Vec<_> = hv.iter().zip(&v).map(|(a, b)| *a - *b * lambda).collect();
        if norm(&r) > residual_tol {
            return Err(Error::ContractViolation(format!("eigenpair {k} residual {} exceeds {residual_tol}", norm(&r))));
        }
    }

    let unique = unique_eigenvalues(&decomposition.values, tolerance)?;
    Ok(DressedResult {
        eigenvalues: decomposition.values,
        eigenvectors: decomposition.vectors,
        unique,
        cluster_tolerance: tolerance,
        basis_slice: h.basis_slice.clone(),
    })
}

/// Seed-anchored greedy clustering: scanning in ascending order, a value more
/// than `tolerance` above the first member (the seed) of the current cluster
/// opens a new cluster. Each cluster is represented by its mean.
pub fn unique_eigenvalues<T: Real>(values: &[T], tolerance: T) -> Result<Vec<T>> {
    if !(tolerance > T::zero()) {
        return Err(invalid(format!("cluster tolerance must be positive, got {tolerance}")));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));

    let mut out = Vec::new();
    let mut iter = sorted.into_iter().peekable();
    while let Some(seed) = iter.next() {
        let mut sum = seed;
        let mut count = T::one();
        while let Some(&next) = iter.peek() {
            if next - seed > tolerance {
                break;
            }
            sum += next;
            count += T::one();
            iter.next();
        }
        out.push(sum / count);
    }
    Ok(out)
}

/// Eigenvalues (MHz, ascending) of the RF Hamiltonian between two
/// fine-structure levels without nuclear spin, quantized along the RF
/// polarization so only `q = 0` couples.
pub fn fine_structure_reference(j_lower: HalfInteger, j_upper: HalfInteger, rf: &FieldSpec) -> Result<Vec<f64>> {
    let lower: Vec<_> = j_lower.projections().collect();
    let upper: Vec<_> = j_upper.projections().collect();
    let n = lower.len() + upper.len();
    let mut matrix = Matrix::<f64>::zeros(n, n);
    for (l, &m) in lower.iter().enumerate() {
        for (u, &mu) in upper.iter().enumerate() {
            if mu != m {
                continue;
            }
            let a = fine_dipole_factor(j_lower, m, j_upper, mu, 0)?;
            let z = Complex::new(rf.rabi_mhz / 2.0 * a, 0.0);
            matrix[(lower.len() + u, l)] = z;
            matrix[(l, lower.len() + u)] = z;
        }
    }
    Ok(eigh(&matrix)?.values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_basis, scenario_full, scenario_truncated};
    use crate::polarization::Polarization;

    fn rf(rabi: f64) -> FieldSpec {
        FieldSpec::rf(rabi, Polarization::Z).unwrap()
    }

    #[test]
    fn clustering_rules() {
        assert_eq!(unique_eigenvalues(&[0.0, 0.0, 0.0], 1e-6).unwrap(), vec![0.0]);
        assert_eq!(unique_eigenvalues(&[0.0, 0.5, 1.0], 0.6).unwrap(), vec![0.25, 1.0]);
        assert_eq!(unique_eigenvalues::<f64>(&[], 1.0).unwrap(), Vec::<f64>::new());
        assert!(unique_eigenvalues(&[1.0], 0.0).is_err());
        assert!(unique_eigenvalues(&[1.0f32], -1.0).is_err());
    }

    #[test]
    fn zero_field_is_zero_matrix() {
        let b = build_basis(&scenario_full(), Default::default()).unwrap();
        let h = build_rf_hamiltonian::<f64>(&b, &rf(0.0)).unwrap();
        assert_eq!(h.matrix.count_nonzero(), 0);
        let d = diagonalize(&h).unwrap();
        assert_eq!(d.unique, vec![0.0]);
    }

    #[test]
    fn full_matrix_structure() {
        let b = build_basis(&scenario_full(), Default::default()).unwrap();
        let h = build_rf_hamiltonian::<f64>(&b, &rf(200.0)).unwrap();
        assert_eq!(h.dim(), 80);
        assert_eq!(h.matrix.count_nonzero(), 2 * 84);
        for k in 0..80 {
            assert_eq!(h.matrix[(k, k)], Complex::new(0.0, 0.0));
        }
        // bipartite
        for r in 0..48 {
            for c in 0..48 {
                assert_eq!(h.matrix[(r, c)], Complex::new(0.0, 0.0));
            }
        }
    }

    #[test]
    fn unique_counts() {
        for (scenario, expected) in [(scenario_full(), 5), (scenario_truncated(), 25)] {
            let b = build_basis(&scenario, Default::default()).unwrap();
            let d = diagonalize(&build_rf_hamiltonian::<f64>(&b, &rf(200.0)).unwrap()).unwrap();
            assert_eq!(d.unique.len(), expected, "{}", scenario.name);
        }
    }

    #[test]
    fn single_precision_counts() {
        let b = build_basis(&scenario_full(), Default::default()).unwrap();
        let h = build_rf_hamiltonian::<f32>(&b, &rf(200.0)).unwrap();
        // f32 rounding is ~1e-5 MHz at this scale; cluster at 1e-4 relative.
        let d = diagonalize_with_tolerance(&h, 200.0f32 * 1e-4).unwrap();
        assert_eq!(d.unique.len(), 5);
    }

    #[test]
    fn wrong_roles_rejected() {
        let b = build_basis(&scenario_full(), Default::default()).unwrap();
        let coupling = FieldSpec::coupling(20.0, Polarization::Z).unwrap();
        assert!(build_rf_hamiltonian::<f64>(&b, &coupling).is_err());
    }

    #[test]
    fn non_hermitian_rejected() {
        let b = build_basis(&scenario_truncated(), Default::default()).unwrap();
        let mut h = build_rf_hamiltonian::<f64>(&b, &rf(200.0)).unwrap();
        h.matrix[(0, 40)] += Complex::new(1.0, 0.0);
        assert!(matches!(diagonalize(&h), Err(Error::ContractViolation(_))));
    }

    #[test]
    fn detuning_enters_upper_diagonal() {
        let b = build_basis(&scenario_truncated(), Default::default()).unwrap();
        let h = build_rf_hamiltonian::<f64>(&b, &rf(0.0)).unwrap().with_rf_detuning(3.0);
        let d = diagonalize(&h).unwrap();
        assert_eq!(d.unique, vec![-3.0, 0.0]);
    }

    #[test]
    fn fine_structure_zero_field() {
        let v = fine_structure_reference(HalfInteger::half(5), HalfInteger::half(3), &rf(0.0)).unwrap();
        assert_eq!(v, vec![0.0; 10]);
    }
}
