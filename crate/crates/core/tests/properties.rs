use proptest::prelude::*;

use rydberg_dress::angular::{wigner3j, wigner6j, HalfInteger};
use rydberg_dress::couplings::{enumerate_couplings, FieldSpec};
use rydberg_dress::dressing::{build_rf_hamiltonian, diagonalize, unique_eigenvalues};
use rydberg_dress::model::{build_basis, scenario_full, scenario_truncated, StateBasis};
use rydberg_dress::polarization::Polarization;
use rydberg_dress::spectrum::find_peaks;
use rydberg_dress::validate::oracle;

fn h(twice: i32) -> HalfInteger {
    HalfInteger::from_twice(twice)
}

fn w3(t: [i32; 6]) -> f64 {
    wigner3j(h(t[0]), h(t[1]), h(t[2]), h(t[3]), h(t[4]), h(t[5])).unwrap().value
}

fn w6(t: [i32; 6]) -> f64 {
    wigner6j(h(t[0]), h(t[1]), h(t[2]), h(t[3]), h(t[4]), h(t[5])).unwrap().value
}

/// `(j1, j2, j3, m1, m2, m3)` twice-values with `j <= 4` and valid projections.
fn threej_args() -> impl Strategy<Value = [i32; 6]> {
    (0..=8i32, 0..=8i32, 0..=8i32)
        .prop_filter("integral perimeter", |(a, b, c)| (a + b + c) % 2 == 0)
        .prop_flat_map(|(j1, j2, j3)| (Just(j1), Just(j2), Just(j3), 0..=j1, 0..=j2))
        .prop_map(|(j1, j2, j3, k1, k2)| [j1, j2, j3, 2 * k1 - j1, 2 * k2 - j2, j1 + j2 - 2 * k1 - 2 * k2])
        .prop_filter("projection in range", |t| t[5].abs() <= t[2])
}

fn polarization() -> impl Strategy<Value = Polarization> {
    (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64)
        .prop_filter("non-zero", |(x, y, z)| x * x + y * y + z * z > 1e-2)
        .prop_map(|(x, y, z)| Polarization::new([x, y, z]).unwrap())
}

fn basis(full: bool) -> StateBasis {
    build_basis(&if full { scenario_full() } else { scenario_truncated() }, Default::default()).unwrap()
}

fn sign(twice_sum: i32) -> f64 {
    if (twice_sum / 2) % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

proptest! {
    #[test]
    fn threej_symmetries(t in threej_args()) {
        let [j1, j2, j3, m1, m2, m3] = t;
        let w = w3(t);
        let odd = sign(j1 + j2 + j3);
        prop_assert!((w3([j2, j3, j1, m2, m3, m1]) - w).abs() < 1e-12);
        prop_assert!((w3([j2, j1, j3, m2, m1, m3]) - odd * w).abs() < 1e-12);
        prop_assert!((w3([j1, j2, j3, -m1, -m2, -m3]) - odd * w).abs() < 1e-12);
        prop_assert!((w - oracle::wigner3j_exact(j1, j2, j3, m1, m2, m3)).abs() < 1e-12);
    }

    #[test]
    fn sixj_tetrahedral_symmetry(t in prop::array::uniform6(0..=8i32)) {
        let [a, b, c, d, e, f] = t;
        let w = w6(t);
        prop_assert!((w6([b, a, c, e, d, f]) - w).abs() < 1e-12);
        prop_assert!((w6([c, a, b, f, d, e]) - w).abs() < 1e-12);
        prop_assert!((w6([d, e, c, a, b, f]) - w).abs() < 1e-12);
        prop_assert!((w - oracle::wigner6j_exact(a, b, c, d, e, f)).abs() < 1e-12);
    }

    #[test]
    fn threej_row_orthogonality(j1 in 0..=8i32, j2 in 0..=8i32, m3k in 0..=16i32) {
        // Σ_{m1} (2j3+1) (j1 j2 j3; m1 m2 m3)^2 = 1 for every allowed j3.
        let mut j3 = (j1 - j2).abs();
        while j3 <= j1 + j2 {
            let m3 = -j3 + 2 * (m3k % (j3 + 1));
            let mut sum = 0.0;
            let mut m1 = -j1;
            while m1 <= j1 {
                let m2 = -m1 - m3;
                if m2.abs() <= j2 {
                    sum += w3([j1, j2, j3, m1, m2, m3]).powi(2);
                }
                m1 += 2;
            }
            prop_assert!((sum * f64::from(j3 + 1) - 1.0).abs() < 1e-12);
            j3 += 2;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn reordering_the_basis_changes_nothing(seed in any::<u64>(), full in any::<bool>()) {
        let b = basis(full);
        let mut order: Vec<usize> = (0..b.len()).collect();
        let mut state = seed | 1;
        for k in (1..order.len()).rev() {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            order.swap(k, (state % (k as u64 + 1)) as usize);
        }
        let shuffled = b.reordered(&order).unwrap();
        let rf = FieldSpec::rf(200.0, Polarization::Z).unwrap();
        let (a, s) = (enumerate_couplings(&b, &rf).unwrap(), enumerate_couplings(&shuffled, &rf).unwrap());
        prop_assert_eq!(a.len(), s.len());
        prop_assert!((a.total_strength() - s.total_strength()).abs() < 1e-12);
        let reach = |x: &StateBasis| x.optical_flags().iter().filter(|&&f| f).count();
        prop_assert_eq!(reach(&b), reach(&shuffled));
        let ua = diagonalize(&build_rf_hamiltonian::<f64>(&b, &rf).unwrap()).unwrap().unique;
        let us = diagonalize(&build_rf_hamiltonian::<f64>(&shuffled, &rf).unwrap()).unwrap().unique;
        prop_assert_eq!(ua.len(), us.len());
    }

    #[test]
    fn total_strength_is_rotation_invariant(pol in polarization(), full in any::<bool>()) {
        let b = basis(full);
        let z = enumerate_couplings(&b, &FieldSpec::rf(1.0, Polarization::Z).unwrap()).unwrap().total_strength();
        let r = enumerate_couplings(&b, &FieldSpec::rf(1.0, pol).unwrap()).unwrap().total_strength();
        prop_assert!((z - r).abs() < 1e-12 * z);
    }

    #[test]
    fn dressed_spectrum_is_chiral_and_isotropic(pol in polarization(), rabi in 1.0..500.0f64, full in any::<bool>()) {
        let b = basis(full);
        let e = diagonalize(&build_rf_hamiltonian::<f64>(&b, &FieldSpec::rf(rabi, pol).unwrap()).unwrap()).unwrap();
        let n = e.eigenvalues.len();
        for k in 0..n {
            prop_assert!((e.eigenvalues[k] + e.eigenvalues[n - 1 - k]).abs() <= 1e-9 * rabi);
        }
        let z = diagonalize(&build_rf_hamiltonian::<f64>(&b, &FieldSpec::rf(rabi, Polarization::Z).unwrap()).unwrap()).unwrap();
        for (a, c) in e.eigenvalues.iter().zip(&z.eigenvalues) {
            prop_assert!((a - c).abs() <= 1e-9 * rabi);
        }
    }

    #[test]
    fn eigenvalues_scale_with_rabi(scale in 0.1..10.0f64) {
        let b = basis(false);
        let base = diagonalize(&build_rf_hamiltonian::<f64>(&b, &FieldSpec::rf(100.0, Polarization::Z).unwrap()).unwrap()).unwrap();
        let scaled = diagonalize(&build_rf_hamiltonian::<f64>(&b, &FieldSpec::rf(100.0 * scale, Polarization::Z).unwrap()).unwrap()).unwrap();
        for (a, c) in base.eigenvalues.iter().zip(&scaled.eigenvalues) {
            prop_assert!((a * scale - c).abs() <= 1e-9 * 100.0 * scale);
        }
        prop_assert_eq!(base.unique.len(), scaled.unique.len());
    }

    #[test]
    fn clustering_is_order_free(mut values in prop::collection::vec(-10.0..10.0f64, 0..40), seed in any::<u64>()) {
        let sorted = unique_eigenvalues(&values, 1e-3).unwrap();
        let k = (seed as usize) % values.len().max(1);
        values.rotate_left(k);
        prop_assert_eq!(unique_eigenvalues(&values, 1e-3).unwrap(), sorted);
    }

    #[test]
    fn twin_lorentzians_found(center in 5.0..100.0f64, width in 0.5..4.0f64) {
        let x: Vec<f64> = (0..601).map(|k| -300.0 + k as f64).collect();
        let l = |v: f64, c: f64| 1.0 / (1.0 + ((v - c) / width).powi(2));
        let y: Vec<f64> = x.iter().map(|&v| l(v, center) + l(v, -center)).collect();
        let p = find_peaks(&x, &y, 0.02);
        prop_assert_eq!(p.len(), 2);
        prop_assert!((p[0] + center).abs() <= 1.0 && (p[1] - center).abs() <= 1.0);
    }
}
