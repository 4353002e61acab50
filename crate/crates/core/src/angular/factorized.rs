//! Exact arithmetic on products of factorials, held as prime exponent vectors.
//!
//! A Racah-type sum `sqrt(P) * sum_k s_k * R_k`, where `P` and every `R_k` are
//! ratios of factorials, is evaluated by pulling the smallest power of each
//! prime out of all terms so the remaining sum is over integers. Only the
//! final `sqrt(num / den)` is rounded to floating point.

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, ToPrimitive, Zero};

/// Primes `<= n` by trial division; arguments here stay in the tens.
fn primes_up_to(n: u32) -> Vec<u32> {
    (2..=n).filter(|&k| (2..k).take_while(|d| d * d <= k).all(|d| k % d != 0)).collect()
}

/// Multiplicative expression `prod_p p^e_p` with signed integer exponents.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub(crate) struct Factored {
    exponents: Vec<i32>,
}

/// Shared prime table sized for the largest factorial seen in one evaluation.
pub(crate) struct PrimeTable {
    primes: Vec<u32>,
}

impl PrimeTable {
    pub(crate) fn for_factorials_up_to(n: u32) -> Self {
        PrimeTable { primes: primes_up_to(n.max(2)) }
    }

    pub(crate) fn one(&self) -> Factored {
        Factored { exponents: vec![0; self.primes.len()] }
    }

    /// Legendre's formula for the exponent of each prime in `n!`.
    pub(crate) fn factorial(&self, n: u32) -> Factored {
        let exponents = self
            .primes
            .iter()
            .map(|&p| {
                let mut e = 0i32;
                let mut pk = p as u64;
                while pk <= n as u64 {
                    e += (n as u64 / pk) as i32;
                    pk *= p as u64;
                }
                e
            })
            .collect();
        Factored { exponents }
    }

    fn to_biguint(&self, exps: impl Iterator<Item = i32>) -> BigUint {
        let mut acc = BigUint::one();
        for (&p, e) in self.primes.iter().zip(exps) {
            debug_assert!(e >= 0);
            if e > 0 {
                acc *= BigUint::from(p).pow(e as u32);
            }
        }
        acc
    }

    /// Evaluates `sqrt(radicand) * sum_k sign_k * term_k`.
    ///
    /// Returns the exact sign (`-1`, `0`, `+1`) and the rounded value.
    pub(crate) fn racah_sum(&self, radicand: &Factored, terms: &[(i8, Factored)]) -> (i8, f64) {
        if terms.is_empty() {
            return (0, 0.0);
        }
        let np = self.primes.len();
        let common: Vec<i32> = (0..np)
            .map(|i| terms.iter().map(|(_, t)| t.exponents[i]).min().unwrap_or(0))
            .collect();

        let mut sum = BigInt::zero();
        for (sign, term) in terms {
            let mag = self.to_biguint(term.exponents.iter().zip(&common).map(|(e, c)| e - c));
            let mag = BigInt::from_biguint(Sign::Plus, mag);
            if *sign < 0 {
                sum -= mag;
            } else {
                sum += mag;
            }
        }
        if sum.is_zero() {
            return (0, 0.0);
        }
        let sign: i8 = if sum.sign() == Sign::Minus { -1 } else { 1 };

        // value^2 = sum^2 * prod p^(2 c_p + r_p)
        let squared: Vec<i32> = (0..np).map(|i| 2 * common[i] + radicand.exponents[i]).collect();
        let sum_sq = sum.magnitude() * sum.magnitude();
        let num = sum_sq * self.to_biguint(squared.iter().map(|&e| e.max(0)));
        let den = self.to_biguint(squared.iter().map(|&e| (-e).max(0)));
        (sign, f64::from(sign) * ratio_to_f64(&num, &den).sqrt())
    }
}

impl Factored {
    pub(crate) fn mul(mut self, other: &Factored) -> Self {
        for (a, b) in self.exponents.iter_mut().zip(&other.exponents) {
            *a += b;
        }
        self
    }

    pub(crate) fn div(mut self, other: &Factored) -> Self {
        for (a, b) in self.exponents.iter_mut().zip(&other.exponents) {
            *a -= b;
        }
        self
    }
}

/// Correctly scaled `num / den` as `f64` for arbitrarily large operands.
fn ratio_to_f64(num: &BigUint, den: &BigUint) -> f64 {
    // Shift so the integer quotient carries ~120 significant bits.
    let shift = 120i64 + den.bits() as i64 - num.bits() as i64;
    let q = if shift >= 0 {
        (num << shift as usize) / den
    } else {
        num / (den << (-shift) as usize)
    };
    let mant = q.to_f64().unwrap_or(f64::INFINITY);
    mant * 2f64.powi(-shift as i32)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factorial_exponents() {
        let t = PrimeTable::for_factorials_up_to(10);
        // 10! = 2^8 3^4 5^2 7
        assert_eq!(t.factorial(10).exponents, vec![8, 4, 2, 1]);
        assert_eq!(t.factorial(0), t.one());
        assert_eq!(t.factorial(1), t.one());
    }

    #[test]
    fn sum_with_cancellation_is_exact_zero() {
        let t = PrimeTable::for_factorials_up_to(6);
        let f3 = t.factorial(3);
        let (sign, v) = t.racah_sum(&t.one(), &[(1, f3.clone()), (-1, f3)]);
        assert_eq!(sign, 0);
        assert_eq!(v, 0.0);
    }

    #[test]
    fn sqrt_of_ratio() {
        let t = PrimeTable::for_factorials_up_to(6);
        // sqrt(1/3!) * (4!/3! - 1) = 3 / sqrt(6)
        let radicand = t.one().div(&t.factorial(3));
        let terms = [(1, t.factorial(4).div(&t.factorial(3))), (-1, t.one())];
        let (sign, v) = t.racah_sum(&radicand, &terms);
        assert_eq!(sign, 1);
        assert!((v - 3.0 / 6f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn ratio_conversion_handles_huge_operands() {
        let big = BigUint::from(3u32).pow(400);
        let r = ratio_to_f64(&(&big * 7u32), &(&big * 2u32));
        assert_eq!(r, 3.5);
        assert!((ratio_to_f64(&BigUint::from(1u32), &BigUint::from(3u32)) - 1.0 / 3.0).abs() < 1e-17);
    }
}
