//! Angular momentum algebra: Wigner 3j and 6j symbols, Clebsch–Gordan
//! coefficients and the hyperfine electric-dipole angular factor.
//!
//! Symbols are evaluated with the Racah formulas over prime-factorized
//! factorials, so selection-rule zeros and cancellations are exact and only the
//! last square root is rounded. Results are memoized in per-thread caches.
//!
//! # Phase convention
//!
//! Condon–Shortley throughout. The dipole factor for a transition *from*
//! `|J F m_F>` *to* `|J' F' m_F'>` driven by spherical component `q` is the
//! reduced matrix element ratio
//!
//! ```text
//! <J' F' m_F'| d_q |J F m_F> / <J'||d||J>
//!   = (-1)^(F'-m_F') ( F'  1  F  ) (-1)^(J'+I+F+1) sqrt((2F+1)(2F'+1)) { J' F' I }
//!                    (-m_F' q m_F)                                     { F  J  1 }
//! ```
//!
//! which is non-zero only when `m_F' = m_F + q`.

mod factorized;
mod half_integer;

use std::cell::RefCell;
use std::collections::HashMap;

pub use half_integer::HalfInteger;

use crate::error::{invalid, Result};
use factorized::{Factored, PrimeTable};

/// A rounded angular-momentum symbol together with its exact sign.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SymbolValue {
    pub value: f64,
    /// Exact sign of the symbol; `0` means the symbol vanishes identically.
    pub sign: i8,
}

impl SymbolValue {
    pub const ZERO: SymbolValue = SymbolValue { value: 0.0, sign: 0 };

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }
}

thread_local! {
    static THREEJ_CACHE: RefCell<HashMap<[i32; 6], SymbolValue>> = RefCell::new(HashMap::new());
    static SIXJ_CACHE: RefCell<HashMap<[i32; 6], SymbolValue>> = RefCell::new(HashMap::new());
}

/// `(-1)^(twice / 2)`; `twice` must be even.
fn parity(twice: i32) -> f64 {
    debug_assert!(twice % 2 == 0);
    if (twice / 2).rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Triangle rule plus integral perimeter, on twice-values.
fn is_triad(a: i32, b: i32, c: i32) -> bool {
    c >= (a - b).abs() && c <= a + b && (a + b + c) % 2 == 0
}

/// Integer factorial argument from a twice-value sum.
fn half(twice: i32) -> u32 {
    debug_assert!(twice >= 0 && twice % 2 == 0);
    (twice / 2) as u32
}

fn triangle_delta(t: &PrimeTable, a: i32, b: i32, c: i32) -> Factored {
    t.factorial(half(a + b - c))
        .mul(&t.factorial(half(a - b + c)))
        .mul(&t.factorial(half(-a + b + c)))
        .div(&t.factorial(half(a + b + c) + 1))
}

/// Wigner 3j symbol `(j1 j2 j3; m1 m2 m3)`.
pub fn wigner3j(
    j1: HalfInteger,
    j2: HalfInteger,
    j3: HalfInteger,
    m1: HalfInteger,
    m2: HalfInteger,
    m3: HalfInteger,
) -> Result<SymbolValue> {
    HalfInteger::check_projection(j1, m1)?;
    HalfInteger::check_projection(j2, m2)?;
    HalfInteger::check_projection(j3, m3)?;
    let key = [j1.twice(), j2.twice(), j3.twice(), m1.twice(), m2.twice(), m3.twice()];
    if let Some(hit) = THREEJ_CACHE.with(|c| c.borrow().get(&key).copied()) {
        return Ok(hit);
    }
    let value = threej_uncached(key);
    THREEJ_CACHE.with(|c| c.borrow_mut().insert(key, value));
    Ok(value)
}

fn threej_uncached([j1, j2, j3, m1, m2, m3]: [i32; 6]) -> SymbolValue {
    if m1 + m2 + m3 != 0 || !is_triad(j1, j2, j3) {
        return SymbolValue::ZERO;
    }
    let t = PrimeTable::for_factorials_up_to(half(j1 + j2 + j3) + 1);
    let radicand = triangle_delta(&t, j1, j2, j3)
        .mul(&t.factorial(half(j1 + m1)))
        .mul(&t.factorial(half(j1 - m1)))
        .mul(&t.factorial(half(j2 + m2)))
        .mul(&t.factorial(half(j2 - m2)))
        .mul(&t.factorial(half(j3 + m3)))
        .mul(&t.factorial(half(j3 - m3)));

    // Summation index in twice-units.
    let kmin = 0.max(j2 - j3 - m1).max(j1 - j3 + m2);
    let kmax = (j1 + j2 - j3).min(j1 - m1).min(j2 + m2);
    let mut terms = Vec::new();
    let mut k = kmin;
    while k <= kmax {
        let den = t
            .factorial(half(k))
            .mul(&t.factorial(half(j3 - j2 + k + m1)))
            .mul(&t.factorial(half(j3 - j1 + k - m2)))
            .mul(&t.factorial(half(j1 + j2 - j3 - k)))
            .mul(&t.factorial(half(j1 - k - m1)))
            .mul(&t.factorial(half(j2 - k + m2)));
        let sign = if half(k) % 2 == 0 { 1 } else { -1 };
        terms.push((sign, t.one().div(&den)));
        k += 2;
    }
    let (sign, value) = t.racah_sum(&radicand, &terms);
    let phase = parity(j1 - j2 - m3);
    SymbolValue { value: phase * value, sign: sign * phase as i8 }
}

/// Wigner 6j symbol `{j1 j2 j3; j4 j5 j6}`.
pub fn wigner6j(
    j1: HalfInteger,
    j2: HalfInteger,
    j3: HalfInteger,
    j4: HalfInteger,
    j5: HalfInteger,
    j6: HalfInteger,
) -> Result<SymbolValue> {
    for j in [j1, j2, j3, j4, j5, j6] {
        j.check_j()?;
    }
    let key = [j1.twice(), j2.twice(), j3.twice(), j4.twice(), j5.twice(), j6.twice()];
    if let Some(hit) = SIXJ_CACHE.with(|c| c.borrow().get(&key).copied()) {
        return Ok(hit);
    }
    let value = sixj_uncached(key);
    SIXJ_CACHE.with(|c| c.borrow_mut().insert(key, value));
    Ok(value)
}

fn sixj_uncached([j1, j2, j3, j4, j5, j6]: [i32; 6]) -> SymbolValue {
    let triads = [(j1, j2, j3), (j1, j5, j6), (j4, j2, j6), (j4, j5, j3)];
    if !triads.iter().all(|&(a, b, c)| is_triad(a, b, c)) {
        return SymbolValue::ZERO;
    }
    let alphas = triads.map(|(a, b, c)| a + b + c);
    let betas = [j1 + j2 + j4 + j5, j2 + j3 + j5 + j6, j3 + j1 + j6 + j4];
    let tmin = *alphas.iter().max().unwrap();
    let tmax = *betas.iter().min().unwrap();

    let table = PrimeTable::for_factorials_up_to(half(tmax) + 1);
    let radicand = triads
        .iter()
        .fold(table.one(), |acc, &(a, b, c)| acc.mul(&triangle_delta(&table, a, b, c)));

    let mut terms = Vec::new();
    let mut t = tmin;
    while t <= tmax {
        let mut term = table.factorial(half(t) + 1);
        for a in alphas {
            term = term.div(&table.factorial(half(t - a)));
        }
        for b in betas {
            term = term.div(&table.factorial(half(b - t)));
        }
        let sign = if half(t) % 2 == 0 { 1 } else { -1 };
        terms.push((sign, term));
        t += 2;
    }
    let (sign, value) = table.racah_sum(&radicand, &terms);
    SymbolValue { value, sign }
}

/// Clebsch–Gordan coefficient `<j1 m1; j2 m2 | J M>`.
pub fn clebsch_gordan(
    j1: HalfInteger,
    m1: HalfInteger,
    j2: HalfInteger,
    m2: HalfInteger,
    j: HalfInteger,
    m: HalfInteger,
) -> Result<f64> {
    let w = wigner3j(j1, j2, j, m1, m2, -m)?;
    if w.is_zero() {
        return Ok(0.0);
    }
    let phase = parity(j1.twice() - j2.twice() + m.twice());
    Ok(phase * (f64::from(j.twice()) + 1.0).sqrt() * w.value)
}

fn check_q(q: i32) -> Result<()> {
    if !(-1..=1).contains(&q) {
        return Err(invalid(format!("spherical component q = {q} is not in {{-1, 0, +1}}")));
    }
    Ok(())
}

/// Checks that `f` is a hyperfine manifold of `j` coupled to nuclear spin `i`.
pub fn check_hyperfine(j: HalfInteger, f: HalfInteger, i: HalfInteger) -> Result<()> {
    j.check_j()?;
    i.check_j()?;
    if !is_triad(j.twice(), i.twice(), f.twice()) {
        return Err(invalid(format!("F = {f} cannot arise from J = {j} and I = {i}")));
    }
    Ok(())
}

/// Dipole angular factor for `|J F m_F> -> |J' F' m_F'>` with spherical
/// component `q` and nuclear spin `I`; see the module docs for the phase.
///
/// A coupling matrix element for a field with radial Rabi frequency `Ω` is
/// `(Ω / 2) * factor`.
#[allow(clippy::too_many_arguments)]
pub fn dipole_angular_factor(
    j: HalfInteger,
    f: HalfInteger,
    m_f: HalfInteger,
    j_to: HalfInteger,
    f_to: HalfInteger,
    m_f_to: HalfInteger,
    q: i32,
    nuclear_spin: HalfInteger,
) -> Result<f64> {
    check_q(q)?;
    check_hyperfine(j, f, nuclear_spin)?;
    check_hyperfine(j_to, f_to, nuclear_spin)?;
    HalfInteger::check_projection(f, m_f)?;
    HalfInteger::check_projection(f_to, m_f_to)?;
    if m_f_to.twice() != m_f.twice() + 2 * q {
        return Ok(0.0);
    }
    let one = HalfInteger::ONE;
    let threej = wigner3j(f_to, one, f, -m_f_to, HalfInteger::integer(q), m_f)?;
    if threej.is_zero() {
        return Ok(0.0);
    }
    let sixj = wigner6j(j_to, f_to, nuclear_spin, f, j, one)?;
    if sixj.is_zero() {
        return Ok(0.0);
    }
    let phase = parity(f_to.twice() - m_f_to.twice())
        * parity(j_to.twice() + nuclear_spin.twice() + f.twice() + 2);
    let norm = ((f64::from(f.twice()) + 1.0) * (f64::from(f_to.twice()) + 1.0)).sqrt();
    Ok(phase * threej.value * norm * sixj.value)
}

/// Fine-structure dipole factor `<J' m'| d_q |J m> / <J'||d||J>` with no
/// nuclear spin: `(-1)^(J'-m') (J' 1 J; -m' q m)`.
pub fn fine_dipole_factor(
    j: HalfInteger,
    m: HalfInteger,
    j_to: HalfInteger,
    m_to: HalfInteger,
    q: i32,
) -> Result<f64> {
    check_q(q)?;
    HalfInteger::check_projection(j, m)?;
    HalfInteger::check_projection(j_to, m_to)?;
    let w = wigner3j(j_to, HalfInteger::ONE, j, -m_to, HalfInteger::integer(q), m)?;
    if w.is_zero() {
        return Ok(0.0);
    }
    Ok(parity(j_to.twice() - m_to.twice()) * w.value)
}
