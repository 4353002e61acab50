use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::str::FromStr;

use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{invalid, Error, Result};

/// Angular momentum quantum number stored as twice its value, so that
/// `5/2` is `HalfInteger(5)` and `3` is `HalfInteger(6)`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct HalfInteger(i32);

impl HalfInteger {
    pub const ZERO: HalfInteger = HalfInteger(0);
    pub const ONE: HalfInteger = HalfInteger(2);

    pub const fn from_twice(twice: i32) -> Self {
        HalfInteger(twice)
    }

    pub const fn integer(n: i32) -> Self {
        HalfInteger(2 * n)
    }

    /// `numerator / 2`.
    pub const fn half(numerator: i32) -> Self {
        HalfInteger(numerator)
    }

    pub const fn twice(self) -> i32 {
        self.0
    }

    pub const fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }

    pub fn value(self) -> f64 {
        f64::from(self.0) / 2.0
    }

    pub const fn abs(self) -> Self {
        HalfInteger(self.0.abs())
    }

    /// Integer value, if this is an integer.
    pub fn as_integer(self) -> Option<i32> {
        self.is_integer().then_some(self.0 / 2)
    }

    /// `2j + 1`, the multiplicity of a `j` manifold.
    pub const fn multiplicity(self) -> usize {
        (self.0 + 1) as usize
    }

    /// Projections `-j, -j+1, ..., j`.
    pub fn projections(self) -> impl DoubleEndedIterator<Item = HalfInteger> + Clone {
        let j = self.0;
        (0..=j.max(-1)).filter(move |_| j >= 0).map(move |k| HalfInteger(-j + 2 * k))
    }

    /// Checks that `self` is a valid `j`-type argument.
    pub fn check_j(self) -> Result<()> {
        if self.0 < 0 {
            return Err(invalid(format!("angular momentum {self} is negative")));
        }
        Ok(())
    }

    /// Checks that `(j, m)` is a consistent pair: `j >= 0`, `|m| <= j`, `j - m` integral.
    pub fn check_projection(j: HalfInteger, m: HalfInteger) -> Result<()> {
        j.check_j()?;
        if m.0.abs() > j.0 {
            return Err(invalid(format!("|m| = {} exceeds j = {j}", m.abs())));
        }
        if (j.0 - m.0) % 2 != 0 {
            return Err(invalid(format!("j - m is not integral for j = {j}, m = {m}")));
        }
        Ok(())
    }
}

impl Add for HalfInteger {
    type Output = HalfInteger;
    fn add(self, rhs: Self) -> Self {
        HalfInteger(self.0 + rhs.0)
    }
}

impl Sub for HalfInteger {
    type Output = HalfInteger;
    fn sub(self, rhs: Self) -> Self {
        HalfInteger(self.0 - rhs.0)
    }
}

impl Neg for HalfInteger {
    type Output = HalfInteger;
    fn neg(self) -> Self {
        HalfInteger(-self.0)
    }
}

impl fmt::Display for HalfInteger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

impl fmt::Debug for HalfInteger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for HalfInteger {
    type Err = Error;

    /// Accepts `"3"`, `"-2"`, `"5/2"`, `"-1/2"`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let parse = |t: &str| {
            t.trim()
                .parse::<i32>()
                .map_err(|_| invalid(format!("cannot parse half-integer from {s:?}")))
        };
        match s.split_once('/') {
            Some((num, den)) => {
                let num = parse(num)?;
                match parse(den)? {
                    2 => Ok(HalfInteger(num)),
                    1 => Ok(HalfInteger(2 * num)),
                    _ => Err(invalid(format!("{s:?} is not a multiple of 1/2"))),
                }
            }
            None => Ok(HalfInteger(2 * parse(s)?)),
        }
    }
}

impl Serialize for HalfInteger {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for HalfInteger {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct Visitor;
        impl de::Visitor<'_> for Visitor {
            type Value = HalfInteger;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("an integer or a string such as \"7/2\"")
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<HalfInteger, E> {
                i32::try_from(v)
                    .map(HalfInteger::integer)
                    .map_err(|_| E::custom("half-integer out of range"))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<HalfInteger, E> {
                i32::try_from(v)
                    .map(HalfInteger::integer)
                    .map_err(|_| E::custom("half-integer out of range"))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<HalfInteger, E> {
                v.parse().map_err(E::custom)
            }
        }
        deserializer.deserialize_any(Visitor)
    }
}
