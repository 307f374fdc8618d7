//! Exact dyadic and rational quantities, convertible to any float type.

use std::cmp::Ordering;
use std::fmt;

use num_rational::Ratio;
use num_integer::Integer;
use num_traits::{Float, FromPrimitive, PrimInt, Unsigned};

/// Unsigned integer types usable as numerator/denominator of exact results.
pub trait ExactInt: PrimInt + Unsigned + Integer + FromPrimitive + fmt::Display {}

impl<T: PrimInt + Unsigned + Integer + FromPrimitive + fmt::Display> ExactInt for T {}

/// Converts an exact ratio to a floating point value.
pub fn ratio_to_float<I: ExactInt, F: Float>(r: &Ratio<I>) -> F {
    let numer = F::from(*r.numer()).expect("numerator representable");
    let denom = F::from(*r.denom()).expect("denominator representable");
    numer / denom
}

/// Distance `1/2^k` in the profinite metric, or an upper bound when the
/// comparison was capped before a disagreement showed up.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Distance {
    Exact(u32),
    AtMost(u32),
}

impl Distance {
    pub fn exponent(&self) -> u32 {
        match *self {
            Distance::Exact(k) | Distance::AtMost(k) => k,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Distance::Exact(_))
    }

    /// `1/2^k` as an exact ratio (the bound itself for `AtMost`).
    pub fn to_ratio<I: ExactInt>(&self) -> Ratio<I> {
        let denom = I::one() << self.exponent() as usize;
        Ratio::new(I::one(), denom)
    }

    pub fn to_float<F: Float>(&self) -> F {
        F::from(2.0).unwrap().powi(-(self.exponent() as i32))
    }
}

impl PartialOrd for Distance {
    /// Orders exact distances by value; bounds only compare when unambiguous.
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (Distance::Exact(a), Distance::Exact(b)) => Some(b.cmp(a)),
            (Distance::AtMost(a), Distance::Exact(b)) if a > b => Some(Ordering::Less),
            (Distance::Exact(a), Distance::AtMost(b)) if b > a => Some(Ordering::Greater),
            _ if self == other => Some(Ordering::Equal),
            _ => None,
        }
    }
}

impl fmt::Display for Distance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distance::Exact(0) => f.write_str("1"),
            Distance::Exact(k) => write!(f, "1/2^{k}"),
            Distance::AtMost(k) => write!(f, "<= 1/2^{k}"),
        }
    }
}

/// An exact dimension-like ratio together with its unreduced parts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BitRatio<I> {
    pub numerator: I,
    pub denominator: I,
}

impl<I: ExactInt> BitRatio<I> {
    pub fn new(numerator: I, denominator: I) -> Self {
        BitRatio {
            numerator,
            denominator,
        }
    }

    pub fn to_ratio(&self) -> Ratio<I> {
        Ratio::new(self.numerator, self.denominator)
    }

    pub fn to_float<F: Float>(&self) -> F {
        ratio_to_float(&self.to_ratio())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distance_values() {
        assert_eq!(Distance::Exact(0).to_ratio::<u64>(), Ratio::new(1, 1));
        assert_eq!(Distance::Exact(2).to_ratio::<u32>(), Ratio::new(1, 4));
        assert_eq!(Distance::AtMost(8).to_float::<f64>(), 1.0 / 256.0);
        assert_eq!(Distance::Exact(3).to_float::<f32>(), 0.125f32);
        assert_eq!(Distance::Exact(0).to_string(), "1");
        assert_eq!(Distance::AtMost(8).to_string(), "<= 1/2^8");
    }

    #[test]
    fn distance_order() {
        assert!(Distance::Exact(0) > Distance::Exact(2));
        assert!(Distance::AtMost(8) < Distance::Exact(2));
        assert_eq!(Distance::AtMost(2).partial_cmp(&Distance::Exact(4)), None);
    }

    #[test]
    fn ratio_conversion() {
        let r = BitRatio::new(12u64, 15);
        assert_eq!(r.to_ratio(), Ratio::new(4, 5));
        assert!((r.to_float::<f64>() - 0.8).abs() < 1e-15);
        assert!((r.to_float::<f32>() - 0.8).abs() < 1e-6);
    }
}
