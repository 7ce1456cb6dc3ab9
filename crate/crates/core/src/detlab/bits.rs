//! Entropy values that stay exact when they can.
//!
//! With dyadic probabilities whose reduced form is a plain power of two
//! (the default uniform-on-`2^n`-inputs setting), every entropy term
//! `-p log2 p` is rational and sums exactly. Anything else falls back to
//! `f64` with deterministic summation order.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::ops::{Add, Mul, Neg, Sub};

/// An information quantity in bits, exact rational when derivable so.
#[derive(Debug, Clone)]
pub enum Bits {
    Exact(BigRational),
    Approx(f64),
}

impl Bits {
    pub fn zero() -> Self {
        Bits::Exact(BigRational::zero())
    }

    pub fn from_integer(n: i64) -> Self {
        Bits::Exact(BigRational::from_integer(BigInt::from(n)))
    }

    /// Exact conversion: every finite `f64` is a dyadic rational.
    pub fn from_f64_exact(x: f64) -> Option<Self> {
        BigRational::from_float(x).map(Bits::Exact)
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Bits::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            Bits::Approx(x) => *x,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Bits::Exact(_))
    }

    pub fn min(self, other: Bits) -> Bits {
        match self.partial_cmp(&other) {
            Some(Ordering::Greater) => other,
            _ => self,
        }
    }

    pub fn max(self, other: Bits) -> Bits {
        match self.partial_cmp(&other) {
            Some(Ordering::Less) => other,
            _ => self,
        }
    }

    pub fn clamp_min_zero(self) -> Bits {
        self.max(Bits::zero())
    }

    pub fn is_negative(&self) -> bool {
        match self {
            Bits::Exact(r) => r.is_negative(),
            Bits::Approx(x) => *x < 0.0,
        }
    }

    pub fn is_positive(&self) -> bool {
        match self {
            Bits::Exact(r) => r.is_positive(),
            Bits::Approx(x) => *x > 0.0,
        }
    }

    /// Equality up to `tol`; exact comparison when both sides are exact.
    pub fn eq_within(&self, other: &Bits, tol: f64) -> bool {
        match (self, other) {
            (Bits::Exact(a), Bits::Exact(b)) => a == b,
            _ => (self.to_f64() - other.to_f64()).abs() <= tol,
        }
    }
}

impl PartialEq for Bits {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Bits::Exact(a), Bits::Exact(b)) => a == b,
            _ => self.to_f64() == other.to_f64(),
        }
    }
}

impl PartialOrd for Bits {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (Bits::Exact(a), Bits::Exact(b)) => a.partial_cmp(b),
            _ => self.to_f64().partial_cmp(&other.to_f64()),
        }
    }
}

impl Add for Bits {
    type Output = Bits;
    fn add(self, rhs: Bits) -> Bits {
        match (self, rhs) {
            (Bits::Exact(a), Bits::Exact(b)) => Bits::Exact(a + b),
            (a, b) => Bits::Approx(a.to_f64() + b.to_f64()),
        }
    }
}

impl Sub for Bits {
    type Output = Bits;
    fn sub(self, rhs: Bits) -> Bits {
        match (self, rhs) {
            (Bits::Exact(a), Bits::Exact(b)) => Bits::Exact(a - b),
            (a, b) => Bits::Approx(a.to_f64() - b.to_f64()),
        }
    }
}

impl Mul for Bits {
    type Output = Bits;
    fn mul(self, rhs: Bits) -> Bits {
        match (self, rhs) {
            (Bits::Exact(a), Bits::Exact(b)) => Bits::Exact(a * b),
            (a, b) => Bits::Approx(a.to_f64() * b.to_f64()),
        }
    }
}

impl Neg for Bits {
    type Output = Bits;
    fn neg(self) -> Bits {
        match self {
            Bits::Exact(a) => Bits::Exact(-a),
            Bits::Approx(x) => Bits::Approx(-x),
        }
    }
}

/// `log2 p` when `p` is a reduced power of two (`1` or `1 / 2^k`),
/// otherwise `None`.
fn log2_if_power_of_two(p: &BigRational) -> Option<i64> {
    if p.is_one() {
        return Some(0);
    }
    if !p.numer().is_one() {
        return None;
    }
    let d = p.denom().magnitude();
    if (d & (d - 1u32)) != num_bigint::BigUint::zero() {
        return None;
    }
    Some(-((d.bits() - 1) as i64))
}

/// Shannon entropy of a probability table. Zero atoms are skipped; the
/// result is exact when every positive atom is a reduced power of two.
pub fn entropy(atoms: &[BigRational]) -> Bits {
    let positive: Vec<&BigRational> = atoms.iter().filter(|p| p.is_positive()).collect();
    let exact_logs: Option<Vec<i64>> = positive.iter().map(|p| log2_if_power_of_two(p)).collect();
    match exact_logs {
        Some(logs) => {
            let mut acc = BigRational::zero();
            for (p, log) in positive.iter().zip(logs) {
                acc -= (*p).clone() * BigRational::from_integer(BigInt::from(log));
            }
            Bits::Exact(acc)
        }
        None => {
            let mut acc = 0.0;
            for p in positive {
                let pf = p.to_f64().unwrap_or(0.0);
                if pf > 0.0 {
                    acc -= pf * pf.log2();
                }
            }
            Bits::Approx(acc)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn uniform_power_of_two_is_exact() {
        let atoms = vec![r(1, 8); 8];
        let h = entropy(&atoms);
        assert!(h.is_exact());
        assert_eq!(h, Bits::from_integer(3));
    }

    #[test]
    fn constant_distribution_has_zero_entropy() {
        let h = entropy(&[r(1, 1)]);
        assert_eq!(h, Bits::zero());
        assert!(h.is_exact());
    }

    #[test]
    fn non_dyadic_atoms_fall_back_to_floats() {
        let atoms = vec![r(1, 3), r(2, 3)];
        let h = entropy(&atoms);
        assert!(!h.is_exact());
        let expected = -(1.0 / 3.0_f64) * (1.0 / 3.0_f64).log2()
            - (2.0 / 3.0_f64) * (2.0 / 3.0_f64).log2();
        assert!((h.to_f64() - expected).abs() < 1e-12);
    }

    #[test]
    fn mixed_power_atoms_stay_exact() {
        // 1/2, 1/4, 1/4 -> H = 1.5 exactly.
        let h = entropy(&[r(1, 2), r(1, 4), r(1, 4)]);
        assert!(h.is_exact());
        assert_eq!(h, Bits::Exact(r(3, 2)));
    }

    #[test]
    fn arithmetic_keeps_exactness() {
        let a = Bits::from_integer(3);
        let b = Bits::Exact(r(1, 2));
        let c = a - b;
        assert!(c.is_exact());
        assert_eq!(c, Bits::Exact(r(5, 2)));
        let clamped = (Bits::zero() - c.clone()).clamp_min_zero();
        assert_eq!(clamped, Bits::zero());
    }

    #[test]
    fn min_with_integer_link_rate_is_exact() {
        let h = Bits::from_integer(2);
        let r0 = Bits::from_integer(1);
        assert_eq!(h.min(r0), Bits::from_integer(1));
    }
}
