//! Exact arithmetic in an imaginary quadratic field F = Q(√−D).
//!
//! Elements are pairs of rationals (a, b) representing a + b√−D. All field
//! operations are exact; the only inexact operation is the complex embedding,
//! which sends √−D to +i√D at a requested precision.

use crate::num::Complex;
use rug::{Float, Integer, Rational};
use std::fmt;

/// a + b√−D with exact rational a, b. The value of D lives in [`QuadField`];
/// elements from different fields must not be mixed.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FElem {
    pub a: Rational,
    pub b: Rational,
}

impl FElem {
    pub fn new(a: Rational, b: Rational) -> Self {
        FElem { a, b }
    }

    pub fn from_i64(a: i64) -> Self {
        FElem {
            a: Rational::from(a),
            b: Rational::new(),
        }
    }

    pub fn zero() -> Self {
        FElem {
            a: Rational::new(),
            b: Rational::new(),
        }
    }

    pub fn one() -> Self {
        Self::from_i64(1)
    }

    pub fn is_zero(&self) -> bool {
        self.a.cmp0() == std::cmp::Ordering::Equal && self.b.cmp0() == std::cmp::Ordering::Equal
    }

    pub fn is_one(&self) -> bool {
        self.a == 1 && self.b.cmp0() == std::cmp::Ordering::Equal
    }

    /// Parse from a pair of "p/q" strings.
    pub fn parse(a: &str, b: &str) -> Result<Self, String> {
        let pa: Rational = a
            .trim()
            .parse()
            .map_err(|e| format!("bad rational {a:?}: {e}"))?;
        let pb: Rational = b
            .trim()
            .parse()
            .map_err(|e| format!("bad rational {b:?}: {e}"))?;
        Ok(FElem { a: pa, b: pb })
    }
}

impl fmt::Display for FElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.cmp0() == std::cmp::Ordering::Equal {
            write!(f, "{}", self.a)
        } else if self.a.cmp0() == std::cmp::Ordering::Equal {
            write!(f, "{}*w", self.b)
        } else {
            write!(f, "{}+{}*w", self.a, self.b)
        }
    }
}

impl fmt::Debug for FElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// The field Q(√−D) for a fixed positive squarefree D.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadField {
    pub d: u32,
}

impl QuadField {
    pub fn new(d: u32) -> Result<Self, String> {
        if d == 0 {
            return Err("D must be positive".into());
        }
        if !is_squarefree(d) {
            return Err(format!("D = {d} is not squarefree"));
        }
        Ok(QuadField { d })
    }

    pub fn add(&self, x: &FElem, y: &FElem) -> FElem {
        FElem {
            a: Rational::from(&x.a + &y.a),
            b: Rational::from(&x.b + &y.b),
        }
    }

    pub fn sub(&self, x: &FElem, y: &FElem) -> FElem {
        FElem {
            a: Rational::from(&x.a - &y.a),
            b: Rational::from(&x.b - &y.b),
        }
    }

    pub fn neg(&self, x: &FElem) -> FElem {
        FElem {
            a: Rational::from(-&x.a),
            b: Rational::from(-&x.b),
        }
    }

    /// (a₁ + b₁ω)(a₂ + b₂ω) with ω² = −D.
    pub fn mul(&self, x: &FElem, y: &FElem) -> FElem {
        let d = Rational::from(self.d);
        let a = Rational::from(&x.a * &y.a) - Rational::from(&x.b * &y.b) * &d;
        let b = Rational::from(&x.a * &y.b) + Rational::from(&x.b * &y.a);
        FElem { a, b }
    }

    pub fn conj(&self, x: &FElem) -> FElem {
        FElem {
            a: x.a.clone(),
            b: Rational::from(-&x.b),
        }
    }

    /// N_{F/Q}(x) = a² + D·b² ≥ 0, zero only at zero.
    pub fn norm(&self, x: &FElem) -> Rational {
        Rational::from(&x.a * &x.a) + Rational::from(&x.b * &x.b) * Rational::from(self.d)
    }

    pub fn inv(&self, x: &FElem) -> Option<FElem> {
        if x.is_zero() {
            return None;
        }
        let n = self.norm(x);
        let c = self.conj(x);
        Some(FElem {
            a: c.a / n.clone(),
            b: c.b / n,
        })
    }

    pub fn div(&self, x: &FElem, y: &FElem) -> Option<FElem> {
        self.inv(y).map(|yi| self.mul(x, &yi))
    }

    /// The fixed embedding ι : F → C, √−D ↦ +i√D.
    pub fn embed(&self, x: &FElem, prec: u32) -> Complex {
        let sqrt_d = Float::with_val(prec, self.d).sqrt();
        Complex {
            re: Float::with_val(prec, &x.a),
            im: Float::with_val(prec, &x.b) * sqrt_d,
        }
    }

    /// Generator ω of the maximal order O_F: (1+√−D)/2 if D ≡ 3 mod 4,
    /// otherwise √−D.
    pub fn ring_generator(&self) -> FElem {
        if self.d % 4 == 3 {
            FElem::new(Rational::from((1, 2)), Rational::from((1, 2)))
        } else {
            FElem::new(Rational::new(), Rational::from(1))
        }
    }

    /// Least common denominator of the two rational coordinates.
    pub fn denominator(&self, x: &FElem) -> Integer {
        x.a.denom().clone().lcm(x.b.denom())
    }
}

fn is_squarefree(d: u32) -> bool {
    let mut m = d;
    let mut p = 2u32;
    while p * p <= m {
        if m % p == 0 {
            m /= p;
            if m % p == 0 {
                return false;
            }
        }
        p += 1;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gauss() -> QuadField {
        QuadField::new(1).unwrap()
    }

    fn small_rational() -> impl Strategy<Value = Rational> {
        (-6i64..=6, 1i64..=4).prop_map(|(p, q)| Rational::from((p, q)))
    }

    fn small_elem() -> impl Strategy<Value = FElem> {
        (small_rational(), small_rational()).prop_map(|(a, b)| FElem::new(a, b))
    }

    proptest! {
        #[test]
        fn field_axioms_hold_exactly(x in small_elem(), y in small_elem(), z in small_elem()) {
            let f = gauss();
            // associativity and distributivity, exact
            prop_assert_eq!(f.mul(&f.mul(&x, &y), &z), f.mul(&x, &f.mul(&y, &z)));
            prop_assert_eq!(f.mul(&x, &f.add(&y, &z)), f.add(&f.mul(&x, &y), &f.mul(&x, &z)));
            // inverses close
            if !x.is_zero() {
                let xi = f.inv(&x).unwrap();
                prop_assert!(f.mul(&x, &xi).is_one());
            }
        }

        #[test]
        fn norm_is_multiplicative_and_positive(x in small_elem(), y in small_elem()) {
            let f = gauss();
            prop_assert_eq!(f.norm(&f.mul(&x, &y)), f.norm(&x) * f.norm(&y));
            let n = f.norm(&x);
            prop_assert!(n.cmp0() != std::cmp::Ordering::Less);
            prop_assert_eq!(n.cmp0() == std::cmp::Ordering::Equal, x.is_zero());
        }
    }

    #[test]
    fn conjugation_and_norm() {
        let f = gauss();
        let x = FElem::parse("3/2", "-5").unwrap();
        let c = f.conj(&x);
        assert_eq!(c.a, x.a);
        assert_eq!(c.b, Rational::from(5));
        // N(x) = a^2 + D b^2
        assert_eq!(f.norm(&x), Rational::from((9, 4)) + Rational::from(25));
    }

    #[test]
    fn embedding_is_a_ring_morphism() {
        let f = QuadField::new(5).unwrap();
        let x = FElem::parse("2/3", "1/7").unwrap();
        let y = FElem::parse("-1/2", "4").unwrap();
        let p = 128;
        let lhs = f.embed(&f.mul(&x, &y), p);
        let rhs = f.embed(&x, p).mul(&f.embed(&y, p));
        assert!(lhs.dist(&rhs) < crate::num::two_pow(-110, p));
    }

    #[test]
    fn squarefree_check() {
        assert!(QuadField::new(1).is_ok());
        assert!(QuadField::new(2).is_ok());
        assert!(QuadField::new(3).is_ok());
        assert!(QuadField::new(4).is_err());
        assert!(QuadField::new(12).is_err());
    }

    #[test]
    fn ring_generator_convention() {
        assert_eq!(QuadField::new(3).unwrap().ring_generator().a, Rational::from((1, 2)));
        assert_eq!(QuadField::new(1).unwrap().ring_generator().b, Rational::from(1));
    }
}
