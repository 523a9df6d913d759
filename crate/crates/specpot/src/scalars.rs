//! Exact ground arithmetic: rationals, the quadratic extension generated by
//! an element `v` with `v^2 = -1`, and cyclic Galois groups as residue classes.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::ScalarError;

/// Exact rational number, always stored reduced with positive denominator.
pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rational {
    BigRational::from(BigInt::from(n))
}

/// Parses "a", "a/b", with optional sign.
pub fn parse_rational(s: &str) -> Result<Rational, ScalarError> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n = BigInt::from_str(num).map_err(|_| ScalarError::BadRational(s.to_string()))?;
    let d = BigInt::from_str(den).map_err(|_| ScalarError::BadRational(s.to_string()))?;
    if d.is_zero() {
        return Err(ScalarError::BadRational(s.to_string()));
    }
    Ok(BigRational::new(n, d))
}

pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Element `re + im*v` of the degree-2 extension, with `v^2 = -1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GroundScalar {
    pub re: Rational,
    pub im: Rational,
}

impl GroundScalar {
    pub fn new(re: Rational, im: Rational) -> Self {
        GroundScalar { re, im }
    }

    pub fn from_rational(re: Rational) -> Self {
        GroundScalar { re, im: Rational::zero() }
    }

    pub fn zero() -> Self {
        Self::from_rational(Rational::zero())
    }

    pub fn one() -> Self {
        Self::from_rational(Rational::one())
    }

    pub fn v() -> Self {
        GroundScalar { re: Rational::zero(), im: Rational::one() }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.im.is_zero()
    }

    pub fn add(&self, other: &Self) -> Self {
        GroundScalar { re: &self.re + &other.re, im: &self.im + &other.im }
    }

    pub fn neg(&self) -> Self {
        GroundScalar { re: -self.re.clone(), im: -self.im.clone() }
    }

    /// (a+bv)(c+dv) = (ac-bd) + (ad+bc)v.
    pub fn mul(&self, other: &Self) -> Self {
        GroundScalar {
            re: &self.re * &other.re - &self.im * &other.im,
            im: &self.re * &other.im + &self.im * &other.re,
        }
    }

    /// Multiplicative inverse; errors on zero.
    pub fn inv(&self) -> Result<Self, ScalarError> {
        let n = &self.re * &self.re + &self.im * &self.im;
        if n.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        Ok(GroundScalar { re: &self.re / &n, im: -(&self.im / &n) })
    }

    /// v ↦ -v.
    pub fn conj(&self) -> Self {
        GroundScalar { re: self.re.clone(), im: -self.im.clone() }
    }
}

impl fmt::Display for GroundScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            return write!(f, "{}", format_rational(&self.re));
        }
        if self.re.is_zero() {
            return write!(f, "{}*v", format_rational(&self.im));
        }
        if self.im.is_negative() {
            write!(f, "{}-{}*v", format_rational(&self.re), format_rational(&-self.im.clone()))
        } else {
            write!(f, "{}+{}*v", format_rational(&self.re), format_rational(&self.im))
        }
    }
}

/// Parses "a/b", "a/b+c/d*v", "a/b-c/d*v", "v", "-v", "c*v".
pub fn parse_ground_scalar(s: &str) -> Result<GroundScalar, ScalarError> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err(ScalarError::BadRational(s));
    }
    // Split at the last top-level '+' or '-' that is not the leading sign.
    let bytes = s.as_bytes();
    let mut split_at = None;
    for i in (1..bytes.len()).rev() {
        if bytes[i] == b'+' || bytes[i] == b'-' {
            split_at = Some(i);
            break;
        }
    }
    let (head, tail) = match split_at {
        Some(i) if s.contains('v') => (&s[..i], &s[i..]),
        _ => {
            if s.contains('v') {
                ("", s.as_str())
            } else {
                (s.as_str(), "")
            }
        }
    };
    let re = if head.is_empty() { Rational::zero() } else { parse_rational(head)? };
    let im = if tail.is_empty() {
        Rational::zero()
    } else {
        let t = tail.trim_end_matches('v');
        let t = t.trim_end_matches('*');
        match t {
            "" | "+" => Rational::one(),
            "-" => -Rational::one(),
            other => parse_rational(other)?,
        }
    };
    Ok(GroundScalar { re, im })
}

/// Residue class in the cyclic group Z/modulus, composed additively.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub struct GaloisElement {
    pub residue: u64,
    pub modulus: u64,
}

impl GaloisElement {
    pub fn new(residue: u64, modulus: u64) -> Self {
        assert!(modulus > 0, "modulus must be positive");
        GaloisElement { residue: residue % modulus, modulus }
    }

    pub fn identity(modulus: u64) -> Self {
        Self::new(0, modulus)
    }

    /// The unique non-identity element of a modulus-2 group.
    pub fn theta() -> Self {
        Self::new(1, 2)
    }

    pub fn is_identity(&self) -> bool {
        self.residue == 0
    }

    pub fn compose(&self, other: &Self) -> Result<Self, ScalarError> {
        if self.modulus != other.modulus {
            return Err(ScalarError::ModulusMismatch(self.modulus, other.modulus));
        }
        Ok(Self::new(self.residue + other.residue, self.modulus))
    }

    pub fn inverse(&self) -> Self {
        Self::new(self.modulus - self.residue % self.modulus, self.modulus)
    }

    /// Group restriction along F_{i,j} ⊇ F_{i',j'}: reduce the residue mod n.
    pub fn restrict(&self, n: u64) -> Result<Self, ScalarError> {
        if n == 0 || self.modulus % n != 0 {
            return Err(ScalarError::NotASubgroup(n, self.modulus));
        }
        Ok(Self::new(self.residue % n, n))
    }

    /// Action on the quadratic extension; only moduli 1 and 2 act.
    pub fn apply(&self, x: &GroundScalar) -> Result<GroundScalar, ScalarError> {
        match self.modulus {
            1 => Ok(x.clone()),
            2 => {
                if self.residue == 0 {
                    Ok(x.clone())
                } else {
                    Ok(x.conj())
                }
            }
            m => Err(ScalarError::UnsupportedExtension(m)),
        }
    }
}

impl fmt::Display for GaloisElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} mod {}", self.residue, self.modulus)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn conjugation_examples() {
        let x = GroundScalar::new(rat_int(3), rat_int(2));
        let theta = GaloisElement::theta();
        assert_eq!(theta.apply(&x).unwrap(), GroundScalar::new(rat_int(3), rat_int(-2)));
        let id = GaloisElement::identity(2);
        assert_eq!(id.apply(&x).unwrap(), x);
        // involution on v
        let v = GroundScalar::v();
        assert_eq!(theta.apply(&theta.apply(&v).unwrap()).unwrap(), v);
    }

    #[test]
    fn unsupported_extension_is_an_error() {
        let g = GaloisElement::new(1, 3);
        assert!(g.apply(&GroundScalar::one()).is_err());
    }

    #[test]
    fn restriction_examples() {
        let g = GaloisElement::new(5, 6);
        assert_eq!(g.restrict(2).unwrap(), GaloisElement::new(1, 2));
        let id = GaloisElement::identity(6);
        assert_eq!(id.restrict(3).unwrap(), GaloisElement::identity(3));
        let h = GaloisElement::new(4, 6);
        assert_eq!(h.restrict(3).unwrap(), GaloisElement::new(1, 3));
        assert!(h.restrict(4).is_err());
    }

    #[test]
    fn restriction_is_a_homomorphism() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let m = 2 * (1 + rng.gen_range(0..6u64));
            let n = (1..=m).filter(|n| m % n == 0).nth(rng.gen_range(0..3).min(0)).unwrap_or(1);
            let a = GaloisElement::new(rng.gen_range(0..m), m);
            let b = GaloisElement::new(rng.gen_range(0..m), m);
            let lhs = a.compose(&b).unwrap().restrict(n).unwrap();
            let rhs = a.restrict(n).unwrap().compose(&b.restrict(n).unwrap()).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn rationals_match_integer_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let a = rng.gen_range(-50i64..50);
            let b = rng.gen_range(1i64..20);
            let c = rng.gen_range(-50i64..50);
            let d = rng.gen_range(1i64..20);
            // oracle: a/b + c/d = (ad + cb) / bd over integers
            let sum = rat(a, b) + rat(c, d);
            assert_eq!(sum, rat(a * d + c * b, b * d));
            let prod = rat(a, b) * rat(c, d);
            assert_eq!(prod, rat(a * c, b * d));
        }
    }

    #[test]
    fn ground_scalar_is_a_field() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..200 {
            let x = GroundScalar::new(rat(rng.gen_range(-9i64..10), 1 + rng.gen_range(0i64..4)), rat(rng.gen_range(-9i64..10), 1 + rng.gen_range(0i64..4)));
            if x.is_zero() {
                continue;
            }
            let inv = x.inv().unwrap();
            assert_eq!(x.mul(&inv), GroundScalar::one());
        }
        // v^2 = -1
        let v = GroundScalar::v();
        assert_eq!(v.mul(&v), GroundScalar::from_rational(rat_int(-1)));
    }

    #[test]
    fn theta_is_a_ring_automorphism_of_order_two() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let theta = GaloisElement::theta();
        for _ in 0..100 {
            let x = GroundScalar::new(rat_int(rng.gen_range(-9i64..10)), rat_int(rng.gen_range(-9i64..10)));
            let y = GroundScalar::new(rat_int(rng.gen_range(-9i64..10)), rat_int(rng.gen_range(-9i64..10)));
            let lhs = theta.apply(&x.mul(&y)).unwrap();
            let rhs = theta.apply(&x).unwrap().mul(&theta.apply(&y).unwrap());
            assert_eq!(lhs, rhs);
            assert_eq!(theta.apply(&theta.apply(&x).unwrap()).unwrap(), x);
        }
    }

    #[test]
    fn scalar_text_round_trips() {
        for s in ["3", "-1/2", "1/2+1/2*v", "0", "-v", "2*v", "3-2*v"] {
            let parsed = parse_ground_scalar(s).unwrap();
            let again = parse_ground_scalar(&parsed.to_string()).unwrap();
            assert_eq!(parsed, again, "{s}");
        }
    }
}
