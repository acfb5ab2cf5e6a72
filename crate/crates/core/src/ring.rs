//! Exact commutative coefficient rings: Z, Q and Z/m.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Which ring the scalars live in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RingDescriptor {
    Integers,
    Rationals,
    Modular(u64),
}

impl RingDescriptor {
    pub fn modular(m: u64) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidModulus(m));
        }
        Ok(RingDescriptor::Modular(m))
    }

    pub fn is_field(&self) -> bool {
        match self {
            RingDescriptor::Integers => false,
            RingDescriptor::Rationals => true,
            RingDescriptor::Modular(m) => is_prime(*m),
        }
    }

    pub fn zero(&self) -> RingElement {
        self.from_int(0)
    }

    pub fn one(&self) -> RingElement {
        self.from_int(1)
    }

    /// The canonical map m ↦ m·1.
    pub fn from_int(&self, v: i64) -> RingElement {
        match self {
            RingDescriptor::Integers => RingElement::Int(BigInt::from(v)),
            RingDescriptor::Rationals => RingElement::Rat(BigRational::from_integer(BigInt::from(v))),
            RingDescriptor::Modular(m) => RingElement::Mod {
                value: (v as i128).rem_euclid(*m as i128) as u64,
                modulus: *m,
            },
        }
    }

    pub fn from_bigint(&self, v: &BigInt) -> RingElement {
        match self {
            RingDescriptor::Integers => RingElement::Int(v.clone()),
            RingDescriptor::Rationals => RingElement::Rat(BigRational::from_integer(v.clone())),
            RingDescriptor::Modular(m) => {
                let r = v.mod_floor(&BigInt::from(*m));
                RingElement::Mod { value: r.to_u64().unwrap_or(0), modulus: *m }
            }
        }
    }

    /// Parses an element written as a decimal integer, or "p/q" over Q.
    pub fn parse_element(&self, s: &str) -> Result<RingElement> {
        let s = s.trim();
        let bad = || Error::Parse(format!("cannot read {s:?} as an element of {self}"));
        match self {
            RingDescriptor::Rationals => {
                if let Some((p, q)) = s.split_once('/') {
                    let p: BigInt = p.trim().parse().map_err(|_| bad())?;
                    let q: BigInt = q.trim().parse().map_err(|_| bad())?;
                    if q.is_zero() {
                        return Err(bad());
                    }
                    Ok(RingElement::Rat(BigRational::new(p, q)))
                } else {
                    let p: BigInt = s.parse().map_err(|_| bad())?;
                    Ok(self.from_bigint(&p))
                }
            }
            _ => {
                let p: BigInt = s.parse().map_err(|_| bad())?;
                Ok(self.from_bigint(&p))
            }
        }
    }
}

impl fmt::Display for RingDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RingDescriptor::Integers => write!(f, "z"),
            RingDescriptor::Rationals => write!(f, "q"),
            RingDescriptor::Modular(m) => write!(f, "z/{m}"),
        }
    }
}

impl FromStr for RingDescriptor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        match t.as_str() {
            "z" => Ok(RingDescriptor::Integers),
            "q" => Ok(RingDescriptor::Rationals),
            _ => {
                let m = t
                    .strip_prefix("z/")
                    .and_then(|m| m.parse::<u64>().ok())
                    .ok_or_else(|| Error::Parse(format!("unknown ring {s:?} (expected z, q or z/M)")))?;
                RingDescriptor::modular(m)
            }
        }
    }
}

impl Serialize for RingDescriptor {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for RingDescriptor {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Deterministic Miller-Rabin for 64-bit integers.
pub fn is_prime(m: u64) -> bool {
    if m < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if m % p == 0 {
            return m == p;
        }
    }
    let mut d = m - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, m);
        if x == 1 || x == m - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, m);
            if x == m - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut a: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1u64 % m;
    a %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, a, m);
        }
        a = mul_mod(a, a, m);
        e >>= 1;
    }
    acc
}

/// A scalar tagged with its ring.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum RingElement {
    Int(BigInt),
    Rat(BigRational),
    Mod { value: u64, modulus: u64 },
}

impl RingElement {
    pub fn descriptor(&self) -> RingDescriptor {
        match self {
            RingElement::Int(_) => RingDescriptor::Integers,
            RingElement::Rat(_) => RingDescriptor::Rationals,
            RingElement::Mod { modulus, .. } => RingDescriptor::Modular(*modulus),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            RingElement::Int(v) => v.is_zero(),
            RingElement::Rat(v) => v.is_zero(),
            RingElement::Mod { value, .. } => *value == 0,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            RingElement::Int(v) => v.is_one(),
            RingElement::Rat(v) => v.is_one(),
            RingElement::Mod { value, .. } => *value == 1,
        }
    }

    fn mismatch(&self, other: &Self) -> Error {
        Error::RingMismatch(self.descriptor(), other.descriptor())
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        Ok(match (self, other) {
            (RingElement::Int(a), RingElement::Int(b)) => RingElement::Int(a + b),
            (RingElement::Rat(a), RingElement::Rat(b)) => RingElement::Rat(a + b),
            (RingElement::Mod { value: a, modulus: m }, RingElement::Mod { value: b, modulus: k }) if m == k => {
                RingElement::Mod { value: ((*a as u128 + *b as u128) % *m as u128) as u64, modulus: *m }
            }
            _ => return Err(self.mismatch(other)),
        })
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        Ok(match (self, other) {
            (RingElement::Int(a), RingElement::Int(b)) => RingElement::Int(a - b),
            (RingElement::Rat(a), RingElement::Rat(b)) => RingElement::Rat(a - b),
            (RingElement::Mod { value: a, modulus: m }, RingElement::Mod { value: b, modulus: k }) if m == k => {
                RingElement::Mod { value: ((*a as u128 + *m as u128 - *b as u128) % *m as u128) as u64, modulus: *m }
            }
            _ => return Err(self.mismatch(other)),
        })
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        Ok(match (self, other) {
            (RingElement::Int(a), RingElement::Int(b)) => RingElement::Int(a * b),
            (RingElement::Rat(a), RingElement::Rat(b)) => RingElement::Rat(a * b),
            (RingElement::Mod { value: a, modulus: m }, RingElement::Mod { value: b, modulus: k }) if m == k => {
                RingElement::Mod { value: mul_mod(*a, *b, *m), modulus: *m }
            }
            _ => return Err(self.mismatch(other)),
        })
    }

    /// Multiplicative inverse, if it exists in the ring.
    pub fn inverse(&self) -> Option<Self> {
        match self {
            RingElement::Int(v) => {
                if v.abs().is_one() {
                    Some(self.clone())
                } else {
                    None
                }
            }
            RingElement::Rat(v) => {
                if v.is_zero() {
                    None
                } else {
                    Some(RingElement::Rat(v.recip()))
                }
            }
            RingElement::Mod { value, modulus } => {
                let e = BigInt::from(*value).extended_gcd(&BigInt::from(*modulus));
                if !e.gcd.is_one() {
                    return None;
                }
                let inv = e.x.mod_floor(&BigInt::from(*modulus));
                Some(RingElement::Mod { value: inv.to_u64()?, modulus: *modulus })
            }
        }
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = self.descriptor().one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Integer value when the element is an integer (or an integral rational).
    pub fn to_bigint(&self) -> Option<BigInt> {
        match self {
            RingElement::Int(v) => Some(v.clone()),
            RingElement::Rat(v) if v.is_integer() => Some(v.to_integer()),
            RingElement::Rat(_) => None,
            RingElement::Mod { value, .. } => Some(BigInt::from(*value)),
        }
    }
}

impl fmt::Display for RingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RingElement::Int(v) => write!(f, "{v}"),
            RingElement::Rat(v) => {
                if v.is_integer() {
                    write!(f, "{}", v.numer())
                } else {
                    write!(f, "{}/{}", v.numer(), v.denom())
                }
            }
            RingElement::Mod { value, .. } => write!(f, "{value}"),
        }
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $checked:ident) => {
        impl $tr<&RingElement> for &RingElement {
            type Output = RingElement;
            fn $m(self, rhs: &RingElement) -> RingElement {
                self.$checked(rhs).expect("ring mismatch")
            }
        }
        impl $tr<RingElement> for RingElement {
            type Output = RingElement;
            fn $m(self, rhs: RingElement) -> RingElement {
                (&self).$checked(&rhs).expect("ring mismatch")
            }
        }
        impl $tr<&RingElement> for RingElement {
            type Output = RingElement;
            fn $m(self, rhs: &RingElement) -> RingElement {
                (&self).$checked(rhs).expect("ring mismatch")
            }
        }
    };
}

binop!(Add, add, checked_add);
binop!(Sub, sub, checked_sub);
binop!(Mul, mul, checked_mul);

impl Neg for &RingElement {
    type Output = RingElement;
    fn neg(self) -> RingElement {
        match self {
            RingElement::Int(v) => RingElement::Int(-v),
            RingElement::Rat(v) => RingElement::Rat(-v),
            RingElement::Mod { value, modulus } => RingElement::Mod { value: (modulus - value) % modulus, modulus: *modulus },
        }
    }
}

impl Neg for RingElement {
    type Output = RingElement;
    fn neg(self) -> RingElement {
        -&self
    }
}

impl Serialize for RingElement {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rings() -> Vec<RingDescriptor> {
        vec![
            RingDescriptor::Integers,
            RingDescriptor::Rationals,
            RingDescriptor::Modular(2),
            RingDescriptor::Modular(4),
            RingDescriptor::Modular(6),
            RingDescriptor::Modular(97),
        ]
    }

    #[test]
    fn modular_reduction() {
        let z6 = RingDescriptor::Modular(6);
        assert_eq!(z6.from_int(4) + z6.from_int(5), z6.from_int(3));
        assert_eq!(z6.from_int(-1), z6.from_int(5));
    }

    #[test]
    fn fraction_arithmetic() {
        let q = RingDescriptor::Rationals;
        let half = q.parse_element("1/2").unwrap();
        let third = q.parse_element("1/3").unwrap();
        assert_eq!((half + third).to_string(), "5/6");
        assert_eq!(q.parse_element("2/4").unwrap().to_string(), "1/2");
        assert_eq!(q.parse_element("3/-6").unwrap().to_string(), "-1/2");
    }

    #[test]
    fn sign_rule() {
        let z = RingDescriptor::Integers;
        assert_eq!(z.from_int(-1) * z.from_int(-1), z.one());
    }

    #[test]
    fn mismatch_is_an_error() {
        let a = RingDescriptor::Integers.one();
        let b = RingDescriptor::Modular(4).one();
        assert!(matches!(a.checked_add(&b), Err(Error::RingMismatch(..))));
    }

    #[test]
    fn descriptor_round_trip() {
        for r in rings() {
            assert_eq!(r.to_string().parse::<RingDescriptor>().unwrap(), r);
        }
        assert!("z/1".parse::<RingDescriptor>().is_err());
        assert!("r".parse::<RingDescriptor>().is_err());
        assert_eq!("Z/6".parse::<RingDescriptor>().unwrap(), RingDescriptor::Modular(6));
    }

    #[test]
    fn fields() {
        assert!(RingDescriptor::Rationals.is_field());
        assert!(RingDescriptor::Modular(2).is_field());
        assert!(RingDescriptor::Modular(97).is_field());
        assert!(!RingDescriptor::Modular(4).is_field());
        assert!(!RingDescriptor::Modular(6).is_field());
        assert!(!RingDescriptor::Integers.is_field());
    }

    #[test]
    fn primality_matches_trial_division() {
        for m in 0u64..2000 {
            let naive = m >= 2 && (2..m).take_while(|d| d * d <= m).all(|d| m % d != 0);
            assert_eq!(is_prime(m), naive, "{m}");
        }
        assert!(is_prime(18446744073709551557));
    }

    #[test]
    fn inverses() {
        let z6 = RingDescriptor::Modular(6);
        assert_eq!(z6.from_int(5).inverse(), Some(z6.from_int(5)));
        assert_eq!(z6.from_int(2).inverse(), None);
        assert_eq!(RingDescriptor::Integers.from_int(2).inverse(), None);
        let q = RingDescriptor::Rationals;
        assert_eq!(q.from_int(3).inverse().unwrap().to_string(), "1/3");
    }

    fn element(ring: RingDescriptor) -> impl Strategy<Value = RingElement> {
        (-50i64..50, 1i64..7).prop_map(move |(p, d)| match ring {
            RingDescriptor::Rationals => RingElement::Rat(BigRational::new(p.into(), d.into())),
            _ => ring.from_int(p),
        })
    }

    fn triple() -> impl Strategy<Value = (RingElement, RingElement, RingElement)> {
        prop::sample::select(rings()).prop_flat_map(|r| (element(r), element(r), element(r)))
    }

    proptest! {
        #[test]
        fn ring_axioms((a, b, c) in triple()) {
            prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            prop_assert_eq!(&a + &b, &b + &a);
            prop_assert_eq!(&a * &b, &b * &a);
            prop_assert_eq!(&(&a - &b) + &b, a.clone());
            prop_assert!((&a + &(-&a)).is_zero());
        }

        #[test]
        fn from_int_is_a_homomorphism(m in -1000i64..1000, k in -1000i64..1000, idx in 0usize..6) {
            let r = rings()[idx];
            prop_assert_eq!(r.from_int(m + k), r.from_int(m) + r.from_int(k));
            prop_assert_eq!(r.from_int(m * k), r.from_int(m) * r.from_int(k));
        }

        #[test]
        fn element_text_round_trip(a in prop::sample::select(rings()).prop_flat_map(element)) {
            let r = a.descriptor();
            prop_assert_eq!(r.parse_element(&a.to_string()).unwrap(), a);
        }
    }
}
