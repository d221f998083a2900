//! Exact scalar arithmetic for the supported coefficient domains.
//!
//! Two families of fields are supported:
//!
//! - arbitrary-precision rationals, tagged with a *closure mode* that fixes
//!   which classification invariants apply downstream (real closure:
//!   rank + signature; quadratic closure: rank only);
//! - small finite fields `F_p` and `F_{p^2}`, with `F_{p^2} = F_p[i]`,
//!   `i^2` = the least non-square of `F_p` for odd `p`, and
//!   `F_4 = F_2[t]`, `t^2 = t + 1` (printed as the tokens `a`, `b`).
//!
//! Scalars are plain data; all arithmetic goes through a [`FieldSpec`], which
//! owns the modulus and the extension rule. Canonical encodings are unique:
//! reduced fractions with positive denominator, coefficient pairs in `[0, p)`.

use std::fmt;

use num_bigint::BigInt;
use num_integer::{Integer, Roots};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// Largest constructible finite-field order. Exhaustive element loops stay
/// at desk scale below this bound.
pub const MAX_FIELD_ORDER: u64 = 1024;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("malformed scalar `{text}` for {field}: {reason}")]
    Malformed {
        text: String,
        field: String,
        reason: String,
    },
    #[error("division by zero")]
    DivisionByZero,
    #[error("{0} is not prime")]
    NotPrime(u32),
    #[error("unsupported extension degree {0}: only degrees 1 and 2 are available")]
    BadDegree(u8),
    #[error("field order {0} exceeds the enumeration budget {1}")]
    OrderBudget(u64, u64),
    #[error("cannot enumerate the elements of an infinite field")]
    InfiniteEnumeration,
}

/// Which closure of the rationals the classification invariants target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RationalMode {
    /// Invariants of forms over a real-closed field: rank and signature.
    RealClosure,
    /// Invariants over a quadratically closed field: rank only.
    QuadraticClosure,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Kind {
    Rational(RationalMode),
    /// `p` prime, `deg` in {1, 2}; `ext` is the reduction constant for the
    /// quadratic extension: `i^2 = ext` when `p` is odd (unused for `p = 2`,
    /// where `t^2 = t + 1`, and for `deg = 1`).
    Finite { p: u32, deg: u8, ext: u32 },
}

/// An exact scalar domain. Cheap to copy; all scalar operations are methods
/// on this type so that elements of different fields can never be mixed
/// silently.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldSpec {
    kind: Kind,
}

/// An element of some [`FieldSpec`]. The owning field is tracked by the
/// caller; `Finite` coefficients are always reduced representatives.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Scalar {
    Rational(BigRational),
    /// `a + b*i` (or `a + b*t` in characteristic 2); `b = 0` in prime fields.
    Finite { a: u32, b: u32 },
}

/// Square-class label of a scalar, relative to its field's classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SquareClass {
    Zero,
    /// `[1]`: a nonzero square in a finite field of odd order.
    Square,
    /// `[ω]`: the nontrivial square class in a finite field of odd order.
    NonSquare,
    /// Positive rational (real-closure mode).
    Positive,
    /// Negative rational (real-closure mode).
    Negative,
    /// Any nonzero element (quadratic-closure mode and perfect char-2 fields).
    Nonzero,
}

impl fmt::Display for SquareClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SquareClass::Zero => write!(f, "zero"),
            SquareClass::Square => write!(f, "[1]"),
            SquareClass::NonSquare => write!(f, "[ω]"),
            SquareClass::Positive => write!(f, "positive"),
            SquareClass::Negative => write!(f, "negative"),
            SquareClass::Nonzero => write!(f, "nonzero"),
        }
    }
}

fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

impl FieldSpec {
    pub fn rationals(mode: RationalMode) -> Self {
        FieldSpec {
            kind: Kind::Rational(mode),
        }
    }

    pub fn real_closure() -> Self {
        Self::rationals(RationalMode::RealClosure)
    }

    pub fn quadratic_closure() -> Self {
        Self::rationals(RationalMode::QuadraticClosure)
    }

    /// The finite field with `p^deg` elements, `deg` in {1, 2}.
    pub fn finite(p: u32, deg: u8) -> Result<Self, FieldError> {
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        if deg != 1 && deg != 2 {
            return Err(FieldError::BadDegree(deg));
        }
        let q = (p as u64).pow(deg as u32);
        if q > MAX_FIELD_ORDER {
            return Err(FieldError::OrderBudget(q, MAX_FIELD_ORDER));
        }
        let ext = if deg == 2 && p != 2 {
            least_nonresidue(p)
        } else {
            0
        };
        Ok(FieldSpec {
            kind: Kind::Finite { p, deg, ext },
        })
    }

    /// The finite field of order `q`, where `q` is a prime or a prime square.
    pub fn with_order(q: u64) -> Result<Self, FieldError> {
        if q <= MAX_FIELD_ORDER {
            let r = (q as u32).sqrt();
            if (r as u64) * (r as u64) == q && is_prime(r) {
                return Self::finite(r, 2);
            }
        }
        if q <= u32::MAX as u64 && is_prime(q as u32) {
            return Self::finite(q as u32, 1);
        }
        Err(FieldError::NotPrime(q.min(u32::MAX as u64) as u32))
    }

    pub fn is_finite(&self) -> bool {
        matches!(self.kind, Kind::Finite { .. })
    }

    pub fn rational_mode(&self) -> Option<RationalMode> {
        match self.kind {
            Kind::Rational(m) => Some(m),
            _ => None,
        }
    }

    /// Field characteristic; 0 for the rationals.
    pub fn characteristic(&self) -> u32 {
        match self.kind {
            Kind::Rational(_) => 0,
            Kind::Finite { p, .. } => p,
        }
    }

    /// Number of elements, if finite.
    pub fn order(&self) -> Option<u64> {
        match self.kind {
            Kind::Rational(_) => None,
            Kind::Finite { p, deg, .. } => Some((p as u64).pow(deg as u32)),
        }
    }

    pub fn extension_degree(&self) -> u8 {
        match self.kind {
            Kind::Rational(_) => 1,
            Kind::Finite { deg, .. } => deg,
        }
    }

    /// Short human-readable name, e.g. `F9`, `Q(real)`.
    pub fn describe(&self) -> String {
        match self.kind {
            Kind::Rational(RationalMode::RealClosure) => "Q(real)".to_string(),
            Kind::Rational(RationalMode::QuadraticClosure) => "Q(quadratic-closure)".to_string(),
            Kind::Finite { p, deg, .. } => format!("F{}", (p as u64).pow(deg as u32)),
        }
    }

    pub fn zero(&self) -> Scalar {
        match self.kind {
            Kind::Rational(_) => Scalar::Rational(BigRational::zero()),
            Kind::Finite { .. } => Scalar::Finite { a: 0, b: 0 },
        }
    }

    pub fn one(&self) -> Scalar {
        match self.kind {
            Kind::Rational(_) => Scalar::Rational(BigRational::one()),
            Kind::Finite { .. } => Scalar::Finite { a: 1, b: 0 },
        }
    }

    pub fn from_i64(&self, v: i64) -> Scalar {
        match self.kind {
            Kind::Rational(_) => Scalar::Rational(BigRational::from(BigInt::from(v))),
            Kind::Finite { p, .. } => {
                let r = v.rem_euclid(p as i64) as u32;
                Scalar::Finite { a: r, b: 0 }
            }
        }
    }

    pub fn is_zero(&self, x: &Scalar) -> bool {
        *x == self.zero()
    }

    pub fn is_one(&self, x: &Scalar) -> bool {
        *x == self.one()
    }

    pub fn add(&self, x: &Scalar, y: &Scalar) -> Scalar {
        match (self.kind, x, y) {
            (Kind::Rational(_), Scalar::Rational(a), Scalar::Rational(b)) => {
                Scalar::Rational(a + b)
            }
            (Kind::Finite { p, .. }, &Scalar::Finite { a, b }, &Scalar::Finite { a: c, b: d }) => {
                Scalar::Finite {
                    a: (a + c) % p,
                    b: (b + d) % p,
                }
            }
            _ => panic!("scalar does not belong to {}", self.describe()),
        }
    }

    pub fn neg(&self, x: &Scalar) -> Scalar {
        match (self.kind, x) {
            (Kind::Rational(_), Scalar::Rational(a)) => Scalar::Rational(-a),
            (Kind::Finite { p, .. }, &Scalar::Finite { a, b }) => Scalar::Finite {
                a: (p - a) % p,
                b: (p - b) % p,
            },
            _ => panic!("scalar does not belong to {}", self.describe()),
        }
    }

    pub fn sub(&self, x: &Scalar, y: &Scalar) -> Scalar {
        self.add(x, &self.neg(y))
    }

    pub fn mul(&self, x: &Scalar, y: &Scalar) -> Scalar {
        match (self.kind, x, y) {
            (Kind::Rational(_), Scalar::Rational(a), Scalar::Rational(b)) => {
                Scalar::Rational(a * b)
            }
            (
                Kind::Finite { p, deg, ext },
                &Scalar::Finite { a, b },
                &Scalar::Finite { a: c, b: d },
            ) => {
                let (p64, a, b, c, d) =
                    (p as u64, a as u64, b as u64, c as u64, d as u64);
                if deg == 1 {
                    return Scalar::Finite {
                        a: (a * c % p64) as u32,
                        b: 0,
                    };
                }
                // (a + b·t)(c + d·t) with t² = ext (odd p) or t² = t + 1 (p = 2).
                let (e0, e1) = if p == 2 {
                    ((a * c + b * d) % 2, (a * d + b * c + b * d) % 2)
                } else {
                    (
                        (a * c + ext as u64 * (b * d % p64)) % p64,
                        (a * d + b * c) % p64,
                    )
                };
                Scalar::Finite {
                    a: e0 as u32,
                    b: e1 as u32,
                }
            }
            _ => panic!("scalar does not belong to {}", self.describe()),
        }
    }

    pub fn inv(&self, x: &Scalar) -> Result<Scalar, FieldError> {
        if self.is_zero(x) {
            return Err(FieldError::DivisionByZero);
        }
        match (self.kind, x) {
            (Kind::Rational(_), Scalar::Rational(a)) => Ok(Scalar::Rational(a.recip())),
            (Kind::Finite { p, deg, ext }, &Scalar::Finite { a, b }) => {
                if deg == 1 || b == 0 {
                    return Ok(Scalar::Finite {
                        a: mod_inv(a, p),
                        b: 0,
                    });
                }
                // Conjugate trick: N(a + b·t) lies in F_p*.
                if p == 2 {
                    // conj(t) = t + 1; norm = a² + ab + b² = 1 when nonzero.
                    let norm = (a * a + a * b + b * b) % 2;
                    debug_assert_eq!(norm, 1);
                    Ok(Scalar::Finite {
                        a: (a + b) % 2,
                        b,
                    })
                } else {
                    let p64 = p as u64;
                    let norm =
                        ((a as u64 * a as u64) % p64 + p64 * p64
                            - (ext as u64 * (b as u64 * b as u64 % p64)) % p64)
                            % p64;
                    let ninv = mod_inv(norm as u32, p) as u64;
                    Ok(Scalar::Finite {
                        a: (a as u64 * ninv % p64) as u32,
                        b: (((p64 - b as u64) % p64) * ninv % p64) as u32,
                    })
                }
            }
            _ => panic!("scalar does not belong to {}", self.describe()),
        }
    }

    pub fn div(&self, x: &Scalar, y: &Scalar) -> Result<Scalar, FieldError> {
        Ok(self.mul(x, &self.inv(y)?))
    }

    pub fn pow(&self, x: &Scalar, mut e: u64) -> Scalar {
        let mut base = x.clone();
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    /// All field elements in the canonical order (0, 1, …; the prime subfield
    /// first, then the `i`-multiples). Errors on infinite fields.
    pub fn elements(&self) -> Result<Vec<Scalar>, FieldError> {
        match self.kind {
            Kind::Rational(_) => Err(FieldError::InfiniteEnumeration),
            Kind::Finite { p, deg, .. } => {
                let mut out = Vec::with_capacity((p as usize).pow(deg as u32));
                let b_range = if deg == 2 { p } else { 1 };
                for b in 0..b_range {
                    for a in 0..p {
                        out.push(Scalar::Finite { a, b });
                    }
                }
                Ok(out)
            }
        }
    }

    /// Position of a finite-field element in the enumeration order.
    pub fn element_index(&self, x: &Scalar) -> u64 {
        match (self.kind, x) {
            (Kind::Finite { p, .. }, &Scalar::Finite { a, b }) => b as u64 * p as u64 + a as u64,
            _ => panic!("element_index requires a finite field"),
        }
    }

    /// Inverse of [`element_index`](Self::element_index).
    pub fn element_from_index(&self, idx: u64) -> Scalar {
        match self.kind {
            Kind::Finite { p, .. } => Scalar::Finite {
                a: (idx % p as u64) as u32,
                b: (idx / p as u64) as u32,
            },
            _ => panic!("element_from_index requires a finite field"),
        }
    }

    /// Square-class label, relative to this field's classification.
    pub fn square_class(&self, x: &Scalar) -> SquareClass {
        if self.is_zero(x) {
            return SquareClass::Zero;
        }
        match self.kind {
            Kind::Rational(RationalMode::RealClosure) => match x {
                Scalar::Rational(r) if r.is_positive() => SquareClass::Positive,
                _ => SquareClass::Negative,
            },
            Kind::Rational(RationalMode::QuadraticClosure) => SquareClass::Nonzero,
            Kind::Finite { p: 2, .. } => SquareClass::Nonzero,
            Kind::Finite { .. } => {
                // Euler's criterion in F_q, q odd.
                let q = self.order().unwrap();
                if self.is_one(&self.pow(x, (q - 1) / 2)) {
                    SquareClass::Square
                } else {
                    SquareClass::NonSquare
                }
            }
        }
    }

    /// Exact square root when one exists in the field. Finite fields use the
    /// enumeration order as tie-break, so the result is reproducible.
    pub fn sqrt(&self, x: &Scalar) -> Option<Scalar> {
        match (&self.kind, x) {
            (Kind::Rational(_), Scalar::Rational(r)) => {
                if r.is_negative() {
                    return None;
                }
                let num = r.numer().sqrt();
                let den = r.denom().sqrt();
                if &(&num * &num) == r.numer() && &(&den * &den) == r.denom() {
                    Some(Scalar::Rational(BigRational::new(num, den)))
                } else {
                    None
                }
            }
            (Kind::Finite { .. }, _) => self
                .elements()
                .expect("finite")
                .into_iter()
                .find(|r| self.mul(r, r) == *x),
            _ => panic!("scalar does not belong to {}", self.describe()),
        }
    }

    /// The least non-square of a finite field of odd order (the discriminant
    /// class representative traditionally written ω).
    pub fn nonsquare_unit(&self) -> Option<Scalar> {
        match self.kind {
            Kind::Finite { p, .. } if p != 2 => self
                .elements()
                .expect("finite")
                .into_iter()
                .find(|x| self.square_class(x) == SquareClass::NonSquare),
            _ => None,
        }
    }

    /// Parse a scalar in the canonical text grammar:
    /// rationals `[-]digits[/digits]`; `F_p` digit strings; `F_{p^2}` one of
    /// `a`, `b*i`, `a+b*i`, `a-b*i`; `F_4` the tokens `0|1|a|b`.
    pub fn parse_scalar(&self, text: &str) -> Result<Scalar, FieldError> {
        let bad = |reason: &str| FieldError::Malformed {
            text: text.to_string(),
            field: self.describe(),
            reason: reason.to_string(),
        };
        let text = text.trim();
        if text.is_empty() {
            return Err(bad("empty"));
        }
        match self.kind {
            Kind::Rational(_) => {
                let (num_str, den_str) = match text.split_once('/') {
                    Some((n, d)) => (n, Some(d)),
                    None => (text, None),
                };
                let num: BigInt = num_str
                    .parse()
                    .map_err(|_| bad("numerator is not an integer"))?;
                let den: BigInt = match den_str {
                    Some(d) => {
                        if d.starts_with('-') || d.starts_with('+') {
                            return Err(bad("denominator must be unsigned"));
                        }
                        d.parse().map_err(|_| bad("denominator is not an integer"))?
                    }
                    None => BigInt::one(),
                };
                if den.is_zero() {
                    return Err(bad("denominator is zero"));
                }
                Ok(Scalar::Rational(BigRational::new(num, den)))
            }
            Kind::Finite { p, deg: 1, .. } => Ok(Scalar::Finite {
                a: parse_mod(text, p).ok_or_else(|| bad("expected a digit string"))?,
                b: 0,
            }),
            Kind::Finite { p: 2, deg: 2, .. } => match text {
                "0" => Ok(Scalar::Finite { a: 0, b: 0 }),
                "1" => Ok(Scalar::Finite { a: 1, b: 0 }),
                "a" => Ok(Scalar::Finite { a: 0, b: 1 }),
                "b" => Ok(Scalar::Finite { a: 1, b: 1 }),
                _ => Err(bad("expected one of 0|1|a|b")),
            },
            Kind::Finite { p, .. } => {
                // a, b*i, a+b*i, a-b*i
                if let Some(coeff) = text.strip_suffix("*i") {
                    let split = coeff[1..]
                        .find(['+', '-'])
                        .map(|k| k + 1)
                        .filter(|&k| coeff.as_bytes().get(k).is_some());
                    match split {
                        None => {
                            let b = parse_mod(coeff, p).ok_or_else(|| bad("bad i-coefficient"))?;
                            Ok(Scalar::Finite { a: 0, b })
                        }
                        Some(k) => {
                            let a = parse_mod(&coeff[..k], p)
                                .ok_or_else(|| bad("bad constant coefficient"))?;
                            let b = parse_mod(&coeff[k + 1..], p)
                                .ok_or_else(|| bad("bad i-coefficient"))?;
                            let b = if coeff.as_bytes()[k] == b'-' { (p - b) % p } else { b };
                            Ok(Scalar::Finite { a, b })
                        }
                    }
                } else {
                    let a = parse_mod(text, p).ok_or_else(|| bad("expected a digit string"))?;
                    Ok(Scalar::Finite { a, b: 0 })
                }
            }
        }
    }

    /// Canonical text form; `parse_scalar ∘ format_scalar` is the identity.
    pub fn format_scalar(&self, x: &Scalar) -> String {
        match (&self.kind, x) {
            (Kind::Rational(_), Scalar::Rational(r)) => {
                if r.denom().is_one() {
                    r.numer().to_string()
                } else {
                    format!("{}/{}", r.numer(), r.denom())
                }
            }
            (Kind::Finite { p: 2, deg: 2, .. }, &Scalar::Finite { a, b }) => match (a, b) {
                (0, 0) => "0".into(),
                (1, 0) => "1".into(),
                (0, 1) => "a".into(),
                _ => "b".into(),
            },
            (Kind::Finite { .. }, &Scalar::Finite { a, b }) => {
                if b == 0 {
                    format!("{a}")
                } else if a == 0 {
                    format!("{b}*i")
                } else {
                    format!("{a}+{b}*i")
                }
            }
            _ => panic!("scalar does not belong to {}", self.describe()),
        }
    }
}

fn parse_mod(text: &str, p: u32) -> Option<u32> {
    if text.is_empty() || !text.bytes().all(|c| c.is_ascii_digit()) {
        return None;
    }
    // Arbitrary-length digit strings reduce mod p.
    let mut acc: u64 = 0;
    for c in text.bytes() {
        acc = (acc * 10 + (c - b'0') as u64) % p as u64;
    }
    Some(acc as u32)
}

fn mod_inv(a: u32, p: u32) -> u32 {
    // Fermat: a^(p-2) mod p.
    let mut acc: u64 = 1;
    let mut base = a as u64 % p as u64;
    let mut e = p as u64 - 2;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % p as u64;
        }
        base = base * base % p as u64;
        e >>= 1;
    }
    acc as u32
}

fn least_nonresidue(p: u32) -> u32 {
    // Scan 2, 3, … for the first quadratic non-residue mod p.
    'outer: for c in 2..p {
        for x in 1..p {
            if (x as u64 * x as u64) % p as u64 == c as u64 {
                continue 'outer;
            }
        }
        return c;
    }
    unreachable!("odd prime fields have non-residues")
}
