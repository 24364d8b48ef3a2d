//! Places of Q, normalized absolute values, and absolute logarithmic heights.
//!
//! A place is an equivalence class of absolute values: the archimedean one,
//! or a p-adic one per prime p. With the normalization used here
//! (`|p|_p = 1/p`, ordinary absolute value at infinity) the product formula
//! `prod_v ||x||_v = 1` holds exactly for every nonzero rational, and every
//! local norm of a rational is again a rational. Heights are computed as the
//! logarithm of an exact rational quantity; taking the log is the only
//! inexact step anywhere in this module.
//!
//! The base field is fixed to Q, so the local degree factor `n_v` is 1 at
//! every place and `||.||_v = |.|_v`.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::{factor_biguint, is_prime_u64};
use crate::error::{Error, Result};

/// Exact scalar carrier for everything in this crate: arbitrary-precision
/// rationals, always reduced, with positive denominator.
pub type Rational = BigRational;

/// Shorthand constructor used pervasively in tests and examples.
///
/// ```
/// use heightlab::places::rat;
/// assert_eq!(rat(2, 4), rat(1, 2));
/// ```
pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

/// Parse `p`, `-p`, or `p/q` with arbitrary-precision integers.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n = BigInt::from_str(num).map_err(|_| Error::Parse(format!("bad integer `{num}`")))?;
    let d = BigInt::from_str(den).map_err(|_| Error::Parse(format!("bad integer `{den}`")))?;
    if d.is_zero() {
        return Err(Error::Parse(format!("zero denominator in `{s}`")));
    }
    Ok(Rational::new(n, d))
}

/// A place of Q.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Place {
    /// The archimedean place (ordinary absolute value).
    Archimedean,
    /// The p-adic place attached to the prime `p`.
    Finite(u64),
}

impl Place {
    /// Build a finite place, verifying primality.
    pub fn finite(p: u64) -> Result<Place> {
        if is_prime_u64(p) {
            Ok(Place::Finite(p))
        } else {
            Err(Error::NotPrime(p))
        }
    }

    /// True for the archimedean place.
    pub fn is_archimedean(&self) -> bool {
        matches!(self, Place::Archimedean)
    }

    /// The local degree factor; identically 1 over Q. Kept as data so the
    /// model extends to number fields without changing call sites.
    pub fn local_degree(&self) -> u32 {
        1
    }
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Archimedean => write!(f, "inf"),
            Place::Finite(p) => write!(f, "p:{p}"),
        }
    }
}

impl FromStr for Place {
    type Err = Error;

    /// Accepts `inf` or `p:<prime>`, the serialization used in configs and
    /// CSV output.
    fn from_str(s: &str) -> Result<Place> {
        let s = s.trim();
        if s == "inf" {
            return Ok(Place::Archimedean);
        }
        if let Some(rest) = s.strip_prefix("p:") {
            let p: u64 = rest
                .parse()
                .map_err(|_| Error::Parse(format!("bad prime in place `{s}`")))?;
            return Place::finite(p);
        }
        Err(Error::Parse(format!(
            "bad place `{s}` (expected `inf` or `p:<prime>`)"
        )))
    }
}

/// A finite set of places, used as the set S of a verification run.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PlaceSet {
    places: BTreeSet<Place>,
}

impl PlaceSet {
    pub fn new(places: impl IntoIterator<Item = Place>) -> PlaceSet {
        PlaceSet {
            places: places.into_iter().collect(),
        }
    }

    pub fn contains(&self, v: &Place) -> bool {
        self.places.contains(v)
    }

    pub fn contains_archimedean(&self) -> bool {
        self.places.contains(&Place::Archimedean)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Place> {
        self.places.iter()
    }

    pub fn len(&self) -> usize {
        self.places.len()
    }

    pub fn is_empty(&self) -> bool {
        self.places.is_empty()
    }
}

impl fmt::Display for PlaceSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.places.iter().map(|p| p.to_string()).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

impl FromIterator<Place> for PlaceSet {
    fn from_iter<I: IntoIterator<Item = Place>>(iter: I) -> Self {
        PlaceSet::new(iter)
    }
}

/// A point of projective space with exact rational coordinates, at least one
/// of them nonzero. Equality is projective: two points are equal when their
/// coordinate vectors differ by a nonzero rational scalar.
#[derive(Debug, Clone)]
pub struct ProjPoint {
    coords: Vec<Rational>,
}

impl ProjPoint {
    pub fn new(coords: Vec<Rational>) -> Result<ProjPoint> {
        if coords.iter().all(Rational::is_zero) {
            return Err(Error::ZeroPoint);
        }
        Ok(ProjPoint { coords })
    }

    /// Convenience constructor from integer coordinates.
    pub fn from_ints(coords: &[i64]) -> Result<ProjPoint> {
        ProjPoint::new(coords.iter().map(|&c| rat(c, 1)).collect())
    }

    /// Parse comma-separated rational coordinates: `1,2/3,-5`.
    pub fn parse(s: &str) -> Result<ProjPoint> {
        let coords = s
            .split(',')
            .map(parse_rational)
            .collect::<Result<Vec<_>>>()?;
        ProjPoint::new(coords)
    }

    pub fn coords(&self) -> &[Rational] {
        &self.coords
    }

    /// Number of coordinates, i.e. M + 1 for a point of P^M.
    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    /// Scale every coordinate by a nonzero rational; represents the same
    /// projective point.
    pub fn scaled(&self, lambda: &Rational) -> Result<ProjPoint> {
        if lambda.is_zero() {
            return Err(Error::ZeroInput);
        }
        Ok(ProjPoint {
            coords: self.coords.iter().map(|c| c * lambda).collect(),
        })
    }

    /// A representative with coprime integer coordinates (denominators
    /// cleared, common content divided out).
    pub fn primitive_integer_coords(&self) -> Vec<BigInt> {
        let mut lcm = BigInt::one();
        for c in &self.coords {
            lcm = lcm.lcm(c.denom());
        }
        let ints: Vec<BigInt> = self
            .coords
            .iter()
            .map(|c| c.numer() * &lcm / c.denom())
            .collect();
        let mut gcd = BigInt::zero();
        for v in &ints {
            gcd = gcd.gcd(v);
        }
        ints.into_iter().map(|v| v / &gcd).collect()
    }

    /// The max of the local norms of the coordinates, `||x||_v`.
    pub fn sup_norm(&self, v: &Place) -> Rational {
        self.coords
            .iter()
            .map(|c| normalized_abs(v, c))
            .max()
            .expect("nonempty coordinates")
    }
}

impl PartialEq for ProjPoint {
    fn eq(&self, other: &Self) -> bool {
        if self.coords.len() != other.coords.len() {
            return false;
        }
        let i = match self.coords.iter().position(|c| !c.is_zero()) {
            Some(i) => i,
            None => return false,
        };
        if other.coords[i].is_zero() {
            return false;
        }
        // Cross-multiplication catches both proportionality and support
        // mismatches.
        (0..self.coords.len())
            .all(|j| &self.coords[j] * &other.coords[i] == &self.coords[i] * &other.coords[j])
    }
}

impl Eq for ProjPoint {}

impl fmt::Display for ProjPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coords.iter().map(|c| c.to_string()).collect();
        write!(f, "({})", parts.join(" : "))
    }
}

/// p-adic valuation of a nonzero rational: `ord_p(num) - ord_p(den)`.
pub fn ord_prime(p: u64, x: &Rational) -> i64 {
    assert!(!x.is_zero(), "ord_p of zero is undefined");
    fn ord_uint(p: &BigUint, n: &BigUint) -> i64 {
        let mut k = 0i64;
        let mut n = n.clone();
        loop {
            let (q, r) = n.div_rem(p);
            if r.is_zero() {
                k += 1;
                n = q;
            } else {
                return k;
            }
        }
    }
    let pb = BigUint::from(p);
    ord_uint(&pb, x.numer().magnitude()) - ord_uint(&pb, x.denom().magnitude())
}

/// The normalized absolute value `||x||_v`, exact. Returns 0 iff `x = 0`.
pub fn normalized_abs(v: &Place, x: &Rational) -> Rational {
    if x.is_zero() {
        return Rational::zero();
    }
    match v {
        Place::Archimedean => x.abs(),
        Place::Finite(p) => {
            let e = ord_prime(*p, x);
            let pb = BigInt::from(*p);
            if e >= 0 {
                Rational::new(BigInt::one(), pb.pow(e as u32))
            } else {
                Rational::from_integer(pb.pow((-e) as u32))
            }
        }
    }
}

/// The finitely many places where `||x||_v` can differ from 1: the
/// archimedean place plus every prime dividing numerator or denominator.
pub fn support_places(x: &Rational) -> Result<PlaceSet> {
    if x.is_zero() {
        return Err(Error::ZeroInput);
    }
    let mut places = BTreeSet::new();
    places.insert(Place::Archimedean);
    for part in [x.numer().magnitude(), x.denom().magnitude()] {
        for p in factor_biguint(part)?.keys() {
            places.insert(Place::Finite(*p));
        }
    }
    Ok(PlaceSet { places })
}

/// The product `prod_v ||x||_v` over the support of `x`; equals 1 exactly
/// for every nonzero rational (the product formula).
pub fn product_over_places(x: &Rational) -> Result<Rational> {
    let support = support_places(x)?;
    let mut acc = Rational::one();
    for v in support.iter() {
        acc *= normalized_abs(v, x);
    }
    Ok(acc)
}

/// Natural log of a positive big integer, accurate to the last f64 bit even
/// far beyond the f64 range.
pub(crate) fn ln_biguint(n: &BigUint) -> f64 {
    debug_assert!(!n.is_zero());
    let bits = n.bits();
    if bits <= 53 {
        return (n.to_u64().expect("fits") as f64).ln();
    }
    let shift = bits - 53;
    let top = (n >> shift).to_u64().expect("53 bits") as f64;
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Natural log of a positive rational via `ln(num) - ln(den)`.
pub(crate) fn ln_rational(x: &Rational) -> f64 {
    debug_assert!(x.is_positive());
    ln_biguint(x.numer().magnitude()) - ln_biguint(x.denom().magnitude())
}

/// Exact nonnegative integer power of a rational.
pub(crate) fn rat_pow(x: &Rational, e: u32) -> Rational {
    if e == 0 {
        return Rational::one();
    }
    Rational::new(x.numer().pow(e), x.denom().pow(e))
}

/// Exact multiplicative height of a projective point: the maximal absolute
/// coordinate of a coprime integer representative. `height_point` is its log.
pub fn multiplicative_height(x: &ProjPoint) -> BigUint {
    x.primitive_integer_coords()
        .iter()
        .map(|c| c.magnitude().clone())
        .max()
        .expect("nonempty coordinates")
}

/// Absolute logarithmic height `h(x) = sum_v log ||x||_v` of a projective
/// point. Scaling-invariant; 0 exactly when a representative has all
/// coordinates in {0, +-1}.
pub fn height_point(x: &ProjPoint) -> f64 {
    ln_biguint(&multiplicative_height(x))
}

/// Exact multiplicative height of a nonzero scalar:
/// `prod_v max(1, ||x||_v)`, which reduces to `max(|num|, den)`.
pub fn multiplicative_height_scalar(x: &Rational) -> Result<BigUint> {
    let support = support_places(x)?;
    let mut acc = Rational::one();
    for v in support.iter() {
        let n = normalized_abs(v, x);
        if n > Rational::one() {
            acc *= n;
        }
    }
    debug_assert!(acc.is_integer());
    Ok(acc.numer().magnitude().clone())
}

/// Absolute logarithmic height `h(x) = sum_v log^+ ||x||_v` of a nonzero
/// scalar. Satisfies `h(x) = h(1/x)` and `h(x) >= 0`.
pub fn height_scalar(x: &Rational) -> Result<f64> {
    Ok(ln_biguint(&multiplicative_height_scalar(x)?))
}
