//! Exact homogeneous multivariate polynomials over Q and their local data:
//! sup-norms at places, Weil functions, normalization, and the min/sum laws
//! for weighted intersections and sums of hypersurfaces.
//!
//! A polynomial of degree d in M+1 variables is stored sparsely as a map
//! from exponent tuples in `T_d = { I in N^{M+1} : |I| = d }` to nonzero
//! rational coefficients. The Weil function of a hypersurface `{Q = 0}` at a
//! place v is
//!
//! ```text
//! lambda_{Q,v}(x) = log( ||x||_v^d * ||Q||_v / ||Q(x)||_v ),
//! ```
//!
//! formed here as an exact rational before the single log, so invariance
//! under coordinate scaling and polynomial normalization is exact rather
//! than approximate.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::places::{
    ln_biguint, ln_rational, multiplicative_height, normalized_abs, rat_pow, Place, ProjPoint,
    Rational,
};

/// Exponent tuple of a monomial; entry i is the exponent of `x_i`. Inside a
/// [`HomPoly`] of degree d every tuple sums to d.
pub type ExponentTuple = Vec<u32>;

/// A Weil function value at a place.
#[derive(Debug, Clone, PartialEq)]
pub struct WeilValue {
    pub value: f64,
    pub place: Place,
}

/// A homogeneous polynomial over Q with at least one nonzero coefficient.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HomPoly {
    num_vars: usize,
    degree: u32,
    coeffs: BTreeMap<ExponentTuple, Rational>,
}

impl HomPoly {
    /// Build from a coefficient map. Zero coefficients are dropped; the
    /// remaining exponent tuples must all have length `num_vars` and the
    /// same total degree >= 1.
    pub fn new(num_vars: usize, coeffs: BTreeMap<ExponentTuple, Rational>) -> Result<HomPoly> {
        let coeffs: BTreeMap<ExponentTuple, Rational> =
            coeffs.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        let mut degree: Option<u32> = None;
        for exps in coeffs.keys() {
            if exps.len() != num_vars {
                return Err(Error::DimensionMismatch {
                    expected: num_vars,
                    found: exps.len(),
                });
            }
            let d: u32 = exps.iter().sum();
            match degree {
                None => degree = Some(d),
                Some(d0) if d0 != d => {
                    return Err(Error::NotHomogeneous {
                        monomial: format_monomial(exps),
                    })
                }
                _ => {}
            }
        }
        match degree {
            None => Err(Error::ZeroPolynomial),
            Some(0) => Err(Error::InvalidInput(
                "constant polynomials do not define hypersurfaces".into(),
            )),
            Some(degree) => Ok(HomPoly {
                num_vars,
                degree,
                coeffs,
            }),
        }
    }

    /// The single monomial `c * x^I`.
    pub fn monomial(num_vars: usize, exps: ExponentTuple, coeff: Rational) -> Result<HomPoly> {
        let mut m = BTreeMap::new();
        m.insert(exps, coeff);
        HomPoly::new(num_vars, m)
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    /// Coefficient map, sorted by exponent tuple.
    pub fn coeffs(&self) -> &BTreeMap<ExponentTuple, Rational> {
        &self.coeffs
    }

    pub fn coeff(&self, exps: &[u32]) -> Option<&Rational> {
        self.coeffs.get(exps)
    }

    /// Exact evaluation at a projective-point representative.
    pub fn evaluate(&self, x: &ProjPoint) -> Result<Rational> {
        if x.len() != self.num_vars {
            return Err(Error::DimensionMismatch {
                expected: self.num_vars,
                found: x.len(),
            });
        }
        let coords = x.coords();
        let mut acc = Rational::zero();
        for (exps, c) in &self.coeffs {
            let mut term = c.clone();
            for (i, &e) in exps.iter().enumerate() {
                if e > 0 {
                    term *= rat_pow(&coords[i], e);
                }
            }
            acc += term;
        }
        Ok(acc)
    }

    /// `||Q||_v`: the max of the local norms of the coefficients.
    pub fn v_norm(&self, v: &Place) -> Rational {
        self.coeffs
            .values()
            .map(|c| normalized_abs(v, c))
            .max()
            .expect("nonzero polynomial")
    }

    /// Divide by the coefficient at `pivot`, making that coefficient 1.
    pub fn normalize(&self, pivot: &[u32]) -> Result<HomPoly> {
        let a = self.coeffs.get(pivot).ok_or(Error::ZeroPivot)?;
        if a.is_zero() {
            return Err(Error::ZeroPivot);
        }
        let a = a.clone();
        Ok(HomPoly {
            num_vars: self.num_vars,
            degree: self.degree,
            coeffs: self
                .coeffs
                .iter()
                .map(|(e, c)| (e.clone(), c / &a))
                .collect(),
        })
    }

    /// Normalize at the default pivot: the lexicographically smallest
    /// exponent tuple with nonzero coefficient.
    pub fn normalize_default(&self) -> HomPoly {
        let pivot = self
            .coeffs
            .keys()
            .next()
            .expect("nonzero polynomial")
            .clone();
        self.normalize(&pivot).expect("pivot is present")
    }

    /// Multiply by a nonzero rational.
    pub fn scaled(&self, lambda: &Rational) -> Result<HomPoly> {
        if lambda.is_zero() {
            return Err(Error::ZeroInput);
        }
        Ok(HomPoly {
            num_vars: self.num_vars,
            degree: self.degree,
            coeffs: self
                .coeffs
                .iter()
                .map(|(e, c)| (e.clone(), c * lambda))
                .collect(),
        })
    }

    /// Sum of two polynomials of the same degree; errors if everything
    /// cancels.
    pub fn add(&self, other: &HomPoly) -> Result<HomPoly> {
        if self.num_vars != other.num_vars {
            return Err(Error::DimensionMismatch {
                expected: self.num_vars,
                found: other.num_vars,
            });
        }
        if self.degree != other.degree {
            return Err(Error::InvalidInput(format!(
                "cannot add degree {} to degree {}",
                other.degree, self.degree
            )));
        }
        let mut coeffs = self.coeffs.clone();
        for (e, c) in &other.coeffs {
            let entry = coeffs.entry(e.clone()).or_insert_with(Rational::zero);
            *entry += c;
        }
        HomPoly::new(self.num_vars, coeffs)
    }

    /// Product of two polynomials; degrees add.
    pub fn mul(&self, other: &HomPoly) -> Result<HomPoly> {
        if self.num_vars != other.num_vars {
            return Err(Error::DimensionMismatch {
                expected: self.num_vars,
                found: other.num_vars,
            });
        }
        let mut coeffs: BTreeMap<ExponentTuple, Rational> = BTreeMap::new();
        for (ea, ca) in &self.coeffs {
            for (eb, cb) in &other.coeffs {
                let e: ExponentTuple = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                let entry = coeffs.entry(e).or_insert_with(Rational::zero);
                *entry += ca * cb;
            }
        }
        HomPoly::new(self.num_vars, coeffs)
    }
}

/// Number of monomials of degree d in `num_vars` variables:
/// `C(d + M, M)` with `M = num_vars - 1`. This is `#T_d`, the sharp
/// constant in the archimedean lower bound for Weil functions.
pub fn monomial_count(degree: u32, num_vars: usize) -> BigUint {
    let m = num_vars as u64 - 1;
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for k in 1..=m {
        num *= BigUint::from(degree as u64 + k);
        den *= BigUint::from(k);
    }
    num / den
}

/// Exact multiplicative height of the coefficient vector of `Q`.
pub fn multiplicative_height_poly(q: &HomPoly) -> BigUint {
    let coords: Vec<Rational> = q.coeffs.values().cloned().collect();
    let point = ProjPoint::new(coords).expect("nonzero polynomial");
    multiplicative_height(&point)
}

/// Height of a polynomial: the height of its coefficient vector as a
/// projective point, `h(Q) = sum_v log ||Q||_v`.
pub fn height_poly(q: &HomPoly) -> f64 {
    ln_biguint(&multiplicative_height_poly(q))
}

/// The exact rational `||x||_v^d * ||Q||_v / ||Q(x)||_v` whose log is the
/// Weil function. Exposed so invariance properties can be asserted without
/// any floating-point tolerance.
pub fn weil_ratio(q: &HomPoly, v: &Place, x: &ProjPoint) -> Result<Rational> {
    let qx = q.evaluate(x)?;
    if qx.is_zero() {
        return Err(Error::PointOnDivisor);
    }
    let num = rat_pow(&x.sup_norm(v), q.degree()) * q.v_norm(v);
    Ok(num / normalized_abs(v, &qx))
}

/// The Weil function `lambda_{Q,v}(x)`; large when x is v-adically close to
/// the hypersurface `{Q = 0}`.
pub fn weil(q: &HomPoly, v: &Place, x: &ProjPoint) -> Result<WeilValue> {
    let ratio = weil_ratio(q, v, x)?;
    Ok(WeilValue {
        value: ln_rational(&ratio),
        place: *v,
    })
}

/// Weil function of the weighted intersection `c_1 Y_1 ∩ ... ∩ c_r Y_r` at
/// the hypersurface level: `min_i c_i * lambda_{Q_i,v}(x)`.
pub fn weil_min(entries: &[(HomPoly, f64)], v: &Place, x: &ProjPoint) -> Result<f64> {
    if entries.is_empty() {
        return Err(Error::InvalidInput("empty intersection".into()));
    }
    let mut best: Option<f64> = None;
    for (q, c) in entries {
        let w = weil(q, v, x)?.value * c;
        best = Some(match best {
            None => w,
            Some(b) => b.min(w),
        });
    }
    Ok(best.expect("nonempty"))
}

/// Weil function of the weighted sum `c_1 Y_1 + ... + c_r Y_r`:
/// `sum_i c_i * lambda_{Q_i,v}(x)`. The empty sum is 0.
pub fn weil_sum(entries: &[(HomPoly, f64)], v: &Place, x: &ProjPoint) -> Result<f64> {
    let mut acc = 0.0;
    for (q, c) in entries {
        acc += weil(q, v, x)?.value * c;
    }
    Ok(acc)
}

fn format_monomial(exps: &[u32]) -> String {
    let parts: Vec<String> = exps
        .iter()
        .enumerate()
        .filter(|(_, &e)| e > 0)
        .map(|(i, &e)| {
            if e == 1 {
                format!("x{i}")
            } else {
                format!("x{i}^{e}")
            }
        })
        .collect();
    if parts.is_empty() {
        "1".to_string()
    } else {
        parts.join("*")
    }
}

impl fmt::Display for HomPoly {
    /// Emits the text grammar accepted by [`HomPoly::parse`], highest
    /// exponent tuple first.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (exps, c) in self.coeffs.iter().rev() {
            let mono = format_monomial(exps);
            if first {
                first = false;
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let a = c.abs();
            if a.is_one() {
                write!(f, "{mono}")?;
            } else {
                write!(f, "{a}*{mono}")?;
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(BigInt),
    Var(usize),
    Plus,
    Minus,
    Star,
    Caret,
    Slash,
}

fn lex(src: &str) -> Result<Vec<Token>> {
    let mut tokens = Vec::new();
    let bytes = src.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let ch = bytes[i] as char;
        match ch {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' => {
                tokens.push(Token::Plus);
                i += 1;
            }
            '-' => {
                tokens.push(Token::Minus);
                i += 1;
            }
            '*' => {
                tokens.push(Token::Star);
                i += 1;
            }
            '^' => {
                tokens.push(Token::Caret);
                i += 1;
            }
            '/' => {
                tokens.push(Token::Slash);
                i += 1;
            }
            '0'..='9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let text = &src[start..i];
                let n: BigInt = text
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad number `{text}`")))?;
                tokens.push(Token::Num(n));
            }
            'x' => {
                i += 1;
                // Tolerate `x_0` as a synonym for `x0`.
                if i < bytes.len() && bytes[i] == b'_' {
                    i += 1;
                }
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if start == i {
                    return Err(Error::Parse("expected variable index after `x`".into()));
                }
                let idx: usize = src[start..i]
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad variable `x{}`", &src[start..i])))?;
                tokens.push(Token::Var(idx));
            }
            other => {
                return Err(Error::Parse(format!(
                    "unexpected character `{other}` in polynomial"
                )))
            }
        }
    }
    Ok(tokens)
}

impl HomPoly {
    /// Parse the polynomial text grammar: terms `c * x0^a0 * x1^a1 * ...`
    /// joined by `+` / `-`, with rational coefficients written `p/q`. The
    /// input must be homogeneous; the error message names the first
    /// offending monomial otherwise.
    ///
    /// ```
    /// use heightlab::polynomials::HomPoly;
    /// let q = HomPoly::parse("x0*x2 - x1^2", 3).unwrap();
    /// assert_eq!(q.degree(), 2);
    /// ```
    pub fn parse(src: &str, num_vars: usize) -> Result<HomPoly> {
        let tokens = lex(src)?;
        if tokens.is_empty() {
            return Err(Error::Parse("empty polynomial".into()));
        }
        let mut coeffs: BTreeMap<ExponentTuple, Rational> = BTreeMap::new();
        let mut pos = 0;
        let mut first_term = true;
        let mut expected_degree: Option<u32> = None;
        while pos < tokens.len() {
            // Sign.
            let mut negative = false;
            match tokens[pos] {
                Token::Plus => {
                    if first_term {
                        return Err(Error::Parse("leading `+` is not allowed".into()));
                    }
                    pos += 1;
                }
                Token::Minus => {
                    negative = true;
                    pos += 1;
                }
                _ if first_term => {}
                _ => return Err(Error::Parse("expected `+` or `-` between terms".into())),
            }
            first_term = false;

            let mut coeff = Rational::one();
            let mut exps = vec![0u32; num_vars];
            let mut saw_factor = false;
            loop {
                match tokens.get(pos) {
                    Some(Token::Num(n)) => {
                        pos += 1;
                        let mut c = Rational::from_integer(n.clone());
                        if let Some(Token::Slash) = tokens.get(pos) {
                            pos += 1;
                            match tokens.get(pos) {
                                Some(Token::Num(d)) => {
                                    pos += 1;
                                    if d.is_zero() {
                                        return Err(Error::Parse(
                                            "zero denominator in coefficient".into(),
                                        ));
                                    }
                                    c /= Rational::from_integer(d.clone());
                                }
                                _ => return Err(Error::Parse("expected integer after `/`".into())),
                            }
                        }
                        coeff *= c;
                        saw_factor = true;
                    }
                    Some(Token::Var(idx)) => {
                        pos += 1;
                        if *idx >= num_vars {
                            return Err(Error::Parse(format!(
                                "variable x{idx} out of range (expected {num_vars} variables)"
                            )));
                        }
                        let mut e = 1u32;
                        if let Some(Token::Caret) = tokens.get(pos) {
                            pos += 1;
                            match tokens.get(pos) {
                                Some(Token::Num(n)) => {
                                    pos += 1;
                                    e = u32::try_from(n.clone()).map_err(|_| {
                                        Error::Parse(format!("exponent `{n}` out of range"))
                                    })?;
                                }
                                _ => {
                                    return Err(Error::Parse(
                                        "expected integer exponent after `^`".into(),
                                    ))
                                }
                            }
                        }
                        exps[*idx] += e;
                        saw_factor = true;
                    }
                    Some(Token::Star) => {
                        pos += 1;
                        if !saw_factor {
                            return Err(Error::Parse("`*` without left factor".into()));
                        }
                    }
                    _ => break,
                }
            }
            if !saw_factor {
                return Err(Error::Parse("empty term".into()));
            }
            if negative {
                coeff = -coeff;
            }
            // Report homogeneity failures against the first term, in the
            // order the source wrote them.
            let term_degree: u32 = exps.iter().sum();
            match expected_degree {
                None => expected_degree = Some(term_degree),
                Some(d) if d != term_degree => {
                    return Err(Error::NotHomogeneous {
                        monomial: format_monomial(&exps),
                    })
                }
                _ => {}
            }
            let entry = coeffs.entry(exps).or_insert_with(Rational::zero);
            *entry += coeff;
        }
        HomPoly::new(num_vars, coeffs)
    }

    /// Parse with the variable count inferred as (largest index used) + 1.
    pub fn parse_infer(src: &str) -> Result<HomPoly> {
        let tokens = lex(src)?;
        let max_var = tokens
            .iter()
            .filter_map(|t| match t {
                Token::Var(i) => Some(*i),
                _ => None,
            })
            .max()
            .ok_or_else(|| Error::Parse("polynomial uses no variables".into()))?;
        HomPoly::parse(src, max_var + 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::places::rat;
    use proptest::prelude::*;

    fn parse2(src: &str) -> HomPoly {
        HomPoly::parse(src, 2).unwrap()
    }

    fn parse3(src: &str) -> HomPoly {
        HomPoly::parse(src, 3).unwrap()
    }

    #[test]
    fn parse_display_roundtrip() {
        for src in [
            "x0 + 2*x1",
            "x0*x2 - x1^2",
            "1/3*x0^2 + x1*x2",
            "-x0^3 + 5/7*x0*x1^2",
        ] {
            let q = HomPoly::parse(src, 3).unwrap();
            let back = HomPoly::parse(&q.to_string(), 3).unwrap();
            assert_eq!(q, back, "roundtrip through `{}`", q);
        }
    }

    #[test]
    fn parse_rejects_inhomogeneous_naming_monomial() {
        let err = HomPoly::parse("x0 + x1^2", 2).unwrap_err();
        match err {
            Error::NotHomogeneous { monomial } => assert_eq!(monomial, "x1^2"),
            other => panic!("expected NotHomogeneous, got {other:?}"),
        }
    }

    #[test]
    fn parse_rejects_junk() {
        assert!(HomPoly::parse("x0 - x0", 2).is_err()); // cancels to zero
        assert!(HomPoly::parse("3", 2).is_err()); // constant
        assert!(HomPoly::parse("x5", 2).is_err()); // out of range
        assert!(HomPoly::parse("x0 + + x1", 2).is_err());
        assert!(HomPoly::parse("", 2).is_err());
        assert!(HomPoly::parse("y0", 2).is_err());
    }

    #[test]
    fn parse_tolerates_underscores_and_implicit_star() {
        assert_eq!(parse2("x_0 + 2x_1"), parse2("x0 + 2*x1"));
    }

    #[test]
    fn evaluate_examples() {
        let x12 = ProjPoint::from_ints(&[1, 2]).unwrap();
        assert_eq!(parse2("x0 + x1").evaluate(&x12).unwrap(), rat(3, 1));
        let conic_pt = ProjPoint::from_ints(&[1, 4, 2]).unwrap();
        // (1:4:2) has x0*x1 - x2^2 = 4 - 4 = 0.
        assert_eq!(
            parse3("x0*x1 - x2^2").evaluate(&conic_pt).unwrap(),
            rat(0, 1)
        );
        let p01 = ProjPoint::from_ints(&[0, 1]).unwrap();
        assert_eq!(parse2("x0^2").evaluate(&p01).unwrap(), rat(0, 1));
    }

    #[test]
    fn v_norm_examples() {
        let q = parse2("x0 + 2*x1");
        assert_eq!(q.v_norm(&Place::Archimedean), rat(2, 1));
        assert_eq!(q.v_norm(&Place::Finite(2)), rat(1, 1));
        assert_eq!(q.v_norm(&Place::Finite(3)), rat(1, 1));
    }

    #[test]
    fn weil_examples() {
        let x12 = ProjPoint::from_ints(&[1, 2]).unwrap();
        // ||x|| = 2, ||Q|| = 1, Q(x) = 1.
        let w = weil(&parse2("x0"), &Place::Archimedean, &x12).unwrap();
        assert!((w.value - 2f64.ln()).abs() < 1e-15);

        let on_line = ProjPoint::from_ints(&[1, -1]).unwrap();
        assert!(matches!(
            weil(&parse2("x0 + x1"), &Place::Archimedean, &on_line),
            Err(Error::PointOnDivisor)
        ));

        // At p = 2 with x = (1:1): ||x||_2 = 1, ||Q||_2 = 1, ||3||_2 = 1.
        let x11 = ProjPoint::from_ints(&[1, 1]).unwrap();
        let w = weil(&parse2("x0 + 2*x1"), &Place::Finite(2), &x11).unwrap();
        assert_eq!(w.value, 0.0);
        assert_eq!(
            weil_ratio(&parse2("x0 + 2*x1"), &Place::Finite(2), &x11).unwrap(),
            rat(1, 1)
        );
    }

    #[test]
    fn normalize_examples() {
        let q = parse2("2*x0 + 4*x1");
        let n = q.normalize(&[1, 0]).unwrap();
        assert_eq!(n, parse2("x0 + 2*x1"));
        let id = parse2("x0 + x1");
        assert_eq!(id.normalize(&[1, 0]).unwrap(), id);
        let m = HomPoly::parse("3*x1^2", 2).unwrap();
        assert!(matches!(m.normalize(&[2, 0]), Err(Error::ZeroPivot)));
        // Default pivot: lexicographically smallest tuple, here (0,2).
        assert_eq!(m.normalize_default(), HomPoly::parse("x1^2", 2).unwrap());
    }

    #[test]
    fn weil_min_sum_examples() {
        let v = Place::Archimedean;
        let x = ProjPoint::from_ints(&[1, 2, 4]).unwrap();
        let entries = vec![(parse3("x0"), 1.0), (parse3("x1"), 1.0)];
        let min = weil_min(&entries, &v, &x).unwrap();
        let sum = weil_sum(&entries, &v, &x).unwrap();
        assert!((min - 2f64.ln()).abs() < 1e-12);
        assert!((sum - (4f64.ln() + 2f64.ln())).abs() < 1e-12);

        let zero_weight = vec![(parse3("x0"), 0.0)];
        assert_eq!(weil_min(&zero_weight, &v, &x).unwrap(), 0.0);
        assert_eq!(weil_sum(&[], &v, &x).unwrap(), 0.0);

        let single = vec![(parse3("x0"), 1.0)];
        let w = weil(&parse3("x0"), &v, &x).unwrap().value;
        assert_eq!(weil_min(&single, &v, &x).unwrap(), w);
        let double = vec![(parse3("x0"), 2.0)];
        assert_eq!(weil_sum(&double, &v, &x).unwrap(), 2.0 * w);
    }

    #[test]
    fn height_poly_examples() {
        assert_eq!(height_poly(&parse2("x0 + x1")), 0.0);
        assert!((height_poly(&parse2("x0 + 2*x1")) - 2f64.ln()).abs() < 1e-15);
        let q = HomPoly::parse("1/3*x0^2 + x1*x2", 3).unwrap();
        assert!((height_poly(&q) - 3f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn monomial_count_small_cases() {
        assert_eq!(monomial_count(1, 3), BigUint::from(3u32));
        assert_eq!(monomial_count(2, 3), BigUint::from(6u32));
        assert_eq!(monomial_count(3, 3), BigUint::from(10u32));
        assert_eq!(monomial_count(4, 2), BigUint::from(5u32));
    }

    // --- randomized invariants ----------------------------------------

    fn arb_poly(num_vars: usize, max_degree: u32) -> impl Strategy<Value = HomPoly> {
        let degree = 1..=max_degree;
        degree.prop_flat_map(move |d| {
            let tuples = monomials_of_degree(d, num_vars);
            let n = tuples.len();
            proptest::collection::vec(-6i64..=6, n).prop_filter_map(
                "needs a nonzero coefficient",
                move |cs| {
                    let coeffs: BTreeMap<ExponentTuple, Rational> = tuples
                        .iter()
                        .cloned()
                        .zip(cs.iter().map(|&c| rat(c, 1)))
                        .collect();
                    HomPoly::new(num_vars, coeffs).ok()
                },
            )
        })
    }

    fn monomials_of_degree(d: u32, num_vars: usize) -> Vec<ExponentTuple> {
        let mut out = Vec::new();
        let mut cur = vec![0u32; num_vars];
        fn rec(d: u32, i: usize, cur: &mut Vec<u32>, out: &mut Vec<ExponentTuple>) {
            if i + 1 == cur.len() {
                cur[i] = d;
                out.push(cur.clone());
                return;
            }
            for e in 0..=d {
                cur[i] = e;
                rec(d - e, i + 1, cur, out);
            }
        }
        rec(d, 0, &mut cur, &mut out);
        out
    }

    fn arb_point(num_vars: usize) -> impl Strategy<Value = ProjPoint> {
        proptest::collection::vec((-9i64..=9, 1i64..=9), num_vars).prop_filter_map(
            "needs a nonzero coordinate",
            |cs| {
                let coords: Vec<Rational> = cs.iter().map(|&(n, d)| rat(n, d)).collect();
                ProjPoint::new(coords).ok()
            },
        )
    }

    proptest! {
        #[test]
        fn weil_nonnegative_at_finite_places(
            q in arb_poly(3, 3),
            x in arb_point(3),
            p in proptest::sample::select(vec![2u64, 3, 5, 7]),
        ) {
            let v = Place::Finite(p);
            if let Ok(ratio) = weil_ratio(&q, &v, &x) {
                prop_assert!(ratio >= rat(1, 1), "ultrametric bound failed: {ratio}");
            }
        }

        #[test]
        fn weil_archimedean_lower_bound(q in arb_poly(3, 3), x in arb_point(3)) {
            if let Ok(w) = weil(&q, &Place::Archimedean, &x) {
                let count = monomial_count(q.degree(), 3);
                let bound = -ln_biguint(&count);
                prop_assert!(w.value >= bound - 1e-9);
            }
        }

        #[test]
        fn weil_invariant_under_scaling(
            q in arb_poly(3, 2),
            x in arb_point(3),
            lam_n in 1i64..20, lam_d in 1i64..20,
            mu_n in 1i64..20, mu_d in 1i64..20,
        ) {
            let v = Place::Finite(3);
            if let Ok(r) = weil_ratio(&q, &v, &x) {
                let qs = q.scaled(&rat(lam_n, lam_d)).unwrap();
                let xs = x.scaled(&rat(mu_n, mu_d)).unwrap();
                prop_assert_eq!(weil_ratio(&qs, &v, &xs).unwrap(), r);
            }
        }

        #[test]
        fn weil_normalization_invariant(q in arb_poly(3, 2), x in arb_point(3)) {
            for v in [Place::Archimedean, Place::Finite(2), Place::Finite(5)] {
                if let Ok(r) = weil_ratio(&q, &v, &x) {
                    prop_assert_eq!(weil_ratio(&q.normalize_default(), &v, &x).unwrap(), r);
                }
            }
        }

        #[test]
        fn weil_gauss_multiplicative_at_finite_places(
            q in arb_poly(3, 2),
            r in arb_poly(3, 2),
            x in arb_point(3),
            p in proptest::sample::select(vec![2u64, 3, 5]),
        ) {
            let v = Place::Finite(p);
            let prod = q.mul(&r).unwrap();
            if let (Ok(wq), Ok(wr)) = (weil_ratio(&q, &v, &x), weil_ratio(&r, &v, &x)) {
                // Gauss's lemma: the sup-norm is multiplicative at finite
                // places, hence Weil ratios multiply exactly and the product
                // dominates each factor.
                let wp = weil_ratio(&prod, &v, &x).unwrap();
                prop_assert_eq!(wp.clone(), &wq * &wr);
                prop_assert!(wp >= wq);
            }
        }

        #[test]
        fn poly_height_scale_invariant(q in arb_poly(3, 2), n in 1i64..50, d in 1i64..50) {
            let qs = q.scaled(&rat(n, d)).unwrap();
            prop_assert_eq!(multiplicative_height_poly(&q), multiplicative_height_poly(&qs));
        }
    }
}
