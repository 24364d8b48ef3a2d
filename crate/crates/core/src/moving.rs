//! Moving hypersurface families and point sequences indexed by a natural
//! number α, their exact instantiation, the small-height diagnostic, and the
//! per-place ordering/truncation data consumed by the filtration.
//!
//! Coefficients are expression trees in the index variable (written `a` in
//! the text grammar): rational literals, `+ - * /`, nonnegative integer
//! powers, and exponential atoms `c^a` with a constant nonzero rational
//! base. Every evaluation is exact, so instantiating the same α twice gives
//! bit-identical rationals.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::filtration::PrefixProfile;
use crate::ideals::{codim_in, proj_dim, Codim, Ideal, Limits};
use crate::places::{height_point, rat_pow, Place, ProjPoint, Rational};
use crate::polynomials::{height_poly, weil, ExponentTuple, HomPoly};

/// An exact expression in the index variable α.
#[derive(Debug, Clone, PartialEq)]
pub enum SeqExpr {
    Const(Rational),
    /// The index variable itself.
    Index,
    Add(Box<SeqExpr>, Box<SeqExpr>),
    Sub(Box<SeqExpr>, Box<SeqExpr>),
    Mul(Box<SeqExpr>, Box<SeqExpr>),
    Div(Box<SeqExpr>, Box<SeqExpr>),
    /// Nonnegative integer power of a subexpression.
    IntPow(Box<SeqExpr>, u32),
    /// `base^α` for a constant nonzero rational base.
    ExpPow(Rational),
}

impl SeqExpr {
    /// Exact evaluation at a natural number index.
    pub fn eval(&self, alpha: u64) -> Result<Rational> {
        match self {
            SeqExpr::Const(c) => Ok(c.clone()),
            SeqExpr::Index => Ok(Rational::from_integer(BigInt::from(alpha))),
            SeqExpr::Add(a, b) => Ok(a.eval(alpha)? + b.eval(alpha)?),
            SeqExpr::Sub(a, b) => Ok(a.eval(alpha)? - b.eval(alpha)?),
            SeqExpr::Mul(a, b) => Ok(a.eval(alpha)? * b.eval(alpha)?),
            SeqExpr::Div(a, b) => {
                let den = b.eval(alpha)?;
                if den.is_zero() {
                    return Err(Error::DivisionByZeroAt(alpha));
                }
                Ok(a.eval(alpha)? / den)
            }
            SeqExpr::IntPow(a, e) => Ok(rat_pow(&a.eval(alpha)?, *e)),
            SeqExpr::ExpPow(base) => {
                let e = u32::try_from(alpha).map_err(|_| {
                    Error::InvalidInput(format!("alpha = {alpha} too large for exponentiation"))
                })?;
                Ok(rat_pow(base, e))
            }
        }
    }

    fn contains_index(&self) -> bool {
        match self {
            SeqExpr::Const(_) | SeqExpr::ExpPow(_) => false,
            SeqExpr::Index => true,
            SeqExpr::Add(a, b) | SeqExpr::Sub(a, b) | SeqExpr::Mul(a, b) | SeqExpr::Div(a, b) => {
                a.contains_index() || b.contains_index()
            }
            SeqExpr::IntPow(a, _) => a.contains_index(),
        }
    }

    /// Fold a constant subexpression to a rational (errors if it divides by
    /// zero or mentions the index).
    fn to_constant(&self) -> Result<Rational> {
        if self.contains_index() {
            return Err(Error::Parse(
                "exponential base must be a constant rational".into(),
            ));
        }
        self.eval(0)
            .map_err(|_| Error::Parse("exponential base must be a well-defined rational".into()))
    }
}

impl fmt::Display for SeqExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeqExpr::Const(c) => write!(f, "{c}"),
            SeqExpr::Index => write!(f, "a"),
            SeqExpr::Add(a, b) => write!(f, "({a} + {b})"),
            SeqExpr::Sub(a, b) => write!(f, "({a} - {b})"),
            SeqExpr::Mul(a, b) => write!(f, "({a} * {b})"),
            SeqExpr::Div(a, b) => write!(f, "({a} / {b})"),
            SeqExpr::IntPow(a, e) => write!(f, "({a})^{e}"),
            SeqExpr::ExpPow(base) => {
                if base.is_integer() && !base.is_negative() {
                    write!(f, "{base}^a")
                } else {
                    write!(f, "({base})^a")
                }
            }
        }
    }
}

// --- parsing ---------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigInt),
    Index,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn lex(src: &str) -> Result<Vec<Tok>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] as char {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' => {
                out.push(Tok::Plus);
                i += 1;
            }
            '-' => {
                out.push(Tok::Minus);
                i += 1;
            }
            '*' => {
                out.push(Tok::Star);
                i += 1;
            }
            '/' => {
                out.push(Tok::Slash);
                i += 1;
            }
            '^' => {
                out.push(Tok::Caret);
                i += 1;
            }
            '(' => {
                out.push(Tok::LParen);
                i += 1;
            }
            ')' => {
                out.push(Tok::RParen);
                i += 1;
            }
            '0'..='9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let n: BigInt = src[start..i]
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad number `{}`", &src[start..i])))?;
                out.push(Tok::Num(n));
            }
            c if c.is_ascii_alphabetic() => {
                let start = i;
                while i < bytes.len() && (bytes[i] as char).is_ascii_alphabetic() {
                    i += 1;
                }
                match &src[start..i] {
                    "a" | "alpha" => out.push(Tok::Index),
                    other => {
                        return Err(Error::Parse(format!(
                            "unknown identifier `{other}` (the index variable is `a`)"
                        )))
                    }
                }
            }
            other => {
                return Err(Error::Parse(format!(
                    "unexpected character `{other}` in sequence expression"
                )))
            }
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expr(&mut self) -> Result<SeqExpr> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    acc = SeqExpr::Add(Box::new(acc), Box::new(self.term()?));
                }
                Some(Tok::Minus) => {
                    self.bump();
                    acc = SeqExpr::Sub(Box::new(acc), Box::new(self.term()?));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<SeqExpr> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.bump();
                    acc = SeqExpr::Mul(Box::new(acc), Box::new(self.unary()?));
                }
                Some(Tok::Slash) => {
                    self.bump();
                    acc = SeqExpr::Div(Box::new(acc), Box::new(self.unary()?));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<SeqExpr> {
        if matches!(self.peek(), Some(Tok::Minus)) {
            self.bump();
            let inner = self.unary()?;
            return Ok(SeqExpr::Sub(
                Box::new(SeqExpr::Const(Rational::zero())),
                Box::new(inner),
            ));
        }
        self.power()
    }

    fn power(&mut self) -> Result<SeqExpr> {
        let base = self.atom()?;
        if !matches!(self.peek(), Some(Tok::Caret)) {
            return Ok(base);
        }
        self.bump();
        match self.bump() {
            Some(Tok::Num(n)) => {
                let e = u32::try_from(n.clone())
                    .map_err(|_| Error::Parse(format!("exponent `{n}` out of range")))?;
                Ok(SeqExpr::IntPow(Box::new(base), e))
            }
            Some(Tok::Index) => {
                let c = base.to_constant()?;
                if c.is_zero() {
                    return Err(Error::Parse("exponential base must be nonzero".into()));
                }
                Ok(SeqExpr::ExpPow(c))
            }
            _ => Err(Error::Parse("expected an integer or `a` after `^`".into())),
        }
    }

    fn atom(&mut self) -> Result<SeqExpr> {
        match self.bump() {
            Some(Tok::Num(n)) => Ok(SeqExpr::Const(Rational::from_integer(n))),
            Some(Tok::Index) => Ok(SeqExpr::Index),
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                match self.bump() {
                    Some(Tok::RParen) => Ok(inner),
                    _ => Err(Error::Parse("missing `)`".into())),
                }
            }
            other => Err(Error::Parse(format!(
                "unexpected token {other:?} in sequence expression"
            ))),
        }
    }
}

impl SeqExpr {
    /// Parse the sequence-expression grammar: rational arithmetic in the
    /// index variable `a`, `expr^e` for nonnegative integer e, and the
    /// exponential sugar `c^a` for a constant nonzero rational c.
    ///
    /// ```
    /// use heightlab::moving::SeqExpr;
    /// use heightlab::places::rat;
    /// let e = SeqExpr::parse("a^2 + 1").unwrap();
    /// assert_eq!(e.eval(3).unwrap(), rat(10, 1));
    /// let e = SeqExpr::parse("2^a").unwrap();
    /// assert_eq!(e.eval(5).unwrap(), rat(32, 1));
    /// ```
    pub fn parse(src: &str) -> Result<SeqExpr> {
        let toks = lex(src)?;
        if toks.is_empty() {
            return Err(Error::Parse("empty sequence expression".into()));
        }
        let mut p = Parser { toks, pos: 0 };
        let e = p.expr()?;
        if p.pos != p.toks.len() {
            return Err(Error::Parse(format!(
                "trailing input after position {} in sequence expression",
                p.pos
            )));
        }
        Ok(e)
    }
}

// --- moving families --------------------------------------------------------

/// A hypersurface whose coefficients move with α.
#[derive(Debug, Clone)]
pub struct MovingHypersurface {
    num_vars: usize,
    degree: u32,
    coeffs: BTreeMap<ExponentTuple, SeqExpr>,
}

impl MovingHypersurface {
    pub fn new(
        num_vars: usize,
        degree: u32,
        coeffs: BTreeMap<ExponentTuple, SeqExpr>,
    ) -> Result<MovingHypersurface> {
        if degree == 0 {
            return Err(Error::InvalidInput("degree must be positive".into()));
        }
        if coeffs.is_empty() {
            return Err(Error::ZeroPolynomial);
        }
        for exps in coeffs.keys() {
            if exps.len() != num_vars {
                return Err(Error::DimensionMismatch {
                    expected: num_vars,
                    found: exps.len(),
                });
            }
            let d: u32 = exps.iter().sum();
            if d != degree {
                return Err(Error::NotHomogeneous {
                    monomial: format!("{exps:?}"),
                });
            }
        }
        Ok(MovingHypersurface {
            num_vars,
            degree,
            coeffs,
        })
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn coeffs(&self) -> &BTreeMap<ExponentTuple, SeqExpr> {
        &self.coeffs
    }

    /// The instance at a fixed index.
    pub fn instantiate(&self, alpha: u64) -> Result<HomPoly> {
        let mut map = BTreeMap::new();
        for (exps, e) in &self.coeffs {
            let c = e.eval(alpha)?;
            if !c.is_zero() {
                map.insert(exps.clone(), c);
            }
        }
        if map.is_empty() {
            return Err(Error::DegenerateInstance {
                alpha,
                what: "all coefficients vanish".into(),
            });
        }
        HomPoly::new(self.num_vars, map)
    }
}

/// A point sequence with coordinates moving in α.
#[derive(Debug, Clone)]
pub struct MovingPoint {
    coords: Vec<SeqExpr>,
}

impl MovingPoint {
    pub fn new(coords: Vec<SeqExpr>) -> Result<MovingPoint> {
        if coords.len() < 2 {
            return Err(Error::InvalidInput(
                "a projective point needs at least two coordinates".into(),
            ));
        }
        Ok(MovingPoint { coords })
    }

    pub fn parse(sources: &[impl AsRef<str>]) -> Result<MovingPoint> {
        MovingPoint::new(
            sources
                .iter()
                .map(|s| SeqExpr::parse(s.as_ref()))
                .collect::<Result<Vec<_>>>()?,
        )
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn instantiate(&self, alpha: u64) -> Result<ProjPoint> {
        let coords = self
            .coords
            .iter()
            .map(|e| e.eval(alpha))
            .collect::<Result<Vec<_>>>()?;
        ProjPoint::new(coords).map_err(|_| Error::DegenerateInstance {
            alpha,
            what: "all point coordinates vanish".into(),
        })
    }
}

/// Instantiate a family and a point at one index, checking nondegeneracy.
pub fn instantiate(
    family: &[MovingHypersurface],
    point: &MovingPoint,
    alpha: u64,
) -> Result<(Vec<HomPoly>, ProjPoint)> {
    let mut hyps = Vec::with_capacity(family.len());
    for (j, h) in family.iter().enumerate() {
        let inst = h.instantiate(alpha).map_err(|e| match e {
            Error::DegenerateInstance { alpha, what } => Error::DegenerateInstance {
                alpha,
                what: format!("hypersurface {}: {what}", j + 1),
            },
            other => other,
        })?;
        hyps.push(inst);
    }
    let x = point.instantiate(alpha)?;
    Ok((hyps, x))
}

// --- smallness --------------------------------------------------------------

/// One sampled index of the small-height diagnostic.
#[derive(Debug, Clone, PartialEq)]
pub struct SmallnessRow {
    pub alpha: u64,
    /// h(x(α)).
    pub h_point: f64,
    /// max_j h(Q_j(α)).
    pub max_h_poly: f64,
    /// max_j h(Q_j(α)) / h(x(α)).
    pub ratio: f64,
}

/// Empirical witness of the hypothesis that coefficient heights grow slower
/// than point heights.
#[derive(Debug, Clone, PartialEq)]
pub struct SmallnessReport {
    pub rows: Vec<SmallnessRow>,
    /// Least-squares slope of ratio against α.
    pub trend_slope: f64,
    /// Ratio at the largest sampled index.
    pub final_ratio: f64,
    pub threshold: f64,
    /// Advisory flag: the ratio neither decays nor stays below threshold.
    pub warn: bool,
    /// Indices skipped because of degeneracy or zero point height.
    pub skipped: Vec<u64>,
}

/// Sample heights over a range and fit the ratio trend. Indices where the
/// instance degenerates or h(x(α)) = 0 are skipped and recorded.
pub fn smallness_report(
    family: &[MovingHypersurface],
    point: &MovingPoint,
    alpha_range: (u64, u64),
    threshold: f64,
) -> Result<SmallnessReport> {
    let (lo, hi) = alpha_range;
    if lo > hi {
        return Err(Error::InvalidInput(format!("empty alpha range {lo}..{hi}")));
    }
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for alpha in lo..=hi {
        let (hyps, x) = match instantiate(family, point, alpha) {
            Ok(v) => v,
            Err(Error::DegenerateInstance { .. } | Error::DivisionByZeroAt(_)) => {
                skipped.push(alpha);
                continue;
            }
            Err(e) => return Err(e),
        };
        let h_point = height_point(&x);
        if h_point <= 0.0 {
            skipped.push(alpha);
            continue;
        }
        let max_h_poly = hyps.iter().map(height_poly).fold(0.0, f64::max);
        rows.push(SmallnessRow {
            alpha,
            h_point,
            max_h_poly,
            ratio: max_h_poly / h_point,
        });
    }
    let trend_slope = least_squares_slope(&rows);
    let final_ratio = rows.last().map_or(0.0, |r| r.ratio);
    // Identically-zero ratios have slope exactly 0 and are unobjectionable;
    // warn on genuine growth or on a final ratio still above threshold.
    let warn = final_ratio > threshold || trend_slope > 1e-12;
    Ok(SmallnessReport {
        rows,
        trend_slope,
        final_ratio,
        threshold,
        warn,
        skipped,
    })
}

fn least_squares_slope(rows: &[SmallnessRow]) -> f64 {
    if rows.len() < 2 {
        return 0.0;
    }
    let n = rows.len() as f64;
    let sx: f64 = rows.iter().map(|r| r.alpha as f64).sum();
    let sy: f64 = rows.iter().map(|r| r.ratio).sum();
    let sxx: f64 = rows.iter().map(|r| (r.alpha as f64).powi(2)).sum();
    let sxy: f64 = rows.iter().map(|r| r.alpha as f64 * r.ratio).sum();
    let denom = n * sxx - sx * sx;
    if denom == 0.0 {
        0.0
    } else {
        (n * sxy - sx * sy) / denom
    }
}

// --- ordering and truncation -------------------------------------------------

/// Weil values of a family at one place, sorted descending, with the
/// sorting permutation and data aligned to sorted slots.
#[derive(Debug, Clone)]
pub struct OrderedWeil {
    /// `order[j]` is the 0-based original index in sorted slot j.
    pub order: Vec<usize>,
    /// Clamped Weil values, nonincreasing.
    pub sorted_weil: Vec<f64>,
    /// Weights permuted into sorted slots.
    pub sorted_weights: Vec<Rational>,
    /// `1 / deg` per sorted slot.
    pub sorted_inv_degrees: Vec<f64>,
    /// Total magnitude clamped away from negative archimedean values.
    pub clamp_total: f64,
}

/// Evaluate, clamp, and sort the Weil values of a family at one place.
/// Archimedean values may dip slightly below zero (bounded by `-log #T_d`);
/// they are clamped to 0 for ordering and filtration purposes and the
/// clamped mass is reported. Ties break toward the smaller original index.
pub fn order_weil(
    hypersurfaces: &[HomPoly],
    weights: &[Rational],
    v: &Place,
    x: &ProjPoint,
) -> Result<OrderedWeil> {
    if hypersurfaces.len() != weights.len() {
        return Err(Error::InvalidInput(format!(
            "{} hypersurfaces but {} weights",
            hypersurfaces.len(),
            weights.len()
        )));
    }
    let mut clamp_total = 0.0;
    let mut values = Vec::with_capacity(hypersurfaces.len());
    for q in hypersurfaces {
        let raw = weil(q, v, x)?.value;
        let clamped = if raw < 0.0 {
            clamp_total += -raw;
            0.0
        } else {
            raw
        };
        values.push(clamped);
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| {
        values[j]
            .partial_cmp(&values[i])
            .expect("finite Weil values")
            .then(i.cmp(&j))
    });
    let sorted_weil: Vec<f64> = order.iter().map(|&i| values[i]).collect();
    let sorted_weights: Vec<Rational> = order.iter().map(|&i| weights[i].clone()).collect();
    let sorted_inv_degrees: Vec<f64> = order
        .iter()
        .map(|&i| 1.0 / hypersurfaces[i].degree() as f64)
        .collect();
    Ok(OrderedWeil {
        order,
        sorted_weil,
        sorted_weights,
        sorted_inv_degrees,
        clamp_total,
    })
}

/// Prefix codimensions of an ordered family inside a variety: for each
/// prefix of the sorted list compute `codim(D_{σ(1)} ∩ ... ∩ D_{σ(j)} ∩ V)`
/// capped at `dim V`, stopping at the first empty intersection. `l` is the
/// last prefix length with nonempty intersection.
pub fn prefix_profile(
    variety: &Ideal,
    sorted_hypersurfaces: &[HomPoly],
    order: Vec<usize>,
    limits: &Limits,
) -> Result<PrefixProfile> {
    if sorted_hypersurfaces.len() != order.len() {
        return Err(Error::InvalidInput(
            "order and hypersurface list lengths differ".into(),
        ));
    }
    let dim = proj_dim(variety, limits)?;
    if dim.is_empty() {
        return Err(Error::EmptyScheme);
    }
    let n = dim.0 as u32;
    let mut b = Vec::new();
    for j in 1..=sorted_hypersurfaces.len() {
        match codim_in(variety, &sorted_hypersurfaces[..j], limits)? {
            Codim::Infinite => break,
            Codim::Finite(c) => b.push(c.min(n)),
        }
    }
    let l = b.len();
    PrefixProfile::new(order, l, b)
}
