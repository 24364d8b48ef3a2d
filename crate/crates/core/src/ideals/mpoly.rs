//! Internal sparse multivariate polynomials for the Gröbner engine.
//!
//! Unlike [`crate::polynomials::HomPoly`] these are not required to be
//! homogeneous (the Rabinowitsch construction introduces `1 - y*f`), terms
//! are kept sorted descending in graded reverse lexicographic order, and the
//! arithmetic is tuned for the division loop.

use std::cmp::Ordering;

use num_traits::{One, Zero};

use crate::places::Rational;

pub(crate) type Exps = Vec<u32>;

pub(crate) fn total_degree(e: &[u32]) -> u64 {
    e.iter().map(|&x| x as u64).sum()
}

/// Graded reverse lexicographic order: compare total degree first; on ties
/// the monomial whose rightmost differing exponent is smaller is the larger.
pub(crate) fn grevlex_cmp(a: &[u32], b: &[u32]) -> Ordering {
    let (da, db) = (total_degree(a), total_degree(b));
    if da != db {
        return da.cmp(&db);
    }
    for i in (0..a.len()).rev() {
        if a[i] != b[i] {
            return b[i].cmp(&a[i]);
        }
    }
    Ordering::Equal
}

pub(crate) fn exp_divides(a: &[u32], b: &[u32]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

pub(crate) fn exp_sub(a: &[u32], b: &[u32]) -> Exps {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub(crate) fn exp_lcm(a: &[u32], b: &[u32]) -> Exps {
    a.iter().zip(b).map(|(x, y)| *x.max(y)).collect()
}

pub(crate) fn exp_add(a: &[u32], b: &[u32]) -> Exps {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct MPoly {
    pub num_vars: usize,
    /// Nonzero terms, sorted descending in grevlex.
    pub terms: Vec<(Exps, Rational)>,
}

impl MPoly {
    pub fn zero(num_vars: usize) -> MPoly {
        MPoly {
            num_vars,
            terms: Vec::new(),
        }
    }

    /// Normalize an arbitrary term list: sort, merge duplicates, drop zeros.
    pub fn from_terms(num_vars: usize, mut terms: Vec<(Exps, Rational)>) -> MPoly {
        terms.sort_by(|a, b| grevlex_cmp(&b.0, &a.0));
        let mut out: Vec<(Exps, Rational)> = Vec::with_capacity(terms.len());
        for (e, c) in terms {
            match out.last_mut() {
                Some((le, lc)) if *le == e => *lc += c,
                _ => out.push((e, c)),
            }
        }
        out.retain(|(_, c)| !c.is_zero());
        MPoly {
            num_vars,
            terms: out,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn leading(&self) -> Option<(&Exps, &Rational)> {
        self.terms.first().map(|(e, c)| (e, c))
    }

    pub fn leading_exps(&self) -> Option<&Exps> {
        self.terms.first().map(|(e, _)| e)
    }

    /// Largest total degree among the terms (0 for the zero polynomial).
    pub fn max_degree(&self) -> u64 {
        self.terms
            .iter()
            .map(|(e, _)| total_degree(e))
            .max()
            .unwrap_or(0)
    }

    /// Scale so the leading coefficient is 1.
    pub fn monic(mut self) -> MPoly {
        if let Some((_, lc)) = self.leading() {
            if !lc.is_one() {
                let lc = lc.clone();
                for (_, c) in &mut self.terms {
                    *c /= &lc;
                }
            }
        }
        self
    }

    /// `self - coeff * x^shift * other`, by sorted merge. The leading terms
    /// cancel exactly when used as a reduction step.
    pub fn sub_scaled(&self, coeff: &Rational, shift: &[u32], other: &MPoly) -> MPoly {
        let mut out: Vec<(Exps, Rational)> =
            Vec::with_capacity(self.terms.len() + other.terms.len());
        let mut i = 0;
        let mut j = 0;
        while i < self.terms.len() || j < other.terms.len() {
            if j == other.terms.len() {
                out.push(self.terms[i].clone());
                i += 1;
                continue;
            }
            let shifted = exp_add(&other.terms[j].0, shift);
            if i == self.terms.len() {
                let c = -(coeff * &other.terms[j].1);
                if !c.is_zero() {
                    out.push((shifted, c));
                }
                j += 1;
                continue;
            }
            match grevlex_cmp(&self.terms[i].0, &shifted) {
                Ordering::Greater => {
                    out.push(self.terms[i].clone());
                    i += 1;
                }
                Ordering::Less => {
                    let c = -(coeff * &other.terms[j].1);
                    if !c.is_zero() {
                        out.push((shifted, c));
                    }
                    j += 1;
                }
                Ordering::Equal => {
                    let c = &self.terms[i].1 - coeff * &other.terms[j].1;
                    if !c.is_zero() {
                        out.push((shifted, c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        MPoly {
            num_vars: self.num_vars,
            terms: out,
        }
    }

    /// Multiply by `coeff * x^shift`.
    pub fn mul_term(&self, coeff: &Rational, shift: &[u32]) -> MPoly {
        if coeff.is_zero() {
            return MPoly::zero(self.num_vars);
        }
        MPoly {
            num_vars: self.num_vars,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (exp_add(e, shift), c * coeff))
                .collect(),
        }
    }
}

/// Remainder of `f` under multivariate division by `divisors`: repeatedly
/// cancel the leading term by any divisor whose leading monomial divides it,
/// otherwise move it to the remainder. The result has no term divisible by a
/// divisor's leading monomial.
pub(crate) fn normal_form(f: &MPoly, divisors: &[MPoly]) -> MPoly {
    let mut p = f.clone();
    let mut rem: Vec<(Exps, Rational)> = Vec::new();
    'outer: while let Some((lm, lc)) = p.leading().map(|(e, c)| (e.clone(), c.clone())) {
        for g in divisors {
            if let Some((gm, gc)) = g.leading() {
                if exp_divides(gm, &lm) {
                    let shift = exp_sub(&lm, gm);
                    let coeff = &lc / gc;
                    p = p.sub_scaled(&coeff, &shift, g);
                    continue 'outer;
                }
            }
        }
        rem.push((lm, lc));
        p.terms.remove(0);
    }
    MPoly {
        num_vars: f.num_vars,
        terms: rem,
    }
}

/// The S-polynomial `x^(L-lm f)/lc f * f - x^(L-lm g)/lc g * g` with `L` the
/// lcm of the two leading monomials.
pub(crate) fn s_poly(f: &MPoly, g: &MPoly) -> MPoly {
    let (fm, fc) = f.leading().expect("nonzero");
    let (gm, gc) = g.leading().expect("nonzero");
    let lcm = exp_lcm(fm, gm);
    let left = f.mul_term(&(Rational::one() / fc), &exp_sub(&lcm, fm));
    left.sub_scaled(&(Rational::one() / gc), &exp_sub(&lcm, gm), g)
}
