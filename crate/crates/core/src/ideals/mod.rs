//! Homogeneous ideal arithmetic over Q at desk scale: reduced Gröbner bases
//! (Buchberger, graded reverse lexicographic order), ideal and radical
//! membership, projective dimension and codimension, Hilbert functions, and
//! the degree of a variety.
//!
//! The monomial order is fixed to grevlex so that every query has one
//! deterministic answer. Reduced bases are canonical, which makes
//! [`groebner`] idempotent. Dimension is read off the initial monomial ideal
//! (maximal independent variable sets); the degree comes from exact finite
//! differences of the Hilbert function, never from floating-point fits.

mod mpoly;

use std::collections::BTreeSet;
use std::fmt;

use num_traits::One;

use crate::error::{Error, Result};
use crate::places::Rational;
use crate::polynomials::{ExponentTuple, HomPoly};

use mpoly::{exp_divides, exp_lcm, grevlex_cmp, normal_form, s_poly, total_degree, Exps, MPoly};

/// Resource caps for Gröbner-driven computations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Maximum number of S-pairs processed in one Buchberger run.
    pub max_pairs: usize,
    /// Maximum total degree allowed for new basis elements and for Hilbert
    /// evaluations.
    pub max_degree: u32,
    /// Maximum number of hypersurfaces a position computation will
    /// enumerate subsets of (2^q growth).
    pub max_hypersurfaces: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_pairs: 10_000,
            max_degree: 30,
            max_hypersurfaces: 12,
        }
    }
}

/// A homogeneous ideal given by generators. The zero ideal is the empty
/// generator list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ideal {
    num_vars: usize,
    generators: Vec<HomPoly>,
}

impl Ideal {
    pub fn new(num_vars: usize, generators: Vec<HomPoly>) -> Result<Ideal> {
        for g in &generators {
            if g.num_vars() != num_vars {
                return Err(Error::DimensionMismatch {
                    expected: num_vars,
                    found: g.num_vars(),
                });
            }
        }
        Ok(Ideal {
            num_vars,
            generators,
        })
    }

    /// The zero ideal of `k[x_0..x_{num_vars-1}]`; cuts out all of
    /// projective space.
    pub fn zero(num_vars: usize) -> Ideal {
        Ideal {
            num_vars,
            generators: Vec::new(),
        }
    }

    /// Parse generators in the polynomial text grammar.
    pub fn parse(num_vars: usize, sources: &[impl AsRef<str>]) -> Result<Ideal> {
        let generators = sources
            .iter()
            .map(|s| HomPoly::parse(s.as_ref(), num_vars))
            .collect::<Result<Vec<_>>>()?;
        Ideal::new(num_vars, generators)
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn generators(&self) -> &[HomPoly] {
        &self.generators
    }

    /// The ideal obtained by appending extra generators.
    pub fn with_extra(&self, extra: &[HomPoly]) -> Result<Ideal> {
        let mut gens = self.generators.clone();
        gens.extend_from_slice(extra);
        Ideal::new(self.num_vars, gens)
    }
}

/// A reduced Gröbner basis under grevlex: leading coefficients 1, no leading
/// monomial divides another, every element fully reduced modulo the rest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroebnerBasis {
    num_vars: usize,
    basis: Vec<HomPoly>,
    /// Leading monomials of `basis`, in the same order.
    leading: Vec<ExponentTuple>,
}

impl GroebnerBasis {
    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn basis(&self) -> &[HomPoly] {
        &self.basis
    }

    /// Leading monomials, generating the initial ideal.
    pub fn leading_monomials(&self) -> &[ExponentTuple] {
        &self.leading
    }

    /// View the basis as an ideal (it generates the same one).
    pub fn as_ideal(&self) -> Ideal {
        Ideal {
            num_vars: self.num_vars,
            generators: self.basis.clone(),
        }
    }

    fn to_mpolys(&self) -> Vec<MPoly> {
        self.basis.iter().map(hom_to_mpoly).collect()
    }
}

impl fmt::Display for GroebnerBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.basis.iter().map(|g| g.to_string()).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

fn hom_to_mpoly(q: &HomPoly) -> MPoly {
    MPoly::from_terms(
        q.num_vars(),
        q.coeffs()
            .iter()
            .map(|(e, c)| (e.clone(), c.clone()))
            .collect(),
    )
}

fn mpoly_to_hom(p: &MPoly) -> HomPoly {
    let map = p
        .terms
        .iter()
        .map(|(e, c)| (e.clone(), c.clone()))
        .collect();
    HomPoly::new(p.num_vars, map).expect("homogeneous nonzero basis element")
}

fn pair_key(basis: &[MPoly], i: usize, j: usize) -> (u64, Exps, usize, usize) {
    let lcm = exp_lcm(
        basis[i].leading_exps().expect("nonzero"),
        basis[j].leading_exps().expect("nonzero"),
    );
    (total_degree(&lcm), lcm, i, j)
}

/// Buchberger with the normal selection strategy (smallest lcm degree first)
/// and both classical criteria, followed by minimization and tail reduction.
/// Output is sorted by leading monomial, so it is canonical for the ideal.
fn buchberger(gens: Vec<MPoly>, limits: &Limits) -> Result<Vec<MPoly>> {
    let mut basis: Vec<MPoly> = gens
        .into_iter()
        .filter(|g| !g.is_zero())
        .map(MPoly::monic)
        .collect();

    let mut queue: BTreeSet<(u64, Exps, usize, usize)> = BTreeSet::new();
    let mut pending: BTreeSet<(usize, usize)> = BTreeSet::new();
    for i in 0..basis.len() {
        for j in (i + 1)..basis.len() {
            queue.insert(pair_key(&basis, i, j));
            pending.insert((i, j));
        }
    }

    let mut processed = 0usize;
    while let Some(entry) = queue.pop_first() {
        let (_, lcm, i, j) = entry;
        pending.remove(&(i, j));
        processed += 1;
        if processed > limits.max_pairs {
            return Err(Error::ResourceLimit(format!(
                "S-pair budget of {} exhausted",
                limits.max_pairs
            )));
        }

        let lm_i = basis[i].leading_exps().expect("nonzero");
        let lm_j = basis[j].leading_exps().expect("nonzero");
        // Product criterion: coprime leading monomials reduce to zero.
        if lcm
            .iter()
            .zip(lm_i.iter().zip(lm_j))
            .all(|(l, (a, b))| *l == a + b)
        {
            continue;
        }
        // Chain criterion: some other basis element divides the lcm and both
        // connecting pairs are already handled.
        let chain = (0..basis.len()).any(|k| {
            k != i
                && k != j
                && exp_divides(basis[k].leading_exps().expect("nonzero"), &lcm)
                && !pending.contains(&(i.min(k), i.max(k)))
                && !pending.contains(&(j.min(k), j.max(k)))
        });
        if chain {
            continue;
        }

        let s = s_poly(&basis[i], &basis[j]);
        let r = normal_form(&s, &basis);
        if r.is_zero() {
            continue;
        }
        if r.max_degree() > limits.max_degree as u64 {
            return Err(Error::ResourceLimit(format!(
                "degree cap {} exceeded during basis completion",
                limits.max_degree
            )));
        }
        let r = r.monic();
        let t = basis.len();
        basis.push(r);
        for k in 0..t {
            queue.insert(pair_key(&basis, k, t));
            pending.insert((k, t));
        }
    }

    // Minimize: drop elements whose leading monomial is divisible by the
    // leading monomial of another kept element.
    let mut keep: Vec<bool> = vec![true; basis.len()];
    for i in 0..basis.len() {
        if !keep[i] {
            continue;
        }
        let lm_i = basis[i].leading_exps().expect("nonzero").clone();
        for j in 0..basis.len() {
            if i == j || !keep[j] {
                continue;
            }
            let lm_j = basis[j].leading_exps().expect("nonzero");
            if exp_divides(lm_j, &lm_i) && (lm_j != &lm_i || j < i) {
                keep[i] = false;
                break;
            }
        }
    }
    let minimal: Vec<MPoly> = basis
        .into_iter()
        .zip(&keep)
        .filter_map(|(g, &k)| k.then_some(g))
        .collect();

    // Tail-reduce each element against the others.
    let mut reduced: Vec<MPoly> = Vec::with_capacity(minimal.len());
    for i in 0..minimal.len() {
        let others: Vec<MPoly> = minimal
            .iter()
            .enumerate()
            .filter(|&(j, _g)| j != i)
            .map(|(_j, g)| g.clone())
            .collect();
        reduced.push(normal_form(&minimal[i], &others).monic());
    }
    reduced.sort_by(|a, b| {
        grevlex_cmp(
            a.leading_exps().expect("nonzero"),
            b.leading_exps().expect("nonzero"),
        )
    });
    Ok(reduced)
}

/// Reduced Gröbner basis of a homogeneous ideal.
pub fn groebner(ideal: &Ideal, limits: &Limits) -> Result<GroebnerBasis> {
    let gens = ideal.generators.iter().map(hom_to_mpoly).collect();
    let reduced = buchberger(gens, limits)?;
    let basis: Vec<HomPoly> = reduced.iter().map(mpoly_to_hom).collect();
    let leading = reduced
        .iter()
        .map(|g| g.leading_exps().expect("nonzero").clone())
        .collect();
    Ok(GroebnerBasis {
        num_vars: ideal.num_vars,
        basis,
        leading,
    })
}

/// Ideal membership: true iff the normal form of `f` modulo the basis is
/// zero.
pub fn member(f: &HomPoly, gb: &GroebnerBasis) -> Result<bool> {
    if f.num_vars() != gb.num_vars {
        return Err(Error::DimensionMismatch {
            expected: gb.num_vars,
            found: f.num_vars(),
        });
    }
    Ok(normal_form(&hom_to_mpoly(f), &gb.to_mpolys()).is_zero())
}

/// Radical membership via the Rabinowitsch trick: `f` vanishes on the zero
/// set of `I` iff `1` lies in `I + (1 - y*f)` in one more variable.
pub fn radical_member(f: &HomPoly, ideal: &Ideal, limits: &Limits) -> Result<bool> {
    if f.num_vars() != ideal.num_vars {
        return Err(Error::DimensionMismatch {
            expected: ideal.num_vars,
            found: f.num_vars(),
        });
    }
    let nv = ideal.num_vars + 1;
    let extend = |q: &HomPoly| -> MPoly {
        MPoly::from_terms(
            nv,
            q.coeffs()
                .iter()
                .map(|(e, c)| {
                    let mut e2 = e.clone();
                    e2.push(0);
                    (e2, c.clone())
                })
                .collect(),
        )
    };
    let mut gens: Vec<MPoly> = ideal.generators.iter().map(&extend).collect();
    // 1 - y*f.
    let mut rab_terms: Vec<(Exps, Rational)> = vec![(vec![0; nv], Rational::one())];
    for (e, c) in f.coeffs() {
        let mut e2 = e.clone();
        e2.push(1);
        rab_terms.push((e2, -c.clone()));
    }
    gens.push(MPoly::from_terms(nv, rab_terms));
    let basis = buchberger(gens, limits)?;
    Ok(basis.iter().any(|g| {
        g.leading_exps()
            .map(|e| total_degree(e) == 0)
            .unwrap_or(false)
    }))
}

/// Dimension of a projective scheme; `-1` encodes the empty scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct ProjDim(pub i32);

impl ProjDim {
    pub const EMPTY: ProjDim = ProjDim(-1);

    pub fn is_empty(&self) -> bool {
        self.0 < 0
    }
}

impl fmt::Display for ProjDim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Codimension of an intersection inside a variety; empty intersections have
/// infinite codimension and dominate every finite bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Codim {
    Finite(u32),
    Infinite,
}

impl Codim {
    /// Whether the codimension meets a (possibly nonpositive) lower bound.
    pub fn at_least(&self, bound: i64) -> bool {
        match self {
            Codim::Infinite => true,
            Codim::Finite(c) => *c as i64 >= bound,
        }
    }

    pub fn as_finite(&self) -> Option<u32> {
        match self {
            Codim::Finite(c) => Some(*c),
            Codim::Infinite => None,
        }
    }
}

impl PartialOrd for Codim {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Codim {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        match (self, other) {
            (Codim::Infinite, Codim::Infinite) => std::cmp::Ordering::Equal,
            (Codim::Infinite, Codim::Finite(_)) => std::cmp::Ordering::Greater,
            (Codim::Finite(_), Codim::Infinite) => std::cmp::Ordering::Less,
            (Codim::Finite(a), Codim::Finite(b)) => a.cmp(b),
        }
    }
}

impl fmt::Display for Codim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Codim::Finite(c) => write!(f, "{c}"),
            Codim::Infinite => write!(f, "inf"),
        }
    }
}

/// Dimension of the affine cone read from the initial ideal: the largest
/// number of variables spanning a coordinate subspace that meets the
/// monomial ideal only in zero. `None` when the initial ideal contains a
/// constant (no subspace qualifies, not even the origin).
fn cone_dimension(leading: &[Exps], num_vars: usize) -> Option<u32> {
    let supports: Vec<u64> = leading
        .iter()
        .map(|e| {
            e.iter()
                .enumerate()
                .filter(|(_, &x)| x > 0)
                .fold(0u64, |m, (i, _)| m | (1 << i))
        })
        .collect();
    if supports.contains(&0) {
        return None;
    }
    let mut best: Option<u32> = None;
    for mask in 0u64..(1 << num_vars) {
        // Independent iff no leading monomial is supported inside the mask.
        if supports.iter().all(|&s| s & !mask != 0) {
            let size = mask.count_ones();
            best = Some(best.map_or(size, |b| b.max(size)));
        }
    }
    best
}

fn proj_dim_from_leading(leading: &[Exps], num_vars: usize) -> ProjDim {
    match cone_dimension(leading, num_vars) {
        None => ProjDim::EMPTY,
        Some(d) => ProjDim(d as i32 - 1),
    }
}

/// Dimension of the projective scheme cut out by a reduced basis.
pub fn proj_dim_of_basis(gb: &GroebnerBasis) -> ProjDim {
    proj_dim_from_leading(&gb.leading, gb.num_vars)
}

/// Dimension of the projective scheme of a homogeneous ideal: Krull
/// dimension of the affine cone minus one, with `-1` for the empty scheme.
pub fn proj_dim(ideal: &Ideal, limits: &Limits) -> Result<ProjDim> {
    let gb = groebner(ideal, limits)?;
    Ok(proj_dim_of_basis(&gb))
}

/// Codimension of `V ∩ {extra = 0}` inside `V`, with `codim ∅ = ∞`.
pub fn codim_in(variety: &Ideal, extra: &[HomPoly], limits: &Limits) -> Result<Codim> {
    for q in extra {
        if q.num_vars() != variety.num_vars {
            return Err(Error::DimensionMismatch {
                expected: variety.num_vars,
                found: q.num_vars(),
            });
        }
    }
    let dim_v = proj_dim(variety, limits)?;
    if dim_v.is_empty() {
        return Err(Error::EmptyScheme);
    }
    let dim_w = proj_dim(&variety.with_extra(extra)?, limits)?;
    if dim_w.is_empty() {
        return Ok(Codim::Infinite);
    }
    debug_assert!(dim_w.0 <= dim_v.0);
    Ok(Codim::Finite((dim_v.0 - dim_w.0) as u32))
}

fn monomials_of_degree(degree: u32, num_vars: usize) -> Vec<Exps> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; num_vars];
    fn rec(d: u32, i: usize, cur: &mut Vec<u32>, out: &mut Vec<Exps>) {
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
    rec(degree, 0, &mut cur, &mut out);
    out
}

/// Hilbert function `H_V(N)`: the number of degree-N standard monomials
/// (monomials outside the initial ideal of `V`).
pub fn hilbert_function(variety: &Ideal, n: u32, limits: &Limits) -> Result<u64> {
    if n == 0 {
        return Err(Error::InvalidInput("Hilbert function needs N >= 1".into()));
    }
    if n > limits.max_degree {
        return Err(Error::ResourceLimit(format!(
            "Hilbert evaluation at N = {n} exceeds degree cap {}",
            limits.max_degree
        )));
    }
    let gb = groebner(variety, limits)?;
    let count = monomials_of_degree(n, variety.num_vars)
        .into_iter()
        .filter(|m| !gb.leading.iter().any(|lm| exp_divides(lm, m)))
        .count();
    Ok(count as u64)
}

/// Degree of a nonempty projective variety, extracted exactly: evaluate the
/// Hilbert function at `n + 1` consecutive points past the regularity bound
/// `(sum of generator degrees) + 1` and take the n-th finite difference.
pub fn degree_of_variety(variety: &Ideal, limits: &Limits) -> Result<u64> {
    let n = proj_dim(variety, limits)?;
    if n.is_empty() {
        return Err(Error::EmptyScheme);
    }
    let n = n.0 as u32;
    let reg: u32 = variety.generators.iter().map(HomPoly::degree).sum::<u32>() + 1;
    let mut values: Vec<i128> = Vec::with_capacity(n as usize + 1);
    for k in 0..=n {
        values.push(hilbert_function(variety, reg + k, limits)? as i128);
    }
    for _ in 0..n {
        values = values.windows(2).map(|w| w[1] - w[0]).collect();
    }
    let delta = values[0];
    if delta <= 0 {
        return Err(Error::Internal(format!(
            "finite-difference degree extraction produced {delta}"
        )));
    }
    Ok(delta as u64)
}
