//! The weighted Chebyshev-type filtration inequalities and the prefix
//! machinery they are applied to.
//!
//! For nonnegative weight vectors b, c and a nonincreasing nonnegative
//! vector `log Δ`, writing `B_j`, `C_j` for prefix sums,
//!
//! ```text
//! sum b_i log Δ_i  >=  ( min_{i0<=j<=n} B_j / C_j ) * sum c_i log Δ_i
//! ( max_{1<=j<=n} C_j / B_j ) * sum b_i log Δ_i  >=  sum c_i log Δ_i
//! ```
//!
//! where `i0` is the first index with `c_{i0} != 0` (lower bound) and
//! `b_1 != 0` (upper bound). Both follow from Abel summation: prefix sums of
//! the larger-weighted side dominate term by term once the bound factors in.
//! Sortedness of `log Δ` is essential; the inequalities can fail without it,
//! so the instance constructor enforces it.
//!
//! The upper inequality is what the verifier instantiates per place: `log Δ`
//! becomes the sorted truncated Weil values scaled by inverse degrees, b the
//! codimension increments of the prefix intersections, and c the weights in
//! Weil-sorted order.

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::places::Rational;

/// Inputs to the two prefix inequalities. `log_deltas` must be nonincreasing
/// and nonnegative; `b` and `c` are nonnegative weight vectors of the same
/// length.
#[derive(Debug, Clone, PartialEq)]
pub struct FiltrationInstance {
    log_deltas: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
}

impl FiltrationInstance {
    pub fn new(log_deltas: Vec<f64>, b: Vec<f64>, c: Vec<f64>) -> Result<FiltrationInstance> {
        let n = log_deltas.len();
        if n == 0 {
            return Err(Error::InvalidInput("empty filtration instance".into()));
        }
        if b.len() != n || c.len() != n {
            return Err(Error::InvalidInput(format!(
                "length mismatch: {} log-deltas, {} b, {} c",
                n,
                b.len(),
                c.len()
            )));
        }
        if log_deltas.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::InvalidInput(
                "log-deltas must be finite and nonnegative".into(),
            ));
        }
        if log_deltas.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidInput(
                "log-deltas must be nonincreasing".into(),
            ));
        }
        if b.iter().chain(&c).any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::InvalidInput(
                "b and c must be finite and nonnegative".into(),
            ));
        }
        Ok(FiltrationInstance { log_deltas, b, c })
    }

    pub fn len(&self) -> usize {
        self.log_deltas.len()
    }

    pub fn is_empty(&self) -> bool {
        false // the constructor rejects empty instances
    }

    pub fn log_deltas(&self) -> &[f64] {
        &self.log_deltas
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    /// `sum_i b_i log Δ_i`, the left side of the lower contract.
    pub fn b_weighted_sum(&self) -> f64 {
        self.b
            .iter()
            .zip(&self.log_deltas)
            .map(|(b, d)| b * d)
            .sum()
    }

    /// `sum_i c_i log Δ_i`, the right side of both contracts.
    pub fn c_weighted_sum(&self) -> f64 {
        self.c
            .iter()
            .zip(&self.log_deltas)
            .map(|(c, d)| c * d)
            .sum()
    }
}

/// A bound or factor together with the prefix length realizing it
/// (1-based; smallest on ties).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChebyshevBound {
    pub value: f64,
    pub j_star: usize,
}

/// The lower prefix bound `min_{i0<=j<=n} B_j / C_j`, guaranteeing
/// `sum b_i log Δ_i >= value * sum c_i log Δ_i`.
pub fn chebyshev_lower(inst: &FiltrationInstance) -> Result<ChebyshevBound> {
    let i0 = inst
        .c
        .iter()
        .position(|c| *c != 0.0)
        .ok_or(Error::AllCZero)?;
    let mut bsum = 0.0;
    let mut csum = 0.0;
    let mut best: Option<ChebyshevBound> = None;
    for j in 0..inst.len() {
        bsum += inst.b[j];
        csum += inst.c[j];
        if j < i0 {
            continue;
        }
        let value = bsum / csum;
        if best.is_none_or(|b| value < b.value) {
            best = Some(ChebyshevBound {
                value,
                j_star: j + 1,
            });
        }
    }
    Ok(best.expect("at least one admissible prefix"))
}

/// The upper prefix factor `max_{1<=j<=n} C_j / B_j`, guaranteeing
/// `value * sum b_i log Δ_i >= sum c_i log Δ_i`. Needs `b_1 != 0`.
pub fn chebyshev_upper(inst: &FiltrationInstance) -> Result<ChebyshevBound> {
    if inst.b[0] == 0.0 {
        return Err(Error::B1Zero);
    }
    let mut bsum = 0.0;
    let mut csum = 0.0;
    let mut best: Option<ChebyshevBound> = None;
    for j in 0..inst.len() {
        bsum += inst.b[j];
        csum += inst.c[j];
        let value = csum / bsum;
        if best.is_none_or(|b| value > b.value) {
            best = Some(ChebyshevBound {
                value,
                j_star: j + 1,
            });
        }
    }
    Ok(best.expect("nonempty instance"))
}

/// The per-place ordering and truncation data extracted from a sorted
/// hypersurface family: the sorting permutation, the last prefix length l
/// with nonempty intersection, and the capped prefix codimensions with
/// their increments.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrefixProfile {
    /// Sorting permutation: `order[j]` is the 0-based original index of the
    /// hypersurface in sorted slot j.
    pub order: Vec<usize>,
    /// Largest prefix length with nonempty intersection (0 if even the
    /// first hypersurface misses the variety).
    pub l: usize,
    /// Capped codimensions `b_j = min(codim of prefix j, dim V)` for
    /// `j = 1..=l`; nondecreasing.
    pub b: Vec<u32>,
    /// Increments `b_j - b_{j-1}` with `b_0 = 0`; entries are >= 0.
    pub b_steps: Vec<u32>,
}

impl PrefixProfile {
    pub fn new(order: Vec<usize>, l: usize, b: Vec<u32>) -> Result<PrefixProfile> {
        if l > order.len() || b.len() != l {
            return Err(Error::InvalidInput(
                "prefix profile lengths are inconsistent".into(),
            ));
        }
        if b.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidInput(
                "prefix codimensions must be nondecreasing".into(),
            ));
        }
        let mut prev = 0u32;
        let mut b_steps = Vec::with_capacity(l);
        for &bj in &b {
            b_steps.push(bj - prev);
            prev = bj;
        }
        Ok(PrefixProfile {
            order,
            l,
            b,
            b_steps,
        })
    }
}

/// Result of applying the upper filtration inequality to one ordered family.
#[derive(Debug, Clone, PartialEq)]
pub struct FiltrationApplication {
    /// `factor * sum_{s<=l} (b_s - b_{s-1}) * λ_s / d_s`.
    pub lhs: f64,
    /// `sum_{j<=l} c_{σ(j)} * λ_j / d_j`.
    pub rhs: f64,
    /// The exact prefix factor `max_{j<=l} (sum_{j'<=j} c_{σ(j')}) / b_j`.
    pub factor: Rational,
    /// Prefix length realizing the factor (1-based, smallest on ties).
    pub j_star: usize,
}

/// Apply the weighted filtration to sorted Weil values. `sorted_weil` and
/// `inv_degrees` are indexed by sorted slot; `weights` by original index,
/// permuted internally through `profile.order`. Contract: `lhs >= rhs`.
pub fn apply_weighted_filtration(
    profile: &PrefixProfile,
    sorted_weil: &[f64],
    inv_degrees: &[f64],
    weights: &[Rational],
) -> Result<FiltrationApplication> {
    let q = profile.order.len();
    if sorted_weil.len() != q || inv_degrees.len() != q || weights.len() != q {
        return Err(Error::InvalidInput(
            "filtration application lengths are inconsistent".into(),
        ));
    }
    if sorted_weil.iter().any(|x| *x < 0.0) {
        return Err(Error::InvalidInput(
            "sorted Weil values must be nonnegative".into(),
        ));
    }
    if sorted_weil.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::InvalidInput(
            "Weil values must be nonincreasing".into(),
        ));
    }

    // Exact prefix factor over j = 1..=l.
    let mut csum = Rational::zero();
    let mut factor = Rational::zero();
    let mut j_star = 0usize;
    for j in 0..profile.l {
        csum += &weights[profile.order[j]];
        let ratio = &csum / Rational::from_integer((profile.b[j] as i64).into());
        if j == 0 || ratio > factor {
            factor = ratio;
            j_star = j + 1;
        }
    }

    let factor_f64 = rational_to_f64(&factor);
    let mut lhs_sum = 0.0;
    let mut rhs = 0.0;
    for j in 0..profile.l {
        lhs_sum += profile.b_steps[j] as f64 * sorted_weil[j] * inv_degrees[j];
        rhs += rational_to_f64(&weights[profile.order[j]]) * sorted_weil[j] * inv_degrees[j];
    }
    Ok(FiltrationApplication {
        lhs: factor_f64 * lhs_sum,
        rhs,
        factor,
        j_star,
    })
}

/// Convert an exact rational to f64; used whenever an exact constant
/// crosses into floating-point arithmetic. Falls back to an accurate
/// log/exp route when numerator or denominator overflow f64 range.
pub fn rational_to_f64(x: &Rational) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    if let Some(v) = num_traits::ToPrimitive::to_f64(x) {
        if v.is_finite() {
            return v;
        }
    }
    let sign = if x.is_negative() { -1.0 } else { 1.0 };
    sign * crate::places::ln_rational(&x.abs()).exp()
}

/// Independent check of both contracts on one instance: evaluates every sum
/// directly, re-derives the optimizing prefix by exhaustive scan, and
/// verifies the returned bound, factor, and tie-broken `j_star`. Intended
/// for n <= 8.
pub fn brute_force_check(inst: &FiltrationInstance) -> bool {
    let tol = 1e-9;
    let n = inst.len();
    debug_assert!(n <= 8, "oracle is meant for small instances");

    let direct_b: f64 = (0..n).map(|i| inst.b[i] * inst.log_deltas[i]).sum();
    let direct_c: f64 = (0..n).map(|i| inst.c[i] * inst.log_deltas[i]).sum();

    let prefix = |v: &[f64], j: usize| -> f64 { v[..=j].iter().sum() };

    if let Some(i0) = inst.c.iter().position(|c| *c != 0.0) {
        let bound = match chebyshev_lower(inst) {
            Ok(b) => b,
            Err(_) => return false,
        };
        // Scan all admissible prefixes.
        let mut best = f64::INFINITY;
        let mut best_j = 0;
        for j in i0..n {
            let ratio = prefix(&inst.b, j) / prefix(&inst.c, j);
            if ratio < best {
                best = ratio;
                best_j = j + 1;
            }
        }
        if (best - bound.value).abs() > tol || best_j != bound.j_star {
            return false;
        }
        if direct_b + tol < bound.value * direct_c {
            return false;
        }
    }

    if inst.b[0] != 0.0 {
        let factor = match chebyshev_upper(inst) {
            Ok(f) => f,
            Err(_) => return false,
        };
        let mut best = f64::NEG_INFINITY;
        let mut best_j = 0;
        for j in 0..n {
            let ratio = prefix(&inst.c, j) / prefix(&inst.b, j);
            if ratio > best {
                best = ratio;
                best_j = j + 1;
            }
        }
        if (best - factor.value).abs() > tol || best_j != factor.j_star {
            return false;
        }
        if factor.value * direct_b + tol < direct_c {
            return false;
        }
    }

    true
}
