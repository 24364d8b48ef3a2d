//! End-to-end empirical verification of the weighted height inequality for a
//! moving family, plus the per-place filtration trace. This is the engine
//! behind the CLI.
//!
//! For every index α in the configured range the verifier instantiates the
//! family and the point, computes
//!
//! ```text
//! lhs(α)    = sum_{v in S} sum_i (c_i / d_i) * lambda_{D_i(α),v}(x(α))
//! factor(α) = (dim V + 1) * max_W alpha(W)/codim W
//! ```
//!
//! and flags the row as a violation when `lhs/h(x(α))` exceeds
//! `factor + ε` beyond tolerance. The inequality being checked is
//! asymptotic: it is guaranteed only outside a finite exceptional set of
//! indices, so isolated violations at small α are mathematically meaningful
//! output, not noise: the run's exit status surfaces them and the summary
//! lists the offending indices.
//!
//! Degenerate indices (a vanishing instance, a point on one of the
//! hypersurfaces, zero point height) are excluded with a reason instead of
//! aborting the run, mirroring the finitely-many-bad-indices convention.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::Path;

use num_traits::{One, Signed, Zero};
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::filtration::{apply_weighted_filtration, rational_to_f64};
use crate::ideals::{groebner, proj_dim_of_basis, Ideal, Limits};
use crate::moving::{
    instantiate, order_weil, prefix_profile, smallness_report, MovingHypersurface, MovingPoint,
    SeqExpr, SmallnessReport,
};
use crate::places::{height_point, Place, PlaceSet, Rational};
use crate::polynomials::HomPoly;
use crate::position::{
    distributive_constant, weighted_factor, SubschemeWitness, WeightedConfiguration,
};

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

fn default_alpha_range() -> [u64; 2] {
    [5, 60]
}

fn default_tolerance() -> f64 {
    1e-9
}

fn default_smallness_threshold() -> f64 {
    0.2
}

#[derive(Debug, Default, Deserialize)]
struct RawVariety {
    #[serde(default)]
    generators: Vec<String>,
}

#[derive(Debug, Deserialize)]
struct RawHypersurface {
    degree: u32,
    /// Exponent tuple (comma-separated, e.g. `"1,0,0"`) to coefficient
    /// expression in the index variable `a`.
    coeffs: BTreeMap<String, String>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawWeight {
    Num(f64),
    Text(String),
}

#[derive(Debug, Default, Deserialize)]
struct RawCaps {
    max_pairs: Option<usize>,
    max_degree: Option<u32>,
    max_hypersurfaces: Option<usize>,
}

#[derive(Debug, Deserialize)]
struct RawConfig {
    #[serde(default)]
    variety: RawVariety,
    family: Vec<RawHypersurface>,
    point: Vec<String>,
    weights: Vec<RawWeight>,
    places: Vec<String>,
    epsilon: f64,
    #[serde(default = "default_alpha_range")]
    alpha_range: [u64; 2],
    #[serde(default = "default_tolerance")]
    tolerance: f64,
    #[serde(default)]
    caps: RawCaps,
    #[serde(default = "default_smallness_threshold")]
    smallness_threshold: f64,
}

/// A fully parsed and validated verification run description.
#[derive(Debug)]
pub struct VerificationConfig {
    pub variety: Ideal,
    pub family: Vec<MovingHypersurface>,
    pub point: MovingPoint,
    pub weights: Vec<Rational>,
    pub places: PlaceSet,
    pub epsilon: f64,
    pub alpha_range: (u64, u64),
    pub tolerance: f64,
    pub limits: Limits,
    pub smallness_threshold: f64,
}

fn config_err(field: &str, message: impl Into<String>) -> Error {
    Error::Config {
        field: field.to_string(),
        message: message.into(),
    }
}

fn parse_weight(raw: &RawWeight, idx: usize) -> Result<Rational> {
    let field = format!("weights[{idx}]");
    let w = match raw {
        RawWeight::Num(x) => Rational::from_float(*x)
            .ok_or_else(|| config_err(&field, format!("{x} is not a finite number")))?,
        RawWeight::Text(s) => {
            crate::places::parse_rational(s).map_err(|e| config_err(&field, e.to_string()))?
        }
    };
    if w.is_negative() {
        return Err(config_err(&field, "weights must be nonnegative"));
    }
    Ok(w)
}

fn parse_exponent_key(key: &str, num_vars: usize) -> Result<Vec<u32>> {
    let exps: Vec<u32> = key
        .split(',')
        .map(|part| {
            part.trim()
                .parse::<u32>()
                .map_err(|_| Error::Parse(format!("bad exponent tuple `{key}`")))
        })
        .collect::<Result<Vec<u32>>>()?;
    if exps.len() != num_vars {
        return Err(Error::Parse(format!(
            "exponent tuple `{key}` has {} entries, expected {num_vars}",
            exps.len()
        )));
    }
    Ok(exps)
}

impl VerificationConfig {
    pub fn from_json_str(src: &str) -> Result<VerificationConfig> {
        let raw: RawConfig = serde_json::from_str(src)?;
        VerificationConfig::from_raw(raw)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<VerificationConfig> {
        let text = std::fs::read_to_string(path)?;
        VerificationConfig::from_json_str(&text)
    }

    fn from_raw(raw: RawConfig) -> Result<VerificationConfig> {
        let num_vars = raw.point.len();
        if num_vars < 2 {
            return Err(config_err("point", "need at least two coordinates"));
        }
        let point =
            MovingPoint::parse(&raw.point).map_err(|e| config_err("point", e.to_string()))?;

        let variety = Ideal::parse(num_vars, &raw.variety.generators)
            .map_err(|e| config_err("variety.generators", e.to_string()))?;

        if raw.family.is_empty() {
            return Err(config_err("family", "at least one moving hypersurface"));
        }
        let mut family = Vec::with_capacity(raw.family.len());
        for (j, h) in raw.family.iter().enumerate() {
            let field = format!("family[{j}]");
            let mut coeffs = BTreeMap::new();
            for (key, src) in &h.coeffs {
                let exps = parse_exponent_key(key, num_vars)
                    .map_err(|e| config_err(&field, e.to_string()))?;
                let expr = SeqExpr::parse(src).map_err(|e| config_err(&field, e.to_string()))?;
                coeffs.insert(exps, expr);
            }
            family.push(
                MovingHypersurface::new(num_vars, h.degree, coeffs)
                    .map_err(|e| config_err(&field, e.to_string()))?,
            );
        }

        if raw.weights.len() != family.len() {
            return Err(config_err(
                "weights",
                format!(
                    "{} weights for {} hypersurfaces",
                    raw.weights.len(),
                    family.len()
                ),
            ));
        }
        let weights = raw
            .weights
            .iter()
            .enumerate()
            .map(|(i, w)| parse_weight(w, i))
            .collect::<Result<Vec<_>>>()?;
        if weights.iter().all(Rational::is_zero) {
            return Err(config_err(
                "weights",
                "at least one weight must be positive",
            ));
        }

        if raw.places.is_empty() {
            return Err(config_err("places", "the place set S must be nonempty"));
        }
        let places: PlaceSet = raw
            .places
            .iter()
            .map(|s| {
                s.parse::<Place>()
                    .map_err(|e| config_err("places", e.to_string()))
            })
            .collect::<Result<_>>()?;

        if !raw.epsilon.is_finite() || raw.epsilon <= 0.0 {
            return Err(config_err("epsilon", "epsilon must be positive"));
        }
        if raw.alpha_range[0] > raw.alpha_range[1] {
            return Err(config_err("alpha_range", "lower bound exceeds upper bound"));
        }
        if !raw.tolerance.is_finite() || raw.tolerance < 0.0 {
            return Err(config_err("tolerance", "tolerance must be nonnegative"));
        }

        let defaults = Limits::default();
        let limits = Limits {
            max_pairs: raw.caps.max_pairs.unwrap_or(defaults.max_pairs),
            max_degree: raw.caps.max_degree.unwrap_or(defaults.max_degree),
            max_hypersurfaces: raw
                .caps
                .max_hypersurfaces
                .unwrap_or(defaults.max_hypersurfaces),
        };

        Ok(VerificationConfig {
            variety,
            family,
            point,
            weights,
            places,
            epsilon: raw.epsilon,
            alpha_range: (raw.alpha_range[0], raw.alpha_range[1]),
            tolerance: raw.tolerance,
            limits,
            smallness_threshold: raw.smallness_threshold,
        })
    }

    /// True when every weight equals 1 (the unweighted comparison case).
    pub fn unit_weights(&self) -> bool {
        self.weights.iter().all(Rational::is_one)
    }
}

// ---------------------------------------------------------------------------
// Rows and report
// ---------------------------------------------------------------------------

/// Row status; `Excluded` carries a human-readable, comma-free reason.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RowStatus {
    Ok,
    Violation,
    Excluded(String),
}

impl fmt::Display for RowStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RowStatus::Ok => write!(f, "OK"),
            RowStatus::Violation => write!(f, "VIOLATION"),
            RowStatus::Excluded(reason) => write!(f, "EXCLUDED({reason})"),
        }
    }
}

/// One verified index.
#[derive(Debug, Clone)]
pub struct VerificationRow {
    pub alpha: u64,
    pub h_point: Option<f64>,
    pub lhs: Option<f64>,
    pub factor: Option<f64>,
    pub normalized: Option<f64>,
    pub margin: Option<f64>,
    pub status: RowStatus,
}

/// Aggregates of a verification run.
#[derive(Debug, Clone)]
pub struct VerificationSummary {
    pub ok: usize,
    pub violations: usize,
    pub excluded: usize,
    pub violating_alphas: Vec<u64>,
    pub max_normalized: Option<f64>,
    pub min_margin: Option<f64>,
    /// Largest `(n+1) * weighted factor` over the range, exact.
    pub factor_max: Option<Rational>,
    pub factor_max_witness: Option<SubschemeWitness>,
    /// `(n+1) * distributive constant`, present for unit-weight runs.
    pub unweighted_bound: Option<Rational>,
    pub smallness: SmallnessReport,
    pub dim: u32,
    pub epsilon: f64,
    /// S omits the archimedean place; the hypotheses usually include it.
    pub archimedean_missing: bool,
    /// Set when every index was excluded: the run's hypotheses fail
    /// systematically (e.g. the point sequence lies on a hypersurface).
    pub hypothesis_failure: Option<String>,
}

#[derive(Debug)]
pub struct VerificationReport {
    pub rows: Vec<VerificationRow>,
    pub summary: VerificationSummary,
}

/// One line of an ε sweep: the same run re-graded at a different ε.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepEntry {
    pub epsilon: f64,
    pub ok: usize,
    pub violations: usize,
    pub excluded: usize,
    pub min_margin: Option<f64>,
    pub violating_alphas: Vec<u64>,
}

impl VerificationReport {
    pub fn has_violation(&self) -> bool {
        self.summary.violations > 0
    }
}

// ---------------------------------------------------------------------------
// Verifier
// ---------------------------------------------------------------------------

/// Driver owning a validated configuration and the variety dimension.
#[derive(Debug)]
pub struct Verifier {
    cfg: VerificationConfig,
    dim: u32,
}

impl Verifier {
    pub fn new(cfg: VerificationConfig) -> Result<Verifier> {
        let gb = groebner(&cfg.variety, &cfg.limits)?;
        let dim = proj_dim_of_basis(&gb);
        if dim.is_empty() {
            return Err(config_err("variety.generators", "the variety is empty"));
        }
        Ok(Verifier {
            dim: dim.0 as u32,
            cfg,
        })
    }

    pub fn config(&self) -> &VerificationConfig {
        &self.cfg
    }

    /// Dimension n of the ambient variety.
    pub fn dim(&self) -> u32 {
        self.dim
    }

    fn instance(&self, alpha: u64) -> Result<(Vec<HomPoly>, crate::places::ProjPoint)> {
        instantiate(&self.cfg.family, &self.cfg.point, alpha)
    }

    /// The weighted local-proximity sum
    /// `sum_{v in S} sum_i (c_i/d_i) * lambda_{D_i(α),v}(x(α))`. Each Weil
    /// value is the log of one exact rational.
    pub fn compute_lhs(&self, alpha: u64) -> Result<f64> {
        let (hyps, x) = self.instance(alpha)?;
        self.lhs_of_instance(&hyps, &x, alpha)
    }

    fn lhs_of_instance(
        &self,
        hyps: &[HomPoly],
        x: &crate::places::ProjPoint,
        alpha: u64,
    ) -> Result<f64> {
        let mut acc = 0.0;
        for v in self.cfg.places.iter() {
            for (q, c) in hyps.iter().zip(&self.cfg.weights) {
                let w = crate::polynomials::weil(q, v, x).map_err(|e| match e {
                    Error::PointOnDivisor => Error::ExcludedAlpha {
                        alpha,
                        reason: "point lies on a hypersurface".into(),
                    },
                    other => other,
                })?;
                acc += rational_to_f64(c) / q.degree() as f64 * w.value;
            }
        }
        Ok(acc)
    }

    /// The sharp constant of the inequality at one index:
    /// `(n+1) * weighted factor`, exact, with its witness subset.
    pub fn compute_factor(&self, alpha: u64) -> Result<(Rational, SubschemeWitness)> {
        let (hyps, _) = self.instance(alpha)?;
        self.factor_of_instance(hyps)
    }

    fn factor_of_instance(&self, hyps: Vec<HomPoly>) -> Result<(Rational, SubschemeWitness)> {
        let cfg = WeightedConfiguration::new(
            self.cfg.variety.clone(),
            hyps,
            self.cfg.weights.clone(),
            &self.cfg.limits,
        )?;
        let (wf, witness) = weighted_factor(&cfg, &self.cfg.limits)?;
        let np1 = Rational::from_integer((self.dim as i64 + 1).into());
        Ok((np1 * wf, witness))
    }

    /// Run the whole range and aggregate. Fails hard only on resource or
    /// internal errors; per-index degeneracies become EXCLUDED rows.
    pub fn verify(&self) -> Result<VerificationReport> {
        let (lo, hi) = self.cfg.alpha_range;
        let mut rows = Vec::with_capacity((hi - lo + 1) as usize);
        let mut ok = 0usize;
        let mut violations = 0usize;
        let mut excluded = 0usize;
        let mut violating_alphas = Vec::new();
        let mut max_normalized: Option<f64> = None;
        let mut min_margin: Option<f64> = None;
        let mut factor_max: Option<(Rational, SubschemeWitness)> = None;
        let mut unweighted_bound: Option<Rational> = None;
        let unit = self.cfg.unit_weights();
        let np1 = Rational::from_integer((self.dim as i64 + 1).into());

        for alpha in lo..=hi {
            let (hyps, x) = match self.instance(alpha) {
                Ok(v) => v,
                Err(Error::DegenerateInstance { what, .. }) => {
                    excluded += 1;
                    rows.push(excluded_row(
                        alpha,
                        format!("degenerate: {}", strip_commas(&what)),
                    ));
                    continue;
                }
                Err(Error::DivisionByZeroAt(a)) => {
                    excluded += 1;
                    rows.push(excluded_row(
                        alpha,
                        format!("division by zero at alpha = {a}"),
                    ));
                    continue;
                }
                Err(e) => return Err(e),
            };

            // A hypersurface degenerating onto the variety or a point on a
            // divisor makes the index unusable, not the run.
            if let Some(i) = on_divisor_index(&hyps, &x)? {
                excluded += 1;
                rows.push(excluded_row(alpha, format!("point lies on D{}", i + 1)));
                continue;
            }
            let position_cfg = match WeightedConfiguration::new(
                self.cfg.variety.clone(),
                hyps.clone(),
                self.cfg.weights.clone(),
                &self.cfg.limits,
            ) {
                Ok(c) => c,
                Err(Error::ContainsVariety { index }) => {
                    excluded += 1;
                    rows.push(excluded_row(
                        alpha,
                        format!("hypersurface D{index} degenerates onto the variety"),
                    ));
                    continue;
                }
                Err(e) => return Err(e),
            };

            let h = height_point(&x);
            if h <= 0.0 {
                excluded += 1;
                rows.push(excluded_row(alpha, "h(x) = 0".into()));
                continue;
            }

            let lhs = self.lhs_of_instance(&hyps, &x, alpha)?;
            let (wf, witness) = weighted_factor(&position_cfg, &self.cfg.limits)?;
            let factor_exact = &np1 * &wf;
            if unit {
                // Exact cross-check of the two constant computations on
                // unit weights; a mismatch is an implementation bug.
                let delta = distributive_constant(&position_cfg, &self.cfg.limits)?;
                let clamped = if wf > Rational::one() {
                    wf.clone()
                } else {
                    Rational::one()
                };
                if clamped != delta {
                    return Err(Error::Internal(format!(
                        "weighted factor {wf} disagrees with distributive constant {delta} at alpha = {alpha}"
                    )));
                }
                let bound = &np1 * &delta;
                if unweighted_bound.as_ref().is_none_or(|b| &bound > b) {
                    unweighted_bound = Some(bound);
                }
            }

            let factor = rational_to_f64(&factor_exact);
            let normalized = lhs / h;
            let margin = factor + self.cfg.epsilon - normalized;
            let status = if margin < -self.cfg.tolerance {
                violations += 1;
                violating_alphas.push(alpha);
                RowStatus::Violation
            } else {
                ok += 1;
                RowStatus::Ok
            };
            max_normalized = Some(max_normalized.map_or(normalized, |m: f64| m.max(normalized)));
            min_margin = Some(min_margin.map_or(margin, |m: f64| m.min(margin)));
            if factor_max.as_ref().is_none_or(|(f, _)| &factor_exact > f) {
                factor_max = Some((factor_exact.clone(), witness));
            }
            rows.push(VerificationRow {
                alpha,
                h_point: Some(h),
                lhs: Some(lhs),
                factor: Some(factor),
                normalized: Some(normalized),
                margin: Some(margin),
                status,
            });
        }

        let smallness = smallness_report(
            &self.cfg.family,
            &self.cfg.point,
            self.cfg.alpha_range,
            self.cfg.smallness_threshold,
        )?;
        let (factor_max, factor_max_witness) = match factor_max {
            Some((f, w)) => (Some(f), Some(w)),
            None => (None, None),
        };
        // Exclusions are expected to be a finite sprinkle; when every row is
        // excluded the run's hypotheses fail outright and the summary says
        // so with the dominant reason.
        let hypothesis_failure = if !rows.is_empty() && excluded == rows.len() {
            let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
            for row in &rows {
                if let RowStatus::Excluded(reason) = &row.status {
                    *counts.entry(reason.as_str()).or_insert(0) += 1;
                }
            }
            counts
                .into_iter()
                .max_by_key(|(_, n)| *n)
                .map(|(reason, _)| reason.to_string())
        } else {
            None
        };
        Ok(VerificationReport {
            rows,
            summary: VerificationSummary {
                ok,
                violations,
                excluded,
                violating_alphas,
                max_normalized,
                min_margin,
                factor_max,
                factor_max_witness,
                unweighted_bound,
                smallness,
                dim: self.dim,
                epsilon: self.cfg.epsilon,
                archimedean_missing: !self.cfg.places.contains_archimedean(),
                hypothesis_failure,
            },
        })
    }

    /// Re-grade the run against a list of ε values: the rows' normalized
    /// values and factors do not depend on ε, so one pass over the range
    /// yields the whole table.
    pub fn sweep(&self, epsilons: &[f64]) -> Result<Vec<SweepEntry>> {
        if epsilons.is_empty() {
            return Err(Error::InvalidInput("empty epsilon list".into()));
        }
        if let Some(bad) = epsilons.iter().find(|e| !e.is_finite() || **e <= 0.0) {
            return Err(Error::InvalidInput(format!(
                "epsilon {bad} must be positive"
            )));
        }
        let report = self.verify()?;
        let mut out = Vec::with_capacity(epsilons.len());
        for &epsilon in epsilons {
            let mut ok = 0usize;
            let mut violations = 0usize;
            let mut excluded = 0usize;
            let mut min_margin: Option<f64> = None;
            let mut violating_alphas = Vec::new();
            for row in &report.rows {
                match (&row.status, row.normalized, row.factor) {
                    (RowStatus::Excluded(_), _, _) => excluded += 1,
                    (_, Some(normalized), Some(factor)) => {
                        let margin = factor + epsilon - normalized;
                        min_margin = Some(min_margin.map_or(margin, |m: f64| m.min(margin)));
                        if margin < -self.cfg.tolerance {
                            violations += 1;
                            violating_alphas.push(row.alpha);
                        } else {
                            ok += 1;
                        }
                    }
                    _ => unreachable!("graded rows carry normalized and factor"),
                }
            }
            out.push(SweepEntry {
                epsilon,
                ok,
                violations,
                excluded,
                min_margin,
                violating_alphas,
            });
        }
        Ok(out)
    }

    /// The full per-place derivation at one index: sorted Weil values,
    /// prefix codimensions, truncation, and both sides of the filtration
    /// inequality, plus the aggregate factor `max_v max_j (prefix c)/b_j`.
    pub fn filtration_trace(&self, alpha: u64) -> Result<AlphaTrace> {
        let (hyps, x) = self.instance(alpha).map_err(|e| match e {
            Error::DegenerateInstance { alpha, what } => Error::ExcludedAlpha {
                alpha,
                reason: what,
            },
            other => other,
        })?;
        let mut traces = Vec::new();
        let mut factor = Rational::zero();
        let mut all_hold = true;
        for v in self.cfg.places.iter() {
            let ordered = order_weil(&hyps, &self.cfg.weights, v, &x).map_err(|e| match e {
                Error::PointOnDivisor => Error::ExcludedAlpha {
                    alpha,
                    reason: format!("point lies on a hypersurface at {v}"),
                },
                other => other,
            })?;
            let sorted_hyps: Vec<HomPoly> =
                ordered.order.iter().map(|&i| hyps[i].clone()).collect();
            let profile = prefix_profile(
                &self.cfg.variety,
                &sorted_hyps,
                ordered.order.clone(),
                &self.cfg.limits,
            )?;
            let app = apply_weighted_filtration(
                &profile,
                &ordered.sorted_weil,
                &ordered.sorted_inv_degrees,
                &self.cfg.weights,
            )?;
            let holds = app.lhs >= app.rhs - self.cfg.tolerance;
            all_hold &= holds;
            if app.factor > factor {
                factor = app.factor.clone();
            }
            traces.push(PlaceTrace {
                place: *v,
                order: ordered.order,
                sorted_weil: ordered.sorted_weil,
                clamp_total: ordered.clamp_total,
                l: profile.l,
                b: profile.b,
                b_steps: profile.b_steps,
                factor: app.factor,
                j_star: app.j_star,
                lhs: app.lhs,
                rhs: app.rhs,
                holds,
            });
        }
        Ok(AlphaTrace {
            alpha,
            places: traces,
            factor,
            all_hold,
        })
    }
}

fn on_divisor_index(hyps: &[HomPoly], x: &crate::places::ProjPoint) -> Result<Option<usize>> {
    for (i, q) in hyps.iter().enumerate() {
        if q.evaluate(x)?.is_zero() {
            return Ok(Some(i));
        }
    }
    Ok(None)
}

fn excluded_row(alpha: u64, reason: String) -> VerificationRow {
    VerificationRow {
        alpha,
        h_point: None,
        lhs: None,
        factor: None,
        normalized: None,
        margin: None,
        status: RowStatus::Excluded(reason),
    }
}

fn strip_commas(s: &str) -> String {
    s.replace(',', ";")
}

/// Per-place filtration derivation at one index.
#[derive(Debug, Clone)]
pub struct PlaceTrace {
    pub place: Place,
    /// Sorting permutation, 0-based original indices by sorted slot.
    pub order: Vec<usize>,
    pub sorted_weil: Vec<f64>,
    pub clamp_total: f64,
    pub l: usize,
    pub b: Vec<u32>,
    pub b_steps: Vec<u32>,
    /// Exact per-place prefix factor.
    pub factor: Rational,
    pub j_star: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Trace bundle for one index over all places of S.
#[derive(Debug, Clone)]
pub struct AlphaTrace {
    pub alpha: u64,
    pub places: Vec<PlaceTrace>,
    /// `max_v` of the per-place factors, exact.
    pub factor: Rational,
    pub all_hold: bool,
}

// ---------------------------------------------------------------------------
// Output
// ---------------------------------------------------------------------------

/// Format with 12 significant digits, plain decimal notation.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let mag = x.abs().log10().floor() as i32;
    let decimals = (11 - mag).clamp(0, 320) as usize;
    format!("{x:.decimals$}")
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_sig).unwrap_or_default()
}

/// Write the row table and the commented summary block as CSV.
pub fn write_csv<W: Write>(report: &VerificationReport, mut out: W) -> std::io::Result<()> {
    writeln!(out, "alpha,h_x,lhs,factor,normalized,margin,status")?;
    for row in &report.rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            row.alpha,
            opt(row.h_point),
            opt(row.lhs),
            opt(row.factor),
            opt(row.normalized),
            opt(row.margin),
            row.status
        )?;
    }
    let s = &report.summary;
    writeln!(
        out,
        "# ok={} violations={} excluded={}",
        s.ok, s.violations, s.excluded
    )?;
    if !s.violating_alphas.is_empty() {
        let list: Vec<String> = s.violating_alphas.iter().map(u64::to_string).collect();
        writeln!(out, "# violating_alphas={}", list.join(" "))?;
    }
    if let Some(m) = s.max_normalized {
        writeln!(out, "# max_normalized={}", fmt_sig(m))?;
    }
    if let Some(m) = s.min_margin {
        writeln!(out, "# min_margin={}", fmt_sig(m))?;
    }
    writeln!(out, "# dim={} epsilon={}", s.dim, fmt_sig(s.epsilon))?;
    if let Some(f) = &s.factor_max {
        writeln!(out, "# factor_max={f}")?;
        if let Some(w) = &s.factor_max_witness {
            let subset: Vec<String> = w.subset.iter().map(usize::to_string).collect();
            writeln!(
                out,
                "# factor_witness=subset {{{}}} codim {} alpha_value {}",
                subset.join(" "),
                w.codim,
                w.alpha_value
            )?;
        }
    }
    if let Some(b) = &s.unweighted_bound {
        writeln!(out, "# unweighted_bound={b}")?;
    }
    writeln!(
        out,
        "# smallness: final_ratio={} trend_slope={} threshold={}{}",
        fmt_sig(s.smallness.final_ratio),
        fmt_sig(s.smallness.trend_slope),
        fmt_sig(s.smallness.threshold),
        if s.smallness.warn { " WARN" } else { "" }
    )?;
    if s.archimedean_missing {
        writeln!(out, "# warning: S omits the archimedean place")?;
    }
    if let Some(reason) = &s.hypothesis_failure {
        writeln!(out, "# hypothesis failure: {reason}")?;
    }
    Ok(())
}

/// Write an ε sweep as a small CSV table.
pub fn write_sweep_csv<W: Write>(entries: &[SweepEntry], mut out: W) -> std::io::Result<()> {
    writeln!(
        out,
        "epsilon,ok,violations,excluded,min_margin,violating_alphas"
    )?;
    for e in entries {
        let alphas: Vec<String> = e.violating_alphas.iter().map(u64::to_string).collect();
        writeln!(
            out,
            "{},{},{},{},{},{}",
            fmt_sig(e.epsilon),
            e.ok,
            e.violations,
            e.excluded,
            e.min_margin.map(fmt_sig).unwrap_or_default(),
            alphas.join(" ")
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::places::rat;

    /// Three coordinate lines plus a moving line in P^2 against the point
    /// (1 : 2^a : 3^a); the standard exercise fixture.
    pub(crate) fn lines_config(weights: &[&str], epsilon: f64, range: (u64, u64)) -> String {
        let ws: Vec<String> = weights.iter().map(|w| format!("\"{w}\"")).collect();
        format!(
            r#"{{
  "variety": {{ "generators": [] }},
  "family": [
    {{ "degree": 1, "coeffs": {{ "1,0,0": "1" }} }},
    {{ "degree": 1, "coeffs": {{ "0,1,0": "1" }} }},
    {{ "degree": 1, "coeffs": {{ "0,0,1": "1" }} }},
    {{ "degree": 1, "coeffs": {{ "1,0,0": "1", "0,1,0": "a", "0,0,1": "1" }} }}
  ],
  "point": ["1", "2^a", "3^a"],
  "weights": [{}],
  "places": ["inf", "p:2", "p:3"],
  "epsilon": {epsilon},
  "alpha_range": [{}, {}]
}}"#,
            ws.join(", "),
            range.0,
            range.1
        )
    }

    #[test]
    fn config_parses_and_validates() {
        let cfg =
            VerificationConfig::from_json_str(&lines_config(&["1", "1", "1", "1"], 0.5, (5, 10)))
                .unwrap();
        assert_eq!(cfg.family.len(), 4);
        assert_eq!(cfg.point.len(), 3);
        assert!(cfg.unit_weights());
        assert!(cfg.places.contains_archimedean());
        assert_eq!(cfg.tolerance, 1e-9);
        assert_eq!(cfg.limits, Limits::default());

        // alpha_range falls back to [5, 60] when omitted.
        let src = r#"{
  "family": [ { "degree": 1, "coeffs": { "1,0": "1" } } ],
  "point": ["1", "2^a"],
  "weights": [1],
  "places": ["inf"],
  "epsilon": 0.5
}"#;
        let cfg = VerificationConfig::from_json_str(src).unwrap();
        assert_eq!(cfg.alpha_range, (5, 60));
    }

    #[test]
    fn config_rejects_bad_fields() {
        let bad_eps = lines_config(&["1", "1", "1", "1"], 0.0, (5, 10));
        assert!(matches!(
            VerificationConfig::from_json_str(&bad_eps),
            Err(Error::Config { field, .. }) if field == "epsilon"
        ));
        let bad_weights = lines_config(&["1", "1"], 0.5, (5, 10));
        assert!(matches!(
            VerificationConfig::from_json_str(&bad_weights),
            Err(Error::Config { field, .. }) if field == "weights"
        ));
        let bad_range = lines_config(&["1", "1", "1", "1"], 0.5, (10, 5));
        assert!(matches!(
            VerificationConfig::from_json_str(&bad_range),
            Err(Error::Config { field, .. }) if field == "alpha_range"
        ));
        let negative = lines_config(&["-1", "1", "1", "1"], 0.5, (5, 10));
        assert!(VerificationConfig::from_json_str(&negative).is_err());
    }

    #[test]
    fn lhs_single_line_archimedean() {
        // One line x0, point (1 : 2^a), S = {inf}: lhs = a log 2.
        let src = r#"{
  "family": [ { "degree": 1, "coeffs": { "1,0": "1" } } ],
  "point": ["1", "2^a"],
  "weights": [1],
  "places": ["inf"],
  "epsilon": 0.5,
  "alpha_range": [3, 9]
}"#;
        let v = Verifier::new(VerificationConfig::from_json_str(src).unwrap()).unwrap();
        for alpha in [3u64, 6, 9] {
            let lhs = v.compute_lhs(alpha).unwrap();
            assert!((lhs - alpha as f64 * 2f64.ln()).abs() < 1e-10);
        }
        // Adding p:2 contributes nothing for coprime integer coordinates.
        let src2 = src.replace("[\"inf\"]", "[\"inf\", \"p:2\"]");
        let v2 = Verifier::new(VerificationConfig::from_json_str(&src2).unwrap()).unwrap();
        for alpha in [3u64, 6, 9] {
            assert!((v2.compute_lhs(alpha).unwrap() - alpha as f64 * 2f64.ln()).abs() < 1e-10);
        }
    }

    #[test]
    fn factor_of_lines_fixture() {
        let v = Verifier::new(
            VerificationConfig::from_json_str(&lines_config(&["1", "1", "1", "1"], 0.5, (5, 8)))
                .unwrap(),
        )
        .unwrap();
        let (factor, _) = v.compute_factor(5).unwrap();
        assert_eq!(factor, rat(3, 1)); // (n+1) * 1 with n = 2

        let w = Verifier::new(
            VerificationConfig::from_json_str(&lines_config(&["3", "1", "1", "1"], 0.5, (5, 8)))
                .unwrap(),
        )
        .unwrap();
        let (factor, witness) = w.compute_factor(5).unwrap();
        assert_eq!(factor, rat(9, 1)); // 3 * 3
        assert_eq!(witness.subset, vec![1]);
    }

    #[test]
    fn verify_report_structure() {
        let v = Verifier::new(
            VerificationConfig::from_json_str(&lines_config(&["1", "1", "1", "1"], 0.75, (5, 12)))
                .unwrap(),
        )
        .unwrap();
        let report = v.verify().unwrap();
        assert_eq!(report.rows.len(), 8);
        assert_eq!(
            report.summary.ok + report.summary.violations + report.summary.excluded,
            8
        );
        assert_eq!(report.summary.excluded, 0);
        assert_eq!(report.summary.unweighted_bound, Some(rat(3, 1)));
        assert!(!report.summary.archimedean_missing);
        assert!(!report.summary.smallness.warn);
        // Rows are in alpha order and reproducible.
        let alphas: Vec<u64> = report.rows.iter().map(|r| r.alpha).collect();
        assert_eq!(alphas, (5..=12).collect::<Vec<_>>());
        let again = v.verify().unwrap();
        for (a, b) in report.rows.iter().zip(&again.rows) {
            assert_eq!(a.lhs, b.lhs);
            assert_eq!(a.margin, b.margin);
        }
    }

    #[test]
    fn verify_excludes_point_on_divisor() {
        // The point (2^a : a - 7 : 1) hits the line x1 = 0 exactly at a = 7.
        let src = r#"{
  "family": [ { "degree": 1, "coeffs": { "0,1,0": "1" } } ],
  "point": ["2^a", "a - 7", "1"],
  "weights": [1],
  "places": ["inf"],
  "epsilon": 0.5,
  "alpha_range": [5, 9]
}"#;
        let v = Verifier::new(VerificationConfig::from_json_str(src).unwrap()).unwrap();
        let report = v.verify().unwrap();
        assert_eq!(report.summary.excluded, 1);
        let row7 = report.rows.iter().find(|r| r.alpha == 7).unwrap();
        assert!(matches!(&row7.status, RowStatus::Excluded(r) if r.contains("D1")));
    }

    #[test]
    fn verify_flags_missing_archimedean_place() {
        let src = lines_config(&["1", "1", "1", "1"], 0.5, (5, 6))
            .replace("[\"inf\", \"p:2\", \"p:3\"]", "[\"p:2\", \"p:3\"]");
        let v = Verifier::new(VerificationConfig::from_json_str(&src).unwrap()).unwrap();
        let report = v.verify().unwrap();
        assert!(report.summary.archimedean_missing);
        let mut csv = Vec::new();
        write_csv(&report, &mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.contains("# warning: S omits the archimedean place"));
    }

    #[test]
    fn trace_matches_weighted_factor_on_fixture() {
        for weights in [["1", "1", "1", "1"], ["3", "1", "1", "1"]] {
            let v = Verifier::new(
                VerificationConfig::from_json_str(&lines_config(&weights, 0.5, (5, 9))).unwrap(),
            )
            .unwrap();
            for alpha in 5..=9u64 {
                let trace = v.filtration_trace(alpha).unwrap();
                assert!(trace.all_hold);
                let (factor, _) = v.compute_factor(alpha).unwrap();
                // Aggregate prefix factor times (n+1) equals the weighted
                // factor exactly on this fixture.
                let np1 = rat(v.dim() as i64 + 1, 1);
                assert_eq!(np1 * trace.factor.clone(), factor, "alpha = {alpha}");
            }
        }
    }

    #[test]
    fn trace_shows_zero_step_for_duplicated_hypersurface() {
        let src = r#"{
  "family": [
    { "degree": 1, "coeffs": { "1,0,0": "1" } },
    { "degree": 1, "coeffs": { "1,0,0": "2" } },
    { "degree": 1, "coeffs": { "0,1,0": "1" } }
  ],
  "point": ["1", "2^a", "3^a"],
  "weights": [1, 1, 1],
  "places": ["inf"],
  "epsilon": 0.5,
  "alpha_range": [4, 6]
}"#;
        let v = Verifier::new(VerificationConfig::from_json_str(src).unwrap()).unwrap();
        let trace = v.filtration_trace(5).unwrap();
        let t = &trace.places[0];
        // D1 and D2 cut the same line: some prefix step is zero.
        assert!(t.b_steps.contains(&0), "b = {:?}", t.b);
        assert!(t.holds);
    }

    #[test]
    fn sweep_regrades_one_pass() {
        let v = Verifier::new(
            VerificationConfig::from_json_str(&lines_config(&["1", "1", "1", "1"], 0.5, (5, 60)))
                .unwrap(),
        )
        .unwrap();
        let sweep = v.sweep(&[0.25, 0.5, 0.75]).unwrap();
        assert_eq!(sweep.len(), 3);
        // Tightening epsilon only grows the exceptional set.
        assert!(sweep[0].violations > sweep[1].violations);
        assert_eq!(sweep[1].violations, 1);
        assert_eq!(sweep[1].violating_alphas, vec![7]);
        assert_eq!(sweep[2].violations, 0);
        // Margins shift by exactly the epsilon difference.
        let (m0, m1) = (sweep[0].min_margin.unwrap(), sweep[1].min_margin.unwrap());
        assert!((m1 - m0 - 0.25).abs() < 1e-12);
        assert!(v.sweep(&[]).is_err());
        assert!(v.sweep(&[-0.5]).is_err());
    }

    #[test]
    fn all_excluded_flags_hypothesis_failure() {
        // The point sequence sits on D1 at every index.
        let src = r#"{
  "family": [ { "degree": 1, "coeffs": { "0,1,0": "1" } } ],
  "point": ["2^a", "0", "1"],
  "weights": [1],
  "places": ["inf"],
  "epsilon": 0.5,
  "alpha_range": [3, 8]
}"#;
        let v = Verifier::new(VerificationConfig::from_json_str(src).unwrap()).unwrap();
        let report = v.verify().unwrap();
        assert_eq!(report.summary.excluded, report.rows.len());
        let reason = report.summary.hypothesis_failure.as_deref().unwrap();
        assert!(reason.contains("D1"), "reason: {reason}");
        let mut csv = Vec::new();
        write_csv(&report, &mut csv).unwrap();
        assert!(String::from_utf8(csv)
            .unwrap()
            .contains("# hypothesis failure:"));
    }

    #[test]
    fn csv_format() {
        let v = Verifier::new(
            VerificationConfig::from_json_str(&lines_config(&["1", "1", "1", "1"], 0.75, (5, 7)))
                .unwrap(),
        )
        .unwrap();
        let report = v.verify().unwrap();
        let mut csv = Vec::new();
        write_csv(&report, &mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "alpha,h_x,lhs,factor,normalized,margin,status"
        );
        let first = lines.next().unwrap();
        assert!(first.starts_with("5,"));
        assert!(first.ends_with(",OK"));
        assert_eq!(first.split(',').count(), 7);
        assert!(text.contains("# ok=3 violations=0 excluded=0"));
        assert!(text.contains("# unweighted_bound=3"));
    }

    #[test]
    fn fmt_sig_twelve_digits() {
        assert_eq!(fmt_sig(0.0), "0");
        assert_eq!(fmt_sig(2f64.ln()), "0.693147180560");
        assert_eq!(fmt_sig(3.0), "3.00000000000");
        assert_eq!(fmt_sig(-38.4), "-38.4000000000");
        assert_eq!(fmt_sig(123456789012345.0), "123456789012345");
        // Tiny magnitudes keep their significant digits.
        assert_eq!(fmt_sig(1.5e-9), "0.00000000150000000000");
    }
}
