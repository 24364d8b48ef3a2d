//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line
//! (visible with `cargo test --test acceptance -- --nocapture`).
//!
//! Every tolerance and sample count is pinned here. Randomized criteria use
//! a fixed-seed SplitMix64 generator so runs are reproducible bit for bit.

use std::time::{Duration, Instant};

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};

use heightlab::filtration::{
    brute_force_check, chebyshev_lower, chebyshev_upper, FiltrationInstance,
};
use heightlab::ideals::{degree_of_variety, hilbert_function, Codim, Ideal, Limits};
use heightlab::places::{
    multiplicative_height, product_over_places, rat, Place, ProjPoint, Rational,
};
use heightlab::polynomials::{monomial_count, weil, weil_ratio, HomPoly};
use heightlab::position::{
    distributive_constant, seshadri_hypersurface, weighted_factor, WeightedConfiguration,
};
use heightlab::verifier::{RowStatus, VerificationConfig, Verifier};

const TOL: f64 = 1e-9;

/// Deterministic generator for the randomized criteria.
struct SplitMix64(u64);

impl SplitMix64 {
    fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    fn below(&mut self, n: u64) -> u64 {
        self.next_u64() % n
    }

    fn signed(&mut self, bound: i64) -> i64 {
        (self.below(2 * bound as u64 + 1)) as i64 - bound
    }

    fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }
}

fn run_criterion(label: &str, budget: Duration, body: impl FnOnce() -> Result<String, String>) {
    let start = Instant::now();
    let outcome = body();
    let elapsed = start.elapsed();
    match outcome {
        Ok(detail) => {
            if elapsed > budget {
                println!("acceptance {label}: FAIL (runtime {elapsed:.2?} over budget {budget:?})");
                panic!("{label}: runtime {elapsed:.2?} exceeds budget {budget:?}");
            }
            println!("acceptance {label}: PASS ({detail}; {elapsed:.2?})");
        }
        Err(msg) => {
            println!("acceptance {label}: FAIL ({msg})");
            panic!("{label}: {msg}");
        }
    }
}

fn fixture(name: &str) -> String {
    format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn criterion_1_product_formula() {
    run_criterion("1 product formula", Duration::from_secs(5), || {
        let mut rng = SplitMix64(0x1001);
        let bound: u64 = 1_000_000_000_000_000_000;
        for i in 0..1000 {
            let mut num: i128 = rng.below(bound) as i128 + 1;
            if rng.below(2) == 1 {
                num = -num;
            }
            let den: i128 = rng.below(bound) as i128 + 1;
            let x = Rational::new(BigInt::from(num), BigInt::from(den));
            let product = product_over_places(&x).map_err(|e| format!("sample {i}: {e}"))?;
            if product != Rational::one() {
                return Err(format!("sample {i}: product {product} != 1 for {x}"));
            }
        }
        Ok("1000 rationals with parts up to 1e18, exact".into())
    });
}

#[test]
fn criterion_2_height_scaling_invariance() {
    run_criterion("2 height invariance", Duration::from_secs(5), || {
        let mut rng = SplitMix64(0x2002);
        for i in 0..500 {
            let coords: Vec<Rational> = (0..4)
                .map(|_| rat(rng.signed(1000), rng.below(1000) as i64 + 1))
                .collect();
            let x = match ProjPoint::new(coords) {
                Ok(x) => x,
                Err(_) => continue,
            };
            let mut lam = rat(rng.signed(500), rng.below(500) as i64 + 1);
            if lam.is_zero() {
                lam = rat(7, 3);
            }
            let y = x.scaled(&lam).map_err(|e| e.to_string())?;
            let (hx, hy) = (multiplicative_height(&x), multiplicative_height(&y));
            if hx != hy {
                return Err(format!(
                    "sample {i}: H = {hx} vs {hy} after scaling by {lam}"
                ));
            }
        }
        Ok("500 points of P^3, exact pre-log equality".into())
    });
}

fn monomials_of_degree(d: u32, nv: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; nv];
    fn rec(d: u32, i: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
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

#[test]
fn criterion_3_weil_sign_bounds() {
    run_criterion("3 Weil sign bounds", Duration::from_secs(60), || {
        let mut rng = SplitMix64(0x3003);
        let places = [
            Place::Archimedean,
            Place::Finite(2),
            Place::Finite(3),
            Place::Finite(5),
            Place::Finite(7),
        ];
        let mut checked = 0usize;
        while checked < 1000 {
            let d = rng.below(3) as u32 + 1;
            let tuples = monomials_of_degree(d, 3);
            let coeffs: std::collections::BTreeMap<Vec<u32>, Rational> = tuples
                .iter()
                .map(|t| (t.clone(), rat(rng.signed(9), 1)))
                .collect();
            let q = match HomPoly::new(3, coeffs) {
                Ok(q) => q,
                Err(_) => continue,
            };
            let coords: Vec<Rational> = (0..3).map(|_| rat(rng.signed(9), 1)).collect();
            let x = match ProjPoint::new(coords) {
                Ok(x) => x,
                Err(_) => continue,
            };
            let v = places[rng.below(places.len() as u64) as usize];
            let w = match weil(&q, &v, &x) {
                Ok(w) => w,
                Err(_) => continue, // point on the divisor: resample
            };
            match v {
                Place::Archimedean => {
                    let count = monomial_count(d, 3);
                    let bound = -(to_f64(&count)).ln();
                    if w.value < bound - TOL {
                        return Err(format!(
                            "archimedean value {} below -log #T_d = {bound} for {q}",
                            w.value
                        ));
                    }
                }
                Place::Finite(_) => {
                    if w.value < -TOL {
                        return Err(format!("negative value {} at {v} for {q}", w.value));
                    }
                    // The ultrametric bound is exact at the rational level.
                    let ratio = weil_ratio(&q, &v, &x).map_err(|e| e.to_string())?;
                    if ratio < Rational::one() {
                        return Err(format!("exact ratio {ratio} < 1 at {v} for {q}"));
                    }
                }
            }
            checked += 1;
        }
        Ok("1000 samples, degree <= 3 in P^2, both sign bounds".into())
    });
}

fn to_f64(n: &BigUint) -> f64 {
    num_traits::ToPrimitive::to_f64(n).expect("small count")
}

#[test]
fn criterion_4_filtration_oracle() {
    run_criterion("4 filtration oracle", Duration::from_secs(10), || {
        let mut rng = SplitMix64(0x4004);
        for i in 0..10_000 {
            let n = rng.below(8) as usize + 1;
            let mut ld: Vec<f64> = (0..n).map(|_| rng.unit() * 10.0).collect();
            ld.sort_by(|a, b| b.partial_cmp(a).unwrap());
            let b: Vec<f64> = (0..n).map(|_| rng.unit() * 5.0).collect();
            let c: Vec<f64> = (0..n).map(|_| rng.unit() * 5.0).collect();
            let inst = FiltrationInstance::new(ld, b, c).map_err(|e| e.to_string())?;
            if !brute_force_check(&inst) {
                return Err(format!("instance {i} failed the oracle: {inst:?}"));
            }
            // Independent optimizer scan, re-deriving j_star from prefix
            // sums without going through the oracle.
            let prefix = |v: &[f64], j: usize| -> f64 { v[..=j].iter().sum() };
            if inst.c().iter().any(|x| *x != 0.0) {
                let got = chebyshev_lower(&inst).map_err(|e| e.to_string())?;
                let i0 = inst.c().iter().position(|x| *x != 0.0).unwrap();
                let (mut best, mut best_j) = (f64::INFINITY, 0usize);
                for j in i0..inst.len() {
                    let r = prefix(inst.b(), j) / prefix(inst.c(), j);
                    if r < best {
                        best = r;
                        best_j = j + 1;
                    }
                }
                if best_j != got.j_star {
                    return Err(format!(
                        "instance {i}: lower j* {} vs scan {best_j}",
                        got.j_star
                    ));
                }
            }
            if inst.b()[0] != 0.0 {
                let got = chebyshev_upper(&inst).map_err(|e| e.to_string())?;
                let (mut best, mut best_j) = (f64::NEG_INFINITY, 0usize);
                for j in 0..inst.len() {
                    let r = prefix(inst.c(), j) / prefix(inst.b(), j);
                    if r > best {
                        best = r;
                        best_j = j + 1;
                    }
                }
                if best_j != got.j_star {
                    return Err(format!(
                        "instance {i}: upper j* {} vs scan {best_j}",
                        got.j_star
                    ));
                }
            }
        }
        Ok("10000 instances, n <= 8, both contracts at 1e-9".into())
    });
}

/// Fixture configurations for the constant-equality criterion: hypersurface
/// source lists per ambient variable count, optionally with a nontrivial
/// variety.
fn equality_fixtures() -> Vec<(usize, Vec<&'static str>, Vec<&'static str>)> {
    vec![
        // P^2: coordinate lines, repeats, pencils, conics.
        (3, vec![], vec!["x0", "x1", "x2"]),
        (3, vec![], vec!["x0", "x1"]),
        (3, vec![], vec!["x0", "2*x0"]),
        (3, vec![], vec!["x0", "2*x0", "x1"]),
        (3, vec![], vec!["x0", "x1", "x0 + x1"]),
        (3, vec![], vec!["x0", "x1", "x0 + x1", "x0 - x1"]),
        (3, vec![], vec!["x0", "x1", "x2", "x0 + x1 + x2"]),
        (3, vec![], vec!["x0", "x1", "x2", "x0 + 2*x1 + 3*x2"]),
        (3, vec![], vec!["x0*x2 - x1^2", "x0", "x2"]),
        (3, vec![], vec!["x0*x2 - x1^2", "x1", "x0 + x2"]),
        (3, vec![], vec!["x0^2", "x0", "x1"]),
        (3, vec![], vec!["x0 + x1", "x1 + x2", "x0 + 2*x1 + x2"]),
        // P^3: coordinate planes, repeats, pencils, a quadric.
        (4, vec![], vec!["x0", "x1", "x2", "x3"]),
        (4, vec![], vec!["x0", "x1", "x2"]),
        (4, vec![], vec!["x0", "2*x0", "x1"]),
        (4, vec![], vec!["x0", "x1", "x0 + x1"]),
        (4, vec![], vec!["x0", "x1", "x0 + x1", "x0 - x1"]),
        (4, vec![], vec!["x0", "x1", "x2", "x0 + x1 + x2"]),
        (4, vec![], vec!["x0*x1 - x2*x3", "x0", "x1"]),
        (4, vec![], vec!["x0", "x1", "x2", "x3", "x0 + x1 + x2 + x3"]),
        // Nontrivial varieties.
        (3, vec!["x0*x2 - x1^2"], vec!["x0", "x1", "x2"]),
        (4, vec!["x0*x1 - x2*x3"], vec!["x0", "x1", "x2", "x3"]),
    ]
}

#[test]
fn criterion_5_constant_equality() {
    run_criterion(
        "5 weighted factor vs distributive constant",
        Duration::from_secs(30),
        || {
            let limits = Limits::default();
            let fixtures = equality_fixtures();
            let count = fixtures.len();
            if count < 20 {
                return Err(format!("only {count} fixtures"));
            }
            for (nv, variety, hyps) in fixtures {
                let v = Ideal::parse(nv, &variety).map_err(|e| e.to_string())?;
                let hs: Vec<HomPoly> = hyps
                    .iter()
                    .map(|s| HomPoly::parse(s, nv))
                    .collect::<Result<_, _>>()
                    .map_err(|e| e.to_string())?;
                let weights = vec![rat(1, 1); hs.len()];
                let cfg = WeightedConfiguration::new(v, hs, weights, &limits)
                    .map_err(|e| format!("{hyps:?}: {e}"))?;
                let delta = distributive_constant(&cfg, &limits).map_err(|e| e.to_string())?;
                let (wf, _) = weighted_factor(&cfg, &limits).map_err(|e| e.to_string())?;
                let clamped = if wf > rat(1, 1) { wf } else { rat(1, 1) };
                if clamped != delta {
                    return Err(format!(
                    "max(1, weighted factor) = {clamped} but Delta = {delta} for {hyps:?} in {variety:?}"
                ));
                }
            }
            Ok(format!(
                "{count} unit-weight fixtures, exact rational equality"
            ))
        },
    );
}

fn binomial(n: u64, k: u64) -> u64 {
    let mut acc = 1u64;
    for i in 1..=k {
        acc = acc * (n - k + i) / i;
    }
    acc
}

#[test]
fn criterion_6_hilbert_and_degree() {
    run_criterion(
        "6 Hilbert function and degree",
        Duration::from_secs(30),
        || {
            let limits = Limits::default();
            for n in 1..=3usize {
                let pn = Ideal::zero(n + 1);
                for big_n in 1..=12u32 {
                    let got = hilbert_function(&pn, big_n, &limits).map_err(|e| e.to_string())?;
                    let want = binomial(big_n as u64 + n as u64, n as u64);
                    if got != want {
                        return Err(format!("H_P^{n}({big_n}) = {got}, expected {want}"));
                    }
                }
                let deg = degree_of_variety(&pn, &limits).map_err(|e| e.to_string())?;
                if deg != 1 {
                    return Err(format!("deg P^{n} = {deg}"));
                }
            }
            let conic = Ideal::parse(3, &["x0*x2 - x1^2"]).map_err(|e| e.to_string())?;
            if degree_of_variety(&conic, &limits).map_err(|e| e.to_string())? != 2 {
                return Err("conic degree != 2".into());
            }
            let pair = Ideal::parse(3, &["x0*x1"]).map_err(|e| e.to_string())?;
            if degree_of_variety(&pair, &limits).map_err(|e| e.to_string())? != 2 {
                return Err("line-pair degree != 2".into());
            }
            for d in 1..=4u32 {
                let src = format!("x0^{d} + x1^{d} + x2^{d}");
                let curve = Ideal::parse(3, &[src.as_str()]).map_err(|e| e.to_string())?;
                let got = degree_of_variety(&curve, &limits).map_err(|e| e.to_string())?;
                if got as u32 != d {
                    return Err(format!("smooth degree-{d} curve reported degree {got}"));
                }
            }
            Ok("H_P^n exact for n <= 3, N <= 12; degrees 1/2/2/d as forced".into())
        },
    );
}

fn run_fixture(path: &str) -> Result<heightlab::verifier::VerificationReport, String> {
    let cfg = VerificationConfig::from_path(path).map_err(|e| e.to_string())?;
    let v = Verifier::new(cfg).map_err(|e| e.to_string())?;
    v.verify().map_err(|e| e.to_string())
}

#[test]
fn criterion_7a_desk_check_unit_weights() {
    run_criterion("7a desk check (c = 1)", Duration::from_secs(60), || {
        let report = run_fixture(&fixture("coordinate_lines.json"))?;
        // The bound (n+1) * factor + epsilon must be exactly 3 + 0.5.
        if report.summary.factor_max != Some(rat(3, 1)) {
            return Err(format!(
                "factor_max = {:?}, expected 3",
                report.summary.factor_max
            ));
        }
        if report.summary.excluded != 0 {
            return Err(format!("{} excluded rows", report.summary.excluded));
        }
        let violations: Vec<u64> = report
            .rows
            .iter()
            .filter(|r| r.status == RowStatus::Violation)
            .map(|r| r.alpha)
            .collect();
        if !violations.is_empty() {
            return Err(format!(
                "violation rows at alpha = {violations:?} against bound 3.5 (min margin {}); \
                 the inequality is asymptotic and these indices land in its finite \
                 exceptional set at epsilon = 0.5",
                report.summary.min_margin.unwrap_or(f64::NAN)
            ));
        }
        Ok("56 rows, zero violations against 3.5".into())
    });
}

#[test]
fn criterion_7b_desk_check_weighted() {
    run_criterion(
        "7b desk check (c = (3,1,1,1))",
        Duration::from_secs(60),
        || {
            let report = run_fixture(&fixture("weighted_lines.json"))?;
            if report.summary.factor_max != Some(rat(9, 1)) {
                return Err(format!(
                    "factor_max = {:?}, expected 9",
                    report.summary.factor_max
                ));
            }
            if report.summary.excluded != 0 {
                return Err(format!("{} excluded rows", report.summary.excluded));
            }
            if report.summary.violations != 0 {
                return Err(format!(
                    "{} violations against bound 9.5 at alpha = {:?}",
                    report.summary.violations, report.summary.violating_alphas
                ));
            }
            let max_norm = report.summary.max_normalized.unwrap_or(f64::NAN);
            Ok(format!(
                "56 rows, zero violations against 9.5, max normalized {max_norm:.3}"
            ))
        },
    );
}

#[test]
fn criterion_8_trace_consistency() {
    run_criterion("8 trace consistency", Duration::from_secs(120), || {
        for (path, label) in [
            (fixture("coordinate_lines.json"), "c = 1"),
            (fixture("weighted_lines.json"), "c = (3,1,1,1)"),
        ] {
            let cfg = VerificationConfig::from_path(&path).map_err(|e| e.to_string())?;
            let (lo, hi) = cfg.alpha_range;
            let v = Verifier::new(cfg).map_err(|e| e.to_string())?;
            let np1 = rat(v.dim() as i64 + 1, 1);
            for alpha in lo..=hi {
                let trace = v.filtration_trace(alpha).map_err(|e| e.to_string())?;
                for t in &trace.places {
                    if t.lhs < t.rhs - TOL {
                        return Err(format!(
                            "{label}, alpha {alpha}, {}: lhs {} < rhs {}",
                            t.place, t.lhs, t.rhs
                        ));
                    }
                }
                let (factor, _) = v.compute_factor(alpha).map_err(|e| e.to_string())?;
                if np1.clone() * trace.factor.clone() != factor {
                    return Err(format!(
                        "{label}, alpha {alpha}: aggregate trace factor {} != factor/(n+1) = {}",
                        trace.factor,
                        factor / np1.clone()
                    ));
                }
            }
        }
        Ok("every (alpha, place) of both fixture runs; factors exact".into())
    });
}

#[test]
fn criterion_9_seshadri() {
    run_criterion("9 Seshadri constants", Duration::from_secs(5), || {
        for d in 1..=10u32 {
            let got = seshadri_hypersurface(d).map_err(|e| e.to_string())?;
            if got != rat(1, d as i64) {
                return Err(format!("epsilon for degree {d} is {got}"));
            }
        }
        Ok("1/d for d = 1..=10, exact".into())
    });
}

/// The codimension arithmetic honors the empty-intersection convention on
/// small cases (kept alongside the criteria as a cheap smoke check).
#[test]
fn codim_infinity_convention() {
    let limits = Limits::default();
    let p2 = Ideal::zero(3);
    let all = [
        HomPoly::parse("x0", 3).unwrap(),
        HomPoly::parse("x1", 3).unwrap(),
        HomPoly::parse("x2", 3).unwrap(),
    ];
    assert_eq!(
        heightlab::ideals::codim_in(&p2, &all, &limits).unwrap(),
        Codim::Infinite
    );
}
