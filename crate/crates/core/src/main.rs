//! Command-line interface: exact heights, Weil functions, ideal invariants,
//! position constants, filtration bounds, and the end-to-end verifier.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use heightlab::error::{Error, Result};
use heightlab::filtration::{chebyshev_lower, chebyshev_upper, FiltrationInstance};
use heightlab::ideals::{codim_in, hilbert_function, Ideal, Limits};
use heightlab::places::{
    height_point, height_scalar, multiplicative_height, multiplicative_height_scalar,
    parse_rational, Place, ProjPoint, Rational,
};
use heightlab::polynomials::{
    height_poly, multiplicative_height_poly, weil, weil_min, weil_sum, HomPoly,
};
use heightlab::position::{distributive_constant, weighted_factor, WeightedConfiguration};
use heightlab::verifier::{fmt_sig, write_csv, write_sweep_csv, VerificationConfig, Verifier};

#[derive(Parser)]
#[command(
    name = "heightlab",
    version,
    about = "Exact heights, local Weil functions, position constants, and a weighted height-inequality checker over Q"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Combine {
    /// Weil function of the weighted intersection (minimum).
    Min,
    /// Weil function of the weighted sum.
    Sum,
}

/// Optional JSON payload for the small tools; any field present fills in the
/// matching flag.
#[derive(Debug, Default, Deserialize)]
struct ToolJson {
    #[serde(default)]
    variety: Vec<String>,
    #[serde(default)]
    hyps: Vec<String>,
    #[serde(default)]
    extras: Vec<String>,
    #[serde(default)]
    polys: Vec<String>,
    weights: Option<String>,
    point: Option<String>,
    scalar: Option<String>,
    place: Option<String>,
    n: Option<u32>,
    vars: Option<usize>,
}

impl ToolJson {
    fn load(path: &Option<PathBuf>) -> Result<ToolJson> {
        match path {
            None => Ok(ToolJson::default()),
            Some(p) => Ok(serde_json::from_str(&std::fs::read_to_string(p)?)?),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run a verification config: CSV rows to stdout (or --csv), summary
    /// appended as commented lines. Exits 1 iff a violation row exists.
    Verify {
        config: PathBuf,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Suppress the progress note when writing to a file.
        #[arg(long)]
        quiet: bool,
        /// Sweep mode: re-grade the run at these comma-separated epsilon
        /// values and print the table instead of per-index rows.
        #[arg(long)]
        sweep: Option<String>,
    },
    /// Absolute logarithmic height of a point, scalar, or polynomial.
    Height {
        /// Comma-separated rational coordinates, e.g. "1,2/3,-5".
        #[arg(long)]
        point: Option<String>,
        /// A single rational.
        #[arg(long)]
        scalar: Option<String>,
        /// A homogeneous polynomial (height of its coefficient vector).
        #[arg(long)]
        poly: Option<String>,
        #[arg(long)]
        vars: Option<usize>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Weil function lambda_{Q,v}(x) of one or more hypersurfaces.
    Weil {
        /// Repeatable homogeneous polynomial.
        #[arg(long = "poly")]
        polys: Vec<String>,
        /// Point coordinates, comma-separated rationals.
        #[arg(long)]
        point: Option<String>,
        /// Place: "inf" or "p:<prime>".
        #[arg(long)]
        place: Option<String>,
        /// Comma-separated nonnegative weights (defaults to all 1).
        #[arg(long)]
        weights: Option<String>,
        /// Combine the weighted values into a min or a sum.
        #[arg(long, value_enum)]
        combine: Option<Combine>,
        #[arg(long)]
        vars: Option<usize>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Codimension of V ∩ {extras = 0} inside the variety V.
    Codim {
        /// Repeatable variety generator (none = projective space).
        #[arg(long = "gen")]
        gens: Vec<String>,
        /// Repeatable extra hypersurface.
        #[arg(long = "extra")]
        extras: Vec<String>,
        #[arg(long)]
        vars: Option<usize>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Hilbert function H_V(N).
    Hilbert {
        #[arg(long = "gen")]
        gens: Vec<String>,
        /// Evaluation degree N >= 1.
        #[arg(short = 'N', long)]
        n: Option<u32>,
        #[arg(long)]
        vars: Option<usize>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Distributive constant of a hypersurface family in V.
    Delta {
        #[arg(long = "gen")]
        gens: Vec<String>,
        #[arg(long = "hyp")]
        hyps: Vec<String>,
        #[arg(long)]
        vars: Option<usize>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Weighted subscheme factor max_W alpha(W)/codim W with its witness.
    Factor {
        #[arg(long = "gen")]
        gens: Vec<String>,
        #[arg(long = "hyp")]
        hyps: Vec<String>,
        /// Comma-separated nonnegative rational weights.
        #[arg(long)]
        weights: Option<String>,
        #[arg(long)]
        vars: Option<usize>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Prefix bounds of a filtration instance read from JSON
    /// ({"log_deltas": [...], "b": [...], "c": [...]}).
    Chebyshev { instance: PathBuf },
    /// Per-place filtration trace of a verification config at one index.
    Trace {
        config: PathBuf,
        #[arg(long)]
        alpha: u64,
        /// Restrict the output to one place.
        #[arg(long)]
        place: Option<String>,
    },
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

/// Infer the common variable count from polynomial sources (largest index
/// used, plus one), unless given explicitly.
fn resolve_vars(sources: &[&String], vars: Option<usize>) -> Result<usize> {
    if let Some(v) = vars {
        return Ok(v);
    }
    let mut best = 0usize;
    for src in sources {
        best = best.max(HomPoly::parse_infer(src)?.num_vars());
    }
    if best == 0 {
        return Err(Error::InvalidInput(
            "cannot infer the variable count; pass --vars".into(),
        ));
    }
    Ok(best)
}

fn parse_polys(sources: &[String], num_vars: usize) -> Result<Vec<HomPoly>> {
    sources
        .iter()
        .map(|s| HomPoly::parse(s, num_vars))
        .collect()
}

fn parse_weight_list(text: &str) -> Result<Vec<Rational>> {
    text.split(',').map(parse_rational).collect()
}

fn merged<'a>(flag: &'a [String], json: &'a [String]) -> &'a [String] {
    if flag.is_empty() {
        json
    } else {
        flag
    }
}

fn run() -> Result<ExitCode> {
    let cli = Cli::parse();
    match cli.command {
        Command::Verify {
            config,
            csv,
            quiet,
            sweep,
        } => {
            let verifier = Verifier::new(VerificationConfig::from_path(&config)?)?;
            if let Some(list) = sweep {
                let epsilons: Vec<f64> = list
                    .split(',')
                    .map(|s| {
                        s.trim()
                            .parse::<f64>()
                            .map_err(|_| Error::InvalidInput(format!("bad epsilon `{s}`")))
                    })
                    .collect::<Result<_>>()?;
                let entries = verifier.sweep(&epsilons)?;
                let stdout = std::io::stdout();
                write_sweep_csv(&entries, stdout.lock())?;
                return Ok(ExitCode::SUCCESS);
            }
            let report = verifier.verify()?;
            match &csv {
                Some(path) => {
                    let mut file = std::fs::File::create(path)?;
                    write_csv(&report, &mut file)?;
                    if !quiet {
                        eprintln!("wrote {} rows to {}", report.rows.len(), path.display());
                    }
                }
                None => {
                    let stdout = std::io::stdout();
                    write_csv(&report, stdout.lock())?;
                }
            }
            if report.has_violation() {
                eprintln!(
                    "{} violation(s) at alpha in {:?}",
                    report.summary.violations, report.summary.violating_alphas
                );
                return Ok(ExitCode::from(1));
            }
            Ok(ExitCode::SUCCESS)
        }

        Command::Height {
            point,
            scalar,
            poly,
            vars,
            json,
        } => {
            let j = ToolJson::load(&json)?;
            let point = point.or(j.point);
            let scalar = scalar.or(j.scalar);
            let poly = poly.or_else(|| j.polys.first().cloned());
            match (point, scalar, poly) {
                (Some(p), None, None) => {
                    let x = ProjPoint::parse(&p)?;
                    println!("H(x) = {} (exact)", multiplicative_height(&x));
                    println!("h(x) = {}", fmt_sig(height_point(&x)));
                }
                (None, Some(s), None) => {
                    let x = parse_rational(&s)?;
                    println!("H(x) = {} (exact)", multiplicative_height_scalar(&x)?);
                    println!("h(x) = {}", fmt_sig(height_scalar(&x)?));
                }
                (None, None, Some(src)) => {
                    let nv = resolve_vars(&[&src], vars.or(j.vars))?;
                    let q = HomPoly::parse(&src, nv)?;
                    println!("H(Q) = {} (exact)", multiplicative_height_poly(&q));
                    println!("h(Q) = {}", fmt_sig(height_poly(&q)));
                }
                _ => {
                    return Err(Error::InvalidInput(
                        "pass exactly one of --point, --scalar, --poly".into(),
                    ))
                }
            }
            Ok(ExitCode::SUCCESS)
        }

        Command::Weil {
            polys,
            point,
            place,
            weights,
            combine,
            vars,
            json,
        } => {
            let j = ToolJson::load(&json)?;
            let polys = merged(&polys, &j.polys).to_vec();
            if polys.is_empty() {
                return Err(Error::InvalidInput("pass at least one --poly".into()));
            }
            let point = point
                .or(j.point)
                .ok_or_else(|| Error::InvalidInput("missing --point".into()))?;
            let place = place
                .or(j.place)
                .ok_or_else(|| Error::InvalidInput("missing --place".into()))?;
            let x = ProjPoint::parse(&point)?;
            // The point fixes the ambient dimension.
            let nv = vars.or(j.vars).unwrap_or(x.len());
            let qs = parse_polys(&polys, nv)?;
            let v: Place = place.parse()?;
            let ws: Vec<Rational> = match weights.or(j.weights) {
                Some(text) => parse_weight_list(&text)?,
                None => vec![Rational::from_integer(1.into()); qs.len()],
            };
            if ws.len() != qs.len() {
                return Err(Error::InvalidInput(format!(
                    "{} weights for {} polynomials",
                    ws.len(),
                    qs.len()
                )));
            }
            for (q, w) in qs.iter().zip(&ws) {
                let lam = weil(q, &v, &x)?;
                println!("lambda[{q}, {v}](x) = {}  (weight {w})", fmt_sig(lam.value));
            }
            if let Some(mode) = combine {
                let entries: Vec<(HomPoly, f64)> = qs
                    .into_iter()
                    .zip(ws.iter().map(heightlab::filtration::rational_to_f64))
                    .collect();
                let combined = match mode {
                    Combine::Min => weil_min(&entries, &v, &x)?,
                    Combine::Sum => weil_sum(&entries, &v, &x)?,
                };
                println!("combined = {}", fmt_sig(combined));
            }
            Ok(ExitCode::SUCCESS)
        }

        Command::Codim {
            gens,
            extras,
            vars,
            json,
        } => {
            let j = ToolJson::load(&json)?;
            let gens = merged(&gens, &j.variety).to_vec();
            let extras = merged(&extras, &j.extras).to_vec();
            if extras.is_empty() {
                return Err(Error::InvalidInput("pass at least one --extra".into()));
            }
            let refs: Vec<&String> = gens.iter().chain(extras.iter()).collect();
            let nv = resolve_vars(&refs, vars.or(j.vars))?;
            let variety = Ideal::new(nv, parse_polys(&gens, nv)?)?;
            let extra = parse_polys(&extras, nv)?;
            let c = codim_in(&variety, &extra, &Limits::default())?;
            println!("codim = {c}");
            Ok(ExitCode::SUCCESS)
        }

        Command::Hilbert {
            gens,
            n,
            vars,
            json,
        } => {
            let j = ToolJson::load(&json)?;
            let gens = merged(&gens, &j.variety).to_vec();
            let n = n
                .or(j.n)
                .ok_or_else(|| Error::InvalidInput("missing -N".into()))?;
            let refs: Vec<&String> = gens.iter().collect();
            let nv = resolve_vars(&refs, vars.or(j.vars))?;
            let variety = Ideal::new(nv, parse_polys(&gens, nv)?)?;
            let h = hilbert_function(&variety, n, &Limits::default())?;
            println!("H_V({n}) = {h}");
            Ok(ExitCode::SUCCESS)
        }

        Command::Delta {
            gens,
            hyps,
            vars,
            json,
        } => {
            let j = ToolJson::load(&json)?;
            let gens = merged(&gens, &j.variety).to_vec();
            let hyps = merged(&hyps, &j.hyps).to_vec();
            if hyps.is_empty() {
                return Err(Error::InvalidInput("pass at least one --hyp".into()));
            }
            let cfg = build_configuration(&gens, &hyps, None, vars.or(j.vars))?;
            let delta = distributive_constant(&cfg, &Limits::default())?;
            println!("Delta = {delta}");
            Ok(ExitCode::SUCCESS)
        }

        Command::Factor {
            gens,
            hyps,
            weights,
            vars,
            json,
        } => {
            let j = ToolJson::load(&json)?;
            let gens = merged(&gens, &j.variety).to_vec();
            let hyps = merged(&hyps, &j.hyps).to_vec();
            if hyps.is_empty() {
                return Err(Error::InvalidInput("pass at least one --hyp".into()));
            }
            let weights = weights.or(j.weights);
            let cfg = build_configuration(&gens, &hyps, weights.as_deref(), vars.or(j.vars))?;
            let (value, witness) = weighted_factor(&cfg, &Limits::default())?;
            println!("factor = {value}");
            let subset: Vec<String> = witness.subset.iter().map(usize::to_string).collect();
            println!(
                "witness: subset {{{}}} codim {} alpha_value {}",
                subset.join(", "),
                witness.codim,
                witness.alpha_value
            );
            Ok(ExitCode::SUCCESS)
        }

        Command::Chebyshev { instance } => {
            #[derive(Deserialize)]
            struct RawInstance {
                log_deltas: Vec<f64>,
                b: Vec<f64>,
                c: Vec<f64>,
            }
            let raw: RawInstance = serde_json::from_str(&std::fs::read_to_string(&instance)?)?;
            let inst = FiltrationInstance::new(raw.log_deltas, raw.b, raw.c)?;
            let bsum = inst.b_weighted_sum();
            let csum = inst.c_weighted_sum();
            match chebyshev_lower(&inst) {
                Ok(lower) => {
                    println!(
                        "lower: bound = {} at prefix j* = {}",
                        fmt_sig(lower.value),
                        lower.j_star
                    );
                    println!(
                        "lower contract: {} >= {}",
                        fmt_sig(bsum),
                        fmt_sig(lower.value * csum)
                    );
                }
                Err(e) => println!("lower: not applicable ({e})"),
            }
            match chebyshev_upper(&inst) {
                Ok(upper) => {
                    println!(
                        "upper: factor = {} at prefix j* = {}",
                        fmt_sig(upper.value),
                        upper.j_star
                    );
                    println!(
                        "upper contract: {} >= {}",
                        fmt_sig(upper.value * bsum),
                        fmt_sig(csum)
                    );
                }
                Err(e) => println!("upper: not applicable ({e})"),
            }
            Ok(ExitCode::SUCCESS)
        }

        Command::Trace {
            config,
            alpha,
            place,
        } => {
            let verifier = Verifier::new(VerificationConfig::from_path(&config)?)?;
            let trace = verifier.filtration_trace(alpha)?;
            let only: Option<Place> = match place {
                Some(s) => Some(s.parse()?),
                None => None,
            };
            println!("alpha = {alpha}");
            for t in &trace.places {
                if let Some(filter) = only {
                    if t.place != filter {
                        continue;
                    }
                }
                let order: Vec<String> = t.order.iter().map(|i| (i + 1).to_string()).collect();
                let lams: Vec<String> = t.sorted_weil.iter().map(|x| fmt_sig(*x)).collect();
                println!("place {}:", t.place);
                println!("  order  = [{}]  (1-based)", order.join(", "));
                println!("  lambda = [{}]", lams.join(", "));
                if t.clamp_total > 0.0 {
                    println!("  clamped = {}", fmt_sig(t.clamp_total));
                }
                println!("  l = {}, b = {:?}, steps = {:?}", t.l, t.b, t.b_steps);
                println!(
                    "  factor = {} (j* = {}), lhs = {}, rhs = {}, holds = {}",
                    t.factor,
                    t.j_star,
                    fmt_sig(t.lhs),
                    fmt_sig(t.rhs),
                    t.holds
                );
            }
            println!("aggregate factor = {}", trace.factor);
            println!("all hold = {}", trace.all_hold);
            if trace.all_hold {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(1))
            }
        }
    }
}

fn build_configuration(
    gens: &[String],
    hyps: &[String],
    weights: Option<&str>,
    vars: Option<usize>,
) -> Result<WeightedConfiguration> {
    let refs: Vec<&String> = gens.iter().chain(hyps.iter()).collect();
    let nv = resolve_vars(&refs, vars)?;
    let variety = Ideal::new(nv, parse_polys(gens, nv)?)?;
    let hs = parse_polys(hyps, nv)?;
    let ws: Vec<Rational> = match weights {
        Some(text) => parse_weight_list(text)?,
        None => vec![Rational::from_integer(1.into()); hs.len()],
    };
    WeightedConfiguration::new(variety, hs, ws, &Limits::default())
}
