use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use hahn_forge::analytic::{hensel_root, implicit_series, AnnulusUnit, Registry};
use hahn_forge::hahn::parse_series;
use hahn_forge::preparation::{jacobian_probe, newton_polygon, puiseux_roots, strong_unit_probe, verify_preparation, Conjugacy, PrepareOptions, PreparingSet, Polynomial};
use hahn_forge::rv::{lambda_of, rv_lambda, VerificationReport};
use hahn_forge::scalar::parse_rational;
use hahn_forge::term::{eval_for_rv, eval_term, parse_term, prepare_term, Term};
use hahn_forge::weierstrass::{parse_multi, strong_split, weierstrass_divide};
use hahn_forge::{Bound, Error, GroupElement, Multi, Rat, Truncated};

const SEED_VAR: &str = "HAHN_FORGE_SEED";

#[derive(Parser)]
#[command(name = "hahn-forge", version, about = "Exact Hahn-series arithmetic and preparation probes")]
struct Cli {
    #[command(flatten)]
    opts: Global,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args)]
struct Global {
    /// Target precision as a rational exponent.
    #[arg(long, global = true, value_name = "P/Q")]
    prec: Option<String>,
    /// Depth of the RV quotient.
    #[arg(long, global = true, value_name = "P/Q", default_value = "0", allow_hyphen_values = true)]
    lambda: String,
    /// Sampling seed; the HAHN_FORGE_SEED environment variable takes precedence.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Sampled balls per verification.
    #[arg(long, global = true, default_value_t = 200)]
    trials: u64,
    /// Rank of the value group.
    #[arg(long, global = true, default_value_t = 1)]
    rank: usize,
    /// Total-degree bound for multivariate series.
    #[arg(long, global = true, value_name = "D", default_value_t = 8)]
    degree: u32,
    /// Evaluate 1/0 as 0 instead of failing.
    #[arg(long, global = true)]
    inv_zero_is_zero: bool,
    /// Extra function registrations, one per line.
    #[arg(long, global = true, value_name = "FILE")]
    functions: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a term at a series point.
    Eval {
        #[arg(allow_hyphen_values = true)]
        term: String,
        #[arg(long, allow_hyphen_values = true)]
        at: String,
    },
    /// rv_lambda of a series.
    Rv {
        #[arg(allow_hyphen_values = true)]
        series: String,
    },
    /// Weierstrass division of DIVIDEND by DIVISOR.
    Divide {
        dividend: String,
        divisor: String,
        /// Distinguished variable, 1-based.
        #[arg(long, default_value_t = 1)]
        var: usize,
        #[arg(long)]
        nvars: Option<usize>,
    },
    /// Strong splitting in the last two variables.
    Split {
        series: String,
        #[arg(long)]
        nvars: Option<usize>,
    },
    /// Root near -1 of 1 + y + a2 y^2 + ... for infinitesimal coefficients.
    Hensel {
        /// Coefficients `a2; a3; ...`.
        #[arg(allow_hyphen_values = true)]
        coeffs: String,
    },
    /// Series r(x1) with f(x1, r(x1)) = 0 for f in variables x1, x2.
    Implicit { series: String },
    /// Puiseux branches of a polynomial term.
    Roots {
        #[arg(allow_hyphen_values = true)]
        term: String,
    },
    /// Newton polygon slopes of a polynomial term.
    Polygon {
        #[arg(allow_hyphen_values = true)]
        term: String,
    },
    /// Preparing set with a passing verification report.
    Prepare {
        #[arg(allow_hyphen_values = true)]
        term: String,
    },
    /// Verify that a set of centers prepares a term.
    Verify {
        #[arg(allow_hyphen_values = true)]
        term: String,
        /// Centers separated by `;`.
        #[arg(long = "with-C", value_name = "SERIES;...", allow_hyphen_values = true)]
        with_c: Option<String>,
    },
    /// Probe the Jacobian property of a term away from a set of centers.
    Jacobian {
        #[arg(allow_hyphen_values = true)]
        term: String,
        #[arg(long = "with-C", value_name = "SERIES;...", allow_hyphen_values = true)]
        with_c: Option<String>,
    },
    /// Probe rv-invariance of U(x) = 1 + g(delta/(x - c)) + h((x - c)/eps).
    ProbeUnit {
        #[arg(long, allow_hyphen_values = true)]
        center: String,
        #[arg(long, allow_hyphen_values = true)]
        delta: String,
        #[arg(long, allow_hyphen_values = true)]
        epsilon: String,
        /// Univariate polynomial in x1.
        #[arg(long, allow_hyphen_values = true)]
        g: String,
        #[arg(long, allow_hyphen_values = true)]
        h: String,
    },
}

struct Outcome {
    json: Value,
    summary: String,
    passed: bool,
}

impl Outcome {
    fn ok(json: Value, summary: impl Into<String>) -> Self {
        Outcome { json, summary: summary.into(), passed: true }
    }

    fn report(json: Value, report: &VerificationReport) -> Self {
        let summary = format!("{}: {} trials, {} violations, {:?}", report.op, report.trials, report.violations.len(), report.verdict).to_lowercase();
        Outcome { json, summary, passed: report.passed() }
    }
}

struct Ctx {
    prec: Option<Rat>,
    lambda: GroupElement,
    seed: u64,
    trials: u64,
    rank: usize,
    degree: u32,
    inv_zero_is_zero: bool,
    registry: Registry,
}

impl Ctx {
    fn new(g: &Global) -> Result<Self, Error> {
        let rational = |s: &str| parse_rational(s).ok_or_else(|| Error::SeriesSyntax(format!("bad rational `{s}`")));
        let seed = match std::env::var(SEED_VAR) {
            Ok(s) => s.trim().parse().map_err(|_| Error::SeriesSyntax(format!("bad {SEED_VAR} `{s}`")))?,
            Err(_) => g.seed,
        };
        let mut registry = Registry::with_builtins();
        if let Some(path) = &g.functions {
            let text = std::fs::read_to_string(path).map_err(|e| Error::MalformedRule(format!("{path}: {e}")))?;
            registry.load(&text)?;
        }
        Ok(Ctx {
            prec: g.prec.as_deref().map(rational).transpose()?,
            lambda: lambda_of(&rational(&g.lambda)?, g.rank)?,
            seed,
            trials: g.trials,
            rank: g.rank,
            degree: g.degree,
            inv_zero_is_zero: g.inv_zero_is_zero,
            registry,
        })
    }

    /// `--prec`, or `default` when absent.
    fn target(&self, default: i64) -> Bound {
        let q = self.prec.clone().unwrap_or_else(|| Rat::from_integer(default.into()));
        Bound::Finite(GroupElement::leading(q, self.rank))
    }

    fn series(&self, s: &str) -> Result<Truncated, Error> {
        parse_series(s, self.rank)
    }

    /// Series separated by `;`.
    fn series_list(&self, list: &str) -> Result<Vec<Truncated>, Error> {
        list.split(';').filter(|s| !s.trim().is_empty()).map(|s| self.series(s)).collect()
    }

    fn term(&self, s: &str) -> Result<Term, Error> {
        parse_term(s, &self.registry)
    }

    fn polynomial(&self, s: &str) -> Result<Polynomial<Rat>, Error> {
        self.term(s)?.to_polynomial(self.rank).ok_or_else(|| Error::Unsupported(format!("`{s}` is not a polynomial in x")))
    }

    fn budget(&self) -> PrepareOptions {
        PrepareOptions { trials: self.trials, seed: self.seed, ..PrepareOptions::default() }
    }

    fn centers(&self, term: &Term, with_c: Option<&str>) -> Result<PreparingSet<Rat>, Error> {
        match with_c {
            Some(list) => {
                Ok(PreparingSet::from_centers(self.series_list(list)?, "--with-C"))
            }
            None => Ok(prepare_term(term, &self.lambda, &self.registry, self.inv_zero_is_zero, &self.budget())?.0),
        }
    }
}

/// Highest variable index `k` appearing as `xk` in any input.
fn count_vars(inputs: &[&str]) -> usize {
    let mut n = 1;
    for s in inputs {
        for (i, _) in s.match_indices('x') {
            let digits: String = s[i + 1..].chars().take_while(char::is_ascii_digit).collect();
            n = n.max(digits.parse().unwrap_or(0));
        }
    }
    n
}

fn run(cli: Cli) -> Result<Outcome, Error> {
    let ctx = Ctx::new(&cli.opts)?;
    let degree = ctx.degree;
    match cli.cmd {
        Command::Eval { term, at } => {
            let v = eval_term(&ctx.term(&term)?, &ctx.series(&at)?, &ctx.target(8), &ctx.registry, ctx.inv_zero_is_zero)?;
            Ok(Outcome::ok(json!({ "value": v.to_string() }), v.to_string()))
        }
        Command::Rv { series } => {
            let x = ctx.series(&series)?;
            let rv = rv_lambda(&x, &ctx.lambda)?;
            Ok(Outcome::ok(json!({ "value": x.to_string(), "lambda": ctx.lambda.to_string(), "rv": rv.to_string() }), rv.to_string()))
        }
        Command::Divide { dividend, divisor, var, nvars } => {
            let n = nvars.unwrap_or_else(|| count_vars(&[&dividend, &divisor]));
            if var == 0 || var > n {
                return Err(Error::BadVariable(var));
            }
            let g: Multi = parse_multi(&dividend, n, ctx.rank)?;
            let f: Multi = parse_multi(&divisor, n, ctx.rank)?;
            let div = weierstrass_divide(&f, &g, var - 1, degree, &ctx.target(8))?;
            let remainders: Vec<String> = div.remainders.iter().map(ToString::to_string).collect();
            let summary = format!("quotient with {} terms, {} remainders", div.quotient.len(), remainders.len());
            Ok(Outcome::ok(json!({ "quotient": div.quotient.to_string(), "remainders": remainders }), summary))
        }
        Command::Split { series, nvars } => {
            let n = nvars.unwrap_or_else(|| count_vars(&[&series]).max(2));
            let f: Multi = parse_multi(&series, n, ctx.rank)?;
            let s = strong_split(&f)?;
            Ok(Outcome::ok(json!({ "f1": s.f1.to_string(), "f2": s.f2.to_string(), "q": s.q.to_string() }), "split"))
        }
        Command::Hensel { coeffs } => {
            let coeffs = ctx.series_list(&coeffs)?;
            let h = hensel_root(&coeffs, &ctx.target(8))?;
            let residuals: Vec<String> = h.residuals.iter().map(ToString::to_string).collect();
            let summary = format!("root after {} Newton steps", residuals.len().saturating_sub(1));
            Ok(Outcome::ok(json!({ "root": h.root.to_string(), "residuals": residuals }), summary))
        }
        Command::Implicit { series } => {
            let f: Multi = parse_multi(&series, 2, ctx.rank)?;
            let r = implicit_series(&f, degree, &ctx.target(8))?;
            Ok(Outcome::ok(json!({ "series": r.to_string() }), r.to_string()))
        }
        Command::Roots { term } => {
            let p = ctx.polynomial(&term)?;
            let depth = ctx.prec.clone().unwrap_or_else(|| Rat::from_integer(8.into()));
            let roots = puiseux_roots(&p, &depth)?;
            let out: Vec<Value> = roots
                .iter()
                .map(|r| {
                    json!({
                        "branch": r.to_string(),
                        "exact": r.exact,
                        "multiplicity": r.multiplicity,
                        "real": r.conjugacy == Conjugacy::Real,
                        "ramification": r.ramification,
                        "depth": r.depth.to_string(),
                    })
                })
                .collect();
            let count: usize = roots.iter().map(|r| r.root_count()).sum();
            Ok(Outcome::ok(json!({ "roots": out }), format!("{} branches covering {count} roots", roots.len())))
        }
        Command::Polygon { term } => {
            let p = ctx.polynomial(&term)?;
            let edges: Vec<Value> = newton_polygon(&p)?.iter().map(|(v, k)| json!({ "valuation": v.to_string(), "multiplicity": k })).collect();
            Ok(Outcome::ok(json!({ "edges": edges }), format!("{} edges", edges.len())))
        }
        Command::Prepare { term } => {
            let term = ctx.term(&term)?;
            let (set, report) = prepare_term::<Rat>(&term, &ctx.lambda, &ctx.registry, ctx.inv_zero_is_zero, &ctx.budget())?;
            let json = json!({ "preparing_set": set.to_value(), "report": report_value(&report) });
            Ok(Outcome::report(json, &report))
        }
        Command::Verify { term, with_c } => {
            let term = ctx.term(&term)?;
            let set = ctx.centers(&term, with_c.as_deref())?;
            let (lambda, registry, z) = (&ctx.lambda, &ctx.registry, ctx.inv_zero_is_zero);
            let report = verify_preparation(|x| eval_for_rv(&term, x, lambda, registry, z), &set, lambda, ctx.trials, ctx.seed);
            Ok(Outcome::report(report_value(&report), &report))
        }
        Command::Jacobian { term, with_c } => {
            let term = ctx.term(&term)?;
            let set = ctx.centers(&term, with_c.as_deref())?;
            let target = match &ctx.prec {
                Some(_) => ctx.target(0),
                None => Bound::Finite(&ctx.lambda + &GroupElement::leading(Rat::from_integer(16.into()), ctx.rank)),
            };
            let f = |x: &Truncated| eval_term(&term, x, &target, &ctx.registry, ctx.inv_zero_is_zero);
            let probe = jacobian_probe(f, &set, &ctx.lambda, ctx.trials, ctx.seed);
            let json: Value = serde_json::from_str(&probe.to_json()).expect("probe report is JSON");
            Ok(Outcome::report(json, &probe.report))
        }
        Command::ProbeUnit { center, delta, epsilon, g, h } => {
            let unit = AnnulusUnit {
                center: ctx.series(&center)?,
                delta: ctx.series(&delta)?,
                epsilon: ctx.series(&epsilon)?,
                g: parse_multi(&g, 1, ctx.rank)?,
                h: parse_multi(&h, 1, ctx.rank)?,
            };
            let report = strong_unit_probe(&unit, &ctx.lambda, ctx.trials, ctx.seed)?;
            Ok(Outcome::report(report_value(&report), &report))
        }
    }
}

fn report_value(report: &VerificationReport) -> Value {
    serde_json::to_value(report).expect("report serializes")
}

/// 3 for precision and budget failures, 2 for every other input problem.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InsufficientPrecision
        | Error::UndecidableAtPrecision
        | Error::ZeroOrUncertainLeadingTerm
        | Error::UnreachablePrecision
        | Error::PrecisionStall
        | Error::UndecidedSign
        | Error::DepthExhausted
        | Error::BudgetExhausted(_) => 3,
        _ => 2,
    }
}

fn error_json(e: &Error) -> Value {
    let mut doc = json!({ "error": e.to_string() });
    match e {
        Error::Syntax { line, col, .. } => {
            doc["line"] = json!(line);
            doc["col"] = json!(col);
        }
        Error::BudgetExhausted(report) => doc["report"] = report_value(report),
        _ => {}
    }
    doc
}

/// Writes one JSON line to stdout; a closed pipe is not an error.
fn emit(doc: &Value) {
    let _ = writeln!(std::io::stdout().lock(), "{doc}");
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(out) => {
            emit(&out.json);
            eprintln!("{}", out.summary);
            ExitCode::from(if out.passed { 0 } else { 1 })
        }
        Err(e) => {
            emit(&error_json(&e));
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
