//! `rf`: batch front end for the series-pair solver, tower builder, residue
//! catalogues and the symbol-group model. Every command prints one JSON report
//! on stdout (or to `--out`) and a short summary on stderr.

mod selftest;

use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use serde::Serialize;
use serde_json::{json, Value};

use rf_core::gr::{builtin_gr_p2_window, builtin_gr_p2_with, law_for, PairJson};
use rf_core::padic::parse_scalar;
use rf_core::tower::{s_argument, Source as TowerSource};
use rf_core::{
    automorphism_table, contained_zero, explicit_p2, generator_catalog, generator_order, k2_normal_form, solve_gr,
    tower_from_pair, towers_equal, verify_gr, Error, EvalConvention, Exec, GRPair, ResidueField, Tower,
};

#[derive(Parser, Debug, Serialize)]
#[command(name = "rf", version, about = "Explicit cyclic p-power extensions of p-adic fields")]
struct Cli {
    /// Prime (p > 3).
    #[arg(long, global = true, default_value_t = 5)]
    p: u64,
    /// Working precision in p-adic digits.
    #[arg(long, global = true, env = "RF_DEFAULT_PREC")]
    prec: Option<u32>,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<String>,
    /// Run data-parallel kernels on one thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case", tag = "name")]
enum Command {
    /// Solve for a series pair on a window.
    SolveGr {
        #[arg(long, default_value = "-3:2", allow_hyphen_values = true)]
        window: String,
    },
    /// Verify a pair read from JSON, or the built-in pair.
    VerifyGr {
        #[arg(long)]
        input: Option<String>,
        #[arg(long, default_value = "-3:2", allow_hyphen_values = true)]
        window: String,
    },
    /// Build a tower and print its valuation certificates.
    BuildTower(TowerArgs),
    /// Build a tower and certify roots, automorphisms and cyclicity.
    VerifyTower(TowerArgs),
    /// Compare the towers of two sources.
    TowersEqual {
        #[command(flatten)]
        tower: TowerArgs,
        /// Source of the second tower.
        #[arg(long, value_enum, default_value_t = SourceArg::SolvedGr)]
        other: SourceArg,
    },
    /// Generator catalogue for a residue field.
    Catalog {
        #[arg(long, value_enum, default_value_t = FieldArg::RationalFunction)]
        field: FieldArg,
        /// Degree of the constant field over F_p.
        #[arg(long, default_value_t = 1)]
        m: usize,
        #[arg(long, default_value_t = 1)]
        n: u32,
        #[arg(long, default_value_t = 3)]
        bound: usize,
    },
    /// Symbol-group normal forms and generator orders.
    K2 {
        #[command(subcommand)]
        action: K2Action,
    },
    /// Randomized property suite over all modules.
    Selftest {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        cases: usize,
    },
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case", tag = "action")]
enum K2Action {
    Order {
        #[arg(long, allow_hyphen_values = true)]
        j: i64,
    },
    /// Terms as `j:c` pairs separated by commas.
    NormalForm {
        #[arg(long, allow_hyphen_values = true)]
        terms: String,
    },
}

#[derive(Args, Debug, Serialize)]
struct TowerArgs {
    #[arg(long, value_enum, default_value_t = SourceArg::ExplicitP2)]
    source: SourceArg,
    #[arg(long, default_value_t = 2)]
    n: usize,
    /// The unit d, as an integer or fraction.
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    d: String,
    #[arg(long, value_enum, default_value_t = ConventionArg::Direct)]
    convention: ConventionArg,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum SourceArg {
    SolvedGr,
    BuiltinP2,
    ExplicitP2,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum ConventionArg {
    Direct,
    Inverse,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum FieldArg {
    Finite,
    RationalFunction,
}

/// A command outcome: the result document and whether every checked claim held.
struct Outcome {
    result: Value,
    ok: bool,
    summary: String,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        e if e.is_precision() => 3,
        Error::InvalidInput(_) | Error::UnsupportedVariant(_) | Error::NonUnitSubstitution(_) => 4,
        _ => 2,
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::PrecisionExhausted(_) => "precision_exhausted",
        Error::DivisionByZero => "division_by_zero",
        Error::NonUnitSubstitution(_) => "non_unit_substitution",
        Error::DivergentComposition(_) => "divergent_composition",
        Error::NonInvertibleLeadingTerm(_) => "non_invertible_leading_term",
        Error::LiftObstruction { .. } => "lift_obstruction",
        Error::WindowTooSmall(_) => "window_too_small",
        Error::IncomparablePrecision { .. } => "incomparable_precision",
        Error::DivergentSum(_) => "divergent_sum",
        Error::NotTotallyRamified { .. } => "not_totally_ramified",
        Error::InsufficientPrecision { .. } => "insufficient_precision",
        Error::NotGalois { .. } => "not_galois",
        Error::UnsupportedVariant(_) => "unsupported_variant",
        Error::InvalidInput(_) => "invalid_input",
    }
}

fn parse_window(s: &str) -> rf_core::Result<(i64, i64)> {
    let bad = || Error::InvalidInput(format!("window '{s}' is not of the form lo:hi"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    let lo: i64 = a.trim().parse().map_err(|_| bad())?;
    let hi: i64 = b.trim().parse().map_err(|_| bad())?;
    if lo > 0 || hi < 0 {
        return Err(Error::InvalidInput(format!("window [{lo}, {hi}] must contain 0")));
    }
    Ok((lo, hi))
}

fn is_prime(p: u64) -> bool {
    p >= 2 && (2..).take_while(|k| k * k <= p).all(|k| !p.is_multiple_of(k))
}

struct Ctx {
    p: u64,
    prec: Option<u32>,
    exec: Exec,
}

impl Ctx {
    fn prec_or(&self, default: u32) -> u32 {
        self.prec.unwrap_or(default)
    }

    fn tower(&self, args: &TowerArgs, source: SourceArg) -> rf_core::Result<Tower> {
        let prec = self.prec_or(20);
        let d = parse_scalar(self.p, &args.d, prec)?;
        let conv = match args.convention {
            ConventionArg::Direct => EvalConvention::Direct,
            ConventionArg::Inverse => EvalConvention::Inverse,
        };
        match source {
            SourceArg::ExplicitP2 => {
                if args.n != 2 {
                    return Err(Error::InvalidInput("the explicit tower has exactly two levels".into()));
                }
                explicit_p2(&d, prec)
            }
            SourceArg::BuiltinP2 => {
                let pair = builtin_gr_p2_with(self.p, (-3, 2), prec);
                tower_from_pair(&pair, &d, args.n, conv, prec, TowerSource::BuiltinP2)
            }
            SourceArg::SolvedGr => {
                let law = law_for(self.p, 2, (-3, 2))?;
                let pair = solve_gr(self.p, 2, (-3, 2), &law)?;
                tower_from_pair(&pair, &d, args.n, conv, prec, TowerSource::SolvedGr)
            }
        }
    }
}

fn tower_report(t: &Tower) -> Value {
    let vb: Vec<String> = t
        .vbeta()
        .iter()
        .map(|q| if q.is_integer() { q.to_integer().to_string() } else { format!("{}/{}", q.numer(), q.denom()) })
        .collect();
    json!({ "tower": t.to_json(), "generator_valuations": vb })
}

fn run(cli: &Cli) -> rf_core::Result<Outcome> {
    if !is_prime(cli.p) || cli.p <= 3 {
        return Err(Error::InvalidInput(format!("p = {} must be a prime greater than 3", cli.p)));
    }
    if cli.prec == Some(0) {
        return Err(Error::InvalidInput("precision must be at least 1".into()));
    }
    let ctx = Ctx { p: cli.p, prec: cli.prec, exec: if cli.sequential { Exec::Sequential } else { Exec::Parallel } };
    let p = cli.p;
    match &cli.command {
        Command::SolveGr { window } => {
            let window = parse_window(window)?;
            let prec = ctx.prec_or(2);
            let law = law_for(p, prec, window)?;
            let opts = rf_core::gr::SolveOptions { exec: ctx.exec, ..rf_core::gr::SolveOptions::for_prime(p) };
            let pair = rf_core::gr::solve_gr_with(p, prec, window, &law, opts)?;
            let report = verify_gr(&pair, &law)?;
            let ok = report.passes(prec);
            Ok(Outcome {
                summary: format!("solved pair, residual valuation {}", report.residual_valuation),
                result: json!({ "pair": pair.to_json(), "report": report }),
                ok,
            })
        }
        Command::VerifyGr { input, window } => {
            let pair = match input {
                Some(path) => {
                    let text = std::fs::read_to_string(path)
                        .map_err(|e| Error::InvalidInput(format!("cannot read {path}: {e}")))?;
                    let j: PairJson =
                        serde_json::from_str(&text).map_err(|e| Error::InvalidInput(format!("bad pair JSON: {e}")))?;
                    GRPair::from_json(&j)?
                }
                None => builtin_gr_p2_window(p, parse_window(window)?),
            };
            let law = law_for(pair.p, pair.prec, pair.window)?;
            let report = verify_gr(&pair, &law)?;
            let ok = report.passes(pair.prec);
            Ok(Outcome {
                summary: format!(
                    "residual valuation {} (needs {}), conditions {}/{}/{}",
                    report.residual_valuation, pair.prec, report.cond1, report.cond2, report.cond3
                ),
                result: json!({ "report": report }),
                ok,
            })
        }
        Command::BuildTower(args) => {
            let t = ctx.tower(args, args.source)?;
            let vb = tower_report(&t);
            Ok(Outcome {
                summary: format!("tower built, generator valuations {}", vb["generator_valuations"]),
                result: vb,
                ok: true,
            })
        }
        Command::VerifyTower(args) => {
            let t = ctx.tower(args, args.source)?;
            let d = t.spec.d.clone();
            let zeros = contained_zero(&t, &d)?;
            let table = automorphism_table(&t, ctx.exec)?;
            let expected = (p as usize).pow(t.n as u32);
            let ok = !zeros.is_empty() && table.cyclic && table.autos.len() == expected && table.is_group();
            let arg = s_argument(&d, t.n, t.spec.eval_convention)?;
            Ok(Outcome {
                summary: format!(
                    "{} automorphisms, cyclic {}, generator order {}, contained zeros {}",
                    table.autos.len(),
                    table.cyclic,
                    table.generator_order,
                    zeros.len()
                ),
                result: json!({
                    "tower": tower_report(&t),
                    "series_argument": rf_core::padic::ScalarJson::from(&arg),
                    "contained_zeros": zeros.iter().map(|r| r.to_json()).collect::<Vec<_>>(),
                    "automorphisms": table.to_json(),
                }),
                ok,
            })
        }
        Command::TowersEqual { tower, other } => {
            let a = ctx.tower(tower, tower.source)?;
            let b = ctx.tower(tower, *other)?;
            let r = towers_equal(&a, &b, tower.n.min(a.n).min(b.n))?;
            Ok(Outcome {
                summary: format!("towers equal: {}", r.equal),
                result: json!({ "equal": r.equal, "levels": r.levels }),
                ok: r.equal,
            })
        }
        Command::Catalog { field, m, n, bound } => {
            let k = match field {
                FieldArg::Finite => ResidueField::finite(p, *m)?,
                FieldArg::RationalFunction => ResidueField::rational_function(p, *m)?,
            };
            let cat = generator_catalog(&k, *n, *bound)?;
            Ok(Outcome {
                summary: format!("{} catalogue entries over {}", cat.entries.len(), cat.field),
                result: serde_json::to_value(&cat).expect("serializable"),
                ok: true,
            })
        }
        Command::K2 { action } => match action {
            K2Action::Order { j } => {
                let ord = generator_order(p, *j);
                let shown = match &ord {
                    rf_core::k2::Order::Finite(n) => json!(n.to_string()),
                    rf_core::k2::Order::Infinite => json!("infinite"),
                };
                Ok(Outcome {
                    summary: format!("order of generator {j}: {shown}"),
                    result: json!({ "j": j, "order": shown }),
                    ok: true,
                })
            }
            K2Action::NormalForm { terms } => {
                let mut raw = Vec::new();
                for part in terms.split(',').filter(|s| !s.trim().is_empty()) {
                    let bad = || Error::InvalidInput(format!("term '{part}' is not of the form j:c"));
                    let (j, c) = part.split_once(':').ok_or_else(bad)?;
                    let j: i64 = j.trim().parse().map_err(|_| bad())?;
                    let c: BigInt = c.trim().parse().map_err(|_| bad())?;
                    raw.push((j, c));
                }
                let x = k2_normal_form(p, ctx.prec_or(20), &raw)?;
                Ok(Outcome {
                    summary: format!("normal form with {} torsion coordinates", x.torsion.len()),
                    result: serde_json::to_value(x.to_json()).expect("serializable"),
                    ok: true,
                })
            }
        },
        Command::Selftest { seed, cases } => {
            let rep = selftest::run(p, *seed, *cases, ctx.exec);
            let ok = rep.iter().all(|c| c.failures == 0);
            let failed: Vec<&str> = rep.iter().filter(|c| c.failures > 0).map(|c| c.name.as_str()).collect();
            Ok(Outcome {
                summary: if ok {
                    format!("{} properties passed", rep.len())
                } else {
                    format!("failing: {}", failed.join(", "))
                },
                result: json!({ "properties": rep }),
                ok,
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();
    let outcome = run(&cli);
    let config = serde_json::to_value(&cli).expect("serializable");
    let (report, code, summary) = match outcome {
        Ok(o) => (json!({ "config": config, "ok": o.ok, "result": o.result }), if o.ok { 0 } else { 2 }, o.summary),
        Err(e) => (
            json!({ "config": config, "ok": false, "error": { "kind": error_kind(&e), "message": e.to_string() } }),
            exit_code(&e),
            format!("error: {e}"),
        ),
    };
    let text = serde_json::to_string_pretty(&report).expect("serializable");
    match &cli.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, text + "\n") {
                eprintln!("cannot write {path}: {e}");
                return ExitCode::from(4);
            }
        }
        None => println!("{text}"),
    }
    eprintln!("{summary} [{:.2?}]", started.elapsed());
    ExitCode::from(code)
}
