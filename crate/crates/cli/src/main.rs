//! `vecr`: type checking, reduction, encodings and property suites from the command line.

mod repl;
mod session;

use clap::{Parser, Subcommand};
use session::{domain, CliError, Session, DEFAULT_FUEL};
use std::path::Path;
use std::process::ExitCode;
use vecr::encodings::{apply_and_decode, encode_matrix, encode_vector, CoeffMatrix, CoeffVector, EncodingError};
use vecr::properties::{run_suite, GenConfig, PropertyReport, Suite};
use vecr::syntax::Context;
use vecr::typesys::{check, synthesize};

#[derive(Parser)]
#[command(name = "vecr", version, about = "Workbench for a typed algebraic lambda calculus over Q(sqrt2)")]
struct Cli {
    /// Print ASCII only (`\`, `*`, `->`, `forall`, `sqrt2`).
    #[arg(long, global = true)]
    ascii: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a term against a type, or synthesize one when no type is given.
    Check {
        /// Term source, or a path to a UTF-8 file containing one.
        input: String,
        #[arg(value_name = "TYPE")]
        claimed: Option<String>,
    },
    /// Normalize a term with the deterministic strategy.
    Reduce {
        expr: String,
        #[arg(long, default_value_t = DEFAULT_FUEL)]
        fuel: usize,
        /// Print one line per step: `[rule] @path  term`.
        #[arg(long)]
        trace: bool,
        /// Print the trace as JSON lines.
        #[arg(long)]
        json: bool,
    },
    /// Weight of a closed term's normal form, or of a type.
    Weight {
        input: String,
        #[arg(long, default_value_t = DEFAULT_FUEL)]
        fuel: usize,
    },
    /// Encode a vector `(a, b)` or a matrix `[a, b; c, d]` as a term with its type.
    Encode { literal: String },
    /// Apply an encoded matrix to an encoded vector and decode the result.
    Apply {
        matrix: String,
        vector: String,
        #[arg(long, default_value_t = DEFAULT_FUEL)]
        fuel: usize,
    },
    /// Run a property suite, or `all`, over generated typed terms.
    Prop {
        suite: String,
        #[arg(long, env = "VECR_SEED")]
        seed: Option<u64>,
        #[arg(long)]
        cases: Option<usize>,
        #[arg(long)]
        fuel: Option<usize>,
        #[arg(long)]
        depth: Option<usize>,
    },
    /// Interactive loop: `let x = e`, `:t e`, `:r e`, `:w e`, `:trace e`, `:q`.
    Repl,
}

fn read_input(input: &str) -> Result<(String, String), CliError> {
    let path = Path::new(input);
    if path.is_file() {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{input}: {e}")))?;
        Ok((input.to_string(), text))
    } else {
        Ok(("<expr>".to_string(), input.to_string()))
    }
}

fn literal_error(e: EncodingError) -> CliError {
    match e {
        EncodingError::Literal(_) => CliError::Usage(e.to_string()),
        other => domain(other),
    }
}

fn show_vector(s: &Session, v: &CoeffVector) -> String {
    let items: Vec<String> = v.entries().iter().map(|x| s.show_scalar(x)).collect();
    format!("({})", items.join(", "))
}

fn run(cli: Cli) -> Result<(), CliError> {
    let s = Session::new(cli.ascii);
    match cli.command {
        Command::Check { input, claimed } => {
            let (origin, src) = read_input(&input)?;
            let t = s.closed_term(&origin, &src)?;
            let ctx = Context::new();
            let (ty, d) = match claimed {
                Some(claimed) => {
                    let ty = s.ty("<type>", &claimed)?;
                    let d = check(&ctx, &t, &ty).map_err(domain)?;
                    (ty, d)
                }
                None => {
                    let (ty, d) = synthesize(&ctx, &t).map_err(domain)?;
                    (ty.to_type(), d)
                }
            };
            println!("OK : {}", s.show_type(&ty));
            print!("{}", d.render(&s.printer()));
        }
        Command::Reduce { expr, fuel, trace, json } => {
            let t = s.term("<expr>", &expr)?;
            let show = |t: &vecr::Term| s.show_term(t);
            match vecr::rewrite::normalize(&t, fuel) {
                Ok(tr) if json => print!("{}", tr.render_json(&show)),
                Ok(tr) if trace => print!("{}", tr.render(&show)),
                Ok(tr) => println!("{}", show(tr.last())),
                Err(e) => {
                    if json {
                        print!("{}", e.trace.render_json(&show));
                    } else if trace {
                        print!("{}", e.trace.render(&show));
                    }
                    return Err(domain(e));
                }
            }
        }
        Command::Weight { input, fuel } => {
            let (origin, src) = read_input(&input)?;
            println!("{}", s.show_scalar(&s.weight(&origin, &src, fuel)?));
        }
        Command::Encode { literal } => {
            let (t, ty) = if literal.trim_start().starts_with('[') {
                encode_matrix(&CoeffMatrix::parse(&literal).map_err(literal_error)?)
            } else {
                encode_vector(&CoeffVector::parse(&literal).map_err(literal_error)?)
            };
            println!("{} : {}", s.show_term(&t), s.show_type(&ty));
        }
        Command::Apply { matrix, vector, fuel } => {
            let m = CoeffMatrix::parse(&matrix).map_err(literal_error)?;
            let v = CoeffVector::parse(&vector).map_err(literal_error)?;
            let out = apply_and_decode(&m, &v, fuel).map_err(domain)?;
            println!("{}", show_vector(&s, &out));
        }
        Command::Prop { suite, seed, cases, fuel, depth } => {
            let suites: Vec<Suite> = if suite == "all" {
                Suite::ALL.to_vec()
            } else {
                vec![suite.parse().map_err(CliError::Usage)?]
            };
            let base = GenConfig::default();
            let cfg = GenConfig {
                seed: seed.unwrap_or(base.seed),
                cases: cases.unwrap_or(base.cases),
                fuel: fuel.unwrap_or(base.fuel),
                max_depth: depth.unwrap_or(base.max_depth),
                ..base
            };
            cfg.validate().map_err(CliError::Usage)?;
            return prop(&suites, &cfg);
        }
        Command::Repl => repl::run(s),
    }
    Ok(())
}

fn prop(suites: &[Suite], cfg: &GenConfig) -> Result<(), CliError> {
    let reports: Vec<PropertyReport> = suites.iter().map(|&suite| run_suite(suite, cfg)).collect();
    // Wall times go to stderr so stdout is identical across runs.
    println!("{:<22} {:>7} {:>9}", "suite", "cases", "failures");
    for r in &reports {
        println!("{:<22} {:>7} {:>9}", r.suite, r.cases, r.failures.len());
        eprintln!("{} took {:.2}s", r.suite, r.wall.as_secs_f64());
    }
    for r in &reports {
        for note in &r.notes {
            println!("  {}: {note}", r.suite);
        }
        for f in r.failures.iter().take(5) {
            println!("  {} case {} (seed {}): {}", r.suite, f.case, f.seed, f.term);
            println!("    expected {}", f.expected);
            println!("    actual   {}", f.actual);
        }
    }
    for r in &reports {
        println!("{}", r.fingerprint());
    }
    let failed: usize = reports.iter().map(|r| r.failures.len()).sum();
    if failed == 0 {
        Ok(())
    } else {
        Err(CliError::Domain(format!("{failed} property failures")))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
