//! `copula`: exact quantiles, volumes and copula checks from JSON payloads.
//!
//! Exit status is 0 when a check passes, 1 when it finds a violation (the
//! report is still written) and 2 for usage or input errors.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use exact_copula::io::{read_empirical_csv, DfFile, MonotoneFnFile, Payload};
use exact_copula::{
    check_df_axioms, extract_copula, grid, verify_copula_axioms, verify_sklar_identity,
    verify_uniform_margins, volume, Cuboid, DistributionFunction, Error, ExtScalar, GridSpec,
    MonotoneFn, MultivariateDf, Point, Scalar,
};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(
    name = "copula",
    version,
    about = "Exact generalized inverses, df volumes and copula checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generalized inverse inf{x : G(x) >= u} of a function payload
    Quantile {
        file: PathBuf,
        /// Level in [c, d], e.g. 0.3 or 3/10
        u: String,
        /// Use the right limit inf{x : G(x) > u} instead
        #[arg(long)]
        right_limit: bool,
    },
    /// Evaluate a function at x, or a df at a comma-separated point
    Eval {
        file: PathBuf,
        #[arg(allow_hyphen_values = true)]
        point: String,
    },
    /// Volume of the cuboid ]a, b] under a df
    Volume {
        file: PathBuf,
        /// Lower corner, comma-separated
        #[arg(allow_hyphen_values = true)]
        a: String,
        /// Upper corner, comma-separated
        #[arg(allow_hyphen_values = true)]
        b: String,
    },
    /// Write the i-th margin (1-based) of a df as a function payload
    Margin {
        file: PathBuf,
        index: usize,
        #[command(flatten)]
        out: Output,
    },
    /// Tabulate the copula of a df on a grid of the unit cube
    Extract {
        file: PathBuf,
        #[command(flatten)]
        grid: GridArg,
        #[command(flatten)]
        out: Output,
    },
    /// Run a property check and emit a JSON report
    Verify {
        kind: Check,
        file: PathBuf,
        #[command(flatten)]
        grid: GridArg,
        /// Seed for the random cuboids
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of random cuboids for volume checks
        #[arg(long, default_value_t = 200, value_parser = clap::value_parser!(u32).range(1..))]
        cuboids: u32,
        /// Most violations listed in the report
        #[arg(long, default_value_t = 20)]
        max_witnesses: usize,
        #[command(flatten)]
        out: Output,
    },
    /// Turn a CSV of data rows into an empirical df payload
    Ingest {
        file: PathBuf,
        /// Skip the first line
        #[arg(long)]
        has_header: bool,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Check {
    /// Inverse inequalities, left-continuity and the right-limit identity
    Lemma,
    /// Non-negative volumes, limits and right-continuity
    Df,
    /// F(x) = C(F_1(x_1), ..., F_d(x_d)) on a grid
    Sklar,
    /// Uniform one-dimensional margins of the copula
    Margins,
    /// Groundedness, d-increasing and the Frechet-Hoeffding bounds
    Copula,
}

#[derive(Args)]
struct GridArg {
    /// Grid intervals per axis, merged with the structural breakpoints
    #[arg(long = "grid", default_value_t = 20, value_parser = clap::value_parser!(u32).range(1..))]
    m: u32,
}

#[derive(Args)]
struct Output {
    /// Write to this file instead of stdout
    #[arg(short = 'o', long = "output")]
    path: Option<PathBuf>,
}

#[derive(Debug)]
enum CliError {
    Input(String),
    Lib(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(msg) => f.write_str(msg),
            CliError::Lib(e) => e.fmt(f),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Whether a check passed; plain queries always "pass".
type Verdict = bool;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> CliResult<Verdict> {
    match command {
        Command::Quantile {
            file,
            u,
            right_limit,
        } => {
            let g = load_fn(&file)?;
            let u: Scalar = u.parse()?;
            let x = if right_limit {
                g.gen_inverse_right(&u)?
            } else {
                g.gen_inverse(&u)?
            };
            println!("{x}");
        }
        Command::Eval { file, point } => match load(&file)? {
            Payload::Function(g) => {
                let x: ExtScalar = point.trim().parse()?;
                println!("{}", g.to_fn()?.eval(&x));
            }
            Payload::Df(f) => {
                let f = f.to_df()?;
                let t = Point::new(parse_list(&point)?)?;
                println!("{}", f.df_eval(&t)?);
            }
        },
        Command::Volume { file, a, b } => {
            let f = load_df(&file)?;
            let cuboid = Cuboid::new(Point::new(parse_list(&a)?)?, Point::new(parse_list(&b)?)?)?;
            println!("{}", volume(&f, &cuboid)?);
        }
        Command::Margin { file, index, out } => {
            let f = load_df(&file)?;
            let d = DistributionFunction::dim(&f);
            if index == 0 || index > d {
                return Err(CliError::Input(format!(
                    "margin index {index} out of range 1..={d}"
                )));
            }
            let m = f.margin(index - 1)?;
            emit(
                &out,
                &serde_json::to_value(MonotoneFnFile::from_fn(&m)).expect("payload serializes"),
            )?;
        }
        Command::Extract { file, grid: g, out } => {
            let c = extract_copula(&load_df(&file)?)?;
            let axes: Vec<Vec<Scalar>> = (0..c.dim())
                .map(|axis| {
                    let mut pts = grid(&Scalar::zero(), &Scalar::one(), g.m);
                    pts.extend(c.breakpoints(axis));
                    pts.sort();
                    pts.dedup();
                    pts
                })
                .collect();
            let mut values = Vec::new();
            for s in product(&axes) {
                let v = c.eval(&s)?;
                values.push(json!({ "s": s, "c": v }));
            }
            emit(
                &out,
                &json!({ "dim": c.dim(), "grid": g.m, "values": values }),
            )?;
        }
        Command::Verify {
            kind,
            file,
            grid: g,
            seed,
            cuboids,
            max_witnesses,
            out,
        } => {
            let (report, pass) = verify(kind, &file, g.m, seed, cuboids as usize, max_witnesses)?;
            emit(&out, &report)?;
            return Ok(pass);
        }
        Command::Ingest {
            file,
            has_header,
            out,
        } => {
            let reader = fs::File::open(&file).map_err(|e| io_error(&file, e))?;
            let f = read_empirical_csv(reader, has_header)?;
            emit(
                &out,
                &serde_json::to_value(DfFile::from_df(&f)).expect("payload serializes"),
            )?;
        }
    }
    Ok(true)
}

fn verify(
    kind: Check,
    file: &Path,
    m: u32,
    seed: u64,
    cuboids: usize,
    max_witnesses: usize,
) -> CliResult<(Value, Verdict)> {
    let spec = GridSpec::new(m)?;
    Ok(match kind {
        Check::Lemma => {
            let g = load_fn(file)?;
            let (us, xs) = lemma_grids(&g, m);
            let r = g.lemma_report(&us, &xs)?;
            let pass = r.pass();
            let fail = |checks: &[exact_copula::LemmaCheck]| -> Vec<Value> {
                checks
                    .iter()
                    .filter(|c| !c.holds)
                    .map(|c| json!(c))
                    .collect()
            };
            let a = fail(&r.checks_a);
            let b = fail(&r.checks_b);
            let lc = fail(&r.left_continuity);
            let truncated = [a.len(), b.len(), lc.len(), r.ff_witnesses.len()]
                .iter()
                .any(|&n| n > max_witnesses);
            let report = json!({
                "check": "lemma",
                "u_points": us.len(),
                "x_points": xs.len(),
                "pass": pass,
                "pass_a": r.pass_a,
                "pass_b": r.pass_b,
                "pass_leftcont": r.pass_leftcont,
                "violations_a": head(a, max_witnesses),
                "violations_b": head(b, max_witnesses),
                "violations_leftcont": head(lc, max_witnesses),
                "ff_witnesses": head(r.ff_witnesses.iter().map(|w| json!(w)).collect(), max_witnesses),
                "truncated": truncated,
            });
            (report, pass)
        }
        Check::Df => {
            let f = load_df(file)?;
            let r = check_df_axioms(&f, cuboids, seed);
            let neg: Vec<Value> = r.negative_volumes().map(|c| json!(c)).collect();
            let lim: Vec<Value> = r
                .limit_checks
                .iter()
                .filter(|c| !c.holds)
                .map(|c| json!(c))
                .collect();
            let rc: Vec<Value> = r
                .right_continuity_checks
                .iter()
                .filter(|c| !c.holds)
                .map(|c| json!(c))
                .collect();
            let truncated = [neg.len(), lim.len(), rc.len()]
                .iter()
                .any(|&n| n > max_witnesses);
            let report = json!({
                "check": "df",
                "volumes": r.volume_checks.len(),
                "limits": r.limit_checks.len(),
                "right_continuity": r.right_continuity_checks.len(),
                "pass": r.pass,
                "negative_volumes": head(neg, max_witnesses),
                "limit_failures": head(lim, max_witnesses),
                "right_continuity_failures": head(rc, max_witnesses),
                "truncated": truncated,
            });
            (report, r.pass)
        }
        Check::Sklar => {
            let r = verify_sklar_identity(&load_df(file)?, &spec)?;
            (r.to_json(max_witnesses), r.pass)
        }
        Check::Margins => {
            let c = extract_copula(&load_df(file)?)?;
            let r = verify_uniform_margins(&c, &spec);
            (r.to_json(max_witnesses), r.pass)
        }
        Check::Copula => {
            let c = extract_copula(&load_df(file)?)?;
            let r = verify_copula_axioms(&c, cuboids, seed, &spec);
            (r.to_json(max_witnesses), r.pass)
        }
    })
}

/// Levels: `m` steps over `[c, d]` plus the critical levels. Abscissas: `m`
/// steps over the knot range widened by one on each side, plus the knots.
fn lemma_grids(g: &MonotoneFn, m: u32) -> (Vec<Scalar>, Vec<Scalar>) {
    let mut us = grid(g.lower_limit(), g.upper_limit(), m);
    us.extend(g.critical_levels());
    us.sort();
    us.dedup();
    let knots = g.knots();
    let lo = &knots[0].x - Scalar::one();
    let hi = &knots[knots.len() - 1].x + Scalar::one();
    let mut xs = grid(&lo, &hi, m);
    xs.extend(knots.iter().map(|k| k.x.clone()));
    xs.sort();
    xs.dedup();
    (us, xs)
}

fn head(mut v: Vec<Value>, n: usize) -> Vec<Value> {
    v.truncate(n);
    v
}

fn product(axes: &[Vec<Scalar>]) -> Vec<Vec<Scalar>> {
    axes.iter().fold(vec![Vec::new()], |acc, axis| {
        acc.iter()
            .flat_map(|prefix| {
                axis.iter().map(move |x| {
                    let mut p = prefix.clone();
                    p.push(x.clone());
                    p
                })
            })
            .collect()
    })
}

fn parse_list(text: &str) -> CliResult<Vec<ExtScalar>> {
    text.split(',')
        .map(|t| t.trim().parse::<ExtScalar>().map_err(CliError::from))
        .collect()
}

fn io_error(path: &Path, e: io::Error) -> CliError {
    CliError::Input(format!("{}: {e}", path.display()))
}

fn load(path: &Path) -> CliResult<Payload> {
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    Payload::from_json(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn load_fn(path: &Path) -> CliResult<MonotoneFn> {
    match load(path)? {
        Payload::Function(g) => Ok(g.to_fn()?),
        Payload::Df(_) => Err(CliError::Input(format!(
            "{}: expected a function payload, found a df",
            path.display()
        ))),
    }
}

fn load_df(path: &Path) -> CliResult<MultivariateDf> {
    match load(path)? {
        Payload::Df(f) => Ok(f.to_df()?),
        Payload::Function(_) => Err(CliError::Input(format!(
            "{}: expected a df payload, found a function",
            path.display()
        ))),
    }
}

fn emit(out: &Output, value: &Value) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).expect("json value serializes");
    text.push('\n');
    match &out.path {
        Some(path) => fs::write(path, text).map_err(|e| io_error(path, e)),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Input(format!("stdout: {e}"))),
    }
}
