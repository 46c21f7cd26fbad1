//! `dmodp`: batch front end. Reads a JSON problem (file or stdin) or
//! builds one from flags, and prints a JSON certificate.
//!
//! Exit codes: 0 success, 1 assertion failure, 2 bad prime, 3 budget,
//! 4 parse.

mod problem;
mod run;
mod text;

use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use crate::problem::parse_problem;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Parser, Debug)]
#[command(name = "dmodp", version, about = "p-curvature, p-supports and lifting for D-modules mod p")]
struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    /// Include wall time (makes output non-reproducible).
    #[arg(long, global = true)]
    timing: bool,
    /// Pair-reduction budget; overrides the problem file and WEYL_BUDGET.
    #[arg(long, global = true)]
    budget: Option<u64>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args, Debug)]
struct Primes {
    /// Comma-separated primes.
    #[arg(short = 'p', long = "primes", value_delimiter = ',', required = true)]
    primes: Vec<u64>,
}

#[derive(Args, Debug)]
struct ModuleArgs {
    /// Cyclic module D/D·L, e.g. "d1^2 - x1".
    #[arg(long, conflicts_with_all = ["exponential", "connection"])]
    cyclic: Option<String>,
    /// Exponential module e^f, e.g. "x1^3/3".
    #[arg(long, conflicts_with = "connection")]
    exponential: Option<String>,
    /// Connection as JSON: {"n":..,"rank":..,"theta":[..]}.
    #[arg(long)]
    connection: Option<String>,
    /// Number of variables for --cyclic and --exponential.
    #[arg(short = 'n', long)]
    n: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Run a JSON problem file ("-" or nothing for stdin).
    Run { file: Option<PathBuf> },
    Pcurv {
        #[command(flatten)]
        primes: Primes,
        #[command(flatten)]
        module: ModuleArgs,
        #[arg(long)]
        lambda: bool,
    },
    Psupport {
        #[command(flatten)]
        primes: Primes,
        #[command(flatten)]
        module: ModuleArgs,
        #[arg(long)]
        lagrangian: bool,
    },
    Pcycle {
        #[command(flatten)]
        primes: Primes,
        #[command(flatten)]
        module: ModuleArgs,
    },
    Push {
        #[command(flatten)]
        primes: Primes,
        /// The finite map z ↦ π(z), written in x1.
        #[arg(long)]
        map: String,
        #[command(flatten)]
        module: ModuleArgs,
    },
    Derham {
        #[command(flatten)]
        primes: Primes,
        #[command(flatten)]
        module: ModuleArgs,
        #[arg(long, default_value_t = 10)]
        bound: u32,
    },
    DixmierVerify {
        #[command(flatten)]
        primes: Primes,
        /// A word as a JSON list of generators.
        #[arg(long)]
        word: Option<String>,
        /// Generators (JSON list) whose words up to --max-len are checked.
        #[arg(long)]
        generators: Option<String>,
        #[arg(long)]
        max_len: Option<usize>,
        #[arg(long)]
        support: bool,
    },
    LiftObstruction {
        #[command(flatten)]
        primes: Primes,
        #[command(flatten)]
        module: ModuleArgs,
        #[arg(long)]
        bound: Option<u32>,
    },
    LiftsIso {
        #[command(flatten)]
        primes: Primes,
        #[arg(short = 'n', long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        rank: usize,
        /// Base connection as JSON (default trivial).
        #[arg(long)]
        base: Option<String>,
        /// First perturbation: JSON list of n matrices.
        #[arg(long)]
        alpha1: Option<String>,
        #[arg(long)]
        alpha2: Option<String>,
        #[arg(long, default_value_t = 20)]
        bound: u32,
    },
}

/// Inline JSON given on the command line; kept as a string on failure so
/// the problem parser reports it.
fn inline(text: &str) -> std::result::Result<Value, String> {
    serde_json::from_str(text).map_err(|e| format!("inline JSON: {e}"))
}

fn module_payload(m: &ModuleArgs) -> std::result::Result<Map<String, Value>, String> {
    let mut out = Map::new();
    if let Some(c) = &m.cyclic {
        out.insert("cyclic".into(), json!(c));
    }
    if let Some(e) = &m.exponential {
        out.insert("exponential".into(), json!(e));
    }
    if let Some(c) = &m.connection {
        out.insert("connection".into(), inline(c)?);
    }
    if let Some(n) = m.n {
        out.insert("n".into(), json!(n));
    }
    Ok(out)
}

/// Turns flags into the same JSON a problem file would hold.
fn problem_from_flags(cmd: &Cmd) -> std::result::Result<Value, String> {
    let (name, primes, payload) = match cmd {
        Cmd::Run { .. } => unreachable!(),
        Cmd::Pcurv { primes, module, lambda } => {
            let mut m = module_payload(module)?;
            if *lambda {
                m.insert("lambda".into(), json!(true));
            }
            ("pcurv", primes, m)
        }
        Cmd::Psupport { primes, module, lagrangian } => {
            let mut m = module_payload(module)?;
            if *lagrangian {
                m.insert("lagrangian".into(), json!(true));
            }
            ("psupport", primes, m)
        }
        Cmd::Pcycle { primes, module } => ("pcycle", primes, module_payload(module)?),
        Cmd::Push { primes, map, module } => {
            let mut m = Map::new();
            m.insert("map".into(), json!(map));
            m.insert("source".into(), Value::Object(module_payload(module)?));
            ("push", primes, m)
        }
        Cmd::Derham { primes, module, bound } => {
            let mut m = module_payload(module)?;
            m.insert("bound".into(), json!(bound));
            ("derham", primes, m)
        }
        Cmd::DixmierVerify {
            primes,
            word,
            generators,
            max_len,
            support,
        } => {
            let mut m = Map::new();
            if let Some(w) = word {
                m.insert("word".into(), inline(w)?);
            }
            if let Some(g) = generators {
                m.insert("generators".into(), inline(g)?);
            }
            if let Some(l) = max_len {
                m.insert("max_len".into(), json!(l));
            }
            if *support {
                m.insert("support".into(), json!(true));
            }
            ("dixmier-verify", primes, m)
        }
        Cmd::LiftObstruction { primes, module, bound } => {
            let mut m = module_payload(module)?;
            if let Some(b) = bound {
                m.insert("bound".into(), json!(b));
            }
            ("lift-obstruction", primes, m)
        }
        Cmd::LiftsIso {
            primes,
            n,
            rank,
            base,
            alpha1,
            alpha2,
            bound,
        } => {
            let mut m = Map::new();
            m.insert("n".into(), json!(n));
            m.insert("rank".into(), json!(rank));
            for (key, v) in [("base", base), ("alpha1", alpha1), ("alpha2", alpha2)] {
                if let Some(v) = v {
                    m.insert(key.into(), inline(v)?);
                }
            }
            m.insert("bound".into(), json!(bound));
            ("lifts-iso", primes, m)
        }
    };
    Ok(json!({"command": name, "prime": primes.primes, "payload": payload}))
}

fn read_input(file: &Option<PathBuf>) -> std::io::Result<Vec<u8>> {
    match file {
        Some(path) if path.as_os_str() != "-" => std::fs::read(path),
        _ => {
            let mut buf = Vec::new();
            std::io::stdin().read_to_end(&mut buf)?;
            Ok(buf)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let bytes = match &cli.command {
        Cmd::Run { file } => match read_input(file) {
            Ok(b) => b,
            Err(e) => {
                eprintln!("dmodp: cannot read input: {e}");
                return ExitCode::from(4);
            }
        },
        cmd => match problem_from_flags(cmd) {
            Ok(v) => serde_json::to_vec(&v).expect("JSON value serializes"),
            Err(e) => {
                eprintln!("dmodp: parse error: {e}");
                return ExitCode::from(4);
            }
        },
    };
    let spec = match parse_problem(&bytes) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("dmodp: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let cert = run::execute(&spec, cli.budget, cli.timing);
    match cli.format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&cert.json).expect("certificate serializes")),
        Format::Text => print!("{}", text::render(&cert.json)),
    }
    ExitCode::from(cert.exit_code as u8)
}
