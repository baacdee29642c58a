//! `deskfhe` command line: keys, encryption, evaluation, worked examples, benchmarks.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use deskfhe::worked::{self, ExampleResult, WorkedExample};
use deskfhe::FheError;

pub mod bench;
pub mod schemes;

use schemes::{Context, Scheme};

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or names: exit 2.
    Usage(String),
    /// Bad input data, files or failed checks: exit 1.
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Data(m) => write!(f, "error: {m}"),
        }
    }
}

impl From<FheError> for CliError {
    fn from(e: FheError) -> Self {
        CliError::Data(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(name = "deskfhe", version, about = "Lattice FHE at desk scale")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    #[arg(long, value_enum)]
    pub scheme: Option<Scheme>,
    /// toy or desk (bfv also has batch, tfhe has gate-toy and small).
    #[arg(long)]
    pub preset: Option<String>,
    #[arg(long, env = "FHE_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Key directory written by `keygen`.
    #[arg(long, default_value = "keys")]
    pub keys: PathBuf,
    #[arg(long = "in")]
    pub input: Vec<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write secret.json, public.json and eval.json into --out (default: --keys).
    Keygen(Common),
    /// Encrypt a JSON plaintext (slots, [re, im] pairs, or one bit for tfhe).
    Encrypt(Common),
    /// Decrypt; a second --in is a reference plaintext for the error report.
    Decrypt(Common),
    /// Apply --op add|sub|mul|rotate:H|conj|gate:NAME to the --in ciphertexts.
    Eval {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        op: String,
    },
    /// Run the built-in worked examples and print a pass/fail table.
    WorkedExamples {
        #[arg(long)]
        json: bool,
    },
    /// Time a primitive.
    Bench {
        #[arg(value_enum)]
        target: bench::Target,
        /// Ring degree for ntt, repetitions otherwise.
        #[arg(long)]
        size: Option<usize>,
        #[arg(long)]
        json: bool,
    },
}

pub fn read_file(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

pub fn write_file(path: &Path, body: &str) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::Data(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, body).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

/// Write to `--out`, or print when it is absent.
fn emit(out: &Option<PathBuf>, body: &str) -> CliResult<()> {
    match out {
        Some(p) => write_file(p, body),
        None => {
            let mut out = std::io::stdout().lock();
            match writeln!(out, "{body}") {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::Data(e.to_string())),
                _ => Ok(()),
            }
        }
    }
}

fn context_for(common: &Common) -> CliResult<Context> {
    let (scheme, preset) = match (common.scheme, &common.preset) {
        (Some(s), Some(p)) => (s, p.clone()),
        _ => {
            let header = schemes::key_header(&common.keys)?;
            let scheme = header.scheme.parse::<Scheme>().map_err(CliError::Data)?;
            if common.scheme.is_some_and(|s| s != scheme) {
                return Err(CliError::Data(format!("keys in {} are for {}", common.keys.display(), header.scheme)));
            }
            (scheme, common.preset.clone().unwrap_or(header.preset))
        }
    };
    Context::new(scheme, &preset)
}

fn one_input(common: &Common) -> CliResult<&PathBuf> {
    common.input.first().ok_or_else(|| CliError::Usage("--in is required".into()))
}

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Keygen(common) => {
            let scheme = common.scheme.ok_or_else(|| CliError::Usage("--scheme is required".into()))?;
            let preset = common.preset.clone().unwrap_or_else(|| "desk".into());
            let ctx = Context::new(scheme, &preset)?;
            let dir = common.out.clone().unwrap_or(common.keys.clone());
            let files = ctx.keygen(common.seed)?;
            for (name, body) in &files {
                write_file(&dir.join(name), body)?;
            }
            let names: Vec<&str> = files.iter().map(|(n, _)| n.as_str()).collect();
            println!("{} {}: wrote {} to {}", scheme.name(), preset, names.join(", "), dir.display());
            Ok(())
        }
        Command::Encrypt(common) => {
            let ctx = context_for(&common)?;
            let data: serde_json::Value = serde_json::from_str(&read_file(one_input(&common)?)?)
                .map_err(|e| CliError::Data(format!("plaintext: {e}")))?;
            emit(&common.out, &ctx.encrypt(&common.keys, &data, common.seed)?)
        }
        Command::Decrypt(common) => {
            let ctx = context_for(&common)?;
            let ct = read_file(one_input(&common)?)?;
            let reference = match common.input.get(1) {
                Some(p) => Some(
                    serde_json::from_str(&read_file(p)?).map_err(|e| CliError::Data(format!("reference: {e}")))?,
                ),
                None => None,
            };
            let (plain, report) = ctx.decrypt(&common.keys, &ct, reference.as_ref())?;
            emit(&common.out, &plain)?;
            if let Some(r) = report {
                if common.out.is_some() {
                    println!("{r}");
                } else {
                    eprintln!("{r}");
                }
            }
            Ok(())
        }
        Command::Eval { common, op } => {
            let ctx = context_for(&common)?;
            if common.input.is_empty() {
                return Err(CliError::Usage("--in is required".into()));
            }
            let cts = common.input.iter().map(|p| read_file(p)).collect::<CliResult<Vec<_>>>()?;
            emit(&common.out, &ctx.eval(&common.keys, &op, &cts)?)
        }
        Command::WorkedExamples { json } => {
            let results = worked::run(&worked::all());
            print!("{}", report(&results, json));
            if results.iter().all(|r| r.pass) {
                Ok(())
            } else {
                Err(CliError::Data(format!("{} worked example(s) failed", results.iter().filter(|r| !r.pass).count())))
            }
        }
        Command::Bench { target, size, json } => {
            let r = bench::run(target, size)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&r).map_err(|e| CliError::Data(e.to_string()))?);
            } else {
                println!("{}", r.line());
            }
            Ok(())
        }
    }
}

/// Table or JSON for a list of results.
pub fn report(results: &[ExampleResult], json: bool) -> String {
    if json {
        let passed = results.iter().filter(|r| r.pass).count();
        let v = serde_json::json!({ "passed": passed, "total": results.len(), "results": results });
        return serde_json::to_string_pretty(&v).unwrap_or_default() + "\n";
    }
    let mut s = String::new();
    for r in results {
        s += &format!("{}  {:<14} {:<24} {}\n", if r.pass { "ok  " } else { "FAIL" }, r.area, r.id, r.detail);
    }
    s += &format!("{}/{} passed\n", results.iter().filter(|r| r.pass).count(), results.len());
    s
}

/// Exit status for a run over `examples`: 0 when all pass.
pub fn examples_status(examples: &[WorkedExample]) -> u8 {
    if worked::run(examples).iter().all(|r| r.pass) {
        0
    } else {
        1
    }
}
