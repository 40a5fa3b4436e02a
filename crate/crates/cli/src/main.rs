use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use cyclic_cntx::ingest::{
    counts_n, counts_to_spec, emit_report, emit_spec, parse_counts, parse_spec, witness_value,
};
use cyclic_cntx::lp_oracle::DEFAULT_LIMIT;
use cyclic_cntx::rational::{frac, int, to_decimal_string, to_fraction_string};
use cyclic_cntx::{cntx, optimal_connection_vector, AnalysisReport, Error, Oracle, SystemSpec};
use serde_json::Value;

mod verify;

/// Exit statuses shared by every subcommand.
mod status {
    pub const OK: u8 = 0;
    pub const FAILED: u8 = 1;
    pub const INVALID: u8 = 2;
    pub const RESOURCE: u8 = 3;
    pub const CONTEXTUAL: u8 = 10;
}

#[derive(Parser)]
#[command(
    name = "cntx",
    version,
    about = "Exact contextuality analysis for cyclic systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute Δ0, Δmin and the contextuality measure of a system.
    ///
    /// Exits 0 for a noncontextual system, 10 for a contextual one and 2 on
    /// invalid input.
    Analyze {
        path: PathBuf,
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Solve for an optimal coupling of the whole system and print it.
    Witness {
        path: PathBuf,
        #[command(flatten)]
        input: InputArgs,
        /// Largest n the exact solver accepts.
        #[arg(long, default_value_t = DEFAULT_LIMIT)]
        limit: usize,
    },
    /// Compare the closed form with the exact solver on random systems.
    Verify {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_LIMIT)]
        limit: usize,
        /// Draw only contextual systems.
        #[arg(long)]
        contextual: bool,
    },
    /// Print a named system as a spec document.
    Preset { name: Preset },
}

#[derive(clap::Args)]
struct InputArgs {
    /// Read a counts table instead of a spec document.
    #[arg(long)]
    counts: bool,
    /// Number of contexts of a counts table (default: the largest context).
    #[arg(long, requires = "counts")]
    n: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    PrBox,
    ChshClassical,
    ChshTsirelson,
    LeggettGargMax,
    KcbsMax,
}

impl Preset {
    fn spec(self) -> SystemSpec {
        let products = match self {
            Preset::PrBox => vec![int(1), int(1), int(1), int(-1)],
            Preset::ChshClassical => vec![int(1); 4],
            Preset::ChshTsirelson => {
                let t = frac(7071, 10000);
                vec![t.clone(), t.clone(), t.clone(), -t]
            }
            Preset::LeggettGargMax => vec![int(1), int(1), int(-1)],
            Preset::KcbsMax => vec![int(-1); 5],
        };
        SystemSpec::unbiased(&products).expect("presets are valid")
    }
}

/// Prints `err` on stderr and maps it to an exit status.
fn fail(err: &Error) -> u8 {
    match err {
        Error::InvalidSystem(violations) => {
            eprintln!("error: invalid system ({} violation(s))", violations.len());
            for v in violations {
                eprintln!("  {v}");
            }
            status::INVALID
        }
        Error::Resource { .. } => {
            eprintln!("error: {err}");
            status::RESOURCE
        }
        Error::Internal(_) => {
            eprintln!("error: {err}");
            status::FAILED
        }
        _ => {
            eprintln!("error: {err}");
            status::INVALID
        }
    }
}

fn load(path: &Path, input: &InputArgs) -> Result<SystemSpec, u8> {
    let text = fs::read_to_string(path).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", path.display());
        status::INVALID
    })?;
    let spec = if input.counts {
        let records = parse_counts(&text).map_err(|e| fail(&e))?;
        let n = input.n.or_else(|| counts_n(&records)).ok_or_else(|| {
            eprintln!("error: {}: empty counts table", path.display());
            status::INVALID
        })?;
        counts_to_spec(&records, n)
    } else {
        parse_spec(&text)
    };
    let spec = spec.map_err(|e| fail(&e))?;
    spec.ensure_valid().map_err(|e| fail(&e))?;
    Ok(spec)
}

fn text_report(r: &AnalysisReport) -> String {
    let q = |x: &cyclic_cntx::Rational| {
        format!("{} ({})", to_fraction_string(x), to_decimal_string(x, 12))
    };
    let conns: Vec<String> = r
        .optimal_connections
        .values
        .iter()
        .map(to_fraction_string)
        .collect();
    let signs: Vec<String> = r.canonical_signs.iter().map(|s| format!("{s:+}")).collect();
    [
        format!("n                   {}", r.n),
        format!("delta0              {}", q(&r.delta0)),
        format!("delta_min           {}", q(&r.delta_min)),
        format!("cntx                {}", q(&r.cntx)),
        format!("contextual          {}", r.contextual),
        format!("s1(products)        {}", q(&r.s1_bunches)),
        format!("criterion lhs       {}", q(&r.main_criterion_lhs)),
        format!("delta_min branch    {}", r.argmax_branch.as_str()),
        format!("canonical signs     {}", signs.join(" ")),
        format!("optimal connections {}", conns.join(" ")),
    ]
    .join("\n")
}

fn analyze(path: &Path, input: &InputArgs, format: Format) -> u8 {
    let spec = match load(path, input) {
        Ok(s) => s,
        Err(code) => return code,
    };
    let report = match cntx(&spec) {
        Ok(r) => r,
        Err(e) => return fail(&e),
    };
    match format {
        Format::Json => println!("{}", emit_report(&report)),
        Format::Text => println!("{}", text_report(&report)),
    }
    if report.contextual {
        status::CONTEXTUAL
    } else {
        status::OK
    }
}

fn witness(path: &Path, input: &InputArgs, limit: usize) -> u8 {
    let spec = match load(path, input) {
        Ok(s) => s,
        Err(code) => return code,
    };
    let oracle = Oracle::with_limit(limit);
    if spec.n() > oracle.limit() {
        return fail(&Error::Resource {
            n: spec.n(),
            limit: oracle.limit(),
        });
    }
    let (delta_min, pmf) = match oracle.min_delta(&spec) {
        Ok(r) => r,
        Err(e) => return fail(&e),
    };
    let optimal = match optimal_connection_vector(&spec) {
        Ok(v) => v,
        Err(e) => return fail(&e),
    };
    let mut doc = witness_value(&pmf);
    doc.insert(
        "delta_min".into(),
        Value::String(to_fraction_string(&delta_min)),
    );
    doc.insert(
        "optimal_connections".into(),
        Value::Array(
            optimal
                .values
                .iter()
                .map(|c| Value::String(to_fraction_string(c)))
                .collect(),
        ),
    );
    println!("{}", Value::Object(doc));
    status::OK
}

fn preset(name: Preset) -> u8 {
    if let Preset::ChshTsirelson = name {
        eprintln!("note: 1/sqrt(2) is replaced by the rational 7071/10000");
    }
    println!("{}", emit_spec(&name.spec()));
    status::OK
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Analyze {
            path,
            input,
            format,
        } => analyze(&path, &input, format),
        Command::Witness { path, input, limit } => witness(&path, &input, limit),
        Command::Verify {
            n,
            trials,
            seed,
            limit,
            contextual,
        } => verify::run(n, trials, seed, limit, contextual),
        Command::Preset { name } => preset(name),
    };
    ExitCode::from(code)
}
