use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use opindex::domination::DominationConfig;
use serde_json::json;

mod commands;

use commands::{CliError, Report};

#[derive(Parser)]
#[command(name = "opindex", version, about = "Ordinals, Schreier families, finite norms and operator index probes")]
struct Cli {
    /// Print one JSON object instead of a text table.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// `ord <a> + <b>`, `ord <a> * <b>`, `ord <a>` or `ord fund <a> <n>`.
    Ord {
        #[arg(required = true, num_args = 1..=3, allow_hyphen_values = true)]
        args: Vec<String>,
    },
    #[command(subcommand)]
    Tree(TreeCmd),
    #[command(subcommand)]
    Family(FamilyCmd),
    /// Norm of a vector, e.g. `norm 'schreier(1,4)' '[1,1,1,1]'`.
    Norm {
        descriptor: String,
        vector: String,
        /// Widest acceptable certified interval.
        #[arg(long, default_value_t = opindex::spaces::DEFAULT_TOLERANCE)]
        tolerance: f64,
    },
    /// Least K with (xs) dominated by (ys) with constant K.
    Dominate {
        x_space: String,
        xs: String,
        y_space: String,
        ys: String,
        #[command(flatten)]
        budget: DominationFlags,
    },
    #[command(subcommand)]
    Index(IndexCmd),
    /// Run acceptance criteria: `all`, a suite name, or a criterion number.
    Verify {
        #[arg(default_value = "all")]
        suite: String,
    },
}

#[derive(Args, Clone)]
struct DominationFlags {
    #[arg(long, default_value_t = opindex::polytope::DEFAULT_VERTEX_CAP)]
    vertex_cap: usize,
    #[arg(long, default_value_t = opindex::exact::DEFAULT_PRECISION_BITS)]
    bits: u32,
    /// Starts for the local ascent lower bound.
    #[arg(long, default_value_t = DominationConfig::default().starts)]
    starts: usize,
    #[arg(long, default_value_t = DominationConfig::default().seed)]
    seed: u64,
}

#[derive(Subcommand)]
enum TreeCmd {
    /// Rank of a finite tree stored as a JSON list of integer sequences.
    /// Without `[]` the file is read as a B-tree.
    Rank { file: std::path::PathBuf },
    /// Membership of a sequence of ordinals in the minimal tree `T_xi`.
    MtMember { xi: String, seq: String },
}

#[derive(Subcommand)]
enum FamilyCmd {
    Member {
        expr: String,
        set: String,
    },
    /// Cantor-Bendixson index of the family restricted to {1..n}.
    Rank {
        expr: String,
        n: u32,
    },
    /// Search for m_1 < ... < m_depth <= cap mapping members of F into G.
    Gasparis {
        f: String,
        g: String,
        #[arg(long, default_value_t = 5)]
        depth: u32,
        #[arg(long, default_value_t = 30)]
        cap: u32,
        #[arg(long, default_value_t = commands::DEFAULT_PREFIX_BUDGET)]
        budget: u64,
    },
}

#[derive(Args, Clone)]
struct OperatorArgs {
    /// Row-major matrix, e.g. `[[1,0],[0,1/2]]`.
    matrix: String,
    #[arg(long)]
    domain: String,
    /// Defaults to the domain.
    #[arg(long)]
    codomain: Option<String>,
    #[arg(long, default_value = "1")]
    k: String,
}

#[derive(Subcommand)]
enum IndexCmd {
    /// Deepest chain of the non-preservation tree within the candidate pool.
    NpProbe {
        #[command(flatten)]
        op: OperatorArgs,
        /// Exponent of the target basis.
        #[arg(long, default_value = "1")]
        p: String,
        #[arg(long, default_value_t = opindex::indices::DEFAULT_MAX_DEPTH)]
        max_depth: usize,
        #[arg(long, default_value_t = opindex::indices::DEFAULT_SEARCH_BUDGET)]
        budget: u64,
        /// Candidate pool; defaults to unit vectors and normalized differences.
        #[arg(long)]
        pool: Option<String>,
        /// Close the pool under one level of p-absolutely convex blocks.
        #[arg(long)]
        blocks: bool,
    },
    SsMember {
        #[command(flatten)]
        op: OperatorArgs,
        xs: String,
    },
    WcMember {
        #[command(flatten)]
        op: OperatorArgs,
        xs: String,
    },
    /// Spreading-model certificate along S_xi for the given vectors.
    SmCert {
        space: String,
        xs: String,
        #[arg(long, default_value = "1")]
        p: String,
        #[arg(long, default_value = "1")]
        xi: String,
        #[arg(long, default_value = "1")]
        a: String,
        #[arg(long, default_value = "1")]
        b: String,
    },
}

fn dispatch(cmd: Command) -> Result<Report, CliError> {
    match cmd {
        Command::Ord { args } => commands::ord(&args),
        Command::Tree(TreeCmd::Rank { file }) => commands::tree_rank(&file),
        Command::Tree(TreeCmd::MtMember { xi, seq }) => commands::mt_member(&xi, &seq),
        Command::Family(FamilyCmd::Member { expr, set }) => commands::family_member(&expr, &set),
        Command::Family(FamilyCmd::Rank { expr, n }) => commands::family_rank(&expr, n),
        Command::Family(FamilyCmd::Gasparis { f, g, depth, cap, budget }) => commands::gasparis(&f, &g, depth, cap, budget),
        Command::Norm { descriptor, vector, tolerance } => commands::norm(&descriptor, &vector, tolerance),
        Command::Dominate { x_space, xs, y_space, ys, budget } => {
            let cfg = DominationConfig {
                bits: budget.bits,
                vertex_cap: budget.vertex_cap,
                starts: budget.starts,
                seed: budget.seed,
            };
            commands::dominate(&x_space, &xs, &y_space, &ys, &cfg)
        }
        Command::Index(IndexCmd::NpProbe { op, p, max_depth, budget, pool, blocks }) => {
            let a = commands::operator(&op.matrix, &op.domain, op.codomain.as_deref())?;
            commands::np_probe(&a, &op.k, &p, max_depth, budget, pool.as_deref(), blocks)
        }
        Command::Index(IndexCmd::SsMember { op, xs }) => {
            let a = commands::operator(&op.matrix, &op.domain, op.codomain.as_deref())?;
            commands::ss_member(&a, &op.k, &xs)
        }
        Command::Index(IndexCmd::WcMember { op, xs }) => {
            let a = commands::operator(&op.matrix, &op.domain, op.codomain.as_deref())?;
            commands::wc_member(&a, &op.k, &xs)
        }
        Command::Index(IndexCmd::SmCert { space, xs, p, xi, a, b }) => commands::sm_cert(&space, &xs, &p, &xi, &a, &b),
        Command::Verify { suite } => commands::verify(&suite),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    // The arguments minus `--json`; re-running them reproduces the payload.
    let argv: Vec<String> = std::env::args().skip(1).filter(|a| a != "--json").collect();
    let start = Instant::now();
    let result = dispatch(cli.command);
    let timing_ms = start.elapsed().as_millis() as u64;
    match result {
        Ok(report) => {
            if cli.json {
                let payload = json!({ "argv": argv, "inputs": report.inputs, "result": report.result });
                let out = json!({ "status": "ok", "command": report.command, "payload": payload, "timing_ms": timing_ms });
                println!("{out}");
            } else {
                print!("{}", report.text());
            }
            if report.success {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            if cli.json {
                let out = json!({ "status": "error", "code": e.code(), "message": e.to_string(), "timing_ms": timing_ms });
                println!("{out}");
            } else {
                eprintln!("error[{}]: {e}", e.code());
            }
            ExitCode::from(e.exit_code())
        }
    }
}
