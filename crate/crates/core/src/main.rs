use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use pml_sem::model::Model;
use pml_sem::state::SystemState;
use pml_sem::system::{program_fixpoint, sem_prog, Options};
use pml_sem::{compare, dump, oracle, Error};

#[derive(Parser, Debug)]
#[command(name = "pml-sem", version, about = "Bottom-up denotational semantics for a PROMELA fragment")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    bounds: Bounds,
}

#[derive(Args, Debug)]
struct Bounds {
    /// Program fixpoint iterations (spawn nesting depth).
    #[arg(long, global = true, env = "PML_SEM_K", default_value_t = 4)]
    k: u32,
    /// Kleene iterations per process.
    #[arg(long, global = true, env = "PML_SEM_DEPTH", default_value_t = 16)]
    depth: u32,
    /// Interleaving steps.
    #[arg(long, global = true, env = "PML_SEM_FUEL", default_value_t = 32)]
    fuel: u32,
    /// Longest state sequence reported.
    #[arg(long = "max-seq-len", visible_alias = "max-len", global = true, env = "PML_SEM_MAX_LEN", default_value_t = 16)]
    max_seq_len: u32,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Drop atomic suspension branches that no state can take.
    #[arg(long, global = true)]
    prune_unsat: bool,
    /// Allow unpaired rendezvous steps in the interleaving.
    #[arg(long, global = true)]
    literal_interlv: bool,
    /// Emit control flow graphs in DOT.
    #[arg(long, global = true)]
    dot: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check and summarize the program.
    Parse { input: PathBuf },
    /// Control flow graph of every process.
    Cfg { input: PathBuf },
    /// Trace sets of the program fixpoint.
    Traces { input: PathBuf },
    /// State sequences of the denotational pipeline.
    Run { input: PathBuf },
    /// State sequences of the operational interpreter.
    Oracle { input: PathBuf },
    /// Compare both pipelines.
    Compare { input: PathBuf },
}

impl Command {
    fn input(&self) -> &PathBuf {
        match self {
            Command::Parse { input }
            | Command::Cfg { input }
            | Command::Traces { input }
            | Command::Run { input }
            | Command::Oracle { input }
            | Command::Compare { input } => input,
        }
    }
}

enum Failure {
    Static(String),
    Contract(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::System(e) => Failure::Contract(e.to_string()),
            e => Failure::Static(e.to_string()),
        }
    }
}

impl From<pml_sem::system::SystemError> for Failure {
    fn from(e: pml_sem::system::SystemError) -> Self {
        Failure::from(Error::from(e))
    }
}

impl From<pml_sem::denote::DenoteError> for Failure {
    fn from(e: pml_sem::denote::DenoteError) -> Self {
        Failure::from(Error::from(e))
    }
}

fn emit(format: Format, text: String, json: serde_json::Value) {
    let body = match format {
        Format::Text => text,
        Format::Json => serde_json::to_string_pretty(&json).expect("serializable output") + "\n",
    };
    let mut out = std::io::stdout().lock();
    if let Err(e) = out.write_all(body.as_bytes()).and_then(|_| out.flush()) {
        if e.kind() != std::io::ErrorKind::BrokenPipe {
            log::error!("writing output: {e}");
        }
    }
}

fn execute(cli: &Cli) -> Result<bool, Failure> {
    let path = cli.command.input();
    let src = std::fs::read_to_string(path).map_err(|e| Failure::Static(format!("{}: {e}", path.display())))?;
    let model = Model::from_source(&src)?;
    let b = &cli.bounds;
    let opts = Options { prune_unsat: b.prune_unsat, literal_interlv: b.literal_interlv };
    let sigma0 = SystemState::new();
    log::info!("k={} depth={} fuel={} max_seq_len={}", b.k, b.depth, b.fuel, b.max_seq_len);
    match &cli.command {
        Command::Parse { .. } => emit(b.format, dump::parse_text(&model), dump::parse_json(&model)),
        Command::Cfg { .. } => emit(b.format, dump::cfg_text(&model, b.dot), dump::cfg_json(&model)),
        Command::Traces { .. } => {
            let interp = program_fixpoint(&model, b.k, b.depth, opts)?;
            emit(b.format, dump::traces_text(&interp), dump::traces_json(&interp));
        }
        Command::Run { .. } => {
            let p = sem_prog(&model, &sigma0, b.k, b.depth, b.fuel.min(b.max_seq_len), opts)?;
            emit(b.format, dump::run_text(&model, &p), dump::run_json(&model, &p));
        }
        Command::Oracle { .. } => {
            let r = oracle::run_bounded(&model, &sigma0, b.max_seq_len as usize);
            emit(b.format, dump::oracle_text(&model, &r), dump::oracle_json(&model, &r));
        }
        Command::Compare { .. } => {
            let r = compare::compare(&model, &sigma0, b.k, b.depth, b.max_seq_len, opts)?;
            emit(b.format, dump::compare_text(&model, &r), dump::compare_json(&model, &r));
            return Ok(r.matches());
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(4),
        Err(Failure::Static(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Contract(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
    }
}
