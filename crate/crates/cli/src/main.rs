use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mfg_core::equilibrium::output::{equilibria_to_string, load_equilibria, round12, save_equilibria, EquilibriumFile};
use mfg_core::library::{consumer_model, consumer_reference, corruption_model, ConsumerParams, CorruptionParams};
use mfg_core::{
    load_model, optimal_action_sets, save_model, solve, validate_model, verify_equilibrium, MfgError, ModelSpec,
    PopulationDistribution, SearchConfig, DEFAULT_TIE_TOL,
};

#[derive(Parser)]
#[command(name = "mfg", version, about = "Stationary equilibria of finite-state mean field games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Search for all stationary equilibria of a model
    Solve(SolveArgs),
    /// Re-certify every record of an equilibrium file
    Verify {
        model: PathBuf,
        equilibria: PathBuf,
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
    },
    /// Print V*(m), the optimal action sets and D(m)
    Value {
        model: PathBuf,
        /// Comma-separated population distribution
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        m: Vec<f64>,
        #[arg(long, default_value_t = DEFAULT_TIE_TOL)]
        tie_tol: f64,
    },
    /// Write a built-in model
    #[command(subcommand)]
    Example(Example),
    /// Check conservativeness and finiteness of a model on sample points
    Validate {
        model: PathBuf,
        #[arg(long, default_value_t = 64)]
        samples: usize,
    },
}

#[derive(Args)]
struct SolveArgs {
    model: PathBuf,
    /// Output file; defaults to standard output
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Grid resolution per simplex edge (default depends on the number of states)
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long, default_value_t = 32)]
    multistart: usize,
    #[arg(long, default_value_t = 0.5)]
    damping: f64,
    #[arg(long, default_value_t = 1e-8)]
    tie_tol: f64,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long, default_value_t = 1e-6)]
    dedup_radius: f64,
    /// Worker threads, 0 for all cores; MFG_THREADS overrides
    #[arg(long, default_value_t = 0)]
    threads: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Example {
    /// Two-provider consumer choice model; also writes `<stem>.reference.json`
    Consumer {
        #[arg(long, default_value_t = 1.0)]
        b: f64,
        #[arg(long, default_value_t = 0.2)]
        epsilon: f64,
        #[arg(long, default_value_t = 0.5)]
        beta: f64,
        #[arg(long, default_value_t = 0.5)]
        c: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        s1: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        s2: f64,
        #[arg(long, default_value_t = 1e-6)]
        delta: f64,
        #[arg(short, long, default_value = "consumer.json")]
        out: PathBuf,
    },
    /// Three-state corruption model
    Corruption {
        #[arg(long, default_value_t = 0.3)]
        b: f64,
        #[arg(long, default_value_t = 1.0)]
        q_inf: f64,
        #[arg(long, default_value_t = 2.0)]
        q_soc: f64,
        #[arg(long, default_value_t = 0.5)]
        r: f64,
        #[arg(long, default_value_t = 0.3)]
        beta: f64,
        #[arg(short, long, default_value = "corruption.json")]
        out: PathBuf,
    },
}

enum Failure {
    /// Bad input: exit status 2.
    Input(String),
    /// A check did not pass: exit status 1.
    Check(String),
}

impl From<MfgError> for Failure {
    fn from(e: MfgError) -> Self {
        match e {
            MfgError::MalformedModel(_)
            | MfgError::InvalidDistribution(_)
            | MfgError::InvalidStrategy(_)
            | MfgError::InvalidParams(_)
            | MfgError::Io(_)
            | MfgError::Parse(_) => Failure::Input(e.to_string()),
            _ => Failure::Check(e.to_string()),
        }
    }
}

fn num(x: f64) -> String {
    format!("{}", round12(x))
}

fn vec_str(v: &[f64]) -> String {
    format!("[{}]", v.iter().map(|&x| num(x)).collect::<Vec<_>>().join(", "))
}

fn threads(flag: usize) -> Result<usize, Failure> {
    match std::env::var("MFG_THREADS") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Failure::Input(format!("MFG_THREADS: expected a non-negative integer, got {v:?}"))),
        Err(_) => Ok(flag),
    }
}

fn load(path: &Path) -> Result<ModelSpec, Failure> {
    load_model(path).map_err(|e| match e {
        MfgError::Io(_) => Failure::Input(e.to_string()),
        _ => Failure::Input(format!("{}: {e}", path.display())),
    })
}

fn run_solve(args: SolveArgs) -> Result<(), Failure> {
    let model = load(&args.model)?;
    let cfg = SearchConfig {
        grid: args.grid,
        multistart: args.multistart,
        damping: args.damping,
        tie_tol: args.tie_tol,
        tol: args.tol,
        dedup_radius: args.dedup_radius,
        threads: threads(args.threads)?,
        seed: args.seed,
        ..Default::default()
    };
    cfg.validate()?;
    let report = solve(&model, &cfg)?;
    let file = EquilibriumFile::from_report(&report);
    match &args.output {
        Some(path) => save_equilibria(path, &file)?,
        None => println!("{}", equilibria_to_string(&file)),
    }
    eprintln!(
        "{} equilibria ({} pure, {} mixed), {} warning(s), {} unconverged run(s)",
        report.equilibria.len(),
        report.pure().count(),
        report.mixed().count(),
        report.warnings.len(),
        report.failures.len()
    );
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    Ok(())
}

fn run_verify(model: &Path, equilibria: &Path, tol: f64) -> Result<(), Failure> {
    let model = load(model)?;
    let file = load_equilibria(equilibria).map_err(|e| Failure::Input(format!("{}: {e}", equilibria.display())))?;
    let mut failed = 0;
    for (k, rec) in file.equilibria.iter().enumerate() {
        let field = |e: MfgError| Failure::Input(format!("equilibria[{k}]: {e}"));
        let m = rec.distribution().map_err(field)?;
        let pi = rec.strategy().map_err(field)?;
        if m.len() != model.num_states()
            || pi.num_states() != model.num_states()
            || pi.num_actions() != model.num_actions()
        {
            return Err(Failure::Input(format!("equilibria[{k}]: dimensions do not match the model")));
        }
        let cert = verify_equilibrium(&model, &m, &pi, tol);
        let status = if cert.passed() { "ok" } else { "FAIL" };
        println!(
            "[{k}] {status} {} m = {} stationarity = {} gap = {} support_ok = {}",
            cert.kind.as_str(),
            vec_str(m.as_slice()),
            num(cert.stationarity_residual),
            num(cert.optimality_gap),
            cert.support_ok
        );
        if !cert.passed() {
            failed += 1;
        }
    }
    if failed > 0 {
        return Err(Failure::Check(format!("{failed} of {} record(s) failed verification", file.equilibria.len())));
    }
    Ok(())
}

fn run_value(model: &Path, m: Vec<f64>, tie_tol: f64) -> Result<(), Failure> {
    let model = load(model)?;
    let m = PopulationDistribution::new(m).map_err(|e| Failure::Input(format!("--m: {e}")))?;
    if m.len() != model.num_states() {
        return Err(Failure::Input(format!("--m: expected {} components, got {}", model.num_states(), m.len())));
    }
    let opt = optimal_action_sets(&model, &m, tie_tol)?;
    println!("V* = {}", vec_str(opt.value.as_slice()));
    for (i, set) in opt.action_sets.iter().enumerate() {
        let names: Vec<&str> = set.iter().map(|&a| model.action_name(a)).collect();
        println!("O_{} ({}) = {{{}}}", i + 1, model.state_name(i), names.join(", "));
    }
    let d: Vec<String> = opt.det_optimal().iter().map(|d| d.label(&model)).collect();
    println!("D(m) = {{{}}}", d.join(", "));
    Ok(())
}

fn run_example(ex: Example) -> Result<(), Failure> {
    match ex {
        Example::Consumer { b, epsilon, beta, c, s1, s2, delta, out } => {
            let p = ConsumerParams { b, epsilon, beta, c, s1, s2, delta };
            save_model(&consumer_model(&p)?, &out)?;
            let reference = consumer_reference(&p)?;
            let ref_path = out.with_file_name(format!(
                "{}.reference.json",
                out.file_stem().map_or("consumer".into(), |s| s.to_string_lossy())
            ));
            let text = serde_json::to_string_pretty(&reference).expect("reference serialises");
            std::fs::write(&ref_path, text + "\n").map_err(MfgError::from)?;
            println!("wrote {} and {} (case {:?})", out.display(), ref_path.display(), reference.case);
        }
        Example::Corruption { b, q_inf, q_soc, r, beta, out } => {
            let p = CorruptionParams { b, q_inf, q_soc, r, beta };
            save_model(&corruption_model(&p)?, &out)?;
            println!("wrote {}", out.display());
        }
    }
    Ok(())
}

fn run_validate(model: &Path, samples: usize) -> Result<(), Failure> {
    let model = load(model)?;
    let report = validate_model(&model, samples);
    for (i, a) in &report.autocompleted {
        println!("diagonal Q[{},{},{}] filled in from the row sum", i + 1, i + 1, a + 1);
    }
    if report.passed() {
        println!("valid: {} sample point(s) checked", report.samples);
        return Ok(());
    }
    for v in &report.violations {
        println!("{v}");
    }
    Err(Failure::Check(format!("{} violation(s)", report.violations.len())))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(args) => run_solve(args),
        Command::Verify { model, equilibria, tol } => run_verify(&model, &equilibria, tol),
        Command::Value { model, m, tie_tol } => run_value(&model, m, tie_tol),
        Command::Example(ex) => run_example(ex),
        Command::Validate { model, samples } => run_validate(&model, samples),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
