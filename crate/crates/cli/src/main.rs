use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qcv_cli::config::{KEYS, PRESETS};
use qcv_cli::output::{read_text, write_atomic};
use qcv_cli::{run, CliError, Config};

#[derive(Parser)]
#[command(name = "qcv", version, about = "Discrete rotating-frame n-body experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Conformance, Ω²(ε), φ(ε) and closed-form check per operator
    OpsTable(RunArgs),
    /// Solve for a relative equilibrium
    Equilibrium(RunArgs),
    /// March the restricted three-body problem (DEL, DHE or classical RK4)
    Simulate(RunArgs),
    /// DEL and DHE error norms over a scan of M
    ErrorScan(RunArgs),
    /// Convergence order of Box f towards f'
    Convergence(RunArgs),
    /// List presets and configuration keys
    Presets,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::OpsTable(_) => "ops-table",
            Command::Equilibrium(_) => "equilibrium",
            Command::Simulate(_) => "simulate",
            Command::ErrorScan(_) => "error-scan",
            Command::Convergence(_) => "convergence",
            Command::Presets => "presets",
        }
    }
}

#[derive(Args)]
struct RunArgs {
    /// Start from a named preset
    #[arg(long)]
    preset: Option<String>,
    /// key=value configuration file, applied after the preset
    #[arg(long)]
    config: Option<PathBuf>,
    /// Print the resolved configuration and exit
    #[arg(long)]
    dump_config: bool,
    /// Extra KEY=VALUE overrides
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    system: Option<String>,
    /// ';'-separated operator specs: forward, backward, central, quantum, rs(r,s), gamma(...)
    #[arg(long, allow_hyphen_values = true)]
    operators: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    eps: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    omega: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    mu: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    g: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    masses: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<String>,
    /// Initial guess as 'x,y;x,y;...'
    #[arg(long, allow_hyphen_values = true)]
    guess: Option<String>,
    /// Steps per period
    #[arg(short, long)]
    m: Option<String>,
    /// Horizon in multiples of π
    #[arg(short, long)]
    k: Option<String>,
    #[arg(long)]
    scan_stride: Option<String>,
    #[arg(long)]
    scan_count: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    delta: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    delta_prime: Option<String>,
    /// DEL, DHE or classical
    #[arg(long)]
    scheme: Option<String>,
    #[arg(long)]
    eps_list: Option<String>,
    /// Main CSV output
    #[arg(short, long)]
    out: Option<String>,
    /// Metrics CSV output (simulate)
    #[arg(long)]
    metrics: Option<String>,
}

impl RunArgs {
    fn flags(&self) -> Vec<(&'static str, &Option<String>)> {
        vec![
            ("system", &self.system),
            ("operators", &self.operators),
            ("eps", &self.eps),
            ("omega", &self.omega),
            ("beta", &self.beta),
            ("mu", &self.mu),
            ("g", &self.g),
            ("masses", &self.masses),
            ("lambda", &self.lambda),
            ("guess", &self.guess),
            ("m", &self.m),
            ("k", &self.k),
            ("scan_stride", &self.scan_stride),
            ("scan_count", &self.scan_count),
            ("delta", &self.delta),
            ("delta_prime", &self.delta_prime),
            ("scheme", &self.scheme),
            ("eps_list", &self.eps_list),
            ("out", &self.out),
            ("metrics", &self.metrics),
        ]
    }

    fn resolve(&self, command: &str) -> Result<Config, CliError> {
        let mut cfg = match &self.preset {
            Some(name) => Config::preset(name)?,
            None => Config::default(),
        };
        if let Some(path) = &self.config {
            cfg.merge_text(&read_text(path)?, &path.display().to_string())?;
        }
        for kv in &self.set {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| CliError::usage(format!("--set expects KEY=VALUE, got '{kv}'")))?;
            cfg.set(k, v)?;
        }
        for (key, value) in self.flags() {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        match cfg.command() {
            Some(c) if c != command => {
                return Err(CliError::usage(format!("configuration is for '{c}', not '{command}'")));
            }
            Some(_) => {}
            None => cfg.set("command", command)?,
        }
        Ok(cfg)
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let name = cli.command.name();
    let args = match cli.command {
        Command::OpsTable(a)
        | Command::Equilibrium(a)
        | Command::Simulate(a)
        | Command::ErrorScan(a)
        | Command::Convergence(a) => a,
        Command::Presets => {
            for (preset, text) in PRESETS {
                println!("[{preset}]\n{text}");
            }
            println!("keys:");
            for (key, default, help) in KEYS {
                println!("  {key:<12} {help} (default: {})", if default.is_empty() { "none" } else { default });
            }
            return Ok(());
        }
    };
    let cfg = args.resolve(name)?;
    if args.dump_config {
        print!("{}", cfg.dump());
        return Ok(());
    }
    let report = run(name, &cfg)?;
    for artifact in &report.artifacts {
        write_atomic(&artifact.path, &artifact.contents)?;
    }
    print!("{}", report.summary);
    for artifact in &report.artifacts {
        println!("wrote {}", artifact.path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qcv: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
