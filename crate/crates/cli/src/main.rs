use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use keyagree::audit::{conditional_uniformity, AuditOptions};
use keyagree::harness::plan::{summarize, write_csv, TrialRow};
use keyagree::harness::{run_plan, run_trials, Exec, ExperimentPlan, SweepAxes};
use keyagree::hashext::Eps;
use keyagree::infoprofile::{parse_rational, ComplexityProfile};
use keyagree::protocols::{Margins, Protocol, SessionConfig};
use keyagree::rateregion::describe;
use keyagree::sources::CorrelationModel;

/// Secret-key agreement laboratory.
#[derive(Parser, Debug)]
#[command(name = "keyagree", version)]
struct Cli {
    /// Master seed for every random stream.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output file (simulate, rates, audit) or directory (sweep).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    quiet: bool,
    /// File of `flag value` lines, applied before the command line.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Run trials on one thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run sessions and write one CSV row per trial.
    Simulate(SessionArgs),
    /// Print the rate region, CO, optimal rates and key capacity of a profile file.
    Rates {
        #[arg(long)]
        profile: PathBuf,
    },
    /// Audit key uniformity given the eavesdropper's view.
    Audit {
        #[command(flatten)]
        session: SessionArgs,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, default_value_t = 0.05)]
        max_tv: f64,
        #[arg(long, default_value_t = 30)]
        min_stratum: usize,
    },
    /// Run a grid of configurations; writes per-group CSVs and summary.csv.
    Sweep {
        #[command(flatten)]
        session: SessionArgs,
        /// Comma-separated values of n.
        #[arg(long = "n", value_delimiter = ',')]
        n_values: Vec<usize>,
        /// Comma-separated values of t (hamming models).
        #[arg(long = "t", value_delimiter = ',')]
        t_values: Vec<usize>,
        /// Comma-separated error bounds; replaces --eps.
        #[arg(long = "eps-list", value_delimiter = ',')]
        eps_list: Vec<String>,
    },
}

#[derive(Args, Debug)]
struct SessionArgs {
    /// e.g. `line-point:n=16`, `hamming:n=31,t=2`, `triple:n=16`, `identical:n=16`.
    #[arg(long)]
    model: String,
    /// light, two-phase, omniscience or syndrome.
    #[arg(long)]
    protocol: String,
    /// `p/q`, `2^-e` or a decimal.
    #[arg(long, default_value = "2^-8")]
    eps: String,
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    /// Profile uncertainty, as a rational.
    #[arg(long, default_value = "0")]
    sigma: String,
    #[arg(long)]
    margin_k: Option<usize>,
    #[arg(long)]
    margin_phase1: Option<usize>,
    #[arg(long)]
    margin_deficiency: Option<usize>,
    /// Syndrome length for random codes.
    #[arg(long)]
    syndrome_rows: Option<usize>,
}

impl SessionArgs {
    fn config(&self, seed: u64) -> Result<SessionConfig> {
        self.build(seed).with_context(|| format!("session {} with {}", self.model, self.protocol))
    }

    fn build(&self, seed: u64) -> Result<SessionConfig> {
        let model: CorrelationModel = self.model.parse()?;
        let protocol: Protocol = self.protocol.parse()?;
        let eps: Eps = self.eps.parse()?;
        let mut c = SessionConfig::new(model, protocol, eps, seed);
        c.sigma = parse_rational(&self.sigma)?;
        let std = c.margins();
        if self.margin_k.is_some() || self.margin_phase1.is_some() || self.margin_deficiency.is_some() {
            c.margins = Some(Margins {
                k: self.margin_k.unwrap_or(std.k),
                phase1: self.margin_phase1.unwrap_or(std.phase1),
                deficiency: self.margin_deficiency.unwrap_or(std.deficiency),
            });
        }
        c.syndrome_rows = self.syndrome_rows;
        c.validate()?;
        Ok(c)
    }
}

const COMMANDS: [&str; 4] = ["simulate", "rates", "audit", "sweep"];

/// Reads `flag value` (or `flag=value`) lines into argument tokens. A bare flag,
/// or one set to `true`, becomes a switch; `false` drops it. Flags listed in
/// `skip` are dropped.
fn config_tokens(path: &Path, skip: &[&str]) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    let mut out = Vec::new();
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
        let (name, value) = match line.split_once(['=', ' ', '\t']) {
            Some((n, v)) => (n.trim(), Some(v.trim().trim_start_matches('=').trim())),
            None => (line, None),
        };
        let flag = format!("--{}", name.trim_start_matches('-').replace('_', "-"));
        if skip.contains(&flag.as_str()) {
            continue;
        }
        match value {
            None | Some("true") => out.push(flag),
            Some("false") => {}
            Some(v) => {
                out.push(flag);
                out.push(v.to_string());
            }
        }
    }
    Ok(out)
}

/// Splices config-file tokens in right after the subcommand; flags given on the
/// command line take precedence.
fn expand_args(args: Vec<String>) -> Result<Vec<String>> {
    let mut config = None;
    for (i, a) in args.iter().enumerate() {
        if a == "--config" {
            config = args.get(i + 1).cloned();
        } else if let Some(p) = a.strip_prefix("--config=") {
            config = Some(p.to_string());
        }
    }
    let Some(path) = config else { return Ok(args) };
    let given: Vec<&str> = args.iter().filter(|a| a.starts_with("--")).map(|a| a.split('=').next().unwrap_or(a)).collect();
    let tokens = config_tokens(Path::new(&path), &given)?;
    let at = args.iter().position(|a| COMMANDS.contains(&a.as_str())).map_or(args.len(), |i| i + 1);
    let mut out = args[..at].to_vec();
    out.extend(tokens);
    out.extend_from_slice(&args[at..]);
    Ok(out)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn run(cli: Cli) -> Result<()> {
    let exec = if cli.sequential { Exec::Sequential } else { Exec::Parallel };
    let say = |s: &str| {
        if !cli.quiet {
            println!("{s}");
        }
    };
    match &cli.command {
        Command::Simulate(args) => {
            let config = args.config(cli.seed)?;
            let outcomes = run_trials(&config, args.trials, exec)?;
            if let Some(out) = &cli.out {
                let rows: Vec<TrialRow> =
                    outcomes.iter().enumerate().map(|(i, o)| TrialRow::from_outcome(i as u64, o)).collect();
                write_csv(out, &rows)?;
            }
            let s = summarize("simulate", &config, &outcomes)?;
            say(&format!(
                "{} {} eps={} trials={} agreement={:.4} key_len={} (target {}) comm_bits={:.1} message_bits={:.1} (target {})",
                s.model, s.protocol, s.eps, s.trials, s.agreement_rate, s.key_len, s.target_key_len,
                s.mean_comm_bits, s.mean_message_bits, s.target_comm
            ));
        }
        Command::Rates { profile } => {
            let text = fs::read_to_string(profile).with_context(|| format!("reading profile {}", profile.display()))?;
            let report = describe(&ComplexityProfile::parse(&text)?)?;
            if let Some(out) = &cli.out {
                write_text(out, &report)?;
            }
            say(report.trim_end());
        }
        Command::Audit { session, report, max_tv, min_stratum } => {
            let config = session.config(cli.seed)?;
            let opts = AuditOptions { exec, max_tv: *max_tv, min_stratum: *min_stratum };
            let r = conditional_uniformity(&config, session.trials, &opts)?;
            let text = r.to_record_string();
            if let Some(path) = report.as_ref().or(cli.out.as_ref()) {
                write_text(path, &text)?;
            }
            say(text.trim_end());
        }
        Command::Sweep { session, n_values, t_values, eps_list } => {
            let base = session.config(cli.seed)?;
            let eps = eps_list.iter().map(|e| e.parse::<Eps>()).collect::<Result<Vec<_>, _>>()?;
            let axes = SweepAxes { n: n_values.clone(), t: t_values.clone(), eps, trials: session.trials };
            let Some(dir) = &cli.out else { bail!("sweep needs --out <directory>") };
            let plan = ExperimentPlan::sweep(cli.seed, dir, &base, &axes)?;
            let out = run_plan(&plan, exec)?;
            for s in &out.summaries {
                say(&format!(
                    "{}: agreement={:.4} key_len={} message_bits={:.1} target_comm={}",
                    s.group, s.agreement_rate, s.key_len, s.mean_message_bits, s.target_comm
                ));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let result = expand_args(std::env::args().collect()).and_then(|args| run(Cli::parse_from(args)));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
