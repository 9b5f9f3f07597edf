//! Argument parsing and subcommand drivers behind the `wiretap-lab` binary.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::capacity::{solve_cq_regularized, solve_csi, solve_no_csi_lower, SolverOptions};
use crate::channel::{load_family, parse_density_matrix, ChannelSpec, ClassicalChannel, CompoundFamily, CqChannel, FamilyKind};
use crate::codes::{
    build_classical_decoder, evaluate_error, evaluate_error_random_coding, evaluate_leakage, sample_codebook,
    size_at_fraction, EnsembleDecoder, EnsembleOptions, EvaluationMode, RateSizing, SimulationReport,
};
use crate::error::{Error, Result};
use crate::linalg::DensityMatrix;
use crate::nets::build_tau_net;
use crate::protocol::{blocklength_sweep, run_protocol_with, BlocklengthSweep, ProtocolParams, TranscriptReport};
use crate::report::{Format, Report, RunConfig};
use crate::typicality::{conditional_typical_projector, typical_projector, ProjectorCertificate};

#[derive(Debug, Parser)]
#[command(name = "wiretap-lab", version, about = "Compound wiretap channel laboratory")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Seed for every randomized path (required where randomness is used).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub parallel: Option<usize>,
    /// Record wall-clock time in the report.
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve a capacity expression for a family file.
    Capacity(CapacityArgs),
    /// Size a binning code and measure its decoding error and leakage.
    SimulateCode(SimulateArgs),
    /// Certify typical projectors.
    TypicalityCheck(TypicalityArgs),
    /// Build a channel net and measure its coverage.
    TauNet(TauNetArgs),
    /// Run the two-phase state-information protocol.
    Protocol(ProtocolArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Csi,
    NoCsi,
    Cq,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecoderArg {
    Ml,
    Jt,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Evaluation {
    /// Average over the random-coding ensemble.
    Ensemble,
    /// One sampled codebook with a joint-typicality decoder.
    Explicit,
}

#[derive(Debug, Args)]
pub struct CapacityArgs {
    #[arg(long)]
    pub family: PathBuf,
    #[arg(long, value_enum, default_value_t = Mode::Csi)]
    pub mode: Mode,
    /// Largest block length of the regularized cq solve.
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    #[arg(long, default_value_t = 64)]
    pub resolution: usize,
    /// Also optimize over a prefix channel.
    #[arg(long)]
    pub prefix: bool,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub family: PathBuf,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    #[arg(long, value_enum, default_value_t = Mode::Csi)]
    pub mode: Mode,
    /// Code rate as a fraction of the solved capacity.
    #[arg(long, default_value_t = 0.5)]
    pub rate_fraction: f64,
    #[arg(long, value_enum, default_value_t = DecoderArg::Ml)]
    pub decoder: DecoderArg,
    /// Typical-set width for codeword sampling.
    #[arg(long, default_value_t = 1.0)]
    pub delta: f64,
    /// Joint-typicality width of the decoder.
    #[arg(long, default_value_t = 2.0)]
    pub decoder_delta: f64,
    #[arg(long, value_enum, default_value_t = Evaluation::Ensemble)]
    pub evaluation: Evaluation,
}

#[derive(Debug, Args)]
pub struct TypicalityArgs {
    /// Diagonal state given by its comma-separated spectrum.
    #[arg(long, conflicts_with = "state")]
    pub rho: Option<String>,
    /// JSON file holding a density matrix as rows of `[re, im]`.
    #[arg(long)]
    pub state: Option<PathBuf>,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub alpha: f64,
    /// Family whose first legal channel (cq or classical) gets conditional certificates.
    #[arg(long, requires = "p")]
    pub family: Option<PathBuf>,
    /// Input type for the conditional certificates, comma-separated.
    #[arg(long)]
    pub p: Option<String>,
}

#[derive(Debug, Args)]
pub struct TauNetArgs {
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    #[arg(long)]
    pub tau: f64,
    #[arg(long, default_value_t = 5000)]
    pub budget: usize,
}

#[derive(Debug, Args)]
pub struct ProtocolArgs {
    #[arg(long)]
    pub family: PathBuf,
    /// Phase-2 block length.
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 0.1)]
    pub lambda: f64,
    #[arg(long, default_value_t = 8.0)]
    pub c_prime: f64,
    #[arg(long, default_value_t = 0.5)]
    pub rate_fraction: f64,
    #[arg(long, value_enum, default_value_t = DecoderArg::Ml)]
    pub decoder: DecoderArg,
    #[arg(long, default_value_t = 1.0)]
    pub delta: f64,
    #[arg(long, default_value_t = 2.0)]
    pub decoder_delta: f64,
    /// Fixed phase-1 repetition count.
    #[arg(long)]
    pub repetitions: Option<usize>,
    /// Hand the receiver the true state instead of the phase-1 decision.
    #[arg(long)]
    pub oracle_csi: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SimulatePayload {
    pub sizing: RateSizing,
    pub simulation: SimulationReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub leakage: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TypicalityPayload {
    pub certificates: Vec<ProjectorCertificate>,
    pub all_pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ProtocolPayload {
    pub transcript: TranscriptReport,
    pub blocklength_sweep: BlocklengthSweep,
}

/// Phase-2 lengths of the blocklength sweep.
pub const SWEEP_N: [usize; 5] = [100, 200, 400, 800, 1600];

fn require_seed(seed: Option<u64>, sub: &str) -> Result<u64> {
    seed.ok_or_else(|| Error::validation("seed", format!("{sub} is randomized and needs --seed")))
}

fn display(p: &Path) -> String {
    p.to_string_lossy().into_owned()
}

fn decoder(arg: DecoderArg, delta: f64) -> EnsembleDecoder {
    match arg {
        DecoderArg::Ml => EnsembleDecoder::MaximumLikelihood,
        DecoderArg::Jt => EnsembleDecoder::JointTypical { delta },
    }
}

fn parse_list(text: &str, path: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|e| Error::validation(path, format!("{s:?}: {e}"))))
        .collect()
}

fn classical_legal(family: &CompoundFamily) -> Result<Vec<ClassicalChannel>> {
    (0..family.theta_size())
        .map(|t| family.classical_pair(t).map(|(w, _)| w.clone()))
        .collect::<Option<_>>()
        .ok_or_else(|| Error::validation("kind", "code simulation needs a classical family"))
}

/// Run a parsed command line and assemble its report.
pub fn execute(cli: &Cli) -> Result<Report> {
    let run = || -> Result<Report> {
        let start = std::time::Instant::now();
        let mut report = dispatch(cli)?;
        if cli.timing {
            report.timing_seconds = Some(start.elapsed().as_secs_f64());
        }
        Ok(report)
    };
    match cli.parallel {
        Some(0) => Err(Error::validation("parallel", "must be at least 1")),
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| Error::resource(e.to_string()))?
            .install(run),
        None => run(),
    }
}

fn dispatch(cli: &Cli) -> Result<Report> {
    match &cli.command {
        Command::Capacity(a) => cmd_capacity(cli, a),
        Command::SimulateCode(a) => cmd_simulate(cli, a),
        Command::TypicalityCheck(a) => cmd_typicality(cli, a),
        Command::TauNet(a) => cmd_taunet(cli, a),
        Command::Protocol(a) => cmd_protocol(cli, a),
    }
}

fn config(cli: &Cli, sub: &str, family: Option<&Path>, seed: Option<u64>) -> RunConfig {
    let mut c = RunConfig::new(sub, cli.format);
    c.family = family.map(display);
    c.seed = seed;
    // the thread count is left out: it must not change the bytes
    c
}

pub fn cmd_capacity(cli: &Cli, a: &CapacityArgs) -> Result<Report> {
    let seed = require_seed(cli.seed, "capacity")?;
    let family = load_family(&a.family)?;
    let options = SolverOptions { resolution: a.resolution, prefix: a.prefix, seed, ..Default::default() };
    let mut c = config(cli, "capacity", Some(&a.family), Some(seed));
    c.set("mode", a.mode).set("resolution", a.resolution).set("prefix", a.prefix);
    match a.mode {
        Mode::Csi => Report::new(c, &solve_csi(&family, &options)?),
        Mode::NoCsi => Report::new(c, &solve_no_csi_lower(&family, &options)?),
        Mode::Cq => {
            c.set("n", a.n);
            match family.kind() {
                FamilyKind::Quantum => Report::new(c, &solve_cq_regularized(&family, a.n, &options)?),
                FamilyKind::Classical => Report::new(c, &solve_csi(&family.embedded_cq()?, &options)?),
                FamilyKind::Cq => Report::new(c, &solve_csi(&family, &options)?),
            }
        }
    }
}

pub fn cmd_simulate(cli: &Cli, a: &SimulateArgs) -> Result<Report> {
    let seed = require_seed(cli.seed, "simulate-code")?;
    let family = load_family(&a.family)?;
    let legal = classical_legal(&family)?;
    let csi = match a.mode {
        Mode::Csi => true,
        Mode::NoCsi => false,
        Mode::Cq => return Err(Error::validation("mode", "simulate-code takes csi or no-csi")),
    };
    let mut c = config(cli, "simulate-code", Some(&a.family), Some(seed));
    c.set("n", a.n)
        .set("trials", a.trials)
        .set("mode", a.mode)
        .set("rate_fraction", a.rate_fraction)
        .set("decoder", a.decoder)
        .set("delta", a.delta)
        .set("decoder_delta", a.decoder_delta)
        .set("evaluation", a.evaluation);
    let sizing = size_at_fraction(&family, a.n, a.rate_fraction, csi, seed)?;
    let payload = match a.evaluation {
        Evaluation::Ensemble => {
            let opts = EnsembleOptions { trials: a.trials, seed, delta: a.delta, decoder: decoder(a.decoder, a.decoder_delta) };
            let simulation = evaluate_error_random_coding(&legal, &sizing.p_per_t, &sizing.params, &opts)?;
            SimulatePayload { sizing, simulation, leakage: None }
        }
        Evaluation::Explicit => {
            if a.decoder != DecoderArg::Jt {
                return Err(Error::validation("decoder", "explicit evaluation uses the jt decoder"));
            }
            let book = sample_codebook(&sizing.params, &sizing.p_per_t, a.delta, seed)?;
            let decoders: Vec<_> = if csi {
                legal
                    .iter()
                    .enumerate()
                    .map(|(t, w)| build_classical_decoder(book.book(t), std::slice::from_ref(w), a.decoder_delta))
                    .collect()
            } else {
                vec![build_classical_decoder(book.book(0), &legal, a.decoder_delta)]
            };
            let simulation = evaluate_error(&book, &decoders, &legal, a.trials, seed, EvaluationMode::Auto)?;
            let eves: Vec<&ChannelSpec> = family.pairs().iter().map(|p| &p.eavesdrop).collect();
            let leakage = match evaluate_leakage(&book, &eves) {
                Ok(v) => Some(v),
                Err(Error::Resource(_)) => None,
                Err(e) => return Err(e),
            };
            SimulatePayload { sizing, simulation, leakage }
        }
    };
    Report::new(c, &payload)
}

fn exact_type_sequence(p: &[f64], n: usize) -> Result<Vec<usize>> {
    let mut xs = Vec::with_capacity(n);
    for (x, &px) in p.iter().enumerate() {
        let k = px * n as f64;
        if (k - k.round()).abs() > 1e-9 {
            return Err(Error::validation("p", format!("n * p[{x}] = {k} is not an integer")));
        }
        xs.extend(std::iter::repeat_n(x, k.round() as usize));
    }
    if xs.len() != n {
        return Err(Error::validation("p", "entries must sum to one"));
    }
    Ok(xs)
}

pub fn cmd_typicality(cli: &Cli, a: &TypicalityArgs) -> Result<Report> {
    let rho = match (&a.rho, &a.state) {
        (Some(s), None) => DensityMatrix::diagonal(&parse_list(s, "rho")?)?,
        (None, Some(path)) => parse_density_matrix(&std::fs::read_to_string(path)?)?,
        _ => return Err(Error::validation("rho", "give exactly one of --rho or --state")),
    };
    let mut c = config(cli, "typicality-check", a.family.as_deref(), cli.seed);
    c.set("n", a.n).set("alpha", a.alpha);
    match (&a.rho, &a.state) {
        (Some(s), _) => c.set("rho", s),
        (_, Some(p)) => c.set("state", display(p)),
        _ => unreachable!(),
    };
    let mut certificates = vec![typical_projector(&rho, a.n, a.alpha)?];
    if let Some(path) = &a.family {
        let p = parse_list(a.p.as_deref().unwrap_or_default(), "p")?;
        c.set("p", a.p.as_deref());
        let family = load_family(path)?;
        let v: CqChannel = family.pair(0).legal.as_cq().ok_or_else(|| {
            Error::validation("states[0].legal", "conditional certificates need a cq or classical channel")
        })?;
        certificates.push(conditional_typical_projector(&v, &p, &exact_type_sequence(&p, a.n)?, a.alpha)?);
    }
    let all_pass = certificates.iter().all(|c| c.all_pass());
    Report::new(c, &TypicalityPayload { certificates, all_pass })
}

pub fn cmd_taunet(cli: &Cli, a: &TauNetArgs) -> Result<Report> {
    let seed = require_seed(cli.seed, "tau-net")?;
    let mut c = config(cli, "tau-net", None, Some(seed));
    c.set("dim", a.dim).set("tau", a.tau).set("budget", a.budget);
    Report::new(c, &build_tau_net(a.dim, a.tau, seed, a.budget)?)
}

pub fn cmd_protocol(cli: &Cli, a: &ProtocolArgs) -> Result<Report> {
    let seed = require_seed(cli.seed, "protocol")?;
    let family = load_family(&a.family)?;
    let mut params = ProtocolParams::new(a.lambda, a.c_prime, a.n, seed);
    params.rate_fraction = a.rate_fraction;
    params.decoder = decoder(a.decoder, a.decoder_delta);
    params.delta = a.delta;
    params.repetitions = a.repetitions;
    let mut c = config(cli, "protocol", Some(&a.family), Some(seed));
    c.set("n", a.n)
        .set("trials", a.trials)
        .set("lambda", a.lambda)
        .set("c_prime", a.c_prime)
        .set("rate_fraction", a.rate_fraction)
        .set("decoder", a.decoder)
        .set("delta", a.delta)
        .set("decoder_delta", a.decoder_delta)
        .set("repetitions", a.repetitions)
        .set("oracle_csi", a.oracle_csi);
    let transcript = run_protocol_with(&family, &params, a.trials, a.oracle_csi)?;
    let blocklength_sweep = blocklength_sweep(transcript.blocklength.phase1_length, &SWEEP_N);
    Report::new(c, &ProtocolPayload { transcript, blocklength_sweep })
}

/// Parse and execute, returning the rendered report without writing it.
pub fn run_to_string<I, T>(args: I) -> Result<String>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| Error::validation("args", e.to_string()))?;
    Ok(execute(&cli)?.render())
}

/// Parse, execute and write; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = execute(&cli).and_then(|report| {
        let text = report.render();
        match &cli.out {
            Some(path) => std::fs::write(path, text)?,
            None => print!("{text}"),
        }
        Ok(())
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
