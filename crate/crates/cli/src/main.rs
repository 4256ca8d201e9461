//! Command-line surface for the substring-trace codec library: encode and
//! decode files, simulate the channel, evaluate bounds, enumerate spectra,
//! assemble traces and run fuzz experiments.
//!
//! Exit codes: 0 success, 1 fuzz failures, 2 parameter/feasibility errors,
//! 3 decode errors (including ambiguity), 4 io errors, 5 resource limits.

mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use substrace_core::assembler::{assemble_rf, AssemblyResult};
use substrace_core::bounds;
use substrace_core::channel::{enumerate_spectrum, sample_trace, validate_trace, SamplePolicy};
use substrace_core::error::{CodecError, Result};
use substrace_core::seqcore::{
    format_trace, is_repeat_free, parse_trace, Alphabet, Seq, Trace, TraceParams,
};
use substrace_core::tracecode::{
    derive_params, derive_params_asymptotic, redundancy_report, ConstructionParams, Decoder,
    Encoder, ExplicitInputs,
};

use config::{Echo, FileConfig};

#[derive(Parser)]
#[command(name = "substrace", version, about = "Substring-trace channel codecs and experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate size and rate upper bounds for a point or a gamma sweep
    Bounds(BoundsArgs),
    /// Derive and print construction parameters with feasibility checks
    Params(ParamsArgs),
    /// Encode a message file into a codeword file
    Encode(CodecIoArgs),
    /// Decode a trace file back into a message file
    Decode(CodecIoArgs),
    /// Sample a trace of a codeword under a policy
    Channel(ChannelArgs),
    /// Classify a candidate trace against a strand
    Validate(ValidateArgs),
    /// Exhaustively enumerate the trace spectrum of a strand
    Spectrum(SpectrumArgs),
    /// Reassemble a repeat-free strand from a trace
    Assemble(AssembleArgs),
    /// Run the round-trip and reconstruction fuzz suites
    Fuzz(FuzzArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Csv,
}

#[derive(Args)]
struct ParamFlags {
    /// flat key=value config file; flags override its entries
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    q: Option<u32>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    lmin: Option<usize>,
    #[arg(long)]
    lover: Option<usize>,
    /// marker/segment length f
    #[arg(long)]
    f: Option<usize>,
    /// index length I
    #[arg(long = "index-len")]
    index_len: Option<usize>,
    /// asymptotic mode: l_min multiplier a (> 1)
    #[arg(long)]
    a: Option<f64>,
    /// asymptotic mode: overlap fraction gamma in (0, 1/a]
    #[arg(long)]
    gamma: Option<f64>,
    /// asymptotic mode: exponent offset eps in (0, 0.5)
    #[arg(long)]
    eps: Option<f64>,
}

impl ParamFlags {
    fn file(&self) -> Result<FileConfig> {
        FileConfig::load(self.config.as_deref())
    }

    fn construction(&self, echo: &mut Echo) -> Result<ConstructionParams> {
        let cfg = self.file()?;
        let q = cfg.require(self.q, "q")?;
        let n = cfg.require(self.n, "n")?;
        let a = cfg.resolve(self.a, "a")?;
        let gamma = cfg.resolve(self.gamma, "gamma")?;
        let p = if let (Some(a), Some(gamma)) = (a, gamma) {
            let eps = cfg.resolve(self.eps, "eps")?.unwrap_or(0.25);
            derive_params_asymptotic(q, n, a, gamma, eps)?
        } else {
            derive_params(&ExplicitInputs {
                q,
                n,
                l_min: cfg.require(self.lmin, "lmin")?,
                l_over: cfg.require(self.lover, "lover")?,
                seg_len: cfg.require(self.f, "f")?,
                index_len: cfg.require(self.index_len, "index-len")?,
            })?
        };
        echo.extend(p.to_key_values());
        Ok(p)
    }

    fn trace_params(&self, echo: &mut Echo, n_hint: Option<usize>) -> Result<TraceParams> {
        let cfg = self.file()?;
        let q = cfg.require(self.q, "q")?;
        let n = match cfg.resolve(self.n, "n")? {
            Some(n) => n,
            None => n_hint.ok_or_else(|| CodecError::params("missing required parameter: --n"))?,
        };
        let p = TraceParams::new(
            n,
            q,
            cfg.require(self.lmin, "lmin")?,
            cfg.require(self.lover, "lover")?,
        )?;
        echo.push("q", p.q);
        echo.push("n", p.n);
        echo.push("lmin", p.l_min);
        echo.push("lover", p.l_over);
        Ok(p)
    }
}

#[derive(Args)]
struct BoundsArgs {
    #[command(flatten)]
    params: ParamFlags,
    /// sweep gamma from this value
    #[arg(long = "gamma-from")]
    gamma_from: Option<f64>,
    #[arg(long = "gamma-to")]
    gamma_to: Option<f64>,
    #[arg(long = "gamma-step")]
    gamma_step: Option<f64>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// write the report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ParamsArgs {
    #[command(flatten)]
    params: ParamFlags,
}

#[derive(Args)]
struct CodecIoArgs {
    #[command(flatten)]
    params: ParamFlags,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ChannelArgs {
    #[command(flatten)]
    params: ParamFlags,
    /// canonical | uniform-random | max-fragmentation | min-fragmentation
    #[arg(long, value_enum, default_value = "canonical")]
    policy: PolicyArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    Canonical,
    UniformRandom,
    MaxFragmentation,
    MinFragmentation,
}

impl PolicyArg {
    fn to_policy(self, seed: u64) -> SamplePolicy {
        match self {
            PolicyArg::Canonical => SamplePolicy::Canonical,
            PolicyArg::UniformRandom => SamplePolicy::UniformRandom { seed },
            PolicyArg::MaxFragmentation => SamplePolicy::MaxFragmentation,
            PolicyArg::MinFragmentation => SamplePolicy::MinFragmentation,
        }
    }
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    params: ParamFlags,
    /// strand file
    #[arg(long = "in")]
    input: PathBuf,
    /// candidate trace file
    #[arg(long)]
    trace: PathBuf,
}

#[derive(Args)]
struct SpectrumArgs {
    #[command(flatten)]
    params: ParamFlags,
    #[arg(long = "in")]
    input: PathBuf,
    /// enumeration budget (plan nodes and distinct traces)
    #[arg(long, default_value_t = 1_000_000)]
    cap: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AssembleArgs {
    /// flat key=value config file; flags override its entries
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    q: Option<u32>,
    #[arg(long)]
    lover: Option<usize>,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FuzzArgs {
    #[command(flatten)]
    params: ParamFlags,
    /// number of message seeds for the round-trip phase
    #[arg(long, default_value_t = 200)]
    seeds: u64,
    /// largest strand length for the exhaustive reconstruction phase
    #[arg(long = "rf-max-n", default_value_t = 12)]
    rf_max_n: usize,
}

// ---------------------------------------------------------------------------

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| CodecError::Io(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, content: &str) -> Result<()> {
    std::fs::write(path, content).map_err(|e| CodecError::Io(format!("{}: {e}", path.display())))
}

/// First sequence line of a file ('#' comments and blank lines skipped).
fn read_seq(path: &Path, alphabet: Alphabet) -> Result<Seq> {
    let text = read_file(path)?;
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        return Seq::parse(line, alphabet);
    }
    Err(CodecError::Io(format!("{}: no sequence found", path.display())))
}

fn read_trace(path: &Path, alphabet: Alphabet) -> Result<Trace> {
    let t = parse_trace(&read_file(path)?, alphabet)?;
    if t.is_empty() {
        return Err(CodecError::Io(format!("{}: no fragments found", path.display())));
    }
    Ok(t)
}

fn emit(out: Option<&Path>, content: &str) -> Result<()> {
    match out {
        Some(path) => write_file(path, content),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

// ---------------------------------------------------------------------------

fn cmd_bounds(args: &BoundsArgs) -> Result<()> {
    let mut echo = Echo::new("bounds");
    let cfg = args.params.file()?;
    let sweep_from = cfg.resolve(args.gamma_from, "gamma-from")?;
    let mut body = String::new();
    if let Some(from) = sweep_from {
        let a = cfg.require(args.params.a, "a")?;
        let to = cfg.require(args.gamma_to, "gamma-to")?;
        let step = cfg.require(args.gamma_step, "gamma-step")?;
        if step <= 0.0 {
            return Err(CodecError::params("gamma-step must be positive"));
        }
        echo.push("a", a);
        echo.push("gamma_from", from);
        echo.push("gamma_to", to);
        echo.push("gamma_step", step);
        let estimate_inputs = match (
            cfg.resolve(args.params.n, "n")?,
            cfg.resolve(args.params.q, "q")?,
        ) {
            (Some(n), Some(q)) => {
                let eps = cfg.resolve(args.params.eps, "eps")?.unwrap_or(0.25);
                echo.push("n", n);
                echo.push("q", q);
                echo.push("eps", eps);
                Some((n, q, eps))
            }
            _ => None,
        };
        let sep = match args.format {
            Format::Csv => ",",
            Format::Text => "\t",
        };
        body.push_str(&format!("a{sep}gamma{sep}rate_upper{sep}redundancy_estimate\n"));
        let mut gamma = from;
        while gamma <= to + 1e-12 {
            let rate = bounds::asymptotic_rate_upper_bound(a, gamma)?;
            let estimate = estimate_inputs
                .map(|(n, q, eps)| {
                    bounds::construction_redundancy_bound(n, q, a, gamma, eps)
                        .map(|v| format!("{v:.6}"))
                })
                .transpose()?
                .unwrap_or_default();
            body.push_str(&format!("{a:.6}{sep}{gamma:.6}{sep}{rate:.6}{sep}{estimate}\n"));
            gamma += step;
        }
    } else {
        let mut point_echo = Echo::new("bounds");
        let p = args.params.trace_params(&mut point_echo, None)?;
        echo = point_echo;
        let report = bounds::report(&p)?;
        match args.format {
            Format::Text => {
                for (k, v) in report.to_key_values() {
                    body.push_str(&format!("{k}={v}\n"));
                }
            }
            Format::Csv => {
                let kv = report.to_key_values();
                let header: Vec<&str> = kv.iter().map(|(k, _)| k.as_str()).collect();
                let row: Vec<&str> = kv.iter().map(|(_, v)| v.as_str()).collect();
                body.push_str(&format!("{}\n{}\n", header.join(","), row.join(",")));
            }
        }
    }
    emit(args.out.as_deref(), &format!("{}{body}", echo.header()))
}

fn cmd_params(args: &ParamsArgs) -> Result<()> {
    let mut echo = Echo::new("params");
    let p = args.params.construction(&mut echo)?;
    let rep = redundancy_report(&p)?;
    let mut body = echo.header();
    body.push_str(&format!("redundancy_measured={}\n", rep.measured));
    body.push_str(&format!("rate={:.6}\n", rep.rate));
    body.push_str(&format!(
        "redundancy_estimate={}\n",
        rep.thm_estimate.map(|v| format!("{v:.3}")).unwrap_or_else(|| "outside_hypothesis".into())
    ));
    body.push_str(&format!("eq2_log_size_upper={:.6}\n", rep.eq2_log_size_upper));
    body.push_str(&format!(
        "asymptotic_rate_upper={}\n",
        rep.asymptotic_rate_upper
            .map(|v| format!("{v:.6}"))
            .unwrap_or_else(|| "outside_hypothesis".into())
    ));
    body.push_str(&format!("rf_redundancy_per_index={}\n", rep.rf_redundancy_per_index));
    print!("{body}");
    Ok(())
}

fn cmd_encode(args: &CodecIoArgs) -> Result<()> {
    let mut echo = Echo::new("encode");
    let p = args.params.construction(&mut echo)?;
    let x = read_seq(&args.input, p.alphabet())?;
    let z = Encoder::new(&p)?.encode(&x)?;
    echo.push("in", args.input.display());
    write_file(&args.out, &format!("{}{z}\n", echo.header()))
}

fn cmd_decode(args: &CodecIoArgs) -> Result<()> {
    let mut echo = Echo::new("decode");
    let p = args.params.construction(&mut echo)?;
    let t = read_trace(&args.input, p.alphabet())?;
    let x = Decoder::new(&p)?.decode(&t)?;
    echo.push("in", args.input.display());
    write_file(&args.out, &format!("{}{x}\n", echo.header()))
}

fn cmd_channel(args: &ChannelArgs) -> Result<()> {
    let mut echo = Echo::new("channel");
    let cfg = args.params.file()?;
    let q = cfg.require(args.params.q, "q")?;
    let alphabet = Alphabet::new(q)?;
    let z = read_seq(&args.input, alphabet)?;
    let p = args.params.trace_params(&mut Echo::new(""), Some(z.len()))?;
    echo.push("q", p.q);
    echo.push("n", p.n);
    echo.push("lmin", p.l_min);
    echo.push("lover", p.l_over);
    let policy = args.policy.to_policy(args.seed);
    echo.push("policy", policy.name());
    if let SamplePolicy::UniformRandom { seed } = policy {
        echo.push("seed", seed);
    }
    echo.push("in", args.input.display());
    let t = sample_trace(&z, &p, policy)?;
    write_file(&args.out, &format!("{}{}", echo.header(), format_trace(&t)))
}

fn cmd_validate(args: &ValidateArgs) -> Result<()> {
    let mut echo = Echo::new("validate");
    let cfg = args.params.file()?;
    let q = cfg.require(args.params.q, "q")?;
    let alphabet = Alphabet::new(q)?;
    let x = read_seq(&args.input, alphabet)?;
    let p = args.params.trace_params(&mut echo, Some(x.len()))?;
    let t = read_trace(&args.trace, alphabet)?;
    echo.push("in", args.input.display());
    echo.push("trace", args.trace.display());
    let class = validate_trace(&x, &t, &p);
    println!("{}classification={}", echo.header(), class.name());
    Ok(())
}

fn cmd_spectrum(args: &SpectrumArgs) -> Result<()> {
    let mut echo = Echo::new("spectrum");
    let cfg = args.params.file()?;
    let q = cfg.require(args.params.q, "q")?;
    let alphabet = Alphabet::new(q)?;
    let x = read_seq(&args.input, alphabet)?;
    let p = args.params.trace_params(&mut echo, Some(x.len()))?;
    echo.push("cap", args.cap);
    echo.push("in", args.input.display());
    let spectrum = enumerate_spectrum(&x, &p, args.cap)?;
    let mut body = format!("{}spectrum_size={}\n", echo.header(), spectrum.len());
    for t in &spectrum {
        body.push_str(&format_trace(t));
    }
    emit(args.out.as_deref(), &body)
}

fn cmd_assemble(args: &AssembleArgs) -> Result<()> {
    let mut echo = Echo::new("assemble");
    let cfg = FileConfig::load(args.config.as_deref())?;
    let q = cfg.require(args.q, "q")?;
    let l_over = cfg.require(args.lover, "lover")?;
    echo.push("q", q);
    echo.push("lover", l_over);
    echo.push("in", args.input.display());
    let t = read_trace(&args.input, Alphabet::new(q)?)?;
    match assemble_rf(&t, l_over)? {
        AssemblyResult::Unique(x) => {
            emit(args.out.as_deref(), &format!("{}{x}\n", echo.header()))
        }
        AssemblyResult::Ambiguous { first, second } => Err(CodecError::Ambiguous(format!(
            "conflicting assemblies: {first} vs {second}"
        ))),
        AssemblyResult::Inconsistent { reason } => {
            Err(CodecError::decode(format!("inconsistent trace: {reason}"), None))
        }
    }
}

/// Round-trip and reconstruction fuzz phases; true when no failures.
fn cmd_fuzz(args: &FuzzArgs) -> Result<bool> {
    let mut echo = Echo::new("fuzz");
    let p = args.params.construction(&mut echo)?;
    echo.push("seeds", args.seeds);
    print!("{}", echo.header());

    let mut failures = 0usize;
    let mut ambiguous = 0usize;

    // phase 1: channel round trips
    let phase = Instant::now();
    let encoder = Encoder::new(&p)?;
    let decoder = Decoder::new(&p)?;
    let tp = p.trace_params();
    let mut runs = 0usize;
    for seed in 0..args.seeds {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let symbols: Vec<u32> = (0..p.message_len()).map(|_| rng.gen_range(0..p.q)).collect();
        let x = Seq::new(p.alphabet(), symbols)?;
        let z = encoder.encode(&x)?;
        let policies = [
            SamplePolicy::Canonical,
            SamplePolicy::MaxFragmentation,
            SamplePolicy::MinFragmentation,
            SamplePolicy::UniformRandom { seed },
        ];
        for policy in policies {
            runs += 1;
            let t = sample_trace(&z, &tp, policy)?;
            match decoder.decode(&t) {
                Ok(back) if back == x => {}
                Ok(_) => {
                    failures += 1;
                    println!("round_trip FAIL (silent): seed={seed} policy={}", policy.name());
                }
                Err(CodecError::Ambiguous(msg)) => {
                    ambiguous += 1;
                    println!("round_trip ambiguity: seed={seed} policy={}: {msg}", policy.name());
                }
                Err(e) => {
                    failures += 1;
                    println!("round_trip FAIL: seed={seed} policy={}: {e}", policy.name());
                }
            }
        }
    }
    println!(
        "phase=round_trip runs={runs} pass={} ambiguous={ambiguous} wall={:?}",
        runs - failures - ambiguous,
        phase.elapsed()
    );

    // phase 2: exhaustive reconstruction of small binary repeat-free strands
    let phase = Instant::now();
    let alphabet = Alphabet::new(2)?;
    let mut strands = 0usize;
    let mut traces = 0usize;
    for l_over in [2usize, 3] {
        for l_min in [l_over + 1, l_over + 2] {
            for n in l_min..=args.rf_max_n {
                for bits in 0u64..(1u64 << n) {
                    let symbols: Vec<u32> = (0..n).map(|i| ((bits >> i) & 1) as u32).collect();
                    let x = Seq::new(alphabet, symbols)?;
                    if !is_repeat_free(&x, l_over).unwrap_or(false) {
                        continue;
                    }
                    strands += 1;
                    let tp2 = TraceParams::new(n, 2, l_min, l_over)?;
                    for t in enumerate_spectrum(&x, &tp2, 2_000_000)? {
                        traces += 1;
                        match assemble_rf(&t, l_over)? {
                            AssemblyResult::Unique(y) if y == x => {}
                            other => {
                                failures += 1;
                                println!(
                                    "reconstruction FAIL: x={x} l_min={l_min} l_over={l_over}: {other:?}"
                                );
                            }
                        }
                    }
                }
            }
        }
    }
    println!(
        "phase=reconstruction strands={strands} traces={traces} wall={:?}",
        phase.elapsed()
    );
    println!("failures={failures} ambiguous={ambiguous}");
    Ok(failures == 0)
}

fn exit_code(err: &CodecError) -> u8 {
    match err {
        CodecError::Params(_) | CodecError::Feasibility(_) => 2,
        CodecError::Decode { .. } | CodecError::Ambiguous(_) => 3,
        CodecError::Io(_) => 4,
        CodecError::Resource(_) => 5,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Bounds(args) => cmd_bounds(args),
        Command::Params(args) => cmd_params(args),
        Command::Encode(args) => cmd_encode(args),
        Command::Decode(args) => cmd_decode(args),
        Command::Channel(args) => cmd_channel(args),
        Command::Validate(args) => cmd_validate(args),
        Command::Spectrum(args) => cmd_spectrum(args),
        Command::Assemble(args) => cmd_assemble(args),
        Command::Fuzz(args) => {
            return match cmd_fuzz(args) {
                Ok(true) => ExitCode::SUCCESS,
                Ok(false) => ExitCode::from(1),
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(exit_code(&e))
                }
            }
        }
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
