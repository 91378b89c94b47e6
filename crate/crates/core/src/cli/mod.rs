//! Command-line front end.
//!
//! Exit codes: 0 success (or verification passed), 1 verification failed,
//! 2 malformed input of any kind (sentence, program, lexicon, config,
//! trace file, I/O), 3 no successful run or search explosion.

pub mod tracefile;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::ditl::{enumerate_traces, parse_program, TickContext};
use crate::error::Error;
use crate::kinematics::relation_in;
use crate::lexicon::{builtin_lexicon, load_lexicon, Lexicon};
use crate::parser::parse_text;
use crate::pipeline::simulate;
use crate::scene::{build_scene, SceneConfig};
use crate::verify::{verify_trace, VerificationReport};

use tracefile::{Format, TraceFile};

pub const EXIT_OK: u8 = 0;
pub const EXIT_VERIFY_FAILED: u8 = 1;

#[derive(Debug, Parser)]
#[command(name = "mosim", version, about = "Simulate and verify controlled-English motion sentences")]
struct Cli {
    /// Lexicon JSON extending the builtin lexicon.
    #[arg(long, global = true, env = "MOSIM_LEXICON")]
    lexicon: Option<PathBuf>,
    /// Scene configuration JSON.
    #[arg(long, global = true, env = "MOSIM_CONFIG")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate a sentence and write its trace.
    Simulate(SimulateArgs),
    /// Print the event frame of a sentence.
    Parse { sentence: String },
    /// Verify a stored trace against a sentence.
    Check {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        sentence: String,
    },
    /// List every successful run of a program, shortest first.
    Enumerate {
        #[arg(long)]
        program: PathBuf,
        /// Tick budget per run.
        #[arg(long)]
        bound: u32,
        /// Node cap for the unfolding.
        #[arg(long, default_value_t = crate::ditl::DEFAULT_NODE_CAP)]
        cap: usize,
        /// Sentence whose scene the program runs in.
        #[arg(long, default_value = "the ball rolled to the wall")]
        sentence: String,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Jsonl,
    Csv,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    sentence: String,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    speed: Option<f64>,
    #[arg(long = "max-frames")]
    max_frames: Option<u32>,
    /// Trace destination; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Jsonl)]
    format: FormatArg,
    /// Verify the trace and exit 1 if it fails.
    #[arg(long)]
    verify: bool,
}

#[derive(Serialize)]
struct Summary<'a> {
    sentence: &'a str,
    seed: u64,
    frames: usize,
    ticks: usize,
    path_length: f64,
    net_rotation: f64,
    final_contacts: BTreeMap<String, String>,
    trace: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    report: Option<&'a VerificationReport>,
}

fn read_file(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))
}

fn lexicon(path: Option<&Path>) -> Result<Lexicon, Error> {
    match path {
        None => Ok(builtin_lexicon()),
        Some(p) => Ok(load_lexicon(&read_file(p)?)?),
    }
}

fn config(path: Option<&Path>) -> Result<SceneConfig, Error> {
    match path {
        None => Ok(SceneConfig::default()),
        Some(p) => Ok(SceneConfig::from_json(&read_file(p)?)?),
    }
}

fn pretty<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("plain data serializes")
}

/// Parses `args` (including the program name) and runs the command,
/// writing results to `out` and diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            if code == 0 {
                let _ = write!(out, "{e}");
                return EXIT_OK;
            }
            let _ = write!(err, "{e}");
            return 2;
        }
    };
    match dispatch(cli, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<u8, Error> {
    let lex = lexicon(cli.lexicon.as_deref())?;
    let io = |e| Error::io("<stdout>", e);
    match cli.command {
        Command::Parse { sentence } => {
            let frame = parse_text(&sentence, &lex)?;
            writeln!(out, "{}", pretty(&frame)).map_err(io)?;
            Ok(EXIT_OK)
        }
        Command::Simulate(args) => {
            let mut cfg = config(cli.config.as_deref())?;
            if let Some(seed) = args.seed {
                cfg.seed = seed;
            }
            if let Some(dt) = args.dt {
                cfg.dt = dt;
            }
            if let Some(speed) = args.speed {
                cfg.speed = speed;
            }
            if let Some(m) = args.max_frames {
                cfg.max_frames = m;
            }
            cfg.validate().map_err(Error::from)?;
            let sim = simulate(&args.sentence, &lex, &cfg)?;
            let file = TraceFile::from_simulation(&sim)?;
            let format = match args.format {
                FormatArg::Jsonl => Format::Jsonl,
                FormatArg::Csv => Format::Csv,
            };
            let bytes = file.to_bytes(format);
            let report = sim.verify(&lex)?;

            let last = sim.trace.last();
            let mut final_contacts = BTreeMap::new();
            for b in &last.bodies {
                if b.id != sim.scene.theme {
                    let rel = relation_in(last, &sim.scene.theme, &b.id, cfg.contact_eps)
                        .map_err(crate::ditl::DitlError::from)?;
                    final_contacts.insert(b.id.to_string(), rel.to_string());
                }
            }
            let summary = Summary {
                sentence: &args.sentence,
                seed: cfg.seed,
                frames: sim.trace.len(),
                ticks: sim.trace.tick_count(),
                path_length: report.metrics.path_length,
                net_rotation: report.metrics.net_rotation,
                final_contacts,
                trace: args.out.as_ref().map(|p| p.display().to_string()),
                report: args.verify.then_some(&report),
            };
            match &args.out {
                Some(path) => {
                    std::fs::write(path, &bytes).map_err(|e| Error::io(path.display().to_string(), e))?;
                    writeln!(out, "{}", pretty(&summary)).map_err(io)?;
                }
                None => {
                    out.write_all(&bytes).map_err(io)?;
                    writeln!(err, "{}", pretty(&summary)).map_err(io)?;
                }
            }
            Ok(if args.verify && !report.overall {
                EXIT_VERIFY_FAILED
            } else {
                EXIT_OK
            })
        }
        Command::Check { trace, sentence } => {
            let file = TraceFile::parse(&read_file(&trace)?)?;
            let frame = parse_text(&sentence, &lex)?;
            let scene = build_scene(&frame, &lex, &file.header.config)?;
            let t = file.to_trace(&scene)?;
            let report = verify_trace(&t, &frame, &scene, &lex)?;
            writeln!(out, "{}", pretty(&report)).map_err(io)?;
            Ok(if report.overall { EXIT_OK } else { EXIT_VERIFY_FAILED })
        }
        Command::Enumerate {
            program,
            bound,
            cap,
            sentence,
        } => {
            let p = parse_program(&read_file(&program)?)?;
            let cfg = config(cli.config.as_deref())?;
            let frame = parse_text(&sentence, &lex)?;
            let scene = build_scene(&frame, &lex, &cfg)?;
            let mut ctx = TickContext::from_scene(&scene);
            ctx.node_cap = cap;
            let traces = enumerate_traces(&p, &scene.world, &ctx, bound)?;
            writeln!(out, "traces: {}", traces.len()).map_err(io)?;
            for (i, t) in traces.iter().enumerate() {
                let labels: Vec<&str> = t.labels.iter().map(|a| a.as_str()).collect();
                writeln!(out, "{i}\tticks={}\t{}", t.tick_count(), labels.join(" ")).map_err(io)?;
            }
            Ok(EXIT_OK)
        }
    }
}
