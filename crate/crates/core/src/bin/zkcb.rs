//! Command-line front door: encode/decode bridge messages, generate and
//! verify golden vectors, run simulation scenarios, and check traces.
//!
//! Byte arguments are hex (an optional 0x prefix is accepted); all hex output
//! is 0x-prefixed. Exit codes: 0 success, 1 verification or property
//! failure, 2 usage error.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use zkcb_core::codec::{decode_receipt, decode_vaa, encode_receipt, encode_vaa, ReceiptPayload, Vaa};
use zkcb_core::sim::{run_scenario, ScenarioSpec, TraceReport, Verdict};
use zkcb_core::types::decode_hex;
use zkcb_core::vectors;

#[derive(Parser)]
#[command(name = "zkcb", version, about = "ZKCB/v1 bridge codecs and adversarial simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decode a hex-encoded VAA and print its structured JSON rendering.
    DecodeVaa {
        #[arg(long)]
        hex: String,
    },
    /// Encode a VAA described by a JSON file; prints hex.
    EncodeVaa {
        #[arg(long)]
        file: PathBuf,
    },
    /// Decode a hex-encoded 203-byte receipt payload to JSON.
    DecodeReceipt {
        #[arg(long)]
        hex: String,
    },
    /// Encode a receipt payload described by a JSON file; prints hex.
    EncodeReceipt {
        #[arg(long)]
        file: PathBuf,
    },
    /// Emit the golden vector set as JSON.
    GenVectors {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recompute every vector in a golden file; exits 1 on any mismatch.
    VerifyVectors {
        #[arg(long)]
        file: PathBuf,
    },
    /// Run a scenario file and write the trace report as JSONL.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Stamp the summary with wall-clock time (breaks reproducibility).
        #[arg(long)]
        timestamps: bool,
    },
    /// Recompute property verdicts from a trace file; exits 1 if any
    /// non-legacy property is violated.
    Check {
        #[arg(long)]
        trace: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn emit(out: &Option<PathBuf>, content: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, content)
            .with_context(|| format!("writing {}", path.display()))?,
        None => print!("{content}"),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::DecodeVaa { hex } => {
            let bytes = decode_hex(&hex).context("parsing hex argument")?;
            let vaa = decode_vaa(&bytes)?;
            println!("{}", serde_json::to_string_pretty(&vaa)?);
        }
        Command::EncodeVaa { file } => {
            let json = fs::read_to_string(&file)
                .with_context(|| format!("reading {}", file.display()))?;
            let vaa: Vaa = serde_json::from_str(&json).context("parsing VAA JSON")?;
            println!("0x{}", hex::encode(encode_vaa(&vaa)));
        }
        Command::DecodeReceipt { hex } => {
            let bytes = decode_hex(&hex).context("parsing hex argument")?;
            let receipt = decode_receipt(&bytes)?;
            println!("{}", serde_json::to_string_pretty(&receipt)?);
        }
        Command::EncodeReceipt { file } => {
            let json = fs::read_to_string(&file)
                .with_context(|| format!("reading {}", file.display()))?;
            let receipt: ReceiptPayload =
                serde_json::from_str(&json).context("parsing receipt JSON")?;
            println!("0x{}", hex::encode(encode_receipt(&receipt)));
        }
        Command::GenVectors { out } => {
            let mut json = serde_json::to_string_pretty(&vectors::generate())?;
            json.push('\n');
            emit(&out, &json)?;
        }
        Command::VerifyVectors { file } => {
            let json = fs::read_to_string(&file)
                .with_context(|| format!("reading {}", file.display()))?;
            let entries: Vec<vectors::VectorEntry> =
                serde_json::from_str(&json).context("parsing vector file")?;
            match vectors::verify(&entries) {
                Ok(()) => println!("verified {} vectors", entries.len()),
                Err(problems) => {
                    for p in &problems {
                        eprintln!("mismatch: {p}");
                    }
                    bail!("{} of {} vectors failed verification", problems.len(), entries.len());
                }
            }
        }
        Command::Run { scenario, seed, out, timestamps } => {
            let json = fs::read_to_string(&scenario)
                .with_context(|| format!("reading {}", scenario.display()))?;
            let spec: ScenarioSpec = serde_json::from_str(&json).context("parsing scenario")?;
            let report = run_scenario(&spec, seed)?;
            let stamp = timestamps.then(|| {
                std::time::SystemTime::now()
                    .duration_since(std::time::UNIX_EPOCH)
                    .map(|d| d.as_secs())
                    .unwrap_or(0)
            });
            emit(&out, &report.to_jsonl(stamp))?;
        }
        Command::Check { trace } => {
            let content = fs::read_to_string(&trace)
                .with_context(|| format!("reading {}", trace.display()))?;
            let report = TraceReport::parse_jsonl(&content).map_err(anyhow::Error::msg)?;
            let verdicts = &report.verdicts;
            for (name, verdict) in verdicts.iter_named() {
                match verdict {
                    Verdict::Pass => println!("{name}: pass"),
                    Verdict::NotApplicable { reason } => println!("{name}: n/a ({reason})"),
                    Verdict::Violated { witnesses, legacy_only } => {
                        let scope = if *legacy_only { " (legacy path only)" } else { "" };
                        println!("{name}: VIOLATED{scope}");
                        for w in witnesses {
                            println!("  witness: {w}");
                        }
                    }
                }
            }
            if verdicts.zero_secret_enqueues > 0 {
                println!(
                    "note: {} enqueue(s) carried the all-zero secret-hash sentinel",
                    verdicts.zero_secret_enqueues
                );
            }
            if !verdicts.all_non_legacy_pass() {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
