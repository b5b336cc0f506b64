//! `vcontract`: drives a verifiable contract from C source to an executed
//! payment transaction.
//!
//! The pipeline stages are `compile` (C subset -> arithmetic circuit),
//! `minimize` (Boolean submodule reduction), `setup` (evaluation and
//! verification keys), `prove` (evaluate + proof of correctness), `verify`
//! (pairing check), `script` (funding/spending transaction pair embedding
//! the proof), and `run-chain` (script-interpreter replay). Each stage
//! reads and writes plain files so any step can be rerun or inspected in
//! isolation; `all` chains them. Exit codes: 0 success or accept, 1
//! verification reject, 2 usage error, 3 internal error.

mod bundle;
mod commands;
mod config;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use commands::{AllArgs, Failure, ProveArgs, ScriptArgs};
use config::ConfigArgs;
use vcontract_core::chain::ONE_BTC;

/// Mock worker identity used when none is supplied: signatures are modeled
/// as pubkey equality, so any fixed byte string works.
const DEFAULT_PUBKEY: &str =
    "020123456789abcdef0123456789abcdef0123456789abcdef0123456789abcdef";

#[derive(Parser)]
#[command(name = "vcontract", version, about = "verifiable C contracts on a mock chain")]
struct Cli {
    #[command(flatten)]
    config: ConfigArgs,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compile C sources into the circuit text format.
    Compile {
        /// Source files; includes resolve among them by file name.
        #[arg(required = true)]
        sources: Vec<PathBuf>,
        /// Circuit file to write.
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },
    /// Minimize the Boolean submodules of a circuit.
    Minimize {
        circuit: PathBuf,
        /// Minimized circuit file to write.
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
        /// Also write the per-submodule report here.
        #[arg(long, value_name = "FILE")]
        report: Option<PathBuf>,
    },
    /// Generate the evaluation and verification keys for a circuit.
    Setup {
        circuit: PathBuf,
        /// Evaluation key file to write.
        #[arg(long, value_name = "FILE")]
        ek: PathBuf,
        /// Verification key file to write.
        #[arg(long, value_name = "FILE")]
        vk: PathBuf,
        /// Also write the intermediate polynomial program here.
        #[arg(long, value_name = "FILE")]
        qap: Option<PathBuf>,
    },
    /// Evaluate a circuit on inputs and produce a proof of correctness.
    Prove {
        circuit: PathBuf,
        /// Evaluation key file.
        #[arg(long, value_name = "FILE")]
        ek: PathBuf,
        /// Input values, one decimal per line in declared wire order.
        #[arg(long, value_name = "FILE")]
        inputs: PathBuf,
        /// Proof file to write.
        #[arg(long, value_name = "FILE")]
        proof: PathBuf,
        /// Output values file to write.
        #[arg(long, value_name = "FILE")]
        outputs: PathBuf,
        /// Test hook: corrupt this witness coordinate before proving.
        #[arg(long, hide = true, value_name = "INDEX")]
        corrupt_witness: Option<usize>,
    },
    /// Check a proof against a verification key and claimed io values.
    Verify {
        /// Verification key file.
        #[arg(long, value_name = "FILE")]
        vk: PathBuf,
        /// Claimed input values, one decimal per line.
        #[arg(long, value_name = "FILE")]
        inputs: PathBuf,
        /// Claimed output values, one decimal per line.
        #[arg(long, value_name = "FILE")]
        outputs: PathBuf,
        /// Proof file.
        #[arg(long, value_name = "FILE")]
        proof: PathBuf,
    },
    /// Build the funding/spending transaction pair embedding the proof.
    Script {
        /// Verification key file (chunked and hash-committed on chain).
        #[arg(long, value_name = "FILE")]
        vk: PathBuf,
        /// Proof file.
        #[arg(long, value_name = "FILE")]
        proof: PathBuf,
        /// Input values file.
        #[arg(long, value_name = "FILE")]
        inputs: PathBuf,
        /// Output values file.
        #[arg(long, value_name = "FILE")]
        outputs: PathBuf,
        /// Transaction bundle file to write.
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
        /// Worker pubkey (hex) the contract output is locked to.
        #[arg(long, value_name = "HEX", default_value = DEFAULT_PUBKEY)]
        worker_pubkey: String,
        /// Contract payment in satoshi.
        #[arg(long, value_name = "SATOSHI", default_value_t = ONE_BTC)]
        payment: u64,
    },
    /// Replay a transaction bundle through the script interpreter.
    RunChain {
        /// Transaction bundle file produced by `script`.
        bundle: PathBuf,
    },
    /// Run every stage end to end, writing artifacts into a directory.
    All {
        /// Source files; includes resolve among them by file name.
        #[arg(required = true)]
        sources: Vec<PathBuf>,
        /// Input values, one decimal per line in declared wire order.
        #[arg(long, value_name = "FILE")]
        inputs: PathBuf,
        /// Artifact directory (created if missing).
        #[arg(long, value_name = "DIR", default_value = "artifacts")]
        dir: PathBuf,
        /// Worker pubkey (hex) the contract output is locked to.
        #[arg(long, value_name = "HEX", default_value = DEFAULT_PUBKEY)]
        worker_pubkey: String,
        /// Contract payment in satoshi.
        #[arg(long, value_name = "SATOSHI", default_value_t = ONE_BTC)]
        payment: u64,
    },
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let cfg = cli.config.resolve().map_err(Failure::Usage)?;
    match &cli.cmd {
        Cmd::Compile { sources, out } => commands::cmd_compile(sources, out, &cfg),
        Cmd::Minimize { circuit, out, report } => {
            commands::cmd_minimize(circuit, out, report.as_deref(), &cfg)
        }
        Cmd::Setup { circuit, ek, vk, qap } => {
            commands::cmd_setup(circuit, ek, vk, qap.as_deref(), &cfg)
        }
        Cmd::Prove { circuit, ek, inputs, proof, outputs, corrupt_witness } => {
            commands::cmd_prove(
                &ProveArgs {
                    circuit,
                    ek,
                    inputs,
                    proof,
                    outputs,
                    corrupt_witness: *corrupt_witness,
                },
                &cfg,
            )
        }
        Cmd::Verify { vk, inputs, outputs, proof } => {
            commands::cmd_verify(vk, inputs, outputs, proof, &cfg)
        }
        Cmd::Script { vk, proof, inputs, outputs, out, worker_pubkey, payment } => {
            commands::cmd_script(
                &ScriptArgs {
                    vk,
                    proof,
                    inputs,
                    outputs,
                    out,
                    worker_pubkey,
                    payment: *payment,
                },
                &cfg,
            )
        }
        Cmd::RunChain { bundle } => commands::cmd_run_chain(bundle),
        Cmd::All { sources, inputs, dir, worker_pubkey, payment } => commands::cmd_all(
            &AllArgs { sources, inputs, dir, worker_pubkey, payment: *payment },
            &cfg,
        ),
    }
}

fn main() {
    // Restore default SIGPIPE handling so `vcontract ... | head` ends
    // quietly instead of panicking on the closed pipe.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    let code = match run(&cli) {
        Ok(()) => 0,
        Err(Failure::Reject(msg)) => {
            println!("{msg}");
            1
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(Failure::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            3
        }
    };
    std::process::exit(code);
}
