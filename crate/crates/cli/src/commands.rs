//! Stage implementations behind the subcommands.
//!
//! Every stage reads its predecessors' files and writes its own, with no
//! hidden state between them: a circuit file carries its own bit width and
//! field, key/proof files carry their encodings, and the transaction bundle
//! carries everything `run-chain` needs. Failures are split into the three
//! non-success exit classes: [`Failure::Reject`] for verification failures,
//! [`Failure::Usage`] for bad inputs, and [`Failure::Internal`] for bugs.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use vcontract_core::chain::{
    build_funding_tx, build_locking_script, build_redeem_script,
    build_spending_tx, build_unlocking_script, chunk_vk, execute, hash160,
    ExecContext, Ledger, ScriptLimits,
};
use vcontract_core::circuit::{self, lower, Circuit};
use vcontract_core::crypto::{
    io_vector, keygen, mock_backend, parse_ek, parse_proof, parse_vk, prove,
    serialize_ek, serialize_proof, serialize_vk, verify, CryptoError,
    MockBackend,
};
use vcontract_core::frontend::{
    build_symbol_table, flatten, parse, preprocess, CompilationUnit,
    FlattenConfig, FrontendError, MergedSource,
};
use vcontract_core::minimizer::{minimize, MinimizeConfig};
use vcontract_core::qap::{self, build_qap, witness, Qap};

use crate::bundle::TxBundle;
use crate::config::PipelineConfig;

/// Non-success outcome of a stage, mapped to the exit code in `main`.
#[derive(Debug)]
pub enum Failure {
    /// A proof, script, or spend failed verification (exit 1).
    Reject(String),
    /// The caller supplied bad flags, files, or file contents (exit 2).
    Usage(String),
    /// A condition that indicates a bug, not a misuse (exit 3).
    Internal(String),
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn read_file(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    std::fs::write(path, contents)
        .map_err(|e| Failure::Internal(format!("cannot write {}: {e}", path.display())))?;
    println!("wrote {}", path.display());
    Ok(())
}

/// Reads a values file: one decimal per line in declared wire order.
fn read_values(path: &Path) -> Result<Vec<u64>, Failure> {
    let text = read_file(path)?;
    let mut values = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let v = line.parse::<u64>().map_err(|_| {
            usage(format!(
                "{}:{}: expected a decimal value, found {line:?}",
                path.display(),
                idx + 1
            ))
        })?;
        values.push(v);
    }
    Ok(values)
}

fn render_values(values: &[u64]) -> String {
    values.iter().map(|v| format!("{v}\n")).collect()
}

fn load_circuit(path: &Path) -> Result<Circuit, Failure> {
    let text = read_file(path)?;
    circuit::parse(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn load_qap(c: &Circuit) -> Result<Qap, Failure> {
    build_qap(c).map_err(|e| usage(e.to_string()))
}

fn backend_of(modulus: u64) -> Result<MockBackend, Failure> {
    mock_backend(modulus).map_err(|e| Failure::Internal(e.to_string()))
}

/// Groups the sources into a compilation unit keyed by file name, so
/// `#include "header.h"` resolves among the files given on the command line.
fn load_sources(paths: &[PathBuf]) -> Result<CompilationUnit, Failure> {
    let mut files = BTreeMap::new();
    let mut root = None;
    for path in paths {
        let name = path
            .file_name()
            .ok_or_else(|| usage(format!("{} has no file name", path.display())))?
            .to_string_lossy()
            .into_owned();
        let text = read_file(path)?;
        if files.insert(name.clone(), text).is_some() {
            return Err(usage(format!("duplicate source file name {name:?}")));
        }
        root.get_or_insert(name);
    }
    Ok(CompilationUnit { root: root.expect("clap requires at least one source"), files })
}

/// Rewrites a frontend error as `file:line: message` using the merged-line
/// origin map, for errors that carry a merged line number.
fn diagnose(e: &FrontendError, merged: &MergedSource) -> String {
    let line = match e {
        FrontendError::ParseError { line, .. }
        | FrontendError::UnknownIdentifier { line, .. }
        | FrontendError::DynamicIndex { line }
        | FrontendError::UnboundedLoop { line }
        | FrontendError::UnsupportedConstruct { line, .. } => Some(*line),
        _ => None,
    };
    let text = e.to_string();
    match line.and_then(|l| merged.origin(l).map(|o| (l, o))) {
        Some((l, (file, orig))) => {
            let rest = text.strip_prefix(&format!("line {l}: ")).unwrap_or(&text);
            format!("{file}:{orig}: {rest}")
        }
        None => text,
    }
}

pub fn cmd_compile(
    sources: &[PathBuf],
    out: &Path,
    cfg: &PipelineConfig,
) -> Result<(), Failure> {
    let unit = load_sources(sources)?;
    let fcfg = FlattenConfig {
        bit_width: cfg.bit_width,
        max_unroll: cfg.max_unroll,
        entry: "contract".into(),
    };
    let merged =
        preprocess(&unit, &BTreeMap::new()).map_err(|e| usage(e.to_string()))?;
    let front = |e: &FrontendError| usage(diagnose(e, &merged));
    let prog = parse(merged.text()).map_err(|e| front(&e))?;
    let table = build_symbol_table(&prog, &fcfg.entry).map_err(|e| front(&e))?;
    let flat = flatten(&table, &fcfg).map_err(|e| front(&e))?;
    let circuit = lower(&flat, cfg.field_modulus).map_err(|e| usage(e.to_string()))?;
    println!(
        "compile: gates {}, wires {}, inputs {}, outputs {}",
        circuit.gates.len(),
        circuit.num_wires,
        circuit.input_wires.len(),
        circuit.output_wires.len()
    );
    write_file(out, &circuit::serialize(&circuit))
}

pub fn cmd_minimize(
    circuit_path: &Path,
    out: &Path,
    report_path: Option<&Path>,
    cfg: &PipelineConfig,
) -> Result<(), Failure> {
    let c = load_circuit(circuit_path)?;
    let mcfg = MinimizeConfig {
        cores: cfg.cores,
        strategy: cfg.minimize_strategy.into(),
    };
    let (minimized, report) = minimize(&c, &mcfg);
    let rendered = format!(
        "cores {}, strategy {}\n{}",
        cfg.cores,
        cfg.minimize_strategy,
        report.render()
    );
    print!("minimize: {rendered}");
    if let Some(path) = report_path {
        write_file(path, &rendered)?;
    }
    write_file(out, &circuit::serialize(&minimized))
}

pub fn cmd_setup(
    circuit_path: &Path,
    ek_path: &Path,
    vk_path: &Path,
    qap_path: Option<&Path>,
    cfg: &PipelineConfig,
) -> Result<(), Failure> {
    let c = load_circuit(circuit_path)?;
    let q = load_qap(&c)?;
    if let Some(path) = qap_path {
        write_file(path, &qap::serialize(&q))?;
    }
    let backend = backend_of(c.field.modulus())?;
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.rng_seed);
    let (ek, vk, _s) = keygen(&q, &backend, &mut rng)
        .map_err(|e| Failure::Internal(e.to_string()))?;
    let ek_text = serialize_ek(&backend, &ek);
    let vk_text = serialize_vk(&backend, &vk);
    println!(
        "setup: ek {} bytes, vk {} bytes (seed {})",
        ek_text.len(),
        vk_text.len(),
        cfg.rng_seed
    );
    write_file(ek_path, &ek_text)?;
    write_file(vk_path, &vk_text)
}

pub struct ProveArgs<'a> {
    pub circuit: &'a Path,
    pub ek: &'a Path,
    pub inputs: &'a Path,
    pub proof: &'a Path,
    pub outputs: &'a Path,
    /// Test hook: adds one to this witness coordinate before proving, to
    /// demonstrate that inconsistent witnesses are rejected.
    pub corrupt_witness: Option<usize>,
}

pub fn cmd_prove(args: &ProveArgs<'_>, _cfg: &PipelineConfig) -> Result<(), Failure> {
    let c = load_circuit(args.circuit)?;
    let q = load_qap(&c)?;
    let backend = backend_of(c.field.modulus())?;
    let ek = parse_ek(&backend, &read_file(args.ek)?)
        .map_err(|e| usage(format!("{}: {e}", args.ek.display())))?;
    let inputs = read_values(args.inputs)?;
    let asg = c.evaluate(&inputs).map_err(|e| usage(e.to_string()))?;
    let mut w = witness(&c, &asg).map_err(|e| Failure::Internal(e.to_string()))?;
    if let Some(idx) = args.corrupt_witness {
        let slot = w
            .get_mut(idx)
            .ok_or_else(|| usage(format!("corrupt-witness index {idx} out of range")))?;
        *slot = c.field.add(*slot, 1);
    }
    let proof = match prove(&ek, &q, &w, &backend) {
        Ok(p) => p,
        Err(e @ CryptoError::InvalidWitness(_)) => {
            return Err(Failure::Reject(format!("prove: reject: {e}")))
        }
        Err(e) => return Err(usage(e.to_string())),
    };
    let outputs = c.outputs_of(&asg);
    println!("prove: outputs {outputs:?}");
    write_file(args.outputs, &render_values(&outputs))?;
    write_file(args.proof, &serialize_proof(&backend, &proof))
}

pub fn cmd_verify(
    vk_path: &Path,
    inputs_path: &Path,
    outputs_path: &Path,
    proof_path: &Path,
    cfg: &PipelineConfig,
) -> Result<(), Failure> {
    let backend = backend_of(cfg.field_modulus)?;
    let vk = parse_vk(&backend, &read_file(vk_path)?)
        .map_err(|e| usage(format!("{}: {e}", vk_path.display())))?;
    let proof = parse_proof(&backend, &read_file(proof_path)?)
        .map_err(|e| usage(format!("{}: {e}", proof_path.display())))?;
    let inputs = read_values(inputs_path)?;
    let outputs = read_values(outputs_path)?;
    let io = io_vector(vk.v_p_io.len(), &inputs, &outputs)
        .map_err(|e| usage(e.to_string()))?;
    let accepted = verify(&vk, &io, &proof, &backend)
        .map_err(|e| Failure::Internal(e.to_string()))?;
    if accepted {
        println!("verify: accept");
        Ok(())
    } else {
        Err(Failure::Reject("verify: reject".into()))
    }
}

pub struct ScriptArgs<'a> {
    pub vk: &'a Path,
    pub proof: &'a Path,
    pub inputs: &'a Path,
    pub outputs: &'a Path,
    pub out: &'a Path,
    pub worker_pubkey: &'a str,
    pub payment: u64,
}

pub fn cmd_script(args: &ScriptArgs<'_>, cfg: &PipelineConfig) -> Result<(), Failure> {
    let backend = backend_of(cfg.field_modulus)?;
    let vk_text = read_file(args.vk)?;
    let vk = parse_vk(&backend, &vk_text)
        .map_err(|e| usage(format!("{}: {e}", args.vk.display())))?;
    let proof_text = read_file(args.proof)?;
    parse_proof(&backend, &proof_text)
        .map_err(|e| usage(format!("{}: {e}", args.proof.display())))?;
    let x = read_values(args.inputs)?;
    let y = read_values(args.outputs)?;
    // Fail here, not at spend time, if the io files cannot satisfy the key.
    io_vector(vk.v_p_io.len(), &x, &y).map_err(|e| usage(e.to_string()))?;
    let pubkey = hex::decode(args.worker_pubkey)
        .map_err(|_| usage("worker pubkey is not valid hex"))?;
    if args.payment == 0 {
        return Err(usage("payment must be positive"));
    }

    let limits = ScriptLimits { max_push: cfg.max_push, max_script: cfg.max_script };
    let chunks = chunk_vk(vk_text.as_bytes(), cfg.max_push);
    let redeem = build_redeem_script(&chunks, &pubkey, &limits)
        .map_err(|e| usage(e.to_string()))?;
    let locking = build_locking_script(&redeem);
    let unlocking =
        build_unlocking_script(&proof_text, &x, &y, &chunks, &redeem, &limits)
            .map_err(|e| usage(e.to_string()))?;
    println!(
        "script: vk chunks {}, redeem {} bytes, locking {} bytes, unlocking {} bytes",
        chunks.chunks.len(),
        redeem.serialized_len(),
        locking.serialized_len(),
        unlocking.serialized_len()
    );

    let funding = build_funding_tx(locking, args.payment, &hash160(&pubkey));
    let spending = build_spending_tx(&funding, unlocking);
    println!("script: funding txid {}", funding.txid_hex());
    let bundle = TxBundle {
        field_modulus: cfg.field_modulus,
        worker_pubkey: pubkey,
        funding,
        spending,
    };
    write_file(args.out, &bundle.render())
}

pub fn cmd_run_chain(bundle_path: &Path) -> Result<(), Failure> {
    let bundle = TxBundle::parse(&read_file(bundle_path)?)
        .map_err(|e| usage(format!("{}: {e}", bundle_path.display())))?;
    let backend = backend_of(bundle.field_modulus)
        .map_err(|_| usage("bundle field modulus is not prime"))?;
    let mut ledger = Ledger::new();
    ledger.register(&bundle.funding);
    if let Err(e) = ledger.validate_spend(&bundle.spending) {
        return Err(Failure::Reject(format!("run-chain: reject: {e}")));
    }
    let ctx = ExecContext { backend: &backend, worker_pubkey: &bundle.worker_pubkey };
    for input in &bundle.spending.inputs {
        let utxo = ledger
            .utxo(&input.prev_txid, input.prev_index)
            .expect("validated above");
        let accepted =
            match execute(&input.unlocking_script, &utxo.locking_script, &ctx) {
                Ok(ok) => ok,
                Err(e) => {
                    return Err(Failure::Reject(format!("run-chain: reject: {e}")))
                }
            };
        if !accepted {
            return Err(Failure::Reject("run-chain: reject".into()));
        }
    }
    ledger
        .apply(&bundle.spending)
        .map_err(|e| Failure::Internal(e.to_string()))?;
    println!("run-chain: accept");
    Ok(())
}

pub struct AllArgs<'a> {
    pub sources: &'a [PathBuf],
    pub inputs: &'a Path,
    pub dir: &'a Path,
    pub worker_pubkey: &'a str,
    pub payment: u64,
}

/// Chains every stage end to end, writing all artifacts into one directory.
pub fn cmd_all(args: &AllArgs<'_>, cfg: &PipelineConfig) -> Result<(), Failure> {
    std::fs::create_dir_all(args.dir)
        .map_err(|e| usage(format!("cannot create {}: {e}", args.dir.display())))?;
    let p = |name: &str| args.dir.join(name);
    let (circuit, minimized, report) =
        (p("circuit.txt"), p("minimized.txt"), p("minimize-report.txt"));
    let (qap, ek, vk) = (p("qap.txt"), p("ek.txt"), p("vk.txt"));
    let (proof, outputs, bundle) = (p("proof.txt"), p("outputs.txt"), p("bundle.txt"));

    cmd_compile(args.sources, &circuit, cfg)?;
    cmd_minimize(&circuit, &minimized, Some(&report), cfg)?;
    cmd_setup(&minimized, &ek, &vk, Some(&qap), cfg)?;
    cmd_prove(
        &ProveArgs {
            circuit: &minimized,
            ek: &ek,
            inputs: args.inputs,
            proof: &proof,
            outputs: &outputs,
            corrupt_witness: None,
        },
        cfg,
    )?;
    cmd_verify(&vk, args.inputs, &outputs, &proof, cfg)?;
    cmd_script(
        &ScriptArgs {
            vk: &vk,
            proof: &proof,
            inputs: args.inputs,
            outputs: &outputs,
            out: &bundle,
            worker_pubkey: args.worker_pubkey,
            payment: args.payment,
        },
        cfg,
    )?;
    cmd_run_chain(&bundle)
}
