//! pqvrf: drive the MPC-seeded Ring-LWE VRF pipeline from the shell.
//!
//! Exit codes are stable: 0 success, 1 verification or submission
//! failure, 2 input/configuration error.

mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use pqvrf::complexity::{complexity_report, ComplexityInputs};
use pqvrf::driver::ProtocolDriver;
use pqvrf::ledger::LedgerTx;
use pqvrf::stats::{run_suite, BitSequence, SuiteConfig};
use pqvrf::vrf::{
    gen, key_material_from_armored, key_material_to_armored, ring_from_armored, ring_to_armored,
    verify, VrfProof,
};

use config::RunConfig;

#[derive(Parser)]
#[command(name = "pqvrf", version, about = "MPC-seeded Ring-LWE VRF over a simulated ledger")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate key material for a participant set
    Keygen(KeygenArgs),
    /// Run full protocol rounds and write the artifacts
    Round(RoundArgs),
    /// Verify a proof file against a ring file
    Verify(VerifyArgs),
    /// Run the statistical suite and emit the summary report
    Nist(NistArgs),
    /// Print the complexity-contribution calculator output
    Bench(BenchArgs),
    /// Re-render a machine-readable suite report as a table
    Report(ReportArgs),
}

#[derive(Args)]
struct CommonConfig {
    /// line-based key=value config file; flags override file entries
    #[arg(long)]
    config: Option<PathBuf>,
    /// group parameter set name (modp2048 | toy64)
    #[arg(long)]
    group: Option<String>,
    /// lattice parameter set name (R256 | R512)
    #[arg(long)]
    rlwe: Option<String>,
    /// number of participants
    #[arg(long)]
    participants: Option<usize>,
    /// reveal threshold (default: all participants)
    #[arg(long)]
    threshold: Option<usize>,
    /// number of rounds to drive
    #[arg(long)]
    rounds: Option<u64>,
    /// rng seed; mandatory in deterministic mode
    #[arg(long)]
    seed: Option<u64>,
    /// derive every random choice from the seed
    #[arg(long)]
    deterministic: bool,
    /// sign with the literal slot-1 layout instead of the generalized one
    #[arg(long)]
    literal_alg2: bool,
}

#[derive(Args)]
struct KeygenArgs {
    #[command(flatten)]
    common: CommonConfig,
    /// output key file
    #[arg(long, default_value = "pqvrf-keys.txt")]
    out: PathBuf,
}

#[derive(Args)]
struct RoundArgs {
    #[command(flatten)]
    common: CommonConfig,
    /// key file written by keygen
    #[arg(long, default_value = "pqvrf-keys.txt")]
    keys: PathBuf,
    /// artifact directory
    #[arg(long, default_value = "pqvrf-rounds")]
    out_dir: PathBuf,
    /// corrupt one ciphertext byte before submission (negative path)
    #[arg(long)]
    tamper: bool,
}

#[derive(Args)]
struct VerifyArgs {
    /// proof file (hex-armored)
    #[arg(long)]
    proof: PathBuf,
    /// ring file (hex-armored)
    #[arg(long)]
    ring: PathBuf,
    /// group parameter set the files were written under
    #[arg(long, default_value = "modp2048")]
    group: String,
}

#[derive(Args)]
struct NistArgs {
    #[command(flatten)]
    common: CommonConfig,
    /// number of sequences
    #[arg(long, default_value_t = 16)]
    sequences: usize,
    /// bits per sequence
    #[arg(long, default_value_t = 1 << 20)]
    bits: usize,
    /// significance level
    #[arg(long, default_value_t = 0.01)]
    alpha: f64,
    /// bit source: pipeline | zeros | file
    #[arg(long, default_value = "pipeline")]
    source: String,
    /// input file for --source file (raw bytes)
    #[arg(long)]
    file: Option<PathBuf>,
    /// report directory
    #[arg(long, default_value = "pqvrf-report")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// hash size k in bits
    #[arg(long, default_value_t = 256)]
    hash_bits: u64,
    /// participant count n
    #[arg(long, default_value_t = 10)]
    participants: u64,
    /// polynomial degree M
    #[arg(long, default_value_t = 1024)]
    poly_degree: u64,
    /// log2 of the group modulus
    #[arg(long, default_value_t = 11)]
    log_p: u64,
    /// also measure wall-clock times of representative operations
    #[arg(long)]
    measure: bool,
    /// optional output file
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// machine-readable report written by `pqvrf nist`
    #[arg(long)]
    input: PathBuf,
}

/// Failures that map to specific exit codes.
enum CliOutcome {
    Ok,
    VerifyFailed(String),
    InputError(String),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Keygen(a) => cmd_keygen(a),
        Command::Round(a) => cmd_round(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Nist(a) => cmd_nist(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Report(a) => cmd_report(a),
    };
    match outcome {
        Ok(CliOutcome::Ok) => ExitCode::SUCCESS,
        Ok(CliOutcome::VerifyFailed(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(1)
        }
        Ok(CliOutcome::InputError(msg)) => {
            eprintln!("input error: {msg}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("input error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn resolve(common: &CommonConfig) -> anyhow::Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    if let Some(v) = &common.group {
        cfg.group = v.clone();
    }
    if let Some(v) = &common.rlwe {
        cfg.rlwe = v.clone();
    }
    if let Some(v) = common.participants {
        cfg.participants = v;
    }
    if common.threshold.is_some() {
        cfg.threshold = common.threshold;
    }
    if let Some(v) = common.rounds {
        cfg.rounds = v;
    }
    if common.seed.is_some() {
        cfg.seed = common.seed;
    }
    cfg.deterministic |= common.deterministic;
    cfg.literal_alg2 |= common.literal_alg2;
    cfg.validate()?;
    Ok(cfg)
}

fn rng_for(cfg: &RunConfig) -> ChaCha20Rng {
    match cfg.seed {
        Some(s) => ChaCha20Rng::seed_from_u64(s),
        None => ChaCha20Rng::from_entropy(),
    }
}

fn cmd_keygen(args: KeygenArgs) -> anyhow::Result<CliOutcome> {
    let cfg = match resolve(&args.common) {
        Ok(c) => c,
        Err(e) => return Ok(CliOutcome::InputError(format!("{e:#}"))),
    };
    let mut rng = rng_for(&cfg);
    let km = match gen(&cfg.vrf_config(), &mut rng) {
        Ok(km) => km,
        Err(e) => return Ok(CliOutcome::InputError(e.to_string())),
    };
    std::fs::write(&args.out, key_material_to_armored(&km))?;
    println!("wrote {} participants to {}", cfg.participants, args.out.display());
    Ok(CliOutcome::Ok)
}

fn cmd_round(args: RoundArgs) -> anyhow::Result<CliOutcome> {
    let cfg = match resolve(&args.common) {
        Ok(c) => c,
        Err(e) => return Ok(CliOutcome::InputError(format!("{e:#}"))),
    };
    let text = match std::fs::read_to_string(&args.keys) {
        Ok(t) => t,
        Err(e) => {
            return Ok(CliOutcome::InputError(format!(
                "cannot read {}: {e}",
                args.keys.display()
            )))
        }
    };
    let km = match key_material_from_armored(&text) {
        Ok(km) => km,
        Err(e) => return Ok(CliOutcome::InputError(format!("bad key file: {e}"))),
    };
    let group = km.group.clone();
    let chain_seed = cfg.seed.unwrap_or(0).to_be_bytes();
    let mut driver = ProtocolDriver::new(
        km,
        cfg.threshold,
        &chain_seed,
        cfg.seed.unwrap_or_else(rand::random),
    )?;
    std::fs::create_dir_all(&args.out_dir)?;

    // a rejected submission leaves the round open, so tampering is a
    // single-round experiment by construction
    let rounds = if args.tamper { 1 } else { cfg.rounds };
    let mut tampered_rejections = 0u64;
    for r in 0..rounds {
        let dir = args.out_dir.join(format!("round-{r}"));
        std::fs::create_dir_all(&dir)?;
        if args.tamper {
            // manual path: corrupt c2 after evaluation, expect status 0
            let event = driver.advance_to_seed()?;
            let pqvrf::ledger::LedgerEvent::OnchainMpcSeedReady { seed, .. } = &event else {
                unreachable!("derive emits the seed-ready event");
            };
            let seed = *seed;
            let km = driver.key_material();
            let (c1, mut c2) =
                pqvrf::worker::rlwe_processing(&seed, &km.rlwe, &km.rlwe_params)?;
            let vrf_output = pqvrf::keccak::keccak256_concat(&[&c1, &c2]);
            c2[0] ^= 0xff;
            let ring = driver.bus.lock().state().ring();
            let delegator = (r as usize) % driver.addresses().len();
            let mut rng = rng_for(&cfg);
            let pkg = pqvrf::delegation::delegate_key(
                &group,
                &driver.key_material().participants[delegator],
                delegator,
                &driver.key_material().offchain.pk_off,
                &r.to_be_bytes(),
                &mut rng,
            );
            let proof = pqvrf::delegation::offchain_sign(
                &group,
                &driver.key_material().offchain.sk_off,
                &pkg,
                &seed,
                &vrf_output,
                &ring,
                driver.key_material().sig_mode,
                &mut rng,
            )?;
            let receipt = driver
                .bus
                .lock()
                .apply(LedgerTx::SubmitResult { c1, c2, proof })?
                .expect("submission yields a receipt");
            std::fs::write(dir.join("receipt.txt"), format!("status={}\n", receipt.status))?;
            if receipt.status == 0 {
                tampered_rejections += 1;
            }
            continue;
        }
        let artifacts = driver.run_round()?;
        std::fs::write(dir.join("seed.txt"), format!("{}\n", artifacts.seed))?;
        std::fs::write(dir.join("vrf_output.txt"), format!("{}\n", artifacts.vrf_output))?;
        std::fs::write(dir.join("c1.hex"), hex::encode(&artifacts.c1))?;
        std::fs::write(dir.join("c2.hex"), hex::encode(&artifacts.c2))?;
        std::fs::write(dir.join("proof.txt"), artifacts.proof.to_armored(&group))?;
        std::fs::write(
            dir.join("receipt.txt"),
            format!("status={}\n", artifacts.receipt.status),
        )?;
        if artifacts.receipt.status != 1 {
            return Ok(CliOutcome::VerifyFailed(format!(
                "round {r} submission rejected"
            )));
        }
    }

    let ledger = driver.bus.lock();
    std::fs::write(args.out_dir.join("events.log"), ledger.event_log_lines())?;
    std::fs::write(args.out_dir.join("state.txt"), ledger.snapshot())?;
    std::fs::write(
        args.out_dir.join("ring.txt"),
        ring_to_armored(&group, &ledger.state().ring()),
    )?;
    drop(ledger);

    if args.tamper {
        if tampered_rejections == rounds {
            println!("tampered submission rejected");
            return Ok(CliOutcome::VerifyFailed("tampered submission rejected".into()));
        }
        return Ok(CliOutcome::InputError(
            "tampered submission unexpectedly accepted".into(),
        ));
    }
    println!("completed {rounds} rounds into {}", args.out_dir.display());
    Ok(CliOutcome::Ok)
}

fn cmd_verify(args: VerifyArgs) -> anyhow::Result<CliOutcome> {
    let Some(group) = pqvrf::group::GroupParams::by_name(&args.group) else {
        return Ok(CliOutcome::InputError(format!("unknown group {}", args.group)));
    };
    let read = |p: &Path| -> Result<String, CliOutcome> {
        std::fs::read_to_string(p)
            .map_err(|e| CliOutcome::InputError(format!("cannot read {}: {e}", p.display())))
    };
    let proof_text = match read(&args.proof) {
        Ok(t) => t,
        Err(o) => return Ok(o),
    };
    let ring_text = match read(&args.ring) {
        Ok(t) => t,
        Err(o) => return Ok(o),
    };
    let proof = match VrfProof::from_armored(&group, &proof_text) {
        Ok(p) => p,
        Err(e) => return Ok(CliOutcome::InputError(format!("malformed proof: {e}"))),
    };
    let ring = match ring_from_armored(&group, &ring_text) {
        Ok(r) => r,
        Err(e) => return Ok(CliOutcome::InputError(format!("malformed ring: {e}"))),
    };
    if verify(&group, &proof, &ring) {
        println!("proof verifies: output={}", proof.vrf_output);
        Ok(CliOutcome::Ok)
    } else {
        Ok(CliOutcome::VerifyFailed("ring signature check failed".into()))
    }
}

fn cmd_nist(args: NistArgs) -> anyhow::Result<CliOutcome> {
    let cfg = match resolve(&args.common) {
        Ok(c) => c,
        Err(e) => return Ok(CliOutcome::InputError(format!("{e:#}"))),
    };
    if args.bits % 8 != 0 {
        return Ok(CliOutcome::InputError("--bits must be a multiple of 8".into()));
    }
    let total_bytes = args.sequences * args.bits / 8;
    let stream: Vec<u8> = match args.source.as_str() {
        "pipeline" => {
            let mut rng = rng_for(&cfg);
            let mut vrf_cfg = cfg.vrf_config();
            // the statistical stream only depends on the seed chain and
            // the lattice keys, so the fast test group keeps desk-scale
            // runs desk-scale
            vrf_cfg.group = cfg.group.clone();
            let km = match gen(&vrf_cfg, &mut rng) {
                Ok(km) => km,
                Err(e) => return Ok(CliOutcome::InputError(e.to_string())),
            };
            let mut driver = ProtocolDriver::new(
                km,
                cfg.threshold,
                &cfg.seed.unwrap_or(1).to_be_bytes(),
                cfg.seed.unwrap_or(1),
            )?;
            driver.output_stream(total_bytes)?
        }
        "zeros" => vec![0u8; total_bytes],
        "file" => {
            let Some(path) = &args.file else {
                return Ok(CliOutcome::InputError("--source file needs --file".into()));
            };
            let data = std::fs::read(path)?;
            if data.len() < total_bytes {
                return Ok(CliOutcome::InputError(format!(
                    "{} holds {} bytes, need {total_bytes}",
                    path.display(),
                    data.len()
                )));
            }
            data[..total_bytes].to_vec()
        }
        other => {
            return Ok(CliOutcome::InputError(format!("unknown source {other:?}")))
        }
    };

    let suite_cfg = SuiteConfig {
        sequences: args.sequences,
        bits_per_sequence: args.bits,
        alpha: args.alpha,
        ..SuiteConfig::default()
    };
    let bytes_per_seq = args.bits / 8;
    let report = run_suite(
        |i| BitSequence::from_bytes(&stream[i * bytes_per_seq..(i + 1) * bytes_per_seq]),
        &suite_cfg,
    );
    std::fs::create_dir_all(&args.out_dir)?;
    let table = report.render_table();
    std::fs::write(args.out_dir.join("report.txt"), &table)?;
    std::fs::write(args.out_dir.join("report.tsv"), report.render_tsv())?;
    print!("{table}");
    Ok(CliOutcome::Ok)
}

fn cmd_bench(args: BenchArgs) -> anyhow::Result<CliOutcome> {
    let report = complexity_report(ComplexityInputs {
        hash_bits: args.hash_bits,
        participants: args.participants,
        poly_degree: args.poly_degree,
        log_p: args.log_p,
    });
    let mut text = report.render();
    if args.measure {
        text.push_str(&measure_wall_clock());
    }
    if let Some(out) = &args.out {
        std::fs::write(out, &text)?;
    }
    print!("{text}");
    Ok(CliOutcome::Ok)
}

fn measure_wall_clock() -> String {
    use std::time::Instant;
    let mut out = String::from("measured | operation | iterations | total\n");
    let mut data = [0u8; 1024];
    ChaCha20Rng::seed_from_u64(1).fill_bytes(&mut data);
    let t = Instant::now();
    for _ in 0..1000 {
        let _ = pqvrf::keccak256(&data);
    }
    out.push_str(&format!(
        "measured | keccak256 over 1 KiB | 1000 | {:?}\n",
        t.elapsed()
    ));
    let params = pqvrf::rlwe::RlweParams::r256();
    let poly = params.zero_ring();
    let t = Instant::now();
    for _ in 0..1000 {
        let _ = params.fwd_ntt(&poly);
    }
    out.push_str(&format!(
        "measured | forward NTT (N=256) | 1000 | {:?}\n",
        t.elapsed()
    ));
    let gp = pqvrf::group::GroupParams::modp2048();
    let mut rng = ChaCha20Rng::seed_from_u64(2);
    let e = gp.random_scalar(&mut rng);
    let t = Instant::now();
    for _ in 0..10 {
        let _ = gp.exp_g(&e);
    }
    out.push_str(&format!(
        "measured | modexp (2048-bit group) | 10 | {:?}\n",
        t.elapsed()
    ));
    out
}

fn cmd_report(args: ReportArgs) -> anyhow::Result<CliOutcome> {
    let text = match std::fs::read_to_string(&args.input) {
        Ok(t) => t,
        Err(e) => {
            return Ok(CliOutcome::InputError(format!(
                "cannot read {}: {e}",
                args.input.display()
            )))
        }
    };
    if !text.starts_with("# nist-suite v1") {
        return Ok(CliOutcome::InputError("not a suite report file".into()));
    }
    let mut rendered = String::new();
    for line in text.lines() {
        if line.starts_with('#') {
            rendered.push_str(&format!(
                "{}\n",
                line.trim_start_matches('#').trim().replace('\t', " ")
            ));
            continue;
        }
        rendered.push_str(&line.replace('\t', " | "));
        rendered.push('\n');
    }
    print!("{rendered}");
    Ok(CliOutcome::Ok)
}
