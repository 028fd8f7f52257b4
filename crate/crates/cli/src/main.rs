//! Command-line pipeline: verify a network, trim it to the sparsest secure
//! topology, construct a concrete encoding matrix, certify a stored matrix
//! against the exact oracles, and simulate error correction.
//!
//! Exit codes: 0 success, 2 input error, 3 infeasible input, 4 construction
//! attempts exhausted, 5 internal consistency failure (checkers that must
//! agree did not). All indices in output are 1-based.

mod report;

use std::io::Read;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use sman_core::{
    block_security_level_by_rank, block_security_level_of_code, check_weak_security_by_rank,
    check_weak_security_exact, construct_code, min_cut_report, trim_with, verify_mds_code,
    verify_weak_security_code, CodegenError, EncodingMatrix, FieldPrime, GfError, Message,
    OracleError, Sman, SmanError, TrimError, TrimVerifier, Verdict, DEFAULT_ENUMERATION_BUDGET,
};

use report::{sha256_hex, verdict_text, verdict_witness_json, witness_text, RunReport};

#[derive(Debug, Parser)]
#[command(name = "sman", version)]
#[command(about = "weakly secure MDS coding for simple multiple access networks")]
struct Cli {
    /// Emit a machine-readable JSON report on stdout instead of text.
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    /// Subset-enumeration checker.
    Brute,
    /// Polynomial-time max-flow checker.
    Flow,
    /// Run both and require agreement.
    Both,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check the MDS and weak-security conditions of a network file
    Verify {
        /// Network file (text or JSON); `-` reads stdin.
        path: String,

        #[arg(long, value_enum, default_value_t = Method::Both)]
        method: Method,

        /// Include the auxiliary flow networks in the output.
        #[arg(long)]
        dump_networks: bool,
    },

    /// Remove links until every source keeps exactly n-k+2 relays
    Trim {
        path: String,

        /// Re-verify each removal with the brute-force checker instead of
        /// the max-flow checker.
        #[arg(long)]
        audit: bool,
    },

    /// Sample a verified weakly secure MDS encoding matrix for a network
    Construct {
        path: String,

        #[arg(long, default_value_t = 65537)]
        prime: u64,

        #[arg(long, default_value_t = 0)]
        seed: u64,

        #[arg(long, default_value_t = 64)]
        attempts: u32,
    },

    /// Verify a stored encoding matrix and certify its security levels
    Certify {
        /// Encoding-matrix file (text or JSON); `-` reads stdin.
        path: String,

        /// Run the exhaustive entropy oracle when q^k is at most this.
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_BUDGET)]
        oracle_budget: u64,
    },

    /// Corrupt random codewords and measure nearest-codeword recovery
    Simulate {
        path: String,

        /// Corrupted coordinates per trial.
        #[arg(long, default_value_t = 1)]
        errors: usize,

        #[arg(long, default_value_t = 200)]
        trials: u32,

        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

const EXIT_INPUT: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;
const EXIT_RETRY_EXHAUSTED: u8 = 4;
const EXIT_INCONSISTENT: u8 = 5;

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

impl From<SmanError> for Failure {
    fn from(err: SmanError) -> Self {
        let code = match err {
            SmanError::MdsConditionFails { .. } => EXIT_INFEASIBLE,
            _ => EXIT_INPUT,
        };
        Failure::new(code, err.to_string())
    }
}

impl From<TrimError> for Failure {
    fn from(err: TrimError) -> Self {
        match &err {
            TrimError::NotWeaklySecure { witness } => Failure::new(
                EXIT_INFEASIBLE,
                format!("{err} (witness {})", witness_text(witness)),
            ),
            TrimError::TargetUnreachable { .. } => Failure::new(EXIT_INFEASIBLE, err.to_string()),
            TrimError::LinkAbsent { .. } => Failure::new(EXIT_INPUT, err.to_string()),
        }
    }
}

impl From<CodegenError> for Failure {
    fn from(err: CodegenError) -> Self {
        let code = match &err {
            CodegenError::NotWeaklySecure { witness } => {
                return Failure::new(
                    EXIT_INFEASIBLE,
                    format!("{err} (witness {})", witness_text(witness)),
                )
            }
            CodegenError::AttemptsExhausted { .. } => EXIT_RETRY_EXHAUSTED,
            _ => EXIT_INPUT,
        };
        Failure::new(code, err.to_string())
    }
}

impl From<GfError> for Failure {
    fn from(err: GfError) -> Self {
        Failure::new(EXIT_INPUT, err.to_string())
    }
}

impl From<OracleError> for Failure {
    fn from(err: OracleError) -> Self {
        let code = match err {
            OracleError::NonUniformConditional | OracleError::EntropyMismatch { .. } => {
                EXIT_INCONSISTENT
            }
            _ => EXIT_INPUT,
        };
        Failure::new(code, err.to_string())
    }
}

struct CommandOutput {
    report: RunReport,
    stdout: String,
    stderr: String,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(output) => {
            if cli.json {
                println!("{}", output.report.to_json());
            } else {
                print!("{}", output.stdout);
                eprint!("{}", output.stderr);
            }
            ExitCode::SUCCESS
        }
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

fn read_input(path: &str) -> Result<(Vec<u8>, String), Failure> {
    let bytes = if path == "-" {
        let mut buf = Vec::new();
        std::io::stdin()
            .read_to_end(&mut buf)
            .map_err(|e| Failure::new(EXIT_INPUT, format!("reading stdin: {e}")))?;
        buf
    } else {
        std::fs::read(path).map_err(|e| Failure::new(EXIT_INPUT, format!("reading {path}: {e}")))?
    };
    let text = String::from_utf8(bytes.clone())
        .map_err(|_| Failure::new(EXIT_INPUT, format!("{path} is not valid UTF-8")))?;
    Ok((bytes, text))
}

fn run(cli: &Cli) -> Result<CommandOutput, Failure> {
    let started = Instant::now();
    match &cli.command {
        Command::Verify {
            path,
            method,
            dump_networks,
        } => cmd_verify(path, *method, *dump_networks, started),
        Command::Trim { path, audit } => cmd_trim(path, *audit, started),
        Command::Construct {
            path,
            prime,
            seed,
            attempts,
        } => cmd_construct(path, *prime, *seed, *attempts, started),
        Command::Certify {
            path,
            oracle_budget,
        } => cmd_certify(path, *oracle_budget, started),
        Command::Simulate {
            path,
            errors,
            trials,
            seed,
        } => cmd_simulate(path, *errors, *trials, *seed, started),
    }
}

fn cmd_verify(
    path: &str,
    method: Method,
    dump_networks: bool,
    started: Instant,
) -> Result<CommandOutput, Failure> {
    let (bytes, text) = read_input(path)?;
    let s = Sman::parse(&text)?;

    let mds = s.check_mds_condition();
    let row = s.check_row_condition();
    let brute = match method {
        Method::Brute | Method::Both => Some(s.check_weak_security_condition()),
        Method::Flow => None,
    };
    let flow = match method {
        Method::Flow | Method::Both => Some(min_cut_report(&s)),
        Method::Brute => None,
    };

    let agreement = match (&brute, &flow) {
        (Some(b), Some(f)) => {
            if b.holds() != f.verdict.holds() {
                return Err(Failure::new(
                    EXIT_INCONSISTENT,
                    format!(
                        "weak-security checkers disagree: brute-force says {}, max-flow says {}; input:\n{}",
                        verdict_text(b),
                        verdict_text(&f.verdict),
                        s.to_text()
                    ),
                ));
            }
            Some(true)
        }
        _ => None,
    };

    let ws: &Verdict = brute
        .as_ref()
        .unwrap_or_else(|| &flow.as_ref().expect("one checker ran").verdict);
    let profile = if mds.holds() {
        Some(s.block_security_profile().map_err(Failure::from)?)
    } else {
        None
    };

    let method_name = match method {
        Method::Brute => "brute",
        Method::Flow => "flow",
        Method::Both => "both",
    };

    let mut stdout = String::new();
    stdout.push_str(&format!("mds-condition: {}\n", verdict_text(&mds)));
    stdout.push_str(&format!("weak-security-condition: {}\n", verdict_text(ws)));
    stdout.push_str(&format!("row-form-condition: {}\n", verdict_text(&row)));
    match &profile {
        Some(p) => {
            let levels: Vec<String> = p.levels().iter().map(usize::to_string).collect();
            stdout.push_str(&format!("block-security-profile: ({})\n", levels.join(", ")));
        }
        None => stdout.push_str("block-security-profile: none (mds condition fails)\n"),
    }
    stdout.push_str(&format!("method: {method_name}\n"));
    if let Some(f) = flow.as_ref().and_then(|r| r.failure.as_ref()) {
        stdout.push_str(&format!(
            "min-cut: flow {} < {} at excluded-source {}, sink {}\n",
            f.flow,
            s.n(),
            f.excluded_source + 1,
            f.sink_slot + 1
        ));
    }

    let mut networks = Value::Null;
    if dump_networks {
        let mut entries = Vec::new();
        for excluded in 0..s.k() {
            let net = sman_core::FlowNetwork::build(&s, excluded);
            stdout.push_str(&format!("network excluded-source {}:\n{}", excluded + 1, net.dump()));
            entries.push(json!({
                "excluded_source": excluded + 1,
                "arcs": net.dump(),
            }));
        }
        networks = Value::Array(entries);
    }

    let report = RunReport {
        command: format!("verify --method {method_name}"),
        input_sha256: sha256_hex(&bytes),
        seed: None,
        result: json!({
            "mds": mds.holds(),
            "weak_security": ws.holds(),
            "row_form": row.holds(),
            "method": method_name,
            "agreement": agreement,
        }),
        witness: json!({
            "mds": verdict_witness_json(&mds),
            "weak_security": verdict_witness_json(ws),
            "row_form": verdict_witness_json(&row),
            "flow_failure": flow
                .as_ref()
                .and_then(|r| r.failure.as_ref())
                .map(|f| json!({
                    "excluded_source": f.excluded_source + 1,
                    "sink": f.sink_slot + 1,
                    "flow": f.flow,
                }))
                .unwrap_or(Value::Null),
        }),
        matrix: Value::Null,
        profile: profile
            .as_ref()
            .map(|p| json!(p.levels()))
            .unwrap_or(Value::Null),
        details: json!({
            "k": s.k(),
            "n": s.n(),
            "flow_stats": flow.as_ref().map(|r| json!({
                "networks_built": r.stats.networks_built,
                "flow_runs": r.stats.flow_runs,
                "augmentations": r.stats.augmentations,
            })).unwrap_or(Value::Null),
            "networks": networks,
        }),
        wall_time_ms: started.elapsed().as_millis(),
    };
    Ok(CommandOutput {
        report,
        stdout,
        stderr: String::new(),
    })
}

fn cmd_trim(path: &str, audit: bool, started: Instant) -> Result<CommandOutput, Failure> {
    let (bytes, text) = read_input(path)?;
    let s = Sman::parse(&text)?;
    let verifier = if audit {
        TrimVerifier::BruteForce
    } else {
        TrimVerifier::Flow
    };
    let outcome = trim_with(&s, verifier)?;

    let mut stderr = String::new();
    for &(source, relay) in &outcome.removals {
        stderr.push_str(&format!("removed {} {}\n", source + 1, relay + 1));
    }

    let trimmed_rows: Vec<Vec<u8>> = (0..outcome.trimmed.k())
        .map(|i| {
            (0..outcome.trimmed.n())
                .map(|j| outcome.trimmed.has_link(i, j) as u8)
                .collect()
        })
        .collect();

    let report = RunReport {
        command: format!("trim{}", if audit { " --audit" } else { "" }),
        input_sha256: sha256_hex(&bytes),
        seed: None,
        result: json!({
            "feasible": true,
            "target_row_degree": outcome.trimmed.n() - outcome.trimmed.k() + 2,
            "removed_links": outcome.removals.len(),
        }),
        witness: Value::Null,
        matrix: json!(trimmed_rows),
        profile: Value::Null,
        details: json!({
            "removals": outcome
                .removals
                .iter()
                .map(|&(s, r)| json!([s + 1, r + 1]))
                .collect::<Vec<_>>(),
            "verifier": if audit { "brute" } else { "flow" },
            "verifier_calls": outcome.verifier_calls,
        }),
        wall_time_ms: started.elapsed().as_millis(),
    };
    Ok(CommandOutput {
        report,
        stdout: outcome.trimmed.to_text(),
        stderr,
    })
}

fn cmd_construct(
    path: &str,
    prime: u64,
    seed: u64,
    attempts: u32,
    started: Instant,
) -> Result<CommandOutput, Failure> {
    let (bytes, text) = read_input(path)?;
    let s = Sman::parse(&text)?;
    let field = FieldPrime::new(prime)?;
    let built = construct_code(&s, field, seed, attempts)?;
    let code = &built.code;

    let rows: Vec<Vec<u64>> = (0..code.k())
        .map(|i| (0..code.n()).map(|j| code.matrix().entry(i, j)).collect())
        .collect();

    let report = RunReport {
        command: format!("construct --prime {prime} --seed {seed} --attempts {attempts}"),
        input_sha256: sha256_hex(&bytes),
        seed: Some(seed),
        result: json!({
            "attempts": built.attempts,
            "prime": prime,
            "mds_verified": true,
            "weak_security_verified": true,
        }),
        witness: Value::Null,
        matrix: json!(rows),
        profile: Value::Null,
        details: json!({
            "k": code.k(),
            "n": code.n(),
            "max_attempts": attempts,
        }),
        wall_time_ms: started.elapsed().as_millis(),
    };
    Ok(CommandOutput {
        report,
        stdout: code.to_text(),
        stderr: format!(
            "attempts: {}\nmds: verified\nweak-security: verified\n",
            built.attempts
        ),
    })
}

fn cmd_certify(path: &str, budget: u64, started: Instant) -> Result<CommandOutput, Failure> {
    let (bytes, text) = read_input(path)?;
    let code = EncodingMatrix::parse(&text)?;
    let g = code.matrix();
    let (k, q) = (code.k(), code.field().modulus());

    let mds = verify_mds_code(g);
    let ws_algebraic = verify_weak_security_code(g);
    let ws_rank = check_weak_security_by_rank(g);
    if ws_algebraic != ws_rank {
        return Err(Failure::new(
            EXIT_INCONSISTENT,
            "weak-security verifier disagrees with the rank criterion",
        ));
    }
    let levels_rank: Vec<usize> = (1..k)
        .map(|strength| block_security_level_by_rank(g, strength).map_err(Failure::from))
        .collect::<Result<_, _>>()?;

    let space = (q as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
    let oracle_ran = space <= budget as u128;
    let mut ws_exact = None;
    let mut levels_oracle: Option<Vec<usize>> = None;
    if oracle_ran {
        let exact = check_weak_security_exact(g, budget)?;
        if exact != ws_algebraic {
            return Err(Failure::new(
                EXIT_INCONSISTENT,
                format!(
                    "entropy oracle says weak security = {exact}, algebraic verifier says {ws_algebraic}"
                ),
            ));
        }
        ws_exact = Some(exact);
        let levels: Vec<usize> = (1..k)
            .map(|strength| block_security_level_of_code(g, strength, budget).map_err(Failure::from))
            .collect::<Result<_, _>>()?;
        if levels != levels_rank {
            return Err(Failure::new(
                EXIT_INCONSISTENT,
                format!(
                    "entropy oracle levels {levels:?} disagree with rank-criterion levels {levels_rank:?}"
                ),
            ));
        }
        levels_oracle = Some(levels);
    }

    let mut stdout = String::new();
    stdout.push_str(&format!(
        "mds-code: {}\n",
        if mds { "verified" } else { "FAILED" }
    ));
    stdout.push_str(&format!(
        "weak-security-code: {}\n",
        if ws_algebraic { "verified" } else { "FAILED" }
    ));
    let levels_text: Vec<String> = levels_rank.iter().map(usize::to_string).collect();
    stdout.push_str(&format!(
        "block-security-levels: ({})\n",
        levels_text.join(", ")
    ));
    if oracle_ran {
        stdout.push_str(&format!(
            "entropy-oracle: confirmed (message space {space} within budget {budget})\n"
        ));
    } else {
        stdout.push_str(&format!(
            "entropy-oracle: skipped (message space {space} exceeds budget {budget})\n"
        ));
    }

    let report = RunReport {
        command: format!("certify --oracle-budget {budget}"),
        input_sha256: sha256_hex(&bytes),
        seed: None,
        result: json!({
            "mds": mds,
            "weak_security": ws_algebraic,
            "oracle_ran": oracle_ran,
            "weak_security_exact": ws_exact,
            "oracle_matches": oracle_ran.then_some(true),
        }),
        witness: Value::Null,
        matrix: Value::Null,
        profile: json!(levels_rank),
        details: json!({
            "k": k,
            "n": code.n(),
            "prime": q,
            "message_space": space.to_string(),
            "oracle_budget": budget,
            "levels_by_oracle": levels_oracle,
        }),
        wall_time_ms: started.elapsed().as_millis(),
    };
    Ok(CommandOutput {
        report,
        stdout,
        stderr: String::new(),
    })
}

fn cmd_simulate(
    path: &str,
    errors: usize,
    trials: u32,
    seed: u64,
    started: Instant,
) -> Result<CommandOutput, Failure> {
    let (bytes, text) = read_input(path)?;
    let code = EncodingMatrix::parse(&text)?;
    let (k, n, q) = (code.k(), code.n(), code.field().modulus());
    if errors > n {
        return Err(Failure::new(
            EXIT_INPUT,
            format!("cannot corrupt {errors} of {n} coordinates"),
        ));
    }
    let space = (q as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
    if space > DEFAULT_ENUMERATION_BUDGET as u128 {
        return Err(Failure::new(
            EXIT_INPUT,
            format!(
                "message space {space} exceeds the decoding budget {DEFAULT_ENUMERATION_BUDGET}"
            ),
        ));
    }

    let mds = verify_mds_code(code.matrix());
    // floor((n - k + 1) / 2): the guaranteed correction radius of an MDS code.
    let half_distance = (n - k).div_ceil(2);
    let guaranteed = mds && errors <= half_distance;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut recovered = 0u32;
    for _ in 0..trials {
        let values: Vec<u64> = (0..k).map(|_| rng.gen_range(0..q)).collect();
        let message = Message::new(code.field(), &values);
        let codeword = code.encode(&message);
        let mut corrupted = codeword.clone();
        for position in rand::seq::index::sample(&mut rng, n, errors) {
            let delta = rng.gen_range(1..q);
            corrupted = corrupted
                .with_coordinate(position, (corrupted.values()[position] + delta) % q);
        }
        match code.decode_nearest(&corrupted, DEFAULT_ENUMERATION_BUDGET) {
            Ok(decoded) if decoded.message == message => recovered += 1,
            Ok(_) => {}
            Err(CodegenError::AmbiguousDecode { .. }) => {}
            Err(other) => return Err(other.into()),
        }
    }
    let rate = f64::from(recovered) / f64::from(trials.max(1));

    let stdout = format!(
        "recovered {recovered}/{trials} ({:.1}%)  errors={errors}  guarantee: {}\n",
        rate * 100.0,
        if guaranteed {
            format!("yes (errors <= {half_distance}, mds code)")
        } else {
            format!("no (half-distance bound {half_distance}, mds: {mds})")
        }
    );

    let report = RunReport {
        command: format!("simulate --errors {errors} --trials {trials} --seed {seed}"),
        input_sha256: sha256_hex(&bytes),
        seed: Some(seed),
        result: json!({
            "trials": trials,
            "errors": errors,
            "recovered": recovered,
            "success_rate": rate,
            "guaranteed": guaranteed,
        }),
        witness: Value::Null,
        matrix: Value::Null,
        profile: Value::Null,
        details: json!({
            "k": k,
            "n": n,
            "prime": q,
            "mds": mds,
            "half_distance_bound": half_distance,
        }),
        wall_time_ms: started.elapsed().as_millis(),
    };
    Ok(CommandOutput {
        report,
        stdout,
        stderr: String::new(),
    })
}
