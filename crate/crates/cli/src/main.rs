//! `mixaudit`: type-preservation and primitivity checks for mixing layers.

mod input;
mod render;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Map, Value};

use mixaudit_core::ciphersim::{CipherKind, FeistelGostCipher, SpnModCipher};
use mixaudit_core::classifier::{classify, oracle_classify, OracleBudget, MAX_ORACLE_N};
use mixaudit_core::groupan::{
    attack_demo, coset_partition, feistel_block_search, spnmod_primitivity, PrimitivityVerdict,
    SearchBudget,
};
use mixaudit_core::io::emit_matrix;
use mixaudit_core::layers::{builtin_catalog, builtin_layer};
use mixaudit_core::VerdictKind;

use input::{exit, load_config, load_layer, CliResult, Failure, InputDigest, LayerOptions};

const TYPE_PRESERVING: u8 = 10;
const DISAGREEMENT: u8 = 5;
const IMPRIMITIVE: u8 = 11;

#[derive(Parser)]
#[command(name = "mixaudit", version, about)]
struct Cli {
    /// Print a JSON envelope instead of text.
    #[arg(long, global = true)]
    json: bool,

    /// Worker threads (0 lets rayon decide).
    #[arg(long, global = true, env = "MIXAUDIT_THREADS", default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct LayerArgs {
    /// builtin:<name>, file:<path> or a path.
    input: String,
    /// Brick width; re-blocks the matrix. Needs --delta.
    #[arg(long)]
    m: Option<usize>,
    /// Brick count. Needs --m.
    #[arg(long)]
    delta: Option<usize>,
    /// Input is a matrix over F_{2^m}.
    #[arg(long)]
    gf: bool,
    /// Use the transpose (for matrices written for a left action).
    #[arg(long)]
    transpose: bool,
}

impl LayerArgs {
    fn options(&self) -> LayerOptions {
        LayerOptions {
            m: self.m,
            delta: self.delta,
            gf: self.gf,
            transpose: self.transpose,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether a layer preserves some nontrivial bounded type.
    Classify(LayerArgs),
    /// Check the classifier against exhaustive enumeration (n <= 16).
    Oracle {
        #[command(flatten)]
        layer: LayerArgs,
        #[arg(long, default_value_t = OracleBudget::default().max_sets)]
        max_sets: u64,
        /// Count every preserved set instead of stopping at the first.
        #[arg(long)]
        count_all: bool,
    },
    /// Decide primitivity of the group generated by a cipher's rounds.
    Primitivity {
        #[arg(long)]
        config: PathBuf,
        /// Closure seeds to try in the Feistel search.
        #[arg(long)]
        max_seeds: Option<u64>,
    },
    /// Predict ciphertext cosets of an imprimitive SPN cipher.
    Attack {
        #[arg(long)]
        config: PathBuf,
        /// Partition into cosets of the subgroup generated by 2^q.
        #[arg(long)]
        q: usize,
        #[arg(long, default_value_t = 3)]
        rounds: usize,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Builtin layers.
    #[command(subcommand)]
    Layers(LayersCommand),
}

#[derive(Subcommand)]
enum LayersCommand {
    List,
    /// Print a builtin in the matrix file format.
    Emit {
        name: String,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        delta: Option<usize>,
    },
}

/// What a command produced, before rendering.
struct Outcome {
    command: &'static str,
    seed: Option<u64>,
    budgets: Map<String, Value>,
    inputs: Vec<InputDigest>,
    result: Value,
    text: String,
    code: u8,
}

#[derive(Serialize)]
struct Envelope<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    seed: Option<u64>,
    budgets: &'a Map<String, Value>,
    inputs: &'a [InputDigest],
    result: &'a Value,
}

fn to_value(v: impl Serialize) -> CliResult<Value> {
    serde_json::to_value(v).map_err(|e| Failure::new(exit::INTERNAL, e.to_string()))
}

fn run(cli: &Cli) -> CliResult<Outcome> {
    match &cli.command {
        Command::Classify(args) => {
            let layer = load_layer(&args.input, args.options(), None)?;
            let v = classify(&layer.view)?;
            let code = match v.kind {
                VerdictKind::NonTypePreserving => 0,
                VerdictKind::TypePreserving => TYPE_PRESERVING,
            };
            Ok(Outcome {
                command: "classify",
                seed: None,
                budgets: Map::new(),
                text: format!("{}\n{}", render::layer(&layer.info), render::verdict(&v)),
                result: json!({ "layer": to_value(&layer.info)?, "verdict": to_value(&v)? }),
                inputs: vec![layer.digest],
                code,
            })
        }
        Command::Oracle {
            layer: args,
            max_sets,
            count_all,
        } => {
            let layer = load_layer(&args.input, args.options(), None)?;
            if layer.info.n > MAX_ORACLE_N {
                return Err(Failure::new(
                    exit::INFEASIBLE,
                    format!(
                        "oracle enumerates at most n = {MAX_ORACLE_N} bits, layer has {}",
                        layer.info.n
                    ),
                ));
            }
            let budget = OracleBudget {
                max_sets: *max_sets,
                count_all: *count_all,
            };
            let structural = classify(&layer.view)?;
            let oracle = oracle_classify(&layer.view, budget)?;
            let agree = structural.kind == oracle.kind;
            let mut budgets = Map::new();
            budgets.insert("max_sets".into(), json!(max_sets));
            budgets.insert("count_all".into(), json!(count_all));
            Ok(Outcome {
                command: "oracle",
                seed: None,
                budgets,
                text: format!(
                    "{}\n{}\n{}",
                    render::layer(&layer.info),
                    render::verdict(&structural),
                    render::oracle(&oracle, agree)
                ),
                result: json!({
                    "layer": to_value(&layer.info)?,
                    "structural": to_value(&structural)?,
                    "oracle": to_value(&oracle)?,
                    "agree": agree,
                }),
                inputs: vec![layer.digest],
                code: if agree { 0 } else { DISAGREEMENT },
            })
        }
        Command::Primitivity { config, max_seeds } => {
            let loaded = load_config(config)?;
            let cfg = &loaded.config;
            let sboxes = cfg.sboxes()?;
            let zero_not_fixed = sboxes.zero_not_fixed();
            let view = loaded.layer.view.clone();
            let mut budgets = Map::new();
            let report = match cfg.kind {
                CipherKind::Spnmod => spnmod_primitivity(&SpnModCipher::new(sboxes, view)?),
                CipherKind::Feistel => {
                    let budget = max_seeds.map_or_else(SearchBudget::default, |s| SearchBudget {
                        max_seeds: s,
                    });
                    budgets.insert("max_seeds".into(), json!(max_seeds));
                    feistel_block_search(&FeistelGostCipher::new(sboxes, view)?, budget)?
                }
            };
            let code = match report.verdict {
                PrimitivityVerdict::Primitive => 0,
                PrimitivityVerdict::Imprimitive => IMPRIMITIVE,
                PrimitivityVerdict::Undecided => exit::INFEASIBLE,
            };
            Ok(Outcome {
                command: "primitivity",
                seed: Some(cfg.sbox_seed),
                budgets,
                text: format!(
                    "{}\n{}",
                    render::layer(&loaded.layer.info),
                    render::primitivity(&report)
                ),
                result: json!({
                    "config": to_value(cfg)?,
                    "layer": to_value(&loaded.layer.info)?,
                    "zero_not_fixed": zero_not_fixed,
                    "invariant_qs": report.invariant_qs(),
                    "report": to_value(&report)?,
                }),
                inputs: loaded.digests,
                code,
            })
        }
        Command::Attack {
            config,
            q,
            rounds,
            trials,
            seed,
        } => {
            let loaded = load_config(config)?;
            let cfg = &loaded.config;
            if cfg.kind != CipherKind::Spnmod {
                return Err(Failure::invalid("the coset attack applies to spnmod ciphers"));
            }
            let cipher = SpnModCipher::new(cfg.sboxes()?, loaded.layer.view.clone())?;
            let part = coset_partition(*q, cipher.n())?;
            let stats = attack_demo(&cipher, &part, *rounds, *trials, *seed)?;
            let mut budgets = Map::new();
            budgets.insert("rounds".into(), json!(rounds));
            budgets.insert("trials".into(), json!(trials));
            Ok(Outcome {
                command: "attack",
                seed: Some(*seed),
                budgets,
                text: format!(
                    "{}\n{}",
                    render::layer(&loaded.layer.info),
                    render::attack(&stats)
                ),
                code: if stats.confirmed == stats.trials { 0 } else { exit::INTERNAL },
                result: json!({
                    "config": to_value(cfg)?,
                    "layer": to_value(&loaded.layer.info)?,
                    "attack": to_value(&stats)?,
                }),
                inputs: loaded.digests,
            })
        }
        Command::Layers(LayersCommand::List) => {
            let catalog = builtin_catalog();
            let text = catalog
                .iter()
                .map(|(name, syntax, about)| format!("{name:<10} {syntax:<26} {about}"))
                .collect::<Vec<_>>()
                .join("\n");
            let result = catalog
                .iter()
                .map(|(name, syntax, about)| {
                    json!({ "name": name, "syntax": syntax, "description": about })
                })
                .collect();
            Ok(Outcome {
                command: "layers list",
                seed: None,
                budgets: Map::new(),
                inputs: Vec::new(),
                result: Value::Array(result),
                text,
                code: 0,
            })
        }
        Command::Layers(LayersCommand::Emit { name, m, delta }) => {
            let shape = match (m, delta) {
                (Some(m), Some(d)) => Some((*m, *d)),
                (None, None) => None,
                _ => return Err(Failure::invalid("--m and --delta must be given together")),
            };
            let d = builtin_layer(name, shape)?;
            let text = emit_matrix(&d.matrix);
            let digest = InputDigest {
                source: format!("builtin:{name}"),
                sha256: input::sha256_hex(text.as_bytes()),
            };
            Ok(Outcome {
                command: "layers emit",
                seed: None,
                budgets: Map::new(),
                inputs: vec![digest],
                result: json!({ "layer": to_value(d.summary())?, "matrix": text }),
                text: text.trim_end().to_string(),
                code: 0,
            })
        }
    }
}

/// Writes to stdout, ignoring a closed pipe.
fn emit(text: &str) {
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        // Only fails if a pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global();
    }
    match run(&cli) {
        Ok(out) => {
            if cli.json {
                let envelope = Envelope {
                    tool: "mixaudit",
                    version: env!("CARGO_PKG_VERSION"),
                    command: out.command,
                    seed: out.seed,
                    budgets: &out.budgets,
                    inputs: &out.inputs,
                    result: &out.result,
                };
                match serde_json::to_string_pretty(&envelope) {
                    Ok(s) => emit(&s),
                    Err(e) => {
                        eprintln!("error: {e}");
                        return ExitCode::from(exit::INTERNAL);
                    }
                }
            } else {
                emit(&out.text);
            }
            ExitCode::from(out.code)
        }
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code)
        }
    }
}
