//! Layer and config loading, with digests of everything read.

use std::fmt;
use std::path::{Path, PathBuf};

use mixaudit_core::ciphersim::CipherConfig;
use mixaudit_core::gf2::BlockView;
use mixaudit_core::io::{emit_matrix, parse_gf_matrix, parse_matrix};
use mixaudit_core::layers::{builtin_layer, LayerSummary};
use mixaudit_core::{gf, Error};
use serde::Serialize;
use sha2::{Digest, Sha256};

/// Exit codes shared by every command.
pub mod exit {
    pub const INTERNAL: u8 = 1;
    pub const INVALID: u8 = 2;
    pub const INFEASIBLE: u8 = 3;
    pub const PRECONDITION: u8 = 4;
}

/// An error with the exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }

    pub fn invalid(message: impl Into<String>) -> Self {
        Self::new(exit::INVALID, message)
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::GuardExceeded { .. } | Error::BudgetExceeded { .. } => exit::INFEASIBLE,
            Error::Precondition(_) => exit::PRECONDITION,
            Error::EmptySet => exit::INTERNAL,
            _ => exit::INVALID,
        };
        Self::new(code, e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, Failure>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InputDigest {
    pub source: String,
    pub sha256: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

#[derive(Clone, Copy, Debug, Default)]
pub struct LayerOptions {
    pub m: Option<usize>,
    pub delta: Option<usize>,
    pub gf: bool,
    pub transpose: bool,
}

impl LayerOptions {
    fn shape(&self) -> CliResult<Option<(usize, usize)>> {
        match (self.m, self.delta) {
            (Some(m), Some(d)) => Ok(Some((m, d))),
            (None, None) => Ok(None),
            _ => Err(Failure::invalid("--m and --delta must be given together")),
        }
    }
}

/// Metadata of a loaded layer as it appears in reports.
#[derive(Clone, Debug, Serialize)]
pub struct LayerInfo {
    pub source: String,
    pub n: usize,
    pub m: usize,
    pub delta: usize,
    pub transposed: bool,
    pub builtin: Option<LayerSummary>,
}

pub struct LoadedLayer {
    pub view: BlockView,
    pub info: LayerInfo,
    pub digest: InputDigest,
}

enum Source {
    Builtin(String),
    File(PathBuf),
}

fn parse_source(source: &str, base: Option<&Path>) -> Source {
    if let Some(name) = source.strip_prefix("builtin:") {
        return Source::Builtin(name.to_string());
    }
    let path = PathBuf::from(source.strip_prefix("file:").unwrap_or(source));
    match base {
        Some(dir) if path.is_relative() => Source::File(dir.join(path)),
        _ => Source::File(path),
    }
}

fn read(path: &Path) -> CliResult<Vec<u8>> {
    std::fs::read(path).map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))
}

fn text(path: &Path, bytes: &[u8]) -> CliResult<String> {
    String::from_utf8(bytes.to_vec())
        .map_err(|_| Failure::invalid(format!("{}: not valid UTF-8", path.display())))
}

fn with_path(path: &Path, e: Error) -> Failure {
    let mut f = Failure::from(e);
    f.message = format!("{}: {}", path.display(), f.message);
    f
}

/// Loads `builtin:<name>`, `file:<path>` or a bare path. Relative paths
/// resolve against `base` when given.
pub fn load_layer(source: &str, opts: LayerOptions, base: Option<&Path>) -> CliResult<LoadedLayer> {
    let shape = opts.shape()?;
    let (view, builtin, digest) = match parse_source(source, base) {
        Source::Builtin(name) => {
            if opts.gf {
                return Err(Failure::invalid("--gf applies to files only"));
            }
            // Builtins that fix their own shape are re-blocked below.
            let fixed = builtin_layer(&name, None);
            let d = match fixed {
                Ok(d) => d,
                Err(_) if shape.is_some() => builtin_layer(&name, shape)?,
                Err(e) => return Err(e.into()),
            };
            let digest = sha256_hex(emit_matrix(&d.matrix).as_bytes());
            (d.matrix.clone(), Some(d.summary()), digest)
        }
        Source::File(path) => {
            let bytes = read(&path)?;
            let body = text(&path, &bytes)?;
            let view = if opts.gf {
                let mut field = parse_gf_matrix(&body).map_err(|e| with_path(&path, e))?;
                if opts.transpose {
                    field = field.transpose();
                }
                gf::lift_gf_matrix(&field)?
            } else {
                parse_matrix(&body).map_err(|e| with_path(&path, e))?
            };
            (view, None, sha256_hex(&bytes))
        }
    };

    let mut matrix = view.matrix().clone();
    if opts.transpose && !opts.gf {
        matrix = matrix.transpose();
    }
    let (m, delta) = shape.unwrap_or((view.m(), view.delta()));
    let view = BlockView::new(matrix, m, delta)?;
    Ok(LoadedLayer {
        info: LayerInfo {
            source: source.to_string(),
            n: view.n(),
            m,
            delta,
            transposed: opts.transpose,
            builtin,
        },
        digest: InputDigest {
            source: source.to_string(),
            sha256: digest,
        },
        view,
    })
}

pub struct LoadedConfig {
    pub config: CipherConfig,
    pub layer: LoadedLayer,
    pub digests: Vec<InputDigest>,
}

/// Reads a cipher config and the layer it names, checking the shapes agree.
pub fn load_config(path: &Path) -> CliResult<LoadedConfig> {
    let bytes = read(path)?;
    let config: CipherConfig = serde_json::from_slice(&bytes)
        .map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))?;
    let opts = LayerOptions {
        m: Some(config.m),
        delta: Some(config.delta),
        ..LayerOptions::default()
    };
    let base = path.parent().filter(|p| !p.as_os_str().is_empty());
    let layer = load_layer(&config.layer, opts, base)?;
    let digests = vec![
        InputDigest {
            source: path.display().to_string(),
            sha256: sha256_hex(&bytes),
        },
        layer.digest.clone(),
    ];
    Ok(LoadedConfig {
        config,
        layer,
        digests,
    })
}
