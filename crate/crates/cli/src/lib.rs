//! Batch driver: builds sets, solves, constructs products, runs checks and
//! writes CSV/SVG reports. `main.rs` is only argument parsing on top of this.

pub mod commands;
pub mod config;
pub mod criteria;
pub mod svg;

use std::path::{Path, PathBuf};

use kjellberg::{in_d1, IntervalSet};
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("missing artifact {}: run `{}` first", .path.display(), .producer)]
    MissingArtifact { path: PathBuf, producer: &'static str },

    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },

    #[error(transparent)]
    Core(#[from] kjellberg::Error),

    #[error("{0} check(s) failed")]
    ChecksFailed(usize),
}

impl CliError {
    /// 0 pass, 1 check failure, 2 usage error, 3 solver failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::ChecksFailed(_) => 1,
            CliError::Core(kjellberg::Error::SolverFailure { .. } | kjellberg::Error::Nonpositive { .. }) => 3,
            _ => 2,
        }
    }
}

pub(crate) fn read(path: &Path, producer: &'static str) -> Result<String, CliError> {
    if !path.exists() {
        return Err(CliError::MissingArtifact { path: path.to_path_buf(), producer });
    }
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

pub(crate) fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

/// `n` points of `D_1` with `r_min <= |z| <= r_max`, spread by the additive
/// R2 sequence in `(log|z|, arg z)`. Different `phase` values give disjoint
/// index ranges, hence independent grids.
pub fn d1_grid(set: &IntervalSet, (r_min, r_max): (f64, f64), n: usize, phase: u64) -> Vec<Complex64> {
    // Plastic-number increments.
    const A1: f64 = 0.754_877_666_246_692_8;
    const A2: f64 = 0.569_840_290_998_053_3;
    let (l0, l1) = (r_min.ln(), r_max.ln());
    let mut out = Vec::with_capacity(n);
    let mut k = phase.wrapping_mul(1 << 26);
    // D_1 covers most of any annulus, so this terminates quickly; the cap
    // guards against a window swallowed by the set.
    let cap = k + (1 << 26);
    while out.len() < n && k < cap {
        let (s, t) = ((0.5 + k as f64 * A1).fract(), (0.5 + k as f64 * A2).fract());
        let z = Complex64::from_polar((l0 + s * (l1 - l0)).exp().clamp(r_min * (1.0 + 1e-12), r_max * (1.0 - 1e-12)), std::f64::consts::PI * (2.0 * t - 1.0));
        if in_d1(set, z) {
            out.push(z);
        }
        k += 1;
    }
    out
}
