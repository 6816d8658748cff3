//! `RunConfig` and its `key = value` text form.
//!
//! ```text
//! [set]
//! family = corollary
//! rho = 0.25
//! n_max = 5
//!
//! [solver]
//! nodes_per_interval = 16
//! ```
//!
//! Unknown sections or keys are rejected so that a typo cannot silently fall
//! back to a default.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use kjellberg::{build_corollary, build_example_sodin, build_kjellberg, build_thick, IntervalSet, SolveOptions};

use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum SetSource {
    Kjellberg { alpha: f64, beta: f64, n_min: i32, n_max: i32 },
    Corollary { rho: f64, n_max: u32 },
    Sodin { n_max: u32 },
    Thick { p: f64, n_max: u32 },
    File(PathBuf),
}

impl SetSource {
    pub fn build(&self) -> Result<IntervalSet, CliError> {
        let set = match *self {
            SetSource::Kjellberg { alpha, beta, n_min, n_max } => build_kjellberg(alpha, beta, n_min, n_max)?,
            SetSource::Corollary { rho, n_max } => build_corollary(rho, n_max)?,
            SetSource::Sodin { n_max } => build_example_sodin(n_max)?,
            SetSource::Thick { p, n_max } => build_thick(p, n_max)?,
            SetSource::File(ref path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
                IntervalSet::from_text(&text)?
            }
        };
        Ok(set)
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            SetSource::Kjellberg { .. } => "kjellberg",
            SetSource::Corollary { .. } => "corollary",
            SetSource::Sodin { .. } => "sodin",
            SetSource::Thick { .. } => "thick",
            SetSource::File(_) => "file",
        }
    }
}

/// Everything a run depends on. Written next to the artifacts, so any output
/// directory can be regenerated from its own `run.cfg`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub set: SetSource,
    pub nodes_per_interval: usize,
    pub panel_order: usize,
    pub tolerance: f64,
    /// Analysis window `(r1, r2)`; `None` means `[e, trust radius]`.
    pub window: Option<(f64, f64)>,
    /// Enabled checks; empty enables the whole artifact suite.
    pub checks: Vec<String>,
    pub seed: u64,
    pub n_walks: usize,
    pub radii: Vec<f64>,
    pub skip: usize,
    pub grid_points: usize,
    pub out_dir: PathBuf,
    pub deterministic: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        let solver = SolveOptions::default();
        Self {
            set: SetSource::Corollary { rho: 0.25, n_max: 5 },
            nodes_per_interval: solver.nodes_per_interval,
            panel_order: solver.panel_order,
            tolerance: solver.tolerance,
            window: None,
            checks: Vec::new(),
            seed: 1,
            n_walks: 100_000,
            radii: vec![25.0, 50.0, 100.0, 200.0],
            skip: 0,
            grid_points: 10_000,
            out_dir: PathBuf::from("out"),
            deterministic: false,
        }
    }
}

impl RunConfig {
    pub fn solve_options(&self) -> SolveOptions {
        SolveOptions {
            nodes_per_interval: self.nodes_per_interval,
            panel_order: self.panel_order,
            tolerance: self.tolerance,
            ..SolveOptions::default()
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::from("[set]\n");
        let _ = writeln!(s, "family = {}", self.set.family_name());
        match &self.set {
            SetSource::Kjellberg { alpha, beta, n_min, n_max } => {
                let _ = writeln!(s, "alpha = {alpha:?}\nbeta = {beta:?}\nn_min = {n_min}\nn_max = {n_max}");
            }
            SetSource::Corollary { rho, n_max } => {
                let _ = writeln!(s, "rho = {rho:?}\nn_max = {n_max}");
            }
            SetSource::Sodin { n_max } => {
                let _ = writeln!(s, "n_max = {n_max}");
            }
            SetSource::Thick { p, n_max } => {
                let _ = writeln!(s, "p = {p:?}\nn_max = {n_max}");
            }
            SetSource::File(path) => {
                let _ = writeln!(s, "path = {}", path.display());
            }
        }
        let _ = writeln!(
            s,
            "\n[solver]\nnodes_per_interval = {}\npanel_order = {}\ntolerance = {:?}",
            self.nodes_per_interval, self.panel_order, self.tolerance
        );
        s.push_str("\n[analysis]\n");
        if let Some((a, b)) = self.window {
            let _ = writeln!(s, "window = {a:?} {b:?}");
        }
        let _ = writeln!(s, "checks = {}", self.checks.join(" "));
        let _ = writeln!(s, "skip = {}\ngrid_points = {}", self.skip, self.grid_points);
        let radii: Vec<String> = self.radii.iter().map(|r| format!("{r:?}")).collect();
        let _ = writeln!(
            s,
            "\n[mc]\nseed = {}\nn_walks = {}\nradii = {}",
            self.seed,
            self.n_walks,
            radii.join(" ")
        );
        let _ = writeln!(
            s,
            "\n[output]\ndir = {}\ndeterministic = {}",
            self.out_dir.display(),
            self.deterministic
        );
        s
    }

    pub fn from_text(text: &str) -> Result<Self, CliError> {
        let mut cfg = RunConfig::default();
        let mut section = String::new();
        let mut family: Option<String> = None;
        let mut set_keys: Vec<(String, String)> = Vec::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                section = name.trim().to_string();
                continue;
            }
            let bad = |msg: String| CliError::Usage(format!("config line {}: {msg}", no + 1));
            let (key, value) = line.split_once('=').ok_or_else(|| bad("expected `key = value`".into()))?;
            let (key, value) = (key.trim(), value.trim());
            match (section.as_str(), key) {
                ("set", "family") => family = Some(value.to_string()),
                ("set", _) => set_keys.push((key.to_string(), value.to_string())),
                ("solver", "nodes_per_interval") => cfg.nodes_per_interval = parse(value).map_err(bad)?,
                ("solver", "panel_order") => cfg.panel_order = parse(value).map_err(bad)?,
                ("solver", "tolerance") => cfg.tolerance = parse(value).map_err(bad)?,
                ("analysis", "window") => {
                    let v: Vec<f64> = parse_list(value).map_err(bad)?;
                    if v.len() != 2 {
                        return Err(bad("window needs two numbers".into()));
                    }
                    cfg.window = Some((v[0], v[1]));
                }
                ("analysis", "checks") => cfg.checks = value.split_whitespace().map(str::to_string).collect(),
                ("analysis", "skip") => cfg.skip = parse(value).map_err(bad)?,
                ("analysis", "grid_points") => cfg.grid_points = parse(value).map_err(bad)?,
                ("mc", "seed") => cfg.seed = parse(value).map_err(bad)?,
                ("mc", "n_walks") => cfg.n_walks = parse(value).map_err(bad)?,
                ("mc", "radii") => cfg.radii = parse_list(value).map_err(bad)?,
                ("output", "dir") => cfg.out_dir = PathBuf::from(value),
                ("output", "deterministic") => cfg.deterministic = parse(value).map_err(bad)?,
                _ => return Err(bad(format!("unknown key `{key}` in section [{section}]"))),
            }
        }
        if let Some(family) = family {
            cfg.set = set_from_keys(&family, &set_keys)?;
        } else if !set_keys.is_empty() {
            return Err(CliError::Usage("[set] section without `family`".into()));
        }
        Ok(cfg)
    }
}

pub fn set_from_keys(family: &str, keys: &[(String, String)]) -> Result<SetSource, CliError> {
    let get = |name: &str| keys.iter().rev().find(|(k, _)| k == name).map(|(_, v)| v.as_str());
    fn need<T: FromStr>(v: Option<&str>, name: &str) -> Result<T, CliError> {
        let v = v.ok_or_else(|| CliError::Usage(format!("missing set parameter `{name}`")))?;
        parse(v).map_err(CliError::Usage)
    }
    let source = match family {
        "kjellberg" => SetSource::Kjellberg {
            alpha: need(get("alpha"), "alpha")?,
            beta: need(get("beta"), "beta")?,
            n_min: need(get("n_min"), "n_min")?,
            n_max: need(get("n_max"), "n_max")?,
        },
        "corollary" => SetSource::Corollary { rho: need(get("rho"), "rho")?, n_max: need(get("n_max"), "n_max")? },
        "sodin" => SetSource::Sodin { n_max: need(get("n_max"), "n_max")? },
        "thick" => SetSource::Thick { p: need(get("p"), "p")?, n_max: need(get("n_max"), "n_max")? },
        "file" => SetSource::File(PathBuf::from(get("path").ok_or_else(|| CliError::Usage("missing `path`".into()))?)),
        other => return Err(CliError::Usage(format!("unknown family `{other}`"))),
    };
    Ok(source)
}

fn parse<T: FromStr>(v: &str) -> Result<T, String> {
    v.parse().map_err(|_| format!("cannot parse `{v}`"))
}

fn parse_list<T: FromStr>(v: &str) -> Result<Vec<T>, String> {
    v.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty()).map(parse).collect()
}

/// `"0..12"` → `(0, 12)`; a bare `"12"` means `(0, 12)`.
pub fn parse_range(v: &str) -> Result<(i32, i32), CliError> {
    let bad = || CliError::Usage(format!("cannot parse range `{v}`"));
    match v.split_once("..") {
        Some((a, b)) => Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?)),
        None => Ok((0, v.trim().parse().map_err(|_| bad())?)),
    }
}
