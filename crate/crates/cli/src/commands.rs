//! The five subcommands. Each post-solve command works from the artifacts in
//! an output directory, starting from its `run.cfg`.

use std::f64::consts::E;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use kjellberg::growth::{check_monotonicity, trusted_gaps};
use kjellberg::numeric::log_space;
use kjellberg::wos::DecayReport;
use kjellberg::{
    approx_error, approx_error_with, bracket, check_annulus_harnack, check_beurling, check_min_type, harnack_check,
    log_integral, profile, solve, verify_example_decay, CheckRecord, EntireProduct, HarmonicApprox, IntervalSet,
    ZeroSequence,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{RunConfig, SetSource};
use crate::svg::{heat_map, Plot, Scale, Series};
use crate::{criteria, d1_grid, read, write, CliError};

/// Grid phases: construction calibrates `R_emp` on one grid, the
/// `approx_error` check re-tests on another.
pub const CALIBRATION_PHASE: u64 = 0;
pub const TEST_PHASE: u64 = 1;

/// Names accepted by `check --only`, besides `criterion-1` … `criterion-13`.
pub const ARTIFACT_CHECKS: [&str; 7] =
    ["monotonicity", "beurling", "harnack", "annulus", "min_type", "zeros", "approx_error"];

pub struct Artifacts {
    pub dir: PathBuf,
}

impl Artifacts {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }
}

/// The solved state of an output directory.
pub struct Loaded {
    pub cfg: RunConfig,
    pub set: IntervalSet,
    pub h: HarmonicApprox,
}

pub fn load(art: &Artifacts) -> Result<Loaded, CliError> {
    let cfg = RunConfig::from_text(&read(&art.path("run.cfg"), "solve")?)?;
    let set = IntervalSet::from_text(&read(&art.path("set.txt"), "solve")?)?;
    let h = HarmonicApprox::from_table(&read(&art.path("approx.tbl"), "solve")?, &set)?;
    Ok(Loaded { cfg, set, h })
}

fn load_product(art: &Artifacts) -> Result<Option<EntireProduct>, CliError> {
    let path = art.path("product.txt");
    if !path.exists() {
        return Ok(None);
    }
    Ok(Some(EntireProduct::from_text(&read(&path, "construct")?)?))
}

fn key_values(text: &str) -> Vec<(String, String)> {
    text.lines()
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .collect()
}

fn lookup(kv: &[(String, String)], key: &str) -> Option<f64> {
    kv.iter().find(|(k, _)| k == key).and_then(|(_, v)| v.parse().ok())
}

/// Writes `run.cfg`, `set.txt`, `approx.tbl` and `solve.txt`.
pub fn cmd_solve(cfg: &RunConfig) -> Result<HarmonicApprox, CliError> {
    let art = Artifacts::new(&cfg.out_dir);
    std::fs::create_dir_all(&art.dir).map_err(|source| CliError::Io { path: art.dir.display().to_string(), source })?;
    let set = cfg.set.build()?;
    log::info!("solving on {} intervals", set.len());
    let h = solve(&set, &cfg.solve_options())?;
    let d = h.diagnostics();
    write(&art.path("run.cfg"), &cfg.to_text())?;
    write(&art.path("set.txt"), &set.to_text())?;
    write(&art.path("approx.tbl"), &h.to_table())?;
    let diag = format!(
        "unknowns = {}\ncondition = {:e}\ncollocation_residual = {:e}\ncheck_residual = {:e}\nclamped = {}\n\
         scaling_rounds = {}\nu0 = {:?}\ntotal_mass = {:?}\ntrust_radius = {:?}\n",
        d.unknowns,
        d.condition,
        d.collocation_residual,
        d.check_residual,
        d.clamped,
        d.scaling_rounds,
        h.u0(),
        h.measure().total_mass(),
        h.trust_radius()
    );
    write(&art.path("solve.txt"), &diag)?;
    Ok(h)
}

#[derive(Debug, Clone)]
pub struct ConstructSummary {
    pub zeros: usize,
    pub r_emp: f64,
    pub fitted_c: f64,
    pub sup_ratio: f64,
    pub upper_violations: usize,
}

/// Discretizes the measure and writes `zeros.txt`, `product.txt`,
/// `approx_error.csv` and `construct.txt` (with `R_emp`). In continuum mode
/// the potential itself stands in for `log|f|`, so the error field is zero.
pub fn cmd_construct(art: &Artifacts, skip: usize, continuum: bool) -> Result<ConstructSummary, CliError> {
    let Loaded { cfg, set, h } = load(art)?;
    let mut fp = EntireProduct::from_approx(&h);
    if fp.zeros().is_empty() {
        return Err(CliError::Usage("total Riesz mass below 1: no zeros to place".into()));
    }
    if skip > 0 {
        fp = fp.shifted_variant(skip)?;
    }
    let window = (E, h.trust_radius());
    if !(window.1 > window.0) {
        return Err(CliError::Usage(format!("trust radius {} too small for an error grid", window.1)));
    }
    let grid = d1_grid(&set, window, cfg.grid_points, CALIBRATION_PHASE);
    let report = if continuum {
        approx_error_with(&h, &grid, window.0, |z| h.eval(z))?
    } else {
        approx_error(&fp, &h, &grid, window.0)?
    };
    write(&art.path("zeros.txt"), &fp.zeros().to_text())?;
    write(&art.path("product.txt"), &fp.to_text())?;
    write(&art.path("approx_error.csv"), &report.to_csv())?;
    let summary = ConstructSummary {
        zeros: fp.zeros().count(),
        r_emp: report.r_emp,
        fitted_c: report.fitted_c,
        sup_ratio: report.sup_ratio,
        upper_violations: report.upper_violations.len(),
    };
    write(
        &art.path("construct.txt"),
        &format!(
            "zeros = {}\nskip = {skip}\ncontinuum = {continuum}\nr_emp = {:?}\nfitted_c = {:?}\nsup_ratio = {:?}\n\
             upper_violations = {}\n",
            summary.zeros, summary.r_emp, summary.fitted_c, summary.sup_ratio, summary.upper_violations
        ),
    )?;
    Ok(summary)
}

/// Every zero lies on `E*`, and the counting function trails the measure
/// by less than one.
pub fn check_zeros(set: &IntervalSet, h: &HarmonicApprox, zeros: &ZeroSequence) -> Vec<CheckRecord> {
    let off = zeros.zeros().iter().copied().filter(|&x| !set.contains(x)).count();
    let on_set = CheckRecord::new(
        "zeros_in_set",
        off == 0 && !zeros.is_empty(),
        0.0 - off as f64,
        format!("{off} of {} zeros off E*", zeros.count()),
    );
    let mut worst = f64::INFINITY;
    for &x in zeros.zeros() {
        let mu = h.mu_cumulative(x);
        let gap = mu - zeros.counting(x) as f64;
        let slack = 1e-6 * mu.max(1.0);
        worst = worst.min((gap + slack).min(1.0 + slack - gap));
    }
    let counting = CheckRecord::new("zero_counting", worst > 0.0, worst, "0 <= mu(x_n) - n(x_n) < 1");
    vec![on_set, counting]
}

/// Log-uniform pairs `r1 < r2` in `[lo, hi]`.
pub fn seeded_pairs(seed: u64, lo: f64, hi: f64, n: usize) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|_| {
            let x = rng.random_range(a..b).exp();
            let y = rng.random_range(a..b).exp();
            if x < y {
                (x, y)
            } else {
                (y, x)
            }
        })
        .filter(|(x, y)| y > x)
        .collect()
}

/// Runs the artifact checks named in `only` (all of them when empty) and any
/// `criterion-N` targets, writing `check.csv`. Criterion 13 re-invokes `exe`.
pub fn cmd_check(art: &Artifacts, only: &[String], exe: Option<&Path>) -> Result<Vec<CheckRecord>, CliError> {
    let mut criteria_ids = Vec::new();
    let mut names: Vec<&str> = Vec::new();
    for name in only {
        if let Some(id) = name.strip_prefix("criterion-") {
            let id: usize = id.parse().map_err(|_| CliError::Usage(format!("unknown check `{name}`")))?;
            if !(1..=criteria::COUNT).contains(&id) {
                return Err(CliError::Usage(format!("no criterion {id}")));
            }
            criteria_ids.push(id);
        } else if let Some(known) = ARTIFACT_CHECKS.iter().find(|c| **c == name) {
            names.push(known);
        } else {
            return Err(CliError::Usage(format!(
                "unknown check `{name}`; expected one of {} or criterion-1..{}",
                ARTIFACT_CHECKS.join(", "),
                criteria::COUNT
            )));
        }
    }
    if only.is_empty() {
        names = ARTIFACT_CHECKS.to_vec();
    }
    let mut records = Vec::new();
    if !names.is_empty() {
        let Loaded { cfg, set, h } = load(art)?;
        let trust = h.trust_radius();
        let product = load_product(art)?;
        for name in &names {
            match *name {
                "monotonicity" => {
                    let (a, b) = check_monotonicity(&h, &log_space(0.1, trust, 100), 100);
                    records.extend([a, b]);
                }
                "beurling" => records.push(check_beurling(&h, &set, &seeded_pairs(cfg.seed, 1.0, trust, 100))),
                "harnack" => {
                    let report = harnack_check(&h, &log_space(1.0, trust, 51)[1..])?;
                    records.push(CheckRecord::new(
                        "harnack",
                        report.passed(),
                        report.min_margin(),
                        format!("{} radii, {} violations", report.samples.len(), report.violations()),
                    ));
                }
                "annulus" => records.push(check_annulus_harnack(&h, &trusted_gaps(&h))?),
                "min_type" => records.push(check_min_type(&h, 64).record()),
                "zeros" => match &product {
                    Some(fp) => records.extend(check_zeros(&set, &h, fp.zeros())),
                    None if !only.is_empty() => {
                        return Err(CliError::MissingArtifact { path: art.path("product.txt"), producer: "construct" })
                    }
                    None => {}
                },
                "approx_error" => {
                    let construct = art.path("construct.txt");
                    match &product {
                        Some(fp) if fp.skip() == 0 && construct.exists() => {
                            let kv = key_values(&read(&construct, "construct")?);
                            if kv.iter().any(|(k, v)| k == "continuum" && v == "true") {
                                continue;
                            }
                            let r_emp = lookup(&kv, "r_emp").unwrap_or(0.0).max(E);
                            if r_emp < trust {
                                let grid = d1_grid(&set, (r_emp, trust), cfg.grid_points, TEST_PHASE);
                                let report = approx_error(fp, &h, &grid, r_emp)?;
                                records.push(CheckRecord::new(
                                    "approx_error",
                                    report.upper_violations.is_empty(),
                                    0.0 - report.upper_violations.len() as f64,
                                    format!(
                                        "{} points beyond R_emp = {r_emp:.4e}, fitted C = {:.4}",
                                        grid.len(),
                                        report.fitted_c
                                    ),
                                ));
                            }
                        }
                        _ if !only.is_empty() => {
                            return Err(CliError::MissingArtifact { path: construct, producer: "construct" })
                        }
                        _ => {}
                    }
                }
                _ => unreachable!(),
            }
        }
    }
    for id in criteria_ids {
        let o = criteria::run(id, exe)?;
        records.push(CheckRecord::new(format!("criterion-{id}"), o.passed, f64::NAN, o.detail));
    }
    let mut csv = String::from("name,passed,margin,detail\n");
    for r in &records {
        let _ = writeln!(csv, "{},{},{:e},\"{}\"", r.name, r.passed, r.margin, r.detail.replace('"', "'"));
    }
    if art.dir.is_dir() {
        write(&art.path("check.csv"), &csv)?;
    }
    Ok(records)
}

/// Walk-on-spheres decay comparison at each radius; writes `omega.csv`
/// and `decay.csv`.
pub fn cmd_measure(
    art: &Artifacts,
    radii: &[f64],
    n_walks: usize,
    seed: u64,
    serial: bool,
) -> Result<DecayReport, CliError> {
    let Loaded { h, .. } = load(art)?;
    let report = verify_example_decay(&h, radii, n_walks, seed, serial)?;
    write(&art.path("omega.csv"), &report.to_csv(seed))?;
    let mut csv = String::from("r,start,u_center,boundary_max,bound,margin,scaled\n");
    for (s, scaled) in report.samples.iter().zip(report.scaled()) {
        let _ = writeln!(
            csv,
            "{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
            s.r,
            s.start.re,
            s.u_center,
            s.boundary_max,
            s.bound(),
            s.margin(),
            scaled
        );
    }
    write(&art.path("decay.csv"), &csv)?;
    Ok(report)
}

fn csv_rows(text: &str) -> Vec<Vec<f64>> {
    text.lines().skip(1).map(|l| l.split(',').filter_map(|v| v.parse().ok()).collect()).collect()
}

fn emit(art: &Artifacts, stem: &str, csv: &str, svg: &str, out: &mut Vec<PathBuf>) -> Result<(), CliError> {
    let (c, s) = (art.path(&format!("{stem}.csv")), art.path(&format!("{stem}.svg")));
    write(&c, csv)?;
    write(&s, svg)?;
    out.push(s);
    Ok(())
}

/// Plots with their CSVs: growth, envelope, density, rho, error field and
/// omega scaling, plus the decay plot for the Sodin family and the scaling
/// ratio plot for Kjellberg's. Returns the SVG paths.
pub fn cmd_report(art: &Artifacts) -> Result<Vec<PathBuf>, CliError> {
    let Loaded { cfg, set, h } = load(art)?;
    let trust = h.trust_radius();
    let radii = log_space(E.min(trust / 2.0), trust, 120);
    let mut out = Vec::new();

    let g = profile(&h, &radii, false);
    let plot = Plot {
        title: "circle extrema",
        x_label: "r",
        y_label: "u",
        x_scale: Scale::Log,
        y_scale: Scale::Log,
        series: vec![
            Series { label: "B(r)", points: radii.iter().copied().zip(g.b_values.iter().copied()).collect() },
            Series { label: "A(r)", points: radii.iter().copied().zip(g.a_values.iter().copied()).collect() },
        ],
    };
    emit(art, "growth", &g.to_csv(), &plot.render(), &mut out)?;

    let env: Vec<(f64, f64)> = radii.iter().zip(&g.b_values).map(|(&r, &b)| (r.ln(), b / r.sqrt())).collect();
    let mut csv = String::from("log_r,u_over_sqrt_r\n");
    for (x, y) in &env {
        let _ = writeln!(csv, "{x:e},{y:e}");
    }
    let plot = Plot {
        title: "u(r)/sqrt(r)",
        x_label: "log r",
        y_label: "u(r)/sqrt(r)",
        x_scale: Scale::Linear,
        y_scale: Scale::Linear,
        series: vec![Series { label: "envelope", points: env }],
    };
    emit(art, "envelope", &csv, &plot.render(), &mut out)?;

    let mut density = Vec::new();
    let mut bound = (Vec::new(), Vec::new());
    let mut csv_d = String::from("log_r,density_quotient\n");
    let mut csv_b = String::from("log_r,rho_upper_over_log_r,beurling_over_log_r,log_u_over_log_r\n");
    for &r in radii.iter().filter(|&&r| r > 1.0) {
        let q = log_integral(&set, r)? / r.ln();
        density.push((r.ln(), q));
        let _ = writeln!(csv_d, "{:e},{q:e}", r.ln());
        let b = bracket(&h, r)?;
        bound.0.push((r.ln(), b.rho_ratio));
        bound.1.push((r.ln(), b.beurling_ratio));
        let _ = writeln!(csv_b, "{:e},{:e},{:e},{:e}", r.ln(), b.rho_ratio, b.beurling_ratio, b.value);
    }
    let plot = Plot {
        title: "log-density quotient of E*",
        x_label: "log r",
        y_label: "(1/log r) int dt/t",
        x_scale: Scale::Linear,
        y_scale: Scale::Linear,
        series: vec![Series { label: "quotient", points: density }],
    };
    emit(art, "density", &csv_d, &plot.render(), &mut out)?;
    let plot = Plot {
        title: "growth bracket",
        x_label: "log r",
        y_label: "/ log r",
        x_scale: Scale::Linear,
        y_scale: Scale::Linear,
        series: vec![
            Series { label: "rho_upper", points: bound.0 },
            Series { label: "beurling", points: bound.1 },
        ],
    };
    emit(art, "rho", &csv_b, &plot.render(), &mut out)?;

    let err = art.path("approx_error.csv");
    let (csv, cells) = if err.exists() {
        let text = read(&err, "construct")?;
        let cells = csv_rows(&text)
            .into_iter()
            .filter(|r| r.len() == 5)
            .map(|r| {
                let z = Complex64::new(r[0], r[1]);
                (z.norm().ln(), z.arg(), r[4])
            })
            .collect::<Vec<_>>();
        (text, cells)
    } else {
        (String::from("re,im,u,logf,diff\n"), Vec::new())
    };
    emit(art, "error_field", &csv, &heat_map("log|f| - u", "log|z|", "arg z", &cells), &mut out)?;

    let omega = art.path("omega.csv");
    let (csv, pts) = if omega.exists() {
        let text = read(&omega, "measure")?;
        let pts = csv_rows(&text).into_iter().filter(|r| r.len() >= 2).map(|r| (r[0], r[1] * r[0] / (16.0 * r[0]).ln())).collect();
        (text, pts)
    } else {
        (String::from("r,omega_hat,ci95,n_walks,seed\n"), Vec::new())
    };
    let plot = Plot {
        title: "omega_hat r / log(16 r)",
        x_label: "r",
        y_label: "scaled omega",
        x_scale: Scale::Log,
        y_scale: Scale::Linear,
        series: vec![Series { label: "walk-on-spheres", points: pts }],
    };
    emit(art, "omega", &csv, &plot.render(), &mut out)?;

    match cfg.set {
        SetSource::Sodin { n_max } => {
            // -n lies on E; sample u between the slits, at -(n + 1/2).
            let mut csv = String::from("r,u_minus_r\n");
            let mut pts = Vec::new();
            for n in 1..n_max.min(trust as u32) {
                let r = n as f64 + 0.5;
                let u = h.eval(Complex64::new(-r, 0.0));
                let _ = writeln!(csv, "{r:e},{u:e}");
                pts.push((r, u));
            }
            let plot = Plot {
                title: "u(-r) between slits",
                x_label: "r",
                y_label: "u(-r)",
                x_scale: Scale::Log,
                y_scale: Scale::Log,
                series: vec![Series { label: "u(-r)", points: pts }],
            };
            emit(art, "u_decay", &csv, &plot.render(), &mut out)?;
        }
        SetSource::Kjellberg { beta, .. } => {
            let mut csv = String::from("r,theta,ratio\n");
            let mut series = Vec::new();
            for theta in [0.0, 1.0, 2.0] {
                let mut pts = Vec::new();
                for &r in &radii {
                    if beta * r > trust {
                        break;
                    }
                    let z = Complex64::from_polar(r, theta);
                    let q = h.eval(z * beta) / h.eval(z);
                    let _ = writeln!(csv, "{r:e},{theta},{q:e}");
                    pts.push((r, q));
                }
                series.push(pts);
            }
            let labels = ["theta = 0", "theta = 1", "theta = 2"];
            let plot = Plot {
                title: "u(beta z)/u(z)",
                x_label: "|z|",
                y_label: "ratio",
                x_scale: Scale::Log,
                y_scale: Scale::Linear,
                series: series.into_iter().zip(labels).map(|(points, label)| Series { label, points }).collect(),
            };
            emit(art, "scaling", &csv, &plot.render(), &mut out)?;
        }
        _ => {}
    }
    Ok(out)
}
