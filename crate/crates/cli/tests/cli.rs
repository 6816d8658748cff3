use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn kjellberg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kjellberg")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn text(out: &Output) -> String {
    format!("{}{}", String::from_utf8_lossy(&out.stdout), String::from_utf8_lossy(&out.stderr))
}

fn solve_corollary(dir: &Path) {
    let d = dir.to_str().unwrap();
    let out = kjellberg(&["solve", "--family", "corollary", "--rho", "0.25", "--n", "4", "--out", d]);
    assert_eq!(code(&out), 0, "{}", text(&out));
}

#[test]
fn kjellberg_solve_writes_a_measure_table() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path().to_str().unwrap();
    let out = kjellberg(&[
        "solve", "--family", "kjellberg", "--alpha", "2", "--beta", "4", "--n", "0..12", "--nodes", "48", "--out", d,
    ]);
    assert_eq!(code(&out), 0, "{}", text(&out));
    let table = fs::read_to_string(tmp.path().join("approx.tbl")).unwrap();
    assert!(table.lines().filter(|l| !l.starts_with('#')).count() >= 13 * 48);
    let cfg = fs::read_to_string(tmp.path().join("run.cfg")).unwrap();
    assert!(cfg.contains("family = kjellberg") && cfg.contains("n_min = 0") && cfg.contains("nodes_per_interval = 48"));
    let diag = fs::read_to_string(tmp.path().join("solve.txt")).unwrap();
    assert!(diag.contains("check_residual") && diag.contains("trust_radius"));
}

#[test]
fn interval_file_and_config_file_inputs() {
    let tmp = TempDir::new().unwrap();
    let set = tmp.path().join("my_set.txt");
    fs::write(&set, "# explicit\n4 8\n1 2\n").unwrap();
    let a = tmp.path().join("a");
    let out = kjellberg(&["solve", "--intervals", set.to_str().unwrap(), "--out", a.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", text(&out));
    let written = fs::read_to_string(a.join("set.txt")).unwrap();
    assert_eq!(written.lines().skip(1).collect::<Vec<_>>(), ["1.0 2.0", "4.0 8.0"]);

    let b = tmp.path().join("b");
    let cfg = tmp.path().join("run.cfg");
    fs::write(&cfg, format!("[set]\nfamily = thick\np = 0.5\nn_max = 4\n\n[output]\ndir = {}\n", b.display())).unwrap();
    let out = kjellberg(&["solve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", text(&out));
    assert!(b.join("approx.tbl").exists());
}

#[test]
fn usage_errors_exit_two() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path().to_str().unwrap();
    assert_eq!(code(&kjellberg(&["solve", "--out", d])), 2);
    assert_eq!(code(&kjellberg(&["solve", "--family", "nope", "--out", d])), 2);
    assert_eq!(code(&kjellberg(&["solve", "--family", "corollary", "--rho", "0.7", "--n", "3", "--out", d])), 2);
    assert_eq!(code(&kjellberg(&["frobnicate"])), 2);
    let out = kjellberg(&["construct", "--out", d]);
    assert_eq!(code(&out), 2);
    assert!(text(&out).contains("run `solve` first"), "{}", text(&out));
}

#[test]
fn construct_check_and_report_on_the_corollary_set() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path().to_str().unwrap();
    solve_corollary(tmp.path());
    let out = kjellberg(&["construct", "--out", d]);
    assert_eq!(code(&out), 0, "{}", text(&out));
    let zeros = fs::read_to_string(tmp.path().join("zeros.txt")).unwrap();
    assert!(zeros.lines().count() > 100);

    let out = kjellberg(&["check", "--out", d]);
    assert_eq!(code(&out), 0, "{}", text(&out));
    let summary = fs::read_to_string(tmp.path().join("check.csv")).unwrap();
    for name in ["theta_monotone", "beurling", "harnack", "annulus_harnack", "zeros_in_set", "approx_error"] {
        assert!(summary.contains(&format!("{name},true")), "{name} missing or failed:\n{summary}");
    }

    let out = kjellberg(&["report", "--out", d]);
    assert_eq!(code(&out), 0, "{}", text(&out));
    for stem in ["growth", "envelope", "density", "rho", "error_field", "omega"] {
        let svg = fs::read_to_string(tmp.path().join(format!("{stem}.svg"))).unwrap();
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert!(tmp.path().join(format!("{stem}.csv")).exists());
    }
}

#[test]
fn only_runs_the_named_check() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path().to_str().unwrap();
    solve_corollary(tmp.path());
    let out = kjellberg(&["check", "--out", d, "--only", "harnack"]);
    assert_eq!(code(&out), 0, "{}", text(&out));
    let stdout = String::from_utf8_lossy(&out.stdout).to_string();
    assert_eq!(stdout.lines().count(), 1);
    assert!(stdout.starts_with("PASS harnack"));
    assert_eq!(code(&kjellberg(&["check", "--out", d, "--only", "bogus"])), 2);
    // The zero checks need a constructed product.
    assert_eq!(code(&kjellberg(&["check", "--out", d, "--only", "zeros"])), 2);
}

#[test]
fn corrupted_zero_table_fails_by_name() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path().to_str().unwrap();
    solve_corollary(tmp.path());
    assert_eq!(code(&kjellberg(&["construct", "--out", d])), 0);
    let path = tmp.path().join("product.txt");
    let product = fs::read_to_string(&path).unwrap();
    // Move the first zero into the gap between the first two intervals.
    let set = fs::read_to_string(tmp.path().join("set.txt")).unwrap();
    let rows: Vec<Vec<f64>> =
        set.lines().skip(1).map(|l| l.split_whitespace().map(|v| v.parse().unwrap()).collect()).collect();
    let gap_point = 0.5 * (rows[0][1] + rows[1][0]);
    let mut lines: Vec<String> = product.lines().map(str::to_string).collect();
    let first = lines.iter().position(|l| !l.starts_with('#')).unwrap();
    let mult = lines[first].split_whitespace().nth(2).unwrap().to_string();
    let second: f64 = lines[first + 1].split_whitespace().nth(1).unwrap().parse().unwrap();
    assert!(gap_point < second, "corruption must keep the table sorted");
    lines[first] = format!("1 {gap_point:?} {mult}");
    fs::write(&path, lines.join("\n")).unwrap();
    let out = kjellberg(&["check", "--out", d, "--only", "zeros"]);
    assert_eq!(code(&out), 1, "{}", text(&out));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL zeros_in_set"));
}

#[test]
fn skip_and_continuum_variants() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path().to_str().unwrap();
    solve_corollary(tmp.path());
    assert_eq!(code(&kjellberg(&["construct", "--out", d, "--skip", "6"])), 0);
    let product = fs::read_to_string(tmp.path().join("product.txt")).unwrap();
    assert!(product.contains("# skip 6") && product.contains("# log_c 0.0"));

    assert_eq!(code(&kjellberg(&["construct", "--out", d, "--continuum"])), 0);
    let field = fs::read_to_string(tmp.path().join("approx_error.csv")).unwrap();
    assert!(field.lines().skip(1).all(|l| l.ends_with(",0e0")), "continuum field is not zero");
}

#[test]
fn family_specific_plots() {
    let tmp = TempDir::new().unwrap();
    let s = tmp.path().join("sodin");
    let k = tmp.path().join("kj");
    let (s, k) = (s.to_str().unwrap(), k.to_str().unwrap());
    assert_eq!(code(&kjellberg(&["solve", "--family", "sodin", "--n", "100", "--nodes", "4", "--out", s])), 0);
    let out = kjellberg(&["measure", "--out", s, "--radii", "20,40", "--n-walks", "2000", "--deterministic"]);
    assert_eq!(code(&out), 0, "{}", text(&out));
    assert_eq!(code(&kjellberg(&["report", "--out", s])), 0);
    assert!(Path::new(s).join("u_decay.svg").exists());
    let omega = fs::read_to_string(Path::new(s).join("omega.csv")).unwrap();
    assert!(omega.starts_with("r,omega_hat,ci95,n_walks,seed\n") && omega.lines().count() == 3);

    assert_eq!(code(&kjellberg(&["solve", "--family", "kjellberg", "--alpha", "2", "--beta", "4", "--n", "-4..4", "--out", k])), 0);
    assert_eq!(code(&kjellberg(&["report", "--out", k])), 0);
    assert!(Path::new(k).join("scaling.svg").exists());
}

#[test]
fn deterministic_reruns_are_byte_identical() {
    let tmp = TempDir::new().unwrap();
    let mut bundles = Vec::new();
    for run in ["a", "b"] {
        let dir = tmp.path().join(run);
        let d = dir.to_str().unwrap();
        for args in [
            vec!["solve", "--family", "sodin", "--n", "60", "--nodes", "4", "--out", d],
            vec!["measure", "--out", d, "--radii", "10,20", "--n-walks", "1000", "--seed", "5"],
            vec!["report", "--out", d],
        ] {
            let mut args = args;
            args.push("--deterministic");
            let out = kjellberg(&args);
            assert_eq!(code(&out), 0, "{}", text(&out));
        }
        let mut files: Vec<_> = fs::read_dir(&dir).unwrap().map(|e| e.unwrap().path()).collect();
        files.sort();
        bundles.push(files.iter().filter(|p| p.extension().unwrap() != "cfg").map(|p| fs::read(p).unwrap()).collect::<Vec<_>>());
    }
    assert_eq!(bundles[0], bundles[1]);
}
