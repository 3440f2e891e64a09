use std::path::Path;
use std::process::{Command, Output};

fn kochwalk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kochwalk"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = kochwalk(args);
    assert!(
        out.status.success(),
        "{:?}: {}",
        args,
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

/// Data rows, skipping the config line, the header and `#` notes.
fn rows(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect()
}

fn cauchy(y: f64) -> f64 {
    1.0 / (std::f64::consts::PI * (1.0 + y * y))
}

#[test]
fn walk_files_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, threads: &str| {
        let path = dir.path().join(name);
        let p = path.to_str().unwrap();
        let args = [
            "walk",
            "--steps",
            "16",
            "--trials",
            "100000",
            "--seed",
            "7",
            "--threads",
            threads,
            "--out",
            p,
        ];
        assert!(kochwalk(&args).status.success());
        std::fs::read(path).unwrap()
    };
    let a = run("a.csv", "1");
    let b = run("b.csv", "2");
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("# config: walk "));
    assert!(text.lines().nth(1) == Some("k,count,prob_exact,prob_gaussian"));
    let counts: f64 = rows(&text).iter().map(|r| r[1]).sum();
    assert_eq!(counts, 100_000.0);
}

#[test]
fn config_line_reproduces_the_file() {
    let first = stdout(&["walk", "--steps", "8", "--trials", "5000", "--seed", "3"]);
    let config = first
        .lines()
        .next()
        .unwrap()
        .strip_prefix("# config: ")
        .unwrap();
    let args: Vec<&str> = config.split(' ').collect();
    assert_eq!(stdout(&args), first);
}

#[test]
fn moments_summary_slopes_are_in_band() {
    let text = stdout(&["moments", "--depth", "6"]);
    let summary = text
        .lines()
        .filter(|l| l.starts_with("# summary,"))
        .nth(1)
        .unwrap();
    let values: Vec<f64> = summary
        .split(',')
        .skip(1)
        .map(|v| v.parse().unwrap())
        .collect();
    assert!((0.37..=0.43).contains(&values[0]), "{summary}");
    assert!((0.77..=0.83).contains(&values[1]), "{summary}");
    for r in rows(&text) {
        assert!(r[2] >= r[1] * r[1]);
    }
}

#[test]
fn levy_matches_cauchy() {
    let text = stdout(&["levy", "--mu", "1.0"]);
    let data = rows(&text.replace(",inf", ",Infinity"));
    assert_eq!(data.len(), 201);
    for r in data {
        assert!((r[1] - cauchy(r[0])).abs() < 1e-4, "y = {}", r[0]);
    }
}

#[test]
fn curve_and_staircase_columns() {
    let text = stdout(&["curve", "--depth", "3", "--points", "9"]);
    let data = rows(&text);
    assert_eq!(data.len(), 9);
    assert_eq!(data[4][1], 0.5);
    assert!((data[4][2] - 3f64.sqrt() / 6.0).abs() < 1e-15);
    for r in &data {
        assert!((r[3] - r[1].hypot(r[2])).abs() < 1e-15);
    }
    let text = stdout(&["staircase", "--depth", "6", "--points", "64"]);
    for r in rows(&text) {
        assert!(r[3] > 0.2 && r[3] < 5.0);
    }
}

#[test]
fn lmax_and_fpt_outputs() {
    let text = stdout(&["lmax", "--depth", "3"]);
    let data = rows(&text);
    assert_eq!(data.len(), 64);
    assert!(data.windows(2).all(|w| w[1][1] >= w[0][1]));
    let text = stdout(&["fpt", "--target", "-2", "--tcap", "32", "--trials", "20000"]);
    let data = rows(&text.replace(",NaN", ",nan"));
    assert_eq!(data[0][1], 0.0);
    assert!((data[1][2] - 0.25).abs() < 0.02);
}

#[test]
fn fourier_gaussian_spectrum() {
    let text = stdout(&[
        "fourier",
        "--function",
        "gaussian",
        "--v-max",
        "4",
        "--dv",
        "0.5",
    ]);
    for r in rows(&text) {
        let exact = (2.0 * std::f64::consts::PI).sqrt() * (-0.5 * r[0] * r[0]).exp();
        assert!((r[1] - exact).abs() < 1e-6 && r[2].abs() < 1e-12);
    }
}

#[test]
fn exit_codes() {
    let code = |args: &[&str]| kochwalk(args).status.code();
    assert_eq!(code(&["curve", "--depth", "13"]), Some(2));
    assert_eq!(code(&["levy", "--mu", "2.5"]), Some(2));
    assert_eq!(code(&["walk", "--delta", "-1"]), Some(2));
    assert_eq!(code(&["fpt", "--target", "0"]), Some(2));
    assert_eq!(code(&["fourier", "--function", "square"]), Some(2));
    assert_eq!(code(&["levy", "--mu", "0.3"]), Some(1));
    assert_eq!(code(&["lmax", "--depth", "2", "--steps", "17"]), Some(1));
    assert_eq!(code(&["curve", "--depth", "1"]), Some(0));
}

#[test]
fn existing_output_needs_force() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("curve.csv");
    let p = path.to_str().unwrap();
    assert!(kochwalk(&["curve", "--depth", "1", "--out", p])
        .status
        .success());
    let before = std::fs::read(Path::new(p)).unwrap();
    assert_eq!(
        kochwalk(&["curve", "--depth", "2", "--out", p])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(std::fs::read(Path::new(p)).unwrap(), before);
    assert!(kochwalk(&["curve", "--depth", "2", "--out", p, "--force"])
        .status
        .success());
    assert_ne!(std::fs::read(Path::new(p)).unwrap(), before);
}

#[test]
fn print_config_echoes_on_stderr() {
    let out = kochwalk(&["curve", "--depth", "1", "--print-config"]);
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.trim_end(), "# config: curve --depth 1 --points 1025");
}
