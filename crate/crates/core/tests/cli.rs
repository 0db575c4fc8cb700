use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

/// Runs the binary in a scratch directory. Arguments are split on
/// whitespace and `@name` expands to a path inside the directory.
struct Sandbox(TempDir);

impl Sandbox {
    fn new() -> Self {
        Sandbox(TempDir::new().unwrap())
    }

    fn path(&self, name: &str) -> PathBuf {
        self.0.path().join(name)
    }

    fn run_env(&self, cmd: &str, env: &[(&str, &str)]) -> Output {
        let args: Vec<String> = cmd
            .split_whitespace()
            .map(|a| match a.strip_prefix('@') {
                Some(name) => self.path(name).to_string_lossy().into_owned(),
                None => a.to_owned(),
            })
            .collect();
        let mut c = Command::new(env!("CARGO_BIN_EXE_evsce"));
        c.args(&args).envs(env.iter().copied());
        c.output().expect("binary runs")
    }

    fn run(&self, cmd: &str) -> Output {
        self.run_env(cmd, &[])
    }

    /// Runs and asserts the exit code, showing stderr on mismatch.
    fn expect(&self, cmd: &str, code: i32) -> Output {
        let out = self.run(cmd);
        assert_eq!(
            out.status.code(),
            Some(code),
            "{cmd}\n{}",
            String::from_utf8_lossy(&out.stderr)
        );
        out
    }

    fn column(&self, file: &str, name: &str) -> Vec<f64> {
        column(&self.path(file), name)
    }

    fn json(&self, file: &str) -> serde_json::Value {
        serde_json::from_str(&fs::read_to_string(self.path(file)).unwrap()).unwrap()
    }

    fn write(&self, file: &str, text: &str) {
        fs::write(self.path(file), text).unwrap();
    }
}

fn column(path: &Path, name: &str) -> Vec<f64> {
    let mut rdr = csv::Reader::from_path(path).unwrap();
    let idx = rdr
        .headers()
        .unwrap()
        .iter()
        .position(|h| h == name)
        .expect("column present");
    rdr.records().map(|r| r.unwrap()[idx].parse().unwrap()).collect()
}

#[test]
fn density_below_edge_is_zero() {
    let sb = Sandbox::new();
    sb.expect(
        "density --y 8 --xmin 0 --xmax 0.12 --points 5 --method closed --out @d.csv",
        0,
    );
    let rho = sb.column("d.csv", "rho");
    assert_eq!(rho.len(), 5);
    assert!(rho.iter().all(|v| *v == 0.0));
    let manifest = sb.json("d.manifest.json");
    assert_eq!(manifest["command"], "density");
    assert_eq!(manifest["parameters"]["y"], 8.0);
}

#[test]
fn closed_and_quartic_curves_agree() {
    let sb = Sandbox::new();
    sb.expect("density --y 2 --method closed --out @closed.csv", 0);
    sb.expect("density --y 2 --method quartic --out @quartic.csv", 0);
    assert_eq!(sb.column("closed.csv", "x"), sb.column("quartic.csv", "x"));
    let diff = sb
        .column("closed.csv", "rho")
        .iter()
        .zip(sb.column("quartic.csv", "rho"))
        .map(|(u, v)| (u - v).abs())
        .fold(0.0, f64::max);
    assert!(diff <= 1e-8, "{diff:e}");
}

#[test]
fn mp_curve_spans_its_support() {
    let sb = Sandbox::new();
    sb.expect("density --method mp --y 1 --out @mp.csv", 0);
    let xs = sb.column("mp.csv", "x");
    assert_eq!((xs[0], *xs.last().unwrap()), (0.0, 4.0));
    let rho = sb.column("mp.csv", "rho");
    assert!(rho[1..rho.len() - 1].iter().all(|v| *v > 0.0));
}

#[test]
fn general_nu_inversion() {
    let sb = Sandbox::new();
    sb.expect(
        "density --y 2 --method stieltjes --nu 4 --xmax 4 --points 9 --out @nu4.csv",
        0,
    );
    let mass: f64 = sb.column("nu4.csv", "rho").iter().sum::<f64>() * 0.5;
    assert!(mass > 0.5 && mass < 1.2, "{mass}");
}

#[test]
fn usage_errors_exit_2() {
    let sb = Sandbox::new();
    for cmd in [
        "density --y 2 --xmin 3 --xmax 1 --out @x.csv",
        "density --y 2 --points 1 --out @x.csv",
        "density --y 0.5 --out @x.csv",
        "density --y 2 --nu 4 --out @x.csv",
        "simulate --rows 4 --cols 2 --vol cauchy --out-prefix @x",
        "simulate --rows 0 --cols 2 --out-prefix @x",
        "tail --input @missing.csv --out @t.json",
        "frobnicate",
    ] {
        let out = sb.expect(cmd, 2);
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn single_entry_simulation() {
    let sb = Sandbox::new();
    sb.expect(
        "simulate --rows 1 --cols 1 --vol constant:1 --reps 1 --dump-matrix --out-prefix @one",
        0,
    );
    let ev = sb.column("one_eigenvalues.csv", "eigenvalue");
    let z: f64 = fs::read_to_string(sb.path("one_matrix.csv"))
        .unwrap()
        .trim()
        .parse()
        .unwrap();
    assert_eq!(ev.len(), 1);
    assert!((ev[0] - z * z).abs() <= 1e-15 * (1.0 + z * z));
    assert_eq!(sb.column("one_maxeig.csv", "lambda_max"), ev);
    let counts = sb.column("one_hist.csv", "count");
    assert_eq!(counts.len(), 100);
    assert_eq!(counts.iter().sum::<f64>(), 1.0);
    assert!(sb.path("one.manifest.json").exists());
}

#[test]
fn simulation_is_deterministic_across_runs_and_threads() {
    let sb = Sandbox::new();
    let run = |name: &str, threads: &str, seed: u64| {
        let cmd = format!("simulate --rows 60 --cols 30 --reps 6 --seed {seed} --out-prefix @{name}");
        let out = sb.run_env(&cmd, &[("EVM_THREADS", threads)]);
        assert_eq!(out.status.code(), Some(0));
        ["hist", "eigenvalues", "maxeig"].map(|k| fs::read(sb.path(&format!("{name}_{k}.csv"))).unwrap())
    };
    let a = run("a", "1", 17);
    assert_eq!(a, run("b", "1", 17));
    assert_eq!(a, run("c", "3", 17));
    assert_ne!(a[2], run("d", "1", 18)[2]);
}

#[test]
fn bad_thread_count_is_usage_error() {
    let sb = Sandbox::new();
    let out = sb.run_env("density --y 2 --out @d.csv", &[("EVM_THREADS", "0")]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn maxeig_report() {
    let sb = Sandbox::new();
    sb.expect("maxeig --rows 512 --cols 485 --reps 1 --out @m.json", 2);
    assert!(!sb.path("m.json").exists());
    sb.expect("maxeig --rows 128 --cols 64 --reps 50 --offdiag --out @m.json", 0);
    let report = sb.json("m.json");
    let a_t = report["a_t"].as_f64().unwrap();
    assert!((a_t - 14.2).abs() < 1.0, "{a_t}");
    assert_eq!(report["band_test"]["n"], 50);
    assert_eq!(report["triangle_violations"], 0);
    assert_eq!(sb.column("m_samples.csv", "rescaled").len(), 50);
    assert!(sb.path("m.manifest.json").exists());
}

/// Wide CSV of returns sharing a row volatility and a common factor.
fn synthetic_wide(t: usize, s: usize, extra_constant: bool) -> String {
    use rand::Rng;
    let mut rng = evsce::rng::stream_rng(5, 0);
    let mut text = String::from("timestamp");
    for j in 0..s {
        text += &format!(",S{j}");
    }
    if extra_constant {
        text += ",FLAT";
    }
    text.push('\n');
    for i in 0..t {
        let sigma: f64 = rng.gen_range(0.5..2.0);
        let f: f64 = rng.gen_range(-1.0..1.0);
        text += &format!("d{i}");
        for _ in 0..s {
            let z: f64 = rng.gen_range(-1.0..1.0);
            text += &format!(",{}", 0.01 * sigma * (z + f));
        }
        if extra_constant {
            text += ",0.003";
        }
        text.push('\n');
    }
    text
}

#[test]
fn ingest_drops_constant_column() {
    let sb = Sandbox::new();
    sb.write("wide.csv", &synthetic_wide(40, 5, true));
    let out = sb.expect("ingest --input @wide.csv --out-prefix @ing", 0);
    assert!(String::from_utf8_lossy(&out.stderr).contains("FLAT"));
    let panel = fs::read_to_string(sb.path("ing_block000.csv")).unwrap();
    assert!(!panel.lines().next().unwrap().contains("FLAT"));
    assert!(sb.json("ing.manifest.json")["notes"].to_string().contains("FLAT"));
}

#[test]
fn ingest_blocks() {
    let sb = Sandbox::new();
    sb.write("wide.csv", &synthetic_wide(520, 6, false));
    sb.expect("ingest --input @wide.csv --blocks 50 --clear --out-prefix @b", 0);
    for b in 0..50 {
        let panel = fs::read_to_string(sb.path(&format!("b_block{b:03}.csv"))).unwrap();
        assert_eq!(panel.lines().count(), 11);
        assert_eq!(sb.column(&format!("b_block{b:03}_spectrum.csv"), "eigenvalue").len(), 6);
        assert_eq!(sb.column(&format!("b_block{b:03}_rowvol.csv"), "row_std").len(), 10);
    }
    assert!(!sb.path("b_block050.csv").exists());
}

#[test]
fn ingest_round_trip_is_idempotent() {
    let sb = Sandbox::new();
    sb.write("wide.csv", &synthetic_wide(200, 8, false));
    sb.expect("ingest --input @wide.csv --clear --out-prefix @first", 0);
    sb.expect("ingest --input @first_block000.csv --out-prefix @second", 0);
    for j in 0..8 {
        let name = format!("S{j}");
        let (u, v) = (
            sb.column("first_block000.csv", &name),
            sb.column("second_block000.csv", &name),
        );
        for (a, b) in u.iter().zip(&v) {
            assert!((a - b).abs() <= 1e-12, "{a} vs {b}");
        }
    }
}

#[test]
fn ingest_ohlc() {
    let sb = Sandbox::new();
    let mut text = String::from("timestamp,ticker,open,close\n");
    for t in 0..30 {
        for (k, tic) in ["AAA", "BBB", "CCC"].iter().enumerate() {
            let open = 10.0 + k as f64;
            let close = open * (1.0 + 0.01 * (((t * 7 + k * 3) % 11) as f64 - 5.0));
            text += &format!("t{t},{tic},{open},{close}\n");
        }
    }
    sb.write("ohlc.csv", &text);
    sb.expect("ingest --input @ohlc.csv --format ohlc --out-prefix @o", 0);
    let a = sb.column("o_block000.csv", "AAA");
    assert_eq!(a.len(), 30);
    assert!(a.iter().sum::<f64>().abs() < 1e-12);
    assert!(sb.path("o_logabs_quantiles.csv").exists());

    sb.write("bad.csv", "timestamp,ticker,open,close\nt0,A,1,-2\n");
    sb.expect("ingest --input @bad.csv --format ohlc --out-prefix @bad", 2);
}

#[test]
fn ambiguous_market_mode_is_numerical_failure() {
    let sb = Sandbox::new();
    sb.write("sym.csv", "timestamp,A,B\n0,1,1\n1,-1,1\n2,1,-1\n3,-1,-1\n");
    sb.expect("ingest --input @sym.csv --clear --out-prefix @x", 3);
}

#[test]
fn tail_fits_on_pareto_file() {
    let sb = Sandbox::new();
    let mut text = String::from("value\n");
    for x in evsce::market::pareto_grid(3.0, 20_000) {
        text += &format!("{x}\n");
    }
    sb.write("pareto.csv", &text);
    sb.expect("tail --input @pareto.csv --method hill --out @hill.json", 0);
    sb.expect("tail --input @pareto.csv --method loglog --out @loglog.json", 0);
    let hill = sb.json("hill.json")["exponent"].as_f64().unwrap();
    let loglog = sb.json("loglog.json")["exponent"].as_f64().unwrap();
    assert!((hill - 3.0).abs() < 0.15, "{hill}");
    assert!((hill - loglog).abs() < 0.2, "{hill} vs {loglog}");

    sb.write("short.csv", "1\n2\n3\n");
    sb.expect("tail --input @short.csv --out @t.json", 2);
}

#[test]
fn spillover_same_ticker_is_diagonal() {
    let sb = Sandbox::new();
    sb.write("wide.csv", &synthetic_wide(50, 3, false));
    sb.expect("spillover --input @wide.csv --a S1 --b S1 --out @sp.csv", 0);
    let (x, y) = (sb.column("sp.csv", "x"), sb.column("sp.csv", "y"));
    assert_eq!(x.len(), 50);
    assert_eq!(x, y);
    sb.expect("spillover --input @wide.csv --a S1 --b NOPE --out @sp.csv", 2);
}
