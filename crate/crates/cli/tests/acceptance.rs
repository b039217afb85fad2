// SPDX-License-Identifier: MIT OR Apache-2.0

//! CLI acceptance: report determinism (byte-identical reruns), JSON
//! round-trip, spec'd exit codes, and the documented report shapes.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn ebcp() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ebcp"))
}

fn write_tmp(dir: &Path, name: &str, content: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, content).unwrap();
    path
}

fn tmpdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ebcp-cli-test-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

#[test]
fn segment_report_is_deterministic_and_round_trips() {
    let dir = tmpdir("segment");
    let input = write_tmp(&dir, "step.txt", "0\n0\n0\n0\n9\n9\n9\n9\n");

    let mut outputs = Vec::new();
    for _ in 0..2 {
        let out = run(ebcp()
            .arg("segment")
            .arg(&input)
            .args(["-K", "2", "--model", "poisson"]));
        assert!(out.status.success());
        outputs.push(out.stdout);
    }
    assert_eq!(outputs[0], outputs[1], "reruns must be byte-identical");

    let parsed: serde_json::Value = serde_json::from_slice(&outputs[0]).unwrap();
    assert_eq!(parsed["command"], "segment");
    assert_eq!(parsed["n"], 8);
    // forced strong break: mode at 5
    assert_eq!(parsed["changepoints"][0]["mode"], 5);
}

#[test]
fn two_point_series_posterior_is_forced() {
    let dir = tmpdir("forced");
    let input = write_tmp(&dir, "two.txt", "0\n7\n");
    let out = run(ebcp()
        .arg("segment")
        .arg(&input)
        .args(["-K", "2", "--model", "poisson"]));
    assert!(out.status.success());
    let parsed: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let posterior = parsed["changepoints"][0]["posterior"].as_array().unwrap();
    assert_eq!(posterior.len(), 1);
    assert_eq!(posterior[0]["at"], 2);
    assert_eq!(posterior[0]["p"], 1.0);
}

#[test]
fn five_segment_report_has_four_changepoint_blocks() {
    // analysis shaped like a two-exon gene: K=5, one block per boundary
    let dir = tmpdir("five");
    let mut data = String::new();
    for t in 0..60 {
        let level = match t {
            0..=9 => 0,
            10..=24 => 12,
            25..=34 => 1,
            35..=49 => 15,
            _ => 0,
        };
        data.push_str(&format!("{level}\n"));
    }
    let input = write_tmp(&dir, "gene.txt", &data);
    let out = run(ebcp()
        .arg("segment")
        .arg(&input)
        .args(["-K", "5", "--model", "nb", "--estimate-phi"]));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let parsed: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(parsed["changepoints"].as_array().unwrap().len(), 4);
    assert_eq!(parsed["model"]["family"], "nb");
}

#[test]
fn compare_shift_flags_zero_inclusion() {
    let dir = tmpdir("shift");
    let a = write_tmp(&dir, "a.txt", "0\n0\n0\n0\n9\n9\n9\n9\n");
    let b = write_tmp(&dir, "b.txt", "0\n0\n0\n0\n9\n9\n9\n9\n");
    let out = run(ebcp()
        .arg("compare-shift")
        .arg(&a)
        .arg(&b)
        .args(["-K", "2", "-k", "1", "--model", "poisson"]));
    assert!(out.status.success());
    let parsed: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(parsed["contains_zero"], true);
    let ci = &parsed["credible_interval"];
    assert!(ci["lo"].as_i64().unwrap() <= 0 && 0 <= ci["hi"].as_i64().unwrap());
}

#[test]
fn compare_common_p0_sweep_is_monotone() {
    let dir = tmpdir("common");
    let tsv = "ypd\tdelft\n0 1\n0 0\n1 0\n9 8\n9 9\n8 9\n9 9\n9 8\n";
    let input = write_tmp(&dir, "cond.tsv", tsv);
    let mut posteriors = Vec::new();
    for p0 in ["0.1", "0.5", "0.9"] {
        let out = run(ebcp()
            .arg("compare-common")
            .arg(&input)
            .args(["-K", "2", "-k", "1", "--model", "poisson", "--p0", p0]));
        assert!(out.status.success());
        let parsed: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        posteriors.push(parsed["results"][0]["posterior_e0"].as_f64().unwrap());
    }
    assert!(posteriors[0] < posteriors[1] && posteriors[1] < posteriors[2]);
}

#[test]
fn compare_common_all_k_with_overrides() {
    let dir = tmpdir("allk");
    let tsv = "a\tb\n0 0\n0 1\n9 8\n9 9\n0 1\n0 0\n8 9\n9 9\n1 0\n0 0\n";
    let input = write_tmp(&dir, "two.tsv", tsv);
    let out = run(ebcp()
        .arg("compare-common")
        .arg(&input)
        .args(["-K", "5", "--all-k", "--model", "poisson"])
        .args(["--p0", "0.5", "--p0", "2=0.99"]));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let parsed: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let results = parsed["results"].as_array().unwrap();
    assert_eq!(results.len(), 4);
    assert_eq!(results[0]["p0"], 0.5);
    assert_eq!(results[1]["p0"], 0.99);
    for r in results {
        // posterior odds identity: post/(1-post) = BF * p0/(1-p0)
        let post = r["posterior_e0"].as_f64().unwrap();
        let p0 = r["p0"].as_f64().unwrap();
        if let Some(bf) = r["bayes_factor"].as_f64() {
            if post < 1.0 {
                let lhs = post / (1.0 - post);
                let rhs = bf * p0 / (1.0 - p0);
                assert!((lhs - rhs).abs() <= 1e-9 * rhs.max(1e-12), "{lhs} vs {rhs}");
            }
        }
    }
}

#[test]
fn estimate_phi_reports_fallback_flag() {
    let dir = tmpdir("phi");
    // strongly overdispersed data: mixture of 0s and large counts
    let mut data = String::new();
    let mut state = 12345u64;
    for _ in 0..100 {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let v = if state.is_multiple_of(3) { state % 40 } else { 0 };
        data.push_str(&format!("{v}\n"));
    }
    let input = write_tmp(&dir, "od.txt", &data);
    let out = run(ebcp().arg("estimate-phi").arg(&input));
    assert!(out.status.success());
    let parsed: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let series = &parsed["series"][0];
    assert_eq!(series["fallback_applied"], false);
    assert!(series["phi_hat"].as_f64().unwrap() > 0.0);
}

#[test]
fn simulate_csv_is_seed_deterministic() {
    let args = [
        "simulate",
        "--family",
        "poisson",
        "--lambda0",
        "1.25",
        "-s",
        "16",
        "--replicates",
        "2",
        "--seed",
        "42",
    ];
    let a = run(ebcp().args(args));
    let b = run(ebcp().args(args));
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "family,p0_or_lambda0,s,phi,use_true_phi,replicate,k,d,posterior_e0,\
         phi_hat_1,phi_hat_2,phi_hat_3,fallback_1,fallback_2,fallback_3"
    );
    // 2 replicates × (control + shifted) × 6 change-points
    assert_eq!(lines.count(), 24);
}

#[test]
fn exit_codes_distinguish_input_and_numeric_errors() {
    let dir = tmpdir("exit");

    // unreadable file → input error (2)
    let out = run(ebcp()
        .arg("segment")
        .arg(dir.join("missing.txt"))
        .args(["-K", "2", "--model", "poisson"]));
    assert_eq!(out.status.code(), Some(2));

    // unparsable value with its line number → input error (2)
    let bad = write_tmp(&dir, "bad.txt", "1\n2\nxyz\n4\n");
    let out = run(ebcp()
        .arg("segment")
        .arg(&bad)
        .args(["-K", "2", "--model", "poisson"]));
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains(":3"), "error should cite line 3: {err}");

    // n=2 with K=2 in both series forces coincidence: degenerate prior (3)
    let a = write_tmp(&dir, "a2.txt", "0\n9\n");
    let b = write_tmp(&dir, "b2.txt", "5\n0\n");
    let out = run(ebcp()
        .arg("compare-common")
        .arg(&a)
        .arg(&b)
        .args(["-K", "2", "-k", "1", "--model", "poisson"]));
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn tsv_header_names_series() {
    let dir = tmpdir("tsv");
    let input = write_tmp(&dir, "cond.tsv", "ypd\tdelft\n1 2\n0 1\n9 8\n9 9\n8 9\n");
    let out = run(ebcp()
        .arg("compare-shift")
        .arg(&input)
        .args(["-K", "2", "-k", "1", "--model", "poisson"]));
    assert!(out.status.success());
    let parsed: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(parsed["series"][0]["label"], "ypd");
    assert_eq!(parsed["series"][1]["label"], "delft");
}
