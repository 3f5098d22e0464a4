//! Criterion 10: the full suite passes with exit 0 on the default cubic
//! configuration, the report bundle is byte-identical across two runs with
//! the same seed, and the whole run fits the wall-clock budget. Also pins
//! the exit-code contract (1 = check failure, 2 = config error).

use std::path::Path;
use std::process::Command;
use std::time::Instant;

fn binary() -> &'static str {
    env!("CARGO_BIN_EXE_leafwise")
}

fn read(path: &Path) -> Vec<u8> {
    std::fs::read(path).unwrap_or_else(|e| panic!("cannot read {}: {e}", path.display()))
}

#[test]
fn criterion_10_default_suite_deterministic_exit_zero() {
    let start = Instant::now();
    let tmp = std::env::temp_dir().join("leafwise_acceptance");
    let _ = std::fs::remove_dir_all(&tmp);
    std::fs::create_dir_all(&tmp).unwrap();
    let config = tmp.join("default_e6.cfg");
    std::fs::write(&config, "polynomial = E6\nseed = 7\n").unwrap();

    let mut bundles = Vec::new();
    for run in 0..2 {
        let out = tmp.join(format!("run{run}"));
        let status = Command::new(binary())
            .args(["verify", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(&out)
            .status()
            .expect("binary runs");
        assert!(status.success(), "verify must exit 0 on the default config");
        bundles.push((read(&out.join("report.txt")), read(&out.join("volume_profile.csv"))));
    }
    assert_eq!(bundles[0].0, bundles[1].0, "report.txt must be byte-identical");
    assert_eq!(bundles[0].1, bundles[1].1, "volume_profile.csv must be byte-identical");

    let elapsed = start.elapsed().as_secs_f64();
    println!("criterion 10: PASS — two identical bundles, exit 0 ({elapsed:.2}s total)");
    assert!(elapsed < 300.0, "suite exceeded five minutes: {elapsed:.2}s");
}

#[test]
fn exit_codes_for_config_error_and_check_failure() {
    let tmp = std::env::temp_dir().join("leafwise_acceptance_codes");
    let _ = std::fs::remove_dir_all(&tmp);
    std::fs::create_dir_all(&tmp).unwrap();

    // μ = 0 is rejected at parse: exit 2
    let bad = tmp.join("bad.cfg");
    std::fs::write(&bad, "mu = 0\n").unwrap();
    let status = Command::new(binary())
        .args(["verify", "--config"])
        .arg(&bad)
        .arg("--out")
        .arg(tmp.join("never"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));

    // unknown keys are config errors too
    let unknown = tmp.join("unknown.cfg");
    std::fs::write(&unknown, "no_such_key = 1\n").unwrap();
    let status = Command::new(binary())
        .args(["verify", "--config"])
        .arg(&unknown)
        .arg("--out")
        .arg(tmp.join("never"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));

    // an unreachable regularity floor fails that check: exit 1, and the
    // bundle is still written
    let failing = tmp.join("failing.cfg");
    std::fs::write(
        &failing,
        "regularity_floor = 1e9\nsamples_regularity = 200\n",
    )
    .unwrap();
    let out = tmp.join("failing_out");
    let status = Command::new(binary())
        .args(["verify", "--config"])
        .arg(&failing)
        .args(["--only", "regularity"])
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
    let report = String::from_utf8(read(&out.join("report.txt"))).unwrap();
    assert!(report.contains("passed = false"));
}

#[test]
fn profile_subcommand_writes_the_csv() {
    let tmp = std::env::temp_dir().join("leafwise_acceptance_profile");
    let _ = std::fs::remove_dir_all(&tmp);
    std::fs::create_dir_all(&tmp).unwrap();
    let config = tmp.join("cfg");
    std::fs::write(&config, "csv_points = 11\n").unwrap();
    let out = tmp.join("profile.csv");
    let status = Command::new(binary())
        .args(["profile", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let text = String::from_utf8(read(&out)).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "tau,k,kprime,l,coefficient,wedge_measured,discrepancy"
    );
    assert_eq!(lines.count(), 11);
}

#[test]
fn parallel_flag_does_not_change_the_bundle() {
    let tmp = std::env::temp_dir().join("leafwise_acceptance_parallel");
    let _ = std::fs::remove_dir_all(&tmp);
    std::fs::create_dir_all(&tmp).unwrap();
    let config = tmp.join("cfg");
    std::fs::write(&config, "samples_regularity = 500\n").unwrap();
    let serial = tmp.join("serial");
    let parallel = tmp.join("parallel");
    for (dir, extra) in [(&serial, None), (&parallel, Some("--parallel"))] {
        let mut cmd = Command::new(binary());
        cmd.args(["verify", "--config"])
            .arg(&config)
            .args(["--only", "regularity"])
            .arg("--out")
            .arg(dir)
            .env("LEAFWISE_THREADS", "3");
        if let Some(flag) = extra {
            cmd.arg(flag);
        }
        assert!(cmd.status().unwrap().success());
    }
    assert_eq!(
        read(&serial.join("report.txt")),
        read(&parallel.join("report.txt")),
        "parallel execution must not change the report"
    );
}
