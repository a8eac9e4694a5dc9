use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn iab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_iab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn dir_arg(p: &Path) -> String {
    p.to_str().unwrap().to_string()
}

#[test]
fn out_of_range_eta_is_a_config_error() {
    let out = iab(&["--eta", "1.2", "--trials", "0", "rate-sweep"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("sweep.eta"));
}

#[test]
fn bad_config_file_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.toml");
    fs::write(&cfg, "[system]\nhotspot_radius_m = -1\n").unwrap();
    let out = iab(&["--config", cfg.to_str().unwrap(), "config"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("hotspot_radius"));
    fs::write(&cfg, "[sweeps]\n").unwrap();
    assert_eq!(
        code(&iab(&["--config", cfg.to_str().unwrap(), "config"])),
        2
    );
}

#[test]
fn empty_config_file_prints_defaults() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("empty.toml");
    fs::write(&cfg, "").unwrap();
    let a = iab(&["--config", cfg.to_str().unwrap(), "config"]);
    let b = iab(&["config"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.contains("bandwidth_mhz = 300.0"));
}

#[test]
fn flags_override_the_file() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.toml");
    fs::write(&cfg, "[monte_carlo]\nseed = 5\ntrials = 10\n").unwrap();
    let out = iab(&["--config", cfg.to_str().unwrap(), "--seed", "9", "config"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("seed = 9"));
    assert!(text.contains("trials = 10"));
}

#[test]
fn sweep_csv_is_identical_across_runs_and_thread_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for (i, extra) in [
        &["--threads", "1"][..],
        &["--threads", "4"],
        &["--sequential"],
    ]
    .iter()
    .enumerate()
    {
        let d = tmp.path().join(format!("run{i}"));
        let mut args = vec![
            "--trials",
            "3000",
            "--seed",
            "12",
            "--eta",
            "0.1,0.45,0.8",
            "--out-dir",
        ];
        let ds = dir_arg(&d);
        args.push(&ds);
        args.extend_from_slice(extra);
        args.push("rate-sweep");
        let out = iab(&args);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        files.push(fs::read(d.join("rate_sweep.csv")).unwrap());
    }
    assert_eq!(files[0], files[1]);
    assert_eq!(files[0], files[2]);
    let text = String::from_utf8(files[0].clone()).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "strategy,eta,W_hz,m_bar,rho_bps,pr_analytical,pr_m,pr_s,pr_mc,mc_se,quad_flag"
    );
    assert_eq!(text.lines().count(), 7);
}

#[test]
fn validate_exit_status_follows_the_report() {
    let tmp = tempfile::tempdir().unwrap();
    let d = dir_arg(tmp.path());
    let pass = iab(&[
        "--trials",
        "2000",
        "--eta",
        "0.3",
        "--out-dir",
        &d,
        "validate",
    ]);
    assert_eq!(code(&pass), 0, "{}", String::from_utf8_lossy(&pass.stdout));

    let cfg = tmp.path().join("strict.toml");
    fs::write(&cfg, "[validation]\nload_tv_limit = 1e-9\n").unwrap();
    let fail = iab(&[
        "--config",
        cfg.to_str().unwrap(),
        "--trials",
        "2000",
        "--eta",
        "0.3",
        "--out-dir",
        &d,
        "validate",
    ]);
    assert_eq!(code(&fail), 1);

    let few = iab(&[
        "--trials",
        "10",
        "--eta",
        "0.3",
        "--out-dir",
        &d,
        "validate",
    ]);
    assert_eq!(code(&few), 0);
    assert!(String::from_utf8_lossy(&few.stdout).contains("2 insufficient precision"));
}

#[test]
fn other_subcommands_write_their_files() {
    let tmp = tempfile::tempdir().unwrap();
    let d = dir_arg(tmp.path());
    for (cmd, file) in [
        ("coverage", "coverage.csv"),
        ("optimal-eta", "optimal_eta.csv"),
        ("load-dist", "load_dist.csv"),
    ] {
        let out = iab(&["--trials", "500", "--out-dir", &d, cmd]);
        assert_eq!(
            code(&out),
            0,
            "{cmd}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        assert!(tmp.path().join(file).exists(), "{file}");
    }
    let cov = iab(&[
        "--trials",
        "0",
        "--out-dir",
        &d,
        "coverage",
        "--theta-db",
        "0",
        "5",
        "-3",
    ]);
    assert_eq!(code(&cov), 0);
    let text = fs::read_to_string(tmp.path().join("coverage.csv")).unwrap();
    assert!(text
        .lines()
        .nth(1)
        .unwrap()
        .starts_with("300000000,0,5,-3,"));
}

#[test]
fn shipped_configs_parse() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in fs::read_dir(&root).unwrap() {
        let path = entry.unwrap().path();
        let out = iab(&["--config", path.to_str().unwrap(), "config"]);
        assert_eq!(code(&out), 0, "{}: {}", path.display(), String::from_utf8_lossy(&out.stderr));
        seen += 1;
    }
    assert!(seen >= 4);
    let full = iab(&["--config", root.join("full.toml").to_str().unwrap(), "config"]);
    assert_eq!(full.stdout, iab(&["config"]).stdout);
}
