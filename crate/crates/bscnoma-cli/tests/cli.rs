use std::path::Path;
use std::process::{Command, Output};

fn run(dir: &Path, args: &[&str], seed_env: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_bscnoma"));
    cmd.args(args).current_dir(dir).env_remove(bscnoma_cli::SEED_ENV);
    if let Some(s) = seed_env {
        cmd.env(bscnoma_cli::SEED_ENV, s);
    }
    cmd.output().unwrap()
}

fn files(dir: &Path) -> Vec<String> {
    let mut v: Vec<String> =
        std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().file_name().to_string_lossy().into_owned()).collect();
    v.sort();
    v
}

fn write_cfg(dir: &Path, text: &str) {
    std::fs::write(dir.join("run.cfg"), text).unwrap();
}

#[test]
fn unknown_key_exits_2_without_output() {
    let d = tempfile::tempdir().unwrap();
    write_cfg(d.path(), "p_t_dbm = 30\ntransmit_power = 1\n");
    let out = run(d.path(), &["ee-sweep", "--config", "run.cfg", "--out", "x.csv"], None);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("transmit_power"));
    assert_eq!(files(d.path()), ["run.cfg"]);
}

#[test]
fn invalid_value_and_env_seed_exit_2() {
    let d = tempfile::tempdir().unwrap();
    write_cfg(d.path(), "eta = 2\n");
    assert_eq!(run(d.path(), &["optimize-once", "--config", "run.cfg"], None).status.code(), Some(2));
    assert_eq!(run(d.path(), &["optimize-once"], Some("abc")).status.code(), Some(2));
    assert_eq!(run(d.path(), &["optimize-once", "--format", "xml"], None).status.code(), Some(2));
    assert_eq!(files(d.path()), ["run.cfg"]);
}

#[test]
fn infeasible_optimization_exits_3() {
    let d = tempfile::tempdir().unwrap();
    write_cfg(d.path(), "r_min_bps = 1e9\n");
    let out = run(d.path(), &["optimize-once", "--config", "run.cfg"], None);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(files(d.path()), ["run.cfg"]);
}

#[test]
fn construction_error_exits_4() {
    let d = tempfile::tempdir().unwrap();
    write_cfg(d.path(), "sigma = 6\n");
    let out = run(d.path(), &["construct-code", "--config", "run.cfg"], None);
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(files(d.path()), ["run.cfg"]);
}

#[test]
fn construct_code_writes_alist() {
    let d = tempfile::tempdir().unwrap();
    let out = run(d.path(), &["construct-code", "--out", "h.alist"], None);
    assert!(out.status.success());
    let text = std::fs::read_to_string(d.path().join("h.alist")).unwrap();
    let h = bscnoma::qcldpc::ParityCheckMatrix::from_alist(&text).unwrap();
    assert_eq!((h.rows(), h.cols()), (186, 465));
    assert!(bscnoma::qcldpc::girth_check(&h));
    assert_eq!(files(d.path()), ["h.alist", "h.alist.manifest"]);
}

#[test]
fn csv_headers_are_fixed() {
    let d = tempfile::tempdir().unwrap();
    write_cfg(
        d.path(),
        "trials = 3\nsweep_grid = 0.1,0.2\nsweep_variable = eta\nsnr_db = 1\nmin_bits = 2000\niteration_budgets = 2\n",
    );
    let cases = [
        ("ee-sweep", "variable,value,mode,mean_ee_bits_per_joule,std_ee,trials"),
        ("convergence", "mode,eta,iteration,gamma_ee_bits_per_joule,approx_sum_rate_bps,total_power_w,residual_bps"),
        ("ber", "receiver,max_iters,snr_db,bit_errors,bits_simulated,ber,mean_iterations"),
        ("optimize-once", "mode,p_w,xi_n,xi_f,p_r_w,gamma_ee_bits_per_joule,outer_iterations,converged,feasible"),
    ];
    for (exp, header) in cases {
        let out = run(d.path(), &[exp, "--config", "run.cfg", "--out", "o.csv"], None);
        assert!(out.status.success(), "{exp}: {}", String::from_utf8_lossy(&out.stderr));
        let text = std::fs::read_to_string(d.path().join("o.csv")).unwrap();
        assert_eq!(text.lines().next(), Some(header), "{exp}");
    }
    let ee = std::fs::read_to_string(d.path().join("o.csv")).unwrap();
    assert_eq!(ee.lines().count(), 3, "one row per mode");
}

#[test]
fn json_optimize_once_has_trajectory() {
    let d = tempfile::tempdir().unwrap();
    let out = run(d.path(), &["optimize-once", "--format", "json", "--mode", "wbst", "--out", "o.json"], None);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(d.path().join("o.json")).unwrap()).unwrap();
    let run = &v[0];
    assert_eq!(run["mode"], "wbst");
    assert_eq!(run["converged"], true);
    assert!(run["gamma_ee_bits_per_joule"].as_f64().unwrap() > 1e9);
    assert!(!run["trajectory"].as_array().unwrap().is_empty());
    assert!(run["allocation"]["p"].as_f64().unwrap() > 0.0);
}

#[test]
fn seed_precedence_flag_over_env_over_file() {
    let d = tempfile::tempdir().unwrap();
    write_cfg(d.path(), "seed = 5\n");
    let seed_of = |args: &[&str], env: Option<&str>| {
        let mut a = vec!["construct-code", "--config", "run.cfg", "--out", "c.alist"];
        a.extend(args);
        assert!(run(d.path(), &a, env).status.success());
        let m = std::fs::read_to_string(d.path().join("c.alist.manifest")).unwrap();
        m.lines().find(|l| l.starts_with("seed = ")).unwrap().to_string()
    };
    assert_eq!(seed_of(&[], None), "seed = 5");
    assert_eq!(seed_of(&[], Some("8")), "seed = 8");
    assert_eq!(seed_of(&["--seed", "9"], Some("8")), "seed = 9");
}

#[test]
fn mode_flag_overrides_file() {
    let d = tempfile::tempdir().unwrap();
    write_cfg(d.path(), "mode = nbst\n");
    assert!(run(d.path(), &["optimize-once", "--config", "run.cfg", "--mode", "wbst", "--out", "o.csv"], None)
        .status
        .success());
    let text = std::fs::read_to_string(d.path().join("o.csv")).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert!(text.lines().nth(1).unwrap().starts_with("wbst,"));
}

#[test]
fn manifest_replays_bit_exactly() {
    let d = tempfile::tempdir().unwrap();
    write_cfg(d.path(), "trials = 4\nsweep_variable = p_c\nsweep_grid = 0.001,0.01\n");
    assert!(run(d.path(), &["ee-sweep", "--config", "run.cfg", "--seed", "3", "--out", "a.csv"], None)
        .status
        .success());
    assert!(run(d.path(), &["ee-sweep", "--config", "a.csv.manifest", "--out", "b.csv"], None).status.success());
    assert_eq!(std::fs::read(d.path().join("a.csv")).unwrap(), std::fs::read(d.path().join("b.csv")).unwrap());
    assert_eq!(
        std::fs::read(d.path().join("a.csv.manifest")).unwrap(),
        std::fs::read(d.path().join("b.csv.manifest")).unwrap()
    );
}
