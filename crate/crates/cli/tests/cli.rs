use std::process::{Command, Output};

fn apl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_apl"))
        .args(args)
        .env_remove("APL_THREADS")
        .output()
        .expect("failed to run apl")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn constants_json() {
    let o = apl(&["constants", "--n", "100"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["x0"].as_f64().unwrap() - 0.881373587).abs() < 1e-9);
    assert!((v["x_c"].as_f64().unwrap() - 0.848811).abs() < 1e-5);
}

#[test]
fn series_csv_and_big_mode() {
    let o = apl(&["series", "--n", "2", "--distance", "2", "--max-ell", "4"]);
    assert_eq!(
        stdout(&o),
        "n,N,ell,count\n2,2,0,0\n2,2,1,0\n2,2,2,2\n2,2,3,0\n2,2,4,8\n"
    );
    let args = ["series", "--n", "8", "--distance", "1", "--max-ell", "61"];
    assert_eq!(apl(&args).status.code(), Some(2));
    let mut big = args.to_vec();
    big.push("--big");
    let o = apl(&big);
    assert!(o.status.success());
    let last = stdout(&o).lines().last().unwrap().to_string();
    let count: String = last.rsplit(',').next().unwrap().into();
    assert!(count.len() > 39, "{last}");
}

#[test]
fn trial_is_deterministic() {
    let a = apl(&["trial", "--n", "12", "--x", "0.9", "--seed", "5"]);
    let b = apl(&["--seed", "5", "trial", "--n", "12", "--x", "0.9"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_str(&stdout(&a)).unwrap();
    assert!(v["accessible"].is_boolean());
}

#[test]
fn oracle_validate_exit_codes() {
    assert!(apl(&["oracle-validate"]).status.success());
    let o = apl(&["oracle-validate", "--inject-fault", "parity-off-by-one"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("(n="));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(apl(&["bogus"]).status.code(), Some(2));
    assert_eq!(apl(&["trial", "--x", "0.5"]).status.code(), Some(2));
    assert_eq!(
        apl(&["trial", "--n", "4", "--x", "1.5"]).status.code(),
        Some(2)
    );
}

#[test]
fn sweep_threads_do_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let common = [
        "sweep",
        "--n-list",
        "6,8",
        "--offsets",
        "-0.1,0,0.1",
        "--trials",
        "200",
        "--redact-timing",
    ];
    let mut args_a: Vec<&str> = common.to_vec();
    args_a.extend(["--threads", "1", "--out", a.to_str().unwrap()]);
    let mut args_b: Vec<&str> = common.to_vec();
    args_b.extend(["--threads", "3", "--out", b.to_str().unwrap()]);
    assert!(apl(&args_a).status.success());
    assert!(apl(&args_b).status.success());
    let text = std::fs::read(&a).unwrap();
    assert_eq!(text, std::fs::read(&b).unwrap());

    let from_env = Command::new(env!("CARGO_BIN_EXE_apl"))
        .args(common)
        .env("APL_THREADS", "2")
        .output()
        .unwrap();
    assert!(from_env.status.success());
    assert_eq!(from_env.stdout, text);
    assert!(String::from_utf8(text)
        .unwrap()
        .starts_with("N,beta,x,offset,trials,successes,p_hat,ci_low,ci_high,seed,wall_time\n"));
}

#[test]
fn config_file_and_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("apl.toml");
    std::fs::write(
        &cfg,
        "seed = 3\nformat = \"json\"\n\n[sweep]\nn-list = [6]\noffsets = [0.0, 0.1]\ntrials = 50\nredact-timing = true\n",
    )
    .unwrap();
    let path = cfg.to_str().unwrap();
    let o = apl(&["sweep", "--config", path]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 2);
    assert_eq!(v["rows"][0]["trials"], 50);

    let o = apl(&[
        "sweep", "--config", path, "--trials", "70", "--format", "csv",
    ]);
    let text = stdout(&o);
    assert!(text.starts_with("N,beta"));
    assert!(text.lines().nth(1).unwrap().contains(",70,"));

    std::fs::write(&cfg, "[sweep]\nno-such-key = 1\n").unwrap();
    assert_eq!(apl(&["sweep", "--config", path]).status.code(), Some(2));
}

#[test]
fn seqmodel_and_window() {
    let o = apl(&["seqmodel", "--n", "200", "--trials", "3"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("trial,L,good,first_violated_clause,T_half,O_half\n"));
    assert_eq!(text.lines().count(), 4);

    let o = apl(&[
        "window", "--n-list", "8", "--trials", "200", "--lower", "0.0", "--upper", "1.0",
    ]);
    assert!(o.status.success());
    let o = apl(&[
        "window", "--n-list", "8", "--trials", "200", "--lower", "0.9",
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn nk_modes() {
    for mode in ["exhaustive", "greedy", "walk"] {
        let o = apl(&[
            "nk", "--n", "10", "--k", "2", "--seeds", "3", "--mode", mode,
        ]);
        assert!(o.status.success(), "{mode}");
        let text = stdout(&o);
        assert!(text.starts_with("seed,N,K,value,normalized_value,steps\n"));
        assert_eq!(text.lines().count(), 4);
    }
    let o = apl(&["nk", "--n", "10", "--mode", "iidcheck", "--seeds", "60"]);
    assert!(o.status.success());
}
