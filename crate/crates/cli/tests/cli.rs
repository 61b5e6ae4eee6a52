use std::process::{Command, Output};

use serde_json::Value;

fn run_with(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_unitary-ring"));
    cmd.args(args);
    match threads {
        Some(t) => cmd.env("UNITARY_RING_THREADS", t),
        None => cmd.env_remove("UNITARY_RING_THREADS"),
    };
    cmd.output().expect("binary runs")
}

fn run(args: &[&str]) -> Output {
    run_with(args, None)
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn eval_examples() {
    for (expr, n, value) in [("box(one,one)", "12", 4), ("delta1", "7", 0), ("mul(id, box(one, mobrad))", "12", 4)] {
        let out = run(&["eval", expr, n]);
        assert_eq!(code(&out), 0);
        let v = json(&out);
        assert_eq!(v["value"], value, "{expr}");
        assert_eq!(v["schema"], "1");
    }
    let out = run(&["--format", "csv", "eval", "mobrad", "12"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "expr,n,value,exact\nmobrad,12,0.16666666666666666+0i,1/6\n");
}

#[test]
fn parse_errors_are_usage_errors() {
    let out = run(&["eval", "box(one, frob)", "3"]);
    assert_eq!(code(&out), 1);
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("byte 9"), "{err}");
    assert!(out.stdout.is_empty());
    assert_eq!(code(&run(&["verify", "orthproduct"])), 1);
    assert_eq!(code(&run(&["verify", "nonsense"])), 1);
    assert_eq!(code(&run(&["eval", "one"])), 1);
    assert_eq!(code(&run(&["axioms", "--weight", "file:/nonexistent/w.tsv"])), 1);
    assert_eq!(code(&run_with(&["eval", "one", "1"], Some("zero"))), 1);
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn verify_examples() {
    let out = run(&["verify", "hardy-classic", "--x", "2", "--n", "1000000"]);
    assert_eq!(code(&out), 0);
    let ratio = json(&out)["details"]["ratio"].as_f64().unwrap();
    assert!((2.499..=2.5).contains(&ratio));

    let out = run(&["verify", "sumchar", "--k", "5", "--a", "6"]);
    let v = json(&out);
    assert_eq!(v["details"]["s_rounded"], 0);
    assert_eq!(v["details"]["v2"], 16);
    assert_eq!(v["details"]["s_equals_v2"], false);
    assert_eq!(code(&out), 0);

    let out = run(&["verify", "derivation-cert", "--k", "12", "--bound", "10000"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["details"]["certificates"].as_array().unwrap().len(), 4);

    for args in [
        vec!["verify", "refactor", "--f", "id", "--g", "char(5,1)", "--s", "3.5", "--n", "20000"],
        vec!["verify", "realimsplit", "--f", "char(7,1)", "--g", "idpow(i)", "--n", "20000"],
        vec!["verify", "hardy", "--z", "3+2i", "--n", "20000"],
        vec!["verify", "orthproduct", "--f", "mul(id, ind({2}))", "--g", "ind(~{2})", "--n", "20000"],
        vec!["verify", "primecomp", "--primes", "2,5", "--f", "twoomega", "--s", "3", "--n", "20000"],
        vec!["verify", "zeta-minus-one", "--s", "3"],
        vec!["verify", "zeta-minus-one-next", "--s", "2", "--n", "5000"],
        vec!["verify", "eulerchar", "--bound", "3000"],
        vec!["verify", "ideplusone", "--bound", "3000"],
        vec!["verify", "twotime", "--f", "phi", "--bound", "3000"],
        vec!["verify", "cosasina", "--y", "0.3", "--bound", "3000"],
    ] {
        let out = run(&args);
        assert_eq!(code(&out), 0, "{args:?}: {}", String::from_utf8_lossy(&out.stdout));
        assert_eq!(json(&out)["status"], "pass");
    }
}

#[test]
fn unmet_preconditions_are_usage_errors() {
    let out = run(&["verify", "refactor", "--f", "id", "--g", "twoomega", "--n", "100"]);
    assert_eq!(code(&out), 1, "twoomega is not completely multiplicative");
    let out = run(&["verify", "hardy", "--z", "0.9", "--n", "100"]);
    assert_eq!(code(&out), 1, "the series diverges");
}

#[test]
fn axiom_examples() {
    let out = run(&["axioms", "--weight", "coprime", "--bound", "5000"]);
    assert_eq!(code(&out), 0);
    let reports = json(&out)["reports"].as_array().unwrap().clone();
    assert_eq!(reports.len(), 5);
    assert!(reports.iter().all(|r| r["status"] == "pass"));

    let out = run(&["axioms", "--weight", "ones", "--bound", "100"]);
    assert_eq!(code(&out), 2);
    let v = json(&out);
    let failed: Vec<&Value> = v["reports"].as_array().unwrap().iter().filter(|r| r["status"] == "fail").collect();
    assert_eq!(failed.len(), 1);
    assert_eq!(failed[0]["axiom"], "distributivity");

    let path = std::env::temp_dir().join(format!("perturbed-{}.tsv", std::process::id()));
    std::fs::write(&path, "# flip one coprime entry\ndefault coprime\n2\t3\t0\n").unwrap();
    let source = format!("file:{}", path.display());
    let out = run(&["--format", "csv", "axioms", "--weight", &source, "--bound", "500"]);
    std::fs::remove_file(&path).unwrap();
    assert_eq!(code(&out), 2);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("axiom,status,bound,witness"));
    assert!(text.lines().any(|l| l.contains(",fail,")), "{text}");
}

#[test]
fn character_tables() {
    let table = |k: &str| {
        let out = run(&["--format", "csv", "characters", "--k", k]);
        assert_eq!(code(&out), 0);
        String::from_utf8(out.stdout).unwrap()
    };
    let t3 = table("3");
    assert_eq!(t3.lines().count(), 3);
    assert_eq!(t3.lines().next().unwrap(), "character,0,1,2");
    let t5 = table("5");
    assert_eq!(t5.lines().count(), 5);
    assert!(t5.contains("\"0,1\""));
    let t8 = table("8");
    assert_eq!(t8.lines().count(), 5);
    for line in t8.lines().skip(1) {
        let mut rdr = csv::ReaderBuilder::new().has_headers(false).from_reader(line.as_bytes());
        let rec = rdr.records().next().unwrap().unwrap();
        assert!(rec.iter().skip(1).all(|v| v.ends_with(",0")), "{line}");
    }
    let v = json(&run(&["characters", "--k", "8"]));
    assert_eq!(v["order"], 4);
    assert!(v["characters"].as_array().unwrap().iter().all(|c| c["real"] == true));
}

#[test]
fn outputs_are_reproducible_across_thread_counts() {
    for args in [
        vec!["unicity", "--perturbations", "6", "--bound", "400", "--seed", "3"],
        vec!["verify", "hardy", "--z", "1.5+0.3i", "--n", "200000"],
        vec!["series", "twoomega", "--s", "2", "--n", "100000"],
    ] {
        let a = run_with(&args, Some("1"));
        let b = run_with(&args, Some("4"));
        let c = run_with(&args, None);
        assert_eq!(code(&a), 0, "{args:?}");
        assert_eq!(a.stdout, b.stdout, "{args:?}");
        assert_eq!(a.stdout, c.stdout, "{args:?}");
    }
    let out = run(&["unicity", "--perturbations", "6", "--bound", "400", "--seed", "3"]);
    let v = json(&out);
    assert_eq!(v["all_detected"], true);
    assert_eq!(v["trials"].as_array().unwrap().len(), 6);
}
