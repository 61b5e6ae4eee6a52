//! `unitary-ring`: evaluate kernels, run identity verifiers, print character
//! tables, check weight axioms and run the unicity search.
//!
//! Kernels are written in the grammar of [`unitary_ring::expr`], for example
//! `box(one, inv(one))` or `mul(id, char(5,2))`. Complex parameters take the
//! same literal forms: `3`, `2+i`, `1.5-0.3i`.
//!
//! Weight files for `axioms --weight file:PATH` hold one `a b value` entry
//! per line (value `re` or `re,im`) that overrides a default rule, set with
//! `default coprime` or `default ones`; `bound N` sets the certified domain
//! `ab <= N` and `#` starts a comment.
//!
//! Reports go to stdout as JSON (schema "1") or CSV; diagnostics go to
//! stderr. Exit status is 0 when every check passes, 2 when one fails and 1
//! on a usage or input error. `UNITARY_RING_THREADS` caps worker threads.

use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};
use unitary_ring::characters::{
    box_sum_kernel, box_sum_with, character, character_table, character_table_csv, characters,
    derivation_certificate,
};
use unitary_ring::expr::{parse, parse_complex};
use unitary_ring::identities::{cosasina, eulerchar, ideplusone, twotime};
use unitary_ring::kernel::{Kernel, PrimeSet};
use unitary_ring::report::{IdentityReport, SCHEMA};
use unitary_ring::series::{
    hardy_classic, hardy_general, series_eval, verify_orthproduct, verify_primecompfactor,
    verify_realimsplit, verify_refactorization, zeta_minus_one, zeta_minus_one_next,
};
use unitary_ring::weight::{check_all, coprime_weight, ones, unicity_search, verify_weight_factorization, WeightFn};
use unitary_ring::{Error, Result};

#[derive(Parser)]
#[command(name = "unitary-ring", version, about = "Verifier for the unitary-convolution ring of multiplicative functions")]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a kernel at n.
    Eval { expr: String, n: u64 },
    /// Truncated Dirichlet series sum_{n <= N} F(n) n^-s with its tail bound.
    Series {
        expr: String,
        #[arg(long, default_value = "2")]
        s: String,
        #[arg(long, default_value_t = 100_000)]
        n: u64,
    },
    /// Run one identity verifier.
    Verify(VerifyArgs),
    /// Check the ring axioms for a weight.
    Axioms {
        /// `coprime`, `ones` or `file:PATH`.
        #[arg(long, default_value = "coprime")]
        weight: String,
        #[arg(long, default_value_t = 5000)]
        bound: u64,
        /// Also check the prime-power factorization formula.
        #[arg(long)]
        factorization: bool,
    },
    /// Perturb single entries of the coprime weight and look for axiom failures.
    Unicity {
        #[arg(long, default_value_t = 100)]
        perturbations: usize,
        #[arg(long, default_value_t = 5000)]
        bound: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Print the character table mod k.
    Characters {
        #[arg(long)]
        k: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Identity {
    Refactor,
    Realimsplit,
    Hardy,
    HardyClassic,
    Orthproduct,
    Primecomp,
    ZetaMinusOne,
    ZetaMinusOneNext,
    Sumchar,
    DerivationCert,
    Eulerchar,
    Ideplusone,
    Twotime,
    Cosasina,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(value_enum)]
    identity: Identity,
    /// First kernel expression.
    #[arg(long)]
    f: Option<String>,
    /// Second kernel expression.
    #[arg(long)]
    g: Option<String>,
    /// Complex argument of the series.
    #[arg(long)]
    s: Option<String>,
    /// Complex argument of `hardy`.
    #[arg(long)]
    z: Option<String>,
    /// Real argument of `hardy-classic`.
    #[arg(long)]
    x: Option<f64>,
    /// Truncation point N.
    #[arg(long)]
    n: Option<u64>,
    /// Character modulus.
    #[arg(long)]
    k: Option<u64>,
    /// Evaluation point for `sumchar`.
    #[arg(long)]
    a: Option<u64>,
    /// Scan `sumchar` over every a in 2..=SCAN.
    #[arg(long)]
    scan: Option<u64>,
    /// Character index for `derivation-cert`; all characters when absent.
    #[arg(long)]
    index: Option<usize>,
    /// Bound for exact scans.
    #[arg(long)]
    bound: Option<u64>,
    /// Comma-separated primes for `primecomp`.
    #[arg(long)]
    primes: Option<String>,
    /// Parameter of `cosasina`.
    #[arg(long)]
    y: Option<f64>,
}

struct Outcome {
    json: Value,
    csv: String,
    passed: bool,
}

fn usage(msg: impl Into<String>) -> Error {
    Error::Precondition(msg.into())
}

fn kernel_arg(arg: &Option<String>, flag: &str, default: Option<&str>) -> Result<Kernel> {
    match (arg.as_deref(), default) {
        (Some(text), _) | (None, Some(text)) => parse(text),
        (None, None) => Err(usage(format!("--{flag} is required"))),
    }
}

fn complex_arg(arg: &Option<String>, default: &str) -> Result<Complex64> {
    parse_complex(arg.as_deref().unwrap_or(default))
}

fn required<T: Copy>(arg: Option<T>, flag: &str) -> Result<T> {
    arg.ok_or_else(|| usage(format!("--{flag} is required")))
}

fn to_json(value: &impl Serialize) -> Value {
    serde_json::to_value(value).expect("reports serialize")
}

fn csv_string(header: &[&str], rows: Vec<Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
}

fn opt<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn identity_outcome(r: IdentityReport) -> Outcome {
    let side = |s: &Option<unitary_ring::report::Side>| match s {
        Some(s) => [s.value.re.to_string(), s.value.im.to_string(), s.tail_bound.to_string()],
        None => Default::default(),
    };
    let mut row = vec![
        r.identity.clone(),
        to_json(&r.status).as_str().unwrap_or_default().to_string(),
        opt(r.n),
        opt(r.abs_err),
        opt(r.tolerance),
    ];
    let details = if r.details.is_null() { String::new() } else { r.details.to_string() };
    row.extend(side(&r.lhs));
    row.extend(side(&r.rhs));
    row.push(details);
    let csv = csv_string(
        &[
            "identity", "status", "N", "abs_err", "tolerance", "lhs_re", "lhs_im", "lhs_tail", "rhs_re",
            "rhs_im", "rhs_tail", "details",
        ],
        vec![row],
    );
    Outcome { passed: r.passed(), json: to_json(&r), csv }
}

fn cmd_eval(expr: &str, n: u64) -> Result<Outcome> {
    let k = parse(expr)?;
    let exact = if k.flags().integer_valued {
        Some(k.eval_int(n)?.into())
    } else {
        k.eval_exact(n).ok()
    };
    let (value, text) = match exact.filter(|r| r.is_integer()) {
        Some(r) => {
            let v = r.to_integer();
            (i64::try_from(v).map(Value::from).unwrap_or_else(|_| Value::from(v.to_string())), v.to_string())
        }
        None => {
            let z = k.eval(n)?;
            let (re, im) = (z.re + 0.0, z.im + 0.0);
            (json!({ "re": re, "im": im }), format!("{}", Complex64::new(re, im)))
        }
    };
    let exact = exact.map(|r| r.to_string());
    let json = json!({ "schema": SCHEMA, "expr": k.to_string(), "n": n, "value": value, "exact": exact });
    let csv = csv_string(&["expr", "n", "value", "exact"], vec![vec![k.to_string(), n.to_string(), text, opt(exact)]]);
    Ok(Outcome { json, csv, passed: true })
}

fn cmd_series(expr: &str, s: &str, n: u64) -> Result<Outcome> {
    let k = parse(expr)?;
    let s = parse_complex(s)?;
    let v = series_eval(&k, s, n)?;
    let json = json!({
        "schema": SCHEMA,
        "expr": k.to_string(),
        "s": { "re": s.re, "im": s.im },
        "N": n,
        "value": { "re": v.value.re, "im": v.value.im },
        "tail_bound": v.tail_bound,
        "growth": to_json(&v.growth),
    });
    let csv = csv_string(
        &["expr", "s_re", "s_im", "N", "re", "im", "tail_bound"],
        vec![vec![
            k.to_string(),
            s.re.to_string(),
            s.im.to_string(),
            n.to_string(),
            v.value.re.to_string(),
            v.value.im.to_string(),
            v.tail_bound.to_string(),
        ]],
    );
    Ok(Outcome { json, csv, passed: true })
}

fn cmd_verify(a: &VerifyArgs) -> Result<Outcome> {
    let n = a.n.unwrap_or(100_000);
    let bound = a.bound.or(a.n).unwrap_or(10_000);
    let report = match a.identity {
        Identity::Refactor => verify_refactorization(
            &kernel_arg(&a.f, "f", Some("one"))?,
            &kernel_arg(&a.g, "g", Some("one"))?,
            complex_arg(&a.s, "3")?,
            n,
        )?,
        Identity::Realimsplit => verify_realimsplit(
            &kernel_arg(&a.f, "f", Some("one"))?,
            &kernel_arg(&a.g, "g", Some("one"))?,
            complex_arg(&a.s, "3")?,
            n,
        )?,
        Identity::Hardy => hardy_general(complex_arg(&a.z, "2+i")?, n)?,
        Identity::HardyClassic => hardy_classic(a.x.unwrap_or(2.0), n)?,
        Identity::Orthproduct => verify_orthproduct(
            &kernel_arg(&a.f, "f", None)?,
            &kernel_arg(&a.g, "g", None)?,
            complex_arg(&a.s, "3")?,
            n,
        )?,
        Identity::Primecomp => {
            let text = a.primes.as_deref().ok_or_else(|| usage("--primes is required"))?;
            let primes = text
                .split(',')
                .map(|p| p.trim().parse::<u64>().map_err(|_| usage(format!("invalid prime `{p}`"))))
                .collect::<Result<Vec<_>>>()?;
            verify_primecompfactor(&PrimeSet::new(primes)?, &kernel_arg(&a.f, "f", Some("one"))?, complex_arg(&a.s, "3")?, n)?
        }
        Identity::ZetaMinusOne => zeta_minus_one(complex_arg(&a.s, "2")?, a.n.unwrap_or(10_000))?,
        Identity::ZetaMinusOneNext => zeta_minus_one_next(complex_arg(&a.s, "2")?, a.n.unwrap_or(10_000))?,
        Identity::Sumchar => sumchar(a)?,
        Identity::DerivationCert => {
            let k = required(a.k, "k")?;
            let chars = match a.index {
                Some(i) => vec![character(k, i)?],
                None => characters(k)?,
            };
            let certs = chars
                .into_iter()
                .map(|c| derivation_certificate(&Arc::new(c), bound))
                .collect::<Result<Vec<_>>>()?;
            let ok = certs.iter().all(|c| c.passed);
            IdentityReport::check("derivation-cert", Some(bound), ok, json!({ "k": k, "certificates": certs }))
        }
        Identity::Eulerchar => eulerchar(bound)?,
        Identity::Ideplusone => ideplusone(bound)?,
        Identity::Twotime => twotime(&kernel_arg(&a.f, "f", Some("id"))?, bound)?,
        Identity::Cosasina => cosasina(a.y.unwrap_or(1.0), bound)?,
    };
    Ok(identity_outcome(report))
}

/// A single `(k, a)` report, or with `--scan` every `a <= scan` with the
/// pairs where either closed form disagrees.
fn sumchar(a: &VerifyArgs) -> Result<IdentityReport> {
    let k = required(a.k, "k")?;
    let sum = box_sum_kernel(k)?;
    if let Some(scan) = a.scan {
        let mut v1 = Vec::new();
        let mut v2 = Vec::new();
        for x in 2..=scan {
            let r = box_sum_with(&sum, k, x)?;
            if !r.s_equals_v1 {
                v1.push(x);
            }
            if !r.s_equals_v2 {
                v2.push(x);
            }
        }
        let details = json!({ "k": k, "scanned": [2, scan], "v1_mismatches": v1, "v2_mismatches": v2 });
        return Ok(IdentityReport::check("sumchar", Some(scan), v1.is_empty(), details));
    }
    let r = box_sum_with(&sum, k, required(a.a, "a")?)?;
    Ok(IdentityReport::check("sumchar", Some(r.a), r.s_equals_v1, to_json(&r)))
}

fn load_weight(source: &str, bound: u64) -> Result<WeightFn> {
    match source {
        "coprime" => Ok(coprime_weight(bound)),
        "ones" => Ok(ones(bound)),
        _ => match source.strip_prefix("file:") {
            Some(path) => WeightFn::from_file(path, bound),
            None => Err(usage(format!("unknown weight `{source}`; expected coprime, ones or file:PATH"))),
        },
    }
}

fn cmd_axioms(source: &str, bound: u64, factorization: bool) -> Result<Outcome> {
    let w = load_weight(source, bound)?;
    let mut reports = check_all(&w, bound)?;
    if factorization {
        reports.push(verify_weight_factorization(&w, bound)?);
    }
    let rows = reports
        .iter()
        .map(|r| {
            let (witness, lhs, rhs) = match &r.witness {
                Some(v) => {
                    let t: Vec<String> = v.witness.iter().map(|x| x.to_string()).collect();
                    (t.join(" "), [v.lhs.re.to_string(), v.lhs.im.to_string()], [v.rhs.re.to_string(), v.rhs.im.to_string()])
                }
                None => Default::default(),
            };
            let mut row = vec![r.axiom.to_string(), to_json(&r.status).as_str().unwrap_or_default().to_string(), r.bound.to_string(), witness];
            row.extend(lhs);
            row.extend(rhs);
            row
        })
        .collect();
    let csv = csv_string(&["axiom", "status", "bound", "witness", "lhs_re", "lhs_im", "rhs_re", "rhs_im"], rows);
    let passed = reports.iter().all(|r| r.passed());
    let json = json!({ "schema": SCHEMA, "weight": w.name(), "bound": bound, "reports": reports });
    Ok(Outcome { json, csv, passed })
}

fn cmd_unicity(perturbations: usize, bound: u64, seed: u64) -> Result<Outcome> {
    let r = unicity_search(perturbations, bound, seed)?;
    let rows = r
        .trials
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let p = &t.perturbation;
            let failed: Vec<String> = t.failed.iter().map(|a| a.to_string()).collect();
            vec![
                i.to_string(),
                to_json(&p.kind).as_str().unwrap_or_default().to_string(),
                p.a.to_string(),
                p.b.to_string(),
                p.old.re.to_string(),
                p.old.im.to_string(),
                p.new.re.to_string(),
                p.new.im.to_string(),
                failed.join(" "),
                t.detected.to_string(),
                t.witnesses_recheck.to_string(),
            ]
        })
        .collect();
    let csv = csv_string(
        &["trial", "kind", "a", "b", "old_re", "old_im", "new_re", "new_im", "failed", "detected", "witnesses_recheck"],
        rows,
    );
    let passed = r.status.is_pass();
    let mut json = to_json(&r);
    json["schema"] = Value::from(SCHEMA);
    Ok(Outcome { json, csv, passed })
}

fn cmd_characters(k: u64) -> Result<Outcome> {
    Ok(Outcome { json: to_json(&character_table(k)?), csv: character_table_csv(k)?, passed: true })
}

fn configure_threads() -> std::result::Result<(), String> {
    let Ok(raw) = std::env::var("UNITARY_RING_THREADS") else { return Ok(()) };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| format!("UNITARY_RING_THREADS must be a positive integer, got `{raw}`"))?;
    rayon::ThreadPoolBuilder::new().num_threads(threads).build_global().map_err(|e| e.to_string())
}

fn run(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Eval { expr, n } => cmd_eval(expr, *n),
        Command::Series { expr, s, n } => cmd_series(expr, s, *n),
        Command::Verify(args) => cmd_verify(args),
        Command::Axioms { weight, bound, factorization } => cmd_axioms(weight, *bound, *factorization),
        Command::Unicity { perturbations, bound, seed } => cmd_unicity(*perturbations, *bound, *seed),
        Command::Characters { k } => cmd_characters(*k),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(1);
    }
    match run(&cli) {
        Ok(out) => {
            match cli.format {
                Format::Json => println!("{}", serde_json::to_string_pretty(&out.json).expect("json value")),
                Format::Csv => print!("{}", out.csv),
            }
            if out.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
