//! `tc` — command-line front end for the torsion-clean toolkit.
//!
//! Every verb maps to exactly one library operation and produces either a
//! human-readable text report (default) or a JSON report (`--json`) whose
//! shape is described by `report.schema.json` at the repository root.
//! Reports go to standard output unless `--out <path>` redirects them; no
//! other files are ever written.
//!
//! Determinism: with a fixed `--seed`, repeated invocations emit identical
//! bytes. Wall-clock timing is therefore only included when `--timing` is
//! passed explicitly.
//!
//! Exit codes: 0 on success (including "property is false" answers), 1
//! when a brute-force result contradicts a predicted value or a printed
//! self-check fails, 2 on usage, input, or budget errors.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use torsion_clean::certify::{
    self, AlmostVerdict, CertifyOptions, Coverage, TorsionCertificate,
};
use torsion_clean::decomp::{Decomposer, SearchConfig};
use torsion_clean::gf2mat::{Mat, RingSpec};
use torsion_clean::gf2poly::{self, Poly};
use torsion_clean::{canon, numtheory, DEFAULT_SEED};

#[derive(Parser)]
#[command(
    name = "tc",
    version,
    about = "Torsion-clean decompositions of matrix rings over GF(2)",
    max_term_width = 100
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Seed for randomized searches and sampled scans.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,

    /// Emit a JSON report instead of text.
    #[arg(long, global = true)]
    json: bool,

    /// Draw budget for randomized search phases.
    #[arg(long, global = true)]
    budget: Option<u64>,

    /// Worker threads for certification scans (0 = all available).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    /// Write the report to this file instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Include wall-clock timing in reports (breaks byte determinism).
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Factor a polynomial over GF(2) into irreducibles.
    Factor {
        /// Polynomial, e.g. "X^3+X+1", or an ascending coefficient
        /// bit-string, e.g. "1101".
        #[arg(long)]
        poly: String,
    },
    /// Degree multiset of the irreducible factors of X^n - 1 over GF(2).
    Degrees {
        #[arg(long)]
        n: u64,
    },
    /// Decide whether n is p-practical (X^n - 1 over F_p has a divisor of
    /// every degree up to n).
    Practical {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        n: u64,
    },
    /// Least k >= 1 with C(m, k) odd: the lowest power of two dividing m.
    K1 { m: u64 },
    /// Multiplicative order of a modulo n; --star first strips from n the
    /// prime factors it shares with a.
    Order {
        #[arg(long, default_value_t = 2)]
        a: u64,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        star: bool,
    },
    /// Characteristic and minimal polynomial of a matrix.
    Charpoly {
        /// Path to a matrix in text format (n lines of n '0'/'1' chars).
        #[arg(long)]
        matrix: PathBuf,
    },
    /// Frobenius normal form: invariant factors, companion blocks, and the
    /// similarity transform.
    Frobenius {
        #[arg(long)]
        matrix: PathBuf,
    },
    /// Decompose a matrix as idempotent + unit with U^n = I, printing the
    /// full verification checklist.
    Decompose {
        #[arg(long)]
        matrix: PathBuf,
        /// Torsion exponent the unit must satisfy.
        #[arg(long)]
        n: u64,
    },
    /// Decompose a matrix as idempotent + nilpotent.
    Nilclean {
        #[arg(long)]
        matrix: PathBuf,
    },
    /// Brute-force torsion certification of a full or triangular matrix
    /// ring, with prediction cross-checks for triangular rings.
    Certify {
        /// Ring family: M (full) or T (upper triangular).
        #[arg(long, value_enum)]
        ring: RingArg,
        /// Matrix dimension.
        #[arg(long)]
        size: usize,
        /// Certify every exponent up to this bound (default 2*size + 4).
        #[arg(long, conflicts_with = "m")]
        mmax: Option<u64>,
        /// Check a single exponent instead of a full certificate.
        #[arg(long)]
        m: Option<u64>,
        /// Sample count for the sampled mode (full 5x5 ring only, default
        /// 100000); the verdict there is one-sided.
        #[arg(long)]
        samples: Option<u64>,
    },
    /// Predicted torsion behavior of the triangular ring of a given size.
    TnPredict {
        #[arg(long)]
        size: u64,
        /// Also evaluate the almost m-torsion-clean predicate at this m.
        #[arg(long)]
        m: Option<u64>,
    },
    /// Torsion-clean orders (plain and weak) of the integers modulo n.
    Zn {
        #[arg(long)]
        n: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum RingArg {
    /// Full matrix ring M_n(F_2).
    #[value(name = "M", alias = "m", alias = "full")]
    Full,
    /// Upper triangular ring T_n(F_2).
    #[value(name = "T", alias = "t", alias = "triangular")]
    Triangular,
}

impl RingArg {
    fn spec(self, size: usize) -> RingSpec {
        match self {
            RingArg::Full => RingSpec::full(size),
            RingArg::Triangular => RingSpec::upper_triangular(size),
        }
    }
}

/// A finished verb run: both renderings plus the exit status.
struct Report {
    text: String,
    result: Value,
    exit: ExitCode,
}

impl Report {
    fn ok(text: String, result: Value) -> Report {
        Report { text, result, exit: ExitCode::SUCCESS }
    }
}

/// Input, budget, and usage problems; always exit code 2.
struct CliError(String);

impl<E: std::error::Error> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(CliError(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> Result<ExitCode, CliError> {
    let report = dispatch(cli)?;
    let command_name = match &cli.command {
        Command::Factor { .. } => "factor",
        Command::Degrees { .. } => "degrees",
        Command::Practical { .. } => "practical",
        Command::K1 { .. } => "k1",
        Command::Order { .. } => "order",
        Command::Charpoly { .. } => "charpoly",
        Command::Frobenius { .. } => "frobenius",
        Command::Decompose { .. } => "decompose",
        Command::Nilclean { .. } => "nilclean",
        Command::Certify { .. } => "certify",
        Command::TnPredict { .. } => "tn-predict",
        Command::Zn { .. } => "zn",
    };
    let payload = if cli.json {
        let envelope = json!({ "command": command_name, "result": report.result });
        let mut bytes = serde_json::to_string_pretty(&envelope).expect("report serializes");
        bytes.push('\n');
        bytes
    } else {
        let mut text = report.text;
        if !text.ends_with('\n') {
            text.push('\n');
        }
        text
    };
    match &cli.out {
        Some(path) => std::fs::write(path, payload).map_err(|e| CliError(e.to_string()))?,
        None => print!("{payload}"),
    }
    Ok(report.exit)
}

fn dispatch(cli: &Cli) -> Result<Report, CliError> {
    match &cli.command {
        Command::Factor { poly } => factor_report(poly),
        Command::Degrees { n } => degrees_report(*n),
        Command::Practical { p, n } => practical_report(*p, *n),
        Command::K1 { m } => k1_report(*m),
        Command::Order { a, n, star } => order_report(*a, *n, *star),
        Command::Charpoly { matrix } => charpoly_report(&load_matrix(matrix)?),
        Command::Frobenius { matrix } => frobenius_report(&load_matrix(matrix)?),
        Command::Decompose { matrix, n } => {
            decompose_report(&load_matrix(matrix)?, *n, search_config(cli))
        }
        Command::Nilclean { matrix } => nilclean_report(&load_matrix(matrix)?, search_config(cli)),
        Command::Certify { ring, size, mmax, m, samples } => {
            let opts = CertifyOptions {
                m_max: *mmax,
                samples: *samples,
                seed: cli.seed,
                threads: cli.threads,
            };
            match m {
                Some(m) => certify_single_report(ring.spec(*size), *m, &opts),
                None => certify_report(ring.spec(*size), &opts, cli.timing),
            }
        }
        Command::TnPredict { size, m } => tn_predict_report(*size, *m),
        Command::Zn { n } => zn_report(*n),
    }
}

fn search_config(cli: &Cli) -> SearchConfig {
    let mut config = SearchConfig::default();
    config.seed = cli.seed;
    if let Some(budget) = cli.budget {
        config.budget = budget;
    }
    config
}

fn load_matrix(path: &PathBuf) -> Result<Mat, CliError> {
    let contents = std::fs::read_to_string(path)
        .map_err(|e| CliError(format!("{}: {e}", path.display())))?;
    Ok(Mat::from_str(contents.trim())?)
}

/// Matrix rows joined by '/' for single-line text output; the JSON report
/// keeps the canonical multi-line form.
fn compact(m: &Mat) -> String {
    m.to_string().replace('\n', "/")
}

fn factor_report(input: &str) -> Result<Report, CliError> {
    let poly = Poly::from_str(input)?;
    let factorization = poly.factor()?;
    let mut text = format!("input: {poly}\nirreducible factors:\n");
    for (factor, multiplicity) in factorization.factors() {
        writeln!(text, "  ({factor})^{multiplicity}").unwrap();
    }
    let result = json!({
        "input": poly.to_string(),
        "factors": factorization
            .factors()
            .iter()
            .map(|(factor, multiplicity)| {
                json!({
                    "poly": factor.to_string(),
                    "degree": factor.degree().expect("irreducible factors are nonzero"),
                    "multiplicity": multiplicity,
                })
            })
            .collect::<Vec<_>>(),
    });
    Ok(Report::ok(text, result))
}

fn degrees_report(n: u64) -> Result<Report, CliError> {
    let degrees = gf2poly::xn_minus_1_degrees(n as usize)?;
    let total: usize = degrees.iter().map(|&(_, count)| count).sum();
    let mut text = format!("X^{n} - 1 over GF(2): {total} irreducible factors\n");
    for &(degree, count) in &degrees {
        writeln!(text, "  degree {degree}: {count}").unwrap();
    }
    let result = json!({
        "n": n,
        "total": total,
        "degrees": degrees
            .iter()
            .map(|&(degree, count)| json!({ "degree": degree, "count": count }))
            .collect::<Vec<_>>(),
    });
    Ok(Report::ok(text, result))
}

fn practical_report(p: u64, n: u64) -> Result<Report, CliError> {
    let witness = numtheory::is_p_practical(p, n)?;
    let mut text = format!("{p}-practical: {}\n", witness.practical);
    if let Some(m) = witness.missing_m {
        writeln!(text, "smallest unrepresentable degree: {m}").unwrap();
    }
    let result = json!({
        "p": p,
        "n": n,
        "practical": witness.practical,
        "missing_degree": witness.missing_m,
        "items": witness
            .items
            .iter()
            .map(|item| json!({ "d": item.d, "weight": item.weight, "capacity": item.capacity }))
            .collect::<Vec<_>>(),
    });
    Ok(Report::ok(text, result))
}

fn k1_report(m: u64) -> Result<Report, CliError> {
    let k1 = numtheory::k1(m)?;
    Ok(Report::ok(format!("{k1}\n"), json!({ "m": m, "k1": k1 })))
}

fn order_report(a: u64, n: u64, star: bool) -> Result<Report, CliError> {
    let order =
        if star { numtheory::l_star(a, n)? } else { numtheory::mult_order(a, n)? };
    let result = json!({ "a": a, "n": n, "star": star, "order": order });
    Ok(Report::ok(format!("{order}\n"), result))
}

fn charpoly_report(a: &Mat) -> Result<Report, CliError> {
    let charpoly = a.charpoly();
    let minpoly = a.minpoly();
    let text = format!(
        "dimension: {}\ncharacteristic polynomial: {charpoly}\nminimal polynomial: {minpoly}\n",
        a.dim()
    );
    let result = json!({
        "dimension": a.dim(),
        "charpoly": charpoly.to_string(),
        "minpoly": minpoly.to_string(),
    });
    Ok(Report::ok(text, result))
}

fn frobenius_report(a: &Mat) -> Result<Report, CliError> {
    let form = canon::frobenius_form(a);
    let block_diagonal = form.block_diagonal();
    let conjugation_ok = a.mul(&form.transform) == form.transform.mul(&block_diagonal);
    let mut text = String::from("invariant factors (each divides the next):\n");
    for (i, q) in form.invariant_factors.iter().enumerate() {
        writeln!(text, "  q{} = {q}", i + 1).unwrap();
    }
    writeln!(text, "block diagonal:\n{block_diagonal}").unwrap();
    writeln!(text, "transform P (A P = P B):\n{}", form.transform).unwrap();
    writeln!(text, "check: A P = P B: {}", if conjugation_ok { "ok" } else { "FAILED" })
        .unwrap();
    let result = json!({
        "dimension": a.dim(),
        "invariant_factors": form
            .invariant_factors
            .iter()
            .map(Poly::to_string)
            .collect::<Vec<_>>(),
        "blocks": form.blocks.iter().map(Mat::to_string).collect::<Vec<_>>(),
        "block_diagonal": block_diagonal.to_string(),
        "transform": form.transform.to_string(),
        "conjugation_ok": conjugation_ok,
    });
    let exit = if conjugation_ok { ExitCode::SUCCESS } else { ExitCode::from(1) };
    Ok(Report { text, result, exit })
}

fn decompose_report(a: &Mat, n: u64, config: SearchConfig) -> Result<Report, CliError> {
    let decomposition = Decomposer::new(config).almost_torsion_decompose(a, n)?;
    let idempotent_ok = decomposition.e.is_idempotent();
    let sum_ok = decomposition.e.add(&decomposition.u) == *a;
    let torsion_ok = decomposition.u.pow(n as u128).is_identity();
    let all_ok = idempotent_ok && sum_ok && torsion_ok;
    let strategies: Vec<String> = decomposition
        .strategies
        .iter()
        .map(|s| {
            serde_json::to_value(s)
                .expect("strategy serializes")
                .as_str()
                .expect("strategy is a string")
                .to_owned()
        })
        .collect();

    let mut text = format!("input A:\n{a}\nexponent n: {n}\n");
    writeln!(text, "idempotent E:\n{}", decomposition.e).unwrap();
    writeln!(text, "unit U = A + E:\n{}", decomposition.u).unwrap();
    writeln!(text, "checks:").unwrap();
    writeln!(text, "  E^2 = E: {}", if idempotent_ok { "ok" } else { "FAILED" }).unwrap();
    writeln!(text, "  A = E + U: {}", if sum_ok { "ok" } else { "FAILED" }).unwrap();
    writeln!(text, "  U^{n} = I: {}", if torsion_ok { "ok" } else { "FAILED" }).unwrap();
    writeln!(text, "unit order: {} (divides {n})", decomposition.unit_order).unwrap();
    writeln!(text, "idempotent rank: {}", decomposition.idempotent_rank).unwrap();
    writeln!(text, "strategies: {}", strategies.join(", ")).unwrap();

    let result = json!({
        "input": a.to_string(),
        "exponent": n,
        "idempotent": decomposition.e.to_string(),
        "unit": decomposition.u.to_string(),
        "unit_order": decomposition.unit_order.to_string(),
        "idempotent_rank": decomposition.idempotent_rank,
        "strategies": strategies,
        "checks": {
            "idempotent": idempotent_ok,
            "sum": sum_ok,
            "torsion": torsion_ok,
        },
    });
    let exit = if all_ok { ExitCode::SUCCESS } else { ExitCode::from(1) };
    Ok(Report { text, result, exit })
}

fn nilclean_report(a: &Mat, config: SearchConfig) -> Result<Report, CliError> {
    let decomposition = Decomposer::new(config).nil_clean_decompose(a)?;
    let idempotent_ok = decomposition.e.is_idempotent();
    let sum_ok = decomposition.e.add(&decomposition.nil) == *a;
    let nil_ok = decomposition.nil.nilpotency_index() == Some(decomposition.nil_index);
    let all_ok = idempotent_ok && sum_ok && nil_ok;

    let mut text = format!("input A:\n{a}\n");
    writeln!(text, "idempotent E:\n{}", decomposition.e).unwrap();
    writeln!(text, "nilpotent N = A + E:\n{}", decomposition.nil).unwrap();
    writeln!(text, "checks:").unwrap();
    writeln!(text, "  E^2 = E: {}", if idempotent_ok { "ok" } else { "FAILED" }).unwrap();
    writeln!(text, "  A = E + N: {}", if sum_ok { "ok" } else { "FAILED" }).unwrap();
    writeln!(
        text,
        "  N^{} = O (minimal): {}",
        decomposition.nil_index,
        if nil_ok { "ok" } else { "FAILED" }
    )
    .unwrap();

    let result = json!({
        "input": a.to_string(),
        "idempotent": decomposition.e.to_string(),
        "nilpotent": decomposition.nil.to_string(),
        "nil_index": decomposition.nil_index,
        "checks": {
            "idempotent": idempotent_ok,
            "sum": sum_ok,
            "nilpotency": nil_ok,
        },
    });
    let exit = if all_ok { ExitCode::SUCCESS } else { ExitCode::from(1) };
    Ok(Report { text, result, exit })
}

fn coverage_text(coverage: &Coverage) -> String {
    match coverage {
        Coverage::Exhaustive => "exhaustive".to_owned(),
        Coverage::Sampled { samples } => format!("sampled ({samples} elements)"),
    }
}

/// Prediction cross-check for a triangular certificate: the minimal order
/// must be the next power of two at or above the dimension, and each
/// almost flag with m >= 3 must match the k1 criterion. Returns the
/// mismatch descriptions (empty = all predictions match).
fn certificate_mismatches(cert: &TorsionCertificate) -> Vec<String> {
    let ring = cert.ring;
    if ring != RingSpec::upper_triangular(ring.size) || ring.size < 3 {
        return Vec::new();
    }
    let mut mismatches = Vec::new();
    let predicted = certify::tn_predicted_order(ring.size as u64)
        .expect("triangular predictions exist for size >= 3");
    if cert.m_max >= predicted && cert.minimal_m != Some(predicted) {
        mismatches.push(format!(
            "minimal m: brute force found {:?}, predicted {predicted}",
            cert.minimal_m
        ));
    }
    for (&m, &flag) in cert.almost_flags.range(3..) {
        let predicted_flag = certify::tn_almost_predicate(ring.size as u64, m)
            .expect("size and m are both above 2");
        if flag != predicted_flag {
            mismatches.push(format!(
                "almost flag at m = {m}: brute force {flag}, predicted {predicted_flag}"
            ));
        }
    }
    mismatches
}

fn certify_report(
    ring: RingSpec,
    opts: &CertifyOptions,
    timing: bool,
) -> Result<Report, CliError> {
    let mut cert = certify::torsion_clean_order(ring, opts)?;
    if !timing {
        cert.wall_time_seconds = None;
    }
    let mismatches = certificate_mismatches(&cert);

    let mut text = format!("ring: {ring}\n");
    writeln!(text, "elements: {}", cert.element_count).unwrap();
    writeln!(text, "idempotents: {}", cert.idempotent_count).unwrap();
    writeln!(text, "coverage: {}", coverage_text(&cert.coverage)).unwrap();
    writeln!(text, "   m  almost  torsion-clean").unwrap();
    let mut torsion_clean_flags = serde_json::Map::new();
    for (&m, &flag) in &cert.almost_flags {
        let clean = cert.torsion_clean(m).expect("m is within the certified range");
        writeln!(text, "  {m:>2}  {flag:<6}  {clean}").unwrap();
        torsion_clean_flags.insert(m.to_string(), Value::Bool(clean));
    }
    match cert.minimal_m {
        Some(m) => writeln!(text, "minimal m: {m}").unwrap(),
        None => writeln!(text, "minimal m: none within m_max = {}", cert.m_max).unwrap(),
    }
    if !cert.failing_witness.is_empty() {
        writeln!(text, "first failing elements:").unwrap();
        for (m, witness) in &cert.failing_witness {
            writeln!(text, "  m = {m}: {}", compact(witness)).unwrap();
        }
    }
    if ring == RingSpec::upper_triangular(ring.size) && ring.size >= 3 {
        if mismatches.is_empty() {
            writeln!(text, "predictions: match").unwrap();
        } else {
            for mismatch in &mismatches {
                writeln!(text, "MISMATCH: {mismatch}").unwrap();
            }
        }
    }
    if let Some(seconds) = cert.wall_time_seconds {
        writeln!(text, "wall time: {seconds:.3}s").unwrap();
    }

    let result = json!({
        "certificate": serde_json::to_value(&cert).expect("certificate serializes"),
        "torsion_clean": Value::Object(torsion_clean_flags),
        "mismatches": mismatches,
    });
    let exit = if mismatches.is_empty() { ExitCode::SUCCESS } else { ExitCode::from(1) };
    Ok(Report { text, result, exit })
}

fn certify_single_report(
    ring: RingSpec,
    m: u64,
    opts: &CertifyOptions,
) -> Result<Report, CliError> {
    let verdict: AlmostVerdict = certify::is_almost_m_torsion_clean(ring, m, opts)?;
    let mut mismatch = None;
    if ring == RingSpec::upper_triangular(ring.size) && ring.size >= 3 && m >= 3 {
        let predicted = certify::tn_almost_predicate(ring.size as u64, m)
            .expect("size and m are both above 2");
        if verdict.holds != predicted {
            mismatch = Some(format!(
                "almost flag at m = {m}: brute force {}, predicted {predicted}",
                verdict.holds
            ));
        }
    }

    let mut text = format!("ring: {ring}\n");
    writeln!(text, "coverage: {}", coverage_text(&verdict.coverage)).unwrap();
    match (&verdict.coverage, verdict.holds) {
        (Coverage::Sampled { .. }, true) => {
            writeln!(text, "almost {m}-torsion clean: no counterexample found").unwrap();
        }
        _ => writeln!(text, "almost {m}-torsion clean: {}", verdict.holds).unwrap(),
    }
    if let Some(witness) = &verdict.failing_witness {
        writeln!(text, "failing element:\n{witness}").unwrap();
    }
    if let Some(mismatch) = &mismatch {
        writeln!(text, "MISMATCH: {mismatch}").unwrap();
    }

    let result = json!({
        "ring": serde_json::to_value(ring).expect("ring serializes"),
        "m": m,
        "holds": verdict.holds,
        "coverage": serde_json::to_value(&verdict.coverage).expect("coverage serializes"),
        "failing_witness": verdict.failing_witness.as_ref().map(Mat::to_string),
        "mismatches": mismatch.iter().cloned().collect::<Vec<_>>(),
    });
    let exit = if mismatch.is_none() { ExitCode::SUCCESS } else { ExitCode::from(1) };
    Ok(Report { text, result, exit })
}

fn tn_predict_report(size: u64, m: Option<u64>) -> Result<Report, CliError> {
    let predicted = certify::tn_predicted_order(size)?;
    let mut text =
        format!("predicted minimal torsion order for T_{size}(F_2): {predicted}\n");
    let almost = match m {
        Some(m) => {
            let flag = certify::tn_almost_predicate(size, m)?;
            writeln!(text, "almost {m}-torsion clean predicted: {flag}").unwrap();
            Some(flag)
        }
        None => None,
    };
    let result = json!({
        "size": size,
        "predicted_order": predicted,
        "m": m,
        "almost_predicted": almost,
    });
    Ok(Report::ok(text, result))
}

fn zn_report(n: u64) -> Result<Report, CliError> {
    let (order, weak_order) = torsion_clean::decomp::zn_torsion_profile(n)?;
    let text = format!(
        "Z_{n}: torsion-clean order {order}, weakly torsion-clean order {weak_order}\n"
    );
    let result = json!({ "modulus": n, "order": order, "weak_order": weak_order });
    Ok(Report::ok(text, result))
}
