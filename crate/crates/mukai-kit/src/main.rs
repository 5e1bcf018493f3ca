//! Command-line front end: one subcommand per library operation, bit-exact
//! JSON I/O, deterministic output.
//!
//! Exit codes: 0 success (or certificate accepted), 1 checked failure (a
//! hypothesis evaluated to false, a certificate was rejected), 2 input error
//! (malformed JSON, out-of-domain parameters).

use clap::{Parser, Subcommand, ValueEnum};
use mukai_kit::certify::{
    plan_certificate_with_cap, verify_certificate, Certificate, CertifyError,
};
use mukai_kit::families::{
    check_hypothesis, FamilyError, FamilyParams, HypothesisParams,
};
use mukai_kit::jsonio::bigint_to_json;
use mukai_kit::lattice::{
    classify, orth_basis, pair, reflect, twist, MukaiVector, NSLattice,
};
use mukai_kit::moduli::{mu_codim_bound, stratum_report};
use mukai_kit::walls::{
    chambers_rank2, default_subclass_box, enumerate_walls, AmpleConeSpec,
};
use num::{BigInt, Zero};
use serde::de::DeserializeOwned;
use serde_json::{json, Value};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Parser)]
#[command(name = "mukai-kit", version, about = "Exact Mukai-lattice toolkit for K3 surfaces")]
struct Cli {
    /// Output format; JSON is the contract, the table view is lossy.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the report to a file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Mukai pairing of two vectors.
    Pair {
        #[arg(long)]
        lattice: String,
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
    },
    /// Twist a vector by a line-bundle class N.
    Twist {
        #[arg(long)]
        lattice: String,
        #[arg(long)]
        vector: String,
        #[arg(long)]
        n: String,
    },
    /// Reflect a vector in a spherical class v1.
    Reflect {
        #[arg(long)]
        lattice: String,
        #[arg(long)]
        vector: String,
        #[arg(long)]
        v1: String,
    },
    /// Primitivity / sphericity / isotropy and the square of a vector.
    Classify {
        #[arg(long)]
        lattice: String,
        #[arg(long)]
        vector: String,
    },
    /// Saturated basis of the orthogonal complement of a vector.
    Orth {
        #[arg(long)]
        lattice: String,
        #[arg(long)]
        vector: String,
    },
    /// Build a model family instance (coprime when --l is 1, general otherwise).
    Family {
        #[arg(long, default_value = "1")]
        l: String,
        #[arg(long)]
        r: String,
        #[arg(long)]
        d: String,
        /// Required when --l > 1.
        #[arg(long)]
        r1: Option<String>,
        #[arg(long)]
        s: String,
    },
    /// Evaluate one numerical hypothesis; exit 1 when it fails.
    Check {
        #[arg(long, value_enum)]
        kind: CheckKind,
        #[arg(long)]
        r: Option<String>,
        #[arg(long)]
        r1: Option<String>,
        #[arg(long)]
        s: Option<String>,
        #[arg(long)]
        l: Option<String>,
        #[arg(long)]
        square: Option<String>,
        #[arg(long)]
        d: Option<String>,
        #[arg(long, default_value_t = false)]
        primitive: bool,
    },
    /// Stratum numerics for (v, spherical v1) at index i, multiplicity m.
    Strata {
        #[arg(long)]
        lattice: String,
        #[arg(long)]
        vector: String,
        #[arg(long)]
        v1: String,
        #[arg(long)]
        i: String,
        #[arg(long, default_value = "0")]
        m: String,
    },
    /// The slope-stability codimension bound; exit 1 when its hypothesis fails.
    MuBound {
        #[arg(long)]
        square: String,
        #[arg(long)]
        l: String,
    },
    /// Enumerate numerical walls for a pure-dimension-1 vector.
    Walls {
        #[arg(long)]
        lattice: String,
        #[arg(long)]
        vector: String,
        #[arg(long)]
        cone: String,
        /// File with a JSON list of NS classes, or "auto" for the
        /// componentwise box between 0 and c1(E).
        #[arg(long, default_value = "auto")]
        subclasses: String,
    },
    /// Walls plus the chamber decomposition of a 2-generator cone.
    Chambers {
        #[arg(long)]
        lattice: String,
        #[arg(long)]
        vector: String,
        #[arg(long)]
        cone: String,
        #[arg(long, default_value = "auto")]
        subclasses: String,
    },
    /// Plan and verify a certificate down to the Hilbert-scheme vector.
    Certify {
        #[arg(long)]
        rank: String,
        #[arg(long, default_value = "1")]
        l: String,
        #[arg(long)]
        square: String,
        #[arg(long, default_value = "0")]
        a_mod_l: String,
        /// Cap on intermediate ranks the search may visit.
        #[arg(long)]
        budget: Option<String>,
    },
    /// Verify an existing certificate file; exit 1 when rejected.
    Verify { certificate: PathBuf },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum CheckKind {
    Lemma1,
    Thm2,
    MuBound,
    RemarkExist,
    KPositive,
}

/// A checked failure carries its report (printed, exit 1); input errors are
/// plain messages (stderr, exit 2).
enum CliError {
    Checked(Value),
    Input(String),
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Input(format!("JSON error at line {}, column {}: {e}", e.line(), e.column()))
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

fn input<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Input(e.to_string())
}

fn parse_bigint(s: &str) -> Result<BigInt, CliError> {
    s.trim()
        .parse::<BigInt>()
        .map_err(|e| CliError::Input(format!("bad integer {s:?}: {e}")))
}

/// `"(a, b, c)"` or `"[a, b, c]"` to an integer list.
fn parse_int_list(s: &str) -> Result<Vec<BigInt>, CliError> {
    let inner = s
        .trim()
        .trim_start_matches(['(', '['])
        .trim_end_matches([')', ']']);
    inner
        .split(',')
        .map(|p| parse_bigint(p))
        .collect()
}

fn load_json<T: DeserializeOwned>(spec: &str) -> Result<T, CliError> {
    let text = if spec.trim_start().starts_with(['{', '[']) {
        spec.to_string()
    } else {
        std::fs::read_to_string(spec)?
    };
    Ok(serde_json::from_str(&text)?)
}

fn parse_lattice(spec: &str) -> Result<NSLattice, CliError> {
    load_json(spec)
}

/// Inline `"(r, xi..., a)"` or a JSON file/literal.
fn parse_vector(spec: &str) -> Result<MukaiVector, CliError> {
    if spec.trim_start().starts_with(['(']) {
        let coords = parse_int_list(spec)?;
        if coords.len() < 2 {
            return Err(CliError::Input("vector needs at least (r, a)".into()));
        }
        Ok(MukaiVector::from_coords(&coords))
    } else {
        load_json(spec)
    }
}

/// Inline `"(c1, ..., ck)"` or a JSON file/literal holding an integer list.
fn parse_ns_class(spec: &str) -> Result<Vec<BigInt>, CliError> {
    if spec.trim_start().starts_with(['(', '[']) {
        parse_int_list(spec)
    } else {
        let vals: Vec<Value> = load_json(spec)?;
        vals.iter()
            .map(|v| mukai_kit::jsonio::json_to_bigint(v).map_err(CliError::Input))
            .collect()
    }
}

fn parse_subclasses(spec: &str, v: &MukaiVector) -> Result<Vec<Vec<BigInt>>, CliError> {
    if spec == "auto" {
        Ok(default_subclass_box(&v.xi))
    } else {
        let vals: Vec<Vec<Value>> = load_json(spec)?;
        vals.iter()
            .map(|row| {
                row.iter()
                    .map(|x| mukai_kit::jsonio::json_to_bigint(x).map_err(CliError::Input))
                    .collect()
            })
            .collect()
    }
}

fn to_value<T: serde::Serialize>(x: &T) -> Result<Value, CliError> {
    Ok(serde_json::to_value(x)?)
}

fn run(cmd: &Cmd) -> Result<Value, CliError> {
    match cmd {
        Cmd::Pair { lattice, x, y } => {
            let lat = parse_lattice(lattice)?;
            let x = parse_vector(x)?;
            let y = parse_vector(y)?;
            let p = pair(&x, &y, &lat).map_err(input)?;
            Ok(json!({ "pair": bigint_to_json(&p) }))
        }
        Cmd::Twist { lattice, vector, n } => {
            let lat = parse_lattice(lattice)?;
            let v = parse_vector(vector)?;
            let n = parse_ns_class(n)?;
            let t = twist(&v, &n, &lat).map_err(input)?;
            to_value(&t)
        }
        Cmd::Reflect {
            lattice,
            vector,
            v1,
        } => {
            let lat = parse_lattice(lattice)?;
            let v = parse_vector(vector)?;
            let v1 = parse_vector(v1)?;
            let r = reflect(&v, &v1, &lat).map_err(input)?;
            to_value(&r)
        }
        Cmd::Classify { lattice, vector } => {
            let lat = parse_lattice(lattice)?;
            let v = parse_vector(vector)?;
            to_value(&classify(&v, &lat).map_err(input)?)
        }
        Cmd::Orth { lattice, vector } => {
            let lat = parse_lattice(lattice)?;
            let v = parse_vector(vector)?;
            to_value(&orth_basis(&v, &lat).map_err(input)?)
        }
        Cmd::Family { l, r, d, r1, s } => {
            let l = parse_bigint(l)?;
            let r = parse_bigint(r)?;
            let d = parse_bigint(d)?;
            let s = parse_bigint(s)?;
            let params = if l == BigInt::from(1) {
                FamilyParams::Coprime { r, d, s }
            } else {
                let r1 = r1
                    .as_ref()
                    .ok_or_else(|| CliError::Input("--r1 is required when --l > 1".into()))?;
                FamilyParams::General {
                    l,
                    r,
                    d,
                    r1: parse_bigint(r1)?,
                    s,
                }
            };
            match params.build() {
                Ok(inst) => to_value(&inst),
                Err(e @ FamilyError::NonPositiveK(_)) => {
                    Err(CliError::Checked(json!({ "error": e.to_string() })))
                }
                Err(e) => Err(input(e)),
            }
        }
        Cmd::Check {
            kind,
            r,
            r1,
            s,
            l,
            square,
            d,
            primitive,
        } => {
            let need = |opt: &Option<String>, name: &str| -> Result<BigInt, CliError> {
                opt.as_deref()
                    .ok_or_else(|| CliError::Input(format!("--{name} is required for this kind")))
                    .and_then(parse_bigint)
            };
            let params = match kind {
                CheckKind::Lemma1 => HypothesisParams::Lemma1 {
                    r: need(r, "r")?,
                    r1: need(r1, "r1")?,
                    s: need(s, "s")?,
                },
                CheckKind::Thm2 => HypothesisParams::Thm2 {
                    l: need(l, "l")?,
                    r: need(r, "r")?,
                    square: need(square, "square")?,
                },
                CheckKind::MuBound => HypothesisParams::MuBound {
                    l: need(l, "l")?,
                    square: need(square, "square")?,
                },
                CheckKind::RemarkExist => HypothesisParams::RemarkExist {
                    l: need(l, "l")?,
                    square: need(square, "square")?,
                    primitive: *primitive,
                },
                CheckKind::KPositive => {
                    let lv = match l {
                        Some(x) => parse_bigint(x)?,
                        None => BigInt::from(1),
                    };
                    let family = if lv == BigInt::from(1) {
                        FamilyParams::Coprime {
                            r: need(r, "r")?,
                            d: need(d, "d")?,
                            s: need(s, "s")?,
                        }
                    } else {
                        FamilyParams::General {
                            l: lv,
                            r: need(r, "r")?,
                            d: need(d, "d")?,
                            r1: need(r1, "r1")?,
                            s: need(s, "s")?,
                        }
                    };
                    HypothesisParams::KPositive { family }
                }
            };
            let report = check_hypothesis(&params).map_err(input)?;
            let value = to_value(&report)?;
            if report.passed {
                Ok(value)
            } else {
                Err(CliError::Checked(value))
            }
        }
        Cmd::Strata {
            lattice,
            vector,
            v1,
            i,
            m,
        } => {
            let lat = parse_lattice(lattice)?;
            let v = parse_vector(vector)?;
            let v1 = parse_vector(v1)?;
            let i = parse_bigint(i)?;
            let m = parse_bigint(m)?;
            to_value(&stratum_report(&v, &v1, &i, &m, &lat).map_err(input)?)
        }
        Cmd::MuBound { square, l } => {
            let report =
                mu_codim_bound(&parse_bigint(square)?, &parse_bigint(l)?).map_err(input)?;
            let value = to_value(&report)?;
            if report.hypothesis_ok {
                Ok(value)
            } else {
                Err(CliError::Checked(value))
            }
        }
        Cmd::Walls {
            lattice,
            vector,
            cone,
            subclasses,
        } => {
            let lat = parse_lattice(lattice)?;
            let v = parse_vector(vector)?;
            let cone: AmpleConeSpec = load_json(cone)?;
            let subs = parse_subclasses(subclasses, &v)?;
            let walls = enumerate_walls(&v, &lat, &cone, &subs).map_err(input)?;
            Ok(json!({ "walls": serde_json::to_value(&walls)? }))
        }
        Cmd::Chambers {
            lattice,
            vector,
            cone,
            subclasses,
        } => {
            let lat = parse_lattice(lattice)?;
            let v = parse_vector(vector)?;
            let cone: AmpleConeSpec = load_json(cone)?;
            let subs = parse_subclasses(subclasses, &v)?;
            let walls = enumerate_walls(&v, &lat, &cone, &subs).map_err(input)?;
            let chambers = chambers_rank2(&walls, &cone, &lat).map_err(input)?;
            Ok(json!({
                "walls": serde_json::to_value(&walls)?,
                "chambers": serde_json::to_value(&chambers)?,
            }))
        }
        Cmd::Certify {
            rank,
            l,
            square,
            a_mod_l,
            budget,
        } => {
            let rank = parse_bigint(rank)?;
            let l = parse_bigint(l)?;
            let square = parse_bigint(square)?;
            let a_mod_l = parse_bigint(a_mod_l)?;
            let cap = budget.as_deref().map(parse_bigint).transpose()?;
            // --rank is the full rank l*r; the planner takes r = rank / l
            let r = {
                use num::Integer;
                let (q, rem) = rank.div_rem(&l);
                if !rem.is_zero() {
                    return Err(CliError::Input(format!(
                        "rank {rank} is not divisible by l = {l}"
                    )));
                }
                q
            };
            match plan_certificate_with_cap(&r, &l, &square, &a_mod_l, cap.as_ref()) {
                Ok(cert) => to_value(&cert),
                Err(
                    e @ (CertifyError::HypothesisFailed(_) | CertifyError::NoCertificateFound),
                ) => Err(CliError::Checked(json!({ "error": e.to_string() }))),
                Err(e) => Err(input(e)),
            }
        }
        Cmd::Verify { certificate } => {
            let text = std::fs::read_to_string(certificate)?;
            let cert: Certificate = serde_json::from_str(&text)?;
            let report = verify_certificate(&cert);
            let value = to_value(&report)?;
            if report.accepted {
                Ok(value)
            } else {
                Err(CliError::Checked(value))
            }
        }
    }
}

/// Lossy human-oriented rendering: one `path = value` line per leaf.
fn render_table(v: &Value, path: &str, out: &mut String) {
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                let sub = if path.is_empty() {
                    k.clone()
                } else {
                    format!("{path}.{k}")
                };
                render_table(x, &sub, out);
            }
        }
        Value::Array(items) => {
            for (i, x) in items.iter().enumerate() {
                render_table(x, &format!("{path}[{i}]"), out);
            }
            if items.is_empty() {
                out.push_str(&format!("{path} = []\n"));
            }
        }
        other => {
            out.push_str(&format!("{path} = {other}\n"));
        }
    }
}

fn emit(value: &Value, format: Format, out: &Option<PathBuf>) -> Result<(), CliError> {
    let text = match format {
        Format::Json => format!("{}\n", serde_json::to_string_pretty(value)?),
        Format::Table => {
            let mut s = String::new();
            render_table(value, "", &mut s);
            s
        }
    };
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("MUKAI_KIT_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    let cli = Cli::parse();
    match run(&cli.cmd) {
        Ok(value) => {
            if emit(&value, cli.format, &cli.out).is_err() {
                return ExitCode::from(2);
            }
            ExitCode::SUCCESS
        }
        Err(CliError::Checked(value)) => {
            let _ = emit(&value, cli.format, &cli.out);
            ExitCode::from(1)
        }
        Err(CliError::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
