//! The `swd` command line.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::construct::{decompose, extend, Assignment};
use crate::diagram::Diagram;
use crate::error::{Error, Result};
use crate::gibson::{gibson_decompose, GibsonBasis};
use crate::invariant::check_membership;
use crate::pattern::{build_d, build_f, Basis, Policy};
use crate::ring::RingDescriptor;
use crate::tensor::{Limits, TensorMatrix, SCHEMA};
use crate::verify::{centraliser_dimension, verify_duality, verify_half, VerificationReport};

#[derive(Parser, Debug)]
#[command(name = "swd", version, about = "Invariants of the partition algebra on tensor space")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compare the span of the permutation powers with the centraliser.
    Verify(VerifyArgs),
    /// The half-integer case E(n, r+½).
    VerifyHalf(VerifyArgs),
    /// dim E(n,k) for k ≤ r with the free pattern sizes.
    Dims(DimsArgs),
    /// Print a free pattern.
    FreePattern(PatternArgs),
    /// Split an invariant into special invariants along a block row or column.
    Decompose(ConstructArgs),
    /// Extend an invariant by one degree.
    Extend(ConstructArgs),
    /// The permutation basis of E(n,1), or coordinates of a GDS matrix in it.
    Gibson(GibsonArgs),
    /// List the set-partition diagrams on r + r vertices.
    EnumerateDiagrams(DiagramArgs),
    /// Test a matrix against the defining conditions of E(n,r).
    CheckMembership(MembershipArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Args, Debug)]
struct Common {
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Write the result here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Lift the n^r ≤ 1024 size cap.
    #[arg(long)]
    unsafe_large: bool,
}

impl Common {
    fn limits(&self) -> Limits {
        if self.unsafe_large {
            Limits::unbounded()
        } else {
            Limits::default()
        }
    }
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    r: usize,
    /// Check E(n, r+½) instead of E(n, r).
    #[arg(long)]
    half: bool,
    #[arg(long, default_value = "q")]
    ring: RingDescriptor,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct DimsArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    r: usize,
    #[arg(long, default_value = "q")]
    ring: RingDescriptor,
    #[command(flatten)]
    common: Common,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Kind {
    /// The extension pattern F(n,r).
    F,
    /// The decomposition pattern D(n,r).
    D,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Columns {
    All,
    Used,
}

#[derive(Args, Debug)]
struct PatternArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    r: usize,
    #[arg(long, value_enum, default_value = "f")]
    kind: Kind,
    #[arg(long, default_value = "last-row")]
    basis: String,
    #[arg(long, default_value = "largest")]
    policy: Policy,
    /// Table columns: every index, or only those carrying an entry.
    #[arg(long, value_enum, default_value = "all")]
    columns: Columns,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct ConstructArgs {
    /// Input matrix as JSON.
    #[arg(long = "in")]
    input: PathBuf,
    /// Free values as JSON; all zero when omitted.
    #[arg(long)]
    assignment: Option<PathBuf>,
    /// Use random free values drawn from this seed instead of zeros.
    #[arg(long)]
    seed: Option<u64>,
    /// Reinterpret the input over this ring.
    #[arg(long)]
    ring: Option<RingDescriptor>,
    #[arg(long, default_value = "last-row")]
    basis: String,
    #[arg(long, default_value = "largest")]
    policy: Policy,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct GibsonArgs {
    #[arg(long)]
    n: Option<usize>,
    /// A GDS matrix to decompose.
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct DiagramArgs {
    #[arg(long)]
    r: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct MembershipArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[command(flatten)]
    common: Common,
}

/// What a command produced: JSON, its table rendering, and whether it counts
/// as a verification success.
struct Output {
    json: Value,
    table: String,
    ok: bool,
}

fn read_json(path: &PathBuf) -> Result<Value> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

fn read_matrix(path: &PathBuf, ring: Option<RingDescriptor>) -> Result<TensorMatrix> {
    // Accept the output of `extend` as well as a bare matrix.
    let v = read_json(path)?;
    let m = TensorMatrix::from_json(v.get("matrix").unwrap_or(&v))?;
    match ring {
        Some(r) if r != m.ring() => m.change_ring(r),
        _ => Ok(m),
    }
}

fn report_table(rep: &VerificationReport) -> String {
    let v = serde_json::to_value(rep).unwrap_or_default();
    let mut out = String::new();
    if let Value::Object(map) = v {
        for (k, x) in map {
            let text = match x {
                Value::String(s) => s,
                Value::Null => "-".into(),
                other => other.to_string(),
            };
            out.push_str(&format!("{k}: {text}\n"));
        }
    }
    out
}

fn run_verify(a: &VerifyArgs, half: bool) -> Result<Output> {
    let limits = a.common.limits();
    let rep = if half || a.half { verify_half(a.n, a.r, a.ring, &limits)? } else { verify_duality(a.n, a.r, a.ring, a.seed, &limits)? };
    Ok(Output { json: serde_json::to_value(&rep)?, table: report_table(&rep), ok: rep.passed() })
}

fn run_dims(a: &DimsArgs) -> Result<Output> {
    let limits = a.common.limits();
    let mut rows = Vec::new();
    let mut table = String::from("r  dim  |F|  difference\n");
    let mut ok = true;
    let mut prev: Option<usize> = None;
    for k in 0..=a.r {
        let dim = centraliser_dimension(a.n, k, a.ring, &limits)?;
        let f = if k == 0 { None } else { Some(build_f(a.n, k, Basis::last_row(a.n), Policy::LargestFirst)?.len()) };
        let diff = prev.map(|p| dim - p);
        if let (Some(f), Some(d)) = (f, diff) {
            ok &= f == d;
        }
        let show = |x: Option<usize>| x.map_or("-".to_string(), |v| v.to_string());
        table.push_str(&format!("{k}  {dim}  {}  {}\n", show(f), show(diff)));
        rows.push(json!({"r": k, "dim": dim, "free_pattern": f, "difference": diff}));
        prev = Some(dim);
    }
    let json = json!({"schema": SCHEMA, "n": a.n, "ring": a.ring, "dims": rows, "consistent": ok});
    Ok(Output { json, table, ok })
}

fn run_free_pattern(a: &PatternArgs) -> Result<Output> {
    let basis = Basis::parse(a.n, &a.basis)?;
    let (p, title) = match a.kind {
        Kind::F => (build_f(a.n, a.r, basis, a.policy)?, format!("F({},{})", a.n, a.r)),
        Kind::D => (build_d(a.n, a.r, basis, a.policy)?, format!("D({},{})", a.n, a.r)),
    };
    let table = p.render_table(&title, a.columns == Columns::All);
    let mut json = p.to_json();
    json["size"] = json!(p.len());
    Ok(Output { json, table, ok: true })
}

fn assignment_for(a: &ConstructArgs, pattern: &crate::pattern::FreePattern, ring: RingDescriptor) -> Result<Assignment> {
    if let Some(path) = &a.assignment {
        let f = Assignment::from_json(&read_json(path)?)?;
        if &f.pattern != pattern {
            return Err(Error::InvalidArgument("assignment pattern differs from the requested pattern".into()));
        }
        return Ok(f);
    }
    Ok(match a.seed {
        Some(seed) => Assignment::random(pattern, ring, &mut ChaCha8Rng::seed_from_u64(seed)),
        None => Assignment::zeros(pattern, ring),
    })
}

fn run_extend(a: &ConstructArgs) -> Result<Output> {
    let limits = a.common.limits();
    let b = read_matrix(&a.input, a.ring)?;
    let (n, r) = (b.n(), b.r() + 1);
    let pattern = build_f(n, r, Basis::parse(n, &a.basis)?, a.policy)?;
    let f = assignment_for(a, &pattern, b.ring())?;
    let m = extend(&b, &f, &limits)?;
    let json = json!({"schema": SCHEMA, "matrix": m.to_json(), "assignment": f.to_json()});
    Ok(Output { json, table: m.to_table(), ok: true })
}

fn run_decompose(a: &ConstructArgs) -> Result<Output> {
    let m = read_matrix(&a.input, a.ring)?;
    a.common.limits().check(m.n(), m.r())?;
    let pattern = build_d(m.n(), m.r(), Basis::parse(m.n(), &a.basis)?, a.policy)?;
    let f = assignment_for(a, &pattern, m.ring())?;
    let parts = decompose(&m, &f)?;
    let mut table = String::new();
    let summands: Vec<Value> = parts
        .iter()
        .map(|s| {
            table.push_str(&format!("# E^{}_{}\n{}", s.row_value, s.col_value, s.matrix.to_table()));
            json!({"tag": {"i": s.row_value, "j": s.col_value}, "matrix": s.matrix.to_json()})
        })
        .collect();
    let json = json!({"schema": SCHEMA, "basis": a.basis, "summands": summands, "assignment": f.to_json()});
    Ok(Output { json, table, ok: true })
}

fn run_gibson(a: &GibsonArgs) -> Result<Output> {
    if let Some(path) = &a.input {
        let m = read_matrix(path, None)?;
        let coeffs = gibson_decompose(&m)?;
        let table: String = coeffs.iter().map(|(l, x)| format!("{l}: {x}\n")).collect();
        let map: serde_json::Map<String, Value> = coeffs.into_iter().map(|(l, x)| (l, json!(x.to_string()))).collect();
        return Ok(Output { json: json!({"schema": SCHEMA, "n": m.n(), "coefficients": map}), table, ok: true });
    }
    let n = a.n.ok_or_else(|| Error::InvalidArgument("gibson needs --n or --in".into()))?;
    let basis = GibsonBasis::new(n)?;
    let table: String = basis.elements.iter().map(|e| format!("{} {}\n", e.label, e.permutation)).collect();
    let mut json = serde_json::to_value(&basis)?;
    json["schema"] = json!(SCHEMA);
    json["size"] = json!(basis.len());
    Ok(Output { json, table, ok: true })
}

fn run_diagrams(a: &DiagramArgs) -> Result<Output> {
    if a.r > 6 && !a.common.unsafe_large {
        return Err(Error::SizeCap { size: a.r, cap: 6 });
    }
    let ds: Vec<String> = Diagram::enumerate(a.r).iter().map(|d| d.to_string()).collect();
    let table: String = ds.iter().map(|d| format!("{d}\n")).collect();
    Ok(Output { json: json!({"schema": SCHEMA, "r": a.r, "count": ds.len(), "diagrams": ds}), table, ok: true })
}

fn run_membership(a: &MembershipArgs) -> Result<Output> {
    let m = read_matrix(&a.input, None)?;
    a.common.limits().check(m.n(), m.r())?;
    let rep = check_membership(&m);
    let mut json = serde_json::to_value(&rep)?;
    json["schema"] = json!(SCHEMA);
    let table = format!(
        "in_g: {}\nin_h: {}\nin_s: {}\nin_e: {}\n{}",
        rep.in_g,
        rep.in_h,
        rep.in_s,
        rep.in_e,
        rep.first_violation.as_ref().map_or(String::new(), |v| format!("violation: {} {}\n", v.kind, v.witness.join(" ")))
    );
    Ok(Output { json, table, ok: rep.in_e })
}

fn common_of(c: &Command) -> &Common {
    match c {
        Command::Verify(a) | Command::VerifyHalf(a) => &a.common,
        Command::Dims(a) => &a.common,
        Command::FreePattern(a) => &a.common,
        Command::Decompose(a) | Command::Extend(a) => &a.common,
        Command::Gibson(a) => &a.common,
        Command::EnumerateDiagrams(a) => &a.common,
        Command::CheckMembership(a) => &a.common,
    }
}

fn is_usage_error(e: &Error) -> bool {
    matches!(
        e,
        Error::Parse(_) | Error::InvalidArgument(_) | Error::InvalidModulus(_) | Error::SizeCap { .. } | Error::Io(_) | Error::Json(_)
    )
}

/// Runs the CLI on `args` and returns the process exit code: 0 on success,
/// 1 when a verification fails, 2 on usage errors.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = match &cli.command {
        Command::Verify(a) => run_verify(a, false),
        Command::VerifyHalf(a) => run_verify(a, true),
        Command::Dims(a) => run_dims(a),
        Command::FreePattern(a) => run_free_pattern(a),
        Command::Decompose(a) => run_decompose(a),
        Command::Extend(a) => run_extend(a),
        Command::Gibson(a) => run_gibson(a),
        Command::EnumerateDiagrams(a) => run_diagrams(a),
        Command::CheckMembership(a) => run_membership(a),
    };
    let out = match result {
        Ok(o) => o,
        Err(e) => {
            eprintln!("swd: {e}");
            return if is_usage_error(&e) { 2 } else { 1 };
        }
    };
    let common = common_of(&cli.command);
    let text = match common.format {
        Format::Json => serde_json::to_string_pretty(&out.json).unwrap_or_default() + "\n",
        Format::Table => out.table,
    };
    let written = match &common.out {
        Some(path) => fs::write(path, text),
        None => std::io::stdout().write_all(text.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("swd: {e}");
        return 2;
    }
    if out.ok {
        0
    } else {
        1
    }
}
