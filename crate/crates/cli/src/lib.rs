//! The `tdw` command line.

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};
use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;
use tdw_core::brillnoether::DEFAULT_LATTICE;
use tdw_core::dsl::{self, ComplexDocument};
use tdw_core::rational::format_rational;
use tdw_core::*;

#[derive(Parser, Debug)]
#[command(name = "tdw", version, about = "Divisors on metric graphs and metrized complexes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// A `.tdc` file.
    file: PathBuf,
    /// Name of a divisor block; repeat for commands taking two.
    #[arg(long = "divisor")]
    divisors: Vec<String>,
    /// Base point, written as in a divisor block.
    #[arg(long)]
    base: Option<String>,
    #[arg(long = "r")]
    r: Option<i64>,
    #[arg(long = "d")]
    d: Option<i64>,
    /// Lattice refinement for Brill–Noether searches.
    #[arg(long)]
    refine: Option<i64>,
    /// Emit a JSON report.
    #[arg(long)]
    json: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum CheckKind {
    Rr,
    Clifford,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Rank of a divisor, with a certificate.
    Rank(Common),
    /// The divisor reduced at `--base`.
    Reduce(Common),
    /// Whether two divisors are linearly equivalent.
    Equiv(Common),
    /// Whether an effective divisor is the only one in its class.
    Rigid(Common),
    /// The canonical divisor.
    Canonical(Common),
    /// Hyperelliptic structure check.
    Hyperelliptic(Common),
    /// Degree-2 rank-1 class from a class of degree 2r and rank r.
    Witness(Common),
    /// Decomposition `D ~ r·g12 + residual`.
    Decompose(Common),
    /// Brill–Noether rank for `--d` and `--r`.
    Bn(Common),
    /// Riemann–Roch or Clifford check for a divisor.
    Check {
        kind: CheckKind,
        #[command(flatten)]
        common: Common,
    },
}

/// Result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

enum Failure {
    Usage(String),
    Math(String),
}

impl From<ReductionError> for Failure {
    fn from(e: ReductionError) -> Self {
        match e {
            ReductionError::Model(m) => Failure::Usage(m.to_string()),
            other => Failure::Math(other.to_string()),
        }
    }
}

impl From<HyperellipticError> for Failure {
    fn from(e: HyperellipticError) -> Self {
        match e {
            HyperellipticError::Reduction(r) => r.into(),
            other => Failure::Math(other.to_string()),
        }
    }
}

impl From<BnError> for Failure {
    fn from(e: BnError) -> Self {
        match e {
            BnError::Reduction(r) => r.into(),
            BnError::Hyperelliptic(h) => h.into(),
            BnError::NotAGraph | BnError::Range(_) => Failure::Usage(e.to_string()),
        }
    }
}

struct Report {
    result: Value,
    certificate: Value,
    text: String,
    passed: bool,
}

impl Report {
    fn ok(result: Value, certificate: Value, text: String) -> Self {
        Report {
            result,
            certificate,
            text,
            passed: true,
        }
    }
}

struct Ctx {
    doc: ComplexDocument,
    common: Common,
}

impl Ctx {
    fn cx(&self) -> &MetrizedComplex {
        &self.doc.complex
    }

    fn divisor(&self, i: usize) -> Result<Divisor, Failure> {
        let name = self
            .common
            .divisors
            .get(i)
            .ok_or_else(|| Failure::Usage(format!("missing --divisor (need {})", i + 1)))?;
        self.doc
            .divisor(name)
            .cloned()
            .ok_or_else(|| Failure::Usage(format!("no divisor named `{name}`")))
    }

    fn int(&self, value: Option<i64>, flag: &str) -> Result<i64, Failure> {
        value.ok_or_else(|| Failure::Usage(format!("missing --{flag}")))
    }

    fn point(&self, p: &Point) -> Value {
        Value::String(self.cx().format_point(p))
    }

    fn div(&self, d: &Divisor) -> Value {
        let mut m = Map::new();
        for (p, c) in d.iter() {
            m.insert(self.cx().format_point(p), json!(c));
        }
        Value::Object(m)
    }

    fn points(&self, ps: &[Point]) -> Value {
        Value::Array(ps.iter().map(|p| self.point(p)).collect())
    }

    fn fmt(&self, d: &Divisor) -> String {
        self.cx().format_divisor(d)
    }
}

fn rank_cmd(c: &Ctx) -> Result<Report, Failure> {
    let d = c.divisor(0)?;
    let engine = RankEngine::new(c.cx());
    let cert = engine.rank(&d)?;
    Ok(Report::ok(
        json!({ "rank": cert.rank, "degree": d.degree() }),
        json!({
            "rank_determining_set": c.points(engine.rds()),
            "failing_points": c.points(&cert.failing_points),
            "representatives": cert.representatives.iter().map(|r| c.div(r)).collect::<Vec<_>>(),
            "obstruction": c.div(&cert.obstruction),
        }),
        format!("rank {}", cert.rank),
    ))
}

fn reduce_cmd(c: &Ctx) -> Result<Report, Failure> {
    let d = c.divisor(0)?;
    let base = match &c.common.base {
        Some(text) => c.doc.location(text).map_err(|e| Failure::Usage(format!("--base: {e}")))?,
        None => Point::Vertex(VertexId(0)),
    };
    let reduced = reduce_at(c.cx(), &d, &base)?;
    let burn = dhar_burn(c.cx(), &reduced, &base)?;
    Ok(Report::ok(
        json!({ "reduced": c.div(&reduced), "base": c.point(&base) }),
        json!({ "burns_everything": burn.is_reduced(), "burnt_points": c.points(&burn.burnt_points) }),
        c.fmt(&reduced),
    ))
}

fn equiv_cmd(c: &Ctx) -> Result<Report, Failure> {
    let (a, b) = (c.divisor(0)?, c.divisor(1)?);
    let eq = is_equivalent(c.cx(), &a, &b)?;
    let base = Point::Vertex(VertexId(0));
    Ok(Report::ok(
        json!({ "equivalent": eq }),
        json!({
            "reduced": [c.div(&reduce_at(c.cx(), &a, &base)?), c.div(&reduce_at(c.cx(), &b, &base)?)],
        }),
        (if eq { "equivalent" } else { "not equivalent" }).to_string(),
    ))
}

fn rigid_cmd(c: &Ctx) -> Result<Report, Failure> {
    let d = c.divisor(0)?;
    let rigid = is_rigid(c.cx(), &d)?;
    Ok(Report::ok(
        json!({ "rigid": rigid }),
        Value::Null,
        (if rigid { "rigid" } else { "not rigid" }).to_string(),
    ))
}

fn canonical_cmd(c: &Ctx) -> Result<Report, Failure> {
    let k = c.cx().canonical_divisor();
    let r = RankEngine::new(c.cx()).rank_value(&k)?;
    let g = c.cx().genus() as i64;
    Ok(Report {
        result: json!({ "canonical": c.div(&k), "degree": k.degree(), "genus": g }),
        certificate: json!({ "rank": r }),
        text: c.fmt(&k),
        passed: r == g - 1,
    })
}

fn hyperelliptic_cmd(c: &Ctx) -> Result<Report, Failure> {
    let report = structure_check(c.cx())?;
    let cx = c.cx();
    let involution = report.involution.as_ref().map(|inv| {
        let vertices: Map<String, Value> = cx
            .vertex_ids()
            .map(|v| (cx.vertex(v).name.clone(), c.point(&inv.apply(cx, &Point::Vertex(v)))))
            .collect();
        let sums: Map<String, Value> = cx
            .genus_one_vertices()
            .filter_map(|v| inv.component_sum(v).map(|s| (cx.vertex(v).name.clone(), json!(format_rational(&s)))))
            .collect();
        json!({
            "vertices": vertices,
            "fixed_midpoints": c.points(&inv.fixed_midpoints(cx)),
            "component_sums": sums,
        })
    });
    Ok(Report {
        result: json!({
            "hyperelliptic": report.passed,
            "g12": report.g12.as_ref().map(|d| c.div(d)),
        }),
        certificate: json!({ "involution": involution, "notes": report.notes }),
        text: match &report.g12 {
            Some(d) if report.passed => format!("hyperelliptic, g12 = [{}]", c.fmt(d)),
            _ if report.passed => "hyperelliptic".into(),
            _ => "not hyperelliptic".into(),
        },
        passed: report.passed,
    })
}

fn witness_cmd(c: &Ctx) -> Result<Report, Failure> {
    let d = c.divisor(0)?;
    let r = c.int(c.common.r, "r")?;
    let w = clifford_witness(c.cx(), &d, r, c.common.seed)?;
    let pairs: Vec<Value> = w.pairs.iter().map(|(p, q)| json!([c.point(p), c.point(q)])).collect();
    Ok(Report::ok(
        json!({ "class": c.div(&w.representative), "degree": 2, "rank": 1 }),
        json!({
            "P": c.div(&w.context.p),
            "Q": c.div(&w.context.q),
            "pairs": pairs,
            "rank_determining_set": c.points(&w.rds),
        }),
        format!("[{}]", c.fmt(&w.representative)),
    ))
}

fn decompose_cmd(c: &Ctx) -> Result<Report, Failure> {
    let d = c.divisor(0)?;
    let dec = decompose(c.cx(), &d)?;
    Ok(Report::ok(
        json!({ "rank": dec.rank, "residual": c.div(&dec.residual) }),
        json!({ "fixed_point": c.point(&dec.fixed_point), "reduced": c.div(&dec.reduced) }),
        format!("{}·g12 + {}", dec.rank, c.fmt(&dec.residual)),
    ))
}

fn bn_cmd(c: &Ctx) -> Result<Report, Failure> {
    let d = c.int(c.common.d, "d")?;
    let r = c.int(c.common.r, "r")?;
    let ell = c.common.refine.unwrap_or(DEFAULT_LATTICE);
    let res = bn_rank(c.cx(), d, r, ell)?;
    Ok(Report::ok(
        json!({ "rho": res.rho, "exact": res.exact, "refine": res.ell }),
        json!({ "failing": res.failing.iter().map(|f| c.div(f)).collect::<Vec<_>>() }),
        format!("rho {} ({})", res.rho, if res.exact { "exact" } else { "lattice estimate" }),
    ))
}

fn check_cmd(c: &Ctx, kind: CheckKind) -> Result<Report, Failure> {
    let d = c.divisor(0)?;
    match kind {
        CheckKind::Rr => {
            let rr = verify_riemann_roch(c.cx(), &d)?;
            Ok(Report {
                result: json!({ "check": "rr", "pass": rr.holds }),
                certificate: json!({
                    "rank": rr.rank, "dual_rank": rr.dual_rank, "degree": rr.degree, "genus": rr.genus,
                }),
                text: format!(
                    "{}: r(D) - r(K-D) = {} - {} = {} - {} + 1",
                    if rr.holds { "pass" } else { "FAIL" },
                    rr.rank,
                    rr.dual_rank,
                    rr.degree,
                    rr.genus
                ),
                passed: rr.holds,
            })
        }
        CheckKind::Clifford => {
            let cl = verify_clifford(c.cx(), &d)?;
            Ok(Report {
                result: json!({ "check": "clifford", "pass": cl.holds }),
                certificate: json!({ "rank": cl.rank, "degree": cl.degree, "special": cl.special }),
                text: format!(
                    "{}: degree {}, rank {}, {}",
                    if cl.holds { "pass" } else { "FAIL" },
                    cl.degree,
                    cl.rank,
                    if cl.special { "special" } else { "non-special" }
                ),
                passed: cl.holds,
            })
        }
    }
}

fn name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Rank(_) => "rank",
        Command::Reduce(_) => "reduce",
        Command::Equiv(_) => "equiv",
        Command::Rigid(_) => "rigid",
        Command::Canonical(_) => "canonical",
        Command::Hyperelliptic(_) => "hyperelliptic",
        Command::Witness(_) => "witness",
        Command::Decompose(_) => "decompose",
        Command::Bn(_) => "bn",
        Command::Check { .. } => "check",
    }
}

fn inputs(common: &Common, cmd: &Command) -> Value {
    let mut m = Map::new();
    m.insert("file".into(), json!(common.file.display().to_string()));
    m.insert("divisors".into(), json!(common.divisors));
    if let Command::Check { kind, .. } = cmd {
        m.insert("check".into(), json!(format!("{kind:?}").to_lowercase()));
    }
    for (k, v) in [("r", common.r), ("d", common.d), ("refine", common.refine)] {
        if let Some(v) = v {
            m.insert(k.into(), json!(v));
        }
    }
    if let Some(b) = &common.base {
        m.insert("base".into(), json!(b));
    }
    m.insert("seed".into(), json!(common.seed));
    Value::Object(m)
}

/// Runs one command line (including the program name).
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome { code, stdout: String::new(), stderr: text }
            };
        }
    };
    let start = Instant::now();
    let command = name(&cli.command);
    let (common, kind) = match &cli.command {
        Command::Check { kind, common } => (common.clone(), Some(*kind)),
        Command::Rank(c)
        | Command::Reduce(c)
        | Command::Equiv(c)
        | Command::Rigid(c)
        | Command::Canonical(c)
        | Command::Hyperelliptic(c)
        | Command::Witness(c)
        | Command::Decompose(c)
        | Command::Bn(c) => (c.clone(), None),
    };
    let usage = |msg: String| Outcome {
        code: 2,
        stdout: String::new(),
        stderr: format!("error: {msg}\n"),
    };
    let text = match std::fs::read_to_string(&common.file) {
        Ok(t) => t,
        Err(e) => return usage(format!("{}: {e}", common.file.display())),
    };
    let (doc, warnings) = match dsl::parse_with_warnings(&text) {
        Ok(x) => x,
        Err(e) => return usage(format!("{}:{e}", common.file.display())),
    };
    let mut stderr: String = warnings
        .iter()
        .map(|w| format!("{}:{w}\n", common.file.display()))
        .collect();
    let ctx = Ctx { doc, common: common.clone() };
    let report = match &cli.command {
        Command::Rank(_) => rank_cmd(&ctx),
        Command::Reduce(_) => reduce_cmd(&ctx),
        Command::Equiv(_) => equiv_cmd(&ctx),
        Command::Rigid(_) => rigid_cmd(&ctx),
        Command::Canonical(_) => canonical_cmd(&ctx),
        Command::Hyperelliptic(_) => hyperelliptic_cmd(&ctx),
        Command::Witness(_) => witness_cmd(&ctx),
        Command::Decompose(_) => decompose_cmd(&ctx),
        Command::Bn(_) => bn_cmd(&ctx),
        Command::Check { .. } => check_cmd(&ctx, kind.expect("check kind")),
    };
    let report = match report {
        Ok(r) => r,
        Err(Failure::Usage(msg)) => {
            stderr.push_str(&format!("error: {msg}\n"));
            return Outcome { code: 2, stdout: String::new(), stderr };
        }
        Err(Failure::Math(msg)) => {
            stderr.push_str(&format!("error: {msg}\n"));
            let stdout = if common.json {
                let v = json!({
                    "command": command,
                    "inputs": inputs(&common, &cli.command),
                    "result": Value::Null,
                    "certificate": Value::Null,
                    "error": msg,
                    "timings": { "total_ms": start.elapsed().as_secs_f64() * 1000.0 },
                });
                format!("{}\n", serde_json::to_string_pretty(&v).expect("serializable"))
            } else {
                String::new()
            };
            return Outcome { code: 1, stdout, stderr };
        }
    };
    let stdout = if common.json {
        let v = json!({
            "command": command,
            "inputs": inputs(&common, &cli.command),
            "result": report.result,
            "certificate": report.certificate,
            "timings": { "total_ms": start.elapsed().as_secs_f64() * 1000.0 },
        });
        format!("{}\n", serde_json::to_string_pretty(&v).expect("serializable"))
    } else {
        format!("{}\n", report.text)
    };
    Outcome {
        code: if report.passed { 0 } else { 1 },
        stdout,
        stderr,
    }
}

/// Sizes the global thread pool from `TDW_THREADS`, if set.
pub fn configure_threads() {
    if let Some(n) = std::env::var("TDW_THREADS").ok().and_then(|s| s.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}
