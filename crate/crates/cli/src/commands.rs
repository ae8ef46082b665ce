use std::fmt;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use opindex::domination::{domination_constant_with, Bound, DominationConfig, DominationError};
use opindex::exact::{fmt_rational, parse_rational, Exponent, ExponentError, ParseRationalError, Rational};
use opindex::families::{
    cb_index_restricted, gasparis_prefix_search, iota_symbolic, member_expr, restrict, validate_prefix, FamilyError,
    FamilyExpr, FinSet, PrefixSearch,
};
use opindex::indices::{np_depth_probe, spreading_model_certificate, IndexError, ProbeConfig};
use opindex::ordinal::{Ordinal, OrdinalError};
use opindex::spaces::{norm_checked, FinVector, MatrixParseError, NormDescriptor, OperatorMatrix, SpaceError};
use opindex::trees::{minimal_tree_member, FiniteTree, TreeError};

pub use opindex::families::DEFAULT_PREFIX_BUDGET;

#[derive(Debug)]
pub struct CliError {
    code: &'static str,
    message: String,
}

impl CliError {
    fn new(code: &'static str, message: impl Into<String>) -> Self {
        CliError { code, message: message.into() }
    }

    fn usage(message: impl Into<String>) -> Self {
        CliError::new("usage", message)
    }

    pub fn code(&self) -> &'static str {
        self.code
    }

    /// Grammar and usage errors exit 2, everything else 1.
    pub fn exit_code(&self) -> u8 {
        match self.code {
            "parse" | "usage" => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

fn ordinal_code(e: &OrdinalError) -> &'static str {
    match e {
        OrdinalError::Parse { .. } => "parse",
        OrdinalError::TooDeep(_) => "budget",
        _ => "domain",
    }
}

fn family_code(e: &FamilyError) -> &'static str {
    match e {
        FamilyError::Parse { .. } | FamilyError::InvalidSet(_) => "parse",
        FamilyError::GroundSetTooLarge { .. } | FamilyError::TooManyMembers(_) | FamilyError::BudgetExhausted(_) => {
            "budget"
        }
        FamilyError::Ordinal(o) => ordinal_code(o),
        FamilyError::Uncountable => "domain",
    }
}

fn space_code(e: &SpaceError) -> &'static str {
    match e {
        SpaceError::Parse(_) => "parse",
        SpaceError::DimensionMismatch { .. } => "dimension",
        SpaceError::DimensionBudget(_) | SpaceError::TooWide { .. } => "budget",
        SpaceError::Ordinal(o) => ordinal_code(o),
        SpaceError::Family(f) => family_code(f),
        _ => "domain",
    }
}

fn domination_code(e: &DominationError) -> &'static str {
    match e {
        DominationError::LengthMismatch(..) | DominationError::BlockOutOfRange(_) => "dimension",
        DominationError::Space(s) => space_code(s),
        _ => "domain",
    }
}

fn index_code(e: &IndexError) -> &'static str {
    match e {
        IndexError::Domination(d) => domination_code(d),
        IndexError::Space(s) => space_code(s),
        IndexError::Family(f) => family_code(f),
        IndexError::ChainTooLong { .. } => "dimension",
        _ => "domain",
    }
}

macro_rules! classified {
    ($($t:ty => $f:expr),* $(,)?) => {
        $(impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                #[allow(clippy::redundant_closure_call)]
                let code = ($f)(&e);
                CliError::new(code, e.to_string())
            }
        })*
    };
}

classified! {
    OrdinalError => ordinal_code,
    TreeError => |e: &TreeError| match e {
        TreeError::BudgetExhausted(_) | TreeError::TooLarge(_) => "budget",
        TreeError::Ordinal(o) => ordinal_code(o),
        _ => "domain",
    },
    FamilyError => family_code,
    SpaceError => space_code,
    DominationError => domination_code,
    IndexError => index_code,
    MatrixParseError => |_: &MatrixParseError| "parse",
    ExponentError => |_: &ExponentError| "parse",
    ParseRationalError => |_: &ParseRationalError| "parse",
}

/// A command result: a headline, aligned detail rows, and the JSON payload.
pub struct Report {
    pub command: &'static str,
    pub success: bool,
    pub inputs: Value,
    pub result: Value,
    headline: String,
    rows: Vec<(String, String)>,
}

impl Report {
    fn new(command: &'static str, inputs: Value, headline: impl Into<String>, result: impl Serialize) -> Self {
        Report {
            command,
            success: true,
            inputs,
            result: serde_json::to_value(result).expect("results serialize"),
            headline: headline.into(),
            rows: Vec::new(),
        }
    }

    fn row(mut self, key: &str, value: impl fmt::Display) -> Self {
        self.rows.push((key.to_string(), value.to_string()));
        self
    }

    pub fn text(&self) -> String {
        let width = self.rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        let mut out = format!("{}\n", self.headline);
        for (k, v) in &self.rows {
            out.push_str(&format!("  {k:<width$}  {v}\n"));
        }
        out
    }
}

fn ordinal(s: &str) -> Result<Ordinal, CliError> {
    Ok(s.parse::<Ordinal>()?)
}

fn rational(s: &str) -> Result<Rational, CliError> {
    Ok(parse_rational(s)?)
}

/// Splits on commas outside parentheses.
fn split_top(s: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let (mut depth, mut start) = (0i32, 0);
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                parts.push(s[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(s[start..].trim());
    parts.into_iter().filter(|p| !p.is_empty()).collect()
}

fn ordinal_list(s: &str) -> Result<Vec<Ordinal>, CliError> {
    let t = s.trim();
    let inner = t.strip_prefix('[').and_then(|r| r.strip_suffix(']')).unwrap_or(t);
    split_top(inner).into_iter().map(ordinal).collect()
}

fn vectors(s: &str) -> Result<Vec<FinVector>, CliError> {
    Ok(OperatorMatrix::parse_entries(s)?.into_iter().map(FinVector).collect())
}

fn show_vectors(vs: &[FinVector]) -> String {
    let parts: Vec<String> = vs.iter().map(|v| v.to_string()).collect();
    format!("[{}]", parts.join(", "))
}

pub fn ord(args: &[String]) -> Result<Report, CliError> {
    let args: Vec<&str> = args.iter().map(String::as_str).collect();
    match args.as_slice() {
        [a] => {
            let x = ordinal(a)?;
            Ok(Report::new("ord", json!({ "expr": a }), x.to_string(), &x)
                .row("finite", x.is_finite())
                .row("limit", x.is_limit()))
        }
        ["fund", a, n] => {
            let x = ordinal(a)?;
            let n: u64 = n.parse().map_err(|_| CliError::new("parse", format!("bad index `{n}`")))?;
            let y = x.fundamental(n)?;
            Ok(Report::new("ord fund", json!({ "expr": a, "n": n }), y.to_string(), &y))
        }
        [a, op @ ("+" | "*"), b] => {
            let (x, y) = (ordinal(a)?, ordinal(b)?);
            let z = if *op == "+" { &x + &y } else { &x * &y };
            Ok(Report::new("ord", json!({ "lhs": x, "op": op, "rhs": y }), z.to_string(), &z)
                .row("lhs", &x)
                .row("rhs", &y))
        }
        _ => Err(CliError::usage("expected `ord <a>`, `ord <a> +|* <b>` or `ord fund <a> <n>`")),
    }
}

pub fn tree_rank(file: &Path) -> Result<Report, CliError> {
    let text = std::fs::read_to_string(file).map_err(|e| CliError::new("io", format!("{}: {e}", file.display())))?;
    let nodes: Vec<Vec<u64>> = serde_json::from_str(&text).map_err(|e| CliError::new("parse", e.to_string()))?;
    let root = nodes.iter().any(Vec::is_empty);
    let tree = FiniteTree::new(nodes.clone(), root)?;
    let rank = tree.rank();
    Ok(Report::new("tree rank", json!({ "file": file, "nodes": nodes }), rank.to_string(), json!({ "rank": rank }))
        .row("nodes", tree.len())
        .row("root included", root))
}

pub fn mt_member(xi: &str, seq: &str) -> Result<Report, CliError> {
    let xi = ordinal(xi)?;
    let s = ordinal_list(seq)?;
    let member = minimal_tree_member(&xi, &s)?;
    Ok(Report::new("tree mt-member", json!({ "xi": xi, "seq": s }), member.to_string(), member))
}

pub fn family_member(expr: &str, set: &str) -> Result<Report, CliError> {
    let f: FamilyExpr = expr.parse()?;
    let e: FinSet = set.parse()?;
    let member = member_expr(&f, &e);
    Ok(Report::new("family member", json!({ "expr": f.to_string(), "set": e }), member.to_string(), member))
}

pub fn family_rank(expr: &str, n: u32) -> Result<Report, CliError> {
    let f: FamilyExpr = expr.parse()?;
    let fam = restrict(&f, n)?;
    let cb = cb_index_restricted(&fam);
    let iota = match iota_symbolic(&f) {
        Ok(o) => Some(o),
        Err(FamilyError::Uncountable) => None,
        Err(e) => return Err(e.into()),
    };
    let iota_text = iota.as_ref().map_or("w1".to_string(), Ordinal::to_string);
    Ok(Report::new(
        "family rank",
        json!({ "expr": f.to_string(), "n": n }),
        cb.to_string(),
        json!({ "cb": cb, "iota": iota, "members": fam.len() }),
    )
    .row("iota", iota_text)
    .row("members", fam.len()))
}

pub fn gasparis(f: &str, g: &str, depth: u32, cap: u32, budget: u64) -> Result<Report, CliError> {
    let (fe, ge): (FamilyExpr, FamilyExpr) = (f.parse()?, g.parse()?);
    let inputs = json!({ "f": fe.to_string(), "g": ge.to_string(), "depth": depth, "cap": cap, "budget": budget });
    let res = gasparis_prefix_search(&fe, &ge, depth, cap, budget)?;
    Ok(match &res {
        PrefixSearch::Found(m) => {
            let valid = validate_prefix(&fe, &ge, m)?;
            let shown = format!("{m:?}");
            Report::new("family gasparis", inputs, format!("found {shown}"), json!({ "search": res, "validated": valid }))
                .row("validated", valid)
        }
        PrefixSearch::NotFound => {
            Report::new("family gasparis", inputs, "not found", json!({ "search": res, "validated": Value::Null }))
        }
    })
}

pub fn norm(descriptor: &str, vector: &str, tolerance: f64) -> Result<Report, CliError> {
    let d: NormDescriptor = descriptor.parse()?;
    let v: FinVector = vector.parse()?;
    let r = norm_checked(&d, &v, tolerance)?;
    let mut rep = Report::new(
        "norm",
        json!({ "descriptor": d, "vector": v, "tolerance": tolerance }),
        r.to_string(),
        &r,
    )
    .row("exact", r.is_exact());
    if !r.is_exact() {
        rep = rep.row("lo", fmt_rational(r.lo())).row("hi", fmt_rational(r.hi()));
    }
    Ok(rep)
}

pub fn dominate(x_space: &str, xs: &str, y_space: &str, ys: &str, cfg: &DominationConfig) -> Result<Report, CliError> {
    let (dx, dy): (NormDescriptor, NormDescriptor) = (x_space.parse()?, y_space.parse()?);
    let (vx, vy) = (vectors(xs)?, vectors(ys)?);
    let rep = domination_constant_with(&vx, &dx, &vy, &dy, cfg)?;
    // Exact constants print as rationals, bounds as 12-digit decimals.
    let show = |b: &Bound| if rep.exact || b.is_infinite() { b.to_string() } else { format!("{:.12}", b.to_f64()) };
    let headline = if rep.exact { show(&rep.upper) } else { format!("[{}, {}]", show(&rep.lower), show(&rep.upper)) };
    let inputs = json!({
        "x_space": dx, "xs": vx, "y_space": dy, "ys": vy,
        "vertex_cap": cfg.vertex_cap, "bits": cfg.bits, "starts": cfg.starts, "seed": cfg.seed,
    });
    let witness: Vec<String> = rep.witness.iter().map(fmt_rational).collect();
    Ok(Report::new("dominate", inputs, headline, &rep)
        .row("method", json!(rep.method).as_str().unwrap_or_default())
        .row("lower", show(&rep.lower))
        .row("upper", show(&rep.upper))
        .row("exact", rep.exact)
        .row("witness", format!("[{}]", witness.join(", "))))
}

pub fn operator(matrix: &str, domain: &str, codomain: Option<&str>) -> Result<OperatorMatrix, CliError> {
    let entries = OperatorMatrix::parse_entries(matrix)?;
    let dom: NormDescriptor = domain.parse()?;
    let cod: NormDescriptor = codomain.unwrap_or(domain).parse()?;
    Ok(OperatorMatrix::new(entries, dom, cod)?)
}

fn operator_inputs(a: &OperatorMatrix, k: &Rational) -> Value {
    let rows: Vec<Vec<String>> = a.entries.iter().map(|r| r.iter().map(fmt_rational).collect()).collect();
    json!({ "matrix": rows, "domain": a.domain, "codomain": a.codomain, "k": fmt_rational(k) })
}

pub fn np_probe(
    a: &OperatorMatrix,
    k: &str,
    p: &str,
    max_depth: usize,
    budget: u64,
    pool: Option<&str>,
    blocks: bool,
) -> Result<Report, CliError> {
    let k = rational(k)?;
    let p: Exponent = p.parse()?;
    let mut cfg = ProbeConfig::new(k.clone(), p.clone(), &a.domain)?;
    cfg.max_depth = max_depth;
    cfg.search_budget = budget;
    cfg.block_closure = blocks;
    if let Some(pool) = pool {
        cfg.pool = vectors(pool)?;
    }
    let rep = np_depth_probe(a, &cfg)?;
    let mut inputs = operator_inputs(a, &k);
    inputs["p"] = json!(p);
    inputs["max_depth"] = json!(max_depth);
    inputs["budget"] = json!(budget);
    inputs["pool"] = json!(cfg.pool);
    inputs["blocks"] = json!(blocks);
    let beyond = rep.impossible_beyond.map_or("-".to_string(), |d| d.to_string());
    let reason = rep.reason.map_or("-".to_string(), |r| json!(r).as_str().unwrap_or_default().to_string());
    Ok(Report::new("index np-probe", inputs, rep.witnessed_depth.to_string(), &rep)
        .row("witness", show_vectors(&rep.witness))
        .row("impossible beyond", beyond)
        .row("reason", reason)
        .row("budget exhausted", rep.budget_exhausted)
        .row("nodes expanded", rep.nodes_expanded))
}

fn verdict_report(
    command: &'static str,
    a: &OperatorMatrix,
    k: &Rational,
    xs: Vec<FinVector>,
    v: opindex::indices::Verdict,
) -> Report {
    let mut inputs = operator_inputs(a, k);
    inputs["xs"] = json!(xs);
    let head = if v.holds() { "holds" } else { "fails" };
    let rep = Report::new(command, inputs, head, &v);
    match &v {
        opindex::indices::Verdict::Holds => rep,
        opindex::indices::Verdict::Fails { condition, witness } => {
            let w: Vec<String> = witness.iter().map(fmt_rational).collect();
            rep.row("condition", json!(condition)).row("witness", format!("[{}]", w.join(", ")))
        }
    }
}

pub fn ss_member(a: &OperatorMatrix, k: &str, xs: &str) -> Result<Report, CliError> {
    let k = rational(k)?;
    let xs = vectors(xs)?;
    let v = opindex::indices::ss_member(a, &k, &xs)?;
    Ok(verdict_report("index ss-member", a, &k, xs, v))
}

pub fn wc_member(a: &OperatorMatrix, k: &str, xs: &str) -> Result<Report, CliError> {
    let k = rational(k)?;
    let xs = vectors(xs)?;
    let v = opindex::indices::wc_member(a, &k, &xs)?;
    Ok(verdict_report("index wc-member", a, &k, xs, v))
}

pub fn sm_cert(space: &str, xs: &str, p: &str, xi: &str, a: &str, b: &str) -> Result<Report, CliError> {
    let d: NormDescriptor = space.parse()?;
    let xs = vectors(xs)?;
    let p: Exponent = p.parse()?;
    let xi = ordinal(xi)?;
    let (a, b) = (rational(a)?, rational(b)?);
    let cert = spreading_model_certificate(&xs, &d, &p, &xi, &a, &b)?;
    let inputs = json!({
        "space": d, "xs": xs, "p": p, "xi": xi, "a": fmt_rational(&a), "b": fmt_rational(&b),
    });
    let head = if cert.passed() { "pass" } else { "fail" };
    let rep = Report::new("index sm-cert", inputs, head, &cert);
    Ok(match &cert {
        opindex::indices::Certificate::Pass { sets_checked } => rep.row("sets checked", sets_checked),
        opindex::indices::Certificate::Fail { set, verdict } => rep.row("set", set).row("verdict", json!(verdict)),
    })
}

pub fn verify(selector: &str) -> Result<Report, CliError> {
    let outcomes = opindex_verify::run(selector).ok_or_else(|| {
        CliError::usage(format!(
            "unknown suite `{selector}`; expected all, a criterion number or one of {}",
            opindex_verify::suite_names().join(", ")
        ))
    })?;
    let passed = outcomes.iter().filter(|o| o.passed()).count();
    let mut rep = Report::new(
        "verify",
        json!({ "suite": selector }),
        format!("{passed}/{} criteria pass", outcomes.len()),
        json!({ "passed": passed, "total": outcomes.len(), "outcomes": outcomes }),
    );
    for o in &outcomes {
        let status = if o.passed() { "PASS" } else { "FAIL" };
        rep = rep.row(&o.id.to_string(), format!("{status}  {} ({} ms)", o.title, o.elapsed_ms));
        for c in o.failed_checks() {
            rep = rep.row("", format!("      failed: {}: {}", c.name, c.detail));
        }
        if !o.within_limit() {
            rep = rep.row("", format!("      failed: over the {} ms limit", o.limit_ms));
        }
    }
    rep.success = passed == outcomes.len();
    Ok(rep)
}
