use std::collections::BTreeMap;

use irga_core::io::{format_matrix, parse_inline_vector, parse_matrix, parse_number, rationals_to_f64};
use irga_core::irga::{check_conjecture, search_counterexample, CounterexampleSearch};
use irga_core::majorization::{
    birkhoff, check_doubly_stochastic, majorizes, shannon_entropy, transfer_chain,
};
use irga_core::matrix::Numeric;
use irga_core::parse::{parse_expr, parse_polynomial, ParsedExpr};
use irga_core::search::{run, Direction, SearchConfig};
use irga_core::sos::{
    builtin, cholesky_variables, entry_polynomial, identity_test, verify_certificate, IdentityTestConfig,
    SoSCertificate,
};
use irga_core::spdd::{
    assemble_gpdd, block_plan, kron_spdd, make_gauge, make_spdd, verify_majorization_theorem, verify_mapping, Gauge,
    GaugeMode, SpddMatrix,
};
use irga_core::{DenseMatrix, Error, Polynomial, QuadExt3, Rational, VariableSet};
use serde_json::{json, Value};

use crate::report::{Failure, Outcome, RunReport};
use crate::*;

type Res = Result<RunReport, Failure>;

fn read_file(path: &str) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("cannot read {path}: {e}")))
}

fn write_file(path: &str, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::usage(format!("cannot write {path}: {e}")))
}

fn load_matrix(path: &str) -> Result<DenseMatrix<Rational>, Failure> {
    parse_matrix(&read_file(path)?).map_err(|e| match e {
        Error::Parse(d) => Failure { code: 3, message: format!("{path}:{d}") },
        other => other.into(),
    })
}

fn vector(text: &str) -> Result<Vec<Rational>, Failure> {
    Ok(parse_inline_vector(text)?)
}

fn convert<T: Numeric>(v: &[Rational]) -> Vec<T> {
    v.iter().map(T::from_rational).collect()
}

/// 1-based `i,j` to 0-based indices.
fn entry(text: &str) -> Result<(usize, usize), Failure> {
    let bad = || Failure::usage(format!("entry must look like 'i,j' with 1-based indices, got '{text}'"));
    let (i, j) = text.split_once(',').ok_or_else(bad)?;
    let i: usize = i.trim().parse().map_err(|_| bad())?;
    let j: usize = j.trim().parse().map_err(|_| bad())?;
    if i == 0 || j == 0 {
        return Err(bad());
    }
    Ok((i - 1, j - 1))
}

fn builtin_name(source: &str) -> Option<&str> {
    source.strip_prefix("builtin:")
}

fn variable_set(vars: &Option<String>) -> Result<Option<VariableSet>, Failure> {
    vars.as_deref().map(|v| VariableSet::new(v.chars()).map_err(Failure::from)).transpose()
}

fn load_expr(source: &str, expr: &Option<String>, vars: &Option<String>) -> Result<ParsedExpr, Failure> {
    if let Some(name) = builtin_name(source) {
        return Ok(builtin::expression(name)?);
    }
    let text = match (source, expr) {
        ("-", Some(e)) => e.clone(),
        ("-", None) => return Err(Failure::usage("source '-' needs --expr")),
        (path, _) => read_file(path)?,
    };
    Ok(parse_expr(&text, variable_set(vars)?.as_ref()).map_err(Error::from)?)
}

fn load_certificate(source: &str) -> Result<SoSCertificate, Failure> {
    match builtin_name(source) {
        Some(name) => Ok(builtin::certificate(name)?),
        None => Ok(SoSCertificate::from_json(&read_file(source)?)?),
    }
}

fn poly_summary<C: irga_core::Coefficient>(p: &Polynomial<C>) -> Value {
    json!({
        "variables": p.variables().to_string(),
        "terms": p.num_terms(),
        "degree": p.degree(),
        "polynomial": p.render(),
    })
}

pub fn irga_check(a: &IrgaCheck) -> Res {
    let p = load_matrix(&a.matrix)?;
    let report = match a.mode {
        ModeArg::Float => check_conjecture(&DenseMatrix::<f64>::from_rationals(&p), a.tol)?,
        ModeArg::Exact => check_conjecture(&p, a.tol)?,
    };
    let summary = format!(
        "IRGA of {n}x{n} matrix ({mode:?}): doubly stochastic {ds}, min entry {min:.6e} at {at:?}, row/col sum dev {r:.1e}/{c:.1e}",
        n = report.n,
        mode = report.mode,
        ds = report.doubly_stochastic,
        min = report.min_entry,
        at = (report.min_entry_at.0 + 1, report.min_entry_at.1 + 1),
        r = report.max_row_sum_dev,
        c = report.max_col_sum_dev,
    );
    Ok(RunReport::new("irga check", a, Outcome::check(report.doubly_stochastic), json!(report), summary))
}

pub fn irga_search(a: &CounterexampleArgs) -> Res {
    let cfg = CounterexampleSearch {
        n: a.n,
        trials: a.trials,
        seed: a.seed,
        range: a.range,
        tol: a.tol,
        refine_evals: a.refine_evals,
        ..CounterexampleSearch::default()
    };
    let out = search_counterexample(&cfg)?;
    let (outcome, summary) = match &out.counterexample {
        Some(c) => (
            Outcome::Found,
            format!(
                "n={}: certified negative IRGA entry {:.6e} at trial {}; {} of {} trials certified (rate {:.4})",
                a.n, c.report.min_entry, c.trial, out.certified_hits, out.trials_evaluated, out.hit_rate
            ),
        ),
        None => (Outcome::NotFound, format!("n={}: no counterexample in {} trials", a.n, out.trials_evaluated)),
    };
    Ok(RunReport::new("irga search-counterexample", a, outcome, json!(out), summary))
}

pub fn sos_derive(a: &DeriveArgs) -> Res {
    let (i, j) = entry(&a.entry)?;
    let p = entry_polynomial(a.n, i, j)?;
    if let Some(path) = &a.write {
        write_file(path, &format!("{}\n", p.render()))?;
    }
    let summary = format!("n={} entry ({},{}): {} terms, degree {}", a.n, i + 1, j + 1, p.num_terms(), p.degree());
    Ok(RunReport::new("sos derive", a, Outcome::Pass, poly_summary(&p), summary))
}

fn load_target(source: &str, vars: &VariableSet) -> Result<Polynomial<Rational>, Failure> {
    if let Some(name) = builtin_name(source) {
        return Ok(builtin::polynomial(name)?);
    }
    if let Some(spec) = source.strip_prefix("entry:") {
        let parts: Vec<&str> = spec.split(',').collect();
        let bad = || Failure::usage(format!("expected entry:n,i,j, got '{source}'"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let n: usize = parts[0].trim().parse().map_err(|_| bad())?;
        let (i, j) = entry(&format!("{},{}", parts[1], parts[2]))?;
        return Ok(entry_polynomial(n, i, j)?);
    }
    Ok(parse_polynomial(&read_file(source)?, Some(vars))?)
}

pub fn sos_verify(a: &VerifyArgs) -> Res {
    let cert = load_certificate(&a.cert)?;
    let target = load_target(&a.target, &cert.variables)?;
    let check = verify_certificate(&cert, &target)?;
    let summary = if check.holds {
        format!("certificate with {} terms expands to the target ({} monomials)", check.terms, check.target_terms)
    } else {
        format!(
            "certificate differs from the target in {} monomials, first: {}",
            check.difference.len(),
            check.difference.first().map(String::as_str).unwrap_or("")
        )
    };
    Ok(RunReport::new("sos verify", a, Outcome::check(check.holds), json!(check), summary))
}

pub fn sos_identity(a: &IdentityArgs) -> Res {
    let (expr, n) = match builtin_name(&a.poly) {
        Some(name) => {
            let (_, n) = builtin::polynomial_source(name)
                .ok_or_else(|| Failure::usage(format!("no builtin polynomial named '{name}'")))?;
            (builtin::expression(name)?, n)
        }
        None => {
            let n = a.n.ok_or_else(|| Failure::usage("--n is required for polynomial files"))?;
            let vars = cholesky_variables(n)?;
            (parse_expr(&read_file(&a.poly)?, Some(&vars)).map_err(Error::from)?, n)
        }
    };
    let (i, j) = entry(&a.entry)?;
    let cfg = IdentityTestConfig {
        n,
        i,
        j,
        trials: a.trials,
        seed: a.seed,
        range: a.range,
        max_denominator: a.max_denominator,
    };
    let report = identity_test(&expr, &cfg)?;
    let mut summary = format!("{}/{} random points agree with the exact entry oracle", report.agreements, report.trials);
    if let Some(d) = &report.first_disagreement {
        summary.push_str(&format!(
            "; first disagreement at trial {}: transcription gives {}, oracle {} (check the transcription and the variable mapping)",
            d.trial, d.reference, d.oracle
        ));
    }
    Ok(RunReport::new("sos identity-test", a, Outcome::check(report.all_agree()), json!(report), summary))
}

pub fn poly_parse(a: &PolyParse) -> Res {
    let expr = load_expr(&a.source, &a.expr, &a.vars)?;
    let p = expr.expand::<QuadExt3>()?;
    let mut payload = poly_summary(&p);
    payload["rational"] = json!(p.to_rational().is_some());
    let summary = format!("{} terms of degree {} in {}", p.num_terms(), p.degree(), p.variables());
    Ok(RunReport::new("poly parse", a, Outcome::Pass, payload, summary))
}

fn assignment(text: &str) -> Result<BTreeMap<char, Rational>, Failure> {
    let mut out = BTreeMap::new();
    for part in text.split(',').filter(|s| !s.trim().is_empty()) {
        let (name, value) =
            part.split_once('=').ok_or_else(|| Failure::usage(format!("expected name=value, got '{part}'")))?;
        let mut chars = name.trim().chars();
        let c = match (chars.next(), chars.next()) {
            (Some(c), None) => c,
            _ => return Err(Failure::usage(format!("variable names are single letters, got '{name}'"))),
        };
        let v = parse_number(value.trim()).map_err(|m| Failure { code: 3, message: m })?;
        out.insert(c, v);
    }
    Ok(out)
}

pub fn poly_eval(a: &PolyEval) -> Res {
    let expr = load_expr(&a.source, &a.expr, &a.vars)?;
    let point = assignment(&a.at)?;
    let values = expr
        .vars
        .names()
        .iter()
        .map(|c| point.get(c).cloned().map(QuadExt3::rational).ok_or(Error::IncompleteAssignment(*c)))
        .collect::<Result<Vec<_>, _>>()?;
    let value = expr.eval(&values)?;
    let summary = format!("value {value}");
    Ok(RunReport::new("poly eval", a, Outcome::Pass, json!({ "value": value.to_string() }), summary))
}

pub fn majorize_check(a: &MajorizePair) -> Res {
    let (y, x) = (vector(&a.y)?, vector(&a.x)?);
    let v = majorizes(&y, &x, a.tol)?;
    let summary = format!("y majorizes x: {} (prefix deficits {:?})", v.holds, v.prefix_deficits);
    Ok(RunReport::new("majorize check", a, Outcome::check(v.holds), json!(v), summary))
}

pub fn majorize_construct(a: &MajorizePair) -> Res {
    let (y, x) = (rationals_to_f64(&vector(&a.y)?), rationals_to_f64(&vector(&a.x)?));
    let v = majorizes(&y, &x, a.tol)?;
    if !v.holds {
        let summary = "y does not majorize x; no transfer chain exists".to_string();
        return Ok(RunReport::new("majorize construct", a, Outcome::Fail, json!({ "verdict": v }), summary));
    }
    let chain = transfer_chain(&y, &x, a.tol)?;
    let applied = chain.apply(&y);
    let err = applied.iter().zip(&x).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
    let payload = json!({
        "transforms": chain.transforms,
        "matrix": chain.to_matrix(y.len()),
        "result": applied,
        "max_error": err,
    });
    let summary = format!("{} T-transforms take y to x (max error {err:.1e})", chain.len());
    Ok(RunReport::new("majorize construct", a, Outcome::Pass, payload, summary))
}

pub fn majorize_birkhoff(a: &BirkhoffArgs) -> Res {
    let s = load_matrix(&a.matrix)?.to_f64();
    let n = s.require_square()?;
    let b = birkhoff(&s, a.tol)?;
    let err = b.reconstruct(n).max_abs_diff(&s)?;
    let payload = json!({
        "terms": b.terms.iter().map(|(w, p)| json!({ "weight": w, "permutation": p })).collect::<Vec<_>>(),
        "count": b.terms.len(),
        "bound": (n - 1) * (n - 1) + 1,
        "weight_sum": b.weight_sum(),
        "reconstruction_error": err,
    });
    let summary = format!("{} permutations, weight sum {:.12}, reconstruction error {err:.1e}", b.terms.len(), b.weight_sum());
    Ok(RunReport::new("majorize birkhoff", a, Outcome::Pass, payload, summary))
}

pub fn majorize_entropy(a: &EntropyArgs) -> Res {
    let v = rationals_to_f64(&vector(&a.v)?);
    let h = shannon_entropy(&v)?;
    let Some(path) = &a.s else {
        let summary = format!("H = {h:.12}");
        return Ok(RunReport::new("majorize entropy", a, Outcome::Pass, json!({ "entropy": h }), summary));
    };
    let s = load_matrix(path)?.to_f64();
    check_doubly_stochastic(&s, a.tol)?;
    let x = s.mul_vec(&v)?;
    let hx = shannon_entropy(&x)?;
    let verdict = majorizes(&v, &x, a.tol)?;
    let ok = verdict.holds && hx >= h - a.tol;
    let payload = json!({ "entropy": h, "mixed": x, "mixed_entropy": hx, "majorization": verdict });
    let summary = format!("H(v) = {h:.12}, H(S v) = {hx:.12}");
    Ok(RunReport::new("majorize entropy", a, Outcome::check(ok), payload, summary))
}

fn gauge_mode(m: GaugeModeArg) -> GaugeMode {
    match m {
        GaugeModeArg::Proven => GaugeMode::Proven,
        GaugeModeArg::Conjectured => GaugeMode::Conjectured,
    }
}

fn build_gauge<T: Numeric>(a: &GaugeArgs) -> Result<Gauge<T>, Failure> {
    let p = load_matrix(&a.matrix)?;
    Ok(make_gauge(&DenseMatrix::<T>::from_rationals(&p), gauge_mode(a.gauge_mode), a.tol)?)
}

fn gauge_t<T: Numeric>(a: &GaugeArgs) -> Res {
    match build_gauge::<T>(a) {
        Ok(g) => {
            let summary = format!("valid {n}x{n} gauge, min IRGA entry {:.6e}", g.report.min_entry, n = g.n());
            Ok(RunReport::new("spdd gauge", a, Outcome::Pass, g.to_json(), summary))
        }
        Err(f) if f.code == 4 && f.message.starts_with("invalid gauge") => {
            Ok(RunReport::new("spdd gauge", a, Outcome::Fail, json!({ "error": f.message }), f.message))
        }
        Err(f) => Err(f),
    }
}

pub fn spdd_gauge(a: &GaugeArgs) -> Res {
    match a.mode {
        ModeArg::Float => gauge_t::<f64>(a),
        ModeArg::Exact => gauge_t::<Rational>(a),
    }
}

fn spdd_t<T: Numeric>(a: &SpddArgs) -> Result<SpddMatrix<T>, Failure> {
    let g = build_gauge::<T>(&a.gauge)?;
    Ok(make_spdd(&g, &convert::<T>(&vector(&a.spectrum)?))?)
}

fn render_vec<T: Numeric>(v: &[T]) -> String {
    v.iter().map(Numeric::render).collect::<Vec<_>>().join(", ")
}

fn make_t<T: Numeric>(a: &SpddArgs) -> Res {
    let m = spdd_t::<T>(a)?;
    let summary = format!("diag(M) = ({}) for spectrum ({})", render_vec(&m.diagonal), render_vec(&m.spectrum));
    Ok(RunReport::new("spdd make", a, Outcome::Pass, m.to_json(), summary))
}

pub fn spdd_make(a: &SpddArgs) -> Res {
    match a.gauge.mode {
        ModeArg::Float => make_t::<f64>(a),
        ModeArg::Exact => make_t::<Rational>(a),
    }
}

fn checks<T: Numeric>(m: &SpddMatrix<T>, tol: f64) -> Result<(bool, Value, String), Failure> {
    let mapping = verify_mapping(m, tol)?;
    let theorem = verify_majorization_theorem(m, tol)?;
    let ok = mapping.holds && theorem.holds;
    let payload = json!({
        "n": m.gauge.n(),
        "spectrum": m.spectrum.iter().map(Numeric::render).collect::<Vec<_>>(),
        "diagonal": m.diagonal.iter().map(Numeric::render).collect::<Vec<_>>(),
        "mapping": mapping,
        "majorization": theorem,
    });
    let summary = format!(
        "mapping holds {} (dev {:.1e}/{:.1e}); diagonal majorizes spectrum {}",
        mapping.holds, mapping.diag_from_spectrum_dev, mapping.spectrum_from_diag_dev, theorem.holds
    );
    Ok((ok, payload, summary))
}

fn verify_t<T: Numeric>(a: &SpddArgs) -> Res {
    let m = spdd_t::<T>(a)?;
    let (ok, payload, summary) = checks(&m, a.gauge.tol.max(1e-9))?;
    Ok(RunReport::new("spdd verify", a, Outcome::check(ok), payload, summary))
}

pub fn spdd_verify(a: &SpddArgs) -> Res {
    match a.gauge.mode {
        ModeArg::Float => verify_t::<f64>(a),
        ModeArg::Exact => verify_t::<Rational>(a),
    }
}

fn kron_t<T: Numeric>(a: &KronArgs) -> Res {
    let side = |path: &str, e: &str| -> Result<SpddMatrix<T>, Failure> {
        let p = DenseMatrix::<T>::from_rationals(&load_matrix(path)?);
        let g = make_gauge(&p, GaugeMode::Conjectured, 1e-10)?;
        Ok(make_spdd(&g, &convert::<T>(&vector(e)?))?)
    };
    let k = kron_spdd(&side(&a.a, &a.ea)?, &side(&a.b, &a.eb)?, 1e-10)?;
    let (ok, mut payload, summary) = checks(&k, a.tol)?;
    payload["s"] = json!(k.gauge.report.s);
    Ok(RunReport::new("spdd kron", a, Outcome::check(ok), payload, summary))
}

pub fn spdd_kron(a: &KronArgs) -> Res {
    match a.mode {
        ModeArg::Float => kron_t::<f64>(a),
        ModeArg::Exact => kron_t::<Rational>(a),
    }
}

fn construct_t<T: Numeric>(a: &ConstructArgs) -> Res {
    let plan = block_plan(a.n)?;
    let g = assemble_gpdd::<T>(&plan, a.seed, a.range, 1e-10)?;
    if let Some(path) = &a.write {
        write_file(path, &format_matrix(&g.p, Numeric::render))?;
    }
    let mut payload = json!({ "plan": plan.sizes, "gauge": g.to_json() });
    let mut summary = format!("n={} gauge from blocks {:?}", a.n, plan.sizes);
    let mut ok = true;
    if let Some(e) = &a.spectrum {
        let m = make_spdd(&g, &convert::<T>(&vector(e)?))?;
        let (holds, check, s) = checks(&m, a.tol)?;
        ok = holds;
        payload["check"] = check;
        summary = format!("{summary}; {s}");
    }
    Ok(RunReport::new("spdd construct", a, Outcome::check(ok), payload, summary))
}

pub fn spdd_construct(a: &ConstructArgs) -> Res {
    match a.mode {
        ModeArg::Float => construct_t::<f64>(a),
        ModeArg::Exact => construct_t::<Rational>(a),
    }
}

fn search_t<T: Numeric>(a: &SearchArgs, cfg: &SearchConfig) -> Res {
    let p = DenseMatrix::<T>::from_rationals(&load_matrix(&a.matrix)?);
    let g = make_gauge(&p, GaugeMode::Conjectured, a.tol)?;
    let trace = run(&g, &convert::<T>(&vector(&a.e0)?), cfg)?;
    let last = trace.states.last().expect("nonempty trace");
    let summary = format!(
        "{} moves, ended at ({}) with spectral entropy {:.6} ({:?})",
        trace.moves.len(),
        render_vec(&last.spectrum),
        last.spectral_entropy,
        trace.termination
    );
    Ok(RunReport::new("search run", a, Outcome::Pass, trace.to_json(), summary))
}

pub fn search_run(a: &SearchArgs) -> Res {
    let delta = parse_number(&a.delta).map_err(|m| Failure { code: 3, message: m })?;
    let direction = match a.direction {
        DirectionArg::MaxEntropy => Direction::MaxEntropy,
        DirectionArg::MinEntropy => Direction::MinEntropy,
    };
    let cfg = SearchConfig::new(delta, direction, a.max_iters, a.tol)?;
    match a.mode {
        ModeArg::Float => search_t::<f64>(a, &cfg),
        ModeArg::Exact => search_t::<Rational>(a, &cfg),
    }
}
