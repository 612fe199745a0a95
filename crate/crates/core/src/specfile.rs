//! Problem-spec files: INI-like sections, series written one monomial per line.
//! The schema is documented in docs/problem-spec.md.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::{BigRational, Rational64};

use crate::error::{BorelError, Result};
use crate::harry_dym::harry_dym_problem;
use crate::normalize::{normalize, JetPoly, RawEquation, XSeries};
use crate::problem::{DerivFactor, MultiIndex, NonlinearTerm, PDEProblem, ScaledSetting, SectorSpec, SymbolPolynomial};
use crate::solver::SolveConfig;
use crate::series::{parse_rational, RamifiedMonomial, RamifiedSeries, TPoly, VarTag};

/// How the problem was specified.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpecKind {
    Direct,
    Normalized,
    Preset,
}

#[derive(Debug, Clone)]
pub struct SpecFile {
    pub problem: PDEProblem,
    pub kind: SpecKind,
    /// Raw `[solve]` entries, applied by the caller.
    pub solve: BTreeMap<String, String>,
    /// `order` of a `[preset]`.
    pub preset_order: Option<usize>,
}

#[derive(Debug, Clone)]
struct Line {
    no: usize,
    text: String,
}

#[derive(Debug, Clone)]
struct Section {
    name: String,
    /// Positional argument (component index) and key=value header arguments.
    index: Option<String>,
    args: BTreeMap<String, String>,
    line: usize,
    body: Vec<Line>,
}

fn perr(line: usize, col: usize, msg: impl Into<String>) -> BorelError {
    BorelError::Parse { line, col, msg: msg.into() }
}

/// Column (1-based) of the `k`-th whitespace-separated field of a line.
fn field_col(text: &str, k: usize) -> usize {
    let mut seen = 0;
    let mut in_field = false;
    for (i, ch) in text.char_indices() {
        if ch.is_whitespace() {
            in_field = false;
        } else if !in_field {
            if seen == k {
                return text[..i].chars().count() + 1;
            }
            seen += 1;
            in_field = true;
        }
    }
    text.chars().count() + 1
}

fn split_sections(text: &str) -> Result<(Vec<Section>, usize)> {
    let mut out: Vec<Section> = Vec::new();
    let mut last = 0;
    for (i, raw) in text.lines().enumerate() {
        let no = i + 1;
        last = no;
        let body = raw.split('#').next().unwrap_or("");
        let t = body.trim();
        if t.is_empty() {
            continue;
        }
        if let Some(rest) = t.strip_prefix('[') {
            let inner = rest.strip_suffix(']').ok_or_else(|| perr(no, raw.len(), "unterminated section header"))?;
            let mut parts = inner.split_whitespace();
            let name = parts.next().ok_or_else(|| perr(no, 1, "empty section header"))?.to_string();
            let mut index = None;
            let mut args = BTreeMap::new();
            for p in parts {
                match p.split_once('=') {
                    Some((k, v)) => {
                        args.insert(k.to_string(), v.to_string());
                    }
                    None if index.is_none() => index = Some(p.to_string()),
                    None => return Err(perr(no, 1, format!("unexpected header token `{p}`"))),
                }
            }
            out.push(Section { name, index, args, line: no, body: Vec::new() });
            continue;
        }
        let sec = out.last_mut().ok_or_else(|| perr(no, 1, "content before the first section"))?;
        sec.body.push(Line { no, text: body.to_string() });
    }
    Ok((out, last + 1))
}

fn kv(sec: &Section) -> Result<BTreeMap<String, (String, Line)>> {
    let mut m = BTreeMap::new();
    for l in &sec.body {
        let (k, v) = l
            .text
            .split_once('=')
            .ok_or_else(|| perr(l.no, field_col(&l.text, 0), format!("expected `key = value` in [{}]", sec.name)))?;
        m.insert(k.trim().to_string(), (v.trim().to_string(), l.clone()));
    }
    Ok(m)
}

fn val_col(l: &Line) -> usize {
    l.text.find('=').map(|i| i + 2).unwrap_or(1)
}

fn parse_f64_expr(s: &str) -> Option<f64> {
    // Accepts plain numbers and multiples of pi: "pi/12", "0.25*pi", "pi".
    let s = s.trim();
    if let Ok(v) = s.parse::<f64>() {
        return Some(v);
    }
    if let Some(rest) = s.strip_prefix("pi") {
        let rest = rest.trim();
        if rest.is_empty() {
            return Some(PI);
        }
        return rest.strip_prefix('/').and_then(|d| d.trim().parse::<f64>().ok()).map(|d| PI / d);
    }
    s.strip_suffix("*pi").and_then(|c| c.trim().parse::<f64>().ok()).map(|c| c * PI)
}

fn get_f64(m: &BTreeMap<String, (String, Line)>, key: &str, default: Option<f64>, at: usize) -> Result<f64> {
    match m.get(key) {
        Some((v, l)) => parse_f64_expr(v).ok_or_else(|| perr(l.no, val_col(l), format!("`{key}` is not a number"))),
        None => default.ok_or_else(|| perr(at, 1, format!("missing key `{key}`"))),
    }
}

fn get_usize(m: &BTreeMap<String, (String, Line)>, key: &str, default: Option<usize>, at: usize) -> Result<usize> {
    match m.get(key) {
        Some((v, l)) => v.parse().map_err(|_| perr(l.no, val_col(l), format!("`{key}` must be a nonnegative integer"))),
        None => default.ok_or_else(|| perr(at, 1, format!("missing key `{key}`"))),
    }
}

fn rationals(v: &str, l: &Line) -> Result<Vec<Rational64>> {
    v.split_whitespace()
        .map(|s| parse_rational(s).ok_or_else(|| perr(l.no, val_col(l), format!("`{s}` is not an exact fraction"))))
        .collect()
}

fn complex(s: &str) -> Option<Complex64> {
    match s.split_once(',') {
        Some((re, im)) => Some(Complex64::new(re.trim().parse().ok()?, im.trim().parse().ok()?)),
        None => Some(Complex64::new(s.trim().parse().ok()?, 0.0)),
    }
}

fn multi(s: &str, d: usize) -> Option<MultiIndex> {
    let v: Option<Vec<u32>> = s.split(',').map(|x| x.trim().parse().ok()).collect();
    v.filter(|v| v.len() == d).map(MultiIndex)
}

/// `re im num/den [tdeg]` lines.
fn series_body(lines: &[Line]) -> Result<RamifiedSeries<Complex64>> {
    let mut terms = Vec::new();
    for l in lines {
        let f: Vec<&str> = l.text.split_whitespace().collect();
        if f.is_empty() {
            continue;
        }
        let col = |k| field_col(&l.text, k);
        if f.len() < 3 || f.len() > 4 {
            return Err(perr(l.no, col(0), "expected `re im num/den [tdeg]`"));
        }
        let re: f64 = f[0].parse().map_err(|_| perr(l.no, col(0), "bad real part"))?;
        let im: f64 = f[1].parse().map_err(|_| perr(l.no, col(1), "bad imaginary part"))?;
        let e = parse_rational(f[2]).ok_or_else(|| perr(l.no, col(2), "exponent must be an exact fraction"))?;
        let k: usize = match f.get(3) {
            Some(s) => s.parse().map_err(|_| perr(l.no, col(3), "bad t-degree"))?,
            None => 0,
        };
        terms.push(RamifiedMonomial::new(e, TPoly::monomial(Complex64::new(re, im), k)));
    }
    RamifiedSeries::from_terms(VarTag::X, terms).map_err(|e| perr(lines.first().map_or(0, |l| l.no), 1, e.to_string()))
}

fn big(r: Rational64) -> BigRational {
    BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
}

/// `num/den exponent [tdeg]` lines, exact.
fn exact_series_line(l: &Line, fields: &[&str], first: usize) -> Result<RamifiedMonomial<BigRational>> {
    let col = |k| field_col(&l.text, first + k);
    if fields.len() < 2 || fields.len() > 3 {
        return Err(perr(l.no, col(0), "expected `num/den exponent [tdeg]`"));
    }
    let c = parse_rational(fields[0]).ok_or_else(|| perr(l.no, col(0), "coefficient must be an exact fraction"))?;
    let e = parse_rational(fields[1]).ok_or_else(|| perr(l.no, col(1), "exponent must be an exact fraction"))?;
    let k: usize = match fields.get(2) {
        Some(s) => s.parse().map_err(|_| perr(l.no, col(2), "bad t-degree"))?,
        None => 0,
    };
    Ok(RamifiedMonomial::new(e, TPoly::monomial(big(c), k)))
}

fn exact_series(lines: &[Line]) -> Result<XSeries> {
    let mut terms = Vec::new();
    for l in lines {
        let f: Vec<&str> = l.text.split_whitespace().collect();
        if !f.is_empty() {
            terms.push(exact_series_line(l, &f, 0)?);
        }
    }
    RamifiedSeries::from_terms(VarTag::X, terms).map_err(|e| perr(lines.first().map_or(0, |l| l.no), 1, e.to_string()))
}

/// `v0,v1,... num/den exponent [tdeg]`: jet exponents then an exact monomial.
fn jet_body(lines: &[Line]) -> Result<JetPoly> {
    let mut p = JetPoly::zero();
    for l in lines {
        let f: Vec<&str> = l.text.split_whitespace().collect();
        if f.is_empty() {
            continue;
        }
        let key: Option<Vec<u32>> = if f[0] == "-" { Some(Vec::new()) } else { f[0].split(',').map(|x| x.parse().ok()).collect() };
        let key = key.ok_or_else(|| perr(l.no, field_col(&l.text, 0), "jet key must be `-` or comma-separated exponents"))?;
        let m = exact_series_line(l, &f[1..], 1)?;
        let s = RamifiedSeries::from_terms(VarTag::X, vec![m]).map_err(|e| perr(l.no, 1, e.to_string()))?;
        p.add_term(key, s).map_err(|e| perr(l.no, 1, e.to_string()))?;
    }
    Ok(p)
}

fn symbol_body(lines: &[Line], d: usize) -> Result<BTreeMap<MultiIndex, Complex64>> {
    let mut m = BTreeMap::new();
    for l in lines {
        let f: Vec<&str> = l.text.split_whitespace().collect();
        if f.is_empty() {
            continue;
        }
        if f.len() != 2 {
            return Err(perr(l.no, field_col(&l.text, 0), "expected `re[,im] j` (coefficient of ∂^j)"));
        }
        let c = complex(f[0]).ok_or_else(|| perr(l.no, field_col(&l.text, 0), "bad complex coefficient"))?;
        let j = multi(f[1], d).ok_or_else(|| perr(l.no, field_col(&l.text, 1), format!("derivative index must have {d} entries")))?;
        *m.entry(j).or_insert(Complex64::new(0.0, 0.0)) += c;
    }
    Ok(m)
}

fn sector(sec: Option<&Section>, d: usize, n: u32, end: usize) -> Result<SectorSpec> {
    let cap = PI / (2.0 * n.max(1) as f64);
    let Some(sec) = sec else {
        return Err(perr(end, 1, "missing section [sector]"));
    };
    let m = kv(sec)?;
    let phi = get_f64(&m, "phi", Some(cap / 2.0), sec.line)?;
    let rho = get_f64(&m, "rho", Some(1.0), sec.line)?;
    let directions = match m.get("directions") {
        Some((v, l)) => v
            .split_whitespace()
            .map(|s| parse_f64_expr(s).ok_or_else(|| perr(l.no, val_col(l), "bad ray angle")))
            .collect::<Result<Vec<_>>>()?,
        None => vec![0.0],
    };
    Ok(SectorSpec { phi, rho, directions, d })
}

fn setting(sec: &Section) -> Result<ScaledSetting> {
    let m = kv(sec)?;
    let req = |k: &str| m.get(k).ok_or_else(|| perr(sec.line, 1, format!("[setting] needs `{k}`")));
    let (b, lb) = req("betas")?;
    let (g, lg) = req("gammas")?;
    let (w, lw) = req("omegas")?;
    let (be, lbe) = req("beta")?;
    let analytic = match m.get("analytic") {
        Some((v, l)) => v.parse().map_err(|_| perr(l.no, val_col(l), "`analytic` must be true or false"))?,
        None => false,
    };
    Ok(ScaledSetting {
        betas: rationals(b, lb)?,
        gammas: rationals(g, lg)?,
        omegas: rationals(w, lw)?,
        beta: rationals(be, lbe)?.first().copied().ok_or_else(|| perr(lbe.no, val_col(lbe), "`beta` is empty"))?,
        analytic,
    })
}

fn component(sec: &Section, m: usize) -> Result<usize> {
    let i = match &sec.index {
        Some(s) => s.parse().map_err(|_| perr(sec.line, 2, format!("[{}] index must be an integer", sec.name)))?,
        None if m == 1 => 0,
        None => return Err(perr(sec.line, 2, format!("[{}] needs a component index", sec.name))),
    };
    if i >= m {
        return Err(perr(sec.line, 2, format!("component {i} out of range for m = {m}")));
    }
    Ok(i)
}

fn term(sec: &Section, d: usize, m: usize) -> Result<NonlinearTerm> {
    let arg = |k: &str| sec.args.get(k).ok_or_else(|| perr(sec.line, 2, format!("[term] needs `{k}=`")));
    let equation: usize = arg("eq")?.parse().map_err(|_| perr(sec.line, 2, "`eq` must be an integer"))?;
    if equation >= m {
        return Err(perr(sec.line, 2, format!("equation {equation} out of range for m = {m}")));
    }
    let k = multi(arg("k")?, m).ok_or_else(|| perr(sec.line, 2, format!("`k` must have {m} entries")))?;
    let mut q = Vec::new();
    if let Some(spec) = sec.args.get("q") {
        // component:j^power, joined by '+'.
        for part in spec.split('+').filter(|s| !s.is_empty() && *s != "0") {
            let bad = || perr(sec.line, 2, format!("bad q factor `{part}` (want c:j^p)"));
            let (c, rest) = part.split_once(':').ok_or_else(bad)?;
            let (j, p) = rest.split_once('^').unwrap_or((rest, "1"));
            q.push(DerivFactor {
                component: c.parse().map_err(|_| bad())?,
                j: multi(j, d).ok_or_else(bad)?,
                power: p.parse().map_err(|_| bad())?,
            });
        }
    }
    Ok(NonlinearTerm { equation, k, q, coeff: series_body(&sec.body)? })
}

pub fn parse_spec(text: &str) -> Result<SpecFile> {
    let (secs, end) = split_sections(text)?;
    let find = |name: &str| secs.iter().find(|s| s.name == name);
    let all = |name: &'static str| secs.iter().filter(move |s| s.name == name);
    let known = [
        "dims", "symbol", "term", "forcing", "initial", "sector", "setting", "solve", "preset", "raw", "g1", "g2", "initial_u",
    ];
    if let Some(s) = secs.iter().find(|s| !known.contains(&s.name.as_str())) {
        return Err(perr(s.line, 2, format!("unknown section [{}]", s.name)));
    }
    let solve = match find("solve") {
        Some(s) => kv(s)?.into_iter().map(|(k, (v, _))| (k, v)).collect(),
        None => BTreeMap::new(),
    };
    if let Some(pre) = find("preset") {
        let m = kv(pre)?;
        let (name, l) = m.get("name").ok_or_else(|| perr(pre.line, 1, "[preset] needs `name`"))?;
        if name != "harry-dym" {
            return Err(perr(l.no, val_col(l), format!("unknown preset `{name}`")));
        }
        let order = get_usize(&m, "order", Some(3), pre.line)?;
        let mut problem = harry_dym_problem(order).map_err(|e| perr(pre.line, 1, e.to_string()))?;
        if let Some(s) = find("sector") {
            problem.sector = sector(Some(s), 1, problem.n, end)?;
        }
        problem.horizon = get_f64(&m, "horizon", Some(problem.horizon), pre.line)?;
        return Ok(SpecFile { problem, kind: SpecKind::Preset, solve, preset_order: Some(order) });
    }
    if let Some(raw) = find("raw") {
        let m = kv(raw)?;
        let n = get_usize(&m, "n", None, raw.line)? as u32;
        let sym = find("symbol").ok_or_else(|| perr(end, 1, "missing section [symbol]"))?;
        let comps = symbol_body(&sym.body, 1)?;
        let symbol = SymbolPolynomial { n, d: 1, comps: vec![comps] };
        let jet = |name: &str| find(name).map(|s| jet_body(&s.body)).transpose().map(|p| p.unwrap_or_default());
        let eq = RawEquation {
            n,
            symbol,
            g1: jet("g1")?,
            g2: jet("g2")?,
            u_initial: match find("initial_u") {
                Some(s) => exact_series(&s.body)?,
                None => RamifiedSeries::zero(VarTag::X),
            },
            sector: sector(find("sector"), 1, n, end)?,
            horizon: get_f64(&m, "horizon", Some(1.0), raw.line)?,
            epsilon: get_f64(&m, "epsilon", Some(1.0), raw.line)?,
            name: m.get("name").map(|v| v.0.clone()).unwrap_or_else(|| "raw".into()),
        };
        let problem = normalize(&eq)?;
        return Ok(SpecFile { problem, kind: SpecKind::Normalized, solve, preset_order: None });
    }
    let dims = find("dims").ok_or_else(|| perr(end, 1, "missing section [dims]"))?;
    let dm = kv(dims)?;
    let d = get_usize(&dm, "d", Some(1), dims.line)?;
    let n = get_usize(&dm, "n", None, dims.line)? as u32;
    let m = get_usize(&dm, "m", Some(1), dims.line)?;
    if d == 0 || m == 0 {
        return Err(perr(dims.line, 1, "d and m must be positive"));
    }
    let mut comps = vec![None; m];
    for s in all("symbol") {
        let l = component(s, m)?;
        comps[l] = Some(symbol_body(&s.body, d)?);
    }
    let comps = comps
        .into_iter()
        .enumerate()
        .map(|(l, c)| c.ok_or_else(|| perr(end, 1, format!("missing section [symbol {l}]"))))
        .collect::<Result<Vec<_>>>()?;
    let mut forcing = vec![RamifiedSeries::zero(VarTag::X); m];
    for s in all("forcing") {
        forcing[component(s, m)?] = series_body(&s.body)?;
    }
    let mut initial = vec![RamifiedSeries::zero(VarTag::X); m];
    for s in all("initial") {
        initial[component(s, m)?] = series_body(&s.body)?;
    }
    let terms = all("term").map(|s| term(s, d, m)).collect::<Result<Vec<_>>>()?;
    let ram = forcing
        .iter()
        .chain(&initial)
        .map(|s| s.ramification())
        .chain(terms.iter().map(|t| t.coeff.ramification()))
        .fold(1, num_integer::lcm);
    let lift = |s: &RamifiedSeries<Complex64>| {
        if s.is_empty() {
            return Ok(s.clone());
        }
        RamifiedSeries::with_ramification(VarTag::X, s.terms().to_vec(), ram)
    };
    let forcing = forcing.iter().map(lift).collect::<Result<Vec<_>>>()?;
    let initial = initial.iter().map(lift).collect::<Result<Vec<_>>>()?;
    let terms = terms
        .into_iter()
        .map(|t| Ok(NonlinearTerm { coeff: lift(&t.coeff)?, ..t }))
        .collect::<Result<Vec<_>>>()?;
    let problem = PDEProblem {
        d,
        n,
        m,
        symbol: SymbolPolynomial { n, d, comps },
        terms,
        forcing,
        initial,
        epsilon: get_f64(&dm, "epsilon", Some(1.0), dims.line)?,
        sector: sector(find("sector"), d, n, end)?,
        horizon: get_f64(&dm, "horizon", Some(1.0), dims.line)?,
        ramification: vec![ram; d],
        setting: find("setting").map(setting).transpose()?,
        name: dm.get("name").map(|v| v.0.clone()).unwrap_or_else(|| "problem".into()),
    };
    Ok(SpecFile { problem, kind: SpecKind::Direct, solve, preset_order: None })
}

impl SpecFile {
    /// Solver configuration with the `[solve]` overrides applied.
    pub fn solve_config(&self) -> Result<SolveConfig> {
        let mut c = SolveConfig::default();
        for (k, v) in &self.solve {
            c.apply(k, v)?;
        }
        Ok(c)
    }
}

fn join_index(j: &MultiIndex) -> String {
    j.0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

/// Writes a problem in the direct form. Floats use shortest round-trip formatting,
/// so `parse_spec(&write_spec(p))` reproduces `p`.
pub fn write_spec(p: &PDEProblem) -> String {
    let mut o = String::new();
    let mut line = |s: String| {
        o.push_str(&s);
        o.push('\n');
    };
    line("[dims]".into());
    line(format!("d = {}", p.d));
    line(format!("n = {}", p.n));
    line(format!("m = {}", p.m));
    line(format!("name = {}", p.name.replace('#', "")));
    line(format!("horizon = {:e}", p.horizon));
    line(format!("epsilon = {:e}", p.epsilon));
    for (l, comp) in p.symbol.comps.iter().enumerate() {
        line(format!("[symbol {l}]"));
        for (j, c) in comp {
            line(format!("{:e},{:e} {}", c.re, c.im, join_index(j)));
        }
    }
    for (name, list) in [("forcing", &p.forcing), ("initial", &p.initial)] {
        for (l, s) in list.iter().enumerate() {
            if !s.is_empty() {
                line(format!("[{name} {l}]"));
                s.to_lines().into_iter().for_each(&mut line);
            }
        }
    }
    for t in &p.terms {
        let q: Vec<String> = t.q.iter().map(|f| format!("{}:{}^{}", f.component, join_index(&f.j), f.power)).collect();
        let q = if q.is_empty() { "0".to_string() } else { q.join("+") };
        line(format!("[term eq={} k={} q={q}]", t.equation, join_index(&t.k)));
        t.coeff.to_lines().into_iter().for_each(&mut line);
    }
    line("[sector]".into());
    line(format!("phi = {:e}", p.sector.phi));
    line(format!("rho = {:e}", p.sector.rho));
    let dirs: Vec<String> = p.sector.directions.iter().map(|v| format!("{v:e}")).collect();
    line(format!("directions = {}", dirs.join(" ")));
    if let Some(s) = &p.setting {
        let r = |v: &[Rational64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
        line("[setting]".into());
        line(format!("betas = {}", r(&s.betas)));
        line(format!("gammas = {}", r(&s.gammas)));
        line(format!("omegas = {}", r(&s.omegas)));
        line(format!("beta = {}", s.beta));
        line(format!("analytic = {}", s.analytic));
    }
    o
}

pub fn parse_problem(path: &Path) -> Result<SpecFile> {
    let text = std::fs::read_to_string(path).map_err(|e| perr(0, 0, format!("{}: {e}", path.display())))?;
    parse_spec(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::validate_constraint;

    const LINEAR: &str = "\
[dims]
n = 3
name = linear
[symbol 0]
-1 3
[forcing 0]
1 0 -2
[sector]
phi = pi/12
";

    #[test]
    fn linear_spec() {
        let s = parse_spec(LINEAR).unwrap();
        assert_eq!(s.kind, SpecKind::Direct);
        assert!(s.problem.validate().is_empty(), "{:?}", s.problem.validate());
        assert!(validate_constraint(&s.problem).is_empty());
        assert_eq!(s.problem.symbol, SymbolPolynomial::minus_d_pow(3));
    }

    #[test]
    fn positional_errors() {
        let bad = LINEAR.replace("1 0 -2", "1 0 -2.5");
        match parse_spec(&bad) {
            Err(BorelError::Parse { line, col, .. }) => assert_eq!((line, col), (7, 5)),
            other => panic!("{other:?}"),
        }
        let missing = LINEAR.replace("[sector]\nphi = pi/12\n", "");
        assert!(matches!(parse_spec(&missing), Err(BorelError::Parse { line: 8, .. })));
    }

    #[test]
    fn term_header() {
        let t = format!("{LINEAR}[term eq=0 k=0 q=0:2^2]\n1 0 -1\n");
        let s = parse_spec(&t).unwrap();
        assert_eq!(s.problem.terms[0].derivative_weight(), 4);
        assert_eq!(validate_constraint(&s.problem).len(), 1);
    }

    #[test]
    fn write_roundtrip() {
        let t = "[raw]\nn = 3\n[symbol]\n-1 3\n[g1]\n1,1 -1 0\n- 1 -2\n[sector]\nphi = pi/12\n";
        let p = parse_spec(t).unwrap().problem;
        let back = parse_spec(&write_spec(&p)).unwrap().problem;
        assert_eq!(back, p);
        let hd = harry_dym_problem(3).unwrap();
        assert_eq!(parse_spec(&write_spec(&hd)).unwrap().problem, hd);
    }

    #[test]
    fn solve_overrides() {
        let s = parse_spec(&format!("{LINEAR}[solve]\nnodes = 256\nnu = 12.5\n")).unwrap();
        let c = s.solve_config().unwrap();
        assert_eq!((c.nodes, c.nu), (256, Some(12.5)));
        let bad = parse_spec(&format!("{LINEAR}[solve]\nnodez = 256\n")).unwrap();
        assert!(bad.solve_config().is_err());
    }

    #[test]
    fn raw_kdv() {
        let t = "[raw]\nn = 3\n[symbol]\n-1 3\n[g1]\n1,1 -1 0\n[sector]\nphi = pi/12\n";
        let s = parse_spec(t).unwrap();
        assert_eq!(s.kind, SpecKind::Normalized);
        assert_eq!(s.problem.m, 3);
    }
}
