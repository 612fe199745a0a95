use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use borelsum_core::formal::{formal_series_solve, FormalConfig};
use borelsum_core::grid::RayGridFunction;
use borelsum_core::harry_dym::harry_dym_scaled;
use borelsum_core::oracle::{oracle_integrate, OracleConfig};
use borelsum_core::problem::{check_cone_condition, validate_constraint};
use borelsum_core::series::rat_to_f64;
use borelsum_core::solver::{lattice_omega, m_qk, setting_alpha_table, small_p_exponent, solve, solve_all_rays, SolveConfig, SolveReport};
use borelsum_core::specfile::{parse_problem, write_spec, SpecFile, SpecKind};
use borelsum_core::transforms::{accelerate, laplace_ray_at, AccelerationSpec, GrowthCertificate};
use borelsum_core::Complex64;
use serde_json::{json, Value};

use crate::artifacts::{num, Artifacts};
use crate::Failure;

/// `--set` values not yet consumed by a command.
struct Settings(BTreeMap<String, String>);

impl Settings {
    fn take<T: FromStr>(&mut self, key: &str, default: T) -> Result<T, Failure> {
        match self.0.remove(key) {
            Some(v) => v.parse().map_err(|_| Failure::Validation(format!("bad value `{v}` for {key}"))),
            None => Ok(default),
        }
    }

    fn take_opt<T: FromStr>(&mut self, key: &str) -> Result<Option<T>, Failure> {
        match self.0.remove(key) {
            Some(v) => v.parse().map(Some).map_err(|_| Failure::Validation(format!("bad value `{v}` for {key}"))),
            None => Ok(None),
        }
    }

    /// Comma-separated list of floats.
    fn take_list(&mut self, key: &str, default: Vec<f64>) -> Result<Vec<f64>, Failure> {
        match self.0.remove(key) {
            Some(v) => v
                .split(',')
                .map(|s| s.trim().parse::<f64>().map_err(|_| Failure::Validation(format!("bad list `{v}` for {key}"))))
                .collect(),
            None => Ok(default),
        }
    }

    fn finish(self) -> Result<(), Failure> {
        match self.0.keys().next() {
            Some(k) => Err(Failure::Validation(format!("unknown setting `{k}` for this command"))),
            None => Ok(()),
        }
    }

    /// Spec `[solve]` block, then the remaining `--set` entries.
    fn solve_config(self, spec: &SpecFile) -> Result<SolveConfig, Failure> {
        let mut c = spec.solve_config().map_err(|e| Failure::Validation(e.to_string()))?;
        for (k, v) in &self.0 {
            c.apply(k, v).map_err(|e| Failure::Validation(e.to_string()))?;
        }
        c.validate().map_err(|e| Failure::Validation(e.to_string()))?;
        Ok(c)
    }
}

pub fn run(command: &str, problem: &Path, settings: BTreeMap<String, String>, art: &mut Artifacts) -> Result<(), Failure> {
    let spec = parse_problem(problem)?;
    let sets = Settings(settings);
    match command {
        "check" => check(&spec, sets, art),
        "normalize" => normalize(&spec, sets, art),
        "series" => series(&spec, sets, art),
        "solve-borel" => solve_borel(&spec, sets, art),
        "resum" => resum(&spec, sets, art),
        "accelerate" => accelerate_cmd(&spec, sets, art),
        "harry-dym" => harry_dym(&spec, sets, art),
        "oracle-compare" => oracle_compare(&spec, sets, art),
        other => Err(Failure::Validation(format!("unknown command {other}"))),
    }
}

fn kind_name(k: SpecKind) -> &'static str {
    match k {
        SpecKind::Direct => "direct",
        SpecKind::Normalized => "normalized",
        SpecKind::Preset => "preset",
    }
}

fn summary(spec: &SpecFile) -> Value {
    let p = &spec.problem;
    let terms: Vec<Value> = p
        .terms
        .iter()
        .map(|t| {
            json!({
                "term": t.label(),
                "derivative_weight": t.derivative_weight(),
                "alpha": t.coeff.max_exponent().map(|e| (-e).to_string()),
            })
        })
        .collect();
    json!({
        "name": p.name,
        "kind": kind_name(spec.kind),
        "d": p.d,
        "n": p.n,
        "m": p.m,
        "alpha_r": p.alpha_r().map(|a| a.to_string()),
        "ramification": p.ramification,
        "horizon": p.horizon,
        "sector": p.sector,
        "terms": terms,
    })
}

fn check(spec: &SpecFile, sets: Settings, art: &mut Artifacts) -> Result<(), Failure> {
    sets.finish()?;
    let p = &spec.problem;
    let issues = p.validate();
    let violations = validate_constraint(p);
    let cone = check_cone_condition(&p.symbol, p.sector.phi, 256);
    let mut report = json!({
        "problem": summary(spec),
        "issues": issues,
        "derivative_budget_violations": violations,
        "sector_issues": p.sector.validate(p.n),
    });
    report["cone"] = match &cone {
        Ok(c) => serde_json::to_value(c).unwrap_or(Value::Null),
        Err(e) => json!({ "error": e.to_string() }),
    };
    if let Some(setting) = &p.setting {
        let table: BTreeMap<String, Vec<String>> = setting_alpha_table(p, setting)?
            .into_iter()
            .map(|(q, a)| {
                let key = q.iter().map(|f| format!("{}:{}^{}", f.component, f.j, f.power)).collect::<Vec<_>>().join("+");
                (if key.is_empty() { "0".into() } else { key }, a.iter().map(|v| v.to_string()).collect())
            })
            .collect();
        let mq: Vec<(String, String)> = m_qk(p, setting)?.into_iter().map(|(l, m)| (l, m.to_string())).collect();
        report["setting"] = json!({
            "alpha_table": table,
            "m_qk": mq,
            "omega": lattice_omega(p, setting)?.map(|w| w.to_string()),
        });
    }
    art.json("check.json", &report)?;
    let mut problems: Vec<String> = issues;
    problems.extend(violations.iter().map(|v| format!("derivative budget exceeded by {}", v.term)));
    problems.extend(p.sector.validate(p.n));
    match cone {
        Ok(c) if !c.ok => problems.push(format!("cone condition fails (C₀ = {:.3e})", c.c)),
        Err(e) => problems.push(e.to_string()),
        _ => {}
    }
    if problems.is_empty() {
        Ok(())
    } else {
        Err(Failure::Validation(problems.join("; ")))
    }
}

fn normalize(spec: &SpecFile, sets: Settings, art: &mut Artifacts) -> Result<(), Failure> {
    sets.finish()?;
    art.write("normalized.spec", write_spec(&spec.problem).as_bytes())?;
    art.json("normalize.json", &summary(spec))
}

fn series(spec: &SpecFile, mut sets: Settings, art: &mut Artifacts) -> Result<(), Failure> {
    let steps: usize = sets.take("steps", 6)?;
    let cfg = FormalConfig { t_order: sets.take("t_order", 8)?, zero_tol: sets.take("zero_tol", 1e-13)? };
    sets.finish()?;
    let s = formal_series_solve(&spec.problem, steps, &cfg)?;
    let mut rows = Vec::new();
    for t in &s.terms {
        for (k, c) in t.coeff.c.iter().enumerate() {
            if c.norm() != 0.0 {
                rows.push(vec![
                    t.component.to_string(),
                    t.exponent.to_string(),
                    num(rat_to_f64(t.exponent)),
                    k.to_string(),
                    num(c.re),
                    num(c.im),
                ]);
            }
        }
    }
    art.csv("series.csv", &["component", "exponent", "exponent_value", "t_degree", "re", "im"], &rows)?;
    art.json(
        "series.json",
        &json!({
            "problem": summary(spec),
            "config": cfg,
            "depth": s.depth,
            "complete": s.complete,
            "note": s.note,
        }),
    )
}

fn grid_csv(f: &RayGridFunction) -> Result<Vec<u8>, Failure> {
    let mut buf = Vec::new();
    f.write_csv(&mut buf)?;
    Ok(buf)
}

fn converged(r: &SolveReport) -> Result<(), Failure> {
    if r.converged {
        Ok(())
    } else {
        Err(Failure::Numerical(format!("Picard iteration did not converge: {}", r.warnings.join("; "))))
    }
}

fn solve_borel(spec: &SpecFile, sets: Settings, art: &mut Artifacts) -> Result<(), Failure> {
    let cfg = sets.solve_config(spec)?;
    let rays = solve_all_rays(&spec.problem, &cfg)?;
    let mut reports = Vec::new();
    for (r, (theta, f, rep)) in rays.iter().enumerate() {
        let mut fits = Vec::new();
        for (l, comp) in f.iter().enumerate() {
            art.write(&format!("borel_ray{r}_c{l}.csv"), &grid_csv(comp)?)?;
            fits.push(match small_p_exponent(comp) {
                Ok(fit) => serde_json::to_value(fit).unwrap_or(Value::Null),
                Err(e) => json!({ "error": e.to_string() }),
            });
        }
        reports.push(json!({ "theta": theta, "report": rep, "small_p": fits }));
    }
    art.json("solve.json", &json!({ "problem": summary(spec), "config": cfg, "rays": reports }))?;
    rays.iter().try_for_each(|(_, _, r)| converged(r))
}

fn resum(spec: &SpecFile, mut sets: Settings, art: &mut Artifacts) -> Result<(), Failure> {
    let p = &spec.problem;
    let rho = p.sector.rho.max(1.0);
    let xs = sets.take_list("x", [2.0, 3.0, 4.0, 6.0, 8.0, 12.0, 16.0].iter().map(|m| m * rho).collect())?;
    let ts = sets.take_list("t", [0.25, 0.5, 0.75, 1.0].iter().map(|m| m * p.horizon).collect())?;
    let cfg = sets.solve_config(spec)?;
    let (f, rep) = solve(p, &cfg)?;
    let mut rows = Vec::new();
    let mut failed = Vec::new();
    for (l, comp) in f.iter().enumerate() {
        for &t in &ts {
            for &x in &xs {
                let z = Complex64::from_polar(x, -cfg.theta);
                match laplace_ray_at(comp, t, z) {
                    Ok(v) => rows.push(vec![l.to_string(), num(t), num(z.re), num(z.im), num(v.value.re), num(v.value.im), num(v.tail)]),
                    Err(e) => failed.push(json!({ "component": l, "t": t, "x": x, "error": e.to_string() })),
                }
            }
        }
    }
    art.csv("resum.csv", &["component", "t", "x_re", "x_im", "re_f", "im_f", "tail"], &rows)?;
    art.json("resum.json", &json!({ "problem": summary(spec), "config": cfg, "report": rep, "failed": failed }))?;
    converged(&rep)?;
    if rows.is_empty() {
        return Err(Failure::Numerical("the Laplace integral failed at every requested point".into()));
    }
    Ok(())
}

fn accelerate_cmd(spec: &SpecFile, mut sets: Settings, art: &mut Artifacts) -> Result<(), Failure> {
    let order: u32 = sets.take("order", 2)?;
    let nu: Option<f64> = sets.take_opt("growth_nu")?;
    let bound: Option<f64> = sets.take_opt("growth_bound")?;
    let component: usize = sets.take("component", 0)?;
    let ps = sets.take_list("p", vec![0.25, 0.5, 1.0, 2.0, 4.0])?;
    let xs = sets.take_list("identity_x", vec![1.0, 2.0, 4.0])?;
    let cfg = sets.solve_config(spec)?;
    let certificate = match (nu, bound) {
        (Some(nu), Some(bound)) => Some(GrowthCertificate { n: order, nu, bound }),
        _ => None,
    };
    if certificate.is_none() {
        // Checked before the solve: there is nothing to do without one.
        accelerate(&|_| Complex64::new(0.0, 0.0), None, &[], &[], &AccelerationSpec::new(order))?;
    }
    if component >= spec.problem.m {
        return Err(Failure::Validation(format!("component {component} out of range")));
    }
    let (f, rep) = solve(&spec.problem, &cfg)?;
    converged(&rep)?;
    let g = &f[component];
    let k = g.nt() - 1;
    let p_max = g.grid.p_max();
    // G is known on [0, p_max] only; both sides of the identity use the same truncation.
    let gfun = |q: f64| if q <= p_max { g.eval(q, k) } else { Complex64::new(0.0, 0.0) };
    let spec_a = AccelerationSpec { q_max: p_max, ..AccelerationSpec::new(order) };
    let res = accelerate(&gfun, certificate, &ps, &xs, &spec_a)?;
    let rows: Vec<Vec<String>> = res.g1_samples.iter().map(|(p, v, e)| vec![num(*p), num(v.re), num(v.im), num(*e)]).collect();
    art.csv("accelerate.csv", &["p", "re_g1", "im_g1", "kernel_error"], &rows)?;
    let identity: Vec<Value> = res
        .identity_check
        .iter()
        .map(|(x, a, b)| json!({ "x": x, "laplace_g": [a.re, a.im], "laplace_g1": [b.re, b.im], "abs_diff": (a - b).norm() }))
        .collect();
    art.json(
        "accelerate.json",
        &json!({
            "problem": summary(spec),
            "certificate": certificate,
            "acceleration": spec_a,
            "component": component,
            "t": g.times.t[k],
            "truncated_at_p": p_max,
            "kernel_error": res.kernel_error,
            "identity": identity,
        }),
    )
}

fn harry_dym(spec: &SpecFile, mut sets: Settings, art: &mut Artifacts) -> Result<(), Failure> {
    let order = spec.preset_order.ok_or_else(|| Failure::Validation("harry-dym needs a `[preset] name = harry-dym` spec".into()))?;
    let t: f64 = sets.take("t", spec.problem.horizon)?;
    let zetas = sets.take_list("zetas", vec![6.0, 8.0, 12.0, 16.0, 20.0, 30.0])?;
    let cfg = sets.solve_config(spec)?;
    let r = harry_dym_scaled(order, t, &cfg, &zetas)?;
    let rows: Vec<Vec<String>> = r.samples.iter().map(|s| vec![num(s.zeta), num(s.x), num(s.f_borel), num(s.f_series)]).collect();
    art.csv("hd_samples.csv", &["zeta", "x", "f_borel", "f_series"], &rows)?;
    let rows: Vec<Vec<String>> = r.g0.iter().map(|(z, g)| vec![num(*z), num(*g)]).collect();
    art.csv("hd_g0.csv", &["zeta", "g0"], &rows)?;
    let rows: Vec<Vec<String>> = r.g_k.iter().map(|(k, z, g)| vec![k.to_string(), num(*z), num(*g)]).collect();
    art.csv("hd_gk.csv", &["k", "zeta", "g_k"], &rows)?;
    art.json("harry_dym.json", &json!({ "config": cfg, "report": r }))?;
    converged(&r.solve)
}

fn oracle_compare(spec: &SpecFile, mut sets: Settings, art: &mut Artifacts) -> Result<(), Failure> {
    let p = &spec.problem;
    let snaps: usize = sets.take("snapshots", 4)?;
    let t_end: f64 = sets.take("t_end", p.horizon)?;
    let ocfg = OracleConfig {
        x_min: sets.take("x_min", (3.5f64).max(2.0 * p.sector.rho))?,
        x_max: sets.take("x_max", 22.0)?,
        h: sets.take("h", 0.1)?,
        dt: sets.take("dt", 2e-3)?,
        t_end,
        output_times: (1..=snaps.max(1)).map(|i| t_end * i as f64 / snaps.max(1) as f64).collect(),
    };
    let cfg = sets.solve_config(spec)?;
    if cfg.theta != 0.0 {
        return Err(Failure::Validation("oracle-compare works on the real ray (theta = 0)".into()));
    }
    if t_end > p.horizon {
        return Err(Failure::Validation(format!("t_end = {t_end} exceeds the horizon {}", p.horizon)));
    }
    let (f, rep) = solve(p, &cfg)?;
    converged(&rep)?;
    let borel = |x: f64, t: f64| laplace_ray_at(&f[0], t, Complex64::new(x, 0.0)).map(|v| v.value.re).unwrap_or(f64::NAN);
    // Strip values at both ends come from the resummed solution.
    let o = oracle_integrate(p, &ocfg, &borel)?;
    let mut rows = Vec::new();
    let mut per_snapshot = Vec::new();
    for (t, snap) in &o.snapshots {
        let mut worst = 0.0f64;
        for (x, v) in o.x.iter().zip(snap) {
            let b = borel(*x, *t);
            worst = if (b - v).is_finite() { worst.max((b - v).abs()) } else { f64::INFINITY };
            rows.push(vec![num(*t), num(*x), num(*v), num(b), num(b - v)]);
        }
        per_snapshot.push(json!({ "t": t, "max_abs_diff": worst }));
    }
    art.csv("oracle.csv", &["t", "x", "oracle", "borel", "diff"], &rows)?;
    art.json(
        "oracle.json",
        &json!({
            "problem": summary(spec),
            "oracle": ocfg,
            "solve": cfg,
            "steps": o.steps,
            "boundary": "resummed Borel solution on the end strips",
            "snapshots": per_snapshot,
        }),
    )?;
    if per_snapshot.iter().any(|s| !s["max_abs_diff"].as_f64().is_some_and(f64::is_finite)) {
        return Err(Failure::Numerical("non-finite values in the comparison".into()));
    }
    Ok(())
}
