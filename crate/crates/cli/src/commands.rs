use std::path::Path;

use anh_spectra::hmetric::{
    estimate_order, sigma_membership, verify_metric, DistortedMetric, OscillatorSpec, SampleConfig,
    ShellGrid,
};
use anh_spectra::liegrp::{sweep, GroupParams, GroupSymbolFamily, Stages};
use anh_spectra::oscspec::{spectrum_with_tol, Spectrum, DEFAULT_DELTA_N, DEFAULT_TOL_REL};
use anh_spectra::polycore::{Polynomial, SymbolExpr, VarLayout};
use anh_spectra::quantize::{
    composition_check, converged_trace, kn_compose_exact, op_trace, quantize, resolved_singular_values,
    symbol_hash, PhaseGrid,
};
use anh_spectra::specfn::{
    counting_fit, phase_space_integral, schatten_verdict, sv_csv, sv_decay_fit, weight_integrability,
    zeta_with, Scheme, SpecFnError, ZetaOptions,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::{Format, GroupKind, RunArgs};
use crate::error::CliError;

/// One output file.
#[derive(Clone, Debug)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

/// Files produced by a command; `main` is printed when there is no `--out`.
#[derive(Debug, Default)]
pub struct Outputs {
    pub files: Vec<Artifact>,
    pub main: usize,
}

impl Outputs {
    fn push(&mut self, name: impl Into<String>, bytes: Vec<u8>) -> usize {
        self.files.push(Artifact {
            name: name.into(),
            bytes,
        });
        self.files.len() - 1
    }

    fn push_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<usize, CliError> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        Ok(self.push(name, text.into_bytes()))
    }
}

/// Default quantization box and resolution.
const GRID_L: f64 = 8.0;
const GRID_M: usize = 256;
/// Default frequency range and resolution, relative to the x grid.
const XI_RANGE_FACTOR: f64 = 8.0;
const XI_POINTS_FACTOR: usize = 16;
/// Grid doubling stops once the trace moves by less than this.
const TRACE_REL_TOL: f64 = 0.005;
const TRACE_MAX_LEVELS: usize = 4;

fn default_basis(n: usize) -> usize {
    match n {
        1 => 400,
        2 => 40,
        _ => 12,
    }
}

fn default_delta_n(n: usize) -> usize {
    match n {
        1 => DEFAULT_DELTA_N,
        2 => 8,
        _ => 4,
    }
}

fn group_points(args: &RunArgs, kind: GroupKind) -> Result<Vec<GroupParams>, CliError> {
    let or = |v: &[f64], d: f64| if v.is_empty() { vec![d] } else { v.to_vec() };
    let mut out = Vec::new();
    match kind {
        GroupKind::Engel => {
            for &lambda in &or(&args.lambda, 1.0) {
                for &mu in &or(&args.mu, 0.0) {
                    out.push(GroupParams::Engel { lambda, mu });
                }
            }
        }
        GroupKind::Cartan => {
            for &kappa in &or(&args.kappa, 1.0) {
                for &nu in &or(&args.nu, 0.0) {
                    out.push(GroupParams::Cartan { kappa, nu });
                }
            }
        }
        GroupKind::Heisenberg => {
            let (k, l, n) = (args.k.unwrap_or(1), args.l.unwrap_or(1), args.n.unwrap_or(1));
            for &nu in &or(&args.nu, 1.0) {
                out.push(GroupParams::Heisenberg { nu, k, l, n });
            }
        }
    }
    Ok(out)
}

/// The operator named by the flags: a group family, or `p`/`q` text with
/// missing sides filled by `|x|^{2k}` and `|ξ|^{2ℓ}`.
pub fn resolve_spec(args: &RunArgs) -> Result<(OscillatorSpec, Option<GroupSymbolFamily>), CliError> {
    if let Some(kind) = args.group {
        let points = group_points(args, kind)?;
        if points.len() != 1 {
            return Err(CliError::invalid("this command takes a single group parameter point"));
        }
        let family = points[0].realize()?;
        return Ok((family.spec.clone(), Some(family)));
    }
    let n = args.n.unwrap_or(1);
    if args.harmonic && (args.k.unwrap_or(1) != 1 || args.l.unwrap_or(1) != 1) {
        return Err(CliError::invalid("--harmonic fixes k = l = 1"));
    }
    if n == 0 {
        return Err(CliError::invalid("--n must be at least 1"));
    }
    let (k, l) = (args.k.unwrap_or(1), args.l.unwrap_or(1));
    if k == 0 || l == 0 {
        return Err(CliError::invalid("--k and --l must be at least 1"));
    }
    let p = match &args.p {
        Some(t) => t.clone(),
        None => Polynomial::norm_power(n, k).to_text(VarLayout::X(n), true),
    };
    let q = match &args.q {
        Some(t) => t.clone(),
        None => Polynomial::norm_power(n, l).to_text(VarLayout::Xi(n), true),
    };
    let spec = OscillatorSpec::parse(n, &p, &q, args.p0.unwrap_or(0.5), args.q0.unwrap_or(0.5))?;
    if args.k.is_some_and(|k| k != spec.k()) || args.l.is_some_and(|l| l != spec.l()) {
        return Err(CliError::invalid(format!(
            "--k/--l disagree with the polynomial degrees (k = {}, l = {})",
            spec.k(),
            spec.l()
        )));
    }
    Ok((spec, None))
}

fn compute_spectrum(spec: &OscillatorSpec, args: &RunArgs) -> Result<Spectrum, CliError> {
    let basis = args.basis.unwrap_or_else(|| default_basis(spec.n()));
    let delta = args.delta_n.unwrap_or_else(|| default_delta_n(spec.n()));
    Ok(spectrum_with_tol(spec, basis, delta, args.tol.unwrap_or(DEFAULT_TOL_REL))?)
}

fn spectrum_info(sp: &Spectrum) -> Value {
    json!({
        "N": sp.basis_size,
        "dN": sp.delta_n,
        "tol_rel": sp.tol_rel,
        "converged_count": sp.converged_count,
    })
}

fn group_info(family: &Option<GroupSymbolFamily>) -> Value {
    match family {
        Some(f) => json!({ "params": f.params, "normalizer": f.normalizer }),
        None => Value::Null,
    }
}

pub fn eig(args: &RunArgs) -> Result<Outputs, CliError> {
    let (spec, _) = resolve_spec(args)?;
    let sp = compute_spectrum(&spec, args)?;
    let mut out = Outputs::default();
    match args.format.unwrap_or(Format::Csv) {
        Format::Csv => out.push("spectrum.csv", sp.to_csv().into_bytes()),
        Format::Json => out.push_json("spectrum.json", &sp)?,
    };
    Ok(out)
}

pub fn zeta(args: &RunArgs) -> Result<Outputs, CliError> {
    let s = args.s.ok_or_else(|| CliError::invalid("zeta needs --s"))?;
    let (spec, family) = resolve_spec(args)?;
    let sp = compute_spectrum(&spec, args)?;
    let opts = ZetaOptions {
        j_cut: args.j_cut,
        tail: !args.no_tail,
    };
    let z = zeta_with(&sp, s, opts)?;
    let mut out = Outputs::default();
    out.push_json(
        "zeta.json",
        &json!({
            "spec": sp.spec,
            "group": group_info(&family),
            "spectrum": spectrum_info(&sp),
            "zeta": z,
        }),
    )?;
    Ok(out)
}

pub fn counting(args: &RunArgs) -> Result<Outputs, CliError> {
    let (spec, family) = resolve_spec(args)?;
    let sp = compute_spectrum(&spec, args)?;
    let fit = counting_fit(&sp)?;
    let mut out = Outputs::default();
    let report = out.push_json(
        "counting.json",
        &json!({
            "spec": sp.spec,
            "group": group_info(&family),
            "spectrum": spectrum_info(&sp),
            "counting": fit,
            "relative_deviation": fit.relative_deviation(),
        }),
    )?;
    let csv = out.push("staircase.csv", fit.to_csv().into_bytes());
    out.main = if args.format == Some(Format::Csv) { csv } else { report };
    Ok(out)
}

pub fn schatten(args: &RunArgs) -> Result<Outputs, CliError> {
    let powers = args.powers();
    if powers.is_empty() {
        return Err(CliError::invalid("schatten needs --gamma (or --mu without --group)"));
    }
    let rs = if args.r.is_empty() { vec![1.0] } else { args.r.clone() };
    let (spec, family) = resolve_spec(args)?;
    let sp = compute_spectrum(&spec, args)?;
    let mut reports = Vec::new();
    for &gamma in &powers {
        for &r in &rs {
            let verdict = schatten_verdict(&sp, gamma, r)?;
            // (1 + T)^{-γ} behaves like λ_g^{-γ/e} with λ_g = W^e
            let weight = weight_integrability(&spec, gamma / spec.lambda_exponent(), r)?;
            reports.push(json!({ "gamma": gamma, "r": r, "schatten": verdict, "weight": weight }));
        }
    }
    let mut out = Outputs::default();
    out.push_json(
        "schatten.json",
        &json!({
            "spec": sp.spec,
            "group": group_info(&family),
            "spectrum": spectrum_info(&sp),
            "reports": reports,
        }),
    )?;
    Ok(out)
}

fn trace_grid(args: &RunArgs) -> Result<PhaseGrid, CliError> {
    let lx = args.grid_l.unwrap_or(GRID_L);
    let mx = args.grid_m.unwrap_or(GRID_M);
    let lxi = args.grid_lxi.unwrap_or(XI_RANGE_FACTOR * lx);
    let mxi = args.grid_mxi.unwrap_or(XI_POINTS_FACTOR * mx);
    Ok(PhaseGrid::new(lx, mx, lxi, mxi)?)
}

fn decaying_symbol(args: &RunArgs) -> Result<(String, f64, SymbolExpr), CliError> {
    let (text, power) = match &args.symbol {
        Some(t) => (t.clone(), args.power.unwrap_or(1.0)),
        None => ("1 + x1^2 + xi1^2".to_string(), args.power.unwrap_or(-2.0)),
    };
    let base = SymbolExpr::parse_poly(&text, 1)?;
    let a = if power == 1.0 { base } else { SymbolExpr::power(base, power)? };
    Ok((text, power, a))
}

pub fn trace(args: &RunArgs, out_dir: Option<&Path>) -> Result<Outputs, CliError> {
    let (text, power, a) = decaying_symbol(args)?;
    let t = args.t.unwrap_or(0.5);
    let grid = trace_grid(args)?;
    let op = quantize(&a, t, &grid)?;
    let tr = op_trace(&op);
    let refinement = converged_trace(&a, &grid, TRACE_REL_TOL, TRACE_MAX_LEVELS)?;
    let integral = match phase_space_integral(&a, Scheme::Polar) {
        Ok(v) => Some(v),
        Err(SpecFnError::NotIntegrable { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    let deviation = integral.as_ref().map(|i| (tr.re - i.value) / i.value);
    let mut out = Outputs::default();
    let mut singular = Value::Null;
    let mut sv_rows = None;
    if !args.r.is_empty() {
        let fine = grid.mx + grid.mx / 3;
        let sv = resolved_singular_values(&a, t, grid.lx, grid.mx, fine)?;
        let decay = args
            .r
            .iter()
            .map(|&r| sv_decay_fit(sv.resolved_values(), r))
            .collect::<Result<Vec<_>, _>>()?;
        singular = json!({
            "computed": sv.values.len(),
            "resolved": sv.resolved,
            "grid": sv.grid,
            "fine_grid": sv.fine_grid,
            "decay": decay,
        });
        sv_rows = Some(sv_csv(sv.resolved_values()));
    }
    out.push_json(
        "trace.json",
        &json!({
            "symbol": text,
            "power": power,
            "symbol_hash": symbol_hash(&a),
            "t": t,
            "grid": grid,
            "trace": { "re": tr.re, "im": tr.im },
            "hermitian": op.is_hermitian(1e-12),
            "phase_space_integral": integral,
            "relative_deviation": deviation,
            "refinement": refinement,
            "singular_values": singular,
        }),
    )?;
    if let Some(rows) = sv_rows {
        out.push("sv.csv", rows.into_bytes());
    }
    if args.export {
        let dir = out_dir.ok_or_else(|| CliError::invalid("--export needs --out"))?;
        std::fs::create_dir_all(dir)?;
        let path = dir.join("operator.bin");
        op.export(&path)?;
        out.push("operator.bin", std::fs::read(&path)?);
        out.push("operator.bin.hdr", std::fs::read(dir.join("operator.bin.hdr"))?);
    }
    Ok(out)
}

pub fn verify_symbol(args: &RunArgs) -> Result<Outputs, CliError> {
    let (a, k, l, normalizer) = match &args.symbol {
        Some(text) => {
            let base = SymbolExpr::parse_poly(text, args.n.unwrap_or(1))?;
            let a = match args.power {
                Some(pw) if pw != 1.0 => SymbolExpr::power(base, pw)?,
                _ => base,
            };
            (a, args.k.unwrap_or(1), args.l.unwrap_or(1), 1.0)
        }
        None => {
            let (spec, family) = resolve_spec(args)?;
            let norm = family.map_or(1.0, |f| f.normalizer);
            (spec.symbol_expr(), spec.k(), spec.l(), norm)
        }
    };
    if k == 0 || l == 0 {
        return Err(CliError::invalid("--k and --l must be at least 1"));
    }
    let order = estimate_order(&a, k, l, &ShellGrid::order_default())?;
    let membership = match args.m {
        Some(m) => Some(sigma_membership(
            &a,
            k,
            l,
            m,
            args.order.unwrap_or(2),
            &ShellGrid::membership_default(),
            normalizer,
        )?),
        None => None,
    };
    let mut out = Outputs::default();
    out.push_json(
        "symbol.json",
        &json!({
            "symbol_hash": symbol_hash(&a),
            "k": k,
            "l": l,
            "order": order,
            "membership": membership,
        }),
    )?;
    Ok(out)
}

pub fn verify_metric_cmd(args: &RunArgs) -> Result<Outputs, CliError> {
    let (spec, family) = resolve_spec(args)?;
    let defaults = SampleConfig::default();
    let cfg = SampleConfig {
        pairs: args.samples.unwrap_or(defaults.pairs),
        seed: args.seed.unwrap_or(defaults.seed),
        ..defaults
    };
    if cfg.pairs == 0 {
        return Err(CliError::invalid("--samples must be positive"));
    }
    let report = match args.distort {
        Some(x_exponent) => verify_metric(
            &DistortedMetric {
                spec: spec.clone(),
                x_exponent,
            },
            &cfg,
        ),
        None => verify_metric(&spec, &cfg),
    };
    let mut out = Outputs::default();
    out.push_json(
        "metric.json",
        &json!({
            "spec": spec.summary(),
            "group": group_info(&family),
            "distort": args.distort,
            "samples": cfg.pairs,
            "seed": cfg.seed,
            "pass": report.pass(),
            "report": report,
        }),
    )?;
    Ok(out)
}

pub fn compose(args: &RunArgs) -> Result<Outputs, CliError> {
    let a_text = args.a.clone().unwrap_or_else(|| "xi1^2".into());
    let b_text = args.b.clone().unwrap_or_else(|| "x1^2".into());
    let a = SymbolExpr::parse_poly(&a_text, 1)?;
    let b = SymbolExpr::parse_poly(&b_text, 1)?;
    let c = kn_compose_exact(&a, &b)?;
    let lx = args.grid_l.unwrap_or(GRID_L);
    let mx = args.grid_m.unwrap_or(GRID_M);
    // the spectral grid reaches |ξ| = M/(4L)
    let window = (lx / 2.0, mx as f64 / (8.0 * lx));
    let check = composition_check(&a, &b, lx, mx, window)?;
    let terms: Vec<Value> = c
        .terms
        .iter()
        .map(|t| {
            json!({
                "alpha": t.alpha,
                "coefficient": [t.coefficient.re, t.coefficient.im],
                "poly": t.poly.to_text(VarLayout::Joint(c.n), false),
            })
        })
        .collect();
    let mut out = Outputs::default();
    out.push_json(
        "compose.json",
        &json!({
            "a": a_text,
            "b": b_text,
            "max_order": c.max_order(),
            "terms": terms,
            "check": check,
        }),
    )?;
    Ok(out)
}

pub fn group(args: &RunArgs) -> Result<Outputs, CliError> {
    let kind = args.group.ok_or_else(|| CliError::invalid("group needs --group engel|cartan|heisenberg"))?;
    let points = group_points(args, kind)?;
    // invalid parameters are input errors; the sweep only isolates numeric failures
    for p in &points {
        p.realize()?;
    }
    let n = match kind {
        GroupKind::Heisenberg => args.n.unwrap_or(1),
        _ => 1,
    };
    let rs = if args.r.is_empty() { vec![1.0] } else { args.r.clone() };
    let schatten = args
        .gamma
        .iter()
        .flat_map(|&g| rs.iter().map(move |&r| (g, r)))
        .collect();
    let stages = Stages {
        per_axis: args.basis.unwrap_or_else(|| default_basis(n)),
        delta_n: args.delta_n.unwrap_or_else(|| default_delta_n(n)),
        zeta_s: args.s,
        counting: true,
        schatten,
    };
    let bundle = sweep(&points, &stages);
    let mut out = Outputs::default();
    out.main = out.push_json("bundle.json", &json!({ "stages": stages, "points": bundle.points }))?;
    let table = out.push("table.csv", bundle.table_csv().into_bytes());
    if args.format == Some(Format::Csv) {
        out.main = table;
    }
    for (i, p) in bundle.points.iter().enumerate() {
        out.push_json(&format!("points/point_{i:03}.json"), p)?;
    }
    Ok(out)
}
