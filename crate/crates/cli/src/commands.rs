//! One handler per subcommand. Each returns whether the run passed; errors
//! are mapped to exit codes in `main`.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use mather_core::diffeo::{self, Cover, Preset};
use mather_core::flow::{make_rho, trajectory_chart, TimeMap};
use mather_core::mather::{conjugator, gamma_roll, omega_spread, psi_reduce, MatherConfig};
use mather_core::modulus::{
    check_modulus_laws, classify_tameness, concavity_defect, default_t_grid, default_x_grid, holder, sub_functional,
    sup_functional,
};
use mather_core::norms::{self, BallKind, BallQuery, MetricKind};
use mather_core::perfect::{fixed_point_search, rescale_to_norm, verify_certificate, CertificateChain};
use mather_core::suite::{lcm_sandwich_table, reduction_sweep, run_criterion, CriterionReport};
use mather_core::{Diffeo1, Tolerances};
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::*;
use crate::config::{tolerance_names, RunConfig};
use crate::output::{write_csv, write_json};

/// A malformed command line that clap could not catch; exits with status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

pub fn run(cmd: Command, cfg: &mut RunConfig) -> Result<bool> {
    match cmd {
        Command::Modulus { cmd: ModulusCmd::Analyze { holder } } => modulus_analyze(cfg, holder),
        Command::Diffeo { cmd } => diffeo_cmd(cfg, cmd),
        Command::Norms { cmd } => norms_cmd(cfg, cmd),
        Command::Flow { cmd: FlowCmd::Table { t } } => flow_table(cfg, t),
        Command::Mather { cmd } => mather_cmd(cfg, cmd),
        Command::Perfect { cmd: PerfectCmd::Fixpoint { input } } => perfect_fixpoint(cfg, &input),
        Command::Perfect { cmd: PerfectCmd::Verify { chain, threshold } } => perfect_verify(cfg, &chain, threshold),
        Command::Verify { suite } => verify_suite(cfg, &suite),
        Command::EmitPlots { tables } => emit_plots(cfg, &tables),
        Command::Tolerances => {
            let defaults = serde_json::to_value(Tolerances::default())?;
            for name in tolerance_names() {
                println!("--tol-{}  {}", name.trim_start_matches("tol_").replace('_', "-"), defaults[&name]);
            }
            Ok(true)
        }
    }
}

fn read_diffeo(path: &Path, tol: &Tolerances) -> Result<Diffeo1> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Diffeo1::from_json(&text, tol).with_context(|| format!("loading {}", path.display()))
}

fn read_pair(paths: &[PathBuf], tol: &Tolerances) -> Result<(Diffeo1, Diffeo1)> {
    match paths {
        [a, b] => Ok((read_diffeo(a, tol)?, read_diffeo(b, tol)?)),
        _ => Err(usage(format!("expected exactly two --in files, got {}", paths.len()))),
    }
}

fn mather_config(cfg: &RunConfig) -> Result<MatherConfig> {
    Ok(MatherConfig::new(cfg.k, cfg.modulus()?, cfg.a)?)
}

fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(|_| usage(format!("bad {what} entry {s:?}"))))
        .collect()
}

fn modulus_analyze(cfg: &mut RunConfig, holder_exp: Option<f64>) -> Result<bool> {
    if let Some(s) = holder_exp {
        holder(s)?;
        cfg.alpha = format!("holder:{s}");
    }
    let alpha = cfg.modulus()?;
    let x_grid = default_x_grid::<f64>();
    let verdict = classify_tameness(&alpha, &default_t_grid(), &x_grid);
    let laws: Vec<Value> =
        [0.5, 2.0].iter().map(|&c| json!({ "c": c, "report": check_modulus_laws(&alpha, c, &x_grid) })).collect();
    let body = json!({
        "modulus": alpha,
        "verdict": verdict,
        "laws": laws,
        "concavity_defect": concavity_defect(&alpha, &x_grid),
    });
    println!("sup-tame: {:?}\nsub-tame: {:?}", verdict.sup_tame, verdict.sub_tame);
    write_json(&cfg.output_path("verdict.json"), cfg, &body)?;
    Ok(true)
}

fn diffeo_cmd(cfg: &RunConfig, cmd: DiffeoCmd) -> Result<bool> {
    let tol = &cfg.tolerances;
    match cmd {
        DiffeoCmd::Preset { name, params } => {
            let mut params: Value =
                serde_json::from_str(&params).map_err(|e| usage(format!("--params is not JSON: {e}")))?;
            let obj = params.as_object_mut().ok_or_else(|| usage("--params must be a JSON object"))?;
            obj.entry("k").or_insert(json!(cfg.k));
            obj.entry("n").or_insert(json!(cfg.grid_n));
            let f = diffeo::from_preset(&name, &params, tol)?;
            println!("{name}: {} nodes on [{}, {}]", f.grid.n, f.grid.a, f.grid.b);
            write_json(&cfg.output_path(&format!("{name}.json")), cfg, &f)?;
        }
        DiffeoCmd::Compose { inputs } => {
            let (f, g) = read_pair(&inputs, tol)?;
            let fg = diffeo::compose(&f, &g, tol)?;
            write_json(&cfg.output_path("composed.json"), cfg, &fg)?;
        }
        DiffeoCmd::Inverse { input } => {
            let f = read_diffeo(&input, tol)?;
            let inv = diffeo::inverse(&f, tol)?;
            write_json(&cfg.output_path("inverse.json"), cfg, &inv)?;
        }
        DiffeoCmd::Fragment { input, cover, reconstruction_tol } => {
            let f = read_diffeo(&input, tol)?;
            let elements = cover
                .split(',')
                .map(|pair| {
                    let (lo, hi) =
                        pair.split_once(':').ok_or_else(|| usage(format!("cover element {pair:?} is not lo:hi")))?;
                    let parse = |s: &str| s.trim().parse::<f64>().map_err(|_| usage(format!("bad number {s:?}")));
                    Ok((parse(lo)?, parse(hi)?))
                })
                .collect::<Result<Vec<_>>>()?;
            let frag = diffeo::fragment(&f, &Cover::new(elements)?, reconstruction_tol, tol)?;
            println!(
                "{} fragments, reconstruction error {:.3e}",
                frag.fragments.len(),
                frag.reconstruction_error
            );
            let body = json!({
                "fragments": frag.fragments,
                "lipschitz_constant": frag.lipschitz_constant,
                "epsilon": frag.epsilon,
                "reconstruction_error": frag.reconstruction_error,
            });
            write_json(&cfg.output_path("fragments.json"), cfg, &body)?;
        }
    }
    Ok(true)
}

fn norms_cmd(cfg: &RunConfig, cmd: NormsCmd) -> Result<bool> {
    let tol = &cfg.tolerances;
    let alpha = cfg.modulus()?;
    match cmd {
        NormsCmd::Report { input, delta } => {
            let f = read_diffeo(&input, tol)?;
            let queries: Vec<BallQuery> = match delta {
                Some(d) => [BallKind::Ck, BallKind::CkAlpha]
                    .into_iter()
                    .map(|kind| BallQuery { kind, delta: d, within: None })
                    .collect(),
                None => Vec::new(),
            };
            let report = norms::norm_report(&f, &alpha, &queries, tol);
            println!("m_k = {:.6e}, [f^(k) - Id^(k)]_alpha = {:.6e}", report.m_k, report.holder(report.k));
            write_json(&cfg.output_path("norms.json"), cfg, &report)?;
        }
        NormsCmd::Metric { inputs, kind } => {
            let (f, g) = read_pair(&inputs, tol)?;
            let kind = match kind {
                MetricArg::C0 => MetricKind::C0,
                MetricArg::Ck => MetricKind::Ck,
                MetricArg::CkAlpha => MetricKind::CkAlpha,
            };
            let d = norms::metric(&f, &g, kind, Some(&alpha), tol)?;
            println!("{kind:?} distance {d:.6e}");
            write_json(&cfg.output_path("metric.json"), cfg, &json!({ "kind": kind, "distance": d }))?;
        }
    }
    Ok(true)
}

#[derive(Serialize)]
struct FlowRow {
    x: f64,
    rho: f64,
    tau_t: f64,
    phi: f64,
}

fn flow_table(cfg: &RunConfig, t: f64) -> Result<bool> {
    let field = make_rho(cfg.a)?;
    let tau = TimeMap::new(field, t, &cfg.tolerances);
    let chart = trajectory_chart(&field, &cfg.tolerances);
    let half = 2.0 * cfg.a as f64 + 1.5;
    let n = cfg.grid_n;
    let rows = (0..n)
        .map(|i| {
            let x = -half + 2.0 * half * i as f64 / (n - 1) as f64;
            Ok(FlowRow { x, rho: field.value(x), tau_t: tau.try_jet(x, 0)?.value(), phi: chart.try_value(x)? })
        })
        .collect::<Result<Vec<_>>>()?;
    write_csv(&cfg.output_path("flow.csv"), cfg, &["x", "rho", "tau_t", "phi"], &rows)?;
    Ok(true)
}

fn mather_cmd(cfg: &RunConfig, cmd: MatherCmd) -> Result<bool> {
    let tol = &cfg.tolerances;
    match cmd {
        MatherCmd::Gamma { input } => {
            let g = read_diffeo(&input, tol)?;
            let rolled = gamma_roll(&g, tol)?;
            write_json(&cfg.output_path("gamma.json"), cfg, &rolled)?;
        }
        MatherCmd::Omega { input, b } => {
            let mc = mather_config(cfg)?;
            let g = read_diffeo(&input, tol)?;
            let spread = omega_spread(&g, b.unwrap_or(mc.b), mc.eps0, tol)?;
            write_json(&cfg.output_path("omega.json"), cfg, &spread)?;
        }
        MatherCmd::Psi { input: Some(input), .. } => {
            let mc = mather_config(cfg)?;
            let g = read_diffeo(&input, tol)?;
            let out = psi_reduce(&g, &mc, tol)?;
            println!("norm in {:.6e}, norm out {:.6e}, ratio {:.6}", out.norm_in, out.norm_out, out.ratio);
            write_json(&cfg.output_path("psi.json"), cfg, &json!({ "mather_config": mc, "outcome": out }))?;
        }
        MatherCmd::Psi { input: None, sweep } => {
            let amps: Vec<u32> = parse_list(sweep.as_deref().unwrap_or_default(), "--sweep")?;
            if amps.is_empty() || amps.contains(&0) {
                return Err(usage("--sweep needs positive integers"));
            }
            let rows: Vec<(u32, f64, f64, f64)> = reduction_sweep(&amps, cfg.k, &cfg.modulus()?, tol)?
                .into_iter()
                .map(|(a, nin, nout)| (a, nin, nout, nout / nin))
                .collect();
            for r in &rows {
                println!("A = {:>3}: ratio {:.6}", r.0, r.3);
            }
            write_csv(&cfg.output_path("psi_sweep.csv"), cfg, &["A", "norm_in", "norm_out", "ratio"], &rows)?;
        }
        MatherCmd::Lambda { inputs } => {
            let (u, v) = read_pair(&inputs, tol)?;
            let cert = conjugator(&u, &v, &make_rho(cfg.a)?, tol)?;
            println!("b = {:.12}, residual {:.3e}", cert.b, cert.residual);
            write_json(&cfg.output_path("lambda.json"), cfg, &cert)?;
        }
    }
    Ok(true)
}

fn perfect_fixpoint(cfg: &RunConfig, input: &Path) -> Result<bool> {
    let mc = mather_config(cfg)?;
    let f = read_diffeo(input, &cfg.tolerances)?;
    let result = fixed_point_search(&f, &mc, &cfg.tolerances)?;
    println!("{} iterations, residual {:.3e}", result.iterations, result.residual);
    match &result.chain {
        Some(chain) => {
            write_json(&cfg.output_path("chain.json"), cfg, chain)?;
            Ok(true)
        }
        None => {
            eprintln!("no convergence after {} iterations; writing the trace", result.iterations);
            write_json(&cfg.output_path("fixpoint.json"), cfg, &result)?;
            Ok(false)
        }
    }
}

fn perfect_verify(cfg: &RunConfig, path: &Path, threshold: Option<f64>) -> Result<bool> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let chain = CertificateChain::from_json(&text)?;
    let report = verify_certificate(&chain, threshold.unwrap_or(chain.tolerances.certificate))?;
    for c in &report.checks {
        println!(
            "{} {}: stored {:.3e}, recomputed {:.3e}, threshold {:.1e}",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.stored,
            c.recomputed,
            c.threshold
        );
    }
    write_json(&cfg.output_path("verify_report.json"), cfg, &report)?;
    Ok(report.pass)
}

fn verify_suite(cfg: &RunConfig, suite: &str) -> Result<bool> {
    let ids: Vec<u8> = if suite.trim() == "all" { (1..=10).collect() } else { parse_list(suite, "--suite")? };
    if let Some(bad) = ids.iter().find(|id| !(1..=10).contains(*id)) {
        return Err(usage(format!("no criterion {bad}; ids run from 1 to 10")));
    }
    let mut reports = Vec::with_capacity(ids.len());
    for id in ids {
        let rep = run_criterion(id, cfg.seed, &cfg.tolerances).unwrap_or_else(|e| CriterionReport {
            id,
            name: format!("criterion {id}"),
            pass: false,
            detail: format!("error: {e}"),
            metrics: Default::default(),
        });
        println!("{}", rep.line());
        reports.push(rep);
    }
    let pass = reports.iter().all(|r| r.pass);
    let slacks: Vec<(u8, &str, &str, f64)> = reports
        .iter()
        .flat_map(|r| r.metrics.iter().map(move |(m, v)| (r.id, r.name.as_str(), m.as_str(), *v)))
        .collect();
    write_json(&cfg.out.join("report.json"), cfg, &json!({ "pass": pass, "criteria": reports }))?;
    write_csv(&cfg.out.join("slacks.csv"), cfg, &["criterion", "name", "metric", "value"], &slacks)?;
    Ok(pass)
}

fn emit_plots(cfg: &RunConfig, tables: &str) -> Result<bool> {
    let tol = &cfg.tolerances;
    let alpha = cfg.modulus()?;
    let names: Vec<String> = parse_list(tables, "--tables")?;
    for name in &names {
        match name.as_str() {
            "sweep" => {
                let raw = reduction_sweep(&[1, 2, 4, 8], cfg.k, &alpha, tol)?;
                let base = raw[0].2 / raw[0].1;
                let rows: Vec<(u32, f64, f64, f64, f64)> = raw
                    .iter()
                    .map(|&(a, nin, nout)| (a, nin, nout, nout / nin, (nout / nin) / base))
                    .collect();
                write_csv(
                    &cfg.out.join("reduction_sweep.csv"),
                    cfg,
                    &["A", "norm_in", "norm_out", "ratio", "ratio_over_a1"],
                    &rows,
                )?;
            }
            "tameness" => {
                let xs = default_x_grid::<f64>();
                let rows: Vec<(f64, f64, f64)> = default_t_grid::<f64>()
                    .into_iter()
                    .map(|t| (t, sup_functional(&alpha, t, &xs), sub_functional(&alpha, t, &xs)))
                    .collect();
                write_csv(&cfg.out.join("tameness.csv"), cfg, &["t", "F", "G"], &rows)?;
            }
            "lcm" => {
                let rows: Vec<(f64, f64, f64, f64)> =
                    lcm_sandwich_table(cfg.seed)?.into_iter().map(|(t, mu, b)| (t, mu, b, 2.0 * mu)).collect();
                write_csv(&cfg.out.join("lcm_sandwich.csv"), cfg, &["t", "mu", "beta0", "two_mu"], &rows)?;
            }
            "trace" => {
                let mc = mather_config(cfg)?;
                let bump = Preset::SmoothBumpDisplacement { eps: 1e-5, c: 0.0, r: 1.5, k: cfg.k, n: cfg.grid_n };
                let f = rescale_to_norm(&bump.build(tol)?, mc.delta0, &alpha, tol)?;
                let result = fixed_point_search(&f, &mc, tol)?;
                let rows: Vec<(usize, f64)> = result.trace.iter().copied().enumerate().map(|(i, r)| (i + 1, r)).collect();
                write_csv(&cfg.out.join("residual_trace.csv"), cfg, &["iteration", "residual"], &rows)?;
            }
            other => return Err(usage(format!("unknown table {other:?}; choose from sweep,tameness,lcm,trace"))),
        }
    }
    Ok(true)
}
