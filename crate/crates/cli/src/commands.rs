use std::fs;
use std::io::{self, Write};
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use num_complex::Complex64;
use psfmat::applications::default_state;
use psfmat::contour::{
    contour_error_bounds, decompose_error, default_radii, discrete_sum_apply, plan_m, ContourPlan,
};
use psfmat::costmodel::{compare_paths, path_a_cost, path_b_cost, CostReport, Problem, Target};
use psfmat::fourier::{assemble_fourier_approx, error_bounds, l1_norm_estimate, plan_fourier_with_kernel};
use psfmat::functions::{sampled_sup, SUP_SAMPLES};
use psfmat::spectral::psd_eig;
use psfmat::{
    eig, run_application, AppOptions, ConvergenceRecord, DenseMatrix, FunctionSpec, GridSpec, InstanceGenerator,
    SpectralProfile, StateVector, TimeKernel,
};
use rayon::prelude::*;

use crate::cli::*;
use crate::io::{read_matrix, read_state, state_to_json};

struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }
}

fn write_table(out: &OutputArgs, mut table: Table, elapsed: Option<f64>) -> Result<()> {
    if let Some(ms) = elapsed.filter(|_| out.timing) {
        table.header.push("wall_time_ms".into());
        for row in &mut table.rows {
            row.push(ms.to_string());
        }
    }
    let sink: Box<dyn Write> = match &out.out {
        Some(path) => Box::new(fs::File::create(path).with_context(|| format!("creating {}", path.display()))?),
        None => Box::new(io::stdout().lock()),
    };
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(&table.header)?;
    for row in &table.rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

fn write_text(out: &OutputArgs, text: &str) -> Result<()> {
    match &out.out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            Ok(stdout.flush()?)
        }
    }
}

/// Human summary: stdout when data went to a file, stderr otherwise.
fn summary(out: &OutputArgs, line: &str) {
    if out.out.is_some() {
        println!("{line}");
    } else {
        eprintln!("{line}");
    }
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// `start:stop:step` (inclusive) or a comma list.
pub fn parse_list<T>(s: &str) -> Result<Vec<T>>
where
    T: FromStr + Copy + PartialOrd + std::ops::Add<Output = T>,
    T::Err: std::fmt::Display,
{
    let parse = |t: &str| t.trim().parse::<T>().map_err(|e| anyhow!("`{t}`: {e}"));
    let parts: Vec<&str> = s.split(':').collect();
    let values = match parts.as_slice() {
        [start, stop, step] => {
            let (start, stop, step) = (parse(start)?, parse(stop)?, parse(step)?);
            if !(start + step > start) {
                bail!("range `{s}` needs a positive step");
            }
            let mut v = Vec::new();
            let mut x = start;
            while x <= stop {
                v.push(x);
                x = x + step;
            }
            v
        }
        [_] => s.split(',').map(parse).collect::<Result<_>>()?,
        _ => bail!("expected `start:stop:step` or a comma list, got `{s}`"),
    };
    if values.is_empty() {
        bail!("`{s}` is empty");
    }
    Ok(values)
}

fn profile(args: &ProfileArgs) -> Result<SpectralProfile> {
    Ok(SpectralProfile::new(args.alpha, args.t, args.mode)?)
}

pub fn plan(args: PlanArgs) -> Result<()> {
    let start = Instant::now();
    let prof = profile(&args.profile)?;
    let kern = TimeKernel::new(prof);
    let mut plan = plan_fourier_with_kernel(&prof, args.hnorm, args.eps, &kern)?;
    if args.coefficients {
        plan = plan.with_coefficients(&kern)?;
    }
    let bounds = error_bounds(&plan, args.hnorm);
    let line = format!(
        "regime {} p {} a {} K {} truncation {:.3e} aliasing {:.3e}",
        plan.regime,
        prof.p(),
        plan.a,
        plan.k_max,
        bounds.truncation,
        bounds.aliasing
    );
    if args.json {
        write_text(&args.output, &(plan.to_json() + "\n"))?;
    } else {
        let mut table = Table::new(&[
            "alpha",
            "T",
            "mode",
            "p",
            "regime",
            "hnorm",
            "eps_internal",
            "a",
            "K",
            "K_over_a",
            "truncation_bound",
            "aliasing_bound",
        ]);
        table.rows.push(vec![
            prof.alpha.to_string(),
            prof.t.to_string(),
            prof.mode.to_string(),
            prof.p().to_string(),
            plan.regime.to_string(),
            args.hnorm.to_string(),
            plan.eps_internal.to_string(),
            plan.a.to_string(),
            plan.k_max.to_string(),
            plan.k_over_a().to_string(),
            bounds.truncation.to_string(),
            bounds.aliasing.to_string(),
        ]);
        write_table(&args.output, table, Some(elapsed_ms(start)))?;
    }
    summary(&args.output, &line);
    Ok(())
}

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

pub fn kernel(args: KernelArgs) -> Result<()> {
    let start = Instant::now();
    let prof = profile(&args.profile)?;
    let kern = TimeKernel::new(prof);
    if args.count < 2 {
        bail!("--count must be at least 2");
    }
    if !(args.x_max > args.x_min) {
        bail!("--x-max must exceed --x-min");
    }
    let xs: Vec<f64> = if args.log {
        if !(args.x_min > 0.0) {
            bail!("--log needs --x-min > 0");
        }
        let (l0, l1) = (args.x_min.ln(), args.x_max.ln());
        (0..args.count)
            .map(|i| (l0 + (l1 - l0) * i as f64 / (args.count - 1) as f64).exp())
            .collect()
    } else {
        let dx = (args.x_max - args.x_min) / (args.count - 1) as f64;
        (0..args.count).map(|i| args.x_min + dx * i as f64).collect()
    };
    let values: Vec<f64> = if args.log {
        xs.iter().map(|&x| kern.value(x)).collect()
    } else {
        kern.values_on_grid(xs[0], xs[1] - xs[0], xs.len())
    };
    let mut table = Table::new(&["x", "f"]);
    table.rows = xs.iter().zip(&values).map(|(x, f)| vec![x.to_string(), f.to_string()]).collect();
    let mut line = format!("kernel p {} regime {}", prof.p(), prof.regime());
    if args.l1 {
        let est = l1_norm_estimate(&kern);
        line += &format!(" L1 {} ({:?})", est.value, est.regime);
    }
    write_table(&args.output, table, Some(elapsed_ms(start)))?;
    summary(&args.output, &line);
    Ok(())
}

pub fn simulate_fourier(args: FourierArgs) -> Result<()> {
    let start = Instant::now();
    let prof = profile(&args.profile)?;
    let mut gen = InstanceGenerator::new(args.seed);
    let h = match &args.matrix {
        Some(path) => read_matrix(path)?,
        None => gen.psd_with_norm(args.n, args.hnorm),
    };
    if !h.is_hermitian() {
        bail!(psfmat::PsfError::NotHermitian {
            residual: h.hermitian_residual()
        });
    }
    let u0 = match &args.state {
        Some(path) => read_state(path)?,
        None => gen.state(h.rows()),
    };
    let hnorm = if args.matrix.is_some() { h.spectral_norm() } else { args.hnorm };
    let kern = TimeKernel::new(prof);
    let plan = plan_fourier_with_kernel(&prof, hnorm, args.eps, &kern)?.with_coefficients(&kern)?;
    let approx = assemble_fourier_approx(&plan, &h)?;
    let alpha = prof.alpha;
    let t = prof.t;
    let exact = psd_eig(&h)?.apply_fn(|l| Complex64::new((-t * l.re.max(0.0).powf(alpha)).exp(), 0.0))?;
    let diff = DenseMatrix::from_matrix(approx.as_matrix() - exact.as_matrix())?;
    let error_operator = diff.spectral_norm();
    if u0.len() != h.rows() {
        bail!(psfmat::PsfError::DimensionMismatch {
            expected: h.rows(),
            actual: u0.len()
        });
    }
    let u_t = approx.apply(&u0);
    let error_state = u_t.distance(&exact.apply(&u0)) / u0.norm();
    write_state(args.state_out.as_deref(), &u_t)?;
    let bound = error_bounds(&plan, hnorm).total();

    let mut table = Table::new(&[
        "alpha",
        "T",
        "mode",
        "p",
        "regime",
        "n",
        "hnorm",
        "eps",
        "a",
        "K",
        "error_operator",
        "error_state",
        "error_bound",
    ]);
    table.rows.push(vec![
        alpha.to_string(),
        t.to_string(),
        prof.mode.to_string(),
        prof.p().to_string(),
        plan.regime.to_string(),
        h.rows().to_string(),
        hnorm.to_string(),
        args.eps.to_string(),
        plan.a.to_string(),
        plan.k_max.to_string(),
        error_operator.to_string(),
        error_state.to_string(),
        bound.to_string(),
    ]);
    write_table(&args.output, table, Some(elapsed_ms(start)))?;
    summary(
        &args.output,
        &format!(
            "a {} K {} operator error {:.3e} bound {:.3e}",
            plan.a, plan.k_max, error_operator, bound
        ),
    );
    Ok(())
}

fn write_state(path: Option<&Path>, v: &StateVector) -> Result<()> {
    if let Some(path) = path {
        fs::write(path, state_to_json(v) + "\n").with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

struct ContourRun {
    plan: ContourPlan,
    approx: StateVector,
    error: f64,
    rel_error: f64,
    bound: f64,
    closure: f64,
}

fn contour_instance(
    matrix: Option<&Path>,
    state: Option<&Path>,
    n: usize,
    rho: f64,
    seed: u64,
) -> Result<(DenseMatrix, StateVector)> {
    let mut gen = InstanceGenerator::new(seed);
    let a = match matrix {
        Some(path) => read_matrix(path)?,
        None => gen.normal_with_radius(n, rho),
    };
    let psi = match state {
        Some(path) => read_state(path)?,
        None => gen.state(a.rows()),
    };
    if psi.len() != a.rows() {
        bail!(psfmat::PsfError::DimensionMismatch {
            expected: a.rows(),
            actual: psi.len()
        });
    }
    Ok((a, psi))
}

#[allow(clippy::too_many_arguments)]
fn run_contour(
    a: &DenseMatrix,
    psi: &StateVector,
    f: &FunctionSpec,
    r1: f64,
    r2: f64,
    m: usize,
    quad_n: Option<usize>,
    closure: bool,
) -> Result<ContourRun> {
    if !f.holomorphic_on_disk(r2) {
        bail!(psfmat::PsfError::Unsupported(format!(
            "{f} has a pole on or inside |z| = R2 = {r2}"
        )));
    }
    let plan = ContourPlan::new(a, f.as_fn(), r1, r2, m, quad_n)?;
    let dec = eig(a, a.is_hermitian())?;
    let target = dec.apply_fn_to(f.as_fn(), psi)?;
    let approx = discrete_sum_apply(a, f.as_fn(), &plan, psi)?;
    let error = approx.distance(&target);
    let f_psi = target.norm();
    let bounds = contour_error_bounds(&plan, f_psi, psi.norm());
    let closure = if closure {
        decompose_error(a, f.as_fn(), &plan, psi)?.residual()
    } else {
        f64::NAN
    };
    Ok(ContourRun {
        error,
        rel_error: error / f_psi,
        bound: (bounds.aliasing + bounds.truncation) / f_psi,
        closure,
        plan,
        approx,
    })
}

fn resolve_radii(a: &DenseMatrix, r1: Option<f64>, r2: Option<f64>) -> Result<(f64, f64)> {
    let rho = eig(a, a.is_hermitian())?.spectral_radius();
    let (d1, _) = default_radii(rho);
    let r1 = r1.unwrap_or(d1);
    Ok((r1, r2.unwrap_or(2.0 * r1)))
}

pub fn simulate_contour(args: ContourArgs) -> Result<()> {
    let start = Instant::now();
    let (a, psi) = contour_instance(args.matrix.as_deref(), args.state.as_deref(), args.n, args.rho, args.seed)?;
    let (r1, r2) = resolve_radii(&a, args.r1, args.r2)?;
    if !args.f.holomorphic_on_disk(r2) {
        bail!(psfmat::PsfError::Unsupported(format!(
            "{} has a pole on or inside |z| = R2 = {r2}",
            args.f
        )));
    }
    let m = match (args.m, args.eps) {
        (Some(m), _) => m,
        (None, Some(eps)) => {
            let dec = eig(&a, a.is_hermitian())?;
            let f_psi = dec.apply_fn_to(args.f.as_fn(), &psi)?.norm();
            let b2 = sampled_sup(args.f.as_fn(), r2, SUP_SAMPLES);
            plan_m(eps, r1, r2, b2, dec.kappa_s, f_psi, psi.norm(), dec.spectral_radius())?
        }
        (None, None) => bail!(psfmat::PsfError::invalid("m", "give --m or --eps")),
    };
    let run = run_contour(&a, &psi, &args.f, r1, r2, m, args.quad_n, true)?;
    write_state(args.state_out.as_deref(), &run.approx)?;
    let mut table = Table::new(&[
        "f",
        "n",
        "rho",
        "kappa_s",
        "R1",
        "R2",
        "m",
        "quad_n",
        "error",
        "rel_error",
        "rel_bound",
        "closure_residual",
    ]);
    table.rows.push(vec![
        args.f.to_string(),
        a.rows().to_string(),
        run.plan.rho.to_string(),
        run.plan.kappa_s.to_string(),
        r1.to_string(),
        r2.to_string(),
        m.to_string(),
        run.plan.quad_n.to_string(),
        run.error.to_string(),
        run.rel_error.to_string(),
        run.bound.to_string(),
        run.closure.to_string(),
    ]);
    write_table(&args.output, table, Some(elapsed_ms(start)))?;
    summary(
        &args.output,
        &format!("m {m} relative error {:.3e} bound {:.3e}", run.rel_error, run.bound),
    );
    Ok(())
}

fn record_table(records: Vec<ConvergenceRecord>) -> Table {
    let mut table = Table::new(&ConvergenceRecord::CSV_HEADER);
    table.rows = records.iter().map(ConvergenceRecord::csv_fields).collect();
    table
}

pub fn app(args: AppArgs) -> Result<()> {
    let g = GridSpec::new(args.d, args.n, args.h)?;
    let u0 = match &args.state {
        Some(path) => read_state(path)?,
        None => default_state(&g),
    };
    let opts = AppOptions {
        m: args.m,
        r1: args.r1,
        r2: args.r2,
        timing: args.output.timing,
    };
    let rec = run_application(args.name, &g, args.t, args.eps, &u0, &opts)?;
    let line = format!(
        "{} d {} n {} error {:.3e} bound {:.3e} identity residual {:.3e}",
        rec.app, rec.d, rec.n, rec.error_measured, rec.error_bound, rec.identity_residual
    );
    write_table(&args.output, record_table(vec![rec]), None)?;
    summary(&args.output, &line);
    Ok(())
}

const COST_FIELDS: [&str; 7] = [
    "matrix_queries",
    "state_queries",
    "lcu_terms",
    "amplification",
    "l1_norm",
    "u_r",
    "dominant_term",
];

fn cost_field(r: &CostReport, name: &str) -> f64 {
    match name {
        "matrix_queries" => r.matrix_queries,
        "state_queries" => r.state_queries,
        "lcu_terms" => r.lcu_terms,
        "amplification" => r.amplification,
        "l1_norm" => r.l1_norm,
        "u_r" => r.u_r,
        _ => r.dominant_term,
    }
}

pub fn cost(args: CostArgs) -> Result<()> {
    match args.path {
        CostPath::A => {
            let alpha = args.alpha.ok_or_else(|| psfmat::PsfError::invalid("alpha", "path a needs --alpha"))?;
            let prof = SpectralProfile::new(alpha, args.t, args.mode)?;
            let report = path_a_cost(&prof, args.anorm, args.t, args.eps, args.ur)?;
            write_text(&args.output, &(serde_json::to_string_pretty(&report)? + "\n"))?;
            summary(&args.output, &format!("path A matrix queries {:.4e}", report.matrix_queries));
        }
        CostPath::B => {
            let (d1, _) = default_radii(args.rho);
            let r1 = args.r1.unwrap_or(d1);
            let r2 = args.r2.unwrap_or(2.0 * r1);
            let sup = |r: f64| args.f.as_ref().map(|f| sampled_sup(f.as_fn(), r, SUP_SAMPLES));
            let b1 = args
                .b1
                .or_else(|| sup(r1))
                .ok_or_else(|| psfmat::PsfError::invalid("B1", "give --B1 or --f"))?;
            let b2 = args
                .b2
                .or_else(|| sup(r2))
                .ok_or_else(|| psfmat::PsfError::invalid("B2", "give --B2 or --f"))?;
            let plan = ContourPlan::from_parts(r1, r2, 1, args.rho, args.kappa, b1, b2, 8)?;
            let gamma = args.gamma.unwrap_or(args.kappa / (r1 - args.rho));
            let fpsi = args.fpsi.unwrap_or(1.0);
            let report = path_b_cost(&plan, gamma, args.anorm, fpsi, args.ur * fpsi, args.eps)?;
            write_text(&args.output, &(serde_json::to_string_pretty(&report)? + "\n"))?;
            summary(&args.output, &format!("path B matrix queries {:.4e}", report.matrix_queries));
        }
        CostPath::Compare => {
            let target = match (&args.f, args.alpha) {
                (Some(f), _) => Target::Function(f.clone()),
                (None, Some(alpha)) => Target::PowerDecay { alpha, t: args.t },
                (None, None) => bail!(psfmat::PsfError::invalid("target", "give --f or --alpha")),
            };
            let problem = Problem {
                target,
                rho: args.rho,
                a_norm: args.anorm,
                kappa_s: args.kappa,
                psd: args.psd,
                eps: args.eps,
                u_r: args.ur,
                r1: args.r1,
                r2: args.r2,
            };
            let cmp = compare_paths(&problem)?;
            let mut table = Table::new(&["quantity", "path_a", "path_b"]);
            for name in COST_FIELDS {
                table.rows.push(vec![
                    name.to_string(),
                    opt(cmp.path_a.as_ref().map(|r| cost_field(r, name))),
                    opt(cmp.path_b.as_ref().map(|r| cost_field(r, name))),
                ]);
            }
            write_table(&args.output, table, None)?;
            summary(&args.output, &format!("recommendation: path {} ({})", cmp.recommendation, cmp.reason));
        }
    }
    Ok(())
}

pub fn sweep(args: SweepArgs) -> Result<()> {
    let start = Instant::now();
    let table = match args.path {
        SweepPath::Contour => {
            let ms: Vec<usize> = parse_list(&args.m)?;
            let n = *parse_list::<usize>(&args.n)?.first().expect("non-empty");
            let (a, psi) = contour_instance(None, None, n, args.rho, args.seed)?;
            let runs: Vec<Result<ContourRun>> = ms
                .par_iter()
                .map(|&m| run_contour(&a, &psi, &args.f, args.r1, args.r2, m, None, false))
                .collect();
            let mut table = Table::new(&["f", "R1", "R2", "m", "error", "rel_error", "rel_bound"]);
            for (m, run) in ms.iter().zip(runs) {
                let run = run?;
                table.rows.push(vec![
                    args.f.to_string(),
                    args.r1.to_string(),
                    args.r2.to_string(),
                    m.to_string(),
                    run.error.to_string(),
                    run.rel_error.to_string(),
                    run.bound.to_string(),
                ]);
            }
            table
        }
        SweepPath::Fourier => {
            let alpha = args.alpha.ok_or_else(|| psfmat::PsfError::invalid("alpha", "fourier sweep needs --alpha"))?;
            let prof = SpectralProfile::new(alpha, args.t, args.mode)?;
            let eps_list: Vec<f64> = args.eps.split(',').map(|s| s.trim().parse()).collect::<Result<_, _>>()?;
            let n = *parse_list::<usize>(&args.n)?.first().expect("non-empty");
            let mut gen = InstanceGenerator::new(args.seed);
            let h = gen.psd_with_norm(n, 1.0);
            let u0 = gen.state(n);
            let exact = psfmat::spectral::exact_evolution(&h, alpha, args.t, &u0)?;
            let kern = TimeKernel::new(prof);
            let rows: Vec<Result<Vec<String>>> = eps_list
                .par_iter()
                .map(|&eps| {
                    let plan = plan_fourier_with_kernel(&prof, 1.0, eps, &kern)?.with_coefficients(&kern)?;
                    let err = assemble_fourier_approx(&plan, &h)?.apply(&u0).distance(&exact) / u0.norm();
                    Ok(vec![
                        eps.to_string(),
                        plan.a.to_string(),
                        plan.k_max.to_string(),
                        err.to_string(),
                        error_bounds(&plan, 1.0).total().to_string(),
                    ])
                })
                .collect();
            let mut table = Table::new(&["eps", "a", "K", "error_state", "error_bound"]);
            table.rows = rows.into_iter().collect::<Result<_>>()?;
            table
        }
        SweepPath::App => {
            let name = args.name.ok_or_else(|| psfmat::PsfError::invalid("name", "app sweep needs --name"))?;
            let ns: Vec<usize> = parse_list(&args.n)?;
            let eps: f64 = args.eps.split(',').next().unwrap_or("").trim().parse()?;
            let opts = AppOptions {
                timing: args.output.timing,
                ..AppOptions::default()
            };
            let records: Vec<Result<ConvergenceRecord>> = ns
                .par_iter()
                .map(|&n| {
                    let g = GridSpec::new(args.d, n, None)?;
                    Ok(run_application(name, &g, args.t, eps, &default_state(&g), &opts)?)
                })
                .collect();
            let records = records.into_iter().collect::<Result<Vec<_>>>()?;
            write_table(&args.output, record_table(records), None)?;
            summary(&args.output, &format!("app sweep {name}: {} rows", ns.len()));
            return Ok(());
        }
    };
    let rows = table.rows.len();
    write_table(&args.output, table, Some(elapsed_ms(start)))?;
    summary(&args.output, &format!("sweep: {rows} rows"));
    Ok(())
}
