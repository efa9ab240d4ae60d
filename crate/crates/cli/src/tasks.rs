use serde_json::{json, Value};
use weylspec::asymptotics::sweep;
use weylspec::boundstates::{default_z_window, find_bound_states, BoundStateOptions, BoundStateSearch};
use weylspec::green::decay_window;
use weylspec::spectral::{parseval_check, reconstruct, time_average_check, transform, weyl_pairing};
use weylspec::{green_kernel, kodaira_pairing, zero_energy_report, BoundState, Complex64, Potential};

use crate::config::{RunConfig, Task};
use crate::output::Table;
use crate::verify;

/// Files and scalars produced by one task.
pub struct TaskOutput {
    pub tables: Vec<(String, Table)>,
    pub summary: Value,
    pub estimates: Value,
    /// Names of failed checks; non-empty makes the run a numerical failure.
    pub failed: Vec<String>,
}

pub fn run(task: Task, cfg: &RunConfig, pot: &Potential) -> weylspec::Result<TaskOutput> {
    match task {
        Task::Density => density(cfg, pot),
        Task::Cfunction => cfunction(cfg, pot),
        Task::Project => project(cfg, pot),
        Task::BoundStates => bound_states(cfg, pot),
        Task::Reconstruct => reconstruction(cfg, pot),
        Task::Green => green(cfg, pot),
        Task::Verify => verify::run(cfg, pot),
    }
}

fn density(cfg: &RunConfig, pot: &Potential) -> weylspec::Result<TaskOutput> {
    let points = sweep(pot, &cfg.lambdas.values(), &cfg.numerics)?;
    let mut t = Table::new("density/v1", &["lambda", "density", "err_bound"], cfg.output.precision);
    for p in &points {
        t.row(&[p.lambda, p.density, p.truncation_error_bound]);
    }
    let max_err = points.iter().map(|p| p.truncation_error_bound).fold(0.0, f64::max);
    Ok(TaskOutput {
        tables: vec![("density.csv".into(), t)],
        summary: json!({ "points": points.len(), "max_err_bound": max_err }),
        estimates: json!({ "max_truncation_error_bound": max_err }),
        failed: Vec::new(),
    })
}

fn cfunction(cfg: &RunConfig, pot: &Potential) -> weylspec::Result<TaskOutput> {
    let points = sweep(pot, &cfg.lambdas.values(), &cfg.numerics)?;
    let mut t = Table::new(
        "cfunction/v1",
        &["lambda", "a", "b", "re_c", "im_c", "c_abs_sq", "density", "err_bound", "x_max", "k_tail"],
        cfg.output.precision,
    );
    for p in &points {
        t.row(&[p.lambda, p.a, p.b, p.c.re, p.c.im, p.c_abs_sq, p.density, p.truncation_error_bound, p.x_max, p.k_tail]);
    }
    let max_err = points.iter().map(|p| p.truncation_error_bound).fold(0.0, f64::max);
    Ok(TaskOutput {
        tables: vec![("cfunction.csv".into(), t)],
        summary: json!({ "points": points.len(), "max_err_bound": max_err }),
        estimates: json!({ "max_truncation_error_bound": max_err }),
        failed: Vec::new(),
    })
}

fn project(cfg: &RunConfig, pot: &Potential) -> weylspec::Result<TaskOutput> {
    let opts = cfg.spectral_options();
    let g = cfg.data.g.sample(cfg.data.dx)?;
    let h = cfg.data.h.sample(cfg.data.dx)?;
    let [alpha, beta] = cfg.projection.interval;
    let prec = cfg.output.precision;

    let weyl = weyl_pairing(pot, alpha, beta, &g, &h, &opts)?;
    let mut t = Table::new(
        "project/v1",
        &["method", "epsilon", "value", "error_estimate", "nodes", "converged", "diff_from_weyl"],
        prec,
    );
    t.raw_row(vec![
        "weyl".into(),
        "".into(),
        t.num(weyl.value),
        t.num(weyl.error_estimate),
        weyl.nodes.to_string(),
        weyl.converged.to_string(),
        t.num(0.0),
    ]);
    let mut kodaira = Vec::new();
    for &eps in &cfg.projection.epsilons {
        let r = kodaira_pairing(pot, alpha, beta, eps, &g, &h, &opts.numerics, &opts.quad)?;
        t.raw_row(vec![
            "kodaira".into(),
            t.num(eps),
            t.num(r.value),
            t.num(r.error_estimate),
            r.nodes.to_string(),
            r.converged.to_string(),
            t.num((r.value - weyl.value).abs()),
        ]);
        kodaira.push(json!({ "epsilon": eps, "value": r.value, "error_estimate": r.error_estimate, "converged": r.converged }));
    }
    let mut samples = Table::new("project_samples/v1", &["lambda", "integrand"], prec);
    for (l, v) in &weyl.samples {
        samples.row(&[*l, *v]);
    }
    let mut tables = vec![("project.csv".to_string(), t), ("project_samples.csv".to_string(), samples)];
    let mut summary = json!({
        "interval": [alpha, beta],
        "weyl": { "value": weyl.value, "error_estimate": weyl.error_estimate, "nodes": weyl.nodes, "converged": weyl.converged },
        "kodaira": kodaira,
    });

    if cfg.time_average.enabled {
        let ta = &cfg.time_average;
        let r = time_average_check(pot, &ta.bump()?, &g, &h, &ta.ts, ta.dt_steps, &opts)?;
        let mut tt = Table::new("time_average/v1", &["t", "rhs", "defect", "relative"], prec);
        for e in &r.entries {
            tt.row(&[e.t, e.rhs, e.defect, e.relative]);
        }
        tables.push(("time_average.csv".into(), tt));
        summary["time_average"] = json!({ "lhs": r.lhs, "non_increasing": r.non_increasing, "floor": r.floor, "nodes": r.nodes });
    }
    Ok(TaskOutput {
        tables,
        summary,
        estimates: json!({ "weyl_error_estimate": weyl.error_estimate }),
        failed: Vec::new(),
    })
}

pub fn search_bound_states(cfg: &RunConfig, pot: &Potential) -> weylspec::Result<BoundStateSearch> {
    let opts = match cfg.bound_states {
        Some(o) => o,
        None => {
            let (z_lo, z_hi) = default_z_window(pot, &cfg.numerics)?;
            if z_hi <= z_lo {
                return Ok(BoundStateSearch {
                    states: Vec::new(),
                    scan: Vec::new(),
                    suspected_double_roots: Vec::new(),
                    window_clipped: false,
                });
            }
            BoundStateOptions {
                z_range: (z_lo, z_hi),
                ..Default::default()
            }
        }
    };
    find_bound_states(pot, &opts, &cfg.numerics)
}

pub fn zero_energy_x_max(cfg: &RunConfig, pot: &Potential) -> weylspec::Result<f64> {
    match cfg.zero_energy_x_max {
        Some(x) => Ok(x),
        None => Ok(decay_window(pot, cfg.numerics.tail_tol, cfg.numerics.x_max_cap)? + 32.0),
    }
}

fn bound_states(cfg: &RunConfig, pot: &Potential) -> weylspec::Result<TaskOutput> {
    let prec = cfg.output.precision;
    let search = search_bound_states(cfg, pot)?;
    let zero = zero_energy_report(pot, zero_energy_x_max(cfg, pot)?, &cfg.numerics)?;

    let mut states = Table::new(
        "bound_states/v1",
        &["index", "eigenvalue", "z", "residual", "norm_check", "decay_rate"],
        prec,
    );
    let mut funcs = Table::new("eigenfunctions/v1", &["index", "x", "f"], prec);
    for (i, s) in search.states.iter().enumerate() {
        states.raw_row(vec![
            i.to_string(),
            states.num(s.eigenvalue),
            states.num(s.z),
            states.num(s.residual),
            states.num(s.norm_check),
            states.num(s.decay_rate),
        ]);
        for (x, v) in s.eigenfunction.points().iter().zip(&s.eigenfunction.values) {
            funcs.raw_row(vec![i.to_string(), funcs.num(*x), funcs.num(*v)]);
        }
    }
    let mut scan = Table::new("jost_scan/v1", &["z", "m"], prec);
    for p in &search.scan {
        scan.row(&[p.z, p.m]);
    }
    let list: Vec<Value> = search
        .states
        .iter()
        .map(|s| json!({ "eigenvalue": s.eigenvalue, "z": s.z, "residual": s.residual, "norm_check": s.norm_check }))
        .collect();
    let max_residual = search.states.iter().map(|s| s.residual).fold(0.0, f64::max);
    Ok(TaskOutput {
        tables: vec![
            ("bound_states.csv".into(), states),
            ("jost_scan.csv".into(), scan),
            ("eigenfunctions.csv".into(), funcs),
        ],
        summary: json!({
            "states": list,
            "suspected_double_roots": search.suspected_double_roots,
            "window_clipped": search.window_clipped,
            "zero_energy": {
                "a": zero.a, "b": zero.b, "fit_range": zero.fit_range, "fit_residual": zero.fit_residual,
                "square_integrable": zero.square_integrable, "resonance": zero.resonance,
            },
        }),
        estimates: json!({ "max_root_residual": max_residual, "zero_energy_fit_residual": zero.fit_residual }),
        failed: Vec::new(),
    })
}

fn bound_states_or_default(cfg: &RunConfig, pot: &Potential) -> weylspec::Result<Vec<BoundState>> {
    Ok(search_bound_states(cfg, pot)?.states)
}

fn reconstruction(cfg: &RunConfig, pot: &Potential) -> weylspec::Result<TaskOutput> {
    let opts = cfg.spectral_options();
    let prec = cfg.output.precision;
    let h = cfg.data.h.sample(cfg.data.dx)?;
    let bound = bound_states_or_default(cfg, pot)?;

    let tr = transform(pot, &h, &cfg.lambdas.values(), &bound, &cfg.numerics)?;
    let mut tt = Table::new("transform/v1", &["lambda", "transform", "density"], prec);
    for p in &tr.points {
        tt.row(&[p.lambda, p.value, p.density]);
    }
    let rec = reconstruct(pot, &h, &h.grid, &bound, &opts)?;
    let mut rt = Table::new("reconstruct/v1", &["x", "h", "reconstruction", "continuous", "discrete"], prec);
    for (i, x) in h.points().iter().enumerate() {
        rt.row(&[*x, h.values[i], rec.values.values[i], rec.continuous[i], rec.discrete[i]]);
    }
    let pv = parseval_check(pot, &h, &bound, &opts)?;
    Ok(TaskOutput {
        tables: vec![("transform.csv".into(), tt), ("reconstruct.csv".into(), rt)],
        summary: json!({
            "bound_coefficients": tr.bound.iter().map(|b| json!({"eigenvalue": b.eigenvalue, "coefficient": b.coefficient})).collect::<Vec<_>>(),
            "reconstruction": {
                "sup_deviation": rec.sup_deviation, "lambda_max": rec.lambda_max, "tail_estimate": rec.tail_estimate,
                "nodes": rec.nodes, "converged": rec.converged,
            },
            "parseval": {
                "norm_sq": pv.norm_sq, "discrete": pv.discrete, "continuous": pv.continuous, "defect": pv.defect,
                "lambda_max": pv.lambda_max, "tail_estimate": pv.tail_estimate,
            },
        }),
        estimates: json!({
            "reconstruction_error_estimate": rec.error_estimate,
            "reconstruction_tail_estimate": rec.tail_estimate,
            "parseval_error_estimate": pv.error_estimate,
        }),
        failed: Vec::new(),
    })
}

fn green(cfg: &RunConfig, pot: &Potential) -> weylspec::Result<TaskOutput> {
    let nu = Complex64::new(cfg.green.nu[0], cfg.green.nu[1]);
    let mut t = Table::new("green/v1", &["x", "y", "re", "im"], cfg.output.precision);
    let mut w = None;
    for &[x, y] in &cfg.green.points {
        let k = green_kernel(pot, nu, x, y, &cfg.numerics)?;
        t.row(&[x, y, k.value.re, k.value.im]);
        w.get_or_insert(k.wronskian_w);
    }
    Ok(TaskOutput {
        tables: vec![("green.csv".into(), t)],
        summary: json!({
            "nu": [nu.re, nu.im],
            "wronskian": w.map(|w| [w.re, w.im]),
            "points": cfg.green.points.len(),
        }),
        estimates: json!({ "ode_tol": cfg.numerics.ode_tol }),
        failed: Vec::new(),
    })
}
