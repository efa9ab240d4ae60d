//! Property suites run by the `verify` task. Each check reports a measured
//! value against a fixed tolerance.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;
use weylspec::asymptotics::s_at;
use weylspec::green::decay_window;
use weylspec::odeflow::{decaying_eigenfunction, regular_eigenfunction, wronskian};
use weylspec::spectral::{parseval_check, project, weyl_pairing};
use weylspec::{
    green_kernel, jost_like, kodaira_pairing, s_infinity, spectral_density, zero_energy_report, Complex64, Potential,
};

use crate::config::RunConfig;
use crate::output::Table;
use crate::tasks::{search_bound_states, zero_energy_x_max, TaskOutput};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

impl Status {
    fn name(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Skipped => "skipped",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub status: Status,
    pub value: f64,
    pub tolerance: f64,
}

fn check(name: &'static str, value: f64, tolerance: f64) -> Check {
    Check {
        name,
        status: if value <= tolerance { Status::Pass } else { Status::Fail },
        value,
        tolerance,
    }
}

fn skipped(name: &'static str) -> Check {
    Check {
        name,
        status: Status::Skipped,
        value: f64::NAN,
        tolerance: f64::NAN,
    }
}

fn relative(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        a.abs()
    } else {
        (a - b).abs() / b.abs()
    }
}

pub fn run(cfg: &RunConfig, pot: &Potential) -> weylspec::Result<TaskOutput> {
    let num = &cfg.numerics;
    let opts = cfg.spectral_options();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = cfg.verify.samples;
    let g = cfg.data.g.sample(cfg.data.dx)?;
    let h = cfg.data.h.sample(cfg.data.dx)?;
    let [alpha, beta] = cfg.projection.interval;
    let mut checks = Vec::new();

    let lambdas = cfg.lambdas.values();
    if pot.is_free() {
        let worst = lambdas
            .iter()
            .map(|&l| spectral_density(pot, l, num).map(|r| relative(r, l.sqrt() / PI)))
            .collect::<weylspec::Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        checks.push(check("free_density_closed_form", worst, 1e-8));
        let worst_m = (1..=16)
            .map(|i| jost_like(pot, 0.1 * i as f64, num).map(|j| (j.m - 1.0).abs()))
            .collect::<weylspec::Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        checks.push(check("free_jost_m_is_one", worst_m, 0.0));
    } else {
        checks.push(skipped("free_density_closed_form"));
        checks.push(skipped("free_jost_m_is_one"));
    }

    // Wronskian constancy and kernel symmetry at random points
    let x_max = decay_window(pot, num.ode_tol, num.x_max_cap)?;
    let mut worst_w: f64 = 0.0;
    let mut worst_sym: f64 = 0.0;
    for _ in 0..n {
        let im = rng.gen_range(0.1..2.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let nu = Complex64::new(rng.gen_range(-2.0..10.0), im);
        let x1: f64 = rng.gen_range(0.0..8.0);
        let x2: f64 = rng.gen_range(0.0..8.0);
        let pts = [x1.min(x2), x1.max(x2)];
        let f = regular_eigenfunction(pot, nu, &pts, num.ode_tol)?;
        let gd = decaying_eigenfunction(pot, nu, &pts, x_max, num.ode_tol)?;
        let w1 = wronskian(&f, &gd, pts[0])?;
        let w2 = wronskian(&f, &gd, pts[1])?;
        worst_w = worst_w.max((w1 - w2).norm() / w1.norm());
        let k = green_kernel(pot, nu, x1, x2, num)?.value;
        let swapped = green_kernel(pot, nu, x2, x1, num)?.value;
        let conj = green_kernel(pot, nu.conj(), x1, x2, num)?.value;
        let scale = k.norm().max(f64::MIN_POSITIVE);
        worst_sym = worst_sym.max((k - swapped).norm() / scale).max((k - conj.conj()).norm() / scale);
    }
    checks.push(check("wronskian_constancy", worst_w, 1e-8));
    checks.push(check("green_kernel_symmetry", worst_sym, 1e-8));

    // s(x_max) vs s(2 x_max) against the reported Gronwall bound
    let lo = lambdas[0];
    let hi = *lambdas.last().expect("validated non-empty");
    let mut worst_cert: f64 = 0.0;
    for _ in 0..n.div_ceil(10) {
        let lambda = if hi > lo { rng.gen_range(lo..hi) } else { lo };
        let s = s_infinity(pot, lambda, num)?;
        let s1 = s_at(pot, lambda, s.x_max, num)?;
        let s2 = s_at(pot, lambda, 2.0 * s.x_max, num)?;
        let diff = ((s1[0] - s2[0]).powi(2) + (s1[1] - s2[1]).powi(2)).sqrt();
        let bound = s.growth_constant * s.k_tail + 3.0 * (lambda + 1.0 / lambda).sqrt() * s.state_error;
        worst_cert = worst_cert.max(diff / bound);
    }
    checks.push(check("truncation_certificate_ratio", worst_cert, 1.0));

    let weyl = weyl_pairing(pot, alpha, beta, &g, &h, &opts)?;
    let kod = kodaira_pairing(pot, alpha, beta, 1e-3, &g, &h, num, &opts.quad)?;
    checks.push(check("method_agreement_eps_1e-3", relative(kod.value, weyl.value), 1e-2));

    let mid = 0.5 * (alpha + beta);
    let left = weyl_pairing(pot, alpha, mid, &g, &h, &opts)?;
    let right = weyl_pairing(pot, mid, beta, &g, &h, &opts)?;
    let add_tol = weyl.error_estimate
        + left.error_estimate
        + right.error_estimate
        + 3.0 * opts.quad.abs_tol.max(opts.quad.rel_tol * weyl.value.abs());
    checks.push(check("interval_additivity", (left.value + right.value - weyl.value).abs(), add_tol));

    let x_end = g.grid.end().max(h.grid.end());
    let pg = project(pot, alpha, beta, &g, x_end, &opts)?;
    let ph = project(pot, alpha, beta, &h, x_end, &opts)?;
    checks.push(check("projection_idempotence", relative(pg.inner(&ph)?, pg.coefficient_pairing(&ph)?), 1e-6));
    let ratio = ph.energy(pot) / ph.norm_sq();
    let outside = (alpha - ratio).max(ratio - beta).max(0.0) / alpha;
    checks.push(check("spectral_localization", outside, 1e-4));

    let search = search_bound_states(cfg, pot)?;
    let bound = search.states;
    let pv = parseval_check(pot, &h, &bound, &opts)?;
    checks.push(check("parseval_defect", pv.defect, 1e-3));

    let worst_norm = bound.iter().map(|b| b.norm_check).fold(0.0, f64::max);
    checks.push(check("bound_state_normalization", worst_norm, 1e-8));
    let mut worst_orth: f64 = 0.0;
    for i in 0..bound.len() {
        for j in 0..i {
            worst_orth = worst_orth.max(bound[i].eigenfunction.inner(&bound[j].eigenfunction)?.abs());
        }
    }
    checks.push(check("bound_state_orthogonality", worst_orth, 1e-6));
    let worst_sign = bound.iter().map(|b| b.eigenvalue.max(0.0)).fold(0.0, f64::max);
    checks.push(check("bound_state_eigenvalues_negative", worst_sign, 0.0));

    let zero = zero_energy_report(pot, zero_energy_x_max(cfg, pot)?, num)?;
    let not_l2 = if zero.square_integrable { 1.0 } else { 0.0 };
    checks.push(check("zero_energy_not_square_integrable", not_l2, 0.0));

    let mut t = Table::new("verify/v1", &["name", "status", "value", "tolerance"], cfg.output.precision);
    for c in &checks {
        t.raw_row(vec![c.name.into(), c.status.name().into(), t.num(c.value), t.num(c.tolerance)]);
    }
    let failed: Vec<String> = checks.iter().filter(|c| c.status == Status::Fail).map(|c| c.name.to_string()).collect();
    let estimates = json!({
        "weyl_error_estimate": weyl.error_estimate,
        "kodaira_error_estimate": kod.error_estimate,
        "parseval_error_estimate": pv.error_estimate,
        "checks": checks.iter().map(|c| json!({ "name": c.name, "status": c.status })).collect::<Vec<_>>(),
    });
    Ok(TaskOutput {
        tables: vec![("verify.csv".into(), t)],
        summary: json!({ "checks": checks, "samples": n, "seed": cfg.seed }),
        estimates,
        failed,
    })
}
