//! Negative eigenvalues `λ = -z²`.
//!
//! At `λ = -z²` the exterior solutions are `e^{±zx}`, along the eigenvectors
//! `[1; ±z]` of `C_λ`. Writing `s(∞) = (a, b)`, the growing-mode coefficient
//! of the regular solution is `(a z + b)/(2z)`, so `λ` is an eigenvalue iff
//! `m(z) = a z + b` vanishes. Since `m(z) = e^{-zx}(z F(x) + pF'(x))` once
//! the coefficients are free, `m` is read off without forming `s` explicitly.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::coeffs::{DecayClass, Potential};
use crate::error::{Error, Result};
use crate::numerics::Numerics;
use crate::odeflow::{exp_flow, mat_vec, solve_system, StateVector};
use crate::par;
use crate::quadrature;
use crate::sampled::{Grid, SampledFunction};

/// `m(z)` and the data it came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JostPoint {
    pub z: f64,
    pub a: f64,
    pub b: f64,
    pub m: f64,
    pub x_max: f64,
}

/// Matching point for `λ = -z²`: past it the conjugated perturbation
/// integrates (with `e^{2zt}` weight) to below `tail_tol`.
pub fn matching_point(pot: &Potential, z: f64, num: &Numerics) -> Result<f64> {
    if !(z > 0.0) {
        return Err(Error::InvalidParameter(format!("z must be positive, got {z}")));
    }
    match pot.decay_class() {
        DecayClass::EventuallyConstant { x_cut } => Ok(x_cut),
        DecayClass::Exponential { rate } => {
            if 2.0 * z >= rate {
                return Err(Error::InsufficientDecay(format!(
                    "z = {z} needs decay rate above {}, potential decays at {rate}",
                    2.0 * z
                )));
            }
            // ‖exp(tC)‖_HS² <= e^{2zt} (2 + (z² + z⁻²)/4) for t >= 0
            let factor = 2.0 + 0.25 * (z * z + 1.0 / (z * z));
            let mut x: f64 = 1.0;
            loop {
                let tail = pot
                    .majorant()
                    .weighted_tail(x, 2.0 * z)
                    .ok_or_else(|| Error::InsufficientDecay("majorant has no weighted tail".into()))?;
                if factor * tail <= num.tail_tol {
                    return Ok(x);
                }
                x *= 2.0;
                if x > num.x_max_cap {
                    return Err(Error::TailTooLong { cap: num.x_max_cap });
                }
            }
        }
        DecayClass::PowerIntegrable => Err(Error::InsufficientDecay(
            "bound-state search needs eventually constant or exponentially decaying coefficients".into(),
        )),
    }
}

fn regular_state(pot: &Potential, lambda: f64, x: f64, num: &Numerics) -> Result<[f64; 2]> {
    let u0 = StateVector::new(0.0, pot.p(0.0));
    if x == 0.0 {
        return Ok(u0.as_array());
    }
    Ok(solve_system(pot, lambda, u0, 0.0, x, num.ode_tol)?.end_state())
}

pub fn jost_like(pot: &Potential, z: f64, num: &Numerics) -> Result<JostPoint> {
    let x_max = matching_point(pot, z, num)?;
    let lambda = -z * z;
    let u = regular_state(pot, lambda, x_max, num)?;
    let s = mat_vec(&exp_flow(lambda, -x_max), &u);
    Ok(JostPoint {
        z,
        a: s[0],
        b: s[1],
        m: (-z * x_max).exp() * (z * u[0] + u[1]),
        x_max,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundState {
    pub z: f64,
    pub eigenvalue: f64,
    /// Unit-norm eigenfunction with `F'(0) > 0`, cut where it drops below
    /// `1e-14` of its maximum.
    pub eigenfunction: SampledFunction,
    /// `|m(z)|` at the refined root.
    pub residual: f64,
    /// `|‖F‖² - 1|` after normalization.
    pub norm_check: f64,
    /// Fitted exponential decay rate of the tail.
    pub decay_rate: f64,
    /// Point where the forward regular solution is joined to the decaying one.
    pub x_match: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoundStateOptions {
    pub z_range: (f64, f64),
    pub n_scan: usize,
    pub root_tol: f64,
    /// Sample spacing of the eigenfunctions.
    pub dx: f64,
}

impl Default for BoundStateOptions {
    fn default() -> Self {
        Self {
            z_range: (0.005, 2.0),
            n_scan: 128,
            root_tol: 1e-12,
            dx: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundStateSearch {
    /// Ordered by eigenvalue, ascending.
    pub states: Vec<BoundState>,
    pub scan: Vec<JostPoint>,
    /// Scan intervals where roots may be confluent; reported, not resolved.
    pub suspected_double_roots: Vec<(f64, f64)>,
    /// The requested window was clipped to `z <= 0.45 α`, inside the admissible `z < α/2`.
    pub window_clipped: bool,
}

impl BoundStateSearch {
    pub fn scan_csv(&self) -> String {
        let mut out = String::from("z,m\n");
        for p in &self.scan {
            let _ = writeln!(out, "{:.16e},{:.16e}", p.z, p.m);
        }
        out
    }
}

/// Search window covering every possible eigenvalue: `z` up to `√(-inf q)`.
/// For exponential decay at rate α, [`find_bound_states`] further clips it to
/// `0.45 α` and reports that in `window_clipped`.
pub fn default_z_window(pot: &Potential, num: &Numerics) -> Result<(f64, f64)> {
    let x_end = match pot.decay_class() {
        DecayClass::EventuallyConstant { x_cut } => x_cut,
        _ => pot.effective_support(num.tail_tol, num.x_max_cap)?,
    };
    let n = 20_000;
    let q_min = (0..=n)
        .map(|i| pot.q(x_end * i as f64 / n as f64))
        .fold(f64::INFINITY, f64::min);
    let z_lo = BoundStateOptions::default().z_range.0;
    let z_hi = if q_min < 0.0 { 1.01 * (-q_min).sqrt() } else { z_lo };
    Ok((z_lo, z_hi.max(z_lo)))
}

fn bisect(pot: &Potential, mut lo: JostPoint, mut hi: JostPoint, tol: f64, num: &Numerics) -> Result<JostPoint> {
    while hi.z - lo.z > tol {
        let mid = jost_like(pot, 0.5 * (lo.z + hi.z), num)?;
        if mid.m == 0.0 {
            return Ok(mid);
        }
        if (mid.m > 0.0) == (lo.m > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // one secant polish inside the final bracket
    let best = if lo.m.abs() <= hi.m.abs() { lo } else { hi };
    if hi.m != lo.m {
        let z = hi.z - hi.m * (hi.z - lo.z) / (hi.m - lo.m);
        if z > lo.z && z < hi.z {
            let polished = jost_like(pot, z, num)?;
            if polished.m.abs() < best.m.abs() {
                return Ok(polished);
            }
        }
    }
    Ok(best)
}

/// Eigenfunction at a root: regular solution up to the matching point,
/// pure decaying mode beyond.
fn build_state(pot: &Potential, root: JostPoint, dx: f64, num: &Numerics) -> Result<BoundState> {
    let z = root.z;
    let lambda = -z * z;
    let x_m = root.x_max;
    let span = x_m + (1e14f64).ln() / z + 10.0 / z;
    let grid = Grid::stepping(0.0, span, dx)?;
    let mut values = vec![0.0; grid.len];
    let n_inner = grid.points().iter().take_while(|x| **x <= x_m).count();
    // Forward integration past the well amplifies the root error like
    // e^{2z x}; when the tail is only asymptotically free, join the regular
    // solution to a backward-integrated decaying one at the last turning point.
    let x_j = match pot.decay_class() {
        DecayClass::EventuallyConstant { .. } => x_m,
        _ => (0..n_inner)
            .rev()
            .map(|i| grid.x(i))
            .find(|&x| pot.q(x) <= lambda)
            .unwrap_or(x_m),
    };
    let n_left = grid.points().iter().take_while(|x| **x <= x_j).count();
    let u0 = StateVector::new(0.0, pot.p(0.0));
    let u_j = if x_j > 0.0 {
        let traj = solve_system(pot, lambda, u0, 0.0, x_j, num.ode_tol)?;
        for (i, v) in values.iter_mut().enumerate().take(n_left) {
            *v = traj.eval(grid.x(i))?[0];
        }
        traj.end_state()
    } else {
        u0.as_array()
    };
    let u_m = if x_j < x_m {
        let back = solve_system(pot, lambda, StateVector::new(1.0, -z * pot.p(x_m)), x_m, x_j, num.ode_tol)?;
        let r = back.end_state();
        let s = (u_j[0] * r[0] + u_j[1] * r[1]) / (r[0] * r[0] + r[1] * r[1]);
        for (i, v) in values.iter_mut().enumerate().take(n_inner).skip(n_left) {
            *v = s * back.eval(grid.x(i))?[0];
        }
        [s, -z * pot.p(x_m) * s]
    } else {
        u_j
    };
    for (i, v) in values.iter_mut().enumerate().skip(n_inner) {
        *v = u_m[0] * (-z * (grid.x(i) - x_m)).exp();
    }
    let peak = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let keep = values
        .iter()
        .rposition(|v| v.abs() >= 1e-14 * peak)
        .map_or(values.len(), |i| i + 1)
        .max(n_inner.min(values.len()));
    values.truncate(keep);
    let grid = Grid::new(0.0, dx, keep)?;
    let norm_sq = quadrature::simpson(dx, &values.iter().map(|v| v * v).collect::<Vec<_>>());
    let scale = norm_sq.sqrt().recip();
    for v in values.iter_mut() {
        *v *= scale;
    }
    let norm_check = (quadrature::simpson(dx, &values.iter().map(|v| v * v).collect::<Vec<_>>()) - 1.0).abs();

    // log-linear fit of the tail
    let tail: Vec<(f64, f64)> = (n_inner..values.len())
        .filter(|&i| values[i].abs() > 1e-12)
        .map(|i| (grid.x(i), values[i].abs().ln()))
        .collect();
    let decay_rate = if tail.len() >= 2 {
        let n = tail.len() as f64;
        let mx = tail.iter().map(|t| t.0).sum::<f64>() / n;
        let my = tail.iter().map(|t| t.1).sum::<f64>() / n;
        let sxy: f64 = tail.iter().map(|t| (t.0 - mx) * (t.1 - my)).sum();
        let sxx: f64 = tail.iter().map(|t| (t.0 - mx) * (t.0 - mx)).sum();
        -sxy / sxx
    } else {
        z
    };

    Ok(BoundState {
        z,
        eigenvalue: lambda,
        eigenfunction: SampledFunction::new(grid, values)?,
        residual: root.m.abs(),
        norm_check,
        decay_rate,
        x_match: x_j,
    })
}

pub fn find_bound_states(pot: &Potential, opts: &BoundStateOptions, num: &Numerics) -> Result<BoundStateSearch> {
    let (mut z_lo, mut z_hi) = opts.z_range;
    if !(z_lo > 0.0) || !(z_hi >= z_lo) {
        return Err(Error::InvalidParameter(format!("invalid z window [{z_lo}, {z_hi}]")));
    }
    if opts.n_scan < 16 {
        return Err(Error::InvalidParameter(format!("n_scan must be at least 16, got {}", opts.n_scan)));
    }
    let mut window_clipped = false;
    if let DecayClass::Exponential { rate } = pot.decay_class() {
        let cap = 0.45 * rate;
        if z_hi > cap {
            z_hi = cap;
            z_lo = z_lo.min(cap);
            window_clipped = true;
        }
    }
    let zs: Vec<f64> = (0..opts.n_scan)
        .map(|i| z_lo + (z_hi - z_lo) * i as f64 / (opts.n_scan - 1) as f64)
        .collect();
    let scan = par::try_map(num.exec, &zs, |&z| jost_like(pot, z, num))?;

    let mut brackets = Vec::new();
    for i in 0..scan.len() - 1 {
        let (a, b) = (scan[i], scan[i + 1]);
        if a.m == 0.0 || (a.m > 0.0) != (b.m > 0.0) && b.m != 0.0 {
            brackets.push(i);
        }
    }
    if scan.last().is_some_and(|p| p.m == 0.0) {
        brackets.push(scan.len() - 1);
    }

    let mut suspected = Vec::new();
    for w in brackets.windows(2) {
        if w[1] == w[0] + 1 {
            suspected.push((scan[w[0]].z, scan[(w[1] + 1).min(scan.len() - 1)].z));
        }
    }
    for i in 1..scan.len().saturating_sub(1) {
        let (l, c, r) = (scan[i - 1].m, scan[i].m, scan[i + 1].m);
        let same_sign = (l > 0.0) == (c > 0.0) && (c > 0.0) == (r > 0.0);
        if same_sign && c.abs() < l.abs() && c.abs() < r.abs() && c.abs() < 0.05 * l.abs().max(r.abs()) {
            suspected.push((scan[i - 1].z, scan[i + 1].z));
        }
    }

    let roots = par::try_map(num.exec, &brackets, |&i| {
        if scan[i].m == 0.0 || i + 1 >= scan.len() {
            Ok(scan[i])
        } else {
            bisect(pot, scan[i], scan[i + 1], opts.root_tol, num)
        }
    })?;
    let mut states = par::try_map(num.exec, &roots, |r| build_state(pot, *r, opts.dx, num))?;
    states.sort_by(|a, b| a.eigenvalue.total_cmp(&b.eigenvalue));
    Ok(BoundStateSearch {
        states,
        scan,
        suspected_double_roots: suspected,
        window_clipped,
    })
}

/// All bound states in the default window; empty when `q >= 0`.
pub fn default_bound_states(pot: &Potential, num: &Numerics) -> Result<Vec<BoundState>> {
    let (z_lo, z_hi) = default_z_window(pot, num)?;
    if z_hi <= z_lo {
        return Ok(Vec::new());
    }
    let opts = BoundStateOptions {
        z_range: (z_lo, z_hi),
        ..Default::default()
    };
    Ok(find_bound_states(pot, &opts, num)?.states)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroEnergyReport {
    /// Fit `F(x) ≈ a x + b` on `fit_range`.
    pub a: f64,
    pub b: f64,
    /// The same pair read from `s = exp(-xC_0) u(x) = [b; a]` at `x_max`.
    pub s_a: f64,
    pub s_b: f64,
    pub fit_range: (f64, f64),
    pub fit_residual: f64,
    pub square_integrable: bool,
    /// `a ≈ 0`: a bounded zero-energy solution (threshold resonance).
    pub resonance: bool,
}

pub fn zero_energy_report(pot: &Potential, x_max: f64, num: &Numerics) -> Result<ZeroEnergyReport> {
    let x_start = match pot.decay_class() {
        DecayClass::EventuallyConstant { x_cut } => x_cut + 2.0,
        DecayClass::Exponential { .. } => pot.effective_support(num.tail_tol, num.x_max_cap)? + 2.0,
        DecayClass::PowerIntegrable => {
            return Err(Error::InsufficientDecay(
                "zero-energy analysis needs x²-weighted integrability; declare eventually constant or exponential decay".into(),
            ))
        }
    };
    if !(x_max > x_start + 1.0) {
        return Err(Error::InvalidParameter(format!(
            "x_max = {x_max} leaves no fit window past {x_start}"
        )));
    }
    let traj = solve_system(pot, 0.0, StateVector::new(0.0, pot.p(0.0)), 0.0, x_max, num.ode_tol)?;
    let n = 201;
    let pts: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let x = x_start + (x_max - x_start) * i as f64 / (n - 1) as f64;
            traj.eval(x).map(|u| (x, u[0]))
        })
        .collect::<Result<_>>()?;
    let nf = n as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let a = sxy / sxx;
    let b = my - a * mx;
    let fit_residual = pts.iter().map(|p| (p.1 - a * p.0 - b).abs()).fold(0.0, f64::max);
    let u = traj.end_state();
    let s = [u[0] - x_max * u[1], u[1]];
    let scale = a.abs().max(b.abs());
    Ok(ZeroEnergyReport {
        a,
        b,
        s_a: s[1],
        s_b: s[0],
        fit_range: (x_start, x_max),
        fit_residual,
        square_integrable: scale == 0.0,
        resonance: a.abs() <= 1e-8 * (1.0 + b.abs()),
    })
}
