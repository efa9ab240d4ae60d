//! Eigenfunction expansion through the spectral density:
//! `P_{[α,β]} h = ∫_α^β ρ(λ) ĥ(λ) F_λ dλ` with `ĥ(λ) = <F_λ, h>`.
//!
//! Every λ-integral is done in `k = √λ`, where `ρ(λ) dλ = dk / (2π|c|²)`
//! and the integrands are smooth down to the lower cut `√λ_min`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{regular_solution, RegularSolution};
use crate::boundstates::BoundState;
use crate::coeffs::Potential;
use crate::error::{Error, Result};
use crate::green::{check_window, decay_window};
pub use crate::green::{Method, ProjectionReport};
use crate::numerics::Numerics;
use crate::par;
use crate::quadrature::{self, AdaptiveOptions, AdaptiveResult, GaussLegendre};
use crate::sampled::{Grid, SampledFunction, SpectralBump};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectralOptions {
    pub numerics: Numerics,
    pub quad: AdaptiveOptions,
    /// Upper cut of the continuous part.
    pub lambda_max: f64,
    /// The cut is raised by factors of 4 up to this value until the tail
    /// estimate drops below `spectral_tail_tol`.
    pub lambda_max_cap: f64,
    pub spectral_tail_tol: f64,
    /// Fixed composite rule in `k` for projected functions and time averages.
    pub k_panels: usize,
    pub k_order: usize,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        Self {
            numerics: Numerics::default(),
            quad: AdaptiveOptions::default(),
            lambda_max: 60.0,
            lambda_max_cap: 3840.0,
            spectral_tail_tol: 1e-5,
            k_panels: 48,
            k_order: 10,
        }
    }
}

impl SpectralOptions {
    pub fn validate(&self) -> Result<()> {
        self.numerics.validate()?;
        if !(self.lambda_max > self.numerics.lambda_min) || !(self.lambda_max_cap >= self.lambda_max) {
            return Err(Error::InvalidParameter(format!(
                "need lambda_min < lambda_max <= lambda_max_cap, got {} {} {}",
                self.numerics.lambda_min, self.lambda_max, self.lambda_max_cap
            )));
        }
        if !(self.spectral_tail_tol > 0.0) || self.k_panels == 0 || self.k_order < 2 {
            return Err(Error::InvalidParameter("invalid spectral quadrature settings".into()));
        }
        Ok(())
    }
}

fn check_half_line(grid: &Grid) -> Result<()> {
    if grid.start < -1e-9 * grid.step {
        return Err(Error::OutOfRange {
            x: grid.start,
            lo: 0.0,
            hi: f64::INFINITY,
        });
    }
    Ok(())
}

/// `F_λ` sampled on the points of `grid`, which must lie in `[0, ∞)`.
fn sample_f(sol: &RegularSolution, grid: &Grid) -> Result<Vec<f64>> {
    Ok(sol.sample(&grid.points().iter().map(|x| x.max(0.0)).collect::<Vec<_>>())?.0)
}

/// `ρ dλ / dk = 1 / (2π|c|²)`.
fn k_weight(sol: &RegularSolution) -> f64 {
    1.0 / (2.0 * PI * sol.point.c_abs_sq)
}

/// `<g, P_{[α,β]} h>` from the kernel formula.
pub fn weyl_pairing(
    pot: &Potential,
    alpha: f64,
    beta: f64,
    g: &SampledFunction,
    h: &SampledFunction,
    opts: &SpectralOptions,
) -> Result<ProjectionReport> {
    let num = &opts.numerics;
    check_window(alpha, beta, num.lambda_min)?;
    check_half_line(&g.grid)?;
    check_half_line(&h.grid)?;
    let x_hi = g.grid.end().max(h.grid.end());
    let res = quadrature::adaptive(alpha.sqrt(), beta.sqrt(), &opts.quad, num.exec, |k| -> Result<Vec<f64>> {
        let sol = regular_solution(pot, k * k, x_hi, num)?;
        let gh = g.pair_with(&sample_f(&sol, &g.grid)?);
        let hh = h.pair_with(&sample_f(&sol, &h.grid)?);
        Ok(vec![gh * hh * k_weight(&sol)])
    })?;
    Ok(ProjectionReport {
        interval: (alpha, beta),
        method: Method::Weyl,
        value: res.scalar(),
        nodes: res.evaluations,
        error_estimate: res.error_estimate,
        converged: res.converged,
        samples: res.samples.iter().map(|s| (s.x * s.x, s.value[0] / (2.0 * s.x))).collect(),
    })
}

/// Kernel of `P_{[α,β]}`: `∫_α^β ρ(λ) F_λ(x) F_λ(y) dλ`.
pub fn projection_kernel(
    pot: &Potential,
    alpha: f64,
    beta: f64,
    x: f64,
    y: f64,
    opts: &SpectralOptions,
) -> Result<ProjectionReport> {
    let num = &opts.numerics;
    check_window(alpha, beta, num.lambda_min)?;
    if x < 0.0 || y < 0.0 {
        return Err(Error::OutOfRange {
            x: x.min(y),
            lo: 0.0,
            hi: f64::INFINITY,
        });
    }
    let (lo, hi) = (x.min(y), x.max(y));
    let res = quadrature::adaptive(alpha.sqrt(), beta.sqrt(), &opts.quad, num.exec, |k| -> Result<Vec<f64>> {
        let sol = regular_solution(pot, k * k, hi, num)?;
        Ok(vec![sol.state_at(lo)?[0] * sol.state_at(hi)?[0] * k_weight(&sol)])
    })?;
    Ok(ProjectionReport {
        interval: (alpha, beta),
        method: Method::Weyl,
        value: res.scalar(),
        nodes: res.evaluations,
        error_estimate: res.error_estimate,
        converged: res.converged,
        samples: res.samples.iter().map(|s| (s.x * s.x, s.value[0] / (2.0 * s.x))).collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransformPoint {
    pub lambda: f64,
    pub value: f64,
    pub density: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundCoefficient {
    pub eigenvalue: f64,
    /// `<f_n, h>`.
    pub coefficient: f64,
    pub norm_sq: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformResult {
    pub points: Vec<TransformPoint>,
    pub bound: Vec<BoundCoefficient>,
}

fn bound_coefficients(h: &SampledFunction, bound: &[BoundState]) -> Result<Vec<BoundCoefficient>> {
    bound
        .iter()
        .map(|b| {
            Ok(BoundCoefficient {
                eigenvalue: b.eigenvalue,
                coefficient: b.eigenfunction.inner(h)?,
                norm_sq: b.eigenfunction.norm_sq(),
            })
        })
        .collect()
}

pub fn transform(
    pot: &Potential,
    h: &SampledFunction,
    lambdas: &[f64],
    bound: &[BoundState],
    num: &Numerics,
) -> Result<TransformResult> {
    check_half_line(&h.grid)?;
    let points = par::try_map(num.exec, lambdas, |&lambda| {
        let sol = regular_solution(pot, lambda, h.grid.end(), num)?;
        Ok(TransformPoint {
            lambda,
            value: h.pair_with(&sample_f(&sol, &h.grid)?),
            density: sol.point.density,
        })
    })?;
    Ok(TransformResult {
        points,
        bound: bound_coefficients(h, bound)?,
    })
}

/// Adaptive `k`-integral over `[√λ_min, √λ_max]`, raising `λ_max` until the
/// contribution of the top tenth of the `k` range is below the tail tolerance.
fn continuous_part<F>(opts: &SpectralOptions, f: F) -> Result<(AdaptiveResult, f64, f64)>
where
    F: Fn(f64) -> Result<Vec<f64>> + Sync + Send,
{
    let k_lo = opts.numerics.lambda_min.sqrt();
    let mut lambda_max = opts.lambda_max;
    loop {
        let k_hi = lambda_max.sqrt();
        let res = quadrature::adaptive(k_lo, k_hi, &opts.quad, opts.numerics.exec, &f)?;
        let cut = k_hi - 0.1 * (k_hi - k_lo);
        let mut top = vec![0.0; res.value.len()];
        for s in res.samples.iter().filter(|s| s.x >= cut) {
            for (t, v) in top.iter_mut().zip(&s.value) {
                *t += s.weight * v;
            }
        }
        let tail = top.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if tail <= opts.spectral_tail_tol {
            return Ok((res, lambda_max, tail));
        }
        if 4.0 * lambda_max > opts.lambda_max_cap {
            return Err(Error::TailNotSmall {
                lambda_cap: opts.lambda_max_cap,
                estimate: tail,
            });
        }
        lambda_max *= 4.0;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reconstruction {
    pub values: SampledFunction,
    pub continuous: Vec<f64>,
    pub discrete: Vec<f64>,
    /// `max |reconstruction - h|` over the evaluation grid.
    pub sup_deviation: f64,
    pub lambda_max: f64,
    pub tail_estimate: f64,
    pub nodes: usize,
    pub error_estimate: f64,
    pub converged: bool,
}

pub fn reconstruct(
    pot: &Potential,
    h: &SampledFunction,
    x_eval: &Grid,
    bound: &[BoundState],
    opts: &SpectralOptions,
) -> Result<Reconstruction> {
    opts.validate()?;
    check_half_line(&h.grid)?;
    check_half_line(x_eval)?;
    let num = &opts.numerics;
    let discrete: Vec<f64> = {
        let coeffs = bound_coefficients(h, bound)?;
        let mut out = vec![0.0; x_eval.len];
        for (c, b) in coeffs.iter().zip(bound) {
            for (o, x) in out.iter_mut().zip(x_eval.points()) {
                *o += c.coefficient * b.eigenfunction.value_at(x) / c.norm_sq;
            }
        }
        out
    };
    let (continuous, lambda_max, tail, nodes, err, converged) = if h.values.iter().all(|v| *v == 0.0) {
        (vec![0.0; x_eval.len], opts.lambda_max, 0.0, 0, 0.0, true)
    } else {
        let x_hi = h.grid.end().max(x_eval.end());
        let (res, lambda_max, tail) = continuous_part(opts, |k| {
            let sol = regular_solution(pot, k * k, x_hi, num)?;
            let hh = h.pair_with(&sample_f(&sol, &h.grid)?) * k_weight(&sol);
            Ok(sample_f(&sol, x_eval)?.into_iter().map(|f| f * hh).collect())
        })?;
        (res.value, lambda_max, tail, res.evaluations, res.error_estimate, res.converged)
    };
    let values: Vec<f64> = continuous.iter().zip(&discrete).map(|(c, d)| c + d).collect();
    let sup_deviation = x_eval
        .points()
        .iter()
        .zip(&values)
        .map(|(x, v)| (v - h.value_at(*x)).abs())
        .fold(0.0, f64::max);
    Ok(Reconstruction {
        values: SampledFunction::new(*x_eval, values)?,
        continuous,
        discrete,
        sup_deviation,
        lambda_max,
        tail_estimate: tail,
        nodes,
        error_estimate: err,
        converged,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParsevalReport {
    pub norm_sq: f64,
    pub discrete: f64,
    pub continuous: f64,
    /// `|discrete + continuous - ‖h‖²| / ‖h‖²`, zero for `h = 0`.
    pub defect: f64,
    pub lambda_max: f64,
    pub tail_estimate: f64,
    pub nodes: usize,
    pub error_estimate: f64,
    pub converged: bool,
}

pub fn parseval_check(pot: &Potential, h: &SampledFunction, bound: &[BoundState], opts: &SpectralOptions) -> Result<ParsevalReport> {
    opts.validate()?;
    check_half_line(&h.grid)?;
    let num = &opts.numerics;
    let norm_sq = h.norm_sq();
    let discrete: f64 = bound_coefficients(h, bound)?
        .iter()
        .map(|c| c.coefficient * c.coefficient / c.norm_sq)
        .sum();
    if norm_sq == 0.0 {
        return Ok(ParsevalReport {
            norm_sq,
            discrete,
            continuous: 0.0,
            defect: 0.0,
            lambda_max: opts.lambda_max,
            tail_estimate: 0.0,
            nodes: 0,
            error_estimate: 0.0,
            converged: true,
        });
    }
    let (res, lambda_max, tail) = continuous_part(opts, |k| {
        let sol = regular_solution(pot, k * k, h.grid.end(), num)?;
        let hh = h.pair_with(&sample_f(&sol, &h.grid)?);
        Ok(vec![hh * hh * k_weight(&sol)])
    })?;
    let continuous = res.scalar();
    Ok(ParsevalReport {
        norm_sq,
        discrete,
        continuous,
        defect: (discrete + continuous - norm_sq).abs() / norm_sq,
        lambda_max,
        tail_estimate: tail,
        nodes: res.evaluations,
        error_estimate: res.error_estimate,
        converged: res.converged,
    })
}

/// `P_{[α,β]} h` on `[0, X]` together with the plane-wave amplitudes that
/// represent it exactly beyond `X`, where the coefficients are free:
/// `Ph(x) = Re Σ w_i a_i e^{i k_i (x - X)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedFunction {
    pub window: (f64, f64),
    pub grid: Grid,
    pub values: Vec<f64>,
    pub derivative: Vec<f64>,
    k: Vec<f64>,
    w: Vec<f64>,
    coeff: Vec<f64>,
    k_weight: Vec<f64>,
    amp: Vec<Complex64>,
    amp_prime: Vec<Complex64>,
    order: usize,
    p_end: f64,
}

/// Projects `h`; the interior grid reaches at least `x_end`, so functions
/// projected with the same `x_end`, window and step can be paired.
pub fn project(
    pot: &Potential,
    alpha: f64,
    beta: f64,
    h: &SampledFunction,
    x_end: f64,
    opts: &SpectralOptions,
) -> Result<ProjectedFunction> {
    opts.validate()?;
    let num = &opts.numerics;
    check_window(alpha, beta, num.lambda_min)?;
    check_half_line(&h.grid)?;
    let x_free = decay_window(pot, num.tail_tol, num.x_max_cap)?;
    let grid = Grid::stepping(0.0, x_free.max(h.grid.end()).max(x_end).max(1.0), h.grid.step)?;
    let x_end = grid.end();
    let rule = GaussLegendre::new(opts.k_order);
    let (k, w) = rule.composite(alpha.sqrt(), beta.sqrt(), opts.k_panels);

    struct Node {
        f: Vec<f64>,
        fp: Vec<f64>,
        coeff: f64,
        weight: f64,
        amp: Complex64,
    }
    let nodes = par::try_map(num.exec, &k, |&kk| {
        let sol = regular_solution(pot, kk * kk, x_end, num)?;
        let (f, qd) = sol.sample(&grid.points())?;
        let fp = qd.iter().zip(grid.points()).map(|(u, x)| u / pot.p(x)).collect();
        let coeff = h.pair_with(&sample_f(&sol, &h.grid)?);
        let amp = coeff / (PI * sol.point.c.conj()) * Complex64::from_polar(1.0, kk * x_end);
        Ok(Node {
            f,
            fp,
            coeff,
            weight: k_weight(&sol),
            amp,
        })
    })?;

    let mut values = vec![0.0; grid.len];
    let mut derivative = vec![0.0; grid.len];
    for (node, wi) in nodes.iter().zip(&w) {
        let s = wi * node.coeff * node.weight;
        for i in 0..grid.len {
            values[i] += s * node.f[i];
            derivative[i] += s * node.fp[i];
        }
    }
    let amp: Vec<Complex64> = nodes.iter().map(|n| n.amp).collect();
    let amp_prime = panel_derivative(&k, &amp, opts.k_order);
    Ok(ProjectedFunction {
        window: (alpha, beta),
        grid,
        values,
        derivative,
        coeff: nodes.iter().map(|n| n.coeff).collect(),
        k_weight: nodes.iter().map(|n| n.weight).collect(),
        k,
        w,
        amp,
        amp_prime,
        order: opts.k_order,
        p_end: pot.p(x_end),
    })
}

/// Derivative in `k` of samples on a composite Gauss rule, panel by panel.
fn panel_derivative(k: &[f64], v: &[Complex64], order: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); v.len()];
    for start in (0..k.len()).step_by(order) {
        let nodes = &k[start..start + order];
        let d = quadrature::differentiation_matrix(nodes);
        for i in 0..order {
            out[start + i] = (0..order).map(|j| v[start + j] * d[i][j]).sum();
        }
    }
    out
}

impl ProjectedFunction {
    fn compatible(&self, other: &Self) -> Result<()> {
        if self.k != other.k || self.grid != other.grid {
            return Err(Error::GridMismatch("projected functions use different k nodes or x grids".into()));
        }
        Ok(())
    }

    /// `∫_X^∞ Re φ · Re ψ` for amplitude sets `a`, `b` on the shared nodes.
    fn exterior(&self, a: &[Complex64], ap: &[Complex64], b: &[Complex64], bp: &[Complex64]) -> f64 {
        let i = Complex64::new(0.0, 1.0);
        let n = self.k.len();
        let mut same = Complex64::new(0.0, 0.0);
        let mut cross = Complex64::new(0.0, 0.0);
        for p in 0..n {
            cross += PI * self.w[p] * a[p] * b[p].conj();
            for q in 0..n {
                let ww = self.w[p] * self.w[q];
                same += ww * a[p] * b[q] * i / (self.k[p] + self.k[q]);
                let pv = if p == q {
                    ap[p] * b[p].conj() - a[p] * bp[p].conj()
                } else {
                    (a[p] * b[q].conj() - a[q] * b[p].conj()) / (self.k[p] - self.k[q])
                };
                cross += 0.5 * i * ww * pv;
            }
        }
        0.5 * (same + cross).re
    }

    /// `<self, other>` over `[0, ∞)`.
    pub fn inner(&self, other: &Self) -> Result<f64> {
        self.compatible(other)?;
        let prod: Vec<f64> = self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect();
        Ok(quadrature::simpson(self.grid.step, &prod) + self.exterior(&self.amp, &self.amp_prime, &other.amp, &other.amp_prime))
    }

    pub fn norm_sq(&self) -> f64 {
        self.inner(self).expect("compatible with itself")
    }

    /// `<g, P h>` on the same nodes, straight from the coefficients.
    pub fn coefficient_pairing(&self, other: &Self) -> Result<f64> {
        self.compatible(other)?;
        Ok((0..self.k.len())
            .map(|i| self.w[i] * self.coeff[i] * other.coeff[i] * self.k_weight[i])
            .sum())
    }

    /// `<f, D f>` in weak form: `∫_0^X (p f'² + q f²) - p f f'|_X` plus the
    /// exact exterior part, where `-f'' = Re Σ w k² a e^{ik(x-X)}`.
    pub fn energy(&self, pot: &Potential) -> f64 {
        let xs = self.grid.points();
        let dens: Vec<f64> = xs
            .iter()
            .enumerate()
            .map(|(i, &x)| pot.p(x) * self.derivative[i].powi(2) + pot.q(x) * self.values[i].powi(2))
            .collect();
        let last = self.grid.len - 1;
        let boundary = self.p_end * self.values[last] * self.derivative[last];
        let b: Vec<Complex64> = self.amp.iter().zip(&self.k).map(|(a, k)| a * k * k).collect();
        let bp: Vec<Complex64> = (0..self.k.len())
            .map(|i| self.amp_prime[i] * self.k[i] * self.k[i] + 2.0 * self.k[i] * self.amp[i])
            .collect();
        quadrature::simpson(self.grid.step, &dens) - boundary + self.exterior(&self.amp, &self.amp_prime, &b, &bp)
    }

    pub fn order(&self) -> usize {
        self.order
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeAverageEntry {
    pub t: f64,
    pub rhs: f64,
    pub defect: f64,
    pub relative: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeAverageReport {
    pub lhs: f64,
    pub entries: Vec<TimeAverageEntry>,
    pub dt: f64,
    pub nodes: usize,
    /// Relative defects below this are treated as converged.
    pub floor: f64,
    pub non_increasing: bool,
}

impl TimeAverageReport {
    pub fn flagged(&self) -> bool {
        !self.non_increasing
    }
}

pub const TIME_AVERAGE_FLOOR: f64 = 1e-3;

/// Compares `<g, φ(D_0) h>` on the whole line with the average over
/// `t ∈ [0, T]` of `<W U_t g, φ(D) W U_t h>`, where `U_t` translates by `t`
/// and `W` restricts to `[0, ∞)`. The translates stay on the lattice of the
/// data by taking `t` in multiples of `dt_steps` grid steps.
pub fn time_average_check(
    pot: &Potential,
    phi: &SpectralBump,
    g: &SampledFunction,
    h: &SampledFunction,
    ts: &[f64],
    dt_steps: usize,
    opts: &SpectralOptions,
) -> Result<TimeAverageReport> {
    opts.validate()?;
    let num = &opts.numerics;
    let hull = g.grid.hull(&h.grid)?;
    let g = g.extend_to(&hull)?;
    let h = h.extend_to(&hull)?;
    let dx = hull.step;
    let dt = dx * dt_steps.max(1) as f64;
    if ts.is_empty() || ts.iter().any(|t| !(*t > 0.0)) || ts.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("averaging times must be positive and increasing".into()));
    }
    let lo = phi.lo.max(num.lambda_min);
    if phi.hi <= lo {
        return Ok(TimeAverageReport {
            lhs: 0.0,
            entries: ts.iter().map(|&t| TimeAverageEntry { t, rhs: 0.0, defect: 0.0, relative: 0.0 }).collect(),
            dt,
            nodes: 0,
            floor: TIME_AVERAGE_FLOOR,
            non_increasing: true,
        });
    }
    let t_max = *ts.last().expect("nonempty");
    let m_max = (t_max / dt).round() as usize;
    let (ka, kb) = (lo.sqrt(), phi.hi.sqrt());
    let panels = opts.k_panels + ((kb - ka) * t_max / PI).ceil() as usize;
    let (k, w) = GaussLegendre::new(opts.k_order).composite(ka, kb, panels);

    // lattice for F: the hull shifted right by up to t_max
    let shift = dt_steps.max(1);
    let lattice = Grid::new(hull.start, dx, hull.len + m_max * shift)?;
    let x_hi = lattice.end().max(0.0);
    let xs = lattice.points();

    let per_node = par::try_map(num.exec, &(0..k.len()).collect::<Vec<_>>(), |&i| -> Result<(f64, Vec<f64>)> {
        let kk = k[i];
        let lambda = kk * kk;
        let weight = w[i] * phi.eval(lambda);
        if weight == 0.0 {
            return Ok((0.0, vec![0.0; m_max + 1]));
        }
        // whole-line Fourier side
        let mut gf = Complex64::new(0.0, 0.0);
        let mut hf = Complex64::new(0.0, 0.0);
        for (j, x) in hull.points().iter().enumerate() {
            let e = Complex64::from_polar(1.0, -kk * x);
            gf += g.values[j] * e;
            hf += h.values[j] * e;
        }
        let lhs = weight * (gf.conj() * hf).re * dx * dx / PI;

        let sol = regular_solution(pot, lambda, x_hi, num)?;
        let f: Vec<f64> = xs
            .iter()
            .map(|&x| if x < 0.0 { Ok(0.0) } else { sol.state_at(x).map(|u| u[0]) })
            .collect::<Result<_>>()?;
        let scale = weight * k_weight(&sol) * dx * dx;
        let rhs = (0..=m_max)
            .map(|m| {
                let off = m * shift;
                let mut gt = 0.0;
                let mut ht = 0.0;
                for j in 0..hull.len {
                    gt += f[j + off] * g.values[j];
                    ht += f[j + off] * h.values[j];
                }
                scale * gt * ht
            })
            .collect();
        Ok((lhs, rhs))
    })?;

    let lhs: f64 = per_node.iter().map(|n| n.0).sum();
    let mut rhs_t = vec![0.0; m_max + 1];
    for (_, r) in &per_node {
        for (acc, v) in rhs_t.iter_mut().zip(r) {
            *acc += v;
        }
    }
    let entries: Vec<TimeAverageEntry> = ts
        .iter()
        .map(|&t| {
            let m = ((t / dt).round() as usize).max(1);
            let avg = quadrature::simpson(dt, &rhs_t[..=m]) / (m as f64 * dt);
            let defect = (lhs - avg).abs();
            TimeAverageEntry {
                t: m as f64 * dt,
                rhs: avg,
                defect,
                relative: if lhs != 0.0 { defect / lhs.abs() } else { defect },
            }
        })
        .collect();
    let non_increasing = entries
        .windows(2)
        .all(|p| p[1].relative <= p[0].relative || p[1].relative <= TIME_AVERAGE_FLOOR);
    Ok(TimeAverageReport {
        lhs,
        entries,
        dt,
        nodes: k.len(),
        floor: TIME_AVERAGE_FLOOR,
        non_increasing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::make_builtin_potential;

    fn bump() -> SampledFunction {
        SampledFunction::gaussian(3.0, 0.5, 8.0, 0.01, Some(0.0)).unwrap()
    }

    #[test]
    fn kernel_vanishes_at_origin_and_is_symmetric() {
        let opts = SpectralOptions::default();
        let well = make_builtin_potential("capped_well", &[1.0, 5.0, 0.1]).unwrap();
        assert_eq!(projection_kernel(&well, 1.0, 4.0, 0.0, 2.0, &opts).unwrap().value, 0.0);
        let a = projection_kernel(&well, 1.0, 4.0, 1.3, 2.7, &opts).unwrap().value;
        let b = projection_kernel(&well, 1.0, 4.0, 2.7, 1.3, &opts).unwrap().value;
        assert_eq!(a, b);
    }

    #[test]
    fn zero_data_gives_zero() {
        let opts = SpectralOptions::default();
        let free = Potential::free();
        let zero = SampledFunction::zeros(bump().grid);
        let t = transform(&free, &zero, &[0.5, 2.0], &[], &opts.numerics).unwrap();
        assert!(t.points.iter().all(|p| p.value == 0.0));
        let p = parseval_check(&free, &zero, &[], &opts).unwrap();
        assert_eq!((p.norm_sq, p.continuous, p.discrete), (0.0, 0.0, 0.0));
        let r = reconstruct(&free, &zero, &zero.grid, &[], &opts).unwrap();
        assert!(r.values.values.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn window_must_clear_threshold() {
        let opts = SpectralOptions::default();
        let free = Potential::free();
        assert!(weyl_pairing(&free, 0.0, 1.0, &bump(), &bump(), &opts).is_err());
        assert!(weyl_pairing(&free, 2.0, 1.0, &bump(), &bump(), &opts).is_err());
    }

    #[test]
    fn projected_norm_matches_coefficients_free() {
        let opts = SpectralOptions::default();
        let free = Potential::free();
        let p = project(&free, 1.0, 4.0, &bump(), 0.0, &opts).unwrap();
        let direct = p.coefficient_pairing(&p).unwrap();
        let via_x = p.norm_sq();
        assert!((direct - via_x).abs() <= 1e-8 * direct, "{direct} {via_x}");
        let e = p.energy(&free) / via_x;
        assert!(e > 1.0 - 1e-6 && e < 4.0 + 1e-6, "{e}");
    }

    #[test]
    fn time_average_below_threshold_is_zero() {
        let opts = SpectralOptions::default();
        let phi = SpectralBump::new(-2.0, 1e-4).unwrap();
        let g = SampledFunction::smooth_bump(5.0, 2.0, 0.01).unwrap();
        let r = time_average_check(&Potential::free(), &phi, &g, &g, &[10.0], 5, &opts).unwrap();
        assert_eq!(r.lhs, 0.0);
        assert_eq!(r.entries[0].rhs, 0.0);
    }
}
