//! Green's kernel `k_ν(x, y) = F_ν(min) G_ν(max) / w(ν)` of `D - ν`, the
//! resolvent on sampled data, and spectral projections as integrated
//! resolvent differences at finite `ε`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::asymptotics::regular_solution;
use crate::coeffs::{DecayClass, Potential};
use crate::error::{Error, Result};
use crate::numerics::Numerics;
use crate::odeflow::{decaying_eigenfunction, regular_eigenfunction, wronskian, Eigenfunction};
use crate::quadrature::{self, AdaptiveOptions};
use crate::sampled::{ComplexSampled, SampledFunction};

/// Point beyond which the tail majorant integrates to less than half of `tol`.
pub fn decay_window(pot: &Potential, tol: f64, cap: f64) -> Result<f64> {
    match pot.decay_class() {
        DecayClass::EventuallyConstant { x_cut } => Ok(x_cut),
        _ => pot.effective_support(0.5 * tol, cap),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GreenKernelSample {
    pub nu: Complex64,
    pub x: f64,
    pub y: f64,
    pub value: Complex64,
    pub wronskian_w: Complex64,
}

const MIN_WRONSKIAN: f64 = 1e-12;

fn check_nu(nu: Complex64) -> Result<()> {
    if nu.im == 0.0 && nu.re >= 0.0 {
        return Err(Error::NoDecayingSolution(nu));
    }
    Ok(())
}

/// Regular and decaying solutions at `ν` on a common set of points, plus `w(ν)`.
fn solution_pair(
    pot: &Potential,
    nu: Complex64,
    xs: &[f64],
    num: &Numerics,
) -> Result<(Eigenfunction<Complex64>, Eigenfunction<Complex64>, Complex64)> {
    check_nu(nu)?;
    let x_max = decay_window(pot, num.ode_tol, num.x_max_cap)?;
    let f = regular_eigenfunction(pot, nu, xs, num.ode_tol)?;
    let g = decaying_eigenfunction(pot, nu, xs, x_max, num.ode_tol)?;
    let x_w = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let w = wronskian(&f, &g, x_w)?;
    if !(w.norm() >= MIN_WRONSKIAN) {
        return Err(Error::SmallWronskian { nu, value: w });
    }
    Ok((f, g, w))
}

pub fn green_kernel(pot: &Potential, nu: Complex64, x: f64, y: f64, num: &Numerics) -> Result<GreenKernelSample> {
    let (lo, hi) = (x.min(y), x.max(y));
    let (f, g, w) = solution_pair(pot, nu, &[lo, hi], num)?;
    Ok(GreenKernelSample {
        nu,
        x,
        y,
        value: f.values[0] * g.values[1] / w,
        wronskian_w: w,
    })
}

/// `g(x) = ∫ k_ν(x, y) h(y) dy` on the grid of `h`. The integral is split at
/// `y = x`: `g(x) = [G(x) ∫_0^x F h + F(x) ∫_x^∞ G h] / w`.
pub fn apply_resolvent(pot: &Potential, nu: Complex64, h: &SampledFunction, num: &Numerics) -> Result<ComplexSampled> {
    let xs = h.points();
    if xs[0] < 0.0 {
        return Err(Error::OutOfRange {
            x: xs[0],
            lo: 0.0,
            hi: f64::INFINITY,
        });
    }
    let (f, g, w) = solution_pair(pot, nu, &xs, num)?;
    let dx = h.grid.step;
    let fh: Vec<Complex64> = f.values.iter().zip(&h.values).map(|(a, b)| a * b).collect();
    let gh: Vec<Complex64> = g.values.iter().zip(&h.values).map(|(a, b)| a * b).collect();
    let left = quadrature::cumulative(dx, &fh);
    // accumulate from the far end so F(x) never multiplies a cancellation residue
    let mut right = quadrature::cumulative(dx, &gh.iter().rev().copied().collect::<Vec<_>>());
    right.reverse();
    let values = (0..xs.len())
        .map(|i| (g.values[i] * left[i] + f.values[i] * right[i]) / w)
        .collect();
    ComplexSampled::new(h.grid, values)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Method {
    Weyl,
    Kodaira { epsilon: f64 },
}

/// A pairing `<g, P_{[α, β]} h>` with quadrature metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionReport {
    pub interval: (f64, f64),
    pub method: Method,
    pub value: f64,
    pub nodes: usize,
    pub error_estimate: f64,
    pub converged: bool,
    /// `(λ, integrand)` at every accepted quadrature node, ordered by λ.
    /// For the kernel-formula pairing the abscissa is still reported in λ.
    pub samples: Vec<(f64, f64)>,
}

pub(crate) fn check_window(alpha: f64, beta: f64, lambda_min: f64) -> Result<()> {
    if !(alpha > lambda_min) || !(beta > alpha) {
        return Err(Error::InvalidParameter(format!(
            "projection window [{alpha}, {beta}] must satisfy {lambda_min} < α < β"
        )));
    }
    Ok(())
}

/// `(1/2πi) ∫_α^β <g, [R(λ+iε) - R(λ-iε)] h> dλ`. For real data the bracket is
/// `2i Im <g, R(λ+iε) h>`, so one resolvent solve per node suffices.
pub fn kodaira_pairing(
    pot: &Potential,
    alpha: f64,
    beta: f64,
    epsilon: f64,
    g: &SampledFunction,
    h: &SampledFunction,
    num: &Numerics,
    quad: &AdaptiveOptions,
) -> Result<ProjectionReport> {
    check_window(alpha, beta, 0.0)?;
    if !(epsilon > 0.0) {
        return Err(Error::InvalidParameter(format!("ε must be positive, got {epsilon}")));
    }
    let hull = g.grid.hull(&h.grid)?;
    let g = g.extend_to(&hull)?;
    let h = h.extend_to(&hull)?;
    let method = Method::Kodaira { epsilon };
    if h.values.iter().all(|v| *v == 0.0) || g.values.iter().all(|v| *v == 0.0) {
        return Ok(ProjectionReport {
            interval: (alpha, beta),
            method,
            value: 0.0,
            nodes: 0,
            error_estimate: 0.0,
            converged: true,
            samples: Vec::new(),
        });
    }
    let res = quadrature::adaptive(alpha, beta, quad, num.exec, |lambda| -> Result<Vec<f64>> {
        let r = apply_resolvent(pot, Complex64::new(lambda, epsilon), &h, num)?;
        let prod: Vec<f64> = r.values.iter().zip(&g.values).map(|(a, b)| a.im * b).collect();
        Ok(vec![quadrature::trapezoid(hull.step, &prod) / PI])
    })?;
    Ok(ProjectionReport {
        interval: (alpha, beta),
        method,
        value: res.scalar(),
        nodes: res.evaluations,
        error_estimate: res.error_estimate,
        converged: res.converged,
        samples: res.samples.iter().map(|s| (s.x, s.value[0])).collect(),
    })
}

/// `F_λ(x) F_λ(y) ρ(λ)`, the ε → 0 limit of the resolvent-difference kernel.
pub fn limit_kernel(pot: &Potential, lambda: f64, x: f64, y: f64, num: &Numerics) -> Result<f64> {
    let sol = regular_solution(pot, lambda, x.max(y), num)?;
    let fx = sol.state_at(x)?[0];
    let fy = sol.state_at(y)?[0];
    Ok(fx * fy * sol.point.density)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::make_builtin_potential;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn free_kernel_closed_form() {
        let num = Numerics::default();
        let free = Potential::free();
        let k = green_kernel(&free, c(-1.0, 0.0), 1.0, 2.0, &num).unwrap();
        assert!((k.value - c(1f64.sinh() * (-2f64).exp(), 0.0)).norm() < 1e-9);
        assert!((k.wronskian_w - 1.0).norm() < 1e-9);
        let k0 = green_kernel(&free, c(-1.0, 0.0), 0.0, 2.0, &num).unwrap();
        assert_eq!(k0.value, c(0.0, 0.0));
        let swapped = green_kernel(&free, c(-1.0, 0.0), 2.0, 1.0, &num).unwrap();
        assert_eq!(swapped.value, k.value);
        assert!(green_kernel(&free, c(1.0, 0.0), 1.0, 2.0, &num).is_err());
    }

    #[test]
    fn resolvent_of_zero_is_zero() {
        let num = Numerics::default();
        let well = make_builtin_potential("capped_well", &[1.0, 5.0, 0.1]).unwrap();
        let h = SampledFunction::gaussian(3.0, 0.5, 8.0, 0.01, Some(0.0)).unwrap();
        let zero = SampledFunction::zeros(h.grid);
        let r = apply_resolvent(&well, c(2.0, 0.5), &zero, &num).unwrap();
        assert!(r.values.iter().all(|v| *v == c(0.0, 0.0)));
    }

    #[test]
    fn resolvent_norm_bound() {
        let num = Numerics::default();
        let free = Potential::free();
        let h = SampledFunction::gaussian(4.0, 0.6, 9.0, 0.01, Some(0.0)).unwrap();
        // extend far so the resolvent tail is captured in the norm
        let wide = crate::sampled::Grid::stepping(0.0, 60.0, 0.01).unwrap();
        let h = h.extend_to(&wide).unwrap();
        let r = apply_resolvent(&free, c(0.0, 1.0), &h, &num).unwrap();
        let norm_r: f64 = quadrature::trapezoid(0.01, &r.values.iter().map(|v| v.norm_sqr()).collect::<Vec<_>>());
        assert!(norm_r <= h.norm_sq(), "{norm_r} {}", h.norm_sq());
    }

    #[test]
    fn limit_kernel_free_values() {
        let num = Numerics::default();
        let free = Potential::free();
        let q = std::f64::consts::FRAC_PI_4;
        let v = limit_kernel(&free, 4.0, q, q, &num).unwrap();
        assert!((v - 1.0 / (2.0 * PI)).abs() < 1e-9);
        assert_eq!(limit_kernel(&free, 4.0, 0.0, 1.3, &num).unwrap(), 0.0);
        let v = limit_kernel(&free, 1.0, 1.0, 2.0, &num).unwrap();
        assert!((v - 1f64.sin() * 2f64.sin() / PI).abs() < 1e-9);
    }
}
