//! Asymptotics of the regular solution for `λ > 0`.
//!
//! With `S(x) = exp(-x C_λ) u(x)` one has `S' = exp(-xC) Q exp(xC) S`, so
//! `S` converges to `s(∞) = (a, b)` at a rate controlled by
//! `k(x) = ∫_x^∞ ‖exp(-tC) Q(t) exp(tC)‖ dt`. Gronwall gives
//! `‖S(y) - S(x)‖ <= (e^{k(x)} - 1) ‖S(x)‖ <= k(x) e^{k(x)} ‖S(x)‖` for `y > x`.
//!
//! Decomposing `s(∞)` over the eigenvectors `[1; ±i√λ]` of `C_λ`,
//! `F(x) ~ c e^{i√λx} + conj(c) e^{-i√λx}` with `c = a/2 - i b/(2√λ)`.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coeffs::{DecayClass, Potential};
use crate::error::{Error, Result};
use crate::numerics::Numerics;
use crate::odeflow::{exp_flow, mat_vec, solve_system, StateVector, Trajectory};
use crate::par;
use crate::scalar::norm2;

/// `sup_t ‖exp(t C_λ)‖²_HS` over `λ ∈ [lo, hi]`.
///
/// For `λ = k² > 0`, `‖exp(tC)‖²_HS = 2 + sin²(kt)(k² + k⁻² - 2)`, whose
/// supremum `λ + 1/λ` is convex in `λ`, so the window maximum sits at an end.
pub fn sup_flow_norm_sq(lo: f64, hi: f64) -> Result<f64> {
    if !(lo > 0.0) || hi < lo {
        return Err(Error::WindowTouchesThreshold { lo, hi });
    }
    Ok((lo + 1.0 / lo).max(hi + 1.0 / hi))
}

/// Upper bound for `∫_x^∞ ‖exp(-tC) Q(t) exp(tC)‖_HS dt`, uniform over the window.
pub fn k_tail(pot: &Potential, window: (f64, f64), x: f64) -> Result<f64> {
    let m2 = sup_flow_norm_sq(window.0, window.1)?;
    let tail = pot.tail_integral(x);
    Ok(if tail == 0.0 { 0.0 } else { m2 * tail })
}

/// `s(x) = exp(-x C_λ) u(x)` together with the run that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SInfinity {
    pub a: f64,
    pub b: f64,
    /// Certified truncation part plus the integration allowance.
    pub err: f64,
    pub x_max: f64,
    pub k_tail: f64,
    /// `C` in `‖s(y) - s(x_max)‖ <= C k_tail(x_max)`: `e^{k} sup ‖S‖` along the run.
    pub growth_constant: f64,
    /// Estimated global integration error in `u(x_max)`.
    pub state_error: f64,
    pub steps: usize,
}

fn check_lambda(lambda: f64, num: &Numerics) -> Result<()> {
    if !(lambda > num.lambda_min) {
        return Err(Error::BelowThreshold {
            lambda,
            lambda_min: num.lambda_min,
        });
    }
    Ok(())
}

/// Truncation point: `x_cut` for eventually constant coefficients, otherwise
/// doubling until `k_tail <= tail_tol`.
pub fn truncation_point(pot: &Potential, lambda: f64, num: &Numerics) -> Result<f64> {
    if let DecayClass::EventuallyConstant { x_cut } = pot.decay_class() {
        return Ok(x_cut);
    }
    let mut x: f64 = match pot.decay_class() {
        DecayClass::Exponential { rate } => (1.0 / rate).max(1.0),
        _ => 1.0,
    };
    loop {
        if k_tail(pot, (lambda, lambda), x)? <= num.tail_tol {
            return Ok(x);
        }
        x *= 2.0;
        if x > num.x_max_cap {
            return Err(Error::TailTooLong { cap: num.x_max_cap });
        }
    }
}

/// `s(x) = exp(-x C_λ) u(x)` at an arbitrary point (no truncation logic).
pub fn s_at(pot: &Potential, lambda: f64, x: f64, num: &Numerics) -> Result<[f64; 2]> {
    let u0 = StateVector::new(0.0, pot.p(0.0));
    if x == 0.0 {
        return Ok(u0.as_array());
    }
    let traj = solve_system(pot, lambda, u0, 0.0, x, num.ode_tol)?;
    Ok(mat_vec(&exp_flow(lambda, -x), &traj.end_state()))
}

pub fn s_infinity(pot: &Potential, lambda: f64, num: &Numerics) -> Result<SInfinity> {
    Ok(regular_solution(pot, lambda, 0.0, num)?.s)
}

/// Regular solution for `λ > λ_min` together with its scattering data.
/// Past the truncation point the state is continued by the exact free
/// flow when the coefficients are eventually constant.
#[derive(Debug, Clone)]
pub struct RegularSolution {
    pub s: SInfinity,
    pub point: ScatteringPoint,
    traj: Option<Trajectory<f64>>,
    u_max: [f64; 2],
    exact_exterior: bool,
}

impl RegularSolution {
    pub fn lambda(&self) -> f64 {
        self.point.lambda
    }

    pub fn state_at(&self, x: f64) -> Result<[f64; 2]> {
        let x_max = self.s.x_max;
        match &self.traj {
            Some(t) if x < x_max || (!self.exact_exterior && x <= t.end()) => t.eval(x),
            _ => {
                if x < x_max {
                    return Err(Error::OutOfRange { x, lo: x_max, hi: f64::INFINITY });
                }
                Ok(mat_vec(&exp_flow(self.point.lambda, x - x_max), &self.u_max))
            }
        }
    }

    /// `F` and `pF'` on a set of points.
    pub fn sample(&self, xs: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let mut f = Vec::with_capacity(xs.len());
        let mut qd = Vec::with_capacity(xs.len());
        for &x in xs {
            let u = self.state_at(x)?;
            f.push(u[0]);
            qd.push(u[1]);
        }
        Ok((f, qd))
    }
}

/// Integrates the regular solution far enough for both `s(∞)` and samples
/// up to `x_hi`.
pub fn regular_solution(pot: &Potential, lambda: f64, x_hi: f64, num: &Numerics) -> Result<RegularSolution> {
    check_lambda(lambda, num)?;
    let x_max = truncation_point(pot, lambda, num)?;
    let exact_exterior = matches!(pot.decay_class(), DecayClass::EventuallyConstant { .. });
    let x_end = if exact_exterior { x_max } else { x_max.max(x_hi) };
    let u0 = StateVector::new(0.0, pot.p(0.0));
    let m2 = sup_flow_norm_sq(lambda, lambda)?;

    let (traj, u_max, sup_s, sup_u, steps) = if x_end > 0.0 {
        let traj = solve_system(pot, lambda, u0, 0.0, x_end, num.ode_tol)?;
        let u_max = traj.eval(x_max)?;
        let mut sup_s = norm2(&mat_vec(&exp_flow(lambda, -x_max), &u_max));
        let mut sup_u: f64 = 0.0;
        let mut steps = 0;
        for (xi, ui) in traj.grid.iter().zip(&traj.states) {
            if *xi <= x_max {
                sup_s = sup_s.max(norm2(&mat_vec(&exp_flow(lambda, -xi), ui)));
                sup_u = sup_u.max(norm2(ui));
                steps += 1;
            }
        }
        (Some(traj), u_max, sup_s, sup_u, steps - 1)
    } else {
        let u = u0.as_array();
        (None, u, norm2(&u), norm2(&u), 0)
    };

    let s_vec = mat_vec(&exp_flow(lambda, -x_max), &u_max);
    let k = k_tail(pot, (lambda, lambda), x_max)?;
    let growth_constant = k.exp() * sup_s;
    // heuristic: local errors summed and carried by the free flow
    let state_error = steps as f64 * num.ode_tol * (1.0 + sup_u) * m2;
    let s = SInfinity {
        a: s_vec[0],
        b: s_vec[1],
        err: growth_constant * k + m2.sqrt() * state_error,
        x_max,
        k_tail: k,
        growth_constant,
        state_error,
        steps,
    };

    let kk = lambda.sqrt();
    let c = Complex64::new(0.5 * s.a, -0.5 * s.b / kk);
    let c_abs_sq = c.norm_sqr();
    if !(c_abs_sq >= 1e-14) {
        return Err(Error::AmplitudeBreakdown { lambda, c_abs_sq });
    }
    let point = ScatteringPoint {
        lambda,
        a: s.a,
        b: s.b,
        c,
        c_abs_sq,
        density: 1.0 / (4.0 * PI * kk * c_abs_sq),
        truncation_error_bound: s.err,
        growth_constant,
        k_tail: k,
        x_max,
        state_error,
    };
    Ok(RegularSolution {
        s,
        point,
        traj,
        u_max,
        exact_exterior,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScatteringPoint {
    pub lambda: f64,
    pub a: f64,
    pub b: f64,
    pub c: Complex64,
    pub c_abs_sq: f64,
    pub density: f64,
    pub truncation_error_bound: f64,
    pub growth_constant: f64,
    pub k_tail: f64,
    pub x_max: f64,
    pub state_error: f64,
}

impl ScatteringPoint {
    pub fn k(&self) -> f64 {
        self.lambda.sqrt()
    }

    /// `F_{0,λ}(x) = c e^{i√λx} + conj(c) e^{-i√λx}`.
    pub fn comparison_wave(&self, x: f64) -> f64 {
        2.0 * (self.c * Complex64::from_polar(1.0, self.k() * x)).re
    }

    /// Bound on `|F_λ(x) - F_{0,λ}(x)|` for `x >= x_max`, as computed here:
    /// integration error of `F` plus the flow image of the error in `s`.
    pub fn wave_error_bound(&self) -> f64 {
        let mk = (self.lambda + 1.0 / self.lambda).sqrt();
        self.state_error + mk * self.truncation_error_bound
    }
}

pub fn c_function(pot: &Potential, lambda: f64, num: &Numerics) -> Result<ScatteringPoint> {
    Ok(regular_solution(pot, lambda, 0.0, num)?.point)
}

/// `ρ(λ) = 1 / (4π √λ |c(λ)|²)`.
pub fn spectral_density(pot: &Potential, lambda: f64, num: &Numerics) -> Result<f64> {
    Ok(c_function(pot, lambda, num)?.density)
}

/// Scattering data on a λ-grid; output order follows the input order.
pub fn sweep(pot: &Potential, lambdas: &[f64], num: &Numerics) -> Result<Vec<ScatteringPoint>> {
    par::try_map(num.exec, lambdas, |&l| c_function(pot, l, num))
}

pub const SWEEP_CSV_HEADER: &str = "lambda,a,b,re_c,im_c,c_abs_sq,density,err_bound";

/// Sweep table with 17 significant digits per number.
pub fn sweep_csv(points: &[ScatteringPoint]) -> String {
    let mut out = String::with_capacity(64 * (points.len() + 1));
    out.push_str(SWEEP_CSV_HEADER);
    out.push('\n');
    for p in points {
        let _ = writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            p.lambda, p.a, p.b, p.c.re, p.c.im, p.c_abs_sq, p.density, p.truncation_error_bound
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::make_builtin_potential;
    use crate::odeflow::regular_eigenfunction;

    #[test]
    fn free_k_tail_vanishes() {
        let free = Potential::free();
        assert_eq!(k_tail(&free, (0.5, 9.0), 0.0).unwrap(), 0.0);
        assert!(k_tail(&free, (0.0, 1.0), 0.0).is_err());
    }

    #[test]
    fn flow_norm_supremum_matches_scan() {
        for lam in [0.05f64, 0.7, 1.0, 3.0, 25.0] {
            let k: f64 = lam.sqrt();
            let mut best: f64 = 0.0;
            for i in 0..20000 {
                let t = i as f64 * (2.0 * PI / k) / 20000.0;
                let m = exp_flow(lam, t);
                best = best.max(m.iter().flatten().map(|v| v * v).sum());
            }
            let closed = sup_flow_norm_sq(lam, lam).unwrap();
            assert!(closed * (1.0 + 1e-14) >= best && (closed - best) < 1e-6 * closed, "{lam}: {closed} vs {best}");
        }
    }

    #[test]
    fn capped_well_tail_is_zero_past_the_ramp() {
        let well = make_builtin_potential("capped_well", &[1.0, 5.0, 0.1]).unwrap();
        assert_eq!(k_tail(&well, (1.0, 4.0), 10.0).unwrap(), 0.0);
        assert!(k_tail(&well, (1.0, 4.0), 5.0).unwrap() > 0.0);
    }

    #[test]
    fn exp_decay_tail_is_monotone() {
        let pot = make_builtin_potential("exp_decay", &[1.0, 1.0]).unwrap();
        let m2 = 4.0 + 0.25;
        let mut prev = f64::INFINITY;
        for i in 0..40 {
            let x = 0.5 * i as f64;
            let k = k_tail(&pot, (1.0, 4.0), x).unwrap();
            assert!((k - m2 * (-x).exp()).abs() <= 1e-15 * m2);
            assert!(k < prev);
            prev = k;
        }
    }

    #[test]
    fn free_scattering_data() {
        let num = Numerics::default();
        let free = Potential::free();
        let s = s_infinity(&free, 4.0, &num).unwrap();
        assert_eq!((s.a, s.b, s.err), (0.0, 1.0, 0.0));
        let p = c_function(&free, 4.0, &num).unwrap();
        assert_eq!(p.c_abs_sq, 1.0 / 16.0);
        assert!((p.density - 2.0 / PI).abs() < 1e-15);
        for x in [1.0, 5.0, 20.0] {
            let s = s_at(&free, 1.0, x, &num).unwrap();
            assert!((s[0]).abs() < 1e-9 && (s[1] - 1.0).abs() < 1e-9);
        }
        assert!(c_function(&free, 1e-4, &num).is_err());
    }

    #[test]
    fn comparison_wave_matches_far_field() {
        let num = Numerics::default();
        let well = make_builtin_potential("capped_well", &[1.0, 5.0, 0.1]).unwrap();
        let p = c_function(&well, 1.0, &num).unwrap();
        assert!(p.a != 0.0 || p.b != 0.0);
        let grid: Vec<f64> = (0..=100).map(|i| 10.0 + 0.1 * i as f64).collect();
        let f = regular_eigenfunction(&well, 1.0, &grid, num.ode_tol).unwrap();
        let worst = grid
            .iter()
            .zip(&f.values)
            .map(|(x, v)| (v - p.comparison_wave(*x)).abs())
            .fold(0.0, f64::max);
        assert!(worst <= p.wave_error_bound(), "{worst} > {}", p.wave_error_bound());
    }

    #[test]
    fn sweep_csv_has_fixed_shape() {
        let num = Numerics::default();
        let free = Potential::free();
        let pts = sweep(&free, &[0.5, 1.0, 2.0], &num).unwrap();
        let csv = sweep_csv(&pts);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], SWEEP_CSV_HEADER);
        assert_eq!(lines.len(), 4);
        assert!(lines[2].starts_with("1.0000000000000000e0,"));
    }
}
