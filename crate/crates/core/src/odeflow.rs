//! The system `u' = (C_λ + Q(x)) u` for `u = [F; pF']`, i.e.
//! `F' = u₂/p`, `(pF')' = (q - λ) F`.
//!
//! Integration is a Dormand-Prince 5(4) pair with the standard 4th-order
//! dense output, stopping at every coefficient breakpoint.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coeffs::{DecayClass, Potential};
use crate::error::{Error, Result};
use crate::scalar::{norm2, Scalar};

pub type Mat2<T> = [[T; 2]; 2];

/// `exp(x C_λ)` with `C_λ = [[0, 1], [-λ, 0]]`.
pub fn exp_xc(lambda: Complex64, x: f64) -> Mat2<Complex64> {
    exp_flow(lambda, x)
}

pub fn exp_flow<T: Scalar>(lambda: T, x: f64) -> Mat2<T> {
    let (c, s) = T::cos_sinc(lambda, x);
    [[c, s], [-(lambda * s), c]]
}

pub fn mat_vec<T: Scalar>(m: &Mat2<T>, u: &[T; 2]) -> [T; 2] {
    [m[0][0] * u[0] + m[0][1] * u[1], m[1][0] * u[0] + m[1][1] * u[1]]
}

pub fn mat_mul<T: Scalar>(a: &Mat2<T>, b: &Mat2<T>) -> Mat2<T> {
    let mut out = [[T::default(); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

pub fn hs_norm<T: Scalar>(m: &Mat2<T>) -> f64 {
    m.iter().flatten().map(|v| v.modulus_sq()).sum::<f64>().sqrt()
}

/// `u(x) = [F(x); p(x) F'(x)]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateVector<T = Complex64> {
    pub value: T,
    pub quasi_derivative: T,
}

impl<T: Scalar> StateVector<T> {
    pub fn new(value: T, quasi_derivative: T) -> Self {
        Self { value, quasi_derivative }
    }

    pub fn as_array(&self) -> [T; 2] {
        [self.value, self.quasi_derivative]
    }

    pub fn from_array(u: [T; 2]) -> Self {
        Self::new(u[0], u[1])
    }
}

// Dormand-Prince 5(4) tableau
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const MAX_STEPS: usize = 2_000_000;

/// One accepted step with its dense-output coefficients.
#[derive(Debug, Clone, PartialEq)]
struct Step<T> {
    x: f64,
    h: f64,
    rcont: [[T; 2]; 5],
}

impl<T: Scalar> Step<T> {
    fn eval(&self, x: f64) -> [T; 2] {
        let th = (x - self.x) / self.h;
        let th1 = 1.0 - th;
        let r = &self.rcont;
        let f = |i: usize| r[0][i] + (r[1][i] + (r[2][i] + (r[3][i] + r[4][i] * th1) * th) * th1) * th;
        [f(0), f(1)]
    }

    fn derivative(&self, x: f64) -> [T; 2] {
        let th = (x - self.x) / self.h;
        let r = &self.rcont;
        let a = 1.0 - 2.0 * th;
        let b = th * (2.0 - 3.0 * th);
        let c = 2.0 * th * (1.0 - th) * (1.0 - 2.0 * th);
        let f = |i: usize| (r[1][i] + r[2][i] * a + r[3][i] * b + r[4][i] * c) * (1.0 / self.h);
        [f(0), f(1)]
    }
}

/// Sampled flow of `u' = (C_λ + Q) u` from `x0` to `x1` (either direction).
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T = Complex64> {
    pub lambda: T,
    pub tol: f64,
    /// Accepted step endpoints, starting at `x0`, in integration order.
    pub grid: Vec<f64>,
    pub states: Vec<[T; 2]>,
    steps: Vec<Step<T>>,
}

impl<T: Scalar> Trajectory<T> {
    fn trivial(lambda: T, x0: f64, u0: [T; 2], tol: f64) -> Self {
        Self {
            lambda,
            tol,
            grid: vec![x0],
            states: vec![u0],
            steps: Vec::new(),
        }
    }

    pub fn start(&self) -> f64 {
        self.grid[0]
    }

    pub fn end(&self) -> f64 {
        *self.grid.last().unwrap()
    }

    pub fn end_state(&self) -> [T; 2] {
        *self.states.last().unwrap()
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    fn forward(&self) -> bool {
        self.end() >= self.start()
    }

    fn locate(&self, x: f64) -> Result<Option<&Step<T>>> {
        let (lo, hi) = if self.forward() {
            (self.start(), self.end())
        } else {
            (self.end(), self.start())
        };
        let slack = 1e-12 * (1.0 + lo.abs().max(hi.abs()));
        if x < lo - slack || x > hi + slack {
            return Err(Error::OutOfRange { x, lo, hi });
        }
        if self.steps.is_empty() {
            return Ok(None);
        }
        let i = if self.forward() {
            self.grid.partition_point(|g| *g <= x)
        } else {
            self.grid.partition_point(|g| *g >= x)
        };
        Ok(Some(&self.steps[i.clamp(1, self.steps.len()) - 1]))
    }

    /// Dense-output state at `x`.
    pub fn eval(&self, x: f64) -> Result<[T; 2]> {
        Ok(match self.locate(x)? {
            Some(step) => step.eval(x),
            None => self.states[0],
        })
    }

    /// Derivative of the dense-output interpolant at `x`.
    pub fn derivative(&self, x: f64) -> Result<[T; 2]> {
        Ok(match self.locate(x)? {
            Some(step) => step.derivative(x),
            None => [T::default(); 2],
        })
    }

    /// `max ‖u'(x) - (C_λ + Q)u(x)‖ / (1 + ‖u‖)` over step midpoints, using
    /// the dense-output derivative.
    pub fn midpoint_residual(&self, pot: &Potential) -> f64 {
        let mut worst: f64 = 0.0;
        for step in &self.steps {
            let x = step.x + 0.5 * step.h;
            let u = step.eval(x);
            let du = step.derivative(x);
            let f = rhs(pot, self.lambda, x, &u);
            let r = norm2(&[du[0] - f[0], du[1] - f[1]]);
            worst = worst.max(r / (1.0 + norm2(&u)));
        }
        worst
    }

    /// Largest `‖u‖` over accepted steps.
    pub fn sup_norm(&self) -> f64 {
        self.states.iter().map(norm2).fold(0.0, f64::max)
    }
}

#[inline]
fn rhs<T: Scalar>(pot: &Potential, lambda: T, x: f64, u: &[T; 2]) -> [T; 2] {
    let p = pot.p(x);
    let q = pot.q(x);
    [u[1] * (1.0 / p), u[0] * T::from_real(q) - lambda * u[0]]
}

fn axpy<T: Scalar>(u: &[T; 2], terms: &[(f64, &[T; 2])]) -> [T; 2] {
    let mut out = *u;
    for (c, k) in terms {
        out[0] = out[0] + k[0] * *c;
        out[1] = out[1] + k[1] * *c;
    }
    out
}

fn scale<T: Scalar>(k: &[T; 2], h: f64) -> [T; 2] {
    [k[0] * h, k[1] * h]
}

/// Integrates one smooth segment, appending accepted steps.
fn integrate_segment<T: Scalar>(
    pot: &Potential,
    lambda: T,
    x_from: f64,
    x_to: f64,
    tol: f64,
    h_init: f64,
    traj: &mut Trajectory<T>,
) -> Result<f64> {
    let dir = if x_to >= x_from { 1.0 } else { -1.0 };
    let mut x = x_from;
    let mut u = traj.end_state();
    let mut k1 = rhs(pot, lambda, x, &u);
    let mut h = h_init.min((x_to - x_from).abs());
    let mut last_ok_h = h;
    let mut rejected_last = false;

    while (x_to - x) * dir > 0.0 {
        if traj.steps.len() >= MAX_STEPS {
            return Err(Error::TooManySteps { x, steps: MAX_STEPS });
        }
        let remaining = (x_to - x).abs();
        let last = h >= remaining * (1.0 - 1e-12);
        if last {
            h = remaining;
        }
        if h < 1e-14 * (1.0 + x.abs()) {
            return Err(Error::StepUnderflow { x });
        }
        let hs = dir * h;

        let k2 = rhs(pot, lambda, x + C2 * hs, &axpy(&u, &[(hs * A21, &k1)]));
        let k3 = rhs(pot, lambda, x + C3 * hs, &axpy(&u, &[(hs * A31, &k1), (hs * A32, &k2)]));
        let k4 = rhs(
            pot,
            lambda,
            x + C4 * hs,
            &axpy(&u, &[(hs * A41, &k1), (hs * A42, &k2), (hs * A43, &k3)]),
        );
        let k5 = rhs(
            pot,
            lambda,
            x + C5 * hs,
            &axpy(&u, &[(hs * A51, &k1), (hs * A52, &k2), (hs * A53, &k3), (hs * A54, &k4)]),
        );
        let x_new = if last { x_to } else { x + hs };
        let k6 = rhs(
            pot,
            lambda,
            x + hs,
            &axpy(
                &u,
                &[(hs * A61, &k1), (hs * A62, &k2), (hs * A63, &k3), (hs * A64, &k4), (hs * A65, &k5)],
            ),
        );
        let u_new = axpy(
            &u,
            &[(hs * A71, &k1), (hs * A73, &k3), (hs * A74, &k4), (hs * A75, &k5), (hs * A76, &k6)],
        );
        let k7 = rhs(pot, lambda, x_new, &u_new);
        let err = axpy(
            &[T::default(); 2],
            &[(hs * E1, &k1), (hs * E3, &k3), (hs * E4, &k4), (hs * E5, &k5), (hs * E6, &k6), (hs * E7, &k7)],
        );
        if !u_new[0].is_finite() || !u_new[1].is_finite() {
            return Err(Error::NonFinite { x });
        }
        let scale_u = 1.0 + norm2(&u).max(norm2(&u_new));
        let ratio = norm2(&err) / (tol * scale_u);
        if !ratio.is_finite() {
            return Err(Error::NonFinite { x });
        }

        if ratio <= 1.0 {
            let ydiff = [u_new[0] - u[0], u_new[1] - u[1]];
            let hk1 = scale(&k1, hs);
            let bspl = [hk1[0] - ydiff[0], hk1[1] - ydiff[1]];
            let hk7 = scale(&k7, hs);
            let r4 = [ydiff[0] - hk7[0] - bspl[0], ydiff[1] - hk7[1] - bspl[1]];
            let r5 = axpy(
                &[T::default(); 2],
                &[(hs * D1, &k1), (hs * D3, &k3), (hs * D4, &k4), (hs * D5, &k5), (hs * D6, &k6), (hs * D7, &k7)],
            );
            traj.steps.push(Step {
                x,
                h: hs,
                rcont: [u, ydiff, bspl, r4, r5],
            });
            x = x_new;
            u = u_new;
            k1 = k7;
            traj.grid.push(x);
            traj.states.push(u);
            if !last {
                last_ok_h = h;
            }
            let grow = if ratio == 0.0 { 5.0 } else { (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0) };
            h *= if rejected_last { grow.min(1.0) } else { grow };
            rejected_last = false;
        } else {
            h *= (0.9 * ratio.powf(-0.2)).clamp(0.1, 1.0);
            rejected_last = true;
        }
    }
    Ok(last_ok_h)
}

/// Integrates `u' = (C_λ + Q)u` from `x0` to `x1`, stopping at breakpoints.
/// The local error per step is kept below `tol (1 + ‖u‖)`.
pub fn solve_system<T: Scalar>(pot: &Potential, lambda: T, u0: StateVector<T>, x0: f64, x1: f64, tol: f64) -> Result<Trajectory<T>> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    if x0 == x1 {
        return Err(Error::InvalidParameter("integration interval is empty".into()));
    }
    if x0.min(x1) < 0.0 {
        return Err(Error::OutOfRange {
            x: x0.min(x1),
            lo: 0.0,
            hi: f64::INFINITY,
        });
    }
    let u0 = u0.as_array();
    let mut traj = Trajectory::trivial(lambda, x0, u0, tol);
    if u0[0] == T::default() && u0[1] == T::default() {
        // unique solution from zero data
        traj.grid.push(x1);
        traj.states.push(u0);
        traj.steps.push(Step {
            x: x0,
            h: x1 - x0,
            rcont: [[T::default(); 2]; 5],
        });
        return Ok(traj);
    }

    let (lo, hi) = (x0.min(x1), x0.max(x1));
    let mut stops: Vec<f64> = pot.breakpoints().iter().copied().filter(|b| *b > lo && *b < hi).collect();
    if x1 < x0 {
        stops.reverse();
    }
    stops.push(x1);

    let k = lambda.modulus().sqrt();
    let mut h = 0.05 / (1.0 + k);
    let mut from = x0;
    for to in stops {
        h = integrate_segment(pot, lambda, from, to, tol, h, &mut traj)?;
        from = to;
    }
    Ok(traj)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    RegularAtZero,
    DecayingAtInfinity,
}

/// A solution of `DF = λF` sampled on a grid, with its quasi-derivative.
#[derive(Debug, Clone)]
pub struct Eigenfunction<T = Complex64> {
    pub lambda: T,
    pub orientation: Orientation,
    pub grid: Vec<f64>,
    pub values: Vec<T>,
    pub quasi: Vec<T>,
    /// `(F(0), F'(0))` when the solution reaches 0.
    pub boundary: Option<(T, T)>,
    trajectory: Option<Arc<Trajectory<T>>>,
    /// Exact free continuation beyond the integration window: the state at
    /// the junction and, for eigenvector data, its growth exponent.
    exterior: Option<(f64, [T; 2], Option<T>)>,
    /// Factor applied to trajectory states (the solve may use rescaled data).
    scale: T,
}

impl<T: Scalar> Eigenfunction<T> {
    /// State `[F; pF']` at any `x` covered by the underlying solve.
    pub fn state_at(&self, x: f64) -> Result<[T; 2]> {
        if let Some((x_ext, u_ext, rate)) = self.exterior {
            if x >= x_ext {
                return Ok(match rate {
                    Some(mu) => {
                        let e = (mu * (x - x_ext)).exp();
                        [u_ext[0] * e, u_ext[1] * e]
                    }
                    None => mat_vec(&exp_flow(self.lambda, x - x_ext), &u_ext),
                });
            }
        }
        match &self.trajectory {
            Some(t) => t.eval(x).map(|u| [u[0] * self.scale, u[1] * self.scale]),
            None => {
                let (x0, u0, _) = self.exterior.expect("eigenfunction without data");
                if x == x0 {
                    Ok(u0)
                } else {
                    Err(Error::OutOfRange { x, lo: x0, hi: x0 })
                }
            }
        }
    }

    /// The underlying solve; decaying solutions are integrated from unit
    /// data, so these states differ from [`Self::state_at`] by a constant factor.
    pub fn trajectory(&self) -> Option<&Trajectory<T>> {
        self.trajectory.as_deref()
    }
}

fn sample<T: Scalar>(
    lambda: T,
    orientation: Orientation,
    grid: &[f64],
    trajectory: Option<Arc<Trajectory<T>>>,
    exterior: Option<(f64, [T; 2], Option<T>)>,
    boundary: Option<(T, T)>,
    scale: T,
) -> Result<Eigenfunction<T>> {
    let mut ef = Eigenfunction {
        lambda,
        orientation,
        grid: grid.to_vec(),
        values: Vec::with_capacity(grid.len()),
        quasi: Vec::with_capacity(grid.len()),
        boundary,
        trajectory,
        exterior,
        scale,
    };
    for &x in grid {
        let u = ef.state_at(x)?;
        ef.values.push(u[0]);
        ef.quasi.push(u[1]);
    }
    Ok(ef)
}

fn check_grid(grid: &[f64]) -> Result<(f64, f64)> {
    let lo = grid.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = grid.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if grid.is_empty() || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidParameter("sample grid must be non-empty and finite".into()));
    }
    if lo < 0.0 {
        return Err(Error::OutOfRange { x: lo, lo: 0.0, hi: f64::INFINITY });
    }
    Ok((lo, hi))
}

/// Solution with `F(0) = 0`, `F'(0) = 1`.
pub fn regular_eigenfunction<T: Scalar>(pot: &Potential, lambda: T, grid: &[f64], tol: f64) -> Result<Eigenfunction<T>> {
    let (_, hi) = check_grid(grid)?;
    let p0 = pot.p(0.0);
    let u0 = [T::default(), T::from_real(p0)];
    let boundary = Some((T::default(), T::from_real(1.0)));
    if hi == 0.0 {
        return sample(lambda, Orientation::RegularAtZero, grid, None, Some((0.0, u0, None)), boundary, T::from_real(1.0));
    }
    let traj = solve_system(pot, lambda, StateVector::from_array(u0), 0.0, hi, tol)?;
    sample(lambda, Orientation::RegularAtZero, grid, Some(Arc::new(traj)), None, boundary, T::from_real(1.0))
}

/// Branch of `√ν` with positive imaginary part; real negative `ν` gives `i√|ν|`.
pub fn decaying_root(nu: Complex64) -> Result<Complex64> {
    if nu.im == 0.0 && nu.re >= 0.0 {
        return Err(Error::NoDecayingSolution(nu));
    }
    let mut k = nu.sqrt();
    if k.im < 0.0 {
        k = -k;
    }
    Ok(k)
}

/// Solution proportional to `e^{i√ν x}` (`Im √ν > 0`), seeded at `x_max` and
/// integrated backward; exact free propagation is used beyond `x_max`.
pub fn decaying_eigenfunction(pot: &Potential, nu: Complex64, grid: &[f64], x_max: f64, tol: f64) -> Result<Eigenfunction<Complex64>> {
    let (lo, _) = check_grid(grid)?;
    let kappa = decaying_root(nu)?;
    let tail = pot.tail_integral(x_max);
    if !(tail < tol) {
        return Err(Error::DecayWindowTooShort { x_max, tail, tol });
    }
    // past x_cut the seed is an exact solution, so start there
    let x_max = match pot.decay_class() {
        DecayClass::EventuallyConstant { x_cut } => x_cut.min(x_max),
        _ => x_max,
    };
    // integrate from unit data; the seed itself can be far below the
    // integrator's absolute error floor
    let phase = (Complex64::i() * kappa * x_max).exp();
    let unit = [Complex64::new(1.0, 0.0), Complex64::i() * kappa * pot.p(x_max)];
    let seed = [phase * unit[0], phase * unit[1]];
    let boundary = |ef: &Eigenfunction<Complex64>| -> Option<(Complex64, Complex64)> {
        if lo == 0.0 {
            let u = ef.state_at(0.0).ok()?;
            Some((u[0], u[1] / pot.p(0.0)))
        } else {
            None
        }
    };
    let traj = if lo < x_max {
        Some(Arc::new(solve_system(pot, nu, StateVector::from_array(unit), x_max, lo, tol)?))
    } else {
        None
    };
    let rate = Some(Complex64::i() * kappa);
    let mut ef = sample(nu, Orientation::DecayingAtInfinity, grid, traj, Some((x_max, seed, rate)), None, phase)?;
    ef.boundary = boundary(&ef);
    Ok(ef)
}

/// `w = -p (f g' - f' g)`, evaluated from stored quasi-derivatives.
pub fn wronskian<T: Scalar>(f: &Eigenfunction<T>, g: &Eigenfunction<T>, x: f64) -> Result<T> {
    if f.lambda != g.lambda {
        return Err(Error::MismatchedSpectralParameter(f.lambda.to_complex(), g.lambda.to_complex()));
    }
    let u = f.state_at(x)?;
    let v = g.state_at(x)?;
    Ok(-(u[0] * v[1] - u[1] * v[0]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::make_builtin_potential;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn exp_xc_closed_forms() {
        let e = exp_xc(c(3.0, 1.0), 0.0);
        assert_eq!(e, [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]]);
        let e = exp_xc(c(1.0, 0.0), PI / 2.0);
        assert!((e[0][0]).norm() < 1e-15 && (e[1][1]).norm() < 1e-15);
        assert!((e[0][1] - 1.0).norm() < 1e-15 && (e[1][0] + 1.0).norm() < 1e-15);
        let e = exp_xc(c(-1.0, 0.0), 1.0);
        assert!((e[0][1].re - 1f64.sinh()).abs() < 1e-15);
        assert!((e[0][0].re - 1f64.cosh()).abs() < 1e-15);
        assert!((e[1][0].re - 1f64.sinh()).abs() < 1e-15);
    }

    #[test]
    fn series_branch_is_continuous() {
        let x = 1e-3;
        for lam in [1e-3, -1e-3, 2e-3] {
            let (a, b) = f64::cos_sinc(lam, x);
            let k = Complex64::new(lam, 0.0).sqrt();
            let exact_c = (k * x).cos().re;
            let exact_s = ((k * x).sin() / k).re;
            assert!((a - exact_c).abs() < 1e-15);
            assert!((b - exact_s).abs() < 1e-15 * exact_s.abs());
        }
    }

    #[test]
    fn free_solutions_match_closed_forms() {
        let free = Potential::free();
        let t = solve_system(&free, 4.0, StateVector::new(0.0, 1.0), 0.0, PI, 1e-11).unwrap();
        assert!(t.end_state()[0].abs() < 1e-9);
        let t = solve_system(&free, -1.0, StateVector::new(0.0, 1.0), 0.0, 1.0, 1e-11).unwrap();
        assert!((t.end_state()[0] - 1f64.sinh()).abs() < 1e-9);
        assert!(t.midpoint_residual(&free) < 1e-9);
        // dense output between steps
        let x = 0.4321;
        assert!((t.eval(x).unwrap()[0] - x.sinh()).abs() < 1e-9);
    }

    #[test]
    fn backward_integration_and_zero_data() {
        let free = Potential::free();
        let t = solve_system(&free, c(-1.0, 0.5), StateVector::new(c(1.0, 0.0), c(0.0, 1.0)), 3.0, 0.5, 1e-11).unwrap();
        assert_eq!(t.start(), 3.0);
        assert_eq!(t.end(), 0.5);
        let exact = mat_vec(&exp_xc(c(-1.0, 0.5), -2.5), &[c(1.0, 0.0), c(0.0, 1.0)]);
        assert!((t.end_state()[0] - exact[0]).norm() < 1e-9);
        let mid = mat_vec(&exp_xc(c(-1.0, 0.5), -1.0), &[c(1.0, 0.0), c(0.0, 1.0)]);
        assert!((t.eval(2.0).unwrap()[1] - mid[1]).norm() < 1e-9);

        let well = make_builtin_potential("capped_well", &[1.0, 5.0, 0.1]).unwrap();
        let z = solve_system(&well, 0.7, StateVector::new(0.0, 0.0), 0.0, 9.0, 1e-10).unwrap();
        assert_eq!(z.eval(4.0).unwrap(), [0.0, 0.0]);
    }

    #[test]
    fn errors_are_reported() {
        let free = Potential::free();
        assert!(solve_system(&free, 1.0, StateVector::new(0.0, 1.0), 1.0, 1.0, 1e-10).is_err());
        assert!(solve_system(&free, 1.0, StateVector::new(0.0, 1.0), 0.0, 1.0, 0.0).is_err());
        assert!(matches!(
            solve_system(&free, 1.0, StateVector::new(f64::NAN, 1.0), 0.0, 1.0, 1e-10),
            Err(Error::NonFinite { .. })
        ));
        assert!(decaying_eigenfunction(&free, c(2.0, 0.0), &[1.0], 5.0, 1e-10).is_err());
        let exp = make_builtin_potential("exp_decay", &[1.0, 1.0]).unwrap();
        assert!(matches!(
            decaying_eigenfunction(&exp, c(0.0, 1.0), &[1.0], 5.0, 1e-10),
            Err(Error::DecayWindowTooShort { .. })
        ));
    }

    #[test]
    fn regular_and_decaying_free_values() {
        let free = Potential::free();
        let f = regular_eigenfunction(&free, 4.0, &[PI / 4.0, 0.0], 1e-11).unwrap();
        assert!((f.values[0] - 0.5).abs() < 1e-9);
        assert_eq!(f.values[1], 0.0);
        let only_zero = regular_eigenfunction(&free, 1.0, &[0.0], 1e-11).unwrap();
        assert_eq!(only_zero.values, vec![0.0]);

        let g = decaying_eigenfunction(&free, c(-1.0, 0.0), &[2.0], 2.0, 1e-10).unwrap();
        assert!((g.values[0] - c((-2.0f64).exp(), 0.0)).norm() < 1e-14);
        let g = decaying_eigenfunction(&free, c(0.0, 1.0), &[0.0], 10.0, 1e-11).unwrap();
        assert!((g.values[0] - 1.0).norm() < 1e-9);
    }

    #[test]
    fn free_wronskian_is_one() {
        let free = Potential::free();
        let nu = c(2.0, 0.3);
        let grid = [0.0, 0.7, 1.9];
        let f = regular_eigenfunction(&free, nu, &grid, 1e-11).unwrap();
        let g = decaying_eigenfunction(&free, nu, &grid, 12.0, 1e-11).unwrap();
        for x in grid {
            assert!((wronskian(&f, &g, x).unwrap() - 1.0).norm() < 1e-8);
            assert!(wronskian(&f, &f, x).unwrap().norm() < 1e-15);
        }
        let other = regular_eigenfunction(&free, c(1.0, 0.0), &grid, 1e-11).unwrap();
        assert!(wronskian(&f, &other, 0.7).is_err());
    }
}
