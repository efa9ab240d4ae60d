//! Coefficients `p`, `q` of the operator `D = -(d/dx) p (d/dx) + q` on the
//! half-line, their declared decay, and the perturbation matrix
//! `Q(x) = [[0, 1/p - 1], [q, 0]]` acting on `u = [F; pF']`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;

/// Declared tail behaviour of the coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayClass {
    /// `p = 1` and `q = 0` for `x >= x_cut`.
    EventuallyConstant { x_cut: f64 },
    /// `|1 - 1/p| + |q| = O(e^{-rate x})`.
    Exponential { rate: f64 },
    PowerIntegrable,
}

type Func = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Upper bound `M(x) >= |1 - 1/p(x)| + |q(x)|` together with its tail integral.
#[derive(Clone)]
pub enum Majorant {
    Zero,
    /// `level` on `[0, until)`, zero afterwards.
    Step { level: f64, until: f64 },
    Exponential { amplitude: f64, rate: f64 },
    /// Constant `levels[i]` on `[knots[i], knots[i+1])`, zero past the last knot.
    Piecewise { knots: Vec<f64>, levels: Vec<f64> },
    /// User-supplied bound and closed-form tail `x -> ∫_x^∞ M`.
    Custom { bound: Func, tail: Func },
}

impl fmt::Debug for Majorant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Majorant::Zero => write!(f, "Zero"),
            Majorant::Step { level, until } => write!(f, "Step({level} until {until})"),
            Majorant::Exponential { amplitude, rate } => write!(f, "Exponential({amplitude} e^-{rate}x)"),
            Majorant::Piecewise { knots, .. } => write!(f, "Piecewise({} pieces)", knots.len().saturating_sub(1)),
            Majorant::Custom { .. } => write!(f, "Custom"),
        }
    }
}

impl Majorant {
    pub fn value(&self, x: f64) -> f64 {
        match self {
            Majorant::Zero => 0.0,
            Majorant::Step { level, until } => {
                if x < *until {
                    *level
                } else {
                    0.0
                }
            }
            Majorant::Exponential { amplitude, rate } => amplitude * (-rate * x).exp(),
            Majorant::Piecewise { knots, levels } => {
                if x < knots[0] || x >= knots[knots.len() - 1] {
                    return if x < knots[0] { levels[0] } else { 0.0 };
                }
                let i = knots.partition_point(|k| *k <= x) - 1;
                levels[i]
            }
            Majorant::Custom { bound, .. } => bound(x),
        }
    }

    /// `∫_x^∞ M(t) dt`.
    pub fn tail(&self, x: f64) -> f64 {
        self.weighted_tail(x, 0.0).unwrap_or(f64::INFINITY)
    }

    /// `∫_x^∞ e^{r t} M(t) dt`, or `None` when no closed form is available
    /// (custom majorants with `r != 0`, or divergent exponential weights).
    pub fn weighted_tail(&self, x: f64, r: f64) -> Option<f64> {
        let seg = |a: f64, b: f64| -> f64 {
            if b <= a {
                0.0
            } else if r == 0.0 {
                b - a
            } else {
                ((r * b).exp() - (r * a).exp()) / r
            }
        };
        match self {
            Majorant::Zero => Some(0.0),
            Majorant::Step { level, until } => Some(level * seg(x, *until)),
            Majorant::Exponential { amplitude, rate } => {
                if r >= *rate {
                    None
                } else {
                    Some(amplitude * ((r - rate) * x).exp() / (rate - r))
                }
            }
            Majorant::Piecewise { knots, levels } => {
                let mut total = 0.0;
                if x < knots[0] {
                    total += levels[0] * seg(x, knots[0]);
                }
                for i in 0..levels.len() {
                    total += levels[i] * seg(x.max(knots[i]), knots[i + 1]);
                }
                Some(total)
            }
            Majorant::Custom { tail, .. } => {
                if r == 0.0 {
                    Some(tail(x))
                } else {
                    None
                }
            }
        }
    }
}

/// Natural cubic spline.
#[derive(Debug, Clone, PartialEq)]
struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl CubicSpline {
    fn new(x: &[f64], y: &[f64]) -> Self {
        let n = x.len();
        let mut m = vec![0.0; n];
        if n > 2 {
            // tridiagonal solve for interior second derivatives
            let mut diag = vec![0.0; n];
            let mut rhs = vec![0.0; n];
            let mut upper = vec![0.0; n];
            for i in 1..n - 1 {
                let h0 = x[i] - x[i - 1];
                let h1 = x[i + 1] - x[i];
                diag[i] = (h0 + h1) / 3.0;
                upper[i] = h1 / 6.0;
                rhs[i] = (y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0;
                if i > 1 {
                    let lower = h0 / 6.0;
                    let w = lower / diag[i - 1];
                    diag[i] -= w * upper[i - 1];
                    rhs[i] -= w * rhs[i - 1];
                }
            }
            for i in (1..n - 1).rev() {
                let next = if i + 1 < n - 1 { m[i + 1] } else { 0.0 };
                m[i] = (rhs[i] - upper[i] * next) / diag[i];
            }
        }
        Self {
            x: x.to_vec(),
            y: y.to_vec(),
            m,
        }
    }

    fn locate(&self, x: f64) -> usize {
        let n = self.x.len();
        self.x.partition_point(|k| *k <= x).clamp(1, n - 1) - 1
    }

    fn eval(&self, x: f64) -> (f64, f64) {
        let i = self.locate(x);
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - x) / h;
        let b = 1.0 - a;
        let v = a * self.y[i]
            + b * self.y[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0;
        let d = (self.y[i + 1] - self.y[i]) / h - (3.0 * a * a - 1.0) / 6.0 * h * self.m[i]
            + (3.0 * b * b - 1.0) / 6.0 * h * self.m[i + 1];
        (v, d)
    }

    /// Exact (min, max) of the spline on piece `i`.
    fn piece_range(&self, i: usize) -> (f64, f64) {
        let (x0, x1) = (self.x[i], self.x[i + 1]);
        let h = x1 - x0;
        let (m0, m1) = (self.m[i], self.m[i + 1]);
        let slope = (self.y[i + 1] - self.y[i]) / h;
        // derivative as a quadratic in b = (x - x0)/h
        let c0 = slope - h * m0 / 3.0 - h * m1 / 6.0;
        let c1 = h * m0;
        let c2 = 0.5 * h * (m1 - m0);
        let mut cand = vec![0.0, 1.0];
        if c2.abs() > 1e-300 {
            let disc = c1 * c1 - 4.0 * c2 * c0;
            if disc >= 0.0 {
                let s = disc.sqrt();
                cand.push((-c1 + s) / (2.0 * c2));
                cand.push((-c1 - s) / (2.0 * c2));
            }
        } else if c1.abs() > 1e-300 {
            cand.push(-c0 / c1);
        }
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for b in cand.into_iter().filter(|b| (0.0..=1.0).contains(b)) {
            let v = self.eval(x0 + b * h).0;
            lo = lo.min(v);
            hi = hi.max(v);
        }
        (lo, hi)
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Tabulated {
    p: CubicSpline,
    q: CubicSpline,
    x_end: f64,
}

/// Closures for a user-defined coefficient pair.
#[derive(Clone)]
pub struct CustomCoefficients {
    pub p: Func,
    pub p_prime: Func,
    pub q: Func,
}

#[derive(Clone)]
enum Kind {
    Free,
    CappedWell { depth: f64, length: f64, smoothing: f64 },
    ExpDecay { strength: f64, rate: f64 },
    Tabulated(Arc<Tabulated>),
    Custom(CustomCoefficients),
}

/// Built-in test potentials.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Builtin {
    Free,
    CappedWell,
    ExpDecay,
}

impl FromStr for Builtin {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "free" => Ok(Builtin::Free),
            "capped_well" => Ok(Builtin::CappedWell),
            "exp_decay" => Ok(Builtin::ExpDecay),
            other => Err(Error::UnknownPotential(other.to_string())),
        }
    }
}

/// Coefficient pair `(p, q)` with derivative `p'`, decay metadata and a tail
/// majorant. Immutable and cheap to clone.
#[derive(Clone)]
pub struct Potential {
    label: String,
    kind: Kind,
    decay: DecayClass,
    majorant: Majorant,
    breakpoints: Vec<f64>,
}

impl fmt::Debug for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Potential")
            .field("label", &self.label)
            .field("decay", &self.decay)
            .field("majorant", &self.majorant)
            .finish()
    }
}

/// `C^1` smoothstep on `[0, 1]`.
fn smoothstep(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t * t * (3.0 - 2.0 * t)
}

pub fn make_builtin_potential(name: &str, params: &[f64]) -> Result<Potential> {
    let which: Builtin = name.parse()?;
    let expect = |n: usize| -> Result<()> {
        if params.len() != n {
            Err(Error::InvalidParameter(format!(
                "`{name}` takes {n} parameters, got {}",
                params.len()
            )))
        } else {
            Ok(())
        }
    };
    match which {
        Builtin::Free => {
            expect(0)?;
            Ok(Potential::free())
        }
        Builtin::CappedWell => {
            expect(3)?;
            Potential::capped_well(params[0], params[1], params[2])
        }
        Builtin::ExpDecay => {
            expect(2)?;
            Potential::exp_decay(params[0], params[1])
        }
    }
}

impl Potential {
    pub fn free() -> Self {
        Self {
            label: "free".into(),
            kind: Kind::Free,
            decay: DecayClass::EventuallyConstant { x_cut: 0.0 },
            majorant: Majorant::Zero,
            breakpoints: Vec::new(),
        }
    }

    /// Well of depth `depth` on `[0, length]`, with a centred smoothstep ramp
    /// of width `smoothing` replacing the jump at `length`.
    pub fn capped_well(depth: f64, length: f64, smoothing: f64) -> Result<Self> {
        if !(depth > 0.0 && length > 0.0 && smoothing > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "capped_well needs positive V0, length and smoothing, got ({depth}, {length}, {smoothing})"
            )));
        }
        if smoothing >= 2.0 * length {
            return Err(Error::InvalidParameter(
                "capped_well smoothing must be narrower than twice the well length".into(),
            ));
        }
        let x_cut = length + 0.5 * smoothing;
        Ok(Self {
            label: format!("capped_well({depth}, {length}, {smoothing})"),
            kind: Kind::CappedWell {
                depth,
                length,
                smoothing,
            },
            decay: DecayClass::EventuallyConstant { x_cut },
            majorant: Majorant::Step {
                level: depth,
                until: x_cut,
            },
            breakpoints: vec![length - 0.5 * smoothing, x_cut],
        })
    }

    /// `q(x) = -strength e^{-rate x}`, `p = 1`.
    pub fn exp_decay(strength: f64, rate: f64) -> Result<Self> {
        if !(rate > 0.0) || !strength.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "exp_decay needs a finite strength and positive rate, got ({strength}, {rate})"
            )));
        }
        Ok(Self {
            label: format!("exp_decay({strength}, {rate})"),
            kind: Kind::ExpDecay { strength, rate },
            decay: DecayClass::Exponential { rate },
            majorant: Majorant::Exponential {
                amplitude: strength.abs(),
                rate,
            },
            breakpoints: Vec::new(),
        })
    }

    /// Natural cubic spline through tabulated `(x, p, q)`. The table must
    /// start at 0 and end with `p = 1`, `q = 0`; beyond the last sample the
    /// coefficients are held at those values.
    pub fn tabulated(x: &[f64], p: &[f64], q: &[f64]) -> Result<Self> {
        let n = x.len();
        if n < 2 || p.len() != n || q.len() != n {
            return Err(Error::InvalidParameter(
                "tabulated potential needs matching x, p, q arrays with at least 2 samples".into(),
            ));
        }
        if x[0] != 0.0 {
            return Err(Error::InvalidParameter("tabulated x must start at 0".into()));
        }
        if !x.windows(2).all(|w| w[1] > w[0]) {
            return Err(Error::InvalidParameter("tabulated x must be strictly increasing".into()));
        }
        if (p[n - 1] - 1.0).abs() > 1e-12 || q[n - 1].abs() > 1e-12 {
            return Err(Error::InvalidParameter(
                "tabulated coefficients must reach p = 1, q = 0 at the last sample".into(),
            ));
        }
        let ps = CubicSpline::new(x, p);
        let qs = CubicSpline::new(x, q);
        let mut levels = Vec::with_capacity(n - 1);
        for i in 0..n - 1 {
            let (pmin, pmax) = ps.piece_range(i);
            if pmin <= 0.0 {
                return Err(Error::NonPositiveCoefficient { x: x[i], p: pmin });
            }
            let (qmin, qmax) = qs.piece_range(i);
            let inv = (pmax - 1.0).abs().max((pmin - 1.0).abs()) / pmin;
            levels.push(inv + qmin.abs().max(qmax.abs()));
        }
        let x_end = x[n - 1];
        Ok(Self {
            label: "tabulated".into(),
            kind: Kind::Tabulated(Arc::new(Tabulated { p: ps, q: qs, x_end })),
            decay: DecayClass::EventuallyConstant { x_cut: x_end },
            majorant: Majorant::Piecewise {
                knots: x.to_vec(),
                levels,
            },
            breakpoints: x[1..].to_vec(),
        })
    }

    pub fn custom(label: impl Into<String>, coeffs: CustomCoefficients, decay: DecayClass, majorant: Majorant) -> Self {
        let breakpoints = match decay {
            DecayClass::EventuallyConstant { x_cut } if x_cut > 0.0 => vec![x_cut],
            _ => Vec::new(),
        };
        Self {
            label: label.into(),
            kind: Kind::Custom(coeffs),
            decay,
            majorant,
            breakpoints,
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn decay_class(&self) -> DecayClass {
        self.decay
    }

    pub fn majorant(&self) -> &Majorant {
        &self.majorant
    }

    /// Points where the coefficients change smoothness; integrators stop there.
    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn is_free(&self) -> bool {
        matches!(self.kind, Kind::Free)
    }

    pub fn p(&self, x: f64) -> f64 {
        match &self.kind {
            Kind::Tabulated(t) => {
                if x >= t.x_end {
                    1.0
                } else {
                    t.p.eval(x).0
                }
            }
            Kind::Custom(c) => (c.p)(x),
            _ => 1.0,
        }
    }

    pub fn p_prime(&self, x: f64) -> f64 {
        match &self.kind {
            Kind::Tabulated(t) => {
                if x >= t.x_end {
                    0.0
                } else {
                    t.p.eval(x).1
                }
            }
            Kind::Custom(c) => (c.p_prime)(x),
            _ => 0.0,
        }
    }

    pub fn q(&self, x: f64) -> f64 {
        match &self.kind {
            Kind::Free => 0.0,
            Kind::CappedWell {
                depth,
                length,
                smoothing,
            } => {
                let lo = length - 0.5 * smoothing;
                if x <= lo {
                    -depth
                } else if x >= length + 0.5 * smoothing {
                    0.0
                } else {
                    -depth * (1.0 - smoothstep((x - lo) / smoothing))
                }
            }
            Kind::ExpDecay { strength, rate } => -strength * (-rate * x).exp(),
            Kind::Tabulated(t) => {
                if x >= t.x_end {
                    0.0
                } else {
                    t.q.eval(x).0
                }
            }
            Kind::Custom(c) => (c.q)(x),
        }
    }

    pub fn tail_majorant(&self, x: f64) -> f64 {
        self.majorant.value(x)
    }

    /// `∫_x^∞ M`.
    pub fn tail_integral(&self, x: f64) -> f64 {
        self.majorant.tail(x)
    }

    /// Smallest `x` (up to doubling resolution, refined by bisection) with
    /// `∫_x^∞ M <= tol`, capped at `cap`.
    pub fn effective_support(&self, tol: f64, cap: f64) -> Result<f64> {
        if let DecayClass::EventuallyConstant { x_cut } = self.decay {
            return Ok(x_cut);
        }
        if self.tail_integral(0.0) <= tol {
            return Ok(0.0);
        }
        let mut hi = 1.0;
        while self.tail_integral(hi) > tol {
            hi *= 2.0;
            if hi > cap {
                return Err(Error::TailTooLong { cap });
            }
        }
        let mut lo = 0.5 * hi;
        if hi == 1.0 {
            lo = 0.0;
        }
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if self.tail_integral(mid) > tol {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(hi)
    }
}

/// The `2x2` real matrix `[[0, 1/p - 1], [q, 0]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationMatrix {
    pub upper: f64,
    pub lower: f64,
}

impl PerturbationMatrix {
    pub fn entries(&self) -> [[f64; 2]; 2] {
        [[0.0, self.upper], [self.lower, 0.0]]
    }

    pub fn hs_norm(&self) -> f64 {
        self.upper.hypot(self.lower)
    }

    pub fn is_zero(&self) -> bool {
        self.upper == 0.0 && self.lower == 0.0
    }
}

pub fn q_matrix(pot: &Potential, x: f64) -> PerturbationMatrix {
    PerturbationMatrix {
        upper: 1.0 / pot.p(x) - 1.0,
        lower: pot.q(x),
    }
}

/// Numerical audit of the decay hypotheses on a probe grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub x_end: f64,
    /// Coefficient values far out (at `x_end * 2^10`), standing in for the limits.
    pub p_limit: f64,
    pub q_limit: f64,
    pub p_prime_limit: f64,
    /// `∫_1^∞ |1 - 1/p|` and `∫_1^∞ |q|`: probe-interval quadrature on
    /// `[1, x_end]` plus the majorant tail beyond `x_end`.
    pub integral_inv_p: f64,
    pub integral_q: f64,
    pub limits_pass: bool,
    pub integrability_pass: bool,
    pub pass: bool,
}

const LIMIT_TOLERANCE: f64 = 1e-3;

pub fn validate_hypotheses(pot: &Potential, x_probe: &[f64]) -> Result<DecayReport> {
    if x_probe.len() < 2 || !x_probe.windows(2).all(|w| w[1] > w[0]) {
        return Err(Error::InvalidParameter("probe grid must be strictly increasing".into()));
    }
    let x_end = *x_probe.last().unwrap();
    if x_probe[0] > 0.0 || x_end < 10.0 {
        return Err(Error::InvalidParameter(format!(
            "probe grid must cover [0, X] with X >= 10, got [{}, {x_end}]",
            x_probe[0]
        )));
    }
    for &x in x_probe {
        let p = pot.p(x);
        if !(p > 0.0) {
            return Err(Error::NonPositiveCoefficient { x, p });
        }
        if x >= 1.0 {
            let value = (1.0 - 1.0 / p).abs() + pot.q(x).abs();
            let bound = pot.tail_majorant(x);
            if value > bound * (1.0 + 1e-12) + 1e-300 {
                return Err(Error::MajorantViolated { x, value, bound });
            }
        }
    }

    let rule = GaussLegendre::new(8);
    let mut int_inv = 0.0;
    let mut int_q = 0.0;
    for w in x_probe.windows(2) {
        let (a, b) = (w[0].max(1.0), w[1]);
        if b <= a {
            continue;
        }
        int_inv += rule.integrate(a, b, |x| (1.0 - 1.0 / pot.p(x)).abs());
        int_q += rule.integrate(a, b, |x| pot.q(x).abs());
    }
    let tail = pot.tail_integral(x_end);
    int_inv += tail;
    int_q += tail;

    let far = x_end * 1024.0;
    let p_limit = pot.p(far);
    let q_limit = pot.q(far);
    let p_prime_limit = pot.p_prime(far);
    let limits_pass = (1.0 - p_limit).abs() <= LIMIT_TOLERANCE
        && q_limit.abs() <= LIMIT_TOLERANCE
        && p_prime_limit.abs() <= LIMIT_TOLERANCE;
    let integrability_pass = int_inv.is_finite() && int_q.is_finite();
    Ok(DecayReport {
        x_end,
        p_limit,
        q_limit,
        p_prime_limit,
        integral_inv_p: int_inv,
        integral_q: int_q,
        limits_pass,
        integrability_pass,
        pass: limits_pass && integrability_pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn probe(x_end: f64, n: usize) -> Vec<f64> {
        (0..=n).map(|i| x_end * i as f64 / n as f64).collect()
    }

    #[test]
    fn free_potential_is_trivial() {
        let pot = make_builtin_potential("free", &[]).unwrap();
        assert_eq!(pot.decay_class(), DecayClass::EventuallyConstant { x_cut: 0.0 });
        assert_eq!(pot.p(3.0), 1.0);
        assert_eq!(pot.q(3.0), 0.0);
        assert!(q_matrix(&pot, 7.5).is_zero());
        let r = validate_hypotheses(&pot, &probe(20.0, 200)).unwrap();
        assert!(r.pass);
        assert_eq!(r.integral_q, 0.0);
        assert_eq!(r.integral_inv_p, 0.0);
        assert_eq!(r.p_limit, 1.0);
        assert_eq!(r.q_limit, 0.0);
    }

    #[test]
    fn capped_well_endpoint_values() {
        let pot = make_builtin_potential("capped_well", &[1.0, 5.0, 0.1]).unwrap();
        assert_eq!(pot.q(0.0), -1.0);
        assert_eq!(pot.q(6.0), 0.0);
        assert_eq!(pot.p(2.0), 1.0);
        let m = q_matrix(&pot, 0.0);
        assert_eq!(m.entries(), [[0.0, 0.0], [-1.0, 0.0]]);
        // ramp is C^1: slope vanishes at both ends
        let h = 1e-7;
        for x in [4.95, 5.05] {
            let d = (pot.q(x + h) - pot.q(x - h)) / (2.0 * h);
            assert!(d.abs() < 1e-4);
        }
        for x in [5.05, 5.5, 10.0, 100.0] {
            assert!(q_matrix(&pot, x).is_zero());
        }
    }

    #[test]
    fn capped_well_integral_of_q() {
        let pot = Potential::capped_well(1.0, 5.0, 0.1).unwrap();
        let r = validate_hypotheses(&pot, &probe(20.0, 400)).unwrap();
        // independent value: 3.95 on the flat part, w/2 from the symmetric ramp
        assert!((r.integral_q - 4.0).abs() < 1e-9, "{}", r.integral_q);
        assert!(r.pass);
    }

    #[test]
    fn exp_decay_closed_forms() {
        let pot = make_builtin_potential("exp_decay", &[1.0, 1.0]).unwrap();
        assert!((pot.q(2f64.ln()) + 0.5).abs() < 1e-15);
        let m = q_matrix(&pot, 2f64.ln());
        assert_eq!(m.upper, 0.0);
        assert!((m.lower + 0.5).abs() < 1e-15);
        for x in [0.0, 1.0, 3.7] {
            assert!((pot.tail_integral(x) - (-x).exp()).abs() < 1e-15);
        }
    }

    #[test]
    fn harmonic_tail_fails_integrability() {
        let coeffs = CustomCoefficients {
            p: Arc::new(|_| 1.0),
            p_prime: Arc::new(|_| 0.0),
            q: Arc::new(|x| 1.0 / (1.0 + x)),
        };
        let majorant = Majorant::Custom {
            bound: Arc::new(|x| 1.0 / (1.0 + x)),
            tail: Arc::new(|_| f64::INFINITY),
        };
        let pot = Potential::custom("harmonic", coeffs, DecayClass::PowerIntegrable, majorant);
        let r = validate_hypotheses(&pot, &probe(20.0, 100)).unwrap();
        assert!(!r.integrability_pass);
        assert!(!r.pass);
    }

    #[test]
    fn validation_errors() {
        assert!(make_builtin_potential("square", &[]).is_err());
        assert!(make_builtin_potential("capped_well", &[0.0, 5.0, 0.1]).is_err());
        assert!(make_builtin_potential("capped_well", &[1.0, -5.0, 0.1]).is_err());
        assert!(make_builtin_potential("capped_well", &[1.0, 5.0, 0.0]).is_err());
        assert!(make_builtin_potential("exp_decay", &[1.0, 0.0]).is_err());
        assert!(make_builtin_potential("exp_decay", &[1.0]).is_err());

        let coeffs = CustomCoefficients {
            p: Arc::new(|x| x - 0.5),
            p_prime: Arc::new(|_| 1.0),
            q: Arc::new(|_| 0.0),
        };
        let pot = Potential::custom("bad", coeffs, DecayClass::PowerIntegrable, Majorant::Zero);
        assert!(matches!(
            validate_hypotheses(&pot, &probe(20.0, 40)),
            Err(Error::NonPositiveCoefficient { .. })
        ));

        let pot = Potential::custom(
            "under",
            CustomCoefficients {
                p: Arc::new(|_| 1.0),
                p_prime: Arc::new(|_| 0.0),
                q: Arc::new(|x| (-x).exp()),
            },
            DecayClass::Exponential { rate: 1.0 },
            Majorant::Exponential {
                amplitude: 0.5,
                rate: 1.0,
            },
        );
        assert!(matches!(
            validate_hypotheses(&pot, &probe(20.0, 40)),
            Err(Error::MajorantViolated { .. })
        ));
    }

    #[test]
    fn tabulated_spline_reproduces_smooth_data() {
        let n = 201;
        let xs: Vec<f64> = (0..n).map(|i| 10.0 * i as f64 / (n - 1) as f64).collect();
        let bumpy = |x: f64| if x >= 10.0 { 0.0 } else { -(-(x - 3.0) * (x - 3.0)).exp() * (1.0 - x / 10.0).powi(3) };
        let ps: Vec<f64> = xs.iter().map(|&x| 1.0 + 0.1 * bumpy(x)).collect();
        let qs: Vec<f64> = xs.iter().map(|&x| bumpy(x)).collect();
        let pot = Potential::tabulated(&xs, &ps, &qs).unwrap();
        assert!((pot.q(3.02) - bumpy(3.02)).abs() < 1e-5);
        assert!((pot.p(3.02) - 1.0 - 0.1 * bumpy(3.02)).abs() < 1e-6);
        assert_eq!(pot.q(12.0), 0.0);
        // majorant is exact on each piece, so it dominates everywhere
        for i in 0..2000 {
            let x = 10.0 * i as f64 / 2000.0;
            let v = (1.0 - 1.0 / pot.p(x)).abs() + pot.q(x).abs();
            assert!(v <= pot.tail_majorant(x) * (1.0 + 1e-12) + 1e-15);
        }
        assert!(Potential::tabulated(&[0.0, 1.0], &[1.0, 1.1], &[0.0, 0.0]).is_err());
        assert!(Potential::tabulated(&[0.0, 1.0], &[-1.0, 1.0], &[0.0, 0.0]).is_err());
    }

    #[test]
    fn effective_support_for_exponential_tail() {
        let pot = Potential::exp_decay(2.0, 0.5).unwrap();
        let x = pot.effective_support(1e-10, 1e4).unwrap();
        assert!(pot.tail_integral(x) <= 1e-10);
        assert!(pot.tail_integral(x * 0.999) > 1e-10);
    }
}
