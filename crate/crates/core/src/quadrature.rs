//! Gauss-Legendre rules, an adaptive panel integrator with batched node
//! evaluation, and fixed rules for uniformly sampled data.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::par::{self, Execution};

/// Gauss-Legendre rule on the reference interval `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds the `n`-point rule by Newton iteration on the Legendre recurrence.
    pub fn new(n: usize) -> Self {
        assert!(n > 0, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn reference_nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Nodes and weights mapped affinely onto `[a, b]`.
    pub fn on_interval(&self, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let xs = self.nodes.iter().map(|t| mid + half * t).collect();
        let ws = self.weights.iter().map(|w| half * w).collect();
        (xs, ws)
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(t, w)| w * f(mid + half * t))
            .sum::<f64>()
            * half
    }

    /// Composite rule with `panels` equal panels; returns `(nodes, weights)`.
    pub fn composite(&self, a: f64, b: f64, panels: usize) -> (Vec<f64>, Vec<f64>) {
        let panels = panels.max(1);
        let width = (b - a) / panels as f64;
        let mut xs = Vec::with_capacity(panels * self.len());
        let mut ws = Vec::with_capacity(panels * self.len());
        for p in 0..panels {
            let lo = a + p as f64 * width;
            let (x, w) = self.on_interval(lo, lo + width);
            xs.extend(x);
            ws.extend(w);
        }
        (xs, ws)
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Spectral differentiation matrix for polynomial interpolation on `nodes`
/// (barycentric form). Row `i` applied to samples gives the derivative at
/// `nodes[i]`.
pub fn differentiation_matrix(nodes: &[f64]) -> Vec<Vec<f64>> {
    let n = nodes.len();
    let mut bary = vec![1.0; n];
    for j in 0..n {
        for k in 0..n {
            if k != j {
                bary[j] /= nodes[j] - nodes[k];
            }
        }
    }
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        let mut diag = 0.0;
        for j in 0..n {
            if i != j {
                let v = bary[j] / bary[i] / (nodes[i] - nodes[j]);
                d[i][j] = v;
                diag -= v;
            }
        }
        d[i][i] = diag;
    }
    d
}

/// Controls for [`adaptive`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AdaptiveOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Gauss-Legendre points per panel.
    pub order: usize,
    pub initial_panels: usize,
    pub max_depth: usize,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-9,
            order: 10,
            initial_panels: 4,
            max_depth: 14,
        }
    }
}

/// One accepted quadrature node with its weight and integrand value.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSample {
    pub x: f64,
    pub weight: f64,
    pub value: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveResult {
    pub value: Vec<f64>,
    pub error_estimate: f64,
    pub evaluations: usize,
    pub converged: bool,
    /// Nodes of the accepted panels, ordered by abscissa.
    pub samples: Vec<WeightedSample>,
}

impl AdaptiveResult {
    pub fn scalar(&self) -> f64 {
        self.value[0]
    }
}

struct Panel {
    a: f64,
    b: f64,
    depth: usize,
    estimate: Vec<f64>,
    samples: Vec<WeightedSample>,
}

fn inf_norm_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn inf_norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

/// Breadth-first adaptive Gauss-Legendre integration of a vector-valued
/// integrand. Each panel is compared against the sum over its two halves;
/// all nodes of one refinement level are evaluated as a single batch so the
/// batch can be spread over worker threads. Results are independent of the
/// execution mode.
pub fn adaptive<F, E>(
    a: f64,
    b: f64,
    opts: &AdaptiveOptions,
    exec: Execution,
    f: F,
) -> Result<AdaptiveResult, E>
where
    F: Fn(f64) -> Result<Vec<f64>, E> + Sync + Send,
    E: Send,
{
    let rule = GaussLegendre::new(opts.order.max(2));
    let total_width = b - a;
    let mut evaluations = 0usize;

    if total_width == 0.0 {
        let dim = f(a)?.len();
        return Ok(AdaptiveResult {
            value: vec![0.0; dim],
            error_estimate: 0.0,
            evaluations: 1,
            converged: true,
            samples: Vec::new(),
        });
    }

    let eval_panels = |bounds: &[(f64, f64)], evaluations: &mut usize| -> Result<Vec<(Vec<f64>, Vec<WeightedSample>)>, E> {
        let mut xs = Vec::new();
        let mut ws = Vec::new();
        for &(lo, hi) in bounds {
            let (x, w) = rule.on_interval(lo, hi);
            xs.extend(x);
            ws.extend(w);
        }
        *evaluations += xs.len();
        let values = par::try_map(exec, &xs, |&x| f(x))?;
        let n = rule.len();
        let mut out = Vec::with_capacity(bounds.len());
        for (p, _) in bounds.iter().enumerate() {
            let mut est: Vec<f64> = Vec::new();
            let mut samples = Vec::with_capacity(n);
            for i in p * n..(p + 1) * n {
                if est.is_empty() {
                    est = vec![0.0; values[i].len()];
                }
                for (e, v) in est.iter_mut().zip(&values[i]) {
                    *e += ws[i] * v;
                }
                samples.push(WeightedSample {
                    x: xs[i],
                    weight: ws[i],
                    value: values[i].clone(),
                });
            }
            out.push((est, samples));
        }
        Ok(out)
    };

    let n0 = opts.initial_panels.max(1);
    let width0 = total_width / n0 as f64;
    let bounds: Vec<(f64, f64)> = (0..n0)
        .map(|i| (a + i as f64 * width0, a + (i + 1) as f64 * width0))
        .collect();
    let mut active: Vec<Panel> = eval_panels(&bounds, &mut evaluations)?
        .into_iter()
        .zip(&bounds)
        .map(|((estimate, samples), &(lo, hi))| Panel {
            a: lo,
            b: hi,
            depth: 0,
            estimate,
            samples,
        })
        .collect();

    let mut accepted: Vec<Panel> = Vec::new();
    let mut error_estimate = 0.0;
    let mut converged = true;

    while !active.is_empty() {
        let halves: Vec<(f64, f64)> = active
            .iter()
            .flat_map(|p| {
                let m = 0.5 * (p.a + p.b);
                [(p.a, m), (m, p.b)]
            })
            .collect();
        let evaluated = eval_panels(&halves, &mut evaluations)?;

        let mut current_total: Vec<f64> = vec![0.0; active[0].estimate.len()];
        for p in accepted.iter() {
            for (t, v) in current_total.iter_mut().zip(&p.estimate) {
                *t += v;
            }
        }
        for (i, _) in active.iter().enumerate() {
            for k in 0..current_total.len() {
                current_total[k] += evaluated[2 * i].0[k] + evaluated[2 * i + 1].0[k];
            }
        }
        let target = opts.abs_tol.max(opts.rel_tol * inf_norm(&current_total));

        let mut next = Vec::new();
        let mut evaluated = evaluated.into_iter();
        for panel in active.drain(..) {
            let (left_est, left_samples) = evaluated.next().expect("left half");
            let (right_est, right_samples) = evaluated.next().expect("right half");
            let refined: Vec<f64> = left_est
                .iter()
                .zip(&right_est)
                .map(|(l, r)| l + r)
                .collect();
            let err = inf_norm_diff(&refined, &panel.estimate);
            let share = target * (panel.b - panel.a) / total_width;
            let m = 0.5 * (panel.a + panel.b);
            if err <= share || panel.depth >= opts.max_depth {
                if err > share {
                    converged = false;
                }
                error_estimate += err;
                let mut samples = left_samples;
                samples.extend(right_samples);
                accepted.push(Panel {
                    a: panel.a,
                    b: panel.b,
                    depth: panel.depth,
                    estimate: refined,
                    samples,
                });
            } else {
                next.push(Panel {
                    a: panel.a,
                    b: m,
                    depth: panel.depth + 1,
                    estimate: left_est,
                    samples: left_samples,
                });
                next.push(Panel {
                    a: m,
                    b: panel.b,
                    depth: panel.depth + 1,
                    estimate: right_est,
                    samples: right_samples,
                });
            }
        }
        active = next;
    }

    accepted.sort_by(|p, q| p.a.total_cmp(&q.a));
    let dim = accepted[0].estimate.len();
    let mut value = vec![0.0; dim];
    let mut samples = Vec::new();
    for p in accepted {
        for (v, e) in value.iter_mut().zip(&p.estimate) {
            *v += e;
        }
        samples.extend(p.samples);
    }
    Ok(AdaptiveResult {
        value,
        error_estimate,
        evaluations,
        converged,
        samples,
    })
}

/// Composite Simpson rule on uniform samples. An odd number of intervals is
/// closed with Simpson's 3/8 rule on the last three.
pub fn simpson(dx: f64, ys: &[f64]) -> f64 {
    let n = ys.len();
    match n {
        0 | 1 => 0.0,
        2 => 0.5 * dx * (ys[0] + ys[1]),
        3 => dx / 3.0 * (ys[0] + 4.0 * ys[1] + ys[2]),
        _ => {
            let intervals = n - 1;
            let (even_end, tail) = if intervals.is_multiple_of(2) {
                (n - 1, 0.0)
            } else {
                let k = n - 4;
                (
                    k,
                    3.0 * dx / 8.0 * (ys[k] + 3.0 * ys[k + 1] + 3.0 * ys[k + 2] + ys[k + 3]),
                )
            };
            let mut s = ys[0] + ys[even_end];
            for (i, y) in ys.iter().enumerate().take(even_end).skip(1) {
                s += if i % 2 == 1 { 4.0 * y } else { 2.0 * y };
            }
            dx / 3.0 * s + tail
        }
    }
}

/// Trapezoid rule; spectrally accurate for smooth data vanishing at both ends.
pub fn trapezoid(dx: f64, ys: &[f64]) -> f64 {
    match ys.len() {
        0 | 1 => 0.0,
        n => dx * (ys.iter().sum::<f64>() - 0.5 * (ys[0] + ys[n - 1])),
    }
}

/// Fourth-order cumulative integral `out[i] = ∫_{x_0}^{x_i} f` for samples
/// that are taken to be zero outside the grid.
pub fn cumulative<T>(dx: f64, ys: &[T]) -> Vec<T>
where
    T: Copy + Default + std::ops::Add<Output = T> + std::ops::Sub<Output = T> + std::ops::Mul<f64, Output = T>,
{
    let n = ys.len();
    let mut out = vec![T::default(); n];
    let at = |i: isize| -> T {
        if i < 0 || i as usize >= n {
            T::default()
        } else {
            ys[i as usize]
        }
    };
    for i in 0..n.saturating_sub(1) {
        let k = i as isize;
        let piece = (at(k) * 13.0 + at(k + 1) * 13.0 - at(k - 1) - at(k + 2)) * (dx / 24.0);
        out[i + 1] = out[i] + piece;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let rule = GaussLegendre::new(6);
        // degree 11 is exact for 6 nodes
        let v = rule.integrate(-1.0, 2.0, |x| x.powi(11) - 3.0 * x.powi(4));
        let exact = (2f64.powi(12) - 1.0) / 12.0 - 3.0 * (32.0 + 1.0) / 5.0;
        assert!((v - exact).abs() < 1e-10 * exact.abs());
        let w: f64 = rule.on_interval(0.0, 1.0).1.iter().sum();
        assert!((w - 1.0).abs() < 1e-14);
    }

    #[test]
    fn nodes_are_symmetric_and_sorted() {
        let rule = GaussLegendre::new(7);
        let x = rule.reference_nodes();
        for i in 0..7 {
            assert!((x[i] + x[6 - i]).abs() < 1e-15);
        }
        assert!(x.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(x[3], 0.0);
    }

    #[test]
    fn adaptive_handles_peaked_integrand() {
        let opts = AdaptiveOptions {
            abs_tol: 1e-12,
            rel_tol: 1e-12,
            ..Default::default()
        };
        let r = adaptive(0.0, 1.0, &opts, Execution::Sequential, |x| {
            Ok::<_, ()>(vec![1.0 / (1e-4 + (x - 0.3) * (x - 0.3))])
        })
        .unwrap();
        let exact = 100.0 * ((0.7f64 / 1e-2).atan() + (0.3f64 / 1e-2).atan());
        assert!(r.converged);
        assert!((r.scalar() - exact).abs() < 1e-9 * exact);
        assert!(r.samples.windows(2).all(|w| w[0].x < w[1].x));
    }

    #[test]
    fn adaptive_execution_modes_agree_bitwise() {
        let opts = AdaptiveOptions::default();
        let f = |x: f64| Ok::<_, ()>(vec![x.sin(), (3.0 * x).cos()]);
        let s = adaptive(0.0, 4.0, &opts, Execution::Sequential, f).unwrap();
        let p = adaptive(0.0, 4.0, &opts, Execution::Parallel, f).unwrap();
        assert_eq!(s.value, p.value);
    }

    #[test]
    fn simpson_and_cumulative_are_fourth_order() {
        for n in [101usize, 102] {
            let dx = 1.0 / (n - 1) as f64;
            let ys: Vec<f64> = (0..n).map(|i| (i as f64 * dx).exp()).collect();
            let exact = 1f64.exp() - 1.0;
            assert!((simpson(dx, &ys) - exact).abs() < 1e-8);
        }
        // bump vanishing at both ends: cumulative total equals trapezoid
        let n = 401;
        let dx = 4.0 / (n - 1) as f64;
        let ys: Vec<f64> = (0..n)
            .map(|i| {
                let x = i as f64 * dx - 2.0;
                (-4.0 * x * x).exp()
            })
            .collect();
        let c = cumulative(dx, &ys);
        let exact = (PI / 4.0).sqrt();
        assert!((c[n - 1] - exact).abs() < 1e-6);
        assert!((c[n - 1] - trapezoid(dx, &ys)).abs() < 1e-8);
    }

    #[test]
    fn differentiation_matrix_is_exact_for_polynomials() {
        let rule = GaussLegendre::new(8);
        let x = rule.reference_nodes();
        let d = differentiation_matrix(x);
        let f: Vec<f64> = x.iter().map(|t| t.powi(5) - 2.0 * t).collect();
        for i in 0..8 {
            let df: f64 = d[i].iter().zip(&f).map(|(a, b)| a * b).sum();
            assert!((df - (5.0 * x[i].powi(4) - 2.0)).abs() < 1e-11);
        }
    }
}
