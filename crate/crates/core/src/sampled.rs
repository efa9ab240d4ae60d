//! Uniformly sampled functions. Samples are taken to vanish outside their
//! grid, which is how compactly supported test data is represented.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub start: f64,
    pub step: f64,
    pub len: usize,
}

impl Grid {
    pub fn new(start: f64, step: f64, len: usize) -> Result<Self> {
        if !(step > 0.0) || !start.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "grid needs a positive step and finite start, got start={start} step={step}"
            )));
        }
        Ok(Self { start, step, len })
    }

    /// Grid with spacing close to `step` covering `[lo, hi]`, endpoints included.
    pub fn covering(lo: f64, hi: f64, step: f64) -> Result<Self> {
        if !(hi > lo) {
            return Err(Error::InvalidParameter(format!("empty range [{lo}, {hi}]")));
        }
        let intervals = ((hi - lo) / step).round().max(1.0) as usize;
        Self::new(lo, (hi - lo) / intervals as f64, intervals + 1)
    }

    /// Grid with exactly `step` spacing starting at `lo`, extended to reach `hi`.
    pub fn stepping(lo: f64, hi: f64, step: f64) -> Result<Self> {
        let intervals = ((hi - lo) / step - 1e-9).ceil().max(1.0) as usize;
        Self::new(lo, step, intervals + 1)
    }

    pub fn x(&self, i: usize) -> f64 {
        self.start + i as f64 * self.step
    }

    pub fn end(&self) -> f64 {
        self.x(self.len.saturating_sub(1))
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len).map(|i| self.x(i)).collect()
    }

    /// Index offset of `other` relative to `self` when both share a lattice.
    fn offset_of(&self, other: &Grid) -> Result<isize> {
        if (self.step - other.step).abs() > 1e-12 * self.step {
            return Err(Error::GridMismatch(format!(
                "steps differ: {} vs {}",
                self.step, other.step
            )));
        }
        let shift = (other.start - self.start) / self.step;
        let k = shift.round();
        if (shift - k).abs() > 1e-6 {
            return Err(Error::GridMismatch(format!(
                "grids starting at {} and {} are not aligned",
                self.start, other.start
            )));
        }
        Ok(k as isize)
    }

    /// Smallest common-lattice grid containing both.
    pub fn hull(&self, other: &Grid) -> Result<Grid> {
        let off = self.offset_of(other)?;
        let lo = off.min(0);
        let hi = (self.len as isize - 1).max(off + other.len as isize - 1);
        Grid::new(self.x(0) + lo as f64 * self.step, self.step, (hi - lo + 1) as usize)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sampled<T> {
    pub grid: Grid,
    pub values: Vec<T>,
}

pub type SampledFunction = Sampled<f64>;
pub type ComplexSampled = Sampled<Complex64>;

impl<T: Copy + Default> Sampled<T> {
    pub fn new(grid: Grid, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.len
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> T) -> Self {
        let values = (0..grid.len).map(|i| f(grid.x(i))).collect();
        Self { grid, values }
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            values: vec![T::default(); grid.len],
        }
    }

    pub fn points(&self) -> Vec<f64> {
        self.grid.points()
    }

    /// Zero-pads onto a larger grid on the same lattice.
    pub fn extend_to(&self, grid: &Grid) -> Result<Self> {
        let off = grid.offset_of(&self.grid)?;
        if off < 0 || off as usize + self.grid.len > grid.len {
            return Err(Error::GridMismatch("target grid does not contain the source".into()));
        }
        let mut values = vec![T::default(); grid.len];
        values[off as usize..off as usize + self.grid.len].copy_from_slice(&self.values);
        Ok(Self { grid: *grid, values })
    }
}

impl SampledFunction {
    /// Gaussian `exp(-(x-center)^2 / (2 sigma^2))`, cut at `width_sigmas`
    /// standard deviations (clipped below at `floor`, e.g. 0 for the half-line).
    pub fn gaussian(center: f64, sigma: f64, width_sigmas: f64, step: f64, floor: Option<f64>) -> Result<Self> {
        if !(sigma > 0.0) {
            return Err(Error::InvalidParameter("gaussian sigma must be positive".into()));
        }
        let mut lo = center - width_sigmas * sigma;
        if let Some(f) = floor {
            lo = lo.max(f);
        }
        let lo = (lo / step).floor() * step;
        let grid = Grid::stepping(lo, center + width_sigmas * sigma, step)?;
        Ok(Self::from_fn(grid, |x| {
            let u = (x - center) / sigma;
            (-0.5 * u * u).exp()
        }))
    }

    /// `C^∞` bump `exp(-1/(1-u^2))` on `|u| < 1`, `u = (x-center)/radius`.
    pub fn smooth_bump(center: f64, radius: f64, step: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::InvalidParameter("bump radius must be positive".into()));
        }
        let lo = ((center - radius) / step).floor() * step;
        let grid = Grid::stepping(lo, center + radius, step)?;
        Ok(Self::from_fn(grid, |x| bump((x - center) / radius)))
    }

    /// Integral over the grid; the data is treated as compactly supported.
    pub fn integral(&self) -> f64 {
        quadrature::trapezoid(self.grid.step, &self.values)
    }

    pub fn norm_sq(&self) -> f64 {
        let sq: Vec<f64> = self.values.iter().map(|v| v * v).collect();
        quadrature::trapezoid(self.grid.step, &sq)
    }

    /// `∫ self(x) w(x) dx` against a weight evaluated on the same grid.
    pub fn pair_with(&self, weight: &[f64]) -> f64 {
        let prod: Vec<f64> = self.values.iter().zip(weight).map(|(a, b)| a * b).collect();
        quadrature::trapezoid(self.grid.step, &prod)
    }

    /// Inner product with another sampled function on a compatible lattice.
    pub fn inner(&self, other: &SampledFunction) -> Result<f64> {
        let hull = self.grid.hull(&other.grid)?;
        let a = self.extend_to(&hull)?;
        let b = other.extend_to(&hull)?;
        Ok(a.pair_with(&b.values))
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Cubic (Catmull-Rom) interpolation; exact at grid nodes, zero outside.
    pub fn value_at(&self, x: f64) -> f64 {
        let t = (x - self.grid.start) / self.grid.step;
        let n = self.grid.len as isize;
        if t < -1e-12 || t > (n - 1) as f64 + 1e-12 {
            return 0.0;
        }
        let i = (t.floor() as isize).clamp(0, (n - 2).max(0));
        let s = t - i as f64;
        let at = |k: isize| -> f64 {
            if k < 0 || k >= n {
                0.0
            } else {
                self.values[k as usize]
            }
        };
        let (p0, p1, p2, p3) = (at(i - 1), at(i), at(i + 1), at(i + 2));
        p1 + 0.5
            * s
            * (p2 - p0 + s * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 + s * (3.0 * (p1 - p2) + p3 - p0)))
    }
}

pub(crate) fn bump(u: f64) -> f64 {
    if u.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - u * u)).exp()
    }
}

/// Smooth compactly supported spectral window `φ(λ)` on `(lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralBump {
    pub lo: f64,
    pub hi: f64,
}

impl SpectralBump {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(hi > lo) {
            return Err(Error::InvalidParameter(format!("empty bump support [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    pub fn eval(&self, lambda: f64) -> f64 {
        let mid = 0.5 * (self.lo + self.hi);
        let r = 0.5 * (self.hi - self.lo);
        bump((lambda - mid) / r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hull_and_extension_align() {
        let a = Grid::new(0.0, 0.5, 5).unwrap();
        let b = Grid::new(1.5, 0.5, 6).unwrap();
        let h = a.hull(&b).unwrap();
        assert_eq!(h.len, 9);
        assert_eq!(h.start, 0.0);
        let f = SampledFunction::from_fn(b, |x| x);
        let e = f.extend_to(&h).unwrap();
        assert_eq!(e.values[3], 1.5);
        assert_eq!(e.values[0], 0.0);
        let misaligned = Grid::new(0.25, 0.5, 3).unwrap();
        assert!(a.hull(&misaligned).is_err());
    }

    #[test]
    fn gaussian_norm_matches_closed_form() {
        let g = SampledFunction::gaussian(5.0, 0.7, 9.0, 0.01, Some(0.0)).unwrap();
        let exact = 0.7 * std::f64::consts::PI.sqrt();
        assert!((g.norm_sq() - exact).abs() < 1e-12);
    }

    #[test]
    fn interpolation_is_exact_at_nodes() {
        let g = SampledFunction::gaussian(1.0, 0.3, 6.0, 0.01, None).unwrap();
        let x = g.grid.x(37);
        assert_eq!(g.value_at(x), g.values[37]);
        let mid = 0.5 * (g.grid.x(50) + g.grid.x(51));
        let exact = (-0.5 * ((mid - 1.0) / 0.3f64).powi(2)).exp();
        assert!((g.value_at(mid) - exact).abs() < 1e-6);
    }
}
