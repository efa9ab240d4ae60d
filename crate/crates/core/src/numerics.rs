use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::Execution;

/// Tolerances and limits shared by the solvers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Numerics {
    /// Local error target of the ODE integrator, relative to `1 + ‖u‖`.
    pub ode_tol: f64,
    /// Target for the truncation quantity `k_tail(x_max)`.
    pub tail_tol: f64,
    /// Spectral parameters at or below this are not evaluated.
    pub lambda_min: f64,
    /// Hard cap for the truncation point search.
    pub x_max_cap: f64,
    pub exec: Execution,
}

impl Default for Numerics {
    fn default() -> Self {
        Self {
            ode_tol: 1e-10,
            tail_tol: 1e-10,
            lambda_min: 1e-3,
            x_max_cap: 1e4,
            exec: Execution::Parallel,
        }
    }
}

impl Numerics {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| -> Result<()> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must be positive and finite, got {v}")))
            }
        };
        positive("ode_tol", self.ode_tol)?;
        positive("tail_tol", self.tail_tol)?;
        positive("lambda_min", self.lambda_min)?;
        positive("x_max_cap", self.x_max_cap)
    }

    pub fn sequential(mut self) -> Self {
        self.exec = Execution::Sequential;
        self
    }
}
