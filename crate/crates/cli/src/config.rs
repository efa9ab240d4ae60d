use std::path::PathBuf;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use weylspec::boundstates::BoundStateOptions;
use weylspec::quadrature::AdaptiveOptions;
use weylspec::{make_builtin_potential, Numerics, Potential, SampledFunction, SpectralBump, SpectralOptions};

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Task {
    Density,
    Cfunction,
    Project,
    BoundStates,
    Reconstruct,
    Green,
    Verify,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Density => "density",
            Task::Cfunction => "cfunction",
            Task::Project => "project",
            Task::BoundStates => "bound_states",
            Task::Reconstruct => "reconstruct",
            Task::Green => "green",
            Task::Verify => "verify",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialSpec {
    Builtin { name: String, #[serde(default)] params: Vec<f64> },
    Tabulated { x: Vec<f64>, p: Vec<f64>, q: Vec<f64> },
}

impl PotentialSpec {
    pub fn build(&self) -> weylspec::Result<Potential> {
        match self {
            PotentialSpec::Builtin { name, params } => make_builtin_potential(name, params),
            PotentialSpec::Tabulated { x, p, q } => Potential::tabulated(x, p, q),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LambdaGrid {
    Linear { lo: f64, hi: f64, n: usize },
    Log { lo: f64, hi: f64, n: usize },
    List { values: Vec<f64> },
}

impl Default for LambdaGrid {
    fn default() -> Self {
        LambdaGrid::Linear { lo: 0.5, hi: 10.0, n: 20 }
    }
}

impl LambdaGrid {
    pub fn values(&self) -> Vec<f64> {
        match *self {
            LambdaGrid::Linear { lo, hi, n } => (0..n)
                .map(|i| if n == 1 { lo } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 })
                .collect(),
            LambdaGrid::Log { lo, hi, n } => (0..n)
                .map(|i| if n == 1 { lo } else { lo * (hi / lo).powf(i as f64 / (n - 1) as f64) })
                .collect(),
            LambdaGrid::List { ref values } => values.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DataSpec {
    Gaussian { center: f64, sigma: f64, #[serde(default = "default_width")] width_sigmas: f64 },
    Bump { center: f64, radius: f64 },
}

fn default_width() -> f64 {
    8.0
}

impl DataSpec {
    pub fn sample(&self, dx: f64) -> weylspec::Result<SampledFunction> {
        match *self {
            DataSpec::Gaussian { center, sigma, width_sigmas } => SampledFunction::gaussian(center, sigma, width_sigmas, dx, Some(0.0)),
            DataSpec::Bump { center, radius } => SampledFunction::smooth_bump(center, radius, dx),
        }
    }

    fn validate(&self, name: &str) -> Result<(), String> {
        match *self {
            DataSpec::Gaussian { center, sigma, width_sigmas } => {
                if !(sigma > 0.0) || !(width_sigmas > 0.0) || !center.is_finite() {
                    return Err(format!("{name}: gaussian needs finite center and positive sigma, width_sigmas"));
                }
                if center + width_sigmas * sigma <= 0.0 {
                    return Err(format!("{name}: gaussian lies entirely on the negative axis"));
                }
            }
            DataSpec::Bump { center, radius } => {
                if !(radius > 0.0) || !(center - radius >= 0.0) {
                    return Err(format!("{name}: bump needs positive radius and support in [0, inf)"));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DataBlock {
    pub g: DataSpec,
    pub h: DataSpec,
    pub dx: f64,
}

impl Default for DataBlock {
    fn default() -> Self {
        Self {
            g: DataSpec::Gaussian { center: 3.0, sigma: 0.6, width_sigmas: 8.0 },
            h: DataSpec::Gaussian { center: 5.0, sigma: 0.7, width_sigmas: 8.0 },
            dx: 0.01,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectralBlock {
    pub lambda_max: f64,
    pub lambda_max_cap: f64,
    pub tail_tol: f64,
    pub k_panels: usize,
    pub k_order: usize,
    pub quadrature: AdaptiveOptions,
}

impl Default for SpectralBlock {
    fn default() -> Self {
        let d = SpectralOptions::default();
        Self {
            lambda_max: d.lambda_max,
            lambda_max_cap: d.lambda_max_cap,
            tail_tol: d.spectral_tail_tol,
            k_panels: d.k_panels,
            k_order: d.k_order,
            quadrature: d.quad,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProjectionBlock {
    pub interval: [f64; 2],
    pub epsilons: Vec<f64>,
}

impl Default for ProjectionBlock {
    fn default() -> Self {
        Self {
            interval: [1.0, 4.0],
            epsilons: vec![1e-1, 1e-2, 1e-3],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GreenBlock {
    /// `[re, im]` of the spectral parameter.
    pub nu: [f64; 2],
    pub points: Vec<[f64; 2]>,
}

impl Default for GreenBlock {
    fn default() -> Self {
        Self {
            nu: [1.0, 0.5],
            points: vec![[1.0, 2.0], [2.0, 1.0], [0.5, 6.0]],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeAverageBlock {
    pub enabled: bool,
    pub phi: [f64; 2],
    pub ts: Vec<f64>,
    pub dt_steps: usize,
}

impl Default for TimeAverageBlock {
    fn default() -> Self {
        Self {
            enabled: false,
            phi: [1.0, 4.0],
            ts: vec![10.0, 30.0, 100.0],
            dt_steps: 5,
        }
    }
}

impl TimeAverageBlock {
    pub fn bump(&self) -> weylspec::Result<SpectralBump> {
        SpectralBump::new(self.phi[0], self.phi[1])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyBlock {
    /// Randomized samples per property suite.
    pub samples: usize,
}

impl Default for VerifyBlock {
    fn default() -> Self {
        Self { samples: 200 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputBlock {
    pub directory: Option<PathBuf>,
    pub formats: Vec<Format>,
    /// Significant digits per number.
    pub precision: usize,
}

impl Default for OutputBlock {
    fn default() -> Self {
        Self {
            directory: None,
            formats: vec![Format::Csv, Format::Json],
            precision: 17,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    pub potential: PotentialSpec,
    #[serde(default)]
    pub task: Option<Task>,
    #[serde(default)]
    pub numerics: Numerics,
    #[serde(default)]
    pub spectral: SpectralBlock,
    #[serde(default)]
    pub lambdas: LambdaGrid,
    #[serde(default)]
    pub projection: ProjectionBlock,
    #[serde(default)]
    pub data: DataBlock,
    /// Search window and scan settings; the window defaults to one derived
    /// from the potential.
    #[serde(default)]
    pub bound_states: Option<BoundStateOptions>,
    #[serde(default)]
    pub zero_energy_x_max: Option<f64>,
    #[serde(default)]
    pub green: GreenBlock,
    #[serde(default)]
    pub time_average: TimeAverageBlock,
    #[serde(default)]
    pub verify: VerifyBlock,
    #[serde(default)]
    pub output: OutputBlock,
    #[serde(default)]
    pub seed: u64,
}

fn strictly_increasing(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite()) && v.windows(2).all(|w| w[1] > w[0])
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| format!("config: {e}"))
    }

    pub fn spectral_options(&self) -> SpectralOptions {
        SpectralOptions {
            numerics: self.numerics,
            quad: self.spectral.quadrature,
            lambda_max: self.spectral.lambda_max,
            lambda_max_cap: self.spectral.lambda_max_cap,
            spectral_tail_tol: self.spectral.tail_tol,
            k_panels: self.spectral.k_panels,
            k_order: self.spectral.k_order,
        }
    }

    /// Checks everything that can be checked without running a solver.
    pub fn validate(&self) -> Result<(), String> {
        if self.version != CONFIG_VERSION {
            return Err(format!("unsupported config version {} (expected {CONFIG_VERSION})", self.version));
        }
        if self.task.is_none() {
            return Err("no task given in the config or on the command line".into());
        }
        self.potential.build().map_err(|e| format!("potential: {e}"))?;
        self.spectral_options().validate().map_err(|e| e.to_string())?;
        let q = &self.spectral.quadrature;
        if !(q.abs_tol > 0.0) || !(q.rel_tol > 0.0) || q.order < 2 || q.initial_panels == 0 {
            return Err("spectral.quadrature: tolerances must be positive, order >= 2, initial_panels >= 1".into());
        }

        let lambdas = self.lambdas.values();
        if lambdas.is_empty() || !strictly_increasing(&lambdas) {
            return Err("lambdas: grid must be non-empty and strictly increasing".into());
        }
        if lambdas[0] <= self.numerics.lambda_min {
            return Err(format!(
                "lambdas: grid starts at {} which is not above lambda_min = {}",
                lambdas[0], self.numerics.lambda_min
            ));
        }
        if let LambdaGrid::Log { lo, .. } = self.lambdas {
            if !(lo > 0.0) {
                return Err("lambdas: log grid needs lo > 0".into());
            }
        }

        let [alpha, beta] = self.projection.interval;
        if !(alpha > self.numerics.lambda_min) || !(beta > alpha) {
            return Err(format!("projection.interval must satisfy lambda_min < alpha < beta, got [{alpha}, {beta}]"));
        }
        if self.projection.epsilons.iter().any(|e| !(*e > 0.0)) {
            return Err("projection.epsilons must be positive".into());
        }

        if !(self.data.dx > 0.0) {
            return Err("data.dx must be positive".into());
        }
        self.data.g.validate("data.g")?;
        self.data.h.validate("data.h")?;

        if let Some(b) = &self.bound_states {
            if !(b.z_range.0 > 0.0) || !(b.z_range.1 > b.z_range.0) || b.n_scan < 16 || !(b.root_tol > 0.0) || !(b.dx > 0.0) {
                return Err("bound_states: need 0 < z_lo < z_hi, n_scan >= 16, positive root_tol and dx".into());
            }
        }
        if let Some(x) = self.zero_energy_x_max {
            if !(x > 0.0) {
                return Err("zero_energy_x_max must be positive".into());
            }
        }

        let [re, im] = self.green.nu;
        if !re.is_finite() || !im.is_finite() || (im == 0.0 && re >= 0.0) {
            return Err("green.nu must lie off [0, inf)".into());
        }
        if self.green.points.iter().flatten().any(|x| !(*x >= 0.0) || !x.is_finite()) {
            return Err("green.points must be finite and non-negative".into());
        }

        let ta = &self.time_average;
        if ta.ts.is_empty() || !strictly_increasing(&ta.ts) || ta.ts[0] <= 0.0 || ta.dt_steps == 0 {
            return Err("time_average: ts must be positive and strictly increasing, dt_steps >= 1".into());
        }
        if !(ta.phi[1] > ta.phi[0]) {
            return Err("time_average.phi must be an interval [lo, hi] with lo < hi".into());
        }
        if self.verify.samples == 0 {
            return Err("verify.samples must be at least 1".into());
        }
        if self.output.formats.is_empty() || !(1..=17).contains(&self.output.precision) {
            return Err("output: need at least one format and precision in 1..=17".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal(task: &str) -> String {
        format!(r#"{{"version": 1, "task": "{task}", "potential": {{"kind": "builtin", "name": "free"}}}}"#)
    }

    #[test]
    fn minimal_config_validates() {
        for task in ["density", "cfunction", "project", "bound_states", "reconstruct", "green", "verify"] {
            RunConfig::parse(&minimal(task)).unwrap().validate().unwrap();
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = r#"{"version": 1, "task": "density", "potential": {"kind": "builtin", "name": "free"}, "colour": 3}"#;
        assert!(RunConfig::parse(text).is_err());
        let text = r#"{"version": 1, "task": "density", "potential": {"kind": "builtin", "name": "free"}, "numerics": {"odetol": 1}}"#;
        assert!(RunConfig::parse(text).is_err());
    }

    #[test]
    fn zero_lambda_min_is_invalid() {
        let text = r#"{"version": 1, "task": "density", "potential": {"kind": "builtin", "name": "free"}, "numerics": {"lambda_min": 0}}"#;
        assert!(RunConfig::parse(text).unwrap().validate().is_err());
    }

    #[test]
    fn non_monotone_grid_is_invalid() {
        let text = r#"{"version": 1, "task": "density", "potential": {"kind": "builtin", "name": "free"},
            "lambdas": {"kind": "list", "values": [1.0, 3.0, 2.0]}}"#;
        assert!(RunConfig::parse(text).unwrap().validate().is_err());
    }

    #[test]
    fn grids() {
        let g = LambdaGrid::Log { lo: 1.0, hi: 100.0, n: 3 }.values();
        assert!((g[1] - 10.0).abs() < 1e-12);
        assert_eq!(LambdaGrid::Linear { lo: 0.5, hi: 10.0, n: 20 }.values().len(), 20);
    }
}
