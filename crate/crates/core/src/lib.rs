//! Spectral analysis of half-line Sturm-Liouville operators
//! `D = -(d/dx) p(x) (d/dx) + q(x)` with Dirichlet condition at 0 and
//! coefficients that tend to `p = 1`, `q = 0` at infinity.
//!
//! Layers, bottom up:
//! - [`coeffs`]: the coefficient pair and its tail majorant
//! - [`odeflow`]: the first-order system for `u = [F; pF']`, exact free flow
//!   `exp(x C_λ)`, regular and decaying solutions, Wronskians
//! - [`asymptotics`]: `s(∞)`, `c(λ)` and the spectral density with a truncation bound
//! - [`green`]: Green's kernel, resolvent, and the resolvent-difference projection
//! - [`spectral`]: kernel-formula projection, transform, reconstruction, Parseval
//! - [`boundstates`]: negative eigenvalues and the zero-energy report
//!
//! λ-sweeps and quadrature batches run on rayon when the `parallel` feature
//! (on by default) is enabled; [`Execution::Sequential`] or building with
//! `--no-default-features` gives the single-threaded path with identical output.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod boundstates;
pub mod coeffs;
pub mod error;
pub mod green;
pub mod numerics;
pub mod odeflow;
pub mod par;
pub mod quadrature;
pub mod sampled;
pub mod scalar;
pub mod spectral;

pub use asymptotics::{c_function, k_tail, s_infinity, spectral_density, ScatteringPoint, SInfinity};
pub use boundstates::{
    default_bound_states, find_bound_states, jost_like, zero_energy_report, BoundState, BoundStateOptions, BoundStateSearch, JostPoint,
    ZeroEnergyReport,
};
pub use coeffs::{make_builtin_potential, q_matrix, validate_hypotheses, DecayClass, DecayReport, Majorant, PerturbationMatrix, Potential};
pub use error::{Error, Result};
pub use green::{apply_resolvent, green_kernel, kodaira_pairing, limit_kernel, GreenKernelSample, Method, ProjectionReport};
pub use odeflow::{
    decaying_eigenfunction, exp_xc, regular_eigenfunction, solve_system, wronskian, Eigenfunction, Orientation, StateVector, Trajectory,
};
pub use numerics::Numerics;
pub use par::Execution;
pub use spectral::{
    parseval_check, project, projection_kernel, reconstruct, time_average_check, transform, weyl_pairing, ParsevalReport, ProjectedFunction,
    Reconstruction, SpectralOptions, TimeAverageReport, TransformResult,
};
pub use sampled::{ComplexSampled, Grid, Sampled, SampledFunction, SpectralBump};

pub use num_complex::Complex64;
