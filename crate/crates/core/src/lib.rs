//! Gaussian wave packets and phase-space metrics for non-Hermitian quadratic
//! Hamiltonians, with the Swanson oscillator as the worked model.
//!
//! The crate provides closed forms for the Swanson oscillator, a fixed-step
//! RK4 integrator for the general metriplectic equations of motion, exact
//! Gaussian propagation through the complex symplectic flow, and the
//! hyperboloid classification of bounded and divergent initial data.
//!
//! ```
//! use swanson::{metric_closed, Metric, SwansonParams};
//!
//! let params = SwansonParams::new(1.0, 0.5).unwrap();
//! let quarter = params.period() / 4.0;
//! let g = metric_closed(&params, &Metric::IDENTITY, quarter).unwrap();
//! assert!((g.g_pp - 1.0 / 3.0).abs() < 1e-12);
//! assert!((g.g_qq - 3.0).abs() < 1e-12);
//! ```

// `!(x > 0.0)` is deliberate: it rejects NaN along with non-positive values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod closed_form;
pub mod error;
pub mod gaussian;
pub mod geometry;
pub mod linalg;
pub mod metriplectic;
pub mod quadratic_model;
mod rk4;

pub use closed_form::{
    complex_trajectory, d_factor, doubled_flow, first_divergence_time, metric_closed, metric_eigen,
    real_trajectory, survival_closed, ComplexState, DoubledFlow, Metric, MetricEigen, RealState,
};
pub use error::{Error, Result};
pub use gaussian::{
    b_from_metric, complex_symplectic_flow, evolve_b, gaussian_norm, mapped_dynamics,
    metric_from_b, project_expectations, propagate, ComplexSymplectic, GaussianState, UncertaintyB,
};
pub use geometry::{
    classify_b, classify_metric, region_grid, xyz_from_metric, HyperboloidPoint, RegionLabel,
};
pub use metriplectic::{integrate, MetriplecticState, Trajectory};
pub use quadratic_model::{
    spectral_data, swanson_hamiltonian, QuadraticHamiltonian, SpectralData, SwansonParams,
};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/model.md")]
    mod model {}
    #[doc = include_str!("../../../book/src/metric.md")]
    mod metric {}
    #[doc = include_str!("../../../book/src/integrator.md")]
    mod integrator {}
    #[doc = include_str!("../../../book/src/gaussians.md")]
    mod gaussians {}
    #[doc = include_str!("../../../book/src/eta_maps.md")]
    mod eta_maps {}
    #[doc = include_str!("../../../book/src/geometry.md")]
    mod geometry {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../README.md")]
    mod readme {}
}
