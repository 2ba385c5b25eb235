//! symmlab: a numerical workbench for rotationally symmetric manifolds with a
//! pole. The metric is `dr^2 + h(r)^2 dTheta^2`; the crate builds spherical
//! means of scalar fields, integrates geodesics, and runs verdict-producing
//! checks for a family of growth, energy and integral inequalities satisfied
//! by subharmonic and convex fields.

pub mod error;
pub mod expr;
pub mod field;
pub mod geodesic;
pub mod grid;
pub mod harness;
pub mod manifold;
pub mod quadrature;
pub mod scenario;
pub mod symmetrize;

pub use error::{Error, Result};
pub use field::{Direction, PolarPoint, ScalarField};
pub use geodesic::{exp_map, sample_geodesics, SamplerSpec, TangentVector, Trajectory};
pub use harness::{CheckId, CheckReport, GrowthClass, Harness, Tolerances, Verdict};
pub use manifold::{Hypothesis, ModelManifold, WarpingFunction};
pub use quadrature::{ball_integral, sphere_mean, sphere_rule, SphereRule};
pub use scenario::{run_scenario, ScenarioConfig};
pub use symmetrize::{symmetrize, RadialProfile};
