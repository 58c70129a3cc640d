//! Numerical toolkit for two-dimensional minimal graphs in `R^{n+2}`, maximal
//! spacelike graphs in the split space `R^{n+2}_n`, and the constructions
//! relating them: the twin correspondence, special Lagrangian lifts,
//! generalized Gauss maps, isothermal charts and Dirichlet solvers.
//!
//! All data lives on uniform rectangular grids ([`GridDomain`]); derivatives
//! are second-order finite differences unless a [`HeightMap`] carries exact
//! first derivatives.

pub mod catalog;
pub mod conformal;
pub mod error;
pub mod fields;
pub mod gauss;
pub mod gfield;
pub mod grid;
pub mod interp;
pub mod report;
pub mod slag;
pub mod solver;
pub mod systems;
pub mod twin;
pub mod verify;

pub use catalog::{make_surface, Params, Surface};
pub use conformal::{build_chart, resample_to_chart, ConformalChart, NullCurveField, ResampleOptions};
pub use error::{Error, Result};
pub use fields::{first_fundamental_form, Gradient, HeightMap, MetricData, Signature};
pub use gauss::{gauss_map, hyperplane_fit, jorgens_gauss, ProjectivePointField};
pub use grid::{GridDomain, NodeIndex, ScalarField};
pub use interp::Interpolation;
pub use slag::{graph_rotate, sl_lift, RotateMode, SLLift, SLParams};
pub use solver::{solve_maximal, solve_minimal, SolveOptions};
pub use systems::{maximal_residual, minimal_residual, Normalization, ResidualReport};
pub use twin::{twin_backward, twin_forward, verify_twin, TwinPair};
