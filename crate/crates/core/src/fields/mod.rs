//! Grid fields, finite differences, induced metrics, Jacobians and
//! potentials of closed 1-forms.

pub mod diff;
pub mod height;
pub mod jacobian;
pub mod metric;
pub mod potential;

pub use diff::{partial_x, partial_x4, partial_xx, partial_xy, partial_y, partial_y4, partial_yy, Hessian};
pub use height::{Gradient, HeightMap};
pub use jacobian::{jacobian_data, jacobian_from_gradients, JacobianData};
pub use metric::{first_fundamental_form, metric_from_gradients, MetricData, Signature};
pub use potential::{integrate_exact_form, PotentialResult};
