//! Point evaluation of grid fields by tensor-product Lagrange interpolation.

use serde::{Deserialize, Serialize};

use crate::grid::ScalarField;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Interpolation {
    /// 4 x 4 cubic stencil, fourth-order values and third-order gradients.
    #[default]
    Cubic,
    Bilinear,
}

/// Stencil start, weights and derivative weights (per unit spacing) along one axis.
struct Axis {
    start: usize,
    w: [f64; 4],
    dw: [f64; 4],
    len: usize,
}

fn axis(u: f64, n: usize, method: Interpolation) -> Axis {
    match method {
        Interpolation::Bilinear => {
            let c = (u.floor().max(0.0) as usize).min(n - 2);
            let t = u - c as f64;
            Axis { start: c, w: [1.0 - t, t, 0.0, 0.0], dw: [-1.0, 1.0, 0.0, 0.0], len: 2 }
        }
        Interpolation::Cubic => {
            let c = (u.floor().max(0.0) as usize).min(n - 2);
            let s = c.saturating_sub(1).min(n - 4);
            let t = u - s as f64;
            let (a, b, c, d) = (t, t - 1.0, t - 2.0, t - 3.0);
            Axis {
                start: s,
                w: [-b * c * d / 6.0, a * c * d / 2.0, -a * b * d / 2.0, a * b * c / 6.0],
                dw: [
                    -(c * d + b * d + b * c) / 6.0,
                    (c * d + a * d + a * c) / 2.0,
                    -(b * d + a * d + a * b) / 2.0,
                    (b * c + a * c + a * b) / 6.0,
                ],
                len: 4,
            }
        }
    }
}

/// Value and `(d/dx, d/dy)` of the interpolant at `(x, y)`. Points outside
/// the grid are extrapolated from the nearest stencil.
pub fn sample_with_gradient(field: &ScalarField, x: f64, y: f64, method: Interpolation) -> (f64, f64, f64) {
    let d = field.domain();
    let ax = axis((x - d.x0) / d.dx, d.nx, method);
    let ay = axis((y - d.y0) / d.dy, d.ny, method);
    let vals = field.values();
    let (mut v, mut vx, mut vy) = (0.0, 0.0, 0.0);
    for b in 0..ay.len {
        let row = (ay.start + b) * d.nx + ax.start;
        let (mut r, mut rx) = (0.0, 0.0);
        for a in 0..ax.len {
            let f = vals[row + a];
            r += ax.w[a] * f;
            rx += ax.dw[a] * f;
        }
        v += ay.w[b] * r;
        vx += ay.w[b] * rx;
        vy += ay.dw[b] * r;
    }
    (v, vx / d.dx, vy / d.dy)
}

pub fn sample(field: &ScalarField, x: f64, y: f64, method: Interpolation) -> f64 {
    sample_with_gradient(field, x, y, method).0
}
