//! Second-order finite differences: central in the interior, one-sided
//! three- and four-point stencils on the boundary rows and columns.

use crate::grid::{GridDomain, ScalarField};

#[derive(Clone, Copy)]
enum Axis {
    X,
    Y,
}

fn first_along(field: &ScalarField, axis: Axis) -> ScalarField {
    let d = *field.domain();
    let v = field.values();
    let (n, h, stride) = match axis {
        Axis::X => (d.nx, d.dx, 1),
        Axis::Y => (d.ny, d.dy, d.nx),
    };
    let inv2h = 1.0 / (2.0 * h);
    let mut out = vec![0.0; d.len()];
    for k in 0..d.len() {
        let pos = match axis {
            Axis::X => k % d.nx,
            Axis::Y => k / d.nx,
        };
        out[k] = if pos == 0 {
            (-3.0 * v[k] + 4.0 * v[k + stride] - v[k + 2 * stride]) * inv2h
        } else if pos == n - 1 {
            (3.0 * v[k] - 4.0 * v[k - stride] + v[k - 2 * stride]) * inv2h
        } else {
            (v[k + stride] - v[k - stride]) * inv2h
        };
    }
    ScalarField::from_vec_unchecked(d, out)
}

fn second_along(field: &ScalarField, axis: Axis) -> ScalarField {
    let d = *field.domain();
    let v = field.values();
    let (n, h, s) = match axis {
        Axis::X => (d.nx, d.dx, 1),
        Axis::Y => (d.ny, d.dy, d.nx),
    };
    let inv_h2 = 1.0 / (h * h);
    let mut out = vec![0.0; d.len()];
    for k in 0..d.len() {
        let pos = match axis {
            Axis::X => k % d.nx,
            Axis::Y => k / d.nx,
        };
        out[k] = if pos == 0 {
            (2.0 * v[k] - 5.0 * v[k + s] + 4.0 * v[k + 2 * s] - v[k + 3 * s]) * inv_h2
        } else if pos == n - 1 {
            (2.0 * v[k] - 5.0 * v[k - s] + 4.0 * v[k - 2 * s] - v[k - 3 * s]) * inv_h2
        } else {
            (v[k + s] - 2.0 * v[k] + v[k - s]) * inv_h2
        };
    }
    ScalarField::from_vec_unchecked(d, out)
}

// Fourth-order first derivative; needs at least five nodes along the axis.
fn first_along_fourth(field: &ScalarField, axis: Axis) -> ScalarField {
    let d = *field.domain();
    let v = field.values();
    let (n, h, s) = match axis {
        Axis::X => (d.nx, d.dx, 1),
        Axis::Y => (d.ny, d.dy, d.nx),
    };
    let inv12h = 1.0 / (12.0 * h);
    let at = |k: usize, o: isize| v[(k as isize + o * s as isize) as usize];
    let mut out = vec![0.0; d.len()];
    for (k, o) in out.iter_mut().enumerate() {
        let pos = match axis {
            Axis::X => k % d.nx,
            Axis::Y => k / d.nx,
        };
        // one-sided stencils are mirrored at the far end with a sign flip
        let (sign, w): (f64, [(isize, f64); 5]) = match pos {
            0 => (1.0, [(0, -25.0), (1, 48.0), (2, -36.0), (3, 16.0), (4, -3.0)]),
            1 => (1.0, [(-1, -3.0), (0, -10.0), (1, 18.0), (2, -6.0), (3, 1.0)]),
            p if p == n - 1 => (-1.0, [(0, -25.0), (-1, 48.0), (-2, -36.0), (-3, 16.0), (-4, -3.0)]),
            p if p == n - 2 => (-1.0, [(1, -3.0), (0, -10.0), (-1, 18.0), (-2, -6.0), (-3, 1.0)]),
            _ => (1.0, [(-2, 1.0), (-1, -8.0), (0, 0.0), (1, 8.0), (2, -1.0)]),
        };
        *o = sign * w.iter().map(|&(off, c)| c * at(k, off)).sum::<f64>() * inv12h;
    }
    ScalarField::from_vec_unchecked(d, out)
}

/// Fourth-order `d/dx`, used where a derivative is differentiated again.
pub fn partial_x4(field: &ScalarField) -> ScalarField {
    first_along_fourth(field, Axis::X)
}

pub fn partial_y4(field: &ScalarField) -> ScalarField {
    first_along_fourth(field, Axis::Y)
}

pub fn partial_x(field: &ScalarField) -> ScalarField {
    first_along(field, Axis::X)
}

pub fn partial_y(field: &ScalarField) -> ScalarField {
    first_along(field, Axis::Y)
}

pub fn partial_xx(field: &ScalarField) -> ScalarField {
    second_along(field, Axis::X)
}

pub fn partial_yy(field: &ScalarField) -> ScalarField {
    second_along(field, Axis::Y)
}

/// Mixed derivative as `partial_y(partial_x(.))`; in the interior this is
/// the four-corner cross stencil.
pub fn partial_xy(field: &ScalarField) -> ScalarField {
    partial_y(&partial_x(field))
}

/// The three distinct second derivatives of a scalar field.
#[derive(Clone, Debug)]
pub struct Hessian {
    pub xx: ScalarField,
    pub xy: ScalarField,
    pub yy: ScalarField,
}

impl Hessian {
    pub fn of(field: &ScalarField) -> Hessian {
        Hessian { xx: partial_xx(field), xy: partial_xy(field), yy: partial_yy(field) }
    }

    pub fn domain(&self) -> &GridDomain {
        self.xx.domain()
    }

    /// Pointwise `h_xx h_yy - h_xy^2`.
    pub fn determinant(&self) -> ScalarField {
        let d = *self.domain();
        let values = (0..d.len())
            .map(|k| {
                let (a, b, c) = (self.xx.values()[k], self.yy.values()[k], self.xy.values()[k]);
                a * b - c * c
            })
            .collect();
        ScalarField::from_vec_unchecked(d, values)
    }

    /// Pointwise `h_xx + h_yy`.
    pub fn laplacian(&self) -> ScalarField {
        self.xx.zip_map(&self.yy, |a, b| a + b)
    }
}
