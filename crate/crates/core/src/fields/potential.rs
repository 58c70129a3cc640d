//! Path integration of closed 1-forms `P dx + Q dy` on a rectangle.
//!
//! The potential at a node is the average of the trapezoid-rule integrals
//! along the two axis-aligned L-paths from the basepoint (x first, and y
//! first).

use crate::error::{truncate_nodes, Error, Result};
use crate::fields::diff::{partial_x, partial_y};
use crate::grid::{ensure_same_domain, NodeIndex, ScalarField};

#[derive(Clone, Debug)]
pub struct PotentialResult {
    pub potential: ScalarField,
    /// Pointwise `|dP/dy - dQ/dx|`.
    pub closedness_residual: ScalarField,
    pub basepoint: NodeIndex,
    /// Max over interior nodes of the closedness residual divided by
    /// `max(1, |grad P|, |grad Q|)` at the node.
    pub scaled_closedness: f64,
    /// Max difference between the x-first and y-first path integrals.
    pub path_gap: f64,
}

/// Integrates `P dx + Q dy` from `basepoint`. With `tol` set, fails with
/// `NOT_CLOSED` when the scaled closedness residual exceeds it.
pub fn integrate_exact_form(
    p: &ScalarField,
    q: &ScalarField,
    basepoint: NodeIndex,
    tol: Option<f64>,
) -> Result<PotentialResult> {
    ensure_same_domain(p.domain(), q.domain(), "integrate_exact_form")?;
    let d = *p.domain();
    if !d.contains(basepoint) {
        return Err(Error::InvalidDomain(format!(
            "basepoint ({}, {}) outside {}x{} grid",
            basepoint.i, basepoint.j, d.nx, d.ny
        )));
    }

    let (py, qx) = (partial_y(p), partial_x(q));
    let (px, qy) = (partial_x(p), partial_y(q));
    let closed: Vec<f64> = (0..d.len()).map(|k| (py.values()[k] - qx.values()[k]).abs()).collect();
    let mut scaled = 0.0f64;
    let mut worst = Vec::new();
    let scale_at = |k: usize| {
        1f64.max(px.values()[k].abs()).max(py.values()[k].abs()).max(qx.values()[k].abs()).max(qy.values()[k].abs())
    };
    for k in d.interior_indices() {
        scaled = scaled.max(closed[k] / scale_at(k));
    }
    if let Some(tol) = tol {
        if scaled > tol {
            for k in d.interior_indices() {
                if closed[k] / scale_at(k) > tol {
                    worst.push(d.node(k));
                }
            }
            return Err(Error::NotClosed { residual: scaled, tol, nodes: truncate_nodes(worst) });
        }
    }

    let (pv, qv) = (p.values(), q.values());
    let (i0, j0) = (basepoint.i, basepoint.j);

    // row_int[j*nx + i] = int_{x_i0}^{x_i} P(., y_j) dx, for every row
    let mut row_int = vec![0.0; d.len()];
    for j in 0..d.ny {
        let base = j * d.nx;
        for i in i0 + 1..d.nx {
            row_int[base + i] = row_int[base + i - 1] + 0.5 * d.dx * (pv[base + i - 1] + pv[base + i]);
        }
        for i in (0..i0).rev() {
            row_int[base + i] = row_int[base + i + 1] - 0.5 * d.dx * (pv[base + i + 1] + pv[base + i]);
        }
    }
    // col_int[j*nx + i] = int_{y_j0}^{y_j} Q(x_i, .) dy, for every column
    let mut col_int = vec![0.0; d.len()];
    for i in 0..d.nx {
        for j in j0 + 1..d.ny {
            let (k, km) = (j * d.nx + i, (j - 1) * d.nx + i);
            col_int[k] = col_int[km] + 0.5 * d.dy * (qv[km] + qv[k]);
        }
        for j in (0..j0).rev() {
            let (k, kp) = (j * d.nx + i, (j + 1) * d.nx + i);
            col_int[k] = col_int[kp] - 0.5 * d.dy * (qv[kp] + qv[k]);
        }
    }

    let mut potential = vec![0.0; d.len()];
    let mut path_gap = 0.0f64;
    for j in 0..d.ny {
        for i in 0..d.nx {
            let k = j * d.nx + i;
            let x_first = row_int[j0 * d.nx + i] + col_int[k];
            let y_first = col_int[j * d.nx + i0] + row_int[k];
            path_gap = path_gap.max((x_first - y_first).abs());
            potential[k] = 0.5 * (x_first + y_first);
        }
    }
    potential[d.index(i0, j0)] = 0.0;

    Ok(PotentialResult {
        potential: ScalarField::new(d, potential)?,
        closedness_residual: ScalarField::from_vec_unchecked(d, closed),
        basepoint,
        scaled_closedness: scaled,
        path_gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridDomain;

    fn dom(n: usize) -> GridDomain {
        GridDomain::from_bounds(0.25, -0.5, 1.25, 0.5, n, n).unwrap()
    }

    #[test]
    fn constant_form_integrates_exactly() {
        let d = dom(17);
        let r = integrate_exact_form(
            &ScalarField::constant(d, 1.0),
            &ScalarField::zeros(d),
            NodeIndex::new(0, 0),
            Some(1e-12),
        )
        .unwrap();
        for j in 0..d.ny {
            for i in 0..d.nx {
                assert!((r.potential.at(i, j) - (d.x(i) - d.x0)).abs() < 1e-14);
            }
        }
        assert_eq!(r.closedness_residual.max_abs(), 0.0);
        assert_eq!(r.potential.at(0, 0), 0.0);
    }

    #[test]
    fn symmetric_form_gives_xy_and_is_path_independent() {
        let d = dom(33);
        let p = ScalarField::from_fn(d, |_, y| y);
        let q = ScalarField::from_fn(d, |x, _| x);
        let r = integrate_exact_form(&p, &q, NodeIndex::new(0, 0), Some(1e-10)).unwrap();
        // trapezoid is exact on linear integrands
        for j in 0..d.ny {
            for i in 0..d.nx {
                let exact = d.x(i) * d.y(j) - d.x0 * d.y0;
                assert!((r.potential.at(i, j) - exact).abs() < 1e-13);
            }
        }
        assert!(r.closedness_residual.max_abs() < 1e-12);
        assert!(r.path_gap < 1e-13);
    }

    #[test]
    fn interior_basepoint_is_anchored() {
        let d = dom(17);
        let p = ScalarField::from_fn(d, |x, y| (x * y).cos() * y);
        let q = ScalarField::from_fn(d, |x, y| (x * y).cos() * x);
        let b = NodeIndex::new(7, 11);
        let r = integrate_exact_form(&p, &q, b, None).unwrap();
        assert_eq!(r.potential.at(7, 11), 0.0);
        let exact = |i: usize, j: usize| (d.x(i) * d.y(j)).sin() - (d.x(7) * d.y(11)).sin();
        assert!((r.potential.at(0, 0) - exact(0, 0)).abs() < 1e-3);
    }

    #[test]
    fn non_closed_form_is_rejected() {
        let d = dom(17);
        let p = ScalarField::from_fn(d, |_, y| -y);
        let q = ScalarField::from_fn(d, |x, _| x);
        let err = integrate_exact_form(&p, &q, NodeIndex::new(0, 0), Some(1e-3)).unwrap_err();
        assert_eq!(err.code(), "NOT_CLOSED");
        assert!(!err.nodes().is_empty());
    }

    #[test]
    fn basepoint_outside_grid_is_rejected() {
        let d = dom(9);
        let z = ScalarField::zeros(d);
        assert!(integrate_exact_form(&z, &z, NodeIndex::new(9, 0), None).is_err());
    }
}
