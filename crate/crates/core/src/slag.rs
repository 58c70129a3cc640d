//! Special Lagrangian lifts of minimal graphs, symplectic graph rotations,
//! and residuals of the special and split special Lagrangian equations.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::Serialize;

use crate::error::{truncate_nodes, Error, Result};
use crate::fields::{
    first_fundamental_form, integrate_exact_form, partial_x, partial_y, HeightMap, Hessian, Signature,
};
use crate::grid::{GridDomain, NodeIndex, ScalarField};
use crate::report::{to_json, GridInfo};
use crate::systems::{minimal_residual, Normalization, ResidualReport};

#[derive(Clone, Debug)]
pub struct SLLift {
    pub m: ScalarField,
    pub n: ScalarField,
    pub h: ScalarField,
    pub basepoint: NodeIndex,
    /// Max interior `|M_y - N_x|`.
    pub gradient_symmetry_residual: f64,
    /// Max interior `|h_xx h_yy - h_xy^2 - 1|`.
    pub hessian_det_residual: f64,
    /// Max interior `|d(M, N)/d(x, y) - 1|`.
    pub area_residual: f64,
}

#[derive(Serialize)]
struct LiftJson {
    grid: GridInfo,
    basepoint: NodeIndex,
    gradient_symmetry_residual: f64,
    hessian_det_residual: f64,
    area_residual: f64,
}

impl SLLift {
    pub fn fields(&self) -> [ScalarField; 3] {
        [self.m.clone(), self.n.clone(), self.h.clone()]
    }

    pub fn residuals_json(&self) -> String {
        to_json(&LiftJson {
            grid: GridInfo::from(self.m.domain()),
            basepoint: self.basepoint,
            gradient_symmetry_residual: self.gradient_symmetry_residual,
            hessian_det_residual: self.hessian_det_residual,
            area_residual: self.area_residual,
        })
    }
}

fn interior_max(d: &GridDomain, f: impl Fn(usize) -> f64) -> f64 {
    d.interior_indices().map(f).fold(0.0, f64::max)
}

/// `M`, `N` with `(M_x, M_y) = (E/w, F/w)` and `(N_x, N_y) = (F/w, G/w)`,
/// both vanishing at the basepoint. Also checks minimality.
pub(crate) fn lift_potentials(f: &HeightMap, basepoint: NodeIndex, tol: f64) -> Result<(ScalarField, ScalarField)> {
    let metric = first_fundamental_form(f, Signature::Euclidean);
    let (eo, fo, go) = metric.normalized();
    let m = integrate_exact_form(&eo, &fo, basepoint, Some(tol))?.potential;
    let n = integrate_exact_form(&fo, &go, basepoint, Some(tol))?.potential;
    let res = minimal_residual(f, Normalization::Scaled);
    if res.max_abs > tol {
        return Err(Error::NotMinimal { residual: res.max_abs, tol, nodes: truncate_nodes(res.nodes_above(tol)) });
    }
    Ok((m, n))
}

/// Lifts a minimal graph to the gradient graph of `h` with unimodular Hessian.
/// `tol` defaults to `50 h^2`.
pub fn sl_lift(f: &HeightMap, basepoint: NodeIndex, tol: Option<f64>) -> Result<SLLift> {
    let d = *f.domain();
    let tol = tol.unwrap_or_else(|| crate::twin::default_tol(&d));
    let (m, n) = lift_potentials(f, basepoint, tol)?;
    let h = integrate_exact_form(&m, &n, basepoint, Some(tol))?.potential;
    let (mx, my, nx, ny) = (partial_x(&m), partial_y(&m), partial_x(&n), partial_y(&n));
    let sym = interior_max(&d, |k| (my.values()[k] - nx.values()[k]).abs());
    let area = interior_max(&d, |k| (mx.values()[k] * ny.values()[k] - my.values()[k] * nx.values()[k] - 1.0).abs());
    let det = Hessian::of(&h).determinant();
    let det_res = interior_max(&d, |k| (det.values()[k] - 1.0).abs());
    Ok(SLLift {
        m,
        n,
        h,
        basepoint,
        gradient_symmetry_residual: sym,
        hessian_det_residual: det_res,
        area_residual: area,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RotateMode {
    Standard,
    Reverse,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SLParams {
    pub lambda1: f64,
    pub lambda2: f64,
    /// `+1` or `-1`.
    pub epsilon: i8,
    pub theta: f64,
}

impl SLParams {
    /// Parameters satisfying the constraint of `mode` for angle `theta`:
    /// trigonometric when the constraint is a circle, hyperbolic otherwise.
    pub fn from_angle(theta: f64, epsilon: i8, mode: RotateMode) -> Result<SLParams> {
        check_epsilon(epsilon)?;
        let circle = match mode {
            RotateMode::Standard => epsilon == 1,
            RotateMode::Reverse => epsilon == -1,
        };
        let (lambda1, lambda2) = match (circle, mode) {
            (true, _) => (theta.cos(), theta.sin()),
            (false, RotateMode::Standard) => (theta.cosh(), theta.sinh()),
            (false, RotateMode::Reverse) => (theta.sinh(), theta.cosh()),
        };
        Ok(SLParams { lambda1, lambda2, epsilon, theta })
    }

    /// Residual of the constraint for `mode`.
    pub fn constraint_residual(&self, mode: RotateMode) -> f64 {
        let e = self.epsilon as f64;
        let (l1, l2) = (self.lambda1, self.lambda2);
        match mode {
            RotateMode::Standard => l1 * l1 + e * l2 * l2 - 1.0,
            RotateMode::Reverse => -e * l1 * l1 + l2 * l2 - 1.0,
        }
    }

    pub fn validate(&self, mode: RotateMode) -> Result<()> {
        check_epsilon(self.epsilon)?;
        let r = self.constraint_residual(mode);
        let scale = 1f64.max(self.lambda1 * self.lambda1 + self.lambda2 * self.lambda2);
        if !r.is_finite() || r.abs() > 1e-12 * scale {
            return Err(Error::ParamConstraintViolation(format!(
                "{mode:?} mode needs the lambda constraint to hold, residual {r:.3e}"
            )));
        }
        Ok(())
    }
}

fn check_epsilon(epsilon: i8) -> Result<()> {
    if epsilon == 1 || epsilon == -1 {
        Ok(())
    } else {
        Err(Error::ParamConstraintViolation(format!("epsilon must be +1 or -1, got {epsilon}")))
    }
}

/// Standard: `h = l2 F - e l1 (x^2 + y^2)/2`. Reverse: `h = l2 F + l1 (x^2 + e y^2)/2`.
pub fn graph_rotate(f: &ScalarField, params: &SLParams, mode: RotateMode) -> Result<ScalarField> {
    params.validate(mode)?;
    let d = *f.domain();
    let (l1, l2, e) = (params.lambda1, params.lambda2, params.epsilon as f64);
    let mut out = Vec::with_capacity(d.len());
    for j in 0..d.ny {
        let y = d.y(j);
        for i in 0..d.nx {
            let x = d.x(i);
            let v = f.at(i, j);
            out.push(match mode {
                RotateMode::Standard => l2 * v - e * l1 * (x * x + y * y) / 2.0,
                RotateMode::Reverse => l2 * v + l1 * (x * x + e * y * y) / 2.0,
            });
        }
    }
    ScalarField::new(d, out)
}

/// `cos t (h_xx + h_yy) + sin t (1 - det D^2 h)`.
pub fn sl_residual(h: &ScalarField, theta: f64) -> ResidualReport {
    let hs = Hessian::of(h);
    let (lap, det) = (hs.laplacian(), hs.determinant());
    let (c, s) = (theta.cos(), theta.sin());
    let r = lap.zip_map(&det, |l, dt| c * l + s * (1.0 - dt));
    ResidualReport::build("sl", Signature::Euclidean, Normalization::Raw, vec![r], None)
}

fn split_spacelike_failures(lap: &ScalarField, det: &ScalarField) -> Vec<NodeIndex> {
    let d = *lap.domain();
    d.interior_indices()
        .filter(|&k| {
            let (l, dt) = (lap.values()[k], det.values()[k]);
            (1.0 + dt) * (1.0 + dt) - l * l <= 0.0
        })
        .map(|k| d.node(k))
        .collect()
}

/// `cosh t (h_xx + h_yy) + sinh t (1 + det D^2 h)`; fails where the gradient
/// graph is not spacelike.
pub fn split_sl_residual(h: &ScalarField, theta: f64) -> Result<ResidualReport> {
    let hs = Hessian::of(h);
    let (lap, det) = (hs.laplacian(), hs.determinant());
    let bad = split_spacelike_failures(&lap, &det);
    if !bad.is_empty() {
        return Err(Error::NotSpacelike { nodes: truncate_nodes(bad) });
    }
    let (c, s) = (theta.cosh(), theta.sinh());
    let r = lap.zip_map(&det, |l, dt| c * l + s * (1.0 + dt));
    Ok(ResidualReport::build("split_sl", Signature::Split, Normalization::Raw, vec![r], None))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AngleEstimate {
    pub theta: f64,
    /// Split: max `|phi - mean phi|`. Euclidean: max angular deviation (radians)
    /// of the nodewise angle from the mean, modulo `pi`.
    pub constancy_residual: f64,
}

impl AngleEstimate {
    pub fn to_json(&self) -> String {
        to_json(self)
    }
}

const DENOM_FLOOR: f64 = 1e-10;

/// Estimates the constant phase of a (split) special Lagrangian potential.
///
/// In euclidean mode the angle solves `cos t L + sin t (1 - det) = 0` at each
/// node; it is only defined modulo `pi`, so the nodewise angles are averaged
/// on the doubled circle and the result is reported in `(-pi/2, pi/2]`.
pub fn detect_angle(h: &ScalarField, signature: Signature) -> Result<AngleEstimate> {
    let d = *h.domain();
    let hs = Hessian::of(h);
    let (lap, det) = (hs.laplacian(), hs.determinant());
    let interior: Vec<usize> = d.interior_indices().collect();
    match signature {
        Signature::Split => {
            let mut phi = Vec::with_capacity(interior.len());
            let (mut vanish, mut out_of_range) = (Vec::new(), Vec::new());
            for &k in &interior {
                let den = 1.0 + det.values()[k];
                if den.abs() <= DENOM_FLOOR {
                    vanish.push(d.node(k));
                    continue;
                }
                let p = lap.values()[k] / den;
                if p.abs() >= 1.0 {
                    out_of_range.push(d.node(k));
                }
                phi.push(p);
            }
            if !vanish.is_empty() {
                return Err(Error::DenominatorVanishes { nodes: truncate_nodes(vanish) });
            }
            if !out_of_range.is_empty() {
                return Err(Error::PhiOutOfRange { nodes: truncate_nodes(out_of_range) });
            }
            let mean = phi.iter().sum::<f64>() / phi.len() as f64;
            let spread = phi.iter().map(|p| (p - mean).abs()).fold(0.0, f64::max);
            Ok(AngleEstimate { theta: -mean.atanh(), constancy_residual: spread })
        }
        Signature::Euclidean => {
            // L = 0 forces det <= 0, so both parts vanish only on corrupted data
            let mut psi = Vec::with_capacity(interior.len());
            let mut vanish = Vec::new();
            for &k in &interior {
                let (l, q) = (lap.values()[k], 1.0 - det.values()[k]);
                if l.abs() <= DENOM_FLOOR && q.abs() <= DENOM_FLOOR {
                    vanish.push(d.node(k));
                    continue;
                }
                psi.push(q.atan2(l));
            }
            if !vanish.is_empty() {
                return Err(Error::DenominatorVanishes { nodes: truncate_nodes(vanish) });
            }
            let (c, s) = psi.iter().fold((0.0, 0.0), |(c, s), p| (c + (2.0 * p).cos(), s + (2.0 * p).sin()));
            let mean = 0.5 * s.atan2(c);
            let spread = psi.iter().map(|p| wrap_half_pi(p - mean).abs()).fold(0.0, f64::max);
            Ok(AngleEstimate { theta: wrap_half_pi(mean + FRAC_PI_2), constancy_residual: spread })
        }
    }
}

/// Reduces an angle modulo `pi` into `(-pi/2, pi/2]`.
/// Max gap between the numerical lift potentials and closed-form ones,
/// after shifting the closed form to vanish at the lift's basepoint.
pub fn known_lift_error(lift: &SLLift, known: &crate::catalog::LiftFn) -> f64 {
    let d = *lift.m.domain();
    let b = lift.basepoint;
    let (m0, n0) = known(d.x(b.i), d.y(b.j));
    (0..d.len())
        .map(|k| {
            let node = d.node(k);
            let (m, n) = known(d.x(node.i), d.y(node.j));
            (lift.m.values()[k] - (m - m0)).abs().max((lift.n.values()[k] - (n - n0)).abs())
        })
        .fold(0.0, f64::max)
}

pub fn wrap_half_pi(a: f64) -> f64 {
    let r = a - PI * (a / PI).round();
    if r <= -FRAC_PI_2 {
        r + PI
    } else {
        r
    }
}
