use std::f64::consts::FRAC_PI_2;

use crate::error::{Diagnostic, DiagnosticCode};
use crate::fields::height::{Gradient, HeightMap};
use crate::grid::{GridDomain, ScalarField};

/// Pairwise Jacobians `J_{i,j} = a_i b_j - a_j b_i`, their euclidean norm
/// and the area-angle `arccos(min(|J|, 1))`.
#[derive(Clone, Debug)]
pub struct JacobianData {
    /// `((i, j), J_{i,j})` for `0 <= i < j < n` (zero-based).
    pub pairs: Vec<((usize, usize), ScalarField)>,
    pub norm_j: ScalarField,
    pub theta: ScalarField,
    pub diagnostic: Option<Diagnostic>,
}

impl JacobianData {
    pub fn pair(&self, i: usize, j: usize) -> Option<&ScalarField> {
        self.pairs.iter().find(|((a, b), _)| *a == i && *b == j).map(|(_, f)| f)
    }

    pub fn is_positive_area_angle(&self) -> bool {
        self.diagnostic.is_none()
    }

    /// `sin^2 Theta = 1 - |J|^2`.
    pub fn sin2_theta(&self) -> ScalarField {
        self.norm_j.map(|j| 1.0 - j * j)
    }
}

pub fn jacobian_data(h: &HeightMap) -> JacobianData {
    jacobian_from_gradients(h.domain(), &h.gradients())
}

pub fn jacobian_from_gradients(domain: &GridDomain, grads: &[Gradient]) -> JacobianData {
    let d = *domain;
    let n = grads.len();
    let mut pairs = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            let (ai, bi) = (grads[i].dx.values(), grads[i].dy.values());
            let (aj, bj) = (grads[j].dx.values(), grads[j].dy.values());
            let values = (0..d.len()).map(|k| ai[k] * bj[k] - aj[k] * bi[k]).collect();
            pairs.push(((i, j), ScalarField::from_vec_unchecked(d, values)));
        }
    }
    let mut norm = vec![0.0; d.len()];
    for (_, jf) in &pairs {
        for (acc, v) in norm.iter_mut().zip(jf.values()) {
            *acc += v * v;
        }
    }
    norm.iter_mut().for_each(|v| *v = v.sqrt());
    let theta = norm.iter().map(|&v: &f64| if n < 2 { FRAC_PI_2 } else { v.min(1.0).acos() }).collect();
    let bad = (0..d.len()).filter(|&k| norm[k] >= 1.0).map(|k| d.node(k)).collect();
    JacobianData {
        pairs,
        norm_j: ScalarField::from_vec_unchecked(d, norm),
        theta: ScalarField::from_vec_unchecked(d, theta),
        diagnostic: Diagnostic::from_nodes(DiagnosticCode::AreaAngleViolation, bad),
    }
}
