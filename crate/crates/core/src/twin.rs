//! Twin correspondence between minimal graphs in euclidean space and
//! maximal graphs in split-signature space.

use serde::Serialize;

use crate::error::{truncate_nodes, Error, Result};
use crate::fields::{
    first_fundamental_form, integrate_exact_form, jacobian_data, metric_from_gradients, Gradient, HeightMap,
    JacobianData, MetricData, Signature,
};
use crate::grid::{GridDomain, NodeIndex, ScalarField};
use crate::report::{to_json, GridInfo};
use crate::systems::{maximal_residual, minimal_residual, rotated_flux, Normalization};

/// Default precondition tolerance `50 h^2` on the scaled residuals.
pub fn default_tol(d: &GridDomain) -> f64 {
    50.0 * d.h() * d.h()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct TwinDiagnostics {
    /// Max gap between the gradients of `g` and the twin relation applied to `f`.
    pub c1_residual: f64,
    /// Max `|J^f_{ij} - J^g_{ij}|`.
    pub c2_residual: f64,
    /// Max `|omega_hat omega - sin^2 Theta|`.
    pub c3_residual: f64,
    /// Max of `|E/w - E_hat/w_hat|` and its `F`, `G` analogues.
    pub c4_residual: f64,
    /// Max `|f - twin(twin(f))|` after re-anchoring at the basepoint.
    pub involution_residual: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Backward,
}

#[derive(Clone, Debug)]
pub struct TwinPair {
    pub f: HeightMap,
    pub g: HeightMap,
    pub metric_f: MetricData,
    pub metric_g: MetricData,
    pub jac_f: JacobianData,
    pub jac_g: JacobianData,
    pub diagnostics: TwinDiagnostics,
    pub basepoint: NodeIndex,
    pub tol: f64,
    pub direction: Direction,
}

#[derive(Serialize)]
struct PairJson<'a> {
    direction: Direction,
    n: usize,
    grid: GridInfo,
    basepoint: NodeIndex,
    tol: f64,
    diagnostics: &'a TwinDiagnostics,
}

impl TwinPair {
    pub fn diagnostics_json(&self) -> String {
        to_json(&PairJson {
            direction: self.direction,
            n: self.f.n(),
            grid: GridInfo::from(self.f.domain()),
            basepoint: self.basepoint,
            tol: self.tol,
            diagnostics: &self.diagnostics,
        })
    }

    /// Pairs two given height maps without integrating anything; the
    /// diagnostics measure how far they are from being twins.
    pub fn from_maps(f: HeightMap, g: HeightMap, basepoint: NodeIndex, tol: Option<f64>) -> Result<TwinPair> {
        crate::grid::ensure_same_domain(f.domain(), g.domain(), "twin pair")?;
        if f.n() != g.n() {
            return Err(Error::ShapeMismatch(format!("{} vs {} components", f.n(), g.n())));
        }
        if !f.domain().contains(basepoint) {
            return Err(Error::InvalidDomain(format!("basepoint {basepoint:?} outside the grid")));
        }
        let d = *f.domain();
        let mut pair = TwinPair {
            metric_f: first_fundamental_form(&f, Signature::Euclidean),
            metric_g: first_fundamental_form(&g, Signature::Split),
            jac_f: jacobian_data(&f),
            jac_g: jacobian_data(&g),
            f,
            g,
            diagnostics: TwinDiagnostics::default(),
            basepoint,
            tol: tol.unwrap_or_else(|| default_tol(&d)),
            direction: Direction::Forward,
        };
        pair.diagnostics = verify_twin(&pair);
        Ok(pair)
    }
}

/// Twin gradients `(g_x, g_y)` of every component of a minimal-side map.
fn forward_gradients(domain: &GridDomain, grads: &[Gradient]) -> Vec<Gradient> {
    let metric = metric_from_gradients(domain, grads, Signature::Euclidean);
    let normalized = metric.normalized();
    grads
        .iter()
        .map(|gr| {
            let (dx, dy) = rotated_flux(&metric, gr, &normalized);
            Gradient { dx, dy }
        })
        .collect()
}

/// Inverse relation `f_x = (E/w) g_y - (F/w) g_x`, `f_y = -(G/w) g_x + (F/w) g_y`
/// with split-signature coefficients.
fn backward_gradients(domain: &GridDomain, grads: &[Gradient]) -> Vec<Gradient> {
    let d = *domain;
    let metric = metric_from_gradients(domain, grads, Signature::Split);
    let (eo, fo, go) = metric.normalized();
    let (eo, fo, go) = (eo.values(), fo.values(), go.values());
    grads
        .iter()
        .map(|gr| {
            let (a, b) = (gr.dx.values(), gr.dy.values());
            let dx = (0..d.len()).map(|k| eo[k] * b[k] - fo[k] * a[k]).collect();
            let dy = (0..d.len()).map(|k| -go[k] * a[k] + fo[k] * b[k]).collect();
            Gradient { dx: ScalarField::from_vec_unchecked(d, dx), dy: ScalarField::from_vec_unchecked(d, dy) }
        })
        .collect()
}

fn integrate_all(grads: &[Gradient], basepoint: NodeIndex, tol: Option<f64>) -> Result<Vec<ScalarField>> {
    grads.iter().map(|g| integrate_exact_form(&g.dx, &g.dy, basepoint, tol).map(|r| r.potential)).collect()
}

fn area_angle_guard(jac: &JacobianData) -> Result<()> {
    match &jac.diagnostic {
        Some(diag) => Err(Error::AreaAngleViolation { nodes: diag.nodes.clone() }),
        None => Ok(()),
    }
}

pub fn twin_forward(f: &HeightMap, basepoint: NodeIndex, tol: Option<f64>) -> Result<TwinPair> {
    let d = *f.domain();
    let tol = tol.unwrap_or_else(|| default_tol(&d));
    let jac_f = jacobian_data(f);
    area_angle_guard(&jac_f)?;
    let twin_grads = forward_gradients(&d, &f.gradients());
    // closedness of the twin gradient field is the divergence form of the system
    let g_comps = integrate_all(&twin_grads, basepoint, Some(tol))?;
    let res = minimal_residual(f, Normalization::Scaled);
    if res.max_abs > tol {
        return Err(Error::NotMinimal { residual: res.max_abs, tol, nodes: truncate_nodes(res.nodes_above(tol)) });
    }
    let g = HeightMap::new(g_comps)?;
    let metric_g = first_fundamental_form(&g, Signature::Split);
    if !metric_g.all_spacelike() {
        let nodes = (0..d.len()).filter(|&k| !metric_g.spacelike[k]).map(|k| d.node(k)).collect();
        return Err(Error::NotSpacelike { nodes: truncate_nodes(nodes) });
    }
    let mut pair = TwinPair {
        metric_f: first_fundamental_form(f, Signature::Euclidean),
        jac_g: jacobian_data(&g),
        metric_g,
        jac_f,
        f: f.clone(),
        g,
        diagnostics: TwinDiagnostics::default(),
        basepoint,
        tol,
        direction: Direction::Forward,
    };
    pair.diagnostics = verify_twin(&pair);
    Ok(pair)
}

pub fn twin_backward(g: &HeightMap, basepoint: NodeIndex, tol: Option<f64>) -> Result<TwinPair> {
    let d = *g.domain();
    let tol = tol.unwrap_or_else(|| default_tol(&d));
    let metric_g = first_fundamental_form(g, Signature::Split);
    if !metric_g.all_spacelike() {
        let nodes = (0..d.len()).filter(|&k| !metric_g.spacelike[k]).map(|k| d.node(k)).collect();
        return Err(Error::NotSpacelike { nodes: truncate_nodes(nodes) });
    }
    let jac_g = jacobian_data(g);
    area_angle_guard(&jac_g)?;
    let f_comps = integrate_all(&backward_gradients(&d, &g.gradients()), basepoint, Some(tol))?;
    let res = maximal_residual(g, Normalization::Scaled);
    if res.max_abs > tol {
        return Err(Error::NotMaximal { residual: res.max_abs, tol, nodes: truncate_nodes(res.nodes_above(tol)) });
    }
    let f = HeightMap::new(f_comps)?;
    let mut pair = TwinPair {
        metric_f: first_fundamental_form(&f, Signature::Euclidean),
        jac_f: jacobian_data(&f),
        metric_g,
        jac_g,
        f,
        g: g.clone(),
        diagnostics: TwinDiagnostics::default(),
        basepoint,
        tol,
        direction: Direction::Backward,
    };
    pair.diagnostics = verify_twin(&pair);
    Ok(pair)
}

fn interior_max(d: &GridDomain, mut gap: impl FnMut(usize) -> f64) -> f64 {
    d.interior_indices().map(&mut gap).fold(0.0, f64::max)
}

/// Re-anchors `other` to agree with `reference` at `basepoint` and returns
/// the max interior deviation.
fn anchored_gap(reference: &ScalarField, other: &ScalarField, basepoint: NodeIndex) -> f64 {
    let d = *reference.domain();
    let shift = reference.at(basepoint.i, basepoint.j) - other.at(basepoint.i, basepoint.j);
    interior_max(&d, |k| (reference.values()[k] - other.values()[k] - shift).abs())
}

/// Recomputes every diagnostic from the two height maps. Derivatives of the
/// side that was produced by integration come from finite differences.
pub fn verify_twin(pair: &TwinPair) -> TwinDiagnostics {
    let d = *pair.f.domain();
    let f_grads = pair.f.gradients();
    let g_grads = pair.g.gradients();
    let mf = metric_from_gradients(&d, &f_grads, Signature::Euclidean);
    let mg = metric_from_gradients(&d, &g_grads, Signature::Split);
    let jf = jacobian_data(&pair.f);
    let jg = jacobian_data(&pair.g);

    let predicted = forward_gradients(&d, &f_grads);
    let mut c1 = 0.0f64;
    for (p, g) in predicted.iter().zip(&g_grads) {
        c1 = c1.max(interior_max(&d, |k| {
            (p.dx.values()[k] - g.dx.values()[k]).abs().max((p.dy.values()[k] - g.dy.values()[k]).abs())
        }));
    }

    let mut c2 = 0.0f64;
    for ((_, a), (_, b)) in jf.pairs.iter().zip(&jg.pairs) {
        c2 = c2.max(interior_max(&d, |k| (a.values()[k] - b.values()[k]).abs()));
    }

    let sin2 = jf.sin2_theta();
    let c3 = interior_max(&d, |k| (mg.omega.values()[k] * mf.omega.values()[k] - sin2.values()[k]).abs());

    let (fe, ff, fg) = mf.normalized();
    let (ge, gf, gg) = mg.normalized();
    let mut c4 = 0.0f64;
    for (a, b) in [(&fe, &ge), (&ff, &gf), (&fg, &gg)] {
        c4 = c4.max(interior_max(&d, |k| (a.values()[k] - b.values()[k]).abs()));
    }

    let involution = match pair.direction {
        Direction::Forward => integrate_all(&backward_gradients(&d, &g_grads), pair.basepoint, None).map(|back| {
            back.iter().zip(pair.f.components()).map(|(b, f)| anchored_gap(f, b, pair.basepoint)).fold(0.0, f64::max)
        }),
        Direction::Backward => integrate_all(&forward_gradients(&d, &f_grads), pair.basepoint, None).map(|fwd| {
            fwd.iter().zip(pair.g.components()).map(|(a, g)| anchored_gap(g, a, pair.basepoint)).fold(0.0, f64::max)
        }),
    }
    .unwrap_or(f64::INFINITY);

    TwinDiagnostics {
        c1_residual: c1,
        c2_residual: c2,
        c3_residual: c3,
        c4_residual: c4,
        involution_residual: involution,
    }
}

impl TwinDiagnostics {
    pub fn max(&self) -> f64 {
        self.c1_residual.max(self.c2_residual).max(self.c3_residual).max(self.c4_residual).max(self.involution_residual)
    }
}
