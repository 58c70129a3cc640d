//! Pointwise residuals of the minimal and maximal surface systems, their
//! divergence forms, and the closedness identities for `E/omega`,
//! `F/omega`, `G/omega`.
//!
//! Boundary rows and columns are emitted in the residual fields but left
//! out of `max_abs` and `l2`.

use serde::{Deserialize, Serialize};

use crate::error::truncate_nodes;
use crate::fields::{
    first_fundamental_form, metric_from_gradients, partial_x, partial_y, Gradient, HeightMap, Hessian, MetricData,
    Signature,
};
use crate::grid::{NodeIndex, ScalarField};
use crate::report::{to_json, GridInfo};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Normalization {
    Raw,
    /// Divided nodewise by `(E + G) * max(1, max |second derivative|)`.
    Scaled,
}

#[derive(Clone, Debug)]
pub struct ResidualReport {
    pub op: &'static str,
    pub signature: Signature,
    pub normalization: Normalization,
    pub components: Vec<ScalarField>,
    pub max_abs: f64,
    pub l2: f64,
    pub grid: GridInfo,
    /// Interior nodes left out of the aggregates (not spacelike).
    pub excluded_count: usize,
    pub excluded_nodes: Vec<NodeIndex>,
}

#[derive(Serialize)]
struct ReportJson<'a> {
    op: &'a str,
    signature: Signature,
    max_abs: f64,
    l2: f64,
    normalization: Normalization,
    excluded_boundary: bool,
    excluded_nodes: usize,
    grid: GridInfo,
}

impl ResidualReport {
    pub(crate) fn build(
        op: &'static str,
        signature: Signature,
        normalization: Normalization,
        components: Vec<ScalarField>,
        include: Option<&[bool]>,
    ) -> ResidualReport {
        let d = *components[0].domain();
        let mut max_abs = 0.0f64;
        let mut sum_sq = 0.0;
        let mut excluded = Vec::new();
        for k in d.interior_indices() {
            if include.is_some_and(|m| !m[k]) {
                excluded.push(d.node(k));
                continue;
            }
            for c in &components {
                let v = c.values()[k];
                max_abs = max_abs.max(v.abs());
                sum_sq += v * v;
            }
        }
        ResidualReport {
            op,
            signature,
            normalization,
            l2: (sum_sq * d.dx * d.dy).sqrt(),
            max_abs,
            grid: GridInfo::from(&d),
            excluded_count: excluded.len(),
            excluded_nodes: truncate_nodes(excluded),
            components,
        }
    }

    pub fn to_json(&self) -> String {
        to_json(&ReportJson {
            op: self.op,
            signature: self.signature,
            max_abs: self.max_abs,
            l2: self.l2,
            normalization: self.normalization,
            excluded_boundary: true,
            excluded_nodes: self.excluded_count,
            grid: self.grid,
        })
    }

    /// Interior nodes whose residual magnitude exceeds `tol`.
    pub fn nodes_above(&self, tol: f64) -> Vec<NodeIndex> {
        let d = *self.components[0].domain();
        d.interior_indices()
            .filter(|&k| self.components.iter().any(|c| c.values()[k].abs() > tol))
            .map(|k| d.node(k))
            .collect()
    }
}

/// `(E + G) * max(1, max_k |D^2 f_k|)` at every node.
pub(crate) fn residual_scale(metric: &MetricData, hessians: &[Hessian]) -> Vec<f64> {
    let d = *metric.domain();
    (0..d.len())
        .map(|k| {
            let curv = hessians.iter().fold(1.0f64, |m, h| {
                m.max(h.xx.values()[k].abs()).max(h.xy.values()[k].abs()).max(h.yy.values()[k].abs())
            });
            (metric.e.values()[k] + metric.g.values()[k]).abs().max(f64::MIN_POSITIVE) * curv
        })
        .collect()
}

fn apply_scale(raw: Vec<ScalarField>, scale: &[f64], normalization: Normalization) -> Vec<ScalarField> {
    match normalization {
        Normalization::Raw => raw,
        Normalization::Scaled => raw
            .into_iter()
            .map(|c| {
                let d = *c.domain();
                let v = c.values().iter().zip(scale).map(|(r, s)| r / s).collect();
                ScalarField::from_vec_unchecked(d, v)
            })
            .collect(),
    }
}

/// `G u_xx - 2F u_xy + E u_yy` for each component.
fn nondivergence(metric: &MetricData, hessians: &[Hessian]) -> Vec<ScalarField> {
    let d = *metric.domain();
    let (e, f, g) = (metric.e.values(), metric.f.values(), metric.g.values());
    hessians
        .iter()
        .map(|h| {
            let v = (0..d.len())
                .map(|k| g[k] * h.xx.values()[k] - 2.0 * f[k] * h.xy.values()[k] + e[k] * h.yy.values()[k])
                .collect();
            ScalarField::from_vec_unchecked(d, v)
        })
        .collect()
}

pub fn minimal_residual(f: &HeightMap, normalization: Normalization) -> ResidualReport {
    let metric = first_fundamental_form(f, Signature::Euclidean);
    let hessians = f.hessians();
    let raw = nondivergence(&metric, &hessians);
    let comps = apply_scale(raw, &residual_scale(&metric, &hessians), normalization);
    ResidualReport::build("minimal", Signature::Euclidean, normalization, comps, None)
}

/// Maximal-system residual; nodes that are not spacelike are excluded from
/// the aggregates and listed in `excluded_nodes`.
pub fn maximal_residual(g: &HeightMap, normalization: Normalization) -> ResidualReport {
    let metric = first_fundamental_form(g, Signature::Split);
    let hessians = g.hessians();
    let raw = nondivergence(&metric, &hessians);
    let comps = apply_scale(raw, &residual_scale(&metric, &hessians), normalization);
    ResidualReport::build("maximal", Signature::Split, normalization, comps, Some(&metric.spacelike))
}

/// The twin gradient field `(-(E/w) b + (F/w) a, (G/w) a - (F/w) b)` of one
/// component; closed exactly when the divergence form vanishes.
pub(crate) fn rotated_flux(
    metric: &MetricData,
    grad: &Gradient,
    normalized: &(ScalarField, ScalarField, ScalarField),
) -> (ScalarField, ScalarField) {
    let d = *metric.domain();
    let (eo, fo, go) = (normalized.0.values(), normalized.1.values(), normalized.2.values());
    let (a, b) = (grad.dx.values(), grad.dy.values());
    let p = (0..d.len()).map(|k| -eo[k] * b[k] + fo[k] * a[k]).collect();
    let q = (0..d.len()).map(|k| go[k] * a[k] - fo[k] * b[k]).collect();
    (ScalarField::from_vec_unchecked(d, p), ScalarField::from_vec_unchecked(d, q))
}

// The flux is differentiated once more, so it is built from fourth-order
// gradients; second-order ones leave an O(h) error on the boundary rows.
fn divergence_components(metric: &MetricData, grads: &[Gradient]) -> Vec<ScalarField> {
    let normalized = metric.normalized();
    grads
        .iter()
        .map(|gr| {
            // div((G a - F b)/w, (E b - F a)/w) = dQ/dx - dP/dy for the rotated flux
            let (p, q) = rotated_flux(metric, gr, &normalized);
            partial_x(&q).zip_map(&partial_y(&p), |qx, py| qx - py)
        })
        .collect()
}

pub fn divergence_residual(f: &HeightMap, normalization: Normalization) -> ResidualReport {
    let grads = f.accurate_gradients();
    let flux_metric = metric_from_gradients(f.domain(), &grads, Signature::Euclidean);
    let raw = divergence_components(&flux_metric, &grads);
    let metric = first_fundamental_form(f, Signature::Euclidean);
    let scale = residual_scale(&metric, &f.hessians());
    ResidualReport::build(
        "divergence",
        Signature::Euclidean,
        normalization,
        apply_scale(raw, &scale, normalization),
        None,
    )
}

/// Divergence form of the maximal system (hatted coefficients).
pub fn maximal_divergence_residual(g: &HeightMap, normalization: Normalization) -> ResidualReport {
    let grads = g.accurate_gradients();
    let flux_metric = metric_from_gradients(g.domain(), &grads, Signature::Split);
    let raw = divergence_components(&flux_metric, &grads);
    let metric = first_fundamental_form(g, Signature::Split);
    let scale = residual_scale(&metric, &g.hessians());
    let comps = apply_scale(raw, &scale, normalization);
    ResidualReport::build("maximal_divergence", Signature::Split, normalization, comps, Some(&metric.spacelike))
}

/// `|d(G/w)/dx - d(F/w)/dy|` and `|d(F/w)/dx - d(E/w)/dy|`.
pub fn closedness_identities(f: &HeightMap, signature: Signature, normalization: Normalization) -> ResidualReport {
    let metric = first_fundamental_form(f, signature);
    let (eo, fo, go) = metric.normalized();
    let first = partial_x(&go).zip_map(&partial_y(&fo), |a, b| (a - b).abs());
    let second = partial_x(&fo).zip_map(&partial_y(&eo), |a, b| (a - b).abs());
    let scale = residual_scale(&metric, &f.hessians());
    let comps = apply_scale(vec![first, second], &scale, normalization);
    let include = (signature == Signature::Split).then_some(metric.spacelike.as_slice());
    ResidualReport::build("closedness", signature, normalization, comps, include)
}
