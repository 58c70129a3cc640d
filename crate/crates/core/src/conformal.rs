//! Isothermal chart `(x, y) -> (x + M, y + N)`, resampling onto a uniform
//! grid in the new coordinates, holomorphic null curves, and the twin
//! relation between the null curves of a minimal graph and its twin.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{truncate_nodes, Error, Result};
use crate::fields::{first_fundamental_form, partial_x, partial_y, HeightMap, Signature};
use crate::grid::{GridDomain, NodeIndex, ScalarField};
use crate::interp::{sample_with_gradient, Interpolation};
use crate::report::{to_json, GridInfo};
use crate::slag::lift_potentials;
use crate::twin::TwinPair;

#[derive(Clone, Debug)]
pub struct ConformalChart {
    pub m: ScalarField,
    pub n: ScalarField,
    pub xi1: ScalarField,
    pub xi2: ScalarField,
    /// `2 + (E + G)/omega`.
    pub j_psi: ScalarField,
    /// `omega / J_psi`.
    pub conformal_factor: ScalarField,
    pub basepoint: NodeIndex,
}

impl ConformalChart {
    pub fn domain(&self) -> &GridDomain {
        self.m.domain()
    }

    pub fn fields(&self) -> Vec<ScalarField> {
        vec![
            self.m.clone(),
            self.n.clone(),
            self.xi1.clone(),
            self.xi2.clone(),
            self.j_psi.clone(),
            self.conformal_factor.clone(),
        ]
    }

    /// `Psi(x, y)` and its Jacobian matrix, from the interpolated potentials.
    fn psi(&self, x: f64, y: f64, method: Interpolation) -> ([f64; 2], [[f64; 2]; 2]) {
        let (m, mx, my) = sample_with_gradient(&self.m, x, y, method);
        let (n, nx, ny) = sample_with_gradient(&self.n, x, y, method);
        ([x + m, y + n], [[1.0 + mx, my], [nx, 1.0 + ny]])
    }
}

/// Slack on the strict bound `J_psi > 2`.
const J_PSI_SLACK: f64 = 1e-9;

pub fn build_chart(f: &HeightMap, basepoint: NodeIndex, tol: Option<f64>) -> Result<ConformalChart> {
    let d = *f.domain();
    let tol = tol.unwrap_or_else(|| crate::twin::default_tol(&d));
    let (m, n) = lift_potentials(f, basepoint, tol)?;
    let metric = first_fundamental_form(f, Signature::Euclidean);
    let j_psi: Vec<f64> =
        (0..d.len()).map(|k| 2.0 + (metric.e.values()[k] + metric.g.values()[k]) / metric.omega.values()[k]).collect();
    // written negated so NaN counts as a violation
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    let bad: Vec<NodeIndex> = (0..d.len()).filter(|&k| !(j_psi[k] > 2.0 - J_PSI_SLACK)).map(|k| d.node(k)).collect();
    if !bad.is_empty() {
        return Err(Error::JacobianBoundViolation { nodes: truncate_nodes(bad) });
    }
    let factor = (0..d.len()).map(|k| metric.omega.values()[k] / j_psi[k]).collect();
    let xi1 = ScalarField::from_fn(d, |x, _| x).zip_map(&m, |x, v| x + v);
    let xi2 = ScalarField::from_fn(d, |_, y| y).zip_map(&n, |y, v| y + v);
    Ok(ConformalChart {
        m,
        n,
        xi1,
        xi2,
        j_psi: ScalarField::from_vec_unchecked(d, j_psi),
        conformal_factor: ScalarField::from_vec_unchecked(d, factor),
        basepoint,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResampleOptions {
    /// Target node counts; default to the source grid's.
    pub nx: Option<usize>,
    pub ny: Option<usize>,
    /// Explicit target rectangle `(xi1_0, xi2_0, xi1_1, xi2_1)`; chosen
    /// automatically when absent.
    pub rect: Option<[f64; 4]>,
    pub method: Interpolation,
}

impl Default for ResampleOptions {
    fn default() -> Self {
        ResampleOptions { nx: None, ny: None, rect: None, method: Interpolation::Cubic }
    }
}

const NEWTON_MAX_ITER: usize = 50;
const NEWTON_TOL: f64 = 1e-12;
const MIN_DAMPING: f64 = 1.0 / 1024.0;

/// Axis-aligned rectangle bounded by the images of the four edges of the
/// source interior shrunk by two nodes.
fn inscribed_rect(chart: &ConformalChart) -> [f64; 4] {
    let d = *chart.domain();
    let (i0, i1, j0, j1) = (2, d.nx - 3, 2, d.ny - 3);
    let (a, b) = (chart.xi1.values(), chart.xi2.values());
    let left = (j0..=j1).map(|j| a[d.index(i0, j)]).fold(f64::NEG_INFINITY, f64::max);
    let right = (j0..=j1).map(|j| a[d.index(i1, j)]).fold(f64::INFINITY, f64::min);
    let bottom = (i0..=i1).map(|i| b[d.index(i, j0)]).fold(f64::NEG_INFINITY, f64::max);
    let top = (i0..=i1).map(|i| b[d.index(i, j1)]).fold(f64::INFINITY, f64::min);
    [left, bottom, right, top]
}

/// Target grid on `rect` with a margin of two target cells on every side.
fn target_grid(rect: [f64; 4], nx: usize, ny: usize) -> Result<GridDomain> {
    let [a, b, c, e] = rect;
    if !(c > a && e > b) {
        return Err(Error::InvalidDomain(format!("empty target rectangle {rect:?}")));
    }
    let hx = (c - a) / (nx + 3) as f64;
    let hy = (e - b) / (ny + 3) as f64;
    GridDomain::new(a + 2.0 * hx, b + 2.0 * hy, hx, hy, nx, ny)
}

/// Nearest forward-image node lookup on a uniform bin grid.
struct Bins {
    x0: f64,
    y0: f64,
    w: f64,
    h: f64,
    bx: usize,
    by: usize,
    cells: Vec<Vec<usize>>,
}

impl Bins {
    fn new(px: &[f64], py: &[f64], bx: usize, by: usize) -> Bins {
        let fold = |v: &[f64]| v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
        let ((x0, x1), (y0, y1)) = (fold(px), fold(py));
        let w = ((x1 - x0) / bx as f64).max(f64::MIN_POSITIVE);
        let h = ((y1 - y0) / by as f64).max(f64::MIN_POSITIVE);
        let mut bins = Bins { x0, y0, w, h, bx, by, cells: vec![Vec::new(); bx * by] };
        for k in 0..px.len() {
            let (ci, cj) = bins.cell(px[k], py[k]);
            bins.cells[cj * bx + ci].push(k);
        }
        bins
    }

    fn cell(&self, x: f64, y: f64) -> (usize, usize) {
        let ci = ((x - self.x0) / self.w).floor().clamp(0.0, (self.bx - 1) as f64) as usize;
        let cj = ((y - self.y0) / self.h).floor().clamp(0.0, (self.by - 1) as f64) as usize;
        (ci, cj)
    }

    fn nearest(&self, px: &[f64], py: &[f64], x: f64, y: f64) -> usize {
        let (ci, cj) = self.cell(x, y);
        let mut best = (f64::INFINITY, usize::MAX);
        let step = self.w.min(self.h);
        for r in 0..self.bx.max(self.by) {
            let (r_i, r_j) = (r as isize, r as isize);
            for dj in -r_j..=r_j {
                for di in -r_i..=r_i {
                    if di.abs().max(dj.abs()) != r as isize {
                        continue;
                    }
                    let (i, j) = (ci as isize + di, cj as isize + dj);
                    if i < 0 || j < 0 || i >= self.bx as isize || j >= self.by as isize {
                        continue;
                    }
                    for &k in &self.cells[j as usize * self.bx + i as usize] {
                        let dist = (px[k] - x).hypot(py[k] - y);
                        if dist < best.0 || (dist == best.0 && k < best.1) {
                            best = (dist, k);
                        }
                    }
                }
            }
            if best.1 != usize::MAX && best.0 <= r as f64 * step {
                break;
            }
        }
        best.1
    }
}

enum NewtonFailure {
    Outside,
    Diverged,
}

fn invert(
    chart: &ConformalChart,
    target: [f64; 2],
    seed: [f64; 2],
    method: Interpolation,
) -> std::result::Result<[f64; 2], NewtonFailure> {
    let d = chart.domain();
    let inside = |p: [f64; 2]| p[0] >= d.x0 && p[0] <= d.x1() && p[1] >= d.y0 && p[1] <= d.y1();
    let tol = NEWTON_TOL * 1f64.max(target[0].hypot(target[1]));
    let mut p = seed;
    let (mut val, mut jac) = chart.psi(p[0], p[1], method);
    let mut res = [val[0] - target[0], val[1] - target[1]];
    for _ in 0..NEWTON_MAX_ITER {
        let norm = res[0].hypot(res[1]);
        if norm <= tol {
            return Ok(p);
        }
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        let step =
            [-(jac[1][1] * res[0] - jac[0][1] * res[1]) / det, -(-jac[1][0] * res[0] + jac[0][0] * res[1]) / det];
        let mut t = 1.0;
        let mut left = false;
        loop {
            let q = [p[0] + t * step[0], p[1] + t * step[1]];
            if inside(q) {
                let (v, j) = chart.psi(q[0], q[1], method);
                let r = [v[0] - target[0], v[1] - target[1]];
                if r[0].hypot(r[1]) < norm {
                    p = q;
                    val = v;
                    jac = j;
                    res = r;
                    break;
                }
            } else {
                left = true;
            }
            t *= 0.5;
            if t < MIN_DAMPING {
                return Err(if left { NewtonFailure::Outside } else { NewtonFailure::Diverged });
            }
        }
        let _ = val;
    }
    if res[0].hypot(res[1]) <= tol {
        Ok(p)
    } else {
        Err(NewtonFailure::Diverged)
    }
}

/// Resamples `h` onto a uniform grid in the chart coordinates. The result has
/// components `[x(xi), y(xi), h_1(xi), ...]`.
pub fn resample_to_chart(chart: &ConformalChart, h: &HeightMap, opts: &ResampleOptions) -> Result<HeightMap> {
    let src = *chart.domain();
    crate::grid::ensure_same_domain(&src, h.domain(), "resample_to_chart")?;
    let rect = opts.rect.unwrap_or_else(|| inscribed_rect(chart));
    let target = target_grid(rect, opts.nx.unwrap_or(src.nx), opts.ny.unwrap_or(src.ny))?;
    let (px, py) = (chart.xi1.values(), chart.xi2.values());
    let bins = Bins::new(px, py, src.nx, src.ny);

    let solved: Vec<std::result::Result<[f64; 2], NewtonFailure>> = (0..target.len())
        .into_par_iter()
        .map(|k| {
            let node = target.node(k);
            let xi = [target.x(node.i), target.y(node.j)];
            let s = bins.nearest(px, py, xi[0], xi[1]);
            let seed_node = src.node(s);
            invert(chart, xi, [src.x(seed_node.i), src.y(seed_node.j)], opts.method)
        })
        .collect();

    let (mut outside, mut diverged) = (Vec::new(), Vec::new());
    for (k, r) in solved.iter().enumerate() {
        match r {
            Err(NewtonFailure::Outside) => outside.push(target.node(k)),
            Err(NewtonFailure::Diverged) => diverged.push(target.node(k)),
            Ok(_) => {}
        }
    }
    if !outside.is_empty() {
        return Err(Error::TargetOutsideImage { nodes: truncate_nodes(outside) });
    }
    if !diverged.is_empty() {
        return Err(Error::NewtonDiverged { nodes: truncate_nodes(diverged) });
    }
    let pre: Vec<[f64; 2]> = solved.into_iter().map(|r| r.unwrap_or([0.0, 0.0])).collect();
    let mut comps = vec![
        ScalarField::new(target, pre.iter().map(|p| p[0]).collect())?,
        ScalarField::new(target, pre.iter().map(|p| p[1]).collect())?,
    ];
    for c in h.components() {
        let v = pre.iter().map(|p| sample_with_gradient(c, p[0], p[1], opts.method).0).collect();
        comps.push(ScalarField::new(target, v)?);
    }
    HeightMap::new(comps)
}

/// Discrete pullback metric `(g11, g12, g22)` of an immersion sampled on a grid.
pub fn pullback_metric(x: &HeightMap, signature: Signature) -> [ScalarField; 3] {
    let d = *x.domain();
    let (mut g11, mut g12, mut g22) = (vec![0.0; d.len()], vec![0.0; d.len()], vec![0.0; d.len()]);
    for (c, comp) in x.components().iter().enumerate() {
        let s = if signature == Signature::Split && c >= 2 { -1.0 } else { 1.0 };
        let (a, b) = (partial_x(comp), partial_y(comp));
        for k in 0..d.len() {
            let (u, v) = (a.values()[k], b.values()[k]);
            g11[k] += s * u * u;
            g12[k] += s * u * v;
            g22[k] += s * v * v;
        }
    }
    [g11, g12, g22].map(|v| ScalarField::from_vec_unchecked(d, v))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Conformality {
    pub max_g11: f64,
    pub max_abs_g12: f64,
    pub max_abs_g11_minus_g22: f64,
}

/// Interior maxima of the pullback metric's departure from conformality.
pub fn conformality(x: &HeightMap, signature: Signature) -> Conformality {
    let d = *x.domain();
    let [g11, g12, g22] = pullback_metric(x, signature);
    let mut out = Conformality { max_g11: 0.0, max_abs_g12: 0.0, max_abs_g11_minus_g22: 0.0 };
    for k in d.interior_indices() {
        out.max_g11 = out.max_g11.max(g11.values()[k]);
        out.max_abs_g12 = out.max_abs_g12.max(g12.values()[k].abs());
        out.max_abs_g11_minus_g22 = out.max_abs_g11_minus_g22.max((g11.values()[k] - g22.values()[k]).abs());
    }
    out
}

#[derive(Clone, Debug)]
pub struct NullCurveField {
    pub domain: GridDomain,
    pub signature: Signature,
    /// `phi[c][k]`: component `c` at node `k`.
    pub phi: Vec<Vec<Complex64>>,
    /// Max interior `|d phi / d conj(xi)|`.
    pub holomorphy_residual: f64,
    pub nullity_residual: f64,
}

impl NullCurveField {
    /// Interleaved Re/Im fields.
    pub fn to_fields(&self) -> Vec<ScalarField> {
        self.phi
            .iter()
            .flat_map(|c| {
                [
                    ScalarField::from_vec_unchecked(self.domain, c.iter().map(|z| z.re).collect()),
                    ScalarField::from_vec_unchecked(self.domain, c.iter().map(|z| z.im).collect()),
                ]
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct J {
            signature: Signature,
            components: usize,
            grid: GridInfo,
            holomorphy_residual: f64,
            nullity_residual: f64,
        }
        to_json(&J {
            signature: self.signature,
            components: self.phi.len(),
            grid: GridInfo::from(&self.domain),
            holomorphy_residual: self.holomorphy_residual,
            nullity_residual: self.nullity_residual,
        })
    }
}

/// `phi_k = dX_k/dxi1 - i dX_k/dxi2` for an immersion sampled on a chart grid.
pub fn null_curve(x: &HeightMap, signature: Signature) -> NullCurveField {
    let d = *x.domain();
    let mut phi = Vec::with_capacity(x.n());
    let mut holo = 0.0f64;
    for comp in x.components() {
        let (a, b) = (partial_x(comp), partial_y(comp));
        let re = a.clone();
        let im = b.map(|v| -v);
        // d/d(conj xi) = (d1 + i d2)/2 applied to re + i im
        let (re1, re2, im1, im2) = (partial_x(&re), partial_y(&re), partial_x(&im), partial_y(&im));
        for k in d.interior_indices() {
            let z = Complex64::new(re1.values()[k] - im2.values()[k], im1.values()[k] + re2.values()[k]) * 0.5;
            holo = holo.max(z.norm());
        }
        phi.push((0..d.len()).map(|k| Complex64::new(a.values()[k], -b.values()[k])).collect::<Vec<_>>());
    }
    let nullity = d
        .interior_indices()
        .map(|k| {
            phi.iter()
                .enumerate()
                .map(|(c, p)| {
                    let s = if signature == Signature::Split && c >= 2 { -1.0 } else { 1.0 };
                    p[k] * p[k] * s
                })
                .sum::<Complex64>()
                .norm()
        })
        .fold(0.0, f64::max);
    NullCurveField { domain: d, signature, phi, holomorphy_residual: holo, nullity_residual: nullity }
}

#[derive(Clone, Debug, Serialize)]
pub struct Relation {
    pub name: String,
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct WeierstrassReport {
    pub grid: GridInfo,
    pub relations: Vec<Relation>,
    pub max_residual: f64,
    pub minimal_nullity: f64,
    pub maximal_nullity: f64,
    pub minimal_holomorphy: f64,
    pub maximal_holomorphy: f64,
}

impl WeierstrassReport {
    pub fn to_json(&self) -> String {
        to_json(self)
    }
}

/// Checks `phi_1 = phi_hat_1`, `phi_2 = phi_hat_2` and
/// `phi_hat_{k+2} = -i phi_{k+2}` on one shared chart grid.
pub fn verify_weierstrass_twin(
    pair: &TwinPair,
    chart: &ConformalChart,
    opts: &ResampleOptions,
) -> Result<WeierstrassReport> {
    let n = pair.f.n();
    let mut both = pair.f.components().to_vec();
    both.extend(pair.g.components().iter().cloned());
    let x = resample_to_chart(chart, &HeightMap::new(both)?, opts)?;
    let comps = x.components();
    let mut minimal = vec![comps[0].clone(), comps[1].clone()];
    minimal.extend(comps[2..2 + n].iter().cloned());
    let mut maximal = vec![comps[0].clone(), comps[1].clone()];
    maximal.extend(comps[2 + n..].iter().cloned());
    let phi = null_curve(&HeightMap::new(minimal)?, Signature::Euclidean);
    let phi_hat = null_curve(&HeightMap::new(maximal)?, Signature::Split);

    let d = phi.domain;
    let gap = |c: usize, rot: Complex64| {
        d.interior_indices().map(|k| (phi_hat.phi[c][k] - rot * phi.phi[c][k]).norm()).fold(0.0, f64::max)
    };
    let one = Complex64::new(1.0, 0.0);
    let mut relations = vec![
        Relation { name: "phi_hat_1 = phi_1".into(), residual: gap(0, one) },
        Relation { name: "phi_hat_2 = phi_2".into(), residual: gap(1, one) },
    ];
    for k in 0..n {
        relations.push(Relation {
            name: format!("phi_hat_{0} = -i phi_{0}", k + 3),
            residual: gap(k + 2, Complex64::new(0.0, -1.0)),
        });
    }
    let max_residual = relations.iter().map(|r| r.residual).fold(0.0, f64::max);
    Ok(WeierstrassReport {
        grid: GridInfo::from(&d),
        relations,
        max_residual,
        minimal_nullity: phi.nullity_residual,
        maximal_nullity: phi_hat.nullity_residual,
        minimal_holomorphy: phi.holomorphy_residual,
        maximal_holomorphy: phi_hat.holomorphy_residual,
    })
}
