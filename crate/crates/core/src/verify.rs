//! Aggregate invariant report for one catalog surface.

use serde::Serialize;

use crate::catalog::{self_test, Params, Surface};
use crate::conformal::{build_chart, conformality, resample_to_chart, verify_weierstrass_twin, ResampleOptions};
use crate::error::{Error, Result};
use crate::fields::{Hessian, Signature};
use crate::gauss::{gauss_map, quadric_residual};
use crate::grid::{GridDomain, NodeIndex};
use crate::report::{to_json, Check, GridInfo};
use crate::slag::{known_lift_error, sl_lift};
use crate::systems::{maximal_residual, minimal_residual, Normalization};
use crate::twin::twin_forward;

pub const SELF_TEST_TOL: f64 = 1e-2;
pub const SYSTEM_TOL: f64 = 5e-3;
pub const LIFT_TOL: f64 = 5e-3;
pub const UNIMODULAR_TOL: f64 = 1e-2;
pub const QUADRIC_TOL: f64 = 1e-10;
pub const CONFORMAL_TOL: f64 = 0.02;

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub surface: String,
    pub grid: GridInfo,
    pub checks: Vec<Check>,
    pub pass: bool,
}

impl VerifyReport {
    pub fn to_json(&self) -> String {
        to_json(self)
    }

    pub fn failed(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

fn flag(name: &str, ok: bool) -> Check {
    Check::at_least(name, if ok { 1.0 } else { 0.0 }, 1.0)
}

/// Runs every applicable module invariant on the named surface sampled on
/// `domain`. Validation errors (unknown name, bad parameters, inadmissible
/// domain) are returned; failures of individual constructions become
/// failing checks.
pub fn verify_all(name: &str, params: &Params, domain: &GridDomain) -> Result<VerifyReport> {
    let surface = Surface::new(name, params)?;
    surface.check_domain(domain)?;
    let f = surface.sample(domain)?;
    let base = NodeIndex::new(0, 0);
    let mut checks = Vec::new();

    let st = self_test(&surface, domain)?;
    checks.push(Check::at_most("catalog_gradient_self_test", st.gradient_error, SELF_TEST_TOL));

    if surface.name() == "chamberland_reverse" {
        // A reverse unimodular Hessian potential, not a minimal graph.
        let det = Hessian::of(f.component(0)).determinant();
        let res = domain.interior_indices().map(|k| (det.values()[k] + 1.0).abs()).fold(0.0, f64::max);
        checks.push(Check::at_most("reverse_unimodular_residual", res, UNIMODULAR_TOL));
        return Ok(finish(surface.name(), domain, checks));
    }

    checks.push(Check::at_most(
        "minimal_residual_scaled",
        minimal_residual(&f, Normalization::Scaled).max_abs,
        SYSTEM_TOL,
    ));
    checks.push(Check::at_most("gauss_quadric_residual", quadric_residual(&gauss_map(&f)), QUADRIC_TOL));

    let opts = ResampleOptions::default();
    let chart = build_chart(&f, base, None);
    match &chart {
        Ok(chart) => {
            checks.push(flag("chart_build", true));
            let jmin = chart.j_psi.values().iter().copied().fold(f64::INFINITY, f64::min);
            checks.push(Check::at_least("chart_min_j_psi_minus_2", jmin - 2.0, 0.0));
            match resample_to_chart(chart, &f, &opts) {
                Ok(x) => {
                    let c = conformality(&x, Signature::Euclidean);
                    checks.push(Check::at_most("chart_g12_ratio", c.max_abs_g12 / c.max_g11, CONFORMAL_TOL));
                    checks.push(Check::at_most(
                        "chart_g11_g22_ratio",
                        c.max_abs_g11_minus_g22 / c.max_g11,
                        CONFORMAL_TOL,
                    ));
                }
                Err(_) => checks.push(flag("chart_resample", false)),
            }
        }
        Err(_) => checks.push(flag("chart_build", false)),
    }

    // The twin only exists where the area-angle is positive; graphs with
    // |J| = 1 somewhere (Lagrangian gradient graphs) skip these checks.
    match twin_forward(&f, base, None) {
        Ok(pair) => {
            checks.push(flag("twin_forward", true));
            let dg = pair.diagnostics;
            checks.push(Check::at_most("twin_c2_residual", dg.c2_residual, SYSTEM_TOL));
            checks.push(Check::at_most("twin_c3_residual", dg.c3_residual, SYSTEM_TOL));
            checks.push(Check::at_most("twin_c4_residual", dg.c4_residual, SYSTEM_TOL));
            checks.push(Check::at_most("twin_involution_residual", dg.involution_residual, SYSTEM_TOL));
            checks.push(Check::at_most(
                "twin_maximal_residual_scaled",
                maximal_residual(&pair.g, Normalization::Scaled).max_abs,
                SYSTEM_TOL,
            ));
            if let Ok(chart) = &chart {
                match verify_weierstrass_twin(&pair, chart, &opts) {
                    Ok(w) => checks.push(Check::at_most("weierstrass_twin_residual", w.max_residual, CONFORMAL_TOL)),
                    Err(_) => checks.push(flag("weierstrass_twin", false)),
                }
            }
        }
        Err(Error::AreaAngleViolation { .. }) => {}
        Err(_) => checks.push(flag("twin_forward", false)),
    }

    if f.n() == 1 {
        match sl_lift(&f, base, None) {
            Ok(lift) => {
                checks.push(Check::at_most("sl_lift_unimodular_residual", lift.hessian_det_residual, UNIMODULAR_TOL));
                if let Some(known) = surface.known_lift() {
                    checks.push(Check::at_most("sl_lift_closed_form_error", known_lift_error(&lift, &known), LIFT_TOL));
                }
            }
            Err(_) => checks.push(flag("sl_lift", false)),
        }
    }
    Ok(finish(surface.name(), domain, checks))
}

fn finish(name: &str, domain: &GridDomain, checks: Vec<Check>) -> VerifyReport {
    let pass = checks.iter().all(|c| c.pass);
    VerifyReport { surface: name.to_string(), grid: GridInfo::from(domain), checks, pass }
}
