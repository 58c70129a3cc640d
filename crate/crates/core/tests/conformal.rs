use twingraph::catalog::{make_surface, Params};
use twingraph::conformal::{build_chart, conformality, resample_to_chart, ResampleOptions};
use twingraph::fields::Signature;
use twingraph::grid::{GridDomain, NodeIndex};
use twingraph::interp::Interpolation;

fn ratio(n: usize, method: Interpolation) -> f64 {
    let d = GridDomain::from_bounds(-0.6, -0.6, 0.6, 0.6, n, n).unwrap();
    let f = make_surface("scherk", &Params::new(), &d).unwrap();
    let chart = build_chart(&f, NodeIndex::new(0, 0), None).unwrap();
    let x = resample_to_chart(&chart, &f, &ResampleOptions { method, ..Default::default() }).unwrap();
    let c = conformality(&x, Signature::Euclidean);
    c.max_abs_g12.max(c.max_abs_g11_minus_g22) / c.max_g11
}

#[test]
fn both_interpolants_give_conformal_coordinates_that_improve_with_refinement() {
    for method in [Interpolation::Cubic, Interpolation::Bilinear] {
        let (coarse, fine) = (ratio(33, method), ratio(65, method));
        assert!(fine < 0.02, "{method:?} {fine:e}");
        assert!(fine < coarse, "{method:?} {coarse:e} {fine:e}");
    }
    assert!(ratio(65, Interpolation::Cubic) <= ratio(65, Interpolation::Bilinear));
}

#[test]
fn chart_jacobian_exceeds_two() {
    let d = GridDomain::from_bounds(1.0, 1.0, 2.0, 2.0, 33, 33).unwrap();
    let f = make_surface("helicoid", &Params::new(), &d).unwrap();
    let chart = build_chart(&f, NodeIndex::new(0, 0), None).unwrap();
    assert!(chart.j_psi.values().iter().all(|&j| j > 2.0));
    for k in 0..d.len() {
        let lambda = chart.conformal_factor.values()[k];
        assert!(lambda > 0.0 && lambda.is_finite());
    }
}
