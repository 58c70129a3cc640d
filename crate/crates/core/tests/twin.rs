use twingraph::catalog::{make_surface, Params};
use twingraph::fields::{jacobian_data, HeightMap};
use twingraph::grid::{GridDomain, NodeIndex, ScalarField};
use twingraph::twin::{twin_backward, twin_forward};

const ORIGIN: NodeIndex = NodeIndex { i: 0, j: 0 };

fn catenoid(n: usize) -> HeightMap {
    let d = GridDomain::from_bounds(1.5, -0.75, 3.0, 0.75, n, n).unwrap();
    make_surface("catenoid", &Params::new(), &d).unwrap()
}

fn holomorphic(n: usize) -> HeightMap {
    let d = GridDomain::from_bounds(-0.3, -0.3, 0.3, 0.3, n, n).unwrap();
    make_surface("holomorphic", &Params::new(), &d).unwrap()
}

fn gap_up_to_constant(a: &ScalarField, b: &ScalarField) -> f64 {
    let diff = a.zip_map(b, |u, v| u - v);
    let (lo, hi) = diff.values().iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
    (hi - lo) / 2.0
}

#[test]
fn backward_undoes_forward_on_the_catenoid() {
    let err = |n: usize| {
        let f = catenoid(n);
        let g = twin_forward(&f, ORIGIN, None).unwrap().g;
        let back = twin_backward(&g, ORIGIN, None).unwrap();
        gap_up_to_constant(back.f.component(0), f.component(0))
    };
    let (e1, e2) = (err(65), err(129));
    let h = 1.5 / 128.0;
    assert!(e2 <= 10.0 * h * h, "{e2:e}");
    assert!(e1 / e2 > 3.0, "{e1:e} {e2:e}");
}

#[test]
fn omega_product_is_one_at_the_catenoid_sample_node() {
    let f = catenoid(97);
    let pair = twin_forward(&f, ORIGIN, None).unwrap();
    let k = f.domain().index(32, 48);
    let (w, wh) = (pair.metric_f.omega.values()[k], pair.metric_g.omega.values()[k]);
    assert!((w - 2.0 / 3f64.sqrt()).abs() < 1e-14);
    assert!((wh - 3f64.sqrt() / 2.0).abs() < 1e-4, "{wh}");
    assert!((w * wh - 1.0).abs() < 1e-4);
}

#[test]
fn zero_and_affine_maximal_maps_twin_back_to_planes() {
    let d = GridDomain::from_bounds(0.0, 0.0, 1.0, 1.0, 17, 17).unwrap();
    let zero = HeightMap::new(vec![ScalarField::zeros(d)]).unwrap();
    let pair = twin_backward(&zero, ORIGIN, None).unwrap();
    assert_eq!(pair.f.component(0).max_abs(), 0.0);

    let g = HeightMap::new(vec![ScalarField::from_fn(d, |x, y| 0.6 * x - 0.3 * y)]).unwrap();
    let f = twin_backward(&g, ORIGIN, None).unwrap().f;
    let h = twingraph::fields::Hessian::of(f.component(0));
    assert!(h.xx.max_abs() < 1e-10 && h.xy.max_abs() < 1e-10 && h.yy.max_abs() < 1e-10);
}

#[test]
fn holomorphic_pair_preserves_the_jacobian() {
    // the twin of z^2 is quadratic too, so the discrete Jacobians agree to round-off
    let pair = twin_forward(&holomorphic(49), ORIGIN, None).unwrap();
    assert!(pair.diagnostics.c2_residual < 1e-12, "{:e}", pair.diagnostics.c2_residual);
    let k = pair.f.domain().index(44, 24);
    let jf = pair.jac_f.pair(0, 1).unwrap().values()[k];
    let jg = jacobian_data(&pair.g).pair(0, 1).unwrap().values()[k];
    assert!((jf - 0.25).abs() < 1e-13);
    assert!((jg - 0.25).abs() < 1e-12, "{jg}");
}

#[test]
fn twin_of_a_small_jacobian_map_is_strictly_spacelike() {
    let f = holomorphic(49);
    let pair = twin_forward(&f, ORIGIN, None).unwrap();
    assert!(pair.metric_g.all_spacelike());
    let h = f.domain().h();
    for k in 0..f.domain().len() {
        let nj = pair.jac_f.norm_j.values()[k];
        let w = pair.metric_f.omega.values()[k];
        let (e, ff, g) = (pair.metric_g.e.values()[k], pair.metric_g.f.values()[k], pair.metric_g.g.values()[k]);
        let bound = (1.0 - nj * nj).powi(2) / (w * w) * (1.0 - 10.0 * h);
        assert!(e * g - ff * ff >= bound, "node {k}");
    }
}
