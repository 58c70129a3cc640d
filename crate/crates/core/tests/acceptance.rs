//! Acceptance suite. Each test prints one `PASS`/`FAIL` line; run with
//! `cargo test -p twingraph --test acceptance -- --nocapture`.

use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use twingraph::catalog::{make_surface, Params, Surface};
use twingraph::conformal::{build_chart, conformality, resample_to_chart, verify_weierstrass_twin, ResampleOptions};
use twingraph::fields::{HeightMap, Hessian, Signature};
use twingraph::gauss::{gauss_map, hyperplane_fit, jorgens_gauss, planarity_score, quadric_residual};
use twingraph::grid::{GridDomain, NodeIndex, ScalarField};
use twingraph::report::to_json;
use twingraph::slag::{graph_rotate, known_lift_error, sl_lift, RotateMode, SLParams};
use twingraph::solver::{solve_maximal, solve_minimal, SolveOptions};
use twingraph::systems::{maximal_residual, Normalization};
use twingraph::twin::twin_forward;

struct Outcome {
    pass: bool,
    summary: String,
    /// Every computed quantity; must not depend on timing or thread count.
    report: Value,
}

fn emit(id: u32, title: &str, o: &Outcome, elapsed: Duration) {
    let verdict = if o.pass { "PASS" } else { "FAIL" };
    println!("criterion {id:>2} {verdict} [{title}] {} ({:.2} s)", o.summary, elapsed.as_secs_f64());
}

fn timed(f: impl FnOnce() -> Outcome) -> (Outcome, Duration) {
    let t = Instant::now();
    let o = f();
    (o, t.elapsed())
}

fn grid(b: [f64; 4], nx: usize, ny: usize) -> GridDomain {
    GridDomain::from_bounds(b[0], b[1], b[2], b[3], nx, ny).unwrap()
}

fn sample(name: &str, b: [f64; 4], nx: usize, ny: usize) -> HeightMap {
    make_surface(name, &Params::new(), &grid(b, nx, ny)).unwrap()
}

const ORIGIN: NodeIndex = NodeIndex { i: 0, j: 0 };
const CATENOID: [f64; 4] = [1.5, -0.75, 3.0, 0.75];
const HELICOID: [f64; 4] = [1.0, 1.0, 2.0, 2.0];
const SCHERK: [f64; 4] = [-0.6, -0.6, 0.6, 0.6];
const HOLOMORPHIC: [f64; 4] = [-0.3, -0.3, 0.3, 0.3];

/// Error reduction per halving of `h` implied by two measurements.
fn halving_ratio(coarse: f64, fine: f64, h_coarse: f64, h_fine: f64) -> f64 {
    let order = (coarse / fine).ln() / (h_coarse / h_fine).ln();
    2f64.powf(order)
}

/// Below this a residual is at rounding level and has no refinement order.
const EXACT: f64 = 1e-10;

fn second_order(coarse: f64, fine: f64, h_coarse: f64, h_fine: f64) -> bool {
    fine < EXACT || (3.0..=5.0).contains(&halving_ratio(coarse, fine, h_coarse, h_fine))
}

// 1. Special Lagrangian lift against closed forms.
fn criterion_1() -> Outcome {
    let cases = [("catenoid", CATENOID, (129, 65)), ("helicoid", HELICOID, (129, 129)), ("scherk", SCHERK, (129, 129))];
    let mut pass = true;
    let mut report = Vec::new();
    let mut summary = Vec::new();
    for (name, b, (nx, ny)) in cases {
        let t = Instant::now();
        let known = Surface::new(name, &Params::new()).unwrap().known_lift().unwrap();
        let err = |nx, ny| {
            let lift = sl_lift(&sample(name, b, nx, ny), ORIGIN, None).unwrap();
            known_lift_error(&lift, &known)
        };
        let fine = err(nx, ny);
        let coarse = err(nx.div_ceil(2), ny.div_ceil(2));
        let ratio = coarse / fine;
        let secs = t.elapsed().as_secs_f64();
        let ok = fine <= 5e-3 && (3.0..=5.0).contains(&ratio) && secs <= 10.0;
        pass &= ok;
        summary.push(format!("{name}: err {fine:.2e}, ratio {ratio:.2}"));
        report.push(json!({"surface": name, "fine": fine, "coarse": coarse, "ratio": ratio}));
    }
    Outcome { pass, summary: summary.join("; "), report: json!(report) }
}

// 2. Unimodular Hessian of the lift potential at h <= 1/64.
fn criterion_2() -> Outcome {
    // (surface, bounds, fine nodes, coarse nodes); fine spacing is at most 1/64.
    let cases = [("catenoid", CATENOID, 97, 49), ("helicoid", HELICOID, 65, 33), ("scherk", SCHERK, 78, 40)];
    let mut pass = true;
    let mut report = Vec::new();
    let mut summary = Vec::new();
    for (name, b, nf, nc) in cases {
        let res = |n| sl_lift(&sample(name, b, n, n), ORIGIN, None).unwrap().hessian_det_residual;
        let (fine, coarse) = (res(nf), res(nc));
        let (hf, hc) = ((b[2] - b[0]) / (nf - 1) as f64, (b[2] - b[0]) / (nc - 1) as f64);
        let ratio = halving_ratio(coarse, fine, hc, hf);
        let ok = hf <= 1.0 / 64.0 + 1e-15 && fine <= 1e-2 && second_order(coarse, fine, hc, hf);
        pass &= ok;
        summary.push(format!("{name}: {fine:.2e}, ratio {ratio:.2}"));
        report.push(json!({"surface": name, "fine": fine, "coarse": coarse}));
    }
    Outcome { pass, summary: summary.join("; "), report: json!(report) }
}

const TWIN_CASES: [(&str, [f64; 4], (usize, usize)); 3] =
    [("catenoid", CATENOID, (129, 65)), ("scherk", SCHERK, (129, 129)), ("holomorphic", HOLOMORPHIC, (129, 129))];

// 3. Twin invariants c2-c4 and involution.
fn criterion_3() -> Outcome {
    let mut pass = true;
    let mut report = Vec::new();
    let mut summary = Vec::new();
    for (name, b, (nx, ny)) in TWIN_CASES {
        let diag = |nx, ny| twin_forward(&sample(name, b, nx, ny), ORIGIN, None).unwrap().diagnostics;
        let fine = diag(nx, ny);
        let coarse = diag(nx.div_ceil(2), ny.div_ceil(2));
        let pairs = [
            ("c2", coarse.c2_residual, fine.c2_residual),
            ("c3", coarse.c3_residual, fine.c3_residual),
            ("c4", coarse.c4_residual, fine.c4_residual),
        ];
        for (label, c, f) in pairs {
            let ok = f <= 5e-3 && second_order(c, f, 2.0, 1.0);
            pass &= ok;
            if !ok {
                summary.push(format!("{name} {label} {f:.2e} (coarse {c:.2e})"));
            }
        }
        pass &= fine.involution_residual <= 5e-3;
        summary.push(format!(
            "{name}: c3 {:.2e} c4 {:.2e} inv {:.2e}",
            fine.c3_residual, fine.c4_residual, fine.involution_residual
        ));
        report.push(json!({"surface": name, "fine": fine, "coarse": coarse}));
    }
    Outcome { pass, summary: summary.join("; "), report: json!(report) }
}

// 4. The forward twin is maximal.
fn criterion_4() -> Outcome {
    let mut pass = true;
    let mut report = Vec::new();
    let mut summary = Vec::new();
    for (name, b, (nx, ny)) in TWIN_CASES {
        let pair = twin_forward(&sample(name, b, nx, ny), ORIGIN, None).unwrap();
        let r = maximal_residual(&pair.g, Normalization::Scaled);
        pass &= r.max_abs <= 5e-3 && r.excluded_count == 0;
        summary.push(format!("{name}: {:.2e}", r.max_abs));
        report.push(json!({"surface": name, "max_abs": r.max_abs, "l2": r.l2}));
    }
    Outcome { pass, summary: summary.join("; "), report: json!(report) }
}

fn random_height_map(rng: &mut ChaCha8Rng) -> HeightMap {
    let d = grid([-1.0, -1.0, 1.0, 1.0], 33, 33);
    let n = rng.gen_range(1..=3);
    let comps = (0..n)
        .map(|_| {
            let c: [f64; 8] = std::array::from_fn(|_| rng.gen_range(-1.5..1.5));
            ScalarField::from_fn(d, move |x, y| {
                c[0] * (c[1] * x + c[2] * y + c[3]).sin() + c[4] * x * x + c[5] * x * y + c[6] * y * y * y + c[7] * x
            })
        })
        .collect();
    HeightMap::new(comps).unwrap()
}

// 5. Gauss map lands in the hyperquadric.
fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let residuals: Vec<f64> = (0..10).map(|_| quadric_residual(&gauss_map(&random_height_map(&mut rng)))).collect();
    let worst = residuals.iter().copied().fold(0.0, f64::max);
    Outcome {
        pass: worst <= 1e-10,
        summary: format!("max residual {worst:.2e} over 10 maps"),
        report: json!(residuals),
    }
}

// 6. Gauss map of unimodular quadratics lies on two hyperplanes.
fn criterion_6() -> Outcome {
    let d = grid([-1.0, -1.0, 1.0, 1.0], 17, 17);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut quads = vec![(1.0, 0.0, 1.0)];
    for sign in [1.0, 1.0, -1.0] {
        let a: f64 = rng.gen_range(0.3..3.0);
        let b: f64 = rng.gen_range(-2.0..2.0);
        quads.push((sign * a, sign * b, sign * (1.0 + b * b) / a));
    }
    let mut pass = true;
    let mut report = Vec::new();
    let mut worst = (0.0f64, 0.0f64);
    for (a, b, c) in quads {
        let f = ScalarField::from_fn(d, |x, y| (a * x * x + 2.0 * b * x * y + c * y * y) / 2.0);
        let eps = if a + c > 0.0 { 1.0 } else { -1.0 };
        let g = jorgens_gauss(&f, 1e-8).unwrap();
        let planar = planarity_score(&g);
        let target = Complex64::new(0.0, eps);
        let l23 = hyperplane_fit(&g, 2, 3).unwrap().lambda();
        let l41 = hyperplane_fit(&g, 4, 1).unwrap().lambda();
        let gap = (l23 - target).norm().max((l41 - target).norm());
        pass &= planar <= 1e-12 && gap <= 1e-10;
        worst = (worst.0.max(planar), worst.1.max(gap));
        report.push(json!({"coefficients": [a, b, c], "planarity": planar, "lambda23": [l23.re, l23.im], "lambda41": [l41.re, l41.im]}));
    }
    Outcome {
        pass,
        summary: format!("planarity {:.2e}, |lambda - i eps| {:.2e}", worst.0, worst.1),
        report: json!(report),
    }
}

// 7. Isothermal chart.
fn criterion_7() -> Outcome {
    let flat = grid([0.0, 0.0, 1.0, 1.0], 65, 65);
    let chart = build_chart(&HeightMap::zeros(flat, 1).unwrap(), ORIGIN, None).unwrap();
    let flat_ok = (0..flat.len()).all(|k| {
        let node = flat.node(k);
        chart.j_psi.values()[k] == 4.0
            && chart.xi1.values()[k] == 2.0 * flat.x(node.i)
            && chart.xi2.values()[k] == 2.0 * flat.y(node.j)
    });
    let f = sample("catenoid", CATENOID, 129, 65);
    let chart = build_chart(&f, ORIGIN, None).unwrap();
    let jmin = chart.j_psi.values().iter().copied().fold(f64::INFINITY, f64::min);
    let x = resample_to_chart(&chart, &f, &ResampleOptions::default()).unwrap();
    let c = conformality(&x, Signature::Euclidean);
    let (r12, rdiag) = (c.max_abs_g12 / c.max_g11, c.max_abs_g11_minus_g22 / c.max_g11);
    let pass = flat_ok && jmin > 2.0 && r12 <= 0.02 && rdiag <= 0.02;
    Outcome {
        pass,
        summary: format!("flat exact {flat_ok}, min J_psi {jmin:.4}, |g12|/g11 {r12:.2e}, |g11-g22|/g11 {rdiag:.2e}"),
        report: json!({"flat_exact": flat_ok, "min_j_psi": jmin, "conformality": c}),
    }
}

// 8. Null-curve twin relation on the catenoid pair.
fn criterion_8() -> Outcome {
    let res = |nx, ny| {
        let pair = twin_forward(&sample("catenoid", CATENOID, nx, ny), ORIGIN, None).unwrap();
        let chart = build_chart(&pair.f, ORIGIN, None).unwrap();
        verify_weierstrass_twin(&pair, &chart, &ResampleOptions::default()).unwrap()
    };
    let (fine, coarse) = (res(129, 65), res(65, 33));
    let order = (coarse.max_residual / fine.max_residual).log2();
    let pass = fine.max_residual <= 0.02 && order >= 1.0;
    Outcome {
        pass,
        summary: format!("residual {:.2e} at 129x65, observed order {order:.2}", fine.max_residual),
        report: json!({"fine": fine, "coarse": coarse}),
    }
}

// 9. Graph rotation algebra on exact quadratic solutions.
fn criterion_9() -> Outcome {
    let t = Instant::now();
    let d = grid([-1.0, -1.0, 1.0, 1.0], 9, 9);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = 0.0f64;
    let mut count = 0;
    let mut dets = Vec::new();
    let cases =
        [(RotateMode::Standard, 1i8), (RotateMode::Standard, -1), (RotateMode::Reverse, 1), (RotateMode::Reverse, -1)];
    while count < 100 {
        let (mode, eps) = cases[count % 4];
        let p = SLParams::from_angle(rng.gen_range(-1.2..1.2), eps, mode).unwrap();
        let (l1, l2, e) = (p.lambda1, p.lambda2, eps as f64);
        let (a, c): (f64, f64) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        // F = (a x^2 + b y^2)/2 + c x y, with b solving the constrained equation.
        let (den, num) = match mode {
            RotateMode::Standard => (l1 - e * l2 * a, -(l1 * a + l2 + e * l2 * c * c)),
            RotateMode::Reverse => (l1 + l2 * a, -(e * l1 * a + l2 - l2 * c * c)),
        };
        if den.abs() < 0.2 || (num / den).abs() > 10.0 {
            continue;
        }
        let b = num / den;
        let f = ScalarField::from_fn(d, |x, y| (a * x * x + b * y * y) / 2.0 + c * x * y);
        let h = graph_rotate(&f, &p, mode).unwrap();
        let target = if mode == RotateMode::Standard { 1.0 } else { -1.0 };
        let det = Hessian::of(&h).determinant();
        let err = d.interior_indices().map(|k| (det.values()[k] - target).abs()).fold(0.0, f64::max);
        worst = worst.max(err);
        dets.push(err);
        count += 1;
    }
    let secs = t.elapsed().as_secs_f64();
    Outcome {
        pass: worst <= 1e-12 && secs <= 1.0,
        summary: format!("max |det - (+-1)| {worst:.2e} over 100 quadratics"),
        report: json!(dets),
    }
}

// 10. Dirichlet solvers on Scherk and its twin.
fn criterion_10() -> Outcome {
    let d = grid(SCHERK, 129, 129);
    let exact = make_surface("scherk", &Params::new(), &d).unwrap();
    let opts = SolveOptions::default();
    let interior_err = |a: &ScalarField, b: &ScalarField| {
        d.interior_indices().map(|k| (a.values()[k] - b.values()[k]).abs()).fold(0.0, f64::max)
    };
    let t = Instant::now();
    let sol = solve_minimal(&exact, &opts).unwrap();
    let (min_err, min_secs) = (interior_err(sol.field.component(0), exact.component(0)), t.elapsed().as_secs_f64());
    let twin = twin_forward(&exact, ORIGIN, None).unwrap();
    let t = Instant::now();
    let sol_hat = solve_maximal(&twin.g, &opts).unwrap();
    let (max_err, max_secs) =
        (interior_err(sol_hat.field.component(0), twin.g.component(0)), t.elapsed().as_secs_f64());
    Outcome {
        pass: min_err <= 1e-3 && max_err <= 2e-3 && min_secs <= 60.0 && max_secs <= 60.0,
        summary: format!("minimal err {min_err:.2e} ({min_secs:.2} s), maximal err {max_err:.2e} ({max_secs:.2} s)"),
        report: json!({
            "minimal_error": min_err,
            "maximal_error": max_err,
            "minimal_history": sol.history,
            "maximal_history": sol_hat.history,
        }),
    }
}

type Criterion = (u32, &'static str, fn() -> Outcome);

const CRITERIA: [Criterion; 10] = [
    (1, "special Lagrangian lift closed forms", criterion_1),
    (2, "unimodular Hessian of the lift", criterion_2),
    (3, "twin invariants", criterion_3),
    (4, "maximality of twins", criterion_4),
    (5, "Gauss map quadric identity", criterion_5),
    (6, "Jorgens Gauss map hyperplanes", criterion_6),
    (7, "conformal chart", criterion_7),
    (8, "null-curve twin relation", criterion_8),
    (9, "graph rotation algebra", criterion_9),
    (10, "Dirichlet solvers", criterion_10),
];

fn check(id: u32) {
    let (_, title, f) = CRITERIA[id as usize - 1];
    let (o, elapsed) = timed(f);
    emit(id, title, &o, elapsed);
    assert!(o.pass, "criterion {id} failed: {}", o.summary);
}

#[test]
fn criterion_01_sl_lift_closed_forms() {
    check(1);
}

#[test]
fn criterion_02_lift_unimodular_hessian() {
    check(2);
}

#[test]
fn criterion_03_twin_invariants() {
    check(3);
}

#[test]
fn criterion_04_twin_maximality() {
    check(4);
}

#[test]
fn criterion_05_gauss_quadric() {
    check(5);
}

#[test]
fn criterion_06_jorgens_hyperplanes() {
    check(6);
}

#[test]
fn criterion_07_conformal_chart() {
    check(7);
}

#[test]
fn criterion_08_null_curve_twin_relation() {
    check(8);
}

#[test]
fn criterion_09_graph_rotation() {
    check(9);
}

#[test]
fn criterion_10_dirichlet_solvers() {
    check(10);
}

#[test]
fn criterion_11_thread_count_determinism() {
    let t = Instant::now();
    let run = |threads: usize| -> Vec<String> {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| CRITERIA.iter().map(|(_, _, f)| to_json(&f().report)).collect())
    };
    let base = run(1);
    let mut mismatched = Vec::new();
    for threads in [2, 8] {
        for (k, r) in run(threads).iter().enumerate() {
            if *r != base[k] {
                mismatched.push(format!("criterion {} at {threads} threads", k + 1));
            }
        }
    }
    let o = Outcome {
        pass: mismatched.is_empty(),
        summary: if mismatched.is_empty() {
            "reports of criteria 1-10 identical at 1, 2 and 8 threads".into()
        } else {
            format!("differences: {}", mismatched.join(", "))
        },
        report: Value::Null,
    };
    emit(11, "determinism across thread counts", &o, t.elapsed());
    assert!(o.pass, "{}", o.summary);
}
