//! Property tests for the algebraic and analytic invariants.

use std::f64::consts::PI;
use std::sync::Arc;

use bvloc::bv::{
    bv_laplacian_with, contract_volume, de_rham_d, equivariant_d_unchecked, equivariant_delta,
    equivariant_delta_unchecked, lie_form, lie_multivector, schouten, wedge_fields, EquivariantElement,
};
use bvloc::catalog::{self, CatalogParams};
use bvloc::exterior::{pfaffian, Blades, Variance};
use bvloc::field::{ChartPoint, JetField, Shape};
use bvloc::jet::Jet;
use bvloc::quadrature::{decimal, integrate_field, pairwise_sum, QuadratureGrid};
use nalgebra::DMatrix;
use proptest::prelude::*;
use proptest::test_runner::Config;

fn sign(k: usize) -> f64 {
    if k % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn homogeneous(n: usize, k: usize, variance: Variance, raw: &[f64]) -> Blades<f64> {
    let mut b = Blades::zeros(n, variance, &0.0);
    for m in 0..1usize << n {
        if m.count_ones() as usize == k {
            b.c[m] = raw[m];
        }
    }
    b
}

fn unit(n: usize, variance: Variance) -> Blades<f64> {
    Blades::scalar(n, variance, 1.0)
}

// --- polynomial fields ---------------------------------------------------

const N: usize = 3;
/// Coefficients of one quadratic polynomial in `N` variables.
const POLY: usize = 1 + N + N * (N + 1) / 2;

fn poly(c: &[f64], v: &[Jet]) -> Jet {
    let mut acc = v[0].constant_like(c[0]);
    let mut idx = 1;
    for x in &v[..N] {
        acc.add_scaled(x, c[idx]);
        idx += 1;
    }
    for i in 0..N {
        for j in i..N {
            acc.add_scaled(&v[i].mul_jet(&v[j]), c[idx]);
            idx += 1;
        }
    }
    acc
}

/// Degree-`k` field whose blade coefficients are quadratic polynomials.
fn field(k: usize, variance: Variance, raw: &[f64]) -> JetField {
    let raw = Arc::new(raw.to_vec());
    JetField::uniform(N, Shape::Blades(variance), move |v| {
        (0..1usize << N)
            .map(|m| {
                if m.count_ones() as usize == k {
                    poly(&raw[m * POLY..(m + 1) * POLY], v)
                } else {
                    v[0].zero_like()
                }
            })
            .collect()
    })
}

/// `e^ρ dx¹∧dx²∧dx³` with a small quadratic `ρ`.
fn volume(raw: &[f64]) -> JetField {
    let c: Vec<f64> = raw.iter().map(|x| 0.3 * x).collect();
    JetField::uniform(N, Shape::Blades(Variance::Form), move |v| {
        let mut out = vec![v[0].zero_like(); 1 << N];
        out[(1 << N) - 1] = poly(&c, v).exp();
        out
    })
}

fn worst(f: &JetField, p: &ChartPoint) -> f64 {
    f.values(p).iter().fold(0.0, |m, v| m.max(v.abs()))
}

fn coeffs() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0..1.0f64, POLY << N)
}

fn point() -> impl Strategy<Value = ChartPoint> {
    prop::collection::vec(-0.8..0.8f64, N).prop_map(|x| ChartPoint::new(0, x))
}

fn triple() -> impl Strategy<Value = (usize, usize, usize, Vec<f64>, Vec<f64>, Vec<f64>)> {
    (0..=N, 0..=N, 0..=N, coeffs(), coeffs(), coeffs())
}

/// Central-difference derivative of the components of `f` along `e_i`.
fn fd_partial(f: &JetField, p: &ChartPoint, i: usize) -> Vec<f64> {
    let h = 1e-5;
    let mut a = p.clone();
    let mut b = p.clone();
    a.x[i] += h;
    b.x[i] -= h;
    f.values(&a).iter().zip(f.values(&b)).map(|(u, v)| (u - v) / (2.0 * h)).collect()
}

// --- exterior algebra ----------------------------------------------------

fn blade_case() -> impl Strategy<Value = (usize, usize, usize, Vec<f64>, Vec<f64>, Vec<f64>)> {
    (2..=6usize).prop_flat_map(|n| {
        (0..=n).prop_flat_map(move |p| {
            (
                Just(n),
                Just(p),
                0..=n - p,
                prop::collection::vec(-1.0..1.0f64, 1 << n),
                prop::collection::vec(-1.0..1.0f64, 1 << n),
                prop::collection::vec(-1.0..1.0f64, 1 << n),
            )
        })
    })
}

proptest! {
    #![proptest_config(Config::with_cases(200))]

    #[test]
    fn wedge_is_graded_commutative((n, p, q, a, b, _) in blade_case()) {
        let a = homogeneous(n, p, Variance::Vector, &a);
        let b = homogeneous(n, q, Variance::Vector, &b);
        let r = a.wedge(&b).sub(&b.wedge(&a).scale(sign(p * q))).max_abs();
        prop_assert!(r <= 1e-12, "residual {r}");
    }

    #[test]
    fn wedge_is_associative((n, _, _, a, b, c) in blade_case()) {
        let a = Blades { c: a, n, variance: Variance::Vector };
        let b = Blades { c: b, n, variance: Variance::Vector };
        let c = Blades { c, n, variance: Variance::Vector };
        let r = a.wedge(&b).wedge(&c).sub(&a.wedge(&b.wedge(&c))).max_abs();
        prop_assert!(r <= 1e-11, "residual {r}");
    }

    #[test]
    fn contraction_is_adjoint_to_wedge((n, p, q, a, b, al) in blade_case()) {
        let a = homogeneous(n, p, Variance::Vector, &a);
        let b = homogeneous(n, q, Variance::Vector, &b);
        let alpha = homogeneous(n, p + q, Variance::Form, &al);
        let r = (alpha.right_contract(&a).pair(&b) - alpha.pair(&a.wedge(&b))).abs();
        prop_assert!(r <= 1e-12, "residual {r}");
    }

    #[test]
    fn contractions_compose((n, p, q, a, b, al) in blade_case()) {
        let a = homogeneous(n, p, Variance::Vector, &a);
        let b = homogeneous(n, q, Variance::Vector, &b);
        let alpha = homogeneous(n, p + q, Variance::Form, &al);
        let right = alpha.right_contract(&a.wedge(&b)).sub(&alpha.right_contract(&a).right_contract(&b)).max_abs();
        let left = a.wedge(&b).left_contract(&alpha).sub(&a.left_contract(&b.left_contract(&alpha))).max_abs();
        prop_assert!(right <= 1e-12 && left <= 1e-12, "right {right}, left {left}");
    }

    #[test]
    fn even_exponential_inverts((n, _, _, a, b, _) in blade_case()) {
        let mut x = homogeneous(n, 2, Variance::Vector, &a);
        x.add_scaled(&homogeneous(n, 4, Variance::Vector, &b), 1.0);
        let r = x.exp().wedge(&x.scale(-1.0).exp()).sub(&unit(n, Variance::Vector)).max_abs();
        prop_assert!(r <= 1e-10, "residual {r}");
    }

    #[test]
    fn exponential_of_bivector_matches_power_series((n, _, _, a, _, _) in blade_case()) {
        let x = homogeneous(n, 2, Variance::Vector, &a);
        // Σ x^j / j! summed by hand; x^j = 0 once 2j > n
        let mut term = unit(n, Variance::Vector);
        let mut sum = term.clone();
        for j in 1..=n / 2 {
            term = term.wedge(&x).scale(1.0 / j as f64);
            sum = sum.add(&term);
        }
        prop_assert!(x.exp().sub(&sum).max_abs() <= 1e-12);
    }

    #[test]
    fn pfaffian_squares_to_determinant(half in 1..=3usize, raw in prop::collection::vec(-1.0..1.0f64, 36)) {
        let m = 2 * half;
        let a = DMatrix::from_fn(m, m, |i, j| raw[i * 6 + j] - raw[j * 6 + i]);
        let pf = pfaffian(&a).unwrap();
        let det = a.determinant();
        prop_assert!((pf * pf - det).abs() <= 1e-10 * (1.0 + det.abs()));
    }

    #[test]
    fn pfaffian_of_block_diagonal_is_product(l in prop::collection::vec(-3.0..3.0f64, 3)) {
        let mut a = DMatrix::zeros(6, 6);
        for (i, v) in l.iter().enumerate() {
            a[(2 * i, 2 * i + 1)] = *v;
            a[(2 * i + 1, 2 * i)] = -*v;
        }
        let expected: f64 = l.iter().product();
        prop_assert!((pfaffian(&a).unwrap() - expected).abs() <= 1e-12 * (1.0 + expected.abs()));
    }
}

// --- BV calculus -----------------------------------------------------------

proptest! {
    #![proptest_config(Config::with_cases(48))]

    #[test]
    fn bracket_is_graded_antisymmetric((p, q, _, a, b, _) in triple(), x in point()) {
        let (a, b) = (field(p, Variance::Vector, &a), field(q, Variance::Vector, &b));
        let e = schouten(&a, &b).add(&schouten(&b, &a).scale(sign((p + 1) * (q + 1))));
        prop_assert!(worst(&e, &x) <= 1e-9);
    }

    #[test]
    fn bracket_satisfies_jacobi((p, q, r, a, b, c) in triple(), x in point()) {
        let (a, b, c) = (field(p, Variance::Vector, &a), field(q, Variance::Vector, &b), field(r, Variance::Vector, &c));
        let e = schouten(&a, &schouten(&b, &c))
            .sub(&schouten(&schouten(&a, &b), &c))
            .sub(&schouten(&b, &schouten(&a, &c)).scale(sign((p + 1) * (q + 1))));
        prop_assert!(worst(&e, &x) <= 1e-7);
    }

    #[test]
    fn bracket_is_a_graded_derivation((p, q, r, a, b, c) in triple(), x in point()) {
        let (a, b, c) = (field(p, Variance::Vector, &a), field(q, Variance::Vector, &b), field(r, Variance::Vector, &c));
        let e = schouten(&a, &wedge_fields(&b, &c))
            .sub(&wedge_fields(&schouten(&a, &b), &c))
            .sub(&wedge_fields(&b, &schouten(&a, &c)).scale(sign((p + 1) * q)));
        prop_assert!(worst(&e, &x) <= 1e-8);
    }

    #[test]
    fn laplacian_generates_the_bracket((p, q, _, a, b, v) in triple(), x in point()) {
        let (a, b) = (field(p, Variance::Vector, &a), field(q, Variance::Vector, &b));
        let vol = volume(&v[..POLY]);
        let d = |f: &JetField| bv_laplacian_with(f, &vol);
        let e = d(&wedge_fields(&a, &b))
            .sub(&wedge_fields(&d(&a), &b))
            .sub(&wedge_fields(&a, &d(&b)).scale(sign(p)))
            .sub(&schouten(&a, &b).scale(sign(p)));
        prop_assert!(worst(&e, &x) <= 1e-8);
    }

    #[test]
    fn laplacian_squares_to_zero((p, _, _, a, _, v) in triple(), x in point()) {
        let a = field(p, Variance::Vector, &a);
        let vol = volume(&v[..POLY]);
        let dd = bv_laplacian_with(&bv_laplacian_with(&a, &vol), &vol);
        prop_assert!(worst(&dd, &x) <= 1e-8);
    }

    #[test]
    fn contraction_intertwines_laplacian_and_d((p, _, _, a, _, v) in triple(), x in point()) {
        let a = field(p, Variance::Vector, &a);
        let vol = volume(&v[..POLY]);
        let e = de_rham_d(&contract_volume(&a, &vol)).sub(&contract_volume(&bv_laplacian_with(&a, &vol), &vol));
        prop_assert!(worst(&e, &x) <= 1e-9);
    }

    #[test]
    fn d_squares_to_zero((p, _, _, a, _, _) in triple(), x in point()) {
        let a = field(p, Variance::Form, &a);
        prop_assert!(worst(&de_rham_d(&de_rham_d(&a)), &x) <= 1e-9);
    }

    /// Oracle: the Lie bracket `[X, Y]^i = X^j ∂_j Y^i − Y^j ∂_j X^i` by
    /// central differences; the bracket is its negative.
    #[test]
    fn bracket_of_vector_fields_matches_difference_quotients((_, _, _, a, b, _) in triple(), x in point()) {
        let (xf, yf) = (field(1, Variance::Vector, &a), field(1, Variance::Vector, &b));
        let xv = xf.values(&x);
        let yv = yf.values(&x);
        let got = schouten(&xf, &yf).values(&x);
        for i in 0..N {
            let mut lie = 0.0;
            for j in 0..N {
                lie += xv[1 << j] * fd_partial(&yf, &x, j)[1 << i] - yv[1 << j] * fd_partial(&xf, &x, j)[1 << i];
            }
            prop_assert!((got[1 << i] + lie).abs() <= 1e-6, "component {i}: {} vs {}", got[1 << i], -lie);
        }
    }

    /// Oracle: `div X = ρ⁻¹ ∂_i(ρ X^i)` for `vol = ρ dx¹∧…∧dxⁿ`.
    #[test]
    fn laplacian_of_vector_field_is_divergence((_, _, _, a, _, v) in triple(), x in point()) {
        let xf = field(1, Variance::Vector, &a);
        let vol = volume(&v[..POLY]);
        let top = (1 << N) - 1;
        let weighted = JetField::from_evaluator(N, Shape::Components(N), {
            let (xf, vol) = (xf.clone(), vol.clone());
            move |c, p, order| {
                let q = ChartPoint::new(c, p.to_vec());
                let xs = xf.taylor(&q, order);
                let rho = vol.taylor(&q, order)[top].clone();
                (0..N).map(|i| xs[1 << i].mul_jet(&rho)).collect()
            }
        });
        let rho = vol.values(&x)[top];
        let div: f64 = (0..N).map(|i| fd_partial(&weighted, &x, i)[i]).sum::<f64>() / rho;
        let got = bv_laplacian_with(&xf, &vol).values(&x)[0];
        prop_assert!((got - div).abs() <= 1e-6, "{got} vs {div}");
    }
}

// --- equivariant structure on the sphere ----------------------------------

fn sphere() -> bvloc::catalog::Instance {
    catalog::build("sphere_dh", &CatalogParams::default()).unwrap()
}

/// Random field in the spherical chart with coefficients polynomial in
/// `(θ, φ)`; the identities below are local.
fn sphere_field(k: usize, variance: Variance, raw: &[f64]) -> JetField {
    let raw = Arc::new(raw.to_vec());
    JetField::from_evaluator(2, Shape::Blades(variance), move |_, x, order| {
        let v = Jet::variables(x, order);
        (0..4usize)
            .map(|m| {
                if m.count_ones() as usize == k {
                    let c = &raw[m * 6..m * 6 + 6];
                    let mut acc = v[0].constant_like(c[0]);
                    acc.add_scaled(&v[0], c[1]);
                    acc.add_scaled(&v[1], c[2]);
                    acc.add_scaled(&v[0].mul_jet(&v[0]), c[3]);
                    acc.add_scaled(&v[0].mul_jet(&v[1]), c[4]);
                    acc.add_scaled(&v[1].mul_jet(&v[1]), c[5]);
                    acc
                } else {
                    v[0].zero_like()
                }
            })
            .collect()
    })
}

fn sphere_point() -> impl Strategy<Value = ChartPoint> {
    (0.3..2.8f64, 0.1..6.2f64).prop_map(|(t, p)| ChartPoint::new(0, vec![t, p]))
}

proptest! {
    #![proptest_config(Config::with_cases(32))]

    #[test]
    fn equivariant_laplacian_squares_to_lie_derivative(
        k in 0..=2usize,
        raw in prop::collection::vec(-1.0..1.0f64, 24),
        phi in 0.25..3.0f64,
        x in sphere_point(),
    ) {
        let inst = sphere();
        let g = &inst.geometry;
        let p = sphere_field(k, Variance::Vector, &raw);
        let dg = |f: &JetField| equivariant_delta_unchecked(f, g, phi);
        let e = dg(&dg(&p)).sub(&lie_multivector(&p, g).scale(phi));
        prop_assert!(worst(&e, &x) <= 1e-7);
    }

    #[test]
    fn equivariant_d_squares_to_minus_lie_derivative(
        k in 0..=2usize,
        raw in prop::collection::vec(-1.0..1.0f64, 24),
        phi in 0.25..3.0f64,
        x in sphere_point(),
    ) {
        let inst = sphere();
        let g = &inst.geometry;
        let a = sphere_field(k, Variance::Form, &raw);
        let dg = |f: &JetField| equivariant_d_unchecked(f, g, phi);
        let e = dg(&dg(&a)).add(&lie_form(&a, g).scale(phi));
        prop_assert!(worst(&e, &x) <= 1e-7);
    }

    #[test]
    fn equivariant_duality(
        k in 0..=2usize,
        raw in prop::collection::vec(-1.0..1.0f64, 24),
        phi in 0.25..3.0f64,
        x in sphere_point(),
    ) {
        let inst = sphere();
        let g = &inst.geometry;
        let p = sphere_field(k, Variance::Vector, &raw);
        let e = equivariant_d_unchecked(&contract_volume(&p, g.volume()), g, phi)
            .sub(&contract_volume(&equivariant_delta_unchecked(&p, g, phi), g.volume()));
        prop_assert!(worst(&e, &x) <= 1e-8);
    }

    #[test]
    fn catalog_element_is_equivariantly_closed(phi in 0.1..4.0f64, x in sphere_point()) {
        let inst = sphere();
        let d = equivariant_delta(&inst.p, &inst.geometry, phi).unwrap();
        prop_assert!(worst(&d, &x) <= 1e-8);
    }
}

// --- geometry ----------------------------------------------------------------

proptest! {
    #![proptest_config(Config::with_cases(64))]

    /// Oracle: `Γ^θ_{φφ} = −sinθ cosθ`, `Γ^φ_{θφ} = cot θ`, all others zero.
    #[test]
    fn sphere_christoffel_symbols_match_closed_form(x in sphere_point()) {
        let g = sphere().geometry;
        let gam = g.christoffel(&x).unwrap();
        let t = x.x[0];
        let mut expected = vec![vec![vec![0.0; 2]; 2]; 2];
        expected[0][1][1] = -t.sin() * t.cos();
        expected[1][0][1] = t.cos() / t.sin();
        expected[1][1][0] = t.cos() / t.sin();
        for l in 0..2 {
            for m in 0..2 {
                for n in 0..2 {
                    prop_assert!((gam[l][m][n] - expected[l][m][n]).abs() <= 1e-12);
                }
            }
        }
    }

    /// `∂_k g_ij = Γ^l_{ki} g_lj + Γ^l_{kj} g_il` in the pole charts, where
    /// the metric is not diagonal.
    #[test]
    fn levi_civita_connection_is_metric(chart in 1..=2usize, u in -0.6..0.6f64, v in -0.6..0.6f64) {
        let g = sphere().geometry;
        let x = ChartPoint::new(chart, vec![u, v]);
        let gam = g.christoffel(&x).unwrap();
        let gm = g.metric_matrix(&x);
        let dg = g.metric().gradients(&x);
        for k in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    let mut r = dg[i * 2 + j][k];
                    for l in 0..2 {
                        r -= gam[l][k][i] * gm[(l, j)] + gam[l][k][j] * gm[(i, l)];
                    }
                    prop_assert!(r.abs() <= 1e-8);
                }
            }
        }
    }

    #[test]
    fn rotations_are_killing(k in 1..=4i32, x in sphere_point()) {
        let inst = catalog::build("sphere_dh", &CatalogParams { k, ..CatalogParams::default() }).unwrap();
        prop_assert!(inst.geometry.killing_residual(&x) <= 1e-8);
    }

    #[test]
    fn pole_weights_scale_with_speed(k in 1..=4i32) {
        let inst = catalog::build("sphere_dh", &CatalogParams { k, ..CatalogParams::default() }).unwrap();
        let g = &inst.geometry;
        let n = g.weights_at_fixed_point(&ChartPoint::new(1, vec![0.0, 0.0])).unwrap();
        let s = g.weights_at_fixed_point(&ChartPoint::new(2, vec![0.0, 0.0])).unwrap();
        prop_assert!((n.magnitudes[0] - k as f64).abs() <= 1e-10);
        prop_assert!((n.product + s.product).abs() <= 1e-10, "products {} and {}", n.product, s.product);
    }
}

// --- quadrature ---------------------------------------------------------------

/// Smooth vector fields on the round sphere in the spherical chart:
/// gradients of the ambient coordinates, `z ∇x`, and the rotation `∂_φ`.
fn global_vector_field(c: [f64; 5]) -> JetField {
    JetField::from_charts(
        2,
        Shape::Blades(Variance::Vector),
        vec![move |v: &[Jet]| {
            let (st, ct) = (v[0].sin(), v[0].cos());
            let (sp, cp) = (v[1].sin(), v[1].cos());
            let inv = st.recip();
            // (∂θ, ∂φ) components
            let gx = (ct.mul_jet(&cp), -sp.mul_jet(&inv));
            let gy = (ct.mul_jet(&sp), cp.mul_jet(&inv));
            let gz = (-st.clone(), v[0].zero_like());
            let th = gx.0.scale(c[0]) + gy.0.scale(c[1]) + gz.0.scale(c[2]) + gx.0.mul_jet(&ct).scale(c[3]);
            let ph = gx.1.scale(c[0]) + gy.1.scale(c[1]) + gx.1.mul_jet(&ct).scale(c[3]) + v[0].constant_like(c[4]);
            vec![ct.scale(c[4]), th, ph, ct.mul_jet(&ct)]
        }],
    )
}

proptest! {
    #![proptest_config(Config::with_cases(16))]

    #[test]
    fn divergence_theorem(c in prop::array::uniform5(-1.0..1.0f64), phi in 0.25..3.0f64) {
        let inst = sphere();
        let g = &inst.geometry;
        let q = EquivariantElement::constant(global_vector_field(c), Variance::Vector);
        let total = integrate_field(&equivariant_delta(&q, g, phi).unwrap(), g).unwrap();
        prop_assert!(total.abs() <= 1e-6, "∫ Δ_𝔤Q = {total}");
    }

    #[test]
    fn integration_is_independent_of_worker_count(a in prop::array::uniform4(-1.0..1.0f64), order in 4..40usize) {
        let grid = QuadratureGrid::new(&[(0.0, 1.0), (-1.0, 2.0)], order).unwrap();
        let f = |x: &[f64]| (a[0] * x[0]).sin() + a[1] * x[1] * x[1] + (a[2] * x[0] * x[1]).exp() + a[3];
        let results: Vec<f64> = [1, 2, 3, 5]
            .iter()
            .map(|&t| {
                let pool = rayon::ThreadPoolBuilder::new().num_threads(t).build().unwrap();
                pool.install(|| grid.integrate(f).unwrap())
            })
            .collect();
        prop_assert!(results.windows(2).all(|w| w[0].to_bits() == w[1].to_bits()), "{results:?}");
    }

    #[test]
    fn pairwise_sum_matches_naive_sum(v in prop::collection::vec(-1e3..1e3f64, 0..500)) {
        let naive: f64 = v.iter().sum();
        let Some(total) = pairwise_sum(&v) else {
            prop_assert!(v.is_empty());
            return Ok(());
        };
        prop_assert!((total - naive).abs() <= 1e-9 * (1.0 + v.iter().map(|x| x.abs()).sum::<f64>()));
    }
}

proptest! {
    #[test]
    fn csv_decimals_round_trip(x in prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO) {
        let s = decimal(x);
        prop_assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{}", s);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly(order in 2..30usize, deg in 0..60usize) {
        let deg = deg % (2 * order);
        let grid = QuadratureGrid::new(&[(0.0, 1.0)], order).unwrap();
        let got = grid.integrate(|x| x[0].powi(deg as i32)).unwrap();
        prop_assert!((got - 1.0 / (deg as f64 + 1.0)).abs() <= 1e-13);
    }
}

#[test]
fn sphere_area_is_four_pi() {
    let g = sphere().geometry;
    let one = JetField::constant(2, Shape::Scalar, vec![1.0]).as_blades(Variance::Vector);
    assert!((integrate_field(&one, &g).unwrap() - 4.0 * PI).abs() <= 1e-12);
}
