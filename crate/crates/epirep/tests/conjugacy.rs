use epirep::convex_core::{linspace, ConstraintSet1D};
use epirep::ext::is_inf;
use epirep::hamiltonians::{make_abs, make_ex33, make_ex35, make_ex51, HamiltonianSpec};
use epirep::legendre::{biconjugate_check, conjugate_grid, GridFunction1D};
use proptest::prelude::*;

fn library(alpha: f64, gamma: f64, n: Option<u32>) -> Vec<HamiltonianSpec> {
    vec![
        make_ex35(alpha.into(), gamma).unwrap(),
        make_ex51(alpha.into(), 1.0.into(), gamma, n).unwrap(),
        make_ex33(1.0).unwrap(),
        make_abs(ConstraintSet1D::UpTo { a: 0.0 }),
    ]
}

/// `sup_p {pv - h(p)}` over `[-r, r]` by ternary search on the concave objective.
fn sup_concave(h: impl Fn(f64) -> f64, v: f64, r: f64) -> f64 {
    let g = |p: f64| p * v - h(p);
    let (mut a, mut b) = (-r, r);
    for _ in 0..300 {
        let m1 = a + (b - a) / 3.0;
        let m2 = b - (b - a) / 3.0;
        if g(m1) < g(m2) {
            a = m1;
        } else {
            b = m2;
        }
    }
    g(0.5 * (a + b))
}

proptest! {
    #[test]
    fn fenchel_young(
        alpha in 0.0..3.0f64, gamma in 0.1..3.0f64, n in prop::option::of(1u32..64),
        t in 0.0..10.0f64, x in -4.0..0.0f64, p in -20.0..20.0f64, v in -10.0..10.0f64,
    ) {
        for spec in library(alpha, gamma, n) {
            let hs = spec.hstar(t, x, v).unwrap();
            if !is_inf(hs) {
                prop_assert!(spec.h(t, x, p) + hs - p * v >= -1e-9, "{} at t={t} x={x} p={p} v={v}", spec.name);
            }
        }
    }

    /// The closed form agrees with a brute-force sup over p.
    #[test]
    fn closed_form_matches_numeric_conjugate(
        alpha in 0.1..2.0f64, gamma in 0.1..2.0f64, t in 0.0..3.0f64, x in -2.0..-0.1f64, s in 0.0..1.0f64,
    ) {
        for spec in library(alpha, gamma, Some(3)) {
            let d = spec.conjugate(t, x).unwrap().domain();
            let v = d.lo + s * (d.hi - d.lo);
            let closed = spec.hstar(t, x, v).unwrap();
            let numeric = sup_concave(|p| spec.h(t, x, p), v, 400.0);
            prop_assert!((closed - numeric).abs() < 1e-8, "{}: {closed} vs {numeric}", spec.name);
        }
    }

    #[test]
    fn discrete_conjugate_is_convex(a in 0.0..3.0f64, b in 0.0..2.0f64, c in -2.0..2.0f64, k in 0.0..1.0f64) {
        let h = GridFunction1D::sample(linspace(-5.0, 5.0, 201), |p| a * p.abs() + b * p * p + c * p + k * (p - 1.0).max(0.0)).unwrap();
        let hs = conjugate_grid(&h, &linspace(-4.0, 4.0, 161)).unwrap();
        for d in hs.second_differences() {
            prop_assert!(d >= -1e-12);
        }
    }

    #[test]
    fn biconjugate_recovers_the_hamiltonian(alpha in 0.1..2.0f64, gamma in 0.1..2.0f64, t in 0.0..5.0f64, x in -3.0..0.0f64) {
        let ps = linspace(-3.0, 3.0, 25);
        for spec in library(alpha, gamma, Some(2)) {
            prop_assert!(biconjugate_check(&spec, t, x, &ps, 2001).unwrap() <= 1e-3, "{}", spec.name);
        }
    }
}

#[test]
fn quadratic_grid_conjugate_matches_closed_form() {
    let h = GridFunction1D::sample(linspace(-10.0, 10.0, 2001), |p| p * p).unwrap();
    let hs = conjugate_grid(&h, &linspace(-4.0, 4.0, 9)).unwrap();
    for (v, c) in hs.nodes.iter().zip(&hs.values) {
        assert!((c - v * v / 4.0).abs() < 1e-4, "v={v}: {c}");
    }
}
