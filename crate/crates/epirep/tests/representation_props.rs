use epirep::convex_core::{linspace, ConvexFn1D, Interval};
use epirep::hamiltonians::make_ex35;
use epirep::representation::{
    augmented_hamiltonian, build_epigraphical_representation, ex35_explicit_triple, ex35_modified_triple,
    reconstruct_hamiltonian, steiner_select, sup_over_image, ControlSamples, OmegaPolicy, SteinerSettings, EX35_KNOTS,
};
use proptest::prelude::*;

fn knots_plus(n: usize) -> ControlSamples {
    ControlSamples::interval(-1.0, 1.0, n, &EX35_KNOTS)
}

proptest! {
    #[test]
    fn explicit_triple_reconstructs_exactly(
        alpha in 0.0..3.0f64, gamma in 0.1..3.0f64, t in 0.0..8.0f64, x in -3.0..0.0f64, p in -5.0..5.0f64,
    ) {
        let spec = make_ex35(alpha.into(), gamma).unwrap();
        let triple = ex35_explicit_triple(alpha.into(), gamma);
        let r = reconstruct_hamiltonian(&triple, t, x, p, &knots_plus(5));
        prop_assert!((r - spec.h(t, x, p)).abs() <= 1e-9, "{r} vs {}", spec.h(t, x, p));
    }

    #[test]
    fn explicit_image_lies_in_the_epigraph(
        alpha in 0.0..3.0f64, gamma in 0.1..3.0f64, t in 0.0..8.0f64, x in -3.0..0.0f64, u in -1.0..1.0f64,
    ) {
        let spec = make_ex35(alpha.into(), gamma).unwrap();
        let (f, l) = ex35_explicit_triple(alpha.into(), gamma).eval(t, x, &[u]);
        prop_assert!(spec.hstar(t, x, f).unwrap() <= l + 1e-9);
    }

    #[test]
    fn modified_triple_reconstructs_the_same_hamiltonian(
        t in 0.0..5.0f64, x in -3.0..0.0f64, p in -4.0..4.0f64,
    ) {
        let spec = make_ex35(1.0.into(), 1.0).unwrap();
        let triple = ex35_modified_triple(1.0.into(), 1.0);
        let mut pts = Vec::new();
        for u in knots_plus(11).points {
            for w in [-1.0, -0.5, 0.0, 0.5, 1.0] {
                pts.push(vec![u[0], w]);
            }
        }
        let samples = ControlSamples { points: pts, modulus: 0.1 };
        prop_assert!((reconstruct_hamiltonian(&triple, t, x, p, &samples) - spec.h(t, x, p)).abs() <= 1e-9);
    }

    #[test]
    fn steiner_selection_stays_in_the_epigraph(a in -4.0..4.0f64, b in -3.0..5.0f64) {
        let h = ConvexFn1D::new(Interval { lo: -2.0, hi: 1.0 }, |v: f64| v * v).with_breakpoints(vec![]);
        let e = steiner_select(&h, [a, b], SteinerSettings::default());
        prop_assert!(e[0] >= -2.0 - 1e-9 && e[0] <= 1.0 + 1e-9);
        prop_assert!(e[1] >= e[0] * e[0] - 1e-6, "{e:?}");
        if h.in_epigraph([a, b]) {
            prop_assert_eq!(e, [a, b]);
        }
    }

    /// Selection is translation equivariant in the value direction.
    #[test]
    fn steiner_selection_commutes_with_vertical_shift(a in -3.0..3.0f64, b in -3.0..3.0f64, c in -2.0..2.0f64) {
        let h = ConvexFn1D::new(Interval { lo: -1.0, hi: 1.0 }, |v: f64| v.abs());
        let hc = ConvexFn1D::new(Interval { lo: -1.0, hi: 1.0 }, move |v: f64| v.abs() + c);
        let e = steiner_select(&h, [a, b], SteinerSettings::default());
        let ec = steiner_select(&hc, [a, b + c], SteinerSettings::default());
        prop_assert!((ec[0] - e[0]).abs() < 1e-6 && (ec[1] - e[1] - c).abs() < 1e-6, "{e:?} {ec:?}");
    }

    #[test]
    fn steiner_build_satisfies_the_cost_lower_bound(t in 0.0..3.0f64, x in -2.0..0.0f64, r in 0.0..1.0f64, th in 0.0..std::f64::consts::TAU) {
        let spec = make_ex35(1.0.into(), 1.0).unwrap();
        let triple = build_epigraphical_representation(&spec, OmegaPolicy::TwiceLambda, SteinerSettings::default()).unwrap();
        let (f, l) = triple.eval(t, x, &[r * th.cos(), r * th.sin()]);
        prop_assert!(spec.hstar(t, x, f).unwrap() <= l + 1e-6);
        prop_assert!(f.abs() + l.abs() <= 20.0 * spec.lambda(t, x));
        prop_assert!(l >= (spec.phi)(t) - 1e-9);
    }

    #[test]
    fn augmented_hamiltonian_is_positively_homogeneous(p in -3.0..3.0f64, q in 0.1..2.0f64, s in 0.1..5.0f64) {
        let triple = ex35_explicit_triple(1.0.into(), 1.0);
        let smp = knots_plus(41);
        let a = augmented_hamiltonian(&triple, 0.5, -1.0, p, q, &smp);
        let b = augmented_hamiltonian(&triple, 0.5, -1.0, s * p, s * q, &smp);
        prop_assert!((b - s * a).abs() < 1e-9);
    }
}

#[test]
fn sup_over_image_picks_the_best_pair() {
    let img = [(1.0, 0.5), (-1.0, 0.0), (0.0, -2.0)];
    assert_eq!(sup_over_image(&img, 3.0, 1.0), 2.5);
    assert_eq!(sup_over_image(&img, -3.0, 1.0), 3.0);
    assert_eq!(sup_over_image(&img, 0.0, 1.0), 2.0);
}

#[test]
fn explicit_triple_at_knots() {
    let tr = ex35_explicit_triple(1.0.into(), 1.0);
    let e = (-1.0f64).exp();
    for (u, f, l) in [(-1.0, -3.0, e), (-0.5, -1.0, 0.0), (0.0, 0.0, 0.0), (0.5, 1.0, 0.0), (1.0, 3.0, e)] {
        let (ff, ll) = tr.eval(1.0, -2.0, &[u]);
        assert!((ff - f).abs() < 1e-12 && (ll - l).abs() < 1e-12, "u={u}");
    }
    for x in linspace(-3.0, 0.0, 7) {
        assert_eq!(tr.eval(0.0, x, &[0.25]), (0.5, 0.0));
    }
}
