use std::f64::consts::PI;

use epirep::convex_core::{
    epigraph_cap, hausdorff_distance, project_to_epigraph, steiner_point, steiner_point_quadrature, support,
    ConvexBody2, ConvexFn1D, Interval, Point,
};
use proptest::prelude::*;

/// Steiner point of a polygon as the exterior-angle weighted vertex average.
fn exterior_angle_steiner(v: &[Point]) -> Point {
    let m = v.len();
    let mut s = [0.0, 0.0];
    for i in 0..m {
        let prev = v[(i + m - 1) % m];
        let next = v[(i + 1) % m];
        let a = [v[i][0] - prev[0], v[i][1] - prev[1]];
        let b = [next[0] - v[i][0], next[1] - v[i][1]];
        let turn = (a[0] * b[1] - a[1] * b[0]).atan2(a[0] * b[0] + a[1] * b[1]);
        s[0] += turn / (2.0 * PI) * v[i][0];
        s[1] += turn / (2.0 * PI) * v[i][1];
    }
    s
}

/// Point-in-convex-polygon by edge orientation (counterclockwise vertices).
fn inside_ccw(v: &[Point], p: Point, tol: f64) -> bool {
    let m = v.len();
    (0..m).all(|i| {
        let a = v[i];
        let b = v[(i + 1) % m];
        (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]) >= -tol
    })
}

fn cloud() -> impl Strategy<Value = Vec<Point>> {
    prop::collection::vec((-10.0..10.0f64, -10.0..10.0f64).prop_map(|(a, b)| [a, b]), 3..16)
}

/// Hull with at least three vertices.
fn polygon() -> impl Strategy<Value = ConvexBody2> {
    cloud().prop_filter_map("degenerate hull", |pts| {
        let body = ConvexBody2::polygon(&pts).ok()?;
        let v = body.vertices()?;
        let area: f64 =
            (0..v.len()).map(|i| v[i][0] * v[(i + 1) % v.len()][1] - v[(i + 1) % v.len()][0] * v[i][1]).sum();
        (v.len() >= 3 && area > 1e-3).then_some(body)
    })
}

proptest! {
    #[test]
    fn steiner_point_lies_in_the_body(body in polygon()) {
        let s = steiner_point(&body);
        prop_assert!(inside_ccw(body.vertices().unwrap(), s, 1e-9));
    }

    #[test]
    fn steiner_point_is_translation_equivariant(body in polygon(), dx in -50.0..50.0f64, dy in -50.0..50.0f64) {
        let s = steiner_point(&body);
        let st = steiner_point(&body.translate([dx, dy]));
        prop_assert!((st[0] - s[0] - dx).abs() < 1e-9 && (st[1] - s[1] - dy).abs() < 1e-9);
    }

    #[test]
    fn closed_form_matches_exterior_angles(body in polygon()) {
        let s = steiner_point(&body);
        let o = exterior_angle_steiner(body.vertices().unwrap());
        prop_assert!((s[0] - o[0]).abs() < 1e-9 && (s[1] - o[1]).abs() < 1e-9, "{s:?} vs {o:?}");
    }

    #[test]
    fn disk_steiner_point_is_the_centre(cx in -5.0..5.0f64, cy in -5.0..5.0f64, r in 0.0..5.0f64) {
        prop_assert_eq!(steiner_point(&ConvexBody2::disk([cx, cy], r)), [cx, cy]);
    }

    #[test]
    fn support_is_the_max_over_points(pts in cloud(), th in 0.0..(2.0 * PI)) {
        let body = ConvexBody2::polygon(&pts).unwrap();
        let n = [th.cos(), th.sin()];
        let direct = pts.iter().map(|p| p[0] * n[0] + p[1] * n[1]).fold(f64::NEG_INFINITY, f64::max);
        prop_assert!((support(&body, n) - direct).abs() < 1e-9);
    }

    #[test]
    fn projection_onto_parabola_epigraph(a in -3.0..3.0f64, b in -3.0..6.0f64) {
        let h = ConvexFn1D::new(Interval { lo: -2.0, hi: 2.0 }, |v| v * v);
        let (q, d) = project_to_epigraph(&h, [a, b]).unwrap();
        prop_assert!(q[0] >= -2.0 && q[0] <= 2.0 && q[1] >= q[0] * q[0] - 1e-9);
        prop_assert!((((q[0] - a).powi(2) + (q[1] - b).powi(2)).sqrt() - d).abs() < 1e-9);
        // no epigraph point on a fine boundary scan is closer
        for k in 0..=400 {
            let v = -2.0 + 4.0 * k as f64 / 400.0;
            let w = (v * v).max(b);
            prop_assert!(((v - a).powi(2) + (w - b).powi(2)).sqrt() >= d - 1e-6);
        }
        let (q2, d2) = project_to_epigraph(&h, q).unwrap();
        prop_assert!(d2 < 1e-9 || (q2[0] - q[0]).abs() < 1e-6);
    }

    #[test]
    fn cap_vertices_lie_in_epigraph_and_disk(cv in -2.0..2.0f64, cw in 0.0..3.0f64, r in 0.5..3.0f64) {
        let h = ConvexFn1D::new(Interval { lo: -1.0, hi: 1.5 }, |v: f64| v.abs());
        if let Ok(cap) = epigraph_cap(&h, [cv, cw], r, 64) {
            for p in cap.vertices().unwrap() {
                prop_assert!(p[0] >= -1.0 - 1e-9 && p[0] <= 1.5 + 1e-9);
                prop_assert!(p[1] >= p[0].abs() - 1e-9);
                prop_assert!(((p[0] - cv).powi(2) + (p[1] - cw).powi(2)).sqrt() <= r + 1e-9);
            }
        }
    }

    #[test]
    fn interval_hausdorff_is_a_metric(a in -5.0..5.0f64, w1 in 0.0..3.0f64, b in -5.0..5.0f64, w2 in 0.0..3.0f64, c in -5.0..5.0f64, w3 in 0.0..3.0f64) {
        let i = Interval { lo: a, hi: a + w1 };
        let j = Interval { lo: b, hi: b + w2 };
        let k = Interval { lo: c, hi: c + w3 };
        prop_assert_eq!(hausdorff_distance(&i, &j), hausdorff_distance(&j, &i));
        prop_assert!(hausdorff_distance(&i, &k) <= hausdorff_distance(&i, &j) + hausdorff_distance(&j, &k) + 1e-12);
        prop_assert_eq!(hausdorff_distance(&i, &i), 0.0);
    }
}

#[test]
fn quadrature_agrees_with_closed_form_on_a_square() {
    let sq = ConvexBody2::polygon(&[[1.0, 1.0], [3.0, 1.0], [3.0, 3.0], [1.0, 3.0]]).unwrap();
    let q = steiner_point_quadrature(&sq, 4096, 1e-6).unwrap();
    assert!((q[0] - 2.0).abs() < 1e-6 && (q[1] - 2.0).abs() < 1e-6);
}

#[test]
fn triangle_steiner_point_is_angle_weighted() {
    // exterior angles π/2, 3π/4, 3π/4 at the three vertices
    let t = ConvexBody2::polygon(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).unwrap();
    let s = steiner_point(&t);
    assert!((s[0] - 0.375).abs() < 1e-12 && (s[1] - 0.375).abs() < 1e-12, "{s:?}");
}
