//! Convex geometry in one and two dimensions: intervals, constraint sets and
//! their cones, planar convex bodies, support functions, Steiner points,
//! projections onto epigraphs and epigraph caps.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ext::{self, INF};

pub type Point = [f64; 2];

/// Default number of uniform directions for support-function quadrature.
pub const STEINER_DIRECTIONS: usize = 720;
/// Default vertex budget for epigraph caps.
pub const CAP_VERTICES: usize = 256;
/// Tolerance (in v) for the one-dimensional convex searches.
pub const SEARCH_TOL: f64 = 1e-10;

// ---------------------------------------------------------------------------
// Intervals

/// Closed interval of extended reals, `lo <= hi`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    #[serde(with = "ext::serde_ext")]
    pub lo: f64,
    #[serde(with = "ext::serde_ext")]
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Err(Error::EmptyDomain);
        }
        Ok(Self { lo, hi })
    }

    pub fn point(v: f64) -> Self {
        Self { lo: v, hi: v }
    }

    pub fn whole() -> Self {
        Self { lo: -INF, hi: INF }
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn contains_tol(&self, v: f64, tol: f64) -> bool {
        self.lo - tol <= v && v <= self.hi + tol
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn is_degenerate(&self) -> bool {
        self.lo == self.hi
    }

    pub fn clamp(&self, v: f64) -> f64 {
        v.max(self.lo).min(self.hi)
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(Interval { lo, hi })
    }

    pub fn is_subset_of(&self, other: &Interval) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    pub fn neg(&self) -> Interval {
        Interval { lo: -self.hi, hi: -self.lo }
    }

    /// `n` evenly spaced points including both ends (bounded intervals only).
    pub fn linspace(&self, n: usize) -> Vec<f64> {
        linspace(self.lo, self.hi, n)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", ext::fmt(self.lo), ext::fmt(self.hi))
    }
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![a],
        _ => (0..n)
            .map(|i| {
                if i == n - 1 {
                    b
                } else {
                    a + (b - a) * i as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

// ---------------------------------------------------------------------------
// Constraint sets

/// Closed nonempty subset of the line of interval type.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConstraintSet1D {
    /// `(-inf, a]`
    UpTo { a: f64 },
    /// `[a, inf)`
    From { a: f64 },
    /// `[a, b]`
    Compact { a: f64, b: f64 },
    Line,
}

impl ConstraintSet1D {
    pub fn as_interval(&self) -> Interval {
        match *self {
            Self::UpTo { a } => Interval { lo: -INF, hi: a },
            Self::From { a } => Interval { lo: a, hi: INF },
            Self::Compact { a, b } => Interval { lo: a, hi: b },
            Self::Line => Interval::whole(),
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.as_interval().contains(x)
    }

    /// Boundary points paired with their outward unit normals.
    pub fn boundary(&self) -> Vec<(f64, f64)> {
        match *self {
            Self::UpTo { a } => vec![(a, 1.0)],
            Self::From { a } => vec![(a, -1.0)],
            Self::Compact { a, b } if a == b => vec![(a, -1.0), (a, 1.0)],
            Self::Compact { a, b } => vec![(a, -1.0), (b, 1.0)],
            Self::Line => vec![],
        }
    }

    /// Sup-norm of the set, `sup |x|` over it.
    pub fn norm(&self) -> f64 {
        let i = self.as_interval();
        i.lo.abs().max(i.hi.abs())
    }

    pub fn is_bounded(&self) -> bool {
        matches!(self, Self::Compact { .. })
    }
}

/// Tangent cone `T_A(x)` as an interval of directions.
pub fn tangent_cone(a: &ConstraintSet1D, x: f64) -> Result<Interval> {
    if !a.contains(x) {
        return Err(Error::NotInSet { x });
    }
    let i = a.as_interval();
    let at_lo = x == i.lo;
    let at_hi = x == i.hi;
    Ok(match (at_lo, at_hi) {
        (true, true) => Interval::point(0.0),
        (true, false) => Interval { lo: 0.0, hi: INF },
        (false, true) => Interval { lo: -INF, hi: 0.0 },
        (false, false) => Interval::whole(),
    })
}

/// Unit normals generated by boundary points of `A` within distance `eta` of `y`.
pub fn normal_directions(a: &ConstraintSet1D, y: f64, eta: f64) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    for (b, n) in a.boundary() {
        if (b - y).abs() <= eta && !out.contains(&n) {
            out.push(n);
        }
    }
    out.sort_by(f64::total_cmp);
    out
}

// ---------------------------------------------------------------------------
// Convex functions of one variable

/// Convex function on an interval; `+inf` outside it.
#[derive(Clone)]
pub struct ConvexFn1D {
    pub domain: Interval,
    value: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    /// Known kinks, used as extra polygon nodes.
    pub breakpoints: Vec<f64>,
}

impl ConvexFn1D {
    pub fn new(domain: Interval, value: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self { domain, value: Arc::new(value), breakpoints: Vec::new() }
    }

    pub fn with_breakpoints(mut self, bps: Vec<f64>) -> Self {
        self.breakpoints = bps;
        self
    }

    pub fn eval(&self, v: f64) -> f64 {
        if self.domain.contains(v) {
            (self.value)(v)
        } else {
            INF
        }
    }

    pub fn in_epigraph(&self, p: Point) -> bool {
        self.domain.contains(p[0]) && p[1] >= (self.value)(p[0])
    }
}

impl fmt::Debug for ConvexFn1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConvexFn1D").field("domain", &self.domain).finish_non_exhaustive()
    }
}

/// Golden-section minimisation of a unimodal function on `[a, b]`.
pub(crate) fn minimize_unimodal(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> (f64, f64) {
    const R: f64 = 0.618_033_988_749_894_9;
    let (mut a, mut b) = (a, b);
    let mut c = b - R * (b - a);
    let mut d = a + R * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - R * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + R * (b - a);
            fd = f(d);
        }
    }
    let mut best = if fc <= fd { (c, fc) } else { (d, fd) };
    for x in [a, b] {
        let fx = f(x);
        if fx < best.1 {
            best = (x, fx);
        }
    }
    best
}

/// Bisection for the boundary of `{g <= 0}` between `inside` (g <= 0) and `outside`.
fn bisect_boundary(g: impl Fn(f64) -> f64, mut inside: f64, mut outside: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (inside + outside);
        if mid == inside || mid == outside {
            break;
        }
        if g(mid) <= 0.0 {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    inside
}

/// Nearest point of `epi h` to `point`, with the distance.
pub fn project_to_epigraph(h: &ConvexFn1D, point: Point) -> Result<(Point, f64)> {
    let dom = h.domain;
    if dom.lo > dom.hi {
        return Err(Error::EmptyDomain);
    }
    let [a0, b0] = point;
    if h.in_epigraph(point) {
        return Ok((point, 0.0));
    }
    let sq = |v: f64| {
        let rise = (h.eval(v) - b0).max(0.0);
        (v - a0) * (v - a0) + rise * rise
    };
    let v0 = dom.clamp(a0);
    let r0 = sq(v0).sqrt();
    let lo = dom.lo.max(a0 - r0);
    let hi = dom.hi.min(a0 + r0);
    let (v, d2) = if hi > lo { minimize_unimodal(sq, lo, hi, SEARCH_TOL) } else { (v0, sq(v0)) };
    let (v, d2) = if d2 <= sq(v0) { (v, d2) } else { (v0, sq(v0)) };
    Ok(([v, h.eval(v).max(b0)], d2.sqrt()))
}

// ---------------------------------------------------------------------------
// Planar convex bodies

/// Compact convex subset of the plane.
#[derive(Clone, Debug, PartialEq)]
pub enum ConvexBody2 {
    Disk { center: Point, radius: f64 },
    /// Counterclockwise hull vertices (one vertex for a point, two for a segment).
    Polygon(Vec<Point>),
}

impl ConvexBody2 {
    pub fn disk(center: Point, radius: f64) -> Self {
        Self::Disk { center, radius: radius.max(0.0) }
    }

    /// Convex hull of the given points.
    pub fn polygon(points: &[Point]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyDomain);
        }
        Ok(Self::Polygon(convex_hull(points)))
    }

    pub fn vertices(&self) -> Option<&[Point]> {
        match self {
            Self::Polygon(v) => Some(v),
            Self::Disk { .. } => None,
        }
    }

    pub fn bounding_radius(&self) -> f64 {
        match self {
            Self::Disk { center, radius } => norm(*center) + radius,
            Self::Polygon(v) => v.iter().map(|p| norm(*p)).fold(0.0, f64::max),
        }
    }

    pub fn translate(&self, t: Point) -> Self {
        match self {
            Self::Disk { center, radius } => Self::Disk { center: add(*center, t), radius: *radius },
            Self::Polygon(v) => Self::Polygon(v.iter().map(|p| add(*p, t)).collect()),
        }
    }

    /// Membership tested against the support function at `dirs` uniform directions.
    pub fn contains_by_support(&self, p: Point, dirs: usize, tol: f64) -> bool {
        (0..dirs).all(|j| {
            let th = 2.0 * PI * j as f64 / dirs as f64;
            let n = [th.cos(), th.sin()];
            dot(n, p) <= support(self, n) + tol
        })
    }
}

pub fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

pub fn cross(a: Point, b: Point) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

pub fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

pub fn add(a: Point, b: Point) -> Point {
    [a[0] + b[0], a[1] + b[1]]
}

pub fn norm(a: Point) -> f64 {
    a[0].hypot(a[1])
}

/// Andrew's monotone chain; drops duplicate and collinear points.
pub fn convex_hull(points: &[Point]) -> Vec<Point> {
    let mut pts: Vec<Point> = points.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() <= 2 {
        return pts;
    }
    let mut hull: Vec<Point> = Vec::with_capacity(pts.len() + 1);
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Point>> =
            if pass == 0 { Box::new(pts.iter()) } else { Box::new(pts.iter().rev()) };
        for &p in iter {
            while hull.len() >= start + 2 {
                let o = hull[hull.len() - 2];
                let a = hull[hull.len() - 1];
                if cross(sub(a, o), sub(p, o)) <= 0.0 {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(p);
        }
        hull.pop();
    }
    if hull.len() < 2 {
        // all points coincide after rounding; keep the extreme pair
        return vec![pts[0], pts[pts.len() - 1]];
    }
    hull
}

/// Support function `sup_{y in C} <n, y>`.
pub fn support(body: &ConvexBody2, direction: Point) -> f64 {
    match body {
        ConvexBody2::Disk { center, radius } => dot(*center, direction) + radius * norm(direction),
        ConvexBody2::Polygon(v) => v.iter().map(|p| dot(*p, direction)).fold(-INF, f64::max),
    }
}

/// Steiner point `2 ∫ h_C(n) n dσ(n)`.
///
/// For polygons the support function equals `<v_i, n>` on the normal cone of
/// vertex `v_i`, so the integral is evaluated arc by arc in closed form.
pub fn steiner_point(body: &ConvexBody2) -> Point {
    match body {
        ConvexBody2::Disk { center, .. } => *center,
        ConvexBody2::Polygon(v) => polygon_steiner(v),
    }
}

fn polygon_steiner(hull: &[Point]) -> Point {
    match hull.len() {
        0 => [f64::NAN, f64::NAN],
        1 => hull[0],
        2 => [0.5 * (hull[0][0] + hull[1][0]), 0.5 * (hull[0][1] + hull[1][1])],
        m => {
            let normals: Vec<Point> = (0..m)
                .map(|i| {
                    let e = sub(hull[(i + 1) % m], hull[i]);
                    let l = norm(e);
                    [e[1] / l, -e[0] / l]
                })
                .collect();
            let mut s = [0.0, 0.0];
            for i in 0..m {
                let a = normals[(i + m - 1) % m];
                let b = normals[i];
                let delta = cross(a, b).atan2(dot(a, b));
                let (s2a, c2a) = (2.0 * a[0] * a[1], a[0] * a[0] - a[1] * a[1]);
                let (s2b, c2b) = (2.0 * b[0] * b[1], b[0] * b[0] - b[1] * b[1]);
                let icc = 0.5 * delta + 0.25 * (s2b - s2a);
                let iss = 0.5 * delta - 0.25 * (s2b - s2a);
                let ics = 0.25 * (c2a - c2b);
                let v = hull[i];
                s[0] += icc * v[0] + ics * v[1];
                s[1] += ics * v[0] + iss * v[1];
            }
            [s[0] / PI, s[1] / PI]
        }
    }
}

/// Steiner point by the uniform-direction rule with `k` and `2k` directions;
/// fails when the two estimates differ by more than `tol`.
pub fn steiner_point_quadrature(body: &ConvexBody2, k: usize, tol: f64) -> Result<Point> {
    let rule = |k: usize| {
        let mut s = [0.0, 0.0];
        for j in 0..k {
            let th = 2.0 * PI * (j as f64 + 0.5) / k as f64;
            let n = [th.cos(), th.sin()];
            let h = support(body, n);
            s[0] += h * n[0];
            s[1] += h * n[1];
        }
        [2.0 * s[0] / k as f64, 2.0 * s[1] / k as f64]
    };
    let coarse = rule(k);
    let fine = rule(2 * k);
    let diff = norm(sub(coarse, fine));
    if diff > tol {
        return Err(Error::QuadratureNonConvergence { diff, tol });
    }
    Ok(fine)
}

/// Polygonal inner approximation of `epi h ∩ B(center, radius)` with about
/// `vertices` vertices, all on the boundary of the intersection.
pub fn epigraph_cap(h: &ConvexFn1D, center: Point, radius: f64, vertices: usize) -> Result<ConvexBody2> {
    let [cv, cw] = center;
    let r = radius.max(0.0);
    let span = Interval { lo: cv - r, hi: cv + r };
    let gap_of = || project_to_epigraph(h, center).map(|(_, d)| d - r).unwrap_or(INF);
    let Some(j0) = h.domain.intersect(&span) else {
        return Err(Error::EmptyIntersection { gap: gap_of() });
    };
    if r == 0.0 {
        return if h.in_epigraph(center) {
            Ok(ConvexBody2::Polygon(vec![center]))
        } else {
            Err(Error::EmptyIntersection { gap: gap_of() })
        };
    }
    let half = |v: f64| (r * r - (v - cv) * (v - cv)).max(0.0).sqrt();
    let upper = |v: f64| cw + half(v);
    let lower = |v: f64| h.eval(v).max(cw - half(v));
    let g = |v: f64| h.eval(v) - upper(v);
    let (vm, gm) = if j0.width() > 0.0 { minimize_unimodal(g, j0.lo, j0.hi, SEARCH_TOL * 1e-2) } else { (j0.lo, g(j0.lo)) };
    let slack = 1e-12 * (1.0 + r + cw.abs());
    if gm > slack {
        return Err(Error::EmptyIntersection { gap: gap_of() });
    }
    let v1 = if g(j0.lo) <= 0.0 { j0.lo } else { bisect_boundary(g, vm, j0.lo) };
    let v2 = if g(j0.hi) <= 0.0 { j0.hi } else { bisect_boundary(g, vm, j0.hi) };

    let per = (vertices / 4).max(4);
    let mut nodes: Vec<f64> = linspace(v1, v2, per + 1);
    for i in 0..=per {
        let v = cv + r * (PI * i as f64 / per as f64).cos();
        if v > v1 && v < v2 {
            nodes.push(v);
        }
    }
    nodes.extend(h.breakpoints.iter().copied().filter(|&b| b > v1 && b < v2));
    nodes.push(vm);
    nodes.sort_by(f64::total_cmp);
    nodes.dedup();

    let mut pts: Vec<Point> = Vec::with_capacity(2 * nodes.len());
    for &v in &nodes {
        let up = upper(v);
        let lo = lower(v).min(up);
        pts.push([v, lo]);
        pts.push([v, up]);
    }
    Ok(ConvexBody2::Polygon(convex_hull(&pts)))
}

// ---------------------------------------------------------------------------
// Hausdorff distance

pub trait HausdorffDistance {
    fn hausdorff(&self, other: &Self) -> f64;
}

impl HausdorffDistance for Interval {
    fn hausdorff(&self, other: &Self) -> f64 {
        let gap = |a: f64, b: f64| if a == b { 0.0 } else { (a - b).abs() };
        gap(self.lo, other.lo).max(gap(self.hi, other.hi))
    }
}

/// Number of directions used for the body metric.
pub const HAUSDORFF_DIRECTIONS: usize = 3600;

impl HausdorffDistance for ConvexBody2 {
    /// `sup_n |h_C(n) - h_D(n)|`, sampled on a fixed uniform direction set.
    fn hausdorff(&self, other: &Self) -> f64 {
        (0..HAUSDORFF_DIRECTIONS)
            .map(|j| {
                let th = 2.0 * PI * j as f64 / HAUSDORFF_DIRECTIONS as f64;
                let n = [th.cos(), th.sin()];
                (support(self, n) - support(other, n)).abs()
            })
            .fold(0.0, f64::max)
    }
}

pub fn hausdorff_distance<T: HausdorffDistance>(c: &T, d: &T) -> f64 {
    c.hausdorff(d)
}
