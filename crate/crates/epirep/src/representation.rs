//! Control triples `(U, f, l)` representing a Hamiltonian: the Steiner-selection
//! construction, explicit triples, sampled verification of the epigraphical
//! sandwich and the growth/Lipschitz bounds, and the flawed-ω counterexamples.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::convex_core::{epigraph_cap, linspace, project_to_epigraph, steiner_point, ConvexFn1D, Point, CAP_VERTICES};
use crate::error::{Error, Result};
use crate::ext::{is_inf, INF};
use crate::hamiltonians::{Coefficient, Fn1, Fn2, HamiltonianSpec};

/// Control set `U`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ControlSet {
    Interval { lo: f64, hi: f64 },
    UnitBall { dim: usize },
    Cube { dim: usize, lo: f64, hi: f64 },
}

impl ControlSet {
    pub fn dim(&self) -> usize {
        match self {
            Self::Interval { .. } => 1,
            Self::UnitBall { dim } | Self::Cube { dim, .. } => *dim,
        }
    }

    pub fn contains(&self, u: &[f64]) -> bool {
        match self {
            Self::Interval { lo, hi } => u.len() == 1 && *lo <= u[0] && u[0] <= *hi,
            Self::UnitBall { dim } => u.len() == *dim && u.iter().map(|c| c * c).sum::<f64>() <= 1.0 + 1e-12,
            Self::Cube { dim, lo, hi } => u.len() == *dim && u.iter().all(|c| lo <= c && c <= hi),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    #[serde(rename = "paper-explicit")]
    Explicit,
    SteinerBuilt,
    FlawedOmega,
    Modified,
}

pub type TripleFn = Arc<dyn Fn(f64, f64, &[f64]) -> (f64, f64) + Send + Sync>;

/// `(U, f, l)` with `f` scalar (state dimension one).
#[derive(Clone)]
pub struct RepresentationTriple {
    pub name: String,
    pub control_set: ControlSet,
    pub provenance: Provenance,
    eval: TripleFn,
}

impl fmt::Debug for RepresentationTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RepresentationTriple")
            .field("name", &self.name)
            .field("control_set", &self.control_set)
            .field("provenance", &self.provenance)
            .finish_non_exhaustive()
    }
}

impl RepresentationTriple {
    pub fn new(
        name: impl Into<String>,
        control_set: ControlSet,
        provenance: Provenance,
        eval: impl Fn(f64, f64, &[f64]) -> (f64, f64) + Send + Sync + 'static,
    ) -> Self {
        Self { name: name.into(), control_set, provenance, eval: Arc::new(eval) }
    }

    pub fn control_dim(&self) -> usize {
        self.control_set.dim()
    }

    /// `(f, l)(t, x, u)`.
    pub fn eval(&self, t: f64, x: f64, u: &[f64]) -> (f64, f64) {
        (self.eval)(t, x, u)
    }

    pub fn f(&self, t: f64, x: f64, u: &[f64]) -> f64 {
        self.eval(t, x, u).0
    }

    pub fn l(&self, t: f64, x: f64, u: &[f64]) -> f64 {
        self.eval(t, x, u).1
    }

    /// Image `(f, l)(t, x, u)` over the sample set.
    pub fn image(&self, t: f64, x: f64, samples: &ControlSamples) -> Vec<(f64, f64)> {
        samples.points.iter().map(|u| self.eval(t, x, u)).collect()
    }
}

/// Finite sample of a control set.
#[derive(Clone, Debug, PartialEq)]
pub struct ControlSamples {
    pub points: Vec<Vec<f64>>,
    /// Covering radius: every control lies within this distance of a sample.
    pub modulus: f64,
}

impl ControlSamples {
    /// Polar grid of the unit disk: the centre plus `radii - 1` rings of `angles` points.
    pub fn polar(radii: usize, angles: usize) -> Self {
        let radii = radii.max(2);
        let mut points = vec![vec![0.0, 0.0]];
        for j in 1..radii {
            let r = j as f64 / (radii - 1) as f64;
            for k in 0..angles {
                let th = 2.0 * PI * k as f64 / angles as f64;
                points.push(vec![r * th.cos(), r * th.sin()]);
            }
        }
        let dr = 1.0 / (radii - 1) as f64;
        let chord = (PI / angles as f64).sin();
        Self { points, modulus: (0.25 * dr * dr + chord * chord).sqrt() }
    }

    /// Default unit-disk sampling (21 radii × 72 angles).
    pub fn default_disk() -> Self {
        Self::polar(21, 72)
    }

    /// Uniform points of `[lo, hi]` plus extra points.
    pub fn interval(lo: f64, hi: f64, n: usize, extra: &[f64]) -> Self {
        let mut pts = linspace(lo, hi, n);
        pts.extend_from_slice(extra);
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        let modulus = pts.windows(2).map(|w| 0.5 * (w[1] - w[0])).fold(0.0, f64::max);
        Self { points: pts.into_iter().map(|u| vec![u]).collect(), modulus }
    }

    /// Tensor grid of `[lo, hi]^2` with `n` points per axis.
    pub fn square(lo: f64, hi: f64, n: usize) -> Self {
        let axis = linspace(lo, hi, n);
        let points = axis.iter().flat_map(|&a| axis.iter().map(move |&b| vec![a, b])).collect();
        let h = (hi - lo) / (n.max(2) - 1) as f64;
        Self { points, modulus: h / std::f64::consts::SQRT_2 }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

// ---------------------------------------------------------------------------
// Steiner-selection construction

/// How the cap centre `ω(t, x) u` is scaled.
#[derive(Clone)]
pub enum OmegaPolicy {
    /// `ω = 2λ` with the Hamiltonian's own λ.
    TwiceLambda,
    /// `ω = 2λ̃` for a caller-supplied certificate `λ̃`.
    Lambda(Fn2),
    /// `ω = c(t)(1 + |x|) + ϱ(t, x) + |H(t, x, 0)|`, `ϱ = max{0, sup H*(t, x, ·)}`.
    Flawed { c: Fn1 },
}

impl fmt::Debug for OmegaPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::TwiceLambda => write!(f, "TwiceLambda"),
            Self::Lambda(_) => write!(f, "Lambda(..)"),
            Self::Flawed { .. } => write!(f, "Flawed(..)"),
        }
    }
}

/// `ϱ(t, x) = max{0, sup_{v ∈ dom} H*(t, x, v)}` from the closed form.
pub fn rho(spec: &HamiltonianSpec, t: f64, x: f64) -> Result<f64> {
    Ok(spec.conjugate(t, x)?.sup_value(2001).max(0.0))
}

pub fn omega(spec: &HamiltonianSpec, policy: &OmegaPolicy, t: f64, x: f64) -> Result<f64> {
    Ok(match policy {
        OmegaPolicy::TwiceLambda => 2.0 * spec.lambda(t, x),
        OmegaPolicy::Lambda(l) => 2.0 * l(t, x),
        OmegaPolicy::Flawed { c } => c(t) * (1.0 + x.abs()) + rho(spec, t, x)? + spec.h(t, x, 0.0).abs(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SteinerSettings {
    pub cap_vertices: usize,
}

impl Default for SteinerSettings {
    fn default() -> Self {
        Self { cap_vertices: CAP_VERTICES }
    }
}

/// `S[E ∩ B(z, 2 dist(z, E))]` for `E = epi h`; equals `z` when `z ∈ E`.
pub fn steiner_select(h: &ConvexFn1D, z: Point, settings: SteinerSettings) -> Point {
    if h.in_epigraph(z) {
        return z;
    }
    let Ok((proj, d)) = project_to_epigraph(h, z) else {
        return [f64::NAN, f64::NAN];
    };
    match epigraph_cap(h, z, 2.0 * d, settings.cap_vertices) {
        Ok(cap) => steiner_point(&cap),
        Err(_) => proj,
    }
}

/// Builds `(B, f, l)` with `(f, l)(t, x, u) = S[E(t,x) ∩ B(ω u, 2 dist(ω u, E(t,x)))]`.
pub fn build_epigraphical_representation(
    spec: &HamiltonianSpec,
    policy: OmegaPolicy,
    settings: SteinerSettings,
) -> Result<RepresentationTriple> {
    if spec.conjugate.is_none() {
        return Err(Error::NoClosedForm(spec.name.clone()));
    }
    let spec_c = spec.clone();
    let provenance = match policy {
        OmegaPolicy::Flawed { .. } => Provenance::FlawedOmega,
        _ => Provenance::SteinerBuilt,
    };
    let name = format!("{}-steiner", spec.name);
    Ok(RepresentationTriple::new(name, ControlSet::UnitBall { dim: 2 }, provenance, move |t, x, u| {
        let prof = match spec_c.conjugate(t, x) {
            Ok(p) => p,
            Err(_) => return (f64::NAN, f64::NAN),
        };
        let w = omega(&spec_c, &policy, t, x).unwrap_or(f64::NAN);
        let z = [w * u[0], w * u[1]];
        let s = steiner_select(&prof.func, z, settings);
        (s[0], s[1])
    }))
}

// ---------------------------------------------------------------------------
// Explicit triples

fn ex35_fl(a: f64, e: f64, x: f64, u: f64) -> (f64, f64) {
    let ax = a * x.abs();
    if u <= -1.0 {
        (-ax - 1.0, a * e)
    } else if u <= -0.5 {
        (ax * (2.0 * u + 1.0) - 1.0, -a * (2.0 * u + 1.0) * e)
    } else if u <= 0.5 {
        (2.0 * u, 0.0)
    } else if u <= 1.0 {
        (ax * (2.0 * u - 1.0) + 1.0, a * (2.0 * u - 1.0) * e)
    } else {
        (ax + 1.0, a * e)
    }
}

/// Explicit piecewise-linear triple `([-1, 1], f, l)` for the Hamiltonian
/// `max{α|p||x| - αe^{-γt}, 0} + |p|`.
pub fn ex35_explicit_triple(alpha: Coefficient, gamma: f64) -> RepresentationTriple {
    RepresentationTriple::new("ex35-explicit", ControlSet::Interval { lo: -1.0, hi: 1.0 }, Provenance::Explicit, move |t, x, u| {
        ex35_fl(alpha.eval(t), (-gamma * t).exp(), x, u[0])
    })
}

/// Two-control variant `f̂ = f(u1)`, `l̂ = l(u1) + min{|u2|, 1}` on `[-1, 1]^2`.
pub fn ex35_modified_triple(alpha: Coefficient, gamma: f64) -> RepresentationTriple {
    RepresentationTriple::new(
        "ex35-modified",
        ControlSet::Cube { dim: 2, lo: -1.0, hi: 1.0 },
        Provenance::Modified,
        move |t, x, u| {
            let (f, l) = ex35_fl(alpha.eval(t), (-gamma * t).exp(), x, u[0]);
            (f, l + u[1].abs().min(1.0))
        },
    )
}

/// Special points of the explicit triple's control interval.
pub const EX35_KNOTS: [f64; 5] = [-1.0, -0.5, 0.0, 0.5, 1.0];

// ---------------------------------------------------------------------------
// Reconstruction

/// `max_u { p f(t,x,u) - l(t,x,u) }` over the samples.
pub fn reconstruct_hamiltonian(triple: &RepresentationTriple, t: f64, x: f64, p: f64, samples: &ControlSamples) -> f64 {
    augmented_hamiltonian(triple, t, x, p, 1.0, samples)
}

/// `max_u { p f - q l }` over the samples.
pub fn augmented_hamiltonian(triple: &RepresentationTriple, t: f64, x: f64, p: f64, q: f64, samples: &ControlSamples) -> f64 {
    samples
        .points
        .iter()
        .map(|u| {
            let (f, l) = triple.eval(t, x, u);
            p * f - q * l
        })
        .fold(-INF, f64::max)
}

/// Reconstruction from a precomputed image.
pub fn sup_over_image(image: &[(f64, f64)], p: f64, q: f64) -> f64 {
    image.iter().map(|(f, l)| p * f - q * l).fold(-INF, f64::max)
}

// ---------------------------------------------------------------------------
// Verification

#[derive(Clone, Debug)]
pub struct RepSampleGrid {
    pub t: Vec<f64>,
    pub x: Vec<f64>,
    pub samples: ControlSamples,
    /// v-nodes per domain for coverage.
    pub v_nodes: usize,
    pub inclusion_tol: f64,
    pub coverage_tol: f64,
}

impl RepSampleGrid {
    pub fn new(t: Vec<f64>, x: Vec<f64>, samples: ControlSamples) -> Self {
        Self { t, x, samples, v_nodes: 201, inclusion_tol: 1e-6, coverage_tol: 1e-2 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EpigraphicalReport {
    pub evaluated: usize,
    pub inclusion_violations: usize,
    /// `max (H*(f) - l)` over samples (`inf` if some `f` leaves the domain).
    pub worst_inclusion: f64,
    pub worst_inclusion_at: Option<[f64; 3]>,
    /// `max_v min_u |f - v| + |l - H*(v)|`.
    pub coverage_gap: f64,
    pub worst_gap_at: Option<[f64; 3]>,
    /// Hausdorff distance between `[min f, max f]` and `dom H*`.
    pub domain_gap: f64,
    pub pass: bool,
}

pub fn verify_epigraphical(triple: &RepresentationTriple, spec: &HamiltonianSpec, grid: &RepSampleGrid) -> Result<EpigraphicalReport> {
    let mut rep = EpigraphicalReport {
        evaluated: 0,
        inclusion_violations: 0,
        worst_inclusion: -INF,
        worst_inclusion_at: None,
        coverage_gap: 0.0,
        worst_gap_at: None,
        domain_gap: 0.0,
        pass: false,
    };
    for &t in &grid.t {
        for &x in &grid.x {
            let prof = spec.conjugate(t, x)?;
            let image = triple.image(t, x, &grid.samples);
            let (mut fmin, mut fmax) = (INF, -INF);
            for (u, &(f, l)) in grid.samples.points.iter().zip(&image) {
                rep.evaluated += 1;
                fmin = fmin.min(f);
                fmax = fmax.max(f);
                let ex = if f.is_nan() || l.is_nan() { INF } else { prof.eval(f) - l };
                if ex > rep.worst_inclusion {
                    rep.worst_inclusion = ex;
                    rep.worst_inclusion_at = Some([t, x, u[0]]);
                }
                if ex > grid.inclusion_tol {
                    rep.inclusion_violations += 1;
                }
            }
            let d = prof.domain();
            let mut vs = d.linspace(grid.v_nodes);
            vs.extend(prof.func.breakpoints.iter().copied().filter(|b| d.contains(*b)));
            for v in vs {
                let hv = prof.eval(v);
                let gap = image.iter().map(|(f, l)| (f - v).abs() + (l - hv).abs()).fold(INF, f64::min);
                if gap > rep.coverage_gap {
                    rep.coverage_gap = gap;
                    rep.worst_gap_at = Some([t, x, v]);
                }
            }
            let span = crate::convex_core::Interval { lo: fmin, hi: fmax };
            rep.domain_gap = rep.domain_gap.max(crate::convex_core::hausdorff_distance(&span, &d));
        }
    }
    rep.pass = rep.inclusion_violations == 0 && rep.coverage_gap <= grid.coverage_tol;
    Ok(rep)
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundsReport {
    /// `max (|f| + |l|) / (20 λ)`.
    pub a2_max_ratio: f64,
    pub a2_violations: usize,
    /// `min (l - φ(t))`.
    pub a4_min_margin: f64,
    pub a4_violations: usize,
    /// `max |Δ(f, l)| / |x - y|` over sampled pairs.
    pub a1_max_quotient: f64,
    /// `max (quotient - 40(N+1)k(t))`.
    pub a1_max_excess: f64,
    pub a1_violations: usize,
    pub pairs: usize,
    pub pass: bool,
}

/// Checks `|f| + |l| <= 20λ`, `l >= φ` and the x-Lipschitz bound `40(N+1)k(t)`
/// (`N = 1`) on the grid; `lipschitz_tol` is added to the Lipschitz bound.
pub fn verify_bounds(triple: &RepresentationTriple, spec: &HamiltonianSpec, grid: &RepSampleGrid, lipschitz_tol: f64) -> BoundsReport {
    let mut rep = BoundsReport {
        a2_max_ratio: 0.0,
        a2_violations: 0,
        a4_min_margin: INF,
        a4_violations: 0,
        a1_max_quotient: 0.0,
        a1_max_excess: -INF,
        a1_violations: 0,
        pairs: 0,
        pass: false,
    };
    for &t in &grid.t {
        let images: Vec<Vec<(f64, f64)>> = grid.x.iter().map(|&x| triple.image(t, x, &grid.samples)).collect();
        let phi = (spec.phi)(t);
        for (ix, &x) in grid.x.iter().enumerate() {
            let lam = spec.lambda(t, x);
            for &(f, l) in &images[ix] {
                let ratio = (f.abs() + l.abs()) / (20.0 * lam);
                rep.a2_max_ratio = rep.a2_max_ratio.max(ratio);
                if !(f.abs() + l.abs() <= 20.0 * lam) {
                    rep.a2_violations += 1;
                }
                let m = l - phi;
                rep.a4_min_margin = rep.a4_min_margin.min(m);
                if !(m >= 0.0) {
                    rep.a4_violations += 1;
                }
            }
        }
        let bound = 40.0 * 2.0 * (spec.k)(t);
        for i in 0..grid.x.len() {
            for j in (i + 1)..grid.x.len() {
                let dx = (grid.x[i] - grid.x[j]).abs();
                if dx == 0.0 {
                    continue;
                }
                for (a, b) in images[i].iter().zip(&images[j]) {
                    rep.pairs += 1;
                    let q = ((a.0 - b.0).abs() + (a.1 - b.1).abs()) / dx;
                    rep.a1_max_quotient = rep.a1_max_quotient.max(q);
                    rep.a1_max_excess = rep.a1_max_excess.max(q - bound);
                    if !(q <= bound + lipschitz_tol) {
                        rep.a1_violations += 1;
                    }
                }
            }
        }
    }
    rep.pass = rep.a2_violations == 0 && rep.a4_violations == 0 && rep.a1_violations == 0;
    rep
}

// ---------------------------------------------------------------------------
// Counterexamples

#[derive(Clone, Debug, Serialize)]
pub struct Ex33Row {
    pub t: f64,
    pub f_at_0: f64,
    pub l_at_0: f64,
    pub f_near_0: f64,
    pub jump: f64,
    pub expected_jump: f64,
    pub f_at_half: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ModulusRow {
    pub t: f64,
    pub x: f64,
    pub u: [f64; 2],
    pub modulus: f64,
    pub bound: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Ex33Report {
    pub u: [f64; 2],
    pub rows: Vec<Ex33Row>,
    pub max_jump_error: f64,
    pub lambda_omega: Vec<ModulusRow>,
    pub lambda_omega_max_excess: f64,
    pub pass: bool,
}

/// Offset used for the one-sided limit at `x = 0`.
pub const EX33_PROBE: f64 = 1e-12;

/// Flawed-ω build for `max{|p||x| - e^{-t}, 0} + |p|` at `u = (1/3, 1/3)` versus the `ω = 2λ` build.
pub fn reproduce_ex33_discontinuity(t_samples: &[f64]) -> Result<Ex33Report> {
    let spec = crate::hamiltonians::make_ex33(1.0)?;
    let flawed = build_epigraphical_representation(
        &spec,
        OmegaPolicy::Flawed { c: Arc::new(|_| 1.0) },
        SteinerSettings::default(),
    )?;
    let twice_lambda = build_epigraphical_representation(&spec, OmegaPolicy::TwiceLambda, SteinerSettings::default())?;
    let u = [1.0 / 3.0, 1.0 / 3.0];
    let mut rows = Vec::new();
    let mut max_err: f64 = 0.0;
    for &t in t_samples {
        let (f0, l0) = flawed.eval(t, 0.0, &u);
        let (fe, _) = flawed.eval(t, EX33_PROBE, &u);
        let (fh, _) = flawed.eval(t, 0.5, &u);
        let jump = fe - f0;
        let expected = (-t).exp() / 3.0;
        max_err = max_err.max((jump - expected).abs());
        rows.push(Ex33Row { t, f_at_0: f0, l_at_0: l0, f_near_0: fe, jump, expected_jump: expected, f_at_half: fh });
    }
    let mut lambda_rows = Vec::new();
    let mut excess = -INF;
    let probe_u = [u, [0.0, 0.0], [0.9, -0.2], [-0.5, -0.8], [0.1, 0.95]];
    for &t in t_samples {
        for &uu in &probe_u {
            let e0 = twice_lambda.eval(t, 0.0, &uu);
            for &x in &[-1.0, -0.5, -0.1, -0.01, -1e-3, 1e-3, 0.01, 0.1, 0.5, 1.0] {
                let e = twice_lambda.eval(t, x, &uu);
                let modulus = (e.0 - e0.0).abs() + (e.1 - e0.1).abs();
                let bound = 80.0 * (spec.k)(t) * x.abs();
                excess = excess.max(modulus - bound);
                lambda_rows.push(ModulusRow { t, x, u: uu, modulus, bound });
            }
        }
    }
    Ok(Ex33Report {
        u,
        rows,
        max_jump_error: max_err,
        lambda_omega: lambda_rows,
        lambda_omega_max_excess: excess,
        pass: max_err <= 1e-9 && excess <= 1e-3,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct Ex34Report {
    pub i: Vec<u32>,
    pub l: Vec<f64>,
    pub f: Vec<[f64; 2]>,
    pub slope: f64,
    pub strictly_increasing: bool,
    pub pass: bool,
}

/// Flawed-ω triple of `|(p1, p2)|` on `A = (-inf, 0] × R` at the boundary points
/// `(0, i)` and control `(0, 0, 1)`: the cost equals `ω = 1 + i`.
pub fn reproduce_ex34_unboundedness(i_max: u32) -> Result<Ex34Report> {
    if i_max < 2 {
        return Err(Error::InvalidParameter("i_max must be at least 2".into()));
    }
    let axis = crate::hamiltonians::make_ex34();
    let rho = rho(&axis, 0.0, 0.0)?;
    let c = 1.0;
    let u = [0.0, 0.0, 1.0];
    let mut is = Vec::new();
    let mut ls = Vec::new();
    let mut fs = Vec::new();
    for i in 1..=i_max {
        let x = [0.0, i as f64];
        let h0 = 0.0f64; // |(0, 0)|
        let w = c * (1.0 + x[0].hypot(x[1])) + rho + h0.abs();
        let z = [w * u[0], w * u[1], w * u[2]];
        // H* is 0 on the unit disk: z lies in the epigraph, so (f, l) = z
        let in_epi = z[0].hypot(z[1]) <= 1.0 && z[2] >= 0.0;
        if !in_epi {
            return Err(Error::InvalidParameter("cap centre left the epigraph".into()));
        }
        is.push(i);
        fs.push([z[0], z[1]]);
        ls.push(z[2]);
    }
    let n = ls.len() as f64;
    let xm = is.iter().map(|&i| i as f64).sum::<f64>() / n;
    let ym = ls.iter().sum::<f64>() / n;
    let sxy: f64 = is.iter().zip(&ls).map(|(&i, &l)| (i as f64 - xm) * (l - ym)).sum();
    let sxx: f64 = is.iter().map(|&i| (i as f64 - xm).powi(2)).sum();
    let slope = sxy / sxx;
    let strictly_increasing = ls.windows(2).all(|w| w[1] > w[0]);
    let exact = is.iter().zip(&ls).all(|(&i, &l)| l == 1.0 + i as f64);
    Ok(Ex34Report { i: is, l: ls, f: fs, slope, strictly_increasing, pass: exact && slope == 1.0 })
}

#[derive(Clone, Debug, Serialize)]
pub struct NoGraphRow {
    pub n: u32,
    pub x_n: f64,
    pub v_n: f64,
    pub hstar: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct NoGraphReport {
    pub t: f64,
    pub rows: Vec<NoGraphRow>,
    pub target: f64,
    pub limit_value: f64,
    pub gap: f64,
    pub max_row_error: f64,
    pub pass: bool,
}

/// Witness `x_n = 1/n`, `v_n = α(t)/n + 1`: `H*(t, x_n, v_n) = α(t)e^{-γt}` for all `n`
/// while `H*(t, 0, 1) = 0`, so the graph map is not closed at `x = 0`.
pub fn no_graphical_representation_witness(spec: &HamiltonianSpec, t: f64, n_max: u32) -> Result<NoGraphReport> {
    let alpha = spec.params.alpha.clone().ok_or(Error::MissingCertificate("alpha"))?;
    let gamma = spec.params.gamma.ok_or(Error::MissingCertificate("gamma"))?;
    let a = alpha.eval(t);
    if !(a > 0.0) {
        return Err(Error::InvalidParameter("alpha(t) must be positive".into()));
    }
    let target = a * (-gamma * t).exp();
    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    for n in 1..=n_max {
        let x_n = 1.0 / n as f64;
        let v_n = a / n as f64 + 1.0;
        let hstar = spec.hstar(t, x_n, v_n)?;
        worst = worst.max(if is_inf(hstar) { INF } else { (hstar - target).abs() });
        rows.push(NoGraphRow { n, x_n, v_n, hstar });
    }
    let limit_value = spec.hstar(t, 0.0, 1.0)?;
    let gap = target - limit_value;
    Ok(NoGraphReport { t, rows, target, limit_value, gap, max_row_error: worst, pass: worst <= 1e-12 && gap > 0.0 })
}
