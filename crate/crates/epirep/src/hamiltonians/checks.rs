//! Sampled hypothesis checkers. Every check reports the worst violation found
//! on its sample set; a pass certifies only the sampled points.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{Fn1, HamiltonianSpec};
use crate::convex_core::{linspace, normal_directions, tangent_cone, Interval};
use crate::error::{Error, Result};
use crate::ext::INF;
use crate::representation::{ControlSamples, RepresentationTriple};
use crate::value_fn::{extract_optimal_trajectory, ValueField};

/// Default absolute tolerance of the inequality checks.
pub const CHECK_TOL: f64 = 1e-9;
const MAX_WITNESSES: usize = 8;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub label: String,
    pub point: Vec<f64>,
    pub violation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckReport {
    pub condition: String,
    pub pass: bool,
    /// Largest sampled violation; `pass` iff `worst <= tolerance`.
    pub worst: f64,
    pub tolerance: f64,
    /// Worst failing points first.
    pub witnesses: Vec<Witness>,
    pub evaluated: usize,
    pub note: Option<String>,
}

struct Tracker {
    condition: String,
    tol: f64,
    worst: f64,
    witnesses: Vec<Witness>,
    evaluated: usize,
    note: Option<String>,
}

impl Tracker {
    fn new(condition: impl Into<String>, tol: f64) -> Self {
        Self { condition: condition.into(), tol, worst: -INF, witnesses: Vec::new(), evaluated: 0, note: None }
    }

    fn observe(&mut self, violation: f64, label: &str, point: impl FnOnce() -> Vec<f64>) {
        self.evaluated += 1;
        let v = if violation.is_nan() { INF } else { violation };
        if v > self.worst {
            self.worst = v;
        }
        if v > self.tol {
            let full = self.witnesses.len() >= MAX_WITNESSES;
            if full && self.witnesses.last().is_some_and(|w| w.violation >= v) {
                return;
            }
            let w = Witness { label: label.to_string(), point: point(), violation: v };
            let pos = self.witnesses.partition_point(|x| x.violation >= v);
            self.witnesses.insert(pos, w);
            self.witnesses.truncate(MAX_WITNESSES);
        }
    }

    fn finish(self) -> CheckReport {
        let worst = if self.evaluated == 0 { 0.0 } else { self.worst };
        CheckReport {
            condition: self.condition,
            pass: worst <= self.tol,
            worst,
            tolerance: self.tol,
            witnesses: self.witnesses,
            evaluated: self.evaluated,
            note: self.note,
        }
    }
}

/// `(t, x, p)` samples for the (h)″ battery.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampleGrid {
    pub t: Vec<f64>,
    pub x: Vec<f64>,
    pub p: Vec<f64>,
    /// Index strides used to form `(x, y)` and `(p, q)` pairs.
    pub strides: Vec<usize>,
    /// v-samples per conjugate domain.
    pub v_count: usize,
}

impl Default for SampleGrid {
    fn default() -> Self {
        let mut t = linspace(0.0, 5.0, 51);
        t.extend([10.0, 20.0]);
        Self { t, x: linspace(-5.0, 5.0, 101), p: linspace(-10.0, 10.0, 201), strides: vec![1, 3, 10, 37], v_count: 101 }
    }
}

impl SampleGrid {
    /// Smaller grid with the same ranges.
    pub fn coarse() -> Self {
        let mut t = linspace(0.0, 5.0, 11);
        t.extend([10.0, 20.0]);
        Self { t, x: linspace(-5.0, 5.0, 41), p: linspace(-10.0, 10.0, 81), strides: vec![1, 3, 10, 37], v_count: 51 }
    }

    fn pairs(&self, n: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.strides.iter().flat_map(move |&s| (0..n.saturating_sub(s)).map(move |i| (i, i + s)))
    }
}

/// (H1)–(H7) on the sample grid, one report each.
pub fn check_hh(spec: &HamiltonianSpec, grid: &SampleGrid) -> Vec<CheckReport> {
    let tol = CHECK_TOL;
    let mut h1 = Tracker::new("H1", tol);
    h1.note = Some("midpoint convexity in p; continuity in x covered by H5".into());
    let mut h2 = Tracker::new("H2", tol);
    let mut h3 = Tracker::new("H3", tol);
    let mut h4 = Tracker::new("H4", tol);
    let mut h5 = Tracker::new("H5", tol);
    let mut h6 = Tracker::new("H6", tol);
    let mut h7 = Tracker::new("H7", tol);
    let bd: Vec<f64> = spec.constraint.boundary().iter().map(|b| b.0).collect();
    let mut q_min: f64 = 0.0;
    for &t in &grid.t {
        let (phi, c, k, q) = ((spec.phi)(t), (spec.c)(t), (spec.k)(t), (spec.q_bd)(t));
        h3.observe(-c.min(k).min(q), "negative rate", || vec![t]);
        for &y in &bd {
            let l = spec.lambda(t, y);
            q_min = q_min.max(l);
            h3.observe(l - q, "boundary", || vec![t, y]);
        }
        let hv: Vec<Vec<f64>> = grid.x.iter().map(|&x| grid.p.iter().map(|&p| spec.h(t, x, p)).collect()).collect();
        let lam: Vec<f64> = grid.x.iter().map(|&x| spec.lambda(t, x)).collect();
        for (ix, &x) in grid.x.iter().enumerate() {
            h2.observe(spec.h(t, x, 0.0) + phi, "H(t,x,0)+phi", || vec![t, x]);
            h3.observe(-lam[ix], "negative lambda", || vec![t, x]);
            h3.observe(lam[ix] - c * (1.0 + x.abs()), "growth", || vec![t, x]);
            for (i, j) in grid.pairs(grid.p.len()) {
                let (p, q) = (grid.p[i], grid.p[j]);
                let mid = spec.h(t, x, 0.5 * (p + q));
                h1.observe(mid - 0.5 * (hv[ix][i] + hv[ix][j]), "midpoint", || vec![t, x, p, q]);
                h6.observe((hv[ix][i] - hv[ix][j]).abs() - lam[ix] * (p - q).abs(), "p-lipschitz", || vec![t, x, p, q]);
            }
            match spec.conjugate(t, x) {
                Ok(prof) => {
                    let d = prof.domain();
                    let mut vs = d.linspace(grid.v_count);
                    vs.extend(prof.func.breakpoints.iter().copied().filter(|b| d.contains(*b)));
                    for v in vs {
                        h7.observe(prof.eval(v).abs() - lam[ix], "|H*|", || vec![t, x, v]);
                    }
                }
                Err(_) => h7.note = Some("no closed-form conjugate".into()),
            }
        }
        for (i, j) in grid.pairs(grid.x.len()) {
            let (x, y) = (grid.x[i], grid.x[j]);
            let dx = (x - y).abs();
            h4.observe((lam[i] - lam[j]).abs() - k * dx, "lambda-lipschitz", || vec![t, x, y]);
            for (ip, &p) in grid.p.iter().enumerate() {
                h5.observe((hv[i][ip] - hv[j][ip]).abs() - k * (1.0 + p.abs()) * dx, "x-lipschitz", || vec![t, x, y, p]);
            }
        }
    }
    h3.note = Some(format!("smallest boundary bound q(t) consistent with samples: {q_min}"));
    if h7.note.is_some() {
        h7.worst = INF;
    }
    vec![h1.finish(), h2.finish(), h3.finish(), h4.finish(), h5.finish(), h6.finish(), h7.finish()]
}

/// Samples for the boundary-correction condition.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OpcSamples {
    pub t: Vec<f64>,
    /// y-points per boundary point, spread over `[b - η, b + η]` (odd keeps `b`).
    pub y_count: usize,
    pub v_count: usize,
}

impl Default for OpcSamples {
    fn default() -> Self {
        let mut t = linspace(0.0, 5.0, 11);
        t.extend([10.0, 20.0]);
        Self { t, y_count: 41, v_count: 201 }
    }
}

/// Candidate `w` interval from `min{⟨n,w⟩, ⟨n,w-v⟩} >= r` for all normals `n ∈ {±1}`.
fn opc_window(normals: &[f64], v: f64, r: f64) -> Interval {
    let mut lo = -INF;
    let mut hi = INF;
    for &n in normals {
        if n > 0.0 {
            lo = lo.max(r).max(v + r);
        } else {
            hi = hi.min(-r).min(v - r);
        }
    }
    Interval { lo, hi }
}

/// Outcome at one `(t, y, v)`: the shortest admissible move `|w - v|`, `inf` if none.
fn opc_min_move(dom: Interval, normals: &[f64], v: f64, r: f64) -> f64 {
    match dom.intersect(&opc_window(normals, v, r)) {
        None => INF,
        Some(w) => (w.clamp(v) - v).abs(),
    }
}

fn opc_points(spec: &HamiltonianSpec, eta: f64, samples: &OpcSamples) -> Vec<(f64, f64, Vec<f64>)> {
    let mut out = Vec::new();
    for &t in &samples.t {
        for (b, _) in spec.constraint.boundary() {
            for y in linspace(b - eta, b + eta, samples.y_count.max(1)) {
                out.push((t, y, normal_directions(&spec.constraint, y, eta)));
            }
        }
    }
    out
}

/// Sampled boundary-correction check: at each `(t, y, v)` with `inf_n ⟨n,v⟩ <= 0`
/// some `w ∈ dom H*(t,y,·) ∩ [v-M, v+M]` has `min{⟨n,w⟩, ⟨n,w-v⟩} >= r` for
/// all normals `n` of boundary points within `η` of `y`. The reported violation
/// is `r - max_w min_n min{...}`.
pub fn check_opc(spec: &HamiltonianSpec, eta: f64, r: f64, m: f64, samples: &OpcSamples) -> Result<CheckReport> {
    if !(eta > 0.0 && r > 0.0 && m >= 0.0) {
        return Err(Error::InvalidParameter("need eta > 0, r > 0, M >= 0".into()));
    }
    let mut tr = Tracker::new(format!("OPC(eta={eta}, r={r}, M={m})"), 1e-12);
    for (t, y, normals) in opc_points(spec, eta, samples) {
        let prof = spec.conjugate(t, y)?;
        let dom = prof.domain();
        let mut vs = dom.linspace(samples.v_count);
        vs.push(0.0);
        for v in vs.into_iter().filter(|v| dom.contains(*v)) {
            if normals.iter().map(|n| n * v).fold(INF, f64::min) > 0.0 {
                continue;
            }
            let reach = dom.intersect(&Interval { lo: v - m, hi: v + m });
            // best achievable margin over the reachable w: concave piecewise linear
            let best = reach.map_or(-INF, |w| {
                let g = |w: f64| normals.iter().map(|n| (n * w).min(n * (w - v))).fold(INF, f64::min);
                // the two normal terms cross at w = v / 2
                [w.lo, w.hi, w.clamp(0.5 * v)].into_iter().map(g).fold(-INF, f64::max)
            });
            tr.observe(r - best, "no correction", || vec![t, y, v]);
        }
    }
    if tr.evaluated == 0 {
        tr.note = Some("no boundary points sampled".into());
    }
    Ok(tr.finish())
}

/// Smallest `M` making the sampled check pass for the given `η, r` (`inf` if none).
pub fn opc_minimal_m(spec: &HamiltonianSpec, eta: f64, r: f64, samples: &OpcSamples) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (t, y, normals) in opc_points(spec, eta, samples) {
        let dom = spec.conjugate(t, y)?.domain();
        let mut vs = dom.linspace(samples.v_count);
        vs.push(0.0);
        for v in vs.into_iter().filter(|v| dom.contains(*v)) {
            if normals.iter().map(|n| n * v).fold(INF, f64::min) <= 0.0 {
                worst = worst.max(opc_min_move(dom, &normals, v, r));
            }
        }
    }
    Ok(worst)
}

/// Viability `dom H* ∩ T_A(x) ≠ ∅` and backward invariance `-dom H* ⊂ T_A(x)`
/// at sampled `(t, x)` with `x ∈ A`.
pub fn check_vic(spec: &HamiltonianSpec, t: &[f64], x: &[f64]) -> Result<CheckReport> {
    let mut tr = Tracker::new("VIC", 1e-12);
    let mut xs: Vec<f64> = x.iter().copied().filter(|&x| spec.constraint.contains(x)).collect();
    xs.extend(spec.constraint.boundary().iter().map(|b| b.0));
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    for &t in t {
        for &x in &xs {
            let dom = spec.conjugate(t, x)?.domain();
            let tc = tangent_cone(&spec.constraint, x)?;
            let gap = if dom.intersect(&tc).is_some() { 0.0 } else { (dom.lo - tc.hi).max(tc.lo - dom.hi) };
            tr.observe(gap, "viability", || vec![t, x]);
            let neg = dom.neg();
            let excess = (tc.lo - neg.lo).max(neg.hi - tc.hi).max(0.0);
            tr.observe(excess, "invariance", || vec![t, x]);
        }
    }
    Ok(tr.finish())
}

/// Random admissible rollouts for the bound checks.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RolloutSettings {
    pub t0: Vec<f64>,
    pub x0: Vec<f64>,
    pub rollouts: usize,
    pub horizon: f64,
    pub dt: f64,
    pub seed: u64,
}

impl Default for RolloutSettings {
    fn default() -> Self {
        Self { t0: vec![0.0, 1.0, 5.0], x0: vec![-3.0, -1.0, -0.25, 0.0], rollouts: 8, horizon: 10.0, dt: 0.05, seed: 7 }
    }
}

#[derive(Clone, Copy)]
enum Pick {
    Lower,
    Upper,
    Random,
}

/// Walks `x' ∈ dom H*(t, x, ·)` keeping `x ∈ A`, calling `visit(t, t - t0, x, v, H*)` per step.
fn rollouts(
    spec: &HamiltonianSpec,
    settings: &RolloutSettings,
    x0s: &[f64],
    mut visit: impl FnMut(f64, f64, f64, f64, f64),
) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let steps = (settings.horizon / settings.dt).round() as usize;
    let a = spec.constraint.as_interval();
    for &t0 in &settings.t0 {
        for &x0 in x0s.iter().filter(|&&x| a.contains(x)) {
            let picks = [Pick::Lower, Pick::Upper].into_iter().chain(std::iter::repeat_n(Pick::Random, settings.rollouts));
            for pick in picks {
                let mut x = x0;
                for k in 0..steps {
                    let t = t0 + k as f64 * settings.dt;
                    let prof = spec.conjugate(t, x)?;
                    let dom = prof.domain();
                    let room = Interval { lo: (a.lo - x) / settings.dt, hi: (a.hi - x) / settings.dt };
                    let iv = dom.intersect(&room).ok_or(Error::EmptyVelocitySet { t, x })?;
                    let v = match pick {
                        Pick::Lower => iv.lo,
                        Pick::Upper => iv.hi,
                        Pick::Random if iv.width() > 0.0 => rng.gen_range(iv.lo..=iv.hi),
                        Pick::Random => iv.lo,
                    };
                    visit(t, t - t0, x, v, prof.eval(v));
                    x = a.clamp(x + v * settings.dt);
                }
            }
        }
    }
    Ok(())
}

/// `|H*(t, x(t), ẋ(t))| <= ψ(t)` along sampled admissible trajectories; `psi`
/// overrides `spec.psi`.
pub fn check_bh(spec: &HamiltonianSpec, psi: Option<Fn1>, settings: &RolloutSettings) -> Result<CheckReport> {
    let psi = psi.or_else(|| spec.psi.clone()).ok_or(Error::MissingCertificate("psi"))?;
    let mut tr = Tracker::new("B_H", CHECK_TOL);
    rollouts(spec, settings, &settings.x0, |t, _, x, v, hs| {
        tr.observe(hs.abs() - psi(t), "running cost", || vec![t, x, v]);
    })?;
    Ok(tr.finish())
}

/// The same bound along optimal trajectories extracted from a solved field.
pub fn check_b_plus(spec: &HamiltonianSpec, field: &ValueField, starts: &[(f64, f64)], psi: Option<Fn1>) -> Result<CheckReport> {
    let psi = psi.or_else(|| spec.psi.clone()).ok_or(Error::MissingCertificate("psi"))?;
    let mut tr = Tracker::new("B+_H", CHECK_TOL);
    let mut unreliable = 0;
    for &(t0, x0) in starts {
        let traj = extract_optimal_trajectory(field, spec, t0, x0)?;
        if !traj.reliable {
            unreliable += 1;
        }
        for (k, &v) in traj.velocities.iter().enumerate() {
            let (t, x) = traj.knots[k];
            let hs = spec.hstar(t, x, v)?;
            tr.observe(hs.abs() - psi(t), "optimal running cost", || vec![t, x, v]);
        }
    }
    if unreliable > 0 {
        tr.note = Some(format!("{unreliable} trajectories stopped at the grid edge"));
    }
    Ok(tr.finish())
}

/// Control-side bound `|l(t, x(t), u)| <= ψ(t)` along constant-control rollouts
/// that stay in `A`. Also reports the largest `∫|l|` over a rollout.
pub fn check_b_control(
    triple: &RepresentationTriple,
    spec: &HamiltonianSpec,
    samples: &ControlSamples,
    psi: Option<Fn1>,
    settings: &RolloutSettings,
) -> Result<CheckReport> {
    let psi = psi.or_else(|| spec.psi.clone()).ok_or(Error::MissingCertificate("psi"))?;
    let mut tr = Tracker::new("B_control", CHECK_TOL);
    let steps = (settings.horizon / settings.dt).round() as usize;
    let mut worst_integral: f64 = 0.0;
    for &t0 in &settings.t0 {
        for &x0 in settings.x0.iter().filter(|&&x| spec.constraint.contains(x)) {
            for u in &samples.points {
                let mut x = x0;
                let mut integral = 0.0;
                let mut ok = true;
                let mut local = Vec::with_capacity(steps);
                for k in 0..steps {
                    let t = t0 + k as f64 * settings.dt;
                    let (f, l) = triple.eval(t, x, u);
                    local.push((t, x, l));
                    integral += l.abs() * settings.dt;
                    x += f * settings.dt;
                    if !spec.constraint.as_interval().contains_tol(x, 1e-12) {
                        ok = false;
                        break;
                    }
                }
                if !ok {
                    continue;
                }
                worst_integral = worst_integral.max(integral);
                for (t, x, l) in local {
                    tr.observe(l.abs() - psi(t), "control cost", || {
                        let mut p = vec![t, x];
                        p.extend_from_slice(u);
                        p
                    });
                }
            }
        }
    }
    tr.note = Some(format!("largest sampled integral of |l| over the horizon: {worst_integral:.6}"));
    Ok(tr.finish())
}

/// Class membership: (h)″ for the rescaled Hamiltonian, then `θλ <= ψ_r` and
/// the state bound along rescaled-admissible rollouts from `A ∩ rB`.
pub fn check_class_h(spec: &HamiltonianSpec, r_list: &[f64], grid: &SampleGrid, settings: &RolloutSettings) -> Result<Vec<CheckReport>> {
    let theta = spec.theta.clone().ok_or(Error::MissingCertificate("theta"))?;
    let psi_r = spec.psi_r.clone().ok_or(Error::MissingCertificate("psi_r"))?;
    let bound = spec.state_bound.clone();
    let ih = spec.rescaled()?;
    let mut reports: Vec<CheckReport> = check_hh(&ih, grid)
        .into_iter()
        .map(|mut r| {
            r.condition = format!("rescaled {}", r.condition);
            r
        })
        .collect();
    let mut tr = Tracker::new("theta*lambda <= psi_r", CHECK_TOL);
    let mut sb = Tracker::new("state bound", CHECK_TOL);
    for &r in r_list {
        let x0s: Vec<f64> = linspace(-r, r, 9);
        rollouts(&ih, settings, &x0s, |t, elapsed, x, _, _| {
            tr.observe(theta(t) * spec.lambda(t, x) - psi_r(r, t), "rollout", || vec![r, t, x]);
            if let Some(b) = &bound {
                sb.observe(x.abs() - b(r, elapsed), "rollout", || vec![r, t, x]);
            }
        })?;
    }
    reports.push(tr.finish());
    if bound.is_some() {
        reports.push(sb.finish());
    }
    Ok(reports)
}

/// `sup ∫_I φ` over windows `I ⊂ [0, horizon]` of length `σ` (start step `σ/10`,
/// composite Simpson inside each window).
pub fn lloc_modulus(phi: impl Fn(f64) -> f64, sigma: f64, horizon: f64) -> Result<f64> {
    if !(sigma > 0.0) || !(horizon > 0.0) || !horizon.is_finite() {
        return Err(Error::InvalidParameter("need sigma > 0 and a finite horizon".into()));
    }
    let sigma = sigma.min(horizon);
    const PANELS: usize = 200;
    let simpson = |a: f64| {
        let h = sigma / PANELS as f64;
        let mut s = phi(a) + phi(a + sigma);
        for i in 1..PANELS {
            s += phi(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    };
    let step = sigma / 10.0;
    let n = ((horizon - sigma) / step + 1e-9).floor() as usize;
    let mut best = -INF;
    for i in 0..=n {
        best = f64::max(best, simpson(i as f64 * step));
    }
    best = best.max(simpson(horizon - sigma));
    Ok(best)
}

pub fn all_pass(reports: &[CheckReport]) -> bool {
    reports.iter().all(|r| r.pass)
}

/// A `ψ ≡ 0` bound, useful to force violations.
pub fn zero_psi() -> Fn1 {
    Arc::new(|_| 0.0)
}
