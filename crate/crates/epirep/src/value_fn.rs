//! Backward dynamic programming for the state-constrained infinite-horizon
//! value functions, in trajectory form (`∫ H*(t, x, ẋ)`) and control form
//! (`∫ l(t, x, u)` with `ẋ = f(t, x, u)`), plus trajectory rollouts and
//! diagnostics.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::convex_core::{linspace, Interval};
use crate::error::{Error, Result};
use crate::ext::{self, is_inf, INF};
use crate::hamiltonians::HamiltonianSpec;
use crate::representation::{ControlSamples, RepresentationTriple};

/// Velocity samples spanning the admissible part of `dom H*` at each node.
pub const VELOCITY_SAMPLES: usize = 41;
/// Tolerance for `dom H*` membership of trajectory velocities.
pub const DOM_TOL: f64 = 1e-9;
const SNAP: f64 = 1e-9;
const A_TOL: f64 = 1e-12;

/// Uniform `(t, x)` grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Grid {
    pub t_nodes: Vec<f64>,
    pub x_nodes: Vec<f64>,
    pub dt: f64,
    pub dx: f64,
}

fn steps(a: f64, b: f64, h: f64, what: &str) -> Result<usize> {
    if !(h > 0.0) || !(b > a) {
        return Err(Error::InvalidParameter(format!("{what}: need a positive step and a nonempty range")));
    }
    let n = (b - a) / h;
    if (n - n.round()).abs() > 1e-6 {
        return Err(Error::InvalidParameter(format!("{what}: range is not a multiple of the step")));
    }
    Ok(n.round() as usize)
}

impl Grid {
    pub fn new(t_max: f64, dt: f64, x_min: f64, x_max: f64, dx: f64) -> Result<Self> {
        let nt = steps(0.0, t_max, dt, "t grid")?;
        let nx = steps(x_min, x_max, dx, "x grid")?;
        let t_nodes = (0..=nt).map(|i| i as f64 * dt).collect();
        let x_nodes = (0..=nx).map(|j| x_min + j as f64 * dx).collect();
        Ok(Self { t_nodes, x_nodes, dt, dx })
    }

    pub fn t_max(&self) -> f64 {
        *self.t_nodes.last().unwrap()
    }

    pub fn x_range(&self) -> Interval {
        Interval { lo: self.x_nodes[0], hi: *self.x_nodes.last().unwrap() }
    }

    /// Index of the t-layer at `t`, if `t` is a node.
    pub fn t_index(&self, t: f64) -> Option<usize> {
        let s = t / self.dt;
        let i = s.round();
        ((s - i).abs() < 1e-6 && i >= 0.0 && (i as usize) < self.t_nodes.len()).then_some(i as usize)
    }
}

/// Value table `values[i][j] = V(t_i, x_j)` with the truncation bound `∫_{T}^∞ ψ`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValueField {
    pub grid: Grid,
    #[serde(serialize_with = "ser_matrix")]
    pub values: Vec<Vec<f64>>,
    pub tail_bound: f64,
    /// Nodes in `A` where every candidate velocity leaves the x-window.
    pub window_blocked: usize,
}

fn ser_matrix<S: serde::Serializer>(m: &[Vec<f64>], s: S) -> std::result::Result<S::Ok, S::Error> {
    let v: Vec<Vec<serde_json::Value>> = m.iter().map(|r| r.iter().map(|&x| ext::to_json(x)).collect()).collect();
    v.serialize(s)
}

impl ValueField {
    pub fn from_fn(grid: Grid, tail_bound: f64, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = grid.t_nodes.iter().map(|&t| grid.x_nodes.iter().map(|&x| f(t, x)).collect()).collect();
        Self { grid, values, tail_bound, window_blocked: 0 }
    }

    /// Linear interpolation in x on layer `i`; `+inf` outside the window or
    /// across an infinite neighbour.
    pub fn interp(&self, i: usize, x: f64) -> f64 {
        interp_layer(&self.grid, &self.values[i], x)
    }

    pub fn value_at(&self, t: f64, x: f64) -> Option<f64> {
        self.grid.t_index(t).map(|i| self.interp(i, x))
    }

    /// Bilinear interpolation in `(t, x)`; `+inf` off the grid or across infinite nodes.
    pub fn eval(&self, t: f64, x: f64) -> f64 {
        let nt = self.grid.t_nodes.len();
        let s = t / self.grid.dt;
        if s < -SNAP || s > (nt - 1) as f64 + SNAP {
            return INF;
        }
        let i = s.floor().clamp(0.0, (nt - 1) as f64) as usize;
        let frac = s - i as f64;
        if frac <= SNAP || i == nt - 1 {
            return self.interp(i, x);
        }
        if frac >= 1.0 - SNAP {
            return self.interp(i + 1, x);
        }
        let (a, b) = (self.interp(i, x), self.interp(i + 1, x));
        if is_inf(a) || is_inf(b) {
            INF
        } else {
            a + frac * (b - a)
        }
    }

    /// `max |V|` over finite nodes.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().flatten().filter(|v| !is_inf(v.abs())).fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn finite_count(&self) -> usize {
        self.values.iter().flatten().filter(|v| !is_inf(v.abs())).count()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,x,value\n");
        for (i, &t) in self.grid.t_nodes.iter().enumerate() {
            for (j, &x) in self.grid.x_nodes.iter().enumerate() {
                let _ = writeln!(s, "{t},{x},{}", ext::fmt(self.values[i][j]));
            }
        }
        s
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        crate::io::write_atomic(path, self.to_csv().as_bytes())
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        crate::io::write_json(path, self)
    }
}

fn interp_layer(grid: &Grid, layer: &[f64], y: f64) -> f64 {
    let x0 = grid.x_nodes[0];
    let n = layer.len();
    let s = (y - x0) / grid.dx;
    if s < -SNAP || s > (n - 1) as f64 + SNAP {
        return INF;
    }
    let i = s.floor().clamp(0.0, (n - 1) as f64) as usize;
    let frac = s - i as f64;
    if frac <= SNAP || i == n - 1 {
        return layer[i];
    }
    if frac >= 1.0 - SNAP {
        return layer[i + 1];
    }
    let (a, b) = (layer[i], layer[i + 1]);
    if is_inf(a) || is_inf(b) {
        INF
    } else {
        a + frac * (b - a)
    }
}

/// Admissible velocity interval `dom ∩ {v : x + v dt ∈ target}`.
fn admissible(dom: Interval, x: f64, dt: f64, target: Interval) -> Option<Interval> {
    dom.intersect(&Interval { lo: (target.lo - x) / dt - A_TOL, hi: (target.hi - x) / dt + A_TOL })
}

enum Candidates {
    Some(Vec<f64>),
    /// Admissible w.r.t. `A` but every velocity leaves the window.
    Blocked,
}

fn velocity_candidates(spec: &HamiltonianSpec, grid: &Grid, t: f64, x: f64) -> Result<(Candidates, crate::legendre::ConjugateProfile)> {
    let prof = spec.conjugate(t, x)?;
    let dom = prof.domain();
    let a = spec.constraint.as_interval();
    if admissible(dom, x, grid.dt, a).is_none() {
        return Err(Error::EmptyVelocitySet { t, x });
    }
    let Some(target) = a.intersect(&grid.x_range()) else {
        return Ok((Candidates::Blocked, prof));
    };
    let Some(iv) = admissible(dom, x, grid.dt, target) else {
        return Ok((Candidates::Blocked, prof));
    };
    let mut vs = iv.linspace(VELOCITY_SAMPLES);
    for v in [dom.lo, dom.hi, 0.0] {
        if iv.contains(v) {
            vs.push(v);
        }
    }
    // velocities landing exactly on reachable nodes
    for &xj in &grid.x_nodes {
        let v = (xj - x) / grid.dt;
        if iv.contains(v) {
            vs.push(v);
        }
    }
    Ok((Candidates::Some(vs), prof))
}

fn in_a(spec: &HamiltonianSpec, y: f64) -> bool {
    spec.constraint.as_interval().contains_tol(y, A_TOL)
}

fn dp_layer(spec: &HamiltonianSpec, grid: &Grid, i: usize, next: &[f64], blocked: &mut usize) -> Result<Vec<f64>> {
    let t = grid.t_nodes[i];
    let mut out = Vec::with_capacity(grid.x_nodes.len());
    for &x in &grid.x_nodes {
        if !in_a(spec, x) {
            out.push(INF);
            continue;
        }
        let (cands, prof) = velocity_candidates(spec, grid, t, x)?;
        let best = match cands {
            Candidates::Blocked => {
                *blocked += 1;
                INF
            }
            Candidates::Some(vs) => vs
                .iter()
                .map(|&v| ext::add(prof.eval(v) * grid.dt, interp_layer(grid, next, x + v * grid.dt)))
                .fold(INF, f64::min),
        };
        out.push(best);
    }
    Ok(out)
}

fn tail_bound(spec: &HamiltonianSpec, grid: &Grid) -> Result<f64> {
    let tail = spec.psi_tail.as_ref().ok_or(Error::MissingCertificate("psi_tail"))?;
    Ok(tail(grid.t_max()))
}

/// Backward recursion `V(t, x) = min_v [H*(t, x, v) dt + V(t + dt, x + v dt)]`
/// with `V(T, ·) = 0`.
pub fn solve_value_dp(spec: &HamiltonianSpec, grid: &Grid) -> Result<ValueField> {
    let tail = tail_bound(spec, grid)?;
    let nt = grid.t_nodes.len();
    let mut values = vec![Vec::new(); nt];
    values[nt - 1] = grid.x_nodes.iter().map(|&x| if in_a(spec, x) { 0.0 } else { INF }).collect();
    let mut blocked = 0;
    for i in (0..nt - 1).rev() {
        values[i] = dp_layer(spec, grid, i, &values[i + 1], &mut blocked)?;
    }
    Ok(ValueField { grid: grid.clone(), values, tail_bound: tail, window_blocked: blocked })
}

/// Same recursion over control samples: velocity `f(t, x, u)`, stage cost `l(t, x, u) dt`.
pub fn solve_value_control(
    triple: &RepresentationTriple,
    spec: &HamiltonianSpec,
    grid: &Grid,
    samples: &ControlSamples,
) -> Result<ValueField> {
    let tail = tail_bound(spec, grid)?;
    let nt = grid.t_nodes.len();
    let mut values = vec![Vec::new(); nt];
    values[nt - 1] = grid.x_nodes.iter().map(|&x| if in_a(spec, x) { 0.0 } else { INF }).collect();
    let mut blocked = 0;
    for i in (0..nt - 1).rev() {
        let t = grid.t_nodes[i];
        let next = &values[i + 1];
        let layer: Vec<f64> = grid
            .x_nodes
            .iter()
            .map(|&x| {
                if !in_a(spec, x) {
                    return INF;
                }
                let best = samples
                    .points
                    .iter()
                    .map(|u| {
                        let (f, l) = triple.eval(t, x, u);
                        let y = x + f * grid.dt;
                        if !in_a(spec, y) {
                            INF
                        } else {
                            ext::add(l * grid.dt, interp_layer(grid, next, y))
                        }
                    })
                    .fold(INF, f64::min);
                if is_inf(best) {
                    blocked += 1;
                }
                best
            })
            .collect();
        values[i] = layer;
    }
    Ok(ValueField { grid: grid.clone(), values, tail_bound: tail, window_blocked: blocked })
}

/// Largest change of any node under one more Bellman sweep on the stored layers.
pub fn bellman_reexpansion(field: &ValueField, spec: &HamiltonianSpec) -> Result<f64> {
    let g = &field.grid;
    let mut worst: f64 = 0.0;
    let mut blocked = 0;
    for i in 0..g.t_nodes.len() - 1 {
        let layer = dp_layer(spec, g, i, &field.values[i + 1], &mut blocked)?;
        for (a, b) in layer.iter().zip(&field.values[i]) {
            let d = if is_inf(*a) && is_inf(*b) { 0.0 } else { (a - b).abs() };
            worst = worst.max(d);
        }
    }
    Ok(worst)
}

/// Piecewise-constant-velocity trajectory.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trajectory {
    pub t0: f64,
    pub knots: Vec<(f64, f64)>,
    pub velocities: Vec<f64>,
    pub stage_costs: Vec<f64>,
    /// Knots in `A` and velocities in `dom H*` within tolerance.
    pub admissible: bool,
    /// False when the rollout stopped at the edge of the x-window.
    pub reliable: bool,
}

impl Trajectory {
    pub fn cost(&self) -> f64 {
        self.stage_costs.iter().sum()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,x,v,stage_cost\n");
        for (k, &(t, x)) in self.knots.iter().enumerate() {
            match (self.velocities.get(k), self.stage_costs.get(k)) {
                (Some(v), Some(c)) => {
                    let _ = writeln!(s, "{t},{x},{v},{}", ext::fmt(*c));
                }
                _ => {
                    let _ = writeln!(s, "{t},{x},,");
                }
            }
        }
        s
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        crate::io::write_atomic(path, self.to_csv().as_bytes())
    }
}

fn check_admissible(spec: &HamiltonianSpec, knots: &[(f64, f64)], velocities: &[f64]) -> Result<bool> {
    let mut ok = knots.iter().all(|&(_, x)| in_a(spec, x));
    for (k, &v) in velocities.iter().enumerate() {
        let (t, x) = knots[k];
        ok &= spec.conjugate(t, x)?.domain().contains_tol(v, DOM_TOL);
    }
    Ok(ok)
}

/// Greedy argmin rollout through the table from `(t0, x0)`.
pub fn extract_optimal_trajectory(field: &ValueField, spec: &HamiltonianSpec, t0: f64, x0: f64) -> Result<Trajectory> {
    let g = &field.grid;
    let i0 = g.t_index(t0).ok_or_else(|| Error::InvalidParameter(format!("t0 = {t0} is not a grid layer")))?;
    if is_inf(field.interp(i0, x0)) {
        return Err(Error::InfeasibleStart { t: t0, x: x0 });
    }
    let mut knots = vec![(g.t_nodes[i0], x0)];
    let mut velocities = Vec::new();
    let mut costs = Vec::new();
    let mut reliable = true;
    let mut x = x0;
    for i in i0..g.t_nodes.len() - 1 {
        let t = g.t_nodes[i];
        let (cands, prof) = velocity_candidates(spec, g, t, x)?;
        let Candidates::Some(vs) = cands else {
            reliable = false;
            break;
        };
        let mut best = (INF, 0.0, 0.0);
        for v in vs {
            let c = prof.eval(v) * g.dt;
            let total = ext::add(c, field.interp(i + 1, x + v * g.dt));
            if total < best.0 {
                best = (total, v, c);
            }
        }
        if is_inf(best.0) {
            reliable = false;
            break;
        }
        let (_, v, c) = best;
        x += v * g.dt;
        velocities.push(v);
        costs.push(c);
        knots.push((g.t_nodes[i + 1], x));
    }
    let admissible = check_admissible(spec, &knots, &velocities)?;
    Ok(Trajectory { t0: g.t_nodes[i0], knots, velocities, stage_costs: costs, admissible, reliable })
}

/// Forward Euler selection of the smallest admissible velocity in
/// `dom H* ∩ {v : x + v dt ∈ A}`.
pub fn viability_probe(spec: &HamiltonianSpec, t0: f64, x0: f64, horizon: f64, dt: f64) -> Result<Trajectory> {
    if !in_a(spec, x0) {
        return Err(Error::NotInSet { x: x0 });
    }
    let n = steps(0.0, horizon, dt, "probe horizon")?;
    let a = spec.constraint.as_interval();
    let mut knots = vec![(t0, x0)];
    let mut velocities = Vec::new();
    let mut costs = Vec::new();
    let mut x = x0;
    for k in 0..n {
        let t = t0 + k as f64 * dt;
        let prof = spec.conjugate(t, x)?;
        let iv = admissible(prof.domain(), x, dt, a).ok_or(Error::EmptyVelocitySet { t, x })?;
        let v = iv.clamp(0.0);
        costs.push(prof.eval(v) * dt);
        velocities.push(v);
        x += v * dt;
        knots.push((t + dt, x));
    }
    let admissible = check_admissible(spec, &knots, &velocities)?;
    Ok(Trajectory { t0, knots, velocities, stage_costs: costs, admissible, reliable: true })
}

/// Velocity selection for the backward probe.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Selection {
    Lower,
    Middle,
    Upper,
}

/// Integrates backwards from `x(t0) = x0` with `ẋ ∈ dom H*` and no constraint
/// enforcement; `admissible` reports whether the reversed path stayed in `A`.
pub fn backward_invariance_probe(
    spec: &HamiltonianSpec,
    t0: f64,
    x0: f64,
    horizon: f64,
    dt: f64,
    selection: Selection,
) -> Result<Trajectory> {
    if !in_a(spec, x0) {
        return Err(Error::NotInSet { x: x0 });
    }
    let n = steps(0.0, horizon.min(t0), dt, "probe horizon")?;
    let mut rev = vec![(t0, x0)];
    let mut vel = Vec::new();
    let mut cost = Vec::new();
    let mut x = x0;
    for k in 0..n {
        let t = t0 - k as f64 * dt;
        let prof = spec.conjugate(t, x)?;
        let d = prof.domain();
        let v = match selection {
            Selection::Lower => d.lo,
            Selection::Middle => 0.5 * (d.lo + d.hi),
            Selection::Upper => d.hi,
        };
        x -= v * dt;
        vel.push(v);
        cost.push(prof.eval(v) * dt);
        rev.push((t - dt, x));
    }
    rev.reverse();
    vel.reverse();
    cost.reverse();
    let admissible = rev.iter().all(|&(_, x)| in_a(spec, x));
    Ok(Trajectory { t0: rev[0].0, knots: rev, velocities: vel, stage_costs: cost, admissible, reliable: true })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailProfile {
    pub t: Vec<f64>,
    /// `sup_x |V(t, x)|` over finite nodes.
    pub sup_abs: Vec<f64>,
    /// `sup_abs + tail_bound`.
    pub s: Vec<f64>,
}

pub fn vanishing_at_infinity(field: &ValueField) -> TailProfile {
    let sup_abs: Vec<f64> = field
        .values
        .iter()
        .map(|row| row.iter().filter(|v| !is_inf(v.abs())).fold(0.0, |m: f64, v| m.max(v.abs())))
        .collect();
    let s = sup_abs.iter().map(|v| v + field.tail_bound).collect();
    TailProfile { t: field.grid.t_nodes.clone(), sup_abs, s }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResidualRow {
    pub t: f64,
    pub x: f64,
    pub v_t: f64,
    pub v_x: f64,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResidualStats {
    pub rows: Vec<ResidualRow>,
    /// Samples at kinks, the grid edge or next to infinite nodes.
    pub skipped: usize,
    pub max: f64,
    pub mean: f64,
}

/// `|-V_t + H(t, x, -V_x)|` by centred differences at the nearest interior node;
/// samples where one-sided quotients differ by more than `kink_tol` are skipped.
pub fn hjb_residual_smooth(field: &ValueField, spec: &HamiltonianSpec, samples: &[(f64, f64)], kink_tol: f64) -> ResidualStats {
    let g = &field.grid;
    let (nt, nx) = (g.t_nodes.len(), g.x_nodes.len());
    let mut rows = Vec::new();
    let mut skipped = 0;
    for &(t, x) in samples {
        let i = (t / g.dt).round();
        let j = ((x - g.x_nodes[0]) / g.dx).round();
        if i < 1.0 || j < 1.0 || i as usize >= nt - 1 || j as usize >= nx - 1 {
            skipped += 1;
            continue;
        }
        let (i, j) = (i as usize, j as usize);
        let v = |a: usize, b: usize| field.values[a][b];
        let vals = [v(i, j), v(i - 1, j), v(i + 1, j), v(i, j - 1), v(i, j + 1)];
        if vals.iter().any(|z| is_inf(z.abs())) {
            skipped += 1;
            continue;
        }
        let ft = (vals[2] - vals[0]) / g.dt;
        let bt = (vals[0] - vals[1]) / g.dt;
        let fx = (vals[4] - vals[0]) / g.dx;
        let bx = (vals[0] - vals[3]) / g.dx;
        if (ft - bt).abs() > kink_tol || (fx - bx).abs() > kink_tol {
            skipped += 1;
            continue;
        }
        let (vt, vx) = (0.5 * (ft + bt), 0.5 * (fx + bx));
        let (tn, xn) = (g.t_nodes[i], g.x_nodes[j]);
        let residual = (-vt + spec.h(tn, xn, -vx)).abs();
        rows.push(ResidualRow { t: tn, x: xn, v_t: vt, v_x: vx, residual });
    }
    let max = rows.iter().fold(0.0, |m: f64, r| m.max(r.residual));
    let mean = if rows.is_empty() { 0.0 } else { rows.iter().map(|r| r.residual).sum::<f64>() / rows.len() as f64 };
    ResidualStats { rows, skipped, max, mean }
}

/// Evenly spread interior sample points of the grid.
pub fn interior_samples(grid: &Grid, nt: usize, nx: usize) -> Vec<(f64, f64)> {
    let tr = linspace(grid.t_nodes[1], grid.t_nodes[grid.t_nodes.len() - 2], nt);
    let xr = linspace(grid.x_nodes[1], grid.x_nodes[grid.x_nodes.len() - 2], nx);
    tr.iter().flat_map(|&t| xr.iter().map(move |&x| (t, x))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex_core::ConstraintSet1D;
    use crate::hamiltonians::{make_abs, make_ex35, make_ex51};
    use crate::representation::{ex35_explicit_triple, EX35_KNOTS};

    fn small_grid() -> Grid {
        Grid::new(2.0, 0.1, -2.0, 0.0, 0.1).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(Grid::new(1.0, 0.3, -1.0, 0.0, 0.1).is_err());
        assert!(Grid::new(1.0, 0.0, -1.0, 0.0, 0.1).is_err());
        let g = small_grid();
        assert_eq!(g.x_nodes.len(), 21);
        assert_eq!(*g.x_nodes.last().unwrap(), 0.0);
        assert_eq!(g.t_index(0.5), Some(5));
        assert_eq!(g.t_index(0.55), None);
    }

    #[test]
    fn interpolation_rules() {
        let g = Grid::new(1.0, 1.0, 0.0, 2.0, 1.0).unwrap();
        let layer = [0.0, 2.0, INF];
        assert_eq!(interp_layer(&g, &layer, 0.5), 1.0);
        assert_eq!(interp_layer(&g, &layer, 1.0), 2.0);
        assert!(is_inf(interp_layer(&g, &layer, 1.5)));
        assert!(is_inf(interp_layer(&g, &layer, 2.0)));
        assert!(is_inf(interp_layer(&g, &layer, -0.1)));
    }

    #[test]
    fn zero_cost_examples() {
        let g = small_grid();
        let s = make_ex35(1.0.into(), 1.0).unwrap();
        let f = solve_value_dp(&s, &g).unwrap();
        assert_eq!(f.max_abs(), 0.0);
        let a = make_abs(ConstraintSet1D::Line);
        assert_eq!(solve_value_dp(&a, &g).unwrap().max_abs(), 0.0);
        let tr = ex35_explicit_triple(1.0.into(), 1.0);
        let c = solve_value_control(&tr, &s, &g, &ControlSamples::interval(-1.0, 1.0, 21, &EX35_KNOTS)).unwrap();
        assert_eq!(c.max_abs(), 0.0);
    }

    #[test]
    fn ex51_matches_truncated_closed_form() {
        let g = small_grid();
        let s = make_ex51(1.0.into(), 1.0.into(), 1.0, Some(2)).unwrap();
        let f = solve_value_dp(&s, &g).unwrap();
        // left-endpoint sum of e^{-2s}/n
        for (i, &t) in g.t_nodes.iter().enumerate() {
            let exact: f64 = g.t_nodes[i..g.t_nodes.len() - 1].iter().map(|&s| (-2.0 * s).exp() / 2.0 * g.dt).sum();
            for v in &f.values[i] {
                assert!((v - exact).abs() < 1e-12, "t={t}");
            }
        }
        assert!(bellman_reexpansion(&f, &s).unwrap() <= 1e-12);
    }

    #[test]
    fn rollouts_stay_in_a() {
        let g = small_grid();
        let s = make_ex51(1.0.into(), 1.0.into(), 1.0, Some(2)).unwrap();
        let f = solve_value_dp(&s, &g).unwrap();
        let tr = extract_optimal_trajectory(&f, &s, 0.0, -1.0).unwrap();
        assert!(tr.admissible && tr.reliable);
        assert!((tr.cost() - f.values[0][10]).abs() < 1e-9);
        assert!(tr.knots.windows(2).all(|w| w[1].1 >= w[0].1 - 1e-15 && w[1].1 <= 0.0));
        let vp = viability_probe(&s, 0.0, -1.0, 2.0, 0.1).unwrap();
        assert!(vp.admissible);
        for sel in [Selection::Lower, Selection::Middle, Selection::Upper] {
            let b = backward_invariance_probe(&s, 2.0, 0.0, 2.0, 0.1, sel).unwrap();
            assert!(b.admissible);
            assert_eq!(b.knots.len(), 21);
        }
    }

    #[test]
    fn infeasible_start_is_rejected() {
        let g = small_grid();
        let s = make_ex35(1.0.into(), 1.0).unwrap();
        let mut f = solve_value_dp(&s, &g).unwrap();
        f.values[0][5] = INF;
        assert!(matches!(extract_optimal_trajectory(&f, &s, 0.0, -1.5), Err(Error::InfeasibleStart { .. })));
    }

    #[test]
    fn residual_detects_wrong_field() {
        let g = small_grid();
        let s = make_ex35(1.0.into(), 1.0).unwrap();
        let pts = interior_samples(&g, 5, 5);
        let zero = solve_value_dp(&s, &g).unwrap();
        assert_eq!(hjb_residual_smooth(&zero, &s, &pts, 0.5).max, 0.0);
        let wrong = ValueField::from_fn(g, 0.0, |_, x| x);
        let r = hjb_residual_smooth(&wrong, &s, &pts, 0.5);
        assert!(r.max >= 1.0 && r.skipped == 0);
    }

    #[test]
    fn csv_uses_inf_literal() {
        let g = Grid::new(1.0, 1.0, 0.0, 1.0, 1.0).unwrap();
        let f = ValueField::from_fn(g, 0.0, |_, x| if x > 0.5 { INF } else { 0.0 });
        assert!(f.to_csv().contains("1,1,inf"));
        let j = serde_json::to_value(&f).unwrap();
        assert_eq!(j["values"][0][1], "inf");
    }
}
