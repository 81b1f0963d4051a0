//! Legendre–Fenchel conjugation: discrete conjugates on grids, closed-form
//! conjugate profiles, biconjugate and regularity diagnostics.

use serde::Serialize;

use crate::convex_core::{self, epigraph_cap, hausdorff_distance, ConvexFn1D, Interval, CAP_VERTICES};
use crate::error::{Error, Result};
use crate::ext::{is_inf, INF};
use crate::hamiltonians::HamiltonianSpec;

/// `v ↦ H*(t, x, v)` at a fixed `(t, x)`, with the bounds `∓λ(t, x)`.
#[derive(Clone, Debug)]
pub struct ConjugateProfile {
    pub func: ConvexFn1D,
    pub lower_bound: f64,
    pub upper_bound: f64,
}

impl ConjugateProfile {
    pub fn new(func: ConvexFn1D, lambda: f64) -> Self {
        Self { func, lower_bound: -lambda, upper_bound: lambda }
    }

    pub fn domain(&self) -> Interval {
        self.func.domain
    }

    pub fn eval(&self, v: f64) -> f64 {
        self.func.eval(v)
    }

    /// Same domain, values multiplied by `s > 0`.
    pub fn scaled(&self, s: f64) -> Self {
        let inner = self.func.clone();
        let func = ConvexFn1D::new(inner.domain, move |v| s * inner.eval(v)).with_breakpoints(self.func.breakpoints.clone());
        Self { func, lower_bound: self.lower_bound * s, upper_bound: self.upper_bound * s }
    }

    /// `sup` of the profile over its domain (finite domains only).
    pub fn sup_value(&self, samples: usize) -> f64 {
        let d = self.domain();
        if !d.is_bounded() {
            return INF;
        }
        let mut nodes = d.linspace(samples.max(2));
        nodes.extend(self.func.breakpoints.iter().copied().filter(|b| d.contains(*b)));
        nodes.iter().map(|&v| self.eval(v)).fold(-INF, f64::max)
    }
}

/// Sampled function of one variable; values may be `+inf`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridFunction1D {
    pub nodes: Vec<f64>,
    pub values: Vec<f64>,
}

impl GridFunction1D {
    pub fn new(nodes: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if nodes.len() != values.len() {
            return Err(Error::InvalidParameter("nodes and values differ in length".into()));
        }
        if nodes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter("nodes must be strictly increasing".into()));
        }
        Ok(Self { nodes, values })
    }

    pub fn sample(nodes: Vec<f64>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = nodes.iter().map(|&p| f(p)).collect();
        Self::new(nodes, values)
    }

    pub fn finite_count(&self) -> usize {
        self.values.iter().filter(|v| !is_inf(**v)).count()
    }

    /// Second differences of the values on a uniform grid.
    pub fn second_differences(&self) -> Vec<f64> {
        self.values
            .windows(3)
            .filter(|w| w.iter().all(|v| !is_inf(*v)))
            .map(|w| w[0] - 2.0 * w[1] + w[2])
            .collect()
    }
}

/// Discrete conjugate `h*(v) = max_i (v p_i - h(p_i))` with the maximising node per `v`.
pub fn conjugate_grid_argmax(h: &GridFunction1D, dual_nodes: &[f64]) -> Result<(GridFunction1D, Vec<usize>)> {
    if h.finite_count() < 2 {
        return Err(Error::AllInfinite);
    }
    let finite: Vec<(usize, f64, f64)> = h
        .nodes
        .iter()
        .zip(&h.values)
        .enumerate()
        .filter(|(_, (_, v))| !is_inf(**v))
        .map(|(i, (p, v))| (i, *p, *v))
        .collect();
    let mut values = Vec::with_capacity(dual_nodes.len());
    let mut arg = Vec::with_capacity(dual_nodes.len());
    for &v in dual_nodes {
        let (i, best) = finite
            .iter()
            .map(|&(i, p, hp)| (i, v * p - hp))
            .fold((0, -INF), |acc, x| if x.1 > acc.1 { x } else { acc });
        values.push(best);
        arg.push(i);
    }
    Ok((GridFunction1D::new(dual_nodes.to_vec(), values)?, arg))
}

pub fn conjugate_grid(h: &GridFunction1D, dual_nodes: &[f64]) -> Result<GridFunction1D> {
    conjugate_grid_argmax(h, dual_nodes).map(|(g, _)| g)
}

/// Flags dual nodes whose maximiser sits on the first or last primal node,
/// i.e. where the discrete value is set by the grid edge.
pub fn boundary_dominated(h: &GridFunction1D, argmax: &[usize]) -> Vec<bool> {
    let last = h.nodes.len() - 1;
    argmax.iter().map(|&i| i == 0 || i == last).collect()
}

/// Discrete conjugate of `h` at `v` with domain detection: the sup over
/// `[-L, L]` is recomputed on two successive doublings of `L` at fixed spacing
/// and reported as `+inf` unless the last two agree within `1e-6`.
pub fn conjugate_numeric(h: impl Fn(f64) -> f64, v: f64, half_width: f64, spacing: f64) -> f64 {
    let sup_on = |l: f64| {
        let m = (l / spacing).round() as i64;
        (-m..=m).map(|i| i as f64 * spacing).map(|p| v * p - h(p)).fold(-INF, f64::max)
    };
    let s1 = sup_on(2.0 * half_width);
    let s2 = sup_on(4.0 * half_width);
    if (s2 - s1).abs() < 1e-6 {
        s2
    } else {
        INF
    }
}

/// `max_p |sup_v {p v - H*(v)} - H(t, x, p)|` with the sup taken over `v_nodes`
/// points of `dom H*(t, x, ·)` (kinks of the closed form added).
pub fn biconjugate_check(spec: &HamiltonianSpec, t: f64, x: f64, p_samples: &[f64], v_nodes: usize) -> Result<f64> {
    let prof = spec.conjugate(t, x)?;
    let d = prof.domain();
    if !d.is_bounded() {
        return Err(Error::InvalidParameter("biconjugate check needs a bounded conjugate domain".into()));
    }
    let mut vs = d.linspace(v_nodes.max(2));
    vs.extend(prof.func.breakpoints.iter().copied().filter(|b| d.contains(*b)));
    let hv: Vec<f64> = vs.iter().map(|&v| prof.eval(v)).collect();
    let mut worst: f64 = 0.0;
    for &p in p_samples {
        let bic = vs.iter().zip(&hv).map(|(v, h)| p * v - h).fold(-INF, f64::max);
        worst = worst.max((bic - spec.h(t, x, p)).abs());
    }
    Ok(worst)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct RegularityEstimates {
    /// Hausdorff distance of the conjugate domains.
    pub dl_f: f64,
    /// Hausdorff distance of the epigraphs cut by the disk of radius `2ω` at the origin.
    pub dl_e_cap: f64,
    /// `k(t) |x - y|`
    pub k_bound: f64,
}

pub fn regularity_estimates(spec: &HamiltonianSpec, t: f64, x: f64, y: f64) -> Result<RegularityEstimates> {
    let px = spec.conjugate(t, x)?;
    let py = spec.conjugate(t, y)?;
    let dl_f = hausdorff_distance(&px.domain(), &py.domain());
    let r = 4.0 * spec.lambda(t, x).max(spec.lambda(t, y));
    let cx = epigraph_cap(&px.func, [0.0, 0.0], r, CAP_VERTICES)?;
    let cy = epigraph_cap(&py.func, [0.0, 0.0], r, CAP_VERTICES)?;
    let dl_e_cap = convex_core::hausdorff_distance(&cx, &cy);
    Ok(RegularityEstimates { dl_f, dl_e_cap, k_bound: (spec.k)(t) * (x - y).abs() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonians::{make_abs, make_ex35, make_ex51};
    use crate::convex_core::ConstraintSet1D;

    #[test]
    fn half_square_is_self_conjugate() {
        let h = GridFunction1D::sample(Interval { lo: -5.0, hi: 5.0 }.linspace(201), |p| 0.5 * p * p).unwrap();
        let c = conjugate_grid(&h, &[1.0]).unwrap();
        assert!((c.values[0] - 0.5).abs() < 1e-3);
    }

    #[test]
    fn abs_conjugate_is_indicator_like() {
        let h = GridFunction1D::sample(Interval { lo: -5.0, hi: 5.0 }.linspace(201), f64::abs).unwrap();
        let (c, arg) = conjugate_grid_argmax(&h, &[0.5, 2.0]).unwrap();
        assert!(c.values[0].abs() < 1e-12);
        assert!((c.values[1] - 5.0).abs() < 1e-12);
        assert_eq!(boundary_dominated(&h, &arg), vec![false, true]);
    }

    #[test]
    fn all_infinite_rejected() {
        let h = GridFunction1D::new(vec![0.0, 1.0], vec![INF, 1.0]).unwrap();
        assert!(matches!(conjugate_grid(&h, &[0.0]), Err(Error::AllInfinite)));
    }

    #[test]
    fn ex35_numeric_matches_closed_form() {
        let s = make_ex35(1.0.into(), 1.0).unwrap();
        let prof = s.conjugate(0.0, 1.0).unwrap();
        let h = GridFunction1D::sample(Interval { lo: -50.0, hi: 50.0 }.linspace(20001), |p| s.h(0.0, 1.0, p)).unwrap();
        let vs = Interval { lo: -2.0, hi: 2.0 }.linspace(81);
        let c = conjugate_grid(&h, &vs).unwrap();
        for (v, hv) in vs.iter().zip(&c.values) {
            assert!((hv - prof.eval(*v)).abs() < 1e-3, "v={v}");
        }
    }

    #[test]
    fn numeric_domain_detection() {
        let s = make_ex35(1.0.into(), 1.0).unwrap();
        let h = |p: f64| s.h(0.0, 1.0, p);
        assert!((conjugate_numeric(h, 1.5, 10.0, 0.01) - 0.5).abs() < 1e-3);
        assert!(is_inf(conjugate_numeric(h, 2.2, 10.0, 0.01)));
    }

    #[test]
    fn closed_forms_in_library() {
        let lim = make_ex51(1.0.into(), 1.0.into(), 1.0, None).unwrap();
        let prof = lim.conjugate(2.0, 0.0).unwrap();
        assert_eq!(prof.domain(), Interval::point(0.0));
        let abs = make_abs(ConstraintSet1D::Line);
        let p = abs.conjugate(0.0, 0.0).unwrap();
        assert_eq!(p.eval(0.3), 0.0);
        assert!(is_inf(p.eval(-1.01)));
    }

    #[test]
    fn biconjugate_examples() {
        let abs = make_abs(ConstraintSet1D::Line);
        let e = biconjugate_check(&abs, 0.0, 0.0, &[-2.0, -0.5, 0.0, 1.0, 3.0], 101).unwrap();
        assert!(e < 2.0 / 100.0);
        let s = make_ex35(1.0.into(), 1.0).unwrap();
        let ps: Vec<f64> = (-2..=2).map(f64::from).collect();
        assert!(biconjugate_check(&s, 0.0, 1.0, &ps, 2001).unwrap() <= 1e-3);
        assert!(biconjugate_check(&s, 0.3, -0.7, &[0.0], 11).unwrap() <= 1e-9);
    }

    #[test]
    fn regularity_ex35() {
        let s = make_ex35(1.0.into(), 1.0).unwrap();
        let same = regularity_estimates(&s, 0.0, 1.0, 1.0).unwrap();
        assert_eq!(same.dl_f, 0.0);
        assert!(same.dl_e_cap < 1e-12);
        let r = regularity_estimates(&s, 0.0, 1.0, 2.0).unwrap();
        assert!((r.dl_f - 1.0).abs() < 1e-12);
        assert!(r.dl_f <= r.k_bound + 1e-12);
        assert!(r.dl_e_cap <= 2.0 * r.k_bound + 1e-6);
        let h4 = make_ex51(1.0.into(), 1.0.into(), 1.0, Some(4)).unwrap();
        let d = 0.3;
        let r = regularity_estimates(&h4, 0.5, 0.0, -d).unwrap();
        assert!((r.dl_f - d).abs() < 1e-12);
    }
}
