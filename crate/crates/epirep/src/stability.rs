//! Convergence experiments for Hamiltonian families `H_n -> H`: uniform
//! convergence on compacts, convergence of the Steiner-built triples, and the
//! sampled lower/upper epi-limit checks on the value functions.

use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::convex_core::linspace;
use crate::error::{Error, Result};
use crate::ext::{self, is_inf, INF};
use crate::hamiltonians::{check_bh, check_opc, check_vic, make_ex51, Coefficient, HamiltonianSpec, OpcSamples, RolloutSettings};
use crate::representation::{build_epigraphical_representation, ControlSamples, OmegaPolicy, RepresentationTriple, SteinerSettings};
use crate::value_fn::{solve_value_dp, Grid, ValueField};

/// Axis-aligned box `[a0, a1] × [b0, b1]` sampled on a tensor grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampleBox {
    pub first: (f64, f64),
    pub second: (f64, f64),
    pub n_first: usize,
    pub n_second: usize,
}

impl SampleBox {
    pub fn new(first: (f64, f64), second: (f64, f64), n_first: usize, n_second: usize) -> Self {
        Self { first, second, n_first, n_second }
    }

    pub fn points(&self) -> Vec<(f64, f64)> {
        let a = linspace(self.first.0, self.first.1, self.n_first);
        let b = linspace(self.second.0, self.second.1, self.n_second);
        a.iter().flat_map(|&u| b.iter().map(move |&v| (u, v))).collect()
    }
}

/// Per-n sup distances with a monotonicity verdict.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub kind: String,
    pub n_list: Vec<u32>,
    pub distances: Vec<f64>,
    /// `sup |λ_n - λ|` when the check compares certificates.
    pub lambda_distances: Option<Vec<f64>>,
    /// Nonincreasing within `1e-9`.
    pub nonincreasing: bool,
    pub tolerance: f64,
    /// `nonincreasing` and the last distance within tolerance.
    pub pass: bool,
}

fn finish(kind: &str, n_list: &[u32], distances: Vec<f64>, lambda: Option<Vec<f64>>, tol: f64) -> ConvergenceReport {
    let nonincreasing = distances.windows(2).all(|w| w[1] <= w[0] + 1e-9);
    let last_ok = distances.last().is_some_and(|d| *d <= tol);
    ConvergenceReport {
        kind: kind.into(),
        n_list: n_list.to_vec(),
        distances,
        lambda_distances: lambda,
        nonincreasing,
        tolerance: tol,
        pass: nonincreasing && last_ok,
    }
}

/// `sup |H_n - H|` at time `t` over `box = x-range × p-range`, and `sup |λ_n - λ|` over the x-range.
pub fn hamiltonian_convergence_check(
    specs_n: &[(u32, HamiltonianSpec)],
    limit: &HamiltonianSpec,
    t: f64,
    xp_box: &SampleBox,
    tol: f64,
) -> ConvergenceReport {
    let pts = xp_box.points();
    let xs = linspace(xp_box.first.0, xp_box.first.1, xp_box.n_first);
    let mut d = Vec::new();
    let mut dl = Vec::new();
    for (_, s) in specs_n {
        d.push(pts.iter().map(|&(x, p)| (s.h(t, x, p) - limit.h(t, x, p)).abs()).fold(0.0, f64::max));
        dl.push(xs.iter().map(|&x| (s.lambda(t, x) - limit.lambda(t, x)).abs()).fold(0.0, f64::max));
    }
    let ns: Vec<u32> = specs_n.iter().map(|p| p.0).collect();
    finish("hamiltonian", &ns, d, Some(dl), tol)
}

/// `sup |f_n - f| + |l_n - l|` over `box = t-range × x-range` and the control samples.
pub fn representation_convergence_check(
    triples_n: &[(u32, RepresentationTriple)],
    limit: &RepresentationTriple,
    tx_box: &SampleBox,
    samples: &ControlSamples,
    tol: f64,
) -> Result<ConvergenceReport> {
    if triples_n.iter().any(|(_, t)| t.control_set != limit.control_set) {
        return Err(Error::InvalidParameter("family triples must share the control set".into()));
    }
    let pts = tx_box.points();
    let base: Vec<Vec<(f64, f64)>> = pts.iter().map(|&(t, x)| limit.image(t, x, samples)).collect();
    let mut d = Vec::new();
    for (_, tr) in triples_n {
        let mut worst: f64 = 0.0;
        for (k, &(t, x)) in pts.iter().enumerate() {
            for (a, b) in tr.image(t, x, samples).iter().zip(&base[k]) {
                worst = worst.max((a.0 - b.0).abs() + (a.1 - b.1).abs());
            }
        }
        d.push(worst);
    }
    let ns: Vec<u32> = triples_n.iter().map(|p| p.0).collect();
    Ok(finish("representation", &ns, d, None, tol))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EpiPoint {
    pub t: f64,
    pub x: f64,
    pub limit_value: f64,
    /// `min` over tail n and approach sequences of `V_n(t_n, x_n) - V(t, x)`.
    pub lower_margin: f64,
    /// `max` over tail n of the best `V_n(t, y) - V(t, x)` with `|y - x| <= radius`.
    pub recovery_gap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EpiReport {
    pub n_tail: Vec<u32>,
    pub points: Vec<EpiPoint>,
    pub worst_margin: f64,
    pub worst_gap: f64,
    pub slack: f64,
    pub lower_pass: bool,
    pub upper_pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EpiSettings {
    /// Allowed discretization slack on both sides.
    pub slack: f64,
    /// Recovery search radius in grid cells.
    pub radius_cells: usize,
    /// Seeded random approach sequences per point, on top of the canonical ones.
    pub random_sequences: usize,
    pub seed: u64,
}

impl Default for EpiSettings {
    fn default() -> Self {
        Self { slack: 0.0, radius_cells: 3, random_sequences: 2, seed: 11 }
    }
}

/// Sampled lower epi-limit (approach sequences) and recovery-sequence checks.
/// The tail is the second half of the family.
pub fn epi_liminf_check(
    fields_n: &[(u32, ValueField)],
    limit: &ValueField,
    points: &[(f64, f64)],
    a: &crate::convex_core::ConstraintSet1D,
    settings: &EpiSettings,
) -> Result<EpiReport> {
    if fields_n.is_empty() {
        return Err(Error::InvalidParameter("empty family".into()));
    }
    let tail = &fields_n[fields_n.len() / 2..];
    let (dt, dx) = (limit.grid.dt, limit.grid.dx);
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let av = a.as_interval();
    let mut out = Vec::new();
    for &(t0, x0) in points {
        let v0 = limit.eval(t0, x0);
        if is_inf(v0) {
            return Err(Error::InfeasibleStart { t: t0, x: x0 });
        }
        let shifts: Vec<(f64, f64)> = std::iter::once((0.0, 0.0))
            .chain(std::iter::once((dt, -dx)))
            .chain((0..settings.random_sequences).map(|_| (rng.gen_range(-dt..=dt), rng.gen_range(-dx..=dx))))
            .collect();
        let mut margin = INF;
        let mut gap = -INF;
        for (n, f) in tail {
            let nf = *n as f64;
            for &(st, sx) in &shifts {
                let tn = (t0 + st / nf).max(0.0);
                let xn = av.clamp(x0 + sx / nf);
                margin = margin.min(f.eval(tn, xn) - v0);
            }
            let r = settings.radius_cells as f64 * f.grid.dx;
            let best = f
                .grid
                .x_nodes
                .iter()
                .filter(|&&y| (y - x0).abs() <= r + 1e-12)
                .map(|&y| f.eval(t0, y))
                .fold(INF, f64::min);
            gap = gap.max(best - v0);
        }
        out.push(EpiPoint { t: t0, x: x0, limit_value: v0, lower_margin: margin, recovery_gap: gap });
    }
    let worst_margin = out.iter().map(|p| p.lower_margin).fold(INF, f64::min);
    let worst_gap = out.iter().map(|p| p.recovery_gap).fold(-INF, f64::max);
    Ok(EpiReport {
        n_tail: tail.iter().map(|p| p.0).collect(),
        points: out,
        worst_margin,
        worst_gap,
        slack: settings.slack,
        lower_pass: worst_margin >= -settings.slack,
        upper_pass: worst_gap <= settings.slack,
    })
}

/// Parameters of the canonical experiment.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Ex51Params {
    pub alpha: Coefficient,
    pub beta: Coefficient,
    pub gamma: f64,
}

impl Default for Ex51Params {
    fn default() -> Self {
        Self { alpha: 1.0.into(), beta: 1.0.into(), gamma: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentSetup {
    pub grid: Grid,
    pub n_list: Vec<u32>,
    /// `x × p` box and time for the Hamiltonian distances.
    pub h_time: f64,
    pub h_box: SampleBox,
    /// `t × x` box for the representation distances.
    pub rep_box: SampleBox,
    pub u_radii: usize,
    pub u_angles: usize,
    pub points: Vec<(f64, f64)>,
    pub rep_tol: f64,
    pub seed: u64,
}

impl ExperimentSetup {
    pub fn standard() -> Result<Self> {
        Ok(Self {
            grid: Grid::new(5.0, 0.1, -2.0, 0.0, 0.1)?,
            n_list: vec![1, 2, 4, 8, 16, 32, 64],
            h_time: 1.0,
            h_box: SampleBox::new((-2.0, 2.0), (-5.0, 5.0), 41, 201),
            rep_box: SampleBox::new((0.0, 2.0), (-2.0, 0.0), 3, 5),
            u_radii: 21,
            u_angles: 72,
            points: [0.5, 1.0, 2.0].iter().flat_map(|&t| [-1.5, -0.5, 0.0].map(move |x| (t, x))).collect(),
            rep_tol: 5e-2,
            seed: 11,
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Verdicts {
    /// Labels `"1"`, `"2"`, ..., `"limit"`.
    pub labels: Vec<String>,
    pub opc: Vec<bool>,
    pub vic: Vec<bool>,
    pub b_h: Vec<bool>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Ex51Bundle {
    pub status: String,
    pub params: Ex51Params,
    pub setup: ExperimentSetup,
    pub hamiltonian: ConvergenceReport,
    pub hamiltonian_closed_form: Vec<f64>,
    pub closed_form_error: f64,
    pub representation: ConvergenceReport,
    /// Shared bound constant `40(1+N)(1+‖θ‖∞)`.
    pub tau: f64,
    pub epi: EpiReport,
    pub verdicts: Verdicts,
    pub max_abs_vn: Vec<f64>,
    #[serde(skip)]
    pub fields: Vec<(String, ValueField)>,
}

impl Ex51Bundle {
    pub fn pass(&self) -> bool {
        let v = &self.verdicts;
        let k = v.opc.len() - 1;
        self.hamiltonian.pass
            && self.representation.pass
            && self.epi.lower_pass
            && self.epi.upper_pass
            && v.opc[..k].iter().all(|&b| b)
            && !v.opc[k]
            && v.vic.iter().all(|&b| b)
            && v.b_h.iter().all(|&b| b)
    }

    pub fn convergence_csv(&self) -> String {
        let mut s = String::from("n,sup_dH,sup_dRep,worst_margin\n");
        for (i, n) in self.hamiltonian.n_list.iter().enumerate() {
            let label = n.to_string();
            let f = self.fields.iter().find(|(l, _)| *l == label).map(|p| &p.1);
            let margin = f.map(|f| worst_margin_vs(f, &self.fields.last().unwrap().1)).unwrap_or(INF);
            let _ = writeln!(
                s,
                "{n},{},{},{}",
                ext::fmt(self.hamiltonian.distances[i]),
                ext::fmt(self.representation.distances[i]),
                ext::fmt(margin)
            );
        }
        s
    }

    /// Writes `report.json`, `vn_field_<n>.csv` and `convergence.csv`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        crate::io::write_json(&dir.join("report.json"), self)?;
        for (label, f) in &self.fields {
            f.write_csv(&dir.join(format!("vn_field_{label}.csv")))?;
        }
        crate::io::write_atomic(&dir.join("convergence.csv"), self.convergence_csv().as_bytes())
    }
}

/// `min (V_n - V)` over shared finite nodes.
fn worst_margin_vs(f: &ValueField, limit: &ValueField) -> f64 {
    let mut m = INF;
    for (ra, rb) in f.values.iter().zip(&limit.values) {
        for (a, b) in ra.iter().zip(rb) {
            if !is_inf(*a) && !is_inf(*b) {
                m = m.min(a - b);
            }
        }
    }
    m
}

/// Closed form of `sup |H_n - H|` over `p ∈ [p0, p1]` at time `t`:
/// `(1/n) max |p⁺ - β(t)e^{-2γt}|`.
pub fn ex51_sup_difference(params: &Ex51Params, n: u32, t: f64, p_range: (f64, f64)) -> f64 {
    let b = params.beta.eval(t) * (-2.0 * params.gamma * t).exp();
    let (lo, hi) = (p_range.0.max(0.0), p_range.1.max(0.0));
    (lo - b).abs().max((hi - b).abs()) / n as f64
}

/// Full experiment for the family `H_n` and its limit.
pub fn run_ex51_experiment(params: &Ex51Params, setup: &ExperimentSetup) -> Result<Ex51Bundle> {
    if !(params.gamma > 0.0) {
        return Err(Error::InvalidParameter("gamma must be positive".into()));
    }
    let mk = |n: Option<u32>| make_ex51(params.alpha.clone(), params.beta.clone(), params.gamma, n);
    let limit = mk(None)?;
    let specs: Vec<(u32, HamiltonianSpec)> = setup.n_list.iter().map(|&n| Ok((n, mk(Some(n))?))).collect::<Result<_>>()?;

    let closed: Vec<f64> = setup.n_list.iter().map(|&n| ex51_sup_difference(params, n, setup.h_time, setup.h_box.second)).collect();
    // the sampled sup must track the closed form; the last value doubles as the tolerance
    let mut hamiltonian =
        hamiltonian_convergence_check(&specs, &limit, setup.h_time, &setup.h_box, closed.last().copied().unwrap_or(0.0) + 1e-9);
    let closed_form_error = hamiltonian.distances.iter().zip(&closed).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    hamiltonian.pass &= closed_form_error <= 1e-9;

    let st = SteinerSettings::default();
    let lim_tr = build_epigraphical_representation(&limit, OmegaPolicy::TwiceLambda, st)?;
    let triples: Vec<(u32, RepresentationTriple)> =
        specs.iter().map(|(n, s)| Ok((*n, build_epigraphical_representation(s, OmegaPolicy::TwiceLambda, st)?))).collect::<Result<_>>()?;
    let samples = ControlSamples::polar(setup.u_radii, setup.u_angles);
    let representation = representation_convergence_check(&triples, &lim_tr, &setup.rep_box, &samples, setup.rep_tol)?;
    let tau = 40.0 * 2.0 * (1.0 + limit.theta_sup.unwrap_or(INF));

    let mut fields = Vec::new();
    for (n, s) in &specs {
        fields.push((n.to_string(), solve_value_dp(s, &setup.grid)?));
    }
    let lim_field = solve_value_dp(&limit, &setup.grid)?;
    let fam: Vec<(u32, ValueField)> = specs.iter().zip(&fields).map(|((n, _), (_, f))| (*n, f.clone())).collect();
    let slack = 2.0 * (setup.grid.dt + setup.grid.dx);
    let epi = epi_liminf_check(
        &fam,
        &lim_field,
        &setup.points,
        &limit.constraint,
        &EpiSettings { slack, seed: setup.seed, ..EpiSettings::default() },
    )?;
    let max_abs_vn = fields.iter().map(|(_, f)| f.max_abs()).collect();
    fields.push(("limit".into(), lim_field));

    let opc_samples = OpcSamples::default();
    let vic_t = linspace(0.0, 5.0, 11);
    let vic_x = linspace(-2.0, 0.0, 21);
    let rollout = RolloutSettings { seed: setup.seed, ..RolloutSettings::default() };
    let mut labels = Vec::new();
    let (mut opc, mut vic, mut b_h) = (Vec::new(), Vec::new(), Vec::new());
    for (label, s, r) in specs
        .iter()
        .map(|(n, s)| (n.to_string(), s, 1.0 / *n as f64))
        .chain(std::iter::once(("limit".to_string(), &limit, 1.0)))
    {
        opc.push(check_opc(s, 1.0, r, 1.0, &opc_samples)?.pass);
        vic.push(check_vic(s, &vic_t, &vic_x)?.pass);
        b_h.push(check_bh(s, None, &rollout)?.pass);
        labels.push(label);
    }
    let mut bundle = Ex51Bundle {
        status: String::new(),
        params: params.clone(),
        setup: setup.clone(),
        hamiltonian,
        hamiltonian_closed_form: closed,
        closed_form_error,
        representation,
        tau,
        epi,
        verdicts: Verdicts { labels, opc, vic, b_h },
        max_abs_vn,
        fields,
    };
    bundle.status = if bundle.pass() { "ok".into() } else { "failed".into() };
    Ok(bundle)
}
