//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::f64::consts::PI;
use std::time::Instant;

use epirep::convex_core::{linspace, steiner_point, steiner_point_quadrature, ConvexBody2, Point};
use epirep::ext::is_inf;
use epirep::hamiltonians::{
    all_pass, check_bh, check_hh, check_opc, check_vic, make_ex33, make_ex34, make_ex35, make_ex51, opc_minimal_m,
    HamiltonianSpec, OpcSamples, RolloutSettings, SampleGrid,
};
use epirep::legendre::{biconjugate_check, conjugate_grid, GridFunction1D};
use epirep::representation::{
    build_epigraphical_representation, ex35_explicit_triple, reconstruct_hamiltonian, reproduce_ex33_discontinuity,
    reproduce_ex34_unboundedness, verify_bounds, verify_epigraphical, ControlSamples, OmegaPolicy, RepSampleGrid,
    RepresentationTriple, SteinerSettings, EX35_KNOTS,
};
use epirep::stability::{run_ex51_experiment, Ex51Params, ExperimentSetup};
use epirep::value_fn::{solve_value_control, solve_value_dp, Grid};
use epirep::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Verdict = Result<(bool, String)>;
type Criterion = (&'static str, f64, fn() -> Verdict);

fn max_reconstruction_error(
    triple: &RepresentationTriple,
    spec: &HamiltonianSpec,
    ts: &[f64],
    xs: &[f64],
    ps: &[f64],
    samples: &ControlSamples,
) -> f64 {
    let mut worst: f64 = 0.0;
    for &t in ts {
        for &x in xs {
            for &p in ps {
                worst = worst.max((reconstruct_hamiltonian(triple, t, x, p, samples) - spec.h(t, x, p)).abs());
            }
        }
    }
    worst
}

fn explicit_reconstruction() -> Verdict {
    let spec = make_ex35(1.0.into(), 1.0)?;
    let triple = ex35_explicit_triple(1.0.into(), 1.0);
    let samples = ControlSamples::interval(-1.0, 1.0, 101, &EX35_KNOTS);
    let err = max_reconstruction_error(
        &triple,
        &spec,
        &[0.0, 1.0],
        &linspace(-2.0, 2.0, 17),
        &linspace(-3.0, 3.0, 25),
        &samples,
    );
    Ok((err <= 1e-9, format!("max error {err:.3e} (tol 1e-9)")))
}

fn steiner_grid(samples: ControlSamples) -> RepSampleGrid {
    RepSampleGrid::new(vec![0.0, 1.0], linspace(-2.0, 0.0, 5), samples)
}

fn steiner_representation() -> Verdict {
    let spec = make_ex35(1.0.into(), 1.0)?;
    let triple = build_epigraphical_representation(&spec, OmegaPolicy::TwiceLambda, SteinerSettings::default())?;
    let coarse = verify_epigraphical(&triple, &spec, &steiner_grid(ControlSamples::default_disk()))?;
    let fine = verify_epigraphical(&triple, &spec, &steiner_grid(ControlSamples::polar(41, 144)))?;
    let (ts, xs, ps) = ([0.0, 1.0], linspace(-2.0, 0.0, 5), linspace(-3.0, 3.0, 25));
    let e401 = max_reconstruction_error(&triple, &spec, &ts, &xs, &ps, &ControlSamples::polar(11, 40));
    let e1441 = max_reconstruction_error(&triple, &spec, &ts, &xs, &ps, &ControlSamples::default_disk());
    let membership = coarse.worst_inclusion <= 1e-6 && fine.worst_inclusion <= 1e-6;
    let coverage = coarse.coverage_gap <= 1e-2;
    let halving = fine.coverage_gap <= 0.5 * coarse.coverage_gap;
    let recon = e401 <= 5e-2;
    let decreasing = e1441 < e401;
    Ok((
        membership && coverage && halving && recon && decreasing,
        format!(
            "membership slack {:.1e} [{}], coverage gap {:.4} at 1441 u [{}] -> {:.4} at 5761 u [{}], \
             reconstruction {:.4} at 401 u [{}] -> {:.4} at 1441 u [{}]",
            coarse.worst_inclusion.max(fine.worst_inclusion),
            ok(membership),
            coarse.coverage_gap,
            ok(coverage),
            fine.coverage_gap,
            ok(halving),
            e401,
            ok(recon),
            e1441,
            ok(decreasing),
        ),
    ))
}

fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "FAIL"
    }
}

fn construction_bounds() -> Verdict {
    let spec = make_ex35(1.0.into(), 1.0)?;
    let triple = build_epigraphical_representation(&spec, OmegaPolicy::TwiceLambda, SteinerSettings::default())?;
    let grid = RepSampleGrid::new(vec![0.0, 0.5, 1.0, 2.0], linspace(-2.0, 0.0, 9), ControlSamples::default_disk());
    let r = verify_bounds(&triple, &spec, &grid, 1e-3);
    Ok((
        r.pass,
        format!(
            "|f|+|l| <= 20 lambda: {} violations (max ratio {:.3}); l >= phi: {} violations; \
             x-Lipschitz excess {:.3} over {} pairs",
            r.a2_violations, r.a2_max_ratio, r.a4_violations, r.a1_max_excess, r.pairs
        ),
    ))
}

fn counterexamples() -> Verdict {
    let ex33 = reproduce_ex33_discontinuity(&[0.0, 0.5, 1.0, 2.0])?;
    let ex34 = reproduce_ex34_unboundedness(20)?;
    Ok((
        ex33.pass && ex34.pass,
        format!(
            "flawed-omega jump error {:.1e}, 2-lambda modulus excess {:.3e}; l = 1 + i for i <= 20: {}, slope {}",
            ex33.max_jump_error, ex33.lambda_omega_max_excess, ex34.pass, ex34.slope
        ),
    ))
}

fn verdict_table() -> Verdict {
    let grid = SampleGrid::default();
    let opc = OpcSamples::default();
    let rollouts = RolloutSettings::default();
    let xs = linspace(-3.0, 0.0, 13);
    let mut notes = Vec::new();

    let ex35 = make_ex35(1.0.into(), 1.0)?;
    let hh35 = all_pass(&check_hh(&ex35, &grid));
    let m2 = check_opc(&ex35, 1.0, 1.0, 2.0, &opc)?;
    let m3 = check_opc(&ex35, 1.0, 1.0, 3.0, &opc)?;
    let m_min = opc_minimal_m(&ex35, 1.0, 1.0, &opc)?;
    let w = m2.witnesses.first().map(|w| format!("{:?}", w.point)).unwrap_or_default();
    notes.push(format!("ex35 hH {} OPC(M=3) {} [M=2 refuted at (t,y,v)={w}, minimal M {m_min}]", ok(hh35), ok(m3.pass)));
    let mut pass = hh35 && m3.pass && !m2.pass;

    for n in [1, 2, 4, 8] {
        let s = make_ex51(1.0.into(), 1.0.into(), 1.0, Some(n))?;
        let hh = all_pass(&check_hh(&s, &grid));
        let vic = check_vic(&s, &opc.t, &xs)?.pass;
        let o = check_opc(&s, 1.0, 1.0 / n as f64, 1.0, &opc)?.pass;
        let b = check_bh(&s, None, &rollouts)?.pass;
        pass &= hh && vic && o && b;
        notes.push(format!("n={n} hH/VIC/OPC/B {}/{}/{}/{}", ok(hh), ok(vic), ok(o), ok(b)));
    }
    let lim = make_ex51(1.0.into(), 1.0.into(), 1.0, None)?;
    let vic = check_vic(&lim, &opc.t, &xs)?.pass;
    let b = check_bh(&lim, None, &rollouts)?.pass;
    let o = check_opc(&lim, 1.0, 1.0, 1.0, &opc)?;
    let at_origin = o.witnesses.iter().any(|w| w.point[1] == 0.0 && w.point[2] == 0.0);
    pass &= vic && b && !o.pass && at_origin;
    notes.push(format!(
        "limit VIC {} B {} OPC fails {} with witness at y=0, v=0 {}",
        ok(vic),
        ok(b),
        ok(!o.pass),
        ok(at_origin)
    ));
    Ok((pass, notes.join("; ")))
}

fn value_function() -> Verdict {
    let spec = make_ex35(1.0.into(), 1.0)?;
    let grid = Grid::new(10.0, 0.05, -3.0, 0.0, 0.05)?;
    let dp = solve_value_dp(&spec, &grid)?;
    let bound = (-10.0f64).exp() + 0.05;
    let samples = ControlSamples::interval(-1.0, 1.0, 101, &EX35_KNOTS);
    let ctl = solve_value_control(&ex35_explicit_triple(1.0.into(), 1.0), &spec, &grid, &samples)?;
    let mut diff: f64 = 0.0;
    for (ra, rb) in dp.values.iter().zip(&ctl.values) {
        for (a, b) in ra.iter().zip(rb) {
            diff = diff.max(if is_inf(*a) && is_inf(*b) { 0.0 } else { (a - b).abs() });
        }
    }
    let tol = 2.0 * (grid.dt + grid.dx + samples.modulus);
    let pass = dp.max_abs() <= bound && diff <= tol;
    Ok((pass, format!("max|V| {:.3e} (<= {bound:.4}); dp vs control {diff:.3e} (<= {tol:.3})", dp.max_abs())))
}

fn conjugacy_suite() -> Verdict {
    let specs = [
        make_ex35(1.0.into(), 1.0)?,
        make_ex51(1.0.into(), 1.0.into(), 1.0, Some(4))?,
        make_ex51(1.0.into(), 1.0.into(), 1.0, None)?,
        make_ex33(1.0)?,
        make_ex34(),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut fy: f64 = f64::INFINITY;
    let mut bic: f64 = 0.0;
    let mut second: f64 = f64::INFINITY;
    let ps = linspace(-3.0, 3.0, 25);
    for spec in &specs {
        for _ in 0..10_000 {
            let t = rng.gen_range(0.0..10.0);
            let x = rng.gen_range(-4.0..0.0);
            let p = rng.gen_range(-20.0..20.0);
            let dom = spec.conjugate(t, x)?.domain();
            let v = dom.lo + rng.gen::<f64>() * (dom.hi - dom.lo);
            fy = fy.min(spec.h(t, x, p) + spec.hstar(t, x, v)? - p * v);
        }
        for t in [0.0, 1.0, 2.0] {
            for x in linspace(-3.0, 0.0, 7) {
                bic = bic.max(biconjugate_check(spec, t, x, &ps, 2001)?);
                let h = GridFunction1D::sample(linspace(-10.0, 10.0, 401), |p| spec.h(t, x, p))?;
                let hs = conjugate_grid(&h, &linspace(-3.0, 3.0, 121))?;
                second = hs.second_differences().into_iter().fold(second, f64::min);
            }
        }
    }
    let pass = fy >= -1e-9 && bic <= 1e-3 && second >= -1e-12;
    Ok((
        pass,
        format!("min Fenchel-Young slack {fy:.3e} over 5x10^4 pairs; biconjugate {bic:.3e}; min second difference {second:.3e}"),
    ))
}

fn stability_experiment() -> Verdict {
    let b = run_ex51_experiment(&Ex51Params::default(), &ExperimentSetup::standard()?)?;
    let closed = b.closed_form_error <= 1e-9;
    let rep = b.representation.nonincreasing && b.representation.distances.last().is_some_and(|d| *d <= 5e-2);
    let epi = b.epi.lower_pass && b.epi.upper_pass;
    Ok((
        closed && rep && epi,
        format!(
            "closed-form error {:.1e}; representation distance {:.4} at n=64, nonincreasing {}; \
             worst epi margin {:.4}, worst recovery gap {:.4} (slack {:.2})",
            b.closed_form_error,
            b.representation.distances.last().copied().unwrap_or(f64::NAN),
            b.representation.nonincreasing,
            b.epi.worst_margin,
            b.epi.worst_gap,
            b.epi.slack
        ),
    ))
}

fn exterior_angle_steiner(v: &[Point]) -> Point {
    let m = v.len();
    let mut s = [0.0, 0.0];
    for i in 0..m {
        let (p, c, n) = (v[(i + m - 1) % m], v[i], v[(i + 1) % m]);
        let a = [c[0] - p[0], c[1] - p[1]];
        let b = [n[0] - c[0], n[1] - c[1]];
        let turn = (a[0] * b[1] - a[1] * b[0]).atan2(a[0] * b[0] + a[1] * b[1]);
        s[0] += turn / (2.0 * PI) * c[0];
        s[1] += turn / (2.0 * PI) * c[1];
    }
    s
}

fn inside(body: &ConvexBody2, p: Point) -> bool {
    match body {
        ConvexBody2::Disk { center, radius } => (p[0] - center[0]).hypot(p[1] - center[1]) <= radius + 1e-9,
        ConvexBody2::Polygon(v) => (0..v.len()).all(|i| {
            let (a, b) = (v[i], v[(i + 1) % v.len()]);
            (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]) >= -1e-9
        }),
    }
}

fn random_polygon(rng: &mut ChaCha8Rng) -> ConvexBody2 {
    loop {
        let k = rng.gen_range(3..20);
        let pts: Vec<Point> = (0..k).map(|_| [rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0)]).collect();
        let body = ConvexBody2::polygon(&pts).expect("nonempty");
        if body.vertices().is_some_and(|v| v.len() >= 3) {
            return body;
        }
    }
}

fn geometry_kernel() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut outside, mut equiv): (usize, f64) = (0, 0.0);
    for i in 0..1000 {
        let body = if i % 4 == 3 {
            ConvexBody2::disk([rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)], rng.gen_range(0.0..5.0))
        } else {
            random_polygon(&mut rng)
        };
        let s = steiner_point(&body);
        if !inside(&body, s) {
            outside += 1;
        }
        let t = [rng.gen_range(-100.0..100.0), rng.gen_range(-100.0..100.0)];
        let st = steiner_point(&body.translate(t));
        equiv = equiv.max((st[0] - s[0] - t[0]).abs().max((st[1] - s[1] - t[1]).abs()));
    }
    let mut quad: f64 = 0.0;
    for _ in 0..100 {
        let body = random_polygon(&mut rng);
        let o = exterior_angle_steiner(body.vertices().unwrap());
        let q = steiner_point_quadrature(&body, 1 << 15, 1e-6)?;
        quad = quad.max((q[0] - o[0]).hypot(q[1] - o[1]));
    }
    let pass = outside == 0 && equiv <= 1e-9 && quad <= 1e-6;
    Ok((
        pass,
        format!("{outside} of 1000 Steiner points outside; equivariance error {equiv:.1e}; quadrature vs exterior angles {quad:.1e}"),
    ))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("explicit triple reconstruction", 1.0, explicit_reconstruction),
        ("steiner representation", 30.0, steiner_representation),
        ("construction bounds", 30.0, construction_bounds),
        ("counterexamples", 30.0, counterexamples),
        ("condition verdicts", 10.0, verdict_table),
        ("value function", 60.0, value_function),
        ("conjugacy", 60.0, conjugacy_suite),
        ("stability", 300.0, stability_experiment),
        ("geometry kernel", 60.0, geometry_kernel),
    ];
    let mut failed = Vec::new();
    for (i, (name, limit, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (pass, detail) = match run() {
            Ok(v) => v,
            Err(e) => (false, format!("error: {e}")),
        };
        let secs = start.elapsed().as_secs_f64();
        let pass = pass && secs < *limit;
        println!("criterion {} {name}: {} ({secs:.2}s, limit {limit}s) {detail}", i + 1, if pass { "PASS" } else { "FAIL" });
        if !pass {
            failed.push(i + 1);
        }
    }
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
