use std::sync::Arc;

use crate::convex_core::{ConstraintSet1D, ConvexFn1D, Interval};
use crate::error::{Error, Result};
use crate::legendre::ConjugateProfile;

use super::{Coefficient, HamiltonianSpec, SpecParams};

fn check_nonneg(name: &str, c: &Coefficient) -> Result<()> {
    if c.min_value() < 0.0 {
        return Err(Error::InvalidParameter(format!("{name} must be nonnegative")));
    }
    Ok(())
}

/// `max{α(t)|p||x| - α(t)e^{-γt}, 0} + |p|` on `A = (-inf, 0]`.
pub fn make_ex35(alpha: Coefficient, gamma: f64) -> Result<HamiltonianSpec> {
    make_ex35_on(alpha, gamma, ConstraintSet1D::UpTo { a: 0.0 })
}

/// Same Hamiltonian on an arbitrary interval-type constraint set.
pub fn make_ex35_on(alpha: Coefficient, gamma: f64, constraint: ConstraintSet1D) -> Result<HamiltonianSpec> {
    check_nonneg("alpha", &alpha)?;
    if !(gamma > 0.0) {
        return Err(Error::InvalidParameter("gamma must be positive".into()));
    }
    let a_sup = alpha.sup_norm();
    let al = alpha.clone();
    let h = Arc::new(move |t: f64, x: f64, p: f64| {
        let a = al.eval(t);
        (a * p.abs() * x.abs() - a * (-gamma * t).exp()).max(0.0) + p.abs()
    });
    let al = alpha.clone();
    let conjugate = Arc::new(move |t: f64, x: f64| {
        let a = al.eval(t);
        let lam = a * x.abs() + a + 1.0;
        if x == 0.0 {
            return ConjugateProfile::new(ConvexFn1D::new(Interval { lo: -1.0, hi: 1.0 }, |_| 0.0), lam);
        }
        let edge = a * x.abs() + 1.0;
        let top = a * (-gamma * t).exp();
        let scale = (-gamma * t).exp() / x.abs();
        let f = ConvexFn1D::new(Interval { lo: -edge, hi: edge }, move |v: f64| ((v.abs() - 1.0) * scale).clamp(0.0, top))
            .with_breakpoints(vec![-1.0, 1.0]);
        ConjugateProfile::new(f, lam)
    });
    let al = alpha.clone();
    let lambda = Arc::new(move |t: f64, x: f64| {
        let a = al.eval(t);
        a * x.abs() + a + 1.0
    });
    let al = alpha.clone();
    let c = Arc::new(move |t: f64| al.eval(t) + 1.0);
    let al = alpha.clone();
    let k = Arc::new(move |t: f64| al.eval(t));
    let bd: Vec<f64> = constraint.boundary().iter().map(|b| b.0.abs()).collect();
    let al = alpha.clone();
    let q_bd = Arc::new(move |t: f64| {
        let a = al.eval(t);
        bd.iter().map(|b| a * b + a + 1.0).fold(0.0, f64::max)
    });
    let (psi_r, state_bound): (Option<super::Fn2>, Option<super::Fn2>) = if constraint.is_bounded() {
        let norm_a = constraint.norm();
        let al = alpha.clone();
        (
            Some(Arc::new(move |_r: f64, t: f64| {
                let a = al.eval(t);
                (-gamma * t).exp() * (a * norm_a + a + 1.0)
            })),
            Some(Arc::new(move |_r: f64, _t: f64| norm_a)),
        )
    } else if gamma > a_sup {
        let al = alpha.clone();
        (
            Some(Arc::new(move |r: f64, t: f64| {
                let a = al.eval(t);
                (r + t) * a * ((a_sup - gamma) * t).exp() + a * (-gamma * t).exp() + (-gamma * t).exp()
            })),
            Some(Arc::new(move |r: f64, t: f64| (r + t) * (a_sup * t).exp())),
        )
    } else {
        (None, None)
    };
    let al = alpha.clone();
    let psi = Arc::new(move |t: f64| al.eval(t) * (-gamma * t).exp());
    let al = alpha.clone();
    let psi_tail = Arc::new(move |t: f64| al.exp_tail(t, gamma));
    Ok(HamiltonianSpec {
        name: "ex35".into(),
        params: SpecParams {
            id: "ex35".into(),
            alpha: Some(alpha),
            beta: None,
            gamma: Some(gamma),
            n: None,
            q: None,
            constraint,
        },
        h,
        conjugate: Some(conjugate),
        lambda,
        phi: Arc::new(|_| 0.0),
        c,
        k,
        q_bd,
        constraint,
        theta: Some(Arc::new(move |t: f64| (-gamma * t).exp())),
        psi_r,
        psi: Some(psi),
        psi_tail: Some(psi_tail),
        state_bound,
        theta_sup: Some(1.0),
    })
}

/// Family member `H_n` (`n = Some(n)`) or its limit `H` (`n = None`), on `A = (-inf, 0]`.
pub fn make_ex51(alpha: Coefficient, beta: Coefficient, gamma: f64, n: Option<u32>) -> Result<HamiltonianSpec> {
    check_nonneg("alpha", &alpha)?;
    if !(gamma > 0.0) {
        return Err(Error::InvalidParameter("gamma must be positive".into()));
    }
    if n == Some(0) {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    let inv_n = n.map(|n| 1.0 / n as f64).unwrap_or(0.0);
    let (al, be) = (alpha.clone(), beta.clone());
    let h = Arc::new(move |t: f64, x: f64, p: f64| {
        let a = al.eval(t);
        let pp = p.max(0.0);
        (a * pp * x.abs() - a * (-gamma * t).exp()).max(0.0) + inv_n * pp - inv_n * be.eval(t) * (-2.0 * gamma * t).exp()
    });
    let (al, be) = (alpha.clone(), beta.clone());
    let conjugate = Arc::new(move |t: f64, x: f64| {
        let a = al.eval(t);
        let b = be.eval(t);
        let lam = a * x.abs() + a + b.abs() + 1.0;
        let base = inv_n * b * (-2.0 * gamma * t).exp();
        if x == 0.0 {
            return ConjugateProfile::new(ConvexFn1D::new(Interval { lo: 0.0, hi: inv_n }, move |_| base), lam);
        }
        let top = a * (-gamma * t).exp();
        let scale = (-gamma * t).exp() / x.abs();
        let f = ConvexFn1D::new(Interval { lo: 0.0, hi: a * x.abs() + inv_n }, move |v: f64| {
            base + ((v - inv_n) * scale).clamp(0.0, top)
        });
        let f = if inv_n > 0.0 { f.with_breakpoints(vec![inv_n]) } else { f };
        ConjugateProfile::new(f, lam)
    });
    let (al, be) = (alpha.clone(), beta.abs());
    let lambda = Arc::new(move |t: f64, x: f64| {
        let a = al.eval(t);
        a * x.abs() + a + be.eval(t) + 1.0
    });
    let (al, be) = (alpha.clone(), beta.abs());
    let c = Arc::new(move |t: f64| al.eval(t) + be.eval(t) + 1.0);
    let be = beta.abs();
    let phi = Arc::new(move |t: f64| -(-gamma * t).exp() * be.eval(t));
    let al = alpha.clone();
    let k = Arc::new(move |t: f64| al.eval(t));
    let (al, be) = (alpha.clone(), beta.abs());
    let q_bd = Arc::new(move |t: f64| al.eval(t) + be.eval(t) + 1.0);
    let (al, be) = (alpha.clone(), beta.abs());
    let psi_r = Arc::new(move |r: f64, t: f64| {
        let a = al.eval(t);
        (-gamma * t).exp() * (a * r + a + be.eval(t) + 1.0)
    });
    let (al, be) = (alpha.clone(), beta.abs());
    let psi = Arc::new(move |t: f64| al.eval(t) * (-gamma * t).exp() + be.eval(t) * (-2.0 * gamma * t).exp());
    let (al, be) = (alpha.clone(), beta.abs());
    let psi_tail = Arc::new(move |t: f64| al.exp_tail(t, gamma) + be.exp_tail(t, 2.0 * gamma));
    let name = match n {
        Some(n) => format!("ex51-n{n}"),
        None => "ex51-limit".to_string(),
    };
    let constraint = ConstraintSet1D::UpTo { a: 0.0 };
    Ok(HamiltonianSpec {
        name,
        params: SpecParams {
            id: "ex51".into(),
            alpha: Some(alpha),
            beta: Some(beta),
            gamma: Some(gamma),
            n,
            q: None,
            constraint,
        },
        h,
        conjugate: Some(conjugate),
        lambda,
        phi,
        c,
        k,
        q_bd,
        constraint,
        theta: Some(Arc::new(move |t: f64| (-gamma * t).exp())),
        psi_r: Some(psi_r),
        psi: Some(psi),
        psi_tail: Some(psi_tail),
        state_bound: Some(Arc::new(|r: f64, _t: f64| r)),
        theta_sup: Some(1.0),
    })
}

/// `max{|p||x| - q e^{-t}, 0} + |p|` on `A = (-inf, 0]` with the displayed conjugate.
pub fn make_ex33(q: f64) -> Result<HamiltonianSpec> {
    if !(q > 0.0) {
        return Err(Error::InvalidParameter("q must be positive".into()));
    }
    let h = Arc::new(move |t: f64, x: f64, p: f64| (p.abs() * x.abs() - q * (-t).exp()).max(0.0) + p.abs());
    let conjugate = Arc::new(move |t: f64, x: f64| {
        let lam = x.abs() + q + 1.0;
        if x == 0.0 {
            return ConjugateProfile::new(ConvexFn1D::new(Interval { lo: -1.0, hi: 1.0 }, |_| 0.0), lam);
        }
        let edge = x.abs() + 1.0;
        let top = q * (-t).exp();
        let scale = top / x.abs();
        // the clamp absorbs cancellation in `|v| - 1` for tiny |x|; the exact value never exceeds `top`
        let f = ConvexFn1D::new(Interval { lo: -edge, hi: edge }, move |v: f64| ((v.abs() - 1.0) * scale).clamp(0.0, top))
            .with_breakpoints(vec![-1.0, 1.0]);
        ConjugateProfile::new(f, lam)
    });
    let constraint = ConstraintSet1D::UpTo { a: 0.0 };
    Ok(HamiltonianSpec {
        name: "ex33".into(),
        params: SpecParams { id: "ex33".into(), alpha: None, beta: None, gamma: None, n: None, q: Some(q), constraint },
        h,
        conjugate: Some(conjugate),
        lambda: Arc::new(move |_t, x: f64| x.abs() + q + 1.0),
        phi: Arc::new(|_| 0.0),
        c: Arc::new(move |_| q + 1.0),
        k: Arc::new(|_| 1.0),
        q_bd: Arc::new(move |_| q + 1.0),
        constraint,
        theta: None,
        psi_r: None,
        psi: Some(Arc::new(move |t: f64| q * (-t).exp())),
        psi_tail: Some(Arc::new(move |t: f64| q * (-t).exp())),
        state_bound: None,
        theta_sup: None,
    })
}

/// Axis reduction of `|(p1, p2)|`: `H = |p|`, `H*` the indicator of `[-1, 1]`,
/// on `A = (-inf, 0]` (the first coordinate of the half-plane).
pub fn make_ex34() -> HamiltonianSpec {
    let mut s = make_abs(ConstraintSet1D::UpTo { a: 0.0 });
    s.name = "ex34".into();
    s.params.id = "ex34".into();
    s
}

/// `H = |p|` on the given constraint set.
pub fn make_abs(constraint: ConstraintSet1D) -> HamiltonianSpec {
    HamiltonianSpec {
        name: "abs".into(),
        params: SpecParams { id: "abs".into(), alpha: None, beta: None, gamma: None, n: None, q: None, constraint },
        h: Arc::new(|_, _, p: f64| p.abs()),
        conjugate: Some(Arc::new(|_, _| {
            ConjugateProfile::new(ConvexFn1D::new(Interval { lo: -1.0, hi: 1.0 }, |_| 0.0), 1.0)
        })),
        lambda: Arc::new(|_, _| 1.0),
        phi: Arc::new(|_| 0.0),
        c: Arc::new(|_| 1.0),
        k: Arc::new(|_| 0.0),
        q_bd: Arc::new(|_| 1.0),
        constraint,
        theta: None,
        psi_r: None,
        psi: Some(Arc::new(|_| 0.0)),
        psi_tail: Some(Arc::new(|_| 0.0)),
        state_bound: None,
        theta_sup: None,
    }
}

/// Looks up a library Hamiltonian by id.
pub fn by_id(id: &str, alpha: Coefficient, beta: Coefficient, gamma: f64, n: Option<u32>) -> Result<HamiltonianSpec> {
    match id {
        "ex35" => make_ex35(alpha, gamma),
        "ex51" => make_ex51(alpha, beta, gamma, n),
        "ex33" => make_ex33(1.0),
        "ex34" => Ok(make_ex34()),
        "abs" => Ok(make_abs(ConstraintSet1D::Line)),
        other => Err(Error::InvalidParameter(format!("unknown hamiltonian id {other}"))),
    }
}

pub const KNOWN_IDS: [&str; 5] = ["ex35", "ex51", "ex33", "ex34", "abs"];
