//! Hamiltonian descriptions with their certificate data, the example
//! library and the hypothesis checkers.

mod checks;
mod library;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use checks::*;
pub use library::*;

use crate::convex_core::ConstraintSet1D;
use crate::error::{Error, Result};
use crate::ext::INF;
use crate::legendre::ConjugateProfile;

pub type Fn1 = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type Fn2 = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
pub type Fn3 = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;
pub type ConjugateFactory = Arc<dyn Fn(f64, f64) -> ConjugateProfile + Send + Sync>;

/// Time coefficient given as a constant or a piecewise-constant table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coefficient {
    Constant(f64),
    /// `values[i]` on `[breaks[i], breaks[i+1])`, the last value extends to infinity.
    Piecewise { breaks: Vec<f64>, values: Vec<f64> },
}

impl Coefficient {
    pub fn constant(v: f64) -> Self {
        Self::Constant(v)
    }

    pub fn piecewise(breaks: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breaks.is_empty() || breaks.len() != values.len() {
            return Err(Error::InvalidParameter("piecewise table needs matching nonempty breaks/values".into()));
        }
        if breaks.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter("piecewise breaks must increase".into()));
        }
        if breaks[0] > 0.0 {
            return Err(Error::InvalidParameter("piecewise table must start at t = 0".into()));
        }
        Ok(Self::Piecewise { breaks, values })
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Self::Constant(v) => *v,
            Self::Piecewise { breaks, values } => {
                let i = breaks.partition_point(|&b| b <= t);
                values[i.saturating_sub(1)]
            }
        }
    }

    pub fn sup_norm(&self) -> f64 {
        match self {
            Self::Constant(v) => v.abs(),
            Self::Piecewise { values, .. } => values.iter().fold(0.0, |m, v| m.max(v.abs())),
        }
    }

    pub fn min_value(&self) -> f64 {
        match self {
            Self::Constant(v) => *v,
            Self::Piecewise { values, .. } => values.iter().copied().fold(INF, f64::min),
        }
    }

    pub fn abs(&self) -> Self {
        match self {
            Self::Constant(v) => Self::Constant(v.abs()),
            Self::Piecewise { breaks, values } => {
                Self::Piecewise { breaks: breaks.clone(), values: values.iter().map(|v| v.abs()).collect() }
            }
        }
    }

    /// `∫_t^∞ c(s) e^{-rate s} ds`, exact for the piecewise-constant form.
    pub fn exp_tail(&self, t: f64, rate: f64) -> f64 {
        let seg = |c: f64, a: f64, b: f64| {
            if c == 0.0 || a >= b {
                0.0
            } else if rate <= 0.0 {
                if b.is_infinite() {
                    c.signum() * INF
                } else {
                    c * (b - a)
                }
            } else {
                let eb = if b.is_infinite() { 0.0 } else { (-rate * b).exp() };
                c * ((-rate * a).exp() - eb) / rate
            }
        };
        match self {
            Self::Constant(v) => seg(*v, t, INF),
            Self::Piecewise { breaks, values } => {
                let mut total = 0.0;
                for i in 0..values.len() {
                    let a = breaks[i].max(t);
                    let b = if i + 1 < breaks.len() { breaks[i + 1] } else { INF };
                    total += seg(values[i], a, b);
                }
                total
            }
        }
    }
}

impl From<f64> for Coefficient {
    fn from(v: f64) -> Self {
        Self::Constant(v)
    }
}

/// Serializable parameters identifying a library Hamiltonian.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpecParams {
    pub id: String,
    pub alpha: Option<Coefficient>,
    pub beta: Option<Coefficient>,
    pub gamma: Option<f64>,
    pub n: Option<u32>,
    pub q: Option<f64>,
    pub constraint: ConstraintSet1D,
}

/// A Hamiltonian `H(t, x, p)` with the functions certifying its hypotheses.
#[derive(Clone)]
pub struct HamiltonianSpec {
    pub name: String,
    pub params: SpecParams,
    pub h: Fn3,
    pub conjugate: Option<ConjugateFactory>,
    pub lambda: Fn2,
    pub phi: Fn1,
    pub c: Fn1,
    pub k: Fn1,
    pub q_bd: Fn1,
    pub constraint: ConstraintSet1D,
    /// Scaling `θ(t)` for class-ℋ membership.
    pub theta: Option<Fn1>,
    /// `ψ_r(t)`, called as `psi_r(r, t)`.
    pub psi_r: Option<Fn2>,
    /// Bound `|H*| <= ψ(t)` along admissible trajectories.
    pub psi: Option<Fn1>,
    /// `∫_t^∞ ψ`.
    pub psi_tail: Option<Fn1>,
    /// A priori bound on `|x(t)|` for admissible trajectories from `A ∩ rB`, called as `(r, t)`.
    pub state_bound: Option<Fn2>,
    /// Sup-norm of `θ` when present.
    pub theta_sup: Option<f64>,
}

impl fmt::Debug for HamiltonianSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HamiltonianSpec").field("name", &self.name).field("params", &self.params).finish_non_exhaustive()
    }
}

impl HamiltonianSpec {
    pub fn h(&self, t: f64, x: f64, p: f64) -> f64 {
        (self.h)(t, x, p)
    }

    pub fn lambda(&self, t: f64, x: f64) -> f64 {
        (self.lambda)(t, x)
    }

    pub fn conjugate(&self, t: f64, x: f64) -> Result<ConjugateProfile> {
        match &self.conjugate {
            Some(f) => Ok(f(t, x)),
            None => Err(Error::NoClosedForm(self.name.clone())),
        }
    }

    /// `H*(t, x, v)` from the closed form, `+inf` off the domain.
    pub fn hstar(&self, t: f64, x: f64, v: f64) -> Result<f64> {
        Ok(self.conjugate(t, x)?.eval(v))
    }

    /// Rescaled Hamiltonian `θ(t)^{-1} H(t, x, θ(t) p)` sharing λ, φ, c, k, q and `A`.
    pub fn rescaled(&self) -> Result<HamiltonianSpec> {
        let theta = self.theta.clone().ok_or(Error::MissingCertificate("theta"))?;
        let mut out = self.clone();
        out.name = format!("{}-rescaled", self.name);
        let h = self.h.clone();
        let th = theta.clone();
        out.h = Arc::new(move |t, x, p| {
            let s = th(t);
            h(t, x, s * p) / s
        });
        if let Some(conj) = self.conjugate.clone() {
            let th = theta.clone();
            out.conjugate = Some(Arc::new(move |t, x| conj(t, x).scaled(1.0 / th(t))));
        }
        Ok(out)
    }
}
