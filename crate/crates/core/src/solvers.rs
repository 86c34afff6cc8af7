//! Name-based solver registry.
//!
//! Names follow the method labels used in the experiments, e.g. `cg-irls-m`
//! for CG-IRLSm and `pcgm-irls-lambda` for PCGm-IRLS-lambda.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::baselines::{fista, iht, FistaConfig, IhtConfig};
use crate::error::{Error, Result};
use crate::irls_equality::{cg_irls, cg_irls_modified, irls_exact, EqualityConfig};
use crate::irls_lagrangian::{cg_irls_lambda, irls_lambda_exact, noiseless_lambda, LagrangianConfig};
use crate::linalg::LinearMap;
use crate::problems::{preset, ProblemInstance};
use crate::trace::IterateTrace;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum SolverKind {
    Irls,
    CgIrls,
    CgIrlsM,
    IhtCgIrlsM,
    IrlsLambda,
    CgIrlsLambda,
    PcgIrlsLambda,
    PcgmIrlsLambda,
    Iht,
    Fista,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    /// `min ||x||_tau s.t. Phi x = y`.
    Equality,
    /// `||x||_tau^tau + ||Phi x - y||^2 / (2 lambda)`.
    Lagrangian,
    Iht,
    Fista,
}

impl SolverKind {
    pub const ALL: [SolverKind; 10] = [
        Self::Irls,
        Self::CgIrls,
        Self::CgIrlsM,
        Self::IhtCgIrlsM,
        Self::IrlsLambda,
        Self::CgIrlsLambda,
        Self::PcgIrlsLambda,
        Self::PcgmIrlsLambda,
        Self::Iht,
        Self::Fista,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Irls => "irls",
            Self::CgIrls => "cg-irls",
            Self::CgIrlsM => "cg-irls-m",
            Self::IhtCgIrlsM => "iht+cg-irls-m",
            Self::IrlsLambda => "irls-lambda",
            Self::CgIrlsLambda => "cg-irls-lambda",
            Self::PcgIrlsLambda => "pcg-irls-lambda",
            Self::PcgmIrlsLambda => "pcgm-irls-lambda",
            Self::Iht => "iht",
            Self::Fista => "fista",
        }
    }

    pub fn family(self) -> Family {
        match self {
            Self::Irls | Self::CgIrls | Self::CgIrlsM | Self::IhtCgIrlsM => Family::Equality,
            Self::IrlsLambda | Self::CgIrlsLambda | Self::PcgIrlsLambda | Self::PcgmIrlsLambda => Family::Lagrangian,
            Self::Iht => Family::Iht,
            Self::Fista => Family::Fista,
        }
    }

    /// Parses a comma-separated list such as `iht,cg-irls-m`.
    pub fn parse_list(s: &str) -> Result<Vec<Self>> {
        s.split(',').map(str::trim).filter(|t| !t.is_empty()).map(str::parse).collect()
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| {
            let names: Vec<_> = Self::ALL.iter().map(|k| k.name()).collect();
            Error::InvalidParameter(format!("unknown solver '{s}', expected one of {}", names.join(", ")))
        })
    }
}

impl TryFrom<String> for SolverKind {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<SolverKind> for String {
    fn from(k: SolverKind) -> String {
        k.name().to_string()
    }
}

/// Optional overrides applied on top of each solver's defaults. Keys that do
/// not concern a solver are ignored by it, so one set can drive a mixed list.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    /// Sparsity index of the IRLS smoothing rule, and the IHT sparsity.
    #[serde(default, rename = "K", skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub maxiter_outer: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub maxiter_cg: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual_floor: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start_iht: Option<usize>,
    /// IHT / FISTA iteration cap.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub maxiter: Option<usize>,
    /// IHT / FISTA relative-change stop.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop_tol: Option<f64>,
}

impl SolverParams {
    /// Fills unset fields from `other`.
    pub fn or(self, other: &SolverParams) -> SolverParams {
        SolverParams {
            tau: self.tau.or(other.tau),
            k: self.k.or(other.k),
            beta: self.beta.or(other.beta),
            eps_min: self.eps_min.or(other.eps_min),
            lambda: self.lambda.or(other.lambda),
            phi: self.phi.or(other.phi),
            alpha: self.alpha.or(other.alpha),
            maxiter_outer: self.maxiter_outer.or(other.maxiter_outer),
            maxiter_cg: self.maxiter_cg.or(other.maxiter_cg),
            residual_floor: self.residual_floor.or(other.residual_floor),
            start_iht: self.start_iht.or(other.start_iht),
            maxiter: self.maxiter.or(other.maxiter),
            stop_tol: self.stop_tol.or(other.stop_tol),
        }
    }
}

/// What a solver needs to know about a problem to pick its defaults.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProblemShape {
    pub n: usize,
    pub m: usize,
    /// Planted sparsity, used for the default `K = ceil(1.1 k)` and by IHT.
    pub k: usize,
    /// Smoothing index from a named setting; overrides `ceil(1.1 k)`.
    pub big_k: Option<usize>,
    pub noiseless: bool,
    /// Default regularization for the Lagrangian solvers and FISTA.
    pub lambda: f64,
}

impl ProblemShape {
    pub fn of(inst: &ProblemInstance) -> Self {
        let big_k = inst.setting.as_deref().and_then(|s| preset(s).ok()).map(|p| p.big_k);
        Self { n: inst.n(), m: inst.m(), k: inst.k, big_k, noiseless: inst.msnr.is_noiseless(), lambda: inst.default_lambda() }
    }
}

/// `K = ceil(1.1 k)`, at least 1 and below `N`.
pub fn default_big_k(k: usize, n: usize) -> usize {
    ((1.1 * k as f64).ceil() as usize).clamp(1, n.saturating_sub(1).max(1))
}

/// Effective configuration of one solver run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum SolverConfig {
    Equality(EqualityConfig),
    Lagrangian(LagrangianConfig),
    Iht(IhtConfig),
    Fista(FistaConfig),
}

pub fn configure(kind: SolverKind, shape: &ProblemShape, p: &SolverParams) -> Result<SolverConfig> {
    let (n, m) = (shape.n, shape.m);
    let tau = p.tau.unwrap_or(1.0);
    let cfg = match kind.family() {
        Family::Equality => {
            let big_k = p.k.or(shape.big_k).unwrap_or_else(|| default_big_k(shape.k, n));
            let mut c = match kind {
                SolverKind::Irls => EqualityConfig::exact(n, big_k, tau),
                SolverKind::CgIrls => EqualityConfig::new(n, big_k, tau),
                SolverKind::CgIrlsM => EqualityConfig::modified(n, m, big_k, tau),
                _ => EqualityConfig::iht_modified(n, m, big_k, tau),
            };
            set(&mut c.beta, p.beta);
            set(&mut c.eps_min, p.eps_min);
            set(&mut c.maxiter_outer, p.maxiter_outer);
            set(&mut c.residual_floor, p.residual_floor);
            set(&mut c.start_iht, p.start_iht);
            if p.maxiter_cg.is_some() {
                c.maxiter_cg = p.maxiter_cg;
            }
            c.validate(n)?;
            SolverConfig::Equality(c)
        }
        Family::Lagrangian => {
            let lambda = p.lambda.unwrap_or(if shape.noiseless { noiseless_lambda(m) } else { shape.lambda });
            let mut c = match kind {
                SolverKind::IrlsLambda | SolverKind::CgIrlsLambda => LagrangianConfig::new(n, m, lambda, tau),
                SolverKind::PcgIrlsLambda => LagrangianConfig::preconditioned(n, m, lambda, tau),
                _ if shape.noiseless => LagrangianConfig { lambda, ..LagrangianConfig::pcgm_noiseless(n, m, tau) },
                _ => LagrangianConfig::pcgm(n, m, lambda, tau),
            };
            set(&mut c.phi, p.phi);
            set(&mut c.alpha, p.alpha);
            set(&mut c.eps_min, p.eps_min);
            set(&mut c.maxiter_outer, p.maxiter_outer);
            set(&mut c.residual_floor, p.residual_floor);
            if p.maxiter_cg.is_some() {
                c.maxiter_cg = p.maxiter_cg;
            }
            c.validate()?;
            SolverConfig::Lagrangian(c)
        }
        Family::Iht => {
            let mut c = IhtConfig::new(p.k.unwrap_or(shape.k).max(1));
            set(&mut c.maxiter, p.maxiter);
            set(&mut c.stop_tol, p.stop_tol);
            SolverConfig::Iht(c)
        }
        Family::Fista => {
            let lambda = p.lambda.unwrap_or(if shape.noiseless { noiseless_lambda(m) } else { shape.lambda });
            let mut c = FistaConfig::new(lambda);
            set(&mut c.maxiter, p.maxiter);
            set(&mut c.stop_tol, p.stop_tol);
            SolverConfig::Fista(c)
        }
    };
    Ok(cfg)
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

/// A fully configured solver.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Solver {
    pub kind: SolverKind,
    pub config: SolverConfig,
}

impl Solver {
    pub fn new(kind: SolverKind, shape: &ProblemShape, params: &SolverParams) -> Result<Self> {
        Ok(Self { kind, config: configure(kind, shape, params)? })
    }

    pub fn config_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("solver config serializes")
    }

    /// Runs the solver. `reference` fills the relative-error column.
    pub fn solve(&self, op: &dyn LinearMap, y: &[f64], reference: Option<&[f64]>) -> Result<(Vec<f64>, IterateTrace)> {
        let mismatch = || Error::InvalidParameter(format!("configuration does not belong to solver {}", self.kind));
        match (&self.config, self.kind) {
            (SolverConfig::Equality(c), SolverKind::Irls) => irls_exact(op, y, c, reference),
            (SolverConfig::Equality(c), SolverKind::CgIrls) => cg_irls(op, y, c, reference),
            (SolverConfig::Equality(c), SolverKind::CgIrlsM | SolverKind::IhtCgIrlsM) => cg_irls_modified(op, y, c, reference),
            (SolverConfig::Lagrangian(c), SolverKind::IrlsLambda) => irls_lambda_exact(op, y, c, reference),
            (SolverConfig::Lagrangian(c), k) if k.family() == Family::Lagrangian => cg_irls_lambda(op, y, c, reference),
            (SolverConfig::Iht(c), SolverKind::Iht) => iht(op, y, c, reference),
            (SolverConfig::Fista(c), SolverKind::Fista) => fista(op, y, c, reference),
            _ => Err(mismatch()),
        }
    }

    /// `lambda` and `tau` when the solver minimizes a regularized objective.
    pub fn objective_params(&self) -> Option<(f64, f64)> {
        match &self.config {
            SolverConfig::Lagrangian(c) => Some((c.lambda, c.tau)),
            SolverConfig::Fista(c) => Some((c.lambda, 1.0)),
            _ => None,
        }
    }
}
