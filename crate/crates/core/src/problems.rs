//! Synthetic sparse-recovery instances.
//!
//! An instance is a pure function of `(N, m, k, msnr, seed)`. Each random
//! ingredient has its own stream (see [`crate::rng`]): the support, the
//! nonzero values, the DCT rows and the noise. Changing the noise level
//! therefore leaves `x*` and `Phi` untouched.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{LinearMap, Operator, OperatorSpec, PartialDct};
use crate::rng::{sub_seed, Stream, GENERATOR};

/// Measurement signal-to-noise ratio; `Infinite` means noiseless.
///
/// Serialized as a number or the string `"inf"`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MsnrRepr", into = "MsnrRepr")]
pub enum Msnr {
    Finite(f64),
    Infinite,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum MsnrRepr {
    Num(f64),
    Str(String),
}

impl TryFrom<MsnrRepr> for Msnr {
    type Error = Error;
    fn try_from(r: MsnrRepr) -> Result<Self> {
        match r {
            MsnrRepr::Num(v) => Msnr::finite(v),
            MsnrRepr::Str(s) => s.parse(),
        }
    }
}

impl From<Msnr> for MsnrRepr {
    fn from(m: Msnr) -> Self {
        match m {
            Msnr::Finite(v) => MsnrRepr::Num(v),
            Msnr::Infinite => MsnrRepr::Str("inf".into()),
        }
    }
}

impl Msnr {
    pub fn finite(v: f64) -> Result<Self> {
        if v == f64::INFINITY {
            return Ok(Msnr::Infinite);
        }
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidParameter(format!("msnr = {v} must be positive")));
        }
        Ok(Msnr::Finite(v))
    }

    pub fn is_noiseless(&self) -> bool {
        matches!(self, Msnr::Infinite)
    }
}

impl FromStr for Msnr {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "none" => Ok(Msnr::Infinite),
            t => {
                let v: f64 = t.parse().map_err(|_| Error::InvalidParameter(format!("cannot parse msnr {s:?}")))?;
                Msnr::finite(v)
            }
        }
    }
}

impl fmt::Display for Msnr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Msnr::Finite(v) => write!(f, "{v}"),
            Msnr::Infinite => f.write_str("inf"),
        }
    }
}

/// `sigma = sqrt(k) / (msnr sqrt(m))`, zero when noiseless.
pub fn noise_sigma(k: usize, m: usize, msnr: Msnr) -> f64 {
    match msnr {
        Msnr::Infinite => 0.0,
        Msnr::Finite(v) => (k as f64).sqrt() / (v * (m as f64).sqrt()),
    }
}

/// Result of [`lambda_heuristic`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LambdaChoice {
    pub lambda: f64,
    /// Set when `sigma = 0`; the caller should fall back to
    /// [`noiseless_lambda`](crate::irls_lagrangian::noiseless_lambda).
    pub noiseless: bool,
}

pub const LAMBDA_CONSTANT: f64 = 0.48;

/// `lambda = 0.48 sigma sqrt(m ln N)`.
pub fn lambda_heuristic(sigma: f64, m: usize, n: usize) -> LambdaChoice {
    if sigma == 0.0 {
        return LambdaChoice { lambda: 0.0, noiseless: true };
    }
    LambdaChoice { lambda: LAMBDA_CONSTANT * sigma * (m as f64 * (n as f64).ln()).sqrt(), noiseless: false }
}

/// Problem dimensions of a named benchmark setting; `big_k` is the index
/// used by the rank-based smoothing rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SettingPreset {
    pub label: &'static str,
    #[serde(rename = "N")]
    pub n: usize,
    pub m: usize,
    pub k: usize,
    #[serde(rename = "K")]
    pub big_k: usize,
}

pub const PRESETS: [SettingPreset; 8] = [
    SettingPreset { label: "A", n: 2000, m: 800, k: 30, big_k: 50 },
    SettingPreset { label: "B", n: 4000, m: 1600, k: 60, big_k: 100 },
    SettingPreset { label: "C", n: 8000, m: 3200, k: 120, big_k: 200 },
    SettingPreset { label: "D", n: 100_000, m: 40_000, k: 1500, big_k: 2500 },
    SettingPreset { label: "E", n: 1_000_000, m: 400_000, k: 15_000, big_k: 25_000 },
    // Laptop-sized variants with the same m/N and K/k ratios.
    SettingPreset { label: "desk-A", n: 500, m: 200, k: 8, big_k: 14 },
    SettingPreset { label: "desk-B", n: 800, m: 320, k: 12, big_k: 20 },
    SettingPreset { label: "desk-C", n: 1000, m: 400, k: 15, big_k: 25 },
];

pub fn preset(label: &str) -> Result<SettingPreset> {
    PRESETS
        .iter()
        .find(|p| p.label.eq_ignore_ascii_case(label))
        .copied()
        .ok_or_else(|| Error::InvalidParameter(format!("unknown setting {label:?}")))
}

#[derive(Clone, Debug)]
pub struct ProblemInstance {
    pub operator: Operator,
    pub x_star: Vec<f64>,
    pub e: Vec<f64>,
    pub y: Vec<f64>,
    pub k: usize,
    pub seed: u64,
    pub setting: Option<String>,
    pub msnr: Msnr,
}

/// Draw the instance for `seed`. The operator is a partial DCT whose rows
/// come from the `"rows"` sub-seed.
pub fn generate_instance(n: usize, m: usize, k: usize, msnr: Msnr, seed: u64) -> Result<ProblemInstance> {
    if !(k <= m && m <= n) || m == 0 {
        return Err(Error::Dimension(format!("need k <= m <= N and m >= 1, got N = {n}, m = {m}, k = {k}")));
    }
    let support = Stream::tagged(seed, "support").partial_permutation(n, k);
    let values = Stream::tagged(seed, "values").normal_vec(k);
    let mut x_star = vec![0.0; n];
    for (&j, v) in support.iter().zip(values) {
        x_star[j] = v;
    }
    let op = PartialDct::random(n, m, sub_seed(seed, "rows"))?;
    let sigma = noise_sigma(k, m, msnr);
    let e: Vec<f64> = if sigma == 0.0 {
        vec![0.0; m]
    } else {
        Stream::tagged(seed, "noise").normal_vec(m).into_iter().map(|z| sigma * z).collect()
    };
    let y: Vec<f64> = op.apply(&x_star).iter().zip(&e).map(|(a, b)| a + b).collect();
    Ok(ProblemInstance { operator: Operator::PartialDct(op), x_star, e, y, k, seed, setting: None, msnr })
}

/// [`generate_instance`] with the dimensions of a named setting.
pub fn generate_setting(label: &str, msnr: Msnr, seed: u64) -> Result<ProblemInstance> {
    let p = preset(label)?;
    let mut inst = generate_instance(p.n, p.m, p.k, msnr, seed)?;
    inst.setting = Some(p.label.to_string());
    Ok(inst)
}

impl ProblemInstance {
    pub fn n(&self) -> usize {
        self.operator.cols()
    }

    pub fn m(&self) -> usize {
        self.operator.rows()
    }

    pub fn sigma(&self) -> f64 {
        noise_sigma(self.k, self.m(), self.msnr)
    }

    /// Default Lagrangian weight: the heuristic for noisy data and
    /// `m 1e-8` for noiseless data.
    pub fn default_lambda(&self) -> f64 {
        let c = lambda_heuristic(self.sigma(), self.m(), self.n());
        if c.noiseless {
            crate::irls_lagrangian::noiseless_lambda(self.m())
        } else {
            c.lambda
        }
    }

    pub fn manifest(&self, embed_vectors: bool) -> InstanceManifest {
        InstanceManifest {
            version: crate::VERSION.to_string(),
            generator: GENERATOR.to_string(),
            setting: self.setting.clone(),
            n: self.n(),
            m: self.m(),
            k: self.k,
            msnr: self.msnr,
            seed: self.seed,
            operator: self.operator.spec(),
            x_star: embed_vectors.then(|| self.x_star.clone()),
            e: embed_vectors.then(|| self.e.clone()),
            y: embed_vectors.then(|| self.y.clone()),
        }
    }
}

/// JSON description of an instance. Vectors are regenerated from the seed
/// unless embedded.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceManifest {
    pub version: String,
    pub generator: String,
    #[serde(default)]
    pub setting: Option<String>,
    #[serde(rename = "N")]
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub msnr: Msnr,
    pub seed: u64,
    pub operator: OperatorSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_star: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<Vec<f64>>,
}

impl InstanceManifest {
    pub fn write_json(&self, w: impl Write) -> Result<()> {
        serde_json::to_writer_pretty(w, self)?;
        Ok(())
    }

    pub fn read_json(r: impl Read) -> Result<Self> {
        Ok(serde_json::from_reader(r)?)
    }

    /// Rebuild the instance. Embedded vectors take precedence over
    /// regeneration; a partial embedding is rejected.
    pub fn instance(&self, base: Option<&std::path::Path>) -> Result<ProblemInstance> {
        match (&self.x_star, &self.e, &self.y) {
            (None, None, None) => {
                let mut inst = generate_instance(self.n, self.m, self.k, self.msnr, self.seed)?;
                if inst.operator.spec() != self.operator {
                    return Err(Error::InvalidParameter("manifest operator does not match its seed".into()));
                }
                inst.setting = self.setting.clone();
                Ok(inst)
            }
            (Some(x), Some(e), Some(y)) => {
                let operator = self.operator.build(base)?;
                crate::error::check_len("x_star", x.len(), operator.cols())?;
                crate::error::check_len("e", e.len(), operator.rows())?;
                crate::error::check_len("y", y.len(), operator.rows())?;
                Ok(ProblemInstance {
                    operator,
                    x_star: x.clone(),
                    e: e.clone(),
                    y: y.clone(),
                    k: self.k,
                    seed: self.seed,
                    setting: self.setting.clone(),
                    msnr: self.msnr,
                })
            }
            _ => Err(Error::InvalidParameter("manifest must embed all of x_star, e, y or none".into())),
        }
    }
}
