//! Deterministic, seedable catalog of sample potentials `v: Z+ -> R`.
//!
//! Every potential is a pure function of `(spec, n)`: identical inputs give
//! bit-identical values across runs and thread schedules. The Anderson kind
//! uses a counter-mode splitmix64 generator keyed by `(seed, n)` so that
//! `v(n)` is O(1) random access with no shared generator state.
//!
//! The catalog itself is a choice of this artifact; the families are standard
//! test potentials (periodic, Anderson, sparse bumps, almost-Mathieu).

use crate::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialKind {
    Zero,
    Constant,
    Periodic,
    Anderson,
    Sparse,
    AlmostMathieu,
}

/// Flat description of a potential; only the fields relevant to `kind` are
/// read. Field names match the CLI config schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    pub kind: PotentialKind,
    /// constant: the value c.
    #[serde(default)]
    pub c: f64,
    /// periodic: one period of values.
    #[serde(default)]
    pub values: Vec<f64>,
    /// anderson: uniform width W (values in [-W/2, W/2)).
    #[serde(default, rename = "W")]
    pub w: f64,
    /// anderson: generator seed.
    #[serde(default)]
    pub seed: u64,
    /// sparse: bump height.
    #[serde(default)]
    pub bump: f64,
    /// sparse: geometric spacing base (bumps at n = base^j, j >= 1).
    #[serde(default = "default_base")]
    pub base: u64,
    /// almost_mathieu: coupling lambda.
    #[serde(default)]
    pub lambda: f64,
    /// almost_mathieu: frequency omega.
    #[serde(default)]
    pub omega: f64,
    /// almost_mathieu: phase theta.
    #[serde(default)]
    pub theta: f64,
}

fn default_base() -> u64 {
    2
}

impl PotentialSpec {
    pub fn zero() -> Self {
        Self::base_spec(PotentialKind::Zero)
    }

    pub fn constant(c: f64) -> Self {
        Self {
            c,
            ..Self::base_spec(PotentialKind::Constant)
        }
    }

    pub fn periodic(values: Vec<f64>) -> Self {
        Self {
            values,
            ..Self::base_spec(PotentialKind::Periodic)
        }
    }

    pub fn anderson(w: f64, seed: u64) -> Self {
        Self {
            w,
            seed,
            ..Self::base_spec(PotentialKind::Anderson)
        }
    }

    pub fn sparse(bump: f64, base: u64) -> Self {
        Self {
            bump,
            base,
            ..Self::base_spec(PotentialKind::Sparse)
        }
    }

    pub fn almost_mathieu(lambda: f64, omega: f64, theta: f64) -> Self {
        Self {
            lambda,
            omega,
            theta,
            ..Self::base_spec(PotentialKind::AlmostMathieu)
        }
    }

    fn base_spec(kind: PotentialKind) -> Self {
        Self {
            kind,
            c: 0.0,
            values: Vec::new(),
            w: 0.0,
            seed: 0,
            bump: 0.0,
            base: 2,
            lambda: 0.0,
            omega: 0.0,
            theta: 0.0,
        }
    }

    // `!(x >= y)` deliberately rejects NaN parameters.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<()> {
        match self.kind {
            PotentialKind::Periodic if self.values.is_empty() => Err(Error::InvalidInput(
                "periodic potential needs at least one value".into(),
            )),
            PotentialKind::Anderson if !(self.w >= 0.0) => {
                Err(Error::InvalidInput("anderson width W must be >= 0".into()))
            }
            PotentialKind::Sparse if self.base < 2 => Err(Error::InvalidInput(
                "sparse spacing base must be >= 2".into(),
            )),
            _ => Ok(()),
        }
    }

    /// v(n) for n >= 1.
    pub fn eval(&self, n: i64) -> Result<f64> {
        if n <= 0 {
            return Err(Error::InvalidInput(format!(
                "site index n = {n} must be >= 1"
            )));
        }
        Ok(match self.kind {
            PotentialKind::Zero => 0.0,
            PotentialKind::Constant => self.c,
            PotentialKind::Periodic => {
                let p = self.values.len() as i64;
                self.values[((n - 1) % p) as usize]
            }
            PotentialKind::Anderson => {
                let u = uniform01(splitmix64(self.seed ^ n as u64));
                self.w * (u - 0.5)
            }
            PotentialKind::Sparse => {
                if is_power_of(n as u64, self.base) {
                    self.bump
                } else {
                    0.0
                }
            }
            PotentialKind::AlmostMathieu => {
                2.0 * self.lambda
                    * (2.0 * std::f64::consts::PI * (self.theta + n as f64 * self.omega)).cos()
            }
        })
    }

    /// Upper bound on sup_n |v(n)|, computable from the parameters alone.
    pub fn sup_bound(&self) -> f64 {
        match self.kind {
            PotentialKind::Zero => 0.0,
            PotentialKind::Constant => self.c.abs(),
            PotentialKind::Periodic => self.values.iter().fold(0.0f64, |m, x| m.max(x.abs())),
            PotentialKind::Anderson => self.w / 2.0,
            PotentialKind::Sparse => self.bump.abs(),
            PotentialKind::AlmostMathieu => 2.0 * self.lambda.abs(),
        }
    }
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

fn uniform01(x: u64) -> f64 {
    (x >> 11) as f64 / (1u64 << 53) as f64
}

fn is_power_of(mut n: u64, base: u64) -> bool {
    if n < base {
        return false;
    }
    while n.is_multiple_of(base) {
        n /= base;
    }
    n == 1
}
