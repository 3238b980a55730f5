use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use super::{Step, Termination, Tracker};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NftConfig {
    /// Re-evaluate the baseline cost every this many coordinate updates
    /// instead of reusing the fitted minimum; 0 never resets after the first.
    pub reset_interval: usize,
    pub max_iters: usize,
}

impl Default for NftConfig {
    fn default() -> Self {
        NftConfig {
            reset_interval: 9,
            max_iters: 1_000_000,
        }
    }
}

impl NftConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::config("optimizer.nft.max_iters", "must be at least 1"));
        }
        Ok(())
    }
}

/// Sequential coordinate updates assuming `f(x_i) = c + A cos x_i + B sin x_i`.
///
/// Each update costs two evaluations (`x_i +- pi/2`) plus one baseline
/// evaluation at updates `0, R, 2R, ...`; in between, the baseline is the
/// fitted minimum of the previous update. After `U` updates the count is
/// `2U + ceil(U / R)`.
pub(super) fn run(t: &mut Tracker<'_>, x0: &[f64], cfg: &NftConfig) -> Step<Termination> {
    let mut x = x0.to_vec();
    let n = x.len();
    let mut recycled: Option<f64> = None;
    for iter in 0..cfg.max_iters {
        let idx = iter % n;
        if cfg.reset_interval > 0 && iter % cfg.reset_interval == 0 {
            recycled = None;
        }
        let z0 = match recycled {
            Some(z) => z,
            None => t.eval(&x)?,
        };
        let mut p = x.clone();
        p[idx] = x[idx] + FRAC_PI_2;
        let z1 = t.eval(&p)?;
        p[idx] = x[idx] - FRAC_PI_2;
        let z3 = t.eval(&p)?;
        let z2 = z1 + z3 - z0;
        let c = 0.5 * (z1 + z3);
        let a = 0.5 * ((z0 - z2).powi(2) + (z1 - z3).powi(2)).sqrt();
        x[idx] += (z1 - z3).atan2(z0 - z2) + PI;
        recycled = Some(c - a);
    }
    Ok(Termination::MaxIterations)
}
