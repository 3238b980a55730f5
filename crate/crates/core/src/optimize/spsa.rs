use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{norm, Step, Termination, Tracker};
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpsaConfig {
    /// Constant step size; `None` uses the decaying `a0 / (k + 1 + stability)^alpha`.
    pub learning_rate: Option<f64>,
    /// Constant perturbation; `None` uses the decaying `c0 / (k + 1)^gamma`.
    pub perturbation: Option<f64>,
    pub a0: f64,
    pub c0: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub stability: f64,
    /// Reject steps whose cost exceeds the current cost by more than the tolerance.
    pub blocking: bool,
    /// Cap the step norm at `trust_radius`.
    pub trust_region: bool,
    pub trust_radius: f64,
    /// Blocking tolerance; `None` uses twice the standard deviation of
    /// `calibration_evals` repeated evaluations at the initial point.
    pub blocking_tolerance: Option<f64>,
    pub calibration_evals: usize,
    pub max_iters: usize,
}

impl Default for SpsaConfig {
    fn default() -> Self {
        SpsaConfig {
            learning_rate: Some(1.0),
            perturbation: Some(0.1),
            a0: 0.2,
            c0: 0.1,
            alpha: 0.602,
            gamma: 0.101,
            stability: 0.0,
            blocking: true,
            trust_region: true,
            trust_radius: 1.0,
            blocking_tolerance: None,
            calibration_evals: 10,
            max_iters: 100_000,
        }
    }
}

impl SpsaConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(c) = self.perturbation {
            if !(c > 0.0) {
                return Err(Error::config("optimizer.spsa.perturbation", "must be positive"));
            }
        }
        if !(self.c0 > 0.0) {
            return Err(Error::config("optimizer.spsa.c0", "must be positive"));
        }
        if self.trust_region && !(self.trust_radius > 0.0) {
            return Err(Error::config("optimizer.spsa.trust_radius", "must be positive"));
        }
        Ok(())
    }
}

pub(super) fn run(t: &mut Tracker<'_>, x0: &[f64], cfg: &SpsaConfig, seed: u64) -> Step<Termination> {
    let mut rng = rng_from_seed(seed);
    let mut x = x0.to_vec();
    let mut fx = None;
    let tolerance = if !cfg.blocking {
        0.0
    } else if let Some(tol) = cfg.blocking_tolerance {
        tol
    } else if t.stochastic() && cfg.calibration_evals >= 2 {
        let vals = (0..cfg.calibration_evals).map(|_| t.eval(&x)).collect::<Step<Vec<f64>>>()?;
        let m = vals.iter().sum::<f64>() / vals.len() as f64;
        let var = vals.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (vals.len() - 1) as f64;
        fx = Some(m);
        2.0 * var.sqrt()
    } else {
        0.0
    };
    if cfg.blocking && fx.is_none() {
        fx = Some(t.eval(&x)?);
    }

    for k in 0..cfg.max_iters {
        let a = cfg
            .learning_rate
            .unwrap_or_else(|| cfg.a0 / (k as f64 + 1.0 + cfg.stability).powf(cfg.alpha));
        let c = cfg
            .perturbation
            .unwrap_or_else(|| cfg.c0 / (k as f64 + 1.0).powf(cfg.gamma));
        let delta: Vec<f64> = (0..x.len())
            .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
            .collect();
        let plus: Vec<f64> = x.iter().zip(&delta).map(|(xi, d)| xi + c * d).collect();
        let minus: Vec<f64> = x.iter().zip(&delta).map(|(xi, d)| xi - c * d).collect();
        let fp = t.eval(&plus)?;
        let fm = t.eval(&minus)?;
        let scale = (fp - fm) / (2.0 * c);
        let mut step: Vec<f64> = delta.iter().map(|d| a * scale * d).collect();
        if cfg.trust_region {
            let nrm = norm(&step);
            if nrm > cfg.trust_radius {
                step.iter_mut().for_each(|s| *s *= cfg.trust_radius / nrm);
            }
        }
        let candidate: Vec<f64> = x.iter().zip(&step).map(|(xi, s)| xi - s).collect();
        if cfg.blocking {
            let fc = t.eval(&candidate)?;
            let current = fx.unwrap_or(f64::INFINITY);
            if fc <= current + tolerance {
                x = candidate;
                fx = Some(fc);
            }
        } else {
            x = candidate;
        }
    }
    Ok(Termination::MaxIterations)
}
