use serde::{Deserialize, Serialize};

use super::{dot, Step, Termination, Tracker};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BfgsConfig {
    /// Stop when the largest gradient component falls below this.
    pub gtol: f64,
    /// Stop when an accepted step lowers the cost by less than this, relative
    /// to `max(|f|, 1)`. Ignored for stochastic objectives.
    pub ftol: f64,
    /// Armijo sufficient-decrease constant.
    pub c1: f64,
    /// Step contraction per backtracking step.
    pub backtrack: f64,
    pub max_backtracks: usize,
    /// Consecutive failed line searches from a fresh Hessian tolerated on a
    /// stochastic objective; each retry re-estimates the cost and gradient.
    pub stochastic_retries: usize,
    pub max_iters: usize,
}

impl Default for BfgsConfig {
    fn default() -> Self {
        BfgsConfig {
            gtol: 1e-8,
            ftol: 1e-14,
            c1: 1e-4,
            backtrack: 0.5,
            max_backtracks: 30,
            stochastic_retries: 10,
            max_iters: 100_000,
        }
    }
}

/// Quasi-Newton iteration on the inverse Hessian with Armijo backtracking.
pub(super) fn run(t: &mut Tracker<'_>, x0: &[f64], cfg: &BfgsConfig) -> Step<Termination> {
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut f = t.eval(&x)?;
    let mut g = t.gradient(&x)?;
    let mut h = identity(n);
    let mut fresh = true;
    let mut retries = 0;

    for _ in 0..cfg.max_iters {
        if g.iter().all(|v| v.abs() < cfg.gtol) {
            return Ok(Termination::Converged);
        }
        let mut p = matvec(&h, &g).into_iter().map(|v| -v).collect::<Vec<_>>();
        let mut slope = dot(&g, &p);
        if slope >= 0.0 {
            h = identity(n);
            fresh = true;
            p = g.iter().map(|v| -v).collect();
            slope = dot(&g, &p);
        }

        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..cfg.max_backtracks {
            let xn: Vec<f64> = x.iter().zip(&p).map(|(xi, pi)| xi + step * pi).collect();
            let fnew = t.eval(&xn)?;
            if fnew <= f + cfg.c1 * step * slope {
                accepted = Some((xn, fnew));
                break;
            }
            step *= cfg.backtrack;
        }
        let Some((xn, fnew)) = accepted else {
            if fresh {
                if !t.stochastic() || retries >= cfg.stochastic_retries {
                    return Ok(Termination::LineSearchFailed);
                }
                retries += 1;
                f = t.eval(&x)?;
                g = t.gradient(&x)?;
            }
            h = identity(n);
            fresh = true;
            continue;
        };
        retries = 0;

        let stalled = !t.stochastic() && f - fnew <= cfg.ftol * f.abs().max(1.0);
        if stalled {
            return Ok(Termination::Converged);
        }
        let gn = t.gradient(&xn)?;
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        let yy = dot(&y, &y);
        if sy > 1e-10 * dot(&s, &s).sqrt() * yy.sqrt() {
            if fresh {
                let scale = sy / yy;
                h.iter_mut().flatten().for_each(|v| *v *= scale);
            }
            bfgs_update(&mut h, &s, &y, sy);
            fresh = false;
        }
        x = xn;
        f = fnew;
        g = gn;
    }
    Ok(Termination::MaxIterations)
}

fn identity(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

fn matvec(m: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    m.iter().map(|row| dot(row, v)).collect()
}

/// `H <- (I - r s y^T) H (I - r y s^T) + r s s^T`, `r = 1 / s.y`.
fn bfgs_update(h: &mut [Vec<f64>], s: &[f64], y: &[f64], sy: f64) {
    let r = 1.0 / sy;
    let hy = matvec(h, y);
    let yhy = dot(y, &hy);
    let n = s.len();
    for i in 0..n {
        for j in 0..n {
            h[i][j] += (1.0 + r * yhy) * r * s[i] * s[j] - r * (hy[i] * s[j] + s[i] * hy[j]);
        }
    }
}
