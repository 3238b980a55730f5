use serde::{Deserialize, Serialize};

use super::{Step, Termination, Tracker};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PowellConfig {
    /// Relative tolerance of each line minimization.
    pub xtol: f64,
    /// Relative decrease per sweep below which the run stops.
    pub ftol: f64,
    /// Reset the direction set to the coordinate axes every this many sweeps.
    pub reset_every: Option<usize>,
    pub max_iters: usize,
}

impl Default for PowellConfig {
    fn default() -> Self {
        PowellConfig {
            xtol: 1e-4,
            ftol: 1e-10,
            reset_every: None,
            max_iters: 100_000,
        }
    }
}

/// Powell's conjugate-direction method with Brent line searches.
pub(super) fn run(t: &mut Tracker<'_>, x0: &[f64], cfg: &PowellConfig) -> Step<Termination> {
    let n = x0.len();
    let axes = || -> Vec<Vec<f64>> {
        (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect()
    };
    let mut dirs = axes();
    let mut x = x0.to_vec();
    let mut fx = t.eval(&x)?;

    for iter in 0..cfg.max_iters {
        if let Some(r) = cfg.reset_every {
            if r > 0 && iter > 0 && iter % r == 0 {
                dirs = axes();
            }
        }
        let x_start = x.clone();
        let f_start = fx;
        let (mut biggest, mut biggest_idx) = (0.0, 0);
        for (i, d) in dirs.iter().enumerate() {
            let before = fx;
            let (xn, fnew) = line_minimize(t, &x, fx, d, cfg.xtol)?;
            x = xn;
            fx = fnew;
            if before - fx > biggest {
                biggest = before - fx;
                biggest_idx = i;
            }
        }
        if 2.0 * (f_start - fx) <= cfg.ftol * (f_start.abs() + fx.abs()) + 1e-20 {
            return Ok(Termination::Converged);
        }
        let new_dir: Vec<f64> = x.iter().zip(&x_start).map(|(a, b)| a - b).collect();
        let extrapolated: Vec<f64> = x.iter().zip(&new_dir).map(|(a, d)| a + d).collect();
        let fe = t.eval(&extrapolated)?;
        if fe < f_start {
            let lhs = 2.0 * (f_start - 2.0 * fx + fe) * (f_start - fx - biggest).powi(2);
            let rhs = biggest * (f_start - fe).powi(2);
            if lhs < rhs {
                let (xn, fnew) = line_minimize(t, &x, fx, &new_dir, cfg.xtol)?;
                x = xn;
                fx = fnew;
                dirs.remove(biggest_idx);
                dirs.push(new_dir);
            }
        }
    }
    Ok(Termination::MaxIterations)
}

/// Minimize `f(x + s d)` over `s`, returning the best point seen.
fn line_minimize(t: &mut Tracker<'_>, x: &[f64], fx: f64, d: &[f64], xtol: f64) -> Step<(Vec<f64>, f64)> {
    let at = |s: f64| -> Vec<f64> { x.iter().zip(d).map(|(xi, di)| xi + s * di).collect() };
    let eval = |t: &mut Tracker<'_>, s: f64| t.eval(&at(s));

    // bracket a minimum starting from [0, 1]
    const GOLD: f64 = 1.618_033_988_749_895;
    let (mut a, mut fa) = (0.0, fx);
    let (mut b, mut fb) = (1.0, eval(t, 1.0)?);
    if fb > fa {
        std::mem::swap(&mut a, &mut b);
        std::mem::swap(&mut fa, &mut fb);
    }
    let mut c = b + GOLD * (b - a);
    let mut fc = eval(t, c)?;
    let mut expansions = 0;
    while fb > fc && expansions < 50 {
        a = b;
        fa = fb;
        b = c;
        fb = fc;
        c = b + GOLD * (b - a);
        fc = eval(t, c)?;
        expansions += 1;
    }
    let _ = fa;

    // Brent's method on [min(a, c), max(a, c)] with b the best interior point
    const CGOLD: f64 = 0.381_966_011_250_105;
    let (mut lo, mut hi) = if a < c { (a, c) } else { (c, a) };
    let (mut xb, mut fxb) = (b, fb);
    let (mut w, mut fw) = (b, fb);
    let (mut v, mut fv) = (b, fb);
    let (mut e, mut dstep): (f64, f64) = (0.0, 0.0);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        let tol1 = xtol * xb.abs() + 1e-10;
        let tol2 = 2.0 * tol1;
        if (xb - mid).abs() <= tol2 - 0.5 * (hi - lo) {
            break;
        }
        let mut golden = true;
        if e.abs() > tol1 {
            let r = (xb - w) * (fxb - fv);
            let mut q = (xb - v) * (fxb - fw);
            let mut p = (xb - v) * q - (xb - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            if p.abs() < (0.5 * q * e).abs() && p > q * (lo - xb) && p < q * (hi - xb) {
                e = dstep;
                dstep = p / q;
                let u = xb + dstep;
                if u - lo < tol2 || hi - u < tol2 {
                    dstep = if mid >= xb { tol1 } else { -tol1 };
                }
                golden = false;
            }
        }
        if golden {
            e = if xb >= mid { lo - xb } else { hi - xb };
            dstep = CGOLD * e;
        }
        let u = if dstep.abs() >= tol1 {
            xb + dstep
        } else {
            xb + tol1.copysign(dstep)
        };
        let fu = eval(t, u)?;
        if fu <= fxb {
            if u >= xb {
                lo = xb;
            } else {
                hi = xb;
            }
            v = w;
            fv = fw;
            w = xb;
            fw = fxb;
            xb = u;
            fxb = fu;
        } else {
            if u < xb {
                lo = u;
            } else {
                hi = u;
            }
            if fu <= fw || w == xb {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == xb || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    if fxb < fx {
        Ok((at(xb), fxb))
    } else {
        Ok((x.to_vec(), fx))
    }
}
