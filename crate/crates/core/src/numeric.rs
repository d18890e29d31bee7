//! Small scalar and two-dimensional solvers shared by the orbit finder,
//! the eigenvalue oracle and the renormalization schemes.

use crate::error::{Error, Result};

/// Brent's method on a sign-changing bracket `[a, b]`.
///
/// Returns the abscissa once the bracket is narrower than `xtol` or the
/// function value is exactly zero.
pub fn brent<F>(mut f: F, a: f64, b: f64, xtol: f64, max_iter: usize) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = (a, b);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() || !fa.is_finite() || !fb.is_finite() {
        return Err(Error::NoConvergence {
            what: format!("brent: no sign change on [{a}, {b}]"),
            iterations: 0,
        });
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
    }
    Err(Error::NoConvergence {
        what: "brent".into(),
        iterations: max_iter,
    })
}

/// Ratio of the singular values of a 2×2 matrix (row-major).
pub fn condition_2x2(j: &[[f64; 2]; 2]) -> f64 {
    let a = j[0][0] * j[0][0] + j[1][0] * j[1][0];
    let b = j[0][0] * j[0][1] + j[1][0] * j[1][1];
    let d = j[0][1] * j[0][1] + j[1][1] * j[1][1];
    let tr = a + d;
    let disc = ((a - d) * (a - d) + 4.0 * b * b).sqrt();
    let s_max = (0.5 * (tr + disc)).sqrt();
    let s_min = (0.5 * (tr - disc)).max(0.0).sqrt();
    if s_min == 0.0 {
        f64::INFINITY
    } else {
        s_max / s_min
    }
}

pub fn frobenius_2x2(j: &[[f64; 2]; 2]) -> f64 {
    j.iter().flatten().map(|x| x * x).sum::<f64>().sqrt()
}

fn solve_2x2(j: &[[f64; 2]; 2], rhs: [f64; 2]) -> Option<[f64; 2]> {
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    let scale = frobenius_2x2(j).powi(2);
    if !det.is_finite() || det.abs() <= 1e-300 || det.abs() < 1e-14 * scale {
        return None;
    }
    Some([
        (rhs[0] * j[1][1] - rhs[1] * j[0][1]) / det,
        (j[0][0] * rhs[1] - j[1][0] * rhs[0]) / det,
    ])
}

fn norm2(v: [f64; 2]) -> f64 {
    (v[0] * v[0] + v[1] * v[1]).sqrt()
}

/// Central-difference Jacobian of a 2-vector function.
pub fn jacobian_2d<F>(f: &F, x: [f64; 2], steps: [f64; 2]) -> Result<[[f64; 2]; 2]>
where
    F: Fn([f64; 2]) -> Result<[f64; 2]>,
{
    let mut jac = [[0.0; 2]; 2];
    for col in 0..2 {
        let mut xp = x;
        let mut xm = x;
        xp[col] += steps[col];
        xm[col] -= steps[col];
        let fp = f(xp)?;
        let fm = f(xm)?;
        for row in 0..2 {
            jac[row][col] = (fp[row] - fm[row]) / (2.0 * steps[col]);
        }
    }
    Ok(jac)
}

#[derive(Debug, Clone, Copy)]
pub struct NewtonConfig {
    /// Absolute tolerance on each residual component.
    pub tol: f64,
    pub max_iter: usize,
    /// Relative finite-difference step, scaled by `max(1, |x_i|)`.
    pub jac_step: f64,
    /// Longest accepted step (Euclidean).
    pub max_step: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct NewtonOutcome {
    pub x: [f64; 2],
    pub residual: [f64; 2],
    pub iterations: usize,
    pub converged: bool,
}

/// Damped Newton iteration on a 2-D residual with a finite-difference
/// Jacobian. Evaluation failures at trial points are treated as rejected
/// steps. When the line search stalls, a Nelder–Mead pass on the squared
/// residual norm tries to move the iterate before Newton resumes.
pub fn damped_newton_2d<F>(f: F, x0: [f64; 2], cfg: &NewtonConfig) -> Result<NewtonOutcome>
where
    F: Fn([f64; 2]) -> Result<[f64; 2]>,
{
    let mut x = x0;
    let mut fx = f(x)?;
    let done = |r: [f64; 2]| r[0].abs() <= cfg.tol && r[1].abs() <= cfg.tol;
    let mut simplex_used = 0usize;
    for iter in 0..cfg.max_iter {
        if done(fx) {
            return Ok(NewtonOutcome {
                x,
                residual: fx,
                iterations: iter,
                converged: true,
            });
        }
        let steps = [
            cfg.jac_step * x[0].abs().max(1.0),
            cfg.jac_step * x[1].abs().max(1.0),
        ];
        let step = jacobian_2d(&f, x, steps)
            .ok()
            .and_then(|j| solve_2x2(&j, [-fx[0], -fx[1]]));

        let mut accepted = false;
        if let Some(mut dx) = step {
            let len = norm2(dx);
            if len > cfg.max_step {
                dx = [dx[0] * cfg.max_step / len, dx[1] * cfg.max_step / len];
            }
            let base = norm2(fx);
            let mut lambda = 1.0;
            while lambda > 1e-6 {
                let trial = [x[0] + lambda * dx[0], x[1] + lambda * dx[1]];
                if let Ok(ft) = f(trial) {
                    if ft[0].is_finite() && ft[1].is_finite() && norm2(ft) < base {
                        x = trial;
                        fx = ft;
                        accepted = true;
                        break;
                    }
                }
                lambda *= 0.5;
            }
        }
        if !accepted {
            if simplex_used >= 3 {
                break;
            }
            simplex_used += 1;
            let objective = |p: &[f64]| match f([p[0], p[1]]) {
                Ok(r) if r[0].is_finite() && r[1].is_finite() => r[0] * r[0] + r[1] * r[1],
                _ => f64::INFINITY,
            };
            let scale = 0.05 * x[0].abs().max(x[1].abs()).max(1.0);
            let best = nelder_mead(objective, &x, scale, 400, 0.0);
            let candidate = [best[0], best[1]];
            match f(candidate) {
                Ok(fc) if norm2(fc) < norm2(fx) => {
                    x = candidate;
                    fx = fc;
                }
                _ => break,
            }
        }
    }
    Ok(NewtonOutcome {
        x,
        residual: fx,
        iterations: cfg.max_iter,
        converged: done(fx),
    })
}

/// Derivative-free Nelder–Mead minimization.
pub fn nelder_mead<F>(f: F, x0: &[f64], scale: f64, max_iter: usize, ftol: f64) -> Vec<f64>
where
    F: Fn(&[f64]) -> f64,
{
    let dim = x0.len();
    let mut pts: Vec<Vec<f64>> = vec![x0.to_vec()];
    for i in 0..dim {
        let mut p = x0.to_vec();
        p[i] += scale;
        pts.push(p);
    }
    let mut vals: Vec<f64> = pts.iter().map(|p| f(p)).collect();
    for _ in 0..max_iter {
        let mut order: Vec<usize> = (0..=dim).collect();
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        pts = order.iter().map(|&i| pts[i].clone()).collect();
        vals = order.iter().map(|&i| vals[i]).collect();
        if (vals[dim] - vals[0]).abs() <= ftol {
            break;
        }
        let centroid: Vec<f64> = (0..dim)
            .map(|c| pts[..dim].iter().map(|p| p[c]).sum::<f64>() / dim as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&pts[dim])
                .map(|(c, w)| c + t * (w - c))
                .collect()
        };
        let xr = along(-1.0);
        let fr = f(&xr);
        if fr < vals[0] {
            let xe = along(-2.0);
            let fe = f(&xe);
            if fe < fr {
                pts[dim] = xe;
                vals[dim] = fe;
            } else {
                pts[dim] = xr;
                vals[dim] = fr;
            }
        } else if fr < vals[dim - 1] {
            pts[dim] = xr;
            vals[dim] = fr;
        } else {
            let xc = if fr < vals[dim] { along(-0.5) } else { along(0.5) };
            let fc = f(&xc);
            if fc < vals[dim].min(fr) {
                pts[dim] = xc;
                vals[dim] = fc;
            } else {
                for i in 1..=dim {
                    let shrunk: Vec<f64> = pts[0]
                        .iter()
                        .zip(&pts[i])
                        .map(|(b, p)| b + 0.5 * (p - b))
                        .collect();
                    vals[i] = f(&shrunk);
                    pts[i] = shrunk;
                }
            }
        }
    }
    let best = (0..=dim)
        .min_by(|&a, &b| vals[a].total_cmp(&vals[b]))
        .unwrap_or(0);
    pts[best].clone()
}
