//! Two-parameter mass renormalization of the trajectory series.
//!
//! The mass is split as `m = m0 + m1 ℏ + m2 ℏ²` with `m0` tied to the
//! physical mass at the evaluation point `ℏ_eval`. The free pair
//! `(m1, m2)` is fixed either by minimal sensitivity (the gradient of
//! `α̃^(4)` vanishes) or by fastest convergence (`α̃_3 = α̃_4 = 0`).
//!
//! Internally the solvers work in `u_i = m_i / m`.

use serde::{Deserialize, Serialize};

use crate::engine::{self, Expansion};
use crate::error::{Error, Result};
use crate::numeric::{condition_2x2, damped_newton_2d, frobenius_2x2, jacobian_2d, NewtonConfig};
use crate::par::Execution;
use crate::potential::PotentialSpec;

/// Order at which both schemes are defined.
pub const SCHEME_ORDER: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MassExpansion {
    /// `m0, m1, m2`.
    pub masses: [f64; 3],
    pub physical_mass: f64,
    pub hbar_eval: f64,
}

impl MassExpansion {
    pub fn unrenormalized(mass: f64) -> Self {
        MassExpansion {
            masses: [mass, 0.0, 0.0],
            physical_mass: mass,
            hbar_eval: 1.0,
        }
    }

    /// `m0 = m - m1 ℏ - m2 ℏ²`; fails with `OrbitLost` when `m0 <= 0`.
    pub fn constrained(mass: f64, m1: f64, m2: f64, hbar: f64) -> Result<Self> {
        let m0 = mass - m1 * hbar - m2 * hbar * hbar;
        if !(m0 > 0.0) || !m0.is_finite() {
            return Err(Error::OrbitLost { m0 });
        }
        Ok(MassExpansion {
            masses: [m0, m1, m2],
            physical_mass: mass,
            hbar_eval: hbar,
        })
    }

    pub fn m0(&self) -> f64 {
        self.masses[0]
    }

    pub fn m1(&self) -> f64 {
        self.masses[1]
    }

    pub fn m2(&self) -> f64 {
        self.masses[2]
    }

    /// `m0 + m1 ℏ + m2 ℏ² - m` at `ℏ_eval`.
    pub fn constraint_residual(&self) -> f64 {
        let h = self.hbar_eval;
        self.masses[0] + self.masses[1] * h + self.masses[2] * h * h - self.physical_mass
    }
}

/// `α̃_0..=α̃_N` with the mass repartitioned according to `me`.
pub fn renorm_expand(
    pot: &PotentialSpec,
    energy: f64,
    me: &MassExpansion,
    n: u32,
    order: usize,
) -> Result<Expansion> {
    engine::expand_with_table(pot, energy, &me.masses, n, order).map(|(exp, _)| exp)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    /// Zero gradient of `α̃^(4)` in `(m1, m2)`.
    MinimalSensitivity,
    /// `α̃_3 = α̃_4 = 0`.
    FastestConvergence,
}

impl Scheme {
    pub fn short_name(self) -> &'static str {
        match self {
            Scheme::MinimalSensitivity => "pms",
            Scheme::FastestConvergence => "fc",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RootCandidate {
    pub m1: f64,
    pub m2: f64,
    pub alpha_tilde: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeResult {
    pub scheme: Scheme,
    pub m1: f64,
    pub m2: f64,
    /// `α̃^(4)` at `ℏ_eval`.
    pub alpha_tilde: f64,
    pub coeffs: Vec<f64>,
    /// Scheme equations at the solution: `(∂α̃/∂m1, ∂α̃/∂m2)` or `(α̃_3, α̃_4)`.
    pub residuals: [f64; 2],
    pub iterations: usize,
    /// Other distinct roots found by the multi-start search, nearest first.
    pub alternatives: Vec<RootCandidate>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Residual tolerance relative to `|α̃_0|`.
    pub tol_rel: f64,
    pub max_iter: usize,
    /// Relative central-difference step of the Newton Jacobian.
    pub jac_step: f64,
    /// Step of the five-point gradient used by minimal sensitivity (in `m_i/m`).
    pub gradient_step: f64,
    /// Jacobian step for minimal sensitivity, where the residual is itself a
    /// finite-difference gradient.
    pub hessian_step: f64,
    /// Starting points per axis of the multi-start grid.
    pub grid_points: usize,
    /// Half-width of the multi-start grid in units of `m`.
    pub grid_half_width: f64,
    /// Starts and trial points need `m0 >= min_m0_fraction · m`.
    pub min_m0_fraction: f64,
    pub max_condition: f64,
    /// A Jacobian whose norm falls below this fraction of its natural scale
    /// counts as degenerate.
    pub degenerate_norm: f64,
    pub hbar: f64,
    pub execution: Execution,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol_rel: 1e-10,
            max_iter: 100,
            jac_step: 1e-6,
            gradient_step: 1e-3,
            hessian_step: 1e-4,
            grid_points: 5,
            grid_half_width: 0.5,
            min_m0_fraction: 0.02,
            max_condition: 1e12,
            degenerate_norm: 1e-6,
            hbar: 1.0,
            execution: Execution::default(),
        }
    }
}

/// Problem data shared by every residual evaluation.
#[derive(Debug, Clone)]
struct Problem<'a> {
    pot: &'a PotentialSpec,
    energy: f64,
    mass: f64,
    n: u32,
    cfg: SolverConfig,
}

impl Problem<'_> {
    fn expansion(&self, u: [f64; 2]) -> Result<Expansion> {
        let h = self.cfg.hbar;
        let m0_frac = 1.0 - u[0] * h - u[1] * h * h;
        if m0_frac < self.cfg.min_m0_fraction {
            return Err(Error::OrbitLost {
                m0: m0_frac * self.mass,
            });
        }
        let me = MassExpansion::constrained(self.mass, u[0] * self.mass, u[1] * self.mass, h)?;
        renorm_expand(self.pot, self.energy, &me, self.n, SCHEME_ORDER)
    }

    fn value(&self, u: [f64; 2]) -> Result<f64> {
        Ok(self.expansion(u)?.evaluate(self.cfg.hbar))
    }

    /// Five-point gradient of `α̃^(4)` in `u`.
    fn gradient_u(&self, u: [f64; 2]) -> Result<[f64; 2]> {
        let h = self.cfg.gradient_step;
        let mut g = [0.0; 2];
        for (axis, gi) in g.iter_mut().enumerate() {
            let at = |s: f64| {
                let mut p = u;
                p[axis] += s * h;
                self.value(p)
            };
            *gi = (-at(2.0)? + 8.0 * at(1.0)? - 8.0 * at(-1.0)? + at(-2.0)?) / (12.0 * h);
        }
        Ok(g)
    }

    fn residual_u(&self, scheme: Scheme, u: [f64; 2]) -> Result<[f64; 2]> {
        match scheme {
            Scheme::MinimalSensitivity => self.gradient_u(u),
            Scheme::FastestConvergence => {
                let exp = self.expansion(u)?;
                Ok([exp.coeffs[3], exp.coeffs[4]])
            }
        }
    }

    fn jacobian_u(&self, scheme: Scheme, u: [f64; 2]) -> Result<[[f64; 2]; 2]> {
        let step = match scheme {
            Scheme::MinimalSensitivity => self.cfg.hessian_step,
            Scheme::FastestConvergence => self.cfg.jac_step,
        };
        let steps = [step * u[0].abs().max(1.0), step * u[1].abs().max(1.0)];
        jacobian_2d(&|p| self.residual_u(scheme, p), u, steps)
    }

    /// Degenerate if ill-conditioned or numerically zero.
    fn degeneracy(&self, scheme: Scheme, u: [f64; 2], alpha0: f64) -> Result<Option<f64>> {
        let jac = self.jacobian_u(scheme, u)?;
        let cond = condition_2x2(&jac);
        let tiny = frobenius_2x2(&jac) <= self.cfg.degenerate_norm * alpha0.abs();
        Ok((cond > self.cfg.max_condition || tiny).then_some(cond))
    }
}

/// `α̃^(4)` at `ℏ` for the constrained repartition with the given `(m1, m2)`.
pub fn renormalized_value(
    pot: &PotentialSpec,
    energy: f64,
    mass: f64,
    n: u32,
    m1: f64,
    m2: f64,
    hbar: f64,
) -> Result<f64> {
    let me = MassExpansion::constrained(mass, m1, m2, hbar)?;
    Ok(renorm_expand(pot, energy, &me, n, SCHEME_ORDER)?.evaluate(hbar))
}

/// `(∂α̃^(4)/∂m1, ∂α̃^(4)/∂m2)` by the five-point stencil used in the
/// minimal-sensitivity solve.
pub fn pms_gradient(
    pot: &PotentialSpec,
    energy: f64,
    mass: f64,
    n: u32,
    m1: f64,
    m2: f64,
    cfg: &SolverConfig,
) -> Result<[f64; 2]> {
    let problem = Problem {
        pot,
        energy,
        mass,
        n,
        cfg: *cfg,
    };
    let g = problem.gradient_u([m1 / mass, m2 / mass])?;
    Ok([g[0] / mass, g[1] / mass])
}

/// The scheme's two equations at `(m1, m2)`, in physical units.
#[allow(clippy::too_many_arguments)]
pub fn scheme_residuals(
    scheme: Scheme,
    pot: &PotentialSpec,
    energy: f64,
    mass: f64,
    n: u32,
    m1: f64,
    m2: f64,
    cfg: &SolverConfig,
) -> Result<[f64; 2]> {
    match scheme {
        Scheme::MinimalSensitivity => pms_gradient(pot, energy, mass, n, m1, m2, cfg),
        Scheme::FastestConvergence => {
            let me = MassExpansion::constrained(mass, m1, m2, cfg.hbar)?;
            let exp = renorm_expand(pot, energy, &me, n, SCHEME_ORDER)?;
            Ok([exp.coeffs[3], exp.coeffs[4]])
        }
    }
}

struct Found {
    u: [f64; 2],
    iterations: usize,
}

/// Solves the scheme's equations for `(m1, m2)`.
///
/// Damped Newton runs from every point of a square grid of starts
/// (including the origin); verified roots are deduplicated and the one
/// nearest the origin in `(m1/m, m2/m)` is returned.
pub fn solve_scheme(
    scheme: Scheme,
    pot: &PotentialSpec,
    energy: f64,
    mass: f64,
    n: u32,
    cfg: &SolverConfig,
) -> Result<SchemeResult> {
    if !(mass > 0.0) {
        return Err(Error::InvalidInput(format!("mass {mass} must be positive")));
    }
    let problem = Problem {
        pot,
        energy,
        mass,
        n,
        cfg: *cfg,
    };
    let alpha0 = problem.expansion([0.0, 0.0])?.coeffs[0];
    let tol_abs = cfg.tol_rel * alpha0.abs();

    // A root already sitting at the origin with a vanishing Jacobian is the
    // terminating-series case; there is nothing to fix.
    let r0 = problem.residual_u(scheme, [0.0, 0.0])?;
    if r0[0].abs() <= tol_abs && r0[1].abs() <= tol_abs {
        if let Some(cond) = problem.degeneracy(scheme, [0.0, 0.0], alpha0)? {
            return Err(Error::Degenerate { condition: cond });
        }
    }

    let newton = NewtonConfig {
        tol: 0.1 * tol_abs,
        max_iter: cfg.max_iter,
        jac_step: match scheme {
            Scheme::MinimalSensitivity => cfg.hessian_step,
            Scheme::FastestConvergence => cfg.jac_step,
        },
        max_step: 0.25,
    };
    let starts = start_grid(cfg);
    let outcomes = cfg.execution.map(&starts, |&u0| {
        damped_newton_2d(|u| problem.residual_u(scheme, u), u0, &newton)
    });

    let mut any_ran = false;
    let mut found: Vec<Found> = Vec::new();
    for outcome in outcomes.into_iter().flatten() {
        any_ran = true;
        if !outcome.converged {
            continue;
        }
        // re-evaluate from scratch against the published tolerance
        let Ok(exp) = problem.expansion(outcome.x) else {
            continue;
        };
        let Ok(res) = problem.residual_u(scheme, outcome.x) else {
            continue;
        };
        let tol = cfg.tol_rel * exp.coeffs[0].abs();
        if res[0].abs() > tol || res[1].abs() > tol {
            continue;
        }
        if found
            .iter()
            .any(|f| (f.u[0] - outcome.x[0]).hypot(f.u[1] - outcome.x[1]) < 1e-6)
        {
            continue;
        }
        found.push(Found {
            u: outcome.x,
            iterations: outcome.iterations,
        });
    }
    if found.is_empty() {
        return Err(if any_ran {
            Error::NoConvergence {
                what: format!("{} scheme", scheme.short_name()),
                iterations: cfg.max_iter,
            }
        } else {
            Error::OrbitLost { m0: 0.0 }
        });
    }
    found.sort_by(|a, b| a.u[0].hypot(a.u[1]).total_cmp(&b.u[0].hypot(b.u[1])));

    let best = &found[0];
    if let Some(cond) = problem.degeneracy(scheme, best.u, alpha0)? {
        return Err(Error::Degenerate { condition: cond });
    }
    let exp = problem.expansion(best.u)?;
    let res_u = problem.residual_u(scheme, best.u)?;
    let residuals = match scheme {
        Scheme::MinimalSensitivity => [res_u[0] / mass, res_u[1] / mass],
        Scheme::FastestConvergence => res_u,
    };
    let alternatives = found[1..]
        .iter()
        .filter_map(|f| {
            Some(RootCandidate {
                m1: f.u[0] * mass,
                m2: f.u[1] * mass,
                alpha_tilde: problem.value(f.u).ok()?,
            })
        })
        .collect();
    Ok(SchemeResult {
        scheme,
        m1: best.u[0] * mass,
        m2: best.u[1] * mass,
        alpha_tilde: exp.evaluate(cfg.hbar),
        coeffs: exp.coeffs,
        residuals,
        iterations: best.iterations,
        alternatives,
    })
}

fn start_grid(cfg: &SolverConfig) -> Vec<[f64; 2]> {
    let mut starts = vec![[0.0, 0.0]];
    let k = cfg.grid_points.max(1);
    let w = cfg.grid_half_width;
    let h = cfg.hbar;
    for i in 0..k {
        for j in 0..k {
            let (a, b) = if k == 1 {
                (0.0, 0.0)
            } else {
                let t = |idx: usize| -w + 2.0 * w * idx as f64 / (k - 1) as f64;
                (t(i), t(j))
            };
            if (a == 0.0 && b == 0.0) || 1.0 - a * h - b * h * h < 2.0 * cfg.min_m0_fraction {
                continue;
            }
            starts.push([a, b]);
        }
    }
    starts
}

/// Minimal sensitivity: `∂α̃^(4)/∂m1 = ∂α̃^(4)/∂m2 = 0`.
pub fn solve_scheme1(
    pot: &PotentialSpec,
    energy: f64,
    mass: f64,
    n: u32,
    cfg: &SolverConfig,
) -> Result<SchemeResult> {
    solve_scheme(Scheme::MinimalSensitivity, pot, energy, mass, n, cfg)
}

/// Fastest convergence: `α̃_3 = α̃_4 = 0`.
pub fn solve_scheme2(
    pot: &PotentialSpec,
    energy: f64,
    mass: f64,
    n: u32,
    cfg: &SolverConfig,
) -> Result<SchemeResult> {
    solve_scheme(Scheme::FastestConvergence, pot, energy, mass, n, cfg)
}
