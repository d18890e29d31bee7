//! Explicit fourth-order power-law trajectory, used as an independent
//! check on the recurrence engine.

use crate::engine;
use crate::error::{Error, Result};
use crate::par::Execution;
use crate::potential::{powerlaw_alpha0, PotentialSpec};

/// Denominator of the ℏ⁴ term as it appears in print.
pub const PRINTED_DENOMINATOR_4: f64 = 2_985_980.0;

/// Denominator of the ℏ⁴ term recovered from the recurrences (`100 · 12⁶`);
/// see [`fit_denominator_4`].
pub const RECOVERED_DENOMINATOR_4: f64 = 298_598_400.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedFormConstants {
    pub denominator_4: f64,
}

impl Default for ClosedFormConstants {
    fn default() -> Self {
        ClosedFormConstants {
            denominator_4: RECOVERED_DENOMINATOR_4,
        }
    }
}

impl ClosedFormConstants {
    pub fn printed() -> Self {
        ClosedFormConstants {
            denominator_4: PRINTED_DENOMINATOR_4,
        }
    }
}

/// Coefficients of ℏ⁰..ℏ⁴ for `V = A r^v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawTerms {
    pub v: f64,
    pub q: f64,
    pub alpha0: f64,
    pub terms: [f64; 5],
}

/// `(v-2)(v+1)[...]` of the ℏ⁴ term, without the denominator,
/// the `(v+2)` factor and `α0³`.
pub fn order4_polynomial(v: f64, q: f64) -> f64 {
    let v2 = v * v;
    let v3 = v2 * v;
    let v4 = v3 * v;
    let q2 = q * q;
    let c4 = 2415.0 * v4 - 70170.0 * v3 + 24615.0 * v2 + 659820.0 * v + 659820.0;
    let c2 = 3270.0 * v4 + 59340.0 * v3 - 138330.0 * v2 - 1028040.0 * v - 1028040.0;
    let c0 = -613.0 * v4 + 974.0 * v3 + 46947.0 * v2 + 179996.0 * v + 179996.0;
    (v - 2.0) * (v + 1.0) * (c4 * q2 * q2 + c2 * q2 + c0)
}

impl PowerLawTerms {
    pub fn from_alpha0(v: f64, q: f64, alpha0: f64, consts: ClosedFormConstants) -> Self {
        let vv = (v - 2.0) * (v + 1.0);
        let s = (v + 2.0).sqrt();
        let t0 = alpha0;
        let t1 = -0.5 * (1.0 + q * s);
        let t2 = vv * (3.0 * q * q - 1.0) / (288.0 * alpha0);
        let t3 = -vv
            * ((5.0 * v * v - 29.0 * v - 58.0) * q.powi(3) - (v * v - 25.0 * v - 50.0) * q)
            / (13824.0 * alpha0 * alpha0 * s);
        let t4 = order4_polynomial(v, q) / (consts.denominator_4 * (v + 2.0) * alpha0.powi(3));
        PowerLawTerms {
            v,
            q,
            alpha0,
            terms: [t0, t1, t2, t3, t4],
        }
    }

    pub fn new(
        a: f64,
        v: f64,
        mass: f64,
        energy: f64,
        n: u32,
        consts: ClosedFormConstants,
    ) -> Result<Self> {
        if v <= -2.0 {
            return Err(Error::DomainError(format!("v = {v} must exceed -2")));
        }
        PotentialSpec::power_law(a, v).map_err(|e| Error::DomainError(e.to_string()))?;
        if !(mass > 0.0) {
            return Err(Error::DomainError(format!("mass {mass} must be positive")));
        }
        let alpha0 = powerlaw_alpha0(a, v, mass, energy);
        if !alpha0.is_finite() || alpha0 <= 0.0 {
            return Err(Error::DomainError(format!(
                "E = {energy} gives no orbit for A = {a}, v = {v}"
            )));
        }
        Ok(Self::from_alpha0(v, 2.0 * n as f64 + 1.0, alpha0, consts))
    }

    pub fn sum(&self, hbar: f64) -> f64 {
        self.terms.iter().rev().fold(0.0, |acc, t| acc * hbar + t)
    }
}

/// Fourth-order trajectory of `V = A r^v` at `ℏ`.
pub fn alpha4_powerlaw(a: f64, v: f64, mass: f64, energy: f64, n: u32, hbar: f64) -> Result<f64> {
    alpha4_powerlaw_with(a, v, mass, energy, n, hbar, ClosedFormConstants::default())
}

pub fn alpha4_powerlaw_with(
    a: f64,
    v: f64,
    mass: f64,
    energy: f64,
    n: u32,
    hbar: f64,
    consts: ClosedFormConstants,
) -> Result<f64> {
    Ok(PowerLawTerms::new(a, v, mass, energy, n, consts)?.sum(hbar))
}

/// Least-squares estimate of the ℏ⁴ denominator from `(v, q, α0, α4)`
/// samples, where `α4` comes from the recurrences.
pub fn recover_denominator_4<I>(samples: I) -> f64
where
    I: IntoIterator<Item = (f64, f64, f64, f64)>,
{
    let (mut num, mut den) = (0.0, 0.0);
    for (v, q, alpha0, alpha4) in samples {
        let g = order4_polynomial(v, q) / ((v + 2.0) * alpha0.powi(3));
        // weight each sample by 1/α4² so that all magnitudes count equally
        let w = 1.0 / (alpha4 * alpha4);
        num += w * g * g;
        den += w * g * alpha4;
    }
    num / den
}

/// Runs the engine over a fixed `(v, n, E)` grid and fits the ℏ⁴
/// denominator.
pub fn fit_denominator_4(exec: Execution) -> Result<f64> {
    let mut cases = Vec::new();
    for &(a, v) in &[(1.0, 0.1), (1.0, 0.5), (1.0, 1.0), (1.0, 3.0), (-1.0, -0.5), (1.0, 1.7)] {
        for n in 0..5u32 {
            for j in 0..4 {
                let e = if a > 0.0 {
                    0.8 + 0.9 * j as f64
                } else {
                    -0.2 - 0.4 * j as f64
                };
                cases.push((a, v, n, e));
            }
        }
    }
    let samples = exec.map(&cases, |&(a, v, n, e)| -> Result<(f64, f64, f64, f64)> {
        let pot = PotentialSpec::power_law(a, v)?;
        let exp = engine::expand(&pot, e, 1.0, n, 4)?;
        Ok((v, 2.0 * n as f64 + 1.0, exp.coeffs[0], exp.coeffs[4]))
    });
    let samples = samples.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(recover_denominator_4(samples))
}
