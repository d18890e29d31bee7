//! Potentials, the classical circular orbit and the Taylor data fed to the
//! recurrences.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Analytic derivatives `d^k V / dr^k` of a potential, defined for `r > 0`.
pub trait DerivativeOracle: Send + Sync {
    fn derivative(&self, r: f64, order: usize) -> f64;
}

impl<F> DerivativeOracle for F
where
    F: Fn(f64, usize) -> f64 + Send + Sync,
{
    fn derivative(&self, r: f64, order: usize) -> f64 {
        self(r, order)
    }
}

#[derive(Clone)]
pub enum PotentialSpec {
    /// `V(r) = A r^v`.
    PowerLaw { a: f64, v: f64 },
    /// Any smooth potential given through an analytic derivative oracle.
    General {
        label: String,
        oracle: Arc<dyn DerivativeOracle>,
    },
}

impl fmt::Debug for PotentialSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PotentialSpec::PowerLaw { a, v } => {
                f.debug_struct("PowerLaw").field("a", a).field("v", v).finish()
            }
            PotentialSpec::General { label, .. } => {
                f.debug_struct("General").field("label", label).finish()
            }
        }
    }
}

impl PotentialSpec {
    /// Power law on its confining branch: `A > 0, v > 0` or `A < 0, -2 < v < 0`.
    pub fn power_law(a: f64, v: f64) -> Result<Self> {
        if !a.is_finite() || !v.is_finite() {
            return Err(Error::InvalidPotential("non-finite A or v".into()));
        }
        let confining = (a > 0.0 && v > 0.0) || (a < 0.0 && v > -2.0 && v < 0.0);
        if !confining {
            return Err(Error::InvalidPotential(format!(
                "A = {a}, v = {v} is not on the confining branch (A>0, v>0 or A<0, -2<v<0)"
            )));
        }
        Ok(PotentialSpec::PowerLaw { a, v })
    }

    /// `V(r) = r^0.1`.
    pub fn martin() -> Self {
        PotentialSpec::PowerLaw { a: 1.0, v: 0.1 }
    }

    pub fn general<F>(label: impl Into<String>, oracle: F) -> Self
    where
        F: Fn(f64, usize) -> f64 + Send + Sync + 'static,
    {
        PotentialSpec::General {
            label: label.into(),
            oracle: Arc::new(oracle),
        }
    }

    pub fn label(&self) -> String {
        match self {
            PotentialSpec::PowerLaw { a, v } => format!("powerlaw(A={a},v={v})"),
            PotentialSpec::General { label, .. } => label.clone(),
        }
    }

    pub fn derivative(&self, r: f64, order: usize) -> f64 {
        match self {
            PotentialSpec::PowerLaw { a, v } => {
                let falling: f64 = (0..order).map(|j| v - j as f64).product();
                a * falling * r.powf(v - order as f64)
            }
            PotentialSpec::General { oracle, .. } => oracle.derivative(r, order),
        }
    }

    pub fn value(&self, r: f64) -> f64 {
        self.derivative(r, 0)
    }

    /// Coefficients `V_i = r0^i V^(i)(r0) / i!` for `i = 0..count`, i.e. the
    /// Taylor series of `V` in `x = (r - r0)/r0`.
    pub fn taylor_coefficients(&self, r0: f64, count: usize) -> Vec<f64> {
        match self {
            PotentialSpec::PowerLaw { a, v } => {
                // A r0^v * binom(v, i)
                let mut out = Vec::with_capacity(count);
                let mut binom = 1.0;
                let base = a * r0.powf(*v);
                for i in 0..count {
                    out.push(base * binom);
                    binom *= (v - i as f64) / (i as f64 + 1.0);
                }
                out
            }
            PotentialSpec::General { oracle, .. } => {
                let mut out = Vec::with_capacity(count);
                let mut scale = 1.0;
                for i in 0..count {
                    if i > 0 {
                        scale *= r0 / i as f64;
                    }
                    out.push(scale * oracle.derivative(r0, i));
                }
                out
            }
        }
    }

    /// `V(r) + r V'(r) / 2`, the energy of the circular orbit of radius `r`.
    pub fn orbit_energy(&self, r: f64) -> f64 {
        self.value(r) + 0.5 * r * self.derivative(r, 1)
    }
}

/// Classical circular-orbit data at energy `E`.
#[derive(Debug, Clone, PartialEq)]
pub struct Orbit {
    pub energy: f64,
    pub r0: f64,
    pub alpha0: f64,
    /// Taylor coefficients `V_0..=V_{i_max}` in `x = (r - r0)/r0`.
    pub v_coeffs: Vec<f64>,
    pub omega: f64,
    /// `a_0..=a_{i_max-2}`; `a_0 = 1` identically.
    pub a: Vec<f64>,
    /// Mass entering `omega` and `alpha0` (`m`, or `m0` when renormalized).
    pub mass: f64,
}

impl Orbit {
    pub fn omega_sq(&self) -> f64 {
        self.omega * self.omega
    }

    pub fn i_max(&self) -> usize {
        self.v_coeffs.len() - 1
    }
}

/// Default number of Taylor coefficients (highest index) for order `n`.
pub fn default_i_max(order: usize) -> usize {
    2 * order + 4
}

const SCAN_LO: f64 = 1e-6;
const SCAN_HI: f64 = 1e6;
const SCAN_RATIO: f64 = 1.05;

/// Radius of the circular orbit with energy `E`, solving
/// `V(r) + r V'(r)/2 = E`.
pub fn find_orbit_radius(pot: &PotentialSpec, energy: f64, tol: f64) -> Result<f64> {
    if !energy.is_finite() {
        return Err(Error::InvalidInput(format!("energy {energy} is not finite")));
    }
    let r0 = match pot {
        PotentialSpec::PowerLaw { a, v } => {
            let ratio = 2.0 * energy / (a * (v + 2.0));
            if !(ratio > 0.0) {
                return Err(Error::NoOrbit {
                    energy,
                    reason: format!("2E/(A(v+2)) = {ratio} must be positive"),
                });
            }
            let r0 = ratio.powf(1.0 / v);
            if !r0.is_finite() || r0 <= 0.0 {
                return Err(Error::NoOrbit {
                    energy,
                    reason: format!("closed-form radius {r0} not representable"),
                });
            }
            r0
        }
        PotentialSpec::General { .. } => bracket_orbit(pot, energy, tol)?,
    };
    let omega_sq_sign = stability(pot, r0);
    if omega_sq_sign <= 0.0 {
        return Err(Error::Unstable {
            r0,
            omega_sq: omega_sq_sign,
        });
    }
    Ok(r0)
}

// V_2 + 3/2 V_1 at radius r (proportional to omega^2 / 2m).
fn stability(pot: &PotentialSpec, r: f64) -> f64 {
    0.5 * r * r * pot.derivative(r, 2) + 1.5 * r * pot.derivative(r, 1)
}

fn bracket_orbit(pot: &PotentialSpec, energy: f64, tol: f64) -> Result<f64> {
    let g = |r: f64| pot.orbit_energy(r) - energy;
    let mut found_unstable = None;
    for &(lo, hi) in &[(SCAN_LO, SCAN_HI), (SCAN_LO * 1e-3, SCAN_HI * 1e3)] {
        let mut r = lo;
        let mut gr = g(r);
        while r < hi {
            let next = r * SCAN_RATIO;
            let gn = g(next);
            if gr.is_finite() && gn.is_finite() && gr.signum() != gn.signum() {
                let root = newton_in_bracket(pot, energy, r, next, tol)?;
                if stability(pot, root) > 0.0 {
                    return Ok(root);
                }
                found_unstable.get_or_insert(root);
            }
            r = next;
            gr = gn;
        }
    }
    match found_unstable {
        Some(r0) => Err(Error::Unstable {
            r0,
            omega_sq: stability(pot, r0),
        }),
        None => Err(Error::NoOrbit {
            energy,
            reason: "no sign change of V + rV'/2 - E on the scanned range".into(),
        }),
    }
}

// Newton on g(r) = V + rV'/2 - E, falling back to bisection whenever the
// step leaves the bracket.
fn newton_in_bracket(pot: &PotentialSpec, energy: f64, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let g = |r: f64| pot.orbit_energy(r) - energy;
    let dg = |r: f64| 1.5 * pot.derivative(r, 1) + 0.5 * r * pot.derivative(r, 2);
    let (mut a, mut b) = (lo, hi);
    let ga = g(a);
    let mut r = 0.5 * (a + b);
    let scale = energy.abs().max(pot.value(r).abs()).max(f64::MIN_POSITIVE);
    for _ in 0..200 {
        let gr = g(r);
        if gr.abs() <= tol * scale && (b - a) <= 1e-3 * r {
            return Ok(r);
        }
        if gr.signum() == ga.signum() {
            a = r;
        } else {
            b = r;
        }
        let d = dg(r);
        let step = r - gr / d;
        r = if d != 0.0 && step > a && step < b {
            step
        } else {
            0.5 * (a + b)
        };
        if (b - a) <= 4.0 * f64::EPSILON * r {
            return Ok(r);
        }
    }
    Err(Error::NoConvergence {
        what: "orbit radius".into(),
        iterations: 200,
    })
}

/// Circular-orbit data for a given mass, with Taylor coefficients up to
/// index `i_max`.
pub fn build_orbit(pot: &PotentialSpec, energy: f64, mass: f64, i_max: usize) -> Result<Orbit> {
    if !(mass > 0.0) || !mass.is_finite() {
        return Err(Error::OrbitLost { m0: mass });
    }
    if i_max < 2 {
        return Err(Error::InvalidInput(format!("i_max = {i_max} must be >= 2")));
    }
    let r0 = find_orbit_radius(pot, energy, 1e-14)?;
    let v_coeffs = pot.taylor_coefficients(r0, i_max + 1);
    let (v1, v2) = (v_coeffs[1], v_coeffs[2]);
    let omega_sq = 2.0 * mass * (v2 + 1.5 * v1);
    if !(omega_sq > 0.0) {
        return Err(Error::Unstable { r0, omega_sq });
    }
    let alpha0_sq = mass * r0 * r0 * v1;
    if !(alpha0_sq > 0.0) {
        return Err(Error::NoOrbit {
            energy,
            reason: format!("m r0^3 V'(r0) = {alpha0_sq} <= 0"),
        });
    }
    let a = (0..=i_max - 2)
        .map(|i| {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            (2.0 * mass / omega_sq) * (v_coeffs[i + 2] + sign * (3.0 + i as f64) / 2.0 * v1)
        })
        .collect();
    Ok(Orbit {
        energy,
        r0,
        alpha0: alpha0_sq.sqrt(),
        v_coeffs,
        omega: omega_sq.sqrt(),
        a,
        mass,
    })
}

/// `sqrt(v m A) (2E / (A (v+2)))^((v+2)/(2v))`, the classical angular
/// momentum of a power-law orbit.
pub fn powerlaw_alpha0(a: f64, v: f64, mass: f64, energy: f64) -> f64 {
    (v * mass * a).sqrt() * (2.0 * energy / (a * (v + 2.0))).powf((v + 2.0) / (2.0 * v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn harmonic() -> PotentialSpec {
        PotentialSpec::power_law(1.0, 2.0).unwrap()
    }

    fn general_square() -> PotentialSpec {
        PotentialSpec::general("r^2", |r: f64, k: usize| match k {
            0 => r * r,
            1 => 2.0 * r,
            2 => 2.0,
            _ => 0.0,
        })
    }

    #[test]
    fn rejects_non_confining_branch() {
        assert!(PotentialSpec::power_law(1.0, -1.0).is_err());
        assert!(PotentialSpec::power_law(-1.0, 1.0).is_err());
        assert!(PotentialSpec::power_law(-1.0, -2.5).is_err());
        assert!(PotentialSpec::power_law(1.0, 0.0).is_err());
        assert!(PotentialSpec::power_law(-1.0, -0.5).is_ok());
    }

    #[test]
    fn harmonic_radius_closed_form() {
        assert_eq!(find_orbit_radius(&harmonic(), 2.0, 1e-14).unwrap(), 1.0);
    }

    #[test]
    fn general_matches_closed_form_radius() {
        let r = find_orbit_radius(&general_square(), 2.0, 1e-14).unwrap();
        assert_relative_eq!(r, 1.0, max_relative = 1e-12);
        let orbit = build_orbit(&general_square(), 2.0, 1.0, 8).unwrap();
        let orbit_pl = build_orbit(&harmonic(), 2.0, 1.0, 8).unwrap();
        assert_relative_eq!(orbit.alpha0, orbit_pl.alpha0, max_relative = 1e-12);
    }

    #[test]
    fn no_orbit_for_wrong_sign_energy() {
        assert!(matches!(
            find_orbit_radius(&harmonic(), -1.0, 1e-12),
            Err(Error::NoOrbit { .. })
        ));
        assert!(matches!(
            find_orbit_radius(&general_square(), -1.0, 1e-12),
            Err(Error::NoOrbit { .. })
        ));
    }

    #[test]
    fn unstable_orbit_detected() {
        // V = -1/r^3 falls faster than the centrifugal barrier: circular
        // orbits exist but are unstable.
        let pot = PotentialSpec::general("-r^-3", |r: f64, k: usize| {
            let falling: f64 = (0..k).map(|j| -3.0 - j as f64).product();
            -falling * r.powf(-3.0 - k as f64)
        });
        assert!(matches!(
            find_orbit_radius(&pot, 0.25, 1e-12),
            Err(Error::Unstable { .. })
        ));
    }

    #[test]
    fn harmonic_orbit_data() {
        let orbit = build_orbit(&harmonic(), 2.0, 1.0, 8).unwrap();
        assert_relative_eq!(orbit.v_coeffs[1], 2.0);
        assert_relative_eq!(orbit.v_coeffs[2], 1.0);
        assert_relative_eq!(orbit.omega, 2.0 * 2f64.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(orbit.alpha0, 2f64.sqrt(), max_relative = 1e-15);
        // V_3 = 0 so a_1 = (2/8)(0 - 2*2) = -1
        assert_relative_eq!(orbit.a[1], -1.0, max_relative = 1e-15);
        assert_relative_eq!(orbit.a[0], 1.0, max_relative = 1e-15);
    }

    /// Independent expansion of the orbit's effective radial function
    /// `2m (V(r) - E) + alpha0^2 / r^2` in `x`: its `x^{i+2}` coefficient is
    /// `omega^2 a_i` and the `x^0`, `x^1` coefficients vanish.
    #[test]
    fn a_coefficients_match_effective_potential_series() {
        let pot = PotentialSpec::power_law(1.0, 0.7).unwrap();
        let (m, e) = (1.3, 2.1);
        let orbit = build_orbit(&pot, e, m, 10).unwrap();
        let r0 = orbit.r0;
        // Taylor coefficients of V(r0(1+x)) = A r0^v (1+x)^v from the
        // derivative oracle directly, and of (1+x)^{-2}.
        let mut fact = 1.0;
        for i in 0..=8usize {
            if i > 0 {
                fact *= i as f64;
            }
            let v_i = r0.powi(i as i32) * pot.derivative(r0, i) / fact;
            let inv_sq = if i % 2 == 0 { 1.0 } else { -1.0 } * (i as f64 + 1.0);
            let mut coeff = 2.0 * m * v_i + orbit.alpha0.powi(2) / (r0 * r0) * inv_sq;
            if i == 0 {
                coeff -= 2.0 * m * e;
            }
            match i {
                0 | 1 => assert!(coeff.abs() < 1e-12 * orbit.omega_sq(), "i={i}: {coeff}"),
                _ => assert_relative_eq!(
                    coeff,
                    orbit.omega_sq() * orbit.a[i - 2],
                    max_relative = 1e-12
                ),
            }
        }
    }

    #[test]
    fn general_wrapping_power_law_matches_taylor_coefficients() {
        let (a, v) = (1.0, 0.1);
        let pl = PotentialSpec::power_law(a, v).unwrap();
        let gen = PotentialSpec::general("martin", move |r: f64, k: usize| {
            let falling: f64 = (0..k).map(|j| v - j as f64).product();
            a * falling * r.powf(v - k as f64)
        });
        let e = 1.3;
        let o1 = build_orbit(&pl, e, 1.0, 12).unwrap();
        let o2 = build_orbit(&gen, e, 1.0, 12).unwrap();
        assert_relative_eq!(o1.r0, o2.r0, max_relative = 1e-12);
        for (x, y) in o1.v_coeffs.iter().zip(&o2.v_coeffs) {
            assert_relative_eq!(*x, *y, max_relative = 1e-10);
        }
    }

    #[test]
    fn negative_mass_is_rejected() {
        assert!(matches!(
            build_orbit(&harmonic(), 2.0, 0.0, 8),
            Err(Error::OrbitLost { .. })
        ));
    }

    proptest! {
        #[test]
        fn alpha0_matches_closed_form(v in 0.05f64..4.0, e in 0.2f64..6.0, m in 0.3f64..3.0) {
            let pot = PotentialSpec::power_law(1.0, v).unwrap();
            let orbit = build_orbit(&pot, e, m, 6).unwrap();
            let closed = powerlaw_alpha0(1.0, v, m, e);
            prop_assert!((orbit.alpha0 - closed).abs() <= 1e-12 * closed);
            prop_assert!(orbit.omega_sq() > 0.0);
            let resid = e - pot.orbit_energy(orbit.r0);
            prop_assert!(resid.abs() <= 1e-12 * e);
        }

        #[test]
        fn attractive_branch_alpha0(v in -1.9f64..-0.05, e in -3.0f64..-0.1) {
            let pot = PotentialSpec::power_law(-1.0, v).unwrap();
            let orbit = build_orbit(&pot, e, 1.0, 6).unwrap();
            let closed = powerlaw_alpha0(-1.0, v, 1.0, e);
            prop_assert!((orbit.alpha0 - closed).abs() <= 1e-12 * closed);
        }

        #[test]
        fn energy_scaling_law(v in 0.05f64..4.0, e in 0.2f64..4.0, s in 0.5f64..3.0) {
            let pot = PotentialSpec::power_law(1.0, v).unwrap();
            let o1 = build_orbit(&pot, e, 1.0, 4).unwrap();
            let o2 = build_orbit(&pot, s * e, 1.0, 4).unwrap();
            let r_ratio = s.powf(1.0 / v);
            let a_ratio = s.powf((v + 2.0) / (2.0 * v));
            prop_assert!((o2.r0 - r_ratio * o1.r0).abs() <= 1e-12 * o2.r0);
            prop_assert!((o2.alpha0 - a_ratio * o1.alpha0).abs() <= 1e-12 * o2.alpha0);
        }
    }
}
