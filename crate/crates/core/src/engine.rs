//! Recurrences for the Laurent coefficients of the logarithmic derivative
//! and for the ℏ-expansion coefficients of the Regge trajectory.
//!
//! Row `k` of the coefficient table holds `C^k_i`, the coefficients of
//! `C_k(r) = x^{1-2k} Σ_i C^k_i x^i` with `x = (r - r0)/r0`. The quantization
//! condition pins `C^1_0 = n/r0` and `C^k_{2k-2} = 0` for `k >= 2`.
//!
//! Row `k` and `α_k` depend on each other only through the quantized entry
//! `C^k_{2k-2}`, so each order is built in two phases: entries `i <= 2k-2`,
//! then `α_k`, then the remaining entries.
//!
//! Masses enter as a slice `m_0, m_1, ...`: `m_0` builds the orbit and the
//! higher entries add the renormalization source terms. A single-element
//! slice is the plain expansion.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::Execution;
use crate::potential::{build_orbit, Orbit, PotentialSpec};

/// Highest order accepted; double precision is validated up to here.
pub const MAX_ORDER: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct CoeffTable {
    n: u32,
    r0: f64,
    rows: Vec<Vec<f64>>,
    filled: Vec<usize>,
}

impl CoeffTable {
    /// Allocates rows `0..=order` of `width + 1` entries and fills row 0.
    pub fn new(n: u32, orbit: &Orbit, order: usize, width: usize) -> Result<Self> {
        if orbit.a.len() <= width {
            return Err(Error::InvalidInput(format!(
                "orbit carries a_0..a_{} but width {width} needs a_{width}",
                orbit.a.len() - 1
            )));
        }
        let mut rows = vec![vec![0.0; width + 1]; order + 1];
        rows[0] = zeroth_order(orbit, width);
        let mut filled = vec![0; order + 1];
        filled[0] = width + 1;
        Ok(CoeffTable {
            n,
            r0: orbit.r0,
            rows,
            filled,
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn order(&self) -> usize {
        self.rows.len() - 1
    }

    pub fn width(&self) -> usize {
        self.rows[0].len() - 1
    }

    /// `C^k_i` if it has been computed.
    pub fn get(&self, k: usize, i: usize) -> Option<f64> {
        (k < self.rows.len() && i < self.filled[k]).then(|| self.rows[k][i])
    }

    /// Computed prefix of row `k`.
    pub fn row(&self, k: usize) -> &[f64] {
        &self.rows[k][..self.filled[k]]
    }

    pub fn filled_up_to(&self, k: usize) -> usize {
        self.filled[k]
    }

    /// Whether the quantized entries still hold exactly their pinned values.
    pub fn quantization_intact(&self) -> bool {
        (1..self.rows.len()).all(|k| match self.get(k, 2 * k - 2) {
            Some(c) if k == 1 => c == self.n as f64 / self.r0,
            Some(c) => c == 0.0,
            None => true,
        })
    }

    fn require(&self, row: usize, through: usize, k: usize, i: usize) -> Result<()> {
        if self.filled[row] > through {
            Ok(())
        } else {
            Err(Error::DependencyOrder {
                k,
                i,
                missing: format!("C[{row}][{through}] not yet computed"),
            })
        }
    }
}

/// Row 0: `C^0_0 = -ω`, then
/// `C^0_i = (Σ_{j=1}^{i-1} C^0_j C^0_{i-j} - ω² a_i) / (2ω)`.
pub fn zeroth_order(orbit: &Orbit, width: usize) -> Vec<f64> {
    let omega = orbit.omega;
    let omega_sq = orbit.omega_sq();
    let mut row = vec![0.0; width + 1];
    row[0] = -omega;
    for i in 1..=width {
        let conv: f64 = (1..i).map(|j| row[j] * row[i - j]).sum();
        row[i] = (conv - omega_sq * orbit.a[i]) / (2.0 * omega);
    }
    row
}

fn sign(i: usize) -> f64 {
    if i.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// `α_{k-1} + Σ_{j=0}^{k} α_j α_{k-j}`, the order-ℏ^k part of `α(α + ℏ)`.
fn centrifugal_source(alphas: &[f64], k: usize) -> f64 {
    alphas[k - 1] + (0..=k).map(|j| alphas[j] * alphas[k - j]).sum::<f64>()
}

/// Fills row `k` from its current high-water mark through column `upto`.
///
/// Entries with `i > 2k-2` need `α_0..=α_k` in `alphas`; the entry
/// `i = 2k-2` is set by quantization.
pub fn laurent_row(
    k: usize,
    table: &mut CoeffTable,
    alphas: &[f64],
    orbit: &Orbit,
    mass_k: f64,
    upto: usize,
) -> Result<()> {
    if k == 0 || k > table.order() {
        return Err(Error::InvalidInput(format!(
            "row {k} outside 1..={}",
            table.order()
        )));
    }
    if upto > table.width() {
        return Err(Error::InvalidInput(format!(
            "column {upto} beyond table width {}",
            table.width()
        )));
    }
    let r0 = table.r0;
    let quantized = 2 * k - 2;
    let c00 = table.rows[0][0];
    for i in table.filled[k]..=upto {
        if i == quantized {
            table.rows[k][i] = if k == 1 { table.n as f64 / r0 } else { 0.0 };
            table.filled[k] = i + 1;
            continue;
        }
        for row in 0..k {
            table.require(row, i, k, i)?;
        }
        if i > quantized && alphas.len() <= k {
            return Err(Error::DependencyOrder {
                k,
                i,
                missing: format!("alpha_{k} not supplied"),
            });
        }
        let shift = i as f64 - 2.0 * k as f64 + 3.0;
        let mut t = -shift / r0 * table.rows[k - 1][i];
        for j in 1..k {
            for p in 0..=i {
                t -= table.rows[j][p] * table.rows[k - j][i - p];
            }
        }
        for p in 1..=i {
            t -= 2.0 * table.rows[0][p] * table.rows[k][i - p];
        }
        if i > quantized {
            t += sign(i) * shift / (r0 * r0) * centrifugal_source(alphas, k);
            t += 2.0 * mass_k * orbit.v_coeffs[i - quantized];
        }
        table.rows[k][i] = t / (2.0 * c00);
        table.filled[k] = i + 1;
    }
    Ok(())
}

/// `α_k` from the `x^0` balance at order ℏ^k:
///
/// `2 α_0 α_k = r0 C^{k-1}_{2k-2} + r0² Σ_{j=0}^{k} Σ_{p=0}^{2k-2} C^j_p C^{k-j}_{2k-2-p}
///             - α_{k-1} - Σ_{j=1}^{k-1} α_j α_{k-j} + m_k r0² V_1`.
pub fn alpha_step(
    k: usize,
    table: &CoeffTable,
    alphas: &[f64],
    orbit: &Orbit,
    mass_k: f64,
) -> Result<f64> {
    let col = 2 * k - 2;
    if k == 0 || k > table.order() {
        return Err(Error::InvalidInput(format!(
            "order {k} outside 1..={}",
            table.order()
        )));
    }
    if alphas.len() < k {
        return Err(Error::DependencyOrder {
            k,
            i: col,
            missing: format!("alpha_{} not supplied", alphas.len()),
        });
    }
    for row in 0..=k {
        table.require(row, col, k, col)?;
    }
    let r0 = table.r0;
    let rows = &table.rows;
    let mut conv = 0.0;
    for j in 0..=k {
        for p in 0..=col {
            conv += rows[j][p] * rows[k - j][col - p];
        }
    }
    let cross: f64 = (1..k).map(|j| alphas[j] * alphas[k - j]).sum();
    let bracket = r0 * rows[k - 1][col] + r0 * r0 * conv - alphas[k - 1] - cross
        + mass_k * r0 * r0 * orbit.v_coeffs[1];
    Ok(bracket / (2.0 * alphas[0]))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionContext {
    pub energy: f64,
    pub n: u32,
    pub potential: String,
    /// `m_0, m_1, ...` used; a single entry for the plain expansion.
    pub masses: Vec<f64>,
}

/// Coefficients `α_0..=α_N` of the trajectory series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Expansion {
    pub coeffs: Vec<f64>,
    pub context: ExpansionContext,
}

impl Expansion {
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Truncated sum `Σ α_k ℏ^k`.
    pub fn evaluate(&self, hbar: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * hbar + c)
    }
}

pub fn evaluate(exp: &Expansion, hbar: f64) -> f64 {
    exp.evaluate(hbar)
}

/// Runs the staged schedule and returns the series together with the
/// coefficient table it was built from.
pub fn expand_with_table(
    pot: &PotentialSpec,
    energy: f64,
    masses: &[f64],
    n: u32,
    order: usize,
) -> Result<(Expansion, CoeffTable)> {
    if order > MAX_ORDER {
        return Err(Error::InvalidInput(format!(
            "order {order} exceeds {MAX_ORDER}"
        )));
    }
    let m0 = *masses
        .first()
        .ok_or_else(|| Error::InvalidInput("empty mass list".into()))?;
    let width = 2 * order + 2;
    let orbit = build_orbit(pot, energy, m0, width + 2)?;
    let mut table = CoeffTable::new(n, &orbit, order, width)?;
    let mut alphas = Vec::with_capacity(order + 1);
    alphas.push(orbit.alpha0);
    for k in 1..=order {
        let mass_k = masses.get(k).copied().unwrap_or(0.0);
        laurent_row(k, &mut table, &alphas, &orbit, mass_k, 2 * k - 2)?;
        let alpha_k = alpha_step(k, &table, &alphas, &orbit, mass_k)?;
        alphas.push(alpha_k);
        laurent_row(k, &mut table, &alphas, &orbit, mass_k, width)?;
    }
    let exp = Expansion {
        coeffs: alphas,
        context: ExpansionContext {
            energy,
            n,
            potential: pot.label(),
            masses: masses.to_vec(),
        },
    };
    Ok((exp, table))
}

/// `α_0..=α_N` at energy `E` for `n` radial nodes.
pub fn expand(pot: &PotentialSpec, energy: f64, mass: f64, n: u32, order: usize) -> Result<Expansion> {
    expand_with_table(pot, energy, &[mass], n, order).map(|(exp, _)| exp)
}

/// Expansions over a list of energies, in input order.
pub fn expand_many(
    pot: &PotentialSpec,
    energies: &[f64],
    mass: f64,
    n: u32,
    order: usize,
    exec: Execution,
) -> Vec<Result<Expansion>> {
    exec.map(energies, |&e| expand(pot, e, mass, n, order))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::powerlaw_alpha0;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn harmonic() -> PotentialSpec {
        PotentialSpec::power_law(1.0, 2.0).unwrap()
    }

    #[test]
    fn harmonic_series_terminates() {
        let exp = expand(&harmonic(), 2.0, 1.0, 0, 4).unwrap();
        assert_relative_eq!(exp.coeffs[0], 2f64.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(exp.coeffs[1], -1.5, max_relative = 1e-14);
        for c in &exp.coeffs[2..] {
            assert!(c.abs() < 1e-12 * exp.coeffs[0], "{c}");
        }
        assert_relative_eq!(exp.evaluate(1.0), 2f64.sqrt() - 1.5, epsilon = 1e-12);
    }

    #[test]
    fn zeroth_order_first_entry() {
        let orbit = build_orbit(&harmonic(), 2.0, 1.0, 8).unwrap();
        let row = zeroth_order(&orbit, 6);
        assert_eq!(row[0], -orbit.omega);
        assert_relative_eq!(row[1], -orbit.omega * orbit.a[1] / 2.0, max_relative = 1e-15);
    }

    #[test]
    fn zeroth_order_vanishes_without_source() {
        let mut orbit = build_orbit(&harmonic(), 2.0, 1.0, 8).unwrap();
        for a in orbit.a.iter_mut().skip(1) {
            *a = 0.0;
        }
        let row = zeroth_order(&orbit, 6);
        assert!(row[1..].iter().all(|&c| c == 0.0));
    }

    #[test]
    fn quantized_entries() {
        let pot = PotentialSpec::martin();
        let (_, table) = expand_with_table(&pot, 1.3, &[1.0], 3, 4).unwrap();
        assert_eq!(table.get(1, 0), Some(3.0 / table.r0));
        assert_eq!(table.get(2, 2), Some(0.0));
        assert_eq!(table.get(4, 6), Some(0.0));
        assert!(table.quantization_intact());
    }

    #[test]
    fn alpha_step_requires_low_phase() {
        let pot = PotentialSpec::martin();
        let orbit = build_orbit(&pot, 1.3, 1.0, 8).unwrap();
        let mut table = CoeffTable::new(1, &orbit, 2, 6).unwrap();
        let alphas = vec![orbit.alpha0];
        assert!(matches!(
            alpha_step(1, &table, &alphas, &orbit, 0.0),
            Err(Error::DependencyOrder { .. })
        ));
        laurent_row(1, &mut table, &alphas, &orbit, 0.0, 0).unwrap();
        assert!(alpha_step(1, &table, &alphas, &orbit, 0.0).is_ok());
    }

    #[test]
    fn high_phase_requires_alpha() {
        let pot = PotentialSpec::martin();
        let orbit = build_orbit(&pot, 1.3, 1.0, 8).unwrap();
        let mut table = CoeffTable::new(1, &orbit, 2, 6).unwrap();
        let alphas = vec![orbit.alpha0];
        let err = laurent_row(1, &mut table, &alphas, &orbit, 0.0, 3).unwrap_err();
        assert!(matches!(err, Error::DependencyOrder { k: 1, i: 1, .. }));
        // the quantized entry was still filled before the failure
        assert_eq!(table.filled_up_to(1), 1);
    }

    #[test]
    fn row_two_needs_row_one() {
        let pot = PotentialSpec::martin();
        let orbit = build_orbit(&pot, 1.3, 1.0, 8).unwrap();
        let mut table = CoeffTable::new(1, &orbit, 2, 6).unwrap();
        let alphas = vec![orbit.alpha0, -1.0, 0.0];
        assert!(matches!(
            laurent_row(2, &mut table, &alphas, &orbit, 0.0, 1),
            Err(Error::DependencyOrder { .. })
        ));
    }

    #[test]
    fn first_order_closed_form() {
        for &(v, a, e) in &[(0.1, 1.0, 1.3), (1.0, 1.0, 2.0), (-0.5, -1.0, -0.4), (3.0, 2.0, 1.1)] {
            let pot = PotentialSpec::power_law(a, v).unwrap();
            for n in 0..5u32 {
                let exp = expand(&pot, e, 1.0, n, 1).unwrap();
                let q = 2.0 * n as f64 + 1.0;
                let expected = -0.5 * (1.0 + q * (v + 2.0f64).sqrt());
                assert_relative_eq!(exp.coeffs[1], expected, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn second_order_closed_form() {
        let (v, e, n) = (0.1, 1.29, 1u32);
        let pot = PotentialSpec::martin();
        let exp = expand(&pot, e, 1.0, n, 2).unwrap();
        let q = 3.0;
        let a0 = powerlaw_alpha0(1.0, v, 1.0, e);
        let expected = (v - 2.0) * (v + 1.0) * (3.0 * q * q - 1.0) / (288.0 * a0);
        assert_relative_eq!(exp.coeffs[2], expected, max_relative = 1e-11);
    }

    #[test]
    fn order_zero_is_classical() {
        let exp = expand(&PotentialSpec::martin(), 1.4, 1.0, 2, 0).unwrap();
        assert_eq!(exp.coeffs.len(), 1);
        assert_eq!(exp.evaluate(0.7), exp.coeffs[0]);
    }

    #[test]
    fn order_limit() {
        assert!(expand(&harmonic(), 2.0, 1.0, 0, MAX_ORDER + 1).is_err());
        assert!(expand(&harmonic(), 2.0, 1.0, 0, MAX_ORDER).is_ok());
    }

    #[test]
    fn sweep_paths_agree() {
        let pot = PotentialSpec::martin();
        let energies: Vec<f64> = (0..64).map(|i| 0.8 + 0.05 * i as f64).collect();
        let a = expand_many(&pot, &energies, 1.0, 2, 4, Execution::Sequential);
        let b = expand_many(&pot, &energies, 1.0, 2, 4, Execution::Parallel);
        assert_eq!(a, b);
    }

    proptest! {
        #[test]
        fn alpha0_is_independent_of_n(e in 0.5f64..4.0, n in 1u32..6) {
            let pot = PotentialSpec::martin();
            let a = expand(&pot, e, 1.0, 0, 4).unwrap();
            let b = expand(&pot, e, 1.0, n, 4).unwrap();
            prop_assert_eq!(a.coeffs[0].to_bits(), b.coeffs[0].to_bits());
        }

        #[test]
        fn evaluate_at_zero_hbar(e in 0.5f64..4.0, n in 0u32..5) {
            let exp = expand(&PotentialSpec::martin(), e, 1.0, n, 4).unwrap();
            prop_assert_eq!(exp.evaluate(0.0), exp.coeffs[0]);
        }

        #[test]
        fn harmonic_exact_trajectory(e in 0.5f64..20.0, n in 0u32..5, a in 0.3f64..3.0, m in 0.3f64..3.0) {
            let pot = PotentialSpec::power_law(a, 2.0).unwrap();
            let exp = expand(&pot, e, m, n, 4).unwrap();
            let omega_ho = (2.0 * a / m).sqrt();
            let exact = e / omega_ho - (2.0 * n as f64 + 1.5);
            prop_assert!((exp.evaluate(1.0) - exact).abs() < 1e-10 * exp.coeffs[0].max(1.0));
        }
    }
}
