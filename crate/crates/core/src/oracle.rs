//! Independent radial eigenvalue solver.
//!
//! Bound states of `-ℏ²/2m u'' + [ℏ² l(l+1)/2mr² + V] u = E u` are found by
//! Numerov integration on a uniform grid in `t = ln r` with
//! `u = r^{1/2} φ(t)`, which turns the equation into
//! `φ'' = [(l+½)² + 2m r² (V - E)/ℏ²] φ` and handles real `l > -½`.
//! The eigenvalue is bracketed by bisection on the node count of the
//! outward solution, then polished by Brent's method on the normalized
//! Wronskian mismatch of outward and inward solutions at the outer turning
//! point. The grid is doubled until the energy is stable.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::brent;
use crate::par::Execution;
use crate::potential::PotentialSpec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub min_points: usize,
    pub max_points: usize,
    /// Accept when doubling the grid changes `E` by less than this (relative).
    pub refine_tol: f64,
    /// `r_min` as a fraction of the inner turning point.
    pub r_min_factor: f64,
    /// WKB decay exponent required between the outer turning point and `r_max`.
    pub decay_exponent: f64,
    /// Upper bound on `h sqrt|F|` over the grid.
    pub step_quality: f64,
    /// Relative tolerance of the energy root.
    pub energy_tol: f64,
    /// Absolute tolerance on `l` in [`exact_regge`].
    pub l_tol: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            min_points: 40_000,
            max_points: 2_560_000,
            refine_tol: 1e-10,
            r_min_factor: 1e-6,
            decay_exponent: 40.0,
            step_quality: 0.05,
            energy_tol: 1e-15,
            l_tol: 1e-11,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridInfo {
    pub r_min: f64,
    pub r_max: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenResult {
    pub energy: f64,
    pub n: u32,
    pub l: f64,
    pub grid: GridInfo,
    pub converged: bool,
    /// Normalized matching defect at the returned energy.
    pub residual: f64,
    /// Sign changes of the matched eigenfunction.
    pub nodes: u32,
    /// `|E(2N) - E(N)| / |E|` of the last refinement.
    pub refinement: f64,
    /// `|u|` at `r_min` and `r_max` relative to its maximum.
    pub boundary: [f64; 2],
}

struct Problem<'a> {
    pot: &'a PotentialSpec,
    mass: f64,
    hbar: f64,
    l: f64,
}

impl Problem<'_> {
    fn langer(&self) -> f64 {
        (self.l + 0.5) * (self.l + 0.5)
    }

    /// `V(r) + ℏ²(l+½)²/(2m r²)`.
    fn effective(&self, r: f64) -> f64 {
        self.pot.value(r) + self.hbar * self.hbar * self.langer() / (2.0 * self.mass * r * r)
    }

    fn coupling(&self) -> f64 {
        2.0 * self.mass / (self.hbar * self.hbar)
    }
}

const SCAN_LO: f64 = 1e-8;
const SCAN_HI: f64 = 1e12;
const SCAN_RATIO: f64 = 1.02;

fn scan_points() -> impl Iterator<Item = f64> {
    let count = ((SCAN_HI / SCAN_LO).ln() / SCAN_RATIO.ln()).ceil() as i32;
    (0..=count).map(|k| SCAN_LO * SCAN_RATIO.powi(k))
}

/// Uniform grid in `t = ln r` with cached `2m r² V / ℏ²` and `2m r² / ℏ²`.
struct Grid {
    t0: f64,
    h: f64,
    langer: f64,
    r2v: Vec<f64>,
    r2: Vec<f64>,
    r_max: f64,
}

impl Grid {
    fn build(problem: &Problem, r_min: f64, r_max: f64, points: usize) -> Self {
        let t0 = r_min.ln();
        let h = (r_max.ln() - t0) / (points - 1) as f64;
        let c = problem.coupling();
        let mut r2v = Vec::with_capacity(points);
        let mut r2 = Vec::with_capacity(points);
        for i in 0..points {
            let r = (t0 + i as f64 * h).exp();
            r2.push(c * r * r);
            r2v.push(c * r * r * problem.pot.value(r));
        }
        Grid {
            t0,
            h,
            langer: problem.langer(),
            r2v,
            r2,
            r_max,
        }
    }

    fn len(&self) -> usize {
        self.r2.len()
    }

    fn info(&self) -> GridInfo {
        GridInfo {
            r_min: self.t0.exp(),
            r_max: self.r_max,
            points: self.len(),
        }
    }

    #[inline]
    fn f(&self, i: usize, energy: f64) -> f64 {
        self.langer + self.r2v[i] - energy * self.r2[i]
    }

    /// `h² F_i / 12`.
    #[inline]
    fn d(&self, i: usize, energy: f64) -> f64 {
        self.h * self.h * self.f(i, energy) / 12.0
    }

    fn start(&self) -> (f64, f64) {
        (1.0, ((self.langer.sqrt()) * self.h).exp())
    }

    /// Numerov in summed-difference form: with `Y = (1 - d) φ`,
    /// `ΔY_{i+1} = ΔY_i + 12 d_i φ_i`. Carrying the difference keeps the
    /// `h² F` information out of the rounding of `φ` itself.
    ///
    /// Visits indices in `order` (which must be contiguous, either
    /// direction) starting from the two given values and calls `visit` with
    /// each new `(index, φ)`; returning a rescale factor lets the caller
    /// renormalize.
    fn sweep<I, V>(&self, energy: f64, mut order: I, p0: f64, p1: f64, mut visit: V)
    where
        I: Iterator<Item = usize>,
        V: FnMut(usize, f64) -> Option<f64>,
    {
        let (Some(i0), Some(mut i1)) = (order.next(), order.next()) else {
            return;
        };
        let mut phi = p1;
        let mut y = (1.0 - self.d(i1, energy)) * p1;
        let mut dy = y - (1.0 - self.d(i0, energy)) * p0;
        for i2 in order {
            dy += 12.0 * self.d(i1, energy) * phi;
            y += dy;
            let d2 = self.d(i2, energy);
            phi = y / (1.0 - d2);
            if let Some(scale) = visit(i2, phi) {
                y *= scale;
                dy *= scale;
                phi *= scale;
            }
            i1 = i2;
        }
    }

    /// Sign changes of the outward solution over the whole grid.
    fn count_nodes(&self, energy: f64) -> u32 {
        let (p0, p1) = self.start();
        let mut nodes = 0;
        let mut last_sign = p1.signum();
        self.sweep(energy, 0..self.len(), p0, p1, |_, p| {
            if p != 0.0 && p.signum() != last_sign {
                nodes += 1;
                last_sign = p.signum();
            }
            (p.abs() > 1e150).then_some(1e-150)
        });
        nodes
    }

    /// Last index where the solution is classically allowed (`F < 0`).
    fn turning_index(&self, energy: f64) -> usize {
        let n = self.len();
        let idx = (0..n).rev().find(|&i| self.f(i, energy) < 0.0).unwrap_or(n / 2);
        idx.clamp(2, n - 3)
    }

    fn outward(&self, energy: f64, upto: usize) -> Vec<f64> {
        let mut phi = vec![0.0; upto + 1];
        let (p0, p1) = self.start();
        phi[0] = p0;
        phi[1] = p1;
        self.sweep(energy, 0..upto + 1, p0, p1, |i, p| {
            phi[i] = p;
            if p.abs() > 1e150 {
                phi[..=i].iter_mut().for_each(|x| *x *= 1e-150);
                Some(1e-150)
            } else {
                None
            }
        });
        phi
    }

    /// Inward solution from `φ(t_end) = 0`, returned on indices `from..len`.
    fn inward(&self, energy: f64, from: usize) -> Vec<f64> {
        let n = self.len();
        let mut phi = vec![0.0; n - from];
        phi[n - 2 - from] = 1e-20;
        self.sweep(energy, (from..n).rev(), 0.0, 1e-20, |i, p| {
            phi[i - from] = p;
            if p.abs() > 1e150 {
                phi[i - from..].iter_mut().for_each(|x| *x *= 1e-150);
                Some(1e-150)
            } else {
                None
            }
        });
        phi
    }

    /// Normalized Wronskian of outward and inward solutions at `m`.
    fn defect(&self, energy: f64, m: usize) -> f64 {
        let out = self.outward(energy, m + 1);
        let inn = self.inward(energy, m);
        let (o0, o1) = (out[m], out[m + 1]);
        let (i0, i1) = (inn[0], inn[1]);
        (o1 * i0 - o0 * i1) / (o0.hypot(o1) * i0.hypot(i1))
    }

    /// Matched eigenfunction `φ` on the whole grid.
    fn eigenfunction(&self, energy: f64, m: usize) -> Vec<f64> {
        let mut out = self.outward(energy, m);
        let inn = self.inward(energy, m);
        let scale = if inn[0] != 0.0 { out[m] / inn[0] } else { 0.0 };
        out.extend(inn[1..].iter().map(|x| x * scale));
        out
    }
}

struct Layout {
    r_min: f64,
    r_max: f64,
    max_abs_f: f64,
}

/// Radial range for energies up to `e_ref`.
fn layout(problem: &Problem, e_ref: f64, cfg: &OracleConfig) -> Result<Layout> {
    let mut inner = None;
    let mut outer = None;
    for r in scan_points() {
        if problem.effective(r) < e_ref {
            inner.get_or_insert(r);
            outer = Some(r);
        }
    }
    let (Some(r_in), Some(r_out)) = (inner, outer) else {
        return Err(Error::OutOfRange {
            energy: e_ref,
            n: 0,
            reason: "energy below the effective potential everywhere".into(),
        });
    };
    if r_out * SCAN_RATIO >= SCAN_HI {
        return Err(Error::GridTooSmall { r_max: SCAN_HI });
    }
    let r_min = cfg.r_min_factor * r_in;
    let c = problem.coupling();
    let kappa = |r: f64| (c * (problem.effective(r) - e_ref)).max(0.0).sqrt();

    // accumulate the decay exponent outward from the turning point
    let mut r_max = None;
    for cap in [1e3, 1e6] {
        let limit = r_out * cap;
        let mut r = r_out;
        let mut k_prev = kappa(r);
        let mut exponent = 0.0;
        while r < limit {
            let next = r * 1.002;
            let k_next = kappa(next);
            exponent += 0.5 * (k_prev + k_next) * (next - r);
            r = next;
            k_prev = k_next;
            if exponent >= cfg.decay_exponent {
                r_max = Some(r);
                break;
            }
        }
        if r_max.is_some() {
            break;
        }
    }
    let r_max = r_max.ok_or(Error::GridTooSmall { r_max: r_out * 1e6 })?;

    let mut max_abs_f: f64 = problem.langer();
    let (t_lo, t_hi) = (r_min.ln(), r_max.ln());
    for k in 0..=4000 {
        let r = (t_lo + (t_hi - t_lo) * k as f64 / 4000.0).exp();
        let f = problem.langer() + c * r * r * (problem.pot.value(r) - e_ref);
        max_abs_f = max_abs_f.max(f.abs());
    }
    Ok(Layout {
        r_min,
        r_max,
        max_abs_f,
    })
}

fn points_for(layout: &Layout, cfg: &OracleConfig) -> Result<usize> {
    let span = (layout.r_max / layout.r_min).ln();
    let h = cfg.step_quality / layout.max_abs_f.sqrt();
    let needed = (span / h).ceil() as usize + 1;
    let points = needed.max(cfg.min_points);
    if points > cfg.max_points {
        return Err(Error::GridTooSmall {
            r_max: layout.r_max,
        });
    }
    Ok(points)
}

fn effective_floor(problem: &Problem) -> f64 {
    scan_points()
        .map(|r| problem.effective(r))
        .filter(|w| w.is_finite())
        .fold(f64::INFINITY, f64::min)
}

struct Solved {
    energy: f64,
    residual: f64,
    m: usize,
}

/// Eigenvalue with `n` nodes on a fixed grid, inside `[lo, hi]` where the
/// outward node count is `<= n` at `lo` and `> n` at `hi`.
fn solve_on_grid(grid: &Grid, n: u32, mut lo: f64, mut hi: f64, cfg: &OracleConfig) -> Result<Solved> {
    let scale = hi.abs().max(lo.abs()).max(hi - lo);
    let mut iterations = 0;
    while hi - lo > 1e-9 * scale {
        let mid = 0.5 * (lo + hi);
        if grid.count_nodes(mid) > n {
            hi = mid;
        } else {
            lo = mid;
        }
        iterations += 1;
        if iterations > 200 {
            break;
        }
    }
    let m = grid.turning_index(0.5 * (lo + hi));
    let xtol = cfg.energy_tol * scale;
    let energy = match brent(|e| grid.defect(e, m), lo, hi, xtol, 200) {
        Ok(e) => e,
        Err(_) => {
            while hi - lo > xtol {
                let mid = 0.5 * (lo + hi);
                if grid.count_nodes(mid) > n {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            0.5 * (lo + hi)
        }
    };
    Ok(Solved {
        energy,
        residual: grid.defect(energy, m),
        m,
    })
}

/// Bound state with `n` nodes for real angular momentum `l > -1/2`.
pub fn solve_eigenvalue(
    pot: &PotentialSpec,
    mass: f64,
    hbar: f64,
    l: f64,
    n: u32,
    cfg: &OracleConfig,
) -> Result<EigenResult> {
    if !(mass > 0.0) || !(hbar > 0.0) {
        return Err(Error::InvalidInput(format!(
            "mass {mass} and hbar {hbar} must be positive"
        )));
    }
    if !(l > -0.5) || !l.is_finite() {
        return Err(Error::InvalidInput(format!("l = {l} must exceed -1/2")));
    }
    if cfg.min_points < 16 {
        return Err(Error::InvalidInput("grid needs at least 16 points".into()));
    }
    let problem = Problem { pot, mass, hbar, l };
    let floor = effective_floor(&problem);
    if !floor.is_finite() {
        return Err(Error::InvalidPotential(
            "effective potential has no finite minimum".into(),
        ));
    }

    // Grow the upper bracket until it holds more than n nodes. Energies at
    // or above `ceiling` are unbound on the scan range (the continuum for
    // potentials that level off), so the bracket approaches it geometrically.
    let ceiling = problem.effective(SCAN_HI / SCAN_RATIO);
    let span = ceiling - floor;
    let mut width = floor.abs().max(1e-3);
    let mut squeeze = 0.5;
    let mut found = None;
    for _ in 0..80 {
        let hi = if width < 0.5 * span {
            floor + width
        } else {
            squeeze *= 0.5;
            ceiling - 2.0 * squeeze * span
        };
        let lay = layout(&problem, hi, cfg)?;
        let points = points_for(&lay, cfg)?;
        let grid = Grid::build(&problem, lay.r_min, lay.r_max, points);
        if grid.count_nodes(hi) > n {
            found = Some((hi, lay, points));
            break;
        }
        width *= 2.0;
    }
    let (mut hi, mut lay, mut points) = found.ok_or(Error::NoConvergence {
        what: format!("bracketing state n = {n}"),
        iterations: 80,
    })?;

    // The first bracket can overshoot by a lot, which stretches r_max and
    // the step count; narrow it on the coarse grid and lay out again.
    let coarse = Grid::build(&problem, lay.r_min, lay.r_max, points);
    let mut lo = floor;
    while hi - lo > 0.02 * (hi - floor) {
        let mid = 0.5 * (lo + hi);
        if coarse.count_nodes(mid) > n {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let guard = (hi + (hi - lo)).min(0.5 * (hi + ceiling));
    if let Ok(tight) = layout(&problem, guard, cfg) {
        if let Ok(tight_points) = points_for(&tight, cfg) {
            let grid = Grid::build(&problem, tight.r_min, tight.r_max, tight_points);
            if grid.count_nodes(guard) > n && grid.count_nodes(floor) <= n {
                hi = guard;
                lay = tight;
                points = tight_points;
            }
        }
    }

    let mut grid = Grid::build(&problem, lay.r_min, lay.r_max, points);
    let mut solved = solve_on_grid(&grid, n, floor, hi, cfg)?;
    let mut refinement = f64::INFINITY;
    let mut converged = false;
    while 2 * points <= cfg.max_points {
        let finer_points = 2 * points - 1;
        let finer = Grid::build(&problem, lay.r_min, lay.r_max, finer_points);
        let finer_solved = solve_on_grid(&finer, n, floor, hi, cfg)?;
        refinement = (finer_solved.energy - solved.energy).abs() / finer_solved.energy.abs().max(1e-300);
        grid = finer;
        solved = finer_solved;
        points = finer_points;
        if refinement <= cfg.refine_tol {
            converged = true;
            break;
        }
    }

    let phi = grid.eigenfunction(solved.energy, solved.m);
    let mut nodes = 0u32;
    let mut last = 0.0f64;
    for &p in &phi[..phi.len() - 1] {
        if p != 0.0 {
            if last != 0.0 && p.signum() != last.signum() {
                nodes += 1;
            }
            last = p;
        }
    }
    // |u| = r^{1/2}|φ|
    let u: Vec<f64> = phi
        .iter()
        .enumerate()
        .map(|(i, p)| (0.5 * (grid.t0 + i as f64 * grid.h)).exp() * p.abs())
        .collect();
    let u_max = u.iter().cloned().fold(0.0, f64::max);
    let boundary = [u[0] / u_max, u[u.len() - 2] / u_max];

    if nodes != n {
        return Err(Error::NoConvergence {
            what: format!("eigenfunction has {nodes} nodes, expected {n}"),
            iterations: 0,
        });
    }
    Ok(EigenResult {
        energy: solved.energy,
        n,
        l,
        grid: grid.info(),
        converged,
        residual: solved.residual,
        nodes,
        refinement,
        boundary,
    })
}

/// Angular momentum `l` at which the state with `n` nodes has energy `E`.
pub fn exact_regge(
    pot: &PotentialSpec,
    mass: f64,
    hbar: f64,
    energy: f64,
    n: u32,
    cfg: &OracleConfig,
) -> Result<f64> {
    let mismatch = |l: f64| -> Result<f64> {
        Ok(solve_eigenvalue(pot, mass, hbar, l, n, cfg)?.energy - energy)
    };
    let mut lo = 0.0;
    let mut f_lo = mismatch(lo)?;
    if f_lo == 0.0 {
        return Ok(0.0);
    }
    if f_lo > 0.0 {
        lo = -0.49;
        f_lo = mismatch(lo)?;
        if f_lo > 0.0 {
            return Err(Error::OutOfRange {
                energy,
                n,
                reason: "below the lowest state with this node count".into(),
            });
        }
    }
    let mut hi = 1.0;
    let mut f_hi = mismatch(hi)?;
    while f_hi < 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > 1e4 {
            return Err(Error::OutOfRange {
                energy,
                n,
                reason: "requires l > 1e4".into(),
            });
        }
        f_hi = mismatch(hi)?;
    }
    let mut failure = None;
    let l = brent(
        |l| match mismatch(l) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        lo,
        hi,
        cfg.l_tol,
        200,
    )?;
    match failure {
        Some(e) => Err(e),
        None => Ok(l),
    }
}

/// Eigenvalues for a list of `(n, l)` states.
pub fn solve_states(
    pot: &PotentialSpec,
    mass: f64,
    hbar: f64,
    states: &[(u32, f64)],
    cfg: &OracleConfig,
    exec: Execution,
) -> Vec<Result<EigenResult>> {
    exec.map(states, |&(n, l)| solve_eigenvalue(pot, mass, hbar, l, n, cfg))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn harmonic() -> PotentialSpec {
        PotentialSpec::power_law(1.0, 2.0).unwrap()
    }

    #[test]
    fn harmonic_ground_state() {
        let res = solve_eigenvalue(&harmonic(), 1.0, 1.0, 0.0, 0, &OracleConfig::default()).unwrap();
        let exact = 2f64.sqrt() * 1.5;
        assert!((res.energy - exact).abs() < 1e-8 * exact, "{}", res.energy);
        assert!(res.converged);
        assert_eq!(res.nodes, 0);
        assert!(res.boundary[0] < 1e-5 && res.boundary[1] < 1e-10, "{:?}", res.boundary);
    }

    #[test]
    fn harmonic_excited_state() {
        let res = solve_eigenvalue(&harmonic(), 1.0, 1.0, 1.0, 2, &OracleConfig::default()).unwrap();
        let exact = 2f64.sqrt() * 6.5;
        assert!((res.energy - exact).abs() < 1e-8 * exact);
        assert_eq!(res.nodes, 2);
    }

    #[test]
    fn rejects_bad_input() {
        let cfg = OracleConfig::default();
        assert!(solve_eigenvalue(&harmonic(), 0.0, 1.0, 0.0, 0, &cfg).is_err());
        assert!(solve_eigenvalue(&harmonic(), 1.0, 1.0, -0.6, 0, &cfg).is_err());
    }

    #[test]
    fn regge_below_range() {
        let err = exact_regge(&harmonic(), 1.0, 1.0, 0.1, 0, &OracleConfig::default()).unwrap_err();
        assert!(matches!(err, Error::OutOfRange { .. }));
    }

    #[test]
    fn harmonic_fractional_l() {
        let e = 2f64.sqrt() * (2.0 + 1.5 + 0.5);
        let l = exact_regge(&harmonic(), 1.0, 1.0, e, 1, &OracleConfig::default()).unwrap();
        assert!((l - 0.5).abs() < 1e-7, "{l}");
    }
}
