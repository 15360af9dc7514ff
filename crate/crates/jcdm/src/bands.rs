//! Semiclassical polariton bands: on-site interaction diagonal, band-edge
//! potentials, discrete-WKB momenta, turning points and orbit geometry.
//!
//! The four bands come from diagonalizing the on-site interaction W(x):
//! `W_ii = g'(s_p sqrt(1+x) + s_m sqrt(1-x))` with sign pairs
//! (+,+), (+,-), (-,+), (-,-) for bands 1..4 (upper-upper .. lower-lower).
//! Band-4 formulas follow the paper's lower-lower derivation; band 1 is
//! its exact mirror under `eps -> -eps`, and band 3 mirrors band 2 under
//! `x -> -x`.

use serde::{Deserialize, Serialize};

use crate::params::ModelParams;
use crate::quad::{integrate_sqrt_endpoints, Endpoints};
use crate::{Error, Result};

/// Polariton band index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BandId {
    /// Band 1: upper-upper.
    UpperUpper,
    /// Band 2: upper-lower.
    UpperLower,
    /// Band 3: lower-upper.
    LowerUpper,
    /// Band 4: lower-lower.
    LowerLower,
}

impl BandId {
    pub fn index(self) -> usize {
        match self {
            BandId::UpperUpper => 1,
            BandId::UpperLower => 2,
            BandId::LowerUpper => 3,
            BandId::LowerLower => 4,
        }
    }

    pub fn from_index(i: usize) -> Result<Self> {
        match i {
            1 => Ok(BandId::UpperUpper),
            2 => Ok(BandId::UpperLower),
            3 => Ok(BandId::LowerUpper),
            4 => Ok(BandId::LowerLower),
            _ => Err(Error::InvalidParams(format!("band index {i} not in 1..=4"))),
        }
    }

    fn signs(self) -> (f64, f64) {
        match self {
            BandId::UpperUpper => (1.0, 1.0),
            BandId::UpperLower => (1.0, -1.0),
            BandId::LowerUpper => (-1.0, 1.0),
            BandId::LowerLower => (-1.0, -1.0),
        }
    }
}

/// Which edge of a band: the `phi = 0` (lower) or `2 phi = pi` (upper)
/// stationary set of the band Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Edge {
    Lower,
    Upper,
}

/// Leading hopping scale `B0(x) = (J/2) sqrt(1 - x^2)`.
#[inline]
pub fn b0(params: &ModelParams, x: f64) -> f64 {
    params.j / 2.0 * (1.0 - x * x).max(0.0).sqrt()
}

/// Diagonal on-site interaction of one band.
#[inline]
pub fn w_diag(params: &ModelParams, band: BandId, x: f64) -> f64 {
    let (sp, sm) = band.signs();
    params.gprime() * (sp * (1.0 + x).max(0.0).sqrt() + sm * (1.0 - x).max(0.0).sqrt())
}

/// First-order hopping correction matrix B1(x); symmetric, zero diagonal.
pub fn b1_matrix(params: &ModelParams, x: f64) -> [[f64; 4]; 4] {
    let pref = params.j / (2.0 * (1.0 - x * x).sqrt());
    let p = (x + 1.0) / 2.0;
    let m = (1.0 - x) / 2.0;
    [
        [0.0, pref * p, pref * m, 0.0],
        [pref * p, 0.0, 0.0, pref * m],
        [pref * m, 0.0, 0.0, pref * p],
        [0.0, pref * m, pref * p, 0.0],
    ]
}

/// Band-edge potential `V_i^{l,h}(x) = W_ii(x) ∓ J sqrt(1-x^2)`.
pub fn potential(params: &ModelParams, band: BandId, edge: Edge, x: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("x = {x} outside [-1, 1]")));
    }
    let sign = match edge {
        Edge::Lower => -1.0,
        Edge::Upper => 1.0,
    };
    Ok(w_diag(params, band, x) + sign * 2.0 * b0(params, x))
}

/// Classically allowed WKB phase `phi = (1/2) Arccos((eps - W)/(-2 B0))`,
/// principal branch in [0, pi/2].
pub fn momentum_allowed(params: &ModelParams, band: BandId, eps: f64, x: f64) -> Result<f64> {
    let ratio = (eps - w_diag(params, band, x)) / (-2.0 * b0(params, x));
    if ratio.abs() > 1.0 + 1e-12 || !ratio.is_finite() {
        return Err(Error::Domain(format!(
            "x = {x} outside the allowed region (arccos argument {ratio})"
        )));
    }
    Ok(0.5 * ratio.clamp(-1.0, 1.0).acos())
}

/// Decay rate in a forbidden region: `(1/2) arccosh(|ratio|)` where
/// `ratio = (eps - W)/(-2 B0)`. Covers both forbidden types (below the
/// band floor, ratio > 1, and above the band ceiling, ratio < -1).
pub fn momentum_forbidden(params: &ModelParams, band: BandId, eps: f64, x: f64) -> Result<f64> {
    let ratio = (eps - w_diag(params, band, x)) / (-2.0 * b0(params, x));
    let mag = ratio.abs();
    if mag < 1.0 - 1e-12 || !mag.is_finite() {
        return Err(Error::Domain(format!(
            "x = {x} is classically allowed (|ratio| = {mag} < 1)"
        )));
    }
    Ok(0.5 * mag.max(1.0).acosh())
}

/// Slow-phase momentum near the `2 phi = pi` edge:
/// `(1/2) Arccos((eps - W)/(+2 B0))`, no minus sign in the denominator.
pub fn momentum_tilde(params: &ModelParams, band: BandId, eps: f64, x: f64) -> Result<f64> {
    let ratio = (eps - w_diag(params, band, x)) / (2.0 * b0(params, x));
    if ratio.abs() > 1.0 + 1e-12 || !ratio.is_finite() {
        return Err(Error::Domain(format!(
            "x = {x} outside the slow-phase region (arccos argument {ratio})"
        )));
    }
    Ok(0.5 * ratio.clamp(-1.0, 1.0).acos())
}

/// Same as [`momentum_tilde`] but clamping arguments slightly above 1 to
/// the edge value 0. Used by the critical-level action, whose inner
/// integration limit is pinned at x = 0 where the argument can exceed 1
/// by O(lambda/N).
pub fn momentum_tilde_clamped(params: &ModelParams, band: BandId, eps: f64, x: f64) -> f64 {
    let ratio = (eps - w_diag(params, band, x)) / (2.0 * b0(params, x));
    0.5 * ratio.clamp(-1.0, 1.0).acos()
}

/// Spectral regime of an energy within its band.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    Delocalized,
    Localized,
    Critical,
    Middle,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Regime::Delocalized => "delocalized",
            Regime::Localized => "localized",
            Regime::Critical => "critical",
            Regime::Middle => "middle",
        };
        f.write_str(s)
    }
}

/// Band owning a given energy in the non-overlapping regime:
/// |eps| <= sqrt(2) g' belongs to the middle bands, above to band 1,
/// below to band 4.
pub fn band_of_energy(params: &ModelParams, eps: f64) -> BandId {
    let edge = params.gprime() * std::f64::consts::SQRT_2;
    if eps > edge {
        BandId::UpperUpper
    } else if eps < -edge {
        BandId::LowerLower
    } else if eps >= 0.0 {
        BandId::UpperLower
    } else {
        BandId::LowerUpper
    }
}

/// Half-width of the critical window around `eps_c = ±(2g' - J)` inside
/// which the Gamma-function quantization rule replaces the standard ones.
/// The crossover is governed by the barrier parameter
/// `chi = N (eps - eps_c) / (2 mu J)`: the window is |chi| <= 1.5, where
/// the standard and modified rules already agree to better than 0.02 rad
/// at the boundary. Zero when the strong-coupling condition g' > 2J
/// fails (no critical rule there).
pub fn critical_window(params: &ModelParams) -> f64 {
    let gp = params.gprime();
    let j = params.j;
    if gp <= 2.0 * j {
        return 0.0;
    }
    let mu = (gp / (2.0 * j) - 1.0).sqrt();
    1.5 * 2.0 * mu * j / params.n as f64
}

/// Classify an energy into (band, regime). Energies outside every band
/// envelope are rejected.
pub fn classify(params: &ModelParams, eps: f64) -> Result<(BandId, Regime)> {
    let gp = params.gprime();
    let top = 2.0 * gp + params.j;
    if eps.abs() > top * (1.0 + 1e-9) {
        return Err(Error::Domain(format!("eps = {eps} outside the spectrum envelope")));
    }
    let band = band_of_energy(params, eps);
    match band {
        BandId::UpperLower | BandId::LowerUpper => Ok((band, Regime::Middle)),
        BandId::UpperUpper | BandId::LowerLower => {
            let eps_c = if band == BandId::UpperUpper { params.eps_c1() } else { params.eps_c4() };
            let w = critical_window(params);
            // localized side sits between the critical level and ±sqrt2 g'
            let regime = if (eps - eps_c).abs() < w {
                Regime::Critical
            } else if band == BandId::UpperUpper {
                if eps < eps_c {
                    Regime::Localized
                } else {
                    Regime::Delocalized
                }
            } else if eps > eps_c {
                Regime::Localized
            } else {
                Regime::Delocalized
            };
            Ok((band, regime))
        }
    }
}

/// Quarter-phase point `y_r`, the solution of `eps = W_ii(y_r)`:
/// `y_r = (|eps|/g') sqrt(1 - (eps/2g')^2)`. Defined for |eps| <= 2g'.
pub fn quarter_phase_point(params: &ModelParams, eps: f64) -> Option<f64> {
    let gp = params.gprime();
    let r = eps.abs() / gp;
    if r > 2.0 {
        return None;
    }
    Some((r * (1.0 - (eps / (2.0 * gp)).powi(2)).max(0.0).sqrt()).min(1.0))
}

/// Closed-form turning point |z| for the outer bands (1 and 4), from the
/// quadratic in `u = sqrt(1 - x^2)` obtained by squaring `V^edge(z) = eps`:
/// `u = [(g'^2 + s eps J) - g' sqrt(g'^2 + 2J^2 + 2 s eps J)] / J^2`,
/// s = -1 on the lower edge and +1 on the upper.
pub fn turning_point_closed(params: &ModelParams, edge: Edge, eps: f64) -> Result<f64> {
    let gp = params.gprime();
    let j = params.j;
    if j == 0.0 {
        return Err(Error::Domain("closed form needs J > 0".into()));
    }
    let s = match edge {
        Edge::Lower => -1.0,
        Edge::Upper => 1.0,
    };
    let disc = gp * gp + 2.0 * j * j + 2.0 * s * eps * j;
    if disc < 0.0 {
        return Err(Error::Domain(format!("no real turning point for eps = {eps}")));
    }
    let u = ((gp * gp + s * eps * j) - gp * disc.sqrt()) / (j * j);
    if !(-1e-12..=1.0 + 1e-12).contains(&u) {
        return Err(Error::Domain(format!("turning point out of range (u = {u})")));
    }
    Ok((1.0 - u.clamp(0.0, 1.0).powi(2)).max(0.0).sqrt())
}

/// Root of `V_band^edge(x) = eps` on a monotone sub-interval by bisection.
pub fn turning_point_bisect(
    params: &ModelParams,
    band: BandId,
    edge: Edge,
    eps: f64,
    mut lo: f64,
    mut hi: f64,
) -> Result<f64> {
    let f = |x: f64| potential(params, band, edge, x).unwrap() - eps;
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::Domain(format!(
            "no sign change for {band:?}/{edge:?} at eps = {eps} on [{lo}, {hi}]"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 || (hi - lo) < 1e-15 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Orbit geometry of one band at one energy.
#[derive(Debug, Clone, Copy)]
pub struct BandGeometry {
    pub band: BandId,
    pub eps: f64,
    pub regime: Regime,
    /// Root of `V^l(z_l) = eps` (phi = 0 edge), when it exists.
    /// Signed for the middle bands, |z| for bands 1 and 4.
    pub z_l: Option<f64>,
    /// Root of `V^h(z_h) = eps` (2 phi = pi edge), when it exists.
    pub z_h: Option<f64>,
    /// Quarter-phase point of Eq.-(E3) type, when |eps| <= 2g'.
    pub y_r: Option<f64>,
}

/// Turning points, quarter-phase point and regime for (band, eps).
///
/// Bands 1 and 4 report unsigned positions in [0, 1] (their geometry is
/// x -> -x symmetric); the middle bands report signed positions with
/// band 2 living on the `W > 0` side for eps > 0 and band 3 mirrored.
pub fn turning_points(params: &ModelParams, band: BandId, eps: f64) -> Result<BandGeometry> {
    let gp = params.gprime();
    let j = params.j;
    let sqrt2 = std::f64::consts::SQRT_2;
    let (checked_band, regime) = classify(params, eps)?;
    let y_r = quarter_phase_point(params, eps);

    match band {
        BandId::LowerLower | BandId::UpperUpper => {
            if checked_band != band {
                return Err(Error::Domain(format!(
                    "eps = {eps} lies outside the {band:?} envelope"
                )));
            }
            // mirror band 1 onto band 4
            let e4 = if band == BandId::UpperUpper { -eps } else { eps };
            // outer turning point: V_4^l = e4, monotone on [0, 1]
            let z_l = if e4 <= -sqrt2 * gp {
                Some(turning_point_bisect(params, BandId::LowerLower, Edge::Lower, e4, 0.0, 1.0)?)
            } else {
                None
            };
            // inner turning point exists above the critical level
            let z_h = if e4 > params.eps_c4() && e4 <= -sqrt2 * gp {
                Some(turning_point_bisect(params, BandId::LowerLower, Edge::Upper, e4, 0.0, 1.0)?)
            } else {
                None
            };
            let (z_l, z_h) = if band == BandId::UpperUpper {
                // undo the mirror: band-1 labels keep their own edges,
                // l-root = mirrored h-root and vice versa
                (z_h, z_l)
            } else {
                (z_l, z_h)
            };
            Ok(BandGeometry { band, eps, regime, z_l, z_h, y_r })
        }
        BandId::UpperLower | BandId::LowerUpper => {
            if eps.abs() > sqrt2 * gp {
                return Err(Error::Domain(format!(
                    "eps = {eps} lies outside the middle-band envelope"
                )));
            }
            // work in band-2 coordinates at |eps|, mirror afterwards
            let e = eps.abs();
            let margin = 1e-13;
            // V_2^l = e: root on (-1, 1), crossing zero at e = -J (so for
            // e >= 0 it is always on the positive side)
            let z_l = turning_point_bisect(
                params,
                BandId::UpperLower,
                Edge::Lower,
                e,
                -1.0 + margin,
                1.0 - margin,
            )?;
            // V_2^h = e: crosses zero at e = +J
            let z_h = if e >= j {
                turning_point_bisect(params, BandId::UpperLower, Edge::Upper, e, 0.0, 1.0 - margin)?
            } else {
                // mirror relation V_2^h(-x) = -V_2^l(x)
                -turning_point_bisect(
                    params,
                    BandId::UpperLower,
                    Edge::Lower,
                    -e,
                    -1.0 + margin,
                    1.0 - margin,
                )?
            };
            // band 3 at eps equals band 2 at -eps reflected; and band 2 at
            // negative eps equals band 3 at |eps| reflected
            let reflect = (band == BandId::UpperLower) != (eps >= 0.0);
            let (z_l, z_h) = if reflect { (-z_l, -z_h) } else { (z_l, z_h) };
            Ok(BandGeometry { band, eps, regime: Regime::Middle, z_l: Some(z_l), z_h: Some(z_h), y_r })
        }
    }
}

/// Local maximum position of `V_1^l` for 1/2 < J/g' < 1/sqrt(2):
/// `x_m = sqrt((4 rho^2 - 1) / (4 rho^4))`, rho = J/g'.
pub fn barrier_position(j_over_gprime: f64) -> Result<f64> {
    let rho = j_over_gprime;
    if !(0.5..=std::f64::consts::FRAC_1_SQRT_2).contains(&rho) {
        return Err(Error::Domain(format!(
            "x_m defined for 1/2 <= J/g' <= 1/sqrt2, got {rho}"
        )));
    }
    let r2 = rho * rho;
    Ok(((4.0 * r2 - 1.0) / (4.0 * r2 * r2)).sqrt().min(1.0))
}

/// Classical localization boundary: the critical `g/(J sqrt(2N))` above
/// which an orbit started at x_0 on the upper-upper lower edge stays
/// trapped: `[(1 - sqrt(1 - x0^2)) / (2 x0^2)]^{-1/2}`.
pub fn phase_boundary(x0: f64) -> Result<f64> {
    if !(x0 > 0.0 && x0 <= 1.0) {
        return Err(Error::Domain(format!("x0 = {x0} outside (0, 1]")));
    }
    // stable form: (2 x0^2) / (1 - sqrt(1-x0^2)) = 2 (1 + sqrt(1-x0^2))
    Ok((2.0 * (1.0 + (1.0 - x0 * x0).sqrt())).sqrt())
}

/// Classical band-1 orbit through `x0` at energy `eps = V_1^l(x0)`:
/// period `T = ∮ dx / v` and mean imbalance `<x> = (1/T) ∮ x dx / v`,
/// with `v = 4 B0 sin(2 phi)`.
pub fn classical_orbit(params: &ModelParams, x0: f64) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&x0.abs()) || x0.abs() >= 1.0 {
        return Err(Error::Domain(format!("x0 = {x0} outside (-1, 1)")));
    }
    let band = BandId::UpperUpper;
    let eps = potential(params, band, Edge::Lower, x0)?;
    let rho = params.j_over_gprime();
    let gp = params.gprime();
    let sqrt2 = std::f64::consts::SQRT_2;

    // orbit boundaries: the allowed interval around |x0| where
    // V_1^l <= eps <= V_1^h
    let x0a = x0.abs();
    // barrier top of V_1^l
    let (xm, vmax) = if rho > 0.5 && rho < std::f64::consts::FRAC_1_SQRT_2 {
        let xm = barrier_position(rho)?;
        (xm, potential(params, band, Edge::Lower, xm)?)
    } else if rho <= 0.5 {
        (0.0, potential(params, band, Edge::Lower, 0.0)?)
    } else {
        // no interior barrier at all
        (0.0, f64::NEG_INFINITY)
    };
    if (eps - vmax).abs() < 1e-14 * gp.max(1.0) && x0a > 0.0 {
        return Err(Error::Domain("x0 sits at a potential extremum (degenerate orbit)".into()));
    }

    let localized = eps < vmax && x0a > xm;
    let (lo, hi) = if localized {
        // inner boundary from V_1^l on its decreasing branch [xm, 1],
        // outer boundary from the ceiling V_1^h = eps
        let inner = turning_point_bisect(params, band, Edge::Lower, eps, xm, 1.0 - 1e-13)?;
        let outer = if eps >= sqrt2 * gp {
            turning_point_bisect(params, band, Edge::Upper, eps, inner.max(1e-12), 1.0 - 1e-13)?
        } else {
            return Err(Error::Domain("energy below the band floor".into()));
        };
        (inner, outer)
    } else {
        // symmetric orbit, bounded by whichever edge the energy meets first
        let floor = if rho > 0.5 {
            let upper_end = if rho < std::f64::consts::FRAC_1_SQRT_2 { xm } else { 1.0 - 1e-13 };
            turning_point_bisect(params, band, Edge::Lower, eps, 0.0, upper_end).ok()
        } else {
            None
        };
        let ceiling = if eps >= sqrt2 * gp {
            turning_point_bisect(params, band, Edge::Upper, eps, 0.0, 1.0 - 1e-13).ok()
        } else {
            None
        };
        let outer = match (floor, ceiling) {
            (Some(a), Some(b)) => a.min(b),
            (Some(a), None) => a,
            (None, Some(b)) => b,
            (None, None) => {
                return Err(Error::Domain("no turning point encloses the orbit".into()));
            }
        };
        (-outer, outer)
    };

    let speed = |x: f64| -> f64 {
        let r = (eps - w_diag(params, band, x)) / (-2.0 * b0(params, x));
        let s = (1.0 - r * r).max(0.0).sqrt();
        4.0 * b0(params, x) * s
    };
    let tol = 1e-11;
    let half_t = integrate_sqrt_endpoints(&|x: f64| 1.0 / speed(x), lo, hi, Endpoints::BOTH, tol);
    let half_xt = integrate_sqrt_endpoints(&|x: f64| x / speed(x), lo, hi, Endpoints::BOTH, tol);
    let t = 2.0 * half_t;
    // localized orbits live on the sign(x0) side; delocalized ones cover
    // a symmetric interval and average to zero up to quadrature error
    let mean_x = if localized { (half_xt / half_t) * x0.signum() } else { half_xt / half_t };
    Ok((t, mean_x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, SQRT_2};

    fn params_ratio(n: u32, j_over_gprime: f64) -> ModelParams {
        ModelParams::from_j_over_gprime(n, j_over_gprime, 1.0).unwrap()
    }

    #[test]
    fn potential_anchor_values() {
        let p = params_ratio(400, 0.25);
        let gp = p.gprime();
        let v0 = potential(&p, BandId::UpperUpper, Edge::Lower, 0.0).unwrap();
        assert_abs_diff_eq!(v0, 2.0 * gp - p.j, epsilon = 1e-12);
        for x in [-1.0, 1.0] {
            let v = potential(&p, BandId::UpperUpper, Edge::Lower, x).unwrap();
            assert_abs_diff_eq!(v, SQRT_2 * gp, epsilon = 1e-12);
        }
        // V_4^h is the mirror of V_1^l about eps = 0
        for x in [-0.9, -0.3, 0.0, 0.4, 0.8] {
            let v1l = potential(&p, BandId::UpperUpper, Edge::Lower, -x).unwrap();
            let v4h = potential(&p, BandId::LowerLower, Edge::Upper, x).unwrap();
            assert_abs_diff_eq!(v4h, -v1l, epsilon = 1e-12);
        }
        assert!(potential(&p, BandId::UpperUpper, Edge::Lower, 1.5).is_err());
    }

    #[test]
    fn momentum_edges() {
        let p = params_ratio(100, 0.25);
        let band = BandId::LowerLower;
        let x = 0.37;
        let vl = potential(&p, band, Edge::Lower, x).unwrap();
        let vh = potential(&p, band, Edge::Upper, x).unwrap();
        assert_abs_diff_eq!(momentum_allowed(&p, band, vl, x).unwrap(), 0.0, epsilon = 1e-8);
        assert_abs_diff_eq!(momentum_allowed(&p, band, vh, x).unwrap(), FRAC_PI_2, epsilon = 1e-8);
        // zero numerator: band 4 at eps = -2g' and x = 0 gives phi = pi/4
        let eps = -2.0 * p.gprime();
        assert_abs_diff_eq!(momentum_allowed(&p, band, eps, 0.0).unwrap(), FRAC_PI_4, epsilon = 1e-12);
        // tilde momentum vanishes on the upper edge, pi/4 at eps = W
        assert_abs_diff_eq!(momentum_tilde(&p, band, vh, x).unwrap(), 0.0, epsilon = 1e-8);
        let w = w_diag(&p, band, x);
        assert_abs_diff_eq!(momentum_tilde(&p, band, w, x).unwrap(), FRAC_PI_4, epsilon = 1e-12);
        assert!(momentum_allowed(&p, band, vh + 1.0, x).is_err());
    }

    #[test]
    fn forbidden_momentum_inverse_cosh() {
        let p = params_ratio(100, 0.25);
        let band = BandId::LowerLower;
        let x = 0.2;
        // pick eps so that (eps - W)/(-2 B0) = cosh(2)
        let target = 2.0f64.cosh();
        let eps = w_diag(&p, band, x) - 2.0 * b0(&p, x) * target;
        assert_abs_diff_eq!(momentum_forbidden(&p, band, eps, x).unwrap(), 1.0, epsilon = 1e-12);
        // boundary continuity with the allowed branch
        let vl = potential(&p, band, Edge::Lower, x).unwrap();
        assert_abs_diff_eq!(momentum_forbidden(&p, band, vl, x).unwrap(), 0.0, epsilon = 1e-7);
        assert!(momentum_forbidden(&p, band, w_diag(&p, band, x), x).is_err());
    }

    #[test]
    fn band4_barrier_is_above_ceiling_type() {
        // localized band-4 energies: the barrier around x = 0 has
        // (eps - W)/(-2B0) < -1 and a positive decay rate
        let p = params_ratio(100, 0.25);
        let eps = 0.5 * (p.eps_c4() + (-SQRT_2 * p.gprime()));
        let rate = momentum_forbidden(&p, BandId::LowerLower, eps, 0.0).unwrap();
        assert!(rate > 0.0);
    }

    #[test]
    fn closed_form_matches_bisection() {
        let p = params_ratio(400, 0.25);
        let gp = p.gprime();
        // delocalized band-4 energy midway
        let eps = 0.5 * ((-2.0 * gp - p.j) + p.eps_c4());
        let closed = turning_point_closed(&p, Edge::Lower, eps).unwrap();
        let bisect =
            turning_point_bisect(&p, BandId::LowerLower, Edge::Lower, eps, 0.0, 1.0).unwrap();
        assert_abs_diff_eq!(closed, bisect, epsilon = 1e-10);
        // localized window, both edges
        let eps = p.eps_c4() + 0.6 * (-SQRT_2 * gp - p.eps_c4());
        for (edge, band_edge) in [(Edge::Lower, Edge::Lower), (Edge::Upper, Edge::Upper)] {
            let closed = turning_point_closed(&p, edge, eps).unwrap();
            let bisect =
                turning_point_bisect(&p, BandId::LowerLower, band_edge, eps, 0.0, 1.0).unwrap();
            assert_abs_diff_eq!(closed, bisect, epsilon = 1e-10);
        }
    }

    #[test]
    fn geometry_anchors() {
        let p = params_ratio(400, 0.25);
        let gp = p.gprime();
        // band bottom: single point at x = 0
        let g = turning_points(&p, BandId::LowerLower, -2.0 * gp - p.j + 1e-12).unwrap();
        assert!(g.z_l.unwrap() < 1e-4);
        assert!(g.z_h.is_none());
        assert_eq!(g.regime, Regime::Delocalized);
        // quarter-phase point hits 1 at the band corner
        let y = quarter_phase_point(&p, -SQRT_2 * gp).unwrap();
        assert_abs_diff_eq!(y, 1.0, epsilon = 1e-12);
        // localized geometry: 0 <= z_h <= y_r <= z_l <= 1
        let eps = p.eps_c4() + 0.5 * (-SQRT_2 * gp - p.eps_c4());
        let g = turning_points(&p, BandId::LowerLower, eps).unwrap();
        let (zl, zh, yr) = (g.z_l.unwrap(), g.z_h.unwrap(), g.y_r.unwrap());
        assert!(0.0 <= zh && zh <= yr && yr <= zl && zl <= 1.0, "zh={zh} yr={yr} zl={zl}");
        assert_eq!(g.regime, Regime::Localized);
        // potential values at the turning points close the loop
        let vl = potential(&p, BandId::LowerLower, Edge::Lower, zl).unwrap();
        let vh = potential(&p, BandId::LowerLower, Edge::Upper, zh).unwrap();
        assert_abs_diff_eq!(vl, eps, epsilon = 1e-10);
        assert_abs_diff_eq!(vh, eps, epsilon = 1e-10);
    }

    #[test]
    fn band1_mirror_geometry() {
        let p = params_ratio(400, 0.25);
        let gp = p.gprime();
        let eps = p.eps_c1() + 0.4 * (2.0 * gp + p.j - p.eps_c1());
        let g1 = turning_points(&p, BandId::UpperUpper, eps).unwrap();
        let g4 = turning_points(&p, BandId::LowerLower, -eps).unwrap();
        // band-1 h-root mirrors band-4 l-root
        assert_abs_diff_eq!(g1.z_h.unwrap(), g4.z_l.unwrap(), epsilon = 1e-12);
        assert_eq!(g1.regime, Regime::Delocalized);
    }

    #[test]
    fn middle_band_geometry_signed() {
        let p = params_ratio(400, 0.25);
        let gp = p.gprime();
        // first middle region: J < eps < sqrt2 g': both roots positive
        let eps = 0.5 * (p.j + SQRT_2 * gp);
        let g = turning_points(&p, BandId::UpperLower, eps).unwrap();
        let (zl, zh) = (g.z_l.unwrap(), g.z_h.unwrap());
        assert!(zh > 0.0 && zh < zl && zl < 1.0, "zh={zh} zl={zl}");
        let yr = g.y_r.unwrap();
        assert!(zh < yr && yr < zl);
        // overlap region |eps| < J: inner root goes negative
        let eps = 0.5 * p.j;
        let g = turning_points(&p, BandId::UpperLower, eps).unwrap();
        assert!(g.z_h.unwrap() < 0.0 && g.z_l.unwrap() > 0.0);
        // band 3 mirrors band 2
        let g3 = turning_points(&p, BandId::LowerUpper, eps).unwrap();
        assert_abs_diff_eq!(g3.z_l.unwrap(), -g.z_l.unwrap(), epsilon = 1e-12);
        assert_abs_diff_eq!(g3.z_h.unwrap(), -g.z_h.unwrap(), epsilon = 1e-12);
    }

    #[test]
    fn barrier_position_values() {
        assert_abs_diff_eq!(barrier_position(std::f64::consts::FRAC_1_SQRT_2).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(barrier_position(0.6).unwrap(), 0.8487654320987654f64.sqrt(), epsilon = 1e-12);
        assert!(barrier_position(0.3).is_err());
    }

    #[test]
    fn phase_boundary_values() {
        // x0 -> 1 gives sqrt(2), i.e. g_c/J = 2 sqrt(N)
        assert_abs_diff_eq!(phase_boundary(1.0).unwrap(), SQRT_2, epsilon = 1e-14);
        let n = 400.0f64;
        assert_abs_diff_eq!(
            phase_boundary(1.0).unwrap() * (2.0 * n).sqrt(),
            2.0 * n.sqrt(),
            epsilon = 1e-10
        );
        // x0 -> 0 limit is 2 (J/g' -> 1/2)
        assert_abs_diff_eq!(phase_boundary(1e-6).unwrap(), 2.0, epsilon = 1e-6);
        assert!(phase_boundary(0.0).is_err());
    }

    #[test]
    fn b1_matrix_at_origin() {
        let p = params_ratio(100, 0.25);
        let b1 = b1_matrix(&p, 0.0);
        for i in 0..4 {
            assert_eq!(b1[i][i], 0.0);
            for j in 0..4 {
                assert_abs_diff_eq!(b1[i][j], b1[j][i], epsilon = 1e-15);
                if b1[i][j] != 0.0 {
                    assert_abs_diff_eq!(b1[i][j], p.j / 4.0, epsilon = 1e-15);
                }
            }
        }
    }

    #[test]
    fn orbits_delocalized_and_localized() {
        // strong coupling, J/g' = 1/4: x0 above the (degenerate) barrier
        let p = params_ratio(100, 0.25);
        let (t, mean) = classical_orbit(&p, 0.5).unwrap();
        assert!(t > 0.0);
        assert!(mean > 0.3, "localized mean imbalance {mean}");
        let (_, mean_neg) = classical_orbit(&p, -0.5).unwrap();
        assert_abs_diff_eq!(mean_neg, -mean, epsilon = 1e-6);
        // weak hopping barrier regime: delocalized orbit averages to zero
        let p = params_ratio(100, 0.8);
        let (_, mean) = classical_orbit(&p, 0.5).unwrap();
        assert!(mean.abs() < 1e-6, "delocalized mean {mean}");
    }
}
