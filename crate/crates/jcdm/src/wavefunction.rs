//! Piecewise WKB wavefunction profiles for the outer polariton bands.
//!
//! Amplitudes follow the continuity-equation normalization
//! `alpha ~ |v|^{-1/2}`; phases accumulate `(1/h) int phi dx`; the decay
//! into forbidden regions carries the standard 1/2 connection factor.
//! Amplitudes are clipped inside a boundary layer of width
//! `~ h^{2/3} (2J / (sqrt(1-z^2) |V'|))^{1/3}` around each turning point,
//! where the Airy region would otherwise diverge.

use crate::bands::{
    self, momentum_allowed, momentum_forbidden, turning_points, BandId, Edge, Regime,
};
use crate::params::ModelParams;
use crate::quad::{adaptive, integrate_sqrt_endpoints, Endpoints};
use crate::{Error, Result};

use std::f64::consts::FRAC_PI_4;

/// Airy boundary-layer half-width around a turning point.
fn layer_width(params: &ModelParams, band: BandId, z: f64, edge: Edge) -> f64 {
    let h = params.h();
    let dv = {
        let d = 1e-6;
        let a = bands::potential(params, band, edge, (z - d).max(-1.0)).unwrap_or(0.0);
        let b = bands::potential(params, band, edge, (z + d).min(1.0)).unwrap_or(0.0);
        ((b - a) / (2.0 * d)).abs().max(1e-6)
    };
    let scale = (2.0 * params.j / ((1.0 - z * z).max(1e-6).sqrt() * dv)).cbrt();
    h.powf(2.0 / 3.0) * scale
}

/// Evaluate the band-4 (or mirrored band-1) WKB profile on a grid of x
/// values. Delocalized states carry their full nodal structure; localized
/// states are returned as the slowly varying probability envelope of the
/// even cat combination. The profile is normalized to unit sum of squares
/// on the grid.
pub fn wkb_wavefunction(
    params: &ModelParams,
    band: BandId,
    eps: f64,
    xs: &[f64],
) -> Result<Vec<f64>> {
    let e4 = match band {
        BandId::LowerLower => eps,
        // band 1 is the eps -> -eps mirror of band 4 (same |profile|)
        BandId::UpperUpper => -eps,
        _ => {
            return Err(Error::Domain(
                "wavefunction profiles are built for the outer bands".into(),
            ));
        }
    };
    let geom = turning_points(params, BandId::LowerLower, e4)?;
    let mut psi = match geom.regime {
        Regime::Delocalized => delocalized_profile(params, e4, &geom, xs)?,
        Regime::Localized => localized_envelope(params, e4, &geom, xs)?,
        Regime::Critical => {
            return Err(Error::Domain(
                "no WKB profile inside the critical boundary layer".into(),
            ));
        }
        Regime::Middle => unreachable!("outer-band geometry cannot be middle"),
    };
    let norm: f64 = psi.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::Numerical("profile vanished on the given grid".into()));
    }
    for v in &mut psi {
        *v /= norm;
    }
    Ok(psi)
}

fn speed_allowed(params: &ModelParams, eps: f64, x: f64) -> f64 {
    let r = (eps - bands::w_diag(params, BandId::LowerLower, x)) / (-2.0 * bands::b0(params, x));
    4.0 * bands::b0(params, x) * (1.0 - r * r).max(0.0).sqrt()
}

fn speed_forbidden(params: &ModelParams, eps: f64, x: f64) -> f64 {
    let r = (eps - bands::w_diag(params, BandId::LowerLower, x)) / (-2.0 * bands::b0(params, x));
    4.0 * bands::b0(params, x) * (r * r - 1.0).max(0.0).sqrt()
}

fn delocalized_profile(
    params: &ModelParams,
    eps: f64,
    geom: &bands::BandGeometry,
    xs: &[f64],
) -> Result<Vec<f64>> {
    let band = BandId::LowerLower;
    let h = params.h();
    let zl = geom.z_l.ok_or_else(|| Error::Numerical("missing turning point".into()))?;
    let w = layer_width(params, band, zl, Edge::Lower).min(0.45 * zl.max(1e-3));
    let phi = |x: f64| momentum_allowed(params, band, eps, x).unwrap_or(0.0);
    let phi_hat = |x: f64| momentum_forbidden(params, band, eps, x).unwrap_or(0.0);

    // total phase across the well fixes the sign of the right tail
    let theta_tot =
        2.0 * integrate_sqrt_endpoints(&phi, 0.0, zl, Endpoints::RIGHT, 1e-10) / h;
    let amp_cap = 1.0 / speed_allowed(params, eps, zl - w).max(1e-12).sqrt();
    let tail_sign = (theta_tot - FRAC_PI_4).cos().signum();

    let mut out = Vec::with_capacity(xs.len());
    for &x in xs {
        let ax = x.abs();
        let v = if ax < zl {
            // interior: alpha cos(theta(x) - pi/4), phase accumulated
            // from the left turning point
            let theta = if x < 0.0 {
                integrate_sqrt_endpoints(&phi, -zl, x, Endpoints::LEFT, 1e-9) / h
            } else {
                theta_tot * 0.5 + adaptive(&phi, 0.0, x, 1e-9) / h
            };
            let amp = if ax > zl - w {
                amp_cap
            } else {
                1.0 / speed_allowed(params, eps, x).max(1e-12).sqrt()
            };
            amp * (theta - FRAC_PI_4).cos()
        } else {
            // decaying tails with the 1/2 connection factor
            let q = integrate_sqrt_endpoints(&phi_hat, zl, ax, Endpoints::LEFT, 1e-9) / h;
            let amp = if ax < zl + w {
                amp_cap
            } else {
                1.0 / speed_forbidden(params, eps, ax).max(1e-12).sqrt()
            };
            let sign = if x > 0.0 { tail_sign } else { 1.0 };
            sign * 0.5 * amp * (-q).exp()
        };
        out.push(v);
    }
    Ok(out)
}

fn localized_envelope(
    params: &ModelParams,
    eps: f64,
    geom: &bands::BandGeometry,
    xs: &[f64],
) -> Result<Vec<f64>> {
    let band = BandId::LowerLower;
    let h = params.h();
    let zl = geom.z_l.ok_or_else(|| Error::Numerical("missing outer turning point".into()))?;
    let zh = geom.z_h.ok_or_else(|| Error::Numerical("missing inner turning point".into()))?;
    let w_out = layer_width(params, band, zl, Edge::Lower).min(0.4 * (zl - zh));
    let w_in = layer_width(params, band, zh, Edge::Upper).min(0.4 * (zl - zh));
    let speed_in_well = |x: f64| speed_allowed(params, eps, x);
    let phi_hat = |x: f64| momentum_forbidden(params, band, eps, x).unwrap_or(0.0);
    let cap_out = 1.0 / speed_in_well(zl - w_out).max(1e-12).sqrt();
    let cap_in = 1.0 / speed_in_well(zh + w_in).max(1e-12).sqrt();

    let mut out = Vec::with_capacity(xs.len());
    for &x in xs {
        let ax = x.abs();
        let v = if ax >= zh && ax <= zl {
            // envelope of the oscillatory region
            let amp = if ax > zl - w_out {
                cap_out
            } else if ax < zh + w_in {
                cap_in
            } else {
                1.0 / speed_in_well(ax).max(1e-12).sqrt()
            };
            amp / std::f64::consts::SQRT_2
        } else if ax > zl {
            let q = integrate_sqrt_endpoints(&phi_hat, zl, ax, Endpoints::LEFT, 1e-9) / h;
            0.5 * cap_out / std::f64::consts::SQRT_2 * (-q).exp()
        } else {
            // under the barrier: decay from the inner edge toward x = 0
            let q =
                integrate_sqrt_endpoints(&phi_hat, ax, zh, Endpoints::RIGHT, 1e-9) / h;
            0.5 * cap_in / std::f64::consts::SQRT_2 * (-q).exp()
        };
        out.push(v);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::diagonalize;
    use crate::hamiltonian::build;

    fn grid(n: u32) -> Vec<f64> {
        let n = n as i64;
        (0..=n).map(|k| (2 * k - n) as f64 / n as f64).collect()
    }

    #[test]
    fn node_count_matches_quantum_number() {
        let params = ModelParams::from_j_over_gprime(100, 0.25, 1.0).unwrap();
        let window = (
            -2.0 * params.gprime() - params.j + 1e-3,
            params.eps_c4() - 1e-2,
        );
        let levels =
            crate::wkb::solve_levels(&params, BandId::LowerLower, Regime::Delocalized, window, 800)
                .unwrap();
        let xs = grid(600); // fine grid so sign changes are resolved
        for &(n, e) in levels.iter().take(6) {
            let psi = wkb_wavefunction(&params, BandId::LowerLower, e, &xs).unwrap();
            let nodes = psi.windows(2).filter(|w| w[0] * w[1] < 0.0).count();
            assert_eq!(nodes as i64, n, "state n = {n} at eps = {e}");
        }
    }

    #[test]
    fn overlap_with_exact_midband_states() {
        let params = ModelParams::from_j_over_gprime(100, 0.25, 1.0).unwrap();
        let (basis, h) = build(&params).unwrap();
        let sol = diagonalize(&h, &basis, &params).unwrap();
        let xs = grid(params.n);
        let lo = -2.0 * params.gprime() - params.j;
        let hi = params.eps_c4();
        let mut checked = 0;
        for k in 0..sol.len() {
            let frac = (sol.eps[k] - lo) / (hi - lo);
            if !(0.3..0.7).contains(&frac) {
                continue;
            }
            // exact band-4 projection on the Z lattice
            let exact: Vec<f64> =
                sol.band_amplitudes(k, BandId::LowerLower).iter().map(|(_, c)| *c).collect();
            let norm: f64 = exact.iter().map(|c| c * c).sum::<f64>().sqrt();
            if norm < 0.95 {
                continue; // not a band-4 dominated state
            }
            let psi = wkb_wavefunction(&params, BandId::LowerLower, sol.eps[k], &xs).unwrap();
            let overlap: f64 = psi
                .iter()
                .zip(exact.iter())
                .map(|(a, b)| a * b / norm)
                .sum::<f64>()
                .abs();
            assert!(
                overlap > 0.98,
                "state {k} (eps = {}): overlap {overlap}",
                sol.eps[k]
            );
            checked += 1;
        }
        assert!(checked >= 5, "only {checked} mid-band states checked");
    }

    #[test]
    fn localized_probability_concentrates_between_turning_points() {
        let params = ModelParams::from_j_over_gprime(100, 0.25, 1.0).unwrap();
        let gp = params.gprime();
        let eps = params.eps_c4() + 0.5 * (-std::f64::consts::SQRT_2 * gp - params.eps_c4());
        let geom = turning_points(&params, BandId::LowerLower, eps).unwrap();
        let (zl, zh) = (geom.z_l.unwrap(), geom.z_h.unwrap());
        let xs = grid(400);
        let psi = wkb_wavefunction(&params, BandId::LowerLower, eps, &xs).unwrap();
        let in_well: f64 = xs
            .iter()
            .zip(psi.iter())
            .filter(|(x, _)| x.abs() >= zh && x.abs() <= zl)
            .map(|(_, p)| p * p)
            .sum();
        assert!(in_well > 0.9, "well probability {in_well}");
        // interior suppression at the barrier center
        let center = xs
            .iter()
            .zip(psi.iter())
            .filter(|(x, _)| x.abs() < 0.5 * zh)
            .map(|(_, p)| p * p)
            .fold(0.0f64, f64::max);
        let dq = crate::wkb::action_q(&params, BandId::LowerLower, eps).unwrap();
        let bound = (-dq / params.h()).exp();
        assert!(center < bound.max(1e-12), "center probability {center} vs e^-dQ/h {bound}");
    }
}
