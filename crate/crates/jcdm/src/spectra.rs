//! Quantum observables derived from the exact spectrum: spectral maps,
//! density of states, tunneling splittings of parity partners, and the
//! per-eigenstate imbalance map.

use serde::{Deserialize, Serialize};

use crate::bands::{self, BandId, Edge};
use crate::eigen::{EigenSolution, Parity};
use crate::{Error, Result};

/// One (x, eps, weight) sample of the traced spectral map.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SpectralMapRow {
    pub x: f64,
    pub eps: f64,
    pub weight: f64,
}

/// Spin-traced probability over x = Z/N for every eigenstate.
pub fn spectral_map(sol: &EigenSolution) -> Vec<SpectralMapRow> {
    let mut rows = Vec::with_capacity(sol.len() * (sol.params.n as usize + 1));
    for k in 0..sol.len() {
        let eps = sol.eps[k];
        for (x, w) in sol.profile(k) {
            rows.push(SpectralMapRow { x, eps, weight: w });
        }
    }
    rows
}

#[derive(Debug, Clone)]
pub struct DosHistogram {
    /// nbins + 1 edges in eps.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

impl DosHistogram {
    pub fn centers(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }
}

/// Histogram of normalized eigenvalues over [min eps, max eps].
pub fn dos(eps: &[f64], nbins: usize) -> Result<DosHistogram> {
    if nbins < 10 {
        return Err(Error::InvalidParams(format!("need at least 10 bins, got {nbins}")));
    }
    if eps.is_empty() {
        return Err(Error::InvalidParams("empty spectrum".into()));
    }
    let lo = eps.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = eps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = (hi - lo).max(1e-300);
    let edges: Vec<f64> = (0..=nbins).map(|i| lo + span * i as f64 / nbins as f64).collect();
    let mut counts = vec![0usize; nbins];
    for &e in eps {
        let mut b = ((e - lo) / span * nbins as f64) as usize;
        if b >= nbins {
            b = nbins - 1;
        }
        counts[b] += 1;
    }
    Ok(DosHistogram { edges, counts })
}

/// One tunneling pair: adjacent opposite-parity levels.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SplittingPair {
    pub pair_index: usize,
    pub mean_eps: f64,
    pub delta_eps: f64,
}

#[derive(Debug, Clone)]
pub struct SplittingReport {
    pub pairs: Vec<SplittingPair>,
    /// Indices (into the window's level list) left unpaired.
    pub unpaired: Vec<usize>,
}

/// Pair up consecutive opposite-parity levels inside an energy window.
/// A pair is accepted when the gap is below `0.1 x` the window's mean
/// level spacing; leftovers are reported, not silently dropped.
pub fn splittings(sol: &EigenSolution, window: (f64, f64)) -> Result<SplittingReport> {
    let parity = sol
        .parity
        .as_ref()
        .ok_or_else(|| Error::InvalidParams("splittings need a parity-resolved solve".into()))?;
    let (lo, hi) = window;
    let levels: Vec<(f64, Parity)> = sol
        .eps
        .iter()
        .zip(parity.iter())
        .filter(|(e, _)| **e >= lo && **e <= hi)
        .map(|(e, p)| (*e, *p))
        .collect();
    if levels.len() < 2 {
        return Ok(SplittingReport { pairs: Vec::new(), unpaired: (0..levels.len()).collect() });
    }
    let mean_spacing = (levels.last().unwrap().0 - levels[0].0) / (levels.len() - 1) as f64;
    let gap_cut = 0.1 * mean_spacing;

    let mut pairs = Vec::new();
    let mut unpaired = Vec::new();
    let mut i = 0;
    while i < levels.len() {
        if i + 1 < levels.len() {
            let (e0, p0) = levels[i];
            let (e1, p1) = levels[i + 1];
            if p0 != p1 && (e1 - e0) < gap_cut {
                pairs.push(SplittingPair {
                    pair_index: pairs.len(),
                    mean_eps: 0.5 * (e0 + e1),
                    delta_eps: e1 - e0,
                });
                i += 2;
                continue;
            }
        }
        unpaired.push(i);
        i += 1;
    }
    Ok(SplittingReport { pairs, unpaired })
}

/// Splittings from per-sector eigenvalue lists (cheap path: no vectors).
/// Each even level is matched to the nearest odd level; pairs are kept
/// when the gap is below a tenth of the local spacing.
pub fn splittings_from_sectors(
    even: &[f64],
    odd: &[f64],
    window: (f64, f64),
) -> Vec<SplittingPair> {
    let (lo, hi) = window;
    let evens: Vec<f64> = even.iter().copied().filter(|e| *e >= lo && *e <= hi).collect();
    if evens.is_empty() || odd.is_empty() {
        return Vec::new();
    }
    let spacing = if evens.len() > 1 {
        (evens.last().unwrap() - evens[0]) / (evens.len() - 1) as f64
    } else {
        hi - lo
    };
    let mut pairs = Vec::new();
    for &e in &evens {
        // nearest odd partner
        let idx = match odd.binary_search_by(|o| o.total_cmp(&e)) {
            Ok(i) => i,
            Err(i) => i,
        };
        let mut best = f64::INFINITY;
        let mut best_o = f64::NAN;
        for cand in [idx.wrapping_sub(1), idx] {
            if let Some(&o) = odd.get(cand) {
                if (o - e).abs() < best {
                    best = (o - e).abs();
                    best_o = o;
                }
            }
        }
        if best < 0.1 * spacing {
            pairs.push(SplittingPair {
                pair_index: pairs.len(),
                mean_eps: 0.5 * (e + best_o),
                delta_eps: best,
            });
        }
    }
    pairs
}

/// One point of the quantum imbalance map (upper-upper band window).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ImbalancePoint {
    pub state: usize,
    pub eps: f64,
    /// Equivalent classical initial position, eps = V_1^l(x0).
    pub x0: f64,
    /// Quantum expectation of x = Z/N.
    pub mean_x: f64,
}

#[derive(Debug, Clone)]
pub struct ImbalanceMap {
    pub points: Vec<ImbalancePoint>,
    /// States outside the band-1 window (reported, per contract).
    pub skipped: Vec<usize>,
}

/// For every eigenstate inside the upper-upper band window, solve
/// `eps_n = V_1^l(x0)` for the equivalent classical starting point and
/// attach the quantum `<x>`. Needs a parity-broken solve (eps_imb > 0)
/// so that localized cat pairs polarize.
pub fn imbalance_map(sol: &EigenSolution) -> Result<ImbalanceMap> {
    let params = &sol.params;
    if params.eps_imb <= 0.0 {
        return Err(Error::InvalidParams(
            "imbalance map needs eps_imb > 0 to polarize localized pairs".into(),
        ));
    }
    let gp = params.gprime();
    let rho = params.j_over_gprime();
    let band_floor = std::f64::consts::SQRT_2 * gp;
    // top of the V_1^l branch over [0, 1]
    let (xm, vtop) = if rho > 0.5 && rho < std::f64::consts::FRAC_1_SQRT_2 {
        let xm = bands::barrier_position(rho)?;
        (xm, bands::potential(params, BandId::UpperUpper, Edge::Lower, xm)?)
    } else if rho <= 0.5 {
        (0.0, bands::potential(params, BandId::UpperUpper, Edge::Lower, 0.0)?)
    } else {
        (1.0, band_floor)
    };

    let mut points = Vec::new();
    let mut skipped = Vec::new();
    for k in 0..sol.len() {
        let eps = sol.eps[k];
        if eps <= band_floor || eps >= vtop {
            if eps > band_floor {
                skipped.push(k);
            }
            continue;
        }
        // roots of V_1^l = eps: one on the outer decreasing branch
        // [xm, 1]; for 1/2 < rho < 1/sqrt2 possibly another on [0, xm]
        let outer = bands::turning_point_bisect(params, BandId::UpperUpper, Edge::Lower, eps, xm, 1.0 - 1e-12);
        let inner = if xm > 0.0 && eps > bands::potential(params, BandId::UpperUpper, Edge::Lower, 0.0)? {
            bands::turning_point_bisect(params, BandId::UpperUpper, Edge::Lower, eps, 0.0, xm).ok()
        } else {
            None
        };
        let x0 = match (outer.ok(), inner) {
            (Some(o), None) => o,
            (Some(o), Some(i)) => {
                // two admissible roots: take the one nearest the state's
                // probability peak
                let prof = sol.profile(k);
                let peak = prof
                    .iter()
                    .max_by(|a, b| a.1.total_cmp(&b.1))
                    .map(|(x, _)| x.abs())
                    .unwrap_or(o);
                if (peak - o).abs() <= (peak - i).abs() {
                    o
                } else {
                    i
                }
            }
            (None, Some(i)) => i,
            (None, None) => {
                skipped.push(k);
                continue;
            }
        };
        points.push(ImbalancePoint { state: k, eps, x0, mean_x: sol.mean_x(k) });
    }
    Ok(ImbalanceMap { points, skipped })
}
