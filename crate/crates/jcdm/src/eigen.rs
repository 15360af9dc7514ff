//! Exact diagonalization of the banded Hamiltonian, with an optional
//! parity-sector block solve that doubles as the source of exact parity
//! labels for splitting analysis.

use nalgebra::DMatrix;

use crate::bands::BandId;
use crate::basis::{FockBasis, Spin};
use crate::hamiltonian::BandedHamiltonian;
use crate::params::ModelParams;
use crate::{Error, Result};

/// Parity label of an eigenstate under the left-right swap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

/// Full spectrum and eigenvectors; eigenvalues are stored normalized,
/// `eps = E / N`, ascending.
#[derive(Debug, Clone)]
pub struct EigenSolution {
    pub params: ModelParams,
    pub basis: FockBasis,
    /// Normalized eigenvalues, ascending.
    pub eps: Vec<f64>,
    /// Eigenvectors as columns, aligned with `eps`.
    pub vectors: DMatrix<f64>,
    /// Exact sector labels when the solve was parity-resolved.
    pub parity: Option<Vec<Parity>>,
}

fn sort_pairs(eigenvalues: &mut Vec<f64>, vectors: &mut DMatrix<f64>) {
    let mut order: Vec<usize> = (0..eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eigenvalues[a].total_cmp(&eigenvalues[b]));
    let sorted_vals: Vec<f64> = order.iter().map(|&i| eigenvalues[i]).collect();
    let mut sorted_vecs = DMatrix::zeros(vectors.nrows(), vectors.ncols());
    for (new, &old) in order.iter().enumerate() {
        sorted_vecs.set_column(new, &vectors.column(old));
    }
    *eigenvalues = sorted_vals;
    *vectors = sorted_vecs;
}

/// Dense symmetric solve of the full matrix. Used when the probe term
/// breaks parity; otherwise [`diagonalize`] prefers the sector path.
pub fn diagonalize_full(
    h: &BandedHamiltonian,
    basis: &FockBasis,
    params: &ModelParams,
) -> Result<EigenSolution> {
    if h.dim() != basis.len() {
        return Err(Error::InvalidParams("basis/matrix dimension mismatch".into()));
    }
    let dense = h.to_dense();
    let eig = nalgebra::SymmetricEigen::try_new(dense, f64::EPSILON, 100_000)
        .ok_or(Error::NonConvergence(0))?;
    let scale = params.n as f64;
    let mut eps: Vec<f64> = eig.eigenvalues.iter().map(|e| e / scale).collect();
    let mut vectors = eig.eigenvectors;
    sort_pairs(&mut eps, &mut vectors);
    Ok(EigenSolution { params: *params, basis: basis.clone(), eps, vectors, parity: None })
}

/// Decomposition of the index set into parity pairs and fixed points.
struct ParityBlocks {
    pairs: Vec<(usize, usize)>,
    fixed: Vec<usize>,
}

fn parity_blocks(basis: &FockBasis) -> ParityBlocks {
    let p = basis.parity_permutation();
    let mut pairs = Vec::new();
    let mut fixed = Vec::new();
    for i in 0..basis.len() {
        if p[i] == i {
            fixed.push(i);
        } else if p[i] > i {
            pairs.push((i, p[i]));
        }
    }
    ParityBlocks { pairs, fixed }
}

fn sector_matrices(h: &BandedHamiltonian, blocks: &ParityBlocks) -> (DMatrix<f64>, DMatrix<f64>) {
    let np = blocks.pairs.len();
    let nf = blocks.fixed.len();
    let mut even = DMatrix::zeros(np + nf, np + nf);
    let mut odd = DMatrix::zeros(np, np);
    for (a, &(ia, _)) in blocks.pairs.iter().enumerate() {
        for (b, &(ib, jb)) in blocks.pairs.iter().enumerate() {
            let direct = h.get(ia, ib);
            let cross = h.get(ia, jb);
            even[(a, b)] = direct + cross;
            odd[(a, b)] = direct - cross;
        }
        for (b, &ib) in blocks.fixed.iter().enumerate() {
            let v = std::f64::consts::SQRT_2 * h.get(ia, ib);
            even[(a, np + b)] = v;
            even[(np + b, a)] = v;
        }
    }
    for (a, &ia) in blocks.fixed.iter().enumerate() {
        for (b, &ib) in blocks.fixed.iter().enumerate() {
            even[(np + a, np + b)] = h.get(ia, ib);
        }
    }
    (even, odd)
}

/// Parity-resolved solve: block-diagonalizes H into even/odd sectors,
/// solves each, and merges. Requires `eps_imb == 0` so that parity is a
/// symmetry. Near-degenerate tunneling pairs come out with clean labels
/// instead of arbitrary mixtures.
pub fn diagonalize_by_parity(
    h: &BandedHamiltonian,
    basis: &FockBasis,
    params: &ModelParams,
) -> Result<EigenSolution> {
    if params.eps_imb != 0.0 {
        return Err(Error::InvalidParams(
            "parity-sector solve requires eps_imb = 0".into(),
        ));
    }
    let blocks = parity_blocks(basis);
    let (even, odd) = sector_matrices(h, &blocks);
    let np = blocks.pairs.len();
    let dim = basis.len();
    let scale = params.n as f64;

    let mut entries: Vec<(f64, Parity, Vec<f64>)> = Vec::with_capacity(dim);
    let eig_e = nalgebra::SymmetricEigen::try_new(even, f64::EPSILON, 100_000)
        .ok_or(Error::NonConvergence(0))?;
    for k in 0..eig_e.eigenvalues.len() {
        let mut full = vec![0.0; dim];
        let col = eig_e.eigenvectors.column(k);
        for (a, &(ia, ja)) in blocks.pairs.iter().enumerate() {
            let v = col[a] / std::f64::consts::SQRT_2;
            full[ia] += v;
            full[ja] += v;
        }
        for (b, &ib) in blocks.fixed.iter().enumerate() {
            full[ib] += col[np + b];
        }
        entries.push((eig_e.eigenvalues[k] / scale, Parity::Even, full));
    }
    if np > 0 {
        let eig_o = nalgebra::SymmetricEigen::try_new(odd, f64::EPSILON, 100_000)
            .ok_or(Error::NonConvergence(1))?;
        for k in 0..eig_o.eigenvalues.len() {
            let mut full = vec![0.0; dim];
            let col = eig_o.eigenvectors.column(k);
            for (a, &(ia, ja)) in blocks.pairs.iter().enumerate() {
                let v = col[a] / std::f64::consts::SQRT_2;
                full[ia] += v;
                full[ja] -= v;
            }
            entries.push((eig_o.eigenvalues[k] / scale, Parity::Odd, full));
        }
    }
    // ascending eps; exact ties resolved even before odd
    entries.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| {
        let pa = matches!(a.1, Parity::Odd) as u8;
        let pb = matches!(b.1, Parity::Odd) as u8;
        pa.cmp(&pb)
    }));

    let eps: Vec<f64> = entries.iter().map(|e| e.0).collect();
    let parity: Vec<Parity> = entries.iter().map(|e| e.1).collect();
    let mut vectors = DMatrix::zeros(dim, dim);
    for (k, entry) in entries.iter().enumerate() {
        for i in 0..dim {
            vectors[(i, k)] = entry.2[i];
        }
    }
    Ok(EigenSolution {
        params: *params,
        basis: basis.clone(),
        eps,
        vectors,
        parity: Some(parity),
    })
}

/// Preferred entry point: parity-resolved when the probe term is off,
/// plain dense solve otherwise.
pub fn diagonalize(
    h: &BandedHamiltonian,
    basis: &FockBasis,
    params: &ModelParams,
) -> Result<EigenSolution> {
    if params.eps_imb == 0.0 && basis.len() > 1 {
        diagonalize_by_parity(h, basis, params)
    } else {
        diagonalize_full(h, basis, params)
    }
}

/// Eigenvalues only (normalized), for density-of-states work where the
/// vectors are never needed.
pub fn eigenvalues_only(h: &BandedHamiltonian, params: &ModelParams) -> Vec<f64> {
    let scale = params.n as f64;
    let mut eps: Vec<f64> = h
        .to_dense()
        .symmetric_eigenvalues()
        .iter()
        .map(|e| e / scale)
        .collect();
    eps.sort_by(|a, b| a.total_cmp(b));
    eps
}

/// Per-sector eigenvalues only (normalized, each ascending): (even, odd).
pub fn eigenvalues_by_parity(
    h: &BandedHamiltonian,
    basis: &FockBasis,
    params: &ModelParams,
) -> (Vec<f64>, Vec<f64>) {
    let blocks = parity_blocks(basis);
    let (even, odd) = sector_matrices(h, &blocks);
    let scale = params.n as f64;
    let mut ev_e: Vec<f64> = even.symmetric_eigenvalues().iter().map(|e| e / scale).collect();
    ev_e.sort_by(|a, b| a.total_cmp(b));
    let mut ev_o: Vec<f64> = if blocks.pairs.is_empty() {
        Vec::new()
    } else {
        odd.symmetric_eigenvalues().iter().map(|e| e / scale).collect()
    };
    ev_o.sort_by(|a, b| a.total_cmp(b));
    (ev_e, ev_o)
}

impl EigenSolution {
    pub fn len(&self) -> usize {
        self.eps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eps.is_empty()
    }

    /// Raw eigenvalue E_n = N * eps_n.
    pub fn energy(&self, n: usize) -> f64 {
        self.eps[n] * self.params.n as f64
    }

    /// Spin-traced probability profile of one eigenstate over Z blocks:
    /// pairs (x = Z/N, |Psi(Z)|^2).
    pub fn profile(&self, state: usize) -> Vec<(f64, f64)> {
        let n = self.params.n as i64;
        let nz = self.params.n as usize + 1;
        let mut acc = vec![0.0f64; nz];
        for (i, s) in self.basis.states().iter().enumerate() {
            let block = ((s.z + n) / 2) as usize;
            let c = self.vectors[(i, state)];
            acc[block] += c * c;
        }
        acc.into_iter()
            .enumerate()
            .map(|(b, w)| ((2.0 * b as f64 - n as f64) / n as f64, w))
            .collect()
    }

    /// Quantum expectation of the normalized imbalance for one eigenstate.
    pub fn mean_x(&self, state: usize) -> f64 {
        self.basis
            .states()
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let c = self.vectors[(i, state)];
                (s.z as f64 / self.params.n as f64) * c * c
            })
            .sum()
    }

    /// Residual `||H v - E v||_2` of one eigenpair.
    pub fn residual(&self, h: &BandedHamiltonian, state: usize) -> f64 {
        let v: Vec<f64> = self.vectors.column(state).iter().copied().collect();
        let hv = h.matvec(&v);
        let e = self.energy(state);
        hv.iter()
            .zip(v.iter())
            .map(|(a, b)| (a - e * b) * (a - e * b))
            .sum::<f64>()
            .sqrt()
    }

    /// Projection of an eigenstate onto one polariton band: coefficients
    /// C_band(Z) in the upper/lower polariton product basis, keyed by Z.
    /// Components missing at the edge blocks are treated as zero.
    pub fn band_amplitudes(&self, state: usize, band: BandId) -> Vec<(i64, f64)> {
        // |n,±> = (|n,down> ± |n-1,up>)/sqrt(2) per site; the band index
        // encodes the (left, right) sign pair.
        let (sl, sr) = match band {
            BandId::UpperUpper => (1.0, 1.0),
            BandId::UpperLower => (1.0, -1.0),
            BandId::LowerUpper => (-1.0, 1.0),
            BandId::LowerLower => (-1.0, -1.0),
        };
        let n = self.params.n as i64;
        let nz = self.params.n as usize + 1;
        let mut acc = vec![0.0f64; nz];
        for (i, s) in self.basis.states().iter().enumerate() {
            let block = ((s.z + n) / 2) as usize;
            let sign = match (s.m_l, s.m_r) {
                (Spin::Down, Spin::Down) => 1.0,
                (Spin::Down, Spin::Up) => sr,
                (Spin::Up, Spin::Down) => sl,
                (Spin::Up, Spin::Up) => sl * sr,
            };
            acc[block] += 0.5 * sign * self.vectors[(i, state)];
        }
        acc.into_iter()
            .enumerate()
            .map(|(b, c)| (2 * b as i64 - n, c))
            .collect()
    }

    /// Weight of an eigenstate inside one polariton band.
    pub fn band_weight(&self, state: usize, band: BandId) -> f64 {
        self.band_amplitudes(state, band)
            .iter()
            .map(|(_, c)| c * c)
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::build;
    use approx::assert_abs_diff_eq;

    #[test]
    fn n1_normalized_spectrum() {
        let params = ModelParams::new(1, 1.0, 1.0).unwrap();
        let (basis, h) = build(&params).unwrap();
        let sol = diagonalize(&h, &basis, &params).unwrap();
        let s5 = 5.0f64.sqrt();
        let expect = [(-1.0 - s5) / 2.0, (1.0 - s5) / 2.0, (-1.0 + s5) / 2.0, (1.0 + s5) / 2.0];
        let mut expect = expect.to_vec();
        expect.sort_by(|a, b| a.total_cmp(b));
        for (a, b) in sol.eps.iter().zip(expect.iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn residuals_and_norms() {
        let params = ModelParams::new(20, 1.5, 0.8).unwrap();
        let (basis, h) = build(&params).unwrap();
        let sol = diagonalize(&h, &basis, &params).unwrap();
        let scale = h.max_abs();
        for k in 0..sol.len() {
            let norm: f64 = sol.vectors.column(k).iter().map(|c| c * c).sum();
            assert_abs_diff_eq!(norm, 1.0, epsilon = 1e-10);
            assert!(sol.residual(&h, k) < 1e-8 * scale);
        }
    }

    #[test]
    fn trace_identity() {
        let params = ModelParams::new(15, 0.9, 0.4).unwrap();
        let (basis, h) = build(&params).unwrap();
        let sol = diagonalize(&h, &basis, &params).unwrap();
        let sum_e: f64 = (0..sol.len()).map(|k| sol.energy(k)).sum();
        let trace: f64 = (0..h.dim()).map(|i| h.get(i, i)).sum();
        let scale = h.max_abs() * h.dim() as f64;
        assert!((sum_e - trace).abs() < 1e-8 * scale.max(1.0));
    }

    #[test]
    fn parity_sectors_match_full_solve() {
        for n in [6u32, 11, 40] {
            let params = ModelParams::new(n, 1.2, 0.5).unwrap();
            let (basis, h) = build(&params).unwrap();
            let full = diagonalize_full(&h, &basis, &params).unwrap();
            let sectors = diagonalize_by_parity(&h, &basis, &params).unwrap();
            for (a, b) in full.eps.iter().zip(sectors.eps.iter()) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn profiles_are_normalized_and_parity_symmetric() {
        let params = ModelParams::new(30, 1.0, 0.5).unwrap();
        let (basis, h) = build(&params).unwrap();
        let sol = diagonalize(&h, &basis, &params).unwrap();
        for k in [0usize, 7, 60, sol.len() - 1] {
            let prof = sol.profile(k);
            let total: f64 = prof.iter().map(|(_, w)| w).sum();
            assert_abs_diff_eq!(total, 1.0, epsilon = 1e-10);
            // eps_imb = 0: |Psi(Z)|^2 symmetric under Z -> -Z
            let m = prof.len();
            for i in 0..m {
                assert_abs_diff_eq!(prof[i].1, prof[m - 1 - i].1, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn band_weights_sum_to_one_in_bulk() {
        let params = ModelParams::from_j_over_gprime(24, 0.25, 1.0).unwrap();
        let (basis, h) = build(&params).unwrap();
        let sol = diagonalize(&h, &basis, &params).unwrap();
        // ground state lives deep in the lower-lower band
        let w4 = sol.band_weight(0, BandId::LowerLower);
        assert!(w4 > 0.9, "ground state band-4 weight {w4}");
        let all: f64 = [
            BandId::UpperUpper,
            BandId::UpperLower,
            BandId::LowerUpper,
            BandId::LowerLower,
        ]
        .iter()
        .map(|&b| sol.band_weight(0, b))
        .sum();
        // edge blocks truncate two spin components, so the sum is close to
        // but not exactly one
        assert!(all > 0.95 && all <= 1.0 + 1e-12, "total band weight {all}");
    }
}
