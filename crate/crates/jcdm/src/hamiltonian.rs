//! Assembly of the dimer Hamiltonian in the imbalance basis (symmetric
//! banded storage) and an independent tensor-product oracle for small N.

use nalgebra::DMatrix;

use crate::basis::{enumerate_basis, BasisState, FockBasis, Spin};
use crate::params::ModelParams;
use crate::{Error, Result};

/// Real symmetric matrix in lower banded storage.
///
/// `bands[d][i] = H[i+d, i]` for diagonals d = 0..=half_bandwidth.
#[derive(Debug, Clone)]
pub struct BandedHamiltonian {
    dim: usize,
    half_bandwidth: usize,
    bands: Vec<Vec<f64>>,
}

impl BandedHamiltonian {
    fn zeros(dim: usize, half_bandwidth: usize) -> Self {
        let bands = (0..=half_bandwidth).map(|_| vec![0.0; dim]).collect();
        Self { dim, half_bandwidth, bands }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn half_bandwidth(&self) -> usize {
        self.half_bandwidth
    }

    /// Symmetric element access; zero outside the band.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        let d = hi - lo;
        if d > self.half_bandwidth {
            0.0
        } else {
            self.bands[d][lo]
        }
    }

    fn add(&mut self, i: usize, j: usize, v: f64) {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        let d = hi - lo;
        assert!(d <= self.half_bandwidth, "entry ({i},{j}) outside band");
        self.bands[d][lo] += v;
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for d in 0..=self.half_bandwidth {
            for i in 0..self.dim.saturating_sub(d) {
                let v = self.bands[d][i];
                m[(i + d, i)] = v;
                m[(i, i + d)] = v;
            }
        }
        m
    }

    /// y = H x using the banded storage.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim);
        let mut y = vec![0.0; self.dim];
        for i in 0..self.dim {
            y[i] += self.bands[0][i] * x[i];
        }
        for d in 1..=self.half_bandwidth {
            for i in 0..self.dim.saturating_sub(d) {
                let v = self.bands[d][i];
                y[i + d] += v * x[i];
                y[i] += v * x[i + d];
            }
        }
        y
    }

    /// Largest absolute element, used to scale residual tolerances.
    pub fn max_abs(&self) -> f64 {
        self.bands
            .iter()
            .flat_map(|b| b.iter())
            .fold(0.0f64, |m, &v| m.max(v.abs()))
    }
}

/// Spin-diagonal hopping amplitude `T^{m_L m_R}_{Z, Z+2}`.
fn hopping_amplitude(n: u32, z: i64, m_l: Spin, m_r: Spin) -> f64 {
    let n = n as i64;
    let (a, b) = match (m_l, m_r) {
        (Spin::Down, Spin::Down) => (n + z + 2, n - z),
        (Spin::Down, Spin::Up) => (n + z + 2, n - z - 2),
        (Spin::Up, Spin::Down) => (n + z, n - z),
        (Spin::Up, Spin::Up) => (n + z, n - z - 2),
    };
    if a <= 0 || b <= 0 {
        0.0
    } else {
        ((a * b) as f64).sqrt()
    }
}

/// Build H for the given basis: on-site qubit-photon couplings
/// `g sqrt((N±Z)/2)` inside each Z block, hopping `-(J/2) T` between
/// blocks Z and Z+2, and the probe term `eps_imb * Z` on the diagonal.
/// The constant resonant `nu` terms are dropped. Matrix elements whose
/// target state does not exist are omitted.
pub fn assemble_hamiltonian(params: &ModelParams, basis: &FockBasis) -> Result<BandedHamiltonian> {
    if basis.n() != params.n {
        return Err(Error::InvalidParams(format!(
            "basis built for N={} but params have N={}",
            basis.n(),
            params.n
        )));
    }
    let n = params.n;
    let mut h = BandedHamiltonian::zeros(basis.len(), 4.min(basis.len() - 1).max(1));

    for (i, s) in basis.states().iter().enumerate() {
        // diagonal probe term
        if params.eps_imb != 0.0 {
            h.add(i, i, params.eps_imb * s.z as f64);
        }

        // on-site left qubit flip: |Z, down, m_R> <-> |Z, up, m_R>
        if s.m_l == Spin::Down {
            let t = BasisState { m_l: Spin::Up, ..*s };
            if let Some(j) = basis.index_of(&t) {
                let amp = params.g * ((n as i64 + s.z) as f64 / 2.0).sqrt();
                h.add(j, i, amp);
            }
        }
        // on-site right qubit flip
        if s.m_r == Spin::Down {
            let t = BasisState { m_r: Spin::Up, ..*s };
            if let Some(j) = basis.index_of(&t) {
                let amp = params.g * ((n as i64 - s.z) as f64 / 2.0).sqrt();
                h.add(j, i, amp);
            }
        }
        // hopping toward Z+2, spin diagonal
        let t = BasisState { z: s.z + 2, ..*s };
        if let Some(j) = basis.index_of(&t) {
            let amp = hopping_amplitude(n, s.z, s.m_l, s.m_r);
            if amp != 0.0 {
                h.add(j, i, -params.j / 2.0 * amp);
            }
        }
    }
    Ok(h)
}

/// Dense H of the full dimer in the tensor space (qubit ⊗ photons per
/// site, photons truncated at N each), projected onto the total-polariton-N
/// eigenspace. Independent construction path used as an oracle for
/// [`assemble_hamiltonian`]; `nu` is the common resonant frequency, whose
/// only effect inside the sector is the constant shift `nu * (N - 1)`.
pub fn brute_force_hamiltonian(params: &ModelParams, nu: f64) -> Result<DMatrix<f64>> {
    const MAX_ORACLE_N: u32 = 8;
    if params.n > MAX_ORACLE_N {
        return Err(Error::InvalidParams(format!(
            "brute-force oracle supports N <= {MAX_ORACLE_N}, got {}",
            params.n
        )));
    }
    let n = params.n as usize;
    let nph = n + 1; // photon occupations 0..=N per cavity

    // tensor index: ((qL * nph + pL) * 2 + qR) * nph + pR
    let dim_full = 2 * nph * 2 * nph;
    let idx = |ql: usize, pl: usize, qr: usize, pr: usize| ((ql * nph + pl) * 2 + qr) * nph + pr;
    let polariton = |ql: usize, pl: usize, qr: usize, pr: usize| ql + pl + qr + pr;

    // enumerate the fixed-N subspace
    let mut sector = Vec::new();
    let mut sector_pos = vec![usize::MAX; dim_full];
    for ql in 0..2 {
        for pl in 0..nph {
            for qr in 0..2 {
                for pr in 0..nph {
                    if polariton(ql, pl, qr, pr) == n {
                        sector_pos[idx(ql, pl, qr, pr)] = sector.len();
                        sector.push((ql, pl, qr, pr));
                    }
                }
            }
        }
    }
    let dim = sector.len();
    let mut h = DMatrix::zeros(dim, dim);

    for (row, &(ql, pl, qr, pr)) in sector.iter().enumerate() {
        // nu (sigma_z/2 + a^dag a) per site; sigma_z/2 = q - 1/2
        let diag = nu * ((ql + pl) as f64 - 0.5) + nu * ((qr + pr) as f64 - 0.5);
        h[(row, row)] += diag;

        // g (sigma^+ a + a^dag sigma^-) on the left site
        if ql == 0 && pl > 0 {
            let col = sector_pos[idx(1, pl - 1, qr, pr)];
            let amp = params.g * (pl as f64).sqrt();
            h[(col, row)] += amp;
            h[(row, col)] += amp;
        }
        // same on the right site
        if qr == 0 && pr > 0 {
            let col = sector_pos[idx(ql, pl, 1, pr - 1)];
            let amp = params.g * (pr as f64).sqrt();
            h[(col, row)] += amp;
            h[(row, col)] += amp;
        }
        // -J a_R^dag a_L (hermitian partner handled by the symmetric add)
        if pl > 0 && pr + 1 < nph {
            let col = sector_pos[idx(ql, pl - 1, qr, pr + 1)];
            let amp = -params.j * (pl as f64).sqrt() * ((pr + 1) as f64).sqrt();
            h[(col, row)] += amp;
            h[(row, col)] += amp;
        }
    }
    Ok(h)
}

/// Sorted eigenvalues of the brute-force sector Hamiltonian.
pub fn brute_force_eigenvalues(params: &ModelParams, nu: f64) -> Result<Vec<f64>> {
    let h = brute_force_hamiltonian(params, nu)?;
    let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    Ok(ev)
}

/// Convenience: basis + banded H in one call.
pub fn build(params: &ModelParams) -> Result<(FockBasis, BandedHamiltonian)> {
    let basis = enumerate_basis(params.n)?;
    let h = assemble_hamiltonian(params, &basis)?;
    Ok((basis, h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn sorted_banded_eigenvalues(params: &ModelParams) -> Vec<f64> {
        let (_, h) = build(params).unwrap();
        let mut ev: Vec<f64> = h.to_dense().symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }

    #[test]
    fn hopping_table_examples() {
        // T^{downdown}_{0,2} at N=2 is sqrt((2+0+2)(2-0)) = sqrt(8)
        assert_abs_diff_eq!(
            hopping_amplitude(2, 0, Spin::Down, Spin::Down),
            8.0f64.sqrt(),
            epsilon = 1e-15
        );
        // amplitudes vanish exactly where the target state would not exist
        assert_eq!(hopping_amplitude(2, 0, Spin::Down, Spin::Up), 0.0);
        assert_eq!(hopping_amplitude(2, -2, Spin::Up, Spin::Down), 0.0);
    }

    #[test]
    fn onsite_coupling_n2_z0() {
        let params = ModelParams::new(2, 0.7, 0.0).unwrap();
        let (basis, h) = build(&params).unwrap();
        let i = basis
            .index_of(&BasisState { z: 0, m_l: Spin::Down, m_r: Spin::Down })
            .unwrap();
        let j = basis
            .index_of(&BasisState { z: 0, m_l: Spin::Up, m_r: Spin::Down })
            .unwrap();
        // g sqrt((2+0)/2) = g on both sites
        assert_abs_diff_eq!(h.get(i, j), 0.7, epsilon = 1e-15);
    }

    #[test]
    fn n1_closed_form_spectrum() {
        // symmetric/antisymmetric photon modes give 2x2 blocks with
        // eigenvalues (-J ± sqrt(J^2+4g^2))/2 and (J ± sqrt(J^2+4g^2))/2
        let params = ModelParams::new(1, 1.0, 1.0).unwrap();
        let ev = sorted_banded_eigenvalues(&params);
        let s5 = 5.0f64.sqrt();
        let expect = {
            let mut e = vec![(-1.0 - s5) / 2.0, (1.0 - s5) / 2.0, (-1.0 + s5) / 2.0, (1.0 + s5) / 2.0];
            e.sort_by(|a, b| a.total_cmp(b));
            e
        };
        for (a, b) in ev.iter().zip(expect.iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn oracle_equivalence_small_n() {
        for n in 1..=4u32 {
            for &(g, j) in &[(0.0, 1.0), (1.0, 0.0), (1.0, 1.0), (0.7, 0.3), (2.0, 0.5)] {
                let params = ModelParams::new(n, g, j).unwrap();
                let banded = sorted_banded_eigenvalues(&params);
                let brute = brute_force_eigenvalues(&params, 0.0).unwrap();
                assert_eq!(banded.len(), brute.len());
                for (a, b) in banded.iter().zip(brute.iter()) {
                    assert_abs_diff_eq!(a, b, epsilon = 1e-10);
                }
            }
        }
    }

    #[test]
    fn resonant_nu_shifts_by_constant() {
        let params = ModelParams::new(3, 0.9, 0.4).unwrap();
        let with_nu = brute_force_eigenvalues(&params, 0.9).unwrap();
        let without = brute_force_eigenvalues(&params, 0.0).unwrap();
        let shift = 0.9 * (3.0 - 1.0);
        for (a, b) in with_nu.iter().zip(without.iter()) {
            assert_abs_diff_eq!(a - shift, *b, epsilon = 1e-10);
        }
    }

    #[test]
    fn hermitian_in_banded_storage() {
        let params = ModelParams::new(12, 1.3, 0.7).unwrap();
        let (_, h) = build(&params).unwrap();
        let d = h.to_dense();
        let diff = (&d - d.transpose()).abs().max();
        assert_eq!(diff, 0.0);
    }

    #[test]
    fn parity_commutes_without_probe() {
        for n in [2u32, 5, 8, 21] {
            let params = ModelParams::new(n, 1.1, 0.6).unwrap();
            let (basis, h) = build(&params).unwrap();
            let p = basis.parity_permutation();
            let d = h.to_dense();
            let mut max = 0.0f64;
            for i in 0..basis.len() {
                for j in 0..basis.len() {
                    max = max.max((d[(p[i], p[j])] - d[(i, j)]).abs());
                }
            }
            assert!(max < 1e-12, "N={n}: parity violation {max}");
        }
    }

    #[test]
    fn decoupled_limit_g0_is_qubit_degenerate() {
        // g = 0: spectrum is free photon hopping, qubit flags only relabel
        // degenerate copies; every eigenvalue appears at least twice.
        let params = ModelParams::new(5, 0.0, 1.0).unwrap();
        let ev = sorted_banded_eigenvalues(&params);
        // the extremal levels ±NJ live only in the all-photon sector;
        // every other level appears in at least two qubit sectors
        let edge = ev.last().unwrap().abs() - 1e-9;
        for e in ev.iter().filter(|e| e.abs() < edge) {
            let count = ev.iter().filter(|f| (*f - e).abs() < 1e-9).count();
            assert!(count >= 2, "eigenvalue {e} not degenerate");
        }
    }

    #[test]
    fn matvec_matches_dense() {
        let params = ModelParams::new(9, 0.8, 0.5).unwrap().with_eps_imb(1e-3);
        let (_, h) = build(&params).unwrap();
        let x: Vec<f64> = (0..h.dim()).map(|i| ((i * 37 % 11) as f64) - 5.0).collect();
        let y = h.matvec(&x);
        let xd = DMatrix::from_column_slice(h.dim(), 1, &x);
        let yd = h.to_dense() * xd;
        for i in 0..h.dim() {
            assert_abs_diff_eq!(y[i], yd[(i, 0)], epsilon = 1e-12);
        }
    }
}
