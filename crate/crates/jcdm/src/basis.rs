//! Enumeration of the fixed-N imbalance basis `|Z, m_L, m_R>`.

use crate::{Error, Result};

/// Qubit flag on one site.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Spin {
    Down,
    Up,
}

impl Spin {
    #[inline]
    fn excitation(self) -> i64 {
        match self {
            Spin::Down => 0,
            Spin::Up => 1,
        }
    }
}

/// One basis state: imbalance eigenvalue and the two qubit flags.
///
/// The photon numbers are implied: `(N+Z)/2 - [m_L up]` on the left and
/// `(N-Z)/2 - [m_R up]` on the right; a state exists only when both are
/// nonnegative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BasisState {
    pub z: i64,
    pub m_l: Spin,
    pub m_r: Spin,
}

impl BasisState {
    /// Left cavity photon number for total polariton number `n`.
    #[inline]
    pub fn photons_left(&self, n: u32) -> i64 {
        (n as i64 + self.z) / 2 - self.m_l.excitation()
    }

    /// Right cavity photon number for total polariton number `n`.
    #[inline]
    pub fn photons_right(&self, n: u32) -> i64 {
        (n as i64 - self.z) / 2 - self.m_r.excitation()
    }

    #[inline]
    pub fn is_admissible(&self, n: u32) -> bool {
        self.z.abs() <= n as i64
            && (self.z - n as i64) % 2 == 0
            && self.photons_left(n) >= 0
            && self.photons_right(n) >= 0
    }

    /// Image under the left-right parity operation.
    #[inline]
    pub fn parity_image(&self) -> BasisState {
        BasisState { z: -self.z, m_l: self.m_r, m_r: self.m_l }
    }
}

const SPIN_ORDER: [(Spin, Spin); 4] = [
    (Spin::Down, Spin::Down),
    (Spin::Down, Spin::Up),
    (Spin::Up, Spin::Down),
    (Spin::Up, Spin::Up),
];

/// Ordered basis of the fixed-N sector, Z-major with spin order
/// (down-down, down-up, up-down, up-up) inside each block. This ordering
/// keeps the Hamiltonian banded with half-bandwidth at most 4 and makes
/// parity a block-reversal permutation.
#[derive(Debug, Clone)]
pub struct FockBasis {
    n: u32,
    states: Vec<BasisState>,
    /// Start index of each Z block, Z = -N, -N+2, ..., N.
    block_offsets: Vec<usize>,
}

/// Enumerate all admissible `(Z, m_L, m_R)` with Z stepping by 2.
///
/// The total count is 4N for every N >= 2 (two states at each edge
/// Z = ±N, four per interior Z); N = 1 also gives 4N = 4 states.
pub fn enumerate_basis(n: u32) -> Result<FockBasis> {
    if n == 0 {
        return Err(Error::InvalidParams(
            "N = 0 sector is degenerate and unsupported".into(),
        ));
    }
    let n_i = n as i64;
    let mut states = Vec::with_capacity(4 * n as usize);
    let mut block_offsets = Vec::with_capacity(n as usize + 1);
    let mut z = -n_i;
    while z <= n_i {
        block_offsets.push(states.len());
        for (m_l, m_r) in SPIN_ORDER {
            let s = BasisState { z, m_l, m_r };
            if s.is_admissible(n) {
                states.push(s);
            }
        }
        z += 2;
    }
    Ok(FockBasis { n, states, block_offsets })
}

impl FockBasis {
    #[inline]
    pub fn n(&self) -> u32 {
        self.n
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.states.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    #[inline]
    pub fn states(&self) -> &[BasisState] {
        &self.states
    }

    #[inline]
    pub fn state(&self, idx: usize) -> BasisState {
        self.states[idx]
    }

    /// Dense row index of a state, or None when it is inadmissible.
    pub fn index_of(&self, s: &BasisState) -> Option<usize> {
        if !s.is_admissible(self.n) {
            return None;
        }
        let block = ((s.z + self.n as i64) / 2) as usize;
        let start = self.block_offsets[block];
        let end = self
            .block_offsets
            .get(block + 1)
            .copied()
            .unwrap_or(self.states.len());
        self.states[start..end].iter().position(|t| t == s).map(|k| start + k)
    }

    /// Normalized imbalance x = Z/N of a row.
    #[inline]
    pub fn x_of(&self, idx: usize) -> f64 {
        self.states[idx].z as f64 / self.n as f64
    }

    /// Involutive index permutation realizing `(Z, m_L, m_R) -> (-Z, m_R, m_L)`.
    pub fn parity_permutation(&self) -> Vec<usize> {
        self.states
            .iter()
            .map(|s| {
                self.index_of(&s.parity_image())
                    .expect("parity image of an admissible state is admissible")
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counting_rule_4n() {
        for n in [1u32, 2, 3, 5, 10, 400] {
            let b = enumerate_basis(n).unwrap();
            assert_eq!(b.len(), 4 * n as usize, "N={n}");
        }
        // block structure for N=2: 2 at Z=-2, 4 at Z=0, 2 at Z=+2
        let b = enumerate_basis(2).unwrap();
        let zs: Vec<i64> = b.states().iter().map(|s| s.z).collect();
        assert_eq!(zs, vec![-2, -2, 0, 0, 0, 0, 2, 2]);
    }

    #[test]
    fn n1_explicit_enumeration() {
        let b = enumerate_basis(1).unwrap();
        let expect = [
            BasisState { z: -1, m_l: Spin::Down, m_r: Spin::Down },
            BasisState { z: -1, m_l: Spin::Down, m_r: Spin::Up },
            BasisState { z: 1, m_l: Spin::Down, m_r: Spin::Down },
            BasisState { z: 1, m_l: Spin::Up, m_r: Spin::Down },
        ];
        assert_eq!(b.states(), &expect);
    }

    #[test]
    fn rejects_n0() {
        assert!(enumerate_basis(0).is_err());
    }

    #[test]
    fn edge_blocks_force_qubit_down() {
        let b = enumerate_basis(6).unwrap();
        for s in b.states() {
            if s.z == 6 {
                assert_eq!(s.m_r, Spin::Down);
            }
            if s.z == -6 {
                assert_eq!(s.m_l, Spin::Down);
            }
            assert!(s.photons_left(6) >= 0 && s.photons_right(6) >= 0);
        }
    }

    #[test]
    fn parity_permutation_is_involution() {
        for n in [1u32, 2, 7, 40] {
            let b = enumerate_basis(n).unwrap();
            let p = b.parity_permutation();
            for i in 0..b.len() {
                assert_eq!(p[p[i]], i);
            }
        }
    }

    #[test]
    fn parity_examples() {
        let b = enumerate_basis(4).unwrap();
        let s = BasisState { z: 0, m_l: Spin::Up, m_r: Spin::Down };
        assert_eq!(s.parity_image(), BasisState { z: 0, m_l: Spin::Down, m_r: Spin::Up });
        let edge = BasisState { z: 4, m_l: Spin::Down, m_r: Spin::Down };
        assert_eq!(edge.parity_image(), BasisState { z: -4, m_l: Spin::Down, m_r: Spin::Down });
        assert!(b.index_of(&edge.parity_image()).is_some());
    }
}
