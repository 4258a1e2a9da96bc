use crate::error::{Error, Result};

/// Sizes of one RIS-aided uplink: `M` BS antennas, `K` single-antenna users,
/// `N` RIS elements and `L` training configurations of the surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SystemDims {
    m: usize,
    k: usize,
    n: usize,
    l: usize,
}

impl SystemDims {
    pub fn new(m: usize, k: usize, n: usize, l: usize) -> Result<Self> {
        if m == 0 || k == 0 || n == 0 || l == 0 {
            return Err(Error::InvalidDims(format!(
                "all of M, K, N, L must be >= 1 (got M={m}, K={k}, N={n}, L={l})"
            )));
        }
        Ok(Self { m, k, n, l })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn l(&self) -> usize {
        self.l
    }

    /// Length of one Khatri-Rao column, `J = K·M`.
    pub fn j(&self) -> usize {
        self.k * self.m
    }

    /// Position of `(k, m)` inside a length-`J` column (k outer, m inner).
    #[inline]
    pub fn kr_index(&self, k: usize, m: usize) -> usize {
        k * self.m + m
    }
}
