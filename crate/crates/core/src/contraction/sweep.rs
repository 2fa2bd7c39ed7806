//! Row-by-row boundary sweep.
//!
//! The boundary tensor keeps the layout
//! `[d_new_0 .. d_new_{j-1}, r, d_old_j .. d_old_{w-1}]` while row `i` is
//! absorbed left to right. Absorbing site `(i, j)` contracts the adjacent
//! pair `(r, d_old_j)` with the site's `(l, u)` legs and writes `(d, r')`
//! in their place, so each step is a batch of dense products with no
//! reordering of the large tensor and at most two boundary tensors alive.

use num_traits::{One, Zero};

use super::network::{ProjectedNetwork, D, L, R, U};
use crate::error::{Error, Result};
use crate::tensor::{matmul_into, MatRef, C64};

/// Instrumentation collected during a contraction.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ContractionStats {
    /// Largest number of intermediate elements alive at once.
    pub peak_elements: u128,
    /// Complex multiply-adds spent in dense products.
    pub multiply_adds: u128,
}

#[derive(Default)]
pub(crate) struct Tracker {
    live: u128,
    pub stats: ContractionStats,
}

impl Tracker {
    pub fn alloc(&mut self, n: usize) {
        self.live += n as u128;
        self.stats.peak_elements = self.stats.peak_elements.max(self.live);
    }

    pub fn free(&mut self, n: usize) {
        self.live -= n as u128;
    }

    pub fn count(&mut self, m: usize, k: usize, n: usize) {
        self.stats.multiply_adds += (m * k * n) as u128;
    }
}

/// Contracts the network top to bottom and returns the scalar.
pub(crate) fn sweep_rows(net: &ProjectedNetwork, tracker: &mut Tracker) -> Result<C64> {
    let (rows, cols) = (net.rows(), net.cols());
    let mut dims: Vec<usize> = vec![1; cols];
    let mut boundary = vec![C64::one()];
    tracker.alloc(1);
    let mut matrix = Vec::new();

    for i in 0..rows {
        dims.insert(0, 1);
        for j in 0..cols {
            let e = net.at((i, j));
            let sh = e.shape();
            if dims[j] != sh[L] || dims[j + 1] != sh[U] {
                return Err(Error::shape(format!(
                    "bond mismatch entering site ({i}, {j})"
                )));
            }
            let p: usize = dims[..j].iter().product();
            let k = sh[L] * sh[U];
            let s: usize = dims[j + 2..].iter().product();
            let n = sh[D] * sh[R];

            // site as (d r') x (l u)
            matrix.clear();
            matrix.resize(n * k, C64::zero());
            for l in 0..sh[L] {
                for r in 0..sh[R] {
                    for u in 0..sh[U] {
                        for d in 0..sh[D] {
                            let src = ((l * sh[R] + r) * sh[U] + u) * sh[D] + d;
                            matrix[(d * sh[R] + r) * k + l * sh[U] + u] = e.data()[src];
                        }
                    }
                }
            }

            let mut next = vec![C64::zero(); p * n * s];
            tracker.alloc(next.len());
            tracker.count(p, k * n, s);
            if s == 1 {
                // (p x k) * (k x n) in one product
                matmul_into(
                    MatRef::row_major(&boundary, p, k),
                    MatRef::transposed(&matrix, k, n),
                    &mut next,
                );
            } else {
                let m_ref = MatRef::row_major(&matrix, n, k);
                for pp in 0..p {
                    let src = &boundary[pp * k * s..(pp + 1) * k * s];
                    let dst = &mut next[pp * n * s..(pp + 1) * n * s];
                    matmul_into(m_ref, MatRef::row_major(src, k, s), dst);
                }
            }
            tracker.free(boundary.len());
            boundary = next;
            dims.splice(j..j + 2, [sh[D], sh[R]]);
        }
        // trailing right leg of the last column has extent 1
        dims.pop();
    }
    debug_assert_eq!(boundary.len(), 1);
    tracker.free(boundary.len());
    Ok(boundary[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contraction::network::trivial_network;

    #[test]
    fn trivial_networks_contract_to_their_value() {
        for (r, c) in [(1, 1), (1, 4), (3, 1), (3, 3)] {
            let net = trivial_network(r, c, C64::new(0.25, -2.0));
            let mut t = Tracker::default();
            assert_eq!(sweep_rows(&net, &mut t).unwrap(), C64::new(0.25, -2.0));
        }
    }
}
