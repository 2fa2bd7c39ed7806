//! Lattice wavefunction stored as one rank-5 tensor per site.
//!
//! Site tensors use index order `[phys, left, right, up, down]`. Boundary
//! auxiliary extents are 1. Gates are applied exactly: a two-qubit gate is
//! split by an operator SVD into two three-index pieces which are absorbed
//! into the two sites, multiplying the shared bond extent by the operator
//! Schmidt rank. No truncation is ever performed.

use num_traits::{One, Zero};

use crate::bitstring::Bitstring;
use crate::error::{Error, Result};
use crate::gates::{Mat2, Mat4};
use crate::tensor::{self, ContractionGuard, DenseTensor, C64};

pub type Site = (usize, usize);

pub const PHYS: usize = 0;
pub const LEFT: usize = 1;
pub const RIGHT: usize = 2;
pub const UP: usize = 3;
pub const DOWN: usize = 4;

/// Relative cut below which operator singular values count as zero.
pub const OPERATOR_RANK_EPS: f64 = 1e-12;

const UNITARITY_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct SiteTensor {
    pub tensor: DenseTensor,
    pub site: Site,
}

#[derive(Clone, Debug)]
#[allow(clippy::large_enum_variant)]
pub enum GateOp {
    Single { matrix: Mat2, site: Site },
    Two { matrix: Mat4, a: Site, b: Site },
}

/// Split of a two-qubit operator into per-site pieces.
#[derive(Clone, Debug)]
pub struct TwoQubitFactors {
    /// Indices `[t_a, s_a, k]`; singular values are absorbed here.
    pub u: DenseTensor,
    /// Indices `[k, t_b, s_b]`.
    pub v: DenseTensor,
    /// Operator Schmidt rank, the extent of `k`.
    pub rank: usize,
    pub singular_values: Vec<f64>,
    pub is_unitary: bool,
}

/// Factorizes a gate indexed `[t_a t_b ; s_a s_b]`.
pub fn factorize_two_qubit(gate: &Mat4) -> Result<TwoQubitFactors> {
    let t = DenseTensor::new(vec![2, 2, 2, 2], gate.0.to_vec())?;
    // [t_a, t_b, s_a, s_b] matricized as (t_a s_a) x (t_b s_b)
    let dec = tensor::svd(&t, &[0, 2])?;
    let s_max = dec.s.first().copied().unwrap_or(0.0);
    let rank = dec
        .s
        .iter()
        .filter(|&&s| s > OPERATOR_RANK_EPS * s_max)
        .count()
        .max(1);
    let full = dec.s.len();
    let mut u = Vec::with_capacity(4 * rank);
    for chunk in dec.u.data().chunks(full) {
        u.extend((0..rank).map(|k| chunk[k] * dec.s[k]));
    }
    let v = dec.v.data()[..rank * 4].to_vec();
    Ok(TwoQubitFactors {
        u: DenseTensor::new(vec![2, 2, rank], u)?,
        v: DenseTensor::new(vec![rank, 2, 2], v)?,
        rank,
        singular_values: dec.s,
        is_unitary: gate.is_unitary(UNITARITY_TOL),
    })
}

/// Upper bound on the bond dimension after `depth` random-circuit cycles,
/// `2^ceil(depth / 8)`.
pub fn chi_bound(depth: usize) -> u128 {
    1u128 << depth.div_ceil(8)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PepsState {
    rows: usize,
    cols: usize,
    sites: Vec<SiteTensor>,
    guard: ContractionGuard,
}

impl PepsState {
    /// Product state `|bits>`, all-zero when `bits` is `None`.
    pub fn product(rows: usize, cols: usize, bits: Option<&Bitstring>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid(format!(
                "lattice {rows}x{cols} has a zero side"
            )));
        }
        let n = rows * cols;
        if let Some(b) = bits {
            if b.len() != n {
                return Err(Error::invalid(format!(
                    "bitstring of length {} for {n} qubits",
                    b.len()
                )));
            }
        }
        let mut sites = Vec::with_capacity(n);
        for r in 0..rows {
            for c in 0..cols {
                let bit = bits.map_or(0, |b| b.get(r * cols + c)) as usize;
                let mut data = vec![C64::zero(); 2];
                data[bit] = C64::one();
                sites.push(SiteTensor {
                    tensor: DenseTensor::new(vec![2, 1, 1, 1, 1], data)?,
                    site: (r, c),
                });
            }
        }
        Ok(PepsState {
            rows,
            cols,
            sites,
            guard: ContractionGuard::default(),
        })
    }

    pub fn with_guard(mut self, guard: ContractionGuard) -> Self {
        self.guard = guard;
        self
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn n_qubits(&self) -> usize {
        self.rows * self.cols
    }

    pub fn site(&self, site: Site) -> &SiteTensor {
        &self.sites[site.0 * self.cols + site.1]
    }

    pub fn sites(&self) -> &[SiteTensor] {
        &self.sites
    }

    /// Mutable access to one site tensor. Callers must keep extents
    /// consistent with the neighbours.
    pub fn site_tensor_mut(&mut self, site: Site) -> &mut DenseTensor {
        let idx = site.0 * self.cols + site.1;
        &mut self.sites[idx].tensor
    }

    /// Total number of stored complex elements.
    pub fn element_count(&self) -> usize {
        self.sites.iter().map(|s| s.tensor.len()).sum()
    }

    fn check_site(&self, site: Site) -> Result<()> {
        if site.0 >= self.rows || site.1 >= self.cols {
            return Err(Error::invalid(format!(
                "site {site:?} outside {}x{} lattice",
                self.rows, self.cols
            )));
        }
        Ok(())
    }

    pub fn apply(&mut self, op: &GateOp) -> Result<()> {
        match op {
            GateOp::Single { matrix, site } => self.apply_single_qubit(matrix, *site),
            GateOp::Two { matrix, a, b } => self.apply_two_qubit(matrix, *a, *b),
        }
    }

    pub fn apply_single_qubit(&mut self, gate: &Mat2, site: Site) -> Result<()> {
        self.check_site(site)?;
        let data = self.site_tensor_mut(site).data_mut();
        let half = data.len() / 2;
        let (zero, one) = data.split_at_mut(half);
        let [u00, u01, u10, u11] = gate.0;
        for (a0, a1) in zero.iter_mut().zip(one.iter_mut()) {
            let (x0, x1) = (*a0, *a1);
            *a0 = u00 * x0 + u01 * x1;
            *a1 = u10 * x0 + u11 * x1;
        }
        Ok(())
    }

    /// Applies `gate` (indexed `[t_a t_b ; s_a s_b]`) to nearest neighbours
    /// `a` and `b`.
    pub fn apply_two_qubit(&mut self, gate: &Mat4, a: Site, b: Site) -> Result<()> {
        self.check_site(a)?;
        self.check_site(b)?;
        // Canonical orientation: `first` is left of or above `second`.
        let (first, second, gate) = if a.0 == b.0 && a.1 + 1 == b.1 || a.1 == b.1 && a.0 + 1 == b.0
        {
            (a, b, *gate)
        } else if a.0 == b.0 && b.1 + 1 == a.1 || a.1 == b.1 && b.0 + 1 == a.0 {
            (b, a, gate.swap_qubits())
        } else {
            return Err(Error::invalid(format!(
                "sites {a:?} and {b:?} are not nearest neighbours"
            )));
        };
        let (first_axis, second_axis) = if first.0 == second.0 {
            (RIGHT, LEFT)
        } else {
            (DOWN, UP)
        };
        let f = factorize_two_qubit(&gate)?;
        // v as op[t, s, k]
        let v_op = f.v.permute(&[1, 2, 0])?;
        let new_first = absorb_operator(&self.site(first).tensor, &f.u, first_axis, &self.guard)?;
        let new_second =
            absorb_operator(&self.site(second).tensor, &v_op, second_axis, &self.guard)?;
        *self.site_tensor_mut(first) = new_first;
        *self.site_tensor_mut(second) = new_second;
        Ok(())
    }

    /// Maximum auxiliary extent over all sites.
    pub fn bond_dimension(&self) -> usize {
        self.sites
            .iter()
            .flat_map(|s| s.tensor.shape()[1..].iter().copied())
            .max()
            .unwrap_or(1)
    }

    /// Extent of the bond between nearest neighbours `a` and `b`.
    pub fn bond_extent(&self, a: Site, b: Site) -> Result<usize> {
        self.check_site(a)?;
        self.check_site(b)?;
        let (first, axis) = if a.0 == b.0 && a.1.abs_diff(b.1) == 1 {
            (if a.1 < b.1 { a } else { b }, RIGHT)
        } else if a.1 == b.1 && a.0.abs_diff(b.0) == 1 {
            (if a.0 < b.0 { a } else { b }, DOWN)
        } else {
            return Err(Error::invalid(format!(
                "sites {a:?} and {b:?} are not nearest neighbours"
            )));
        };
        Ok(self.site(first).tensor.shape()[axis])
    }

    /// Singular values of the two-site tensor obtained by contracting the
    /// bond between `a` and `b`, split between the two sites. A local
    /// diagnostic of how flat the spectrum across that bond is.
    pub fn bond_spectrum(&self, a: Site, b: Site) -> Result<Vec<f64>> {
        self.bond_extent(a, b)?;
        let (first, second, fa, sa) = if a.0 == b.0 {
            let (l, r) = if a.1 < b.1 { (a, b) } else { (b, a) };
            (l, r, RIGHT, LEFT)
        } else {
            let (u, d) = if a.0 < b.0 { (a, b) } else { (b, a) };
            (u, d, DOWN, UP)
        };
        let joint = tensor::contract_with_guard(
            &self.site(first).tensor,
            &self.site(second).tensor,
            &[(fa, sa)],
            &self.guard,
        )?;
        Ok(tensor::svd(&joint, &[0, 1, 2, 3])?.s)
    }

    /// Checks the boundary and shared-bond invariants.
    pub fn validate(&self) -> Result<()> {
        for s in &self.sites {
            let sh = s.tensor.shape();
            let (r, c) = s.site;
            if sh.len() != 5 || sh[PHYS] != 2 {
                return Err(Error::shape(format!("site {:?} has shape {sh:?}", s.site)));
            }
            let boundary_ok = (c > 0 || sh[LEFT] == 1)
                && (c + 1 < self.cols || sh[RIGHT] == 1)
                && (r > 0 || sh[UP] == 1)
                && (r + 1 < self.rows || sh[DOWN] == 1);
            if !boundary_ok {
                return Err(Error::shape(format!(
                    "boundary extent violated at {:?}",
                    s.site
                )));
            }
            if c + 1 < self.cols && sh[RIGHT] != self.site((r, c + 1)).tensor.shape()[LEFT] {
                return Err(Error::shape(format!(
                    "horizontal bond mismatch at {:?}",
                    s.site
                )));
            }
            if r + 1 < self.rows && sh[DOWN] != self.site((r + 1, c)).tensor.shape()[UP] {
                return Err(Error::shape(format!(
                    "vertical bond mismatch at {:?}",
                    s.site
                )));
            }
        }
        Ok(())
    }
}

/// `out[t, .., (b, k), ..] = sum_s op[t, s, k] * a[s, .., b, ..]`, the
/// bond at `axis` widened by the operator index `k` (old bond index slower).
fn absorb_operator(
    a: &DenseTensor,
    op: &DenseTensor,
    axis: usize,
    guard: &ContractionGuard,
) -> Result<DenseTensor> {
    let shape = a.shape();
    let k = op.shape()[2];
    let pre: usize = shape[1..axis].iter().product();
    let bond = shape[axis];
    let post: usize = shape[axis + 1..].iter().product();
    let mut new_shape = shape.to_vec();
    new_shape[axis] = bond * k;
    guard.check(&new_shape)?;

    let half = a.len() / 2;
    let src = a.data();
    let opd = op.data();
    let mut out = vec![C64::zero(); 2 * half * k];
    let mut o = 0;
    for t in 0..2 {
        for p in 0..pre {
            for b in 0..bond {
                let base = (p * bond + b) * post;
                let s0 = &src[base..base + post];
                let s1 = &src[half + base..half + base + post];
                for kk in 0..k {
                    let c0 = opd[(t * 2) * k + kk];
                    let c1 = opd[(t * 2 + 1) * k + kk];
                    let dst = &mut out[o..o + post];
                    for ((d, x0), x1) in dst.iter_mut().zip(s0).zip(s1) {
                        *d = c0 * x0 + c1 * x1;
                    }
                    o += post;
                }
            }
        }
    }
    DenseTensor::new(new_shape, out)
}
