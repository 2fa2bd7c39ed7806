//! Dense complex tensors.
//!
//! Storage is a flat row-major buffer: the leftmost index varies slowest.
//! Every higher layer states its index orders against this convention.
//!
//! Pairwise contraction is carried out as permute, merge, one dense matrix
//! product, split. Operands whose paired indices already sit contiguously at
//! either end are fed to the matrix kernel through strides without copying.

use std::borrow::Cow;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::Zero;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Default upper bound on the element count of any contraction result
/// (2^30 elements, 16 GiB of complex doubles).
pub const DEFAULT_MAX_ELEMENTS: u128 = 1 << 30;

/// Identifies one index of a tensor placed on the lattice.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IndexLabel {
    /// Physical index of the qubit at `(row, col)`.
    Physical(usize, usize),
    /// Bond between `(row, col)` and `(row, col + 1)`.
    Horizontal(usize, usize),
    /// Bond between `(row, col)` and `(row + 1, col)`.
    Vertical(usize, usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct DenseTensor {
    shape: Vec<usize>,
    data: Vec<C64>,
}

impl DenseTensor {
    pub fn new(shape: Vec<usize>, data: Vec<C64>) -> Result<Self> {
        if shape.contains(&0) {
            return Err(Error::shape(format!("zero extent in shape {shape:?}")));
        }
        let len: usize = shape.iter().product();
        if len != data.len() {
            return Err(Error::shape(format!(
                "shape {shape:?} holds {len} elements, data has {}",
                data.len()
            )));
        }
        Ok(DenseTensor { shape, data })
    }

    pub fn zeros(shape: Vec<usize>) -> Result<Self> {
        let len = shape.iter().product();
        Self::new(shape, vec![C64::zero(); len])
    }

    pub fn scalar(value: C64) -> Self {
        DenseTensor {
            shape: Vec::new(),
            data: vec![value],
        }
    }

    pub fn from_fn(shape: Vec<usize>, mut f: impl FnMut(&[usize]) -> C64) -> Result<Self> {
        let len: usize = shape.iter().product();
        let mut data = Vec::with_capacity(len);
        let mut idx = vec![0usize; shape.len()];
        for _ in 0..len {
            data.push(f(&idx));
            increment(&mut idx, &shape);
        }
        Self::new(shape, data)
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    pub fn strides(&self) -> Vec<usize> {
        strides_of(&self.shape)
    }

    pub fn get(&self, index: &[usize]) -> C64 {
        debug_assert_eq!(index.len(), self.rank());
        let off: usize = index.iter().zip(self.strides()).map(|(&i, s)| i * s).sum();
        self.data[off]
    }

    /// Value of a rank-0 tensor, or of any tensor holding a single element.
    pub fn to_scalar(&self) -> Option<C64> {
        (self.data.len() == 1).then(|| self.data[0])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn scale(&mut self, factor: C64) {
        self.data.iter_mut().for_each(|z| *z *= factor);
    }

    pub fn conj(&self) -> Self {
        DenseTensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    /// Reinterprets the buffer under a new shape with the same element count.
    pub fn reshape(self, shape: Vec<usize>) -> Result<Self> {
        Self::new(shape, self.data)
    }

    /// Result index `k` is source index `order[k]`.
    pub fn permute(&self, order: &[usize]) -> Result<Self> {
        check_permutation(order, self.rank())?;
        if is_identity(order) {
            return Ok(self.clone());
        }
        let shape: Vec<usize> = order.iter().map(|&o| self.shape[o]).collect();
        let src_strides = self.strides();
        let gathered: Vec<usize> = order.iter().map(|&o| src_strides[o]).collect();
        let mut data = Vec::with_capacity(self.data.len());
        let rank = shape.len();
        let inner = shape[rank - 1];
        let inner_stride = gathered[rank - 1];
        let outer_shape = &shape[..rank - 1];
        let mut idx = vec![0usize; rank - 1];
        let outer: usize = outer_shape.iter().product();
        for _ in 0..outer {
            let base: usize = idx.iter().zip(&gathered).map(|(&i, &s)| i * s).sum();
            data.extend((0..inner).map(|k| self.data[base + k * inner_stride]));
            increment(&mut idx, outer_shape);
        }
        Ok(DenseTensor { shape, data })
    }

    /// Fuses consecutive groups of indices. Each group must list ascending,
    /// contiguous positions and the groups must cover `0..rank` in order;
    /// permute first otherwise.
    pub fn merge_indices(&self, groups: &[Vec<usize>]) -> Result<Self> {
        let mut next = 0;
        let mut shape = Vec::with_capacity(groups.len());
        for g in groups {
            if g.is_empty() {
                return Err(Error::shape("empty index group"));
            }
            let mut extent = 1;
            for &p in g {
                if p != next {
                    return Err(Error::shape(format!(
                        "index groups {groups:?} are not an ordered partition of 0..{}",
                        self.rank()
                    )));
                }
                extent *= self.shape[p];
                next += 1;
            }
            shape.push(extent);
        }
        if next != self.rank() {
            return Err(Error::shape(format!(
                "index groups {groups:?} do not cover all {} indices",
                self.rank()
            )));
        }
        Ok(DenseTensor {
            shape,
            data: self.data.clone(),
        })
    }

    /// Inverse of merging: replaces index `axis` by `extents`.
    pub fn split_index(&self, axis: usize, extents: &[usize]) -> Result<Self> {
        if axis >= self.rank() {
            return Err(Error::shape(format!(
                "axis {axis} out of rank {}",
                self.rank()
            )));
        }
        if extents.iter().product::<usize>() != self.shape[axis] {
            return Err(Error::shape(format!(
                "extents {extents:?} do not multiply to {}",
                self.shape[axis]
            )));
        }
        let mut shape = self.shape[..axis].to_vec();
        shape.extend_from_slice(extents);
        shape.extend_from_slice(&self.shape[axis + 1..]);
        Self::new(shape, self.data.clone())
    }
}

pub(crate) fn strides_of(shape: &[usize]) -> Vec<usize> {
    let mut strides = vec![1usize; shape.len()];
    for k in (0..shape.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * shape[k + 1];
    }
    strides
}

fn increment(idx: &mut [usize], shape: &[usize]) {
    for k in (0..idx.len()).rev() {
        idx[k] += 1;
        if idx[k] < shape[k] {
            return;
        }
        idx[k] = 0;
    }
}

fn is_identity(order: &[usize]) -> bool {
    order.iter().enumerate().all(|(k, &o)| k == o)
}

fn check_permutation(order: &[usize], rank: usize) -> Result<()> {
    if order.len() != rank {
        return Err(Error::shape(format!(
            "permutation of length {} applied to rank {rank}",
            order.len()
        )));
    }
    let mut seen = vec![false; rank];
    for &o in order {
        if o >= rank || std::mem::replace(&mut seen[o], true) {
            return Err(Error::shape(format!("{order:?} is not a permutation")));
        }
    }
    Ok(())
}

/// Element-count limit applied to contraction results.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ContractionGuard {
    pub max_elements: u128,
}

impl Default for ContractionGuard {
    fn default() -> Self {
        ContractionGuard {
            max_elements: DEFAULT_MAX_ELEMENTS,
        }
    }
}

impl ContractionGuard {
    pub fn check(&self, shape: &[usize]) -> Result<()> {
        let elements = shape.iter().map(|&e| e as u128).product::<u128>();
        if elements > self.max_elements {
            return Err(Error::ElementGuard {
                elements,
                limit: self.max_elements,
            });
        }
        Ok(())
    }
}

/// Dense matrix operand described by a flat slice and strides.
#[derive(Clone, Copy)]
pub(crate) struct MatRef<'a> {
    pub data: &'a [C64],
    pub rows: usize,
    pub cols: usize,
    pub row_stride: isize,
    pub col_stride: isize,
}

impl<'a> MatRef<'a> {
    pub fn row_major(data: &'a [C64], rows: usize, cols: usize) -> Self {
        MatRef {
            data,
            rows,
            cols,
            row_stride: cols as isize,
            col_stride: 1,
        }
    }

    /// The transpose of a row-major `cols x rows` buffer.
    pub fn transposed(data: &'a [C64], rows: usize, cols: usize) -> Self {
        MatRef {
            data,
            rows,
            cols,
            row_stride: 1,
            col_stride: rows as isize,
        }
    }

    fn max_offset(&self) -> usize {
        if self.rows == 0 || self.cols == 0 {
            return 0;
        }
        (self.rows - 1) * self.row_stride as usize + (self.cols - 1) * self.col_stride as usize
    }
}

/// `out (row-major m x n) = a (m x k) * b (k x n)`, overwriting `out`.
pub(crate) fn matmul_into(a: MatRef<'_>, b: MatRef<'_>, out: &mut [C64]) {
    let (m, k, n) = (a.rows, a.cols, b.cols);
    assert_eq!(k, b.rows, "inner dimensions differ");
    assert_eq!(out.len(), m * n);
    if m == 0 || n == 0 {
        return;
    }
    if k == 0 {
        out.iter_mut().for_each(|z| *z = C64::zero());
        return;
    }
    assert!(a.max_offset() < a.data.len());
    assert!(b.max_offset() < b.data.len());
    // SAFETY: Complex<f64> is repr(C) with the same layout as [f64; 2]; the
    // asserts above keep every strided access inside the operand slices and
    // `out` holds exactly m * n row-major elements.
    unsafe {
        matrixmultiply::zgemm(
            matrixmultiply::CGemmOption::Standard,
            matrixmultiply::CGemmOption::Standard,
            m,
            k,
            n,
            [1.0, 0.0],
            a.data.as_ptr() as *const [f64; 2],
            a.row_stride,
            a.col_stride,
            b.data.as_ptr() as *const [f64; 2],
            b.row_stride,
            b.col_stride,
            [0.0, 0.0],
            out.as_mut_ptr() as *mut [f64; 2],
            n as isize,
            1,
        );
    }
}

/// Contracts `a` and `b` over the listed index pairs with the default guard.
pub fn contract(a: &DenseTensor, b: &DenseTensor, pairs: &[(usize, usize)]) -> Result<DenseTensor> {
    contract_with_guard(a, b, pairs, &ContractionGuard::default())
}

/// The result carries the unpaired indices of `a` in order, then those of `b`.
pub fn contract_with_guard(
    a: &DenseTensor,
    b: &DenseTensor,
    pairs: &[(usize, usize)],
    guard: &ContractionGuard,
) -> Result<DenseTensor> {
    let mut a_paired = vec![false; a.rank()];
    let mut b_paired = vec![false; b.rank()];
    for &(ia, ib) in pairs {
        if ia >= a.rank() || ib >= b.rank() {
            return Err(Error::shape(format!("pair ({ia}, {ib}) out of range")));
        }
        if std::mem::replace(&mut a_paired[ia], true) || std::mem::replace(&mut b_paired[ib], true)
        {
            return Err(Error::shape(format!("index repeated in pairs {pairs:?}")));
        }
        if a.shape[ia] != b.shape[ib] {
            return Err(Error::shape(format!(
                "extent mismatch on pair ({ia}, {ib}): {} vs {}",
                a.shape[ia], b.shape[ib]
            )));
        }
    }
    let a_free: Vec<usize> = (0..a.rank()).filter(|&i| !a_paired[i]).collect();
    let b_free: Vec<usize> = (0..b.rank()).filter(|&i| !b_paired[i]).collect();
    let out_shape: Vec<usize> = a_free
        .iter()
        .map(|&i| a.shape[i])
        .chain(b_free.iter().map(|&i| b.shape[i]))
        .collect();
    guard.check(&out_shape)?;

    let m: usize = a_free.iter().map(|&i| a.shape[i]).product();
    let n: usize = b_free.iter().map(|&i| b.shape[i]).product();
    let k: usize = pairs.iter().map(|&(i, _)| a.shape[i]).product();

    let a_sum: Vec<usize> = pairs.iter().map(|p| p.0).collect();
    let b_sum: Vec<usize> = pairs.iter().map(|p| p.1).collect();

    // a as (free x summed): either already laid out that way, laid out as
    // (summed x free) and read transposed, or permuted into place.
    let a_free_first: Vec<usize> = a_free.iter().chain(&a_sum).copied().collect();
    let a_sum_first: Vec<usize> = a_sum.iter().chain(&a_free).copied().collect();
    let (a_buf, a_trans) = if is_identity(&a_free_first) {
        (Cow::Borrowed(a.data()), false)
    } else if is_identity(&a_sum_first) {
        (Cow::Borrowed(a.data()), true)
    } else {
        (Cow::Owned(a.permute(&a_free_first)?.data), false)
    };
    let b_sum_first: Vec<usize> = b_sum.iter().chain(&b_free).copied().collect();
    let b_free_first: Vec<usize> = b_free.iter().chain(&b_sum).copied().collect();
    let (b_buf, b_trans) = if is_identity(&b_sum_first) {
        (Cow::Borrowed(b.data()), false)
    } else if is_identity(&b_free_first) {
        (Cow::Borrowed(b.data()), true)
    } else {
        (Cow::Owned(b.permute(&b_sum_first)?.data), false)
    };

    let a_mat = if a_trans {
        MatRef::transposed(&a_buf, m, k)
    } else {
        MatRef::row_major(&a_buf, m, k)
    };
    let b_mat = if b_trans {
        MatRef::transposed(&b_buf, k, n)
    } else {
        MatRef::row_major(&b_buf, k, n)
    };
    let mut out = vec![C64::zero(); m * n];
    matmul_into(a_mat, b_mat, &mut out);
    DenseTensor::new(out_shape, out)
}

/// Result of [`svd`]: `U` carries the row indices plus a trailing singular
/// index, `V` a leading singular index plus the column indices.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: DenseTensor,
    pub s: Vec<f64>,
    pub v: DenseTensor,
}

const SVD_EPS: f64 = 5.0 * f64::EPSILON;
const SVD_RESIDUAL_TOL: f64 = 1e-10;

/// Singular value decomposition of the matricization `row_indices x rest`.
/// Singular values are sorted descending; ties keep the solver's order.
pub fn svd(t: &DenseTensor, row_indices: &[usize]) -> Result<Svd> {
    if row_indices.is_empty() || row_indices.len() >= t.rank() {
        return Err(Error::shape(format!(
            "row indices {row_indices:?} must be a nonempty proper subset of 0..{}",
            t.rank()
        )));
    }
    let mut is_row = vec![false; t.rank()];
    for &r in row_indices {
        if r >= t.rank() || std::mem::replace(&mut is_row[r], true) {
            return Err(Error::shape(format!("invalid row indices {row_indices:?}")));
        }
    }
    if t.data
        .iter()
        .any(|z| !z.re.is_finite() || !z.im.is_finite())
    {
        return Err(Error::Numerical("SVD of non-finite tensor".into()));
    }
    let cols: Vec<usize> = (0..t.rank()).filter(|&i| !is_row[i]).collect();
    let order: Vec<usize> = row_indices.iter().chain(&cols).copied().collect();
    let p = t.permute(&order)?;
    let row_ext: Vec<usize> = row_indices.iter().map(|&i| t.shape[i]).collect();
    let col_ext: Vec<usize> = cols.iter().map(|&i| t.shape[i]).collect();
    let m: usize = row_ext.iter().product();
    let n: usize = col_ext.iter().product();

    let mat = DMatrix::from_row_slice(m, n, p.data());
    // a tolerance of exactly one ulp can stall into a wrong factorization
    let dec = mat
        .clone()
        .try_svd(true, true, SVD_EPS, 0)
        .ok_or_else(|| Error::Numerical("SVD did not converge".into()))?;
    let residual = (dec
        .clone()
        .recompose()
        .map_err(|e| Error::Numerical(e.into()))?
        - &mat)
        .norm();
    if residual > SVD_RESIDUAL_TOL * mat.norm().max(f64::MIN_POSITIVE) {
        return Err(Error::Numerical(format!(
            "SVD residual {residual:e} too large"
        )));
    }
    let (u, v_t) = match (dec.u, dec.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => return Err(Error::Numerical("SVD returned no singular vectors".into())),
    };
    let k = m.min(n);
    let mut perm: Vec<usize> = (0..k).collect();
    perm.sort_by(|&x, &y| dec.singular_values[y].total_cmp(&dec.singular_values[x]));
    let s: Vec<f64> = perm.iter().map(|&i| dec.singular_values[i]).collect();

    let mut u_data = Vec::with_capacity(m * k);
    for r in 0..m {
        u_data.extend(perm.iter().map(|&c| u[(r, c)]));
    }
    let mut v_data = Vec::with_capacity(k * n);
    for &r in &perm {
        v_data.extend((0..n).map(|c| v_t[(r, c)]));
    }
    let mut u_shape = row_ext;
    u_shape.push(k);
    let mut v_shape = vec![k];
    v_shape.extend(col_ext);
    Ok(Svd {
        u: DenseTensor::new(u_shape, u_data)?,
        s,
        v: DenseTensor::new(v_shape, v_data)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_tensor(shape: Vec<usize>, rng: &mut impl Rng) -> DenseTensor {
        DenseTensor::from_fn(shape, |_| {
            c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        })
        .unwrap()
    }

    /// Explicit index-sum contraction, independent of the matmul path.
    fn naive_contract(a: &DenseTensor, b: &DenseTensor, pairs: &[(usize, usize)]) -> DenseTensor {
        let a_free: Vec<usize> = (0..a.rank())
            .filter(|i| !pairs.iter().any(|p| p.0 == *i))
            .collect();
        let b_free: Vec<usize> = (0..b.rank())
            .filter(|i| !pairs.iter().any(|p| p.1 == *i))
            .collect();
        let shape: Vec<usize> = a_free
            .iter()
            .map(|&i| a.shape()[i])
            .chain(b_free.iter().map(|&i| b.shape()[i]))
            .collect();
        let sum_shape: Vec<usize> = pairs.iter().map(|p| a.shape()[p.0]).collect();
        DenseTensor::from_fn(shape, |idx| {
            let mut total = C64::zero();
            let count: usize = sum_shape.iter().product();
            let mut s = vec![0usize; sum_shape.len()];
            for _ in 0..count {
                let mut ia = vec![0; a.rank()];
                let mut ib = vec![0; b.rank()];
                for (k, &f) in a_free.iter().enumerate() {
                    ia[f] = idx[k];
                }
                for (k, &f) in b_free.iter().enumerate() {
                    ib[f] = idx[a_free.len() + k];
                }
                for (k, p) in pairs.iter().enumerate() {
                    ia[p.0] = s[k];
                    ib[p.1] = s[k];
                }
                total += a.get(&ia) * b.get(&ib);
                increment(&mut s, &sum_shape);
            }
            total
        })
        .unwrap()
    }

    fn max_abs_diff(x: &DenseTensor, y: &DenseTensor) -> f64 {
        assert_eq!(x.shape(), y.shape());
        x.data()
            .iter()
            .zip(y.data())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn rejects_inconsistent_construction() {
        assert!(DenseTensor::new(vec![2, 2], vec![C64::zero(); 3]).is_err());
        assert!(DenseTensor::new(vec![0], vec![]).is_err());
        assert_eq!(DenseTensor::scalar(c(2.0, 0.0)).len(), 1);
    }

    #[test]
    fn permute_scalar_and_transpose() {
        let s = DenseTensor::scalar(c(3.0, 1.0));
        assert_eq!(s.permute(&[]).unwrap(), s);
        let m = DenseTensor::from_fn(vec![2, 3], |i| c((3 * i[0] + i[1]) as f64, 0.0)).unwrap();
        let t = m.permute(&[1, 0]).unwrap();
        assert_eq!(t.shape(), &[3, 2]);
        for i in 0..2 {
            for j in 0..3 {
                assert_eq!(t.get(&[j, i]), m.get(&[i, j]));
            }
        }
        assert!(m.permute(&[0]).is_err());
        assert!(m.permute(&[0, 0]).is_err());
    }

    #[test]
    fn permute_round_trip_is_bitwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let t = random_tensor(vec![2, 2, 2], &mut rng);
        let order = [2, 0, 1];
        let inverse = [1, 2, 0];
        let back = t.permute(&order).unwrap().permute(&inverse).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn merge_and_split() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let t = random_tensor(vec![2, 3, 4], &mut rng);
        let merged = t.merge_indices(&[vec![0], vec![1, 2]]).unwrap();
        assert_eq!(merged.shape(), &[2, 12]);
        assert_eq!(merged.split_index(1, &[3, 4]).unwrap(), t);

        let v = random_tensor(vec![2], &mut rng);
        assert_eq!(v.merge_indices(&[vec![0]]).unwrap(), v);

        assert!(t.merge_indices(&[vec![0, 1]]).is_err());
        assert!(t.merge_indices(&[vec![0, 2], vec![1]]).is_err());
        assert!(t.merge_indices(&[vec![0], vec![0, 1, 2]]).is_err());
    }

    #[test]
    fn contract_identity_and_dot() {
        let id = DenseTensor::new(
            vec![2, 2],
            vec![c(1., 0.), C64::zero(), C64::zero(), c(1., 0.)],
        )
        .unwrap();
        let v = DenseTensor::new(vec![2], vec![c(1., 0.), c(2., 0.)]).unwrap();
        assert_eq!(contract(&id, &v, &[(1, 0)]).unwrap(), v);

        let a = DenseTensor::new(vec![2], vec![c(1., 1.), c(2., 0.)]).unwrap();
        let b = DenseTensor::new(vec![2], vec![c(3., 0.), c(0., 1.)]).unwrap();
        let s = contract(&a, &b, &[(0, 0)]).unwrap();
        assert_eq!(s.rank(), 0);
        assert_eq!(
            s.to_scalar().unwrap(),
            c(1., 1.) * c(3., 0.) + c(2., 0.) * c(0., 1.)
        );
    }

    #[test]
    fn contract_matches_triple_loop_matmul() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_tensor(vec![3, 4], &mut rng);
        let b = random_tensor(vec![4, 5], &mut rng);
        let got = contract(&a, &b, &[(1, 0)]).unwrap();
        let mut want = DenseTensor::zeros(vec![3, 5]).unwrap();
        for i in 0..3 {
            for j in 0..5 {
                let mut acc = C64::zero();
                for k in 0..4 {
                    acc += a.get(&[i, k]) * b.get(&[k, j]);
                }
                want.data_mut()[i * 5 + j] = acc;
            }
        }
        assert!(max_abs_diff(&got, &want) < 1e-13);
    }

    #[test]
    fn contract_every_operand_layout_agrees_with_naive_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = random_tensor(vec![2, 3, 4], &mut rng);
        let b = random_tensor(vec![4, 2, 3], &mut rng);
        let cases: &[&[(usize, usize)]] = &[
            &[(2, 0)],
            &[(0, 1)],
            &[(1, 2), (0, 1)],
            &[(0, 1), (1, 2)],
            &[(2, 0), (1, 2)],
            &[(0, 1), (1, 2), (2, 0)],
        ];
        for pairs in cases {
            let got = contract(&a, &b, pairs).unwrap();
            let want = naive_contract(&a, &b, pairs);
            assert!(max_abs_diff(&got, &want) < 1e-13, "{pairs:?}");
        }
    }

    #[test]
    fn contract_errors() {
        let a = DenseTensor::zeros(vec![2, 3]).unwrap();
        let b = DenseTensor::zeros(vec![2, 3]).unwrap();
        assert!(matches!(contract(&a, &b, &[(1, 0)]), Err(Error::Shape(_))));
        let guard = ContractionGuard { max_elements: 8 };
        assert!(matches!(
            contract_with_guard(&a, &b, &[], &guard),
            Err(Error::ElementGuard { elements: 36, .. })
        ));
    }

    #[test]
    fn svd_simple_spectra() {
        let id = DenseTensor::new(
            vec![2, 2],
            vec![c(1., 0.), C64::zero(), C64::zero(), c(1., 0.)],
        )
        .unwrap();
        let s = svd(&id, &[0]).unwrap().s;
        assert!((s[0] - 1.0).abs() < 1e-14 && (s[1] - 1.0).abs() < 1e-14);

        let d = DenseTensor::new(
            vec![2, 2],
            vec![c(3., 0.), C64::zero(), C64::zero(), C64::zero()],
        )
        .unwrap();
        let s = svd(&d, &[0]).unwrap().s;
        assert!((s[0] - 3.0).abs() < 1e-14 && s[1].abs() < 1e-14);
    }

    fn reconstruct(dec: &Svd) -> DenseTensor {
        let mut us = dec.u.clone();
        let k = dec.s.len();
        for (i, z) in us.data_mut().iter_mut().enumerate() {
            *z *= dec.s[i % k];
        }
        contract(&us, &dec.v, &[(us.rank() - 1, 0)]).unwrap()
    }

    #[test]
    fn svd_reconstructs_random_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = random_tensor(vec![4, 4], &mut rng);
        let dec = svd(&m, &[0]).unwrap();
        assert!(dec.s.windows(2).all(|w| w[0] >= w[1]));
        assert!(max_abs_diff(&reconstruct(&dec), &m) < 1e-10);
        // orthonormal columns of U
        let uh = dec.u.conj();
        let gram = contract(&uh, &dec.u, &[(0, 0)]).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((gram.get(&[i, j]) - c(want, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn svd_of_higher_rank_tensor_with_scattered_rows() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let t = random_tensor(vec![2, 3, 2], &mut rng);
        let dec = svd(&t, &[0, 2]).unwrap();
        assert_eq!(dec.u.shape(), &[2, 2, 3]);
        assert_eq!(dec.v.shape(), &[3, 3]);
        let back = reconstruct(&dec).permute(&[0, 2, 1]).unwrap();
        assert!(max_abs_diff(&back, &t) < 1e-10);
        assert!(svd(&t, &[]).is_err());
        assert!(svd(&t, &[0, 1, 2]).is_err());
        let bad = DenseTensor::new(vec![1, 2], vec![c(f64::NAN, 0.), C64::zero()]).unwrap();
        assert!(matches!(svd(&bad, &[0]), Err(Error::Numerical(_))));
    }

    fn tensor_strategy(shape: Vec<usize>) -> impl Strategy<Value = DenseTensor> {
        let len: usize = shape.iter().product();
        proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), len).prop_map(move |v| {
            DenseTensor::new(
                shape.clone(),
                v.into_iter().map(|(re, im)| c(re, im)).collect(),
            )
            .unwrap()
        })
    }

    fn rel_diff(x: &DenseTensor, y: &DenseTensor) -> f64 {
        max_abs_diff(x, y) / y.norm_sqr().sqrt().max(1e-300)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn contraction_is_bilinear(a in tensor_strategy(vec![3, 2, 2]),
                                   b in tensor_strategy(vec![2, 4]),
                                   re in -2.0f64..2.0, im in -2.0f64..2.0) {
            let alpha = c(re, im);
            let mut scaled = a.clone();
            scaled.scale(alpha);
            let lhs = contract(&scaled, &b, &[(1, 0)]).unwrap();
            let mut rhs = contract(&a, &b, &[(1, 0)]).unwrap();
            rhs.scale(alpha);
            prop_assert!(rel_diff(&lhs, &rhs) < 1e-12);
        }

        #[test]
        fn contraction_is_associative(a in tensor_strategy(vec![2, 3]),
                                      b in tensor_strategy(vec![3, 4, 2]),
                                      c3 in tensor_strategy(vec![4, 5])) {
            let left = contract(&contract(&a, &b, &[(1, 0)]).unwrap(), &c3, &[(1, 0)]).unwrap();
            let right = contract(&a, &contract(&b, &c3, &[(1, 0)]).unwrap(), &[(1, 0)]).unwrap();
            prop_assert!(rel_diff(&left, &right) < 1e-10);
        }

        #[test]
        fn svd_preserves_frobenius_norm(t in tensor_strategy(vec![2, 3, 2])) {
            let dec = svd(&t, &[1]).unwrap();
            let s2: f64 = dec.s.iter().map(|s| s * s).sum();
            prop_assert!((s2 - t.norm_sqr()).abs() <= 1e-10 * t.norm_sqr().max(1e-300));
        }

        #[test]
        fn permute_keeps_magnitude_multiset(t in tensor_strategy(vec![2, 3, 2])) {
            let p = t.permute(&[2, 0, 1]).unwrap().merge_indices(&[vec![0, 1], vec![2]]).unwrap();
            let mut a: Vec<f64> = t.data().iter().map(|z| z.norm()).collect();
            let mut b: Vec<f64> = p.data().iter().map(|z| z.norm()).collect();
            a.sort_by(f64::total_cmp);
            b.sort_by(f64::total_cmp);
            prop_assert_eq!(a, b);
        }
    }
}
