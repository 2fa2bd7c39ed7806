//! Four-block partitions of square networks.
//!
//! Every site tensor is relabelled by the lattice bonds it touches
//! (boundary legs of extent 1 are dropped), so blocks can be contracted
//! independently and joined by matching labels. Inside a block, sites are
//! absorbed row by row, left to right.

use std::collections::HashMap;

use super::network::ProjectedNetwork;
use super::sweep::Tracker;
use crate::error::{Error, Result};
use crate::tensor::{self, DenseTensor, IndexLabel, C64};

#[derive(Clone, Debug)]
struct Labeled {
    tensor: DenseTensor,
    labels: Vec<IndexLabel>,
}

fn site_tensor(net: &ProjectedNetwork, i: usize, j: usize) -> Result<Labeled> {
    let (rows, cols) = (net.rows(), net.cols());
    let e = net.at((i, j));
    let candidates = [
        (j > 0).then(|| IndexLabel::Horizontal(i, j.wrapping_sub(1))),
        (j + 1 < cols).then_some(IndexLabel::Horizontal(i, j)),
        (i > 0).then(|| IndexLabel::Vertical(i.wrapping_sub(1), j)),
        (i + 1 < rows).then_some(IndexLabel::Vertical(i, j)),
    ];
    let mut shape = Vec::new();
    let mut labels = Vec::new();
    for (axis, label) in candidates.iter().enumerate() {
        if let Some(l) = label {
            shape.push(e.shape()[axis]);
            labels.push(*l);
        }
    }
    Ok(Labeled {
        tensor: e.clone().reshape(shape)?,
        labels,
    })
}

fn join(a: Labeled, b: Labeled, tracker: &mut Tracker) -> Result<Labeled> {
    let pairs: Vec<(usize, usize)> = a
        .labels
        .iter()
        .enumerate()
        .filter_map(|(ia, la)| b.labels.iter().position(|lb| lb == la).map(|ib| (ia, ib)))
        .collect();
    let labels: Vec<IndexLabel> = a
        .labels
        .iter()
        .enumerate()
        .filter(|(ia, _)| !pairs.iter().any(|p| p.0 == *ia))
        .map(|(_, l)| *l)
        .chain(
            b.labels
                .iter()
                .enumerate()
                .filter(|(ib, _)| !pairs.iter().any(|p| p.1 == *ib))
                .map(|(_, l)| *l),
        )
        .collect();
    let k: usize = pairs.iter().map(|&(ia, _)| a.tensor.shape()[ia]).product();
    let out = tensor::contract(&a.tensor, &b.tensor, &pairs)?;
    tracker.alloc(out.len());
    tracker.count(a.tensor.len() / k, k, b.tensor.len() / k);
    tracker.free(a.tensor.len());
    tracker.free(b.tensor.len());
    Ok(Labeled {
        tensor: out,
        labels,
    })
}

/// Contracts the sites of `rows x cols` (half-open ranges) into one tensor.
fn block(
    net: &ProjectedNetwork,
    rows: std::ops::Range<usize>,
    cols: std::ops::Range<usize>,
    tracker: &mut Tracker,
) -> Result<Labeled> {
    let mut acc: Option<Labeled> = None;
    for i in rows {
        for j in cols.clone() {
            let t = site_tensor(net, i, j)?;
            tracker.alloc(t.tensor.len());
            acc = Some(match acc {
                None => t,
                Some(a) => join(a, t, tracker)?,
            });
        }
    }
    acc.ok_or_else(|| Error::shape("empty block"))
}

fn into_scalar(t: Labeled, tracker: &mut Tracker) -> Result<C64> {
    if !t.labels.is_empty() {
        return Err(Error::shape(format!(
            "open legs left after contraction: {:?}",
            t.labels
        )));
    }
    tracker.free(t.tensor.len());
    Ok(t.tensor.data()[0])
}

/// The four quadrants of the even partition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Quadrant {
    UpperLeft,
    UpperRight,
    BottomLeft,
    BottomRight,
}

pub const DEFAULT_QUADRANT_ORDER: [Quadrant; 4] = [
    Quadrant::UpperLeft,
    Quadrant::UpperRight,
    Quadrant::BottomLeft,
    Quadrant::BottomRight,
];

/// Even side `2m`: four `m x m` quadrants, computed in `order`, then
/// joined as `(ul . ur) . (bl . br)`.
pub(crate) fn contract_even(
    net: &ProjectedNetwork,
    order: [Quadrant; 4],
    tracker: &mut Tracker,
) -> Result<C64> {
    let side = net.rows();
    if net.cols() != side || !side.is_multiple_of(2) || side < 2 {
        return Err(Error::shape(format!(
            "even partition needs an even square lattice, got {}x{}",
            net.rows(),
            net.cols()
        )));
    }
    let m = side / 2;
    let mut done = HashMap::new();
    for q in order {
        if done.contains_key(&q) {
            return Err(Error::invalid(format!("quadrant {q:?} listed twice")));
        }
        let (r, c) = match q {
            Quadrant::UpperLeft => (0..m, 0..m),
            Quadrant::UpperRight => (0..m, m..side),
            Quadrant::BottomLeft => (m..side, 0..m),
            Quadrant::BottomRight => (m..side, m..side),
        };
        done.insert(q, block(net, r, c, tracker)?);
    }
    let mut take = |q| {
        done.remove(&q)
            .ok_or_else(|| Error::invalid(format!("quadrant {q:?} missing")))
    };
    let (ul, ur, bl, br) = (
        take(Quadrant::UpperLeft)?,
        take(Quadrant::UpperRight)?,
        take(Quadrant::BottomLeft)?,
        take(Quadrant::BottomRight)?,
    );
    let top = join(ul, ur, tracker)?;
    let bottom = join(bl, br, tracker)?;
    into_scalar(join(top, bottom, tracker)?, tracker)
}

/// Odd side `2m + 1`: upper-left `(m+1) x m`, upper-right `(m+1) x (m+1)`,
/// bottom-left `m x m`, bottom-right `m x (m+1)`. The upper-right block is
/// assembled from its right `(m+1) x m` part, the top `m` sites of its
/// first column, and finally the centre site.
pub(crate) fn contract_odd(net: &ProjectedNetwork, tracker: &mut Tracker) -> Result<C64> {
    let side = net.rows();
    if net.cols() != side || side % 2 != 1 || side < 3 {
        return Err(Error::shape(format!(
            "odd partition needs an odd square lattice of side >= 3, got {}x{}",
            net.rows(),
            net.cols()
        )));
    }
    let m = side / 2;
    let ul = block(net, 0..m + 1, 0..m, tracker)?;

    let right = block(net, 0..m + 1, m + 1..side, tracker)?;
    let column = block(net, 0..m, m..m + 1, tracker)?;
    let merged = join(right, column, tracker)?;
    let centre = site_tensor(net, m, m)?;
    tracker.alloc(centre.tensor.len());
    let ur = join(merged, centre, tracker)?;

    let bl = block(net, m + 1..side, 0..m, tracker)?;
    let br = block(net, m + 1..side, m..side, tracker)?;

    let top = join(ul, ur, tracker)?;
    let bottom = join(bl, br, tracker)?;
    into_scalar(join(top, bottom, tracker)?, tracker)
}

/// Tensor ranks of the four odd-partition blocks: (ul, ur, bl, br).
#[cfg(test)]
pub(crate) fn odd_block_ranks(net: &ProjectedNetwork) -> [usize; 4] {
    let side = net.rows();
    let m = side / 2;
    let mut t = Tracker::default();
    let ul = block(net, 0..m + 1, 0..m, &mut t).unwrap();
    let right = block(net, 0..m + 1, m + 1..side, &mut t).unwrap();
    let column = block(net, 0..m, m..m + 1, &mut t).unwrap();
    let ur = join(
        join(right, column, &mut t).unwrap(),
        site_tensor(net, m, m).unwrap(),
        &mut t,
    )
    .unwrap();
    let bl = block(net, m + 1..side, 0..m, &mut t).unwrap();
    let br = block(net, m + 1..side, m..side, &mut t).unwrap();
    [
        ul.labels.len(),
        ur.labels.len(),
        bl.labels.len(),
        br.labels.len(),
    ]
}
