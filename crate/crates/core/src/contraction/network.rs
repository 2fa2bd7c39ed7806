use crate::bitstring::Bitstring;
use crate::error::{Error, Result};
use crate::peps::{PepsState, Site};
use crate::tensor::{self, DenseTensor};

pub const L: usize = 0;
pub const R: usize = 1;
pub const U: usize = 2;
pub const D: usize = 3;

/// Grid of rank-4 tensors `[left, right, up, down]` with no open physical
/// index: either a PEPS projected onto one configuration or a double-layer
/// (ket times bra) network.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectedNetwork {
    rows: usize,
    cols: usize,
    tensors: Vec<DenseTensor>,
}

impl ProjectedNetwork {
    pub fn new(rows: usize, cols: usize, tensors: Vec<DenseTensor>) -> Result<Self> {
        if rows * cols != tensors.len() || rows == 0 || cols == 0 {
            return Err(Error::shape(format!(
                "{} tensors for a {rows}x{cols} network",
                tensors.len()
            )));
        }
        let net = ProjectedNetwork {
            rows,
            cols,
            tensors,
        };
        net.validate()?;
        Ok(net)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn at(&self, site: Site) -> &DenseTensor {
        &self.tensors[site.0 * self.cols + site.1]
    }

    pub fn at_mut(&mut self, site: Site) -> &mut DenseTensor {
        &mut self.tensors[site.0 * self.cols + site.1]
    }

    /// Largest bond extent.
    pub fn max_bond(&self) -> usize {
        self.tensors
            .iter()
            .flat_map(|t| t.shape().iter().copied())
            .max()
            .unwrap_or(1)
    }

    fn validate(&self) -> Result<()> {
        for r in 0..self.rows {
            for c in 0..self.cols {
                let sh = self.at((r, c)).shape();
                if sh.len() != 4 {
                    return Err(Error::shape(format!(
                        "tensor at ({r}, {c}) has rank {}",
                        sh.len()
                    )));
                }
                if (c == 0 && sh[L] != 1)
                    || (c + 1 == self.cols && sh[R] != 1)
                    || (r == 0 && sh[U] != 1)
                    || (r + 1 == self.rows && sh[D] != 1)
                {
                    return Err(Error::shape(format!(
                        "boundary extent violated at ({r}, {c})"
                    )));
                }
                if c + 1 < self.cols && sh[R] != self.at((r, c + 1)).shape()[L] {
                    return Err(Error::shape(format!(
                        "horizontal bond mismatch at ({r}, {c})"
                    )));
                }
                if r + 1 < self.rows && sh[D] != self.at((r + 1, c)).shape()[U] {
                    return Err(Error::shape(format!(
                        "vertical bond mismatch at ({r}, {c})"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Mirror across the main diagonal: site `(i, j)` moves to `(j, i)`
    /// and left/right trade places with up/down.
    pub fn transposed(&self) -> Result<ProjectedNetwork> {
        let mut tensors = Vec::with_capacity(self.tensors.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                tensors.push(self.at((i, j)).permute(&[U, D, L, R])?);
            }
        }
        Ok(ProjectedNetwork {
            rows: self.cols,
            cols: self.rows,
            tensors,
        })
    }

    /// Mirror left-right.
    pub fn flipped_horizontally(&self) -> Result<ProjectedNetwork> {
        let mut tensors = Vec::with_capacity(self.tensors.len());
        for i in 0..self.rows {
            for j in (0..self.cols).rev() {
                tensors.push(self.at((i, j)).permute(&[R, L, U, D])?);
            }
        }
        Ok(ProjectedNetwork {
            rows: self.rows,
            cols: self.cols,
            tensors,
        })
    }
}

/// Fixes every physical index of `state` to the matching bit of `tau`.
pub fn project(state: &PepsState, tau: &Bitstring) -> Result<ProjectedNetwork> {
    if tau.len() != state.n_qubits() {
        return Err(Error::invalid(format!(
            "configuration of length {} for {} qubits",
            tau.len(),
            state.n_qubits()
        )));
    }
    let tensors = state
        .sites()
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let sh = s.tensor.shape();
            let half = s.tensor.len() / 2;
            let bit = tau.get(k) as usize;
            DenseTensor::new(
                sh[1..].to_vec(),
                s.tensor.data()[bit * half..(bit + 1) * half].to_vec(),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    ProjectedNetwork::new(state.rows(), state.cols(), tensors)
}

/// Network of `sum_s A[s] (x) conj(A[s])` per site with bonds fused as
/// `(ket, bra)`. When `restrict` is given, that site's sum runs over the
/// single listed outcome. Contracting it yields `<psi|P|psi>`.
pub fn double_layer(state: &PepsState, restrict: Option<(Site, u8)>) -> Result<ProjectedNetwork> {
    let mut tensors = Vec::with_capacity(state.n_qubits());
    for s in state.sites() {
        let sh = s.tensor.shape();
        let aux = sh[1..].to_vec();
        let half = s.tensor.len() / 2;
        let outcomes: Vec<usize> = match restrict {
            Some((site, bit)) if site == s.site => vec![bit as usize],
            _ => vec![0, 1],
        };
        let fused: Vec<usize> = aux.iter().map(|e| e * e).collect();
        let mut acc = DenseTensor::zeros(fused.clone())?;
        for sigma in outcomes {
            let ket = DenseTensor::new(
                aux.clone(),
                s.tensor.data()[sigma * half..(sigma + 1) * half].to_vec(),
            )?;
            let bra = ket.conj();
            let outer = tensor::contract(&ket, &bra, &[])?
                .permute(&[0, 4, 1, 5, 2, 6, 3, 7])?
                .reshape(fused.clone())?;
            for (a, b) in acc.data_mut().iter_mut().zip(outer.data()) {
                *a += b;
            }
        }
        tensors.push(acc);
    }
    ProjectedNetwork::new(state.rows(), state.cols(), tensors)
}

/// All-ones scalar network, the projection of `|0..0>` onto itself.
#[cfg(test)]
pub(crate) fn trivial_network(
    rows: usize,
    cols: usize,
    value: crate::tensor::C64,
) -> ProjectedNetwork {
    let mut tensors =
        vec![
            DenseTensor::new(vec![1, 1, 1, 1], vec![crate::tensor::C64::new(1.0, 0.0)]).unwrap();
            rows * cols
        ];
    tensors[0].data_mut()[0] = value;
    ProjectedNetwork {
        rows,
        cols,
        tensors,
    }
}
