//! Brute-force state-vector simulator used as ground truth.
//!
//! Gates act directly on basis indices. Site `(i, j)` is bit
//! `N - 1 - (i * cols + j)` of the index, matching [`Bitstring`] order.

use num_traits::{One, Zero};

use crate::bitstring::Bitstring;
use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::gates::{Mat2, Mat4};
use crate::peps::{GateOp, Site};
use crate::tensor::C64;

/// Default qubit limit (2^24 amplitudes, 256 MiB).
pub const DEFAULT_ORACLE_LIMIT: usize = 24;

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    cols: usize,
    amplitudes: Vec<C64>,
}

impl StateVector {
    /// `|0..0>` on a `rows x cols` lattice.
    pub fn zeros(rows: usize, cols: usize, limit: usize) -> Result<Self> {
        let n_qubits = rows * cols;
        if n_qubits > limit || n_qubits >= 64 {
            return Err(Error::OracleLimit { n_qubits, limit });
        }
        let mut amplitudes = vec![C64::zero(); 1usize << n_qubits];
        amplitudes[0] = C64::one();
        Ok(StateVector {
            n_qubits,
            cols,
            amplitudes,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, tau: &Bitstring) -> Result<C64> {
        if tau.len() != self.n_qubits {
            return Err(Error::invalid(format!(
                "configuration of length {} for {} qubits",
                tau.len(),
                self.n_qubits
            )));
        }
        Ok(self.amplitudes[tau.to_index() as usize])
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    fn mask(&self, site: Site) -> usize {
        1usize << (self.n_qubits - 1 - (site.0 * self.cols + site.1))
    }

    pub fn apply_single(&mut self, gate: &Mat2, site: Site) {
        let m = self.mask(site);
        let [u00, u01, u10, u11] = gate.0;
        for i in 0..self.amplitudes.len() {
            if i & m == 0 {
                let (x0, x1) = (self.amplitudes[i], self.amplitudes[i | m]);
                self.amplitudes[i] = u00 * x0 + u01 * x1;
                self.amplitudes[i | m] = u10 * x0 + u11 * x1;
            }
        }
    }

    /// `gate` row `2 t_a + t_b`, column `2 s_a + s_b`.
    pub fn apply_two(&mut self, gate: &Mat4, a: Site, b: Site) {
        let (ma, mb) = (self.mask(a), self.mask(b));
        let idx = [0, mb, ma, ma | mb];
        for i in 0..self.amplitudes.len() {
            if i & (ma | mb) == 0 {
                let x = idx.map(|o| self.amplitudes[i | o]);
                for (r, &o) in idx.iter().enumerate() {
                    self.amplitudes[i | o] = (0..4).map(|c| gate.at(r, c) * x[c]).sum();
                }
            }
        }
    }

    pub fn apply(&mut self, op: &GateOp) {
        match op {
            GateOp::Single { matrix, site } => self.apply_single(matrix, *site),
            GateOp::Two { matrix, a, b } => self.apply_two(matrix, *a, *b),
        }
    }
}

/// Runs `circuit` on `|0..0>` with the default qubit limit.
pub fn simulate_statevector(circuit: &Circuit) -> Result<StateVector> {
    simulate_statevector_with_limit(circuit, DEFAULT_ORACLE_LIMIT)
}

pub fn simulate_statevector_with_limit(circuit: &Circuit, limit: usize) -> Result<StateVector> {
    let mut sv = StateVector::zeros(circuit.rows(), circuit.cols(), limit)?;
    for op in circuit.ops() {
        sv.apply(&op?);
    }
    Ok(sv)
}
