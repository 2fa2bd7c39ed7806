//! Random circuit generator.
//!
//! Cycle `t` (1-based) applies the CZ configuration `(t - 1) mod 8`. A qubit
//! that is idle at `t` but took part in a CZ at `t - 1` receives a single
//! qubit gate: T if it has not had one yet, otherwise one of
//! {T, X^1/2, Y^1/2} other than its previous gate, chosen by one fair bit.
//!
//! Randomness: ChaCha8 seeded with the circuit seed, one stream per qubit
//! (stream number = row-major qubit index).

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{hadamard_layer, Circuit, Gate, GateKind, Layer};
use crate::error::Result;
use crate::peps::Site;

pub const GENERATOR_NAME: &str = "chacha8-stream-per-qubit";

/// CZ pairs of configuration `t mod 8`.
///
/// Horizontal bond `(i,j)-(i,j+1)` has class `2 (j mod 2) + (i mod 2)`,
/// vertical bond `(i,j)-(i+1,j)` has class `2 (i mod 2) + (j mod 2)`.
/// Configurations alternate horizontal and vertical: h0, v0, h1, v1, .. v3.
pub fn cz_layout(rows: usize, cols: usize, t: usize) -> Vec<(Site, Site)> {
    let config = t % 8;
    let class = config / 2;
    let mut pairs = Vec::new();
    if config.is_multiple_of(2) {
        for i in 0..rows {
            for j in 0..cols.saturating_sub(1) {
                if 2 * (j % 2) + (i % 2) == class {
                    pairs.push(((i, j), (i, j + 1)));
                }
            }
        }
    } else {
        for i in 0..rows.saturating_sub(1) {
            for j in 0..cols {
                if 2 * (i % 2) + (j % 2) == class {
                    pairs.push(((i, j), (i + 1, j)));
                }
            }
        }
    }
    pairs
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Choice {
    T,
    X,
    Y,
}

impl Choice {
    fn kind(self) -> GateKind {
        match self {
            Choice::T => GateKind::T,
            Choice::X => GateKind::XHalf,
            Choice::Y => GateKind::YHalf,
        }
    }

    fn others(self) -> [Choice; 2] {
        match self {
            Choice::T => [Choice::X, Choice::Y],
            Choice::X => [Choice::T, Choice::Y],
            Choice::Y => [Choice::T, Choice::X],
        }
    }
}

pub fn generate_rqc(rows: usize, cols: usize, depth: usize, seed: u64) -> Result<Circuit> {
    let mut circuit = Circuit::new(rows, cols)?;
    circuit.seed = Some(seed);
    circuit.generator = Some(GENERATOR_NAME.to_string());
    let n = rows * cols;
    let mut streams: Vec<ChaCha8Rng> = (0..n)
        .map(|q| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(q as u64);
            rng
        })
        .collect();
    let mut last: Vec<Option<Choice>> = vec![None; n];
    let mut cz_prev = vec![false; n];

    circuit.push_layer(hadamard_layer(rows, cols))?;
    for t in 1..=depth {
        let mut layer = Layer::new();
        let mut cz_now = vec![false; n];
        for (a, b) in cz_layout(rows, cols, t - 1) {
            cz_now[a.0 * cols + a.1] = true;
            cz_now[b.0 * cols + b.1] = true;
            layer.gates.push(Gate::two(GateKind::Cz, a, b));
        }
        for q in 0..n {
            if cz_now[q] || !cz_prev[q] {
                continue;
            }
            let choice = match last[q] {
                None => Choice::T,
                Some(prev) => prev.others()[(streams[q].next_u32() & 1) as usize],
            };
            last[q] = Some(choice);
            layer
                .gates
                .push(Gate::single(choice.kind(), (q / cols, q % cols)));
        }
        cz_prev = cz_now;
        circuit.push_layer(layer)?;
    }
    circuit.push_layer(hadamard_layer(rows, cols))?;
    Ok(circuit)
}
