//! Single-qubit measurement on a PEPS.
//!
//! The marginal `Z_s = <psi|P_s|psi>` comes from contracting the double-layer
//! network (bond extents squared) with the row sweep. When that does not fit
//! the budget and the lattice is small, the marginal is summed from
//! amplitudes instead.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::Zero;
use rand::Rng;

use super::cost::{estimate_cost_for_chi, MemoryBudget, Orientation, Strategy};
use super::network::double_layer;
use super::sweep::{sweep_rows, Tracker};
use crate::bitstring::Bitstring;
use crate::error::{Error, Result};
use crate::peps::{PepsState, Site};
use crate::tensor::C64;

/// Largest lattice for which the marginal may fall back to enumerating amplitudes.
pub const ENUMERATION_LIMIT: usize = 22;

const UNDERFLOW: f64 = 1e-14;

#[derive(Clone, Debug)]
pub struct Measurement {
    pub outcome: u8,
    /// Probability of `outcome`.
    pub probability: f64,
    pub p0: f64,
    pub p1: f64,
    pub collapsed: PepsState,
}

fn site_index(state: &PepsState, site: Site) -> Result<usize> {
    if site.0 >= state.rows() || site.1 >= state.cols() {
        return Err(Error::invalid(format!(
            "site {site:?} outside {}x{} lattice",
            state.rows(),
            state.cols()
        )));
    }
    Ok(site.0 * state.cols() + site.1)
}

fn weights_double_layer(state: &PepsState, site: Site) -> Result<[f64; 2]> {
    let mut z = [0.0; 2];
    for (s, slot) in z.iter_mut().enumerate() {
        let net = double_layer(state, Some((site, s as u8)))?;
        let net = match Orientation::for_shape(net.rows(), net.cols()) {
            Orientation::Rows => net,
            Orientation::Columns => net.transposed()?,
        };
        let mut tracker = Tracker::default();
        // <psi|P|psi> is real up to rounding
        *slot = sweep_rows(&net, &mut tracker)?.re;
    }
    Ok(z)
}

fn weights_enumerated(state: &PepsState, site: Site, budget: &MemoryBudget) -> Result<[f64; 2]> {
    let n = state.n_qubits();
    let k = site_index(state, site)?;
    let strategy = super::plan_for_state(state, budget)?.strategy;
    let mut z = [0.0; 2];
    for idx in 0..1u64 << n {
        let tau = Bitstring::from_index(idx, n);
        let a: C64 = super::amplitude_with(state, &tau, strategy, budget)?;
        z[tau.get(k) as usize] += a.norm_sqr();
    }
    Ok(z)
}

/// Unnormalized weights `(Z_0, Z_1)` of the two outcomes at `site`.
fn outcome_weights(state: &PepsState, site: Site, budget: &MemoryBudget) -> Result<[f64; 2]> {
    site_index(state, site)?;
    let chi = BigUint::from(state.bond_dimension());
    let report = estimate_cost_for_chi(
        state.rows(),
        state.cols(),
        &(&chi * &chi),
        Strategy::GenericRows,
    )?;
    match budget.reserve(&report) {
        Ok(_reservation) => weights_double_layer(state, site),
        Err(refusal) if state.n_qubits() <= ENUMERATION_LIMIT => {
            drop(refusal);
            weights_enumerated(state, site, budget)
        }
        Err(refusal) => Err(refusal),
    }
}

/// `(P(0), P(1))` for the qubit at `site`.
pub fn marginal_probabilities(
    state: &PepsState,
    site: Site,
    budget: &MemoryBudget,
) -> Result<[f64; 2]> {
    let z = outcome_weights(state, site, budget)?;
    normalize(z, site)
}

fn normalize(z: [f64; 2], site: Site) -> Result<[f64; 2]> {
    let total = z[0] + z[1];
    if total.is_nan() || total < UNDERFLOW {
        return Err(Error::Numerical(format!(
            "both outcome weights at {site:?} vanish (Z0 = {:e}, Z1 = {:e})",
            z[0], z[1]
        )));
    }
    Ok([z[0].max(0.0) / total, z[1].max(0.0) / total])
}

/// Copy of `state` projected onto `outcome` at `site` and rescaled by `1/sqrt(weight)`.
fn collapse(state: &PepsState, site: Site, outcome: u8, weight: f64) -> PepsState {
    let mut out = state.clone();
    let data = out.site_tensor_mut(site).data_mut();
    let half = data.len() / 2;
    let (zero, one) = data.split_at_mut(half);
    let (keep, drop) = if outcome == 0 {
        (zero, one)
    } else {
        (one, zero)
    };
    let scale = 1.0 / weight.sqrt();
    keep.iter_mut().for_each(|a| *a *= scale);
    drop.iter_mut().for_each(|a| *a = C64::zero());
    out
}

/// Samples the qubit at `site` and returns the post-measurement state.
pub fn measure_qubit<R: Rng + ?Sized>(
    state: &PepsState,
    site: Site,
    rng: &mut R,
    budget: &MemoryBudget,
) -> Result<Measurement> {
    let z = outcome_weights(state, site, budget)?;
    let [p0, p1] = normalize(z, site)?;
    let outcome = u8::from(rng.random::<f64>() >= p0);
    let probability = if outcome == 0 { p0 } else { p1 };
    let collapsed = collapse(state, site, outcome, z[outcome as usize]);
    Ok(Measurement {
        outcome,
        probability,
        p0,
        p1,
        collapsed,
    })
}

/// Measures every qubit in row-major order, shot after shot.
///
/// Conditional probabilities and collapsed states are cached per outcome
/// prefix, so repeated shots only contract networks for prefixes not seen
/// before.
pub struct SequentialSampler<'a> {
    budget: &'a MemoryBudget,
    n: usize,
    cols: usize,
    states: HashMap<Vec<u8>, PepsState>,
    conditionals: HashMap<Vec<u8>, [f64; 2]>,
}

impl<'a> SequentialSampler<'a> {
    pub fn new(state: &PepsState, budget: &'a MemoryBudget) -> Self {
        let mut states = HashMap::new();
        states.insert(Vec::new(), state.clone());
        SequentialSampler {
            budget,
            n: state.n_qubits(),
            cols: state.cols(),
            states,
            conditionals: HashMap::new(),
        }
    }

    fn conditional(&mut self, prefix: &[u8]) -> Result<[f64; 2]> {
        if let Some(p) = self.conditionals.get(prefix) {
            return Ok(*p);
        }
        let k = prefix.len();
        let site = (k / self.cols, k % self.cols);
        // a prefix is expanded once, after which only its children are needed
        let state = self
            .states
            .remove(prefix)
            .ok_or_else(|| Error::invalid("outcome prefix has zero probability"))?;
        let z = outcome_weights(&state, site, self.budget)?;
        let p = normalize(z, site)?;
        for outcome in 0..2u8 {
            if z[outcome as usize] > 0.0 && k + 1 < self.n {
                let mut child = prefix.to_vec();
                child.push(outcome);
                let collapsed = collapse(&state, site, outcome, z[outcome as usize]);
                self.states.insert(child, collapsed);
            }
        }
        self.conditionals.insert(prefix.to_vec(), p);
        Ok(p)
    }

    /// One full-lattice shot and its probability.
    pub fn shot<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<(Bitstring, f64)> {
        let mut bits = Vec::with_capacity(self.n);
        let mut probability = 1.0;
        for _ in 0..self.n {
            let [p0, p1] = self.conditional(&bits)?;
            let outcome = u8::from(rng.random::<f64>() >= p0);
            probability *= if outcome == 0 { p0 } else { p1 };
            bits.push(outcome);
        }
        Ok((Bitstring::from_bits(bits)?, probability))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::generate_rqc;
    use crate::gates::hadamard;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn evolve(rows: usize, cols: usize, depth: usize, seed: u64) -> PepsState {
        let c = generate_rqc(rows, cols, depth, seed).unwrap();
        let mut s = PepsState::product(rows, cols, None).unwrap();
        for op in c.ops() {
            s.apply(&op.unwrap()).unwrap();
        }
        s
    }

    #[test]
    fn product_state_measures_zero() {
        let s = PepsState::product(2, 3, None).unwrap();
        let b = MemoryBudget::default();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let m = measure_qubit(&s, (1, 2), &mut rng, &b).unwrap();
        assert_eq!(m.outcome, 0);
        assert_eq!(m.p0, 1.0);
    }

    #[test]
    fn hadamard_is_a_fair_coin() {
        let mut s = PepsState::product(1, 1, None).unwrap();
        s.apply_single_qubit(&hadamard(), (0, 0)).unwrap();
        let p = marginal_probabilities(&s, (0, 0), &MemoryBudget::default()).unwrap();
        assert!((p[0] - 0.5).abs() < 1e-14 && (p[1] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn repeated_measurement_is_stable() {
        let s = evolve(3, 3, 8, 3);
        let b = MemoryBudget::default();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let m = measure_qubit(&s, (1, 1), &mut rng, &b).unwrap();
        assert!((m.p0 + m.p1 - 1.0).abs() < 1e-10);
        let again = measure_qubit(&m.collapsed, (1, 1), &mut rng, &b).unwrap();
        assert_eq!(again.outcome, m.outcome);
        assert!((again.probability - 1.0).abs() < 1e-10);
    }

    #[test]
    fn enumeration_fallback_agrees() {
        let s = evolve(3, 3, 8, 6);
        let roomy = MemoryBudget::default();
        let want = marginal_probabilities(&s, (2, 0), &roomy).unwrap();
        // too small for the double layer, large enough for single amplitudes
        let single = estimate_cost_for_chi(
            3,
            3,
            &BigUint::from(s.bond_dimension()),
            Strategy::SquareOdd,
        )
        .unwrap();
        let tight = MemoryBudget::new(u64::try_from(&single.space_bytes).unwrap());
        let got = weights_enumerated(&s, (2, 0), &tight).unwrap();
        let got = normalize(got, (2, 0)).unwrap();
        assert!((want[0] - got[0]).abs() < 1e-10);
        assert!(outcome_weights(&s, (2, 0), &tight).is_ok());
    }

    #[test]
    fn zero_state_underflows() {
        let mut s = PepsState::product(1, 2, None).unwrap();
        s.site_tensor_mut((0, 0))
            .data_mut()
            .iter_mut()
            .for_each(|a| *a = C64::zero());
        assert!(matches!(
            marginal_probabilities(&s, (0, 1), &MemoryBudget::default()),
            Err(Error::Numerical(_))
        ));
    }

    #[test]
    fn sampler_probabilities_are_consistent() {
        let s = evolve(2, 2, 8, 1);
        let b = MemoryBudget::default();
        let mut sampler = SequentialSampler::new(&s, &b);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let (tau, p) = sampler.shot(&mut rng).unwrap();
            let a = super::super::amplitude(&s, &tau, &b).unwrap();
            assert!((a.norm_sqr() - p).abs() < 1e-10);
        }
    }
}
