//! Exact amplitudes `<tau|psi>` by contracting the projected network.

pub mod cost;
mod measure;
mod network;
mod square;
mod sweep;

pub use cost::{
    applicable_strategies, estimate_bristlecone, estimate_cost, estimate_cost_for_chi,
    parse_byte_size, plan_contraction, plan_for_chi, ContractionPlan, CostReport, MemoryBudget,
    Orientation, Strategy,
};
pub use measure::{marginal_probabilities, measure_qubit, Measurement, SequentialSampler};
pub use network::{double_layer, project, ProjectedNetwork};
pub use square::{Quadrant, DEFAULT_QUADRANT_ORDER};
pub use sweep::ContractionStats;

use num_bigint::BigUint;

use crate::bitstring::Bitstring;
use crate::error::Result;
use crate::peps::PepsState;
use crate::tensor::C64;
use sweep::Tracker;

/// Scalar produced by a contraction together with its instrumentation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Contracted {
    pub value: C64,
    pub stats: ContractionStats,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AmplitudeRecord {
    pub tau: Bitstring,
    pub amplitude: C64,
    pub probability: f64,
}

fn price(net: &ProjectedNetwork, strategy: Strategy) -> Result<CostReport> {
    estimate_cost_for_chi(
        net.rows(),
        net.cols(),
        &BigUint::from(net.max_bond()),
        strategy,
    )
}

/// Generic sweep: top-down over rows when `rows >= cols`, otherwise left to
/// right over columns, so the boundary spans the shorter side.
pub fn contract_generic(net: &ProjectedNetwork, budget: &MemoryBudget) -> Result<Contracted> {
    contract_generic_oriented(net, Orientation::for_shape(net.rows(), net.cols()), budget)
}

/// Generic sweep in a forced direction. The budget check still uses the
/// closed form for the shorter side, so forcing the long direction is only
/// meant for cross-checks on small networks.
pub fn contract_generic_oriented(
    net: &ProjectedNetwork,
    orientation: Orientation,
    budget: &MemoryBudget,
) -> Result<Contracted> {
    let _reservation = budget.reserve(&price(net, Strategy::GenericRows)?)?;
    let mut tracker = Tracker::default();
    let value = match orientation {
        Orientation::Rows => sweep::sweep_rows(net, &mut tracker)?,
        Orientation::Columns => sweep::sweep_rows(&net.transposed()?, &mut tracker)?,
    };
    Ok(Contracted {
        value,
        stats: tracker.stats,
    })
}

pub fn contract_square_even(net: &ProjectedNetwork, budget: &MemoryBudget) -> Result<Contracted> {
    contract_square_even_ordered(net, DEFAULT_QUADRANT_ORDER, budget)
}

/// Even partition with the four quadrant tensors computed in `order`.
pub fn contract_square_even_ordered(
    net: &ProjectedNetwork,
    order: [Quadrant; 4],
    budget: &MemoryBudget,
) -> Result<Contracted> {
    let _reservation = budget.reserve(&price(net, Strategy::SquareEven)?)?;
    let mut tracker = Tracker::default();
    let value = square::contract_even(net, order, &mut tracker)?;
    Ok(Contracted {
        value,
        stats: tracker.stats,
    })
}

pub fn contract_square_odd(net: &ProjectedNetwork, budget: &MemoryBudget) -> Result<Contracted> {
    let _reservation = budget.reserve(&price(net, Strategy::SquareOdd)?)?;
    let mut tracker = Tracker::default();
    let value = square::contract_odd(net, &mut tracker)?;
    Ok(Contracted {
        value,
        stats: tracker.stats,
    })
}

pub fn contract_with(
    net: &ProjectedNetwork,
    strategy: Strategy,
    budget: &MemoryBudget,
) -> Result<Contracted> {
    match strategy {
        Strategy::GenericRows => contract_generic(net, budget),
        Strategy::SquareEven => contract_square_even(net, budget),
        Strategy::SquareOdd => contract_square_odd(net, budget),
    }
}

/// Plan for contracting projections of `state` under `budget`.
pub fn plan_for_state(state: &PepsState, budget: &MemoryBudget) -> Result<ContractionPlan> {
    plan_for_chi(
        state.rows(),
        state.cols(),
        &BigUint::from(state.bond_dimension()),
        budget.limit(),
    )
}

/// `<tau|psi>` with the planned strategy.
pub fn amplitude(state: &PepsState, tau: &Bitstring, budget: &MemoryBudget) -> Result<C64> {
    let plan = plan_for_state(state, budget)?;
    amplitude_with(state, tau, plan.strategy, budget)
}

pub fn amplitude_with(
    state: &PepsState,
    tau: &Bitstring,
    strategy: Strategy,
    budget: &MemoryBudget,
) -> Result<C64> {
    let net = project(state, tau)?;
    Ok(contract_with(&net, strategy, budget)?.value)
}

pub fn amplitude_record(
    state: &PepsState,
    tau: &Bitstring,
    strategy: Strategy,
    budget: &MemoryBudget,
) -> Result<AmplitudeRecord> {
    let amplitude = amplitude_with(state, tau, strategy, budget)?;
    Ok(AmplitudeRecord {
        tau: tau.clone(),
        amplitude,
        probability: amplitude.norm_sqr(),
    })
}

/// Every amplitude of a small state, indexed by basis number.
pub fn all_amplitudes(state: &PepsState, budget: &MemoryBudget) -> Result<Vec<C64>> {
    let n = state.n_qubits();
    if n > 30 {
        return Err(crate::error::Error::invalid(format!(
            "{n} qubits are too many to enumerate"
        )));
    }
    let strategy = plan_for_state(state, budget)?.strategy;
    (0..1u64 << n)
        .map(|idx| amplitude_with(state, &Bitstring::from_index(idx, n), strategy, budget))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::generate_rqc;
    use crate::gates::{cz, hadamard};
    use std::f64::consts::FRAC_1_SQRT_2;

    fn evolve(rows: usize, cols: usize, depth: usize, seed: u64) -> PepsState {
        let c = generate_rqc(rows, cols, depth, seed).unwrap();
        let mut s = PepsState::product(rows, cols, None).unwrap();
        for op in c.ops() {
            s.apply(&op.unwrap()).unwrap();
        }
        s
    }

    #[test]
    fn single_hadamard_amplitude() {
        let mut s = PepsState::product(1, 1, None).unwrap();
        s.apply_single_qubit(&hadamard(), (0, 0)).unwrap();
        let b = MemoryBudget::default();
        let a = amplitude(&s, &Bitstring::zeros(1), &b).unwrap();
        assert!((a - C64::new(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn hadamard_sandwich_is_delta() {
        for side in [2usize, 3] {
            let s = evolve(side, side, 0, 0);
            let b = MemoryBudget::default();
            let n = side * side;
            for strategy in cost::applicable_strategies(side, side) {
                for idx in [0u64, 1, 5] {
                    let a =
                        amplitude_with(&s, &Bitstring::from_index(idx, n), strategy, &b).unwrap();
                    let want = if idx == 0 { 1.0 } else { 0.0 };
                    assert!(
                        (a - C64::new(want, 0.0)).norm() < 1e-12,
                        "{strategy:?} {idx}"
                    );
                }
            }
        }
    }

    #[test]
    fn uniform_superposition_after_first_layer() {
        let mut s = PepsState::product(2, 3, None).unwrap();
        for r in 0..2 {
            for c in 0..3 {
                s.apply_single_qubit(&hadamard(), (r, c)).unwrap();
            }
        }
        let b = MemoryBudget::default();
        for a in all_amplitudes(&s, &b).unwrap() {
            assert!((a - C64::new(0.125, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn strategies_and_orientations_agree() {
        let b = MemoryBudget::default();
        for (side, depth) in [(4usize, 16usize), (3, 8), (5, 8)] {
            let s = evolve(side, side, depth, 5);
            for idx in [0u64, 7, 1234 % (1 << (side * side))] {
                let net = project(&s, &Bitstring::from_index(idx, side * side)).unwrap();
                let g = contract_generic(&net, &b).unwrap().value;
                let gc = contract_generic_oriented(&net, Orientation::Columns, &b)
                    .unwrap()
                    .value;
                assert!((g - gc).norm() <= 1e-10 * g.norm().max(1e-300));
                let sq = if side % 2 == 0 {
                    contract_square_even(&net, &b).unwrap().value
                } else {
                    contract_square_odd(&net, &b).unwrap().value
                };
                assert!(
                    (g - sq).norm() <= 1e-10 * g.norm().max(1e-300),
                    "{side} {idx}: {g} vs {sq}"
                );
            }
        }
    }

    #[test]
    fn quadrant_order_does_not_matter() {
        let b = MemoryBudget::default();
        let s = evolve(4, 4, 16, 9);
        let net = project(&s, &Bitstring::from_index(4321, 16)).unwrap();
        let base = contract_square_even(&net, &b).unwrap().value;
        let order = [
            Quadrant::BottomRight,
            Quadrant::UpperRight,
            Quadrant::BottomLeft,
            Quadrant::UpperLeft,
        ];
        let permuted = contract_square_even_ordered(&net, order, &b).unwrap().value;
        assert!((base - permuted).norm() <= 1e-12 * base.norm());
        let dup = [Quadrant::UpperLeft; 4];
        assert!(contract_square_even_ordered(&net, dup, &b).is_err());
    }

    #[test]
    fn odd_partition_block_ranks() {
        for side in [3usize, 5] {
            let s = evolve(side, side, 8, 1);
            let net = project(&s, &Bitstring::zeros(side * side)).unwrap();
            assert_eq!(
                square::odd_block_ranks(&net),
                [side, side + 1, side - 1, side]
            );
        }
    }

    #[test]
    fn sweep_peak_stays_within_twice_the_estimate() {
        let b = MemoryBudget::default();
        for (rows, cols, depth) in [(4usize, 4usize, 16usize), (3, 5, 16), (5, 3, 8), (4, 5, 24)] {
            let s = evolve(rows, cols, depth, 2);
            let net = project(&s, &Bitstring::zeros(rows * cols)).unwrap();
            let predicted = estimate_cost(rows, cols, depth, Strategy::GenericRows)
                .unwrap()
                .space_elements;
            let got = contract_generic(&net, &b).unwrap();
            assert!(BigUint::from(got.stats.peak_elements) <= predicted * 2u32);
        }
    }

    #[test]
    fn budget_refusal_carries_report() {
        let mut s = PepsState::product(2, 2, None).unwrap();
        s.apply_two_qubit(&cz(), (0, 0), (0, 1)).unwrap();
        let tiny = MemoryBudget::new(16);
        match amplitude(&s, &Bitstring::zeros(4), &tiny) {
            Err(crate::error::Error::BudgetExceeded {
                report,
                budget_bytes,
            }) => {
                assert_eq!(budget_bytes, 16);
                assert!(report.space_bytes > BigUint::from(16u32));
            }
            other => panic!("expected refusal, got {other:?}"),
        }
    }

    #[test]
    fn scaling_one_site_scales_the_amplitude() {
        let b = MemoryBudget::default();
        let s = evolve(3, 3, 8, 4);
        let mut net = project(&s, &Bitstring::from_index(77, 9)).unwrap();
        let base = contract_generic(&net, &b).unwrap().value;
        let alpha = C64::new(0.3, -1.7);
        net.at_mut((1, 2)).scale(alpha);
        let scaled = contract_generic(&net, &b).unwrap().value;
        assert!((scaled - alpha * base).norm() <= 1e-12 * (alpha * base).norm());
    }
}
