use peps_core::circuit::{generate_rqc, hadamard_layer, Circuit, Gate, GateKind, Layer};
use peps_core::contraction::{
    all_amplitudes, amplitude_with, applicable_strategies, marginal_probabilities, MemoryBudget,
    SequentialSampler, Strategy,
};
use peps_core::gates::{swap, Mat2, Mat4};
use peps_core::oracle::{simulate_statevector, simulate_statevector_with_limit};
use peps_core::{amplitude, evolve, Bitstring, C64};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

/// Deviation scaled by the typical amplitude size `2^{-N/2}`, so that
/// amplitudes which happen to be tiny are not judged on their own scale.
fn scaled_dev(a: C64, b: C64, n: usize) -> f64 {
    (a - b).norm() / b.norm().max(2f64.powf(-(n as f64) / 2.0))
}

fn random_unitary2(rng: &mut ChaCha8Rng) -> Mat2 {
    let (a, b, c) = (
        rng.random::<f64>() * 6.3,
        rng.random::<f64>() * 6.3,
        rng.random::<f64>() * 1.57,
    );
    let e = |t: f64| C64::from_polar(1.0, t);
    Mat2([
        e(a) * c.cos(),
        e(b) * c.sin(),
        -e(-b) * c.sin(),
        e(-a) * c.cos(),
    ])
}

/// Dense random unitary by Gram-Schmidt on a random complex matrix.
fn random_unitary4(rng: &mut ChaCha8Rng) -> Mat4 {
    let mut cols: Vec<[C64; 4]> = Vec::new();
    while cols.len() < 4 {
        let mut v = [C64::new(0.0, 0.0); 4];
        for x in v.iter_mut() {
            *x = C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
        }
        for q in &cols {
            let dot: C64 = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (x, a) in v.iter_mut().zip(q) {
                *x -= dot * a;
            }
        }
        let n = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if n > 1e-6 {
            cols.push(v.map(|x| x / n));
        }
    }
    let mut m = [C64::new(0.0, 0.0); 16];
    for (c, col) in cols.iter().enumerate() {
        for (r, x) in col.iter().enumerate() {
            m[4 * r + c] = *x;
        }
    }
    Mat4(m)
}

/// Random brickwork of dense unitaries on both bond orientations, with the
/// site order of each pair chosen at random.
fn random_unitary_circuit(rows: usize, cols: usize, layers: usize, seed: u64) -> Circuit {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = Circuit::new(rows, cols).unwrap();
    c.push_layer(hadamard_layer(rows, cols)).unwrap();
    for t in 0..layers {
        let mut l = Layer::new();
        for i in 0..rows {
            for j in 0..cols {
                let (a, b) = if t % 2 == 0 {
                    if j % 2 != (t / 2) % 2 || j + 1 >= cols {
                        continue;
                    }
                    ((i, j), (i, j + 1))
                } else {
                    if i % 2 != (t / 2) % 2 || i + 1 >= rows {
                        continue;
                    }
                    ((i, j), (i + 1, j))
                };
                let (a, b) = if rng.random::<bool>() { (a, b) } else { (b, a) };
                let kind = if rng.random::<f64>() < 0.2 {
                    GateKind::Custom2(swap())
                } else {
                    GateKind::Custom2(random_unitary4(&mut rng))
                };
                l.try_push(Gate::two(kind, a, b)).unwrap();
            }
        }
        c.push_layer(l).unwrap();
        let mut l = Layer::new();
        for i in 0..rows {
            for j in 0..cols {
                l.try_push(Gate::single(
                    GateKind::Custom1(random_unitary2(&mut rng)),
                    (i, j),
                ))
                .unwrap();
            }
        }
        c.push_layer(l).unwrap();
    }
    c
}

#[test]
fn projection_reproduces_every_amplitude_of_a_3x3_state() {
    let c = generate_rqc(3, 3, 10, 17).unwrap();
    let state = evolve(&c).unwrap();
    let sv = simulate_statevector(&c).unwrap();
    let budget = MemoryBudget::default();
    let got = all_amplitudes(&state, &budget).unwrap();
    assert_eq!(got.len(), 512);
    for (a, b) in got.iter().zip(sv.amplitudes()) {
        assert!(scaled_dev(*a, *b, 9) < 1e-10);
    }
}

#[test]
fn dense_random_unitaries_match_the_oracle() {
    let budget = MemoryBudget::default();
    for (rows, cols, layers, seed) in [(2, 3, 6, 1u64), (3, 3, 4, 2), (3, 2, 6, 3)] {
        let c = random_unitary_circuit(rows, cols, layers, seed);
        let state = evolve(&c).unwrap();
        let sv = simulate_statevector(&c).unwrap();
        let n = rows * cols;
        for strategy in applicable_strategies(rows, cols) {
            for idx in 0..1u64 << n {
                let tau = Bitstring::from_index(idx, n);
                let a = amplitude_with(&state, &tau, strategy, &budget).unwrap();
                assert!(
                    scaled_dev(a, sv.amplitude(&tau).unwrap(), n) < 1e-10,
                    "{rows}x{cols} {strategy:?} {idx}"
                );
            }
        }
    }
}

#[test]
fn wide_lattice_random_amplitudes_match_the_oracle() {
    let c = generate_rqc(4, 5, 16, 23).unwrap();
    let state = evolve(&c).unwrap();
    let sv = simulate_statevector(&c).unwrap();
    let budget = MemoryBudget::default();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..100 {
        let tau = Bitstring::from_index(rng.random_range(0..1u64 << 20), 20);
        let a = amplitude(&state, &tau, &budget).unwrap();
        assert!(scaled_dev(a, sv.amplitude(&tau).unwrap(), 20) < 1e-10);
    }
}

#[test]
fn odd_square_of_side_five_matches_the_oracle() {
    let c = generate_rqc(5, 5, 8, 4).unwrap();
    let state = evolve(&c).unwrap();
    let sv = simulate_statevector_with_limit(&c, 25).unwrap();
    let budget = MemoryBudget::default();
    let tau = Bitstring::from_index(0x1_5a5a5a, 25);
    let want = sv.amplitude(&tau).unwrap();
    for strategy in [Strategy::SquareOdd, Strategy::GenericRows] {
        let a = amplitude_with(&state, &tau, strategy, &budget).unwrap();
        assert!(rel(a, want) < 1e-10, "{strategy:?}: {a} vs {want}");
    }
}

#[test]
fn conjugated_circuit_conjugates_amplitudes() {
    let c = generate_rqc(3, 4, 12, 8).unwrap();
    let state = evolve(&c).unwrap();
    let conj = evolve(&c.conjugated().unwrap()).unwrap();
    let budget = MemoryBudget::default();
    for idx in [0u64, 1, 777, 4095] {
        let tau = Bitstring::from_index(idx, 12);
        let a = amplitude(&state, &tau, &budget).unwrap();
        let b = amplitude(&conj, &tau, &budget).unwrap();
        assert!((a.conj() - b).norm() <= 1e-12 * a.norm().max(1e-300) + 1e-15);
    }
}

#[test]
fn marginals_equal_summed_oracle_probabilities() {
    let c = generate_rqc(4, 4, 16, 12).unwrap();
    let state = evolve(&c).unwrap();
    let probs = simulate_statevector(&c).unwrap().probabilities();
    let budget = MemoryBudget::default();
    for site in [(0, 0), (1, 2), (3, 3)] {
        let k = site.0 * 4 + site.1;
        let p0: f64 = probs
            .iter()
            .enumerate()
            .filter(|(i, _)| (i >> (15 - k)) & 1 == 0)
            .map(|(_, p)| p)
            .sum();
        let got = marginal_probabilities(&state, site, &budget).unwrap();
        assert!((got[0] - p0).abs() < 1e-10, "{site:?}: {} vs {p0}", got[0]);
        assert!((got[0] + got[1] - 1.0).abs() < 1e-10);
    }
}

#[test]
fn sequential_sampling_probabilities_match_the_oracle() {
    let c = generate_rqc(3, 3, 8, 30).unwrap();
    let state = evolve(&c).unwrap();
    let probs = simulate_statevector(&c).unwrap().probabilities();
    let budget = MemoryBudget::default();
    let mut sampler = SequentialSampler::new(&state, &budget);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..200 {
        let (tau, p) = sampler.shot(&mut rng).unwrap();
        assert!((probs[tau.to_index() as usize] - p).abs() < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn oracle_norm_is_preserved(rows in 1usize..4, cols in 1usize..5, depth in 0usize..20, seed in any::<u64>()) {
        let c = generate_rqc(rows, cols, depth, seed).unwrap();
        let sv = simulate_statevector(&c).unwrap();
        prop_assert!((sv.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn peps_matches_oracle_on_random_circuits(rows in 1usize..4, cols in 1usize..4, depth in 0usize..17, seed in any::<u64>(), pick in any::<u64>()) {
        let c = generate_rqc(rows, cols, depth, seed).unwrap();
        let state = evolve(&c).unwrap();
        let sv = simulate_statevector(&c).unwrap();
        let n = rows * cols;
        let tau = Bitstring::from_index(pick % (1 << n), n);
        let a = amplitude(&state, &tau, &MemoryBudget::default()).unwrap();
        prop_assert!(scaled_dev(a, sv.amplitude(&tau).unwrap(), n) < 1e-10);
    }
}
