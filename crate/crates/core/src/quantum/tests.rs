use std::f64::consts::{FRAC_1_SQRT_2, PI};

use proptest::prelude::*;
use rand::Rng;

use super::*;
use crate::error::Error;
use crate::rng::seeded;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

fn random_state(n: usize, seed: u64) -> StateVector {
    haar_random_state(n, &mut seeded(seed)).unwrap()
}

/// Convex mixture of a few Haar states with random weights (full rank whp).
fn random_mixed(n: usize, seed: u64) -> DensityMatrix {
    let mut rng = seeded(seed);
    let d = 1usize << n;
    let k = d + 1;
    let weights: Vec<f64> = (0..k).map(|_| rng.random::<f64>() + 0.01).collect();
    let total: f64 = weights.iter().sum();
    let mut m = CMatrix::zeros(d, d);
    for w in weights {
        let psi = haar_random_state(n, &mut rng).unwrap();
        m += psi.to_density().into_matrix() * c(w / total);
    }
    DensityMatrix::new(n, m).unwrap()
}

#[test]
fn rx_zero_is_identity() {
    let psi = random_state(3, 1);
    let out = apply_gate(&psi, &Gate::Rx { qubit: 1, angle: 0.0 }).unwrap();
    for (a, b) in psi.amplitudes().iter().zip(out.amplitudes()) {
        assert!((a - b).norm() < 1e-15);
    }
}

#[test]
fn ry_pi_flips_zero_to_one() {
    // Direct product of the 2x2 matrix [[cos, -sin], [sin, cos]] at pi/2.
    let (s, co) = (PI / 2.0).sin_cos();
    let expected = [co * 1.0 + (-s) * 0.0, s * 1.0 + co * 0.0];
    let out = apply_gate(&StateVector::zero(1).unwrap(), &Gate::Ry { qubit: 0, angle: PI }).unwrap();
    assert!((out.amplitudes()[0].re - expected[0]).abs() < 1e-15);
    assert!((out.amplitudes()[1].re - expected[1]).abs() < 1e-15);
    assert!((fidelity(&out, &StateVector::basis(1, 1).unwrap()).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn cz_negates_one_one() {
    let out = apply_gate(&StateVector::basis(2, 3).unwrap(), &Gate::CZ { a: 0, b: 1 }).unwrap();
    assert_eq!(out.amplitudes()[3], c(-1.0));
}

#[test]
fn gate_index_out_of_range() {
    let err = apply_gate(&StateVector::zero(2).unwrap(), &Gate::Hadamard { qubit: 2 }).unwrap_err();
    assert_eq!(
        err,
        Error::QubitOutOfRange {
            index: 2,
            num_qubits: 2
        }
    );
}

#[test]
fn qubit_zero_is_most_significant() {
    let out = apply_gate(&StateVector::zero(3).unwrap(), &Gate::Ry { qubit: 0, angle: PI }).unwrap();
    assert!((out.amplitudes()[0b100].re - 1.0).abs() < 1e-12);
}

#[test]
fn gates_agree_with_full_matrix_embedding() {
    let n = 3;
    let psi = random_state(n, 5);
    let id2 = CMatrix::identity(2, 2);
    let g = Gate::Rx { qubit: 1, angle: 0.9 };
    let full = kron(&kron(&id2, &g.matrix()), &id2);
    let mut expect = psi.clone();
    expect.apply_unitary(&full).unwrap();
    let got = apply_gate(&psi, &g).unwrap();
    for (a, b) in expect.amplitudes().iter().zip(got.amplitudes()) {
        assert!((a - b).norm() < 1e-12);
    }
    let cnot = Gate::CNOT { control: 0, target: 1 };
    let full = kron(&cnot.matrix(), &id2);
    let mut expect = psi.clone();
    expect.apply_unitary(&full).unwrap();
    let got = apply_gate(&psi, &cnot).unwrap();
    for (a, b) in expect.amplitudes().iter().zip(got.amplitudes()) {
        assert!((a - b).norm() < 1e-12);
    }
}

#[test]
fn fidelity_examples() {
    let psi = random_state(2, 3);
    assert!((fidelity(&psi, &psi).unwrap() - 1.0).abs() < 1e-12);
    let zero = StateVector::zero(1).unwrap();
    let one = StateVector::basis(1, 1).unwrap();
    assert_eq!(fidelity(&zero, &one).unwrap(), 0.0);
    for theta in [0.3, 1.1, 2.5, PI] {
        let r = apply_gate(&zero, &Gate::Ry { qubit: 0, angle: theta }).unwrap();
        // <0| Ry |0> is the (0,0) entry cos(theta/2).
        let oracle = (theta / 2.0).cos().powi(2);
        assert!((fidelity(&zero, &r).unwrap() - oracle).abs() < 1e-12);
    }
    assert!(matches!(
        fidelity(&zero, &StateVector::zero(2).unwrap()),
        Err(Error::DimensionMismatch { .. })
    ));
}

#[test]
fn reduce_examples() {
    for k in 0..3 {
        let r = reduce_to_qubit(&StateVector::zero(3).unwrap(), k).unwrap();
        assert!((r.matrix()[(0, 0)].re - 1.0).abs() < 1e-15);
        assert!(r.matrix()[(1, 1)].norm() < 1e-15);
        let b = BlochVector::from_qubit_density(&r);
        assert_eq!((b.c_x, b.c_y, b.c_z), (0.0, 0.0, 1.0));
    }
    let h = FRAC_1_SQRT_2;
    let bell = StateVector::new(2, vec![c(h), c(0.0), c(0.0), c(h)]).unwrap();
    let b = bell.bloch_vector(0).unwrap();
    assert!(b.norm_sqr() < 1e-24);
    let plus0 = StateVector::new(2, vec![c(h), c(0.0), c(h), c(0.0)]).unwrap();
    // Partial trace oracle: rho_0[a][b] = sum_r psi(a,r) conj psi(b,r).
    let amps = plus0.amplitudes();
    let mut r = [[C64::ZERO; 2]; 2];
    for a in 0..2 {
        for bb in 0..2 {
            for rest in 0..2 {
                r[a][bb] += amps[a * 2 + rest] * amps[bb * 2 + rest].conj();
            }
        }
    }
    let got = reduce_to_qubit(&plus0, 0).unwrap();
    for (a, row) in r.iter().enumerate() {
        for (bb, v) in row.iter().enumerate() {
            assert!((got.matrix()[(a, bb)] - v).norm() < 1e-12);
        }
    }
    let bv = plus0.bloch_vector(0).unwrap();
    assert!((bv.c_x - 1.0).abs() < 1e-12 && bv.c_y.abs() < 1e-12 && bv.c_z.abs() < 1e-12);
    assert!(matches!(reduce_to_qubit(&plus0, 2), Err(Error::QubitOutOfRange { .. })));
}

#[test]
fn density_reduction_matches_pure_reduction() {
    let psi = random_state(3, 11);
    let rho = psi.to_density();
    for k in 0..3 {
        let a = reduce_to_qubit(&psi, k).unwrap();
        let b = reduce_to_qubit(&rho, k).unwrap();
        assert!((a.matrix() - b.matrix()).norm() < 1e-12);
    }
}

#[test]
fn schatten2_examples() {
    let rho = random_mixed(2, 4);
    assert!(schatten2_distance(&rho, &rho).unwrap() < 1e-15);
    let p0 = StateVector::zero(1).unwrap().to_density();
    let p1 = StateVector::basis(1, 1).unwrap().to_density();
    assert!((schatten2_distance(&p0, &p1).unwrap() - 2f64.sqrt()).abs() < 1e-12);
    for n in 1..=4 {
        let pure = random_state(n, 20 + n as u64).to_density();
        let mm = DensityMatrix::maximally_mixed(n).unwrap();
        let oracle = (1.0 - 1.0 / (1u64 << n) as f64).sqrt();
        assert!((schatten2_distance(&pure, &mm).unwrap() - oracle).abs() < 1e-10);
    }
}

#[test]
fn relative_entropy_examples() {
    let rho = random_mixed(2, 8);
    assert!(relative_entropy(&rho, &rho).unwrap().abs() < 1e-9);
    let mm = DensityMatrix::maximally_mixed(1).unwrap();
    assert!(relative_entropy(&mm, &mm).unwrap().abs() < 1e-12);
    let p0 = StateVector::zero(1).unwrap().to_density();
    // Eigenvalues of |0><0| are (1, 0); against I/2 that gives -log2(1/2) = 1.
    assert!((relative_entropy(&p0, &mm).unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(relative_entropy(&mm, &p0), Err(Error::InfiniteRelativeEntropy));
    let p1 = StateVector::basis(1, 1).unwrap().to_density();
    assert_eq!(relative_entropy(&p0, &p1), Err(Error::InfiniteRelativeEntropy));
}

#[test]
fn relative_entropy_of_pure_state_against_itself_is_zero() {
    let psi = random_state(2, 31).to_density();
    assert!(relative_entropy(&psi, &psi).unwrap().abs() < 1e-8);
}

#[test]
fn renyi2_examples() {
    assert!(sandwiched_renyi2_vs_maxmixed(&DensityMatrix::maximally_mixed(3).unwrap()).abs() < 1e-12);
    let p = random_state(1, 2).to_density();
    assert!((sandwiched_renyi2_vs_maxmixed(&p) - 1.0).abs() < 1e-10);
    let p = random_state(4, 2).to_density();
    assert!((sandwiched_renyi2_vs_maxmixed(&p) - 4.0).abs() < 1e-10);
}

#[test]
fn density_matrix_validation() {
    let bad = CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(0.5)]);
    assert!(matches!(DensityMatrix::new(1, bad), Err(Error::InvalidState(_))));
    let neg = CMatrix::from_row_slice(2, 2, &[c(1.5), c(0.0), c(0.0), c(-0.5)]);
    assert!(matches!(DensityMatrix::new(1, neg), Err(Error::InvalidState(_))));
    assert!(StateVector::new(1, vec![c(1.0), c(1.0)]).is_err());
}

#[test]
fn hermitian_eigen_on_known_matrix() {
    // Pauli Y has eigenvalues -1 and +1.
    let y = CMatrix::from_row_slice(2, 2, &[C64::ZERO, C64::new(0.0, -1.0), C64::new(0.0, 1.0), C64::ZERO]);
    let (evals, vecs) = hermitian_eigen(&y);
    assert!((evals[0] + 1.0).abs() < 1e-12 && (evals[1] - 1.0).abs() < 1e-12);
    let recon = &vecs
        * CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(2, evals.iter().map(|&e| c(e))))
        * vecs.adjoint();
    assert!((recon - y).norm() < 1e-12);
}

#[test]
fn haar_unitary_is_unitary_and_capped() {
    let mut rng = seeded(1);
    for n in 1..=4 {
        let u = haar_random_unitary(n, &mut rng).unwrap();
        assert!(unitarity_deviation(&u) < 1e-10);
    }
    assert!(matches!(
        haar_random_unitary(9, &mut rng),
        Err(Error::CapExceeded { .. })
    ));
}

#[test]
fn haar_state_is_first_column_of_haar_unitary() {
    let u = haar_random_unitary(3, &mut seeded(42)).unwrap();
    let psi = haar_random_state(3, &mut seeded(42)).unwrap();
    for i in 0..8 {
        assert!((u[(i, 0)] - psi.amplitudes()[i]).norm() < 1e-12);
    }
}

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let m = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / m;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0);
    (mean, (var / m).sqrt())
}

#[test]
fn haar_unitary_moments_n2() {
    let mut rng = seeded(2024);
    let draws = 100_000;
    let mut p = Vec::with_capacity(draws);
    let mut p2 = Vec::with_capacity(draws);
    let mut left = Vec::with_capacity(draws);
    let v = haar_random_unitary(2, &mut seeded(7)).unwrap();
    for _ in 0..draws {
        let u = haar_random_unitary(2, &mut rng).unwrap();
        let a = u[(0, 0)].norm_sqr();
        p.push(a);
        p2.push(a * a);
        left.push((&v * &u)[(0, 0)].norm_sqr().powi(2));
    }
    let (m1, se1) = mean_and_se(&p);
    assert!((m1 - 0.25).abs() <= 3.0 * se1, "mean {m1} se {se1}");
    // Second moment 2/(d(d+1)) at d = 4.
    let (m2, se2) = mean_and_se(&p2);
    assert!((m2 - 0.1).abs() <= 3.0 * se2, "mean {m2} se {se2}");
    // Left invariance: V U has the same moments.
    let (m3, se3) = mean_and_se(&left);
    assert!((m3 - 0.1).abs() <= 3.0 * se3, "mean {m3} se {se3}");
}

fn bloch_strategy() -> impl Strategy<Value = (f64, f64, f64)> {
    (0.0..PI, -PI..PI, 0.0..=1.0f64)
        .prop_map(|(th, ph, r)| (r * th.sin() * ph.cos(), r * th.sin() * ph.sin(), r * th.cos()))
}

fn gate_strategy(n: usize) -> impl Strategy<Value = Gate> {
    let q = 0..n;
    prop_oneof![
        (q.clone(), -PI..PI).prop_map(|(qubit, angle)| Gate::Rx { qubit, angle }),
        (q.clone(), -PI..PI).prop_map(|(qubit, angle)| Gate::Ry { qubit, angle }),
        (q.clone(), -PI..PI).prop_map(|(qubit, angle)| Gate::Rz { qubit, angle }),
        q.clone().prop_map(|qubit| Gate::Hadamard { qubit }),
        (0..n - 1).prop_map(|a| Gate::CZ { a, b: a + 1 }),
        (0..n - 1).prop_map(|a| Gate::CNOT {
            control: a + 1,
            target: a
        }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gates_preserve_norm(seed in any::<u64>(), gates in proptest::collection::vec(gate_strategy(4), 1..20)) {
        let mut psi = random_state(4, seed);
        for g in &gates {
            psi.apply(g).unwrap();
            prop_assert!((psi.norm_sqr() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn product_state_reduction_returns_local_factor(blochs in proptest::collection::vec(bloch_strategy(), 1..=4), k in 0usize..4) {
        let n = blochs.len();
        let k = k % n;
        let locals: Vec<DensityMatrix> = blochs
            .iter()
            .map(|&(x, y, z)| BlochVector::new(x, y, z).unwrap().to_density())
            .collect();
        let mut full = locals[0].matrix().clone();
        for l in &locals[1..] {
            full = kron(&full, l.matrix());
        }
        let rho = DensityMatrix::new(n, full).unwrap();
        let r = reduce_to_qubit(&rho, k).unwrap();
        prop_assert!((r.matrix() - locals[k].matrix()).norm() < 1e-12);
    }

    #[test]
    fn pure_state_distance_to_maximally_mixed(seed in any::<u64>(), n in 1usize..=5) {
        let rho = random_state(n, seed).to_density();
        let mm = DensityMatrix::maximally_mixed(n).unwrap();
        let d2 = schatten2_distance(&rho, &mm).unwrap().powi(2);
        prop_assert!((d2 - (1.0 - 1.0 / (1u64 << n) as f64)).abs() < 1e-10);
    }
}

#[test]
fn pinsker_holds_on_random_mixed_pairs() {
    for i in 0..100u64 {
        let n = 1 + (i % 3) as usize;
        let rho = random_mixed(n, 1000 + i);
        let sigma = random_mixed(n, 5000 + i);
        let t = trace_norm_distance(&rho, &sigma).unwrap();
        let s = relative_entropy(&rho, &sigma).unwrap();
        assert!(t * t <= 2.0 * std::f64::consts::LN_2 * s + 1e-12, "pair {i}: {t} {s}");
    }
}
