use shortqip::channels::{choi_of_channel, QuantumChannel};
use shortqip::games::{commit_then_basis, cos2_pi_8, random_small_protocol};
use shortqip::linalg::{identity, ket, max_eigenvalue, permute_subsystems, tensor, trace, Matrix, SubsystemShape};
use shortqip::protocols::{co_strategy, exact_value, rewire_verifier, ProtocolSpec};
use shortqip::random::{random_channel, random_hermitian, rng};
use shortqip::strategies::{
    accept_block, max_acceptance_sdp, solve_strategy_sdp, strategy_feasible, RoundShape, SdpOptions,
};

fn value(objective: &Matrix, shape: &RoundShape) -> f64 {
    solve_strategy_sdp(objective, shape, &SdpOptions::default()).unwrap().value
}

#[test]
fn optimal_strategies_are_feasible_with_the_right_trace() {
    let mut r = rng(201);
    for kind in 0..8 {
        let v = random_small_protocol(&mut r, kind).unwrap();
        let view = co_strategy(&v).unwrap();
        let sol = max_acceptance_sdp(&view).unwrap();
        let report = strategy_feasible(&sol.strategy.x, &view.shape, 1e-6).unwrap();
        assert!(report.feasible, "{:?}", report.worst);
        let expected = (1u64 << view.shape.total_q()) as f64;
        assert!((trace(&sol.strategy.x).re - expected).abs() < 1e-6);
        assert!((view.value_of(&sol.strategy.x) - sol.value).abs() < 1e-9);
    }
}

#[test]
fn value_is_invariant_under_consistent_relabelling() {
    let mut r = rng(202);
    // one round with two response qubits and two question qubits: swap within each group
    let shape = RoundShape::single(2, 2);
    for _ in 0..3 {
        let w = random_hermitian(&mut r, 16);
        let base = value(&w, &shape);
        let regs = SubsystemShape::qubits(&[1, 1, 1, 1]);
        for perm in [[1, 0, 2, 3], [0, 1, 3, 2], [1, 0, 3, 2]] {
            let swapped = permute_subsystems(&w, &regs, &perm).unwrap();
            assert!((value(&swapped, &shape) - base).abs() < 1e-6);
        }
    }
}

/// The same verifier reading one extra response qubit and discarding it.
fn with_ignored_response(v: &ProtocolSpec) -> ProtocolSpec {
    let stages = v.verifier();
    let last = &stages[1];
    let kraus: Vec<Matrix> = last
        .kraus()
        .iter()
        .flat_map(|k| (0..2).map(move |i| tensor(k, &ket(2, i).adjoint())))
        .collect();
    let widened = QuantumChannel::new(last.in_qubits() + 1, last.out_qubits(), kraus).unwrap();
    let shape = RoundShape::single(v.shape.q[0], v.shape.r[0] + 1);
    ProtocolSpec::from_channels(shape, v.memory.clone(), &[stages[0].clone(), widened], v.a, v.b, v.gap).unwrap()
}

#[test]
fn an_ignored_response_qubit_never_lowers_the_value() {
    let mut r = rng(203);
    for _ in 0..3 {
        let stages = [random_channel(&mut r, 0, 2), random_channel(&mut r, 2, 1)];
        let v = ProtocolSpec::from_channels(RoundShape::single(1, 1), vec![1], &stages, 0.9, 0.1, 0.5).unwrap();
        let wide = with_ignored_response(&v);
        let (a, b) = (exact_value(&v).unwrap().value, exact_value(&wide).unwrap().value);
        assert!(b >= a - 1e-6, "{b} < {a}");
    }
}

#[test]
fn objective_scales_linearly() {
    let mut r = rng(204);
    for kind in 0..4 {
        let v = random_small_protocol(&mut r, kind).unwrap();
        let view = co_strategy(&v).unwrap();
        let half = view.objective().scale(0.5);
        let (a, b) = (value(&half, &view.shape), value(&view.objective(), &view.shape));
        assert!((2.0 * a - b).abs() < 1e-6, "{a} {b}");
    }
}

#[test]
fn eigenvalue_and_sdp_paths_agree_without_questions() {
    let mut r = rng(205);
    for n in 0..20 {
        let rq = 1 + n % 2;
        let (v, p1) = shortqip::games::random_measure_only(&mut r, rq).unwrap();
        let view = co_strategy(&v).unwrap();
        let sdp = max_acceptance_sdp(&view).unwrap().value;
        let eig = max_eigenvalue(&p1).unwrap();
        assert!((sdp - eig).abs() < 1e-6, "{sdp} vs {eig}");
        assert!((exact_value(&v).unwrap().value - eig).abs() < 1e-9);
    }
}

#[test]
fn commit_then_basis_value_with_prover_memory() {
    // The literal game is won with certainty by keeping half of a Bell pair.
    let v = commit_then_basis(0.95, 0.9, 0.05).unwrap();
    let value = exact_value(&v).unwrap().value;
    assert!((value - 1.0).abs() < 1e-6);
    assert!(value > cos2_pi_8());
}

/// A Hermitian perturbation with trace norm exactly `eta`.
fn perturbation(r: &mut rand_chacha::ChaCha8Rng, dim: usize, eta: f64) -> Matrix {
    let h = random_hermitian(r, dim);
    let n = shortqip::linalg::trace_norm(&h);
    h.scale(eta / n)
}

#[test]
fn estimation_error_propagates_within_the_bound() {
    let mut r = rng(206);
    for n in 0..10 {
        let v = random_small_protocol(&mut r, n).unwrap();
        let rho = choi_of_channel(&rewire_verifier(&v).unwrap());
        let shape = &v.shape;
        let exact = accept_block(rho.matrix(), shape).unwrap();
        let base = value(&exact.objective(), shape);
        let scale = (1u64 << (shape.total_q() + shape.total_r())) as f64;
        for eta in [1e-3, 1e-2] {
            let h = rho.matrix() + perturbation(&mut r, rho.matrix().nrows(), eta);
            let view = accept_block(&h, shape).unwrap();
            let moved = value(&view.objective(), shape);
            assert!((moved - base).abs() <= scale * eta + 1e-7, "{moved} vs {base} at {eta}");
        }
    }
}

#[test]
fn accept_block_rejects_wrong_dimensions() {
    assert!(accept_block(&identity(4), &RoundShape::single(1, 1)).is_err());
}
