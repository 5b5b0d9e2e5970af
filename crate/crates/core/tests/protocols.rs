use shortqip::channels::{choi_of_channel, measurement_channel, QuantumChannel};
use shortqip::games::{echo_game, measure_only, random_small_protocol};
use shortqip::linalg::{diag, identity, partial_trace, SubsystemShape};
use shortqip::protocols::{
    exact_value, interact, parse_protocol, parse_prover, prover_strategy, rewire_verifier, ProverSpec,
};
use shortqip::random::{random_channel, rng};
use shortqip::seesaw::{seesaw, SeesawConfig};
use shortqip::Error;

const MINIMAL: &str = r#"{
  "rounds": 1, "q": [0], "r": [1], "v": [0],
  "verifier": [
    {"type": "kraus", "kraus": [[[[1, 0]]]]},
    {"type": "kraus", "kraus": [
      [[[0.5, 0], [0, 0]], [[0, 0], [0, 0]]],
      [[[0, 0], [0, 0]], [[0.8660254037844386, 0], [0, 0]]],
      [[[0, 0], [0.8660254037844386, 0]], [[0, 0], [0, 0]]],
      [[[0, 0], [0, 0]], [[0, 0], [0.5, 0]]]
    ]}
  ],
  "a": 0.75, "b": 0.5, "gap": 0.25
}"#;

#[test]
fn minimal_document_parses_and_evaluates() {
    let v = parse_protocol(MINIMAL).unwrap();
    assert!((exact_value(&v).unwrap().value - 0.75).abs() < 1e-9);
    let again = parse_protocol(&v.to_json()).unwrap();
    assert_eq!(again.to_document(), v.to_document());
}

fn violation(text: &str) -> (String, String) {
    match parse_protocol(text) {
        Err(Error::Invariant { path, message }) => (path, message),
        other => panic!("expected an invariant violation, got {other:?}"),
    }
}

#[test]
fn wide_final_stage_is_rejected() {
    let mut doc: serde_json::Value = serde_json::from_str(MINIMAL).unwrap();
    // replace V_1 with the identity on the response plus a fresh qubit: two output qubits
    doc["verifier"][1] = serde_json::json!({
        "type": "circuit",
        "inputs": {"memory": [], "message": ["r"]},
        "outputs": {"memory": [], "message": ["r", "x"]},
        "gates": [{"op": "ANCILLA", "wires": ["x"]}]
    });
    let (path, message) = violation(&doc.to_string());
    assert!(path.starts_with("verifier"), "{path}");
    assert!(message.contains("acceptance qubit") || message.contains("expected"), "{message}");
}

#[test]
fn inverted_thresholds_are_rejected() {
    let mut doc: serde_json::Value = serde_json::from_str(MINIMAL).unwrap();
    doc["a"] = 0.6.into();
    doc["b"] = 0.7.into();
    let (path, message) = violation(&doc.to_string());
    assert_eq!(path, "gap");
    assert!(message.contains("threshold gap"));
}

#[test]
fn syntax_errors_are_parse_errors() {
    assert!(matches!(parse_protocol("{"), Err(Error::Parse(_))));
    assert!(matches!(parse_prover("[]"), Err(Error::Parse(_))));
}

#[test]
fn interaction_examples() {
    let v = measure_only(&diag(&[0.75, 0.25]), 0.75, 0.5, 0.25).unwrap();
    let mixed = shortqip::linalg::DensityOperator::maximally_mixed(SubsystemShape::qubits(&[1]));
    let send_mixed = QuantumChannel::replacement(0, &mixed).unwrap();
    assert!((interact(&v, &ProverSpec::single(send_mixed)).unwrap() - 0.5).abs() < 1e-12);
    let echo = echo_game(0.95, 0.5, 0.45).unwrap();
    assert!((interact(&echo, &ProverSpec::single(QuantumChannel::identity(1))).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn measure_only_rewires_to_its_measurement() {
    let p1 = diag(&[0.75, 0.25]);
    let v = measure_only(&p1, 0.75, 0.5, 0.25).unwrap();
    let phi = rewire_verifier(&v).unwrap();
    let m = measurement_channel(&(identity(2) - &p1), &p1).unwrap();
    assert!((phi.superoperator() - m.superoperator()).norm() < 1e-12);
    let choi = choi_of_channel(&phi);
    let marginal = partial_trace(choi.matrix(), &SubsystemShape::qubits(&[1, 1]), &[1]).unwrap();
    assert!((marginal - identity(2).scale(0.5)).norm() < 1e-12);
}

#[test]
fn random_provers_never_beat_the_exact_value() {
    let mut r = rng(301);
    for kind in 0..8 {
        let v = random_small_protocol(&mut r, kind).unwrap();
        let exact = exact_value(&v).unwrap();
        for _ in 0..3 {
            let channels: Vec<QuantumChannel> = (0..v.rounds())
                .map(|j| {
                    let mem_in = if j == 0 { 0 } else { 1 };
                    let mem_out = if j + 1 == v.rounds() { 0 } else { 1 };
                    random_channel(&mut r, mem_in + v.shape.q[j], mem_out + v.shape.r[j])
                })
                .collect();
            let memory = vec![1; v.rounds() - 1];
            let p = ProverSpec::new(memory, channels).unwrap();
            let value = interact(&v, &p).unwrap();
            assert!(value <= exact.value + 1e-8);
            let x = prover_strategy(&p, &v.shape).unwrap();
            let view = shortqip::protocols::co_strategy(&v).unwrap();
            assert!((view.value_of(&x.x) - value).abs() < 1e-10);
        }
    }
}

#[test]
fn seesaw_bounds_and_reproduces() {
    let mut r = rng(302);
    for kind in 0..20 {
        let v = random_small_protocol(&mut r, kind).unwrap();
        let exact = exact_value(&v).unwrap().value;
        let res = seesaw(&v, &SeesawConfig { seed: kind as u64, ..SeesawConfig::default() }).unwrap();
        assert!(res.value <= exact + 1e-6 && exact <= 1.0 + 1e-9, "kind {kind}: {} vs {exact}", res.value);
        assert!((interact(&v, &res.prover).unwrap() - res.value).abs() < 1e-8);
        if v.rounds() == 1 {
            assert!(exact - res.value <= 1e-4, "{exact} vs {}", res.value);
        }
    }
}
