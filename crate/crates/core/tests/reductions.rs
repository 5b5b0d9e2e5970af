use shortqip::channels::{choi_of_channel, measurement_channel};
use shortqip::games::random_small_protocol;
use shortqip::linalg::spectral_norm;
use shortqip::protocols::{exact_value, interact, ProverSpec};
use shortqip::random::{random_binary_measurement, random_channel, rng};
use shortqip::reductions::{
    arthur_acceptance, arthur_params, definetti_bound_f64, honest_witness, parse_rational, qam_alpha,
    qiplog_decide, ArthurOverrides, QiplogMode, Verdict,
};
use shortqip::strategies::SdpOptions;
use shortqip::tomography::MeasureMode;

#[test]
fn exact_qiplog_verdict_follows_the_exact_value() {
    let mut r = rng(401);
    for kind in 0..8 {
        let v = random_small_protocol(&mut r, kind).unwrap();
        let exact = exact_value(&v).unwrap().value;
        let rep = qiplog_decide(&v, QiplogMode::Exact, &SdpOptions::default()).unwrap();
        assert!((rep.estimate - exact).abs() < 1e-6);
        if (exact - v.midpoint()).abs() > 1e-6 {
            let expected = if exact >= v.midpoint() { Verdict::Yes } else { Verdict::No };
            assert_eq!(rep.verdict, expected, "kind {kind}");
        }
    }
}

#[test]
fn sampled_qiplog_stays_within_its_error_bound() {
    let mut r = rng(402);
    for kind in 0..4 {
        let v = random_small_protocol(&mut r, kind).unwrap();
        let mode = QiplogMode::Tomography { measure: MeasureMode::Sampled { shots: 50_000, seed: kind as u64 } };
        let rep = qiplog_decide(&v, mode, &SdpOptions::default()).unwrap();
        assert_eq!(rep.diagnostics["bound_holds"], serde_json::Value::Bool(true));
    }
}

#[test]
fn qam_alpha_is_the_norm_of_the_accepting_operator() {
    let mut r = rng(403);
    for n in 0..100 {
        let k = 1 + n % 2;
        let (p0, p1) = random_binary_measurement(&mut r, 1 << k);
        let choi = choi_of_channel(&measurement_channel(&p0, &p1).unwrap());
        let alpha = qam_alpha(choi.matrix(), k).unwrap();
        assert!((alpha - spectral_norm(&p1)).abs() < 1e-10);
        assert!(alpha <= 1.0 + 1e-10);
    }
}

#[test]
fn honest_witnesses_accept_at_the_scaled_interaction_value() {
    let mut r = rng(404);
    let gap = parse_rational("1/4").unwrap();
    let settings = arthur_params(1, &gap)
        .unwrap()
        .resolve(&ArthurOverrides { n: Some(40), m: Some(8), ..Default::default() })
        .unwrap();
    let mut tried = 0;
    for kind in 0..16 {
        let v = random_small_protocol(&mut r, kind).unwrap();
        if v.rounds() != 1 || v.shape.q[0] != 1 {
            continue;
        }
        tried += 1;
        let p = ProverSpec::single(random_channel(&mut r, 1, v.shape.r[0]));
        let w = honest_witness(&v, &p, 48).unwrap();
        let rep = arthur_acceptance(&v, &w, &settings, MeasureMode::Exact, 10, kind as u64).unwrap();
        let analytic = rep.diagnostics["analytic_accept_probability"].as_f64().unwrap();
        assert!((analytic - interact(&v, &p).unwrap() / 4.0).abs() < 1e-10);
        assert_eq!(rep.diagnostics["step3_rejection_rate"].as_f64(), Some(0.0));
    }
    assert!(tried > 0);
}

#[test]
fn definetti_bound_decreases_in_discarded_registers() {
    for k in 1..4 {
        let b: Vec<f64> = (0..20).map(|m| definetti_bound_f64(5, m * 10, k).unwrap()).collect();
        assert!(b.windows(2).all(|w| w[1] < w[0]));
        assert_eq!(b[0], (1u64 << (k + 1)) as f64);
    }
}
