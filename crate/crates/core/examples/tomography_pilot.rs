//! Pilot run for the large-sample tomography check: one-qubit states, `N = 10^6` shots,
//! seeds disjoint from the acceptance run. Prints the observed trace-distance quantiles.

use shortqip::linalg::{trace_norm, DensityOperator};
use shortqip::random::{random_density, rng};
use shortqip::tomography::{canonical_frame, measure, reconstruct, MeasureMode};

fn main() {
    let frame = canonical_frame(1).unwrap();
    let mut errors: Vec<f64> = (0..100u64)
        .map(|trial| {
            let seed = 10_000 + trial;
            let rho = DensityOperator::on_qubits(random_density(&mut rng(seed), 2), 1).unwrap();
            let q = measure(&rho, &frame, MeasureMode::Sampled { shots: 1_000_000, seed }).unwrap();
            trace_norm(&(reconstruct(&q, &frame).unwrap() - rho.matrix()))
        })
        .collect();
    errors.sort_by(f64::total_cmp);
    let doc = serde_json::json!({
        "qubits": 1,
        "shots": 1_000_000,
        "trials": errors.len(),
        "seeds": "10000..10100",
        "median": errors[49],
        "p95": errors[94],
        "max": errors[99],
        "threshold": 0.02,
    });
    println!("{}", serde_json::to_string_pretty(&doc).unwrap());
}
