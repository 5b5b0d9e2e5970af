//! State tomography with a tensor-product information-complete measurement.
//!
//! The single-qubit measurement has four outcomes `{P_0..P_3}` with dual operators
//! `{M_0..M_3}` satisfying `sum_a <P_a, X> M_a = X`. On `k` qubits the outcome
//! `x in {0,1,2,3}^k` is encoded base 4 with the first qubit as the most significant
//! digit, and `P_x`, `M_x` are tensor products.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    c, hermitian_eigen, hermitian_part, identity, inner, real, tensor, trace, zeros,
    DensityOperator, Matrix,
};
use crate::sampling;

/// Largest arity supported by [`canonical_frame`] (4^6 outcomes on 64x64 operators).
pub const MAX_FRAME_QUBITS: usize = 6;

/// The four single-qubit measurement operators.
pub fn single_qubit_measurement() -> [Matrix; 4] {
    let s = 2f64.sqrt();
    let hi = (2.0 + s) / 8.0;
    let lo = (2.0 - s) / 8.0;
    let e = 1.0 / 8.0;
    let m = |a: f64, b: (f64, f64), d: f64| {
        Matrix::from_row_slice(2, 2, &[real(a), c(b.0, b.1), c(b.0, -b.1), real(d)])
    };
    [
        m(hi, (e, e), lo),
        m(lo, (e, -e), hi),
        m(hi, (-e, -e), lo),
        m(lo, (-e, e), hi),
    ]
}

/// The dual operators of [`single_qubit_measurement`].
pub fn single_qubit_dual() -> [Matrix; 4] {
    let s = 2f64.sqrt();
    let hi = (1.0 + s) / 2.0;
    let lo = (1.0 - s) / 2.0;
    let m = |a: f64, b: (f64, f64), d: f64| {
        Matrix::from_row_slice(2, 2, &[real(a), c(b.0, b.1), c(b.0, -b.1), real(d)])
    };
    [
        m(hi, (1.0, 1.0), lo),
        m(lo, (1.0, -1.0), hi),
        m(hi, (-1.0, -1.0), lo),
        m(lo, (-1.0, 1.0), hi),
    ]
}

/// Paired measurement and dual operators on `arity` qubits.
#[derive(Clone, Debug)]
pub struct Frame {
    arity: usize,
    p: [Matrix; 4],
    m: [Matrix; 4],
}

pub fn canonical_frame(k: usize) -> Result<Frame> {
    if k == 0 || k > MAX_FRAME_QUBITS {
        return Err(Error::CapExceeded(format!(
            "frame arity {k} outside 1..={MAX_FRAME_QUBITS}"
        )));
    }
    Ok(Frame {
        arity: k,
        p: single_qubit_measurement(),
        m: single_qubit_dual(),
    })
}

impl Frame {
    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn outcome_count(&self) -> usize {
        1 << (2 * self.arity)
    }

    pub fn dim(&self) -> usize {
        1 << self.arity
    }

    /// Base-4 digits of outcome `x`, first qubit first.
    pub fn digits(&self, x: usize) -> Vec<usize> {
        (0..self.arity).rev().map(|i| (x >> (2 * i)) & 3).collect()
    }

    pub fn measurement_operator(&self, x: usize) -> Matrix {
        self.digits(x)
            .into_iter()
            .fold(identity(1), |acc, a| tensor(&acc, &self.p[a]))
    }

    pub fn dual_operator(&self, x: usize) -> Matrix {
        self.digits(x)
            .into_iter()
            .fold(identity(1), |acc, a| tensor(&acc, &self.m[a]))
    }

    /// Born probabilities `<P_x, rho>` for every outcome (also valid for any operator).
    pub fn probabilities(&self, rho: &Matrix) -> Result<Vec<f64>> {
        if rho.nrows() != self.dim() || rho.ncols() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{}-qubit frame applied to a {}x{} operator",
                self.arity,
                rho.nrows(),
                rho.ncols()
            )));
        }
        let mut out = Vec::with_capacity(self.outcome_count());
        self.probabilities_into(rho, &mut out);
        Ok(out)
    }

    fn probabilities_into(&self, rho: &Matrix, out: &mut Vec<f64>) {
        let d = rho.nrows();
        if d == 1 {
            out.push(rho[(0, 0)].re);
            return;
        }
        let half = d / 2;
        for p in &self.p {
            // Tr_1((P (x) I) rho)
            let mut reduced = zeros(half, half);
            for i in 0..half {
                for j in 0..half {
                    let mut acc = real(0.0);
                    for a in 0..2 {
                        for b in 0..2 {
                            acc += p[(a, b)] * rho[(b * half + i, a * half + j)];
                        }
                    }
                    reduced[(i, j)] = acc;
                }
            }
            self.probabilities_into(&reduced, out);
        }
    }

    /// `sum_x w(x) M_x`.
    pub fn combine(&self, weights: &[f64]) -> Result<Matrix> {
        if weights.len() != self.outcome_count() {
            return Err(Error::DimensionMismatch(format!(
                "{} weights for {} outcomes",
                weights.len(),
                self.outcome_count()
            )));
        }
        Ok(self.combine_rec(weights))
    }

    fn combine_rec(&self, weights: &[f64]) -> Matrix {
        if weights.len() == 1 {
            return Matrix::from_element(1, 1, real(weights[0]));
        }
        let quarter = weights.len() / 4;
        let mut h: Option<Matrix> = None;
        for (a, m) in self.m.iter().enumerate() {
            let inner = self.combine_rec(&weights[a * quarter..(a + 1) * quarter]);
            let term = tensor(m, &inner);
            h = Some(match h {
                Some(acc) => acc + term,
                None => term,
            });
        }
        h.expect("four terms")
    }
}

/// Dual operators `{M_a}` of a basis `{P_a}` of the operator space: the unique solution of
/// `sum_a <P_a, X> M_a = X`.
pub fn dual_frame(p: &[Matrix]) -> Result<Vec<Matrix>> {
    let d = p.first().map(|m| m.nrows()).ok_or(Error::SingularFrame)?;
    let n = d * d;
    if p.len() != n || p.iter().any(|m| m.nrows() != d || m.ncols() != d) {
        return Err(Error::SingularFrame);
    }
    // Row a of `a_mat` is vec(P_a)^*, so (a_mat vec X)_a = <P_a, X>; then vec(M_a) is column a of a_mat^{-1}.
    let a_mat = Matrix::from_fn(n, n, |a, idx| p[a][(idx / d, idx % d)].conj());
    let sv = crate::linalg::singular_values(&a_mat);
    let (max, min) = sv
        .iter()
        .fold((0.0f64, f64::INFINITY), |(hi, lo), &s| (hi.max(s), lo.min(s)));
    if min.is_nan() || min <= 1e-12 * max {
        return Err(Error::SingularFrame);
    }
    let inv = a_mat.try_inverse().ok_or(Error::SingularFrame)?;
    Ok((0..n)
        .map(|a| Matrix::from_fn(d, d, |i, j| inv[(i * d + j, a)]))
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum MeasureMode {
    Exact,
    Sampled { shots: u64, seed: u64 },
}

/// Outcome weights, either Born probabilities or an empirical frequency vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutcomeDistribution {
    pub weights: Vec<f64>,
    pub mode: MeasureMode,
}

impl OutcomeDistribution {
    pub fn l1_distance(&self, other: &OutcomeDistribution) -> f64 {
        self.weights
            .iter()
            .zip(&other.weights)
            .map(|(a, b)| (a - b).abs())
            .sum()
    }
}

/// Performs the frame measurement on `rho`, exactly or with `shots` independent draws.
pub fn measure(rho: &DensityOperator, frame: &Frame, mode: MeasureMode) -> Result<OutcomeDistribution> {
    let p = frame.probabilities(rho.matrix())?;
    sample_outcomes(&p, mode)
}

/// Frequency vector for `mode` given exact outcome probabilities.
pub fn sample_outcomes(p: &[f64], mode: MeasureMode) -> Result<OutcomeDistribution> {
    let weights = match mode {
        MeasureMode::Exact => p.to_vec(),
        MeasureMode::Sampled { shots, seed } => {
            if shots == 0 {
                return Err(Error::OutOfRange("sampled measurement needs at least one shot".into()));
            }
            sampling::sample_counts(p, shots, seed, &[])
                .into_iter()
                .map(|k| k as f64 / shots as f64)
                .collect()
        }
    };
    Ok(OutcomeDistribution { weights, mode })
}

/// Linear-inversion estimate `H = sum_x q(x) M_x`; Hermitian, possibly not positive.
pub fn reconstruct(q: &OutcomeDistribution, frame: &Frame) -> Result<Matrix> {
    frame.combine(&q.weights).map(|h| hermitian_part(&h))
}

/// Nearest-state repair: keeps the positive part of `h` and renormalises its trace.
pub fn positive_part(h: &Matrix) -> Matrix {
    let (values, vectors) = hermitian_eigen(h);
    let mut out = zeros(h.nrows(), h.ncols());
    for (k, &l) in values.iter().enumerate() {
        if l > 0.0 {
            let v = vectors.column(k);
            out += (v * v.adjoint()).scale(l);
        }
    }
    let tr = trace(&out).re;
    if tr > 0.0 {
        out.unscale(tr)
    } else {
        identity(h.nrows()).scale(1.0 / h.nrows() as f64)
    }
}

/// Smallest integer `N >= 2^{10k} / eps^3`.
pub fn sample_size(k: usize, eps: f64) -> Result<u128> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::OutOfRange(format!("accuracy {eps} outside (0, 1)")));
    }
    sample_size_exact(k, &BigRational::from_float(eps).expect("finite"))
}

/// [`sample_size`] for an exact rational accuracy such as `1/100`.
pub fn sample_size_exact(k: usize, eps: &BigRational) -> Result<u128> {
    if !eps.is_positive() || eps >= &BigRational::one() {
        return Err(Error::OutOfRange(format!("accuracy {eps} outside (0, 1)")));
    }
    let bound = BigRational::from_integer(BigInt::from(1) << (10 * k)) / (eps * eps * eps);
    ceil_to_u128(&bound)
}

pub(crate) fn ceil_to_u128(x: &BigRational) -> Result<u128> {
    let ceil = x.ceil().to_integer();
    if ceil < BigInt::zero() {
        return Err(Error::OutOfRange("negative count".into()));
    }
    ceil.to_u128()
        .ok_or_else(|| Error::OutOfRange(format!("count {ceil} exceeds 128 bits")))
}

/// `sum_x <P_x, X> M_x` for an arbitrary operator `X`.
pub fn frame_round_trip(frame: &Frame, x: &Matrix) -> Result<Matrix> {
    // probabilities() keeps only real parts, so split X into Hermitian components
    let herm = hermitian_part(x);
    let anti = (x - x.adjoint()).scale(0.5) * c(0.0, -1.0);
    let re = frame.combine(&frame.probabilities(&herm)?)?;
    let im = frame.combine(&frame.probabilities(&anti)?)?;
    Ok(re + im * c(0.0, 1.0))
}

/// Complex-valued `<P_x, X>` for all outcomes.
pub fn frame_coefficients(frame: &Frame, x: &Matrix) -> Vec<num_complex::Complex64> {
    (0..frame.outcome_count())
        .map(|a| inner(&frame.measurement_operator(a), x))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{diag, trace_norm, SubsystemShape};
    use crate::random::{ginibre, random_density, rng};

    fn max_dev(a: &Matrix, b: &Matrix) -> f64 {
        (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn single_qubit_constants() {
        let f = canonical_frame(1).unwrap();
        let p0 = f.measurement_operator(0);
        assert!((p0[(0, 0)].re - (2.0 + 2f64.sqrt()) / 8.0).abs() < 1e-15);
        for a in 0..4 {
            assert!((trace_norm(&f.dual_operator(a)) - 10f64.sqrt()).abs() < 1e-12);
            assert!((trace(&f.dual_operator(a)).re - 1.0).abs() < 1e-15);
            assert!((trace(&f.measurement_operator(a)).re - 0.5).abs() < 1e-15);
        }
        let f2 = canonical_frame(2).unwrap();
        for x in 0..16 {
            assert!((trace_norm(&f2.dual_operator(x)) - 10.0).abs() < 1e-10);
        }
    }

    #[test]
    fn frame_arity_limits() {
        assert!(canonical_frame(0).is_err());
        assert!(matches!(canonical_frame(MAX_FRAME_QUBITS + 1), Err(Error::CapExceeded(_))));
    }

    #[test]
    fn computed_dual_matches_listed_dual() {
        let p = single_qubit_measurement();
        let m = dual_frame(&p).unwrap();
        for (computed, listed) in m.iter().zip(single_qubit_dual()) {
            assert!(max_dev(computed, &listed) < 1e-10);
        }
    }

    #[test]
    fn scaled_basis_has_scaled_dual() {
        let p: Vec<Matrix> = single_qubit_measurement().iter().map(|m| m.scale(3.0)).collect();
        let m = dual_frame(&p).unwrap();
        for (computed, listed) in m.iter().zip(single_qubit_dual()) {
            assert!(max_dev(computed, &listed.unscale(3.0)) < 1e-10);
        }
    }

    #[test]
    fn random_basis_dual_identity() {
        let mut r = rng(21);
        let p: Vec<Matrix> = (0..4).map(|_| ginibre(&mut r, 2, 2)).collect();
        let m = dual_frame(&p).unwrap();
        let x = ginibre(&mut r, 2, 2);
        let back = p
            .iter()
            .zip(&m)
            .fold(zeros(2, 2), |acc, (pa, ma)| acc + ma * inner(pa, &x));
        assert!(max_dev(&back, &x) < 1e-9);
    }

    #[test]
    fn singular_basis_rejected() {
        let mut p: Vec<Matrix> = single_qubit_measurement().to_vec();
        p[3] = p[0].clone();
        assert!(matches!(dual_frame(&p), Err(Error::SingularFrame)));
        assert!(matches!(dual_frame(&p[..3]), Err(Error::SingularFrame)));
    }

    #[test]
    fn exact_probabilities_of_simple_states() {
        let f = canonical_frame(1).unwrap();
        let zero = DensityOperator::on_qubits(diag(&[1.0, 0.0]), 1).unwrap();
        let q = measure(&zero, &f, MeasureMode::Exact).unwrap();
        let hi = (2.0 + 2f64.sqrt()) / 8.0;
        let lo = (2.0 - 2f64.sqrt()) / 8.0;
        for (got, want) in q.weights.iter().zip([hi, lo, hi, lo]) {
            assert!((got - want).abs() < 1e-15);
        }
        let mixed = DensityOperator::maximally_mixed(SubsystemShape::qubits(&[1]));
        let q = measure(&mixed, &f, MeasureMode::Exact).unwrap();
        assert!(q.weights.iter().all(|w| (w - 0.25).abs() < 1e-15));
    }

    #[test]
    fn probabilities_match_explicit_operators() {
        let mut r = rng(22);
        let f = canonical_frame(3).unwrap();
        let rho = random_density(&mut r, 8);
        let fast = f.probabilities(&rho).unwrap();
        for (x, &p) in fast.iter().enumerate() {
            assert!((inner(&f.measurement_operator(x), &rho).re - p).abs() < 1e-14);
        }
        assert!((fast.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn uniform_weights_reconstruct_maximally_mixed() {
        let f = canonical_frame(1).unwrap();
        let q = OutcomeDistribution {
            weights: vec![0.25; 4],
            mode: MeasureMode::Exact,
        };
        assert!(max_dev(&reconstruct(&q, &f).unwrap(), &identity(2).scale(0.5)) < 1e-15);
    }

    #[test]
    fn reconstruction_error_bounded_by_dual_norm() {
        let mut r = rng(23);
        for k in 1..=2 {
            let f = canonical_frame(k).unwrap();
            let rho = DensityOperator::on_qubits(random_density(&mut r, 1 << k), k).unwrap();
            let p = measure(&rho, &f, MeasureMode::Exact).unwrap();
            let q = measure(&rho, &f, MeasureMode::Sampled { shots: 500, seed: k as u64 }).unwrap();
            let h = reconstruct(&q, &f).unwrap();
            let hp = reconstruct(&p, &f).unwrap();
            assert!(max_dev(&hp, rho.matrix()) < 1e-10);
            let bound = 10f64.powf(k as f64 / 2.0) * q.l1_distance(&p);
            assert!(trace_norm(&(&h - &hp)) <= bound + 1e-12);
            assert!((trace(&h).re - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn sampled_measurement_is_reproducible() {
        let f = canonical_frame(1).unwrap();
        let rho = DensityOperator::on_qubits(diag(&[0.3, 0.7]), 1).unwrap();
        let mode = MeasureMode::Sampled { shots: 1000, seed: 5 };
        assert_eq!(measure(&rho, &f, mode).unwrap(), measure(&rho, &f, mode).unwrap());
        let zero = MeasureMode::Sampled { shots: 0, seed: 5 };
        assert!(measure(&rho, &f, zero).is_err());
    }

    #[test]
    fn sample_size_values() {
        assert_eq!(sample_size(1, 0.5).unwrap(), 8192);
        assert_eq!(sample_size(2, 0.5).unwrap(), 8_388_608);
        assert_eq!(sample_size(1, 1.0 - 1e-12).unwrap(), 1025);
        assert!(sample_size(1, 0.999_999_999).unwrap() >= 1024);
        assert_eq!(sample_size(1, 0.1).unwrap(), 1_024_000);
        assert!(sample_size(1, 0.0).is_err());
        assert!(sample_size(1, 1.0).is_err());
    }

    #[test]
    fn positive_part_repairs_negative_estimate() {
        let h = diag(&[1.1, -0.1]);
        let repaired = positive_part(&h);
        assert!(max_dev(&repaired, &diag(&[1.0, 0.0])) < 1e-15);
    }

    #[test]
    fn complex_round_trip() {
        let mut r = rng(24);
        let f = canonical_frame(2).unwrap();
        let x = ginibre(&mut r, 4, 4);
        assert!(max_dev(&frame_round_trip(&f, &x).unwrap(), &x) < 1e-9);
        let coeffs = frame_coefficients(&f, &x);
        let direct = coeffs
            .iter()
            .enumerate()
            .fold(zeros(4, 4), |acc, (a, w)| acc + f.dual_operator(a) * *w);
        assert!(max_dev(&direct, &x) < 1e-9);
    }
}
