//! The three decision pipelines built on the simulator.
//!
//! * Arthur's verifier: tomography-checked copies of a one-round prover, then a
//!   post-selected replay of the protocol on one copy.
//! * The QIP_log decider: tomography of the rewired verifier's Choi state and an SDP.
//! * The QAM decider: spectral norms of tomographic estimates of the accepting operators.
//!
//! Full-scale sample sizes are computed exactly but are far too large to run, so every
//! pipeline also accepts desk-scale overrides and labels which regime produced a verdict.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Hypergeometric};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::channels::{choi_of_channel, measurement_channel, postselect_contract, validate_binary_measurement};
use crate::error::{Error, Result};
use crate::linalg::{
    identity, max_eigenvalue, partial_trace, permute_subsystems, spectral_norm, trace, trace_norm, DensityOperator,
    Matrix, MatrixLiteral, SubsystemShape,
};
use crate::protocols::{rewire_verifier, ProtocolSpec, ProverSpec};
use crate::sampling::{bernoulli, multinomial, path_rng, sample_counts, weighted_index};
use crate::strategies::{accept_block, max_acceptance_sdp_with, CoStrategyView, SdpOptions};
use crate::tomography::{canonical_frame, reconstruct, sample_outcomes, sample_size, Frame, MeasureMode};

/// Largest `N + m` that a pipeline will execute.
pub const EXECUTION_LIMIT: u64 = 1_000_000_000;
/// Most qubits in a dense (non-product) witness.
pub const MAX_DENSE_WITNESS_QUBITS: usize = 10;
/// Most outcome strings enumerated for sampled tomography on a dense witness.
const MAX_DENSE_BRANCHES: usize = 4096;

/// Parses `"a/b"`, an integer, or a finite decimal such as `"0.25"` exactly.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let text = text.trim();
    let bad = || Error::Parse(format!("`{text}` is not a rational number"));
    if let Some((num, den)) = text.split_once('/') {
        let num: BigInt = num.trim().parse().map_err(|_| bad())?;
        let den: BigInt = den.trim().parse().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(num, den));
    }
    let (negative, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits: BigInt = format!("{int}{frac}0").parse().map_err(|_| bad())?;
    let value = BigRational::new(digits, BigInt::from(10u8).pow(frac.len() as u32 + 1));
    Ok(if negative { -value } else { value })
}

/// Exact rational from a finite float.
fn rational_of(x: f64) -> Result<BigRational> {
    BigRational::from_float(x).ok_or_else(|| Error::OutOfRange(format!("{x} is not finite")))
}

fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::INFINITY)
}

fn ceil_big(x: &BigRational) -> BigUint {
    x.ceil().to_integer().to_biguint().unwrap_or_default()
}

fn pow4(q: usize) -> BigRational {
    BigRational::from_integer(BigInt::one() << (2 * q))
}

/// Parameters of Arthur's verifier for `q` question qubits and completeness gap `1/p`.
#[derive(Clone, Debug, PartialEq)]
pub struct ArthurParams {
    pub q: usize,
    pub gap: BigRational,
    pub epsilon: BigRational,
    pub delta: BigRational,
    pub n: BigUint,
    pub m: BigUint,
}

fn derived_delta(eps: &BigRational) -> BigRational {
    eps * eps / BigRational::from_integer(4.into())
}

fn derived_n(q: usize, delta: &BigRational) -> BigUint {
    let half = delta / BigRational::from_integer(2.into());
    ceil_big(&(BigRational::from_integer(BigInt::one() << (10 * q)) / (&half * &half * &half)))
}

fn derived_m(q: usize, n: &BigUint, eps: &BigRational) -> BigUint {
    let n = BigRational::from_integer(BigInt::from(n.clone()));
    ceil_big(&(BigRational::from_integer(2.into()) * n * pow4(q) / eps))
}

/// `eps = gap / 4^{q+1}`, `delta = eps^2/4`, `N = ceil(2^{10q} / (delta/2)^3)`, `m = ceil(2 N 4^q / eps)`.
pub fn arthur_params(q: usize, gap: &BigRational) -> Result<ArthurParams> {
    if !gap.is_positive() || gap >= &BigRational::one() {
        return Err(Error::OutOfRange(format!("gap {gap} outside (0, 1)")));
    }
    let epsilon = gap / pow4(q + 1);
    let delta = derived_delta(&epsilon);
    let n = derived_n(q, &delta);
    let m = derived_m(q, &n, &epsilon);
    Ok(ArthurParams {
        q,
        gap: gap.clone(),
        epsilon,
        delta,
        n,
        m,
    })
}

/// Desk-scale replacements. Unset fields are derived from the set ones by the usual formulas.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ArthurOverrides {
    pub epsilon: Option<f64>,
    pub delta: Option<f64>,
    pub n: Option<u64>,
    pub m: Option<u64>,
}

impl ArthurOverrides {
    pub fn is_empty(&self) -> bool {
        *self == Self::default()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Full,
    Override,
}

/// Parameters a run actually uses.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArthurSettings {
    pub q: usize,
    pub gap: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub n: u64,
    pub m: u64,
    pub regime: Regime,
}

impl ArthurSettings {
    /// Midpoint of the honest lower bound `a/4^q - eps` and the cheating upper bound `b/4^q + 2 eps`.
    pub fn threshold(&self, a: f64, b: f64) -> f64 {
        let scale = 0.25f64.powi(self.q as i32);
        0.5 * ((a * scale - self.epsilon) + (b * scale + 2.0 * self.epsilon))
    }
}

impl ArthurParams {
    pub fn resolve(&self, overrides: &ArthurOverrides) -> Result<ArthurSettings> {
        let epsilon = match overrides.epsilon {
            Some(e) if e > 0.0 && e < 1.0 => rational_of(e)?,
            Some(e) => return Err(Error::OutOfRange(format!("epsilon {e} outside (0, 1)"))),
            None => self.epsilon.clone(),
        };
        let delta = match overrides.delta {
            Some(d) if d > 0.0 && d < 1.0 => rational_of(d)?,
            Some(d) => return Err(Error::OutOfRange(format!("delta {d} outside (0, 1)"))),
            None => derived_delta(&epsilon),
        };
        let n = match overrides.n {
            Some(0) => return Err(Error::OutOfRange("N must be positive".into())),
            Some(n) => BigUint::from(n),
            None => derived_n(self.q, &delta),
        };
        let m = match overrides.m {
            Some(m) => BigUint::from(m),
            None => derived_m(self.q, &n, &epsilon),
        };
        let limit = BigUint::from(EXECUTION_LIMIT);
        if &n + &m > limit {
            return Err(Error::CapExceeded(format!(
                "N + m = {} exceeds the execution limit {EXECUTION_LIMIT}; override n and m",
                &n + &m
            )));
        }
        Ok(ArthurSettings {
            q: self.q,
            gap: to_f64(&self.gap),
            epsilon: to_f64(&epsilon),
            delta: to_f64(&delta),
            n: n.to_u64().expect("checked against the limit"),
            m: m.to_u64().expect("checked against the limit"),
            regime: if overrides.is_empty() { Regime::Full } else { Regime::Override },
        })
    }

    /// Exact values as strings, with floats and base-2 logarithms for reading.
    pub fn report(&self) -> Value {
        let log2 = |x: &BigUint| x.to_f64().map(f64::log2).unwrap_or(f64::INFINITY);
        json!({
            "q": self.q,
            "gap": self.gap.to_string(),
            "epsilon": self.epsilon.to_string(),
            "epsilon_f64": to_f64(&self.epsilon),
            "delta": self.delta.to_string(),
            "delta_f64": to_f64(&self.delta),
            "n": self.n.to_string(),
            "n_log2": log2(&self.n),
            "m": self.m.to_string(),
            "m_log2": log2(&self.m),
        })
    }
}

/// `N/(N+m) 2^{k+1}`: the de Finetti distance bound for `N` kept of `N+m` symmetric registers.
pub fn definetti_bound(n: u64, m: u64, k: usize) -> Result<BigRational> {
    if n == 0 || k == 0 {
        return Err(Error::OutOfRange("need N >= 1 and k >= 1".into()));
    }
    Ok(BigRational::new(BigInt::from(n) << (k + 1), BigInt::from(n) + BigInt::from(m)))
}

pub fn definetti_bound_f64(n: u64, m: u64, k: usize) -> Result<f64> {
    definetti_bound(n, m, k).map(|b| to_f64(&b))
}

/// Merlin's message: register pairs `(R_i, Q_i)`, each pair ordered `[R, Q]`.
#[derive(Clone, Debug)]
pub enum Witness {
    /// A product of pair states, `blocks[b].1` copies of `blocks[b].0` in order.
    Product { q: usize, r: usize, blocks: Vec<(Matrix, u64)> },
    /// An arbitrary state on `[R_1, Q_1, ..., R_n, Q_n]`.
    Dense { q: usize, r: usize, pairs: usize, state: Matrix },
}

impl Witness {
    pub fn iid(pair: &Matrix, q: usize, r: usize, copies: u64) -> Result<Self> {
        Self::product(q, r, vec![(pair.clone(), copies)])
    }

    pub fn product(q: usize, r: usize, blocks: Vec<(Matrix, u64)>) -> Result<Self> {
        let d = 1usize << (q + r);
        for (k, (m, _)) in blocks.iter().enumerate() {
            if m.nrows() != d || m.ncols() != d {
                return Err(Error::DimensionMismatch(format!(
                    "block {k} has dimension {}, expected {d}",
                    m.nrows()
                )));
            }
            DensityOperator::new(m.clone(), SubsystemShape::qubits(&[r, q]))?;
        }
        Ok(Witness::Product { q, r, blocks })
    }

    pub fn dense(q: usize, r: usize, pairs: usize, state: Matrix) -> Result<Self> {
        let qubits = pairs * (q + r);
        if qubits > MAX_DENSE_WITNESS_QUBITS {
            return Err(Error::CapExceeded(format!(
                "dense witness on {qubits} qubits exceeds {MAX_DENSE_WITNESS_QUBITS}"
            )));
        }
        if state.nrows() != 1 << qubits {
            return Err(Error::DimensionMismatch(format!(
                "state of dimension {} for {pairs} pairs of {} qubits",
                state.nrows(),
                q + r
            )));
        }
        let widths: Vec<usize> = (0..pairs).flat_map(|_| [r, q]).collect();
        DensityOperator::new(state.clone(), SubsystemShape::qubits(&widths))?;
        Ok(Witness::Dense { q, r, pairs, state })
    }

    pub fn pairs(&self) -> u64 {
        match self {
            Witness::Product { blocks, .. } => blocks.iter().map(|b| b.1).sum(),
            Witness::Dense { pairs, .. } => *pairs as u64,
        }
    }

    pub fn widths(&self) -> (usize, usize) {
        match self {
            Witness::Product { q, r, .. } | Witness::Dense { q, r, .. } => (*q, *r),
        }
    }

    /// The full state, for witnesses small enough to hold densely.
    pub fn to_dense(&self) -> Result<DensityOperator> {
        match self {
            Witness::Dense { q, r, pairs, state } => {
                let widths: Vec<usize> = (0..*pairs).flat_map(|_| [*r, *q]).collect();
                DensityOperator::new(state.clone(), SubsystemShape::qubits(&widths))
            }
            Witness::Product { q, r, blocks } => {
                let n = self.pairs() as usize;
                if n * (q + r) > MAX_DENSE_WITNESS_QUBITS {
                    return Err(Error::CapExceeded(format!(
                        "{n} pairs of {} qubits exceed {MAX_DENSE_WITNESS_QUBITS}",
                        q + r
                    )));
                }
                let mut out: Option<DensityOperator> = None;
                for (m, count) in blocks {
                    let pair = DensityOperator::new(m.clone(), SubsystemShape::qubits(&[*r, *q]))?;
                    for _ in 0..*count {
                        out = Some(match out {
                            None => pair.clone(),
                            Some(acc) => acc.tensor(&pair),
                        });
                    }
                }
                out.ok_or_else(|| Error::DimensionMismatch("witness has no pairs".into()))
            }
        }
    }
}

/// Copies of the normalized Choi state of a one-round, memoryless prover, held in factored form.
pub fn honest_witness(v: &ProtocolSpec, prover: &ProverSpec, copies: u64) -> Result<Witness> {
    if v.rounds() != 1 {
        return Err(Error::DimensionMismatch(format!(
            "honest witnesses need a one-round protocol, got {} rounds",
            v.rounds()
        )));
    }
    prover.check_against(&v.shape)?;
    let choi = choi_of_channel(&prover.channels[0]);
    Witness::iid(choi.matrix(), v.shape.q[0], v.shape.r[0], copies)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pipeline {
    Qma,
    Qiplog,
    Qam,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Accept,
    Reject,
    Yes,
    No,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeLabel {
    Exact,
    Sampled,
}

impl From<MeasureMode> for ModeLabel {
    fn from(mode: MeasureMode) -> Self {
        match mode {
            MeasureMode::Exact => ModeLabel::Exact,
            MeasureMode::Sampled { .. } => ModeLabel::Sampled,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecisionReport {
    pub pipeline: Pipeline,
    pub verdict: Verdict,
    pub estimate: f64,
    pub threshold: f64,
    pub mode: ModeLabel,
    pub regime: Regime,
    pub diagnostics: Map<String, Value>,
}

impl DecisionReport {
    /// Whether the verdict agrees with `estimate` against `threshold`.
    pub fn consistent(&self) -> bool {
        match self.verdict {
            Verdict::Yes => self.estimate >= self.threshold,
            Verdict::No => self.estimate < self.threshold,
            Verdict::Accept => self.threshold < self.estimate,
            Verdict::Reject => self.threshold >= self.estimate,
        }
    }
}

fn yes_no(estimate: f64, threshold: f64) -> Verdict {
    if estimate >= threshold {
        Verdict::Yes
    } else {
        Verdict::No
    }
}

/// Step-4 quantities for a (possibly unnormalized) pair operator on `[R, Q]`: the probability
/// that Bell post-selection succeeds and the probability that it succeeds and `V_1` accepts.
fn postselected_acceptance(v: &ProtocolSpec, pair: &Matrix) -> Result<(f64, f64)> {
    let (q, r, vm) = (v.shape.q[0], v.shape.r[0], v.memory[0]);
    let stages = v.verifier();
    // V_0 emits [vmem, Q]; the contraction wants Q leading.
    let prepared = stages[0].apply(&identity(1))?;
    let joint = permute_subsystems(&prepared, &SubsystemShape::qubits(&[vm, q]), &[1, 0])?;
    let out = postselect_contract(pair, 1 << r, 1 << q, &joint);
    let success = trace(&out).re;
    let fed = permute_subsystems(&out, &SubsystemShape::qubits(&[r, vm]), &[1, 0])?;
    let decided = stages[1].apply(&fed)?;
    Ok((success, decided[(1, 1)].re))
}

/// Outcome of steps 1-3 for one run: the surviving first pair and the tomography record.
struct Screened {
    first: Matrix,
    first_label: u64,
    distance: f64,
}

fn marginal_q(pair: &Matrix, q: usize, r: usize) -> Result<Matrix> {
    partial_trace(pair, &SubsystemShape::qubits(&[r, q]), &[1])
}

fn distance_to_mixed(h: &Matrix, q: usize) -> f64 {
    let d = 1usize << q;
    trace_norm(&(h - identity(d).scale(1.0 / d as f64)))
}

fn screen_product<R: Rng + ?Sized>(
    rng: &mut R,
    q: usize,
    r: usize,
    blocks: &[(Matrix, u64)],
    settings: &ArthurSettings,
    frame: Option<&Frame>,
    mode: MeasureMode,
) -> Result<Screened> {
    let mut remaining: Vec<u64> = blocks.iter().map(|b| b.1).collect();
    let total: u64 = remaining.iter().sum();
    // A uniform permutation followed by keeping the first N+1 pairs: the first pair is uniform,
    // and the other N form a uniform subset of the rest.
    let weights: Vec<f64> = remaining.iter().map(|&c| c as f64).collect();
    let b0 = weighted_index(rng, &weights);
    remaining[b0] -= 1;
    let mut left = total - 1;
    let mut draws = settings.n;
    let mut kept = vec![0u64; blocks.len()];
    for (k, &count) in remaining.iter().enumerate() {
        if draws == 0 {
            break;
        }
        let take = if count == left {
            draws
        } else {
            Hypergeometric::new(left, count, draws)
                .map_err(|e| Error::OutOfRange(e.to_string()))?
                .sample(rng)
        };
        kept[k] = take;
        draws -= take;
        left -= count;
    }
    let distance = match frame {
        None => 0.0,
        Some(frame) => {
            let mut freq = vec![0.0; frame.outcome_count()];
            for ((pair, _), &k) in blocks.iter().zip(&kept) {
                if k == 0 {
                    continue;
                }
                let p = frame.probabilities(&marginal_q(pair, q, r)?)?;
                let counts: Vec<f64> = match mode {
                    MeasureMode::Exact => p.iter().map(|x| x * k as f64).collect(),
                    MeasureMode::Sampled { .. } => multinomial(rng, k, &p).into_iter().map(|c| c as f64).collect(),
                };
                for (f, c) in freq.iter_mut().zip(counts) {
                    *f += c / settings.n as f64;
                }
            }
            distance_to_mixed(&frame.combine(&freq)?, q)
        }
    };
    Ok(Screened {
        first: blocks[b0].0.clone(),
        first_label: b0 as u64,
        distance,
    })
}

#[allow(clippy::too_many_arguments)]
fn screen_dense<R: Rng + ?Sized>(
    rng: &mut R,
    q: usize,
    r: usize,
    pairs: usize,
    state: &Matrix,
    settings: &ArthurSettings,
    frame: Option<&Frame>,
    mode: MeasureMode,
    identity_order: bool,
) -> Result<Screened> {
    let mut order: Vec<usize> = (0..pairs).collect();
    if !identity_order {
        order.shuffle(rng);
    }
    let n = settings.n as usize;
    let widths: Vec<usize> = (0..pairs).flat_map(|_| [r, q]).collect();
    let perm: Vec<usize> = order.iter().flat_map(|&i| [2 * i, 2 * i + 1]).collect();
    let permuted = permute_subsystems(state, &SubsystemShape::qubits(&widths), &perm)?;
    // keep R_1, Q_1 and the questions of the next N pairs
    let mut keep = vec![0, 1];
    keep.extend((1..=n).map(|i| 2 * i + 1));
    let reduced = partial_trace(&permuted, &SubsystemShape::qubits(&widths), &keep)?;
    let first_label = order[0] as u64;
    let Some(frame) = frame else {
        return Ok(Screened { first: reduced, first_label, distance: 0.0 });
    };
    let mut kept_widths = vec![r, q];
    kept_widths.extend(std::iter::repeat_n(q, n));
    match mode {
        MeasureMode::Exact => {
            let shape = SubsystemShape::qubits(&kept_widths);
            let mut avg = Matrix::zeros(1 << q, 1 << q);
            for i in 0..n {
                avg += partial_trace(&reduced, &shape, &[2 + i])?;
            }
            let first = partial_trace(&reduced, &shape, &[0, 1])?;
            Ok(Screened {
                first,
                first_label,
                distance: distance_to_mixed(&avg.unscale(n as f64), q),
            })
        }
        MeasureMode::Sampled { .. } => {
            let outcomes = frame.outcome_count();
            if outcomes.checked_pow(n as u32).is_none_or(|b| b > MAX_DENSE_BRANCHES) {
                return Err(Error::CapExceeded(format!(
                    "{outcomes}^{n} tomography outcome strings exceed {MAX_DENSE_BRANCHES}"
                )));
            }
            // Measure the trailing question registers one at a time, keeping every branch.
            let mut branches: Vec<(Vec<usize>, Matrix)> = vec![(Vec::new(), reduced)];
            for _ in 0..n {
                let mut next = Vec::with_capacity(branches.len() * outcomes);
                for (digits, op) in &branches {
                    let d_rest = op.nrows() >> q;
                    let shape = SubsystemShape::new(vec![d_rest, 1 << q])?;
                    for x in 0..outcomes {
                        let effect = crate::linalg::tensor(&identity(d_rest), &frame.measurement_operator(x));
                        let branch = partial_trace(&(op * effect), &shape, &[0])?;
                        let mut digits = digits.clone();
                        digits.push(x);
                        next.push((digits, branch));
                    }
                }
                branches = next;
            }
            let probs: Vec<f64> = branches.iter().map(|(_, m)| trace(m).re.max(0.0)).collect();
            let (digits, op) = &branches[weighted_index(rng, &probs)];
            let mut freq = vec![0.0; outcomes];
            for &x in digits {
                freq[x] += 1.0 / n as f64;
            }
            let p = trace(op).re;
            Ok(Screened {
                first: op.unscale(p),
                first_label,
                distance: distance_to_mixed(&frame.combine(&freq)?, q),
            })
        }
    }
}

/// One execution of Arthur's verifier: one witness draw, one verdict.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArthurTrial {
    /// Original index (dense) or block (product) of the pair used for the simulation.
    pub first_pair: u64,
    pub tomography_distance: f64,
    pub passed_tomography: bool,
    pub postselection_probability: f64,
    pub postselected: bool,
    /// Probability of acceptance given the pairs selected and the tomography record.
    pub accept_probability: f64,
    /// The uniform draw deciding post-selection and acceptance.
    pub draw: f64,
    pub accepted: bool,
}

fn check_arthur_inputs(v: &ProtocolSpec, witness: &Witness, settings: &ArthurSettings) -> Result<()> {
    if v.rounds() != 1 {
        return Err(Error::DimensionMismatch(format!(
            "Arthur's verifier needs a one-round protocol, got {} rounds",
            v.rounds()
        )));
    }
    let (q, r) = witness.widths();
    if (q, r) != (v.shape.q[0], v.shape.r[0]) || settings.q != q {
        return Err(Error::DimensionMismatch(format!(
            "witness pairs of {r}+{q} qubits for a protocol with r={} q={} and parameters for q={}",
            v.shape.r[0], v.shape.q[0], settings.q
        )));
    }
    // with m = 0 nothing beyond the N + 1 kept pairs is sent
    let expected = (settings.n + settings.m).max(settings.n + 1);
    if witness.pairs() != expected {
        return Err(Error::DimensionMismatch(format!(
            "witness has {} pairs, parameters expect {expected}",
            witness.pairs()
        )));
    }
    Ok(())
}

fn arthur_trial<R: Rng + ?Sized>(
    rng: &mut R,
    v: &ProtocolSpec,
    witness: &Witness,
    settings: &ArthurSettings,
    mode: MeasureMode,
    identity_order: bool,
) -> Result<ArthurTrial> {
    let q = settings.q;
    let frame = if q == 0 { None } else { Some(canonical_frame(q)?) };
    let screened = match witness {
        Witness::Product { q, r, blocks } => screen_product(rng, *q, *r, blocks, settings, frame.as_ref(), mode)?,
        Witness::Dense { q, r, pairs, state } => {
            screen_dense(rng, *q, *r, *pairs, state, settings, frame.as_ref(), mode, identity_order)?
        }
    };
    let passed = screened.distance <= settings.delta / 2.0;
    let (success, joint) = postselected_acceptance(v, &screened.first)?;
    let accept_probability = if passed { joint.clamp(0.0, 1.0) } else { 0.0 };
    let draw: f64 = rng.random();
    let postselected = passed && draw < success;
    Ok(ArthurTrial {
        first_pair: screened.first_label,
        tomography_distance: screened.distance,
        passed_tomography: passed,
        postselection_probability: success,
        postselected,
        accept_probability,
        draw,
        accepted: draw < accept_probability,
    })
}

/// One run of Arthur's verifier with tomography `mode` (exact frequencies or `N` sampled shots).
///
/// The report's estimate is the acceptance probability given the selected pairs and the
/// tomography record; the threshold is the uniform draw that decided the run.
pub fn arthur_qma_verify(
    v: &ProtocolSpec,
    witness: &Witness,
    settings: &ArthurSettings,
    mode: MeasureMode,
    seed: u64,
) -> Result<DecisionReport> {
    arthur_run(v, witness, settings, mode, seed, false)
}

/// [`arthur_qma_verify`] without the random permutation.
pub fn arthur_qma_verify_unpermuted(
    v: &ProtocolSpec,
    witness: &Witness,
    settings: &ArthurSettings,
    mode: MeasureMode,
    seed: u64,
) -> Result<DecisionReport> {
    if matches!(witness, Witness::Product { .. }) {
        return Err(Error::DimensionMismatch("the unpermuted run needs a dense witness".into()));
    }
    arthur_run(v, witness, settings, mode, seed, true)
}

fn arthur_run(
    v: &ProtocolSpec,
    witness: &Witness,
    settings: &ArthurSettings,
    mode: MeasureMode,
    seed: u64,
    identity_order: bool,
) -> Result<DecisionReport> {
    check_arthur_inputs(v, witness, settings)?;
    let mut rng = path_rng(seed, &[0xA27]);
    let trial = arthur_trial(&mut rng, v, witness, settings, mode, identity_order)?;
    let mut diagnostics = Map::new();
    diagnostics.insert("seed".into(), json!(seed));
    diagnostics.insert("settings".into(), json!(settings));
    diagnostics.insert("trial".into(), json!(trial));
    Ok(DecisionReport {
        pipeline: Pipeline::Qma,
        verdict: if trial.accepted { Verdict::Accept } else { Verdict::Reject },
        estimate: trial.accept_probability,
        threshold: trial.draw,
        mode: mode.into(),
        regime: settings.regime,
        diagnostics,
    })
}

/// Repeats Arthur's verifier `trials` times and compares the acceptance rate with the midpoint
/// threshold.
pub fn arthur_acceptance(
    v: &ProtocolSpec,
    witness: &Witness,
    settings: &ArthurSettings,
    mode: MeasureMode,
    trials: u64,
    seed: u64,
) -> Result<DecisionReport> {
    check_arthur_inputs(v, witness, settings)?;
    if trials == 0 {
        return Err(Error::OutOfRange("need at least one trial".into()));
    }
    let (mut accepted, mut rejected_step3, mut postselected) = (0u64, 0u64, 0u64);
    let mut mean_probability = 0.0;
    let mut worst_distance: f64 = 0.0;
    for k in 0..trials {
        let mut rng = path_rng(seed, &[0xA27, k]);
        let t = arthur_trial(&mut rng, v, witness, settings, mode, false)?;
        accepted += u64::from(t.accepted);
        rejected_step3 += u64::from(!t.passed_tomography);
        postselected += u64::from(t.postselected);
        mean_probability += t.accept_probability / trials as f64;
        worst_distance = worst_distance.max(t.tomography_distance);
    }
    let rate = accepted as f64 / trials as f64;
    let threshold = settings.threshold(v.a, v.b);
    let mut diagnostics = Map::new();
    diagnostics.insert("seed".into(), json!(seed));
    diagnostics.insert("trials".into(), json!(trials));
    diagnostics.insert("settings".into(), json!(settings));
    diagnostics.insert("step3_rejection_rate".into(), json!(rejected_step3 as f64 / trials as f64));
    diagnostics.insert("postselection_rate".into(), json!(postselected as f64 / trials as f64));
    diagnostics.insert("mean_accept_probability".into(), json!(mean_probability));
    diagnostics.insert("max_tomography_distance".into(), json!(worst_distance));
    if let (Witness::Product { blocks, .. }, MeasureMode::Exact) = (witness, mode) {
        if let [(pair, _)] = blocks.as_slice() {
            // every run is identical, so the conditional probability is the analytic rate
            diagnostics.insert("analytic_accept_probability".into(), json!(mean_probability));
            let (success, _) = postselected_acceptance(v, pair)?;
            diagnostics.insert("analytic_postselection_probability".into(), json!(success));
        }
    }
    Ok(DecisionReport {
        pipeline: Pipeline::Qma,
        verdict: yes_no(rate, threshold),
        estimate: rate,
        threshold,
        mode: mode.into(),
        regime: settings.regime,
        diagnostics,
    })
}

/// How the QIP_log decider obtains the Choi state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum QiplogMode {
    /// Use the Choi state itself.
    Exact,
    /// Reconstruct it by tomography; exact measurement frequencies give a zero-error run.
    Tomography { measure: MeasureMode },
}

fn value_of_view(view: &CoStrategyView, opts: &SdpOptions) -> Result<(f64, f64)> {
    if view.shape.total_q() == 0 {
        Ok((max_eigenvalue(&view.objective())?, 0.0))
    } else {
        let sol = max_acceptance_sdp_with(view, opts)?;
        Ok((sol.value, sol.gap))
    }
}

/// Decides a QIP_log instance by maximizing over strategies against `H_1`, the accepting
/// block of the (estimated) Choi state of the rewired verifier.
pub fn qiplog_decide(v: &ProtocolSpec, mode: QiplogMode, opts: &SdpOptions) -> Result<DecisionReport> {
    let shape = &v.shape;
    let phi = rewire_verifier(v)?;
    let rho = choi_of_channel(&phi);
    let k = 1 + shape.total_q() + shape.total_r();
    let scale = (1u64 << (shape.total_q() + shape.total_r())) as f64;
    let threshold = v.midpoint();
    let exact_view = accept_block(rho.matrix(), shape)?;
    let mut diagnostics = Map::new();
    let eps = v.gap / (4.0 * scale);
    diagnostics.insert("choi_qubits".into(), json!(k));
    diagnostics.insert(
        "full".into(),
        json!({
            "epsilon": eps,
            "n": sample_size(k, eps).map(|n| n.to_string()).unwrap_or_else(|e| e.to_string()),
        }),
    );
    let (estimate, regime, label) = match mode {
        QiplogMode::Exact => {
            let (value, gap) = value_of_view(&exact_view, opts)?;
            diagnostics.insert("sdp_gap".into(), json!(gap));
            (value, Regime::Full, ModeLabel::Exact)
        }
        QiplogMode::Tomography { measure } => {
            let frame = canonical_frame(k)?;
            let q = sample_outcomes(&frame.probabilities(rho.matrix())?, measure)?;
            let h = reconstruct(&q, &frame)?;
            let view = accept_block(&h, shape)?;
            let (value, gap) = value_of_view(&view, opts)?;
            let (exact, exact_gap) = value_of_view(&exact_view, opts)?;
            let distance = trace_norm(&(&h - rho.matrix()));
            let bound = scale * distance;
            diagnostics.insert("sdp_gap".into(), json!(gap));
            diagnostics.insert("exact_value".into(), json!(exact));
            diagnostics.insert("exact_sdp_gap".into(), json!(exact_gap));
            diagnostics.insert("tomography_error".into(), json!(distance));
            diagnostics.insert("error_bound".into(), json!(bound));
            diagnostics.insert(
                "bound_holds".into(),
                json!((value - exact).abs() <= bound + gap + exact_gap + 1e-9),
            );
            if let MeasureMode::Sampled { shots, seed } = measure {
                diagnostics.insert("shots".into(), json!(shots));
                diagnostics.insert("seed".into(), json!(seed));
            }
            let regime = match measure {
                MeasureMode::Exact => Regime::Full,
                MeasureMode::Sampled { .. } => Regime::Override,
            };
            (value, regime, measure.into())
        }
    };
    Ok(DecisionReport {
        pipeline: Pipeline::Qiplog,
        verdict: yes_no(estimate, threshold),
        estimate,
        threshold,
        mode: label,
        regime,
        diagnostics,
    })
}

/// `2^r ||(<1| (x) I) H (|1> (x) I)||` for `H` on `[A, R]`.
pub fn qam_alpha(h: &Matrix, r: usize) -> Result<f64> {
    let d = 1usize << r;
    if h.nrows() != 2 * d || h.ncols() != 2 * d {
        return Err(Error::DimensionMismatch(format!(
            "operator of dimension {} is not on an acceptance qubit and {r} response qubits",
            h.nrows()
        )));
    }
    let block = h.view((d, d), (d, d)).into_owned();
    Ok(d as f64 * spectral_norm(&block))
}

/// One coin outcome `y` of a QAM verifier: its probability weight and measurement on the response.
#[derive(Clone, Debug)]
pub struct QamInstance {
    pub weight: f64,
    pub p0: Matrix,
    pub p1: Matrix,
}

/// On-disk QAM family: coin outcomes with weights and accepting operators; `p0` defaults to `I - p1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QamDocument {
    pub a: f64,
    pub b: f64,
    pub instances: Vec<QamInstanceDocument>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QamInstanceDocument {
    #[serde(default = "unit_weight")]
    pub weight: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p0: Option<MatrixLiteral>,
    pub p1: MatrixLiteral,
}

fn unit_weight() -> f64 {
    1.0
}

/// A parsed QAM family with thresholds.
#[derive(Clone, Debug)]
pub struct QamFamily {
    pub a: f64,
    pub b: f64,
    pub instances: Vec<QamInstance>,
}

pub fn parse_qam(text: &str) -> Result<QamFamily> {
    let doc: QamDocument = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    if !(0.0..=1.0).contains(&doc.a) || !(0.0..=1.0).contains(&doc.b) || doc.a <= doc.b {
        return Err(Error::Invariant {
            path: "a".into(),
            message: format!("thresholds a = {} and b = {} need 0 <= b < a <= 1", doc.a, doc.b),
        });
    }
    let instances = doc
        .instances
        .iter()
        .enumerate()
        .map(|(y, inst)| {
            let at = |field: &str, e: Error| Error::Invariant {
                path: format!("instances[{y}].{field}"),
                message: e.to_string(),
            };
            let p1 = inst.p1.to_matrix().map_err(|e| at("p1", e))?;
            let p0 = match &inst.p0 {
                Some(m) => m.to_matrix().map_err(|e| at("p0", e))?,
                None if p1.is_square() => identity(p1.nrows()) - &p1,
                None => return Err(at("p1", Error::NotSquare { rows: p1.nrows(), cols: p1.ncols() })),
            };
            validate_binary_measurement(&p0, &p1).map_err(|e| at("p1", e))?;
            Ok(QamInstance { weight: inst.weight, p0, p1 })
        })
        .collect::<Result<Vec<_>>>()?;
    if instances.is_empty() {
        return Err(Error::Invariant {
            path: "instances".into(),
            message: "no coin outcomes".into(),
        });
    }
    Ok(QamFamily { a: doc.a, b: doc.b, instances })
}

/// Full-scale accuracy `gap / 2^{r+3}` and the matching sample size.
pub fn qam_full_parameters(r: usize, gap: f64) -> Result<(f64, u128)> {
    let eps = gap / (1u64 << (r + 3)) as f64;
    Ok((eps, sample_size(r + 1, eps)?))
}

/// Decides a QAM instance: draw `y`, estimate `alpha_y`, accept with probability `min(alpha_y, 1)`.
pub fn qam_decide(
    instances: &[QamInstance],
    a: f64,
    b: f64,
    mode: MeasureMode,
    trials: u64,
    seed: u64,
) -> Result<DecisionReport> {
    let first = instances
        .first()
        .ok_or_else(|| Error::InvalidMeasurement("no coin outcomes".into()))?;
    let d = first.p1.nrows();
    if !d.is_power_of_two() {
        return Err(Error::DimensionMismatch(format!("dimension {d} is not a qubit register")));
    }
    let r = d.trailing_zeros() as usize;
    if trials == 0 {
        return Err(Error::OutOfRange("need at least one trial".into()));
    }
    let mut weights = Vec::with_capacity(instances.len());
    let mut frame_probs = Vec::with_capacity(instances.len());
    let mut exact_alpha = Vec::with_capacity(instances.len());
    let mut norms = Vec::with_capacity(instances.len());
    let frame = canonical_frame(r + 1)?;
    for (y, inst) in instances.iter().enumerate() {
        if inst.p1.nrows() != d {
            return Err(Error::DimensionMismatch(format!("coin outcome {y} acts on a different register")));
        }
        if !(inst.weight >= 0.0 && inst.weight.is_finite()) {
            return Err(Error::OutOfRange(format!("coin outcome {y} has weight {}", inst.weight)));
        }
        validate_binary_measurement(&inst.p0, &inst.p1)?;
        let choi = choi_of_channel(&measurement_channel(&inst.p0, &inst.p1)?);
        weights.push(inst.weight);
        exact_alpha.push(qam_alpha(choi.matrix(), r)?);
        norms.push(spectral_norm(&inst.p1));
        if matches!(mode, MeasureMode::Sampled { .. }) {
            frame_probs.push(frame.probabilities(choi.matrix())?);
        }
    }
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(Error::OutOfRange("coin weights sum to zero".into()));
    }
    let mut accepted = 0u64;
    let mut mean_alpha = 0.0;
    for k in 0..trials {
        let mut rng = path_rng(seed, &[0x9A4, k]);
        let y = weighted_index(&mut rng, &weights);
        let alpha = match mode {
            MeasureMode::Exact => exact_alpha[y],
            MeasureMode::Sampled { shots, .. } => {
                let counts = sample_counts(&frame_probs[y], shots, seed, &[0x9A4, k, 1]);
                let freq: Vec<f64> = counts.iter().map(|&c| c as f64 / shots as f64).collect();
                qam_alpha(&frame.combine(&freq)?, r)?
            }
        };
        mean_alpha += alpha / trials as f64;
        accepted += u64::from(bernoulli(&mut rng, alpha.min(1.0)));
    }
    let rate = accepted as f64 / trials as f64;
    let threshold = 0.5 * (a + b);
    let expected_norm: f64 = weights.iter().zip(&norms).map(|(w, n)| w * n).sum::<f64>() / total;
    let mut diagnostics = Map::new();
    diagnostics.insert("seed".into(), json!(seed));
    diagnostics.insert("trials".into(), json!(trials));
    diagnostics.insert("response_qubits".into(), json!(r));
    diagnostics.insert("expected_norm".into(), json!(expected_norm));
    diagnostics.insert("mean_alpha".into(), json!(mean_alpha));
    if a > b {
        let (eps, n) = qam_full_parameters(r, a - b)?;
        diagnostics.insert("full".into(), json!({"epsilon": eps, "n": n.to_string()}));
    }
    if let MeasureMode::Sampled { shots, .. } = mode {
        diagnostics.insert("shots".into(), json!(shots));
    }
    Ok(DecisionReport {
        pipeline: Pipeline::Qam,
        verdict: yes_no(rate, threshold),
        estimate: rate,
        threshold,
        mode: mode.into(),
        regime: match mode {
            MeasureMode::Exact => Regime::Full,
            MeasureMode::Sampled { .. } => Regime::Override,
        },
        diagnostics,
    })
}
