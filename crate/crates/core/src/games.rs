//! Small reference protocols with known values.

use std::f64::consts::FRAC_1_SQRT_2;

use rand::Rng;

use crate::channels::{measurement_channel, QuantumChannel};
use crate::circuit::{CircuitDesc, Gate, WireRoles};
use crate::circuit::hadamard;
use crate::error::Result;
use crate::linalg::{identity, ket, tensor, tensor_all, Matrix};
use crate::protocols::{ProtocolSpec, StageDesc};
use crate::random::{random_binary_measurement, random_channel};
use crate::strategies::RoundShape;

/// `cos^2(pi/8)`.
pub fn cos2_pi_8() -> f64 {
    (std::f64::consts::PI / 8.0).cos().powi(2)
}

/// One round, no question: the prover sends `r` qubits and the verifier measures `{I - P, P}`.
pub fn measure_only(p_acc: &Matrix, a: f64, b: f64, gap: f64) -> Result<ProtocolSpec> {
    let d = p_acc.nrows();
    let m = measurement_channel(&(identity(d) - p_acc), p_acc)?;
    let r = d.trailing_zeros() as usize;
    ProtocolSpec::from_channels(
        RoundShape::single(0, r),
        vec![0],
        &[QuantumChannel::identity(0), m],
        a,
        b,
        gap,
    )
}

/// The verifier sends a uniformly random classical bit and accepts iff it is echoed back.
pub fn echo_game(a: f64, b: f64, gap: f64) -> Result<ProtocolSpec> {
    let w = |s: &str| s.to_string();
    let prepare = CircuitDesc {
        inputs: WireRoles::default(),
        outputs: WireRoles::new(&["m"], &["q"]),
        gates: vec![
            Gate::Ancilla(w("m")),
            Gate::H(w("m")),
            // dephase the coin by copying it into a discarded wire
            Gate::Ancilla(w("e")),
            Gate::Cnot { control: w("m"), target: w("e") },
            Gate::Erase(w("e")),
            Gate::Ancilla(w("q")),
            Gate::Cnot { control: w("m"), target: w("q") },
        ],
    };
    let mut compare = vec![Gate::Cnot { control: w("r"), target: w("m") }, Gate::H(w("m"))];
    compare.extend((0..4).map(|_| Gate::T(w("m"))));
    compare.extend([Gate::H(w("m")), Gate::Erase(w("r"))]);
    let decide = CircuitDesc {
        inputs: WireRoles::new(&["m"], &["r"]),
        outputs: WireRoles::new(&[], &["m"]),
        gates: compare,
    };
    ProtocolSpec::new(
        RoundShape::single(1, 1),
        vec![1],
        vec![StageDesc::Circuit(prepare), StageDesc::Circuit(decide)],
        a,
        b,
        gap,
    )
}

fn basis_change(c: usize) -> Matrix {
    if c == 0 {
        identity(2)
    } else {
        hadamard()
    }
}

/// The prover sends `r1`, the verifier announces a random basis bit `c`, the prover sends
/// a prediction `r2`, and the verifier measures `r1` in basis `c` and accepts iff the outcome
/// equals `r2`.
pub fn commit_then_basis(a: f64, b: f64, gap: f64) -> Result<ProtocolSpec> {
    let announce: Vec<Matrix> = (0..2)
        .map(|c| tensor(&identity(2), &tensor(&ket(2, c), &ket(2, c))).scale(FRAC_1_SQRT_2))
        .collect();
    let mut check = Vec::new();
    for c in 0..2 {
        for o in 0..2 {
            for r2 in 0..2 {
                let bra = tensor_all([
                    &(ket(2, o).adjoint() * basis_change(c)),
                    &ket(2, c).adjoint(),
                    &ket(2, r2).adjoint(),
                ]);
                check.push(ket(2, usize::from(o == r2)) * bra);
            }
        }
    }
    ProtocolSpec::from_channels(
        RoundShape::new(vec![0, 1], vec![1, 1])?,
        vec![0, 2],
        &[
            QuantumChannel::identity(0),
            QuantumChannel::new(1, 3, announce)?,
            QuantumChannel::new(3, 1, check)?,
        ],
        a,
        b,
        gap,
    )
}

/// Like [`commit_then_basis`] but the verifier measures `r1` in a private random basis `x`,
/// announces an independent bit `y`, and accepts iff `a xor r2 = x and y`.
pub fn private_basis_game(a: f64, b: f64, gap: f64) -> Result<ProtocolSpec> {
    let mut measure = Vec::new();
    for x in 0..2 {
        for out in 0..2 {
            for y in 0..2 {
                let record = tensor_all([&ket(2, x), &ket(2, out), &ket(2, y), &ket(2, y)]);
                measure.push((record * ket(2, out).adjoint() * basis_change(x)).scale(0.5));
            }
        }
    }
    let mut check = Vec::new();
    for x in 0..2 {
        for out in 0..2 {
            for y in 0..2 {
                for r2 in 0..2 {
                    let accept = usize::from((out ^ r2) == (x & y));
                    let bra = tensor_all([&ket(2, x), &ket(2, out), &ket(2, y), &ket(2, r2)]).adjoint();
                    check.push(ket(2, accept) * bra);
                }
            }
        }
    }
    ProtocolSpec::from_channels(
        RoundShape::new(vec![0, 1], vec![1, 1])?,
        vec![0, 3],
        &[
            QuantumChannel::identity(0),
            QuantumChannel::new(1, 4, measure)?,
            QuantumChannel::new(4, 1, check)?,
        ],
        a,
        b,
        gap,
    )
}

/// Random verifier channels for the given shape and memory widths.
pub fn random_protocol<R: Rng + ?Sized>(rng: &mut R, shape: &RoundShape, memory: &[usize]) -> Result<ProtocolSpec> {
    let t = shape.rounds();
    let mut stages = Vec::with_capacity(t + 1);
    for j in 0..=t {
        let n_in = if j == 0 { 0 } else { memory[j - 1] + shape.r[j - 1] };
        let n_out = if j == t { 1 } else { memory[j] + shape.q[j] };
        stages.push(random_channel(rng, n_in, n_out));
    }
    ProtocolSpec::from_channels(shape.clone(), memory.to_vec(), &stages, 0.9, 0.1, 0.5)
}

/// A random instance among a few small shapes, chosen by `kind`.
pub fn random_small_protocol<R: Rng + ?Sized>(rng: &mut R, kind: usize) -> Result<ProtocolSpec> {
    match kind % 4 {
        0 => random_protocol(rng, &RoundShape::single(1, 1), &[1]),
        1 => random_protocol(rng, &RoundShape::single(1, 2), &[1]),
        2 => random_protocol(rng, &RoundShape::single(0, 2), &[0]),
        _ => random_protocol(rng, &RoundShape::new(vec![0, 1], vec![1, 1])?, &[0, 1]),
    }
}

/// Measure-only protocol with a random accepting operator on `r` qubits.
pub fn random_measure_only<R: Rng + ?Sized>(rng: &mut R, r: usize) -> Result<(ProtocolSpec, Matrix)> {
    let (_, p1) = random_binary_measurement(rng, 1 << r);
    Ok((measure_only(&p1, 0.9, 0.1, 0.5)?, p1))
}
