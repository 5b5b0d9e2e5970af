//! Seeded random operators for tests, see-saw initialisation and fixtures.

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{c, trace, Matrix};
use crate::sampling;

pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    sampling::stream_rng(seed, 0)
}

pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> Matrix {
    DMatrix::from_fn(rows, cols, |_, _| {
        c(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    })
}

/// Haar-distributed unitary via QR with phase correction.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Matrix {
    random_isometry(rng, dim, dim)
}

/// `rows x cols` isometry (`cols <= rows`).
pub fn random_isometry<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> Matrix {
    assert!(cols <= rows, "isometry needs cols <= rows");
    let qr = ginibre(rng, rows, cols).qr();
    let (mut q, r) = (qr.q(), qr.r());
    for k in 0..cols {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c(1.0, 0.0) };
        for i in 0..rows {
            q[(i, k)] *= phase;
        }
    }
    q
}

pub fn random_density<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Matrix {
    let g = ginibre(rng, dim, dim);
    let w = &g * g.adjoint();
    let tr = trace(&w).re;
    w.unscale(tr)
}

pub fn random_pure<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Matrix {
    let v = ginibre(rng, dim, 1);
    let v = v.unscale(v.norm());
    &v * v.adjoint()
}

pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Matrix {
    let g = ginibre(rng, dim, dim);
    (&g + g.adjoint()).scale(0.5)
}

/// Kraus operators of a random channel `dim_in -> dim_out` with `count` operators.
pub fn random_kraus<R: Rng + ?Sized>(
    rng: &mut R,
    dim_out: usize,
    dim_in: usize,
    count: usize,
) -> Vec<Matrix> {
    let v = random_isometry(rng, dim_out * count, dim_in);
    (0..count)
        .map(|k| v.rows(k * dim_out, dim_out).into_owned())
        .collect()
}

/// Random channel on qubits with enough Kraus operators to be a valid isometry.
pub fn random_channel<R: Rng + ?Sized>(rng: &mut R, in_qubits: usize, out_qubits: usize) -> crate::channels::QuantumChannel {
    let (d_in, d_out) = (1usize << in_qubits, 1usize << out_qubits);
    let count = 2.max(d_in.div_ceil(d_out));
    crate::channels::QuantumChannel::new(in_qubits, out_qubits, random_kraus(rng, d_out, d_in, count))
        .expect("isometry blocks form a channel")
}

/// Random binary measurement `(P0, P1)` on `dim` dimensions.
pub fn random_binary_measurement<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> (Matrix, Matrix) {
    let u = random_unitary(rng, dim);
    let weights: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
    let p1 = &u * crate::linalg::diag(&weights) * u.adjoint();
    let p0 = crate::linalg::identity(dim) - &p1;
    (p0, p1)
}
