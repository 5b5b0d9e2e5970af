//! See-saw lower bounds: optimize one prover channel at a time with the others fixed.
//!
//! Each sub-step is a single-round strategy problem over the Choi matrix of `P_j`, so every
//! value reported is achieved by an explicit prover.

use serde::{Deserialize, Serialize};

use crate::channels::{kraus_from_choi_matrix, normalize_choi, QuantumChannel};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::protocols::{interact_with_cap, split_at_prover, ProtocolSpec, ProverSpec, DEFAULT_QUBIT_CAP};
use crate::random::random_channel;
use crate::sampling::path_rng;
use crate::strategies::{solve_strategy_sdp, RoundShape, SdpOptions};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeesawConfig {
    pub iters: usize,
    pub seed: u64,
    /// Largest prover memory width between rounds.
    pub memory_cap: usize,
    pub qubit_cap: usize,
    pub sdp: SdpOptions,
}

impl Default for SeesawConfig {
    fn default() -> Self {
        Self {
            iters: 50,
            seed: 0,
            memory_cap: 2,
            qubit_cap: DEFAULT_QUBIT_CAP,
            sdp: SdpOptions::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SeesawResult {
    pub value: f64,
    pub prover: ProverSpec,
    /// Value after each sweep over the rounds.
    pub history: Vec<f64>,
}

/// Memory widths `p_1..p_{t-1}`: everything exchanged so far, capped.
pub fn default_prover_memory(shape: &RoundShape, cap: usize) -> Vec<usize> {
    let t = shape.rounds();
    (1..t)
        .map(|j| (shape.q[..j].iter().sum::<usize>() + shape.r[..j].iter().sum::<usize>()).min(cap))
        .collect()
}

/// Achievable acceptance probability after `iters` sweeps from a seeded random prover.
pub fn seesaw_lower_bound(v: &ProtocolSpec, iters: usize, seed: u64) -> Result<f64> {
    let config = SeesawConfig {
        iters,
        seed,
        ..SeesawConfig::default()
    };
    seesaw(v, &config).map(|r| r.value)
}

pub fn seesaw(v: &ProtocolSpec, config: &SeesawConfig) -> Result<SeesawResult> {
    let memory = default_prover_memory(&v.shape, config.memory_cap);
    let t = v.rounds();
    let widths: Vec<(usize, usize)> = (1..=t)
        .map(|j| {
            let before = if j == 1 { 0 } else { memory[j - 2] };
            let after = memory.get(j - 1).copied().unwrap_or(0);
            (before + v.shape.q[j - 1], after + v.shape.r[j - 1])
        })
        .collect();
    for &(i, o) in &widths {
        if (1usize << (i + o)) > config.sdp.max_dim {
            return Err(Error::CapExceeded(format!(
                "prover channel {i} -> {o} qubits exceeds the solver cap {}",
                config.sdp.max_dim
            )));
        }
    }
    let mut rng = path_rng(config.seed, &[0x5EE5A7]);
    let channels = widths.iter().map(|&(i, o)| random_channel(&mut rng, i, o)).collect();
    let mut prover = ProverSpec::new(memory, channels)?;
    let mut value = interact_with_cap(v, &prover, config.qubit_cap)?;
    let mut history = Vec::with_capacity(config.iters);
    for _ in 0..config.iters {
        let start = value;
        for j in 1..=t {
            let (i, o) = widths[j - 1];
            let (rho, effect) = split_at_prover(v, &prover, j, config.qubit_cap)?;
            let w = linear_functional(&rho, &effect, 1 << i, 1 << o);
            let sol = solve_strategy_sdp(&w, &RoundShape::single(i, o), &config.sdp)?;
            let choi = match normalize_choi(&sol.strategy.x, o, i) {
                Ok(c) => c,
                Err(_) => continue,
            };
            let kraus = kraus_from_choi_matrix(&choi, 1 << o, 1 << i);
            let mut candidate = prover.clone();
            candidate.channels[j - 1] = QuantumChannel::new(i, o, kraus)?;
            let next = interact_with_cap(v, &candidate, config.qubit_cap)?;
            if next >= value {
                value = next;
                prover = candidate;
            }
        }
        history.push(value);
        if value - start <= 1e-12 {
            break;
        }
    }
    Ok(SeesawResult { value, prover, history })
}

/// `W` on `[out, in]` with acceptance `<W, J>` for the Choi matrix `J` of the free channel,
/// given the state `rho` on `[in, env]` before it and the accepting effect on `[out, env]` after.
fn linear_functional(rho: &Matrix, effect: &Matrix, d_in: usize, d_out: usize) -> Matrix {
    let d_env = rho.nrows() / d_in;
    let n = d_out * d_in;
    Matrix::from_fn(n, n, |row, col| {
        let (o, i) = (row / d_in, row % d_in);
        let (o2, i2) = (col / d_in, col % d_in);
        let mut acc = num_complex::Complex64::new(0.0, 0.0);
        for e in 0..d_env {
            for e2 in 0..d_env {
                acc += effect[(o2 * d_env + e2, o * d_env + e)] * rho[(i * d_env + e, i2 * d_env + e2)];
            }
        }
        acc.conj()
    })
}
