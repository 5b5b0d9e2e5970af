//! Quantum channels in Kraus form, their normalized Choi states, and channel
//! application by Bell-measurement post-selection on a Choi state.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::linalg::{
    hermitian_eigen, hermitian_part, identity, inner, partial_trace, real, tensor, trace,
    zeros, DensityOperator, Matrix, SubsystemShape, TOL,
};

/// Completely positive trace-preserving map from `in_qubits` to `out_qubits`.
#[derive(Clone, Debug)]
pub struct QuantumChannel {
    in_qubits: usize,
    out_qubits: usize,
    kraus: Vec<Matrix>,
    superop: OnceLock<Matrix>,
}

impl QuantumChannel {
    pub fn new(in_qubits: usize, out_qubits: usize, kraus: Vec<Matrix>) -> Result<Self> {
        if kraus.is_empty() {
            return Err(Error::InvalidChannel("no Kraus operators".into()));
        }
        let (d_in, d_out) = (1usize << in_qubits, 1usize << out_qubits);
        if let Some(k) = kraus.iter().find(|k| k.nrows() != d_out || k.ncols() != d_in) {
            return Err(Error::InvalidChannel(format!(
                "Kraus operator is {}x{}, expected {d_out}x{d_in}",
                k.nrows(),
                k.ncols()
            )));
        }
        let channel = Self::from_kraus_unchecked(in_qubits, out_qubits, kraus);
        let dev = channel.completeness_deviation();
        if dev > TOL {
            return Err(Error::InvalidChannel(format!(
                "Kraus completeness violated by {dev:.3e}"
            )));
        }
        Ok(channel)
    }

    pub(crate) fn from_kraus_unchecked(in_qubits: usize, out_qubits: usize, kraus: Vec<Matrix>) -> Self {
        Self {
            in_qubits,
            out_qubits,
            kraus,
            superop: OnceLock::new(),
        }
    }

    pub fn identity(qubits: usize) -> Self {
        Self::from_kraus_unchecked(qubits, qubits, vec![identity(1 << qubits)])
    }

    pub fn unitary(u: Matrix) -> Result<Self> {
        let qubits = u.nrows().trailing_zeros() as usize;
        if !u.is_square() || !u.nrows().is_power_of_two() {
            return Err(Error::InvalidChannel("unitary must be square on qubits".into()));
        }
        Self::new(qubits, qubits, vec![u])
    }

    /// Replaces every input by the maximally mixed state.
    pub fn fully_depolarizing(qubits: usize) -> Self {
        let d = 1usize << qubits;
        let scale = 1.0 / (d as f64).sqrt();
        let kraus = (0..d)
            .flat_map(|i| (0..d).map(move |j| (i, j)))
            .map(|(i, j)| crate::linalg::matrix_unit(d, i, j).scale(scale))
            .collect();
        Self::from_kraus_unchecked(qubits, qubits, kraus)
    }

    /// Discards the input and prepares `state`.
    pub fn replacement(in_qubits: usize, state: &DensityOperator) -> Result<Self> {
        let out_qubits = state.dim().trailing_zeros() as usize;
        let d_in = 1usize << in_qubits;
        let (values, vectors) = hermitian_eigen(state.matrix());
        let mut kraus = Vec::new();
        for (k, &lambda) in values.iter().enumerate() {
            if lambda <= 1e-14 {
                continue;
            }
            let v = vectors.column(k).into_owned().scale(lambda.sqrt());
            for j in 0..d_in {
                let mut op = zeros(state.dim(), d_in);
                op.set_column(j, &v);
                kraus.push(op);
            }
        }
        Self::new(in_qubits, out_qubits, kraus)
    }

    /// Channel with normalized Choi state `choi` (registers `[out, in]`).
    pub fn from_choi(choi: &ChoiState) -> Result<Self> {
        let scale = (1usize << choi.in_qubits) as f64;
        let kraus = kraus_from_choi_matrix(
            &choi.state.matrix().scale(scale),
            1 << choi.out_qubits,
            1 << choi.in_qubits,
        );
        Self::new(choi.in_qubits, choi.out_qubits, kraus)
    }

    pub fn in_qubits(&self) -> usize {
        self.in_qubits
    }

    pub fn out_qubits(&self) -> usize {
        self.out_qubits
    }

    pub fn in_dim(&self) -> usize {
        1 << self.in_qubits
    }

    pub fn out_dim(&self) -> usize {
        1 << self.out_qubits
    }

    pub fn kraus(&self) -> &[Matrix] {
        &self.kraus
    }

    pub fn completeness_deviation(&self) -> f64 {
        let sum = self
            .kraus
            .iter()
            .fold(zeros(self.in_dim(), self.in_dim()), |acc, k| acc + k.adjoint() * k);
        (sum - identity(self.in_dim()))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// `sum_i K_i X K_i*` for any operator `X` on the input space.
    pub fn apply(&self, x: &Matrix) -> Result<Matrix> {
        if x.nrows() != self.in_dim() || x.ncols() != self.in_dim() {
            return Err(Error::DimensionMismatch(format!(
                "channel input dimension {} vs operator {}x{}",
                self.in_dim(),
                x.nrows(),
                x.ncols()
            )));
        }
        Ok(self
            .kraus
            .iter()
            .fold(zeros(self.out_dim(), self.out_dim()), |acc, k| acc + k * x * k.adjoint()))
    }

    pub fn apply_state(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        let out = self.apply(rho.matrix())?;
        Ok(DensityOperator::from_parts_unchecked(
            hermitian_part(&out),
            SubsystemShape::qubits(&[self.out_qubits]),
        ))
    }

    /// Unnormalized Choi matrix `sum_{y,z} Phi(|y><z|) (x) |y><z|`, registers `[out, in]`.
    pub fn choi_matrix(&self) -> Matrix {
        let d_in = self.in_dim();
        let mut j = zeros(self.out_dim() * d_in, self.out_dim() * d_in);
        for k in &self.kraus {
            // vec(K) with the output index leading: |K>> = sum_y K|y> (x) |y>
            let mut v = zeros(self.out_dim() * d_in, 1);
            for o in 0..self.out_dim() {
                for y in 0..d_in {
                    v[(o * d_in + y, 0)] = k[(o, y)];
                }
            }
            j += &v * v.adjoint();
        }
        j
    }

    /// Superoperator matrix acting on row-major vectorisations, cached after first use.
    pub fn superoperator(&self) -> &Matrix {
        self.superop.get_or_init(|| {
            self.kraus.iter().fold(
                zeros(self.out_dim() * self.out_dim(), self.in_dim() * self.in_dim()),
                |acc, k| acc + tensor(k, &k.map(|z| z.conj())),
            )
        })
    }

    /// `other` applied after `self`.
    pub fn then(&self, other: &QuantumChannel) -> Result<QuantumChannel> {
        if other.in_qubits != self.out_qubits {
            return Err(Error::DimensionMismatch(format!(
                "composing {}-qubit output into {}-qubit input",
                self.out_qubits, other.in_qubits
            )));
        }
        let kraus = other
            .kraus
            .iter()
            .flat_map(|b| self.kraus.iter().map(move |a| b * a))
            .collect();
        Ok(Self::from_kraus_unchecked(self.in_qubits, other.out_qubits, kraus).compressed())
    }

    /// Parallel composition with `self` on the leading registers.
    pub fn tensor(&self, other: &QuantumChannel) -> QuantumChannel {
        let kraus = self
            .kraus
            .iter()
            .flat_map(|a| other.kraus.iter().map(move |b| tensor(a, b)))
            .collect();
        Self::from_kraus_unchecked(
            self.in_qubits + other.in_qubits,
            self.out_qubits + other.out_qubits,
            kraus,
        )
        .compressed()
    }

    /// Equivalent channel with at most `d_in * d_out` Kraus operators.
    pub fn compressed(self) -> Self {
        if self.kraus.len() <= self.in_dim() * self.out_dim() {
            return self;
        }
        let kraus = kraus_from_choi_matrix(&self.choi_matrix(), self.out_dim(), self.in_dim());
        Self::from_kraus_unchecked(self.in_qubits, self.out_qubits, kraus)
    }
}

/// Kraus operators from the spectral decomposition of an unnormalized Choi matrix.
pub(crate) fn kraus_from_choi_matrix(j: &Matrix, d_out: usize, d_in: usize) -> Vec<Matrix> {
    let (values, vectors) = hermitian_eigen(j);
    let mut kraus: Vec<Matrix> = values
        .iter()
        .enumerate()
        .rev()
        .filter(|(_, &l)| l > 1e-13)
        .map(|(k, &l)| {
            let s = l.sqrt();
            Matrix::from_fn(d_out, d_in, |o, y| vectors[(o * d_in + y, k)] * s)
        })
        .collect();
    if kraus.is_empty() {
        kraus.push(zeros(d_out, d_in));
    }
    kraus
}

/// Rescales an unnormalized Choi matrix on `[out, in]` so that `Tr_out J = I`, by
/// conjugating with `I (x) S^{-1/2}` where `S = Tr_out J`.
pub(crate) fn normalize_choi(j: &Matrix, out_qubits: usize, in_qubits: usize) -> Result<Matrix> {
    let shape = SubsystemShape::qubits(&[out_qubits, in_qubits]);
    let s = partial_trace(j, &shape, &[1])?;
    let (values, _) = hermitian_eigen(&s);
    if values[0] <= 1e-12 {
        return Err(Error::InvalidChannel(format!(
            "input marginal is singular (smallest eigenvalue {:.3e})",
            values[0]
        )));
    }
    let inv_sqrt = crate::linalg::hermitian_function(&s, |x| 1.0 / x.sqrt());
    let t = tensor(&identity(1 << out_qubits), &inv_sqrt);
    Ok(hermitian_part(&(&t * j * &t)))
}

/// Normalized Choi state of a channel: `(1/2^k) sum Phi(|y><z|) (x) |y><z|` on `[out, in]`.
#[derive(Clone, Debug)]
pub struct ChoiState {
    state: DensityOperator,
    in_qubits: usize,
    out_qubits: usize,
}

impl ChoiState {
    /// Validates positivity, unit trace and the input-marginal condition.
    pub fn new(state: DensityOperator, in_qubits: usize, out_qubits: usize) -> Result<Self> {
        if state.dim() != 1 << (in_qubits + out_qubits) {
            return Err(Error::DimensionMismatch(format!(
                "Choi state of dimension {} for {out_qubits}+{in_qubits} qubits",
                state.dim()
            )));
        }
        let shape = SubsystemShape::qubits(&[out_qubits, in_qubits]);
        let marginal = partial_trace(state.matrix(), &shape, &[1])?;
        let target = identity(1 << in_qubits).scale(1.0 / (1usize << in_qubits) as f64);
        let dev = (marginal - target).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if dev > TOL {
            return Err(Error::InvalidState(format!(
                "input marginal deviates from maximally mixed by {dev:.3e}"
            )));
        }
        let matrix = state.into_matrix();
        Ok(Self {
            state: DensityOperator::from_parts_unchecked(matrix, shape),
            in_qubits,
            out_qubits,
        })
    }

    pub fn state(&self) -> &DensityOperator {
        &self.state
    }

    pub fn matrix(&self) -> &Matrix {
        self.state.matrix()
    }

    pub fn in_qubits(&self) -> usize {
        self.in_qubits
    }

    pub fn out_qubits(&self) -> usize {
        self.out_qubits
    }
}

pub fn choi_of_channel(channel: &QuantumChannel) -> ChoiState {
    let scale = 1.0 / channel.in_dim() as f64;
    let matrix = hermitian_part(&channel.choi_matrix().scale(scale));
    ChoiState {
        state: DensityOperator::from_parts_unchecked(
            matrix,
            SubsystemShape::qubits(&[channel.out_qubits, channel.in_qubits]),
        ),
        in_qubits: channel.in_qubits,
        out_qubits: channel.out_qubits,
    }
}

/// Recovers `Phi(xi) = 2^k Tr_in[rho (I (x) xi^T)]` from the normalized Choi state.
pub fn apply_via_choi(choi: &ChoiState, xi: &DensityOperator) -> Result<DensityOperator> {
    let d_in = 1usize << choi.in_qubits;
    let d_out = 1usize << choi.out_qubits;
    if xi.dim() != d_in {
        return Err(Error::DimensionMismatch(format!(
            "Choi input dimension {d_in} vs state dimension {}",
            xi.dim()
        )));
    }
    let rho = choi.matrix();
    let x = xi.matrix();
    let mut out = zeros(d_out, d_out);
    for a in 0..d_out {
        for b in 0..d_out {
            let mut acc = real(0.0);
            for y in 0..d_in {
                for z in 0..d_in {
                    // <a,y| rho |b,z> <z|xi^T|y> = rho[(a,y),(b,z)] xi[y,z]
                    acc += rho[(a * d_in + y, b * d_in + z)] * x[(y, z)];
                }
            }
            out[(a, b)] = acc * d_in as f64;
        }
    }
    Ok(DensityOperator::from_parts_unchecked(
        hermitian_part(&out),
        SubsystemShape::qubits(&[choi.out_qubits]),
    ))
}

/// Outcome of Bell-measurement post-selection.
#[derive(Clone, Debug)]
pub struct PostSelection {
    /// Probability that every pair is found in `|phi+>`.
    pub success_prob: f64,
    /// State of `(R, environment)` conditioned on success.
    pub conditional: DensityOperator,
}

/// Measures each qubit of `Q` (the leading `k` qubits of `joint`) with its partner in
/// the Choi state's input copy `Q0` in the Bell basis and conditions on all-`phi+`.
///
/// The returned state lives on `[R, environment]` where the environment is whatever
/// follows `Q` in `joint`.
pub fn postselect_apply(choi: &ChoiState, joint: &DensityOperator) -> Result<PostSelection> {
    let k = choi.in_qubits;
    let d_k = 1usize << k;
    let d_r = 1usize << choi.out_qubits;
    if !joint.dim().is_multiple_of(d_k) {
        return Err(Error::DimensionMismatch(format!(
            "joint state of dimension {} has no leading {k}-qubit register",
            joint.dim()
        )));
    }
    let d_e = joint.dim() / d_k;
    let out = postselect_contract(choi.matrix(), d_r, d_k, joint.matrix());
    let success_prob = trace(&out).re;
    let mut dims = vec![d_r];
    if joint.shape().len() > 1 {
        dims.extend_from_slice(&joint.shape().dims()[1..]);
    } else if d_e > 1 {
        dims.push(d_e);
    }
    Ok(PostSelection {
        success_prob,
        conditional: DensityOperator::from_parts_unchecked(
            hermitian_part(&out.unscale(success_prob)),
            SubsystemShape::new(dims)?,
        ),
    })
}

/// Unnormalized `<Phi|_{Q0 Q} (pair_{R Q0} (x) joint_{Q E}) |Phi>_{Q0 Q}` on `[R, E]` for any
/// operator `pair` on `[R, Q0]`, with `|Phi>` the normalized maximally entangled vector.
pub(crate) fn postselect_contract(pair: &Matrix, d_r: usize, d_k: usize, joint: &Matrix) -> Matrix {
    let d_e = joint.nrows() / d_k;
    let dim = d_r * d_e;
    let mut out = zeros(dim, dim);
    let norm = 1.0 / d_k as f64;
    for r1 in 0..d_r {
        for r2 in 0..d_r {
            for x in 0..d_k {
                for y in 0..d_k {
                    let coeff = pair[(r1 * d_k + x, r2 * d_k + y)] * norm;
                    if coeff.norm() == 0.0 {
                        continue;
                    }
                    for e1 in 0..d_e {
                        for e2 in 0..d_e {
                            out[(r1 * d_e + e1, r2 * d_e + e2)] += coeff * joint[(x * d_e + e1, y * d_e + e2)];
                        }
                    }
                }
            }
        }
    }
    out
}

/// The binary measurement `{P0, P1}` as the channel `sigma -> <P0,sigma>|0><0| + <P1,sigma>|1><1|`.
pub fn measurement_channel(p0: &Matrix, p1: &Matrix) -> Result<QuantumChannel> {
    validate_binary_measurement(p0, p1)?;
    let d = p0.nrows();
    let mut kraus = Vec::new();
    for (outcome, p) in [p0, p1].into_iter().enumerate() {
        let (values, vectors) = hermitian_eigen(p);
        for (k, &lambda) in values.iter().enumerate() {
            if lambda <= 1e-14 {
                continue;
            }
            let v = vectors.column(k);
            let s = lambda.sqrt();
            kraus.push(Matrix::from_fn(2, d, |o, j| {
                if o == outcome {
                    v[j].conj() * s
                } else {
                    real(0.0)
                }
            }));
        }
    }
    let qubits = d.trailing_zeros() as usize;
    QuantumChannel::new(qubits, 1, kraus)
}

pub fn validate_binary_measurement(p0: &Matrix, p1: &Matrix) -> Result<()> {
    let d = p0.nrows();
    if !p0.is_square() || p1.shape() != p0.shape() || !d.is_power_of_two() {
        return Err(Error::InvalidMeasurement(
            "operators must be square, equal-sized and act on qubits".into(),
        ));
    }
    for (name, p) in [("P0", p0), ("P1", p1)] {
        let dev = crate::linalg::hermitian_deviation(p);
        if dev > TOL {
            return Err(Error::InvalidMeasurement(format!("{name} is not Hermitian ({dev:.3e})")));
        }
        let min = hermitian_eigen(p).0[0];
        if min < -TOL {
            return Err(Error::InvalidMeasurement(format!(
                "{name} has negative eigenvalue {min:.3e}"
            )));
        }
    }
    let dev = (p0 + p1 - identity(d)).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if dev > TOL {
        return Err(Error::InvalidMeasurement(format!("P0 + P1 deviates from I by {dev:.3e}")));
    }
    Ok(())
}

/// `<P, sigma>` for Hermitian `P`.
pub fn expectation(p: &Matrix, sigma: &Matrix) -> f64 {
    inner(p, sigma).re
}
