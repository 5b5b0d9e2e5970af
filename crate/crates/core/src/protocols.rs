//! Verifier and prover descriptions, their interaction, and the rewiring of a
//! multi-round verifier into a single channel from responses to questions.
//!
//! Round `j` runs the prover channel `P_j: [p_{j-1}, Q_j] -> [p_j, R_j]` followed by the
//! verifier stage `V_j: [v_j, R_j] -> [v_{j+1}, Q_{j+1}]`. `V_0` has no input and `V_t`
//! emits only the acceptance qubit, where outcome 1 means accept.

use serde::{Deserialize, Serialize};

use crate::channels::{choi_of_channel, QuantumChannel};
use crate::circuit::{channel_from_circuit, CircuitDesc};
use crate::error::{Error, Result};
use crate::linalg::{max_eigenvalue, permute_rows, MatrixLiteral, Matrix, SubsystemShape};
use crate::strategies::{
    accept_projection, max_acceptance_sdp_with, CoStrategyView, RoundShape, SdpOptions, Strategy,
};

/// Most qubits held at once while composing a protocol.
pub const DEFAULT_QUBIT_CAP: usize = 8;

/// A stage given either as a gate list or as Kraus operators.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum StageDesc {
    Circuit(CircuitDesc),
    Kraus { kraus: Vec<MatrixLiteral> },
}

impl StageDesc {
    pub fn from_channel(channel: &QuantumChannel) -> Self {
        StageDesc::Kraus {
            kraus: channel.kraus().iter().map(MatrixLiteral::from).collect(),
        }
    }

    /// Compiles the stage and checks its memory and message widths.
    fn compile(&self, path: &str, memory: (usize, usize), message: (usize, usize)) -> Result<QuantumChannel> {
        let invalid = |m: String| Error::invariant(path, m);
        let channel = match self {
            StageDesc::Circuit(c) => {
                let roles = [
                    ("inputs.memory", c.inputs.memory.len(), memory.0),
                    ("inputs.message", c.inputs.message.len(), message.0),
                    ("outputs.memory", c.outputs.memory.len(), memory.1),
                    ("outputs.message", c.outputs.message.len(), message.1),
                ];
                for (field, got, want) in roles {
                    if got != want {
                        return Err(Error::invariant(
                            format!("{path}.{field}"),
                            format!("{got} wires, expected {want}"),
                        ));
                    }
                }
                channel_from_circuit(c).map_err(|e| invalid(e.to_string()))?
            }
            StageDesc::Kraus { kraus } => {
                let ops = kraus
                    .iter()
                    .enumerate()
                    .map(|(k, m)| {
                        m.to_matrix()
                            .map_err(|e| Error::invariant(format!("{path}.kraus[{k}]"), e.to_string()))
                    })
                    .collect::<Result<Vec<_>>>()?;
                let first = ops.first().ok_or_else(|| invalid("no Kraus operators".into()))?;
                let (rows, cols) = first.shape();
                if !rows.is_power_of_two() || !cols.is_power_of_two() {
                    return Err(invalid(format!("{rows}x{cols} Kraus operators do not act on qubits")));
                }
                let out_q = rows.trailing_zeros() as usize;
                let in_q = cols.trailing_zeros() as usize;
                QuantumChannel::new(in_q, out_q, ops).map_err(|e| invalid(e.to_string()))?
            }
        };
        let (want_in, want_out) = (memory.0 + message.0, memory.1 + message.1);
        if channel.in_qubits() != want_in || channel.out_qubits() != want_out {
            return Err(invalid(format!(
                "maps {} -> {} qubits, expected {want_in} -> {want_out}",
                channel.in_qubits(),
                channel.out_qubits()
            )));
        }
        Ok(channel)
    }
}

/// On-disk protocol document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolDocument {
    pub rounds: usize,
    pub q: Vec<usize>,
    pub r: Vec<usize>,
    pub v: Vec<usize>,
    pub verifier: Vec<StageDesc>,
    pub a: f64,
    pub b: f64,
    pub gap: f64,
}

/// A validated verifier with completeness `a`, soundness `b` and promised gap.
#[derive(Clone, Debug)]
pub struct ProtocolSpec {
    pub shape: RoundShape,
    /// Verifier memory widths `v_1..v_t`.
    pub memory: Vec<usize>,
    pub a: f64,
    pub b: f64,
    pub gap: f64,
    stages: Vec<StageDesc>,
    channels: Vec<QuantumChannel>,
}

impl ProtocolSpec {
    pub fn new(
        shape: RoundShape,
        memory: Vec<usize>,
        stages: Vec<StageDesc>,
        a: f64,
        b: f64,
        gap: f64,
    ) -> Result<Self> {
        ProtocolDocument {
            rounds: shape.rounds(),
            q: shape.q.clone(),
            r: shape.r.clone(),
            v: memory,
            verifier: stages,
            a,
            b,
            gap,
        }
        .try_into()
    }

    pub fn from_channels(
        shape: RoundShape,
        memory: Vec<usize>,
        channels: &[QuantumChannel],
        a: f64,
        b: f64,
        gap: f64,
    ) -> Result<Self> {
        let stages = channels.iter().map(StageDesc::from_channel).collect();
        Self::new(shape, memory, stages, a, b, gap)
    }

    pub fn rounds(&self) -> usize {
        self.shape.rounds()
    }

    /// `V_0..V_t`.
    pub fn verifier(&self) -> &[QuantumChannel] {
        &self.channels
    }

    pub fn stages(&self) -> &[StageDesc] {
        &self.stages
    }

    pub fn midpoint(&self) -> f64 {
        (self.a + self.b) / 2.0
    }

    pub fn to_document(&self) -> ProtocolDocument {
        ProtocolDocument {
            rounds: self.rounds(),
            q: self.shape.q.clone(),
            r: self.shape.r.clone(),
            v: self.memory.clone(),
            verifier: self.stages.clone(),
            a: self.a,
            b: self.b,
            gap: self.gap,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("protocol serializes")
    }
}

impl TryFrom<ProtocolDocument> for ProtocolSpec {
    type Error = Error;

    fn try_from(doc: ProtocolDocument) -> Result<Self> {
        let t = doc.rounds;
        if t == 0 {
            return Err(Error::invariant("rounds", "at least one round is required"));
        }
        for (field, len) in [("q", doc.q.len()), ("r", doc.r.len()), ("v", doc.v.len())] {
            if len != t {
                return Err(Error::invariant(field, format!("{len} entries for {t} rounds")));
            }
        }
        if doc.verifier.len() != t + 1 {
            return Err(Error::invariant(
                "verifier",
                format!("{} stages for {t} rounds, expected {}", doc.verifier.len(), t + 1),
            ));
        }
        for (field, x) in [("a", doc.a), ("b", doc.b), ("gap", doc.gap)] {
            if !(0.0..=1.0).contains(&x) {
                return Err(Error::invariant(field, format!("{x} outside [0, 1]")));
            }
        }
        if doc.gap.is_nan() || doc.gap <= 0.0 || doc.a - doc.b < doc.gap - 1e-12 {
            return Err(Error::invariant(
                "gap",
                format!(
                    "threshold gap violated: a - b = {} must be at least gap = {} > 0",
                    doc.a - doc.b,
                    doc.gap
                ),
            ));
        }
        let shape = RoundShape::new(doc.q.clone(), doc.r.clone()).map_err(|e| Error::invariant("q", e.to_string()))?;
        let mut channels = Vec::with_capacity(t + 1);
        for (j, stage) in doc.verifier.iter().enumerate() {
            let path = format!("verifier[{j}]");
            let memory = (if j == 0 { 0 } else { doc.v[j - 1] }, if j == t { 0 } else { doc.v[j] });
            let message = (if j == 0 { 0 } else { doc.r[j - 1] }, if j == t { 1 } else { doc.q[j] });
            if j == t {
                let out = match stage {
                    StageDesc::Circuit(c) => c.outputs.len(),
                    StageDesc::Kraus { kraus } => kraus
                        .first()
                        .and_then(|m| m.to_matrix().ok())
                        .map_or(1, |m| m.nrows().trailing_zeros() as usize),
                };
                if out != 1 {
                    return Err(Error::invariant(
                        path,
                        format!("final stage must emit a single acceptance qubit, emits {out}"),
                    ));
                }
            }
            channels.push(stage.compile(&path, memory, message)?);
        }
        Ok(Self {
            shape,
            memory: doc.v,
            a: doc.a,
            b: doc.b,
            gap: doc.gap,
            stages: doc.verifier,
            channels,
        })
    }
}

/// Parses and validates a protocol document.
pub fn parse_protocol(text: &str) -> Result<ProtocolSpec> {
    let doc: ProtocolDocument = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    doc.try_into()
}

/// On-disk prover document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProverDocument {
    /// Memory widths `p_1..p_{t-1}`.
    #[serde(default)]
    pub memory: Vec<usize>,
    pub channels: Vec<StageDesc>,
}

/// Prover channels `P_1..P_t`.
#[derive(Clone, Debug)]
pub struct ProverSpec {
    pub memory: Vec<usize>,
    pub channels: Vec<QuantumChannel>,
}

impl ProverSpec {
    pub fn new(memory: Vec<usize>, channels: Vec<QuantumChannel>) -> Result<Self> {
        if channels.is_empty() || memory.len() + 1 != channels.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} prover channels with {} memory widths",
                channels.len(),
                memory.len()
            )));
        }
        for (j, ch) in channels.iter().enumerate() {
            let p_in = if j == 0 { 0 } else { memory[j - 1] };
            let p_out = memory.get(j).copied().unwrap_or(0);
            if ch.in_qubits() < p_in || ch.out_qubits() < p_out {
                return Err(Error::DimensionMismatch(format!(
                    "prover channel {} maps {} -> {} qubits but holds {p_in} -> {p_out} memory qubits",
                    j + 1,
                    ch.in_qubits(),
                    ch.out_qubits()
                )));
            }
        }
        Ok(Self { memory, channels })
    }

    /// Memoryless single-round prover.
    pub fn single(channel: QuantumChannel) -> Self {
        Self {
            memory: vec![],
            channels: vec![channel],
        }
    }

    pub fn rounds(&self) -> usize {
        self.channels.len()
    }

    fn memory_before(&self, j: usize) -> usize {
        if j <= 1 {
            0
        } else {
            self.memory[j - 2]
        }
    }

    fn memory_after(&self, j: usize) -> usize {
        self.memory.get(j - 1).copied().unwrap_or(0)
    }

    pub fn check_against(&self, shape: &RoundShape) -> Result<()> {
        if self.rounds() != shape.rounds() {
            return Err(Error::DimensionMismatch(format!(
                "{}-round prover for a {}-round protocol",
                self.rounds(),
                shape.rounds()
            )));
        }
        for j in 1..=self.rounds() {
            let ch = &self.channels[j - 1];
            let (want_in, want_out) = (
                self.memory_before(j) + shape.q[j - 1],
                self.memory_after(j) + shape.r[j - 1],
            );
            if ch.in_qubits() != want_in || ch.out_qubits() != want_out {
                return Err(Error::DimensionMismatch(format!(
                    "prover channel {j} maps {} -> {} qubits, expected {want_in} -> {want_out}",
                    ch.in_qubits(),
                    ch.out_qubits()
                )));
            }
        }
        Ok(())
    }

    pub fn to_document(&self) -> ProverDocument {
        ProverDocument {
            memory: self.memory.clone(),
            channels: self.channels.iter().map(StageDesc::from_channel).collect(),
        }
    }
}

pub fn parse_prover(text: &str) -> Result<ProverSpec> {
    let doc: ProverDocument = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let channels = doc
        .channels
        .iter()
        .enumerate()
        .map(|(j, stage)| {
            match stage {
                StageDesc::Circuit(c) => channel_from_circuit(c),
                StageDesc::Kraus { kraus } => kraus
                    .iter()
                    .map(MatrixLiteral::to_matrix)
                    .collect::<Result<Vec<_>>>()
                    .and_then(|ops| {
                        let (rows, cols) = ops.first().map(|m| m.shape()).unwrap_or((0, 0));
                        if !rows.is_power_of_two() || !cols.is_power_of_two() {
                            return Err(Error::InvalidChannel("Kraus operators must act on qubits".into()));
                        }
                        QuantumChannel::new(cols.trailing_zeros() as usize, rows.trailing_zeros() as usize, ops)
                    }),
            }
            .map_err(|e| Error::invariant(format!("channels[{j}]"), e.to_string()))
        })
        .collect::<Result<Vec<_>>>()?;
    ProverSpec::new(doc.memory, channels)
}

/// A linear map from fixed input registers to named live registers, kept as Kraus operators.
#[derive(Clone, Debug)]
pub(crate) struct Network {
    in_qubits: usize,
    regs: Vec<(String, usize)>,
    kraus: Vec<Matrix>,
    cap: usize,
}

impl Network {
    pub(crate) fn new(inputs: Vec<(String, usize)>, cap: usize) -> Result<Self> {
        let n: usize = inputs.iter().map(|r| r.1).sum();
        if n > cap {
            return Err(Error::CapExceeded(format!("{n} live qubits exceed the cap of {cap}")));
        }
        Ok(Self {
            in_qubits: n,
            regs: inputs,
            kraus: vec![crate::linalg::identity(1 << n)],
            cap,
        })
    }

    fn live(&self) -> usize {
        self.regs.iter().map(|r| r.1).sum()
    }

    fn shape(&self) -> SubsystemShape {
        SubsystemShape::qubits(&self.regs.iter().map(|r| r.1).collect::<Vec<_>>())
    }

    fn position(&self, name: &str) -> Result<usize> {
        self.regs
            .iter()
            .position(|r| r.0 == name)
            .ok_or_else(|| Error::DimensionMismatch(format!("no live register `{name}`")))
    }

    /// Reorders registers so that `front` come first in the given order.
    fn bring_to_front(&mut self, front: &[&str]) -> Result<()> {
        let mut perm = Vec::with_capacity(self.regs.len());
        for name in front {
            perm.push(self.position(name)?);
        }
        let rest: Vec<usize> = (0..self.regs.len()).filter(|k| !perm.contains(k)).collect();
        perm.extend(rest);
        if perm.iter().enumerate().all(|(k, &p)| k == p) {
            return Ok(());
        }
        let shape = self.shape();
        self.kraus = self
            .kraus
            .iter()
            .map(|k| permute_rows(k, &shape, &perm))
            .collect::<Result<_>>()?;
        self.regs = perm.iter().map(|&p| self.regs[p].clone()).collect();
        Ok(())
    }

    /// Applies `channel` to the listed registers, replacing them by `outputs` at the front.
    pub(crate) fn apply(&mut self, channel: &QuantumChannel, inputs: &[&str], outputs: &[(&str, usize)]) -> Result<()> {
        let width_in: usize = inputs
            .iter()
            .map(|n| self.position(n).map(|p| self.regs[p].1))
            .sum::<Result<usize>>()?;
        let width_out: usize = outputs.iter().map(|o| o.1).sum();
        if width_in != channel.in_qubits() || width_out != channel.out_qubits() {
            return Err(Error::DimensionMismatch(format!(
                "channel {} -> {} applied to {width_in} -> {width_out} qubits",
                channel.in_qubits(),
                channel.out_qubits()
            )));
        }
        self.bring_to_front(inputs)?;
        let live_after = self.live() - width_in + width_out;
        if live_after > self.cap {
            return Err(Error::CapExceeded(format!(
                "{live_after} live qubits exceed the cap of {}",
                self.cap
            )));
        }
        let d_t = 1usize << width_in;
        let d_o = 1usize << width_out;
        let d_rest = (1usize << self.live()) / d_t;
        let d_in = 1usize << self.in_qubits;
        let mut next = Vec::with_capacity(self.kraus.len() * channel.kraus().len());
        for k in &self.kraus {
            // rows of k indexed (t, rest); reshape to d_t x (rest * in)
            let m = Matrix::from_fn(d_t, d_rest * d_in, |t, col| k[(t * d_rest + col / d_in, col % d_in)]);
            for c in channel.kraus() {
                let prod = c * &m;
                next.push(Matrix::from_fn(d_o * d_rest, d_in, |row, col| {
                    prod[(row / d_rest, (row % d_rest) * d_in + col)]
                }));
            }
        }
        self.regs.drain(..inputs.len());
        let mut regs: Vec<(String, usize)> = outputs.iter().map(|(n, w)| (n.to_string(), *w)).collect();
        regs.append(&mut self.regs);
        self.regs = regs;
        let d_cur = 1usize << self.live();
        self.kraus = if next.len() > d_cur * d_in {
            QuantumChannel::from_kraus_unchecked(self.in_qubits, self.live(), next)
                .compressed()
                .kraus()
                .to_vec()
        } else {
            next
        };
        Ok(())
    }

    /// Finishes with registers in the order `names`; any unlisted register must be empty.
    pub(crate) fn into_channel(mut self, names: &[&str]) -> Result<QuantumChannel> {
        self.bring_to_front(names)?;
        if let Some(r) = self.regs[names.len()..].iter().find(|r| r.1 > 0) {
            return Err(Error::DimensionMismatch(format!("register `{}` left unaccounted", r.0)));
        }
        let out = self.live();
        Ok(QuantumChannel::from_kraus_unchecked(self.in_qubits, out, self.kraus))
    }
}

/// One step of the interaction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Step {
    Verifier(usize),
    Prover(usize),
}

fn steps(t: usize) -> impl Iterator<Item = Step> {
    std::iter::once(Step::Verifier(0)).chain((1..=t).flat_map(|j| [Step::Prover(j), Step::Verifier(j)]))
}

fn run_step(net: &mut Network, v: &ProtocolSpec, p: &ProverSpec, step: Step) -> Result<()> {
    let t = v.rounds();
    match step {
        Step::Verifier(0) => net.apply(&v.channels[0], &[], &[("vmem", v.memory[0]), ("Q", v.shape.q[0])]),
        Step::Verifier(j) if j == t => net.apply(&v.channels[j], &["vmem", "R"], &[("A", 1)]),
        Step::Verifier(j) => net.apply(
            &v.channels[j],
            &["vmem", "R"],
            &[("vmem", v.memory[j]), ("Q", v.shape.q[j])],
        ),
        Step::Prover(j) => net.apply(
            &p.channels[j - 1],
            &["pmem", "Q"],
            &[("pmem", p.memory_after(j)), ("R", v.shape.r[j - 1])],
        ),
    }
}

/// Probability that the verifier accepts when interacting with `p`.
pub fn interact(v: &ProtocolSpec, p: &ProverSpec) -> Result<f64> {
    interact_with_cap(v, p, DEFAULT_QUBIT_CAP)
}

pub fn interact_with_cap(v: &ProtocolSpec, p: &ProverSpec, cap: usize) -> Result<f64> {
    p.check_against(&v.shape)?;
    let mut net = Network::new(vec![("pmem".into(), 0)], cap)?;
    for step in steps(v.rounds()) {
        run_step(&mut net, v, p, step)?;
    }
    let ch = net.into_channel(&["A"])?;
    let accept: f64 = ch.kraus().iter().map(|k| k[(1, 0)].norm_sqr()).sum();
    Ok(accept.clamp(0.0, 1.0))
}

/// State before `P_j` on `[p_{j-1}, Q_j, v_j]` and the accepting effect after it on `[p_j, R_j, v_j]`.
pub(crate) fn split_at_prover(
    v: &ProtocolSpec,
    p: &ProverSpec,
    j: usize,
    cap: usize,
) -> Result<(Matrix, Matrix)> {
    let all: Vec<Step> = steps(v.rounds()).collect();
    let at = all.iter().position(|s| *s == Step::Prover(j)).expect("round in range");
    let mut fwd = Network::new(vec![("pmem".into(), 0)], cap)?;
    for &step in &all[..at] {
        run_step(&mut fwd, v, p, step)?;
    }
    let before = fwd.into_channel(&["pmem", "Q", "vmem"])?;
    let psi = before.kraus();
    let d = psi[0].nrows();
    let rho = psi
        .iter()
        .fold(Matrix::zeros(d, d), |acc, k| acc + k * k.adjoint());
    let mut back = Network::new(
        vec![
            ("pmem".into(), p.memory_after(j)),
            ("R".into(), v.shape.r[j - 1]),
            ("vmem".into(), v.memory[j - 1]),
        ],
        cap,
    )?;
    for &step in &all[at + 1..] {
        run_step(&mut back, v, p, step)?;
    }
    let after = back.into_channel(&["A"])?;
    let d_in = 1usize << after.in_qubits();
    let effect = after.kraus().iter().fold(Matrix::zeros(d_in, d_in), |acc, k| {
        let row = k.row(1);
        acc + row.adjoint() * row
    });
    Ok((rho, effect))
}

/// The verifier as one channel from `R_1..R_t` to `A, Q_1..Q_t`.
pub fn rewire_verifier(v: &ProtocolSpec) -> Result<QuantumChannel> {
    rewire_verifier_with_cap(v, DEFAULT_QUBIT_CAP)
}

pub fn rewire_verifier_with_cap(v: &ProtocolSpec, cap: usize) -> Result<QuantumChannel> {
    let t = v.rounds();
    let r_names: Vec<String> = (1..=t).map(|j| format!("R{j}")).collect();
    let q_names: Vec<String> = (1..=t).map(|j| format!("Q{j}")).collect();
    let inputs = r_names.iter().cloned().zip(v.shape.r.iter().copied()).collect();
    let mut net = Network::new(inputs, cap)?;
    net.apply(&v.channels[0], &[], &[("vmem", v.memory[0]), (&q_names[0], v.shape.q[0])])?;
    for j in 1..=t {
        if j == t {
            net.apply(&v.channels[j], &["vmem", &r_names[j - 1]], &[("A", 1)])?;
        } else {
            net.apply(
                &v.channels[j],
                &["vmem", &r_names[j - 1]],
                &[("vmem", v.memory[j]), (&q_names[j], v.shape.q[j])],
            )?;
        }
    }
    let order: Vec<&str> = std::iter::once("A").chain(q_names.iter().map(String::as_str)).collect();
    let ch = net.into_channel(&order)?;
    QuantumChannel::new(ch.in_qubits(), ch.out_qubits(), ch.kraus().to_vec())
}

/// The accepting co-strategy of a protocol.
pub fn co_strategy(v: &ProtocolSpec) -> Result<CoStrategyView> {
    let phi = rewire_verifier(v)?;
    accept_projection(&choi_of_channel(&phi), &v.shape)
}

/// How an exact value was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValueMethod {
    Eigenvalue,
    Sdp,
}

#[derive(Clone, Debug)]
pub struct ExactValue {
    pub value: f64,
    pub method: ValueMethod,
    pub gap: f64,
    pub strategy: Option<Strategy>,
}

/// Maximum acceptance probability over all provers.
pub fn exact_value(v: &ProtocolSpec) -> Result<ExactValue> {
    exact_value_with(v, &SdpOptions::default())
}

pub fn exact_value_with(v: &ProtocolSpec, opts: &SdpOptions) -> Result<ExactValue> {
    let view = co_strategy(v)?;
    if v.shape.total_q() == 0 {
        return Ok(ExactValue {
            value: max_eigenvalue(&view.objective())?,
            method: ValueMethod::Eigenvalue,
            gap: 0.0,
            strategy: None,
        });
    }
    let sol = max_acceptance_sdp_with(&view, opts)?;
    Ok(ExactValue {
        value: sol.value,
        method: ValueMethod::Sdp,
        gap: sol.gap,
        strategy: Some(sol.strategy),
    })
}

/// The strategy operator of a prover on `R_1..R_t, Q_1..Q_t`: the transpose of the Choi
/// matrix of its combined channel `Q_1..Q_t -> R_1..R_t`.
pub fn prover_strategy(p: &ProverSpec, shape: &RoundShape) -> Result<Strategy> {
    p.check_against(shape)?;
    let t = shape.rounds();
    let q_names: Vec<String> = (1..=t).map(|j| format!("Q{j}")).collect();
    let r_names: Vec<String> = (1..=t).map(|j| format!("R{j}")).collect();
    let mut inputs: Vec<(String, usize)> = vec![("pmem".into(), 0)];
    inputs.extend(q_names.iter().cloned().zip(shape.q.iter().copied()));
    let mut net = Network::new(inputs, 2 * DEFAULT_QUBIT_CAP)?;
    for j in 1..=t {
        net.apply(
            &p.channels[j - 1],
            &["pmem", &q_names[j - 1]],
            &[("pmem", p.memory_after(j)), (&r_names[j - 1], shape.r[j - 1])],
        )?;
    }
    let order: Vec<&str> = r_names.iter().map(String::as_str).collect();
    let ch = net.into_channel(&order)?;
    Ok(Strategy {
        x: ch.choi_matrix().transpose(),
        shape: shape.clone(),
    })
}

/// Single-round prover channel `Q -> R` whose strategy is `x`.
pub fn prover_from_strategy(strategy: &Strategy) -> Result<ProverSpec> {
    let shape = &strategy.shape;
    if shape.rounds() != 1 {
        return Err(Error::DimensionMismatch("only single-round strategies convert to a channel".into()));
    }
    let j = crate::channels::normalize_choi(&strategy.x.transpose(), shape.r[0], shape.q[0])?;
    let kraus = crate::channels::kraus_from_choi_matrix(&j, 1 << shape.r[0], 1 << shape.q[0]);
    Ok(ProverSpec::single(QuantumChannel::new(shape.q[0], shape.r[0], kraus)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::measurement_channel;
    use crate::linalg::{diag, identity};
    use crate::random::{random_kraus, rng};

    fn measure_only(p_acc: Matrix) -> ProtocolSpec {
        let d = p_acc.nrows();
        let m = measurement_channel(&(identity(d) - &p_acc), &p_acc).unwrap();
        let r = d.trailing_zeros() as usize;
        ProtocolSpec::from_channels(
            RoundShape::single(0, r),
            vec![0],
            &[QuantumChannel::identity(0), m],
            0.75,
            0.5,
            0.25,
        )
        .unwrap()
    }

    #[test]
    fn measure_only_interaction() {
        let v = measure_only(diag(&[0.75, 0.25]));
        let mixed = crate::linalg::DensityOperator::maximally_mixed(SubsystemShape::qubits(&[1]));
        let p = ProverSpec::single(QuantumChannel::replacement(0, &mixed).unwrap());
        assert!((interact(&v, &p).unwrap() - 0.5).abs() < 1e-12);
        let value = exact_value(&v).unwrap();
        assert_eq!(value.method, ValueMethod::Eigenvalue);
        assert!((value.value - 0.75).abs() < 1e-12);
    }

    #[test]
    fn rewired_measure_only_is_the_measurement() {
        let p_acc = diag(&[0.75, 0.25]);
        let v = measure_only(p_acc.clone());
        let phi = rewire_verifier(&v).unwrap();
        let direct = measurement_channel(&(identity(2) - &p_acc), &p_acc).unwrap();
        let dev = (phi.choi_matrix() - direct.choi_matrix()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(dev < 1e-12);
    }

    #[test]
    fn strategy_alignment_matches_interaction() {
        let mut r = rng(41);
        let shape = RoundShape::single(1, 1);
        let v0 = QuantumChannel::new(0, 2, random_kraus(&mut r, 4, 1, 1)).unwrap();
        let v1 = QuantumChannel::new(2, 1, random_kraus(&mut r, 2, 4, 3)).unwrap();
        let v = ProtocolSpec::from_channels(shape.clone(), vec![1], &[v0, v1], 0.9, 0.1, 0.5).unwrap();
        let view = co_strategy(&v).unwrap();
        for _ in 0..3 {
            let p = ProverSpec::single(QuantumChannel::new(1, 1, random_kraus(&mut r, 2, 2, 2)).unwrap());
            let x = prover_strategy(&p, &shape).unwrap();
            assert!((view.value_of(&x.x) - interact(&v, &p).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn parse_rejections_carry_field_paths() {
        let v = measure_only(diag(&[0.75, 0.25]));
        let mut doc = v.to_document();
        doc.a = 0.6;
        doc.b = 0.7;
        match ProtocolSpec::try_from(doc) {
            Err(Error::Invariant { path, message }) => {
                assert_eq!(path, "gap");
                assert!(message.contains("threshold gap"));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_protocol("{ not json"), Err(Error::Parse(_))));
        let back = parse_protocol(&v.to_json()).unwrap();
        assert_eq!(back.to_document(), v.to_document());
    }
}
