//! Gate-list circuits over the verifier gate set and their compilation to channels.

use std::collections::HashSet;
use std::f64::consts::FRAC_PI_4;

use serde::{Deserialize, Serialize};

use crate::channels::QuantumChannel;
use crate::error::{Error, Result};
use crate::linalg::{c, identity, ket, real, tensor, zeros, Matrix};

/// Most wires a circuit may hold live at once.
pub const MAX_CIRCUIT_WIRES: usize = 10;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WireRoles {
    #[serde(default)]
    pub memory: Vec<String>,
    #[serde(default)]
    pub message: Vec<String>,
}

impl WireRoles {
    pub fn new(memory: &[&str], message: &[&str]) -> Self {
        Self {
            memory: memory.iter().map(|s| s.to_string()).collect(),
            message: message.iter().map(|s| s.to_string()).collect(),
        }
    }

    /// Register order: memory wires first, then message wires.
    pub fn ordered(&self) -> Vec<String> {
        self.memory.iter().chain(&self.message).cloned().collect()
    }

    pub fn len(&self) -> usize {
        self.memory.len() + self.message.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GateRecord", into = "GateRecord")]
pub enum Gate {
    Cnot { control: String, target: String },
    H(String),
    /// pi/8 phase gate `diag(1, e^{i pi/4})`.
    T(String),
    /// Introduces a fresh wire in `|0>`.
    Ancilla(String),
    /// Traces out a wire.
    Erase(String),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct GateRecord {
    op: String,
    wires: Vec<String>,
}

impl TryFrom<GateRecord> for Gate {
    type Error = String;

    fn try_from(r: GateRecord) -> std::result::Result<Self, String> {
        let arity = if r.op == "CNOT" { 2 } else { 1 };
        if r.wires.len() != arity {
            return Err(format!("gate {} takes {arity} wire(s), got {}", r.op, r.wires.len()));
        }
        let mut w = r.wires.into_iter();
        let mut next = || w.next().expect("arity checked");
        Ok(match r.op.as_str() {
            "CNOT" => Gate::Cnot {
                control: next(),
                target: next(),
            },
            "H" => Gate::H(next()),
            "T" => Gate::T(next()),
            "ANCILLA" => Gate::Ancilla(next()),
            "ERASE" => Gate::Erase(next()),
            other => return Err(format!("unknown gate `{other}`")),
        })
    }
}

impl From<Gate> for GateRecord {
    fn from(g: Gate) -> Self {
        let (op, wires) = match g {
            Gate::Cnot { control, target } => ("CNOT", vec![control, target]),
            Gate::H(w) => ("H", vec![w]),
            Gate::T(w) => ("T", vec![w]),
            Gate::Ancilla(w) => ("ANCILLA", vec![w]),
            Gate::Erase(w) => ("ERASE", vec![w]),
        };
        GateRecord {
            op: op.to_string(),
            wires,
        }
    }
}

/// A circuit with named input and output wires split into memory and message roles.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircuitDesc {
    pub inputs: WireRoles,
    pub outputs: WireRoles,
    #[serde(default)]
    pub gates: Vec<Gate>,
}

pub fn hadamard() -> Matrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Matrix::from_row_slice(2, 2, &[real(s), real(s), real(s), real(-s)])
}

pub fn t_gate() -> Matrix {
    Matrix::from_row_slice(
        2,
        2,
        &[real(1.0), real(0.0), real(0.0), c(FRAC_PI_4.cos(), FRAC_PI_4.sin())],
    )
}

pub fn cnot() -> Matrix {
    let mut m = zeros(4, 4);
    for (i, j) in [(0, 0), (1, 1), (2, 3), (3, 2)] {
        m[(i, j)] = real(1.0);
    }
    m
}

/// Applies `op` to the qubits at `positions` (first listed is the most significant
/// local qubit) of the row space of `k`, which spans `n` qubits with qubit 0 leading.
pub(crate) fn apply_local(op: &Matrix, positions: &[usize], n: usize, k: &Matrix) -> Matrix {
    let m = positions.len();
    let d = 1usize << n;
    let bits: Vec<usize> = positions.iter().map(|&p| 1usize << (n - 1 - p)).collect();
    let mask: usize = bits.iter().sum();
    let place = |b: usize| -> usize {
        bits.iter()
            .enumerate()
            .filter(|(i, _)| b & (1 << (m - 1 - i)) != 0)
            .map(|(_, &bit)| bit)
            .sum()
    };
    let mut out = zeros(d, k.ncols());
    for row in 0..d {
        let a = bits
            .iter()
            .enumerate()
            .filter(|(_, &bit)| row & bit != 0)
            .map(|(i, _)| 1usize << (m - 1 - i))
            .sum::<usize>();
        let base = row & !mask;
        for b in 0..(1usize << m) {
            let coeff = op[(a, b)];
            if coeff.norm() == 0.0 {
                continue;
            }
            let src = base | place(b);
            for col in 0..k.ncols() {
                out[(row, col)] += coeff * k[(src, col)];
            }
        }
    }
    out
}

/// Compiles a circuit into a channel: ancillas tensor in `|0>`, erasures trace out,
/// unitary gates conjugate. Output registers follow `outputs.ordered()`.
pub fn channel_from_circuit(circuit: &CircuitDesc) -> Result<QuantumChannel> {
    let mut live: Vec<String> = circuit.inputs.ordered();
    let unique: HashSet<&String> = live.iter().collect();
    if unique.len() != live.len() {
        return Err(Error::MalformedCircuit("duplicate input wire".into()));
    }
    let n_in = live.len();
    if n_in > MAX_CIRCUIT_WIRES {
        return Err(Error::CapExceeded(format!("{n_in} input wires")));
    }
    let mut kraus = vec![identity(1 << n_in)];
    let position = |live: &[String], w: &str| -> Result<usize> {
        live.iter()
            .position(|x| x == w)
            .ok_or_else(|| Error::MalformedCircuit(format!("gate references dead wire `{w}`")))
    };
    for gate in &circuit.gates {
        let n = live.len();
        match gate {
            Gate::H(w) | Gate::T(w) => {
                let p = position(&live, w)?;
                let op = if matches!(gate, Gate::H(_)) { hadamard() } else { t_gate() };
                kraus = kraus.iter().map(|k| apply_local(&op, &[p], n, k)).collect();
            }
            Gate::Cnot { control, target } => {
                let (pc, pt) = (position(&live, control)?, position(&live, target)?);
                if pc == pt {
                    return Err(Error::MalformedCircuit(format!("CNOT on a single wire `{control}`")));
                }
                kraus = kraus.iter().map(|k| apply_local(&cnot(), &[pc, pt], n, k)).collect();
            }
            Gate::Ancilla(w) => {
                if live.contains(w) {
                    return Err(Error::MalformedCircuit(format!("ancilla `{w}` is already live")));
                }
                if n + 1 > MAX_CIRCUIT_WIRES {
                    return Err(Error::CapExceeded(format!("more than {MAX_CIRCUIT_WIRES} live wires")));
                }
                live.push(w.clone());
                kraus = kraus.iter().map(|k| tensor(k, &ket(2, 0))).collect();
            }
            Gate::Erase(w) => {
                let p = position(&live, w)?;
                live.remove(p);
                let mut next = Vec::with_capacity(kraus.len() * 2);
                for b in 0..2 {
                    let bra = ket(2, b).adjoint();
                    for k in &kraus {
                        next.push(project_qubit(k, p, n, &bra));
                    }
                }
                kraus = next;
                let d_out = 1usize << live.len();
                if kraus.len() > d_out << n_in {
                    kraus = QuantumChannel::from_kraus_unchecked(n_in, live.len(), kraus)
                        .compressed()
                        .kraus()
                        .to_vec();
                }
            }
        }
    }
    let outputs = circuit.outputs.ordered();
    let out_set: HashSet<&String> = outputs.iter().collect();
    let live_set: HashSet<&String> = live.iter().collect();
    if out_set.len() != outputs.len() || out_set != live_set {
        return Err(Error::MalformedCircuit(format!(
            "declared outputs {outputs:?} differ from live wires {live:?}"
        )));
    }
    // new register k is live wire perm[k]
    let perm: Vec<usize> = outputs.iter().map(|w| live.iter().position(|x| x == w).unwrap()).collect();
    let shape = crate::linalg::SubsystemShape::qubits(&vec![1; live.len()]);
    let kraus = kraus
        .iter()
        .map(|k| crate::linalg::permute_rows(k, &shape, &perm))
        .collect::<Result<Vec<_>>>()?;
    QuantumChannel::new(n_in, outputs.len(), kraus)
}

/// `(I (x) <b| (x) I) K` removing qubit `p` of an `n`-qubit row space.
fn project_qubit(k: &Matrix, p: usize, n: usize, bra: &Matrix) -> Matrix {
    let left = identity(1 << p);
    let right = identity(1 << (n - 1 - p));
    tensor(&tensor(&left, bra), &right) * k
}
