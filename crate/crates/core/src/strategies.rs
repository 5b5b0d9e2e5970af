//! Multi-round prover strategies, the co-strategy seen by the verifier, and the
//! maximum-acceptance semidefinite program over the strategy set.
//!
//! Strategy operators live on `R_1 .. R_t, Q_1 .. Q_t` in that order. A strategy `X` satisfies
//! `Tr_{R_j}(Y_j) = Y_{j-1} (x) I_{Q_j}` for `j = t..1`, where `Y_t = X` and `Y_0 = 1`.

use nalgebra::{Cholesky, DMatrix};
use serde::{Deserialize, Serialize};

use crate::channels::ChoiState;
use crate::error::{Error, Result};
use crate::linalg::{
    c, hermitian_deviation, hermitian_eigen, hermitian_part, identity, inner, matrix_unit, min_eigenvalue,
    partial_trace, permute_subsystems, tensor, trace, Matrix, SubsystemShape,
};

/// Largest strategy-operator dimension accepted by the solver by default.
pub const DEFAULT_SDP_DIM_CAP: usize = 32;

/// Message widths per round: the verifier sends `q[j]` qubits and receives `r[j]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundShape {
    pub q: Vec<usize>,
    pub r: Vec<usize>,
}

impl RoundShape {
    pub fn new(q: Vec<usize>, r: Vec<usize>) -> Result<Self> {
        if q.is_empty() || q.len() != r.len() {
            return Err(Error::DimensionMismatch(format!(
                "round shape needs t >= 1 matching widths, got q={q:?} r={r:?}"
            )));
        }
        if q.iter().chain(&r).sum::<usize>() > 24 {
            return Err(Error::CapExceeded(format!("message widths q={q:?} r={r:?}")));
        }
        Ok(Self { q, r })
    }

    pub fn single(q: usize, r: usize) -> Self {
        Self { q: vec![q], r: vec![r] }
    }

    pub fn rounds(&self) -> usize {
        self.q.len()
    }

    pub fn total_q(&self) -> usize {
        self.q.iter().sum()
    }

    pub fn total_r(&self) -> usize {
        self.r.iter().sum()
    }

    pub fn dim(&self) -> usize {
        1 << (self.total_q() + self.total_r())
    }

    /// Shape of `Y_j` on `R_1..R_j, Q_1..Q_j`.
    fn prefix(&self, j: usize) -> SubsystemShape {
        let widths: Vec<usize> = self.r[..j].iter().chain(&self.q[..j]).copied().collect();
        SubsystemShape::qubits(&widths)
    }

    pub fn subsystems(&self) -> SubsystemShape {
        self.prefix(self.rounds())
    }
}

/// A prover strategy operator in canonical register order.
#[derive(Clone, Debug)]
pub struct Strategy {
    pub x: Matrix,
    pub shape: RoundShape,
}

/// The accepting part of a verifier's Choi state, on `R_1..R_t, Q_1..Q_t`.
#[derive(Clone, Debug)]
pub struct CoStrategyView {
    pub rho1: Matrix,
    pub shape: RoundShape,
}

impl CoStrategyView {
    pub fn new(rho1: Matrix, shape: RoundShape) -> Result<Self> {
        if rho1.nrows() != shape.dim() || rho1.ncols() != shape.dim() {
            return Err(Error::DimensionMismatch(format!(
                "co-strategy of dimension {} for shape of dimension {}",
                rho1.nrows(),
                shape.dim()
            )));
        }
        Ok(Self { rho1, shape })
    }

    /// `2^{sum r} rho_1`, whose inner product with a strategy is an acceptance probability.
    pub fn objective(&self) -> Matrix {
        self.rho1.scale((1u64 << self.shape.total_r()) as f64)
    }

    /// Acceptance probability of a strategy against this co-strategy.
    pub fn value_of(&self, x: &Matrix) -> f64 {
        inner(&self.objective(), x).re
    }
}

/// Projects the Choi state of a rewired verifier (registers `A, Q_1..Q_t, R_1..R_t`) onto
/// `A = |1>` and reorders the rest to `R_1..R_t, Q_1..Q_t`.
pub fn accept_projection(choi: &ChoiState, shape: &RoundShape) -> Result<CoStrategyView> {
    if choi.out_qubits() != shape.total_q() + 1 {
        return Err(Error::DimensionMismatch(format!(
            "Choi state with {} output qubits lacks an acceptance register for {} question qubits",
            choi.out_qubits(),
            shape.total_q()
        )));
    }
    if choi.in_qubits() != shape.total_r() {
        return Err(Error::DimensionMismatch(format!(
            "Choi state with {} input qubits for {} response qubits",
            choi.in_qubits(),
            shape.total_r()
        )));
    }
    accept_block(choi.matrix(), shape)
}

/// [`accept_projection`] for any Hermitian operator on `A, Q_1..Q_t, R_1..R_t`, such as a
/// tomographic estimate of the Choi state.
pub fn accept_block(rho: &Matrix, shape: &RoundShape) -> Result<CoStrategyView> {
    let rest = shape.dim();
    if rho.nrows() != 2 * rest || rho.ncols() != 2 * rest {
        return Err(Error::DimensionMismatch(format!(
            "operator of dimension {} for an acceptance qubit and shape of dimension {rest}",
            rho.nrows()
        )));
    }
    let block = rho.view((rest, rest), (rest, rest)).into_owned();
    let t = shape.rounds();
    let widths: Vec<usize> = shape.q.iter().chain(&shape.r).copied().collect();
    let perm: Vec<usize> = (t..2 * t).chain(0..t).collect();
    let rho1 = permute_subsystems(&block, &SubsystemShape::qubits(&widths), &perm)?;
    CoStrategyView::new(rho1, shape.clone())
}

/// The worst violated strategy constraint.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub constraint: String,
    pub deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub feasible: bool,
    pub worst: Option<Violation>,
}

/// Checks positivity and the recursive partial-trace conditions within `tol`.
pub fn strategy_feasible(x: &Matrix, shape: &RoundShape, tol: f64) -> Result<FeasibilityReport> {
    if x.nrows() != shape.dim() || x.ncols() != shape.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} operator for strategy dimension {}",
            x.nrows(),
            x.ncols(),
            shape.dim()
        )));
    }
    let mut checks: Vec<Violation> = vec![
        Violation {
            constraint: "hermitian".into(),
            deviation: hermitian_deviation(x),
        },
        Violation {
            constraint: "positivity".into(),
            deviation: (-hermitian_eigen(x).0[0]).max(0.0),
        },
    ];
    let mut y = hermitian_part(x);
    for j in (1..=shape.rounds()).rev() {
        let (traced, lower) = trace_round(&y, shape, j)?;
        let expected = tensor(&lower, &identity(1 << shape.q[j - 1]));
        checks.push(Violation {
            constraint: format!("round {j}: Tr_R(Y_{j}) = Y_{} (x) I_Q", j - 1),
            deviation: max_abs(&(traced - expected)),
        });
        y = lower;
    }
    checks.push(Violation {
        constraint: "Y_0 = 1".into(),
        deviation: (y[(0, 0)].re - 1.0).abs(),
    });
    let worst = checks
        .into_iter()
        .max_by(|a, b| a.deviation.total_cmp(&b.deviation))
        .expect("nonempty");
    let feasible = worst.deviation <= tol;
    Ok(FeasibilityReport {
        feasible,
        worst: (!feasible).then_some(worst),
    })
}

fn max_abs(x: &Matrix) -> f64 {
    x.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `(Tr_{R_j} Y_j, Y_{j-1})` with `Y_{j-1} = Tr_{Q_j} Tr_{R_j}(Y_j) / 2^{q_j}`.
fn trace_round(y: &Matrix, shape: &RoundShape, j: usize) -> Result<(Matrix, Matrix)> {
    let sub = shape.prefix(j);
    // registers of Y_j: R_1..R_j at 0..j, Q_1..Q_j at j..2j
    let keep: Vec<usize> = (0..2 * j).filter(|&k| k != j - 1).collect();
    let traced = partial_trace(y, &sub, &keep)?;
    let keep_lower: Vec<usize> = (0..2 * j).filter(|&k| k != j - 1 && k != 2 * j - 1).collect();
    let lower = partial_trace(y, &sub, &keep_lower)?.unscale((1u64 << shape.q[j - 1]) as f64);
    Ok((traced, lower))
}

/// Solver settings for [`solve_strategy_sdp`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SdpOptions {
    pub max_dim: usize,
    pub target_gap: f64,
    pub max_newton_steps: usize,
}

impl Default for SdpOptions {
    fn default() -> Self {
        Self {
            max_dim: DEFAULT_SDP_DIM_CAP,
            target_gap: 1e-8,
            max_newton_steps: 600,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SdpSolution {
    pub value: f64,
    pub strategy: Strategy,
    pub gap: f64,
    pub newton_steps: usize,
}

/// The strategy set written as `X_0 + span{B_i}` intersected with the PSD cone.
#[derive(Clone, Debug)]
pub struct StrategySpace {
    shape: RoundShape,
    x0: Matrix,
    basis: Vec<Matrix>,
}

impl StrategySpace {
    pub fn new(shape: &RoundShape, max_dim: usize) -> Result<Self> {
        let d = shape.dim();
        if d > max_dim {
            return Err(Error::CapExceeded(format!(
                "strategy dimension {d} exceeds the solver cap {max_dim}"
            )));
        }
        let herm = hermitian_basis(d);
        // Column k holds the real coordinates of the homogeneous constraints applied to herm[k].
        let columns: Vec<Vec<f64>> = herm
            .iter()
            .map(|b| homogeneous_constraints(b, shape))
            .collect::<Result<_>>()?;
        let rows = columns[0].len();
        let l = DMatrix::<f64>::from_fn(rows, herm.len(), |i, k| columns[k][i]);
        let gram = l.transpose() * &l;
        let eig = gram.symmetric_eigen();
        let scale = eig.eigenvalues.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let mut null: Vec<usize> = (0..herm.len())
            .filter(|&k| eig.eigenvalues[k].abs() <= 1e-10 * scale)
            .collect();
        null.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));
        let basis = null
            .into_iter()
            .map(|k| {
                herm.iter()
                    .enumerate()
                    .fold(Matrix::zeros(d, d), |acc, (i, b)| acc + b.scale(eig.eigenvectors[(i, k)]))
            })
            .collect();
        let x0 = identity(d).unscale((1u64 << shape.total_r()) as f64);
        Ok(Self {
            shape: shape.clone(),
            x0,
            basis,
        })
    }

    pub fn shape(&self) -> &RoundShape {
        &self.shape
    }

    pub fn free_parameters(&self) -> usize {
        self.basis.len()
    }

    fn point(&self, y: &[f64]) -> Matrix {
        self.basis
            .iter()
            .zip(y)
            .fold(self.x0.clone(), |acc, (b, &w)| acc + b.scale(w))
    }

    /// Maximizes `<objective, X>` over the strategy set with a log-det barrier method.
    pub fn maximize(&self, objective: &Matrix, opts: &SdpOptions) -> Result<SdpSolution> {
        let d = self.shape.dim();
        if objective.nrows() != d || objective.ncols() != d {
            return Err(Error::DimensionMismatch(format!(
                "objective of dimension {} for strategy dimension {d}",
                objective.nrows()
            )));
        }
        let objective = hermitian_part(objective);
        let m = self.basis.len();
        let finish = |y: &[f64], gap: f64, steps: usize| {
            let x = hermitian_part(&self.point(y));
            SdpSolution {
                value: inner(&objective, &x).re,
                strategy: Strategy {
                    x,
                    shape: self.shape.clone(),
                },
                gap,
                newton_steps: steps,
            }
        };
        if m == 0 {
            return Ok(finish(&[], 0.0, 0));
        }
        let cvec: Vec<f64> = self.basis.iter().map(|b| inner(&objective, b).re).collect();
        let barrier = |y: &[f64]| -> Option<f64> {
            let chol = positive_cholesky(self.point(y))?;
            let logdet = 2.0 * chol.l().diagonal().iter().map(|z| z.re.ln()).sum::<f64>();
            logdet.is_finite().then_some(logdet)
        };

        let nu = d as f64;
        let mut y = vec![0.0; m];
        let mut t = 1.0;
        let mut steps = 0usize;
        // last completed centering stage, used if a later stage breaks down numerically
        let mut settled: Option<(Vec<f64>, f64)> = None;
        loop {
            let decrement = match self.center(&mut y, t, &cvec, &barrier, &mut steps, opts) {
                Ok(dec) => dec,
                Err(e) => {
                    return match settled {
                        Some((ys, gap)) if gap <= ACCEPTABLE_GAP => Ok(finish(&ys, gap, steps)),
                        _ => Err(e),
                    }
                }
            };
            let gap = (nu + nu.sqrt() * decrement.sqrt()) / t;
            if gap <= opts.target_gap {
                return Ok(finish(&y, gap, steps));
            }
            settled = Some((y.clone(), gap));
            t *= 10.0;
        }
    }

    /// Newton iterations on `t c.y + log det F(y)`; returns the final Newton decrement.
    fn center(
        &self,
        y: &mut Vec<f64>,
        t: f64,
        cvec: &[f64],
        barrier: &dyn Fn(&[f64]) -> Option<f64>,
        steps: &mut usize,
        opts: &SdpOptions,
    ) -> Result<f64> {
        let d = self.shape.dim();
        let m = self.basis.len();
        let nu = d as f64;
        let solver_error = |message: String, decrement: f64| Error::Solver {
            message,
            gap: (nu + nu.sqrt() * decrement.max(0.0).sqrt()) / t,
        };
        let mut decrement = f64::INFINITY;
        loop {
            if *steps >= opts.max_newton_steps {
                return Err(solver_error(
                    format!("{steps} Newton steps without reaching the target gap"),
                    decrement,
                ));
            }
            *steps += 1;
            let chol = positive_cholesky(self.point(y))
                .ok_or_else(|| solver_error("iterate left the positive cone".into(), decrement))?;
            let l_inv = chol
                .l()
                .solve_lower_triangular(&identity(d))
                .ok_or_else(|| solver_error("singular barrier factor".into(), decrement))?;
            let l_inv_adj = l_inv.adjoint();
            let mut g_mat = DMatrix::<f64>::zeros(2 * d * d, m);
            let mut grad = nalgebra::DVector::<f64>::zeros(m);
            for (i, b) in self.basis.iter().enumerate() {
                let bt = &l_inv * b * &l_inv_adj;
                grad[i] = t * cvec[i] + trace(&bt).re;
                for (k, z) in bt.iter().enumerate() {
                    g_mat[(2 * k, i)] = z.re;
                    g_mat[(2 * k + 1, i)] = z.im;
                }
            }
            let hess = g_mat.transpose() * &g_mat;
            let delta = match Cholesky::new(hess.clone()) {
                Some(ch) => ch.solve(&grad),
                None => pseudo_solve(hess, &grad),
            };
            decrement = grad.dot(&delta).max(0.0);
            if decrement / 2.0 <= 1e-10 {
                return Ok(decrement);
            }
            let slope = cvec.iter().zip(delta.iter()).map(|(a, b)| a * b).sum::<f64>();
            let here = barrier(y).ok_or_else(|| solver_error("iterate left the positive cone".into(), decrement))?;
            // largest step keeping L^-1 X(y + a delta) L^-* = I + a L^-1 dX L^-* inside the cone
            let step_dir = self
                .basis
                .iter()
                .zip(delta.iter())
                .fold(Matrix::zeros(d, d), |acc, (b, &w)| acc + b.scale(w));
            let scaled = &l_inv * step_dir * &l_inv_adj;
            let lowest = min_eigenvalue(&hermitian_part(&scaled))?;
            let mut alpha: f64 = if lowest < 0.0 { (0.99 / -lowest).min(1.0) } else { 1.0 };
            loop {
                let trial: Vec<f64> = y.iter().zip(delta.iter()).map(|(a, b)| a + alpha * b).collect();
                if let Some(there) = barrier(&trial) {
                    // objective change written without differencing large terms
                    if t * alpha * slope + (there - here) >= 0.25 * alpha * decrement {
                        *y = trial;
                        break;
                    }
                }
                alpha *= 0.5;
                if alpha < 1e-12 {
                    return Ok(decrement);
                }
            }
        }
    }
}

/// Cholesky factor of a Hermitian matrix, or `None` unless it is positive definite.
///
/// The complex factorization takes principal square roots of negative pivots instead of
/// failing, so every pivot is checked to be real and positive.
fn positive_cholesky(x: Matrix) -> Option<Cholesky<num_complex::Complex64, nalgebra::Dyn>> {
    let chol = Cholesky::new(x)?;
    let ok = chol
        .l()
        .diagonal()
        .iter()
        .all(|z| z.re.is_finite() && z.re > 0.0 && z.im.abs() <= 1e-9 * z.re);
    ok.then_some(chol)
}

/// Gap accepted when the barrier path breaks down numerically before the target.
const ACCEPTABLE_GAP: f64 = 1e-7;

/// Minimum-norm solution of a symmetric positive semidefinite system.
fn pseudo_solve(a: DMatrix<f64>, b: &nalgebra::DVector<f64>) -> nalgebra::DVector<f64> {
    let eig = a.symmetric_eigen();
    let top = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let coeffs = eig.eigenvectors.transpose() * b;
    let scaled = nalgebra::DVector::from_iterator(
        coeffs.len(),
        coeffs.iter().zip(eig.eigenvalues.iter()).map(|(c, &l)| {
            if l > 1e-14 * top {
                c / l
            } else {
                0.0
            }
        }),
    );
    eig.eigenvectors * scaled
}

/// Orthonormal Hermitian basis of `d x d` matrices: diagonal units, then symmetric and
/// antisymmetric off-diagonal pairs.
fn hermitian_basis(d: usize) -> Vec<Matrix> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut out: Vec<Matrix> = (0..d).map(|i| matrix_unit(d, i, i)).collect();
    for i in 0..d {
        for j in i + 1..d {
            out.push((matrix_unit(d, i, j) + matrix_unit(d, j, i)).scale(s));
            out.push((matrix_unit(d, i, j) - matrix_unit(d, j, i)) * c(0.0, s));
        }
    }
    out
}

/// Real coordinates of the homogeneous strategy constraints evaluated at `x`.
fn homogeneous_constraints(x: &Matrix, shape: &RoundShape) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    let mut y = x.clone();
    for j in (1..=shape.rounds()).rev() {
        let (traced, lower) = trace_round(&y, shape, j)?;
        let residual = traced - tensor(&lower, &identity(1 << shape.q[j - 1]));
        out.extend(residual.iter().flat_map(|z| [z.re, z.im]));
        y = lower;
    }
    out.push(y[(0, 0)].re);
    Ok(out)
}

/// Maximizes `<objective, X>` over strategies of `shape`.
pub fn solve_strategy_sdp(objective: &Matrix, shape: &RoundShape, opts: &SdpOptions) -> Result<SdpSolution> {
    StrategySpace::new(shape, opts.max_dim)?.maximize(objective, opts)
}

/// Maximum acceptance probability `2^{sum r} <rho_1, X>` over all strategies.
pub fn max_acceptance_sdp(view: &CoStrategyView) -> Result<SdpSolution> {
    max_acceptance_sdp_with(view, &SdpOptions::default())
}

pub fn max_acceptance_sdp_with(view: &CoStrategyView, opts: &SdpOptions) -> Result<SdpSolution> {
    solve_strategy_sdp(&view.objective(), &view.shape, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{choi_of_channel, measurement_channel, QuantumChannel};
    use crate::linalg::{diag, max_eigenvalue, DensityOperator};
    use crate::random::{random_density, random_hermitian, rng};

    #[test]
    fn projection_of_deterministic_acceptance() {
        let one = DensityOperator::on_qubits(diag(&[0.0, 1.0]), 1).unwrap();
        let always = QuantumChannel::replacement(1, &one).unwrap();
        let view = accept_projection(&choi_of_channel(&always), &RoundShape::single(0, 1)).unwrap();
        assert!((trace(&view.rho1).re - 1.0).abs() < 1e-12);
        let zero = DensityOperator::on_qubits(diag(&[1.0, 0.0]), 1).unwrap();
        let never = QuantumChannel::replacement(1, &zero).unwrap();
        let view = accept_projection(&choi_of_channel(&never), &RoundShape::single(0, 1)).unwrap();
        assert!(max_abs(&view.rho1) < 1e-15);
    }

    #[test]
    fn projection_of_measure_only_verifier() {
        let ch = measurement_channel(&diag(&[0.25, 0.75]), &diag(&[0.75, 0.25])).unwrap();
        let view = accept_projection(&choi_of_channel(&ch), &RoundShape::single(0, 1)).unwrap();
        let ev = crate::linalg::eigenvalues(&view.rho1.scale(2.0)).unwrap();
        assert!((ev[0] - 0.25).abs() < 1e-12 && (ev[1] - 0.75).abs() < 1e-12);
        let sol = max_acceptance_sdp(&view).unwrap();
        assert!((sol.value - 0.75).abs() < 1e-7, "{}", sol.value);
    }

    #[test]
    fn projection_requires_acceptance_register() {
        let ch = QuantumChannel::identity(1);
        assert!(accept_projection(&choi_of_channel(&ch), &RoundShape::single(1, 1)).is_err());
    }

    #[test]
    fn density_operators_are_single_round_strategies() {
        let shape = RoundShape::single(0, 1);
        let mut r = rng(31);
        let rho = random_density(&mut r, 2);
        assert!(strategy_feasible(&rho, &shape, 1e-9).unwrap().feasible);
        let report = strategy_feasible(&rho.scale(2.0), &shape, 1e-9).unwrap();
        assert!(!report.feasible);
        assert_eq!(report.worst.unwrap().constraint, "Y_0 = 1");
        let not_psd = diag(&[1.5, -0.5]);
        let report = strategy_feasible(&not_psd, &shape, 1e-9).unwrap();
        assert_eq!(report.worst.unwrap().constraint, "positivity");
    }

    #[test]
    fn identity_choi_is_a_strategy() {
        let shape = RoundShape::single(1, 1);
        let j = choi_of_channel(&QuantumChannel::identity(1)).matrix().scale(2.0);
        assert!((trace(&j).re - 2.0).abs() < 1e-12);
        assert!(strategy_feasible(&j, &shape, 1e-9).unwrap().feasible);
        assert!(strategy_feasible(&Matrix::zeros(2, 2), &shape, 1e-9).is_err());
    }

    #[test]
    fn space_dimension_counts() {
        // density operators on one qubit: 3 free real parameters
        assert_eq!(StrategySpace::new(&RoundShape::single(0, 1), 32).unwrap().free_parameters(), 3);
        // channels from one qubit to one qubit: 16 - 4 parameters
        assert_eq!(StrategySpace::new(&RoundShape::single(1, 1), 32).unwrap().free_parameters(), 12);
        assert!(matches!(
            StrategySpace::new(&RoundShape::single(3, 3), 32),
            Err(Error::CapExceeded(_))
        ));
    }

    #[test]
    fn random_objectives_yield_feasible_optima() {
        let mut r = rng(32);
        for shape in [RoundShape::single(1, 1), RoundShape::new(vec![0, 1], vec![1, 1]).unwrap()] {
            let w = random_hermitian(&mut r, shape.dim());
            let sol = solve_strategy_sdp(&w, &shape, &SdpOptions::default()).unwrap();
            let rep = strategy_feasible(&sol.strategy.x, &shape, 1e-7).unwrap();
            assert!(rep.feasible, "{rep:?}");
            assert!(sol.gap <= 1e-8);
            assert!((trace(&sol.strategy.x).re - (1 << shape.total_q()) as f64).abs() < 1e-7);
        }
    }

    #[test]
    fn single_round_without_questions_is_an_eigenvalue_problem() {
        let mut r = rng(33);
        for rq in 1..=2 {
            let w = random_hermitian(&mut r, 1 << rq);
            let sol = solve_strategy_sdp(&w, &RoundShape::single(0, rq), &SdpOptions::default()).unwrap();
            assert!((sol.value - max_eigenvalue(&w).unwrap()).abs() < 1e-7);
        }
    }
}
