//! Dense complex linear algebra over multi-register qubit spaces.
//!
//! Matrices are `nalgebra` dense matrices of `Complex64`. Register 0 is always
//! the leftmost tensor factor, so a basis index decomposes into register digits
//! with register 0 as the most significant digit.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Matrix = DMatrix<Complex64>;

/// Absolute tolerance used for Hermiticity, positivity and trace checks.
pub const TOL: f64 = 1e-9;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn real(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn identity(dim: usize) -> Matrix {
    Matrix::identity(dim, dim)
}

pub fn zeros(rows: usize, cols: usize) -> Matrix {
    Matrix::zeros(rows, cols)
}

/// `|i><j|` in dimension `dim`.
pub fn matrix_unit(dim: usize, i: usize, j: usize) -> Matrix {
    let mut m = zeros(dim, dim);
    m[(i, j)] = real(1.0);
    m
}

/// Column vector `|i>`.
pub fn ket(dim: usize, i: usize) -> Matrix {
    let mut v = zeros(dim, 1);
    v[(i, 0)] = real(1.0);
    v
}

pub fn projector(vector: &Matrix) -> Matrix {
    vector * vector.adjoint()
}

pub fn diag(entries: &[f64]) -> Matrix {
    let mut m = zeros(entries.len(), entries.len());
    for (i, &e) in entries.iter().enumerate() {
        m[(i, i)] = real(e);
    }
    m
}

pub fn trace(x: &Matrix) -> Complex64 {
    x.diagonal().iter().sum()
}

/// Hilbert-Schmidt inner product `Tr(X* Y)`.
pub fn inner(x: &Matrix, y: &Matrix) -> Complex64 {
    x.iter().zip(y.iter()).map(|(a, b)| a.conj() * b).sum()
}

/// Kronecker product with `a` as the leading factor.
pub fn tensor(a: &Matrix, b: &Matrix) -> Matrix {
    a.kronecker(b)
}

pub fn tensor_all<'a>(factors: impl IntoIterator<Item = &'a Matrix>) -> Matrix {
    factors
        .into_iter()
        .fold(identity(1), |acc, f| tensor(&acc, f))
}

pub fn hermitian_deviation(x: &Matrix) -> f64 {
    if !x.is_square() {
        return f64::INFINITY;
    }
    (x - x.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn hermitian_part(x: &Matrix) -> Matrix {
    (x + x.adjoint()).scale(0.5)
}

fn require_square(x: &Matrix) -> Result<()> {
    if x.is_square() {
        Ok(())
    } else {
        Err(Error::NotSquare {
            rows: x.nrows(),
            cols: x.ncols(),
        })
    }
}

fn require_hermitian(x: &Matrix) -> Result<()> {
    require_square(x)?;
    let dev = hermitian_deviation(x);
    if dev > TOL {
        return Err(Error::NotHermitian(dev));
    }
    Ok(())
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues sorted ascending with
/// matching eigenvector columns. The input is symmetrized first.
pub fn hermitian_eigen(x: &Matrix) -> (Vec<f64>, Matrix) {
    let eig = hermitian_part(x).symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = Matrix::from_fn(x.nrows(), order.len(), |r, k| {
        eig.eigenvectors[(r, order[k])]
    });
    (values, vectors)
}

pub fn eigenvalues(x: &Matrix) -> Result<Vec<f64>> {
    require_hermitian(x)?;
    Ok(hermitian_eigen(x).0)
}

pub fn max_eigenvalue(x: &Matrix) -> Result<f64> {
    eigenvalues(x).map(|v| *v.last().expect("nonempty matrix"))
}

pub fn min_eigenvalue(x: &Matrix) -> Result<f64> {
    eigenvalues(x).map(|v| v[0])
}

/// Applies `f` to the spectrum of a Hermitian matrix.
pub fn hermitian_function(x: &Matrix, f: impl Fn(f64) -> f64) -> Matrix {
    let (values, vectors) = hermitian_eigen(x);
    let scaled = Matrix::from_fn(vectors.nrows(), vectors.ncols(), |r, k| {
        vectors[(r, k)] * f(values[k])
    });
    scaled * vectors.adjoint()
}

pub fn psd_sqrt(x: &Matrix) -> Matrix {
    hermitian_function(x, |v| v.max(0.0).sqrt())
}

pub fn singular_values(x: &Matrix) -> Vec<f64> {
    x.clone().svd(false, false).singular_values.iter().copied().collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormKind {
    Trace,
    Spectral,
}

/// Trace norm (sum of singular values) or spectral norm (largest singular value).
pub fn norm(x: &Matrix, kind: NormKind) -> Result<f64> {
    require_square(x)?;
    let s = singular_values(x);
    Ok(match kind {
        NormKind::Trace => s.iter().sum(),
        NormKind::Spectral => s.iter().copied().fold(0.0, f64::max),
    })
}

pub fn trace_norm(x: &Matrix) -> f64 {
    singular_values(x).iter().sum()
}

pub fn spectral_norm(x: &Matrix) -> f64 {
    singular_values(x).iter().copied().fold(0.0, f64::max)
}

/// Ordered local dimensions of the registers a matrix acts on.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsystemShape {
    dims: Vec<usize>,
}

impl SubsystemShape {
    /// Every dimension must be a power of two (1 is allowed for empty registers).
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if let Some(d) = dims.iter().find(|d| !d.is_power_of_two()) {
            return Err(Error::DimensionMismatch(format!(
                "register dimension {d} is not a power of two"
            )));
        }
        Ok(Self { dims })
    }

    pub fn qubits(widths: &[usize]) -> Self {
        Self {
            dims: widths.iter().map(|&w| 1usize << w).collect(),
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn select(&self, registers: &[usize]) -> Self {
        Self {
            dims: registers.iter().map(|&r| self.dims[r]).collect(),
        }
    }

    fn check_matrix(&self, x: &Matrix) -> Result<()> {
        if x.nrows() != self.total_dim() || x.ncols() != self.total_dim() {
            return Err(Error::DimensionMismatch(format!(
                "shape {:?} (dimension {}) annotates a {}x{} matrix",
                self.dims,
                self.total_dim(),
                x.nrows(),
                x.ncols()
            )));
        }
        Ok(())
    }

    /// Register digits of a basis index, register 0 first.
    fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims.len()];
        for (slot, &d) in out.iter_mut().zip(&self.dims).rev() {
            *slot = index % d;
            index /= d;
        }
        out
    }

    fn compose(dims: &[usize], digits: impl Iterator<Item = usize>) -> usize {
        dims.iter().zip(digits).fold(0, |acc, (&d, x)| acc * d + x)
    }
}

/// For each basis index of `shape`, its index after reordering the registers so
/// that new register `k` is old register `perm[k]`.
pub fn permutation_index_map(shape: &SubsystemShape, perm: &[usize]) -> Result<Vec<usize>> {
    validate_permutation(perm, shape.len())?;
    let new_dims: Vec<usize> = perm.iter().map(|&p| shape.dims[p]).collect();
    Ok((0..shape.total_dim())
        .map(|i| {
            let digits = shape.digits(i);
            SubsystemShape::compose(&new_dims, perm.iter().map(|&p| digits[p]))
        })
        .collect())
}

fn validate_permutation(perm: &[usize], n: usize) -> Result<()> {
    if perm.len() != n {
        return Err(Error::InvalidPermutation(format!(
            "expected {n} entries, got {}",
            perm.len()
        )));
    }
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || seen[p] {
            return Err(Error::InvalidPermutation(format!("{perm:?} is not a bijection on 0..{n}")));
        }
        seen[p] = true;
    }
    Ok(())
}

/// Conjugation by the register permutation unitary: new register `k` is old register `perm[k]`.
pub fn permute_subsystems(x: &Matrix, shape: &SubsystemShape, perm: &[usize]) -> Result<Matrix> {
    shape.check_matrix(x)?;
    let map = permutation_index_map(shape, perm)?;
    let mut out = zeros(x.nrows(), x.ncols());
    for j in 0..x.ncols() {
        for i in 0..x.nrows() {
            out[(map[i], map[j])] = x[(i, j)];
        }
    }
    Ok(out)
}

/// Reorders only the row space (for Kraus operators and kets).
pub fn permute_rows(x: &Matrix, shape: &SubsystemShape, perm: &[usize]) -> Result<Matrix> {
    if x.nrows() != shape.total_dim() {
        return Err(Error::DimensionMismatch(format!(
            "row shape {:?} vs {} rows",
            shape.dims,
            x.nrows()
        )));
    }
    let map = permutation_index_map(shape, perm)?;
    let mut out = zeros(x.nrows(), x.ncols());
    for j in 0..x.ncols() {
        for i in 0..x.nrows() {
            out[(map[i], j)] = x[(i, j)];
        }
    }
    Ok(out)
}

/// Traces out every register not listed in `keep`; kept registers retain their relative order.
pub fn partial_trace(x: &Matrix, shape: &SubsystemShape, keep: &[usize]) -> Result<Matrix> {
    shape.check_matrix(x)?;
    let n = shape.len();
    let mut kept = vec![false; n];
    for &k in keep {
        if k >= n {
            return Err(Error::IndexOutOfRange { index: k, count: n });
        }
        kept[k] = true;
    }
    let keep_regs: Vec<usize> = (0..n).filter(|&r| kept[r]).collect();
    let trace_regs: Vec<usize> = (0..n).filter(|&r| !kept[r]).collect();
    let keep_dims: Vec<usize> = keep_regs.iter().map(|&r| shape.dims[r]).collect();
    let trace_dims: Vec<usize> = trace_regs.iter().map(|&r| shape.dims[r]).collect();
    let split: Vec<(usize, usize)> = (0..shape.total_dim())
        .map(|i| {
            let d = shape.digits(i);
            (
                SubsystemShape::compose(&keep_dims, keep_regs.iter().map(|&r| d[r])),
                SubsystemShape::compose(&trace_dims, trace_regs.iter().map(|&r| d[r])),
            )
        })
        .collect();
    let out_dim: usize = keep_dims.iter().product();
    let mut out = zeros(out_dim, out_dim);
    for j in 0..x.ncols() {
        let (kj, tj) = split[j];
        for i in 0..x.nrows() {
            let (ki, ti) = split[i];
            if ti == tj {
                out[(ki, kj)] += x[(i, j)];
            }
        }
    }
    Ok(out)
}

/// Transpose on the listed registers only.
pub fn partial_transpose(x: &Matrix, shape: &SubsystemShape, registers: &[usize]) -> Result<Matrix> {
    shape.check_matrix(x)?;
    let n = shape.len();
    for &r in registers {
        if r >= n {
            return Err(Error::IndexOutOfRange { index: r, count: n });
        }
    }
    let dims = shape.dims.clone();
    let mut out = zeros(x.nrows(), x.ncols());
    for j in 0..x.ncols() {
        let dj = shape.digits(j);
        for i in 0..x.nrows() {
            let mut di = shape.digits(i);
            let mut dj2 = dj.clone();
            for &r in registers {
                std::mem::swap(&mut di[r], &mut dj2[r]);
            }
            let ni = SubsystemShape::compose(&dims, di.into_iter());
            let nj = SubsystemShape::compose(&dims, dj2.into_iter());
            out[(ni, nj)] = x[(i, j)];
        }
    }
    Ok(out)
}

/// Uhlmann root fidelity `||sqrt(rho) sqrt(sigma)||_1`.
pub fn fidelity(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(format!(
            "fidelity between dimensions {} and {}",
            rho.dim(),
            sigma.dim()
        )));
    }
    let product = psd_sqrt(rho.matrix()) * psd_sqrt(sigma.matrix());
    Ok(trace_norm(&product).clamp(0.0, 1.0))
}

/// Unit-trace positive semidefinite operator with register metadata.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    matrix: Matrix,
    shape: SubsystemShape,
}

impl DensityOperator {
    pub fn new(matrix: Matrix, shape: SubsystemShape) -> Result<Self> {
        shape.check_matrix(&matrix)?;
        let dev = hermitian_deviation(&matrix);
        if dev > TOL {
            return Err(Error::NotHermitian(dev));
        }
        let tr = trace(&matrix).re;
        if (tr - 1.0).abs() > TOL {
            return Err(Error::InvalidState(format!("trace {tr} != 1")));
        }
        let min = hermitian_eigen(&matrix).0[0];
        if min < -TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(Self {
            matrix: hermitian_part(&matrix),
            shape,
        })
    }

    /// A single register of `qubits` qubits.
    pub fn on_qubits(matrix: Matrix, qubits: usize) -> Result<Self> {
        Self::new(matrix, SubsystemShape::qubits(&[qubits]))
    }

    pub fn maximally_mixed(shape: SubsystemShape) -> Self {
        let d = shape.total_dim();
        Self {
            matrix: identity(d).scale(1.0 / d as f64),
            shape,
        }
    }

    pub fn pure(vector: &Matrix, shape: SubsystemShape) -> Result<Self> {
        let norm = vector.norm();
        if norm == 0.0 {
            return Err(Error::InvalidState("zero vector".into()));
        }
        Self::new(projector(&vector.unscale(norm)), shape)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> Matrix {
        self.matrix
    }

    pub fn shape(&self) -> &SubsystemShape {
        &self.shape
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn tensor(&self, other: &DensityOperator) -> DensityOperator {
        let mut dims = self.shape.dims.clone();
        dims.extend_from_slice(&other.shape.dims);
        Self {
            matrix: tensor(&self.matrix, &other.matrix),
            shape: SubsystemShape { dims },
        }
    }

    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityOperator> {
        let matrix = partial_trace(&self.matrix, &self.shape, keep)?;
        let mut sorted = keep.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        Ok(Self {
            matrix,
            shape: self.shape.select(&sorted),
        })
    }

    pub fn permute(&self, perm: &[usize]) -> Result<DensityOperator> {
        Ok(Self {
            matrix: permute_subsystems(&self.matrix, &self.shape, perm)?,
            shape: self.shape.select(perm),
        })
    }

    pub fn trace_distance(&self, other: &DensityOperator) -> f64 {
        trace_norm(&(&self.matrix - &other.matrix))
    }

    /// Builds the operator without validation; callers guarantee the invariants.
    pub(crate) fn from_parts_unchecked(matrix: Matrix, shape: SubsystemShape) -> Self {
        Self { matrix, shape }
    }
}

/// The textual matrix literal: nested rows of `[re, im]` pairs, row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MatrixLiteral(pub Vec<Vec<[f64; 2]>>);

impl From<&Matrix> for MatrixLiteral {
    fn from(m: &Matrix) -> Self {
        MatrixLiteral(
            (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
                .collect(),
        )
    }
}

impl MatrixLiteral {
    pub fn to_matrix(&self) -> Result<Matrix> {
        let rows = self.0.len();
        if rows == 0 {
            return Err(Error::Parse("matrix literal has no rows".into()));
        }
        let cols = self.0[0].len();
        if cols == 0 || self.0.iter().any(|r| r.len() != cols) {
            return Err(Error::Parse("matrix literal rows are empty or ragged".into()));
        }
        Ok(Matrix::from_fn(rows, cols, |i, j| {
            let [re, im] = self.0[i][j];
            c(re, im)
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_density, random_hermitian, rng};

    fn close(a: &Matrix, b: &Matrix, tol: f64) -> bool {
        a.shape() == b.shape() && (a - b).iter().all(|z| z.norm() <= tol)
    }

    #[test]
    fn tensor_of_identities_and_projectors() {
        assert!(close(&tensor(&identity(2), &identity(2)), &identity(4), 0.0));
        let p0 = diag(&[1.0, 0.0]);
        let p1 = diag(&[0.0, 1.0]);
        assert!(close(&tensor(&p0, &p1), &diag(&[0.0, 1.0, 0.0, 0.0]), 0.0));
    }

    #[test]
    fn partial_trace_of_product_and_bell_state() {
        let mut r = rng(1);
        let a = random_density(&mut r, 2);
        let b = random_density(&mut r, 4);
        let shape = SubsystemShape::new(vec![2, 4]).unwrap();
        let ab = tensor(&a, &b);
        assert!(close(&partial_trace(&ab, &shape, &[0]).unwrap(), &a, 1e-12));
        assert!(close(&partial_trace(&ab, &shape, &[1]).unwrap(), &b, 1e-12));

        let phi = Matrix::from_column_slice(4, 1, &[real(1.0), real(0.0), real(0.0), real(1.0)])
            .unscale(2f64.sqrt());
        let marginal = partial_trace(&projector(&phi), &SubsystemShape::qubits(&[1, 1]), &[0]).unwrap();
        assert!(close(&marginal, &identity(2).scale(0.5), 1e-15));
    }

    #[test]
    fn partial_trace_preserves_trace_by_direct_summation() {
        let mut r = rng(2);
        let rho = random_density(&mut r, 4);
        let shape = SubsystemShape::qubits(&[1, 1]);
        let reduced = partial_trace(&rho, &shape, &[0]).unwrap();
        // direct summation oracle
        let mut oracle = zeros(2, 2);
        for a in 0..2 {
            for b in 0..2 {
                for k in 0..2 {
                    oracle[(a, b)] += rho[(2 * a + k, 2 * b + k)];
                }
            }
        }
        assert!(close(&reduced, &oracle, 1e-14));
        assert!((trace(&reduced).re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn partial_trace_rejects_bad_index() {
        let shape = SubsystemShape::qubits(&[1, 1]);
        assert!(matches!(
            partial_trace(&identity(4), &shape, &[2]),
            Err(Error::IndexOutOfRange { index: 2, count: 2 })
        ));
    }

    #[test]
    fn partial_trace_composes() {
        let mut r = rng(3);
        let rho = random_density(&mut r, 8);
        let shape = SubsystemShape::qubits(&[1, 1, 1]);
        let direct = partial_trace(&rho, &shape, &[0]).unwrap();
        let step = partial_trace(&rho, &shape, &[0, 2]).unwrap();
        let twice = partial_trace(&step, &SubsystemShape::qubits(&[1, 1]), &[0]).unwrap();
        assert!(close(&direct, &twice, 1e-14));
    }

    #[test]
    fn swap_exchanges_product_factors() {
        let mut r = rng(4);
        let a = random_density(&mut r, 2);
        let b = random_density(&mut r, 4);
        let shape = SubsystemShape::new(vec![2, 4]).unwrap();
        let swapped = permute_subsystems(&tensor(&a, &b), &shape, &[1, 0]).unwrap();
        assert!(close(&swapped, &tensor(&b, &a), 1e-15));
        let id = permute_subsystems(&tensor(&a, &b), &shape, &[0, 1]).unwrap();
        assert!(close(&id, &tensor(&a, &b), 0.0));
        assert!(matches!(
            permute_subsystems(&id, &shape, &[0, 0]),
            Err(Error::InvalidPermutation(_))
        ));
    }

    #[test]
    fn permutation_and_inverse_compose_to_identity() {
        let mut r = rng(5);
        let x = random_hermitian(&mut r, 16);
        let shape = SubsystemShape::qubits(&[1, 2, 1]);
        let perm = [2, 0, 1];
        let y = permute_subsystems(&x, &shape, &perm).unwrap();
        let moved = shape.select(&perm);
        let mut inverse = [0; 3];
        for (k, &p) in perm.iter().enumerate() {
            inverse[p] = k;
        }
        let back = permute_subsystems(&y, &moved, &inverse).unwrap();
        assert!(close(&back, &x, 0.0));
    }

    #[test]
    fn norms_of_simple_matrices() {
        assert!((norm(&identity(2), NormKind::Trace).unwrap() - 2.0).abs() < 1e-14);
        assert!((norm(&identity(2), NormKind::Spectral).unwrap() - 1.0).abs() < 1e-14);
        assert!((norm(&diag(&[3.0, -1.0]), NormKind::Trace).unwrap() - 4.0).abs() < 1e-14);
        assert!(matches!(norm(&zeros(2, 3), NormKind::Trace), Err(Error::NotSquare { .. })));
    }

    #[test]
    fn max_eigenvalue_cases() {
        assert!((max_eigenvalue(&diag(&[0.75, 0.25])).unwrap() - 0.75).abs() < 1e-15);
        let phi = Matrix::from_column_slice(4, 1, &[real(1.0), real(0.0), real(0.0), real(1.0)])
            .unscale(2f64.sqrt());
        assert!((max_eigenvalue(&projector(&phi)).unwrap() - 1.0).abs() < 1e-14);
        let mut skew = identity(2);
        skew[(0, 1)] = real(1.0);
        assert!(matches!(max_eigenvalue(&skew), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn max_eigenvalue_matches_characteristic_polynomial_for_2x2() {
        let mut r = rng(6);
        for _ in 0..20 {
            let h = random_hermitian(&mut r, 2);
            let (a, d) = (h[(0, 0)].re, h[(1, 1)].re);
            let b = h[(0, 1)].norm();
            let oracle = (a + d) / 2.0 + (((a - d) / 2.0).powi(2) + b * b).sqrt();
            assert!((max_eigenvalue(&h).unwrap() - oracle).abs() < 1e-10);
        }
    }

    #[test]
    fn fidelity_cases() {
        let zero = DensityOperator::on_qubits(diag(&[1.0, 0.0]), 1).unwrap();
        let one = DensityOperator::on_qubits(diag(&[0.0, 1.0]), 1).unwrap();
        let mixed = DensityOperator::maximally_mixed(SubsystemShape::qubits(&[1]));
        assert!((fidelity(&zero, &zero).unwrap() - 1.0).abs() < 1e-12);
        assert!(fidelity(&zero, &one).unwrap().abs() < 1e-12);
        assert!((fidelity(&zero, &mixed).unwrap() - 0.5f64.sqrt()).abs() < 1e-12);
        let big = DensityOperator::maximally_mixed(SubsystemShape::qubits(&[2]));
        assert!(matches!(fidelity(&zero, &big), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn density_operator_validation() {
        assert!(DensityOperator::on_qubits(diag(&[0.5, 0.6]), 1).is_err());
        assert!(DensityOperator::on_qubits(diag(&[1.2, -0.2]), 1).is_err());
        assert!(DensityOperator::on_qubits(diag(&[0.5, 0.5]), 2).is_err());
    }

    #[test]
    fn literal_round_trip() {
        let m = Matrix::from_row_slice(2, 2, &[c(1.0, 0.5), c(0.0, -1.0), c(2.0, 0.0), c(0.25, 0.0)]);
        let lit = MatrixLiteral::from(&m);
        let json = serde_json::to_string(&lit).unwrap();
        assert_eq!(json, "[[[1.0,0.5],[0.0,-1.0]],[[2.0,0.0],[0.25,0.0]]]");
        let back: MatrixLiteral = serde_json::from_str(&json).unwrap();
        assert_eq!(back.to_matrix().unwrap(), m);
        assert!(MatrixLiteral(vec![vec![[1.0, 0.0]], vec![]]).to_matrix().is_err());
    }

    #[test]
    fn partial_transpose_twice_is_identity() {
        let mut r = rng(7);
        let x = random_hermitian(&mut r, 8);
        let shape = SubsystemShape::qubits(&[1, 2]);
        let once = partial_transpose(&x, &shape, &[1]).unwrap();
        let full = partial_transpose(&once, &shape, &[0]).unwrap();
        assert!(close(&full, &x.transpose(), 0.0));
    }
}
