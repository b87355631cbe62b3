//! Weighted symmetric operators on the spatial grid.
//!
//! Every operator here is self-adjoint with respect to the quadrature inner
//! product <a, b>_W = sum_i w_i a_i b_i, never with respect to the plain dot
//! product. The form matrix Q = W A is the symmetric object; A = W^{-1} Q is
//! what gets applied to vectors.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{HcError, Result};
use crate::geometry::HorizonModel;

/// Relative bound enforced on |Q - Q^T| by the constructors.
const FORM_SYMMETRY_TOL: f64 = 1e-12;

/// Tridiagonal bands of a form matrix Q: diag has length n, off length n-1.
#[derive(Debug, Clone)]
pub struct FormBands {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl FormBands {
    pub fn n(&self) -> usize {
        self.diag.len()
    }

    /// Solve (shift * W + Q) x = b by the Thomas algorithm. The system is
    /// positive definite for shift >= 0 when Q is, so no pivoting is needed.
    pub fn solve_shifted(&self, weights: &DVector<f64>, shift: f64, b: &DVector<f64>) -> Result<DVector<f64>> {
        let n = self.n();
        if weights.len() != n || b.len() != n {
            return Err(HcError::DimensionMismatch(
                "shifted solve needs matching band, weight, and rhs sizes".into(),
            ));
        }
        let mut c = vec![0.0; n]; // scratch for eliminated superdiagonal
        let mut x = DVector::zeros(n);
        let mut d = self.diag[0] + shift * weights[0];
        if d == 0.0 {
            return Err(HcError::SolverFailure("zero pivot in tridiagonal solve".into()));
        }
        c[0] = if n > 1 { self.off[0] / d } else { 0.0 };
        x[0] = b[0] / d;
        for i in 1..n {
            d = self.diag[i] + shift * weights[i] - self.off[i - 1] * c[i - 1];
            if d == 0.0 {
                return Err(HcError::SolverFailure("zero pivot in tridiagonal solve".into()));
            }
            if i < n - 1 {
                c[i] = self.off[i] / d;
            }
            x[i] = (b[i] - self.off[i - 1] * x[i - 1]) / d;
        }
        for i in (0..n - 1).rev() {
            let t = c[i] * x[i + 1];
            x[i] -= t;
        }
        Ok(x)
    }
}

/// A W-self-adjoint operator: dense action matrix, weights, and (when the
/// operator came from a 1D stencil) the tridiagonal bands of Q = W A.
#[derive(Debug, Clone)]
pub struct SymmetricOperator {
    matrix: DMatrix<f64>,
    weights: DVector<f64>,
    bands: Option<FormBands>,
}

impl SymmetricOperator {
    /// Wrap a dense action matrix; rejects it unless W A is symmetric to
    /// roundoff (max |Q - Q^T| <= 1e-12 max |Q|).
    pub fn from_dense(matrix: DMatrix<f64>, weights: DVector<f64>) -> Result<Self> {
        let n = weights.len();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(HcError::DimensionMismatch(
                "operator matrix must be square and match the weights".into(),
            ));
        }
        if weights.iter().any(|&w| !(w > 0.0)) {
            return Err(HcError::InvalidModel("operator weights must be positive".into()));
        }
        let mut max_q: f64 = 0.0;
        let mut max_asym: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let qij = weights[i] * matrix[(i, j)];
                let qji = weights[j] * matrix[(j, i)];
                max_q = max_q.max(qij.abs());
                max_asym = max_asym.max((qij - qji).abs());
            }
        }
        if max_asym > FORM_SYMMETRY_TOL * max_q.max(f64::MIN_POSITIVE) {
            return Err(HcError::InvalidModel(format!(
                "operator is not weight-symmetric: asymmetry {max_asym:.3e} vs scale {max_q:.3e}"
            )));
        }
        Ok(Self {
            matrix,
            weights,
            bands: None,
        })
    }

    /// Build from tridiagonal form bands; A = W^{-1} Q is exactly
    /// W-symmetric by construction.
    pub fn from_form_bands(bands: FormBands, weights: DVector<f64>) -> Result<Self> {
        let n = bands.n();
        if weights.len() != n || (n > 0 && bands.off.len() != n - 1) {
            return Err(HcError::DimensionMismatch(
                "band lengths must be (n, n-1) and match the weights".into(),
            ));
        }
        if weights.iter().any(|&w| !(w > 0.0)) {
            return Err(HcError::InvalidModel("operator weights must be positive".into()));
        }
        let mut matrix = DMatrix::zeros(n, n);
        for i in 0..n {
            matrix[(i, i)] = bands.diag[i] / weights[i];
            if i + 1 < n {
                matrix[(i, i + 1)] = bands.off[i] / weights[i];
                matrix[(i + 1, i)] = bands.off[i] / weights[i + 1];
            }
        }
        Ok(Self {
            matrix,
            weights,
            bands: Some(bands),
        })
    }

    pub fn n(&self) -> usize {
        self.weights.len()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn weights(&self) -> &DVector<f64> {
        &self.weights
    }

    pub fn bands(&self) -> Option<&FormBands> {
        self.bands.as_ref()
    }

    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.matrix * x
    }

    /// max |Q - Q^T| over max |Q|; zero for band-built operators.
    pub fn symmetry_residual(&self) -> f64 {
        let n = self.n();
        let mut max_q: f64 = f64::MIN_POSITIVE;
        let mut max_asym: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let qij = self.weights[i] * self.matrix[(i, j)];
                let qji = self.weights[j] * self.matrix[(j, i)];
                max_q = max_q.max(qij.abs());
                max_asym = max_asym.max((qij - qji).abs());
            }
        }
        max_asym / max_q
    }
}

/// Assemble the squared one-particle energy on the wedge model.
///
/// The quadratic form acts on fields u through phi = |v|^{1/2} u:
///
///   Q(u, u) = sum_cells a_c (phi_{i+1} - phi_i)^2 / d_c
///           + sum_i v_i^2 m_i w_i u_i^2
///
/// with a = |v| / |h|^{1/2} at cell midpoints. The innermost cell is dropped
/// because a vanishes at the bifurcation point (the set {0} has zero
/// capacity for this weight, so the form closes with no inner boundary
/// condition); the outer cell couples to a zero Dirichlet ghost at s = L.
pub fn assemble_epsilon_squared(model: &HorizonModel) -> Result<SymmetricOperator> {
    let n = model.n();
    let nodes = model.grid.nodes();
    let w = model.grid.weights();
    let lapse_mid = model.lapse_midpoints();
    let metric_mid = model.metric_midpoints();

    let sqrt_v: Vec<f64> = model.lapse.iter().map(|&v| v.sqrt()).collect();
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n.saturating_sub(1)];

    // Interior cells [s_i, s_{i+1}] for i = 0..n-1 (0-based nodes).
    for i in 0..n - 1 {
        let d = nodes[i + 1] - nodes[i];
        let a = lapse_mid[i] / metric_mid[i];
        let c = a / d;
        diag[i] += c * model.lapse[i];
        diag[i + 1] += c * model.lapse[i + 1];
        off[i] -= c * sqrt_v[i] * sqrt_v[i + 1];
    }
    // Outer Dirichlet cell [s_n, L]: ghost value zero.
    {
        let d = model.grid.length() - nodes[n - 1];
        let a = lapse_mid[n - 1] / metric_mid[n - 1];
        diag[n - 1] += a / d * model.lapse[n - 1];
    }
    // Mass term.
    for i in 0..n {
        diag[i] += model.lapse[i] * model.lapse[i] * model.potential[i] * w[i];
    }

    SymmetricOperator::from_form_bands(
        FormBands { diag, off },
        DVector::from_column_slice(w),
    )
}

/// Eigendecomposition of a W-self-adjoint operator.
///
/// Columns of `eigvecs` are W-orthonormal; eigenvalues ascend. Signs are
/// pinned so decompositions are reproducible: in each eigenvector the entry
/// of largest magnitude (first such index on ties) is positive.
#[derive(Debug, Clone)]
pub struct SpectralData {
    eigvals: DVector<f64>,
    eigvecs: DMatrix<f64>,
    weights: DVector<f64>,
}

impl SpectralData {
    pub fn n(&self) -> usize {
        self.weights.len()
    }

    pub fn eigvals(&self) -> &DVector<f64> {
        &self.eigvals
    }

    pub fn eigvecs(&self) -> &DMatrix<f64> {
        &self.eigvecs
    }

    pub fn weights(&self) -> &DVector<f64> {
        &self.weights
    }

    /// Frequencies mu_k = sqrt(lambda_k); requires a positive spectrum.
    pub fn frequencies(&self) -> Result<DVector<f64>> {
        if self.eigvals.iter().any(|&l| !(l > 0.0)) {
            return Err(HcError::SolverFailure(
                "operator spectrum is not strictly positive".into(),
            ));
        }
        Ok(self.eigvals.map(f64::sqrt))
    }

    /// Coefficients c_k = <e_k, x>_W.
    pub fn analyze(&self, x: &DVector<f64>) -> DVector<f64> {
        let wx = DVector::from_fn(self.n(), |i, _| self.weights[i] * x[i]);
        self.eigvecs.transpose() * wx
    }

    /// Reconstruct x = sum_k c_k e_k.
    pub fn synthesize(&self, coeffs: &DVector<f64>) -> DVector<f64> {
        &self.eigvecs * coeffs
    }

    /// Apply f(A) x through the eigenbasis.
    pub fn apply_function(&self, f: impl Fn(f64) -> f64, x: &DVector<f64>) -> DVector<f64> {
        let mut c = self.analyze(x);
        for k in 0..c.len() {
            c[k] *= f(self.eigvals[k]);
        }
        self.synthesize(&c)
    }

    /// Apply g(sqrt(A)) x; f receives the frequency mu_k, not lambda_k.
    pub fn apply_frequency_function(
        &self,
        f: impl Fn(f64) -> f64,
        x: &DVector<f64>,
    ) -> Result<DVector<f64>> {
        let mu = self.frequencies()?;
        let mut c = self.analyze(x);
        for k in 0..c.len() {
            c[k] *= f(mu[k]);
        }
        Ok(self.synthesize(&c))
    }

    /// Dense matrix of f(A) = E f(Lambda) E^T W (a W-symmetric matrix).
    pub fn matrix_function(&self, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let n = self.n();
        let mut scaled = self.eigvecs.clone();
        for k in 0..n {
            let fk = f(self.eigvals[k]);
            scaled.column_mut(k).scale_mut(fk);
        }
        let mut et_w = self.eigvecs.transpose();
        for i in 0..n {
            et_w.column_mut(i).scale_mut(self.weights[i]);
        }
        scaled * et_w
    }

    /// Dense matrix of g(sqrt(A)).
    pub fn frequency_matrix_function(&self, f: impl Fn(f64) -> f64) -> Result<DMatrix<f64>> {
        let mu = self.frequencies()?;
        let n = self.n();
        let mut scaled = self.eigvecs.clone();
        for k in 0..n {
            scaled.column_mut(k).scale_mut(f(mu[k]));
        }
        let mut et_w = self.eigvecs.transpose();
        for i in 0..n {
            et_w.column_mut(i).scale_mut(self.weights[i]);
        }
        Ok(scaled * et_w)
    }

    /// Eigen-coefficients of many vectors at once: row j of `values` is a
    /// spatial vector, row j of the result its coefficients.
    pub fn analyze_rows(&self, values: &DMatrix<f64>) -> DMatrix<f64> {
        let n = self.n();
        let mut we = self.eigvecs.clone();
        for i in 0..n {
            we.row_mut(i).scale_mut(self.weights[i]);
        }
        values * we
    }

    /// Inverse of `analyze_rows`.
    pub fn synthesize_rows(&self, coeffs: &DMatrix<f64>) -> DMatrix<f64> {
        coeffs * self.eigvecs.transpose()
    }

    /// One-dimensional fixture with a single frequency mu (weight 1).
    pub fn scalar(mu: f64) -> Self {
        Self {
            eigvals: DVector::from_element(1, mu * mu),
            eigvecs: DMatrix::identity(1, 1),
            weights: DVector::from_element(1, 1.0),
        }
    }

    /// Number of modes with frequency sqrt(lambda_k) <= mu_cut (a prefix,
    /// since eigenvalues ascend).
    pub fn modes_below(&self, mu_cut: f64) -> usize {
        let cut = mu_cut * mu_cut;
        self.eigvals.iter().take_while(|&&l| l <= cut).count()
    }
}

/// Diagonalize a W-self-adjoint operator through the similarity
/// B = W^{1/2} A W^{-1/2}, which is symmetric in the plain sense.
pub fn spectral_decompose(op: &SymmetricOperator) -> Result<SpectralData> {
    let n = op.n();
    let w_sqrt: Vec<f64> = op.weights().iter().map(|&w| w.sqrt()).collect();
    let mut b = op.matrix().clone();
    for i in 0..n {
        for j in 0..n {
            b[(i, j)] *= w_sqrt[i] / w_sqrt[j];
        }
    }
    // Symmetrize to kill roundoff before the eigensolver.
    let bt = b.transpose();
    b = (b + bt) * 0.5;

    let eig = b.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &c| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[c])
            .expect("eigenvalues must be finite")
    });

    let mut eigvals = DVector::zeros(n);
    let mut eigvecs = DMatrix::zeros(n, n);
    for (k, &src) in order.iter().enumerate() {
        eigvals[k] = eig.eigenvalues[src];
        // Undo the similarity: e = W^{-1/2} \hat{e}.
        let mut col = DVector::zeros(n);
        let mut best = 0usize;
        let mut best_abs = -1.0f64;
        for i in 0..n {
            col[i] = eig.eigenvectors[(i, src)] / w_sqrt[i];
            let a = col[i].abs();
            if a > best_abs {
                best_abs = a;
                best = i;
            }
        }
        if col[best] < 0.0 {
            col.neg_mut();
        }
        // W-normalize (the similarity preserves norms only approximately
        // after the explicit division).
        let norm = weighted_inner_product(op.weights().as_slice(), col.as_slice(), col.as_slice()).sqrt();
        col.scale_mut(1.0 / norm);
        eigvecs.set_column(k, &col);
    }

    Ok(SpectralData {
        eigvals,
        eigvecs,
        weights: op.weights().clone(),
    })
}

/// <a, b>_W = sum_i w_i a_i b_i.
pub fn weighted_inner_product(weights: &[f64], a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(weights.len(), a.len());
    debug_assert_eq!(weights.len(), b.len());
    weights
        .iter()
        .zip(a.iter().zip(b.iter()))
        .map(|(&w, (&x, &y))| w * x * y)
        .sum()
}

pub fn weighted_norm(weights: &[f64], a: &[f64]) -> f64 {
    weighted_inner_product(weights, a, a).sqrt()
}

/// W-operator norm of a W-self-adjoint matrix by seeded power iteration.
///
/// Deterministic for a fixed seed; 60 iterations with Rayleigh-quotient
/// readout, which is plenty for the norm estimates used in tolerances.
pub fn operator_norm(a: &DMatrix<f64>, weights: &DVector<f64>, seed: u64) -> f64 {
    let n = weights.len();
    assert_eq!(a.nrows(), n);
    assert_eq!(a.ncols(), n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
    let mut norm_est = 0.0f64;
    for _ in 0..60 {
        // Iterate with A^2 so alternating-sign extremal pairs also converge.
        let y = a * (a * &x);
        let ny = weighted_norm(weights.as_slice(), y.as_slice());
        if ny == 0.0 || !ny.is_finite() {
            return 0.0;
        }
        x = y / ny;
    }
    let ax = a * &x;
    let num = weighted_inner_product(weights.as_slice(), ax.as_slice(), ax.as_slice());
    let den = weighted_inner_product(weights.as_slice(), x.as_slice(), x.as_slice());
    if den > 0.0 {
        norm_est = (num / den).sqrt();
    }
    norm_est
}

/// Smallest Rayleigh quotient <x, Ax>_W / <x, x>_W over the W-eigenbasis of
/// a dense W-symmetric matrix, computed exactly through `spectral_decompose`.
pub fn min_eigenvalue(a: &DMatrix<f64>, weights: &DVector<f64>) -> Result<f64> {
    let op = SymmetricOperator::from_dense(a.clone(), weights.clone())?;
    let spec = spectral_decompose(&op)?;
    Ok(spec.eigvals()[0])
}

/// Certify min-eig(A) >= -slack for a W-self-adjoint matrix without a full
/// eigensolve: Cholesky of the symmetrized W^{1/2} A W^{-1/2} + slack * I
/// succeeds exactly when the shifted matrix is positive definite. The
/// symmetrization perturbs eigenvalues by at most half the asymmetry
/// residual, which is roundoff-sized for matrices built here.
pub fn certify_semidefinite(a: &DMatrix<f64>, weights: &DVector<f64>, slack: f64) -> bool {
    let n = weights.len();
    assert_eq!(a.nrows(), n);
    assert_eq!(a.ncols(), n);
    let w_sqrt: Vec<f64> = weights.iter().map(|&w| w.sqrt()).collect();
    let mut s = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let sij = a[(i, j)] * w_sqrt[i] / w_sqrt[j];
            let sji = a[(j, i)] * w_sqrt[j] / w_sqrt[i];
            let sym = 0.5 * (sij + sji);
            s[(i, j)] = sym;
            s[(j, i)] = sym;
        }
        s[(i, i)] += slack;
    }
    s.cholesky().is_some()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_model, Grid1D, HorizonModel, ModelParams};
    use approx::assert_relative_eq;

    fn wedge(n: usize) -> HorizonModel {
        build_model(&ModelParams::with_defaults(1.0, 10.0, n, 1.0)).unwrap()
    }

    /// Unit-lapse model: the assembly reduces to a textbook second-difference
    /// operator with a mirror condition at s = h/2 and Dirichlet at L.
    fn flat_model(n: usize, length: f64, mass: f64) -> HorizonModel {
        let grid = Grid1D::uniform(length, n).unwrap();
        HorizonModel::from_samples(
            grid,
            vec![1.0; n],
            vec![1.0; n],
            vec![mass; n],
            1.0,
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn flat_assembly_matches_closed_form_spectrum() {
        // With v = h = 1 the dropped inner cell makes a mirror condition at
        // s = h/2; eigenvalues are m + (2 - 2 cos theta_k)/h^2 with
        // theta_k = (k + 1/2) pi / (n + 1/2).
        let n = 40;
        let length = 2.0;
        let mass = 0.7;
        let model = flat_model(n, length, mass);
        let op = assemble_epsilon_squared(&model).unwrap();
        let spec = spectral_decompose(&op).unwrap();
        let h = length / (n + 1) as f64;
        for k in 0..n {
            let theta = (k as f64 + 0.5) * std::f64::consts::PI / (n as f64 + 0.5);
            let expected = mass + (2.0 - 2.0 * theta.cos()) / (h * h);
            assert_relative_eq!(spec.eigvals()[k], expected, max_relative = 1e-11);
        }
    }

    #[test]
    fn assembly_is_weight_symmetric_and_positive() {
        let model = wedge(120);
        let op = assemble_epsilon_squared(&model).unwrap();
        assert!(op.symmetry_residual() < 1e-14);
        let spec = spectral_decompose(&op).unwrap();
        // Rayleigh bound: spectrum sits above min(v^2 m) exactly in the form.
        let floor = model
            .lapse
            .iter()
            .zip(model.potential.iter())
            .map(|(&v, &m)| v * v * m)
            .fold(f64::INFINITY, f64::min);
        assert!(spec.eigvals()[0] >= floor * (1.0 - 1e-8));
        assert!(spec.eigvals()[0] > 0.0);
    }

    #[test]
    fn eigenvectors_are_weight_orthonormal() {
        let model = wedge(60);
        let op = assemble_epsilon_squared(&model).unwrap();
        let spec = spectral_decompose(&op).unwrap();
        let w = spec.weights().as_slice().to_vec();
        for a in 0..6 {
            for b in 0..6 {
                let ip = weighted_inner_product(
                    &w,
                    spec.eigvecs().column(a).as_slice(),
                    spec.eigvecs().column(b).as_slice(),
                );
                let expected = if a == b { 1.0 } else { 0.0 };
                assert!((ip - expected).abs() < 1e-12, "a={a} b={b} ip={ip}");
            }
        }
    }

    #[test]
    fn spectral_signs_are_deterministic() {
        let model = wedge(40);
        let op = assemble_epsilon_squared(&model).unwrap();
        let s1 = spectral_decompose(&op).unwrap();
        let s2 = spectral_decompose(&op).unwrap();
        assert_eq!(s1.eigvecs().as_slice(), s2.eigvecs().as_slice());
        for k in 0..s1.n() {
            let col = s1.eigvecs().column(k);
            let mut best = 0usize;
            let mut best_abs = -1.0;
            for i in 0..col.len() {
                if col[i].abs() > best_abs {
                    best_abs = col[i].abs();
                    best = i;
                }
            }
            assert!(col[best] > 0.0);
        }
    }

    #[test]
    fn identity_function_reproduces_operator_action() {
        let model = wedge(50);
        let op = assemble_epsilon_squared(&model).unwrap();
        let spec = spectral_decompose(&op).unwrap();
        let x = DVector::from_fn(50, |i, _| ((i * i) as f64 * 0.013).sin());
        let via_fn = spec.apply_function(|l| l, &x);
        let direct = op.apply(&x);
        for i in 0..50 {
            assert_relative_eq!(via_fn[i], direct[i], max_relative = 1e-9, epsilon = 1e-11);
        }
        // f = 1 resolves the identity, which is completeness of the basis.
        let ident = spec.apply_function(|_| 1.0, &x);
        for i in 0..50 {
            assert_relative_eq!(ident[i], x[i], max_relative = 1e-10, epsilon = 1e-12);
        }
    }

    #[test]
    fn matrix_function_composes_like_scalars() {
        let model = wedge(30);
        let op = assemble_epsilon_squared(&model).unwrap();
        let spec = spectral_decompose(&op).unwrap();
        let sqrt_m = spec.frequency_matrix_function(|mu| mu).unwrap();
        let squared = &sqrt_m * &sqrt_m;
        let direct = op.matrix();
        let scale = operator_norm(direct, op.weights(), 7);
        let mut max_diff: f64 = 0.0;
        for i in 0..30 {
            for j in 0..30 {
                max_diff = max_diff.max((squared[(i, j)] - direct[(i, j)]).abs());
            }
        }
        assert!(max_diff < 1e-9 * scale, "max_diff={max_diff} scale={scale}");
    }

    #[test]
    fn scalar_spectral_fixture() {
        let s = SpectralData::scalar(2.0);
        let x = DVector::from_element(1, 3.0);
        let y = s.apply_frequency_function(|mu| mu, &x).unwrap();
        assert_relative_eq!(y[0], 6.0);
        let z = s.apply_function(|l| l, &x);
        assert_relative_eq!(z[0], 12.0);
    }

    #[test]
    fn thomas_solver_matches_dense_solve() {
        let model = wedge(35);
        let op = assemble_epsilon_squared(&model).unwrap();
        let bands = op.bands().unwrap();
        let b = DVector::from_fn(35, |i, _| (i as f64 * 0.37).cos());
        let shift = 1.3;
        let x = bands.solve_shifted(op.weights(), shift, &b).unwrap();
        // Residual check: (shift W + Q) x = b.
        for i in 0..35 {
            let mut lhs = (bands.diag[i] + shift * op.weights()[i]) * x[i];
            if i > 0 {
                lhs += bands.off[i - 1] * x[i - 1];
            }
            if i + 1 < 35 {
                lhs += bands.off[i] * x[i + 1];
            }
            assert_relative_eq!(lhs, b[i], max_relative = 1e-10, epsilon = 1e-12);
        }
    }

    #[test]
    fn power_norm_matches_extreme_eigenvalue() {
        let model = wedge(45);
        let op = assemble_epsilon_squared(&model).unwrap();
        let spec = spectral_decompose(&op).unwrap();
        let top = spec.eigvals()[44];
        let est = operator_norm(op.matrix(), op.weights(), 42);
        assert_relative_eq!(est, top, max_relative = 1e-6);
    }

    #[test]
    fn from_dense_rejects_asymmetric_matrices() {
        let mut m = DMatrix::identity(3, 3);
        m[(0, 1)] = 1.0;
        let w = DVector::from_element(3, 1.0);
        assert!(SymmetricOperator::from_dense(m, w).is_err());
    }

    #[test]
    fn min_eigenvalue_sees_negative_directions() {
        let mut m = DMatrix::identity(3, 3);
        m[(2, 2)] = -0.5;
        let w = DVector::from_element(3, 1.0);
        let lo = min_eigenvalue(&m, &w).unwrap();
        assert_relative_eq!(lo, -0.5);
    }

    #[test]
    fn semidefinite_certificate_separates_signs() {
        let w = DVector::from_element(3, 2.0);
        let mut m = DMatrix::identity(3, 3);
        assert!(certify_semidefinite(&m, &w, 1e-12));
        m[(2, 2)] = -1e-6;
        assert!(!certify_semidefinite(&m, &w, 1e-8));
        assert!(certify_semidefinite(&m, &w, 1e-5));
        // Singular but not negative: passes with any positive slack.
        m[(2, 2)] = 0.0;
        assert!(certify_semidefinite(&m, &w, 1e-14));
    }

    #[test]
    fn wedge_spectrum_refines_monotonically_in_probe_window() {
        // Not a Cauchy test (the wedge operator has essential spectrum at 0
        // in the continuum); just pins that refinement lowers the bottom.
        let coarse = spectral_decompose(&assemble_epsilon_squared(&wedge(100)).unwrap()).unwrap();
        let fine = spectral_decompose(&assemble_epsilon_squared(&wedge(200)).unwrap()).unwrap();
        assert!(fine.eigvals()[0] <= coarse.eigvals()[0] * 1.0001);
    }

    #[test]
    fn nondegenerate_fixture_eigenvalues_are_cauchy_under_refinement() {
        // The unit-lapse fixture has a proper continuum limit
        // lambda_k = m + ((k + 1/2) pi / L)^2, so refinement converges. The
        // mirror plane sits at s = h/2 (half a cell away from the edge), so
        // the rate is first order in 1/n.
        let lam = |n: usize| {
            let model = flat_model(n, 2.0, 0.7);
            let spec = spectral_decompose(&assemble_epsilon_squared(&model).unwrap()).unwrap();
            (spec.eigvals()[0], spec.eigvals()[3])
        };
        let (a0, a3) = lam(50);
        let (b0, b3) = lam(100);
        let (c0, c3) = lam(200);
        let exact0 = 0.7 + (0.5 * std::f64::consts::PI / 2.0).powi(2);
        let exact3 = 0.7 + (3.5 * std::f64::consts::PI / 2.0).powi(2);
        assert!((c0 - exact0).abs() < (a0 - exact0).abs() / 3.0);
        assert!((c3 - exact3).abs() < (a3 - exact3).abs() / 3.0);
        // Richardson order from the three levels is close to 1.
        let p0 = ((a0 - b0) / (b0 - c0)).abs().log2();
        assert!((p0 - 1.0).abs() < 0.3, "order {p0}");
        let p3 = ((a3 - b3) / (b3 - c3)).abs().log2();
        assert!((p3 - 1.0).abs() < 0.3, "order {p3}");
    }
}
