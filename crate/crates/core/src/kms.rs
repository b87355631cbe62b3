//! Two-sided thermal state covariances on the doubled surface.
//!
//! Cauchy data lives in two slots (field value, then weighted normal
//! derivative) over the doubled surface (copy_0, then copy_half), giving
//! 4N-vectors ordered [slot0 copy0, slot0 copy_half, slot1 copy0,
//! slot1 copy_half]. The charge form q swaps the two slots. The thermal
//! covariances at inverse temperature beta are
//!
//!   c+ = [[ I/2, A ], [ B, I/2 ]],        c- = 1 - c+,
//!   lambda+ = q c+ = [[ B, I/2 ], [ I/2, A ]],   lambda- = lambda+ - q,
//!
//! where, with T the copy swap and V the lapse,
//!
//!   A = (1/2) V^{1/2} (coth(beta e/2) + csch(beta e/2) T) e^{-1} V^{1/2},
//!   B = (1/2) V^{-1/2} (coth(beta e/2) - csch(beta e/2) T) e V^{-1/2}.
//!
//! The scalar identity coth^2 - csch^2 = 1 makes A B = B A = I/4, which is
//! exactly the purity of the state: (c+)^2 = c+.

use nalgebra::{DMatrix, DVector};

use crate::error::{HcError, Result};
use crate::kernels;
use crate::operators::{certify_semidefinite, SpectralData};

/// The slot-swap charge form on 4N-vectors: q = [[0, I], [I, 0]] over the
/// two Cauchy-data slots, identity on the doubled surface inside each slot.
pub fn charge_matrix(doubled_dim: usize) -> DMatrix<f64> {
    let mut q = DMatrix::zeros(2 * doubled_dim, 2 * doubled_dim);
    for i in 0..doubled_dim {
        q[(i, doubled_dim + i)] = 1.0;
        q[(doubled_dim + i, i)] = 1.0;
    }
    q
}

/// Thermal covariance pair, stored through its copy-space building blocks.
///
/// All four N x N blocks are functions of the one-copy energy; the doubled
/// and slot-doubled matrices are assembled on demand.
#[derive(Debug, Clone)]
pub struct CovariancePair {
    n: usize,
    beta: f64,
    /// Same-copy block of A: (1/2) v^{1/2} coth(beta mu/2)/mu v^{1/2}.
    p_same: DMatrix<f64>,
    /// Cross-copy block of A: (1/2) v^{1/2} csch(beta mu/2)/mu v^{1/2}.
    p_cross: DMatrix<f64>,
    /// Same-copy block of B: (1/2) v^{-1/2} mu coth(beta mu/2) v^{-1/2}.
    e_same: DMatrix<f64>,
    /// Cross-copy block of B, sign included: -(1/2) v^{-1/2} mu csch v^{-1/2}.
    e_cross: DMatrix<f64>,
    /// Doubled quadrature weights (2N), mirrored from the grid.
    weights2: DVector<f64>,
}

fn block2(same: &DMatrix<f64>, cross: &DMatrix<f64>) -> DMatrix<f64> {
    let n = same.nrows();
    let mut out = DMatrix::zeros(2 * n, 2 * n);
    out.view_mut((0, 0), (n, n)).copy_from(same);
    out.view_mut((n, n), (n, n)).copy_from(same);
    out.view_mut((0, n), (n, n)).copy_from(cross);
    out.view_mut((n, 0), (n, n)).copy_from(cross);
    out
}

impl CovariancePair {
    /// Spatial nodes per copy.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// The inv-energy block A on the doubled surface (2N x 2N).
    pub fn block_a(&self) -> DMatrix<f64> {
        block2(&self.p_same, &self.p_cross)
    }

    /// The energy block B on the doubled surface (2N x 2N).
    pub fn block_b(&self) -> DMatrix<f64> {
        block2(&self.e_same, &self.e_cross)
    }

    /// Quadrature weights for 4N covariance vectors (doubled weights, one
    /// copy per slot).
    pub fn weights4(&self) -> DVector<f64> {
        let d = 2 * self.n;
        let mut w = DVector::zeros(2 * d);
        for i in 0..d {
            w[i] = self.weights2[i];
            w[d + i] = self.weights2[i];
        }
        w
    }

    fn assemble(&self, d00: &DMatrix<f64>, d01: &DMatrix<f64>, d10: &DMatrix<f64>, d11: &DMatrix<f64>) -> DMatrix<f64> {
        let d = 2 * self.n;
        let mut out = DMatrix::zeros(2 * d, 2 * d);
        out.view_mut((0, 0), (d, d)).copy_from(d00);
        out.view_mut((0, d), (d, d)).copy_from(d01);
        out.view_mut((d, 0), (d, d)).copy_from(d10);
        out.view_mut((d, d), (d, d)).copy_from(d11);
        out
    }

    pub fn c_plus(&self) -> DMatrix<f64> {
        let d = 2 * self.n;
        let half = DMatrix::from_diagonal_element(d, d, 0.5);
        self.assemble(&half, &self.block_a(), &self.block_b(), &half)
    }

    pub fn c_minus(&self) -> DMatrix<f64> {
        let d = 2 * self.n;
        let half = DMatrix::from_diagonal_element(d, d, 0.5);
        let ma = -self.block_a();
        let mb = -self.block_b();
        self.assemble(&half, &ma, &mb, &half)
    }

    pub fn lambda_plus(&self) -> DMatrix<f64> {
        let d = 2 * self.n;
        let half = DMatrix::from_diagonal_element(d, d, 0.5);
        self.assemble(&self.block_b(), &half, &half, &self.block_a())
    }

    pub fn lambda_minus(&self) -> DMatrix<f64> {
        let d = 2 * self.n;
        let mhalf = DMatrix::from_diagonal_element(d, d, -0.5);
        self.assemble(&self.block_b(), &mhalf, &mhalf, &self.block_a())
    }

    /// Frobenius norm of (c+)^2 - c+ computed blockwise: the residual is
    /// block diagonal with blocks AB - I/4 and BA - I/4 (the off-diagonal
    /// slots cancel identically).
    pub fn purity_residual(&self) -> f64 {
        let a = self.block_a();
        let b = self.block_b();
        let d = 2 * self.n;
        let mut ab = &a * &b;
        let mut ba = &b * &a;
        for i in 0..d {
            ab[(i, i)] -= 0.25;
            ba[(i, i)] -= 0.25;
        }
        (ab.norm_squared() + ba.norm_squared()).sqrt()
    }

    /// Frobenius norm of c+ (the scale for the purity tolerance).
    pub fn c_plus_scale(&self) -> f64 {
        let d = 2 * self.n;
        let half_norm_sq = 0.25 * d as f64;
        (2.0 * half_norm_sq + self.block_a().norm_squared() + self.block_b().norm_squared())
            .sqrt()
    }
}

fn conjugated_frequency_block(
    spec: &SpectralData,
    lapse: &[f64],
    f: impl Fn(f64) -> f64,
    lapse_power: f64,
) -> Result<DMatrix<f64>> {
    let n = spec.n();
    let mut m = spec.frequency_matrix_function(f)?;
    for i in 0..n {
        let li = lapse[i].powf(lapse_power);
        for j in 0..n {
            m[(i, j)] *= li * lapse[j].powf(lapse_power);
        }
    }
    Ok(m)
}

/// Build the thermal covariance pair from the one-copy energy spectrum, the
/// nodal lapse, and the inverse temperature. `weights` are the grid
/// quadrature weights (one copy).
pub fn kms_covariances(
    spec: &SpectralData,
    lapse: &[f64],
    weights: &[f64],
    beta: f64,
) -> Result<CovariancePair> {
    let n = spec.n();
    if lapse.len() != n || weights.len() != n {
        return Err(HcError::DimensionMismatch(
            "lapse and weights must match the spectral data".into(),
        ));
    }
    if !(beta > 0.0) {
        return Err(HcError::InvalidModel(format!(
            "inverse temperature must be positive, got {beta}"
        )));
    }
    let half_beta = 0.5 * beta;

    let p_same =
        conjugated_frequency_block(spec, lapse, |mu| 0.5 * kernels::coth(half_beta * mu) / mu, 0.5)?;
    let p_cross =
        conjugated_frequency_block(spec, lapse, |mu| 0.5 * kernels::csch(half_beta * mu) / mu, 0.5)?;
    let e_same =
        conjugated_frequency_block(spec, lapse, |mu| 0.5 * kernels::coth(half_beta * mu) * mu, -0.5)?;
    let e_cross = conjugated_frequency_block(
        spec,
        lapse,
        |mu| -0.5 * kernels::csch(half_beta * mu) * mu,
        -0.5,
    )?;

    let mut weights2 = DVector::zeros(2 * n);
    for i in 0..n {
        weights2[i] = weights[i];
        weights2[n + i] = weights[i];
    }

    Ok(CovariancePair {
        n,
        beta,
        p_same,
        p_cross,
        e_same,
        e_cross,
        weights2,
    })
}

/// Projections recovered from the covariances through the charge form:
/// c+ = q lambda+ and c- = -q lambda-. Returned as dense matrices so the
/// caller can compare them against the directly assembled projections.
pub fn covariance_projections(pair: &CovariancePair) -> (DMatrix<f64>, DMatrix<f64>) {
    let q = charge_matrix(2 * pair.n());
    let cp = &q * pair.lambda_plus();
    let cm = -(&q * pair.lambda_minus());
    (cp, cm)
}

/// Validation summary of the state conditions at one temperature.
#[derive(Debug, Clone, Copy)]
pub struct StateValidation {
    /// ||(c+)^2 - c+||_F.
    pub purity_residual: f64,
    /// ||c+||_F, the scale for the purity tolerance.
    pub purity_scale: f64,
    /// Largest absolute entry of (lambda+ - lambda-) - q; exactly zero.
    pub charge_gap: f64,
    /// Largest absolute entry of (c+ + c-) - 1; exactly zero.
    pub complement_gap: f64,
    /// Weighted-symmetry residual of lambda+ (max |Q - Q^T| / max |Q|).
    pub lambda_symmetry: f64,
    /// Frobenius norm of lambda+ (shared by lambda- via similarity).
    pub lambda_scale: f64,
    /// True when lambda+ + slack >= 0 was certified by Cholesky.
    pub lambda_plus_floor_ok: bool,
    /// Same certificate for lambda-.
    pub lambda_minus_floor_ok: bool,
    /// Slack used in the certificates (absolute).
    pub floor_slack: f64,
}

/// Check purity, positivity, charge difference, and self-adjointness of the
/// covariance pair. `floor_rel` scales the positivity slack by the
/// Frobenius norm of lambda+.
pub fn validate_state(pair: &CovariancePair, floor_rel: f64) -> StateValidation {
    let purity_residual = pair.purity_residual();
    let purity_scale = pair.c_plus_scale();

    let lp = pair.lambda_plus();
    let lm = pair.lambda_minus();
    let q = charge_matrix(2 * pair.n());
    let mut charge_gap = 0.0f64;
    let mut complement_gap = 0.0f64;
    let cp = pair.c_plus();
    let cm = pair.c_minus();
    let dim = lp.nrows();
    for i in 0..dim {
        for j in 0..dim {
            charge_gap = charge_gap.max(((lp[(i, j)] - lm[(i, j)]) - q[(i, j)]).abs());
            let ident = if i == j { 1.0 } else { 0.0 };
            complement_gap = complement_gap.max((cp[(i, j)] + cm[(i, j)] - ident).abs());
        }
    }

    let w4 = pair.weights4();
    let mut max_q: f64 = f64::MIN_POSITIVE;
    let mut max_asym: f64 = 0.0;
    for i in 0..dim {
        for j in 0..dim {
            let qij = w4[i] * lp[(i, j)];
            let qji = w4[j] * lp[(j, i)];
            max_q = max_q.max(qij.abs());
            max_asym = max_asym.max((qij - qji).abs());
        }
    }

    let lambda_scale = lp.norm();
    let slack = floor_rel * lambda_scale;
    let plus_ok = certify_semidefinite(&lp, &w4, slack);
    let minus_ok = certify_semidefinite(&lm, &w4, slack);

    StateValidation {
        purity_residual,
        purity_scale,
        charge_gap,
        complement_gap,
        lambda_symmetry: max_asym / max_q,
        lambda_scale,
        lambda_plus_floor_ok: plus_ok,
        lambda_minus_floor_ok: minus_ok,
        floor_slack: slack,
    }
}

/// Spectrum of lambda+ through the block reduction: with B = (1/4) A^{-1},
/// each W-eigenpair (alpha, u) of A contributes the 2x2 matrix
/// [[1/(4 alpha), 1/2], [1/2, alpha]] with eigenvalues 0 and
/// alpha + 1/(4 alpha). Returns the sorted nonzero branch.
pub fn lambda_plus_nonzero_spectrum(pair: &CovariancePair) -> Result<Vec<f64>> {
    use crate::operators::{spectral_decompose, SymmetricOperator};
    let a = pair.block_a();
    let w2 = pair.weights2.clone();
    let op = SymmetricOperator::from_dense(a, w2)?;
    let spec = spectral_decompose(&op)?;
    let mut out: Vec<f64> = spec
        .eigvals()
        .iter()
        .map(|&alpha| alpha + 0.25 / alpha)
        .collect();
    out.sort_by(|x, y| x.partial_cmp(y).unwrap());
    Ok(out)
}

// ---- two-sided-surface construction and the identification map ----

/// Covariance blocks built directly in the two-sided surface ordering
/// (ascending coordinate, no bifurcation node).
#[derive(Debug, Clone)]
pub struct SurfaceCovariance {
    /// Inv-energy block (2N x 2N) in surface ordering.
    pub a: DMatrix<f64>,
    /// Energy block (2N x 2N) in surface ordering.
    pub b: DMatrix<f64>,
}

/// Embed a one-copy matrix function f(e) as f(e_surface): the two-sided
/// energy acts as e on the positive half and as its mirror image J e J on
/// the negative half.
fn surface_from_copy(f: &DMatrix<f64>) -> DMatrix<f64> {
    let n = f.nrows();
    let mut out = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            out[(n + i, n + j)] = f[(i, j)];
            out[(n - 1 - i, n - 1 - j)] = f[(i, j)];
        }
    }
    out
}

/// The full-line reflection (T f)(x) = f(-x) as a matrix in surface ordering.
pub fn surface_reflection(doubled_dim: usize) -> DMatrix<f64> {
    let mut t = DMatrix::zeros(doubled_dim, doubled_dim);
    for i in 0..doubled_dim {
        t[(i, doubled_dim - 1 - i)] = 1.0;
    }
    t
}

/// Build the covariance blocks on the two-sided surface without ever
/// referring to the two boundary copies: energy, reflection, and lapse all
/// act in the ascending-coordinate ordering.
pub fn kms_covariances_surface(
    spec: &SpectralData,
    lapse: &[f64],
    beta: f64,
) -> Result<SurfaceCovariance> {
    let n = spec.n();
    if lapse.len() != n {
        return Err(HcError::DimensionMismatch(
            "lapse must match the spectral data".into(),
        ));
    }
    let half_beta = 0.5 * beta;
    let coth_inv = spec.frequency_matrix_function(|mu| kernels::coth(half_beta * mu) / mu)?;
    let csch_inv = spec.frequency_matrix_function(|mu| kernels::csch(half_beta * mu) / mu)?;
    let coth_en = spec.frequency_matrix_function(|mu| kernels::coth(half_beta * mu) * mu)?;
    let csch_en = spec.frequency_matrix_function(|mu| kernels::csch(half_beta * mu) * mu)?;

    let d = 2 * n;
    let t = surface_reflection(d);
    let vsqrt = {
        let mut v = DVector::zeros(d);
        for i in 0..n {
            v[n + i] = lapse[i].sqrt();
            v[n - 1 - i] = lapse[i].sqrt();
        }
        v
    };

    let conj = |core: DMatrix<f64>, power_sign: f64| -> DMatrix<f64> {
        let mut m = core;
        for i in 0..d {
            let vi = vsqrt[i].powf(power_sign);
            for j in 0..d {
                m[(i, j)] *= vi * vsqrt[j].powf(power_sign);
            }
        }
        m
    };

    let a_core = surface_from_copy(&coth_inv) + &t * surface_from_copy(&csch_inv);
    let b_core = surface_from_copy(&coth_en) - &t * surface_from_copy(&csch_en);
    Ok(SurfaceCovariance {
        a: conj(a_core, 1.0) * 0.5,
        b: conj(b_core, -1.0) * 0.5,
    })
}

/// Conjugate a two-sided-surface matrix into the doubled-copy ordering by
/// the identification permutation (copy_0 to the positive side, copy_half
/// reflected to the negative side).
pub fn conjugate_by_rhat(surface_matrix: &DMatrix<f64>) -> DMatrix<f64> {
    let d = surface_matrix.nrows();
    let n = d / 2;
    assert_eq!(2 * n, d, "surface matrices have even dimension");
    let sigma = |b: usize| -> usize {
        if b < n {
            n + b // copy_0 index i sits at surface node +s_{i+1}
        } else {
            n - 1 - (b - n) // copy_half index i sits at surface node -s_{i+1}
        }
    };
    DMatrix::from_fn(d, d, |i, j| surface_matrix[(sigma(i), sigma(j))])
}
