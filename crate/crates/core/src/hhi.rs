//! Global pure state on the two-sided extension of the wedge surface.
//!
//! At the matching temperature the Euclidean cylinder over the wedge has
//! cone angle exactly 2 pi, so it is a flat half-plane and the spatial
//! slice extends across the bifurcation point to a full line. The global
//! state is then the ground state of the flat line energy: its covariance
//! is read off the half-space boundary projector, lambda+ = q D_ext. This
//! module builds that state and verifies the claims that make it the
//! Hartle-Hawking-Israel state of the discretized model:
//!
//!   * restriction: pairings against the doubled-wedge thermal covariance
//!     agree with pairings against D_ext once test data is pushed through
//!     the identification (positive side = tau = 0 copy, negative side =
//!     reflected tau = beta/2 copy);
//!   * purity and positivity, the latter both by direct certificate and
//!     through a reflection-positive factorization of the quadratic form;
//!   * uniqueness probe: two independent constructions of lambda+ agree on
//!     a batch of test pairings;
//!   * smoothness proxies: the (normal <- value) block has the symbol of
//!     half the line frequency, and the defect against the wedge block is
//!     a flat small kernel rather than a diagonal-concentrated one.
//!
//! Everything here is restricted to the exactly flat instance; interfaces
//! accept the model types so a curved extension can slot in later.

use std::ops::Range;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::calderon::{halfspace_calderon, HalfspaceProjector, Provenance, TraceData};
use crate::error::{HcError, Result};
use crate::geometry::{HorizonModel, CONE_ANGLE_TOL};
use crate::kms::{charge_matrix, CovariancePair};
use crate::operators::{
    certify_semidefinite, spectral_decompose, FormBands, SpectralData, SymmetricOperator,
};

/// Default probe support window, as fractions of the half-line length.
/// Theorem-grade pairings need test data supported away from both the
/// bifurcation point and the outer Dirichlet edge.
pub const SUPPORT_WINDOW: (f64, f64) = (0.3, 0.7);

// ---- the extended surface ----

/// Symmetric full-line discretization of the two-sided surface.
///
/// Nodes sit at k h for k = -N..N (origin included), the Dirichlet ghosts
/// at +-L = +-(N+1) h; every quadrature weight is h. The positive half
/// matches the wedge grid node for node.
#[derive(Debug, Clone)]
pub struct ExtendedModel {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    spacing: f64,
    length: f64,
    half_nodes: usize,
    mass_sq: f64,
    kappa: f64,
    flat_plane: bool,
}

impl ExtendedModel {
    /// Mirror a wedge model across the bifurcation point. Requires the
    /// uniform grid and constant potential of the flat construction; the
    /// flat-plane flag is inherited, not enforced (the covariance builder
    /// enforces it together with the temperature).
    pub fn from_horizon(model: &HorizonModel) -> Result<Self> {
        let h = model.grid.uniform_spacing().ok_or_else(|| {
            HcError::GridMismatch("extension requires a uniform half-line grid".into())
        })?;
        let mass_sq = model.potential[0];
        if model
            .potential
            .iter()
            .any(|&m| (m - mass_sq).abs() > 1e-14 * mass_sq.abs())
        {
            return Err(HcError::InvalidModel(
                "extension requires a constant potential".into(),
            ));
        }
        let n = model.n() as isize;
        let nodes: Vec<f64> = (-n..=n).map(|k| k as f64 * h).collect();
        let weights = vec![h; nodes.len()];
        Ok(Self {
            nodes,
            weights,
            spacing: h,
            length: model.grid.length(),
            half_nodes: model.n(),
            mass_sq,
            kappa: model.kappa,
            flat_plane: model.is_flat_plane(),
        })
    }

    /// Total node count 2N + 1.
    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    /// Nodes per side, excluding the origin.
    pub fn half_nodes(&self) -> usize {
        self.half_nodes
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Constant potential value (squared mass scale of the line energy).
    pub fn mass_sq(&self) -> f64 {
        self.mass_sq
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn is_flat_plane(&self) -> bool {
        self.flat_plane
    }

    /// Index of the bifurcation node s = 0.
    pub fn origin_index(&self) -> usize {
        self.half_nodes
    }

    /// Index of the node at +s_{i+1} (wedge node i pushed to the positive side).
    pub fn positive_index(&self, i: usize) -> usize {
        self.half_nodes + 1 + i
    }

    /// Index of the node at -s_{i+1} (wedge node i reflected).
    pub fn negative_index(&self, i: usize) -> usize {
        self.half_nodes - 1 - i
    }

    /// The flat line energy squared, -d^2/ds^2 + m, with Dirichlet ghosts
    /// at +-L. Same divergence-form assembly as the wedge operator, with
    /// unit lapse and metric weight.
    pub fn line_energy_squared(&self) -> Result<SymmetricOperator> {
        let n = self.n();
        let mut diag = vec![0.0; n];
        let mut off = vec![0.0; n - 1];
        for i in 0..n - 1 {
            let c = 1.0 / (self.nodes[i + 1] - self.nodes[i]);
            diag[i] += c;
            diag[i + 1] += c;
            off[i] -= c;
        }
        diag[0] += 1.0 / (self.nodes[0] + self.length);
        diag[n - 1] += 1.0 / (self.length - self.nodes[n - 1]);
        for (d, w) in diag.iter_mut().zip(&self.weights) {
            *d += self.mass_sq * w;
        }
        SymmetricOperator::from_form_bands(
            FormBands { diag, off },
            DVector::from_column_slice(&self.weights),
        )
    }
}

// ---- Cauchy data on the extended surface ----

/// Cauchy data of the line: field value and inward normal derivative.
#[derive(Debug, Clone, PartialEq)]
pub struct LineCauchy {
    pub value: DVector<f64>,
    pub normal: DVector<f64>,
}

impl LineCauchy {
    pub fn zeros(n: usize) -> Self {
        Self {
            value: DVector::zeros(n),
            normal: DVector::zeros(n),
        }
    }

    pub fn n(&self) -> usize {
        self.value.len()
    }

    /// Stack as [value, normal], the layout of the half-space projector.
    pub fn stacked(&self) -> DVector<f64> {
        let n = self.n();
        let mut out = DVector::zeros(2 * n);
        out.rows_mut(0, n).copy_from(&self.value);
        out.rows_mut(n, n).copy_from(&self.normal);
        out
    }
}

/// Push doubled wedge Cauchy data through the identification: the tau = 0
/// copy lands on the positive side, the tau = beta/2 copy on the reflected
/// negative side, and the origin stays zero (probe supports exclude it).
/// The normal slot maps with no sign: each copy's slot is the inward
/// Euclidean-time derivative off its own boundary, and the identification
/// aligns both with the single upward direction off the line.
pub fn push_to_extended(ext: &ExtendedModel, data: &TraceData) -> Result<LineCauchy> {
    if data.n() != ext.half_nodes() {
        return Err(HcError::DimensionMismatch(
            "doubled data must match the extension's half grid".into(),
        ));
    }
    let mut out = LineCauchy::zeros(ext.n());
    for i in 0..data.n() {
        let p = ext.positive_index(i);
        let m = ext.negative_index(i);
        out.value[p] = data.value_0[i];
        out.value[m] = data.value_half[i];
        out.normal[p] = data.normal_0[i];
        out.normal[m] = data.normal_half[i];
    }
    Ok(out)
}

/// Verify that doubled data vanishes outside s in [lo L, hi L] on every
/// slot and copy.
pub fn check_support(model: &HorizonModel, data: &TraceData, support: (f64, f64)) -> Result<()> {
    let (lo, hi) = support;
    let lo_s = lo * model.grid.length();
    let hi_s = hi * model.grid.length();
    for (i, &s) in model.grid.nodes().iter().enumerate() {
        if s >= lo_s && s <= hi_s {
            continue;
        }
        let vals = [
            data.value_0[i],
            data.value_half[i],
            data.normal_0[i],
            data.normal_half[i],
        ];
        if vals.iter().any(|&x| x != 0.0) {
            return Err(HcError::SupportViolation(format!(
                "probe data is nonzero at s = {s:.6}, outside [{lo_s:.6}, {hi_s:.6}]"
            )));
        }
    }
    Ok(())
}

// ---- the global covariances ----

/// Covariances of the global pure state, carried through the half-space
/// boundary projector of the extended line.
#[derive(Debug, Clone)]
pub struct HhiCovariances {
    ext: ExtendedModel,
    line_spec: SpectralData,
    d_ext: HalfspaceProjector,
    beta: f64,
}

/// Build the global covariances. The construction exists only when the
/// cylinder closes smoothly: the lapse must be exactly linear (flat-plane
/// flag) and the cone angle kappa beta must equal 2 pi to within
/// `CONE_ANGLE_TOL`; otherwise the extension would carry a conic
/// singularity at the bifurcation point and the error says so.
pub fn build_hhi_covariances(ext: &ExtendedModel, beta: f64) -> Result<HhiCovariances> {
    if !(beta > 0.0) {
        return Err(HcError::InvalidModel(format!(
            "inverse temperature must be positive, got {beta}"
        )));
    }
    let angle = ext.kappa() * beta;
    let defect = (angle - 2.0 * std::f64::consts::PI).abs();
    if defect > CONE_ANGLE_TOL {
        return Err(HcError::ConicSingularity { angle, defect });
    }
    if !ext.is_flat_plane() {
        return Err(HcError::InvalidModel(
            "global state needs the exactly flat instance (linear lapse, unit metric)".into(),
        ));
    }
    let op = ext.line_energy_squared()?;
    let line_spec = spectral_decompose(&op)?;
    let d_ext = halfspace_calderon(&line_spec)?;
    Ok(HhiCovariances {
        ext: ext.clone(),
        line_spec,
        d_ext,
        beta,
    })
}

impl HhiCovariances {
    pub fn extended(&self) -> &ExtendedModel {
        &self.ext
    }

    /// Spectral data of the line energy squared.
    pub fn spectral(&self) -> &SpectralData {
        &self.line_spec
    }

    /// The boundary projector the state is built from.
    pub fn d_ext(&self) -> &HalfspaceProjector {
        &self.d_ext
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn provenance(&self) -> Provenance {
        Provenance::HalfspaceOracle
    }

    /// Quadrature weights for stacked [value, normal] vectors.
    pub fn weights2(&self) -> DVector<f64> {
        let n = self.ext.n();
        DVector::from_fn(2 * n, |i, _| self.ext.weights()[i % n])
    }

    /// lambda+ = q D_ext = [[omega/2, 1/2], [1/2, omega^{-1}/2]]: the charge
    /// form swaps the slots, so the diagonal picks up the frequency blocks.
    pub fn lambda_plus(&self) -> DMatrix<f64> {
        let n = self.ext.n();
        let mut out = DMatrix::zeros(2 * n, 2 * n);
        out.view_mut((0, 0), (n, n)).copy_from(self.d_ext.omega_half());
        out.view_mut((n, n), (n, n))
            .copy_from(self.d_ext.omega_inv_half());
        for i in 0..n {
            out[(i, n + i)] = 0.5;
            out[(n + i, i)] = 0.5;
        }
        out
    }

    /// lambda- = lambda+ - q: same frequency blocks, negated halves.
    pub fn lambda_minus(&self) -> DMatrix<f64> {
        let n = self.ext.n();
        let mut out = self.lambda_plus();
        for i in 0..n {
            out[(i, n + i)] = -0.5;
            out[(n + i, i)] = -0.5;
        }
        out
    }

    pub fn charge(&self) -> DMatrix<f64> {
        charge_matrix(self.ext.n())
    }

    /// (||D^2 - D||_F, ||D||_F), computed blockwise: the half/half products
    /// cancel exactly, leaving only the omega inverse-pair defects.
    pub fn purity_residual(&self) -> (f64, f64) {
        let n = self.ext.n();
        let oh = self.d_ext.omega_half();
        let oih = self.d_ext.omega_inv_half();
        let mut p = oih * oh;
        let mut q = oh * oih;
        for i in 0..n {
            p[(i, i)] -= 0.25;
            q[(i, i)] -= 0.25;
        }
        let res = (p.norm_squared() + q.norm_squared()).sqrt();
        let scale = (0.5 * n as f64 + oh.norm_squared() + oih.norm_squared()).sqrt();
        (res, scale)
    }

    /// Quadratic form (g | lambda+ g)_W evaluated two ways: directly, and
    /// through the reflection-positive factorization
    ///
    ///   (g | lambda+ g) = <u, (2 omega)^{-1} u>,   u = g_normal + omega g_value,
    ///
    /// whose right side is a sum of per-mode terms c_k^2 / (2 omega_k) and
    /// therefore nonnegative term by term. Returns (direct, factored).
    pub fn reflection_positive_form(&self, g: &LineCauchy) -> Result<(f64, f64)> {
        let n = self.ext.n();
        if g.n() != n {
            return Err(HcError::DimensionMismatch(
                "field must live on the extended grid".into(),
            ));
        }
        let w = self.ext.weights();
        let lp_val = self.d_ext.omega_half() * &g.value + 0.5 * &g.normal;
        let lp_nor = 0.5 * &g.value + self.d_ext.omega_inv_half() * &g.normal;
        let mut direct = 0.0;
        for i in 0..n {
            direct += w[i] * (g.value[i] * lp_val[i] + g.normal[i] * lp_nor[i]);
        }

        let omega_g0 = self
            .line_spec
            .apply_frequency_function(|mu| mu, &g.value)?;
        let u = &g.normal + omega_g0;
        let c = self.line_spec.analyze(&u);
        let mu = self.line_spec.frequencies()?;
        let factored = (0..n).map(|k| c[k] * c[k] / (2.0 * mu[k])).sum();
        Ok((direct, factored))
    }
}

/// Validation summary of the global state.
#[derive(Debug, Clone, Copy)]
pub struct HhiValidation {
    /// ||D^2 - D||_F.
    pub purity_residual: f64,
    /// ||D||_F.
    pub purity_scale: f64,
    /// Largest absolute entry of (lambda+ - lambda-) - q; exactly zero.
    pub charge_gap: f64,
    /// Cholesky certificate lambda+ + slack >= 0.
    pub lambda_plus_floor_ok: bool,
    /// Same for lambda-.
    pub lambda_minus_floor_ok: bool,
    /// Absolute slack used in the certificates.
    pub floor_slack: f64,
    /// Worst relative gap between the direct quadratic form and its
    /// reflection-positive factorization over the probe batch.
    pub rp_worst_gap: f64,
    /// Smallest factored value seen; nonnegative by construction.
    pub rp_min_factored: f64,
}

/// Check purity, positivity, the charge difference, and the agreement of
/// the two positivity routes on `rp_probes` random smooth fields.
pub fn validate_hhi(
    hhi: &HhiCovariances,
    floor_rel: f64,
    rp_probes: usize,
    seed: u64,
) -> Result<HhiValidation> {
    let (purity_residual, purity_scale) = hhi.purity_residual();

    let lp = hhi.lambda_plus();
    let lm = hhi.lambda_minus();
    let q = hhi.charge();
    let mut charge_gap = 0.0f64;
    for i in 0..lp.nrows() {
        for j in 0..lp.ncols() {
            charge_gap = charge_gap.max(((lp[(i, j)] - lm[(i, j)]) - q[(i, j)]).abs());
        }
    }

    let w2 = hhi.weights2();
    let slack = floor_rel * lp.norm();
    let plus_ok = certify_semidefinite(&lp, &w2, slack);
    let minus_ok = certify_semidefinite(&lm, &w2, slack);

    let n = hhi.extended().n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rp_worst_gap = 0.0f64;
    let mut rp_min_factored = f64::INFINITY;
    for _ in 0..rp_probes {
        let g = LineCauchy {
            value: DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0)),
            normal: DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0)),
        };
        let (direct, factored) = hhi.reflection_positive_form(&g)?;
        let scale = direct.abs().max(factored.abs()).max(f64::MIN_POSITIVE);
        rp_worst_gap = rp_worst_gap.max((direct - factored).abs() / scale);
        rp_min_factored = rp_min_factored.min(factored);
    }

    Ok(HhiValidation {
        purity_residual,
        purity_scale,
        charge_gap,
        lambda_plus_floor_ok: plus_ok,
        lambda_minus_floor_ok: minus_ok,
        floor_slack: slack,
        rp_worst_gap,
        rp_min_factored,
    })
}

// ---- restriction of the global state to the doubled wedge ----

/// One pairing computed on both sides of the restriction identity.
#[derive(Debug, Clone, Copy)]
pub struct AgreementReport {
    /// (g | c+ f) on the doubled wedge.
    pub half_line: f64,
    /// (g_ext | D_ext f_ext) on the extended line.
    pub extended: f64,
}

impl AgreementReport {
    pub fn gap(&self) -> f64 {
        (self.half_line - self.extended).abs()
    }

    /// Gap relative to the larger pairing magnitude.
    pub fn relative_gap(&self) -> f64 {
        let scale = self
            .half_line
            .abs()
            .max(self.extended.abs())
            .max(f64::MIN_POSITIVE);
        self.gap() / scale
    }
}

fn check_restriction_geometry(hhi: &HhiCovariances, model: &HorizonModel) -> Result<()> {
    let ext = hhi.extended();
    if model.n() != ext.half_nodes() {
        return Err(HcError::GridMismatch(
            "wedge model and extension have different node counts".into(),
        ));
    }
    let h = model.grid.uniform_spacing().ok_or_else(|| {
        HcError::GridMismatch("restriction needs the uniform wedge grid".into())
    })?;
    if (h - ext.spacing()).abs() > 1e-14 * h {
        return Err(HcError::GridMismatch(
            "wedge and extension grid spacings differ".into(),
        ));
    }
    Ok(())
}

/// Evaluate both sides of the restriction identity for a batch of probe
/// pairs: left pairs against the doubled-wedge thermal covariance, right
/// against the half-space projector of the extension. The two agree in the
/// continuum; the reported gaps are pure discretization error.
///
/// The wedge covariance blocks are assembled once per call, so batching is
/// much cheaper than repeated single probes.
pub fn restriction_agreement_batch(
    hhi: &HhiCovariances,
    model: &HorizonModel,
    pair: &CovariancePair,
    probes: &[(TraceData, TraceData)],
    support: (f64, f64),
) -> Result<Vec<AgreementReport>> {
    check_restriction_geometry(hhi, model)?;
    if (pair.beta() - hhi.beta()).abs() > 1e-14 * hhi.beta() {
        return Err(HcError::InvalidModel(
            "wedge covariance temperature does not match the extension".into(),
        ));
    }
    let n = model.n();
    if pair.n() != n {
        return Err(HcError::DimensionMismatch(
            "wedge covariance does not match the model".into(),
        ));
    }

    let a = pair.block_a();
    let b = pair.block_b();
    let w = model.grid.weights();
    let ext = hhi.extended();
    let w_ext = ext.weights();
    let oh = hhi.d_ext().omega_half();
    let oih = hhi.d_ext().omega_inv_half();

    // Doubled per-slot layout [copy_0 nodes, copy_half nodes], the layout
    // the covariance blocks act on.
    let stack2 = |a0: &DVector<f64>, a1: &DVector<f64>| -> DVector<f64> {
        let mut v = DVector::zeros(2 * n);
        v.rows_mut(0, n).copy_from(a0);
        v.rows_mut(n, n).copy_from(a1);
        v
    };

    let mut out = Vec::with_capacity(probes.len());
    for (f, g) in probes {
        check_support(model, f, support)?;
        check_support(model, g, support)?;

        // Left: c+ [f_val; f_nor] = [f_val/2 + A f_nor; B f_val + f_nor/2].
        let f_val = stack2(&f.value_0, &f.value_half);
        let f_nor = stack2(&f.normal_0, &f.normal_half);
        let g_val = stack2(&g.value_0, &g.value_half);
        let g_nor = stack2(&g.normal_0, &g.normal_half);
        let cf_val = 0.5 * &f_val + &a * &f_nor;
        let cf_nor = &b * &f_val + 0.5 * &f_nor;
        let mut half_line = 0.0;
        for i in 0..2 * n {
            half_line += w[i % n] * (g_val[i] * cf_val[i] + g_nor[i] * cf_nor[i]);
        }

        // Right: push both probes through the identification and pair
        // against D_ext = [[1/2, omega^{-1}/2], [omega/2, 1/2]].
        let fe = push_to_extended(ext, f)?;
        let ge = push_to_extended(ext, g)?;
        let df_val = 0.5 * &fe.value + oih * &fe.normal;
        let df_nor = oh * &fe.value + 0.5 * &fe.normal;
        let mut extended = 0.0;
        for i in 0..ext.n() {
            extended += w_ext[i] * (ge.value[i] * df_val[i] + ge.normal[i] * df_nor[i]);
        }

        out.push(AgreementReport {
            half_line,
            extended,
        });
    }
    Ok(out)
}

/// Single-probe form of `restriction_agreement_batch`.
pub fn restriction_agreement(
    hhi: &HhiCovariances,
    model: &HorizonModel,
    pair: &CovariancePair,
    f: &TraceData,
    g: &TraceData,
    support: (f64, f64),
) -> Result<AgreementReport> {
    let mut v = restriction_agreement_batch(
        hhi,
        model,
        pair,
        std::slice::from_ref(&(f.clone(), g.clone())),
        support,
    )?;
    Ok(v.pop().expect("one probe in, one report out"))
}

// ---- probe construction ----

/// Smooth compactly supported bump: exp(1 - 1/(1 - x^2)) on |x| < 1, zero
/// outside, peak value 1 at x = 0.
pub fn smooth_bump(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - x * x)).exp()
    }
}

fn bump_on_nodes(nodes: &[f64], center: f64, half_width: f64, amp: f64) -> DVector<f64> {
    DVector::from_fn(nodes.len(), |i, _| {
        amp * smooth_bump((nodes[i] - center) / half_width)
    })
}

/// Deterministic batch of doubled probe pairs. Bump centers and widths are
/// drawn in physical units inside the support window, so a fixed seed
/// produces the same probes at every grid resolution; that makes
/// refinement studies compare like with like.
pub fn random_probe_pairs(
    model: &HorizonModel,
    count: usize,
    seed: u64,
    support: (f64, f64),
) -> Vec<(TraceData, TraceData)> {
    let (lo, hi) = support;
    let length = model.grid.length();
    let span = (hi - lo) * length;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| -> TraceData {
        let mut t = TraceData::zeros(model.n());
        for slot in 0..4 {
            let w = rng.gen_range(span / 6.0..span / 3.0);
            let c = rng.gen_range(lo * length + w..hi * length - w);
            let amp = rng.gen_range(0.25..1.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            let bump = bump_on_nodes(model.grid.nodes(), c, w, amp);
            match slot {
                0 => t.value_0 = bump,
                1 => t.value_half = bump,
                2 => t.normal_0 = bump,
                _ => t.normal_half = bump,
            }
        }
        t
    };
    (0..count).map(|_| (draw(&mut rng), draw(&mut rng))).collect()
}

// ---- uniqueness probe ----

/// Outcome of comparing the two lambda+ constructions on a probe batch.
#[derive(Debug, Clone, Copy)]
pub struct UniquenessReport {
    pub probes: usize,
    /// sup |left - right| over the batch.
    pub sup_gap: f64,
    /// sup of the larger pairing magnitude, the scale for the gap.
    pub scale: f64,
}

impl UniquenessReport {
    pub fn relative_sup_gap(&self) -> f64 {
        self.sup_gap / self.scale.max(f64::MIN_POSITIVE)
    }
}

/// Compare (g | lambda+ f) under the two available constructions of the
/// global covariance: q D_ext on the extension versus the pushforward of
/// the doubled-wedge thermal lambda+ = q c+. Since the charge form is the
/// slot swap and commutes with the identification, both pairings reduce to
/// the plain restriction pairings with the slots of g swapped; any
/// quasi-free state agreeing with the wedge state on both wedges must
/// produce the same numbers, so a small sup gap is the uniqueness
/// evidence a finite model can give.
///
/// Rejected before any assembly when beta is not the matching temperature.
pub fn uniqueness_probe(
    hhi: &HhiCovariances,
    model: &HorizonModel,
    pair: &CovariancePair,
    beta: f64,
    probes: usize,
    seed: u64,
    support: (f64, f64),
) -> Result<UniquenessReport> {
    let angle = model.kappa * beta;
    let defect = (angle - 2.0 * std::f64::consts::PI).abs();
    if defect > CONE_ANGLE_TOL {
        return Err(HcError::ConicSingularity { angle, defect });
    }
    let batch = random_probe_pairs(model, probes, seed, support);
    // (g | q M f) = (q g | M f): swap g's slots and reuse the restriction
    // pairings.
    let swapped: Vec<(TraceData, TraceData)> = batch
        .iter()
        .map(|(f, g)| {
            let gq = TraceData {
                value_0: g.normal_0.clone(),
                value_half: g.normal_half.clone(),
                normal_0: g.value_0.clone(),
                normal_half: g.value_half.clone(),
            };
            (f.clone(), gq)
        })
        .collect();
    let reports = restriction_agreement_batch(hhi, model, pair, &swapped, support)?;
    let mut sup_gap = 0.0f64;
    let mut scale = 0.0f64;
    for r in &reports {
        sup_gap = sup_gap.max(r.gap());
        scale = scale.max(r.half_line.abs().max(r.extended.abs()));
    }
    Ok(UniquenessReport {
        probes,
        sup_gap,
        scale,
    })
}

// ---- smoothness proxies ----

/// What the symbol/decay probe measures on a (normal <- value) block.
#[derive(Debug, Clone)]
pub struct DecayReport {
    /// (xi, measured ratio to the exact symbol 0.5 sqrt(xi^2 + m)).
    pub ratios: Vec<(f64, f64)>,
    /// max |ratio - 1| over the probed band.
    pub worst_ratio_gap: f64,
    /// Log-log decay rate of |K(center, .)| across separations inside the
    /// window (positive = decaying).
    pub near_exponent: f64,
    /// max |K(center, j)| at separations up to 8 grid cells.
    pub diag_max: f64,
    /// max |K(center, j)| at separations beyond a quarter of the window.
    pub tail_max: f64,
}

/// Which covariance block the probe reads.
pub enum SymbolTarget<'a> {
    /// (normal <- value) block of the global state: half the line frequency.
    Extended(&'a HhiCovariances),
    /// Same-copy (normal <- value) block of the doubled wedge state.
    HalfLine {
        pair: &'a CovariancePair,
        model: &'a HorizonModel,
    },
}

struct ProbeSlice {
    block: DMatrix<f64>,
    nodes: Vec<f64>,
    spacing: f64,
    mass_sq: f64,
}

fn probe_slice(target: &SymbolTarget) -> Result<ProbeSlice> {
    match target {
        SymbolTarget::Extended(hhi) => Ok(ProbeSlice {
            block: hhi.d_ext().omega_half().clone(),
            nodes: hhi.extended().nodes().to_vec(),
            spacing: hhi.extended().spacing(),
            mass_sq: hhi.extended().mass_sq(),
        }),
        SymbolTarget::HalfLine { pair, model } => {
            let n = model.n();
            if pair.n() != n {
                return Err(HcError::DimensionMismatch(
                    "covariance and model disagree".into(),
                ));
            }
            let b = pair.block_b();
            let h = model.grid.uniform_spacing().ok_or_else(|| {
                HcError::GridMismatch("symbol probe needs a uniform grid".into())
            })?;
            Ok(ProbeSlice {
                block: b.view((0, 0), (n, n)).into_owned(),
                nodes: model.grid.nodes().to_vec(),
                spacing: h,
                mass_sq: model.potential[0],
            })
        }
    }
}

/// Read the high-frequency symbol and the off-diagonal kernel decay of the
/// (normal <- value) block over a node window.
///
/// Symbol: windowed discrete waves cos/sin(xi s) are pushed through the
/// block and the response magnitude at the window center is compared to
/// the exact symbol 0.5 sqrt(xi^2 + m) of the flat half-space state; the
/// band is the top decade below a quarter of the grid Nyquist frequency.
/// Decay: entries along the center row, which concentrate at the diagonal
/// for a genuine frequency operator.
pub fn symbol_decay_probe(
    target: &SymbolTarget,
    window: Range<usize>,
    n_freqs: usize,
) -> Result<DecayReport> {
    let slice = probe_slice(target)?;
    let n = slice.nodes.len();
    if window.start >= window.end || window.end > n {
        return Err(HcError::InvalidModel(format!(
            "probe window {window:?} does not fit a grid of {n} nodes"
        )));
    }
    let width = window.end - window.start;
    if width < 16 {
        return Err(HcError::InvalidModel(
            "probe window too narrow to resolve a frequency decade".into(),
        ));
    }
    if window.start == 0 || window.end == n {
        return Err(HcError::SupportViolation(
            "probe window must stay away from the grid edges".into(),
        ));
    }
    if let SymbolTarget::Extended(hhi) = target {
        let origin = hhi.extended().origin_index();
        if window.contains(&origin) {
            return Err(HcError::SupportViolation(
                "probe window must stay on one side of the bifurcation point".into(),
            ));
        }
    }

    let center_idx = window.start + width / 2;
    let s_center = slice.nodes[center_idx];
    let s_lo = slice.nodes[window.start];
    let s_hi = slice.nodes[window.end - 1];
    let half_width = 0.5 * (s_hi - s_lo);

    let xi_top = std::f64::consts::PI / (4.0 * slice.spacing);
    let mut ratios = Vec::with_capacity(n_freqs);
    let mut worst = 0.0f64;
    for j in 0..n_freqs {
        let t = j as f64 / (n_freqs - 1).max(1) as f64;
        let xi = xi_top * (0.1f64).powf(1.0 - t);
        let mut wave_c = DVector::zeros(n);
        let mut wave_s = DVector::zeros(n);
        for i in window.clone() {
            let s = slice.nodes[i];
            let env = smooth_bump((s - 0.5 * (s_lo + s_hi)) / half_width);
            wave_c[i] = env * (xi * s).cos();
            wave_s[i] = env * (xi * s).sin();
        }
        let yc = &slice.block * &wave_c;
        let ys = &slice.block * &wave_s;
        let response = (yc[center_idx].powi(2) + ys[center_idx].powi(2)).sqrt();
        let input = (wave_c[center_idx].powi(2) + wave_s[center_idx].powi(2)).sqrt();
        let symbol = 0.5 * (xi * xi + slice.mass_sq).sqrt();
        let ratio = response / (symbol * input);
        worst = worst.max((ratio - 1.0).abs());
        ratios.push((xi, ratio));
    }

    // Off-diagonal decay along the center row, inside the window.
    let mut pts = Vec::new();
    let mut diag_max = 0.0f64;
    let mut tail_max = 0.0f64;
    let quarter = 0.25 * (s_hi - s_lo);
    for j in window.clone() {
        let d = (slice.nodes[j] - s_center).abs();
        let k = slice.block[(center_idx, j)].abs();
        if d <= 8.0 * slice.spacing {
            diag_max = diag_max.max(k);
        }
        if d >= quarter {
            tail_max = tail_max.max(k);
        }
        if d >= slice.spacing * 0.5 {
            pts.push((d.ln(), k.max(1e-300).ln()));
        }
    }
    let near_exponent = -fit_slope(&pts);

    Ok(DecayReport {
        ratios,
        worst_ratio_gap: worst,
        near_exponent,
        diag_max,
        tail_max,
    })
}

fn fit_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return 0.0;
    }
    let mx: f64 = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my: f64 = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let num: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let den: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    num / den
}

/// Windowed defect of the extension against the wedge: entries of the
/// extended (normal <- value) block over positive-side nodes minus the
/// same-copy wedge block over the matching nodes. The restriction identity
/// makes the defect a flat, small kernel; the genuine blocks concentrate
/// at the diagonal instead. `window` indexes wedge nodes.
#[derive(Debug, Clone, Copy)]
pub struct SmoothingDefect {
    /// max |difference| over the window.
    pub defect_max: f64,
    /// max |block entry| over the window (scale).
    pub kernel_max: f64,
    /// diagonal-to-tail concentration of the sharper genuine block.
    pub concentration_kernels: f64,
    /// diagonal-to-tail concentration of the difference.
    pub concentration_defect: f64,
}

pub fn smoothing_defect_probe(
    hhi: &HhiCovariances,
    model: &HorizonModel,
    pair: &CovariancePair,
    window: Range<usize>,
) -> Result<SmoothingDefect> {
    check_restriction_geometry(hhi, model)?;
    let n = model.n();
    if window.start >= window.end || window.end > n {
        return Err(HcError::InvalidModel(format!(
            "defect window {window:?} does not fit {n} wedge nodes"
        )));
    }
    let b = pair.block_b();
    let oh = hhi.d_ext().omega_half();
    let ext = hhi.extended();
    let width = window.end - window.start;
    let center = window.start + width / 2;
    let h = ext.spacing();
    let quarter = 0.25 * width as f64 * h;

    let mut defect_max = 0.0f64;
    let mut kernel_max = 0.0f64;
    let mut k_diag = 0.0f64;
    let mut k_tail = f64::MIN_POSITIVE;
    let mut d_diag = 0.0f64;
    let mut d_tail = f64::MIN_POSITIVE;
    for i in window.clone() {
        for j in window.clone() {
            let wedge = b[(i, j)];
            let line = oh[(ext.positive_index(i), ext.positive_index(j))];
            let diff = (wedge - line).abs();
            defect_max = defect_max.max(diff);
            kernel_max = kernel_max.max(wedge.abs().max(line.abs()));
            if i == center {
                let d = (j as f64 - i as f64).abs() * h;
                if d <= 8.0 * h {
                    k_diag = k_diag.max(wedge.abs().min(line.abs()));
                    d_diag = d_diag.max(diff);
                }
                if d >= quarter {
                    k_tail = k_tail.max(wedge.abs().max(line.abs()));
                    d_tail = d_tail.max(diff);
                }
            }
        }
    }
    Ok(SmoothingDefect {
        defect_max,
        kernel_max,
        concentration_kernels: k_diag / k_tail,
        concentration_defect: d_diag / d_tail,
    })
}
