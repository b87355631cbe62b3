//! Spatial discretization of a static wedge with a bifurcation point.
//!
//! The spatial slice is a half-line (0, L] with geodesic-like coordinate s.
//! The lapse |v| vanishes linearly at s = 0 with slope kappa (the surface
//! gravity); the outer edge s = L carries a Dirichlet condition, the inner
//! edge needs none because the form weights vanish there. The doubled
//! surface glues a reflected second copy across s = 0.

use nalgebra::DVector;

use crate::error::{HcError, Result};

/// Relative slack for the linear-lapse acceptance bound |v(s1)/s1 - kappa| <= C*s1.
const LINEARITY_BOUND_FACTOR: f64 = 1.0;

/// Gate width for a smooth flat extension: |kappa*beta - 2*pi| must not exceed this.
pub const CONE_ANGLE_TOL: f64 = 1e-12;

/// One-dimensional grid on (0, L): interior nodes plus quadrature weights.
///
/// Nodes exclude both endpoints; s = L is the Dirichlet ghost, s = 0 the
/// degenerate edge. Weights approximate the measure |h|^{1/2} ds.
#[derive(Debug, Clone)]
pub struct Grid1D {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    length: f64,
}

impl Grid1D {
    /// Uniform grid s_i = i*h with h = L/(n+1) and unit metric weight.
    pub fn uniform(length: f64, n: usize) -> Result<Self> {
        if !(length > 0.0) || n == 0 {
            return Err(HcError::InvalidModel(format!(
                "grid needs positive length and at least one node (length={length}, n={n})"
            )));
        }
        let h = length / (n + 1) as f64;
        let nodes: Vec<f64> = (1..=n).map(|i| i as f64 * h).collect();
        let weights = vec![h; n];
        Ok(Self {
            nodes,
            weights,
            length,
        })
    }

    /// Grid with explicit nodes and weights (metric weight folded in).
    pub fn from_parts(nodes: Vec<f64>, weights: Vec<f64>, length: f64) -> Result<Self> {
        if nodes.is_empty() || nodes.len() != weights.len() {
            return Err(HcError::InvalidModel(
                "grid nodes and weights must be non-empty and equally long".into(),
            ));
        }
        let increasing = nodes.windows(2).all(|w| w[0] < w[1]);
        if !increasing || nodes[0] <= 0.0 || *nodes.last().unwrap() >= length {
            return Err(HcError::InvalidModel(
                "grid nodes must be strictly increasing inside (0, L)".into(),
            ));
        }
        if weights.iter().any(|&w| !(w > 0.0)) {
            return Err(HcError::InvalidModel("grid weights must be positive".into()));
        }
        Ok(Self {
            nodes,
            weights,
            length,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Spacing of a uniform grid; None when spacings differ beyond roundoff.
    pub fn uniform_spacing(&self) -> Option<f64> {
        let h = self.nodes[0];
        let ok = self
            .nodes
            .windows(2)
            .all(|w| ((w[1] - w[0]) - h).abs() <= 1e-12 * h);
        ok.then_some(h)
    }
}

/// Analytic lapse profiles; all vanish linearly at s = 0 with slope kappa.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LapseProfile {
    /// v(s) = kappa * s (exact wedge lapse; flat-plane compatible).
    Rindler { kappa: f64 },
    /// v(s) = sin(kappa * s) / 1, valid while positive (L < pi/kappa).
    Sine { kappa: f64 },
    /// v(s) = tanh(kappa * s), bounded lapse.
    Tanh { kappa: f64 },
}

impl LapseProfile {
    pub fn eval(&self, s: f64) -> f64 {
        match *self {
            LapseProfile::Rindler { kappa } => kappa * s,
            LapseProfile::Sine { kappa } => (kappa * s).sin(),
            LapseProfile::Tanh { kappa } => (kappa * s).tanh(),
        }
    }

    pub fn kappa(&self) -> f64 {
        match *self {
            LapseProfile::Rindler { kappa }
            | LapseProfile::Sine { kappa }
            | LapseProfile::Tanh { kappa } => kappa,
        }
    }

    /// True only for the profile whose Euclidean cylinder is exactly flat.
    pub fn is_flat_plane(&self) -> bool {
        matches!(self, LapseProfile::Rindler { .. })
    }
}

/// How the inverse temperature is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BetaSpec {
    /// beta = 2*pi/kappa, the value with a smooth flat extension.
    Hawking,
    /// Explicit positive value.
    Value(f64),
}

/// Inverse temperature matching surface gravity kappa: beta_H = 2*pi/kappa.
pub fn hawking_beta(kappa: f64) -> f64 {
    assert!(kappa > 0.0, "surface gravity must be positive");
    2.0 * std::f64::consts::PI / kappa
}

/// Inputs for `build_model`.
#[derive(Debug, Clone)]
pub struct ModelParams {
    pub kappa: f64,
    pub length: f64,
    pub nodes: usize,
    pub lapse: LapseProfile,
    /// Constant potential value m(s) = m (inverse length squared).
    pub potential: f64,
    /// Required lower bound m_0 > 0 for the potential.
    pub potential_floor: f64,
    pub beta: BetaSpec,
}

impl ModelParams {
    /// Wedge defaults used by the verification scenarios.
    pub fn with_defaults(kappa: f64, length: f64, nodes: usize, potential: f64) -> Self {
        Self {
            kappa,
            length,
            nodes,
            lapse: LapseProfile::Rindler { kappa },
            potential,
            potential_floor: potential,
            beta: BetaSpec::Hawking,
        }
    }
}

/// Discretized wedge model: grid, coefficient samples, and thermal data.
#[derive(Debug, Clone)]
pub struct HorizonModel {
    pub grid: Grid1D,
    /// |v|(s_i) > 0 at the nodes.
    pub lapse: Vec<f64>,
    /// |h|^{1/2}(s_i) > 0 at the nodes.
    pub metric_weight: Vec<f64>,
    /// m(s_i) >= m_0 > 0 at the nodes.
    pub potential: Vec<f64>,
    pub kappa: f64,
    pub beta: f64,
    /// Midpoint samples of |v| for cells [s_i, s_{i+1}] and the last
    /// Dirichlet cell [s_N, L]; length N.
    lapse_mid: Vec<f64>,
    /// Midpoint samples of |h|^{1/2}, same layout.
    metric_mid: Vec<f64>,
    flat_plane: bool,
}

impl HorizonModel {
    /// Midpoint lapse samples used by the divergence-form assembly.
    pub fn lapse_midpoints(&self) -> &[f64] {
        &self.lapse_mid
    }

    /// Midpoint metric-weight samples, same cell layout as the lapse.
    pub fn metric_midpoints(&self) -> &[f64] {
        &self.metric_mid
    }

    /// True when v = kappa*s and |h| = 1 exactly (flat Euclidean plane at
    /// the matching temperature).
    pub fn is_flat_plane(&self) -> bool {
        self.flat_plane
    }

    pub fn n(&self) -> usize {
        self.grid.len()
    }

    /// Lapse values as a vector (handy for diagonal conjugations).
    pub fn lapse_vector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.lapse)
    }

    /// Model from explicit samples; validates positivity but not linearity,
    /// so test fixtures with non-degenerate lapse can be built directly.
    /// Midpoint values are averaged from neighbors (second order).
    pub fn from_samples(
        grid: Grid1D,
        lapse: Vec<f64>,
        metric_weight: Vec<f64>,
        potential: Vec<f64>,
        kappa: f64,
        beta: f64,
    ) -> Result<Self> {
        let n = grid.len();
        if lapse.len() != n || metric_weight.len() != n || potential.len() != n {
            return Err(HcError::DimensionMismatch(
                "model sample arrays must match the grid".into(),
            ));
        }
        if !(kappa > 0.0) || !(beta > 0.0) {
            return Err(HcError::InvalidModel(
                "kappa and beta must be positive".into(),
            ));
        }
        for (name, vals) in [
            ("lapse", &lapse),
            ("metric weight", &metric_weight),
            ("potential", &potential),
        ] {
            if vals.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
                return Err(HcError::InvalidModel(format!(
                    "{name} must be positive and finite at every node"
                )));
            }
        }
        let mids = |vals: &[f64]| -> Vec<f64> {
            let mut m = Vec::with_capacity(n);
            for i in 0..n - 1 {
                m.push(0.5 * (vals[i] + vals[i + 1]));
            }
            // Last cell reaches the Dirichlet edge; extrapolate linearly.
            if n >= 2 {
                m.push(vals[n - 1] + 0.5 * (vals[n - 1] - vals[n - 2]));
            } else {
                m.push(vals[0]);
            }
            m
        };
        let lapse_mid = mids(&lapse);
        let metric_mid = mids(&metric_weight);
        Ok(Self {
            grid,
            lapse,
            metric_weight,
            potential,
            kappa,
            beta,
            lapse_mid,
            metric_mid,
            flat_plane: false,
        })
    }
}

/// Build and validate a wedge model from analytic profiles.
///
/// Rejects non-positive kappa, length, or potential floor, lapse profiles
/// that are not positive on the grid, and lapse profiles that do not vanish
/// linearly at s = 0: the acceptance bound is |v(s_1)/s_1 - kappa| <= kappa*s_1.
pub fn build_model(params: &ModelParams) -> Result<HorizonModel> {
    if !(params.kappa > 0.0) {
        return Err(HcError::InvalidModel(format!(
            "kappa must be positive, got {}",
            params.kappa
        )));
    }
    if !(params.length > 0.0) {
        return Err(HcError::InvalidModel(format!(
            "length must be positive, got {}",
            params.length
        )));
    }
    if !(params.potential_floor > 0.0) || params.potential < params.potential_floor {
        return Err(HcError::InvalidModel(format!(
            "potential {} must sit above a positive floor {}",
            params.potential, params.potential_floor
        )));
    }
    if params.lapse.kappa() != params.kappa {
        return Err(HcError::InvalidModel(
            "lapse profile slope and kappa input disagree".into(),
        ));
    }
    let beta = match params.beta {
        BetaSpec::Hawking => hawking_beta(params.kappa),
        BetaSpec::Value(b) if b > 0.0 => b,
        BetaSpec::Value(b) => {
            return Err(HcError::InvalidModel(format!(
                "beta must be positive, got {b}"
            )))
        }
    };

    let grid = Grid1D::uniform(params.length, params.nodes)?;
    let lapse: Vec<f64> = grid.nodes().iter().map(|&s| params.lapse.eval(s)).collect();
    if lapse.iter().any(|&v| !(v > 0.0)) {
        return Err(HcError::InvalidModel(
            "lapse must be positive at every node; shrink L or change profile".into(),
        ));
    }

    let s1 = grid.nodes()[0];
    let measured = lapse[0] / s1;
    let bound = LINEARITY_BOUND_FACTOR * params.kappa * s1;
    if (measured - params.kappa).abs() > bound {
        return Err(HcError::LapseNotLinear {
            measured,
            expected: params.kappa,
            bound,
        });
    }

    let potential = vec![params.potential; grid.len()];
    let metric_weight = vec![1.0; grid.len()];

    // Midpoints from the analytic profile: exact second-order coefficients.
    let n = grid.len();
    let mut lapse_mid = Vec::with_capacity(n);
    for i in 0..n {
        let right = if i + 1 < n {
            grid.nodes()[i + 1]
        } else {
            grid.length()
        };
        lapse_mid.push(params.lapse.eval(0.5 * (grid.nodes()[i] + right)));
    }
    let metric_mid = vec![1.0; n];

    Ok(HorizonModel {
        grid,
        lapse,
        metric_weight,
        potential,
        kappa: params.kappa,
        beta,
        lapse_mid,
        metric_mid,
        flat_plane: params.lapse.is_flat_plane(),
    })
}

/// Cone-angle data for the Euclidean cylinder over the wedge.
#[derive(Debug, Clone, Copy)]
pub struct ConeAngle {
    /// kappa * beta; a smooth flat extension needs exactly 2*pi.
    pub angle: f64,
    /// Surface gravity recovered from the lapse samples by Richardson
    /// extrapolation of v(s)/s; agrees with kappa to O(s_1^2) for smooth lapse.
    pub kappa_estimate: f64,
    /// beta * v(s_1)/s_1: circumference/radius of the smallest grid circle.
    pub circumference_ratio: f64,
}

/// Measure the cone angle of the discretized cylinder metric.
pub fn cone_angle(model: &HorizonModel) -> ConeAngle {
    let s1 = model.grid.nodes()[0];
    let r1 = model.lapse[0] / s1;
    let kappa_estimate = if model.n() >= 2 {
        let s2 = model.grid.nodes()[1];
        let r2 = model.lapse[1] / s2;
        // v(s)/s = kappa + c s^2 + ... for lapse odd in s; eliminate the s^2 term.
        let rho = (s2 / s1).powi(2);
        (rho * r1 - r2) / (rho - 1.0)
    } else {
        r1
    };
    ConeAngle {
        angle: model.kappa * model.beta,
        kappa_estimate,
        circumference_ratio: model.beta * r1,
    }
}

/// Defect |kappa*beta - 2*pi| of the cone angle.
pub fn cone_angle_defect(model: &HorizonModel) -> f64 {
    (model.kappa * model.beta - 2.0 * std::f64::consts::PI).abs()
}

/// Data on the doubled surface: one spatial vector per boundary copy.
#[derive(Debug, Clone, PartialEq)]
pub struct DoubledData {
    /// Values on the copy attached to the tau = 0 boundary.
    pub copy_0: DVector<f64>,
    /// Values on the copy attached to the tau = beta/2 boundary.
    pub copy_half: DVector<f64>,
}

impl DoubledData {
    pub fn zeros(n: usize) -> Self {
        Self {
            copy_0: DVector::zeros(n),
            copy_half: DVector::zeros(n),
        }
    }

    pub fn n(&self) -> usize {
        self.copy_0.len()
    }

    /// Stack as a 2N vector, copy_0 first. This is the layout every doubled
    /// operator matrix in the crate uses.
    pub fn stacked(&self) -> DVector<f64> {
        let n = self.n();
        let mut out = DVector::zeros(2 * n);
        out.rows_mut(0, n).copy_from(&self.copy_0);
        out.rows_mut(n, n).copy_from(&self.copy_half);
        out
    }

    pub fn from_stacked(v: &DVector<f64>) -> Self {
        let n = v.len() / 2;
        assert_eq!(2 * n, v.len(), "stacked doubled data must have even length");
        Self {
            copy_0: v.rows(0, n).into_owned(),
            copy_half: v.rows(n, n).into_owned(),
        }
    }
}

/// Function data on the two-sided surface, ordered by ascending coordinate
/// -s_N, ..., -s_1, s_1, ..., s_N (no node at the bifurcation point).
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceData {
    pub values: DVector<f64>,
}

impl SurfaceData {
    pub fn half_n(&self) -> usize {
        self.values.len() / 2
    }
}

/// Identify doubled boundary data with a function on the two-sided surface:
/// copy_0 lands on the positive side, copy_half on the reflected negative
/// side. Pure re-indexing; applying the inverse after it is the identity.
pub fn rhat_identify(data: &DoubledData) -> SurfaceData {
    let n = data.n();
    let mut values = DVector::zeros(2 * n);
    for i in 0..n {
        values[n + i] = data.copy_0[i]; // node +s_{i+1}
        values[n - 1 - i] = data.copy_half[i]; // node -s_{i+1}
    }
    SurfaceData { values }
}

/// Inverse of `rhat_identify`.
pub fn rhat_identify_inverse(surface: &SurfaceData) -> DoubledData {
    let n = surface.half_n();
    assert_eq!(2 * n, surface.values.len());
    let mut copy_0 = DVector::zeros(n);
    let mut copy_half = DVector::zeros(n);
    for i in 0..n {
        copy_0[i] = surface.values[n + i];
        copy_half[i] = surface.values[n - 1 - i];
    }
    DoubledData { copy_0, copy_half }
}

/// Quadrature weights on the two-sided surface (mirror of the grid weights).
pub fn doubled_weights(grid: &Grid1D) -> DVector<f64> {
    let n = grid.len();
    let mut w = DVector::zeros(2 * n);
    for i in 0..n {
        w[n + i] = grid.weights()[i];
        w[n - 1 - i] = grid.weights()[i];
    }
    w
}
