//! Stable scalar kernels for thermal covariances and the periodic Green kernel.
//!
//! All spectral-calculus blocks reduce to evaluating these functions on
//! operator eigenvalues. They are written to stay accurate over the whole
//! range that shows up in practice: arguments from ~1e-8 (near-degenerate
//! modes at small beta) up to ~1e3 (stiff modes), where naive forms either
//! cancel catastrophically or overflow.

/// Threshold below which series expansions replace the exponential forms.
const SERIES_CUTOFF: f64 = 1e-4;

/// Products beta*mu above this leave coth/csch indistinguishable from their
/// asymptotes at machine precision; callers may attach a diagnostic.
pub const THERMAL_UNDERFLOW_LIMIT: f64 = 1400.0;

/// coth(x) for x > 0, via 1 + 2/(e^{2x} - 1) with a small-x series fallback.
pub fn coth(x: f64) -> f64 {
    debug_assert!(x > 0.0, "coth requires a positive argument");
    if x < SERIES_CUTOFF {
        // coth(x) = 1/x + x/3 - x^3/45 + O(x^5)
        1.0 / x + x / 3.0 - x * x * x / 45.0
    } else {
        1.0 + 2.0 / x.mul_add(2.0, 0.0).exp_m1()
    }
}

/// csch(x) = 1/sinh(x) for x > 0, via 2e^{-x}/(1 - e^{-2x}).
pub fn csch(x: f64) -> f64 {
    debug_assert!(x > 0.0, "csch requires a positive argument");
    if x < SERIES_CUTOFF {
        // csch(x) = 1/x - x/6 + 7x^3/360 + O(x^5)
        1.0 / x - x / 6.0 + 7.0 * x * x * x / 360.0
    } else {
        2.0 * (-x).exp() / (-(-2.0 * x).exp_m1())
    }
}

/// coth(x)^2 - csch(x)^2 evaluated without cancellation, as
/// tanh(x/2) * (coth(x) + csch(x)). Exactly 1 in exact arithmetic.
pub fn coth_sq_minus_csch_sq(x: f64) -> f64 {
    (x / 2.0).tanh() * (coth(x) + csch(x))
}

/// True if beta*mu is so large that thermal factors have saturated.
pub fn thermal_underflow(beta_mu: f64) -> bool {
    beta_mu > THERMAL_UNDERFLOW_LIMIT
}

/// Periodic Green kernel of -d^2/dtau^2 + mu^2 on a circle of length beta:
///
///   F(tau) = (e^{-tau*mu} + e^{-(beta-tau)*mu}) / (2*mu*(1 - e^{-beta*mu}))
///
/// for tau in [0, beta]; other arguments are folded by periodicity.
/// F is even, beta-periodic, with F(0) = coth(beta*mu/2)/(2*mu) and
/// F(beta/2) = csch(beta*mu/2)/(2*mu).
pub fn kernel_f(beta: f64, mu: f64, tau: f64) -> f64 {
    debug_assert!(beta > 0.0 && mu > 0.0);
    let t = tau.rem_euclid(beta);
    let denom = 2.0 * mu * (-(-beta * mu).exp_m1());
    ((-t * mu).exp() + (-(beta - t) * mu).exp()) / denom
}

/// One-sided derivative dF/dtau as tau -> 0+. Equals -1/2 for every mu and
/// beta; kept as a function so trace stencils can be tested against it.
pub fn kernel_f_slope_at_zero() -> f64 {
    -0.5
}
