//! Beta-distribution helpers on top of `statrs`.

pub use statrs::function::beta::{beta_reg, ln_beta};
pub use statrs::function::gamma::ln_gamma;

/// Density of Beta(a, b) at u; zero outside [0, 1].
pub fn beta_pdf(a: f64, b: f64, u: f64) -> f64 {
    if !(0.0..=1.0).contains(&u) {
        return 0.0;
    }
    beta_unnormalized(a, b, u, 1.0 - u) * (-ln_beta(a, b)).exp()
}

/// `u^{a-1} (1-u)^{b-1}` with `one_minus_u` supplied separately (endpoint accuracy).
/// Exponents of zero give 1 even at the endpoints.
pub fn beta_unnormalized(a: f64, b: f64, u: f64, one_minus_u: f64) -> f64 {
    let left = if a == 1.0 { 1.0 } else { u.powf(a - 1.0) };
    let right = if b == 1.0 { 1.0 } else { one_minus_u.powf(b - 1.0) };
    left * right
}

pub fn beta_cdf(a: f64, b: f64, u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else if u >= 1.0 {
        1.0
    } else {
        beta_reg(a, b, u)
    }
}

/// Inverse CDF of Beta(a, b): safeguarded Newton on I_u(a, b) = p, falling back
/// to bisection whenever a step leaves the current bracket.
pub fn beta_inv_cdf(a: f64, b: f64, p: f64) -> f64 {
    if p <= 0.0 {
        return 0.0;
    }
    if p >= 1.0 {
        return 1.0;
    }
    let lnb = ln_beta(a, b);
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    let mut x = statrs::function::beta::inv_beta_reg(a, b, p);
    if !(x > 0.0 && x < 1.0) {
        x = 0.5;
    }
    for _ in 0..200 {
        let f = beta_reg(a, b, x) - p;
        if f == 0.0 {
            return x;
        }
        if f < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let dens = ((a - 1.0) * x.ln() + (b - 1.0) * (1.0 - x).ln() - lnb).exp();
        let mut next = x - f / dens;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 1e-12 * x.max(1e-300) || hi - lo <= 1e-15 {
            return next;
        }
        x = next;
    }
    x
}
