//! Central finite differences over a scalar function of a flat parameter
//! vector.

/// Relative error `|a − n| / max(|a|, |n|, floor)`. The floor keeps
/// parameters whose true derivative is (numerically) zero from producing
/// meaningless ratios.
pub fn relative_error(analytic: f64, numeric: f64, floor: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(floor)
}

/// `(f(θ + h·e_k) − f(θ − h·e_k)) / 2h`.
pub fn central_difference(theta: &[f64], k: usize, h: f64, f: impl Fn(&[f64]) -> f64) -> f64 {
    let mut up = theta.to_vec();
    up[k] += h;
    let mut down = theta.to_vec();
    down[k] -= h;
    (f(&up) - f(&down)) / (2.0 * h)
}
