//! Small numerical-differentiation helpers used by oracles and by the
//! chain-rule evaluation of tensor divergences.

/// Fourth-order central difference of a scalar function at `x`.
pub fn central4(mut f: impl FnMut(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
}

/// Second-order central difference of a scalar function at `x`.
pub fn central2(mut f: impl FnMut(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// Step size for differencing a quantity of magnitude `scale`.
pub fn step_for(scale: f64, base: f64) -> f64 {
    base * scale.abs().max(1.0)
}

/// Least-squares slope of `y` against `x`, with the standard error of the
/// slope estimate under the iid-noise model.  Used for secular-trend checks.
pub fn linear_fit_slope(x: &[f64], y: &[f64]) -> (f64, f64) {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    assert!(
        n >= 3.0,
        "need at least 3 points for a slope error estimate"
    );
    let xm = x.iter().sum::<f64>() / n;
    let ym = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|&v| (v - xm) * (v - xm)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(&a, &b)| (a - xm) * (b - ym)).sum();
    let slope = sxy / sxx;
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(&a, &b)| {
            let r = b - ym - slope * (a - xm);
            r * r
        })
        .sum();
    let sigma2 = ss_res / (n - 2.0);
    (slope, (sigma2 / sxx).sqrt())
}

/// Observed convergence order from residuals on successively refined grids
/// (each grid halves the spacing).  Returns the minimum pairwise order.
pub fn refinement_order(residuals: &[f64]) -> f64 {
    assert!(residuals.len() >= 2);
    residuals
        .windows(2)
        .map(|w| (w[0] / w[1]).log2())
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn central4_is_accurate_on_exp() {
        let d = central4(|x| x.exp(), 0.3, 1e-3);
        assert!((d - 0.3f64.exp()).abs() < 1e-12);
    }

    #[test]
    fn slope_fit_recovers_line() {
        let x: Vec<f64> = (0..50).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|&v| 2.5 * v - 1.0).collect();
        let (slope, err) = linear_fit_slope(&x, &y);
        assert!((slope - 2.5).abs() < 1e-12);
        assert!(err < 1e-12);
    }

    #[test]
    fn refinement_order_of_quadratic_decay() {
        let r = [1.0e-2, 2.5e-3, 6.25e-4];
        assert!((refinement_order(&r) - 2.0).abs() < 1e-12);
    }
}
