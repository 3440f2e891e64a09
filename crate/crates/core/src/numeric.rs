//! Small numerical kernels shared by the quadrature and fitting code.

use crate::error::{domain, Result};

const PAIRWISE_BLOCK: usize = 64;

/// Pairwise (cascade) summation. The reduction tree depends only on the
/// length of the slice, so results are reproducible whatever produced the
/// terms.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= PAIRWISE_BLOCK {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Ordinary least-squares line `y = intercept + slope * x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Largest absolute residual over the fitted points.
    pub max_residual: f64,
}

pub fn fit_line(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    if xs.len() != ys.len() {
        return domain(format!(
            "fit_line: {} abscissae but {} ordinates",
            xs.len(),
            ys.len()
        ));
    }
    if xs.len() < 2 {
        return domain("fit_line: need at least two points");
    }
    let n = xs.len() as f64;
    let x_mean = pairwise_sum(xs) / n;
    let y_mean = pairwise_sum(ys) / n;
    let sxx: Vec<f64> = xs.iter().map(|x| (x - x_mean).powi(2)).collect();
    let sxy: Vec<f64> = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (x - x_mean) * (y - y_mean))
        .collect();
    let sxx = pairwise_sum(&sxx);
    if sxx == 0.0 {
        return domain("fit_line: abscissae are all equal");
    }
    let slope = pairwise_sum(&sxy) / sxx;
    let intercept = y_mean - slope * x_mean;
    let max_residual = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).abs())
        .fold(0.0, f64::max);
    Ok(LineFit {
        slope,
        intercept,
        max_residual,
    })
}

/// `n` points spaced geometrically from `lo` to `hi` inclusive.
pub fn geometric_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo && lo.is_finite() && hi.is_finite()) {
        return domain(format!(
            "geometric grid needs 0 < lo < hi, got [{lo}, {hi}]"
        ));
    }
    if n < 2 {
        return domain("geometric grid needs at least two points");
    }
    let ratio = (hi / lo).ln() / (n - 1) as f64;
    Ok((0..n)
        .map(|i| {
            if i == n - 1 {
                hi
            } else {
                lo * (ratio * i as f64).exp()
            }
        })
        .collect())
}

/// `n` points spaced uniformly from `lo` to `hi` inclusive.
pub fn uniform_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let step = (hi - lo) / (n - 1) as f64;
    (0..n).map(|i| lo + step * i as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_exact_integer_sum() {
        let values: Vec<f64> = (1..=10_000).map(f64::from).collect();
        assert_eq!(pairwise_sum(&values), 50_005_000.0);
    }

    #[test]
    fn exact_line_recovered() {
        let xs: Vec<f64> = (0..10).map(f64::from).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 - 0.25 * x).collect();
        let fit = fit_line(&xs, &ys).unwrap();
        assert!((fit.slope + 0.25).abs() < 1e-14);
        assert!((fit.intercept - 3.0).abs() < 1e-14);
        assert!(fit.max_residual < 1e-14);
    }

    #[test]
    fn degenerate_fits_rejected() {
        assert!(fit_line(&[1.0], &[1.0]).is_err());
        assert!(fit_line(&[1.0, 1.0], &[1.0, 2.0]).is_err());
        assert!(fit_line(&[1.0, 2.0], &[1.0]).is_err());
    }

    #[test]
    fn geometric_grid_endpoints() {
        let g = geometric_grid(1e-3, 1e-2, 5).unwrap();
        assert_eq!(g[0], 1e-3);
        assert_eq!(g[4], 1e-2);
        assert!((g[2] - 10f64.powf(-2.5)).abs() < 1e-15);
        assert!(geometric_grid(0.0, 1.0, 4).is_err());
    }
}
