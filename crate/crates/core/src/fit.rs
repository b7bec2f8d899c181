//! Small weighted linear least-squares solver for the fits used by the
//! oracles and the analysis pipeline.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LinearFit {
    pub coefficients: Vec<f64>,
    /// Covariance of the coefficients, scaled by the weights as given
    /// (weights = 1/variance gives absolute errors).
    pub covariance: Vec<Vec<f64>>,
    /// Weighted sum of squared residuals.
    pub chi2: f64,
    pub n_points: usize,
}

impl LinearFit {
    pub fn stderr(&self, i: usize) -> f64 {
        self.covariance[i][i].max(0.0).sqrt()
    }
}

/// Minimizes `Σ w_i (y_i − Σ_j c_j X_ij)²`.
pub fn weighted_least_squares(design: &[Vec<f64>], y: &[f64], weights: &[f64]) -> Result<LinearFit> {
    let n = y.len();
    let p = design.first().map_or(0, Vec::len);
    if design.len() != n || weights.len() != n {
        return Err(Error::Config("fit inputs have mismatched lengths".into()));
    }
    if n < p || p == 0 {
        return Err(Error::Config(format!("fit needs at least {p} points, got {n}")));
    }
    let mut a = vec![vec![0.0; p]; p];
    let mut rhs = vec![0.0; p];
    for ((row, &yi), &wi) in design.iter().zip(y).zip(weights) {
        for j in 0..p {
            rhs[j] += wi * row[j] * yi;
            for k in 0..p {
                a[j][k] += wi * row[j] * row[k];
            }
        }
    }
    let inv = invert(a)?;
    let coefficients: Vec<f64> = (0..p).map(|j| (0..p).map(|k| inv[j][k] * rhs[k]).sum()).collect();
    let chi2 = design
        .iter()
        .zip(y)
        .zip(weights)
        .map(|((row, &yi), &wi)| {
            let r = yi - row.iter().zip(&coefficients).map(|(x, c)| x * c).sum::<f64>();
            wi * r * r
        })
        .sum();
    Ok(LinearFit {
        coefficients,
        covariance: inv,
        chi2,
        n_points: n,
    })
}

/// Unweighted polynomial fit in powers of `(x − x̄)`; returns `x̄` and the
/// coefficients of the centered polynomial.
pub fn centered_polyfit(x: &[f64], y: &[f64], degree: usize) -> Result<(f64, LinearFit)> {
    let center = x.iter().sum::<f64>() / x.len().max(1) as f64;
    let half_range = x.iter().fold(0.0f64, |m, xi| m.max((xi - center).abs()));
    let scale = if half_range > 0.0 { half_range } else { 1.0 };
    let design: Vec<Vec<f64>> = x
        .iter()
        .map(|&xi| (0..=degree).map(|k| ((xi - center) / scale).powi(k as i32)).collect())
        .collect();
    let w = vec![1.0; x.len()];
    let mut fit = weighted_least_squares(&design, y, &w)?;
    for j in 0..=degree {
        fit.coefficients[j] /= scale.powi(j as i32);
        for k in 0..=degree {
            fit.covariance[j][k] /= scale.powi((j + k) as i32);
        }
    }
    Ok((center, fit))
}

/// Gauss-Jordan inverse with partial pivoting.
fn invert(mut a: Vec<Vec<f64>>) -> Result<Vec<Vec<f64>>> {
    let n = a.len();
    let mut inv: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect()).collect();
    let scale = a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .expect("non-empty");
        if !(a[piv][col].abs() > 1e-14 * scale) {
            return Err(Error::numeric("degenerate fit: singular normal matrix", a[piv][col].abs()));
        }
        a.swap(col, piv);
        inv.swap(col, piv);
        let d = a[col][col];
        for k in 0..n {
            a[col][k] /= d;
            inv[col][k] /= d;
        }
        for r in 0..n {
            if r != col {
                let f = a[r][col];
                if f != 0.0 {
                    for k in 0..n {
                        a[r][k] -= f * a[col][k];
                        inv[r][k] -= f * inv[col][k];
                    }
                }
            }
        }
    }
    Ok(inv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exact_quadratic() {
        let x: Vec<f64> = (0..20).map(|i| i as f64 * 0.1).collect();
        let y: Vec<f64> = x.iter().map(|t| 1.0 + 2.0 * t - 0.5 * t * t).collect();
        let design: Vec<Vec<f64>> = x.iter().map(|&t| vec![1.0, t, t * t]).collect();
        let fit = weighted_least_squares(&design, &y, &[1.0; 20]).unwrap();
        for (c, e) in fit.coefficients.iter().zip([1.0, 2.0, -0.5]) {
            assert!((c - e).abs() < 1e-10);
        }
        assert!(fit.chi2 < 1e-20);
    }

    #[test]
    fn centered_fit_handles_tiny_abscissae() {
        let x: Vec<f64> = (0..400).map(|i| 1e-6 + i as f64 * 1e-9).collect();
        let y: Vec<f64> = x.iter().map(|t| 3e-20 * t).collect();
        let (c, fit) = centered_polyfit(&x, &y, 2).unwrap();
        assert!((fit.coefficients[1] / 3e-20 - 1.0).abs() < 1e-9);
        assert!((fit.coefficients[0] - 3e-20 * c).abs() < 1e-35);
    }

    #[test]
    fn rejects_degenerate_design() {
        let design = vec![vec![1.0, 2.0], vec![2.0, 4.0], vec![3.0, 6.0]];
        assert!(weighted_least_squares(&design, &[1.0, 2.0, 3.0], &[1.0; 3]).is_err());
        assert!(weighted_least_squares(&design[..1], &[1.0], &[1.0]).is_err());
    }

    #[test]
    fn weighted_mean_error() {
        let design = vec![vec![1.0]; 4];
        let fit = weighted_least_squares(&design, &[1.0, 2.0, 3.0, 4.0], &[0.25; 4]).unwrap();
        assert!((fit.coefficients[0] - 2.5).abs() < 1e-14);
        assert!((fit.stderr(0) - 1.0).abs() < 1e-14);
    }
}
