//! Limit extrapolation and order fitting.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{from_usize, Real};

/// Result of extrapolating a sequence to `x = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Extrapolated<R> {
    pub value: Complex<R>,
    pub error: R,
    pub degree: usize,
}

/// Neville polynomial extrapolation of `(x_j, y_j)` to `x = 0`.
///
/// Each entry of column `l` interpolates `l + 1` consecutive samples; the
/// result is the last entry of column `min(max_degree, n-1)` and the error
/// estimate is its distance to the previous entry of the same column.
pub fn extrapolate_to_zero<R: Real>(xs: &[R], ys: &[Complex<R>], max_degree: usize) -> Result<Extrapolated<R>> {
    let n = xs.len();
    if n != ys.len() || n < 2 {
        return Err(Error::domain("extrapolation needs at least two matched samples"));
    }
    let degree = max_degree.min(n - 1);
    let mut column: Vec<Complex<R>> = ys.to_vec();
    for level in 1..=degree {
        let next: Vec<Complex<R>> = (level..n)
            .map(|i| {
                let (xa, xb) = (xs[i - level], xs[i]);
                let (ya, yb) = (column[i - level], column[i - level + 1]);
                (ya * xb - yb * xa) / (xb - xa)
            })
            .collect();
        column = next;
        // column[k] now covers samples k..=k+level
    }
    let last = column[column.len() - 1];
    let error = if column.len() >= 2 {
        (last - column[column.len() - 2]).norm()
    } else {
        R::nan()
    };
    Ok(Extrapolated { value: last, error, degree })
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope<R: Real>(xs: &[R], ys: &[R]) -> Result<R> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::domain("slope fit needs at least two matched samples"));
    }
    if xs.iter().chain(ys).any(|v| *v <= R::zero() || !v.is_finite()) {
        return Err(Error::domain("slope fit needs positive finite samples"));
    }
    let n: R = from_usize(xs.len());
    let lx: Vec<R> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<R> = ys.iter().map(|y| y.ln()).collect();
    let mx = lx.iter().copied().sum::<R>() / n;
    let my = ly.iter().copied().sum::<R>() / n;
    let mut sxy = R::zero();
    let mut sxx = R::zero();
    for (a, b) in lx.iter().zip(&ly) {
        sxy += (*a - mx) * (*b - my);
        sxx += (*a - mx) * (*a - mx);
    }
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn removes_polynomial_error_terms() {
        let xs: Vec<f64> = (0..6).map(|j| 0.5f64.powi(j)).collect();
        let ys: Vec<Complex<f64>> = xs
            .iter()
            .map(|x| Complex::new(2.0 + 3.0 * x - x * x, -1.0 + 0.5 * x * x * x))
            .collect();
        let r = extrapolate_to_zero(&xs, &ys, 3).unwrap();
        assert!((r.value - Complex::new(2.0, -1.0)).norm() < 1e-12);
        assert!(r.error < 1e-12);
        assert_eq!(r.degree, 3);
    }

    #[test]
    fn degree_is_capped_by_sample_count() {
        let xs = [1.0f64, 0.5];
        let ys = [Complex::new(3.0, 0.0), Complex::new(2.0, 0.0)];
        let r = extrapolate_to_zero(&xs, &ys, 5).unwrap();
        assert_eq!(r.degree, 1);
        assert!((r.value.re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn slope_of_power_law() {
        let xs = [0.1, 0.05, 0.025];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 7.0 * x.powf(1.7)).collect();
        assert!((loglog_slope(&xs, &ys).unwrap() - 1.7).abs() < 1e-12);
    }
}
