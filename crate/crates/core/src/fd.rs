//! Central finite-difference stencils on uniform samples.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::phase::FdOrder;
use crate::quadrature::Integrand;
use crate::scalar::{lit, Real};

fn first_coeffs(order: FdOrder) -> &'static [(isize, f64)] {
    match order {
        FdOrder::Second => &[(-1, -0.5), (1, 0.5)],
        FdOrder::Fourth => &[(-2, 1.0 / 12.0), (-1, -8.0 / 12.0), (1, 8.0 / 12.0), (2, -1.0 / 12.0)],
    }
}

fn second_coeffs(order: FdOrder) -> &'static [(isize, f64)] {
    match order {
        FdOrder::Second => &[(-1, 1.0), (0, -2.0), (1, 1.0)],
        FdOrder::Fourth => &[
            (-2, -1.0 / 12.0),
            (-1, 16.0 / 12.0),
            (0, -30.0 / 12.0),
            (1, 16.0 / 12.0),
            (2, -1.0 / 12.0),
        ],
    }
}

/// Half-width of the stencil.
pub fn stencil_radius(order: FdOrder) -> usize {
    match order {
        FdOrder::Second => 1,
        FdOrder::Fourth => 2,
    }
}

/// Derivative of order `deriv` (1 or 2) at index `i` of strided samples.
///
/// `len` is the number of samples along the axis, `at(j)` returns sample `j`.
pub fn derivative_at<R: Real, T: Integrand<R>>(
    at: impl Fn(usize) -> T,
    len: usize,
    i: usize,
    spacing: R,
    order: FdOrder,
    deriv: u8,
) -> Result<T> {
    let r = stencil_radius(order);
    if i < r || i + r >= len {
        return Err(Error::Grid(format!(
            "stencil of radius {r} out of bounds at index {i} of {len}"
        )));
    }
    let (coeffs, scale) = match deriv {
        1 => (first_coeffs(order), spacing.recip()),
        2 => (second_coeffs(order), (spacing * spacing).recip()),
        _ => return Err(Error::domain("only first and second derivatives are supported")),
    };
    let mut acc = T::zero();
    for &(off, c) in coeffs {
        let j = (i as isize + off) as usize;
        acc += at(j) * lit::<R>(c);
    }
    Ok(acc * scale)
}

/// Periodic first derivative of angular samples. `seam_sign` multiplies
/// samples fetched across the `2π` seam (−1 for sections carrying the
/// half-integer angular ramification, +1 otherwise).
pub fn periodic_derivative<R: Real>(
    values: &[Complex<R>],
    i: usize,
    spacing: R,
    order: FdOrder,
    seam_sign: R,
) -> Complex<R> {
    let n = values.len() as isize;
    let mut acc = Complex::new(R::zero(), R::zero());
    for &(off, c) in first_coeffs(order) {
        let j = i as isize + off;
        let (idx, sign) = if j < 0 {
            (j + n, seam_sign)
        } else if j >= n {
            (j - n, seam_sign)
        } else {
            (j, R::one())
        };
        acc += values[idx as usize] * (lit::<R>(c) * sign);
    }
    acc / spacing
}

/// Central difference of a closure, used when the function can be evaluated
/// off-grid.
pub fn central_derivative<R: Real, T: Integrand<R>>(f: impl Fn(R) -> T, x: R, step: R, order: FdOrder) -> T {
    let mut acc = T::zero();
    for &(off, c) in first_coeffs(order) {
        acc += f(x + step * lit::<R>(off as f64)) * lit::<R>(c);
    }
    acc * step.recip()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fourth_order_is_exact_on_quartics() {
        let h = 0.1;
        let f = |j: usize| {
            let x = j as f64 * h;
            x.powi(4) - 2.0 * x
        };
        let d1 = derivative_at(f, 10, 5, h, FdOrder::Fourth, 1).unwrap();
        assert!((d1 - (4.0 * 0.5f64.powi(3) - 2.0)).abs() < 1e-12);
        let d2 = derivative_at(f, 10, 5, h, FdOrder::Fourth, 2).unwrap();
        assert!((d2 - 12.0 * 0.25).abs() < 1e-10);
    }

    #[test]
    fn boundary_is_rejected() {
        let f = |_: usize| 1.0f64;
        assert!(matches!(derivative_at(f, 10, 1, 0.1, FdOrder::Fourth, 1), Err(Error::Grid(_))));
        assert!(derivative_at(f, 10, 1, 0.1, FdOrder::Second, 1).is_ok());
    }

    #[test]
    fn ramified_seam() {
        let n = 64;
        let dt = std::f64::consts::TAU / n as f64;
        let vals: Vec<Complex<f64>> = (0..n).map(|j| Complex::from_polar(1.0, 1.5 * j as f64 * dt)).collect();
        for i in [0, 1, n - 1] {
            let d = periodic_derivative(&vals, i, dt, FdOrder::Fourth, -1.0);
            let exact = vals[i] * Complex::new(0.0, 1.5);
            assert!((d - exact).norm() < 1e-4);
        }
    }
}
