//! Harmonic-oscillator eigenfunctions.

use crate::scalar::{from_usize, lit, Real};

/// Normalized eigenfunctions `ψ_0..=ψ_n` of `−(ħ²/2)∂² + q²/2` at `q`,
/// from the three-term recurrence in `x = q/√ħ`.
pub fn hermite_functions<R: Real>(n: usize, q: R, hbar: R) -> Vec<R> {
    let x = q / hbar.sqrt();
    let two = lit::<R>(2.0);
    let mut out = Vec::with_capacity(n + 1);
    let psi0 = (R::PI() * hbar).powf(lit(-0.25)) * (-x * x / two).exp();
    out.push(psi0);
    if n >= 1 {
        out.push(two.sqrt() * x * psi0);
    }
    for k in 1..n {
        let kf: R = from_usize(k);
        let next = (two / (kf + R::one())).sqrt() * x * out[k] - (kf / (kf + R::one())).sqrt() * out[k - 1];
        out.push(next);
    }
    out
}

/// The `n`-th normalized eigenfunction at `q`.
pub fn hermite_function<R: Real>(n: usize, q: R, hbar: R) -> R {
    hermite_functions(n, q, hbar)[n]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_explicit_low_orders() {
        let hbar: f64 = 0.7;
        for &q in &[-1.3f64, 0.0, 0.4, 2.2] {
            let x: f64 = q / hbar.sqrt();
            let g = (std::f64::consts::PI * hbar).powf(-0.25) * (-x * x / 2.0).exp();
            let v = hermite_functions(2, q, hbar);
            assert!((v[0] - g).abs() < 1e-15);
            assert!((v[1] - 2f64.sqrt() * x * g).abs() < 1e-15);
            assert!((v[2] - (2.0 * x * x - 1.0) / 2f64.sqrt() * g).abs() < 1e-14);
        }
    }
}
