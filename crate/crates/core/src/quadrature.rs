//! Quadrature rules: composite Gauss–Legendre, tanh-sinh for endpoint
//! singularities, and the periodic trapezoid rule.

use std::ops::{AddAssign, Mul};

use num_traits::Zero;

use crate::scalar::{from_usize, lit, Real};

/// Values that can be accumulated by a quadrature rule.
pub trait Integrand<R>: Copy + Zero + AddAssign + Mul<R, Output = Self> {}
impl<R, T> Integrand<R> for T where T: Copy + Zero + AddAssign + Mul<R, Output = T> {}

/// Gauss–Legendre rule on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussLegendre<R> {
    nodes: Vec<R>,
    weights: Vec<R>,
}

impl<R: Real> GaussLegendre<R> {
    /// Nodes are found by Newton iteration on the three-term recurrence,
    /// carried out in `f64` and converted to `R`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss–Legendre rule needs at least one node");
        let mut nodes = vec![R::zero(); n];
        let mut weights = vec![R::zero(); n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = lit(-x);
            nodes[n - 1 - i] = lit(x);
            weights[i] = lit(w);
            weights[n - 1 - i] = lit(w);
        }
        if n % 2 == 1 {
            nodes[n / 2] = R::zero();
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped onto `[a, b]`.
    pub fn mapped(&self, a: R, b: R) -> impl Iterator<Item = (R, R)> + '_ {
        let half = (b - a) / lit(2.0);
        let mid = (a + b) / lit(2.0);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate<T: Integrand<R>>(&self, a: R, b: R, mut f: impl FnMut(R) -> T) -> T {
        let mut acc = T::zero();
        for (x, w) in self.mapped(a, b) {
            acc += f(x) * w;
        }
        acc
    }

    /// Composite rule over consecutive `edges`.
    pub fn integrate_panels<T: Integrand<R>>(&self, edges: &[R], mut f: impl FnMut(R) -> T) -> T {
        let mut acc = T::zero();
        for pair in edges.windows(2) {
            acc += self.integrate(pair[0], pair[1], &mut f);
        }
        acc
    }

    /// All nodes and weights of the composite rule over `edges`.
    pub fn composite_nodes(&self, edges: &[R]) -> Vec<(R, R)> {
        edges
            .windows(2)
            .flat_map(|pair| self.mapped(pair[0], pair[1]).collect::<Vec<_>>())
            .collect()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p, d)
}

/// `n` equal panels on `[a, b]`.
pub fn uniform_edges<R: Real>(a: R, b: R, n: usize) -> Vec<R> {
    let w = (b - a) / from_usize(n);
    (0..=n)
        .map(|i| if i == n { b } else { a + from_usize::<R>(i) * w })
        .collect()
}

/// Panel edges on `[a, b]` with geometric refinement towards the chosen
/// endpoints. Panel widths start at `min_width`, double, and are capped at
/// `max_width`.
pub fn graded_edges<R: Real>(
    a: R,
    b: R,
    min_width: R,
    max_width: R,
    grade_left: bool,
    grade_right: bool,
) -> Vec<R> {
    let len = b - a;
    let two = lit::<R>(2.0);
    let ramp = |limit: R| {
        let mut widths = Vec::new();
        let mut w = min_width;
        let mut total = R::zero();
        while w < max_width && total + w <= limit {
            widths.push(w);
            total += w;
            w *= two;
        }
        (widths, total)
    };
    let ends = usize::from(grade_left) + usize::from(grade_right);
    let share = if ends == 0 { R::zero() } else { len / from_usize(2 * ends) };
    let (left, lsum) = if grade_left { ramp(share) } else { (Vec::new(), R::zero()) };
    let (right, rsum) = if grade_right { ramp(share) } else { (Vec::new(), R::zero()) };
    let middle = len - lsum - rsum;
    let n_mid = (middle / max_width).ceil().to_usize().unwrap_or(1).max(1);

    let mut edges = Vec::with_capacity(left.len() + right.len() + n_mid + 1);
    let mut x = a;
    edges.push(x);
    for w in &left {
        x += *w;
        edges.push(x);
    }
    let start = x;
    let stop = b - rsum;
    for i in 1..=n_mid {
        edges.push(start + (stop - start) * from_usize::<R>(i) / from_usize(n_mid));
    }
    let mut x = stop;
    for w in right.iter().rev() {
        x += *w;
        edges.push(x);
    }
    if let Some(last) = edges.last_mut() {
        *last = b;
    }
    edges
}

/// Periodic trapezoid rule on `[0, 2π)` with `n` equispaced nodes.
pub fn periodic_trapezoid<R: Real, T: Integrand<R>>(n: usize, mut f: impl FnMut(R) -> T) -> T {
    let step = R::TAU() / from_usize(n);
    let mut acc = T::zero();
    for k in 0..n {
        acc += f(from_usize::<R>(k) * step);
    }
    acc * step
}

/// Trapezoid weights for samples on a uniform non-periodic grid.
pub fn trapezoid_weights<R: Real>(count: usize, spacing: R) -> Vec<R> {
    let mut w = vec![spacing; count];
    if count > 1 {
        w[0] = spacing / lit(2.0);
        w[count - 1] = spacing / lit(2.0);
    }
    w
}

/// Tanh-sinh (double exponential) rule on `(-1, 1)`; the integrand is never
/// evaluated at the endpoints, so integrable endpoint singularities are fine.
#[derive(Clone, Debug)]
pub struct TanhSinh<R> {
    nodes: Vec<R>,
    weights: Vec<R>,
}

impl<R: Real> TanhSinh<R> {
    /// Step `2^{-level}` truncated where the weights underflow.
    pub fn new(level: u32) -> Self {
        let step = 0.5f64.powi(level as i32);
        let half_pi = std::f64::consts::FRAC_PI_2;
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        let mut k: i64 = 0;
        loop {
            let t = k as f64 * step;
            let u = half_pi * t.sinh();
            let x = u.tanh();
            let w = step * half_pi * t.cosh() / (u.cosh() * u.cosh());
            if w < 1e-300 || 1.0 - x <= f64::EPSILON * 0.5 {
                break;
            }
            if k == 0 {
                nodes.push(lit(0.0));
                weights.push(lit(w));
            } else {
                nodes.push(lit(x));
                weights.push(lit(w));
                nodes.push(lit(-x));
                weights.push(lit(w));
            }
            k += 1;
        }
        Self { nodes, weights }
    }

    pub fn integrate<T: Integrand<R>>(&self, a: R, b: R, mut f: impl FnMut(R) -> T) -> T {
        let half = (b - a) / lit(2.0);
        let mid = (a + b) / lit(2.0);
        let mut acc = T::zero();
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc += f(mid + half * x) * (half * w);
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use num_complex::Complex;

    #[test]
    fn gauss_legendre_is_exact_for_polynomials() {
        let rule = GaussLegendre::<f64>::new(6);
        let val = rule.integrate(0.0, 2.0, |x| x.powi(11));
        assert_relative_eq!(val, 2f64.powi(12) / 12.0, max_relative = 1e-13);
        let w: f64 = rule.mapped(-1.0, 1.0).map(|(_, w)| w).sum();
        assert_relative_eq!(w, 2.0, max_relative = 1e-14);
    }

    #[test]
    fn gauss_legendre_odd_rule_is_symmetric() {
        let rule = GaussLegendre::<f64>::new(7);
        let val = rule.integrate(-1.0, 1.0, |x| x.powi(3) + 1.0);
        assert_relative_eq!(val, 2.0, max_relative = 1e-14);
    }

    #[test]
    fn complex_integrand() {
        let rule = GaussLegendre::<f64>::new(20);
        let val = rule.integrate(0.0, std::f64::consts::PI, |x| Complex::from_polar(1.0, x));
        assert!((val - Complex::new(0.0, 2.0)).norm() < 1e-13);
    }

    #[test]
    fn graded_edges_cover_interval_monotonically() {
        let e = graded_edges::<f64>(0.0, 3.0, 1e-5, 0.25, true, true);
        assert_eq!(e[0], 0.0);
        assert_eq!(*e.last().unwrap(), 3.0);
        assert!(e.windows(2).all(|w| w[1] > w[0]));
        assert!((e[1] - 1e-5).abs() < 1e-18);
        assert!(e.windows(2).all(|w| w[1] - w[0] <= 0.25 + 1e-12));
    }

    #[test]
    fn tanh_sinh_handles_endpoint_singularity() {
        let rule = TanhSinh::<f64>::new(6);
        // ∫_{-1}^{1} (1-x²)^{-1/2} dx = π
        let val = rule.integrate(-1.0, 1.0, |x| 1.0 / (1.0 - x * x).max(1e-300).sqrt());
        assert_relative_eq!(val, std::f64::consts::PI, max_relative = 1e-7);
    }

    #[test]
    fn periodic_trapezoid_is_spectral() {
        let val: f64 = periodic_trapezoid(32, |t: f64| (t.cos()).exp());
        // 2π I₀(1)
        assert_relative_eq!(val, 2.0 * std::f64::consts::PI * 1.266_065_877_752_008_4, max_relative = 1e-14);
    }
}
