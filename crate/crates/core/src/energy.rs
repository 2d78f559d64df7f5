//! Energy representation regularized by the toric flow: monomial
//! eigensections, the operator `ĥ₂^μ`, the map `U₂`, and the Bohr–Sommerfeld
//! limit states.

use num_complex::Complex;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::families::{symplectic_potential_d2, w_coord, SecondTypeFamily};
use crate::grid::UniformGrid;
use crate::phase::{ActionAngle, FdOrder, Trivialization};
use crate::quadrature::{graded_edges, periodic_trapezoid, trapezoid_weights, GaussLegendre, TanhSinh};
use crate::richardson::extrapolate_to_zero;
use crate::scalar::{from_usize, lit, Real};
use crate::schrodinger::{
    prequantum_op, HalfFormLabel, Observable, Polarization, PolarizedSectionSample, SectionGrid,
};

type C<R> = Complex<R>;

/// Bohr–Sommerfeld level `ħ(m+½)`.
pub fn level<R: Real>(m: usize, hbar: R) -> R {
    hbar * (from_usize::<R>(m) + lit(0.5))
}

/// Normalization making the `t₂ → ∞` limit of `U₂φ_m` a unit-coefficient
/// delta on the level circle:
/// `2^{−m/2−1/4} (2πħ)^{−1/2} (ħ(m+½))^{−m/2−1/4} e^{m/2+1/4}`.
pub fn a_m_closed_form<R: Real>(m: usize, hbar: R) -> R {
    let e = from_usize::<R>(m) / lit(2.0) + lit(0.25);
    let two = lit::<R>(2.0);
    two.powf(-e) * (R::TAU() * hbar).powf(lit(-0.5)) * level(m, hbar).powf(-e) * e.exp()
}

/// The alternative constant with `e^{m/2+1/2}` in place of `e^{m/2+1/4}`.
pub fn a_m_alternative<R: Real>(m: usize, hbar: R) -> R {
    a_m_closed_form(m, hbar) * lit::<R>(0.25).exp()
}

/// `φ_m` at flow time `t₂`, with normalization `a_m`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MonomialSection<R> {
    pub m: usize,
    pub t2: R,
    pub a_m: R,
    pub hbar: R,
}

impl<R: Real> MonomialSection<R> {
    pub fn new(m: usize, t2: R, hbar: R) -> Result<Self> {
        SecondTypeFamily::new(t2)?;
        if !(hbar > R::zero()) {
            return Err(Error::domain("hbar must be positive"));
        }
        Ok(Self { m, t2, a_m: a_m_closed_form(m, hbar), hbar })
    }

    fn check(&self, aa: ActionAngle<R>) -> Result<()> {
        if aa.h > R::zero() && aa.h.is_finite() {
            Ok(())
        } else {
            Err(Error::domain(format!("monomial sections need h > 0, got {}", aa.h)))
        }
    }

    /// Real radial factor `a_m 2^{m/2+1/4} h^{m/2+1/4} e^{−h/2ħ} e^{−t(h−E)²/2ħ}`.
    fn radial(&self, h: R) -> R {
        let e = from_usize::<R>(self.m) / lit(2.0) + lit(0.25);
        let two = lit::<R>(2.0);
        let en = level(self.m, self.hbar);
        let d = h - en;
        self.a_m * (two * h).powf(e) * (-h / (two * self.hbar) - self.t2 * d * d / (two * self.hbar)).exp()
    }

    fn angular(&self, theta: R) -> C<R> {
        C::from_polar(R::one(), (from_usize::<R>(self.m) + lit(0.5)) * theta)
    }

    /// Scalar coefficient of `√du` in `σ̃`, expanded form; it includes the
    /// ramified angular factor `e^{i(m+½)θ}`.
    pub fn expanded(&self, aa: ActionAngle<R>) -> Result<C<R>> {
        self.check(aa)?;
        let en = level(self.m, self.hbar);
        let growth = (self.t2 * en * en / (lit::<R>(2.0) * self.hbar)).exp();
        Ok(self.angular(aa.theta) * (self.radial(aa.h) * growth))
    }

    /// `a_m w^m e^{−(t h² + h)/2ħ} √w`, i.e. the monomial form rewritten in the
    /// `√du` frame through `√dw = √w √du`.
    pub fn monomial(&self, aa: ActionAngle<R>) -> Result<C<R>> {
        self.check(aa)?;
        let fam = SecondTypeFamily { t2: self.t2 };
        let w = w_coord(aa, fam)?;
        let two = lit::<R>(2.0);
        let sqrt_w = C::from_polar(w.norm().sqrt(), aa.theta / two);
        let weight = (-(self.t2 * aa.h * aa.h + aa.h) / (two * self.hbar)).exp();
        Ok(w.powu(self.m as u32) * sqrt_w * (self.a_m * weight))
    }

    /// `U₂φ_m`: the expanded form without the growth `e^{tE²/2ħ}`.
    pub fn regularized(&self, aa: ActionAngle<R>) -> Result<C<R>> {
        self.check(aa)?;
        Ok(self.angular(aa.theta) * self.radial(aa.h))
    }
}

/// Expanded-form value of `φ_m` at `t₂`.
pub fn phi_m<R: Real>(m: usize, t2: R, aa: ActionAngle<R>, hbar: R) -> Result<C<R>> {
    MonomialSection::new(m, t2, hbar)?.expanded(aa)
}

fn sample<R: Real>(
    h_grid: &UniformGrid<R>,
    theta_grid: &UniformGrid<R>,
    t2: R,
    hbar: R,
    f: impl Fn(ActionAngle<R>) -> Result<C<R>>,
) -> Result<PolarizedSectionSample<R>> {
    if h_grid.min <= R::zero() {
        return Err(Error::domain("energy sections are sampled on h > 0"));
    }
    let mut values = Vec::with_capacity(h_grid.count * theta_grid.count);
    for h in h_grid.points() {
        for theta in theta_grid.points() {
            values.push(f(ActionAngle::new(h, theta))?);
        }
    }
    Ok(PolarizedSectionSample {
        grid: SectionGrid::ActionAngle { h: *h_grid, theta: *theta_grid },
        values,
        family: Polarization::SecondType(SecondTypeFamily { t2 }),
        trivialization: Trivialization::SigmaTilde,
        halfform: HalfFormLabel::Du { t2 },
        ramified: true,
        hbar,
    })
}

/// Samples of `φ_m^{(it)}` on an `(h, θ)` grid.
pub fn phi_m_section<R: Real>(
    m: usize,
    t2: R,
    h_grid: &UniformGrid<R>,
    theta_grid: &UniformGrid<R>,
    hbar: R,
) -> Result<PolarizedSectionSample<R>> {
    let s = MonomialSection::new(m, t2, hbar)?;
    sample(h_grid, theta_grid, t2, hbar, |aa| s.expanded(aa))
}

/// Samples of `U₂^{it}(φ_m^{(0)})` on an `(h, θ)` grid.
pub fn u2_map<R: Real>(
    m: usize,
    t2: R,
    h_grid: &UniformGrid<R>,
    theta_grid: &UniformGrid<R>,
    hbar: R,
) -> Result<PolarizedSectionSample<R>> {
    let s = MonomialSection::new(m, t2, hbar)?;
    sample(h_grid, theta_grid, t2, hbar, |aa| s.regularized(aa))
}

/// Applies `G(H̃^{pQ})` with `H̃^{pQ} = −iħ∂_θ` spectrally on each `h` row, where
/// `G(x) = x²/2`.
pub fn h2_mu<R: Real>(section: &PolarizedSectionSample<R>) -> Result<PolarizedSectionSample<R>> {
    h_tilde_function(section, |x| x * x / lit(2.0))
}

/// `−iħ∂_θ` applied spectrally.
pub fn h_tilde<R: Real>(section: &PolarizedSectionSample<R>) -> Result<PolarizedSectionSample<R>> {
    h_tilde_function(section, |x| x)
}

fn h_tilde_function<R: Real>(
    section: &PolarizedSectionSample<R>,
    g: impl Fn(R) -> R,
) -> Result<PolarizedSectionSample<R>> {
    let SectionGrid::ActionAngle { theta, .. } = section.grid else {
        return Err(Error::Unsupported("spectral angular operators need action-angle samples".into()));
    };
    if section.trivialization != Trivialization::SigmaTilde {
        return Err(Error::Unsupported("spectral angular operators act in σ̃".into()));
    }
    let (n1, n) = section.grid.shape();
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let offset = if section.ramified { lit::<R>(0.5) } else { R::zero() };
    let dtheta = theta.spacing();
    let strip: Vec<C<R>> = (0..n)
        .map(|j| C::from_polar(R::one(), -offset * (theta.min + from_usize::<R>(j) * dtheta)))
        .collect();
    let hbar = section.hbar;
    let nr: R = from_usize(n);
    let mut values = Vec::with_capacity(section.values.len());
    for a in 0..n1 {
        let mut buf: Vec<C<R>> = (0..n).map(|j| section.values[a * n + j] * strip[j]).collect();
        fwd.process(&mut buf);
        for (k, v) in buf.iter_mut().enumerate() {
            let freq = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
            // the Nyquist mode is ambiguous; drop it
            let factor = if n % 2 == 0 && k == n / 2 { R::zero() } else { g(hbar * (lit::<R>(freq) + offset)) };
            *v *= factor / nr;
        }
        inv.process(&mut buf);
        values.extend(buf.iter().zip(&strip).map(|(v, s)| *v * s.conj()));
    }
    Ok(PolarizedSectionSample { values, ..section.clone() })
}

/// Relative sup-norm residual of `op(s) − λ s`.
pub fn eigen_residual<R: Real>(out: &PolarizedSectionSample<R>, input: &PolarizedSectionSample<R>, lambda: R) -> R {
    let scale = input.sup_norm().max(R::min_positive_value());
    out.values
        .iter()
        .zip(&input.values)
        .map(|(a, b)| (*a - *b * lambda).norm())
        .fold(R::zero(), R::max)
        / scale
}

fn time_derivative<R: Real>(
    t2: R,
    dt: R,
    at: impl Fn(R) -> Result<PolarizedSectionSample<R>>,
) -> Result<Vec<C<R>>> {
    let two = lit::<R>(2.0);
    if t2 >= two * dt {
        let (a, b) = (at(t2 + dt)?, at(t2 - dt)?);
        Ok(a.values.iter().zip(&b.values).map(|(x, y)| (*x - *y) / (two * dt)).collect())
    } else {
        let (u0, u1, u2) = (at(t2)?, at(t2 + dt)?, at(t2 + two * dt)?);
        Ok(u0
            .values
            .iter()
            .zip(&u1.values)
            .zip(&u2.values)
            .map(|((a, b), c)| (*a * lit::<R>(-3.0) + *b * lit::<R>(4.0) - *c) / (two * dt))
            .collect())
    }
}

/// Flow check `d/dt φ_m^{(it)} = (1/ħ) ĥ₂^{pQ} φ_m^{(it)}` (frame carried
/// symbolically); returns the sup norm of the mismatch relative to the
/// section's sup norm.
pub fn phi_flow_check<R: Real>(
    m: usize,
    t2: R,
    dt: R,
    h_grid: &UniformGrid<R>,
    theta_grid: &UniformGrid<R>,
    hbar: R,
    order: FdOrder,
) -> Result<R> {
    let deriv = time_derivative(t2, dt, |t| phi_m_section(m, t, h_grid, theta_grid, hbar))?;
    let s = phi_m_section(m, t2, h_grid, theta_grid, hbar)?;
    let pq = prequantum_op(Observable::H2, &s, order)?;
    let sup = deriv
        .iter()
        .zip(&pq.section.values)
        .map(|(d, g)| (*d - *g / hbar).norm())
        .fold(R::zero(), R::max);
    Ok(sup / s.sup_norm())
}

/// Generator check of `U₂ = e^{−(t/ħ)ĥ₂^μ} ∘ e^{(t/ħ)ĥ₂^{pQ}}`:
/// `d/dt U₂ = (1/ħ)(ĥ₂^{pQ} − ĥ₂^μ) U₂`, relative sup norm.
pub fn u2_consistency_check<R: Real>(
    m: usize,
    t2: R,
    dt: R,
    h_grid: &UniformGrid<R>,
    theta_grid: &UniformGrid<R>,
    hbar: R,
    order: FdOrder,
) -> Result<R> {
    let deriv = time_derivative(t2, dt, |t| u2_map(m, t, h_grid, theta_grid, hbar))?;
    let s = u2_map(m, t2, h_grid, theta_grid, hbar)?;
    let pq = prequantum_op(Observable::H2, &s, order)?;
    let mu = h2_mu(&s)?;
    let sup = deriv
        .iter()
        .zip(pq.section.values.iter().zip(&mu.values))
        .map(|(d, (a, b))| (*d - (*a - *b) / hbar).norm())
        .fold(R::zero(), R::max);
    Ok(sup / s.sup_norm())
}

/// `∫∫ conj(a) b √g″(h) dh dθ` on a shared action-angle grid.
pub fn section_inner<R: Real>(a: &PolarizedSectionSample<R>, b: &PolarizedSectionSample<R>) -> Result<C<R>> {
    let SectionGrid::ActionAngle { h, theta } = a.grid else {
        return Err(Error::Unsupported("section inner product needs action-angle samples".into()));
    };
    if a.grid != b.grid {
        return Err(Error::domain("sections live on different grids"));
    }
    let Polarization::SecondType(fam) = a.family else {
        return Err(Error::Unsupported("section inner product needs second-type sections".into()));
    };
    let wh = trapezoid_weights(h.count, h.spacing());
    let dtheta = theta.spacing();
    let n = theta.count;
    let mut acc = C::new(R::zero(), R::zero());
    for (i, w) in wh.iter().enumerate() {
        let g2 = symplectic_potential_d2(h.point(i), fam)?.sqrt();
        let mut row = C::new(R::zero(), R::zero());
        for j in 0..n {
            row += a.values[i * n + j].conj() * b.values[i * n + j];
        }
        acc += row * (g2 * *w * dtheta);
    }
    Ok(acc)
}

/// Mean and standard deviation of the `h`-profile `|U₂φ_m|²`.
pub fn u2_h_profile<R: Real>(m: usize, t2: R, hbar: R) -> Result<(R, R)> {
    let s = MonomialSection::new(m, t2, hbar)?;
    let en = level(m, hbar);
    let width = (hbar / (lit::<R>(2.0) * t2 + en.recip())).sqrt();
    let lo = (en - lit::<R>(14.0) * width).max(R::zero());
    let hi = en + lit::<R>(14.0) * width;
    let density = |h: R| s.radial(h).powi(2);
    let moments = |k: i32| -> R {
        if lo > R::zero() {
            let rule = GaussLegendre::new(24);
            let edges = graded_edges(lo, hi, width, width, false, false);
            rule.integrate_panels(&edges, |h| density(h) * h.powi(k))
        } else {
            TanhSinh::new(7).integrate(lo, hi, |h| if h > R::zero() { density(h) * h.powi(k) } else { R::zero() })
        }
    };
    let (m0, m1, m2) = (moments(0), moments(1), moments(2));
    let mean = m1 / m0;
    Ok((mean, (m2 / m0 - mean * mean).max(R::zero()).sqrt()))
}

/// `δ(h − ħ(m+½)) e^{imθ} √dh`, stored analytically.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BohrSommerfeldState<R> {
    pub m: usize,
    pub energy: R,
}

impl<R: Real> BohrSommerfeldState<R> {
    pub fn new(m: usize, hbar: R) -> Self {
        Self { m, energy: level(m, hbar) }
    }

    /// `∫ test(E, θ) e^{imθ} dθ` with `n` trapezoid nodes.
    pub fn pair(&self, test: impl Fn(R, R) -> C<R>, n: usize) -> C<R> {
        let m: R = from_usize(self.m);
        periodic_trapezoid(n, |theta: R| test(self.energy, theta) * C::from_polar(R::one(), m * theta))
    }
}

/// Pairing of the Bohr–Sommerfeld state of level `m` against a test function.
pub fn bks_delta_limit<R: Real>(m: usize, hbar: R, test: impl Fn(R, R) -> C<R>) -> C<R> {
    BohrSommerfeldState::new(m, hbar).pair(test, 256)
}

fn radial_window<R: Real>(en: R, hbar: R, t2: R) -> (R, R) {
    let sigma = (hbar / t2).sqrt();
    ((en - lit::<R>(12.0) * sigma).max(R::zero()), en + lit::<R>(12.0) * sigma)
}

fn radial_integral<R: Real>(en: R, hbar: R, t2: R, f: impl Fn(R) -> C<R>) -> C<R> {
    let (lo, hi) = radial_window(en, hbar, t2);
    if lo > R::zero() {
        let edges = graded_edges(lo, hi, hi - lo, (hi - lo) / lit(8.0), false, false);
        GaussLegendre::new(24).integrate_panels(&edges, f)
    } else {
        TanhSinh::new(7).integrate(lo, hi, |h| if h > R::zero() { f(h) } else { C::new(R::zero(), R::zero()) })
    }
}

/// `∫∫ U₂φ_m · e^{−iθ/2} · √(1/2h + t) · test(h, θ) dh dθ`; the half-form
/// `√du` is read against `√dh`, and the ramification factor is divided out.
pub fn u2_test_pairing<R: Real>(m: usize, t2: R, hbar: R, test: impl Fn(R, R) -> C<R>) -> Result<C<R>> {
    if !(t2 > R::zero()) {
        return Err(Error::domain("finite-time test pairing needs t2 > 0"));
    }
    let s = MonomialSection::new(m, t2, hbar)?;
    let en = level(m, hbar);
    let fam = SecondTypeFamily { t2 };
    let mm: R = from_usize(m);
    Ok(radial_integral(en, hbar, t2, |h| {
        let jac = symplectic_potential_d2(h, fam).map(|g| g.sqrt()).unwrap_or(R::zero());
        let ang = periodic_trapezoid(128, |theta: R| test(h, theta) * C::from_polar(R::one(), mm * theta));
        ang * (s.radial(h) * jac)
    }))
}

/// Default `t₂` ladder for the delta limit: `t₀ = 400ħ/E²`, doubling.
pub fn default_t2_ladder<R: Real>(m: usize, hbar: R, len: usize) -> Vec<R> {
    let en = level(m, hbar);
    let t0 = lit::<R>(400.0) * hbar / (en * en);
    (0..len).map(|j| t0 * lit::<R>(2f64.powi(j as i32))).collect()
}

/// Extrapolated (`1/t₂ → 0`) value of [`u2_test_pairing`].
pub fn u2_delta_limit<R: Real>(
    m: usize,
    hbar: R,
    ladder: &[R],
    test: impl Fn(R, R) -> C<R> + Copy,
) -> Result<crate::richardson::Extrapolated<R>> {
    let xs: Vec<R> = ladder.iter().map(|t| t.recip()).collect();
    let ys = ladder.iter().map(|&t| u2_test_pairing(m, t, hbar, test)).collect::<Result<Vec<_>>>()?;
    extrapolate_to_zero(&xs, &ys, 4)
}

/// Outcome of [`calibrate_a_m`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Calibration<R> {
    pub m: usize,
    pub a_m: R,
    pub estimated_error: R,
    pub closed_form: R,
    pub alternative: R,
    /// `|a_m/closed_form − 1|`.
    pub closed_form_gap: R,
    /// `|a_m/alternative − 1|`.
    pub alternative_gap: R,
}

/// Fixes `a_m` from the requirement that `U₂φ_m` tends to a unit-coefficient
/// delta on the level circle: the `√dh`-density integral of the unnormalized
/// radial profile is extrapolated along a `t₂` ladder and inverted.
pub fn calibrate_a_m<R: Real>(m: usize, hbar: R) -> Result<Calibration<R>> {
    let ladder = default_t2_ladder(m, hbar, 8);
    let en = level(m, hbar);
    let closed = a_m_closed_form(m, hbar);
    let xs: Vec<R> = ladder.iter().map(|t| t.recip()).collect();
    let ys: Vec<C<R>> = ladder
        .iter()
        .map(|&t2| {
            let s = MonomialSection { m, t2, a_m: R::one(), hbar };
            let fam = SecondTypeFamily { t2 };
            radial_integral(en, hbar, t2, |h| {
                let jac = symplectic_potential_d2(h, fam).map(|g| g.sqrt()).unwrap_or(R::zero());
                C::new(s.radial(h) * jac, R::zero())
            })
        })
        .collect();
    let ex = extrapolate_to_zero(&xs, &ys, 4)?;
    let c = ex.value.re;
    if !(c > R::zero()) {
        return Err(Error::not_converged("calibration integral is not positive", format!("c={c}")));
    }
    let a = c.recip();
    let alternative = a_m_alternative(m, hbar);
    Ok(Calibration {
        m,
        a_m: a,
        estimated_error: ex.error / c * a,
        closed_form: closed,
        alternative,
        closed_form_gap: (a / closed - R::one()).abs(),
        alternative_gap: (a / alternative - R::one()).abs(),
    })
}

/// Corrected levels `ħ(m+½)` for `m = 0..=m_max`.
pub fn spectrum<R: Real>(m_max: usize, hbar: R) -> Vec<R> {
    (0..=m_max).map(|m| level(m, hbar)).collect()
}

/// Uncorrected levels `ħm`.
pub fn uncorrected_spectrum<R: Real>(m_max: usize, hbar: R) -> Vec<R> {
    (0..=m_max).map(|m| hbar * from_usize::<R>(m)).collect()
}

/// Residual of the finite-difference angular eigenrelation
/// `ĥ^{pQ} φ_m = ħ(m+½) φ_m`, relative to the sup norm.
pub fn angular_eigen_residual<R: Real>(
    m: usize,
    t2: R,
    h_grid: &UniformGrid<R>,
    theta_grid: &UniformGrid<R>,
    hbar: R,
    order: FdOrder,
) -> Result<R> {
    let s = phi_m_section(m, t2, h_grid, theta_grid, hbar)?;
    let out = prequantum_op(Observable::H, &s, order)?;
    Ok(eigen_residual(&out.section, &s, level(m, hbar)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{PI, TAU};

    fn grids(nh: usize, nt: usize) -> (UniformGrid<f64>, UniformGrid<f64>) {
        (UniformGrid::new(0.05, 4.0, nh), UniformGrid::angle(nt))
    }

    #[test]
    fn ground_value_at_level() {
        let hbar = 1.0;
        let v = phi_m(0, 0.0, ActionAngle::new(hbar / 2.0, 0.0), hbar).unwrap();
        let expect = a_m_closed_form(0, hbar) * 2f64.powf(0.25) * (hbar / 2.0).powf(0.25) * (-0.25f64).exp();
        assert!((v - Complex::new(expect, 0.0)).norm() < 1e-15);
        assert!(phi_m(0, 0.0, ActionAngle::new(0.0, 0.0), hbar).is_err());
    }

    #[test]
    fn calibration_selects_closed_form() {
        for m in 0..=5 {
            for hbar in [1.0, 0.3] {
                let c = calibrate_a_m(m, hbar).unwrap();
                assert!(c.a_m > 0.0);
                assert!(c.closed_form_gap < 1e-8, "m={m} gap={}", c.closed_form_gap);
                assert!((c.alternative_gap - (1.0 - (-0.25f64).exp())).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn h2_mu_eigenvalue() {
        let (hg, tg) = grids(20, 64);
        let s = phi_m_section(1, 0.4, &hg, &tg, 1.0).unwrap();
        let out = h2_mu(&s).unwrap();
        let r = eigen_residual(&out, &s, 0.5 * 1.5f64.powi(2));
        assert!(r < 1e-12, "{r}");
        let s = phi_m_section(3, 0.0, &hg, &tg, 0.5).unwrap();
        let out = h_tilde(&s).unwrap();
        assert!(eigen_residual(&out, &s, 0.5 * 3.5) < 1e-12);
    }

    #[test]
    fn angular_finite_difference_converges_quadratically() {
        let hg = UniformGrid::new(0.2, 2.0, 16);
        let res: Vec<f64> = [32, 64, 128]
            .iter()
            .map(|&n| angular_eigen_residual(2, 0.3, &hg, &UniformGrid::angle(n), 1.0, FdOrder::Second).unwrap())
            .collect();
        let slope = (res[0] / res[2]).log2() / 2.0;
        assert!((slope - 2.0).abs() < 0.2, "{res:?}");
    }

    #[test]
    fn generator_checks() {
        let (hg, tg) = grids(24, 128);
        for t in [0.0, 0.5] {
            let r = u2_consistency_check(2, t, 1e-4, &hg, &tg, 1.0, FdOrder::Fourth).unwrap();
            assert!(r < 1e-4, "t={t}: {r}");
            let r = phi_flow_check(2, t, 1e-4, &hg, &tg, 1.0, FdOrder::Fourth).unwrap();
            assert!(r < 1e-4, "t={t}: {r}");
        }
    }

    #[test]
    fn orthogonality() {
        let (hg, tg) = grids(40, 64);
        let a = phi_m_section(1, 0.7, &hg, &tg, 1.0).unwrap();
        let b = phi_m_section(3, 0.7, &hg, &tg, 1.0).unwrap();
        let scale = section_inner(&a, &a).unwrap().norm();
        assert!(section_inner(&a, &b).unwrap().norm() < 1e-12 * scale);
    }

    #[test]
    fn u2_at_zero_time_is_phi() {
        let (hg, tg) = grids(16, 16);
        let u = u2_map(2, 0.0, &hg, &tg, 1.0).unwrap();
        let p = phi_m_section(2, 0.0, &hg, &tg, 1.0).unwrap();
        assert_eq!(u.values, p.values);
    }

    #[test]
    fn profile_width() {
        let hbar = 1.0;
        for t in [1e2f64, 1e3] {
            let (mean, std): (f64, f64) = u2_h_profile(1, t, hbar).unwrap();
            let en: f64 = 1.5;
            assert!((mean - en).abs() < 2.0 / t);
            let asym = (hbar / (2.0 * t)).sqrt();
            assert!((std / asym - 1.0).abs() < 1.0 / (2.0 * t * en));
        }
    }

    #[test]
    fn delta_pairings() {
        let one = |_: f64, _: f64| Complex::new(1.0, 0.0);
        assert!((bks_delta_limit(0, 1.0, one) - Complex::new(TAU, 0.0)).norm() < 1e-13);
        let m = 3;
        let conj_mode = |_: f64, th: f64| Complex::from_polar(1.0, -(m as f64) * th);
        assert!((bks_delta_limit(m, 1.0, conj_mode) - Complex::new(TAU, 0.0)).norm() < 1e-13);
        let other = |_: f64, th: f64| Complex::from_polar(1.0, -5.0 * th);
        assert!(bks_delta_limit(m, 1.0, other).norm() < 1e-14);
    }

    #[test]
    fn finite_time_pairings_approach_delta_limit() {
        for m in [0, 2] {
            let test = move |h: f64, th: f64| {
                Complex::new(1.0 + 0.3 * th.cos(), 0.2 * (2.0 * th).sin())
                    * (-h).exp()
                    * Complex::from_polar(1.0, -(m as f64) * th)
            };
            let ladder = default_t2_ladder(m, 1.0, 8);
            let lim = u2_delta_limit(m, 1.0, &ladder, test).unwrap();
            let exact = bks_delta_limit(m, 1.0, test);
            assert!((lim.value - exact).norm() <= 1e-6 * exact.norm(), "m={m}");
        }
    }

    #[test]
    fn spectra() {
        assert_eq!(spectrum(2, 1.0), vec![0.5, 1.5, 2.5]);
        assert!((spectrum(0, 0.1f64)[0] - 0.05).abs() < 1e-17);
        let c = spectrum(10, 0.7f64);
        let u = uncorrected_spectrum(10, 0.7f64);
        assert!(c.iter().zip(&u).all(|(a, b)| (a - b - 0.35).abs() < 1e-15));
        let _ = PI;
    }

    proptest! {
        #[test]
        fn monomial_and_expanded_forms_agree(m in 0usize..=5, h in 0.05..5.0f64, th in 0.0..TAU, t in 0.0..3.0f64) {
            let s = MonomialSection::new(m, t, 1.0).unwrap();
            let aa = ActionAngle::new(h, th);
            let a = s.expanded(aa).unwrap();
            let b = s.monomial(aa).unwrap();
            prop_assert!((a - b).norm() <= 1e-12 * a.norm().max(1e-300));
        }
    }
}
