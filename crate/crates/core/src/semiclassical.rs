//! Semiclassical states `ψ_{L_m} = ψ⁺ + ψ⁻` on the level circles, their
//! relative phase, and comparisons with exact and WKB wavefunctions.

use num_complex::Complex;
use serde::Serialize;

use crate::energy::level;
use crate::error::{Error, Result};
use crate::fd::derivative_at;
use crate::grid::UniformGrid;
use crate::phase::FdOrder;
use crate::quadrature::{trapezoid_weights, uniform_edges, GaussLegendre};
use crate::richardson::loglog_slope;
use crate::scalar::{from_usize, lit, sqrt_i_over_2, Real};
use crate::schrodinger::{h1_sch, SchrodingerState};
use crate::special::hermite_function;

type C<R> = Complex<R>;

/// Branch pair of the semiclassical state of level `m`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SemiclassicalState<R> {
    pub m: usize,
    pub hbar: R,
    /// `√(ħ(2m+1))`.
    pub caustic_q: R,
    /// Overall factor applied to both branches.
    pub global_phase: C<R>,
}

impl<R: Real> SemiclassicalState<R> {
    fn momentum(&self, q: R) -> Option<R> {
        let a2 = self.caustic_q * self.caustic_q;
        (q * q < a2).then(|| (a2 - q * q).sqrt())
    }

    /// Phase `q P/2ħ − m θ₊` shared (with opposite signs) by both branches.
    fn wkb_phase(&self, q: R, big_p: R) -> R {
        let theta = big_p.atan2(q);
        q * big_p / (lit::<R>(2.0) * self.hbar) - from_usize::<R>(self.m) * theta
    }

    /// `√(i/2) P^{−1/2} e^{−iqP/2ħ} e^{imθ₊}` on the open allowed interval, zero
    /// elsewhere; `θ₊ = atan2(P, q)` is the angle of the upper point.
    pub fn branch_plus(&self, q: R) -> C<R> {
        match self.momentum(q) {
            Some(p) if p > R::zero() => {
                self.global_phase * sqrt_i_over_2::<R>() * C::from_polar(p.powf(lit(-0.5)), -self.wkb_phase(q, p))
            }
            _ => C::new(R::zero(), R::zero()),
        }
    }

    /// `√(i/2) e^{iπ/2} P^{−1/2} e^{iqP/2ħ} e^{−imθ₊}`.
    pub fn branch_minus(&self, q: R) -> C<R> {
        match self.momentum(q) {
            Some(p) if p > R::zero() => {
                self.global_phase
                    * sqrt_i_over_2::<R>()
                    * C::new(R::zero(), R::one())
                    * C::from_polar(p.powf(lit(-0.5)), self.wkb_phase(q, p))
            }
            _ => C::new(R::zero(), R::zero()),
        }
    }

    pub fn value(&self, q: R) -> C<R> {
        self.branch_plus(q) + self.branch_minus(q)
    }

    pub fn with_global_phase(mut self, factor: C<R>) -> Self {
        self.global_phase *= factor;
        self
    }

    /// Samples on `q_grid`.
    pub fn sample(&self, q_grid: &UniformGrid<R>) -> Vec<C<R>> {
        q_grid.points().into_iter().map(|q| self.value(q)).collect()
    }

    /// `∫ conj(f) ψ dq` over the allowed interval via `q = a sin φ`.
    pub fn overlap_with(&self, f: impl Fn(R) -> C<R>, nodes: usize) -> C<R> {
        let a = self.caustic_q;
        let half_pi = R::FRAC_PI_2();
        let rule = GaussLegendre::<R>::new(nodes);
        let edges = uniform_edges(-half_pi, half_pi, 4);
        let mut acc = C::new(R::zero(), R::zero());
        for (phi, w) in rule.composite_nodes(&edges) {
            let q = a * phi.sin();
            acc += f(q).conj() * self.value(q) * (a * phi.cos() * w);
        }
        acc
    }

    /// `‖ψ‖` over the allowed interval; finite despite the caustic blow-up.
    pub fn norm(&self, nodes: usize) -> R {
        let a = self.caustic_q;
        let half_pi = R::FRAC_PI_2();
        let rule = GaussLegendre::<R>::new(nodes);
        let edges = uniform_edges(-half_pi, half_pi, 4);
        rule.composite_nodes(&edges)
            .into_iter()
            .map(|(phi, w)| self.value(a * phi.sin()).norm_sqr() * a * phi.cos() * w)
            .sum::<R>()
            .sqrt()
    }
}

/// The state of level `m`.
pub fn psi_lagrangian<R: Real>(m: usize, hbar: R) -> SemiclassicalState<R> {
    SemiclassicalState {
        m,
        hbar,
        caustic_q: (lit::<R>(2.0) * level(m, hbar)).sqrt(),
        global_phase: C::new(R::one(), R::zero()),
    }
}

/// `arg(ψ⁻/ψ⁺)` at `q` after dividing out the branch phases
/// `e^{∓iqP/2ħ} e^{±imθ₊}`.
pub fn maslov_phase_at<R: Real>(state: &SemiclassicalState<R>, q: R) -> Result<R> {
    let big_p = state
        .momentum(q)
        .filter(|p| *p > R::zero())
        .ok_or_else(|| Error::domain(format!("q = {q} is outside the allowed interval")))?;
    let phase = state.wkb_phase(q, big_p);
    let plus = state.branch_plus(q) * C::from_polar(R::one(), phase);
    let minus = state.branch_minus(q) * C::from_polar(R::one(), -phase);
    Ok((minus / plus).arg())
}

/// Relative phase at the centre of the allowed interval.
pub fn maslov_phase<R: Real>(state: &SemiclassicalState<R>) -> R {
    maslov_phase_at(state, R::zero()).expect("q = 0 is always allowed")
}

/// Normalized `m`-th oscillator eigenfunction on `q_grid`.
pub fn exact_eigenstate<R: Real>(m: usize, q_grid: UniformGrid<R>, hbar: R) -> Result<SchrodingerState<R>> {
    SchrodingerState::from_fn(q_grid, hbar, |q| C::new(hermite_function(m, q, hbar), R::zero()))
}

/// `‖Ĥψ − Eψ‖/‖ψ‖` on the grid with the kinetic term applied spectrally.
pub fn eigen_residual<R: Real>(psi: &SchrodingerState<R>, energy: R) -> R {
    let kin = h1_sch(psi);
    let g = psi.q_grid();
    let w = trapezoid_weights(g.count, g.spacing());
    let mut num = R::zero();
    for (j, q) in g.points().into_iter().enumerate() {
        let h = kin.psi_q()[j] + psi.psi_q()[j] * (q * q / lit(2.0)) - psi.psi_q()[j] * energy;
        num += h.norm_sqr() * w[j];
    }
    num.sqrt() / psi.norm()
}

/// `(2E − q²)^{−1/4} cos(S(q)/ħ − π/4)` with `S(q) = ∫_{−a}^{q} p dq′`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WkbReference<R> {
    pub m: usize,
    pub hbar: R,
    pub energy: R,
}

impl<R: Real> WkbReference<R> {
    /// `S(q) = qP/2 + E(arcsin(q/a) + π/2)`.
    pub fn action(&self, q: R) -> R {
        let a2 = lit::<R>(2.0) * self.energy;
        let a = a2.sqrt();
        let p = (a2 - q * q).max(R::zero()).sqrt();
        q * p / lit(2.0) + self.energy * ((q / a).max(-R::one()).min(R::one()).asin() + R::FRAC_PI_2())
    }

    pub fn value(&self, q: R) -> R {
        let a2 = lit::<R>(2.0) * self.energy;
        if q * q >= a2 {
            return R::zero();
        }
        (a2 - q * q).powf(lit(-0.25)) * (self.action(q) / self.hbar - R::FRAC_PI_4()).cos()
    }

    /// Sign changes on a fine interior grid.
    pub fn interior_nodes(&self, samples: usize) -> usize {
        let a = (lit::<R>(2.0) * self.energy).sqrt();
        let g = UniformGrid::new(-a, a, samples);
        let vals: Vec<R> = g.points()[1..samples - 1].iter().map(|q| self.value(*q)).collect();
        vals.windows(2).filter(|w| w[0] * w[1] < R::zero()).count()
    }
}

pub fn wkb_reference<R: Real>(m: usize, hbar: R) -> WkbReference<R> {
    WkbReference { m, hbar, energy: level(m, hbar) }
}

/// How far `ψ_{L_m}/wkb` is from a single complex constant.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ProportionalityReport<R> {
    pub constant_re: R,
    pub constant_im: R,
    /// `(max − min)/mean` of `|ψ_L/wkb|` over the sampled points.
    pub modulus_variation: R,
    /// Spread of `arg(ψ_L/wkb)` modulo π.
    pub phase_variation: R,
    pub samples: usize,
}

/// Compares `ψ_{L_m}` with the WKB reference on `|q| ≤ fraction·a`, skipping
/// points near zeros of the reference.
pub fn wkb_proportionality<R: Real>(m: usize, hbar: R, fraction: R, samples: usize) -> ProportionalityReport<R> {
    let state = psi_lagrangian(m, hbar);
    let wkb = wkb_reference(m, hbar);
    let a = state.caustic_q;
    let g = UniformGrid::new(-fraction * a, fraction * a, samples);
    let mut ratios = Vec::new();
    for q in g.points() {
        let amp = (a * a - q * q).powf(lit(-0.25));
        let w = wkb.value(q);
        if w.abs() > lit::<R>(0.2) * amp {
            ratios.push(state.value(q) / w);
        }
    }
    let n: R = from_usize(ratios.len().max(1));
    let mods: Vec<R> = ratios.iter().map(|r| r.norm()).collect();
    let max = mods.iter().copied().fold(R::zero(), R::max);
    let min = mods.iter().copied().fold(R::infinity(), R::min);
    let mean = mods.iter().copied().sum::<R>() / n;
    let reference = ratios.first().copied().unwrap_or(C::new(R::one(), R::zero()));
    let phase_variation = ratios
        .iter()
        .map(|r| {
            // ratios of real−valued profiles may flip sign: compare modulo π
            let d = (*r / reference).arg().abs();
            d.min((R::PI() - d).abs())
        })
        .fold(R::zero(), R::max);
    ProportionalityReport {
        constant_re: reference.re,
        constant_im: reference.im,
        modulus_variation: if ratios.is_empty() { R::nan() } else { (max - min) / mean },
        phase_variation,
        samples: ratios.len(),
    }
}

/// Parity behaviour of `ψ_{L_m}` under `q → −q`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ParityReport<R> {
    /// `max | |ψ(−q)| − |ψ(q)| | / max |ψ|` over the interior.
    pub modulus_asymmetry: R,
}

pub fn parity_report<R: Real>(m: usize, hbar: R, fraction: R, samples: usize) -> ParityReport<R> {
    let state = psi_lagrangian(m, hbar);
    let a = state.caustic_q;
    let g = UniformGrid::new(R::zero(), fraction * a, samples);
    let mut worst = R::zero();
    let mut scale = R::zero();
    for q in g.points() {
        let (x, y) = (state.value(q).norm(), state.value(-q).norm());
        worst = worst.max((x - y).abs());
        scale = scale.max(x).max(y);
    }
    ParityReport { modulus_asymmetry: worst / scale }
}

/// One row of [`residual_diagnostics`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ResidualRow<R> {
    pub hbar: R,
    /// `‖(Ĥ − E)ψ_L‖/‖ψ_L‖` on `|q| ≤ (1 − exclusion)·a`.
    pub residual: R,
    /// `|⟨ψ_exact, ψ_L⟩|/(‖ψ_exact‖‖ψ_L‖)`.
    pub overlap: R,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResidualTable<R> {
    pub m: usize,
    pub exclusion: R,
    pub rows: Vec<ResidualRow<R>>,
    /// Least-squares `d log r / d log ħ`.
    pub slope: Option<R>,
}

/// Samples and quadrature nodes used by the diagnostics.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResidualResolution {
    pub fd_samples: usize,
    pub overlap_nodes: usize,
}

impl Default for ResidualResolution {
    fn default() -> Self {
        Self { fd_samples: 4001, overlap_nodes: 64 }
    }
}

/// Overlap of `ψ_{L_m}` with the exact eigenfunction of the same index.
pub fn exact_overlap<R: Real>(m: usize, hbar: R, nodes: usize) -> R {
    let state = psi_lagrangian(m, hbar);
    let inner = state.overlap_with(|q| C::new(hermite_function(m, q, hbar), R::zero()), nodes);
    let exact_norm_sq = GaussLegendre::<R>::new(nodes)
        .integrate_panels(&uniform_edges(lit(-12.0), lit(12.0), 16), |x: R| {
            let q = x * hbar.sqrt();
            hermite_function(m, q, hbar).powi(2) * hbar.sqrt()
        });
    inner.norm() / (state.norm(nodes) * exact_norm_sq.sqrt())
}

/// Residual of `ψ_{L_m}` in the eigenvalue equation, computed with
/// fourth-order differences on the interior window.
pub fn interior_residual<R: Real>(m: usize, hbar: R, exclusion: R, samples: usize) -> Result<R> {
    if !(exclusion > R::zero() && exclusion < R::one()) {
        return Err(Error::domain("exclusion must lie in (0, 1)"));
    }
    let state = psi_lagrangian(m, hbar);
    let edge = (R::one() - exclusion) * state.caustic_q;
    let g = UniformGrid::new(-edge, edge, samples);
    let dq = g.spacing();
    let vals = state.sample(&g);
    let energy = level(m, hbar);
    let r = 2;
    let weights = trapezoid_weights(samples - 2 * r, dq);
    let mut num = R::zero();
    let mut den = R::zero();
    for (k, j) in (r..samples - r).enumerate() {
        let q = g.point(j);
        let d2 = derivative_at(|i| vals[i], samples, j, dq, FdOrder::Fourth, 2)?;
        let h = d2 * (-hbar * hbar / lit(2.0)) + vals[j] * (q * q / lit(2.0) - energy);
        num += h.norm_sqr() * weights[k];
        den += vals[j].norm_sqr() * weights[k];
    }
    Ok((num / den).sqrt())
}

/// Residual and overlap for each `ħ`, with the fitted residual order.
pub fn residual_diagnostics<R: Real>(
    m: usize,
    hbar_list: &[R],
    exclusion: R,
    resolution: ResidualResolution,
) -> Result<ResidualTable<R>> {
    let rows = hbar_list
        .iter()
        .map(|&hbar| {
            if !(hbar > R::zero()) {
                return Err(Error::domain("hbar values must be positive"));
            }
            Ok(ResidualRow {
                hbar,
                residual: interior_residual(m, hbar, exclusion, resolution.fd_samples)?,
                overlap: exact_overlap(m, hbar, resolution.overlap_nodes),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let slope = if rows.len() >= 2 {
        let xs: Vec<R> = rows.iter().map(|r| r.hbar).collect();
        let ys: Vec<R> = rows.iter().map(|r| r.residual).collect();
        loglog_slope(&xs, &ys).ok()
    } else {
        None
    };
    Ok(ResidualTable { m, exclusion, rows, slope })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn branches_at_origin() {
        let s = psi_lagrangian(0, 1.0f64);
        let r = sqrt_i_over_2::<f64>();
        assert!((s.branch_plus(0.0) - r).norm() < 1e-15);
        assert!((s.branch_minus(0.0) - r * C::new(0.0, 1.0)).norm() < 1e-15);
        assert!((s.value(0.0) - r * C::new(1.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn branch_moduli_and_support() {
        let s = psi_lagrangian(2, 0.5f64);
        let a2 = 0.5 * 5.0;
        for q in [-1.4f64, -0.3, 0.0, 0.9, 1.5] {
            let expect = (a2 - q * q).powf(-0.25) / 2f64.sqrt();
            assert!((s.branch_plus(q).norm() - expect).abs() < 1e-14);
            assert!((s.branch_minus(q).norm() - expect).abs() < 1e-14);
        }
        assert_eq!(s.value(1.6), C::new(0.0, 0.0));
        assert_eq!(s.value(-s.caustic_q), C::new(0.0, 0.0));
    }

    #[test]
    fn total_is_cosine_of_branch_phase() {
        let s = psi_lagrangian(0, 1.0f64);
        for q in [-0.8f64, -0.2, 0.3, 0.7] {
            let p = (1.0 - q * q).sqrt();
            let alpha = q * p / 2.0;
            let expect = sqrt_i_over_2::<f64>() * C::from_polar(2.0, std::f64::consts::FRAC_PI_4) * p.powf(-0.5)
                * (alpha + std::f64::consts::FRAC_PI_4).cos();
            assert!((s.value(q) - expect).norm() < 1e-14);
        }
    }

    #[test]
    fn relative_phase() {
        assert_eq!(maslov_phase(&psi_lagrangian(0, 1.0f64)), FRAC_PI_2);
        let s = psi_lagrangian(3, 1.0f64);
        assert!((maslov_phase_at(&s, 0.7 * s.caustic_q).unwrap() - FRAC_PI_2).abs() < 1e-12);
        let rotated = s.with_global_phase(C::from_polar(1.0, 2.1));
        assert!((maslov_phase_at(&rotated, 0.3).unwrap() - FRAC_PI_2).abs() < 1e-12);
        assert!(maslov_phase_at(&s, 10.0).is_err());
    }

    #[test]
    fn norm_is_finite_and_converges() {
        let s = psi_lagrangian(1, 1.0f64);
        let a = s.norm(32);
        let b = s.norm(64);
        assert!(a.is_finite() && (a - b).abs() < 1e-12);
        // |ψ|² = (1 + sin 2α... )/P integrates to at most 2π·(1/2)·2
        assert!(b > 0.0);
    }

    #[test]
    fn exact_states() {
        let g = UniformGrid::new(-10.0, 10.0, 256);
        let s0 = exact_eigenstate(0, g, 1.0f64).unwrap();
        let q = g.point(100);
        assert!((s0.psi_q()[100].re - std::f64::consts::PI.powf(-0.25) * (-q * q / 2.0).exp()).abs() < 1e-15);
        let s4 = exact_eigenstate(4, g, 1.0f64).unwrap();
        assert!(eigen_residual(&s4, 4.5) < 1e-8);
        let states: Vec<_> = (0..=8).map(|k| exact_eigenstate(k, g, 1.0f64).unwrap()).collect();
        for i in 0..=8 {
            for j in 0..=8 {
                let v = states[i].inner(&states[j]).unwrap();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((v - C::new(expect, 0.0)).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn wkb_reference_basics() {
        let w = wkb_reference(3, 1.0f64);
        assert_eq!(w.energy, 3.5);
        assert!((w.action(7f64.sqrt()) - 3.5 * std::f64::consts::PI).abs() < 1e-12);
        assert_eq!(wkb_reference(6, 0.2f64).interior_nodes(4001), 6);
    }

    #[test]
    fn residual_requires_valid_exclusion() {
        assert!(interior_residual(1, 1.0f64, 1.5, 101).is_err());
    }
}
