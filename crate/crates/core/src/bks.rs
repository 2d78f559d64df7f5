//! Half-form BKS pairing between the first-type and second-type
//! regularizations, its double limit, and the pairing map `B`.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::energy::{level, MonomialSection};
use crate::error::{Error, Result};
use crate::families::FirstTypeFamily;
use crate::grid::UniformGrid;
use crate::phase::{gauge_factor, PhasePoint, Trivialization};
use crate::quadrature::{graded_edges, uniform_edges, GaussLegendre};
use crate::richardson::{extrapolate_to_zero, loglog_slope};
use crate::scalar::{from_usize, lit, sqrt_i_over_2, Real};
use crate::schrodinger::{u1_value, SchrodingerState};

type C<R> = Complex<R>;

/// `((p − iq)(1 + t₁)/(p² + q²) + t₂(p − i t₁ q))`, the density of
/// `dz ∧ ((1/2h + t₂)dh − i dθ)` against `ω`.
pub fn form_factor<R: Real>(pt: PhasePoint<R>, t1: R, t2: R) -> Result<C<R>> {
    let r2 = pt.q * pt.q + pt.p * pt.p;
    if r2 == R::zero() {
        return Err(Error::domain("form factor undefined at the origin"));
    }
    let a = C::new(pt.p, -pt.q) * ((R::one() + t1) / r2);
    Ok(a + C::new(pt.p, -t1 * pt.q) * t2)
}

/// Square root with `arg √z ∈ [−π/4, 3π/4)`.
///
/// Positive reals keep their usual root and negative reals map to
/// `e^{iπ/2}√|z|`; the cut runs along the negative imaginary axis.
pub fn half_form_sqrt<R: Real>(z: C<R>) -> C<R> {
    let mut arg = z.arg();
    if arg < -R::FRAC_PI_2() {
        arg += R::TAU();
    }
    C::from_polar(z.norm().sqrt(), arg / lit(2.0))
}

/// `|dz ∧ ((1/2h + t₂)dh − i dθ) − F·ω| / max(1, |F|)` from the exact
/// differentials on the basis `(∂_q, ∂_p)`.
pub fn wedge_identity_residual<R: Real>(pt: PhasePoint<R>, t1: R, t2: R) -> Result<R> {
    let f = form_factor(pt, t1, t2)?;
    let (q, p) = (pt.q, pt.p);
    let r2 = q * q + p * p;
    let i = C::new(R::zero(), R::one());
    let dz = (C::new(R::one(), R::zero()), C::new(R::zero(), t1));
    let coef = (r2).recip() + t2;
    let dh = (q, p);
    let dtheta = (-p / r2, q / r2);
    let b = (
        C::new(coef * dh.0, R::zero()) - i * dtheta.0,
        C::new(coef * dh.1, R::zero()) - i * dtheta.1,
    );
    let wedge = dz.0 * b.1 - dz.1 * b.0;
    Ok((wedge - f).norm() / R::one().max(f.norm()))
}

/// How the per-step values are turned into a limit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Extrapolation {
    LastValue,
    Richardson,
}

/// Joint path `(t₁, t₂) → (0, ∞)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "R: Serialize", deserialize = "R: Deserialize<'de>"))]
pub struct PairingSchedule<R> {
    pub t1_sequence: Vec<R>,
    pub t2_sequence: Vec<R>,
    pub extrapolation: Extrapolation,
}

impl<R: Real> Default for PairingSchedule<R> {
    /// `t₁ = 0.1·2^{−j}`, `t₂ = 10·2^{j}`, `j = 0..7`.
    fn default() -> Self {
        let t1 = (0..7).map(|j| lit::<R>(0.1 * 0.5f64.powi(j))).collect();
        let t2 = (0..7).map(|j| lit::<R>(10.0 * 2f64.powi(j))).collect();
        Self { t1_sequence: t1, t2_sequence: t2, extrapolation: Extrapolation::Richardson }
    }
}

impl<R: Real> PairingSchedule<R> {
    pub fn validate(&self) -> Result<()> {
        let n = self.t1_sequence.len();
        if n < 3 || self.t2_sequence.len() < 3 {
            return Err(Error::config("schedule too short"));
        }
        if n != self.t2_sequence.len() {
            return Err(Error::config("t1 and t2 sequences differ in length"));
        }
        let positive = |v: &[R]| v.iter().all(|x| *x > R::zero() && x.is_finite());
        if !positive(&self.t1_sequence) || !positive(&self.t2_sequence) {
            return Err(Error::config("schedule entries must be positive and finite"));
        }
        if !self.t1_sequence.windows(2).all(|w| w[1] < w[0]) {
            return Err(Error::config("t1 sequence must decrease"));
        }
        if !self.t2_sequence.windows(2).all(|w| w[1] > w[0]) {
            return Err(Error::config("t2 sequence must increase"));
        }
        Ok(())
    }

    /// Distance to the limit along the path,
    /// `x_j = (t₁_j/t₁_0 + t₂_0/t₂_j)/2`.
    pub fn progress(&self) -> Vec<R> {
        let (a, b) = (self.t1_sequence[0], self.t2_sequence[0]);
        self.t1_sequence
            .iter()
            .zip(&self.t2_sequence)
            .map(|(t1, t2)| (*t1 / a + b / *t2) / lit(2.0))
            .collect()
    }
}

/// Polar quadrature used for the regularized pairing.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "R: Serialize", deserialize = "R: Deserialize<'de>"))]
pub struct PairingQuadrature<R> {
    /// Gauss–Legendre nodes across the radial window.
    pub h_nodes: usize,
    /// Half-width of the radial window in units of `√(ħ/t₂)`.
    pub h_sigmas: R,
    /// Gauss–Legendre nodes per angular panel.
    pub theta_nodes: usize,
    /// Smallest angular panel, next to `θ ∈ {0, π, 2π}`.
    pub theta_min_panel: R,
    pub theta_max_panel: R,
}

impl<R: Real> Default for PairingQuadrature<R> {
    fn default() -> Self {
        Self {
            h_nodes: 40,
            h_sigmas: lit(12.0),
            theta_nodes: 16,
            theta_min_panel: lit(1e-6),
            theta_max_panel: R::FRAC_PI_8(),
        }
    }
}

/// Tolerances for accepting an extrapolated limit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "R: Serialize", deserialize = "R: Deserialize<'de>"))]
pub struct PairingTolerance<R> {
    pub rel: R,
    pub abs: R,
}

impl<R: Real> Default for PairingTolerance<R> {
    fn default() -> Self {
        Self { rel: lit(1e-3), abs: lit(1e-6) }
    }
}

struct PolarNode<R> {
    pt: PhasePoint<R>,
    h: R,
    theta: R,
    weight: R,
}

fn polar_nodes<R: Real>(en: R, hbar: R, t2: R, quad: &PairingQuadrature<R>) -> Vec<PolarNode<R>> {
    let sigma = (hbar / t2).sqrt();
    let lo = en - quad.h_sigmas * sigma;
    let hi = en + quad.h_sigmas * sigma;
    let rule = GaussLegendre::<R>::new(quad.h_nodes);
    let radial: Vec<(R, R)> = if lo > R::zero() {
        rule.mapped(lo, hi).collect()
    } else {
        // h = v² keeps the nodes away from the fixed point
        rule.mapped(R::zero(), hi.sqrt()).map(|(v, w)| (v * v, w * lit::<R>(2.0) * v)).collect()
    };
    let pi = R::PI();
    let mut edges = graded_edges(R::zero(), pi, quad.theta_min_panel, quad.theta_max_panel, true, true);
    let lower = graded_edges(pi, R::TAU(), quad.theta_min_panel, quad.theta_max_panel, true, true);
    edges.extend_from_slice(&lower[1..]);
    let angular = GaussLegendre::<R>::new(quad.theta_nodes).composite_nodes(&edges);
    let mut nodes = Vec::with_capacity(radial.len() * angular.len());
    for &(h, wh) in &radial {
        let r = (lit::<R>(2.0) * h).sqrt();
        for &(theta, wt) in &angular {
            let (s, c) = theta.sin_cos();
            nodes.push(PolarNode { pt: PhasePoint::new(r * c, r * s), h, theta, weight: wh * wt });
        }
    }
    nodes
}

/// `⟨U₁^{it₁}ψ, U₂^{it₂}φ_m⟩` with both sections expressed in
/// `trivialization`: `√(i/2) ∫ conj(U₁ψ) · U₂φ_m · e^{−iθ/2} · √F dh dθ`.
///
/// The factor `e^{−iθ/2}` removes the angular ramification of `√du`; the
/// measure constant is absorbed in `a_m`.
pub fn regularized_pairing_in<R: Real>(
    psi: &SchrodingerState<R>,
    m: usize,
    t1: R,
    t2: R,
    quad: &PairingQuadrature<R>,
    trivialization: Trivialization,
) -> Result<C<R>> {
    if !(t1 > R::zero() && t2 > R::zero()) {
        return Err(Error::domain("regularized pairing needs t1 > 0 and t2 > 0"));
    }
    let hbar = psi.hbar();
    let en = level(m, hbar);
    let fam1 = FirstTypeFamily::new(t1)?;
    let sec2 = MonomialSection::new(m, t2, hbar)?;
    let mut acc = C::new(R::zero(), R::zero());
    let half = lit::<R>(0.5);
    for node in polar_nodes(en, hbar, t2, quad) {
        let aa = crate::phase::ActionAngle::new(node.h, node.theta);
        let u1 = u1_value(psi, fam1, node.pt.q, node.pt.p)
            * gauge_factor(node.pt, Trivialization::Sigma, trivialization, hbar);
        let u2 = sec2.regularized(aa)?
            * C::from_polar(R::one(), -half * node.theta)
            * gauge_factor(node.pt, Trivialization::SigmaTilde, trivialization, hbar);
        let f = form_factor(node.pt, t1, t2)?;
        acc += u1.conj() * u2 * half_form_sqrt(f) * node.weight;
    }
    if !(acc.re.is_finite() && acc.im.is_finite()) {
        return Err(Error::not_converged("pairing quadrature produced a non-finite value", format!("t1={t1}, t2={t2}")));
    }
    Ok(acc * sqrt_i_over_2::<R>())
}

/// [`regularized_pairing_in`] in the trivialization `σ`.
pub fn regularized_pairing<R: Real>(
    psi: &SchrodingerState<R>,
    m: usize,
    t1: R,
    t2: R,
    quad: &PairingQuadrature<R>,
) -> Result<C<R>> {
    regularized_pairing_in(psi, m, t1, t2, quad, Trivialization::Sigma)
}

/// `√(i/2) ∫₀^{2π} conj(ψ(a cos θ)) e^{−ia² sin θ cos θ/2ħ} e^{imθ} √(a sin θ) dθ`
/// with `a² = 2ħ(m+½)`: the pairing with the Bohr–Sommerfeld state after
/// integrating out the delta.
///
/// Each half circle is mapped by `θ = θ₀ + π(1 − cos φ)/2`, which removes the
/// square-root behaviour at the turning points; `panels × nodes` Gauss–Legendre
/// points are used per half.
pub fn circle_pairing<R: Real>(
    psi: impl Fn(R) -> C<R>,
    m: usize,
    hbar: R,
    panels: usize,
    nodes: usize,
) -> C<R> {
    let en = level(m, hbar);
    let a = (lit::<R>(2.0) * en).sqrt();
    let mm: R = from_usize(m);
    let rule = GaussLegendre::<R>::new(nodes);
    let edges = uniform_edges(R::zero(), R::PI(), panels);
    let pi = R::PI();
    let half = lit::<R>(0.5);
    let mut acc = C::new(R::zero(), R::zero());
    for start in [R::zero(), pi] {
        for (phi, w) in rule.composite_nodes(&edges) {
            let theta = start + pi * (R::one() - phi.cos()) * half;
            let jac = pi * phi.sin() * half;
            let (s, c) = theta.sin_cos();
            let (q, p) = (a * c, a * s);
            let phase = C::from_polar(R::one(), -p * q / (lit::<R>(2.0) * hbar) + mm * theta);
            acc += psi(q).conj() * phase * half_form_sqrt(C::new(p, R::zero())) * (jac * w);
        }
    }
    acc * sqrt_i_over_2::<R>()
}

/// One point of a pairing schedule.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairingStep<R> {
    pub t1: R,
    pub t2: R,
    pub value: C<R>,
}

/// Values along a schedule, their limit, and its comparison with the
/// closed-form circle integral.
#[derive(Clone, Debug, PartialEq)]
pub struct PairingResult<R> {
    pub value: C<R>,
    pub per_step: Vec<PairingStep<R>>,
    pub estimated_error: R,
    pub extrapolation: Extrapolation,
    pub oracle: C<R>,
    /// `|value − oracle| / |oracle|`, or the absolute gap when the oracle
    /// vanishes.
    pub relative_error: R,
    /// Fitted exponent of `|v_j − oracle|` against the path progress.
    pub order: Option<R>,
    pub converged: bool,
}

impl<R: Real> PairingResult<R> {
    pub fn diagnostics(&self) -> String {
        let steps: Vec<String> = self
            .per_step
            .iter()
            .map(|s| format!("(t1={:e}, t2={:e}): {:e}{:+e}i", s.t1, s.t2, s.value.re, s.value.im))
            .collect();
        format!(
            "estimated error {:e}; value {:e}{:+e}i; steps [{}]",
            self.estimated_error,
            self.value.re,
            self.value.im,
            steps.join(", ")
        )
    }
}

fn extrapolate<R: Real>(xs: &[R], ys: &[C<R>], how: Extrapolation) -> Result<(C<R>, R)> {
    match how {
        Extrapolation::LastValue => {
            let n = ys.len();
            Ok((ys[n - 1], (ys[n - 1] - ys[n - 2]).norm()))
        }
        Extrapolation::Richardson => {
            let ex = extrapolate_to_zero(xs, ys, 3)?;
            Ok((ex.value, ex.error))
        }
    }
}

/// Evaluates the regularized pairing along `schedule` and extrapolates;
/// reports non-convergence through [`PairingResult::converged`].
pub fn pairing_sequence<R: Real>(
    psi: &SchrodingerState<R>,
    m: usize,
    schedule: &PairingSchedule<R>,
    quad: &PairingQuadrature<R>,
    tol: &PairingTolerance<R>,
) -> Result<PairingResult<R>> {
    schedule.validate()?;
    let per_step = schedule
        .t1_sequence
        .iter()
        .zip(&schedule.t2_sequence)
        .map(|(&t1, &t2)| Ok(PairingStep { t1, t2, value: regularized_pairing(psi, m, t1, t2, quad)? }))
        .collect::<Result<Vec<_>>>()?;
    let xs = schedule.progress();
    let ys: Vec<C<R>> = per_step.iter().map(|s| s.value).collect();
    let (value, estimated_error) = extrapolate(&xs, &ys, schedule.extrapolation)?;
    let oracle = circle_pairing(|q| psi.interpolate(q), m, psi.hbar(), 8, 24);
    let gap = (value - oracle).norm();
    let relative_error = if oracle.norm() > tol.abs { gap / oracle.norm() } else { gap };
    let errs: Vec<R> = ys.iter().map(|y| (*y - oracle).norm()).collect();
    let order = if errs.iter().all(|e| *e > R::zero()) { loglog_slope(&xs, &errs).ok() } else { None };
    let converged = estimated_error.is_finite() && estimated_error <= tol.abs.max(tol.rel * value.norm());
    Ok(PairingResult {
        value,
        per_step,
        estimated_error,
        extrapolation: schedule.extrapolation,
        oracle,
        relative_error,
        order,
        converged,
    })
}

/// [`pairing_sequence`] that fails when the limit is not reached.
pub fn pairing_limit<R: Real>(
    psi: &SchrodingerState<R>,
    m: usize,
    schedule: &PairingSchedule<R>,
    quad: &PairingQuadrature<R>,
    tol: &PairingTolerance<R>,
) -> Result<PairingResult<R>> {
    let res = pairing_sequence(psi, m, schedule, quad, tol)?;
    if res.converged {
        Ok(res)
    } else {
        Err(Error::not_converged("limit not reached; refine schedule", res.diagnostics()))
    }
}

/// Iterated limit: `t₁ → 0` at each fixed `t₂` of the schedule, then
/// `t₂ → ∞`.
pub fn iterated_limit<R: Real>(
    psi: &SchrodingerState<R>,
    m: usize,
    schedule: &PairingSchedule<R>,
    quad: &PairingQuadrature<R>,
) -> Result<C<R>> {
    schedule.validate()?;
    let x1: Vec<R> = schedule.t1_sequence.iter().map(|t| *t / schedule.t1_sequence[0]).collect();
    let x2: Vec<R> = schedule.t2_sequence.iter().map(|t| schedule.t2_sequence[0] / *t).collect();
    let inner = schedule
        .t2_sequence
        .iter()
        .map(|&t2| {
            let ys = schedule
                .t1_sequence
                .iter()
                .map(|&t1| regularized_pairing(psi, m, t1, t2, quad))
                .collect::<Result<Vec<_>>>()?;
            Ok(extrapolate(&x1, &ys, schedule.extrapolation)?.0)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(extrapolate(&x2, &inner, schedule.extrapolation)?.0)
}

/// Riesz density of the Bohr–Sommerfeld pairing against `ψ(q)`:
/// `√(i/2) Σ_{p = ±P} e^{−ipq/2ħ} e^{imθ(q,p)} √p/|p|` with
/// `P = √(ħ(2m+1) − q²)`; zero outside the classically allowed interval.
pub fn pairing_map_b_value<R: Real>(m: usize, hbar: R, q: R) -> C<R> {
    let a2 = lit::<R>(2.0) * level(m, hbar);
    if q * q >= a2 {
        return C::new(R::zero(), R::zero());
    }
    let big_p = (a2 - q * q).sqrt();
    let mm: R = from_usize(m);
    let mut acc = C::new(R::zero(), R::zero());
    for p in [big_p, -big_p] {
        let mut theta = p.atan2(q);
        if theta < R::zero() {
            theta += R::TAU();
        }
        let phase = C::from_polar(R::one(), -p * q / (lit::<R>(2.0) * hbar) + mm * theta);
        acc += phase * half_form_sqrt(C::new(p, R::zero())) / p.abs();
    }
    acc * sqrt_i_over_2::<R>()
}

/// The state `B(δ_m)` on `q_grid`.
pub fn pairing_map_b<R: Real>(m: usize, hbar: R, q_grid: UniformGrid<R>) -> Result<SchrodingerState<R>> {
    SchrodingerState::from_fn(q_grid, hbar, |q| pairing_map_b_value(m, hbar, q))
}

/// Numerical route to `B(δ_m)(q₀)`: the Bohr–Sommerfeld pairing of normalized
/// Gaussian mollifiers of widths `ε` and `ε/2` centred at `q₀`, combined by
/// Richardson extrapolation in `ε²`.
pub fn pairing_map_b_numeric<R: Real>(m: usize, hbar: R, q0: R, eps: R) -> C<R> {
    let at = |w: R| {
        let norm = (R::TAU() * w * w).sqrt().recip();
        circle_pairing(
            |q| {
                let x = (q - q0) / w;
                C::new(norm * (-x * x / lit(2.0)).exp(), R::zero())
            },
            m,
            hbar,
            256,
            12,
        )
    };
    let coarse = at(eps);
    let fine = at(eps / lit(2.0));
    (fine * lit::<R>(4.0) - coarse) / lit::<R>(3.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schrodinger::StateFamily;
    use proptest::prelude::*;

    #[test]
    fn form_factor_examples() {
        let f = form_factor(PhasePoint::new(0.0, 1.0), 0.0, 0.0).unwrap();
        assert!((f - C::new(1.0, 0.0)).norm() < 1e-15);
        let f = form_factor(PhasePoint::new(1.0, 0.0), 0.0, 0.0).unwrap();
        assert!((f - C::new(0.0, -1.0)).norm() < 1e-15);
        let f = form_factor(PhasePoint::new(1.0, 1.0), 1.0, 2.0).unwrap();
        assert!((f - C::new(3.0, -3.0)).norm() < 1e-14);
        assert!(form_factor(PhasePoint::new(0.0, 0.0), 1.0, 1.0).is_err());
    }

    #[test]
    fn branch_of_half_form_root() {
        let r = half_form_sqrt(C::new(-4.0f64, 0.0));
        assert!((r - C::new(0.0, 2.0)).norm() < 1e-15);
        let r = half_form_sqrt(C::new(9.0f64, 0.0));
        assert!((r - C::new(3.0, 0.0)).norm() < 1e-15);
        // continuous across the positive imaginary axis
        let a = half_form_sqrt(C::new(1e-9f64, 1.0));
        let b = half_form_sqrt(C::new(-1e-9f64, 1.0));
        assert!((a - b).norm() < 1e-8);
    }

    #[test]
    fn wedge_on_axes_and_large_t2() {
        for &(q, p) in &[(0.0, 1.3), (0.0, -0.2), (2.0, 0.0)] {
            assert!(wedge_identity_residual(PhasePoint::new(q, p), 0.3, 5.0).unwrap() <= 1e-12);
        }
        assert!(wedge_identity_residual(PhasePoint::new(0.7, -0.4), 2.0, 1e6).unwrap() <= 1e-12);
    }

    #[test]
    fn schedule_validation() {
        let mut s = PairingSchedule::<f64>::default();
        assert!(s.validate().is_ok());
        s.t1_sequence.truncate(1);
        s.t2_sequence.truncate(1);
        assert_eq!(s.validate().unwrap_err().to_string(), "invalid configuration: schedule too short");
        let s = PairingSchedule { t1_sequence: vec![0.1, 0.2, 0.05], t2_sequence: vec![1.0, 2.0, 3.0], extrapolation: Extrapolation::LastValue };
        assert!(s.validate().is_err());
    }

    #[test]
    fn closed_form_at_origin() {
        let v = pairing_map_b_value(0, 1.0, 0.0);
        let expect = sqrt_i_over_2::<f64>() * C::new(1.0, 1.0);
        assert!((v - expect).norm() < 1e-15);
        assert_eq!(pairing_map_b_value(1, 1.0, 1.8), C::new(0.0, 0.0));
    }

    #[test]
    fn disjoint_support_gives_small_pairing() {
        let g = UniformGrid::new(-12.0, 12.0, 256);
        let psi = SchrodingerState::from_family(&StateFamily::Gaussian { width: 0.3, center: 5.0 }, g, 1.0).unwrap();
        let v = regularized_pairing(&psi, 0, 0.01, 1000.0, &PairingQuadrature::default()).unwrap();
        assert!(v.norm() < 1e-10, "{v}");
    }

    #[test]
    fn gauge_invariance() {
        let g = UniformGrid::new(-10.0, 10.0, 128);
        let psi = SchrodingerState::from_family(&StateFamily::Hermite { k: 1 }, g, 1.0).unwrap();
        let quad = PairingQuadrature { h_nodes: 12, theta_nodes: 8, ..Default::default() };
        let a: C<f64> = regularized_pairing_in(&psi, 1, 0.05, 20.0, &quad, Trivialization::Sigma).unwrap();
        let b = regularized_pairing_in(&psi, 1, 0.05, 20.0, &quad, Trivialization::SigmaTilde).unwrap();
        assert!((a - b).norm() <= 1e-12 * a.norm().max(1.0));
    }

    #[test]
    fn numeric_b_matches_closed_form() {
        for m in 0..=1 {
            let a = (2.0 * level(m, 1.0f64)).sqrt();
            for q in [-0.5 * a, 0.1, 0.7 * a] {
                let exact = pairing_map_b_value(m, 1.0, q);
                let num = pairing_map_b_numeric(m, 1.0, q, 0.04);
                assert!((num - exact).norm() <= 1e-3 * exact.norm(), "m={m} q={q}");
            }
        }
    }

    proptest! {
        #[test]
        fn wedge_identity_holds(q in -5.0..5.0f64, p in -5.0..5.0f64, t1 in 0.0..10.0f64, t2 in 0.0..1e6f64) {
            prop_assume!(q * q + p * p > 1e-6);
            prop_assert!(wedge_identity_residual(PhasePoint::new(q, p), t1, t2).unwrap() <= 1e-12);
        }
    }
}
