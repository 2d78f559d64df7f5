//! Schrödinger representation on a uniform `q` grid, the prequantum
//! operators of the test Hamiltonians, and the first-type regularization
//! map `U₁`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::{FirstTypeFamily, SecondTypeFamily};
use crate::fd::{derivative_at, periodic_derivative, stencil_radius};
use crate::grid::UniformGrid;
use crate::phase::{FdOrder, Trivialization};
use crate::quadrature::trapezoid_weights;
use crate::scalar::{from_usize, imag_unit, lit, Real};
use crate::special::hermite_function;

type C<R> = Complex<R>;

/// Built-in wavefunctions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
#[serde(bound(serialize = "R: Serialize", deserialize = "R: Deserialize<'de> + Default"))]
pub enum StateFamily<R> {
    /// Normalized oscillator eigenfunction of index `k`.
    Hermite { k: usize },
    /// `(πw²)^{-1/4} exp(−(q−c)²/2w²)`.
    Gaussian {
        width: R,
        #[serde(default)]
        center: R,
    },
    /// Gaussian window of width `width` times `e^{i p₀ q/ħ}`.
    PlaneWaveWindow { momentum: R, width: R },
}

impl<R: Real> StateFamily<R> {
    pub fn eval(&self, q: R, hbar: R) -> C<R> {
        let gauss = |w: R, c: R| {
            let x = (q - c) / w;
            (R::PI() * w * w).powf(lit(-0.25)) * (-x * x / lit(2.0)).exp()
        };
        match *self {
            StateFamily::Hermite { k } => C::new(hermite_function(k, q, hbar), R::zero()),
            StateFamily::Gaussian { width, center } => C::new(gauss(width, center), R::zero()),
            StateFamily::PlaneWaveWindow { momentum, width } => {
                C::from_polar(gauss(width, R::zero()), momentum * q / hbar)
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            StateFamily::Hermite { .. } => Ok(()),
            StateFamily::Gaussian { width, .. } | StateFamily::PlaneWaveWindow { width, .. } => {
                if width > R::zero() && width.is_finite() {
                    Ok(())
                } else {
                    Err(Error::config("state width must be positive"))
                }
            }
        }
    }
}

/// Dual momentum grid of a `q` grid: `p_k = (k − ⌊N/2⌋) dp` with
/// `dp = 2πħ/(N dq)`, which makes the discrete transform pair exact.
pub fn dual_grid<R: Real>(q_grid: &UniformGrid<R>, hbar: R) -> UniformGrid<R> {
    let n = q_grid.count;
    let dp = R::TAU() * hbar / (from_usize::<R>(n) * q_grid.spacing());
    let c: R = from_usize(n / 2);
    UniformGrid::new(-c * dp, (from_usize::<R>(n - 1) - c) * dp, n)
}

struct Transform<R: Real> {
    forward: Arc<dyn Fft<R>>,
    inverse: Arc<dyn Fft<R>>,
}

impl<R: Real> Transform<R> {
    fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self { forward: planner.plan_fft_forward(n), inverse: planner.plan_fft_inverse(n) }
    }
}

/// `ψ̃(p_k) = (dq/(√(2π) ħ)) Σ_j e^{−i p_k q_j/ħ} ψ(q_j)`.
pub fn fourier<R: Real>(psi_q: &[C<R>], q_grid: &UniformGrid<R>, hbar: R) -> Vec<C<R>> {
    let n = psi_q.len();
    let tr = Transform::new(n);
    fourier_with(&tr, psi_q, q_grid, hbar)
}

/// Inverse of [`fourier`]: `ψ(q_j) = (1/√(2π)) Σ_k dp e^{i p_k q_j/ħ} ψ̃(p_k)`.
pub fn inverse_fourier<R: Real>(psi_p: &[C<R>], q_grid: &UniformGrid<R>, hbar: R) -> Vec<C<R>> {
    let n = psi_p.len();
    let tr = Transform::new(n);
    inverse_fourier_with(&tr, psi_p, q_grid, hbar)
}

fn shift_phase<R: Real>(n: usize, j: usize) -> C<R> {
    // e^{2πi ⌊N/2⌋ j / N}, reduced exactly in integers
    let c = n / 2;
    let r = (c * j) % n;
    C::from_polar(R::one(), R::TAU() * from_usize::<R>(r) / from_usize(n))
}

fn fourier_with<R: Real>(tr: &Transform<R>, psi_q: &[C<R>], q_grid: &UniformGrid<R>, hbar: R) -> Vec<C<R>> {
    let n = psi_q.len();
    let pg = dual_grid(q_grid, hbar);
    let mut buf: Vec<C<R>> = psi_q.iter().enumerate().map(|(j, v)| *v * shift_phase(n, j)).collect();
    tr.forward.process(&mut buf);
    let scale = q_grid.spacing() / (R::TAU().sqrt() * hbar);
    buf.iter()
        .enumerate()
        .map(|(k, v)| *v * C::from_polar(scale, -pg.point(k) * q_grid.min / hbar))
        .collect()
}

fn inverse_fourier_with<R: Real>(tr: &Transform<R>, psi_p: &[C<R>], q_grid: &UniformGrid<R>, hbar: R) -> Vec<C<R>> {
    let n = psi_p.len();
    let pg = dual_grid(q_grid, hbar);
    let mut buf: Vec<C<R>> = psi_p
        .iter()
        .enumerate()
        .map(|(k, v)| *v * C::from_polar(R::one(), pg.point(k) * q_grid.min / hbar))
        .collect();
    tr.inverse.process(&mut buf);
    let scale = pg.spacing() / R::TAU().sqrt();
    buf.iter().enumerate().map(|(j, v)| *v * shift_phase::<R>(n, j).conj() * scale).collect()
}

/// Wavefunction `ψ(q) ⊗ √dq` sampled on a uniform grid, with its transform
/// on the dual momentum grid.
#[derive(Clone, Debug)]
pub struct SchrodingerState<R> {
    q_grid: UniformGrid<R>,
    hbar: R,
    psi_q: Vec<C<R>>,
    psi_p: Vec<C<R>>,
    /// Index range of `ψ̃` outside which samples are negligible.
    support: (usize, usize),
}

fn momentum_support<R: Real>(psi_p: &[C<R>]) -> (usize, usize) {
    let peak = psi_p.iter().map(|v| v.norm()).fold(R::zero(), R::max);
    let cut = peak * lit(1e-18);
    let lo = psi_p.iter().position(|v| v.norm() > cut).unwrap_or(0);
    let hi = psi_p.iter().rposition(|v| v.norm() > cut).unwrap_or(psi_p.len() - 1);
    (lo, hi.max(lo))
}

impl<R: Real> SchrodingerState<R> {
    pub fn from_samples(q_grid: UniformGrid<R>, hbar: R, psi_q: Vec<C<R>>) -> Result<Self> {
        q_grid.validate("q_grid")?;
        if psi_q.len() != q_grid.count {
            return Err(Error::domain(format!(
                "expected {} samples, got {}",
                q_grid.count,
                psi_q.len()
            )));
        }
        if !(hbar > R::zero()) {
            return Err(Error::domain("hbar must be positive"));
        }
        if psi_q.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::domain("wavefunction samples must be finite"));
        }
        let psi_p = fourier(&psi_q, &q_grid, hbar);
        let support = momentum_support(&psi_p);
        Ok(Self { q_grid, hbar, psi_q, psi_p, support })
    }

    pub fn from_fn(q_grid: UniformGrid<R>, hbar: R, f: impl Fn(R) -> C<R>) -> Result<Self> {
        let samples = q_grid.points().into_iter().map(f).collect();
        Self::from_samples(q_grid, hbar, samples)
    }

    pub fn from_family(family: &StateFamily<R>, q_grid: UniformGrid<R>, hbar: R) -> Result<Self> {
        family.validate()?;
        Self::from_fn(q_grid, hbar, |q| family.eval(q, hbar))
    }

    /// Builds the state from samples of `ψ̃` on the dual grid.
    pub fn from_momentum_samples(q_grid: UniformGrid<R>, hbar: R, psi_p: Vec<C<R>>) -> Result<Self> {
        let psi_q = inverse_fourier(&psi_p, &q_grid, hbar);
        Self::from_samples(q_grid, hbar, psi_q)
    }

    pub fn q_grid(&self) -> &UniformGrid<R> {
        &self.q_grid
    }

    pub fn p_grid(&self) -> UniformGrid<R> {
        dual_grid(&self.q_grid, self.hbar)
    }

    pub fn hbar(&self) -> R {
        self.hbar
    }

    pub fn psi_q(&self) -> &[C<R>] {
        &self.psi_q
    }

    pub fn psi_p(&self) -> &[C<R>] {
        &self.psi_p
    }

    /// `⟨self, other⟩ = ∫ conj(self)·other dq` by the trapezoid rule.
    pub fn inner(&self, other: &Self) -> Result<C<R>> {
        if self.q_grid != other.q_grid {
            return Err(Error::domain("states live on different grids"));
        }
        let w = trapezoid_weights(self.q_grid.count, self.q_grid.spacing());
        Ok(self
            .psi_q
            .iter()
            .zip(&other.psi_q)
            .zip(&w)
            .fold(C::new(R::zero(), R::zero()), |acc, ((a, b), w)| acc + a.conj() * b * *w))
    }

    pub fn norm(&self) -> R {
        let w = trapezoid_weights(self.q_grid.count, self.q_grid.spacing());
        self.psi_q.iter().zip(&w).map(|(v, w)| v.norm_sqr() * *w).sum::<R>().sqrt()
    }

    pub fn scaled(&self, lambda: C<R>) -> Self {
        Self {
            q_grid: self.q_grid,
            hbar: self.hbar,
            psi_q: self.psi_q.iter().map(|v| *v * lambda).collect(),
            psi_p: self.psi_p.iter().map(|v| *v * lambda).collect(),
            support: self.support,
        }
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: C<R>, other: &Self, b: C<R>) -> Result<Self> {
        if self.q_grid != other.q_grid || self.hbar != other.hbar {
            return Err(Error::domain("states live on different grids"));
        }
        Ok(Self {
            q_grid: self.q_grid,
            hbar: self.hbar,
            psi_q: self.psi_q.iter().zip(&other.psi_q).map(|(x, y)| *x * a + *y * b).collect(),
            psi_p: self.psi_p.iter().zip(&other.psi_p).map(|(x, y)| *x * a + *y * b).collect(),
            support: (self.support.0.min(other.support.0), self.support.1.max(other.support.1)),
        })
    }

    /// Band-limited interpolant at an arbitrary `q`.
    pub fn interpolate(&self, q: R) -> C<R> {
        u1_value(self, FirstTypeFamily { t1: R::zero() }, q, R::zero())
    }

    /// Largest edge sample of `ψ` and `ψ̃` relative to the peak; small values
    /// mean the grids resolve the state.
    pub fn edge_leakage(&self) -> R {
        let leak = |v: &[C<R>]| {
            let peak = v.iter().map(|x| x.norm()).fold(R::zero(), R::max);
            let edge = v[0].norm().max(v[v.len() - 1].norm());
            if peak > R::zero() {
                edge / peak
            } else {
                R::zero()
            }
        };
        leak(&self.psi_q).max(leak(&self.psi_p))
    }
}

/// `ĥ₁^{Sch} = −(ħ²/2)∂²`, applied on the Fourier side.
pub fn h1_sch<R: Real>(psi: &SchrodingerState<R>) -> SchrodingerState<R> {
    let pg = psi.p_grid();
    let psi_p: Vec<C<R>> = psi
        .psi_p
        .iter()
        .enumerate()
        .map(|(k, v)| {
            let p = pg.point(k);
            *v * (p * p / lit(2.0))
        })
        .collect();
    let psi_q = inverse_fourier(&psi_p, &psi.q_grid, psi.hbar);
    let support = momentum_support(&psi_p);
    SchrodingerState { q_grid: psi.q_grid, hbar: psi.hbar, psi_q, psi_p, support }
}

/// Exponent beyond which the envelope `e^{−x}` is dropped.
const TAIL_EXPONENT: f64 = 37.0;

/// `U₁ψ(q,p) = (1/√2π) Σ_k dp e^{i p_k q/ħ} e^{−t(p+p_k)²/2ħ} ψ̃(p_k)`, the
/// trapezoid sum of the defining integral on the dual grid.
pub fn u1_value<R: Real>(psi: &SchrodingerState<R>, fam: FirstTypeFamily<R>, q: R, p: R) -> C<R> {
    let pg = psi.p_grid();
    let hbar = psi.hbar;
    let dp = pg.spacing();
    let t = fam.t1;
    let n = pg.count;
    let (s0, s1) = psi.support;
    let (k0, k1) = if t > R::zero() {
        // keep |p + p_k| ≤ √(2ħ·TAIL/t)
        let reach = (lit::<R>(2.0 * TAIL_EXPONENT) * hbar / t).sqrt();
        let lo = ((-p - reach - pg.min) / dp).floor();
        let hi = ((-p + reach - pg.min) / dp).ceil();
        let clamp = |x: R| x.max(R::zero()).min(from_usize(n - 1)).to_usize().unwrap_or(0);
        if hi < R::zero() || lo > from_usize(n - 1) {
            return C::new(R::zero(), R::zero());
        }
        (clamp(lo).max(s0), clamp(hi).min(s1))
    } else {
        (s0, s1)
    };
    if k0 > k1 {
        return C::new(R::zero(), R::zero());
    }
    let step = C::from_polar(R::one(), dp * q / hbar);
    let mut phase = C::from_polar(R::one(), pg.point(k0) * q / hbar);
    let mut acc = C::new(R::zero(), R::zero());
    let two_hbar = lit::<R>(2.0) * hbar;
    for k in k0..=k1 {
        if (k - k0) % 64 == 0 && k != k0 {
            phase = C::from_polar(R::one(), pg.point(k) * q / hbar);
        }
        let s = p + pg.point(k);
        let env = if t > R::zero() { (-t * s * s / two_hbar).exp() } else { R::one() };
        acc += psi.psi_p[k] * phase * env;
        phase *= step;
    }
    acc * (dp / R::TAU().sqrt())
}

/// Symbolic half-form frame carried by a polarized section.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "R: Serialize", deserialize = "R: Deserialize<'de>"))]
pub enum HalfFormLabel<R> {
    /// `√dq`.
    Dq,
    /// `√dz` with `z = q + i t₁ p`.
    Dz { t1: R },
    /// `√du` with `du = (1/2h + t₂) dh + i dθ`.
    Du { t2: R },
    /// `√dh`, the real toric limit.
    Dh,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "R: Serialize", deserialize = "R: Deserialize<'de>"))]
pub enum Polarization<R> {
    FirstType(FirstTypeFamily<R>),
    SecondType(SecondTypeFamily<R>),
}

/// Sample grid of a section.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "R: Serialize", deserialize = "R: Deserialize<'de>"))]
pub enum SectionGrid<R> {
    /// Values indexed `[i_q * n_p + i_p]`.
    PhasePlane { q: UniformGrid<R>, p: UniformGrid<R> },
    /// Values indexed `[i_h * n_θ + i_θ]`; θ is periodic.
    ActionAngle { h: UniformGrid<R>, theta: UniformGrid<R> },
}

impl<R: Real> SectionGrid<R> {
    pub fn shape(&self) -> (usize, usize) {
        match self {
            SectionGrid::PhasePlane { q, p } => (q.count, p.count),
            SectionGrid::ActionAngle { h, theta } => (h.count, theta.count),
        }
    }

    pub fn axes(&self) -> (&UniformGrid<R>, &UniformGrid<R>) {
        match self {
            SectionGrid::PhasePlane { q, p } => (q, p),
            SectionGrid::ActionAngle { h, theta } => (h, theta),
        }
    }
}

/// Complex samples of `f ⊗ (half-form frame)` in a fixed trivialization.
#[derive(Clone, Debug, PartialEq)]
pub struct PolarizedSectionSample<R> {
    pub grid: SectionGrid<R>,
    pub values: Vec<C<R>>,
    pub family: Polarization<R>,
    pub trivialization: Trivialization,
    pub halfform: HalfFormLabel<R>,
    /// Samples carry a half-integer angular exponent, so they change sign
    /// across the `θ = 2π` seam.
    pub ramified: bool,
    pub hbar: R,
}

impl<R: Real> PolarizedSectionSample<R> {
    pub fn value(&self, i: usize, j: usize) -> C<R> {
        let (_, n2) = self.grid.shape();
        self.values[i * n2 + j]
    }

    pub fn sup_norm(&self) -> R {
        self.values.iter().map(|v| v.norm()).fold(R::zero(), R::max)
    }
}

/// `U₁` evaluated on a `(q, p)` grid, in the trivialization `σ` with frame
/// `√dz`.
pub fn u1_map<R: Real>(
    psi: &SchrodingerState<R>,
    fam: FirstTypeFamily<R>,
    q_grid: &UniformGrid<R>,
    p_grid: &UniformGrid<R>,
    quad_tol: R,
) -> Result<PolarizedSectionSample<R>> {
    let leak = psi.edge_leakage();
    if leak > quad_tol.sqrt() {
        return Err(Error::not_converged(
            "quadrature tolerance not met for U1",
            format!("edge leakage {leak:e} of state or its transform exceeds {:e}", quad_tol.sqrt()),
        ));
    }
    let qs = q_grid.points();
    let ps = p_grid.points();
    let mut values = Vec::with_capacity(qs.len() * ps.len());
    for &q in &qs {
        for &p in &ps {
            values.push(u1_value(psi, fam, q, p));
        }
    }
    Ok(PolarizedSectionSample {
        grid: SectionGrid::PhasePlane { q: *q_grid, p: *p_grid },
        values,
        family: Polarization::FirstType(fam),
        trivialization: Trivialization::Sigma,
        halfform: HalfFormLabel::Dz { t1: fam.t1 },
        ramified: false,
        hbar: psi.hbar,
    })
}

/// Observables with hard-coded Hamiltonian vector fields.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    P,
    Q,
    H1,
    H,
    H2,
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Observable::P => "p",
            Observable::Q => "q",
            Observable::H1 => "h1",
            Observable::H => "h",
            Observable::H2 => "h2",
        };
        f.write_str(s)
    }
}

impl FromStr for Observable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "p" => Ok(Observable::P),
            "q" => Ok(Observable::Q),
            "h1" => Ok(Observable::H1),
            "h" => Ok(Observable::H),
            "h2" => Ok(Observable::H2),
            other => Err(Error::Unsupported(format!("observable {other:?}"))),
        }
    }
}

impl Observable {
    fn value<R: Real>(self, q: R, p: R) -> R {
        let h = (q * q + p * p) / lit(2.0);
        match self {
            Observable::P => p,
            Observable::Q => q,
            Observable::H1 => p * p / lit(2.0),
            Observable::H => h,
            Observable::H2 => h * h / lit(2.0),
        }
    }

    /// Components `(X^q, X^p)` of the Hamiltonian vector field, `ι_X ω = df`.
    fn field<R: Real>(self, q: R, p: R) -> (R, R) {
        let h = (q * q + p * p) / lit(2.0);
        match self {
            Observable::P => (R::one(), R::zero()),
            Observable::Q => (R::zero(), -R::one()),
            Observable::H1 => (p, R::zero()),
            Observable::H => (p, -q),
            Observable::H2 => (h * p, -h * q),
        }
    }
}

/// The half-form part `iħ L_X` of a prequantum operator on a given frame.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum HalfFormTerm<R> {
    /// The flow preserves the frame.
    Vanishes,
    /// `iħ L_X √frame = c √frame`; already added to the scalar output.
    Scalar(R),
    /// The flow moves the frame to a neighbouring polarization; it is
    /// carried symbolically along the family.
    FrameFlow,
}

/// Output of a prequantum operator.
#[derive(Clone, Debug)]
pub struct PrequantumResult<R> {
    pub section: PolarizedSectionSample<R>,
    pub half_form: HalfFormTerm<R>,
}

fn half_form_term<R: Real>(f: Observable, label: HalfFormLabel<R>, hbar: R) -> HalfFormTerm<R> {
    use HalfFormLabel::*;
    use Observable::*;
    match (label, f) {
        (Dq | Dz { .. }, P | Q) => HalfFormTerm::Vanishes,
        // X_h z = p − i q = −i z only on the t₁ = 1 frame
        (Dz { t1 }, H) if t1 == R::one() => HalfFormTerm::Scalar(hbar / lit(2.0)),
        (Du { .. }, H) | (Dh, H | H2) => HalfFormTerm::Vanishes,
        _ => HalfFormTerm::FrameFlow,
    }
}

/// `f̂^{pQ} = iħ X_f − L_f + iħ L_{X_f}` with `L_f = Θ(X_f) − f`.
///
/// On phase-plane grids the output lives on the interior points reachable by
/// the stencil. Action-angle grids support the rotation generators `h` and
/// `h₂` in the `σ̃` trivialization.
pub fn prequantum_op<R: Real>(
    f: Observable,
    section: &PolarizedSectionSample<R>,
    order: FdOrder,
) -> Result<PrequantumResult<R>> {
    let hbar = section.hbar;
    let i = imag_unit::<R>();
    let half_form = half_form_term(f, section.halfform, hbar);
    let shift = match half_form {
        HalfFormTerm::Scalar(c) => c,
        _ => R::zero(),
    };
    let (n1, n2) = section.grid.shape();
    match section.grid {
        SectionGrid::PhasePlane { q: qg, p: pg } => {
            let r = stencil_radius(order);
            if n1 < 2 * r + 1 || n2 < 2 * r + 1 {
                return Err(Error::Grid(format!("{n1}×{n2} samples cannot carry a radius-{r} stencil")));
            }
            let (dq, dp) = (qg.spacing(), pg.spacing());
            let mut values = Vec::with_capacity((n1 - 2 * r) * (n2 - 2 * r));
            for a in r..n1 - r {
                for b in r..n2 - r {
                    let (q, p) = (qg.point(a), pg.point(b));
                    let (xq, xp) = f.field(q, p);
                    let d_q = derivative_at(|j| section.value(j, b), n1, a, dq, order, 1)?;
                    let d_p = derivative_at(|j| section.value(a, j), n2, b, dp, order, 1)?;
                    let theta_x = match section.trivialization {
                        Trivialization::Sigma => p * xq,
                        Trivialization::SigmaTilde => (p * xq - q * xp) / lit(2.0),
                    };
                    let lagrangian = theta_x - f.value(q, p);
                    let v = section.value(a, b);
                    values.push(i * hbar * (d_q * xq + d_p * xp) - v * lagrangian + v * shift);
                }
            }
            let trim = |g: &UniformGrid<R>| UniformGrid::new(g.point(r), g.point(g.count - 1 - r), g.count - 2 * r);
            Ok(PrequantumResult {
                section: PolarizedSectionSample {
                    grid: SectionGrid::PhasePlane { q: trim(&qg), p: trim(&pg) },
                    values,
                    ..section.clone()
                },
                half_form,
            })
        }
        SectionGrid::ActionAngle { h: hg, theta: tg } => {
            if section.trivialization != Trivialization::SigmaTilde || !matches!(f, Observable::H | Observable::H2) {
                return Err(Error::Unsupported(format!(
                    "observable {f} on action-angle samples in {:?}",
                    section.trivialization
                )));
            }
            let seam = if section.ramified { -R::one() } else { R::one() };
            let dt = tg.spacing();
            let mut values = Vec::with_capacity(n1 * n2);
            for a in 0..n1 {
                let h = hg.point(a);
                let row = &section.values[a * n2..(a + 1) * n2];
                // X_h = −∂_θ, X_{h₂} = −h ∂_θ; Θ̃ = −h dθ
                let (x_theta, lagrangian) = match f {
                    Observable::H => (-R::one(), R::zero()),
                    _ => (-h, h * h / lit(2.0)),
                };
                for b in 0..n2 {
                    let d = periodic_derivative(row, b, dt, order, seam);
                    values.push(i * hbar * d * x_theta - row[b] * lagrangian + row[b] * shift);
                }
            }
            Ok(PrequantumResult { section: PolarizedSectionSample { values, ..section.clone() }, half_form })
        }
    }
}

/// Interior residual of `(−∂_p + i t₁ ∂_q − p t₁/ħ) s` for a first-type
/// section in `σ`; returns the sup norm.
pub fn u1_pde_residual<R: Real>(section: &PolarizedSectionSample<R>, order: FdOrder) -> Result<R> {
    let (SectionGrid::PhasePlane { q: qg, p: pg }, Polarization::FirstType(fam)) = (section.grid, section.family)
    else {
        return Err(Error::Unsupported("PDE residual needs a first-type phase-plane section".into()));
    };
    let (n1, n2) = section.grid.shape();
    let r = stencil_radius(order);
    let t = fam.t1;
    let i = imag_unit::<R>();
    let mut sup = R::zero();
    for a in r..n1.saturating_sub(r) {
        for b in r..n2.saturating_sub(r) {
            let d_q = derivative_at(|j| section.value(j, b), n1, a, qg.spacing(), order, 1)?;
            let d_p = derivative_at(|j| section.value(a, j), n2, b, pg.spacing(), order, 1)?;
            let res = -d_p + i * d_q * t - section.value(a, b) * (pg.point(b) * t / section.hbar);
            sup = sup.max(res.norm());
        }
    }
    Ok(sup)
}

/// Sup-norm mismatch between `d/dt U₁ψ` (closed form, differenced in `t`)
/// and `(1/ħ)(ĥ₁^{pQ} U₁ψ − U₁ ĥ₁^{Sch} ψ)` on the interior of the grid.
///
/// At `t₁ < 2 dt` a one-sided second-order difference is used.
pub fn u1_consistency_check<R: Real>(
    psi: &SchrodingerState<R>,
    fam: FirstTypeFamily<R>,
    dt: R,
    q_grid: &UniformGrid<R>,
    p_grid: &UniformGrid<R>,
    order: FdOrder,
) -> Result<R> {
    let hbar = psi.hbar;
    let tol = R::one();
    let at = |t: R| u1_map(psi, FirstTypeFamily { t1: t }, q_grid, p_grid, tol);
    let two = lit::<R>(2.0);
    let derivative: Vec<C<R>> = if fam.t1 >= two * dt {
        let (a, b) = (at(fam.t1 + dt)?, at(fam.t1 - dt)?);
        a.values.iter().zip(&b.values).map(|(x, y)| (*x - *y) / (two * dt)).collect()
    } else {
        let (u0, u1, u2) = (at(fam.t1)?, at(fam.t1 + dt)?, at(fam.t1 + two * dt)?);
        u0.values
            .iter()
            .zip(&u1.values)
            .zip(&u2.values)
            .map(|((a, b), c)| (*a * lit::<R>(-3.0) + *b * lit::<R>(4.0) - *c) / (two * dt))
            .collect()
    };
    let u = at(fam.t1)?;
    let pq = prequantum_op(Observable::H1, &u, order)?;
    let u_sch = u1_map(&h1_sch(psi), fam, q_grid, p_grid, tol)?;
    let r = stencil_radius(order);
    let (n1, n2) = (q_grid.count, p_grid.count);
    let inner = n2 - 2 * r;
    let mut sup = R::zero();
    for a in r..n1 - r {
        for b in r..n2 - r {
            let rhs = (pq.section.values[(a - r) * inner + (b - r)] - u_sch.values[a * n2 + b]) / hbar;
            sup = sup.max((derivative[a * n2 + b] - rhs).norm());
        }
    }
    Ok(sup)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid() -> UniformGrid<f64> {
        UniformGrid::new(-10.0, 10.0, 256)
    }

    fn ground(hbar: f64) -> SchrodingerState<f64> {
        SchrodingerState::from_family(&StateFamily::Hermite { k: 0 }, grid(), hbar).unwrap()
    }

    #[test]
    fn gaussian_transform_matches_closed_form() {
        let hbar = 0.8;
        let s = ground(hbar);
        let pg = s.p_grid();
        for (k, v) in s.psi_p().iter().enumerate() {
            let p = pg.point(k);
            let exact = hbar.powf(-0.5) * (std::f64::consts::PI * hbar).powf(-0.25) * (-p * p / (2.0 * hbar)).exp();
            assert!((v - exact).norm() < 1e-12, "k={k}");
        }
    }

    #[test]
    fn round_trip_and_dual_spacing() {
        let g = UniformGrid::new(-7.0, 5.0, 200);
        let s = SchrodingerState::from_family(&StateFamily::<f64>::PlaneWaveWindow { momentum: 1.2, width: 1.1 }, g, 1.0)
            .unwrap();
        let back = inverse_fourier(s.psi_p(), &g, 1.0);
        let err = back.iter().zip(s.psi_q()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-13);
        let pg = s.p_grid();
        assert!((pg.spacing() * g.spacing() * 200.0 - std::f64::consts::TAU).abs() < 1e-12);
    }

    #[test]
    fn plane_wave_transform_peaks_at_momentum() {
        let s = SchrodingerState::from_family(&StateFamily::PlaneWaveWindow { momentum: 2.0, width: 2.5 }, grid(), 0.5)
            .unwrap();
        let pg = s.p_grid();
        let (kmax, _) = s
            .psi_p()
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm().partial_cmp(&b.1.norm()).unwrap())
            .unwrap();
        assert!((pg.point(kmax) - 2.0).abs() <= pg.spacing());
    }

    #[test]
    fn u1_at_zero_time_reproduces_state() {
        let s = SchrodingerState::from_family(&StateFamily::Hermite { k: 3 }, grid(), 1.0).unwrap();
        let fam = FirstTypeFamily::new(0.0).unwrap();
        for j in [40, 128, 200] {
            let q = grid().point(j);
            for p in [-2.0, 0.0, 3.5] {
                assert!((u1_value(&s, fam, q, p) - s.psi_q()[j]).norm() < 1e-13);
            }
        }
        let q = 0.123;
        let exact = hermite_function(3, q, 1.0);
        assert!((s.interpolate(q) - exact).norm() < 1e-12);
    }

    #[test]
    fn u1_of_ground_state_matches_completed_square() {
        let hbar = 1.0;
        let s = ground(hbar);
        let t = 0.7;
        let fam = FirstTypeFamily::new(t).unwrap();
        for &(q, p) in &[(0.0, 0.0), (0.5, -1.0), (-1.3, 0.8), (2.0, 2.0)] {
            let z = Complex::new(t * p, -q);
            let exact = (z * z / (2.0 * hbar * (1.0 + t)) - t * p * p / (2.0 * hbar)).exp()
                * ((std::f64::consts::PI * hbar).powf(-0.25) / (1.0 + t).sqrt());
            assert!((u1_value(&s, fam, q, p) - exact).norm() < 1e-8);
        }
    }

    #[test]
    fn h1_sch_matches_fourth_order_laplacian() {
        let s = ground(1.0);
        let out = h1_sch(&s);
        let g = grid();
        let dq = g.spacing();
        for j in [60, 128, 190] {
            let lap = derivative_at(|i| s.psi_q()[i], g.count, j, dq, FdOrder::Fourth, 2).unwrap();
            assert!((out.psi_q()[j] + lap * 0.5).norm() < 1e-4);
        }
        assert!(out.psi_q().iter().all(|v| v.im.abs() < 1e-12));
    }

    fn plane_section(f: impl Fn(f64, f64) -> Complex<f64>) -> PolarizedSectionSample<f64> {
        let qg = UniformGrid::new(-2.0, 2.0, 81);
        let pg = UniformGrid::new(-1.0, 1.0, 41);
        let mut values = Vec::new();
        for q in qg.points() {
            for p in pg.points() {
                values.push(f(q, p));
            }
        }
        PolarizedSectionSample {
            grid: SectionGrid::PhasePlane { q: qg, p: pg },
            values,
            family: Polarization::FirstType(FirstTypeFamily { t1: 0.0 }),
            trivialization: Trivialization::Sigma,
            halfform: HalfFormLabel::Dq,
            ramified: false,
            hbar: 1.0,
        }
    }

    #[test]
    fn momentum_operator_eigenvalue() {
        let p0 = 1.3;
        let s = plane_section(|q, _| Complex::from_polar(1.0, -p0 * q));
        let out = prequantum_op(Observable::P, &s, FdOrder::Fourth).unwrap();
        assert_eq!(out.half_form, HalfFormTerm::Vanishes);
        let SectionGrid::PhasePlane { q, p } = out.section.grid else { unreachable!() };
        for a in 0..q.count {
            for b in 0..p.count {
                let v = out.section.value(a, b);
                let base = Complex::from_polar(1.0, -p0 * q.point(a));
                assert!((v - base * p0).norm() < 1e-4);
            }
        }
    }

    #[test]
    fn position_operator_multiplies() {
        let s = plane_section(|q, _| Complex::new((-q * q).exp(), 0.0));
        let out = prequantum_op(Observable::Q, &s, FdOrder::Second).unwrap();
        let SectionGrid::PhasePlane { q, .. } = out.section.grid else { unreachable!() };
        for a in 0..q.count {
            let x = q.point(a);
            assert!((out.section.value(a, 3) - Complex::new(x * (-x * x).exp(), 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn unsupported_observable_string() {
        assert!(matches!("x".parse::<Observable>(), Err(Error::Unsupported(_))));
        assert_eq!("h2".parse::<Observable>().unwrap(), Observable::H2);
    }

    #[test]
    fn coarse_grid_is_rejected() {
        let mut s = plane_section(|_, _| Complex::new(1.0, 0.0));
        s.grid = SectionGrid::PhasePlane { q: UniformGrid::new(0.0, 1.0, 3), p: UniformGrid::new(0.0, 1.0, 3) };
        s.values.truncate(9);
        assert!(matches!(prequantum_op(Observable::P, &s, FdOrder::Fourth), Err(Error::Grid(_))));
    }

    #[test]
    fn pde_residual_is_small() {
        let s = ground(1.0);
        let fam = FirstTypeFamily::new(0.5).unwrap();
        let qg = UniformGrid::new(-3.0, 3.0, 61);
        let pg = UniformGrid::new(-2.0, 2.0, 41);
        let sec = u1_map(&s, fam, &qg, &pg, 1e-9).unwrap();
        assert!(u1_pde_residual(&sec, FdOrder::Fourth).unwrap() < 1e-4);
    }

    #[test]
    fn generator_consistency() {
        let s = ground(1.0);
        let qg = UniformGrid::new(-3.0, 3.0, 61);
        let pg = UniformGrid::new(-2.0, 2.0, 41);
        for t in [0.0, 0.5] {
            let fam = FirstTypeFamily::new(t).unwrap();
            let r = u1_consistency_check(&s, fam, 1e-4, &qg, &pg, FdOrder::Fourth).unwrap();
            assert!(r < 1e-4, "t={t} residual {r}");
        }
    }

    #[test]
    fn unresolved_state_is_reported() {
        let s = SchrodingerState::from_family(&StateFamily::Gaussian { width: 8.0, center: 0.0 }, grid(), 1.0).unwrap();
        let qg = UniformGrid::new(-1.0, 1.0, 16);
        let err = u1_map(&s, FirstTypeFamily::new(0.1).unwrap(), &qg, &qg, 1e-9).unwrap_err();
        assert!(matches!(err, Error::NotConverged { .. }));
    }

    proptest! {
        #[test]
        fn fourier_is_linear(ar in -2.0..2.0f64, ai in -2.0..2.0f64, c in -2.0..2.0f64) {
            let g = UniformGrid::new(-8.0, 8.0, 64);
            let x = SchrodingerState::from_family(&StateFamily::Gaussian { width: 1.0, center: c }, g, 1.0).unwrap();
            let y = SchrodingerState::from_family(&StateFamily::PlaneWaveWindow { momentum: c, width: 1.5 }, g, 1.0).unwrap();
            let a = Complex::new(ar, ai);
            let b = Complex::new(ai, -ar);
            let combo: Vec<_> = x.psi_q().iter().zip(y.psi_q()).map(|(u, v)| u * a + v * b).collect();
            let direct = fourier(&combo, &g, 1.0);
            for (k, d) in direct.iter().enumerate() {
                prop_assert!((d - (x.psi_p()[k] * a + y.psi_p()[k] * b)).norm() < 1e-12);
            }
        }

        #[test]
        fn u1_is_continuous_at_zero_time(q in -3.0..3.0f64, p in -2.0..2.0f64) {
            let s = ground(1.0);
            let v0 = s.interpolate(q);
            let d1 = (u1_value(&s, FirstTypeFamily { t1: 1e-3 }, q, p) - v0).norm();
            let d2 = (u1_value(&s, FirstTypeFamily { t1: 1e-4 }, q, p) - v0).norm();
            prop_assert!(d2 <= d1 + 1e-14);
            prop_assert!(d2 < 1e-3);
        }
    }
}
