//! The two flows of Kähler polarizations: the free-particle flow of
//! `h₁ = p²/2` and the toric flow of `h₂ = H²/2`.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phase::{ActionAngle, PhasePoint};
use crate::scalar::{lit, Real};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FirstTypeFamily<R> {
    pub t1: R,
}

impl<R: Real> FirstTypeFamily<R> {
    pub fn new(t1: R) -> Result<Self> {
        if !(t1 >= R::zero() && t1.is_finite()) {
            return Err(Error::domain(format!("flow time t1 must be finite and ≥ 0, got {t1}")));
        }
        Ok(Self { t1 })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SecondTypeFamily<R> {
    pub t2: R,
}

impl<R: Real> SecondTypeFamily<R> {
    pub fn new(t2: R) -> Result<Self> {
        if !(t2 >= R::zero() && t2.is_finite()) {
            return Err(Error::domain(format!("flow time t2 must be finite and ≥ 0, got {t2}")));
        }
        Ok(Self { t2 })
    }

    /// `β(t) = 1/t`, the rescaling under which `β du` tends to `dh`.
    pub fn beta(&self) -> R {
        self.t2.recip()
    }
}

/// Inverse Legendre data at a dual point `v`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LegendreData<R> {
    pub v: R,
    pub h_of_v: R,
    pub k: R,
}

/// `h₁ = p²/2`.
pub fn h1<R: Real>(pt: PhasePoint<R>) -> R {
    pt.p * pt.p / lit(2.0)
}

/// `h₂ = H²/2 = (q²+p²)²/8`.
pub fn h2<R: Real>(pt: PhasePoint<R>) -> R {
    let h = pt.energy();
    h * h / lit(2.0)
}

/// `z = q + i t₁ p`.
pub fn z_coord<R: Real>(pt: PhasePoint<R>, fam: FirstTypeFamily<R>) -> Complex<R> {
    Complex::new(pt.q, fam.t1 * pt.p)
}

fn check_h<R: Real>(h: R) -> Result<()> {
    if h > R::zero() && h.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("toric coordinates need h > 0, got {h}")))
    }
}

/// `g(h) = h log(h)/2 − h/2 + t h²/2`.
pub fn symplectic_potential<R: Real>(h: R, fam: SecondTypeFamily<R>) -> Result<R> {
    check_h(h)?;
    let half = lit::<R>(0.5);
    Ok(half * h * h.ln() - half * h + half * fam.t2 * h * h)
}

/// `g′(h) = log(h)/2 + t h`.
pub fn symplectic_potential_d1<R: Real>(h: R, fam: SecondTypeFamily<R>) -> Result<R> {
    check_h(h)?;
    Ok(lit::<R>(0.5) * h.ln() + fam.t2 * h)
}

/// `g″(h) = 1/(2h) + t`.
pub fn symplectic_potential_d2<R: Real>(h: R, fam: SecondTypeFamily<R>) -> Result<R> {
    check_h(h)?;
    Ok((lit::<R>(2.0) * h).recip() + fam.t2)
}

const LEGENDRE_MAX_ITER: usize = 200;

/// Solves `g′(h) = v` for `h` and returns the Kähler potential `k = h v − g(h)`.
///
/// Works in `s = log h`, where the equation `s/2 + t eˢ = v` is monotone;
/// Newton steps are kept inside a shrinking bracket.
pub fn legendre<R: Real>(v: R, fam: SecondTypeFamily<R>) -> Result<LegendreData<R>> {
    if !v.is_finite() {
        return Err(Error::domain("dual variable must be finite"));
    }
    let t = fam.t2;
    let half = lit::<R>(0.5);
    let two = lit::<R>(2.0);
    let resid = |s: R| half * s + t * s.exp() - v;

    let mut hi = two * v;
    if t > R::zero() && v / t >= R::one() {
        hi = hi.min((v / t).ln());
    }
    let mut lo = two * (v - t * hi.exp());
    if t == R::zero() {
        lo = hi;
    }
    let mut s = hi;
    let tol = lit::<R>(4.0) * R::epsilon();
    let mut converged = t == R::zero();
    for _ in 0..LEGENDRE_MAX_ITER {
        if converged {
            break;
        }
        let f = resid(s);
        if f == R::zero() {
            converged = true;
            break;
        }
        if f > R::zero() {
            hi = s;
        } else {
            lo = s;
        }
        let df = half + t * s.exp();
        let mut next = s - f / df;
        if !(next > lo && next < hi) {
            next = half * (lo + hi);
        }
        let scale = R::one().max(next.abs());
        if (next - s).abs() <= tol * scale || (hi - lo) <= tol * scale {
            s = next;
            converged = true;
            break;
        }
        s = next;
    }
    if !converged {
        return Err(Error::not_converged(
            "Legendre inversion did not converge",
            format!("v={v}, t2={t}, bracket=[{lo}, {hi}]"),
        ));
    }
    let h = s.exp();
    let k = h * v - symplectic_potential(h, fam)?;
    Ok(LegendreData { v, h_of_v: h, k })
}

/// `w = √(2h) e^{t h} e^{iθ}`.
pub fn w_coord<R: Real>(aa: ActionAngle<R>, fam: SecondTypeFamily<R>) -> Result<Complex<R>> {
    check_h(aa.h)?;
    let modulus = (lit::<R>(2.0) * aa.h).sqrt() * (fam.t2 * aa.h).exp();
    Ok(Complex::from_polar(modulus, aa.theta))
}

/// `u = log(w/√2) = t h + log(h)/2 + iθ`.
pub fn u_coord<R: Real>(aa: ActionAngle<R>, fam: SecondTypeFamily<R>) -> Result<Complex<R>> {
    check_h(aa.h)?;
    Ok(Complex::new(fam.t2 * aa.h + lit::<R>(0.5) * aa.h.ln(), aa.theta))
}

/// Coefficients of `dh` and `dθ` in `du`.
pub fn du_form_components<R: Real>(aa: ActionAngle<R>, fam: SecondTypeFamily<R>) -> Result<(Complex<R>, Complex<R>)> {
    let dh = symplectic_potential_d2(aa.h, fam)?;
    Ok((Complex::new(dh, R::zero()), Complex::new(R::zero(), R::one())))
}
