//! Phase-space coordinates, prequantum trivializations and the numeric
//! configuration shared by every module.
//!
//! The phase space is `R²` with `ω = dq∧dp` and symplectic potential
//! `Θ = p dq`. Action-angle coordinates are `h = (q²+p²)/2` and the polar
//! angle `θ ∈ [0, 2π)`, so that `ω = dh∧dθ`.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::UniformGrid;
use crate::scalar::{lit, Real};

/// Finite-difference stencil order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum FdOrder {
    Second,
    Fourth,
}

impl FdOrder {
    pub fn as_usize(self) -> usize {
        match self {
            FdOrder::Second => 2,
            FdOrder::Fourth => 4,
        }
    }
}

impl TryFrom<u8> for FdOrder {
    type Error = String;

    fn try_from(v: u8) -> std::result::Result<Self, String> {
        match v {
            2 => Ok(FdOrder::Second),
            4 => Ok(FdOrder::Fourth),
            other => Err(format!("fd_order must be 2 or 4, got {other}")),
        }
    }
}

impl From<FdOrder> for u8 {
    fn from(o: FdOrder) -> u8 {
        o.as_usize() as u8
    }
}

/// Global numeric configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "R: Serialize", deserialize = "R: Deserialize<'de>"))]
pub struct QuantConfig<R> {
    pub hbar: R,
    pub q_grid: UniformGrid<R>,
    pub p_grid: UniformGrid<R>,
    pub h_grid: UniformGrid<R>,
    pub theta_grid: UniformGrid<R>,
    pub quad_tol: R,
    pub fd_order: FdOrder,
}

impl<R: Real> Default for QuantConfig<R> {
    fn default() -> Self {
        Self {
            hbar: R::one(),
            q_grid: UniformGrid::new(lit(-10.0), lit(10.0), 256),
            p_grid: UniformGrid::new(lit(-4.0), lit(4.0), 81),
            h_grid: UniformGrid::new(lit(0.05), lit(6.0), 120),
            theta_grid: UniformGrid::angle(128),
            quad_tol: lit(1e-9),
            fd_order: FdOrder::Fourth,
        }
    }
}

impl<R: Real> QuantConfig<R> {
    pub fn with_hbar(mut self, hbar: R) -> Self {
        self.hbar = hbar;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.hbar.is_finite() && self.hbar > R::zero()) {
            return Err(Error::config(format!("hbar must be positive, got {}", self.hbar)));
        }
        self.q_grid.validate("q_grid")?;
        self.p_grid.validate("p_grid")?;
        self.h_grid.validate("h_grid")?;
        self.theta_grid.validate("theta_grid")?;
        if self.q_grid.periodic || self.p_grid.periodic || self.h_grid.periodic {
            return Err(Error::config("q_grid, p_grid and h_grid must not be periodic"));
        }
        if self.h_grid.min <= R::zero() {
            return Err(Error::config("h_grid must lie in h > 0"));
        }
        let span = self.theta_grid.max - self.theta_grid.min;
        if !self.theta_grid.periodic || (span - R::TAU()).abs() > lit::<R>(1e-12) * R::TAU() {
            return Err(Error::config("theta_grid must be periodic with period 2π"));
        }
        if !(self.quad_tol > R::zero() && self.quad_tol < R::one()) {
            return Err(Error::config("quad_tol must lie in (0, 1)"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhasePoint<R> {
    pub q: R,
    pub p: R,
}

impl<R: Real> PhasePoint<R> {
    pub fn new(q: R, p: R) -> Self {
        Self { q, p }
    }

    /// Energy `h = (q²+p²)/2`.
    pub fn energy(&self) -> R {
        (self.q * self.q + self.p * self.p) / lit(2.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ActionAngle<R> {
    pub h: R,
    pub theta: R,
}

impl<R: Real> ActionAngle<R> {
    pub fn new(h: R, theta: R) -> Self {
        Self { h, theta }
    }
}

/// Trivializing section of the prequantum line bundle.
///
/// `Sigma` is the constant section with `∇σ = (i/ħ) p dq σ`; `SigmaTilde`
/// is the rotation-invariant `σ̃ = e^{-iqp/2ħ} σ` with `∇σ̃ = -(i/ħ) h dθ σ̃`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Trivialization {
    Sigma,
    SigmaTilde,
}

/// Polar coordinates of a non-zero point; `θ` is the full-plane angle.
pub fn to_action_angle<R: Real>(pt: PhasePoint<R>) -> Result<ActionAngle<R>> {
    if pt.q == R::zero() && pt.p == R::zero() {
        return Err(Error::domain("angle undefined at elliptic fixed point"));
    }
    let mut theta = pt.p.atan2(pt.q);
    if theta < R::zero() {
        theta += R::TAU();
    }
    if theta >= R::TAU() {
        theta = R::zero();
    }
    Ok(ActionAngle { h: pt.energy(), theta })
}

pub fn from_action_angle<R: Real>(aa: ActionAngle<R>) -> PhasePoint<R> {
    let r = (lit::<R>(2.0) * aa.h).sqrt();
    let (s, c) = aa.theta.sin_cos();
    PhasePoint { q: r * c, p: r * s }
}

/// Factor that re-expresses a section sample given in `from` in the `to`
/// trivialization: `s_to = factor · s_from`.
pub fn gauge_factor<R: Real>(
    pt: PhasePoint<R>,
    from: Trivialization,
    to: Trivialization,
    hbar: R,
) -> Complex<R> {
    use Trivialization::*;
    let phase = pt.q * pt.p / (lit::<R>(2.0) * hbar);
    match (from, to) {
        (Sigma, Sigma) | (SigmaTilde, SigmaTilde) => Complex::new(R::one(), R::zero()),
        (Sigma, SigmaTilde) => Complex::from_polar(R::one(), phase),
        (SigmaTilde, Sigma) => Complex::from_polar(R::one(), -phase),
    }
}
