//! Invariant suite run by the `verify` command.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bks::{regularized_pairing_in, wedge_identity_residual, PairingQuadrature};
use crate::energy::{
    angular_eigen_residual, calibrate_a_m, eigen_residual, h2_mu, level, phi_flow_check, phi_m_section,
    section_inner, spectrum, u2_consistency_check, uncorrected_spectrum, MonomialSection,
};
use crate::error::Result;
use crate::families::{legendre, symplectic_potential_d1, symplectic_potential_d2, SecondTypeFamily};
use crate::families::FirstTypeFamily;
use crate::phase::{from_action_angle, gauge_factor, to_action_angle, ActionAngle, PhasePoint, QuantConfig, Trivialization};
use crate::scalar::{lit, Real};
use crate::schrodinger::{inverse_fourier, u1_consistency_check, u1_map, u1_pde_residual, SchrodingerState, StateFamily};
use crate::semiclassical::{self, maslov_phase_at, psi_lagrangian};

const SEED: u64 = 0x5eed_b6f5;

/// Result of one invariant check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub residual: f64,
    pub threshold: f64,
    pub passed: bool,
}

fn outcome<R: Real>(name: &'static str, residual: R, threshold: f64) -> CheckOutcome {
    let residual = residual.to_f64().unwrap_or(f64::NAN);
    CheckOutcome { name, residual, threshold, passed: residual <= threshold }
}

fn sup<R: Real>(it: impl Iterator<Item = R>) -> R {
    it.fold(R::zero(), |a, b| if b.is_nan() || b > a { b } else { a })
}

/// Runs every check on `cfg`; a check that errors counts as failed with an
/// infinite residual.
pub fn run_suite<R: Real>(cfg: &QuantConfig<R>) -> Result<Vec<CheckOutcome>> {
    cfg.validate()?;
    let hbar = cfg.hbar;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut out = Vec::new();
    let mut push = |name: &'static str, r: Result<R>, threshold: f64| {
        out.push(match r {
            Ok(v) => outcome(name, v, threshold),
            Err(_) => CheckOutcome { name, residual: f64::INFINITY, threshold, passed: false },
        });
    };

    let points: Vec<(f64, f64)> = (0..10_000).map(|_| (rng.gen_range(1e-6..10.0), rng.gen_range(0.0..std::f64::consts::TAU))).collect();
    push(
        "action-angle round trip",
        Ok(sup(points.iter().map(|&(h, th)| {
            let aa = ActionAngle::new(lit::<R>(h), lit::<R>(th));
            let pt = from_action_angle(aa);
            let back = to_action_angle(pt).map(from_action_angle).unwrap_or(PhasePoint::new(R::nan(), R::nan()));
            let r = (pt.q * pt.q + pt.p * pt.p).sqrt();
            ((back.q - pt.q).abs() + (back.p - pt.p).abs()) / r
        }))),
        1e-14,
    );

    push(
        "gauge factor unimodular",
        Ok(sup(points.iter().map(|&(h, th)| {
            let pt = from_action_angle(ActionAngle::new(lit::<R>(h), lit::<R>(th)));
            let f = gauge_factor(pt, Trivialization::Sigma, Trivialization::SigmaTilde, hbar);
            let g = gauge_factor(pt, Trivialization::SigmaTilde, Trivialization::Sigma, hbar);
            (f.norm() - R::one()).abs().max((f * g - Complex::new(R::one(), R::zero())).norm())
        }))),
        1e-14,
    );

    let wedge: Vec<(f64, f64, f64, f64)> = (0..10_000)
        .map(|_| {
            let r = 10f64.powf(rng.gen_range(-3.0..1.0));
            let th = rng.gen_range(0.0..std::f64::consts::TAU);
            (r * th.cos(), r * th.sin(), rng.gen_range(0.0..10.0), 10f64.powf(rng.gen_range(-3.0..6.0)))
        })
        .collect();
    push(
        "wedge identity",
        wedge
            .iter()
            .map(|&(q, p, t1, t2)| wedge_identity_residual(PhasePoint::new(lit(q), lit(p)), lit(t1), lit(t2)))
            .collect::<Result<Vec<R>>>()
            .map(|v| sup(v.into_iter())),
        1e-12,
    );

    let legendre_check = || -> Result<R> {
        let mut worst = R::zero();
        for &t in &[0.0, 0.5, 3.0] {
            let fam = SecondTypeFamily::new(lit::<R>(t))?;
            for j in 0..=40 {
                let v = lit::<R>(-6.0 + 0.3 * j as f64);
                let d = legendre(v, fam)?;
                let step = lit::<R>(1e-5);
                let (a, b) = (legendre(v + step, fam)?, legendre(v - step, fam)?);
                let dk = (a.k - b.k) / (step + step);
                let closed = (fam.t2 * d.h_of_v * d.h_of_v + d.h_of_v) / lit(2.0);
                let scale = R::one().max(d.h_of_v);
                worst = worst
                    .max((symplectic_potential_d1(d.h_of_v, fam)? - v).abs() / R::one().max(v.abs()))
                    .max((d.k - closed).abs() / scale)
                    .max(lit::<R>(1e-4) * (dk - d.h_of_v).abs() / scale);
            }
        }
        Ok(worst)
    };
    push("legendre involution", legendre_check(), 1e-12);

    push(
        "symplectic potential convexity",
        (|| {
            let mut worst = R::zero();
            for &t in &[0.0, 1.0, 1e3] {
                let fam = SecondTypeFamily::new(lit::<R>(t))?;
                for j in 0..=60 {
                    let h = lit::<R>(10f64.powf(-6.0 + 0.2 * j as f64));
                    let g2 = symplectic_potential_d2(h, fam)?;
                    worst = worst.max(if g2 > R::zero() { R::zero() } else { R::one() });
                }
            }
            Ok(worst)
        })(),
        0.0,
    );

    let ground = SchrodingerState::from_family(&StateFamily::Hermite { k: 0 }, cfg.q_grid, hbar);
    push(
        "fourier round trip",
        ground.as_ref().map_err(Clone::clone).map(|s| {
            let back = inverse_fourier(s.psi_p(), s.q_grid(), hbar);
            let peak = sup(s.psi_q().iter().map(|v| v.norm()));
            sup(back.iter().zip(s.psi_q()).map(|(a, b)| (*a - *b).norm())) / peak
        }),
        1e-10,
    );

    let order = cfg.fd_order;
    let t1 = FirstTypeFamily::new(lit::<R>(0.5))?;
    let (qg, pg) = (cfg.q_grid, cfg.p_grid);
    push(
        "U1 polarization PDE",
        ground
            .as_ref()
            .map_err(Clone::clone)
            .and_then(|s| u1_map(s, t1, &qg, &pg, cfg.quad_tol))
            .and_then(|sec| u1_pde_residual(&sec, order)),
        1e-3,
    );
    push(
        "U1 generator consistency",
        ground
            .as_ref()
            .map_err(Clone::clone)
            .and_then(|s| u1_consistency_check(s, t1, lit(1e-4), &qg, &pg, order)),
        1e-4,
    );

    let (hg, tg) = (cfg.h_grid, cfg.theta_grid);
    let t2 = lit::<R>(0.5);
    push(
        "U2 generator consistency",
        (0..=3).map(|m| u2_consistency_check(m, t2, lit(1e-4), &hg, &tg, hbar, order)).collect::<Result<Vec<R>>>().map(|v| sup(v.into_iter())),
        1e-3,
    );
    push(
        "toric flow of monomial sections",
        (0..=3).map(|m| phi_flow_check(m, t2, lit(1e-4), &hg, &tg, hbar, order)).collect::<Result<Vec<R>>>().map(|v| sup(v.into_iter())),
        1e-3,
    );
    push(
        "h2 eigenrelation (spectral)",
        (0..=3)
            .map(|m| {
                let s = phi_m_section(m, t2, &hg, &tg, hbar)?;
                let e = level(m, hbar);
                Ok(eigen_residual(&h2_mu(&s)?, &s, e * e / lit(2.0)))
            })
            .collect::<Result<Vec<R>>>()
            .map(|v| sup(v.into_iter())),
        1e-11,
    );
    push(
        "h eigenrelation (angular differences)",
        (0..=3).map(|m| angular_eigen_residual(m, t2, &hg, &tg, hbar, order)).collect::<Result<Vec<R>>>().map(|v| sup(v.into_iter())),
        1e-3,
    );
    push(
        "monomial orthogonality",
        (|| {
            let sections = (0..=3).map(|m| phi_m_section(m, t2, &hg, &tg, hbar)).collect::<Result<Vec<_>>>()?;
            let mut worst = R::zero();
            for a in 0..sections.len() {
                for b in 0..a {
                    let n = (section_inner(&sections[a], &sections[a])?.norm() * section_inner(&sections[b], &sections[b])?.norm()).sqrt();
                    worst = worst.max(section_inner(&sections[a], &sections[b])?.norm() / n);
                }
            }
            Ok(worst)
        })(),
        1e-12,
    );
    push(
        "monomial and expanded forms",
        (|| {
            let mut worst = R::zero();
            for _ in 0..100 {
                let m = rng.gen_range(0..=5usize);
                let t = lit::<R>(rng.gen_range(0.0..3.0));
                let aa = ActionAngle::new(lit::<R>(rng.gen_range(0.05..5.0)), lit::<R>(rng.gen_range(0.0..std::f64::consts::TAU)));
                let s = MonomialSection::new(m, t, hbar)?;
                let (a, b) = (s.expanded(aa)?, s.monomial(aa)?);
                worst = worst.max((a - b).norm() / a.norm());
            }
            Ok(worst)
        })(),
        1e-12,
    );
    push(
        "calibration consistency",
        (0..=5).map(|m| calibrate_a_m(m, hbar).map(|c| c.closed_form_gap)).collect::<Result<Vec<R>>>().map(|v| sup(v.into_iter())),
        1e-6,
    );
    push(
        "pairing gauge invariance",
        (|| {
            let g = crate::grid::UniformGrid::new(cfg.q_grid.min, cfg.q_grid.max, 128);
            let psi = SchrodingerState::from_family(&StateFamily::Hermite { k: 1 }, g, hbar)?;
            let quad = PairingQuadrature { h_nodes: 12, theta_nodes: 8, ..Default::default() };
            let a = regularized_pairing_in(&psi, 1, lit(0.05), lit(20.0), &quad, Trivialization::Sigma)?;
            let b = regularized_pairing_in(&psi, 1, lit(0.05), lit(20.0), &quad, Trivialization::SigmaTilde)?;
            Ok((a - b).norm() / R::one().max(a.norm()))
        })(),
        1e-12,
    );
    push(
        "maslov phase",
        (0..=8)
            .map(|m| {
                let s = psi_lagrangian(m, hbar);
                let mut worst = R::zero();
                for j in 0..=20 {
                    let q = s.caustic_q * lit::<R>(-0.95 + 0.095 * j as f64);
                    worst = worst.max((maslov_phase_at(&s, q)? - R::FRAC_PI_2()).abs());
                }
                Ok(worst)
            })
            .collect::<Result<Vec<R>>>()
            .map(|v| sup(v.into_iter())),
        1e-12,
    );
    push(
        "corrected spectrum shift",
        Ok(sup(spectrum(10, hbar)
            .iter()
            .zip(uncorrected_spectrum(10, hbar))
            .map(|(c, u)| (*c - u - hbar / lit(2.0)).abs() / hbar))),
        1e-14,
    );
    push(
        "exact eigenstate residual",
        (0..=4)
            .map(|m| {
                let s = semiclassical::exact_eigenstate(m, cfg.q_grid, hbar)?;
                Ok(semiclassical::eigen_residual(&s, level(m, hbar)))
            })
            .collect::<Result<Vec<R>>>()
            .map(|v| sup(v.into_iter())),
        1e-8,
    );
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_passes() {
        let cfg = QuantConfig::<f64>::default();
        let res = run_suite(&cfg).unwrap();
        for c in &res {
            assert!(c.passed, "{} residual {:e} > {:e}", c.name, c.residual, c.threshold);
        }
    }
}
