//! Run configuration: JSON file merged with command-line overrides.

use std::fs;
use std::path::{Path, PathBuf};

use bksreg_core::bks::{PairingQuadrature, PairingSchedule, PairingTolerance};
use bksreg_core::schrodinger::StateFamily;
use bksreg_core::{FdOrder, QuantConfig64, UniformGrid64};
use serde::Deserialize;

use crate::error::CliError;

/// Fields as they appear in the configuration file; everything is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    hbar: Option<f64>,
    q_grid: Option<UniformGrid64>,
    p_grid: Option<UniformGrid64>,
    h_grid: Option<UniformGrid64>,
    theta_grid: Option<UniformGrid64>,
    quad_tol: Option<f64>,
    fd_order: Option<FdOrder>,
    m: Option<usize>,
    m_max: Option<usize>,
    state: Option<StateFamily<f64>>,
    schedule: Option<PairingSchedule<f64>>,
    quadrature: Option<PairingQuadrature<f64>>,
    tolerance: Option<PairingTolerance<f64>>,
    hbar_scan: Option<Vec<f64>>,
    exclusion: Option<f64>,
    out: Option<PathBuf>,
    summary_out: Option<PathBuf>,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub m: Option<usize>,
    pub hbar: Option<f64>,
    pub out: Option<PathBuf>,
    pub verbose: bool,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub quant: QuantConfig64,
    pub m: usize,
    /// Highest level for `spectrum`; `None` writes the header only.
    pub m_max: Option<usize>,
    pub state: StateFamily<f64>,
    pub schedule: PairingSchedule<f64>,
    pub quadrature: PairingQuadrature<f64>,
    pub tolerance: PairingTolerance<f64>,
    /// `ħ` values for the residual-order fit.
    pub hbar_scan: Vec<f64>,
    /// Fraction of the caustic distance excluded from residual norms.
    pub exclusion: f64,
    pub out: Option<PathBuf>,
    pub summary_out: Option<PathBuf>,
    pub verbose: bool,
}

impl RunConfig {
    pub fn load(path: &Path, overrides: Overrides) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_owned(), source })?;
        let file: FileConfig =
            serde_json::from_str(&text).map_err(|source| CliError::Parse { path: path.to_owned(), source })?;
        let cfg = Self::merge(file, overrides);
        cfg.validate()?;
        Ok(cfg)
    }

    fn merge(file: FileConfig, o: Overrides) -> Self {
        let d = QuantConfig64::default();
        let quant = QuantConfig64 {
            hbar: o.hbar.or(file.hbar).unwrap_or(d.hbar),
            q_grid: file.q_grid.unwrap_or(d.q_grid),
            p_grid: file.p_grid.unwrap_or(d.p_grid),
            h_grid: file.h_grid.unwrap_or(d.h_grid),
            theta_grid: file.theta_grid.unwrap_or(d.theta_grid),
            quad_tol: file.quad_tol.unwrap_or(d.quad_tol),
            fd_order: file.fd_order.unwrap_or(d.fd_order),
        };
        let m = o.m.or(file.m);
        Self {
            quant,
            m: m.unwrap_or(0),
            m_max: file.m_max.or(m),
            state: file.state.unwrap_or(StateFamily::Hermite { k: 0 }),
            schedule: file.schedule.unwrap_or_default(),
            quadrature: file.quadrature.unwrap_or_default(),
            tolerance: file.tolerance.unwrap_or_default(),
            hbar_scan: file.hbar_scan.unwrap_or_else(|| vec![0.1, 0.05, 0.025]),
            exclusion: file.exclusion.unwrap_or(0.2),
            out: o.out.or(file.out),
            summary_out: file.summary_out,
            verbose: o.verbose,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.quant.validate()?;
        self.state.validate()?;
        self.schedule.validate()?;
        let bad = |msg: &str| Err(CliError::Usage(format!("invalid configuration: {msg}")));
        if self.quadrature.h_nodes < 2 || self.quadrature.theta_nodes < 2 {
            return bad("quadrature node counts must be at least 2");
        }
        if !(self.tolerance.rel > 0.0 && self.tolerance.abs > 0.0) {
            return bad("tolerances must be positive");
        }
        if self.hbar_scan.iter().any(|h| !(*h > 0.0 && h.is_finite())) {
            return bad("hbar_scan entries must be positive");
        }
        if !(self.exclusion > 0.0 && self.exclusion < 1.0) {
            return bad("exclusion must lie in (0, 1)");
        }
        Ok(())
    }
}
