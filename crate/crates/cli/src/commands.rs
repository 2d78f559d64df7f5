use bksreg_core::bks::pairing_sequence;
use bksreg_core::energy::{spectrum, uncorrected_spectrum};
use bksreg_core::semiclassical::{
    exact_eigenstate, exact_overlap, maslov_phase, psi_lagrangian, residual_diagnostics, ResidualResolution,
};
use bksreg_core::verify::run_suite;
use bksreg_core::SchrodingerState64;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{complex, csv, emit, fmt, json_text, num};

pub fn cmd_spectrum(cfg: &RunConfig) -> Result<(), CliError> {
    let hbar = cfg.quant.hbar;
    let rows: Vec<Vec<f64>> = match cfg.m_max {
        Some(n) => spectrum(n, hbar).into_iter().zip(uncorrected_spectrum(n, hbar)).map(|(c, u)| vec![c, u]).collect(),
        None => Vec::new(),
    };
    let text = csv(&["m", "energy_corrected", "energy_uncorrected"], rows, |i| Some(i.to_string()));
    emit(cfg.out.as_deref(), &text)
}

pub fn cmd_pair(cfg: &RunConfig) -> Result<(), CliError> {
    let q = &cfg.quant;
    let psi = SchrodingerState64::from_family(&cfg.state, q.q_grid, q.hbar)?;
    let res = pairing_sequence(&psi, cfg.m, &cfg.schedule, &cfg.quadrature, &cfg.tolerance)?;
    if cfg.verbose {
        for s in &res.per_step {
            eprintln!("t1={} t2={} value={}{:+}i", fmt(s.t1), fmt(s.t2), fmt(s.value.re), fmt(s.value.im));
        }
    }
    let steps: Vec<Value> = res
        .per_step
        .iter()
        .map(|s| json!({ "t1": num(s.t1), "t2": num(s.t2), "value": complex(s.value) }))
        .collect();
    let mut doc = json!({
        "m": cfg.m,
        "hbar": num(q.hbar),
        "state": serde_json::to_value(cfg.state).expect("state serializes"),
        "extrapolation": serde_json::to_value(res.extrapolation).expect("enum serializes"),
        "steps": steps,
        "value": complex(res.value),
        "estimated_error": num(res.estimated_error),
        "oracle": complex(res.oracle),
        "relative_error": num(res.relative_error),
        "order": res.order.map(num).unwrap_or(Value::Null),
        "converged": res.converged,
    });
    if !res.converged {
        doc["diagnostics"] = Value::String(res.diagnostics());
    }
    emit(cfg.out.as_deref(), &json_text(&doc))?;
    if res.converged {
        Ok(())
    } else {
        Err(CliError::Failed(format!("limit not reached; refine schedule (estimated error {})", fmt(res.estimated_error))))
    }
}

pub fn cmd_semiclassical(cfg: &RunConfig) -> Result<(), CliError> {
    let q = &cfg.quant;
    let (m, hbar) = (cfg.m, q.hbar);
    let state = psi_lagrangian(m, hbar);
    let exact = exact_eigenstate(m, q.q_grid, hbar)?;
    let rows = q.q_grid.points().into_iter().zip(exact.psi_q()).map(|(x, e)| {
        let v = state.value(x);
        vec![x, v.re, v.im, v.norm(), e.re, e.im]
    });
    let text = csv(&["q", "re_psi", "im_psi", "abs_psi", "re_exact", "im_exact"], rows, |_| None);
    emit(cfg.out.as_deref(), &text)?;

    let table = residual_diagnostics(m, &cfg.hbar_scan, cfg.exclusion, ResidualResolution::default())?;
    let rows: Vec<Value> = table
        .rows
        .iter()
        .map(|r| json!({ "hbar": num(r.hbar), "residual": num(r.residual), "overlap": num(r.overlap) }))
        .collect();
    let summary = json!({
        "m": m,
        "hbar": num(hbar),
        "caustic_q": num(state.caustic_q),
        "maslov_phase": num(maslov_phase(&state)),
        "norm": num(state.norm(64)),
        "overlap": num(exact_overlap(m, hbar, 64)),
        "overlap_refined": num(exact_overlap(m, hbar, 128)),
        "exclusion": num(table.exclusion),
        "residuals": rows,
        "residual_slope": table.slope.map(num).unwrap_or(Value::Null),
    });
    let text = json_text(&summary);
    match summary_path(cfg) {
        Some(p) => emit(Some(&p), &text),
        None => {
            eprint!("{text}");
            Ok(())
        }
    }
}

fn summary_path(cfg: &RunConfig) -> Option<std::path::PathBuf> {
    cfg.summary_out.clone().or_else(|| cfg.out.as_ref().map(|p| p.with_extension("summary.json")))
}

pub fn cmd_verify(cfg: &RunConfig) -> Result<(), CliError> {
    let checks = run_suite(&cfg.quant)?;
    let width = checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
    let mut table = String::new();
    for c in &checks {
        let mark = if c.passed { "PASS" } else { "FAIL" };
        if cfg.verbose {
            table.push_str(&format!(
                "{mark}  {:<width$}  residual={}  threshold={}\n",
                c.name,
                fmt(c.residual),
                fmt(c.threshold)
            ));
        } else {
            table.push_str(&format!("{mark}  {}\n", c.name));
        }
    }
    print!("{table}");
    if let Some(p) = cfg.out.as_deref() {
        let rows: Vec<Value> = checks
            .iter()
            .map(|c| json!({ "name": c.name, "residual": num(c.residual), "threshold": num(c.threshold), "passed": c.passed }))
            .collect();
        emit(Some(p), &json_text(&json!({ "checks": rows })))?;
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    if failed == 0 {
        Ok(())
    } else {
        Err(CliError::Failed(format!("{failed} of {} checks failed", checks.len())))
    }
}
