//! Error-versus-eps sweeps against the limit operator and log-log rate fits.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cell_solver::{required_length, resolvent_apply_eps, scattering_eps};
use crate::classifier::{classify, ClassifyOptions, InteractionKind, LimitInteraction};
use crate::error::{Error, Result};
use crate::point_ops::{resolvent_apply_limit, scattering_limit};
use crate::profiles::PiecewisePoly;
use crate::resonance::Triple;

/// Slope a sweep must reach to pass.
pub const SLOPE_THRESHOLD: f64 = 0.45;
/// Errors at or below this count as exact zeros.
pub const EXACT_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    ScatteringAtK,
    ResolventL2Sample,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Parameters {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zeta: Option<Complex64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h_id: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    /// Strictly decreasing.
    pub eps_list: Vec<f64>,
    /// `None` for rows whose solve failed.
    pub errors: Vec<Option<f64>>,
    /// `"ok"`, `"exact"` or the solver error per row.
    pub flags: Vec<String>,
    pub fitted_slope: Option<f64>,
    pub fitted_intercept: Option<f64>,
    pub fit_residual: Option<f64>,
    pub metric: Metric,
    pub parameters: Parameters,
    pub limit: LimitInteraction,
    /// Every error vanished; no slope to fit.
    pub exact: bool,
    pub passed: bool,
}

/// Least squares on `(ln eps, ln error)`, skipping nonpositive errors.
/// Returns `(slope, intercept, rms residual)`.
pub fn fit_rate(points: &[(f64, f64)]) -> Result<(f64, f64, f64)> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(e, err)| *e > 0.0 && *err > 0.0 && err.is_finite())
        .map(|(e, err)| (e.ln(), err.ln()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::InsufficientPoints(pts.len()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("all eps values coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rms = (pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum::<f64>() / n).sqrt();
    Ok((slope, intercept, rms))
}

/// `n` geometric points from `a` down to `b`.
pub fn geometric_grid(a: f64, b: f64, n: usize) -> Result<Vec<f64>> {
    if !(a > 0.0 && b > 0.0 && a <= 1.0 && b <= 1.0) || n == 0 {
        return Err(Error::InvalidArgument(format!("bad eps grid {a}:{b}:{n}")));
    }
    if n == 1 {
        return Ok(vec![a]);
    }
    let r = (b / a).powf(1.0 / (n - 1) as f64);
    Ok((0..n).map(|i| a * r.powi(i as i32)).collect())
}

/// `2^{-lo}, ..., 2^{-hi}`.
pub fn dyadic_grid(lo: i32, hi: i32) -> Vec<f64> {
    (lo..=hi).map(|j| 2f64.powi(-j)).collect()
}

fn sorted_eps(eps_list: &[f64]) -> Result<Vec<f64>> {
    if eps_list.is_empty() {
        return Err(Error::InvalidArgument("empty eps list".into()));
    }
    if let Some(e) = eps_list.iter().find(|e| !(**e > 0.0 && **e <= 1.0)) {
        return Err(Error::InvalidArgument(format!("eps = {e} outside (0, 1]")));
    }
    let mut eps: Vec<f64> = eps_list.to_vec();
    eps.sort_by(|a, b| b.partial_cmp(a).unwrap());
    eps.dedup();
    Ok(eps)
}

fn assemble(
    eps: Vec<f64>,
    rows: Vec<Result<f64>>,
    metric: Metric,
    parameters: Parameters,
    limit: LimitInteraction,
) -> ConvergenceReport {
    let mut errors = Vec::with_capacity(rows.len());
    let mut flags = Vec::with_capacity(rows.len());
    for row in rows {
        match row {
            Ok(e) => {
                flags.push(if e <= EXACT_TOL { "exact" } else { "ok" }.to_string());
                errors.push(Some(e));
            }
            Err(err) => {
                flags.push(err.to_string());
                errors.push(None);
            }
        }
    }
    let solved: Vec<f64> = errors.iter().flatten().copied().collect();
    let exact = !solved.is_empty() && solved.len() == errors.len() && solved.iter().all(|e| *e <= EXACT_TOL);
    let points: Vec<(f64, f64)> = eps
        .iter()
        .zip(&errors)
        .filter_map(|(a, e)| e.filter(|e| *e > EXACT_TOL).map(|e| (*a, e)))
        .collect();
    let fit = fit_rate(&points).ok();
    let passed = exact || fit.is_some_and(|(slope, _, _)| slope >= SLOPE_THRESHOLD);
    ConvergenceReport {
        eps_list: eps,
        errors,
        flags,
        fitted_slope: fit.map(|f| f.0),
        fitted_intercept: fit.map(|f| f.1),
        fit_residual: fit.map(|f| f.2),
        metric,
        parameters,
        limit,
        exact,
        passed,
    }
}

/// Scattering error at `k` against the classified limit.
pub fn scattering_convergence(t: &Triple, k: f64, eps_list: &[f64]) -> Result<ConvergenceReport> {
    let limit = classify(t, &ClassifyOptions::default())?;
    scattering_convergence_against(t, &limit, k, eps_list)
}

/// `|t_eps - t| + |r_eps - r|` (left incidence) for connected limits;
/// `|t_eps| + |r_eps,left - r_left| + |r_eps,right - r_right|` for separated ones.
pub fn scattering_error(t: &Triple, limit: &LimitInteraction, eps: f64, k: f64) -> Result<f64> {
    let target = scattering_limit(limit, k)?;
    let sd = scattering_eps(t, eps, k)?;
    Ok(match limit.kind {
        InteractionKind::Connected => (sd.t - target.t).norm() + (sd.r_left - target.r_left).norm(),
        InteractionKind::Separated => {
            sd.t.norm() + (sd.r_left - target.r_left).norm() + (sd.r_right - target.r_right).norm()
        }
    })
}

/// As [`scattering_convergence`] against a caller-supplied limit.
pub fn scattering_convergence_against(
    t: &Triple,
    limit: &LimitInteraction,
    k: f64,
    eps_list: &[f64],
) -> Result<ConvergenceReport> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::InvalidArgument(format!("k = {k} must be positive")));
    }
    let eps = sorted_eps(eps_list)?;
    let rows: Vec<Result<f64>> = eps.par_iter().map(|&e| scattering_error(t, limit, e, k)).collect();
    let params = Parameters { k: Some(k), zeta: None, h_id: None };
    Ok(assemble(eps, rows, Metric::ScatteringAtK, params, limit.clone()))
}

/// `||y_eps - y_lim||_{L2(-L, L)} / ||h||` against the classified limit.
pub fn resolvent_convergence(
    t: &Triple,
    zeta: Complex64,
    h: &PiecewisePoly,
    h_id: &str,
    eps_list: &[f64],
) -> Result<ConvergenceReport> {
    let limit = classify(t, &ClassifyOptions::default())?;
    resolvent_convergence_against(t, &limit, zeta, h, h_id, eps_list)
}

pub fn resolvent_convergence_against(
    t: &Triple,
    limit: &LimitInteraction,
    zeta: Complex64,
    h: &PiecewisePoly,
    h_id: &str,
    eps_list: &[f64],
) -> Result<ConvergenceReport> {
    let eps = sorted_eps(eps_list)?;
    let params = Parameters { k: None, zeta: Some(zeta), h_id: Some(h_id.to_string()) };
    let length = required_length(zeta, h, 1.0)?;
    let hn = h.norm();
    if hn == 0.0 {
        let rows = eps.iter().map(|_| Ok(0.0)).collect();
        return Ok(assemble(eps, rows, Metric::ResolventL2Sample, params, limit.clone()));
    }
    let target = resolvent_apply_limit(limit, zeta, h, Some(length))?;
    let rows: Vec<Result<f64>> = eps
        .par_iter()
        .map(|&e| {
            let y = resolvent_apply_eps(t, e, zeta, h, Some(length))?;
            Ok(y.y.sub(&target.y).norm() / hn)
        })
        .collect();
    Ok(assemble(eps, rows, Metric::ResolventL2Sample, params, limit.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn fit_examples() {
        let (s, _, _) = fit_rate(&[(0.1, 0.0316228), (0.025, 0.0158114), (0.05, 0.02236)]).unwrap();
        assert!((s - 0.5).abs() < 1e-4);
        let (s, _, r) = fit_rate(&[(0.1, 1e-3), (0.05, 5e-4), (0.025, 2.5e-4)]).unwrap();
        assert!((s - 1.0).abs() < 1e-12 && r < 1e-12);
        let (s, _, _) = fit_rate(&[(0.1, 2.0), (0.05, 2.0), (0.025, 2.0)]).unwrap();
        assert!(s.abs() < 1e-12);
        assert!(matches!(fit_rate(&[(0.1, 1.0), (0.05, 0.0)]), Err(Error::InsufficientPoints(1))));
    }

    #[test]
    fn grids() {
        let g = geometric_grid(0.5, 0.5f64.powi(4), 4).unwrap();
        assert!((g[3] - 0.0625).abs() < 1e-15);
        assert_eq!(dyadic_grid(3, 5), vec![0.125, 0.0625, 0.03125]);
    }

    #[test]
    fn free_line_is_exact() {
        let t = Triple::potential_only(crate::profiles::Profile::constant(Complex64::new(0.0, 0.0))).unwrap();
        let rep = scattering_convergence(&t, 1.0, &dyadic_grid(3, 5)).unwrap();
        assert!(rep.exact && rep.passed && rep.fitted_slope.is_none());
        let h = PiecewisePoly::zero();
        let rep = resolvent_convergence(&fixtures::a3(), Complex64::i(), &h, "zero", &dyadic_grid(3, 5)).unwrap();
        assert!(rep.exact);
    }

    #[test]
    fn report_is_sorted_and_deterministic() {
        let eps = [0.03125, 0.125, 0.0625];
        let a = scattering_convergence(&fixtures::a3(), 1.0, &eps).unwrap();
        let b = scattering_convergence(&fixtures::a3(), 1.0, &eps).unwrap();
        assert_eq!(a.eps_list, vec![0.125, 0.0625, 0.03125]);
        assert_eq!(a.errors, b.errors);
    }
}
