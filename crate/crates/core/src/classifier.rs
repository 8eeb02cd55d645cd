//! Limit point interaction of a triple, following the bifurcation graph of
//! the connected (A1–A3) and separated (B1–B3) cases.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::resonance::{compute_invariants, InvariantSet, Tolerances, Triple, ZeroTest};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CaseTag {
    A1,
    A2,
    A3,
    B1,
    B2,
    B3,
}

impl CaseTag {
    pub const ALL: [CaseTag; 6] = [CaseTag::A1, CaseTag::A2, CaseTag::A3, CaseTag::B1, CaseTag::B2, CaseTag::B3];

    pub fn is_connected(self) -> bool {
        matches!(self, CaseTag::A1 | CaseTag::A2 | CaseTag::A3)
    }
}

impl fmt::Display for CaseTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// One-sided condition at the origin. `Robin { theta }` means `v'(0) = theta v(0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum BoundaryCondition {
    Dirichlet,
    Robin { theta: f64 },
}

impl BoundaryCondition {
    pub const NEUMANN: BoundaryCondition = BoundaryCondition::Robin { theta: 0.0 };
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InteractionKind {
    Connected,
    Separated,
}

/// `(v_+, v'_+) = e^{i phase} C (v_-, v'_-)` or a pair of separated conditions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitInteraction {
    pub case: CaseTag,
    pub kind: InteractionKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phase: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matrix: Option<[[f64; 2]; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub left: Option<BoundaryCondition>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub right: Option<BoundaryCondition>,
    /// Zero tests consulted on the way through the graph.
    pub margins: BTreeMap<String, ZeroTest>,
    pub warnings: Vec<String>,
}

impl LimitInteraction {
    pub fn connected(case: CaseTag, phase: f64, matrix: [[f64; 2]; 2]) -> Self {
        let (phase, matrix) = canonicalize(phase, matrix);
        Self {
            case,
            kind: InteractionKind::Connected,
            phase: Some(phase),
            matrix: Some(matrix),
            left: None,
            right: None,
            margins: BTreeMap::new(),
            warnings: vec![],
        }
    }

    pub fn separated(case: CaseTag, left: BoundaryCondition, right: BoundaryCondition) -> Self {
        Self {
            case,
            kind: InteractionKind::Separated,
            phase: None,
            matrix: None,
            left: Some(left),
            right: Some(right),
            margins: BTreeMap::new(),
            warnings: vec![],
        }
    }

    /// `e^{i phase} C` for connected interactions.
    pub fn transfer(&self) -> Option<[[Complex64; 2]; 2]> {
        let (phase, m) = (self.phase?, self.matrix?);
        let e = Complex64::from_polar(1.0, phase);
        Some([[e * m[0][0], e * m[0][1]], [e * m[1][0], e * m[1][1]]])
    }

    pub fn is_unstable(&self) -> bool {
        !self.warnings.is_empty()
    }

    /// Largest parameter difference; separated vs connected compare as infinite.
    pub fn distance(&self, other: &LimitInteraction) -> f64 {
        if self.case != other.case || self.kind != other.kind {
            return f64::INFINITY;
        }
        match self.kind {
            InteractionKind::Connected => {
                let (a, b) = (self.transfer().unwrap(), other.transfer().unwrap());
                let mut d = 0.0_f64;
                for i in 0..2 {
                    for j in 0..2 {
                        d = d.max((a[i][j] - b[i][j]).norm());
                    }
                }
                d
            }
            InteractionKind::Separated => {
                let bc = |x: BoundaryCondition, y: BoundaryCondition| match (x, y) {
                    (BoundaryCondition::Dirichlet, BoundaryCondition::Dirichlet) => 0.0,
                    (BoundaryCondition::Robin { theta: s }, BoundaryCondition::Robin { theta: t }) => (s - t).abs(),
                    _ => f64::INFINITY,
                };
                bc(self.left.unwrap(), other.left.unwrap()).max(bc(self.right.unwrap(), other.right.unwrap()))
            }
        }
    }
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_phase(phase: f64) -> f64 {
    let mut p = phase.rem_euclid(2.0 * PI);
    if p > PI {
        p -= 2.0 * PI;
    }
    if p <= -PI {
        p += 2.0 * PI;
    }
    p
}

/// `(phase, C)` and `(phase + pi, -C)` describe the same coupling; pick the
/// representative whose first nonzero entry (row-major) is positive.
pub fn canonicalize(phase: f64, m: [[f64; 2]; 2]) -> (f64, [[f64; 2]; 2]) {
    let first = [m[0][0], m[0][1], m[1][0], m[1][1]].into_iter().find(|v| *v != 0.0).unwrap_or(1.0);
    if first < 0.0 {
        (wrap_phase(phase + PI), [[-m[0][0], -m[0][1]], [-m[1][0], -m[1][1]]])
    } else {
        (wrap_phase(phase), m)
    }
}

pub fn det2(m: &[[f64; 2]; 2]) -> f64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ClassifyOptions {
    pub tolerances: Tolerances,
    /// Refuse to classify when a consulted quantity is within 10x of its threshold.
    pub strict: bool,
}

fn mismatch(case: &'static str, detail: &str) -> Error {
    Error::BranchMismatch { case, detail: detail.to_string() }
}

/// Connected case A1.
pub fn matrix_a1(inv: &InvariantSet) -> Result<(f64, [[f64; 2]; 2])> {
    let (Some(a1), Some(a2)) = (inv.a1, inv.a2) else {
        return Err(mismatch("A1", "a1 and a2 need zero-mean f and g"));
    };
    let kappa = inv.kappa;
    let d = a2 - kappa.conj() * a1;
    if inv.tests.get("a2_minus_conj_kappa_a1").is_some_and(|t| t.is_zero) || d.norm() == 0.0 {
        return Err(Error::DegenerateDenominator(d.norm()));
    }
    let n = d.norm();
    let k2 = kappa.norm_sqr();
    let a0 = inv.a0;
    let m = [
        [(k2 * a0 - 2.0 * (kappa.conj() * a1).re + a2) / n, k2 / n],
        [(a0 * a2 - a1.norm_sqr()) / n, a2 / n],
    ];
    Ok((d.conj().arg(), m))
}

/// Connected case A2 from the end values of a half-bound state with real `sigma_plus`.
pub fn matrix_a2_from(sigma_minus: Complex64, sigma_plus: Complex64, sigma_star: f64) -> Result<(f64, [[f64; 2]; 2])> {
    if sigma_plus.im.abs() > 1e-10 * (1.0 + sigma_plus.norm()) {
        return Err(Error::NonRealSigmaPlus { imag: sigma_plus.im, scale: sigma_plus.norm() });
    }
    let sp = sigma_plus.re;
    let sm = sigma_minus.norm();
    if sp == 0.0 || sm == 0.0 {
        return Err(mismatch("A2", "sigma_- sigma_+ = 0"));
    }
    let m = [[sp / sm, 0.0], [sigma_star / (sp * sm), sm / sp]];
    Ok((-sigma_minus.arg(), m))
}

/// Connected case A2 from the half-bound state, phase-normalized so that its
/// right value is positive.
pub fn matrix_a2(inv: &InvariantSet) -> Result<(f64, [[f64; 2]; 2])> {
    let rot = Complex64::from_polar(1.0, -inv.hbs_plus.arg());
    matrix_a2_from(inv.hbs_minus * rot, Complex64::new(inv.hbs_plus.norm(), 0.0), inv.hbs_star)
}

pub fn matrix_a3(inv: &InvariantSet) -> (f64, [[f64; 2]; 2]) {
    (0.0, [[1.0, 0.0], [inv.a0, 1.0]])
}

pub fn separated_b1(inv: &InvariantSet) -> Result<(BoundaryCondition, BoundaryCondition)> {
    let Some(a2) = inv.a2 else {
        return Err(mismatch("B1", "a2 needs zero-mean f and g"));
    };
    let k2 = inv.kappa.norm_sqr();
    if k2 == 0.0 {
        return Err(mismatch("B1", "kappa = 0"));
    }
    Ok((
        BoundaryCondition::Robin { theta: a2 / k2 - inv.a0 },
        BoundaryCondition::Robin { theta: a2 / k2 },
    ))
}

pub fn separated_b2_from(
    sigma_minus: Complex64,
    sigma_plus: Complex64,
    sigma_star: f64,
    minus_is_zero: bool,
    plus_is_zero: bool,
) -> Result<(BoundaryCondition, BoundaryCondition)> {
    match (minus_is_zero, plus_is_zero) {
        (true, false) => Ok((
            BoundaryCondition::Dirichlet,
            BoundaryCondition::Robin { theta: sigma_star / sigma_plus.norm_sqr() },
        )),
        (false, true) => Ok((
            BoundaryCondition::Robin { theta: -sigma_star / sigma_minus.norm_sqr() },
            BoundaryCondition::Dirichlet,
        )),
        _ => Err(mismatch("B2", "exactly one of sigma_-, sigma_+ must vanish")),
    }
}

pub fn separated_b2(inv: &InvariantSet) -> Result<(BoundaryCondition, BoundaryCondition)> {
    separated_b2_from(
        inv.hbs_minus,
        inv.hbs_plus,
        inv.hbs_star,
        inv.test("hbs_minus").is_zero,
        inv.test("hbs_plus").is_zero,
    )
}

pub fn classify(t: &Triple, opts: &ClassifyOptions) -> Result<LimitInteraction> {
    if t.is_potential_only() {
        let a0 = t.q.as_poly().integral().re;
        let mut out = LimitInteraction::connected(CaseTag::A3, 0.0, [[1.0, 0.0], [a0, 1.0]]);
        out.warnings.push("f = g = 0: potential-only triple".to_string());
        return Ok(out);
    }
    let inv = compute_invariants(t, &opts.tolerances);
    classify_invariants(&inv, opts.strict)
}

/// Walks the graph on precomputed invariants.
pub fn classify_invariants(inv: &InvariantSet, strict: bool) -> Result<LimitInteraction> {
    let mut margins = BTreeMap::new();
    let mut consult = |name: &str| -> Result<bool> {
        let test = inv.test(name);
        if strict && test.near_boundary {
            return Err(Error::UnstableClassification {
                name: name.to_string(),
                value: test.value,
                threshold: test.threshold,
            });
        }
        margins.insert(name.to_string(), test);
        Ok(test.is_zero)
    };
    let f0_zero = consult("f0")?;
    let g0_zero = consult("g0")?;
    let mut out = if f0_zero && g0_zero {
        if !consult("pi")? {
            let (p, m) = matrix_a3(inv);
            LimitInteraction::connected(CaseTag::A3, p, m)
        } else if !consult("a2_minus_conj_kappa_a1")? {
            let (p, m) = matrix_a1(inv)?;
            LimitInteraction::connected(CaseTag::A1, p, m)
        } else if !consult("kappa")? {
            let (l, r) = separated_b1(inv)?;
            LimitInteraction::separated(CaseTag::B1, l, r)
        } else if !consult("a1")? {
            LimitInteraction::separated(CaseTag::B3, BoundaryCondition::Dirichlet, BoundaryCondition::Dirichlet)
        } else {
            consult("a2")?;
            let (p, m) = matrix_a3(inv);
            LimitInteraction::connected(CaseTag::A3, p, m)
        }
    } else if !consult("lambda")? {
        LimitInteraction::separated(CaseTag::B3, BoundaryCondition::Dirichlet, BoundaryCondition::Dirichlet)
    } else if f0_zero || g0_zero {
        return Err(Error::ImpossibleNode);
    } else {
        let minus_zero = consult("hbs_minus")?;
        let plus_zero = consult("hbs_plus")?;
        if !minus_zero && !plus_zero {
            let (p, m) = matrix_a2(inv)?;
            LimitInteraction::connected(CaseTag::A2, p, m)
        } else if !consult("moment_cross")? {
            let (l, r) = separated_b2_from(inv.hbs_minus, inv.hbs_plus, inv.hbs_star, minus_zero, plus_zero)?;
            LimitInteraction::separated(CaseTag::B2, l, r)
        } else {
            LimitInteraction::separated(CaseTag::B3, BoundaryCondition::Dirichlet, BoundaryCondition::Dirichlet)
        }
    };
    out.warnings = margins
        .iter()
        .filter(|(_, t)| t.near_boundary)
        .map(|(name, _)| format!("classification unstable: {name} is within 10x of its zero threshold"))
        .collect();
    out.margins = margins;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn classify_default(t: &Triple) -> LimitInteraction {
        classify(t, &ClassifyOptions::default()).unwrap()
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-10 * (1.0 + b.abs())
    }

    #[test]
    fn dirichlet_pair_for_nonresonant_profiles() {
        let out = classify_default(&fixtures::b3_nonresonant());
        assert_eq!(out.case, CaseTag::B3);
        assert_eq!(out.left, Some(BoundaryCondition::Dirichlet));
        assert_eq!(out.right, Some(BoundaryCondition::Dirichlet));
    }

    #[test]
    fn delta_from_single_resonance() {
        let out = classify_default(&fixtures::a3());
        assert_eq!(out.case, CaseTag::A3);
        assert_eq!(out.phase, Some(0.0));
        let m = out.matrix.unwrap();
        assert!(close(m[1][0], 2.0) && m[0][0] == 1.0 && m[1][1] == 1.0 && m[0][1] == 0.0);
    }

    #[test]
    fn a2_uses_the_bounded_solution() {
        let out = classify_default(&fixtures::a2());
        assert_eq!(out.case, CaseTag::A2);
        assert!(close(out.phase.unwrap(), PI));
        let m = out.matrix.unwrap();
        assert!(close(m[0][0], 2.0 / 3.0) && close(m[1][1], 1.5));
        assert_eq!(m[0][1], 0.0);
        assert!(m[1][0].abs() < 1e-12);
    }

    #[test]
    fn a2_matrix_formula() {
        let (p, m) = matrix_a2_from(Complex64::new(-60.0, 0.0), Complex64::new(240.0, 0.0), 0.0).unwrap();
        let (p, m) = canonicalize(p, m);
        assert!(close(p, PI));
        assert_eq!(m, [[4.0, 0.0], [0.0, 0.25]]);
        let s = Complex64::new(3.0, 0.0);
        assert_eq!(matrix_a2_from(s, s, 0.0).unwrap(), (0.0, [[1.0, 0.0], [0.0, 1.0]]));
        let (_, m) = matrix_a2_from(s, s, 18.0).unwrap();
        assert_eq!(m, [[1.0, 0.0], [2.0, 1.0]]);
        assert!(matches!(
            matrix_a2_from(s, Complex64::new(1.0, 1e-3), 0.0),
            Err(Error::NonRealSigmaPlus { .. })
        ));
    }

    #[test]
    fn a1_matrix_for_orthonormal_pair() {
        let out = classify_default(&fixtures::a1());
        assert_eq!(out.case, CaseTag::A1);
        let m = out.matrix.unwrap();
        assert!((det2(&m) - 1.0).abs() < 1e-10);
        // sympy: kappa = sqrt(15)/3, a0 = 2, a1 = 1.97412449979978, a2 = 2.45334567511677
        let (k, a0, a1, a2) = (15f64.sqrt() / 3.0, 2.0, 1.97412449979978, 2.45334567511677);
        let d = (a2 - k * a1).abs();
        let expected = [[(k * k * a0 - 2.0 * k * a1 + a2) / d, k * k / d], [(a0 * a2 - a1 * a1) / d, a2 / d]];
        // a2 - kappa a1 < 0 shows up only in the phase
        assert!(a2 - k * a1 < 0.0);
        assert!(close(out.phase.unwrap(), PI));
        for i in 0..2 {
            for j in 0..2 {
                assert!((m[i][j] - expected[i][j]).abs() < 1e-10 * (1.0 + expected[i][j].abs()), "{m:?} vs {expected:?}");
            }
        }
    }

    #[test]
    fn delta_prime_shape() {
        let out = classify_default(&fixtures::a1_delta_prime());
        assert_eq!(out.case, CaseTag::A1);
        let m = out.matrix.unwrap();
        let inv = compute_invariants(&fixtures::a1_delta_prime(), &Tolerances::default());
        let beta = inv.kappa.norm_sqr() / inv.a2.unwrap();
        assert!((m[0][0] - 1.0).abs() < 1e-10 && (m[1][1] - 1.0).abs() < 1e-10);
        assert!(m[1][0].abs() < 1e-10);
        assert!((m[0][1] - beta).abs() < 1e-10);
    }

    #[test]
    fn unit_diagonal_when_kappa_vanishes() {
        let out = classify_default(&fixtures::a1_kappa_zero());
        assert_eq!(out.case, CaseTag::A1);
        let m = out.matrix.unwrap();
        assert_eq!(m[0][1], 0.0);
        assert!((m[0][0].abs() - 1.0).abs() < 1e-12 && (m[1][1].abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exotic_zero_corner() {
        let t = fixtures::a1_exotic();
        let inv = compute_invariants(&t, &Tolerances::default());
        assert!(inv.a2.unwrap().abs() < 1e-12);
        let out = classify_default(&t);
        assert_eq!(out.case, CaseTag::A1);
        assert!(out.matrix.unwrap()[1][1].abs() < 1e-12);
    }

    #[test]
    fn separated_cases() {
        let out = classify_default(&fixtures::b1_neumann());
        assert_eq!(out.case, CaseTag::B1);
        assert_eq!(out.left, Some(BoundaryCondition::NEUMANN));
        assert_eq!(out.right, Some(BoundaryCondition::NEUMANN));

        let out = classify_default(&fixtures::b1_robin());
        assert_eq!(out.case, CaseTag::B1);
        let (Some(BoundaryCondition::Robin { theta: t1 }), Some(BoundaryCondition::Robin { theta: t2 })) = (out.left, out.right) else {
            panic!("{out:?}")
        };
        let a0 = compute_invariants(&fixtures::b1_robin(), &Tolerances::default()).a0;
        assert!((t2 - t1 - a0).abs() < 1e-10);
        assert!(t1 != 0.0);

        let out = classify_default(&fixtures::b2_dirichlet_right());
        assert_eq!(out.case, CaseTag::B2);
        assert_eq!(out.right, Some(BoundaryCondition::Dirichlet));
        assert!(matches!(out.left, Some(BoundaryCondition::Robin { .. })));
        let out = classify_default(&fixtures::b2_dirichlet_left());
        assert_eq!(out.case, CaseTag::B2);
        assert_eq!(out.left, Some(BoundaryCondition::Dirichlet));

        for t in [fixtures::b3_even(), fixtures::b3_kappa_zero()] {
            let out = classify_default(&t);
            assert_eq!(out.case, CaseTag::B3);
            assert_eq!(out.left, Some(BoundaryCondition::Dirichlet));
        }
        let out = classify_default(&fixtures::a3_double());
        assert_eq!(out.case, CaseTag::A3);
    }

    #[test]
    fn b_parameters() {
        let mut inv = compute_invariants(&fixtures::a1(), &Tolerances::default());
        inv.kappa = Complex64::new(2.0, 0.0);
        inv.a2 = Some(4.0);
        inv.a0 = 1.0;
        let (l, r) = separated_b1(&inv).unwrap();
        assert_eq!(l, BoundaryCondition::Robin { theta: 0.0 });
        assert_eq!(r, BoundaryCondition::Robin { theta: 1.0 });
        let (l, r) = separated_b2_from(Complex64::new(0.0, 0.0), Complex64::new(240.0, 0.0), 3.0, true, false).unwrap();
        assert_eq!(l, BoundaryCondition::Dirichlet);
        assert_eq!(r, BoundaryCondition::Robin { theta: 3.0 / 240.0f64.powi(2) });
    }

    #[test]
    fn canonical_representative() {
        let (p, m) = canonicalize(0.0, [[-2.0, 0.0], [0.0, -0.5]]);
        assert!(close(p, PI));
        assert_eq!(m, [[2.0, 0.0], [0.0, 0.5]]);
        let (p, _) = canonicalize(-PI, [[1.0, 0.0], [0.0, 1.0]]);
        assert!(close(p, PI));
        assert!(close(wrap_phase(3.0 * PI), PI));
    }

    #[test]
    fn strict_mode_rejects_tuned_boundary() {
        let t = fixtures::a3_double();
        // a1 and a2 vanish only to rounding in this fixture
        let loose = Tolerances { rel: 1e-15, abs: 1e-16 };
        let inv = compute_invariants(&t, &loose);
        let strict = classify_invariants(&inv, true);
        let relaxed = classify_invariants(&inv, false).unwrap();
        if relaxed.is_unstable() {
            assert!(matches!(strict, Err(Error::UnstableClassification { .. })));
        } else {
            assert!(strict.is_ok());
        }
        assert!(classify(&fixtures::a3(), &ClassifyOptions { strict: true, ..Default::default() }).is_ok());
    }

    #[test]
    fn json_shape() {
        let out = classify_default(&fixtures::a3());
        let v = serde_json::to_value(&out).unwrap();
        assert_eq!(v["case"], "A3");
        assert_eq!(v["kind"], "connected");
        assert!(v.get("left").is_none());
        let out = classify_default(&fixtures::b2_dirichlet_left());
        let v = serde_json::to_value(&out).unwrap();
        assert_eq!(v["left"]["type"], "dirichlet");
        assert_eq!(v["right"]["type"], "robin");
    }
}
