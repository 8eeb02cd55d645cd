//! Resonance quantities of a triple `(f, g, q)` and half-bound states of the
//! model operator `B = -d²/dx² + <g, .> f + <f, .> g`.

use std::collections::BTreeMap;

use nalgebra::Matrix3;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profiles::{antiderivative_unchecked, inner, moment, PiecewisePoly, Profile, TailedProfile, MAX_DEGREE};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Relative Gram-determinant floor for linear independence of `f` and `g`.
pub const DEPENDENCE_TOL: f64 = 1e-12;

/// Zero-test thresholds: `|x| <= rel * scale + abs` means zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub rel: f64,
    pub abs: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { rel: 1e-9, abs: 1e-12 }
    }
}

impl Tolerances {
    pub fn threshold(&self, scale: f64) -> f64 {
        self.rel * scale + self.abs
    }

    pub fn test(&self, value: f64, scale: f64) -> ZeroTest {
        let threshold = self.threshold(scale);
        let ratio = value / threshold;
        ZeroTest {
            value,
            scale,
            threshold,
            is_zero: value <= threshold,
            near_boundary: ratio > 0.1 && ratio <= 10.0,
        }
    }
}

/// Outcome of one zero test on a branch quantity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroTest {
    /// Magnitude of the tested quantity.
    pub value: f64,
    pub scale: f64,
    pub threshold: f64,
    pub is_zero: bool,
    /// Within a factor 10 of the threshold on either side.
    pub near_boundary: bool,
}

/// `(f, g, q)` with `f`, `g` linearly independent and `q` real.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Triple {
    pub f: Profile,
    pub g: Profile,
    pub q: Profile,
}

impl Triple {
    pub fn new(f: Profile, g: Profile, q: Profile) -> Result<Self> {
        let max_imag = q.as_poly().max_imag_coeff();
        if max_imag != 0.0 {
            return Err(Error::ComplexPotential { max_imag });
        }
        for p in [&f, &g] {
            // second antiderivatives must stay under the cap
            let degree = p.degree() + 2;
            if degree > MAX_DEGREE {
                return Err(Error::DegreeOverflow { degree, cap: MAX_DEGREE });
            }
        }
        let ff = inner(&f, &f).re;
        let gg = inner(&g, &g).re;
        let fg = inner(&f, &g).norm_sqr();
        let gram = if ff * gg > 0.0 { (ff * gg - fg) / (ff * gg) } else { 0.0 };
        if gram <= DEPENDENCE_TOL {
            return Err(Error::LinearDependence { gram });
        }
        Ok(Self { f, g, q })
    }

    /// `f = g = 0`; only the potential survives and the limit is a plain delta.
    pub fn potential_only(q: Profile) -> Result<Self> {
        let max_imag = q.as_poly().max_imag_coeff();
        if max_imag != 0.0 {
            return Err(Error::ComplexPotential { max_imag });
        }
        Ok(Self { f: Profile::constant(ZERO), g: Profile::constant(ZERO), q })
    }

    pub fn is_potential_only(&self) -> bool {
        self.f.as_poly().norm() == 0.0 && self.g.as_poly().norm() == 0.0
    }

    pub fn without_potential(f: Profile, g: Profile) -> Result<Self> {
        Self::new(f, g, Profile::constant(ZERO))
    }

    pub fn with_potential(&self, q: Profile) -> Result<Self> {
        Self::new(self.f.clone(), self.g.clone(), q)
    }

    /// The triple whose supports shrink by `s` while the limit operator stays
    /// the same: `f -> s^{-3/2} f(x/s)`, `g` likewise, `q -> s^{-1} q(x/s)`.
    pub fn dilated(&self, s: f64) -> Result<Self> {
        let dil = |p: &Profile, w: f64| Profile::new(p.as_poly().dilated(s).scale_re(w));
        Self::new(
            dil(&self.f, s.powf(-1.5))?,
            dil(&self.g, s.powf(-1.5))?,
            dil(&self.q, 1.0 / s)?,
        )
    }

    /// Normalizes raw profiles supported in `[-r, r]` (`r > 1`) onto `[-1, 1]`.
    /// Returns the triple and the factor `r` (1 when no rescale was needed).
    pub fn from_raw(f: PiecewisePoly, g: PiecewisePoly, q: PiecewisePoly) -> Result<(Self, f64)> {
        let r = [&f, &g, &q]
            .iter()
            .filter_map(|p| p.support())
            .map(|(a, b)| a.abs().max(b.abs()))
            .fold(0.0_f64, f64::max);
        if r <= 1.0 {
            return Ok((Self::new(Profile::new(f)?, Profile::new(g)?, Profile::new(q)?)?, 1.0));
        }
        let s = 1.0 / r;
        let dil = |p: &PiecewisePoly, w: f64| Profile::new(p.dilated(s).scale_re(w));
        let triple = Self::new(dil(&f, s.powf(-1.5))?, dil(&g, s.powf(-1.5))?, dil(&q, 1.0 / s)?)?;
        Ok((triple, r))
    }
}

/// Antiderivatives shared by the invariant formulas.
#[derive(Debug, Clone)]
struct Antiderivatives {
    f1: TailedProfile,
    g1: TailedProfile,
    f2: TailedProfile,
    g2: TailedProfile,
}

impl Antiderivatives {
    fn of(t: &Triple) -> Self {
        Self {
            f1: antiderivative_unchecked(t.f.as_poly(), 1),
            g1: antiderivative_unchecked(t.g.as_poly(), 1),
            f2: antiderivative_unchecked(t.f.as_poly(), 2),
            g2: antiderivative_unchecked(t.g.as_poly(), 2),
        }
    }
}

/// Every scalar and functional resonance quantity of a triple.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantSet {
    pub f0: Complex64,
    pub g0: Complex64,
    pub f1: Complex64,
    pub g1: Complex64,
    /// `||f^(-1)||` on `[-1, 1]`.
    pub norm_f: f64,
    pub norm_g: f64,
    /// `<f^(-1), g^(-1)>` on `[-1, 1]`.
    pub overlap: Complex64,
    pub pi_val: f64,
    pub theta_phase: f64,
    pub omega: TailedProfile,
    pub kappa: Complex64,
    pub lambda_val: f64,
    pub sigma: TailedProfile,
    pub sigma_minus: Complex64,
    pub sigma_plus: Complex64,
    pub sigma_star: f64,
    /// Kernel element of the bounded-solution system built on `sigma`'s
    /// leading terms. Differs from `sigma` by a constant unless
    /// `conj(g0)((f, G2) - 1) = conj(f0)(g, G2)`.
    pub hbs: TailedProfile,
    pub hbs_minus: Complex64,
    pub hbs_plus: Complex64,
    /// `int q |hbs|^2`.
    pub hbs_star: f64,
    pub a0: f64,
    /// Defined only for zero-mean `f` and `g`.
    pub a1: Option<Complex64>,
    pub a2: Option<f64>,
    /// Zero tests of every branch quantity, keyed by name.
    pub tests: BTreeMap<String, ZeroTest>,
    pub tolerances: Tolerances,
    pub warnings: Vec<String>,
}

impl InvariantSet {
    pub fn means_vanish(&self) -> bool {
        self.tests["f0"].is_zero && self.tests["g0"].is_zero
    }

    /// `f0 g1 - f1 g0`.
    pub fn moment_cross(&self) -> Complex64 {
        self.f0 * self.g1 - self.f1 * self.g0
    }

    /// `omega(1)` from moments: `e^{i theta} n_g (f0 - f1) - n_f (g0 - g1)`,
    /// i.e. `n_f g1 - e^{i theta} n_g f1` once the means vanish.
    pub fn kappa_closed_form(&self) -> Complex64 {
        Complex64::from_polar(self.norm_g, self.theta_phase) * (self.f0 - self.f1) - (self.g0 - self.g1) * self.norm_f
    }

    pub fn test(&self, name: &str) -> ZeroTest {
        self.tests[name]
    }
}

fn sup(t: &TailedProfile) -> f64 {
    t.max_abs_on_interval()
}

/// Computes the full invariant set with exact polynomial quadrature.
pub fn compute_invariants(t: &Triple, tol: &Tolerances) -> InvariantSet {
    let ad = Antiderivatives::of(t);
    let f0 = moment(&t.f, 0).expect("order 0");
    let g0 = moment(&t.g, 0).expect("order 0");
    let f1 = moment(&t.f, 1).expect("order 1");
    let g1 = moment(&t.g, 1).expect("order 1");

    let norm_f = ad.f1.core.norm();
    let norm_g = ad.g1.core.norm();
    let overlap = inner(&ad.f1, &ad.g1);
    let pi_val = norm_f * norm_g - (overlap + ONE).norm();
    let theta_phase = (overlap + ONE).arg();
    let omega = TailedProfile::combine(
        &[
            (Complex64::from_polar(norm_g, theta_phase), &ad.f2),
            (Complex64::new(-norm_f, 0.0), &ad.g2),
        ],
        ZERO,
    );
    let kappa = omega.eval(1.0);

    let mixed = TailedProfile::combine(&[(g0, &ad.f1), (-f0, &ad.g1)], ZERO);
    let mixed_sq = mixed.core.norm_sq();
    let lambda_val = mixed_sq - 2.0 * (f0 * g0.conj()).re;

    let f_f2 = inner(&t.f, &ad.f2);
    let g_g2 = inner(&t.g, &ad.g2);
    let (wf, wg) = (g0.norm_sqr(), f0.norm_sqr());
    let sigma = TailedProfile::combine(
        &[(f0.conj() * wf, &ad.f2), (-g0.conj() * wg, &ad.g2)],
        -f_f2 * wf + g_g2 * wg,
    );
    let sigma_minus = sigma.left;
    let sigma_plus = sigma.eval(1.0);

    let f_g2 = inner(&t.f, &ad.g2);
    let g_f2 = inner(&t.g, &ad.f2);
    let alpha1 = g0 * f_f2 - f0 * (f_g2 - ONE);
    let alpha2 = g0 * (g_f2 - ONE) - f0 * g_g2;
    let lead = f0.conj() * g0.conj();
    let mass = wf + wg;
    let c3 = if mass > 0.0 { -lead * (f0 * alpha1 + g0 * alpha2) / mass } else { ZERO };
    let hbs = TailedProfile::combine(&[(lead * g0, &ad.f2), (-lead * f0, &ad.g2)], c3);
    let hbs_minus = hbs.left;
    let hbs_plus = hbs.eval(1.0);

    let q = t.q.as_poly();
    let hbs_sq = hbs.core.conj().mul(&hbs.core);
    let hbs_star = q.mul(&hbs_sq).integral().re;
    let sigma_sq = sigma.core.conj().mul(&sigma.core);
    let sigma_star = q.mul(&sigma_sq).integral().re;
    let a0 = q.integral().re;

    let f_norm = t.f.as_poly().norm();
    let g_norm = t.g.as_poly().norm();
    let omega_sup = sup(&omega);
    let q_l1 = q.l1_norm_estimate();

    let mut tests = BTreeMap::new();
    let sqrt2 = std::f64::consts::SQRT_2;
    tests.insert("f0".into(), tol.test(f0.norm(), sqrt2 * f_norm));
    tests.insert("g0".into(), tol.test(g0.norm(), sqrt2 * g_norm));
    tests.insert("pi".into(), tol.test(pi_val.abs(), norm_f * norm_g + overlap.norm() + 1.0));
    tests.insert(
        "lambda".into(),
        tol.test(lambda_val.abs(), mixed_sq + 2.0 * (f0 * g0).norm() + 1.0),
    );
    tests.insert("kappa".into(), tol.test(kappa.norm(), omega_sup));
    let sigma_scale = wf * (f0.norm() * sup(&ad.f2) + f_f2.norm()) + wg * (g0.norm() * sup(&ad.g2) + g_g2.norm());
    tests.insert("sigma_minus".into(), tol.test(sigma_minus.norm(), sigma_scale));
    tests.insert("sigma_plus".into(), tol.test(sigma_plus.norm(), sigma_scale));
    let hbs_scale = lead.norm() * (g0.norm() * sup(&ad.f2) + f0.norm() * sup(&ad.g2)) + c3.norm();
    tests.insert("hbs_minus".into(), tol.test(hbs_minus.norm(), hbs_scale));
    tests.insert("hbs_plus".into(), tol.test(hbs_plus.norm(), hbs_scale));
    let cross = f0 * g1 - f1 * g0;
    tests.insert(
        "moment_cross".into(),
        tol.test(cross.norm(), (f0 * g1).norm() + (f1 * g0).norm() + 1.0),
    );

    let means_vanish = tests["f0"].is_zero && tests["g0"].is_zero;
    let (a1, a2) = if means_vanish {
        let a1 = q.mul(&omega.core).integral();
        let omega_sq = omega.core.conj().mul(&omega.core);
        let a2 = q.mul(&omega_sq).integral().re;
        tests.insert("a1".into(), tol.test(a1.norm(), q_l1 * omega_sup));
        tests.insert("a2".into(), tol.test(a2.abs(), q_l1 * omega_sup * omega_sup));
        let d = a2 - kappa.conj() * a1;
        tests.insert(
            "a2_minus_conj_kappa_a1".into(),
            tol.test(d.norm(), a2.abs() + kappa.norm() * a1.norm() + q_l1 * omega_sup * omega_sup),
        );
        (Some(a1), Some(a2))
    } else {
        (None, None)
    };

    let relevant: &[&str] = if means_vanish {
        &["f0", "g0", "pi", "kappa", "a1", "a2", "a2_minus_conj_kappa_a1"]
    } else {
        &["f0", "g0", "lambda", "hbs_minus", "hbs_plus", "moment_cross"]
    };
    let warnings = relevant
        .iter()
        .filter(|name| tests[**name].near_boundary)
        .map(|name| format!("classification unstable: {name} is within 10x of its zero threshold"))
        .collect();

    InvariantSet {
        f0,
        g0,
        f1,
        g1,
        norm_f,
        norm_g,
        overlap,
        pi_val,
        theta_phase,
        omega,
        kappa,
        lambda_val,
        sigma,
        sigma_minus,
        sigma_plus,
        sigma_star,
        hbs,
        hbs_minus,
        hbs_plus,
        hbs_star,
        a0,
        a1,
        a2,
        tests,
        tolerances: *tol,
        warnings,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HalfBoundKind {
    None,
    ConstOnly,
    Sigma,
    Double,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HalfBoundStateReport {
    pub kind: HalfBoundKind,
    pub states: Vec<TailedProfile>,
    /// Largest `||-u'' + (g,u) f + (f,u) g||` over the reported states.
    pub residual: f64,
}

/// `-u'' + (g, u) f + (f, u) g` on `[-1, 1]`.
pub fn model_operator_apply(t: &Triple, u: &PiecewisePoly) -> PiecewisePoly {
    let u = u.restricted(-1.0, 1.0);
    let gu = t.g.as_poly().inner(&u);
    let fu = t.f.as_poly().inner(&u);
    PiecewisePoly::linear_combination(&[
        (-ONE, &u.derivative().derivative()),
        (gu, t.f.as_poly()),
        (fu, t.g.as_poly()),
    ])
}

pub fn half_bound_kind(inv: &InvariantSet) -> HalfBoundKind {
    if inv.means_vanish() {
        if inv.test("pi").is_zero {
            HalfBoundKind::Double
        } else {
            HalfBoundKind::ConstOnly
        }
    } else if inv.test("lambda").is_zero {
        HalfBoundKind::Sigma
    } else {
        HalfBoundKind::None
    }
}

pub fn half_bound_states(t: &Triple, tol: &Tolerances) -> HalfBoundStateReport {
    let inv = compute_invariants(t, tol);
    half_bound_states_from(t, &inv)
}

pub fn half_bound_states_from(t: &Triple, inv: &InvariantSet) -> HalfBoundStateReport {
    let kind = half_bound_kind(inv);
    let states = match kind {
        HalfBoundKind::None => vec![],
        HalfBoundKind::ConstOnly => vec![TailedProfile::constant(ONE)],
        HalfBoundKind::Double => {
            // omega is constant outside [-1, 1] once the means vanish
            let mut omega = inv.omega.clone();
            omega.tail_slope = ZERO;
            vec![TailedProfile::constant(ONE), omega]
        }
        HalfBoundKind::Sigma => {
            let mut u = inv.hbs.clone();
            u.tail_slope = ZERO;
            vec![u]
        }
    };
    let residual = states
        .iter()
        .map(|u| model_operator_apply(t, &u.core).norm())
        .fold(0.0, f64::max);
    HalfBoundStateReport { kind, states, residual }
}

/// The 3x3 matrix of the bounded-solution system and its determinant.
pub fn lemma_matrix(t: &Triple) -> (Matrix3<Complex64>, Complex64) {
    let ad = Antiderivatives::of(t);
    let f0 = moment(&t.f, 0).expect("order 0");
    let g0 = moment(&t.g, 0).expect("order 0");
    let m = Matrix3::new(
        inner(&t.f, &ad.f2),
        inner(&t.f, &ad.g2) - ONE,
        f0.conj(),
        inner(&t.g, &ad.f2) - ONE,
        inner(&t.g, &ad.g2),
        g0.conj(),
        f0,
        g0,
        ZERO,
    );
    let det = m.determinant();
    (m, det)
}

/// Real `t != 0` with `lambda(f, t g) = 0`.
pub fn tune_resonance(f: &Profile, g: &Profile) -> Result<f64> {
    let f0 = moment(f, 0)?;
    let g0 = moment(g, 0)?;
    let f1 = antiderivative_unchecked(f.as_poly(), 1);
    let g1 = antiderivative_unchecked(g.as_poly(), 1);
    let mixed = TailedProfile::combine(&[(g0, &f1), (-f0, &g1)], ZERO);
    let quad = mixed.core.norm_sq();
    let lin = 2.0 * (f0 * g0.conj()).re;
    let scale = 2.0 * (f0 * g0).norm() + quad;
    if quad <= 1e-14 * scale || lin.abs() <= 1e-14 * scale {
        return Err(Error::NoRoot);
    }
    Ok(lin / quad)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol * (1.0 + b.norm())
    }

    fn double_pair() -> (Profile, Profile) {
        (Profile::bump_even().derivative(), Profile::bump_odd().derivative())
    }

    #[test]
    fn kappa_of_orthonormal_pair() {
        let (f, g) = double_pair();
        let t = Triple::without_potential(f, g).unwrap();
        let inv = compute_invariants(&t, &Tolerances::default());
        assert!(inv.pi_val.abs() < 1e-13);
        assert!(close(inv.kappa, c(15f64.sqrt() / 3.0), 1e-13));
        assert!(close(inv.kappa_closed_form(), inv.kappa, 1e-13));
    }

    #[test]
    fn lambda_for_nonresonant_pair() {
        let t = Triple::without_potential(Profile::constant(c(0.5)), Profile::poly_re(&[0.0, 1.0]).unwrap()).unwrap();
        let inv = compute_invariants(&t, &Tolerances::default());
        assert!((inv.lambda_val - 4.0 / 15.0).abs() < 1e-14);
        let (_, det) = lemma_matrix(&t);
        assert!(close(det, c(4.0 / 15.0), 1e-13));
        let report = half_bound_states(&t, &Tolerances::default());
        assert_eq!(report.kind, HalfBoundKind::None);
        assert!(report.states.is_empty());
    }

    #[test]
    fn sigma_for_tuned_pair() {
        let t = Triple::without_potential(
            Profile::constant(c(1.0)),
            Profile::poly_re(&[7.5, 7.5]).unwrap(),
        )
        .unwrap();
        let inv = compute_invariants(&t, &Tolerances::default());
        assert!(inv.lambda_val.abs() < 1e-12);
        assert!(close(inv.sigma_minus, c(-60.0), 1e-13));
        assert!(close(inv.sigma_plus, c(240.0), 1e-13));
        assert_eq!(inv.sigma_star, 0.0);
        // -75(x+1)^3 + 225(x+1)^2 - 60
        for &x in &[-0.8, 0.1, 0.9] {
            let y: f64 = x + 1.0;
            assert!(close(inv.sigma.eval(x), c(-75.0 * y.powi(3) + 225.0 * y * y - 60.0), 1e-13));
        }
        // the bounded solution itself sits 120 lower
        assert!(close(inv.hbs_minus, c(-180.0), 1e-13));
        assert!(close(inv.hbs_plus, c(120.0), 1e-13));
        assert!(close(inv.hbs_plus - inv.hbs_minus, inv.sigma_plus - inv.sigma_minus, 1e-13));
        let report = half_bound_states_from(&t, &inv);
        assert_eq!(report.kind, HalfBoundKind::Sigma);
        assert!(report.residual < 1e-8);
        let formula = model_operator_apply(&t, &inv.sigma.core).norm();
        assert!(formula > 1e3);
    }

    #[test]
    fn half_bound_state_kinds() {
        let tol = Tolerances::default();
        let t = Triple::without_potential(
            Profile::poly_re(&[0.0, 1.0]).unwrap(),
            Profile::poly_re(&[1.0, 0.0, -3.0]).unwrap(),
        )
        .unwrap();
        let inv = compute_invariants(&t, &tol);
        assert!((inv.pi_val - ((64.0f64 / 1575.0).sqrt() - 1.0)).abs() < 1e-13);
        assert_eq!(half_bound_states(&t, &tol).kind, HalfBoundKind::ConstOnly);

        let (f, g) = double_pair();
        let t = Triple::without_potential(f, g).unwrap();
        let report = half_bound_states(&t, &tol);
        assert_eq!(report.kind, HalfBoundKind::Double);
        assert_eq!(report.states.len(), 2);
        assert!(report.residual < 1e-10);
        let (m, det) = lemma_matrix(&t);
        assert_eq!(m[(2, 0)], ZERO);
        assert_eq!(m[(2, 1)], ZERO);
        assert!(det.norm() < 1e-13);
    }

    #[test]
    fn a1_for_double_fixture_with_unit_potential() {
        let (f, g) = double_pair();
        let t = Triple::new(f, g, Profile::constant(c(1.0))).unwrap();
        let inv = compute_invariants(&t, &Tolerances::default());
        assert!((inv.a0 - 2.0).abs() < 1e-14);
        let expected = 15f64.sqrt() / 3.0 + 105f64.sqrt() / 15.0;
        assert!(close(inv.a1.unwrap(), c(expected), 1e-13));
        // sympy: int |omega|^2 over [-1, 1]
        assert!((inv.a2.unwrap() - 2.45334567511677).abs() < 1e-12);
    }

    #[test]
    fn tuning() {
        let one = Profile::constant(c(1.0));
        let t = tune_resonance(&one, &Profile::poly_re(&[1.0, 1.0]).unwrap()).unwrap();
        assert!((t - 7.5).abs() < 1e-13);
        assert_eq!(tune_resonance(&one, &Profile::poly_re(&[0.0, 1.0]).unwrap()), Err(Error::NoRoot));
        let ig = Profile::poly(&[Complex64::new(0.0, 1.0), Complex64::new(0.0, 1.0)]).unwrap();
        assert_eq!(tune_resonance(&one, &ig), Err(Error::NoRoot));
    }

    #[test]
    fn triple_validation() {
        let one = Profile::constant(c(1.0));
        let two = Profile::constant(c(2.0));
        assert!(matches!(Triple::without_potential(one.clone(), two), Err(Error::LinearDependence { .. })));
        let iq = Profile::constant(Complex64::new(0.0, 1.0));
        let x = Profile::poly_re(&[0.0, 1.0]).unwrap();
        assert!(matches!(Triple::new(one, x, iq), Err(Error::ComplexPotential { .. })));
    }

    #[test]
    fn raw_support_is_normalized() {
        let f = PiecewisePoly::on_interval(-2.0, 2.0, &[c(0.0), c(1.0)]).unwrap();
        let g = PiecewisePoly::on_interval(-2.0, 2.0, &[c(1.0), c(0.0), c(-0.75)]).unwrap();
        let q = PiecewisePoly::constant_on(-2.0, 2.0, c(1.0));
        let (t, r) = Triple::from_raw(f, g, q).unwrap();
        assert_eq!(r, 2.0);
        assert_eq!(t.q.as_poly().support(), Some((-1.0, 1.0)));
        // q -> r q(r x) keeps a0
        let inv = compute_invariants(&t, &Tolerances::default());
        assert!((inv.a0 - 4.0).abs() < 1e-13);
    }
}
