//! Named triples, one or more per branch of the classification graph.

use num_complex::Complex64;

use crate::classifier::CaseTag;
use crate::profiles::{PiecewisePoly, Profile};
use crate::resonance::{compute_invariants, Tolerances, Triple};

pub struct Fixture {
    pub name: &'static str,
    pub case: CaseTag,
    pub triple: Triple,
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn poly(coeffs: &[f64]) -> Profile {
    Profile::poly_re(coeffs).expect("fixture polynomial")
}

fn triple(f: Profile, g: Profile, q: Profile) -> Triple {
    Triple::new(f, g, q).expect("fixture triple")
}

/// `f = -(sqrt15/2) x`, `g = (sqrt105/4)(1 - 3x^2)`: derivatives of an
/// orthonormal pair, so `pi = 0`.
pub fn orthonormal_pair() -> (Profile, Profile) {
    (Profile::bump_even().derivative(), Profile::bump_odd().derivative())
}

/// Derivatives of `(e1 - e2)/sqrt2` and `(e1 + e2)/sqrt2`; `pi = 0` and `kappa = 0`.
pub fn rotated_pair() -> (Profile, Profile) {
    let (e1, e2) = (Profile::bump_even(), Profile::bump_odd());
    let r = c(std::f64::consts::FRAC_1_SQRT_2);
    let big_f = e1.add(&e2.scale(c(-1.0))).scale(r);
    let big_g = e1.add(&e2).scale(r);
    (big_f.derivative(), big_g.derivative())
}

/// `int x^k omega^m` on `[-1, 1]` for a real zero-mean pair.
fn omega_moment(f: &Profile, g: &Profile, k: usize, m: u32) -> f64 {
    let t = Triple::without_potential(f.clone(), g.clone()).expect("fixture pair");
    let omega = compute_invariants(&t, &Tolerances::default()).omega.core;
    let mut xk = vec![c(0.0); k + 1];
    xk[k] = c(1.0);
    let mut p = PiecewisePoly::on_interval(-1.0, 1.0, &xk).expect("monomial");
    for _ in 0..m {
        p = p.mul(&omega);
    }
    p.integral().re
}

pub fn a1() -> Triple {
    let (f, g) = orthonormal_pair();
    triple(f, g, poly(&[1.0]))
}

/// `q = x^2 - 1/3 + s x` with `a0 = a1 = 0`: a pure delta-prime.
pub fn a1_delta_prime() -> Triple {
    let (f, g) = orthonormal_pair();
    let even = omega_moment(&f, &g, 2, 1) - omega_moment(&f, &g, 0, 1) / 3.0;
    let s = -even / omega_moment(&f, &g, 1, 1);
    triple(f, g, poly(&[-1.0 / 3.0, s, 1.0]))
}

/// `q = 1 + s x^2` with `a2 = 0`.
pub fn a1_exotic() -> Triple {
    let (f, g) = orthonormal_pair();
    let s = -omega_moment(&f, &g, 0, 2) / omega_moment(&f, &g, 2, 2);
    triple(f, g, poly(&[1.0, 0.0, s]))
}

pub fn a1_kappa_zero() -> Triple {
    let (f, g) = rotated_pair();
    triple(f, g, poly(&[1.0]))
}

/// `f = 1`, `g = (15/2)(1 + x)`: `lambda = 0` with both ends of the half-bound state nonzero.
pub fn a2() -> Triple {
    triple(poly(&[1.0]), poly(&[7.5, 7.5]), poly(&[0.0]))
}

/// Same profiles with `q = 1`.
pub fn a2_delta() -> Triple {
    triple(poly(&[1.0]), poly(&[7.5, 7.5]), poly(&[1.0]))
}

/// `f = x`, `g = 1 - 3x^2`, `q = 1`: only the constant half-bound state.
pub fn a3() -> Triple {
    triple(poly(&[0.0, 1.0]), poly(&[1.0, 0.0, -3.0]), poly(&[1.0]))
}

/// Double resonance with `kappa = a1 = a2 = 0` via `q = 1 + c1 x^2 + c2 x^4`.
pub fn a3_double() -> Triple {
    let (f, g) = rotated_pair();
    let m = |k, p| omega_moment(&f, &g, k, p);
    // [m(2,1) m(4,1); m(2,2) m(4,2)] (c1, c2) = -(m(0,1), m(0,2))
    let (a, b, cc, d) = (m(2, 1), m(4, 1), m(2, 2), m(4, 2));
    let (r1, r2) = (-m(0, 1), -m(0, 2));
    let det = a * d - b * cc;
    let c1 = (r1 * d - b * r2) / det;
    let c2 = (a * r2 - cc * r1) / det;
    triple(f, g, poly(&[1.0, 0.0, c1, 0.0, c2]))
}

pub fn b1_neumann() -> Triple {
    let (f, g) = orthonormal_pair();
    triple(f, g, poly(&[0.0]))
}

/// `q = 1 + s x^2` with `a2 = kappa a1`.
pub fn b1_robin() -> Triple {
    let (f, g) = orthonormal_pair();
    let kappa = 15f64.sqrt() / 3.0;
    let m = |k, p| omega_moment(&f, &g, k, p);
    let s = (kappa * m(0, 1) - m(0, 2)) / (m(2, 2) - kappa * m(2, 1));
    triple(f, g, poly(&[1.0, 0.0, s]))
}

/// `f = 1`, `g = 0.3(1 + 5x)`, `q = 1`: half-bound state vanishes on the right.
pub fn b2_dirichlet_right() -> Triple {
    triple(poly(&[1.0]), poly(&[0.3, 1.5]), poly(&[1.0]))
}

/// Mirror image of [`b2_dirichlet_right`].
pub fn b2_dirichlet_left() -> Triple {
    triple(poly(&[1.0]), poly(&[0.3, -1.5]), poly(&[1.0]))
}

/// `f = 1/2`, `g = x`: no half-bound state.
pub fn b3_nonresonant() -> Triple {
    triple(poly(&[0.5]), poly(&[0.0, 1.0]), poly(&[1.0]))
}

/// `f = 1`, `g = -(75/28)(1 - 4.2 x^2)`: half-bound state vanishes at both ends.
pub fn b3_even() -> Triple {
    let t = -75.0 / 28.0;
    triple(poly(&[1.0]), poly(&[t, 0.0, -4.2 * t]), poly(&[1.0]))
}

/// Double resonance with `kappa = 0`, `a2 = 0`, `a1 != 0` via `q = 1 + s x^2`.
pub fn b3_kappa_zero() -> Triple {
    let (f, g) = rotated_pair();
    let s = -omega_moment(&f, &g, 0, 2) / omega_moment(&f, &g, 2, 2);
    triple(f, g, poly(&[1.0, 0.0, s]))
}

/// Pseudo-Hamiltonian regularization `f = alpha/2`, `g = -(3/2) x`.
pub fn pseudo_hamiltonian(alpha: f64) -> Triple {
    triple(poly(&[alpha / 2.0]), poly(&[0.0, -1.5]), poly(&[0.0]))
}

pub fn all() -> Vec<Fixture> {
    use CaseTag::*;
    let list: Vec<(&'static str, CaseTag, fn() -> Triple)> = vec![
        ("a1", A1, a1),
        ("a1_delta_prime", A1, a1_delta_prime),
        ("a1_exotic", A1, a1_exotic),
        ("a1_kappa_zero", A1, a1_kappa_zero),
        ("a2", A2, a2),
        ("a2_delta", A2, a2_delta),
        ("a3", A3, a3),
        ("a3_double", A3, a3_double),
        ("b1_neumann", B1, b1_neumann),
        ("b1_robin", B1, b1_robin),
        ("b2_dirichlet_right", B2, b2_dirichlet_right),
        ("b2_dirichlet_left", B2, b2_dirichlet_left),
        ("b3_nonresonant", B3, b3_nonresonant),
        ("b3_even", B3, b3_even),
        ("b3_kappa_zero", B3, b3_kappa_zero),
    ];
    list.into_iter().map(|(name, case, make)| Fixture { name, case, triple: make() }).collect()
}

pub fn by_name(name: &str) -> Option<Fixture> {
    all().into_iter().find(|f| f.name == name)
}
