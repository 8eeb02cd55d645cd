//! Scattering data, transfer matrices and resolvents of the limit point
//! interactions at the origin (free leads).

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;

use crate::cell_solver::{exterior, required_length, scattering_from_transfer, Reference, ResolventSolution, ScatteringData, TransferMatrix};
use crate::classifier::{BoundaryCondition, InteractionKind, LimitInteraction};
use crate::error::{Error, Result};
use crate::profiles::PiecewisePoly;

fn check_k(k: f64) -> Result<()> {
    if k > 0.0 && k.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("k = {k} must be positive")))
    }
}

/// `e^{i phi} C` at reference points `0-` / `0+`.
pub fn transfer_matrix_limit(interaction: &LimitInteraction, k: f64) -> Result<TransferMatrix> {
    let m = interaction.transfer().ok_or(Error::SeparatedHasNoTransfer)?;
    Ok(TransferMatrix { m, ref_left: 0.0, ref_right: 0.0, k })
}

/// Reflection of `e^{ikx}` (left side) or `e^{-ikx}` (right side) off a separated condition.
fn separated_reflection(bc: BoundaryCondition, k: f64, right: bool) -> Complex64 {
    let ik = Complex64::new(0.0, k);
    match bc {
        BoundaryCondition::Dirichlet => Complex64::new(-1.0, 0.0),
        BoundaryCondition::Robin { theta } if right => (ik + theta) / (ik - theta),
        BoundaryCondition::Robin { theta } => (ik - theta) / (ik + theta),
    }
}

/// Closed-form scattering data of the limit interaction.
pub fn scattering_limit(interaction: &LimitInteraction, k: f64) -> Result<ScatteringData> {
    check_k(k)?;
    let ik = Complex64::new(0.0, k);
    let zero = Complex64::new(0.0, 0.0);
    match interaction.kind {
        InteractionKind::Connected => {
            let c = interaction.matrix.expect("connected matrix");
            let phase = Complex64::from_polar(1.0, interaction.phase.unwrap_or(0.0));
            let (c11, c12, c21, c22) = (c[0][0], c[0][1], c[1][0], c[1][1]);
            let d = ik * (c11 + c22) + k * k * c12 - c21;
            let t = 2.0 * ik * phase / d;
            let r_left = -(ik * (c11 - c22) - k * k * c12 - c21) / d;
            // mirror: x -> -x maps C to diag(1,-1) C^{-1} diag(1,-1) and phi to -phi
            let r_right = -(ik * (c22 - c11) - k * k * c12 - c21) / d;
            let t_right = 2.0 * ik * phase.conj() / d;
            Ok(ScatteringData { k, t, r_left, r_right, t_right, reference: Reference::Origin })
        }
        InteractionKind::Separated => Ok(ScatteringData {
            k,
            t: zero,
            r_left: separated_reflection(interaction.left.expect("left condition"), k, false),
            r_right: separated_reflection(interaction.right.expect("right condition"), k, true),
            t_right: zero,
            reference: Reference::Origin,
        }),
    }
}

/// Brute-force solve of the plane-wave matching system (connected case only).
pub fn scattering_limit_numeric(interaction: &LimitInteraction, k: f64) -> Result<ScatteringData> {
    check_k(k)?;
    let tm = transfer_matrix_limit(interaction, k)?;
    scattering_from_transfer(&tm.m, 0.0, 0.0, k)
}

/// Solves `-y'' - zeta y = h` on `[-L, 0)` and `(0, L]` with impedance
/// conditions at `+-L` and the interface condition of `interaction` at 0.
pub fn resolvent_apply_limit(
    interaction: &LimitInteraction,
    zeta: Complex64,
    h: &PiecewisePoly,
    length: Option<f64>,
) -> Result<ResolventSolution> {
    let required = required_length(zeta, h, 0.0)?;
    let l = match length {
        Some(l) if l < required => return Err(Error::TruncationTooSmall { length: l, required }),
        Some(l) => l,
        None => required,
    };
    let left = exterior(zeta, h, -l, 0.0)?;
    let right = exterior(zeta, h, l, 0.0)?;
    let data = |tr: &crate::ode::Trajectory| {
        let (y, dy) = tr.eval(0.0);
        Vector2::new(y, dy)
    };
    let (pl, wl, pr, wr) = (data(&left.p), data(&left.w), data(&right.p), data(&right.w));
    let singular = || Error::MatchingSingular { k: zeta.norm().sqrt() };
    let (alpha, beta) = match interaction.kind {
        InteractionKind::Connected => {
            let tm = interaction.transfer().expect("connected");
            let t = Matrix2::new(tm[0][0], tm[0][1], tm[1][0], tm[1][1]);
            let twl = t * wl;
            let sys = Matrix2::new(twl[0], -wr[0], twl[1], -wr[1]);
            let ab = sys.lu().solve(&(pr - t * pl)).ok_or_else(singular)?;
            (ab[0], ab[1])
        }
        InteractionKind::Separated => {
            // coefficient x with (p + x w) obeying the condition
            let side = |bc: BoundaryCondition, p: Vector2<Complex64>, w: Vector2<Complex64>| {
                let (num, den) = match bc {
                    BoundaryCondition::Dirichlet => (p[0], w[0]),
                    BoundaryCondition::Robin { theta } => (p[1] - theta * p[0], w[1] - theta * w[0]),
                };
                if den.norm() == 0.0 {
                    Err(singular())
                } else {
                    Ok(-num / den)
                }
            };
            (side(interaction.left.unwrap(), pl, wl)?, side(interaction.right.unwrap(), pr, wr)?)
        }
    };
    let yl = left.p.y.add(&left.w.y.scale(alpha)).restricted(-l, 0.0);
    let yr = right.p.y.add(&right.w.y.scale(beta)).restricted(0.0, l);
    let y = PiecewisePoly::concat(&[&yl, &yr])?;
    Ok(ResolventSolution { y, length: l, zeta })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::CaseTag;
    use rand::{Rng, SeedableRng};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn connected(phase: f64, m: [[f64; 2]; 2]) -> LimitInteraction {
        LimitInteraction::connected(CaseTag::A1, phase, m)
    }

    #[test]
    fn delta_and_delta_prime_transmission() {
        let ik = Complex64::new(0.0, 1.3);
        let sd = scattering_limit(&connected(0.0, [[1.0, 0.0], [2.0, 1.0]]), 1.3).unwrap();
        assert!((sd.t - 2.0 * ik / (2.0 * ik - 2.0)).norm() < 1e-14);
        let beta = 0.7;
        let sd = scattering_limit(&connected(0.0, [[1.0, beta], [0.0, 1.0]]), 1.3).unwrap();
        assert!((sd.t - c(2.0) / (2.0 - beta * ik)).norm() < 1e-14);
        let dd = LimitInteraction::separated(CaseTag::B3, BoundaryCondition::Dirichlet, BoundaryCondition::Dirichlet);
        let sd = scattering_limit(&dd, 2.0).unwrap();
        assert_eq!(sd.t, c(0.0));
        assert_eq!((sd.r_left, sd.r_right), (c(-1.0), c(-1.0)));
    }

    #[test]
    fn closed_form_matches_matching_system() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for _ in 0..100 {
            let (a, b, cc): (f64, f64, f64) = (rng.gen_range(0.2..3.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let m = [[a, b], [cc, (1.0 + b * cc) / a]];
            let lim = connected(rng.gen_range(-3.0..3.0), m);
            let k = rng.gen_range(0.05..5.0);
            let closed = scattering_limit(&lim, k).unwrap();
            let brute = scattering_limit_numeric(&lim, k).unwrap();
            for (x, y) in [(closed.t, brute.t), (closed.r_left, brute.r_left), (closed.r_right, brute.r_right), (closed.t_right, brute.t_right)] {
                assert!((x - y).norm() < 1e-12, "{x} {y}");
            }
            assert!(closed.unitarity_defect() < 1e-12);
            let flipped = LimitInteraction { phase: Some(lim.phase.unwrap() + std::f64::consts::PI), matrix: Some([[-m[0][0], -m[0][1]], [-m[1][0], -m[1][1]]]), ..lim.clone() };
            let other = scattering_limit(&flipped, k).unwrap();
            assert!((other.t - closed.t).norm() < 1e-12 && (other.r_left - closed.r_left).norm() < 1e-12);
        }
    }

    #[test]
    fn separated_unitarity() {
        let lim = LimitInteraction::separated(CaseTag::B2, BoundaryCondition::Robin { theta: -1.5 }, BoundaryCondition::Robin { theta: 0.4 });
        let sd = scattering_limit(&lim, 0.8).unwrap();
        assert!(sd.unitarity_defect() < 1e-14);
        assert!(transfer_matrix_limit(&lim, 1.0).is_err());
    }

    #[test]
    fn identity_resolvent_is_free() {
        let h = PiecewisePoly::constant_on(0.0, 1.0, c(1.0));
        let zeta = Complex64::i();
        let lim = connected(0.0, [[1.0, 0.0], [0.0, 1.0]]);
        let y = resolvent_apply_limit(&lim, zeta, &h, None).unwrap();
        let free = crate::cell_solver::resolvent_apply_eps(
            &crate::resonance::Triple::potential_only(crate::profiles::Profile::constant(c(0.0))).unwrap(),
            0.5,
            zeta,
            &h,
            Some(y.length),
        )
        .unwrap();
        assert!(y.y.sub(&free.y).norm() < 1e-10);
    }

    #[test]
    fn dirichlet_decouples_half_lines() {
        let h = PiecewisePoly::constant_on(0.5, 1.5, c(1.0));
        let lim = LimitInteraction::separated(CaseTag::B3, BoundaryCondition::Dirichlet, BoundaryCondition::Dirichlet);
        let y = resolvent_apply_limit(&lim, Complex64::new(0.3, 1.0), &h, None).unwrap();
        assert!(y.y.restricted(-y.length, 0.0).norm() < 1e-14);
        assert!(y.y.eval_with_derivative(0.0).0.norm() < 1e-12);
    }

    #[test]
    fn delta_resolvent_matches_kernel() {
        // Green kernel of -d^2 + a0 delta: G0(x,s) - a0 G0(x,0) G0(0,s) / (1 + a0 G0(0,0)),
        // G0(x,s) = i e^{ik|x-s|} / (2k)
        let a0 = 2.0;
        let zeta = Complex64::i();
        let k = crate::cell_solver::wave_number(zeta).unwrap();
        let i = Complex64::i();
        let h = PiecewisePoly::constant_on(0.0, 1.0, c(1.0));
        let y = resolvent_apply_limit(&connected(0.0, [[1.0, 0.0], [a0, 1.0]]), zeta, &h, None).unwrap();
        let g0 = |x: f64, s: f64| i * (i * k * (x - s).abs()).exp() / (2.0 * k);
        // int_0^1 G0(x, s) ds
        let free = |x: f64| {
            let part = |a: f64, b: f64, sign: f64| {
                let w = i * k * sign;
                ((w * (x - a)).exp() - (w * (x - b)).exp()) / w
            };
            let inside = if x <= 0.0 {
                part(0.0, 1.0, -1.0)
            } else if x >= 1.0 {
                part(0.0, 1.0, 1.0)
            } else {
                part(0.0, x, 1.0) + part(x, 1.0, -1.0)
            };
            i * inside / (2.0 * k)
        };
        for &x in &[-2.0, -0.3, 0.4, 1.7] {
            let expected = free(x) - a0 * g0(x, 0.0) * free(0.0) / (1.0 + a0 * g0(0.0, 0.0));
            assert!((y.y.eval(x) - expected).norm() < 1e-10, "{x}");
        }
    }
}
