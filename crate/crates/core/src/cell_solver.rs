//! The rescaled cell problem `-z'' + (g,z) f + (f,z) g + eps q z = eps^2 E z`
//! on `[-1, 1]`, reduced to four linear ODE solves plus a 2x2 system for
//! `A = (g, z)` and `B = (f, z)`. Also transfer matrices, scattering data,
//! the resolvent of `H_eps`, the rank-two Neumann problem and the inner
//! expansion `u + eps v`.

use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::classifier::{BoundaryCondition, CaseTag, InteractionKind, LimitInteraction};
use crate::error::{Error, Result};
use crate::ode::{integrate, StepPolicy, Trajectory};
use crate::profiles::{antiderivative_unchecked, PiecewisePoly, TailedProfile};
use crate::resonance::{compute_invariants, half_bound_kind, HalfBoundKind, InvariantSet, Tolerances, Triple};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Target global error of cell integrations.
pub const ODE_TOL: f64 = 1e-10;
/// Condition number above which `I - K` counts as singular.
pub const COND_LIMIT: f64 = 1e12;
/// Relative defect above which a solvability condition counts as violated.
pub const SOLVABILITY_TOL: f64 = 1e-10;
const MAX_HALVINGS: usize = 6;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellSolution {
    /// Dense solution on `[-1, 1]`.
    pub z: PiecewisePoly,
    /// `(g, z)`.
    pub a: Complex64,
    /// `(f, z)`.
    pub b: Complex64,
    /// `z(-1), z'(-1), z(1), z'(1)`.
    pub boundary: [Complex64; 4],
    pub ode_error_estimate: f64,
}

impl CellSolution {
    /// `|A - (g,z)| + |B - (f,z)|` re-evaluated on the dense output.
    pub fn self_consistency_residual(&self, t: &Triple) -> f64 {
        (self.a - t.g.as_poly().inner(&self.z)).norm() + (self.b - t.f.as_poly().inner(&self.z)).norm()
    }
}

struct Basis {
    phi: [Trajectory; 2],
    psi_f: Trajectory,
    psi_g: Trajectory,
    zp: Option<Trajectory>,
}

impl Basis {
    fn build(t: &Triple, coeff: &PiecewisePoly, forcing: Option<&PiecewisePoly>, policy: &StepPolicy) -> Self {
        let zero = PiecewisePoly::zero();
        let run = |s: &PiecewisePoly, y0: Complex64, dy0: Complex64| integrate(coeff, s, -1.0, 1.0, y0, dy0, policy);
        Basis {
            phi: [run(&zero, ONE, ZERO), run(&zero, ZERO, ONE)],
            psi_f: run(t.f.as_poly(), ZERO, ZERO),
            psi_g: run(t.g.as_poly(), ZERO, ZERO),
            zp: forcing.map(|s| run(s, ZERO, ZERO)),
        }
    }

    fn trajectories(&self) -> Vec<&Trajectory> {
        let mut out = vec![&self.phi[0], &self.phi[1], &self.psi_f, &self.psi_g];
        out.extend(self.zp.iter());
        out
    }

    fn end_values(&self) -> Vec<Complex64> {
        self.trajectories()
            .into_iter()
            .flat_map(|tr| {
                let (y, dy) = tr.eval(1.0);
                [y, dy]
            })
            .collect()
    }
}

/// Precomputed cell basis for one `(eps, E, forcing)`; solves for any initial data.
pub struct CellSolver {
    triple: Triple,
    eps: f64,
    energy: Complex64,
    basis: Basis,
    k: Matrix2<Complex64>,
    phi_ip: Matrix2<Complex64>,
    p: Vector2<Complex64>,
    pub ode_error_estimate: f64,
}

impl CellSolver {
    /// `forcing` is the extra source `s` in `z'' = A f + B g + (eps q - eps^2 E) z + s`.
    pub fn new(t: &Triple, eps: f64, energy: Complex64, forcing: Option<&PiecewisePoly>) -> Result<Self> {
        if !(0.0..=1.0).contains(&eps) {
            return Err(Error::InvalidArgument(format!("eps = {eps} outside [0, 1]")));
        }
        let coeff = t
            .q
            .as_poly()
            .scale_re(eps)
            .add(&PiecewisePoly::constant_on(-1.0, 1.0, -energy * eps * eps));
        let mut policy = StepPolicy::default();
        let mut coarse = Basis::build(t, &coeff, forcing, &policy);
        let mut estimate = f64::INFINITY;
        for _ in 0..MAX_HALVINGS {
            policy = policy.halved();
            let fine = Basis::build(t, &coeff, forcing, &policy);
            let (a, b) = (coarse.end_values(), fine.end_values());
            let scale = b.iter().map(|v| v.norm()).fold(1.0, f64::max);
            estimate = a.iter().zip(&b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max) / scale;
            coarse = fine;
            if estimate <= ODE_TOL {
                break;
            }
        }
        if estimate > ODE_TOL {
            return Err(Error::OdeToleranceNotMet { estimate });
        }
        let basis = coarse;
        let (f, g) = (t.f.as_poly(), t.g.as_poly());
        let ip = |w: &PiecewisePoly, tr: &Trajectory| w.inner(&tr.y);
        let k = Matrix2::new(ip(g, &basis.psi_f), ip(g, &basis.psi_g), ip(f, &basis.psi_f), ip(f, &basis.psi_g));
        let phi_ip = Matrix2::new(
            ip(g, &basis.phi[0]),
            ip(g, &basis.phi[1]),
            ip(f, &basis.phi[0]),
            ip(f, &basis.phi[1]),
        );
        let p = match &basis.zp {
            Some(zp) => Vector2::new(ip(g, zp), ip(f, zp)),
            None => Vector2::zeros(),
        };
        Ok(Self { triple: t.clone(), eps, energy, basis, k, phi_ip, p, ode_error_estimate: estimate })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// `(A, B)` for initial data `(z(-1), z'(-1))`.
    fn coupling(&self, init: [Complex64; 2]) -> Result<Vector2<Complex64>> {
        let m = Matrix2::identity() - self.k;
        let c0 = Vector2::new(init[0], init[1]);
        let rhs = self.phi_ip * c0 + self.p;
        let data_scale = self.phi_ip.norm() * c0.norm() + self.p.norm();
        let svd = m.svd(true, true);
        let (smax, smin) = (svd.singular_values[0], svd.singular_values[1]);
        let cond = if smin > 0.0 { smax / smin } else { f64::INFINITY };
        if cond <= COND_LIMIT {
            return m.lu().solve(&rhs).ok_or(Error::SelfConsistencySingular {
                cond,
                energy: self.energy * self.eps * self.eps,
            });
        }
        // consistent singular systems (e.g. eps = 0 at a double resonance) take the min-norm solution
        let x = svd.solve(&rhs, smax * 1e-12).expect("svd with both factors");
        let defect = (m * x - rhs).norm();
        if defect <= 1e-9 * (smax * x.norm() + data_scale) + 1e-300 {
            Ok(x)
        } else {
            Err(Error::SelfConsistencySingular { cond, energy: self.energy * self.eps * self.eps })
        }
    }

    pub fn solve(&self, init: [Complex64; 2]) -> Result<CellSolution> {
        let ab = self.coupling(init)?;
        let (a, b) = (ab[0], ab[1]);
        let b_ = &self.basis;
        let mut terms = vec![(init[0], &b_.phi[0].y), (init[1], &b_.phi[1].y), (a, &b_.psi_f.y), (b, &b_.psi_g.y)];
        if let Some(zp) = &b_.zp {
            terms.push((ONE, &zp.y));
        }
        let z = PiecewisePoly::linear_combination(&terms);
        let mut end = [ZERO; 2];
        let weights = [init[0], init[1], a, b, ONE];
        for (w, tr) in weights.iter().zip(b_.trajectories()) {
            let (y, dy) = tr.eval(1.0);
            end[0] += w * y;
            end[1] += w * dy;
        }
        Ok(CellSolution {
            z,
            a,
            b,
            boundary: [init[0], init[1], end[0], end[1]],
            ode_error_estimate: self.ode_error_estimate,
        })
    }

    /// Affine map `(z(-1), z'(-1)) -> (z(1), z'(1))` as `(M, w)`.
    pub fn boundary_map(&self) -> Result<(Matrix2<Complex64>, Vector2<Complex64>)> {
        let s0 = self.solve([ZERO, ZERO])?;
        let s1 = self.solve([ONE, ZERO])?;
        let s2 = self.solve([ZERO, ONE])?;
        let w = Vector2::new(s0.boundary[2], s0.boundary[3]);
        let m = Matrix2::new(
            s1.boundary[2] - w[0],
            s2.boundary[2] - w[0],
            s1.boundary[3] - w[1],
            s2.boundary[3] - w[1],
        );
        Ok((m, w))
    }

    pub fn triple(&self) -> &Triple {
        &self.triple
    }
}

/// Solves the cell problem for one set of initial data.
pub fn solve_cell(t: &Triple, eps: f64, energy: Complex64, init: [Complex64; 2]) -> Result<CellSolution> {
    CellSolver::new(t, eps, energy, None)?.solve(init)
}

/// Boundary-data map `(y, y')` from `ref_left` to `ref_right`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransferMatrix {
    pub m: [[Complex64; 2]; 2],
    pub ref_left: f64,
    pub ref_right: f64,
    pub k: f64,
}

impl TransferMatrix {
    pub fn det(&self) -> Complex64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }
}

fn check_eps_k(eps: f64, k: f64) -> Result<()> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::InvalidArgument(format!("eps = {eps} outside (0, 1]")));
    }
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::InvalidArgument(format!("k = {k} must be positive")));
    }
    Ok(())
}

/// Transfer matrix of `H_eps` across `[-eps, eps]` at energy `k^2`.
pub fn transfer_matrix_eps(t: &Triple, eps: f64, k: f64) -> Result<TransferMatrix> {
    check_eps_k(eps, k)?;
    let solver = CellSolver::new(t, eps, c(k * k), None)?;
    let (mc, _) = solver.boundary_map()?;
    let m = [[mc[(0, 0)], mc[(0, 1)] * eps], [mc[(1, 0)] / eps, mc[(1, 1)]]];
    Ok(TransferMatrix { m, ref_left: -eps, ref_right: eps, k })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reference {
    Origin,
    PmEps,
}

/// Plane-wave scattering data; amplitudes refer to `e^{+-ikx}` with `x`
/// measured from the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScatteringData {
    pub k: f64,
    pub t: Complex64,
    pub r_left: Complex64,
    pub r_right: Complex64,
    /// Transmission for incidence from the right.
    pub t_right: Complex64,
    pub reference: Reference,
}

impl ScatteringData {
    /// `max(| |t|^2 + |r|^2 - 1 |)` over both incidences.
    pub fn unitarity_defect(&self) -> f64 {
        let left = (self.t.norm_sqr() + self.r_left.norm_sqr() - 1.0).abs();
        let right = (self.t_right.norm_sqr() + self.r_right.norm_sqr() - 1.0).abs();
        left.max(right)
    }
}

/// Matches `e^{ikx} + r e^{-ikx}` on the left to `t e^{ikx}` on the right (and
/// the mirrored problem) through `m`, which maps data at `xl` to data at `xr`.
pub fn scattering_from_transfer(m: &[[Complex64; 2]; 2], xl: f64, xr: f64, k: f64) -> Result<ScatteringData> {
    let ik = Complex64::new(0.0, k);
    let m = Matrix2::new(m[0][0], m[0][1], m[1][0], m[1][1]);
    let ep = |x: f64| Complex64::from_polar(1.0, k * x);
    let u = Vector2::new(ep(xl), ik * ep(xl));
    let v = Vector2::new(ep(-xl), -ik * ep(-xl));
    let w = Vector2::new(ep(xr), ik * ep(xr));
    let a = Vector2::new(ep(-xr), -ik * ep(-xr));
    let mv = m * v;
    let sys = Matrix2::new(mv[0], -w[0], mv[1], -w[1]);
    let det = sys.determinant();
    if det.norm() <= 1e-14 * (1.0 + sys.norm()) * (1.0 + k) {
        return Err(Error::MatchingSingular { k });
    }
    let lu = sys.lu();
    let left = lu.solve(&(-(m * u))).ok_or(Error::MatchingSingular { k })?;
    let right = lu.solve(&a).ok_or(Error::MatchingSingular { k })?;
    Ok(ScatteringData {
        k,
        t: left[1],
        r_left: left[0],
        r_right: right[1],
        t_right: right[0],
        reference: Reference::Origin,
    })
}

/// Scattering data of `H_eps` (no background potential).
pub fn scattering_eps(t: &Triple, eps: f64, k: f64) -> Result<ScatteringData> {
    let tm = transfer_matrix_eps(t, eps, k)?;
    scattering_from_transfer(&tm.m, tm.ref_left, tm.ref_right, k)
}

/// Solution of the rank-two Neumann problem.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NeumannSolution {
    pub v: PiecewisePoly,
    pub kind: HalfBoundKind,
    /// `||-v'' + Qv - r|| + |v'(-1) - a| + |v'(1) - b|`.
    pub residual: f64,
}

fn xp1() -> PiecewisePoly {
    PiecewisePoly::on_interval(-1.0, 1.0, &[ONE, ONE]).expect("x + 1")
}

fn on_cell(r: &PiecewisePoly) -> PiecewisePoly {
    r.extended(-1.0, 1.0).restricted(-1.0, 1.0)
}

/// `||-v'' + (g,v) f + (f,v) g - r||_I + |v'(-1) - a| + |v'(1) - b|`.
pub fn neumann_residual(t: &Triple, v: &PiecewisePoly, r: &PiecewisePoly, a: Complex64, b: Complex64) -> f64 {
    let (f, g) = (t.f.as_poly(), t.g.as_poly());
    let v = on_cell(v);
    let lhs = PiecewisePoly::linear_combination(&[
        (-ONE, &v.derivative().derivative()),
        (g.inner(&v), f),
        (f.inner(&v), g),
        (-ONE, &on_cell(r)),
    ]);
    let dv = v.derivative();
    lhs.norm() + (dv.eval(-1.0) - a).norm() + (dv.eval_left(1.0).0 - b).norm()
}

fn defect(condition: &'static str, value: Complex64, scale: f64) -> Option<(&'static str, f64)> {
    let rel = value.norm() / (scale + 1e-300);
    (value.norm() > SOLVABILITY_TOL * scale + 1e-14).then_some((condition, rel))
}

/// Checks the solvability condition for the kind of half-bound states of `B`.
/// Returns the violated condition and its relative defect, if any.
pub fn neumann_solvability(inv: &InvariantSet, r: &PiecewisePoly, a: Complex64, b: Complex64) -> Option<(&'static str, f64)> {
    let r = on_cell(r);
    let rn = r.norm();
    let one = PiecewisePoly::constant_on(-1.0, 1.0, ONE);
    match half_bound_kind(inv) {
        HalfBoundKind::None => None,
        HalfBoundKind::ConstOnly => defect(
            "a - b = (1, r)",
            a - b - one.inner(&r),
            a.norm() + b.norm() + 2f64.sqrt() * rn,
        ),
        HalfBoundKind::Sigma => {
            let u = &inv.hbs.core;
            let (um, up) = (inv.hbs_minus, inv.hbs_plus);
            defect(
                "a conj(u_-) - b conj(u_+) = (u, r)",
                a * um.conj() - b * up.conj() - u.inner(&r),
                a.norm() * um.norm() + b.norm() * up.norm() + u.norm() * rn,
            )
        }
        HalfBoundKind::Double => {
            let omega = &inv.omega.core;
            defect("a - b = (1, r)", a - b - one.inner(&r), a.norm() + b.norm() + 2f64.sqrt() * rn).or_else(|| {
                defect(
                    "b conj(kappa) = -(omega, r)",
                    b * inv.kappa.conj() + omega.inner(&r),
                    b.norm() * inv.kappa.norm() + omega.norm() * rn,
                )
            })
        }
    }
}

/// Solves `-v'' + (g,v) f + (f,v) g = r` on `[-1, 1]`, `v'(-1) = a`, `v'(1) = b`.
///
/// Normalization of the non-unique cases: `v(-1) = 0` (constant half-bound
/// state only), `(u, v) = 0` (single half-bound state `u`), `v(+-1) = 0`
/// (double resonance, `kappa != 0`), `v(-1) = 0` and `(omega, v) = 0`
/// (double resonance, `kappa = 0`).
pub fn solve_rank2_neumann(t: &Triple, r: &PiecewisePoly, a: Complex64, b: Complex64) -> Result<NeumannSolution> {
    let inv = compute_invariants(t, &Tolerances::default());
    solve_rank2_neumann_with(t, &inv, r, a, b)
}

pub fn solve_rank2_neumann_with(
    t: &Triple,
    inv: &InvariantSet,
    r: &PiecewisePoly,
    a: Complex64,
    b: Complex64,
) -> Result<NeumannSolution> {
    if let Some((condition, defect)) = neumann_solvability(inv, r, a, b) {
        return Err(Error::Unsolvable { condition, defect });
    }
    let kind = half_bound_kind(inv);
    let r = on_cell(r);
    let r2 = r.antiderivative().antiderivative();
    let (f, g) = (t.f.as_poly(), t.g.as_poly());
    let f2 = antiderivative_unchecked(f, 2).core;
    let g2 = antiderivative_unchecked(g, 2).core;
    let x1 = xp1();
    let v = if kind == HalfBoundKind::Double {
        let nf2 = inv.norm_f * inv.norm_f;
        let c1 = (a * inv.f1.conj() - f.inner(&r2)) / nf2;
        let vstar = PiecewisePoly::linear_combination(&[(c1, &f2), (-ONE, &r2), (a, &x1)]);
        let omega = &inv.omega.core;
        if inv.test("kappa").is_zero {
            let w = omega.inner(&vstar) / omega.inner(omega);
            vstar.sub(&omega.scale(w))
        } else {
            let r2_end = r2.eval_left(1.0).0;
            let w = (inv.f1 * c1 + r2_end - 2.0 * a) / inv.kappa;
            vstar.add(&omega.scale(w))
        }
    } else {
        let (f0, g0) = (inv.f0, inv.g0);
        let m = Matrix3::new(
            g.inner(&f2) - ONE,
            g.inner(&g2),
            g0.conj(),
            f.inner(&f2),
            f.inner(&g2) - ONE,
            f0.conj(),
            f0,
            g0,
            ZERO,
        );
        let one = PiecewisePoly::constant_on(-1.0, 1.0, ONE);
        let rhs = Vector3::new(
            g.inner(&r2) - a * g.inner(&x1),
            f.inner(&r2) - a * f.inner(&x1),
            b - a + one.inner(&r),
        );
        let coef = if kind == HalfBoundKind::None {
            m.lu().solve(&rhs).ok_or(Error::Unsolvable { condition: "nonsingular bounded-solution system", defect: 0.0 })?
        } else {
            let svd = m.svd(true, true);
            let smax = svd.singular_values[0];
            svd.solve(&rhs, smax * 1e-10).expect("svd with both factors")
        };
        let mut v = PiecewisePoly::linear_combination(&[
            (coef[0], &f2),
            (coef[1], &g2),
            (-ONE, &r2),
            (a, &x1),
            (coef[2], &one),
        ]);
        match kind {
            HalfBoundKind::ConstOnly => {
                let shift = v.eval(-1.0);
                v = v.sub(&one.scale(shift));
            }
            HalfBoundKind::Sigma => {
                let u = &inv.hbs.core;
                let w = u.inner(&v) / u.inner(u);
                v = v.sub(&u.scale(w));
            }
            _ => {}
        }
        v
    };
    let residual = neumann_residual(t, &v, &r, a, b);
    Ok(NeumannSolution { v, kind, residual })
}

/// Boundary data `(y_-, y'_-, y_+, y'_+)` at the interaction point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryData {
    pub y_minus: Complex64,
    pub dy_minus: Complex64,
    pub y_plus: Complex64,
    pub dy_plus: Complex64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InnerExpansion {
    pub u: TailedProfile,
    pub v: NeumannSolution,
}

/// Largest violation of the interaction's coupling conditions by `data`.
pub fn coupling_defect(interaction: &LimitInteraction, data: &BoundaryData) -> f64 {
    let scale = 1.0 + data.y_minus.norm() + data.dy_minus.norm() + data.y_plus.norm() + data.dy_plus.norm();
    let raw = match interaction.kind {
        InteractionKind::Connected => {
            let tm = interaction.transfer().expect("connected");
            let p = tm[0][0] * data.y_minus + tm[0][1] * data.dy_minus - data.y_plus;
            let d = tm[1][0] * data.y_minus + tm[1][1] * data.dy_minus - data.dy_plus;
            p.norm().max(d.norm())
        }
        InteractionKind::Separated => {
            let side = |bc: BoundaryCondition, y: Complex64, dy: Complex64| match bc {
                BoundaryCondition::Dirichlet => y.norm(),
                BoundaryCondition::Robin { theta } => (dy - y * theta).norm(),
            };
            side(interaction.left.unwrap(), data.y_minus, data.dy_minus)
                .max(side(interaction.right.unwrap(), data.y_plus, data.dy_plus))
        }
    };
    raw / scale
}

/// Leading terms `u + eps v` of the cell solution for limit data `data`.
pub fn inner_expansion(t: &Triple, interaction: &LimitInteraction, data: &BoundaryData) -> Result<InnerExpansion> {
    let d = coupling_defect(interaction, data);
    if d > 1e-9 {
        return Err(Error::CouplingViolated(d));
    }
    let inv = compute_invariants(t, &Tolerances::default());
    let mut omega = inv.omega.clone();
    omega.tail_slope = ZERO;
    let mut hbs = inv.hbs.clone();
    hbs.tail_slope = ZERO;
    let (ym, yp) = (data.y_minus, data.y_plus);
    let u = match interaction.case {
        CaseTag::A1 | CaseTag::B1 if !inv.test("kappa").is_zero => {
            TailedProfile::combine(&[((yp - ym) / inv.kappa, &omega)], ym)
        }
        CaseTag::A1 | CaseTag::B1 => {
            let w = -inv.a1.unwrap_or_default().conj() / inv.a2.unwrap_or(1.0);
            TailedProfile::combine(&[(ym * w, &omega)], ym)
        }
        CaseTag::A2 | CaseTag::B2 => {
            let c0 = if inv.hbs_plus.norm() >= inv.hbs_minus.norm() { yp / inv.hbs_plus } else { ym / inv.hbs_minus };
            hbs.scale(c0)
        }
        CaseTag::A3 => TailedProfile::constant(ym),
        CaseTag::B3 => TailedProfile::constant(ZERO),
    };
    let r = t.q.as_poly().mul(&u.core).scale(-ONE);
    let v = solve_rank2_neumann_with(t, &inv, &r, data.dy_minus, data.dy_plus)?;
    Ok(InnerExpansion { u, v })
}

/// Resolvent solution on `[-L, L]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResolventSolution {
    pub y: PiecewisePoly,
    pub length: f64,
    pub zeta: Complex64,
}

/// `sqrt(zeta)` with positive imaginary part.
pub fn wave_number(zeta: Complex64) -> Result<Complex64> {
    if zeta.im == 0.0 || !zeta.im.is_finite() || !zeta.re.is_finite() {
        return Err(Error::InvalidArgument(format!("zeta = {zeta} must have nonzero imaginary part")));
    }
    let k = zeta.sqrt();
    Ok(if k.im < 0.0 { -k } else { k })
}

/// Smallest truncation length with `e^{-Im k (L - L0)} <= 1e-12`.
pub fn required_length(zeta: Complex64, h: &PiecewisePoly, inner: f64) -> Result<f64> {
    let k = wave_number(zeta)?;
    let l0 = h.support().map(|(a, b)| a.abs().max(b.abs())).unwrap_or(0.0).max(inner).max(1.0);
    Ok(l0 + 1e12f64.ln() / k.im)
}

fn truncation(zeta: Complex64, h: &PiecewisePoly, inner: f64, length: Option<f64>) -> Result<f64> {
    let required = required_length(zeta, h, inner)?;
    match length {
        Some(l) if l < required => Err(Error::TruncationTooSmall { length: l, required }),
        Some(l) => Ok(l),
        None => Ok(required),
    }
}

/// Exterior pieces on one side: particular solution `p` with zero data at
/// the far end and the homogeneous solution `w` obeying the impedance
/// condition there.
pub(crate) struct Exterior {
    pub p: Trajectory,
    pub w: Trajectory,
}

pub(crate) fn exterior(zeta: Complex64, h: &PiecewisePoly, far: f64, near: f64) -> Result<Exterior> {
    let k = wave_number(zeta)?;
    let (lo, hi) = (far.min(near), far.max(near));
    let coeff = PiecewisePoly::constant_on(lo, hi, -zeta);
    let s = h.restricted(lo, hi).scale(-ONE);
    let policy = StepPolicy::default();
    // outgoing: y' = -ik y at the left end, y' = ik y at the right end
    let dy = if far < near { -Complex64::i() * k } else { Complex64::i() * k };
    Ok(Exterior {
        p: integrate(&coeff, &s, far, near, ZERO, ZERO, &policy),
        w: integrate(&coeff, &PiecewisePoly::zero(), far, near, ONE, dy, &policy),
    })
}

fn solve2(m: Matrix2<Complex64>, rhs: Vector2<Complex64>, zeta: Complex64) -> Result<Vector2<Complex64>> {
    m.lu().solve(&rhs).ok_or(Error::MatchingSingular { k: zeta.norm().sqrt() })
}

/// Solves `(H_eps - zeta) y = h` on `[-L, L]` with impedance conditions at
/// `+-L`. `length` defaults to the smallest admissible truncation.
pub fn resolvent_apply_eps(
    t: &Triple,
    eps: f64,
    zeta: Complex64,
    h: &PiecewisePoly,
    length: Option<f64>,
) -> Result<ResolventSolution> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::InvalidArgument(format!("eps = {eps} outside (0, 1]")));
    }
    let l = truncation(zeta, h, eps, length)?;
    let left = exterior(zeta, h, -l, -eps)?;
    let right = exterior(zeta, h, l, eps)?;
    let forcing = h.dilated(1.0 / eps).restricted(-1.0, 1.0).scale_re(-eps * eps);
    let solver = CellSolver::new(t, eps, zeta, Some(&forcing))?;
    let (nm, w) = solver.boundary_map()?;
    let (pl, dpl) = left.p.eval(-eps);
    let (wl, dwl) = left.w.eval(-eps);
    let (pr, dpr) = right.p.eval(eps);
    let (wr, dwr) = right.w.eval(eps);
    let cp = Vector2::new(pl, eps * dpl);
    let d = Vector2::new(wl, eps * dwl);
    let e = Vector2::new(wr, eps * dwr);
    let nd = nm * d;
    let sys = Matrix2::new(nd[0], -e[0], nd[1], -e[1]);
    let rhs = Vector2::new(pr, eps * dpr) - w - nm * cp;
    let ab = solve2(sys, rhs, zeta)?;
    let (alpha, beta) = (ab[0], ab[1]);
    let cell = solver.solve([cp[0] + alpha * d[0], cp[1] + alpha * d[1]])?;
    let yl = left.p.y.add(&left.w.y.scale(alpha)).restricted(-l, -eps);
    let yr = right.p.y.add(&right.w.y.scale(beta)).restricted(eps, l);
    let yc = cell.z.dilated(eps);
    let y = PiecewisePoly::concat(&[&yl, &yc, &yr])?;
    Ok(ResolventSolution { y, length: l, zeta })
}
