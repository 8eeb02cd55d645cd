//! Compactly supported piecewise polynomials with exact quadrature.
//!
//! Every function the library handles (the profiles `f`, `g`, `q`, their
//! antiderivatives, half-bound states, ODE dense output) is a piecewise
//! polynomial. Each piece is expanded about its own center, which keeps the
//! high-degree Taylor pieces produced by the ODE integrator well conditioned.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Degree cap for user-facing profiles and their antiderivatives.
pub const MAX_DEGREE: usize = 16;

/// Breakpoints closer than this are merged when grids are combined.
const BREAK_TOL: f64 = 1e-14;

/// Compensated (Kahan) summation of complex terms.
pub fn compensated_sum<I: IntoIterator<Item = Complex64>>(terms: I) -> Complex64 {
    let (mut sre, mut cre) = (0.0_f64, 0.0_f64);
    let (mut sim, mut cim) = (0.0_f64, 0.0_f64);
    for t in terms {
        let y = t.re - cre;
        let s = sre + y;
        cre = (s - sre) - y;
        sre = s;
        let y = t.im - cim;
        let s = sim + y;
        cim = (s - sim) - y;
        sim = s;
    }
    Complex64::new(sre, sim)
}

/// A polynomial `sum_n coeffs[n] (x - center)^n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Poly {
    pub center: f64,
    pub coeffs: Vec<Complex64>,
}

impl Poly {
    pub fn new(center: f64, coeffs: Vec<Complex64>) -> Self {
        Self { center, coeffs }
    }

    pub fn zero(center: f64) -> Self {
        Self { center, coeffs: Vec::new() }
    }

    pub fn constant(center: f64, c: Complex64) -> Self {
        Self { center, coeffs: vec![c] }
    }

    /// Index of the highest nonzero coefficient (0 for the zero polynomial).
    pub fn degree(&self) -> usize {
        self.coeffs
            .iter()
            .rposition(|c| *c != Complex64::new(0.0, 0.0))
            .unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.re == 0.0 && c.im == 0.0)
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        let y = x - self.center;
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, c| acc * y + c)
    }

    /// Value and first derivative.
    pub fn eval_with_derivative(&self, x: f64) -> (Complex64, Complex64) {
        let y = x - self.center;
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            dp = dp * y + p;
            p = p * y + c;
        }
        (p, dp)
    }

    pub fn derivative(&self) -> Poly {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(n, c)| c * n as f64)
            .collect();
        Poly::new(self.center, coeffs)
    }

    /// Antiderivative vanishing at the center.
    pub fn antiderivative(&self) -> Poly {
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(Complex64::new(0.0, 0.0));
        coeffs.extend(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(n, c)| c / (n + 1) as f64),
        );
        Poly::new(self.center, coeffs)
    }

    /// Same polynomial expanded about `center`.
    pub fn recentered(&self, center: f64) -> Poly {
        let d = center - self.center;
        let mut a = self.coeffs.clone();
        if d != 0.0 {
            let n = a.len();
            for i in 0..n {
                for j in (i..n.saturating_sub(1)).rev() {
                    let next = a[j + 1];
                    a[j] += next * d;
                }
            }
        }
        Poly::new(center, a)
    }

    pub fn scale(&self, s: Complex64) -> Poly {
        Poly::new(self.center, self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn conj(&self) -> Poly {
        Poly::new(self.center, self.coeffs.iter().map(|c| c.conj()).collect())
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let other = other.recentered(self.center);
        let n = self.coeffs.len().max(other.coeffs.len());
        let zero = Complex64::new(0.0, 0.0);
        let coeffs = (0..n)
            .map(|i| {
                self.coeffs.get(i).copied().unwrap_or(zero) + other.coeffs.get(i).copied().unwrap_or(zero)
            })
            .collect();
        Poly::new(self.center, coeffs)
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return Poly::zero(self.center);
        }
        let other = other.recentered(self.center);
        let mut coeffs = vec![Complex64::new(0.0, 0.0); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        Poly::new(self.center, coeffs)
    }

    /// `x -> p(x / s)` for `s > 0`.
    pub fn dilated(&self, s: f64) -> Poly {
        let mut f = 1.0;
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| {
                let v = c * f;
                f /= s;
                v
            })
            .collect();
        Poly::new(self.center * s, coeffs)
    }

    /// Exact integral over `[a, b]`.
    pub fn integral(&self, a: f64, b: f64) -> Complex64 {
        let (ya, yb) = (a - self.center, b - self.center);
        let terms = self.coeffs.iter().enumerate().map(|(n, c)| {
            let k = (n + 1) as i32;
            c * ((yb.powi(k) - ya.powi(k)) / k as f64)
        });
        compensated_sum(terms)
    }
}

/// A piecewise polynomial on a contiguous grid, identically zero outside
/// `[breaks[0], breaks[last]]`. The empty grid is the zero function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewisePoly {
    breaks: Vec<f64>,
    pieces: Vec<Poly>,
}

impl Default for PiecewisePoly {
    fn default() -> Self {
        Self::zero()
    }
}

fn merge_grids(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut all: Vec<f64> = a.iter().chain(b.iter()).copied().collect();
    all.sort_by(|x, y| x.partial_cmp(y).expect("finite breakpoints"));
    let mut out: Vec<f64> = Vec::with_capacity(all.len());
    for x in all {
        match out.last() {
            Some(&last) if (x - last).abs() <= BREAK_TOL * (1.0 + last.abs()) => {}
            _ => out.push(x),
        }
    }
    out
}

impl PiecewisePoly {
    pub fn new(breaks: Vec<f64>, pieces: Vec<Poly>) -> Result<Self> {
        if breaks.is_empty() && pieces.is_empty() {
            return Ok(Self::zero());
        }
        if breaks.len() != pieces.len() + 1 {
            return Err(Error::InvalidProfile(format!(
                "{} breakpoints for {} pieces",
                breaks.len(),
                pieces.len()
            )));
        }
        if breaks.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidProfile("non-finite breakpoint".into()));
        }
        if breaks.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidProfile("breakpoints must be strictly increasing".into()));
        }
        if pieces.iter().any(|p| p.coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite())) {
            return Err(Error::InvalidProfile("non-finite coefficient".into()));
        }
        Ok(Self { breaks, pieces })
    }

    pub(crate) fn from_parts(breaks: Vec<f64>, pieces: Vec<Poly>) -> Self {
        debug_assert!(breaks.len() == pieces.len() + 1 || (breaks.is_empty() && pieces.is_empty()));
        Self { breaks, pieces }
    }

    pub fn zero() -> Self {
        Self { breaks: Vec::new(), pieces: Vec::new() }
    }

    /// A single polynomial (global monomial coefficients) on `[lo, hi]`.
    pub fn on_interval(lo: f64, hi: f64, global_coeffs: &[Complex64]) -> Result<Self> {
        let p = Poly::new(0.0, global_coeffs.to_vec()).recentered(0.5 * (lo + hi));
        Self::new(vec![lo, hi], vec![p])
    }

    pub fn constant_on(lo: f64, hi: f64, c: Complex64) -> Self {
        Self::from_parts(vec![lo, hi], vec![Poly::constant(0.5 * (lo + hi), c)])
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn pieces(&self) -> &[Poly] {
        &self.pieces
    }

    pub fn intervals(&self) -> impl Iterator<Item = (f64, f64, &Poly)> + '_ {
        self.pieces
            .iter()
            .enumerate()
            .map(move |(i, p)| (self.breaks[i], self.breaks[i + 1], p))
    }

    pub fn support(&self) -> Option<(f64, f64)> {
        match (self.breaks.first(), self.breaks.last()) {
            (Some(&a), Some(&b)) => Some((a, b)),
            _ => None,
        }
    }

    pub fn max_degree(&self) -> usize {
        self.pieces.iter().map(Poly::degree).max().unwrap_or(0)
    }

    pub fn max_imag_coeff(&self) -> f64 {
        self.pieces
            .iter()
            .flat_map(|p| p.coeffs.iter())
            .map(|c| c.im.abs())
            .fold(0.0, f64::max)
    }

    fn piece_index(&self, x: f64) -> Option<usize> {
        let (a, b) = self.support()?;
        if x < a || x > b {
            return None;
        }
        let i = self.breaks.partition_point(|&t| t <= x);
        Some(i.saturating_sub(1).min(self.pieces.len() - 1))
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        self.piece_index(x)
            .map(|i| self.pieces[i].eval(x))
            .unwrap_or_default()
    }

    pub fn eval_with_derivative(&self, x: f64) -> (Complex64, Complex64) {
        self.piece_index(x)
            .map(|i| self.pieces[i].eval_with_derivative(x))
            .unwrap_or_default()
    }

    /// Value at `x` approached from the left.
    pub fn eval_left(&self, x: f64) -> (Complex64, Complex64) {
        let Some((a, b)) = self.support() else {
            return Default::default();
        };
        if x <= a || x > b {
            return Default::default();
        }
        let i = self.breaks.partition_point(|&t| t < x).saturating_sub(1);
        self.pieces[i.min(self.pieces.len() - 1)].eval_with_derivative(x)
    }

    /// Same function on `grid`, which must contain the current support.
    /// Pieces outside the current support are zero.
    pub fn refined(&self, grid: &[f64]) -> PiecewisePoly {
        let pieces = grid
            .windows(2)
            .map(|w| {
                let mid = 0.5 * (w[0] + w[1]);
                match self.piece_index(mid) {
                    Some(i) => self.pieces[i].recentered(mid),
                    None => Poly::zero(mid),
                }
            })
            .collect();
        PiecewisePoly::from_parts(grid.to_vec(), pieces)
    }

    fn binary(&self, other: &PiecewisePoly, op: impl Fn(&Poly, &Poly) -> Poly) -> PiecewisePoly {
        let grid = merge_grids(&self.breaks, &other.breaks);
        if grid.len() < 2 {
            return PiecewisePoly::zero();
        }
        let a = self.refined(&grid);
        let b = other.refined(&grid);
        let pieces = a.pieces.iter().zip(&b.pieces).map(|(p, q)| op(p, q)).collect();
        PiecewisePoly::from_parts(grid, pieces)
    }

    pub fn add(&self, other: &PiecewisePoly) -> PiecewisePoly {
        self.binary(other, Poly::add)
    }

    pub fn sub(&self, other: &PiecewisePoly) -> PiecewisePoly {
        self.binary(other, |p, q| p.add(&q.scale(Complex64::new(-1.0, 0.0))))
    }

    pub fn mul(&self, other: &PiecewisePoly) -> PiecewisePoly {
        if self.pieces.is_empty() || other.pieces.is_empty() {
            return PiecewisePoly::zero();
        }
        self.binary(other, Poly::mul)
    }

    pub fn scale(&self, s: Complex64) -> PiecewisePoly {
        PiecewisePoly::from_parts(self.breaks.clone(), self.pieces.iter().map(|p| p.scale(s)).collect())
    }

    pub fn scale_re(&self, s: f64) -> PiecewisePoly {
        self.scale(Complex64::new(s, 0.0))
    }

    pub fn conj(&self) -> PiecewisePoly {
        PiecewisePoly::from_parts(self.breaks.clone(), self.pieces.iter().map(Poly::conj).collect())
    }

    /// `sum_i w_i p_i`.
    pub fn linear_combination(terms: &[(Complex64, &PiecewisePoly)]) -> PiecewisePoly {
        terms
            .iter()
            .fold(PiecewisePoly::zero(), |acc, (w, p)| acc.add(&p.scale(*w)))
    }

    pub fn derivative(&self) -> PiecewisePoly {
        PiecewisePoly::from_parts(self.breaks.clone(), self.pieces.iter().map(Poly::derivative).collect())
    }

    /// `x -> integral from breaks[0] to x`, continuous, on the same grid.
    /// Beyond the last breakpoint the true antiderivative is the constant total,
    /// which callers handle (see [`TailedProfile`]).
    pub fn antiderivative(&self) -> PiecewisePoly {
        let mut acc = Complex64::new(0.0, 0.0);
        let mut pieces = Vec::with_capacity(self.pieces.len());
        for (lo, hi, p) in self.intervals() {
            let mut anti = p.antiderivative();
            let shift = acc - anti.eval(lo);
            if anti.coeffs.is_empty() {
                anti.coeffs.push(shift);
            } else {
                anti.coeffs[0] += shift;
            }
            acc += p.integral(lo, hi);
            pieces.push(anti);
        }
        PiecewisePoly::from_parts(self.breaks.clone(), pieces)
    }

    /// `x -> p(x / s)` for `s > 0`.
    pub fn dilated(&self, s: f64) -> PiecewisePoly {
        PiecewisePoly::from_parts(
            self.breaks.iter().map(|b| b * s).collect(),
            self.pieces.iter().map(|p| p.dilated(s)).collect(),
        )
    }

    /// Restriction to `[a, b]` (zero elsewhere).
    pub fn restricted(&self, a: f64, b: f64) -> PiecewisePoly {
        let Some((lo, hi)) = self.support() else {
            return PiecewisePoly::zero();
        };
        let (a, b) = (a.max(lo), b.min(hi));
        if b <= a {
            return PiecewisePoly::zero();
        }
        let mut grid = vec![a];
        grid.extend(self.breaks.iter().copied().filter(|&t| t > a && t < b));
        grid.push(b);
        let grid = merge_grids(&grid, &[]);
        self.refined(&grid)
    }

    /// Same function on a grid covering at least `[a, b]` (zero padding).
    pub fn extended(&self, a: f64, b: f64) -> PiecewisePoly {
        let grid = match self.support() {
            Some(_) => merge_grids(&self.breaks, &[a, b]),
            None => vec![a, b],
        };
        self.refined(&grid)
    }

    /// Joins functions on adjacent grids, left to right. Empty parts are skipped.
    pub fn concat(parts: &[&PiecewisePoly]) -> Result<PiecewisePoly> {
        let mut breaks: Vec<f64> = Vec::new();
        let mut pieces = Vec::new();
        for p in parts.iter().filter(|p| !p.pieces.is_empty()) {
            match breaks.last() {
                Some(&last) if (p.breaks[0] - last).abs() > BREAK_TOL * (1.0 + last.abs()) => {
                    return Err(Error::InvalidProfile(format!("gap between {last} and {}", p.breaks[0])));
                }
                Some(_) => breaks.extend_from_slice(&p.breaks[1..]),
                None => breaks.extend_from_slice(&p.breaks),
            }
            pieces.extend(p.pieces.iter().cloned());
        }
        PiecewisePoly::new(breaks, pieces)
    }

    /// Split every piece so that no piece is longer than `max_len`.
    pub fn subdivided(&self, max_len: f64) -> PiecewisePoly {
        let mut grid = Vec::new();
        for w in self.breaks.windows(2) {
            let n = ((w[1] - w[0]) / max_len).ceil().max(1.0) as usize;
            for j in 0..n {
                grid.push(w[0] + (w[1] - w[0]) * j as f64 / n as f64);
            }
        }
        if let Some(&last) = self.breaks.last() {
            grid.push(last);
        }
        self.refined(&grid)
    }

    pub fn integral(&self) -> Complex64 {
        compensated_sum(self.intervals().map(|(a, b, p)| p.integral(a, b)))
    }

    pub fn integral_over(&self, a: f64, b: f64) -> Complex64 {
        self.restricted(a, b).integral()
    }

    /// `int conj(self) * other`.
    pub fn inner(&self, other: &PiecewisePoly) -> Complex64 {
        self.conj().mul(other).integral()
    }

    pub fn norm_sq(&self) -> f64 {
        self.inner(self).re.max(0.0)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// `int |self|` approximated on a dense sample (used only for scales).
    pub fn l1_norm_estimate(&self) -> f64 {
        self.intervals()
            .map(|(a, b, p)| {
                let n = 64;
                let h = (b - a) / n as f64;
                (0..n).map(|j| p.eval(a + (j as f64 + 0.5) * h).norm()).sum::<f64>() * h
            })
            .sum()
    }

    /// `max |self|` over a dense sample including the breakpoints.
    pub fn max_abs_estimate(&self) -> f64 {
        self.intervals()
            .map(|(a, b, p)| {
                let n = 64;
                (0..=n)
                    .map(|j| p.eval(a + (b - a) * j as f64 / n as f64).norm())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }
}

/// A validated profile: support inside `[-1, 1]`, degree at most [`MAX_DEGREE`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PiecewisePoly", into = "PiecewisePoly")]
pub struct Profile(PiecewisePoly);

impl TryFrom<PiecewisePoly> for Profile {
    type Error = Error;
    fn try_from(p: PiecewisePoly) -> Result<Self> {
        Profile::new(p)
    }
}

impl From<Profile> for PiecewisePoly {
    fn from(p: Profile) -> Self {
        p.0
    }
}

const SUPPORT_SLACK: f64 = 1e-12;

impl Profile {
    pub fn new(p: PiecewisePoly) -> Result<Self> {
        let Some((a, b)) = p.support() else {
            return Err(Error::InvalidProfile("profile needs at least one interval".into()));
        };
        if a < -1.0 - SUPPORT_SLACK || b > 1.0 + SUPPORT_SLACK {
            return Err(Error::InvalidProfile(format!(
                "support [{a}, {b}] is not contained in [-1, 1]"
            )));
        }
        let degree = p.max_degree();
        if degree > MAX_DEGREE {
            return Err(Error::DegreeOverflow { degree, cap: MAX_DEGREE });
        }
        Ok(Self(p))
    }

    /// Pieces given as `(lo, hi, global monomial coefficients)`.
    pub fn from_pieces(pieces: &[(f64, f64, Vec<Complex64>)]) -> Result<Self> {
        let mut breaks = Vec::with_capacity(pieces.len() + 1);
        let mut polys = Vec::with_capacity(pieces.len());
        for (i, (lo, hi, coeffs)) in pieces.iter().enumerate() {
            match breaks.last() {
                None => breaks.push(*lo),
                Some(&prev) if (prev - lo).abs() <= BREAK_TOL => {}
                Some(&prev) if *lo > prev => {
                    // gap between pieces is filled with zero
                    polys.push(Poly::zero(0.5 * (prev + lo)));
                    breaks.push(*lo);
                }
                Some(_) => {
                    return Err(Error::InvalidProfile(format!("piece {i} overlaps its predecessor")));
                }
            }
            breaks.push(*hi);
            polys.push(Poly::new(0.0, coeffs.clone()).recentered(0.5 * (lo + hi)));
        }
        Self::new(PiecewisePoly::new(breaks, polys)?)
    }

    /// Global polynomial `sum c_n x^n` on `[-1, 1]`.
    pub fn poly(coeffs: &[Complex64]) -> Result<Self> {
        Self::new(PiecewisePoly::on_interval(-1.0, 1.0, coeffs)?)
    }

    pub fn poly_re(coeffs: &[f64]) -> Result<Self> {
        let c: Vec<Complex64> = coeffs.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::poly(&c)
    }

    pub fn constant(c: Complex64) -> Self {
        Self(PiecewisePoly::constant_on(-1.0, 1.0, c))
    }

    /// `(sqrt(15)/4)(1 - x^2)`, unit L2 norm.
    pub fn bump_even() -> Self {
        let a = 15f64.sqrt() / 4.0;
        Self::poly_re(&[a, 0.0, -a]).expect("valid builtin")
    }

    /// `(sqrt(105)/4) x (1 - x^2)`, unit L2 norm, orthogonal to the even bump.
    pub fn bump_odd() -> Self {
        let a = 105f64.sqrt() / 4.0;
        Self::poly_re(&[0.0, a, 0.0, -a]).expect("valid builtin")
    }

    pub fn as_poly(&self) -> &PiecewisePoly {
        &self.0
    }

    pub fn into_poly(self) -> PiecewisePoly {
        self.0
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        self.0.eval(x)
    }

    pub fn degree(&self) -> usize {
        self.0.max_degree()
    }

    pub fn is_real(&self) -> bool {
        self.0.max_imag_coeff() == 0.0
    }

    pub fn scale(&self, s: Complex64) -> Profile {
        Profile(self.0.scale(s))
    }

    pub fn add(&self, other: &Profile) -> Profile {
        Profile(self.0.add(&other.0))
    }

    pub fn derivative(&self) -> Profile {
        Profile(self.0.derivative())
    }
}

/// A function that is `left` for `x < -1`, a piecewise polynomial on
/// `[-1, 1]` and `tail_const + tail_slope (x - 1)` for `x > 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailedProfile {
    pub left: Complex64,
    pub core: PiecewisePoly,
    pub tail_const: Complex64,
    pub tail_slope: Complex64,
}

impl TailedProfile {
    pub fn constant(c: Complex64) -> Self {
        Self {
            left: c,
            core: PiecewisePoly::constant_on(-1.0, 1.0, c),
            tail_const: c,
            tail_slope: Complex64::new(0.0, 0.0),
        }
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        if x < -1.0 {
            self.left
        } else if x > 1.0 {
            self.tail_const + self.tail_slope * (x - 1.0)
        } else {
            self.core.eval(x)
        }
    }

    /// `sum_i w_i t_i + c`.
    pub fn combine(terms: &[(Complex64, &TailedProfile)], c: Complex64) -> TailedProfile {
        let mut out = TailedProfile::constant(c);
        for (w, t) in terms {
            out.left += w * t.left;
            out.core = out.core.add(&t.core.scale(*w));
            out.tail_const += w * t.tail_const;
            out.tail_slope += w * t.tail_slope;
        }
        out
    }

    pub fn scale(&self, s: Complex64) -> TailedProfile {
        TailedProfile::combine(&[(s, self)], Complex64::new(0.0, 0.0))
    }

    /// `sup |u|` over `[-1, 1]` (sampled).
    pub fn max_abs_on_interval(&self) -> f64 {
        self.core.max_abs_estimate()
    }
}

/// Anything that can be restricted to `[-1, 1]` for `L2(I)` products.
pub trait OnInterval {
    fn on_interval(&self) -> PiecewisePoly;
}

impl OnInterval for Profile {
    fn on_interval(&self) -> PiecewisePoly {
        self.0.clone()
    }
}

impl OnInterval for TailedProfile {
    fn on_interval(&self) -> PiecewisePoly {
        self.core.clone()
    }
}

impl OnInterval for PiecewisePoly {
    fn on_interval(&self) -> PiecewisePoly {
        self.restricted(-1.0, 1.0)
    }
}

/// `int x^order p(x) dx` for `order` in {0, 1}.
pub fn moment(p: &Profile, order: u32) -> Result<Complex64> {
    match order {
        0 => Ok(p.0.integral()),
        1 => {
            let terms = p.0.intervals().map(|(a, b, piece)| {
                let x = Poly::new(piece.center, vec![Complex64::new(piece.center, 0.0), Complex64::new(1.0, 0.0)]);
                piece.mul(&x).integral(a, b)
            });
            Ok(compensated_sum(terms))
        }
        other => Err(Error::InvalidOrder(other)),
    }
}

/// First (`order = 1`) or second (`order = 2`) antiderivative from minus
/// infinity, with the degree cap enforced on the result.
pub fn antiderivative(p: &Profile, order: u32) -> Result<TailedProfile> {
    if !(1..=2).contains(&order) {
        return Err(Error::InvalidOrder(order));
    }
    let degree = p.degree() + order as usize;
    if degree > MAX_DEGREE {
        return Err(Error::DegreeOverflow { degree, cap: MAX_DEGREE });
    }
    Ok(antiderivative_unchecked(p.as_poly(), order))
}

/// Antiderivative of any piecewise polynomial supported in `[-1, 1]`.
pub(crate) fn antiderivative_unchecked(p: &PiecewisePoly, order: u32) -> TailedProfile {
    let core = p.restricted(-1.0, 1.0).extended(-1.0, 1.0);
    let first = core.antiderivative();
    let total = core.integral();
    match order {
        1 => TailedProfile {
            left: Complex64::new(0.0, 0.0),
            tail_const: first.eval(1.0),
            core: first,
            tail_slope: total,
        }
        .with_slope(Complex64::new(0.0, 0.0)),
        _ => {
            let second = first.antiderivative();
            TailedProfile {
                left: Complex64::new(0.0, 0.0),
                tail_const: second.eval(1.0),
                core: second,
                tail_slope: total,
            }
        }
    }
}

impl TailedProfile {
    fn with_slope(mut self, s: Complex64) -> Self {
        self.tail_slope = s;
        self
    }
}

/// `int_{-1}^{1} conj(u) v dx`.
pub fn inner<U: OnInterval + ?Sized, V: OnInterval + ?Sized>(u: &U, v: &V) -> Complex64 {
    u.on_interval().inner(&v.on_interval())
}

pub fn l2norm<U: OnInterval + ?Sized>(u: &U) -> f64 {
    let p = u.on_interval();
    p.norm()
}
