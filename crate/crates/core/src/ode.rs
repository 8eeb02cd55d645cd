//! Taylor-series integration of `y'' = c(x) y + s(x)` with piecewise
//! polynomial `c`, `s`. Each step carries its own Taylor polynomial, which
//! doubles as dense output.

use num_complex::Complex64;

use crate::profiles::{PiecewisePoly, Poly};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Upper bound on Taylor terms per step.
pub const MAX_TERMS: usize = 80;
const TERM_TOL: f64 = 1e-18;

/// Step-size policy shared by every integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepPolicy {
    pub max_step: f64,
}

impl Default for StepPolicy {
    fn default() -> Self {
        Self { max_step: 0.25 }
    }
}

impl StepPolicy {
    pub fn halved(self) -> Self {
        Self { max_step: 0.5 * self.max_step }
    }

    /// Step bound on `[a, b]` for coefficient `c`: `h^2 max|c| <= 1`.
    fn step_for(&self, c: &PiecewisePoly, a: f64, b: f64) -> f64 {
        let cmax = c.restricted(a.min(b), a.max(b)).max_abs_estimate();
        let h = if cmax > 1.0 { 1.0 / cmax.sqrt() } else { 1.0 };
        h.min(self.max_step)
    }
}

/// Dense solution on `[lo, hi]` with its derivative.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub y: PiecewisePoly,
    /// Largest step used.
    pub step: f64,
}

impl Trajectory {
    pub fn eval(&self, x: f64) -> (Complex64, Complex64) {
        let (lo, hi) = self.y.support().expect("nonempty trajectory");
        let x = x.clamp(lo, hi);
        if x == hi {
            self.y.eval_left(x)
        } else {
            self.y.eval_with_derivative(x)
        }
    }

    pub fn start(&self) -> f64 {
        self.y.breaks()[0]
    }

    pub fn end(&self) -> f64 {
        *self.y.breaks().last().unwrap()
    }
}

/// Local polynomial of `p` on the piece containing `mid`, centered at `x0`.
fn local(p: &PiecewisePoly, mid: f64, x0: f64) -> Vec<Complex64> {
    let (a, b) = match p.support() {
        Some(s) => s,
        None => return vec![],
    };
    if mid < a || mid > b {
        return vec![];
    }
    let idx = p.breaks().partition_point(|&t| t <= mid).saturating_sub(1).min(p.pieces().len() - 1);
    let mut coeffs = p.pieces()[idx].recentered(x0).coeffs;
    while coeffs.last() == Some(&ZERO) {
        coeffs.pop();
    }
    coeffs
}

/// One Taylor step from `x0` by `h` (either sign). Returns the series
/// coefficients in powers of `x - x0`.
fn taylor_step(c: &[Complex64], s: &[Complex64], y0: Complex64, dy0: Complex64, h: f64) -> Vec<Complex64> {
    let mut y = Vec::with_capacity(MAX_TERMS);
    y.push(y0);
    y.push(dy0);
    let ah = h.abs();
    let mut scale = y0.norm().max(dy0.norm() * ah);
    let mut small_run = 0;
    let min_terms = s.len() + 2;
    for n in 0..MAX_TERMS - 2 {
        let mut acc = s.get(n).copied().unwrap_or(ZERO);
        for (j, cj) in c.iter().enumerate().take(n + 1) {
            acc += cj * y[n - j];
        }
        let next = acc / ((n + 2) * (n + 1)) as f64;
        y.push(next);
        let size = next.norm() * ah.powi(n as i32 + 2);
        scale = scale.max(size);
        if y.len() > min_terms && size <= TERM_TOL * scale.max(f64::MIN_POSITIVE) {
            small_run += 1;
            if small_run >= 2 {
                break;
            }
        } else {
            small_run = 0;
        }
    }
    while y.len() > 2 && y.last() == Some(&ZERO) {
        y.pop();
    }
    y
}

fn step_grid(c: &PiecewisePoly, s: &PiecewisePoly, a: f64, b: f64, policy: &StepPolicy) -> Vec<f64> {
    let (lo, hi) = (a.min(b), a.max(b));
    let mut cuts: Vec<f64> = c
        .breaks()
        .iter()
        .chain(s.breaks())
        .copied()
        .filter(|&t| t > lo && t < hi)
        .collect();
    cuts.push(lo);
    cuts.push(hi);
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    cuts.dedup_by(|x, y| (*x - *y).abs() <= 1e-14 * (1.0 + y.abs()));
    let mut grid = vec![cuts[0]];
    for w in cuts.windows(2) {
        let h = policy.step_for(c, w[0], w[1]);
        let n = ((w[1] - w[0]) / h).ceil().max(1.0) as usize;
        for j in 1..n {
            grid.push(w[0] + (w[1] - w[0]) * j as f64 / n as f64);
        }
        grid.push(w[1]);
    }
    if a > b {
        grid.reverse();
    }
    grid
}

/// Integrates `y'' = c y + s` from `a` to `b` (either direction) with
/// `y(a) = y0`, `y'(a) = dy0`.
pub fn integrate(
    c: &PiecewisePoly,
    s: &PiecewisePoly,
    a: f64,
    b: f64,
    y0: Complex64,
    dy0: Complex64,
    policy: &StepPolicy,
) -> Trajectory {
    let grid = step_grid(c, s, a, b, policy);
    let mut pieces = Vec::with_capacity(grid.len() - 1);
    let (mut y, mut dy) = (y0, dy0);
    let mut step: f64 = 0.0;
    for w in grid.windows(2) {
        let (x0, x1) = (w[0], w[1]);
        let h = x1 - x0;
        step = step.max(h.abs());
        let mid = 0.5 * (x0 + x1);
        let series = taylor_step(&local(c, mid, x0), &local(s, mid, x0), y, dy, h);
        let poly = Poly::new(x0, series);
        let (ny, ndy) = poly.eval_with_derivative(x1);
        y = ny;
        dy = ndy;
        pieces.push(poly);
    }
    let mut breaks = grid;
    if a > b {
        breaks.reverse();
        pieces.reverse();
    }
    let y = PiecewisePoly::new(breaks, pieces).expect("monotone step grid");
    Trajectory { y, step }
}

/// Value and derivative at the far end of an integration.
pub fn endpoint(t: &Trajectory, backward: bool) -> (Complex64, Complex64) {
    if backward {
        t.eval(t.start())
    } else {
        t.eval(t.end())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn harmonic_oscillator() {
        let k = 3.0;
        let coeff = PiecewisePoly::constant_on(-1.0, 1.0, c(-k * k, 0.0));
        let t = integrate(&coeff, &PiecewisePoly::zero(), -1.0, 1.0, c(1.0, 0.0), c(0.0, 0.0), &StepPolicy::default());
        for &x in &[-0.3, 0.2, 1.0] {
            let (y, dy) = t.eval(x);
            let s: f64 = k * (x + 1.0);
            assert!((y - c(s.cos(), 0.0)).norm() < 1e-13, "{x}");
            assert!((dy - c(-k * s.sin(), 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn backward_growth_with_complex_coefficient() {
        // y'' = -zeta y, y = e^{i k x} with k = sqrt(zeta)
        let zeta = c(0.0, 1.0);
        let k = zeta.sqrt();
        let coeff = PiecewisePoly::constant_on(0.0, 30.0, -zeta);
        let y0 = (k * c(0.0, 30.0)).exp();
        let t = integrate(&coeff, &PiecewisePoly::zero(), 30.0, 0.0, y0, c(0.0, 1.0) * k * y0, &StepPolicy::default());
        let (y, _) = t.eval(0.0);
        assert!((y - c(1.0, 0.0)).norm() < 1e-12);
        let (y, _) = t.eval(12.5);
        assert!((y - (k * c(0.0, 12.5)).exp()).norm() < 1e-12);
    }

    #[test]
    fn polynomial_forcing_is_exact() {
        // y'' = x^3 - x from rest: y = x^5/20 - x^3/6 + ...
        let s = PiecewisePoly::on_interval(-1.0, 1.0, &[c(0.0, 0.0), c(-1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        let t = integrate(&PiecewisePoly::zero(), &s, -1.0, 1.0, c(0.0, 0.0), c(0.0, 0.0), &StepPolicy::default());
        let exact = |x: f64| x.powi(5) / 20.0 - x.powi(3) / 6.0;
        let dexact = |x: f64| x.powi(4) / 4.0 - x * x / 2.0;
        for &x in &[-0.5, 0.0, 0.7, 1.0] {
            let expected = exact(x) - exact(-1.0) - dexact(-1.0) * (x + 1.0);
            assert!((t.eval(x).0 - c(expected, 0.0)).norm() < 1e-14);
        }
    }
}
