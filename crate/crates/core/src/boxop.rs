//! Generalized scale-derivative operators.
//!
//! A stencil `γ_{-N..N}` with step `ε` acts on a function `f` of time through
//!
//! ```text
//! (Box f)(t) = (1/ε) Σ_ℓ γ_ℓ χ(t+ℓε) f(t+ℓε)
//! ```
//!
//! where `χ` is the characteristic function of the time window `[t0, tf]`.
//! The adjoint `Box*` has the reversed coefficient sequence, and `Box*Box` is
//! evaluated through its explicit double sum.

use alloc::vec;
use alloc::vec::Vec;

use crate::math;
use crate::{Error, Result, C64};

/// Relative tolerance used to decide grid membership and window membership.
pub const GRID_TOLERANCE: f64 = 1e-9;

/// Tolerance of the two convergence conditions `Σγ = 0` and `Σℓγ = 1`.
pub const CONVERGENCE_TOLERANCE: f64 = 1e-14;

/// Coefficients `γ_{-N..N}` and step `ε` of a scale-derivative operator.
#[derive(Debug, Clone, PartialEq)]
pub struct Stencil {
    gamma: Vec<C64>,
    eps: f64,
}

impl Stencil {
    /// Builds a stencil from its `2N+1` coefficients, lowest offset first.
    pub fn new(gamma: Vec<C64>, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::InvalidStep(eps));
        }
        if gamma.len().is_multiple_of(2) {
            return Err(Error::InvalidStencil("coefficient count must be odd"));
        }
        if gamma.iter().any(|g| !g.re.is_finite() || !g.im.is_finite()) {
            return Err(Error::InvalidStencil("coefficients must be finite"));
        }
        Ok(Stencil { gamma, eps })
    }

    /// The affine family `Box^[r,s]`: `γ = (-s, s - r, r)`.
    pub fn box_rs(r: C64, s: C64, eps: f64) -> Result<Self> {
        Stencil::new(vec![-s, s - r, r], eps)
    }

    /// `Box^[1,0]`, the forward difference.
    pub fn forward(eps: f64) -> Result<Self> {
        Stencil::box_rs(C64::new(1.0, 0.0), C64::new(0.0, 0.0), eps)
    }

    /// `Box^[0,1]`, the backward difference.
    pub fn backward(eps: f64) -> Result<Self> {
        Stencil::box_rs(C64::new(0.0, 0.0), C64::new(1.0, 0.0), eps)
    }

    /// `Box^[1/2,1/2]`, the central difference.
    pub fn central(eps: f64) -> Result<Self> {
        Stencil::box_rs(C64::new(0.5, 0.0), C64::new(0.5, 0.0), eps)
    }

    /// `Box_q = Box^[(1-i)/2,(1+i)/2]`.
    pub fn quantum(eps: f64) -> Result<Self> {
        Stencil::box_rs(C64::new(0.5, -0.5), C64::new(0.5, 0.5), eps)
    }

    pub fn halfwidth(&self) -> usize {
        (self.gamma.len() - 1) / 2
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// Coefficients, lowest offset first.
    pub fn coefficients(&self) -> &[C64] {
        &self.gamma
    }

    /// Coefficient at offset `l`, zero outside `-N..=N`.
    pub fn coeff(&self, l: isize) -> C64 {
        let n = self.halfwidth() as isize;
        if l < -n || l > n {
            C64::new(0.0, 0.0)
        } else {
            self.gamma[(l + n) as usize]
        }
    }

    /// Same coefficients with another step.
    pub fn with_eps(&self, eps: f64) -> Result<Self> {
        Stencil::new(self.gamma.clone(), eps)
    }

    /// The adjoint operator: coefficients reversed, `γ'_j = γ_{-j}`.
    pub fn adjoint(&self) -> Self {
        let mut gamma = self.gamma.clone();
        gamma.reverse();
        Stencil { gamma, eps: self.eps }
    }

    /// `(Σγ = 0, Σℓγ = 1)`, each within [`CONVERGENCE_TOLERANCE`].
    pub fn convergence_conditions(&self) -> (bool, bool) {
        let n = self.halfwidth() as isize;
        let sum: C64 = self.gamma.iter().sum();
        let moment: C64 = (-n..=n).map(|l| self.coeff(l) * l as f64).sum();
        (
            sum.norm() <= CONVERGENCE_TOLERANCE,
            (moment - 1.0).norm() <= CONVERGENCE_TOLERANCE,
        )
    }

    pub fn is_conforming(&self) -> bool {
        let (a, b) = self.convergence_conditions();
        a && b
    }

    /// Lowest and highest offsets carrying a nonzero coefficient.
    pub fn support(&self) -> Option<(isize, isize)> {
        let n = self.halfwidth() as isize;
        let nonzero = |l: &isize| self.coeff(*l) != C64::new(0.0, 0.0);
        let lo = (-n..=n).find(nonzero)?;
        let hi = (-n..=n).rev().find(nonzero)?;
        Some((lo, hi))
    }

    /// `w_ℓ = Σ_j γ_{ℓ+j} γ_j` for `ℓ = -2N..=2N`; `ε²` times the interior
    /// coefficients of `Box*Box`.
    pub fn autocorrelation(&self) -> Vec<C64> {
        let n = self.halfwidth() as isize;
        (-2 * n..=2 * n)
            .map(|l| (-n..=n).map(|j| self.coeff(l + j) * self.coeff(j)).sum())
            .collect()
    }

    /// `(Box f)(t)` with the window cutoff applied to every stencil node.
    pub fn apply_box<S: Signal + ?Sized>(
        &self,
        f: &S,
        window: &TimeWindow,
        t: f64,
    ) -> Result<Vec<C64>> {
        check_step(f, self.eps)?;
        let n = self.halfwidth() as isize;
        let mut out = vec![C64::new(0.0, 0.0); f.dim()];
        let mut buf = vec![C64::new(0.0, 0.0); f.dim()];
        for l in -n..=n {
            let g = self.coeff(l);
            if g == C64::new(0.0, 0.0) {
                continue;
            }
            let node = t + l as f64 * self.eps;
            if !window.contains(node, self.eps) {
                continue;
            }
            f.eval(node, &mut buf)?;
            for (o, v) in out.iter_mut().zip(&buf) {
                *o += g * v;
            }
        }
        let inv = 1.0 / self.eps;
        out.iter_mut().for_each(|o| *o *= inv);
        Ok(out)
    }

    /// `(Box*Box f)(t)` through the explicit double sum.
    pub fn apply_box_star_box<S: Signal + ?Sized>(
        &self,
        f: &S,
        window: &TimeWindow,
        t: f64,
    ) -> Result<Vec<C64>> {
        double_sum(self, f, window, t, |_| 1.0)
    }

    /// Lazily evaluated `Box f` as a signal in its own right.
    pub fn applied<'a, S: Signal + ?Sized>(
        &'a self,
        f: &'a S,
        window: TimeWindow,
    ) -> Applied<'a, S> {
        Applied {
            op: self,
            inner: f,
            window,
        }
    }

    /// Piecewise-constant profile of `Box*Box 1` over `[t0, tf]`.
    ///
    /// Segments are `[t0+kε, t0+(k+1)ε)` for `k < 2N`, the interior
    /// `[t0+2Nε, tf-2Nε]`, then the mirrored right-hand segments. Each value
    /// is obtained by evaluating the double sum at the segment midpoint.
    pub fn box_star_box_one_profile(&self, window: &TimeWindow) -> Result<Vec<ProfileSegment>> {
        let (lo, hi) = window.interior(self)?;
        let n = self.halfwidth();
        let eps = self.eps;
        let one = ScalarFn(|_| C64::new(1.0, 0.0));
        let mut bounds = Vec::with_capacity(4 * n + 2);
        for k in 0..2 * n {
            bounds.push((window.t0 + k as f64 * eps, window.t0 + (k + 1) as f64 * eps));
        }
        bounds.push((lo, hi));
        for k in (0..2 * n).rev() {
            bounds.push((window.tf - (k + 1) as f64 * eps, window.tf - k as f64 * eps));
        }
        bounds
            .into_iter()
            .map(|(start, end)| {
                let value = self.apply_box_star_box(&one, window, 0.5 * (start + end))?[0];
                Ok(ProfileSegment { start, end, value })
            })
            .collect()
    }
}

/// One piece of the `Box*Box 1` profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileSegment {
    pub start: f64,
    pub end: f64,
    pub value: C64,
}

/// The time window `[t0, tf]` carrying the cutoff `χ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeWindow {
    pub t0: f64,
    pub tf: f64,
}

impl TimeWindow {
    pub fn new(t0: f64, tf: f64) -> Result<Self> {
        if !(t0.is_finite() && tf.is_finite() && tf > t0) {
            return Err(Error::InvalidWindow { t0, tf });
        }
        Ok(TimeWindow { t0, tf })
    }

    /// `χ(t)`, with a tolerance of `GRID_TOLERANCE·eps` at both ends.
    pub fn contains(&self, t: f64, eps: f64) -> bool {
        let tol = GRID_TOLERANCE * eps;
        t >= self.t0 - tol && t <= self.tf + tol
    }

    /// `[t0+2Nε, tf-2Nε]`, where every cutoff factor equals one.
    pub fn interior(&self, op: &Stencil) -> Result<(f64, f64)> {
        let margin = 2.0 * op.halfwidth() as f64 * op.eps();
        let required = 2.0 * margin;
        let length = self.tf - self.t0;
        if length <= required {
            return Err(Error::WindowTooShort { length, required });
        }
        Ok((self.t0 + margin, self.tf - margin))
    }
}

/// A (possibly vector valued) complex function of time.
pub trait Signal {
    fn dim(&self) -> usize;

    /// Writes `f(t)` into `out`, which has length [`Signal::dim`].
    fn eval(&self, t: f64, out: &mut [C64]) -> Result<()>;

    /// Grid step, for signals that only exist on a grid.
    fn step(&self) -> Option<f64> {
        None
    }
}

impl<S: Signal + ?Sized> Signal for &S {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, t: f64, out: &mut [C64]) -> Result<()> {
        (**self).eval(t, out)
    }
    fn step(&self) -> Option<f64> {
        (**self).step()
    }
}

/// A scalar closure `t ↦ f(t)`.
#[derive(Clone, Copy)]
pub struct ScalarFn<F>(pub F);

impl<F: Fn(f64) -> C64> Signal for ScalarFn<F> {
    fn dim(&self) -> usize {
        1
    }
    fn eval(&self, t: f64, out: &mut [C64]) -> Result<()> {
        out[0] = (self.0)(t);
        Ok(())
    }
}

/// A vector closure writing `f(t)` into a buffer of length `dim`.
#[derive(Clone, Copy)]
pub struct VectorFn<F> {
    pub dim: usize,
    pub f: F,
}

impl<F: Fn(f64, &mut [C64])> Signal for VectorFn<F> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, t: f64, out: &mut [C64]) -> Result<()> {
        (self.f)(t, out);
        Ok(())
    }
}

/// Values of a `d`-vector function on the grid `origin + kε`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledPath {
    origin: f64,
    eps: f64,
    dim: usize,
    values: Vec<C64>,
}

impl SampledPath {
    /// `values` holds `len·dim` numbers, node-major.
    pub fn new(origin: f64, eps: f64, dim: usize, values: Vec<C64>) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::InvalidStep(eps));
        }
        if dim == 0 || !values.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: values.len(),
            });
        }
        if !origin.is_finite() || values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::InvalidParameter("sampled values must be finite"));
        }
        Ok(SampledPath {
            origin,
            eps,
            dim,
            values,
        })
    }

    pub fn from_scalars(origin: f64, eps: f64, values: Vec<C64>) -> Result<Self> {
        SampledPath::new(origin, eps, 1, values)
    }

    /// Samples `f` at `origin + kε` for `k < len`.
    pub fn sample<S: Signal + ?Sized>(origin: f64, eps: f64, len: usize, f: &S) -> Result<Self> {
        let dim = f.dim();
        let mut values = vec![C64::new(0.0, 0.0); len * dim];
        for (k, chunk) in values.chunks_mut(dim).enumerate() {
            f.eval(origin + k as f64 * eps, chunk)?;
        }
        SampledPath::new(origin, eps, dim, values)
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn node(&self, k: usize) -> f64 {
        self.origin + k as f64 * self.eps
    }

    pub fn get(&self, k: usize) -> &[C64] {
        &self.values[k * self.dim..(k + 1) * self.dim]
    }

    /// Index of the grid node at `t`.
    pub fn index_of(&self, t: f64) -> Result<usize> {
        let x = (t - self.origin) / self.eps;
        let k = math::round(x);
        if (x - k).abs() > GRID_TOLERANCE {
            return Err(Error::Misaligned { t });
        }
        if k < 0.0 || k >= self.len() as f64 {
            return Err(Error::OutOfRange { t });
        }
        Ok(k as usize)
    }

    /// Largest modulus over all samples.
    pub fn max_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

impl Signal for SampledPath {
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, t: f64, out: &mut [C64]) -> Result<()> {
        let k = self.index_of(t)?;
        out.copy_from_slice(self.get(k));
        Ok(())
    }
    fn step(&self) -> Option<f64> {
        Some(self.eps)
    }
}

/// `Box f` evaluated on demand; see [`Stencil::applied`].
pub struct Applied<'a, S: ?Sized> {
    op: &'a Stencil,
    inner: &'a S,
    window: TimeWindow,
}

impl<S: Signal + ?Sized> Signal for Applied<'_, S> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn eval(&self, t: f64, out: &mut [C64]) -> Result<()> {
        let v = self.op.apply_box(self.inner, &self.window, t)?;
        out.copy_from_slice(&v);
        Ok(())
    }
    fn step(&self) -> Option<f64> {
        self.inner.step().or(Some(self.op.eps()))
    }
}

pub(crate) fn check_step<S: Signal + ?Sized>(f: &S, eps: f64) -> Result<()> {
    match f.step() {
        Some(h) if (h - eps).abs() > GRID_TOLERANCE * eps => Err(Error::StepMismatch {
            path: h,
            operator: eps,
        }),
        _ => Ok(()),
    }
}

/// `(1/ε²) Σ γ_{ℓ+j} γ_j χ(t-jε) χ(t+ℓε) weight(ℓ) f(t+ℓε)` over
/// `|ℓ| ≤ 2N`, `|j| ≤ N`, `|ℓ+j| ≤ N`.
pub(crate) fn double_sum<S, W>(
    op: &Stencil,
    f: &S,
    window: &TimeWindow,
    t: f64,
    weight: W,
) -> Result<Vec<C64>>
where
    S: Signal + ?Sized,
    W: Fn(isize) -> f64,
{
    check_step(f, op.eps())?;
    let n = op.halfwidth() as isize;
    let eps = op.eps();
    let mut out = vec![C64::new(0.0, 0.0); f.dim()];
    let mut buf = vec![C64::new(0.0, 0.0); f.dim()];
    for l in -2 * n..=2 * n {
        let node = t + l as f64 * eps;
        if !window.contains(node, eps) {
            continue;
        }
        let mut coeff = C64::new(0.0, 0.0);
        for j in (-n).max(-n - l)..=n.min(n - l) {
            if window.contains(t - j as f64 * eps, eps) {
                coeff += op.coeff(l + j) * op.coeff(j);
            }
        }
        let w = weight(l);
        if coeff == C64::new(0.0, 0.0) || w == 0.0 {
            continue;
        }
        coeff *= w;
        f.eval(node, &mut buf)?;
        for (o, v) in out.iter_mut().zip(&buf) {
            *o += coeff * v;
        }
    }
    let inv = 1.0 / (eps * eps);
    out.iter_mut().for_each(|o| *o *= inv);
    Ok(out)
}

/// Measured convergence of `Box f` towards `f'`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceEstimate {
    pub eps: Vec<f64>,
    /// Sup-norm of `Box f - f'` on the probe points, one per step.
    pub errors: Vec<f64>,
    /// Least-squares slope of `log error` against `log ε`; `None` when every
    /// error sits at rounding level and no order can be measured.
    pub slope: Option<f64>,
}

/// Number of probe points in the middle half of the window.
const PROBES: usize = 33;

/// Errors below this fraction of `sup |f'|` count as rounding noise.
const DEGENERATE_ERROR: f64 = 1e-11;

/// Estimates the order of `Box f → f'` over a decreasing sequence of steps.
///
/// The sup-norm is taken over points of the middle half of `window`, which
/// must stay in the interior for the largest step.
pub fn convergence_order_estimate<F, D>(
    op: &Stencil,
    f: F,
    derivative: D,
    window: &TimeWindow,
    eps_list: &[f64],
) -> Result<ConvergenceEstimate>
where
    F: Fn(f64) -> C64,
    D: Fn(f64) -> C64,
{
    if !op.is_conforming() {
        return Err(Error::NonConforming);
    }
    if eps_list.len() < 3 {
        return Err(Error::InvalidParameter("need at least three steps"));
    }
    if eps_list.windows(2).any(|w| !(w[1] < w[0])) || eps_list.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::InvalidParameter("steps must be positive and decreasing"));
    }
    let quarter = 0.25 * (window.tf - window.t0);
    let (lo, hi) = (window.t0 + quarter, window.tf - quarter);
    let signal = ScalarFn(&f);
    let mut errors = Vec::with_capacity(eps_list.len());
    let mut scale = 0.0f64;
    for &eps in eps_list {
        let op = op.with_eps(eps)?;
        let (ilo, ihi) = window.interior(&op)?;
        if ilo > lo || ihi < hi {
            return Err(Error::WindowTooShort {
                length: window.tf - window.t0,
                required: 8.0 * op.halfwidth() as f64 * eps,
            });
        }
        let mut sup = 0.0f64;
        for p in 0..PROBES {
            let t = lo + (hi - lo) * p as f64 / (PROBES - 1) as f64;
            let d = derivative(t);
            scale = scale.max(d.norm());
            let err = (op.apply_box(&signal, window, t)?[0] - d).norm();
            sup = sup.max(err);
        }
        errors.push(sup);
    }
    let degenerate = errors.iter().all(|e| *e <= DEGENERATE_ERROR * scale.max(1.0));
    let slope = if degenerate {
        None
    } else {
        let points: Vec<(f64, f64)> = eps_list.iter().copied().zip(errors.iter().copied()).collect();
        log_log_slope(&points)
    };
    Ok(ConvergenceEstimate {
        eps: eps_list.to_vec(),
        errors,
        slope,
    })
}

/// Least-squares slope of `ln y` against `ln x`; `None` if any value is not
/// positive or fewer than two points are given.
pub fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 || points.iter().any(|(x, y)| !(*x > 0.0 && *y > 0.0)) {
        return None;
    }
    let n = points.len() as f64;
    let (sx, sy) = points
        .iter()
        .fold((0.0, 0.0), |(a, b), (x, y)| (a + math::ln(*x), b + math::ln(*y)));
    let (mx, my) = (sx / n, sy / n);
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, y) in points {
        let dx = math::ln(*x) - mx;
        sxy += dx * (math::ln(*y) - my);
        sxx += dx * dx;
    }
    if sxx == 0.0 {
        None
    } else {
        Some(sxy / sxx)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn window() -> TimeWindow {
        TimeWindow::new(0.0, 3.0).unwrap()
    }

    #[test]
    fn named_stencils() {
        let f = Stencil::forward(0.1).unwrap();
        assert_eq!(f.coefficients(), &[c(0.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0)]);
        let m = Stencil::central(0.1).unwrap();
        assert_eq!(m.coefficients(), &[c(-0.5, 0.0), c(0.0, 0.0), c(0.5, 0.0)]);
        let q = Stencil::quantum(0.1).unwrap();
        assert_eq!(q.coefficients(), &[c(-0.5, -0.5), c(0.0, 1.0), c(0.5, -0.5)]);
    }

    #[test]
    fn rejects_bad_step_and_length() {
        assert_eq!(Stencil::forward(0.0), Err(Error::InvalidStep(0.0)));
        assert!(Stencil::box_rs(c(1.0, 0.0), c(0.0, 0.0), -1.0).is_err());
        assert!(Stencil::new(vec![c(1.0, 0.0), c(-1.0, 0.0)], 0.1).is_err());
    }

    #[test]
    fn convergence_conditions() {
        assert_eq!(Stencil::forward(0.1).unwrap().convergence_conditions(), (true, true));
        let r = c(0.3, 0.7);
        let s = c(1.0, 0.0) - r;
        assert_eq!(Stencil::box_rs(r, s, 0.2).unwrap().convergence_conditions(), (true, true));
        let diag = Stencil::new(vec![c(0.0, 0.0), c(2.0, 0.0), c(0.0, 0.0)], 0.1).unwrap();
        assert_eq!(diag.convergence_conditions(), (false, false));
    }

    #[test]
    fn adjoint_reverses() {
        let f = Stencil::forward(0.1).unwrap();
        assert_eq!(f.adjoint().coefficients(), &[c(1.0, 0.0), c(-1.0, 0.0), c(0.0, 0.0)]);
        let m = Stencil::central(0.1).unwrap();
        let negated: Vec<C64> = m.coefficients().iter().map(|g| -g).collect();
        assert_eq!(m.adjoint().coefficients(), negated.as_slice());
        let q = Stencil::quantum(0.1).unwrap();
        assert_eq!(q.adjoint().coefficients(), &[c(0.5, -0.5), c(0.0, 1.0), c(-0.5, -0.5)]);
        assert_eq!(q.adjoint().adjoint(), q);
    }

    #[test]
    fn box_on_simple_functions() {
        let w = window();
        let m = Stencil::central(0.1).unwrap();
        let lin = ScalarFn(|t: f64| c(t, 0.0));
        assert!((m.apply_box(&lin, &w, 1.3).unwrap()[0] - 1.0).norm() < 1e-13);

        let konst = ScalarFn(|_| c(2.5, -1.0));
        let q = Stencil::quantum(0.1).unwrap();
        assert!(q.apply_box(&konst, &w, 1.3).unwrap()[0].norm() < 1e-13);

        let sq = ScalarFn(|t: f64| c(t * t, 0.0));
        let f = Stencil::forward(0.1).unwrap();
        assert!((f.apply_box(&sq, &w, 1.0).unwrap()[0] - 2.1).norm() < 1e-12);
    }

    #[test]
    fn box_vanishes_outside_extended_window() {
        let w = window();
        let q = Stencil::quantum(0.1).unwrap();
        let f = ScalarFn(|t: f64| c(1.0 + t, t));
        for t in [-0.2, -0.11, 3.11, 4.0] {
            assert_eq!(q.apply_box(&f, &w, t).unwrap()[0], c(0.0, 0.0));
        }
        assert_ne!(q.apply_box(&f, &w, -0.1).unwrap()[0], c(0.0, 0.0));
    }

    #[test]
    fn box_star_box_second_differences() {
        let w = window();
        let eps = 0.1;
        let f = ScalarFn(|t: f64| c(libm::sin(t), 0.5 * t));
        let t = 1.5;
        let val = |s: f64| (f.0)(s);
        let fw = Stencil::forward(eps).unwrap();
        let lhs = -fw.apply_box_star_box(&f, &w, t).unwrap()[0];
        let rhs = (val(t + eps) - val(t) * 2.0 + val(t - eps)) / (eps * eps);
        assert!((lhs - rhs).norm() < 1e-12);

        let m = Stencil::central(eps).unwrap();
        let lhs = -m.apply_box_star_box(&f, &w, t).unwrap()[0];
        let rhs = (val(t + 2.0 * eps) - val(t) * 2.0 + val(t - 2.0 * eps)) / (4.0 * eps * eps);
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn box_star_box_matches_composition_with_cutoff() {
        let w = window();
        let q = Stencil::quantum(0.1).unwrap();
        let f = ScalarFn(|t: f64| c(libm::cos(3.0 * t), t * t));
        let adj = q.adjoint();
        let inner = q.applied(&f, w);
        for k in -3..34 {
            let t = k as f64 * 0.1;
            let direct = q.apply_box_star_box(&f, &w, t).unwrap()[0];
            let composed = adj.apply_box(&inner, &w, t).unwrap()[0];
            assert!((direct - composed).norm() < 1e-10, "t={t}");
        }
    }

    #[test]
    fn interior_value_of_box_star_box_one() {
        let w = window();
        let g = Stencil::new(vec![c(0.2, 0.1), c(-0.7, 0.0), c(1.1, -0.3)], 0.1).unwrap();
        let one = ScalarFn(|_| c(1.0, 0.0));
        let sum: C64 = g.coefficients().iter().sum();
        let v = g.apply_box_star_box(&one, &w, 1.5).unwrap()[0];
        assert!((v - sum * sum / 0.01).norm() < 1e-12);
    }

    #[test]
    fn profile_needs_nonempty_interior() {
        let q = Stencil::quantum(0.1).unwrap();
        let short = TimeWindow::new(0.0, 0.4).unwrap();
        assert!(matches!(
            q.box_star_box_one_profile(&short),
            Err(Error::WindowTooShort { .. })
        ));
        assert_eq!(q.box_star_box_one_profile(&window()).unwrap().len(), 5);
        let wide = Stencil::new(vec![c(0.1, 0.0); 5], 0.1).unwrap();
        assert_eq!(wide.box_star_box_one_profile(&window()).unwrap().len(), 9);
    }

    #[test]
    fn central_profile_is_not_constant() {
        let m = Stencil::central(0.1).unwrap();
        let profile = m.box_star_box_one_profile(&window()).unwrap();
        assert!(profile[2].value.norm() < 1e-12);
        assert!(profile[0].value.norm() < 1e-12);
        assert!((profile[1].value - 25.0).norm() < 1e-10);
        assert!((profile[3].value - 25.0).norm() < 1e-10);
    }

    #[test]
    fn sampled_path_alignment() {
        let p = SampledPath::from_scalars(0.5, 0.1, vec![c(1.0, 0.0); 10]).unwrap();
        assert_eq!(p.index_of(0.8).unwrap(), 3);
        assert!(matches!(p.index_of(0.85), Err(Error::Misaligned { .. })));
        assert!(matches!(p.index_of(0.4), Err(Error::OutOfRange { .. })));
        let op = Stencil::forward(0.2).unwrap();
        assert!(matches!(
            op.apply_box(&p, &TimeWindow::new(0.5, 1.4).unwrap(), 0.9),
            Err(Error::StepMismatch { .. })
        ));
    }

    #[test]
    fn convergence_estimate_rejects_bad_input() {
        let w = TimeWindow::new(0.0, 4.0).unwrap();
        let diag = Stencil::new(vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)], 0.1).unwrap();
        let f = |t: f64| c(libm::sin(t), 0.0);
        let d = |t: f64| c(libm::cos(t), 0.0);
        assert_eq!(
            convergence_order_estimate(&diag, f, d, &w, &[0.1, 0.05, 0.02]),
            Err(Error::NonConforming)
        );
        let m = Stencil::central(0.1).unwrap();
        assert!(convergence_order_estimate(&m, f, d, &w, &[0.1, 0.05]).is_err());
        assert!(convergence_order_estimate(&m, f, d, &w, &[0.1, 0.2, 0.05]).is_err());
    }

    #[test]
    fn convergence_estimate_linear_is_degenerate() {
        let w = TimeWindow::new(0.0, 4.0).unwrap();
        let q = Stencil::quantum(0.1).unwrap();
        let est = convergence_order_estimate(
            &q,
            |t| c(3.0 * t - 1.0, 0.0),
            |_| c(3.0, 0.0),
            &w,
            &[0.1, 0.01, 0.001],
        )
        .unwrap();
        assert!(est.slope.is_none());
        assert!(est.errors.iter().all(|e| *e < 1e-10));
    }

    #[test]
    fn log_log_slope_of_power_law() {
        let pts: Vec<(f64, f64)> = [0.1, 0.01, 0.001].iter().map(|&x| (x, 7.0 * x * x)).collect();
        assert!((log_log_slope(&pts).unwrap() - 2.0).abs() < 1e-12);
        assert!(log_log_slope(&[(0.1, 0.0), (0.01, 1.0)]).is_none());
    }
}
