//! Rotating-frame operators `V_c`, `V_s`, `W_c`, `W_s`.
//!
//! For a pulsation `ω` they satisfy, at every time,
//!
//! ```text
//! Box(f cos ωt)     = V_c(f) cos ωt - V_s(f) sin ωt
//! Box(f sin ωt)     = V_s(f) cos ωt + V_c(f) sin ωt
//! Box*Box(f cos ωt) = W_c(f) cos ωt - W_s(f) sin ωt
//! Box*Box(f sin ωt) = W_s(f) cos ωt + W_c(f) sin ωt
//! ```
//!
//! and `W_c = V_c*V_c + V_s*V_s`, `W_s = V_c*V_s - V_s*V_c`.

use alloc::vec::Vec;

use crate::boxop::{double_sum, Signal, SampledPath, Stencil, TimeWindow};
use crate::math;
use crate::{Error, Result, C64};

/// Relative tolerance on the imaginary part of `Ω²` and on `W_s(1)`.
pub const OMEGA_SQ_IMAG_TOLERANCE: f64 = 1e-12;

/// Relative spread allowed between the interior probes of `W_c(1)`.
pub const OMEGA_SQ_PROBE_TOLERANCE: f64 = 1e-13;

/// Agreement required between the double sum and the N=1 closed form,
/// relative to `Σ|w_ℓ|/ε²`.
pub const CLOSED_FORM_TOLERANCE: f64 = 1e-12;

/// A base stencil together with the frame pulsation `ω`.
#[derive(Debug, Clone, PartialEq)]
pub struct RotatingOperators {
    base: Stencil,
    omega: f64,
}

impl RotatingOperators {
    /// `ω = 0` is accepted: the operators then reduce to `Box` and `Box*Box`.
    pub fn new(base: Stencil, omega: f64) -> Result<Self> {
        if !(omega.is_finite() && omega >= 0.0) {
            return Err(Error::InvalidParameter("pulsation must be finite and nonnegative"));
        }
        Ok(RotatingOperators { base, omega })
    }

    pub fn base(&self) -> &Stencil {
        &self.base
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    fn modulated(&self, trig: fn(f64) -> f64) -> Stencil {
        let n = self.base.halfwidth() as isize;
        let eps = self.base.eps();
        let gamma = (-n..=n)
            .map(|j| self.base.coeff(j) * trig(self.omega * j as f64 * eps))
            .collect();
        Stencil::new(gamma, eps).expect("modulated stencil keeps a valid shape")
    }

    /// `V_c` as a stencil with coefficients `γ_j cos(ωjε)`.
    pub fn vc(&self) -> Stencil {
        self.modulated(math::cos)
    }

    /// `V_s` as a stencil with coefficients `γ_j sin(ωjε)`.
    pub fn vs(&self) -> Stencil {
        self.modulated(math::sin)
    }

    pub fn apply_vc<S: Signal + ?Sized>(&self, f: &S, window: &TimeWindow, t: f64) -> Result<Vec<C64>> {
        self.vc().apply_box(f, window, t)
    }

    pub fn apply_vs<S: Signal + ?Sized>(&self, f: &S, window: &TimeWindow, t: f64) -> Result<Vec<C64>> {
        self.vs().apply_box(f, window, t)
    }

    pub fn apply_wc<S: Signal + ?Sized>(&self, f: &S, window: &TimeWindow, t: f64) -> Result<Vec<C64>> {
        let h = self.omega * self.base.eps();
        double_sum(&self.base, f, window, t, |l| math::cos(h * l as f64))
    }

    pub fn apply_ws<S: Signal + ?Sized>(&self, f: &S, window: &TimeWindow, t: f64) -> Result<Vec<C64>> {
        let h = self.omega * self.base.eps();
        double_sum(&self.base, f, window, t, |l| math::sin(h * l as f64))
    }

    /// Interior coefficients of `W_c`, offsets `-2N..=2N`, including `1/ε²`.
    pub fn wc_interior(&self) -> Vec<C64> {
        self.w_interior(math::cos)
    }

    /// Interior coefficients of `W_s`, offsets `-2N..=2N`, including `1/ε²`.
    pub fn ws_interior(&self) -> Vec<C64> {
        self.w_interior(math::sin)
    }

    fn w_interior(&self, trig: fn(f64) -> f64) -> Vec<C64> {
        let n = self.base.halfwidth() as isize;
        let eps = self.base.eps();
        let h = self.omega * eps;
        self.base
            .autocorrelation()
            .into_iter()
            .zip(-2 * n..=2 * n)
            .map(|(w, l)| w * trig(h * l as f64) / (eps * eps))
            .collect()
    }

    /// `Ω²(ε)`: the constant interior value of `W_c(1)`.
    ///
    /// Probes three interior nodes, requires them to agree, requires `W_s(1)`
    /// to vanish there and the value to be real and positive.
    pub fn omega_sq_eps(&self, window: &TimeWindow) -> Result<f64> {
        let (lo, hi) = window.interior(&self.base)?;
        let one = crate::boxop::ScalarFn(|_| C64::new(1.0, 0.0));
        let eps = self.base.eps();
        let scale: f64 = self.base.autocorrelation().iter().map(|w| w.norm()).sum::<f64>() / (eps * eps);
        let mut values = [C64::new(0.0, 0.0); 3];
        for (v, t) in values.iter_mut().zip([lo, 0.5 * (lo + hi), hi]) {
            *v = self.apply_wc(&one, window, t)?[0];
            let ws = self.apply_ws(&one, window, t)?[0];
            if ws.norm() > OMEGA_SQ_IMAG_TOLERANCE * scale.max(1.0) {
                return Err(Error::NonVanishingWs(ws.norm()));
            }
        }
        let spread = values
            .iter()
            .map(|v| (v - values[0]).norm())
            .fold(0.0, f64::max);
        if spread > OMEGA_SQ_PROBE_TOLERANCE * scale.max(1.0) {
            return Err(Error::NonConstantInterior { spread });
        }
        let v = values[1];
        if v.im.abs() > OMEGA_SQ_IMAG_TOLERANCE * scale.max(1.0) {
            return Err(Error::NonRealOmegaSquared { re: v.re, im: v.im });
        }
        if !(v.re > 0.0) {
            return Err(Error::NonPositiveOmegaSquared(v.re));
        }
        Ok(v.re)
    }

    /// The N=1 closed form of `Ω²(ε)`:
    /// `((γ₋₁+γ₀+γ₁)² + 2γ₋₁γ₁(cos 2ωε - 1) + 2γ₀(γ₋₁+γ₁)(cos ωε - 1)) / ε²`.
    /// `None` for wider stencils.
    pub fn omega_sq_closed_form(&self) -> Option<C64> {
        if self.base.halfwidth() != 1 {
            return None;
        }
        let (gm, g0, gp) = (self.base.coeff(-1), self.base.coeff(0), self.base.coeff(1));
        let eps = self.base.eps();
        let h = self.omega * eps;
        let sum = gm + g0 + gp;
        let d = sum * sum
            + gm * gp * 2.0 * (math::cos(2.0 * h) - 1.0)
            + g0 * (gm + gp) * 2.0 * (math::cos(h) - 1.0);
        Some(d / (eps * eps))
    }

    /// `φ(ε) = (ω²/Ω²(ε))^{1/(2-β)}`.
    pub fn expansion_factor(&self, beta: f64, window: &TimeWindow) -> Result<ExpansionFactor> {
        if !beta.is_finite() {
            return Err(Error::InvalidParameter("exponent must be finite"));
        }
        if (beta - 2.0).abs() < 1e-12 {
            return Err(Error::SingularExponent);
        }
        if !(self.omega > 0.0) {
            return Err(Error::InvalidParameter("expansion factor needs a positive pulsation"));
        }
        let omega_sq_eps = self.omega_sq_eps(window)?;
        let eps = self.base.eps();
        let scale: f64 = self.base.autocorrelation().iter().map(|w| w.norm()).sum::<f64>() / (eps * eps);
        let closed_form_discrepancy = self
            .omega_sq_closed_form()
            .map(|cf| (cf - omega_sq_eps).norm() / scale);
        if let Some(d) = closed_form_discrepancy {
            if d > CLOSED_FORM_TOLERANCE {
                return Err(Error::VerificationFailed {
                    residual: d,
                    tolerance: CLOSED_FORM_TOLERANCE,
                });
            }
        }
        let value = math::powf(self.omega * self.omega / omega_sq_eps, 1.0 / (2.0 - beta));
        Ok(ExpansionFactor {
            value,
            omega: self.omega,
            omega_sq_eps,
            beta,
            closed_form_discrepancy,
        })
    }

    /// Residuals of the four modulation identities and of the two composition
    /// identities, at every grid node of `[t0-2Nε, tf+2Nε]`.
    ///
    /// `f` must cover every grid node of `window`; values are normalized by
    /// `sup|f|·(Σ|γ|/ε)` (first order) or its square (second order).
    pub fn verify_operator_identities(&self, f: &SampledPath, window: &TimeWindow) -> Result<IdentityResiduals> {
        let eps = self.base.eps();
        let n = self.base.halfwidth() as isize;
        let w = self.omega;
        let fcos = Modulated { inner: f, omega: w, trig: math::cos };
        let fsin = Modulated { inner: f, omega: w, trig: math::sin };
        let (vc, vs) = (self.vc(), self.vs());
        let (vc_adj, vs_adj) = (vc.adjoint(), vs.adjoint());
        let vcf = vc.applied(f, *window);
        let vsf = vs.applied(f, *window);

        let s1 = self.base.coefficients().iter().map(|g| g.norm()).sum::<f64>() / eps;
        let fmax = f.max_norm().max(f64::MIN_POSITIVE);
        let (scale1, scale2) = (fmax * s1, fmax * s1 * s1);

        let first = window_nodes(f, window, 2 * n)?;
        let mut r = IdentityResiduals::default();
        for t in first {
            let (c, s) = (math::cos(w * t), math::sin(w * t));
            let vcv = vc.apply_box(f, window, t)?;
            let vsv = vs.apply_box(f, window, t)?;
            let wcv = self.apply_wc(f, window, t)?;
            let wsv = self.apply_ws(f, window, t)?;
            let b_cos = self.base.apply_box(&fcos, window, t)?;
            let b_sin = self.base.apply_box(&fsin, window, t)?;
            let bb_cos = self.base.apply_box_star_box(&fcos, window, t)?;
            let bb_sin = self.base.apply_box_star_box(&fsin, window, t)?;
            let vcvc = vc_adj.apply_box(&vcf, window, t)?;
            let vsvs = vs_adj.apply_box(&vsf, window, t)?;
            let vcvs = vc_adj.apply_box(&vsf, window, t)?;
            let vsvc = vs_adj.apply_box(&vcf, window, t)?;
            for k in 0..f.dim() {
                let upd = |slot: &mut f64, v: C64, scale: f64| *slot = slot.max(v.norm() / scale);
                upd(&mut r.op1, b_cos[k] - (vcv[k] * c - vsv[k] * s), scale1);
                upd(&mut r.op2, b_sin[k] - (vsv[k] * c + vcv[k] * s), scale1);
                upd(&mut r.op3, bb_cos[k] - (wcv[k] * c - wsv[k] * s), scale2);
                upd(&mut r.op4, bb_sin[k] - (wsv[k] * c + wcv[k] * s), scale2);
                upd(&mut r.op5_wc, wcv[k] - (vcvc[k] + vsvs[k]), scale2);
                upd(&mut r.op5_ws, wsv[k] - (vcvs[k] - vsvc[k]), scale2);
            }
        }
        Ok(r)
    }

    /// `|⟨W_s f, g⟩ + ⟨f, W_s g⟩|` with the bilinear grid product over the
    /// window nodes, normalized by `sup|f|·sup|g|·(Σ|γ|/ε)²·nodes`.
    pub fn skew_symmetry_residual(&self, f: &SampledPath, g: &SampledPath, window: &TimeWindow) -> Result<f64> {
        if f.dim() != g.dim() {
            return Err(Error::DimensionMismatch {
                expected: f.dim(),
                found: g.dim(),
            });
        }
        let nodes = window_nodes(f, window, 0)?;
        let mut lhs = C64::new(0.0, 0.0);
        let mut rhs = C64::new(0.0, 0.0);
        let mut fv = alloc::vec![C64::new(0.0, 0.0); f.dim()];
        let mut gv = alloc::vec![C64::new(0.0, 0.0); f.dim()];
        for &t in &nodes {
            let wsf = self.apply_ws(f, window, t)?;
            let wsg = self.apply_ws(g, window, t)?;
            f.eval(t, &mut fv)?;
            g.eval(t, &mut gv)?;
            for k in 0..f.dim() {
                lhs += wsf[k] * gv[k];
                rhs += fv[k] * wsg[k];
            }
        }
        let eps = self.base.eps();
        let s1 = self.base.coefficients().iter().map(|x| x.norm()).sum::<f64>() / eps;
        let scale = f.max_norm() * g.max_norm() * s1 * s1 * nodes.len() as f64;
        Ok((lhs + rhs).norm() / scale.max(f64::MIN_POSITIVE))
    }
}

/// Grid nodes of `f` lying in `[t0 - margin·ε, tf + margin·ε]`.
fn window_nodes(f: &SampledPath, window: &TimeWindow, margin: isize) -> Result<Vec<f64>> {
    let eps = f.step().unwrap_or(1.0);
    let first = f.index_of(window.t0).map_err(|_| Error::InvalidParameter("path must be sampled from t0"))?;
    let last = f.index_of(window.tf).or_else(|_| {
        // window end may fall between nodes
        let k = math::round((window.tf - f.origin()) / eps - 0.5);
        if k >= 0.0 && (k as usize) < f.len() {
            Ok(k as usize)
        } else {
            Err(Error::InvalidParameter("path must cover the window"))
        }
    })?;
    Ok((first as isize - margin..=last as isize + margin)
        .map(|k| f.origin() + k as f64 * eps)
        .collect())
}

/// `f(t)·cos(ωt)` or `f(t)·sin(ωt)`.
struct Modulated<'a> {
    inner: &'a SampledPath,
    omega: f64,
    trig: fn(f64) -> f64,
}

impl Signal for Modulated<'_> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn eval(&self, t: f64, out: &mut [C64]) -> Result<()> {
        self.inner.eval(t, out)?;
        let m = (self.trig)(self.omega * t);
        out.iter_mut().for_each(|v| *v *= m);
        Ok(())
    }
    fn step(&self) -> Option<f64> {
        self.inner.step()
    }
}

/// Maximum relative residual of each operator identity.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct IdentityResiduals {
    pub op1: f64,
    pub op2: f64,
    pub op3: f64,
    pub op4: f64,
    pub op5_wc: f64,
    pub op5_ws: f64,
}

impl IdentityResiduals {
    pub fn max(&self) -> f64 {
        [self.op1, self.op2, self.op3, self.op4, self.op5_wc, self.op5_ws]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

/// The homothety ratio between classical and discrete relative equilibria.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansionFactor {
    pub value: f64,
    pub omega: f64,
    pub omega_sq_eps: f64,
    pub beta: f64,
    /// Gap between the double sum and the N=1 closed form, relative to
    /// `Σ|w_ℓ|/ε²`.
    pub closed_form_discrepancy: Option<f64>,
}

impl ExpansionFactor {
    /// The classical limit `φ = 1`, `Ω² = ω²`.
    pub fn identity(omega: f64, beta: f64) -> Self {
        ExpansionFactor {
            value: 1.0,
            omega,
            omega_sq_eps: omega * omega,
            beta,
            closed_form_discrepancy: None,
        }
    }
}

/// A window long enough for the interior of `op` to be nonempty.
pub fn canonical_window(op: &Stencil) -> TimeWindow {
    let len = 8.0 * (op.halfwidth().max(1)) as f64 * op.eps();
    TimeWindow::new(0.0, len).expect("positive length")
}
