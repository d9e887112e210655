//! Generalized stick-slip wall laws.
//!
//! The wall constitutive family relates the tangential traction s (the force
//! with which the wall resists slip) to the tangential velocity v_tau:
//!
//! * stick: |s| <= sigma  forces  v_tau = 0;
//! * slip:  v_tau != 0    forces  s = g(v_tau),
//!
//! where sigma is a threshold and g a friction function. Canonical members:
//! Navier slip (sigma = 0, g = gamma_star * v_tau), threshold stick-slip
//! (g = sigma_star * v_tau/|v_tau| + gamma_star * v_tau), and a no-slip
//! surrogate realized as threshold slip with a huge threshold (exact no-slip
//! is excluded by the pressure theory; the stick branch approximates it).
//!
//! Sign/orientation convention (fixed once, used by the 1D stencil): s is
//! colinear with v_tau on the slip branch and opposes the interior momentum
//! flux, i.e. the wall work s . v_tau is nonnegative for dissipative laws.
//! At the bottom wall (y = 0) the discrete viscous flux of u through the
//! wall face equals +s; at the top wall (y = 1) it equals -s.
//!
//! `regularize_gk` applies the cascade's wall regularization: the friction is
//! capped at level k and extended continuously by zero through v_tau = 0.
//! `solve_wall` couples a law to the impedance relation s = A - B*v_tau that
//! an implicit interior solve induces, returning the consistent pair.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Tangential vectors at a wall point. 1D callers embed scalars as `[w, 0.0]`.
pub type Tangent = [f64; 2];

#[inline]
fn norm(v: Tangent) -> f64 {
    v[0].hypot(v[1])
}

#[inline]
fn scale(v: Tangent, a: f64) -> Tangent {
    [a * v[0], a * v[1]]
}

#[inline]
fn sub(a: Tangent, b: Tangent) -> Tangent {
    [a[0] - b[0], a[1] - b[1]]
}

/// Evaluation context for a wall law: time, wall coordinate, and the wall
/// traces of the two turbulent scalars.
#[derive(Clone, Copy, Debug)]
pub struct LawCtx {
    pub t: f64,
    pub x: f64,
    pub b: f64,
    pub omega: f64,
}

impl LawCtx {
    pub fn new(t: f64, x: f64, b: f64, omega: f64) -> Self {
        Self { t, x, b, omega }
    }
}

/// Hook for user-supplied laws. The residual hook is optional; operations
/// that need it fail with `UnsupportedLaw` when it is absent.
pub trait CustomLaw: Send + Sync + fmt::Debug {
    /// Stick threshold sigma(t, x, b, omega) >= 0.
    fn sigma(&self, ctx: &LawCtx) -> f64;
    /// Slip-branch friction g(t, x, b, omega, v_tau), for v_tau != 0.
    fn g(&self, ctx: &LawCtx, v_tau: Tangent) -> Tangent;
    /// Optional implicit residual h(s, v_tau); zero iff the pair is admissible.
    fn residual(&self, _ctx: &LawCtx, _s: Tangent, _v_tau: Tangent) -> Option<Tangent> {
        None
    }
}

/// The wall-law family. `NavierSlip { gamma_star: 0.0 }` is free slip.
#[derive(Clone, Debug)]
pub enum SlipLaw {
    /// No-slip surrogate: threshold slip with sigma_star = 1e6 * traction_scale.
    NoSlipLimit { traction_scale: f64 },
    /// Linear law s = gamma_star * v_tau (threshold 0).
    NavierSlip { gamma_star: f64 },
    /// Stick up to sigma_star, then s = sigma_star * v/|v| + gamma_star * v.
    ThresholdSlip { sigma_star: f64, gamma_star: f64 },
    Custom(Arc<dyn CustomLaw>),
}

impl SlipLaw {
    pub fn free_slip() -> Self {
        SlipLaw::NavierSlip { gamma_star: 0.0 }
    }

    /// Effective threshold/friction parameters (sigma_star, gamma_star) for
    /// the three canonical variants.
    pub(crate) fn canonical(&self) -> Option<(f64, f64)> {
        match *self {
            SlipLaw::NoSlipLimit { traction_scale } => Some((1e6 * traction_scale, 0.0)),
            SlipLaw::NavierSlip { gamma_star } => Some((0.0, gamma_star)),
            SlipLaw::ThresholdSlip {
                sigma_star,
                gamma_star,
            } => Some((sigma_star, gamma_star)),
            SlipLaw::Custom(_) => None,
        }
    }

    /// Stick threshold sigma for this law at `ctx`.
    pub fn sigma(&self, ctx: &LawCtx) -> f64 {
        match self {
            SlipLaw::Custom(c) => c.sigma(ctx),
            _ => self.canonical().unwrap().0,
        }
    }

    /// Slip-branch friction g(v_tau). Defined as 0 at v_tau = 0 (the stick
    /// branch takes over there; `regularize_gk` relies on this extension).
    pub fn g(&self, ctx: &LawCtx, v_tau: Tangent) -> Tangent {
        match self {
            SlipLaw::Custom(c) => c.g(ctx, v_tau),
            _ => {
                let (sigma_star, gamma_star) = self.canonical().unwrap();
                let vn = norm(v_tau);
                if vn == 0.0 {
                    [0.0, 0.0]
                } else {
                    scale(v_tau, sigma_star / vn + gamma_star)
                }
            }
        }
    }
}

/// Implicit residual of the wall law: zero iff (s, v_tau) is an admissible
/// stick/slip pair.
///
/// For laws with gamma_star > 0 this is the canonical form
/// h = gamma_star * v_tau - ((|s| - sigma)_+ / |s|) * s, with the quotient
/// defined as 0 when the positive part vanishes. Laws with gamma_star = 0
/// (where the canonical form is degenerate) use the direct constitutive
/// residual: s - g(v_tau) on the slip branch, (|s| - sigma)_+ along s on the
/// stick branch.
pub fn residual_h(law: &SlipLaw, ctx: &LawCtx, s: Tangent, v_tau: Tangent) -> Result<Tangent> {
    if let SlipLaw::Custom(c) = law {
        return c
            .residual(ctx, s, v_tau)
            .ok_or_else(|| Error::UnsupportedLaw("custom law lacks a residual hook".into()));
    }
    let (sigma, gamma) = law.canonical().unwrap();
    if gamma > 0.0 {
        let sn = norm(s);
        let excess = (sn - sigma).max(0.0);
        let pull = if excess > 0.0 {
            scale(s, excess / sn)
        } else {
            [0.0, 0.0]
        };
        Ok(sub(scale(v_tau, gamma), pull))
    } else if norm(v_tau) > 0.0 {
        Ok(sub(s, law.g(ctx, v_tau)))
    } else {
        let sn = norm(s);
        let excess = (sn - sigma).max(0.0);
        Ok(if excess > 0.0 {
            scale(s, excess / sn)
        } else {
            [0.0, 0.0]
        })
    }
}

/// Cascade regularization of the friction:
/// g^k = g / (1 + |g|/k) * min(1, k |v_tau|), extended by 0 at v_tau = 0.
/// The output norm is < k for every input.
pub fn regularize_gk(k: f64, law: &SlipLaw, ctx: &LawCtx, v_tau: Tangent) -> Tangent {
    assert!(k.is_finite() && k > 0.0, "regularize_gk needs finite k > 0");
    let vn = norm(v_tau);
    if vn == 0.0 {
        return [0.0, 0.0];
    }
    let g = law.g(ctx, v_tau);
    let gn = norm(g);
    scale(g, (k * vn).min(1.0) / (1.0 + gn / k))
}

/// Outcome of the per-step wall coupling.
#[derive(Clone, Copy, Debug)]
pub struct WallState {
    /// Tangential traction.
    pub s: Tangent,
    /// Tangential slip velocity at the wall.
    pub v_tau: Tangent,
}

/// Solve the wall law against the impedance relation s = A - B*v_tau (B > 0)
/// induced by the implicit interior stencil.
///
/// The returned pair satisfies both the impedance relation and the law
/// (residual <= 1e-12 * scale). For the canonical laws the monotone scalar
/// reduction along A has a closed form; for custom laws a bisection with a
/// 200-iteration cap and 1e-14 bracket is used. The threshold stick branch
/// is selected exactly when |A| <= sigma.
pub fn solve_wall(law: &SlipLaw, ctx: &LawCtx, a: Tangent, b_coef: f64) -> Result<WallState> {
    assert!(b_coef > 0.0, "impedance slope B must be positive");
    let an = norm(a);
    if an == 0.0 {
        return Ok(WallState {
            s: [0.0, 0.0],
            v_tau: [0.0, 0.0],
        });
    }
    let dir = scale(a, 1.0 / an);
    if let Some((sigma_star, gamma_star)) = law.canonical() {
        if an <= sigma_star {
            return Ok(WallState {
                s: a,
                v_tau: [0.0, 0.0],
            });
        }
        // Slip branch: w solves an - B w = sigma_star + gamma_star w.
        let w = (an - sigma_star) / (b_coef + gamma_star);
        let v_tau = scale(dir, w);
        return Ok(WallState {
            s: sub(a, scale(v_tau, b_coef)),
            v_tau,
        });
    }
    // Custom law: monotone scalar equation psi(w) = (an - B w) - |g(w dir)|
    // on [0, an/B]; psi(0+) = an - sigma >= 0 on the slip branch.
    if an <= law.sigma(ctx) {
        return Ok(WallState {
            s: a,
            v_tau: [0.0, 0.0],
        });
    }
    let psi = |w: f64| an - b_coef * w - norm(law.g(ctx, scale(dir, w)));
    let (mut lo, mut hi) = (0.0_f64, an / b_coef);
    if psi(hi) > 0.0 {
        return Err(Error::WallSolve(format!(
            "custom law: no sign change on [0, {hi}] (psi(hi) = {})",
            psi(hi)
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if psi(mid) >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 * (1.0 + an / b_coef) {
            break;
        }
    }
    if hi - lo > 1e-12 * (1.0 + an / b_coef) {
        return Err(Error::WallSolve(format!(
            "custom law: bracket [{lo}, {hi}] did not close after 200 iterations"
        )));
    }
    let w = 0.5 * (lo + hi);
    let v_tau = scale(dir, w);
    Ok(WallState {
        s: sub(a, scale(v_tau, b_coef)),
        v_tau,
    })
}

/// Sampling plan for `check_assumptions`: inclusive ranges and a per-axis
/// sample count, plus the structural constants being audited.
#[derive(Clone, Copy, Debug)]
pub struct SampleSpec {
    pub b_range: (f64, f64),
    pub omega_range: (f64, f64),
    pub v_range: (f64, f64),
    /// Samples per axis (the product over the 3 ranges is evaluated).
    pub count: usize,
    /// Lower-bound constant: g . v >= -c_g must hold.
    pub c_g: f64,
    /// Growth exponent beta_g > 1 in |g|^beta_g <= c_growth (1 + |g.v| + |v|^{8/3}).
    pub beta_g: f64,
    /// User-supplied growth constant (the bound only asserts some C exists;
    /// we report the implied minimal C alongside the margin for this one).
    pub c_growth: f64,
    /// Threshold bound: sigma <= sigma_max must hold.
    pub sigma_max: f64,
}

/// Worst-case margins of the structural assumptions over the sample lattice.
/// Signs are oriented so that a nonnegative `lowg_margin` and nonpositive
/// `upg_margin` / `sigma_margin` mean "assumption satisfied".
#[derive(Clone, Copy, Debug)]
pub struct AssumptionReport {
    /// min over samples of g . v + c_g.
    pub lowg_margin: f64,
    /// max over samples of |g|^beta_g - c_growth (1 + |g.v| + |v|^{8/3}).
    pub upg_margin: f64,
    /// Implied minimal growth constant: max |g|^beta_g / (1 + |g.v| + |v|^{8/3}).
    pub implied_c: f64,
    /// max over samples of sigma - sigma_max.
    pub sigma_margin: f64,
    /// | lim_{v->0} |g| - sigma | estimated along a shrinking-v sequence.
    pub compat_gap: f64,
}

/// Audit the structural assumptions (lower bound, growth, threshold bound,
/// stick/slip compatibility) on a deterministic sample lattice.
pub fn check_assumptions(law: &SlipLaw, spec: &SampleSpec) -> AssumptionReport {
    let n = spec.count.max(2);
    let lin = |(lo, hi): (f64, f64), i: usize| lo + (hi - lo) * (i as f64) / ((n - 1) as f64);
    let mut lowg = f64::INFINITY;
    let mut upg = f64::NEG_INFINITY;
    let mut implied_c = 0.0_f64;
    let mut sigma_margin = f64::NEG_INFINITY;
    let mut compat_gap = 0.0_f64;
    for ib in 0..n {
        for io in 0..n {
            let ctx = LawCtx::new(0.0, 0.0, lin(spec.b_range, ib), lin(spec.omega_range, io));
            let sg = law.sigma(&ctx);
            sigma_margin = sigma_margin.max(sg - spec.sigma_max);
            for iv in 0..n {
                let vmag = lin(spec.v_range, iv);
                if vmag == 0.0 {
                    continue;
                }
                let v = [vmag, 0.0];
                let g = law.g(&ctx, v);
                let gv = g[0] * v[0] + g[1] * v[1];
                let gn = norm(g);
                lowg = lowg.min(gv + spec.c_g);
                let bound = 1.0 + gv.abs() + vmag.powf(8.0 / 3.0);
                upg = upg.max(gn.powf(spec.beta_g) - spec.c_growth * bound);
                implied_c = implied_c.max(gn.powf(spec.beta_g) / bound);
            }
            // Compatibility: |g| must approach sigma as v -> 0.
            let mut gap = 0.0;
            for j in 1..=8 {
                let v = [10f64.powi(-2 * j), 0.0];
                gap = (norm(law.g(&ctx, v)) - sg).abs();
            }
            compat_gap = compat_gap.max(gap);
        }
    }
    AssumptionReport {
        lowg_margin: lowg,
        upg_margin: upg,
        implied_c,
        sigma_margin,
        compat_gap,
    }
}
