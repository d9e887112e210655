//! Semi-discrete spatial operators at every regularization stage.
//!
//! The degenerate effective viscosity mu = b/omega is the coefficient of the
//! momentum viscosity (2 nu0 mu D(v)), both scalar diffusions, and the
//! production term. The cascade regularizes it in stages:
//!
//! * `Full` — mu = b/omega (requires omega > 0; hard-errors otherwise),
//! * `K`    — same coefficient, but viscosity capped by T_k and convection
//!            damped by G_k(|v|^2),
//! * `NK`   — mu^n = b/omega + 1/n (diffusivity floored), production
//!            truncated by the factor 1/(1 + |D|^2/n),
//! * `MNK`  — mu^{n,m} = b_+/(omega_+ + 1/m) + 1/n, total (defined for any
//!            b, omega); sinks switch to b_+ omega and T_m(omega) omega_+.
//!
//! Only MNK is total by design: the other stages hard-error on omega <= 0
//! because the cascade — not silent clamping — is the answer to degeneracy.
//!
//! Discretization choices (1D reference mode, uniform cells, scalars and u
//! at centers):
//!
//! * diffusive face coefficients are harmonic means of cell coefficients
//!   (preserves the M-matrix property under degenerate mu), except for the
//!   omega flux where the face coefficient is built from arithmetic face
//!   means of b and omega — that is what makes the Direct and Reformulated
//!   omega fluxes algebraically identical (see `omega_rhs_1d`);
//! * |D(v)|^2 in 1D is (1/2)(du/dy)^2, evaluated per cell by averaging the
//!   squares of the two adjacent face slopes; wall faces contribute no
//!   production (the wall layer's dissipation is bookkept separately by the
//!   energy ledger);
//! * convection of scalars is first-order conservative upwind (max-principle
//!   compatible); in 1D it vanishes identically since v is wall-parallel.

pub mod d2;

use crate::core::{BoundarySpec, Grid, ModelParams, RegLevels, ScalarBc, State1, WallId};
use crate::cutoffs::{pos_part, t_cut};
use crate::error::{Error, Result};
use crate::slipbc::{solve_wall, LawCtx, SlipLaw};

/// Regularization stage selector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    Full,
    K,
    NK,
    MNK,
}

impl Stage {
    /// The natural stage for a level triple: the deepest truncation that is
    /// actually finite.
    pub fn from_levels(l: &RegLevels) -> Stage {
        if l.m.is_finite() {
            Stage::MNK
        } else if l.n.is_finite() || l.n_prod.map_or(false, f64::is_finite) {
            Stage::NK
        } else if l.k.is_finite() || l.k_conv.map_or(false, f64::is_finite) {
            Stage::K
        } else {
            Stage::Full
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Stage::Full => "Full",
            Stage::K => "K",
            Stage::NK => "NK",
            Stage::MNK => "MNK",
        }
    }
}

/// Stage formula for the effective viscosity at one point.
#[inline]
pub fn mu_point(b: f64, omega: f64, levels: &RegLevels, stage: Stage) -> Result<f64> {
    mu_point_at(b, omega, levels, stage, 0)
}

#[inline]
fn mu_point_at(b: f64, omega: f64, levels: &RegLevels, stage: Stage, cell: usize) -> Result<f64> {
    match stage {
        Stage::MNK => {
            let inv_m = if levels.m.is_finite() { 1.0 / levels.m } else { 0.0 };
            let inv_n = if levels.n_diff().is_finite() {
                1.0 / levels.n_diff()
            } else {
                0.0
            };
            Ok(pos_part(b) / (pos_part(omega) + inv_m) + inv_n)
        }
        Stage::NK => {
            if omega <= 0.0 {
                return Err(Error::DegenerateState {
                    cell,
                    omega,
                    stage: stage.name(),
                });
            }
            let inv_n = if levels.n_diff().is_finite() {
                1.0 / levels.n_diff()
            } else {
                0.0
            };
            Ok(b / omega + inv_n)
        }
        Stage::Full | Stage::K => {
            if omega <= 0.0 {
                return Err(Error::DegenerateState {
                    cell,
                    omega,
                    stage: stage.name(),
                });
            }
            Ok(b / omega)
        }
    }
}

/// Effective viscosity field (cell centers).
pub fn mu_field(b: &[f64], omega: &[f64], levels: &RegLevels, stage: Stage) -> Result<Vec<f64>> {
    debug_assert_eq!(b.len(), omega.len());
    b.iter()
        .zip(omega)
        .enumerate()
        .map(|(j, (&bj, &wj))| mu_point_at(bj, wj, levels, stage, j))
        .collect()
}

/// Harmonic mean of two nonnegative cell coefficients (0 if either is 0).
#[inline]
pub fn harmonic_face(a: f64, b: f64) -> f64 {
    if a + b > 0.0 {
        2.0 * a * b / (a + b)
    } else {
        0.0
    }
}

/// |D(v)|^2 per cell in 1D: (1/2)(du/dy)^2 with the square averaged over the
/// two adjacent faces; wall faces contribute zero.
pub fn dv_sq_1d(u: &[f64], dy: f64) -> Vec<f64> {
    let ny = u.len();
    let mut out = vec![0.0; ny];
    for j in 0..ny {
        let g_lo = if j > 0 { (u[j] - u[j - 1]) / dy } else { 0.0 };
        let g_hi = if j + 1 < ny { (u[j + 1] - u[j]) / dy } else { 0.0 };
        out[j] = 0.5 * 0.5 * (g_lo * g_lo + g_hi * g_hi);
    }
    out
}

/// Truncated production kappa4 * T_k(mu) |D|^2 / (1 + |D|^2/n_prod),
/// pointwise nonnegative.
pub fn production_1d(
    u: &[f64],
    mu: &[f64],
    levels: &RegLevels,
    params: &ModelParams,
    dy: f64,
) -> Vec<f64> {
    let dsq = dv_sq_1d(u, dy);
    let k4 = params.k4();
    dsq.iter()
        .zip(mu)
        .map(|(&d2, &m)| {
            let quot = if levels.n_prod().is_finite() {
                1.0 + d2 / levels.n_prod()
            } else {
                1.0
            };
            k4 * t_cut(levels.k_visc(), m) * d2 / quot
        })
        .collect()
}

/// Term-split time-derivative contributions for one field.
#[derive(Clone, Debug)]
pub struct Tendencies {
    pub conv: Vec<f64>,
    pub diff: Vec<f64>,
    pub reac: Vec<f64>,
}

impl Tendencies {
    pub fn zeros(n: usize) -> Self {
        Self {
            conv: vec![0.0; n],
            diff: vec![0.0; n],
            reac: vec![0.0; n],
        }
    }

    /// Sum of the splits.
    pub fn total(&self) -> Vec<f64> {
        self.conv
            .iter()
            .zip(&self.diff)
            .zip(&self.reac)
            .map(|((c, d), r)| c + d + r)
            .collect()
    }
}

/// Scalar wall-face diffusive flux (oriented in +y) for one wall, given the
/// wall-adjacent cell value and coefficient. Dirichlet walls see the trace
/// across half a cell; zero-flux walls contribute nothing.
fn scalar_wall_flux(bc: &ScalarBc, trace_of: impl Fn(&ScalarBc) -> f64, cell: f64, coeff: f64, dy: f64, wall: WallId) -> f64 {
    match bc {
        ScalarBc::ZeroFlux => 0.0,
        bc @ ScalarBc::Dirichlet { .. } => {
            let g = trace_of(bc);
            match wall {
                // +y flux at the bottom face: coeff * (cell - trace)/(dy/2).
                WallId::Y0 => coeff * (cell - g) / (0.5 * dy),
                // +y flux at the top face: coeff * (trace - cell)/(dy/2).
                WallId::Y1 => coeff * (g - cell) / (0.5 * dy),
            }
        }
    }
}

fn b_trace(bc: &ScalarBc, t: f64) -> f64 {
    match bc {
        ScalarBc::Dirichlet { b, .. } => b.eval(t),
        ScalarBc::ZeroFlux => f64::NAN,
    }
}

fn omega_trace(bc: &ScalarBc, t: f64) -> f64 {
    match bc {
        ScalarBc::Dirichlet { omega, .. } => omega.eval(t),
        ScalarBc::ZeroFlux => f64::NAN,
    }
}

/// Semi-discrete tendencies of b in 1D: zero convection (v is wall-parallel),
/// conservative diffusion with coefficient kappa3 * T_n(mu) (harmonic face
/// means), production as in `production_1d`, sink -b omega (b_+ omega at the
/// MNK stage).
pub fn b_rhs_1d(
    state: &State1,
    levels: &RegLevels,
    grid: &Grid,
    bc: &BoundarySpec,
    params: &ModelParams,
    stage: Stage,
) -> Result<Tendencies> {
    let ny = grid.ny;
    let dy = grid.dy;
    let mu = mu_field(&state.b, &state.omega, levels, stage)?;
    let coeff: Vec<f64> = mu
        .iter()
        .map(|&m| params.k3() * t_cut(levels.n_diff(), m))
        .collect();
    let mut out = Tendencies::zeros(ny);

    // Diffusion: flux differences over cells.
    let mut flux = vec![0.0; ny + 1]; // flux[j] = face below cell j; flux[ny] = top wall
    for j in 1..ny {
        let cf = harmonic_face(coeff[j - 1], coeff[j]);
        flux[j] = cf * (state.b[j] - state.b[j - 1]) / dy;
    }
    flux[0] = scalar_wall_flux(
        &bc.y0.scalar,
        |s| b_trace(s, state.t),
        state.b[0],
        coeff[0],
        dy,
        WallId::Y0,
    );
    flux[ny] = scalar_wall_flux(
        &bc.y1.scalar,
        |s| b_trace(s, state.t),
        state.b[ny - 1],
        coeff[ny - 1],
        dy,
        WallId::Y1,
    );
    for j in 0..ny {
        out.diff[j] = (flux[j + 1] - flux[j]) / dy;
    }

    // Reaction: production - sink.
    let prod = production_1d(&state.u, &mu, levels, params, dy);
    for j in 0..ny {
        let bj = if stage == Stage::MNK {
            pos_part(state.b[j])
        } else {
            state.b[j]
        };
        out.reac[j] = prod[j] - bj * state.omega[j];
    }
    Ok(out)
}

/// Flux discretization of the omega diffusion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OmegaFluxForm {
    /// mu * grad omega with the face coefficient built from arithmetic face
    /// means of b and omega (stage formula applied at the face, then T_n).
    Direct,
    /// (grad(b omega) - omega grad b) / omega with b omega evaluated on
    /// faces cell-by-cell and omega by its arithmetic face mean. For
    /// strictly positive fields this is algebraically equal to the Direct
    /// flux at the Full stage. How to discretize this form where b or omega
    /// vanish is not canonical; this evaluation is our choice.
    Reformulated,
}

/// Semi-discrete tendencies of omega in 1D: diffusion kappa1 * (flux form),
/// sink -kappa2 omega^2 (T_m(omega) omega_+ at the MNK stage).
pub fn omega_rhs_1d(
    state: &State1,
    levels: &RegLevels,
    grid: &Grid,
    bc: &BoundarySpec,
    params: &ModelParams,
    stage: Stage,
    form: OmegaFluxForm,
) -> Result<Tendencies> {
    let ny = grid.ny;
    let dy = grid.dy;
    let mut out = Tendencies::zeros(ny);

    let mut flux = vec![0.0; ny + 1];
    for j in 1..ny {
        let bf = 0.5 * (state.b[j - 1] + state.b[j]);
        let wf = 0.5 * (state.omega[j - 1] + state.omega[j]);
        match form {
            OmegaFluxForm::Direct => {
                let mu_face = mu_point_at(bf, wf, levels, stage, j)?;
                let cf = params.k1() * t_cut(levels.n_diff(), mu_face);
                flux[j] = cf * (state.omega[j] - state.omega[j - 1]) / dy;
            }
            OmegaFluxForm::Reformulated => {
                if wf <= 0.0 {
                    return Err(Error::DegenerateState {
                        cell: j,
                        omega: wf,
                        stage: "Reformulated-flux face",
                    });
                }
                let d_bw = (state.b[j] * state.omega[j] - state.b[j - 1] * state.omega[j - 1]) / dy;
                let d_b = (state.b[j] - state.b[j - 1]) / dy;
                flux[j] = params.k1() * (d_bw - wf * d_b) / wf;
            }
        }
    }
    // Wall faces: the trace coefficient is the stage formula at the trace
    // values themselves (half-cell stencil).
    let wall_coeff = |bt: f64, wt: f64| -> Result<f64> {
        Ok(params.k1() * t_cut(levels.n_diff(), mu_point(bt, wt, levels, stage)?))
    };
    match &bc.y0.scalar {
        ScalarBc::ZeroFlux => {}
        s @ ScalarBc::Dirichlet { .. } => {
            let wt = omega_trace(s, state.t);
            let bt = b_trace(s, state.t);
            let cf = wall_coeff(0.5 * (bt + state.b[0]), 0.5 * (wt + state.omega[0]))?;
            flux[0] = cf * (state.omega[0] - wt) / (0.5 * dy);
        }
    }
    match &bc.y1.scalar {
        ScalarBc::ZeroFlux => {}
        s @ ScalarBc::Dirichlet { .. } => {
            let wt = omega_trace(s, state.t);
            let bt = b_trace(s, state.t);
            let cf = wall_coeff(0.5 * (bt + state.b[ny - 1]), 0.5 * (wt + state.omega[ny - 1]))?;
            flux[ny] = cf * (wt - state.omega[ny - 1]) / (0.5 * dy);
        }
    }
    for j in 0..ny {
        out.diff[j] = (flux[j + 1] - flux[j]) / dy;
    }

    for j in 0..ny {
        let w = state.omega[j];
        out.reac[j] = if stage == Stage::MNK {
            -params.k2() * t_cut(levels.m, w) * pos_part(w)
        } else {
            -params.k2() * w * w
        };
    }
    Ok(out)
}

/// Wall coupling of the 1D momentum stencil: the viscous flux of u through a
/// wall face, obtained by solving the slip law against the impedance the
/// half-cell stencil induces.
#[derive(Clone, Copy, Debug)]
pub struct WallCoupling {
    /// Tangential traction (the slip-law s).
    pub s: f64,
    /// Slip velocity at the wall.
    pub v_tau: f64,
    /// +y-oriented viscous flux of u through the wall face
    /// (+s at the bottom wall, -s at the top wall).
    pub flux: f64,
    /// Impedance slope B = nu_wall/(dy/2) > 0 of the stencil.
    pub b_coef: f64,
}

/// Solve the wall law at one wall given the adjacent cell velocity and the
/// wall-face viscosity.
pub fn wall_coupling(
    law: &SlipLaw,
    ctx: &LawCtx,
    u_adj: f64,
    nu_wall: f64,
    dy: f64,
    wall: WallId,
) -> Result<WallCoupling> {
    let b_coef = nu_wall / (0.5 * dy);
    assert!(b_coef > 0.0, "wall-face viscosity must be positive");
    let ws = solve_wall(law, ctx, [b_coef * u_adj, 0.0], b_coef)?;
    let s = ws.s[0];
    let flux = match wall {
        WallId::Y0 => s,
        WallId::Y1 => -s,
    };
    Ok(WallCoupling {
        s,
        v_tau: ws.v_tau[0],
        flux,
        b_coef,
    })
}

/// Wall-law context at one wall: the scalar traces if the wall is
/// generating, else the adjacent cell values.
pub fn wall_law_ctx(bc: &ScalarBc, t: f64, x: f64, b_adj: f64, omega_adj: f64) -> LawCtx {
    match bc {
        ScalarBc::Dirichlet { b, omega } => LawCtx::new(t, x, b.eval(t), omega.eval(t)),
        ScalarBc::ZeroFlux => LawCtx::new(t, x, b_adj, omega_adj),
    }
}

/// Semi-discrete momentum tendency in 1D: viscous term
/// nu0 * d/dy(T_k(mu) du/dy) with slip-law wall fluxes; convection vanishes
/// identically (u depends on y only).
pub fn momentum_rhs_1d(
    state: &State1,
    levels: &RegLevels,
    grid: &Grid,
    bc: &BoundarySpec,
    params: &ModelParams,
    stage: Stage,
) -> Result<Tendencies> {
    let ny = grid.ny;
    let dy = grid.dy;
    let mu = mu_field(&state.b, &state.omega, levels, stage)?;
    // 2 nu0 mu D(v) contracted to 1D gives the flux nu0 * T_k(mu) du/dy.
    let nu0 = 0.5 * params.two_nu0();
    let nu: Vec<f64> = mu.iter().map(|&m| nu0 * t_cut(levels.k_visc(), m)).collect();
    let mut out = Tendencies::zeros(ny);

    let mut flux = vec![0.0; ny + 1];
    for j in 1..ny {
        flux[j] = harmonic_face(nu[j - 1], nu[j]) * (state.u[j] - state.u[j - 1]) / dy;
    }
    let ctx0 = wall_law_ctx(&bc.y0.scalar, state.t, 0.0, state.b[0], state.omega[0]);
    flux[0] = wall_coupling(&bc.y0.law, &ctx0, state.u[0], nu[0], dy, WallId::Y0)?.flux;
    let ctx1 = wall_law_ctx(
        &bc.y1.scalar,
        state.t,
        grid.ly(),
        state.b[ny - 1],
        state.omega[ny - 1],
    );
    flux[ny] = wall_coupling(&bc.y1.law, &ctx1, state.u[ny - 1], nu[ny - 1], dy, WallId::Y1)?.flux;
    for j in 0..ny {
        out.diff[j] = (flux[j + 1] - flux[j]) / dy;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::{ScalarBc, WallSpec};

    fn grid(ny: usize) -> Grid {
        Grid::channel_1d(ny, 1.0 / ny as f64)
    }

    fn neumann_bc() -> BoundarySpec {
        BoundarySpec {
            y0: WallSpec {
                scalar: ScalarBc::ZeroFlux,
                law: SlipLaw::free_slip(),
            },
            y1: WallSpec {
                scalar: ScalarBc::ZeroFlux,
                law: SlipLaw::free_slip(),
            },
            b_min: 1e-8,
            b_max: 1e8,
            omega_min: 1e-8,
            omega_max: 1e8,
        }
    }

    fn params() -> ModelParams {
        ModelParams::normalized()
    }

    #[test]
    fn mu_stage_formulas() {
        let full = RegLevels::untruncated();
        assert_eq!(mu_point(1.0, 2.0, &full, Stage::Full).unwrap(), 0.5);
        let l = RegLevels::new(f64::INFINITY, 10.0, 10.0);
        assert!((mu_point(-0.3, 1.0, &l, Stage::MNK).unwrap() - 0.1).abs() < 1e-15);
        let l = RegLevels::new(f64::INFINITY, f64::INFINITY, 2.0);
        assert_eq!(mu_point(4.0, 0.0, &l, Stage::MNK).unwrap(), 8.0);
        assert!(matches!(
            mu_point(1.0, 0.0, &full, Stage::Full),
            Err(Error::DegenerateState { .. })
        ));
    }

    #[test]
    fn stage_selection_follows_finite_levels() {
        assert_eq!(Stage::from_levels(&RegLevels::untruncated()), Stage::Full);
        assert_eq!(
            Stage::from_levels(&RegLevels::new(10.0, f64::INFINITY, f64::INFINITY)),
            Stage::K
        );
        assert_eq!(
            Stage::from_levels(&RegLevels::new(10.0, 10.0, f64::INFINITY)),
            Stage::NK
        );
        assert_eq!(Stage::from_levels(&RegLevels::new(10.0, 10.0, 10.0)), Stage::MNK);
    }

    #[test]
    fn b_rhs_sink_only_for_constant_fields() {
        let g = grid(8);
        let st = State1 {
            t: 0.0,
            u: vec![0.0; 8],
            b: vec![2.0; 8],
            omega: vec![3.0; 8],
        };
        let td = b_rhs_1d(
            &st,
            &RegLevels::untruncated(),
            &g,
            &neumann_bc(),
            &params(),
            Stage::Full,
        )
        .unwrap();
        for t in td.total() {
            assert!((t - (-6.0)).abs() < 1e-13, "tendency must be -b*omega");
        }
    }

    #[test]
    fn production_truncated_quotient() {
        // |D|^2 = n  =>  production = T_k(mu) * n/2.
        let n = 4.0;
        let mut l = RegLevels::new(0.5, f64::INFINITY, f64::INFINITY);
        l.n_prod = Some(n);
        // A single interior cell with both face slopes g: |D|^2 = g^2/2 = n
        // => g = sqrt(2n).
        let g = (2.0 * n).sqrt();
        let dy = 0.125;
        let u = vec![0.0, g * dy, 2.0 * g * dy, 3.0 * g * dy];
        let mu = vec![2.0; 4];
        let p = production_1d(&u, &mu, &l, &params(), dy);
        // Interior cells see both slopes; T_k(2) = 0.5.
        assert!((p[1] - 0.5 * n / 2.0).abs() < 1e-12, "p = {:?}", p);
        assert!((p[2] - 0.5 * n / 2.0).abs() < 1e-12);
        // Zero velocity: zero production.
        assert!(production_1d(&[0.0; 4], &mu, &l, &params(), dy)
            .iter()
            .all(|&x| x == 0.0));
    }

    #[test]
    fn production_nonnegative_randomized() {
        let mut x = 0.37_f64;
        let mut next = move || {
            x = (x * 9301.0 + 49297.0) % 233280.0 / 233280.0;
            x
        };
        for _ in 0..50 {
            let ny = 8;
            let u: Vec<f64> = (0..ny).map(|_| 4.0 * (next() - 0.5)).collect();
            let mu: Vec<f64> = (0..ny).map(|_| 2.0 * next()).collect();
            let l = RegLevels::new(
                0.1 + 5.0 * next(),
                0.1 + 5.0 * next(),
                f64::INFINITY,
            );
            for p in production_1d(&u, &mu, &l, &params(), 0.125) {
                assert!(p >= 0.0);
            }
        }
    }

    #[test]
    fn omega_rhs_sink_only_for_constants() {
        let g = grid(6);
        let st = State1 {
            t: 0.0,
            u: vec![0.0; 6],
            b: vec![1.0; 6],
            omega: vec![2.0; 6],
        };
        let td = omega_rhs_1d(
            &st,
            &RegLevels::untruncated(),
            &g,
            &neumann_bc(),
            &params(),
            Stage::Full,
            OmegaFluxForm::Direct,
        )
        .unwrap();
        for t in td.total() {
            assert!((t - (-4.0)).abs() < 1e-13);
        }
    }

    #[test]
    fn omega_mnk_sink_truncated() {
        let m = 3.0;
        let g = grid(4);
        let st = State1 {
            t: 0.0,
            u: vec![0.0; 4],
            b: vec![1.0; 4],
            omega: vec![2.0 * m; 4],
        };
        let td = omega_rhs_1d(
            &st,
            &RegLevels::new(f64::INFINITY, f64::INFINITY, m),
            &g,
            &neumann_bc(),
            &params(),
            Stage::MNK,
            OmegaFluxForm::Direct,
        )
        .unwrap();
        for t in &td.reac {
            assert!((t - (-m * 2.0 * m)).abs() < 1e-12, "sink = -T_m(2m)*2m");
        }
    }

    #[test]
    fn omega_flux_forms_agree_on_smooth_positive_fields() {
        let ny = 64;
        let g = grid(ny);
        let mut st = State1::zeros(ny);
        for j in 0..ny {
            let y = g.yc(j);
            st.b[j] = 1.0 + 0.5 * (2.0 * y).sin();
            st.omega[j] = 2.0 + 0.3 * (3.0 * y).cos();
        }
        let l = RegLevels::untruncated();
        let bc = neumann_bc();
        let d = omega_rhs_1d(&st, &l, &g, &bc, &params(), Stage::Full, OmegaFluxForm::Direct)
            .unwrap();
        let r = omega_rhs_1d(
            &st,
            &l,
            &g,
            &bc,
            &params(),
            Stage::Full,
            OmegaFluxForm::Reformulated,
        )
        .unwrap();
        let dt = d.total();
        let rt = r.total();
        let scale = dt.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        for j in 0..ny {
            assert!(
                (dt[j] - rt[j]).abs() <= 1e-10 * scale.max(1.0),
                "cell {j}: {} vs {}",
                dt[j],
                rt[j]
            );
        }
    }

    #[test]
    fn stage_ordering_mnk_equals_nk_at_infinite_levels() {
        let ny = 16;
        let g = grid(ny);
        let mut st = State1::zeros(ny);
        for j in 0..ny {
            let y = g.yc(j);
            st.b[j] = 0.5 + y * y;
            st.omega[j] = 1.0 + 0.5 * y;
            st.u[j] = (2.0 * y).sin();
        }
        let l = RegLevels::new(5.0, f64::INFINITY, f64::INFINITY);
        let bc = neumann_bc();
        let p = params();
        let b_nk = b_rhs_1d(&st, &l, &g, &bc, &p, Stage::NK).unwrap().total();
        let b_mnk = b_rhs_1d(&st, &l, &g, &bc, &p, Stage::MNK).unwrap().total();
        assert_eq!(b_nk, b_mnk, "with n = m = inf the stages coincide exactly");
        let w_nk = omega_rhs_1d(&st, &l, &g, &bc, &p, Stage::NK, OmegaFluxForm::Direct)
            .unwrap()
            .total();
        let w_mnk = omega_rhs_1d(&st, &l, &g, &bc, &p, Stage::MNK, OmegaFluxForm::Direct)
            .unwrap()
            .total();
        assert_eq!(w_nk, w_mnk);
    }

    #[test]
    fn momentum_zero_velocity_zero_tendency() {
        let g = grid(8);
        let st = State1 {
            t: 0.0,
            u: vec![0.0; 8],
            b: vec![1.0; 8],
            omega: vec![1.0; 8],
        };
        let td = momentum_rhs_1d(
            &st,
            &RegLevels::untruncated(),
            &g,
            &neumann_bc(),
            &params(),
            Stage::Full,
        )
        .unwrap();
        assert!(td.total().iter().all(|&t| t == 0.0));
    }

    #[test]
    fn momentum_linear_profile_free_slip_interior_zero() {
        let ny = 8;
        let g = grid(ny);
        let mut st = State1::zeros(ny);
        for j in 0..ny {
            st.u[j] = 2.0 * g.yc(j) + 1.0;
            st.b[j] = 1.0;
            st.omega[j] = 1.0;
        }
        let td = momentum_rhs_1d(
            &st,
            &RegLevels::untruncated(),
            &g,
            &neumann_bc(),
            &params(),
            Stage::Full,
        )
        .unwrap();
        let tot = td.total();
        // Constant-coefficient second difference of a linear profile is zero
        // away from the walls (free slip leaves a wall defect only at the
        // wall cells).
        for j in 1..ny - 1 {
            assert!(tot[j].abs() < 1e-12, "interior cell {j}: {}", tot[j]);
        }
    }

    #[test]
    fn monotone_truncation_in_levels() {
        let mut x = 0.71_f64;
        let mut next = move || {
            x = (x * 9301.0 + 49297.0) % 233280.0 / 233280.0;
            x
        };
        for _ in 0..100 {
            let mu = 3.0 * next();
            let k1 = 0.1 + 3.0 * next();
            let k2 = k1 + 2.0 * next();
            assert!(t_cut(k1, mu) <= t_cut(k2, mu) + 1e-15);
            // Truncated production is monotone in both k and n.
            let d2 = 4.0 * next();
            let n1 = 0.1 + 3.0 * next();
            let n2 = n1 + 2.0 * next();
            let p = |k: f64, n: f64| t_cut(k, mu) * d2 / (1.0 + d2 / n);
            assert!(p(k1, n1) <= p(k2, n1) + 1e-15);
            assert!(p(k1, n1) <= p(k1, n2) + 1e-15);
        }
    }

    #[test]
    fn tendency_splits_sum_to_total() {
        let ny = 8;
        let g = grid(ny);
        let mut st = State1::zeros(ny);
        for j in 0..ny {
            let y = g.yc(j);
            st.u[j] = y;
            st.b[j] = 1.0 + y;
            st.omega[j] = 2.0 - y;
        }
        let td = b_rhs_1d(
            &st,
            &RegLevels::untruncated(),
            &g,
            &neumann_bc(),
            &params(),
            Stage::Full,
        )
        .unwrap();
        let tot = td.total();
        for j in 0..ny {
            let s = td.conv[j] + td.diff[j] + td.reac[j];
            assert!((s - tot[j]).abs() <= 1e-14 * tot[j].abs().max(1.0));
        }
    }
}
