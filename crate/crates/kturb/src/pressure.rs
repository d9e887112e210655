//! Pressure solves on the 2D MAC grid: matrix-free conjugate gradients for
//! the Neumann/periodic Poisson problem, the Leray projection, and the
//! three-part pressure decomposition.
//!
//! The Poisson operator is A = -div grad with the compatible MAC stencil
//! (5-point; periodic in x, homogeneous Neumann at the walls). A is
//! symmetric positive semidefinite with kernel = constants, so solves are
//! gauged to the mean-zero subspace and the data must satisfy the discrete
//! solvability condition sum(rhs) = 0.
//!
//! The decomposition splits the projection pressure of the momentum balance
//! into the parts sourced by each force:
//!
//! * p1 — interior viscous force (wall traction excluded),
//! * p2 — convective force,
//! * p_total — full force including wall traction,
//! * p3 := p_total - p1 - p2, the wall-induced part.
//!
//! p3 then satisfies A p3 = div(wall traction rows), whose support touches
//! only the wall-adjacent cells; consequently p3 is discretely harmonic at
//! every cell at least two cells away from the walls, up to solver
//! tolerance. The sum identity p1 + p2 + p3 = p_total holds exactly by
//! construction.

use crate::core::{Array2, BoundarySpec, Grid, ModelParams, RegLevels, State2};
use crate::cutoffs::t_cut;
use crate::error::{Error, Result};
use crate::operators::d2::{conv_momentum, divergence, grad_faces, visc_force};
use crate::operators::{mu_field, Stage};

/// Relative CG tolerance used by all pressure solves.
pub const CG_TOL: f64 = 1e-12;

/// Discrete Neumann/periodic Laplacian div grad at cell centers.
pub fn laplacian(p: &Array2, grid: &Grid) -> Array2 {
    let (nx, ny) = (grid.nx, grid.ny);
    let (dx2, dy2) = (grid.dx * grid.dx, grid.dy * grid.dy);
    let mut out = Array2::zeros(nx, ny);
    for j in 0..ny {
        for i in 0..nx {
            let ipp = if i + 1 < nx { i + 1 } else { 0 };
            let imm = if i == 0 { nx - 1 } else { i - 1 };
            let mut acc = (p[(ipp, j)] - 2.0 * p[(i, j)] + p[(imm, j)]) / dx2;
            if j + 1 < ny {
                acc += (p[(i, j + 1)] - p[(i, j)]) / dy2;
            }
            if j > 0 {
                acc -= (p[(i, j)] - p[(i, j - 1)]) / dy2;
            }
            out[(i, j)] = acc;
        }
    }
    out
}

fn subtract_mean(v: &mut [f64]) {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    for x in v {
        *x -= mean;
    }
}

/// Solve A p = rhs with A = -div grad (SPD on the mean-zero subspace) by
/// conjugate gradients. The data must be discretely compatible:
/// |mean(rhs)| <= tol * max(||rhs||_inf, 1); the solve errors otherwise
/// instead of silently projecting away a genuine imbalance.
pub fn neumann_poisson(rhs: &Array2, grid: &Grid, tol: f64) -> Result<Array2> {
    let n = rhs.data.len();
    let scale = rhs.max_abs().max(1.0);
    let imbalance = rhs.data.iter().sum::<f64>().abs() / n as f64;
    if imbalance > tol * scale {
        return Err(Error::IncompatibleData {
            imbalance,
            tol: tol * scale,
        });
    }

    let apply = |p: &Array2, out: &mut Array2| {
        let lap = laplacian(p, grid);
        for (o, l) in out.data.iter_mut().zip(&lap.data) {
            *o = -l;
        }
    };

    let mut b = rhs.clone();
    subtract_mean(&mut b.data); // remove the round-off component in ker(A)
    let mut x = Array2::zeros(grid.nx, grid.ny);
    let mut r = b.clone();
    let mut p = r.clone();
    let mut ap = Array2::zeros(grid.nx, grid.ny);
    let rhs_norm = b.data.iter().map(|v| v * v).sum::<f64>().sqrt();
    if rhs_norm == 0.0 {
        return Ok(x);
    }
    let mut rr: f64 = r.data.iter().map(|v| v * v).sum();
    let max_iter = 20 * n.max(100);
    for _ in 0..max_iter {
        if rr.sqrt() <= tol * rhs_norm {
            subtract_mean(&mut x.data);
            return Ok(x);
        }
        apply(&p, &mut ap);
        let pap: f64 = p.data.iter().zip(&ap.data).map(|(a, b)| a * b).sum();
        if pap <= 0.0 {
            return Err(Error::LinearSolve(format!(
                "CG breakdown: p'Ap = {pap} (operator lost definiteness)"
            )));
        }
        let alpha = rr / pap;
        for (xi, pi) in x.data.iter_mut().zip(&p.data) {
            *xi += alpha * pi;
        }
        for (ri, api) in r.data.iter_mut().zip(&ap.data) {
            *ri -= alpha * api;
        }
        let rr_new: f64 = r.data.iter().map(|v| v * v).sum();
        let beta = rr_new / rr;
        rr = rr_new;
        for (pi, ri) in p.data.iter_mut().zip(&r.data) {
            *pi = ri + beta * *pi;
        }
    }
    Err(Error::LinearSolve(format!(
        "CG did not reach tol {tol:.1e} in {max_iter} iterations (residual {:.3e})",
        rr.sqrt() / rhs_norm
    )))
}

/// Leray projection: subtract grad p with A p = -div(u, v)/dt-free form
/// (here dt = 1; the caller scales). Returns the mean-zero pressure.
/// After projection div(u, v) vanishes to solver tolerance.
pub fn project(u: &mut Array2, v: &mut Array2, grid: &Grid) -> Result<Array2> {
    let d = divergence(u, v, grid);
    // Solve lap p = div(u,v), i.e. A p = -div(u,v) with A = -div grad;
    // then (u,v) - grad p is divergence free.
    let mut rhs = d;
    for x in rhs.data.iter_mut() {
        *x = -*x;
    }
    let p = neumann_poisson(&rhs, grid, CG_TOL)?;
    let (gu, gv) = grad_faces(&p, grid);
    for (ui, gi) in u.data.iter_mut().zip(&gu.data) {
        *ui -= gi;
    }
    for (vi, gi) in v.data.iter_mut().zip(&gv.data) {
        *vi -= gi;
    }
    Ok(p)
}

/// The three pressure parts and their sum.
#[derive(Clone, Debug)]
pub struct PressureParts {
    /// Sourced by the interior viscous force (wall traction excluded).
    pub p1: Array2,
    /// Sourced by the convective force.
    pub p2: Array2,
    /// Wall-induced remainder p_total - p1 - p2; discretely harmonic away
    /// from the walls.
    pub p3: Array2,
    /// Pressure of the full force balance.
    pub p_total: Array2,
    /// max |lap p3| over cells at least two cells from each wall, a
    /// posteriori harmonicity check.
    pub harmonic_residual: f64,
}

/// Decompose the projection pressure of the current state into viscous,
/// convective, and wall-induced parts.
pub fn decompose_pressure(
    state: &State2,
    grid: &Grid,
    bc: &BoundarySpec,
    params: &ModelParams,
    levels: &RegLevels,
    stage: Stage,
) -> Result<PressureParts> {
    let mu = mu_field(&state.b.data, &state.omega.data, levels, stage)?;
    let mut nu = Array2::zeros(grid.nx, grid.ny);
    for (n, m) in nu.data.iter_mut().zip(&mu) {
        *n = params.two_nu0() * t_cut(levels.k_visc(), *m);
    }

    let (fu_i, fv_i) = visc_force(
        &state.u, &state.v, &nu, grid, bc, &state.b, &state.omega, state.t, false,
    )?;
    let (fu_w, fv_w) = visc_force(
        &state.u, &state.v, &nu, grid, bc, &state.b, &state.omega, state.t, true,
    )?;
    let (cu, cv) = conv_momentum(&state.u, &state.v, grid, levels.k_conv());

    let solve_for = |fu: &Array2, fv: &Array2| -> Result<Array2> {
        let d = divergence(fu, fv, grid);
        let mut rhs = d;
        for x in rhs.data.iter_mut() {
            *x = -*x;
        }
        // A p = -div f  =>  div(f - grad p) = 0.
        let mut out = neumann_poisson(&rhs, grid, CG_TOL)?;
        for x in out.data.iter_mut() {
            *x = -*x;
        }
        Ok(out)
    };

    let p1 = solve_for(&fu_i, &fv_i)?;
    let p2 = solve_for(&cu, &cv)?;
    let mut fu_t = fu_w.clone();
    let mut fv_t = fv_w.clone();
    for (a, b) in fu_t.data.iter_mut().zip(&cu.data) {
        *a += b;
    }
    for (a, b) in fv_t.data.iter_mut().zip(&cv.data) {
        *a += b;
    }
    let p_total = solve_for(&fu_t, &fv_t)?;

    let mut p3 = p_total.clone();
    for ((x, a), b) in p3.data.iter_mut().zip(&p1.data).zip(&p2.data) {
        *x -= a + b;
    }

    let lap3 = laplacian(&p3, grid);
    let mut harmonic_residual = 0.0_f64;
    if grid.ny >= 5 {
        for j in 2..grid.ny - 2 {
            for i in 0..grid.nx {
                harmonic_residual = harmonic_residual.max(lap3[(i, j)].abs());
            }
        }
    }

    Ok(PressureParts {
        p1,
        p2,
        p3,
        p_total,
        harmonic_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::{ScalarBc, WallSpec};
    use crate::slipbc::SlipLaw;

    fn grid(nx: usize, ny: usize) -> Grid {
        Grid::channel_2d(nx, ny, 1.0 / nx as f64, 1.0 / ny as f64)
    }

    fn bc() -> BoundarySpec {
        BoundarySpec {
            y0: WallSpec {
                scalar: ScalarBc::ZeroFlux,
                law: SlipLaw::NavierSlip { gamma_star: 2.0 },
            },
            y1: WallSpec {
                scalar: ScalarBc::ZeroFlux,
                law: SlipLaw::NavierSlip { gamma_star: 2.0 },
            },
            b_min: 1e-8,
            b_max: 1e8,
            omega_min: 1e-8,
            omega_max: 1e8,
        }
    }

    #[test]
    fn poisson_recovers_manufactured_solution() {
        let g = grid(32, 32);
        let mut p_exact = Array2::zeros(32, 32);
        for j in 0..32 {
            for i in 0..32 {
                let x = (i as f64 + 0.5) * g.dx;
                let y = g.yc(j);
                // Neumann-compatible: zero y-derivative at walls, periodic x.
                p_exact[(i, j)] = (2.0 * std::f64::consts::PI * x).cos()
                    * (std::f64::consts::PI * y).cos();
            }
        }
        subtract_mean(&mut p_exact.data);
        let lap = laplacian(&p_exact, &g);
        let mut rhs = lap;
        for x in rhs.data.iter_mut() {
            *x = -*x;
        }
        let p = neumann_poisson(&rhs, &g, CG_TOL).unwrap();
        let mut err = 0.0_f64;
        for (a, b) in p.data.iter().zip(&p_exact.data) {
            err = err.max((a - b).abs());
        }
        assert!(err < 1e-10, "max error {err}");
    }

    #[test]
    fn poisson_solution_is_mean_zero() {
        let g = grid(16, 16);
        let mut rhs = Array2::zeros(16, 16);
        for j in 0..16 {
            for i in 0..16 {
                rhs[(i, j)] = ((i as f64 - 7.3) * (j as f64 - 8.1)).sin();
            }
        }
        subtract_mean(&mut rhs.data);
        let p = neumann_poisson(&rhs, &g, CG_TOL).unwrap();
        let mean = p.data.iter().sum::<f64>() / p.data.len() as f64;
        assert!(mean.abs() <= 1e-12 * p.max_abs().max(1.0));
    }

    #[test]
    fn poisson_rejects_incompatible_data() {
        let g = grid(8, 8);
        let rhs = Array2::filled(8, 8, 1.0);
        assert!(matches!(
            neumann_poisson(&rhs, &g, CG_TOL),
            Err(Error::IncompatibleData { .. })
        ));
    }

    #[test]
    fn poisson_is_linear() {
        let g = grid(12, 12);
        let mut r1 = Array2::zeros(12, 12);
        let mut r2 = Array2::zeros(12, 12);
        for j in 0..12 {
            for i in 0..12 {
                r1[(i, j)] = ((3 * i + j) as f64 * 0.31).sin();
                r2[(i, j)] = ((i + 5 * j) as f64 * 0.17).cos();
            }
        }
        subtract_mean(&mut r1.data);
        subtract_mean(&mut r2.data);
        let p1 = neumann_poisson(&r1, &g, CG_TOL).unwrap();
        let p2 = neumann_poisson(&r2, &g, CG_TOL).unwrap();
        let mut sum = r1.clone();
        for (a, b) in sum.data.iter_mut().zip(&r2.data) {
            *a = 2.0 * *a + 3.0 * b;
        }
        let ps = neumann_poisson(&sum, &g, CG_TOL).unwrap();
        let mut err = 0.0_f64;
        for ((s, a), b) in ps.data.iter().zip(&p1.data).zip(&p2.data) {
            err = err.max((s - (2.0 * a + 3.0 * b)).abs());
        }
        assert!(err < 1e-9 * ps.max_abs().max(1.0), "linearity defect {err}");
    }

    #[test]
    fn projection_kills_divergence() {
        let g = grid(24, 24);
        let mut u = Array2::zeros(24, 24);
        let mut v = Array2::zeros(24, 25);
        for j in 0..24 {
            for i in 0..24 {
                let x = i as f64 * g.dx;
                let y = g.yc(j);
                u[(i, j)] = (2.0 * std::f64::consts::PI * x).sin() + 0.3 * y;
            }
        }
        for j in 1..24 {
            for i in 0..24 {
                let x = (i as f64 + 0.5) * g.dx;
                let y = j as f64 * g.dy;
                v[(i, j)] = 0.4 * (2.0 * std::f64::consts::PI * x).cos() * y * (1.0 - y);
            }
        }
        let scale = u.max_abs().max(v.max_abs());
        project(&mut u, &mut v, &g).unwrap();
        let d = divergence(&u, &v, &g);
        assert!(
            d.max_abs() <= 1e-10 * scale.max(1.0),
            "post-projection divergence {}",
            d.max_abs()
        );
    }

    fn shear_state(g: &Grid) -> State2 {
        let (nx, ny) = (g.nx, g.ny);
        let mut st = State2::zeros(nx, ny);
        for j in 0..ny {
            for i in 0..nx {
                let x = i as f64 * g.dx;
                let y = g.yc(j);
                st.u[(i, j)] = (std::f64::consts::PI * y).sin()
                    + 0.2 * (2.0 * std::f64::consts::PI * x).sin();
                st.b[(i, j)] = 1.0 + 0.3 * (std::f64::consts::PI * y).sin();
                st.omega[(i, j)] = 2.0 - 0.5 * y;
            }
        }
        for j in 1..ny {
            for i in 0..nx {
                let x = (i as f64 + 0.5) * g.dx;
                let y = j as f64 * g.dy;
                st.v[(i, j)] =
                    0.1 * (2.0 * std::f64::consts::PI * x).cos() * (std::f64::consts::PI * y).sin();
            }
        }
        st
    }

    #[test]
    fn decomposition_sums_exactly_and_p3_harmonic() {
        let g = grid(32, 32);
        let st = shear_state(&g);
        let parts = decompose_pressure(
            &st,
            &g,
            &bc(),
            &ModelParams::normalized(),
            &RegLevels::untruncated(),
            Stage::Full,
        )
        .unwrap();
        // Sum identity is exact by construction.
        let mut err = 0.0_f64;
        for (((t, a), b), c) in parts
            .p_total
            .data
            .iter()
            .zip(&parts.p1.data)
            .zip(&parts.p2.data)
            .zip(&parts.p3.data)
        {
            err = err.max((t - (a + b + c)).abs());
        }
        let scale0 = parts.p_total.max_abs().max(1.0);
        assert!(err <= 1e-14 * scale0, "sum identity defect {err}");
        // All parts mean-zero.
        for p in [&parts.p1, &parts.p2, &parts.p3, &parts.p_total] {
            let mean = p.data.iter().sum::<f64>() / p.data.len() as f64;
            assert!(mean.abs() <= 1e-12 * p.max_abs().max(1.0));
        }
        // p3 harmonic away from walls up to solver tolerance.
        let scale = parts.p_total.max_abs().max(1.0);
        assert!(
            parts.harmonic_residual <= 1e-8 * scale,
            "harmonic residual {} vs scale {}",
            parts.harmonic_residual,
            scale
        );
    }

    #[test]
    fn free_slip_walls_give_zero_wall_pressure() {
        // With free-slip walls the wall traction vanishes, so p3 = 0 up to
        // solver tolerance.
        let g = grid(16, 16);
        let st = shear_state(&g);
        let mut free = bc();
        free.y0.law = SlipLaw::free_slip();
        free.y1.law = SlipLaw::free_slip();
        let parts = decompose_pressure(
            &st,
            &g,
            &free,
            &ModelParams::normalized(),
            &RegLevels::untruncated(),
            Stage::Full,
        )
        .unwrap();
        let scale = parts.p_total.max_abs().max(1.0);
        assert!(
            parts.p3.max_abs() <= 1e-9 * scale,
            "p3 magnitude {}",
            parts.p3.max_abs()
        );
    }
}
