//! The 2D MAC stepper: explicit upwind advection under a CFL guard,
//! implicit scalar diffusion and implicit coupled viscous solve by
//! conjugate gradients, slip-law walls resolved branch-exactly, and a
//! Leray projection closing each step.
//!
//! The same reaction kernels as in 1D run pointwise on the cell-centered
//! scalars, so the positivity and min/max arguments carry over verbatim.
//! The kinetic-energy terms are recorded but the step does not claim the
//! round-off-exact identity of the 1D reference scheme (projection and
//! upwinding each carry their own O(dt) energy footprint).

use crate::core::{Formulation, Scenario, ScalarBc, Splitting, State2, Array2};
use crate::cutoffs::t_cut;
use crate::error::{Error, Result};
use crate::linalg::cg;
use crate::operators::d2::{conv_momentum, conv_scalar_upwind, dv_sq_2d, kinetic_energy};
use crate::operators::{harmonic_face, mu_field, mu_point, Stage};
use crate::slipbc::LawCtx;

use super::{react, ReactionTally, StepRecord};
use crate::stepper::one_d;

/// Iterative tolerance of the implicit 2D solves.
const SOLVE_TOL: f64 = 1e-11;

#[inline]
fn ip(i: usize, nx: usize) -> usize {
    if i + 1 < nx {
        i + 1
    } else {
        0
    }
}

#[inline]
fn im(i: usize, nx: usize) -> usize {
    if i == 0 {
        nx - 1
    } else {
        i - 1
    }
}

/// Implicit diffusion of one cell-centered scalar by CG. `cfx[(i,j)]` is
/// the face coefficient between cells (i-1,j) and (i,j); `cfy[(i,j)]`
/// between (i,j-1) and (i,j) with wall rows used only for Dirichlet walls.
fn scalar_diffusion_2d(
    c: &mut Array2,
    cfx: &Array2,
    cfy: &Array2,
    wall: [Option<f64>; 2],
    dt: f64,
    dx: f64,
    dy: f64,
) -> Result<()> {
    let (nx, ny) = (c.nx, c.ny);
    let rx = dt / (dx * dx);
    let ry = dt / (dy * dy);
    let apply = |v: &[f64], out: &mut [f64]| {
        for j in 0..ny {
            for i in 0..nx {
                let id = j * nx + i;
                let mut acc = v[id];
                let e = cfx[(ip(i, nx), j)];
                let wst = cfx[(i, j)];
                acc += rx * (e * (v[id] - v[j * nx + ip(i, nx)]) + wst * (v[id] - v[j * nx + im(i, nx)]));
                if j + 1 < ny {
                    acc += ry * cfy[(i, j + 1)] * (v[id] - v[(j + 1) * nx + i]);
                } else if wall[1].is_some() {
                    acc += 2.0 * ry * cfy[(i, ny)] * v[id];
                }
                if j > 0 {
                    acc += ry * cfy[(i, j)] * (v[id] - v[(j - 1) * nx + i]);
                } else if wall[0].is_some() {
                    acc += 2.0 * ry * cfy[(i, 0)] * v[id];
                }
                out[id] = acc;
            }
        }
    };
    let mut rhs = c.data.clone();
    if let Some(g) = wall[0] {
        for i in 0..nx {
            rhs[i] += 2.0 * ry * cfy[(i, 0)] * g;
        }
    }
    if let Some(g) = wall[1] {
        for i in 0..nx {
            rhs[(ny - 1) * nx + i] += 2.0 * ry * cfy[(i, ny)] * g;
        }
    }
    let n = rhs.len();
    c.data = cg(apply, &rhs, SOLVE_TOL, 60 * n.max(100))?;
    Ok(())
}

/// One step of the 2D scheme (b-formulation only).
pub(super) fn step_2d(s: &State2, sc: &Scenario) -> Result<(State2, StepRecord)> {
    debug_assert!(sc.scheme.formulation == Formulation::BForm);
    let g = &sc.grid;
    let (nx, ny) = (g.nx, g.ny);
    let (dx, dy) = (g.dx, g.dy);
    let dt = sc.dt;
    let t1 = s.t + dt;
    let lv = &sc.levels;
    let p = &sc.params;
    let bc = &sc.boundary;
    let stage = Stage::from_levels(lv);
    let mnk = stage == Stage::MNK;

    // CFL guard for the explicit advection.
    let max_u = s.u.max_abs();
    let max_v = s.v.max_abs();
    let cfl = dt * (max_u / dx).max(max_v / dy);
    if cfl > sc.scheme.cfl_guard {
        return Err(Error::CflViolation {
            cfl,
            guard: sc.scheme.cfl_guard,
        });
    }

    let mut b = s.b.clone();
    let mut w = s.omega.clone();
    let mut u = s.u.clone();
    let mut v = s.v.clone();

    // Frozen coefficients.
    let mu0 = mu_field(&s.b.data, &s.omega.data, lv, stage)?;
    let nu = Array2 {
        nx,
        ny,
        data: mu0
            .iter()
            .map(|&m| p.two_nu0() * t_cut(lv.k_visc(), m))
            .collect(),
    };
    // Scalar face coefficients.
    let cb: Vec<f64> = mu0.iter().map(|&m| p.k3() * t_cut(lv.n_diff(), m)).collect();
    let mut cbx = Array2::zeros(nx, ny);
    let mut cby = Array2::zeros(nx, ny + 1);
    let mut cwx = Array2::zeros(nx, ny);
    let mut cwy = Array2::zeros(nx, ny + 1);
    for j in 0..ny {
        for i in 0..nx {
            let l = j * nx + im(i, nx);
            let r = j * nx + i;
            cbx[(i, j)] = harmonic_face(cb[l], cb[r]);
            let bf = 0.5 * (s.b.data[l] + s.b.data[r]);
            let wf = 0.5 * (s.omega.data[l] + s.omega.data[r]);
            cwx[(i, j)] = p.k1() * t_cut(lv.n_diff(), mu_point(bf, wf, lv, stage)?);
        }
    }
    for j in 1..ny {
        for i in 0..nx {
            let lo = (j - 1) * nx + i;
            let hi = j * nx + i;
            cby[(i, j)] = harmonic_face(cb[lo], cb[hi]);
            let bf = 0.5 * (s.b.data[lo] + s.b.data[hi]);
            let wf = 0.5 * (s.omega.data[lo] + s.omega.data[hi]);
            cwy[(i, j)] = p.k1() * t_cut(lv.n_diff(), mu_point(bf, wf, lv, stage)?);
        }
    }
    let wall_b = [
        dirichlet_b(&bc.y0.scalar, t1),
        dirichlet_b(&bc.y1.scalar, t1),
    ];
    let wall_w = [
        dirichlet_omega(&bc.y0.scalar, t1),
        dirichlet_omega(&bc.y1.scalar, t1),
    ];
    for i in 0..nx {
        if let (Some(bg), Some(wg)) = (wall_b[0], wall_w[0]) {
            cby[(i, 0)] = p.k3() * t_cut(lv.n_diff(), mu_point(bg, wg, lv, stage)?);
            cwy[(i, 0)] = p.k1()
                * t_cut(
                    lv.n_diff(),
                    mu_point(
                        0.5 * (bg + s.b[(i, 0)]),
                        0.5 * (wg + s.omega[(i, 0)]),
                        lv,
                        stage,
                    )?,
                );
        }
        if let (Some(bg), Some(wg)) = (wall_b[1], wall_w[1]) {
            cby[(i, ny)] = p.k3() * t_cut(lv.n_diff(), mu_point(bg, wg, lv, stage)?);
            cwy[(i, ny)] = p.k1()
                * t_cut(
                    lv.n_diff(),
                    mu_point(
                        0.5 * (bg + s.b[(i, ny - 1)]),
                        0.5 * (wg + s.omega[(i, ny - 1)]),
                        lv,
                        stage,
                    )?,
                );
        }
    }

    // Production from the old velocity field.
    let dsq = dv_sq_2d(&s.u, &s.v, g);
    let production = |mu: &[f64], dsq: &Array2| -> Vec<f64> {
        dsq.data
            .iter()
            .zip(mu)
            .map(|(&d2, &m)| {
                let quot = if lv.n_prod().is_finite() {
                    1.0 + d2 / lv.n_prod()
                } else {
                    1.0
                };
                p.k4() * t_cut(lv.k_visc(), m) * d2 / quot
            })
            .collect()
    };
    let prod = production(&mu0, &dsq);

    // (1) Reaction.
    let mut tally = ReactionTally::default();
    let tau1 = match sc.scheme.splitting {
        Splitting::Lie => dt,
        Splitting::Strang => 0.5 * dt,
    };
    tally.add(react(
        sc.scheme.splitting,
        &mut b.data,
        &mut w.data,
        &prod,
        tau1,
        p.k2(),
        lv.m,
        mnk,
    )?);

    // (2) Transport-diffusion: explicit upwind advection, implicit diffusion.
    let tb = conv_scalar_upwind(&b, &s.u, &s.v, g);
    for (x, t) in b.data.iter_mut().zip(&tb.data) {
        *x += dt * t;
    }
    let tw = conv_scalar_upwind(&w, &s.u, &s.v, g);
    for (x, t) in w.data.iter_mut().zip(&tw.data) {
        *x += dt * t;
    }
    scalar_diffusion_2d(&mut b, &cbx, &cby, wall_b, dt, dx, dy)?;
    scalar_diffusion_2d(&mut w, &cwx, &cwy, wall_w, dt, dx, dy)?;

    // (3) Momentum: explicit damped convection, implicit viscous solve.
    let (cu, cv) = conv_momentum(&s.u, &s.v, g, lv.k_conv());
    for (x, t) in u.data.iter_mut().zip(&cu.data) {
        *x += dt * t;
    }
    for (x, t) in v.data.iter_mut().zip(&cv.data) {
        *x += dt * t;
    }
    let (wall_s, wall_vtau, wall_bcoef) =
        momentum_implicit_2d(&mut u, &mut v, &nu, g, sc, &b, &w, t1)?;

    // (4) Projection.
    let p_new = crate::pressure::project(&mut u, &mut v, g)?;

    // Second reaction half under Strang.
    if sc.scheme.splitting == Splitting::Strang {
        let mu_now = mu_field(&b.data, &w.data, lv, stage)?;
        let dsq_now = dv_sq_2d(&u, &v, g);
        let prod2 = production(&mu_now, &dsq_now);
        tally.add(react(
            sc.scheme.splitting,
            &mut b.data,
            &mut w.data,
            &prod2,
            0.5 * dt,
            p.k2(),
            lv.m,
            mnk,
        )?);
    }

    // Bookkeeping.
    let vol = dx * dy;
    let mut rec = StepRecord {
        t: t1,
        dt,
        identity_exact: false,
        ..Default::default()
    };
    rec.kinetic = kinetic_energy(&u, &v, g);
    rec.turbulent = p.energy_coeff() * b.data.iter().sum::<f64>() * vol;
    rec.d_kinetic = rec.kinetic - kinetic_energy(&s.u, &s.v, g);
    let mu1 = mu_field(&b.data, &w.data, lv, stage)?;
    let dsq1 = dv_sq_2d(&u, &v, g);
    rec.int_diss = dt
        * dsq1
            .data
            .iter()
            .zip(&mu1)
            .map(|(&d2, &m)| p.two_nu0() * t_cut(lv.k_visc(), m) * d2)
            .sum::<f64>()
        * vol;
    let mut wdiss = 0.0;
    let mut wwork = 0.0;
    for i in 0..nx {
        for wl in 0..2 {
            let sgn_s = wall_s[wl][i];
            let vt = wall_vtau[wl][i];
            wdiss += dt * sgn_s * sgn_s / wall_bcoef[wl][i] * dx;
            wwork += dt * sgn_s * vt * dx;
        }
    }
    rec.wall_diss = wdiss;
    rec.wall_work = wwork;
    rec.wall_s = [
        wall_s[0].iter().sum::<f64>() / nx as f64,
        wall_s[1].iter().sum::<f64>() / nx as f64,
    ];
    rec.wall_vtau = [
        wall_vtau[0].iter().sum::<f64>() / nx as f64,
        wall_vtau[1].iter().sum::<f64>() / nx as f64,
    ];
    rec.prod_int = tally.prod * vol;
    rec.sink_b_int = tally.sink_b * vol;
    rec.sink_omega_int = tally.sink_omega * vol;
    rec.db_reaction = tally.db * vol;
    rec.db_total = (b.data.iter().sum::<f64>() - s.b.data.iter().sum::<f64>()) * vol;
    rec.omega_min = w.data.iter().cloned().fold(f64::INFINITY, f64::min);
    rec.omega_max = w.data.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    rec.b_min = b.data.iter().cloned().fold(f64::INFINITY, f64::min);
    rec.budget_logb = b
        .data
        .iter()
        .map(|&x| x.abs().max(1e-300).ln().abs())
        .sum::<f64>()
        * vol;
    rec.budget_diss = dt
        * dsq1
            .data
            .iter()
            .zip(&mu1)
            .zip(&b.data)
            .map(|((&d2, &m), &bj)| {
                (1.0 + 1.0 / bj.abs().max(1e-300)) * t_cut(lv.k_visc(), m) * d2
            })
            .sum::<f64>()
        * vol;
    let mut gradb = 0.0;
    for j in 0..ny {
        for i in 0..nx {
            let l = j * nx + im(i, nx);
            let r = j * nx + i;
            let bf = 0.5 * (b.data[l] + b.data[r]);
            let wf = 0.5 * (w.data[l] + w.data[r]);
            if bf > 0.0 {
                let gq = (b.data[r] - b.data[l]) / dx;
                gradb += mu_point(bf, wf, lv, stage)? * bf.powf(-1.5) * gq * gq;
            }
        }
    }
    for j in 1..ny {
        for i in 0..nx {
            let lo = (j - 1) * nx + i;
            let hi = j * nx + i;
            let bf = 0.5 * (b.data[lo] + b.data[hi]);
            let wf = 0.5 * (w.data[lo] + w.data[hi]);
            if bf > 0.0 {
                let gq = (b.data[hi] - b.data[lo]) / dy;
                gradb += mu_point(bf, wf, lv, stage)? * bf.powf(-1.5) * gq * gq;
            }
        }
    }
    rec.budget_gradb = dt * gradb * vol;

    Ok((
        State2 {
            t: t1,
            u,
            v,
            b,
            omega: w,
            p: p_new,
        },
        rec,
    ))
}

fn dirichlet_b(bc: &ScalarBc, t: f64) -> Option<f64> {
    match bc {
        ScalarBc::Dirichlet { b, .. } => Some(b.eval(t)),
        ScalarBc::ZeroFlux => None,
    }
}

fn dirichlet_omega(bc: &ScalarBc, t: f64) -> Option<f64> {
    match bc {
        ScalarBc::Dirichlet { omega, .. } => Some(omega.eval(t)),
        ScalarBc::ZeroFlux => None,
    }
}

type WallArrays = ([Vec<f64>; 2], [Vec<f64>; 2], [Vec<f64>; 2]);

/// Backward-Euler coupled viscous solve on the MAC pair (u, v-interior) by
/// CG, with the wall laws resolved branch-exactly per x-face. Returns the
/// per-face wall traction, slip velocity, and impedance for bookkeeping.
#[allow(clippy::too_many_arguments)]
fn momentum_implicit_2d(
    u: &mut Array2,
    v: &mut Array2,
    nu: &Array2,
    g: &crate::core::Grid,
    sc: &Scenario,
    b: &Array2,
    w: &Array2,
    t1: f64,
) -> Result<WallArrays> {
    let (nx, ny) = (g.nx, g.ny);
    let (dx, dy) = (g.dx, g.dy);
    let dt = sc.dt;
    let bc = &sc.boundary;
    let nun = |i: usize, j: usize| nu[(i, j)];
    // Corner viscosities (interior rows 1..ny).
    let nu_corner = |i: usize, j: usize| -> f64 {
        0.25 * (nun(i, j) + nun(im(i, nx), j) + nun(i, j - 1) + nun(im(i, nx), j - 1))
    };

    // Wall impedances and law contexts per x-face.
    let mut bcoef = [vec![0.0; nx], vec![0.0; nx]];
    let mut ctxs: [Vec<LawCtx>; 2] = [Vec::with_capacity(nx), Vec::with_capacity(nx)];
    for i in 0..nx {
        let x = i as f64 * dx;
        let nu_w0 = 0.5 * (nun(i, 0) + nun(im(i, nx), 0));
        let nu_w1 = 0.5 * (nun(i, ny - 1) + nun(im(i, nx), ny - 1));
        bcoef[0][i] = nu_w0 / (0.5 * dy);
        bcoef[1][i] = nu_w1 / (0.5 * dy);
        let b0 = 0.5 * (b[(i, 0)] + b[(im(i, nx), 0)]);
        let w0 = 0.5 * (w[(i, 0)] + w[(im(i, nx), 0)]);
        let b1 = 0.5 * (b[(i, ny - 1)] + b[(im(i, nx), ny - 1)]);
        let w1 = 0.5 * (w[(i, ny - 1)] + w[(im(i, nx), ny - 1)]);
        ctxs[0].push(crate::operators::wall_law_ctx(&bc.y0.scalar, t1, x, b0, w0));
        ctxs[1].push(crate::operators::wall_law_ctx(&bc.y1.scalar, t1, x, b1, w1));
    }

    let n_u = nx * ny;
    let n_v = nx * (ny - 1); // interior v rows j = 1..ny-1
    let vid = |i: usize, j: usize| n_u + (j - 1) * nx + i;

    let rhs_base: Vec<f64> = u
        .data
        .iter()
        .cloned()
        .chain((1..ny).flat_map(|j| (0..nx).map(move |i| (i, j))).map(|(i, j)| v[(i, j)]))
        .collect();

    let scale = u.max_abs().max(1.0);
    let laws = [&bc.y0.law, &bc.y1.law];
    let mut branches: [Vec<one_d::WallBranch>; 2] = [Vec::new(), Vec::new()];
    for wl in 0..2 {
        for i in 0..nx {
            let adj = if wl == 0 { u[(i, 0)] } else { u[(i, ny - 1)] };
            branches[wl].push(one_d::wall_branch_of(
                laws[wl],
                &ctxs[wl][i],
                adj,
                bcoef[wl][i],
            )?);
        }
    }

    let mut sol = rhs_base.clone();
    let mut converged = false;
    for _ in 0..sc.scheme.wall_iters.max(1) {
        // Affine wall data for this branch assignment.
        let mut alpha = [vec![0.0; nx], vec![0.0; nx]];
        let mut beta = [vec![0.0; nx], vec![0.0; nx]];
        for wl in 0..2 {
            for i in 0..nx {
                let (a, be) = one_d::branch_affine_of(
                    laws[wl],
                    &ctxs[wl][i],
                    branches[wl][i],
                    bcoef[wl][i],
                );
                alpha[wl][i] = a;
                beta[wl][i] = be;
            }
        }
        let apply = |x: &[f64], out: &mut [f64]| {
            let uu = |i: usize, j: usize| x[j * nx + i];
            let vv = |i: usize, j: usize| -> f64 {
                if j == 0 || j == ny {
                    0.0
                } else {
                    x[vid(i, j)]
                }
            };
            let tau12 = |i: usize, j: usize| -> f64 {
                let dudy = (uu(i, j) - uu(i, j - 1)) / dy;
                let dvdx = (vv(i, j) - vv(im(i, nx), j)) / dx;
                nu_corner(i, j) * (dudy + dvdx)
            };
            for j in 0..ny {
                for i in 0..nx {
                    let d11_r = (uu(ip(i, nx), j) - uu(i, j)) / dx;
                    let d11_l = (uu(i, j) - uu(im(i, nx), j)) / dx;
                    let sxx = (nun(i, j) * d11_r - nun(im(i, nx), j) * d11_l) / dx;
                    let f_above = if j + 1 < ny {
                        tau12(i, j + 1)
                    } else {
                        -(alpha[1][i] * uu(i, ny - 1))
                    };
                    let f_below = if j > 0 {
                        tau12(i, j)
                    } else {
                        alpha[0][i] * uu(i, 0)
                    };
                    out[j * nx + i] = uu(i, j) - dt * (sxx + (f_above - f_below) / dy);
                }
            }
            for j in 1..ny {
                for i in 0..nx {
                    let t_r = tau12(ip(i, nx), j);
                    let t_l = tau12(i, j);
                    let sxy = (t_r - t_l) / dx;
                    let d22_t = (vv(i, j + 1) - vv(i, j)) / dy;
                    let d22_b = (vv(i, j) - vv(i, j - 1)) / dy;
                    let syy = (nun(i, j) * d22_t - nun(i, j - 1) * d22_b) / dy;
                    out[vid(i, j)] = vv(i, j) - dt * (sxy + syy);
                }
            }
        };
        let mut rhs = rhs_base.clone();
        for i in 0..nx {
            rhs[i] -= dt * beta[0][i] / dy;
            rhs[(ny - 1) * nx + i] -= dt * beta[1][i] / dy;
        }
        sol = cg(apply, &rhs, SOLVE_TOL, 60 * rhs.len().max(100))?;

        // Re-derive branches at the new wall-adjacent velocities.
        let mut stable = true;
        for wl in 0..2 {
            for i in 0..nx {
                let adj = if wl == 0 {
                    sol[i]
                } else {
                    sol[(ny - 1) * nx + i]
                };
                let nb = one_d::wall_branch_of(laws[wl], &ctxs[wl][i], adj, bcoef[wl][i])?;
                if !one_d::branches_agree_of(branches[wl][i], nb, scale) {
                    stable = false;
                }
                branches[wl][i] = nb;
            }
        }
        if stable {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::WallSolve(format!(
            "2D wall branch iteration did not settle within {} sweeps",
            sc.scheme.wall_iters
        )));
    }

    // Commit and extract the wall pairs.
    u.data.copy_from_slice(&sol[..n_u]);
    for j in 1..ny {
        for i in 0..nx {
            v[(i, j)] = sol[vid(i, j)];
        }
    }
    let _ = n_v;
    let mut s_out = [vec![0.0; nx], vec![0.0; nx]];
    let mut vt_out = [vec![0.0; nx], vec![0.0; nx]];
    for wl in 0..2 {
        for i in 0..nx {
            let adj = if wl == 0 { u[(i, 0)] } else { u[(i, ny - 1)] };
            let (a, be) =
                one_d::branch_affine_of(laws[wl], &ctxs[wl][i], branches[wl][i], bcoef[wl][i]);
            let s_val = a * adj + be;
            s_out[wl][i] = s_val;
            vt_out[wl][i] = adj - s_val / bcoef[wl][i];
        }
    }
    Ok((s_out, vt_out, bcoef))
}
