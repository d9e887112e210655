//! 2D MAC operators: divergence/gradient pair, energy-conserving momentum
//! convection, upwind scalar convection, symmetric-gradient viscous force.
//!
//! Staggering: u on x-normal faces (nx x ny, u(i,j) at x = i*dx), v on
//! y-normal faces (nx x (ny+1), v(i,j) at y = j*dy, wall rows j = 0 and
//! j = ny identically zero), scalars and pressure at centers. Periodic in x.
//!
//! The convection operator is the divergence form with arithmetic face
//! averages; together with discrete incompressibility it is skew-symmetric,
//! so it neither creates nor destroys kinetic energy (to round-off). The
//! discrete gradient is the negative adjoint of the discrete divergence
//! under the natural inner products, which makes the projection Poisson
//! operator symmetric positive semidefinite.

use crate::core::{Array2, BoundarySpec, Grid, WallId};
use crate::cutoffs::{g_cut, Level};
use crate::error::Result;
use crate::operators::{wall_coupling, wall_law_ctx};

/// Discrete divergence of a MAC velocity at cell centers.
pub fn divergence(u: &Array2, v: &Array2, grid: &Grid) -> Array2 {
    let (nx, ny) = (grid.nx, grid.ny);
    let mut d = Array2::zeros(nx, ny);
    for j in 0..ny {
        for i in 0..nx {
            let du = (u[(if i + 1 < nx { i + 1 } else { 0 }, j)] - u[(i, j)]) / grid.dx;
            let dv = (v[(i, j + 1)] - v[(i, j)]) / grid.dy;
            d[(i, j)] = du + dv;
        }
    }
    d
}

/// Discrete gradient of a cell-centered scalar, on faces. The y-gradient is
/// zero on the wall rows (no normal flow is created across walls).
pub fn grad_faces(p: &Array2, grid: &Grid) -> (Array2, Array2) {
    let (nx, ny) = (grid.nx, grid.ny);
    let mut gu = Array2::zeros(nx, ny);
    let mut gv = Array2::zeros(nx, ny + 1);
    for j in 0..ny {
        for i in 0..nx {
            let im = if i == 0 { nx - 1 } else { i - 1 };
            gu[(i, j)] = (p[(i, j)] - p[(im, j)]) / grid.dx;
        }
    }
    for j in 1..ny {
        for i in 0..nx {
            gv[(i, j)] = (p[(i, j)] - p[(i, j - 1)]) / grid.dy;
        }
    }
    (gu, gv)
}

#[inline]
pub(crate) fn ip(i: usize, nx: usize) -> usize {
    if i + 1 < nx {
        i + 1
    } else {
        0
    }
}

#[inline]
pub(crate) fn im(i: usize, nx: usize) -> usize {
    if i == 0 {
        nx - 1
    } else {
        i - 1
    }
}

/// |v|^2 interpolated to the u-face (i,j).
pub(crate) fn vsq_at_uface(u: &Array2, v: &Array2, i: usize, j: usize, nx: usize) -> f64 {
    let uu = u[(i, j)] * u[(i, j)];
    let vl = 0.5 * (v[(im(i, nx), j)] + v[(im(i, nx), j + 1)]);
    let vr = 0.5 * (v[(i, j)] + v[(i, j + 1)]);
    let vf = 0.5 * (vl + vr);
    uu + vf * vf
}

/// |v|^2 interpolated to the interior v-face (i,j), 1 <= j <= ny-1.
pub(crate) fn vsq_at_vface(u: &Array2, v: &Array2, i: usize, j: usize, nx: usize) -> f64 {
    let ub = 0.5 * (u[(i, j - 1)] + u[(ip(i, nx), j - 1)]);
    let ut = 0.5 * (u[(i, j)] + u[(ip(i, nx), j)]);
    let uf = 0.5 * (ub + ut);
    uf * uf + v[(i, j)] * v[(i, j)]
}

/// Momentum convection tendency (-G_k(|v|^2) * div(v (x) v)) on faces,
/// divergence form with arithmetic face averages. With k_conv = inf the
/// damping factor is identically 1 and the operator is exactly
/// skew-symmetric against the MAC inner product whenever div v = 0.
pub fn conv_momentum(
    u: &Array2,
    v: &Array2,
    grid: &Grid,
    k_conv: Level,
) -> (Array2, Array2) {
    let (nx, ny) = (grid.nx, grid.ny);
    let (dx, dy) = (grid.dx, grid.dy);
    let mut cu = Array2::zeros(nx, ny);
    let mut cv = Array2::zeros(nx, ny + 1);

    // u-momentum: d/dx(u u) + d/dy(v u) at x-faces.
    for j in 0..ny {
        for i in 0..nx {
            // Cell-centered u averages left/right of the face.
            let uc_r = 0.5 * (u[(i, j)] + u[(ip(i, nx), j)]);
            let uc_l = 0.5 * (u[(im(i, nx), j)] + u[(i, j)]);
            let fxx = (uc_r * uc_r - uc_l * uc_l) / dx;
            // Corner fluxes above/below: v averaged in x, u averaged in y.
            // Wall corners carry v = 0 so the flux vanishes there.
            let v_top = 0.5 * (v[(im(i, nx), j + 1)] + v[(i, j + 1)]);
            let u_top = if j + 1 < ny {
                0.5 * (u[(i, j)] + u[(i, j + 1)])
            } else {
                0.0
            };
            let v_bot = 0.5 * (v[(im(i, nx), j)] + v[(i, j)]);
            let u_bot = if j > 0 {
                0.5 * (u[(i, j - 1)] + u[(i, j)])
            } else {
                0.0
            };
            let fyx = (v_top * u_top - v_bot * u_bot) / dy;
            let g = g_cut(k_conv, vsq_at_uface(u, v, i, j, nx));
            cu[(i, j)] = -g * (fxx + fyx);
        }
    }

    // v-momentum: d/dx(u v) + d/dy(v v) at interior y-faces.
    for j in 1..ny {
        for i in 0..nx {
            let u_r = 0.5 * (u[(ip(i, nx), j - 1)] + u[(ip(i, nx), j)]);
            let v_r = 0.5 * (v[(i, j)] + v[(ip(i, nx), j)]);
            let u_l = 0.5 * (u[(i, j - 1)] + u[(i, j)]);
            let v_l = 0.5 * (v[(im(i, nx), j)] + v[(i, j)]);
            let fxy = (u_r * v_r - u_l * v_l) / dx;
            let vc_t = 0.5 * (v[(i, j)] + v[(i, j + 1)]);
            let vc_b = 0.5 * (v[(i, j - 1)] + v[(i, j)]);
            let fyy = (vc_t * vc_t - vc_b * vc_b) / dy;
            let g = g_cut(k_conv, vsq_at_vface(u, v, i, j, nx));
            cv[(i, j)] = -g * (fxy + fyy);
        }
    }
    (cu, cv)
}

/// Upwind convection tendency of a cell-centered scalar: -div(c v) with
/// first-order upwind face values. Wall faces carry no flux (v = 0 there),
/// so the total content sum(c)*dx*dy is conserved exactly when div v = 0.
pub fn conv_scalar_upwind(c: &Array2, u: &Array2, v: &Array2, grid: &Grid) -> Array2 {
    let (nx, ny) = (grid.nx, grid.ny);
    let mut out = Array2::zeros(nx, ny);
    let up = |vel: f64, lo: f64, hi: f64| if vel >= 0.0 { vel * lo } else { vel * hi };
    for j in 0..ny {
        for i in 0..nx {
            let fx_r = up(u[(ip(i, nx), j)], c[(i, j)], c[(ip(i, nx), j)]);
            let fx_l = up(u[(i, j)], c[(im(i, nx), j)], c[(i, j)]);
            let fy_t = if j + 1 < ny {
                up(v[(i, j + 1)], c[(i, j)], c[(i, j + 1)])
            } else {
                0.0
            };
            let fy_b = if j > 0 {
                up(v[(i, j)], c[(i, j - 1)], c[(i, j)])
            } else {
                0.0
            };
            out[(i, j)] = -((fx_r - fx_l) / grid.dx + (fy_t - fy_b) / grid.dy);
        }
    }
    out
}

/// |D(v)|^2 at cell centers: diagonal entries from center differences,
/// off-diagonal from the four surrounding corner values. Wall corners
/// contribute no shear (consistent with the 1D convention that wall faces
/// carry no production; the wall layer is bookkept by the energy ledger).
pub fn dv_sq_2d(u: &Array2, v: &Array2, grid: &Grid) -> Array2 {
    let (nx, ny) = (grid.nx, grid.ny);
    let (dx, dy) = (grid.dx, grid.dy);
    // D12 at corners (i,j), corner at (i*dx, j*dy), j = 0..=ny.
    let d12 = |i: usize, j: usize| -> f64 {
        if j == 0 || j == ny {
            return 0.0;
        }
        let dudy = (u[(i, j)] - u[(i, j - 1)]) / dy;
        let dvdx = (v[(i, j)] - v[(im(i, nx), j)]) / dx;
        0.5 * (dudy + dvdx)
    };
    let mut out = Array2::zeros(nx, ny);
    for j in 0..ny {
        for i in 0..nx {
            let d11 = (u[(ip(i, nx), j)] - u[(i, j)]) / dx;
            let d22 = (v[(i, j + 1)] - v[(i, j)]) / dy;
            let c1 = d12(i, j);
            let c2 = d12(ip(i, nx), j);
            let c3 = d12(i, j + 1);
            let c4 = d12(ip(i, nx), j + 1);
            let off = 0.25 * (c1 * c1 + c2 * c2 + c3 * c3 + c4 * c4);
            out[(i, j)] = d11 * d11 + d22 * d22 + 2.0 * off;
        }
    }
    out
}

/// Divergence of the viscous stress 2 nu D(v) on faces, with `nu` the full
/// cell-centered viscosity (2 nu0 T_k(mu) included by the caller). Corner
/// viscosities are 4-point arithmetic averages.
///
/// `include_wall` controls whether the wall shear rows enter: with `true`
/// the tangential wall traction from the slip laws is applied on the wall
/// corner rows; with `false` those rows carry zero stress, which isolates
/// the interior viscous force (used by the pressure decomposition).
pub fn visc_force(
    u: &Array2,
    v: &Array2,
    nu: &Array2,
    grid: &Grid,
    bc: &BoundarySpec,
    b: &Array2,
    omega: &Array2,
    t: f64,
    include_wall: bool,
) -> Result<(Array2, Array2)> {
    let (nx, ny) = (grid.nx, grid.ny);
    let (dx, dy) = (grid.dx, grid.dy);
    let mut fu = Array2::zeros(nx, ny);
    let mut fv = Array2::zeros(nx, ny + 1);

    // 2 nu D12 at interior corners.
    let tau12 = |i: usize, j: usize| -> f64 {
        let dudy = (u[(i, j)] - u[(i, j - 1)]) / dy;
        let dvdx = (v[(i, j)] - v[(im(i, nx), j)]) / dx;
        let nu_c = 0.25
            * (nu[(i, j)] + nu[(im(i, nx), j)] + nu[(i, j - 1)] + nu[(im(i, nx), j - 1)]);
        nu_c * (dudy + dvdx)
    };

    // Wall shear on the bottom/top corner rows of the u-stencil.
    let mut shear_bot = vec![0.0; nx];
    let mut shear_top = vec![0.0; nx];
    if include_wall {
        for i in 0..nx {
            let x = i as f64 * dx;
            let bj = 0.5 * (b[(i, 0)] + b[(im(i, nx), 0)]);
            let wj = 0.5 * (omega[(i, 0)] + omega[(im(i, nx), 0)]);
            let ctx = wall_law_ctx(&bc.y0.scalar, t, x, bj, wj);
            let nu_w = 0.5 * (nu[(i, 0)] + nu[(im(i, nx), 0)]);
            shear_bot[i] = wall_coupling(&bc.y0.law, &ctx, u[(i, 0)], nu_w, dy, WallId::Y0)?.flux;

            let bj = 0.5 * (b[(i, ny - 1)] + b[(im(i, nx), ny - 1)]);
            let wj = 0.5 * (omega[(i, ny - 1)] + omega[(im(i, nx), ny - 1)]);
            let ctx = wall_law_ctx(&bc.y1.scalar, t, x, bj, wj);
            let nu_w = 0.5 * (nu[(i, ny - 1)] + nu[(im(i, nx), ny - 1)]);
            shear_top[i] =
                wall_coupling(&bc.y1.law, &ctx, u[(i, ny - 1)], nu_w, dy, WallId::Y1)?.flux;
        }
    }

    // u-momentum: d/dx(2 nu D11) + d/dy(2 nu D12). The +y-oriented viscous
    // flux of u through the face above/below the cell is the interior corner
    // shear, or the (already +y-oriented) wall coupling flux on wall rows.
    for j in 0..ny {
        for i in 0..nx {
            let d11_r = (u[(ip(i, nx), j)] - u[(i, j)]) / dx;
            let d11_l = (u[(i, j)] - u[(im(i, nx), j)]) / dx;
            let sxx = (nu[(i, j)] * d11_r - nu[(im(i, nx), j)] * d11_l) / dx;
            let flux_above = if j + 1 < ny { tau12(i, j + 1) } else { shear_top[i] };
            let flux_below = if j > 0 { tau12(i, j) } else { shear_bot[i] };
            fu[(i, j)] = sxx + (flux_above - flux_below) / dy;
        }
    }

    // v-momentum on interior faces: d/dx(2 nu D12) + d/dy(2 nu D22).
    for j in 1..ny {
        for i in 0..nx {
            let t_r = tau12_at(u, v, nu, dx, dy, ip(i, nx), j, nx);
            let t_l = tau12_at(u, v, nu, dx, dy, i, j, nx);
            let sxy = (t_r - t_l) / dx;
            let d22_t = (v[(i, j + 1)] - v[(i, j)]) / dy;
            let d22_b = (v[(i, j)] - v[(i, j - 1)]) / dy;
            let syy = (nu[(i, j)] * d22_t - nu[(i, j - 1)] * d22_b) / dy;
            fv[(i, j)] = sxy + syy;
        }
    }
    Ok((fu, fv))
}

fn tau12_at(
    u: &Array2,
    v: &Array2,
    nu: &Array2,
    dx: f64,
    dy: f64,
    i: usize,
    j: usize,
    nx: usize,
) -> f64 {
    let dudy = (u[(i, j)] - u[(i, j - 1)]) / dy;
    let dvdx = (v[(i, j)] - v[(im(i, nx), j)]) / dx;
    let nu_c =
        0.25 * (nu[(i, j)] + nu[(im(i, nx), j)] + nu[(i, j - 1)] + nu[(im(i, nx), j - 1)]);
    nu_c * (dudy + dvdx)
}

/// MAC kinetic energy (1/2) * sum(u^2 + v^2) * dx * dy.
pub fn kinetic_energy(u: &Array2, v: &Array2, grid: &Grid) -> f64 {
    let su: f64 = u.data.iter().map(|x| x * x).sum();
    let sv: f64 = v.data.iter().map(|x| x * x).sum();
    0.5 * (su + sv) * grid.dx * grid.dy
}

/// MAC inner product of two face pairs, weighted by cell volume.
pub fn face_dot(au: &Array2, av: &Array2, bu: &Array2, bv: &Array2, grid: &Grid) -> f64 {
    let du: f64 = au.data.iter().zip(&bu.data).map(|(a, b)| a * b).sum();
    let dv: f64 = av.data.iter().zip(&bv.data).map(|(a, b)| a * b).sum();
    (du + dv) * grid.dx * grid.dy
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::{ScalarBc, WallSpec};
    use crate::slipbc::SlipLaw;

    fn grid(nx: usize, ny: usize) -> Grid {
        Grid::channel_2d(nx, ny, 1.0 / nx as f64, 1.0 / ny as f64)
    }

    /// Exactly divergence-free MAC field from a corner streamfunction that
    /// is constant along both walls.
    fn solenoidal(grid: &Grid) -> (Array2, Array2) {
        let (nx, ny) = (grid.nx, grid.ny);
        let psi = |i: usize, j: usize| -> f64 {
            let x = (i % nx) as f64 * grid.dx; // wrap so periodicity is exact

            let y = j as f64 * grid.dy;
            (2.0 * std::f64::consts::PI * x).sin() * (std::f64::consts::PI * y / grid.ly()).sin()
        };
        let mut u = Array2::zeros(nx, ny);
        let mut v = Array2::zeros(nx, ny + 1);
        for j in 0..ny {
            for i in 0..nx {
                u[(i, j)] = (psi(i, j + 1) - psi(i, j)) / grid.dy;
            }
        }
        for j in 1..ny {
            for i in 0..nx {
                v[(i, j)] = -(psi(i + 1, j) - psi(i, j)) / grid.dx;
            }
        }
        (u, v)
    }

    fn bc() -> BoundarySpec {
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

    #[test]
    fn streamfunction_field_is_divergence_free() {
        let g = grid(16, 12);
        let (u, v) = solenoidal(&g);
        let d = divergence(&u, &v, &g);
        assert!(d.max_abs() < 1e-12, "max |div| = {}", d.max_abs());
    }

    #[test]
    fn gradient_is_negative_adjoint_of_divergence() {
        let g = grid(8, 8);
        let mut p = Array2::zeros(8, 8);
        let mut u = Array2::zeros(8, 8);
        let mut v = Array2::zeros(8, 9);
        for j in 0..8 {
            for i in 0..8 {
                p[(i, j)] = ((3 * i + 5 * j) as f64 * 0.7).sin();
                u[(i, j)] = ((i * j + 1) as f64 * 0.3).cos();
            }
        }
        for j in 1..8 {
            for i in 0..8 {
                v[(i, j)] = ((2 * i + j) as f64 * 0.9).sin();
            }
        }
        let d = divergence(&u, &v, &g);
        let (gu, gv) = grad_faces(&p, &g);
        let lhs: f64 = p.data.iter().zip(&d.data).map(|(a, b)| a * b).sum::<f64>() * g.dx * g.dy;
        let rhs = -face_dot(&gu, &gv, &u, &v, &g);
        assert!((lhs - rhs).abs() < 1e-12 * lhs.abs().max(1.0));
    }

    #[test]
    fn convection_is_skew_symmetric_without_damping() {
        let g = grid(16, 16);
        let (u, v) = solenoidal(&g);
        let (cu, cv) = conv_momentum(&u, &v, &g, f64::INFINITY);
        let work = face_dot(&cu, &cv, &u, &v, &g);
        let scale = kinetic_energy(&u, &v, &g);
        assert!(
            work.abs() <= 1e-12 * scale.max(1.0),
            "convective energy production {work} vs scale {scale}"
        );
    }

    #[test]
    fn upwind_scalar_conserves_total_content() {
        let g = grid(12, 10);
        let (u, v) = solenoidal(&g);
        let mut c = Array2::zeros(12, 10);
        for j in 0..10 {
            for i in 0..12 {
                c[(i, j)] = 1.0 + 0.5 * ((i + 2 * j) as f64 * 0.4).sin();
            }
        }
        let tc = conv_scalar_upwind(&c, &u, &v, &g);
        let total: f64 = tc.data.iter().sum::<f64>() * g.dx * g.dy;
        assert!(total.abs() < 1e-12, "total tendency {total}");
    }

    #[test]
    fn upwind_constant_scalar_has_zero_tendency_for_solenoidal_velocity() {
        let g = grid(8, 8);
        let (u, v) = solenoidal(&g);
        let c = Array2::filled(8, 8, 3.5);
        let tc = conv_scalar_upwind(&c, &u, &v, &g);
        assert!(tc.max_abs() < 1e-12);
    }

    #[test]
    fn dv_sq_shear_flow_matches_1d_value() {
        // u = 2y, v = 0: |D|^2 = (1/2)(du/dy)^2 = 2 in the interior.
        let g = grid(4, 16);
        let mut u = Array2::zeros(4, 16);
        for j in 0..16 {
            for i in 0..4 {
                u[(i, j)] = 2.0 * g.yc(j);
            }
        }
        let v = Array2::zeros(4, 17);
        let d = dv_sq_2d(&u, &v, &g);
        for j in 1..15 {
            assert!((d[(2, j)] - 2.0).abs() < 1e-12, "j={j}: {}", d[(2, j)]);
        }
        assert!(d.data.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn visc_force_zero_for_rigid_motion() {
        // Constant u, zero v: D(v) = 0, free-slip walls exert no force.
        let g = grid(8, 8);
        let u = Array2::filled(8, 8, 1.7);
        let v = Array2::zeros(8, 9);
        let nu = Array2::filled(8, 8, 0.3);
        let ones = Array2::filled(8, 8, 1.0);
        let (fu, fv) =
            visc_force(&u, &v, &nu, &g, &bc(), &ones, &ones, 0.0, true).unwrap();
        assert!(fu.max_abs() < 1e-13);
        assert!(fv.max_abs() < 1e-13);
    }

    #[test]
    fn visc_force_is_dissipative() {
        let g = grid(16, 16);
        let (u, v) = solenoidal(&g);
        let nu = Array2::filled(16, 16, 0.25);
        let ones = Array2::filled(16, 16, 1.0);
        let (fu, fv) =
            visc_force(&u, &v, &nu, &g, &bc(), &ones, &ones, 0.0, false).unwrap();
        let work = face_dot(&fu, &fv, &u, &v, &g);
        assert!(work < 0.0, "viscous work must be negative, got {work}");
    }
}
