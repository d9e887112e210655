//! Core data model: model constants, regularization levels, grids, fields,
//! simulation state, boundary specification, scenarios, and checkpoints.
//!
//! Everything here is a plain value; operations are pure or touch only their
//! own arguments, so core types can be shared read-only across workers.

mod boundary;
mod checkpoint;
mod field;
mod scenario;
mod state;

pub use boundary::{BoundarySpec, ScalarBc, Trace, WallId, WallSpec};
pub use checkpoint::{checkpoint_load, checkpoint_save};
pub use field::Array2;
pub use scenario::{
    validate_scenario, FieldSpec, Formulation, Model, OutputPlan, Scenario, SchemeOptions,
    Splitting, Violation,
};
pub use state::{SimState, State1, State2};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Model constants of the two-equation system.
///
/// The momentum viscosity is 2*nu0*(b/omega); kappa1/kappa3 scale the omega/b
/// diffusions, kappa2 the omega sink, kappa4 the b production. With the
/// `normalized` flag set, every effective constant used by the operators is
/// exactly 1 regardless of the stored values.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub nu0: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    pub kappa3: f64,
    pub kappa4: f64,
    pub normalized: bool,
}

impl ModelParams {
    /// Fully normalized constants: 2*nu0 = kappa1 = ... = kappa4 = 1.
    pub fn normalized() -> Self {
        Self {
            nu0: 0.5,
            kappa1: 1.0,
            kappa2: 1.0,
            kappa3: 1.0,
            kappa4: 1.0,
            normalized: true,
        }
    }

    /// Kolmogorov's original choice: kappa2 = 7/11 and kappa4 = 2*nu0 (which
    /// makes the total-energy coefficient 2*nu0/kappa4 exactly 1). The
    /// diffusion constants kappa1, kappa3 are not pinned by the historical
    /// model; the preset sets them to 2*nu0 as well.
    pub fn kolmogorov(nu0: f64) -> Self {
        Self {
            nu0,
            kappa1: 2.0 * nu0,
            kappa2: 7.0 / 11.0,
            kappa3: 2.0 * nu0,
            kappa4: 2.0 * nu0,
            normalized: false,
        }
    }

    /// Effective momentum-viscosity prefactor (the "2 nu0" in 2 nu0 mu D(v)).
    #[inline]
    pub fn two_nu0(&self) -> f64 {
        if self.normalized {
            1.0
        } else {
            2.0 * self.nu0
        }
    }

    #[inline]
    pub fn k1(&self) -> f64 {
        if self.normalized {
            1.0
        } else {
            self.kappa1
        }
    }

    #[inline]
    pub fn k2(&self) -> f64 {
        if self.normalized {
            1.0
        } else {
            self.kappa2
        }
    }

    #[inline]
    pub fn k3(&self) -> f64 {
        if self.normalized {
            1.0
        } else {
            self.kappa3
        }
    }

    #[inline]
    pub fn k4(&self) -> f64 {
        if self.normalized {
            1.0
        } else {
            self.kappa4
        }
    }

    /// Coefficient of b in the total energy E = |v|^2/2 + (2 nu0/kappa4) b.
    #[inline]
    pub fn energy_coeff(&self) -> f64 {
        self.two_nu0() / self.k4()
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("nu0", self.nu0),
            ("kappa1", self.kappa1),
            ("kappa2", self.kappa2),
            ("kappa3", self.kappa3),
            ("kappa4", self.kappa4),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::ScenarioInvalid(format!(
                    "model constant {name} must be a positive finite real, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Regularization strengths (k, n, m) of the approximation cascade; infinity
/// disables the corresponding truncation.
///
/// * k caps the effective viscosity, damps the momentum convection at large
///   |v|^2, and regularizes the wall friction;
/// * n floors and caps the scalar diffusivity and truncates the production;
/// * m floors omega in the coefficient quotient and truncates the omega sink.
///
/// The convection and production roles carry different physical dimensions
/// than the viscosity/diffusivity roles, so they rescale differently under
/// the two-parameter scaling family. `k_conv`/`n_prod` let a transformed
/// scenario keep the roles consistent; they default to `k`/`n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegLevels {
    pub k: f64,
    pub n: f64,
    pub m: f64,
    /// Convection cut level; `None` means "same as k".
    pub k_conv: Option<f64>,
    /// Production truncation level; `None` means "same as n".
    pub n_prod: Option<f64>,
}

impl RegLevels {
    /// All truncations disabled (the untruncated degenerate system).
    pub fn untruncated() -> Self {
        Self {
            k: f64::INFINITY,
            n: f64::INFINITY,
            m: f64::INFINITY,
            k_conv: None,
            n_prod: None,
        }
    }

    pub fn new(k: f64, n: f64, m: f64) -> Self {
        Self {
            k,
            n,
            m,
            k_conv: None,
            n_prod: None,
        }
    }

    /// Viscosity cut level (role of k in T_k(mu)).
    #[inline]
    pub fn k_visc(&self) -> f64 {
        self.k
    }

    /// Convection cut level (role of k in G_k(|v|^2)).
    #[inline]
    pub fn k_conv(&self) -> f64 {
        self.k_conv.unwrap_or(self.k)
    }

    /// Diffusivity floor/cut level (role of n in T_n(mu + 1/n)).
    #[inline]
    pub fn n_diff(&self) -> f64 {
        self.n
    }

    /// Production truncation level (role of n in 1/(1 + |D|^2/n)).
    #[inline]
    pub fn n_prod(&self) -> f64 {
        self.n_prod.unwrap_or(self.n)
    }

    /// Check the level preconditions against the declared data bounds.
    pub fn validate(&self, b_min: f64, omega_max: f64) -> Vec<String> {
        let mut out = Vec::new();
        for (name, v) in [
            ("k", self.k),
            ("n", self.n),
            ("m", self.m),
            ("k_conv", self.k_conv()),
            ("n_prod", self.n_prod()),
        ] {
            if !(v > 0.0) {
                out.push(format!("level {name} must be positive or inf, got {v}"));
            }
        }
        if self.k.is_finite() && self.k < 1.0 / b_min {
            out.push(format!(
                "finite k = {} must satisfy k >= 1/b_min = {}",
                self.k,
                1.0 / b_min
            ));
        }
        if self.m.is_finite() && self.m < omega_max {
            out.push(format!(
                "finite m = {} must satisfy m >= omega_max = {}",
                self.m, omega_max
            ));
        }
        out
    }
}

/// Grid geometry mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GridMode {
    /// Fields depend on (t, y); v = (u(t,y), 0). The reference mode.
    Channel1D,
    /// Periodic in x, walls at y = 0 and y = ny*dy; MAC staggering.
    Channel2D,
}

/// Uniform channel grid. Scalars (b, omega, p) live at cell centers; in 2D
/// velocities live on faces MAC-style (u on x-normal faces, v on y-normal
/// faces, with v = 0 on the two wall rows).
///
/// The walls are y = 0 and y = ly = ny*dy (ly = 1 for standard scenarios;
/// scaling transforms produce other lengths).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub mode: GridMode,
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
}

impl Grid {
    pub fn channel_1d(ny: usize, dy: f64) -> Self {
        Self {
            mode: GridMode::Channel1D,
            nx: 1,
            ny,
            dx: 0.0,
            dy,
        }
    }

    pub fn channel_2d(nx: usize, ny: usize, dx: f64, dy: f64) -> Self {
        Self {
            mode: GridMode::Channel2D,
            nx,
            ny,
            dx,
            dy,
        }
    }

    /// Channel height ny*dy.
    #[inline]
    pub fn ly(&self) -> f64 {
        self.ny as f64 * self.dy
    }

    /// y-coordinate of cell center j.
    #[inline]
    pub fn yc(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.dy
    }

    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.ny < 4 {
            out.push(format!("grid needs ny >= 4, got {}", self.ny));
        }
        if !(self.dy > 0.0 && self.dy.is_finite()) {
            out.push(format!("grid spacing dy must be positive, got {}", self.dy));
        }
        if self.mode == GridMode::Channel2D {
            if self.nx < 4 {
                out.push(format!("2D grid needs nx >= 4, got {}", self.nx));
            }
            if !(self.dx > 0.0 && self.dx.is_finite()) {
                out.push(format!("grid spacing dx must be positive, got {}", self.dx));
            }
        }
        out
    }
}
