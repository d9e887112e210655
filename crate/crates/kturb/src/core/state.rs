//! Simulation state: the unknown fields on a grid at one time level.

use super::field::Array2;
use super::{Grid, GridMode};

/// 1D channel state: u(y) at cell centers (the x-velocity is the only
/// velocity component and is automatically divergence-free), b and omega at
/// cell centers. Pressure is constant in 1D and carries no information.
#[derive(Clone, Debug, PartialEq)]
pub struct State1 {
    pub t: f64,
    pub u: Vec<f64>,
    pub b: Vec<f64>,
    pub omega: Vec<f64>,
}

impl State1 {
    pub fn zeros(ny: usize) -> Self {
        Self {
            t: 0.0,
            u: vec![0.0; ny],
            b: vec![0.0; ny],
            omega: vec![0.0; ny],
        }
    }
}

/// 2D MAC state: u on x-normal faces (nx x ny), v on y-normal faces
/// (nx x (ny+1), with the wall rows j = 0 and j = ny identically zero),
/// scalars and pressure at centers (nx x ny). Periodic in x.
#[derive(Clone, Debug, PartialEq)]
pub struct State2 {
    pub t: f64,
    pub u: Array2,
    pub v: Array2,
    pub b: Array2,
    pub omega: Array2,
    /// Mean-zero projection pressure of the last projection step.
    pub p: Array2,
}

impl State2 {
    pub fn zeros(nx: usize, ny: usize) -> Self {
        Self {
            t: 0.0,
            u: Array2::zeros(nx, ny),
            v: Array2::zeros(nx, ny + 1),
            b: Array2::zeros(nx, ny),
            omega: Array2::zeros(nx, ny),
            p: Array2::zeros(nx, ny),
        }
    }
}

/// Either-mode state.
#[derive(Clone, Debug, PartialEq)]
pub enum SimState {
    One(State1),
    Two(State2),
}

impl SimState {
    pub fn t(&self) -> f64 {
        match self {
            SimState::One(s) => s.t,
            SimState::Two(s) => s.t,
        }
    }

    pub fn mode(&self) -> GridMode {
        match self {
            SimState::One(_) => GridMode::Channel1D,
            SimState::Two(_) => GridMode::Channel2D,
        }
    }

    pub fn as_one(&self) -> Option<&State1> {
        match self {
            SimState::One(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_two(&self) -> Option<&State2> {
        match self {
            SimState::Two(s) => Some(s),
            _ => None,
        }
    }

    /// Shape consistency against a grid.
    pub fn matches_grid(&self, grid: &Grid) -> bool {
        match (self, grid.mode) {
            (SimState::One(s), GridMode::Channel1D) => {
                s.u.len() == grid.ny && s.b.len() == grid.ny && s.omega.len() == grid.ny
            }
            (SimState::Two(s), GridMode::Channel2D) => {
                s.u.nx == grid.nx
                    && s.u.ny == grid.ny
                    && s.v.nx == grid.nx
                    && s.v.ny == grid.ny + 1
                    && s.b.nx == grid.nx
                    && s.b.ny == grid.ny
                    && s.omega.nx == grid.nx
                    && s.omega.ny == grid.ny
                    && s.p.nx == grid.nx
                    && s.p.ny == grid.ny
            }
            _ => false,
        }
    }

    /// Max-abs over every field, for NaN screens and scale estimates.
    pub fn max_abs(&self) -> f64 {
        let fold = |vs: &[f64]| vs.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        match self {
            SimState::One(s) => fold(&s.u).max(fold(&s.b)).max(fold(&s.omega)),
            SimState::Two(s) => fold(&s.u.data)
                .max(fold(&s.v.data))
                .max(fold(&s.b.data))
                .max(fold(&s.omega.data))
                .max(fold(&s.p.data)),
        }
    }

    /// Index of the first non-finite entry, searching fields in a fixed
    /// order; `None` when the state is entirely finite.
    pub fn first_non_finite(&self) -> Option<(&'static str, usize)> {
        let find = |vs: &[f64]| vs.iter().position(|v| !v.is_finite());
        match self {
            SimState::One(s) => find(&s.u)
                .map(|i| ("u", i))
                .or_else(|| find(&s.b).map(|i| ("b", i)))
                .or_else(|| find(&s.omega).map(|i| ("omega", i))),
            SimState::Two(s) => find(&s.u.data)
                .map(|i| ("u", i))
                .or_else(|| find(&s.v.data).map(|i| ("v", i)))
                .or_else(|| find(&s.b.data).map(|i| ("b", i)))
                .or_else(|| find(&s.omega.data).map(|i| ("omega", i)))
                .or_else(|| find(&s.p.data).map(|i| ("p", i))),
        }
    }
}
