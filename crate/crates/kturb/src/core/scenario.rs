//! Scenario definition, the flat key-value file format, and data validation.
//!
//! A scenario file is a JSON object whose keys are flat dotted paths and
//! whose values are scalars, e.g.
//!
//! ```json
//! {
//!   "mode": "channel1d",
//!   "grid.ny": 64,
//!   "params.preset": "normalized",
//!   "wall.y0.scalar": "dirichlet",
//!   "wall.y0.b": "const:1.0",
//!   "wall.y0.law": "navier",
//!   "wall.y0.gamma_star": 0.5,
//!   "init.b": "const:1.0",
//!   "time.dt": 1e-3,
//!   "time.t_end": 1.0
//! }
//! ```
//!
//! Parsing is strict: unknown keys are errors (they name the key), every
//! value must have the expected type, and levels accept `"inf"`. The typed
//! scenario re-serializes to a canonical sorted key-value map; the run
//! manifest hash is computed over that canonical form, so it covers every
//! input that affects results.
//!
//! Custom (programmatic) slip laws cannot round-trip through text; scenario
//! files are restricted to the canonical law family.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::slipbc::SlipLaw;
use sha2::{Digest, Sha256};

use super::boundary::{BoundarySpec, ScalarBc, Trace, WallSpec};
use super::state::{SimState, State1, State2};
use super::{Array2, Grid, GridMode, ModelParams, RegLevels};

/// Operator-splitting flavor of the time stepper.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Splitting {
    /// First-order sequential substeps.
    Lie,
    /// Symmetrized substeps with a second-order reaction update.
    Strang,
}

/// Which equation the stepper integrates for the turbulent energy.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Formulation {
    /// Integrate the b-equation directly.
    BForm,
    /// Integrate the total-energy equation and reconstruct b = E - |v|^2/2
    /// (floor-checked, never silently clamped).
    EForm,
}

/// Time-integration options.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SchemeOptions {
    pub splitting: Splitting,
    pub formulation: Formulation,
    /// The explicit-advection CFL number dt*max|v|/h must stay below this.
    pub cfl_guard: f64,
    /// Iteration cap for nonlinear wall couplings.
    pub wall_iters: usize,
}

impl Default for SchemeOptions {
    fn default() -> Self {
        Self {
            splitting: Splitting::Lie,
            formulation: Formulation::BForm,
            cfl_guard: 0.9,
            wall_iters: 50,
        }
    }
}

/// Output cadence.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OutputPlan {
    /// Write a field dump every this many steps (0 disables periodic dumps;
    /// the initial and final states are always kept in the trajectory).
    pub snapshot_every: usize,
    /// Run the in-loop diagnostics monitors every this many steps.
    pub report_every: usize,
    /// Also write pressure parts next to each dump (2D mode).
    pub pressure_parts: bool,
}

impl Default for OutputPlan {
    fn default() -> Self {
        Self {
            snapshot_every: 10,
            report_every: 10,
            pressure_parts: false,
        }
    }
}

/// Which model the scenario integrates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Model {
    /// The full two-equation system.
    Kolmogorov,
    /// The one-equation reduction with prescribed mixing length.
    Prandtl { ell: f64, c: f64 },
}

/// Closed-form initial profile in y. `ly` is the channel height; the
/// `Scaled` variant represents a scaling-transformed profile exactly
/// (amp * inner(xscale * y) with the inner profile seeing its original
/// channel height xscale * ly).
#[derive(Clone, Debug, PartialEq)]
pub enum FieldSpec {
    Const(f64),
    /// c0 + c1 * y.
    Affine { c0: f64, c1: f64 },
    /// base + amp * sin(pi y / ly); vanishes at both walls when base = 0.
    SinHalf { base: f64, amp: f64 },
    /// base + amp * cos(pi y / ly); zero y-derivative at both walls.
    CosHalf { base: f64, amp: f64 },
    /// base + amp * sin(2 pi periods y / ly).
    Sin { base: f64, amp: f64, periods: f64 },
    /// amp * inner(xscale * y).
    Scaled {
        amp: f64,
        xscale: f64,
        inner: Box<FieldSpec>,
    },
}

impl FieldSpec {
    pub fn eval(&self, y: f64, ly: f64) -> f64 {
        use std::f64::consts::PI;
        match self {
            FieldSpec::Const(c) => *c,
            FieldSpec::Affine { c0, c1 } => c0 + c1 * y,
            FieldSpec::SinHalf { base, amp } => base + amp * (PI * y / ly).sin(),
            FieldSpec::CosHalf { base, amp } => base + amp * (PI * y / ly).cos(),
            FieldSpec::Sin { base, amp, periods } => {
                base + amp * (2.0 * PI * periods * y / ly).sin()
            }
            FieldSpec::Scaled { amp, xscale, inner } => {
                amp * inner.eval(xscale * y, xscale * ly)
            }
        }
    }

    fn to_text(&self) -> String {
        match self {
            FieldSpec::Const(c) => format!("const:{c}"),
            FieldSpec::Affine { c0, c1 } => format!("affine:{c0}:{c1}"),
            FieldSpec::SinHalf { base, amp } => format!("sinhalf:{base}:{amp}"),
            FieldSpec::CosHalf { base, amp } => format!("coshalf:{base}:{amp}"),
            FieldSpec::Sin { base, amp, periods } => format!("sin:{base}:{amp}:{periods}"),
            FieldSpec::Scaled { amp, xscale, inner } => {
                format!("scaled:{amp}:{xscale}:{}", inner.to_text())
            }
        }
    }

    fn parse(text: &str) -> Result<Self> {
        let bad = |msg: &str| Error::ScenarioParse(format!("field spec '{text}': {msg}"));
        let (head, rest) = text.split_once(':').unwrap_or((text, ""));
        let nums = |cnt: usize| -> Result<Vec<f64>> {
            let parts: Vec<&str> = if rest.is_empty() {
                vec![]
            } else {
                rest.splitn(cnt, ':').collect()
            };
            if parts.len() != cnt {
                return Err(bad(&format!("expected {cnt} numeric parts")));
            }
            parts
                .iter()
                .map(|p| {
                    p.parse::<f64>()
                        .map_err(|_| bad(&format!("bad number '{p}'")))
                })
                .collect()
        };
        Ok(match head {
            "const" => FieldSpec::Const(nums(1)?[0]),
            "affine" => {
                let v = nums(2)?;
                FieldSpec::Affine { c0: v[0], c1: v[1] }
            }
            "sinhalf" => {
                let v = nums(2)?;
                FieldSpec::SinHalf {
                    base: v[0],
                    amp: v[1],
                }
            }
            "coshalf" => {
                let v = nums(2)?;
                FieldSpec::CosHalf {
                    base: v[0],
                    amp: v[1],
                }
            }
            "sin" => {
                let v = nums(3)?;
                FieldSpec::Sin {
                    base: v[0],
                    amp: v[1],
                    periods: v[2],
                }
            }
            "scaled" => {
                let mut parts = rest.splitn(3, ':');
                let amp = parts
                    .next()
                    .and_then(|p| p.parse::<f64>().ok())
                    .ok_or_else(|| bad("scaled needs amp"))?;
                let xscale = parts
                    .next()
                    .and_then(|p| p.parse::<f64>().ok())
                    .ok_or_else(|| bad("scaled needs xscale"))?;
                let inner = parts.next().ok_or_else(|| bad("scaled needs inner"))?;
                FieldSpec::Scaled {
                    amp,
                    xscale,
                    inner: Box::new(FieldSpec::parse(inner)?),
                }
            }
            _ => return Err(bad("unknown field spec kind")),
        })
    }
}

impl Trace {
    fn to_text(&self) -> String {
        match self {
            Trace::Const(c) => format!("const:{c}"),
            Trace::Affine { c0, c1 } => format!("affine:{c0}:{c1}"),
            Trace::Sin { base, amp, freq } => format!("sin:{base}:{amp}:{freq}"),
            Trace::Scaled { amp, tscale, inner } => {
                format!("scaled:{amp}:{tscale}:{}", inner.to_text())
            }
        }
    }

    fn parse(text: &str) -> Result<Self> {
        let bad = |msg: &str| Error::ScenarioParse(format!("trace '{text}': {msg}"));
        let (head, rest) = text.split_once(':').unwrap_or((text, ""));
        let nums = |cnt: usize| -> Result<Vec<f64>> {
            let parts: Vec<&str> = if rest.is_empty() {
                vec![]
            } else {
                rest.splitn(cnt, ':').collect()
            };
            if parts.len() != cnt {
                return Err(bad(&format!("expected {cnt} numeric parts")));
            }
            parts
                .iter()
                .map(|p| {
                    p.parse::<f64>()
                        .map_err(|_| bad(&format!("bad number '{p}'")))
                })
                .collect()
        };
        Ok(match head {
            "const" => Trace::Const(nums(1)?[0]),
            "affine" => {
                let v = nums(2)?;
                Trace::Affine { c0: v[0], c1: v[1] }
            }
            "sin" => {
                let v = nums(3)?;
                Trace::Sin {
                    base: v[0],
                    amp: v[1],
                    freq: v[2],
                }
            }
            "scaled" => {
                let mut parts = rest.splitn(3, ':');
                let amp = parts
                    .next()
                    .and_then(|p| p.parse::<f64>().ok())
                    .ok_or_else(|| bad("scaled needs amp"))?;
                let tscale = parts
                    .next()
                    .and_then(|p| p.parse::<f64>().ok())
                    .ok_or_else(|| bad("scaled needs tscale"))?;
                let inner = parts.next().ok_or_else(|| bad("scaled needs inner"))?;
                Trace::Scaled {
                    amp,
                    tscale,
                    inner: Box::new(Trace::parse(inner)?),
                }
            }
            _ => return Err(bad("unknown trace kind")),
        })
    }
}

/// A complete problem setup: everything `run` needs.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub name: String,
    pub grid: Grid,
    pub params: ModelParams,
    pub levels: RegLevels,
    /// Shift the initial datum to b0 + 1/k (the cascade's floored datum).
    pub shift_b0: bool,
    pub boundary: BoundarySpec,
    pub init_u: FieldSpec,
    pub init_b: FieldSpec,
    pub init_omega: FieldSpec,
    pub dt: f64,
    pub t_end: f64,
    pub scheme: SchemeOptions,
    pub output: OutputPlan,
    pub model: Model,
}

/// One violated data assumption, tagged with the assumption it breaks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub tag: &'static str,
    pub message: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} {}", self.tag, self.message)
    }
}

impl Scenario {
    /// Number of fixed-size steps; t_end is rounded to the nearest multiple
    /// of dt (validation warns when the rounding is material).
    pub fn n_steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }

    /// The effective initial b offset: 1/k when the shifted datum is on.
    pub fn b0_shift(&self) -> f64 {
        if self.shift_b0 && self.levels.k.is_finite() {
            1.0 / self.levels.k
        } else {
            0.0
        }
    }

    /// Evaluate the initial data on the grid.
    pub fn initial_state(&self) -> SimState {
        let g = &self.grid;
        let ly = g.ly();
        let shift = self.b0_shift();
        match g.mode {
            GridMode::Channel1D => {
                let mut s = State1::zeros(g.ny);
                for j in 0..g.ny {
                    let y = g.yc(j);
                    s.u[j] = self.init_u.eval(y, ly);
                    s.b[j] = self.init_b.eval(y, ly) + shift;
                    s.omega[j] = self.init_omega.eval(y, ly);
                }
                SimState::One(s)
            }
            GridMode::Channel2D => {
                // u lives on x-faces which sit at cell-center heights; the
                // closed-form profiles depend on y only, so v = 0 and the
                // field is discretely divergence-free by construction.
                let mut s = State2::zeros(g.nx, g.ny);
                s.u = Array2::from_fn(g.nx, g.ny, |_i, j| self.init_u.eval(g.yc(j), ly));
                s.b = Array2::from_fn(g.nx, g.ny, |_i, j| self.init_b.eval(g.yc(j), ly) + shift);
                s.omega = Array2::from_fn(g.nx, g.ny, |_i, j| self.init_omega.eval(g.yc(j), ly));
                SimState::Two(s)
            }
        }
    }

    /// Canonical sorted key-value form; inverse of `from_flat` for scenarios
    /// expressible in the file format.
    pub fn to_flat(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        fn put_in(m: &mut BTreeMap<String, String>, k: &str, v: String) {
            m.insert(k.to_string(), v);
        }
        macro_rules! put {
            ($k:expr, $v:expr $(,)?) => {
                put_in(&mut m, $k, $v)
            };
        }
        put!("name", self.name.clone());
        put!(
            "mode",
            match self.grid.mode {
                GridMode::Channel1D => "channel1d".into(),
                GridMode::Channel2D => "channel2d".into(),
            },
        );
        put!("grid.ny", self.grid.ny.to_string());
        put!("grid.dy", format!("{}", self.grid.dy));
        if self.grid.mode == GridMode::Channel2D {
            put!("grid.nx", self.grid.nx.to_string());
            put!("grid.dx", format!("{}", self.grid.dx));
        }
        put!("params.normalized", self.params.normalized.to_string());
        put!("params.nu0", format!("{}", self.params.nu0));
        put!("params.kappa1", format!("{}", self.params.kappa1));
        put!("params.kappa2", format!("{}", self.params.kappa2));
        put!("params.kappa3", format!("{}", self.params.kappa3));
        put!("params.kappa4", format!("{}", self.params.kappa4));
        let lvl = |v: f64| {
            if v.is_infinite() {
                "inf".to_string()
            } else {
                format!("{v}")
            }
        };
        put!("reg.k", lvl(self.levels.k));
        put!("reg.n", lvl(self.levels.n));
        put!("reg.m", lvl(self.levels.m));
        if let Some(kc) = self.levels.k_conv {
            put!("reg.k_conv", lvl(kc));
        }
        if let Some(np) = self.levels.n_prod {
            put!("reg.n_prod", lvl(np));
        }
        put!("reg.shift_b0", self.shift_b0.to_string());
        put!("bounds.b_min", format!("{}", self.boundary.b_min));
        put!("bounds.b_max", format!("{}", self.boundary.b_max));
        put!("bounds.omega_min", format!("{}", self.boundary.omega_min));
        put!("bounds.omega_max", format!("{}", self.boundary.omega_max));
        for (prefix, wall) in [("wall.y0", &self.boundary.y0), ("wall.y1", &self.boundary.y1)] {
            match &wall.scalar {
                ScalarBc::Dirichlet { b, omega } => {
                    m.insert(format!("{prefix}.scalar"), "dirichlet".into());
                    m.insert(format!("{prefix}.b"), b.to_text());
                    m.insert(format!("{prefix}.omega"), omega.to_text());
                }
                ScalarBc::ZeroFlux => {
                    m.insert(format!("{prefix}.scalar"), "zeroflux".into());
                }
            }
            match &wall.law {
                SlipLaw::NavierSlip { gamma_star } if *gamma_star == 0.0 => {
                    m.insert(format!("{prefix}.law"), "free".into());
                }
                SlipLaw::NavierSlip { gamma_star } => {
                    m.insert(format!("{prefix}.law"), "navier".into());
                    m.insert(format!("{prefix}.gamma_star"), format!("{gamma_star}"));
                }
                SlipLaw::ThresholdSlip {
                    sigma_star,
                    gamma_star,
                } => {
                    m.insert(format!("{prefix}.law"), "threshold".into());
                    m.insert(format!("{prefix}.sigma_star"), format!("{sigma_star}"));
                    m.insert(format!("{prefix}.gamma_star"), format!("{gamma_star}"));
                }
                SlipLaw::NoSlipLimit { traction_scale } => {
                    m.insert(format!("{prefix}.law"), "noslip".into());
                    m.insert(format!("{prefix}.traction_scale"), format!("{traction_scale}"));
                }
                SlipLaw::Custom(_) => {
                    // Not representable in text; marked so the hash still
                    // distinguishes it from canonical laws.
                    m.insert(format!("{prefix}.law"), "custom".into());
                }
            }
        }
        put!("init.u", self.init_u.to_text());
        put!("init.b", self.init_b.to_text());
        put!("init.omega", self.init_omega.to_text());
        put!("time.dt", format!("{}", self.dt));
        put!("time.t_end", format!("{}", self.t_end));
        put!(
            "scheme.splitting",
            match self.scheme.splitting {
                Splitting::Lie => "lie".into(),
                Splitting::Strang => "strang".into(),
            },
        );
        put!(
            "scheme.formulation",
            match self.scheme.formulation {
                Formulation::BForm => "b".into(),
                Formulation::EForm => "e".into(),
            },
        );
        put!("scheme.cfl_guard", format!("{}", self.scheme.cfl_guard));
        put!("scheme.wall_iters", self.scheme.wall_iters.to_string());
        put!("output.snapshot_every", self.output.snapshot_every.to_string());
        put!("output.report_every", self.output.report_every.to_string());
        put!("output.pressure_parts", self.output.pressure_parts.to_string());
        match self.model {
            Model::Kolmogorov => put!("model", "kolmogorov".into()),
            Model::Prandtl { ell, c } => {
                put!("model", "prandtl".into());
                put!("prandtl.ell", format!("{ell}"));
                put!("prandtl.c", format!("{c}"));
            }
        }
        m
    }

    /// SHA-256 of the canonical key-value form, hex-encoded.
    pub fn hash(&self) -> String {
        let mut hasher = Sha256::new();
        for (k, v) in self.to_flat() {
            hasher.update(k.as_bytes());
            hasher.update(b"=");
            hasher.update(v.as_bytes());
            hasher.update(b"\n");
        }
        hex::encode(hasher.finalize())
    }

    /// Parse from the flat key-value map; strict about unknown keys.
    pub fn from_flat(mut map: BTreeMap<String, String>) -> Result<Self> {
        fn take(map: &mut BTreeMap<String, String>, key: &str) -> Option<String> {
            map.remove(key)
        }
        fn take_f64(map: &mut BTreeMap<String, String>, key: &str, default: f64) -> Result<f64> {
            match take(map, key) {
                None => Ok(default),
                Some(v) => parse_f64(&v, key),
            }
        }
        fn parse_f64(v: &str, key: &str) -> Result<f64> {
            if v == "inf" {
                return Ok(f64::INFINITY);
            }
            v.parse::<f64>()
                .map_err(|_| Error::ScenarioParse(format!("key '{key}': bad number '{v}'")))
        }
        fn take_usize(
            map: &mut BTreeMap<String, String>,
            key: &str,
            default: usize,
        ) -> Result<usize> {
            match take(map, key) {
                None => Ok(default),
                Some(v) => v
                    .parse::<usize>()
                    .map_err(|_| Error::ScenarioParse(format!("key '{key}': bad integer '{v}'"))),
            }
        }
        fn take_bool(map: &mut BTreeMap<String, String>, key: &str, default: bool) -> Result<bool> {
            match take(map, key) {
                None => Ok(default),
                Some(v) => match v.as_str() {
                    "true" => Ok(true),
                    "false" => Ok(false),
                    _ => Err(Error::ScenarioParse(format!(
                        "key '{key}': expected true/false, got '{v}'"
                    ))),
                },
            }
        }

        let name = take(&mut map, "name").unwrap_or_else(|| "unnamed".into());
        let mode = match take(&mut map, "mode").as_deref().unwrap_or("channel1d") {
            "channel1d" => GridMode::Channel1D,
            "channel2d" => GridMode::Channel2D,
            other => {
                return Err(Error::ScenarioParse(format!(
                    "key 'mode': unknown mode '{other}'"
                )))
            }
        };
        let ny = take_usize(&mut map, "grid.ny", 32)?;
        let dy = take_f64(&mut map, "grid.dy", 1.0 / ny as f64)?;
        let nx = take_usize(&mut map, "grid.nx", ny)?;
        let dx = take_f64(&mut map, "grid.dx", 1.0 / nx as f64)?;
        let grid = match mode {
            GridMode::Channel1D => Grid::channel_1d(ny, dy),
            GridMode::Channel2D => Grid::channel_2d(nx, ny, dx, dy),
        };

        let params = match take(&mut map, "params.preset").as_deref() {
            Some("normalized") | None => {
                let mut p = ModelParams::normalized();
                p.normalized = take_bool(&mut map, "params.normalized", true)?;
                p.nu0 = take_f64(&mut map, "params.nu0", p.nu0)?;
                p.kappa1 = take_f64(&mut map, "params.kappa1", p.kappa1)?;
                p.kappa2 = take_f64(&mut map, "params.kappa2", p.kappa2)?;
                p.kappa3 = take_f64(&mut map, "params.kappa3", p.kappa3)?;
                p.kappa4 = take_f64(&mut map, "params.kappa4", p.kappa4)?;
                p
            }
            Some("kolmogorov") => {
                let nu0 = take_f64(&mut map, "params.nu0", 0.5)?;
                let mut p = ModelParams::kolmogorov(nu0);
                p.normalized = take_bool(&mut map, "params.normalized", false)?;
                p.kappa1 = take_f64(&mut map, "params.kappa1", p.kappa1)?;
                p.kappa2 = take_f64(&mut map, "params.kappa2", p.kappa2)?;
                p.kappa3 = take_f64(&mut map, "params.kappa3", p.kappa3)?;
                p.kappa4 = take_f64(&mut map, "params.kappa4", p.kappa4)?;
                p
            }
            Some(other) => {
                return Err(Error::ScenarioParse(format!(
                    "key 'params.preset': unknown preset '{other}'"
                )))
            }
        };

        let mut levels = RegLevels::new(
            take_f64(&mut map, "reg.k", f64::INFINITY)?,
            take_f64(&mut map, "reg.n", f64::INFINITY)?,
            take_f64(&mut map, "reg.m", f64::INFINITY)?,
        );
        if let Some(v) = take(&mut map, "reg.k_conv") {
            levels.k_conv = Some(parse_f64(&v, "reg.k_conv")?);
        }
        if let Some(v) = take(&mut map, "reg.n_prod") {
            levels.n_prod = Some(parse_f64(&v, "reg.n_prod")?);
        }
        let shift_b0 = take_bool(&mut map, "reg.shift_b0", false)?;

        let b_min = take_f64(&mut map, "bounds.b_min", 1e-8)?;
        let b_max = take_f64(&mut map, "bounds.b_max", 1e8)?;
        let omega_min = take_f64(&mut map, "bounds.omega_min", 1e-8)?;
        let omega_max = take_f64(&mut map, "bounds.omega_max", 1e8)?;

        let parse_wall = |prefix: &str, map: &mut BTreeMap<String, String>| -> Result<WallSpec> {
            let scalar = match take(map, &format!("{prefix}.scalar")).as_deref() {
                Some("dirichlet") => {
                    let b = take(map, &format!("{prefix}.b")).ok_or_else(|| {
                        Error::ScenarioParse(format!("'{prefix}.scalar' is dirichlet but '{prefix}.b' is missing"))
                    })?;
                    let omega = take(map, &format!("{prefix}.omega")).ok_or_else(|| {
                        Error::ScenarioParse(format!(
                            "'{prefix}.scalar' is dirichlet but '{prefix}.omega' is missing"
                        ))
                    })?;
                    ScalarBc::Dirichlet {
                        b: Trace::parse(&b)?,
                        omega: Trace::parse(&omega)?,
                    }
                }
                Some("zeroflux") | None => ScalarBc::ZeroFlux,
                Some(other) => {
                    return Err(Error::ScenarioParse(format!(
                        "key '{prefix}.scalar': unknown value '{other}'"
                    )))
                }
            };
            let law = match take(map, &format!("{prefix}.law")).as_deref() {
                Some("free") | None => SlipLaw::free_slip(),
                Some("navier") => SlipLaw::NavierSlip {
                    gamma_star: take_f64(map, &format!("{prefix}.gamma_star"), 1.0)?,
                },
                Some("threshold") => SlipLaw::ThresholdSlip {
                    sigma_star: take_f64(map, &format!("{prefix}.sigma_star"), 1.0)?,
                    gamma_star: take_f64(map, &format!("{prefix}.gamma_star"), 1.0)?,
                },
                Some("noslip") => SlipLaw::NoSlipLimit {
                    traction_scale: take_f64(map, &format!("{prefix}.traction_scale"), 1.0)?,
                },
                Some(other) => {
                    return Err(Error::ScenarioParse(format!(
                        "key '{prefix}.law': unknown law '{other}' (custom laws are programmatic-only)"
                    )))
                }
            };
            Ok(WallSpec { scalar, law })
        };
        let y0 = parse_wall("wall.y0", &mut map)?;
        let y1 = parse_wall("wall.y1", &mut map)?;
        let boundary = BoundarySpec {
            y0,
            y1,
            b_min,
            b_max,
            omega_min,
            omega_max,
        };

        let init_u = match take(&mut map, "init.u") {
            Some(v) => FieldSpec::parse(&v)?,
            None => FieldSpec::Const(0.0),
        };
        let init_b = match take(&mut map, "init.b") {
            Some(v) => FieldSpec::parse(&v)?,
            None => FieldSpec::Const(1.0),
        };
        let init_omega = match take(&mut map, "init.omega") {
            Some(v) => FieldSpec::parse(&v)?,
            None => FieldSpec::Const(1.0),
        };

        let dt = take_f64(&mut map, "time.dt", 1e-3)?;
        let t_end = take_f64(&mut map, "time.t_end", 1.0)?;

        let scheme = SchemeOptions {
            splitting: match take(&mut map, "scheme.splitting").as_deref() {
                Some("lie") | None => Splitting::Lie,
                Some("strang") => Splitting::Strang,
                Some(other) => {
                    return Err(Error::ScenarioParse(format!(
                        "key 'scheme.splitting': unknown value '{other}'"
                    )))
                }
            },
            formulation: match take(&mut map, "scheme.formulation").as_deref() {
                Some("b") | None => Formulation::BForm,
                Some("e") => Formulation::EForm,
                Some(other) => {
                    return Err(Error::ScenarioParse(format!(
                        "key 'scheme.formulation': unknown value '{other}'"
                    )))
                }
            },
            cfl_guard: take_f64(&mut map, "scheme.cfl_guard", 0.9)?,
            wall_iters: take_usize(&mut map, "scheme.wall_iters", 50)?,
        };

        let output = OutputPlan {
            snapshot_every: take_usize(&mut map, "output.snapshot_every", 10)?,
            report_every: take_usize(&mut map, "output.report_every", 10)?,
            pressure_parts: take_bool(&mut map, "output.pressure_parts", false)?,
        };

        let model = match take(&mut map, "model").as_deref() {
            Some("kolmogorov") | None => Model::Kolmogorov,
            Some("prandtl") => Model::Prandtl {
                ell: take_f64(&mut map, "prandtl.ell", 1.0)?,
                c: take_f64(&mut map, "prandtl.c", 1.0)?,
            },
            Some(other) => {
                return Err(Error::ScenarioParse(format!(
                    "key 'model': unknown model '{other}'"
                )))
            }
        };

        if let Some((key, _)) = map.into_iter().next() {
            return Err(Error::ScenarioParse(format!("unknown key '{key}'")));
        }

        Ok(Scenario {
            name,
            grid,
            params,
            levels,
            shift_b0,
            boundary,
            init_u,
            init_b,
            init_omega,
            dt,
            t_end,
            scheme,
            output,
            model,
        })
    }

    /// Parse the JSON text of a scenario file.
    pub fn from_json_text(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)
            .map_err(|e| Error::ScenarioParse(format!("invalid JSON: {e}")))?;
        let obj = value
            .as_object()
            .ok_or_else(|| Error::ScenarioParse("scenario must be a JSON object".into()))?;
        let mut map = BTreeMap::new();
        for (k, v) in obj {
            let s = match v {
                serde_json::Value::String(s) => s.clone(),
                serde_json::Value::Bool(b) => b.to_string(),
                serde_json::Value::Number(n) => n.to_string(),
                _ => {
                    return Err(Error::ScenarioParse(format!(
                        "key '{k}': values must be scalars"
                    )))
                }
            };
            map.insert(k.clone(), s);
        }
        Self::from_flat(map)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_text(&text)
    }

    /// Apply `key=value` overrides on top of the canonical form and re-parse.
    pub fn with_overrides(&self, overrides: &[(String, String)]) -> Result<Self> {
        let mut flat = self.to_flat();
        for (k, v) in overrides {
            flat.insert(k.clone(), v.clone());
        }
        Self::from_flat(flat)
    }

    /// Render as a canonical scenario JSON file.
    pub fn to_json_text(&self) -> String {
        let mut out = String::from("{\n");
        let flat = self.to_flat();
        let last = flat.len().saturating_sub(1);
        for (i, (k, v)) in flat.iter().enumerate() {
            let comma = if i == last { "" } else { "," };
            let _ = writeln!(out, "  {:?}: {:?}{comma}", k, v);
        }
        out.push('}');
        out
    }
}

/// Check every discrete data assumption; returns the (possibly empty) list
/// of violations. Report-only: callers decide whether to abort.
pub fn validate_scenario(s: &Scenario) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |tag: &'static str, message: String| out.push(Violation { tag, message });

    for msg in s.grid.validate() {
        push("(grid)", msg);
    }
    if let Err(e) = s.params.validate() {
        push("(params)", e.to_string());
    }
    for msg in s.levels.validate(s.boundary.b_min, s.boundary.omega_max) {
        push("(levels)", msg);
    }
    if !(s.dt > 0.0 && s.dt.is_finite()) {
        push("(time)", format!("dt must be positive, got {}", s.dt));
    }
    if !(s.t_end >= 0.0 && s.t_end.is_finite()) {
        push("(time)", format!("t_end must be nonnegative, got {}", s.t_end));
    }
    if s.dt > 0.0 && s.t_end > 0.0 {
        let n = (s.t_end / s.dt).round();
        if n < 1.0 || ((n * s.dt - s.t_end).abs() > 1e-9 * s.t_end) {
            push(
                "(time)",
                format!("t_end = {} is not a multiple of dt = {}", s.t_end, s.dt),
            );
        }
    }
    let bnd = &s.boundary;
    if !(bnd.b_min > 0.0 && bnd.b_min <= bnd.b_max) {
        push(
            "(bd4)",
            format!("need 0 < b_min <= b_max, got [{}, {}]", bnd.b_min, bnd.b_max),
        );
    }
    if !(bnd.omega_min > 0.0 && bnd.omega_min <= bnd.omega_max) {
        push(
            "(bd3)",
            format!(
                "need 0 < omega_min <= omega_max, got [{}, {}]",
                bnd.omega_min, bnd.omega_max
            ),
        );
    }

    // Initial data on the grid. The b floor check applies to the *unshifted*
    // datum; the cascade shift adds 1/k on top.
    let ly = s.grid.ly();
    for j in 0..s.grid.ny {
        let y = s.grid.yc(j);
        let b0 = s.init_b.eval(y, ly);
        let w0 = s.init_omega.eval(y, ly);
        let u0 = s.init_u.eval(y, ly);
        if !(b0 > 0.0 && b0.is_finite() && b0.ln().is_finite()) {
            push(
                "(Assk)",
                format!("b0 must be positive with finite ln b0; cell {j} has b0 = {b0}"),
            );
        }
        if !(w0 >= bnd.omega_min && w0 <= bnd.omega_max) {
            push(
                "(Asso)",
                format!(
                    "omega0 must lie in [{}, {}]; cell {j} has omega0 = {w0}",
                    bnd.omega_min, bnd.omega_max
                ),
            );
        }
        if !u0.is_finite() {
            push("(Assv)", format!("v0 must be finite; cell {j} has u0 = {u0}"));
        }
    }
    // v0 is divergence-free with zero normal trace by construction in both
    // modes (1D: u(y) only; 2D: u(y) profiles with v = 0); nothing further
    // to check for closed-form initial data.

    // Dirichlet traces must respect the declared bounds over [0, t_end];
    // sampled densely (the traces are smooth closed forms).
    let samples = 257;
    for (wall, spec) in [("y0", &bnd.y0), ("y1", &bnd.y1)] {
        if let ScalarBc::Dirichlet { b, omega } = &spec.scalar {
            for i in 0..samples {
                let t = s.t_end * (i as f64) / ((samples - 1) as f64);
                let bv = b.eval(t);
                let wv = omega.eval(t);
                if !(bv >= bnd.b_min && bv <= bnd.b_max) {
                    push(
                        "(bd4)",
                        format!("wall {wall}: b_gamma({t}) = {bv} outside [{}, {}]", bnd.b_min, bnd.b_max),
                    );
                    break;
                }
                if !(wv >= bnd.omega_min && wv <= bnd.omega_max) {
                    push(
                        "(bd3)",
                        format!(
                            "wall {wall}: omega_gamma({t}) = {wv} outside [{}, {}]",
                            bnd.omega_min, bnd.omega_max
                        ),
                    );
                    break;
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn homogeneous_text() -> &'static str {
        r#"{
            "name": "homog",
            "mode": "channel1d",
            "grid.ny": 8,
            "bounds.omega_min": 0.001,
            "bounds.omega_max": 1.0,
            "init.b": "const:1.0",
            "init.omega": "const:1.0",
            "time.dt": 0.001,
            "time.t_end": 1.0
        }"#
    }

    #[test]
    fn parse_and_canonical_roundtrip() {
        let s = Scenario::from_json_text(homogeneous_text()).unwrap();
        assert_eq!(s.grid.ny, 8);
        assert_eq!(s.n_steps(), 1000);
        let flat = s.to_flat();
        let s2 = Scenario::from_flat(flat.clone()).unwrap();
        assert_eq!(s2.to_flat(), flat, "canonical form is a fixed point");
        assert_eq!(s.hash(), s2.hash());
    }

    #[test]
    fn unknown_key_is_an_error_naming_the_key() {
        let text = r#"{ "grid.ny": 8, "grid.nz": 4 }"#;
        let err = Scenario::from_json_text(text).unwrap_err();
        assert!(err.to_string().contains("grid.nz"), "{err}");
    }

    #[test]
    fn validate_accepts_constants_within_bounds() {
        let s = Scenario::from_json_text(homogeneous_text()).unwrap();
        let v = validate_scenario(&s);
        assert!(v.is_empty(), "{v:?}");
    }

    #[test]
    fn validate_rejects_nonpositive_b0() {
        let mut s = Scenario::from_json_text(homogeneous_text()).unwrap();
        // Affine profile crossing zero: some cells have b0 <= 0.
        s.init_b = FieldSpec::Affine { c0: -0.1, c1: 1.0 };
        let v = validate_scenario(&s);
        assert!(v.iter().any(|v| v.tag == "(Assk)"), "{v:?}");
    }

    #[test]
    fn validate_rejects_omega0_above_ceiling() {
        let mut s = Scenario::from_json_text(homogeneous_text()).unwrap();
        s.init_omega = FieldSpec::Const(2.0); // omega_max is 1.0
        let v = validate_scenario(&s);
        assert!(v.iter().any(|v| v.tag == "(Asso)"), "{v:?}");
    }

    #[test]
    fn validate_checks_level_preconditions() {
        let mut s = Scenario::from_json_text(homogeneous_text()).unwrap();
        s.boundary.b_min = 0.5;
        s.levels = RegLevels::new(1.0, f64::INFINITY, 0.5);
        let v = validate_scenario(&s);
        // k = 1 < 1/b_min = 2 and m = 0.5 < omega_max = 1.
        assert_eq!(v.iter().filter(|v| v.tag == "(levels)").count(), 2, "{v:?}");
    }

    #[test]
    fn overrides_change_hash() {
        let s = Scenario::from_json_text(homogeneous_text()).unwrap();
        let s2 = s
            .with_overrides(&[("time.dt".into(), "0.0005".into())])
            .unwrap();
        assert_ne!(s.hash(), s2.hash());
        // Hash is insensitive to override order and repeated application.
        let s3 = s2
            .with_overrides(&[("time.dt".into(), "0.001".into())])
            .unwrap();
        assert_eq!(s.hash(), s3.hash());
    }

    #[test]
    fn initial_state_applies_b0_shift() {
        let mut s = Scenario::from_json_text(homogeneous_text()).unwrap();
        s.levels = RegLevels::new(10.0, f64::INFINITY, f64::INFINITY);
        s.shift_b0 = true;
        match s.initial_state() {
            SimState::One(st) => assert!(st.b.iter().all(|&b| (b - 1.1).abs() < 1e-15)),
            _ => panic!("expected 1D state"),
        }
    }

    #[test]
    fn field_spec_text_roundtrip() {
        for spec in [
            FieldSpec::Const(1.5),
            FieldSpec::Affine { c0: 0.5, c1: -2.0 },
            FieldSpec::SinHalf {
                base: 1.0,
                amp: 0.25,
            },
            FieldSpec::Scaled {
                amp: 4.0,
                xscale: 2.0,
                inner: Box::new(FieldSpec::CosHalf {
                    base: 0.0,
                    amp: 1.0,
                }),
            },
        ] {
            let round = FieldSpec::parse(&spec.to_text()).unwrap();
            assert_eq!(round, spec);
        }
    }
}
