//! One-equation reduction with a prescribed mixing length.
//!
//! Slaving the frequency to omega(b) = c sqrt(b) / ell turns the
//! two-equation system into a single equation for b (equivalently for the
//! turbulent kinetic energy k = (3/2) b):
//!
//!   diffusivity:  b/omega           -> (ell/c) sqrt(b),
//!   sink:         b omega           -> (c/ell) b sqrt(b),
//!   viscosity:    2 nu0 (b/omega)   -> 2 nu0 (ell/c) sqrt(b),
//!
//! all degenerating like sqrt(b) at b = 0. With v = 0 and ell = c the decay
//! is b' = -b^{3/2}, solved in closed form by b(t) = b0 / (1 + t sqrt(b0)/2)^2.
//!
//! The runner reuses the reference substeps — a Patankar sink quotient
//! b/(1 + dt omega(b)), the implicit tridiagonal diffusion, and the
//! implicit momentum solve with exact wall branches — so positivity and the
//! kinetic-energy identity carry over verbatim. Only the algebraic slaving
//! is checked against the two-equation model; no dynamic-limit claim is
//! made (the reduction assumes the mixing length is given).

use crate::core::{Formulation, GridMode, Model, ScalarBc, Scenario, SimState, State1};
use crate::error::{Error, Result};
use crate::operators::dv_sq_1d;
use crate::stepper::{momentum_implicit_1d, scalar_diffusion_1d, RunOutput, StepRecord};

/// Mixing-length closure parameters: omega = c sqrt(b) / ell.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PrandtlParams {
    pub ell: f64,
    pub c: f64,
}

impl PrandtlParams {
    pub fn new(ell: f64, c: f64) -> Result<Self> {
        if !(ell > 0.0 && ell.is_finite() && c > 0.0 && c.is_finite()) {
            return Err(Error::ScenarioInvalid(format!(
                "mixing-length parameters must be positive finite, got ell = {ell}, c = {c}"
            )));
        }
        Ok(Self { ell, c })
    }

    /// Slaved frequency omega(b) = c sqrt(b) / ell.
    #[inline]
    pub fn omega_of(&self, b: f64) -> f64 {
        self.c * b.max(0.0).sqrt() / self.ell
    }

    /// Scalar diffusivity (ell/c) sqrt(b) (the reduction of b/omega).
    #[inline]
    pub fn diffusivity(&self, b: f64) -> f64 {
        self.ell / self.c * b.max(0.0).sqrt()
    }

    /// Sink density (c/ell) b sqrt(b) (the reduction of b omega).
    #[inline]
    pub fn sink(&self, b: f64) -> f64 {
        b.max(0.0) * self.omega_of(b)
    }

    /// Turbulent kinetic energy k = (3/2) b.
    #[inline]
    pub fn k_of_b(&self, b: f64) -> f64 {
        1.5 * b
    }

    /// Inverse map b = (2/3) k.
    #[inline]
    pub fn b_of_k(&self, k: f64) -> f64 {
        k / 1.5
    }

    /// The k-variable coefficient maps (nu(k), mu(k), eps(k)), all of the
    /// sqrt(k) type: nu(k) = 2 nu0 (ell/c) sqrt(2k/3), mu(k) likewise up to
    /// kappa3, eps(k) = (c/ell) sqrt(2/3) k sqrt(k) ... expressed here by
    /// composing with b = (2/3) k.
    pub fn coefficients_in_k(&self, k: f64, two_nu0: f64, kappa3: f64) -> (f64, f64, f64) {
        let b = self.b_of_k(k);
        (
            two_nu0 * self.diffusivity(b),
            kappa3 * self.diffusivity(b),
            1.5 * self.sink(b),
        )
    }
}

/// Closed-form homogeneous decay of b' = -(c/ell) b^{3/2}:
/// b(t) = b0 / (1 + (c/ell) t sqrt(b0) / 2)^2.
pub fn prandtl_homogeneous_exact(pp: &PrandtlParams, b0: f64, t: f64) -> f64 {
    let r = self_rate(pp);
    b0 / (1.0 + 0.5 * r * t * b0.sqrt()).powi(2)
}

#[inline]
fn self_rate(pp: &PrandtlParams) -> f64 {
    pp.c / pp.ell
}

fn prandtl_of(sc: &Scenario) -> Result<PrandtlParams> {
    match sc.model {
        Model::Prandtl { ell, c } => PrandtlParams::new(ell, c),
        Model::Kolmogorov => Err(Error::ScenarioInvalid(
            "scenario does not select the one-equation model".into(),
        )),
    }
}

fn dirichlet_b(bc: &ScalarBc, t: f64) -> Option<f64> {
    match bc {
        ScalarBc::Dirichlet { b, .. } => Some(b.eval(t)),
        ScalarBc::ZeroFlux => None,
    }
}

/// One step of the reduced (v, b) system: Patankar sink quotient with the
/// slaved frequency, implicit sqrt(b)-diffusivity diffusion frozen at the
/// old state, implicit momentum with viscosity 2 nu0 (ell/c) sqrt(b).
fn step_prandtl(s: &State1, sc: &Scenario, pp: &PrandtlParams) -> Result<(State1, StepRecord)> {
    let ny = sc.grid.ny;
    let dy = sc.grid.dy;
    let dt = sc.dt;
    let t1 = s.t + dt;
    let p = &sc.params;
    let c_e = p.energy_coeff();

    let mut u = s.u.clone();
    let mut b = s.b.clone();

    // Frozen coefficients.
    let nu: Vec<f64> = s.b.iter().map(|&x| 0.5 * p.two_nu0() * pp.diffusivity(x)).collect();
    let cb: Vec<f64> = s.b.iter().map(|&x| p.k3() * pp.diffusivity(x)).collect();
    let mut fb = vec![0.0; ny + 1];
    for j in 1..ny {
        fb[j] = crate::operators::harmonic_face(cb[j - 1], cb[j]);
    }
    let wall_b = [
        dirichlet_b(&sc.boundary.y0.scalar, t1),
        dirichlet_b(&sc.boundary.y1.scalar, t1),
    ];
    if let Some(g) = wall_b[0] {
        fb[0] = p.k3() * pp.diffusivity(g);
    }
    if let Some(g) = wall_b[1] {
        fb[ny] = p.k3() * pp.diffusivity(g);
    }

    // Reaction: production (two-equation form with mu = diffusivity(b)) and
    // the Patankar quotient for the sink b omega(b).
    let dsq = dv_sq_1d(&s.u, dy);
    let mut tally_prod = 0.0;
    let mut tally_sink = 0.0;
    for j in 0..ny {
        let prod = p.k4() * pp.diffusivity(s.b[j]) * dsq[j];
        let w = pp.omega_of(s.b[j]);
        let b_new = (b[j] + dt * prod) / (1.0 + dt * w);
        tally_prod += dt * prod * dy;
        tally_sink += (b[j] + dt * prod - b_new) * dy;
        b[j] = b_new;
    }
    let db_reaction = tally_prod - tally_sink;

    // Implicit diffusion and momentum.
    scalar_diffusion_1d(&mut b, &fb, wall_b, dt, dy)?;
    let dummy_omega: Vec<f64> = s.b.iter().map(|&x| pp.omega_of(x)).collect();
    let mout = momentum_implicit_1d(
        &u,
        &nu,
        dt,
        dy,
        &sc.boundary,
        t1,
        sc.grid.ly(),
        &b,
        &dummy_omega,
        sc.scheme.wall_iters,
    )?;
    u = mout.u_new;

    let mut rec = StepRecord {
        t: t1,
        dt,
        identity_exact: true,
        ..Default::default()
    };
    rec.kinetic = 0.5 * u.iter().map(|x| x * x).sum::<f64>() * dy;
    rec.turbulent = c_e * b.iter().sum::<f64>() * dy;
    rec.d_kinetic = mout.d_kin;
    rec.num_diss = mout.num_diss;
    rec.int_diss = mout.int_diss;
    rec.wall_diss = mout.wall_diss;
    rec.wall_work = mout.wall_work;
    rec.wall_s = mout.wall_s;
    rec.wall_vtau = mout.wall_vtau;
    rec.prod_int = tally_prod;
    rec.sink_b_int = tally_sink;
    rec.db_reaction = db_reaction;
    rec.db_total = (b.iter().sum::<f64>() - s.b.iter().sum::<f64>()) * dy;
    rec.b_min = b.iter().cloned().fold(f64::INFINITY, f64::min);
    let omega_now: Vec<f64> = b.iter().map(|&x| pp.omega_of(x)).collect();
    rec.omega_min = omega_now.iter().cloned().fold(f64::INFINITY, f64::min);
    rec.omega_max = omega_now.iter().cloned().fold(f64::NEG_INFINITY, f64::max);

    Ok((
        State1 {
            t: t1,
            u,
            b,
            omega: omega_now,
        },
        rec,
    ))
}

/// Integrate a one-equation scenario (1D mode, b-path). The state's omega
/// component carries the slaved frequency c sqrt(b)/ell for inspection.
pub fn run_prandtl(sc: &Scenario) -> Result<RunOutput> {
    let pp = prandtl_of(sc)?;
    if sc.grid.mode != GridMode::Channel1D {
        return Err(Error::ScenarioInvalid(
            "the one-equation reduction runs in 1D mode only".into(),
        ));
    }
    if sc.scheme.formulation == Formulation::EForm {
        return Err(Error::ScenarioInvalid(
            "the one-equation reduction integrates b directly; the total-energy path does not apply"
                .into(),
        ));
    }
    let violations = crate::core::validate_scenario(sc);
    if !violations.is_empty() {
        let msgs: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        return Err(Error::ScenarioInvalid(msgs.join("; ")));
    }
    let mut cur = match sc.initial_state() {
        SimState::One(mut s) => {
            // Slave the frequency from the start.
            s.omega = s.b.iter().map(|&x| pp.omega_of(x)).collect();
            s
        }
        SimState::Two(_) => unreachable!("1D mode checked above"),
    };
    let n_steps = sc.n_steps();
    let every = sc.output.snapshot_every.max(1);
    let mut snapshots = vec![(0, SimState::One(cur.clone()))];
    let mut records = Vec::new();
    let mut err = None;
    let mut done = 0;
    for k in 0..n_steps {
        match step_prandtl(&cur, sc, &pp) {
            Ok((next, mut rec)) => {
                rec.step = k + 1;
                records.push(rec);
                cur = next;
                done = k + 1;
                if (k + 1) % every == 0 && k + 1 < n_steps {
                    snapshots.push((k + 1, SimState::One(cur.clone())));
                }
            }
            Err(e) => {
                err = Some(e);
                break;
            }
        }
    }
    if snapshots.last().map(|(s, _)| *s) != Some(done) {
        snapshots.push((done, SimState::One(cur.clone())));
    }
    Ok(RunOutput {
        snapshots,
        records,
        final_state: SimState::One(cur),
        steps_done: done,
        error: err,
    })
}

/// Outcome of the algebraic slaving check at t = 0.
#[derive(Clone, Debug)]
pub struct SlavingRecord {
    /// Worst relative mismatch between b/omega and (ell/c) sqrt(b).
    pub diffusivity_mismatch: f64,
    /// Worst relative mismatch between b omega and (c/ell) b sqrt(b).
    pub sink_mismatch: f64,
    /// True when omega was actually slaved (mismatches within 1e-12);
    /// otherwise the record is informational.
    pub slaved: bool,
}

/// Compare the two-equation coefficient quotients of the scenario's initial
/// state against the reduced maps. Purely algebraic: it certifies that the
/// datum satisfies omega = c sqrt(b)/ell, not that the dynamics agree.
pub fn consistency_check(sc: &Scenario, pp: &PrandtlParams) -> Result<SlavingRecord> {
    let (b, w) = match sc.initial_state() {
        SimState::One(s) => (s.b, s.omega),
        SimState::Two(s) => (s.b.data, s.omega.data),
    };
    let mut dmax = 0.0_f64;
    let mut smax = 0.0_f64;
    for (&bj, &wj) in b.iter().zip(&w) {
        if wj <= 0.0 {
            return Err(Error::DegenerateState {
                cell: 0,
                omega: wj,
                stage: "slaving check",
            });
        }
        let d_two = bj / wj;
        let d_red = pp.diffusivity(bj);
        let s_two = bj * wj;
        let s_red = pp.sink(bj);
        dmax = dmax.max((d_two - d_red).abs() / d_red.abs().max(1e-300));
        smax = smax.max((s_two - s_red).abs() / s_red.abs().max(1e-300));
    }
    Ok(SlavingRecord {
        diffusivity_mismatch: dmax,
        sink_mismatch: smax,
        slaved: dmax <= 1e-12 && smax <= 1e-12,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::{
        BoundarySpec, FieldSpec, Grid, ModelParams, OutputPlan, RegLevels, SchemeOptions,
        WallSpec,
    };
    use crate::slipbc::SlipLaw;

    fn scenario(ny: usize, dt: f64, t_end: f64, pp: (f64, f64)) -> Scenario {
        Scenario {
            name: "prandtl-test".into(),
            grid: Grid::channel_1d(ny, 1.0 / ny as f64),
            params: ModelParams::normalized(),
            levels: RegLevels::untruncated(),
            shift_b0: false,
            boundary: BoundarySpec {
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
            },
            init_u: FieldSpec::Const(0.0),
            init_b: FieldSpec::Const(1.0),
            init_omega: FieldSpec::Const(1.0),
            dt,
            t_end,
            scheme: SchemeOptions::default(),
            output: OutputPlan::default(),
            model: Model::Prandtl {
                ell: pp.0,
                c: pp.1,
            },
        }
    }

    #[test]
    fn coefficient_maps_match_reduction() {
        let pp = PrandtlParams::new(1.0, 1.0).unwrap();
        assert_eq!(pp.diffusivity(4.0), 2.0);
        assert_eq!(pp.sink(4.0), 8.0);
        assert_eq!(pp.diffusivity(0.0), 0.0);
        assert_eq!(pp.sink(0.0), 0.0);
        assert_eq!(pp.omega_of(9.0), 3.0);
        // ell != c separates the two maps.
        let pp = PrandtlParams::new(2.0, 0.5).unwrap();
        assert_eq!(pp.diffusivity(1.0), 4.0);
        assert_eq!(pp.sink(1.0), 0.25);
    }

    #[test]
    fn diffusivity_times_sink_is_b_squared() {
        // (ell/c) sqrt(b) * (c/ell) b sqrt(b) = b^2 for any ell, c.
        let mut x = 0.37_f64;
        for (ell, c) in [(1.0, 1.0), (0.5, 2.0), (3.0, 0.25)] {
            let pp = PrandtlParams::new(ell, c).unwrap();
            for _ in 0..100 {
                x = (x * 1103515245.0 + 12345.0) % 1.0;
                let b = 10.0 * x + 1e-6;
                let prod = pp.diffusivity(b) * pp.sink(b);
                assert!(
                    (prod - b * b).abs() <= 1e-12 * b * b,
                    "ell={ell} c={c} b={b}: {prod} vs {}",
                    b * b
                );
            }
        }
    }

    #[test]
    fn k_variable_maps_compose_with_b_of_k() {
        let pp = PrandtlParams::new(1.0, 1.0).unwrap();
        assert_eq!(pp.k_of_b(2.0), 3.0);
        assert_eq!(pp.b_of_k(3.0), 2.0);
        let (nu, mu, eps) = pp.coefficients_in_k(6.0, 1.0, 1.0);
        assert!((nu - 2.0).abs() < 1e-15); // b = 4, sqrt(b) = 2
        assert!((mu - 2.0).abs() < 1e-15);
        assert!((eps - 12.0).abs() < 1e-12);
    }

    #[test]
    fn homogeneous_decay_tracks_closed_form() {
        let sc = scenario(8, 1e-3, 1.0, (1.0, 1.0));
        let out = run_prandtl(&sc).unwrap();
        assert!(out.completed());
        let b_exact = prandtl_homogeneous_exact(&PrandtlParams::new(1.0, 1.0).unwrap(), 1.0, 1.0);
        match &out.final_state {
            SimState::One(s) => {
                for &b in &s.b {
                    assert!((b - b_exact).abs() < 5e-3, "{b} vs {b_exact}");
                }
                assert!(s.u.iter().all(|&u| u == 0.0), "v = 0 persists");
                // The omega channel carries the slaved frequency.
                assert!((s.omega[0] - s.b[0].sqrt()).abs() < 1e-15);
            }
            _ => panic!("expected 1D state"),
        }
    }

    #[test]
    fn decay_refines_first_order_in_dt() {
        let pp = PrandtlParams::new(1.0, 1.0).unwrap();
        let err_at = |dt: f64| {
            let sc = scenario(4, dt, 1.0, (1.0, 1.0));
            let out = run_prandtl(&sc).unwrap();
            let exact = prandtl_homogeneous_exact(&pp, 1.0, 1.0);
            match &out.final_state {
                SimState::One(s) => (s.b[0] - exact).abs(),
                _ => unreachable!(),
            }
        };
        let order = (err_at(2e-2) / err_at(1e-2)).log2();
        assert!(order > 0.9 && order < 1.5, "observed order {order}");
    }

    #[test]
    fn preserves_positivity_and_energy_identity() {
        let mut sc = scenario(32, 2e-3, 0.25, (0.7, 1.3));
        sc.init_u = FieldSpec::SinHalf {
            base: 0.0,
            amp: 1.0,
        };
        sc.boundary.y0.law = SlipLaw::NavierSlip { gamma_star: 0.5 };
        sc.boundary.y1.law = SlipLaw::NavierSlip { gamma_star: 0.5 };
        let out = run_prandtl(&sc).unwrap();
        assert!(out.completed());
        for r in &out.records {
            assert!(r.b_min > 0.0);
            let res = r.d_kinetic + r.num_diss + r.int_diss + r.wall_diss + r.wall_work;
            assert!(res.abs() <= 1e-13, "kinetic identity residual {res}");
        }
    }

    #[test]
    fn slaving_check_passes_iff_omega_is_slaved() {
        let pp = PrandtlParams::new(1.0, 1.0).unwrap();
        let mut sc = scenario(8, 1e-3, 0.1, (1.0, 1.0));
        // b = 1, omega = 1 = sqrt(b): slaved.
        let rec = consistency_check(&sc, &pp).unwrap();
        assert!(rec.slaved, "{rec:?}");
        assert!(rec.diffusivity_mismatch <= 1e-12);
        assert!(rec.sink_mismatch <= 1e-12);

        // omega held constant while b varies: not slaved, informational.
        sc.init_b = FieldSpec::CosHalf {
            base: 2.0,
            amp: 0.5,
        };
        let rec = consistency_check(&sc, &pp).unwrap();
        assert!(!rec.slaved);
    }

    #[test]
    fn rejects_wrong_model_and_2d_mode() {
        let mut sc = scenario(8, 1e-3, 0.1, (1.0, 1.0));
        sc.model = Model::Kolmogorov;
        assert!(run_prandtl(&sc).is_err());

        let mut sc = scenario(8, 1e-3, 0.1, (1.0, 1.0));
        sc.grid = Grid::channel_2d(8, 8, 0.125, 0.125);
        assert!(run_prandtl(&sc).is_err());
    }
}
