//! Homogeneous decay against the closed-form ODE solution.
//!
//! With v = 0 and spatially constant data the PDE system collapses to
//!
//!   db/dt = -b omega,      domega/dt = -kappa2 omega^2,
//!
//! whose exact solution from b0 = omega0 = 1 with normalized constants
//! (kappa2 = 1) is b(t) = omega(t) = 1/(1+t). The splitting scheme applies
//! the sink through positivity-preserving quotients, so the discrete orbit
//! stays inside (0, 1] and tracks the hyperbola to first order (Lie) or
//! second order (Strang) in dt.

use kturb::core::{FieldSpec, Model, Scenario, SimState};
use kturb::stepper::{homogeneous_exact, run};

fn base() -> Scenario {
    let mut sc = Scenario::from_json_text(
        r#"{ "name": "homogeneous", "grid.ny": 8, "grid.dy": 0.125,
             "time.dt": 0.001, "time.t_end": 1.0 }"#,
    )
    .expect("scenario parses");
    sc.init_u = FieldSpec::Const(0.0);
    sc.init_b = FieldSpec::Const(1.0);
    sc.init_omega = FieldSpec::Const(1.0);
    sc.model = Model::Kolmogorov;
    sc
}

fn final_error(sc: &Scenario) -> f64 {
    let out = run(sc).expect("run succeeds");
    assert!(out.completed(), "run must finish");
    let (b_ex, w_ex) = homogeneous_exact(1.0, 1.0, sc.params.k2(), sc.t_end);
    match &out.final_state {
        SimState::One(s) => s
            .b
            .iter()
            .zip(&s.omega)
            .map(|(&b, &w)| (b - b_ex).abs().max((w - w_ex).abs()))
            .fold(0.0_f64, f64::max),
        _ => unreachable!("1D scenario"),
    }
}

fn main() {
    let sc = base();
    let (b_ex, w_ex) = homogeneous_exact(1.0, 1.0, sc.params.k2(), 1.0);
    println!("exact at t = 1:  b = {b_ex:.12}, omega = {w_ex:.12}");
    println!("error at dt = 1e-3 (Lie): {:.3e}", final_error(&sc));

    println!("\n{:>10} {:>14} {:>14} {:>8} {:>8}", "dt", "err(Lie)", "err(Strang)", "p(Lie)", "p(Str)");
    let mut prev: Option<(f64, f64)> = None;
    for i in 0..5 {
        let dt = 0.02 / f64::powi(2.0, i);
        let mut lie = sc.clone();
        lie.dt = dt;
        let mut strang = sc.clone();
        strang.dt = dt;
        strang.scheme.splitting = kturb::core::Splitting::Strang;
        let (el, es) = (final_error(&lie), final_error(&strang));
        let orders = prev
            .map(|(pl, ps)| format!("{:>8.3} {:>8.3}", (pl / el).log2(), (ps / es).log2()))
            .unwrap_or_else(|| format!("{:>8} {:>8}", "-", "-"));
        println!("{:>10.1e} {:>14.6e} {:>14.6e} {orders}", dt, el, es);
        prev = Some((el, es));
    }
}
