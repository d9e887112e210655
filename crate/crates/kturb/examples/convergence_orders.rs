//! Observed temporal and spatial convergence orders.
//!
//! Temporal: the homogeneous decay has the closed-form solution
//! b = omega = 1/(1+t), so the error of the splitting scheme can be measured
//! exactly; Lie splitting is first order, Strang second. Spatial: a decaying
//! shear between free-slip walls is compared against a reference run on the
//! same time grid with four times the resolution; halving dy (with dt tied
//! to dy^2 so the temporal error refines at the same rate) shows the
//! second-order accuracy of the face-flux discretization.

use kturb::core::{Scenario, SimState, Splitting};
use kturb::diagnostics::{convergence_study, ConvergenceRow};
use kturb::stepper::{homogeneous_exact, run};

fn print_table(title: &str, rows: &[ConvergenceRow]) {
    println!("\n{title}");
    println!("{:>5} {:>12} {:>12} {:>14} {:>8}", "level", "dt", "h", "error", "order");
    for r in rows {
        let order = r.order.map(|o| format!("{o:.3}")).unwrap_or_else(|| "-".into());
        println!("{:>5} {:>12.4e} {:>12.4e} {:>14.6e} {:>8}", r.level, r.dt, r.h, r.error, order);
    }
}

fn main() {
    let mut homog = Scenario::from_file("scenarios/homogeneous.json".as_ref())
        .expect("run from the repository root");
    homog.t_end = 1.0;

    let oracle = |sc: &Scenario, s: &SimState| -> f64 {
        let (b_ex, w_ex) = homogeneous_exact(1.0, 1.0, sc.params.k2(), sc.t_end);
        match s {
            SimState::One(s) => s
                .b
                .iter()
                .zip(&s.omega)
                .map(|(&b, &w)| (b - b_ex).abs().max((w - w_ex).abs()))
                .fold(0.0_f64, f64::max),
            _ => unreachable!(),
        }
    };
    let ladder: Vec<(f64, usize)> = (0..4).map(|i| (0.02 / f64::powi(2.0, i), 16)).collect();
    let rows = convergence_study(&homog, &ladder, &oracle).expect("study runs");
    print_table("temporal, Lie splitting (closed-form oracle):", &rows);

    homog.scheme.splitting = Splitting::Strang;
    let rows = convergence_study(&homog, &ladder, &oracle).expect("study runs");
    print_table("temporal, Strang splitting:", &rows);

    // Spatial: reference run at 4x the finest resolution, error sampled by
    // cell-block averaging onto each coarse grid.
    let base = Scenario::from_json_text(
        r#"{ "name": "spatial", "grid.ny": 256, "grid.dy": 0.00390625,
             "init.u": "sinhalf:0:1", "init.b": "const:1", "init.omega": "const:2",
             "time.dt": 0.0001220703125, "time.t_end": 0.0625 }"#,
    )
    .expect("scenario parses");
    let reference = match run(&base).expect("reference run").final_state {
        SimState::One(s) => s,
        _ => unreachable!(),
    };
    println!("\nspatial, dt tied to dy^2 (fine-grid reference):");
    println!("{:>5} {:>12} {:>14} {:>8}", "ny", "dy", "error", "order");
    let mut prev: Option<f64> = None;
    for ny in [32usize, 64, 128] {
        let mut sc = base.clone();
        let block = 256 / ny;
        sc.grid = kturb::core::Grid::channel_1d(ny, 1.0 / ny as f64);
        sc.dt = base.dt * (block * block) as f64;
        let s = match run(&sc).expect("run").final_state {
            SimState::One(s) => s,
            _ => unreachable!(),
        };
        let mut err = 0.0_f64;
        for j in 0..ny {
            let avg: f64 = (0..block).map(|r| reference.u[j * block + r]).sum::<f64>()
                / block as f64;
            err = err.max((s.u[j] - avg).abs());
        }
        let order = prev.map(|p| format!("{:.3}", (p / err).log2())).unwrap_or_else(|| "-".into());
        println!("{:>5} {:>12.4e} {:>14.6e} {:>8}", ny, sc.grid.dy, err, order);
        prev = Some(err);
    }
}
