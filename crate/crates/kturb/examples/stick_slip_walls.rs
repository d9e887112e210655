//! Threshold slip: the wall sticks until the traction reaches sigma*.
//!
//! The threshold law couples tangential traction s and slip velocity v_tau
//! through
//!
//!   |s| <= sigma*           if v_tau = 0          (stick branch),
//!   s = sigma* s/|s| + gamma* v_tau  otherwise    (slip branch),
//!
//! and the implicit interior stencil supplies the impedance relation
//! s = A - B v_tau with B > 0. The selection is sharp: the wall sticks iff
//! |A| <= sigma*. This example sweeps A through the threshold and then shows
//! the same transition dynamically, in a decaying shear flow whose wall
//! traction drops below sigma* mid-run and re-sticks.

use kturb::core::Scenario;
use kturb::slipbc::{solve_wall, LawCtx, SlipLaw};
use kturb::stepper::run;

fn main() {
    let law = SlipLaw::ThresholdSlip {
        sigma_star: 1.0,
        gamma_star: 2.0,
    };
    let ctx = LawCtx::new(0.0, 0.0, 1.0, 1.0);

    println!("{:>8} {:>12} {:>12} {:>8}", "A", "s", "v_tau", "branch");
    for a in [0.25, 0.75, 1.0, 1.25, 2.0, 4.0] {
        let w = solve_wall(&law, &ctx, [a, 0.0], 1.0).expect("canonical law");
        let branch = if w.v_tau[0] == 0.0 { "stick" } else { "slip" };
        println!("{:>8.2} {:>12.6} {:>12.6} {:>8}", a, w.s[0], w.v_tau[0], branch);
    }

    // Dynamic transition: traction decays with the shear; the wall slips
    // early and sticks once |s| falls to sigma*.
    let sc = Scenario::from_file("scenarios/shear_threshold.json".as_ref())
        .expect("run from the repository root");
    let out = run(&sc).expect("run succeeds");
    assert!(out.completed());

    println!("\n{:>6} {:>12} {:>12} {:>8}", "t", "|s| (y1)", "v_tau (y1)", "branch");
    let mut last = "";
    for r in &out.records {
        let s = r.wall_s[1].abs();
        let branch = if r.wall_vtau[1] == 0.0 { "stick" } else { "slip" };
        if branch != last || r.step % 50 == 0 {
            println!("{:>6.3} {:>12.6e} {:>12.6e} {:>8}", r.t, s, r.wall_vtau[1], branch);
            last = branch;
        }
    }
}
