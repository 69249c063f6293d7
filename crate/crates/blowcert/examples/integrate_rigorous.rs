//! Validated integration: every step returns a box enclosing the exact
//! flow, and the endpoint enclosure contracts along a stable approach.

use blowcert::field::desing_para;
use blowcert::integrate::{integrate_for, integrate_until, WithTime};
use blowcert::problems::builtin_problems;
use blowcert::IntervalVector;

fn main() {
    let problem = builtin_problems()
        .into_iter()
        .find(|p| p.id == "kk-simple")
        .unwrap();
    let field = desing_para(problem.model.clone());

    // Chart start corresponding to raw data near (-0.1, -0.1); the extra
    // component accumulates the original time t as part of the state.
    let z0 = IntervalVector::from_points(&[-0.0995, -0.0991, 0.0]);
    let rhs = WithTime(&field);

    let traj = integrate_for(&rhs, &z0, 5.0, 1e-10).unwrap();
    println!("{} accepted steps to tau = 5", traj.steps.len());
    for step in traj.steps.iter().step_by(4) {
        println!(
            "tau {:>5.2}: x1 in {:?} (width {:.2e})",
            step.tau.hi(),
            step.tight_endpoint[0],
            step.tight_endpoint[0].width()
        );
    }
    println!(
        "elapsed original time t in {:?} (width {:.2e})",
        traj.t_elapsed,
        traj.t_elapsed.width()
    );

    // Driving by a predicate instead of a clock: stop once x1 > 0.9.
    let further = integrate_until(&rhs, &z0, |x| x[0].lo() > 0.9, 100.0, 1e-10).unwrap();
    println!(
        "x1 passes 0.9 at tau = {} with t in {:?}",
        further.tau_end, further.t_elapsed
    );
}
