//! The desingularized chart field g: smooth up to the horizon, with the
//! horizon itself invariant. Blow-up solutions become trajectories that
//! converge to equilibria on p = 1.

use blowcert::field::{desing_para, horizon_residual, VectorFieldModel};
use blowcert::problems::builtin_problems;
use blowcert::IntervalVector;

fn main() {
    let problem = builtin_problems()
        .into_iter()
        .find(|p| p.id == "kk-simple")
        .unwrap();
    let field = desing_para(problem.model.clone());

    // The chart velocity at an interior point and near the horizon.
    for pt in [[0.3, 0.2], [0.98, 0.2]] {
        let x = IntervalVector::from_points(&pt);
        let g = field.eval_g(&x);
        println!("g({pt:?}) = [{:?}, {:?}]", g[0], g[1]);
    }

    // Time desingularization: dt/dtau vanishes toward the horizon, which
    // is how a finite blow-up time stretches to infinite chart time.
    for pt in [[0.3, 0.2], [0.9, 0.3], [0.988, 0.206]] {
        let x = IntervalVector::from_points(&pt);
        println!("dt/dtau at {pt:?}: {:?}", field.dt_dtau(&x));
    }

    // The horizon-invariance identity holds everywhere in the chart; its
    // outward evaluation must enclose zero.
    let x = IntervalVector::from_points(&[0.7, -0.4]);
    println!("horizon residual at interior point: {:?}", horizon_residual(&field, &x));

    // The Jacobian enclosure drives both the integrator and the
    // equilibrium certification.
    let x_star = IntervalVector::from_points(&[0.9891, 0.2068]);
    let j = field.eval_dg(&x_star);
    println!(
        "Dg near the sink: [[{:.4}, {:.4}], [{:.4}, {:.4}]]",
        j[(0, 0)].mid(),
        j[(0, 1)].mid(),
        j[(1, 0)].mid(),
        j[(1, 1)].mid()
    );
}
