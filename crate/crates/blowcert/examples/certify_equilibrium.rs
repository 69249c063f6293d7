//! Certifying the blow-up target: a verified horizon equilibrium, a
//! quadratic Lyapunov function, and a domain where it strictly decreases.

use blowcert::field::desing_para;
use blowcert::lyapunov::{
    build_y, certify_domain, default_radius_schedule, validate_equilibrium,
};
use blowcert::problems::builtin_problems;

fn main() {
    let problem = builtin_problems()
        .into_iter()
        .find(|p| p.id == "kk-simple")
        .unwrap();
    let field = desing_para(problem.model.clone());

    // A coarse seed suffices: Newton polishes it, then the interval
    // verification proves a unique zero in a tight box.
    let x_star = validate_equilibrium(&field, &[0.99, 0.2]).unwrap();
    println!("sink enclosure:");
    for i in 0..2 {
        println!("  x{}* in {:?} (width {:.2e})", i + 1, x_star[i], x_star[i].width());
    }

    let y = build_y(&field.eval_dg(&x_star).mid_dmatrix()).unwrap();
    println!("Lyapunov metric Y = [[{:.4}, {:.4}], [{:.4}, {:.4}]]",
        y[(0, 0)], y[(0, 1)], y[(1, 0)], y[(1, 1)]);

    let cert = certify_domain(&field, &x_star, &y, &default_radius_schedule()).unwrap();
    println!("certified box half-width: {}", cert.domain_radius);
    println!("A(x) <= -c_a I with c_a in {:?}", cert.c_a);
    println!("spectrum of Y within [{:?}, {:?}]", cert.lam_min_y, cert.lam_max_y);
    println!("sublevel threshold eps = {:.3e}", cert.eps);
    println!("decay constants: c1 in {:?}, c_tilde in {:?}", cert.c1, cert.c_tilde_n);
}
