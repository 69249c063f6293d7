//! Compactifying phase space: the quasi-parabolic chart maps all of R^n
//! into the open unit ball of the functional p, the directional chart
//! covers one half-space; infinity becomes the horizon p = 1 (s = 0).

use blowcert::compact::{
    dir_forward, make_type, p_functional, para_forward, para_inverse, CompactChart, Sign,
};
use blowcert::IntervalVector;

fn main() {
    // Type (1, 2): the planar principal model's quasi-homogeneity.
    let t = make_type(&[1, 2], 1).unwrap();

    for scale in [1.0, 10.0, 1000.0] {
        let y = IntervalVector::from_points(&[-0.1 * scale, 0.2 * scale * scale]);
        let (x, kappa) = para_forward(&y, &t).unwrap();
        println!(
            "|y| ~ {scale:>6}: p(x) in {:?}, kappa in {:?}",
            p_functional(&x, &t),
            kappa
        );
    }

    // Round trip: the preimage enclosure keeps the original point.
    let y = IntervalVector::from_points(&[-0.1, 0.0001]);
    let (x, _) = para_forward(&y, &t).unwrap();
    let back = para_inverse(&x, &t).unwrap();
    println!("forward then back: y1 in {:?}, y2 in {:?}", back[0], back[1]);

    // The directional chart on the positive first axis: y1 = s^{-1}.
    let chart = CompactChart::directional(t, 0, Sign::Plus).unwrap();
    let y = IntervalVector::from_points(&[50.0, 12.0]);
    let (s, rest) = dir_forward(&y, &chart).unwrap();
    println!("directional: s in {s:?}, transverse {:?}", rest[0]);
}
