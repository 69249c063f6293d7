//! Outward-rounded interval arithmetic: every operation returns an
//! enclosure of the exact result, and the decimal rendering preserves
//! that guarantee across the text boundary.

use blowcert::interval::{fmt_outward, Direction};
use blowcert::Interval;

fn main() {
    let third = Interval::one() / Interval::point(3.0);
    println!("1/3 in {third:?} (width {:.3e})", third.width());

    // Dependency is the price of soundness: x - x encloses 0 but is not 0.
    let x = Interval::new(1.0, 2.0);
    println!("x - x = {:?} for x = {x:?}", x - x);

    // Monotone pipelines stay tight: the enclosure of sqrt(x^2 + 1).
    let y = (x.powi(2) + Interval::one()).sqrt().unwrap();
    println!("sqrt(x^2 + 1) = {y:?}");

    // Division by an interval containing zero has no finite enclosure.
    let denom = Interval::new(-0.5, 0.5);
    println!("x / {denom:?} -> {:?}", x.checked_div(&denom));

    // 17-digit outward decimals bound the binary value from both sides.
    let v = 0.1f64;
    println!(
        "0.1 is enclosed by [{}, {}]",
        fmt_outward(v, Direction::Down),
        fmt_outward(v, Direction::Up)
    );
}
