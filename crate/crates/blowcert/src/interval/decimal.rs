//! Exact outward decimal rendering of binary floats.
//!
//! Every finite f64 is a dyadic rational with a finite decimal expansion;
//! we compute that expansion exactly with digit-string arithmetic and round
//! it outward to 17 significant digits. The emitted string is therefore a
//! true decimal bound for the binary value it came from, not merely a
//! round-trippable rendering.

/// Rounding direction for [`fmt_outward`].
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Direction {
    Down,
    Up,
}

const SIG_DIGITS: usize = 17;

/// Formats `v` as a decimal string `d.dddd…e±k` that bounds `v` from the
/// requested side: `Down` yields a decimal `<= v`, `Up` a decimal `>= v`.
pub fn fmt_outward(v: f64, dir: Direction) -> String {
    assert!(v.is_finite(), "outward decimal of non-finite value");
    if v == 0.0 {
        return "0".to_string();
    }
    let neg = v < 0.0;
    let (digits, exp10) = exact_decimal_digits(v.abs());
    // Value is digits (most significant first) times 10^exp10.
    let (mut kept, extra_carry, inexact) = round_digits(&digits, neg, dir);
    let mut exp = exp10 + digits.len() as i64 - 1;
    if extra_carry {
        // 999… rolled over to 100…; one more decade.
        exp += 1;
    }
    let _ = inexact;
    while kept.len() > 1 && *kept.last().unwrap() == 0 {
        kept.pop();
    }
    let mut out = String::new();
    if neg {
        out.push('-');
    }
    out.push((b'0' + kept[0]) as char);
    if kept.len() > 1 {
        out.push('.');
        for &d in &kept[1..] {
            out.push((b'0' + d) as char);
        }
    }
    out.push('e');
    out.push_str(&exp.to_string());
    out
}

/// Parses a decimal string into an f64 bounding it from the requested
/// side: `Down` yields a float `<=` the written value, `Up` one `>=` it.
/// The direction is enforced by exact rational comparison, so the result
/// is a true bound regardless of how the nearest-float parse rounded.
pub fn parse_outward(s: &str, dir: Direction) -> Option<f64> {
    let exact = decimal_to_rational(s)?;
    let near: f64 = s.trim().parse().ok()?;
    let mut v = if near.is_finite() {
        near
    } else if near > 0.0 {
        f64::MAX
    } else {
        f64::MIN
    };
    let above = |v: f64| num::BigRational::from_float(v).map_or(false, |r| r > exact);
    let below = |v: f64| num::BigRational::from_float(v).map_or(false, |r| r < exact);
    match dir {
        Direction::Down => {
            while v.is_finite() && above(v) {
                v = next_down(v);
            }
        }
        Direction::Up => {
            while v.is_finite() && below(v) {
                v = next_up(v);
            }
        }
    }
    v.is_finite().then_some(v)
}

fn next_down(v: f64) -> f64 {
    if v == f64::NEG_INFINITY {
        return v;
    }
    if v == 0.0 {
        return -f64::from_bits(1);
    }
    let bits = v.to_bits();
    f64::from_bits(if v > 0.0 { bits - 1 } else { bits + 1 })
}

fn next_up(v: f64) -> f64 {
    -next_down(-v)
}

/// Exact rational value of a decimal string `[-]ddd[.ddd][e±k]`.
fn decimal_to_rational(s: &str) -> Option<num::BigRational> {
    use num::bigint::BigInt;
    let s = s.trim();
    let (mantissa, exp_str) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], &s[i + 1..]),
        None => (s, "0"),
    };
    let exp: i64 = exp_str.parse().ok()?;
    let (sign, body) = match mantissa.strip_prefix('-') {
        Some(rest) => (-1, rest),
        None => (1, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = match body.find('.') {
        Some(i) => (&body[..i], &body[i + 1..]),
        None => (body, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    let digits: String = [int_part, frac_part].concat();
    if !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let numer: BigInt = digits.parse().ok()?;
    let scale = exp - frac_part.len() as i64;
    if scale.unsigned_abs() > 20_000 {
        return None;
    }
    let ten = BigInt::from(10);
    let (n, d) = if scale >= 0 {
        (numer * ten.pow(scale as u32), BigInt::from(1))
    } else {
        (numer, ten.pow((-scale) as u32))
    };
    Some(num::BigRational::new(n * BigInt::from(sign), d))
}

/// Truncate/round magnitude digits to 17 places in the outward direction.
/// Returns (kept digits, carry-overflow flag, inexact flag).
fn round_digits(digits: &[u8], neg: bool, dir: Direction) -> (Vec<u8>, bool, bool) {
    if digits.len() <= SIG_DIGITS {
        return (digits.to_vec(), false, false);
    }
    let (head, tail) = digits.split_at(SIG_DIGITS);
    let mut kept = head.to_vec();
    let inexact = tail.iter().any(|&d| d != 0);
    if !inexact {
        return (kept, false, false);
    }
    // Outward on the real line: positive+Down and negative+Up truncate the
    // magnitude; the other two cases round the magnitude up.
    let magnitude_up = matches!(
        (neg, dir),
        (false, Direction::Up) | (true, Direction::Down)
    );
    let mut carry = false;
    if magnitude_up {
        carry = true;
        for d in kept.iter_mut().rev() {
            if *d == 9 {
                *d = 0;
            } else {
                *d += 1;
                carry = false;
                break;
            }
        }
        if carry {
            kept = std::iter::once(1).chain(kept.into_iter()).collect();
            kept.truncate(SIG_DIGITS);
        }
    }
    (kept, carry, true)
}

/// Exact decimal expansion of a positive finite f64.
/// Returns (digits most-significant-first, exponent e) with
/// value = digits · 10^e (interpreting digits as an integer).
fn exact_decimal_digits(v: f64) -> (Vec<u8>, i64) {
    debug_assert!(v > 0.0 && v.is_finite());
    let bits = v.to_bits();
    let exp_bits = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    let (m, p): (u64, i64) = if exp_bits == 0 {
        (frac, -1074)
    } else {
        (frac | (1u64 << 52), exp_bits - 1075)
    };
    // Little-endian digit string of m.
    let mut digits: Vec<u8> = Vec::with_capacity(800);
    let mut mm = m;
    if mm == 0 {
        digits.push(0);
    }
    while mm > 0 {
        digits.push((mm % 10) as u8);
        mm /= 10;
    }
    let exp10;
    if p >= 0 {
        for _ in 0..p {
            scale_le(&mut digits, 2);
        }
        exp10 = 0;
    } else {
        // m·2^p = m·5^{-p} · 10^{p}
        for _ in 0..(-p) {
            scale_le(&mut digits, 5);
        }
        exp10 = p;
    }
    digits.reverse();
    // Strip leading zeros (kept little-endian trailing zeros are significant).
    let lead = digits.iter().take_while(|&&d| d == 0).count();
    digits.drain(..lead);
    (digits, exp10)
}

/// Multiply a little-endian digit string in place by a small factor.
fn scale_le(digits: &mut Vec<u8>, factor: u8) {
    let mut carry: u32 = 0;
    for d in digits.iter_mut() {
        let t = *d as u32 * factor as u32 + carry;
        *d = (t % 10) as u8;
        carry = t / 10;
    }
    while carry > 0 {
        digits.push((carry % 10) as u8);
        carry /= 10;
    }
}

#[cfg(test)]
mod unit {
    use super::*;

    #[test]
    fn exact_small_integers_render_plainly() {
        assert_eq!(fmt_outward(1.0, Direction::Down), "1e0");
        assert_eq!(fmt_outward(1.0, Direction::Up), "1e0");
        assert_eq!(fmt_outward(-2.5, Direction::Down), "-2.5e0");
        assert_eq!(fmt_outward(0.0, Direction::Up), "0");
    }

    #[test]
    fn parse_bounds_the_written_value() {
        // 0.1 is not dyadic: the two directions must straddle it.
        let lo = parse_outward("0.1", Direction::Down).unwrap();
        let hi = parse_outward("0.1", Direction::Up).unwrap();
        assert!(lo < hi, "{lo} vs {hi}");
        assert_eq!(hi, 0.1f64.max(lo));
        assert!(decimal_to_rational("0.1").unwrap() > num::BigRational::from_float(lo).unwrap());
        assert!(decimal_to_rational("0.1").unwrap() < num::BigRational::from_float(hi).unwrap());
        // Exact dyadics parse to themselves in both directions.
        for s in ["0", "1e0", "-2.5e0", "0.25", "4096"] {
            let lo = parse_outward(s, Direction::Down).unwrap();
            let hi = parse_outward(s, Direction::Up).unwrap();
            assert_eq!(lo, hi, "{s}");
        }
        assert_eq!(parse_outward("junk", Direction::Up), None);
        assert_eq!(parse_outward("1e999", Direction::Up), None);
        assert_eq!(parse_outward("1e999", Direction::Down), Some(f64::MAX));
    }

    #[test]
    fn format_then_parse_recovers_the_float() {
        for &v in &[0.1, -1.0 / 3.0, 84.083_706_663_650_346, f64::MIN_POSITIVE] {
            let down = fmt_outward(v, Direction::Down);
            let up = fmt_outward(v, Direction::Up);
            assert!(parse_outward(&down, Direction::Down).unwrap() <= v);
            assert!(parse_outward(&up, Direction::Up).unwrap() >= v);
        }
    }

    #[test]
    fn outward_strings_bracket_the_value() {
        for &v in &[
            0.1,
            -0.1,
            1.0 / 3.0,
            84.083847337835138,
            6.2012442938861261e-5,
            -5.670_002_325_218_021e-5,
            f64::MIN_POSITIVE,
            1.7976931348623157e308,
        ] {
            let lo: f64 = fmt_outward(v, Direction::Down).parse().unwrap();
            let hi: f64 = fmt_outward(v, Direction::Up).parse().unwrap();
            // Parsing rounds to nearest, which is monotone, so the parsed
            // bounds can each be off by at most one ulp toward v.
            assert!(lo <= v, "lo {lo:e} > v {v:e}");
            assert!(hi >= v, "hi {hi:e} < v {v:e}");
            assert!(v - lo <= 2.0 * (v.abs() * 1e-16 + f64::MIN_POSITIVE));
            assert!(hi - v <= 2.0 * (v.abs() * 1e-16 + f64::MIN_POSITIVE));
        }
    }

    #[test]
    fn one_third_rounds_both_ways() {
        let lo = fmt_outward(1.0 / 3.0, Direction::Down);
        let hi = fmt_outward(1.0 / 3.0, Direction::Up);
        assert_ne!(lo, hi);
        let lo_tail: char = lo.chars().nth(17).unwrap();
        let hi_tail: char = hi.chars().nth(17).unwrap();
        let lo_d = lo_tail.to_digit(10).unwrap();
        let hi_d = hi_tail.to_digit(10).unwrap();
        assert_eq!(hi_d, lo_d + 1);
    }
}
