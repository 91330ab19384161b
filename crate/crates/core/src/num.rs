//! Tolerance helpers and exact integer logarithms.

/// Relative tolerance under which two reals count as equal for tie purposes.
pub const REL_TOL: f64 = 1e-12;

/// `|a - b| <= 1e-12 * max(|a|, |b|)`. Purely relative: hard instances carry
/// per-unit values far below any sensible absolute floor.
pub fn approx_eq(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= REL_TOL * a.abs().max(b.abs())
}

/// `a > b` and not approximately equal.
pub fn definitely_greater(a: f64, b: f64) -> bool {
    a > b && !approx_eq(a, b)
}

/// Relative comparison with a caller-chosen tolerance.
pub fn close(a: f64, b: f64, rel: f64) -> bool {
    a == b || (a - b).abs() <= rel * a.abs().max(b.abs())
}

/// Smallest `k` with `2^k >= n` (0 for n <= 1).
pub fn ceil_log2(n: u128) -> u32 {
    if n <= 1 {
        0
    } else {
        128 - (n - 1).leading_zeros()
    }
}

/// `floor(log2 n)` for n >= 1.
pub fn floor_log2(n: u128) -> u32 {
    debug_assert!(n >= 1);
    127 - n.leading_zeros()
}

/// Smallest `k` with `2^k >= n^2`, i.e. `ceil(2 log2 n)`.
pub fn ceil_two_log2(n: u128) -> u32 {
    if n <= 1 {
        return 0;
    }
    let f = floor_log2(n);
    if n.is_power_of_two() {
        return 2 * f;
    }
    // 2 log2 n lies in (2f, 2f+2); it is at most 2f+1 iff n^2 <= 2^(2f+1).
    let below = match n.checked_mul(n) {
        Some(sq) if 2 * f + 1 < 128 => sq <= 1u128 << (2 * f + 1),
        _ => (n as f64).log2() * 2.0 <= (2 * f + 1) as f64,
    };
    if below {
        2 * f + 1
    } else {
        2 * f + 2
    }
}

/// `2^e` as f64 for any integer exponent in range.
pub fn pow2(e: i32) -> f64 {
    2f64.powi(e)
}

/// Format like C's `%.17g`.
pub fn fmt_g17(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.16e}", x);
    let (mant, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("exponent digits");
    let neg = mant.starts_with('-');
    let digits: String = mant.chars().filter(|c| c.is_ascii_digit()).collect();
    let sign = if neg { "-" } else { "" };
    if !(-4..17).contains(&exp) {
        let mut m = format!("{}.{}", &digits[..1], &digits[1..]);
        trim_fraction(&mut m);
        let es = if exp < 0 { '-' } else { '+' };
        return format!("{sign}{m}e{es}{:02}", exp.abs());
    }
    let mut out = if exp >= 0 {
        let int_len = exp as usize + 1;
        format!("{}.{}", &digits[..int_len], &digits[int_len..])
    } else {
        format!("0.{}{}", "0".repeat((-exp - 1) as usize), digits)
    };
    trim_fraction(&mut out);
    format!("{sign}{out}")
}

fn trim_fraction(s: &mut String) {
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logs() {
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(4), 2);
        assert_eq!(ceil_log2(5), 3);
        assert_eq!(ceil_log2(1 << 81), 81);
        for n in 1u128..2000 {
            let want = (0..).find(|&k| 1u128 << k >= n * n).unwrap();
            assert_eq!(ceil_two_log2(n), want, "n={n}");
        }
    }

    #[test]
    fn g17_matches_c() {
        assert_eq!(fmt_g17(0.8), "0.80000000000000004");
        assert_eq!(fmt_g17(1.0), "1");
        assert_eq!(fmt_g17(8748.0), "8748");
        assert_eq!(fmt_g17(1e-20), "9.9999999999999995e-21");
        assert_eq!(fmt_g17(0.0001), "0.0001");
        assert_eq!(fmt_g17(-2.5), "-2.5");
        assert_eq!(fmt_g17(1e17), "1e+17");
    }

    #[test]
    fn relative_only() {
        assert!(approx_eq(1e-30, 1e-30 * (1.0 + 1e-13)));
        assert!(!approx_eq(1e-30, 2e-30));
        assert!(!definitely_greater(1.0 + 1e-14, 1.0));
    }
}
