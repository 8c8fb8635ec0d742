//! Wigner 3-j and 6-j symbols from the Racah closed-form sums.
//!
//! Arguments are plain `f64` angular momenta; integers and half-integers are
//! accepted. Anything that is not a valid combination (non half-integral
//! values, `|m| > j`, broken triangle, `m1 + m2 + m3 != 0`) yields exactly
//! `0.0`. Phases follow the Condon-Shortley convention.

const MAX_FACTORIAL: usize = 170;

fn factorial(n: i64) -> f64 {
    debug_assert!(n >= 0 && (n as usize) <= MAX_FACTORIAL);
    thread_local! {
        static TABLE: Vec<f64> = {
            let mut t = Vec::with_capacity(MAX_FACTORIAL + 1);
            t.push(1.0);
            for k in 1..=MAX_FACTORIAL {
                let prev = t[k - 1];
                t.push(prev * k as f64);
            }
            t
        };
    }
    TABLE.with(|t| t[n as usize])
}

/// Twice the value of a (half-)integer, or `None` when `x` is not one.
pub(crate) fn doubled(x: f64) -> Option<i64> {
    let t = (2.0 * x).round();
    if (2.0 * x - t).abs() > 1e-9 || !t.is_finite() {
        None
    } else {
        Some(t as i64)
    }
}

fn triangle(tj1: i64, tj2: i64, tj3: i64) -> bool {
    tj1 >= 0
        && tj2 >= 0
        && tj3 >= 0
        && tj3 >= (tj1 - tj2).abs()
        && tj3 <= tj1 + tj2
        && (tj1 + tj2 + tj3) % 2 == 0
}

/// sqrt of the triangle coefficient, all arguments doubled.
fn delta_coefficient(tj1: i64, tj2: i64, tj3: i64) -> f64 {
    let num = factorial((tj1 + tj2 - tj3) / 2)
        * factorial((tj1 - tj2 + tj3) / 2)
        * factorial((-tj1 + tj2 + tj3) / 2);
    let den = factorial((tj1 + tj2 + tj3) / 2 + 1);
    (num / den).sqrt()
}

fn sign(k: i64) -> f64 {
    if k.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Wigner 3-j symbol `(j1 j2 j3; m1 m2 m3)`.
pub fn wigner3j(j1: f64, j2: f64, j3: f64, m1: f64, m2: f64, m3: f64) -> f64 {
    let (Some(tj1), Some(tj2), Some(tj3), Some(tm1), Some(tm2), Some(tm3)) = (
        doubled(j1),
        doubled(j2),
        doubled(j3),
        doubled(m1),
        doubled(m2),
        doubled(m3),
    ) else {
        return 0.0;
    };
    wigner3j_doubled(tj1, tj2, tj3, tm1, tm2, tm3)
}

pub(crate) fn wigner3j_doubled(tj1: i64, tj2: i64, tj3: i64, tm1: i64, tm2: i64, tm3: i64) -> f64 {
    if !triangle(tj1, tj2, tj3) || tm1 + tm2 + tm3 != 0 {
        return 0.0;
    }
    for (tj, tm) in [(tj1, tm1), (tj2, tm2), (tj3, tm3)] {
        if tm.abs() > tj || (tj - tm) % 2 != 0 {
            return 0.0;
        }
    }

    // All of these are integers once the parity checks above pass.
    let a = (tj3 - tj2 + tm1) / 2;
    let b = (tj3 - tj1 - tm2) / 2;
    let c = (tj1 + tj2 - tj3) / 2;
    let d = (tj1 - tm1) / 2;
    let e = (tj2 + tm2) / 2;

    let k_min = 0.max(-a).max(-b);
    let k_max = c.min(d).min(e);
    if k_min > k_max {
        return 0.0;
    }

    let mut sum = 0.0;
    for k in k_min..=k_max {
        let den = factorial(k)
            * factorial(a + k)
            * factorial(b + k)
            * factorial(c - k)
            * factorial(d - k)
            * factorial(e - k);
        sum += sign(k) / den;
    }

    let norm = (factorial((tj1 + tm1) / 2)
        * factorial((tj1 - tm1) / 2)
        * factorial((tj2 + tm2) / 2)
        * factorial((tj2 - tm2) / 2)
        * factorial((tj3 + tm3) / 2)
        * factorial((tj3 - tm3) / 2))
    .sqrt();

    sign((tj1 - tj2 - tm3) / 2) * delta_coefficient(tj1, tj2, tj3) * norm * sum
}

/// Wigner 6-j symbol `{j1 j2 j3; j4 j5 j6}`.
pub fn wigner6j(j1: f64, j2: f64, j3: f64, j4: f64, j5: f64, j6: f64) -> f64 {
    let (Some(a1), Some(a2), Some(a3), Some(a4), Some(a5), Some(a6)) = (
        doubled(j1),
        doubled(j2),
        doubled(j3),
        doubled(j4),
        doubled(j5),
        doubled(j6),
    ) else {
        return 0.0;
    };
    wigner6j_doubled(a1, a2, a3, a4, a5, a6)
}

pub(crate) fn wigner6j_doubled(tj1: i64, tj2: i64, tj3: i64, tj4: i64, tj5: i64, tj6: i64) -> f64 {
    let triads = [
        (tj1, tj2, tj3),
        (tj1, tj5, tj6),
        (tj4, tj2, tj6),
        (tj4, tj5, tj3),
    ];
    if triads.iter().any(|&(a, b, c)| !triangle(a, b, c)) {
        return 0.0;
    }

    let alpha = triads.map(|(a, b, c)| (a + b + c) / 2);
    let beta = [
        (tj1 + tj2 + tj4 + tj5) / 2,
        (tj2 + tj3 + tj5 + tj6) / 2,
        (tj3 + tj1 + tj6 + tj4) / 2,
    ];

    let t_min = *alpha.iter().max().unwrap();
    let t_max = *beta.iter().min().unwrap();
    if t_min > t_max {
        return 0.0;
    }

    let mut sum = 0.0;
    for t in t_min..=t_max {
        let mut den = 1.0;
        for a in alpha {
            den *= factorial(t - a);
        }
        for b in beta {
            den *= factorial(b - t);
        }
        sum += sign(t) * factorial(t + 1) / den;
    }

    let pref: f64 = triads
        .iter()
        .map(|&(a, b, c)| delta_coefficient(a, b, c))
        .product();
    pref * sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn odd_sum_with_zero_projections_vanishes() {
        assert_eq!(wigner3j(1.0, 1.0, 1.0, 0.0, 0.0, 0.0), 0.0);
        assert_eq!(wigner3j(2.0, 2.0, 1.0, 0.0, 0.0, 0.0), 0.0);
    }

    #[test]
    fn coupling_to_zero_closed_form() {
        assert_abs_diff_eq!(
            wigner3j(1.0, 1.0, 0.0, 0.0, 0.0, 0.0),
            -1.0 / 3f64.sqrt(),
            epsilon = 1e-15
        );
        for tj in 0..8i64 {
            let j = tj as f64 / 2.0;
            let mut tm = -tj;
            while tm <= tj {
                let m = tm as f64 / 2.0;
                let expected = sign((tj - tm) / 2) / (2.0 * j + 1.0).sqrt();
                assert_abs_diff_eq!(wigner3j(j, j, 0.0, m, -m, 0.0), expected, epsilon = 1e-14);
                tm += 2;
            }
        }
    }

    #[test]
    fn invalid_arguments_give_exact_zero() {
        assert_eq!(wigner3j(1.0, 1.0, 3.0, 0.0, 0.0, 0.0), 0.0);
        assert_eq!(wigner3j(1.0, 1.0, 1.0, 2.0, -2.0, 0.0), 0.0);
        assert_eq!(wigner3j(1.0, 1.0, 1.0, 1.0, 1.0, 0.0), 0.0);
        assert_eq!(wigner3j(0.3, 1.0, 1.0, 0.0, 0.0, 0.0), 0.0);
        assert_eq!(wigner3j(1.0, 0.5, 1.0, 0.0, 0.5, 0.0), 0.0);
        assert_eq!(wigner6j(1.0, 1.0, 3.0, 1.0, 1.0, 1.0), 0.0);
        assert_eq!(wigner6j(0.5, 0.5, 0.5, 1.0, 1.0, 1.0), 0.0);
    }

    #[test]
    fn six_j_known_values() {
        // {1/2 1/2 1; 1/2 1/2 0} = 1/2, {1 1 1; 1 1 1} = 1/6
        assert_abs_diff_eq!(wigner6j(0.5, 0.5, 1.0, 0.5, 0.5, 0.0), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(
            wigner6j(1.0, 1.0, 1.0, 1.0, 1.0, 1.0),
            1.0 / 6.0,
            epsilon = 1e-15
        );
    }
}
