//! Adaptive Dormand–Prince 5(4) integrator for complex linear ODEs.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Step-size control settings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepControl {
    pub rtol: f64,
    pub atol: f64,
    /// Upper bound on the step size.
    pub max_step: f64,
    /// Step budget; exceeding it is an error.
    pub max_steps: usize,
}

impl Default for StepControl {
    fn default() -> Self {
        StepControl {
            rtol: 1e-9,
            atol: 1e-13,
            max_step: f64::INFINITY,
            max_steps: 20_000_000,
        }
    }
}

/// What one integration did.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub min_step: f64,
    pub max_step: f64,
    /// Sum of the accepted local error estimates (max norm).
    pub local_error: f64,
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
/// Fifth-order weights minus the embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrate `dy/dt = f(t, y)` from `t0` to `t1` in place.
pub fn integrate<F>(
    mut f: F,
    t0: f64,
    t1: f64,
    y: &mut [Complex64],
    control: &StepControl,
) -> Result<StepStats>
where
    F: FnMut(f64, &[Complex64], &mut [Complex64]),
{
    let dim = y.len();
    let mut stats = StepStats {
        min_step: f64::INFINITY,
        ..StepStats::default()
    };
    if t1 <= t0 || dim == 0 {
        return Ok(stats);
    }
    let mut k = vec![vec![Complex64::ZERO; dim]; 7];
    let mut stage = vec![Complex64::ZERO; dim];
    let mut y_new = vec![Complex64::ZERO; dim];
    let mut t = t0;
    f(t, y, &mut k[0]);

    // initial step from tolerance-weighted first and second derivatives
    let weighted = |v: &[Complex64]| {
        v.iter()
            .zip(y.iter())
            .map(|(d, y)| d.norm() / (control.atol + control.rtol * y.norm()))
            .fold(0.0, f64::max)
    };
    let d0 = weighted(y);
    let d1 = weighted(&k[0]);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 }.min(t1 - t0);
    for i in 0..dim {
        stage[i] = y[i] + k[0][i] * h0;
    }
    f(t + h0, &stage, &mut k[1]);
    let change: Vec<Complex64> = k[1].iter().zip(&k[0]).map(|(a, b)| a - b).collect();
    let d2 = weighted(&change) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    let mut h = (100.0 * h0).min(h1).min(control.max_step).min(t1 - t0);

    while t < t1 {
        if stats.accepted + stats.rejected >= control.max_steps {
            return Err(Error::HorizonTooShort(format!(
                "step budget of {} exhausted at t = {t:.6e} of {t1:.6e}",
                control.max_steps
            )));
        }
        let last = t + h >= t1;
        if last {
            h = t1 - t;
        }
        for s in 1..7 {
            for i in 0..dim {
                let mut acc = y[i];
                for (j, a) in A[s][..s].iter().enumerate() {
                    if *a != 0.0 {
                        acc += k[j][i] * (h * a);
                    }
                }
                stage[i] = acc;
            }
            f(t + C[s] * h, &stage, &mut k[s]);
            if s == 6 {
                y_new.copy_from_slice(&stage);
            }
        }
        // error of the embedded pair; k[6] is f at the new point (FSAL)
        let mut err = 0.0f64;
        let mut err_max = 0.0f64;
        for i in 0..dim {
            let mut e = Complex64::ZERO;
            for (s, w) in E.iter().enumerate() {
                if *w != 0.0 {
                    e += k[s][i] * (h * w);
                }
            }
            let sc = control.atol + control.rtol * y[i].norm().max(y_new[i].norm());
            err = err.max(e.norm() / sc);
            err_max = err_max.max(e.norm());
        }
        if !err.is_finite() {
            return Err(Error::NonFinite(format!(
                "time integration diverged at t = {t:.6e}"
            )));
        }
        if err <= 1.0 {
            t = if last { t1 } else { t + h };
            y.copy_from_slice(&y_new);
            k.swap(0, 6);
            stats.accepted += 1;
            stats.min_step = stats.min_step.min(h);
            stats.max_step = stats.max_step.max(h);
            stats.local_error += err_max;
        } else {
            stats.rejected += 1;
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        h = (h * factor).min(control.max_step);
        if h <= 1e-14 * t.abs().max(1.0) {
            return Err(Error::NonFinite(format!(
                "step size underflow at t = {t:.6e}"
            )));
        }
    }
    Ok(stats)
}
