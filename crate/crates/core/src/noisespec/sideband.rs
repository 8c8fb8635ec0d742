use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::response::{SliceResponse, C2};
use crate::error::{Error, Result};

/// Output correlations of the vacuum mode at one sideband frequency.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SidebandCorrelation {
    pub delta: f64,
    /// Normal-ordered photon-number spectrum (vacuum = 0).
    pub cn: f64,
    /// Anomalous correlation `⟨a(δ) a(-δ)⟩`.
    pub ca: Complex64,
    /// Spectrum of `[a, a†]` at `+δ` and `-δ`; exactly 1 for a consistent model.
    pub commutator: [f64; 2],
}

impl SidebandCorrelation {
    pub fn vacuum(delta: f64) -> Self {
        SidebandCorrelation {
            delta,
            cn: 0.0,
            ca: Complex64::ZERO,
            commutator: [1.0, 1.0],
        }
    }

    /// Largest deviation of the commutator spectrum from 1.
    pub fn commutator_error(&self) -> f64 {
        self.commutator
            .iter()
            .map(|c| (c - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// `|C_A|² ≤ C_N (C_N + 1)` within `tol`.
    pub fn is_physical(&self, tol: f64) -> bool {
        self.ca.norm_sqr() <= self.cn * (self.cn + 1.0) + tol
    }
}

/// Transfer and accumulated noise of a homogeneous medium of unit length:
/// `E = exp(K)` and `N = ∫₀¹ exp(Ku) Q exp(K†u) du`.
///
/// Scaling and squaring with a Taylor kernel; the doubling step is
/// `E₂ₕ = Eₕ²`, `N₂ₕ = Eₕ Nₕ Eₕ† + Nₕ`.
pub fn propagate(k: &C2, q: &C2) -> (C2, C2) {
    let norm = k.iter().map(|x| x.norm()).sum::<f64>();
    let squarings = if norm > 0.25 {
        (norm / 0.25).log2().ceil() as i32
    } else {
        0
    };
    let h = 0.5f64.powi(squarings);
    let kh = k * Complex64::new(h, 0.0);

    // E_h = Σ (hK)^m / m!,  N_h = Σ h^(m+1)/(m+1)! L^m(Q) with L(X) = KX + XK†
    let mut e = C2::identity();
    let mut term_e = C2::identity();
    let mut lq = *q;
    let mut n = q * Complex64::new(h, 0.0);
    let mut coeff = h;
    for m in 1..=30 {
        term_e = term_e * kh / Complex64::new(m as f64, 0.0);
        e += term_e;
        lq = k * lq + lq * k.adjoint();
        coeff *= h / (m as f64 + 1.0);
        let term_n = lq * Complex64::new(coeff, 0.0);
        n += term_n;
        let scale_e = e.iter().map(|x| x.norm()).fold(0.0, f64::max);
        let scale_n = n.iter().map(|x| x.norm()).fold(f64::MIN_POSITIVE, f64::max);
        let small_e = term_e.iter().all(|x| x.norm() <= 1e-18 * scale_e);
        let small_n = term_n.iter().all(|x| x.norm() <= 1e-18 * scale_n);
        if small_e && small_n {
            break;
        }
    }
    for _ in 0..squarings {
        n = e * n * e.adjoint() + n;
        e = e * e;
    }
    (e, n)
}

/// Output spectral matrix `S = E diag(1, 0) E† + N` of `(a, a†)` for a
/// vacuum input.
fn output_matrix(k: &C2, q: &C2) -> C2 {
    let (e, n) = propagate(k, q);
    let mut input = C2::zeros();
    input[(0, 0)] = Complex64::ONE;
    let s = e * input * e.adjoint() + n;
    // Hermitian by construction; remove rounding asymmetry
    (s + s.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Output correlations of a medium with cooperativity `cooperativity` made
/// of slices with the given per-unit-cooperativity response.
pub fn sideband_from_response(
    response: &SliceResponse,
    cooperativity: f64,
) -> Result<SidebandCorrelation> {
    let c = Complex64::new(cooperativity, 0.0);
    let plus = output_matrix(&(response.drift[0] * c), &(response.noise[0] * c));
    let minus = output_matrix(&(response.drift[1] * c), &(response.noise[1] * c));
    if plus
        .iter()
        .chain(minus.iter())
        .any(|x| !x.re.is_finite() || !x.im.is_finite())
    {
        return Err(Error::NonFinite(format!(
            "output spectrum overflowed at delta = {} (C = {cooperativity})",
            response.delta
        )));
    }
    Ok(SidebandCorrelation {
        delta: response.delta,
        cn: 0.5 * (plus[(1, 1)].re + minus[(1, 1)].re),
        ca: (plus[(0, 1)] + minus[(0, 1)]) * 0.5,
        commutator: [
            plus[(0, 0)].re - minus[(1, 1)].re,
            minus[(0, 0)].re - plus[(1, 1)].re,
        ],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Reference by fine midpoint quadrature and repeated multiplication.
    fn brute_force(k: &C2, q: &C2, steps: usize) -> (C2, C2) {
        let h = 1.0 / steps as f64;
        let mut step = C2::identity();
        let mut term = C2::identity();
        for m in 1..20 {
            term = term * k * c(h / m as f64, 0.0);
            step += term;
        }
        let mut half = C2::identity();
        let mut term = C2::identity();
        for m in 1..20 {
            term = term * k * c(0.5 * h / m as f64, 0.0);
            half += term;
        }
        let mut e = C2::identity();
        let mut n = C2::zeros();
        for _ in 0..steps {
            // contribution of the slice at the current depth, evaluated at its midpoint
            let em = e * half;
            n += em * q * em.adjoint() * c(h, 0.0);
            e *= step;
        }
        (e, n)
    }

    #[test]
    fn matches_direct_quadrature() {
        let k = C2::new(c(-1.3, 0.4), c(0.2, -0.7), c(0.5, 0.1), c(-0.8, -0.3));
        let q = C2::new(c(1.0, 0.0), c(0.3, 0.2), c(0.3, -0.2), c(0.5, 0.0));
        let (e, n) = propagate(&k, &q);
        let (e_ref, n_ref) = brute_force(&k, &q, 4000);
        assert!((e - e_ref).norm() < 1e-12, "{}", (e - e_ref).norm());
        assert!((n - n_ref).norm() < 1e-6, "{}", (n - n_ref).norm());
    }

    #[test]
    fn scalar_absorber() {
        // dS/dζ = -2κ S + 2κ: a thermal-free absorber relaxes S to 1
        let kappa = 3.0;
        let k = C2::new(c(-kappa, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-kappa, 0.0));
        let q = C2::new(c(2.0 * kappa, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0));
        let (e, n) = propagate(&k, &q);
        assert_abs_diff_eq!(e[(0, 0)].re, (-kappa).exp(), epsilon = 1e-14);
        assert_abs_diff_eq!(n[(0, 0)].re, 1.0 - (-2.0 * kappa).exp(), epsilon = 1e-14);
    }

    #[test]
    fn zero_cooperativity_is_vacuum() {
        let r = SliceResponse {
            delta: 0.3,
            drift: [C2::new(c(1.0, 2.0), c(3.0, 0.0), c(0.0, 1.0), c(2.0, 2.0)); 2],
            noise: [C2::identity(); 2],
        };
        let s = sideband_from_response(&r, 0.0).unwrap();
        assert_eq!(s.cn, 0.0);
        assert_eq!(s.ca, Complex64::ZERO);
        assert_eq!(s.commutator, [1.0, 1.0]);
    }
}
