//! Frequency-domain response of one thin slice of the medium.
//!
//! The vacuum mode `a` couples to the atoms through `H = -g (P† a + a† P)`.
//! Linearizing the Heisenberg-Langevin equations around the steady state and
//! eliminating the atomic fluctuations gives, for the field vector
//! `A(ω) = (a(ω), a†(ω))`, a local propagation law
//!
//! `dA/dζ = C K̂(ω) A + noise`, with noise spectral matrix `C Q̂(ω)`,
//!
//! where `ζ ∈ [0, 1]` runs through the medium and `C` is the cooperativity.

use nalgebra::Matrix2;
use num_complex::Complex64;

use super::diffusion::DiffusionMatrix;
use crate::dynamics::{pivot_ratio, CMatrix, CVector, DriftSystem, PIVOT_RATIO_TOL};
use crate::error::{Error, Result};

pub type C2 = Matrix2<Complex64>;

/// Drift and noise matrices of a slice per unit cooperativity, at `+δ` and `-δ`.
#[derive(Clone, Debug, PartialEq)]
pub struct SliceResponse {
    pub delta: f64,
    /// `K̂(δ)`, `K̂(-δ)`
    pub drift: [C2; 2],
    /// `Q̂(δ)`, `Q̂(-δ)`
    pub noise: [C2; 2],
}

impl SliceResponse {
    pub fn zero(delta: f64) -> Self {
        SliceResponse {
            delta,
            drift: [C2::zeros(); 2],
            noise: [C2::zeros(); 2],
        }
    }

    /// `self + weight · other`, for mixing slices of different atom classes.
    pub fn accumulate(&mut self, other: &SliceResponse, weight: f64) -> Result<()> {
        if self.delta != other.delta {
            return Err(Error::GridMismatch(format!(
                "delta {} vs {}",
                self.delta, other.delta
            )));
        }
        let w = Complex64::new(weight, 0.0);
        for s in 0..2 {
            self.drift[s] += other.drift[s] * w;
            self.noise[s] += other.noise[s] * w;
        }
        Ok(())
    }
}

/// Precomputed linearized fluctuation system around one steady state.
#[derive(Clone, Debug)]
pub struct FluctuationSystem {
    pub n: usize,
    /// Transpose of the drift matrix with the trace zero mode deflated.
    deflated_t: CMatrix,
    /// Coefficients of `P` and `P†` in the coherence basis.
    p: CVector,
    p_dag: CVector,
    /// `⟨[s_α, P†]⟩` and `⟨[s_α, P]⟩`.
    u: CVector,
    v: CVector,
    two_d: CMatrix,
    /// Index of `s_α†` for each `α`.
    adjoint_index: Vec<usize>,
}

impl FluctuationSystem {
    /// `vacuum` is the atomic lowering operator `P` that radiates into the
    /// vacuum mode.
    pub fn new(
        system: &DriftSystem,
        diffusion: &DiffusionMatrix,
        vacuum: &CMatrix,
    ) -> Result<Self> {
        let n = system.n;
        if vacuum.nrows() != n || vacuum.ncols() != n || diffusion.n != n {
            return Err(Error::Dimension(
                "vacuum operator / diffusion matrix do not match the drift system".into(),
            ));
        }
        let nn = n * n;
        let idx = |i: usize, j: usize| i * n + j;
        let rho = &system.rho;

        // M' = M - s tᵀ keeps the response on traceless sources unchanged and
        // moves the zero mode to -1.
        let mut deflated = system.drift.clone();
        for a in 0..nn {
            for i in 0..n {
                deflated[(a, idx(i, i))] -= system.steady[a];
            }
        }

        // s_(i,j) = |i⟩⟨j| has ⟨X s⟩ = (ρX)_ji and ⟨s X⟩ = (Xρ)_ji
        let coherence = |m: &CMatrix| CVector::from_fn(nn, |a, _| m[(a % n, a / n)]);
        let p_mat_dag = vacuum.adjoint();
        let u = coherence(&(&p_mat_dag * rho - rho * &p_mat_dag));
        let v = coherence(&(vacuum * rho - rho * vacuum));
        // P = Σ P_ij |i⟩⟨j|
        let p = CVector::from_fn(nn, |a, _| vacuum[(a / n, a % n)]);
        let p_dag = CVector::from_fn(nn, |a, _| p_mat_dag[(a / n, a % n)]);

        Ok(FluctuationSystem {
            n,
            deflated_t: deflated.transpose(),
            p,
            p_dag,
            u,
            v,
            two_d: diffusion.two_d.clone(),
            adjoint_index: (0..nn).map(|a| idx(a % n, a / n)).collect(),
        })
    }

    /// Mirror `y(-ω)` of the opposite operator from `y(ω)` using
    /// `conj(y_X(ω))_α = y_X†(-ω)_ᾱ`.
    fn mirror(&self, y: &CVector) -> CVector {
        let mut out = CVector::zeros(y.len());
        for (a, &b) in self.adjoint_index.iter().enumerate() {
            out[b] = y[a].conj();
        }
        out
    }

    /// Slice response at `±delta`.
    pub fn response(&self, delta: f64) -> Result<SliceResponse> {
        if !delta.is_finite() {
            return Err(Error::InvalidDrive("noise frequency must be finite".into()));
        }
        let nn = self.n * self.n;
        // (-iω - M')ᵀ y = p  ⇒  y_pᵀ x = pᵀ (-iω - M')⁻¹ x
        let mut a = -&self.deflated_t;
        for k in 0..nn {
            a[(k, k)] -= Complex64::new(0.0, delta);
        }
        let lu = a.lu();
        let ratio = pivot_ratio(lu.u().diagonal().iter().copied());
        if !(ratio > PIVOT_RATIO_TOL) {
            return Err(Error::SingularFrequency {
                delta,
                pivot_ratio: ratio,
            });
        }
        let solve = |rhs: &CVector| {
            lu.solve(rhs).ok_or(Error::SingularFrequency {
                delta,
                pivot_ratio: ratio,
            })
        };
        let y_p = solve(&self.p)?;
        let y_pd = solve(&self.p_dag)?;
        // at -ω
        let y_p_m = self.mirror(&y_pd);
        let y_pd_m = self.mirror(&y_p);

        let pos = self.blocks(&y_p, &y_pd, &y_p_m, &y_pd_m);
        let neg = self.blocks(&y_p_m, &y_pd_m, &y_p, &y_pd);
        Ok(SliceResponse {
            delta,
            drift: [pos.0, neg.0],
            noise: [pos.1, neg.1],
        })
    }

    /// `K̂(ω)`, `Q̂(ω)` from the solves at `ω` and `-ω`.
    fn blocks(&self, y_p: &CVector, y_pd: &CVector, y_p_m: &CVector, y_pd_m: &CVector) -> (C2, C2) {
        let two = Complex64::new(2.0, 0.0);
        let k = C2::new(
            -y_p.dot(&self.u),
            -y_p.dot(&self.v),
            y_pd.dot(&self.u),
            y_pd.dot(&self.v),
        ) * two;
        let d_pd_m = &self.two_d * y_pd_m;
        let d_p_m = &self.two_d * y_p_m;
        let q = C2::new(
            y_p.dot(&d_pd_m),
            -y_p.dot(&d_p_m),
            -y_pd.dot(&d_pd_m),
            y_pd.dot(&d_p_m),
        ) * two;
        (k, q)
    }
}
