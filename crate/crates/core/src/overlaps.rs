//! The sequences `f^{(l)}_j = a*_j a_{j+l}`, their circular autocorrelations
//! `[G]_{kl}`, and the squared overlaps `[F]_{βl} = |⟨ψ|X^l Z^β|ψ⟩|²`.
//!
//! `[G]` is indexed `(k, l)` and `[F]` is indexed `(β, l)`; column `l` of `F`
//! is the forward DFT (kernel `ω^{−kβ}`) of column `l` of `G`.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::whgroup::{apply_displacement, displacement, omega_pow, CMatrix, DisplacementIndex};

const RENORMALIZE_TOL: f64 = 1e-12;

/// Unit-norm amplitude vector `a_j` of a candidate fiducial.
#[derive(Clone, Debug, PartialEq)]
pub struct FiducialVector {
    amps: Vec<Complex64>,
    renormalized: bool,
}

impl FiducialVector {
    /// Normalizes the input. `renormalized()` reports whether the input norm
    /// was off by more than `1e-12`.
    pub fn new(amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() < 2 {
            return Err(Error::DimensionTooSmall(amps.len()));
        }
        if amps.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::ZeroVector { after_projection: false });
        }
        let renormalized = (norm - 1.0).abs() > RENORMALIZE_TOL;
        let amps = amps.into_iter().map(|z| z / norm).collect();
        Ok(Self { amps, renormalized })
    }

    /// Interleaved `re(a_0), im(a_0), re(a_1), …`.
    pub fn from_interleaved(x: &[f64]) -> Result<Self> {
        if !x.len().is_multiple_of(2) {
            return Err(Error::InvalidConfig(format!("odd coordinate count {}", x.len())));
        }
        Self::new(x.chunks(2).map(|p| Complex64::new(p[0], p[1])).collect())
    }

    pub fn from_reals(re: &[f64]) -> Result<Self> {
        Self::new(re.iter().map(|&r| Complex64::new(r, 0.0)).collect())
    }

    /// Standard basis vector `e_j`.
    pub fn basis(d: usize, j: usize) -> Result<Self> {
        let mut v = vec![Complex64::new(0.0, 0.0); d];
        v[j] = Complex64::new(1.0, 0.0);
        Self::new(v)
    }

    /// `a_j = 1/√d`.
    pub fn flat(d: usize) -> Result<Self> {
        Self::new(vec![Complex64::new(1.0, 0.0); d])
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn renormalized(&self) -> bool {
        self.renormalized
    }

    pub fn to_interleaved(&self) -> Vec<f64> {
        self.amps.iter().flat_map(|z| [z.re, z.im]).collect()
    }

    pub fn conj(&self) -> Self {
        Self { amps: self.amps.iter().map(|z| z.conj()).collect(), renormalized: false }
    }

    pub fn displaced(&self, idx: DisplacementIndex) -> Self {
        Self { amps: apply_displacement(idx, &self.amps), renormalized: false }
    }

    pub fn scaled_phase(&self, theta: f64) -> Self {
        let p = Complex64::from_polar(1.0, theta);
        Self { amps: self.amps.iter().map(|z| z * p).collect(), renormalized: false }
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &FiducialVector) -> Complex64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }
}

/// `[G]_{kl}`, complex `d × d`.
#[derive(Clone, Debug, PartialEq)]
pub struct GMatrix {
    pub entries: CMatrix,
}

impl GMatrix {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn get(&self, k: i64, l: i64) -> Complex64 {
        let d = self.dim() as i64;
        self.entries[(k.rem_euclid(d) as usize, l.rem_euclid(d) as usize)]
    }

    pub fn sum_sq(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn max_abs_diff(&self, other: &GMatrix) -> f64 {
        self.entries.iter().zip(other.entries.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

/// `[F]_{βl}`, real `d × d`.
#[derive(Clone, Debug, PartialEq)]
pub struct FMatrix {
    pub entries: DMatrix<f64>,
}

impl FMatrix {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn get(&self, beta: i64, l: i64) -> f64 {
        let d = self.dim() as i64;
        self.entries[(beta.rem_euclid(d) as usize, l.rem_euclid(d) as usize)]
    }

    pub fn max_abs_diff(&self, other: &FMatrix) -> f64 {
        self.entries.iter().zip(other.entries.iter()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    /// Max over `(β, l) ≠ (0, 0)` of `|[F]_{βl} − 1/(d+1)|`.
    pub fn max_sic_deviation(&self) -> f64 {
        let d = self.dim();
        let target = 1.0 / (d as f64 + 1.0);
        let mut worst = 0.0f64;
        for l in 0..d {
            for b in 0..d {
                if l != 0 || b != 0 {
                    worst = worst.max((self.entries[(b, l)] - target).abs());
                }
            }
        }
        worst
    }
}

/// `f^{(l)}_j = a*_j a_{(j+l) mod d}`.
pub fn f_sequence(a: &FiducialVector, l: usize) -> Vec<Complex64> {
    let d = a.dim();
    let x = a.amplitudes();
    (0..d).map(|j| x[j].conj() * x[(j + l) % d]).collect()
}

/// Reusable FFT plans for one dimension.
#[derive(Clone)]
pub struct FftPlan {
    d: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

/// Column data of the FFT pipeline for one vector.
pub(crate) struct Spectra {
    /// `c_{βl}` stored at `[l * d + β]`.
    pub coeffs: Vec<Complex64>,
    /// `[F]_{βl}` stored at `[l * d + β]`.
    pub power: Vec<f64>,
    /// `[G]_{kl}` stored at `[l * d + k]`.
    pub autocorr: Vec<Complex64>,
}

impl FftPlan {
    pub fn new(d: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self { d, forward: planner.plan_fft_forward(d), inverse: planner.plan_fft_inverse(d) }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Unnormalized inverse DFT in place: `x_j ← Σ_β x_β ω^{jβ}`.
    pub(crate) fn inverse_in_place(&self, buf: &mut [Complex64]) {
        self.inverse.process(buf);
    }

    /// FFT pipeline on an arbitrary (not necessarily unit) vector.
    pub(crate) fn spectra(&self, a: &[Complex64]) -> Spectra {
        let d = self.d;
        let mut coeffs = vec![Complex64::new(0.0, 0.0); d * d];
        for l in 0..d {
            let col = &mut coeffs[l * d..(l + 1) * d];
            for j in 0..d {
                col[j] = a[j].conj() * a[(j + l) % d];
            }
        }
        self.forward.process(&mut coeffs);
        let power: Vec<f64> = coeffs.iter().map(|c| c.norm_sqr()).collect();
        let mut autocorr: Vec<Complex64> = power.iter().map(|&p| Complex64::new(p, 0.0)).collect();
        self.inverse.process(&mut autocorr);
        let inv_d = 1.0 / d as f64;
        autocorr.iter_mut().for_each(|z| *z *= inv_d);
        Spectra { coeffs, power, autocorr }
    }

    pub fn g_matrix(&self, a: &FiducialVector) -> GMatrix {
        let d = self.d;
        let s = self.spectra(a.amplitudes());
        GMatrix { entries: CMatrix::from_fn(d, d, |k, l| s.autocorr[l * d + k]) }
    }
}

/// `[G]_{kl} = (f^{(l)} ⋆ f^{(l)})_k` by FFT, `O(d² log d)`.
pub fn g_matrix(a: &FiducialVector) -> GMatrix {
    FftPlan::new(a.dim()).g_matrix(a)
}

/// `Σ_j a_j a*_{j+k} a*_{j+l} a_{j+k+l}` evaluated literally, `O(d³)`.
pub fn g_matrix_direct(a: &FiducialVector) -> GMatrix {
    let d = a.dim();
    let x = a.amplitudes();
    GMatrix {
        entries: CMatrix::from_fn(d, d, |k, l| {
            (0..d).map(|j| x[j] * x[(j + k) % d].conj() * x[(j + l) % d].conj() * x[(j + k + l) % d]).sum()
        }),
    }
}

/// `[F]_{βl} = Σ_k ω^{−kβ} [G]_{kl}`.
///
/// Imaginary residues below `1e-9` are dropped; larger ones mean `G` is not
/// the autocorrelation matrix of any vector.
pub fn f_from_g(g: &GMatrix) -> Result<FMatrix> {
    let d = g.dim();
    let mut out = DMatrix::zeros(d, d);
    let mut worst = 0.0f64;
    for l in 0..d {
        for b in 0..d {
            let v: Complex64 = (0..d).map(|k| omega_pow(-((k * b) as i64), d) * g.entries[(k, l)]).sum();
            worst = worst.max(v.im.abs());
            out[(b, l)] = v.re;
        }
    }
    if worst > 1e-9 {
        return Err(Error::ImaginaryResidue(worst));
    }
    Ok(FMatrix { entries: out })
}

/// `[F]_{βl} = |⟨ψ| X^l Z^β |ψ⟩|²` from explicit operator matrices.
pub fn f_matrix_direct(a: &FiducialVector) -> FMatrix {
    let d = a.dim();
    let x = a.amplitudes();
    let mut out = DMatrix::zeros(d, d);
    for p in DisplacementIndex::all(d) {
        let m = displacement(p);
        let overlap: Complex64 =
            (0..d).map(|i| x[i].conj() * (0..d).map(|j| m.matrix()[(i, j)] * x[j]).sum::<Complex64>()).sum();
        out[(p.alpha(), p.l())] = overlap.norm_sqr();
    }
    FMatrix { entries: out }
}

/// `[G]_{kl} = (δ_{k0} + δ_{l0})/(d+1)`.
pub fn sic_target_g(d: usize) -> Result<GMatrix> {
    if d < 2 {
        return Err(Error::DimensionTooSmall(d));
    }
    let s = 1.0 / (d as f64 + 1.0);
    Ok(GMatrix {
        entries: CMatrix::from_fn(d, d, |k, l| Complex64::new(s * ((k == 0) as u8 + (l == 0) as u8) as f64, 0.0)),
    })
}

pub(crate) fn sic_target(d: usize, k: usize, l: usize) -> f64 {
    ((k == 0) as u8 + (l == 0) as u8) as f64 / (d as f64 + 1.0)
}

/// Rank-one projectors `Π_{(l,α)} = D_{lα}|a⟩⟨a|D_{lα}†`, in `DisplacementIndex::all` order.
pub fn projectors_from_fiducial(a: &FiducialVector) -> Vec<CMatrix> {
    let d = a.dim();
    DisplacementIndex::all(d)
        .map(|p| {
            let v = a.displaced(p);
            let col = nalgebra::DVector::from_column_slice(v.amplitudes());
            &col * col.adjoint()
        })
        .collect()
}

/// `Q^±_j = ±√(d+1) Π_j + (1 ∓ √(d+1))/d · I`.
pub fn q_basis(a: &FiducialVector, positive: bool) -> Vec<CMatrix> {
    let d = a.dim();
    let s = (d as f64 + 1.0).sqrt();
    let sign = if positive { 1.0 } else { -1.0 };
    let shift = (1.0 - sign * s) / d as f64;
    let id = CMatrix::identity(d, d) * Complex64::new(shift, 0.0);
    projectors_from_fiducial(a).into_iter().map(|p| p * Complex64::new(sign * s, 0.0) + &id).collect()
}
