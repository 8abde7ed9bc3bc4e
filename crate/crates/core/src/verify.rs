//! Independent checks of candidate fiducials.
//!
//! Overlaps are computed directly from displacement actions, never through
//! the FFT pipeline the search objective uses.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::overlaps::{g_matrix_direct, sic_target, FMatrix, FiducialVector, GMatrix};
use crate::whgroup::{apply_displacement, omega_pow, DisplacementIndex, ZaunerData};

/// Tolerance for search output.
pub const ACCEPT_TOLERANCE: f64 = 1e-9;
/// Tolerance for refined output re-checked in double precision.
pub const CERTIFY_TOLERANCE: f64 = 1e-12;

/// Identities every unit vector satisfies; magnitudes above this indicate a bug.
const IDENTITY_TOLERANCE: f64 = 1e-11;
const ZAUNER_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub magnitude: f64,
    pub passed: bool,
}

impl Check {
    fn new(magnitude: f64, tolerance: f64) -> Self {
        Self { magnitude, passed: magnitude <= tolerance }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub dim: usize,
    pub tolerance: f64,
    /// Max over `(β, l) ≠ (0, 0)` of `|[F]_{βl} − 1/(d+1)|`.
    pub max_sic_deviation: f64,
    pub frame_error: f64,
    /// Max `|[G]_{kl} − (δ_{k0}+δ_{l0})/(d+1)|`.
    pub g_deviation: f64,
    pub checks: BTreeMap<String, Check>,
    /// `max_sic_deviation ≤ tolerance`.
    pub passed: bool,
}

/// `[F]_{αl} = |⟨a|D_{lα}|a⟩|²` via `O(d)` displacement actions.
pub fn f_matrix_displaced(a: &FiducialVector) -> FMatrix {
    let d = a.dim();
    let mut out = nalgebra::DMatrix::zeros(d, d);
    for p in DisplacementIndex::all(d) {
        let moved = apply_displacement(p, a.amplitudes());
        let overlap: Complex64 = a.amplitudes().iter().zip(&moved).map(|(x, y)| x.conj() * y).sum();
        out[(p.alpha(), p.l())] = overlap.norm_sqr();
    }
    FMatrix { entries: out }
}

/// Largest violation of the eight index symmetries of `|[G]_{kl}|` and of `[G]_{kl} = [G]_{lk}`.
pub fn g_symmetry_residual(g: &GMatrix) -> f64 {
    let d = g.dim() as i64;
    let mut worst = 0.0f64;
    for k in 0..d {
        for l in 0..d {
            let base = g.get(k, l);
            worst = worst.max((base - g.get(l, k)).norm());
            let m = base.norm();
            for (a, b) in [(-k, l), (k, -l), (-k, -l), (l, k), (-l, k), (l, -k), (-l, -k)] {
                worst = worst.max((g.get(a, b).norm() - m).abs());
            }
        }
    }
    worst
}

/// `max |[G]_{−k,l} − [G]_{kl}*|`.
pub fn g_conjugate_residual(g: &GMatrix) -> f64 {
    let d = g.dim() as i64;
    let mut worst = 0.0f64;
    for k in 0..d {
        for l in 0..d {
            worst = worst.max((g.get(-k, l) - g.get(k, l).conj()).norm());
        }
    }
    worst
}

/// `max |[F]_{lm} − (1/d) Σ_{αβ} ω^{−αl+βm} [F]_{βα}|`.
pub fn f_self_inverse_residual(f: &FMatrix) -> f64 {
    let d = f.dim();
    let mut worst = 0.0f64;
    for l in 0..d {
        for m in 0..d {
            let mut acc = Complex64::new(0.0, 0.0);
            for al in 0..d {
                for be in 0..d {
                    let e = -((al * l) as i64) + (be * m) as i64;
                    acc += omega_pow(e, d) * f.entries[(be, al)];
                }
            }
            worst = worst.max((acc / d as f64 - f.entries[(l, m)]).norm());
        }
    }
    worst
}

/// `max |[G]_{kl} − (1/d) Σ_{αβ} ω^{kα+lβ} [G]_{β,α−l}|`, zero for Zauner eigenvectors.
pub fn zauner_g_residual(g: &GMatrix) -> f64 {
    let d = g.dim();
    let di = d as i64;
    let mut worst = 0.0f64;
    for k in 0..di {
        for l in 0..di {
            let mut acc = Complex64::new(0.0, 0.0);
            for al in 0..di {
                for be in 0..di {
                    acc += omega_pow(k * al + l * be, d) * g.get(be, al - l);
                }
            }
            worst = worst.max((acc / d as f64 - g.get(k, l)).norm());
        }
    }
    worst
}

pub fn verify_sic(a: &FiducialVector, tolerance: f64) -> VerificationReport {
    let d = a.dim();
    let f = f_matrix_displaced(a);
    let g = g_matrix_direct(a);
    let mut frame_error = 0.0;
    let mut g_deviation = 0.0f64;
    for k in 0..d {
        for l in 0..d {
            let dev = (g.entries[(k, l)] - sic_target(d, k, l)).norm();
            frame_error += dev * dev;
            g_deviation = g_deviation.max(dev);
        }
    }
    let max_sic_deviation = f.max_sic_deviation();
    let mut checks = BTreeMap::new();
    checks.insert("g_symmetry".into(), Check::new(g_symmetry_residual(&g), IDENTITY_TOLERANCE));
    checks.insert("g_conjugate".into(), Check::new(g_conjugate_residual(&g), IDENTITY_TOLERANCE));
    checks.insert("f_self_inverse".into(), Check::new(f_self_inverse_residual(&f), IDENTITY_TOLERANCE));
    VerificationReport {
        dim: d,
        tolerance,
        max_sic_deviation,
        frame_error,
        g_deviation,
        checks,
        passed: max_sic_deviation <= tolerance,
    }
}

impl VerificationReport {
    /// Adds the Zauner eigenvector and `G`-relation checks.
    pub fn with_zauner(mut self, a: &FiducialVector, z: &ZaunerData) -> Self {
        let zc = verify_zauner(a, z);
        let best = zc.projection_residuals.iter().cloned().fold(f64::INFINITY, f64::min);
        self.checks.insert("zauner_eigenvector".into(), Check::new(best, ZAUNER_TOLERANCE));
        self.checks.insert("zauner_g_relation".into(), Check::new(zc.g_relation_residual, ZAUNER_TOLERANCE));
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZaunerChecks {
    /// `‖P_m a − a‖` for `m = 0, 1, 2`.
    pub projection_residuals: [f64; 3],
    /// Subspace with the smallest projection residual.
    pub closest_subspace: usize,
    pub g_relation_residual: f64,
}

pub fn verify_zauner(a: &FiducialVector, z: &ZaunerData) -> ZaunerChecks {
    let projection_residuals = [0, 1, 2].map(|m| {
        let p = z.project(m, a.amplitudes());
        p.iter().zip(a.amplitudes()).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
    });
    let closest_subspace =
        (0..3).min_by(|&i, &j| projection_residuals[i].total_cmp(&projection_residuals[j])).expect("three subspaces");
    ZaunerChecks { projection_residuals, closest_subspace, g_relation_residual: zauner_g_residual(&g_matrix_direct(a)) }
}

/// `Σ_l [G]_{lk} − [G]_{0k}` for each column `k = 1, …, d−1` (index `k−1`).
pub fn column_sum_check(g: &GMatrix) -> Vec<Complex64> {
    let d = g.dim();
    (1..d).map(|k| (0..d).map(|l| g.entries[(l, k)]).sum::<Complex64>() - g.entries[(0, k)]).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Equiangularity {
    pub is_equiangular: bool,
    /// Mean pairwise `|⟨ψ_j|ψ_k⟩|²`.
    pub angle: f64,
    /// Max minus min of the pairwise values.
    pub spread: f64,
}

/// Pairwise squared overlaps of explicit vectors.
pub fn equiangularity_direct(vectors: &[FiducialVector]) -> Result<Equiangularity> {
    if vectors.len() < 2 {
        return Err(Error::InvalidConfig("need at least two vectors".into()));
    }
    let d = vectors[0].dim();
    if let Some(v) = vectors.iter().find(|v| v.dim() != d) {
        return Err(Error::DimensionMismatch { expected: d, found: v.dim() });
    }
    let (mut lo, mut hi, mut sum, mut n) = (f64::INFINITY, f64::NEG_INFINITY, 0.0, 0usize);
    for (j, a) in vectors.iter().enumerate() {
        for b in &vectors[j + 1..] {
            let v = a.inner(b).norm_sqr();
            lo = lo.min(v);
            hi = hi.max(v);
            sum += v;
            n += 1;
        }
    }
    let spread = hi - lo;
    Ok(Equiangularity { is_equiangular: spread <= 1e-10, angle: sum / n as f64, spread })
}

/// The `d²` vectors `D_p a`.
pub fn weyl_heisenberg_orbit(a: &FiducialVector) -> Vec<FiducialVector> {
    DisplacementIndex::all(a.dim()).map(|p| a.displaced(p)).collect()
}
