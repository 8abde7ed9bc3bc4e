//! Frame error `Σ_{kl} |[G]_{kl}|² − 2/(d+1)` as a smooth function of `2d`
//! unconstrained real coordinates, and the reduced residual system built from
//! rows 0, 1, 2 of `G`.
//!
//! Coordinates are interleaved `(re a_0, im a_0, re a_1, …)`. The raw vector
//! `z` is optionally mapped through a projector `P`, then normalized:
//! `u = Pz / ‖Pz‖`. Gradients include both steps.
//!
//! On unit vectors `Σ_l [G]_{0l} = Σ_k [G]_{k0} = 1`, so the frame error equals
//! `Σ |G − T|²` with `T` the SIC target. That form is what gets evaluated: it
//! has no cancellation and stays accurate down to `1e-30`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::overlaps::{sic_target, FftPlan};
use crate::whgroup::CMatrix;

/// Relative norm loss below which a projection counts as annihilating the input.
const PROJECTION_ZERO_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct ObjectiveValue {
    pub frame_error: f64,
    pub gradient: Option<Vec<f64>>,
}

/// `z ↦ u = Pz/‖Pz‖` with the data needed to pull gradients back to `z`.
struct Normalized {
    u: Vec<Complex64>,
    norm: f64,
}

fn to_complex(x: &[f64]) -> Vec<Complex64> {
    x.chunks(2).map(|p| Complex64::new(p[0], p[1])).collect()
}

fn mat_vec(p: &CMatrix, v: &[Complex64]) -> Vec<Complex64> {
    let d = v.len();
    (0..d).map(|i| (0..d).map(|j| p[(i, j)] * v[j]).sum()).collect()
}

fn normalize(x: &[f64], d: usize, projector: Option<&CMatrix>) -> Result<Normalized> {
    if x.len() != 2 * d {
        return Err(Error::DimensionMismatch { expected: 2 * d, found: x.len() });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let z = to_complex(x);
    let raw = z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if raw == 0.0 {
        return Err(Error::ZeroVector { after_projection: false });
    }
    let a = match projector {
        Some(p) => mat_vec(p, &z),
        None => z,
    };
    let norm = a.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if norm <= PROJECTION_ZERO_TOL * raw {
        return Err(Error::ZeroVector { after_projection: projector.is_some() });
    }
    Ok(Normalized { u: a.into_iter().map(|c| c / norm).collect(), norm })
}

/// Turns `∂f/∂u*` into the real gradient with respect to `z`.
fn pull_back(g_u: &[Complex64], n: &Normalized, projector: Option<&CMatrix>, out: &mut [f64]) {
    let radial: f64 = n.u.iter().zip(g_u).map(|(u, g)| (u.conj() * g).re).sum();
    let g_a: Vec<Complex64> = g_u.iter().zip(&n.u).map(|(g, u)| (g - u * radial) / n.norm).collect();
    let g_z = match projector {
        Some(p) => mat_vec(p, &g_a),
        None => g_a,
    };
    for (j, g) in g_z.iter().enumerate() {
        out[2 * j] = 2.0 * g.re;
        out[2 * j + 1] = 2.0 * g.im;
    }
}

/// Frame-error objective bound to one dimension and optional projector.
#[derive(Clone)]
pub struct FrameObjective {
    d: usize,
    plan: FftPlan,
    projector: Option<CMatrix>,
}

impl FrameObjective {
    pub fn new(d: usize, projector: Option<CMatrix>) -> Result<Self> {
        if d < 2 {
            return Err(Error::DimensionTooSmall(d));
        }
        if let Some(p) = &projector {
            if p.nrows() != d || p.ncols() != d {
                return Err(Error::DimensionMismatch { expected: d, found: p.nrows() });
            }
        }
        Ok(Self { d, plan: FftPlan::new(d), projector })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn projector(&self) -> Option<&CMatrix> {
        self.projector.as_ref()
    }

    /// Frame error at `x`; fills `grad` (length `2d`) when given.
    pub fn evaluate(&self, x: &[f64], grad: Option<&mut [f64]>) -> Result<f64> {
        let d = self.d;
        let n = normalize(x, d, self.projector.as_ref())?;
        let s = self.plan.spectra(&n.u);

        let mut value = 0.0;
        for l in 0..d {
            for k in 0..d {
                value += (s.autocorr[l * d + k] - sic_target(d, k, l)).norm_sqr();
            }
        }

        if let Some(out) = grad {
            // ∂S/∂u*_m = (2/d) Σ_l [conj(h_l[m]) u_{m+l} + h_l[m−l] u_{m−l}],
            // with h_l the inverse DFT of F_{·l} c_{·l}.
            let mut h: Vec<Complex64> = s.coeffs.iter().zip(&s.power).map(|(c, p)| c * p).collect();
            for l in 0..d {
                self.plan.inverse_in_place(&mut h[l * d..(l + 1) * d]);
            }
            let scale = 2.0 / d as f64;
            let radial = 8.0 / (d as f64 + 1.0);
            let u = &n.u;
            let g_u: Vec<Complex64> = (0..d)
                .map(|m| {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for l in 0..d {
                        let hl = &h[l * d..(l + 1) * d];
                        acc += hl[m].conj() * u[(m + l) % d] + hl[(m + d - l) % d] * u[(m + d - l) % d];
                    }
                    acc * scale - u[m] * radial
                })
                .collect();
            pull_back(&g_u, &n, self.projector.as_ref(), out);
        }
        Ok(value)
    }

    /// `Pz` in interleaved coordinates (identity without a projector).
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        match &self.projector {
            Some(p) => mat_vec(p, &to_complex(x)).iter().flat_map(|c| [c.re, c.im]).collect(),
            None => x.to_vec(),
        }
    }
}

/// Frame error of `x` (after optional projection and normalization), with gradient.
pub fn frame_error(x: &[f64], projector: Option<&CMatrix>) -> Result<ObjectiveValue> {
    let obj = FrameObjective::new(x.len() / 2, projector.cloned())?;
    let mut g = vec![0.0; x.len()];
    let frame_error = obj.evaluate(x, Some(&mut g))?;
    Ok(ObjectiveValue { frame_error, gradient: Some(g) })
}

pub fn frame_error_gradient(x: &[f64], projector: Option<&CMatrix>) -> Result<Vec<f64>> {
    Ok(frame_error(x, projector)?.gradient.expect("requested"))
}

/// Distinct row indices `{0, 1, 2} mod d`.
pub fn reduced_rows(d: usize) -> Vec<usize> {
    let mut rows: Vec<usize> = [0, 1, 2].iter().map(|r| r % d).collect();
    rows.dedup();
    rows.sort_unstable();
    rows.dedup();
    rows
}

#[derive(Clone, Debug, PartialEq)]
pub struct RowsResidual {
    /// `Σ |[G]_{rl} − T_{rl}|²` over the reduced rows.
    pub value: f64,
    /// `[G]_{rl} − T_{rl}`, row-major over `(r, l)`.
    pub residuals: Vec<Complex64>,
}

/// Residual system from rows 0, 1, 2 of `G` only.
#[derive(Clone)]
pub struct RowsObjective {
    d: usize,
    rows: Vec<usize>,
    projector: Option<CMatrix>,
}

impl RowsObjective {
    pub fn new(d: usize, projector: Option<CMatrix>) -> Result<Self> {
        if d < 2 {
            return Err(Error::DimensionTooSmall(d));
        }
        Ok(Self { d, rows: reduced_rows(d), projector })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    fn g_entry(u: &[Complex64], r: usize, l: usize) -> Complex64 {
        let d = u.len();
        (0..d).map(|j| u[j] * u[(j + r) % d].conj() * u[(j + l) % d].conj() * u[(j + r + l) % d]).sum()
    }

    pub fn residuals(&self, x: &[f64]) -> Result<RowsResidual> {
        let n = normalize(x, self.d, self.projector.as_ref())?;
        Ok(self.residuals_of(&n.u))
    }

    fn residuals_of(&self, u: &[Complex64]) -> RowsResidual {
        let d = self.d;
        let mut residuals = Vec::with_capacity(self.rows.len() * d);
        for &r in &self.rows {
            for l in 0..d {
                residuals.push(Self::g_entry(u, r, l) - sic_target(d, r, l));
            }
        }
        let value = residuals.iter().map(|z| z.norm_sqr()).sum();
        RowsResidual { value, residuals }
    }

    pub fn evaluate(&self, x: &[f64], grad: Option<&mut [f64]>) -> Result<f64> {
        let d = self.d;
        let n = normalize(x, d, self.projector.as_ref())?;
        let res = self.residuals_of(&n.u);
        if let Some(out) = grad {
            let u = &n.u;
            let at = |i: i64| u[i.rem_euclid(d as i64) as usize];
            let mut g_u = vec![Complex64::new(0.0, 0.0); d];
            for (ri, &r) in self.rows.iter().enumerate() {
                let r = r as i64;
                for l in 0..d as i64 {
                    let delta = res.residuals[ri * d + l as usize];
                    for (m, slot) in g_u.iter_mut().enumerate() {
                        let m = m as i64;
                        let dg =
                            at(m - r) * at(m - r + l).conj() * at(m + l) + at(m - l) * at(m - l + r).conj() * at(m + r);
                        let dg_conj =
                            at(m + r) * at(m + l) * at(m + r + l).conj() + at(m - r - l).conj() * at(m - l) * at(m - r);
                        *slot += delta.conj() * dg + delta * dg_conj;
                    }
                }
            }
            pull_back(&g_u, &n, self.projector.as_ref(), out);
        }
        Ok(res.value)
    }
}

impl RowsObjective {
    /// Gauss–Newton on the residuals themselves (not their squares), which
    /// tolerates the near-singular Jacobians the reduced system can have at
    /// a solution. Stops once a step fails to lower the residual.
    pub fn gauss_newton(&self, x: &[f64], max_steps: usize) -> Result<Vec<f64>> {
        let d = self.d;
        let mut u = normalize(x, d, self.projector.as_ref())?.u;
        let mut value = self.residuals_of(&u).value;
        for _ in 0..max_steps {
            let res = self.residuals_of(&u);
            let rows = 2 * res.residuals.len() + 1;
            let mut jac = nalgebra::DMatrix::<f64>::zeros(rows, 2 * d);
            let mut rhs = nalgebra::DVector::<f64>::zeros(rows);
            let at = |i: i64| u[i.rem_euclid(d as i64) as usize];
            for (ri, &r) in self.rows.iter().enumerate() {
                let r = r as i64;
                for l in 0..d as i64 {
                    let row = 2 * (ri * d + l as usize);
                    let delta = res.residuals[ri * d + l as usize];
                    rhs[row] = delta.re;
                    rhs[row + 1] = delta.im;
                    for m in 0..d as i64 {
                        let h_conj =
                            at(m - r) * at(m - r + l).conj() * at(m + l) + at(m - l) * at(m - l + r).conj() * at(m + r);
                        let h = at(m + r).conj() * at(m + l).conj() * at(m + r + l)
                            + at(m - r - l) * at(m - l).conj() * at(m - r).conj();
                        let dx = h + h_conj;
                        let dy = (h - h_conj) * Complex64::i();
                        let m = m as usize;
                        jac[(row, m)] = dx.re;
                        jac[(row + 1, m)] = dx.im;
                        jac[(row, d + m)] = dy.re;
                        jac[(row + 1, d + m)] = dy.im;
                    }
                }
            }
            let last = rows - 1;
            rhs[last] = u.iter().map(|z| z.norm_sqr()).sum::<f64>() - 1.0;
            for (m, z) in u.iter().enumerate() {
                jac[(last, m)] = 2.0 * z.re;
                jac[(last, d + m)] = 2.0 * z.im;
            }
            let svd = jac.svd(true, true);
            let cutoff = svd.singular_values.max() * 1e-10;
            let Ok(step) = svd.solve(&rhs, cutoff) else { break };
            let moved: Vec<f64> = (0..d).flat_map(|m| [u[m].re - step[m], u[m].im - step[d + m]]).collect();
            let Ok(next) = normalize(&moved, d, self.projector.as_ref()) else { break };
            let next_value = self.residuals_of(&next.u).value;
            if !(next_value < value) {
                break;
            }
            u = next.u;
            value = next_value;
        }
        Ok(u.iter().flat_map(|z| [z.re, z.im]).collect())
    }
}

/// Residuals of rows `{0,1,2}` of `G` against the SIC target, at `x/‖x‖`.
pub fn rows012_residual(x: &[f64]) -> Result<RowsResidual> {
    RowsObjective::new(x.len() / 2, None)?.residuals(x)
}
