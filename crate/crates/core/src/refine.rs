//! Multi-precision polishing of double-precision fiducials.
//!
//! Gauss–Newton on the full overlap system `G − T = 0` (real and imaginary
//! parts of every entry) plus `‖a‖² − 1 = 0`. The normal equations are
//! augmented with `t tᵀ`, `t = i·a` the global-phase direction, which is
//! exactly in the null space of the Jacobian, so the step carries no phase
//! component. Other null directions (continuous fiducial families) are dropped
//! by a rank-revealing Cholesky factorization.
//!
//! Each step roughly doubles the number of correct digits, and the working
//! precision is raised to match before the step is taken.

use crate::error::{Error, Result};
use crate::mp::{self, bits_for_digits, BigComplex, Real};
use crate::overlaps::FiducialVector;
use crate::search::{Subspace, Symmetry};
use crate::store::SicSolution;
use crate::verify::verify_zauner;
use crate::whgroup::{zauner_unitary, DisplacementIndex, SymplecticMatrix};

pub const DEFAULT_DIGITS: usize = 50;
/// Extra decimal digits carried above the target.
const GUARD_DIGITS: usize = 20;
const MIN_STAGE_DIGITS: usize = 40;
const MAX_STEPS: usize = 40;
/// Below this residual (log10) the iterate counts as inside the basin, where
/// every two steps must at least multiply the digit count by this factor.
const BASIN_LOG10: f64 = -6.0;
const MIN_RATE: f64 = 1.4;

#[derive(Clone, Debug)]
pub struct BigFiducial {
    pub dim: usize,
    pub amplitudes: Vec<BigComplex>,
    /// Decimal digits the amplitudes are good to.
    pub working_precision: usize,
}

impl BigFiducial {
    pub fn from_vector(a: &FiducialVector, digits: usize) -> Self {
        let bits = bits_for_digits(digits);
        let amplitudes = a.amplitudes().iter().map(|z| BigComplex::from_c64(*z, bits)).collect();
        Self { dim: a.dim(), amplitudes, working_precision: 15 }
    }

    /// Reads the stored decimals directly, without passing through `f64`.
    pub fn from_solution(s: &SicSolution, digits: usize) -> Result<Self> {
        let bits = bits_for_digits(digits.max(s.digits));
        let mut parts = Vec::with_capacity(s.amplitudes.len());
        for text in &s.amplitudes {
            let x = Real::from_decimal(text, bits)
                .ok_or_else(|| Error::InvalidConfig(format!("not a decimal amplitude: {text}")))?;
            parts.push(x);
        }
        if parts.len() != 2 * s.dim {
            return Err(Error::DimensionMismatch { expected: 2 * s.dim, found: parts.len() });
        }
        let amplitudes = parts.chunks(2).map(|p| BigComplex::new(p[0].clone(), p[1].clone())).collect();
        Ok(Self { dim: s.dim, amplitudes, working_precision: s.digits })
    }

    pub fn to_vector(&self) -> Result<FiducialVector> {
        FiducialVector::new(self.amplitudes.iter().map(BigComplex::to_c64).collect())
    }

    fn bits(&self) -> usize {
        self.amplitudes.iter().map(|z| z.re.precision()).max().unwrap_or(64)
    }

    /// Max-norm of the overlap and normalization residuals, as `log10`.
    pub fn residual_log10(&self) -> f64 {
        evaluate(&self.amplitudes, self.bits(), false).max_log10
    }

    /// `Σ_{kl} |G_{kl} − T_{kl}|²` at the working precision.
    pub fn frame_error(&self) -> Real {
        evaluate(&self.amplitudes, self.bits(), false).frame_error
    }

    /// Solution record with `digits` fractional digits per component.
    pub fn to_solution(&self, symmetry: &str, digits: usize) -> SicSolution {
        SicSolution {
            dim: self.dim,
            symmetry: symmetry.to_string(),
            digits,
            frame_error: self.frame_error().to_scientific(16),
            amplitudes: self.amplitudes.iter().flat_map(|z| [z.re.to_fixed(digits), z.im.to_fixed(digits)]).collect(),
            created_by: None,
            stabilizer_order: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RefineStep {
    /// Decimal precision the step was computed at.
    pub digits: usize,
    pub residual_log10: f64,
}

#[derive(Clone, Debug)]
pub struct RefineOutcome {
    pub fiducial: BigFiducial,
    /// Entry 0 is the starting point, one entry per step after that.
    pub history: Vec<RefineStep>,
}

impl RefineOutcome {
    pub fn steps(&self) -> usize {
        self.history.len().saturating_sub(1)
    }

    /// `log r_{n+1} / log r_n` for steps that start inside the basin and end
    /// above the precision floor; 2 for quadratic convergence.
    pub fn convergence_ratios(&self) -> Vec<f64> {
        self.history
            .windows(2)
            .filter(|w| w[0].residual_log10 < BASIN_LOG10 && !at_floor(&w[1]))
            .map(|w| w[1].residual_log10 / w[0].residual_log10)
            .collect()
    }
}

fn at_floor(step: &RefineStep) -> bool {
    step.residual_log10 < -(step.digits as f64 - 10.0)
}

/// Refines without symmetry constraints.
pub fn refine(a: &FiducialVector, target_digits: usize) -> Result<RefineOutcome> {
    refine_big(BigFiducial::from_vector(a, target_digits + GUARD_DIGITS), target_digits, None)
}

/// Refines a stored solution, keeping a Zauner label as a constraint.
pub fn refine_solution(s: &SicSolution, target_digits: usize) -> Result<(SicSolution, RefineOutcome)> {
    let start = BigFiducial::from_solution(s, target_digits + GUARD_DIGITS)?;
    let subspace = match Symmetry::parse(&s.symmetry)? {
        Symmetry::None => None,
        Symmetry::Zauner(Subspace::Index(m)) => Some(m),
        Symmetry::Zauner(Subspace::Auto) if s.dim > 2 => {
            let z = zauner_unitary(s.dim)?;
            Some(verify_zauner(&start.to_vector()?, &z).closest_subspace)
        }
        Symmetry::Zauner(Subspace::Auto) => None,
    };
    let outcome = refine_big(start, target_digits, subspace)?;
    let mut out = outcome.fiducial.to_solution(&s.symmetry, target_digits);
    out.created_by = s.created_by.clone();
    out.stabilizer_order = s.stabilizer_order;
    Ok((out, outcome))
}

/// Gauss–Newton from `start` until the residual max-norm is below
/// `10^{−target_digits}`, re-projecting onto Zauner subspace `zauner` (if any)
/// after every step.
pub fn refine_big(start: BigFiducial, target_digits: usize, zauner: Option<usize>) -> Result<RefineOutcome> {
    let d = start.dim;
    if d < 2 {
        return Err(Error::DimensionTooSmall(d));
    }
    let max_digits = target_digits + GUARD_DIGITS;
    let max_bits = bits_for_digits(max_digits);
    let projector = match zauner {
        Some(m) if m < 3 => Some(zauner_projector(d, m, max_bits)?),
        Some(m) => return Err(Error::InvalidConfig(format!("Zauner subspace {m} out of range"))),
        None => None,
    };

    let mut current =
        constrain(&start.amplitudes.iter().map(|z| z.at(max_bits)).collect::<Vec<_>>(), projector.as_ref(), max_bits)?;
    let mut residual = evaluate(&current, max_bits, false).max_log10;
    let mut history = vec![RefineStep { digits: max_digits, residual_log10: residual }];
    let target = -(target_digits as f64);

    for _ in 0..MAX_STEPS {
        if residual < target {
            break;
        }
        let digits = ((-2.0 * residual).ceil().max(0.0) as usize + GUARD_DIGITS).clamp(MIN_STAGE_DIGITS, max_digits);
        let bits = bits_for_digits(digits);
        let x: Vec<BigComplex> = current.iter().map(|z| z.at(bits)).collect();
        let eval = evaluate(&x, bits, true);
        let (mut normal, rhs) = eval.normal.expect("requested");
        // Gauge term t tᵀ, t = (−y, x).
        let t: Vec<Real> = x.iter().map(|z| -z.im.clone()).chain(x.iter().map(|z| z.re.clone())).collect();
        for i in 0..2 * d {
            for j in 0..=i {
                normal[i][j] = &normal[i][j] + &(&t[i] * &t[j]);
            }
        }
        let (normal, rhs) = match &projector {
            Some(p) => restrict_to_subspace(&normal, &rhs, p, bits),
            None => (normal, rhs),
        };
        let delta = solve_semidefinite(normal, rhs, digits);
        // Near a singular root (the continuous d=3 families) Gauss–Newton only
        // halves the error along the soft direction, so a doubled step is tried too.
        let mut best: Option<(Vec<BigComplex>, f64)> = None;
        for scale in [1i64, 2] {
            let stepped: Vec<BigComplex> = x
                .iter()
                .enumerate()
                .map(|(m, z)| {
                    BigComplex::new(&z.re - &delta[m].scale_int(scale), &z.im - &delta[d + m].scale_int(scale))
                })
                .collect();
            let candidate =
                constrain(&stepped.iter().map(|z| z.at(max_bits)).collect::<Vec<_>>(), projector.as_ref(), max_bits)?;
            let r = evaluate(&candidate, max_bits, false).max_log10;
            if best.as_ref().is_none_or(|(_, b)| r < *b) {
                best = Some((candidate, r));
            }
        }
        let (next, next_residual) = best.expect("two candidates");
        let step = RefineStep { digits, residual_log10: next_residual };

        // Plain and doubled steps can alternate, so the rate is judged over two steps.
        let two_back = history.len().checked_sub(2).map(|i| history[i].residual_log10);
        let stalled = next_residual >= residual - 0.3
            || two_back.is_some_and(|r2| r2 < BASIN_LOG10 && next_residual / r2 < MIN_RATE);
        if stalled && !at_floor(&step) && next_residual >= target {
            return Err(Error::Divergence {
                residual_log10: residual,
                last_good: Box::new(BigFiducial {
                    dim: d,
                    amplitudes: current,
                    working_precision: digits_of(residual),
                }),
            });
        }
        history.push(step);
        current = next;
        residual = next_residual;
    }
    if residual >= target {
        return Err(Error::Divergence {
            residual_log10: residual,
            last_good: Box::new(BigFiducial { dim: d, amplitudes: current, working_precision: digits_of(residual) }),
        });
    }
    Ok(RefineOutcome {
        fiducial: BigFiducial { dim: d, amplitudes: current, working_precision: target_digits },
        history,
    })
}

fn digits_of(residual_log10: f64) -> usize {
    (-residual_log10).floor().max(0.0) as usize
}

/// Zauner projection (if any) followed by normalization.
fn constrain(v: &[BigComplex], projector: Option<&Vec<Vec<BigComplex>>>, bits: usize) -> Result<Vec<BigComplex>> {
    let projected = match projector {
        Some(p) => mat_vec(p, v, bits),
        None => v.to_vec(),
    };
    let n = mp::norm(&projected, bits);
    if n.to_f64() < 1e-12 {
        return Err(Error::ZeroVector { after_projection: projector.is_some() });
    }
    let inv = n.recip();
    Ok(projected.iter().map(|z| z.scale(&inv)).collect())
}

struct Evaluation {
    max_log10: f64,
    frame_error: Real,
    /// Lower triangle of `JᵀJ` and `Jᵀr`.
    normal: Option<(Vec<Vec<Real>>, Vec<Real>)>,
}

/// Residuals of the overlap system at `a`, and the normal equations if asked.
///
/// With `G_{kl} = Σ_j a_j a*_{j+k} a*_{j+l} a_{j+k+l}`:
/// `∂G/∂a_m = a*_{m+k} a*_{m+l} a_{m+k+l} + a_{m−k−l} a*_{m−l} a*_{m−k}` and
/// `∂G/∂a*_m = a_{m−k} a*_{m−k+l} a_{m+l} + a_{m−l} a*_{m−l+k} a_{m+k}`;
/// real coordinates follow from `∂_x = ∂_a + ∂_{a*}`, `∂_y = i(∂_a − ∂_{a*})`.
fn evaluate(a: &[BigComplex], bits: usize, jacobian: bool) -> Evaluation {
    let d = a.len();
    let n = 2 * d;
    let c: Vec<BigComplex> = a.iter().map(BigComplex::conj).collect();
    let at = |i: isize| (i.rem_euclid(d as isize)) as usize;
    let inv_d1 = Real::one(bits).div(&Real::from_int(d as i64 + 1, bits));

    let mut max_abs = Real::zero(bits);
    let mut frame = Real::zero(bits);
    let mut normal = jacobian.then(|| (vec![vec![Real::zero(bits); n]; n], vec![Real::zero(bits); n]));
    let accumulate = |row: &[Real], r: &Real, normal: &mut Option<(Vec<Vec<Real>>, Vec<Real>)>| {
        if let Some((m, b)) = normal.as_mut() {
            for i in 0..n {
                if row[i].is_zero() {
                    continue;
                }
                b[i] = &b[i] + &(&row[i] * r);
                for j in 0..=i {
                    m[i][j] = &m[i][j] + &(&row[i] * &row[j]);
                }
            }
        }
    };

    let mut row_re = vec![Real::zero(bits); n];
    let mut row_im = vec![Real::zero(bits); n];
    for k in 0..d as isize {
        for l in 0..d as isize {
            let mut g = BigComplex::zero(bits);
            for j in 0..d as isize {
                let term = &(&a[at(j)] * &c[at(j + k)]) * &(&c[at(j + l)] * &a[at(j + k + l)]);
                g = &g + &term;
            }
            let t = ((k == 0) as i64 + (l == 0) as i64) as f64;
            let target = if t == 0.0 { Real::zero(bits) } else { inv_d1.scale_int(t as i64) };
            let r = BigComplex::new(&g.re - &target, g.im.clone());
            frame = &frame + &r.norm_sqr();
            for part in [&r.re, &r.im] {
                let mag = part.abs();
                if mag > max_abs {
                    max_abs = mag;
                }
            }
            if normal.is_none() {
                continue;
            }
            for m in 0..d as isize {
                let ha = &(&(&c[at(m + k)] * &c[at(m + l)]) * &a[at(m + k + l)])
                    + &(&(&a[at(m - k - l)] * &c[at(m - l)]) * &c[at(m - k)]);
                let hc = &(&(&a[at(m - k)] * &c[at(m - k + l)]) * &a[at(m + l)])
                    + &(&(&a[at(m - l)] * &c[at(m - l + k)]) * &a[at(m + k)]);
                let dx = &ha + &hc;
                let dy = (&ha - &hc).mul_i();
                let m = m as usize;
                row_re[m] = dx.re;
                row_im[m] = dx.im;
                row_re[d + m] = dy.re;
                row_im[d + m] = dy.im;
            }
            accumulate(&row_re, &r.re, &mut normal);
            accumulate(&row_im, &r.im, &mut normal);
        }
    }

    let norm_sq = a.iter().fold(Real::zero(bits), |acc, z| &acc + &z.norm_sqr());
    let rn = &norm_sq - &Real::one(bits);
    if rn.abs() > max_abs {
        max_abs = rn.abs();
    }
    if normal.is_some() {
        let row: Vec<Real> = a.iter().map(|z| z.re.scale_int(2)).chain(a.iter().map(|z| z.im.scale_int(2))).collect();
        accumulate(&row, &rn, &mut normal);
    }
    Evaluation { max_log10: max_abs.log10_abs(), frame_error: frame, normal }
}

/// Solves `M δ = b` for symmetric positive semidefinite `M` (lower triangle
/// given) by Cholesky with diagonal pivoting. Pivots below `10^{−digits/2}`
/// of the largest diagonal entry are treated as null directions and receive
/// no step.
fn solve_semidefinite(mut m: Vec<Vec<Real>>, b: Vec<Real>, digits: usize) -> Vec<Real> {
    let n = b.len();
    let bits = b.first().map(Real::precision).unwrap_or(64);
    let sym = |m: &Vec<Vec<Real>>, i: usize, j: usize| if j <= i { m[i][j].clone() } else { m[j][i].clone() };
    let mut full: Vec<Vec<Real>> = (0..n).map(|i| (0..n).map(|j| sym(&m, i, j)).collect()).collect();
    m.clear();

    let mut perm: Vec<usize> = (0..n).collect();
    let scale = (0..n).map(|i| full[i][i].to_f64()).fold(0.0, f64::max);
    let floor = scale * 10f64.powf(-0.75 * digits as f64);
    let mut rank = 0;
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| full[i][i].partial_cmp(&full[j][j]).expect("finite")).expect("nonempty");
        if full[p][p].to_f64() <= floor {
            break;
        }
        full.swap(k, p);
        for row in full.iter_mut() {
            row.swap(k, p);
        }
        perm.swap(k, p);
        let pivot = full[k][k].sqrt();
        full[k][k] = pivot.clone();
        for i in k + 1..n {
            full[i][k] = full[i][k].div(&pivot);
        }
        for i in k + 1..n {
            for j in k + 1..=i {
                let v = &full[i][j] - &(&full[i][k] * &full[j][k]);
                full[i][j] = v.clone();
                full[j][i] = v;
            }
        }
        rank = k + 1;
    }

    // L y = P b, then Lᵀ z = y on the leading `rank` block.
    let pb: Vec<Real> = perm.iter().map(|&i| b[i].clone()).collect();
    let mut y = vec![Real::zero(bits); rank];
    for i in 0..rank {
        let mut s = pb[i].clone();
        for j in 0..i {
            s = &s - &(&full[i][j] * &y[j]);
        }
        y[i] = s.div(&full[i][i]);
    }
    let mut z = vec![Real::zero(bits); rank];
    for i in (0..rank).rev() {
        let mut s = y[i].clone();
        for j in i + 1..rank {
            s = &s - &(&full[j][i] * &z[j]);
        }
        z[i] = s.div(&full[i][i]);
    }
    let mut out = vec![Real::zero(bits); n];
    for (i, zi) in z.into_iter().enumerate() {
        out[perm[i]] = zi;
    }
    out
}

/// `R M R` and `R b` for the real form `R = [[Re P, −Im P], [Im P, Re P]]`
/// of a Hermitian projector, so the step stays in the eigenspace.
fn restrict_to_subspace(
    lower: &[Vec<Real>],
    b: &[Real],
    p: &[Vec<BigComplex>],
    bits: usize,
) -> (Vec<Vec<Real>>, Vec<Real>) {
    let d = p.len();
    let n = 2 * d;
    let r = |i: usize, j: usize| -> Real {
        let z = &p[i % d][j % d];
        match (i < d, j < d) {
            (true, true) | (false, false) => z.re.at(bits),
            (true, false) => -z.im.at(bits),
            (false, true) => z.im.at(bits),
        }
    };
    let rm: Vec<Vec<Real>> = (0..n).map(|i| (0..n).map(|j| r(i, j)).collect()).collect();
    let m = |i: usize, j: usize| if j <= i { &lower[i][j] } else { &lower[j][i] };
    let zero = Real::zero(bits);
    let rmm: Vec<Vec<Real>> = (0..n)
        .map(|i| (0..n).map(|j| (0..n).fold(zero.clone(), |acc, k| &acc + &(&rm[i][k] * m(k, j)))).collect())
        .collect();
    let out: Vec<Vec<Real>> = (0..n)
        .map(|i| (0..=i).map(|j| (0..n).fold(zero.clone(), |acc, k| &acc + &(&rmm[i][k] * &rm[k][j]))).collect())
        .collect();
    let rb = (0..n).map(|i| (0..n).fold(zero.clone(), |acc, k| &acc + &(&rm[i][k] * &b[k]))).collect();
    (out, rb)
}

fn mat_vec(p: &[Vec<BigComplex>], v: &[BigComplex], bits: usize) -> Vec<BigComplex> {
    p.iter().map(|row| row.iter().zip(v).fold(BigComplex::zero(bits), |acc, (x, y)| &acc + &(x * y))).collect()
}

fn mat_mul(a: &[Vec<BigComplex>], b: &[Vec<BigComplex>], bits: usize) -> Vec<Vec<BigComplex>> {
    let d = a.len();
    (0..d)
        .map(|i| (0..d).map(|j| (0..d).fold(BigComplex::zero(bits), |acc, k| &acc + &(&a[i][k] * &b[k][j]))).collect())
        .collect()
}

/// High-precision `P_m = (1/3) Σ_j λ_m^{−j} U^j`, rebuilt the same way as the
/// double-precision Zauner data and phase-matched to it.
fn zauner_projector(d: usize, m: usize, bits: usize) -> Result<Vec<Vec<BigComplex>>> {
    let low = zauner_unitary(d)?;
    let f = SymplecticMatrix::zauner(d)?;
    let a_idx = f.apply(DisplacementIndex::new(1, 0, d)?);
    let b_idx = f.apply(DisplacementIndex::new(0, 1, d)?);

    // Column `c` of Σ_j B^j, for the column of largest norm.
    let column = |c: usize| {
        let mut acc = vec![BigComplex::zero(bits); d];
        let mut e = vec![BigComplex::zero(bits); d];
        e[c] = BigComplex::one(bits);
        for _ in 0..d {
            for (s, x) in acc.iter_mut().zip(&e) {
                *s = &*s + x;
            }
            e = mp::apply_displacement(b_idx, &e, bits);
        }
        acc
    };
    let columns: Vec<Vec<BigComplex>> = (0..d).map(column).collect();
    let best = (0..d)
        .max_by(|&i, &j| mp::norm(&columns[i], 64).to_f64().total_cmp(&mp::norm(&columns[j], 64).to_f64()))
        .expect("d >= 2");
    let inv = mp::norm(&columns[best], bits).recip();
    let mut v: Vec<BigComplex> = columns[best].iter().map(|z| z.scale(&inv)).collect();

    let mut vmat = vec![vec![BigComplex::zero(bits); d]; d];
    for j in 0..d {
        for (i, z) in v.iter().enumerate() {
            vmat[i][j] = z.clone();
        }
        v = mp::apply_displacement(a_idx, &v, bits);
    }

    // Phase s with s³ tr(V³) real positive, on the branch the double-precision data chose.
    let v2 = mat_mul(&vmat, &vmat, bits);
    let trace =
        (0..d).fold(BigComplex::zero(bits), |acc, i| (0..d).fold(acc, |acc, k| &acc + &(&v2[i][k] * &vmat[k][i])));
    let unit = trace.conj().scale(&trace.norm_sqr().sqrt().recip());
    let (pi, pj) = (0..d * d)
        .map(|x| (x / d, x % d))
        .max_by(|&(i, j), &(k, l)| vmat[i][j].to_c64().norm().total_cmp(&vmat[k][l].to_c64().norm()))
        .expect("nonempty");
    let guess = low.unitary.matrix()[(pi, pj)] / vmat[pi][pj].to_c64();
    let s = mp::polish_root(&BigComplex::from_c64(guess, bits), 3, &unit, bits);

    let u: Vec<Vec<BigComplex>> = vmat.iter().map(|row| row.iter().map(|z| z * &s).collect()).collect();
    let u2 = mat_mul(&u, &u, bits);
    let lam = mp::root_of_unity(-(m as i64), 3, bits);
    let lam2 = &lam * &lam;
    let third = Real::one(bits).div(&Real::from_int(3, bits));
    Ok((0..d)
        .map(|i| {
            (0..d)
                .map(|j| {
                    let id = if i == j { BigComplex::one(bits) } else { BigComplex::zero(bits) };
                    (&(&id + &(&lam * &u[i][j])) + &(&lam2 * &u2[i][j])).scale(&third)
                })
                .collect()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fiducials;
    use crate::overlaps::FiducialVector;
    use num_complex::Complex64;

    /// `(√((3+√3)/6), e^{iπ/4} √((3−√3)/6))` evaluated at `bits`.
    fn qubit_closed_form(bits: usize) -> Vec<BigComplex> {
        let three = Real::from_int(3, bits);
        let six = Real::from_int(6, bits);
        let r3 = three.sqrt();
        let a0 = (&three + &r3).div(&six).sqrt();
        let a1 = (&three - &r3).div(&six).sqrt();
        let h = Real::from_int(2, bits).sqrt().recip();
        vec![BigComplex::new(a0, Real::zero(bits)), BigComplex::new(&a1 * &h, &a1 * &h)]
    }

    #[test]
    fn qubit_refines_to_closed_form() {
        let out = refine(&fiducials::qubit(), 50).unwrap();
        assert!(out.history.last().unwrap().residual_log10 < -50.0);
        let exact = qubit_closed_form(bits_for_digits(80));
        let dist = mp::ray_distance_log10(&out.fiducial.amplitudes, &exact, bits_for_digits(80));
        assert!(dist < -48.0, "distance 1e{dist}");
    }

    #[test]
    fn hesse_needs_at_most_one_step() {
        for digits in [30, 60, 120] {
            let out = refine(&fiducials::hesse(), digits).unwrap();
            assert!(out.steps() <= 1, "{:?}", out.history);
            assert!(out.fiducial.residual_log10() < -(digits as f64));
        }
    }

    #[test]
    fn quadratic_convergence_from_perturbed_start() {
        let q = fiducials::qubit();
        let p: Vec<Complex64> =
            q.amplitudes().iter().zip([3e-8, -2e-8]).map(|(z, e)| z + Complex64::new(e, e / 2.0)).collect();
        let out = refine(&FiducialVector::new(p).unwrap(), 150).unwrap();
        let ratios = out.convergence_ratios();
        assert!(ratios.len() >= 3, "{:?}", out.history);
        for r in ratios {
            assert!((1.7..=2.3).contains(&r), "ratio {r}: {:?}", out.history);
        }
    }

    #[test]
    fn refinement_is_idempotent() {
        let first = refine(&fiducials::norrell(), 40).unwrap();
        let sol = first.fiducial.to_solution("none", 40);
        let (again, outcome) = refine_solution(&sol, 40).unwrap();
        assert!(outcome.steps() <= 1);
        for (x, y) in sol.amplitudes.iter().zip(&again.amplitudes) {
            let bits = bits_for_digits(60);
            let diff = &Real::from_decimal(x, bits).unwrap() - &Real::from_decimal(y, bits).unwrap();
            assert!(diff.log10_abs() < -38.0, "{x} vs {y}");
        }
    }

    #[test]
    fn non_sic_input_diverges() {
        let err = refine(&FiducialVector::flat(4).unwrap(), 30).unwrap_err();
        match err {
            Error::Divergence { last_good, .. } => assert_eq!(last_good.dim, 4),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn zauner_constrained_refinement_stays_in_subspace() {
        let z = zauner_unitary(4).unwrap();
        let mut cfg = crate::search::SearchConfig::new(4);
        cfg.restarts = 50;
        let (sol, _) = crate::search::search_sic(&cfg).unwrap();
        let sol = sol.expect("d=4 fiducial");
        let (refined, out) = refine_solution(&sol, 60).unwrap();
        assert!(out.fiducial.residual_log10() < -60.0);
        let v = refined.to_vector().unwrap();
        let checks = verify_zauner(&v, &z);
        assert!(checks.projection_residuals.iter().cloned().fold(f64::INFINITY, f64::min) < 1e-14);
        assert_eq!(refined.amplitudes.len(), 8);
        assert!(refined.amplitudes.iter().all(|a| a.split_once('.').unwrap().1.len() == 60));
    }

    #[test]
    fn projector_is_idempotent_at_high_precision() {
        let bits = bits_for_digits(60);
        for d in [3, 4, 6] {
            let dims = zauner_unitary(d).unwrap().subspace_dims;
            for m in 0..3 {
                let p = zauner_projector(d, m, bits).unwrap();
                let p2 = mat_mul(&p, &p, bits);
                let mut worst = f64::NEG_INFINITY;
                let mut trace = BigComplex::zero(bits);
                for i in 0..d {
                    trace = &trace + &p[i][i];
                    for j in 0..d {
                        worst = worst.max((&p2[i][j] - &p[i][j]).norm_sqr().log10_abs() / 2.0);
                    }
                }
                assert!(worst < -55.0, "d={d} m={m} 1e{worst}");
                assert!((trace.re.to_f64() - dims[m] as f64).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn semidefinite_solver_skips_null_directions() {
        let bits = 200;
        let r = |x: i64| Real::from_int(x, bits);
        // diag(4, 0, 1) with b in the range.
        let m = vec![vec![r(4)], vec![r(0), r(0)], vec![r(0), r(0), r(1)]];
        let x = solve_semidefinite(m, vec![r(8), r(0), r(3)], 60);
        assert_eq!(x.iter().map(Real::to_f64).collect::<Vec<_>>(), vec![2.0, 0.0, 3.0]);
    }
}
