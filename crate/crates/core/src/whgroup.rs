//! Weyl–Heisenberg displacement operators and Clifford unitaries.
//!
//! Phases are tracked exactly as integer exponents of `ζ = e^{iπ/d}`, a
//! primitive `2d`-th root of unity. With that convention `ω = ζ²` and the
//! displacement phase `−e^{iπ/d} = ζ^{d+1}`, so
//! `D_{lα} = ζ^{(d+1)lα} X^l Z^α` with `l, α` reduced to `[0, d)`.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// `e^{iπ k / d}`, exact on the real and imaginary axes.
pub(crate) fn zeta_pow(k: i64, d: usize) -> Complex64 {
    let n = 2 * d as i64;
    let k = k.rem_euclid(n);
    if (4 * k) % n == 0 {
        return match 4 * k / n {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
    }
    Complex64::from_polar(1.0, PI * k as f64 / d as f64)
}

/// `ω^k = e^{2πi k / d}`.
pub(crate) fn omega_pow(k: i64, d: usize) -> Complex64 {
    zeta_pow(2 * k, d)
}

fn check_dim(d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::DimensionTooSmall(d));
    }
    Ok(())
}

/// Label `(l, α)` of the displacement operator `D_{lα}`, reduced mod `d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DisplacementIndex {
    l: usize,
    alpha: usize,
    d: usize,
}

impl DisplacementIndex {
    /// Negative and out-of-range components are reduced mod `d`.
    pub fn new(l: i64, alpha: i64, d: usize) -> Result<Self> {
        check_dim(d)?;
        let m = d as i64;
        Ok(Self { l: l.rem_euclid(m) as usize, alpha: alpha.rem_euclid(m) as usize, d })
    }

    pub fn zero(d: usize) -> Result<Self> {
        Self::new(0, 0, d)
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn alpha(&self) -> usize {
        self.alpha
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn is_zero(&self) -> bool {
        self.l == 0 && self.alpha == 0
    }

    pub fn neg(&self) -> Self {
        Self { l: (self.d - self.l) % self.d, alpha: (self.d - self.alpha) % self.d, d: self.d }
    }

    /// All `d²` indices in row-major `(l, α)` order.
    pub fn all(d: usize) -> impl Iterator<Item = DisplacementIndex> {
        (0..d * d).map(move |i| DisplacementIndex { l: i / d, alpha: i % d, d })
    }

    /// Phase of `D_{lα}` relative to `X^l Z^α`, as an exponent of `ζ`.
    fn phase_exponent(&self) -> i64 {
        ((self.d as i64 + 1) * self.l as i64 * self.alpha as i64).rem_euclid(2 * self.d as i64)
    }
}

impl fmt::Display for DisplacementIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.l, self.alpha)
    }
}

/// Dense square matrix expected to be unitary.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryMatrix(CMatrix);

impl UnitaryMatrix {
    pub fn from_matrix(m: CMatrix) -> Self {
        assert!(m.is_square(), "unitary matrix must be square");
        Self(m)
    }

    pub fn identity(d: usize) -> Self {
        Self(CMatrix::identity(d, d))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn mul(&self, other: &UnitaryMatrix) -> Self {
        Self(&self.0 * &other.0)
    }

    pub fn pow(&self, n: usize) -> Self {
        let mut acc = CMatrix::identity(self.dim(), self.dim());
        for _ in 0..n {
            acc = &acc * &self.0;
        }
        Self(acc)
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let d = self.dim();
        (0..d).map(|i| (0..d).map(|j| self.0[(i, j)] * v[j]).sum()).collect()
    }

    /// Max-abs deviation of `U U†` from the identity.
    pub fn unitarity_error(&self) -> f64 {
        let p = &self.0 * self.0.adjoint();
        max_abs_diff(&p, &CMatrix::identity(self.dim(), self.dim()))
    }
}

pub(crate) fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// The cyclic shift `X|j⟩ = |j+1⟩`.
pub fn shift_operator(d: usize) -> Result<UnitaryMatrix> {
    check_dim(d)?;
    let mut m = CMatrix::zeros(d, d);
    for j in 0..d {
        m[((j + 1) % d, j)] = Complex64::new(1.0, 0.0);
    }
    Ok(UnitaryMatrix(m))
}

/// The clock `Z|j⟩ = ω^j |j⟩`.
pub fn phase_operator(d: usize) -> Result<UnitaryMatrix> {
    check_dim(d)?;
    let mut m = CMatrix::zeros(d, d);
    for j in 0..d {
        m[(j, j)] = omega_pow(j as i64, d);
    }
    Ok(UnitaryMatrix(m))
}

/// `D_{lα} = (−e^{iπ/d})^{lα} X^l Z^α` as a dense matrix.
pub fn displacement(idx: DisplacementIndex) -> UnitaryMatrix {
    let d = idx.d;
    let base = idx.phase_exponent();
    let mut m = CMatrix::zeros(d, d);
    for j in 0..d {
        m[((j + idx.l) % d, j)] = zeta_pow(base + 2 * (idx.alpha * j) as i64, d);
    }
    UnitaryMatrix(m)
}

/// `D_{lα} v` in `O(d)`, without forming the matrix.
pub fn apply_displacement(idx: DisplacementIndex, v: &[Complex64]) -> Vec<Complex64> {
    let d = idx.d;
    assert_eq!(v.len(), d, "vector length must equal the dimension");
    let base = idx.phase_exponent();
    let mut out = vec![Complex64::new(0.0, 0.0); d];
    for (j, &vj) in v.iter().enumerate() {
        out[(j + idx.l) % d] = zeta_pow(base + 2 * (idx.alpha * j) as i64, d) * vj;
    }
    out
}

/// Product label: `D_a D_b = phase · D_{a+b}`, with `a + b` reduced mod `d`.
///
/// For odd `d` the phase is `(−e^{iπ/d})^{αm−βl}`. For even `d` a sign
/// appears whenever the sum wraps, because `D_{l+d,α} = (−1)^{(d+1)α} D_{lα}`.
pub fn compose_indices(a: DisplacementIndex, b: DisplacementIndex) -> Result<(DisplacementIndex, Complex64)> {
    let (sum, e) = compose_exponent(a, b)?;
    Ok((sum, zeta_pow(e, a.d)))
}

pub(crate) fn compose_exponent(a: DisplacementIndex, b: DisplacementIndex) -> Result<(DisplacementIndex, i64)> {
    if a.d != b.d {
        return Err(Error::DimensionMismatch { expected: a.d, found: b.d });
    }
    let d = a.d as i64;
    let (l, al, m, be) = (a.l as i64, a.alpha as i64, b.l as i64, b.alpha as i64);
    let sum = DisplacementIndex::new(l + m, al + be, a.d)?;
    let e = (d + 1) * (l * al + m * be - sum.l as i64 * sum.alpha as i64) + 2 * al * m;
    Ok((sum, e.rem_euclid(2 * d)))
}

/// 2×2 integer matrix over `Z_d` acting on displacement labels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SymplecticMatrix {
    m: [[i64; 2]; 2],
    d: usize,
}

impl SymplecticMatrix {
    /// Entries are reduced mod `d`; no determinant condition is imposed here.
    pub fn new(entries: [[i64; 2]; 2], d: usize) -> Result<Self> {
        check_dim(d)?;
        let r = |x: i64| x.rem_euclid(d as i64);
        Ok(Self { m: [[r(entries[0][0]), r(entries[0][1])], [r(entries[1][0]), r(entries[1][1])]], d })
    }

    pub fn identity(d: usize) -> Result<Self> {
        Self::new([[1, 0], [0, 1]], d)
    }

    /// `(m, n) ↦ (−n, m − n)`, the order-3 Zauner action.
    pub fn zauner(d: usize) -> Result<Self> {
        Self::new([[0, -1], [1, -1]], d)
    }

    /// `diag(1, −1)`: the action of entrywise complex conjugation.
    pub fn conjugation(d: usize) -> Result<Self> {
        Self::new([[1, 0], [0, -1]], d)
    }

    pub fn entries(&self) -> [[i64; 2]; 2] {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn det(&self) -> i64 {
        (self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]).rem_euclid(self.d as i64)
    }

    /// Determinant ≡ 1 mod d.
    pub fn is_special(&self) -> bool {
        self.det() == 1 % self.d as i64
    }

    pub fn apply(&self, idx: DisplacementIndex) -> DisplacementIndex {
        let (m, n) = (idx.l as i64, idx.alpha as i64);
        DisplacementIndex::new(self.m[0][0] * m + self.m[0][1] * n, self.m[1][0] * m + self.m[1][1] * n, self.d)
            .expect("dimension already validated")
    }

    /// Matrix product `self · other`.
    pub fn compose(&self, other: &SymplecticMatrix) -> SymplecticMatrix {
        let (a, b) = (&self.m, &other.m);
        let mut e = [[0i64; 2]; 2];
        for (i, row) in e.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        SymplecticMatrix::new(e, self.d).expect("dimension already validated")
    }

    pub fn is_identity(&self) -> bool {
        let one = 1 % self.d as i64;
        self.m == [[one, 0], [0, one]]
    }

    /// All of `SL(2, Z_d)`, identity first, then lexicographic order.
    pub fn special_linear_group(d: usize) -> Result<Vec<SymplecticMatrix>> {
        check_dim(d)?;
        let n = d as i64;
        let mut out = vec![Self::identity(d)?];
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for e in 0..n {
                        let f = Self::new([[a, b], [c, e]], d)?;
                        if f.is_special() && !f.is_identity() {
                            out.push(f);
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

impl fmt::Display for SymplecticMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{},{}],[{},{}]]", self.m[0][0], self.m[0][1], self.m[1][0], self.m[1][1])
    }
}

/// Order of `SL(2, Z_d)`: `d³ ∏_{p | d} (1 − 1/p²)`.
pub fn special_linear_order(d: usize) -> u64 {
    let mut order = (d as u64).pow(3);
    let mut n = d;
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            order = order / (p * p) as u64 * (p * p - 1) as u64;
            while n.is_multiple_of(p) {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        order = order / (n * n) as u64 * (n * n - 1) as u64;
    }
    order
}

/// Element of the extended Clifford group, modulo phases.
///
/// Acting on a vector: optional entrywise conjugation, then `realized`.
/// `realized = D_translation · V` where `V D_p V† ∝ D_{F p}`.
#[derive(Clone, Debug)]
pub struct CliffordElement {
    pub symplectic: SymplecticMatrix,
    pub translation: DisplacementIndex,
    pub conjugate: bool,
    pub realized: UnitaryMatrix,
}

impl CliffordElement {
    pub fn dim(&self) -> usize {
        self.symplectic.dim()
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        if self.conjugate {
            let c: Vec<Complex64> = v.iter().map(|z| z.conj()).collect();
            self.realized.apply(&c)
        } else {
            self.realized.apply(v)
        }
    }

    /// Action on labels including conjugation, `F·diag(1,−1)` when anti-unitary.
    pub fn label_action(&self) -> SymplecticMatrix {
        if self.conjugate {
            self.symplectic.compose(&SymplecticMatrix::conjugation(self.dim()).expect("valid dim"))
        } else {
            self.symplectic
        }
    }

    pub fn with_conjugation(mut self, conjugate: bool) -> Self {
        self.conjugate = conjugate;
        self
    }

    /// Largest deviation of `R D_p R†` from a unit phase times `D_{F p}`
    /// over all `p`, for the unitary part `R`.
    pub fn conjugation_residual(&self) -> f64 {
        let r = self.realized.matrix();
        let rd = r.adjoint();
        let d = self.dim();
        let mut worst = 0.0f64;
        for p in DisplacementIndex::all(d) {
            let image = r * displacement(p).matrix() * &rd;
            let target = displacement(self.symplectic.apply(p));
            worst = worst.max(phase_aligned_residual(&image, target.matrix()));
        }
        worst
    }
}

/// `min_φ ‖A − e^{iφ}B‖_max`, with `φ` from the Hilbert–Schmidt overlap.
pub(crate) fn phase_aligned_residual(a: &CMatrix, b: &CMatrix) -> f64 {
    let overlap: Complex64 = b.iter().zip(a.iter()).map(|(x, y)| x.conj() * y).sum();
    let phase = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { Complex64::new(1.0, 0.0) };
    a.iter().zip(b.iter()).map(|(x, y)| (x - phase * y).norm()).fold(0.0, f64::max)
}

/// Unitary `V` (up to phase) with `V X V† = D_{F(1,0)}` and `V Z V† = D_{F(0,1)}`.
///
/// Writing `A = D_{F(1,0)}`, `B = D_{F(0,1)}`: the first condition forces the
/// columns `V e_j = A^j v`, the second then reduces to `B v = v`. Both
/// operators satisfy `A^d = B^d = I` under the displacement phase convention,
/// so the eigenvalue-1 eigenvector of `B` exists and is unique up to phase.
fn intertwiner(f: &SymplecticMatrix) -> Result<CMatrix> {
    let d = f.dim();
    let a = displacement(f.apply(DisplacementIndex::new(1, 0, d)?));
    let b = displacement(f.apply(DisplacementIndex::new(0, 1, d)?));

    // d·Π for the spectral projector Π = (1/d) Σ_j B^j onto eigenvalue 1.
    let mut proj = CMatrix::zeros(d, d);
    let mut bj = CMatrix::identity(d, d);
    for _ in 0..d {
        proj += &bj;
        bj = b.matrix() * &bj;
    }
    let col = (0..d).max_by(|&i, &j| proj.column(i).norm().total_cmp(&proj.column(j).norm())).expect("d >= 2");
    let norm = proj.column(col).norm();
    if norm < 1e-6 {
        return Err(Error::Intertwiner(format!("B has no eigenvalue 1 for F = {f}")));
    }
    let mut v: Vec<Complex64> = proj.column(col).iter().map(|z| z / norm).collect();

    let mut out = CMatrix::zeros(d, d);
    for j in 0..d {
        for (i, z) in v.iter().enumerate() {
            out[(i, j)] = *z;
        }
        v = a.apply(&v);
    }

    let x = shift_operator(d)?;
    let z = phase_operator(d)?;
    let err_x = max_abs_diff(&(&out * x.matrix()), &(a.matrix() * &out));
    let err_z = max_abs_diff(&(&out * z.matrix()), &(b.matrix() * &out));
    let err_u = UnitaryMatrix(out.clone()).unitarity_error();
    let worst = err_x.max(err_z).max(err_u);
    if worst > 1e-10 {
        return Err(Error::Intertwiner(format!("intertwining residual {worst:e} for F = {f}")));
    }
    Ok(out)
}

/// Clifford unitary realizing the symplectic `F`, followed by `D_translation`.
pub fn clifford_from_symplectic(
    d: usize,
    f: &SymplecticMatrix,
    translation: DisplacementIndex,
) -> Result<CliffordElement> {
    check_dim(d)?;
    if f.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, found: f.dim() });
    }
    if translation.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, found: translation.dim() });
    }
    if !f.is_special() {
        return Err(Error::NotSymplectic { det: f.det(), modulus: d });
    }
    let v = intertwiner(f)?;
    let realized = if translation.is_zero() { v } else { displacement(translation).matrix() * v };
    Ok(CliffordElement { symplectic: *f, translation, conjugate: false, realized: UnitaryMatrix(realized) })
}

/// The Zauner unitary with its eigenvalues and eigenspace projectors.
#[derive(Clone, Debug)]
pub struct ZaunerData {
    pub dim: usize,
    pub unitary: UnitaryMatrix,
    /// `λ_m = e^{2πi m/3}`.
    pub eigenvalues: [Complex64; 3],
    /// `P_m = (1/3) Σ_j λ_m^{−j} U^j`.
    pub projectors: [CMatrix; 3],
    pub subspace_dims: [usize; 3],
}

impl ZaunerData {
    pub fn project(&self, m: usize, v: &[Complex64]) -> Vec<Complex64> {
        let p = &self.projectors[m];
        let d = self.dim;
        (0..d).map(|i| (0..d).map(|j| p[(i, j)] * v[j]).sum()).collect()
    }

    /// Subspace indices with nonzero dimension, largest first (ties by index).
    pub fn subspaces_by_size(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..3).filter(|&m| self.subspace_dims[m] > 0).collect();
        order.sort_by(|&a, &b| self.subspace_dims[b].cmp(&self.subspace_dims[a]).then(a.cmp(&b)));
        order
    }
}

pub fn zauner_unitary(d: usize) -> Result<ZaunerData> {
    let f = SymplecticMatrix::zauner(d)?;
    let v = clifford_from_symplectic(d, &f, DisplacementIndex::zero(d)?)?.realized;
    let cube = v.pow(3);
    let trace: Complex64 = cube.matrix().diagonal().iter().sum();
    let global = trace / trace.norm();
    let scale = Complex64::from_polar(1.0, -global.arg() / 3.0);
    let unitary = UnitaryMatrix(v.into_matrix() * scale);

    let eigenvalues = [0, 1, 2].map(|m| Complex64::from_polar(1.0, 2.0 * PI * m as f64 / 3.0));
    let u1 = unitary.matrix().clone();
    let u2 = &u1 * &u1;
    let id = CMatrix::identity(d, d);
    let projectors = eigenvalues.map(|lam| {
        let inv = lam.conj();
        (&id + &u1 * inv + &u2 * (inv * inv)) / Complex64::new(3.0, 0.0)
    });
    let subspace_dims = [0, 1, 2].map(|m| {
        let tr: Complex64 = projectors[m].diagonal().iter().sum();
        tr.re.round().max(0.0) as usize
    });
    Ok(ZaunerData { dim: d, unitary, eigenvalues, projectors, subspace_dims })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn idx(l: i64, a: i64, d: usize) -> DisplacementIndex {
        DisplacementIndex::new(l, a, d).unwrap()
    }

    /// Literal `(−e^{iπ/d})^{lα} X^l Z^α` with unreduced integer exponents.
    fn literal_displacement(l: i64, a: i64, d: usize) -> CMatrix {
        let x = shift_operator(d).unwrap().into_matrix();
        let z = phase_operator(d).unwrap().into_matrix();
        let pw = |m: &CMatrix, n: i64| {
            let mut acc = CMatrix::identity(d, d);
            for _ in 0..n.rem_euclid(d as i64) {
                acc = &acc * m;
            }
            acc
        };
        let base = Complex64::from_polar(1.0, PI / d as f64) * -1.0;
        let phase = base.powi((l * a) as i32);
        pw(&x, l) * pw(&z, a) * phase
    }

    #[test]
    fn rejects_small_dimension() {
        assert!(matches!(shift_operator(1), Err(Error::DimensionTooSmall(1))));
        assert!(phase_operator(0).is_err());
    }

    #[test]
    fn shift_d2_is_pauli_x() {
        let x = shift_operator(2).unwrap();
        let expected = CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]);
        assert_eq!(x.matrix(), &expected);
    }

    #[test]
    fn shift_d3_cycles_basis() {
        let x = shift_operator(3).unwrap();
        for j in 0..3 {
            assert_eq!(x.matrix()[((j + 1) % 3, j)], c(1., 0.));
        }
        for d in 2..9 {
            let x = shift_operator(d).unwrap();
            assert!(max_abs_diff(x.pow(d).matrix(), &CMatrix::identity(d, d)) < 1e-15);
        }
    }

    #[test]
    fn phase_operator_small_cases() {
        let z2 = phase_operator(2).unwrap();
        assert_eq!(z2.matrix()[(1, 1)], c(-1., 0.));
        let z4 = phase_operator(4).unwrap();
        let diag: Vec<Complex64> = z4.matrix().diagonal().iter().copied().collect();
        assert_eq!(diag, vec![c(1., 0.), c(0., 1.), c(-1., 0.), c(0., -1.)]);
    }

    #[test]
    fn weyl_commutation() {
        for d in 2..=12 {
            let x = shift_operator(d).unwrap();
            let z = phase_operator(d).unwrap();
            for l in 0..d {
                for a in 0..d {
                    let lhs = x.pow(l).mul(&z.pow(a));
                    let rhs = z.pow(a).mul(&x.pow(l));
                    let w = omega_pow(-((l * a) as i64), d);
                    let err = max_abs_diff(lhs.matrix(), &(rhs.matrix() * w));
                    assert!(err < 1e-13, "d={d} l={l} a={a} err={err}");
                }
            }
        }
    }

    #[test]
    fn displacement_identity_and_d2_example() {
        for d in 2..7 {
            let id = displacement(DisplacementIndex::zero(d).unwrap());
            assert!(max_abs_diff(id.matrix(), &CMatrix::identity(d, d)) < 1e-15);
        }
        // (−e^{iπ/2}) X Z = −i [[0,−1],[1,0]]
        let d11 = displacement(idx(1, 1, 2));
        let expected = CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0., 1.), c(0., -1.), c(0., 0.)]);
        assert!(max_abs_diff(d11.matrix(), &expected) < 1e-15);
    }

    #[test]
    fn displacement_matches_literal_definition() {
        for d in 2..=7 {
            for p in DisplacementIndex::all(d) {
                let lit = literal_displacement(p.l() as i64, p.alpha() as i64, d);
                assert!(max_abs_diff(displacement(p).matrix(), &lit) < 1e-13);
            }
        }
    }

    #[test]
    fn composition_law_with_unreduced_sum() {
        for d in 2..=7 {
            let base = Complex64::from_polar(1.0, PI / d as f64) * -1.0;
            for a in DisplacementIndex::all(d) {
                for b in DisplacementIndex::all(d) {
                    let (l, al, m, be) = (a.l() as i64, a.alpha() as i64, b.l() as i64, b.alpha() as i64);
                    let lhs = displacement(a).mul(&displacement(b));
                    let rhs = literal_displacement(l + m, al + be, d) * base.powi((al * m - be * l) as i32);
                    assert!(max_abs_diff(lhs.matrix(), &rhs) < 1e-13);
                }
            }
        }
    }

    #[test]
    fn compose_indices_examples() {
        let d = 3;
        let (r, ph) = compose_indices(idx(0, 0, d), idx(2, 1, d)).unwrap();
        assert_eq!(r, idx(2, 1, d));
        assert!((ph - c(1., 0.)).norm() < 1e-15);

        let a = idx(1, 2, 5);
        let (r, ph) = compose_indices(a, a.neg()).unwrap();
        assert!(r.is_zero());
        assert!((ph.norm() - 1.0).abs() < 1e-15);

        // (1,0)∘(0,1): exponent αm − βl = −1
        let (r, ph) = compose_indices(idx(1, 0, 3), idx(0, 1, 3)).unwrap();
        assert_eq!(r, idx(1, 1, 3));
        let expected = (Complex64::from_polar(1.0, PI / 3.0) * -1.0).powi(-1);
        assert!((ph - expected).norm() < 1e-15);
        let lhs = displacement(idx(1, 0, 3)).mul(&displacement(idx(0, 1, 3)));
        assert!(max_abs_diff(lhs.matrix(), &(displacement(r).matrix() * ph)) < 1e-14);

        assert!(compose_indices(idx(0, 1, 3), idx(0, 1, 4)).is_err());
    }

    #[test]
    fn negative_indices_are_reduced() {
        let i = idx(-1, -4, 3);
        assert_eq!((i.l(), i.alpha()), (2, 2));
    }

    #[test]
    fn zauner_symplectic_action() {
        for d in 2..=12 {
            let f = SymplecticMatrix::zauner(d).unwrap();
            assert!(f.is_special());
            assert_eq!(f.apply(idx(1, 0, d)), idx(0, 1, d));
            for (m, n) in [(1i64, 2i64), (3, 1), (0, 1)] {
                let twice = f.apply(f.apply(idx(m, n, d)));
                assert_eq!(twice, idx(n - m, -m, d));
            }
            assert!(f.compose(&f).compose(&f).is_identity());
        }
    }

    #[test]
    fn sl2_orders() {
        for d in 2..=8 {
            let g = SymplecticMatrix::special_linear_group(d).unwrap();
            assert_eq!(g.len() as u64, special_linear_order(d), "d={d}");
            assert!(g[0].is_identity());
        }
        assert_eq!(special_linear_order(8), 384);
        assert_eq!(special_linear_order(3), 24);
    }

    #[test]
    fn clifford_identity_is_phase_times_identity() {
        for d in 2..8 {
            let e = clifford_from_symplectic(
                d,
                &SymplecticMatrix::identity(d).unwrap(),
                DisplacementIndex::zero(d).unwrap(),
            )
            .unwrap();
            let id = CMatrix::identity(d, d);
            assert!(phase_aligned_residual(e.realized.matrix(), &id) < 1e-12);
        }
    }

    #[test]
    fn clifford_rejects_non_special() {
        let f = SymplecticMatrix::new([[1, 0], [0, 2]], 5).unwrap();
        let err = clifford_from_symplectic(5, &f, DisplacementIndex::zero(5).unwrap());
        assert!(matches!(err, Err(Error::NotSymplectic { det: 2, modulus: 5 })));
    }

    #[test]
    fn every_symplectic_is_realized() {
        for d in 2..=6 {
            for f in SymplecticMatrix::special_linear_group(d).unwrap() {
                let t = idx(1, d as i64 - 1, d);
                let e = clifford_from_symplectic(d, &f, t).unwrap();
                assert!(e.realized.unitarity_error() < 1e-12);
                assert!(e.conjugation_residual() < 1e-10, "d={d} F={f}");
            }
        }
    }

    #[test]
    fn zauner_clifford_cubes_to_phase_identity() {
        for d in 2..=12 {
            let f = SymplecticMatrix::zauner(d).unwrap();
            let e = clifford_from_symplectic(d, &f, DisplacementIndex::zero(d).unwrap()).unwrap();
            let cube = e.realized.pow(3);
            assert!(phase_aligned_residual(cube.matrix(), &CMatrix::identity(d, d)) < 1e-11);
        }
    }

    #[test]
    fn zauner_data_invariants() {
        for d in 2..=12 {
            let z = zauner_unitary(d).unwrap();
            let id = CMatrix::identity(d, d);
            assert!(max_abs_diff(z.unitary.pow(3).matrix(), &id) < 1e-12, "d={d}");
            let mut sum = CMatrix::zeros(d, d);
            for m in 0..3 {
                let p = &z.projectors[m];
                assert!(max_abs_diff(&(p * p), p) < 1e-12);
                assert!(max_abs_diff(&p.adjoint(), p) < 1e-12);
                assert!(max_abs_diff(&(z.unitary.matrix() * p), &(p * z.eigenvalues[m])) < 1e-12);
                for n in 0..3 {
                    if n != m {
                        assert!(max_abs_diff(&(p * &z.projectors[n]), &CMatrix::zeros(d, d)) < 1e-12);
                    }
                }
                sum += p;
            }
            assert!(max_abs_diff(&sum, &id) < 1e-12);
            assert_eq!(z.subspace_dims.iter().sum::<usize>(), d);
        }
        // For d = 3k the multiplicities are k+1, k, k−1, so d = 3 has an empty eigenspace.
        for (d, want) in [(3, [0, 1, 2]), (6, [1, 2, 3]), (9, [2, 3, 4])] {
            let mut dims = zauner_unitary(d).unwrap().subspace_dims;
            dims.sort();
            assert_eq!(dims, want, "d={d}");
        }
    }

    #[test]
    fn zauner_dims_match_eigendecomposition() {
        // Independent count: multiplicities from a numerical eigen-solver.
        for d in 2..=9 {
            let z = zauner_unitary(d).unwrap();
            let u = z.unitary.matrix();
            // U + U† is Hermitian with eigenvalues 2 cos(2πm/3) ∈ {2, −1, −1};
            // i(U − U†) separates m=1 from m=2.
            let herm = u + u.adjoint();
            let eig = herm.symmetric_eigenvalues();
            let ones = eig.iter().filter(|x| (*x - 2.0).abs() < 1e-8).count();
            assert_eq!(ones, z.subspace_dims[0], "d={d}");
            let anti = (u - u.adjoint()) * Complex64::new(0.0, 1.0);
            let eig2 = anti.symmetric_eigenvalues();
            let neg = eig2.iter().filter(|x| **x < -1e-8).count();
            assert_eq!(neg, z.subspace_dims[1], "d={d}");
        }
    }

    #[test]
    fn zauner_conjugation_action() {
        for d in 2..=12 {
            let z = zauner_unitary(d).unwrap();
            let f = SymplecticMatrix::zauner(d).unwrap();
            let u = z.unitary.matrix();
            for p in [idx(1, 0, d), idx(0, 1, d)] {
                let image = u * displacement(p).matrix() * u.adjoint();
                let target = displacement(f.apply(p));
                assert!(phase_aligned_residual(&image, target.matrix()) < 1e-10);
            }
        }
    }
}
