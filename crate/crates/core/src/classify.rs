//! Extended-Clifford orbits, equivalence and stabilizers for small `d`.
//!
//! Every element is `D_t V_F K^c` with `F ∈ SL(2, Z_d)`, `t ∈ Z_d²` and `K`
//! entrywise conjugation (`c ∈ {0, 1}`), modulo phases. Translations never
//! need enumerating: whether some `D_t y` is proportional to `b` is a lookup
//! in the Weyl–Heisenberg orbit of `b`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::overlaps::FiducialVector;
use crate::store::SicSolution;
use crate::verify::{verify_sic, ACCEPT_TOLERANCE};
use crate::whgroup::{
    apply_displacement, clifford_from_symplectic, phase_aligned_residual, CMatrix, CliffordElement, DisplacementIndex,
    SymplecticMatrix,
};

/// Largest dimension the enumerations accept.
pub const MAX_DIM: usize = 8;
/// Ray-match tolerance, `min_φ max_j |x_j − e^{iφ} y_j|`.
pub const MATCH_TOLERANCE: f64 = 1e-8;

/// `min_φ max_j |x_j − e^{iφ} y_j|` with `φ = arg⟨y|x⟩`.
pub fn ray_distance(x: &[Complex64], y: &[Complex64]) -> f64 {
    let ov: Complex64 = y.iter().zip(x).map(|(b, a)| b.conj() * a).sum();
    if ov.norm() == 0.0 {
        return f64::INFINITY;
    }
    let phase = ov / ov.norm();
    x.iter().zip(y).map(|(a, b)| (a - phase * b).norm()).fold(0.0, f64::max)
}

#[derive(Clone, Debug)]
pub struct OrbitRecord {
    pub dim: usize,
    /// One fiducial per distinct SIC, the input's own SIC first.
    pub representatives: Vec<FiducialVector>,
    /// `representatives.len() · d²`.
    pub orbit_vectors: usize,
    /// `trail[i]` maps the input onto `representatives[i]`.
    pub trail: Vec<CliffordElement>,
}

#[derive(Clone, Debug)]
pub struct EquivalenceVerdict {
    pub equivalent: bool,
    /// Maps `a` onto `b` up to a global phase.
    pub witness: Option<CliffordElement>,
}

#[derive(Clone, Debug)]
pub struct Stabilizer {
    pub order: usize,
    pub generators: Vec<CliffordElement>,
}

#[derive(Clone, Debug)]
pub struct CatalogueClass {
    /// Index of the first input in this class.
    pub representative: usize,
    pub members: Vec<usize>,
    /// Witness from the representative to each member, same order.
    pub witnesses: Vec<CliffordElement>,
    pub stabilizer_order: usize,
}

/// Precomputed symplectic intertwiners for one dimension.
pub struct Classifier {
    dim: usize,
    elements: Vec<(SymplecticMatrix, CMatrix)>,
}

impl Classifier {
    pub fn new(d: usize) -> Result<Self> {
        if d > MAX_DIM {
            return Err(Error::DimensionCap { dim: d, cap: MAX_DIM });
        }
        let zero = DisplacementIndex::zero(d)?;
        let elements = SymplecticMatrix::special_linear_group(d)?
            .into_iter()
            .map(|f| Ok((f, clifford_from_symplectic(d, &f, zero)?.realized.into_matrix())))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { dim: d, elements })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of extended-Clifford elements modulo phases, `2·|SL(2,Z_d)|·d²`.
    pub fn group_order(&self) -> usize {
        2 * self.elements.len() * self.dim * self.dim
    }

    fn check(&self, a: &FiducialVector) -> Result<()> {
        if a.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: a.dim() });
        }
        let report = verify_sic(a, ACCEPT_TOLERANCE);
        if !report.passed {
            return Err(Error::NotSic(report.max_sic_deviation));
        }
        Ok(())
    }

    /// `V_F K^c a`, unitary part first in enumeration order.
    fn images<'a>(&'a self, a: &'a FiducialVector) -> impl Iterator<Item = (usize, bool, Vec<Complex64>)> + 'a {
        let conj = a.conj();
        [false, true].into_iter().flat_map(move |c| {
            let src = if c { conj.amplitudes().to_vec() } else { a.amplitudes().to_vec() };
            self.elements.iter().enumerate().map(move |(i, (_, v))| (i, c, mat_vec(v, &src)))
        })
    }

    fn element(&self, index: usize, conjugate: bool, translation: DisplacementIndex) -> CliffordElement {
        let f = self.elements[index].0;
        clifford_from_symplectic(self.dim, &f, translation)
            .expect("intertwiner built at construction")
            .with_conjugation(conjugate)
    }

    /// The `t` with `D_t y ∝ b`, given `orbit[q] = D_q b`.
    fn translation_to(
        &self,
        y: &[Complex64],
        orbit: &[(DisplacementIndex, Vec<Complex64>)],
    ) -> Option<DisplacementIndex> {
        orbit.iter().find(|(_, w)| ray_distance(y, w) < MATCH_TOLERANCE).map(|(q, _)| q.neg())
    }

    pub fn orbit(&self, a: &FiducialVector) -> Result<OrbitRecord> {
        self.check(a)?;
        let d = self.dim;
        let mut reps: Vec<(Vec<(DisplacementIndex, Vec<Complex64>)>, FiducialVector, CliffordElement)> = Vec::new();
        for (i, c, y) in self.images(a) {
            if reps.iter().any(|(orbit, _, _)| self.translation_to(&y, orbit).is_some()) {
                continue;
            }
            let v = FiducialVector::new(y)?;
            reps.push((wh_orbit(&v), v, self.element(i, c, DisplacementIndex::zero(d)?)));
        }
        let (representatives, trail): (Vec<_>, Vec<_>) = reps.into_iter().map(|(_, v, e)| (v, e)).unzip();
        Ok(OrbitRecord { dim: d, orbit_vectors: representatives.len() * d * d, representatives, trail })
    }

    pub fn equivalent(&self, a: &FiducialVector, b: &FiducialVector) -> Result<EquivalenceVerdict> {
        self.check(a)?;
        self.check(b)?;
        let orbit = wh_orbit(b);
        for (i, c, y) in self.images(a) {
            if let Some(t) = self.translation_to(&y, &orbit) {
                return Ok(EquivalenceVerdict { equivalent: true, witness: Some(self.element(i, c, t)) });
            }
        }
        Ok(EquivalenceVerdict { equivalent: false, witness: None })
    }

    /// Every element `g` with `g a ∝ a`.
    pub fn stabilizer_elements(&self, a: &FiducialVector) -> Result<Vec<CliffordElement>> {
        self.check(a)?;
        let orbit = wh_orbit(a);
        let mut out = Vec::new();
        for (i, c, y) in self.images(a) {
            for (q, w) in &orbit {
                if ray_distance(&y, w) < MATCH_TOLERANCE {
                    out.push(self.element(i, c, q.neg()));
                }
            }
        }
        Ok(out)
    }

    pub fn stabilizer(&self, a: &FiducialVector) -> Result<Stabilizer> {
        let elements = self.stabilizer_elements(a)?;
        let order = elements.len();
        let mut generated: Vec<(CMatrix, bool)> = vec![(CMatrix::identity(self.dim, self.dim), false)];
        let mut generators = Vec::new();
        for e in elements {
            let g = (e.realized.matrix().clone(), e.conjugate);
            if generated.iter().any(|h| same_element(h, &g)) {
                continue;
            }
            generators.push(e);
            generated = closure(&generators, self.dim);
        }
        Ok(Stabilizer { order, generators })
    }

    /// Partitions `vectors` into extended-Clifford classes in input order.
    pub fn catalogue(&self, vectors: &[FiducialVector]) -> Result<Vec<CatalogueClass>> {
        for v in vectors {
            self.check(v)?;
        }
        let mut classes: Vec<CatalogueClass> = Vec::new();
        for (i, v) in vectors.iter().enumerate() {
            let found = self.find_class(&classes, vectors, v)?;
            match found {
                Some((k, witness)) => {
                    classes[k].members.push(i);
                    classes[k].witnesses.push(witness);
                }
                None => classes.push(CatalogueClass {
                    representative: i,
                    members: vec![i],
                    witnesses: vec![self.element(0, false, DisplacementIndex::zero(self.dim)?)],
                    stabilizer_order: self.stabilizer_elements(v)?.len(),
                }),
            }
        }
        Ok(classes)
    }

    #[cfg(feature = "parallel")]
    fn find_class(
        &self,
        classes: &[CatalogueClass],
        vectors: &[FiducialVector],
        v: &FiducialVector,
    ) -> Result<Option<(usize, CliffordElement)>> {
        use rayon::prelude::*;
        let verdicts: Vec<Result<EquivalenceVerdict>> =
            classes.par_iter().map(|c| self.equivalent(&vectors[c.representative], v)).collect();
        first_match(verdicts)
    }

    #[cfg(not(feature = "parallel"))]
    fn find_class(
        &self,
        classes: &[CatalogueClass],
        vectors: &[FiducialVector],
        v: &FiducialVector,
    ) -> Result<Option<(usize, CliffordElement)>> {
        first_match(classes.iter().map(|c| self.equivalent(&vectors[c.representative], v)).collect())
    }
}

fn first_match(verdicts: Vec<Result<EquivalenceVerdict>>) -> Result<Option<(usize, CliffordElement)>> {
    for (k, v) in verdicts.into_iter().enumerate() {
        if let Some(w) = v?.witness {
            return Ok(Some((k, w)));
        }
    }
    Ok(None)
}

fn mat_vec(m: &CMatrix, v: &[Complex64]) -> Vec<Complex64> {
    let d = v.len();
    (0..d).map(|i| (0..d).map(|j| m[(i, j)] * v[j]).sum()).collect()
}

fn wh_orbit(b: &FiducialVector) -> Vec<(DisplacementIndex, Vec<Complex64>)> {
    DisplacementIndex::all(b.dim()).map(|q| (q, apply_displacement(q, b.amplitudes()))).collect()
}

/// `(R₁, c₁)(R₂, c₂) = (R₁ K^{c₁} R₂ K^{c₁}, c₁ ⊕ c₂)`.
fn compose(a: &(CMatrix, bool), b: &(CMatrix, bool)) -> (CMatrix, bool) {
    let right = if a.1 { b.0.map(|z| z.conj()) } else { b.0.clone() };
    (&a.0 * right, a.1 ^ b.1)
}

fn same_element(a: &(CMatrix, bool), b: &(CMatrix, bool)) -> bool {
    a.1 == b.1 && phase_aligned_residual(&a.0, &b.0) < 1e-8
}

fn closure(generators: &[CliffordElement], d: usize) -> Vec<(CMatrix, bool)> {
    let gens: Vec<(CMatrix, bool)> = generators.iter().map(|e| (e.realized.matrix().clone(), e.conjugate)).collect();
    let mut set = vec![(CMatrix::identity(d, d), false)];
    let mut frontier = set.clone();
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for x in &frontier {
            for g in &gens {
                let y = compose(g, x);
                if !set.iter().any(|h| same_element(h, &y)) {
                    set.push(y.clone());
                    next.push(y);
                }
            }
        }
        frontier = next;
    }
    set
}

pub fn clifford_orbit(a: &FiducialVector) -> Result<OrbitRecord> {
    Classifier::new(a.dim())?.orbit(a)
}

pub fn equivalent(a: &FiducialVector, b: &FiducialVector) -> Result<EquivalenceVerdict> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim() });
    }
    Classifier::new(a.dim())?.equivalent(a, b)
}

pub fn stabilizer(a: &FiducialVector) -> Result<Stabilizer> {
    Classifier::new(a.dim())?.stabilizer(a)
}

/// Classes of stored solutions; all must share one dimension.
pub fn catalogue(solutions: &[SicSolution]) -> Result<Vec<CatalogueClass>> {
    let Some(first) = solutions.first() else {
        return Ok(Vec::new());
    };
    let d = first.dim;
    let vectors = solutions
        .iter()
        .map(|s| {
            if s.dim != d {
                return Err(Error::DimensionMismatch { expected: d, found: s.dim });
            }
            s.to_vector()
        })
        .collect::<Result<Vec<_>>>()?;
    Classifier::new(d)?.catalogue(&vectors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fiducials;

    fn close(x: &[Complex64], y: &[Complex64]) -> bool {
        ray_distance(x, y) < 1e-8
    }

    #[test]
    fn hesse_orbit_is_single_sic() {
        let orbit = clifford_orbit(&fiducials::hesse()).unwrap();
        assert_eq!(orbit.representatives.len(), 1);
        assert_eq!(orbit.orbit_vectors, 9);
    }

    #[test]
    fn norrell_orbit_has_four_sics() {
        let a = fiducials::norrell();
        let orbit = clifford_orbit(&a).unwrap();
        assert_eq!(orbit.representatives.len(), 4);
        assert_eq!(orbit.orbit_vectors, 36);
        for (rep, g) in orbit.representatives.iter().zip(&orbit.trail) {
            assert!(verify_sic(rep, 1e-10).passed);
            assert!(close(&g.apply(a.amplitudes()), rep.amplitudes()));
        }
    }

    #[test]
    fn hesse_and_norrell_are_inequivalent() {
        let v = equivalent(&fiducials::hesse(), &fiducials::norrell()).unwrap();
        assert!(!v.equivalent);
        assert!(v.witness.is_none());
    }

    #[test]
    fn translate_is_equivalent_with_translation_witness() {
        let a = fiducials::norrell();
        let p = DisplacementIndex::new(2, 1, 3).unwrap();
        let v = equivalent(&a, &a.displaced(p)).unwrap();
        let w = v.witness.unwrap();
        assert!(w.symplectic.is_identity() && !w.conjugate);
        assert_eq!(w.translation, p);
    }

    #[test]
    fn conjugate_is_equivalent() {
        let a = fiducials::qubit();
        let w = equivalent(&a, &a.conj()).unwrap().witness.unwrap();
        assert!(close(&w.apply(a.amplitudes()), a.conj().amplitudes()));
    }

    #[test]
    fn stabilizer_orders_match_orbit_sizes() {
        let c = Classifier::new(3).unwrap();
        assert_eq!(c.group_order(), 432);
        for (a, expected) in [(fiducials::hesse(), 48), (fiducials::norrell(), 12)] {
            let s = c.stabilizer(&a).unwrap();
            assert_eq!(s.order, expected);
            assert_eq!(s.order * c.orbit(&a).unwrap().orbit_vectors, c.group_order());
            assert_eq!(closure(&s.generators, 3).len(), expected);
            for g in &s.generators {
                assert!(close(&g.apply(a.amplitudes()), a.amplitudes()));
            }
        }
    }

    #[test]
    fn stabilizer_order_constant_on_orbit() {
        let c = Classifier::new(3).unwrap();
        for rep in c.orbit(&fiducials::norrell()).unwrap().representatives {
            assert_eq!(c.stabilizer_elements(&rep).unwrap().len(), 12);
        }
    }

    #[test]
    fn catalogue_separates_hesse_and_norrell_orbits() {
        let c = Classifier::new(3).unwrap();
        let mut input = vec![fiducials::hesse()];
        input.extend(c.orbit(&fiducials::norrell()).unwrap().representatives);
        input.push(fiducials::hesse());
        let classes = c.catalogue(&input).unwrap();
        assert_eq!(classes.len(), 2);
        assert_eq!(classes[0].members, vec![0, 5]);
        assert_eq!(classes[1].members, vec![1, 2, 3, 4]);
        assert_eq!(classes[1].stabilizer_order, 12);
        for class in &classes {
            let rep = &input[class.representative];
            for (m, w) in class.members.iter().zip(&class.witnesses) {
                assert!(close(&w.apply(rep.amplitudes()), input[*m].amplitudes()));
            }
        }
    }

    #[test]
    fn rejects_large_dimension_and_non_sic() {
        assert!(matches!(Classifier::new(9), Err(Error::DimensionCap { dim: 9, cap: 8 })));
        let c = Classifier::new(3).unwrap();
        assert!(matches!(c.orbit(&FiducialVector::basis(3, 0).unwrap()), Err(Error::NotSic(_))));
    }

    #[test]
    fn qubit_stabilizer() {
        // 8 fiducial vectors among 2·6·4 = 48 elements.
        let s = stabilizer(&fiducials::qubit()).unwrap();
        assert_eq!(s.order, 6);
    }
}
