use proptest::prelude::*;

use sic_core::classify::Classifier;
use sic_core::fiducials;
use sic_core::refine;
use sic_core::search::{search_sic, SearchConfig, SearchMode, Symmetry};
use sic_core::store::SicSolution;
use sic_core::verify::verify_sic;
use sic_core::whgroup::{clifford_from_symplectic, DisplacementIndex, SymplecticMatrix};

fn find(d: usize, seed: u64) -> SicSolution {
    let mut c = SearchConfig::new(d);
    c.master_seed = seed;
    c.mode = SearchMode::FirstHit;
    search_sic(&c).unwrap().0.expect("fiducial found")
}

#[test]
fn search_outputs_refine_to_fifty_digits() {
    for d in 2..=10 {
        let sol = find(d, 100 + d as u64);
        let (refined, outcome) = refine::refine_solution(&sol, 50).unwrap();
        let r = outcome.fiducial.residual_log10();
        assert!(r < -50.0, "d={d} residual 1e{r}");
        assert_eq!(refined.symmetry, sol.symmetry);
        assert!(verify_sic(&refined.to_vector().unwrap(), 1e-12).passed);
    }
}

#[test]
fn zauner_hits_at_d4_form_witness_connected_classes() {
    let mut c = SearchConfig::new(4);
    c.restarts = 50;
    c.master_seed = 9;
    c.mode = SearchMode::Exhaustive;
    let (_, report) = search_sic(&c).unwrap();
    assert!(report.hits() > 0);
    // Re-run each hitting seed on its own to collect the vectors.
    let vectors: Vec<_> = report
        .records
        .iter()
        .filter(|r| r.hit)
        .take(12)
        .map(|r| {
            let mut one = c.clone();
            one.restarts = 1;
            one.master_seed = r.seed;
            one.symmetry = Symmetry::parse(&r.symmetry).unwrap();
            search_sic(&one).unwrap().1.best.unwrap().vector
        })
        .collect();
    let cl = Classifier::new(4).unwrap();
    let classes = cl.catalogue(&vectors).unwrap();
    assert!(!classes.is_empty() && classes.len() <= vectors.len());

    // Pairwise verdicts must be consistent with the partition.
    let class_of = |i: usize| classes.iter().position(|c| c.members.contains(&i)).unwrap();
    for i in 0..vectors.len() {
        for j in 0..vectors.len() {
            let v = cl.equivalent(&vectors[i], &vectors[j]).unwrap();
            assert_eq!(v.equivalent, class_of(i) == class_of(j), "pair ({i}, {j})");
            if let Some(w) = v.witness {
                let image = w.apply(vectors[i].amplitudes());
                assert!(sic_core::classify::ray_distance(&image, vectors[j].amplitudes()) < 1e-8);
            }
        }
    }
    for class in &classes {
        assert_eq!(class.stabilizer_order % 3, 0, "Zauner fiducials have an order-3 symmetry");
    }
}

#[test]
fn duplicates_land_in_one_class() {
    let v = find(5, 1).to_vector().unwrap();
    let classes = Classifier::new(5).unwrap().catalogue(&[v.clone(), v.clone(), v.conj()]).unwrap();
    assert_eq!(classes.len(), 1);
    assert_eq!(classes[0].members, vec![0, 1, 2]);
}

fn extended_clifford_image(
    d: usize,
    entries: [[i64; 2]; 2],
    t: (i64, i64),
    conj: bool,
) -> Option<Vec<sic_core::Complex64>> {
    let f = SymplecticMatrix::new(entries, d).ok()?;
    if !f.is_special() {
        return None;
    }
    let g =
        clifford_from_symplectic(d, &f, DisplacementIndex::new(t.0, t.1, d).unwrap()).unwrap().with_conjugation(conj);
    Some(g.apply(fiducials::norrell().amplitudes()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn verifier_is_invariant_on_extended_clifford_orbits(
        a in 0i64..3, b in 0i64..3, c in 0i64..3, e in 0i64..3,
        t0 in 0i64..3, t1 in 0i64..3, conj in any::<bool>(),
    ) {
        if let Some(image) = extended_clifford_image(3, [[a, b], [c, e]], (t0, t1), conj) {
            let v = sic_core::FiducialVector::new(image).unwrap();
            prop_assert!(verify_sic(&v, 1e-10).passed);
        }
    }
}
