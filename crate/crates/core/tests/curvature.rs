use nodal_core::curvature::{kulkarni_nomizu, weyl_from_decomposition, CurvatureTensor, ProductSphereWeyl, SymmetricTensor};
use proptest::prelude::*;

fn symmetric(n: usize, raw: &[f64]) -> SymmetricTensor {
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            data[i * n + j] = raw[i.min(j) * 8 + i.max(j)];
        }
    }
    SymmetricTensor::new(n, data).unwrap()
}

fn algebraic(n: usize, raw: &[f64]) -> CurvatureTensor {
    let (a, b, c) = (symmetric(n, &raw[..64]), symmetric(n, &raw[64..128]), symmetric(n, &raw[128..]));
    let ab = kulkarni_nomizu(&a, &b).unwrap();
    let cc = kulkarni_nomizu(&c, &c).unwrap();
    CurvatureTensor::linear_combination(&[(1.0, &ab), (-0.5, &cc)]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn kulkarni_nomizu_has_curvature_symmetries(
        n in 2usize..=8,
        raw in proptest::collection::vec(-2.0f64..2.0, 192),
    ) {
        let rm = algebraic(n, &raw);
        prop_assert!(rm.symmetry_defects().curvature_max() < 1e-13);
    }

    #[test]
    fn weyl_part_is_trace_free(
        n in 4usize..=8,
        raw in proptest::collection::vec(-2.0f64..2.0, 192),
    ) {
        let rm = algebraic(n, &raw);
        let w = weyl_from_decomposition(&rm, &rm.ricci(), rm.scalar(), n).unwrap().tensor;
        let d = w.symmetry_defects();
        let scale = rm.max_abs().max(1.0);
        prop_assert!(d.curvature_max() < 1e-12 * scale);
        prop_assert!(d.trace < 1e-12 * scale);
        // idempotent
        let again = weyl_from_decomposition(&w, &w.ricci(), w.scalar(), n).unwrap().tensor;
        prop_assert!(again.max_abs_diff(&w) < 1e-12 * scale);
    }

    #[test]
    fn pure_trace_tensors_have_no_weyl_part(
        n in 4usize..=8,
        raw in proptest::collection::vec(-2.0f64..2.0, 64),
    ) {
        let t = symmetric(n, &raw);
        let g = SymmetricTensor::identity(n);
        let rm = kulkarni_nomizu(&t, &g).unwrap();
        let w = weyl_from_decomposition(&rm, &rm.ricci(), rm.scalar(), n).unwrap().tensor;
        prop_assert!(w.max_abs() < 1e-12 * rm.max_abs().max(1.0));
    }
}

#[test]
fn product_weyl_swap_relabels_factors() {
    for (p, q) in [(2, 3), (2, 4), (3, 3), (2, 6)] {
        let a = ProductSphereWeyl::new(p, q).unwrap().materialize().unwrap();
        let b = ProductSphereWeyl::new(q, p).unwrap().materialize().unwrap();
        let n = p + q;
        let perm = |i: usize| if i < p { i + q } else { i - p };
        let mut gap: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        gap = gap.max((a.get(i, j, k, l) - b.get(perm(i), perm(j), perm(k), perm(l))).abs());
                    }
                }
            }
        }
        assert!(gap < 1e-15, "p={p} q={q}");
    }
}

#[test]
fn components_round_trip() {
    let w = ProductSphereWeyl::new(2, 3).unwrap().materialize().unwrap();
    let back = CurvatureTensor::from_components(5, &w.components()).unwrap();
    assert_eq!(back.max_abs_diff(&w), 0.0);
}
