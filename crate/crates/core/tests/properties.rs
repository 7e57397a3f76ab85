use pkp::estimator::cost_filtered;
use pkp::filtered::FilteredParams;
use pkp::instance::{generate_instance, verify, Permutation, PkpInstance};
use pkp::list::{merge, TaggedList};
use pkp::logmath::log2_sum;
use pkp::{Elem, Matrix, PrimeField};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const PRIMES: [u64; 5] = [3, 5, 7, 11, 251];

fn field() -> impl Strategy<Value = PrimeField> {
    prop::sample::select(&PRIMES[..]).prop_map(|q| PrimeField::new(q).unwrap())
}

fn matrix() -> impl Strategy<Value = Matrix> {
    (field(), 1usize..6, 1usize..8, any::<u64>())
        .prop_map(|(f, r, c, seed)| Matrix::random(f, r, c, &mut ChaCha8Rng::seed_from_u64(seed)))
}

fn permutation() -> impl Strategy<Value = Vec<usize>> {
    (1usize..12).prop_flat_map(|n| Just((0..n).collect::<Vec<_>>()).prop_shuffle())
}

/// Lists with distinct values per entry, drawn from `0..7`, one tag column.
fn tagged_list(width: usize) -> impl Strategy<Value = TaggedList> {
    let entry = (Just((0..7 as Elem).collect::<Vec<_>>()).prop_shuffle(), 0..4 as Elem);
    prop::collection::vec(entry, 0..40).prop_map(move |rows| {
        let mut l = TaggedList::new(width, 1);
        for (vals, tag) in rows {
            l.push(&vals[..width], &[tag]);
        }
        l.sort();
        l
    })
}

proptest! {
    #[test]
    fn field_inverse_and_distributivity(f in field(), a in any::<u64>(), b in any::<u64>(), c in any::<u64>()) {
        let (a, b, c) = (f.elem(a), f.elem(b), f.elem(c));
        if a != 0 {
            prop_assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
        }
        prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
        prop_assert_eq!(f.add(f.sub(a, b), b), a);
    }

    #[test]
    fn echelon_is_reduced_and_spans_the_same_rows(m in matrix()) {
        let (red, pivots) = m.echelon();
        let rank = pivots.len();
        for (i, &p) in pivots.iter().enumerate() {
            for r in 0..m.rows() {
                prop_assert_eq!(red.get(r, p), (r == i) as Elem);
            }
            prop_assert!(red.row(i)[..p].iter().all(|&x| x == 0));
        }
        for r in rank..m.rows() {
            prop_assert!(red.row(r).iter().all(|&x| x == 0));
        }
        if rank > 0 {
            let basis = red.select_rows(&(0..rank).collect::<Vec<_>>());
            prop_assert!(Matrix::solve_row_combination(&m, &basis).is_ok());
        }
    }

    #[test]
    fn kernel_basis_is_a_kernel(m in matrix()) {
        let k = m.kernel_basis();
        prop_assert_eq!(k.rows(), m.cols() - m.rank());
        for r in 0..k.rows() {
            prop_assert!(m.syndrome(k.row(r)).iter().all(|&x| x == 0));
        }
        prop_assert_eq!(k.rank(), k.rows());
    }

    #[test]
    fn permutation_inverse_undoes_apply(map in permutation()) {
        let p = Permutation::new(map.clone()).unwrap();
        let data: Vec<usize> = (100..100 + map.len()).collect();
        prop_assert_eq!(p.inverse().apply(&p.apply(&data)), data);
        let one = p.to_one_based();
        prop_assert_eq!(Permutation::from_one_based(&one).unwrap(), p);
    }

    #[test]
    fn merge_equals_quadratic_join(a in tagged_list(2), b in tagged_list(3)) {
        let got: Vec<Vec<Elem>> = merge(&a, &b, "merge", usize::MAX)
            .unwrap()
            .iter()
            .map(|(v, _)| v.to_vec())
            .collect();
        let mut want = Vec::new();
        for (va, ta) in a.iter() {
            for (vb, tb) in b.iter() {
                if ta == tb && va.iter().all(|x| !vb.contains(x)) {
                    want.push([va, vb].concat());
                }
            }
        }
        want.sort();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn instance_text_round_trip(q in prop::sample::select(&[11u64, 13, 251][..]), n in 4usize..11, seed in any::<u64>()) {
        let f = PrimeField::new(q).unwrap();
        let m = n / 3;
        let inst = generate_instance(f, n, m, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let text = inst.to_text();
        let back = PkpInstance::from_text(&text).unwrap();
        prop_assert_eq!(back.to_text(), text);
        prop_assert!(verify(&back, back.planted().unwrap()).unwrap());
    }

    #[test]
    fn log2_sum_is_between_max_and_max_plus_log_count(terms in prop::collection::vec(-50.0f64..200.0, 1..10)) {
        let s = log2_sum(&terms);
        let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(s >= max - 1e-9);
        prop_assert!(s <= max + (terms.len() as f64).log2() + 1e-9);
    }

    #[test]
    fn filtered_total_dominates_each_stage(d in 1usize..3, w1 in 1usize..8, w2 in 1usize..8, l in 2usize..8) {
        let (n, m, q) = (40, 20, 251);
        if let Ok(params) = FilteredParams::new(n, m, d, w1, w2, l) {
            if let Ok(c) = cost_filtered(n, m, q, &params) {
                let parts = [c.t_isd, c.t_k, c.t_l, c.t_final];
                let max = parts.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                prop_assert!(c.total >= max - 1e-9);
                prop_assert!(c.total <= max + 2.0 + 1e-9);
            }
        }
    }
}
