mod common;

use afkit::bratteli::{
    af_sequence_of_diagram, certificate_of_diagram, diagram_of_af_sequence, gen_car, path_matrix, supernatural_prefix,
    telescope, LabeledBratteliDiagram, TelescopeSpec,
};
use afkit::dimgroup::{
    af_of_certificate, certificate_of_af, eq_at_depth, positive_at_depth, shen_factor, DimCertificate, LimitElement,
    LimitHom, Verdict3,
};
use afkit::elliott::{build_zigzag, realize_zigzag, verify_zigzag, ZigzagOptions};
use afkit::findim::{compose_hom, dim, hom_from_matrix, k0, k0_hom, FinDimAlgebra};
use afkit::ordgrp::{compose, convex_basis, convex_member, is_order_unit, restrict_to_convex, IntVector, PosMatrix};
use afkit::perturb::moduli::{self, Rat};
use afkit::perturb::numeric::{canonical_matrix_units, defect};
use common::*;
use num_bigint::BigInt;
use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::Rng;

fn vector(len: usize, lo: i64, hi: i64) -> impl Strategy<Value = IntVector> {
    prop::collection::vec(lo..=hi, len).prop_map(|xs| IntVector::from_i64s(&xs))
}

fn matrix(rows: usize, cols: usize, hi: i64) -> impl Strategy<Value = PosMatrix> {
    prop::collection::vec(prop::collection::vec(0..=hi, cols), rows).prop_map(move |rs| {
        let rows: Vec<Vec<BigInt>> = rs.into_iter().map(|r| r.into_iter().map(BigInt::from).collect()).collect();
        PosMatrix::from_rows(rows, cols).unwrap()
    })
}

fn chain3() -> impl Strategy<Value = (PosMatrix, PosMatrix, PosMatrix)> {
    (1usize..=4, 1usize..=4, 1usize..=4, 1usize..=4)
        .prop_flat_map(|(a, b, c, d)| (matrix(b, a, 3), matrix(c, b, 3), matrix(d, c, 3)))
}

fn same_len_pair(len: usize) -> impl Strategy<Value = (IntVector, IntVector, IntVector)> {
    (vector(len, -3, 3), vector(len, 0, 3), vector(len, 0, 3))
}

fn seeded_unital_cert(seed: u64, depth: usize) -> DimCertificate {
    let mut r = rng(seed);
    let ranks: Vec<usize> = (0..=depth).map(|_| r.random_range(1..=3)).collect();
    let bonds: Vec<PosMatrix> = (0..depth)
        .map(|k| {
            let rows = (0..ranks[k + 1])
                .map(|_| {
                    let mut row: Vec<BigInt> = (0..ranks[k]).map(|_| big(r.random_range(0..=2))).collect();
                    if row.iter().all(Zero::is_zero) {
                        row[r.random_range(0..ranks[k])] = big(1);
                    }
                    row
                })
                .collect();
            PosMatrix::from_rows(rows, ranks[k]).unwrap()
        })
        .collect();
    let u0 = IntVector::new((0..ranks[0]).map(|_| big(r.random_range(1..=3))).collect());
    DimCertificate::from_bonds_with_unit(u0, bonds).unwrap()
}

fn sort_perm(u: &IntVector) -> Vec<usize> {
    let mut p: Vec<usize> = (0..u.len()).collect();
    p.sort_by(|&a, &b| u[a].cmp(&u[b]));
    p
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 128, ..ProptestConfig::default() })]

    #[test]
    fn compose_is_associative_with_identities((f, g, h) in chain3()) {
        let left = compose(&h, &compose(&g, &f).unwrap()).unwrap();
        let right = compose(&compose(&h, &g).unwrap(), &f).unwrap();
        prop_assert_eq!(&left, &right);
        prop_assert_eq!(&compose(&PosMatrix::identity(f.rows()), &f).unwrap(), &f);
        prop_assert_eq!(&compose(&f, &PosMatrix::identity(f.cols())).unwrap(), &f);
    }

    #[test]
    fn convex_subgroups_are_convex((x, g, g2) in (1usize..=4).prop_flat_map(same_len_pair), t in 0.0f64..1.0) {
        if convex_member(&g, &x).unwrap() && convex_member(&g2, &x).unwrap() {
            let sum = g.checked_add(&g2).unwrap();
            prop_assert!(convex_member(&sum, &x).unwrap());
        }
        // Every h between g and g2 generates a subgroup containing the one generated by g.
        if g.le(&g2) {
            let h: Vec<BigInt> = g.entries().iter().zip(g2.entries())
                .map(|(a, b)| a + BigInt::from(((b - a).to_string().parse::<f64>().unwrap() * t) as i64))
                .collect();
            let h = IntVector::new(h);
            prop_assert!(g.le(&h) && h.le(&g2));
            if convex_member(&g, &x).unwrap() {
                prop_assert!(convex_member(&h, &x).unwrap());
            }
        }
    }

    #[test]
    fn full_convex_basis_means_order_unit(u in (1usize..=5).prop_flat_map(|n| vector(n, 0, 3))) {
        if convex_basis(&u).len() == u.len() {
            prop_assert!(is_order_unit(&u));
        }
        let sub = convex_basis(&u);
        if !sub.is_empty() {
            let id = restrict_to_convex(&PosMatrix::identity(u.len()), &u, &u).unwrap();
            prop_assert_eq!(id, PosMatrix::identity(sub.len()));
        }
    }

    #[test]
    fn k0_is_a_functor(seed in any::<u64>()) {
        let mut r = rng(seed);
        let fs: Vec<FinDimAlgebra> = (0..3).map(|_| random_algebra(&mut r, 4, 5)).collect();
        let f = random_hom(&mut r, &fs[0], &fs[1], 3);
        let g = random_hom(&mut r, &fs[1], &fs[2], 3);
        let gf = compose_hom(&g, &f).unwrap();
        prop_assert_eq!(k0_hom(&gf), compose(&k0_hom(&g), &k0_hom(&f)).unwrap());
        prop_assert_eq!(&hom_from_matrix(f.source(), f.target(), k0_hom(&f)).unwrap(), &f);
        let squares: BigInt = k0(&fs[0]).unit().unwrap().entries().iter().map(|n| n * n).sum();
        prop_assert_eq!(dim(&fs[0]), squares);
        let h = random_unital_hom(&mut r, &fs[0], 3, 2);
        prop_assert_eq!(k0_hom(&h).apply(&fs[0].size_vector()).unwrap(), h.target().size_vector());
    }

    #[test]
    fn path_matrices_compose(seed in any::<u64>()) {
        let d = random_diagram(&mut rng(seed), 5, 4, 3);
        for a in 0..=d.depth() {
            for b in a..=d.depth() {
                for c in b..=d.depth() {
                    let via = compose(&path_matrix(&d, b, c).unwrap(), &path_matrix(&d, a, b).unwrap()).unwrap();
                    prop_assert_eq!(path_matrix(&d, a, c).unwrap(), via);
                }
            }
        }
    }

    #[test]
    fn unital_diagrams_conserve_labels(seed in any::<u64>(), depth in 0usize..=6) {
        let seq = random_unital_af(&mut rng(seed), depth);
        let d = diagram_of_af_sequence(&seq).unwrap();
        for (k, e) in d.edges().iter().enumerate() {
            let inflow = e.apply(&IntVector::new(d.levels()[k].clone())).unwrap();
            prop_assert_eq!(inflow.entries(), &d.levels()[k + 1][..]);
        }
        prop_assert_eq!(af_sequence_of_diagram(&d).unwrap(), seq);
    }

    #[test]
    fn telescoping_keeps_labels_and_prefix(seed in any::<u64>()) {
        let mut r = rng(seed);
        let depth = r.random_range(1..=8);
        let mults: Vec<i64> = (0..depth).map(|_| r.random_range(1..=12)).collect();
        let mut levels = vec![vec![BigInt::one()]];
        for &m in &mults {
            let next = &levels.last().unwrap()[0] * m;
            levels.push(vec![next]);
        }
        let edges = mults.iter().map(|&m| PosMatrix::from_i64s(&[&[m]])).collect();
        let d = LabeledBratteliDiagram::new(levels, edges, true).unwrap();
        let mut stages = vec![0];
        stages.extend((1..=depth).filter(|_| r.random_bool(0.5)));
        let spec = TelescopeSpec::new(stages).unwrap();
        let t = telescope(&d, &spec).unwrap();
        for (j, &s) in spec.stages().iter().enumerate() {
            prop_assert_eq!(&t.levels()[j], &d.levels()[s]);
        }
        prop_assert_eq!(supernatural_prefix(&t).unwrap(), supernatural_prefix(&d.truncate(spec.last())).unwrap());
    }

    #[test]
    fn certificates_round_trip_up_to_sorting(seed in any::<u64>(), depth in 0usize..=5) {
        let c = seeded_unital_cert(seed, depth);
        let back = certificate_of_af(&af_of_certificate(&c).unwrap()).unwrap();
        for s in 0..=depth {
            let u = c.unit(s).unwrap();
            prop_assert_eq!(back.unit(s).unwrap(), &u.select(&sort_perm(u)));
        }
        for s in 0..depth {
            let (p, q) = (sort_perm(c.unit(s).unwrap()), sort_perm(c.unit(s + 1).unwrap()));
            prop_assert_eq!(&back.bonds()[s], &c.bonds()[s].select(&q, &p));
        }
        // Sorted units come back verbatim.
        prop_assert_eq!(certificate_of_af(&af_of_certificate(&back).unwrap()).unwrap(), back);
    }

    #[test]
    fn equality_at_depth_behaves(seed in any::<u64>(), depth in 1usize..=5) {
        let c = seeded_unital_cert(seed, depth);
        let mut r = rng(seed ^ 0x5eed);
        let s = r.random_range(0..=depth);
        let a = LimitElement::new(s, IntVector::new((0..c.rank(s)).map(|_| big(r.random_range(-2..=2))).collect()));
        let t = r.random_range(0..=depth);
        let b = LimitElement::new(t, IntVector::new((0..c.rank(t)).map(|_| big(r.random_range(-2..=2))).collect()));
        prop_assert!(eq_at_depth(&c, &a, &a).unwrap().is_yes());
        let ab = eq_at_depth(&c, &a, &b).unwrap();
        prop_assert_eq!(ab, eq_at_depth(&c, &b, &a).unwrap());
        let never_no = !matches!(ab, Verdict3::No { .. });
        prop_assert!(never_no);
        if let Verdict3::Yes { stage } = ab {
            for d2 in stage..=depth {
                let short = c.telescope(&(0..=d2).collect::<Vec<_>>()).unwrap();
                prop_assert_eq!(eq_at_depth(&short, &a, &b).unwrap(), Verdict3::Yes { stage });
            }
        }
        let neg = LimitElement::new(s, -&a.vector);
        if let (Verdict3::Yes { stage: p }, Verdict3::Yes { stage: q }) =
            (positive_at_depth(&c, &a).unwrap(), positive_at_depth(&c, &neg).unwrap())
        {
            let zero = LimitElement::new(s, IntVector::zeros(c.rank(s)));
            match eq_at_depth(&c, &a, &zero).unwrap() {
                Verdict3::Yes { stage } => prop_assert!(stage <= p.max(q)),
                other => prop_assert!(false, "{other:?}"),
            }
        }
    }

    #[test]
    fn shen_factor_identity(seed in any::<u64>()) {
        let c = seeded_unital_cert(seed, 4);
        let mut r = rng(seed.rotate_left(7));
        let s = r.random_range(0..=2);
        let n = r.random_range(1..=3);
        let rows: Vec<Vec<BigInt>> = (0..c.rank(s)).map(|_| (0..n).map(|_| big(r.random_range(0..=2))).collect()).collect();
        let theta = PosMatrix::from_rows(rows, n).unwrap();
        // alpha sits in the kernel of theta itself whenever two columns agree.
        let mut alpha = vec![BigInt::zero(); n];
        if n >= 2 && (0..theta.rows()).all(|i| theta.get(i, 0) == theta.get(i, 1)) {
            alpha[0] = big(1);
            alpha[1] = big(-1);
        }
        let alpha = IntVector::new(alpha);
        let f = shen_factor(&c, &LimitHom::positive(s, theta.clone()), &alpha).unwrap();
        prop_assert!(f.phi.apply(&alpha).unwrap().is_zero());
        let t = f.theta_prime.stage;
        let expected = compose(&c.bond_product(s, t).unwrap(), &theta).unwrap();
        prop_assert_eq!(compose(&PosMatrix::identity(c.rank(t)), &f.phi).unwrap(), expected);
    }

    #[test]
    fn zigzags_verify_swap_and_realize(seed in any::<u64>()) {
        let mut r = rng(seed);
        let car = gen_car(10);
        let pick = |r: &mut rand_chacha::ChaCha8Rng| {
            let mut st = vec![0];
            st.extend((1..=10).filter(|_| r.random_bool(0.6)));
            TelescopeSpec::new(st).unwrap()
        };
        let (sa, sb) = (pick(&mut r), pick(&mut r));
        let a = certificate_of_diagram(&telescope(&car, &sa).unwrap()).unwrap();
        let b = certificate_of_diagram(&telescope(&car, &sb).unwrap()).unwrap();
        if let Ok(w) = build_zigzag(&a, &b, &ZigzagOptions::rounds(1)) {
            prop_assert!(verify_zigzag(&w, &a, &b).is_ok());
            prop_assert!(verify_zigzag(&w.swap(), &b, &a).is_ok());
            let real = realize_zigzag(&w, &a, &b).unwrap();
            for s in 0..real.tau.len() {
                let f = compose_hom(&real.tau[s], &real.sigma[s]).unwrap();
                let want = a.bond_product(w.n_stages[s], w.n_stages[s + 1]).unwrap();
                prop_assert_eq!(f.mult(), &want);
            }
            // Any change to an entry breaks an identity.
            let mut bad = w.clone();
            let m = &bad.alpha[0];
            let mut rows: Vec<Vec<BigInt>> = (0..m.rows()).map(|i| m.row(i).to_vec()).collect();
            rows[0][0] += 1;
            bad.alpha[0] = PosMatrix::from_rows(rows, m.cols()).unwrap();
            prop_assert!(verify_zigzag(&bad, &a, &b).is_err());
        }
    }
}

#[test]
fn delta_values_lie_in_unit_interval_and_decrease() {
    for e in [(1, 2), (1, 4), (1, 8)] {
        let eps = Rat::new(big(e.0), big(e.1));
        let mut prev: Option<[Rat; 3]> = None;
        for n in 1..=10 {
            let cur = [
                moduli::delta0(&eps, n).unwrap(),
                moduli::delta1(&eps, n).unwrap(),
                moduli::delta2(&eps, n).unwrap(),
            ];
            for v in &cur {
                assert!(v > &Rat::zero() && v <= &Rat::one(), "eps={e:?} n={n}");
            }
            if let Some(p) = &prev {
                for i in 0..3 {
                    assert!(cur[i] <= p[i], "delta{i} increased at eps={e:?} n={n}");
                }
            }
            prev = Some(cur);
        }
    }
}

/// Every F with `dim F <= max`, as nonincreasing summand lists.
fn algebras_up_to(max: usize) -> Vec<Vec<usize>> {
    fn go(rem: usize, cap: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if !cur.is_empty() {
            out.push(cur.clone());
        }
        for n in (1..=cap).rev() {
            if n * n <= rem {
                cur.push(n);
                go(rem - n * n, n, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(max, max, &mut Vec::new(), &mut out);
    out
}

#[test]
fn canonical_units_have_no_defect() {
    let small = algebras_up_to(24);
    assert_eq!(algebras_up_to(2), vec![vec![1], vec![1, 1]]);
    let large: Vec<Vec<usize>> = vec![vec![8], vec![4, 4, 4, 4], vec![7, 3, 2, 1, 1], vec![5, 5, 3, 2, 1], vec![2; 16], vec![1; 64]];
    for sizes in small.iter().chain(&large) {
        assert!(sizes.iter().map(|n| n * n).sum::<usize>() <= 64);
        let d = defect(&canonical_matrix_units(sizes));
        assert!(d <= 1e-12, "F = {sizes:?}: defect {d}");
    }
}
