//! Property tests for the normalization, lattice and rank invariants.

use proptest::prelude::*;
use std::collections::BTreeSet;

use veerbs::datasets;
use veerbs::dynamic::ChainComplexF2;
use veerbs::grading::{h1m_class, CycleVector, H1Context};
use veerbs::homology::{f2_rank, homology_dim, F2Matrix};
use veerbs::model::Side;
use veerbs::states::{enumerate_states, state_multiloop, Loop, MultiLoop};
use veerbs::sweep::{strum, sweep_class, unstrum, unstrum_sites};

/// A pseudo-random member of a figure-eight sweep class, driven by seeds.
fn class_member(state_idx: usize, walk: &[u8]) -> (veerbs::VeeringComplex, MultiLoop) {
    let cx = datasets::fig8();
    let states = enumerate_states(&cx);
    let st = &states[state_idx % states.len()];
    let mut m = state_multiloop(&cx, st).unwrap();
    for &step in walk {
        let sites = m.diagonal_sites();
        let unsites = unstrum_sites(&cx, &m);
        let total = sites.len() + unsites.len();
        if total == 0 {
            break;
        }
        let k = step as usize % total;
        m = if k < sites.len() {
            let side = if step & 0x80 == 0 {
                Side::Left
            } else {
                Side::Right
            };
            strum(&cx, &m, sites[k], side).unwrap()
        } else {
            unstrum(&cx, &m, unsites[k - sites.len()]).unwrap()
        };
    }
    (cx, m)
}

proptest! {
    /// Normalization is invariant under rotating loops and reordering them.
    #[test]
    fn normalization_ignores_rotation_and_order(
        state_idx in 0usize..10,
        walk in proptest::collection::vec(any::<u8>(), 0..6),
        rot in any::<usize>(),
        rev in any::<bool>(),
    ) {
        let (_, m) = class_member(state_idx, &walk);
        let mut loops: Vec<Loop> = m
            .loops()
            .iter()
            .map(|l| {
                let n = l.len();
                let r = rot % n;
                Loop::new((0..n).map(|i| l.edges()[(i + r) % n]).collect())
            })
            .collect();
        if rev {
            loops.reverse();
        }
        prop_assert_eq!(MultiLoop::new(loops), m);
    }

    /// Strums and unstrums are mutually inverse at the created sites, and
    /// the whole class agrees wherever we start.
    #[test]
    fn strum_unstrum_round_trip(
        state_idx in 0usize..10,
        walk in proptest::collection::vec(any::<u8>(), 0..5),
        side in any::<bool>(),
    ) {
        let (cx, m) = class_member(state_idx, &walk);
        let side = if side { Side::Right } else { Side::Left };
        for site in m.diagonal_sites() {
            let s = strum(&cx, &m, site, side).unwrap();
            let back: BTreeSet<MultiLoop> = unstrum_sites(&cx, &s)
                .into_iter()
                .map(|u| unstrum(&cx, &s, u).unwrap())
                .collect();
            prop_assert!(back.contains(&m));
        }
        let class = sweep_class(&cx, &m, 100_000).unwrap();
        for member in class.members.iter().take(3) {
            let again = sweep_class(&cx, member, 100_000).unwrap();
            prop_assert_eq!(&again.members, &class.members);
        }
    }

    /// The quotient class map is additive.
    #[test]
    fn h1m_class_is_additive(
        coeffs_a in proptest::collection::vec(-3i64..=3, 3),
        coeffs_b in proptest::collection::vec(-3i64..=3, 3),
    ) {
        let cx = datasets::fig8();
        let ctx = H1Context::new(&cx);
        // Boundary-zero vectors from the fundamental cycles e1-e0, e0+e2, e0+e3.
        let cycles: [Vec<i64>; 3] = [vec![-1, 1, 0, 0], vec![1, 0, 1, 0], vec![1, 0, 0, 1]];
        let mk = |coef: &[i64]| {
            let mut v = vec![0i64; 4];
            for (c, cy) in coef.iter().zip(&cycles) {
                for (x, y) in v.iter_mut().zip(cy) {
                    *x += c * y;
                }
            }
            CycleVector(v)
        };
        let a = mk(&coeffs_a);
        let b = mk(&coeffs_b);
        let sum = CycleVector(a.0.iter().zip(&b.0).map(|(x, y)| x + y).collect());
        let ca = h1m_class(&ctx, &a).0;
        let cb = h1m_class(&ctx, &b).0;
        let added: Vec<i64> = ca.iter().zip(&cb).map(|(x, y)| x + y).collect();
        prop_assert_eq!(ctx.reduce(added), h1m_class(&ctx, &sum));
    }

    /// Rank is invariant under simultaneous row/column permutation, and so
    /// is the homology dimension of a complex.
    #[test]
    fn rank_and_homology_survive_basis_reorder(
        n in 1usize..8,
        entries in proptest::collection::vec(any::<bool>(), 64),
        perm_seed in any::<u64>(),
    ) {
        let mut m = F2Matrix::zero(n, n);
        for r in 0..n {
            for c in 0..n {
                if entries[r * 8 + c] {
                    m.set(r, c, true);
                }
            }
        }
        let mut perm: Vec<usize> = (0..n).collect();
        let mut s = perm_seed;
        for i in (1..n).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (s >> 33) as usize % (i + 1));
        }
        let p = m.permuted(&perm);
        prop_assert_eq!(f2_rank(&m), f2_rank(&p));

        // Reuse a real square-zero boundary for the homology half.
        let cx = datasets::fig8();
        let class = sweep_class(
            &cx,
            &state_multiloop(&cx, &enumerate_states(&cx)[7]).unwrap(),
            100_000,
        )
        .unwrap();
        let cc = {
            let region_base = class.members.iter().find(|m| m.is_g_only()).unwrap();
            let region = veerbs::dynamic::build_dynamic_region(&cx, region_base, 100_000).unwrap();
            veerbs::dynamic::cc_complex(&cx, &region, &veerbs::dynamic::maximal_core(&region)).unwrap()
        };
        let k = cc.generators.len();
        let mut perm2: Vec<usize> = (0..k).collect();
        for i in (1..k).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm2.swap(i, (s >> 33) as usize % (i + 1));
        }
        let mut gens = vec![MultiLoop::empty(); k];
        for (i, g) in cc.generators.iter().enumerate() {
            gens[perm2[i]] = g.clone();
        }
        let shuffled = ChainComplexF2 {
            generators: gens,
            boundary: cc.boundary.permuted(&perm2),
        };
        prop_assert_eq!(homology_dim(&shuffled).unwrap(), homology_dim(&cc).unwrap());
    }
}
