// Copyright contributors to the weakrot project
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


use proptest::prelude::*;

use weakrot::angles::{branch_ensemble, canonical_angle, logical_angle, physical_angle_for_branch};
use weakrot::codes::{build_steane, compute_logicals};
use weakrot::estimate::{build_benchmark, default_table, estimate, Architecture};
use weakrot::oracle::{verify_partition, VerifyOptions};
use weakrot::partition::partition_z;
use weakrot::rus::{diamond_distance_zmix, dilution_weight, optimal_mixture, run_rus, RusConfig};
use weakrot::{BitMatrix, BitVec, PauliOp};

fn bitvec(len: usize) -> impl Strategy<Value = BitVec> {
    prop::collection::vec(any::<bool>(), len).prop_map(|b| BitVec::from_bools(&b))
}

fn pauli(n: usize) -> impl Strategy<Value = PauliOp> {
    (bitvec(n), bitvec(n), 0u8..4).prop_map(|(x, z, ph)| PauliOp::from_parts(x, z, ph).unwrap())
}

fn matrix() -> impl Strategy<Value = BitMatrix> {
    (1usize..8, 1usize..10).prop_flat_map(|(r, c)| {
        prop::collection::vec(bitvec(c), r).prop_map(move |rows| BitMatrix::from_rows(c, rows))
    })
}

proptest! {
    #[test]
    fn rank_is_transpose_invariant(m in matrix()) {
        prop_assert_eq!(m.rank(), m.transpose().rank());
    }

    #[test]
    fn kernel_is_annihilated(m in matrix()) {
        let k = m.kernel();
        prop_assert_eq!(k.len(), m.num_cols() - m.rank());
        for v in &k {
            prop_assert!(m.mul_vec(v).is_zero());
        }
    }

    #[test]
    fn pauli_product_is_associative((a, b, c) in (pauli(6), pauli(6), pauli(6))) {
        prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
    }

    #[test]
    fn pauli_commutation((a, b) in (pauli(7), pauli(7))) {
        prop_assert_eq!(a.commutes(&b), b.commutes(&a));
        let ab = a.mul(&b);
        let ba = b.mul(&a);
        prop_assert_eq!(a.commutes(&b), ab == ba);
        prop_assert!(a.mul(&a.inverse()).is_identity_up_to_phase());
        prop_assert_eq!(a.mul(&a.inverse()).phase(), 0);
    }

    #[test]
    fn pauli_text_round_trip(a in pauli(9)) {
        let back: PauliOp = a.to_string().parse().unwrap();
        prop_assert_eq!(back, a);
    }

    #[test]
    fn ensembles_are_normalized(half in 0usize..=10, theta in -1.6f64..1.6) {
        let e = branch_ensemble(2 * half + 1, theta).unwrap();
        prop_assert!((e.total_probability() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn inversion_round_trip(half in 0usize..=10, pick in 0usize..=10, beta in -1.5f64..1.5) {
        let m = 2 * half + 1;
        let chi = pick.min(half);
        let theta = physical_angle_for_branch(m, chi, beta).unwrap();
        prop_assert!(canonical_angle(logical_angle(m, chi, theta) - beta).abs() < 1e-12);
    }

    #[test]
    fn diamond_anchors(t in -1.5f64..1.5) {
        prop_assert!((diamond_distance_zmix(&[(1.0, t)], 0.0).unwrap() - t.sin().abs()).abs() < 1e-12);
        let sym = diamond_distance_zmix(&[(0.5, t), (0.5, -t)], 0.0).unwrap();
        prop_assert!((sym - t.sin().powi(2)).abs() < 1e-12);
    }

    #[test]
    fn mixture_is_second_order(a in 1e-4f64..0.5, b in 1e-4f64..0.5) {
        let (p, d) = optimal_mixture(a, -b).unwrap();
        prop_assert!((0.0..=1.0).contains(&p));
        prop_assert!(d <= a.max(b).powi(2));
    }

    #[test]
    fn dilution_weight_is_a_probability(t in 1e-4f64..0.1, extra in 0.0f64..0.5) {
        let q = dilution_weight(t, t + extra);
        prop_assert!((0.0..=1.0).contains(&q));
    }

    #[test]
    fn estimates_grow_with_repeats(r in 1u64..200, arch in 0usize..4) {
        let a = Architecture::ALL[arch];
        let t = default_table(a);
        let lo = estimate(&build_benchmark(12, 0.003, r).unwrap(), &t, a.default_policy()).unwrap();
        let hi = estimate(&build_benchmark(12, 0.003, r + 1).unwrap(), &t, a.default_policy()).unwrap();
        prop_assert!(hi.tau > lo.tau && hi.volume > lo.volume && hi.p_tot > lo.p_tot);
        prop_assert_eq!(lo.p_tot, lo.errors.total());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn oracle_matches_closed_form(theta in -1.5f64..1.5) {
        let c = build_steane();
        let l = compute_logicals(&c).unwrap();
        let p = partition_z(&c, &l, &BitVec::from_indices(1, &[0]), 3, theta).unwrap();
        let r = verify_partition(&c, &l, &p, &VerifyOptions::default()).unwrap();
        prop_assert!(r.weak_transversal);
        let e = branch_ensemble(3, theta).unwrap();
        for b in &e.branches {
            let got: f64 = r
                .branches
                .iter()
                .filter(|x| canonical_angle(x.angle - b.logical_angle).abs() < 1e-9)
                .map(|x| x.probability)
                .sum();
            // Branches with coinciding angles cannot be told apart here.
            if e.branches.iter().filter(|o| canonical_angle(o.logical_angle - b.logical_angle).abs() < 1e-9).count() == 1 {
                prop_assert!((got - b.probability).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn rus_mass_is_conserved(target in 0.001f64..0.3, p in 0.0f64..1e-3, iters in 1usize..10) {
        let cfg = RusConfig { m: 3, target_angle: target, p_phys: p, max_iterations: iters, ..RusConfig::default() };
        let out = run_rus(&cfg).unwrap();
        let last = out.per_iteration.last().unwrap();
        let total = out.success_probability + last.live_mass + out.discarded_mass;
        prop_assert!((total - 1.0).abs() < 1e-9, "total {}", total);
        prop_assert!(out.diamond_distance >= 0.0 && out.diamond_distance <= 1.0);
    }
}
