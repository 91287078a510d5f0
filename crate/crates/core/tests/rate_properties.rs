use lossprop::rates::{
    duan_bond, duan_effective_xz, odd_parity_closed_form, odd_parity_prob, parity_reencode_error, tree_general,
    DuanParams, ErrorModel, ParityParams, TiePolicy, TreeParams, VotePolicy,
};
use proptest::prelude::*;

fn in_unit(x: f64) -> bool {
    (0.0..=1.0).contains(&x)
}

fn shape() -> impl Strategy<Value = TreeParams> {
    prop::collection::vec(1usize..=4, 1..=4).prop_map(|b| TreeParams::new(b).unwrap())
}

fn policy() -> impl Strategy<Value = VotePolicy> {
    (any::<bool>(), 0u8..3, any::<bool>()).prop_map(|(voting, t, prefer)| VotePolicy {
        voting,
        tie: [TiePolicy::Abstain, TiePolicy::CoinFlip, TiePolicy::Error][t as usize],
        prefer_indirect: prefer,
    })
}

#[test]
fn odd_parity_forms_agree_on_the_full_grid() {
    let mut worst = 0.0f64;
    for p in [0.0, 1e-4, 1e-3, 0.1, 0.5, 1.0] {
        for n in (1..=10_000).step_by(7).chain([10_000]) {
            worst = worst.max((odd_parity_prob(n, p) - odd_parity_closed_form(n, p)).abs());
        }
    }
    assert!(worst <= 1e-12, "worst deviation {worst:e}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn tree_outputs_are_probabilities(t in shape(), pl in 0.0..=1.0f64, pe in 0.0..=1.0f64, pol in policy()) {
        let r = tree_general(&t, pl, pe, &pol).unwrap();
        prop_assert!(in_unit(r.effective_loss) && in_unit(r.effective_error) && in_unit(r.joint_error));
        prop_assert!(r.joint_error <= r.effective_error + 1e-15);
    }

    #[test]
    fn tree_without_measurement_errors_is_exact(t in shape(), pl in 0.0..=1.0f64, pol in policy()) {
        prop_assert_eq!(tree_general(&t, pl, 0.0, &pol).unwrap().effective_error, 0.0);
    }

    #[test]
    fn odd_parity_grows_up_to_one_half(n in 1u64..2000, a in 0.0..=0.5f64, b in 0.0..=0.5f64) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        // equal up to rounding once both sit at one half
        prop_assert!(odd_parity_prob(n, lo) <= odd_parity_prob(n, hi) + 1e-13);
    }

    #[test]
    fn parity_error_grows_with_flip_rate(n in 1u64..=10, q in 1u64..=10, a in 0.0..=0.5f64, b in 0.0..=0.5f64) {
        let params = ParityParams::new(n, q).unwrap();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let (x, y) = (parity_reencode_error(lo, &params).unwrap(), parity_reencode_error(hi, &params).unwrap());
        prop_assert!(in_unit(x) && x <= y);
    }

    #[test]
    fn bonding_rates_are_monotone(
        n_l in 1usize..=16,
        g in 0.05..=1.0f64,
        g2 in 0.05..=1.0f64,
        a in 0.0..=0.5f64,
        b in 0.0..=0.5f64,
    ) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let params = DuanParams::new(g, n_l).unwrap();
        let x = duan_bond(&params, &ErrorModel::depolarizing(lo).unwrap());
        let y = duan_bond(&params, &ErrorModel::depolarizing(hi).unwrap());
        prop_assert!(in_unit(x.effective_error) && in_unit(x.effective_loss));
        prop_assert!(x.effective_error <= y.effective_error + 1e-15);
        prop_assert!(x.joint_error <= y.joint_error + 1e-15);
        // loss grows as the gate failure probability grows
        let (g_lo, g_hi) = if g <= g2 { (g, g2) } else { (g2, g) };
        let m = ErrorModel::depolarizing(lo).unwrap();
        let worse = duan_bond(&DuanParams::new(g_lo, n_l).unwrap(), &m);
        let better = duan_bond(&DuanParams::new(g_hi, n_l).unwrap(), &m);
        prop_assert!(better.effective_loss <= worse.effective_loss + 1e-15);
    }

    #[test]
    fn symmetric_split_gives_equal_rates(p in 0.0..=1.0f64, half in 0u64..200) {
        let (x, z) = duan_effective_xz(p, p, 2 * half).unwrap();
        prop_assert_eq!(x, z);
    }
}

#[test]
fn lossless_tree_reads_every_child_directly() {
    // with nothing lost, the first branch decides: its X read and its b_2
    // direct Z reads give odd parity over b_2 + 1 outcomes
    for b in [vec![3, 3], vec![2, 5], vec![4, 1, 2]] {
        let t = TreeParams::new(b.clone()).unwrap();
        let r = tree_general(&t, 0.0, 1e-2, &VotePolicy::first_success()).unwrap();
        assert_eq!(r.effective_loss, 0.0);
        assert!((r.effective_error - odd_parity_prob(b[1] as u64 + 1, 1e-2)).abs() < 1e-15, "{b:?}");
    }
}
