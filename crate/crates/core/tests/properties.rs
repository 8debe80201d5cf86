use bjbench::betting::{run_path, scaling_check, BetStrategy};
use bjbench::cards::{hand_value, HandTotal, VALUES};
use bjbench::metrics::{cell_regret, gap_thresholds};
use bjbench::optim::{adam_step, entropy, AdamState, CurvePoint, CurveRecorder, LogitTable, PgConfig, SpsaConfig, TrainCurve};
use bjbench::sim::masked_softmax;
use bjbench::{solve, Action, ActionMask, CellSpace, OracleSolution, Rules};
use proptest::prelude::*;
use std::sync::OnceLock;

fn bench() -> &'static OracleSolution {
    static S: OnceLock<OracleSolution> = OnceLock::new();
    S.get_or_init(|| solve(&Rules::benchmark()).unwrap())
}

fn card() -> impl Strategy<Value = u8> {
    prop::sample::select(VALUES.to_vec())
}

fn mask() -> impl Strategy<Value = ActionMask> {
    (1u8..32).prop_map(|bits| {
        let acts: Vec<Action> = Action::ALL.iter().copied().filter(|a| bits >> a.index() & 1 == 1).collect();
        ActionMask::from_actions(&acts)
    })
}

proptest! {
    #[test]
    fn incremental_total_matches_card_list(cards in prop::collection::vec(card(), 1..8)) {
        let mut h = HandTotal::EMPTY;
        let mut seen = Vec::new();
        for &c in &cards {
            h = h.add(c);
            seen.push(c);
            let (t, s) = hand_value(&seen);
            prop_assert_eq!((h.total, h.soft), (t, s));
            if h.is_bust() { break; }
        }
    }

    #[test]
    fn softmax_respects_mask(logits in prop::array::uniform5(-30.0f64..30.0), m in mask()) {
        let p = masked_softmax(&logits, m).unwrap();
        let mut sum = 0.0;
        for (i, &x) in p.iter().enumerate() {
            if m.is_legal_index(i) { prop_assert!(x > 0.0); sum += x; } else { prop_assert_eq!(x, 0.0); }
        }
        prop_assert!((sum - 1.0).abs() < 1e-12);
        let h = entropy(&p);
        prop_assert!(h >= -1e-12 && h <= (m.count() as f64).ln() + 1e-12);
    }

    #[test]
    fn regret_nonnegative_and_zero_iff_match(choices in prop::collection::vec(0usize..5, 3640)) {
        let sol = bench();
        let space = sol.space();
        let policy: Vec<Action> = (0..space.len())
            .map(|i| {
                let legal: Vec<Action> = space.mask(i).iter().collect();
                legal[choices[i] % legal.len()]
            })
            .collect();
        let r = cell_regret(&policy, sol).unwrap();
        for i in 0..space.len() {
            prop_assert!(r.per_cell[i] >= 0.0);
            if policy[i] == sol.optimal_action[i] { prop_assert_eq!(r.per_cell[i], 0.0); }
        }
        prop_assert_eq!(r.mean_regret == 0.0, r.amr == 1.0);
        prop_assert!((0.0..=1.0).contains(&r.amr));
        let again = cell_regret(&policy, sol).unwrap();
        prop_assert_eq!(r, again);
    }

    #[test]
    fn thresholds_ordered(vals in prop::collection::vec(-1.0f64..0.1, 1..200), oracle in -0.1f64..0.0) {
        let curve = TrainCurve {
            window: 1,
            every: 1,
            points: vals.iter().enumerate().map(|(i, &v)| CurvePoint { hands: i as u64 + 1, smoothed_ev: v }).collect(),
        };
        let t = gap_thresholds(&curve, oracle).unwrap();
        if let (Some(a), Some(b)) = (t.threshold_95, t.threshold_99) { prop_assert!(b >= a); }
        if t.threshold_99.is_some() { prop_assert!(t.threshold_95.is_some()); }
    }

    #[test]
    fn curve_hands_strictly_increase(rets in prop::collection::vec(-2.0f64..2.0, 0..500), every in 1u64..20) {
        let mut r = CurveRecorder::new(37, every);
        for x in rets { r.push(x); }
        let c = r.finish();
        prop_assert!(c.points.windows(2).all(|w| w[0].hands < w[1].hands));
    }

    #[test]
    fn adam_keeps_params_finite(grads in prop::collection::vec(prop::array::uniform5(-1e6f64..1e6), 1..50)) {
        let mut theta = LogitTable::zeros(1);
        let mut st = AdamState::new(5);
        for g in &grads {
            adam_step(theta.as_mut_slice(), g, &mut st, 3e-3, 0.9, 0.999, 1e-8);
        }
        prop_assert!(theta.is_finite());
    }

    #[test]
    fn proportional_wager_never_below_minimum(w in -1e6f64..1e7, f in 0.0001f64..1.0) {
        let s = BetStrategy::proportional(f).unwrap();
        prop_assert!(s.wager(w) >= 1.0);
    }

    #[test]
    fn fixed_bet_scaling_identity(
        rets in prop::collection::vec(prop::sample::select(vec![-2.0, -1.0, -0.5, 0.0, 1.0, 1.5, 2.0]), 1..400),
        b in 1u32..20,
        w0 in 1u32..200,
        lambda in prop::sample::select(vec![2.0, 10.0]),
    ) {
        let c = scaling_check(f64::from(b), f64::from(w0) * 10.0, lambda, &rets).unwrap();
        prop_assert!(c.holds(), "{:?}", c);
    }

    #[test]
    fn ruin_counter_only_on_nonpositive(rets in prop::collection::vec(prop::sample::select(vec![-1.0, 1.0, 1.5]), 1..300)) {
        let s = BetStrategy::Fixed { amount: 5.0 };
        let t = run_path(&s, 20.0, true, &rets);
        let mut w = 20.0;
        let mut ruins = 0;
        for r in &rets {
            w += 5.0 * r;
            if w <= 0.0 { ruins += 1; w = 20.0; }
        }
        prop_assert_eq!(t.ruin_events, ruins);
        prop_assert!(t.final_bankroll > 0.0);
    }
}

#[test]
fn incremental_entropy_anneal() {
    let c = PgConfig::default();
    let mut lam = c.entropy_coef;
    for _ in 0..100_000 {
        lam *= c.entropy_anneal;
    }
    let want = c.entropy_coef_after(100_000);
    assert!((lam - want).abs() / want < 1e-9);
}

#[test]
fn spsa_schedule_exact() {
    let c = SpsaConfig::default();
    for k in [0u64, 1, 10, 7999] {
        assert_eq!(c.gain_a(k), 0.5 / (100.0 + k as f64 + 1.0).powf(0.602));
        assert_eq!(c.gain_c(k), 0.2 / (k as f64 + 1.0).powf(0.101));
    }
}

#[test]
fn every_cell_mask_nonempty_for_all_presets() {
    for v in bjbench::Variant::ALL {
        let s = CellSpace::new(v.rules());
        assert!(s.masks().iter().all(|m| m.count() >= 2));
    }
}
