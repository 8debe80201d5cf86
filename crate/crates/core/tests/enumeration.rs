use std::collections::HashSet;

use bjbench::cells::{enumerate_cells, legal_actions};
use bjbench::{Action, CellSpace, DecisionCell, Rules, Variant};

/// Brute-force every field combination and keep the structurally valid ones.
fn brute_force(rules: &Rules) -> HashSet<DecisionCell> {
    let mut out = HashSet::new();
    for depth in 0..8u8 {
        for upcard in 0..15u8 {
            for total in 0..25u8 {
                for soft in [false, true] {
                    for pair in std::iter::once(None).chain((0..15u8).map(Some)) {
                        for can_double in [false, true] {
                            for can_split in [false, true] {
                                let ok_basic = (2..=11).contains(&upcard)
                                    && (4..=21).contains(&total)
                                    && depth < rules.resplit_limit
                                    && (!soft || total >= 12);
                                let ok_pair = match pair {
                                    None => !can_split,
                                    Some(11) => total == 12 && soft,
                                    Some(r) => (2..=10).contains(&r) && total == 2 * r && !soft,
                                };
                                let ok_split = !can_split || depth + 1 < rules.resplit_limit;
                                if ok_basic && ok_pair && ok_split {
                                    out.insert(DecisionCell {
                                        total,
                                        upcard,
                                        soft,
                                        pair_rank: pair,
                                        can_double,
                                        can_split,
                                        depth,
                                    });
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

#[test]
fn enumeration_equals_brute_force_for_every_preset() {
    for v in Variant::ALL {
        let rules = v.rules();
        let listed = enumerate_cells(&rules);
        let set: HashSet<DecisionCell> = listed.iter().copied().collect();
        assert_eq!(set.len(), listed.len(), "{v:?} has duplicates");
        assert_eq!(set, brute_force(&rules), "{v:?}");
    }
}

#[test]
fn benchmark_space_size() {
    // 3 depths with split-eligible pair variants, one deepest level without.
    let per_upcard_split_levels = 18 * 2 + 10 * 2 + 10 * 2 * 2;
    let per_upcard_last = 18 * 2 + 10 * 2 + 10 * 2;
    let expected = 10 * (3 * per_upcard_split_levels + per_upcard_last);
    assert_eq!(expected, 3640);
    assert_eq!(CellSpace::new(Rules::benchmark()).len(), expected);
}

#[test]
fn split_cells_and_masks() {
    let rules = Rules::benchmark();
    let space = CellSpace::new(rules);
    let splittable = space.masks().iter().filter(|m| m.contains(Action::Split)).count();
    assert_eq!(splittable, 3 * 10 * 10 * 2);
    for (i, c) in space.cells().iter().enumerate() {
        let m = space.mask(i);
        assert_eq!(m, legal_actions(c, &rules));
        assert!(m.contains(Action::Stand) && m.contains(Action::Hit));
        assert_eq!(m.contains(Action::Double), c.can_double);
        assert!(!m.contains(Action::Surrender));
    }
}

#[test]
fn order_is_stable() {
    let a = enumerate_cells(&Rules::benchmark());
    let b = enumerate_cells(&Rules::benchmark());
    assert_eq!(a, b);
    assert_eq!(a[0], DecisionCell::plain(4, false, 2, true, 0));
    assert!(a.windows(2).all(|w| w[0].depth <= w[1].depth));
}
