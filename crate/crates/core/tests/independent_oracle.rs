//! Cross-checks of the dealer chain and the non-split Q-values against a
//! separate solver that tracks hands as (hard sum, ace count).

use std::collections::HashMap;

use bjbench::cards::{ACE, VALUES};
use bjbench::dealer::dealer_distribution;
use bjbench::{solve, Action, Rules, Variant};

fn p(v: u8) -> f64 {
    if v == 10 {
        4.0 / 13.0
    } else {
        1.0 / 13.0
    }
}

/// Best total and softness from a hard sum (aces counted as 1) and ace count.
fn best(hard: u32, aces: u32) -> (u32, bool) {
    if aces > 0 && hard + 10 <= 21 {
        (hard + 10, true)
    } else {
        (hard, false)
    }
}

fn add(hard: u32, aces: u32, v: u8) -> (u32, u32) {
    if v == ACE {
        (hard + 1, aces + 1)
    } else {
        (hard + u32::from(v), aces)
    }
}

/// Dealer final distribution by explicit recursion over drawn cards.
fn dealer_from(hard: u32, aces: u32, h17: bool, out: &mut [f64; 6], weight: f64) {
    let (t, soft) = best(hard, aces);
    if t > 21 {
        out[5] += weight;
        return;
    }
    let stands = t > 17 || (t == 17 && !(soft && h17));
    if stands {
        out[(t - 17) as usize] += weight;
        return;
    }
    for &v in &VALUES {
        let (h, a) = add(hard, aces, v);
        dealer_from(h, a, h17, out, weight * p(v));
    }
}

fn dealer_row(up: u8, h17: bool, peek: bool) -> [f64; 6] {
    let mut out = [0.0; 6];
    let mut mass = 0.0;
    let (h0, a0) = add(0, 0, up);
    for &hole in &VALUES {
        let natural = (up == ACE && hole == 10) || (up == 10 && hole == ACE);
        if peek && natural {
            continue;
        }
        mass += p(hole);
        let (h, a) = add(h0, a0, hole);
        dealer_from(h, a, h17, &mut out, p(hole));
    }
    out.map(|x| x / mass)
}

fn stand_ev(t: u32, d: &[f64; 6]) -> f64 {
    if t > 21 {
        return -1.0;
    }
    let mut ev = d[5];
    for k in 0..5 {
        let dt = 17 + k as u32;
        ev += d[k] * if t > dt { 1.0 } else if t < dt { -1.0 } else { 0.0 };
    }
    ev
}

struct Player<'a> {
    d: &'a [f64; 6],
    memo: HashMap<(u32, u32), f64>,
}

impl Player<'_> {
    /// Value with stand and hit only.
    fn value(&mut self, hard: u32, aces: u32) -> f64 {
        let (t, _) = best(hard, aces);
        if t > 21 {
            return -1.0;
        }
        if let Some(&v) = self.memo.get(&(hard, aces)) {
            return v;
        }
        let v = stand_ev(t, self.d).max(self.hit(hard, aces));
        self.memo.insert((hard, aces), v);
        v
    }

    fn hit(&mut self, hard: u32, aces: u32) -> f64 {
        VALUES
            .iter()
            .map(|&c| {
                let (h, a) = add(hard, aces, c);
                p(c) * self.value(h, a)
            })
            .sum()
    }

    fn double(&self, hard: u32, aces: u32) -> f64 {
        2.0 * VALUES
            .iter()
            .map(|&c| {
                let (h, a) = add(hard, aces, c);
                p(c) * stand_ev(best(h, a).0, self.d)
            })
            .sum::<f64>()
    }
}

/// A (hard sum, aces) representative for a cell's (total, soft).
fn representative(total: u8, soft: bool) -> (u32, u32) {
    if soft {
        (u32::from(total) - 10, 1)
    } else {
        (u32::from(total), 0)
    }
}

#[test]
fn dealer_rows_match_explicit_recursion() {
    for v in Variant::ALL {
        let rules = v.rules();
        for peek in [false, true] {
            for &u in &VALUES {
                let got = dealer_distribution(u, &rules, peek);
                let want = dealer_row(u, !rules.dealer_stands_soft_17, peek);
                for k in 0..6 {
                    assert!((got[k] - want[k]).abs() < 1e-13, "{v:?} up {u} peek {peek} slot {k}");
                }
                assert!((got.iter().sum::<f64>() - 1.0).abs() < 1e-13);
            }
        }
    }
}

#[test]
fn non_split_q_values_match_independent_solver() {
    for v in Variant::ALL {
        let rules = v.rules();
        let sol = solve(&rules).unwrap();
        let mut players: HashMap<u8, Player> = HashMap::new();
        let rows: HashMap<u8, [f64; 6]> =
            VALUES.iter().map(|&u| (u, dealer_row(u, !rules.dealer_stands_soft_17, rules.dealer_peek))).collect();
        for &u in &VALUES {
            players.insert(u, Player { d: &rows[&u], memo: HashMap::new() });
        }
        for (i, c) in sol.space().cells().iter().enumerate() {
            let pl = players.get_mut(&c.upcard).unwrap();
            let (h, a) = representative(c.total, c.soft);
            let check = |name: &str, got: Option<f64>, want: f64| {
                let got = got.unwrap_or_else(|| panic!("{v:?} {c} missing {name}"));
                assert!((got - want).abs() < 1e-12, "{v:?} {c} {name}: {got} vs {want}");
            };
            check("stand", sol.q(i, Action::Stand), stand_ev(u32::from(c.total), pl.d));
            check("hit", sol.q(i, Action::Hit), pl.hit(h, a));
            if let Some(q) = sol.q(i, Action::Double) {
                check("double", Some(q), pl.double(h, a));
            }
            if let Some(q) = sol.q(i, Action::Surrender) {
                assert_eq!(q, -0.5);
            }
        }
    }
}

#[test]
fn split_aces_one_card_value() {
    let rules = Rules::benchmark();
    let sol = solve(&rules).unwrap();
    for &u in &VALUES {
        let d = dealer_row(u, false, true);
        let want = 2.0
            * VALUES
                .iter()
                .map(|&c| {
                    let (h, a) = add(1, 1, c);
                    p(c) * stand_ev(best(h, a).0, &d)
                })
                .sum::<f64>();
        let idx = sol.index(&bjbench::DecisionCell::pair(ACE, u, true, true, 0)).unwrap();
        let got = sol.q(idx, Action::Split).unwrap();
        assert!((got - want).abs() < 1e-12, "A,A vs {u}: {got} vs {want}");
    }
}

#[test]
fn solve_is_fast_and_deterministic() {
    let t = std::time::Instant::now();
    let a = solve(&Rules::benchmark()).unwrap();
    assert!(t.elapsed().as_secs_f64() < 1.0);
    let b = solve(&Rules::benchmark()).unwrap();
    assert_eq!(a.game_ev.to_bits(), b.game_ev.to_bits());
    assert_eq!(a.optimal_action, b.optimal_action);
}
