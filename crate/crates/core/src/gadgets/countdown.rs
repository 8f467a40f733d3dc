use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{GadgetError, ParseError};
use crate::model::{CostProcess, ProcessBuilder};
use crate::rational::{Cost, Rational};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Move {
    pub from: String,
    pub k: u64,
    pub to: String,
}

/// Player 1 picks a duration `k` available in the current state, Player 2
/// picks a successor; Player 1 wins by hitting total `T` exactly and loses
/// when stuck.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CountdownGame {
    pub states: Vec<String>,
    pub initial: String,
    #[serde(rename = "final")]
    pub final_value: u64,
    pub moves: Vec<Move>,
}

impl CountdownGame {
    pub fn from_json(text: &str) -> Result<Self, ParseError> {
        serde_json::from_str(text).map_err(|e| ParseError::Json(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("game serializes");
        s.push('\n');
        s
    }

    /// Duration → successors, per state index.
    fn table(&self) -> Result<Vec<BTreeMap<u64, BTreeSet<usize>>>, GadgetError> {
        let bad = |msg: String| Err(GadgetError::Precondition(msg));
        let index: HashMap<&str, usize> = self.states.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        if index.len() != self.states.len() {
            return bad("duplicate state names".into());
        }
        if !index.contains_key(self.initial.as_str()) {
            return bad(format!("unknown initial state `{}`", self.initial));
        }
        if self.final_value == 0 {
            return bad("final value must be at least 1".into());
        }
        let mut table = vec![BTreeMap::<u64, BTreeSet<usize>>::new(); self.states.len()];
        for m in &self.moves {
            let (Some(&f), Some(&t)) = (index.get(m.from.as_str()), index.get(m.to.as_str())) else {
                return bad(format!("move {} -{}-> {} names an unknown state", m.from, m.k, m.to));
            };
            if m.k == 0 {
                return bad(format!("move {} -0-> {} has duration 0", m.from, m.to));
            }
            table[f].entry(m.k).or_default().insert(t);
        }
        Ok(table)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountdownGadget {
    pub process: CostProcess,
    /// `T`: Player 1 wins iff some scheduler makes `K = T` almost sure.
    pub target: Cost,
}

/// Encodes a countdown game as a qualitative cost problem.
///
/// In the first phase the scheduler plays Player 1: action `k{K}` moves to
/// a successor at cost `K`, uniformly at random, or to the second phase.
/// `stop` jumps to the target for free. The second phase is a chain of
/// binary digits where the scheduler may add any cost up to `2^(i_max+1) - 1`.
pub fn countdown_to_process(game: &CountdownGame) -> Result<CountdownGadget, GadgetError> {
    let table = game.table()?;
    let taken: BTreeSet<&str> = game.states.iter().map(String::as_str).collect();
    let fresh = |base: String| {
        let mut name = base;
        while taken.contains(name.as_str()) {
            name.push('\'');
        }
        name
    };
    let t = fresh("t".into());
    let digits = 64 - game.final_value.leading_zeros() as usize;
    let bits: Vec<String> = (0..digits).map(|i| fresh(format!("bit{i}"))).chain([t.clone()]).collect();

    let mut b = ProcessBuilder::new();
    for s in &game.states {
        b.state(s);
    }
    b.initial(&game.initial).target(&t);
    for (s, moves) in game.states.iter().zip(&table) {
        b.transition(s, "stop", &t, Cost::zero(), Rational::one());
        for (k, succ) in moves {
            let p = Rational::new(1.into(), (succ.len() as i64 + 1).into());
            let action = format!("k{k}");
            for &r in succ {
                b.transition(s, &action, &game.states[r], Cost::from(*k), p.clone());
            }
            b.transition(s, &action, &bits[0], Cost::from(*k), p.clone());
        }
    }
    for i in 0..digits {
        b.transition(&bits[i], "skip", &bits[i + 1], Cost::zero(), Rational::one());
        b.transition(&bits[i], "take", &bits[i + 1], Cost::one() << i, Rational::one());
    }
    b.transition(&t, "stop", &t, Cost::zero(), Rational::one());
    Ok(CountdownGadget { process: b.build()?, target: Cost::from(game.final_value) })
}

/// Largest `T / |S|` [`countdown_brute`] accepts.
pub const BRUTE_RATIO: u64 = 10_000;

/// Solves the game by backward induction over configurations `(s, c)`.
pub fn countdown_brute(game: &CountdownGame) -> Result<bool, GadgetError> {
    let table = game.table()?;
    let t = game.final_value;
    if t > BRUTE_RATIO * game.states.len() as u64 {
        return Err(GadgetError::SizeGuard(format!("T = {t} exceeds {BRUTE_RATIO} per state")));
    }
    let n = game.states.len();
    let t = t as usize;
    // win[c][s]: Player 1 wins from (s, c).
    let mut win = vec![vec![false; n]; t + 1];
    win[t] = vec![true; n];
    for c in (0..t).rev() {
        for s in 0..n {
            win[c][s] = table[s]
                .iter()
                .any(|(&k, succ)| c + k as usize <= t && succ.iter().all(|&r| win[c + k as usize][r]));
        }
    }
    let s0 = game.states.iter().position(|s| *s == game.initial).expect("checked by table");
    Ok(win[0][s0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp_solver::decide_qualitative;

    fn game(moves: &[(&str, u64, &str)], t: u64) -> CountdownGame {
        let mut states: Vec<String> = moves.iter().flat_map(|m| [m.0.to_string(), m.2.to_string()]).collect();
        states.sort();
        states.dedup();
        if states.is_empty() {
            states.push("s0".into());
        }
        CountdownGame {
            initial: "s0".into(),
            states,
            final_value: t,
            moves: moves.iter().map(|&(f, k, to)| Move { from: f.into(), k, to: to.into() }).collect(),
        }
    }

    fn gadget_wins(g: &CountdownGame) -> bool {
        let gadget = countdown_to_process(g).unwrap();
        decide_qualitative(&gadget.process.validated().unwrap(), &gadget.target).holds
    }

    #[test]
    fn single_state_games() {
        for (moves, t, want) in [
            (vec![("s0", 1, "s0"), ("s0", 2, "s0")], 3, true),
            (vec![("s0", 2, "s0")], 3, false),
            (vec![("s0", 3, "s0")], 3, true),
        ] {
            let g = game(&moves, t);
            assert_eq!(countdown_brute(&g).unwrap(), want, "{moves:?}");
            assert_eq!(gadget_wins(&g), want, "{moves:?}");
        }
    }

    #[test]
    fn opponent_choice_matters() {
        // From s0, duration 1 leads to s1 or s2; only s1 can finish with 2.
        let g = game(&[("s0", 1, "s1"), ("s0", 1, "s2"), ("s1", 2, "s1"), ("s2", 3, "s2")], 3);
        assert!(!countdown_brute(&g).unwrap());
        assert!(!gadget_wins(&g));
        let g = game(&[("s0", 1, "s1"), ("s0", 1, "s2"), ("s1", 2, "s1"), ("s2", 2, "s2")], 3);
        assert!(countdown_brute(&g).unwrap());
        assert!(gadget_wins(&g));
    }

    #[test]
    fn gadget_shape() {
        let g = game(&[("s0", 1, "s0")], 5);
        let gadget = countdown_to_process(&g).unwrap();
        let p = &gadget.process;
        // s0, three digits for 5 = 0b101, and t.
        assert_eq!(p.num_states(), 5);
        assert!(p.state_id("bit2").is_some());
        assert!(p.clone().validated().is_ok());
    }

    #[test]
    fn malformed_games() {
        assert!(countdown_to_process(&game(&[("s0", 0, "s0")], 3)).is_err());
        assert!(countdown_to_process(&game(&[("s0", 1, "s0")], 0)).is_err());
        let mut g = game(&[("s0", 1, "s0")], 3);
        g.initial = "nowhere".into();
        assert!(countdown_brute(&g).is_err());
        assert!(countdown_brute(&game(&[("s0", 1, "s0")], 20_000)).is_err());
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{"states":["s0"],"initial":"s0","final":3,"moves":[{"from":"s0","k":1,"to":"s0"}]}"#;
        let g = CountdownGame::from_json(text).unwrap();
        assert_eq!(g, game(&[("s0", 1, "s0")], 3));
        assert_eq!(CountdownGame::from_json(&g.to_json()).unwrap(), g);
    }
}
