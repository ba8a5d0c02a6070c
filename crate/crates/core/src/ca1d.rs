//! One-dimensional radius-1 cellular automata and their reference
//! simulator.

use alloc::vec;
use alloc::vec::Vec;

use crate::State;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum RuleError {
    #[error("a rule needs between 2 and 255 states, got {0}")]
    StateCount(usize),
    #[error("table has {found} entries, expected {expected}")]
    TableSize { expected: usize, found: usize },
    #[error("table entry {index} is {value}, outside 0..{n}")]
    StateOutOfRange { index: usize, value: State, n: usize },
}

/// An `n`-state radius-1 rule `(x, s, y) -> s'`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "RawRule", into = "RawRule"))]
pub struct Rule1D {
    n: usize,
    table: Vec<State>,
}

#[cfg(feature = "serde")]
#[derive(serde::Serialize, serde::Deserialize)]
struct RawRule {
    n: usize,
    table: Vec<State>,
}

#[cfg(feature = "serde")]
impl TryFrom<RawRule> for Rule1D {
    type Error = RuleError;

    fn try_from(raw: RawRule) -> Result<Self, RuleError> {
        Rule1D::new(raw.n, raw.table)
    }
}

#[cfg(feature = "serde")]
impl From<Rule1D> for RawRule {
    fn from(r: Rule1D) -> RawRule {
        RawRule { n: r.n, table: r.table }
    }
}

/// The pair `(q, u)` showing a rule is fixable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FixWitness {
    /// Quiescent, and kept in the context `u, q`.
    pub q: State,
    /// Kept in the context `q, q`.
    pub u: State,
}

impl Rule1D {
    /// `table[(x * n + s) * n + y]` is the new state of `s` between `x` and
    /// `y`.
    pub fn new(n: usize, table: Vec<State>) -> Result<Rule1D, RuleError> {
        if !(2..=255).contains(&n) {
            return Err(RuleError::StateCount(n));
        }
        if table.len() != n * n * n {
            return Err(RuleError::TableSize { expected: n * n * n, found: table.len() });
        }
        if let Some((index, &value)) = table.iter().enumerate().find(|(_, &v)| v as usize >= n) {
            return Err(RuleError::StateOutOfRange { index, value, n });
        }
        Ok(Rule1D { n, table })
    }

    pub fn from_fn(n: usize, f: impl Fn(State, State, State) -> State) -> Result<Rule1D, RuleError> {
        let mut table = Vec::with_capacity(n * n * n);
        for x in 0..n {
            for s in 0..n {
                for y in 0..n {
                    table.push(f(x as State, s as State, y as State));
                }
            }
        }
        Rule1D::new(n, table)
    }

    /// Wolfram's numbering: triple `(a, b, c)` maps to bit `4a + 2b + c`.
    pub fn elementary(number: u8) -> Rule1D {
        let table = (0..8).map(|i| (number >> i) & 1).collect();
        Rule1D { n: 2, table }
    }

    pub fn states(&self) -> usize {
        self.n
    }

    pub fn table(&self) -> &[State] {
        &self.table
    }

    #[inline]
    pub fn apply(&self, x: State, s: State, y: State) -> State {
        let n = self.n;
        self.table[(x as usize * n + s as usize) * n + y as usize]
    }

    pub fn is_quiescent(&self, q: State) -> bool {
        self.apply(q, q, q) == q
    }

    /// Some `q` with `(q, q, q) -> q`, preferring 0.
    pub fn quiescent_state(&self) -> Option<State> {
        (0..self.n as State).find(|&q| self.is_quiescent(q))
    }

    /// A witness `(q, u)`, `u != q`, with `(q,q,q) -> q`, `(u,q,q) -> q` and
    /// `(q,u,q) -> u`. Pairs are tried in lexicographic order.
    pub fn fixability(&self) -> Option<FixWitness> {
        let n = self.n as State;
        (0..n).flat_map(|q| (0..n).map(move |u| FixWitness { q, u })).find(|&FixWitness { q, u }| {
            u != q && self.apply(q, q, q) == q && self.apply(u, q, q) == q && self.apply(q, u, q) == u
        })
    }

    pub fn is_fixable(&self) -> bool {
        self.fixability().is_some()
    }
}

/// A finite window of an infinite line; every cell outside holds `padding`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Tape {
    pub window: Vec<State>,
    /// Line index of `window[0]`.
    pub origin: i64,
    pub padding: State,
}

impl Tape {
    /// The word placed at indices `0..word.len()`.
    pub fn new(word: &[State], padding: State) -> Tape {
        Tape { window: word.to_vec(), origin: 0, padding }
    }

    pub fn get(&self, index: i64) -> State {
        usize::try_from(index - self.origin)
            .ok()
            .and_then(|i| self.window.get(i).copied())
            .unwrap_or(self.padding)
    }

    /// One past the last window index.
    pub fn end(&self) -> i64 {
        self.origin + self.window.len() as i64
    }
}

/// Advances every cell once; the window grows by one cell on each side. The
/// result describes the infinite line exactly when the padding is
/// quiescent.
pub fn step_1d(rule: &Rule1D, tape: &Tape) -> Tape {
    let mut window = vec![tape.padding; tape.window.len() + 2];
    let origin = tape.origin - 1;
    for (i, cell) in window.iter_mut().enumerate() {
        let at = origin + i as i64;
        *cell = rule.apply(tape.get(at - 1), tape.get(at), tape.get(at + 1));
    }
    Tape { window, origin, padding: tape.padding }
}

/// The initial tape followed by `steps` successors.
pub fn run_1d(rule: &Rule1D, tape: &Tape, steps: usize) -> Vec<Tape> {
    let mut trace = Vec::with_capacity(steps + 1);
    trace.push(tape.clone());
    for _ in 0..steps {
        let next = step_1d(rule, trace.last().expect("non-empty"));
        trace.push(next);
    }
    trace
}

#[cfg(test)]
mod tests {
    use super::*;

    fn states(t: &Tape, from: i64, to: i64) -> Vec<State> {
        (from..=to).map(|i| t.get(i)).collect()
    }

    #[test]
    fn rule_110_decodes() {
        let r = Rule1D::elementary(110);
        assert_eq!(r.apply(0, 1, 0), 1);
        assert_eq!(r.apply(1, 0, 0), 0);
        assert_eq!(r.apply(0, 0, 0), 0);
        assert_eq!(r.apply(1, 1, 1), 0);
        assert_eq!(r.apply(0, 0, 1), 1);
    }

    #[test]
    fn rules_0_and_204() {
        let zero = Rule1D::elementary(0);
        let id = Rule1D::elementary(204);
        for t in 0..8u8 {
            let (a, b, c) = (t >> 2 & 1, t >> 1 & 1, t & 1);
            assert_eq!(zero.apply(a, b, c), 0);
            assert_eq!(id.apply(a, b, c), b);
        }
    }

    #[test]
    fn fixability_examples() {
        assert_eq!(Rule1D::elementary(110).fixability(), Some(FixWitness { q: 0, u: 1 }));
        assert_eq!(Rule1D::elementary(0).fixability(), None);
        assert_eq!(Rule1D::elementary(204).fixability(), Some(FixWitness { q: 0, u: 1 }));
    }

    #[test]
    fn fixability_of_all_elementary_rules() {
        for k in 0..=255u8 {
            let bit = |a: u8, b: u8, c: u8| (k >> (4 * a + 2 * b + c)) & 1;
            let direct = (0..2u8).any(|q| {
                let u = 1 - q;
                bit(q, q, q) == q && bit(u, q, q) == q && bit(q, u, q) == u
            });
            assert_eq!(Rule1D::elementary(k).is_fixable(), direct, "rule {k}");
        }
    }

    #[test]
    fn witness_need_not_be_zero_one() {
        // State 2 is the only quiescent state that keeps a 1 alone.
        let r = Rule1D::from_fn(3, |x, s, y| match (x, s, y) {
            (2, 2, 2) | (1, 2, 2) => 2,
            (2, 1, 2) => 1,
            _ => 0,
        })
        .unwrap();
        assert_eq!(r.fixability(), Some(FixWitness { q: 2, u: 1 }));
    }

    #[test]
    fn rule_110_single_cell() {
        let r = Rule1D::elementary(110);
        let t = step_1d(&r, &Tape::new(&[1], 0));
        assert_eq!((t.origin, t.window.as_slice()), (-1, &[1, 1, 0][..]));
        assert_eq!(states(&t, -3, 3), vec![0, 0, 1, 1, 0, 0, 0]);
    }

    #[test]
    fn trace_shapes() {
        let r = Rule1D::elementary(110);
        let t = Tape::new(&[1], 0);
        assert_eq!(run_1d(&r, &t, 0), vec![t.clone()]);
        let trace = run_1d(&r, &t, 5);
        for (k, tape) in trace.iter().enumerate() {
            assert_eq!(tape.origin, -(k as i64));
            assert_eq!(tape.window.len(), 1 + 2 * k);
        }
        assert_eq!(run_1d(&r, &trace[2], 3), trace[2..].to_vec());
    }

    #[test]
    fn identity_keeps_states() {
        let r = Rule1D::elementary(204);
        let t = Tape::new(&[1, 0, 1, 1], 0);
        let next = step_1d(&r, &t);
        assert_eq!(states(&next, -2, 5), states(&t, -2, 5));
        assert_eq!(next.window.len(), 6);
    }

    #[test]
    fn invalid_tables_are_rejected() {
        assert_eq!(Rule1D::new(1, vec![0]), Err(RuleError::StateCount(1)));
        assert!(matches!(Rule1D::new(2, vec![0; 7]), Err(RuleError::TableSize { .. })));
        assert!(matches!(Rule1D::new(2, vec![2; 8]), Err(RuleError::StateOutOfRange { .. })));
    }
}
