//! Turning a one-dimensional automaton `A` into a rotation-invariant
//! automaton `B` on one of the hyperbolic grids.
//!
//! `B` is kept in intensional form: one admissible pattern in the canonical
//! numbering of a guideline cell, matched against every rotated form of a
//! context. A match applies `A` to the states at the pattern's left and
//! right positions; otherwise the state is kept. Exact-context overrides can
//! be layered on top; the embeddings never produce any.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::ca1d::Rule1D;
use crate::engine::{self, Configuration};
use crate::grid::{marker_cells, Adjacent, CellId, Construction, GridKind, MarkerError, Region};
use crate::symmetry::{self, InvarianceReport, RotationGroup, RuleContext};
use crate::State;

/// One position of the admissible pattern.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Slot {
    Fixed(State),
    Left,
    Right,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum EmbedError {
    #[error("the source automaton is not fixable")]
    NotFixable,
    #[error("construction {construction} is not defined on the {grid}")]
    WrongGrid { construction: Construction, grid: GridKind },
    #[error("pattern has {got} positions, the {grid} needs {expected}")]
    PatternArity { grid: GridKind, expected: usize, got: usize },
    #[error("pattern needs exactly one left and one right position")]
    PatternFreePositions,
    #[error("state {state} is outside 0..{n}")]
    StateOutOfRange { state: State, n: usize },
    #[error("action and source automaton disagree on the number of states")]
    ActionStates,
    #[error(transparent)]
    Markers(#[from] MarkerError),
}

/// Everything that defines an automaton `B`, in plain data form.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AutomatonParts {
    pub grid: GridKind,
    pub construction: Construction,
    pub n_states: usize,
    /// The automaton being simulated.
    pub source: Rule1D,
    /// The rule applied on a match; equal to `source` unless edited.
    pub action: Rule1D,
    /// In canonical slot order.
    pub pattern: Vec<Slot>,
    /// States allowed for the cell itself and at the free positions.
    pub free_states: Vec<State>,
    /// State of off-line cells.
    pub background: State,
    /// State of marker cells, if the construction has markers.
    pub marker: Option<State>,
    /// Exact contexts with a prescribed new state, consulted first.
    #[cfg_attr(feature = "serde", serde(default))]
    pub overrides: Vec<(RuleContext, State)>,
}

/// A cellular automaton on a hyperbolic grid built from a 1D automaton.
#[derive(Clone, Debug)]
pub struct HcaAutomaton {
    parts: AutomatonParts,
    group: RotationGroup,
    left: usize,
    right: usize,
    free: Vec<bool>,
    /// Per state, how often the pattern fixes a neighbour to it.
    required: Vec<u8>,
    overrides: BTreeMap<RuleContext, State>,
}

/// Result of matching one context against every rotated form of the
/// pattern.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Matches {
    /// `(rotation index, new state)` per matching alignment.
    pub alignments: Vec<(usize, State)>,
}

impl Matches {
    pub fn count(&self) -> usize {
        self.alignments.len()
    }
}

fn free_positions(grid: GridKind) -> (usize, usize) {
    match grid {
        GridKind::Pentagrid => (0, 3),
        GridKind::Heptagrid => (0, 4),
        GridKind::Dodecagrid => (1, 4),
    }
}

impl HcaAutomaton {
    pub fn from_parts(parts: AutomatonParts) -> Result<HcaAutomaton, EmbedError> {
        let k = parts.grid.arity();
        if parts.pattern.len() != k {
            return Err(EmbedError::PatternArity { grid: parts.grid, expected: k, got: parts.pattern.len() });
        }
        let left = parts.pattern.iter().position(|s| *s == Slot::Left);
        let right = parts.pattern.iter().position(|s| *s == Slot::Right);
        let count = |want: Slot| parts.pattern.iter().filter(|s| **s == want).count();
        let (Some(left), Some(right)) = (left, right) else {
            return Err(EmbedError::PatternFreePositions);
        };
        if count(Slot::Left) != 1 || count(Slot::Right) != 1 {
            return Err(EmbedError::PatternFreePositions);
        }
        if parts.action.states() != parts.source.states() {
            return Err(EmbedError::ActionStates);
        }
        let n = parts.n_states;
        let check = |state: State| {
            if (state as usize) < n {
                Ok(())
            } else {
                Err(EmbedError::StateOutOfRange { state, n })
            }
        };
        check(parts.background)?;
        if let Some(m) = parts.marker {
            check(m)?;
        }
        let mut free = vec![false; n];
        for &s in &parts.free_states {
            check(s)?;
            if (s as usize) >= parts.source.states() {
                return Err(EmbedError::StateOutOfRange { state: s, n: parts.source.states() });
            }
            free[s as usize] = true;
        }
        let mut required = vec![0u8; n];
        for slot in &parts.pattern {
            if let Slot::Fixed(s) = *slot {
                check(s)?;
                required[s as usize] += 1;
            }
        }
        let mut overrides = BTreeMap::new();
        for (ctx, new_state) in &parts.overrides {
            check(*new_state)?;
            check(ctx.self_state)?;
            for &s in &ctx.neighbors {
                check(s)?;
            }
            if ctx.neighbors.len() != k {
                return Err(EmbedError::PatternArity { grid: parts.grid, expected: k, got: ctx.neighbors.len() });
            }
            overrides.insert(ctx.clone(), *new_state);
        }
        Ok(HcaAutomaton {
            group: RotationGroup::for_grid(parts.grid),
            left,
            right,
            free,
            required,
            overrides,
            parts,
        })
    }

    pub fn parts(&self) -> &AutomatonParts {
        &self.parts
    }

    pub fn into_parts(self) -> AutomatonParts {
        self.parts
    }

    pub fn grid(&self) -> GridKind {
        self.parts.grid
    }

    pub fn construction(&self) -> Construction {
        self.parts.construction
    }

    pub fn n_states(&self) -> usize {
        self.parts.n_states
    }

    pub fn source(&self) -> &Rule1D {
        &self.parts.source
    }

    pub fn action(&self) -> &Rule1D {
        &self.parts.action
    }

    pub fn pattern(&self) -> &[Slot] {
        &self.parts.pattern
    }

    pub fn background(&self) -> State {
        self.parts.background
    }

    pub fn marker(&self) -> Option<State> {
        self.parts.marker
    }

    pub fn group(&self) -> &RotationGroup {
        &self.group
    }

    /// Canonical positions of the left and right 1D neighbours.
    pub fn free_positions(&self) -> (usize, usize) {
        (self.left, self.right)
    }

    /// The extra state added by the first construction.
    pub fn extra_state(&self) -> Option<State> {
        (self.parts.n_states > self.parts.source.states()).then_some(self.parts.source.states() as State)
    }

    /// `B`-state representing an `A`-state.
    pub fn encode(&self, a: State) -> State {
        a
    }

    /// `A`-state represented by a `B`-state, if any.
    pub fn decode(&self, b: State) -> Option<State> {
        ((b as usize) < self.parts.source.states()).then_some(b)
    }

    /// `state_map[a]` is the `B`-state of `A`-state `a`.
    pub fn state_map(&self) -> Vec<State> {
        (0..self.parts.source.states() as State).map(|a| self.encode(a)).collect()
    }

    /// Padding state of the line for simulations: a quiescent state of `A`,
    /// the fixability witness where there is one.
    pub fn padding(&self) -> Option<State> {
        match self.parts.construction {
            Construction::T3 => self.parts.source.fixability().map(|w| w.q),
            _ => self.parts.source.quiescent_state(),
        }
    }

    /// Every rotated alignment of the pattern matching the context.
    pub fn matches(&self, self_state: State, neighbors: &[State]) -> Matches {
        let mut out = Matches::default();
        self.collect_matches(self_state, neighbors, &mut out.alignments);
        out
    }

    fn collect_matches(&self, self_state: State, neighbors: &[State], out: &mut Vec<(usize, State)>) {
        if !self.free.get(self_state as usize).copied().unwrap_or(false) {
            return;
        }
        let mut seen = [0u8; 256];
        for &s in neighbors {
            seen[s as usize] += 1;
        }
        if self.required.iter().enumerate().any(|(s, &r)| seen[s] < r) {
            return;
        }
        let free_ok = |s: State| self.free.get(s as usize).copied().unwrap_or(false);
        'perm: for (index, perm) in self.group.perms().iter().enumerate() {
            for (pos, slot) in self.parts.pattern.iter().enumerate() {
                let s = neighbors[perm[pos] as usize];
                let ok = match *slot {
                    Slot::Fixed(f) => s == f,
                    Slot::Left | Slot::Right => free_ok(s),
                };
                if !ok {
                    continue 'perm;
                }
            }
            let x = neighbors[perm[self.left] as usize];
            let y = neighbors[perm[self.right] as usize];
            out.push((index, self.parts.action.apply(x, self_state, y)));
        }
    }

    /// New state of a cell. With several matching alignments the smallest
    /// resulting state wins, which keeps the choice rotation invariant.
    pub fn transition(&self, self_state: State, neighbors: &[State]) -> State {
        if !self.overrides.is_empty() {
            let ctx = RuleContext::new(self_state, neighbors.to_vec());
            if let Some(&s) = self.overrides.get(&ctx) {
                return s;
            }
        }
        let mut found = Vec::new();
        self.collect_matches(self_state, neighbors, &mut found);
        found.iter().map(|&(_, s)| s).min().unwrap_or(self_state)
    }

    /// The pattern written out as explicit rules at the canonical alignment,
    /// one per choice of self, left and right state.
    pub fn pattern_rules(&self) -> Vec<(RuleContext, State)> {
        let free: Vec<State> = self.parts.free_states.clone();
        let mut rules = Vec::new();
        for &x in &free {
            for &s in &free {
                for &y in &free {
                    let neighbors = self
                        .parts
                        .pattern
                        .iter()
                        .map(|slot| match *slot {
                            Slot::Fixed(f) => f,
                            Slot::Left => x,
                            Slot::Right => y,
                        })
                        .collect();
                    rules.push((RuleContext::new(s, neighbors), self.parts.action.apply(x, s, y)));
                }
            }
        }
        rules
    }
}

fn check_grid(construction: Construction, grid: GridKind) -> Result<(), EmbedError> {
    if construction.supports(grid) {
        Ok(())
    } else {
        Err(EmbedError::WrongGrid { construction, grid })
    }
}

fn build_pattern(grid: GridKind, construction: Construction, background: State, marker: Option<State>) -> Vec<Slot> {
    let (left, right) = free_positions(grid);
    let markers = construction.canonical_slots(grid).unwrap_or(&[]);
    (0..grid.arity())
        .map(|i| {
            if i == left {
                Slot::Left
            } else if i == right {
                Slot::Right
            } else if markers.contains(&(i as u8)) {
                Slot::Fixed(marker.unwrap_or(background))
            } else {
                Slot::Fixed(background)
            }
        })
        .collect()
}

fn assemble(grid: GridKind, construction: Construction, a: &Rule1D, n_states: usize, background: State, marker: Option<State>) -> HcaAutomaton {
    let free_states = (0..a.states() as State).collect();
    let parts = AutomatonParts {
        grid,
        construction,
        n_states,
        source: a.clone(),
        action: a.clone(),
        pattern: build_pattern(grid, construction, background, marker),
        free_states,
        background,
        marker,
        overrides: Vec::new(),
    };
    HcaAutomaton::from_parts(parts).expect("embeddings are well formed")
}

/// One extra state, the largest, fills every off-line cell. On the
/// dodecagrid each line cell also has a marker holding state 0 across its
/// canonical face 3.
pub fn embed_theorem1(a: &Rule1D, grid: GridKind) -> HcaAutomaton {
    let extra = a.states() as State;
    let marker = (grid == GridKind::Dodecagrid).then_some(0);
    assemble(grid, Construction::T1, a, a.states() + 1, extra, marker)
}

/// Pentagrid with the states of `A`: off-line cells hold the quiescent
/// witness state and one neighbour of each line cell the other witness.
pub fn embed_theorem3(a: &Rule1D) -> Result<HcaAutomaton, EmbedError> {
    let w = a.fixability().ok_or(EmbedError::NotFixable)?;
    Ok(assemble(GridKind::Pentagrid, Construction::T3, a, a.states(), w.q, Some(w.u)))
}

/// Heptagrid or dodecagrid with the states of `A`: off-line cells hold 0 and
/// markers hold 1.
pub fn embed_theorem4(a: &Rule1D, grid: GridKind) -> Result<HcaAutomaton, EmbedError> {
    check_grid(Construction::T4, grid)?;
    Ok(assemble(grid, Construction::T4, a, a.states(), 0, Some(1)))
}

/// Dispatches on the construction.
pub fn embed(a: &Rule1D, construction: Construction, grid: GridKind) -> Result<HcaAutomaton, EmbedError> {
    check_grid(construction, grid)?;
    match construction {
        Construction::T1 => Ok(embed_theorem1(a, grid)),
        Construction::T3 => embed_theorem3(a),
        Construction::T4 => embed_theorem4(a, grid),
    }
}

/// A problem found by [`verify_unique_applicability`].
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum Violation {
    /// Several rotated alignments match.
    Ambiguous { time: u32, cell: CellId, count: usize },
    /// An off-line cell matches and the match would change its state.
    OffLineChange { time: u32, cell: CellId, from: State, to: State },
    /// A line cell matches only through a rotation other than its own
    /// numbering, or not at all.
    Misaligned { time: u32, cell: CellId },
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct UniquenessReport {
    pub horizon: u32,
    pub cells_scanned: usize,
    pub contexts_checked: usize,
    /// Matching alignments of the central cell at time 0.
    pub central_matches: usize,
    pub violations: Vec<Violation>,
}

impl UniquenessReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Scans every interior cell at every time up to `horizon`, counting the
/// alignments that match. Cells with boundary neighbours are frozen and the
/// scan may run past the light-cone validity of `init`: every configuration
/// it visits still has the shape of a reachable one.
pub fn verify_unique_applicability(b: &HcaAutomaton, region: &Region, init: &Configuration, horizon: u32) -> UniquenessReport {
    let mut report = UniquenessReport { horizon, cells_scanned: region.len(), ..Default::default() };
    let interior: Vec<bool> = region.cells().map(|c| region.is_interior(c)).collect();
    let mut states = init.states.clone();
    let mut next = states.clone();
    let mut neighbors = Vec::with_capacity(12);
    let mut found = Vec::new();
    for time in 0..=horizon {
        for c in region.cells() {
            if !interior[c.index()] {
                continue;
            }
            neighbors.clear();
            neighbors.extend(region.raw_neighbors(c.index()).iter().map(|&n| states[n as usize]));
            let s = states[c.index()];
            found.clear();
            b.collect_matches(s, &neighbors, &mut found);
            report.contexts_checked += 1;
            if time == 0 && c == CellId::CENTRAL {
                report.central_matches = found.len();
            }
            if found.len() > 1 {
                report.violations.push(Violation::Ambiguous { time, cell: c, count: found.len() });
                continue;
            }
            match region.guideline_record(c) {
                Some(g) => {
                    let aligned = found.first().is_some_and(|&(i, _)| b.group.perm(i) == g.frame.as_slice());
                    if !aligned {
                        report.violations.push(Violation::Misaligned { time, cell: c });
                    }
                }
                None => {
                    if let Some(&(_, to)) = found.first() {
                        if to != s {
                            report.violations.push(Violation::OffLineChange { time, cell: c, from: s, to });
                        }
                    }
                }
            }
        }
        if time < horizon {
            engine::advance(b, region, &states, &mut next);
            core::mem::swap(&mut states, &mut next);
        }
    }
    report
}

/// Every context met by an interior cell in the given configurations,
/// closed under rotation, with the new state `B` assigns to it.
pub fn expand_rules(b: &HcaAutomaton, region: &Region, configurations: &[Configuration]) -> Vec<(RuleContext, State)> {
    let mut seen = BTreeSet::new();
    for cfg in configurations {
        for c in region.cells().filter(|&c| region.is_interior(c)) {
            let neighbors = region.raw_neighbors(c.index()).iter().map(|&n| cfg.states[n as usize]).collect();
            seen.insert(RuleContext::new(cfg.states[c.index()], neighbors));
        }
    }
    let mut closed = BTreeSet::new();
    for ctx in &seen {
        for perm in b.group.perms() {
            closed.insert(symmetry::rotated_context(ctx, perm).expect("arity matches the grid"));
        }
    }
    closed
        .into_iter()
        .map(|ctx| {
            let s = b.transition(ctx.self_state, &ctx.neighbors);
            (ctx, s)
        })
        .collect()
}

/// Expands the contexts reachable from `init` within `horizon` steps and
/// runs the rotation-invariance check on them.
pub fn check_expanded_invariance(b: &HcaAutomaton, region: &Region, init: &Configuration, horizon: u32) -> InvarianceReport {
    let mut configurations = vec![init.clone()];
    let mut next = init.states.clone();
    for t in 0..horizon {
        engine::advance(b, region, &configurations[t as usize].states, &mut next);
        configurations.push(Configuration { states: next.clone(), time: t + 1, valid_radius: 0 });
    }
    let rules = expand_rules(b, region, &configurations);
    symmetry::check_rotation_invariance(&rules, &b.group).expect("arity matches the grid")
}

/// A symbolic state in the configuration tables.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Symbol {
    W,
    B,
    /// The unknown state of the line cell with this index.
    Line(i64),
}

impl Symbol {
    pub fn name(self) -> String {
        match self {
            Symbol::W => "W".into(),
            Symbol::B => "B".into(),
            Symbol::Line(i) => match i {
                -2 => "U".into(),
                -1 => "X".into(),
                0 => "Y".into(),
                1 => "Z".into(),
                2 => "T".into(),
                _ => format!("L{i}"),
            },
        }
    }
}

/// The contexts of one cell near the central cell in the symbolic initial
/// configuration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableEntry {
    pub label: String,
    pub state: Symbol,
    /// First line: the neighbours from position 1. Then, for each position
    /// holding `B` or a line variable, the context read from that position
    /// with the variable set to `B`. Repeated lines are dropped.
    pub lines: Vec<Vec<Symbol>>,
    /// Pattern alignments matching the first line when every variable
    /// differs from both `W` and `B`.
    pub alignments: usize,
}

/// Table position 1 of a planar cell is this slot.
fn table_offset(grid: GridKind) -> usize {
    match grid {
        GridKind::Pentagrid => 1,
        _ => 0,
    }
}

/// Symbolic contexts of the central cell and of every cell sharing a side
/// or a vertex with it, for the constructions without an extra state on
/// the planar grids.
pub fn configuration_table(b: &HcaAutomaton, region: &Region) -> Result<Vec<TableEntry>, EmbedError> {
    let grid = region.grid();
    if !grid.is_planar() || b.construction() == Construction::T1 || b.grid() != grid {
        return Err(EmbedError::WrongGrid { construction: b.construction(), grid });
    }
    let k = grid.arity();
    let mut symbols = vec![Symbol::W; region.len()];
    for (cell, slots) in marker_cells(region, b.construction())? {
        for s in slots {
            if let Adjacent::Cell(m) = region.neighbor_at(cell, s as usize) {
                symbols[m.index()] = Symbol::B;
            }
        }
    }
    for g in region.guideline() {
        symbols[g.cell.index()] = Symbol::Line(g.index);
    }

    let mut cells = vec![(String::from("central"), CellId::CENTRAL)];
    let side: Vec<Option<CellId>> = region.neighbors(CellId::CENTRAL).map(Adjacent::cell).collect();
    for (slot, n) in side.iter().enumerate() {
        if let Some(n) = n {
            cells.push((format!("side {}", grid.label(slot)), *n));
        }
    }
    for slot in 0..k {
        let (Some(a), Some(c)) = (side[slot], side[(slot + 1) % k]) else { continue };
        if region.back_slot(a, c).is_some() {
            // Three tiles per vertex: the vertex cell is a side neighbour.
            continue;
        }
        let shared = region
            .neighbors(a)
            .filter_map(Adjacent::cell)
            .find(|&x| x != CellId::CENTRAL && region.neighbors(c).any(|y| y == Adjacent::Cell(x)));
        if let Some(x) = shared {
            if !cells.iter().any(|(_, y)| *y == x) {
                cells.push((format!("vertex {}-{}", grid.label(slot), grid.label((slot + 1) % k)), x));
            }
        }
    }

    let offset = table_offset(grid);
    let mut out = Vec::new();
    for (label, cell) in cells {
        if !region.is_interior(cell) {
            continue;
        }
        let around: Vec<Symbol> = region
            .raw_neighbors(cell.index())
            .iter()
            .map(|&n| symbols[n as usize])
            .collect();
        let first: Vec<Symbol> = (0..k).map(|p| around[(p + offset) % k]).collect();
        let mut lines = vec![first.clone()];
        for p in 0..k {
            let at = first[p];
            if at == Symbol::W {
                continue;
            }
            let line: Vec<Symbol> = (0..k)
                .map(|i| {
                    let s = first[(p + i) % k];
                    if s == at {
                        Symbol::B
                    } else {
                        s
                    }
                })
                .collect();
            if !lines.contains(&line) {
                lines.push(line);
            }
        }
        let alignments = symbolic_alignments(b, &around);
        out.push(TableEntry { label, state: symbols[cell.index()], lines, alignments });
    }
    Ok(out)
}

fn symbolic_alignments(b: &HcaAutomaton, around: &[Symbol]) -> usize {
    b.group
        .perms()
        .iter()
        .filter(|perm| {
            b.pattern().iter().enumerate().all(|(pos, slot)| {
                let s = around[perm[pos] as usize];
                match *slot {
                    Slot::Fixed(f) if Some(f) == b.marker() => s == Symbol::B,
                    Slot::Fixed(_) => s == Symbol::W,
                    Slot::Left | Slot::Right => true,
                }
            })
        })
        .count()
}

/// Plain-text rendering of [`configuration_table`], one block per cell.
pub fn render_table(entries: &[TableEntry]) -> String {
    let mut out = String::new();
    for e in entries {
        for (i, line) in e.lines.iter().enumerate() {
            let head = if i == 0 { format!("{:<12} {:<3}", e.label, e.state.name()) } else { format!("{:<16}", "") };
            let body: Vec<String> = line.iter().map(|s| s.name()).collect();
            out.push_str(head.trim_end_matches(' '));
            out.push_str(&" ".repeat(16usize.saturating_sub(head.trim_end_matches(' ').len())));
            out.push_str(&body.join(" "));
            out.push('\n');
        }
        out.push_str(&format!("{:<16}alignments: {}\n", "", e.alignments));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn state_counts() {
        let a = Rule1D::elementary(110);
        for grid in GridKind::ALL {
            assert_eq!(embed_theorem1(&a, grid).n_states(), 3);
        }
        assert_eq!(embed_theorem3(&a).unwrap().n_states(), 2);
        assert_eq!(embed_theorem4(&a, GridKind::Heptagrid).unwrap().n_states(), 2);
        assert_eq!(embed_theorem4(&a, GridKind::Dodecagrid).unwrap().n_states(), 2);
        for n in 2..=4 {
            let r = Rule1D::from_fn(n, |x, s, y| (x + s + y) % n as State).unwrap();
            assert_eq!(embed_theorem1(&r, GridKind::Heptagrid).n_states(), n + 1);
        }
    }

    #[test]
    fn preconditions() {
        assert_eq!(embed_theorem3(&Rule1D::elementary(0)).unwrap_err(), EmbedError::NotFixable);
        assert!(matches!(embed_theorem4(&Rule1D::elementary(110), GridKind::Pentagrid), Err(EmbedError::WrongGrid { .. })));
        assert!(embed(&Rule1D::elementary(110), Construction::T3, GridKind::Heptagrid).is_err());
    }

    #[test]
    fn patterns() {
        let a = Rule1D::elementary(110);
        use Slot::*;
        let b = 2;
        assert_eq!(embed_theorem1(&a, GridKind::Pentagrid).pattern(), &[Left, Fixed(b), Fixed(b), Right, Fixed(b)]);
        assert_eq!(embed_theorem3(&a).unwrap().pattern(), &[Left, Fixed(1), Fixed(0), Right, Fixed(0)]);
        assert_eq!(
            embed_theorem4(&a, GridKind::Heptagrid).unwrap().pattern(),
            &[Left, Fixed(1), Fixed(0), Fixed(1), Right, Fixed(0), Fixed(0)]
        );
        let d = embed_theorem4(&a, GridKind::Dodecagrid).unwrap();
        let red: Vec<usize> = (0..12).filter(|&i| d.pattern()[i] == Fixed(1)).collect();
        assert_eq!(red, vec![0, 3, 9, 10]);
    }

    #[test]
    fn pentagrid_transition_applies_the_source_rule() {
        let a = Rule1D::elementary(110);
        let b = embed_theorem1(&a, GridKind::Pentagrid);
        // Left at slot 2, right at slot 0: the pattern rotated by two.
        let ctx = [1, 2, 0, 2, 2];
        assert_eq!(b.matches(1, &ctx).count(), 1);
        assert_eq!(b.transition(1, &ctx), a.apply(0, 1, 1));
        assert_eq!(b.transition(2, &ctx), 2);
        assert_eq!(b.transition(0, &[2, 2, 2, 2, 2]), 0);
    }

    #[test]
    fn quiescent_background_is_kept() {
        let a = Rule1D::elementary(110);
        let b = embed_theorem3(&a).unwrap();
        assert_eq!(b.transition(0, &[0; 5]), 0);
        // A green cell next to a marker matches, with no change.
        assert_eq!(b.matches(0, &[1, 0, 0, 0, 0]).count(), 1);
        assert_eq!(b.transition(0, &[1, 0, 0, 0, 0]), 0);
    }

    #[test]
    fn heptagrid_adjacent_markers_never_match() {
        let b = embed_theorem4(&Rule1D::elementary(110), GridKind::Heptagrid).unwrap();
        for first in 0..7 {
            let mut ctx = [0; 7];
            ctx[first] = 1;
            ctx[(first + 1) % 7] = 1;
            for s in 0..2 {
                assert_eq!(b.matches(s, &ctx).count(), 0);
            }
        }
    }

    #[test]
    fn overrides_take_precedence() {
        let mut parts = embed_theorem3(&Rule1D::elementary(110)).unwrap().into_parts();
        parts.overrides.push((RuleContext::new(0, vec![1, 0, 0, 0, 0]), 1));
        let b = HcaAutomaton::from_parts(parts).unwrap();
        assert_eq!(b.transition(0, &[1, 0, 0, 0, 0]), 1);
        assert_eq!(b.transition(0, &[0, 1, 0, 0, 0]), 0);
    }

    #[test]
    fn malformed_parts_are_rejected() {
        let mut parts = embed_theorem3(&Rule1D::elementary(110)).unwrap().into_parts();
        parts.pattern[3] = Slot::Left;
        assert_eq!(HcaAutomaton::from_parts(parts.clone()).unwrap_err(), EmbedError::PatternFreePositions);
        parts.pattern.pop();
        assert!(matches!(HcaAutomaton::from_parts(parts).unwrap_err(), EmbedError::PatternArity { .. }));
    }

    #[test]
    fn explicit_pattern_rules_are_invariant() {
        let a = Rule1D::elementary(110);
        for (c, g) in [
            (Construction::T1, GridKind::Pentagrid),
            (Construction::T1, GridKind::Heptagrid),
            (Construction::T1, GridKind::Dodecagrid),
            (Construction::T3, GridKind::Pentagrid),
            (Construction::T4, GridKind::Heptagrid),
            (Construction::T4, GridKind::Dodecagrid),
        ] {
            let b = embed(&a, c, g).unwrap();
            let report = symmetry::check_rotation_invariance(&b.pattern_rules(), b.group()).unwrap();
            assert!(report.is_ok(), "{c} {g}");
        }
    }

    #[test]
    fn dodecagrid_without_the_face_three_marker_conflicts() {
        // Line neighbours at faces 1 and 4 and the extra state everywhere
        // else: a half-turn swaps faces 1 and 4, so the rules for (x, y)
        // and (y, x) collide whenever the source rule is not symmetric.
        let a = Rule1D::elementary(110);
        let mut parts = embed_theorem1(&a, GridKind::Dodecagrid).into_parts();
        parts.pattern[3] = Slot::Fixed(2);
        parts.marker = None;
        let literal = HcaAutomaton::from_parts(parts).unwrap();
        let report = symmetry::check_rotation_invariance(&literal.pattern_rules(), literal.group()).unwrap();
        assert!(!report.is_ok());
        let ctx = [2, 1, 2, 2, 0, 2, 2, 2, 2, 2, 2, 2];
        assert_eq!(literal.matches(1, &ctx).count(), 2);
        let fixed = embed_theorem1(&a, GridKind::Dodecagrid);
        let mut ctx = ctx;
        ctx[3] = 0;
        assert_eq!(fixed.matches(1, &ctx).count(), 1);
    }

    #[test]
    fn dodecagrid_patterns_have_trivial_stabilisers() {
        let a = Rule1D::elementary(110);
        for b in [embed_theorem1(&a, GridKind::Dodecagrid), embed_theorem4(&a, GridKind::Dodecagrid).unwrap()] {
            let fixing = b
                .group()
                .perms()
                .iter()
                .filter(|perm| (0..12).all(|i| b.pattern()[perm[i] as usize] == b.pattern()[i]))
                .count();
            assert_eq!(fixing, 1);
        }
    }
}
