//! Synchronous evolution of an embedded automaton on a finite region and
//! comparison with the one-dimensional reference simulator.
//!
//! A region stands for the infinite tiling. Cells with a boundary neighbour
//! keep their state, so after `t` steps only cells within graph distance
//! `radius - t` of the guideline segment are guaranteed to agree with the
//! infinite run; this bound is the configuration's `valid_radius`.

use alloc::vec::Vec;

use crate::ca1d::{run_1d, Rule1D, Tape};
use crate::embed::HcaAutomaton;
use crate::grid::{marker_cells, Adjacent, CellId, MarkerError, Region};
use crate::State;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum EngineError {
    #[error("word of length {len} does not fit the guideline segment of {capacity} cells")]
    WordTooLong { len: usize, capacity: usize },
    #[error("word state {0} is not a state of the source automaton")]
    BadWordState(State),
    #[error("the source automaton has no quiescent state to pad the line with")]
    NoQuiescentState,
    #[error("the automaton is for the {automaton} but the region is a {region}")]
    GridMismatch { automaton: crate::grid::GridKind, region: crate::grid::GridKind },
    #[error("no valid cells left: stepping further would leave the light cone")]
    ValidityExhausted,
    #[error("{steps} steps need a region of radius at least {needed}")]
    TooManySteps { steps: u32, needed: u32 },
    #[error(transparent)]
    Markers(#[from] MarkerError),
}

/// States of every region cell at one time.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Configuration {
    /// Indexed by [`CellId`].
    pub states: Vec<State>,
    pub time: u32,
    /// Cells at most this far from the guideline segment are exact.
    pub valid_radius: u32,
}

impl Configuration {
    pub fn state(&self, c: CellId) -> State {
        self.states[c.index()]
    }
}

/// Line index of the first letter of a word of length `len`; words are
/// centred on the central cell, rounding to the right.
pub fn word_origin(len: usize) -> i64 {
    -((len as i64 - 1).max(0) / 2)
}

/// The word on the guideline, padded with the quiescent state; off-line
/// cells in the background state except for the markers.
pub fn init_configuration(region: &Region, b: &HcaAutomaton, word: &[State]) -> Result<Configuration, EngineError> {
    if b.grid() != region.grid() {
        return Err(EngineError::GridMismatch { automaton: b.grid(), region: region.grid() });
    }
    let capacity = 2 * region.halfwidth() as usize + 1;
    if word.len() > capacity {
        return Err(EngineError::WordTooLong { len: word.len(), capacity });
    }
    if let Some(&bad) = word.iter().find(|&&s| s as usize >= b.source().states()) {
        return Err(EngineError::BadWordState(bad));
    }
    let padding = b.padding().ok_or(EngineError::NoQuiescentState)?;
    let mut states = alloc::vec![b.background(); region.len()];
    if let Some(marker) = b.marker() {
        for (cell, slots) in marker_cells(region, b.construction())? {
            for s in slots {
                if let Adjacent::Cell(m) = region.neighbor_at(cell, s as usize) {
                    states[m.index()] = marker;
                }
            }
        }
    }
    let origin = word_origin(word.len());
    for g in region.guideline() {
        let a = usize::try_from(g.index - origin)
            .ok()
            .and_then(|i| word.get(i).copied())
            .unwrap_or(padding);
        states[g.cell.index()] = b.encode(a);
    }
    Ok(Configuration { states, time: 0, valid_radius: region.radius() })
}

/// One synchronous update with frozen boundary cells, ignoring validity.
pub(crate) fn advance(b: &HcaAutomaton, region: &Region, states: &[State], out: &mut Vec<State>) {
    out.clear();
    out.extend_from_slice(states);
    let mut neighbors = Vec::with_capacity(12);
    for c in 0..region.len() {
        let raw = region.raw_neighbors(c);
        if raw.contains(&u32::MAX) {
            continue;
        }
        neighbors.clear();
        neighbors.extend(raw.iter().map(|&n| states[n as usize]));
        out[c] = b.transition(states[c], &neighbors);
    }
}

/// Advances every cell whose neighbourhood lies in the region; refuses once
/// no valid cells would remain.
pub fn step_hca(b: &HcaAutomaton, region: &Region, cfg: &Configuration) -> Result<Configuration, EngineError> {
    if cfg.valid_radius == 0 {
        return Err(EngineError::ValidityExhausted);
    }
    let mut states = Vec::with_capacity(cfg.states.len());
    advance(b, region, &cfg.states, &mut states);
    Ok(Configuration { states, time: cfg.time + 1, valid_radius: cfg.valid_radius - 1 })
}

/// `init` followed by `steps` successors.
pub fn run_hca(b: &HcaAutomaton, region: &Region, init: &Configuration, steps: u32) -> Result<Vec<Configuration>, EngineError> {
    let mut out = Vec::with_capacity(steps as usize + 1);
    out.push(init.clone());
    for _ in 0..steps {
        let next = step_hca(b, region, out.last().expect("non-empty"))?;
        out.push(next);
    }
    Ok(out)
}

/// The exact part of the guideline at one time.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TraceRow {
    pub time: u32,
    /// Line index of `states[0]`.
    pub origin: i64,
    /// `A`-states, or the raw state where a cell holds none.
    pub states: Vec<State>,
}

/// Reads the guideline cells inside each configuration's validity window,
/// left to right.
pub fn yellow_trace(b: &HcaAutomaton, region: &Region, configurations: &[Configuration]) -> Vec<TraceRow> {
    let line = region.guideline();
    let centre = line.iter().position(|g| g.index == 0).unwrap_or(0);
    configurations
        .iter()
        .map(|cfg| {
            let valid = |i: usize| region.distance(line[i].cell) <= cfg.valid_radius;
            let mut lo = centre;
            while lo > 0 && valid(lo - 1) {
                lo -= 1;
            }
            let mut hi = centre;
            while hi + 1 < line.len() && valid(hi + 1) {
                hi += 1;
            }
            let states = line[lo..=hi]
                .iter()
                .map(|g| {
                    let s = cfg.state(g.cell);
                    b.decode(s).unwrap_or(s)
                })
                .collect();
            TraceRow { time: cfg.time, origin: line[lo].index, states }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Divergence {
    pub time: u32,
    pub position: i64,
    pub expected: State,
    pub got: State,
}

/// An off-line cell that changed inside the validity window.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StabilityViolation {
    pub time: u32,
    pub cell: CellId,
    pub from: State,
    pub to: State,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EquivalenceReport {
    pub steps: u32,
    /// Line cells compared with the reference over all steps.
    pub compared: usize,
    /// Off-line cells checked for stability over all steps.
    pub stable_checked: usize,
    pub divergence: Option<Divergence>,
    /// First few violations only.
    pub stability_violations: Vec<StabilityViolation>,
    pub stability_violation_count: usize,
}

impl EquivalenceReport {
    pub fn is_ok(&self) -> bool {
        self.divergence.is_none() && self.stability_violation_count == 0
    }
}

const KEPT_VIOLATIONS: usize = 16;

/// Compares a finished run with the reference simulator: the line against
/// `run_1d` and every valid off-line cell against its initial state.
pub fn compare_with_reference(a: &Rule1D, b: &HcaAutomaton, region: &Region, word: &[State], configurations: &[Configuration]) -> Result<EquivalenceReport, EngineError> {
    let padding = b.padding().ok_or(EngineError::NoQuiescentState)?;
    let steps = configurations.len().saturating_sub(1);
    let tape = Tape { window: word.to_vec(), origin: word_origin(word.len()), padding };
    let reference = run_1d(a, &tape, steps);
    let trace = yellow_trace(b, region, configurations);
    let mut report = EquivalenceReport { steps: steps as u32, ..Default::default() };
    for (row, expected) in trace.iter().zip(&reference) {
        for (i, &got) in row.states.iter().enumerate() {
            let position = row.origin + i as i64;
            report.compared += 1;
            let want = expected.get(position);
            if got != want && report.divergence.is_none() {
                report.divergence = Some(Divergence { time: row.time, position, expected: want, got });
            }
        }
    }
    let Some(init) = configurations.first() else { return Ok(report) };
    for cfg in &configurations[1..] {
        for c in region.cells() {
            if region.is_guideline(c) || region.distance(c) > cfg.valid_radius {
                continue;
            }
            report.stable_checked += 1;
            let (from, to) = (init.state(c), cfg.state(c));
            if from != to {
                report.stability_violation_count += 1;
                if report.stability_violations.len() < KEPT_VIOLATIONS {
                    report.stability_violations.push(StabilityViolation { time: cfg.time, cell: c, from, to });
                }
            }
        }
    }
    Ok(report)
}

/// Runs `B` from `word` for `steps` steps and compares with `A`.
pub fn equivalence_check(a: &Rule1D, b: &HcaAutomaton, region: &Region, word: &[State], steps: u32) -> Result<EquivalenceReport, EngineError> {
    if steps + 1 > region.radius() {
        return Err(EngineError::TooManySteps { steps, needed: steps + 1 });
    }
    let init = init_configuration(region, b, word)?;
    let run = run_hca(b, region, &init, steps)?;
    compare_with_reference(a, b, region, word, &run)
}
