//! JSON file formats shared by the commands.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use hyca_core::embed::{AutomatonParts, UniquenessReport};
use hyca_core::engine::{EquivalenceReport, TraceRow};
use hyca_core::symmetry::InvarianceReport;
use hyca_core::{Configuration, GridKind, HcaAutomaton, Region, Rule1D, State};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

/// `elementary:N` or a path to a rule file.
pub fn parse_rule(spec: &str) -> Result<Rule1D> {
    if let Some(number) = spec.strip_prefix("elementary:") {
        let n: u8 = number.trim().parse().with_context(|| format!("bad elementary rule number {number:?}"))?;
        return Ok(Rule1D::elementary(n));
    }
    read_json(Path::new(spec))
}

/// A word as digits (`1011`) or comma-separated states (`1,0,12`).
pub fn parse_word(text: &str) -> Result<Vec<State>> {
    let text = text.trim();
    if text.is_empty() {
        bail!("empty word");
    }
    if text.contains(',') {
        return text
            .split(',')
            .map(|t| t.trim().parse::<State>().with_context(|| format!("bad state {t:?}")))
            .collect();
    }
    text.chars()
        .map(|c| c.to_digit(10).map(|d| d as State).with_context(|| format!("bad state {c:?}")))
        .collect()
}

pub fn read_automaton(path: &Path) -> Result<HcaAutomaton> {
    let parts: AutomatonParts = read_json(path)?;
    Ok(HcaAutomaton::from_parts(parts)?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    pub id: u32,
    pub distance: u32,
    /// Neighbour per side, `null` outside the region.
    pub neighbors: Vec<Option<u32>>,
    pub center: [f64; 4],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub disk: Option<[f64; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GuidelineRecord {
    pub index: i64,
    pub cell: u32,
    pub left_slot: u8,
    pub right_slot: u8,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionExport {
    pub grid: GridKind,
    pub radius: u32,
    pub halfwidth: u32,
    pub cells: Vec<CellRecord>,
    pub guideline: Vec<GuidelineRecord>,
}

pub fn export_region(region: &Region) -> RegionExport {
    let cells = region
        .cells()
        .map(|c| CellRecord {
            id: c.0,
            distance: region.distance(c),
            neighbors: region.neighbors(c).map(|a| a.cell().map(|d| d.0)).collect(),
            center: region.center(c),
            disk: region.disk_center(c),
        })
        .collect();
    let guideline = region
        .guideline()
        .iter()
        .map(|g| GuidelineRecord { index: g.index, cell: g.cell.0, left_slot: g.left_slot, right_slot: g.right_slot })
        .collect();
    RegionExport { grid: region.grid(), radius: region.radius(), halfwidth: region.halfwidth(), cells, guideline }
}

/// How off-line states are coloured.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Roles {
    pub background: Option<State>,
    pub marker: Option<State>,
    pub extra: Option<State>,
}

impl Roles {
    pub fn of(b: &HcaAutomaton) -> Roles {
        Roles { background: Some(b.background()), marker: b.marker(), extra: b.extra_state() }
    }
}

/// One configuration together with the region it lives on.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Snapshot {
    pub grid: GridKind,
    pub radius: u32,
    pub halfwidth: u32,
    pub roles: Roles,
    pub configuration: Configuration,
}

impl Snapshot {
    pub fn new(region: &Region, roles: Roles, configuration: Configuration) -> Snapshot {
        Snapshot { grid: region.grid(), radius: region.radius(), halfwidth: region.halfwidth(), roles, configuration }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceFile {
    pub grid: GridKind,
    pub radius: u32,
    pub halfwidth: u32,
    pub word: Vec<State>,
    pub rows: Vec<TraceRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<EquivalenceReport>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub grid: GridKind,
    pub radius: u32,
    pub horizon: u32,
    pub word: Vec<State>,
    pub invariance: InvarianceReport,
    pub uniqueness: UniquenessReport,
}

impl VerifyReport {
    pub fn is_ok(&self) -> bool {
        self.invariance.is_ok() && self.uniqueness.is_ok()
    }
}

/// The 60 motions, one per line: images of faces 0 and 1, then the full
/// permutation.
pub fn motion_table() -> String {
    let mut out = String::from("f0 f1 | images of faces 0..11\n");
    for m in hyca_core::symmetry::enumerate_motions() {
        let images: Vec<String> = m.0.iter().map(|f| format!("{f:>2}")).collect();
        out.push_str(&format!("{:>2} {:>2} | {}\n", m.0[0], m.0[1], images.join(" ")));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use hyca_core::Adjacent;

    fn count_adjacent(region: &Region) -> usize {
        region.cells().flat_map(|c| region.neighbors(c)).filter(|a| matches!(a, Adjacent::Cell(_))).count()
    }

    #[test]
    fn words() {
        assert_eq!(parse_word("1011").unwrap(), vec![1, 0, 1, 1]);
        assert_eq!(parse_word("2, 0,12").unwrap(), vec![2, 0, 12]);
        assert!(parse_word("").is_err());
        assert!(parse_word("1a").is_err());
    }

    #[test]
    fn elementary_spec() {
        assert_eq!(parse_rule("elementary:110").unwrap(), Rule1D::elementary(110));
        assert!(parse_rule("elementary:256").is_err());
    }

    #[test]
    fn rule_round_trip() {
        let r = Rule1D::elementary(54);
        let back: Rule1D = serde_json::from_str(&to_json(&r)).unwrap();
        assert_eq!(back, r);
        assert!(serde_json::from_str::<Rule1D>(r#"{"n":2,"table":[0,1]}"#).is_err());
    }

    #[test]
    fn region_export_is_consistent() {
        let region = hyca_core::build_region(GridKind::Heptagrid, 2, 1).unwrap();
        let e = export_region(&region);
        assert_eq!(e.cells.len(), region.len());
        assert_eq!(e.guideline.len(), region.guideline().len());
        let links: usize = e.cells.iter().map(|c| c.neighbors.iter().flatten().count()).sum();
        assert_eq!(links, count_adjacent(&region));
        for c in &e.cells {
            for &d in c.neighbors.iter().flatten() {
                assert!(e.cells[d as usize].neighbors.contains(&Some(c.id)));
            }
        }
    }

    #[test]
    fn motion_table_has_sixty_rows() {
        assert_eq!(motion_table().lines().count(), 61);
    }
}
