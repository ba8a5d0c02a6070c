//! Rotation algebra for rule contexts.
//!
//! Planar cells are rotated by cyclic shifts of their side list. A
//! dodecahedral cell is rotated by one of the 60 orientation-preserving
//! motions of the dodecahedron, each computed from the face adjacency table
//! by the rotation algorithm: fix the images of face 0 and face 1, then turn
//! around faces 1, 5, 7 and 8 in that order.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::grid::GridKind;
use crate::State;

/// For each face, the five surrounding faces in clockwise order as seen from
/// outside the dodecahedron.
pub const FACE_TABLE: [[u8; 5]; 12] = [
    [1, 5, 4, 3, 2],
    [0, 2, 7, 6, 5],
    [0, 3, 8, 7, 1],
    [0, 4, 9, 8, 2],
    [0, 5, 10, 9, 3],
    [0, 1, 6, 10, 4],
    [1, 7, 11, 10, 5],
    [1, 2, 8, 11, 6],
    [2, 3, 9, 11, 7],
    [3, 4, 10, 11, 8],
    [4, 5, 6, 11, 9],
    [6, 7, 8, 9, 10],
];

/// Faces whose crowns are walked, in order, to complete a motion once the
/// images of faces 0 and 1 are placed.
const ROUNDS: [u8; 4] = [1, 5, 7, 8];

pub fn faces_adjacent(f: u8, g: u8) -> bool {
    FACE_TABLE[f as usize].contains(&g)
}

fn position(row: &[u8; 5], face: u8) -> Option<usize> {
    row.iter().position(|&g| g == face)
}

/// An orientation-preserving motion of the dodecahedron, as the permutation
/// `face ↦ image`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FacePermutation(pub [u8; 12]);

impl FacePermutation {
    pub const IDENTITY: FacePermutation =
        FacePermutation([0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11]);

    /// Runs the rotation algorithm for the motion sending face 0 to `f0` and
    /// face 1 to `f1`. Returns `None` unless `f1` shares an edge with `f0`.
    pub fn from_pair(f0: u8, f1: u8) -> Option<FacePermutation> {
        if f0 > 11 || !faces_adjacent(f0, f1) {
            return None;
        }
        let mut image: [Option<u8>; 12] = [None; 12];
        image[0] = Some(f0);
        image[1] = Some(f1);
        for &phi in &ROUNDS {
            let phi_image = image[phi as usize]?;
            let row = &FACE_TABLE[phi as usize];
            // Start from any face of the crown whose image is already known.
            let start = row.iter().position(|&g| image[g as usize].is_some())?;
            let known = row[start];
            let target_row = &FACE_TABLE[phi_image as usize];
            let offset = position(target_row, image[known as usize]?)?;
            for i in 0..5 {
                let face = row[(start + i) % 5];
                let img = target_row[(offset + i) % 5];
                match image[face as usize] {
                    Some(prev) if prev != img => return None,
                    _ => image[face as usize] = Some(img),
                }
            }
        }
        let mut out = [0u8; 12];
        for (o, img) in out.iter_mut().zip(image.iter()) {
            *o = (*img)?;
        }
        Some(FacePermutation(out))
    }

    #[inline]
    pub fn image(&self, face: u8) -> u8 {
        self.0[face as usize]
    }

    /// `(self ∘ other)(f) = self(other(f))`.
    pub fn compose(&self, other: &FacePermutation) -> FacePermutation {
        let mut out = [0u8; 12];
        for (f, o) in out.iter_mut().enumerate() {
            *o = self.0[other.0[f] as usize];
        }
        FacePermutation(out)
    }

    pub fn inverse(&self) -> FacePermutation {
        let mut out = [0u8; 12];
        for (f, &img) in self.0.iter().enumerate() {
            out[img as usize] = f as u8;
        }
        FacePermutation(out)
    }

    pub fn preserves_adjacency(&self) -> bool {
        (0..12u8).all(|f| {
            FACE_TABLE[f as usize]
                .iter()
                .all(|&g| faces_adjacent(self.image(f), self.image(g)))
        })
    }
}

/// The 60 positive motions, ordered by `(f0, position of f1 in row f0)`.
/// The first entry is the identity.
pub fn enumerate_motions() -> Vec<FacePermutation> {
    let mut out = Vec::with_capacity(60);
    for f0 in 0..12u8 {
        for &f1 in &FACE_TABLE[f0 as usize] {
            if let Some(m) = FacePermutation::from_pair(f0, f1) {
                out.push(m);
            }
        }
    }
    out
}

/// The rotation group acting on the neighbour slots of a cell, as explicit
/// permutations. A rotated context reads `rotated[i] = original[perm[i]]`.
#[derive(Clone, Debug)]
pub struct RotationGroup {
    arity: usize,
    perms: Vec<Vec<u8>>,
}

impl RotationGroup {
    pub fn for_grid(grid: GridKind) -> RotationGroup {
        match grid {
            GridKind::Pentagrid | GridKind::Heptagrid => {
                let k = grid.arity();
                let perms = (0..k)
                    .map(|shift| (0..k).map(|i| ((i + shift) % k) as u8).collect())
                    .collect();
                RotationGroup { arity: k, perms }
            }
            GridKind::Dodecagrid => RotationGroup {
                arity: 12,
                perms: enumerate_motions().into_iter().map(|m| m.0.to_vec()).collect(),
            },
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn order(&self) -> usize {
        self.perms.len()
    }

    pub fn perms(&self) -> &[Vec<u8>] {
        &self.perms
    }

    pub fn perm(&self, index: usize) -> &[u8] {
        &self.perms[index]
    }
}

/// The states seen by a cell: its own, then one per side (planar grids, side
/// 1 first) or per face (dodecagrid, face 0 first).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RuleContext {
    pub self_state: State,
    pub neighbors: Vec<State>,
}

impl RuleContext {
    pub fn new(self_state: State, neighbors: Vec<State>) -> RuleContext {
        RuleContext { self_state, neighbors }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("context has {got} neighbours but the rotation acts on {expected}")]
pub struct ArityMismatch {
    pub expected: usize,
    pub got: usize,
}

pub fn rotated_context(ctx: &RuleContext, perm: &[u8]) -> Result<RuleContext, ArityMismatch> {
    if ctx.neighbors.len() != perm.len() {
        return Err(ArityMismatch { expected: perm.len(), got: ctx.neighbors.len() });
    }
    Ok(RuleContext {
        self_state: ctx.self_state,
        neighbors: perm.iter().map(|&p| ctx.neighbors[p as usize]).collect(),
    })
}

/// Lexicographically least rotated form of `ctx`, comparing states by their
/// numeric encoding.
pub fn minimal_form(ctx: &RuleContext, group: &RotationGroup) -> Result<RuleContext, ArityMismatch> {
    if ctx.neighbors.len() != group.arity() {
        return Err(ArityMismatch { expected: group.arity(), got: ctx.neighbors.len() });
    }
    let mut best: Option<Vec<State>> = None;
    let mut scratch = Vec::with_capacity(group.arity());
    for perm in group.perms() {
        scratch.clear();
        scratch.extend(perm.iter().map(|&p| ctx.neighbors[p as usize]));
        if best.as_ref().is_none_or(|b| scratch < *b) {
            best = Some(scratch.clone());
        }
    }
    Ok(RuleContext { self_state: ctx.self_state, neighbors: best.unwrap_or_default() })
}

/// A pair of rules whose contexts are rotated forms of one another but whose
/// new states differ.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Conflict {
    pub minimal: RuleContext,
    pub first: (RuleContext, State),
    pub second: (RuleContext, State),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct InvarianceReport {
    pub rules_checked: usize,
    pub classes: usize,
    pub conflicts: Vec<Conflict>,
}

impl InvarianceReport {
    pub fn is_ok(&self) -> bool {
        self.conflicts.is_empty()
    }
}

/// Groups rules by the minimal form of their context; the rule set is
/// rotation invariant iff every group agrees on the new state. One conflict
/// is reported per inconsistent group.
pub fn check_rotation_invariance(
    rules: &[(RuleContext, State)],
    group: &RotationGroup,
) -> Result<InvarianceReport, ArityMismatch> {
    let mut classes: BTreeMap<RuleContext, (usize, bool)> = BTreeMap::new();
    let mut conflicts = Vec::new();
    for (i, (ctx, new_state)) in rules.iter().enumerate() {
        let min = minimal_form(ctx, group)?;
        match classes.get_mut(&min) {
            None => {
                classes.insert(min, (i, false));
            }
            Some((first, reported)) => {
                let (first_ctx, first_state) = &rules[*first];
                if first_state != new_state && !*reported {
                    *reported = true;
                    conflicts.push(Conflict {
                        minimal: min,
                        first: (first_ctx.clone(), *first_state),
                        second: (ctx.clone(), *new_state),
                    });
                }
            }
        }
    }
    Ok(InvarianceReport { rules_checked: rules.len(), classes: classes.len(), conflicts })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn table_rows_are_symmetric_and_regular() {
        let mut count = [0usize; 12];
        for f in 0..12u8 {
            for &g in &FACE_TABLE[f as usize] {
                assert!(faces_adjacent(g, f), "{f} lists {g} but not conversely");
                count[g as usize] += 1;
            }
        }
        assert!(count.iter().all(|&c| c == 5));
    }

    #[test]
    fn pair_zero_one_is_identity() {
        assert_eq!(FacePermutation::from_pair(0, 1), Some(FacePermutation::IDENTITY));
        assert_eq!(enumerate_motions()[0], FacePermutation::IDENTITY);
    }

    #[test]
    fn non_adjacent_pair_is_rejected() {
        assert_eq!(FacePermutation::from_pair(0, 11), None);
        assert_eq!(FacePermutation::from_pair(0, 0), None);
    }

    #[test]
    fn motions_fix_their_defining_pair() {
        for m in enumerate_motions() {
            let f0 = m.image(0);
            assert!(faces_adjacent(f0, m.image(1)));
            assert_eq!(FacePermutation::from_pair(f0, m.image(1)), Some(m));
        }
    }

    #[test]
    fn cyclic_rotation_group_law() {
        let g = RotationGroup::for_grid(GridKind::Pentagrid);
        let ctx = RuleContext::new(0, vec![1, 2, 3, 4, 5]);
        for k in 0..5 {
            for m in 0..5 {
                let a = rotated_context(&rotated_context(&ctx, g.perm(k)).unwrap(), g.perm(m)).unwrap();
                let b = rotated_context(&ctx, g.perm((k + m) % 5)).unwrap();
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn pentagrid_minimal_form_example() {
        // b < y: (b,b,b,y,b) → (b,b,b,b,y)
        let g = RotationGroup::for_grid(GridKind::Pentagrid);
        let ctx = RuleContext::new(0, vec![0, 0, 0, 1, 0]);
        assert_eq!(minimal_form(&ctx, &g).unwrap().neighbors, vec![0, 0, 0, 0, 1]);
    }

    #[test]
    fn uniform_context_is_fixed() {
        for grid in GridKind::ALL {
            let g = RotationGroup::for_grid(grid);
            let ctx = RuleContext::new(2, vec![1; grid.arity()]);
            for p in g.perms() {
                assert_eq!(rotated_context(&ctx, p).unwrap(), ctx);
            }
            assert_eq!(minimal_form(&ctx, &g).unwrap(), ctx);
        }
    }

    #[test]
    fn arity_mismatch_is_an_error() {
        let g = RotationGroup::for_grid(GridKind::Heptagrid);
        let ctx = RuleContext::new(0, vec![0; 5]);
        assert_eq!(minimal_form(&ctx, &g), Err(ArityMismatch { expected: 7, got: 5 }));
    }

    #[test]
    fn flipped_rotated_variant_is_one_conflict() {
        let g = RotationGroup::for_grid(GridKind::Pentagrid);
        let base = RuleContext::new(1, vec![0, 1, 2, 0, 0]);
        let mut rules = vec![];
        for (i, p) in g.perms().iter().enumerate() {
            let out = if i == 3 { 0 } else { 1 };
            rules.push((rotated_context(&base, p).unwrap(), out));
        }
        rules.push((RuleContext::new(0, vec![0; 5]), 0));
        let report = check_rotation_invariance(&rules, &g).unwrap();
        assert_eq!(report.conflicts.len(), 1);
        assert_eq!(report.classes, 2);
    }

    #[test]
    fn empty_rule_list_is_ok() {
        let g = RotationGroup::for_grid(GridKind::Dodecagrid);
        assert!(check_rotation_invariance(&[], &g).unwrap().is_ok());
    }
}
