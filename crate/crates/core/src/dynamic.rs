//! Dynamic regions, cores, and combinatorial chain complexes.
//!
//! The sweep class of a loop unfolds onto an annulus or Möbius band. Its
//! two-cells ("region sectors") are recovered combinatorially as
//! equivalence classes of strum sites: two sites are identified when a
//! strum at a disjoint site carries one to the other. A core is a set of
//! region sectors whose swept loop set is closed and bounded by loops of
//! the plain graph; each core carries an F2 chain complex whose
//! differential counts single strums across red sectors and single
//! unstrums at blue sectors.

use crate::homology::F2Matrix;
use crate::model::{Color, SectorId, VeeringComplex};
use crate::states::{GEdge, MultiLoop, Occurrence};
use crate::sweep::{sweep_class, SweepClass, SweepError};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DynamicError {
    #[error("base loop must contain no diagonals")]
    BaseNotGOnly,
    #[error("base must be a single loop")]
    BaseNotALoop,
    #[error(transparent)]
    Sweep(#[from] SweepError),
    #[error("class is not sleek; a non-embedded member exists")]
    NotSleek { witness: MultiLoop },
    #[error("not a valid core")]
    InvalidCore,
    #[error("cores are not nested")]
    NotNested,
    #[error("no single-sector growth step exists")]
    NoSingleSectorStep,
}

/// One strum site together with its two resolutions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SiteInfo {
    pub member: usize,
    pub site: Occurrence,
    pub left_to: usize,
    pub right_to: usize,
}

/// A two-cell of the unfolded region: an equivalence class of strum sites,
/// all lying over the same sector of the branched surface.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegionCell {
    pub sector: SectorId,
    pub sites: Vec<SiteInfo>,
}

/// The unfolded annulus/Möbius-band structure of a sweep class.
#[derive(Debug, Clone)]
pub struct DynamicRegion {
    pub class: SweepClass,
    /// Index of the base loop among the members.
    pub base: usize,
    pub cells: Vec<RegionCell>,
    site_cell: BTreeMap<(usize, Occurrence), usize>,
}

/// A core: a set of region cells. The empty set is the core consisting of
/// the base loop alone.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Core {
    pub cells: BTreeSet<usize>,
}

impl Core {
    pub fn base() -> Core {
        Core {
            cells: BTreeSet::new(),
        }
    }
}

/// F2 chain complex on an ordered generator list; `boundary[(i, j)]` is the
/// coefficient of generator `i` in the differential of generator `j`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChainComplexF2 {
    pub generators: Vec<MultiLoop>,
    pub boundary: F2Matrix,
}

impl ChainComplexF2 {
    pub fn d_squared_is_zero(&self) -> bool {
        self.boundary.mul(&self.boundary).is_zero()
    }
}

/// Unfold the sweep class of a plain-graph loop into its region: cells are
/// strum sites joined by the commutation closure (sites carried into each
/// other by strums at disjoint sites are the same cell).
pub fn build_dynamic_region(
    cx: &VeeringComplex,
    c0: &MultiLoop,
    cap: usize,
) -> Result<DynamicRegion, DynamicError> {
    if !c0.is_g_only() {
        return Err(DynamicError::BaseNotGOnly);
    }
    if c0.loops().len() != 1 {
        return Err(DynamicError::BaseNotALoop);
    }
    let class = sweep_class(cx, c0, cap)?;
    let base = class.index_of(c0).expect("base is a member");
    Ok(region_from_class(cx, class, base))
}

fn region_from_class(cx: &VeeringComplex, class: SweepClass, base: usize) -> DynamicRegion {
    // Collect sites and their resolutions.
    let mut keys: Vec<(usize, Occurrence)> = Vec::new();
    for (i, m) in class.members.iter().enumerate() {
        for site in m.diagonal_sites() {
            keys.push((i, site));
        }
    }
    let key_index: BTreeMap<(usize, Occurrence), usize> =
        keys.iter().enumerate().map(|(n, &k)| (k, n)).collect();

    let mut parent: Vec<usize> = (0..keys.len()).collect();
    fn find(parent: &mut Vec<usize>, x: usize) -> usize {
        if parent[x] != x {
            let r = find(parent, parent[x]);
            parent[x] = r;
        }
        parent[x]
    }
    let union = |parent: &mut Vec<usize>, a: usize, b: usize| {
        let (ra, rb) = (find(parent, a), find(parent, b));
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    };

    let mut resolutions: BTreeMap<(usize, Occurrence), (usize, usize)> = BTreeMap::new();
    for (i, m) in class.members.iter().enumerate() {
        let sites = m.diagonal_sites();
        for &site in &sites {
            let mut targets = [0usize; 2];
            for (k, side) in [crate::model::Side::Left, crate::model::Side::Right]
                .into_iter()
                .enumerate()
            {
                let (result, transport) =
                    crate::sweep::strum_with_map(cx, m, site, side).expect("site is a diagonal");
                let to = class.index_of(&result).expect("closure is complete");
                targets[k] = to;
                // Identify every other site with its image in the result.
                for &other in &sites {
                    if other == site {
                        continue;
                    }
                    let moved = transport[&other];
                    union(&mut parent, key_index[&(i, other)], key_index[&(to, moved)]);
                }
            }
            resolutions.insert((i, site), (targets[0], targets[1]));
        }
    }

    // Group into cells, ordered by smallest site key.
    let mut groups: BTreeMap<usize, Vec<(usize, Occurrence)>> = BTreeMap::new();
    for (n, &k) in keys.iter().enumerate() {
        let r = find(&mut parent, n);
        groups.entry(r).or_default().push(k);
    }
    let mut cells = Vec::new();
    let mut site_cell = BTreeMap::new();
    for (_, group) in groups {
        let cell_idx = cells.len();
        let sector = match class.members[group[0].0].edge_at(group[0].1) {
            GEdge::Diag(s) => s,
            GEdge::Graph(_) => unreachable!("sites are diagonal occurrences"),
        };
        let mut sites = Vec::new();
        for k in group {
            debug_assert_eq!(class.members[k.0].edge_at(k.1), GEdge::Diag(sector));
            let (l, r) = resolutions[&k];
            sites.push(SiteInfo {
                member: k.0,
                site: k.1,
                left_to: l,
                right_to: r,
            });
            site_cell.insert(k, cell_idx);
        }
        cells.push(RegionCell { sector, sites });
    }

    DynamicRegion {
        class,
        base,
        cells,
        site_cell,
    }
}

impl DynamicRegion {
    pub fn cell_of(&self, member: usize, site: Occurrence) -> usize {
        self.site_cell[&(member, site)]
    }

    /// Cells touched by the diagonals of a member.
    fn member_cells(&self, member: usize) -> BTreeSet<usize> {
        self.class.members[member]
            .diagonal_sites()
            .into_iter()
            .map(|s| self.cell_of(member, s))
            .collect()
    }

    /// Loops reachable from the base by moves sweeping only cells of the
    /// core, every diagonal they carry lying inside the core.
    pub fn loops_in_core(&self, core: &Core) -> Vec<usize> {
        if !self.member_cells(self.base).is_subset(&core.cells) {
            return Vec::new();
        }
        let mut moves_from: BTreeMap<usize, Vec<&crate::sweep::MoveEdge>> = BTreeMap::new();
        let mut moves_to: BTreeMap<usize, Vec<&crate::sweep::MoveEdge>> = BTreeMap::new();
        for mv in &self.class.moves {
            moves_from.entry(mv.from).or_default().push(mv);
            moves_to.entry(mv.to).or_default().push(mv);
        }
        let mut seen = BTreeSet::new();
        let mut queue = VecDeque::new();
        seen.insert(self.base);
        queue.push_back(self.base);
        while let Some(m) = queue.pop_front() {
            // Strums of m stay inside the core automatically.
            for mv in moves_from.get(&m).into_iter().flatten() {
                if seen.insert(mv.to) {
                    queue.push_back(mv.to);
                }
            }
            // Unstrums re-introduce a diagonal; allowed when its cell is in.
            for mv in moves_to.get(&m).into_iter().flatten() {
                if core.cells.contains(&self.cell_of(mv.from, mv.site)) && seen.insert(mv.from) {
                    queue.push_back(mv.from);
                }
            }
        }
        seen.into_iter().collect()
    }

    /// Operational core validity: the base is swept, and every in-core cell
    /// is realized, i.e. some loop through its diagonal is reachable. A
    /// loop through an in-core diagonal may still leave the core elsewhere
    /// (the boundary of a core zigzags across a circumferential row one
    /// cell at a time), so not every site of a cell needs to be swept.
    pub fn is_valid_core(&self, core: &Core) -> bool {
        if core.cells.iter().any(|&c| c >= self.cells.len()) {
            return false;
        }
        let in_loops: BTreeSet<usize> = self.loops_in_core(core).into_iter().collect();
        if !in_loops.contains(&self.base) {
            return false;
        }
        core.cells.iter().all(|&ci| {
            self.cells[ci]
                .sites
                .iter()
                .any(|s| in_loops.contains(&s.member))
        })
    }
}

/// The core containing every region sector.
pub fn maximal_core(region: &DynamicRegion) -> Core {
    Core {
        cells: (0..region.cells.len()).collect(),
    }
}

/// A chain of cores from `from` to `to`, each adding exactly one region
/// sector; empty when the cores coincide.
pub fn core_growth_sequence(
    region: &DynamicRegion,
    from: &Core,
    to: &Core,
) -> Result<Vec<Core>, DynamicError> {
    if !from.cells.is_subset(&to.cells) {
        return Err(DynamicError::NotNested);
    }
    if !(region.is_valid_core(from) && region.is_valid_core(to)) {
        return Err(DynamicError::InvalidCore);
    }
    let mut seq = Vec::new();
    let mut cur = from.clone();
    while cur != *to {
        let next = to
            .cells
            .difference(&cur.cells)
            .copied()
            .map(|c| {
                let mut cells = cur.cells.clone();
                cells.insert(c);
                Core { cells }
            })
            .find(|cand| region.is_valid_core(cand))
            .ok_or(DynamicError::NoSingleSectorStep)?;
        cur = next.clone();
        seq.push(next);
    }
    Ok(seq)
}

fn differential(
    cx: &VeeringComplex,
    class: &SweepClass,
    generators: &[usize],
    in_core: impl Fn(usize, Occurrence) -> bool,
) -> F2Matrix {
    let index: BTreeMap<usize, usize> = generators
        .iter()
        .enumerate()
        .map(|(i, &m)| (m, i))
        .collect();
    let mut mat = F2Matrix::zero(generators.len(), generators.len());
    for mv in &class.moves {
        match cx.sector_color(mv.sector) {
            // Strums of a generator across a red sector.
            Color::Red => {
                if let (Some(&col), Some(&row)) = (index.get(&mv.from), index.get(&mv.to)) {
                    mat.flip(row, col);
                }
            }
            // Unstrums of a generator at a blue sector, staying in the core.
            Color::Blue => {
                if let (Some(&col), Some(&row)) = (index.get(&mv.to), index.get(&mv.from)) {
                    if in_core(mv.from, mv.site) {
                        mat.flip(row, col);
                    }
                }
            }
        }
    }
    mat
}

/// The chain complex of a core: generators are the loops swept inside it,
/// the differential counts single strums across red sectors and single
/// unstrums at blue sectors, mod 2 after normalization.
pub fn cc_complex(
    cx: &VeeringComplex,
    region: &DynamicRegion,
    core: &Core,
) -> Result<ChainComplexF2, DynamicError> {
    if !region.is_valid_core(core) {
        return Err(DynamicError::InvalidCore);
    }
    let gens = region.loops_in_core(core);
    let boundary = differential(cx, &region.class, &gens, |m, s| {
        core.cells.contains(&region.cell_of(m, s))
    });
    Ok(ChainComplexF2 {
        generators: gens
            .into_iter()
            .map(|i| region.class.members[i].clone())
            .collect(),
        boundary,
    })
}

/// The chain complex on all members of a sleek class, the strum/unstrum
/// differential applied across all component loops. Refuses non-sleek
/// classes.
pub fn cc_multiloop_complex(
    cx: &VeeringComplex,
    class: &SweepClass,
) -> Result<ChainComplexF2, DynamicError> {
    if let (false, Some(w)) = class.sleekness(cx) {
        return Err(DynamicError::NotSleek { witness: w.clone() });
    }
    let gens: Vec<usize> = (0..class.members.len()).collect();
    let boundary = differential(cx, class, &gens, |_, _| true);
    Ok(ChainComplexF2 {
        generators: class.members.clone(),
        boundary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets;
    use crate::homology::homology_dim;
    use crate::model::EdgeId;
    use crate::states::Loop;

    fn gloop(ids: &[u32]) -> MultiLoop {
        MultiLoop::new(vec![Loop::new(
            ids.iter().map(|&x| GEdge::Graph(EdgeId(x))).collect(),
        )])
    }

    #[test]
    fn singleton_class_has_empty_region() {
        let cx = datasets::fig8();
        let region = build_dynamic_region(&cx, &gloop(&[0, 2]), 1000).unwrap();
        assert_eq!(region.cells.len(), 0);
        assert_eq!(region.class.members.len(), 1);
        let core = maximal_core(&region);
        let cc = cc_complex(&cx, &region, &core).unwrap();
        assert_eq!(cc.generators.len(), 1);
        assert!(cc.boundary.is_zero());
        assert_eq!(homology_dim(&cc).unwrap(), 1);
    }

    #[test]
    fn coherent_class_region_has_two_cells() {
        let cx = datasets::fig8();
        let region = build_dynamic_region(&cx, &gloop(&[0, 3, 1, 3]), 1000).unwrap();
        assert_eq!(region.class.members.len(), 5);
        assert_eq!(region.cells.len(), 2);
        // Both cells lie over sector 0 of the branched surface.
        assert!(region
            .cells
            .iter()
            .all(|c| c.sector == crate::model::SectorId(0)));
        let max = maximal_core(&region);
        assert!(region.is_valid_core(&max));
        let cc = cc_complex(&cx, &region, &max).unwrap();
        assert_eq!(cc.generators.len(), 5);
        assert!(cc.d_squared_is_zero());
        assert_eq!(homology_dim(&cc).unwrap(), 1);
    }

    #[test]
    fn growth_keeps_homology_constant() {
        let cx = datasets::fig8();
        let region = build_dynamic_region(&cx, &gloop(&[0, 3, 1, 3]), 1000).unwrap();
        let base = Core::base();
        let max = maximal_core(&region);
        let seq = core_growth_sequence(&region, &base, &max).unwrap();
        assert_eq!(seq.len(), region.cells.len());
        let mut dims = vec![homology_dim(&cc_complex(&cx, &region, &base).unwrap()).unwrap()];
        for core in &seq {
            assert!(region.is_valid_core(core));
            dims.push(homology_dim(&cc_complex(&cx, &region, core).unwrap()).unwrap());
        }
        assert!(dims.windows(2).all(|w| w[0] == w[1]));
        assert_eq!(dims[0], 1);
    }

    #[test]
    fn growth_requires_nested_valid_cores() {
        let cx = datasets::fig8();
        let region = build_dynamic_region(&cx, &gloop(&[0, 3, 1, 3]), 1000).unwrap();
        let max = maximal_core(&region);
        assert!(matches!(
            core_growth_sequence(&region, &max, &Core::base()),
            Err(DynamicError::NotNested)
        ));
        let bogus = Core {
            cells: [99usize].into_iter().collect(),
        };
        assert!(matches!(
            core_growth_sequence(&region, &Core::base(), &bogus),
            Err(DynamicError::InvalidCore)
        ));
    }

    #[test]
    fn empty_growth_for_equal_cores() {
        let cx = datasets::fig8();
        let region = build_dynamic_region(&cx, &gloop(&[0, 2]), 1000).unwrap();
        let max = maximal_core(&region);
        assert!(core_growth_sequence(&region, &max, &max)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn region_is_representative_independent() {
        let cx = datasets::fig8();
        let region1 = build_dynamic_region(&cx, &gloop(&[0, 3, 1, 3]), 1000).unwrap();
        let g_only: Vec<MultiLoop> = region1
            .class
            .members
            .iter()
            .filter(|m| m.is_g_only())
            .cloned()
            .collect();
        assert!(g_only.len() >= 2);
        let canon = |r: &DynamicRegion| -> BTreeSet<BTreeSet<(usize, Occurrence)>> {
            r.cells
                .iter()
                .map(|c| c.sites.iter().map(|s| (s.member, s.site)).collect())
                .collect()
        };
        for other in &g_only {
            let region2 = build_dynamic_region(&cx, other, 1000).unwrap();
            assert_eq!(region2.class.members, region1.class.members);
            assert_eq!(canon(&region2), canon(&region1));
        }
    }

    #[test]
    fn identification_matches_pairwise_fixpoint() {
        // Independent re-derivation of the cells: repeatedly merge site
        // classes related by a single strum at a disjoint site, scanning
        // all pairs until stable.
        let cx = datasets::fig8();
        let (xtop, _) = crate::states::canonical_states(&cx);
        let m = crate::states::state_multiloop(&cx, &xtop).unwrap();
        let class = crate::sweep::sweep_class(&cx, &m, 100_000).unwrap();
        let region = region_from_class(&cx, class.clone(), 0);

        let mut sets: Vec<BTreeSet<(usize, Occurrence)>> = Vec::new();
        for (i, mem) in class.members.iter().enumerate() {
            for s in mem.diagonal_sites() {
                sets.push([(i, s)].into_iter().collect());
            }
        }
        'stable: loop {
            for (i, mem) in class.members.iter().enumerate() {
                let sites = mem.diagonal_sites();
                for &site in &sites {
                    for side in [crate::model::Side::Left, crate::model::Side::Right] {
                        let (result, transport) =
                            crate::sweep::strum_with_map(&cx, mem, site, side).unwrap();
                        let to = class.index_of(&result).unwrap();
                        for &other in &sites {
                            if other == site {
                                continue;
                            }
                            let a = sets.iter().position(|s| s.contains(&(i, other))).unwrap();
                            let b = sets
                                .iter()
                                .position(|s| s.contains(&(to, transport[&other])))
                                .unwrap();
                            if a != b {
                                let moved = sets.remove(a.max(b));
                                sets[a.min(b)].extend(moved);
                                continue 'stable;
                            }
                        }
                    }
                }
            }
            break;
        }
        let fixpoint: BTreeSet<BTreeSet<(usize, Occurrence)>> = sets.into_iter().collect();
        let built: BTreeSet<BTreeSet<(usize, Occurrence)>> = region
            .cells
            .iter()
            .map(|c| c.sites.iter().map(|s| (s.member, s.site)).collect())
            .collect();
        assert_eq!(fixpoint, built);
    }

    #[test]
    fn multiloop_complex_refuses_non_sleek_classes() {
        let cx = datasets::fig8();
        let m = MultiLoop::new(vec![Loop::new(vec![
            GEdge::Diag(crate::model::SectorId(0)),
            GEdge::Graph(EdgeId(3)),
        ])]);
        let class = crate::sweep::sweep_class(&cx, &m, 1000).unwrap();
        assert!(matches!(
            cc_multiloop_complex(&cx, &class),
            Err(DynamicError::NotSleek { .. })
        ));
    }

    #[test]
    fn empty_class_complex_is_one_dimensional() {
        let cx = datasets::fig8();
        let class = crate::sweep::sweep_class(&cx, &MultiLoop::empty(), 10).unwrap();
        let cc = cc_multiloop_complex(&cx, &class).unwrap();
        assert_eq!(cc.generators.len(), 1);
        assert_eq!(homology_dim(&cc).unwrap(), 1);
    }
}
