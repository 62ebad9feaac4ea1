//! Strum moves and sweep equivalence.
//!
//! A strum replaces a diagonal occurrence in a loop by one of the two
//! boundary paths of its sector; an unstrum is the inverse. Sweep
//! equivalence is the closure under both. This module also hosts vertex
//! resolutions (the combinatorial shadow of pants resolutions), cycle
//! representatives, and the eastward/westward analysis of branch loops.

use crate::model::{EdgeId, SectorId, Side, VeeringComplex};
use crate::states::{canonical_states, state_multiloop, GEdge, GPlus, Loop, MultiLoop, Occurrence};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("cap of {cap} multi-loops exceeded during closure")]
    CapExceeded {
        cap: usize,
        partial: Vec<MultiLoop>,
        frontier: Vec<MultiLoop>,
    },
    #[error("occurrence ({0}, {1}) is not a diagonal", .site.loop_idx, .site.pos)]
    NotADiagonal { site: Occurrence },
    #[error("no boundary path of sector {sector} starts at loop {loop_idx} position {pos}")]
    NotABoundaryPath {
        sector: SectorId,
        loop_idx: usize,
        pos: usize,
    },
    #[error("multi-loop contains diagonal edges")]
    DiagonalsPresent,
    #[error("cycle vector must be non-negative with zero boundary")]
    BadCycleVector,
    #[error("the loops do not share the given vertex occurrence")]
    VertexMismatch,
    #[error("the branch loops admit no eastward/westward bipartition")]
    NoBipartition,
}

/// Replace the diagonal at `site` by the chosen boundary path of its
/// sector. The result is renormalized.
pub fn strum(
    cx: &VeeringComplex,
    m: &MultiLoop,
    site: Occurrence,
    side: Side,
) -> Result<MultiLoop, SweepError> {
    strum_with_map(cx, m, site, side).map(|(m, _)| m)
}

/// Strum, also reporting where every other edge occurrence of `m` lands in
/// the normalized result.
pub fn strum_with_map(
    cx: &VeeringComplex,
    m: &MultiLoop,
    site: Occurrence,
    side: Side,
) -> Result<(MultiLoop, BTreeMap<Occurrence, Occurrence>), SweepError> {
    let GEdge::Diag(sector) = m.edge_at(site) else {
        return Err(SweepError::NotADiagonal { site });
    };
    let path: Vec<GEdge> = cx
        .boundary_path(sector, side)
        .into_iter()
        .map(GEdge::Graph)
        .collect();
    let plen = path.len();

    let mut raw: Vec<Vec<GEdge>> = m.loops().iter().map(|l| l.edges().to_vec()).collect();
    raw[site.loop_idx].splice(site.pos..site.pos + 1, path);

    let (result, rawmap) = MultiLoop::from_raw_with_map(raw);
    let mut transport = BTreeMap::new();
    for (li, l) in m.loops().iter().enumerate() {
        for pos in 0..l.len() {
            let occ = Occurrence { loop_idx: li, pos };
            if occ == site {
                continue;
            }
            let pre = if li == site.loop_idx && pos > site.pos {
                pos + plen - 1
            } else {
                pos
            };
            transport.insert(occ, rawmap[li][pre]);
        }
    }
    debug_assert!(GPlus::new(cx).is_valid(&result));
    debug_assert!(transport
        .iter()
        .all(|(a, b)| m.edge_at(*a) == result.edge_at(*b)));
    Ok((result, transport))
}

/// A full left or right boundary path occurring contiguously in a loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct UnstrumSite {
    pub loop_idx: usize,
    pub start: usize,
    pub sector: SectorId,
    pub side: Side,
}

fn path_matches(l: &Loop, start: usize, path: &[EdgeId]) -> bool {
    let n = l.len();
    if path.len() > n {
        return false;
    }
    path.iter()
        .enumerate()
        .all(|(k, &e)| l.edges()[(start + k) % n] == GEdge::Graph(e))
}

/// All unstrum sites of a multi-loop, in canonical order.
pub fn unstrum_sites(cx: &VeeringComplex, m: &MultiLoop) -> Vec<UnstrumSite> {
    let mut out = Vec::new();
    for (li, l) in m.loops().iter().enumerate() {
        for start in 0..l.len() {
            for s in &cx.sectors {
                for side in [Side::Left, Side::Right] {
                    if path_matches(l, start, &cx.boundary_path(s.id, side)) {
                        out.push(UnstrumSite {
                            loop_idx: li,
                            start,
                            sector: s.id,
                            side,
                        });
                    }
                }
            }
        }
    }
    out
}

/// Replace the full boundary path at `site` by the sector's diagonal.
pub fn unstrum(
    cx: &VeeringComplex,
    m: &MultiLoop,
    site: UnstrumSite,
) -> Result<MultiLoop, SweepError> {
    let l = &m.loops()[site.loop_idx];
    let path = cx.boundary_path(site.sector, site.side);
    if !path_matches(l, site.start, &path) {
        return Err(SweepError::NotABoundaryPath {
            sector: site.sector,
            loop_idx: site.loop_idx,
            pos: site.start,
        });
    }
    let n = l.len();
    let mut edges = vec![GEdge::Diag(site.sector)];
    for k in path.len()..n {
        edges.push(l.edges()[(site.start + k) % n]);
    }
    let mut loops: Vec<Loop> = m
        .loops()
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != site.loop_idx)
        .map(|(_, l)| l.clone())
        .collect();
    loops.push(Loop::new(edges));
    let result = MultiLoop::new(loops);
    debug_assert!(GPlus::new(cx).is_valid(&result));
    Ok(result)
}

/// One strum move inside a sweep class, oriented from the loop carrying the
/// diagonal to its resolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MoveEdge {
    pub from: usize,
    pub site: Occurrence,
    pub sector: SectorId,
    pub side: Side,
    pub to: usize,
}

/// The finite set of multi-loops sweep-equivalent to a base, together with
/// the strum moves connecting them.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepClass {
    pub base: usize,
    pub members: Vec<MultiLoop>,
    pub moves: Vec<MoveEdge>,
}

impl SweepClass {
    pub fn index_of(&self, m: &MultiLoop) -> Option<usize> {
        self.members.binary_search(m).ok()
    }

    pub fn contains(&self, m: &MultiLoop) -> bool {
        self.index_of(m).is_some()
    }

    /// Sleek means every member is embedded; returns a witness otherwise.
    pub fn sleekness<'a>(&'a self, cx: &VeeringComplex) -> (bool, Option<&'a MultiLoop>) {
        let gp = GPlus::new(cx);
        match self.members.iter().find(|m| !gp.is_embedded(m)) {
            Some(w) => (false, Some(w)),
            None => (true, None),
        }
    }
}

fn neighbors(cx: &VeeringComplex, m: &MultiLoop) -> Vec<MultiLoop> {
    let mut out = Vec::new();
    for site in m.diagonal_sites() {
        for side in [Side::Left, Side::Right] {
            out.push(strum(cx, m, site, side).expect("site is a diagonal"));
        }
    }
    for site in unstrum_sites(cx, m) {
        out.push(unstrum(cx, m, site).expect("site was just enumerated"));
    }
    out
}

/// Breadth-first closure of a multi-loop under strums and unstrums.
/// Complete if its size stays within `cap`.
pub fn sweep_class(
    cx: &VeeringComplex,
    m: &MultiLoop,
    cap: usize,
) -> Result<SweepClass, SweepError> {
    let mut visited = BTreeSet::new();
    let mut queue = VecDeque::new();
    visited.insert(m.clone());
    queue.push_back(m.clone());
    while let Some(cur) = queue.pop_front() {
        for n in neighbors(cx, &cur) {
            if !visited.contains(&n) {
                if visited.len() >= cap {
                    return Err(SweepError::CapExceeded {
                        cap,
                        partial: visited.into_iter().collect(),
                        frontier: queue.into_iter().collect(),
                    });
                }
                visited.insert(n.clone());
                queue.push_back(n);
            }
        }
    }
    let members: Vec<MultiLoop> = visited.into_iter().collect();
    let base = members.binary_search(m).expect("base is a member");
    let mut moves = Vec::new();
    for (i, member) in members.iter().enumerate() {
        for site in member.diagonal_sites() {
            let GEdge::Diag(sector) = member.edge_at(site) else {
                unreachable!("sites are diagonal occurrences");
            };
            for side in [Side::Left, Side::Right] {
                let r = strum(cx, member, site, side).expect("site is a diagonal");
                let to = members.binary_search(&r).expect("closure is complete");
                moves.push(MoveEdge {
                    from: i,
                    site,
                    sector,
                    side,
                    to,
                });
            }
        }
    }
    Ok(SweepClass {
        base,
        members,
        moves,
    })
}

/// True iff every multi-loop sweep-equivalent to `m` is embedded. On false
/// the witness is a non-embedded member; the search stops early.
pub fn is_sleek(
    cx: &VeeringComplex,
    m: &MultiLoop,
    cap: usize,
) -> Result<(bool, Option<MultiLoop>), SweepError> {
    let gp = GPlus::new(cx);
    if !gp.is_embedded(m) {
        return Ok((false, Some(m.clone())));
    }
    let mut visited = BTreeSet::new();
    let mut queue = VecDeque::new();
    visited.insert(m.clone());
    queue.push_back(m.clone());
    while let Some(cur) = queue.pop_front() {
        for n in neighbors(cx, &cur) {
            if !visited.contains(&n) {
                if !gp.is_embedded(&n) {
                    return Ok((false, Some(n)));
                }
                if visited.len() >= cap {
                    return Err(SweepError::CapExceeded {
                        cap,
                        partial: visited.into_iter().collect(),
                        frontier: queue.into_iter().collect(),
                    });
                }
                visited.insert(n.clone());
                queue.push_back(n);
            }
        }
    }
    Ok((true, None))
}

/// Concatenation of two loops at a shared vertex occurrence: rotate each to
/// start at the occurrence and splice.
pub fn concatenate(
    cx: &VeeringComplex,
    c1: &Loop,
    p1: usize,
    c2: &Loop,
    p2: usize,
) -> Result<Loop, SweepError> {
    let gp = GPlus::new(cx);
    let v1 = gp.tail(c1.edges()[p1]);
    let v2 = gp.tail(c2.edges()[p2]);
    if v1 != v2 {
        return Err(SweepError::VertexMismatch);
    }
    let mut edges = Vec::with_capacity(c1.len() + c2.len());
    for k in 0..c1.len() {
        edges.push(c1.edges()[(p1 + k) % c1.len()]);
    }
    for k in 0..c2.len() {
        edges.push(c2.edges()[(p2 + k) % c2.len()]);
    }
    Ok(Loop::new(edges))
}

/// All multi-loops one resolution away from `m`: merge two loops at a
/// shared vertex, or split one loop at a revisited vertex.
pub fn vertex_resolutions(
    cx: &VeeringComplex,
    m: &MultiLoop,
) -> Result<BTreeSet<MultiLoop>, SweepError> {
    if !m.is_g_only() {
        return Err(SweepError::DiagonalsPresent);
    }
    let gp = GPlus::new(cx);
    let mut out = BTreeSet::new();
    let loops = m.loops();
    // Merges.
    for i in 0..loops.len() {
        for j in i + 1..loops.len() {
            for p in 0..loops[i].len() {
                for q in 0..loops[j].len() {
                    if gp.tail(loops[i].edges()[p]) == gp.tail(loops[j].edges()[q]) {
                        let merged = concatenate(cx, &loops[i], p, &loops[j], q)?;
                        let mut rest: Vec<Loop> = loops
                            .iter()
                            .enumerate()
                            .filter(|(k, _)| *k != i && *k != j)
                            .map(|(_, l)| l.clone())
                            .collect();
                        rest.push(merged);
                        out.insert(MultiLoop::new(rest));
                    }
                }
            }
        }
    }
    // Splits.
    for (i, l) in loops.iter().enumerate() {
        for p in 0..l.len() {
            for q in p + 1..l.len() {
                if gp.tail(l.edges()[p]) == gp.tail(l.edges()[q]) {
                    let a: Vec<GEdge> = (p..q).map(|k| l.edges()[k]).collect();
                    let b: Vec<GEdge> = (q..q + l.len() - (q - p))
                        .map(|k| l.edges()[k % l.len()])
                        .collect();
                    let mut rest: Vec<Loop> = loops
                        .iter()
                        .enumerate()
                        .filter(|(k, _)| *k != i)
                        .map(|(_, l)| l.clone())
                        .collect();
                    rest.push(Loop::new(a));
                    rest.push(Loop::new(b));
                    out.insert(MultiLoop::new(rest));
                }
            }
        }
    }
    Ok(out)
}

/// All multi-loops with the given edge-multiplicity vector, enumerated by
/// exhausting the per-vertex bijections between incoming and outgoing edge
/// copies.
pub fn representatives_of_cycle(
    cx: &VeeringComplex,
    v: &[i64],
    cap: usize,
) -> Result<BTreeSet<MultiLoop>, SweepError> {
    assert_eq!(v.len(), cx.edges.len());
    if v.iter().any(|&x| x < 0) {
        return Err(SweepError::BadCycleVector);
    }
    for vertex in &cx.vertices {
        let inflow: i64 = cx.in_edge_positions(vertex.id).iter().map(|&p| v[p]).sum();
        let outflow: i64 = cx.out_edge_positions(vertex.id).iter().map(|&p| v[p]).sum();
        if inflow != outflow {
            return Err(SweepError::BadCycleVector);
        }
    }

    // Copies of each edge, grouped by vertex.
    #[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
    struct Copy_ {
        edge_pos: usize,
        copy: i64,
    }
    let mut in_copies: Vec<Vec<Copy_>> = Vec::new();
    let mut out_copies: Vec<Vec<Copy_>> = Vec::new();
    for vertex in &cx.vertices {
        let mut ins = Vec::new();
        for &p in cx.in_edge_positions(vertex.id) {
            for c in 0..v[p] {
                ins.push(Copy_ {
                    edge_pos: p,
                    copy: c,
                });
            }
        }
        let mut outs = Vec::new();
        for &p in cx.out_edge_positions(vertex.id) {
            for c in 0..v[p] {
                outs.push(Copy_ {
                    edge_pos: p,
                    copy: c,
                });
            }
        }
        ins.sort();
        outs.sort();
        in_copies.push(ins);
        out_copies.push(outs);
    }

    struct Search {
        result: BTreeSet<MultiLoop>,
        examined: usize,
        cap: usize,
    }
    let mut search = Search {
        result: BTreeSet::new(),
        examined: 0,
        cap,
    };
    let mut perms: Vec<Vec<usize>> = in_copies
        .iter()
        .map(|ins| (0..ins.len()).collect())
        .collect();

    fn decompose(
        cx: &VeeringComplex,
        in_copies: &[Vec<Copy_>],
        out_copies: &[Vec<Copy_>],
        perms: &[Vec<usize>],
    ) -> MultiLoop {
        // successor of an out-copy: it arrives at the head of its edge,
        // where the bijection forwards it to the next out-copy.
        let mut all: BTreeSet<Copy_> = out_copies.iter().flatten().copied().collect();
        let mut loops = Vec::new();
        while let Some(&start) = all.iter().next() {
            let mut cur = start;
            let mut edges = Vec::new();
            loop {
                all.remove(&cur);
                edges.push(GEdge::Graph(cx.edges[cur.edge_pos].id));
                let head = cx.edges[cur.edge_pos].to;
                let vp = cx.vertex_position(head);
                let idx = in_copies[vp]
                    .binary_search(&cur)
                    .expect("every copy is an in-copy at its head");
                let next = out_copies[vp][perms[vp][idx]];
                if next == start {
                    break;
                }
                cur = next;
            }
            loops.push(Loop::new(edges));
        }
        MultiLoop::new(loops)
    }

    fn rec(
        cx: &VeeringComplex,
        vi: usize,
        in_copies: &[Vec<Copy_>],
        out_copies: &[Vec<Copy_>],
        perms: &mut Vec<Vec<usize>>,
        search: &mut Search,
    ) -> Result<(), SweepError> {
        if vi == in_copies.len() {
            search.examined += 1;
            if search.examined > search.cap {
                return Err(SweepError::CapExceeded {
                    cap: search.cap,
                    partial: search.result.iter().cloned().collect(),
                    frontier: Vec::new(),
                });
            }
            let m = if in_copies.iter().all(|c| c.is_empty()) {
                MultiLoop::empty()
            } else {
                decompose(cx, in_copies, out_copies, perms)
            };
            search.result.insert(m);
            if search.result.len() > search.cap {
                return Err(SweepError::CapExceeded {
                    cap: search.cap,
                    partial: search.result.iter().cloned().collect(),
                    frontier: Vec::new(),
                });
            }
            return Ok(());
        }
        let k = in_copies[vi].len();
        let mut perm: Vec<usize> = (0..k).collect();
        loop {
            perms[vi] = perm.clone();
            rec(cx, vi + 1, in_copies, out_copies, perms, search)?;
            if !next_permutation(&mut perm) {
                break;
            }
        }
        Ok(())
    }

    rec(cx, 0, &in_copies, &out_copies, &mut perms, &mut search)?;
    Ok(search.result)
}

fn next_permutation(p: &mut [usize]) -> bool {
    if p.len() < 2 {
        return false;
    }
    let mut i = p.len() - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = p.len() - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Eastward/westward labeling of the branch loops, when the two loops
/// through every vertex can be told apart.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BranchBipartition {
    /// Branch loops, sorted; labels index into this list.
    pub loops: Vec<Vec<EdgeId>>,
    pub east: Vec<usize>,
    pub west: Vec<usize>,
}

/// A 2-coloring of branch loops such that the two passes through every
/// vertex carry different labels, if one exists. Reported as one unordered
/// bipartition: the loop containing the smallest edge id is eastward.
pub fn orientability_bipartition(cx: &VeeringComplex) -> Option<BranchBipartition> {
    let loops = cx.branch_loops();
    let mut loop_of_edge: BTreeMap<EdgeId, usize> = BTreeMap::new();
    for (i, l) in loops.iter().enumerate() {
        for &e in l {
            loop_of_edge.insert(e, i);
        }
    }
    // Constraint edges: the two strand passes at each vertex differ.
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); loops.len()];
    for sm in &cx.smoothings {
        let a = loop_of_edge[&sm.pairs[0].0];
        let b = loop_of_edge[&sm.pairs[1].0];
        if a == b {
            return None;
        }
        adj[a].insert(b);
        adj[b].insert(a);
    }
    let mut label: Vec<Option<bool>> = vec![None; loops.len()];
    for start in 0..loops.len() {
        if label[start].is_some() {
            continue;
        }
        label[start] = Some(true);
        let mut stack = vec![start];
        while let Some(i) = stack.pop() {
            let li = label[i].unwrap();
            for &j in &adj[i] {
                match label[j] {
                    None => {
                        label[j] = Some(!li);
                        stack.push(j);
                    }
                    Some(lj) if lj == li => return None,
                    _ => {}
                }
            }
        }
    }
    // Canonicalize: loop 0 is eastward.
    let flip = label[0] == Some(false);
    let mut east = Vec::new();
    let mut west = Vec::new();
    for (i, l) in label.iter().enumerate() {
        let e = l.unwrap() != flip;
        if e {
            east.push(i);
        } else {
            west.push(i);
        }
    }
    Some(BranchBipartition { loops, east, west })
}

/// Sleekness census of same-label branch multi-loops.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SleekBranchReport {
    pub east_count: usize,
    pub west_count: usize,
    /// All unions of same-label branch loops, the empty union counted once.
    pub multiloop_count: usize,
    /// How many of them are embedded and sleek.
    pub sleek_count: usize,
    pub xtop_sleek: bool,
    /// sleek_count plus one when the all-top state's class is not sleek.
    pub lower_bound: usize,
}

/// Enumerate all unions of same-label branch loops, check each for
/// embeddedness and sleekness, and derive the homology lower bound.
pub fn sleek_branch_count(
    cx: &VeeringComplex,
    cap: usize,
) -> Result<SleekBranchReport, SweepError> {
    let bip = orientability_bipartition(cx).ok_or(SweepError::NoBipartition)?;
    let gp = GPlus::new(cx);
    let mut sleek_count = 0usize;
    let mut multiloop_count = 0usize;
    for (label, skip_empty) in [(&bip.east, false), (&bip.west, true)] {
        let n = label.len();
        for mask in 0..(1u64 << n) {
            if skip_empty && mask == 0 {
                continue;
            }
            multiloop_count += 1;
            let loops: Vec<Loop> = (0..n)
                .filter(|i| mask & (1 << i) != 0)
                .map(|i| {
                    Loop::new(
                        bip.loops[label[i]]
                            .iter()
                            .map(|&e| GEdge::Graph(e))
                            .collect(),
                    )
                })
                .collect();
            let m = MultiLoop::new(loops);
            if !gp.is_embedded(&m) {
                continue;
            }
            let (sleek, _) = is_sleek(cx, &m, cap)?;
            if sleek {
                sleek_count += 1;
            }
        }
    }
    let (xtop, _) = canonical_states(cx);
    let xtop_loop = state_multiloop(cx, &xtop).expect("all-top assignment is a state");
    let (xtop_sleek, _) = is_sleek(cx, &xtop_loop, cap)?;
    Ok(SleekBranchReport {
        east_count: bip.east.len(),
        west_count: bip.west.len(),
        multiloop_count,
        sleek_count,
        xtop_sleek,
        lower_bound: sleek_count + usize::from(!xtop_sleek),
    })
}
