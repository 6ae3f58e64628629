//! Reeb graph of the distance field, the ball tree, pruning, minimal models,
//! and tree energy.
//!
//! The sweep runs over event values (vertex distances): between consecutive
//! events the level-component structure is constant, so each slab midpoint
//! yields the arc cross-sections and the wide components at each event glue
//! consecutive slabs together.

use alloc::vec;
use alloc::vec::Vec;

use crate::complex::{EdgeId, FaceId, RawComplex, TwoComplex, VertexId};
use crate::homotopy::{Budgets, Oracle, Presentation, VerdictKind, Word};
use crate::metric::{DistanceField, RegionKind, Regions, UnionFind, VALUE_TOL};
use crate::systole::PointedSystole;

pub type NodeId = usize;
pub type ArcId = usize;

/// Cells of one wide level component at an event value.
#[derive(Clone, Debug, Default)]
pub struct ReebNode {
    pub value: f64,
    pub vertices: Vec<VertexId>,
    pub edges: Vec<EdgeId>,
    pub faces: Vec<FaceId>,
}

/// Cross-section cells of an arc within one event slab.
#[derive(Clone, Debug)]
pub struct SlabPiece {
    pub f0: f64,
    pub f1: f64,
    pub faces: Vec<FaceId>,
    pub iso_edges: Vec<EdgeId>,
}

/// Maximal interval of constant level-component structure.
#[derive(Clone, Debug)]
pub struct ReebArc {
    pub lo: NodeId,
    pub hi: NodeId,
    pub f0: f64,
    pub f1: f64,
    pub slabs: Vec<SlabPiece>,
}

impl ReebArc {
    pub fn len(&self) -> f64 {
        self.f1 - self.f0
    }
}

#[derive(Clone, Debug)]
pub struct ReebGraph {
    pub nodes: Vec<ReebNode>,
    pub arcs: Vec<ReebArc>,
    pub root: NodeId,
}

/// Per-cell local node index at one event value.
struct CellNodeMap {
    vertex: Vec<Option<usize>>,
    edge: Vec<Option<usize>>,
    face: Vec<Option<usize>>,
}

/// Components of the closed level set at an event value, including cells
/// whose value span merely touches it.
fn wide_components(x: &TwoComplex, f: &[f64], v: f64) -> (Vec<ReebNode>, CellNodeMap) {
    let nv = x.vertex_count();
    let ne = x.edges().len();
    let nf = x.faces().len();
    let vertex_in: Vec<bool> = (0..nv).map(|i| (f[i] - v).abs() <= VALUE_TOL).collect();
    let span = |cells: &[VertexId]| {
        let lo = cells.iter().map(|&c| f[c]).fold(f64::INFINITY, f64::min);
        let hi = cells.iter().map(|&c| f[c]).fold(f64::NEG_INFINITY, f64::max);
        lo <= v + VALUE_TOL && v <= hi + VALUE_TOL
    };
    let edge_in: Vec<bool> = x
        .edges()
        .iter()
        .map(|e| span(&[e.ends.0, e.ends.1]))
        .collect();
    let face_in: Vec<bool> = x
        .faces()
        .iter()
        .map(|fc| {
            let cs: Vec<VertexId> = fc.walk.iter().map(|d| d.start(x.edges())).collect();
            span(&cs)
        })
        .collect();

    let mut uf = UnionFind::new(nv + ne + nf);
    for (ei, e) in x.edges().iter().enumerate() {
        if edge_in[ei] {
            for w in [e.ends.0, e.ends.1] {
                if vertex_in[w] {
                    uf.union(nv + ei, w);
                }
            }
        }
    }
    for (fi, fc) in x.faces().iter().enumerate() {
        if face_in[fi] {
            for &e in &fc.edges {
                if edge_in[e] {
                    uf.union(nv + ne + fi, nv + e);
                }
            }
        }
    }

    let mut nodes: Vec<ReebNode> = Vec::new();
    let mut node_of_root: Vec<Option<usize>> = vec![None; nv + ne + nf];
    let mut map = CellNodeMap {
        vertex: vec![None; nv],
        edge: vec![None; ne],
        face: vec![None; nf],
    };
    let mut assign = |uf: &mut UnionFind, cell: usize, nodes: &mut Vec<ReebNode>| -> usize {
        let root = uf.find(cell);
        match node_of_root[root] {
            Some(id) => id,
            None => {
                nodes.push(ReebNode { value: v, ..Default::default() });
                node_of_root[root] = Some(nodes.len() - 1);
                nodes.len() - 1
            }
        }
    };
    for i in 0..nv {
        if vertex_in[i] {
            let id = assign(&mut uf, i, &mut nodes);
            nodes[id].vertices.push(i);
            map.vertex[i] = Some(id);
        }
    }
    for i in 0..ne {
        if edge_in[i] {
            let id = assign(&mut uf, nv + i, &mut nodes);
            nodes[id].edges.push(i);
            map.edge[i] = Some(id);
        }
    }
    for i in 0..nf {
        if face_in[i] {
            let id = assign(&mut uf, nv + ne + i, &mut nodes);
            nodes[id].faces.push(i);
            map.face[i] = Some(id);
        }
    }
    (nodes, map)
}

impl ReebGraph {
    /// Sweeps the distance field from below, tracking level components
    /// between consecutive vertex values.
    pub fn of_field(field: &DistanceField) -> ReebGraph {
        let x = field.complex();
        let f = field.vertex_values();
        let events = field.breakpoints();

        // Wide components per event.
        let mut event_nodes: Vec<Vec<ReebNode>> = Vec::with_capacity(events.len());
        let mut cell_node: Vec<CellNodeMap> = Vec::with_capacity(events.len());
        for &v in &events {
            let (nodes, map) = wide_components(x, f, v);
            event_nodes.push(nodes);
            cell_node.push(map);
        }

        // Global node ids.
        let mut node_offset = vec![0usize; events.len()];
        let mut nodes: Vec<ReebNode> = Vec::new();
        for (i, group) in event_nodes.iter().enumerate() {
            node_offset[i] = nodes.len();
            nodes.extend(group.iter().cloned());
        }

        // Slab components and their attachments.
        #[derive(Clone)]
        struct ProtoArc {
            lo: NodeId,
            hi: NodeId,
            slab: SlabPiece,
        }
        let mut protos: Vec<ProtoArc> = Vec::new();
        for i in 0..events.len().saturating_sub(1) {
            let (lo_v, hi_v) = (events[i], events[i + 1]);
            let mid = (lo_v + hi_v) / 2.0;
            let ls = field.level_set(mid);
            for comp in &ls.components {
                let faces = comp.faces.clone();
                let iso: Vec<EdgeId> = comp
                    .edges
                    .iter()
                    .copied()
                    .filter(|&e| x.edge_faces(e).is_empty())
                    .collect();
                // Attach through any cell: every crossed cell spans the slab.
                let lo_local = faces
                    .first()
                    .map(|&fc| cell_node[i].face[fc])
                    .or_else(|| iso.first().map(|&e| cell_node[i].edge[e]))
                    .flatten();
                let hi_local = faces
                    .first()
                    .map(|&fc| cell_node[i + 1].face[fc])
                    .or_else(|| iso.first().map(|&e| cell_node[i + 1].edge[e]))
                    .flatten();
                let (Some(lo_local), Some(hi_local)) = (lo_local, hi_local) else {
                    continue;
                };
                protos.push(ProtoArc {
                    lo: node_offset[i] + lo_local,
                    hi: node_offset[i + 1] + hi_local,
                    slab: SlabPiece { f0: lo_v, f1: hi_v, faces, iso_edges: iso },
                });
            }
        }

        // Contract pass-through nodes (exactly one arc below, one above).
        let mut below: Vec<Vec<usize>> = vec![Vec::new(); nodes.len()];
        let mut above: Vec<Vec<usize>> = vec![Vec::new(); nodes.len()];
        for (ai, a) in protos.iter().enumerate() {
            above[a.lo].push(ai);
            below[a.hi].push(ai);
        }
        let root_local = cell_node[0]
            .vertex
            .get(field.base())
            .copied()
            .flatten()
            .unwrap_or(0);
        let root = node_offset[0] + root_local;

        let mut merged_into: Vec<Option<usize>> = vec![None; protos.len()];
        let mut arcs: Vec<ReebArc> = Vec::new();
        let mut arc_of_proto: Vec<Option<ArcId>> = vec![None; protos.len()];
        for start in 0..protos.len() {
            if merged_into[start].is_some() {
                continue;
            }
            // Walk down to the chain's first proto.
            let mut first = start;
            loop {
                let lo = protos[first].lo;
                if lo != root && below[lo].len() == 1 && above[lo].len() == 1 {
                    let prev = below[lo][0];
                    if prev == first {
                        break;
                    }
                    first = prev;
                } else {
                    break;
                }
            }
            // Collect the chain upward.
            let mut chain = vec![first];
            loop {
                let hi = protos[*chain.last().unwrap()].hi;
                if hi != root && below[hi].len() == 1 && above[hi].len() == 1 {
                    chain.push(above[hi][0]);
                } else {
                    break;
                }
            }
            let id = arcs.len();
            for &p in &chain {
                merged_into[p] = Some(id);
                arc_of_proto[p] = Some(id);
            }
            arcs.push(ReebArc {
                lo: protos[chain[0]].lo,
                hi: protos[*chain.last().unwrap()].hi,
                f0: protos[chain[0]].slab.f0,
                f1: protos[*chain.last().unwrap()].slab.f1,
                slabs: chain.iter().map(|&p| protos[p].slab.clone()).collect(),
            });
        }

        ReebGraph { nodes, arcs, root }
    }

    /// First Betti number of the graph restricted to cells that appear in
    /// arcs or nodes reachable from the root (the graph is connected for a
    /// distance field).
    pub fn cycle_rank(&self) -> usize {
        let mut used: Vec<NodeId> = self
            .arcs
            .iter()
            .flat_map(|a| [a.lo, a.hi])
            .chain([self.root])
            .collect();
        used.sort_unstable();
        used.dedup();
        let e = self.arcs.len();
        let v = used.len();
        e + 1 - v.min(e + 1)
    }

    /// Area of the preimage of the given arcs over the value window
    /// `[w0, w1]`, by exact per-face sublevel clipping.
    pub fn preimage_area(&self, field: &DistanceField, arcs: &[ArcId], w0: f64, w1: f64) -> f64 {
        let mut total = 0.0;
        for &ai in arcs {
            for slab in &self.arcs[ai].slabs {
                let lo = slab.f0.max(w0);
                let hi = slab.f1.min(w1);
                if hi <= lo {
                    continue;
                }
                for &fc in &slab.faces {
                    total += field.clip_area(fc, hi) - field.clip_area(fc, lo);
                }
            }
        }
        total
    }

    /// Subgraph of the ball of radius `r` about the root image, returned as
    /// a rooted tree. `wrap_guard` supplies the pointed systole at the
    /// basepoint: when the ball already carries a noncontractible loop
    /// (upper bound at most 2r) the tree regime is broken even if the
    /// quotient graph stays acyclic, and the witness doubles as a systole
    /// upper bound.
    pub fn ball_tree(
        &self,
        r: f64,
        wrap_guard: Option<&PointedSystole>,
    ) -> Result<BallTree, CycleEvidence> {
        if let Some(ps) = wrap_guard {
            if ps.upper <= 2.0 * r + VALUE_TOL {
                return Err(CycleEvidence::BallWraps { loop_len: ps.upper, base: ps.base });
            }
        }
        let mut nodes: Vec<BallNode> = Vec::new();
        let mut node_id: Vec<Option<usize>> = vec![None; self.nodes.len()];
        for (ni, n) in self.nodes.iter().enumerate() {
            if n.value < r {
                node_id[ni] = Some(nodes.len());
                nodes.push(BallNode { kind: BallNodeKind::Event(ni), value: n.value });
            }
        }
        let mut edges: Vec<BallEdge> = Vec::new();
        let mut uf = UnionFind::new(self.arcs.len() + nodes.len() + 8);
        for (ai, arc) in self.arcs.iter().enumerate() {
            if arc.f0 >= r {
                continue;
            }
            let a = node_id[arc.lo].expect("arc endpoint below r");
            let b = if arc.f1 < r {
                match node_id[arc.hi] {
                    Some(b) => b,
                    None => continue,
                }
            } else {
                nodes.push(BallNode { kind: BallNodeKind::Clip(ai), value: r });
                nodes.len() - 1
            };
            if uf.same(a, b) {
                return Err(CycleEvidence::ReebCycle { arc: ai });
            }
            uf.union(a, b);
            edges.push(BallEdge { a, b, len: arc.f1.min(r) - arc.f0, arc: ai });
        }
        let root = node_id[self.root].expect("root is below every positive radius");
        Ok(BallTree { r, nodes, edges, root })
    }
}

#[derive(Clone, Debug)]
pub enum CycleEvidence {
    /// An arc closes a cycle in the Reeb subgraph below `r`.
    ReebCycle { arc: ArcId },
    /// The ball already contains a noncontractible loop of this length,
    /// so the radius is at least half the pointed systole.
    BallWraps { loop_len: f64, base: VertexId },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BallNodeKind {
    Event(NodeId),
    /// Arc clipped at the ball radius; the leaf sits on the level curve.
    Clip(ArcId),
}

#[derive(Clone, Copy, Debug)]
pub struct BallNode {
    pub kind: BallNodeKind,
    pub value: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct BallEdge {
    pub a: usize,
    pub b: usize,
    pub len: f64,
    pub arc: ArcId,
}

/// The tree T_r: Reeb subgraph of the ball, rooted at the basepoint image.
#[derive(Clone, Debug)]
pub struct BallTree {
    pub r: f64,
    pub nodes: Vec<BallNode>,
    pub edges: Vec<BallEdge>,
    pub root: usize,
}

impl BallTree {
    fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for (ei, e) in self.edges.iter().enumerate() {
            adj[e.a].push((e.b, ei));
            adj[e.b].push((e.a, ei));
        }
        adj
    }

    /// Clip leaves in node order.
    pub fn clip_leaves(&self) -> Vec<(usize, ArcId)> {
        self.nodes
            .iter()
            .enumerate()
            .filter_map(|(i, n)| match n.kind {
                BallNodeKind::Clip(a) => Some((i, a)),
                BallNodeKind::Event(_) => None,
            })
            .collect()
    }
}

/// Rooted tree with edge lengths, used for the pruned tree and for energy
/// computations.
#[derive(Clone, Debug, Default)]
pub struct RootedTree {
    /// Parent of each node; the root has none.
    pub parent: Vec<Option<usize>>,
    /// Length of the edge to the parent (unused at the root).
    pub edge_len: Vec<f64>,
    pub root: usize,
}

impl RootedTree {
    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn children(&self) -> Vec<Vec<usize>> {
        let mut ch = vec![Vec::new(); self.parent.len()];
        for (v, p) in self.parent.iter().enumerate() {
            if let Some(p) = *p {
                ch[p].push(v);
            }
        }
        ch
    }

    pub fn leaves(&self) -> Vec<usize> {
        let ch = self.children();
        (0..self.len())
            .filter(|&v| v != self.root && ch[v].is_empty())
            .collect()
    }

    /// Sum of squared edge lengths.
    pub fn energy(&self) -> f64 {
        (0..self.len())
            .filter(|&v| v != self.root)
            .map(|v| self.edge_len[v] * self.edge_len[v])
            .sum()
    }

    pub fn depth_len(&self, v: usize) -> f64 {
        let mut d = 0.0;
        let mut cur = v;
        while let Some(p) = self.parent[cur] {
            d += self.edge_len[cur];
            cur = p;
        }
        d
    }

    /// Least distance from the root to any other leaf; infinite for the
    /// single-node tree.
    pub fn height(&self) -> f64 {
        self.leaves()
            .iter()
            .map(|&v| self.depth_len(v))
            .fold(f64::INFINITY, f64::min)
    }

    /// Splits off the root edge: its length (zero when the root has several
    /// children) and the subtrees hanging at its far endpoint.
    pub fn root_decomposition(&self) -> (f64, Vec<RootedTree>) {
        let ch = self.children();
        let kids = &ch[self.root];
        if kids.len() == 1 {
            let far = kids[0];
            let ell = self.edge_len[far];
            (ell, self.subtrees_at(far, &ch))
        } else {
            (0.0, self.subtrees_at(self.root, &ch))
        }
    }

    fn subtrees_at(&self, at: usize, ch: &[Vec<usize>]) -> Vec<RootedTree> {
        let mut out = Vec::new();
        for &child in &ch[at] {
            // Collect the subtree rooted at `at` through `child`.
            let mut map: Vec<(usize, Option<usize>, f64)> = vec![(at, None, 0.0)];
            let mut stack = vec![(child, 0usize)];
            while let Some((v, pidx)) = stack.pop() {
                let idx = map.len();
                map.push((v, Some(pidx), self.edge_len[v]));
                for &w in &ch[v] {
                    stack.push((w, idx));
                }
            }
            out.push(RootedTree {
                parent: map.iter().map(|&(_, p, _)| p).collect(),
                edge_len: map.iter().map(|&(_, _, l)| l).collect(),
                root: 0,
            });
        }
        out
    }
}

/// Binary tree of the given depth whose edge lengths halve at every
/// branching, normalized so the infinite tree has height `h`. Its energy is
/// `h^2 (1 - 2^{-depth}) / 2`.
pub fn halving_tree(depth: usize, h: f64) -> RootedTree {
    let mut t = RootedTree { parent: vec![None], edge_len: vec![0.0], root: 0 };
    let mut frontier = vec![0usize];
    let mut len = h / 2.0;
    for d in 0..depth {
        let mut next = Vec::new();
        let fanout = if d == 0 { 1 } else { 2 };
        for &p in &frontier {
            for _ in 0..fanout {
                t.parent.push(Some(p));
                t.edge_len.push(len);
                next.push(t.parent.len() - 1);
            }
        }
        frontier = next;
        len /= 2.0;
    }
    t
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PruneError {
    NotATree,
}

/// Pruned tree: the ball tree cut down to paths reaching retained superlevel
/// components, with pass-through nodes contracted.
#[derive(Clone, Debug)]
pub struct PrunedTree {
    pub tree: RootedTree,
    /// Reeb arcs realized by each contracted edge (indexed like tree nodes).
    pub edge_arcs: Vec<Vec<ArcId>>,
    /// Superlevel component attached at each leaf node, if any.
    pub leaf_component: Vec<Option<usize>>,
    /// Length of the root edge (zero when trivial).
    pub root_edge_len: f64,
}

impl PrunedTree {
    pub fn energy(&self) -> f64 {
        self.tree.energy()
    }

    pub fn height(&self) -> f64 {
        self.tree.height()
    }

    pub fn edge_count(&self) -> usize {
        self.tree.len().saturating_sub(1)
    }

    /// Non-root edges as (node, arcs, length).
    pub fn non_root_edges(&self) -> Vec<(usize, &[ArcId], f64)> {
        let ch = self.tree.children();
        let root_kids = &ch[self.tree.root];
        let root_edge_child = if root_kids.len() == 1 { Some(root_kids[0]) } else { None };
        (0..self.tree.len())
            .filter(|&v| v != self.tree.root && Some(v) != root_edge_child)
            .map(|v| (v, self.edge_arcs[v].as_slice(), self.tree.edge_len[v]))
            .collect()
    }
}

/// Superlevel-component analysis backing the pruning decision.
#[derive(Clone, Debug)]
pub struct ComponentStatus {
    pub comp: usize,
    pub attached_leaves: Vec<usize>,
    pub simply_connected: VerdictKind,
    /// Free rank of first homology after collapsing each boundary level
    /// component to a point.
    pub collapsed_b1: usize,
    pub pruned: bool,
}

#[derive(Clone, Debug)]
pub struct MinimalModel {
    pub pruned: PrunedTree,
    pub regions: Regions,
    pub status: Vec<ComponentStatus>,
    /// Leaf node -> retained superlevel component.
    pub attachments: Vec<(usize, usize)>,
}

impl MinimalModel {
    /// Free rank of first homology of the model: collapsed component ranks
    /// plus the cycles created by multiple attachments.
    pub fn b1(&self) -> usize {
        let retained: Vec<&ComponentStatus> = self.status.iter().filter(|s| !s.pruned).collect();
        let comp_b1: usize = retained.iter().map(|s| s.collapsed_b1).sum();
        let attach = self.attachments.len();
        comp_b1 + attach - retained.len().min(attach)
    }
}

/// Builds the subcomplex presentation of a superlevel component together
/// with one relator per independent cycle of each boundary level component
/// (collapsing every boundary component to its own point). Returns `None`
/// when the surrogate cannot be built faithfully; the caller retains the
/// component in that case.
fn collapsed_presentation(
    field: &DistanceField,
    regions: &Regions,
    comp: usize,
    ls: &crate::metric::LevelSet,
    level_comps: &[usize],
) -> Option<Presentation> {
    let x = field.complex();
    let rc = &regions.comps[comp];
    let mut vmap = vec![usize::MAX; x.vertex_count()];
    for (i, &v) in rc.vertices.iter().enumerate() {
        vmap[v] = i;
    }
    let mut emap = vec![usize::MAX; x.edges().len()];
    let mut raw = RawComplex { vertex_count: rc.vertices.len(), ..Default::default() };
    for &e in &rc.full_edges {
        emap[e] = raw.edges.len();
        let (a, b) = x.edges()[e].ends;
        raw.edges.push((vmap[a], vmap[b], x.edges()[e].len));
    }
    for &fc in &rc.full_faces {
        let es = x.faces()[fc].edges;
        raw.faces.push([emap[es[0]], emap[es[1]], emap[es[2]]]);
    }
    let sub = TwoComplex::build(&raw).ok()?;
    let pres = Presentation::of_complex(&sub);

    let mut relators = pres.relators().to_vec();
    for &lc in level_comps {
        relators.append(&mut pushed_cycle_words(field, ls, lc, &pres, &emap)?);
    }
    Some(Presentation::direct(pres.gens(), relators))
}

/// Words of the independent cycles of one level component after pushing the
/// curve onto the superlevel side: a crossing point maps to the endpoint of
/// its edge above the level, a segment to the face's edge joining the two
/// pushed endpoints (or to a constant path when the face has a single
/// corner above).
fn pushed_cycle_words(
    field: &DistanceField,
    ls: &crate::metric::LevelSet,
    comp: usize,
    pres: &Presentation,
    emap: &[usize],
) -> Option<Vec<Word>> {
    let x = field.complex();
    let f = field.vertex_values();
    let up = |e: EdgeId| -> VertexId {
        let (a, b) = x.edges()[e].ends;
        if f[a] >= ls.value {
            a
        } else {
            b
        }
    };
    // Directed push of a segment traversed from crossing `ea` to `eb`.
    // Endpoint order is preserved by the remapping, so orientation can be
    // read off the original edge.
    let push = |face: FaceId, ea: EdgeId, eb: EdgeId| -> Option<Vec<crate::complex::DirEdge>> {
        if ea == eb {
            return None; // doubled edge within one face: bail out
        }
        let (ua, ub) = (up(ea), up(eb));
        if ua == ub {
            return Some(Vec::new());
        }
        let third = x.faces()[face].edges.iter().copied().find(|&e| e != ea && e != eb)?;
        if emap[third] == usize::MAX {
            return None;
        }
        let reversed = x.edges()[third].ends.0 != ua;
        Some(vec![crate::complex::DirEdge { edge: emap[third], reversed }])
    };

    // Curve graph: nodes are the component's crossed edges, arcs its
    // segments.
    let segs: Vec<(usize, &crate::metric::LevelSegment)> = ls
        .segments
        .iter()
        .enumerate()
        .filter(|(_, s)| ls.component_of_edge(s.edges.0) == Some(comp))
        .collect();
    let nodes = &ls.components[comp].edges;
    let idx_of = |e: EdgeId| nodes.iter().position(|&n| n == e);
    let mut uf = UnionFind::new(nodes.len());
    let mut tree_segs: Vec<usize> = Vec::new();
    let mut extra_segs: Vec<usize> = Vec::new();
    for &(si, s) in &segs {
        let (a, b) = (idx_of(s.edges.0)?, idx_of(s.edges.1)?);
        if uf.union(a, b) {
            tree_segs.push(si);
        } else {
            extra_segs.push(si);
        }
    }
    let mut words = Vec::new();
    if extra_segs.is_empty() {
        return Some(words);
    }
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nodes.len()];
    for &si in &tree_segs {
        let s = &ls.segments[si];
        let (a, b) = (idx_of(s.edges.0)?, idx_of(s.edges.1)?);
        adj[a].push((b, si));
        adj[b].push((a, si));
    }
    for &si in &extra_segs {
        let s = &ls.segments[si];
        let (a, b) = (idx_of(s.edges.0)?, idx_of(s.edges.1)?);
        // Tree path from b back to a, then close with this segment a -> b.
        let mut prev: Vec<Option<(usize, usize)>> = vec![None; nodes.len()];
        let mut seen = vec![false; nodes.len()];
        let mut queue = alloc::collections::VecDeque::from([b]);
        seen[b] = true;
        while let Some(v) = queue.pop_front() {
            if v == a {
                break;
            }
            for &(w, e) in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    prev[w] = Some((v, e));
                    queue.push_back(w);
                }
            }
        }
        if !seen[a] {
            return None;
        }
        // Closed walk: tree path a -> b (following prev toward its root b),
        // then the extra segment traversed b -> a.
        let mut walk: Vec<(usize, EdgeId, EdgeId)> = Vec::new();
        let mut cur = a;
        while let Some((next, e)) = prev[cur] {
            walk.push((e, nodes[cur], nodes[next]));
            cur = next;
        }
        walk.push((si, s.edges.1, s.edges.0));
        let mut dirs: Vec<crate::complex::DirEdge> = Vec::new();
        for (sidx, from, to) in walk {
            let face = ls.segments[sidx].face;
            dirs.extend(push(face, from, to)?);
        }
        words.push(pres.path_word(&dirs));
    }
    Some(words)
}

/// Prunes the ball tree: drops branches that never reach the superlevel set
/// and branches leading only to collapsible single-leaf components, then
/// contracts pass-through nodes.
pub fn prune(
    reeb: &ReebGraph,
    field: &DistanceField,
    ball: &BallTree,
    budgets: &Budgets,
) -> Result<MinimalModel, PruneError> {
    let ls = field.level_set(ball.r);
    let regions = field.region_components(RegionKind::Super, ls.value);

    // Map each clip leaf to its superlevel component.
    let mut leaf_comp: Vec<Option<usize>> = vec![None; ball.nodes.len()];
    for (node, arc) in ball.clip_leaves() {
        let slab = reeb.arcs[arc]
            .slabs
            .iter()
            .find(|s| s.f0 <= ball.r && ball.r <= s.f1 + VALUE_TOL)
            .or_else(|| reeb.arcs[arc].slabs.last());
        if let Some(slab) = slab {
            let comp = slab
                .faces
                .first()
                .and_then(|&fc| regions.comps.iter().position(|c| c.faces.contains(&fc)))
                .or_else(|| {
                    slab.iso_edges
                        .first()
                        .and_then(|&e| regions.comps.iter().position(|c| c.edges.contains(&e)))
                });
            leaf_comp[node] = comp;
        }
    }

    // Level components per superlevel component (for boundary collapsing).
    let touching = regions.touching_level_components(&ls);

    let mut status: Vec<ComponentStatus> = Vec::new();
    for ci in 0..regions.comps.len() {
        let attached: Vec<usize> = leaf_comp
            .iter()
            .enumerate()
            .filter_map(|(n, c)| (*c == Some(ci)).then_some(n))
            .collect();
        let (sc, b1) = match collapsed_presentation(field, &regions, ci, &ls, &touching[ci]) {
            Some(pres) => {
                let mut oracle = Oracle::new(pres, *budgets);
                (oracle.certify_trivial(), oracle.h1_free_rank())
            }
            None => (VerdictKind::Unknown, 0),
        };
        let pruned = attached.len() == 1 && sc == VerdictKind::Contractible;
        status.push(ComponentStatus {
            comp: ci,
            attached_leaves: attached,
            simply_connected: sc,
            collapsed_b1: b1,
            pruned,
        });
    }

    // Keep leaves attached to retained components.
    let mut keep_leaf = vec![false; ball.nodes.len()];
    for st in &status {
        if !st.pruned {
            for &leaf in &st.attached_leaves {
                keep_leaf[leaf] = true;
            }
        }
    }

    // Mark kept nodes: union of root-to-kept-leaf paths.
    let adj = ball.adjacency();
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; ball.nodes.len()];
    let mut order = vec![ball.root];
    let mut seen = vec![false; ball.nodes.len()];
    seen[ball.root] = true;
    let mut qi = 0;
    while qi < order.len() {
        let v = order[qi];
        qi += 1;
        for &(w, e) in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                parent[w] = Some((v, e));
                order.push(w);
            }
        }
    }
    let mut keep = vec![false; ball.nodes.len()];
    keep[ball.root] = true;
    for leaf in 0..ball.nodes.len() {
        if keep_leaf[leaf] {
            let mut cur = leaf;
            while !keep[cur] {
                keep[cur] = true;
                cur = parent[cur].expect("ball tree is connected").0;
            }
        }
    }

    // Contract kept chains into pruned-tree edges.
    let kept_children: Vec<Vec<(usize, usize)>> = (0..ball.nodes.len())
        .map(|v| {
            adj[v]
                .iter()
                .copied()
                .filter(|&(w, e)| keep[w] && parent[w] == Some((v, e)))
                .collect()
        })
        .collect();
    let mut tree = RootedTree { parent: vec![None], edge_len: vec![0.0], root: 0 };
    let mut edge_arcs: Vec<Vec<ArcId>> = vec![Vec::new()];
    let mut leaf_component: Vec<Option<usize>> = vec![None];
    let mut attachments = Vec::new();
    // Stack of (ball node, pruned parent, accumulated length, accumulated arcs).
    let mut stack: Vec<(usize, usize, f64, Vec<ArcId>)> = Vec::new();
    for &(w, e) in &kept_children[ball.root] {
        stack.push((w, 0, ball.edges[e].len, vec![ball.edges[e].arc]));
    }
    while let Some((v, pnode, len, arcs)) = stack.pop() {
        let kids = &kept_children[v];
        if kids.len() == 1 && leaf_comp[v].is_none() {
            let (w, e) = kids[0];
            let mut arcs = arcs;
            arcs.push(ball.edges[e].arc);
            stack.push((w, pnode, len + ball.edges[e].len, arcs));
            continue;
        }
        let id = tree.parent.len();
        tree.parent.push(Some(pnode));
        tree.edge_len.push(len);
        edge_arcs.push(arcs);
        leaf_component.push(leaf_comp[v]);
        if let Some(c) = leaf_comp[v] {
            attachments.push((id, c));
        }
        for &(w, e) in kids {
            stack.push((w, id, ball.edges[e].len, vec![ball.edges[e].arc]));
        }
    }

    let ch = tree.children();
    let root_edge_len = if ch[0].len() == 1 { tree.edge_len[ch[0][0]] } else { 0.0 };
    let pruned = PrunedTree { tree, edge_arcs, leaf_component, root_edge_len };
    Ok(MinimalModel { pruned, regions, status, attachments })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{self, LegEnd};
    use crate::metric::MetricConfig;
    use crate::systole::{systole, SystoleEngine};

    fn field(x: &TwoComplex, p: usize, level: usize) -> DistanceField {
        DistanceField::compute(x, p, &MetricConfig::at_level(level)).unwrap()
    }

    #[test]
    fn disk_reeb_is_a_single_arc() {
        let x = fixtures::disk(16, 1.0);
        let f = field(&x, 0, 0);
        let g = ReebGraph::of_field(&f);
        assert_eq!(g.arcs.len(), 1);
        assert_eq!(g.cycle_rank(), 0);
        assert!((g.arcs[0].f1 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn torus_reeb_is_a_path() {
        // Level curves of the flat-torus distance stay connected, so the
        // quotient graph is a segment at any refinement level.
        let x = fixtures::torus(1.0);
        let f = field(&x, 0, 3);
        let g = ReebGraph::of_field(&f);
        assert_eq!(g.cycle_rank(), 0);
        assert_eq!(g.arcs.len(), 1);
    }

    #[test]
    fn capped_tripod_reeb_is_a_star() {
        let (x, p) = fixtures::tripod(2, [LegEnd::Cap; 3]);
        let f = field(&x, p, 0);
        let g = ReebGraph::of_field(&f);
        assert_eq!(g.cycle_rank(), 0);
        // Three maxima: three upward ends.
        let leaf_arcs = g
            .arcs
            .iter()
            .filter(|a| g.arcs.iter().all(|b| b.f0 < a.f1 + 1e-12))
            .count();
        assert!(leaf_arcs >= 3);
    }

    #[test]
    fn merged_tripod_reeb_has_cycles() {
        let (x, p) = fixtures::tripod(2, [LegEnd::Merge; 3]);
        let f = field(&x, p, 0);
        let g = ReebGraph::of_field(&f);
        assert_eq!(g.cycle_rank(), 2);
    }

    #[test]
    fn preimage_area_sums_to_total() {
        let x = fixtures::rp2_6(1.0);
        let f = field(&x, 0, 1);
        let g = ReebGraph::of_field(&f);
        let all: Vec<ArcId> = (0..g.arcs.len()).collect();
        let total = g.preimage_area(&f, &all, 0.0, f64::INFINITY);
        assert!((total - x.area()).abs() < 1e-9 * x.area());
    }

    #[test]
    fn torus_ball_tree_regimes() {
        let x = fixtures::torus(1.0);
        let mut engine = SystoleEngine::new(&x, 2, Budgets::small()).unwrap();
        let ps = engine.pointed_systole(0);
        let f = field(&x, 0, 2);
        let g = ReebGraph::of_field(&f);
        assert!(g.ball_tree(0.3, Some(&ps)).is_ok());
        let which = g.ball_tree(0.7, Some(&ps));
        assert!(matches!(which, Err(CycleEvidence::BallWraps { .. })));
    }

    #[test]
    fn disk_ball_tree_any_radius() {
        let x = fixtures::disk(16, 1.0);
        let f = field(&x, 0, 0);
        let g = ReebGraph::of_field(&f);
        for r in [0.2, 0.5, 0.9, 2.0] {
            let t = g.ball_tree(r, None).unwrap();
            assert_eq!(t.edges.len() + 1, t.nodes.len());
        }
    }

    #[test]
    fn halving_tree_energy() {
        let t = halving_tree(8, 1.0);
        let e = t.energy();
        assert!((e - 0.498046875).abs() < 1e-12);
        assert!((t.height() - (1.0 - 1.0 / 256.0)).abs() < 1e-12);
        assert!(e >= 0.5 * t.height() * t.height() - 1e-9);
    }

    #[test]
    fn y_tree_energy_bound() {
        // Root edge 2, two branches 1 each: energy 6, height 3.
        let t = RootedTree {
            parent: vec![None, Some(0), Some(1), Some(1)],
            edge_len: vec![0.0, 2.0, 1.0, 1.0],
            root: 0,
        };
        assert!((t.energy() - 6.0).abs() < 1e-12);
        assert!((t.height() - 3.0).abs() < 1e-12);
        assert!(t.energy() >= 0.5 * 9.0 - 1e-9);
        let (ell, branches) = t.root_decomposition();
        assert!((ell - 2.0).abs() < 1e-12);
        assert_eq!(branches.len(), 2);
    }

    #[test]
    fn single_edge_energy() {
        let t = RootedTree { parent: vec![None, Some(0)], edge_len: vec![0.0, 3.0], root: 0 };
        assert!((t.energy() - 9.0).abs() < 1e-12);
        assert!((t.height() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn single_node_height_is_infinite() {
        let t = RootedTree { parent: vec![None], edge_len: vec![0.0], root: 0 };
        assert!(t.height().is_infinite());
        assert_eq!(t.energy(), 0.0);
    }

    #[test]
    fn disk_prunes_to_root() {
        let x = fixtures::disk(16, 1.0);
        let f = field(&x, 0, 0);
        let g = ReebGraph::of_field(&f);
        let t = g.ball_tree(0.5, None).unwrap();
        let m = prune(&g, &f, &t, &Budgets::small()).unwrap();
        assert_eq!(m.pruned.tree.len(), 1, "everything pruned");
        assert_eq!(m.status.len(), 1);
        assert!(m.status[0].pruned);
        assert_eq!(m.b1(), 0);
    }

    #[test]
    fn torus_prunes_nothing() {
        let x = fixtures::torus(1.0);
        let s = systole(&x, 2, Budgets::small()).unwrap();
        let f = field(&x, 0, 2);
        let g = ReebGraph::of_field(&f);
        let r = 0.49 * s.lower;
        let t = g.ball_tree(r, None).unwrap();
        let m = prune(&g, &f, &t, &Budgets::small()).unwrap();
        assert_eq!(m.status.len(), 1);
        assert!(!m.status[0].pruned, "superlevel component is essential");
        assert!(m.pruned.tree.len() >= 2);
    }

    #[test]
    fn moebius_tripod_prunes_trivial_caps() {
        let (x, p) = fixtures::tripod(1, [LegEnd::Moebius, LegEnd::Cap, LegEnd::Cap]);
        let s = systole(&x, 0, Budgets::small()).unwrap();
        assert!(s.upper.is_finite());
        let f = field(&x, p, 0);
        let g = ReebGraph::of_field(&f);
        let r = 0.49 * s.lower;
        let t = g.ball_tree(r, None).unwrap();
        let m = prune(&g, &f, &t, &Budgets::small()).unwrap();
        let retained: Vec<&ComponentStatus> = m.status.iter().filter(|s| !s.pruned).collect();
        assert_eq!(retained.len(), 1, "only the essential leg stays");
        assert_eq!(m.attachments.len(), 1);
        // Single path to the essential component: the pruned tree is one
        // root edge.
        assert_eq!(m.pruned.tree.len(), 2);
        assert!(m.pruned.root_edge_len > 0.0);
    }

    #[test]
    fn wedge_minimal_model_b1_matches() {
        let (x, p) = fixtures::wedge_rp2_s1(4, 2.4);
        let s = systole(&x, 1, Budgets::small()).unwrap();
        let f = field(&x, p, 1);
        let g = ReebGraph::of_field(&f);
        let r = 0.49 * s.lower;
        let t = g.ball_tree(r, None).unwrap();
        let m = prune(&g, &f, &t, &Budgets::small()).unwrap();
        assert_eq!(m.b1(), 1, "model keeps the circle's homology");
        assert!(m.pruned.non_root_edges().len() >= 2);
    }

    use crate::complex::TwoComplex;
    use crate::homotopy::Budgets;
}
