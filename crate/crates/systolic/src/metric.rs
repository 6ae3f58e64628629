//! Distance fields from a basepoint and the level-set machinery built on
//! them: level curves with component structure, sublevel and superlevel
//! regions, coalescence counts, and exact areas of piecewise linear sublevel
//! sets.
//!
//! Distances are shortest paths in a graph spanned by the refined vertices,
//! Steiner points subdividing each edge, and straight chords between nodes on
//! the boundary of a common face. They overestimate the intrinsic metric and
//! converge to it under refinement. Level sets interpolate the vertex values
//! linearly over each face.

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;

use crate::complex::{ComplexError, EdgeId, FaceId, TwoComplex, VertexId};
use crate::num::{dist2, lerp2};

pub const VALUE_TOL: f64 = 1e-9;
pub const NUDGE: f64 = 1e-7;

#[derive(Clone, Copy, Debug)]
pub struct MetricConfig {
    pub level: usize,
    pub max_level: usize,
    pub steiner_per_edge: usize,
    pub chords: bool,
}

impl Default for MetricConfig {
    fn default() -> Self {
        MetricConfig {
            level: 0,
            max_level: crate::complex::DEFAULT_MAX_REFINE_LEVEL,
            steiner_per_edge: 1,
            chords: true,
        }
    }
}

impl MetricConfig {
    pub fn at_level(level: usize) -> Self {
        MetricConfig { level, ..Default::default() }
    }
}

/// Shortest-path distances from a basepoint on the refined complex.
#[derive(Clone, Debug)]
pub struct DistanceField {
    complex: TwoComplex,
    level: usize,
    base: VertexId,
    steiner_per_edge: usize,
    /// Distance per graph node: refined vertices first, then Steiner points.
    values: Vec<f64>,
    pred: Vec<Option<usize>>,
}

impl DistanceField {
    /// Refines `x` to `cfg.level` and runs a single-source shortest path
    /// computation from the original vertex `p`.
    pub fn compute(x: &TwoComplex, p: VertexId, cfg: &MetricConfig) -> Result<Self, ComplexError> {
        assert!(p < x.vertex_count(), "basepoint must be an original vertex");
        let refined = x.refine_with_max(cfg.level, cfg.max_level)?;
        Ok(Self::on_refined(refined, p, cfg.level, cfg))
    }

    /// Runs the shortest-path computation on an already refined complex.
    pub fn on_refined(complex: TwoComplex, p: VertexId, level: usize, cfg: &MetricConfig) -> Self {
        let s = cfg.steiner_per_edge;
        let nv = complex.vertex_count();
        let nodes = nv + complex.edges().len() * s;

        // Node placements on each face boundary: (node, planar position).
        let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); nodes];
        let push = |adj: &mut Vec<Vec<(usize, f64)>>, a: usize, b: usize, w: f64| {
            if a != b {
                adj[a].push((b, w));
                adj[b].push((a, w));
            }
        };

        // Subsegments along each edge.
        for (ei, e) in complex.edges().iter().enumerate() {
            let seg = e.len / (s + 1) as f64;
            let node_at = |k: usize| -> usize {
                // k in 0..=s+1 along the edge; 0 and s+1 are the endpoints.
                if k == 0 {
                    e.ends.0
                } else if k == s + 1 {
                    e.ends.1
                } else {
                    nv + ei * s + (k - 1)
                }
            };
            for k in 0..=s {
                push(&mut adj, node_at(k), node_at(k + 1), seg);
            }
        }

        // Chords between nodes on the boundary of a common face.
        if cfg.chords {
            for (fi, f) in complex.faces().iter().enumerate() {
                let g = complex.geometry(fi);
                let mut spots: Vec<(usize, [f64; 2], usize)> = Vec::new(); // (node, pos, side)
                for side in 0..3 {
                    let d = f.walk[side];
                    let a = g.corners[side];
                    let b = g.corners[(side + 1) % 3];
                    spots.push((d.start(complex.edges()), a, side));
                    for i in 0..s {
                        // Steiner point i sits at canonical parameter
                        // (i+1)/(s+1) along the edge's own direction.
                        let t = (i + 1) as f64 / (s + 1) as f64;
                        let t_walk = if d.reversed { 1.0 - t } else { t };
                        spots.push((nv + d.edge * s + i, lerp2(a, b, t_walk), side));
                    }
                }
                for i in 0..spots.len() {
                    for j in (i + 1)..spots.len() {
                        if spots[i].2 == spots[j].2 {
                            continue; // same side: covered by subsegments
                        }
                        push(&mut adj, spots[i].0, spots[j].0, dist2(spots[i].1, spots[j].1));
                    }
                }
            }
        }

        let (values, pred) = dijkstra(&adj, p);
        DistanceField { complex, level, base: p, steiner_per_edge: s, values, pred }
    }

    pub fn complex(&self) -> &TwoComplex {
        &self.complex
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn base(&self) -> VertexId {
        self.base
    }

    pub fn vertex_value(&self, v: VertexId) -> f64 {
        self.values[v]
    }

    pub fn vertex_values(&self) -> &[f64] {
        &self.values[..self.complex.vertex_count()]
    }

    pub fn node_values(&self) -> &[f64] {
        &self.values
    }

    pub fn predecessor(&self, node: usize) -> Option<usize> {
        self.pred[node]
    }

    pub fn steiner_per_edge(&self) -> usize {
        self.steiner_per_edge
    }

    pub fn max_value(&self) -> f64 {
        self.vertex_values().iter().fold(0.0, |a, &b| a.max(b))
    }

    /// Sorted distinct vertex values: the breakpoints of every level-length
    /// and component-count function.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut vals: Vec<f64> = self.vertex_values().to_vec();
        vals.sort_by(|a, b| a.total_cmp(b));
        vals.dedup_by(|a, b| (*a - *b).abs() <= VALUE_TOL);
        vals
    }

    fn nudge(&self, r: f64) -> (f64, bool) {
        let mut r = r;
        let mut nudged = false;
        loop {
            let clash = self
                .vertex_values()
                .iter()
                .any(|&v| (v - r).abs() < VALUE_TOL);
            if !clash {
                return (r, nudged);
            }
            r += NUDGE;
            nudged = true;
        }
    }

    /// Level curve at value `r` (nudged off vertex values), with segments,
    /// isolated points on faceless edges, and connected components.
    pub fn level_set(&self, r: f64) -> LevelSet {
        let (value, nudged) = self.nudge(r);
        let f = self.vertex_values();
        let edges = self.complex.edges();

        let mut crossing: Vec<Option<f64>> = vec![None; edges.len()];
        for (ei, e) in edges.iter().enumerate() {
            let (a, b) = (f[e.ends.0], f[e.ends.1]);
            if (a < value) != (b < value) {
                crossing[ei] = Some((value - a) / (b - a));
            }
        }

        let mut segments = Vec::new();
        let mut points = Vec::new();
        let mut uf = UnionFind::new(edges.len());
        let mut crossed_edges: Vec<EdgeId> = Vec::new();
        for (ei, c) in crossing.iter().enumerate() {
            if c.is_some() {
                crossed_edges.push(ei);
                if self.complex.edge_faces(ei).is_empty() {
                    points.push(LevelPoint { edge: ei, t: c.unwrap() });
                }
            }
        }
        for (fi, face) in self.complex.faces().iter().enumerate() {
            let g = self.complex.geometry(fi);
            let mut hits: Vec<(EdgeId, [f64; 2])> = Vec::new();
            for side in 0..3 {
                let d = face.walk[side];
                if let Some(t) = crossing[d.edge] {
                    let t_walk = if d.reversed { 1.0 - t } else { t };
                    let p = lerp2(g.corners[side], g.corners[(side + 1) % 3], t_walk);
                    hits.push((d.edge, p));
                }
            }
            if hits.len() == 2 {
                uf.union(hits[0].0, hits[1].0);
                segments.push(LevelSegment {
                    face: fi,
                    edges: (hits[0].0, hits[1].0),
                    len: dist2(hits[0].1, hits[1].1),
                });
            }
        }

        // Components keyed by union-find root over crossed edges.
        let mut comp_of_edge: Vec<Option<usize>> = vec![None; edges.len()];
        let mut components: Vec<LevelComponent> = Vec::new();
        for &ei in &crossed_edges {
            let root = uf.find(ei);
            let id = match comp_of_edge[root] {
                Some(id) => id,
                None => {
                    components.push(LevelComponent {
                        edges: Vec::new(),
                        faces: Vec::new(),
                        length: 0.0,
                    });
                    comp_of_edge[root] = Some(components.len() - 1);
                    components.len() - 1
                }
            };
            comp_of_edge[ei] = Some(id);
            components[id].edges.push(ei);
        }
        for seg in &segments {
            let id = comp_of_edge[seg.edges.0].unwrap();
            components[id].faces.push(seg.face);
            components[id].length += seg.len;
        }
        for c in components.iter_mut() {
            c.faces.sort_unstable();
            c.faces.dedup();
        }
        let total_length = components.iter().map(|c| c.length).sum();

        LevelSet { requested: r, value, nudged, segments, points, components, comp_of_edge, total_length }
    }

    /// Connected components of the closed sublevel or superlevel region.
    pub fn region_components(&self, kind: RegionKind, r: f64) -> Regions {
        let f = self.vertex_values();
        let edges = self.complex.edges();
        let faces = self.complex.faces();
        let inside = |v: f64| match kind {
            RegionKind::Sub => v <= r,
            RegionKind::Super => v >= r,
        };

        let nv = f.len();
        let ne = edges.len();
        // Union-find over vertices, edges, faces in one index space.
        let mut uf = UnionFind::new(nv + ne + faces.len());
        let mut edge_in = vec![false; ne];
        let mut face_in = vec![false; faces.len()];
        for (ei, e) in edges.iter().enumerate() {
            let qualifies = inside(f[e.ends.0]) || inside(f[e.ends.1]);
            if qualifies {
                edge_in[ei] = true;
                for v in [e.ends.0, e.ends.1] {
                    if inside(f[v]) {
                        uf.union(nv + ei, v);
                    }
                }
            }
        }
        for (fi, face) in faces.iter().enumerate() {
            let any = face.walk.iter().any(|d| inside(f[d.start(edges)]));
            if any {
                face_in[fi] = true;
                for &e in &face.edges {
                    if edge_in[e] {
                        uf.union(nv + ne + fi, nv + e);
                    }
                }
            }
        }

        let mut comps: Vec<RegionComponent> = Vec::new();
        let mut comp_of_root: Vec<Option<usize>> = vec![None; nv + ne + faces.len()];
        let mut comp_at = |uf: &mut UnionFind, cell: usize, comps: &mut Vec<RegionComponent>| {
            let root = uf.find(cell);
            match comp_of_root[root] {
                Some(id) => id,
                None => {
                    comps.push(RegionComponent::default());
                    comp_of_root[root] = Some(comps.len() - 1);
                    comps.len() - 1
                }
            }
        };
        for v in 0..nv {
            if inside(f[v]) {
                let id = comp_at(&mut uf, v, &mut comps);
                comps[id].vertices.push(v);
            }
        }
        for ei in 0..ne {
            if edge_in[ei] {
                let id = comp_at(&mut uf, nv + ei, &mut comps);
                comps[id].edges.push(ei);
                let e = edges[ei];
                if inside(f[e.ends.0]) && inside(f[e.ends.1]) {
                    comps[id].full_edges.push(ei);
                }
            }
        }
        for fi in 0..faces.len() {
            if face_in[fi] {
                let id = comp_at(&mut uf, nv + ne + fi, &mut comps);
                comps[id].faces.push(fi);
                if faces[fi].walk.iter().all(|d| inside(f[d.start(edges)])) {
                    comps[id].full_faces.push(fi);
                }
            }
        }
        Regions { kind, r, comps }
    }

    /// For each superlevel component at `r`, the number of level components
    /// of the level curve at `r` contained in its boundary.
    pub fn coalesce_counts(&self, r: f64) -> Vec<usize> {
        let ls = self.level_set(r);
        let regions = self.region_components(RegionKind::Super, ls.value);
        regions.touching_level_components(&ls).iter().map(|t| t.len()).collect()
    }

    /// Exact area of the sublevel set of the interpolated field within one
    /// face.
    pub fn clip_area(&self, face: FaceId, r: f64) -> f64 {
        let g = self.complex.geometry(face);
        let f = self.vertex_values();
        let w = self.complex.faces()[face].walk;
        let vals = [
            f[w[0].start(self.complex.edges())],
            f[w[1].start(self.complex.edges())],
            f[w[2].start(self.complex.edges())],
        ];
        clip_polygon_area(&g.corners, &vals, r)
    }

    /// Area of the metric ball of radius `r` about the basepoint, measured as
    /// the area of the sublevel set of the interpolated distance.
    pub fn ball_area(&self, r: f64) -> f64 {
        if r < 0.0 {
            return 0.0;
        }
        (0..self.complex.faces().len()).map(|fi| self.clip_area(fi, r)).sum()
    }

    /// Integral over `[r0, r1]` of the coarea-weighted level length; equals
    /// the area swept between the two sublevel sets.
    pub fn coarea_integral(&self, r0: f64, r1: f64) -> f64 {
        assert!(0.0 <= r0 && r0 <= r1);
        self.ball_area(r1) - self.ball_area(r0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RegionKind {
    Sub,
    Super,
}

#[derive(Clone, Debug)]
pub struct LevelSegment {
    pub face: FaceId,
    pub edges: (EdgeId, EdgeId),
    pub len: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct LevelPoint {
    pub edge: EdgeId,
    pub t: f64,
}

#[derive(Clone, Debug, Default)]
pub struct LevelComponent {
    pub edges: Vec<EdgeId>,
    pub faces: Vec<FaceId>,
    pub length: f64,
}

#[derive(Clone, Debug)]
pub struct LevelSet {
    pub requested: f64,
    pub value: f64,
    pub nudged: bool,
    pub segments: Vec<LevelSegment>,
    pub points: Vec<LevelPoint>,
    pub components: Vec<LevelComponent>,
    comp_of_edge: Vec<Option<usize>>,
    pub total_length: f64,
}

impl LevelSet {
    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Component id of the crossing on the given edge, when crossed.
    pub fn component_of_edge(&self, e: EdgeId) -> Option<usize> {
        self.comp_of_edge.get(e).copied().flatten()
    }
}

#[derive(Clone, Debug, Default)]
pub struct RegionComponent {
    pub vertices: Vec<VertexId>,
    /// Cells with any part in the region.
    pub edges: Vec<EdgeId>,
    pub faces: Vec<FaceId>,
    /// Cells entirely contained in the region.
    pub full_edges: Vec<EdgeId>,
    pub full_faces: Vec<FaceId>,
}

#[derive(Clone, Debug)]
pub struct Regions {
    pub kind: RegionKind,
    pub r: f64,
    pub comps: Vec<RegionComponent>,
}

impl Regions {
    /// Level components of `ls` touching each region component.
    pub fn touching_level_components(&self, ls: &LevelSet) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.comps.len()];
        for (ci, comp) in self.comps.iter().enumerate() {
            let mut ids: Vec<usize> = comp
                .edges
                .iter()
                .filter_map(|&e| ls.component_of_edge(e))
                .collect();
            ids.sort_unstable();
            ids.dedup();
            out[ci] = ids;
        }
        out
    }

    /// Index of the component containing the given vertex.
    pub fn component_of_vertex(&self, v: VertexId) -> Option<usize> {
        self.comps.iter().position(|c| c.vertices.binary_search(&v).is_ok())
    }
}

/// Area of `{f <= r}` within a triangle with linearly interpolated values.
pub fn clip_polygon_area(corners: &[[f64; 2]; 3], vals: &[f64; 3], r: f64) -> f64 {
    let mut poly: Vec<[f64; 2]> = Vec::with_capacity(4);
    for i in 0..3 {
        let j = (i + 1) % 3;
        let (a, ga) = (corners[i], vals[i]);
        let (b, gb) = (corners[j], vals[j]);
        if ga <= r {
            poly.push(a);
        }
        if (ga <= r) != (gb <= r) {
            let t = (r - ga) / (gb - ga);
            poly.push(lerp2(a, b, t));
        }
    }
    shoelace(&poly)
}

fn shoelace(poly: &[[f64; 2]]) -> f64 {
    if poly.len() < 3 {
        return 0.0;
    }
    let mut s = 0.0;
    for i in 0..poly.len() {
        let j = (i + 1) % poly.len();
        s += poly[i][0] * poly[j][1] - poly[j][0] * poly[i][1];
    }
    (s / 2.0).abs()
}

fn dijkstra(adj: &[Vec<(usize, f64)>], source: usize) -> (Vec<f64>, Vec<Option<usize>>) {
    let n = adj.len();
    let mut dist = vec![f64::INFINITY; n];
    let mut pred = vec![None; n];
    let mut heap: BinaryHeap<HeapItem> = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(HeapItem { dist: 0.0, node: source });
    while let Some(HeapItem { dist: d, node }) = heap.pop() {
        if d > dist[node] + VALUE_TOL {
            continue;
        }
        for &(next, w) in &adj[node] {
            let nd = d + w;
            if nd < dist[next] - 1e-15 {
                dist[next] = nd;
                pred[next] = Some(node);
                heap.push(HeapItem { dist: nd, node: next });
            }
        }
    }
    (dist, pred)
}

struct HeapItem {
    dist: f64,
    node: usize,
}

impl PartialEq for HeapItem {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == core::cmp::Ordering::Equal
    }
}
impl Eq for HeapItem {}
impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<core::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> core::cmp::Ordering {
        // Min-heap by distance, ties by node id for determinism.
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect(), size: vec![1; n] }
    }

    pub fn find(&mut self, x: usize) -> usize {
        let mut x = x;
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            core::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        true
    }

    pub fn same(&mut self, a: usize, b: usize) -> bool {
        self.find(a) == self.find(b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn torus_field(level: usize) -> DistanceField {
        DistanceField::compute(&fixtures::torus(1.0), 0, &MetricConfig::at_level(level)).unwrap()
    }

    /// Exact flat-torus distance by unfolding over nearby translates.
    fn torus_oracle(x: f64, y: f64) -> f64 {
        let mut best = f64::INFINITY;
        for m in -2..=2 {
            for n in -2..=2 {
                let d = crate::num::hypot(x + m as f64, y + n as f64);
                best = best.min(d);
            }
        }
        best
    }

    #[test]
    fn single_vertex_field_is_zero_at_base() {
        let f = torus_field(0);
        assert_eq!(f.vertex_value(0), 0.0);
    }

    #[test]
    fn torus_level3_max_distance_brackets_diameter() {
        let f = torus_field(3);
        let max = f.max_value();
        assert!(max >= 0.70 && max <= 0.85, "max distance {max}");
    }

    #[test]
    fn torus_vertex_distances_dominate_oracle() {
        // Graph distances can only overestimate the intrinsic metric. At
        // level 2 the original vertex and the three midpoints from level 1
        // sit at known planar positions.
        let f = torus_field(2);
        // Vertex 1 at level>=1 is the midpoint of edge a: position (1/2, 0).
        let d = f.vertex_value(1);
        let oracle = torus_oracle(0.5, 0.0);
        assert!(d >= oracle - 1e-9);
        assert!(d <= oracle + 0.25, "overshoot too large: {d} vs {oracle}");
    }

    #[test]
    fn rp2_distances_bounded_by_graph_diameter() {
        let f = DistanceField::compute(&fixtures::rp2_6(1.0), 0, &MetricConfig::at_level(2)).unwrap();
        // Level-0 skeleton distances are at most 2 (complete graph on six
        // vertices with unit edges has diameter 1; Steiner detours stay
        // under 2), and refinement only shrinks them.
        for v in 0..f.complex().vertex_count() {
            assert!(f.vertex_value(v) <= 2.0 + 1e-9);
        }
    }

    #[test]
    fn lipschitz_along_edges() {
        for seed in [1u64, 7, 23] {
            let (x, p) = fixtures::random_perturbed(seed);
            let f = DistanceField::compute(&x, p, &MetricConfig::at_level(1)).unwrap();
            for e in f.complex().edges() {
                let gap = (f.vertex_value(e.ends.0) - f.vertex_value(e.ends.1)).abs();
                assert!(gap <= e.len + 1e-9);
            }
        }
    }

    #[test]
    fn monotone_under_refinement() {
        let (x, p) = fixtures::tube(6, 3, true);
        let f1 = DistanceField::compute(&x, p, &MetricConfig::at_level(1)).unwrap();
        let f2 = DistanceField::compute(&x, p, &MetricConfig::at_level(2)).unwrap();
        for v in 0..f1.complex().vertex_count() {
            assert!(f2.vertex_value(v) <= f1.vertex_value(v) + 1e-9);
        }
    }

    #[test]
    fn disk_level_length_tracks_circle() {
        let f = DistanceField::compute(&fixtures::disk(64, 1.0), 0, &MetricConfig::at_level(0))
            .unwrap();
        let ls = f.level_set(0.5);
        let expected = core::f64::consts::PI; // circumference of radius 1/2
        assert!((ls.total_length - expected).abs() < 0.03 * expected);
        assert_eq!(ls.components.len(), 1);
    }

    #[test]
    fn out_of_range_level_set_is_empty() {
        let f = torus_field(1);
        let ls = f.level_set(10.0);
        assert!(ls.is_empty());
        assert_eq!(ls.total_length, 0.0);
    }

    #[test]
    fn torus_quarter_level_is_one_component() {
        let f = torus_field(3);
        let ls = f.level_set(0.25);
        assert_eq!(ls.components.len(), 1);
    }

    #[test]
    fn region_components_at_zero() {
        let f = torus_field(1);
        let sub = f.region_components(RegionKind::Sub, 0.0);
        assert_eq!(sub.comps.len(), 1);
        assert_eq!(sub.comps[0].vertices, vec![0]);
        let sup = f.region_components(RegionKind::Super, 0.0);
        assert_eq!(sup.comps.len(), 1);
        assert_eq!(sup.comps[0].vertices.len(), f.complex().vertex_count());
    }

    #[test]
    fn torus_superlevel_under_half_is_single() {
        let f = torus_field(3);
        let sup = f.region_components(RegionKind::Super, 0.45);
        assert_eq!(sup.comps.len(), 1);
        assert_eq!(f.coalesce_counts(0.45), vec![1]);
    }

    #[test]
    fn merged_tripod_coalesces_three_components() {
        let (x, p) = fixtures::tripod(2, [fixtures::LegEnd::Merge; 3]);
        let f = DistanceField::compute(&x, p, &MetricConfig::at_level(0)).unwrap();
        // Mid-height: past the apex cones, before the far merge vertex.
        let counts = f.coalesce_counts(2.0);
        assert_eq!(counts, vec![3]);
    }

    #[test]
    fn capped_tripod_mid_height_components() {
        let (x, p) = fixtures::tripod(2, [fixtures::LegEnd::Cap; 3]);
        let f = DistanceField::compute(&x, p, &MetricConfig::at_level(0)).unwrap();
        let counts = f.coalesce_counts(2.0);
        assert_eq!(counts, vec![1, 1, 1]);
    }

    #[test]
    fn empty_superlevel_has_no_counts() {
        let f = torus_field(1);
        assert!(f.coalesce_counts(10.0).is_empty());
    }

    #[test]
    fn coarea_identity_on_fixtures() {
        for (name, x, p) in fixtures::standard_fixtures() {
            let f = DistanceField::compute(&x, p, &MetricConfig::at_level(1)).unwrap();
            let total = f.coarea_integral(0.0, f64::INFINITY);
            let area = x.area();
            assert!(
                (total - area).abs() <= 1e-9 * area.max(1.0),
                "{name}: coarea {total} vs area {area}"
            );
        }
    }

    #[test]
    fn disk_ball_area_tracks_euclidean() {
        let f = DistanceField::compute(&fixtures::disk(64, 1.0), 0, &MetricConfig::at_level(0))
            .unwrap();
        let a = f.ball_area(0.5);
        let expected = core::f64::consts::PI * 0.25;
        assert!((a - expected).abs() < 0.03 * expected, "{a} vs {expected}");
    }

    #[test]
    fn degenerate_coarea_interval_is_zero() {
        let f = torus_field(1);
        assert_eq!(f.coarea_integral(0.3, 0.3), 0.0);
    }

    #[test]
    fn level_length_is_piecewise_linear_between_breakpoints() {
        let f = torus_field(2);
        let bps = f.breakpoints();
        for w in bps.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            if hi - lo < 1e-6 {
                continue;
            }
            let at = |t: f64| f.level_set(lo + (hi - lo) * t).total_length;
            let (l1, l2, l3) = (at(0.25), at(0.5), at(0.75));
            assert!((l2 - (l1 + l3) / 2.0).abs() < 1e-6 * (1.0 + l2));
        }
    }

    #[test]
    fn sublevel_components_nest() {
        let (x, p) = fixtures::tripod(2, [fixtures::LegEnd::Cap; 3]);
        let f = DistanceField::compute(&x, p, &MetricConfig::at_level(0)).unwrap();
        let small = f.region_components(RegionKind::Sub, 1.5);
        let big = f.region_components(RegionKind::Sub, 2.5);
        for comp in &small.comps {
            let v0 = comp.vertices[0];
            let target = big.component_of_vertex(v0).unwrap();
            for &v in &comp.vertices {
                assert_eq!(big.component_of_vertex(v), Some(target));
            }
        }
    }

    #[test]
    fn wedge_circle_crossings_are_point_components() {
        let (x, p) = fixtures::wedge_rp2_s1(4, 2.4);
        let f = DistanceField::compute(&x, p, &MetricConfig::at_level(0)).unwrap();
        let ls = f.level_set(0.9);
        // Circle edges carry no faces: crossings at distance 0.9 on both
        // sides of the circle are isolated point components.
        assert_eq!(ls.points.len(), 2);
        assert!(ls.components.len() >= 3);
        let zero_len = ls.components.iter().filter(|c| c.length == 0.0).count();
        assert_eq!(zero_len, 2);
    }

    #[test]
    fn scaled_field_scales_distances() {
        let x = fixtures::rp2_6(1.0);
        let y = x.scaled(2.5);
        let fx = DistanceField::compute(&x, 0, &MetricConfig::at_level(1)).unwrap();
        let fy = DistanceField::compute(&y, 0, &MetricConfig::at_level(1)).unwrap();
        for v in 0..fx.complex().vertex_count() {
            assert!((fy.vertex_value(v) - 2.5 * fx.vertex_value(v)).abs() < 1e-9);
        }
    }
}
