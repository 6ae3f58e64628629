//! Systole and pointed systole on the refined 1-skeleton.
//!
//! Loops are closed edge paths on the refined skeleton; the search builds a
//! shortest-path tree per basepoint and certifies candidates through the
//! contractibility oracle. Results are brackets: the upper bound is the
//! first noncontractible candidate, the lower bound is the largest radius
//! below which every candidate was certified contractible.

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;

use crate::complex::{ComplexError, DirEdge, EdgeId, TwoComplex, VertexId};
use crate::homotopy::{Budgets, EdgeLoop, Oracle, Presentation, VerdictKind};
use crate::metric::DistanceField;

/// Pointed-systole bracket at one basepoint.
#[derive(Clone, Debug)]
pub struct PointedSystole {
    pub base: VertexId,
    pub lower: f64,
    pub upper: f64,
    pub witness: Option<EdgeLoop>,
    /// True when every strictly shorter candidate was certified contractible.
    pub certified: bool,
    /// Length of the first candidate the oracle could not decide.
    pub first_unknown: Option<f64>,
}

/// Systole bracket: minimum of the pointed systoles over original vertices.
#[derive(Clone, Debug)]
pub struct SystoleResult {
    pub lower: f64,
    pub upper: f64,
    pub witness: Option<EdgeLoop>,
    pub basepoint: Option<VertexId>,
    pub level: usize,
    pub certified: bool,
    pub per_base: Vec<PointedSystole>,
}

impl SystoleResult {
    pub fn is_finite(&self) -> bool {
        self.upper.is_finite()
    }

    /// Squared-systole bracket over the given area.
    pub fn ratio_bracket(&self, area: f64) -> [f64; 2] {
        [self.lower * self.lower / area, self.upper * self.upper / area]
    }
}

/// Reusable search state for one refined complex: skeleton adjacency plus
/// the presentation-backed oracle. Edge lengths may be swapped out without
/// rebuilding the combinatorial side, which is what the metric optimizer
/// leans on.
pub struct SystoleEngine {
    complex: TwoComplex,
    level: usize,
    original_vertices: usize,
    oracle: Oracle,
    adj: Vec<Vec<(VertexId, EdgeId)>>,
}

impl SystoleEngine {
    pub fn new(x: &TwoComplex, level: usize, budgets: Budgets) -> Result<Self, ComplexError> {
        let refined = x.refine(level)?;
        Ok(Self::on_refined(refined, x.vertex_count(), level, budgets))
    }

    pub fn on_refined(
        refined: TwoComplex,
        original_vertices: usize,
        level: usize,
        budgets: Budgets,
    ) -> Self {
        let pres = Presentation::of_complex(&refined);
        let oracle = Oracle::new(pres, budgets);
        let mut adj = vec![Vec::new(); refined.vertex_count()];
        for (ei, e) in refined.edges().iter().enumerate() {
            adj[e.ends.0].push((e.ends.1, ei));
            if e.ends.0 != e.ends.1 {
                adj[e.ends.1].push((e.ends.0, ei));
            }
        }
        SystoleEngine { complex: refined, level, original_vertices, oracle, adj }
    }

    pub fn complex(&self) -> &TwoComplex {
        &self.complex
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn original_vertices(&self) -> usize {
        self.original_vertices
    }

    pub fn oracle_mut(&mut self) -> &mut Oracle {
        &mut self.oracle
    }

    pub fn oracle(&self) -> &Oracle {
        &self.oracle
    }

    /// Replaces the refined edge lengths, keeping the combinatorial side and
    /// the oracle cache.
    pub fn update_lengths(&mut self, refined_lens: &[f64]) -> Result<(), ComplexError> {
        self.complex = self.complex.with_edge_lengths(refined_lens)?;
        Ok(())
    }

    /// Shortest-path tree over the skeleton: distances and parent edges.
    fn shortest_path_tree(&self, p: VertexId) -> (Vec<f64>, Vec<Option<DirEdge>>) {
        let n = self.adj.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut parent: Vec<Option<DirEdge>> = vec![None; n];
        let mut heap = BinaryHeap::new();
        dist[p] = 0.0;
        heap.push(SkeletonItem { dist: 0.0, node: p });
        while let Some(SkeletonItem { dist: d, node }) = heap.pop() {
            if d > dist[node] + 1e-15 {
                continue;
            }
            for &(next, e) in &self.adj[node] {
                if next == node {
                    continue;
                }
                let nd = d + self.complex.edges()[e].len;
                if nd < dist[next] - 1e-15 {
                    dist[next] = nd;
                    let reversed = self.complex.edges()[e].ends.0 == next;
                    parent[next] = Some(DirEdge { edge: e, reversed });
                    heap.push(SkeletonItem { dist: nd, node: next });
                }
            }
        }
        (dist, parent)
    }

    fn tree_path_from_root(&self, parent: &[Option<DirEdge>], v: VertexId) -> Vec<DirEdge> {
        let mut rev = Vec::new();
        let mut cur = v;
        while let Some(d) = parent[cur] {
            rev.push(d);
            cur = d.start(self.complex.edges());
        }
        rev.reverse();
        rev
    }

    /// Shortest noncontractible loop through `p`, as a bracket.
    ///
    /// Candidates are tree-path + edge + reverse tree-path for each non-tree
    /// edge, scanned in length order. The first noncontractible candidate is
    /// the upper bound; the lower bound is the first length at which
    /// certification failed (or the upper bound itself when none did).
    pub fn pointed_systole(&mut self, p: VertexId) -> PointedSystole {
        let (dist, parent) = self.shortest_path_tree(p);
        let mut candidates: Vec<(f64, EdgeId)> = Vec::new();
        for (ei, e) in self.complex.edges().iter().enumerate() {
            let (u, v) = e.ends;
            let in_tree = parent[u].map(|d| d.edge) == Some(ei)
                || parent[v].map(|d| d.edge) == Some(ei);
            if in_tree {
                continue;
            }
            let len = dist[u] + e.len + dist[v];
            if len.is_finite() {
                candidates.push((len, ei));
            }
        }
        candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

        let mut first_unknown: Option<f64> = None;
        for &(len, ei) in &candidates {
            let e = self.complex.edges()[ei];
            let (u, v) = e.ends;
            let mut edges = self.tree_path_from_root(&parent, u);
            edges.push(DirEdge::forward(ei));
            let back = self.tree_path_from_root(&parent, v);
            edges.extend(back.iter().rev().map(|d| d.inverse()));
            let word = self.oracle.presentation().path_word(&edges);
            if word.is_empty() {
                continue;
            }
            match self.oracle.is_contractible(&word).kind {
                VerdictKind::Contractible => {}
                VerdictKind::Noncontractible => {
                    let lp = EdgeLoop::new(&self.complex, self.oracle.presentation(), p, edges);
                    let lower = first_unknown.unwrap_or(len);
                    return PointedSystole {
                        base: p,
                        lower,
                        upper: len,
                        witness: Some(lp),
                        certified: first_unknown.is_none(),
                        first_unknown,
                    };
                }
                VerdictKind::Unknown => {
                    first_unknown.get_or_insert(len);
                }
            }
        }
        PointedSystole {
            base: p,
            lower: first_unknown.unwrap_or(f64::INFINITY),
            upper: f64::INFINITY,
            witness: None,
            certified: first_unknown.is_none(),
            first_unknown,
        }
    }

    /// Minimum of the pointed systoles over all original vertices.
    pub fn systole(&mut self) -> SystoleResult {
        let mut per_base = Vec::with_capacity(self.original_vertices);
        for p in 0..self.original_vertices {
            per_base.push(self.pointed_systole(p));
        }
        let mut best: Option<usize> = None;
        for (i, ps) in per_base.iter().enumerate() {
            if best.map_or(true, |b: usize| ps.upper < per_base[b].upper) {
                best = Some(i);
            }
        }
        let lower = per_base.iter().map(|b| b.lower).fold(f64::INFINITY, f64::min);
        let upper = per_base.iter().map(|b| b.upper).fold(f64::INFINITY, f64::min);
        let certified = per_base.iter().all(|b| b.certified);
        let (witness, basepoint) = match best {
            Some(i) if per_base[i].upper.is_finite() => {
                (per_base[i].witness.clone(), Some(per_base[i].base))
            }
            _ => (None, None),
        };
        SystoleResult { lower, upper, witness, basepoint, level: self.level, certified, per_base }
    }
}

struct SkeletonItem {
    dist: f64,
    node: usize,
}

impl PartialEq for SkeletonItem {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == core::cmp::Ordering::Equal
    }
}
impl Eq for SkeletonItem {}
impl PartialOrd for SkeletonItem {
    fn partial_cmp(&self, other: &Self) -> Option<core::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for SkeletonItem {
    fn cmp(&self, other: &Self) -> core::cmp::Ordering {
        other.dist.total_cmp(&self.dist).then_with(|| other.node.cmp(&self.node))
    }
}

/// Convenience wrapper: systole of `x` at the given refinement level.
pub fn systole(x: &TwoComplex, level: usize, budgets: Budgets) -> Result<SystoleResult, ComplexError> {
    Ok(SystoleEngine::new(x, level, budgets)?.systole())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StructureIssue {
    /// The loop midpoint is closer to the base than half the loop length:
    /// the witness is not optimal.
    MidpointTooClose,
    /// Distance estimates at the midpoint exceed half the length beyond
    /// tolerance: insufficient refinement of the distance field.
    MidpointBeyondHalf,
    /// A self-intersection sits further from the base than the structural
    /// bound allows.
    SelfIntersectionTooFar { vertex: VertexId },
}

#[derive(Clone, Debug)]
pub struct StructureReport {
    pub loop_len: f64,
    pub midpoint_dist: f64,
    pub self_intersections: Vec<(VertexId, f64)>,
}

/// Checks the two-minimizing-arcs structure of a pointed systolic witness:
/// the midpoint must sit at distance L/2 from the base, and every
/// self-intersection within half of (L - systole lower bound).
pub fn check_simple_structure(
    lp: &EdgeLoop,
    field: &DistanceField,
    sys_lower: f64,
    tol: f64,
) -> Result<StructureReport, (StructureIssue, StructureReport)> {
    let x = field.complex();
    assert_eq!(
        x.vertex_count(),
        field.vertex_values().len(),
        "loop and field must share the refined complex"
    );
    let total = lp.len;
    let half = total / 2.0;

    // Locate the midpoint along the walk.
    let mut acc = 0.0;
    let mut mid_estimate = half + 1.0;
    for d in &lp.edges {
        let len = x.edges()[d.edge].len;
        if acc + len >= half - 1e-15 {
            let offset = half - acc; // from the walk-start of this edge
            let a = d.start(x.edges());
            let b = d.end(x.edges());
            mid_estimate =
                (field.vertex_value(a) + offset).min(field.vertex_value(b) + (len - offset));
            break;
        }
        acc += len;
    }

    let mut self_intersections = Vec::new();
    let mut visits: Vec<(VertexId, f64)> = Vec::new();
    let mut pos = 0.0;
    for d in &lp.edges {
        let v = d.start(x.edges());
        if pos > 0.0 && v == lp.base {
            // returning to the base mid-loop counts as a self-intersection
            self_intersections.push((v, 0.0));
        } else if visits.iter().any(|&(w, _)| w == v) {
            self_intersections.push((v, field.vertex_value(v)));
        }
        visits.push((v, pos));
        pos += x.edges()[d.edge].len;
    }

    let report = StructureReport { loop_len: total, midpoint_dist: mid_estimate, self_intersections };
    if mid_estimate < half - tol {
        return Err((StructureIssue::MidpointTooClose, report));
    }
    if mid_estimate > half + tol {
        return Err((StructureIssue::MidpointBeyondHalf, report));
    }
    let bound = (total - sys_lower) / 2.0 + tol;
    for &(v, dist) in &report.self_intersections {
        if dist > bound {
            return Err((StructureIssue::SelfIntersectionTooFar { vertex: v }, report.clone()));
        }
    }
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LooseVerdict {
    Loose,
    NotLoose,
    Inconclusive,
}

#[derive(Clone, Debug)]
pub struct LooseReport {
    pub base: VertexId,
    pub loop_len: f64,
    pub verdict: LooseVerdict,
    /// Radius and component count of the loose witness, when found.
    pub witness: Option<(f64, usize)>,
    /// Radii examined (slab midpoints between level breakpoints plus uniform
    /// samples).
    pub scanned: Vec<f64>,
}

/// Scans the radii between (L - sys)/2 and L/2 for level curves met by the
/// loop in two distinct components. The component pattern is piecewise
/// constant in r with breakpoints at vertex distance values, so scanning
/// every slab midpoint is exhaustive.
pub fn detect_loose(
    lp: &EdgeLoop,
    field: &DistanceField,
    sys_bracket: [f64; 2],
    samples: usize,
) -> LooseReport {
    let total = lp.len;
    let wide_lo = (total - sys_bracket[1]) / 2.0;
    let strict_lo = (total - sys_bracket[0]) / 2.0;
    let hi = total / 2.0;
    let mut rs: Vec<f64> = Vec::new();
    if hi > wide_lo {
        let n = samples.max(3);
        for i in 0..n {
            rs.push(wide_lo + (hi - wide_lo) * (i as f64 + 0.5) / n as f64);
        }
        for w in field.breakpoints().windows(2) {
            let mid = (w[0] + w[1]) / 2.0;
            if mid > wide_lo && mid < hi {
                rs.push(mid);
            }
        }
        rs.sort_by(|a, b| a.total_cmp(b));
        rs.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    }

    let f = field.vertex_values();
    let mut strict_witness = None;
    let mut wide_multi = false;
    for &r in &rs {
        let ls = field.level_set(r);
        let mut comps: Vec<usize> = lp
            .edges
            .iter()
            .filter(|d| {
                let e = field.complex().edges()[d.edge];
                (f[e.ends.0] < ls.value) != (f[e.ends.1] < ls.value)
            })
            .filter_map(|d| ls.component_of_edge(d.edge))
            .collect();
        comps.sort_unstable();
        comps.dedup();
        if comps.len() >= 2 {
            if r > strict_lo {
                strict_witness = Some((r, comps.len()));
                break;
            }
            wide_multi = true;
        }
    }

    let verdict = if strict_witness.is_some() {
        LooseVerdict::Loose
    } else if wide_multi {
        LooseVerdict::Inconclusive
    } else {
        LooseVerdict::NotLoose
    };
    LooseReport { base: lp.base, loop_len: total, verdict, witness: strict_witness, scanned: rs }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::metric::MetricConfig;
    use crate::num::sqrt;

    #[test]
    fn torus_systole_is_one_at_level_zero() {
        let s = systole(&fixtures::torus(1.0), 0, Budgets::small()).unwrap();
        assert!((s.lower - 1.0).abs() < 1e-12);
        assert!((s.upper - 1.0).abs() < 1e-12);
        assert!(s.certified);
        let w = s.witness.as_ref().unwrap();
        assert_eq!(w.edges.len(), 1);
    }

    #[test]
    fn scaled_torus_systole_scales() {
        let s = systole(&fixtures::torus(2.5), 0, Budgets::small()).unwrap();
        assert!((s.lower - 2.5).abs() < 1e-12);
        assert!((s.upper - 2.5).abs() < 1e-12);
    }

    #[test]
    fn rp2_level0_systole_is_three_certified() {
        let s = systole(&fixtures::rp2_6(1.0), 0, Budgets::small()).unwrap();
        assert!((s.upper - 3.0).abs() < 1e-12);
        assert!((s.lower - 3.0).abs() < 1e-12);
        assert!(s.certified, "coset enumeration certifies all shorter loops");
        assert_eq!(s.witness.as_ref().unwrap().edges.len(), 3);
    }

    #[test]
    fn rp2_refined_systole_stays_bracketed() {
        // Skeleton loops cannot cut corners in the equilateral metric: the
        // medial detour around a vertex exactly ties the corner path, so the
        // bracket stays at 3 under refinement instead of shrinking.
        let s0 = systole(&fixtures::rp2_6(1.0), 0, Budgets::small()).unwrap();
        let s2 = systole(&fixtures::rp2_6(1.0), 2, Budgets::small()).unwrap();
        assert!(s2.upper <= s0.upper + 1e-12);
        assert!(s2.lower > 0.0);
        assert!(s2.upper >= 2.0, "stays above the continuous systole");
    }

    #[test]
    fn simply_connected_complex_has_infinite_systole() {
        let (x, _) = fixtures::tube(6, 2, true);
        let s = systole(&x, 0, Budgets::small()).unwrap();
        assert!(s.upper.is_infinite());
        assert!(s.lower.is_infinite());
        assert!(s.witness.is_none());
        assert!(s.certified);
    }

    #[test]
    fn pointed_dominates_global() {
        let mut engine = SystoleEngine::new(&fixtures::rp2_6(1.0), 1, Budgets::small()).unwrap();
        let s = engine.systole();
        for ps in &s.per_base {
            assert!(s.upper <= ps.upper + 1e-12);
        }
    }

    #[test]
    fn monotone_refinement_upper_bound() {
        let mut prev = f64::INFINITY;
        for level in 0..=2 {
            let s = systole(&fixtures::rp2_6(1.0), level, Budgets::small()).unwrap();
            assert!(s.upper <= prev + 1e-12);
            prev = s.upper;
        }
    }

    #[test]
    fn torus_witness_structure() {
        let x = fixtures::torus(1.0);
        let s = systole(&x, 0, Budgets::small()).unwrap();
        let f = DistanceField::compute(&x, 0, &MetricConfig::at_level(0)).unwrap();
        let rep = check_simple_structure(s.witness.as_ref().unwrap(), &f, s.lower, 1e-9).unwrap();
        assert!((rep.midpoint_dist - 0.5).abs() < 1e-9);
        assert!(rep.self_intersections.is_empty());
    }

    #[test]
    fn rp2_witness_structure_midpoint() {
        let x = fixtures::rp2_6(1.0);
        let s = systole(&x, 0, Budgets::small()).unwrap();
        let w = s.witness.clone().unwrap();
        let f = DistanceField::compute(&x, w.base, &MetricConfig::at_level(0)).unwrap();
        let rep = check_simple_structure(&w, &f, s.lower, 1e-9).unwrap();
        assert!((rep.midpoint_dist - 1.5).abs() < 1e-9);
    }

    #[test]
    fn perturbed_loop_fails_structure_check() {
        // Walk out along an edge and back, then around the witness: the
        // midpoint lands near the base.
        let x = fixtures::rp2_6(1.0);
        let mut engine = SystoleEngine::new(&x, 0, Budgets::small()).unwrap();
        let s = engine.pointed_systole(0);
        let w = s.witness.clone().unwrap();
        let spur = w.edges[0];
        let mut edges = vec![spur, spur.inverse()];
        edges.extend(w.edges.iter().copied());
        let bad = EdgeLoop::new(engine.complex(), engine.oracle().presentation(), 0, edges);
        let f = DistanceField::compute(&x, 0, &MetricConfig::at_level(0)).unwrap();
        let err = check_simple_structure(&bad, &f, s.lower, 1e-9);
        assert!(err.is_err());
    }

    #[test]
    fn rp2_witness_is_not_loose() {
        let x = fixtures::rp2_6(1.0);
        let s = systole(&x, 1, Budgets::small()).unwrap();
        let w = s.witness.clone().unwrap();
        let f = DistanceField::compute(&x, w.base, &MetricConfig::at_level(1)).unwrap();
        let rep = detect_loose(&w, &f, [s.lower, s.upper], 64);
        assert_eq!(rep.verdict, LooseVerdict::NotLoose);
    }

    #[test]
    fn wedge_circle_loop_is_loose() {
        let (x, p) = fixtures::wedge_rp2_s1(4, 2.4);
        let s = systole(&x, 0, Budgets::small()).unwrap();
        assert!((s.upper - 2.4).abs() < 1e-9, "circle is the systole");
        let w = s.witness.clone().unwrap();
        assert_eq!(w.base, p);
        let f = DistanceField::compute(&x, w.base, &MetricConfig::at_level(0)).unwrap();
        let rep = detect_loose(&w, &f, [s.lower, s.upper], 64);
        assert_eq!(rep.verdict, LooseVerdict::Loose);
        let (r, k) = rep.witness.unwrap();
        assert!(k >= 2);
        assert!(r > 0.0 && r < 1.2);
    }

    #[test]
    fn torus_systolic_loop_is_not_loose() {
        // The level curves of the flat torus stay connected, so the
        // generator loop never meets two components.
        let x = fixtures::torus(1.0);
        let s = systole(&x, 2, Budgets::small()).unwrap();
        let w = s.witness.clone().unwrap();
        let f = DistanceField::compute(&x, 0, &MetricConfig::at_level(2)).unwrap();
        let rep = detect_loose(&w, &f, [s.lower, s.upper], 64);
        assert_eq!(rep.verdict, LooseVerdict::NotLoose);
    }

    #[test]
    fn systolic_ratio_scale_invariant() {
        let a = fixtures::rp2_6(1.0);
        let b = a.scaled(2.5);
        let sa = systole(&a, 1, Budgets::small()).unwrap();
        let sb = systole(&b, 1, Budgets::small()).unwrap();
        let ra = sa.ratio_bracket(a.area());
        let rb = sb.ratio_bracket(b.area());
        assert!((ra[0] - rb[0]).abs() < 1e-9);
        assert!((ra[1] - rb[1]).abs() < 1e-9);
        let _ = sqrt(2.0);
    }
}
