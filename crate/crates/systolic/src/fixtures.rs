//! Deterministic test complexes used across the toolkit and by `sc2 gen`.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::complex::{RawComplex, TwoComplex, VertexId};
use crate::num::{exp, ln, sin, sqrt};

const PI: f64 = core::f64::consts::PI;

/// Flat unit-square torus scaled by `scale`: one vertex, two edges of length
/// `scale`, a diagonal, and two faces.
pub fn torus(scale: f64) -> TwoComplex {
    let raw = RawComplex {
        vertex_count: 1,
        edges: vec![
            (0, 0, scale),
            (0, 0, scale),
            (0, 0, scale * sqrt(2.0)),
        ],
        faces: vec![[0, 1, 2], [1, 0, 2]],
    };
    TwoComplex::build(&raw).expect("torus fixture is valid")
}

/// Face list of the six-vertex projective plane (antipodal icosahedron),
/// zero-indexed. Every pair of vertices spans an edge; every edge lies in
/// exactly two faces.
pub const RP2_FACES: [[usize; 3]; 10] = [
    [0, 1, 2],
    [0, 2, 3],
    [0, 3, 4],
    [0, 4, 5],
    [0, 5, 1],
    [1, 2, 4],
    [2, 3, 5],
    [3, 4, 1],
    [4, 5, 2],
    [5, 1, 3],
];

/// Minimal triangulation of the projective plane with all edges of length
/// `edge`.
pub fn rp2_6(edge: f64) -> TwoComplex {
    let (raw, _) = rp2_6_raw(edge, 0);
    TwoComplex::build(&raw).expect("rp2_6 fixture is valid")
}

/// Builds the projective-plane description on vertices `base..base+6` and
/// returns it along with the (u, v) -> edge-index lookup.
fn rp2_6_raw(edge: f64, base: usize) -> (RawComplex, Vec<Vec<Option<usize>>>) {
    let mut raw = RawComplex { vertex_count: base + 6, ..Default::default() };
    let mut lookup = vec![vec![None; 6]; 6];
    for u in 0..6 {
        for v in (u + 1)..6 {
            lookup[u][v] = Some(raw.edges.len());
            lookup[v][u] = lookup[u][v];
            raw.edges.push((base + u, base + v, edge));
        }
    }
    for f in RP2_FACES {
        let e = |a: usize, b: usize| lookup[a][b].unwrap();
        raw.faces.push([e(f[0], f[1]), e(f[1], f[2]), e(f[2], f[0])]);
    }
    (raw, lookup)
}

/// Fan triangulation of a flat disk: center vertex 0, `n` rim vertices,
/// spokes of length `radius`.
pub fn disk(n: usize, radius: f64) -> TwoComplex {
    assert!(n >= 3);
    let rim = 2.0 * radius * sin(PI / n as f64);
    let mut raw = RawComplex { vertex_count: n + 1, ..Default::default() };
    for i in 0..n {
        raw.edges.push((0, 1 + i, radius)); // spoke i
    }
    let rim_base = raw.edges.len();
    for i in 0..n {
        raw.edges.push((1 + i, 1 + (i + 1) % n, rim));
    }
    for i in 0..n {
        raw.faces.push([i, rim_base + i, (i + 1) % n]);
    }
    TwoComplex::build(&raw).expect("disk fixture is valid")
}

struct Builder {
    raw: RawComplex,
}

impl Builder {
    fn new() -> Self {
        Builder { raw: RawComplex::default() }
    }

    fn vertex(&mut self) -> VertexId {
        self.raw.vertex_count += 1;
        self.raw.vertex_count - 1
    }

    fn vertices(&mut self, n: usize) -> Vec<VertexId> {
        (0..n).map(|_| self.vertex()).collect()
    }

    fn edge(&mut self, u: VertexId, v: VertexId, len: f64) -> usize {
        self.raw.edges.push((u, v, len));
        self.raw.edges.len() - 1
    }

    fn face(&mut self, a: usize, b: usize, c: usize) {
        self.raw.faces.push([a, b, c]);
    }

    /// Cone from `apex` onto the cycle `ring` (given as vertex list with its
    /// ring edge ids); slant edges get length `slant`.
    fn cone(&mut self, apex: VertexId, ring: &[VertexId], ring_edges: &[usize], slant: f64) {
        let n = ring.len();
        let slants: Vec<usize> = ring.iter().map(|&v| self.edge(apex, v, slant)).collect();
        for i in 0..n {
            self.face(slants[i], ring_edges[i], slants[(i + 1) % n]);
        }
    }

    /// Prism band between two rings of equal size.
    fn band(
        &mut self,
        ring_a: &[VertexId],
        edges_a: &[usize],
        ring_b: &[VertexId],
        height: f64,
        diag: f64,
        ring_len: f64,
    ) -> (Vec<usize>, Vec<usize>) {
        let n = ring_a.len();
        let verticals: Vec<usize> =
            (0..n).map(|i| self.edge(ring_a[i], ring_b[i], height)).collect();
        let edges_b: Vec<usize> =
            (0..n).map(|i| self.edge(ring_b[i], ring_b[(i + 1) % n], ring_len)).collect();
        for i in 0..n {
            let j = (i + 1) % n;
            let d = self.edge(ring_a[j], ring_b[i], diag);
            self.face(edges_a[i], d, verticals[i]);
            self.face(verticals[j], edges_b[i], d);
        }
        (edges_b, verticals)
    }

    /// Moebius patch closing a 5-ring: the projective plane minus the open
    /// star of a vertex, glued along the ring.
    fn moebius_cap(&mut self, ring: &[VertexId], ring_edges: &[usize], len: f64) {
        assert_eq!(ring.len(), 5);
        let inner: Vec<usize> = (0..5)
            .map(|i| self.edge(ring[i], ring[(i + 2) % 5], len))
            .collect();
        // inner[i] joins ring[i] to ring[i+2]
        // faces: (i, i+1, i+3) as vertices, realized by edges
        for i in 0..5 {
            // vertices v_i -> v_{i+1} (ring), v_{i+1} -> v_{i+3} (inner[i+1]),
            // v_{i+3} -> v_i (inner[i+3]).
            self.face(ring_edges[i], inner[(i + 1) % 5], inner[(i + 3) % 5]);
        }
    }

    fn build(self) -> TwoComplex {
        TwoComplex::build(&self.raw).expect("fixture construction is valid")
    }
}

/// Triangulated cylinder of `bands` prism segments over an `n`-gon
/// cross-section with unit ring and height edges. With `capped` both ends are
/// coned off (a sphere); otherwise it is an open annulus with an essential
/// waist. Returns the complex and the basepoint (cap apex, or a boundary-ring
/// vertex when open).
pub fn tube(n: usize, bands: usize, capped: bool) -> (TwoComplex, VertexId) {
    assert!(n >= 3 && bands >= 1);
    let mut b = Builder::new();
    let diag = sqrt(2.0);
    let base = if capped { Some(b.vertex()) } else { None };
    let mut rings: Vec<Vec<VertexId>> = Vec::new();
    let mut ring_edges: Vec<Vec<usize>> = Vec::new();
    let first = b.vertices(n);
    let first_edges: Vec<usize> =
        (0..n).map(|i| b.edge(first[i], first[(i + 1) % n], 1.0)).collect();
    rings.push(first);
    ring_edges.push(first_edges);
    for k in 0..bands {
        let next = b.vertices(n);
        let (e, _) = b.band(&rings[k], &ring_edges[k], &next, 1.0, diag, 1.0);
        rings.push(next);
        ring_edges.push(e);
    }
    if let Some(apex) = base {
        b.cone(apex, &rings[0], &ring_edges[0], 1.0);
        let far = b.vertex();
        b.cone(far, &rings[bands], &ring_edges[bands], 1.0);
        (b.build(), apex)
    } else {
        let p = rings[0][0];
        (b.build(), p)
    }
}

/// How a tripod leg ends.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LegEnd {
    /// Coned off with a disk (collapses to a trivial cap).
    Cap,
    /// Closed with a Moebius patch (an essential end).
    Moebius,
    /// Coned onto the shared far vertex.
    Merge,
}

/// Three pentagonal tubes emanating from a shared apex. Each leg consists of
/// a cone from the apex, `bands` prism segments, and the requested ending.
/// All edges have unit length except band diagonals.
pub fn tripod(bands: usize, ends: [LegEnd; 3]) -> (TwoComplex, VertexId) {
    let n = 5;
    let mut b = Builder::new();
    let apex = b.vertex();
    let diag = sqrt(2.0);
    let merge_vertex = if ends.iter().any(|e| *e == LegEnd::Merge) { Some(b.vertex()) } else { None };
    for end in ends {
        let ring = b.vertices(n);
        let ring_e: Vec<usize> = (0..n).map(|i| b.edge(ring[i], ring[(i + 1) % n], 1.0)).collect();
        b.cone(apex, &ring, &ring_e, 1.0);
        let mut cur = ring;
        let mut cur_e = ring_e;
        for _ in 0..bands {
            let next = b.vertices(n);
            let (e, _) = b.band(&cur, &cur_e, &next, 1.0, diag, 1.0);
            cur = next;
            cur_e = e;
        }
        match end {
            LegEnd::Cap => {
                let far = b.vertex();
                b.cone(far, &cur, &cur_e, 1.0);
            }
            LegEnd::Moebius => b.moebius_cap(&cur, &cur_e, 1.0),
            LegEnd::Merge => b.cone(merge_vertex.unwrap(), &cur, &cur_e, 1.0),
        }
    }
    (b.build(), apex)
}

/// Projective plane wedged with a circle of `m` edges and total length
/// `circle_len`, attached at vertex 0.
pub fn wedge_rp2_s1(m: usize, circle_len: f64) -> (TwoComplex, VertexId) {
    assert!(m >= 2);
    let (mut raw, _) = rp2_6_raw(1.0, 0);
    let step = circle_len / m as f64;
    let start = raw.vertex_count;
    raw.vertex_count += m - 1;
    raw.edges.push((0, start, step));
    for i in 0..(m - 2) {
        raw.edges.push((start + i, start + i + 1, step));
    }
    raw.edges.push((start + m - 2, 0, step));
    (TwoComplex::build(&raw).expect("wedge fixture is valid"), 0)
}

/// Two projective planes, each with one face removed, joined by a two-band
/// triangular tube along the exposed boundary cycles. The basepoint is on the
/// middle ring of the tube.
pub fn double_rp2_tube() -> (TwoComplex, VertexId) {
    let mut b = Builder::new();
    let mut raw = RawComplex::default();
    // Copy A on vertices 0..6 and copy B on 6..12, both minus face [1,2,4].
    let mut boundaries = Vec::new();
    for base in [0usize, 6] {
        let mut local = vec![vec![None; 6]; 6];
        for u in 0..6 {
            for v in (u + 1)..6 {
                local[u][v] = Some(raw.edges.len());
                local[v][u] = local[u][v];
                raw.edges.push((base + u, base + v, 1.0));
            }
        }
        for f in RP2_FACES {
            if f == [1, 2, 4] {
                continue;
            }
            let e = |a: usize, b: usize| local[a][b].unwrap();
            raw.faces.push([e(f[0], f[1]), e(f[1], f[2]), e(f[2], f[0])]);
        }
        let e = |a: usize, b: usize| local[a][b].unwrap();
        boundaries.push(([base + 1, base + 2, base + 4], [e(1, 2), e(2, 4), e(4, 1)]));
    }
    raw.vertex_count = 12;
    b.raw = raw;
    // Middle ring.
    let mid = b.vertices(3);
    let diag = sqrt(2.0);
    let (ring_a, edges_a) = boundaries[0].clone();
    let (ring_b, edges_b) = boundaries[1].clone();
    let (mid_edges, _) = b.band(&ring_a.to_vec(), &edges_a.to_vec(), &mid, 1.0, diag, 1.0);
    // Band from the middle ring to copy B's boundary, reusing B's edges.
    let n = 3;
    let verticals: Vec<usize> = (0..n).map(|i| b.edge(mid[i], ring_b[i], 1.0)).collect();
    for i in 0..n {
        let j = (i + 1) % n;
        let d = b.edge(mid[j], ring_b[i], diag);
        b.face(mid_edges[i], d, verticals[i]);
        b.face(verticals[j], edges_b[i], d);
    }
    let base = mid[0];
    (b.build(), base)
}

/// Canonical fixture set used by sweep-style tests: `(name, complex, basepoint)`.
pub fn standard_fixtures() -> Vec<(&'static str, TwoComplex, VertexId)> {
    let mut out: Vec<(&'static str, TwoComplex, VertexId)> = Vec::new();
    out.push(("torus", torus(1.0), 0));
    out.push(("rp2_6", rp2_6(1.0), 0));
    out.push(("disk", disk(16, 1.0), 0));
    let (t, p) = tube(6, 3, true);
    out.push(("tube", t, p));
    let (t, p) = tripod(2, [LegEnd::Cap, LegEnd::Cap, LegEnd::Cap]);
    out.push(("tripod", t, p));
    let (t, p) = wedge_rp2_s1(4, 2.4);
    out.push(("wedge_rp2_s1", t, p));
    let (t, p) = double_rp2_tube();
    out.push(("double_rp2_tube", t, p));
    out
}

/// Standard normal sample via Box-Muller.
pub fn normal(rng: &mut impl Rng) -> f64 {
    let u1: f64 = rng.gen_range(1e-12..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    sqrt(-2.0 * ln(u1)) * crate::num::cos(2.0 * PI * u2)
}

/// Random valid complex: a fixture with log-normally perturbed edge lengths,
/// repaired until every face satisfies the strict triangle inequality.
pub fn random_perturbed(seed: u64) -> (TwoComplex, VertexId) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pick = rng.gen_range(0..6u32);
    let (base, p) = match pick {
        0 => (torus(1.0), 0),
        1 => (rp2_6(1.0), 0),
        2 => (disk(8 + (seed % 9) as usize, 1.0), 0),
        3 => tube(4 + (seed % 3) as usize, 2, true),
        4 => tripod(1 + (seed % 2) as usize, [LegEnd::Cap, LegEnd::Cap, LegEnd::Cap]),
        _ => wedge_rp2_s1(3 + (seed % 3) as usize, 2.0 + (seed % 5) as f64 * 0.3),
    };
    let mut lens: Vec<f64> = base.edges().iter().map(|e| e.len).collect();
    for l in lens.iter_mut() {
        *l *= exp(0.15 * normal(&mut rng));
    }
    for _ in 0..100 {
        let mut fixed = true;
        for f in base.faces() {
            let ls = [lens[f.edges[0]], lens[f.edges[1]], lens[f.edges[2]]];
            let perim: f64 = ls.iter().sum();
            for k in 0..3 {
                let other = perim - ls[k];
                if ls[k] >= other - 1e-9 * perim {
                    lens[f.edges[k]] = other * 0.99;
                    fixed = false;
                }
            }
        }
        if fixed {
            break;
        }
    }
    match base.with_edge_lengths(&lens) {
        Ok(c) => (c, p),
        Err(_) => (base, p),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rp2_faces_tile_every_edge_twice() {
        let x = rp2_6(1.0);
        assert_eq!(x.vertex_count(), 6);
        assert_eq!(x.edges().len(), 15);
        assert_eq!(x.faces().len(), 10);
        for e in 0..x.edges().len() {
            assert_eq!(x.edge_faces(e).len(), 2, "edge {e}");
        }
        assert_eq!(x.euler_characteristic(), 1);
    }

    #[test]
    fn disk_has_expected_counts() {
        let x = disk(64, 1.0);
        assert_eq!(x.vertex_count(), 65);
        assert_eq!(x.faces().len(), 64);
        let h = x.h1().unwrap();
        assert_eq!((h.free_rank, h.torsion.len()), (0, 0));
    }

    #[test]
    fn capped_tube_is_a_sphere() {
        let (x, _) = tube(6, 3, true);
        assert_eq!(x.euler_characteristic(), 2);
        let h = x.h1().unwrap();
        assert_eq!((h.free_rank, h.torsion.len()), (0, 0));
        for e in 0..x.edges().len() {
            assert_eq!(x.edge_faces(e).len(), 2);
        }
    }

    #[test]
    fn open_tube_is_an_annulus() {
        let (x, _) = tube(6, 2, false);
        assert_eq!(x.euler_characteristic(), 0);
        let h = x.h1().unwrap();
        assert_eq!((h.free_rank, h.torsion.len()), (1, 0));
    }

    #[test]
    fn capped_tripod_homology() {
        let (x, _) = tripod(2, [LegEnd::Cap, LegEnd::Cap, LegEnd::Cap]);
        // Three spheres sharing cone points pairwise through the apex: simply
        // connected, H1 = 0.
        let h = x.h1().unwrap();
        assert_eq!((h.free_rank, h.torsion.len()), (0, 0));
    }

    #[test]
    fn merged_tripod_has_free_rank_two() {
        let (x, _) = tripod(2, [LegEnd::Merge, LegEnd::Merge, LegEnd::Merge]);
        let h = x.h1().unwrap();
        assert_eq!(h.free_rank, 2);
        assert!(h.torsion.is_empty());
    }

    #[test]
    fn moebius_tripod_has_torsion_per_essential_leg() {
        let (x, _) = tripod(1, [LegEnd::Moebius, LegEnd::Cap, LegEnd::Cap]);
        let h = x.h1().unwrap();
        assert_eq!(h.free_rank, 0);
        assert_eq!(h.torsion, vec![2]);

        let (x, _) = tripod(1, [LegEnd::Moebius, LegEnd::Moebius, LegEnd::Cap]);
        let h = x.h1().unwrap();
        assert_eq!(h.free_rank, 0);
        assert_eq!(h.torsion, vec![2, 2]);
    }

    #[test]
    fn wedge_homology() {
        let (x, _) = wedge_rp2_s1(4, 2.4);
        let h = x.h1().unwrap();
        assert_eq!(h.free_rank, 1);
        assert_eq!(h.torsion, vec![2]);
    }

    #[test]
    fn double_rp2_is_a_klein_bottle() {
        let (x, _) = double_rp2_tube();
        let h = x.h1().unwrap();
        assert_eq!(h.free_rank, 1);
        assert_eq!(h.torsion, vec![2]);
        assert_eq!(x.euler_characteristic(), 0);
        for e in 0..x.edges().len() {
            assert_eq!(x.edge_faces(e).len(), 2);
        }
    }

    #[test]
    fn random_complexes_are_valid() {
        for seed in 0..30 {
            let (x, p) = random_perturbed(seed);
            assert!(x.vertex_count() > 0);
            assert!(p < x.vertex_count());
            assert!(x.area() >= 0.0);
        }
    }
}
