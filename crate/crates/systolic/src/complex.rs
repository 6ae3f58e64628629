//! Finite 2-complexes with piecewise flat metrics.
//!
//! A complex is stored combinatorially: vertices are indices, edges carry an
//! endpoint pair and a positive length, faces reference three edges that chain
//! into a closed walk. Faces may share endpoints or be glued to loop edges
//! (delta-complex generality), but every face is a genuine Euclidean triangle
//! determined by its three edge lengths.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::num::sqrt;
use crate::snf::{self, SnfError};

pub type VertexId = usize;
pub type EdgeId = usize;
pub type FaceId = usize;

/// Default cap on midpoint refinement passes.
pub const DEFAULT_MAX_REFINE_LEVEL: usize = 6;
/// Cell-count guard for integer homology computations.
pub const HOMOLOGY_CELL_GUARD: usize = 20_000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub ends: (VertexId, VertexId),
    pub len: f64,
}

/// One directed traversal of an edge inside a face boundary walk.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DirEdge {
    pub edge: EdgeId,
    pub reversed: bool,
}

impl DirEdge {
    pub fn forward(edge: EdgeId) -> Self {
        DirEdge { edge, reversed: false }
    }

    pub fn inverse(self) -> Self {
        DirEdge { edge: self.edge, reversed: self.reversed ^ true }
    }

    pub fn start(&self, edges: &[Edge]) -> VertexId {
        let e = edges[self.edge];
        if self.reversed {
            e.ends.1
        } else {
            e.ends.0
        }
    }

    pub fn end(&self, edges: &[Edge]) -> VertexId {
        self.inverse().start(edges)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Face {
    pub edges: [EdgeId; 3],
    /// Oriented boundary walk; `walk[i]` starts at corner `i`.
    pub walk: [DirEdge; 3],
}

/// Planar layout of a face: corner `i` is the start of `walk[i]`.
#[derive(Clone, Copy, Debug)]
pub struct FaceGeometry {
    pub face: FaceId,
    pub corners: [[f64; 2]; 3],
    pub area: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ComplexError {
    DisconnectedComplex,
    TriangleInequalityViolation { face: FaceId },
    DanglingReference { what: String },
    NonPositiveLength { edge: EdgeId },
    InvalidFaceCycle { face: FaceId },
    RefinementBudgetExceeded { requested: usize, max: usize },
    MatrixTooLarge { cells: usize },
}

impl core::fmt::Display for ComplexError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ComplexError::DisconnectedComplex => write!(f, "complex is not connected"),
            ComplexError::TriangleInequalityViolation { face } => {
                write!(f, "face {face} violates the strict triangle inequality")
            }
            ComplexError::DanglingReference { what } => write!(f, "dangling reference: {what}"),
            ComplexError::NonPositiveLength { edge } => {
                write!(f, "edge {edge} must have a finite positive length")
            }
            ComplexError::InvalidFaceCycle { face } => {
                write!(f, "edges of face {face} do not chain into a closed walk")
            }
            ComplexError::RefinementBudgetExceeded { requested, max } => {
                write!(f, "refinement level {requested} exceeds the configured maximum {max}")
            }
            ComplexError::MatrixTooLarge { cells } => {
                write!(f, "boundary matrix with {cells} cells exceeds the homology guard")
            }
        }
    }
}

/// Raw combinatorial description, as produced by a parser or generator.
#[derive(Clone, Debug, Default)]
pub struct RawComplex {
    pub vertex_count: usize,
    pub edges: Vec<(VertexId, VertexId, f64)>,
    pub faces: Vec<[EdgeId; 3]>,
}

/// Ranks and torsion of first homology.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct H1Summary {
    pub free_rank: usize,
    pub torsion: Vec<i128>,
}

#[derive(Clone, Debug)]
pub struct TwoComplex {
    vertex_count: usize,
    edges: Vec<Edge>,
    faces: Vec<Face>,
    geoms: Vec<FaceGeometry>,
    vertex_edges: Vec<Vec<EdgeId>>,
    edge_faces: Vec<Vec<FaceId>>,
}

impl TwoComplex {
    /// Validates a raw description and builds the complex.
    pub fn build(raw: &RawComplex) -> Result<Self, ComplexError> {
        let nv = raw.vertex_count;
        let mut edges = Vec::with_capacity(raw.edges.len());
        for (i, &(u, v, len)) in raw.edges.iter().enumerate() {
            if u >= nv || v >= nv {
                return Err(ComplexError::DanglingReference {
                    what: format!("edge {i} references a missing vertex"),
                });
            }
            if !(len.is_finite() && len > 0.0) {
                return Err(ComplexError::NonPositiveLength { edge: i });
            }
            edges.push(Edge { ends: (u, v), len });
        }

        let mut faces = Vec::with_capacity(raw.faces.len());
        for (i, trip) in raw.faces.iter().enumerate() {
            for &e in trip {
                if e >= edges.len() {
                    return Err(ComplexError::DanglingReference {
                        what: format!("face {i} references a missing edge"),
                    });
                }
            }
            let walk = orient_face(&edges, trip).ok_or(ComplexError::InvalidFaceCycle { face: i })?;
            let lens = [edges[trip[0]].len, edges[trip[1]].len, edges[trip[2]].len];
            if !strict_triangle(lens) {
                return Err(ComplexError::TriangleInequalityViolation { face: i });
            }
            faces.push(Face { edges: *trip, walk });
        }

        let mut vertex_edges = vec![Vec::new(); nv];
        for (i, e) in edges.iter().enumerate() {
            vertex_edges[e.ends.0].push(i);
            if e.ends.1 != e.ends.0 {
                vertex_edges[e.ends.1].push(i);
            }
        }
        let mut edge_faces = vec![Vec::new(); edges.len()];
        for (i, f) in faces.iter().enumerate() {
            for &e in &f.edges {
                edge_faces[e].push(i);
            }
        }

        let geoms = faces
            .iter()
            .enumerate()
            .map(|(i, f)| layout_face(&edges, f, i))
            .collect();

        let complex = TwoComplex { vertex_count: nv, edges, faces, geoms, vertex_edges, edge_faces };
        if !complex.is_connected() {
            return Err(ComplexError::DisconnectedComplex);
        }
        Ok(complex)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn geometry(&self, face: FaceId) -> &FaceGeometry {
        &self.geoms[face]
    }

    pub fn vertex_edges(&self, v: VertexId) -> &[EdgeId] {
        &self.vertex_edges[v]
    }

    pub fn edge_faces(&self, e: EdgeId) -> &[FaceId] {
        &self.edge_faces[e]
    }

    /// True when every edge bounds at least one face.
    pub fn is_pure(&self) -> bool {
        self.edge_faces.iter().all(|fs| !fs.is_empty())
    }

    pub fn cell_count(&self) -> usize {
        self.vertex_count + self.edges.len() + self.faces.len()
    }

    fn is_connected(&self) -> bool {
        if self.vertex_count == 0 {
            return false;
        }
        let mut seen = vec![false; self.vertex_count];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &e in &self.vertex_edges[v] {
                let (a, b) = self.edges[e].ends;
                for w in [a, b] {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Total Heron area over all faces; zero for a graph.
    pub fn area(&self) -> f64 {
        self.geoms.iter().map(|g| g.area).sum()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertex_count as i64 - self.edges.len() as i64 + self.faces.len() as i64
    }

    /// Returns a new complex with every edge length multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> TwoComplex {
        let raw = RawComplex {
            vertex_count: self.vertex_count,
            edges: self.edges.iter().map(|e| (e.ends.0, e.ends.1, e.len * factor)).collect(),
            faces: self.faces.iter().map(|f| f.edges).collect(),
        };
        TwoComplex::build(&raw).expect("scaling preserves validity")
    }

    /// Returns a copy with the given edge lengths (same combinatorics).
    pub fn with_edge_lengths(&self, lens: &[f64]) -> Result<TwoComplex, ComplexError> {
        assert_eq!(lens.len(), self.edges.len());
        let raw = RawComplex {
            vertex_count: self.vertex_count,
            edges: self
                .edges
                .iter()
                .zip(lens)
                .map(|(e, &l)| (e.ends.0, e.ends.1, l))
                .collect(),
            faces: self.faces.iter().map(|f| f.edges).collect(),
        };
        TwoComplex::build(&raw)
    }

    /// Metric-preserving midpoint subdivision, iterated `level` times.
    ///
    /// Each pass keeps the original vertices (indices unchanged), appends one
    /// midpoint vertex per edge, splits each edge in two, and cuts each face
    /// into four similar triangles. Total area is unchanged.
    pub fn refine(&self, level: usize) -> Result<TwoComplex, ComplexError> {
        self.refine_with_max(level, DEFAULT_MAX_REFINE_LEVEL)
    }

    pub fn refine_with_max(&self, level: usize, max: usize) -> Result<TwoComplex, ComplexError> {
        self.refine_traced(level, max).map(|(c, _)| c)
    }

    /// Like `refine_with_max`, also returning the map from refined edges to
    /// the original edge each derives from. Every refined edge has length
    /// `original / 2^level`.
    pub fn refine_traced(
        &self,
        level: usize,
        max: usize,
    ) -> Result<(TwoComplex, Vec<EdgeId>), ComplexError> {
        if level > max {
            return Err(ComplexError::RefinementBudgetExceeded { requested: level, max });
        }
        let mut current = self.clone();
        let mut source: Vec<EdgeId> = (0..self.edges.len()).collect();
        for _ in 0..level {
            let (next, step) = current.subdivide_once()?;
            source = step.into_iter().map(|parent| source[parent]).collect();
            current = next;
        }
        Ok((current, source))
    }

    fn subdivide_once(&self) -> Result<(TwoComplex, Vec<EdgeId>), ComplexError> {
        let nv = self.vertex_count;
        let ne = self.edges.len();
        let mut raw = RawComplex {
            vertex_count: nv + ne,
            edges: Vec::with_capacity(2 * ne + 3 * self.faces.len()),
            faces: Vec::with_capacity(4 * self.faces.len()),
        };
        let mut parent_edge: Vec<EdgeId> = Vec::with_capacity(raw.edges.capacity());
        // Edge halves: edge e splits into 2e (from ends.0) and 2e+1 (to ends.1).
        for (i, e) in self.edges.iter().enumerate() {
            let m = nv + i;
            raw.edges.push((e.ends.0, m, e.len / 2.0));
            raw.edges.push((m, e.ends.1, e.len / 2.0));
            parent_edge.push(i);
            parent_edge.push(i);
        }
        for f in &self.faces {
            // Medial edge opposite walk slot i joins the midpoints of the
            // other two sides; its length is half the opposite side.
            let mid = |slot: usize| nv + f.walk[slot].edge;
            let medial_base = raw.edges.len();
            for slot in 0..3 {
                let a = mid((slot + 1) % 3);
                let b = mid((slot + 2) % 3);
                raw.edges.push((a, b, self.edges[f.walk[slot].edge].len / 2.0));
                parent_edge.push(f.walk[slot].edge);
            }
            // Half of side `slot` incident to corner `c`: corner c is the
            // start of walk[c] and the end of walk[c-1].
            let half = |slot: usize, corner: usize| -> EdgeId {
                let d = f.walk[slot];
                let from_start = corner == slot;
                if from_start ^ d.reversed {
                    2 * d.edge
                } else {
                    2 * d.edge + 1
                }
            };
            // Three corner triangles plus the medial triangle.
            for corner in 0..3 {
                let prev = (corner + 2) % 3;
                raw.faces.push([half(corner, corner), medial_base + ((corner + 1) % 3), half(prev, corner)]);
            }
            raw.faces.push([medial_base, medial_base + 1, medial_base + 2]);
        }
        TwoComplex::build(&raw).map(|c| (c, parent_edge))
    }

    fn boundary_matrices(&self) -> Result<(Vec<Vec<i128>>, Vec<Vec<i128>>), ComplexError> {
        if self.cell_count() > HOMOLOGY_CELL_GUARD {
            return Err(ComplexError::MatrixTooLarge { cells: self.cell_count() });
        }
        let mut d1 = vec![vec![0i128; self.edges.len()]; self.vertex_count];
        for (j, e) in self.edges.iter().enumerate() {
            d1[e.ends.1][j] += 1;
            d1[e.ends.0][j] -= 1;
        }
        let mut d2 = vec![vec![0i128; self.faces.len()]; self.edges.len()];
        for (j, f) in self.faces.iter().enumerate() {
            for d in &f.walk {
                d2[d.edge][j] += if d.reversed { -1 } else { 1 };
            }
        }
        Ok((d1, d2))
    }

    /// First homology of the complex from integer boundary matrices.
    pub fn h1(&self) -> Result<H1Summary, ComplexError> {
        let (d1, d2) = self.boundary_matrices()?;
        let r1 = snf::rank(d1).map_err(map_snf)?;
        let s2 = snf::smith(d2, false).map_err(map_snf)?;
        let cycles = self.edges.len() - r1;
        Ok(H1Summary {
            free_rank: cycles - s2.rank,
            torsion: s2.divisors.into_iter().filter(|d| *d > 1).collect(),
        })
    }

    /// Bracket on the free rank of first homology. Exact when the complex is
    /// within the homology guard, otherwise the trivial interval.
    pub fn betti1_bounds(&self) -> (usize, usize) {
        match self.h1() {
            Ok(h) => (h.free_rank, h.free_rank),
            Err(_) => {
                let upper = self.edges.len().saturating_sub(self.vertex_count) + 1;
                (0, upper)
            }
        }
    }
}

fn map_snf(e: SnfError) -> ComplexError {
    match e {
        SnfError::TooLarge { cells } => ComplexError::MatrixTooLarge { cells },
        SnfError::Overflow => ComplexError::MatrixTooLarge { cells: usize::MAX },
    }
}

fn strict_triangle(lens: [f64; 3]) -> bool {
    let perim: f64 = lens.iter().sum();
    let slack = 1e-12 * perim;
    for i in 0..3 {
        if lens[i] >= lens[(i + 1) % 3] + lens[(i + 2) % 3] - slack {
            return false;
        }
    }
    true
}

/// Finds an orientation assignment chaining the three edges into a closed
/// walk. The first valid assignment in lexicographic order over reversal
/// flags is chosen, which makes relator words deterministic.
fn orient_face(edges: &[Edge], trip: &[EdgeId; 3]) -> Option<[DirEdge; 3]> {
    for mask in 0..8u32 {
        let walk = [
            DirEdge { edge: trip[0], reversed: mask & 1 != 0 },
            DirEdge { edge: trip[1], reversed: mask & 2 != 0 },
            DirEdge { edge: trip[2], reversed: mask & 4 != 0 },
        ];
        let closes = (0..3).all(|i| walk[i].end(edges) == walk[(i + 1) % 3].start(edges));
        if closes {
            return Some(walk);
        }
    }
    None
}

fn layout_face(edges: &[Edge], f: &Face, id: FaceId) -> FaceGeometry {
    let a = edges[f.walk[0].edge].len; // corner0 -> corner1
    let b = edges[f.walk[1].edge].len; // corner1 -> corner2
    let c = edges[f.walk[2].edge].len; // corner2 -> corner0
    let x = (a * a + c * c - b * b) / (2.0 * a);
    let y2 = c * c - x * x;
    let y = sqrt(if y2 > 0.0 { y2 } else { 0.0 });
    FaceGeometry { face: id, corners: [[0.0, 0.0], [a, 0.0], [x, y]], area: heron(a, b, c) }
}

pub fn heron(a: f64, b: f64, c: f64) -> f64 {
    // Kahan's numerically stable form.
    let mut s = [a, b, c];
    s.sort_by(|p, q| q.partial_cmp(p).unwrap());
    let [x, y, z] = s;
    let t = (x + (y + z)) * (z - (x - y)) * (z + (x - y)) * (x + (y - z));
    sqrt(if t > 0.0 { t } else { 0.0 }) / 4.0
}
