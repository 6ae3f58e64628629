//! Fundamental-group presentations, edge loops, and a budgeted three-valued
//! contractibility oracle with machine-checkable certificates.
//!
//! The oracle pipeline: free reduction and spanning-tree collapse, the
//! abelianization test, coset enumeration over the trivial subgroup, and a
//! bounded rewrite search in the presentation 2-complex. The word problem is
//! undecidable in general, so `Unknown` is a first-class verdict.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::vec;
use alloc::vec::Vec;

use crate::complex::{DirEdge, EdgeId, TwoComplex, VertexId};
use crate::snf::{self, Smith};

/// Nonzero letter: generator `g` is `g+1`, its inverse `-(g+1)`.
pub type Letter = i32;
pub type Word = Vec<Letter>;

pub fn letter(gen: usize, inverted: bool) -> Letter {
    let l = (gen + 1) as i32;
    if inverted {
        -l
    } else {
        l
    }
}

pub fn letter_gen(l: Letter) -> usize {
    (l.unsigned_abs() - 1) as usize
}

/// Free reduction by stack cancellation.
pub fn reduce(word: &[Letter]) -> Word {
    let mut out: Word = Vec::with_capacity(word.len());
    for &l in word {
        if out.last() == Some(&-l) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    out
}

pub fn invert(word: &[Letter]) -> Word {
    word.iter().rev().map(|&l| -l).collect()
}

/// Cyclic reduction of an already freely reduced word.
pub fn cyclic_reduce(word: &[Letter]) -> Word {
    let mut w = word.to_vec();
    while w.len() >= 2 && w.first().copied() == w.last().map(|&l| -l) {
        w.pop();
        w.remove(0);
    }
    w
}

#[derive(Clone, Debug)]
pub struct Presentation {
    gens: usize,
    relators: Vec<Word>,
    /// For complexes: spanning-tree parent and the edge from it, per vertex.
    tree_parent: Vec<Option<(VertexId, DirEdge)>>,
    /// Generator index of each non-tree edge.
    edge_gen: Vec<Option<usize>>,
    /// Edge realizing each generator.
    gen_edge: Vec<EdgeId>,
}

impl Presentation {
    /// Presentation with explicit generators and relators, without an
    /// underlying complex.
    pub fn direct(gens: usize, relators: Vec<Word>) -> Self {
        let relators = relators.iter().map(|r| cyclic_reduce(&reduce(r))).collect();
        Presentation { gens, relators, tree_parent: Vec::new(), edge_gen: Vec::new(), gen_edge: Vec::new() }
    }

    /// Standard presentation of the fundamental group: one generator per
    /// non-spanning-tree edge, one relator per face boundary. The spanning
    /// tree is grown breadth-first from vertex 0 in edge-index order.
    pub fn of_complex(x: &TwoComplex) -> Self {
        let nv = x.vertex_count();
        let mut tree_parent: Vec<Option<(VertexId, DirEdge)>> = vec![None; nv];
        let mut tree_edge = vec![false; x.edges().len()];
        let mut seen = vec![false; nv];
        seen[0] = true;
        let mut queue = VecDeque::from([0usize]);
        while let Some(v) = queue.pop_front() {
            for &e in x.vertex_edges(v) {
                let (a, b) = x.edges()[e].ends;
                let w = if a == v { b } else { a };
                if !seen[w] {
                    seen[w] = true;
                    tree_edge[e] = true;
                    // directed from the parent v toward w
                    let reversed = x.edges()[e].ends.0 == w;
                    tree_parent[w] = Some((v, DirEdge { edge: e, reversed }));
                    queue.push_back(w);
                }
            }
        }

        let mut edge_gen = vec![None; x.edges().len()];
        let mut gen_edge = Vec::new();
        for e in 0..x.edges().len() {
            if !tree_edge[e] {
                edge_gen[e] = Some(gen_edge.len());
                gen_edge.push(e);
            }
        }

        let mut pres = Presentation {
            gens: gen_edge.len(),
            relators: Vec::new(),
            tree_parent,
            edge_gen,
            gen_edge,
        };
        let mut relators = Vec::new();
        for f in x.faces() {
            let w: Word = pres.path_word_raw(&f.walk);
            relators.push(cyclic_reduce(&reduce(&w)));
        }
        pres.relators = relators;
        pres
    }

    pub fn gens(&self) -> usize {
        self.gens
    }

    pub fn relators(&self) -> &[Word] {
        &self.relators
    }

    pub fn gen_edge(&self) -> &[EdgeId] {
        &self.gen_edge
    }

    pub fn edge_generator(&self, e: EdgeId) -> Option<usize> {
        self.edge_gen.get(e).copied().flatten()
    }

    fn path_word_raw(&self, path: &[DirEdge]) -> Word {
        path.iter()
            .filter_map(|d| self.edge_gen[d.edge].map(|g| letter(g, d.reversed)))
            .collect()
    }

    /// Image of a closed edge path under the spanning-tree collapse, freely
    /// reduced.
    pub fn path_word(&self, path: &[DirEdge]) -> Word {
        reduce(&self.path_word_raw(path))
    }

    /// Directed tree path from the root to `v`.
    pub fn tree_path(&self, v: VertexId) -> Vec<DirEdge> {
        let mut rev = Vec::new();
        let mut cur = v;
        while let Some((parent, d)) = self.tree_parent[cur] {
            rev.push(d);
            cur = parent;
        }
        rev.reverse();
        rev
    }
}

/// Closed edge path with its length and collapsed word.
#[derive(Clone, Debug)]
pub struct EdgeLoop {
    pub base: VertexId,
    pub edges: Vec<DirEdge>,
    pub len: f64,
    pub word: Word,
}

impl EdgeLoop {
    pub fn new(x: &TwoComplex, pres: &Presentation, base: VertexId, edges: Vec<DirEdge>) -> Self {
        let es = x.edges();
        if !edges.is_empty() {
            assert_eq!(edges[0].start(es), base, "loop must start at its base");
            assert_eq!(edges.last().unwrap().end(es), base, "loop must close up");
            for w in edges.windows(2) {
                assert_eq!(w[0].end(es), w[1].start(es), "consecutive edges must chain");
            }
        }
        let len = edges.iter().map(|d| es[d.edge].len).sum();
        let word = pres.path_word(&edges);
        EdgeLoop { base, edges, len, word }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VerdictKind {
    Contractible,
    Noncontractible,
    Unknown,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Certificate {
    /// The word collapses to the empty word under free reduction.
    EmptyWord,
    /// Nonzero coordinate in the free part of first homology.
    AbelianFree { coord: usize, value: i128 },
    /// Nonzero residue in a torsion coordinate of first homology.
    AbelianTorsion { coord: usize, residue: i128, modulus: i128 },
    /// Completed coset table separates the word from the identity.
    CosetSeparation { cosets: u32, end: u32 },
    /// Tracing the word through the coset table returns to the identity
    /// coset; sound even on partial tables.
    CosetTrace { cosets: u32 },
    /// Relator insertions reducing the word to the identity.
    RelatorReduction { steps: Vec<RewriteStep> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RewriteStep {
    pub pos: usize,
    pub relator: usize,
    pub rotation: usize,
    pub inverted: bool,
}

#[derive(Clone, Debug)]
pub struct Verdict {
    pub kind: VerdictKind,
    pub certificate: Option<Certificate>,
    /// Coset rows allocated plus rewrite states explored.
    pub budget_used: usize,
}

impl Verdict {
    fn new(kind: VerdictKind, certificate: Certificate, budget_used: usize) -> Self {
        Verdict { kind, certificate: Some(certificate), budget_used }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Budgets {
    pub tc_rows: usize,
    pub tc_cells: usize,
    pub bfs_depth: usize,
    pub bfs_states: usize,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets { tc_rows: 1_000_000, tc_cells: 20_000_000, bfs_depth: 12, bfs_states: 200_000 }
    }
}

impl Budgets {
    pub fn small() -> Self {
        Budgets { tc_rows: 20_000, tc_cells: 2_000_000, bfs_depth: 8, bfs_states: 20_000 }
    }
}

/// Abelianization data: Smith form of the relator exponent matrix with the
/// row transform, so words map to quotient coordinates.
#[derive(Clone, Debug)]
struct H1Data {
    gens: usize,
    rank: usize,
    divisors: Vec<i128>,
    u: Vec<Vec<i128>>,
    pub free_rank: usize,
    pub torsion: Vec<i128>,
}

impl H1Data {
    fn new(pres: &Presentation) -> Option<Self> {
        let g = pres.gens;
        let mut m = vec![vec![0i128; pres.relators.len().max(1)]; g];
        for (j, r) in pres.relators.iter().enumerate() {
            for &l in r {
                let i = letter_gen(l);
                m[i][j] += if l > 0 { 1 } else { -1 };
            }
        }
        let Smith { rank, divisors, u } = snf::smith(m, true).ok()?;
        Some(H1Data {
            gens: g,
            rank,
            torsion: divisors.iter().copied().filter(|&d| d > 1).collect(),
            divisors,
            u: u.unwrap(),
            free_rank: g - rank,
        })
    }

    fn exponent_vector(&self, w: &[Letter]) -> Vec<i128> {
        let mut x = vec![0i128; self.gens];
        for &l in w {
            x[letter_gen(l)] += if l > 0 { 1 } else { -1 };
        }
        x
    }

    /// First nonzero quotient coordinate of the word's homology class.
    fn witness(&self, w: &[Letter]) -> Option<Certificate> {
        let x = self.exponent_vector(w);
        let y: Vec<i128> = (0..self.gens)
            .map(|i| (0..self.gens).map(|k| self.u[i][k] * x[k]).sum())
            .collect();
        for (i, &yi) in y.iter().enumerate().skip(self.rank) {
            if yi != 0 {
                return Some(Certificate::AbelianFree { coord: i, value: yi });
            }
        }
        for i in 0..self.rank {
            let d = self.divisors[i];
            if d > 1 && y[i].rem_euclid(d) != 0 {
                return Some(Certificate::AbelianTorsion {
                    coord: i,
                    residue: y[i].rem_euclid(d),
                    modulus: d,
                });
            }
        }
        None
    }
}

/// Coset table over the trivial subgroup. Cosets are numbered from 1;
/// entry 0 means undefined. Entries are always true statements about cosets,
/// so a trace returning to coset 1 certifies triviality even when the
/// enumeration was cut off by its budget.
#[derive(Clone, Debug)]
pub struct CosetTable {
    cols: usize,
    rows: Vec<Vec<u32>>,
    parent: Vec<u32>,
    live: usize,
    pub complete: bool,
}

fn col_of(l: Letter) -> usize {
    let g = letter_gen(l);
    if l > 0 {
        2 * g
    } else {
        2 * g + 1
    }
}

fn inv_col(c: usize) -> usize {
    c ^ 1
}

impl CosetTable {
    pub fn enumerate(pres: &Presentation, budgets: &Budgets) -> Self {
        let cols = 2 * pres.gens;
        let row_cap = if cols == 0 {
            1
        } else {
            budgets.tc_rows.min(budgets.tc_cells / cols).max(2)
        };
        let mut t = CosetTable {
            cols,
            rows: vec![vec![0; cols]],
            parent: vec![0, 1], // 1-indexed; parent[0] unused
            live: 1,
            complete: false,
        };
        if pres.gens == 0 {
            t.complete = true;
            return t;
        }
        let relators: Vec<Vec<usize>> = pres
            .relators
            .iter()
            .filter(|r| !r.is_empty())
            .map(|r| r.iter().map(|&l| col_of(l)).collect())
            .collect();

        let mut exhausted = false;
        let mut c: u32 = 1;
        'outer: while (c as usize) <= t.rows.len() {
            if t.find(c) != c {
                c += 1;
                continue;
            }
            for rel in &relators {
                if !t.scan_and_fill(c, rel, row_cap) {
                    exhausted = true;
                    break 'outer;
                }
                if t.find(c) != c {
                    c += 1;
                    continue 'outer;
                }
            }
            // Fill any generator entries not forced by relators so that the
            // completeness check below is meaningful.
            for col in 0..t.cols {
                if t.entry(c, col) == 0 {
                    if !t.define(c, col, row_cap) {
                        exhausted = true;
                        break 'outer;
                    }
                }
                if t.find(c) != c {
                    c += 1;
                    continue 'outer;
                }
            }
            c += 1;
        }
        if !exhausted {
            t.complete = true;
        }
        t
    }

    pub fn live_cosets(&self) -> u32 {
        self.live as u32
    }

    pub fn allocated_rows(&self) -> usize {
        self.rows.len()
    }

    fn find(&mut self, c: u32) -> u32 {
        let mut c = c;
        while self.parent[c as usize] != c {
            let p = self.parent[c as usize];
            self.parent[c as usize] = self.parent[p as usize];
            c = self.parent[c as usize];
        }
        c
    }

    fn entry(&mut self, c: u32, col: usize) -> u32 {
        let c = self.find(c);
        let e = self.rows[c as usize - 1][col];
        if e == 0 {
            0
        } else {
            let e = self.find(e);
            self.rows[c as usize - 1][col] = e;
            e
        }
    }

    fn set(&mut self, c: u32, col: usize, d: u32, queue: &mut Vec<(u32, u32)>) {
        let c = self.find(c);
        let d = self.find(d);
        let cur = self.entry(c, col);
        if cur == 0 {
            self.rows[c as usize - 1][col] = d;
            // mirror entry
            let back = self.entry(d, inv_col(col));
            if back == 0 {
                self.rows[d as usize - 1][inv_col(col)] = c;
            } else if back != c {
                queue.push((back, c));
            }
        } else if cur != d {
            queue.push((cur, d));
        }
    }

    fn define(&mut self, c: u32, col: usize, row_cap: usize) -> bool {
        if self.rows.len() >= row_cap {
            return false;
        }
        self.rows.push(vec![0; self.cols]);
        self.parent.push(self.rows.len() as u32);
        self.live += 1;
        let d = self.rows.len() as u32;
        let mut queue = Vec::new();
        self.set(c, col, d, &mut queue);
        self.process(&mut queue);
        true
    }

    fn process(&mut self, queue: &mut Vec<(u32, u32)>) {
        while let Some((a, b)) = queue.pop() {
            let a = self.find(a);
            let b = self.find(b);
            if a == b {
                continue;
            }
            let (keep, drop) = if a < b { (a, b) } else { (b, a) };
            self.parent[drop as usize] = keep;
            self.live -= 1;
            for col in 0..self.cols {
                let e = self.rows[drop as usize - 1][col];
                if e != 0 {
                    self.rows[drop as usize - 1][col] = 0;
                    let e = self.find(e);
                    self.set(keep, col, e, queue);
                }
            }
        }
    }

    fn scan_and_fill(&mut self, c: u32, rel: &[usize], row_cap: usize) -> bool {
        loop {
            let mut f = self.find(c);
            let mut i = 0;
            while i < rel.len() {
                let next = self.entry(f, rel[i]);
                if next == 0 {
                    break;
                }
                f = next;
                i += 1;
            }
            if i == rel.len() {
                let c = self.find(c);
                if f != c {
                    let mut queue = vec![(f, c)];
                    self.process(&mut queue);
                }
                return true;
            }
            let mut b = self.find(c);
            let mut j = rel.len();
            while j > i {
                let prev = self.entry(b, inv_col(rel[j - 1]));
                if prev == 0 {
                    break;
                }
                b = prev;
                j -= 1;
            }
            if j == i {
                // both scans met: forced coincidence
                let mut queue = vec![(f, b)];
                self.process(&mut queue);
                return true;
            }
            if j == i + 1 {
                let mut queue = Vec::new();
                self.set(f, rel[i], b, &mut queue);
                self.process(&mut queue);
                return true;
            }
            if !self.define(f, rel[i], row_cap) {
                return false;
            }
        }
    }

    /// Follows the word from coset 1; `None` when an entry is missing.
    pub fn trace(&mut self, w: &[Letter]) -> Option<u32> {
        let mut c = self.find(1);
        for &l in w {
            let next = self.entry(c, col_of(l));
            if next == 0 {
                return None;
            }
            c = next;
        }
        Some(c)
    }
}

/// Contractibility oracle bound to one presentation, with memoized verdicts
/// and a lazily built coset table.
pub struct Oracle {
    pres: Presentation,
    h1: Option<H1Data>,
    budgets: Budgets,
    table: Option<CosetTable>,
    memo: BTreeMap<Word, Verdict>,
    variants: Option<Vec<(Word, RewriteStep)>>,
}

impl Oracle {
    pub fn new(pres: Presentation, budgets: Budgets) -> Self {
        let h1 = H1Data::new(&pres);
        Oracle { pres, h1, budgets, table: None, memo: BTreeMap::new(), variants: None }
    }

    pub fn presentation(&self) -> &Presentation {
        &self.pres
    }

    pub fn budgets(&self) -> &Budgets {
        &self.budgets
    }

    pub fn h1_free_rank(&self) -> usize {
        self.h1.as_ref().map_or(0, |h| h.free_rank)
    }

    pub fn h1_torsion(&self) -> Vec<i128> {
        self.h1.as_ref().map_or_else(Vec::new, |h| h.torsion.clone())
    }

    fn ensure_table(&mut self) -> &mut CosetTable {
        if self.table.is_none() {
            self.table = Some(CosetTable::enumerate(&self.pres, &self.budgets));
        }
        self.table.as_mut().unwrap()
    }

    fn ensure_variants(&mut self) -> &[(Word, RewriteStep)] {
        if self.variants.is_none() {
            let mut vs = Vec::new();
            for (ri, r) in self.pres.relators.iter().enumerate() {
                if r.is_empty() {
                    continue;
                }
                for inverted in [false, true] {
                    let base = if inverted { invert(r) } else { r.clone() };
                    for rot in 0..base.len() {
                        let mut v = base[rot..].to_vec();
                        v.extend_from_slice(&base[..rot]);
                        vs.push((v, RewriteStep { pos: 0, relator: ri, rotation: rot, inverted }));
                    }
                }
            }
            self.variants = Some(vs);
        }
        self.variants.as_ref().unwrap()
    }

    pub fn is_contractible(&mut self, word: &[Letter]) -> Verdict {
        let w = reduce(word);
        if let Some(v) = self.memo.get(&w) {
            return v.clone();
        }
        let v = self.decide(&w);
        self.memo.insert(w, v.clone());
        v
    }

    fn decide(&mut self, w: &Word) -> Verdict {
        if w.is_empty() {
            return Verdict::new(VerdictKind::Contractible, Certificate::EmptyWord, 0);
        }
        if let Some(h) = &self.h1 {
            if let Some(cert) = h.witness(w) {
                return Verdict::new(VerdictKind::Noncontractible, cert, 0);
            }
        }
        let table = self.ensure_table();
        let rows = table.allocated_rows();
        let live = table.live_cosets();
        if let Some(end) = table.trace(w) {
            let one = table.find(1);
            if end == one {
                return Verdict::new(
                    VerdictKind::Contractible,
                    Certificate::CosetTrace { cosets: live },
                    rows,
                );
            }
            if table.complete {
                return Verdict::new(
                    VerdictKind::Noncontractible,
                    Certificate::CosetSeparation { cosets: live, end },
                    rows,
                );
            }
        }
        if let Some(steps) = self.rewrite_search(w) {
            return Verdict::new(
                VerdictKind::Contractible,
                Certificate::RelatorReduction { steps },
                rows,
            );
        }
        Verdict { kind: VerdictKind::Unknown, certificate: None, budget_used: rows }
    }

    /// Breadth-first search over freely reduced words reachable by inserting
    /// relator conjugates, looking for the empty word.
    fn rewrite_search(&mut self, w: &Word) -> Option<Vec<RewriteStep>> {
        let budgets = self.budgets;
        let max_rel = self.pres.relators.iter().map(|r| r.len()).max().unwrap_or(0);
        if max_rel == 0 {
            return None;
        }
        let cap = w.len() + max_rel;
        let variants: Vec<(Word, RewriteStep)> = self.ensure_variants().to_vec();
        let mut seen: BTreeMap<Word, (Word, RewriteStep)> = BTreeMap::new();
        let mut queue: VecDeque<(Word, usize)> = VecDeque::new();
        queue.push_back((w.clone(), 0));
        let mut visited: BTreeSet<Word> = BTreeSet::new();
        visited.insert(w.clone());
        while let Some((cur, depth)) = queue.pop_front() {
            if depth >= budgets.bfs_depth || visited.len() >= budgets.bfs_states {
                continue;
            }
            for (v, step) in &variants {
                for pos in 0..=cur.len() {
                    let mut cand: Word = Vec::with_capacity(cur.len() + v.len());
                    cand.extend_from_slice(&cur[..pos]);
                    cand.extend_from_slice(v);
                    cand.extend_from_slice(&cur[pos..]);
                    let cand = reduce(&cand);
                    if cand.len() > cap || visited.contains(&cand) {
                        continue;
                    }
                    let step_here = RewriteStep { pos, ..*step };
                    seen.insert(cand.clone(), (cur.clone(), step_here));
                    if cand.is_empty() {
                        // reconstruct the insertion sequence
                        let mut steps = Vec::new();
                        let mut at = cand;
                        loop {
                            let Some((parent, st)) = seen.get(&at) else { break };
                            steps.push(*st);
                            if parent == w {
                                break;
                            }
                            at = parent.clone();
                        }
                        steps.reverse();
                        return Some(steps);
                    }
                    visited.insert(cand.clone());
                    queue.push_back((cand, depth + 1));
                }
            }
        }
        None
    }

    /// Re-checks a verdict's certificate against this presentation.
    pub fn replay(&mut self, word: &[Letter], verdict: &Verdict) -> bool {
        let w = reduce(word);
        match (&verdict.kind, &verdict.certificate) {
            (VerdictKind::Contractible, Some(Certificate::EmptyWord)) => w.is_empty(),
            (VerdictKind::Noncontractible, Some(Certificate::AbelianFree { coord, value })) => {
                self.h1.as_ref().is_some_and(|h| {
                    matches!(h.witness(&w),
                        Some(Certificate::AbelianFree { coord: c, value: v }) if c == *coord && v == *value)
                })
            }
            (
                VerdictKind::Noncontractible,
                Some(Certificate::AbelianTorsion { coord, residue, modulus }),
            ) => self.h1.as_ref().is_some_and(|h| {
                matches!(h.witness(&w),
                    Some(Certificate::AbelianTorsion { coord: c, residue: r, modulus: m })
                        if c == *coord && r == *residue && m == *modulus)
            }),
            (VerdictKind::Contractible, Some(Certificate::CosetTrace { .. })) => {
                let t = self.ensure_table();
                let one = t.find(1);
                t.trace(&w) == Some(one)
            }
            (VerdictKind::Noncontractible, Some(Certificate::CosetSeparation { .. })) => {
                let t = self.ensure_table();
                if !t.complete {
                    return false;
                }
                let one = t.find(1);
                matches!(t.trace(&w), Some(end) if end != one)
            }
            (VerdictKind::Contractible, Some(Certificate::RelatorReduction { steps })) => {
                let mut cur = w;
                for st in steps {
                    let Some(r) = self.pres.relators.get(st.relator) else { return false };
                    let base = if st.inverted { invert(r) } else { r.clone() };
                    if st.rotation >= base.len() || st.pos > cur.len() {
                        return false;
                    }
                    let mut v = base[st.rotation..].to_vec();
                    v.extend_from_slice(&base[..st.rotation]);
                    let mut cand: Word = Vec::new();
                    cand.extend_from_slice(&cur[..st.pos]);
                    cand.extend_from_slice(&v);
                    cand.extend_from_slice(&cur[st.pos..]);
                    cur = reduce(&cand);
                }
                cur.is_empty()
            }
            _ => false,
        }
    }

    /// Certifies that the presented group is trivial, when possible.
    pub fn certify_trivial(&mut self) -> VerdictKind {
        if let Some(h) = &self.h1 {
            if h.free_rank > 0 || !h.torsion.is_empty() {
                return VerdictKind::Noncontractible; // group provably nontrivial
            }
        }
        let t = self.ensure_table();
        if t.complete && t.live_cosets() == 1 {
            VerdictKind::Contractible // group provably trivial
        } else {
            VerdictKind::Unknown
        }
    }

    /// Certifies commutativity of all generator pairs, used to sharpen the
    /// corank upper bound. Skipped for large presentations.
    fn certify_abelian(&mut self) -> bool {
        if self.pres.gens > 12 {
            return false;
        }
        for a in 0..self.pres.gens {
            for b in (a + 1)..self.pres.gens {
                let w = vec![
                    letter(a, false),
                    letter(b, false),
                    letter(a, true),
                    letter(b, true),
                ];
                if self.is_contractible(&w).kind != VerdictKind::Contractible {
                    return false;
                }
            }
        }
        true
    }

    /// Honest interval for the corank: the maximal rank of a free epimorphic
    /// image. Lower bounds come from the free part of homology and from
    /// coalescence witnesses; the upper bound is the free rank of homology,
    /// sharpened to one for certified-abelian groups.
    pub fn corank_bounds(&mut self, witnesses: &[CoalesceWitness]) -> (usize, usize) {
        let free_rank = self.h1_free_rank();
        let mut lower = if free_rank >= 1 { 1 } else { 0 };
        for w in witnesses {
            if w.sublevel_connected && w.coalescing_components >= 1 {
                lower = lower.max(w.coalescing_components - 1);
            }
        }
        let mut upper = free_rank;
        if upper > 1 && self.unused_generators() == 0 && self.certify_abelian() {
            upper = 1;
        }
        (lower.min(upper), upper)
    }

    fn unused_generators(&self) -> usize {
        let mut used = vec![false; self.pres.gens];
        for r in &self.pres.relators {
            for &l in r {
                used[letter_gen(l)] = true;
            }
        }
        used.iter().filter(|u| !**u).count()
    }

    /// Honest interval for the free index of the Grushko decomposition.
    /// A generator absent from every relator splits off as a free factor;
    /// a loose-loop witness raises the lower bound to one.
    pub fn fig_bounds(&mut self, witnesses: &[CoalesceWitness], loose_witness: bool) -> (usize, usize) {
        let (_, corank_upper) = self.corank_bounds(witnesses);
        let mut lower = self.unused_generators();
        if loose_witness {
            lower = lower.max(1);
        }
        (lower.min(corank_upper), corank_upper)
    }

    /// Freeness and category classification.
    pub fn classify_cat(&mut self) -> CatReport {
        let torsion = !self.h1_torsion().is_empty();
        let free = if torsion {
            Tri::No
        } else if tietze_free(&self.pres) {
            Tri::Yes
        } else {
            Tri::Unknown
        };
        let cat = match free {
            Tri::Yes => Some(1),
            Tri::No => Some(2),
            Tri::Unknown => None,
        };
        CatReport { free, cat, syscat_equals_cat: true }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Tri {
    Yes,
    No,
    Unknown,
}

#[derive(Clone, Copy, Debug)]
pub struct CatReport {
    pub free: Tri,
    pub cat: Option<u8>,
    pub syscat_equals_cat: bool,
}

/// Evidence that several level components lie in one superlevel component.
#[derive(Clone, Copy, Debug)]
pub struct CoalesceWitness {
    pub r: f64,
    pub coalescing_components: usize,
    pub sublevel_connected: bool,
}

/// Bounded generator elimination: relators of length one kill a generator,
/// relators of length two identify one generator with another (or its
/// inverse). Returns true when no relators survive.
fn tietze_free(pres: &Presentation) -> bool {
    let mut gens: Vec<bool> = vec![true; pres.gens];
    let mut relators: Vec<Word> = pres.relators.iter().map(|r| cyclic_reduce(&reduce(r))).collect();
    for _ in 0..100 {
        relators.retain(|r| !r.is_empty());
        if relators.is_empty() {
            return true;
        }
        let mut subst: Option<(usize, Word)> = None; // gen -> replacement word
        for r in &relators {
            if r.len() == 1 {
                subst = Some((letter_gen(r[0]), Vec::new()));
                break;
            }
            if r.len() == 2 {
                let (a, b) = (r[0], r[1]);
                if letter_gen(a) != letter_gen(b) {
                    // a b = 1 so b = a^{-1}: eliminate gen(b).
                    let rep = if b > 0 { vec![-a] } else { vec![a] };
                    subst = Some((letter_gen(b), rep));
                    break;
                }
            }
        }
        let Some((g, rep)) = subst else { return false };
        gens[g] = false;
        for r in relators.iter_mut() {
            let mut out: Word = Vec::new();
            for &l in r.iter() {
                if letter_gen(l) == g {
                    if l > 0 {
                        out.extend_from_slice(&rep);
                    } else {
                        out.extend(invert(&rep));
                    }
                } else {
                    out.push(l);
                }
            }
            *r = cyclic_reduce(&reduce(&out));
        }
    }
    relators.iter().all(|r| r.is_empty())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn torus_oracle() -> Oracle {
        let x = fixtures::torus(1.0);
        Oracle::new(Presentation::of_complex(&x), Budgets::small())
    }

    fn rp2_oracle() -> Oracle {
        let x = fixtures::rp2_6(1.0);
        Oracle::new(Presentation::of_complex(&x), Budgets::small())
    }

    #[test]
    fn torus_presentation_shape() {
        let x = fixtures::torus(1.0);
        let p = Presentation::of_complex(&x);
        assert_eq!(p.gens(), 3);
        assert_eq!(p.relators().len(), 2);
        let o = Oracle::new(p, Budgets::small());
        assert_eq!(o.h1_free_rank(), 2);
        assert!(o.h1_torsion().is_empty());
    }

    #[test]
    fn rp2_presentation_shape() {
        let x = fixtures::rp2_6(1.0);
        let p = Presentation::of_complex(&x);
        assert_eq!(p.gens(), 10);
        assert_eq!(p.relators().len(), 10);
        let o = Oracle::new(p, Budgets::small());
        assert_eq!(o.h1_free_rank(), 0);
        assert_eq!(o.h1_torsion(), vec![2]);
    }

    #[test]
    fn tree_skeleton_has_no_generators() {
        let raw = crate::complex::RawComplex {
            vertex_count: 4,
            edges: vec![(0, 1, 1.0), (1, 2, 1.0), (1, 3, 1.0)],
            faces: vec![],
        };
        let x = TwoComplex::build(&raw).unwrap();
        let p = Presentation::of_complex(&x);
        assert_eq!(p.gens(), 0);
    }

    #[test]
    fn torus_generator_is_noncontractible() {
        let mut o = torus_oracle();
        let v = o.is_contractible(&[1]);
        assert_eq!(v.kind, VerdictKind::Noncontractible);
        assert!(matches!(v.certificate, Some(Certificate::AbelianFree { .. })));
        assert!(o.replay(&[1], &v));
    }

    #[test]
    fn torus_commutator_is_contractible() {
        let mut o = torus_oracle();
        let w = vec![1, 2, -1, -2];
        let v = o.is_contractible(&w);
        assert_eq!(v.kind, VerdictKind::Contractible, "cert: {:?}", v.certificate);
        assert!(o.replay(&w, &v));
    }

    #[test]
    fn rp2_face_word_is_contractible() {
        let x = fixtures::rp2_6(1.0);
        let p = Presentation::of_complex(&x);
        let rel = p
            .relators()
            .iter()
            .find(|r| !r.is_empty())
            .cloned()
            .unwrap();
        let mut o = Oracle::new(p, Budgets::small());
        let v = o.is_contractible(&rel);
        assert_eq!(v.kind, VerdictKind::Contractible);
        assert!(o.replay(&rel, &v));
    }

    #[test]
    fn rp2_squared_essential_loop_is_contractible() {
        let x = fixtures::rp2_6(1.0);
        let p = Presentation::of_complex(&x);
        // A non-face 3-cycle: vertices 0-1-3 (edges 01, 13, 30). Faces
        // containing {0,1,3} as a triple do not exist in the fixture.
        let find_edge = |a: usize, b: usize| {
            x.edges()
                .iter()
                .position(|e| e.ends == (a, b) || e.ends == (b, a))
                .unwrap()
        };
        let path = |a: usize, b: usize| {
            let e = find_edge(a, b);
            DirEdge { edge: e, reversed: x.edges()[e].ends.0 != a }
        };
        let cyc = vec![path(0, 1), path(1, 3), path(3, 0)];
        let lp = EdgeLoop::new(&x, &p, 0, cyc.clone());
        let mut o = Oracle::new(p, Budgets::small());
        let once = o.is_contractible(&lp.word);
        assert_eq!(once.kind, VerdictKind::Noncontractible);
        let mut doubled = lp.word.clone();
        doubled.extend_from_slice(&lp.word);
        let v = o.is_contractible(&doubled);
        assert_eq!(v.kind, VerdictKind::Contractible, "cert: {:?}", v.certificate);
        assert!(matches!(
            v.certificate,
            Some(Certificate::CosetTrace { .. }) | Some(Certificate::RelatorReduction { .. })
        ));
        assert!(o.replay(&doubled, &v));
    }

    #[test]
    fn coset_enumeration_completes_on_finite_groups() {
        for n in 2..=7 {
            let pres = Presentation::direct(1, vec![vec![1; n]]);
            let mut t = CosetTable::enumerate(&pres, &Budgets::small());
            assert!(t.complete, "Z_{n} should complete");
            assert_eq!(t.live_cosets() as usize, n);
            let one = t.find(1);
            assert_eq!(t.trace(&vec![1; n]), Some(one));
            assert_ne!(t.trace(&vec![1; n - 1]), Some(one));
        }
        // S3 = <a, b | a^2, b^2, (ab)^3>
        let pres = Presentation::direct(
            2,
            vec![vec![1, 1], vec![2, 2], vec![1, 2, 1, 2, 1, 2]],
        );
        let t = CosetTable::enumerate(&pres, &Budgets::small());
        assert!(t.complete);
        assert_eq!(t.live_cosets(), 6);
    }

    #[test]
    fn moore_models_are_decided_exhaustively() {
        for n in 2..=7usize {
            let pres = Presentation::direct(1, vec![vec![1; n]]);
            let mut o = Oracle::new(pres, Budgets::small());
            for k in -12i32..=12 {
                let w: Word = if k >= 0 {
                    vec![1; k as usize]
                } else {
                    vec![-1; (-k) as usize]
                };
                let v = o.is_contractible(&w);
                let expect = if k.rem_euclid(n as i32) == 0 {
                    VerdictKind::Contractible
                } else {
                    VerdictKind::Noncontractible
                };
                assert_eq!(v.kind, expect, "n={n} k={k}");
                assert!(o.replay(&w, &v), "replay n={n} k={k}");
            }
        }
    }

    #[test]
    fn verdicts_invariant_under_rotation_and_inversion() {
        let mut o = rp2_oracle();
        let base: Word = vec![1, 2, -3];
        let k0 = o.is_contractible(&base).kind;
        for rot in 0..base.len() {
            let mut w = base[rot..].to_vec();
            w.extend_from_slice(&base[..rot]);
            assert_eq!(o.is_contractible(&w).kind, k0);
            assert_eq!(o.is_contractible(&invert(&w)).kind, k0);
        }
    }

    #[test]
    fn corank_and_fig_intervals() {
        let mut rp2 = rp2_oracle();
        assert_eq!(rp2.corank_bounds(&[]), (0, 0));
        assert_eq!(rp2.fig_bounds(&[], false), (0, 0));

        let mut torus = torus_oracle();
        let (lo, hi) = torus.corank_bounds(&[]);
        assert_eq!((lo, hi), (1, 1), "abelian certification pins the corank");
        let (flo, fhi) = torus.fig_bounds(&[], false);
        assert!(flo <= fhi && fhi <= hi);

        // A coalescence witness raises the corank lower bound.
        let witness = CoalesceWitness { r: 1.0, coalescing_components: 3, sublevel_connected: true };
        let (x, _) = fixtures::tripod(2, [fixtures::LegEnd::Merge; 3]);
        let mut o = Oracle::new(Presentation::of_complex(&x), Budgets::small());
        let (lo, hi) = o.corank_bounds(&[witness]);
        assert_eq!((lo, hi), (2, 2));
    }

    #[test]
    fn wedge_generator_splits_off() {
        let (x, _) = fixtures::wedge_rp2_s1(4, 2.4);
        let mut o = Oracle::new(Presentation::of_complex(&x), Budgets::small());
        let (flo, fhi) = o.fig_bounds(&[], false);
        assert!(flo >= 1, "circle generator appears in no relator");
        assert!(fhi >= flo);
    }

    #[test]
    fn cat_classification() {
        let mut rp2 = rp2_oracle();
        let rep = rp2.classify_cat();
        assert_eq!(rep.free, Tri::No);
        assert_eq!(rep.cat, Some(2));
        assert!(rep.syscat_equals_cat);

        // Graph: wedge of circles is free.
        let raw = crate::complex::RawComplex {
            vertex_count: 2,
            edges: vec![(0, 1, 1.0), (1, 0, 1.0), (0, 1, 2.0)],
            faces: vec![],
        };
        let x = TwoComplex::build(&raw).unwrap();
        let mut o = Oracle::new(Presentation::of_complex(&x), Budgets::small());
        let rep = o.classify_cat();
        assert_eq!(rep.free, Tri::Yes);
        assert_eq!(rep.cat, Some(1));

        // Torus: torsion-free homology, relators survive: honest unknown.
        let mut torus = torus_oracle();
        let rep = torus.classify_cat();
        assert_eq!(rep.free, Tri::Unknown);
        assert_eq!(rep.cat, None);
    }

    #[test]
    fn trivial_group_certification() {
        let pres = Presentation::direct(1, vec![vec![1]]);
        let mut o = Oracle::new(pres, Budgets::small());
        assert_eq!(o.certify_trivial(), VerdictKind::Contractible);

        let mut rp2 = rp2_oracle();
        assert_eq!(rp2.certify_trivial(), VerdictKind::Noncontractible);
    }

    use crate::complex::TwoComplex;
}
