//! Evaluation of composition terms into canonical pasting values, and
//! decidable arrow equality, for arrows of dimension at most 3 over a
//! positive polygraph.
//!
//! A 1-arrow is a path of edges. A 2-arrow is a path together with a word
//! of rewriting layers, each layer replacing a consecutive run of edges by
//! the target path of a 2-cell; two words denote the same arrow exactly
//! when they differ by swapping independent layers, so the canonical form
//! fires, at every step, the applicable layer with the smallest offset.
//! A 3-arrow is a 2-state together with a sequence of boxes, each box
//! replacing an occurrence of the source 2-arrow of a 3-cell by its target
//! 2-arrow. Occurrences are tracked on explicit instances of vertices,
//! edges and 2-cells; the source and target of a 3-cell share their whole
//! 1-boundary, so a box reuses the wire instances on the boundary of the
//! occurrence and creates fresh instances only in the interior. The
//! canonical box order fires, at every step, the available box with the
//! least position signature, and equality of canonical forms is structural.
//!
//! 3-cells whose source or target 2-arrow leaves an edge of its own
//! boundary untouched would force distinct wire instances to be
//! identified; such cells are outside the structural regime and are
//! reported as [`Error::UnsupportedClass`].
//!
//! The same instance bookkeeping drives the unrolling of an arrow into its
//! polyplex in [`crate::plex`].

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::poly::{CellId, Polygraph, Sign, Term};

/// A 1-dimensional state: the starting vertex and the edge labels of a
/// path. An empty path is an identity-coerced vertex.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Path {
    pub start: CellId,
    pub edges: Vec<CellId>,
}

/// One rewriting layer of a 2-arrow: a 2-cell applied at an offset of the
/// current path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Layer2 {
    pub cell: CellId,
    pub offset: usize,
}

/// A 2-dimensional state or arrow: a source path and a word of layers in
/// canonical order. An empty word is an identity-coerced path; values of
/// intrinsic dimension 2 always have a non-empty word.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Past2 {
    pub src: Path,
    pub word: Vec<Layer2>,
}

/// One box of a 3-arrow in canonical encoding: the 3-cell together with
/// the positions, in the canonical word of the current 2-state, of the
/// layers forming the rewritten occurrence. Ranks come first so that the
/// derived order, which drives the canonical box sequence, ranks boxes by
/// position in the state rather than by the ambient id of their cell;
/// simultaneously available boxes occupy disjoint regions, so the order
/// on ranks is already strict and the encoding is stable under
/// relabeling.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Box3 {
    pub node_ranks: Vec<usize>,
    pub cell: CellId,
}

/// A 3-dimensional arrow: a source 2-state and a canonical box sequence.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Past3 {
    pub src: Past2,
    pub boxes: Vec<Box3>,
}

/// A canonical pasting value. The variant index is the intrinsic dimension
/// of the arrow.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Value {
    V0(CellId),
    V1(Path),
    V2(Past2),
    V3(Past3),
}

impl Value {
    pub fn dim(&self) -> usize {
        match self {
            Value::V0(_) => 0,
            Value::V1(_) => 1,
            Value::V2(_) => 2,
            Value::V3(_) => 3,
        }
    }
}

/// Turns a possibly degenerate state into a value of its intrinsic
/// dimension.
pub(crate) fn normalize_path(p: Path) -> Value {
    if p.edges.is_empty() {
        Value::V0(p.start)
    } else {
        Value::V1(p)
    }
}

pub(crate) fn normalize_past2(p: Past2) -> Value {
    if p.word.is_empty() {
        normalize_path(p.src)
    } else {
        Value::V2(p)
    }
}

/// Evaluation context: the ambient polygraph plus a memo of the evaluated
/// boundary values of its cells.
pub struct Ev<'a> {
    pub x: &'a Polygraph,
    att: RefCell<BTreeMap<(CellId, Sign), Value>>,
}

impl<'a> Ev<'a> {
    pub fn new(x: &'a Polygraph) -> Ev<'a> {
        Ev { x, att: RefCell::new(BTreeMap::new()) }
    }

    /// The evaluated boundary value of a cell.
    pub fn att_val(&self, c: CellId, s: Sign) -> Result<Value> {
        if let Some(v) = self.att.borrow().get(&(c, s)) {
            return Ok(v.clone());
        }
        let t = self.x.attachment(c, s)?.clone();
        let v = self.eval(&t)?;
        self.att.borrow_mut().insert((c, s), v.clone());
        Ok(v)
    }

    /// The source path and target path of a 2-cell, as edge label vectors.
    fn cell2_paths(&self, c: CellId) -> Result<(Path, Path)> {
        let s = match self.att_val(c, Sign::Neg)? {
            Value::V1(p) => p,
            _ => return Err(Error::UnsupportedClass(format!("2-cell {c} has a degenerate source"))),
        };
        let t = match self.att_val(c, Sign::Pos)? {
            Value::V1(p) => p,
            _ => return Err(Error::UnsupportedClass(format!("2-cell {c} has a degenerate target"))),
        };
        Ok((s, t))
    }

    /// The source and target 2-values of a 3-cell, with the structural
    /// regime guard: every edge of their boundary paths must be consumed
    /// and produced by the layers.
    fn cell3_paths(&self, c: CellId) -> Result<(Past2, Past2)> {
        let s = match self.att_val(c, Sign::Neg)? {
            Value::V2(p) => p,
            _ => return Err(Error::UnsupportedClass(format!("3-cell {c} has a degenerate source"))),
        };
        let t = match self.att_val(c, Sign::Pos)? {
            Value::V2(p) => p,
            _ => return Err(Error::UnsupportedClass(format!("3-cell {c} has a degenerate target"))),
        };
        for side in [&s, &t] {
            if !self.state2_is_full(side)? {
                return Err(Error::UnsupportedClass(format!(
                    "3-cell {c} leaves an edge of its 1-boundary untouched, \
                     which is outside the structural regime"
                )));
            }
        }
        Ok((s, t))
    }

    /// True when every source edge of the state is consumed by a layer and
    /// every final edge is produced by one.
    fn state2_is_full(&self, st: &Past2) -> Result<bool> {
        let tokens = self.token_trace(st)?;
        let n = st.src.edges.len();
        let mut src_seen: Vec<bool> = vec![false; n];
        for tok in &tokens.final_frontier {
            if let Tok::Src(_) = tok {
                return Ok(false);
            }
        }
        for layer_cons in &tokens.consumed {
            for tok in layer_cons {
                if let Tok::Src(i) = tok {
                    src_seen[*i] = true;
                }
            }
        }
        Ok(src_seen.iter().all(|&b| b))
    }

    /// Symbolic replay of a 2-state word, tracking the provenance of every
    /// frontier position.
    fn token_trace(&self, st: &Past2) -> Result<TokenTrace> {
        let mut frontier: Vec<Tok> = (0..st.src.edges.len()).map(Tok::Src).collect();
        let mut consumed = Vec::with_capacity(st.word.len());
        for (i, layer) in st.word.iter().enumerate() {
            let (s, t) = self.cell2_paths(layer.cell)?;
            let w = s.edges.len();
            if layer.offset + w > frontier.len() {
                return Err(Error::BoundaryMismatch {
                    level: 1,
                    detail: format!("layer of cell {} exceeds the path", layer.cell),
                });
            }
            let run: Vec<Tok> = frontier[layer.offset..layer.offset + w].to_vec();
            let fresh: Vec<Tok> = (0..t.edges.len()).map(|j| Tok::Out(i, j)).collect();
            frontier.splice(layer.offset..layer.offset + w, fresh.into_iter());
            consumed.push(run);
        }
        Ok(TokenTrace { consumed, final_frontier: frontier })
    }

    /// Evaluates a term to its canonical value. Exact and structural for
    /// dimensions up to 3; higher-dimensional terms are outside the value
    /// semantics and report [`Error::DimensionLimit`].
    pub fn eval(&self, t: &Term) -> Result<Value> {
        match t {
            Term::Gen(c) => self.eval_gen(*c),
            Term::Comp(l, r, k) => {
                let u = self.eval(l)?;
                let v = self.eval(r)?;
                self.compose(u, v, *k)
            }
            Term::Bnd(u, k, s) => {
                let v = self.eval(u)?;
                self.boundary(&v, *k, *s)
            }
        }
    }

    fn eval_gen(&self, c: CellId) -> Result<Value> {
        let cell = self.x.cell(c)?;
        match cell.dim {
            0 => Ok(Value::V0(c)),
            1 => {
                let start = match self.att_val(c, Sign::Neg)? {
                    Value::V0(v) => v,
                    _ => {
                        return Err(Error::UnsupportedClass(format!(
                            "1-cell {c} has a non-vertex source"
                        )))
                    }
                };
                Ok(Value::V1(Path { start, edges: vec![c] }))
            }
            2 => {
                let (src, _) = self.cell2_paths(c)?;
                Ok(Value::V2(Past2 { src, word: vec![Layer2 { cell: c, offset: 0 }] }))
            }
            3 => {
                let (src2, _) = self.cell3_paths(c)?;
                let mut m = Mach::load2(self, &src2)?;
                let all: BTreeSet<usize> = m.active.clone();
                m.fire_box_nodes(c, all)?;
                Ok(Value::V3(m.encode3()?))
            }
            n => Err(Error::DimensionLimit(n)),
        }
    }

    /// The end vertex label of a path.
    pub fn path_end(&self, p: &Path) -> Result<CellId> {
        match p.edges.last() {
            None => Ok(p.start),
            Some(&e) => match self.att_val(e, Sign::Pos)? {
                Value::V0(v) => Ok(v),
                _ => Err(Error::UnsupportedClass(format!("1-cell {e} has a non-vertex target"))),
            },
        }
    }

    /// The final path of a 2-state, by replaying its word on labels.
    pub fn final_path(&self, p: &Past2) -> Result<Path> {
        let mut edges = p.src.edges.clone();
        for layer in &p.word {
            let (s, t) = self.cell2_paths(layer.cell)?;
            let w = s.edges.len();
            if layer.offset + w > edges.len()
                || edges[layer.offset..layer.offset + w] != s.edges[..]
            {
                return Err(Error::BoundaryMismatch {
                    level: 1,
                    detail: format!("layer of cell {} does not match the path", layer.cell),
                });
            }
            edges.splice(layer.offset..layer.offset + w, t.edges.iter().copied());
        }
        Ok(Path { start: p.src.start, edges })
    }

    /// Canonicalizes a layer word over a source path, checking validity.
    /// Instances are simulated so that independent layers can be reordered;
    /// the canonical word fires the applicable layer of least offset first.
    pub fn canon2(&self, src: Path, layers: &[Layer2]) -> Result<Past2> {
        // Forward pass: assign instance ids and record the wires each
        // layer consumes and produces.
        let mut state: Vec<usize> = (0..src.edges.len()).collect();
        let mut labels: Vec<CellId> = src.edges.clone();
        let mut consumed: Vec<Vec<usize>> = Vec::with_capacity(layers.len());
        let mut produced: Vec<Vec<usize>> = Vec::with_capacity(layers.len());
        for layer in layers {
            let (s, t) = self.cell2_paths(layer.cell)?;
            let w = s.edges.len();
            if layer.offset + w > state.len() {
                return Err(Error::BoundaryMismatch {
                    level: 1,
                    detail: format!("layer of cell {} exceeds the path", layer.cell),
                });
            }
            let run: Vec<usize> = state[layer.offset..layer.offset + w].to_vec();
            for (i, &wire) in run.iter().enumerate() {
                if labels[wire] != s.edges[i] {
                    return Err(Error::BoundaryMismatch {
                        level: 1,
                        detail: format!("layer of cell {} does not match the path", layer.cell),
                    });
                }
            }
            let mut fresh = Vec::with_capacity(t.edges.len());
            for &e in &t.edges {
                fresh.push(labels.len());
                labels.push(e);
            }
            state.splice(layer.offset..layer.offset + w, fresh.iter().copied());
            consumed.push(run);
            produced.push(fresh);
        }
        // Greedy pass: repeatedly fire the pending layer of least offset
        // whose consumed wires are all present.
        let mut state: Vec<usize> = (0..src.edges.len()).collect();
        let mut remaining: BTreeSet<usize> = (0..layers.len()).collect();
        let mut word = Vec::with_capacity(layers.len());
        while !remaining.is_empty() {
            let mut best: Option<(usize, usize)> = None;
            for &i in &remaining {
                let first = consumed[i][0];
                if let Some(pos) = state.iter().position(|&w| w == first) {
                    if consumed[i].len() <= state.len() - pos
                        && state[pos..pos + consumed[i].len()] == consumed[i][..]
                    {
                        if best.map_or(true, |(_, bp)| pos < bp) {
                            best = Some((i, pos));
                        }
                    }
                }
            }
            let (i, pos) = best.ok_or_else(|| Error::BoundaryMismatch {
                level: 1,
                detail: "layer word is not a valid rewriting sequence".into(),
            })?;
            word.push(Layer2 { cell: layers[i].cell, offset: pos });
            state.splice(pos..pos + consumed[i].len(), produced[i].iter().copied());
            remaining.remove(&i);
        }
        Ok(Past2 { src, word })
    }

    /// Composes two values along level `k`, inserting identity coercions
    /// as needed.
    pub fn compose(&self, u: Value, v: Value, k: usize) -> Result<Value> {
        let (du, dv) = (u.dim(), v.dim());
        if du <= k && dv <= k {
            if u == v {
                return Ok(u);
            }
            return Err(Error::BoundaryMismatch {
                level: k,
                detail: "identity factors disagree".into(),
            });
        }
        if du <= k {
            let want = self.boundary(&v, k, Sign::Neg)?;
            if want != u {
                return Err(Error::BoundaryMismatch {
                    level: k,
                    detail: "left identity factor does not match".into(),
                });
            }
            return Ok(v);
        }
        if dv <= k {
            let want = self.boundary(&u, k, Sign::Pos)?;
            if want != v {
                return Err(Error::BoundaryMismatch {
                    level: k,
                    detail: "right identity factor does not match".into(),
                });
            }
            return Ok(u);
        }
        match (du.max(dv), k) {
            (1, 0) => {
                let (a, b) = match (u, v) {
                    (Value::V1(a), Value::V1(b)) => (a, b),
                    _ => unreachable!("dimension 1 composition"),
                };
                if self.path_end(&a)? != b.start {
                    return Err(Error::BoundaryMismatch {
                        level: 0,
                        detail: "paths do not share an endpoint".into(),
                    });
                }
                let mut edges = a.edges;
                edges.extend(b.edges);
                Ok(Value::V1(Path { start: a.start, edges }))
            }
            (2, _) => self.compose2(u, v, k),
            (3, _) => self.compose3(u, v, k),
            (n, _) => Err(Error::DimensionLimit(n)),
        }
    }

    /// Views a value of dimension at most 2 as a 2-state.
    fn as_state2(&self, v: &Value) -> Past2 {
        match v {
            Value::V0(c) => Past2 { src: Path { start: *c, edges: vec![] }, word: vec![] },
            Value::V1(p) => Past2 { src: p.clone(), word: vec![] },
            Value::V2(p) => p.clone(),
            Value::V3(_) => unreachable!("3-value viewed as a 2-state"),
        }
    }

    fn compose2(&self, u: Value, v: Value, k: usize) -> Result<Value> {
        let a = self.as_state2(&u);
        let b = self.as_state2(&v);
        match k {
            1 => {
                let mid = self.final_path(&a)?;
                if mid != b.src {
                    return Err(Error::BoundaryMismatch {
                        level: 1,
                        detail: "2-arrows do not share a path".into(),
                    });
                }
                let mut layers = a.word;
                layers.extend(b.word);
                Ok(normalize_past2(self.canon2(a.src, &layers)?))
            }
            0 => {
                if self.path_end(&a.src)? != b.src.start {
                    return Err(Error::BoundaryMismatch {
                        level: 0,
                        detail: "2-arrows do not share a vertex".into(),
                    });
                }
                let shift = self.final_path(&a)?.edges.len();
                let mut edges = a.src.edges.clone();
                edges.extend(b.src.edges.iter().copied());
                let src = Path { start: a.src.start, edges };
                let mut layers = a.word;
                layers.extend(
                    b.word.iter().map(|l| Layer2 { cell: l.cell, offset: l.offset + shift }),
                );
                Ok(normalize_past2(self.canon2(src, &layers)?))
            }
            _ => unreachable!("2-dimensional composition at level {k}"),
        }
    }

    fn compose3(&self, u: Value, v: Value, k: usize) -> Result<Value> {
        if k == 2 {
            let (a, b) = match (u, v) {
                (Value::V3(a), Value::V3(b)) => (a, b),
                _ => unreachable!("level-2 composition of non-3-values"),
            };
            let mut m = Mach::load3(self, &a)?;
            let final2 = m.state2_labels(&m.active, &m.state_src)?;
            if final2 != b.src {
                return Err(Error::BoundaryMismatch {
                    level: 2,
                    detail: "3-arrows do not share a 2-state".into(),
                });
            }
            m.replay_boxes(&b.boxes)?;
            Ok(Value::V3(m.encode3()?))
        } else {
            let (a_src, a_boxes) = self.split3(&u);
            let (b_src, b_boxes) = self.split3(&v);
            let mut m = Mach::new(self);
            let pa = m.place2(&a_src, None)?;
            let pb = match k {
                1 => {
                    let frontier = pa.final_wires.clone();
                    m.place2(&b_src, Some(&frontier))?
                }
                0 => {
                    let b_placed = m.place2(&b_src, None)?;
                    let a_end = m.path_end_vertex(&pa)?;
                    let b_start = m.path_start_vertex(&b_placed)?;
                    m.unify_vertices(b_start, a_end);
                    b_placed
                }
                _ => unreachable!("3-dimensional composition at level {k}"),
            };
            let mut a_nodes: BTreeSet<usize> = pa.nodes.iter().map(|&(n, _)| n).collect();
            let mut b_nodes: BTreeSet<usize> = pb.nodes.iter().map(|&(n, _)| n).collect();
            let a_src_wires = pa.src_wires.clone();
            let b_src_wires = pb.src_wires.clone();
            m.state_src = match k {
                1 => a_src_wires.clone(),
                _ => {
                    let mut w = a_src_wires.clone();
                    w.extend(b_src_wires.iter().copied());
                    w
                }
            };
            m.active = a_nodes.union(&b_nodes).copied().collect();
            m.init_active = m.active.clone();
            for bx in &a_boxes {
                let (region, cell) = m.decode_box(bx, &a_nodes, &a_src_wires)?;
                let created = m.fire_box_nodes(cell, region.clone())?;
                for n in region {
                    a_nodes.remove(&n);
                }
                a_nodes.extend(created);
            }
            let b_src_now = match k {
                1 => m.subset_frontier(&a_nodes, &a_src_wires)?,
                _ => b_src_wires,
            };
            for bx in &b_boxes {
                let (region, cell) = m.decode_box(bx, &b_nodes, &b_src_now)?;
                let created = m.fire_box_nodes(cell, region.clone())?;
                for n in region {
                    b_nodes.remove(&n);
                }
                b_nodes.extend(created);
            }
            Ok(Value::V3(m.encode3()?))
        }
    }

    /// Splits a value of dimension at most 3 into its source 2-state and
    /// box list.
    fn split3(&self, v: &Value) -> (Past2, Vec<Box3>) {
        match v {
            Value::V3(p) => (p.src.clone(), p.boxes.clone()),
            other => (self.as_state2(other), vec![]),
        }
    }

    /// The `k`-boundary of a value.
    pub fn boundary(&self, v: &Value, k: usize, s: Sign) -> Result<Value> {
        if k >= v.dim() {
            return Ok(v.clone());
        }
        match v {
            Value::V0(_) => unreachable!("0-values have no boundaries"),
            Value::V1(p) => match s {
                Sign::Neg => Ok(Value::V0(p.start)),
                Sign::Pos => Ok(Value::V0(self.path_end(p)?)),
            },
            Value::V2(p) => match k {
                1 => match s {
                    Sign::Neg => Ok(Value::V1(p.src.clone())),
                    Sign::Pos => Ok(normalize_path(self.final_path(p)?)),
                },
                _ => self.boundary(&Value::V1(p.src.clone()), k, s),
            },
            Value::V3(p) => match k {
                2 => match s {
                    Sign::Neg => Ok(normalize_past2(p.src.clone())),
                    Sign::Pos => {
                        let m = Mach::load3(self, p)?;
                        let st = m.state2_labels(&m.active, &m.state_src)?;
                        Ok(normalize_past2(st))
                    }
                },
                _ => self.boundary(&normalize_past2(p.src.clone()), k, s),
            },
        }
    }
}

/// Provenance token for one frontier position of a symbolic 2-state
/// replay: either the i-th source edge or the j-th output of layer i.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Tok {
    Src(usize),
    Out(usize, usize),
}

struct TokenTrace {
    consumed: Vec<Vec<Tok>>,
    final_frontier: Vec<Tok>,
}

/// A placed 2-diagram inside a machine: the wire instances of its source
/// path, its node instances in placement order with their frontier
/// offsets, and its final frontier.
pub(crate) struct Placed2 {
    pub src_wires: Vec<usize>,
    pub nodes: Vec<(usize, usize)>,
    pub final_wires: Vec<usize>,
}

/// One fired box with the instance bookkeeping needed for canonical
/// re-encoding and for unrolling into a polyplex.
pub(crate) struct BoxRec {
    pub cell: CellId,
    /// Region 2-nodes in their canonical firing order within the window.
    pub region_word: Vec<(usize, usize)>,
    pub window_in: Vec<usize>,
    /// Final frontier of the occurrence; the replacement ends on the same
    /// wire instances.
    pub window_out: Vec<usize>,
    /// Replacement nodes with their window offsets, in placement order.
    pub new_nodes: Vec<(usize, usize)>,
    /// Wire instances created by the replacement (its interior).
    pub new_wires: Vec<usize>,
    /// Wire instances no longer present after this box.
    pub destroyed_wires: BTreeSet<usize>,
    /// Active node set before this box fired.
    pub pre_active: BTreeSet<usize>,
}

/// Instance machine for 2-states evolving under 3-boxes. Vertex, wire and
/// 2-node instances are append-only; the active set tracks which node
/// instances are present in the current 2-state.
pub(crate) struct Mach<'e, 'a> {
    pub ev: &'e Ev<'a>,
    pub vl: Vec<CellId>,
    pub wl: Vec<CellId>,
    pub wv: Vec<(usize, usize)>,
    pub nl: Vec<CellId>,
    pub n_in: Vec<Vec<usize>>,
    pub n_out: Vec<Vec<usize>>,
    pub state_src: Vec<usize>,
    pub active: BTreeSet<usize>,
    pub init_active: BTreeSet<usize>,
    pub recs: Vec<BoxRec>,
}

impl<'e, 'a> Mach<'e, 'a> {
    pub fn new(ev: &'e Ev<'a>) -> Mach<'e, 'a> {
        Mach {
            ev,
            vl: Vec::new(),
            wl: Vec::new(),
            wv: Vec::new(),
            nl: Vec::new(),
            n_in: Vec::new(),
            n_out: Vec::new(),
            state_src: Vec::new(),
            active: BTreeSet::new(),
            init_active: BTreeSet::new(),
            recs: Vec::new(),
        }
    }

    /// Loads a 2-state as the machine's initial state.
    pub fn load2(ev: &'e Ev<'a>, st: &Past2) -> Result<Mach<'e, 'a>> {
        let mut m = Mach::new(ev);
        let placed = m.place2(st, None)?;
        m.state_src = placed.src_wires;
        m.active = placed.nodes.iter().map(|&(n, _)| n).collect();
        m.init_active = m.active.clone();
        Ok(m)
    }

    /// Loads a full 3-value: initial state plus replayed boxes.
    pub fn load3(ev: &'e Ev<'a>, v: &Past3) -> Result<Mach<'e, 'a>> {
        let mut m = Mach::load2(ev, &v.src)?;
        m.replay_boxes(&v.boxes)?;
        Ok(m)
    }

    fn fresh_vertex(&mut self, l: CellId) -> usize {
        self.vl.push(l);
        self.vl.len() - 1
    }

    fn fresh_wire(&mut self, l: CellId, va: usize, vb: usize) -> usize {
        self.wl.push(l);
        self.wv.push((va, vb));
        self.wl.len() - 1
    }

    fn edge_ends(&self, e: CellId) -> Result<(CellId, CellId)> {
        let a = match self.ev.att_val(e, Sign::Neg)? {
            Value::V0(v) => v,
            _ => return Err(Error::UnsupportedClass(format!("1-cell {e} has a non-vertex source"))),
        };
        let b = match self.ev.att_val(e, Sign::Pos)? {
            Value::V0(v) => v,
            _ => return Err(Error::UnsupportedClass(format!("1-cell {e} has a non-vertex target"))),
        };
        Ok((a, b))
    }

    /// Instantiates a 2-state. With `on`, the source path reuses the given
    /// wire instances (labels must match); otherwise fresh wires and
    /// vertices are created.
    pub fn place2(&mut self, st: &Past2, on: Option<&[usize]>) -> Result<Placed2> {
        let src_wires: Vec<usize> = match on {
            Some(wires) => {
                if wires.len() != st.src.edges.len() {
                    return Err(Error::BoundaryMismatch {
                        level: 1,
                        detail: "placement path has the wrong length".into(),
                    });
                }
                for (i, &w) in wires.iter().enumerate() {
                    if self.wl[w] != st.src.edges[i] {
                        return Err(Error::BoundaryMismatch {
                            level: 1,
                            detail: "placement path labels disagree".into(),
                        });
                    }
                }
                wires.to_vec()
            }
            None => {
                let mut v_prev = self.fresh_vertex(st.src.start);
                let mut out = Vec::with_capacity(st.src.edges.len());
                for &e in &st.src.edges {
                    let (_, b) = self.edge_ends(e)?;
                    let v_next = self.fresh_vertex(b);
                    out.push(self.fresh_wire(e, v_prev, v_next));
                    v_prev = v_next;
                }
                out
            }
        };
        self.place_layers(st, &src_wires, &BTreeMap::new())
    }

    /// Instantiates the layers of a 2-state over existing source wires.
    /// `pins` maps (layer index, output index) to an existing wire
    /// instance that must be reused instead of a fresh one.
    fn place_layers(
        &mut self,
        st: &Past2,
        src_wires: &[usize],
        pins: &BTreeMap<(usize, usize), usize>,
    ) -> Result<Placed2> {
        let mut frontier = src_wires.to_vec();
        let mut nodes = Vec::with_capacity(st.word.len());
        for (li, layer) in st.word.iter().enumerate() {
            let (s, t) = self.ev.cell2_paths(layer.cell)?;
            let w = s.edges.len();
            if layer.offset + w > frontier.len() {
                return Err(Error::BoundaryMismatch {
                    level: 1,
                    detail: "layer exceeds the frontier".into(),
                });
            }
            let run: Vec<usize> = frontier[layer.offset..layer.offset + w].to_vec();
            for (i, &wire) in run.iter().enumerate() {
                if self.wl[wire] != s.edges[i] {
                    return Err(Error::BoundaryMismatch {
                        level: 1,
                        detail: "layer labels disagree with the frontier".into(),
                    });
                }
            }
            let va = self.wv[run[0]].0;
            let vb = self.wv[run[w - 1]].1;
            let mut v_prev = va;
            let mut fresh = Vec::with_capacity(t.edges.len());
            for (i, &e) in t.edges.iter().enumerate() {
                let last = i + 1 == t.edges.len();
                match pins.get(&(li, i)) {
                    Some(&pinned) => {
                        if self.wl[pinned] != e {
                            return Err(Error::BoundaryMismatch {
                                level: 1,
                                detail: "pinned wire label disagrees".into(),
                            });
                        }
                        let (pa, pb) = self.wv[pinned];
                        if pa != v_prev {
                            // Only a vertex freshly created for the
                            // previous interior wire can disagree here.
                            if v_prev == va {
                                return Err(Error::BoundaryMismatch {
                                    level: 0,
                                    detail: "pinned wire does not start at the window vertex"
                                        .into(),
                                });
                            }
                            self.unify_vertices(v_prev, pa);
                        }
                        if last && pb != vb {
                            return Err(Error::BoundaryMismatch {
                                level: 0,
                                detail: "pinned wire does not end at the window vertex".into(),
                            });
                        }
                        fresh.push(pinned);
                        v_prev = pb;
                    }
                    None => {
                        let v_next = if last {
                            vb
                        } else {
                            let (_, lb) = self.edge_ends(e)?;
                            self.fresh_vertex(lb)
                        };
                        fresh.push(self.fresh_wire(e, v_prev, v_next));
                        v_prev = v_next;
                    }
                }
            }
            let node = self.nl.len();
            self.nl.push(layer.cell);
            self.n_in.push(run);
            self.n_out.push(fresh.clone());
            frontier.splice(layer.offset..layer.offset + w, fresh.into_iter());
            nodes.push((node, layer.offset));
        }
        Ok(Placed2 { src_wires: src_wires.to_vec(), nodes, final_wires: frontier })
    }

    pub(crate) fn path_end_vertex(&self, p: &Placed2) -> Result<usize> {
        match p.src_wires.last() {
            Some(&w) => Ok(self.wv[w].1),
            None => Err(Error::BoundaryMismatch {
                level: 0,
                detail: "empty path has no instance endpoints".into(),
            }),
        }
    }

    pub(crate) fn path_start_vertex(&self, p: &Placed2) -> Result<usize> {
        match p.src_wires.first() {
            Some(&w) => Ok(self.wv[w].0),
            None => Err(Error::BoundaryMismatch {
                level: 0,
                detail: "empty path has no instance endpoints".into(),
            }),
        }
    }

    /// Substitutes one vertex instance by another everywhere.
    pub(crate) fn unify_vertices(&mut self, old: usize, new: usize) {
        for ends in self.wv.iter_mut() {
            if ends.0 == old {
                ends.0 = new;
            }
            if ends.1 == old {
                ends.1 = new;
            }
        }
    }

    /// The canonical word of the sub-diagram spanned by `nodes` over the
    /// source wires `src`: greedy least-offset firing. Returns the word
    /// with offsets and the final frontier.
    pub fn subset_word(
        &self,
        nodes: &BTreeSet<usize>,
        src: &[usize],
    ) -> Result<(Vec<(usize, usize)>, Vec<usize>)> {
        let mut frontier: Vec<usize> = src.to_vec();
        let mut remaining: BTreeSet<usize> = nodes.clone();
        let mut word = Vec::with_capacity(nodes.len());
        while !remaining.is_empty() {
            let mut best: Option<(usize, usize)> = None;
            for &n in &remaining {
                let ins = &self.n_in[n];
                if let Some(pos) = frontier.iter().position(|&w| w == ins[0]) {
                    if ins.len() <= frontier.len() - pos && frontier[pos..pos + ins.len()] == ins[..]
                    {
                        if best.map_or(true, |(_, bp)| pos < bp) {
                            best = Some((n, pos));
                        }
                    }
                }
            }
            let (n, pos) = best.ok_or_else(|| Error::BoundaryMismatch {
                level: 2,
                detail: "node set is not a pasting diagram over the given path".into(),
            })?;
            frontier.splice(pos..pos + self.n_in[n].len(), self.n_out[n].iter().copied());
            word.push((n, pos));
            remaining.remove(&n);
        }
        Ok((word, frontier))
    }

    /// The final frontier of the sub-diagram spanned by `nodes`.
    pub fn subset_frontier(&self, nodes: &BTreeSet<usize>, src: &[usize]) -> Result<Vec<usize>> {
        Ok(self.subset_word(nodes, src)?.1)
    }

    /// The labeled 2-state of a node subset, in canonical form.
    pub fn state2_labels(&self, nodes: &BTreeSet<usize>, src: &[usize]) -> Result<Past2> {
        let (word, _) = self.subset_word(nodes, src)?;
        let start = match src.first() {
            Some(&w) => self.vl[self.wv[w].0],
            None => {
                return Err(Error::BoundaryMismatch {
                    level: 1,
                    detail: "empty 2-state has no start vertex".into(),
                })
            }
        };
        Ok(Past2 {
            src: Path { start, edges: src.iter().map(|&w| self.wl[w]).collect() },
            word: word.iter().map(|&(n, o)| Layer2 { cell: self.nl[n], offset: o }).collect(),
        })
    }

    /// Strict ancestors (`up`) or descendants of the seed set within the
    /// active nodes, via produced/consumed wires.
    pub(crate) fn reach(&self, seed: &BTreeSet<usize>, up: bool) -> BTreeSet<usize> {
        self.reach_in(&self.active, seed, up)
    }

    /// Same as `reach`, but within an explicit node universe.
    pub(crate) fn reach_in(
        &self,
        universe: &BTreeSet<usize>,
        seed: &BTreeSet<usize>,
        up: bool,
    ) -> BTreeSet<usize> {
        let mut producer: BTreeMap<usize, usize> = BTreeMap::new();
        let mut consumer: BTreeMap<usize, usize> = BTreeMap::new();
        for &n in universe {
            for &w in &self.n_out[n] {
                producer.insert(w, n);
            }
            for &w in &self.n_in[n] {
                consumer.insert(w, n);
            }
        }
        let mut seen = BTreeSet::new();
        let mut todo: Vec<usize> = seed.iter().copied().collect();
        while let Some(n) = todo.pop() {
            let next: Vec<usize> = if up {
                self.n_in[n].iter().filter_map(|w| producer.get(w).copied()).collect()
            } else {
                self.n_out[n].iter().filter_map(|w| consumer.get(w).copied()).collect()
            };
            for m in next {
                if !seed.contains(&m) && seen.insert(m) {
                    todo.push(m);
                }
            }
        }
        seen
    }

    /// Fires a 3-box: rewrites the occurrence of the source of `cell`
    /// spanned by the given region nodes into the target of `cell`,
    /// reusing the boundary wire instances of the occurrence. Returns the
    /// created node instances.
    pub fn fire_box_nodes(&mut self, cell: CellId, region: BTreeSet<usize>) -> Result<Vec<usize>> {
        if region.is_empty() || !region.is_subset(&self.active) {
            return Err(Error::BoundaryMismatch {
                level: 2,
                detail: "box region is empty or not active".into(),
            });
        }
        let anc = self.reach(&region, true);
        let desc = self.reach(&region, false);
        if !anc.is_disjoint(&desc) {
            return Err(Error::BoundaryMismatch {
                level: 2,
                detail: "box region is not convex in the state".into(),
            });
        }
        let anc: BTreeSet<usize> = anc.difference(&region).copied().collect();
        let (_, mid) = self.subset_word(&anc, &self.state_src)?;
        // Wires the region consumes from outside itself.
        let produced_in: BTreeSet<usize> =
            region.iter().flat_map(|&n| self.n_out[n].iter().copied()).collect();
        let consumed: BTreeSet<usize> =
            region.iter().flat_map(|&n| self.n_in[n].iter().copied()).collect();
        let outer: Vec<usize> = mid
            .iter()
            .enumerate()
            .filter(|&(_, w)| consumed.contains(w) && !produced_in.contains(w))
            .map(|(i, _)| i)
            .collect();
        if outer.is_empty() {
            return Err(Error::BoundaryMismatch {
                level: 2,
                detail: "box region consumes nothing from the frontier".into(),
            });
        }
        let ws = outer[0];
        let we = *outer.last().unwrap() + 1;
        let window_in: Vec<usize> = mid[ws..we].to_vec();
        let win_set: BTreeSet<usize> = window_in.iter().copied().collect();
        for &n in &region {
            for &w in &self.n_in[n] {
                if !win_set.contains(&w) && !produced_in.contains(&w) {
                    return Err(Error::BoundaryMismatch {
                        level: 2,
                        detail: "box region reaches outside its window".into(),
                    });
                }
            }
        }
        let (region_word, window_out) = self.subset_word(&region, &window_in)?;
        if window_out.iter().any(|w| win_set.contains(w)) {
            return Err(Error::UnsupportedClass(
                "occurrence leaves a boundary edge untouched, \
                 which is outside the structural regime"
                    .into(),
            ));
        }
        // The occurrence must be the source of the cell; the cell guard
        // also rejects unsupported 3-cells.
        let (want, t_val) = self.ev.cell3_paths(cell)?;
        let got = self.state2_labels(&region, &window_in)?;
        if got != want {
            return Err(Error::BoundaryMismatch {
                level: 2,
                detail: format!("window does not match the source of cell {cell}"),
            });
        }
        // Pin the final frontier of the replacement to the occurrence's
        // final wires, so that the shared 1-boundary is one set of
        // instances.
        let trace = self.ev.token_trace(&t_val)?;
        if trace.final_frontier.len() != window_out.len() {
            return Err(Error::BoundaryMismatch {
                level: 1,
                detail: format!("source and target of cell {cell} are not parallel"),
            });
        }
        let mut pins: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for (q, tok) in trace.final_frontier.iter().enumerate() {
            match tok {
                Tok::Out(i, j) => {
                    pins.insert((*i, *j), window_out[q]);
                }
                Tok::Src(_) => {
                    return Err(Error::UnsupportedClass(
                        "replacement leaves a boundary edge untouched, \
                         which is outside the structural regime"
                            .into(),
                    ));
                }
            }
        }
        let wires_before = self.wl.len();
        let placed = self.place_layers(&t_val, &window_in, &pins)?;
        let new_wires: Vec<usize> = (wires_before..self.wl.len()).collect();
        if placed.final_wires != window_out {
            return Err(Error::BoundaryMismatch {
                level: 1,
                detail: "replacement does not end on the occurrence boundary".into(),
            });
        }
        // The replacement is placed over the same window instances, so the
        // window wires stay present; only the region's interior wires are
        // buried.
        let out_set: BTreeSet<usize> = window_out.iter().copied().collect();
        let destroyed: BTreeSet<usize> =
            produced_in.difference(&out_set).copied().collect();
        let pre_active = self.active.clone();
        for &n in &region {
            self.active.remove(&n);
        }
        let created: Vec<usize> = placed.nodes.iter().map(|&(n, _)| n).collect();
        self.active.extend(created.iter().copied());
        self.recs.push(BoxRec {
            cell,
            region_word,
            window_in,
            window_out,
            new_nodes: placed.nodes,
            new_wires,
            destroyed_wires: destroyed,
            pre_active,
        });
        Ok(created)
    }

    /// Decodes a canonical box against the current state of a node subset.
    pub fn decode_box(
        &self,
        bx: &Box3,
        nodes: &BTreeSet<usize>,
        src: &[usize],
    ) -> Result<(BTreeSet<usize>, CellId)> {
        let (word, _) = self.subset_word(nodes, src)?;
        let mut region = BTreeSet::new();
        for &r in &bx.node_ranks {
            let (n, _) = *word.get(r).ok_or_else(|| Error::BoundaryMismatch {
                level: 2,
                detail: "box rank exceeds the state word".into(),
            })?;
            region.insert(n);
        }
        Ok((region, bx.cell))
    }

    /// Replays canonically encoded boxes against the full machine state.
    pub fn replay_boxes(&mut self, boxes: &[Box3]) -> Result<()> {
        for bx in boxes {
            let (region, cell) =
                self.decode_box(bx, &self.active.clone(), &self.state_src.clone())?;
            self.fire_box_nodes(cell, region)?;
        }
        Ok(())
    }

    /// Canonical encoding of the fired boxes: greedily fires, among the
    /// recorded boxes whose required instances are present, the one with
    /// the least (ranks, cell) signature.
    pub fn encode3(&self) -> Result<Past3> {
        let src2 = self.state2_labels(&self.init_active, &self.state_src)?;
        let n = self.recs.len();
        let mut node_creator: BTreeMap<usize, usize> = BTreeMap::new();
        let mut wire_creator: BTreeMap<usize, usize> = BTreeMap::new();
        for (i, rec) in self.recs.iter().enumerate() {
            for &(nn, _) in &rec.new_nodes {
                node_creator.insert(nn, i);
            }
            for &w in &rec.new_wires {
                wire_creator.insert(w, i);
            }
        }
        let mut fired: Vec<bool> = vec![false; n];
        let mut active: BTreeSet<usize> = self.init_active.clone();
        let mut dead_wires: BTreeSet<usize> = BTreeSet::new();
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            let (word_now, _) = self.subset_word(&active, &self.state_src)?;
            let mut best: Option<(Box3, usize)> = None;
            for (i, rec) in self.recs.iter().enumerate() {
                if fired[i] {
                    continue;
                }
                let nodes_ok = rec.region_word.iter().all(|&(nn, _)| {
                    active.contains(&nn) && node_creator.get(&nn).map_or(true, |&c| fired[c])
                });
                let wires_ok = rec.window_in.iter().all(|&w| {
                    !dead_wires.contains(&w)
                        && wire_creator.get(&w).map_or(true, |&c| fired[c])
                });
                if !nodes_ok || !wires_ok {
                    continue;
                }
                let blocks_other = self.recs.iter().enumerate().any(|(j, other)| {
                    j != i
                        && !fired[j]
                        && other.window_in.iter().any(|w| rec.destroyed_wires.contains(w))
                });
                if blocks_other {
                    continue;
                }
                let mut ranks: Vec<usize> = rec
                    .region_word
                    .iter()
                    .map(|&(nn, _)| {
                        word_now.iter().position(|&(m, _)| m == nn).expect("active node in word")
                    })
                    .collect();
                ranks.sort_unstable();
                let cand = Box3 { cell: rec.cell, node_ranks: ranks };
                if best.as_ref().map_or(true, |(b, _)| cand < *b) {
                    best = Some((cand, i));
                }
            }
            let (bx, i) = best.ok_or_else(|| Error::BoundaryMismatch {
                level: 2,
                detail: "recorded boxes admit no sequential firing order".into(),
            })?;
            fired[i] = true;
            for &(nn, _) in &self.recs[i].region_word {
                active.remove(&nn);
            }
            for &(nn, _) in &self.recs[i].new_nodes {
                active.insert(nn);
            }
            dead_wires.extend(self.recs[i].destroyed_wires.iter().copied());
            out.push(bx);
        }
        Ok(Past3 { src: src2, boxes: out })
    }
}

/// Evaluates a term over a positive polygraph into its canonical value.
pub fn eval(x: &Polygraph, t: &Term) -> Result<Value> {
    Ev::new(x).eval(t)
}

/// Decidable equality of the arrows denoted by two terms over a positive
/// polygraph of dimension at most 3.
pub fn arrows_equal(x: &Polygraph, a: &Term, b: &Term) -> Result<bool> {
    if !x.is_positive()? {
        return Err(Error::UnsupportedClass(
            "arrow equality requires a positive polygraph".into(),
        ));
    }
    let ev = Ev::new(x);
    Ok(ev.eval(a)? == ev.eval(b)?)
}
