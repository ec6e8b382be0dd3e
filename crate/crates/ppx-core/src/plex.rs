//! Canonical shapes of structural arrows.
//!
//! Every arrow over a positive polygraph factors through a canonical
//! shape, its polyplex: a positive polygraph together with a universal
//! arrow over it, unique up to unique isomorphism and made strictly
//! unique here by interning shape cells in dimension-increasing creation
//! order. This module computes that classification and builds on it:
//! sphericity and regularity tests, generic factorizations of morphisms,
//! syntactic lifting of compositions along polygraphic morphisms, inner
//! cell ownership, single-top collapse, and bounded enumeration of
//! shapes.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::lin::LinCtx;
use crate::poly::{CellId, ClassTag, Morphism, Polygraph, Sign, Term};
use crate::value::{normalize_past2, Box3, Ev, Layer2, Mach, Past2, Past3, Path, Value};

/// Hard cap on the number of cells an enumerated shape may have.
pub const ENUM_MAX_CELLS: usize = 16;

/// The canonical shape of an arrow: a positive polygraph together with
/// the universal arrow over it through which every occurrence of the
/// shape factors. Boundaries are classified eagerly and kept with their
/// inclusions into the shape.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polyplex {
    pub underlying: Polygraph,
    pub universal: Term,
    boundaries: BTreeMap<(usize, Sign), (Polyplex, Morphism)>,
}

impl Polyplex {
    /// Builds a polyplex from a shape and its universal arrow, classifying
    /// every iterated boundary.
    pub fn assemble(underlying: Polygraph, universal: Term) -> Result<Polyplex> {
        let n = underlying.term_dim(&universal)?;
        let mut boundaries = BTreeMap::new();
        for k in 0..n {
            for s in [Sign::Neg, Sign::Pos] {
                let bt = underlying.boundary_term(&universal, k, s)?;
                let ca = classify(&underlying, &bt)?;
                boundaries.insert((k, s), (ca.polyplex, ca.label));
            }
        }
        Ok(Polyplex { underlying, universal, boundaries })
    }

    pub fn dim(&self) -> usize {
        self.underlying.term_dim(&self.universal).unwrap_or(0)
    }

    /// The classified `k`-boundary together with its inclusion into this
    /// shape; present for every `k` below the dimension.
    pub fn boundary(&self, k: usize, s: Sign) -> Option<&(Polyplex, Morphism)> {
        self.boundaries.get(&(k, s))
    }

    /// A plex is the shape of a single generating cell: the universal
    /// arrow is a top-dimensional generator.
    pub fn is_plex(&self) -> bool {
        match &self.universal {
            Term::Gen(c) => self.underlying.dim_of(*c).map_or(false, |d| d == self.dim()),
            _ => false,
        }
    }

    pub fn cell_count(&self) -> usize {
        self.underlying.cells().len()
    }
}

/// An arrow together with its classification: the canonical shape and the
/// labeling morphism from the shape into the ambient polygraph.
#[derive(Debug, Clone)]
pub struct ClassifiedArrow {
    pub polyplex: Polyplex,
    pub label: Morphism,
}

/// Classifies the arrow denoted by `t` over the positive polygraph `x`.
pub fn classify(x: &Polygraph, t: &Term) -> Result<ClassifiedArrow> {
    if !x.is_positive()? {
        return Err(Error::UnsupportedClass(
            "classification needs a positive ambient polygraph".into(),
        ));
    }
    let ev = Ev::new(x);
    let v = ev.eval(t)?;
    classify_value(x, &v)
}

/// Classifies an already evaluated arrow. The value is re-canonicalized
/// defensively, so hand-built values are accepted.
pub fn classify_value(x: &Polygraph, v: &Value) -> Result<ClassifiedArrow> {
    let ev = Ev::new(x);
    let (shape, universal, labels) = match v {
        Value::V0(c) => {
            x.cell(*c)?;
            let mut shape = Polygraph::new(ClassTag::Positive);
            shape.add_cell0();
            (shape, Term::Gen(0), vec![*c])
        }
        Value::V1(p) => {
            let mut shape = Polygraph::new(ClassTag::Positive);
            let mut labels = vec![p.start];
            for &e in &p.edges {
                labels.push(edge_end(&ev, e, Sign::Pos)?);
            }
            let nv = labels.len();
            for _ in 0..nv {
                shape.add_cell0();
            }
            for (i, &e) in p.edges.iter().enumerate() {
                shape.add_cell(1, Term::Gen(i as CellId), Term::Gen(i as CellId + 1));
                labels.push(e);
            }
            let universal =
                Term::comp_all((0..p.edges.len()).map(|i| Term::Gen((nv + i) as CellId)).collect(), 0);
            (shape, universal, labels)
        }
        Value::V2(p2) => {
            let canon = ev.canon2(p2.src.clone(), &p2.word)?;
            let m = Mach::load2(&ev, &canon)?;
            let un = Unroll::shape_mode(&m);
            let (shape, labels) = un.shape()?;
            let (word, _) = m.subset_word(&m.init_active, &m.state_src)?;
            let universal = un.layered2(&m.state_src, &word)?;
            (shape, universal, labels)
        }
        Value::V3(p3) => {
            let m0 = Mach::load3(&ev, p3)?;
            let canon = m0.encode3()?;
            let m = if canon == *p3 { m0 } else { Mach::load3(&ev, &canon)? };
            let un = Unroll::shape_mode(&m);
            let (shape, labels) = un.shape()?;
            let universal = un.term3()?;
            (shape, universal, labels)
        }
    };
    let image = labels.iter().map(|&c| Term::Gen(c)).collect();
    let label = Morphism { dom: shape.clone(), cod: x.clone(), image };
    let polyplex = Polyplex::assemble(shape, universal)?;
    Ok(ClassifiedArrow { polyplex, label })
}

/// The plex of a generating cell: the classification of the cell itself.
///
/// Cells of dimension up to 3 classify through evaluation. A higher cell
/// gets its shape glued from the classified shapes of its two boundaries,
/// identified along their common boundary spheres; this covers dimension
/// 4 over a skeleton whose own cells classify. The glued shape is not
/// re-interned, so equality of shapes is only canonical up to dimension 3.
pub fn plex_of_cell(x: &Polygraph, c: CellId) -> Result<ClassifiedArrow> {
    let cell = x.cell(c)?;
    if cell.dim <= 3 {
        return classify(x, &Term::Gen(c));
    }
    let n = cell.dim;
    let sca = classify(x, x.attachment(c, Sign::Neg)?)?;
    let tca = classify(x, x.attachment(c, Sign::Pos)?)?;
    let mut map: BTreeMap<CellId, CellId> = BTreeMap::new();
    for s in [Sign::Neg, Sign::Pos] {
        let side = if s == Sign::Neg { "negative" } else { "positive" };
        let missing = || {
            Error::UnsupportedClass(format!(
                "cell {c}: boundary classification lacks the {side} sphere"
            ))
        };
        let (bs, inc_s) = sca.polyplex.boundary(n - 2, s).ok_or_else(missing)?;
        let (bt, inc_t) = tca.polyplex.boundary(n - 2, s).ok_or_else(missing)?;
        if bs.underlying != bt.underlying || bs.universal != bt.universal {
            return Err(Error::UnsupportedClass(format!(
                "cell {c}: the {side} spheres of its source and target classify differently"
            )));
        }
        for (i, img_t) in inc_t.image.iter().enumerate() {
            let (Term::Gen(tj), Term::Gen(si)) = (img_t, &inc_s.image[i]) else {
                return Err(Error::UnsupportedClass(format!(
                    "cell {c}: a boundary inclusion is not polygraphic"
                )));
            };
            if let Some(prev) = map.insert(*tj, *si) {
                if prev != *si {
                    return Err(Error::MethodDisagreement(format!(
                        "cell {c}: the boundary spheres identify shape cell {tj} inconsistently"
                    )));
                }
            }
        }
    }
    let mut shape = sca.polyplex.underlying.clone();
    let mut labels = sca.label.image.clone();
    for tc in tca.polyplex.underlying.cells() {
        if map.contains_key(&tc.id) {
            continue;
        }
        let id = if tc.dim == 0 {
            shape.add_cell0()
        } else {
            let remap = |g: CellId| Term::Gen(map[&g]);
            shape.add_cell(
                tc.dim,
                tc.src.as_ref().unwrap().substitute(&remap),
                tc.tgt.as_ref().unwrap().substitute(&remap),
            )
        };
        map.insert(tc.id, id);
        labels.push(tca.label.image[tc.id as usize].clone());
    }
    let top_src = sca.polyplex.universal.clone();
    let top_tgt = {
        let remap = |g: CellId| Term::Gen(map[&g]);
        tca.polyplex.universal.substitute(&remap)
    };
    let top = shape.add_cell(n, top_src, top_tgt);
    labels.push(Term::Gen(c));
    let label = Morphism { dom: shape.clone(), cod: x.clone(), image: labels };
    let polyplex = Polyplex::assemble(shape, Term::Gen(top))?;
    Ok(ClassifiedArrow { polyplex, label })
}

/// Rebuilds a composition term denoting the given value over its ambient
/// polygraph; evaluating the result gives the value back.
pub fn value_to_term(x: &Polygraph, v: &Value) -> Result<Term> {
    let ev = Ev::new(x);
    match v {
        Value::V0(c) => Ok(Term::Gen(*c)),
        Value::V1(p) => {
            Ok(Term::comp_all(p.edges.iter().map(|&e| Term::Gen(e)).collect(), 0))
        }
        Value::V2(p2) => {
            let m = Mach::load2(&ev, p2)?;
            Unroll::ambient_mode(&m).term2()
        }
        Value::V3(p3) => {
            let m = Mach::load3(&ev, p3)?;
            Unroll::ambient_mode(&m).term3()
        }
    }
}

fn edge_end(ev: &Ev, e: CellId, s: Sign) -> Result<CellId> {
    match ev.att_val(e, s)? {
        Value::V0(v) => Ok(v),
        _ => Err(Error::UnsupportedClass(format!("1-cell {e} has a non-vertex boundary"))),
    }
}

/// Rebuilds terms from a machine's instance data. In shape mode each
/// instance names a cell of the fresh shape polygraph, interned
/// dimension-first in creation order; in ambient mode each instance names
/// its own label, which re-syntactizes the machine's value.
///
/// Vertex unification during placement can orphan entries of the
/// machine's vertex table. An orphaned instance touches no wire, so it
/// does not occur in the diagram and shape mode drops it.
struct Unroll<'m, 'e, 'a> {
    m: &'m Mach<'e, 'a>,
    vertex_ids: Vec<CellId>,
    wire_ids: Vec<CellId>,
    node_ids: Vec<CellId>,
    box_ids: Vec<CellId>,
}

impl<'m, 'e, 'a> Unroll<'m, 'e, 'a> {
    fn shape_mode(m: &'m Mach<'e, 'a>) -> Unroll<'m, 'e, 'a> {
        let mut used = vec![m.wv.is_empty(); m.vl.len()];
        for &(va, vb) in &m.wv {
            used[va] = true;
            used[vb] = true;
        }
        let mut vertex_ids = vec![CellId::MAX; m.vl.len()];
        let mut nv: CellId = 0;
        for (i, &u) in used.iter().enumerate() {
            if u {
                vertex_ids[i] = nv;
                nv += 1;
            }
        }
        let nw = m.wl.len() as CellId;
        let nn = m.nl.len() as CellId;
        Unroll {
            m,
            vertex_ids,
            wire_ids: (0..nw).map(|i| nv + i).collect(),
            node_ids: (0..nn).map(|i| nv + nw + i).collect(),
            box_ids: (0..m.recs.len() as CellId).map(|r| nv + nw + nn + r).collect(),
        }
    }

    fn ambient_mode(m: &'m Mach<'e, 'a>) -> Unroll<'m, 'e, 'a> {
        Unroll {
            m,
            vertex_ids: m.vl.clone(),
            wire_ids: m.wl.clone(),
            node_ids: m.nl.clone(),
            box_ids: m.recs.iter().map(|r| r.cell).collect(),
        }
    }

    /// The shape polygraph and the ambient label of each shape cell, in
    /// creation order: vertices, wires, nodes, then boxes.
    fn shape(&self) -> Result<(Polygraph, Vec<CellId>)> {
        let m = self.m;
        let mut shape = Polygraph::new(ClassTag::Positive);
        let mut labels = Vec::new();
        for (i, &l) in m.vl.iter().enumerate() {
            if self.vertex_ids[i] == CellId::MAX {
                continue;
            }
            shape.add_cell0();
            labels.push(l);
        }
        for (i, &(va, vb)) in m.wv.iter().enumerate() {
            shape.add_cell(1, Term::Gen(self.vertex_ids[va]), Term::Gen(self.vertex_ids[vb]));
            labels.push(m.wl[i]);
        }
        for i in 0..m.nl.len() {
            let s = self.path_term(&m.n_in[i]);
            let t = self.path_term(&m.n_out[i]);
            shape.add_cell(2, s, t);
            labels.push(m.nl[i]);
        }
        for rec in &m.recs {
            let s = self.layered2(&rec.window_in, &rec.region_word)?;
            let t = self.layered2(&rec.window_in, &rec.new_nodes)?;
            shape.add_cell(3, s, t);
            labels.push(rec.cell);
        }
        Ok((shape, labels))
    }

    fn path_term(&self, ws: &[usize]) -> Term {
        Term::comp_all(ws.iter().map(|&w| Term::Gen(self.wire_ids[w])).collect(), 0)
    }

    /// The 2-term of a layered word over the given source wires.
    fn layered2(&self, src: &[usize], word: &[(usize, usize)]) -> Result<Term> {
        let m = self.m;
        let mut frontier: Vec<usize> = src.to_vec();
        let mut layers = Vec::with_capacity(word.len());
        for &(n, o) in word {
            let w = m.n_in[n].len();
            if o + w > frontier.len() || frontier[o..o + w] != m.n_in[n][..] {
                return Err(Error::BoundaryMismatch {
                    level: 2,
                    detail: "layer word does not fit its frontier".into(),
                });
            }
            let mut parts: Vec<Term> =
                frontier[..o].iter().map(|&q| Term::Gen(self.wire_ids[q])).collect();
            parts.push(Term::Gen(self.node_ids[n]));
            parts.extend(frontier[o + w..].iter().map(|&q| Term::Gen(self.wire_ids[q])));
            layers.push(Term::comp_all(parts, 0));
            frontier.splice(o..o + w, m.n_out[n].iter().copied());
        }
        Ok(Term::comp_all(layers, 1))
    }

    /// The step term of one box: its ancestors below, the whiskered box,
    /// and the remaining independent layers above, composed at level 1.
    fn box_step(&self, r: usize) -> Result<Term> {
        let m = self.m;
        let rec = &m.recs[r];
        let region: BTreeSet<usize> = rec.region_word.iter().map(|&(n, _)| n).collect();
        let anc: BTreeSet<usize> = m
            .reach_in(&rec.pre_active, &region, true)
            .difference(&region)
            .copied()
            .collect();
        let (a_word, mid) = m.subset_word(&anc, &m.state_src)?;
        let ws =
            mid.iter().position(|&w| w == rec.window_in[0]).ok_or_else(|| Error::BoundaryMismatch {
                level: 1,
                detail: "box window is not on the mid frontier".into(),
            })?;
        let we = ws + rec.window_in.len();
        if we > mid.len() || mid[ws..we] != rec.window_in[..] {
            return Err(Error::BoundaryMismatch {
                level: 1,
                detail: "box window is not a span of the mid frontier".into(),
            });
        }
        let mut band_parts: Vec<Term> =
            mid[..ws].iter().map(|&q| Term::Gen(self.wire_ids[q])).collect();
        band_parts.push(Term::Gen(self.box_ids[r]));
        band_parts.extend(mid[we..].iter().map(|&q| Term::Gen(self.wire_ids[q])));
        let mut step = Term::comp_all(band_parts, 0);
        if !anc.is_empty() {
            step = Term::comp(self.layered2(&m.state_src, &a_word)?, step, 1);
        }
        let rest: BTreeSet<usize> = rec
            .pre_active
            .iter()
            .copied()
            .filter(|n| !region.contains(n) && !anc.contains(n))
            .collect();
        if !rest.is_empty() {
            let mut top: Vec<usize> = mid[..ws].to_vec();
            top.extend(rec.window_out.iter().copied());
            top.extend(mid[we..].iter().copied());
            let (b_word, _) = m.subset_word(&rest, &top)?;
            step = Term::comp(step, self.layered2(&top, &b_word)?, 1);
        }
        Ok(step)
    }

    /// The full 3-term: every box step composed at level 2.
    fn term3(&self) -> Result<Term> {
        let steps: Result<Vec<Term>> = (0..self.m.recs.len()).map(|r| self.box_step(r)).collect();
        Ok(Term::comp_all(steps?, 2))
    }

    /// The 2-term of the machine's current active state.
    fn term2(&self) -> Result<Term> {
        let (word, _) = self.m.subset_word(&self.m.active, &self.m.state_src)?;
        self.layered2(&self.m.state_src, &word)
    }
}

/// Whether `t` denotes the universal arrow of a polyplex over `p`, by the
/// alternating-sum test: the image of the alternating cell sum of the
/// globe equals the alternating cell sum of `p`. The test is only sound
/// over regular polygraphs, so other inputs are rejected.
pub fn is_polyplex(p: &Polygraph, t: &Term) -> Result<bool> {
    if !is_regular(p)? {
        return Err(Error::UnsupportedClass(
            "the alternating-sum polyplex test is only sound over regular polygraphs".into(),
        ));
    }
    let ctx = LinCtx::new(p);
    let n = p.dim().max(p.term_dim(t)?);
    Ok(ctx.sigma_image(t, n)? == ctx.sigma())
}

/// Whether the polyplex has spherical boundary: its iterated source and
/// target sub-polygraphs meet exactly in the next boundary sphere down.
/// Computed two independent ways, by pairwise disjointness of the
/// delta-supports of the iterated boundaries of the universal arrow and
/// by direct sub-polygraph intersection; the answers must agree.
pub fn has_spherical_boundary(p: &Polyplex) -> Result<bool> {
    let n = p.dim();
    if n == 0 {
        return Ok(true);
    }
    let ctx = LinCtx::new(&p.underlying);
    let mut images = Vec::new();
    for k in 0..n {
        for s in [Sign::Neg, Sign::Pos] {
            images.push(ctx.delta_boundary(&p.universal, k, s)?);
        }
    }
    images.push(ctx.delta(&p.universal)?);
    let mut by_supports = true;
    'outer: for i in 0..images.len() {
        let si: BTreeSet<CellId> = images[i].support().collect();
        for j in i + 1..images.len() {
            if images[j].support().any(|c| si.contains(&c)) {
                by_supports = false;
                break 'outer;
            }
        }
    }
    let mut by_subpolygraphs = true;
    let mut below: BTreeSet<CellId> = BTreeSet::new();
    for k in 0..n {
        let neg =
            ctx.smallest_subpolygraph(&p.underlying.boundary_term(&p.universal, k, Sign::Neg)?)?;
        let pos =
            ctx.smallest_subpolygraph(&p.underlying.boundary_term(&p.universal, k, Sign::Pos)?)?;
        let meet: BTreeSet<CellId> = neg.members.intersection(&pos.members).copied().collect();
        if meet != below {
            by_subpolygraphs = false;
            break;
        }
        below = neg.members.union(&pos.members).copied().collect();
    }
    if by_supports != by_subpolygraphs {
        return Err(Error::MethodDisagreement(format!(
            "sphericity by supports says {by_supports}, by sub-polygraph intersection says {by_subpolygraphs}"
        )));
    }
    Ok(by_supports)
}

/// A regular polyplex: spherical boundary, recursively so for all its
/// classified boundaries.
pub fn is_regular_polyplex(p: &Polyplex) -> Result<bool> {
    if !has_spherical_boundary(p)? {
        return Ok(false);
    }
    for (bp, _) in p.boundaries.values() {
        if !is_regular_polyplex(bp)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Whether the arrow denoted by `t` classifies to a regular polyplex.
pub fn is_regular_arrow(x: &Polygraph, t: &Term) -> Result<bool> {
    Ok(is_regular_polyplex(&classify(x, t)?.polyplex)?)
}

/// A regular polygraph: positive, and the plex of every cell is a regular
/// polyplex. Decidable up to dimension 4: cells through dimension 3
/// classify structurally and 4-cells through boundary gluing; higher
/// dimensions are out of the evaluator's range and report as unsupported.
pub fn is_regular(x: &Polygraph) -> Result<bool> {
    if !x.is_positive()? {
        return Ok(false);
    }
    for c in x.cells() {
        match plex_of_cell(x, c.id) {
            Ok(ca) => {
                if !is_regular_polyplex(&ca.polyplex)? {
                    return Ok(false);
                }
            }
            Err(Error::UnsupportedClass(_)) => return Ok(false),
            Err(e) => return Err(e),
        }
    }
    Ok(true)
}

/// A regular morphism: both ends regular and every generating cell maps
/// to a regular arrow.
pub fn is_regular_morphism(f: &Morphism) -> Result<bool> {
    if !is_regular(&f.dom)? || !is_regular(&f.cod)? {
        return Ok(false);
    }
    for c in f.dom.cells() {
        if !is_regular_arrow(&f.cod, &f.image[c.id as usize])? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Occurrence signature used to prune the isomorphism search: for each
/// cell, the sorted list of `(dim, negative count, positive count)`
/// triples over every attachment whose delta touches the cell.
fn occurrence_signatures(p: &Polygraph) -> Result<Vec<Vec<(usize, i64, i64)>>> {
    let ctx = LinCtx::new(p);
    let mut out = vec![Vec::new(); p.cells().len()];
    for z in p.cells() {
        if z.dim == 0 {
            continue;
        }
        let neg = ctx.delta(p.attachment(z.id, Sign::Neg)?)?;
        let pos = ctx.delta(p.attachment(z.id, Sign::Pos)?)?;
        let touched: BTreeSet<CellId> = neg.support().chain(pos.support()).collect();
        for c in touched {
            out[c as usize].push((z.dim, neg.get(c), pos.get(c)));
        }
    }
    for v in &mut out {
        v.sort_unstable();
    }
    Ok(out)
}

fn iso_search(
    a: &Polygraph,
    b: &Polygraph,
    ctx_b: &LinCtx,
    order: &[CellId],
    pos: usize,
    sig_a: &[Vec<(usize, i64, i64)>],
    sig_b: &[Vec<(usize, i64, i64)>],
    assigned: &mut Vec<Option<CellId>>,
    used: &mut Vec<bool>,
) -> Result<bool> {
    let Some(&ac) = order.get(pos) else {
        return Ok(true);
    };
    let ad = a.cell(ac)?.dim;
    for bc in b.cells_of_dim(ad) {
        if used[bc as usize] || sig_b[bc as usize] != sig_a[ac as usize] {
            continue;
        }
        let mut matches = true;
        if ad > 0 {
            let sub = |g: CellId| Term::Gen(assigned[g as usize].unwrap());
            for s in [Sign::Neg, Sign::Pos] {
                let image = ctx_b.shadow(&a.attachment(ac, s)?.substitute(&sub))?;
                if image != ctx_b.shadow(b.attachment(bc, s)?)? {
                    matches = false;
                    break;
                }
            }
        }
        if !matches {
            continue;
        }
        assigned[ac as usize] = Some(bc);
        used[bc as usize] = true;
        if iso_search(a, b, ctx_b, order, pos + 1, sig_a, sig_b, assigned, used)? {
            return Ok(true);
        }
        assigned[ac as usize] = None;
        used[bc as usize] = false;
    }
    Ok(false)
}

/// The image vector of a polygraphic isomorphism `a -> b` when one
/// exists: entry `c` is the `b`-cell that the `a`-cell `c` maps to.
/// The search proceeds dimension by dimension and compares attachments
/// through their linear shadows, which decides arrow equality on the
/// regular class. On plexes the isomorphism is unique when it exists, so
/// the first match is the answer.
pub fn plex_iso(a: &Polygraph, b: &Polygraph) -> Result<Option<Vec<CellId>>> {
    if a.cells().len() != b.cells().len() || a.dim() != b.dim() {
        return Ok(None);
    }
    for d in 0..=a.dim() {
        if a.cells_of_dim(d).len() != b.cells_of_dim(d).len() {
            return Ok(None);
        }
    }
    let sig_a = occurrence_signatures(a)?;
    let sig_b = occurrence_signatures(b)?;
    let mut order: Vec<CellId> = a.cells().iter().map(|c| c.id).collect();
    order.sort_by_key(|&c| a.cell(c).map(|x| x.dim).unwrap_or(0));
    let ctx_b = LinCtx::new(b);
    let mut assigned: Vec<Option<CellId>> = vec![None; a.cells().len()];
    let mut used = vec![false; b.cells().len()];
    if iso_search(a, b, &ctx_b, &order, 0, &sig_a, &sig_b, &mut assigned, &mut used)? {
        Ok(Some(assigned.into_iter().map(|c| c.unwrap()).collect()))
    } else {
        Ok(None)
    }
}

/// Whether a morphism is generic. Two shortcut branches apply when their
/// hypotheses hold: a regular morphism is generic exactly when it
/// preserves the alternating cell sum, and over a domain whose plexes
/// embed monomorphically, preservation of the alternating sum together
/// with alternate positivity suffices to accept. Otherwise the generic
/// factorization decides: the morphism is generic exactly when its
/// polygraphic part is an isomorphism.
pub fn is_generic(f: &Morphism) -> Result<bool> {
    if let Ok(true) = is_regular_morphism(f) {
        return crate::lin::preserves_sigma(f);
    }
    if let Ok(true) = all_plex_maps_mono(&f.dom) {
        if crate::lin::preserves_sigma(f)? && crate::lin::preserves_alternate_positivity(f)? {
            return Ok(true);
        }
    }
    let (_, p) = generic_factorization(f)?;
    is_isomorphism(&p)
}

fn all_plex_maps_mono(x: &Polygraph) -> Result<bool> {
    for c in x.cells() {
        match plex_of_cell(x, c.id) {
            Ok(ca) => {
                if !ca.label.is_polygraphic_mono() {
                    return Ok(false);
                }
            }
            Err(Error::UnsupportedClass(_)) | Err(Error::DimensionLimit(_)) => return Ok(false),
            Err(e) => return Err(e),
        }
    }
    Ok(true)
}

fn is_isomorphism(p: &Morphism) -> Result<bool> {
    if !p.is_polygraphic_mono() {
        return Ok(false);
    }
    if p.dom.cells().len() != p.cod.cells().len() {
        return Ok(false);
    }
    for c in p.dom.cells() {
        let Term::Gen(img) = p.image[c.id as usize] else { return Ok(false) };
        if p.cod.dim_of(img)? != c.dim {
            return Ok(false);
        }
    }
    Ok(true)
}

enum EmbedOutcome {
    Done(Vec<Option<CellId>>),
    Merge(Vec<(CellId, CellId)>),
}

/// Embeds the boundary of a classified cell image into the middle
/// polygraph under construction. A degenerate image embeds its whole
/// shape through both boundary attachments; a full-dimensional one
/// embeds each boundary polyplex through its inclusion. Conflicting
/// assignments are returned as merge requests.
fn try_embed(
    mid: &Polygraph,
    x: &Polygraph,
    cid: CellId,
    ca: &ClassifiedArrow,
    g_img: &[Term],
) -> Result<EmbedOutcome> {
    let n = x.dim_of(cid)?;
    let pdim = ca.polyplex.dim();
    let mut embed: Vec<Option<CellId>> = vec![None; ca.polyplex.underlying.cells().len()];
    let mut merges: Vec<(CellId, CellId)> = Vec::new();
    for s in [Sign::Neg, Sign::Pos] {
        let att = x.attachment(cid, s)?.clone();
        let att_mid = att.substitute(&|g| g_img[g as usize].clone());
        let q = classify(mid, &att_mid)?;
        let (bp_under, bp_univ, inc_image): (&Polygraph, &Term, Vec<Term>) = if pdim < n {
            let ident = (0..embed.len()).map(|i| Term::Gen(i as CellId)).collect();
            (&ca.polyplex.underlying, &ca.polyplex.universal, ident)
        } else {
            let (bp, inc) = ca
                .polyplex
                .boundary(pdim - 1, s)
                .ok_or_else(|| Error::MethodDisagreement("missing classified boundary".into()))?;
            (&bp.underlying, &bp.universal, inc.image.clone())
        };
        if q.polyplex.underlying != *bp_under || q.polyplex.universal != *bp_univ {
            return Err(Error::MethodDisagreement(
                "boundary classification does not match the shape boundary".into(),
            ));
        }
        for (j, timg) in inc_image.iter().enumerate() {
            let Term::Gen(pc) = timg else {
                return Err(Error::MethodDisagreement(
                    "boundary inclusion is not polygraphic".into(),
                ));
            };
            let Term::Gen(mc) = &q.label.image[j] else {
                return Err(Error::MethodDisagreement(
                    "boundary labeling is not polygraphic".into(),
                ));
            };
            match embed[*pc as usize] {
                None => embed[*pc as usize] = Some(*mc),
                Some(prev) if prev == *mc => {}
                Some(prev) => merges.push((prev, *mc)),
            }
        }
    }
    if merges.is_empty() {
        Ok(EmbedOutcome::Done(embed))
    } else {
        Ok(EmbedOutcome::Merge(merges))
    }
}

/// Quotients the middle polygraph by the given identifications, keeping
/// the smallest cell of each class, and rewrites the label and generic
/// images through the quotient.
fn quotient(
    mid: &mut Polygraph,
    p_img: &mut Vec<Term>,
    g_img: &mut Vec<Term>,
    pairs: &[(CellId, CellId)],
) -> Result<()> {
    let n = mid.cells().len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for &(a, b) in pairs {
        let ra = find(&mut parent, a as usize);
        let rb = find(&mut parent, b as usize);
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    }
    let roots: Vec<usize> = (0..n).map(|i| find(&mut parent, i)).collect();
    let mut q = Polygraph::new(ClassTag::Positive);
    let mut new_p: Vec<Term> = Vec::new();
    let mut newid: Vec<Option<CellId>> = vec![None; n];
    for i in 0..n {
        let r = roots[i];
        if r != i {
            if mid.dim_of(i as CellId)? != mid.dim_of(r as CellId)? || p_img[i] != p_img[r] {
                return Err(Error::MethodDisagreement(
                    "gluing identifies middle cells with different labels".into(),
                ));
            }
            newid[i] = newid[r];
            continue;
        }
        let cell = mid.cell(i as CellId)?.clone();
        let id = if cell.dim == 0 {
            q.add_cell0()
        } else {
            let lift = |g: CellId| Term::Gen(newid[roots[g as usize]].expect("lower cells renumber first"));
            q.add_cell(
                cell.dim,
                cell.src.as_ref().unwrap().substitute(&lift),
                cell.tgt.as_ref().unwrap().substitute(&lift),
            )
        };
        newid[i] = Some(id);
        new_p.push(p_img[i].clone());
    }
    let remap = |t: &Term| t.substitute(&|g| Term::Gen(newid[roots[g as usize]].unwrap()));
    for t in g_img.iter_mut() {
        *t = remap(t);
    }
    *p_img = new_p;
    *mid = q;
    Ok(())
}

/// Factors a morphism between positive polygraphs as a generic morphism
/// followed by a polygraphic one. The middle polygraph glues the
/// classified shape of each cell image along the classified shapes of its
/// boundary images, cell by cell in creation order; when the two boundary
/// embeddings of a shape overlap beyond the shared sphere, the overlap is
/// identified by a pushout-style quotient. Canonical interning of
/// classification makes the gluing strict, so the middle object is unique
/// on the nose rather than up to isomorphism.
pub fn generic_factorization(f: &Morphism) -> Result<(Morphism, Morphism)> {
    let x = &f.dom;
    let y = &f.cod;
    if !x.is_positive()? || !y.is_positive()? {
        return Err(Error::UnsupportedClass(
            "generic factorization needs positive polygraphs".into(),
        ));
    }
    let mut mid = Polygraph::new(ClassTag::Positive);
    let mut g_img: Vec<Term> = Vec::new();
    let mut p_img: Vec<Term> = Vec::new();
    for c in x.cells() {
        let t = &f.image[c.id as usize];
        let ca = classify(y, t)?;
        if c.dim == 0 {
            let m_id = mid.add_cell0();
            p_img.push(ca.label.image[0].clone());
            g_img.push(Term::Gen(m_id));
            continue;
        }
        let embed = loop {
            match try_embed(&mid, x, c.id, &ca, &g_img)? {
                EmbedOutcome::Done(e) => break e,
                EmbedOutcome::Merge(pairs) => quotient(&mut mid, &mut p_img, &mut g_img, &pairs)?,
            }
        };
        let mut embed = embed;
        let pshape = &ca.polyplex.underlying;
        for pc in 0..pshape.cells().len() {
            if embed[pc].is_some() {
                continue;
            }
            let cell = pshape.cell(pc as CellId)?.clone();
            let id = if cell.dim == 0 {
                mid.add_cell0()
            } else {
                let lift =
                    |g: CellId| Term::Gen(embed[g as usize].expect("boundary cells embed first"));
                let s = cell.src.as_ref().unwrap().substitute(&lift);
                let t2 = cell.tgt.as_ref().unwrap().substitute(&lift);
                mid.add_cell(cell.dim, s, t2)
            };
            embed[pc] = Some(id);
            p_img.push(ca.label.image[pc].clone());
        }
        g_img.push(
            ca.polyplex
                .universal
                .substitute(&|g| Term::Gen(embed[g as usize].expect("every shape cell embeds"))),
        );
    }
    let g = Morphism { dom: x.clone(), cod: mid.clone(), image: g_img };
    let p = Morphism { dom: mid, cod: y.clone(), image: p_img };
    Ok((g, p))
}

/// Lifts a composition along a polygraphic morphism: given `F(v) = u #_k w`,
/// finds the unique decomposition `v = u' #_k w'` with `F(u') = u` and
/// `F(w') = w`.
pub fn syntactic_lift(
    f: &Morphism,
    v: &Term,
    u: &Term,
    w: &Term,
    k: usize,
) -> Result<(Term, Term)> {
    if !f.is_polygraphic() {
        return Err(Error::HypothesisFailed(
            "syntactic lifting is along polygraphic morphisms".into(),
        ));
    }
    let x = &f.dom;
    let y = &f.cod;
    let evx = Ev::new(x);
    let evy = Ev::new(y);
    let vv = evx.eval(v)?;
    let uv = evy.eval(u)?;
    let wv = evy.eval(w)?;
    let fv = evy.eval(&f.apply(&value_to_term(x, &vv)?))?;
    let glued = evy
        .compose(uv.clone(), wv.clone(), k)
        .map_err(|_| Error::DecompositionMismatch("the requested factors do not compose".into()))?;
    if fv != glued {
        return Err(Error::DecompositionMismatch(
            "the image of the arrow is not the requested composite".into(),
        ));
    }
    let mut found: Option<(Value, Value)> = None;
    for (av, bv) in splits(x, &vv, k)? {
        let fa = evy.eval(&f.apply(&value_to_term(x, &av)?))?;
        let fb = evy.eval(&f.apply(&value_to_term(x, &bv)?))?;
        if fa == uv && fb == wv {
            match &found {
                None => found = Some((av, bv)),
                Some((a0, b0)) if *a0 == av && *b0 == bv => {}
                Some(_) => {
                    return Err(Error::MethodDisagreement(
                        "two distinct lifts of the same decomposition".into(),
                    ))
                }
            }
        }
    }
    let (av, bv) = found.ok_or_else(|| {
        Error::DecompositionMismatch("no decomposition of the arrow lifts the factors".into())
    })?;
    Ok((value_to_term(x, &av)?, value_to_term(x, &bv)?))
}

/// All decompositions `v = a #_k b`, including the two degenerate ones
/// through the boundaries. Candidates are verified by recomposition.
fn splits(x: &Polygraph, v: &Value, k: usize) -> Result<Vec<(Value, Value)>> {
    let ev = Ev::new(x);
    let mut cands: BTreeSet<(Value, Value)> = BTreeSet::new();
    cands.insert((ev.boundary(v, k, Sign::Neg)?, v.clone()));
    cands.insert((v.clone(), ev.boundary(v, k, Sign::Pos)?));
    let n = v.dim();
    if k < n {
        match v {
            Value::V1(p) => {
                for i in 1..p.edges.len() {
                    let start = edge_end(&ev, p.edges[i - 1], Sign::Pos)?;
                    cands.insert((
                        Value::V1(Path { start: p.start, edges: p.edges[..i].to_vec() }),
                        Value::V1(Path { start, edges: p.edges[i..].to_vec() }),
                    ));
                }
            }
            Value::V2(p2) if k == 0 => {
                cands.extend(splits2_columns(&ev, p2)?);
            }
            Value::V2(p2) => {
                cands.extend(splits2_bands(&ev, p2)?);
            }
            Value::V3(p3) if k == 2 => {
                cands.extend(splits3_boxes(&ev, p3)?);
            }
            Value::V3(p3) => {
                cands.extend(splits3_spatial(&ev, p3, k)?);
            }
            _ => {}
        }
    }
    let mut out = Vec::new();
    for (a, b) in cands {
        if let Ok(w) = ev.compose(a.clone(), b.clone(), k) {
            if w == *v {
                out.push((a, b));
            }
        }
    }
    Ok(out)
}

fn widths2(ev: &Ev, c: CellId) -> Result<(usize, usize)> {
    let a = match ev.att_val(c, Sign::Neg)? {
        Value::V1(p) => p.edges.len(),
        _ => return Err(Error::UnsupportedClass(format!("2-cell {c} has a non-path source"))),
    };
    let b = match ev.att_val(c, Sign::Pos)? {
        Value::V1(p) => p.edges.len(),
        _ => return Err(Error::UnsupportedClass(format!("2-cell {c} has a non-path target"))),
    };
    Ok((a, b))
}

fn build2(ev: &Ev, src: Path, layers: Vec<Layer2>) -> Result<Value> {
    if layers.is_empty() {
        return Ok(Value::V1(src));
    }
    Ok(Value::V2(ev.canon2(src, &layers)?))
}

/// Column splits of a 2-state: every cut of the source path where no
/// layer straddles the cut.
fn splits2_columns(ev: &Ev, p2: &Past2) -> Result<Vec<(Value, Value)>> {
    let mut out = Vec::new();
    let width = p2.src.edges.len();
    'cut: for c in 1..width {
        let mut cut = c;
        let mut left: Vec<Layer2> = Vec::new();
        let mut right: Vec<Layer2> = Vec::new();
        for ly in &p2.word {
            let (win, wout) = widths2(ev, ly.cell)?;
            if ly.offset + win <= cut {
                left.push(ly.clone());
                cut = cut - win + wout;
            } else if ly.offset >= cut {
                right.push(Layer2 { cell: ly.cell, offset: ly.offset - cut });
            } else {
                continue 'cut;
            }
        }
        let mut mid = p2.src.start;
        for &e in &p2.src.edges[..c] {
            mid = edge_end(ev, e, Sign::Pos)?;
        }
        let a = build2(ev, Path { start: p2.src.start, edges: p2.src.edges[..c].to_vec() }, left)?;
        let b = build2(ev, Path { start: mid, edges: p2.src.edges[c..].to_vec() }, right)?;
        out.push((a, b));
    }
    Ok(out)
}

/// Band splits of a 2-state: every downward-closed proper subset of its
/// layer instances against the rest.
fn splits2_bands(ev: &Ev, p2: &Past2) -> Result<Vec<(Value, Value)>> {
    let m = Mach::load2(ev, p2)?;
    let nodes: Vec<usize> = m.active.iter().copied().collect();
    if nodes.len() > 16 {
        return Err(Error::BoundExceeded(format!(
            "band split enumeration is capped at 16 layers, got {}",
            nodes.len()
        )));
    }
    let mut out = Vec::new();
    for mask in 1..(1u32 << nodes.len()) - 1 {
        let s: BTreeSet<usize> = nodes
            .iter()
            .enumerate()
            .filter(|&(i, _)| mask & (1 << i) != 0)
            .map(|(_, &n)| n)
            .collect();
        if !m.reach_in(&m.active, &s, true).is_subset(&s) {
            continue;
        }
        let a = m.state2_labels(&s, &m.state_src)?;
        let (_, midf) = m.subset_word(&s, &m.state_src)?;
        let rest: BTreeSet<usize> = m.active.difference(&s).copied().collect();
        let b = m.state2_labels(&rest, &midf)?;
        out.push((Value::V2(a), Value::V2(b)));
    }
    Ok(out)
}

/// Replays a sub-history of a machine: the given initial node instances
/// over the given source wires, then the listed boxes in order. Returns
/// the value, or nothing when the selection is not self-contained.
fn sub_history(
    m: &Mach,
    init_nodes: &BTreeSet<usize>,
    src_wires: &[usize],
    box_idxs: &[usize],
) -> Option<Value> {
    let init_st = m.state2_labels(init_nodes, src_wires).ok()?;
    let mut state = init_nodes.clone();
    let mut boxes = Vec::new();
    for &i in box_idxs {
        let rec = &m.recs[i];
        let region: BTreeSet<usize> = rec.region_word.iter().map(|&(n, _)| n).collect();
        if !region.is_subset(&state) {
            return None;
        }
        let (word_now, _) = m.subset_word(&state, src_wires).ok()?;
        let mut ranks = Vec::with_capacity(region.len());
        for &n in &region {
            ranks.push(word_now.iter().position(|&(q, _)| q == n)?);
        }
        ranks.sort_unstable();
        boxes.push(Box3 { node_ranks: ranks, cell: rec.cell });
        for &n in &region {
            state.remove(&n);
        }
        for &(n, _) in &rec.new_nodes {
            state.insert(n);
        }
    }
    if boxes.is_empty() {
        Some(normalize_past2(init_st))
    } else {
        Some(Value::V3(Past3 { src: init_st, boxes }))
    }
}

fn recanon(ev: &Ev, v: Value) -> Option<Value> {
    match v {
        Value::V3(p3) => {
            let m = Mach::load3(ev, &p3).ok()?;
            Some(Value::V3(m.encode3().ok()?))
        }
        other => Some(other),
    }
}

/// Splits of a 3-arrow at level 2: partitions of its boxes into a
/// self-contained prefix set and the rest.
fn splits3_boxes(ev: &Ev, p3: &Past3) -> Result<Vec<(Value, Value)>> {
    let m = Mach::load3(ev, p3)?;
    let nb = m.recs.len();
    if nb > 12 {
        return Err(Error::BoundExceeded(format!(
            "box split enumeration is capped at 12 boxes, got {nb}"
        )));
    }
    let mut out = Vec::new();
    for mask in 1..(1u64 << nb) - 1 {
        let a_idx: Vec<usize> = (0..nb).filter(|i| mask & (1 << i) != 0).collect();
        let b_idx: Vec<usize> = (0..nb).filter(|i| mask & (1 << i) == 0).collect();
        let Some(a_raw) = sub_history(&m, &m.init_active, &m.state_src, &a_idx) else { continue };
        let mut a_state = m.init_active.clone();
        for &i in &a_idx {
            for &(n, _) in &m.recs[i].region_word {
                a_state.remove(&n);
            }
            for &(n, _) in &m.recs[i].new_nodes {
                a_state.insert(n);
            }
        }
        let Some(b_raw) = sub_history(&m, &a_state, &m.state_src, &b_idx) else { continue };
        let (Some(a), Some(b)) = (recanon(ev, a_raw), recanon(ev, b_raw)) else { continue };
        out.push((a, b));
    }
    Ok(out)
}

/// Splits of a 3-arrow at level 0 or 1: split the initial state by column
/// or band, then assign each box to a side by the ancestry of its region.
fn splits3_spatial(ev: &Ev, p3: &Past3, k: usize) -> Result<Vec<(Value, Value)>> {
    let m = Mach::load3(ev, p3)?;
    let init: Vec<usize> = m.init_active.iter().copied().collect();
    if init.len() > 16 {
        return Err(Error::BoundExceeded(format!(
            "spatial split enumeration is capped at 16 initial layers, got {}",
            init.len()
        )));
    }
    let (init_word, _) = m.subset_word(&m.init_active, &m.state_src)?;
    let mut out = Vec::new();
    let mut side_sets: Vec<(BTreeSet<usize>, Vec<usize>, Vec<usize>)> = Vec::new();
    if k == 0 {
        let width = m.state_src.len();
        for cut in 1..width {
            let mut sides = BTreeSet::new();
            let mut ok = true;
            let mut shift = cut;
            for &(n, o) in &init_word {
                let w = m.n_in[n].len();
                if o + w <= shift {
                    sides.insert(n);
                    shift = shift - w + m.n_out[n].len();
                } else if o < shift {
                    ok = false;
                    break;
                }
            }
            if ok {
                side_sets.push((
                    sides,
                    m.state_src[..cut].to_vec(),
                    m.state_src[cut..].to_vec(),
                ));
            }
        }
    } else {
        for mask in 0..(1u64 << init.len()) {
            let s: BTreeSet<usize> = init
                .iter()
                .enumerate()
                .filter(|&(i, _)| mask & (1 << i) != 0)
                .map(|(_, &n)| n)
                .collect();
            if !m.reach_in(&m.init_active, &s, true).is_subset(&s) {
                continue;
            }
            side_sets.push((s, m.state_src.clone(), Vec::new()));
        }
    }
    'cand: for (a_init, a_src, b_src_cols) in side_sets {
        let mut side: BTreeMap<usize, bool> = BTreeMap::new();
        for &n in &m.init_active {
            side.insert(n, a_init.contains(&n));
        }
        let mut a_idx = Vec::new();
        let mut b_idx = Vec::new();
        for (i, rec) in m.recs.iter().enumerate() {
            let mut this: Option<bool> = None;
            for &(n, _) in &rec.region_word {
                let Some(&sd) = side.get(&n) else { continue 'cand };
                if *this.get_or_insert(sd) != sd {
                    continue 'cand;
                }
            }
            let sd = this.unwrap_or(false);
            for &(n, _) in &rec.new_nodes {
                side.insert(n, sd);
            }
            if sd {
                a_idx.push(i);
            } else {
                b_idx.push(i);
            }
        }
        let b_init: BTreeSet<usize> =
            m.init_active.iter().copied().filter(|n| !a_init.contains(n)).collect();
        let (a_raw, b_raw) = if k == 0 {
            let Some(a) = sub_history(&m, &a_init, &a_src, &a_idx) else { continue };
            let Some(b) = sub_history(&m, &b_init, &b_src_cols, &b_idx) else { continue };
            (a, b)
        } else {
            let Some(a) = sub_history(&m, &a_init, &a_src, &a_idx) else { continue };
            let mut a_final = a_init.clone();
            for &i in &a_idx {
                for &(n, _) in &m.recs[i].region_word {
                    a_final.remove(&n);
                }
                for &(n, _) in &m.recs[i].new_nodes {
                    a_final.insert(n);
                }
            }
            let Ok(mid_wires) = m.subset_frontier(&a_final, &a_src) else { continue };
            let Some(b) = sub_history(&m, &b_init, &mid_wires, &b_idx) else { continue };
            (a, b)
        };
        let (Some(a), Some(b)) = (recanon(ev, a_raw), recanon(ev, b_raw)) else { continue };
        out.push((a, b));
    }
    Ok(out)
}

/// Which part of a polyplex owns a lower cell: the source boundary, or
/// the interior of the target of exactly one top cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InnerOwner {
    Source,
    InnerOfTarget(CellId),
}

/// Locates a cell of dimension below the top within a regular polyplex:
/// it lies in the source boundary or is an inner cell of the target of a
/// unique top cell, and the two cases exclude each other.
pub fn inner_owner(p: &Polyplex, x: CellId) -> Result<InnerOwner> {
    let n = p.dim();
    let d = p.underlying.dim_of(x)?;
    if n == 0 || d >= n {
        return Err(Error::HypothesisFailed(
            "inner ownership applies to cells below the top dimension".into(),
        ));
    }
    let ctx = LinCtx::new(&p.underlying);
    let src_sub =
        ctx.smallest_subpolygraph(&p.underlying.boundary_term(&p.universal, n - 1, Sign::Neg)?)?;
    if src_sub.members.contains(&x) {
        return Ok(InnerOwner::Source);
    }
    let mut owner = None;
    for c in p.underlying.cells_of_dim(n) {
        let tgt = p.underlying.attachment(c, Sign::Pos)?.clone();
        let whole = ctx.smallest_subpolygraph(&tgt)?;
        if !whole.members.contains(&x) {
            continue;
        }
        let m = p.underlying.term_dim(&tgt)?;
        let mut rim: BTreeSet<CellId> = BTreeSet::new();
        if m >= 1 {
            for s in [Sign::Neg, Sign::Pos] {
                let b = ctx.smallest_subpolygraph(&p.underlying.boundary_term(&tgt, m - 1, s)?)?;
                rim.extend(b.members.iter().copied());
            }
        }
        if !rim.contains(&x) {
            if owner.replace(c).is_some() {
                return Err(Error::MethodDisagreement(
                    "cell is inner to the target of two top cells".into(),
                ));
            }
        }
    }
    owner.map(InnerOwner::InnerOfTarget).ok_or_else(|| {
        Error::MethodDisagreement(
            "cell is neither in the source boundary nor inner in any target".into(),
        )
    })
}

/// Collapses a polyplex with exactly one top cell: removes the top cell
/// and the inner cells of both of its boundaries, and adds a single cell
/// one dimension down spanning the same lower sphere. The iterated
/// boundaries below the removed level are preserved.
pub fn collapse_single_top(p: &Polyplex) -> Result<Polyplex> {
    let n = p.dim();
    if n == 0 {
        return Err(Error::HypothesisFailed("a 0-dimensional shape has no top cell to collapse".into()));
    }
    let tops = p.underlying.cells_of_dim(n);
    if tops.len() != 1 {
        return Err(Error::HypothesisFailed(format!(
            "collapse needs exactly one top cell, found {}",
            tops.len()
        )));
    }
    let x = tops[0];
    let ctx = LinCtx::new(&p.underlying);
    let mut removed: BTreeSet<CellId> = BTreeSet::new();
    removed.insert(x);
    for s in [Sign::Neg, Sign::Pos] {
        let att = p.underlying.attachment(x, s)?.clone();
        let whole = ctx.smallest_subpolygraph(&att)?;
        let m = p.underlying.term_dim(&att)?;
        let mut rim: BTreeSet<CellId> = BTreeSet::new();
        if m >= 1 {
            for s2 in [Sign::Neg, Sign::Pos] {
                let b = ctx.smallest_subpolygraph(&p.underlying.boundary_term(&att, m - 1, s2)?)?;
                rim.extend(b.members.iter().copied());
            }
        }
        for c in whole.members {
            if !rim.contains(&c) {
                removed.insert(c);
            }
        }
    }
    let mut q = Polygraph::new(ClassTag::Positive);
    let mut rename: BTreeMap<CellId, CellId> = BTreeMap::new();
    for c in p.underlying.cells() {
        if removed.contains(&c.id) {
            continue;
        }
        for side in [&c.src, &c.tgt] {
            if let Some(t) = side {
                for g in t.gens() {
                    if removed.contains(&g) {
                        return Err(Error::MethodDisagreement(
                            "a kept cell references a removed inner cell".into(),
                        ));
                    }
                }
            }
        }
        let id = if c.dim == 0 {
            q.add_cell0()
        } else {
            let lift = |g: CellId| Term::Gen(rename[&g]);
            q.add_cell(c.dim, c.src.as_ref().unwrap().substitute(&lift), c.tgt.as_ref().unwrap().substitute(&lift))
        };
        rename.insert(c.id, id);
    }
    let rename_term = |t: &Term| t.substitute(&|g| Term::Gen(rename[&g]));
    let new_id = if n == 1 {
        q.add_cell0()
    } else {
        let sx = p.underlying.attachment(x, Sign::Neg)?.clone();
        let ns = rename_term(&p.underlying.boundary_term(&sx, n - 2, Sign::Neg)?);
        let nt = rename_term(&p.underlying.boundary_term(&sx, n - 2, Sign::Pos)?);
        q.add_cell(n - 1, ns, nt)
    };
    let ev = Ev::new(&p.underlying);
    let v = ev.eval(&p.universal)?;
    let universal = match &v {
        Value::V1(_) => Term::Gen(new_id),
        Value::V2(p2) => {
            if p2.word.len() != 1 {
                return Err(Error::HypothesisFailed(
                    "the universal arrow uses the top cell more than once".into(),
                ));
            }
            let o = p2.word[0].offset;
            let (win, _) = widths2(&ev, p2.word[0].cell)?;
            let mut parts: Vec<Term> =
                p2.src.edges[..o].iter().map(|&e| Term::Gen(rename[&e])).collect();
            parts.push(Term::Gen(new_id));
            parts.extend(p2.src.edges[o + win..].iter().map(|&e| Term::Gen(rename[&e])));
            Term::comp_all(parts, 0)
        }
        Value::V3(p3) => {
            if p3.boxes.len() != 1 {
                return Err(Error::HypothesisFailed(
                    "the universal arrow uses the top cell more than once".into(),
                ));
            }
            let m = Mach::load3(&ev, p3)?;
            let step = Unroll::ambient_mode(&m).box_step(0)?;
            step.substitute(&|g| {
                if g == x {
                    Term::Gen(new_id)
                } else {
                    Term::Gen(rename[&g])
                }
            })
        }
        Value::V0(_) => {
            return Err(Error::HypothesisFailed("the universal arrow is not top-dimensional".into()))
        }
    };
    let ctx2 = LinCtx::new(&q);
    if ctx2.sigma_image(&universal, n - 1)? != ctx2.sigma() {
        return Err(Error::MethodDisagreement(
            "collapse produced a shape failing the alternating-sum test".into(),
        ));
    }
    Polyplex::assemble(q, universal)
}

/// The kinds of shapes the enumerator can emit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnumKind {
    Plex,
    Polyplex,
    SphericalPolyplex,
}

/// Enumerates, once each, the polyplexes of dimension at most `dim` with
/// at most `max_cells` cells, in a deterministic order. Shapes are built
/// by running the inductive construction forward: paths, then layered
/// 2-states, then box rewrites; duplicates collapse because
/// classification interns every candidate canonically.
pub fn enumerate(dim: usize, max_cells: usize, kind: EnumKind) -> Result<Vec<Polyplex>> {
    if dim > 3 {
        return Err(Error::DimensionLimit(dim));
    }
    if max_cells > ENUM_MAX_CELLS {
        return Err(Error::BoundExceeded(format!(
            "enumeration is capped at {ENUM_MAX_CELLS} cells, requested {max_cells}"
        )));
    }
    let mut found: BTreeMap<String, Polyplex> = BTreeMap::new();
    let add = |found: &mut BTreeMap<String, Polyplex>, g: &Polygraph, u: &Term| -> Result<()> {
        let ca = classify(g, u)?;
        let key = format!("{:?}|{:?}", ca.polyplex.underlying.cells(), ca.polyplex.universal);
        found.entry(key).or_insert(ca.polyplex);
        Ok(())
    };
    if max_cells >= 1 {
        let mut g = Polygraph::new(ClassTag::Positive);
        g.add_cell0();
        add(&mut found, &g, &Term::Gen(0))?;
    }
    if dim >= 1 {
        let mut len = 1;
        while 2 * len + 1 <= max_cells {
            let mut g = Polygraph::new(ClassTag::Positive);
            let vs: Vec<CellId> = (0..=len).map(|_| g.add_cell0()).collect();
            let es: Vec<Term> = (0..len)
                .map(|i| Term::Gen(g.add_cell(1, Term::Gen(vs[i]), Term::Gen(vs[i + 1]))))
                .collect();
            add(&mut found, &g, &Term::comp_all(es, 0))?;
            len += 1;
        }
    }
    if dim >= 2 {
        for (l, word) in traces2(max_cells) {
            let (g, u, _) = build2_candidate(l, &word);
            add(&mut found, &g, &u)?;
        }
    }
    if dim >= 3 {
        for (l, word) in traces2(max_cells.saturating_sub(2)) {
            let (g, _, st) = build2_candidate(l, &word);
            dfs3(&g, &st, &[], max_cells, &mut |g2, u| add(&mut found, g2, u))?;
        }
    }
    let mut items: Vec<(String, Polyplex)> = Vec::new();
    for (key, p) in found {
        let keep = match kind {
            EnumKind::Polyplex => true,
            EnumKind::Plex => p.is_plex(),
            EnumKind::SphericalPolyplex => has_spherical_boundary(&p)?,
        };
        if keep {
            items.push((key, p));
        }
    }
    items.sort_by(|(ka, a), (kb, b)| {
        (a.dim(), a.cell_count()).cmp(&(b.dim(), b.cell_count())).then_with(|| ka.cmp(kb))
    });
    Ok(items.into_iter().map(|(_, p)| p).collect())
}

/// All layered 2-state traces that fit the cell budget: a source path
/// length and a word of (offset, consumed, produced) layers.
fn traces2(max_cells: usize) -> Vec<(usize, Vec<(usize, usize, usize)>)> {
    let mut out = Vec::new();
    let mut l = 1;
    while 2 * l + 3 <= max_cells {
        let mut stack: Vec<(usize, usize, Vec<(usize, usize, usize)>)> =
            vec![(l, 2 * l + 1, Vec::new())];
        while let Some((width, cells, word)) = stack.pop() {
            if !word.is_empty() {
                out.push((l, word.clone()));
            }
            for s in 1..=width {
                for o in 0..=width - s {
                    let mut t = 1;
                    while cells + 2 * t <= max_cells {
                        let mut w2 = word.clone();
                        w2.push((o, s, t));
                        stack.push((width - s + t, cells + 2 * t, w2));
                        t += 1;
                    }
                }
            }
        }
        l += 1;
    }
    out
}

/// Materializes a 2-state trace as a polygraph in which every instance is
/// its own cell, together with the universal term and the state value.
fn build2_candidate(l: usize, word: &[(usize, usize, usize)]) -> (Polygraph, Term, Past2) {
    let mut g = Polygraph::new(ClassTag::Positive);
    let vs: Vec<CellId> = (0..=l).map(|_| g.add_cell0()).collect();
    let mut ends: BTreeMap<CellId, (CellId, CellId)> = BTreeMap::new();
    let mut frontier: Vec<CellId> = Vec::new();
    for i in 0..l {
        let e = g.add_cell(1, Term::Gen(vs[i]), Term::Gen(vs[i + 1]));
        ends.insert(e, (vs[i], vs[i + 1]));
        frontier.push(e);
    }
    let src_path = Path { start: vs[0], edges: frontier.clone() };
    let mut layer_terms = Vec::new();
    let mut layers = Vec::new();
    for &(o, s, t) in word {
        let consumed: Vec<CellId> = frontier[o..o + s].to_vec();
        let va = ends[&consumed[0]].0;
        let vb = ends[consumed.last().unwrap()].1;
        let mut outs = Vec::new();
        let mut prev = va;
        for q in 0..t {
            let nxt = if q + 1 == t { vb } else { g.add_cell0() };
            let e = g.add_cell(1, Term::Gen(prev), Term::Gen(nxt));
            ends.insert(e, (prev, nxt));
            outs.push(e);
            prev = nxt;
        }
        let node = g.add_cell(
            2,
            Term::comp_all(consumed.iter().map(|&e| Term::Gen(e)).collect(), 0),
            Term::comp_all(outs.iter().map(|&e| Term::Gen(e)).collect(), 0),
        );
        let mut parts: Vec<Term> = frontier[..o].iter().map(|&e| Term::Gen(e)).collect();
        parts.push(Term::Gen(node));
        parts.extend(frontier[o + s..].iter().map(|&e| Term::Gen(e)));
        layer_terms.push(Term::comp_all(parts, 0));
        layers.push(Layer2 { cell: node, offset: o });
        frontier.splice(o..o + s, outs);
    }
    (g, Term::comp_all(layer_terms, 1), Past2 { src: src_path, word: layers })
}

/// Depth-first extension of a 3-dimensional candidate by one box at a
/// time, emitting every state that has at least one box.
fn dfs3(
    g: &Polygraph,
    src: &Past2,
    boxes: &[Box3],
    max_cells: usize,
    emit: &mut dyn FnMut(&Polygraph, &Term) -> Result<()>,
) -> Result<()> {
    let ev = Ev::new(g);
    let m = if boxes.is_empty() {
        Mach::load2(&ev, src)?
    } else {
        Mach::load3(&ev, &Past3 { src: src.clone(), boxes: boxes.to_vec() })?
    };
    if !boxes.is_empty() {
        let u = Unroll::ambient_mode(&m).term3()?;
        emit(g, &u)?;
    }
    if g.cells().len() + 2 > max_cells {
        return Ok(());
    }
    let nodes: Vec<usize> = m.active.iter().copied().collect();
    let (word_now, _) = m.subset_word(&m.active, &m.state_src)?;
    for mask in 1..(1u32 << nodes.len()) {
        let region: BTreeSet<usize> = nodes
            .iter()
            .enumerate()
            .filter(|&(i, _)| mask & (1 << i) != 0)
            .map(|(_, &n)| n)
            .collect();
        let Some((win_in, win_out, occurrence)) = probe_region(&m, &region)? else { continue };
        let budget = max_cells - g.cells().len();
        for rword in replacement_traces(win_in.len(), win_out.len(), budget) {
            let Some((g2, _)) = extend3(g, &m, &win_in, &win_out, &occurrence, &rword)? else {
                continue;
            };
            if g2.cells().len() > max_cells {
                continue;
            }
            let cell3 = (g2.cells().len() - 1) as CellId;
            let mut ranks: Vec<usize> = region
                .iter()
                .map(|&n| word_now.iter().position(|&(q, _)| q == n).expect("region is active"))
                .collect();
            ranks.sort_unstable();
            let mut boxes2 = boxes.to_vec();
            boxes2.push(Box3 { node_ranks: ranks, cell: cell3 });
            dfs3(&g2, src, &boxes2, max_cells, emit)?;
        }
    }
    Ok(())
}

/// The validation half of a box firing, without mutation: the window of
/// the region and its labeled occurrence, or nothing if the region is
/// not a fireable occurrence.
fn probe_region(
    m: &Mach,
    region: &BTreeSet<usize>,
) -> Result<Option<(Vec<usize>, Vec<usize>, Past2)>> {
    if region.is_empty() || !region.is_subset(&m.active) {
        return Ok(None);
    }
    let anc_all = m.reach(region, true);
    let desc = m.reach(region, false);
    if !anc_all.is_disjoint(&desc) {
        return Ok(None);
    }
    let anc: BTreeSet<usize> = anc_all.difference(region).copied().collect();
    let Ok((_, mid)) = m.subset_word(&anc, &m.state_src) else { return Ok(None) };
    let produced_in: BTreeSet<usize> =
        region.iter().flat_map(|&n| m.n_out[n].iter().copied()).collect();
    let consumed: BTreeSet<usize> =
        region.iter().flat_map(|&n| m.n_in[n].iter().copied()).collect();
    let outer: Vec<usize> = mid
        .iter()
        .enumerate()
        .filter(|&(_, w)| consumed.contains(w) && !produced_in.contains(w))
        .map(|(i, _)| i)
        .collect();
    if outer.is_empty() {
        return Ok(None);
    }
    let ws = outer[0];
    let we = *outer.last().unwrap() + 1;
    let window_in: Vec<usize> = mid[ws..we].to_vec();
    let win_set: BTreeSet<usize> = window_in.iter().copied().collect();
    for &n in region {
        for &w in &m.n_in[n] {
            if !win_set.contains(&w) && !produced_in.contains(&w) {
                return Ok(None);
            }
        }
    }
    let Ok((_, window_out)) = m.subset_word(region, &window_in) else { return Ok(None) };
    if window_out.iter().any(|w| win_set.contains(w)) {
        return Ok(None);
    }
    let Ok(occurrence) = m.state2_labels(region, &window_in) else { return Ok(None) };
    Ok(Some((window_in, window_out, occurrence)))
}

/// All replacement traces over a window: layered words that consume every
/// input position and end with the given frontier length, within the cell
/// budget. The budget covers the fresh 2-cells, interior wires and
/// vertices, and the box cell itself.
fn replacement_traces(
    width: usize,
    final_len: usize,
    budget: usize,
) -> Vec<Vec<(usize, usize, usize)>> {
    #[derive(Clone)]
    enum Tok {
        Src,
        Out,
    }
    let mut out = Vec::new();
    let mut stack: Vec<(Vec<Tok>, usize, Vec<(usize, usize, usize)>)> =
        vec![(vec![Tok::Src; width], 0, Vec::new())];
    while let Some((frontier, prod, word)) = stack.pop() {
        let m = word.len();
        if m > 0 && frontier.len() == final_len && frontier.iter().all(|t| matches!(t, Tok::Out)) {
            let interior_wires = prod - final_len;
            let interior_verts = (prod - m).saturating_sub(final_len - 1);
            if 1 + m + interior_wires + interior_verts <= budget {
                out.push(word.clone());
            }
        }
        if m + 2 > budget {
            continue;
        }
        for s in 1..=frontier.len() {
            for o in 0..=frontier.len() - s {
                for t in 1..=budget {
                    let rough = 1 + (m + 1) + (prod + t).saturating_sub(final_len);
                    if rough > budget {
                        break;
                    }
                    let mut f2 = frontier.clone();
                    f2.splice(o..o + s, std::iter::repeat(Tok::Out).take(t));
                    let mut w2 = word.clone();
                    w2.push((o, s, t));
                    stack.push((f2, prod + t, w2));
                }
            }
        }
    }
    out
}

/// Adjoins one box to a candidate: fresh replacement cells pinned onto
/// the occurrence's final path, and the 3-cell rewriting the occurrence
/// into the replacement. Returns nothing when the trace does not line up
/// with the pinned boundary.
fn extend3(
    g: &Polygraph,
    m: &Mach,
    win_in: &[usize],
    win_out: &[usize],
    occurrence: &Past2,
    rword: &[(usize, usize, usize)],
) -> Result<Option<(Polygraph, CellId)>> {
    // First pass: which layer outputs survive to the final frontier.
    #[derive(Clone, Copy, PartialEq)]
    enum Tok {
        Src(usize),
        Out(usize, usize),
    }
    let mut toks: Vec<Tok> = (0..win_in.len()).map(Tok::Src).collect();
    for (j, &(o, s, t)) in rword.iter().enumerate() {
        if o + s > toks.len() {
            return Ok(None);
        }
        toks.splice(o..o + s, (0..t).map(|q| Tok::Out(j, q)));
    }
    if toks.len() != win_out.len() || toks.iter().any(|t| matches!(t, Tok::Src(_))) {
        return Ok(None);
    }
    let mut pinned: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for (p, t) in toks.iter().enumerate() {
        if let Tok::Out(j, q) = t {
            pinned.insert((*j, *q), p);
        }
    }
    // Second pass: build the replacement cells over the window labels.
    let mut g2 = g.clone();
    let wcell = |w: usize| m.wl[w];
    let wends = |w: usize| (m.vl[m.wv[w].0], m.vl[m.wv[w].1]);
    let mut frontier: Vec<(CellId, CellId, CellId)> =
        win_in.iter().map(|&w| (wcell(w), wends(w).0, wends(w).1)).collect();
    let mut layer_terms = Vec::new();
    for (j, &(o, s, t)) in rword.iter().enumerate() {
        let consumed: Vec<(CellId, CellId, CellId)> = frontier[o..o + s].to_vec();
        let va = consumed[0].1;
        let vb = consumed.last().unwrap().2;
        let mut vseq: Vec<Option<CellId>> = vec![None; t + 1];
        vseq[0] = Some(va);
        vseq[t] = Some(vb);
        for q in 0..t {
            if let Some(&p) = pinned.get(&(j, q)) {
                let (a, b) = wends(win_out[p]);
                for (idx, want) in [(q, a), (q + 1, b)] {
                    match vseq[idx] {
                        None => vseq[idx] = Some(want),
                        Some(have) if have == want => {}
                        Some(_) => return Ok(None),
                    }
                }
            }
        }
        let vseq: Vec<CellId> =
            vseq.into_iter().map(|v| v.unwrap_or_else(|| g2.add_cell0())).collect();
        let mut outs = Vec::with_capacity(t);
        for q in 0..t {
            let cellid = match pinned.get(&(j, q)) {
                Some(&p) => {
                    let c = wcell(win_out[p]);
                    let (a, b) = wends(win_out[p]);
                    if a != vseq[q] || b != vseq[q + 1] {
                        return Ok(None);
                    }
                    c
                }
                None => g2.add_cell(1, Term::Gen(vseq[q]), Term::Gen(vseq[q + 1])),
            };
            outs.push((cellid, vseq[q], vseq[q + 1]));
        }
        let node = g2.add_cell(
            2,
            Term::comp_all(consumed.iter().map(|&(e, _, _)| Term::Gen(e)).collect(), 0),
            Term::comp_all(outs.iter().map(|&(e, _, _)| Term::Gen(e)).collect(), 0),
        );
        let mut parts: Vec<Term> = frontier[..o].iter().map(|&(e, _, _)| Term::Gen(e)).collect();
        parts.push(Term::Gen(node));
        parts.extend(frontier[o + s..].iter().map(|&(e, _, _)| Term::Gen(e)));
        layer_terms.push(Term::comp_all(parts, 0));
        frontier.splice(o..o + s, outs);
    }
    let final_cells: Vec<CellId> = frontier.iter().map(|&(e, _, _)| e).collect();
    let want: Vec<CellId> = win_out.iter().map(|&w| wcell(w)).collect();
    if final_cells != want {
        return Ok(None);
    }
    let src_term = value_to_term(&g2, &Value::V2(occurrence.clone()))?;
    let tgt_term = Term::comp_all(layer_terms, 1);
    let cell3 = g2.add_cell(3, src_term, tgt_term);
    Ok(Some((g2, cell3)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d2() -> Polygraph {
        let mut g = Polygraph::new(ClassTag::Positive);
        let a = g.add_cell0();
        let b = g.add_cell0();
        let f = g.add_cell(1, Term::Gen(a), Term::Gen(b));
        let gg = g.add_cell(1, Term::Gen(a), Term::Gen(b));
        g.add_cell(2, Term::Gen(f), Term::Gen(gg));
        g
    }

    fn d3() -> (Polygraph, CellId) {
        let mut g = d2();
        let f = 2;
        let gg = 3;
        let beta = g.add_cell(2, Term::Gen(f), Term::Gen(gg));
        let omega = g.add_cell(3, Term::Gen(4), Term::Gen(beta));
        (g, omega)
    }

    fn x_shape() -> (Polygraph, CellId, CellId) {
        let mut g = Polygraph::new(ClassTag::Positive);
        let x = g.add_cell0();
        let y = g.add_cell0();
        let z = g.add_cell0();
        let f = g.add_cell(1, Term::Gen(x), Term::Gen(y));
        let g1 = g.add_cell(1, Term::Gen(x), Term::Gen(y));
        let h = g.add_cell(1, Term::Gen(y), Term::Gen(z));
        let k = g.add_cell(1, Term::Gen(y), Term::Gen(z));
        let al = g.add_cell(2, Term::Gen(f), Term::Gen(g1));
        let be = g.add_cell(2, Term::Gen(h), Term::Gen(k));
        (g, al, be)
    }

    fn stacked() -> (Polygraph, CellId, CellId) {
        let mut g = Polygraph::new(ClassTag::Positive);
        let a = g.add_cell0();
        let b = g.add_cell0();
        let f = g.add_cell(1, Term::Gen(a), Term::Gen(b));
        let g1 = g.add_cell(1, Term::Gen(a), Term::Gen(b));
        let h = g.add_cell(1, Term::Gen(a), Term::Gen(b));
        let al = g.add_cell(2, Term::Gen(f), Term::Gen(g1));
        let be = g.add_cell(2, Term::Gen(g1), Term::Gen(h));
        (g, al, be)
    }

    #[test]
    fn globe_classifies_to_a_plex() {
        let g = d2();
        let ca = classify(&g, &Term::Gen(4)).unwrap();
        assert_eq!(ca.polyplex.cell_count(), 5);
        assert_eq!(ca.polyplex.dim(), 2);
        assert!(ca.polyplex.is_plex());
        assert!(has_spherical_boundary(&ca.polyplex).unwrap());
        assert!(is_regular_polyplex(&ca.polyplex).unwrap());
        ca.label.validate().unwrap();
        assert!(ca.label.is_polygraphic_mono());
    }

    #[test]
    fn three_cell_plex_shares_its_whole_one_boundary() {
        let (g, omega) = d3();
        let ca = plex_of_cell(&g, omega).unwrap();
        assert_eq!(ca.polyplex.cell_count(), 7);
        assert!(ca.polyplex.is_plex());
        assert!(has_spherical_boundary(&ca.polyplex).unwrap());
        assert!(is_regular(&g).unwrap());
        let (bneg, _) = ca.polyplex.boundary(2, Sign::Neg).unwrap();
        let (bpos, _) = ca.polyplex.boundary(2, Sign::Pos).unwrap();
        assert_eq!(bneg.cell_count(), 5);
        assert_eq!(bpos.cell_count(), 5);
    }

    #[test]
    fn horizontal_composite_is_a_polyplex_but_not_spherical() {
        let (g, al, be) = x_shape();
        let t = Term::comp(Term::Gen(al), Term::Gen(be), 0);
        let ca = classify(&g, &t).unwrap();
        assert_eq!(ca.polyplex.cell_count(), 9);
        assert!(!ca.polyplex.is_plex());
        assert!(!has_spherical_boundary(&ca.polyplex).unwrap());
        assert!(!is_regular_polyplex(&ca.polyplex).unwrap());
        assert!(is_regular(&g).unwrap());
        assert!(is_polyplex(&g, &t).unwrap());
        let rt = value_to_term(&g, &Ev::new(&g).eval(&t).unwrap()).unwrap();
        assert!(crate::value::arrows_equal(&g, &t, &rt).unwrap());
    }

    #[test]
    fn vertical_composite_is_spherical() {
        let (g, al, be) = stacked();
        let t = Term::comp(Term::Gen(al), Term::Gen(be), 1);
        let ca = classify(&g, &t).unwrap();
        assert_eq!(ca.polyplex.cell_count(), 7);
        assert!(has_spherical_boundary(&ca.polyplex).unwrap());
        assert!(is_regular_polyplex(&ca.polyplex).unwrap());
    }

    #[test]
    fn inner_owner_distinguishes_source_from_target_interiors() {
        let (g, al, be) = stacked();
        let t = Term::comp(Term::Gen(al), Term::Gen(be), 1);
        let ca = classify(&g, &t).unwrap();
        let shape = &ca.polyplex.underlying;
        let src_wire = shape.cells_of_dim(1)[0];
        assert_eq!(inner_owner(&ca.polyplex, src_wire).unwrap(), InnerOwner::Source);
        let mid_wire = shape.cells_of_dim(1)[1];
        let first_node = shape.cells_of_dim(2)[0];
        assert_eq!(
            inner_owner(&ca.polyplex, mid_wire).unwrap(),
            InnerOwner::InnerOfTarget(first_node)
        );
        assert_eq!(inner_owner(&ca.polyplex, 0).unwrap(), InnerOwner::Source);
    }

    #[test]
    fn collapse_of_a_whiskered_cell_is_a_three_chain() {
        let mut g = Polygraph::new(ClassTag::Positive);
        let v0 = g.add_cell0();
        let v1 = g.add_cell0();
        let v2 = g.add_cell0();
        let v3 = g.add_cell0();
        let l = g.add_cell(1, Term::Gen(v0), Term::Gen(v1));
        let f = g.add_cell(1, Term::Gen(v1), Term::Gen(v2));
        let ff = g.add_cell(1, Term::Gen(v1), Term::Gen(v2));
        let r = g.add_cell(1, Term::Gen(v2), Term::Gen(v3));
        let al = g.add_cell(2, Term::Gen(f), Term::Gen(ff));
        let t = Term::comp_all(vec![Term::Gen(l), Term::Gen(al), Term::Gen(r)], 0);
        let ca = classify(&g, &t).unwrap();
        assert_eq!(ca.polyplex.cell_count(), 9);
        let q = collapse_single_top(&ca.polyplex).unwrap();
        assert_eq!(q.dim(), 1);
        assert_eq!(q.cell_count(), 7);
        assert_eq!(q.underlying.cells_of_dim(1).len(), 3);
    }

    #[test]
    fn collapse_of_a_globe_drops_one_dimension() {
        let g = d2();
        let ca = plex_of_cell(&g, 4).unwrap();
        let q = collapse_single_top(&ca.polyplex).unwrap();
        assert_eq!(q.dim(), 1);
        assert_eq!(q.cell_count(), 3);
        let (g3, omega) = d3();
        let ca3 = plex_of_cell(&g3, omega).unwrap();
        let q2 = collapse_single_top(&ca3.polyplex).unwrap();
        assert_eq!(q2.dim(), 2);
        assert_eq!(q2.cell_count(), 5);
    }

    #[test]
    fn collapse_rejects_two_top_cells() {
        let (g, al, be) = stacked();
        let t = Term::comp(Term::Gen(al), Term::Gen(be), 1);
        let ca = classify(&g, &t).unwrap();
        assert!(matches!(collapse_single_top(&ca.polyplex), Err(Error::HypothesisFailed(_))));
    }

    #[test]
    fn syntactic_lift_splits_a_chain_through_a_collapse() {
        let mut x = Polygraph::new(ClassTag::Positive);
        let xv: Vec<CellId> = (0..4).map(|_| x.add_cell0()).collect();
        let a = x.add_cell(1, Term::Gen(xv[0]), Term::Gen(xv[1]));
        let b = x.add_cell(1, Term::Gen(xv[1]), Term::Gen(xv[2]));
        let c = x.add_cell(1, Term::Gen(xv[2]), Term::Gen(xv[3]));
        let mut y = Polygraph::new(ClassTag::Positive);
        let yv: Vec<CellId> = (0..3).map(|_| y.add_cell0()).collect();
        let p = y.add_cell(1, Term::Gen(yv[0]), Term::Gen(yv[1]));
        let q = y.add_cell(1, Term::Gen(yv[1]), Term::Gen(yv[2]));
        let f = Morphism {
            dom: x.clone(),
            cod: y.clone(),
            image: vec![
                Term::Gen(yv[0]),
                Term::Gen(yv[1]),
                Term::Gen(yv[2]),
                Term::Gen(yv[2]),
                Term::Gen(p),
                Term::Gen(q),
                Term::Gen(yv[2]),
            ],
        };
        f.validate().unwrap();
        let v = Term::comp_all(vec![Term::Gen(a), Term::Gen(b), Term::Gen(c)], 0);
        let (u1, w1) = syntactic_lift(&f, &v, &Term::Gen(p), &Term::Gen(q), 0).unwrap();
        assert!(crate::value::arrows_equal(&x, &u1, &Term::Gen(a)).unwrap());
        let bc = Term::comp(Term::Gen(b), Term::Gen(c), 0);
        assert!(crate::value::arrows_equal(&x, &w1, &bc).unwrap());
        let bad = syntactic_lift(&f, &v, &Term::Gen(q), &Term::Gen(p), 0);
        assert!(matches!(bad, Err(Error::DecompositionMismatch(_))));
    }

    #[test]
    fn generic_factorization_of_a_polygraphic_morphism_is_trivial() {
        let (g, _, _) = x_shape();
        let f = Morphism::identity(&g);
        let (gen, pol) = generic_factorization(&f).unwrap();
        assert!(pol.is_polygraphic());
        assert!(is_isomorphism(&pol).unwrap());
        assert_eq!(gen.cod.cells().len(), g.cells().len());
        for c in g.cells() {
            let composite = pol.apply(&gen.image[c.id as usize]);
            assert!(crate::value::arrows_equal(&g, &composite, &Term::Gen(c.id)).unwrap());
        }
        assert!(is_generic(&f).unwrap());
    }

    #[test]
    fn generic_factorization_builds_the_shape_of_the_image() {
        let (xs, al, be) = x_shape();
        let mut d = Polygraph::new(ClassTag::Positive);
        let a = d.add_cell0();
        let b = d.add_cell0();
        let f1 = d.add_cell(1, Term::Gen(a), Term::Gen(b));
        let g1 = d.add_cell(1, Term::Gen(a), Term::Gen(b));
        let top = d.add_cell(2, Term::Gen(f1), Term::Gen(g1));
        let comp = Term::comp(Term::Gen(al), Term::Gen(be), 0);
        let ev = Ev::new(&xs);
        let fmor = Morphism {
            dom: d.clone(),
            cod: xs.clone(),
            image: vec![
                Term::Gen(0),
                Term::Gen(2),
                value_to_term(&xs, &ev.boundary(&ev.eval(&comp).unwrap(), 1, Sign::Neg).unwrap())
                    .unwrap(),
                value_to_term(&xs, &ev.boundary(&ev.eval(&comp).unwrap(), 1, Sign::Pos).unwrap())
                    .unwrap(),
                comp.clone(),
            ],
        };
        fmor.validate().unwrap();
        let (gen, pol) = generic_factorization(&fmor).unwrap();
        assert_eq!(gen.cod.cells().len(), 9);
        assert!(pol.is_polygraphic());
        assert!(is_generic(&fmor).unwrap());
        for c in d.cells() {
            let composite = pol.apply(&gen.image[c.id as usize]);
            assert!(crate::value::arrows_equal(&xs, &composite, &fmor.image[c.id as usize])
                .unwrap());
        }
        let _ = top;
    }

    #[test]
    fn folding_two_points_is_not_generic() {
        let mut x = Polygraph::new(ClassTag::Positive);
        x.add_cell0();
        x.add_cell0();
        let mut y = Polygraph::new(ClassTag::Positive);
        y.add_cell0();
        let f = Morphism { dom: x, cod: y, image: vec![Term::Gen(0), Term::Gen(0)] };
        f.validate().unwrap();
        assert!(!is_generic(&f).unwrap());
        let (_, pol) = generic_factorization(&f).unwrap();
        assert_eq!(pol.dom.cells().len(), 2);
        assert!(!is_isomorphism(&pol).unwrap());
    }

    #[test]
    fn sending_an_edge_to_an_identity_is_generic() {
        let mut x = Polygraph::new(ClassTag::Positive);
        let a = x.add_cell0();
        let b = x.add_cell0();
        x.add_cell(1, Term::Gen(a), Term::Gen(b));
        let mut y = Polygraph::new(ClassTag::Positive);
        y.add_cell0();
        let f = Morphism {
            dom: x,
            cod: y,
            image: vec![Term::Gen(0), Term::Gen(0), Term::Gen(0)],
        };
        f.validate().unwrap();
        let (gen, pol) = generic_factorization(&f).unwrap();
        assert_eq!(pol.dom.cells().len(), 1);
        assert!(is_isomorphism(&pol).unwrap());
        assert!(is_generic(&f).unwrap());
        gen.validate().unwrap();
        pol.validate().unwrap();
    }

    #[test]
    fn shapes_drop_vertex_instances_orphaned_by_unification() {
        let mut g = Polygraph::new(ClassTag::Positive);
        let v0 = g.add_cell0();
        let v1 = g.add_cell0();
        let v2 = g.add_cell0();
        let e4 = g.add_cell(1, Term::gen(v0), Term::gen(v1));
        let e5 = g.add_cell(1, Term::gen(v0), Term::gen(v2));
        let e6 = g.add_cell(1, Term::gen(v2), Term::gen(v1));
        let e7 = g.add_cell(1, Term::gen(v0), Term::gen(v2));
        let c8 = g.add_cell(2, Term::gen(e4), Term::comp(Term::gen(e5), Term::gen(e6), 0));
        let c9 = g.add_cell(2, Term::gen(e4), Term::comp(Term::gen(e7), Term::gen(e6), 0));
        let c10 = g.add_cell(2, Term::gen(e7), Term::gen(e5));
        let top = g.add_cell(
            3,
            Term::gen(c8),
            Term::comp(Term::gen(c9), Term::comp(Term::gen(c10), Term::gen(e6), 0), 1),
        );
        assert!(g.validate().is_empty());

        let ca = classify(&g, &Term::gen(top)).unwrap();
        assert_eq!(ca.polyplex.cell_count(), g.cells().len());
        ca.label.validate().unwrap();
        let ctx = LinCtx::new(&ca.polyplex.underlying);
        assert_eq!(
            ctx.sigma_image(&ca.polyplex.universal, ca.polyplex.dim()).unwrap(),
            ctx.sigma()
        );
    }

    #[test]
    fn enumerate_points_and_chains() {
        let zero = enumerate(0, 12, EnumKind::Polyplex).unwrap();
        assert_eq!(zero.len(), 1);
        assert_eq!(zero[0].cell_count(), 1);
        let one = enumerate(1, 5, EnumKind::Polyplex).unwrap();
        let counts: Vec<usize> = one.iter().map(|p| p.cell_count()).collect();
        assert_eq!(counts, vec![1, 3, 5]);
    }

    #[test]
    fn enumerate_small_plexes() {
        let items = enumerate(2, 7, EnumKind::Plex).unwrap();
        for p in &items {
            assert!(p.is_plex());
        }
        let counts: Vec<(usize, usize)> = items.iter().map(|p| (p.dim(), p.cell_count())).collect();
        assert_eq!(counts, vec![(0, 1), (1, 3), (2, 5), (2, 7), (2, 7)]);
    }

    #[test]
    fn enumerated_polyplexes_pass_the_alternating_sum_test() {
        let items = enumerate(2, 9, EnumKind::Polyplex).unwrap();
        assert!(items.len() > 5);
        for p in &items {
            assert!(is_polyplex(&p.underlying, &p.universal).unwrap());
        }
        let spheres = enumerate(2, 9, EnumKind::SphericalPolyplex).unwrap();
        assert!(spheres.len() < items.len());
        for p in &spheres {
            assert!(has_spherical_boundary(p).unwrap());
        }
    }

    #[test]
    fn enumerate_finds_the_three_globe() {
        let items = enumerate(3, 7, EnumKind::Plex).unwrap();
        let d3s: Vec<_> = items.iter().filter(|p| p.dim() == 3).collect();
        assert_eq!(d3s.len(), 1);
        assert_eq!(d3s[0].cell_count(), 7);
        assert!(has_spherical_boundary(d3s[0]).unwrap());
    }

    #[test]
    fn enumeration_bounds_are_enforced() {
        assert!(matches!(enumerate(4, 5, EnumKind::Polyplex), Err(Error::DimensionLimit(4))));
        assert!(matches!(
            enumerate(2, ENUM_MAX_CELLS + 1, EnumKind::Polyplex),
            Err(Error::BoundExceeded(_))
        ));
    }

    #[test]
    fn four_cell_plexes_glue_from_their_boundaries() {
        let (cone, inv) = crate::steiner::cone_polygraph(&crate::steiner::globe(3)).unwrap();
        assert_eq!(cone.cells().len(), 15);
        assert!(is_regular(&cone).unwrap());
        let top = cone.cells().iter().find(|c| c.dim == 4).unwrap();
        let ca = plex_of_cell(&cone, top.id).unwrap();
        assert_eq!(ca.polyplex.cell_count(), 15);
        assert!(is_regular_polyplex(&ca.polyplex).unwrap());
        assert!(is_polyplex(&cone, &Term::Gen(top.id)).unwrap());
        assert!(has_spherical_boundary(&ca.polyplex).unwrap());
        assert_eq!(inv.len(), 15);
    }

    #[test]
    fn tensor_of_two_squares_is_regular_in_dimension_four() {
        let g2 = crate::steiner::globe(2);
        let (p, _) = crate::steiner::tensor_polygraph(&g2, &g2).unwrap();
        assert_eq!(p.cells().len(), 25);
        assert!(is_regular(&p).unwrap());
        let top = p.cells().iter().find(|c| c.dim == 4).unwrap();
        let ca = plex_of_cell(&p, top.id).unwrap();
        assert!(has_spherical_boundary(&ca.polyplex).unwrap());
    }
}
