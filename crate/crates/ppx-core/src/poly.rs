//! Cells, composition terms, polygraphs, sub-polygraphs and morphisms.
//!
//! A [`Polygraph`] is a finite list of generating cells. A 0-cell has no
//! boundary; an `n`-cell for `n >= 1` carries a source and a target
//! [`Term`] denoting `(n-1)`-arrows of the free category on the lower
//! cells. Terms are syntax: two terms can denote the same arrow. Decidable
//! arrow equality lives in [`crate::value`]; this module only provides the
//! syntactic layer, the globularity-normalizing boundary operator on terms,
//! and the polygraph-level operations (validation, morphisms, pushouts,
//! sub-polygraph closure).

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Interned id of a generating cell. Ids are indices into the cell list of
/// the owning polygraph, in creation order.
pub type CellId = u32;

/// Orientation of a boundary: `Neg` selects sources, `Pos` targets.
/// Serialized as `"-"` and `"+"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "-")]
    Neg,
    #[serde(rename = "+")]
    Pos,
}

impl Sign {
    /// The opposite orientation.
    pub fn flip(self) -> Sign {
        match self {
            Sign::Neg => Sign::Pos,
            Sign::Pos => Sign::Neg,
        }
    }

    /// `+1` for `Pos`, `-1` for `Neg`; handy in alternating sums.
    pub fn unit(self) -> i64 {
        match self {
            Sign::Neg => -1,
            Sign::Pos => 1,
        }
    }
}

/// A composition term over a polygraph.
///
/// `Comp(x, y, k)` denotes `x` composed with `y` along dimension `k`, read
/// left to right: the `k`-target of `x` is the `k`-source of `y`. `Bnd`
/// takes a `k`-boundary and also serves as the identity coercion: an arrow
/// of dimension `m` is viewed in any higher dimension implicitly, so there
/// is no identity constructor.
///
/// Serialized forms: `{"gen": 3}`, `{"comp": [l, r, k]}`,
/// `{"bnd": [t, k, "+"]}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Term {
    Gen(CellId),
    Comp(Box<Term>, Box<Term>, usize),
    Bnd(Box<Term>, usize, Sign),
}

impl Term {
    pub fn gen(c: CellId) -> Term {
        Term::Gen(c)
    }

    pub fn comp(l: Term, r: Term, k: usize) -> Term {
        Term::Comp(Box::new(l), Box::new(r), k)
    }

    pub fn bnd(t: Term, k: usize, s: Sign) -> Term {
        Term::Bnd(Box::new(t), k, s)
    }

    /// Left-associated composite of a non-empty sequence along level `k`.
    pub fn comp_all(mut parts: Vec<Term>, k: usize) -> Term {
        assert!(!parts.is_empty(), "comp_all needs at least one factor");
        let mut acc = parts.remove(0);
        for p in parts {
            acc = Term::comp(acc, p, k);
        }
        acc
    }

    /// All generator ids occurring syntactically in the term.
    pub fn gens(&self) -> BTreeSet<CellId> {
        let mut out = BTreeSet::new();
        self.collect_gens(&mut out);
        out
    }

    fn collect_gens(&self, out: &mut BTreeSet<CellId>) {
        match self {
            Term::Gen(c) => {
                out.insert(*c);
            }
            Term::Comp(l, r, _) => {
                l.collect_gens(out);
                r.collect_gens(out);
            }
            Term::Bnd(t, _, _) => t.collect_gens(out),
        }
    }

    /// Rewrites every generator through `map`, keeping the term structure.
    pub fn substitute(&self, map: &dyn Fn(CellId) -> Term) -> Term {
        match self {
            Term::Gen(c) => map(*c),
            Term::Comp(l, r, k) => Term::comp(l.substitute(map), r.substitute(map), *k),
            Term::Bnd(t, k, s) => Term::bnd(t.substitute(map), *k, *s),
        }
    }
}

/// Declared class of a polygraph, as carried by its serialized form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassTag {
    Positive,
    Regular,
    Unchecked,
}

/// A generating cell. 0-cells have no boundary terms; `n`-cells for
/// `n >= 1` carry source and target terms of the free category on the
/// cells of dimension below `n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cell {
    pub id: CellId,
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub src: Option<Term>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tgt: Option<Term>,
}

/// A finite polygraph: the list of generating cells in creation order,
/// together with its declared class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polygraph {
    cells: Vec<Cell>,
    pub class: ClassTag,
}

impl Polygraph {
    pub fn new(class: ClassTag) -> Polygraph {
        Polygraph { cells: Vec::new(), class }
    }

    /// Adds a 0-cell and returns its id.
    pub fn add_cell0(&mut self) -> CellId {
        let id = self.cells.len() as CellId;
        self.cells.push(Cell { id, dim: 0, src: None, tgt: None });
        id
    }

    /// Adds an `n`-cell with the given boundary terms and returns its id.
    /// Structural validity of the boundaries is checked by [`validate`],
    /// not here, so that polygraphs can be built incrementally.
    pub fn add_cell(&mut self, dim: usize, src: Term, tgt: Term) -> CellId {
        assert!(dim >= 1, "cells of dimension >= 1 need boundaries");
        let id = self.cells.len() as CellId;
        self.cells.push(Cell { id, dim, src: Some(src), tgt: Some(tgt) });
        id
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn cell(&self, id: CellId) -> Result<&Cell> {
        self.cells.get(id as usize).ok_or(Error::NoSuchCell(id))
    }

    pub fn dim_of(&self, id: CellId) -> Result<usize> {
        Ok(self.cell(id)?.dim)
    }

    /// Largest cell dimension present, or 0 for the empty polygraph.
    pub fn dim(&self) -> usize {
        self.cells.iter().map(|c| c.dim).max().unwrap_or(0)
    }

    /// Ids of all cells of the given dimension, in creation order.
    pub fn cells_of_dim(&self, dim: usize) -> Vec<CellId> {
        self.cells.iter().filter(|c| c.dim == dim).map(|c| c.id).collect()
    }

    /// The declared boundary term of a cell: `src` for `Neg`, `tgt` for
    /// `Pos`. Errors on 0-cells.
    pub fn attachment(&self, id: CellId, s: Sign) -> Result<&Term> {
        let cell = self.cell(id)?;
        let t = match s {
            Sign::Neg => cell.src.as_ref(),
            Sign::Pos => cell.tgt.as_ref(),
        };
        t.ok_or_else(|| Error::InvalidPolygraph(format!("cell {id} has no boundary")))
    }

    /// Dimension of the arrow denoted by a term. Composites never collapse
    /// to identities in a free category on positive cells, so the dimension
    /// of `Comp(x, y, k)` is the larger of the two factor dimensions.
    pub fn term_dim(&self, t: &Term) -> Result<usize> {
        Ok(match t {
            Term::Gen(c) => self.dim_of(*c)?,
            Term::Comp(l, r, _) => self.term_dim(l)?.max(self.term_dim(r)?),
            Term::Bnd(u, k, _) => self.term_dim(u)?.min(*k),
        })
    }

    /// The `k`-boundary of a term with orientation `s`, normalized by the
    /// globular identities: boundaries of boundaries collapse, boundaries
    /// of composites at the composition level pick one factor, boundaries
    /// below the composition level pick the left factor, and boundaries
    /// above it distribute over both factors. The result never contains a
    /// `Bnd` node above dimension `k`.
    pub fn boundary_term(&self, t: &Term, k: usize, s: Sign) -> Result<Term> {
        let n = self.term_dim(t)?;
        if k >= n {
            return Ok(t.clone());
        }
        match t {
            Term::Gen(c) => {
                let att = self.attachment(*c, if k + 1 == n { s } else { Sign::Neg })?.clone();
                self.boundary_term(&att, k, s)
            }
            Term::Comp(l, r, j) => {
                if k > *j {
                    let lb = self.boundary_term(l, k, s)?;
                    let rb = self.boundary_term(r, k, s)?;
                    let ld = self.term_dim(&lb)?;
                    let rd = self.term_dim(&rb)?;
                    if ld <= *j {
                        Ok(rb)
                    } else if rd <= *j {
                        Ok(lb)
                    } else {
                        Ok(Term::comp(lb, rb, *j))
                    }
                } else if k == *j {
                    match s {
                        Sign::Neg => self.boundary_term(l, k, s),
                        Sign::Pos => self.boundary_term(r, k, s),
                    }
                } else {
                    self.boundary_term(l, k, s)
                }
            }
            Term::Bnd(u, _, _) => self.boundary_term(u, k, s),
        }
    }

    /// Structural validation. Returns the list of violations; an empty list
    /// means the polygraph is well-formed for its declared class.
    ///
    /// Checked for every class: cell ids are their positions, boundary
    /// terms only reference lower-dimensional cells that exist, boundary
    /// terms of an `n`-cell denote arrows of dimension `< n`, and the two
    /// boundaries are parallel. Parallelism is checked structurally up to
    /// dimension 3 and on linear shadows above (see [`crate::lin`]).
    ///
    /// For `Positive`, each `n`-cell must additionally have boundaries of
    /// dimension exactly `n - 1`. For `Regular`, the plex of every cell
    /// must have spherical boundaries; that computation lives in
    /// [`crate::plex::is_regular`] and is invoked from here.
    pub fn validate(&self) -> Vec<String> {
        let mut bad = Vec::new();
        for (i, c) in self.cells.iter().enumerate() {
            if c.id as usize != i {
                bad.push(format!("cell at position {i} has id {}", c.id));
            }
            if c.dim == 0 {
                if c.src.is_some() || c.tgt.is_some() {
                    bad.push(format!("0-cell {} has boundary terms", c.id));
                }
                continue;
            }
            let (src, tgt) = match (&c.src, &c.tgt) {
                (Some(s), Some(t)) => (s, t),
                _ => {
                    bad.push(format!("cell {} of dimension {} lacks boundaries", c.id, c.dim));
                    continue;
                }
            };
            let mut refs_ok = true;
            for side in [src, tgt] {
                for g in side.gens() {
                    match self.cell(g) {
                        Ok(gc) if gc.dim < c.dim => {}
                        Ok(gc) => {
                            bad.push(format!(
                                "cell {} of dimension {} references cell {} of dimension {}",
                                c.id, c.dim, g, gc.dim
                            ));
                            refs_ok = false;
                        }
                        Err(_) => {
                            bad.push(format!("cell {} references missing cell {}", c.id, g));
                            refs_ok = false;
                        }
                    }
                }
            }
            if !refs_ok {
                continue;
            }
            let sd = self.term_dim(src);
            let td = self.term_dim(tgt);
            match (sd, td) {
                (Ok(sd), Ok(td)) => {
                    if sd >= c.dim || td >= c.dim {
                        bad.push(format!(
                            "cell {} of dimension {} has boundaries of dimensions {sd}/{td}",
                            c.id, c.dim
                        ));
                        continue;
                    }
                    if self.class == ClassTag::Positive || self.class == ClassTag::Regular {
                        if sd + 1 != c.dim || td + 1 != c.dim {
                            bad.push(format!(
                                "cell {} is not positive: boundary dimensions {sd}/{td}",
                                c.id
                            ));
                        }
                    }
                    if let Err(e) = self.check_parallel(src, tgt, c.dim) {
                        bad.push(format!("cell {}: {e}", c.id));
                    }
                }
                _ => bad.push(format!("cell {} has untypable boundaries", c.id)),
            }
        }
        if bad.is_empty() && self.class == ClassTag::Regular {
            match crate::plex::is_regular(self) {
                Ok(true) => {}
                Ok(false) => bad.push("declared regular but some plex is not spherical".into()),
                Err(e) => bad.push(format!("regularity check failed: {e}")),
            }
        }
        bad
    }

    /// Checks that `src` and `tgt`, boundaries of a prospective `dim`-cell,
    /// are parallel: same `k`-boundaries for every `k < dim - 1`.
    /// Structural equality is used up to dimension 3; above that the
    /// comparison is on linear shadows, which is the supported regime for
    /// high-dimensional polygraphs built by the chain-level constructions.
    fn check_parallel(&self, src: &Term, tgt: &Term, dim: usize) -> Result<()> {
        if dim < 2 {
            return Ok(());
        }
        let structural = self.is_positive().unwrap_or(false);
        for k in 0..dim - 1 {
            for s in [Sign::Neg, Sign::Pos] {
                let a = self.boundary_term(src, k, s)?;
                let b = self.boundary_term(tgt, k, s)?;
                let ad = self.term_dim(&a)?;
                let mut compared = false;
                if ad <= 3 && structural && self.eval_safe(&a) && self.eval_safe(&b) {
                    match crate::value::arrows_equal(self, &a, &b) {
                        Ok(true) => compared = true,
                        Ok(false) => {
                            return Err(Error::InvalidPolygraph(format!(
                                "boundaries disagree at level {k}"
                            )))
                        }
                        Err(Error::UnsupportedClass(_)) => {}
                        Err(e) => return Err(e),
                    }
                }
                if !compared {
                    let ctx = crate::lin::LinCtx::new(self);
                    if ctx.delta(&a)? != ctx.delta(&b)? {
                        return Err(Error::InvalidPolygraph(format!(
                            "boundary shadows disagree at level {k}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// True when every generator in the term has dimension at most 3, the
    /// regime in which terms can be evaluated to canonical values. Terms
    /// over higher cells are compared through their linear shadows
    /// instead.
    fn eval_safe(&self, t: &Term) -> bool {
        t.gens().iter().all(|&g| self.cell(g).map_or(false, |c| c.dim <= 3))
    }

    /// True when every cell has boundaries of dimension exactly one less
    /// than its own, regardless of the declared class tag.
    pub fn is_positive(&self) -> Result<bool> {
        for c in &self.cells {
            if c.dim == 0 {
                continue;
            }
            let src = self.attachment(c.id, Sign::Neg)?;
            let tgt = self.attachment(c.id, Sign::Pos)?;
            if self.term_dim(src)? + 1 != c.dim || self.term_dim(tgt)? + 1 != c.dim {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// A set of cells of a parent polygraph that is closed under boundaries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubPolygraph {
    pub members: BTreeSet<CellId>,
}

impl SubPolygraph {
    /// Builds a sub-polygraph from an explicit member set, checking
    /// boundary closure in the parent.
    pub fn new(parent: &Polygraph, members: BTreeSet<CellId>) -> Result<SubPolygraph> {
        for &m in &members {
            let c = parent.cell(m)?;
            if c.dim == 0 {
                continue;
            }
            for s in [Sign::Neg, Sign::Pos] {
                for g in parent.attachment(m, s)?.gens() {
                    if !members.contains(&g) {
                        return Err(Error::ClosureViolation(g));
                    }
                }
            }
        }
        Ok(SubPolygraph { members })
    }

    /// Smallest sub-polygraph containing the given cells: the closure of
    /// the set under boundary supports.
    pub fn closure(parent: &Polygraph, seed: impl IntoIterator<Item = CellId>) -> Result<SubPolygraph> {
        let mut members: BTreeSet<CellId> = BTreeSet::new();
        let mut todo: Vec<CellId> = seed.into_iter().collect();
        while let Some(c) = todo.pop() {
            if !members.insert(c) {
                continue;
            }
            let cell = parent.cell(c)?;
            if cell.dim == 0 {
                continue;
            }
            for s in [Sign::Neg, Sign::Pos] {
                for g in parent.attachment(c, s)?.gens() {
                    if !members.contains(&g) {
                        todo.push(g);
                    }
                }
            }
        }
        Ok(SubPolygraph { members })
    }

    /// Union of two sub-polygraphs; always closed.
    pub fn union(&self, other: &SubPolygraph) -> SubPolygraph {
        SubPolygraph { members: self.members.union(&other.members).copied().collect() }
    }

    /// Intersection of two sub-polygraphs; always closed.
    pub fn intersection(&self, other: &SubPolygraph) -> SubPolygraph {
        SubPolygraph { members: self.members.intersection(&other.members).copied().collect() }
    }

    pub fn contains(&self, c: CellId) -> bool {
        self.members.contains(&c)
    }

    /// Materializes the sub-polygraph as a standalone polygraph together
    /// with the cell map from new ids to parent ids. Cells keep their
    /// relative creation order.
    pub fn to_polygraph(&self, parent: &Polygraph) -> Result<(Polygraph, Vec<CellId>)> {
        let mut ids: Vec<CellId> = self.members.iter().copied().collect();
        ids.sort_by_key(|&c| (parent.cell(c).map(|x| x.dim).unwrap_or(0), c));
        let mut rename: BTreeMap<CellId, CellId> = BTreeMap::new();
        for (new, &old) in ids.iter().enumerate() {
            rename.insert(old, new as CellId);
        }
        let mut out = Polygraph::new(parent.class);
        for &old in &ids {
            let c = parent.cell(old)?;
            if c.dim == 0 {
                out.add_cell0();
            } else {
                let f = |g: CellId| Term::Gen(rename[&g]);
                out.add_cell(
                    c.dim,
                    parent.attachment(old, Sign::Neg)?.substitute(&f),
                    parent.attachment(old, Sign::Pos)?.substitute(&f),
                );
            }
        }
        Ok((out, ids))
    }

    /// Inclusion morphism into the parent.
    pub fn inclusion(&self, parent: &Polygraph) -> Result<Morphism> {
        let (dom, ids) = self.to_polygraph(parent)?;
        Ok(Morphism {
            dom,
            cod: parent.clone(),
            image: ids.into_iter().map(Term::Gen).collect(),
        })
    }
}

/// A morphism of the free categories presented by two polygraphs, given by
/// the images of the generating cells of the domain. The image of an
/// `n`-cell is a term denoting an arrow of the codomain of dimension at
/// most `n` whose boundaries match the images of the cell's boundaries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Morphism {
    pub dom: Polygraph,
    pub cod: Polygraph,
    /// `image[c]` is the image term of domain cell `c`.
    pub image: Vec<Term>,
}

impl Morphism {
    /// The identity morphism of a polygraph.
    pub fn identity(p: &Polygraph) -> Morphism {
        Morphism {
            dom: p.clone(),
            cod: p.clone(),
            image: p.cells().iter().map(|c| Term::Gen(c.id)).collect(),
        }
    }

    /// Applies the morphism to a term over the domain.
    pub fn apply(&self, t: &Term) -> Term {
        t.substitute(&|c| self.image[c as usize].clone())
    }

    /// Composition `self` then `g`.
    pub fn then(&self, g: &Morphism) -> Morphism {
        Morphism {
            dom: self.dom.clone(),
            cod: g.cod.clone(),
            image: self.image.iter().map(|t| g.apply(t)).collect(),
        }
    }

    /// True when every generator maps to a generator.
    pub fn is_polygraphic(&self) -> bool {
        self.image.iter().all(|t| matches!(t, Term::Gen(_)))
    }

    /// True when the morphism is polygraphic and injective on cells.
    pub fn is_polygraphic_mono(&self) -> bool {
        let mut seen = BTreeSet::new();
        for t in &self.image {
            match t {
                Term::Gen(c) => {
                    if !seen.insert(*c) {
                        return false;
                    }
                }
                _ => return false,
            }
        }
        true
    }

    /// Structural validation: image terms are well-typed over the codomain,
    /// dimension does not increase, and the boundaries of each image match
    /// the images of the boundaries. The boundary comparison is structural
    /// up to dimension 3 and on linear shadows above.
    pub fn validate(&self) -> Result<()> {
        if self.image.len() != self.dom.cells().len() {
            return Err(Error::InvalidMorphism(format!(
                "expected {} images, got {}",
                self.dom.cells().len(),
                self.image.len()
            )));
        }
        for c in self.dom.cells() {
            let img = &self.image[c.id as usize];
            let d = self.cod.term_dim(img)?;
            if d > c.dim {
                return Err(Error::InvalidMorphism(format!(
                    "cell {} of dimension {} maps to a term of dimension {d}",
                    c.id, c.dim
                )));
            }
            if c.dim == 0 {
                continue;
            }
            for s in [Sign::Neg, Sign::Pos] {
                let want = self.apply(self.dom.attachment(c.id, s)?);
                let got = self.cod.boundary_term(img, c.dim - 1, s)?;
                let wd = self.cod.term_dim(&want)?.max(self.cod.term_dim(&got)?);
                let evaluable =
                    self.cod.eval_safe(&want) && self.cod.eval_safe(&got);
                let structural = if wd <= 3 && evaluable && self.cod.is_positive().unwrap_or(false) {
                    match crate::value::arrows_equal(&self.cod, &want, &got) {
                        Ok(v) => Some(v),
                        Err(Error::UnsupportedClass(_)) => None,
                        Err(e) => return Err(e),
                    }
                } else {
                    None
                };
                let same = match structural {
                    Some(v) => v,
                    None => {
                        let ctx = crate::lin::LinCtx::new(&self.cod);
                        ctx.delta(&want)? == ctx.delta(&got)?
                    }
                };
                if !same {
                    return Err(Error::InvalidMorphism(format!(
                        "boundary of the image of cell {} does not match",
                        c.id
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Pushout of `f: A -> B` and `g: A -> C`. At least one leg must be a
/// polygraphic monomorphism; the result is the gluing `D = B +_A C`
/// together with the two canonical morphisms `B -> D` and `C -> D`.
pub fn pushout(f: &Morphism, g: &Morphism) -> Result<(Polygraph, Morphism, Morphism)> {
    if f.is_polygraphic_mono() {
        let (d, in_b, in_c) = pushout_along_mono(f, g)?;
        Ok((d, in_b, in_c))
    } else if g.is_polygraphic_mono() {
        let (d, in_c, in_b) = pushout_along_mono(g, f)?;
        Ok((d, in_b, in_c))
    } else {
        Err(Error::NotMono)
    }
}

/// Pushout when `mono: A -> B` is a polygraphic monomorphism. The result
/// keeps all cells of `C` with their ids, then adjoins the cells of `B`
/// outside the image of `A` in creation order, with their attachments
/// rewritten through `g` on the `A`-part.
fn pushout_along_mono(
    mono: &Morphism,
    g: &Morphism,
) -> Result<(Polygraph, Morphism, Morphism)> {
    if mono.dom != g.dom {
        return Err(Error::InvalidMorphism("pushout legs have different domains".into()));
    }
    let b = &mono.cod;
    let c = &g.cod;
    let mut a_to_b: BTreeMap<CellId, CellId> = BTreeMap::new();
    for (a_cell, img) in g.dom.cells().iter().zip(mono.image.iter()) {
        match img {
            Term::Gen(bc) => {
                a_to_b.insert(a_cell.id, *bc);
            }
            _ => return Err(Error::NotMono),
        }
    }
    let b_to_a: BTreeMap<CellId, CellId> = a_to_b.iter().map(|(&a, &b)| (b, a)).collect();

    let mut d = c.clone();
    d.class = ClassTag::Unchecked;
    let mut b_image: BTreeMap<CellId, Term> = BTreeMap::new();
    for bc in b.cells() {
        if let Some(&a) = b_to_a.get(&bc.id) {
            b_image.insert(bc.id, g.image[a as usize].clone());
        }
    }
    for bc in b.cells() {
        if b_to_a.contains_key(&bc.id) {
            continue;
        }
        let rewrite = |t: &Term| -> Term {
            t.substitute(&|gid| b_image.get(&gid).cloned().unwrap_or(Term::Gen(gid)))
        };
        let id = if bc.dim == 0 {
            d.add_cell0()
        } else {
            let src = rewrite(b.attachment(bc.id, Sign::Neg)?);
            let tgt = rewrite(b.attachment(bc.id, Sign::Pos)?);
            d.add_cell(bc.dim, src, tgt)
        };
        b_image.insert(bc.id, Term::Gen(id));
    }
    if d.is_positive()? {
        d.class = ClassTag::Positive;
    }
    let in_b = Morphism {
        dom: b.clone(),
        cod: d.clone(),
        image: b.cells().iter().map(|bc| b_image[&bc.id].clone()).collect(),
    };
    let in_c = Morphism {
        dom: c.clone(),
        cod: d.clone(),
        image: c.cells().iter().map(|cc| Term::Gen(cc.id)).collect(),
    };
    Ok((d, in_b, in_c))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// The interval: two 0-cells and a 1-cell between them.
    pub fn interval() -> Polygraph {
        let mut p = Polygraph::new(ClassTag::Positive);
        let a = p.add_cell0();
        let b = p.add_cell0();
        p.add_cell(1, Term::Gen(a), Term::Gen(b));
        p
    }

    #[test]
    fn boundary_of_generator_unfolds_attachments() {
        let p = interval();
        let f = Term::Gen(2);
        assert_eq!(p.boundary_term(&f, 0, Sign::Neg).unwrap(), Term::Gen(0));
        assert_eq!(p.boundary_term(&f, 0, Sign::Pos).unwrap(), Term::Gen(1));
        assert_eq!(p.boundary_term(&f, 1, Sign::Neg).unwrap(), f);
    }

    #[test]
    fn boundary_of_composite_picks_ends() {
        let mut p = Polygraph::new(ClassTag::Positive);
        let a = p.add_cell0();
        let b = p.add_cell0();
        let c = p.add_cell0();
        let f = p.add_cell(1, Term::Gen(a), Term::Gen(b));
        let g = p.add_cell(1, Term::Gen(b), Term::Gen(c));
        let fg = Term::comp(Term::Gen(f), Term::Gen(g), 0);
        assert_eq!(p.boundary_term(&fg, 0, Sign::Neg).unwrap(), Term::Gen(a));
        assert_eq!(p.boundary_term(&fg, 0, Sign::Pos).unwrap(), Term::Gen(c));
        assert_eq!(p.term_dim(&fg).unwrap(), 1);
    }

    #[test]
    fn validate_accepts_interval_and_rejects_bad_reference() {
        assert!(interval().validate().is_empty());
        let mut p = Polygraph::new(ClassTag::Positive);
        let a = p.add_cell0();
        p.add_cell(1, Term::Gen(a), Term::Gen(99));
        assert!(!p.validate().is_empty());
    }

    #[test]
    fn closure_collects_boundary_supports() {
        let p = interval();
        let sub = SubPolygraph::closure(&p, [2]).unwrap();
        assert_eq!(sub.members.len(), 3);
        assert!(SubPolygraph::new(&p, [2].into_iter().collect()).is_err());
    }

    #[test]
    fn pushout_gluing_endpoints_makes_a_loop() {
        let p = interval();
        let mut pt = Polygraph::new(ClassTag::Positive);
        pt.add_cell0();
        let mut two = Polygraph::new(ClassTag::Positive);
        two.add_cell0();
        two.add_cell0();
        // Two points -> interval endpoints, and two points -> one point.
        let f = Morphism {
            dom: two.clone(),
            cod: p.clone(),
            image: vec![Term::Gen(0), Term::Gen(1)],
        };
        let g = Morphism {
            dom: two,
            cod: pt,
            image: vec![Term::Gen(0), Term::Gen(0)],
        };
        let (d, in_b, _) = pushout(&f, &g).unwrap();
        assert_eq!(d.cells().len(), 2);
        assert_eq!(d.cells_of_dim(0).len(), 1);
        assert_eq!(d.cells_of_dim(1).len(), 1);
        let loop_cell = d.cells_of_dim(1)[0];
        assert_eq!(d.attachment(loop_cell, Sign::Neg).unwrap(), d.attachment(loop_cell, Sign::Pos).unwrap());
        assert!(in_b.is_polygraphic());
        assert!(d.is_positive().unwrap());
    }
}
