//! Boundary and horn inclusions, anodyne-pushout recognition, pushout
//! products and the weak cylinder objects.
//!
//! The generating cofibration of a plex is the inclusion of the
//! sub-polygraph obtained by removing the top cell; the generating anodyne
//! map additionally removes one marked codimension-1 cell whose occurrence
//! count in the top boundaries qualifies it for horn filling. Recognition
//! of pushouts of generating anodyne maps is purely arithmetic: it counts
//! occurrences through `delta`, so it needs no search.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::lin::LinCtx;
use crate::poly::{CellId, ClassTag, Morphism, Polygraph, Sign, SubPolygraph, Term};
use crate::steiner::tensor_polygraph;

/// The unique top-dimensional cell of a plex-shaped polygraph.
fn single_top(c: &Polygraph) -> Result<CellId> {
    let tops = c.cells_of_dim(c.dim());
    match tops.as_slice() {
        [t] => Ok(*t),
        _ => Err(Error::UnsupportedClass(format!(
            "expected a single top-dimensional cell, found {}",
            tops.len()
        ))),
    }
}

/// The inclusion `∂c ↪ c` of the sub-polygraph containing every cell
/// except the unique top-dimensional one. For the point this is the
/// inclusion of the empty polygraph.
pub fn generating_cofibration(c: &Polygraph) -> Result<Morphism> {
    let top = single_top(c)?;
    let members: BTreeSet<CellId> =
        c.cells().iter().map(|x| x.id).filter(|&x| x != top).collect();
    SubPolygraph::new(c, members)?.inclusion(c)
}

/// A generating anodyne extension: the horn of a plex at a marked
/// codimension-1 cell, included into the plex.
#[derive(Debug, Clone)]
pub struct AnodyneGenerator {
    /// The marked cell, as an id of the plex.
    pub marked: CellId,
    /// The top cell of the plex.
    pub top: CellId,
    /// The horn inclusion; its domain `Λ` contains every cell of the plex
    /// except the marked cell and the top cell.
    pub inclusion: Morphism,
}

/// The horn inclusion `Λ^a c ↪ c` at the codimension-1 cell `a`.
///
/// `a` must appear exactly once in exactly one of the two boundaries of
/// the top cell, counted by `delta` coefficients; in a regular plex every
/// codimension-1 cell qualifies.
pub fn horn(c: &Polygraph, a: CellId) -> Result<AnodyneGenerator> {
    let top = single_top(c)?;
    let n = c.dim();
    if n == 0 || c.dim_of(a)? + 1 != n {
        return Err(Error::NotACell(a));
    }
    let ctx = LinCtx::new(c);
    let neg = ctx.delta(c.attachment(top, Sign::Neg)?)?.get(a);
    let pos = ctx.delta(c.attachment(top, Sign::Pos)?)?.get(a);
    if (neg, pos) != (1, 0) && (neg, pos) != (0, 1) {
        return Err(Error::HypothesisFailed(format!(
            "cell {a} occurs {neg} times in the source and {pos} times in \
             the target of the top cell; horn filling needs exactly one \
             occurrence on exactly one side"
        )));
    }
    let members: BTreeSet<CellId> =
        c.cells().iter().map(|x| x.id).filter(|&x| x != top && x != a).collect();
    let inclusion = SubPolygraph::new(c, members)?.inclusion(c)?;
    Ok(AnodyneGenerator { marked: a, top, inclusion })
}

/// True when the inclusion is a pushout of a generating anodyne map: the
/// codomain adds exactly two cells, an `n`-cell `x` and an `(n+1)`-cell
/// `θ`, with `x` occurring exactly once in exactly one of the boundaries
/// of `θ`.
pub fn recognize_anodyne_pushout(f: &Morphism) -> Result<bool> {
    f.validate()?;
    if !f.is_polygraphic_mono() {
        return Err(Error::InvalidMorphism(
            "anodyne recognition needs a polygraphic inclusion".into(),
        ));
    }
    let image: BTreeSet<CellId> = f
        .image
        .iter()
        .filter_map(|t| match t {
            Term::Gen(c) => Some(*c),
            _ => None,
        })
        .collect();
    let mut added: Vec<CellId> =
        f.cod.cells().iter().map(|c| c.id).filter(|c| !image.contains(c)).collect();
    added.sort_by_key(|&c| f.cod.cell(c).map(|x| x.dim).unwrap_or(0));
    let [x, th] = added.as_slice() else {
        return Ok(false);
    };
    if f.cod.dim_of(*x)? + 1 != f.cod.dim_of(*th)? {
        return Ok(false);
    }
    let ctx = LinCtx::new(&f.cod);
    let neg = ctx.delta(f.cod.attachment(*th, Sign::Neg)?)?.get(*x);
    let pos = ctx.delta(f.cod.attachment(*th, Sign::Pos)?)?.get(*x);
    Ok((neg, pos) == (1, 0) || (neg, pos) == (0, 1))
}

/// The corner map of two inclusions: for `i: A ↪ X` and `j: B ↪ Y`, the
/// inclusion into `X ⊗ Y` of the sub-polygraph of cells `x ⊗ y` with
/// `x ∈ A` or `y ∈ B`. When `i` is a generating cofibration and `j` a
/// generating anodyne map, exactly the two cells `top ⊗ marked` and
/// `top ⊗ top` are missing, and the corner map is itself a pushout of a
/// generating anodyne map.
pub fn pushout_product(i: &Morphism, j: &Morphism) -> Result<Morphism> {
    i.validate()?;
    j.validate()?;
    if !i.is_polygraphic_mono() || !j.is_polygraphic_mono() {
        return Err(Error::InvalidMorphism(
            "pushout product needs polygraphic inclusions".into(),
        ));
    }
    let gens = |f: &Morphism| -> BTreeSet<CellId> {
        f.image
            .iter()
            .filter_map(|t| match t {
                Term::Gen(c) => Some(*c),
                _ => None,
            })
            .collect()
    };
    let in_left = gens(i);
    let in_right = gens(j);
    let (tensor, inventory) = tensor_polygraph(&i.cod, &j.cod)?;
    let members: BTreeSet<CellId> = inventory
        .iter()
        .enumerate()
        .filter(|(_, cell)| in_left.contains(&cell.left) || in_right.contains(&cell.right))
        .map(|(id, _)| id as CellId)
        .collect();
    SubPolygraph::new(&tensor, members)?.inclusion(&tensor)
}

/// The polygraph `D'*` detecting trivial loops: 0-cells `*` and `t`,
/// 1-cells `w: t → *` and `p: * → *`, and one 2-cell `θ: w #_0 p → w`.
/// Cells are created in that order. The map `* ↪ D'*` factors as two
/// pushouts of generating anodyne maps, one adding `t` and `w`, one
/// adding `p` and `θ`.
pub fn cylinder_dprime() -> Polygraph {
    let mut p = Polygraph::new(ClassTag::Positive);
    let star = p.add_cell0();
    let t = p.add_cell0();
    let w = p.add_cell(1, Term::gen(t), Term::gen(star));
    let loop_ = p.add_cell(1, Term::gen(star), Term::gen(star));
    p.add_cell(2, Term::comp(Term::gen(w), Term::gen(loop_), 0), Term::gen(w));
    p
}

/// The relative cylinder of a plex `c` with top cell of dimension `n`:
/// the extension of `∂c` by two parallel `n`-cells `c_1`, `c_2` attached
/// like the top cell, and one `(n+1)`-cell `θ: c_1 → c_2`. Returns the
/// cylinder together with the inclusion of `c` that sends the top cell to
/// `c_1`; that inclusion is a pushout of a generating anodyne map, adding
/// `c_2` and `θ`.
pub fn cylinder_relative(c: &Polygraph) -> Result<(Polygraph, Morphism)> {
    let top = single_top(c)?;
    let n = c.dim();
    let members: BTreeSet<CellId> =
        c.cells().iter().map(|x| x.id).filter(|&x| x != top).collect();
    let (mut w, ids) = SubPolygraph::new(c, members)?.to_polygraph(c)?;
    w.class = ClassTag::Positive;
    let rename = |g: CellId| -> Term {
        Term::Gen(ids.iter().position(|&old| old == g).unwrap() as CellId)
    };
    let (c1, c2) = if n == 0 {
        (w.add_cell0(), w.add_cell0())
    } else {
        let src = c.attachment(top, Sign::Neg)?.substitute(&rename);
        let tgt = c.attachment(top, Sign::Pos)?.substitute(&rename);
        (w.add_cell(n, src.clone(), tgt.clone()), w.add_cell(n, src, tgt))
    };
    w.add_cell(n + 1, Term::gen(c1), Term::gen(c2));
    let image: Vec<Term> = c
        .cells()
        .iter()
        .map(|cell| if cell.id == top { Term::gen(c1) } else { rename(cell.id) })
        .collect();
    let inclusion = Morphism { dom: c.clone(), cod: w.clone(), image };
    Ok((w, inclusion))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plex::is_regular;
    use crate::steiner::{globe, oriental};

    fn sub_inclusion(p: &Polygraph, members: impl IntoIterator<Item = CellId>) -> Morphism {
        SubPolygraph::new(p, members.into_iter().collect()).unwrap().inclusion(p).unwrap()
    }

    #[test]
    fn boundary_inclusions_of_globes_and_the_triangle() {
        let i0 = generating_cofibration(&globe(0)).unwrap();
        assert_eq!(i0.dom.cells().len(), 0);
        assert_eq!(i0.cod.cells().len(), 1);
        i0.validate().unwrap();

        let i1 = generating_cofibration(&globe(1)).unwrap();
        assert_eq!(i1.dom.cells().len(), 2);
        assert_eq!(i1.dom.dim(), 0);
        assert!(i1.is_polygraphic_mono());

        let tri = oriental(2).unwrap();
        let i2 = generating_cofibration(&tri).unwrap();
        assert_eq!(i2.dom.cells().len(), 6);
        assert_eq!(i2.dom.cells_of_dim(0).len(), 3);
        assert_eq!(i2.dom.cells_of_dim(1).len(), 3);
        i2.validate().unwrap();
    }

    #[test]
    fn horns_of_the_interval_and_the_triangle() {
        let d1 = globe(1);
        let at_target = horn(&d1, 1).unwrap();
        assert_eq!(at_target.inclusion.dom.cells().len(), 1);
        assert_eq!(at_target.inclusion.dom.dim(), 0);
        assert_eq!(at_target.top, 2);
        at_target.inclusion.validate().unwrap();
        assert_eq!(horn(&d1, 0).unwrap().inclusion.dom.cells().len(), 1);
        assert_eq!(horn(&d1, 2).unwrap_err(), Error::NotACell(2));

        let tri = oriental(2).unwrap();
        let pt = tri.cells_of_dim(0)[0];
        assert_eq!(horn(&tri, pt).unwrap_err(), Error::NotACell(pt));
        for e in tri.cells_of_dim(1) {
            let h = horn(&tri, e).unwrap();
            assert_eq!(h.inclusion.dom.cells().len(), 5);
            assert!(h.inclusion.is_polygraphic_mono());
        }
        let top = tri.cells_of_dim(2)[0];
        let ctx = LinCtx::new(&tri);
        let outer = tri
            .cells_of_dim(1)
            .into_iter()
            .find(|&e| ctx.delta(tri.attachment(top, Sign::Pos).unwrap()).unwrap().get(e) == 1)
            .unwrap();
        assert_eq!(horn(&tri, outer).unwrap().marked, outer);
    }

    #[test]
    fn anodyne_pushouts_are_recognized_by_occurrence_counts() {
        let dp = cylinder_dprime();
        let (first, _) = SubPolygraph::new(&dp, [0, 1, 2].into()).unwrap().to_polygraph(&dp).unwrap();
        assert!(recognize_anodyne_pushout(&sub_inclusion(&first, [0])).unwrap());
        assert!(recognize_anodyne_pushout(&sub_inclusion(&dp, [0, 1, 2])).unwrap());
        assert!(!recognize_anodyne_pushout(&sub_inclusion(&dp, [0, 1, 2, 3])).unwrap());
        assert!(!recognize_anodyne_pushout(&sub_inclusion(&dp, [0])).unwrap());

        let mut doubled = Polygraph::new(ClassTag::Positive);
        let star = doubled.add_cell0();
        let p = doubled.add_cell(1, Term::gen(star), Term::gen(star));
        doubled.add_cell(2, Term::comp(Term::gen(p), Term::gen(p), 0), Term::gen(p));
        assert!(!recognize_anodyne_pushout(&sub_inclusion(&doubled, [0])).unwrap());

        for e in globe(1).cells_of_dim(0) {
            let h = horn(&globe(1), e).unwrap();
            assert!(recognize_anodyne_pushout(&h.inclusion).unwrap());
        }
        let tri = oriental(2).unwrap();
        for e in tri.cells_of_dim(1) {
            assert!(recognize_anodyne_pushout(&horn(&tri, e).unwrap().inclusion).unwrap());
        }
    }

    #[test]
    fn corner_maps_of_interval_inclusions() {
        let d1 = globe(1);
        let i = generating_cofibration(&d1).unwrap();
        let j = horn(&d1, 1).unwrap().inclusion;

        let corner = pushout_product(&i, &j).unwrap();
        assert_eq!(corner.cod.cells().len(), 9);
        assert_eq!(corner.dom.cells().len(), 7);
        let image: BTreeSet<CellId> = corner
            .image
            .iter()
            .map(|t| match t {
                Term::Gen(c) => *c,
                _ => unreachable!(),
            })
            .collect();
        let missing: Vec<usize> = corner
            .cod
            .cells()
            .iter()
            .filter(|c| !image.contains(&c.id))
            .map(|c| c.dim)
            .collect();
        assert_eq!(missing, vec![1, 2]);
        assert!(recognize_anodyne_pushout(&corner).unwrap());
        assert!(recognize_anodyne_pushout(&pushout_product(&j, &i).unwrap()).unwrap());

        let cof_square = pushout_product(&i, &i).unwrap();
        assert_eq!(cof_square.cod.cells().len() - cof_square.dom.cells().len(), 1);
        assert!(!recognize_anodyne_pushout(&cof_square).unwrap());

        let from_empty = Morphism {
            dom: Polygraph::new(ClassTag::Positive),
            cod: globe(0),
            image: Vec::new(),
        };
        let unit = pushout_product(&from_empty, &j).unwrap();
        assert_eq!(unit.dom.cells().len(), j.dom.cells().len());
        assert_eq!(unit.cod.cells().len(), j.cod.cells().len());
        assert!(recognize_anodyne_pushout(&unit).unwrap());
    }

    #[test]
    fn the_weak_cylinder_of_the_point() {
        let dp = cylinder_dprime();
        assert!(dp.validate().is_empty());
        assert_eq!(dp.cells_of_dim(0).len(), 2);
        assert_eq!(dp.cells_of_dim(1).len(), 2);
        assert_eq!(dp.cells_of_dim(2).len(), 1);
        let theta = dp.cells_of_dim(2)[0];
        assert_eq!(
            dp.attachment(theta, Sign::Neg).unwrap(),
            &Term::comp(Term::gen(2), Term::gen(3), 0)
        );
        assert_eq!(dp.attachment(theta, Sign::Pos).unwrap(), &Term::gen(2));
        assert!(is_regular(&dp).unwrap());
        assert!(!crate::plex::is_polyplex(&dp, &Term::gen(theta)).unwrap());
    }

    #[test]
    fn relative_cylinders_over_small_plexes() {
        let (w0, inc0) = cylinder_relative(&globe(0)).unwrap();
        assert!(w0.validate().is_empty());
        assert_eq!(w0.cells().len(), 3);
        assert_eq!(w0.dim(), 1);
        assert!(recognize_anodyne_pushout(&inc0).unwrap());

        let (w2, inc2) = cylinder_relative(&globe(2)).unwrap();
        assert!(w2.validate().is_empty());
        assert_eq!(w2.cells_of_dim(2).len(), 2);
        assert_eq!(w2.cells_of_dim(3).len(), 1);
        assert_eq!(w2.cells().len(), 7);
        assert!(recognize_anodyne_pushout(&inc2).unwrap());
        assert!(is_regular(&w2).unwrap());

        let (wt, inct) = cylinder_relative(&oriental(2).unwrap()).unwrap();
        assert_eq!(wt.cells().len(), 9);
        assert!(wt.validate().is_empty());
        assert!(recognize_anodyne_pushout(&inct).unwrap());
        assert!(is_regular(&wt).unwrap());
    }
}
