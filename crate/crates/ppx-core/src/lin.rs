//! The free abelian group on the cells of a polygraph and its counting
//! maps.
//!
//! `delta` sends an arrow to the integer combination of the cells occurring
//! in it, by the recursion `delta(x #_k y) = delta(x) + delta(y) -
//! delta(boundary(x, k, +))`; the result is independent of the term chosen
//! for the arrow. `sigma` is the orientation-alternating sum of all cells
//! of a polygraph; its behaviour under arrow images detects pasting shapes.
//! The generator basis `m_x = delta_x - delta(src x) - delta(tgt x)` is
//! unitriangular against the dimension filtration and turns `delta(f)` into
//! a vector of nonnegative counts.

use std::cell::RefCell;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{CellId, Polygraph, Sign, SubPolygraph, Term};

/// Which basis the coefficients of a [`LinComb`] refer to. Serialized as
/// `"delta"` and `"m"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    /// Coefficients against the cell basis `delta_x`.
    Delta,
    /// Coefficients against the generator basis `m_x`.
    M,
}

/// Positivity predicates on linear combinations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PositivityMode {
    /// All coordinates in the `m` basis are nonnegative.
    Makkai,
    /// Each cell's coefficient has sign `(-1)^dim` or vanishes.
    Alternate,
}

/// A finitely supported integer combination of cells, tagged with the
/// basis its coefficients refer to. Zero coefficients are pruned.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinComb {
    pub basis: Basis,
    coeffs: BTreeMap<CellId, i64>,
}

impl LinComb {
    pub fn zero(basis: Basis) -> LinComb {
        LinComb { basis, coeffs: BTreeMap::new() }
    }

    /// The basis vector of a single cell.
    pub fn cell(basis: Basis, c: CellId) -> LinComb {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(c, 1);
        LinComb { basis, coeffs }
    }

    pub fn from_pairs(basis: Basis, pairs: impl IntoIterator<Item = (CellId, i64)>) -> LinComb {
        let mut out = LinComb::zero(basis);
        for (c, k) in pairs {
            out.bump(c, k);
        }
        out
    }

    pub fn get(&self, c: CellId) -> i64 {
        self.coeffs.get(&c).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (CellId, i64)> + '_ {
        self.coeffs.iter().map(|(&c, &k)| (c, k))
    }

    pub fn support(&self) -> impl Iterator<Item = CellId> + '_ {
        self.coeffs.keys().copied()
    }

    fn bump(&mut self, c: CellId, k: i64) {
        if k == 0 {
            return;
        }
        let e = self.coeffs.entry(c).or_insert(0);
        *e += k;
        if *e == 0 {
            self.coeffs.remove(&c);
        }
    }

    pub fn add(&self, other: &LinComb) -> Result<LinComb> {
        if self.basis != other.basis {
            return Err(Error::BasisMismatch);
        }
        let mut out = self.clone();
        for (c, k) in other.iter() {
            out.bump(c, k);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &LinComb) -> Result<LinComb> {
        if self.basis != other.basis {
            return Err(Error::BasisMismatch);
        }
        let mut out = self.clone();
        for (c, k) in other.iter() {
            out.bump(c, -k);
        }
        Ok(out)
    }

    pub fn scale(&self, k: i64) -> LinComb {
        if k == 0 {
            return LinComb::zero(self.basis);
        }
        LinComb {
            basis: self.basis,
            coeffs: self.coeffs.iter().map(|(&c, &v)| (c, v * k)).collect(),
        }
    }

    /// The part of the combination supported on cells of dimension `k`.
    pub fn grade_part(&self, p: &Polygraph, k: usize) -> Result<LinComb> {
        let mut out = LinComb::zero(self.basis);
        for (c, v) in self.iter() {
            if p.dim_of(c)? == k {
                out.bump(c, v);
            }
        }
        Ok(out)
    }

    /// True when all coefficients are nonnegative.
    pub fn is_nonnegative(&self) -> bool {
        self.coeffs.values().all(|&v| v >= 0)
    }
}

/// Linearization context over a fixed polygraph. Caches the delta images
/// of cell boundaries, which dominate the cost of nested terms.
pub struct LinCtx<'a> {
    pub x: &'a Polygraph,
    cell_bnd: RefCell<BTreeMap<(CellId, usize, Sign), LinComb>>,
}

impl<'a> LinCtx<'a> {
    pub fn new(x: &'a Polygraph) -> LinCtx<'a> {
        LinCtx { x, cell_bnd: RefCell::new(BTreeMap::new()) }
    }

    /// The occurrence count map of the arrow denoted by `t`, in the delta
    /// basis. Independent of the term chosen for the arrow.
    pub fn delta(&self, t: &Term) -> Result<LinComb> {
        match t {
            Term::Gen(c) => {
                self.x.cell(*c)?;
                Ok(LinComb::cell(Basis::Delta, *c))
            }
            Term::Comp(l, r, k) => {
                let a = self.delta(l)?;
                let b = self.delta(r)?;
                let cut = self.delta_boundary(l, *k, Sign::Pos)?;
                a.add(&b)?.sub(&cut)
            }
            Term::Bnd(u, k, s) => self.delta_boundary(u, *k, *s),
        }
    }

    /// `delta(boundary(t, k, s))` computed without materializing the
    /// boundary term, memoized per generating cell.
    pub fn delta_boundary(&self, t: &Term, k: usize, s: Sign) -> Result<LinComb> {
        if k >= self.x.term_dim(t)? {
            return self.delta(t);
        }
        match t {
            Term::Gen(c) => {
                if let Some(v) = self.cell_bnd.borrow().get(&(*c, k, s)) {
                    return Ok(v.clone());
                }
                let n = self.x.dim_of(*c)?;
                let att = self.x.attachment(*c, if k + 1 == n { s } else { Sign::Neg })?.clone();
                let v = self.delta_boundary(&att, k, s)?;
                self.cell_bnd.borrow_mut().insert((*c, k, s), v.clone());
                Ok(v)
            }
            Term::Comp(l, r, j) => {
                if k > *j {
                    let a = self.delta_boundary(l, k, s)?;
                    let b = self.delta_boundary(r, k, s)?;
                    let cut = self.delta_boundary(l, *j, Sign::Pos)?;
                    a.add(&b)?.sub(&cut)
                } else if k == *j {
                    match s {
                        Sign::Neg => self.delta_boundary(l, k, s),
                        Sign::Pos => self.delta_boundary(r, k, s),
                    }
                } else {
                    self.delta_boundary(l, k, s)
                }
            }
            Term::Bnd(u, _, _) => self.delta_boundary(u, k, s),
        }
    }

    /// Basiswise extension of the boundary projections to the group:
    /// `delta_x` maps to `delta(boundary(x, k, s))`. Satisfies the globular
    /// relations and commutes with `delta`.
    pub fn pi_linear(&self, v: &LinComb, k: usize, s: Sign) -> Result<LinComb> {
        if v.basis != Basis::Delta {
            return Err(Error::BasisMismatch);
        }
        let mut out = LinComb::zero(Basis::Delta);
        for (c, coeff) in v.iter() {
            let img = self.delta_boundary(&Term::Gen(c), k, s)?;
            out = out.add(&img.scale(coeff))?;
        }
        Ok(out)
    }

    /// The alternating sum of all cells of the polygraph.
    pub fn sigma(&self) -> LinComb {
        LinComb::from_pairs(
            Basis::Delta,
            self.x.cells().iter().map(|c| (c.id, if c.dim % 2 == 0 { 1 } else { -1 })),
        )
    }

    /// The alternating sum of the cells of a sub-polygraph.
    pub fn sigma_sub(&self, sub: &SubPolygraph) -> Result<LinComb> {
        let mut out = LinComb::zero(Basis::Delta);
        for &c in &sub.members {
            let d = self.x.dim_of(c)?;
            out.bump(c, if d % 2 == 0 { 1 } else { -1 });
        }
        Ok(out)
    }

    /// The image under the arrow `t`, viewed in dimension `n`, of the
    /// alternating cell sum of the `n`-globe:
    /// `(-1)^n delta(t) + sum_{k<n} (-1)^k (delta(pi_k^- t) + delta(pi_k^+ t))`.
    /// Padding `n` above the dimension of `t` does not change the value.
    pub fn sigma_image(&self, t: &Term, n: usize) -> Result<LinComb> {
        let sign = |k: usize| if k % 2 == 0 { 1 } else { -1 };
        let mut out = self.delta(t)?.scale(sign(n));
        for k in 0..n {
            let neg = self.delta_boundary(t, k, Sign::Neg)?;
            let pos = self.delta_boundary(t, k, Sign::Pos)?;
            out = out.add(&neg.add(&pos)?.scale(sign(k)))?;
        }
        Ok(out)
    }

    /// Rewrites a delta-basis combination in the generator basis
    /// `m_x = delta_x - delta(src x) - delta(tgt x)`, by a triangular solve
    /// from the top dimension down.
    pub fn to_m_basis(&self, v: &LinComb) -> Result<LinComb> {
        if v.basis != Basis::Delta {
            return Err(Error::BasisMismatch);
        }
        let mut rest = v.clone();
        let mut out = LinComb::zero(Basis::M);
        let mut dims: Vec<usize> = rest.support().map(|c| self.x.dim_of(c)).collect::<Result<_>>()?;
        dims.sort_unstable();
        dims.dedup();
        while let Some(d) = dims.pop() {
            let cells: Vec<(CellId, i64)> =
                rest.iter().filter(|&(c, _)| self.x.dim_of(c).unwrap_or(0) == d).collect();
            for (c, coeff) in cells {
                out.bump(c, coeff);
                rest.bump(c, -coeff);
                if d > 0 {
                    for s in [Sign::Neg, Sign::Pos] {
                        let b = self.delta_boundary(&Term::Gen(c), d - 1, s)?;
                        rest = rest.add(&b.scale(coeff))?;
                        for nc in b.support() {
                            let nd = self.x.dim_of(nc)?;
                            if !dims.contains(&nd) && nd < d {
                                dims.push(nd);
                                dims.sort_unstable();
                            }
                        }
                    }
                }
            }
        }
        if !rest.is_zero() {
            return Err(Error::InvalidPolygraph("m-basis solve left a remainder".into()));
        }
        Ok(out)
    }

    /// Inverse of [`to_m_basis`].
    pub fn from_m_basis(&self, v: &LinComb) -> Result<LinComb> {
        if v.basis != Basis::M {
            return Err(Error::BasisMismatch);
        }
        let mut out = LinComb::zero(Basis::Delta);
        for (c, coeff) in v.iter() {
            out.bump(c, coeff);
            let d = self.x.dim_of(c)?;
            if d > 0 {
                for s in [Sign::Neg, Sign::Pos] {
                    let b = self.delta_boundary(&Term::Gen(c), d - 1, s)?;
                    out = out.sub(&b.scale(coeff))?;
                }
            }
        }
        Ok(out)
    }

    /// Positivity of a delta-basis combination in the requested mode.
    pub fn positivity(&self, v: &LinComb, mode: PositivityMode) -> Result<bool> {
        match mode {
            PositivityMode::Makkai => Ok(self.to_m_basis(v)?.is_nonnegative()),
            PositivityMode::Alternate => {
                for (c, coeff) in v.iter() {
                    let d = self.x.dim_of(c)?;
                    let want = if d % 2 == 0 { 1 } else { -1 };
                    if coeff * want < 0 {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
        }
    }

    /// `v <= w` in the Makkai order: `w - v` has nonnegative m-coordinates.
    pub fn makkai_le(&self, v: &LinComb, w: &LinComb) -> Result<bool> {
        self.positivity(&w.sub(v)?, PositivityMode::Makkai)
    }

    /// True iff the arrow denoted by `t` lies in the free category on the
    /// sub-polygraph: the support of its delta image is inside the members.
    pub fn in_subpolygraph(&self, t: &Term, sub: &SubPolygraph) -> Result<bool> {
        Ok(self.delta(t)?.support().all(|c| sub.contains(c)))
    }

    /// The smallest sub-polygraph whose free category contains the arrow:
    /// the cells whose m-coordinate in `delta(t)` is nonzero.
    pub fn smallest_subpolygraph(&self, t: &Term) -> Result<SubPolygraph> {
        let m = self.to_m_basis(&self.delta(t)?)?;
        SubPolygraph::new(self.x, m.support().collect())
    }

    /// The double sequence of grade parts of the boundary deltas of an
    /// arrow: entry `k` is the dimension-`k` part of `delta(pi_k^- t)` and
    /// of `delta(pi_k^+ t)`, for `k` up to the arrow dimension.
    pub fn shadow(&self, t: &Term) -> Result<Vec<(LinComb, LinComb)>> {
        let n = self.x.term_dim(t)?;
        let mut out = Vec::with_capacity(n + 1);
        for k in 0..=n {
            let neg = self.delta_boundary(t, k, Sign::Neg)?.grade_part(self.x, k)?;
            let pos = self.delta_boundary(t, k, Sign::Pos)?.grade_part(self.x, k)?;
            out.push((neg, pos));
        }
        Ok(out)
    }
}

/// Applies a morphism to a delta-basis combination over its domain:
/// `delta_x` maps to `delta(F(x))`.
pub fn map_lincomb(f: &crate::poly::Morphism, v: &LinComb) -> Result<LinComb> {
    if v.basis != Basis::Delta {
        return Err(Error::BasisMismatch);
    }
    let ctx = LinCtx::new(&f.cod);
    let mut out = LinComb::zero(Basis::Delta);
    for (c, coeff) in v.iter() {
        out = out.add(&ctx.delta(&f.image[c as usize])?.scale(coeff))?;
    }
    Ok(out)
}

/// True when the morphism sends the alternating cell sum of its domain to
/// the alternating cell sum of its codomain.
pub fn preserves_sigma(f: &crate::poly::Morphism) -> Result<bool> {
    let dom = LinCtx::new(&f.dom);
    let cod = LinCtx::new(&f.cod);
    Ok(map_lincomb(f, &dom.sigma())? == cod.sigma())
}

/// True when the induced linear map sends alternate-positive elements to
/// alternate-positive elements. The alternate-positive cone is generated
/// by the signed cell vectors, so it suffices to check the image of each.
pub fn preserves_alternate_positivity(f: &crate::poly::Morphism) -> Result<bool> {
    let cod = LinCtx::new(&f.cod);
    for c in f.dom.cells() {
        let sign = if c.dim % 2 == 0 { 1 } else { -1 };
        let img = cod.delta(&f.image[c.id as usize])?.scale(sign);
        if !cod.positivity(&img, PositivityMode::Alternate)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The set of codomain cells appearing in the image of some member of `V`:
/// the direct image of a sub-polygraph under a morphism whose linear part
/// preserves sigma and alternate positivity. The preservation hypotheses
/// are checked unless `unchecked` is set (used by regression tests that
/// exercise the construction on maps failing the hypothesis).
pub fn image_subpolygraph(
    f: &crate::poly::Morphism,
    v: &SubPolygraph,
    unchecked: bool,
) -> Result<SubPolygraph> {
    if !unchecked {
        if !preserves_sigma(f)? {
            return Err(Error::HypothesisFailed("morphism does not preserve sigma".into()));
        }
        if !preserves_alternate_positivity(f)? {
            return Err(Error::HypothesisFailed(
                "morphism does not preserve alternate positivity".into(),
            ));
        }
    }
    let cod = LinCtx::new(&f.cod);
    let mut members = std::collections::BTreeSet::new();
    for &c in &v.members {
        for y in cod.delta(&f.image[c as usize])?.support() {
            members.insert(y);
        }
    }
    SubPolygraph::new(&f.cod, members)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::ClassTag;

    /// Two composable 1-cells: x --f--> y --g--> z.
    fn two_chain() -> Polygraph {
        let mut p = Polygraph::new(ClassTag::Positive);
        let x = p.add_cell0();
        let y = p.add_cell0();
        let z = p.add_cell0();
        p.add_cell(1, Term::Gen(x), Term::Gen(y));
        p.add_cell(1, Term::Gen(y), Term::Gen(z));
        p
    }

    #[test]
    fn delta_of_composite_subtracts_the_middle() {
        let p = two_chain();
        let ctx = LinCtx::new(&p);
        let fg = Term::comp(Term::Gen(3), Term::Gen(4), 0);
        let d = ctx.delta(&fg).unwrap();
        assert_eq!(d, LinComb::from_pairs(Basis::Delta, [(3, 1), (4, 1), (1, -1)]));
        assert_eq!(d.get(1), -1);
        assert_eq!(d.get(3), 1);
        assert_eq!(d.get(4), 1);
    }

    #[test]
    fn pi_linear_matches_delta_of_boundary() {
        let p = two_chain();
        let ctx = LinCtx::new(&p);
        let fg = Term::comp(Term::Gen(3), Term::Gen(4), 0);
        let v = ctx.delta(&fg).unwrap();
        let pi = ctx.pi_linear(&v, 0, Sign::Pos).unwrap();
        assert_eq!(pi, LinComb::cell(Basis::Delta, 2));
        assert_eq!(pi, ctx.delta_boundary(&fg, 0, Sign::Pos).unwrap());
    }

    #[test]
    fn m_basis_of_a_one_cell() {
        let p = two_chain();
        let ctx = LinCtx::new(&p);
        let m = ctx.to_m_basis(&ctx.delta(&Term::Gen(3)).unwrap()).unwrap();
        assert_eq!(m, LinComb::from_pairs(Basis::M, [(3, 1), (0, 1), (1, 1)]));
        let back = ctx.from_m_basis(&m).unwrap();
        assert_eq!(back, ctx.delta(&Term::Gen(3)).unwrap());
    }

    #[test]
    fn m_basis_of_composite_counts_each_cell_once() {
        let p = two_chain();
        let ctx = LinCtx::new(&p);
        let fg = Term::comp(Term::Gen(3), Term::Gen(4), 0);
        let m = ctx.to_m_basis(&ctx.delta(&fg).unwrap()).unwrap();
        assert_eq!(m, LinComb::from_pairs(Basis::M, [(0, 1), (1, 1), (2, 1), (3, 1), (4, 1)]));
    }

    #[test]
    fn positivity_modes() {
        let p = two_chain();
        let ctx = LinCtx::new(&p);
        let neg_point = LinComb::cell(Basis::Delta, 0).scale(-1);
        assert!(!ctx.positivity(&neg_point, PositivityMode::Alternate).unwrap());
        assert!(!ctx.positivity(&neg_point, PositivityMode::Makkai).unwrap());
        let alt = LinComb::from_pairs(Basis::Delta, [(0, 2), (3, -1)]);
        assert!(ctx.positivity(&alt, PositivityMode::Alternate).unwrap());
    }

    #[test]
    fn boundary_delta_is_makkai_below_delta() {
        let p = two_chain();
        let ctx = LinCtx::new(&p);
        let fg = Term::comp(Term::Gen(3), Term::Gen(4), 0);
        let d = ctx.delta(&fg).unwrap();
        for s in [Sign::Neg, Sign::Pos] {
            let b = ctx.delta_boundary(&fg, 0, s).unwrap();
            assert!(ctx.makkai_le(&b, &d).unwrap());
        }
    }

    #[test]
    fn in_subpolygraph_follows_delta_support() {
        let p = two_chain();
        let ctx = LinCtx::new(&p);
        let sub = SubPolygraph::closure(&p, [3]).unwrap();
        assert!(ctx.in_subpolygraph(&Term::Gen(3), &sub).unwrap());
        let fg = Term::comp(Term::Gen(3), Term::Gen(4), 0);
        assert!(!ctx.in_subpolygraph(&fg, &sub).unwrap());
        assert_eq!(ctx.smallest_subpolygraph(&fg).unwrap().members.len(), 5);
    }
}
