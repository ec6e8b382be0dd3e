//! Globular groups, chain complexes and double sequences.
//!
//! A globular group is a free abelian group with a graded basis and a
//! family of linear boundary projections obeying the globular relations.
//! Collapsing each filtration stage by the one below turns it into a
//! chain complex whose differential is the difference of the two
//! projections; conversely a chain complex yields a globular group in
//! which every basis element has trivial negative boundary. Elements can
//! equivalently be presented as double sequences of chain pairs, one pair
//! per grade, which is the form the tensor and cone constructions use.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::lin::LinCtx;
use crate::poly::{Polygraph, Sign, Term};

/// An integer vector over the global basis of a globular group.
pub type GVec = BTreeMap<usize, i64>;

pub fn gvec_add(a: &GVec, b: &GVec) -> GVec {
    let mut out = a.clone();
    for (&i, &k) in b {
        let e = out.entry(i).or_insert(0);
        *e += k;
        if *e == 0 {
            out.remove(&i);
        }
    }
    out
}

pub fn gvec_sub(a: &GVec, b: &GVec) -> GVec {
    let mut out = a.clone();
    for (&i, &k) in b {
        let e = out.entry(i).or_insert(0);
        *e -= k;
        if *e == 0 {
            out.remove(&i);
        }
    }
    out
}

pub fn gvec_scale(a: &GVec, k: i64) -> GVec {
    if k == 0 {
        return GVec::new();
    }
    a.iter().map(|(&i, &v)| (i, v * k)).collect()
}

/// A free abelian group with a dimension-graded basis and boundary
/// projections. `pi` stores the action of each projection below a basis
/// element's own dimension; at or above it the projection is the
/// identity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GlobularGroup {
    pub dims: Vec<usize>,
    pi: BTreeMap<(usize, usize, Sign), GVec>,
}

impl GlobularGroup {
    pub fn new(dims: Vec<usize>) -> GlobularGroup {
        GlobularGroup { dims, pi: BTreeMap::new() }
    }

    /// The underlying dimension of the group: the largest basis dimension.
    pub fn dim(&self) -> usize {
        self.dims.iter().copied().max().unwrap_or(0)
    }

    /// Declares the boundary projection of one basis element at one level
    /// below its dimension.
    pub fn set_pi(&mut self, b: usize, k: usize, s: Sign, v: GVec) {
        self.pi.insert((b, k, s), v);
    }

    /// The projection of a basis element.
    pub fn pi_basis(&self, b: usize, k: usize, s: Sign) -> Result<GVec> {
        if b >= self.dims.len() {
            return Err(Error::GlobularRelationViolated(format!("basis element {b} out of range")));
        }
        if k >= self.dims[b] {
            let mut v = GVec::new();
            v.insert(b, 1);
            return Ok(v);
        }
        self.pi.get(&(b, k, s)).cloned().ok_or_else(|| {
            Error::GlobularRelationViolated(format!(
                "projection at level {k} of basis element {b} is not defined"
            ))
        })
    }

    /// The linear extension of a projection to an arbitrary element.
    pub fn apply_pi(&self, v: &GVec, k: usize, s: Sign) -> Result<GVec> {
        let mut out = GVec::new();
        for (&b, &c) in v {
            out = gvec_add(&out, &gvec_scale(&self.pi_basis(b, k, s)?, c));
        }
        Ok(out)
    }

    /// The part of an element supported on basis elements of dimension `n`.
    pub fn grade_part(&self, v: &GVec, n: usize) -> GVec {
        v.iter().filter(|&(&b, _)| self.dims[b] == n).map(|(&b, &c)| (b, c)).collect()
    }

    /// Checks that every projection is defined, lowers dimension, and that
    /// all pairs of projections satisfy the globular relations.
    pub fn validate(&self) -> Result<()> {
        let top = self.dim();
        for b in 0..self.dims.len() {
            for k in 0..self.dims[b] {
                for s in [Sign::Neg, Sign::Pos] {
                    let v = self.pi_basis(b, k, s)?;
                    for (&c, _) in &v {
                        if c >= self.dims.len() {
                            return Err(Error::GlobularRelationViolated(format!(
                                "projection of {b} mentions out-of-range element {c}"
                            )));
                        }
                        if self.dims[c] > k {
                            return Err(Error::GlobularRelationViolated(format!(
                                "projection of {b} at level {k} has a component of dimension {}",
                                self.dims[c]
                            )));
                        }
                    }
                }
            }
        }
        for b in 0..self.dims.len() {
            let mut unit = GVec::new();
            unit.insert(b, 1);
            for n in 0..=top {
                for m in 0..=top {
                    for se in [Sign::Neg, Sign::Pos] {
                        for sd in [Sign::Neg, Sign::Pos] {
                            let inner = self.pi_basis(b, m, sd)?;
                            let got = self.apply_pi(&inner, n, se)?;
                            let want = if n < m {
                                self.pi_basis(b, n, se)?
                            } else {
                                self.pi_basis(b, m, sd)?
                            };
                            if got != want {
                                return Err(Error::GlobularRelationViolated(format!(
                                    "pi_{n}^{se:?} pi_{m}^{sd:?} fails on basis element {b}"
                                )));
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// The basis elements of each dimension, in index order.
    pub fn grade_elems(&self) -> Vec<Vec<usize>> {
        let top = self.dim();
        let mut out = vec![Vec::new(); top + 1];
        for (b, &d) in self.dims.iter().enumerate() {
            out[d].push(b);
        }
        out
    }
}

/// A nonnegatively graded chain complex of free abelian groups with a
/// chosen basis per grade. `d[n]` is the matrix of the differential from
/// grade `n` to grade `n - 1`, with `ranks[n - 1]` rows; `d[0]` is empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainComplex {
    pub ranks: Vec<usize>,
    pub d: Vec<Vec<Vec<i64>>>,
}

impl ChainComplex {
    pub fn new(ranks: Vec<usize>, d: Vec<Vec<Vec<i64>>>) -> ChainComplex {
        ChainComplex { ranks, d }
    }

    pub fn dim(&self) -> usize {
        self.ranks.len().saturating_sub(1)
    }

    /// Applies the differential to a grade-`n` coordinate vector.
    pub fn boundary(&self, n: usize, v: &[i64]) -> Result<Vec<i64>> {
        if n == 0 || n >= self.ranks.len() {
            return Ok(Vec::new());
        }
        let mat = &self.d[n];
        if v.len() != self.ranks[n] {
            return Err(Error::GlobularRelationViolated(format!(
                "grade {n} vector has length {}, expected {}",
                v.len(),
                self.ranks[n]
            )));
        }
        let mut out = vec![0i64; self.ranks[n - 1]];
        for (r, row) in mat.iter().enumerate() {
            for (c, &e) in row.iter().enumerate() {
                out[r] += e * v[c];
            }
        }
        Ok(out)
    }

    /// Checks matrix shapes and that the differential squares to zero.
    pub fn validate(&self) -> Result<()> {
        if self.d.len() != self.ranks.len() {
            return Err(Error::GlobularRelationViolated(
                "one differential matrix per grade is required".into(),
            ));
        }
        for n in 1..self.ranks.len() {
            let mat = &self.d[n];
            if mat.len() != self.ranks[n - 1] || mat.iter().any(|row| row.len() != self.ranks[n]) {
                return Err(Error::GlobularRelationViolated(format!(
                    "differential at grade {n} has the wrong shape"
                )));
            }
        }
        for n in 2..self.ranks.len() {
            for col in 0..self.ranks[n] {
                let mut v = vec![0i64; self.ranks[n]];
                v[col] = 1;
                let once = self.boundary(n, &v)?;
                let twice = self.boundary(n - 1, &once)?;
                if twice.iter().any(|&x| x != 0) {
                    return Err(Error::GlobularRelationViolated(format!(
                        "differential does not square to zero at grade {n}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// An element of a globular group presented grade by grade: one pair of
/// chain vectors per dimension, the negative and positive boundary
/// components.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DoubleSequence {
    pub pairs: Vec<(Vec<i64>, Vec<i64>)>,
}

impl DoubleSequence {
    pub fn zero(k: &ChainComplex) -> DoubleSequence {
        DoubleSequence { pairs: k.ranks.iter().map(|&r| (vec![0; r], vec![0; r])).collect() }
    }

    /// Checks the compatibility condition: the differential of each
    /// grade's components is the mismatch of the pair below.
    pub fn validate(&self, k: &ChainComplex) -> Result<()> {
        if self.pairs.len() != k.ranks.len() {
            return Err(Error::GlobularRelationViolated(
                "double sequence must have one pair per grade".into(),
            ));
        }
        for (n, (lo, hi)) in self.pairs.iter().enumerate() {
            if lo.len() != k.ranks[n] || hi.len() != k.ranks[n] {
                return Err(Error::GlobularRelationViolated(format!(
                    "grade {n} pair has the wrong length"
                )));
            }
            if n == 0 {
                continue;
            }
            let (plo, phi) = &self.pairs[n - 1];
            let want: Vec<i64> = phi.iter().zip(plo).map(|(&a, &b)| a - b).collect();
            for side in [lo, hi] {
                if k.boundary(n, side)? != want {
                    return Err(Error::GlobularRelationViolated(format!(
                        "grade {n} component does not bound the mismatch below"
                    )));
                }
            }
        }
        Ok(())
    }

    /// The boundary projection in the double-sequence presentation: keep
    /// the grades below `n`, collapse grade `n` onto the chosen side, and
    /// drop everything above.
    pub fn pi(&self, n: usize, s: Sign) -> DoubleSequence {
        let mut pairs = Vec::with_capacity(self.pairs.len());
        for (m, (lo, hi)) in self.pairs.iter().enumerate() {
            if m < n {
                pairs.push((lo.clone(), hi.clone()));
            } else if m == n {
                let side = match s {
                    Sign::Neg => lo.clone(),
                    Sign::Pos => hi.clone(),
                };
                pairs.push((side.clone(), side));
            } else {
                pairs.push((vec![0; lo.len()], vec![0; lo.len()]));
            }
        }
        DoubleSequence { pairs }
    }
}

/// The chain complex of a globular group: grade `n` is the free group on
/// the dimension-`n` basis elements, and the differential is the
/// difference of the two boundary projections, lower grades discarded.
pub fn globular_to_chain(g: &GlobularGroup) -> Result<ChainComplex> {
    let grades = g.grade_elems();
    let ranks: Vec<usize> = grades.iter().map(|v| v.len()).collect();
    let mut d = vec![Vec::new(); ranks.len()];
    for n in 1..ranks.len() {
        let mut mat = vec![vec![0i64; ranks[n]]; ranks[n - 1]];
        let pos: BTreeMap<usize, usize> =
            grades[n - 1].iter().enumerate().map(|(j, &b)| (b, j)).collect();
        for (col, &b) in grades[n].iter().enumerate() {
            let v = gvec_sub(&g.pi_basis(b, n - 1, Sign::Pos)?, &g.pi_basis(b, n - 1, Sign::Neg)?);
            for (&c, &coef) in &v {
                if g.dims[c] == n - 1 {
                    mat[pos[&c]][col] = coef;
                }
            }
        }
        d[n] = mat;
    }
    let k = ChainComplex::new(ranks, d);
    k.validate()?;
    Ok(k)
}

/// The globular group of a chain complex: basis elements are the chain
/// basis grade by grade, the negative projections vanish below each
/// element's dimension, and the positive projection one level down is the
/// differential.
pub fn chain_to_globular(k: &ChainComplex) -> Result<GlobularGroup> {
    k.validate()?;
    let mut dims = Vec::new();
    let mut offset = vec![0usize; k.ranks.len()];
    for (n, &r) in k.ranks.iter().enumerate() {
        offset[n] = dims.len();
        dims.extend(std::iter::repeat(n).take(r));
    }
    let mut g = GlobularGroup::new(dims);
    for (n, &r) in k.ranks.iter().enumerate() {
        for j in 0..r {
            let b = offset[n] + j;
            for lvl in 0..n {
                g.set_pi(b, lvl, Sign::Neg, GVec::new());
                if lvl + 1 < n {
                    g.set_pi(b, lvl, Sign::Pos, GVec::new());
                }
            }
            if n >= 1 {
                let mut v = vec![0i64; r];
                v[j] = 1;
                let bd = k.boundary(n, &v)?;
                let mut w = GVec::new();
                for (i, &c) in bd.iter().enumerate() {
                    if c != 0 {
                        w.insert(offset[n - 1] + i, c);
                    }
                }
                g.set_pi(b, n - 1, Sign::Pos, w);
            }
        }
    }
    g.validate()?;
    Ok(g)
}

/// Presents an element of a globular group as a double sequence over the
/// group's chain complex: the grade-`n` pair is the grade-`n` part of the
/// two projections at level `n`.
pub fn to_double_sequence(g: &GlobularGroup, v: &GVec) -> Result<DoubleSequence> {
    let grades = g.grade_elems();
    let mut pairs = Vec::with_capacity(grades.len());
    for (n, elems) in grades.iter().enumerate() {
        let mut pair = (vec![0i64; elems.len()], vec![0i64; elems.len()]);
        for (s, out) in [(Sign::Neg, &mut pair.0), (Sign::Pos, &mut pair.1)] {
            let p = g.apply_pi(v, n, s)?;
            for (j, &b) in elems.iter().enumerate() {
                out[j] = p.get(&b).copied().unwrap_or(0);
            }
        }
        pairs.push(pair);
    }
    Ok(DoubleSequence { pairs })
}

/// Reconstructs the element of `chain_to_globular(k)` with the given
/// double sequence: the negative components are exactly its grade parts.
pub fn from_double_sequence(k: &ChainComplex, ds: &DoubleSequence) -> Result<GVec> {
    ds.validate(k)?;
    let mut offset = 0;
    let mut out = GVec::new();
    for (n, (lo, _)) in ds.pairs.iter().enumerate() {
        for (j, &c) in lo.iter().enumerate() {
            if c != 0 {
                out.insert(offset + j, c);
            }
        }
        offset += k.ranks[n];
    }
    Ok(out)
}

/// The free globular group on the cells of a polygraph, with the
/// projections induced by arrow boundaries.
pub fn linearized(x: &Polygraph) -> Result<GlobularGroup> {
    let ctx = LinCtx::new(x);
    let dims: Vec<usize> = x.cells().iter().map(|c| c.dim).collect();
    let mut g = GlobularGroup::new(dims);
    for c in x.cells() {
        for k in 0..c.dim {
            for s in [Sign::Neg, Sign::Pos] {
                let v = ctx.delta_boundary(&Term::Gen(c.id), k, s)?;
                let w: GVec = v.iter().map(|(cell, coef)| (cell as usize, coef)).collect();
                g.set_pi(c.id as usize, k, s, w);
            }
        }
    }
    g.validate()?;
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::ClassTag;

    fn interval_group() -> GlobularGroup {
        let mut g = GlobularGroup::new(vec![0, 0, 1]);
        g.set_pi(2, 0, Sign::Neg, GVec::from([(0, 1)]));
        g.set_pi(2, 0, Sign::Pos, GVec::from([(1, 1)]));
        g
    }

    fn globe2() -> Polygraph {
        let mut p = Polygraph::new(ClassTag::Positive);
        let x = p.add_cell0();
        let y = p.add_cell0();
        let f = p.add_cell(1, Term::Gen(x), Term::Gen(y));
        let g = p.add_cell(1, Term::Gen(x), Term::Gen(y));
        p.add_cell(2, Term::Gen(f), Term::Gen(g));
        p
    }

    #[test]
    fn interval_linearizes_to_the_expected_complex() {
        let g = interval_group();
        g.validate().unwrap();
        let k = globular_to_chain(&g).unwrap();
        assert_eq!(k.ranks, vec![2, 1]);
        assert_eq!(k.d[1], vec![vec![-1], vec![1]]);
    }

    #[test]
    fn zero_differential_gives_coinciding_projections() {
        let k = ChainComplex::new(vec![2, 2], vec![Vec::new(), vec![vec![0, 0], vec![0, 0]]]);
        let g = chain_to_globular(&k).unwrap();
        for b in 2..4 {
            assert_eq!(
                g.pi_basis(b, 0, Sign::Neg).unwrap(),
                g.pi_basis(b, 0, Sign::Pos).unwrap()
            );
        }
    }

    #[test]
    fn chain_round_trip_is_the_identity() {
        let k = ChainComplex::new(
            vec![2, 2, 1],
            vec![
                Vec::new(),
                vec![vec![-1, -1], vec![1, 1]],
                vec![vec![-1], vec![1]],
            ],
        );
        k.validate().unwrap();
        let g = chain_to_globular(&k).unwrap();
        assert_eq!(globular_to_chain(&g).unwrap(), k);
    }

    #[test]
    fn polygraph_linearization_satisfies_the_relations() {
        let p = globe2();
        let g = linearized(&p).unwrap();
        let k = globular_to_chain(&g).unwrap();
        assert_eq!(k.ranks, vec![2, 2, 1]);
        assert_eq!(k.d[2], vec![vec![-1], vec![1]]);
        assert_eq!(k.d[1], vec![vec![-1, -1], vec![1, 1]]);
    }

    #[test]
    fn globular_round_trip_is_unitriangular_on_the_basis() {
        let p = globe2();
        let g = linearized(&p).unwrap();
        let k = globular_to_chain(&g).unwrap();
        let g2 = chain_to_globular(&k).unwrap();
        let phi = |v: &GVec| -> GVec {
            let mut out = GVec::new();
            for n in 0..=g.dim() {
                let part = g.grade_part(&g.apply_pi(v, n, Sign::Neg).unwrap(), n);
                out = gvec_add(&out, &part);
            }
            out
        };
        for b in 0..g.dims.len() {
            let unit = GVec::from([(b, 1)]);
            assert_eq!(phi(&unit).get(&b), Some(&1));
            for n in 0..=g.dim() {
                for s in [Sign::Neg, Sign::Pos] {
                    let lhs = phi(&g.apply_pi(&unit, n, s).unwrap());
                    let rhs = g2.apply_pi(&phi(&unit), n, s).unwrap();
                    assert_eq!(lhs, rhs, "projection {n} {s:?} fails on basis {b}");
                }
            }
        }
    }

    #[test]
    fn double_sequences_round_trip_and_project() {
        let p = globe2();
        let g = linearized(&p).unwrap();
        let k = globular_to_chain(&g).unwrap();
        let g2 = chain_to_globular(&k).unwrap();
        let v = GVec::from([(0, 2), (2, -1), (4, 3)]);
        let ds = to_double_sequence(&g2, &v).unwrap();
        ds.validate(&k).unwrap();
        assert_eq!(from_double_sequence(&k, &ds).unwrap(), v);
        for n in 0..=2 {
            for s in [Sign::Neg, Sign::Pos] {
                let via_group = to_double_sequence(&g2, &g2.apply_pi(&v, n, s).unwrap()).unwrap();
                assert_eq!(via_group, ds.pi(n, s), "grade {n} {s:?}");
            }
        }
    }

    #[test]
    fn violations_are_reported() {
        let mut g = GlobularGroup::new(vec![0, 0, 1]);
        g.set_pi(2, 0, Sign::Neg, GVec::from([(0, 1)]));
        assert!(matches!(g.validate(), Err(Error::GlobularRelationViolated(_))));
        let k = ChainComplex::new(
            vec![1, 1, 1],
            vec![Vec::new(), vec![vec![1]], vec![vec![1]]],
        );
        assert!(matches!(k.validate(), Err(Error::GlobularRelationViolated(_))));
    }
}
