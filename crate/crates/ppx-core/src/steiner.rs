//! Tensor products, cones and suspensions.
//!
//! At the group level the constructions are given by explicit projection
//! formulas on a pair basis. At the polygraph level each generating cell
//! of a tensor or cone is attached along arrow terms reconstructed from
//! its linear boundaries; every reconstruction is certified by
//! re-linearization, which is the operational form of Steiner
//! representability used throughout this module.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::group::{gvec_add, gvec_scale, gvec_sub, ChainComplex, DoubleSequence, GVec, GlobularGroup};
use crate::lin::LinCtx;
use crate::poly::{CellId, ClassTag, Polygraph, Sign, Term};

/// Iterated cone and tensor constructors refuse inputs above this bound.
pub const CONSTRUCTION_BOUND: usize = 5;

/// An integer vector over the pair basis of a tensor of globular groups.
pub type PairVec = BTreeMap<(usize, usize), i64>;

fn sign_pow(s: Sign, i: usize) -> Sign {
    if i % 2 == 0 {
        s
    } else {
        s.flip()
    }
}

fn pv_trim(v: &mut PairVec) {
    v.retain(|_, c| *c != 0);
}

fn gv_unit(i: usize) -> GVec {
    GVec::from([(i, 1)])
}

/// The boundary projection on a tensor of globular groups:
/// `π_n^ε(g ⊗ h) = Σ_i (π_i^ε − π_{i−1}^ε) g ⊗ π_{n−i}^{±ε} h`, where the
/// sign on the right factor flips with the parity of `i` and `π_{−1} = 0`.
pub fn tensor_pi(
    gg: &GlobularGroup,
    hh: &GlobularGroup,
    v: &PairVec,
    n: usize,
    s: Sign,
) -> Result<PairVec> {
    let mut out = PairVec::new();
    for (&(g, h), &c) in v {
        for i in 0..=n.min(gg.dims[g]) {
            let mut left = gg.pi_basis(g, i, s)?;
            if i > 0 {
                left = gvec_sub(&left, &gg.pi_basis(g, i - 1, s)?);
            }
            if left.is_empty() {
                continue;
            }
            let right = hh.pi_basis(h, n - i, sign_pow(s, i))?;
            for (&a, &ca) in &left {
                for (&b, &cb) in &right {
                    *out.entry((a, b)).or_insert(0) += c * ca * cb;
                }
            }
        }
    }
    pv_trim(&mut out);
    Ok(out)
}

/// A tensor of two globular groups together with its pair basis layout.
/// Basis element `k` of the tensor is the pair `pairs[k]`, pairs being
/// ordered by total dimension and then by the two component indices.
pub struct TensorGroup {
    pub group: GlobularGroup,
    pub pairs: Vec<(usize, usize)>,
    pub index: BTreeMap<(usize, usize), usize>,
}

impl TensorGroup {
    pub fn to_global(&self, v: &PairVec) -> Result<GVec> {
        let mut out = GVec::new();
        for (p, &c) in v {
            let i = self.index.get(p).ok_or_else(|| {
                Error::GlobularRelationViolated(format!("pair {p:?} is not in the tensor basis"))
            })?;
            out.insert(*i, c);
        }
        Ok(out)
    }
}

/// The tensor of two globular groups on the pair basis.
pub fn tensor_globular(gg: &GlobularGroup, hh: &GlobularGroup) -> Result<TensorGroup> {
    let mut pairs = Vec::new();
    for g in 0..gg.dims.len() {
        for h in 0..hh.dims.len() {
            pairs.push((g, h));
        }
    }
    pairs.sort_by_key(|&(g, h)| (gg.dims[g] + hh.dims[h], g, h));
    let index: BTreeMap<(usize, usize), usize> =
        pairs.iter().enumerate().map(|(i, &p)| (p, i)).collect();
    let dims: Vec<usize> = pairs.iter().map(|&(g, h)| gg.dims[g] + hh.dims[h]).collect();
    let mut group = GlobularGroup::new(dims.clone());
    for (idx, &(g, h)) in pairs.iter().enumerate() {
        let unit = PairVec::from([((g, h), 1)]);
        for k in 0..dims[idx] {
            for s in [Sign::Neg, Sign::Pos] {
                let pv = tensor_pi(gg, hh, &unit, k, s)?;
                let mut w = GVec::new();
                for (p, &c) in &pv {
                    w.insert(index[p], c);
                }
                group.set_pi(idx, k, s, w);
            }
        }
    }
    group.validate()?;
    Ok(TensorGroup { group, pairs, index })
}

/// The tensor of chain complexes with the signed differential
/// `∂(k ⊗ l) = ∂k ⊗ l + (−1)^i k ⊗ ∂l`. Grade `n` is based on triples
/// (grade `i`, position in `K_i`, position in `L_{n−i}`) ordered by
/// `(i, p, q)`.
pub fn tensor_chain(k: &ChainComplex, l: &ChainComplex) -> ChainComplex {
    let top = k.dim() + l.dim();
    let mut layout: Vec<Vec<(usize, usize, usize)>> = vec![Vec::new(); top + 1];
    for i in 0..k.ranks.len() {
        for j in 0..l.ranks.len() {
            for p in 0..k.ranks[i] {
                for q in 0..l.ranks[j] {
                    layout[i + j].push((i, p, q));
                }
            }
        }
    }
    for g in &mut layout {
        g.sort_unstable();
    }
    let pos: Vec<BTreeMap<(usize, usize, usize), usize>> = layout
        .iter()
        .map(|g| g.iter().enumerate().map(|(n, &t)| (t, n)).collect())
        .collect();
    let ranks: Vec<usize> = layout.iter().map(|g| g.len()).collect();
    let mut d = vec![Vec::new(); ranks.len()];
    for n in 1..ranks.len() {
        let mut mat = vec![vec![0i64; ranks[n]]; ranks[n - 1]];
        for (col, &(i, p, q)) in layout[n].iter().enumerate() {
            let j = n - i;
            if i >= 1 {
                for r in 0..k.ranks[i - 1] {
                    let e = k.d[i][r][p];
                    if e != 0 {
                        mat[pos[n - 1][&(i - 1, r, q)]][col] += e;
                    }
                }
            }
            if j >= 1 {
                let sign = if i % 2 == 0 { 1 } else { -1 };
                for r in 0..l.ranks[j - 1] {
                    let e = l.d[j][r][q];
                    if e != 0 {
                        mat[pos[n - 1][&(i, p, r)]][col] += sign * e;
                    }
                }
            }
        }
        d[n] = mat;
    }
    ChainComplex::new(ranks, d)
}

/// The unit globular group: one generator in dimension zero.
pub fn unit_group() -> GlobularGroup {
    GlobularGroup::new(vec![0])
}

/// The augmentation sending every basis element to one, which is the
/// canonical augmentation of the linearization of a polygraph.
pub fn unit_augmentation(g: &GlobularGroup) -> Vec<i64> {
    vec![1; g.dims.len()]
}

fn eval_aug(e: &[i64], v: &GVec) -> i64 {
    v.iter().map(|(&b, &c)| e[b] * c).sum()
}

fn check_augmentation(g: &GlobularGroup, e: &[i64]) -> Result<()> {
    if e.len() != g.dims.len() {
        return Err(Error::HypothesisFailed(
            "augmentation must assign a value to every basis element".into(),
        ));
    }
    for b in 0..g.dims.len() {
        for s in [Sign::Neg, Sign::Pos] {
            if eval_aug(e, &g.pi_basis(b, 0, s)?) != e[b] {
                return Err(Error::HypothesisFailed(format!(
                    "augmentation is not constant along the projections of basis element {b}"
                )));
            }
        }
    }
    Ok(())
}

/// The cone of an augmented globular group. Basis layout: the base copy
/// of `G` first (same indices), then `T` of every basis element, then the
/// apex.
pub struct ConeGroup {
    pub group: GlobularGroup,
    size: usize,
}

impl ConeGroup {
    pub fn base(&self, i: usize) -> usize {
        i
    }

    pub fn t(&self, i: usize) -> usize {
        self.size + i
    }

    pub fn apex(&self) -> usize {
        2 * self.size
    }

    pub fn lift_t(&self, v: &GVec) -> GVec {
        v.iter().map(|(&b, &c)| (self.t(b), c)).collect()
    }
}

/// Builds the cone on an augmented globular group: the projections act as
/// in `G` on the base, the apex is a point, and on `T g` they are
/// `π_k^−(Tg) = T(π_{k−1}^+ g)` with `e(g)` apexes at the bottom, and
/// `π_k^+(Tg) = T(π_{k−1}^− g) + π_k^+ g − π_{k−1}^− g` ending in
/// `π_0^+ g`.
pub fn cone_group(g: &GlobularGroup, e: &[i64]) -> Result<ConeGroup> {
    check_augmentation(g, e)?;
    let n = g.dims.len();
    let mut dims = g.dims.clone();
    dims.extend(g.dims.iter().map(|d| d + 1));
    dims.push(0);
    let mut group = GlobularGroup::new(dims);
    let cone = ConeGroup { group: GlobularGroup::new(Vec::new()), size: n };
    for b in 0..n {
        for k in 0..g.dims[b] {
            for s in [Sign::Neg, Sign::Pos] {
                group.set_pi(b, k, s, g.pi_basis(b, k, s)?);
            }
        }
        let m = g.dims[b] + 1;
        for k in 0..m {
            let neg = if k == 0 {
                gvec_scale(&gv_unit(cone.apex()), e[b])
            } else {
                cone.lift_t(&g.pi_basis(b, k - 1, Sign::Pos)?)
            };
            let pos = if k == 0 {
                g.pi_basis(b, 0, Sign::Pos)?
            } else {
                let lifted = cone.lift_t(&g.pi_basis(b, k - 1, Sign::Neg)?);
                gvec_sub(&gvec_add(&lifted, &g.pi_basis(b, k, Sign::Pos)?), &g.pi_basis(b, k - 1, Sign::Neg)?)
            };
            group.set_pi(cone.t(b), k, Sign::Neg, neg);
            group.set_pi(cone.t(b), k, Sign::Pos, pos);
        }
    }
    group.validate()?;
    Ok(ConeGroup { group, size: n })
}

/// The suspension of an augmented globular group: every basis element
/// moves up one dimension, a fresh point is added, the negative bottom
/// projection vanishes and the positive one lands on the point with
/// multiplicity `e(g)`.
pub struct SuspendedGroup {
    pub group: GlobularGroup,
    size: usize,
}

impl SuspendedGroup {
    pub fn shifted(&self, i: usize) -> usize {
        i
    }

    pub fn point(&self) -> usize {
        self.size
    }
}

pub fn suspend(g: &GlobularGroup, e: &[i64]) -> Result<SuspendedGroup> {
    check_augmentation(g, e)?;
    let n = g.dims.len();
    let mut dims: Vec<usize> = g.dims.iter().map(|d| d + 1).collect();
    dims.push(0);
    let mut group = GlobularGroup::new(dims);
    for b in 0..n {
        group.set_pi(b, 0, Sign::Neg, GVec::new());
        group.set_pi(b, 0, Sign::Pos, gvec_scale(&gv_unit(n), e[b]));
        for k in 1..=g.dims[b] {
            for s in [Sign::Neg, Sign::Pos] {
                group.set_pi(b, k, s, g.pi_basis(b, k - 1, s)?);
            }
        }
    }
    group.validate()?;
    Ok(SuspendedGroup { group, size: n })
}

/// The linear presentation of a polygraph used for term reconstruction:
/// its chain complex with the cell basis, the counting augmentation, and
/// one atom (the double sequence of the generator) per cell.
pub struct BasedComplex {
    pub complex: ChainComplex,
    pub augmentation: Vec<i64>,
    pub atoms: Vec<DoubleSequence>,
    dims: Vec<usize>,
    grades: Vec<Vec<usize>>,
    pos: Vec<usize>,
}

impl BasedComplex {
    fn empty() -> BasedComplex {
        BasedComplex {
            complex: ChainComplex::new(Vec::new(), Vec::new()),
            augmentation: Vec::new(),
            atoms: Vec::new(),
            dims: Vec::new(),
            grades: Vec::new(),
            pos: Vec::new(),
        }
    }

    fn ensure_grade(&mut self, n: usize) {
        while self.complex.ranks.len() <= n {
            self.complex.ranks.push(0);
            self.complex.d.push(Vec::new());
            self.grades.push(Vec::new());
            for a in &mut self.atoms {
                a.pairs.push((Vec::new(), Vec::new()));
            }
        }
    }

    /// Appends a basis element of grade `n` whose atom has the given
    /// lower pairs (grade parts of the projections below `n`).
    fn push_atom(&mut self, n: usize, lower: Vec<(Vec<i64>, Vec<i64>)>) {
        self.ensure_grade(n);
        let id = self.dims.len();
        self.dims.push(n);
        let p = self.grades[n].len();
        self.grades[n].push(id);
        self.pos.push(p);
        self.complex.ranks[n] += 1;
        let mut pairs: Vec<(Vec<i64>, Vec<i64>)> = Vec::new();
        for (g, r) in self.complex.ranks.iter().enumerate() {
            if g < n {
                pairs.push(lower[g].clone());
            } else if g == n {
                let mut v = vec![0i64; *r];
                v[p] = 1;
                pairs.push((v.clone(), v));
            } else {
                pairs.push((vec![0; *r], vec![0; *r]));
            }
        }
        for a in self.atoms.iter_mut() {
            let row = &mut a.pairs[n];
            row.0.push(0);
            row.1.push(0);
        }
        self.atoms.push(DoubleSequence { pairs });
        if n >= 1 {
            let col: Vec<i64> = (0..self.complex.ranks[n - 1])
                .map(|r| lower[n - 1].1[r] - lower[n - 1].0[r])
                .collect();
            let mat = &mut self.complex.d[n];
            mat.resize(self.complex.ranks[n - 1], Vec::new());
            for (r, row) in mat.iter_mut().enumerate() {
                row.resize(self.complex.ranks[n] - 1, 0);
                row.push(col[r]);
            }
        } else {
            self.augmentation.push(1);
        }
        if n + 1 < self.complex.ranks.len() {
            let cols = self.complex.ranks[n + 1];
            self.complex.d[n + 1].push(vec![0; cols]);
        }
    }

    pub fn grade_of(&self, id: usize) -> usize {
        self.dims[id]
    }

    pub fn position_of(&self, id: usize) -> usize {
        self.pos[id]
    }

    pub fn id_at(&self, grade: usize, p: usize) -> usize {
        self.grades[grade][p]
    }

    /// Converts a per-grade coordinate vector to a vector over basis ids.
    pub fn to_gvec(&self, grade: usize, v: &[i64]) -> GVec {
        let mut out = GVec::new();
        for (p, &c) in v.iter().enumerate() {
            if c != 0 {
                out.insert(self.grades[grade][p], c);
            }
        }
        out
    }

    /// Slices a vector over basis ids into its grade component.
    pub fn grade_slice(&self, v: &GVec, grade: usize) -> Vec<i64> {
        let mut out = vec![0i64; self.complex.ranks[grade]];
        for (&b, &c) in v {
            if self.dims[b] == grade {
                out[self.pos[b]] = c;
            }
        }
        out
    }

    /// Checks the documented invariants: the chain complex is valid, each
    /// atom is a coherent double sequence whose top pair is the element
    /// itself, and each atom has augmentation one.
    pub fn validate(&self) -> Result<()> {
        self.complex.validate()?;
        for (id, a) in self.atoms.iter().enumerate() {
            a.validate(&self.complex)?;
            let n = self.dims[id];
            let mut unit = vec![0i64; self.complex.ranks[n]];
            unit[self.pos[id]] = 1;
            if a.pairs[n].0 != unit || a.pairs[n].1 != unit {
                return Err(Error::GlobularRelationViolated(format!(
                    "atom of basis element {id} does not have itself as top pair"
                )));
            }
            for side in [&a.pairs[0].0, &a.pairs[0].1] {
                let aug: i64 = side.iter().zip(&self.augmentation).map(|(&c, &e)| c * e).sum();
                if aug != 1 {
                    return Err(Error::GlobularRelationViolated(format!(
                        "atom of basis element {id} has augmentation {aug}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// The based complex of a polygraph: cells are the basis, atoms are the
/// double sequences of the generators.
pub fn based_complex(x: &Polygraph) -> Result<BasedComplex> {
    let ctx = LinCtx::new(x);
    let mut bc = BasedComplex::empty();
    bc.ensure_grade(0);
    for c in x.cells() {
        let mut lower = Vec::new();
        for k in 0..c.dim {
            let mut pair = (Vec::new(), Vec::new());
            for (s, out) in [(Sign::Neg, &mut pair.0), (Sign::Pos, &mut pair.1)] {
                let lc = ctx.delta_boundary(&Term::Gen(c.id), k, s)?;
                let mut v = vec![0i64; bc.complex.ranks[k]];
                for (cell, coef) in lc.iter() {
                    if x.cell(cell)?.dim == k {
                        v[bc.pos[cell as usize]] = coef;
                    }
                }
                *out = v;
            }
            lower.push(pair);
        }
        bc.push_atom(c.dim, lower);
    }
    Ok(bc)
}

struct Extract<'a> {
    bc: &'a BasedComplex,
    rank: BTreeMap<usize, usize>,
}

fn atom_support(bc: &BasedComplex, id: usize) -> BTreeSet<usize> {
    let mut out = BTreeSet::new();
    for (g, (lo, hi)) in bc.atoms[id].pairs.iter().enumerate() {
        for side in [lo, hi] {
            for (p, &c) in side.iter().enumerate() {
                if c != 0 {
                    out.insert(bc.grades[g][p]);
                }
            }
        }
    }
    out.remove(&id);
    out
}

impl<'a> Extract<'a> {
    /// Prepares the orders over the basis elements relevant to `ds`: the
    /// support of the sequence together with everything its atoms touch.
    fn new(bc: &'a BasedComplex, ds: &DoubleSequence) -> Extract<'a> {
        let mut universe = BTreeSet::new();
        let mut stack = Vec::new();
        for (g, (lo, hi)) in ds.pairs.iter().enumerate() {
            for side in [lo, hi] {
                for (p, &c) in side.iter().enumerate() {
                    if c != 0 {
                        stack.push(bc.grades[g][p]);
                    }
                }
            }
        }
        while let Some(id) = stack.pop() {
            if !universe.insert(id) {
                continue;
            }
            for dep in atom_support(bc, id) {
                stack.push(dep);
            }
        }
        let mut preds: BTreeMap<usize, BTreeSet<usize>> =
            universe.iter().map(|&u| (u, BTreeSet::new())).collect();
        for &v in &universe {
            for (g, (lo, _)) in bc.atoms[v].pairs.iter().enumerate() {
                for (p, &c) in lo.iter().enumerate() {
                    if c != 0 {
                        let u = bc.grades[g][p];
                        if u != v && universe.contains(&u) {
                            preds.get_mut(&v).unwrap().insert(u);
                        }
                    }
                }
            }
        }
        let mut rank = BTreeMap::new();
        let mut remaining: BTreeSet<usize> = universe.clone();
        let mut next = 0usize;
        while !remaining.is_empty() {
            let ready: Vec<usize> = remaining
                .iter()
                .copied()
                .filter(|v| preds[v].iter().all(|u| !remaining.contains(u)))
                .collect();
            if ready.is_empty() {
                for &v in &remaining {
                    rank.insert(v, usize::MAX);
                }
                break;
            }
            for v in ready {
                rank.insert(v, next);
                next += 1;
                remaining.remove(&v);
            }
        }
        Extract { bc, rank }
    }

    fn top_grade(&self, ds: &DoubleSequence) -> Result<usize> {
        for n in (0..ds.pairs.len()).rev() {
            let (lo, hi) = &ds.pairs[n];
            if lo.iter().any(|&c| c != 0) || hi.iter().any(|&c| c != 0) {
                if lo != hi {
                    return Err(Error::ExtractionFailed(format!(
                        "top grade {n} has distinct negative and positive components"
                    )));
                }
                if lo.iter().any(|&c| c < 0) {
                    return Err(Error::ExtractionFailed(format!(
                        "top grade {n} has a negative coefficient"
                    )));
                }
                return Ok(n);
            }
        }
        Err(Error::ExtractionFailed("the zero element is not an arrow".into()))
    }

    fn extract(&self, ds: &DoubleSequence) -> Result<Term> {
        let m = self.top_grade(ds)?;
        let top = &ds.pairs[m].0;
        if m == 0 {
            let hits: Vec<usize> =
                top.iter().enumerate().filter(|(_, &c)| c != 0).map(|(p, _)| p).collect();
            if hits.len() != 1 || top[hits[0]] != 1 {
                return Err(Error::ExtractionFailed(
                    "a zero-dimensional arrow must be a single point".into(),
                ));
            }
            return Ok(Term::Gen(self.bc.grades[0][hits[0]] as CellId));
        }
        let total: i64 = top.iter().sum();
        if total == 1 {
            let p = top.iter().position(|&c| c == 1).unwrap();
            return self.strip(ds, self.bc.grades[m][p]);
        }
        let mut remaining: BTreeMap<usize, i64> = top
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(p, &c)| (self.bc.grades[m][p], c))
            .collect();
        let mut front = ds.pairs[m - 1].0.clone();
        let mut parts = Vec::new();
        while !remaining.is_empty() {
            let mut candidates: Vec<usize> = remaining
                .keys()
                .copied()
                .filter(|&a| {
                    self.bc.atoms[a].pairs[m - 1]
                        .0
                        .iter()
                        .zip(&front)
                        .all(|(&need, &have)| need <= have)
                })
                .collect();
            candidates.sort_by_key(|&a| (self.rank.get(&a).copied().unwrap_or(usize::MAX), a));
            let Some(&a) = candidates.first() else {
                return Err(Error::ExtractionFailed(
                    "no remaining atom fits the current frontier; the support order is cyclic or the element is not a composite of atoms"
                        .into(),
                ));
            };
            let at = &self.bc.atoms[a];
            let next: Vec<i64> = front
                .iter()
                .enumerate()
                .map(|(r, &c)| c + at.pairs[m - 1].1[r] - at.pairs[m - 1].0[r])
                .collect();
            let mut piece = DoubleSequence {
                pairs: ds
                    .pairs
                    .iter()
                    .enumerate()
                    .map(|(g, pair)| {
                        if g < m - 1 {
                            pair.clone()
                        } else {
                            (
                                vec![0; self.bc.complex.ranks[g]],
                                vec![0; self.bc.complex.ranks[g]],
                            )
                        }
                    })
                    .collect(),
            };
            piece.pairs[m - 1] = (front.clone(), next.clone());
            let mut unit = vec![0i64; self.bc.complex.ranks[m]];
            unit[self.bc.pos[a]] = 1;
            piece.pairs[m] = (unit.clone(), unit);
            parts.push(self.strip(&piece, a)?);
            front = next;
            let e = remaining.get_mut(&a).unwrap();
            *e -= 1;
            if *e == 0 {
                remaining.remove(&a);
            }
        }
        if front != ds.pairs[m - 1].1 {
            return Err(Error::ExtractionFailed(
                "the atoms of the top grade do not connect the source to the target".into(),
            ));
        }
        Ok(Term::comp_all(parts, m - 1))
    }

    /// Writes a cell with a single top atom as that atom whiskered by
    /// lower context, peeling the context one grade at a time from the
    /// top.
    fn strip(&self, w: &DoubleSequence, a: usize) -> Result<Term> {
        let at = &self.bc.atoms[a];
        if w.pairs == at.pairs {
            return Ok(Term::Gen(a as CellId));
        }
        let m = self.bc.dims[a];
        let Some(k) = (0..m).rev().find(|&j| w.pairs[j] != at.pairs[j]) else {
            return Err(Error::ExtractionFailed(format!(
                "cell around atom {a} differs from the atom only above its dimension"
            )));
        };
        if k == 0 {
            return Err(Error::ExtractionFailed(format!(
                "cell around atom {a} has padding at grade zero"
            )));
        }
        let x_lo: Vec<i64> =
            w.pairs[k].0.iter().zip(&at.pairs[k].0).map(|(&wc, &ac)| wc - ac).collect();
        let x_hi: Vec<i64> =
            w.pairs[k].1.iter().zip(&at.pairs[k].1).map(|(&wc, &ac)| wc - ac).collect();
        if x_lo != x_hi || x_lo.iter().any(|&c| c < 0) {
            return Err(Error::ExtractionFailed(format!(
                "padding around atom {a} at grade {k} is not a common whisker"
            )));
        }
        let supp_of = |g: usize, v: &Vec<i64>| -> BTreeSet<usize> {
            v.iter()
                .enumerate()
                .filter(|(_, &c)| c != 0)
                .map(|(p, _)| self.bc.grades[g][p])
                .collect()
        };
        let unit_supp: BTreeSet<usize> = supp_of(k, &at.pairs[k].0)
            .union(&supp_of(k, &at.pairs[k].1))
            .copied()
            .collect();
        let padding_supp = supp_of(k, &x_lo);
        let universe: BTreeSet<usize> =
            padding_supp.union(&unit_supp).copied().collect();
        let wire = |id: usize, s: Sign| -> BTreeSet<usize> {
            let pair = &self.bc.atoms[id].pairs[k - 1];
            supp_of(k - 1, if s == Sign::Neg { &pair.0 } else { &pair.1 })
        };
        let mut edges: BTreeMap<usize, BTreeSet<usize>> =
            universe.iter().map(|&u| (u, BTreeSet::new())).collect();
        for &u in &universe {
            let out = wire(u, Sign::Pos);
            for &v in &universe {
                if u != v && out.intersection(&wire(v, Sign::Neg)).next().is_some() {
                    edges.get_mut(&u).unwrap().insert(v);
                }
            }
        }
        let reach = |start: &BTreeSet<usize>| -> BTreeSet<usize> {
            let mut seen = BTreeSet::new();
            let mut stack: Vec<usize> =
                start.iter().flat_map(|u| edges[u].iter().copied()).collect();
            while let Some(v) = stack.pop() {
                if seen.insert(v) {
                    stack.extend(edges[&v].iter().copied());
                }
            }
            seen
        };
        let after_unit = reach(&unit_supp);
        let mut left = vec![0i64; x_lo.len()];
        let mut right = vec![0i64; x_lo.len()];
        for (p, &c) in x_lo.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let id = self.bc.grades[k][p];
            let to_unit = reach(&BTreeSet::from([id]))
                .intersection(&unit_supp)
                .next()
                .is_some();
            let from_unit = after_unit.contains(&id);
            match (to_unit, from_unit) {
                (true, true) => {
                    return Err(Error::ExtractionFailed(format!(
                        "support order around atom {a} is cyclic at basis element {id}"
                    )))
                }
                (true, false) => left[p] = c,
                _ => right[p] = c,
            }
        }
        let boundary_of = |v: &Vec<i64>| -> Vec<i64> {
            let mut out = vec![0i64; self.bc.complex.ranks[k - 1]];
            for (p, &c) in v.iter().enumerate() {
                if c != 0 {
                    let id = self.bc.grades[k][p];
                    let pair = &self.bc.atoms[id].pairs[k - 1];
                    for r in 0..out.len() {
                        out[r] += c * (pair.1[r] - pair.0[r]);
                    }
                }
            }
            out
        };
        let d_left = boundary_of(&left);
        let d_right = boundary_of(&right);
        let blank = |g: usize| -> (Vec<i64>, Vec<i64>) {
            (vec![0; self.bc.complex.ranks[g]], vec![0; self.bc.complex.ranks[g]])
        };
        let side_ds = |x: &Vec<i64>, lo: Vec<i64>, hi: Vec<i64>| -> DoubleSequence {
            let mut pairs: Vec<(Vec<i64>, Vec<i64>)> = Vec::with_capacity(w.pairs.len());
            for g in 0..w.pairs.len() {
                if g + 1 < k {
                    pairs.push(w.pairs[g].clone());
                } else {
                    pairs.push(blank(g));
                }
            }
            pairs[k - 1] = (lo, hi);
            pairs[k] = (x.clone(), x.clone());
            DoubleSequence { pairs }
        };
        let mut parts = Vec::new();
        if left.iter().any(|&c| c != 0) {
            let hi: Vec<i64> =
                w.pairs[k - 1].0.iter().zip(&d_left).map(|(&c, &d)| c + d).collect();
            let a_ds = side_ds(&left, w.pairs[k - 1].0.clone(), hi);
            check_nonneg(&a_ds, "left whisker")?;
            parts.push(self.extract(&a_ds)?);
        }
        let core_lo: Vec<i64> =
            w.pairs[k - 1].0.iter().zip(&d_left).map(|(&c, &d)| c + d).collect();
        let core_hi: Vec<i64> =
            w.pairs[k - 1].1.iter().zip(&d_right).map(|(&c, &d)| c - d).collect();
        let mut core = DoubleSequence { pairs: w.pairs.clone() };
        core.pairs[k] = at.pairs[k].clone();
        core.pairs[k - 1] = (core_lo, core_hi);
        check_nonneg(&core, "whisker core")?;
        parts.push(self.strip(&core, a)?);
        if right.iter().any(|&c| c != 0) {
            let lo: Vec<i64> =
                w.pairs[k - 1].1.iter().zip(&d_right).map(|(&c, &d)| c - d).collect();
            let r_ds = side_ds(&right, lo, w.pairs[k - 1].1.clone());
            check_nonneg(&r_ds, "right whisker")?;
            parts.push(self.extract(&r_ds)?);
        }
        Ok(Term::comp_all(parts, k - 1))
    }
}

fn check_nonneg(ds: &DoubleSequence, what: &str) -> Result<()> {
    for (lo, hi) in &ds.pairs {
        if lo.iter().chain(hi).any(|&c| c < 0) {
            return Err(Error::ExtractionFailed(format!(
                "{what} has a negative component; the padding sides are misassigned"
            )));
        }
    }
    Ok(())
}

/// Reconstructs an arrow term from its double sequence over the cells of
/// a polygraph and certifies the result by re-linearization at every
/// level.
pub fn extract_term(x: &Polygraph, ds: &DoubleSequence) -> Result<Term> {
    let bc = based_complex(x)?;
    extract_with(x, &bc, ds)
}

fn extract_with(x: &Polygraph, bc: &BasedComplex, ds: &DoubleSequence) -> Result<Term> {
    if ds.pairs.len() != bc.complex.ranks.len()
        || ds.pairs.iter().zip(&bc.complex.ranks).any(|((lo, hi), &r)| lo.len() != r || hi.len() != r)
    {
        return Err(Error::ExtractionFailed(
            "double sequence does not match the grading of the polygraph".into(),
        ));
    }
    let t = Extract::new(bc, ds).extract(ds)?;
    let ctx = LinCtx::new(x);
    for (g, (lo, hi)) in ds.pairs.iter().enumerate() {
        for (s, want) in [(Sign::Neg, lo), (Sign::Pos, hi)] {
            let got = ctx.delta_boundary(&t, g, s)?;
            let mut v = vec![0i64; bc.complex.ranks[g]];
            for (cell, coef) in got.iter() {
                if bc.dims[cell as usize] == g {
                    v[bc.pos[cell as usize]] = coef;
                }
            }
            if v != **want {
                return Err(Error::ExtractionFailed(format!(
                    "reconstructed term disagrees with the requested boundary at grade {g}"
                )));
            }
        }
    }
    Ok(t)
}

/// A polygraph built one certified cell at a time, keeping its based
/// complex in sync.
struct GrowingShape {
    p: Polygraph,
    bc: BasedComplex,
}

impl GrowingShape {
    fn new() -> GrowingShape {
        let mut bc = BasedComplex::empty();
        bc.ensure_grade(0);
        GrowingShape { p: Polygraph::new(ClassTag::Positive), bc }
    }

    /// Adds a cell of dimension `n` whose full projections are
    /// prescribed: `pis[k]` is the pair of images of `π_k^±` as vectors
    /// over the cells already present. Boundary terms are reconstructed
    /// by extraction unless given, and the added cell is certified to
    /// re-linearize to exactly the prescribed projections.
    fn add(&mut self, n: usize, pis: &[(GVec, GVec)], terms: Option<(Term, Term)>) -> Result<CellId> {
        if n == 0 {
            let id = self.p.add_cell0();
            self.bc.push_atom(0, Vec::new());
            return Ok(id);
        }
        self.bc.ensure_grade(n - 1);
        let full_ds = |top_side: &dyn Fn(&(GVec, GVec)) -> GVec| -> DoubleSequence {
            let mut pairs = Vec::new();
            for g in 0..self.bc.complex.ranks.len() {
                if g + 1 < n {
                    pairs.push((
                        self.bc.grade_slice(&pis[g].0, g),
                        self.bc.grade_slice(&pis[g].1, g),
                    ));
                } else if g + 1 == n {
                    let v = self.bc.grade_slice(&top_side(&pis[n - 1]), g);
                    pairs.push((v.clone(), v));
                } else {
                    pairs.push((
                        vec![0; self.bc.complex.ranks[g]],
                        vec![0; self.bc.complex.ranks[g]],
                    ));
                }
            }
            DoubleSequence { pairs }
        };
        let (src, tgt) = match terms {
            Some(pair) => pair,
            None => {
                let src_ds = full_ds(&|p: &(GVec, GVec)| p.0.clone());
                let tgt_ds = full_ds(&|p: &(GVec, GVec)| p.1.clone());
                (extract_with(&self.p, &self.bc, &src_ds)?, extract_with(&self.p, &self.bc, &tgt_ds)?)
            }
        };
        let id = self.p.add_cell(n, src, tgt);
        let ctx = LinCtx::new(&self.p);
        for (k, want) in pis.iter().enumerate() {
            for (s, w) in [(Sign::Neg, &want.0), (Sign::Pos, &want.1)] {
                let got = ctx.delta_boundary(&Term::Gen(id), k, s)?;
                let got_gv: GVec = got.iter().map(|(c, v)| (c as usize, v)).collect();
                if got_gv != *w {
                    return Err(Error::ExtractionFailed(format!(
                        "cell {id} re-linearizes to a different projection at level {k}"
                    )));
                }
            }
        }
        let lower: Vec<(Vec<i64>, Vec<i64>)> = (0..n)
            .map(|g| (self.bc.grade_slice(&pis[g].0, g), self.bc.grade_slice(&pis[g].1, g)))
            .collect();
        self.bc.push_atom(n, lower);
        Ok(id)
    }
}

/// A generating cell of a tensor of polygraphs: the pair of factor cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TensorCell {
    pub left: CellId,
    pub right: CellId,
}

/// The tensor of two polygraphs. Cells are the pairs of factor cells in
/// order of total dimension; each cell's boundary terms are extracted
/// from the tensor-group projections and certified by re-linearization.
pub fn tensor_polygraph(x: &Polygraph, y: &Polygraph) -> Result<(Polygraph, Vec<TensorCell>)> {
    let gg = crate::group::linearized(x)?;
    let hh = crate::group::linearized(y)?;
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for g in 0..gg.dims.len() {
        for h in 0..hh.dims.len() {
            pairs.push((g, h));
        }
    }
    pairs.sort_by_key(|&(g, h)| (gg.dims[g] + hh.dims[h], g, h));
    let mut shape = GrowingShape::new();
    let mut ids: BTreeMap<(usize, usize), CellId> = BTreeMap::new();
    let mut inventory = Vec::new();
    for &(g, h) in &pairs {
        let n = gg.dims[g] + hh.dims[h];
        let unit = PairVec::from([((g, h), 1)]);
        let mut pis = Vec::new();
        for k in 0..n {
            let mut pair = (GVec::new(), GVec::new());
            for (s, out) in [(Sign::Neg, &mut pair.0), (Sign::Pos, &mut pair.1)] {
                let pv = tensor_pi(&gg, &hh, &unit, k, s)?;
                let mut w = GVec::new();
                for (p, &c) in &pv {
                    w.insert(ids[p] as usize, c);
                }
                *out = w;
            }
            pis.push(pair);
        }
        let id = shape
            .add(n, &pis, None)
            .map_err(|e| lift_extraction(e, &format!("cell {g} x {h} of the tensor")))?;
        ids.insert((g, h), id);
        inventory.push(TensorCell { left: g as CellId, right: h as CellId });
    }
    let problems = shape.p.validate();
    if !problems.is_empty() {
        return Err(Error::InvalidPolygraph(problems.join("; ")));
    }
    Ok((shape.p, inventory))
}

/// A generating cell of a cone polygraph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConeCell {
    Base(CellId),
    Apex,
    T(CellId),
}

/// The cone of a polygraph: the apex comes first, then grade by grade the
/// base cells (with their original boundary terms) and the `T`-cells,
/// whose boundaries are extracted from the cone-group projections.
pub fn cone_polygraph(x: &Polygraph) -> Result<(Polygraph, Vec<ConeCell>)> {
    let g = crate::group::linearized(x)?;
    let cg = cone_group(&g, &unit_augmentation(&g))?;
    let mut shape = GrowingShape::new();
    let mut inventory = Vec::new();
    let apex = shape.add(0, &[], None)?;
    inventory.push(ConeCell::Apex);
    let mut base_ids: BTreeMap<usize, CellId> = BTreeMap::new();
    let mut abstract_to_new: BTreeMap<usize, CellId> = BTreeMap::new();
    abstract_to_new.insert(cg.apex(), apex);
    let top = x.cells().iter().map(|c| c.dim).max().unwrap_or(0);
    for d in 0..=top + 1 {
        for c in x.cells() {
            if c.dim != d {
                continue;
            }
            let b = c.id as usize;
            let pis = cone_pis(&cg, cg.base(b), d, &abstract_to_new)?;
            let terms = if d == 0 {
                None
            } else {
                let remap = |cid: CellId| Term::Gen(base_ids[&(cid as usize)]);
                Some((
                    c.src.as_ref().unwrap().substitute(&remap),
                    c.tgt.as_ref().unwrap().substitute(&remap),
                ))
            };
            let id = shape
                .add(d, &pis, terms)
                .map_err(|e| lift_extraction(e, &format!("base cell {b} of the cone")))?;
            base_ids.insert(b, id);
            abstract_to_new.insert(cg.base(b), id);
            inventory.push(ConeCell::Base(c.id));
        }
        for c in x.cells() {
            if c.dim + 1 != d {
                continue;
            }
            let b = c.id as usize;
            let pis = cone_pis(&cg, cg.t(b), d, &abstract_to_new)?;
            let id = shape
                .add(d, &pis, None)
                .map_err(|e| lift_extraction(e, &format!("cone cell over {b}")))?;
            abstract_to_new.insert(cg.t(b), id);
            inventory.push(ConeCell::T(c.id));
        }
    }
    let problems = shape.p.validate();
    if !problems.is_empty() {
        return Err(Error::InvalidPolygraph(problems.join("; ")));
    }
    Ok((shape.p, inventory))
}

fn cone_pis(
    cg: &ConeGroup,
    idx: usize,
    n: usize,
    map: &BTreeMap<usize, CellId>,
) -> Result<Vec<(GVec, GVec)>> {
    let mut pis = Vec::new();
    for k in 0..n {
        let mut pair = (GVec::new(), GVec::new());
        for (s, out) in [(Sign::Neg, &mut pair.0), (Sign::Pos, &mut pair.1)] {
            let v = cg.group.pi_basis(idx, k, s)?;
            let mut w = GVec::new();
            for (&b, &c) in &v {
                w.insert(map[&b] as usize, c);
            }
            *out = w;
        }
        pis.push(pair);
    }
    Ok(pis)
}

fn lift_extraction(e: Error, what: &str) -> Error {
    match e {
        Error::ExtractionFailed(msg) => {
            Error::NotSteinerRepresentable(format!("{what}: {msg}"))
        }
        other => other,
    }
}

/// The globe polygraph `D_n`: two cells in every dimension below `n` and
/// a single top cell.
pub fn globe(n: usize) -> Polygraph {
    let mut p = Polygraph::new(ClassTag::Positive);
    if n == 0 {
        p.add_cell0();
        return p;
    }
    let mut lo = p.add_cell0();
    let mut hi = p.add_cell0();
    for d in 1..n {
        let a = p.add_cell(d, Term::Gen(lo), Term::Gen(hi));
        let b = p.add_cell(d, Term::Gen(lo), Term::Gen(hi));
        lo = a;
        hi = b;
    }
    p.add_cell(n, Term::Gen(lo), Term::Gen(hi));
    p
}

/// Street's oriental on `n + 1` vertices, built as an iterated cone of
/// the point.
pub fn oriental(n: usize) -> Result<Polygraph> {
    if n > CONSTRUCTION_BOUND {
        return Err(Error::BoundExceeded(format!(
            "oriental({n}) exceeds the configured bound {CONSTRUCTION_BOUND}"
        )));
    }
    let mut p = globe(0);
    for _ in 0..n {
        p = cone_polygraph(&p)?.0;
    }
    Ok(p)
}

/// The `n`-cube as the left-associated tensor power of the interval.
pub fn cube(n: usize) -> Result<Polygraph> {
    if n > CONSTRUCTION_BOUND {
        return Err(Error::BoundExceeded(format!(
            "cube({n}) exceeds the configured bound {CONSTRUCTION_BOUND}"
        )));
    }
    let mut p = globe(0);
    for _ in 0..n {
        p = tensor_polygraph(&p, &globe(1))?.0;
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{globular_to_chain, linearized, to_double_sequence};
    use crate::plex;

    fn interval_group() -> GlobularGroup {
        linearized(&globe(1)).unwrap()
    }

    #[test]
    fn unit_law_and_top_identity() {
        let g = interval_group();
        let u = unit_group();
        let t = tensor_globular(&g, &u).unwrap();
        for b in 0..3 {
            let idx = t.index[&(b, 0)];
            assert_eq!(t.group.dims[idx], g.dims[b]);
            for k in 0..g.dims[b] {
                for s in [Sign::Neg, Sign::Pos] {
                    let got = t.group.pi_basis(idx, k, s).unwrap();
                    let want: GVec = g
                        .pi_basis(b, k, s)
                        .unwrap()
                        .iter()
                        .map(|(&c, &v)| (t.index[&(c, 0)], v))
                        .collect();
                    assert_eq!(got, want);
                }
            }
        }
        let f = t.index[&(2, 0)];
        let unit = PairVec::from([((2, 0), 1)]);
        let high = tensor_pi(&g, &u, &unit, 4, Sign::Neg).unwrap();
        assert_eq!(high, unit);
        let _ = f;
    }

    #[test]
    fn interval_squared_has_the_lax_square_boundaries() {
        let g = interval_group();
        let t = tensor_globular(&g, &g).unwrap();
        let grades = t.group.grade_elems();
        assert_eq!(grades.iter().map(|v| v.len()).collect::<Vec<_>>(), vec![4, 4, 1]);
        let unit = PairVec::from([((2, 2), 1)]);
        let lo = tensor_pi(&g, &g, &unit, 1, Sign::Neg).unwrap();
        assert_eq!(
            lo,
            PairVec::from([((0, 2), 1), ((2, 1), 1), ((0, 1), -1)]),
            "source is the left-then-bottom path"
        );
        let hi = tensor_pi(&g, &g, &unit, 1, Sign::Pos).unwrap();
        assert_eq!(hi, PairVec::from([((2, 0), 1), ((1, 2), 1), ((1, 0), -1)]));
    }

    #[test]
    fn tensor_chain_matches_the_group_construction() {
        let g = interval_group();
        let t = tensor_globular(&g, &g).unwrap();
        let kt = globular_to_chain(&t.group).unwrap();
        let k = globular_to_chain(&g).unwrap();
        let kk = tensor_chain(&k, &k);
        assert_eq!(kt.ranks, kk.ranks);
        let gpos = |b: usize| -> (usize, usize) {
            let grade = g.dims[b];
            let p = g.grade_elems()[grade].iter().position(|&x| x == b).unwrap();
            (grade, p)
        };
        let layout: Vec<Vec<(usize, usize, usize)>> = {
            let mut l = vec![Vec::new(); kt.ranks.len()];
            for i in 0..k.ranks.len() {
                for j in 0..k.ranks.len() {
                    if i + j < l.len() {
                        for p in 0..k.ranks[i] {
                            for q in 0..k.ranks[j] {
                                l[i + j].push((i, p, q));
                            }
                        }
                    }
                }
            }
            for v in &mut l {
                v.sort_unstable();
            }
            l
        };
        let perm: Vec<Vec<usize>> = t
            .group
            .grade_elems()
            .iter()
            .enumerate()
            .map(|(n, elems)| {
                elems
                    .iter()
                    .map(|&idx| {
                        let (a, b) = t.pairs[idx];
                        let (i, p) = gpos(a);
                        let (_, q) = gpos(b);
                        layout[n].iter().position(|&x| x == (i, p, q)).unwrap()
                    })
                    .collect()
            })
            .collect();
        for n in 1..kt.ranks.len() {
            for col in 0..kt.ranks[n] {
                for row in 0..kt.ranks[n - 1] {
                    assert_eq!(
                        kt.d[n][row][col],
                        kk.d[n][perm[n - 1][row]][perm[n][col]],
                        "differential entry at grade {n}"
                    );
                }
            }
        }
    }

    #[test]
    fn tensor_is_associative_on_intervals() {
        let g = interval_group();
        let gh = tensor_globular(&g, &g).unwrap();
        let left = tensor_globular(&gh.group, &g).unwrap();
        let hk = tensor_globular(&g, &g).unwrap();
        let right = tensor_globular(&g, &hk.group).unwrap();
        let flat_left = |a: usize, b: usize, c: usize| left.index[&(gh.index[&(a, b)], c)];
        let flat_right = |a: usize, b: usize, c: usize| right.index[&(a, hk.index[&(b, c)])];
        let translate = |v: &GVec| -> GVec {
            v.iter()
                .map(|(&i, &coef)| {
                    let (ab, c) = left.pairs[i];
                    let (a, b) = gh.pairs[ab];
                    (flat_right(a, b, c), coef)
                })
                .collect()
        };
        for a in 0..3 {
            for b in 0..3 {
                for c in 0..3 {
                    let li = flat_left(a, b, c);
                    let ri = flat_right(a, b, c);
                    assert_eq!(left.group.dims[li], right.group.dims[ri]);
                    for k in 0..left.group.dims[li] {
                        for s in [Sign::Neg, Sign::Pos] {
                            let lv = translate(&left.group.pi_basis(li, k, s).unwrap());
                            let rv = right.group.pi_basis(ri, k, s).unwrap();
                            assert_eq!(lv, rv, "associativity at ({a},{b},{c}) level {k}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn projection_decomposition_holds() {
        let g = interval_group();
        let h = linearized(&globe(2)).unwrap();
        let minus = |a: &PairVec, b: &PairVec| -> PairVec {
            let mut out = a.clone();
            for (p, &c) in b {
                *out.entry(*p).or_insert(0) -= c;
            }
            pv_trim(&mut out);
            out
        };
        for gb in 0..g.dims.len() {
            for hb in 0..h.dims.len() {
                let unit = PairVec::from([((gb, hb), 1)]);
                for n in 1..=4usize {
                    for se in [Sign::Neg, Sign::Pos] {
                        for sd in [Sign::Neg, Sign::Pos] {
                            let lhs = minus(
                                &tensor_pi(&g, &h, &unit, n, se).unwrap(),
                                &tensor_pi(&g, &h, &unit, n - 1, sd).unwrap(),
                            );
                            let mut rhs = PairVec::new();
                            for i in 0..=n {
                                let j = n - i;
                                let gi = {
                                    let mut v = g.pi_basis(gb, i, se).unwrap();
                                    if i > 0 {
                                        v = gvec_sub(&v, &g.pi_basis(gb, i - 1, sd).unwrap());
                                    }
                                    v
                                };
                                let hj = {
                                    let mut v = h.pi_basis(hb, j, sign_pow(se, i)).unwrap();
                                    if j > 0 {
                                        v = gvec_sub(&v, &h.pi_basis(hb, j - 1, sign_pow(sd, i)).unwrap());
                                    }
                                    v
                                };
                                for (&a, &ca) in &gi {
                                    for (&b, &cb) in &hj {
                                        *rhs.entry((a, b)).or_insert(0) += ca * cb;
                                    }
                                }
                            }
                            pv_trim(&mut rhs);
                            assert_eq!(lhs, rhs, "pair ({gb},{hb}) n={n}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn cone_group_formulas_on_the_interval() {
        let g = interval_group();
        let cg = cone_group(&g, &unit_augmentation(&g)).unwrap();
        assert_eq!(cg.group.pi_basis(cg.t(0), 0, Sign::Neg).unwrap(), gv_unit(cg.apex()));
        assert_eq!(cg.group.pi_basis(cg.t(0), 0, Sign::Pos).unwrap(), gv_unit(cg.base(0)));
        assert_eq!(cg.group.pi_basis(cg.t(2), 1, Sign::Neg).unwrap(), gv_unit(cg.t(1)));
        let want = GVec::from([(cg.t(0), 1), (cg.base(2), 1), (cg.base(0), -1)]);
        assert_eq!(cg.group.pi_basis(cg.t(2), 1, Sign::Pos).unwrap(), want);
    }

    #[test]
    fn cone_top_image_of_sigma_matches_the_bookkeeping() {
        let p = globe(2);
        let g = linearized(&p).unwrap();
        let cg = cone_group(&g, &unit_augmentation(&g)).unwrap();
        let n = 2usize;
        let top = p.cells().iter().find(|c| c.dim == n).unwrap().id as usize;
        let v = gv_unit(cg.t(top));
        let mut lhs = gvec_scale(&v, if (n + 1) % 2 == 0 { 1 } else { -1 });
        for i in 0..=n {
            let sign = if i % 2 == 0 { 1 } else { -1 };
            for s in [Sign::Neg, Sign::Pos] {
                lhs = gvec_add(&lhs, &gvec_scale(&cg.group.apply_pi(&v, i, s).unwrap(), sign));
            }
        }
        let mut rhs = gv_unit(cg.apex());
        for c in p.cells() {
            let sign = if c.dim % 2 == 0 { 1 } else { -1 };
            rhs = gvec_add(&rhs, &gvec_scale(&gv_unit(cg.base(c.id as usize)), sign));
            rhs = gvec_sub(&rhs, &gvec_scale(&gv_unit(cg.t(c.id as usize)), sign));
        }
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn suspension_of_the_interval() {
        let g = interval_group();
        let sg = suspend(&g, &unit_augmentation(&g)).unwrap();
        assert_eq!(sg.group.dims, vec![1, 1, 2, 0]);
        assert_eq!(sg.group.pi_basis(2, 0, Sign::Neg).unwrap(), GVec::new());
        assert_eq!(sg.group.pi_basis(2, 0, Sign::Pos).unwrap(), gv_unit(sg.point()));
        assert_eq!(sg.group.pi_basis(2, 1, Sign::Neg).unwrap(), gv_unit(0));
    }

    #[test]
    fn extraction_recovers_generators_and_chains() {
        let mut p = Polygraph::new(ClassTag::Positive);
        let x = p.add_cell0();
        let y = p.add_cell0();
        let z = p.add_cell0();
        let f = p.add_cell(1, Term::Gen(x), Term::Gen(y));
        let gcell = p.add_cell(1, Term::Gen(y), Term::Gen(z));
        let g = linearized(&p).unwrap();
        let atom = to_double_sequence(&g, &gv_unit(f as usize)).unwrap();
        assert_eq!(extract_term(&p, &atom).unwrap(), Term::Gen(f));
        let both = to_double_sequence(
            &g,
            &GVec::from([(f as usize, 1), (gcell as usize, 1), (y as usize, -1)]),
        )
        .unwrap();
        let t = extract_term(&p, &both).unwrap();
        assert_eq!(t, Term::comp(Term::Gen(f), Term::Gen(gcell), 0));
        let broken = DoubleSequence {
            pairs: vec![
                (vec![1, 0, 0], vec![0, 0, 1]),
                (vec![1, 0], vec![1, 0]),
            ],
        };
        assert!(matches!(extract_term(&p, &broken), Err(Error::ExtractionFailed(_))));
    }

    #[test]
    fn interval_tensor_interval_is_the_lax_square_polygraph() {
        let (sq, inv) = tensor_polygraph(&globe(1), &globe(1)).unwrap();
        assert_eq!(sq.cells().len(), 9);
        let counts: Vec<usize> = (0..=2).map(|d| sq.cells_of_dim(d).len()).collect();
        assert_eq!(counts, vec![4, 4, 1]);
        assert_eq!(inv.len(), 9);
        let top = sq.cells().iter().find(|c| c.dim == 2).unwrap();
        let ctx = LinCtx::new(&sq);
        let dsrc = ctx.delta(top.src.as_ref().unwrap()).unwrap();
        let pair_of = |i: usize| (inv[i].left, inv[i].right);
        let find = |l: CellId, r: CellId| {
            (0..inv.len()).find(|&i| pair_of(i) == (l, r)).unwrap() as CellId
        };
        let af = find(0, 2);
        let fb = find(2, 1);
        let ab = find(0, 1);
        assert_eq!(dsrc.get(af), 1);
        assert_eq!(dsrc.get(fb), 1);
        assert_eq!(dsrc.get(ab), -1);
        let pp = plex::Polyplex::assemble(sq.clone(), Term::Gen(top.id)).unwrap();
        assert!(plex::is_polyplex(&sq, &Term::Gen(top.id)).unwrap());
        assert!(plex::has_spherical_boundary(&pp).unwrap());
    }

    #[test]
    fn sigma_is_multiplicative_on_the_square() {
        let a = globe(1);
        let (sq, inv) = tensor_polygraph(&a, &a).unwrap();
        let mut sigma_product = BTreeMap::new();
        for cx in a.cells() {
            for cy in a.cells() {
                let sign = if (cx.dim + cy.dim) % 2 == 0 { 1 } else { -1 };
                sigma_product.insert((cx.id, cy.id), sign);
            }
        }
        for (i, c) in sq.cells().iter().enumerate() {
            let sign = if c.dim % 2 == 0 { 1 } else { -1 };
            assert_eq!(sigma_product[&(inv[i].left, inv[i].right)], sign);
        }
    }

    #[test]
    fn cone_of_point_and_interval() {
        let (c0, inv0) = cone_polygraph(&globe(0)).unwrap();
        assert_eq!(c0.cells().len(), 3);
        assert_eq!(inv0, vec![ConeCell::Apex, ConeCell::Base(0), ConeCell::T(0)]);
        let t = c0.cells().iter().find(|c| c.dim == 1).unwrap();
        assert_eq!(t.src, Some(Term::Gen(0)));
        assert_eq!(t.tgt, Some(Term::Gen(1)));

        let (c1, inv1) = cone_polygraph(&globe(1)).unwrap();
        assert_eq!(c1.cells().len(), 7);
        let counts: Vec<usize> = (0..=2).map(|d| c1.cells_of_dim(d).len()).collect();
        assert_eq!(counts, vec![3, 3, 1]);
        let tf_pos = inv1.iter().position(|c| *c == ConeCell::T(2)).unwrap();
        let tf = &c1.cells()[tf_pos];
        assert_eq!(tf.dim, 2);
        let ctx = LinCtx::new(&c1);
        let dsrc = ctx.delta(tf.src.as_ref().unwrap()).unwrap();
        let dtgt = ctx.delta(tf.tgt.as_ref().unwrap()).unwrap();
        let id_of = |want: ConeCell| {
            inv1.iter().position(|c| *c == want).unwrap() as CellId
        };
        assert_eq!(
            dsrc.support().collect::<BTreeSet<_>>(),
            BTreeSet::from([id_of(ConeCell::T(1))])
        );
        assert_eq!(dtgt.get(id_of(ConeCell::T(0))), 1);
        assert_eq!(dtgt.get(id_of(ConeCell::Base(2))), 1);
        assert_eq!(dtgt.get(id_of(ConeCell::Base(0))), -1);
    }

    #[test]
    fn oriental_cell_counts_are_binomial() {
        fn binom(n: usize, k: usize) -> usize {
            if k > n {
                return 0;
            }
            let mut r = 1usize;
            for i in 0..k {
                r = r * (n - i) / (i + 1);
            }
            r
        }
        for n in 0..=4 {
            let o = oriental(n).unwrap();
            for d in 0..=n {
                assert_eq!(
                    o.cells_of_dim(d).len(),
                    binom(n + 1, d + 1),
                    "oriental({n}) cells of dimension {d}"
                );
            }
        }
        assert!(matches!(oriental(6), Err(Error::BoundExceeded(_))));
    }

    #[test]
    fn globes_and_cubes() {
        for n in 0..=4 {
            assert_eq!(globe(n).cells().len(), 2 * n + 1);
        }
        assert_eq!(cube(0).unwrap().cells().len(), 1);
        assert_eq!(cube(1).unwrap().cells().len(), 3);
        assert_eq!(cube(2).unwrap().cells().len(), 9);
        let c3 = cube(3).unwrap();
        assert_eq!(c3.cells().len(), 27);
        let counts: Vec<usize> = (0..=3).map(|d| c3.cells_of_dim(d).len()).collect();
        assert_eq!(counts, vec![8, 12, 6, 1]);
        assert!(matches!(cube(6), Err(Error::BoundExceeded(_))));
    }

    #[test]
    fn tensor_of_plexes_is_a_spherical_plex() {
        let (p, _) = tensor_polygraph(&globe(1), &globe(2)).unwrap();
        assert_eq!(p.cells().len(), 15);
        let top = p.cells().iter().find(|c| c.dim == 3).unwrap();
        assert!(plex::is_polyplex(&p, &Term::Gen(top.id)).unwrap());
        let pp = plex::Polyplex::assemble(p.clone(), Term::Gen(top.id)).unwrap();
        assert!(plex::has_spherical_boundary(&pp).unwrap());
        assert!(plex::is_regular(&p).unwrap());
    }
}
