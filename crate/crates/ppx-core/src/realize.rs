//! Semi-simplicial realization and the oriental embedding.
//!
//! The realization of a regular polygraph is the nerve of its category of
//! plex occurrences, restricted to chains of strictly increasing
//! dimension; those are exactly the nondegenerate simplices, so the nerve
//! factors through semi-simplicial sets and no degeneracies are ever
//! materialized. Chains are stored in canonical shape coordinates: every
//! plex shape that occurs is identified with a single registered
//! representative, which is unambiguous because a plex admits no
//! nontrivial automorphism. In the other direction, a semi-simplicial set
//! embeds as the polygraph glued from one oriental per simplex.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::plex::{is_regular, plex_iso, plex_of_cell};
use crate::poly::{CellId, ClassTag, Morphism, Polygraph, Sign, Term};
use crate::steiner::{cone_polygraph, globe, ConeCell};

/// A finite semi-simplicial set, presented by its face incidences:
/// `faces[n][s]` lists the faces `d_0 .. d_n` of the `n`-simplex `s` as
/// indices into level `n - 1`. Vertices have empty rows.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SemiSimplicialSet {
    pub faces: Vec<Vec<Vec<usize>>>,
}

impl SemiSimplicialSet {
    pub fn new() -> SemiSimplicialSet {
        SemiSimplicialSet { faces: Vec::new() }
    }

    /// Appends an `n`-simplex with the given face row and returns its
    /// index within level `n`.
    pub fn push(&mut self, n: usize, faces: Vec<usize>) -> usize {
        while self.faces.len() <= n {
            self.faces.push(Vec::new());
        }
        self.faces[n].push(faces);
        self.faces[n].len() - 1
    }

    /// The number of `n`-simplices.
    pub fn size(&self, n: usize) -> usize {
        self.faces.get(n).map_or(0, |l| l.len())
    }

    /// Simplex counts per level, without trailing empty levels.
    pub fn sizes(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self.faces.iter().map(|l| l.len()).collect();
        while out.last() == Some(&0) {
            out.pop();
        }
        out
    }

    /// The highest level with a simplex in it.
    pub fn dim(&self) -> usize {
        self.sizes().len().saturating_sub(1)
    }

    /// The `i`-th face of the `n`-simplex `s`.
    pub fn face(&self, n: usize, s: usize, i: usize) -> usize {
        self.faces[n][s][i]
    }

    /// Checks row lengths, index ranges and the semi-simplicial
    /// identities `d_i d_j = d_{j-1} d_i` for `i < j`.
    pub fn validate(&self) -> Result<()> {
        for (n, level) in self.faces.iter().enumerate() {
            for (s, row) in level.iter().enumerate() {
                let want = if n == 0 { 0 } else { n + 1 };
                if row.len() != want {
                    return Err(Error::InvalidPolygraph(format!(
                        "simplex {s} of level {n} has {} faces, expected {want}",
                        row.len()
                    )));
                }
                for &f in row {
                    if f >= self.size(n - 1) {
                        return Err(Error::InvalidPolygraph(format!(
                            "simplex {s} of level {n} has a face out of range"
                        )));
                    }
                }
                for j in 0..if n >= 2 { row.len() } else { 0 } {
                    for i in 0..j {
                        if self.face(n - 1, row[j], i) != self.face(n - 1, row[i], j - 1) {
                            return Err(Error::GlobularRelationViolated(format!(
                                "d_{i} d_{j} != d_{} d_{i} on simplex {s} of level {n}",
                                j - 1
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// The coproduct, with `other`'s simplices appended after `self`'s at
    /// every level.
    pub fn disjoint_union(&self, other: &SemiSimplicialSet) -> SemiSimplicialSet {
        let mut out = self.clone();
        for (n, level) in other.faces.iter().enumerate() {
            let shift = if n == 0 { 0 } else { out.size(n - 1) - other.size(n - 1) };
            for row in level {
                out.push(n, row.iter().map(|f| f + shift).collect());
            }
        }
        out
    }
}

/// The standard `n`-simplex: `k`-simplices are the `(k+1)`-subsets of
/// `{0, .., n}` in lexicographic order, and `d_i` deletes the `i`-th
/// smallest vertex.
pub fn standard_simplex(n: usize) -> SemiSimplicialSet {
    let mut subsets: Vec<Vec<Vec<usize>>> = vec![Vec::new(); n + 1];
    for mask in 1u32..(1 << (n + 1)) {
        let set: Vec<usize> = (0..=n).filter(|i| mask >> i & 1 == 1).collect();
        subsets[set.len() - 1].push(set);
    }
    for level in &mut subsets {
        level.sort();
    }
    let mut out = SemiSimplicialSet::new();
    for (k, level) in subsets.iter().enumerate() {
        for set in level {
            let row = if k == 0 {
                Vec::new()
            } else {
                (0..=k)
                    .map(|i| {
                        let mut face = set.clone();
                        face.remove(i);
                        subsets[k - 1].binary_search(&face).unwrap()
                    })
                    .collect()
            };
            out.push(k, row);
        }
    }
    out
}

/// The `k`-skeleton: all simplices of level at most `k` with their faces.
pub fn skeleton(s: &SemiSimplicialSet, k: usize) -> SemiSimplicialSet {
    SemiSimplicialSet { faces: s.faces.iter().take(k + 1).cloned().collect() }
}

/// A registered plex shape: the representative polygraph together with,
/// for every cell, the registry index of the cell's own plex shape and
/// the image of that representative's cells inside this shape.
struct ShapeEntry {
    shape: Polygraph,
    cells: Vec<(usize, Vec<CellId>)>,
}

/// Canonical representatives of the plex shapes occurring in a
/// realization. Registration is recursive: registering a shape also
/// registers the plex shape of each of its cells.
#[derive(Default)]
struct ShapeRegistry {
    entries: Vec<ShapeEntry>,
}

fn gen_images(m: &Morphism) -> Result<Vec<CellId>> {
    m.image
        .iter()
        .map(|t| match t {
            Term::Gen(c) => Ok(*c),
            _ => Err(Error::UnsupportedClass(
                "a plex labeling is not polygraphic".into(),
            )),
        })
        .collect()
}

impl ShapeRegistry {
    /// Registers a plex shape labeled into some ambient polygraph by
    /// `label`, and returns the representative's index together with the
    /// composite embedding of the representative's cells into the
    /// ambient polygraph.
    fn register(&mut self, shape: &Polygraph, label: &[CellId]) -> Result<(usize, Vec<CellId>)> {
        for (r, entry) in self.entries.iter().enumerate() {
            if let Some(iso) = plex_iso(&entry.shape, shape)? {
                return Ok((r, iso.into_iter().map(|c| label[c as usize]).collect()));
            }
        }
        let r = self.entries.len();
        self.entries.push(ShapeEntry { shape: shape.clone(), cells: Vec::new() });
        let local = shape.clone();
        let mut cells = Vec::with_capacity(local.cells().len());
        for c in local.cells() {
            let ca = plex_of_cell(&local, c.id)?;
            let child_label = gen_images(&ca.label)?;
            cells.push(self.register(&ca.polyplex.underlying, &child_label)?);
        }
        self.entries[r].cells = cells;
        Ok((r, label.to_vec()))
    }
}

/// A chain in shape coordinates: the top occurrence is a cell of the
/// realized polygraph and `ts[i]` is the non-top cell of the level-
/// `(i+1)` representative shape that names the map from level `i`.
type ChainKey = (CellId, Vec<CellId>);

struct Realization {
    sset: SemiSimplicialSet,
    keys: Vec<BTreeMap<ChainKey, usize>>,
}

fn realize_in(reg: &mut ShapeRegistry, x: &Polygraph) -> Result<Realization> {
    if !is_regular(x)? {
        return Err(Error::UnsupportedClass(
            "realization needs a regular polygraph".into(),
        ));
    }
    let mut xcells: Vec<(usize, Vec<CellId>)> = Vec::with_capacity(x.cells().len());
    for c in x.cells() {
        let ca = plex_of_cell(x, c.id)?;
        xcells.push(reg.register(&ca.polyplex.underlying, &gen_images(&ca.label)?)?);
    }
    let rep_ladder = |key: &ChainKey| -> Vec<usize> {
        let mut reps = vec![0; key.1.len() + 1];
        reps[key.1.len()] = xcells[key.0 as usize].0;
        for i in (0..key.1.len()).rev() {
            reps[i] = reg.entries[reps[i + 1]].cells[key.1[i] as usize].0;
        }
        reps
    };
    let mut sset = SemiSimplicialSet::new();
    let mut keys: Vec<BTreeMap<ChainKey, usize>> = Vec::new();
    let mut level: Vec<ChainKey> = Vec::new();
    let mut level_keys: BTreeMap<ChainKey, usize> = BTreeMap::new();
    for c in x.cells() {
        let key: ChainKey = (c.id, Vec::new());
        let id = sset.push(0, Vec::new());
        level_keys.insert(key.clone(), id);
        level.push(key);
    }
    keys.push(level_keys);
    for n in 1.. {
        let mut next: Vec<ChainKey> = Vec::new();
        let mut next_keys: BTreeMap<ChainKey, usize> = BTreeMap::new();
        for key in &level {
            let bottom = *rep_ladder(key).first().unwrap();
            let bottom_shape = &reg.entries[bottom].shape;
            let top_dim = bottom_shape.dim();
            for t in bottom_shape.cells() {
                if t.dim == top_dim {
                    continue;
                }
                let mut ts = vec![t.id];
                ts.extend_from_slice(&key.1);
                let new_key: ChainKey = (key.0, ts);
                let reps = rep_ladder(&new_key);
                let row: Vec<usize> = (0..=n)
                    .map(|i| {
                        let face_key: ChainKey = if i == 0 {
                            (new_key.0, new_key.1[1..].to_vec())
                        } else if i == n {
                            let c2 = xcells[new_key.0 as usize].1[new_key.1[n - 1] as usize];
                            (c2, new_key.1[..n - 1].to_vec())
                        } else {
                            let emb = &reg.entries[reps[i + 1]].cells[new_key.1[i] as usize].1;
                            let mut ts = new_key.1.clone();
                            ts[i - 1] = emb[ts[i - 1] as usize];
                            ts.remove(i);
                            (new_key.0, ts)
                        };
                        *keys[n - 1]
                            .get(&face_key)
                            .expect("face chain was enumerated at the previous level")
                    })
                    .collect();
                let id = sset.push(n, row);
                next_keys.insert(new_key.clone(), id);
                next.push(new_key);
            }
        }
        if next.is_empty() {
            break;
        }
        keys.push(next_keys);
        level = next;
    }
    sset.validate()?;
    Ok(Realization { sset, keys })
}

/// The semi-simplicial realization of a regular polygraph: `n`-simplices
/// are the chains of plex maps `e_0 -> .. -> e_n -> X` with strictly
/// increasing dimensions, and `d_i` composes away the `i`-th stage.
pub fn realize(x: &Polygraph) -> Result<SemiSimplicialSet> {
    let mut reg = ShapeRegistry::default();
    Ok(realize_in(&mut reg, x)?.sset)
}

/// Realizes both ends of a polygraphic monomorphism over a shared shape
/// registry and returns, per level, the induced simplex map. The map
/// relabels only the top occurrence of each chain, so it is injective
/// level-wise.
pub fn realize_map(f: &Morphism) -> Result<(SemiSimplicialSet, SemiSimplicialSet, Vec<Vec<usize>>)> {
    f.validate()?;
    if !f.is_polygraphic_mono() {
        return Err(Error::InvalidMorphism(
            "realization maps are taken along polygraphic monomorphisms".into(),
        ));
    }
    let image = gen_images(f)?;
    let mut reg = ShapeRegistry::default();
    let dom = realize_in(&mut reg, &f.dom)?;
    let cod = realize_in(&mut reg, &f.cod)?;
    let mut maps = Vec::with_capacity(dom.keys.len());
    for (n, level) in dom.keys.iter().enumerate() {
        let mut by_id: Vec<(usize, &ChainKey)> =
            level.iter().map(|(key, &id)| (id, key)).collect();
        by_id.sort_unstable_by_key(|&(id, _)| id);
        let mut map = Vec::with_capacity(by_id.len());
        for (_, key) in by_id {
            let target: ChainKey = (image[key.0 as usize], key.1.clone());
            map.push(*cod.keys[n].get(&target).ok_or_else(|| {
                Error::MethodDisagreement(
                    "a realized chain has no image chain of the same shape".into(),
                )
            })?);
        }
        maps.push(map);
    }
    Ok((dom.sset, cod.sset, maps))
}

/// The oriental together with the subset labeling of its cells: cell `c`
/// of dimension `k` corresponds to a `(k+1)`-subset of `{0, .., n}`. The
/// cone apex is vertex 0 and base cells shift upward.
pub fn oriental_with_subsets(n: usize) -> Result<(Polygraph, Vec<Vec<usize>>)> {
    let mut p = globe(0);
    let mut subsets: Vec<Vec<usize>> = vec![vec![0]];
    for _ in 0..n {
        let (next, inventory) = cone_polygraph(&p)?;
        let shift = |set: &[usize]| -> Vec<usize> { set.iter().map(|v| v + 1).collect() };
        subsets = inventory
            .iter()
            .map(|cell| match cell {
                ConeCell::Apex => vec![0],
                ConeCell::Base(c) => shift(&subsets[*c as usize]),
                ConeCell::T(c) => {
                    let mut set = vec![0];
                    set.extend(shift(&subsets[*c as usize]));
                    set
                }
            })
            .collect();
        p = next;
    }
    Ok((p, subsets))
}

/// The polygraph glued from one oriental per simplex: the colimit of
/// orientals over the category of simplices of `s`. Each `n`-simplex
/// contributes an `n`-cell attached along the top boundaries of the
/// `n`-oriental, with the oriental's cells relabeled through the face
/// maps of `s`.
pub fn orientals_embed(s: &SemiSimplicialSet) -> Result<Polygraph> {
    s.validate()?;
    let levels = s.sizes().len();
    let mut orientals = Vec::with_capacity(levels);
    for k in 0..levels {
        orientals.push(oriental_with_subsets(k)?);
    }
    let restrict = |n: usize, idx: usize, set: &[usize]| -> usize {
        let mut level = n;
        let mut cur = idx;
        for i in (0..=n).rev() {
            if !set.contains(&i) {
                cur = s.face(level, cur, i);
                level -= 1;
            }
        }
        cur
    };
    let mut p = Polygraph::new(ClassTag::Positive);
    let mut ids: Vec<Vec<CellId>> = Vec::with_capacity(levels);
    for n in 0..levels {
        let (oriental, subsets) = &orientals[n];
        let top = oriental.cells_of_dim(n)[0];
        let mut level_ids = Vec::with_capacity(s.size(n));
        for idx in 0..s.size(n) {
            let id = if n == 0 {
                p.add_cell0()
            } else {
                let relabel = |c: CellId| -> Term {
                    let set = &subsets[c as usize];
                    Term::Gen(ids[set.len() - 1][restrict(n, idx, set)])
                };
                p.add_cell(
                    n,
                    oriental.attachment(top, Sign::Neg)?.substitute(&relabel),
                    oriental.attachment(top, Sign::Pos)?.substitute(&relabel),
                )
            };
            level_ids.push(id);
        }
        ids.push(level_ids);
    }
    let problems = p.validate();
    if !problems.is_empty() {
        return Err(Error::InvalidPolygraph(problems.join("; ")));
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homotopy::generating_cofibration;
    use crate::steiner::oriental;

    #[test]
    fn simplices_and_skeleta_validate() {
        for n in 0..=4 {
            let s = standard_simplex(n);
            s.validate().unwrap();
            let sizes: Vec<usize> = (0..=n).map(|k| s.size(k)).collect();
            let binom: Vec<usize> = (0..=n).map(|k| choose(n + 1, k + 1)).collect();
            assert_eq!(sizes, binom);
        }
        let boundary = skeleton(&standard_simplex(2), 1);
        boundary.validate().unwrap();
        assert_eq!(boundary.sizes(), vec![3, 3]);
        let two = boundary.disjoint_union(&boundary);
        two.validate().unwrap();
        assert_eq!(two.sizes(), vec![6, 6]);
    }

    fn choose(n: usize, k: usize) -> usize {
        if k > n {
            return 0;
        }
        let mut out = 1usize;
        for i in 0..k {
            out = out * (n - i) / (i + 1);
        }
        out
    }

    #[test]
    fn realization_of_globes_and_the_triangle() {
        assert_eq!(realize(&globe(0)).unwrap().sizes(), vec![1]);
        let interval = realize(&globe(1)).unwrap();
        assert_eq!(interval.sizes(), vec![3, 2]);
        let triangle = realize(&oriental(2).unwrap()).unwrap();
        assert_eq!(triangle.sizes(), vec![7, 12, 6]);
        let disk = realize(&globe(2)).unwrap();
        assert_eq!(disk.sizes(), vec![5, 8, 4]);
    }

    #[test]
    fn realization_rejects_a_nonspherical_source() {
        let mut x = Polygraph::new(ClassTag::Positive);
        let p0 = x.add_cell0();
        let p1 = x.add_cell0();
        let p2 = x.add_cell0();
        let a1 = x.add_cell(1, Term::gen(p0), Term::gen(p1));
        let a2 = x.add_cell(1, Term::gen(p0), Term::gen(p1));
        let b1 = x.add_cell(1, Term::gen(p1), Term::gen(p2));
        let b2 = x.add_cell(1, Term::gen(p1), Term::gen(p2));
        let alpha = x.add_cell(2, Term::gen(a1), Term::gen(a2));
        let beta = x.add_cell(2, Term::gen(b1), Term::gen(b2));
        let side = Term::comp(Term::gen(alpha), Term::gen(beta), 0);
        x.add_cell(3, side.clone(), side);
        assert!(x.validate().is_empty());
        assert!(!is_regular(&x).unwrap());
        assert_eq!(
            realize(&x).unwrap_err(),
            Error::UnsupportedClass("realization needs a regular polygraph".into())
        );
    }

    #[test]
    fn realization_maps_are_levelwise_injections() {
        let tri = oriental(2).unwrap();
        let inc = generating_cofibration(&tri).unwrap();
        let (bdy, whole, maps) = realize_map(&inc).unwrap();
        assert_eq!(bdy.sizes(), vec![6, 6]);
        assert_eq!(whole.sizes(), vec![7, 12, 6]);
        for (n, map) in maps.iter().enumerate() {
            assert_eq!(map.len(), bdy.size(n));
            let mut seen = map.clone();
            seen.sort_unstable();
            seen.dedup();
            assert_eq!(seen.len(), map.len());
        }
        for n in 1..maps.len() {
            for s in 0..bdy.size(n) {
                for i in 0..=n {
                    assert_eq!(
                        whole.face(n, maps[n][s], i),
                        maps[n - 1][bdy.face(n, s, i)],
                        "face maps commute with the realized inclusion"
                    );
                }
            }
        }
    }

    #[test]
    fn orientals_embed_representables_and_gluings() {
        for n in 0..=3 {
            let embedded = orientals_embed(&standard_simplex(n)).unwrap();
            let direct = oriental(n).unwrap();
            assert!(plex_iso(&embedded, &direct).unwrap().is_some());
        }
        let boundary = orientals_embed(&skeleton(&standard_simplex(2), 1)).unwrap();
        assert_eq!(boundary.cells_of_dim(0).len(), 3);
        assert_eq!(boundary.cells_of_dim(1).len(), 3);
        let tri_boundary = generating_cofibration(&oriental(2).unwrap()).unwrap().dom;
        assert!(plex_iso(&boundary, &tri_boundary).unwrap().is_some());

        let mut glued = skeleton(&standard_simplex(3), 0);
        let edges = [vec![0, 1], vec![0, 2], vec![1, 2], vec![1, 3], vec![2, 3]];
        for e in &edges {
            glued.push(1, vec![e[1], e[0]]);
        }
        let edge_at = |v: &[usize]| edges.iter().position(|e| e == v).unwrap();
        glued.push(2, vec![edge_at(&[1, 2]), edge_at(&[0, 2]), edge_at(&[0, 1])]);
        glued.push(2, vec![edge_at(&[2, 3]), edge_at(&[1, 3]), edge_at(&[1, 2])]);
        glued.validate().unwrap();
        let p = orientals_embed(&glued).unwrap();
        assert_eq!(p.cells_of_dim(0).len(), 4);
        assert_eq!(p.cells_of_dim(1).len(), 5);
        assert_eq!(p.cells_of_dim(2).len(), 2);
        assert!(is_regular(&p).unwrap());
        assert_eq!(realize(&p).unwrap().size(0), 11);
    }
}
