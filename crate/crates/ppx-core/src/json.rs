//! JSON documents for the kernel's data types.
//!
//! Readers enforce the encoding contract (positional cell ids, boundary
//! presence matching the dimension, face indices in range) and return
//! [`Error::Serde`] when it is broken. Semantic validity is kept separate:
//! [`polygraph_from_json`] accepts any well-encoded polygraph so that
//! callers can run `validate`, `is_regular` or the sphericity checks and
//! report what fails, rather than being unable to load the input at all.
//! Face tables have no loadable-but-invalid reading, so
//! [`sset_from_json`] checks the semi-simplicial identities itself.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::ChainComplex;
use crate::lin::{Basis, LinComb};
use crate::plex::Polyplex;
use crate::poly::{Cell, ClassTag, Morphism, Polygraph, Term};
use crate::realize::SemiSimplicialSet;
use crate::steiner::BasedComplex;

fn ser<T: Serialize>(v: &T) -> Result<String> {
    serde_json::to_string_pretty(v).map_err(|e| Error::Serde(e.to_string()))
}

fn de<'a, T: Deserialize<'a>>(s: &'a str) -> Result<T> {
    serde_json::from_str(s).map_err(|e| Error::Serde(e.to_string()))
}

#[derive(Serialize, Deserialize)]
struct PolygraphDoc {
    cells: Vec<Cell>,
    class: ClassTag,
}

pub fn polygraph_to_json(x: &Polygraph) -> Result<String> {
    ser(&PolygraphDoc { cells: x.cells().to_vec(), class: x.class })
}

pub fn polygraph_from_json(s: &str) -> Result<Polygraph> {
    let doc: PolygraphDoc = de(s)?;
    let mut out = Polygraph::new(doc.class);
    for (i, c) in doc.cells.into_iter().enumerate() {
        if c.id as usize != i {
            return Err(Error::Serde(format!(
                "cell ids must be positional: entry {i} has id {}",
                c.id
            )));
        }
        match (c.dim, c.src, c.tgt) {
            (0, None, None) => {
                out.add_cell0();
            }
            (0, _, _) => {
                return Err(Error::Serde(format!("0-cell {i} must not carry boundaries")));
            }
            (d, Some(src), Some(tgt)) => {
                out.add_cell(d, src, tgt);
            }
            (d, _, _) => {
                return Err(Error::Serde(format!(
                    "cell {i} of dimension {d} needs both src and tgt"
                )));
            }
        }
    }
    Ok(out)
}

#[derive(Serialize, Deserialize)]
struct PolyplexDoc {
    cells: Vec<Cell>,
    class: ClassTag,
    universal: Term,
}

pub fn polyplex_to_json(p: &Polyplex) -> Result<String> {
    ser(&PolyplexDoc {
        cells: p.underlying.cells().to_vec(),
        class: p.underlying.class,
        universal: p.universal.clone(),
    })
}

/// Reads a polyplex document; the universal arrow is re-classified by
/// [`Polyplex::assemble`], so assembly errors pass through unchanged.
pub fn polyplex_from_json(s: &str) -> Result<Polyplex> {
    let doc: PolyplexDoc = de(s)?;
    let under = polygraph_from_json(&ser(&PolygraphDoc { cells: doc.cells, class: doc.class })?)?;
    Polyplex::assemble(under, doc.universal)
}

#[derive(Serialize, Deserialize)]
struct LinCombDoc {
    basis: Basis,
    terms: Vec<(u32, i64)>,
}

pub fn lincomb_to_json(v: &LinComb) -> Result<String> {
    ser(&LinCombDoc { basis: v.basis, terms: v.iter().collect() })
}

pub fn lincomb_from_json(s: &str) -> Result<LinComb> {
    let doc: LinCombDoc = de(s)?;
    Ok(LinComb::from_pairs(doc.basis, doc.terms))
}

#[derive(Serialize, Deserialize)]
struct ChainComplexDoc {
    ranks: Vec<usize>,
    d: Vec<Vec<Vec<i64>>>,
}

pub fn chain_complex_to_json(k: &ChainComplex) -> Result<String> {
    ser(&ChainComplexDoc { ranks: k.ranks.clone(), d: k.d.clone() })
}

pub fn chain_complex_from_json(s: &str) -> Result<ChainComplex> {
    let doc: ChainComplexDoc = de(s)?;
    let k = ChainComplex::new(doc.ranks, doc.d);
    k.validate().map_err(|e| Error::Serde(e.to_string()))?;
    Ok(k)
}

#[derive(Serialize)]
struct BasedComplexDoc {
    ranks: Vec<usize>,
    d: Vec<Vec<Vec<i64>>>,
    augmentation: Vec<i64>,
    grades: Vec<usize>,
    atoms: Vec<Vec<(Vec<i64>, Vec<i64>)>>,
}

/// Serializes a based complex: the chain data, the augmentation, and per
/// cell its grade and its atom as a list of boundary pairs. Based
/// complexes are derived data (computed from a polygraph), so there is no
/// reader; reload the polygraph and rebuild.
pub fn based_complex_to_json(b: &BasedComplex) -> Result<String> {
    ser(&BasedComplexDoc {
        ranks: b.complex.ranks.clone(),
        d: b.complex.d.clone(),
        augmentation: b.augmentation.clone(),
        grades: (0..b.atoms.len()).map(|i| b.grade_of(i)).collect(),
        atoms: b.atoms.iter().map(|a| a.pairs.clone()).collect(),
    })
}

#[derive(Serialize, Deserialize)]
struct SSetDoc {
    simplices: Vec<Vec<usize>>,
    faces: Vec<Vec<Vec<usize>>>,
}

/// Serializes a semi-simplicial set with positional ids per dimension.
pub fn sset_to_json(s: &SemiSimplicialSet) -> Result<String> {
    let simplices = (0..=s.dim()).map(|n| (0..s.size(n)).collect()).collect();
    ser(&SSetDoc { simplices, faces: s.faces.clone() })
}

/// Reads a semi-simplicial set. Simplex ids may be arbitrary integers;
/// face entries name ids one dimension down and are re-indexed to
/// positions. The semi-simplicial identities are checked.
pub fn sset_from_json(text: &str) -> Result<SemiSimplicialSet> {
    let doc: SSetDoc = de(text)?;
    if doc.faces.len() != doc.simplices.len() {
        return Err(Error::Serde(format!(
            "{} dimensions of simplices but {} of faces",
            doc.simplices.len(),
            doc.faces.len()
        )));
    }
    let mut index: Vec<std::collections::BTreeMap<usize, usize>> = Vec::new();
    for (n, ids) in doc.simplices.iter().enumerate() {
        let mut level = std::collections::BTreeMap::new();
        for (p, &id) in ids.iter().enumerate() {
            if level.insert(id, p).is_some() {
                return Err(Error::Serde(format!("duplicate id {id} in dimension {n}")));
            }
        }
        index.push(level);
    }
    let mut out = SemiSimplicialSet::new();
    for (n, rows) in doc.faces.iter().enumerate() {
        if rows.len() != doc.simplices[n].len() {
            return Err(Error::Serde(format!(
                "dimension {n} lists {} simplices but {} face rows",
                doc.simplices[n].len(),
                rows.len()
            )));
        }
        for (s, row) in rows.iter().enumerate() {
            let want = if n == 0 { 0 } else { n + 1 };
            if row.len() != want {
                return Err(Error::Serde(format!(
                    "simplex {s} of dimension {n} has {} faces, expected {want}",
                    row.len()
                )));
            }
            let mapped = row
                .iter()
                .map(|id| {
                    index[n - 1].get(id).copied().ok_or_else(|| {
                        Error::Serde(format!(
                            "face id {id} of simplex {s} is not a simplex of dimension {}",
                            n - 1
                        ))
                    })
                })
                .collect::<Result<Vec<usize>>>()?;
            out.push(n, mapped);
        }
    }
    out.validate().map_err(|e| Error::Serde(e.to_string()))?;
    Ok(out)
}

#[derive(Serialize, Deserialize)]
struct MorphismDoc {
    dom: PolygraphDoc,
    cod: PolygraphDoc,
    image: Vec<Term>,
}

pub fn morphism_to_json(f: &Morphism) -> Result<String> {
    ser(&MorphismDoc {
        dom: PolygraphDoc { cells: f.dom.cells().to_vec(), class: f.dom.class },
        cod: PolygraphDoc { cells: f.cod.cells().to_vec(), class: f.cod.class },
        image: f.image.clone(),
    })
}

pub fn morphism_from_json(s: &str) -> Result<Morphism> {
    let doc: MorphismDoc = de(s)?;
    let dom = polygraph_from_json(&ser(&doc.dom)?)?;
    let cod = polygraph_from_json(&ser(&doc.cod)?)?;
    if doc.image.len() != dom.cells().len() {
        return Err(Error::Serde(format!(
            "{} image terms for {} domain cells",
            doc.image.len(),
            dom.cells().len()
        )));
    }
    Ok(Morphism { dom, cod, image: doc.image })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homology::homology;
    use crate::poly::Sign;
    use crate::realize::{realize, skeleton, standard_simplex};
    use crate::steiner::{based_complex, globe, oriental};

    #[test]
    fn terms_use_the_documented_encoding() {
        let t = Term::comp(Term::gen(0), Term::bnd(Term::gen(1), 0, Sign::Pos), 0);
        let v: serde_json::Value = serde_json::from_str(&ser(&t).unwrap()).unwrap();
        let want = serde_json::json!({ "comp": [ {"gen": 0}, {"bnd": [{"gen": 1}, 0, "+"]}, 0 ] });
        assert_eq!(v, want);
        let back: Term = de(&ser(&t).unwrap()).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn polygraphs_round_trip_and_bad_encodings_are_rejected() {
        for x in [globe(0), globe(2), oriental(2).unwrap(), oriental(3).unwrap()] {
            let s = polygraph_to_json(&x).unwrap();
            let back = polygraph_from_json(&s).unwrap();
            assert_eq!(back, x);
            assert!(back.validate().is_empty());
        }

        let bad_id = r#"{ "cells": [ {"id": 5, "dim": 0} ], "class": "positive" }"#;
        assert!(matches!(polygraph_from_json(bad_id), Err(Error::Serde(_))));

        let no_tgt = r#"{ "cells": [ {"id": 0, "dim": 0}, {"id": 1, "dim": 1, "src": {"gen": 0}} ], "class": "unchecked" }"#;
        assert!(matches!(polygraph_from_json(no_tgt), Err(Error::Serde(_))));

        let not_json = "{ cells: oops";
        assert!(matches!(polygraph_from_json(not_json), Err(Error::Serde(_))));
    }

    #[test]
    fn semantically_broken_polygraphs_load_and_fail_validate() {
        let forward = r#"{
            "cells": [
                {"id": 0, "dim": 0},
                {"id": 1, "dim": 1, "src": {"gen": 0}, "tgt": {"gen": 7}}
            ],
            "class": "unchecked"
        }"#;
        let x = polygraph_from_json(forward).unwrap();
        assert!(!x.validate().is_empty());
    }

    #[test]
    fn lincombs_and_chain_complexes_round_trip() {
        let v = LinComb::from_pairs(Basis::Delta, [(3, 2), (0, -1)]);
        let back = lincomb_from_json(&lincomb_to_json(&v).unwrap()).unwrap();
        assert_eq!(back, v);
        let s = lincomb_to_json(&v).unwrap();
        assert!(s.contains("\"delta\""));

        let k = ChainComplex::new(vec![2, 1], vec![vec![], vec![vec![-1], vec![1]]]);
        let back = chain_complex_from_json(&chain_complex_to_json(&k).unwrap()).unwrap();
        assert_eq!(back, k);

        let bad = r#"{ "ranks": [2, 1], "d": [ [], [ [1] ] ] }"#;
        assert!(matches!(chain_complex_from_json(bad), Err(Error::Serde(_))));
    }

    #[test]
    fn based_complexes_serialize_with_grades_and_atoms() {
        let b = based_complex(&globe(1)).unwrap();
        let v: serde_json::Value =
            serde_json::from_str(&based_complex_to_json(&b).unwrap()).unwrap();
        assert_eq!(v["ranks"], serde_json::json!([2, 1]));
        assert_eq!(v["grades"], serde_json::json!([0, 0, 1]));
        assert_eq!(v["augmentation"].as_array().unwrap().len(), 2);
        assert_eq!(v["atoms"].as_array().unwrap().len(), 3);
    }

    #[test]
    fn ssets_round_trip_and_accept_arbitrary_ids() {
        for s in [standard_simplex(2), skeleton(&standard_simplex(3), 2), realize(&globe(1)).unwrap()]
        {
            let back = sset_from_json(&sset_to_json(&s).unwrap()).unwrap();
            assert_eq!(back, s);
        }

        let circle = r#"{
            "simplices": [ [10, 20], [7, 8] ],
            "faces": [ [[], []], [ [10, 20], [20, 10] ] ]
        }"#;
        let s = sset_from_json(circle).unwrap();
        assert_eq!(s.sizes(), vec![2, 2]);
        let h = homology(&s, 1).unwrap();
        assert_eq!(h, vec![(1, vec![]), (1, vec![])]);

        let dangling = r#"{
            "simplices": [ [0], [0] ],
            "faces": [ [[]], [ [0, 9] ] ]
        }"#;
        assert!(matches!(sset_from_json(dangling), Err(Error::Serde(_))));
    }

    #[test]
    fn morphisms_round_trip() {
        let f = crate::homotopy::generating_cofibration(&oriental(2).unwrap()).unwrap();
        let back = morphism_from_json(&morphism_to_json(&f).unwrap()).unwrap();
        assert_eq!(back, f);
        back.validate().unwrap();

        let short = r#"{
            "dom": { "cells": [ {"id": 0, "dim": 0} ], "class": "positive" },
            "cod": { "cells": [ {"id": 0, "dim": 0} ], "class": "positive" },
            "image": []
        }"#;
        assert!(matches!(morphism_from_json(short), Err(Error::Serde(_))));
    }

    #[test]
    fn fixture_style_document_is_stable_across_rewrites() {
        let x = oriental(2).unwrap();
        let once = polygraph_to_json(&x).unwrap();
        let twice = polygraph_to_json(&polygraph_from_json(&once).unwrap()).unwrap();
        assert_eq!(once, twice);
    }
}
