//! Exact integral homology of finite semi-simplicial sets.
//!
//! The chain complex has one generator per simplex and boundary the
//! alternating sum of faces; homology groups are read off Smith normal
//! forms computed over `i128` with minimal-pivot selection, so every
//! rank and torsion coefficient is exact.

use crate::error::{Error, Result};
use crate::realize::SemiSimplicialSet;

/// Boundary matrices wider than this abort instead of risking runaway
/// pivot growth; realizations at dimension 3 and below stay far under it.
pub const MAX_COLUMNS: usize = 2000;

/// The boundary matrix from level `n` to level `n - 1`: entry `(r, c)`
/// is the signed count of faces of simplex `c` equal to `r`.
pub fn boundary_matrix(s: &SemiSimplicialSet, n: usize) -> Vec<Vec<i128>> {
    let rows = if n == 0 { 0 } else { s.size(n - 1) };
    let mut m = vec![vec![0i128; s.size(n)]; rows];
    if n == 0 {
        return m;
    }
    for c in 0..s.size(n) {
        for i in 0..=n {
            let r = s.face(n, c, i);
            m[r][c] += if i % 2 == 0 { 1 } else { -1 };
        }
    }
    m
}

/// The elementary divisors of an integer matrix, in divisibility order,
/// zero divisors omitted.
pub fn smith_divisors(mut m: Vec<Vec<i128>>) -> Vec<i128> {
    let rows = m.len();
    let cols = if rows == 0 { 0 } else { m[0].len() };
    let mut out = Vec::new();
    let mut t = 0;
    'diagonal: while t < rows && t < cols {
        let Some((pi, pj)) = ((t..rows).flat_map(|i| (t..cols).map(move |j| (i, j))))
            .filter(|&(i, j)| m[i][j] != 0)
            .min_by_key(|&(i, j)| m[i][j].unsigned_abs())
        else {
            break;
        };
        m.swap(t, pi);
        for row in &mut m {
            row.swap(t, pj);
        }
        for i in t + 1..rows {
            if m[i][t] != 0 {
                let q = m[i][t] / m[t][t];
                for j in t..cols {
                    m[i][j] -= q * m[t][j];
                }
                if m[i][t] != 0 {
                    continue 'diagonal;
                }
            }
        }
        for j in t + 1..cols {
            if m[t][j] != 0 {
                let q = m[t][j] / m[t][t];
                for row in m.iter_mut() {
                    row[j] -= q * row[t];
                }
                if m[t][j] != 0 {
                    continue 'diagonal;
                }
            }
        }
        for i in t + 1..rows {
            for j in t + 1..cols {
                if m[i][j] % m[t][t] != 0 {
                    for k in t..cols {
                        m[t][k] += m[i][k];
                    }
                    continue 'diagonal;
                }
            }
        }
        out.push(m[t][t].abs());
        t += 1;
    }
    out
}

/// Integral homology in degrees `0 ..= max_deg`: each entry is the free
/// rank together with the torsion coefficients in divisibility order.
pub fn homology(s: &SemiSimplicialSet, max_deg: usize) -> Result<Vec<(usize, Vec<i128>)>> {
    s.validate()?;
    for n in 0..=max_deg + 1 {
        if s.size(n) > MAX_COLUMNS {
            return Err(Error::BoundExceeded(format!(
                "level {n} has {} simplices, over the {MAX_COLUMNS}-column bound",
                s.size(n)
            )));
        }
    }
    let mut divisors = Vec::with_capacity(max_deg + 2);
    for n in 0..=max_deg + 1 {
        divisors.push(smith_divisors(boundary_matrix(s, n)));
    }
    let mut out = Vec::with_capacity(max_deg + 1);
    for n in 0..=max_deg {
        let rank_in = divisors[n + 1].len();
        let rank_out = divisors[n].len();
        let torsion: Vec<i128> =
            divisors[n + 1].iter().copied().filter(|&d| d > 1).collect();
        out.push((s.size(n) - rank_out - rank_in, torsion));
    }
    Ok(out)
}

/// True when the homology matches the point in every degree up to the
/// dimension of the set: one free generator in degree 0 and nothing
/// above, torsion-free throughout.
pub fn has_point_homology(s: &SemiSimplicialSet) -> Result<bool> {
    let top = s.dim();
    let groups = homology(s, top)?;
    Ok(groups
        .iter()
        .enumerate()
        .all(|(n, (rank, torsion))| *rank == usize::from(n == 0) && torsion.is_empty()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homotopy::generating_cofibration;
    use crate::realize::{realize, skeleton, standard_simplex};
    use crate::steiner::{cube, globe, oriental};

    #[test]
    fn smith_divisors_on_pinned_matrices() {
        assert_eq!(smith_divisors(vec![vec![2, 4], vec![6, 8]]), vec![2, 4]);
        assert_eq!(smith_divisors(vec![vec![0, 0], vec![0, 0]]), Vec::<i128>::new());
        assert_eq!(smith_divisors(vec![vec![2, -1], vec![-1, 2]]), vec![1, 3]);
        assert_eq!(smith_divisors(vec![vec![6, 0], vec![0, 10]]), vec![2, 30]);
    }

    #[test]
    fn spheres_points_and_disks() {
        let point = standard_simplex(0);
        assert_eq!(homology(&point, 2).unwrap(), vec![(1, vec![]), (0, vec![]), (0, vec![])]);
        assert!(has_point_homology(&standard_simplex(3)).unwrap());

        let circle = skeleton(&standard_simplex(2), 1);
        assert_eq!(homology(&circle, 2).unwrap(), vec![(1, vec![]), (1, vec![]), (0, vec![])]);
        let sphere = skeleton(&standard_simplex(3), 2);
        assert_eq!(
            homology(&sphere, 3).unwrap(),
            vec![(1, vec![]), (0, vec![]), (1, vec![]), (0, vec![])]
        );

        let two_circles = circle.disjoint_union(&circle);
        assert_eq!(homology(&two_circles, 1).unwrap(), vec![(2, vec![]), (2, vec![])]);
    }

    #[test]
    fn torsion_from_self_glued_triangles() {
        let mut s = SemiSimplicialSet::new();
        let v = s.push(0, vec![]);
        let e = s.push(1, vec![v, v]);
        let f = s.push(1, vec![v, v]);
        s.push(2, vec![e, f, e]);
        s.push(2, vec![f, e, f]);
        s.validate().unwrap();
        assert_eq!(
            homology(&s, 2).unwrap(),
            vec![(1, vec![]), (0, vec![3]), (0, vec![])]
        );
    }

    #[test]
    fn realized_shapes_have_the_expected_homology() {
        for p in [globe(0), globe(1), globe(2), oriental(2).unwrap(), cube(2).unwrap()] {
            assert!(has_point_homology(&realize(&p).unwrap()).unwrap());
        }
        let hexagon = realize(&generating_cofibration(&oriental(2).unwrap()).unwrap().dom).unwrap();
        assert_eq!(
            homology(&hexagon, 1).unwrap(),
            vec![(1, vec![]), (1, vec![])]
        );
    }
}
