//! Frontier structure: strongly efficient DMUs, extreme efficient DMUs and
//! the maximal-friends facets of the efficient frontier.

use serde::{Deserialize, Serialize};

use crate::data::DeaData;
use crate::error::{DeaError, Result};
use crate::lp::{self, Direction, LinearProgram, Sense};
use crate::model::{resolve_dmu_set, rts_rows, Rts, EFF_TOL};

/// Facets of the efficient frontier: maximal subsets of efficient DMUs whose
/// joint combinations stay on the frontier. No facet contains another.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FacetSet {
    /// Each facet lists DMU indices in ascending order.
    pub facets: Vec<Vec<usize>>,
}

impl FacetSet {
    pub fn to_labels(&self, data: &DeaData) -> Vec<Vec<String>> {
        self.facets
            .iter()
            .map(|f| f.iter().map(|&j| data.dmunames[j].clone()).collect())
            .collect()
    }

    pub fn from_labels(labels: &[Vec<String>], data: &DeaData) -> Result<FacetSet> {
        let facets = labels
            .iter()
            .map(|f| {
                f.iter()
                    .map(|name| {
                        data.dmu_index(name).ok_or_else(|| {
                            DeaError::InvalidParameter(format!("unknown DMU label '{name}'"))
                        })
                    })
                    .collect::<Result<Vec<usize>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(FacetSet { facets })
    }
}

/// Weighted-slack inefficiency of an arbitrary activity against the PPS
/// spanned by `refcols`: the additive objective with unit weights. `None`
/// when the activity is outside the PPS.
pub(crate) fn additive_inefficiency(
    data: &DeaData,
    refcols: &[usize],
    rts: &Rts,
    x0: &[f64],
    y0: &[f64],
) -> Result<Option<f64>> {
    let m = data.num_inputs();
    let s = data.num_outputs();
    let nref = refcols.len();
    let ncols = nref + m + s;
    let mut objective = vec![0.0; ncols];
    for v in objective[nref..].iter_mut() {
        *v = 1.0;
    }
    let mut lp = LinearProgram::new(Direction::Maximize, objective);
    for i in 0..m {
        let mut coeffs = vec![0.0; ncols];
        for (k, &j) in refcols.iter().enumerate() {
            coeffs[k] = data.input[(i, j)];
        }
        coeffs[nref + i] = 1.0;
        lp.push(coeffs, Sense::Eq, x0[i]);
    }
    for r in 0..s {
        let mut coeffs = vec![0.0; ncols];
        for (k, &j) in refcols.iter().enumerate() {
            coeffs[k] = data.output[(r, j)];
        }
        coeffs[nref + m + r] = -1.0;
        lp.push(coeffs, Sense::Eq, y0[r]);
    }
    for row in rts_rows(rts, ncols, 0..nref, None) {
        lp.constraints.push(row);
    }
    let sol = lp::solve(&lp)?;
    Ok(sol.is_optimal().then_some(sol.objective))
}

/// Strongly efficient members of `dmu_ref` (zero additive inefficiency).
pub fn efficient_dmus(data: &DeaData, rts: &Rts, dmu_ref: Option<&[usize]>) -> Result<Vec<usize>> {
    rts.validate()?;
    let refcols = resolve_dmu_set(dmu_ref, data.num_dmus(), "dmu_ref")?;
    let mut out = Vec::new();
    for &j in &refcols {
        let x0: Vec<f64> = data.input.column(j).to_vec();
        let y0: Vec<f64> = data.output.column(j).to_vec();
        if let Some(w) = additive_inefficiency(data, &refcols, rts, &x0, &y0)? {
            if w <= EFF_TOL {
                out.push(j);
            }
        }
    }
    Ok(out)
}

/// Efficient DMUs that cannot be written as a combination (conic or convex,
/// per the returns-to-scale regime) of the other efficient DMUs.
pub fn extreme_efficient(
    data: &DeaData,
    rts: &Rts,
    dmu_ref: Option<&[usize]>,
) -> Result<Vec<usize>> {
    let eff = efficient_dmus(data, rts, dmu_ref)?;
    let mut out = Vec::new();
    for &e in &eff {
        let others: Vec<usize> = eff.iter().copied().filter(|&j| j != e).collect();
        if others.is_empty() {
            out.push(e);
            continue;
        }
        if !expressible(data, &others, rts, e)? {
            out.push(e);
        }
    }
    Ok(out)
}

/// Is the activity of DMU `e` exactly reproducible from `cols`?
fn expressible(data: &DeaData, cols: &[usize], rts: &Rts, e: usize) -> Result<bool> {
    let m = data.num_inputs();
    let s = data.num_outputs();
    let ncols = cols.len();
    let lp_obj = vec![0.0; ncols];
    let mut lp = LinearProgram::new(Direction::Minimize, lp_obj);
    for i in 0..m {
        let coeffs: Vec<f64> = cols.iter().map(|&j| data.input[(i, j)]).collect();
        lp.push(coeffs, Sense::Eq, data.input[(i, e)]);
    }
    for r in 0..s {
        let coeffs: Vec<f64> = cols.iter().map(|&j| data.output[(r, j)]).collect();
        lp.push(coeffs, Sense::Eq, data.output[(r, e)]);
    }
    for row in rts_rows(rts, ncols, 0..ncols, None) {
        lp.constraints.push(row);
    }
    Ok(lp::solve(&lp)?.is_optimal())
}

/// Does the full-support centroid of `subset` sit on the efficient frontier?
pub(crate) fn is_friends(
    data: &DeaData,
    refcols: &[usize],
    rts: &Rts,
    subset: &[usize],
) -> Result<bool> {
    let m = data.num_inputs();
    let s = data.num_outputs();
    let k = subset.len() as f64;
    let mut x0 = vec![0.0; m];
    let mut y0 = vec![0.0; s];
    for &j in subset {
        for i in 0..m {
            x0[i] += data.input[(i, j)] / k;
        }
        for r in 0..s {
            y0[r] += data.output[(r, j)] / k;
        }
    }
    match additive_inefficiency(data, refcols, rts, &x0, &y0)? {
        Some(w) => Ok(w <= EFF_TOL),
        None => Ok(false),
    }
}

/// All maximal friends subsets of the efficient DMUs in `dmu_ref`.
///
/// Search runs over subsets by size descending (lexicographic within a
/// size), pruning subsets of already accepted facets and subsets containing
/// a pair that is already known not to be friends.
pub fn maximal_friends(
    data: &DeaData,
    rts: &Rts,
    dmu_ref: Option<&[usize]>,
    silent: bool,
) -> Result<FacetSet> {
    rts.validate()?;
    let refcols = resolve_dmu_set(dmu_ref, data.num_dmus(), "dmu_ref")?;
    let eff = efficient_dmus(data, rts, Some(&refcols))?;
    let ne = eff.len();
    if ne == 0 {
        return Ok(FacetSet { facets: Vec::new() });
    }
    if ne == 1 {
        return Ok(FacetSet {
            facets: vec![vec![eff[0]]],
        });
    }

    // Pairwise compatibility first: a set with an unfriendly pair can never
    // be friends.
    let mut pair_ok = vec![vec![true; ne]; ne];
    for a in 0..ne {
        for b in (a + 1)..ne {
            let ok = is_friends(data, &refcols, rts, &[eff[a], eff[b]])?;
            pair_ok[a][b] = ok;
            pair_ok[b][a] = ok;
        }
    }

    let mut facets: Vec<Vec<usize>> = Vec::new();
    for size in (1..=ne).rev() {
        if !silent {
            eprintln!("maximal friends: scanning subsets of size {size}");
        }
        let mut idx: Vec<usize> = (0..size).collect();
        loop {
            let candidate: Vec<usize> = idx.iter().map(|&i| eff[i]).collect();
            let covered = facets
                .iter()
                .any(|f| candidate.iter().all(|j| f.contains(j)));
            let pairs_fine = !covered
                && idx
                    .iter()
                    .enumerate()
                    .all(|(p, &a)| idx[p + 1..].iter().all(|&b| pair_ok[a][b]));
            if pairs_fine && (size <= 2 || is_friends(data, &refcols, rts, &candidate)?) {
                facets.push(candidate);
            }
            // Next combination in lexicographic order.
            let mut pos = size;
            while pos > 0 {
                pos -= 1;
                if idx[pos] != pos + ne - size {
                    idx[pos] += 1;
                    for q in pos + 1..size {
                        idx[q] = idx[q - 1] + 1;
                    }
                    pos = usize::MAX;
                    break;
                }
            }
            if pos != usize::MAX {
                break;
            }
        }
    }
    Ok(FacetSet { facets })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn m1() -> DeaData {
        DeaData::new(
            array![[2.0, 4.0, 5.0, 8.0]],
            array![[2.0, 2.0, 4.0, 2.0]],
            Some(vec!["A".into(), "B".into(), "C".into(), "D".into()]),
            None,
            None,
            Default::default(),
        )
        .unwrap()
    }

    #[test]
    fn m1_vrs_extremes() {
        let ext = extreme_efficient(&m1(), &Rts::Vrs, None).unwrap();
        assert_eq!(ext, vec![0, 2]); // A and C
    }

    #[test]
    fn midpoint_is_efficient_but_not_extreme() {
        // E = (3.5, 3) is the midpoint of A-C.
        let data = DeaData::new(
            array![[2.0, 4.0, 5.0, 8.0, 3.5]],
            array![[2.0, 2.0, 4.0, 2.0, 3.0]],
            Some(vec![
                "A".into(),
                "B".into(),
                "C".into(),
                "D".into(),
                "E".into(),
            ]),
            None,
            None,
            Default::default(),
        )
        .unwrap();
        let eff = efficient_dmus(&data, &Rts::Vrs, None).unwrap();
        assert!(eff.contains(&4));
        let ext = extreme_efficient(&data, &Rts::Vrs, None).unwrap();
        assert_eq!(ext, vec![0, 2]);
    }

    #[test]
    fn single_dmu_is_extreme() {
        let data = DeaData::from_matrices(array![[1.0]], array![[1.0]]).unwrap();
        assert_eq!(extreme_efficient(&data, &Rts::Crs, None).unwrap(), vec![0]);
        let mf = maximal_friends(&data, &Rts::Crs, None, true).unwrap();
        assert_eq!(mf.facets, vec![vec![0]]);
    }

    #[test]
    fn m1_vrs_single_facet() {
        let mf = maximal_friends(&m1(), &Rts::Vrs, None, true).unwrap();
        assert_eq!(mf.facets, vec![vec![0, 2]]);
    }

    #[test]
    fn facet_labels_round_trip() {
        let data = m1();
        let mf = maximal_friends(&data, &Rts::Vrs, None, true).unwrap();
        let labels = mf.to_labels(&data);
        assert_eq!(labels, vec![vec!["A".to_string(), "C".to_string()]]);
        let back = FacetSet::from_labels(&labels, &data).unwrap();
        assert_eq!(back, mf);
    }
}
