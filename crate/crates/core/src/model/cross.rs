//! Cross-efficiency analysis: every DMU rated under every other DMU's
//! optimal multiplier weights, with the secondary-goal methods II and III in
//! aggressive and benevolent form and the negative-score correction for
//! input-oriented models away from constant returns.

use serde::Serialize;

use crate::data::DeaData;
use crate::error::{DeaError, Result};
use crate::lp::{self, Bound, Direction, LinearProgram, Sense};
use crate::model::multiplier::{model_multiplier, MultiplierOptions};
use crate::model::{resolve_dmu_set, Orientation, Rts};

/// Box applied to multipliers when a secondary-goal program is unbounded.
const AUTO_BOUND: f64 = 1e6;

#[derive(Clone, Debug)]
pub struct CrossEffOptions {
    pub orientation: Orientation,
    pub rts: Rts,
    pub epsilon: f64,
    /// Include self-appraisal in the e and A averages.
    pub selfapp: bool,
    /// Apply the negative-score correction (io under vrs, nirs or grs).
    pub correction: bool,
    pub m2: bool,
    pub m3: bool,
    pub dmu_eval: Option<Vec<usize>>,
    pub dmu_ref: Option<Vec<usize>>,
}

impl Default for CrossEffOptions {
    fn default() -> Self {
        CrossEffOptions {
            orientation: Orientation::Io,
            rts: Rts::Crs,
            epsilon: 0.0,
            selfapp: true,
            correction: false,
            m2: true,
            m3: true,
            dmu_eval: None,
            dmu_ref: None,
        }
    }
}

/// Multiplier weights and the ratings they induce for one method.
#[derive(Clone, Debug, Serialize)]
pub struct CrossMethod {
    /// Per evaluated DMU: input weights (None on NA rows).
    pub multiplier_input: Vec<Option<Vec<f64>>>,
    pub multiplier_output: Vec<Option<Vec<f64>>>,
    /// `[xi_L, xi_U]` per evaluated DMU.
    pub multiplier_rts: Vec<Option<[f64; 2]>>,
    /// Ratings: rows follow `dmu_eval` (rater), columns `dmu_ref` (rated).
    pub cross_eff: Vec<Vec<Option<f64>>>,
    /// Column means over raters.
    pub e: Vec<Option<f64>>,
    /// Row means over rated DMUs.
    pub a: Vec<Option<f64>>,
    /// `(E_kk - e_k)/e_k` for DMUs present on both axes.
    pub maverick: Vec<Option<f64>>,
    /// Secondary-goal program needed the automatic multiplier box.
    pub bounds_activated: Vec<bool>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CrossEffResult {
    pub orientation: Orientation,
    pub rts: Rts,
    pub epsilon: f64,
    pub selfapp: bool,
    pub correction: bool,
    pub dmu_eval: Vec<usize>,
    pub dmu_ref: Vec<usize>,
    pub dmu_eval_names: Vec<String>,
    pub dmu_ref_names: Vec<String>,
    /// Multiplier self-efficiencies of the evaluated DMUs.
    pub efficiency: Vec<Option<f64>>,
    pub arbitrary: CrossMethod,
    pub m2_agg: Option<CrossMethod>,
    pub m2_ben: Option<CrossMethod>,
    pub m3_agg: Option<CrossMethod>,
    pub m3_ben: Option<CrossMethod>,
}

struct Weights {
    v: Vec<f64>,
    u: Vec<f64>,
    xi: [f64; 2],
}

fn rts_lu(rts: &Rts) -> (f64, f64) {
    match rts {
        Rts::Crs => (0.0, 0.0),
        Rts::Vrs | Rts::Nirs | Rts::Ndrs => (1.0, 1.0),
        Rts::Grs { l, u } => (*l, *u),
    }
}

/// Rating of DMU `k` under the weights of one rater.
fn rate(
    data: &DeaData,
    w: &Weights,
    k: usize,
    io: bool,
    rts: &Rts,
    corrected: bool,
) -> Option<f64> {
    let (l, u) = rts_lu(rts);
    let vx: f64 = (0..data.num_inputs())
        .map(|i| w.v[i] * data.input[(i, k)])
        .sum();
    let uy: f64 = (0..data.num_outputs())
        .map(|r| w.u[r] * data.output[(r, k)])
        .sum();
    let rts_term = l * w.xi[0] + u * w.xi[1];
    let (num, den) = if io {
        if corrected {
            (uy, vx - rts_term)
        } else {
            (uy + rts_term, vx)
        }
    } else {
        (vx + rts_term, uy)
    };
    (den.abs() > 1e-12).then_some(num / den)
}

/// Secondary-goal program (method II or III) for one rater. Aggressive
/// minimizes, benevolent maximizes. Returns the weights and whether the
/// automatic multiplier box had to be applied.
#[allow(clippy::too_many_arguments)]
fn secondary_program(
    data: &DeaData,
    refcols: &[usize],
    rts: &Rts,
    io: bool,
    epsilon: f64,
    o: usize,
    e_oo: f64,
    method3: bool,
    corrected: bool,
    benevolent: bool,
) -> Result<Option<(Weights, bool)>> {
    let m = data.num_inputs();
    let s = data.num_outputs();
    let (has_l, has_u) = match rts {
        Rts::Crs => (false, false),
        Rts::Vrs | Rts::Grs { .. } => (true, true),
        Rts::Nirs => (false, true),
        Rts::Ndrs => (true, false),
    };
    let (l, u) = rts_lu(rts);
    let ncols = m + s + has_l as usize + has_u as usize;
    let col_l = has_l.then_some(m + s);
    let col_u = has_u.then_some(m + s + has_l as usize);
    let nm1 = (refcols.len() - refcols.contains(&o) as usize) as f64;
    if nm1 == 0.0 {
        return Ok(None);
    }

    // Sums over the other DMUs.
    let mut sx = vec![0.0; m];
    let mut sy = vec![0.0; s];
    for &j in refcols.iter().filter(|&&j| j != o) {
        for i in 0..m {
            sx[i] += data.input[(i, j)];
        }
        for r in 0..s {
            sy[r] += data.output[(r, j)];
        }
    }

    // xi sign pattern: io stores xiU negated, oo stores xiL negated, exactly
    // as in the plain multiplier program.
    let xi_obj = |coeff_l: f64, coeff_u: f64, objective: &mut [f64]| {
        if let Some(c) = col_l {
            objective[c] = if io { coeff_l } else { -coeff_l };
        }
        if let Some(c) = col_u {
            objective[c] = if io { -coeff_u } else { coeff_u };
        }
    };

    let mut objective = vec![0.0; ncols];
    if io {
        if method3 {
            // min u*sum(y_k) + (n-1)(L xiL + U xiU), with the corrected
            // variant dropping the rts term into the normalization row.
            for r in 0..s {
                objective[m + r] = sy[r];
            }
            if !corrected {
                xi_obj(nm1 * l, nm1 * u, &mut objective);
            }
        } else {
            // min -v*sum(x_k) + u*sum(y_k) + (n-1)(L xiL + U xiU)
            for i in 0..m {
                objective[i] = -sx[i];
            }
            for r in 0..s {
                objective[m + r] = sy[r];
            }
            xi_obj(nm1 * l, nm1 * u, &mut objective);
        }
    } else if method3 {
        for i in 0..m {
            objective[i] = sx[i];
        }
        xi_obj(nm1 * l, nm1 * u, &mut objective);
    } else {
        for i in 0..m {
            objective[i] = sx[i];
        }
        for r in 0..s {
            objective[m + r] = -sy[r];
        }
        xi_obj(nm1 * l, nm1 * u, &mut objective);
    }

    // Aggressive hurts the others: minimize their ratings in io, maximize
    // their eta-style scores in oo.
    let aggressive_dir = if io {
        Direction::Minimize
    } else {
        Direction::Maximize
    };
    let direction = match (benevolent, aggressive_dir) {
        (false, d) => d,
        (true, Direction::Minimize) => Direction::Maximize,
        (true, Direction::Maximize) => Direction::Minimize,
    };

    let build = |boxed: bool| -> LinearProgram {
        let mut lp = LinearProgram::new(direction, objective.clone());
        for k in 0..m + s {
            lp.set_bound(
                k,
                if boxed {
                    Bound::Boxed {
                        lo: epsilon,
                        hi: AUTO_BOUND,
                    }
                } else if epsilon > 0.0 {
                    Bound::Boxed {
                        lo: epsilon,
                        hi: f64::INFINITY,
                    }
                } else {
                    Bound::NonNegative
                },
            );
        }
        if boxed {
            for c in [col_l, col_u].into_iter().flatten() {
                lp.set_bound(
                    c,
                    Bound::Boxed {
                        lo: 0.0,
                        hi: AUTO_BOUND,
                    },
                );
            }
        }

        // Normalization.
        let mut norm = vec![0.0; ncols];
        if io {
            if method3 {
                for i in 0..m {
                    norm[i] = sx[i];
                }
                if corrected {
                    // v*sum(x_k) - (n-1)(L xiL + U xiU) = 1
                    if let Some(c) = col_l {
                        norm[c] = -nm1 * l;
                    }
                    if let Some(c) = col_u {
                        norm[c] = nm1 * u;
                    }
                }
            } else {
                for i in 0..m {
                    norm[i] = data.input[(i, o)];
                }
            }
        } else if method3 {
            for r in 0..s {
                norm[m + r] = sy[r];
            }
        } else {
            for r in 0..s {
                norm[m + r] = data.output[(r, o)];
            }
        }
        lp.push(norm, Sense::Eq, 1.0);

        // Feasibility rows over the reference set.
        for &j in refcols {
            let mut coeffs = vec![0.0; ncols];
            for i in 0..m {
                coeffs[i] = -data.input[(i, j)];
            }
            for r in 0..s {
                coeffs[m + r] = data.output[(r, j)];
            }
            if let Some(c) = col_l {
                coeffs[c] = 1.0;
            }
            if let Some(c) = col_u {
                coeffs[c] = -1.0;
            }
            if io {
                lp.push(coeffs, Sense::Le, 0.0);
            } else {
                for v in &mut coeffs {
                    *v = -*v;
                }
                lp.push(coeffs, Sense::Ge, 0.0);
            }
        }

        // Diagonal preservation: the rater keeps its own self-efficiency.
        let mut diag = vec![0.0; ncols];
        if io {
            if method3 {
                for i in 0..m {
                    diag[i] = -e_oo * data.input[(i, o)];
                }
                for r in 0..s {
                    diag[m + r] = data.output[(r, o)];
                }
            } else {
                for r in 0..s {
                    diag[m + r] = data.output[(r, o)];
                }
            }
        } else if method3 {
            for r in 0..s {
                diag[m + r] = -e_oo * data.output[(r, o)];
            }
            for i in 0..m {
                diag[i] = data.input[(i, o)];
            }
        } else {
            for i in 0..m {
                diag[i] = data.input[(i, o)];
            }
        }
        if let Some(c) = col_l {
            diag[c] = if io { l } else { -l };
        }
        if let Some(c) = col_u {
            diag[c] = if io { -u } else { u };
        }
        let rhs = if method3 { 0.0 } else { e_oo };
        lp.push(diag, Sense::Eq, rhs);
        lp
    };

    let sol = lp::solve(&build(false))?;
    let (sol, bounded) = if sol.status == lp::LpStatus::Unbounded {
        (lp::solve(&build(true))?, true)
    } else {
        (sol, false)
    };
    if !sol.is_optimal() {
        return Ok(None);
    }
    let mut xi = [0.0, 0.0];
    if let Some(c) = col_l {
        xi[0] = if io { sol.x[c] } else { -sol.x[c] };
    }
    if let Some(c) = col_u {
        xi[1] = if io { -sol.x[c] } else { sol.x[c] };
    }
    Ok(Some((
        Weights {
            v: sol.x[..m].to_vec(),
            u: sol.x[m..m + s].to_vec(),
            xi,
        },
        bounded,
    )))
}

fn assemble_method(
    data: &DeaData,
    dmu_eval: &[usize],
    dmu_ref: &[usize],
    weights: Vec<Option<Weights>>,
    bounds_activated: Vec<bool>,
    io: bool,
    rts: &Rts,
    corrected: bool,
    selfapp: bool,
) -> CrossMethod {
    let neval = dmu_eval.len();
    let nref = dmu_ref.len();
    let mut cross = vec![vec![None; nref]; neval];
    for (e, w) in weights.iter().enumerate() {
        if let Some(w) = w {
            for (kk, &k) in dmu_ref.iter().enumerate() {
                cross[e][kk] = rate(data, w, k, io, rts, corrected);
            }
        }
    }
    // Column means (e), excluding self-appraisal on request.
    let e_scores: Vec<Option<f64>> = (0..nref)
        .map(|kk| {
            let k = dmu_ref[kk];
            let mut sum = 0.0;
            let mut count = 0usize;
            for (e, &o) in dmu_eval.iter().enumerate() {
                if !selfapp && o == k {
                    continue;
                }
                match cross[e][kk] {
                    Some(v) => {
                        sum += v;
                        count += 1;
                    }
                    None => return None,
                }
            }
            (count > 0).then(|| sum / count as f64)
        })
        .collect();
    let a_scores: Vec<Option<f64>> = (0..neval)
        .map(|e| {
            let o = dmu_eval[e];
            let mut sum = 0.0;
            let mut count = 0usize;
            for (kk, &k) in dmu_ref.iter().enumerate() {
                if !selfapp && o == k {
                    continue;
                }
                match cross[e][kk] {
                    Some(v) => {
                        sum += v;
                        count += 1;
                    }
                    None => return None,
                }
            }
            (count > 0).then(|| sum / count as f64)
        })
        .collect();
    let maverick: Vec<Option<f64>> = (0..nref)
        .map(|kk| {
            let k = dmu_ref[kk];
            let e_at = dmu_eval.iter().position(|&o| o == k)?;
            let diag = cross[e_at][kk]?;
            let ek = e_scores[kk]?;
            (ek.abs() > 1e-12).then(|| (diag - ek) / ek)
        })
        .collect();
    CrossMethod {
        multiplier_input: weights
            .iter()
            .map(|w| w.as_ref().map(|w| w.v.clone()))
            .collect(),
        multiplier_output: weights
            .iter()
            .map(|w| w.as_ref().map(|w| w.u.clone()))
            .collect(),
        multiplier_rts: weights.iter().map(|w| w.as_ref().map(|w| w.xi)).collect(),
        cross_eff: cross,
        e: e_scores,
        a: a_scores,
        maverick,
        bounds_activated,
    }
}

/// Cross-efficiency analysis over the multiplier model. Arbitrary weights
/// come from the deterministic basic optimum of the multiplier program;
/// methods II and III re-optimize against the other DMUs while preserving
/// each rater's self-efficiency.
pub fn cross_efficiency(data: &DeaData, opts: &CrossEffOptions) -> Result<CrossEffResult> {
    opts.rts.validate()?;
    let io = match opts.orientation {
        Orientation::Io => true,
        Orientation::Oo => false,
        _ => {
            return Err(DeaError::InvalidParameter(
                "cross-efficiency takes orientation io or oo".into(),
            ))
        }
    };
    if opts.correction {
        let ok = io && matches!(opts.rts, Rts::Vrs | Rts::Nirs | Rts::Grs { .. });
        if !ok {
            return Err(DeaError::InvalidParameter(
                "the correction applies to input-oriented vrs, nirs or grs models".into(),
            ));
        }
    }
    let n = data.num_dmus();
    let dmu_eval = resolve_dmu_set(opts.dmu_eval.as_deref(), n, "dmu_eval")?;
    let dmu_ref = resolve_dmu_set(opts.dmu_ref.as_deref(), n, "dmu_ref")?;

    let base = model_multiplier(
        data,
        &MultiplierOptions {
            orientation: opts.orientation,
            rts: opts.rts,
            epsilon: opts.epsilon,
            dmu_eval: Some(dmu_eval.clone()),
            dmu_ref: Some(dmu_ref.clone()),
        },
    )?;
    let efficiency: Vec<Option<f64>> = base.records.iter().map(|r| r.efficiency).collect();
    let arb_weights: Vec<Option<Weights>> = base
        .records
        .iter()
        .map(|r| {
            if r.is_na() {
                None
            } else {
                Some(Weights {
                    v: r.multiplier_input.clone().unwrap(),
                    u: r.multiplier_output.clone().unwrap(),
                    xi: r.multiplier_rts.unwrap(),
                })
            }
        })
        .collect();
    let neval = dmu_eval.len();
    let arbitrary = assemble_method(
        data,
        &dmu_eval,
        &dmu_ref,
        arb_weights,
        vec![false; neval],
        io,
        &opts.rts,
        opts.correction,
        opts.selfapp,
    );

    let run_method = |method3: bool, benevolent: bool| -> Result<CrossMethod> {
        let mut weights = Vec::with_capacity(neval);
        let mut bounded = Vec::with_capacity(neval);
        for (e, &o) in dmu_eval.iter().enumerate() {
            match efficiency[e] {
                Some(e_oo) => {
                    match secondary_program(
                        data,
                        &dmu_ref,
                        &opts.rts,
                        io,
                        opts.epsilon,
                        o,
                        e_oo,
                        method3,
                        opts.correction && method3,
                        benevolent,
                    )? {
                        Some((w, b)) => {
                            weights.push(Some(w));
                            bounded.push(b);
                        }
                        None => {
                            weights.push(None);
                            bounded.push(false);
                        }
                    }
                }
                None => {
                    weights.push(None);
                    bounded.push(false);
                }
            }
        }
        Ok(assemble_method(
            data,
            &dmu_eval,
            &dmu_ref,
            weights,
            bounded,
            io,
            &opts.rts,
            opts.correction,
            opts.selfapp,
        ))
    };

    let (m2_agg, m2_ben) = if opts.m2 {
        (
            Some(run_method(false, false)?),
            Some(run_method(false, true)?),
        )
    } else {
        (None, None)
    };
    let (m3_agg, m3_ben) = if opts.m3 {
        (
            Some(run_method(true, false)?),
            Some(run_method(true, true)?),
        )
    } else {
        (None, None)
    };

    Ok(CrossEffResult {
        orientation: opts.orientation,
        rts: opts.rts,
        epsilon: opts.epsilon,
        selfapp: opts.selfapp,
        correction: opts.correction,
        dmu_eval_names: dmu_eval.iter().map(|&j| data.dmunames[j].clone()).collect(),
        dmu_ref_names: dmu_ref.iter().map(|&j| data.dmunames[j].clone()).collect(),
        dmu_eval,
        dmu_ref,
        efficiency,
        arbitrary,
        m2_agg,
        m2_ben,
        m3_agg,
        m3_ben,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
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
    fn single_ratio_makes_identical_rows() {
        let res = cross_efficiency(&m1(), &CrossEffOptions::default()).unwrap();
        let expected = [1.0, 0.5, 0.8, 0.25];
        for row in &res.arbitrary.cross_eff {
            for (v, e) in row.iter().zip(expected) {
                assert_abs_diff_eq!(v.unwrap(), e, epsilon = 1e-9);
            }
        }
        for (v, e) in res.arbitrary.e.iter().zip(expected) {
            assert_abs_diff_eq!(v.unwrap(), e, epsilon = 1e-9);
        }
        for v in res.arbitrary.maverick.iter() {
            assert_abs_diff_eq!(v.unwrap(), 0.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn single_dmu_degenerates() {
        let data = DeaData::from_matrices(array![[2.0]], array![[3.0]]).unwrap();
        let res = cross_efficiency(&data, &CrossEffOptions::default()).unwrap();
        assert_abs_diff_eq!(res.arbitrary.cross_eff[0][0].unwrap(), 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(res.arbitrary.e[0].unwrap(), 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(res.arbitrary.a[0].unwrap(), 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(res.arbitrary.maverick[0].unwrap(), 0.0, epsilon = 1e-9);
    }

    #[test]
    fn diagonal_matches_self_efficiency() {
        let data = DeaData::new(
            array![[2.0, 3.0, 5.0], [4.0, 2.0, 3.0]],
            array![[2.0, 3.0, 4.0]],
            Some(vec!["A".into(), "B".into(), "C".into()]),
            None,
            None,
            Default::default(),
        )
        .unwrap();
        for rts in [Rts::Crs, Rts::Vrs] {
            let res = cross_efficiency(
                &data,
                &CrossEffOptions {
                    rts,
                    ..Default::default()
                },
            )
            .unwrap();
            for method in [
                &res.arbitrary,
                res.m2_agg.as_ref().unwrap(),
                res.m2_ben.as_ref().unwrap(),
                res.m3_agg.as_ref().unwrap(),
                res.m3_ben.as_ref().unwrap(),
            ] {
                for (e, &o) in res.dmu_eval.iter().enumerate() {
                    let kk = res.dmu_ref.iter().position(|&k| k == o).unwrap();
                    if let (Some(diag), Some(selfeff)) =
                        (method.cross_eff[e][kk], res.efficiency[e])
                    {
                        assert_abs_diff_eq!(diag, selfeff, epsilon = 1e-7);
                    }
                }
            }
        }
    }

    #[test]
    fn selfapp_identity() {
        let data = DeaData::new(
            array![[2.0, 3.0, 5.0], [4.0, 2.0, 3.0]],
            array![[2.0, 3.0, 4.0]],
            Some(vec!["A".into(), "B".into(), "C".into()]),
            None,
            None,
            Default::default(),
        )
        .unwrap();
        let with = cross_efficiency(&data, &CrossEffOptions::default()).unwrap();
        let without = cross_efficiency(
            &data,
            &CrossEffOptions {
                selfapp: false,
                ..Default::default()
            },
        )
        .unwrap();
        let n = 3.0;
        for kk in 0..3 {
            let diag = with.arbitrary.cross_eff[kk][kk].unwrap();
            let e_with = with.arbitrary.e[kk].unwrap();
            let e_without = without.arbitrary.e[kk].unwrap();
            assert_abs_diff_eq!(e_with, ((n - 1.0) * e_without + diag) / n, epsilon = 1e-9);
        }
    }

    #[test]
    fn correction_keeps_scores_nonnegative() {
        // Under io VRS uncorrected cross-ratings can dip below zero when the
        // rts multiplier dominates; corrected ones must not.
        let data = DeaData::new(
            array![[1.0, 4.0, 9.0]],
            array![[6.0, 8.0, 1.0]],
            Some(vec!["A".into(), "B".into(), "C".into()]),
            None,
            None,
            Default::default(),
        )
        .unwrap();
        let res = cross_efficiency(
            &data,
            &CrossEffOptions {
                rts: Rts::Vrs,
                correction: true,
                ..Default::default()
            },
        )
        .unwrap();
        for method in [
            &res.arbitrary,
            res.m3_agg.as_ref().unwrap(),
            res.m3_ben.as_ref().unwrap(),
        ] {
            for row in &method.cross_eff {
                for v in row.iter().flatten() {
                    assert!(*v >= -1e-9, "corrected rating {v} went negative");
                }
            }
        }
    }

    #[test]
    fn correction_needs_io_and_vrs_family() {
        let err = cross_efficiency(
            &m1(),
            &CrossEffOptions {
                correction: true,
                ..Default::default()
            },
        );
        assert!(err.is_err());
    }
}
