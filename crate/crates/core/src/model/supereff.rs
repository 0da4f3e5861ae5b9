//! Super-efficiency models: radial, slacks-based and additive. All of them
//! rank efficient DMUs by evaluating each one against the reference set with
//! itself masked out.

use crate::data::DeaData;
use crate::error::{DeaError, Result};
use crate::lp::{self, Direction, LinearProgram, Sense};
use crate::model::radial::{solve_radial_dmu, RadialCall};
use crate::model::result::{DeaResult, DmuRecord, DmuStatus, ModelExtras};
use crate::model::{reject_special, resolve_dmu_set, rts_rows, Orientation, Param, Rts};

#[derive(Clone, Debug)]
pub struct SupereffOptions {
    pub orientation: Orientation,
    pub rts: Rts,
    pub dmu_eval: Option<Vec<usize>>,
    pub dmu_ref: Option<Vec<usize>>,
    pub maxslack: bool,
    pub weight_slack_i: Param,
    pub weight_slack_o: Param,
}

impl Default for SupereffOptions {
    fn default() -> Self {
        SupereffOptions {
            orientation: Orientation::Io,
            rts: Rts::Crs,
            dmu_eval: None,
            dmu_ref: None,
            maxslack: true,
            weight_slack_i: Param::Scalar(1.0),
            weight_slack_o: Param::Scalar(1.0),
        }
    }
}

/// Pad a lambda vector over `masked` reference columns back onto the full
/// `dmu_ref` axis, with zero weight on the masked-out DMU.
fn pad_lambda(lambda: &[f64], masked: &[usize], dmu_ref: &[usize]) -> Vec<f64> {
    let mut out = vec![0.0; dmu_ref.len()];
    for (k, &j) in masked.iter().enumerate() {
        if let Some(pos) = dmu_ref.iter().position(|&x| x == j) {
            out[pos] = lambda[k];
        }
    }
    out
}

/// Radial super-efficiency: the basic radial model with the evaluated DMU
/// excluded from its own reference set. Infeasible programs (a real
/// possibility away from CRS) are `None` scores.
pub fn model_supereff(data: &DeaData, opts: &SupereffOptions) -> Result<DeaResult> {
    reject_special(data, "supereff", false, false, false)?;
    opts.rts.validate()?;
    if !matches!(opts.orientation, Orientation::Io | Orientation::Oo) {
        return Err(DeaError::InvalidParameter(
            "supereff models take orientation io or oo".into(),
        ));
    }
    let n = data.num_dmus();
    let dmu_eval = resolve_dmu_set(opts.dmu_eval.as_deref(), n, "dmu_eval")?;
    let dmu_ref = resolve_dmu_set(opts.dmu_ref.as_deref(), n, "dmu_ref")?;
    let w_in = opts
        .weight_slack_i
        .resolve(data.num_inputs(), dmu_eval.len(), "weight_slack_i")?;
    let w_out =
        opts.weight_slack_o
            .resolve(data.num_outputs(), dmu_eval.len(), "weight_slack_o")?;

    let mut records = Vec::with_capacity(dmu_eval.len());
    for (e, &o) in dmu_eval.iter().enumerate() {
        let masked: Vec<usize> = dmu_ref.iter().copied().filter(|&j| j != o).collect();
        if masked.is_empty() {
            records.push(DmuRecord::failed(
                o,
                &data.dmunames[o],
                DmuStatus::EmptyReference,
            ));
            continue;
        }
        let call = RadialCall {
            data,
            refcols: &masked,
            rts: opts.rts,
            orientation: opts.orientation,
            maxslack: opts.maxslack,
            w_in: w_in.column(e).to_vec(),
            w_out: w_out.column(e).to_vec(),
            dir_in: None,
            dir_out: None,
        };
        let mut rec = solve_radial_dmu(&call, o)?;
        if let Some(lambda) = rec.lambda.take() {
            rec.lambda = Some(pad_lambda(&lambda, &masked, &dmu_ref));
        }
        records.push(rec);
    }
    Ok(DeaResult {
        modelname: "supereff".into(),
        orientation: opts.orientation,
        rts: opts.rts,
        maxslack: opts.maxslack,
        dmu_eval,
        dmu_ref,
        records,
        data: data.clone(),
        extras: ModelExtras::default(),
        notes: Vec::new(),
    })
}

#[derive(Clone, Debug)]
pub struct SbmSupereffOptions {
    /// `No`, `Io` (drops the output super-slacks) or `Oo` (drops the input
    /// super-slacks).
    pub orientation: Orientation,
    pub rts: Rts,
    pub weight_slack_i: Param,
    pub weight_slack_o: Param,
    pub dmu_eval: Option<Vec<usize>>,
    pub dmu_ref: Option<Vec<usize>>,
}

impl Default for SbmSupereffOptions {
    fn default() -> Self {
        SbmSupereffOptions {
            orientation: Orientation::No,
            rts: Rts::Crs,
            weight_slack_i: Param::Scalar(1.0),
            weight_slack_o: Param::Scalar(1.0),
            dmu_eval: None,
            dmu_ref: None,
        }
    }
}

/// Super-slack program in Charnes-Cooper form. Columns:
/// `[t, Lambda (nref), T- (m, unless oo), T+ (s, unless io)]`.
struct SuperProgram {
    lp: LinearProgram,
    nref: usize,
    has_tm: bool,
    has_tp: bool,
}

#[allow(clippy::too_many_arguments)]
fn super_cc_program(
    data: &DeaData,
    masked: &[usize],
    rts: &Rts,
    o: usize,
    w_in: &[f64],
    w_out: &[f64],
    orientation: Orientation,
    objective_weights: Option<(&[f64], &[f64])>,
) -> Result<SuperProgram> {
    let m = data.num_inputs();
    let s = data.num_outputs();
    let nref = masked.len();
    let has_tm = orientation != Orientation::Oo;
    let has_tp = orientation != Orientation::Io;
    let ntm = if has_tm { m } else { 0 };
    let ntp = if has_tp { s } else { 0 };
    let ncols = 1 + nref + ntm + ntp;
    let col_t = 0;
    let col_lam = 1;
    let col_tm = 1 + nref;
    let col_tp = 1 + nref + ntm;

    // Objective: delta form uses t + sum w-/(m x) T-; the additive variant
    // overrides with plain weights.
    let mut objective = vec![0.0; ncols];
    match objective_weights {
        None => {
            objective[col_t] = 1.0;
            if has_tm {
                for i in 0..m {
                    let x = data.input[(i, o)];
                    if x > 0.0 {
                        objective[col_tm + i] = w_in[i] / (m as f64 * x);
                    }
                }
            }
        }
        Some((wi, wo)) => {
            if has_tm {
                objective[col_tm..col_tm + m].copy_from_slice(wi);
            }
            if has_tp {
                objective[col_tp..col_tp + s].copy_from_slice(wo);
            }
        }
    }
    let mut lp = LinearProgram::new(Direction::Minimize, objective);

    // Normalization t - sum w+/(s y) T+ = 1 (or t = 1 when io / additive).
    let mut norm = vec![0.0; ncols];
    norm[col_t] = 1.0;
    if has_tp && objective_weights.is_none() {
        for r in 0..s {
            let y = data.output[(r, o)];
            if y > 0.0 {
                norm[col_tp + r] = -w_out[r] / (s as f64 * y);
            }
        }
    }
    lp.push(norm, Sense::Eq, 1.0);

    for i in 0..m {
        let mut coeffs = vec![0.0; ncols];
        for (k, &j) in masked.iter().enumerate() {
            coeffs[col_lam + k] = data.input[(i, j)];
        }
        coeffs[col_t] = -data.input[(i, o)];
        if has_tm {
            coeffs[col_tm + i] = -1.0;
        }
        lp.push(coeffs, Sense::Le, 0.0);
    }
    for r in 0..s {
        let mut coeffs = vec![0.0; ncols];
        for (k, &j) in masked.iter().enumerate() {
            coeffs[col_lam + k] = data.output[(r, j)];
        }
        coeffs[col_t] = -data.output[(r, o)];
        if has_tp {
            coeffs[col_tp + r] = 1.0;
        }
        lp.push(coeffs, Sense::Ge, 0.0);
    }
    for row in rts_rows(rts, ncols, col_lam..col_lam + nref, Some(col_t)) {
        lp.constraints.push(row);
    }
    Ok(SuperProgram {
        lp,
        nref,
        has_tm,
        has_tp,
    })
}

struct SuperSolution {
    lambda: Vec<f64>,
    t_in: Vec<f64>,
    t_out: Vec<f64>,
}

fn unpack_super(
    prog: &SuperProgram,
    data: &DeaData,
    sol: &lp::LpSolution,
) -> Option<SuperSolution> {
    let t = sol.x[0];
    if t <= 1e-12 {
        return None;
    }
    let m = data.num_inputs();
    let s = data.num_outputs();
    let lambda: Vec<f64> = sol.x[1..1 + prog.nref].iter().map(|v| v / t).collect();
    let mut at = 1 + prog.nref;
    let mut t_in = vec![0.0; m];
    if prog.has_tm {
        for v in t_in.iter_mut() {
            *v = (sol.x[at] / t).max(0.0);
            at += 1;
        }
    }
    let mut t_out = vec![0.0; s];
    if prog.has_tp {
        for v in t_out.iter_mut() {
            *v = (sol.x[at] / t).max(0.0);
            at += 1;
        }
    }
    Some(SuperSolution {
        lambda,
        t_in,
        t_out,
    })
}

fn delta_score(data: &DeaData, o: usize, t_in: &[f64], t_out: &[f64]) -> Option<f64> {
    let m = data.num_inputs();
    let s = data.num_outputs();
    let mut num = 1.0;
    for i in 0..m {
        let x = data.input[(i, o)];
        if x > 0.0 {
            num += t_in[i] / (m as f64 * x);
        }
    }
    let mut den = 1.0;
    for r in 0..s {
        let y = data.output[(r, o)];
        if y > 0.0 {
            den -= t_out[r] / (s as f64 * y);
        }
    }
    (den > 1e-12).then_some(num / den)
}

fn super_record(
    data: &DeaData,
    dmu_ref: &[usize],
    masked: &[usize],
    o: usize,
    prog: &SuperProgram,
    sol: &lp::LpSolution,
) -> DmuRecord {
    let name = &data.dmunames[o];
    match sol.status {
        lp::LpStatus::Infeasible => DmuRecord::failed(o, name, DmuStatus::Infeasible),
        lp::LpStatus::Unbounded => DmuRecord::failed(o, name, DmuStatus::Unbounded),
        lp::LpStatus::Optimal => {
            let mut rec = DmuRecord::new(o, name);
            match unpack_super(prog, data, sol) {
                Some(sup) => {
                    let m = data.num_inputs();
                    let s = data.num_outputs();
                    let mut tx = vec![0.0; m];
                    let mut ty = vec![0.0; s];
                    for (k, &j) in masked.iter().enumerate() {
                        for i in 0..m {
                            tx[i] += sup.lambda[k] * data.input[(i, j)];
                        }
                        for r in 0..s {
                            ty[r] += sup.lambda[k] * data.output[(r, j)];
                        }
                    }
                    rec.lambda = Some(pad_lambda(&sup.lambda, masked, dmu_ref));
                    rec.target_input = Some(tx);
                    rec.target_output = Some(ty);
                    rec.slack_input = Some(sup.t_in);
                    rec.slack_output = Some(sup.t_out);
                }
                None => rec.notes.push("degenerate normalization factor".into()),
            }
            rec
        }
    }
}

/// Slacks-based super-efficiency: distance to the part of the remaining PPS
/// that uses more input and less output, measured by super-slacks.
pub fn model_sbmsupereff(data: &DeaData, opts: &SbmSupereffOptions) -> Result<DeaResult> {
    reject_special(data, "sbmsupereff", false, false, false)?;
    opts.rts.validate()?;
    if !matches!(
        opts.orientation,
        Orientation::No | Orientation::Io | Orientation::Oo
    ) {
        return Err(DeaError::InvalidParameter(
            "sbmsupereff models take orientation no, io or oo".into(),
        ));
    }
    let n = data.num_dmus();
    let dmu_eval = resolve_dmu_set(opts.dmu_eval.as_deref(), n, "dmu_eval")?;
    let dmu_ref = resolve_dmu_set(opts.dmu_ref.as_deref(), n, "dmu_ref")?;
    let m = data.num_inputs();
    let s = data.num_outputs();
    let w_in = opts
        .weight_slack_i
        .resolve(m, dmu_eval.len(), "weight_slack_i")?;
    let w_out = opts
        .weight_slack_o
        .resolve(s, dmu_eval.len(), "weight_slack_o")?;
    if w_in.iter().any(|&w| w <= 0.0) || w_out.iter().any(|&w| w <= 0.0) {
        return Err(DeaError::InvalidParameter(
            "super-slack weights must be positive".into(),
        ));
    }

    let mut records = Vec::with_capacity(dmu_eval.len());
    for (e, &o) in dmu_eval.iter().enumerate() {
        let masked: Vec<usize> = dmu_ref.iter().copied().filter(|&j| j != o).collect();
        if masked.is_empty() {
            records.push(DmuRecord::failed(
                o,
                &data.dmunames[o],
                DmuStatus::EmptyReference,
            ));
            continue;
        }
        let prog = super_cc_program(
            data,
            &masked,
            &opts.rts,
            o,
            &w_in.column(e).to_vec(),
            &w_out.column(e).to_vec(),
            opts.orientation,
            None,
        )?;
        let sol = lp::solve(&prog.lp)?;
        let mut rec = super_record(data, &dmu_ref, &masked, o, &prog, &sol);
        if sol.is_optimal() && rec.status == DmuStatus::Optimal {
            rec.efficiency = Some(sol.objective);
        }
        records.push(rec);
    }
    Ok(DeaResult {
        modelname: "sbmsupereff".into(),
        orientation: opts.orientation,
        rts: opts.rts,
        maxslack: false,
        dmu_eval,
        dmu_ref,
        records,
        data: data.clone(),
        extras: ModelExtras::default(),
        notes: Vec::new(),
    })
}

#[derive(Clone, Debug)]
pub struct AddSupereffOptions {
    /// `No`, `Io` (no output super-slacks) or `Oo` (no input super-slacks).
    pub orientation: Orientation,
    pub rts: Rts,
    /// Defaults to `1/x_o` per input (unit invariant).
    pub weight_slack_i: Option<Param>,
    /// Defaults to `1/y_o` per output.
    pub weight_slack_o: Option<Param>,
    pub dmu_eval: Option<Vec<usize>>,
    pub dmu_ref: Option<Vec<usize>>,
}

impl Default for AddSupereffOptions {
    fn default() -> Self {
        AddSupereffOptions {
            orientation: Orientation::No,
            rts: Rts::Crs,
            weight_slack_i: None,
            weight_slack_o: None,
            dmu_eval: None,
            dmu_ref: None,
        }
    }
}

/// Additive super-efficiency: minimize the weighted super-slack sum. The
/// record's `objective` holds that optimum and `efficiency` the derived
/// delta score.
pub fn model_addsupereff(data: &DeaData, opts: &AddSupereffOptions) -> Result<DeaResult> {
    reject_special(data, "addsupereff", false, false, false)?;
    opts.rts.validate()?;
    if !matches!(
        opts.orientation,
        Orientation::No | Orientation::Io | Orientation::Oo
    ) {
        return Err(DeaError::InvalidParameter(
            "addsupereff models take orientation no, io or oo".into(),
        ));
    }
    let n = data.num_dmus();
    let dmu_eval = resolve_dmu_set(opts.dmu_eval.as_deref(), n, "dmu_eval")?;
    let dmu_ref = resolve_dmu_set(opts.dmu_ref.as_deref(), n, "dmu_ref")?;
    let m = data.num_inputs();
    let s = data.num_outputs();
    let neval = dmu_eval.len();
    let explicit_wi = match &opts.weight_slack_i {
        Some(p) => Some(p.resolve(m, neval, "weight_slack_i")?),
        None => None,
    };
    let explicit_wo = match &opts.weight_slack_o {
        Some(p) => Some(p.resolve(s, neval, "weight_slack_o")?),
        None => None,
    };
    if explicit_wi
        .as_ref()
        .is_some_and(|w| w.iter().any(|&v| v < 0.0))
        || explicit_wo
            .as_ref()
            .is_some_and(|w| w.iter().any(|&v| v < 0.0))
    {
        return Err(DeaError::InvalidParameter(
            "super-slack weights must be nonnegative".into(),
        ));
    }
    let wi_zero = explicit_wi
        .as_ref()
        .is_some_and(|w| w.iter().all(|&v| v == 0.0));
    let wo_zero = explicit_wo
        .as_ref()
        .is_some_and(|w| w.iter().all(|&v| v == 0.0));
    let degenerate = match opts.orientation {
        Orientation::Io => wi_zero,
        Orientation::Oo => wo_zero,
        _ => wi_zero && wo_zero,
    };
    if degenerate {
        return Err(DeaError::InvalidParameter(
            "all-zero super-slack weights on the active side".into(),
        ));
    }

    let mut records = Vec::with_capacity(neval);
    for (e, &o) in dmu_eval.iter().enumerate() {
        let masked: Vec<usize> = dmu_ref.iter().copied().filter(|&j| j != o).collect();
        let name = &data.dmunames[o];
        if masked.is_empty() {
            records.push(DmuRecord::failed(o, name, DmuStatus::EmptyReference));
            continue;
        }
        // Default weights 1/x_o, 1/y_o need positive data.
        let mut bad_default = false;
        let wi: Vec<f64> = match &explicit_wi {
            Some(w) => w.column(e).to_vec(),
            None => (0..m)
                .map(|i| {
                    let x = data.input[(i, o)];
                    if x > 0.0 {
                        1.0 / x
                    } else {
                        bad_default = true;
                        0.0
                    }
                })
                .collect(),
        };
        let wo: Vec<f64> = match &explicit_wo {
            Some(w) => w.column(e).to_vec(),
            None => (0..s)
                .map(|r| {
                    let y = data.output[(r, o)];
                    if y > 0.0 {
                        1.0 / y
                    } else {
                        bad_default = true;
                        0.0
                    }
                })
                .collect(),
        };
        if bad_default {
            let mut rec = DmuRecord::failed(o, name, DmuStatus::Infeasible);
            rec.notes
                .push("default weights undefined on nonpositive data".into());
            records.push(rec);
            continue;
        }
        let prog = super_cc_program(
            data,
            &masked,
            &opts.rts,
            o,
            &wi,
            &wo,
            opts.orientation,
            Some((&wi, &wo)),
        )?;
        let sol = lp::solve(&prog.lp)?;
        let mut rec = super_record(data, &dmu_ref, &masked, o, &prog, &sol);
        if sol.is_optimal() && rec.status == DmuStatus::Optimal {
            rec.objective = Some(sol.objective);
            let t_in = rec.slack_input.clone().unwrap_or_else(|| vec![0.0; m]);
            let t_out = rec.slack_output.clone().unwrap_or_else(|| vec![0.0; s]);
            rec.efficiency = delta_score(data, o, &t_in, &t_out);
            if rec.efficiency.is_none() {
                rec.notes.push("delta denominator not positive".into());
            }
        }
        records.push(rec);
    }
    Ok(DeaResult {
        modelname: "addsupereff".into(),
        orientation: opts.orientation,
        rts: opts.rts,
        maxslack: false,
        dmu_eval,
        dmu_ref,
        records,
        data: data.clone(),
        extras: ModelExtras::default(),
        notes: Vec::new(),
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
    fn radial_super_scores_on_m1() {
        let res = model_supereff(&m1(), &SupereffOptions::default()).unwrap();
        // A scores 1.25 via C at lambda 0.5; inefficient B keeps its 0.5.
        assert_abs_diff_eq!(res.records[0].efficiency.unwrap(), 1.25, epsilon = 1e-9);
        assert_abs_diff_eq!(res.records[1].efficiency.unwrap(), 0.5, epsilon = 1e-9);
    }

    #[test]
    fn vrs_super_efficiency_can_be_infeasible() {
        // Two DMUs; A has the unique minimum input, so excluding it leaves
        // an output-oriented VRS program with no feasible intensity vector.
        let data = DeaData::new(
            array![[1.0, 2.0]],
            array![[1.0, 2.0]],
            Some(vec!["A".into(), "B".into()]),
            None,
            None,
            Default::default(),
        )
        .unwrap();
        let res = model_supereff(
            &data,
            &SupereffOptions {
                orientation: Orientation::Oo,
                rts: Rts::Vrs,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(res.records[0].status, DmuStatus::Infeasible);
        assert!(res.records[0].efficiency.is_none());
    }

    #[test]
    fn empty_reference_is_flagged() {
        let res = model_supereff(
            &m1(),
            &SupereffOptions {
                dmu_eval: Some(vec![0]),
                dmu_ref: Some(vec![0]),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(res.records[0].status, DmuStatus::EmptyReference);
    }

    #[test]
    fn ssbm_io_on_m1() {
        let res = model_sbmsupereff(
            &m1(),
            &SbmSupereffOptions {
                orientation: Orientation::Io,
                ..Default::default()
            },
        )
        .unwrap();
        assert_abs_diff_eq!(res.records[0].efficiency.unwrap(), 1.25, epsilon = 1e-9);
        for rec in &res.records {
            assert!(rec.efficiency.unwrap() >= 1.0 - 1e-9);
        }
    }

    #[test]
    fn addsupereff_io_matches_ssbm_io() {
        let ssbm = model_sbmsupereff(
            &m1(),
            &SbmSupereffOptions {
                orientation: Orientation::Io,
                ..Default::default()
            },
        )
        .unwrap();
        let add = model_addsupereff(
            &m1(),
            &AddSupereffOptions {
                orientation: Orientation::Io,
                ..Default::default()
            },
        )
        .unwrap();
        for (a, b) in ssbm.records.iter().zip(add.records.iter()) {
            assert_abs_diff_eq!(a.efficiency.unwrap(), b.efficiency.unwrap(), epsilon = 1e-9);
        }
        // A: objective 0.25, delta 1.25.
        assert_abs_diff_eq!(add.records[0].objective.unwrap(), 0.25, epsilon = 1e-9);
        assert_abs_diff_eq!(add.records[0].efficiency.unwrap(), 1.25, epsilon = 1e-9);
    }

    #[test]
    fn ssbm_io_vs_radial_super_on_one_in_one_out() {
        // On 1-in/1-out data the efficient DMU's SSBM io score equals its
        // radial super-score; DMUs inside the remaining PPS sit at delta 1.
        let data = m1();
        let radial = model_supereff(&data, &SupereffOptions::default()).unwrap();
        let ssbm = model_sbmsupereff(
            &data,
            &SbmSupereffOptions {
                orientation: Orientation::Io,
                ..Default::default()
            },
        )
        .unwrap();
        for (r, s) in radial.records.iter().zip(ssbm.records.iter()) {
            let theta = r.efficiency.unwrap();
            let delta = s.efficiency.unwrap();
            if theta >= 1.0 - 1e-9 {
                assert_abs_diff_eq!(delta, theta, epsilon = 1e-9);
            } else {
                assert_abs_diff_eq!(delta, 1.0, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn addsupereff_default_weights_are_unit_invariant() {
        let a = model_addsupereff(&m1(), &AddSupereffOptions::default()).unwrap();
        let mut scaled_in = m1().input.clone();
        scaled_in *= 3.0;
        let scaled = DeaData::new(
            scaled_in,
            m1().output.clone(),
            Some(m1().dmunames.clone()),
            None,
            None,
            Default::default(),
        )
        .unwrap();
        let b = model_addsupereff(&scaled, &AddSupereffOptions::default()).unwrap();
        for (ra, rb) in a.records.iter().zip(b.records.iter()) {
            assert_abs_diff_eq!(ra.objective.unwrap(), rb.objective.unwrap(), epsilon = 1e-9);
        }
    }

    #[test]
    fn all_zero_weights_rejected() {
        let err = model_addsupereff(
            &m1(),
            &AddSupereffOptions {
                weight_slack_i: Some(Param::Scalar(0.0)),
                weight_slack_o: Some(Param::Scalar(0.0)),
                ..Default::default()
            },
        );
        assert!(err.is_err());
    }
}
