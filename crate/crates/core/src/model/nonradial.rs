//! Non-radial (per-variable factor) models and their preference-structure
//! generalization.

use crate::data::DeaData;
use crate::error::{DeaError, Result};
use crate::lp::{self, Bound, Direction, LinearProgram, Sense};
use crate::model::radial::{input_classes, output_classes, RowClass};
use crate::model::result::{DeaResult, DmuRecord, DmuStatus, ModelExtras};
use crate::model::{reject_special, resolve_dmu_set, rts_rows, Orientation, Param, Rts};

#[derive(Clone, Debug)]
pub struct NonradialOptions {
    pub orientation: Orientation,
    pub rts: Rts,
    pub dmu_eval: Option<Vec<usize>>,
    pub dmu_ref: Option<Vec<usize>>,
    pub maxslack: bool,
    /// Weights of the max-slack stage (the side without factors).
    pub weight_slack: Param,
}

impl Default for NonradialOptions {
    fn default() -> Self {
        NonradialOptions {
            orientation: Orientation::Io,
            rts: Rts::Crs,
            dmu_eval: None,
            dmu_ref: None,
            maxslack: true,
            weight_slack: Param::Scalar(1.0),
        }
    }
}

#[derive(Clone, Debug)]
pub struct DeapsOptions {
    pub orientation: Orientation,
    pub rts: Rts,
    /// Preference weights for the factor objective, one per input (io) or
    /// output (oo).
    pub weight_eff: Param,
    /// Keep the factor bounds (theta <= 1 / eta >= 1).
    pub restricted_eff: bool,
    pub dmu_eval: Option<Vec<usize>>,
    pub dmu_ref: Option<Vec<usize>>,
    pub maxslack: bool,
    pub weight_slack: Param,
}

impl Default for DeapsOptions {
    fn default() -> Self {
        DeapsOptions {
            orientation: Orientation::Io,
            rts: Rts::Crs,
            weight_eff: Param::Scalar(1.0),
            restricted_eff: true,
            dmu_eval: None,
            dmu_ref: None,
            maxslack: true,
            weight_slack: Param::Scalar(1.0),
        }
    }
}

struct FactorSetup {
    /// Rows that carry a factor variable, in row order.
    factor_rows: Vec<usize>,
    io: bool,
}

fn factor_setup(data: &DeaData, orientation: Orientation, model: &str) -> Result<FactorSetup> {
    let io = match orientation {
        Orientation::Io => true,
        Orientation::Oo => false,
        _ => {
            return Err(DeaError::InvalidParameter(format!(
                "{model} models take orientation io or oo"
            )))
        }
    };
    let classes = if io {
        input_classes(data)
    } else {
        output_classes(data)
    };
    let factor_rows: Vec<usize> = classes
        .iter()
        .enumerate()
        .filter(|(_, c)| **c == RowClass::Plain)
        .map(|(i, _)| i)
        .collect();
    if factor_rows.is_empty() {
        return Err(DeaError::InvalidParameter(format!(
            "{model}: no discretionary variable left on the oriented side"
        )));
    }
    Ok(FactorSetup { factor_rows, io })
}

/// Build and solve the factor stage plus max-slack stage for one DMU.
/// `obj_weights` are the (already positive) objective weights per factor row;
/// the reported score divides by their sum.
#[allow(clippy::too_many_arguments)]
fn solve_factor_dmu(
    data: &DeaData,
    refcols: &[usize],
    rts: &Rts,
    setup: &FactorSetup,
    obj_weights: &[f64],
    restricted: bool,
    maxslack: bool,
    w_slack: &[f64],
    o: usize,
) -> Result<DmuRecord> {
    let name = &data.dmunames[o];
    let m = data.num_inputs();
    let s = data.num_outputs();
    let io = setup.io;
    let nf = setup.factor_rows.len();
    let nref = refcols.len();
    let ncols = nf + nref;
    let wsum: f64 = obj_weights.iter().sum();

    let oriented_val = |row: usize| {
        if io {
            data.input[(row, o)]
        } else {
            data.output[(row, o)]
        }
    };
    for (fi, &row) in setup.factor_rows.iter().enumerate() {
        let _ = fi;
        if oriented_val(row) <= 0.0 {
            return Err(DeaError::InvalidData(format!(
                "non-radial factors need positive data; DMU '{name}' has {} = {}",
                if io { "input" } else { "output" },
                oriented_val(row)
            )));
        }
    }

    // Stage 1: factors + lambdas.
    let mut objective = vec![0.0; ncols];
    for (fi, w) in obj_weights.iter().enumerate() {
        objective[fi] = w / wsum;
    }
    let mut lp = LinearProgram::new(
        if io {
            Direction::Minimize
        } else {
            Direction::Maximize
        },
        objective,
    );
    for fi in 0..nf {
        let bound = match (restricted, io) {
            (true, true) => Bound::Boxed { lo: 0.0, hi: 1.0 },
            (true, false) => Bound::Boxed {
                lo: 1.0,
                hi: f64::INFINITY,
            },
            (false, _) => Bound::NonNegative,
        };
        lp.set_bound(fi, bound);
    }

    let in_class = input_classes(data);
    let out_class = output_classes(data);
    for i in 0..m {
        let mut coeffs = vec![0.0; ncols];
        for (k, &j) in refcols.iter().enumerate() {
            coeffs[nf + k] = data.input[(i, j)];
        }
        let xo = data.input[(i, o)];
        if io {
            match in_class[i] {
                RowClass::Plain => {
                    let fi = setup.factor_rows.iter().position(|&r| r == i).unwrap();
                    coeffs[fi] = -xo;
                    lp.push(coeffs, Sense::Eq, 0.0);
                }
                RowClass::NonDiscretionary => lp.push(coeffs, Sense::Le, xo),
                _ => unreachable!("rejected earlier"),
            }
        } else {
            match in_class[i] {
                RowClass::Plain | RowClass::NonDiscretionary => lp.push(coeffs, Sense::Le, xo),
                _ => unreachable!("rejected earlier"),
            }
        }
    }
    for r in 0..s {
        let mut coeffs = vec![0.0; ncols];
        for (k, &j) in refcols.iter().enumerate() {
            coeffs[nf + k] = data.output[(r, j)];
        }
        let yo = data.output[(r, o)];
        if io {
            match out_class[r] {
                RowClass::Plain | RowClass::NonDiscretionary => lp.push(coeffs, Sense::Ge, yo),
                _ => unreachable!("rejected earlier"),
            }
        } else {
            match out_class[r] {
                RowClass::Plain => {
                    let fi = setup.factor_rows.iter().position(|&x| x == r).unwrap();
                    coeffs[fi] = -yo;
                    lp.push(coeffs, Sense::Eq, 0.0);
                }
                RowClass::NonDiscretionary => lp.push(coeffs, Sense::Ge, yo),
                _ => unreachable!("rejected earlier"),
            }
        }
    }
    for row in rts_rows(rts, ncols, nf..ncols, None) {
        lp.constraints.push(row);
    }

    let sol = lp::solve(&lp)?;
    match sol.status {
        lp::LpStatus::Infeasible => return Ok(DmuRecord::failed(o, name, DmuStatus::Infeasible)),
        lp::LpStatus::Unbounded => return Ok(DmuRecord::failed(o, name, DmuStatus::Unbounded)),
        lp::LpStatus::Optimal => {}
    }
    let factors: Vec<f64> = sol.x[..nf].to_vec();
    let mut rec = DmuRecord::new(o, name);
    rec.efficiency = Some(sol.objective);
    rec.eff_components = Some(factors.clone());

    // Stage 2: factors fixed; slacks on the opposite side's plain rows.
    let slack_rows: Vec<usize> = if io {
        out_class
            .iter()
            .enumerate()
            .filter(|(_, c)| **c == RowClass::Plain)
            .map(|(r, _)| r)
            .collect()
    } else {
        in_class
            .iter()
            .enumerate()
            .filter(|(_, c)| **c == RowClass::Plain)
            .map(|(i, _)| i)
            .collect()
    };
    let ns = slack_rows.len();
    let ncols2 = nref + ns;
    let mut objective2 = vec![0.0; ncols2];
    for (si, &row) in slack_rows.iter().enumerate() {
        objective2[nref + si] = w_slack[row];
    }
    let mut lp2 = LinearProgram::new(Direction::Maximize, objective2);
    for i in 0..m {
        let mut coeffs = vec![0.0; ncols2];
        for (k, &j) in refcols.iter().enumerate() {
            coeffs[k] = data.input[(i, j)];
        }
        let xo = data.input[(i, o)];
        if io {
            match in_class[i] {
                RowClass::Plain => {
                    let fi = setup.factor_rows.iter().position(|&r| r == i).unwrap();
                    lp2.push(coeffs, Sense::Eq, factors[fi] * xo);
                }
                _ => lp2.push(coeffs, Sense::Le, xo),
            }
        } else {
            match in_class[i] {
                RowClass::Plain => {
                    let si = slack_rows.iter().position(|&r| r == i).unwrap();
                    coeffs[nref + si] = 1.0;
                    lp2.push(coeffs, Sense::Eq, xo);
                }
                _ => lp2.push(coeffs, Sense::Le, xo),
            }
        }
    }
    for r in 0..s {
        let mut coeffs = vec![0.0; ncols2];
        for (k, &j) in refcols.iter().enumerate() {
            coeffs[k] = data.output[(r, j)];
        }
        let yo = data.output[(r, o)];
        if io {
            match out_class[r] {
                RowClass::Plain => {
                    let si = slack_rows.iter().position(|&x| x == r).unwrap();
                    coeffs[nref + si] = -1.0;
                    lp2.push(coeffs, Sense::Eq, yo);
                }
                _ => lp2.push(coeffs, Sense::Ge, yo),
            }
        } else {
            match out_class[r] {
                RowClass::Plain => {
                    let fi = setup.factor_rows.iter().position(|&x| x == r).unwrap();
                    lp2.push(coeffs, Sense::Eq, factors[fi] * yo);
                }
                _ => lp2.push(coeffs, Sense::Ge, yo),
            }
        }
    }
    for row in rts_rows(rts, ncols2, 0..nref, None) {
        lp2.constraints.push(row);
    }

    let run_stage2 = maxslack;
    let sol2 = if run_stage2 {
        Some(lp::solve(&lp2)?)
    } else {
        None
    };
    let lambda = match &sol2 {
        Some(s2) if s2.is_optimal() => s2.x[..nref].to_vec(),
        _ => sol.x[nf..].to_vec(),
    };
    let mut slack_in = vec![0.0; m];
    let mut slack_out = vec![0.0; s];
    if let Some(s2) = &sol2 {
        if s2.is_optimal() {
            rec.objective = Some(s2.objective);
            for (si, &row) in slack_rows.iter().enumerate() {
                let v = s2.x[nref + si].max(0.0);
                if io {
                    slack_out[row] = v;
                } else {
                    slack_in[row] = v;
                }
            }
        }
    }
    let mut tx = vec![0.0; m];
    let mut ty = vec![0.0; s];
    for (k, &j) in refcols.iter().enumerate() {
        for i in 0..m {
            tx[i] += lambda[k] * data.input[(i, j)];
        }
        for r in 0..s {
            ty[r] += lambda[k] * data.output[(r, j)];
        }
    }
    if sol2.is_none() {
        // Residual slacks on the opposite side.
        for &row in &slack_rows {
            if io {
                slack_out[row] = (ty[row] - data.output[(row, o)]).max(0.0);
            } else {
                slack_in[row] = (data.input[(row, o)] - tx[row]).max(0.0);
            }
        }
    }
    rec.lambda = Some(lambda);
    rec.slack_input = Some(slack_in);
    rec.slack_output = Some(slack_out);
    rec.target_input = Some(tx);
    rec.target_output = Some(ty);
    Ok(rec)
}

/// Non-radial models: every discretionary input (io) or output (oo) gets its
/// own contraction/expansion factor; the score is the plain mean of the
/// factors.
pub fn model_nonradial(data: &DeaData, opts: &NonradialOptions) -> Result<DeaResult> {
    reject_special(data, "nonradial", false, true, false)?;
    opts.rts.validate()?;
    let setup = factor_setup(data, opts.orientation, "nonradial")?;
    let n = data.num_dmus();
    let dmu_eval = resolve_dmu_set(opts.dmu_eval.as_deref(), n, "dmu_eval")?;
    let dmu_ref = resolve_dmu_set(opts.dmu_ref.as_deref(), n, "dmu_ref")?;
    let slack_len = if setup.io {
        data.num_outputs()
    } else {
        data.num_inputs()
    };
    let w_slack = opts
        .weight_slack
        .resolve(slack_len, dmu_eval.len(), "weight_slack")?;
    let obj_weights = vec![1.0; setup.factor_rows.len()];

    let mut records = Vec::with_capacity(dmu_eval.len());
    for (e, &o) in dmu_eval.iter().enumerate() {
        records.push(solve_factor_dmu(
            data,
            &dmu_ref,
            &opts.rts,
            &setup,
            &obj_weights,
            true,
            opts.maxslack,
            &w_slack.column(e).to_vec(),
            o,
        )?);
    }
    Ok(DeaResult {
        modelname: "nonradial".into(),
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

/// Preference-structure models: a weighted factor objective, optionally
/// without the factor bounds.
pub fn model_deaps(data: &DeaData, opts: &DeapsOptions) -> Result<DeaResult> {
    reject_special(data, "deaps", false, true, false)?;
    opts.rts.validate()?;
    let setup = factor_setup(data, opts.orientation, "deaps")?;
    let n = data.num_dmus();
    let dmu_eval = resolve_dmu_set(opts.dmu_eval.as_deref(), n, "dmu_eval")?;
    let dmu_ref = resolve_dmu_set(opts.dmu_ref.as_deref(), n, "dmu_ref")?;
    let nf = setup.factor_rows.len();
    let weff = opts.weight_eff.resolve(nf, 1, "weight_eff")?;
    let obj_weights: Vec<f64> = (0..nf).map(|fi| weff[(fi, 0)]).collect();
    if obj_weights.iter().any(|&w| w <= 0.0) {
        return Err(DeaError::InvalidParameter(
            "preference weights must be positive".into(),
        ));
    }
    let slack_len = if setup.io {
        data.num_outputs()
    } else {
        data.num_inputs()
    };
    let w_slack = opts
        .weight_slack
        .resolve(slack_len, dmu_eval.len(), "weight_slack")?;

    let mut records = Vec::with_capacity(dmu_eval.len());
    for (e, &o) in dmu_eval.iter().enumerate() {
        records.push(solve_factor_dmu(
            data,
            &dmu_ref,
            &opts.rts,
            &setup,
            &obj_weights,
            opts.restricted_eff,
            opts.maxslack,
            &w_slack.column(e).to_vec(),
            o,
        )?);
    }
    Ok(DeaResult {
        modelname: "deaps".into(),
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

/// First-stage preference-structure program, unsolved; shared by the
/// `returnlp` surfaces of the non-radial family.
pub fn model_deaps_lp(data: &DeaData, opts: &DeapsOptions) -> Result<Vec<(String, LinearProgram)>> {
    reject_special(data, "deaps", false, true, false)?;
    opts.rts.validate()?;
    let setup = factor_setup(data, opts.orientation, "deaps")?;
    let n = data.num_dmus();
    let dmu_eval = resolve_dmu_set(opts.dmu_eval.as_deref(), n, "dmu_eval")?;
    let dmu_ref = resolve_dmu_set(opts.dmu_ref.as_deref(), n, "dmu_ref")?;
    let nf = setup.factor_rows.len();
    let weff = opts.weight_eff.resolve(nf, 1, "weight_eff")?;
    let obj_weights: Vec<f64> = (0..nf).map(|fi| weff[(fi, 0)]).collect();
    let wsum: f64 = obj_weights.iter().sum();

    let mut out = Vec::with_capacity(dmu_eval.len());
    for &o in &dmu_eval {
        // Rebuild only the stage-1 program.
        let m = data.num_inputs();
        let s = data.num_outputs();
        let nref = dmu_ref.len();
        let ncols = nf + nref;
        let mut objective = vec![0.0; ncols];
        for (fi, w) in obj_weights.iter().enumerate() {
            objective[fi] = w / wsum;
        }
        let mut lp = LinearProgram::new(
            if setup.io {
                Direction::Minimize
            } else {
                Direction::Maximize
            },
            objective,
        );
        for fi in 0..nf {
            let bound = match (opts.restricted_eff, setup.io) {
                (true, true) => Bound::Boxed { lo: 0.0, hi: 1.0 },
                (true, false) => Bound::Boxed {
                    lo: 1.0,
                    hi: f64::INFINITY,
                },
                (false, _) => Bound::NonNegative,
            };
            lp.set_bound(fi, bound);
        }
        for i in 0..m {
            let mut coeffs = vec![0.0; ncols];
            for (k, &j) in dmu_ref.iter().enumerate() {
                coeffs[nf + k] = data.input[(i, j)];
            }
            if setup.io {
                let fi = setup.factor_rows.iter().position(|&r| r == i).unwrap();
                coeffs[fi] = -data.input[(i, o)];
                lp.push(coeffs, Sense::Eq, 0.0);
            } else {
                lp.push(coeffs, Sense::Le, data.input[(i, o)]);
            }
        }
        for r in 0..s {
            let mut coeffs = vec![0.0; ncols];
            for (k, &j) in dmu_ref.iter().enumerate() {
                coeffs[nf + k] = data.output[(r, j)];
            }
            if setup.io {
                lp.push(coeffs, Sense::Ge, data.output[(r, o)]);
            } else {
                let fi = setup.factor_rows.iter().position(|&x| x == r).unwrap();
                coeffs[fi] = -data.output[(r, o)];
                lp.push(coeffs, Sense::Eq, 0.0);
            }
        }
        for row in rts_rows(&opts.rts, ncols, nf..ncols, None) {
            lp.constraints.push(row);
        }
        out.push((data.dmunames[o].clone(), lp));
    }
    Ok(out)
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
    fn single_input_coincides_with_radial() {
        let res = model_nonradial(&m1(), &NonradialOptions::default()).unwrap();
        let expected = [1.0, 0.5, 0.8, 0.25];
        for (rec, e) in res.records.iter().zip(expected) {
            assert_abs_diff_eq!(rec.efficiency.unwrap(), e, epsilon = 1e-9);
        }
    }

    #[test]
    fn oo_factors_at_least_one() {
        let res = model_nonradial(
            &m1(),
            &NonradialOptions {
                orientation: Orientation::Oo,
                ..Default::default()
            },
        )
        .unwrap();
        for rec in &res.records {
            for f in rec.eff_components.as_ref().unwrap() {
                assert!(*f >= 1.0 - 1e-9);
            }
        }
    }

    #[test]
    fn two_input_micro() {
        // A(1,4), B(4,1), C(4,4), all y = 1. Factor LP for C under CRS.
        let data = DeaData::new(
            array![[1.0, 4.0, 4.0], [4.0, 1.0, 4.0]],
            array![[1.0, 1.0, 1.0]],
            Some(vec!["A".into(), "B".into(), "C".into()]),
            None,
            None,
            Default::default(),
        )
        .unwrap();
        let res = model_nonradial(&data, &NonradialOptions::default()).unwrap();
        let rec = &res.records[2];
        // Oracle: minimize (theta1 + theta2)/2 with 4*theta_i = (X lambda)_i and
        // lambda_A + lambda_B + lambda_C >= 1; cost of any unit mix is
        // 5(lambda_A + lambda_B) or 8 lambda_C per factor pair, so the optimum
        // sits at lambda_A + lambda_B = 1 with mean 5/8.
        assert_abs_diff_eq!(rec.efficiency.unwrap(), 0.625, epsilon = 1e-9);
    }

    #[test]
    fn mean_factor_never_exceeds_radial() {
        // Componentwise contraction is at least as strong as proportional.
        let data = DeaData::new(
            array![[1.0, 4.0, 4.0, 2.0], [4.0, 1.0, 4.0, 3.0]],
            array![[1.0, 1.0, 1.0, 1.5]],
            Some(vec!["A".into(), "B".into(), "C".into(), "D".into()]),
            None,
            None,
            Default::default(),
        )
        .unwrap();
        let nr = model_nonradial(&data, &NonradialOptions::default()).unwrap();
        let radial = crate::model::radial::model_basic(
            &data,
            &crate::model::radial::BasicOptions::default(),
        )
        .unwrap();
        for (a, b) in nr.records.iter().zip(radial.records.iter()) {
            assert!(a.efficiency.unwrap() <= b.efficiency.unwrap() + 1e-9);
            for f in a.eff_components.as_ref().unwrap() {
                assert!(*f <= 1.0 + 1e-9);
            }
        }
    }

    #[test]
    fn deaps_all_ones_matches_nonradial() {
        let a = model_nonradial(&m1(), &NonradialOptions::default()).unwrap();
        let b = model_deaps(&m1(), &DeapsOptions::default()).unwrap();
        for (ra, rb) in a.records.iter().zip(b.records.iter()) {
            assert_abs_diff_eq!(
                ra.efficiency.unwrap(),
                rb.efficiency.unwrap(),
                epsilon = 1e-9
            );
        }
    }

    #[test]
    fn deaps_weighted_objective_shape() {
        // Three inputs, weights (1,2,3): objective (t1 + 2 t2 + 3 t3)/6.
        let data = DeaData::new(
            array![[2.0, 3.0], [4.0, 5.0], [6.0, 7.0]],
            array![[1.0, 1.0]],
            Some(vec!["A".into(), "B".into()]),
            None,
            None,
            Default::default(),
        )
        .unwrap();
        let lps = model_deaps_lp(
            &data,
            &DeapsOptions {
                rts: Rts::Vrs,
                weight_eff: Param::PerVariable(vec![1.0, 2.0, 3.0]),
                ..Default::default()
            },
        )
        .unwrap();
        let (_, lp) = &lps[0];
        assert_abs_diff_eq!(lp.objective[0], 1.0 / 6.0, epsilon = 1e-12);
        assert_abs_diff_eq!(lp.objective[1], 2.0 / 6.0, epsilon = 1e-12);
        assert_abs_diff_eq!(lp.objective[2], 3.0 / 6.0, epsilon = 1e-12);
    }

    #[test]
    fn deaps_nonpositive_weights_rejected() {
        let err = model_deaps(
            &m1(),
            &DeapsOptions {
                weight_eff: Param::Scalar(0.0),
                ..Default::default()
            },
        );
        assert!(err.is_err());
    }

    #[test]
    fn unrestricted_matches_restricted_on_m1() {
        let a = model_deaps(&m1(), &DeapsOptions::default()).unwrap();
        let b = model_deaps(
            &m1(),
            &DeapsOptions {
                restricted_eff: false,
                ..Default::default()
            },
        )
        .unwrap();
        for (ra, rb) in a.records.iter().zip(b.records.iter()) {
            assert_abs_diff_eq!(
                ra.efficiency.unwrap(),
                rb.efficiency.unwrap(),
                epsilon = 1e-9
            );
        }
    }
}
