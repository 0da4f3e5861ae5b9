//! Additive models and the closest-target (additive-Min) variant.

use crate::data::DeaData;
use crate::error::{DeaError, Result};
use crate::frontier::{maximal_friends, FacetSet};
use crate::lp::{self, Direction, LinearProgram, Sense};
use crate::model::result::{DeaResult, DmuRecord, DmuStatus, ModelExtras};
use crate::model::{reject_special, resolve_dmu_set, rts_rows, Orientation, Param, Rts};

#[derive(Clone, Debug)]
pub struct AdditiveOptions {
    pub rts: Rts,
    /// `None` keeps both slack sides in the objective; `Io` zeroes the output
    /// weights, `Oo` the input weights. Variables stay either way, so weakly
    /// efficient DMUs can still score zero under an orientation.
    pub orientation: Option<Orientation>,
    pub weight_slack_i: Param,
    pub weight_slack_o: Param,
    pub dmu_eval: Option<Vec<usize>>,
    pub dmu_ref: Option<Vec<usize>>,
}

impl Default for AdditiveOptions {
    fn default() -> Self {
        AdditiveOptions {
            rts: Rts::Crs,
            orientation: None,
            weight_slack_i: Param::Scalar(1.0),
            weight_slack_o: Param::Scalar(1.0),
            dmu_eval: None,
            dmu_ref: None,
        }
    }
}

struct AdditiveWeights {
    w_in: ndarray::Array2<f64>,
    w_out: ndarray::Array2<f64>,
}

fn resolve_additive_weights(
    data: &DeaData,
    orientation: Option<Orientation>,
    weight_slack_i: &Param,
    weight_slack_o: &Param,
    neval: usize,
) -> Result<AdditiveWeights> {
    let m = data.num_inputs();
    let s = data.num_outputs();
    let mut w_in = weight_slack_i.resolve(m, neval, "weight_slack_i")?;
    let mut w_out = weight_slack_o.resolve(s, neval, "weight_slack_o")?;
    match orientation {
        Some(Orientation::Io) => w_out.fill(0.0),
        Some(Orientation::Oo) => w_in.fill(0.0),
        Some(other) => {
            return Err(DeaError::InvalidParameter(format!(
                "additive orientation must be io or oo, got {other}"
            )))
        }
        None => {}
    }
    let zeroed_in = orientation == Some(Orientation::Oo);
    let zeroed_out = orientation == Some(Orientation::Io);
    if (!zeroed_in && w_in.iter().any(|&w| w <= 0.0))
        || (!zeroed_out && w_out.iter().any(|&w| w <= 0.0))
    {
        return Err(DeaError::InvalidParameter(
            "slack weights must be positive".into(),
        ));
    }
    Ok(AdditiveWeights { w_in, w_out })
}

fn additive_program(
    data: &DeaData,
    refcols: &[usize],
    rts: &Rts,
    w_in: &[f64],
    w_out: &[f64],
    o: usize,
) -> LinearProgram {
    let m = data.num_inputs();
    let s = data.num_outputs();
    let nref = refcols.len();
    let ncols = nref + m + s;
    let mut objective = vec![0.0; ncols];
    objective[nref..nref + m].copy_from_slice(w_in);
    objective[nref + m..].copy_from_slice(w_out);
    let mut lp = LinearProgram::new(Direction::Maximize, objective);
    for i in 0..m {
        let mut coeffs = vec![0.0; ncols];
        for (k, &j) in refcols.iter().enumerate() {
            coeffs[k] = data.input[(i, j)];
        }
        coeffs[nref + i] = 1.0;
        lp.push(coeffs, Sense::Eq, data.input[(i, o)]);
    }
    for r in 0..s {
        let mut coeffs = vec![0.0; ncols];
        for (k, &j) in refcols.iter().enumerate() {
            coeffs[k] = data.output[(r, j)];
        }
        coeffs[nref + m + r] = -1.0;
        lp.push(coeffs, Sense::Eq, data.output[(r, o)]);
    }
    for row in rts_rows(rts, ncols, 0..nref, None) {
        lp.constraints.push(row);
    }
    lp
}

fn record_from_additive(
    data: &DeaData,
    refcols: &[usize],
    o: usize,
    sol: &lp::LpSolution,
) -> DmuRecord {
    let m = data.num_inputs();
    let s = data.num_outputs();
    let nref = refcols.len();
    let name = &data.dmunames[o];
    match sol.status {
        lp::LpStatus::Optimal => {
            let mut rec = DmuRecord::new(o, name);
            rec.efficiency = Some(sol.objective);
            let lambda = sol.x[..nref].to_vec();
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
            rec.lambda = Some(lambda);
            rec.slack_input = Some(sol.x[nref..nref + m].iter().map(|v| v.max(0.0)).collect());
            rec.slack_output = Some(sol.x[nref + m..].iter().map(|v| v.max(0.0)).collect());
            rec.target_input = Some(tx);
            rec.target_output = Some(ty);
            rec
        }
        lp::LpStatus::Infeasible => DmuRecord::failed(o, name, DmuStatus::Infeasible),
        lp::LpStatus::Unbounded => DmuRecord::failed(o, name, DmuStatus::Unbounded),
    }
}

/// Additive models: maximize the weighted slack sum; a DMU is efficient iff
/// the optimum is zero. Non-discretionary flags are accepted and ignored
/// (the program is unchanged by them).
pub fn model_additive(data: &DeaData, opts: &AdditiveOptions) -> Result<DeaResult> {
    reject_special(data, "additive", false, true, false)?;
    opts.rts.validate()?;
    let n = data.num_dmus();
    let dmu_eval = resolve_dmu_set(opts.dmu_eval.as_deref(), n, "dmu_eval")?;
    let dmu_ref = resolve_dmu_set(opts.dmu_ref.as_deref(), n, "dmu_ref")?;
    let w = resolve_additive_weights(
        data,
        opts.orientation,
        &opts.weight_slack_i,
        &opts.weight_slack_o,
        dmu_eval.len(),
    )?;
    let mut records = Vec::with_capacity(dmu_eval.len());
    for (e, &o) in dmu_eval.iter().enumerate() {
        let lp = additive_program(
            data,
            &dmu_ref,
            &opts.rts,
            &w.w_in.column(e).to_vec(),
            &w.w_out.column(e).to_vec(),
            o,
        );
        let sol = lp::solve(&lp)?;
        records.push(record_from_additive(data, &dmu_ref, o, &sol));
    }
    Ok(DeaResult {
        modelname: "additive".into(),
        orientation: opts.orientation.unwrap_or(Orientation::No),
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

/// Additive programs, unsolved.
pub fn model_additive_lp(
    data: &DeaData,
    opts: &AdditiveOptions,
) -> Result<Vec<(String, LinearProgram)>> {
    reject_special(data, "additive", false, true, false)?;
    opts.rts.validate()?;
    let n = data.num_dmus();
    let dmu_eval = resolve_dmu_set(opts.dmu_eval.as_deref(), n, "dmu_eval")?;
    let dmu_ref = resolve_dmu_set(opts.dmu_ref.as_deref(), n, "dmu_ref")?;
    let w = resolve_additive_weights(
        data,
        opts.orientation,
        &opts.weight_slack_i,
        &opts.weight_slack_o,
        dmu_eval.len(),
    )?;
    Ok(dmu_eval
        .iter()
        .enumerate()
        .map(|(e, &o)| {
            (
                data.dmunames[o].clone(),
                additive_program(
                    data,
                    &dmu_ref,
                    &opts.rts,
                    &w.w_in.column(e).to_vec(),
                    &w.w_out.column(e).to_vec(),
                    o,
                ),
            )
        })
        .collect())
}

#[derive(Clone, Debug)]
pub struct AddminOptions {
    pub rts: Rts,
    pub weight_slack_i: Param,
    pub weight_slack_o: Param,
    pub dmu_eval: Option<Vec<usize>>,
    pub dmu_ref: Option<Vec<usize>>,
    /// Precomputed frontier facets; computed from the data when absent.
    pub maxfr: Option<FacetSet>,
    pub silent: bool,
}

impl Default for AddminOptions {
    fn default() -> Self {
        AddminOptions {
            rts: Rts::Crs,
            weight_slack_i: Param::Scalar(1.0),
            weight_slack_o: Param::Scalar(1.0),
            dmu_eval: None,
            dmu_ref: None,
            maxfr: None,
            silent: true,
        }
    }
}

/// Additive-Min: the *closest* target on the efficient frontier under the
/// weighted slack distance, found by minimizing per maximal-friends facet
/// and taking the best facet. Ties pick the lowest facet index. Scores can
/// be non-monotonic.
pub fn model_addmin(data: &DeaData, opts: &AddminOptions) -> Result<DeaResult> {
    reject_special(data, "addmin", false, false, false)?;
    opts.rts.validate()?;
    let n = data.num_dmus();
    let dmu_eval = resolve_dmu_set(opts.dmu_eval.as_deref(), n, "dmu_eval")?;
    let dmu_ref = resolve_dmu_set(opts.dmu_ref.as_deref(), n, "dmu_ref")?;
    let w = resolve_additive_weights(
        data,
        None,
        &opts.weight_slack_i,
        &opts.weight_slack_o,
        dmu_eval.len(),
    )?;
    let facets = match &opts.maxfr {
        Some(f) => f.clone(),
        None => maximal_friends(data, &opts.rts, Some(&dmu_ref), opts.silent)?,
    };
    let m = data.num_inputs();
    let s = data.num_outputs();

    let mut records = Vec::with_capacity(dmu_eval.len());
    for (e, &o) in dmu_eval.iter().enumerate() {
        let w_in = w.w_in.column(e).to_vec();
        let w_out = w.w_out.column(e).to_vec();
        let mut best: Option<(f64, usize, lp::LpSolution)> = None;
        for (fi, facet) in facets.facets.iter().enumerate() {
            let mut lp = additive_program(data, facet, &opts.rts, &w_in, &w_out, o);
            lp.direction = Direction::Minimize;
            let sol = lp::solve(&lp)?;
            if sol.is_optimal() {
                let better = match &best {
                    None => true,
                    Some((cur, _, _)) => sol.objective < cur - 1e-12,
                };
                if better {
                    best = Some((sol.objective, fi, sol));
                }
            }
        }
        let name = &data.dmunames[o];
        let rec = match best {
            None => DmuRecord::failed(o, name, DmuStatus::Infeasible),
            Some((omega, fi, sol)) => {
                let facet = &facets.facets[fi];
                let nref = facet.len();
                let mut rec = DmuRecord::new(o, name);
                rec.efficiency = Some(omega);
                // Lambda re-padded onto the dmu_ref axis.
                let mut lambda = vec![0.0; dmu_ref.len()];
                for (k, &j) in facet.iter().enumerate() {
                    if let Some(pos) = dmu_ref.iter().position(|&x| x == j) {
                        lambda[pos] = sol.x[k];
                    }
                }
                let mut tx = vec![0.0; m];
                let mut ty = vec![0.0; s];
                for (k, &j) in facet.iter().enumerate() {
                    for i in 0..m {
                        tx[i] += sol.x[k] * data.input[(i, j)];
                    }
                    for r in 0..s {
                        ty[r] += sol.x[k] * data.output[(r, j)];
                    }
                }
                rec.lambda = Some(lambda);
                rec.slack_input = Some(sol.x[nref..nref + m].iter().map(|v| v.max(0.0)).collect());
                rec.slack_output = Some(sol.x[nref + m..].iter().map(|v| v.max(0.0)).collect());
                rec.target_input = Some(tx);
                rec.target_output = Some(ty);
                rec.notes.push(format!("facet {fi}"));
                rec
            }
        };
        records.push(rec);
    }
    Ok(DeaResult {
        modelname: "addmin".into(),
        orientation: Orientation::No,
        rts: opts.rts,
        maxslack: false,
        dmu_eval,
        dmu_ref,
        records,
        data: data.clone(),
        extras: ModelExtras::default(),
        notes: vec!["closest-target scores can be non-monotonic".into()],
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
    fn m1_crs_unit_weights() {
        let res = model_additive(&m1(), &AdditiveOptions::default()).unwrap();
        assert_abs_diff_eq!(res.records[1].efficiency.unwrap(), 2.0, epsilon = 1e-9);
        assert_abs_diff_eq!(res.records[0].efficiency.unwrap(), 0.0, epsilon = 1e-9);
    }

    #[test]
    fn vrs_translation_invariance() {
        let data = m1();
        let a = model_additive(
            &data,
            &AdditiveOptions {
                rts: Rts::Vrs,
                ..Default::default()
            },
        )
        .unwrap();
        let mut shifted_input = data.input.clone();
        shifted_input += 10.0;
        let shifted = DeaData::new(
            shifted_input,
            data.output.clone(),
            Some(data.dmunames.clone()),
            None,
            None,
            Default::default(),
        )
        .unwrap();
        let b = model_additive(
            &shifted,
            &AdditiveOptions {
                rts: Rts::Vrs,
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

    #[test]
    fn addmin_picks_closest_target() {
        let res = model_addmin(
            &m1(),
            &AddminOptions {
                rts: Rts::Vrs,
                ..Default::default()
            },
        )
        .unwrap();
        // D projects onto C (5,4): omega_min = 3 + 2 = 5.
        let d = &res.records[3];
        assert_abs_diff_eq!(d.efficiency.unwrap(), 5.0, epsilon = 1e-9);
        assert_abs_diff_eq!(d.target_input.as_ref().unwrap()[0], 5.0, epsilon = 1e-7);
        assert_abs_diff_eq!(d.target_output.as_ref().unwrap()[0], 4.0, epsilon = 1e-7);
        // Plain additive sends D to A with omega = 6.
        let plain = model_additive(
            &m1(),
            &AdditiveOptions {
                rts: Rts::Vrs,
                ..Default::default()
            },
        )
        .unwrap();
        assert_abs_diff_eq!(plain.records[3].efficiency.unwrap(), 6.0, epsilon = 1e-9);
        // Efficient DMU stays put.
        assert_abs_diff_eq!(res.records[0].efficiency.unwrap(), 0.0, epsilon = 1e-9);
    }

    #[test]
    fn addmin_never_exceeds_additive() {
        for rts in [Rts::Crs, Rts::Vrs] {
            let a = model_addmin(
                &m1(),
                &AddminOptions {
                    rts,
                    ..Default::default()
                },
            )
            .unwrap();
            let b = model_additive(
                &m1(),
                &AdditiveOptions {
                    rts,
                    ..Default::default()
                },
            )
            .unwrap();
            for (ra, rb) in a.records.iter().zip(b.records.iter()) {
                assert!(ra.efficiency.unwrap() <= rb.efficiency.unwrap() + 1e-9);
            }
        }
    }

    #[test]
    fn reference_order_does_not_change_scores() {
        let data = m1();
        let a = model_additive(&data, &AdditiveOptions::default()).unwrap();
        let b = model_additive(
            &data,
            &AdditiveOptions {
                dmu_ref: Some(vec![3, 1, 0, 2]),
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

    #[test]
    fn oriented_weights_zero_one_side() {
        let res = model_additive(
            &m1(),
            &AdditiveOptions {
                orientation: Some(Orientation::Io),
                ..Default::default()
            },
        )
        .unwrap();
        // B's input slack alone: 4 - 2 = 2 under CRS via A at lambda 1.
        assert_abs_diff_eq!(res.records[1].efficiency.unwrap(), 2.0, epsilon = 1e-9);
    }
}
