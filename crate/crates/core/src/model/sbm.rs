//! Slacks-based measure of efficiency models, including the facet-chasing
//! SBM-Max variant and the undesirable-variable adaptation.

use crate::data::DeaData;
use crate::error::{DeaError, Result};
use crate::frontier::{maximal_friends, FacetSet};
use crate::lp::{self, Direction, LinearProgram, Sense};
use crate::model::result::{DeaResult, DmuRecord, DmuStatus, ModelExtras};
use crate::model::{reject_special, resolve_dmu_set, rts_rows, Orientation, Param, Rts};

#[derive(Clone, Debug)]
pub struct SbmOptions {
    pub orientation: Orientation,
    pub rts: Rts,
    pub weight_input: Param,
    pub weight_output: Param,
    /// Maximize the score over the efficient facets (SBM-Max) instead of
    /// minimizing it over the whole frontier.
    pub kaizen: bool,
    pub maxfr: Option<FacetSet>,
    pub silent: bool,
    pub dmu_eval: Option<Vec<usize>>,
    pub dmu_ref: Option<Vec<usize>>,
}

impl Default for SbmOptions {
    fn default() -> Self {
        SbmOptions {
            orientation: Orientation::No,
            rts: Rts::Crs,
            weight_input: Param::Scalar(1.0),
            weight_output: Param::Scalar(1.0),
            kaizen: false,
            maxfr: None,
            silent: true,
            dmu_eval: None,
            dmu_ref: None,
        }
    }
}

/// Objective divisors per the zero-data adaptation: nonpositive inputs drop
/// their term; nonpositive outputs divide by one hundredth of the smallest
/// positive value observed on that row.
struct Divisors {
    input: Vec<Option<f64>>,
    output: Vec<Option<f64>>,
}

fn divisors(data: &DeaData, o: usize) -> Divisors {
    let m = data.num_inputs();
    let s = data.num_outputs();
    let input = (0..m)
        .map(|i| {
            let v = data.input[(i, o)];
            (v > 0.0).then_some(v)
        })
        .collect();
    let output = (0..s)
        .map(|r| {
            let v = data.output[(r, o)];
            if v > 0.0 {
                Some(v)
            } else {
                let min_pos = (0..data.num_dmus())
                    .map(|j| data.output[(r, j)])
                    .filter(|&y| y > 0.0)
                    .fold(f64::INFINITY, f64::min);
                min_pos.is_finite().then(|| min_pos / 100.0)
            }
        })
        .collect();
    Divisors { input, output }
}

/// Weights normalized so each side sums to its variable count.
fn normalized_weights(
    data: &DeaData,
    weight_input: &Param,
    weight_output: &Param,
    neval: usize,
) -> Result<(ndarray::Array2<f64>, ndarray::Array2<f64>)> {
    let m = data.num_inputs();
    let s = data.num_outputs();
    let mut w_in = weight_input.resolve(m, neval, "weight_input")?;
    let mut w_out = weight_output.resolve(s, neval, "weight_output")?;
    if w_in.iter().any(|&w| w <= 0.0) || w_out.iter().any(|&w| w <= 0.0) {
        return Err(DeaError::InvalidParameter(
            "sbm weights must be positive".into(),
        ));
    }
    for e in 0..neval {
        let si: f64 = w_in.column(e).sum();
        let so: f64 = w_out.column(e).sum();
        for i in 0..m {
            w_in[(i, e)] *= m as f64 / si;
        }
        for r in 0..s {
            w_out[(r, e)] *= s as f64 / so;
        }
    }
    Ok((w_in, w_out))
}

/// Charnes-Cooper program over an explicit reference column set.
/// Columns: `[t, Lambda (nref), S- (m), S+ (s)]`.
#[allow(clippy::too_many_arguments)]
fn sbm_cc_program(
    data: &DeaData,
    refcols: &[usize],
    rts: &Rts,
    o: usize,
    w_in: &[f64],
    w_out: &[f64],
    div: &Divisors,
    maximize: bool,
) -> LinearProgram {
    let m = data.num_inputs();
    let s = data.num_outputs();
    let nref = refcols.len();
    let ncols = 1 + nref + m + s;
    let col_t = 0usize;
    let col_lam = 1usize;
    let col_sm = 1 + nref;
    let col_sp = 1 + nref + m;

    let mut objective = vec![0.0; ncols];
    objective[col_t] = 1.0;
    for i in 0..m {
        if let Some(d) = div.input[i] {
            objective[col_sm + i] = -w_in[i] / (m as f64 * d);
        }
    }
    let mut lp = LinearProgram::new(
        if maximize {
            Direction::Maximize
        } else {
            Direction::Minimize
        },
        objective,
    );

    // Normalization: t + sum of w+ S+/(s*y) = 1.
    let mut norm = vec![0.0; ncols];
    norm[col_t] = 1.0;
    for r in 0..s {
        if let Some(d) = div.output[r] {
            norm[col_sp + r] = w_out[r] / (s as f64 * d);
        }
    }
    lp.push(norm, Sense::Eq, 1.0);

    let ud_in = &data.special.ud_inputs;
    let ud_out = &data.special.ud_outputs;
    for i in 0..m {
        let mut coeffs = vec![0.0; ncols];
        for (k, &j) in refcols.iter().enumerate() {
            coeffs[col_lam + k] = data.input[(i, j)];
        }
        coeffs[col_t] = -data.input[(i, o)];
        // Good (undesirable) inputs carry their slack with flipped sign: the
        // target consumes more of them.
        coeffs[col_sm + i] = if ud_in.contains(&i) { -1.0 } else { 1.0 };
        lp.push(coeffs, Sense::Eq, 0.0);
    }
    for r in 0..s {
        let mut coeffs = vec![0.0; ncols];
        for (k, &j) in refcols.iter().enumerate() {
            coeffs[col_lam + k] = data.output[(r, j)];
        }
        coeffs[col_t] = -data.output[(r, o)];
        coeffs[col_sp + r] = if ud_out.contains(&r) { 1.0 } else { -1.0 };
        lp.push(coeffs, Sense::Eq, 0.0);
    }
    for row in rts_rows(rts, ncols, col_lam..col_lam + nref, Some(col_t)) {
        lp.constraints.push(row);
    }
    lp
}

fn denormalize(
    sol: &lp::LpSolution,
    nref: usize,
    m: usize,
    s: usize,
) -> Option<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let t = sol.x[0];
    if t <= 1e-12 {
        return None;
    }
    let lambda = sol.x[1..1 + nref].iter().map(|v| v / t).collect();
    let s_in = sol.x[1 + nref..1 + nref + m]
        .iter()
        .map(|v| (v / t).max(0.0))
        .collect();
    let s_out = sol.x[1 + nref + m..1 + nref + m + s]
        .iter()
        .map(|v| (v / t).max(0.0))
        .collect();
    Some((lambda, s_in, s_out))
}

fn fill_record(
    data: &DeaData,
    refcols: &[usize],
    dmu_ref: &[usize],
    rec: &mut DmuRecord,
    lambda_ref: Vec<f64>,
    s_in: Vec<f64>,
    s_out: Vec<f64>,
) {
    let m = data.num_inputs();
    let s = data.num_outputs();
    let mut lambda = vec![0.0; dmu_ref.len()];
    let mut tx = vec![0.0; m];
    let mut ty = vec![0.0; s];
    for (k, &j) in refcols.iter().enumerate() {
        if let Some(pos) = dmu_ref.iter().position(|&x| x == j) {
            lambda[pos] = lambda_ref[k];
        }
        for i in 0..m {
            tx[i] += lambda_ref[k] * data.input[(i, j)];
        }
        for r in 0..s {
            ty[r] += lambda_ref[k] * data.output[(r, j)];
        }
    }
    rec.lambda = Some(lambda);
    rec.slack_input = Some(s_in);
    rec.slack_output = Some(s_out);
    rec.target_input = Some(tx);
    rec.target_output = Some(ty);
}

/// Slacks-based measure models. Non-oriented scores come from the
/// Charnes-Cooper linearization; oriented variants are plain LPs. With
/// `kaizen` the score is maximized per efficient facet and the best facet
/// wins (non-monotonic by design).
pub fn model_sbmeff(data: &DeaData, opts: &SbmOptions) -> Result<DeaResult> {
    reject_special(data, "sbmeff", false, true, true)?;
    opts.rts.validate()?;
    let n = data.num_dmus();
    let dmu_eval = resolve_dmu_set(opts.dmu_eval.as_deref(), n, "dmu_eval")?;
    let dmu_ref = resolve_dmu_set(opts.dmu_ref.as_deref(), n, "dmu_ref")?;
    let (w_in, w_out) = normalized_weights(
        data,
        &opts.weight_input,
        &opts.weight_output,
        dmu_eval.len(),
    )?;
    let m = data.num_inputs();
    let s = data.num_outputs();
    let has_ud = !data.special.ud_inputs.is_empty() || !data.special.ud_outputs.is_empty();
    if opts.kaizen && (opts.orientation != Orientation::No || has_ud) {
        return Err(DeaError::InvalidParameter(
            "kaizen applies to the non-oriented model without undesirable flags".into(),
        ));
    }
    if has_ud && opts.orientation != Orientation::No {
        return Err(DeaError::InvalidParameter(
            "undesirable variables require the non-oriented sbm model".into(),
        ));
    }
    let facets = if opts.kaizen {
        Some(match &opts.maxfr {
            Some(f) => f.clone(),
            None => maximal_friends(data, &opts.rts, Some(&dmu_ref), opts.silent)?,
        })
    } else {
        None
    };

    let mut notes = Vec::new();
    if opts.kaizen {
        notes.push("facet-maximized scores can be non-monotonic".into());
    }
    if has_ud {
        notes.push("good inputs can generate negative efficiency scores".into());
    }

    let mut records = Vec::with_capacity(dmu_eval.len());
    for (e, &o) in dmu_eval.iter().enumerate() {
        let name = &data.dmunames[o];
        let div = divisors(data, o);
        let wi = w_in.column(e).to_vec();
        let wo = w_out.column(e).to_vec();
        let rec = match opts.orientation {
            Orientation::No => {
                if div.input.iter().all(|d| d.is_none()) {
                    let mut r = DmuRecord::failed(o, name, DmuStatus::Infeasible);
                    r.notes.push("no positive input to measure against".into());
                    r
                } else if let Some(facets) = &facets {
                    let mut best: Option<(f64, usize, lp::LpSolution)> = None;
                    for (fi, facet) in facets.facets.iter().enumerate() {
                        let lp = sbm_cc_program(data, facet, &opts.rts, o, &wi, &wo, &div, true);
                        let sol = lp::solve(&lp)?;
                        if sol.is_optimal()
                            && best
                                .as_ref()
                                .is_none_or(|(cur, _, _)| sol.objective > cur + 1e-12)
                        {
                            best = Some((sol.objective, fi, sol));
                        }
                    }
                    match best {
                        None => DmuRecord::failed(o, name, DmuStatus::Infeasible),
                        Some((rho, fi, sol)) => {
                            let facet = &facets.facets[fi];
                            let mut rec = DmuRecord::new(o, name);
                            rec.efficiency = Some(rho);
                            if let Some((lam, si, so)) = denormalize(&sol, facet.len(), m, s) {
                                fill_record(data, facet, &dmu_ref, &mut rec, lam, si, so);
                            }
                            rec.notes.push(format!("facet {fi}"));
                            rec
                        }
                    }
                } else {
                    let lp = sbm_cc_program(data, &dmu_ref, &opts.rts, o, &wi, &wo, &div, false);
                    let sol = lp::solve(&lp)?;
                    match sol.status {
                        lp::LpStatus::Optimal => {
                            let mut rec = DmuRecord::new(o, name);
                            rec.efficiency = Some(sol.objective);
                            if sol.objective < 0.0 {
                                rec.notes.push("negative score from good inputs".into());
                            }
                            if let Some((lam, si, so)) = denormalize(&sol, dmu_ref.len(), m, s) {
                                fill_record(data, &dmu_ref, &dmu_ref, &mut rec, lam, si, so);
                            } else {
                                rec.notes.push("degenerate normalization factor".into());
                            }
                            rec
                        }
                        lp::LpStatus::Infeasible => {
                            DmuRecord::failed(o, name, DmuStatus::Infeasible)
                        }
                        lp::LpStatus::Unbounded => DmuRecord::failed(o, name, DmuStatus::Unbounded),
                    }
                }
            }
            Orientation::Io | Orientation::Oo => {
                let io = opts.orientation == Orientation::Io;
                let nref = dmu_ref.len();
                let nsl = if io { m } else { s };
                let ncols = nref + nsl;
                let mut objective = vec![0.0; ncols];
                for q in 0..nsl {
                    let d = if io { div.input[q] } else { div.output[q] };
                    if let Some(d) = d {
                        let w = if io { wi[q] } else { wo[q] };
                        let count = if io { m } else { s } as f64;
                        objective[nref + q] = w / (count * d);
                    }
                }
                let mut lp = LinearProgram::new(Direction::Maximize, objective);
                for i in 0..m {
                    let mut coeffs = vec![0.0; ncols];
                    for (k, &j) in dmu_ref.iter().enumerate() {
                        coeffs[k] = data.input[(i, j)];
                    }
                    if io {
                        coeffs[nref + i] = 1.0;
                        lp.push(coeffs, Sense::Eq, data.input[(i, o)]);
                    } else {
                        lp.push(coeffs, Sense::Le, data.input[(i, o)]);
                    }
                }
                for r in 0..s {
                    let mut coeffs = vec![0.0; ncols];
                    for (k, &j) in dmu_ref.iter().enumerate() {
                        coeffs[k] = data.output[(r, j)];
                    }
                    if io {
                        lp.push(coeffs, Sense::Ge, data.output[(r, o)]);
                    } else {
                        coeffs[nref + r] = -1.0;
                        lp.push(coeffs, Sense::Eq, data.output[(r, o)]);
                    }
                }
                for row in rts_rows(&opts.rts, ncols, 0..nref, None) {
                    lp.constraints.push(row);
                }
                let sol = lp::solve(&lp)?;
                match sol.status {
                    lp::LpStatus::Optimal => {
                        let mut rec = DmuRecord::new(o, name);
                        rec.efficiency = Some(if io {
                            1.0 - sol.objective
                        } else {
                            1.0 / (1.0 + sol.objective)
                        });
                        let lambda_ref = sol.x[..nref].to_vec();
                        let mut s_in = vec![0.0; m];
                        let mut s_out = vec![0.0; s];
                        for q in 0..nsl {
                            let v = sol.x[nref + q].max(0.0);
                            if io {
                                s_in[q] = v;
                            } else {
                                s_out[q] = v;
                            }
                        }
                        fill_record(data, &dmu_ref, &dmu_ref, &mut rec, lambda_ref, s_in, s_out);
                        rec
                    }
                    lp::LpStatus::Infeasible => DmuRecord::failed(o, name, DmuStatus::Infeasible),
                    lp::LpStatus::Unbounded => DmuRecord::failed(o, name, DmuStatus::Unbounded),
                }
            }
            Orientation::Dir => {
                return Err(DeaError::InvalidParameter(
                    "sbm models take orientation no, io or oo".into(),
                ))
            }
        };
        records.push(rec);
    }
    Ok(DeaResult {
        modelname: if opts.kaizen {
            "sbmeff-max".into()
        } else {
            "sbmeff".into()
        },
        orientation: opts.orientation,
        rts: opts.rts,
        maxslack: false,
        dmu_eval,
        dmu_ref,
        records,
        data: data.clone(),
        extras: ModelExtras::default(),
        notes,
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
    fn m1_crs_non_oriented() {
        let res = model_sbmeff(&m1(), &SbmOptions::default()).unwrap();
        assert_abs_diff_eq!(res.records[1].efficiency.unwrap(), 0.5, epsilon = 1e-9);
        assert_abs_diff_eq!(res.records[0].efficiency.unwrap(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn oriented_scores_dominate_non_oriented() {
        let data = m1();
        let no = model_sbmeff(&data, &SbmOptions::default()).unwrap();
        for orientation in [Orientation::Io, Orientation::Oo] {
            let or = model_sbmeff(
                &data,
                &SbmOptions {
                    orientation,
                    ..Default::default()
                },
            )
            .unwrap();
            for (a, b) in or.records.iter().zip(no.records.iter()) {
                assert!(a.efficiency.unwrap() >= b.efficiency.unwrap() - 1e-9);
            }
        }
    }

    #[test]
    fn kaizen_at_least_plain() {
        let data = m1();
        let plain = model_sbmeff(&data, &SbmOptions::default()).unwrap();
        let max = model_sbmeff(
            &data,
            &SbmOptions {
                kaizen: true,
                ..Default::default()
            },
        )
        .unwrap();
        for (a, b) in max.records.iter().zip(plain.records.iter()) {
            assert!(a.efficiency.unwrap() >= b.efficiency.unwrap() - 1e-9);
        }
        assert_abs_diff_eq!(max.records[0].efficiency.unwrap(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn unit_invariance() {
        let data = m1();
        let a = model_sbmeff(&data, &SbmOptions::default()).unwrap();
        let mut scaled_in = data.input.clone();
        scaled_in *= 7.5;
        let scaled = DeaData::new(
            scaled_in,
            data.output.clone(),
            Some(data.dmunames.clone()),
            None,
            None,
            Default::default(),
        )
        .unwrap();
        let b = model_sbmeff(&scaled, &SbmOptions::default()).unwrap();
        for (ra, rb) in a.records.iter().zip(b.records.iter()) {
            assert_abs_diff_eq!(
                ra.efficiency.unwrap(),
                rb.efficiency.unwrap(),
                epsilon = 1e-9
            );
        }
    }

    #[test]
    fn sbm_is_at_most_radial_crs() {
        let data = DeaData::new(
            array![[2.0, 4.0, 5.0, 8.0], [3.0, 1.0, 2.0, 6.0]],
            array![[2.0, 2.0, 4.0, 2.0], [1.0, 3.0, 2.0, 2.0]],
            Some(vec!["A".into(), "B".into(), "C".into(), "D".into()]),
            None,
            None,
            Default::default(),
        )
        .unwrap();
        let rho = model_sbmeff(&data, &SbmOptions::default()).unwrap();
        let theta = crate::model::radial::model_basic(
            &data,
            &crate::model::radial::BasicOptions::default(),
        )
        .unwrap();
        for (a, b) in rho.records.iter().zip(theta.records.iter()) {
            assert!(a.efficiency.unwrap() <= b.efficiency.unwrap() + 1e-9);
        }
    }

    #[test]
    fn zero_output_uses_penalty_divisor() {
        // B produces nothing on output 2; the divisor substitutes a small
        // positive value and the program still solves, with a heavy penalty.
        let data = DeaData::new(
            array![[2.0, 4.0]],
            array![[2.0, 2.0], [4.0, 0.0]],
            Some(vec!["A".into(), "B".into()]),
            None,
            None,
            Default::default(),
        )
        .unwrap();
        let res = model_sbmeff(&data, &SbmOptions::default()).unwrap();
        let b = &res.records[1];
        assert!(b.efficiency.unwrap() > 0.0);
        assert!(b.efficiency.unwrap() < 0.2);
    }

    #[test]
    fn undesirable_flags_flip_slack_signs() {
        // Output 2 is undesirable: the efficient target produces less of it.
        let data = DeaData::new(
            array![[1.0, 1.0]],
            array![[2.0, 2.0], [1.0, 2.0]],
            Some(vec!["A".into(), "B".into()]),
            None,
            None,
            crate::data::SpecialSets {
                ud_outputs: [1].into(),
                ..Default::default()
            },
        )
        .unwrap();
        let res = model_sbmeff(&data, &SbmOptions::default()).unwrap();
        // A dominates B now (same input, same good output, less bad output).
        assert_abs_diff_eq!(res.records[0].efficiency.unwrap(), 1.0, epsilon = 1e-9);
        assert!(res.records[1].efficiency.unwrap() < 1.0 - 1e-6);
    }
}
