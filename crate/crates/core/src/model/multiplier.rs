//! Radial models in multiplier (dual) form.

use crate::data::DeaData;
use crate::error::{DeaError, Result};
use crate::lp::{self, Bound, Direction, LinearProgram, Sense};
use crate::model::result::{DeaResult, DmuRecord, DmuStatus, ModelExtras};
use crate::model::{reject_special, resolve_dmu_set, Orientation, Rts};

#[derive(Clone, Debug)]
pub struct MultiplierOptions {
    pub orientation: Orientation,
    pub rts: Rts,
    /// Non-Archimedean lower bound on every weight.
    pub epsilon: f64,
    pub dmu_eval: Option<Vec<usize>>,
    pub dmu_ref: Option<Vec<usize>>,
}

impl Default for MultiplierOptions {
    fn default() -> Self {
        MultiplierOptions {
            orientation: Orientation::Io,
            rts: Rts::Crs,
            epsilon: 0.0,
            dmu_eval: None,
            dmu_ref: None,
        }
    }
}

/// Effective (L, U) in the multiplier objective.
fn rts_lu(rts: &Rts) -> (f64, f64) {
    match rts {
        Rts::Crs => (0.0, 0.0),
        Rts::Vrs | Rts::Nirs | Rts::Ndrs => (1.0, 1.0),
        Rts::Grs { l, u } => (*l, *u),
    }
}

/// Which of the two returns-to-scale multipliers exist.
fn rts_vars(rts: &Rts) -> (bool, bool) {
    match rts {
        Rts::Crs => (false, false),
        Rts::Vrs | Rts::Grs { .. } => (true, true),
        Rts::Nirs => (false, true),
        Rts::Ndrs => (true, false),
    }
}

/// Multiplier program for one DMU. Variables are `[v (m), u (s), xiL?, xiU?]`
/// where the xi variables are stored with the sign pattern of the chosen
/// orientation folded in (both nonnegative internally).
pub(crate) fn multiplier_program(
    data: &DeaData,
    refcols: &[usize],
    rts: &Rts,
    orientation: Orientation,
    epsilon: f64,
    o: usize,
) -> Result<LinearProgram> {
    let m = data.num_inputs();
    let s = data.num_outputs();
    let (has_l, has_u) = rts_vars(rts);
    let (l, u) = rts_lu(rts);
    let ncols = m + s + has_l as usize + has_u as usize;
    let col_l = has_l.then_some(m + s);
    let col_u = has_u.then_some(m + s + has_l as usize);
    let io = match orientation {
        Orientation::Io => true,
        Orientation::Oo => false,
        _ => {
            return Err(DeaError::InvalidParameter(
                "multiplier models take orientation io or oo".into(),
            ))
        }
    };
    // io: max u*y_o + L xiL + U xiU with xiL >= 0, xiU <= 0 (stored negated);
    // oo: min v*x_o + L xiL + U xiU with xiL <= 0 (stored negated), xiU >= 0.
    let mut objective = vec![0.0; ncols];
    if io {
        for r in 0..s {
            objective[m + r] = data.output[(r, o)];
        }
        if let Some(c) = col_l {
            objective[c] = l;
        }
        if let Some(c) = col_u {
            objective[c] = -u;
        }
    } else {
        for i in 0..m {
            objective[i] = data.input[(i, o)];
        }
        if let Some(c) = col_l {
            objective[c] = -l;
        }
        if let Some(c) = col_u {
            objective[c] = u;
        }
    }
    let mut lp = LinearProgram::new(
        if io {
            Direction::Maximize
        } else {
            Direction::Minimize
        },
        objective,
    );
    if epsilon > 0.0 {
        for k in 0..m + s {
            lp.set_bound(
                k,
                Bound::Boxed {
                    lo: epsilon,
                    hi: f64::INFINITY,
                },
            );
        }
    }

    // Normalization row.
    let mut norm = vec![0.0; ncols];
    if io {
        for i in 0..m {
            norm[i] = data.input[(i, o)];
        }
    } else {
        for r in 0..s {
            norm[m + r] = data.output[(r, o)];
        }
    }
    lp.push(norm, Sense::Eq, 1.0);

    // Feasibility row per reference DMU.
    for &j in refcols {
        let mut coeffs = vec![0.0; ncols];
        for i in 0..m {
            coeffs[i] = -data.input[(i, j)];
        }
        for r in 0..s {
            coeffs[m + r] = data.output[(r, j)];
        }
        // io: -vX + uY + (xiL + xiU) e <= 0; oo flips the whole row.
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
    Ok(lp)
}

/// Recover `(v, u, [xiL, xiU])` in paper sign conventions from a solution.
pub(crate) fn unpack_multipliers(
    x: &[f64],
    m: usize,
    s: usize,
    rts: &Rts,
    orientation: Orientation,
) -> (Vec<f64>, Vec<f64>, [f64; 2]) {
    let (has_l, has_u) = rts_vars(rts);
    let io = orientation == Orientation::Io;
    let v = x[..m].to_vec();
    let u = x[m..m + s].to_vec();
    let mut xi = [0.0, 0.0];
    let mut at = m + s;
    if has_l {
        xi[0] = if io { x[at] } else { -x[at] };
        at += 1;
    }
    if has_u {
        xi[1] = if io { -x[at] } else { x[at] };
    }
    (v, u, xi)
}

/// Radial models in multiplier form: weights `v`, `u` bounded below by
/// `epsilon`, plus returns-to-scale multipliers. Infeasible programs (the
/// usual failure mode when `epsilon` is too large) yield `None` scores.
pub fn model_multiplier(data: &DeaData, opts: &MultiplierOptions) -> Result<DeaResult> {
    reject_special(data, "multiplier", false, false, false)?;
    opts.rts.validate()?;
    if opts.epsilon < 0.0 {
        return Err(DeaError::InvalidParameter("epsilon must be >= 0".into()));
    }
    let n = data.num_dmus();
    let dmu_eval = resolve_dmu_set(opts.dmu_eval.as_deref(), n, "dmu_eval")?;
    let dmu_ref = resolve_dmu_set(opts.dmu_ref.as_deref(), n, "dmu_ref")?;
    let m = data.num_inputs();
    let s = data.num_outputs();

    let mut records = Vec::with_capacity(dmu_eval.len());
    for &o in &dmu_eval {
        let lp = multiplier_program(data, &dmu_ref, &opts.rts, opts.orientation, opts.epsilon, o)?;
        let sol = lp::solve(&lp)?;
        let name = &data.dmunames[o];
        let rec = match sol.status {
            lp::LpStatus::Optimal => {
                let mut rec = DmuRecord::new(o, name);
                rec.efficiency = Some(sol.objective);
                let (v, u, xi) = unpack_multipliers(&sol.x, m, s, &opts.rts, opts.orientation);
                rec.multiplier_input = Some(v);
                rec.multiplier_output = Some(u);
                rec.multiplier_rts = Some(xi);
                rec
            }
            lp::LpStatus::Infeasible => DmuRecord::failed(o, name, DmuStatus::Infeasible),
            lp::LpStatus::Unbounded => DmuRecord::failed(o, name, DmuStatus::Unbounded),
        };
        records.push(rec);
    }
    Ok(DeaResult {
        modelname: "multiplier".into(),
        orientation: opts.orientation,
        rts: opts.rts,
        maxslack: false,
        dmu_eval,
        dmu_ref,
        records,
        data: data.clone(),
        extras: ModelExtras {
            epsilon: Some(opts.epsilon),
            ..Default::default()
        },
        notes: Vec::new(),
    })
}

/// First-stage multiplier programs, unsolved.
pub fn model_multiplier_lp(
    data: &DeaData,
    opts: &MultiplierOptions,
) -> Result<Vec<(String, LinearProgram)>> {
    reject_special(data, "multiplier", false, false, false)?;
    opts.rts.validate()?;
    let n = data.num_dmus();
    let dmu_eval = resolve_dmu_set(opts.dmu_eval.as_deref(), n, "dmu_eval")?;
    let dmu_ref = resolve_dmu_set(opts.dmu_ref.as_deref(), n, "dmu_ref")?;
    dmu_eval
        .iter()
        .map(|&o| {
            multiplier_program(data, &dmu_ref, &opts.rts, opts.orientation, opts.epsilon, o)
                .map(|lp| (data.dmunames[o].clone(), lp))
        })
        .collect()
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
    fn duality_on_m1() {
        let res = model_multiplier(&m1(), &MultiplierOptions::default()).unwrap();
        let expected = [1.0, 0.5, 0.8, 0.25];
        for (rec, e) in res.records.iter().zip(expected) {
            assert_abs_diff_eq!(rec.efficiency.unwrap(), e, epsilon = 1e-9);
        }
    }

    #[test]
    fn io_normalization_holds() {
        let res = model_multiplier(&m1(), &MultiplierOptions::default()).unwrap();
        let data = m1();
        for (rec, &o) in res.records.iter().zip(res.dmu_eval.iter()) {
            let v = rec.multiplier_input.as_ref().unwrap();
            let vx: f64 = v.iter().zip(data.input.column(o)).map(|(a, b)| a * b).sum();
            assert_abs_diff_eq!(vx, 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn single_dmu_self_normalizes() {
        let data = DeaData::from_matrices(array![[4.0]], array![[7.0]]).unwrap();
        let res = model_multiplier(&data, &MultiplierOptions::default()).unwrap();
        let rec = &res.records[0];
        assert_abs_diff_eq!(rec.efficiency.unwrap(), 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(
            rec.multiplier_input.as_ref().unwrap()[0],
            0.25,
            epsilon = 1e-9
        );
    }

    #[test]
    fn oversized_epsilon_turns_na() {
        let res = model_multiplier(
            &m1(),
            &MultiplierOptions {
                epsilon: 10.0,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(res.records.iter().all(|r| r.is_na()));
    }

    #[test]
    fn epsilon_monotonicity() {
        let r0 = model_multiplier(&m1(), &MultiplierOptions::default()).unwrap();
        let r1 = model_multiplier(
            &m1(),
            &MultiplierOptions {
                epsilon: 1e-3,
                ..Default::default()
            },
        )
        .unwrap();
        for (a, b) in r0.records.iter().zip(r1.records.iter()) {
            if let (Some(s0), Some(s1)) = (a.efficiency, b.efficiency) {
                assert!(s1 <= s0 + 1e-9);
            }
        }
    }
}
