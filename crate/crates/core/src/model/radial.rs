//! Basic radial and directional envelopment models, free disposal hull
//! models, and range directional models.

use ndarray::Array2;

use crate::data::{undesirable_transform, DeaData, Translation};
use crate::error::{DeaError, Result};
use crate::lp::{self, Bound, Direction, LinearProgram, Sense};
use crate::model::result::{DeaResult, DmuRecord, DmuStatus, ModelExtras};
use crate::model::{reject_special, resolve_dmu_set, rts_rows, Orientation, Param, Rts};

#[derive(Clone, Debug)]
pub struct BasicOptions {
    pub orientation: Orientation,
    pub rts: Rts,
    pub dmu_eval: Option<Vec<usize>>,
    pub dmu_ref: Option<Vec<usize>>,
    pub maxslack: bool,
    pub weight_slack_i: Param,
    pub weight_slack_o: Param,
    /// Directional models only; defaults to the evaluated DMU's inputs.
    pub dir_input: Option<Param>,
    /// Directional models only; defaults to the evaluated DMU's outputs.
    pub dir_output: Option<Param>,
    pub vtrans_i: Option<Translation>,
    pub vtrans_o: Option<Translation>,
}

impl Default for BasicOptions {
    fn default() -> Self {
        BasicOptions {
            orientation: Orientation::Io,
            rts: Rts::Crs,
            dmu_eval: None,
            dmu_ref: None,
            maxslack: true,
            weight_slack_i: Param::Scalar(1.0),
            weight_slack_o: Param::Scalar(1.0),
            dir_input: None,
            dir_output: None,
            vtrans_i: None,
            vtrans_o: None,
        }
    }
}

/// Role a data row plays in the program.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum RowClass {
    Plain,
    NonControllable,
    NonDiscretionary,
    Undesirable,
}

pub(crate) fn input_classes(data: &DeaData) -> Vec<RowClass> {
    (0..data.num_inputs())
        .map(|i| {
            if data.special.nc_inputs.contains(&i) {
                RowClass::NonControllable
            } else if data.special.nd_inputs.contains(&i) {
                RowClass::NonDiscretionary
            } else if data.special.ud_inputs.contains(&i) {
                RowClass::Undesirable
            } else {
                RowClass::Plain
            }
        })
        .collect()
}

pub(crate) fn output_classes(data: &DeaData) -> Vec<RowClass> {
    (0..data.num_outputs())
        .map(|r| {
            if data.special.nc_outputs.contains(&r) {
                RowClass::NonControllable
            } else if data.special.nd_outputs.contains(&r) {
                RowClass::NonDiscretionary
            } else if data.special.ud_outputs.contains(&r) {
                RowClass::Undesirable
            } else {
                RowClass::Plain
            }
        })
        .collect()
}

/// One radial/directional subproblem: the evaluated activity, its reference
/// columns and the per-DMU slack weights and directions.
pub(crate) struct RadialCall<'a> {
    pub data: &'a DeaData,
    pub refcols: &'a [usize],
    pub rts: Rts,
    pub orientation: Orientation,
    pub maxslack: bool,
    pub w_in: Vec<f64>,
    pub w_out: Vec<f64>,
    pub dir_in: Option<Vec<f64>>,
    pub dir_out: Option<Vec<f64>>,
}

fn lambda_term(data: &DeaData, refcols: &[usize], row: usize, from_input: bool) -> Vec<f64> {
    refcols
        .iter()
        .map(|&j| {
            if from_input {
                data.input[(row, j)]
            } else {
                data.output[(row, j)]
            }
        })
        .collect()
}

pub(crate) fn stage1_program(call: &RadialCall, o: usize) -> Result<LinearProgram> {
    let data = call.data;
    let (m, s) = (data.num_inputs(), data.num_outputs());
    let nref = call.refcols.len();
    let ncols = 1 + nref;
    let in_class = input_classes(data);
    let out_class = output_classes(data);

    let direction = match call.orientation {
        Orientation::Io => Direction::Minimize,
        Orientation::Oo | Orientation::Dir => Direction::Maximize,
        Orientation::No => {
            return Err(DeaError::InvalidParameter(
                "basic radial models take orientation io, oo or dir".into(),
            ))
        }
    };
    let mut objective = vec![0.0; ncols];
    objective[0] = 1.0;
    let mut lp = LinearProgram::new(direction, objective);
    if call.orientation == Orientation::Dir {
        lp.set_bound(0, Bound::Free);
    }

    for i in 0..m {
        let xo = data.input[(i, o)];
        let lam = lambda_term(data, call.refcols, i, true);
        let mut coeffs = vec![0.0; ncols];
        coeffs[1..].copy_from_slice(&lam);
        match (call.orientation, in_class[i]) {
            (Orientation::Io, RowClass::Plain) => {
                // theta*x_o - X lambda >= 0
                for v in &mut coeffs[1..] {
                    *v = -*v;
                }
                coeffs[0] = xo;
                lp.push(coeffs, Sense::Ge, 0.0);
            }
            (Orientation::Io, RowClass::NonControllable)
            | (Orientation::Oo, RowClass::NonControllable)
            | (Orientation::Dir, RowClass::NonControllable) => {
                lp.push(coeffs, Sense::Eq, xo);
            }
            (Orientation::Io, RowClass::NonDiscretionary)
            | (Orientation::Oo, RowClass::NonDiscretionary)
            | (Orientation::Dir, RowClass::NonDiscretionary)
            | (Orientation::Oo, RowClass::Plain) => {
                lp.push(coeffs, Sense::Le, xo);
            }
            (Orientation::Dir, RowClass::Plain) => {
                // beta*g- + X lambda <= x_o
                coeffs[0] = call.dir_in.as_ref().map_or(0.0, |g| g[i]);
                lp.push(coeffs, Sense::Le, xo);
            }
            (Orientation::Dir, RowClass::Undesirable) => {
                // good input grows along its direction: X lambda - beta*g- = x_o
                coeffs[0] = -call.dir_in.as_ref().map_or(0.0, |g| g[i]);
                lp.push(coeffs, Sense::Eq, xo);
            }
            (_, RowClass::Undesirable) => {
                return Err(DeaError::InvalidParameter(
                    "undesirable variables reach the radial stage only under dir orientation"
                        .into(),
                ))
            }
            (Orientation::No, _) => unreachable!("orientation checked above"),
        }
    }

    for r in 0..s {
        let yo = data.output[(r, o)];
        let lam = lambda_term(data, call.refcols, r, false);
        let mut coeffs = vec![0.0; ncols];
        coeffs[1..].copy_from_slice(&lam);
        match (call.orientation, out_class[r]) {
            (Orientation::Io, RowClass::Plain)
            | (Orientation::Io, RowClass::NonDiscretionary)
            | (Orientation::Oo, RowClass::NonDiscretionary)
            | (Orientation::Dir, RowClass::NonDiscretionary) => {
                lp.push(coeffs, Sense::Ge, yo);
            }
            (_, RowClass::NonControllable) => {
                lp.push(coeffs, Sense::Eq, yo);
            }
            (Orientation::Oo, RowClass::Plain) => {
                // eta*y_o - Y lambda <= 0
                for v in &mut coeffs[1..] {
                    *v = -*v;
                }
                coeffs[0] = yo;
                lp.push(coeffs, Sense::Le, 0.0);
            }
            (Orientation::Dir, RowClass::Plain) => {
                // -beta*g+ + Y lambda >= y_o
                coeffs[0] = -call.dir_out.as_ref().map_or(0.0, |g| g[r]);
                lp.push(coeffs, Sense::Ge, yo);
            }
            (Orientation::Dir, RowClass::Undesirable) => {
                // bad output shrinks along its direction: Y lambda + beta*g+ = y_o
                coeffs[0] = call.dir_out.as_ref().map_or(0.0, |g| g[r]);
                lp.push(coeffs, Sense::Eq, yo);
            }
            (_, RowClass::Undesirable) => {
                return Err(DeaError::InvalidParameter(
                    "undesirable variables reach the radial stage only under dir orientation"
                        .into(),
                ))
            }
            (Orientation::No, _) => unreachable!("orientation checked above"),
        }
    }

    for row in rts_rows(&call.rts, ncols, 1..ncols, None) {
        lp.constraints.push(row);
    }
    Ok(lp)
}

/// Second-stage row: rhs plus whether it carries a slack variable.
struct Stage2Row {
    rhs: f64,
    sense: Sense,
    slack: bool,
    omit: bool,
}

fn stage2_rows(call: &RadialCall, o: usize, factor: f64) -> (Vec<Stage2Row>, Vec<Stage2Row>) {
    let data = call.data;
    let in_class = input_classes(data);
    let out_class = output_classes(data);
    let ins = (0..data.num_inputs())
        .map(|i| {
            let xo = data.input[(i, o)];
            match (call.orientation, in_class[i]) {
                (Orientation::Io, RowClass::Plain) => Stage2Row {
                    rhs: factor * xo,
                    sense: Sense::Eq,
                    slack: true,
                    omit: false,
                },
                (Orientation::Oo, RowClass::Plain) => Stage2Row {
                    rhs: xo,
                    sense: Sense::Eq,
                    slack: true,
                    omit: false,
                },
                (Orientation::Dir, RowClass::Plain) => Stage2Row {
                    rhs: xo - factor * call.dir_in.as_ref().map_or(0.0, |g| g[i]),
                    sense: Sense::Eq,
                    slack: true,
                    omit: false,
                },
                (Orientation::Dir, RowClass::Undesirable) => Stage2Row {
                    rhs: 0.0,
                    sense: Sense::Eq,
                    slack: false,
                    omit: true,
                },
                (_, RowClass::NonControllable) => Stage2Row {
                    rhs: xo,
                    sense: Sense::Eq,
                    slack: false,
                    omit: false,
                },
                _ => Stage2Row {
                    rhs: xo,
                    sense: Sense::Le,
                    slack: false,
                    omit: false,
                },
            }
        })
        .collect();
    let outs = (0..data.num_outputs())
        .map(|r| {
            let yo = data.output[(r, o)];
            match (call.orientation, out_class[r]) {
                (Orientation::Io, RowClass::Plain) => Stage2Row {
                    rhs: yo,
                    sense: Sense::Eq,
                    slack: true,
                    omit: false,
                },
                (Orientation::Oo, RowClass::Plain) => Stage2Row {
                    rhs: factor * yo,
                    sense: Sense::Eq,
                    slack: true,
                    omit: false,
                },
                (Orientation::Dir, RowClass::Plain) => Stage2Row {
                    rhs: yo + factor * call.dir_out.as_ref().map_or(0.0, |g| g[r]),
                    sense: Sense::Eq,
                    slack: true,
                    omit: false,
                },
                (Orientation::Dir, RowClass::Undesirable) => Stage2Row {
                    rhs: 0.0,
                    sense: Sense::Eq,
                    slack: false,
                    omit: true,
                },
                (_, RowClass::NonControllable) => Stage2Row {
                    rhs: yo,
                    sense: Sense::Eq,
                    slack: false,
                    omit: false,
                },
                _ => Stage2Row {
                    rhs: yo,
                    sense: Sense::Ge,
                    slack: false,
                    omit: false,
                },
            }
        })
        .collect();
    (ins, outs)
}

/// Solve the max-slack stage; returns (lambda, slack_in, slack_out, omega).
fn solve_stage2(
    call: &RadialCall,
    in_rows: &[Stage2Row],
    out_rows: &[Stage2Row],
) -> Result<Option<(Vec<f64>, Vec<f64>, Vec<f64>, f64)>> {
    let data = call.data;
    let nref = call.refcols.len();
    let n_slack_in = in_rows.iter().filter(|r| r.slack && !r.omit).count();
    let n_slack_out = out_rows.iter().filter(|r| r.slack && !r.omit).count();
    let ncols = nref + n_slack_in + n_slack_out;

    let mut objective = vec![0.0; ncols];
    let mut at = nref;
    for (i, row) in in_rows.iter().enumerate() {
        if row.slack && !row.omit {
            objective[at] = call.w_in[i];
            at += 1;
        }
    }
    for (r, row) in out_rows.iter().enumerate() {
        if row.slack && !row.omit {
            objective[at] = call.w_out[r];
            at += 1;
        }
    }
    let mut lp = LinearProgram::new(Direction::Maximize, objective);

    let mut slack_at = nref;
    for (i, row) in in_rows.iter().enumerate() {
        if row.omit {
            continue;
        }
        let mut coeffs = vec![0.0; ncols];
        coeffs[..nref].copy_from_slice(&lambda_term(data, call.refcols, i, true));
        if row.slack {
            coeffs[slack_at] = 1.0;
            slack_at += 1;
        }
        lp.push(coeffs, row.sense, row.rhs);
    }
    for (r, row) in out_rows.iter().enumerate() {
        if row.omit {
            continue;
        }
        let mut coeffs = vec![0.0; ncols];
        coeffs[..nref].copy_from_slice(&lambda_term(data, call.refcols, r, false));
        if row.slack {
            coeffs[slack_at] = -1.0;
            slack_at += 1;
        }
        lp.push(coeffs, row.sense, row.rhs);
    }
    for row in rts_rows(&call.rts, ncols, 0..nref, None) {
        lp.constraints.push(row);
    }

    let sol = lp::solve(&lp)?;
    if !sol.is_optimal() {
        return Ok(None);
    }
    let lambda = sol.x[..nref].to_vec();
    let mut slack_in = vec![0.0; data.num_inputs()];
    let mut slack_out = vec![0.0; data.num_outputs()];
    let mut at = nref;
    for (i, row) in in_rows.iter().enumerate() {
        if row.slack && !row.omit {
            slack_in[i] = sol.x[at].max(0.0);
            at += 1;
        }
    }
    for (r, row) in out_rows.iter().enumerate() {
        if row.slack && !row.omit {
            slack_out[r] = sol.x[at].max(0.0);
            at += 1;
        }
    }
    Ok(Some((lambda, slack_in, slack_out, sol.objective)))
}

fn targets(data: &DeaData, refcols: &[usize], lambda: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let m = data.num_inputs();
    let s = data.num_outputs();
    let mut tx = vec![0.0; m];
    let mut ty = vec![0.0; s];
    for (k, &j) in refcols.iter().enumerate() {
        let w = lambda[k];
        if w == 0.0 {
            continue;
        }
        for i in 0..m {
            tx[i] += w * data.input[(i, j)];
        }
        for r in 0..s {
            ty[r] += w * data.output[(r, j)];
        }
    }
    (tx, ty)
}

/// Solve stage 1 (and the max-slack stage when requested) for one DMU.
pub(crate) fn solve_radial_dmu(call: &RadialCall, o: usize) -> Result<DmuRecord> {
    let data = call.data;
    let name = data.dmunames[o].clone();
    if call.refcols.is_empty() {
        return Ok(DmuRecord::failed(o, &name, DmuStatus::EmptyReference));
    }
    let lp1 = stage1_program(call, o)?;
    let sol = lp::solve(&lp1)?;
    let mut rec = DmuRecord::new(o, &name);
    match sol.status {
        lp::LpStatus::Infeasible => return Ok(DmuRecord::failed(o, &name, DmuStatus::Infeasible)),
        lp::LpStatus::Unbounded => return Ok(DmuRecord::failed(o, &name, DmuStatus::Unbounded)),
        lp::LpStatus::Optimal => {}
    }
    let factor = sol.objective;
    rec.efficiency = Some(factor);

    let (in_rows, out_rows) = stage2_rows(call, o, factor);
    let mut assigned = false;
    if call.maxslack {
        if let Some((lambda, s_in, s_out, omega)) = solve_stage2(call, &in_rows, &out_rows)? {
            let (tx, ty) = targets(data, call.refcols, &lambda);
            rec.lambda = Some(lambda);
            rec.slack_input = Some(s_in);
            rec.slack_output = Some(s_out);
            rec.target_input = Some(tx);
            rec.target_output = Some(ty);
            rec.objective = Some(omega);
            assigned = true;
        } else {
            rec.notes
                .push("max-slack stage failed; stage-1 slacks reported".into());
        }
    }
    if !assigned {
        let lambda = sol.x[1..].to_vec();
        let (tx, ty) = targets(data, call.refcols, &lambda);
        let mut s_in = vec![0.0; data.num_inputs()];
        let mut s_out = vec![0.0; data.num_outputs()];
        for (i, row) in in_rows.iter().enumerate() {
            if row.slack && !row.omit {
                s_in[i] = (row.rhs - tx[i]).max(0.0);
            }
        }
        for (r, row) in out_rows.iter().enumerate() {
            if row.slack && !row.omit {
                s_out[r] = (ty[r] - row.rhs).max(0.0);
            }
        }
        rec.lambda = Some(lambda);
        rec.slack_input = Some(s_in);
        rec.slack_output = Some(s_out);
        rec.target_input = Some(tx);
        rec.target_output = Some(ty);
    }
    Ok(rec)
}

fn resolve_directions(
    data: &DeaData,
    opts: &BasicOptions,
    dmu_eval: &[usize],
) -> Result<(Array2<f64>, Array2<f64>)> {
    let m = data.num_inputs();
    let s = data.num_outputs();
    let neval = dmu_eval.len();
    let g_in = match &opts.dir_input {
        Some(p) => p.resolve(m, neval, "dir_input")?,
        None => {
            let mut g = Array2::zeros((m, neval));
            for (e, &o) in dmu_eval.iter().enumerate() {
                for i in 0..m {
                    g[(i, e)] = data.input[(i, o)];
                }
            }
            g
        }
    };
    let g_out = match &opts.dir_output {
        Some(p) => p.resolve(s, neval, "dir_output")?,
        None => {
            let mut g = Array2::zeros((s, neval));
            for (e, &o) in dmu_eval.iter().enumerate() {
                for r in 0..s {
                    g[(r, e)] = data.output[(r, o)];
                }
            }
            g
        }
    };
    for e in 0..neval {
        let zero = (0..m).all(|i| g_in[(i, e)] == 0.0) && (0..s).all(|r| g_out[(r, e)] == 0.0);
        if zero {
            return Err(DeaError::InvalidParameter(format!(
                "all-zero direction for DMU '{}'",
                data.dmunames[dmu_eval[e]]
            )));
        }
    }
    Ok((g_in, g_out))
}

struct PreparedBasic {
    data: DeaData,
    dmu_eval: Vec<usize>,
    dmu_ref: Vec<usize>,
    w_in: Array2<f64>,
    w_out: Array2<f64>,
    g_in: Option<Array2<f64>>,
    g_out: Option<Array2<f64>>,
    extras: ModelExtras,
    notes: Vec<String>,
}

fn prepare_basic(data: &DeaData, opts: &BasicOptions) -> Result<PreparedBasic> {
    opts.rts.validate()?;
    if !matches!(
        opts.orientation,
        Orientation::Io | Orientation::Oo | Orientation::Dir
    ) {
        return Err(DeaError::InvalidParameter(
            "basic radial models take orientation io, oo or dir".into(),
        ));
    }
    let mut notes = Vec::new();
    let mut extras = ModelExtras::default();

    let has_ud = !data.special.ud_inputs.is_empty() || !data.special.ud_outputs.is_empty();
    let work = if opts.orientation == Orientation::Dir {
        if opts.vtrans_i.is_some() || opts.vtrans_o.is_some() {
            return Err(DeaError::InvalidParameter(
                "translation parameters apply to non-directional orientations only".into(),
            ));
        }
        data.clone()
    } else if has_ud || opts.vtrans_i.is_some() || opts.vtrans_o.is_some() {
        let (t, applied) =
            undesirable_transform(data, opts.vtrans_i.as_ref(), opts.vtrans_o.as_ref())?;
        if opts.rts != Rts::Vrs {
            notes.push("undesirable translation is only translation-invariant under vrs".into());
        }
        if applied.nonpositive_result {
            notes.push("translated data contains nonpositive entries".into());
        }
        extras.translation = Some(applied);
        t
    } else {
        data.clone()
    };

    if (opts.dir_input.is_some() || opts.dir_output.is_some())
        && opts.orientation != Orientation::Dir
    {
        return Err(DeaError::InvalidParameter(
            "direction parameters require orientation dir".into(),
        ));
    }

    let n = work.num_dmus();
    let dmu_eval = resolve_dmu_set(opts.dmu_eval.as_deref(), n, "dmu_eval")?;
    let dmu_ref = resolve_dmu_set(opts.dmu_ref.as_deref(), n, "dmu_ref")?;
    let w_in = opts
        .weight_slack_i
        .resolve(work.num_inputs(), dmu_eval.len(), "weight_slack_i")?;
    let w_out =
        opts.weight_slack_o
            .resolve(work.num_outputs(), dmu_eval.len(), "weight_slack_o")?;
    let (g_in, g_out) = if opts.orientation == Orientation::Dir {
        let (gi, go) = resolve_directions(&work, opts, &dmu_eval)?;
        extras.dir_input = Some(gi.columns().into_iter().map(|c| c.to_vec()).collect());
        extras.dir_output = Some(go.columns().into_iter().map(|c| c.to_vec()).collect());
        (Some(gi), Some(go))
    } else {
        (None, None)
    };
    Ok(PreparedBasic {
        data: work,
        dmu_eval,
        dmu_ref,
        w_in,
        w_out,
        g_in,
        g_out,
        extras,
        notes,
    })
}

/// Radial envelopment models: CCR/BCC-style oriented models and directional
/// models, with the non-controllable, non-discretionary and undesirable
/// adaptations driven by the dataset's flags.
pub fn model_basic(data: &DeaData, opts: &BasicOptions) -> Result<DeaResult> {
    let prep = prepare_basic(data, opts)?;
    let mut records = Vec::with_capacity(prep.dmu_eval.len());
    for (e, &o) in prep.dmu_eval.iter().enumerate() {
        let call = RadialCall {
            data: &prep.data,
            refcols: &prep.dmu_ref,
            rts: opts.rts,
            orientation: opts.orientation,
            maxslack: opts.maxslack,
            w_in: prep.w_in.column(e).to_vec(),
            w_out: prep.w_out.column(e).to_vec(),
            dir_in: prep.g_in.as_ref().map(|g| g.column(e).to_vec()),
            dir_out: prep.g_out.as_ref().map(|g| g.column(e).to_vec()),
        };
        records.push(solve_radial_dmu(&call, o)?);
    }
    Ok(DeaResult {
        modelname: "basic".into(),
        orientation: opts.orientation,
        rts: opts.rts,
        maxslack: opts.maxslack,
        dmu_eval: prep.dmu_eval,
        dmu_ref: prep.dmu_ref,
        records,
        data: prep.data,
        extras: prep.extras,
        notes: prep.notes,
    })
}

/// First-stage programs of [`model_basic`], unsolved, one per evaluated DMU.
pub fn model_basic_lp(data: &DeaData, opts: &BasicOptions) -> Result<Vec<(String, LinearProgram)>> {
    let prep = prepare_basic(data, opts)?;
    let mut out = Vec::with_capacity(prep.dmu_eval.len());
    for (e, &o) in prep.dmu_eval.iter().enumerate() {
        let call = RadialCall {
            data: &prep.data,
            refcols: &prep.dmu_ref,
            rts: opts.rts,
            orientation: opts.orientation,
            maxslack: false,
            w_in: prep.w_in.column(e).to_vec(),
            w_out: prep.w_out.column(e).to_vec(),
            dir_in: prep.g_in.as_ref().map(|g| g.column(e).to_vec()),
            dir_out: prep.g_out.as_ref().map(|g| g.column(e).to_vec()),
        };
        out.push((prep.data.dmunames[o].clone(), stage1_program(&call, o)?));
    }
    Ok(out)
}

/// Radial score of an arbitrary activity against explicit reference
/// matrices. `None` when the program is infeasible.
pub(crate) fn radial_distance(
    xref: &Array2<f64>,
    yref: &Array2<f64>,
    rts: &Rts,
    input_oriented: bool,
    x0: &[f64],
    y0: &[f64],
) -> Result<Option<f64>> {
    let nref = xref.ncols();
    let ncols = 1 + nref;
    let mut objective = vec![0.0; ncols];
    objective[0] = 1.0;
    let mut lp = LinearProgram::new(
        if input_oriented {
            Direction::Minimize
        } else {
            Direction::Maximize
        },
        objective,
    );
    for i in 0..xref.nrows() {
        let mut coeffs = vec![0.0; ncols];
        if input_oriented {
            coeffs[0] = x0[i];
            for (k, v) in coeffs[1..].iter_mut().enumerate() {
                *v = -xref[(i, k)];
            }
            lp.push(coeffs, Sense::Ge, 0.0);
        } else {
            for (k, v) in coeffs[1..].iter_mut().enumerate() {
                *v = xref[(i, k)];
            }
            lp.push(coeffs, Sense::Le, x0[i]);
        }
    }
    for r in 0..yref.nrows() {
        let mut coeffs = vec![0.0; ncols];
        if input_oriented {
            for (k, v) in coeffs[1..].iter_mut().enumerate() {
                *v = yref[(r, k)];
            }
            lp.push(coeffs, Sense::Ge, y0[r]);
        } else {
            coeffs[0] = y0[r];
            for (k, v) in coeffs[1..].iter_mut().enumerate() {
                *v = -yref[(r, k)];
            }
            lp.push(coeffs, Sense::Le, 0.0);
        }
    }
    for row in rts_rows(rts, ncols, 1..ncols, None) {
        lp.constraints.push(row);
    }
    let sol = lp::solve(&lp)?;
    Ok(sol.is_optimal().then_some(sol.objective))
}

// ---------------------------------------------------------------------------
// Free disposal hull
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct FdhOptions {
    pub orientation: Orientation,
    pub dmu_eval: Option<Vec<usize>>,
    pub dmu_ref: Option<Vec<usize>>,
    pub maxslack: bool,
    pub weight_slack_i: Param,
    pub weight_slack_o: Param,
    pub dir_input: Option<Param>,
    pub dir_output: Option<Param>,
}

impl Default for FdhOptions {
    fn default() -> Self {
        FdhOptions {
            orientation: Orientation::Io,
            dmu_eval: None,
            dmu_ref: None,
            maxslack: true,
            weight_slack_i: Param::Scalar(1.0),
            weight_slack_o: Param::Scalar(1.0),
            dir_input: None,
            dir_output: None,
        }
    }
}

/// Free disposal hull models by dominance enumeration; equivalent to binary
/// intensity weights under VRS, so each target is an observed DMU.
pub fn model_fdh(data: &DeaData, opts: &FdhOptions) -> Result<DeaResult> {
    reject_special(data, "fdh", false, false, false)?;
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
    let (g_in, g_out) = if opts.orientation == Orientation::Dir {
        let basic = BasicOptions {
            orientation: Orientation::Dir,
            dmu_eval: Some(dmu_eval.clone()),
            dir_input: opts.dir_input.clone(),
            dir_output: opts.dir_output.clone(),
            ..Default::default()
        };
        let (gi, go) = resolve_directions(data, &basic, &dmu_eval)?;
        (Some(gi), Some(go))
    } else {
        if opts.dir_input.is_some() || opts.dir_output.is_some() {
            return Err(DeaError::InvalidParameter(
                "direction parameters require orientation dir".into(),
            ));
        }
        (None, None)
    };

    let mut records = Vec::with_capacity(dmu_eval.len());
    for (e, &o) in dmu_eval.iter().enumerate() {
        let mut best: Option<(f64, usize, f64)> = None; // (score, ref position, tie-break omega)
        for (k, &j) in dmu_ref.iter().enumerate() {
            let score = match opts.orientation {
                Orientation::Io => {
                    let dominates = (0..s).all(|r| data.output[(r, j)] >= data.output[(r, o)]);
                    if !dominates {
                        continue;
                    }
                    let mut theta = 0.0f64;
                    let mut ok = true;
                    for i in 0..m {
                        let xo = data.input[(i, o)];
                        let xj = data.input[(i, j)];
                        if xo > 0.0 {
                            theta = theta.max(xj / xo);
                        } else if xj > 0.0 {
                            ok = false;
                            break;
                        }
                    }
                    if !ok {
                        continue;
                    }
                    theta
                }
                Orientation::Oo => {
                    let dominated = (0..m).all(|i| data.input[(i, j)] <= data.input[(i, o)]);
                    if !dominated {
                        continue;
                    }
                    let mut eta = f64::INFINITY;
                    for r in 0..s {
                        let yo = data.output[(r, o)];
                        if yo > 0.0 {
                            eta = eta.min(data.output[(r, j)] / yo);
                        }
                    }
                    if !eta.is_finite() {
                        continue;
                    }
                    eta
                }
                Orientation::Dir => {
                    let gi = g_in.as_ref().unwrap();
                    let go = g_out.as_ref().unwrap();
                    let mut beta = f64::INFINITY;
                    let mut ok = true;
                    for i in 0..m {
                        let slackroom = data.input[(i, o)] - data.input[(i, j)];
                        let g = gi[(i, e)];
                        if g > 0.0 {
                            beta = beta.min(slackroom / g);
                        } else if slackroom < 0.0 {
                            ok = false;
                            break;
                        }
                    }
                    if ok {
                        for r in 0..s {
                            let room = data.output[(r, j)] - data.output[(r, o)];
                            let g = go[(r, e)];
                            if g > 0.0 {
                                beta = beta.min(room / g);
                            } else if room < 0.0 {
                                ok = false;
                                break;
                            }
                        }
                    }
                    if !ok || !beta.is_finite() {
                        continue;
                    }
                    beta
                }
                Orientation::No => {
                    return Err(DeaError::InvalidParameter(
                        "fdh models take orientation io, oo or dir".into(),
                    ))
                }
            };
            let improves = |best: &Option<(f64, usize, f64)>, cand: f64| match best {
                None => true,
                Some((cur, _, _)) => match opts.orientation {
                    Orientation::Io => cand < cur - 1e-12,
                    _ => cand > cur + 1e-12,
                },
            };
            let ties = |best: &(f64, usize, f64), cand: f64| (cand - best.0).abs() <= 1e-12;
            // Tie-break on the max-slack objective when requested.
            let omega = {
                let (tx, ty) =
                    fdh_projection(data, opts.orientation, o, j, score, &g_in, &g_out, e);
                let mut w = 0.0;
                for i in 0..m {
                    w += w_in[(i, e)] * (tx[i] - data.input[(i, j)]);
                }
                for r in 0..s {
                    w += w_out[(r, e)] * (data.output[(r, j)] - ty[r]);
                }
                w
            };
            match &best {
                b if improves(b, score) => best = Some((score, k, omega)),
                Some(b) if ties(b, score) && opts.maxslack && omega > b.2 + 1e-12 => {
                    best = Some((score, k, omega))
                }
                _ => {}
            }
        }
        let name = &data.dmunames[o];
        let rec = match best {
            None => DmuRecord::failed(o, name, DmuStatus::Infeasible),
            Some((score, k, _)) => {
                let j = dmu_ref[k];
                let mut rec = DmuRecord::new(o, name);
                rec.efficiency = Some(score);
                let mut lambda = vec![0.0; dmu_ref.len()];
                lambda[k] = 1.0;
                rec.lambda = Some(lambda);
                let (tx, ty) =
                    fdh_projection(data, opts.orientation, o, j, score, &g_in, &g_out, e);
                let s_in: Vec<f64> = (0..m)
                    .map(|i| (tx[i] - data.input[(i, j)]).max(0.0))
                    .collect();
                let s_out: Vec<f64> = (0..s)
                    .map(|r| (data.output[(r, j)] - ty[r]).max(0.0))
                    .collect();
                rec.slack_input = Some(s_in);
                rec.slack_output = Some(s_out);
                rec.target_input = Some((0..m).map(|i| data.input[(i, j)]).collect());
                rec.target_output = Some((0..s).map(|r| data.output[(r, j)]).collect());
                rec
            }
        };
        records.push(rec);
    }
    Ok(DeaResult {
        modelname: "fdh".into(),
        orientation: opts.orientation,
        rts: Rts::Vrs,
        maxslack: opts.maxslack,
        dmu_eval,
        dmu_ref,
        records,
        data: data.clone(),
        extras: ModelExtras::default(),
        notes: Vec::new(),
    })
}

/// Radially adjusted point the dominance score moves the DMU to.
#[allow(clippy::too_many_arguments)]
fn fdh_projection(
    data: &DeaData,
    orientation: Orientation,
    o: usize,
    _j: usize,
    score: f64,
    g_in: &Option<Array2<f64>>,
    g_out: &Option<Array2<f64>>,
    e: usize,
) -> (Vec<f64>, Vec<f64>) {
    let m = data.num_inputs();
    let s = data.num_outputs();
    match orientation {
        Orientation::Io => (
            (0..m).map(|i| score * data.input[(i, o)]).collect(),
            (0..s).map(|r| data.output[(r, o)]).collect(),
        ),
        Orientation::Oo => (
            (0..m).map(|i| data.input[(i, o)]).collect(),
            (0..s).map(|r| score * data.output[(r, o)]).collect(),
        ),
        _ => (
            (0..m)
                .map(|i| data.input[(i, o)] - score * g_in.as_ref().unwrap()[(i, e)])
                .collect(),
            (0..s)
                .map(|r| data.output[(r, o)] + score * g_out.as_ref().unwrap()[(r, e)])
                .collect(),
        ),
    }
}

// ---------------------------------------------------------------------------
// Range directional models
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct RdmOptions {
    /// `No` (both sides), `Io` or `Oo`.
    pub orientation: Orientation,
    /// Invert the nonzero direction components.
    pub irdm: bool,
    pub dmu_eval: Option<Vec<usize>>,
    pub dmu_ref: Option<Vec<usize>>,
    pub maxslack: bool,
    pub weight_slack_i: Param,
    pub weight_slack_o: Param,
}

impl Default for RdmOptions {
    fn default() -> Self {
        RdmOptions {
            orientation: Orientation::No,
            irdm: false,
            dmu_eval: None,
            dmu_ref: None,
            maxslack: true,
            weight_slack_i: Param::Scalar(1.0),
            weight_slack_o: Param::Scalar(1.0),
        }
    }
}

/// Range directional models: directional VRS models whose directions span
/// the observed ranges, built to handle negative data.
pub fn model_rdm(data: &DeaData, opts: &RdmOptions) -> Result<DeaResult> {
    reject_special(data, "rdm", false, false, false)?;
    if !matches!(
        opts.orientation,
        Orientation::No | Orientation::Io | Orientation::Oo
    ) {
        return Err(DeaError::InvalidParameter(
            "rdm models take orientation no, io or oo".into(),
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

    let min_in: Vec<f64> = (0..m)
        .map(|i| {
            dmu_ref
                .iter()
                .fold(f64::INFINITY, |acc, &j| acc.min(data.input[(i, j)]))
        })
        .collect();
    let max_out: Vec<f64> = (0..s)
        .map(|r| {
            dmu_ref
                .iter()
                .fold(f64::NEG_INFINITY, |acc, &j| acc.max(data.output[(r, j)]))
        })
        .collect();

    let mut dirs_in = Vec::with_capacity(dmu_eval.len());
    let mut dirs_out = Vec::with_capacity(dmu_eval.len());
    let mut records = Vec::with_capacity(dmu_eval.len());
    for (e, &o) in dmu_eval.iter().enumerate() {
        let mut g_in: Vec<f64> = (0..m)
            .map(|i| (data.input[(i, o)] - min_in[i]).max(0.0))
            .collect();
        let mut g_out: Vec<f64> = (0..s)
            .map(|r| (max_out[r] - data.output[(r, o)]).max(0.0))
            .collect();
        if opts.orientation == Orientation::Io {
            g_out.iter_mut().for_each(|v| *v = 0.0);
        }
        if opts.orientation == Orientation::Oo {
            g_in.iter_mut().for_each(|v| *v = 0.0);
        }
        if opts.irdm {
            for v in g_in.iter_mut().chain(g_out.iter_mut()) {
                if *v != 0.0 {
                    *v = 1.0 / *v;
                }
            }
        }
        let zero = g_in.iter().all(|&v| v == 0.0) && g_out.iter().all(|&v| v == 0.0);
        let rec = if zero {
            // The DMU sits at the ideal point of the reference set.
            let name = &data.dmunames[o];
            let mut rec = DmuRecord::new(o, name);
            rec.efficiency = Some(0.0);
            let mut lambda = vec![0.0; dmu_ref.len()];
            if let Some(k) = dmu_ref.iter().position(|&j| j == o) {
                lambda[k] = 1.0;
            }
            rec.lambda = Some(lambda);
            rec.slack_input = Some(vec![0.0; m]);
            rec.slack_output = Some(vec![0.0; s]);
            rec.target_input = Some((0..m).map(|i| data.input[(i, o)]).collect());
            rec.target_output = Some((0..s).map(|r| data.output[(r, o)]).collect());
            rec.notes.push("degenerate zero direction".into());
            rec
        } else {
            let call = RadialCall {
                data,
                refcols: &dmu_ref,
                rts: Rts::Vrs,
                orientation: Orientation::Dir,
                maxslack: opts.maxslack,
                w_in: w_in.column(e).to_vec(),
                w_out: w_out.column(e).to_vec(),
                dir_in: Some(g_in.clone()),
                dir_out: Some(g_out.clone()),
            };
            solve_radial_dmu(&call, o)?
        };
        dirs_in.push(g_in);
        dirs_out.push(g_out);
        records.push(rec);
    }
    Ok(DeaResult {
        modelname: "rdm".into(),
        orientation: opts.orientation,
        rts: Rts::Vrs,
        maxslack: opts.maxslack,
        dmu_eval,
        dmu_ref,
        records,
        data: data.clone(),
        extras: ModelExtras {
            dir_input: Some(dirs_in),
            dir_output: Some(dirs_out),
            ..Default::default()
        },
        notes: Vec::new(),
    })
}
