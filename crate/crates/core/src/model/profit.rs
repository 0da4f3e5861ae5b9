//! Cost, revenue and profit efficiency models.

use crate::data::DeaData;
use crate::error::{DeaError, Result};
use crate::lp::{self, Direction, LinearProgram, Sense};
use crate::model::result::{DeaResult, DmuRecord, DmuStatus, ModelExtras};
use crate::model::{reject_special, resolve_dmu_set, rts_rows, Orientation, Param, Rts};

/// Which of the three price-based models to run, decided by the prices given.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum PriceMode {
    Cost,
    Revenue,
    Profit,
}

#[derive(Clone, Debug)]
pub struct ProfitOptions {
    pub rts: Rts,
    /// Unit input prices; enables cost (or profit) efficiency.
    pub price_input: Option<Param>,
    /// Unit output prices; enables revenue (or profit) efficiency.
    pub price_output: Option<Param>,
    /// Cost: add `x <= x_o`; revenue: add `y >= y_o`. The profit program
    /// carries both bounds regardless.
    pub restricted_optimal: bool,
    pub dmu_eval: Option<Vec<usize>>,
    pub dmu_ref: Option<Vec<usize>>,
}

impl Default for ProfitOptions {
    fn default() -> Self {
        ProfitOptions {
            rts: Rts::Crs,
            price_input: None,
            price_output: None,
            restricted_optimal: true,
            dmu_eval: None,
            dmu_ref: None,
        }
    }
}

impl ProfitOptions {
    pub fn cost(price_input: Param) -> Self {
        ProfitOptions {
            price_input: Some(price_input),
            ..Default::default()
        }
    }

    pub fn revenue(price_output: Param) -> Self {
        ProfitOptions {
            price_output: Some(price_output),
            ..Default::default()
        }
    }

    pub fn profit(price_input: Param, price_output: Param) -> Self {
        ProfitOptions {
            price_input: Some(price_input),
            price_output: Some(price_output),
            ..Default::default()
        }
    }
}

/// Cost, revenue or profit efficiency. The optimal activity lands in the
/// target fields; `objective` holds the optimal monetary value and
/// `efficiency` the corresponding score.
pub fn model_profit(data: &DeaData, opts: &ProfitOptions) -> Result<DeaResult> {
    reject_special(data, "profit", false, false, false)?;
    opts.rts.validate()?;
    let mode = match (&opts.price_input, &opts.price_output) {
        (Some(_), None) => PriceMode::Cost,
        (None, Some(_)) => PriceMode::Revenue,
        (Some(_), Some(_)) => PriceMode::Profit,
        (None, None) => {
            return Err(DeaError::InvalidParameter(
                "profit models need price_input, price_output or both".into(),
            ))
        }
    };
    let n = data.num_dmus();
    let dmu_eval = resolve_dmu_set(opts.dmu_eval.as_deref(), n, "dmu_eval")?;
    let dmu_ref = resolve_dmu_set(opts.dmu_ref.as_deref(), n, "dmu_ref")?;
    let m = data.num_inputs();
    let s = data.num_outputs();
    let neval = dmu_eval.len();
    let c = match &opts.price_input {
        Some(p) => Some(p.resolve(m, neval, "price_input")?),
        None => None,
    };
    let p = match &opts.price_output {
        Some(q) => Some(q.resolve(s, neval, "price_output")?),
        None => None,
    };
    let mut notes = Vec::new();
    if c.as_ref().is_some_and(|c| c.iter().any(|&v| v < 0.0))
        || p.as_ref().is_some_and(|p| p.iter().any(|&v| v < 0.0))
    {
        notes.push("negative prices supplied".into());
    }

    let nref = dmu_ref.len();
    let mut records = Vec::with_capacity(neval);
    for (e, &o) in dmu_eval.iter().enumerate() {
        let has_x = mode != PriceMode::Revenue;
        let has_y = mode != PriceMode::Cost;
        let nx = if has_x { m } else { 0 };
        let ny = if has_y { s } else { 0 };
        let ncols = nref + nx + ny;
        let mut objective = vec![0.0; ncols];
        if let (true, Some(c)) = (has_x, &c) {
            for i in 0..m {
                objective[nref + i] = match mode {
                    PriceMode::Cost => c[(i, e)],
                    _ => -c[(i, e)],
                };
            }
        }
        if let (true, Some(p)) = (has_y, &p) {
            for r in 0..s {
                objective[nref + nx + r] = p[(r, e)];
            }
        }
        let mut lp = LinearProgram::new(
            match mode {
                PriceMode::Cost => Direction::Minimize,
                _ => Direction::Maximize,
            },
            objective,
        );

        for i in 0..m {
            let mut coeffs = vec![0.0; ncols];
            for (k, &j) in dmu_ref.iter().enumerate() {
                coeffs[k] = data.input[(i, j)];
            }
            if has_x {
                // x - X lambda >= 0, written as X lambda - x <= 0
                coeffs[nref + i] = -1.0;
                lp.push(coeffs, Sense::Le, 0.0);
            } else {
                lp.push(coeffs, Sense::Le, data.input[(i, o)]);
            }
        }
        for r in 0..s {
            let mut coeffs = vec![0.0; ncols];
            for (k, &j) in dmu_ref.iter().enumerate() {
                coeffs[k] = data.output[(r, j)];
            }
            if has_y {
                // y - Y lambda <= 0
                coeffs[nref + nx + r] = 1.0;
                for v in coeffs.iter_mut().take(nref) {
                    *v = -*v;
                }
                lp.push(coeffs, Sense::Le, 0.0);
            } else {
                lp.push(coeffs, Sense::Ge, data.output[(r, o)]);
            }
        }
        // Activity bounds: always for profit, optional otherwise.
        if has_x && (mode == PriceMode::Profit || opts.restricted_optimal) {
            for i in 0..m {
                let mut coeffs = vec![0.0; ncols];
                coeffs[nref + i] = 1.0;
                lp.push(coeffs, Sense::Le, data.input[(i, o)]);
            }
        }
        if has_y && (mode == PriceMode::Profit || opts.restricted_optimal) {
            for r in 0..s {
                let mut coeffs = vec![0.0; ncols];
                coeffs[nref + nx + r] = 1.0;
                lp.push(coeffs, Sense::Ge, data.output[(r, o)]);
            }
        }
        for row in rts_rows(&opts.rts, ncols, 0..nref, None) {
            lp.constraints.push(row);
        }

        let sol = lp::solve(&lp)?;
        let name = &data.dmunames[o];
        let rec = match sol.status {
            lp::LpStatus::Infeasible => DmuRecord::failed(o, name, DmuStatus::Infeasible),
            lp::LpStatus::Unbounded => DmuRecord::failed(o, name, DmuStatus::Unbounded),
            lp::LpStatus::Optimal => {
                let mut rec = DmuRecord::new(o, name);
                rec.objective = Some(sol.objective);
                rec.lambda = Some(sol.x[..nref].to_vec());
                let x_star: Vec<f64> = if has_x {
                    sol.x[nref..nref + m].to_vec()
                } else {
                    data.input.column(o).to_vec()
                };
                let y_star: Vec<f64> = if has_y {
                    sol.x[nref + nx..].to_vec()
                } else {
                    data.output.column(o).to_vec()
                };
                let dot = |w: &ndarray::Array2<f64>, v: &[f64]| -> f64 {
                    v.iter().enumerate().map(|(i, &x)| w[(i, e)] * x).sum()
                };
                let score = match mode {
                    PriceMode::Cost => {
                        let c = c.as_ref().unwrap();
                        let denom = dot(c, &data.input.column(o).to_vec());
                        (denom.abs() > 1e-12).then(|| dot(c, &x_star) / denom)
                    }
                    PriceMode::Revenue => {
                        let p = p.as_ref().unwrap();
                        let denom = dot(p, &y_star);
                        (denom.abs() > 1e-12)
                            .then(|| dot(p, &data.output.column(o).to_vec()) / denom)
                    }
                    PriceMode::Profit => {
                        let c = c.as_ref().unwrap();
                        let p = p.as_ref().unwrap();
                        let denom = dot(p, &y_star) - dot(c, &x_star);
                        let num = dot(p, &data.output.column(o).to_vec())
                            - dot(c, &data.input.column(o).to_vec());
                        if num < 0.0 {
                            rec.notes
                                .push("observed profit is negative; score can leave (0,1]".into());
                        }
                        (denom.abs() > 1e-12).then_some(num / denom)
                    }
                };
                if score.is_none() {
                    rec.notes.push("zero optimal value; score undefined".into());
                }
                rec.efficiency = score;
                rec.target_input = Some(x_star);
                rec.target_output = Some(y_star);
                rec
            }
        };
        records.push(rec);
    }
    Ok(DeaResult {
        modelname: match mode {
            PriceMode::Cost => "cost".into(),
            PriceMode::Revenue => "revenue".into(),
            PriceMode::Profit => "profit".into(),
        },
        orientation: Orientation::No,
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
    fn cost_efficiency_of_b() {
        let res = model_profit(
            &m1(),
            &ProfitOptions {
                price_input: Some(Param::Scalar(1.0)),
                restricted_optimal: false,
                ..Default::default()
            },
        )
        .unwrap();
        let b = &res.records[1];
        assert_abs_diff_eq!(b.efficiency.unwrap(), 0.5, epsilon = 1e-9);
        assert_abs_diff_eq!(b.target_input.as_ref().unwrap()[0], 2.0, epsilon = 1e-7);
    }

    #[test]
    fn revenue_efficiency_of_b() {
        let res = model_profit(
            &m1(),
            &ProfitOptions {
                price_output: Some(Param::Scalar(1.0)),
                restricted_optimal: false,
                ..Default::default()
            },
        )
        .unwrap();
        let b = &res.records[1];
        assert_abs_diff_eq!(b.efficiency.unwrap(), 0.5, epsilon = 1e-9);
        assert_abs_diff_eq!(b.target_output.as_ref().unwrap()[0], 4.0, epsilon = 1e-7);
    }

    #[test]
    fn profit_zero_denominator_is_na() {
        let res = model_profit(
            &m1(),
            &ProfitOptions {
                price_input: Some(Param::Scalar(1.0)),
                price_output: Some(Param::Scalar(1.0)),
                restricted_optimal: true,
                ..Default::default()
            },
        )
        .unwrap();
        let b = &res.records[1];
        assert!(b.efficiency.is_none());
        assert_abs_diff_eq!(b.objective.unwrap(), 0.0, epsilon = 1e-9);
    }

    #[test]
    fn cost_and_revenue_scores_unit_interval() {
        let data = m1();
        for opts in [
            ProfitOptions::cost(Param::Scalar(2.0)),
            ProfitOptions::revenue(Param::Scalar(3.0)),
        ] {
            let res = model_profit(&data, &opts).unwrap();
            for rec in &res.records {
                let s = rec.efficiency.unwrap();
                assert!(s > 0.0 && s <= 1.0 + 1e-9);
            }
        }
    }
}
