//! Malmquist productivity index over a panel, with the standard
//! decompositions and contemporary, sequential or global frontiers.

use ndarray::Array2;
use serde::Serialize;

use crate::data::MalmquistSeries;
use crate::error::{DeaError, Result};
use crate::model::radial::radial_distance;
use crate::model::{resolve_dmu_set, Orientation, Rts};

/// How the production possibility set is assembled per period.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FrontierScope {
    /// Each period stands alone.
    Cont,
    /// Period t pools every period up to t.
    Seq,
    /// Technical change measured against the pooled panel.
    Glob,
}

/// Which index decomposition to report.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Decomposition {
    Fgnz,
    Rd,
    Gl,
    Bias,
}

#[derive(Clone, Debug)]
pub struct MalmquistOptions {
    pub orientation: Orientation,
    pub rts: Rts,
    pub type1: FrontierScope,
    pub type2: Decomposition,
    /// Compute the bias components under VRS instead of CRS (bias + vrs only).
    pub tc_vrs: bool,
    pub dmu_eval: Option<Vec<usize>>,
    pub dmu_ref: Option<Vec<usize>>,
}

impl Default for MalmquistOptions {
    fn default() -> Self {
        MalmquistOptions {
            orientation: Orientation::Io,
            rts: Rts::Crs,
            type1: FrontierScope::Cont,
            type2: Decomposition::Fgnz,
            tc_vrs: false,
            dmu_eval: None,
            dmu_ref: None,
        }
    }
}

/// Frontier selector for a distance evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FrontierSel {
    /// The technology of one period.
    Period(usize),
    /// All periods up to and including one period.
    Prefix(usize),
    /// Every period pooled.
    Global,
}

/// Shephard-style distance of an activity to a frontier built from the
/// panel: io gives `inf {theta : (theta x, y) in P}`, oo the reciprocal of
/// the maximal output expansion. `None` when the program is infeasible.
pub fn distance(
    series: &MalmquistSeries,
    frontier: FrontierSel,
    x: &[f64],
    y: &[f64],
    orientation: Orientation,
    rts: &Rts,
    dmu_ref: Option<&[usize]>,
) -> Result<Option<f64>> {
    let io = match orientation {
        Orientation::Io => true,
        Orientation::Oo => false,
        _ => {
            return Err(DeaError::InvalidParameter(
                "distance takes orientation io or oo".into(),
            ))
        }
    };
    let t_max = series.num_periods() - 1;
    let periods: Vec<usize> = match frontier {
        FrontierSel::Period(t) => {
            if t > t_max {
                return Err(DeaError::InvalidParameter(format!(
                    "period {t} out of range 0..={t_max}"
                )));
            }
            vec![t]
        }
        FrontierSel::Prefix(t) => {
            if t > t_max {
                return Err(DeaError::InvalidParameter(format!(
                    "period {t} out of range 0..={t_max}"
                )));
            }
            (0..=t).collect()
        }
        FrontierSel::Global => (0..=t_max).collect(),
    };
    let refset = resolve_dmu_set(dmu_ref, series.num_dmus(), "dmu_ref")?;
    let m = series.periods[0].num_inputs();
    let s = series.periods[0].num_outputs();
    let ncols = periods.len() * refset.len();
    let mut xref = Array2::zeros((m, ncols));
    let mut yref = Array2::zeros((s, ncols));
    let mut at = 0;
    for &t in &periods {
        let p = &series.periods[t];
        for &j in &refset {
            for i in 0..m {
                xref[(i, at)] = p.input[(i, j)];
            }
            for r in 0..s {
                yref[(r, at)] = p.output[(r, j)];
            }
            at += 1;
        }
    }
    let score = radial_distance(&xref, &yref, rts, io, x, y)?;
    // Output orientation reports the reciprocal of the expansion factor.
    Ok(score.map(|v| if io { v } else { 1.0 / v }))
}

type Mat = Vec<Vec<Option<f64>>>;

/// One distance table (rows follow `dmu_eval`), present under CRS and/or VRS
/// as the configuration requires.
#[derive(Clone, Debug, Default, Serialize)]
pub struct DistanceTable {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub crs: Option<Mat>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vrs: Option<Mat>,
}

/// Every distance function the decompositions touch, keyed the way the
/// results surface names them.
#[derive(Clone, Debug, Default, Serialize)]
pub struct EffAll {
    /// `D^t(x^t, y^t)`, one column per period.
    pub efficiency: DistanceTable,
    /// `D^t(x^{t+1}, y^{t+1})`, one column per transition.
    pub efficiency_t_t1: DistanceTable,
    /// `D^{t+1}(x^t, y^t)`.
    pub efficiency_t1_t: DistanceTable,
    /// `D^t(x^{t+1}, y^t)`.
    pub efficiency_t_xt1: DistanceTable,
    /// `D^{t+1}(x^{t+1}, y^t)`.
    pub efficiency_t1_xt1: DistanceTable,
    /// `D^{<=T}(x^t, y^t)` against the pooled panel.
    pub efficiency_glob: DistanceTable,
}

#[derive(Clone, Debug, Serialize)]
pub struct MalmquistResult {
    pub orientation: Orientation,
    pub rts: Rts,
    pub type1: FrontierScope,
    pub type2: Decomposition,
    pub tc_vrs: bool,
    pub dmunames: Vec<String>,
    pub dmu_eval: Vec<usize>,
    pub period_labels: Vec<String>,
    /// Indices per DMU per transition (periods `t -> t+1`).
    pub mi: Mat,
    pub ec: Option<Mat>,
    pub tc: Mat,
    pub pech: Option<Mat>,
    pub sech: Option<Mat>,
    pub matech: Option<Mat>,
    pub obtech: Option<Mat>,
    pub ibtech: Option<Mat>,
    pub eff_all: EffAll,
}

struct DistanceCache<'a> {
    series: &'a MalmquistSeries,
    dmu_eval: &'a [usize],
    dmu_ref: &'a [usize],
    orientation: Orientation,
    sequential: bool,
}

impl DistanceCache<'_> {
    fn frontier(&self, t: usize) -> FrontierSel {
        if self.sequential {
            FrontierSel::Prefix(t)
        } else {
            FrontierSel::Period(t)
        }
    }

    /// Table of `D^{t_f}(x^{t_x}, y^{t_y})` over transitions. `t_f`, `t_x`,
    /// `t_y` are given as offsets (0 -> t, 1 -> t+1) except for the global
    /// table which is requested separately.
    fn table(&self, vrs: bool, off_f: usize, off_x: usize, off_y: usize) -> Result<Mat> {
        let t_count = self.series.num_periods();
        let cols = if off_f == 0 && off_x == 0 && off_y == 0 {
            t_count
        } else {
            t_count - 1
        };
        let rts = if vrs { Rts::Vrs } else { Rts::Crs };
        let mut out = vec![vec![None; cols]; self.dmu_eval.len()];
        for (e, &o) in self.dmu_eval.iter().enumerate() {
            for t in 0..cols {
                let x = self.series.periods[t + off_x].input.column(o).to_vec();
                let y = self.series.periods[t + off_y].output.column(o).to_vec();
                out[e][t] = distance(
                    self.series,
                    self.frontier(t + off_f),
                    &x,
                    &y,
                    self.orientation,
                    &rts,
                    Some(self.dmu_ref),
                )?;
            }
        }
        Ok(out)
    }

    fn global_table(&self, vrs: bool) -> Result<Mat> {
        let t_count = self.series.num_periods();
        let rts = if vrs { Rts::Vrs } else { Rts::Crs };
        let mut out = vec![vec![None; t_count]; self.dmu_eval.len()];
        for (e, &o) in self.dmu_eval.iter().enumerate() {
            for t in 0..t_count {
                let x = self.series.periods[t].input.column(o).to_vec();
                let y = self.series.periods[t].output.column(o).to_vec();
                out[e][t] = distance(
                    self.series,
                    FrontierSel::Global,
                    &x,
                    &y,
                    self.orientation,
                    &rts,
                    Some(self.dmu_ref),
                )?;
            }
        }
        Ok(out)
    }
}

/// Elementwise product/quotient helpers with NA contamination.
fn combine<F: Fn(&[f64]) -> f64>(parts: &[&Mat], t_shift: &[usize], f: F) -> Mat {
    let rows = parts[0].len();
    let cols = parts
        .iter()
        .zip(t_shift)
        .map(|(p, &sh)| p[0].len() - sh)
        .min()
        .unwrap_or(0);
    let mut out = vec![vec![None; cols]; rows];
    for e in 0..rows {
        for t in 0..cols {
            let vals: Option<Vec<f64>> = parts
                .iter()
                .zip(t_shift)
                .map(|(p, &sh)| p[e][t + sh])
                .collect();
            out[e][t] = vals.map(|v| f(&v));
        }
    }
    out
}

/// Malmquist index and decomposition per the configuration matrix:
/// `fgnz` under CRS gives `mi = tc * ec`; VRS families report
/// `mi = tc * pech * sech`; `bias` splits `tc` into magnitude and bias
/// components; `glob` replaces `tc` with the global-frontier form.
pub fn malmquist_index(
    series: &MalmquistSeries,
    opts: &MalmquistOptions,
) -> Result<MalmquistResult> {
    let vrs = match opts.rts {
        Rts::Crs => false,
        Rts::Vrs => true,
        other => {
            return Err(DeaError::InvalidParameter(format!(
                "malmquist models take rts crs or vrs, got {other}"
            )))
        }
    };
    if matches!(opts.type2, Decomposition::Rd | Decomposition::Gl)
        && !vrs
        && opts.type1 != FrontierScope::Glob
    {
        return Err(DeaError::InvalidParameter(format!(
            "type2 {:?} requires rts vrs",
            opts.type2
        )));
    }
    let n = series.num_dmus();
    let dmu_eval = resolve_dmu_set(opts.dmu_eval.as_deref(), n, "dmu_eval")?;
    let dmu_ref = resolve_dmu_set(opts.dmu_ref.as_deref(), n, "dmu_ref")?;
    let cache = DistanceCache {
        series,
        dmu_eval: &dmu_eval,
        dmu_ref: &dmu_ref,
        orientation: opts.orientation,
        sequential: opts.type1 == FrontierScope::Seq,
    };

    let mut eff_all = EffAll::default();
    // Contemporary-frontier efficiency is always reported.
    eff_all.efficiency.crs = Some(cache.table(false, 0, 0, 0)?);
    if vrs {
        eff_all.efficiency.vrs = Some(cache.table(true, 0, 0, 0)?);
    }

    let glob = opts.type1 == FrontierScope::Glob;
    let need_cross = !glob || vrs; // sech2 under glob-vrs needs D^t(z^{t+1})
    if need_cross {
        eff_all.efficiency_t_t1.crs = Some(cache.table(false, 0, 1, 1)?);
        if vrs {
            eff_all.efficiency_t_t1.vrs = Some(cache.table(true, 0, 1, 1)?);
        }
    }
    if !glob {
        eff_all.efficiency_t1_t.crs = Some(cache.table(false, 1, 0, 0)?);
        if vrs && opts.tc_vrs {
            eff_all.efficiency_t1_t.vrs = Some(cache.table(true, 1, 0, 0)?);
        }
    }
    if opts.type2 == Decomposition::Bias && !glob {
        eff_all.efficiency_t_xt1.crs = Some(cache.table(false, 0, 1, 0)?);
        eff_all.efficiency_t1_xt1.crs = Some(cache.table(false, 1, 1, 0)?);
        if vrs && opts.tc_vrs {
            eff_all.efficiency_t_xt1.vrs = Some(cache.table(true, 0, 1, 0)?);
            eff_all.efficiency_t1_xt1.vrs = Some(cache.table(true, 1, 1, 0)?);
        }
    }
    if opts.type2 == Decomposition::Gl && !glob {
        eff_all.efficiency_t_xt1.crs = Some(cache.table(false, 0, 1, 0)?);
        eff_all.efficiency_t_xt1.vrs = Some(cache.table(true, 0, 1, 0)?);
    }
    if glob {
        eff_all.efficiency_glob.crs = Some(cache.global_table(false)?);
        if vrs {
            eff_all.efficiency_glob.vrs = Some(cache.global_table(true)?);
        }
    }

    let d_t = eff_all.efficiency.crs.as_ref().unwrap();
    let db_t = eff_all.efficiency.vrs.as_ref();

    // EC / PECH / SECH.
    let ec = combine(&[d_t, d_t], &[1, 0], |v| v[0] / v[1]);
    let (pech, sech) = if vrs {
        let db = db_t.unwrap();
        let pech = combine(&[db, db], &[1, 0], |v| v[0] / v[1]);
        let sech = match (opts.type2, glob) {
            (Decomposition::Fgnz | Decomposition::Bias, false) => {
                // (D^{t+1}(z^{t+1}) D_B^t(z^t)) / (D^t(z^t) D_B^{t+1}(z^{t+1}))
                combine(&[d_t, db, d_t, db], &[1, 0, 0, 1], |v| {
                    v[0] * v[1] / (v[2] * v[3])
                })
            }
            (Decomposition::Rd, false) | (_, true) => {
                // (D^t(z^{t+1}) D_B^t(z^t)) / (D^t(z^t) D_B^t(z^{t+1}))
                let d_tt1 = eff_all.efficiency_t_t1.crs.as_ref().unwrap();
                let db_tt1 = eff_all.efficiency_t_t1.vrs.as_ref().unwrap();
                combine(&[d_tt1, db, d_t, db_tt1], &[0, 0, 0, 0], |v| {
                    v[0] * v[1] / (v[2] * v[3])
                })
            }
            (Decomposition::Gl, false) => {
                // Mixed activity (x^{t+1}, y^t) on both technologies.
                let d_mix = eff_all.efficiency_t_xt1.crs.as_ref().unwrap();
                let db_mix = eff_all.efficiency_t_xt1.vrs.as_ref().unwrap();
                combine(&[d_mix, db, d_t, db_mix], &[0, 0, 0, 0], |v| {
                    v[0] * v[1] / (v[2] * v[3])
                })
            }
        };
        (Some(pech), Some(sech))
    } else {
        (None, None)
    };

    // TC and the bias components.
    let mut matech = None;
    let mut obtech = None;
    let mut ibtech = None;
    let tc: Mat = if glob {
        let dg = if vrs {
            eff_all.efficiency_glob.vrs.as_ref().unwrap()
        } else {
            eff_all.efficiency_glob.crs.as_ref().unwrap()
        };
        let dc = if vrs { db_t.unwrap() } else { d_t };
        // D^t(z^t) D^G(z^{t+1}) / (D^{t+1}(z^{t+1}) D^G(z^t))
        combine(&[dc, dg, dc, dg], &[0, 1, 1, 0], |v| {
            v[0] * v[1] / (v[2] * v[3])
        })
    } else {
        match opts.type2 {
            Decomposition::Fgnz | Decomposition::Bias => {
                let use_vrs_tc = opts.type2 == Decomposition::Bias && vrs && opts.tc_vrs;
                let (d, d_tt1, d_t1t) = if use_vrs_tc {
                    (
                        db_t.unwrap(),
                        eff_all.efficiency_t_t1.vrs.as_ref().unwrap(),
                        eff_all.efficiency_t1_t.vrs.as_ref().unwrap(),
                    )
                } else {
                    (
                        d_t,
                        eff_all.efficiency_t_t1.crs.as_ref().unwrap(),
                        eff_all.efficiency_t1_t.crs.as_ref().unwrap(),
                    )
                };
                if opts.type2 == Decomposition::Bias {
                    let (d_mix_t, d_mix_t1) = if use_vrs_tc {
                        (
                            eff_all.efficiency_t_xt1.vrs.as_ref().unwrap(),
                            eff_all.efficiency_t1_xt1.vrs.as_ref().unwrap(),
                        )
                    } else {
                        (
                            eff_all.efficiency_t_xt1.crs.as_ref().unwrap(),
                            eff_all.efficiency_t1_xt1.crs.as_ref().unwrap(),
                        )
                    };
                    let ma = combine(&[d, d_t1t], &[0, 0], |v| v[0] / v[1]);
                    let ob = combine(&[d_tt1, d_mix_t1, d, d_mix_t], &[0, 0, 1, 0], |v| {
                        (v[0] * v[1] / (v[2] * v[3])).sqrt()
                    });
                    let ib = combine(&[d_t1t, d_mix_t, d, d_mix_t1], &[0, 0, 0, 0], |v| {
                        (v[0] * v[1] / (v[2] * v[3])).sqrt()
                    });
                    let tc = combine(&[&ma, &ob, &ib], &[0, 0, 0], |v| v[0] * v[1] * v[2]);
                    matech = Some(ma);
                    obtech = Some(ob);
                    ibtech = Some(ib);
                    tc
                } else {
                    // sqrt( D^t(z^{t+1}) D^t(z^t) / (D^{t+1}(z^{t+1}) D^{t+1}(z^t)) )
                    combine(&[d_tt1, d, d, d_t1t], &[0, 0, 1, 0], |v| {
                        (v[0] * v[1] / (v[2] * v[3])).sqrt()
                    })
                }
            }
            Decomposition::Rd | Decomposition::Gl => {
                // D_B^t(z^{t+1}) / D_B^{t+1}(z^{t+1})
                let db_tt1 = eff_all.efficiency_t_t1.vrs.as_ref().unwrap();
                let db = db_t.unwrap();
                combine(&[db_tt1, db], &[0, 1], |v| v[0] / v[1])
            }
        }
    };

    // MI per the family identity.
    let mi = if vrs {
        combine(
            &[&tc, pech.as_ref().unwrap(), sech.as_ref().unwrap()],
            &[0, 0, 0],
            |v| v[0] * v[1] * v[2],
        )
    } else {
        combine(&[&tc, &ec], &[0, 0], |v| v[0] * v[1])
    };

    Ok(MalmquistResult {
        orientation: opts.orientation,
        rts: opts.rts,
        type1: opts.type1,
        type2: opts.type2,
        tc_vrs: opts.tc_vrs,
        dmunames: series.periods[0].dmunames.clone(),
        dmu_eval,
        period_labels: series.period_labels.clone(),
        mi,
        ec: Some(ec),
        tc,
        pech,
        sech,
        matech,
        obtech,
        ibtech,
        eff_all,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::DeaData;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    /// Two periods, two DMUs: A improves its output, B improves more.
    fn m2() -> MalmquistSeries {
        let names = vec!["A".to_string(), "B".to_string()];
        let t1 = DeaData::new(
            array![[2.0, 4.0]],
            array![[2.0, 2.0]],
            Some(names.clone()),
            None,
            None,
            Default::default(),
        )
        .unwrap();
        let t2 = DeaData::new(
            array![[2.0, 4.0]],
            array![[2.5, 3.0]],
            Some(names),
            None,
            None,
            Default::default(),
        )
        .unwrap();
        MalmquistSeries::new(vec![t1, t2], None).unwrap()
    }

    #[test]
    fn cross_period_distance() {
        let series = m2();
        let d = distance(
            &series,
            FrontierSel::Period(0),
            &[2.0],
            &[2.5],
            Orientation::Io,
            &Rts::Crs,
            None,
        )
        .unwrap()
        .unwrap();
        assert_abs_diff_eq!(d, 1.25, epsilon = 1e-9);
    }

    #[test]
    fn fgnz_crs_indices() {
        let res = malmquist_index(&m2(), &MalmquistOptions::default()).unwrap();
        assert_abs_diff_eq!(res.mi[0][0].unwrap(), 1.25, epsilon = 1e-9);
        assert_abs_diff_eq!(res.ec.as_ref().unwrap()[0][0].unwrap(), 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(res.tc[0][0].unwrap(), 1.25, epsilon = 1e-9);
        assert_abs_diff_eq!(res.mi[1][0].unwrap(), 1.5, epsilon = 1e-9);
        assert_abs_diff_eq!(res.ec.as_ref().unwrap()[1][0].unwrap(), 1.2, epsilon = 1e-9);
        assert_abs_diff_eq!(res.tc[1][0].unwrap(), 1.25, epsilon = 1e-9);
    }

    #[test]
    fn identical_periods_give_unit_indices() {
        let names = vec!["A".to_string(), "B".to_string()];
        let t = DeaData::new(
            array![[2.0, 4.0]],
            array![[2.0, 3.0]],
            Some(names),
            None,
            None,
            Default::default(),
        )
        .unwrap();
        let series = MalmquistSeries::new(vec![t.clone(), t], None).unwrap();
        for (type1, type2, rts) in [
            (FrontierScope::Cont, Decomposition::Fgnz, Rts::Crs),
            (FrontierScope::Cont, Decomposition::Fgnz, Rts::Vrs),
            (FrontierScope::Cont, Decomposition::Rd, Rts::Vrs),
            (FrontierScope::Cont, Decomposition::Gl, Rts::Vrs),
            (FrontierScope::Cont, Decomposition::Bias, Rts::Crs),
            (FrontierScope::Seq, Decomposition::Fgnz, Rts::Crs),
            (FrontierScope::Glob, Decomposition::Fgnz, Rts::Crs),
            (FrontierScope::Glob, Decomposition::Fgnz, Rts::Vrs),
        ] {
            let res = malmquist_index(
                &series,
                &MalmquistOptions {
                    rts,
                    type1,
                    type2,
                    ..Default::default()
                },
            )
            .unwrap();
            for e in 0..2 {
                assert_abs_diff_eq!(res.mi[e][0].unwrap(), 1.0, epsilon = 1e-9);
                assert_abs_diff_eq!(res.tc[e][0].unwrap(), 1.0, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn bias_product_recovers_fgnz_tc() {
        let res = malmquist_index(
            &m2(),
            &MalmquistOptions {
                type2: Decomposition::Bias,
                ..Default::default()
            },
        )
        .unwrap();
        let fgnz = malmquist_index(&m2(), &MalmquistOptions::default()).unwrap();
        for e in 0..2 {
            let ma = res.matech.as_ref().unwrap()[e][0].unwrap();
            let ob = res.obtech.as_ref().unwrap()[e][0].unwrap();
            let ib = res.ibtech.as_ref().unwrap()[e][0].unwrap();
            assert_abs_diff_eq!(ma * ob * ib, fgnz.tc[e][0].unwrap(), epsilon = 1e-9);
        }
    }

    #[test]
    fn rd_requires_vrs() {
        let err = malmquist_index(
            &m2(),
            &MalmquistOptions {
                type2: Decomposition::Rd,
                ..Default::default()
            },
        );
        assert!(err.is_err());
    }

    #[test]
    fn global_efficiency_never_exceeds_contemporary() {
        let series = m2();
        let res = malmquist_index(
            &series,
            &MalmquistOptions {
                type1: FrontierScope::Glob,
                ..Default::default()
            },
        )
        .unwrap();
        let cont = res.eff_all.efficiency.crs.as_ref().unwrap();
        let glob = res.eff_all.efficiency_glob.crs.as_ref().unwrap();
        for e in 0..2 {
            for t in 0..2 {
                assert!(glob[e][t].unwrap() <= cont[e][t].unwrap() + 1e-9);
            }
        }
    }

    #[test]
    fn sequential_distances_never_exceed_contemporary() {
        let series = m2();
        let cont = malmquist_index(&series, &MalmquistOptions::default()).unwrap();
        let seq = malmquist_index(
            &series,
            &MalmquistOptions {
                type1: FrontierScope::Seq,
                ..Default::default()
            },
        )
        .unwrap();
        let c = cont.eff_all.efficiency.crs.as_ref().unwrap();
        let q = seq.eff_all.efficiency.crs.as_ref().unwrap();
        for e in 0..2 {
            for t in 0..2 {
                assert!(q[e][t].unwrap() <= c[e][t].unwrap() + 1e-9);
            }
        }
    }
}
