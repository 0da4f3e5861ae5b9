//! Alpha-cut machinery for trapezoidal fuzzy data and the worst/best
//! scenario metamodel that runs any crisp model over the cut endpoints.

use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use crate::data::{DeaData, FuzzyDeaData};
use crate::error::{DeaError, Result};
use crate::model::result::{DmuRecord, DmuStatus};
use crate::model::{resolve_dmu_set, run_model, ModelSpec};

/// Interval endpoints of a fuzzy dataset at one membership level.
#[derive(Clone, Debug, PartialEq)]
pub struct AlphaCutData {
    pub alpha: f64,
    pub input_lower: ndarray::Array2<f64>,
    pub input_upper: ndarray::Array2<f64>,
    pub output_lower: ndarray::Array2<f64>,
    pub output_upper: ndarray::Array2<f64>,
}

/// Interval endpoints at level `alpha`: `[mL - (1-alpha) dL, mR + (1-alpha) dR]`.
pub fn alpha_cut(data: &FuzzyDeaData, alpha: f64) -> Result<AlphaCutData> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(DeaError::InvalidParameter(format!(
            "alpha must lie in [0, 1], got {alpha}"
        )));
    }
    let spread = 1.0 - alpha;
    let lower = |fm: &crate::data::FuzzyMatrix| &fm.ml - &(spread * &fm.dl);
    let upper = |fm: &crate::data::FuzzyMatrix| &fm.mr + &(spread * &fm.dr);
    Ok(AlphaCutData {
        alpha,
        input_lower: lower(&data.input),
        input_upper: upper(&data.input),
        output_lower: lower(&data.output),
        output_upper: upper(&data.output),
    })
}

/// Expand an alpha request: explicit cut levels, or a count of equispaced
/// levels on [0, 1] when a single integer greater than one is given.
#[derive(Clone, Debug)]
pub enum AlphaSpec {
    Cuts(Vec<f64>),
    Count(usize),
}

impl AlphaSpec {
    pub fn levels(&self) -> Result<Vec<f64>> {
        match self {
            AlphaSpec::Cuts(cuts) => {
                if cuts.is_empty() {
                    return Err(DeaError::InvalidParameter("no alpha cuts given".into()));
                }
                for &a in cuts {
                    if !(0.0..=1.0).contains(&a) {
                        return Err(DeaError::InvalidParameter(format!(
                            "alpha must lie in [0, 1], got {a}"
                        )));
                    }
                }
                Ok(cuts.clone())
            }
            AlphaSpec::Count(k) => {
                if *k < 2 {
                    return Err(DeaError::InvalidParameter(
                        "an alpha count needs at least two levels".into(),
                    ));
                }
                let step = 1.0 / (*k as f64 - 1.0);
                Ok((0..*k).map(|i| (i as f64 * step).min(1.0)).collect())
            }
        }
    }
}

/// Worst or best scenario data for one rated DMU at one cut.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    Worst,
    Best,
}

/// Results of one scenario at one cut, one record per evaluated DMU.
#[derive(Clone, Debug, Serialize)]
pub struct ScenarioSlice {
    pub records: Vec<DmuRecord>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AlphaCutResult {
    pub alpha: f64,
    pub worst: ScenarioSlice,
    pub best: ScenarioSlice,
}

#[derive(Clone, Debug)]
pub struct FuzzyDeaResult {
    pub modelname: String,
    pub alphas: Vec<f64>,
    pub cuts: Vec<AlphaCutResult>,
    pub dmu_eval: Vec<usize>,
    pub dmu_ref: Vec<usize>,
    pub dmunames: Vec<String>,
}

impl FuzzyDeaResult {
    /// Score interval per (DMU, alpha): min and max of the worst/best
    /// scenario scores, for the efficiency-band plot surface.
    pub fn efficiency_bands(&self) -> Vec<(String, f64, Option<f64>, Option<f64>)> {
        let mut out = Vec::new();
        for cut in &self.cuts {
            for (e, &o) in self.dmu_eval.iter().enumerate() {
                let w = cut.worst.records[e].efficiency;
                let b = cut.best.records[e].efficiency;
                let (lo, hi) = match (w, b) {
                    (Some(w), Some(b)) => (Some(w.min(b)), Some(w.max(b))),
                    (Some(w), None) => (Some(w), Some(w)),
                    (None, Some(b)) => (Some(b), Some(b)),
                    (None, None) => (None, None),
                };
                out.push((self.dmunames[o].clone(), cut.alpha, lo, hi));
            }
        }
        out
    }
}

impl Serialize for FuzzyDeaResult {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(None)?;
        map.serialize_entry("schema_version", &1)?;
        map.serialize_entry("modelname", &self.modelname)?;
        let eval_names: Vec<&str> = self
            .dmu_eval
            .iter()
            .map(|&j| self.dmunames[j].as_str())
            .collect();
        let ref_names: Vec<&str> = self
            .dmu_ref
            .iter()
            .map(|&j| self.dmunames[j].as_str())
            .collect();
        map.serialize_entry("dmu_eval", &eval_names)?;
        map.serialize_entry("dmu_ref", &ref_names)?;
        // alphacut -> alpha value -> {worst, best} -> DMU -> record.
        let mut tree: std::collections::BTreeMap<String, serde_json::Value> = Default::default();
        for cut in &self.cuts {
            let mut scen = serde_json::Map::new();
            for (label, slice) in [("worst", &cut.worst), ("best", &cut.best)] {
                let mut dmus = serde_json::Map::new();
                for rec in &slice.records {
                    dmus.insert(
                        rec.name.clone(),
                        serde_json::to_value(rec).map_err(serde::ser::Error::custom)?,
                    );
                }
                scen.insert(label.to_string(), serde_json::Value::Object(dmus));
            }
            tree.insert(format!("{}", cut.alpha), serde_json::Value::Object(scen));
        }
        map.serialize_entry("alphacut", &tree)?;
        map.end()
    }
}

/// Crisp dataset for one scenario: the rated DMU at its adverse endpoints,
/// everyone else at the favourable ones.
fn scenario_data(
    fuzzy: &FuzzyDeaData,
    cut: &AlphaCutData,
    rated: usize,
    scenario: Scenario,
) -> Result<DeaData> {
    let m = fuzzy.num_inputs();
    let s = fuzzy.num_outputs();
    let n = fuzzy.num_dmus();
    let mut input = ndarray::Array2::zeros((m, n));
    let mut output = ndarray::Array2::zeros((s, n));
    for j in 0..n {
        let own = j == rated;
        let (xin, yout): (&ndarray::Array2<f64>, &ndarray::Array2<f64>) = match scenario {
            Scenario::Worst => {
                if own {
                    (&cut.input_upper, &cut.output_lower)
                } else {
                    (&cut.input_lower, &cut.output_upper)
                }
            }
            Scenario::Best => {
                if own {
                    (&cut.input_lower, &cut.output_upper)
                } else {
                    (&cut.input_upper, &cut.output_lower)
                }
            }
        };
        for i in 0..m {
            input[(i, j)] = xin[(i, j)];
        }
        for r in 0..s {
            output[(r, j)] = yout[(r, j)];
        }
    }
    DeaData::new(
        input,
        output,
        Some(fuzzy.dmunames.clone()),
        Some(fuzzy.input_names.clone()),
        Some(fuzzy.output_names.clone()),
        fuzzy.special.clone(),
    )
}

#[derive(Clone, Debug)]
pub struct KaoLiuOptions {
    pub alpha: AlphaSpec,
    pub dmu_eval: Option<Vec<usize>>,
    pub dmu_ref: Option<Vec<usize>>,
}

impl Default for KaoLiuOptions {
    fn default() -> Self {
        KaoLiuOptions {
            alpha: AlphaSpec::Cuts(vec![1.0]),
            dmu_eval: None,
            dmu_ref: None,
        }
    }
}

/// Worst/best scenario metamodel: for each cut and each evaluated DMU, the
/// crisp submodel runs twice, once with the DMU at its adverse interval
/// endpoints and once at the favourable ones, everyone else mirrored.
/// Scenario-level failures stay local to their record.
pub fn modelfuzzy_kaoliu(
    fuzzy: &FuzzyDeaData,
    submodel: &ModelSpec,
    opts: &KaoLiuOptions,
) -> Result<FuzzyDeaResult> {
    let n = fuzzy.num_dmus();
    let dmu_eval = resolve_dmu_set(opts.dmu_eval.as_deref(), n, "dmu_eval")?;
    let dmu_ref = resolve_dmu_set(opts.dmu_ref.as_deref(), n, "dmu_ref")?;
    let alphas = opts.alpha.levels()?;

    let mut cuts = Vec::with_capacity(alphas.len());
    for &alpha in &alphas {
        let cut = alpha_cut(fuzzy, alpha)?;
        let mut slices = [Vec::new(), Vec::new()];
        for (si, scenario) in [Scenario::Worst, Scenario::Best].into_iter().enumerate() {
            for &o in &dmu_eval {
                let data = scenario_data(fuzzy, &cut, o, scenario)?;
                let spec = submodel.with_dmu_sets(Some(vec![o]), Some(dmu_ref.clone()));
                let rec = match run_model(&data, &spec) {
                    Ok(res) => res.records.into_iter().next().unwrap_or_else(|| {
                        DmuRecord::failed(o, &fuzzy.dmunames[o], DmuStatus::Infeasible)
                    }),
                    Err(DeaError::InvalidData(msg)) => {
                        // Scenario data can violate a submodel precondition
                        // (like positivity); keep the batch going.
                        let mut rec =
                            DmuRecord::failed(o, &fuzzy.dmunames[o], DmuStatus::Infeasible);
                        rec.notes.push(msg);
                        rec
                    }
                    Err(e) => return Err(e),
                };
                slices[si].push(rec);
            }
        }
        let [worst, best] = slices;
        cuts.push(AlphaCutResult {
            alpha,
            worst: ScenarioSlice { records: worst },
            best: ScenarioSlice { records: best },
        });
    }
    Ok(FuzzyDeaResult {
        modelname: format!("fuzzy_kaoliu/{}", submodel.name()),
        alphas,
        cuts,
        dmu_eval,
        dmu_ref,
        dmunames: fuzzy.dmunames.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{FuzzyMatrix, SpecialSets};
    use crate::model::radial::BasicOptions;
    use approx::assert_abs_diff_eq;
    use ndarray::array;
    use proptest::prelude::*;

    /// Two DMUs with symmetric triangular inputs and crisp outputs.
    fn m3() -> FuzzyDeaData {
        FuzzyDeaData::new(
            FuzzyMatrix {
                ml: array![[2.0, 4.0]],
                mr: array![[2.0, 4.0]],
                dl: array![[1.0, 1.0]],
                dr: array![[1.0, 1.0]],
            },
            FuzzyMatrix::crisp(array![[2.0, 2.0]]),
            Some(vec!["A".into(), "B".into()]),
            None,
            None,
            SpecialSets::default(),
        )
        .unwrap()
    }

    #[test]
    fn alpha_cut_endpoints() {
        let data = m3();
        let cut = alpha_cut(&data, 0.0).unwrap();
        assert_abs_diff_eq!(cut.input_lower[(0, 1)], 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(cut.input_upper[(0, 1)], 5.0, epsilon = 1e-12);
        let crisp = alpha_cut(&data, 1.0).unwrap();
        assert_eq!(crisp.input_lower, crisp.input_upper);
    }

    #[test]
    fn alpha_cut_interpolates() {
        let data = FuzzyDeaData::new(
            FuzzyMatrix {
                ml: array![[2.0]],
                mr: array![[3.0]],
                dl: array![[1.0]],
                dr: array![[2.0]],
            },
            FuzzyMatrix::crisp(array![[1.0]]),
            None,
            None,
            None,
            SpecialSets::default(),
        )
        .unwrap();
        let cut = alpha_cut(&data, 0.5).unwrap();
        assert_abs_diff_eq!(cut.input_lower[(0, 0)], 1.5, epsilon = 1e-12);
        assert_abs_diff_eq!(cut.input_upper[(0, 0)], 4.0, epsilon = 1e-12);
    }

    #[test]
    fn count_expands_to_equispaced_levels() {
        let levels = AlphaSpec::Count(5).levels().unwrap();
        let expected = [0.0, 0.25, 0.5, 0.75, 1.0];
        for (a, b) in levels.iter().zip(expected) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn crisp_level_reproduces_crisp_scores() {
        let res = modelfuzzy_kaoliu(
            &m3(),
            &ModelSpec::Basic(BasicOptions::default()),
            &KaoLiuOptions::default(),
        )
        .unwrap();
        let cut = &res.cuts[0];
        assert_abs_diff_eq!(
            cut.worst.records[0].efficiency.unwrap(),
            1.0,
            epsilon = 1e-9
        );
        assert_abs_diff_eq!(
            cut.worst.records[1].efficiency.unwrap(),
            0.5,
            epsilon = 1e-9
        );
        assert_abs_diff_eq!(cut.best.records[1].efficiency.unwrap(), 0.5, epsilon = 1e-9);
    }

    #[test]
    fn worst_and_best_scenarios_at_alpha_zero() {
        let res = modelfuzzy_kaoliu(
            &m3(),
            &ModelSpec::Basic(BasicOptions::default()),
            &KaoLiuOptions {
                alpha: AlphaSpec::Cuts(vec![0.0]),
                ..Default::default()
            },
        )
        .unwrap();
        let cut = &res.cuts[0];
        // Worst for B: B at x=5, A at x=1 -> 0.2. Best: B at 3, A at 3 -> 1.
        assert_abs_diff_eq!(
            cut.worst.records[1].efficiency.unwrap(),
            0.2,
            epsilon = 1e-9
        );
        assert_abs_diff_eq!(cut.best.records[1].efficiency.unwrap(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn all_crisp_data_collapses_scenarios() {
        let crisp = crate::data::DeaData::new(
            array![[2.0, 4.0, 5.0, 8.0]],
            array![[2.0, 2.0, 4.0, 2.0]],
            Some(vec!["A".into(), "B".into(), "C".into(), "D".into()]),
            None,
            None,
            SpecialSets::default(),
        )
        .unwrap();
        let fuzzy = FuzzyDeaData::from_crisp(&crisp);
        let plain = crate::model::radial::model_basic(&crisp, &BasicOptions::default()).unwrap();
        let res = modelfuzzy_kaoliu(
            &fuzzy,
            &ModelSpec::Basic(BasicOptions::default()),
            &KaoLiuOptions {
                alpha: AlphaSpec::Cuts(vec![0.0, 0.5, 1.0]),
                ..Default::default()
            },
        )
        .unwrap();
        for cut in &res.cuts {
            for (e, rec) in plain.records.iter().enumerate() {
                let want = rec.efficiency.unwrap();
                assert_abs_diff_eq!(
                    cut.worst.records[e].efficiency.unwrap(),
                    want,
                    epsilon = 1e-9
                );
                assert_abs_diff_eq!(
                    cut.best.records[e].efficiency.unwrap(),
                    want,
                    epsilon = 1e-9
                );
            }
        }
    }

    proptest! {
        // Nesting in alpha: worst scores rise, best scores fall (io).
        #[test]
        fn nesting_property(a in 0.0f64..1.0, b in 0.0f64..1.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let res = modelfuzzy_kaoliu(
                &m3(),
                &ModelSpec::Basic(BasicOptions::default()),
                &KaoLiuOptions {
                    alpha: AlphaSpec::Cuts(vec![lo, hi]),
                    ..Default::default()
                },
            )
            .unwrap();
            for e in 0..2 {
                let w_lo = res.cuts[0].worst.records[e].efficiency.unwrap();
                let w_hi = res.cuts[1].worst.records[e].efficiency.unwrap();
                let b_lo = res.cuts[0].best.records[e].efficiency.unwrap();
                let b_hi = res.cuts[1].best.records[e].efficiency.unwrap();
                prop_assert!(w_lo <= w_hi + 1e-9);
                prop_assert!(b_lo >= b_hi - 1e-9);
                prop_assert!(w_lo <= b_lo + 1e-9);
                prop_assert!(w_hi <= b_hi + 1e-9);
            }
        }
    }
}
