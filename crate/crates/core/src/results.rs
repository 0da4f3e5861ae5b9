//! Extraction, summaries, serialization and the reference graph.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{DeaError, Result};
use crate::model::result::{DeaResult, DmuRecord, EffClass};
use crate::model::LAMBDA_TOL;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ResultFacet {
    Efficiencies,
    Lambdas,
    Slacks,
    Targets,
    Multipliers,
}

impl ResultFacet {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "efficiencies" => Ok(ResultFacet::Efficiencies),
            "lambdas" => Ok(ResultFacet::Lambdas),
            "slacks" => Ok(ResultFacet::Slacks),
            "targets" => Ok(ResultFacet::Targets),
            "multipliers" => Ok(ResultFacet::Multipliers),
            other => Err(DeaError::InvalidParameter(format!(
                "unknown facet '{other}'"
            ))),
        }
    }

    pub fn all() -> [ResultFacet; 5] {
        [
            ResultFacet::Efficiencies,
            ResultFacet::Lambdas,
            ResultFacet::Slacks,
            ResultFacet::Targets,
            ResultFacet::Multipliers,
        ]
    }
}

/// A labeled matrix view over per-DMU result fields. Values are `None` where
/// the producing record is NA.
#[derive(Clone, Debug, Serialize)]
pub struct View {
    pub name: String,
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    pub values: Vec<Vec<Option<f64>>>,
}

fn records_view(
    records: &[DmuRecord],
    name: &str,
    col_labels: Vec<String>,
    get: impl Fn(&DmuRecord) -> Option<&Vec<f64>>,
) -> View {
    let values = records
        .iter()
        .map(|r| match get(r) {
            Some(v) => v.iter().map(|&x| Some(x)).collect(),
            None => vec![None; col_labels.len()],
        })
        .collect();
    View {
        name: name.to_string(),
        row_labels: records.iter().map(|r| r.name.clone()).collect(),
        col_labels,
        values,
    }
}

fn field_view(
    result: &DeaResult,
    name: &str,
    col_labels: Vec<String>,
    get: impl Fn(&DmuRecord) -> Option<&Vec<f64>>,
) -> View {
    records_view(&result.records, name, col_labels, get)
}

/// Extract one facet of one (alpha, scenario) slice of a fuzzy result.
/// Column labels on lambdas and slack/target views fall back to positional
/// names since the fuzzy result does not carry the data snapshot.
pub fn extract_fuzzy(
    result: &crate::fuzzy::FuzzyDeaResult,
    alpha: f64,
    scenario: crate::fuzzy::Scenario,
    facet: ResultFacet,
) -> Result<Vec<View>> {
    let cut = result
        .cuts
        .iter()
        .find(|c| (c.alpha - alpha).abs() <= 1e-12)
        .ok_or_else(|| {
            DeaError::InvalidParameter(format!("no alpha cut at {alpha} in this result"))
        })?;
    let records = match scenario {
        crate::fuzzy::Scenario::Worst => &cut.worst.records,
        crate::fuzzy::Scenario::Best => &cut.best.records,
    };
    let ref_labels: Vec<String> = result
        .dmu_ref
        .iter()
        .map(|&j| result.dmunames[j].clone())
        .collect();
    let len_of = |get: &dyn Fn(&DmuRecord) -> Option<usize>| {
        records.iter().find_map(get).unwrap_or(0)
    };
    let positional = |prefix: &str, len: usize| -> Vec<String> {
        (1..=len).map(|i| format!("{prefix}{i}")).collect()
    };
    let views = match facet {
        ResultFacet::Efficiencies => vec![View {
            name: "efficiencies".into(),
            row_labels: records.iter().map(|r| r.name.clone()).collect(),
            col_labels: vec!["efficiency".into()],
            values: records.iter().map(|r| vec![r.efficiency]).collect(),
        }],
        ResultFacet::Lambdas => vec![records_view(records, "lambdas", ref_labels, |r| {
            r.lambda.as_ref()
        })],
        ResultFacet::Slacks => {
            let m = len_of(&|r: &DmuRecord| r.slack_input.as_ref().map(Vec::len));
            let s = len_of(&|r: &DmuRecord| r.slack_output.as_ref().map(Vec::len));
            vec![
                records_view(records, "slack_input", positional("Input", m), |r| {
                    r.slack_input.as_ref()
                }),
                records_view(records, "slack_output", positional("Output", s), |r| {
                    r.slack_output.as_ref()
                }),
            ]
        }
        ResultFacet::Targets => {
            let m = len_of(&|r: &DmuRecord| r.target_input.as_ref().map(Vec::len));
            let s = len_of(&|r: &DmuRecord| r.target_output.as_ref().map(Vec::len));
            vec![
                records_view(records, "target_input", positional("Input", m), |r| {
                    r.target_input.as_ref()
                }),
                records_view(records, "target_output", positional("Output", s), |r| {
                    r.target_output.as_ref()
                }),
            ]
        }
        ResultFacet::Multipliers => {
            let m = len_of(&|r: &DmuRecord| r.multiplier_input.as_ref().map(Vec::len));
            let s = len_of(&|r: &DmuRecord| r.multiplier_output.as_ref().map(Vec::len));
            if m + s == 0 {
                return Err(DeaError::FacetUnavailable {
                    facet: "multipliers".into(),
                    model: result.modelname.clone(),
                });
            }
            vec![
                records_view(records, "multiplier_input", positional("Input", m), |r| {
                    r.multiplier_input.as_ref()
                }),
                records_view(records, "multiplier_output", positional("Output", s), |r| {
                    r.multiplier_output.as_ref()
                }),
            ]
        }
    };
    Ok(views)
}

/// Extract one facet of a result as labeled views (slacks and targets come
/// as an input-side and an output-side view).
pub fn extract(result: &DeaResult, facet: ResultFacet) -> Result<Vec<View>> {
    let data = &result.data;
    let ref_labels: Vec<String> = result
        .dmu_ref
        .iter()
        .map(|&j| data.dmunames[j].clone())
        .collect();
    let available = |present: bool, what: &str| -> Result<()> {
        if present {
            Ok(())
        } else {
            Err(DeaError::FacetUnavailable {
                facet: what.into(),
                model: result.modelname.clone(),
            })
        }
    };
    match facet {
        ResultFacet::Efficiencies => {
            let mut views = vec![View {
                name: "efficiencies".into(),
                row_labels: result.records.iter().map(|r| r.name.clone()).collect(),
                col_labels: vec!["efficiency".into()],
                values: result.records.iter().map(|r| vec![r.efficiency]).collect(),
            }];
            if result.records.iter().any(|r| r.eff_components.is_some()) {
                let side = if result.orientation == crate::model::Orientation::Oo {
                    data.output_names.clone()
                } else {
                    data.input_names.clone()
                };
                views.push(field_view(result, "efficiency_components", side, |r| {
                    r.eff_components.as_ref()
                }));
            }
            Ok(views)
        }
        ResultFacet::Lambdas => {
            available(result.records.iter().any(|r| r.lambda.is_some()), "lambdas")?;
            Ok(vec![field_view(result, "lambdas", ref_labels, |r| {
                r.lambda.as_ref()
            })])
        }
        ResultFacet::Slacks => {
            available(
                result.records.iter().any(|r| r.slack_input.is_some()),
                "slacks",
            )?;
            Ok(vec![
                field_view(result, "slack_input", data.input_names.clone(), |r| {
                    r.slack_input.as_ref()
                }),
                field_view(result, "slack_output", data.output_names.clone(), |r| {
                    r.slack_output.as_ref()
                }),
            ])
        }
        ResultFacet::Targets => {
            available(
                result.records.iter().any(|r| r.target_input.is_some()),
                "targets",
            )?;
            Ok(vec![
                field_view(result, "target_input", data.input_names.clone(), |r| {
                    r.target_input.as_ref()
                }),
                field_view(result, "target_output", data.output_names.clone(), |r| {
                    r.target_output.as_ref()
                }),
            ])
        }
        ResultFacet::Multipliers => {
            available(
                result.records.iter().any(|r| r.multiplier_input.is_some()),
                "multipliers",
            )?;
            let mut views = vec![
                field_view(result, "multiplier_input", data.input_names.clone(), |r| {
                    r.multiplier_input.as_ref()
                }),
                field_view(
                    result,
                    "multiplier_output",
                    data.output_names.clone(),
                    |r| r.multiplier_output.as_ref(),
                ),
            ];
            if result.records.iter().any(|r| r.multiplier_rts.is_some()) {
                views.push(View {
                    name: "multiplier_rts".into(),
                    row_labels: result.records.iter().map(|r| r.name.clone()).collect(),
                    col_labels: vec!["xi_L".into(), "xi_U".into()],
                    values: result
                        .records
                        .iter()
                        .map(|r| match r.multiplier_rts {
                            Some(xi) => vec![Some(xi[0]), Some(xi[1])],
                            None => vec![None, None],
                        })
                        .collect(),
                });
            }
            Ok(views)
        }
    }
}

/// Reference set of every non-efficient DMU: the referenced DMUs and their
/// intensity weights.
pub fn references(result: &DeaResult) -> Vec<(String, Vec<(String, f64)>)> {
    let mut out = Vec::new();
    for rec in &result.records {
        if result.classify(rec) == EffClass::Efficient {
            continue;
        }
        let Some(lambda) = &rec.lambda else {
            continue;
        };
        let refs: Vec<(String, f64)> = result
            .dmu_ref
            .iter()
            .zip(lambda)
            .filter(|(_, &v)| v > LAMBDA_TOL)
            .map(|(&j, &v)| (result.data.dmunames[j].clone(), v))
            .collect();
        if !refs.is_empty() {
            out.push((rec.name.clone(), refs));
        }
    }
    out
}

/// Indices of the efficient evaluated DMUs; weakly efficient ones are
/// included on request.
pub fn eff_dmus(result: &DeaResult, weakly: bool) -> Vec<usize> {
    result
        .records
        .iter()
        .filter(|r| {
            let class = result.classify(r);
            class == EffClass::Efficient || (weakly && class == EffClass::WeaklyEfficient)
        })
        .map(|r| r.dmu)
        .collect()
}

/// Reference graph in DOT form: efficient DMUs sized by how often they are
/// referenced, inefficient DMUs pointing at their reference sets.
pub fn reference_graph_dot(result: &DeaResult) -> Result<String> {
    if !matches!(result.modelname.as_str(), "basic" | "fdh" | "rdm") {
        return Err(DeaError::FacetUnavailable {
            facet: "reference graph".into(),
            model: result.modelname.clone(),
        });
    }
    let refs = references(result);
    let mut relevance: std::collections::BTreeMap<&str, usize> = Default::default();
    for (_, targets) in &refs {
        for (name, _) in targets {
            *relevance.entry(name.as_str()).or_default() += 1;
        }
    }
    let mut dot = String::from("digraph references {\n  rankdir=LR;\n");
    for rec in &result.records {
        let class = result.classify(rec);
        let (color, shape) = match class {
            EffClass::Efficient => ("green3", "circle"),
            EffClass::WeaklyEfficient => ("yellow3", "circle"),
            EffClass::Inefficient => ("red3", "circle"),
            EffClass::Unknown => ("gray", "box"),
        };
        let rel = relevance.get(rec.name.as_str()).copied().unwrap_or(0);
        let _ = writeln!(
            dot,
            "  \"{}\" [color={color}, shape={shape}, relevance={rel}];",
            rec.name
        );
    }
    for (from, targets) in &refs {
        for (to, lambda) in targets {
            let _ = writeln!(dot, "  \"{from}\" -> \"{to}\" [label=\"{lambda:.6}\"];");
        }
    }
    dot.push_str("}\n");
    Ok(dot)
}

/// Default export stem: `ResultsDEA` plus a timestamp, like
/// `ResultsDEA20240131_12.30.05`.
pub fn default_export_stem() -> String {
    let now = chrono::Local::now();
    format!("ResultsDEA{}", now.format("%Y%m%d_%H.%M.%S"))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExportFormat {
    Json,
    Csv,
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| DeaError::Io {
        path: path.display().to_string(),
        source: e,
    })
}

fn fmt_opt(v: &Option<f64>) -> String {
    match v {
        Some(x) => format!("{x}"),
        None => "NA".into(),
    }
}

fn view_to_csv(view: &View) -> String {
    let mut out = String::from("dmu");
    for c in &view.col_labels {
        let _ = write!(out, ",{c}");
    }
    out.push('\n');
    for (row, label) in view.values.iter().zip(&view.row_labels) {
        out.push_str(label);
        for v in row {
            let _ = write!(out, ",{}", fmt_opt(v));
        }
        out.push('\n');
    }
    out
}

/// Export a result as JSON or CSV. Merged output writes one file; split
/// output writes one file per facet. Returns the paths written.
pub fn summary_export(
    result: &DeaResult,
    format: ExportFormat,
    path: Option<&Path>,
    split: bool,
) -> Result<Vec<PathBuf>> {
    let stem: PathBuf = match path {
        Some(p) => p.to_path_buf(),
        None => PathBuf::from(default_export_stem()),
    };
    let ext = match format {
        ExportFormat::Json => "json",
        ExportFormat::Csv => "csv",
    };
    let mut written = Vec::new();
    match (format, split) {
        (ExportFormat::Json, _) => {
            let path = stem.with_extension(ext);
            write_file(&path, &serde_json::to_string_pretty(result)?)?;
            written.push(path);
        }
        (ExportFormat::Csv, false) => {
            // One wide table over every available facet.
            let mut views = Vec::new();
            for facet in ResultFacet::all() {
                if let Ok(mut vs) = extract(result, facet) {
                    views.append(&mut vs);
                }
            }
            let mut out = String::from("dmu");
            for view in &views {
                for c in &view.col_labels {
                    let _ = write!(out, ",{}.{}", view.name, c);
                }
            }
            out.push('\n');
            for (e, rec) in result.records.iter().enumerate() {
                out.push_str(&rec.name);
                for view in &views {
                    for v in &view.values[e] {
                        let _ = write!(out, ",{}", fmt_opt(v));
                    }
                }
                out.push('\n');
            }
            let path = stem.with_extension(ext);
            write_file(&path, &out)?;
            written.push(path);
        }
        (ExportFormat::Csv, true) => {
            for facet in ResultFacet::all() {
                let Ok(views) = extract(result, facet) else {
                    continue;
                };
                for view in views {
                    let mut name = stem.clone();
                    let file = format!(
                        "{}_{}.{ext}",
                        stem.file_name().unwrap_or_default().to_string_lossy(),
                        view.name
                    );
                    name.set_file_name(file);
                    write_file(&name, &view_to_csv(&view))?;
                    written.push(name);
                }
            }
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::DeaData;
    use crate::model::radial::{model_basic, BasicOptions};
    use crate::model::Rts;
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
    fn extract_efficiencies_and_shapes() {
        let res = model_basic(&m1(), &BasicOptions::default()).unwrap();
        let views = extract(&res, ResultFacet::Efficiencies).unwrap();
        let expected = [1.0, 0.5, 0.8, 0.25];
        for (row, e) in views[0].values.iter().zip(expected) {
            assert_eq!(row[0].unwrap(), e);
        }
        let lambdas = extract(&res, ResultFacet::Lambdas).unwrap();
        assert_eq!(lambdas[0].col_labels.len(), 4);
        assert!(extract(&res, ResultFacet::Multipliers).is_err());
    }

    #[test]
    fn references_of_m1() {
        let res = model_basic(&m1(), &BasicOptions::default()).unwrap();
        let refs = references(&res);
        // A is efficient, so three inefficient DMUs remain.
        assert_eq!(refs.len(), 3);
        let b = refs.iter().find(|(n, _)| n == "B").unwrap();
        assert_eq!(b.1.len(), 1);
        assert_eq!(b.1[0].0, "A");
        assert!((b.1[0].1 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn eff_dmus_by_rts() {
        let crs = model_basic(&m1(), &BasicOptions::default()).unwrap();
        assert_eq!(eff_dmus(&crs, false), vec![0]);
        let vrs = model_basic(
            &m1(),
            &BasicOptions {
                rts: Rts::Vrs,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(eff_dmus(&vrs, false), vec![0, 2]);
    }

    #[test]
    fn dot_graph_is_stable() {
        let res = model_basic(&m1(), &BasicOptions::default()).unwrap();
        let a = reference_graph_dot(&res).unwrap();
        let b = reference_graph_dot(&res).unwrap();
        assert_eq!(a, b);
        assert!(a.contains("\"A\" [color=green3"));
        assert!(a.contains("relevance=3"));
        assert!(a.contains("\"B\" -> \"A\""));
    }

    #[test]
    fn all_efficient_data_yields_edgeless_graph() {
        let data = DeaData::new(
            array![[1.0, 2.0]],
            array![[1.0, 2.0]],
            Some(vec!["A".into(), "B".into()]),
            None,
            None,
            Default::default(),
        )
        .unwrap();
        let res = model_basic(&data, &BasicOptions::default()).unwrap();
        let dot = reference_graph_dot(&res).unwrap();
        assert!(!dot.contains("->"));
        assert!(references(&res).is_empty());
    }

    #[test]
    fn json_round_trips_numeric_fields() {
        let res = model_basic(&m1(), &BasicOptions::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let stem = dir.path().join("out");
        let paths = summary_export(&res, ExportFormat::Json, Some(&stem), false).unwrap();
        let text = std::fs::read_to_string(&paths[0]).unwrap();
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        for rec in &res.records {
            let eff = value["dmus"][&rec.name]["efficiency"].as_f64().unwrap();
            assert_eq!(eff.to_bits(), rec.efficiency.unwrap().to_bits());
            let lam = value["dmus"][&rec.name]["lambda"]["A"].as_f64().unwrap();
            assert_eq!(lam.to_bits(), rec.lambda.as_ref().unwrap()[0].to_bits());
        }
    }

    #[test]
    fn split_csv_writes_one_file_per_view() {
        let res = model_basic(&m1(), &BasicOptions::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let stem = dir.path().join("meta");
        let paths = summary_export(&res, ExportFormat::Csv, Some(&stem), true).unwrap();
        // efficiencies, lambdas, slack x2, target x2.
        assert_eq!(paths.len(), 6);
        for p in paths {
            assert!(p.exists());
        }
    }

    #[test]
    fn fuzzy_extraction_needs_alpha_and_scenario() {
        use crate::fuzzy::{modelfuzzy_kaoliu, AlphaSpec, KaoLiuOptions, Scenario};
        use crate::model::ModelSpec;
        let fuzzy = crate::data::FuzzyDeaData::from_crisp(&m1());
        let res = modelfuzzy_kaoliu(
            &fuzzy,
            &ModelSpec::Basic(BasicOptions::default()),
            &KaoLiuOptions {
                alpha: AlphaSpec::Cuts(vec![0.0, 1.0]),
                ..Default::default()
            },
        )
        .unwrap();
        let views = extract_fuzzy(&res, 1.0, Scenario::Worst, ResultFacet::Efficiencies).unwrap();
        assert_eq!(views[0].values[1][0].unwrap(), 0.5);
        // Addressing a missing cut is an error.
        assert!(extract_fuzzy(&res, 0.25, Scenario::Best, ResultFacet::Efficiencies).is_err());
        // Crisp submodels carry no multipliers.
        assert!(extract_fuzzy(&res, 1.0, Scenario::Best, ResultFacet::Multipliers).is_err());
    }

    #[test]
    fn default_stem_has_timestamp_shape() {
        let stem = default_export_stem();
        assert!(stem.starts_with("ResultsDEA"));
        assert_eq!(stem.len(), "ResultsDEA".len() + 17);
    }
}
