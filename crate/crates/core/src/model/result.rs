//! Result container shared by all model families.

use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use crate::data::{AppliedTranslation, DeaData};
use crate::model::{Orientation, Rts, EFF_TOL};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DmuStatus {
    Optimal,
    Infeasible,
    Unbounded,
    EmptyReference,
}

/// Results for one evaluated DMU. Fields a model does not produce stay
/// `None`; a non-`Optimal` status leaves everything but `status` empty.
#[derive(Clone, Debug, Serialize)]
pub struct DmuRecord {
    /// Index of the DMU in the data snapshot.
    pub dmu: usize,
    pub name: String,
    pub status: DmuStatus,
    /// The model's score (optimal objective value, or the derived score for
    /// models that report one).
    pub efficiency: Option<f64>,
    /// Raw optimal objective when it differs from the reported score.
    pub objective: Option<f64>,
    /// Per-variable factors of non-radial models.
    pub eff_components: Option<Vec<f64>>,
    /// Intensity weights, parallel to `dmu_ref`.
    pub lambda: Option<Vec<f64>>,
    pub slack_input: Option<Vec<f64>>,
    pub slack_output: Option<Vec<f64>>,
    pub target_input: Option<Vec<f64>>,
    pub target_output: Option<Vec<f64>>,
    pub multiplier_input: Option<Vec<f64>>,
    pub multiplier_output: Option<Vec<f64>>,
    /// Returns-to-scale multipliers `[xi_L, xi_U]` where applicable.
    pub multiplier_rts: Option<[f64; 2]>,
    pub notes: Vec<String>,
}

impl DmuRecord {
    pub fn new(dmu: usize, name: &str) -> Self {
        DmuRecord {
            dmu,
            name: name.to_string(),
            status: DmuStatus::Optimal,
            efficiency: None,
            objective: None,
            eff_components: None,
            lambda: None,
            slack_input: None,
            slack_output: None,
            target_input: None,
            target_output: None,
            multiplier_input: None,
            multiplier_output: None,
            multiplier_rts: None,
            notes: Vec::new(),
        }
    }

    pub fn failed(dmu: usize, name: &str, status: DmuStatus) -> Self {
        let mut r = Self::new(dmu, name);
        r.status = status;
        r
    }

    pub fn is_na(&self) -> bool {
        self.status != DmuStatus::Optimal || self.efficiency.is_none()
    }

    /// Largest slack reported on either side; zero when no slacks present.
    pub fn max_slack(&self) -> f64 {
        let side = |v: &Option<Vec<f64>>| {
            v.as_ref()
                .map(|s| s.iter().fold(0.0f64, |a, &b| a.max(b.abs())))
                .unwrap_or(0.0)
        };
        side(&self.slack_input).max(side(&self.slack_output))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EffClass {
    Efficient,
    WeaklyEfficient,
    Inefficient,
    Unknown,
}

/// Parameters echoed into the result so a run can be replicated.
#[derive(Clone, Debug, Default, Serialize)]
pub struct ModelExtras {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub translation: Option<AppliedTranslation>,
    /// Per-DMU input directions of directional models (m x neval, flattened
    /// per evaluated DMU).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dir_input: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dir_output: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct DeaResult {
    pub modelname: String,
    pub orientation: Orientation,
    pub rts: Rts,
    pub maxslack: bool,
    /// Evaluated DMU indices, parallel to `records`.
    pub dmu_eval: Vec<usize>,
    /// Reference-set DMU indices; lambda vectors are parallel to this.
    pub dmu_ref: Vec<usize>,
    pub records: Vec<DmuRecord>,
    pub data: DeaData,
    pub extras: ModelExtras,
    pub notes: Vec<String>,
}

impl DeaResult {
    pub fn efficiencies(&self) -> Vec<Option<f64>> {
        self.records.iter().map(|r| r.efficiency).collect()
    }

    /// Efficiency classification of one record. The ideal score is 1 for
    /// radial and SBM-style scores and 0 for slack sums and directional
    /// betas; weakly efficient means ideal score with positive slacks.
    /// Super-efficiency scores rank efficient DMUs rather than classify
    /// them, so those models come back `Unknown`.
    pub fn classify(&self, rec: &DmuRecord) -> EffClass {
        let Some(score) = rec.efficiency else {
            return EffClass::Unknown;
        };
        if matches!(
            self.modelname.as_str(),
            "supereff" | "sbmsupereff" | "addsupereff"
        ) {
            return EffClass::Unknown;
        }
        let ideal = match self.modelname.as_str() {
            "additive" | "addmin" => 0.0,
            _ => match self.orientation {
                Orientation::Dir => 0.0,
                _ => 1.0,
            },
        };
        let at_ideal = (score - ideal).abs() <= EFF_TOL;
        if !at_ideal {
            return EffClass::Inefficient;
        }
        if rec.max_slack() <= EFF_TOL {
            EffClass::Efficient
        } else {
            EffClass::WeaklyEfficient
        }
    }
}

impl Serialize for DeaResult {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(None)?;
        map.serialize_entry("schema_version", &1)?;
        map.serialize_entry("modelname", &self.modelname)?;
        map.serialize_entry("orientation", &self.orientation)?;
        map.serialize_entry("rts", &self.rts)?;
        map.serialize_entry("maxslack", &self.maxslack)?;
        let eval_names: Vec<&str> = self
            .dmu_eval
            .iter()
            .map(|&j| self.data.dmunames[j].as_str())
            .collect();
        let ref_names: Vec<&str> = self
            .dmu_ref
            .iter()
            .map(|&j| self.data.dmunames[j].as_str())
            .collect();
        map.serialize_entry("dmu_eval", &eval_names)?;
        map.serialize_entry("dmu_ref", &ref_names)?;
        let dmus: std::collections::BTreeMap<&str, DmuRecordView> = self
            .records
            .iter()
            .map(|r| (r.name.as_str(), DmuRecordView { rec: r, res: self }))
            .collect();
        map.serialize_entry("dmus", &dmus)?;
        map.serialize_entry("data", &DataView(&self.data))?;
        map.serialize_entry("extras", &self.extras)?;
        map.serialize_entry("notes", &self.notes)?;
        map.end()
    }
}

struct DmuRecordView<'a> {
    rec: &'a DmuRecord,
    res: &'a DeaResult,
}

impl Serialize for DmuRecordView<'_> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(None)?;
        let r = self.rec;
        map.serialize_entry("status", &r.status)?;
        map.serialize_entry("efficiency", &r.efficiency)?;
        if let Some(v) = &r.objective {
            map.serialize_entry("objective", v)?;
        }
        if let Some(v) = &r.eff_components {
            map.serialize_entry("eff_components", v)?;
        }
        if let Some(lambda) = &r.lambda {
            // Keyed by referenced DMU label so subsets survive re-reading.
            let named: std::collections::BTreeMap<&str, f64> = self
                .res
                .dmu_ref
                .iter()
                .zip(lambda)
                .map(|(&j, &v)| (self.res.data.dmunames[j].as_str(), v))
                .collect();
            map.serialize_entry("lambda", &named)?;
        }
        for (key, v) in [
            ("slack_input", &r.slack_input),
            ("slack_output", &r.slack_output),
            ("target_input", &r.target_input),
            ("target_output", &r.target_output),
            ("multiplier_input", &r.multiplier_input),
            ("multiplier_output", &r.multiplier_output),
        ] {
            if let Some(v) = v {
                map.serialize_entry(key, v)?;
            }
        }
        if let Some(v) = &r.multiplier_rts {
            map.serialize_entry("multiplier_rts", v)?;
        }
        if !r.notes.is_empty() {
            map.serialize_entry("notes", &r.notes)?;
        }
        map.end()
    }
}

/// Serialized form of a data snapshot: matrices as nested row arrays.
pub(crate) struct DataView<'a>(pub &'a DeaData);

impl Serialize for DataView<'_> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let d = self.0;
        let rows = |m: &ndarray::Array2<f64>| -> Vec<Vec<f64>> {
            m.rows().into_iter().map(|r| r.to_vec()).collect()
        };
        let mut map = serializer.serialize_map(None)?;
        map.serialize_entry("dmunames", &d.dmunames)?;
        map.serialize_entry("input_names", &d.input_names)?;
        map.serialize_entry("output_names", &d.output_names)?;
        map.serialize_entry("input", &rows(&d.input))?;
        map.serialize_entry("output", &rows(&d.output))?;
        map.serialize_entry("special", &d.special)?;
        map.serialize_entry("diagnostics", &d.diagnostics)?;
        map.end()
    }
}
