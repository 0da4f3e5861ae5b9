//! Dataset ingestion and the canonical in-memory data model.
//!
//! A dataset holds an `m x n` input matrix and an `s x n` output matrix with
//! DMUs in columns. Variables can be flagged as non-controllable,
//! non-discretionary or undesirable; a variable carries at most one flag.
//! All index sets in this API are 0-based; the CLI converts from the 1-based
//! convention used in its flags.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use ndarray::{Array2, ArrayView1};
use serde::Serialize;

use crate::error::{DeaError, Result};

/// Ratio of magnitudes above which the scale diagnostic is raised.
const MAGNITUDE_RATIO: f64 = 1e5;

/// Data quality notes. Diagnostics never fail construction; models run on
/// nonpositive or badly scaled data and results are for the caller to judge.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Diagnostics {
    /// Some entry is zero or negative.
    pub nonpositive_data: bool,
    /// max|entry| / min|nonzero entry| exceeds 1e5.
    pub magnitude_spread: bool,
}

fn scan_diagnostics<'a>(values: impl Iterator<Item = &'a f64>) -> Diagnostics {
    let mut nonpositive = false;
    let mut max_abs = 0.0f64;
    let mut min_nonzero = f64::INFINITY;
    for &v in values {
        if v <= 0.0 {
            nonpositive = true;
        }
        let a = v.abs();
        if a > 0.0 {
            max_abs = max_abs.max(a);
            min_nonzero = min_nonzero.min(a);
        }
    }
    Diagnostics {
        nonpositive_data: nonpositive,
        magnitude_spread: min_nonzero.is_finite() && max_abs / min_nonzero > MAGNITUDE_RATIO,
    }
}

/// Special-variable index sets, 0-based positions into the input/output rows.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SpecialSets {
    pub nc_inputs: BTreeSet<usize>,
    pub nc_outputs: BTreeSet<usize>,
    pub nd_inputs: BTreeSet<usize>,
    pub nd_outputs: BTreeSet<usize>,
    pub ud_inputs: BTreeSet<usize>,
    pub ud_outputs: BTreeSet<usize>,
}

impl SpecialSets {
    pub fn is_empty(&self) -> bool {
        self.nc_inputs.is_empty()
            && self.nc_outputs.is_empty()
            && self.nd_inputs.is_empty()
            && self.nd_outputs.is_empty()
            && self.ud_inputs.is_empty()
            && self.ud_outputs.is_empty()
    }

    fn validate(&self, m: usize, s: usize) -> Result<()> {
        let check = |set: &BTreeSet<usize>, len: usize, what: &str| -> Result<()> {
            if let Some(&bad) = set.iter().find(|&&i| i >= len) {
                return Err(DeaError::InvalidData(format!(
                    "{what} index {bad} out of range (0..{len})"
                )));
            }
            Ok(())
        };
        check(&self.nc_inputs, m, "nc_inputs")?;
        check(&self.nd_inputs, m, "nd_inputs")?;
        check(&self.ud_inputs, m, "ud_inputs")?;
        check(&self.nc_outputs, s, "nc_outputs")?;
        check(&self.nd_outputs, s, "nd_outputs")?;
        check(&self.ud_outputs, s, "ud_outputs")?;
        // One special role per variable.
        for side in [
            (&self.nc_inputs, &self.nd_inputs, &self.ud_inputs, "input"),
            (
                &self.nc_outputs,
                &self.nd_outputs,
                &self.ud_outputs,
                "output",
            ),
        ] {
            let (nc, nd, ud, what) = side;
            let mut seen: BTreeSet<usize> = BTreeSet::new();
            for &i in nc.iter().chain(nd.iter()).chain(ud.iter()) {
                if !seen.insert(i) {
                    return Err(DeaError::InvalidData(format!(
                        "{what} {i} carries more than one special-variable flag"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// A crisp DEA dataset: inputs and outputs with DMUs in columns.
#[derive(Clone, Debug, PartialEq)]
pub struct DeaData {
    pub input: Array2<f64>,
    pub output: Array2<f64>,
    pub dmunames: Vec<String>,
    pub input_names: Vec<String>,
    pub output_names: Vec<String>,
    pub special: SpecialSets,
    pub diagnostics: Diagnostics,
}

impl DeaData {
    pub fn from_matrices(input: Array2<f64>, output: Array2<f64>) -> Result<Self> {
        Self::new(input, output, None, None, None, SpecialSets::default())
    }

    pub fn new(
        input: Array2<f64>,
        output: Array2<f64>,
        dmunames: Option<Vec<String>>,
        input_names: Option<Vec<String>>,
        output_names: Option<Vec<String>>,
        special: SpecialSets,
    ) -> Result<Self> {
        let (m, n) = input.dim();
        let (s, n2) = output.dim();
        if m == 0 || s == 0 || n == 0 {
            return Err(DeaError::InvalidData(
                "need at least one input, one output and one DMU".into(),
            ));
        }
        if n != n2 {
            return Err(DeaError::InvalidData(format!(
                "input has {n} DMU columns but output has {n2}"
            )));
        }
        let dmunames = match dmunames {
            Some(v) => {
                if v.len() != n {
                    return Err(DeaError::InvalidData(format!(
                        "{} DMU names for {} DMUs",
                        v.len(),
                        n
                    )));
                }
                v
            }
            None => (1..=n).map(|j| format!("DMU{j}")).collect(),
        };
        let mut seen = BTreeSet::new();
        for name in &dmunames {
            if !seen.insert(name.as_str()) {
                return Err(DeaError::InvalidData(format!(
                    "duplicate DMU label '{name}'"
                )));
            }
        }
        let input_names = named_or_default(input_names, m, "Input")?;
        let output_names = named_or_default(output_names, s, "Output")?;
        special.validate(m, s)?;
        if input.iter().chain(output.iter()).any(|v| !v.is_finite()) {
            return Err(DeaError::InvalidData("non-finite data entry".into()));
        }
        let diagnostics = scan_diagnostics(input.iter().chain(output.iter()));
        Ok(DeaData {
            input,
            output,
            dmunames,
            input_names,
            output_names,
            special,
            diagnostics,
        })
    }

    pub fn num_inputs(&self) -> usize {
        self.input.nrows()
    }

    pub fn num_outputs(&self) -> usize {
        self.output.nrows()
    }

    pub fn num_dmus(&self) -> usize {
        self.input.ncols()
    }

    pub fn input_col(&self, j: usize) -> ArrayView1<'_, f64> {
        self.input.column(j)
    }

    pub fn output_col(&self, j: usize) -> ArrayView1<'_, f64> {
        self.output.column(j)
    }

    pub fn dmu_index(&self, name: &str) -> Option<usize> {
        self.dmunames.iter().position(|x| x == name)
    }
}

fn named_or_default(names: Option<Vec<String>>, len: usize, prefix: &str) -> Result<Vec<String>> {
    match names {
        Some(v) => {
            if v.len() != len {
                return Err(DeaError::InvalidData(format!(
                    "{} {} names for {} variables",
                    v.len(),
                    prefix.to_lowercase(),
                    len
                )));
            }
            Ok(v)
        }
        None => Ok((1..=len).map(|i| format!("{prefix}{i}")).collect()),
    }
}

/// The four parameter matrices of a trapezoidal fuzzy matrix. A crisp value
/// has `ml == mr` and `dl == dr == 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct FuzzyMatrix {
    pub ml: Array2<f64>,
    pub mr: Array2<f64>,
    pub dl: Array2<f64>,
    pub dr: Array2<f64>,
}

impl FuzzyMatrix {
    pub fn crisp(values: Array2<f64>) -> Self {
        let zeros = Array2::zeros(values.dim());
        FuzzyMatrix {
            ml: values.clone(),
            mr: values,
            dl: zeros.clone(),
            dr: zeros,
        }
    }

    fn validate(&self, what: &str) -> Result<()> {
        let dim = self.ml.dim();
        if self.mr.dim() != dim || self.dl.dim() != dim || self.dr.dim() != dim {
            return Err(DeaError::InvalidData(format!(
                "{what}: fuzzy parameter matrices differ in shape"
            )));
        }
        for ((i, j), &ml) in self.ml.indexed_iter() {
            let mr = self.mr[(i, j)];
            if ml > mr + 1e-12 {
                return Err(DeaError::InvalidData(format!(
                    "{what}: mL > mR at variable {i}, DMU {j} ({ml} > {mr})"
                )));
            }
            if self.dl[(i, j)] < 0.0 || self.dr[(i, j)] < 0.0 {
                return Err(DeaError::InvalidData(format!(
                    "{what}: negative spread at variable {i}, DMU {j}"
                )));
            }
        }
        Ok(())
    }

    /// True when every entry is crisp.
    pub fn is_crisp(&self) -> bool {
        self.ml == self.mr && self.dl.iter().all(|&v| v == 0.0) && self.dr.iter().all(|&v| v == 0.0)
    }
}

/// A fuzzy DEA dataset with trapezoidal entries.
#[derive(Clone, Debug, PartialEq)]
pub struct FuzzyDeaData {
    pub input: FuzzyMatrix,
    pub output: FuzzyMatrix,
    pub dmunames: Vec<String>,
    pub input_names: Vec<String>,
    pub output_names: Vec<String>,
    pub special: SpecialSets,
    pub diagnostics: Diagnostics,
}

impl FuzzyDeaData {
    pub fn new(
        input: FuzzyMatrix,
        output: FuzzyMatrix,
        dmunames: Option<Vec<String>>,
        input_names: Option<Vec<String>>,
        output_names: Option<Vec<String>>,
        special: SpecialSets,
    ) -> Result<Self> {
        input.validate("inputs")?;
        output.validate("outputs")?;
        let (m, n) = input.ml.dim();
        let (s, n2) = output.ml.dim();
        if m == 0 || s == 0 || n == 0 || n != n2 {
            return Err(DeaError::InvalidData(
                "fuzzy input/output matrices are empty or disagree on DMU count".into(),
            ));
        }
        let dmunames = match dmunames {
            Some(v) if v.len() == n => v,
            Some(v) => {
                return Err(DeaError::InvalidData(format!(
                    "{} DMU names for {} DMUs",
                    v.len(),
                    n
                )))
            }
            None => (1..=n).map(|j| format!("DMU{j}")).collect(),
        };
        let input_names = named_or_default(input_names, m, "Input")?;
        let output_names = named_or_default(output_names, s, "Output")?;
        special.validate(m, s)?;
        // Diagnostics run over the support endpoints.
        let lows: Vec<f64> = input
            .ml
            .iter()
            .zip(input.dl.iter())
            .chain(output.ml.iter().zip(output.dl.iter()))
            .map(|(&mlv, &dlv)| mlv - dlv)
            .collect();
        let highs: Vec<f64> = input
            .mr
            .iter()
            .zip(input.dr.iter())
            .chain(output.mr.iter().zip(output.dr.iter()))
            .map(|(&mrv, &drv)| mrv + drv)
            .collect();
        let diagnostics = scan_diagnostics(lows.iter().chain(highs.iter()));
        Ok(FuzzyDeaData {
            input,
            output,
            dmunames,
            input_names,
            output_names,
            special,
            diagnostics,
        })
    }

    pub fn from_crisp(data: &DeaData) -> Self {
        FuzzyDeaData {
            input: FuzzyMatrix::crisp(data.input.clone()),
            output: FuzzyMatrix::crisp(data.output.clone()),
            dmunames: data.dmunames.clone(),
            input_names: data.input_names.clone(),
            output_names: data.output_names.clone(),
            special: data.special.clone(),
            diagnostics: data.diagnostics,
        }
    }

    pub fn num_inputs(&self) -> usize {
        self.input.ml.nrows()
    }

    pub fn num_outputs(&self) -> usize {
        self.output.ml.nrows()
    }

    pub fn num_dmus(&self) -> usize {
        self.input.ml.ncols()
    }
}

/// A time-ordered panel of crisp datasets over the same DMUs.
#[derive(Clone, Debug, PartialEq)]
pub struct MalmquistSeries {
    pub periods: Vec<DeaData>,
    pub period_labels: Vec<String>,
}

impl MalmquistSeries {
    pub fn new(periods: Vec<DeaData>, period_labels: Option<Vec<String>>) -> Result<Self> {
        if periods.len() < 2 {
            return Err(DeaError::InvalidData(
                "a panel needs at least two periods".into(),
            ));
        }
        let first = &periods[0];
        for (t, p) in periods.iter().enumerate().skip(1) {
            if p.dmunames != first.dmunames {
                return Err(DeaError::InvalidData(format!(
                    "period {t} does not list the same DMUs as period 0"
                )));
            }
            if p.num_inputs() != first.num_inputs() || p.num_outputs() != first.num_outputs() {
                return Err(DeaError::InvalidData(format!(
                    "period {t} disagrees on variable dimensions"
                )));
            }
        }
        let period_labels = match period_labels {
            Some(v) if v.len() == periods.len() => v,
            Some(_) => return Err(DeaError::InvalidData("period label count mismatch".into())),
            None => (1..=periods.len()).map(|t| t.to_string()).collect(),
        };
        Ok(MalmquistSeries {
            periods,
            period_labels,
        })
    }

    pub fn num_periods(&self) -> usize {
        self.periods.len()
    }

    pub fn num_dmus(&self) -> usize {
        self.periods[0].num_dmus()
    }
}

// ---------------------------------------------------------------------------
// Tabular ingestion
// ---------------------------------------------------------------------------

/// A parsed table: a header row and string cells.
#[derive(Clone, Debug)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn from_csv_path(path: &Path) -> Result<Table> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .flexible(false)
            .from_path(path)
            .map_err(|e| DeaError::Io {
                path: path.display().to_string(),
                source: std::io::Error::other(e.to_string()),
            })?;
        Self::from_csv_reader(&mut reader)
    }

    pub fn from_csv_str(text: &str) -> Result<Table> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        Self::from_csv_reader(&mut reader)
    }

    fn from_csv_reader<R: std::io::Read>(reader: &mut csv::Reader<R>) -> Result<Table> {
        let headers = reader.headers()?.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for record in reader.records() {
            let record = record?;
            rows.push(record.iter().map(str::to_string).collect());
        }
        if rows.is_empty() {
            return Err(DeaError::InvalidData("table has no data rows".into()));
        }
        Ok(Table { headers, rows })
    }

    pub fn num_cols(&self) -> usize {
        self.headers.len()
    }

    /// Resolve a column reference to a 0-based column index.
    pub fn col_index(&self, col: &ColRef) -> Result<usize> {
        match col {
            ColRef::Pos(p) => {
                if *p == 0 || *p > self.num_cols() {
                    Err(DeaError::InvalidParameter(format!(
                        "column position {p} out of range 1..={}",
                        self.num_cols()
                    )))
                } else {
                    Ok(p - 1)
                }
            }
            ColRef::Name(name) => self
                .headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| DeaError::InvalidParameter(format!("no column named '{name}'"))),
        }
    }

    fn numeric_column(&self, idx: usize) -> Result<Vec<f64>> {
        self.rows
            .iter()
            .enumerate()
            .map(|(r, row)| {
                row[idx].parse::<f64>().map_err(|_| {
                    DeaError::InvalidData(format!(
                        "non-numeric cell '{}' in column '{}', row {}",
                        row[idx],
                        self.headers[idx],
                        r + 1
                    ))
                })
            })
            .collect()
    }
}

/// Reference to a table column: 1-based position (spreadsheet convention)
/// or header name.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ColRef {
    Pos(usize),
    Name(String),
}

/// Input/output column selection: a count (columns follow the DMU column in
/// order: inputs first, then outputs) or explicit references.
#[derive(Clone, Debug)]
pub enum ColSpec {
    Count(usize),
    Cols(Vec<ColRef>),
}

/// Column layout of a standard table.
#[derive(Clone, Debug)]
pub struct TableLayout {
    /// DMU label column; defaults to the first column.
    pub dmu_col: Option<ColRef>,
    pub inputs: ColSpec,
    pub outputs: ColSpec,
}

fn resolve_count_layout(
    table: &Table,
    dmu_idx: usize,
    taken: &[usize],
    count: usize,
) -> Result<Vec<usize>> {
    let mut out = Vec::with_capacity(count);
    let mut col = 0usize;
    while out.len() < count {
        if col >= table.num_cols() {
            return Err(DeaError::InvalidParameter(format!(
                "table has too few columns for a count of {count}"
            )));
        }
        if col != dmu_idx && !taken.contains(&col) {
            out.push(col);
        }
        col += 1;
    }
    Ok(out)
}

fn resolve_colspec(
    table: &Table,
    spec: &ColSpec,
    dmu_idx: usize,
    taken: &[usize],
) -> Result<Vec<usize>> {
    match spec {
        ColSpec::Count(k) => {
            if *k == 0 {
                return Err(DeaError::InvalidParameter(
                    "column count must be >= 1".into(),
                ));
            }
            resolve_count_layout(table, dmu_idx, taken, *k)
        }
        ColSpec::Cols(refs) => {
            if refs.is_empty() {
                return Err(DeaError::InvalidParameter("empty column selection".into()));
            }
            refs.iter().map(|r| table.col_index(r)).collect()
        }
    }
}

/// Build a crisp dataset from a standard table.
pub fn make_deadata(table: &Table, layout: &TableLayout, special: SpecialSets) -> Result<DeaData> {
    let dmu_idx = table.col_index(layout.dmu_col.as_ref().unwrap_or(&ColRef::Pos(1)))?;
    let input_cols = resolve_colspec(table, &layout.inputs, dmu_idx, &[])?;
    let output_cols = resolve_colspec(table, &layout.outputs, dmu_idx, &input_cols)?;
    for c in &input_cols {
        if output_cols.contains(c) {
            return Err(DeaError::InvalidParameter(format!(
                "column '{}' selected as both input and output",
                table.headers[*c]
            )));
        }
        if *c == dmu_idx {
            return Err(DeaError::InvalidParameter(
                "DMU column selected as a variable".into(),
            ));
        }
    }
    if output_cols.contains(&dmu_idx) {
        return Err(DeaError::InvalidParameter(
            "DMU column selected as a variable".into(),
        ));
    }

    let n = table.rows.len();
    let dmunames: Vec<String> = table.rows.iter().map(|r| r[dmu_idx].clone()).collect();
    let mut input = Array2::zeros((input_cols.len(), n));
    for (i, &c) in input_cols.iter().enumerate() {
        let col = table.numeric_column(c)?;
        for (j, v) in col.into_iter().enumerate() {
            input[(i, j)] = v;
        }
    }
    let mut output = Array2::zeros((output_cols.len(), n));
    for (r, &c) in output_cols.iter().enumerate() {
        let col = table.numeric_column(c)?;
        for (j, v) in col.into_iter().enumerate() {
            output[(r, j)] = v;
        }
    }
    let input_names = input_cols
        .iter()
        .map(|&c| table.headers[c].clone())
        .collect();
    let output_names = output_cols
        .iter()
        .map(|&c| table.headers[c].clone())
        .collect();
    DeaData::new(
        input,
        output,
        Some(dmunames),
        Some(input_names),
        Some(output_names),
        special,
    )
}

/// Column map for one fuzzy variable. Absent `mr` copies `ml`; absent
/// spreads are zero, so plain columns read as crisp values.
#[derive(Clone, Debug)]
pub struct FuzzyVarCols {
    pub ml: ColRef,
    pub mr: Option<ColRef>,
    pub dl: Option<ColRef>,
    pub dr: Option<ColRef>,
}

impl FuzzyVarCols {
    pub fn crisp(ml: ColRef) -> Self {
        FuzzyVarCols {
            ml,
            mr: None,
            dl: None,
            dr: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct FuzzyTableLayout {
    pub dmu_col: Option<ColRef>,
    pub inputs: Vec<FuzzyVarCols>,
    pub outputs: Vec<FuzzyVarCols>,
}

fn fuzzy_side(
    table: &Table,
    vars: &[FuzzyVarCols],
    n: usize,
) -> Result<(FuzzyMatrix, Vec<String>)> {
    let k = vars.len();
    if k == 0 {
        return Err(DeaError::InvalidParameter(
            "fuzzy layout needs at least one variable per side".into(),
        ));
    }
    let mut ml = Array2::zeros((k, n));
    let mut mr = Array2::zeros((k, n));
    let mut dl = Array2::zeros((k, n));
    let mut dr = Array2::zeros((k, n));
    let mut names = Vec::with_capacity(k);
    for (i, var) in vars.iter().enumerate() {
        let ml_idx = table.col_index(&var.ml)?;
        names.push(table.headers[ml_idx].clone());
        let ml_col = table.numeric_column(ml_idx)?;
        let mr_col = match &var.mr {
            Some(c) => table.numeric_column(table.col_index(c)?)?,
            None => ml_col.clone(),
        };
        let dl_col = match &var.dl {
            Some(c) => table.numeric_column(table.col_index(c)?)?,
            None => vec![0.0; n],
        };
        let dr_col = match &var.dr {
            Some(c) => table.numeric_column(table.col_index(c)?)?,
            None => vec![0.0; n],
        };
        for j in 0..n {
            ml[(i, j)] = ml_col[j];
            mr[(i, j)] = mr_col[j];
            dl[(i, j)] = dl_col[j];
            dr[(i, j)] = dr_col[j];
        }
    }
    Ok((FuzzyMatrix { ml, mr, dl, dr }, names))
}

/// Build a fuzzy dataset from per-parameter column maps.
pub fn make_deadata_fuzzy(
    table: &Table,
    layout: &FuzzyTableLayout,
    special: SpecialSets,
) -> Result<FuzzyDeaData> {
    let dmu_idx = table.col_index(layout.dmu_col.as_ref().unwrap_or(&ColRef::Pos(1)))?;
    let n = table.rows.len();
    let dmunames: Vec<String> = table.rows.iter().map(|r| r[dmu_idx].clone()).collect();
    let (input, input_names) = fuzzy_side(table, &layout.inputs, n)?;
    let (output, output_names) = fuzzy_side(table, &layout.outputs, n)?;
    FuzzyDeaData::new(
        input,
        output,
        Some(dmunames),
        Some(input_names),
        Some(output_names),
        special,
    )
}

/// Panel layout: wide (one column block per period) or long (a period
/// column and vertically stacked periods).
#[derive(Clone, Debug)]
pub enum MalmquistLayout {
    /// Period blocks sit side by side after the DMU column, each block being
    /// `ni` input columns followed by `no` output columns.
    Wide {
        dmu_col: Option<ColRef>,
        nper: usize,
        ni: usize,
        no: usize,
    },
    /// One row per (DMU, period); the distinct sorted values of the period
    /// column define the period order.
    Long {
        dmu_col: Option<ColRef>,
        period_col: ColRef,
        inputs: ColSpec,
        outputs: ColSpec,
    },
}

/// Build a panel from a wide or long table.
pub fn make_malmquist(table: &Table, layout: &MalmquistLayout) -> Result<MalmquistSeries> {
    match layout {
        MalmquistLayout::Wide {
            dmu_col,
            nper,
            ni,
            no,
        } => {
            if *nper < 2 {
                return Err(DeaError::InvalidParameter(
                    "wide layout needs nper >= 2".into(),
                ));
            }
            let dmu_idx = table.col_index(dmu_col.as_ref().unwrap_or(&ColRef::Pos(1)))?;
            let data_cols: Vec<usize> = (0..table.num_cols()).filter(|&c| c != dmu_idx).collect();
            let per_block = ni + no;
            if data_cols.len() != nper * per_block {
                return Err(DeaError::InvalidData(format!(
                    "wide layout expects {} data columns ({} periods x {} variables), found {}",
                    nper * per_block,
                    nper,
                    per_block,
                    data_cols.len()
                )));
            }
            let dmunames: Vec<String> = table.rows.iter().map(|r| r[dmu_idx].clone()).collect();
            let mut periods = Vec::with_capacity(*nper);
            for p in 0..*nper {
                let block = &data_cols[p * per_block..(p + 1) * per_block];
                let input_refs: Vec<ColRef> =
                    block[..*ni].iter().map(|&c| ColRef::Pos(c + 1)).collect();
                let output_refs: Vec<ColRef> =
                    block[*ni..].iter().map(|&c| ColRef::Pos(c + 1)).collect();
                let mut data = make_deadata(
                    table,
                    &TableLayout {
                        dmu_col: Some(ColRef::Pos(dmu_idx + 1)),
                        inputs: ColSpec::Cols(input_refs),
                        outputs: ColSpec::Cols(output_refs),
                    },
                    SpecialSets::default(),
                )?;
                data.dmunames = dmunames.clone();
                periods.push(data);
            }
            MalmquistSeries::new(periods, None)
        }
        MalmquistLayout::Long {
            dmu_col,
            period_col,
            inputs,
            outputs,
        } => {
            let dmu_idx = table.col_index(dmu_col.as_ref().unwrap_or(&ColRef::Pos(1)))?;
            let per_idx = table.col_index(period_col)?;
            if per_idx == dmu_idx {
                return Err(DeaError::InvalidParameter(
                    "period column equals the DMU column".into(),
                ));
            }
            // Distinct period values, numeric order when they all parse.
            let mut values: Vec<String> = Vec::new();
            for row in &table.rows {
                if !values.contains(&row[per_idx]) {
                    values.push(row[per_idx].clone());
                }
            }
            let all_numeric = values.iter().all(|v| v.parse::<f64>().is_ok());
            if all_numeric {
                values.sort_by(|a, b| {
                    a.parse::<f64>()
                        .unwrap()
                        .partial_cmp(&b.parse::<f64>().unwrap())
                        .unwrap()
                });
            } else {
                values.sort();
            }
            if values.len() < 2 {
                return Err(DeaError::InvalidData(
                    "long layout found fewer than two periods".into(),
                ));
            }

            let input_cols = {
                let taken = vec![per_idx];
                match inputs {
                    ColSpec::Count(k) => resolve_count_layout(table, dmu_idx, &taken, *k)?,
                    ColSpec::Cols(refs) => refs
                        .iter()
                        .map(|r| table.col_index(r))
                        .collect::<Result<Vec<_>>>()?,
                }
            };
            let output_cols = {
                let mut taken = vec![per_idx];
                taken.extend(&input_cols);
                match outputs {
                    ColSpec::Count(k) => resolve_count_layout(table, dmu_idx, &taken, *k)?,
                    ColSpec::Cols(refs) => refs
                        .iter()
                        .map(|r| table.col_index(r))
                        .collect::<Result<Vec<_>>>()?,
                }
            };

            // DMU order fixed by first appearance within the first period.
            let first_period = &values[0];
            let dmu_order: Vec<String> = table
                .rows
                .iter()
                .filter(|r| &r[per_idx] == first_period)
                .map(|r| r[dmu_idx].clone())
                .collect();

            let mut periods = Vec::with_capacity(values.len());
            for period in &values {
                let rows: Vec<&Vec<String>> = table
                    .rows
                    .iter()
                    .filter(|r| &r[per_idx] == period)
                    .collect();
                let mut input = Array2::zeros((input_cols.len(), dmu_order.len()));
                let mut output = Array2::zeros((output_cols.len(), dmu_order.len()));
                for (j, dmu) in dmu_order.iter().enumerate() {
                    let row = rows.iter().find(|r| &r[dmu_idx] == dmu).ok_or_else(|| {
                        DeaError::InvalidData(format!("DMU '{dmu}' missing from period '{period}'"))
                    })?;
                    for (i, &c) in input_cols.iter().enumerate() {
                        input[(i, j)] = row[c].parse().map_err(|_| {
                            DeaError::InvalidData(format!(
                                "non-numeric cell '{}' in column '{}'",
                                row[c], table.headers[c]
                            ))
                        })?;
                    }
                    for (r_i, &c) in output_cols.iter().enumerate() {
                        output[(r_i, j)] = row[c].parse().map_err(|_| {
                            DeaError::InvalidData(format!(
                                "non-numeric cell '{}' in column '{}'",
                                row[c], table.headers[c]
                            ))
                        })?;
                    }
                }
                if rows.len() != dmu_order.len() {
                    return Err(DeaError::InvalidData(format!(
                        "period '{period}' lists {} DMUs, expected {}",
                        rows.len(),
                        dmu_order.len()
                    )));
                }
                periods.push(DeaData::new(
                    input,
                    output,
                    Some(dmu_order.clone()),
                    Some(
                        input_cols
                            .iter()
                            .map(|&c| table.headers[c].clone())
                            .collect(),
                    ),
                    Some(
                        output_cols
                            .iter()
                            .map(|&c| table.headers[c].clone())
                            .collect(),
                    ),
                    SpecialSets::default(),
                )?);
            }
            MalmquistSeries::new(periods, Some(values))
        }
    }
}

// ---------------------------------------------------------------------------
// Undesirable-variable translation
// ---------------------------------------------------------------------------

/// Translation request for the undesirable rows of one side. `PerVariable`
/// entries follow the flagged rows in ascending order; `None` entries fall
/// back to "max + 1".
#[derive(Clone, Debug)]
pub enum Translation {
    MaxPlusOne,
    Scalar(f64),
    PerVariable(Vec<Option<f64>>),
}

/// Translations actually applied, one value per flagged row.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct AppliedTranslation {
    pub vtrans_i: Vec<f64>,
    pub vtrans_o: Vec<f64>,
    /// Some transformed entry came out nonpositive.
    pub nonpositive_result: bool,
}

fn resolve_translations(
    rows: &BTreeSet<usize>,
    spec: Option<&Translation>,
    row_max: impl Fn(usize) -> f64,
    what: &str,
) -> Result<Vec<f64>> {
    if rows.is_empty() {
        if spec.is_some() {
            return Err(DeaError::InvalidParameter(format!(
                "translation given for {what} but no variable is flagged undesirable"
            )));
        }
        return Ok(Vec::new());
    }
    let flagged: Vec<usize> = rows.iter().copied().collect();
    match spec.unwrap_or(&Translation::MaxPlusOne) {
        Translation::MaxPlusOne => Ok(flagged.iter().map(|&i| row_max(i) + 1.0).collect()),
        Translation::Scalar(v) => Ok(vec![*v; flagged.len()]),
        Translation::PerVariable(vs) => {
            if vs.len() != flagged.len() {
                return Err(DeaError::InvalidParameter(format!(
                    "{} translation entries for {} undesirable {what}",
                    vs.len(),
                    flagged.len()
                )));
            }
            Ok(flagged
                .iter()
                .zip(vs)
                .map(|(&i, v)| v.unwrap_or_else(|| row_max(i) + 1.0))
                .collect())
        }
    }
}

/// Replace every undesirable row by `translation - value` and clear the
/// undesirable flags. Absent translations use the row maximum plus one.
pub fn undesirable_transform(
    data: &DeaData,
    vtrans_i: Option<&Translation>,
    vtrans_o: Option<&Translation>,
) -> Result<(DeaData, AppliedTranslation)> {
    let ud_in = data.special.ud_inputs.clone();
    let ud_out = data.special.ud_outputs.clone();
    if ud_in.is_empty() && ud_out.is_empty() && vtrans_i.is_none() && vtrans_o.is_none() {
        return Ok((data.clone(), AppliedTranslation::default()));
    }
    let row_max_in = |i: usize| {
        data.input
            .row(i)
            .iter()
            .fold(f64::NEG_INFINITY, |m, &v| m.max(v))
    };
    let row_max_out = |r: usize| {
        data.output
            .row(r)
            .iter()
            .fold(f64::NEG_INFINITY, |m, &v| m.max(v))
    };
    let vi = resolve_translations(&ud_in, vtrans_i, row_max_in, "inputs")?;
    let vo = resolve_translations(&ud_out, vtrans_o, row_max_out, "outputs")?;

    let mut input = data.input.clone();
    let mut output = data.output.clone();
    let mut nonpositive = false;
    for (&i, &v) in ud_in.iter().zip(&vi) {
        for j in 0..data.num_dmus() {
            input[(i, j)] = -input[(i, j)] + v;
            if input[(i, j)] <= 0.0 {
                nonpositive = true;
            }
        }
    }
    for (&r, &v) in ud_out.iter().zip(&vo) {
        for j in 0..data.num_dmus() {
            output[(r, j)] = -output[(r, j)] + v;
            if output[(r, j)] <= 0.0 {
                nonpositive = true;
            }
        }
    }
    let mut special = data.special.clone();
    special.ud_inputs.clear();
    special.ud_outputs.clear();
    let out = DeaData::new(
        input,
        output,
        Some(data.dmunames.clone()),
        Some(data.input_names.clone()),
        Some(data.output_names.clone()),
        special,
    )?;
    Ok((
        out,
        AppliedTranslation {
            vtrans_i: vi,
            vtrans_o: vo,
            nonpositive_result: nonpositive,
        },
    ))
}

/// Fuzzy counterpart of [`undesirable_transform`]; negation mirrors each
/// trapezoid, so spreads swap sides. Absent translations use the maximum of
/// the support upper endpoint plus one.
pub fn undesirable_transform_fuzzy(
    data: &FuzzyDeaData,
    vtrans_i: Option<&Translation>,
    vtrans_o: Option<&Translation>,
) -> Result<(FuzzyDeaData, AppliedTranslation)> {
    let ud_in = data.special.ud_inputs.clone();
    let ud_out = data.special.ud_outputs.clone();
    if ud_in.is_empty() && ud_out.is_empty() && vtrans_i.is_none() && vtrans_o.is_none() {
        return Ok((data.clone(), AppliedTranslation::default()));
    }
    let support_max = |fm: &FuzzyMatrix, i: usize| {
        fm.mr
            .row(i)
            .iter()
            .zip(fm.dr.row(i).iter())
            .fold(f64::NEG_INFINITY, |m, (&mr, &dr)| m.max(mr + dr))
    };
    let vi = resolve_translations(&ud_in, vtrans_i, |i| support_max(&data.input, i), "inputs")?;
    let vo = resolve_translations(
        &ud_out,
        vtrans_o,
        |r| support_max(&data.output, r),
        "outputs",
    )?;

    let flip = |fm: &mut FuzzyMatrix, i: usize, v: f64, nonpos: &mut bool| {
        let n = fm.ml.ncols();
        for j in 0..n {
            let (ml, mr) = (fm.ml[(i, j)], fm.mr[(i, j)]);
            let (dl, dr) = (fm.dl[(i, j)], fm.dr[(i, j)]);
            fm.ml[(i, j)] = v - mr;
            fm.mr[(i, j)] = v - ml;
            fm.dl[(i, j)] = dr;
            fm.dr[(i, j)] = dl;
            if fm.ml[(i, j)] - fm.dl[(i, j)] <= 0.0 {
                *nonpos = true;
            }
        }
    };
    let mut input = data.input.clone();
    let mut output = data.output.clone();
    let mut nonpositive = false;
    for (&i, &v) in ud_in.iter().zip(&vi) {
        flip(&mut input, i, v, &mut nonpositive);
    }
    for (&r, &v) in ud_out.iter().zip(&vo) {
        flip(&mut output, r, v, &mut nonpositive);
    }
    let mut special = data.special.clone();
    special.ud_inputs.clear();
    special.ud_outputs.clear();
    let out = FuzzyDeaData::new(
        input,
        output,
        Some(data.dmunames.clone()),
        Some(data.input_names.clone()),
        Some(data.output_names.clone()),
        special,
    )?;
    Ok((
        out,
        AppliedTranslation {
            vtrans_i: vi,
            vtrans_o: vo,
            nonpositive_result: nonpositive,
        },
    ))
}

/// Render a dataset back into standard-table CSV (DMU column, inputs,
/// outputs). Useful for fixtures and the round-trip tests.
pub fn to_standard_csv(data: &DeaData) -> String {
    let mut out = String::new();
    out.push_str("DMU");
    for name in &data.input_names {
        let _ = write!(out, ",{name}");
    }
    for name in &data.output_names {
        let _ = write!(out, ",{name}");
    }
    out.push('\n');
    for j in 0..data.num_dmus() {
        out.push_str(&data.dmunames[j]);
        for i in 0..data.num_inputs() {
            let _ = write!(out, ",{}", data.input[(i, j)]);
        }
        for r in 0..data.num_outputs() {
            let _ = write!(out, ",{}", data.output[(r, j)]);
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn special(ud_outputs: &[usize]) -> SpecialSets {
        SpecialSets {
            ud_outputs: ud_outputs.iter().copied().collect(),
            ..Default::default()
        }
    }

    #[test]
    fn matrices_and_auto_names() {
        let data = DeaData::from_matrices(array![[1.0]], array![[1.0]]).unwrap();
        assert_eq!(data.dmunames, vec!["DMU1"]);
        assert_eq!(data.input_names, vec!["Input1"]);
    }

    #[test]
    fn explicit_matrices_shapes() {
        // Three DMUs, two inputs, one output.
        let input = array![[10950.0, 5553.9, 4271.1], [36000.0, 80000.0, 7182.0]];
        let output = array![[346.2, 314.8, 121.2]];
        let data = DeaData::new(
            input,
            output,
            Some(vec!["Mitsubishi".into(), "Mitsui".into(), "Itochu".into()]),
            Some(vec!["Equity".into(), "Employees".into()]),
            Some(vec!["Profit".into()]),
            SpecialSets::default(),
        )
        .unwrap();
        assert_eq!(data.input.dim(), (2, 3));
        assert_eq!(data.output.dim(), (1, 3));
        assert!(!data.diagnostics.magnitude_spread);
    }

    #[test]
    fn diagnostics_flag_extreme_spread_and_nonpositive() {
        let spread = DeaData::from_matrices(array![[1e6, 2e6]], array![[1.0, 2.0]]).unwrap();
        assert!(spread.diagnostics.magnitude_spread);
        assert!(!spread.diagnostics.nonpositive_data);
        let nonpos = DeaData::from_matrices(array![[1.0, 2.0]], array![[0.0, 2.0]]).unwrap();
        assert!(nonpos.diagnostics.nonpositive_data);
    }

    #[test]
    fn standard_table_by_count() {
        let csv = "Company,Assets,Equity,Employees,Revenue,Profit\n\
                   Mitsubishi,91920.6,10950.0,36000,184365.2,346.2\n\
                   Mitsui,68770.9,5553.9,80000,181518.7,314.8\n";
        let table = Table::from_csv_str(csv).unwrap();
        let data = make_deadata(
            &table,
            &TableLayout {
                dmu_col: None,
                inputs: ColSpec::Count(3),
                outputs: ColSpec::Count(2),
            },
            SpecialSets::default(),
        )
        .unwrap();
        assert_eq!(data.input[(0, 0)], 91920.6);
        assert_eq!(data.output[(1, 0)], 346.2);
        assert_eq!(data.input_names[0], "Assets");
        assert_eq!(data.dmunames[1], "Mitsui");
    }

    #[test]
    fn mixed_name_and_position_selection() {
        let csv = "Company,Assets,Equity,Employees,Revenue,Profit\n\
                   A,1,2,3,4,5\nB,6,7,8,9,10\n";
        let table = Table::from_csv_str(csv).unwrap();
        let data = make_deadata(
            &table,
            &TableLayout {
                dmu_col: None,
                inputs: ColSpec::Cols(vec![ColRef::Pos(3), ColRef::Pos(4)]),
                outputs: ColSpec::Cols(vec![ColRef::Name("Profit".into())]),
            },
            SpecialSets::default(),
        )
        .unwrap();
        assert_eq!(data.input_names, vec!["Equity", "Employees"]);
        assert_eq!(data.output_names, vec!["Profit"]);
    }

    #[test]
    fn overlapping_selection_rejected() {
        let csv = "D,a,b\nx,1,2\n";
        let table = Table::from_csv_str(csv).unwrap();
        let err = make_deadata(
            &table,
            &TableLayout {
                dmu_col: None,
                inputs: ColSpec::Cols(vec![ColRef::Pos(2)]),
                outputs: ColSpec::Cols(vec![ColRef::Pos(2)]),
            },
            SpecialSets::default(),
        );
        assert!(err.is_err());
    }

    #[test]
    fn duplicate_dmu_labels_rejected() {
        let csv = "D,a,b\nx,1,2\nx,3,4\n";
        let table = Table::from_csv_str(csv).unwrap();
        let err = make_deadata(
            &table,
            &TableLayout {
                dmu_col: None,
                inputs: ColSpec::Count(1),
                outputs: ColSpec::Count(1),
            },
            SpecialSets::default(),
        );
        assert!(err.is_err());
    }

    #[test]
    fn round_trip_through_csv() {
        let input = array![[2.0, 4.0, 5.0, 8.0]];
        let output = array![[2.0, 2.0, 4.0, 2.0]];
        let data = DeaData::new(
            input,
            output,
            Some(vec!["A".into(), "B".into(), "C".into(), "D".into()]),
            None,
            None,
            SpecialSets::default(),
        )
        .unwrap();
        let csv = to_standard_csv(&data);
        let table = Table::from_csv_str(&csv).unwrap();
        let back = make_deadata(
            &table,
            &TableLayout {
                dmu_col: None,
                inputs: ColSpec::Count(1),
                outputs: ColSpec::Count(1),
            },
            SpecialSets::default(),
        )
        .unwrap();
        assert_eq!(back.input, data.input);
        assert_eq!(back.output, data.output);
        assert_eq!(back.dmunames, data.dmunames);
    }

    #[test]
    fn fuzzy_crisp_completion() {
        // One crisp input, one triangular output (dl/dr differ, no mr).
        let csv = "D,x,y,ydl,ydr\nA,1,5,0.5,1\nB,2,6,0,0\n";
        let table = Table::from_csv_str(csv).unwrap();
        let data = make_deadata_fuzzy(
            &table,
            &FuzzyTableLayout {
                dmu_col: None,
                inputs: vec![FuzzyVarCols::crisp(ColRef::Pos(2))],
                outputs: vec![FuzzyVarCols {
                    ml: ColRef::Pos(3),
                    mr: None,
                    dl: Some(ColRef::Pos(4)),
                    dr: Some(ColRef::Pos(5)),
                }],
            },
            SpecialSets::default(),
        )
        .unwrap();
        assert!(data.input.is_crisp());
        assert_eq!(data.output.ml, data.output.mr);
        assert_eq!(data.output.dl[(0, 0)], 0.5);
        assert_eq!(data.output.dr[(0, 0)], 1.0);
    }

    #[test]
    fn crisp_input_five_output_layout() {
        // One crisp input in column 2; five outputs in columns 3-7, the 3rd
        // and 5th triangular with their spreads in columns 8-11.
        let csv = "D,x,y1,y2,y3,y4,y5,y3dl,y3dr,y5dl,y5dr\n\
                   U1,11.5,0.2,0.8,1.0,2.0,3.0,0.1,0.2,0.3,0.4\n\
                   U2,20.0,0.3,0.6,1.5,2.5,3.5,0.2,0.3,0.4,0.5\n";
        let table = Table::from_csv_str(csv).unwrap();
        let data = make_deadata_fuzzy(
            &table,
            &FuzzyTableLayout {
                dmu_col: None,
                inputs: vec![FuzzyVarCols::crisp(ColRef::Pos(2))],
                outputs: (0..5)
                    .map(|k| FuzzyVarCols {
                        ml: ColRef::Pos(3 + k),
                        mr: None,
                        dl: [
                            None,
                            None,
                            Some(ColRef::Pos(8)),
                            None,
                            Some(ColRef::Pos(10)),
                        ][k]
                            .clone(),
                        dr: [
                            None,
                            None,
                            Some(ColRef::Pos(9)),
                            None,
                            Some(ColRef::Pos(11)),
                        ][k]
                            .clone(),
                    })
                    .collect(),
            },
            SpecialSets::default(),
        )
        .unwrap();
        assert!(data.input.is_crisp());
        // Crisp outputs keep zero spreads; the triangular ones read theirs.
        assert_eq!(data.output.dl[(0, 0)], 0.0);
        assert_eq!(data.output.dl[(2, 0)], 0.1);
        assert_eq!(data.output.dr[(2, 0)], 0.2);
        assert_eq!(data.output.dl[(4, 1)], 0.4);
        assert_eq!(data.output.ml, data.output.mr);
    }

    #[test]
    fn five_period_wide_panel() {
        let mut csv = String::from("D");
        for t in 1..=5 {
            csv.push_str(&format!(",x1_{t},x2_{t},y_{t}"));
        }
        csv.push('\n');
        for dmu in ["A", "B", "C"] {
            csv.push_str(dmu);
            for t in 1..=5 {
                csv.push_str(&format!(",{},{},{}", t, t + 1, 2 * t));
            }
            csv.push('\n');
        }
        let table = Table::from_csv_str(&csv).unwrap();
        let series = make_malmquist(
            &table,
            &MalmquistLayout::Wide {
                dmu_col: None,
                nper: 5,
                ni: 2,
                no: 1,
            },
        )
        .unwrap();
        assert_eq!(series.num_periods(), 5);
        assert_eq!(series.periods[4].input[(1, 0)], 6.0);
        assert_eq!(series.periods[2].output[(0, 2)], 6.0);
    }

    #[test]
    fn all_crisp_table_gives_zero_spreads() {
        let csv = "D,x,y\nA,1,5\nB,2,6\n";
        let table = Table::from_csv_str(csv).unwrap();
        let data = make_deadata_fuzzy(
            &table,
            &FuzzyTableLayout {
                dmu_col: None,
                inputs: vec![FuzzyVarCols::crisp(ColRef::Pos(2))],
                outputs: vec![FuzzyVarCols::crisp(ColRef::Pos(3))],
            },
            SpecialSets::default(),
        )
        .unwrap();
        assert!(data.input.is_crisp());
        assert!(data.output.is_crisp());
    }

    #[test]
    fn negative_spread_rejected() {
        let csv = "D,x,y,yd\nA,1,5,-1\n";
        let table = Table::from_csv_str(csv).unwrap();
        let err = make_deadata_fuzzy(
            &table,
            &FuzzyTableLayout {
                dmu_col: None,
                inputs: vec![FuzzyVarCols::crisp(ColRef::Pos(2))],
                outputs: vec![FuzzyVarCols {
                    ml: ColRef::Pos(3),
                    mr: None,
                    dl: Some(ColRef::Pos(4)),
                    dr: None,
                }],
            },
            SpecialSets::default(),
        );
        assert!(err.is_err());
    }

    #[test]
    fn wide_and_long_panels_agree() {
        let wide = "D,x1,y1,x2,y2\nA,2,2,2,2.5\nB,4,2,4,3\n";
        let long = "D,t,x,y\nA,1,2,2\nB,1,4,2\nA,2,2,2.5\nB,2,4,3\n";
        let wt = Table::from_csv_str(wide).unwrap();
        let lt = Table::from_csv_str(long).unwrap();
        let ws = make_malmquist(
            &wt,
            &MalmquistLayout::Wide {
                dmu_col: None,
                nper: 2,
                ni: 1,
                no: 1,
            },
        )
        .unwrap();
        let ls = make_malmquist(
            &lt,
            &MalmquistLayout::Long {
                dmu_col: None,
                period_col: ColRef::Pos(2),
                inputs: ColSpec::Count(1),
                outputs: ColSpec::Count(1),
            },
        )
        .unwrap();
        assert_eq!(ws.num_periods(), 2);
        for t in 0..2 {
            assert_eq!(ws.periods[t].input, ls.periods[t].input);
            assert_eq!(ws.periods[t].output, ls.periods[t].output);
            assert_eq!(ws.periods[t].dmunames, ls.periods[t].dmunames);
        }
    }

    #[test]
    fn long_panel_missing_dmu_rejected() {
        let long = "D,t,x,y\nA,1,2,2\nB,1,4,2\nA,2,2,2.5\n";
        let lt = Table::from_csv_str(long).unwrap();
        let err = make_malmquist(
            &lt,
            &MalmquistLayout::Long {
                dmu_col: None,
                period_col: ColRef::Pos(2),
                inputs: ColSpec::Count(1),
                outputs: ColSpec::Count(1),
            },
        );
        assert!(err.is_err());
    }

    #[test]
    fn undesirable_max_plus_one() {
        let data = DeaData::new(
            array![[1.0, 1.0, 1.0]],
            array![[3.0, 5.0, 2.0]],
            None,
            None,
            None,
            special(&[0]),
        )
        .unwrap();
        let (out, used) = undesirable_transform(&data, None, None).unwrap();
        assert_eq!(used.vtrans_o, vec![6.0]);
        assert_eq!(out.output.row(0).to_vec(), vec![3.0, 1.0, 4.0]);
        assert!(out.special.ud_outputs.is_empty());
    }

    #[test]
    fn undesirable_scalar_translation() {
        let data = DeaData::new(
            array![[1.0, 1.0]],
            array![[100.0, 200.0]],
            None,
            None,
            None,
            special(&[0]),
        )
        .unwrap();
        let (out, used) =
            undesirable_transform(&data, None, Some(&Translation::Scalar(1500.0))).unwrap();
        assert_eq!(used.vtrans_o, vec![1500.0]);
        assert_eq!(out.output.row(0).to_vec(), vec![1400.0, 1300.0]);
    }

    #[test]
    fn undesirable_double_apply_with_reflag_restores_rows() {
        let data = DeaData::new(
            array![[1.0, 1.0, 1.0]],
            array![[3.0, 5.0, 2.0]],
            None,
            None,
            None,
            special(&[0]),
        )
        .unwrap();
        let v = Translation::Scalar(9.0);
        let (once, _) = undesirable_transform(&data, None, Some(&v)).unwrap();
        // Flags clear after the first pass, so a second call is the identity.
        let (same, _) = undesirable_transform(&once, None, None).unwrap();
        assert_eq!(same, once);
        // Re-flagging and translating again restores the original rows.
        let mut reflagged = once.clone();
        reflagged.special.ud_outputs = [0].into();
        let (twice, _) = undesirable_transform(&reflagged, None, Some(&v)).unwrap();
        assert_eq!(twice.output, data.output);
    }

    #[test]
    fn undesirable_identity_without_flags() {
        let data = DeaData::from_matrices(array![[1.0, 2.0]], array![[1.0, 2.0]]).unwrap();
        let (out, used) = undesirable_transform(&data, None, None).unwrap();
        assert_eq!(out, data);
        assert!(used.vtrans_i.is_empty() && used.vtrans_o.is_empty());
    }

    #[test]
    fn undesirable_translation_without_flag_rejected() {
        let data = DeaData::from_matrices(array![[1.0]], array![[1.0]]).unwrap();
        let err = undesirable_transform(&data, Some(&Translation::Scalar(5.0)), None);
        assert!(err.is_err());
    }

    #[test]
    fn double_flag_rejected() {
        let sets = SpecialSets {
            nc_inputs: [0].into(),
            nd_inputs: [0].into(),
            ..Default::default()
        };
        let err = DeaData::new(array![[1.0]], array![[1.0]], None, None, None, sets);
        assert!(err.is_err());
    }

    #[test]
    fn fuzzy_undesirable_mirrors_trapezoid() {
        let input = FuzzyMatrix::crisp(array![[1.0, 1.0]]);
        let output = FuzzyMatrix {
            ml: array![[2.0, 3.0]],
            mr: array![[2.5, 3.0]],
            dl: array![[0.5, 1.0]],
            dr: array![[1.0, 0.0]],
        };
        let data = FuzzyDeaData::new(input, output, None, None, None, special(&[0])).unwrap();
        let (out, used) = undesirable_transform_fuzzy(&data, None, None).unwrap();
        // support max = 3 + 0 ... actually max(mr + dr) = max(3.5, 3.0) = 3.5 -> v = 4.5
        assert_eq!(used.vtrans_o, vec![4.5]);
        assert_eq!(out.output.ml[(0, 0)], 2.0); // 4.5 - 2.5
        assert_eq!(out.output.mr[(0, 0)], 2.5); // 4.5 - 2.0
        assert_eq!(out.output.dl[(0, 0)], 1.0);
        assert_eq!(out.output.dr[(0, 0)], 0.5);
    }
}
