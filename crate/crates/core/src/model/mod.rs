//! Model families. Every `model_*` function takes a dataset plus an options
//! struct and returns a [`result::DeaResult`] with one record per evaluated
//! DMU. Per-DMU solver failures become `None` scores with a status; they
//! never abort the batch.

pub mod additive;
pub mod cross;
pub mod multiplier;
pub mod nonradial;
pub mod profit;
pub mod radial;
pub mod result;
pub mod sbm;
pub mod supereff;

use ndarray::Array2;
use serde::Serialize;

use crate::data::DeaData;
use crate::error::{DeaError, Result};
use crate::lp::{Constraint, Sense};

/// Scores an efficiency classification as efficient when within this of the
/// ideal value, with slacks below it as well.
pub const EFF_TOL: f64 = 1e-6;
/// Lambda entries below this are treated as zero in reference sets.
pub const LAMBDA_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Io,
    Oo,
    Dir,
    No,
}

impl std::fmt::Display for Orientation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Orientation::Io => "io",
            Orientation::Oo => "oo",
            Orientation::Dir => "dir",
            Orientation::No => "no",
        };
        f.write_str(s)
    }
}

/// Returns-to-scale regime. `Grs` carries its intensity-sum bounds; `Vrs` is
/// `Grs` with both bounds at one.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Rts {
    Crs,
    Vrs,
    Nirs,
    Ndrs,
    Grs { l: f64, u: f64 },
}

impl Rts {
    pub fn validate(&self) -> Result<()> {
        if let Rts::Grs { l, u } = self {
            if !(0.0..=1.0).contains(l) || *u < 1.0 || !l.is_finite() || !u.is_finite() {
                return Err(DeaError::InvalidParameter(format!(
                    "GRS bounds need 0 <= L <= 1 <= U, got L={l}, U={u}"
                )));
            }
        }
        Ok(())
    }

    /// Intensity-sum bounds as (L, U); `None` for CRS.
    pub fn lambda_bounds(&self) -> Option<(f64, f64)> {
        match self {
            Rts::Crs => None,
            Rts::Vrs => Some((1.0, 1.0)),
            Rts::Nirs => Some((0.0, 1.0)),
            Rts::Ndrs => Some((1.0, f64::INFINITY)),
            Rts::Grs { l, u } => Some((*l, *u)),
        }
    }
}

impl std::fmt::Display for Rts {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Rts::Crs => f.write_str("crs"),
            Rts::Vrs => f.write_str("vrs"),
            Rts::Nirs => f.write_str("nirs"),
            Rts::Ndrs => f.write_str("ndrs"),
            Rts::Grs { l, u } => write!(f, "grs[{l},{u}]"),
        }
    }
}

/// Intensity-sum constraint rows for a program whose lambda variables occupy
/// `lambda_cols` out of `ncols` columns. When `scale_col` is given (the
/// Charnes-Cooper `t`), bounds multiply it instead of sitting on the rhs.
pub fn rts_rows(
    rts: &Rts,
    ncols: usize,
    lambda_cols: std::ops::Range<usize>,
    scale_col: Option<usize>,
) -> Vec<Constraint> {
    let mut rows = Vec::new();
    let Some((l, u)) = rts.lambda_bounds() else {
        return rows;
    };
    let base = |bound: f64| -> Vec<f64> {
        let mut coeffs = vec![0.0; ncols];
        for c in lambda_cols.clone() {
            coeffs[c] = 1.0;
        }
        if let Some(t) = scale_col {
            coeffs[t] = -bound;
        }
        coeffs
    };
    let rhs = |bound: f64| if scale_col.is_some() { 0.0 } else { bound };
    if l == u {
        rows.push(Constraint {
            coeffs: base(l),
            sense: Sense::Eq,
            rhs: rhs(l),
        });
        return rows;
    }
    if l > 0.0 {
        rows.push(Constraint {
            coeffs: base(l),
            sense: Sense::Ge,
            rhs: rhs(l),
        });
    }
    if u.is_finite() {
        rows.push(Constraint {
            coeffs: base(u),
            sense: Sense::Le,
            rhs: rhs(u),
        });
    }
    rows
}

/// A scalar, per-variable or per-variable-per-DMU parameter, broadcast to a
/// `nvar x neval` matrix on demand.
#[derive(Clone, Debug)]
pub enum Param {
    Scalar(f64),
    PerVariable(Vec<f64>),
    PerVariableDmu(Array2<f64>),
}

impl Param {
    pub fn resolve(&self, nvar: usize, neval: usize, what: &str) -> Result<Array2<f64>> {
        match self {
            Param::Scalar(v) => Ok(Array2::from_elem((nvar, neval), *v)),
            Param::PerVariable(vs) => {
                if vs.len() != nvar {
                    return Err(DeaError::InvalidParameter(format!(
                        "{what}: {} entries for {} variables",
                        vs.len(),
                        nvar
                    )));
                }
                let mut out = Array2::zeros((nvar, neval));
                for (i, &v) in vs.iter().enumerate() {
                    for j in 0..neval {
                        out[(i, j)] = v;
                    }
                }
                Ok(out)
            }
            Param::PerVariableDmu(m) => {
                if m.dim() != (nvar, neval) {
                    return Err(DeaError::InvalidParameter(format!(
                        "{what}: matrix of shape {:?}, expected ({nvar}, {neval})",
                        m.dim()
                    )));
                }
                Ok(m.clone())
            }
        }
    }
}

impl Default for Param {
    fn default() -> Self {
        Param::Scalar(1.0)
    }
}

/// Normalize an optional evaluation/reference index list: `None` means all
/// DMUs; indices must be in range and non-empty.
pub fn resolve_dmu_set(set: Option<&[usize]>, n: usize, what: &str) -> Result<Vec<usize>> {
    match set {
        None => Ok((0..n).collect()),
        Some(v) => {
            if v.is_empty() {
                return Err(DeaError::InvalidParameter(format!("{what} is empty")));
            }
            let mut seen = std::collections::BTreeSet::new();
            for &j in v {
                if j >= n {
                    return Err(DeaError::InvalidParameter(format!(
                        "{what} index {j} out of range 0..{n}"
                    )));
                }
                if !seen.insert(j) {
                    return Err(DeaError::InvalidParameter(format!(
                        "{what} lists DMU {j} twice"
                    )));
                }
            }
            Ok(v.to_vec())
        }
    }
}

/// A crisp model choice with its parameters, for callers that dispatch by
/// name: the fuzzy worst/best metamodel and the command line.
#[derive(Clone, Debug)]
pub enum ModelSpec {
    Basic(radial::BasicOptions),
    Fdh(radial::FdhOptions),
    Rdm(radial::RdmOptions),
    Multiplier(multiplier::MultiplierOptions),
    Nonradial(nonradial::NonradialOptions),
    Deaps(nonradial::DeapsOptions),
    Additive(additive::AdditiveOptions),
    Addmin(additive::AddminOptions),
    Sbmeff(sbm::SbmOptions),
    Profit(profit::ProfitOptions),
    Supereff(supereff::SupereffOptions),
    SbmSupereff(supereff::SbmSupereffOptions),
    AddSupereff(supereff::AddSupereffOptions),
}

impl ModelSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::Basic(_) => "basic",
            ModelSpec::Fdh(_) => "fdh",
            ModelSpec::Rdm(_) => "rdm",
            ModelSpec::Multiplier(_) => "multiplier",
            ModelSpec::Nonradial(_) => "nonradial",
            ModelSpec::Deaps(_) => "deaps",
            ModelSpec::Additive(_) => "additive",
            ModelSpec::Addmin(_) => "addmin",
            ModelSpec::Sbmeff(_) => "sbmeff",
            ModelSpec::Profit(_) => "profit",
            ModelSpec::Supereff(_) => "supereff",
            ModelSpec::SbmSupereff(_) => "sbmsupereff",
            ModelSpec::AddSupereff(_) => "addsupereff",
        }
    }

    /// Replace the evaluation and reference sets, keeping everything else.
    pub fn with_dmu_sets(&self, dmu_eval: Option<Vec<usize>>, dmu_ref: Option<Vec<usize>>) -> Self {
        let mut spec = self.clone();
        macro_rules! set {
            ($opts:expr) => {{
                $opts.dmu_eval = dmu_eval;
                $opts.dmu_ref = dmu_ref;
            }};
        }
        match &mut spec {
            ModelSpec::Basic(o) => set!(o),
            ModelSpec::Fdh(o) => set!(o),
            ModelSpec::Rdm(o) => set!(o),
            ModelSpec::Multiplier(o) => set!(o),
            ModelSpec::Nonradial(o) => set!(o),
            ModelSpec::Deaps(o) => set!(o),
            ModelSpec::Additive(o) => set!(o),
            ModelSpec::Addmin(o) => set!(o),
            ModelSpec::Sbmeff(o) => set!(o),
            ModelSpec::Profit(o) => set!(o),
            ModelSpec::Supereff(o) => set!(o),
            ModelSpec::SbmSupereff(o) => set!(o),
            ModelSpec::AddSupereff(o) => set!(o),
        }
        spec
    }
}

/// Run the crisp model a [`ModelSpec`] names.
pub fn run_model(data: &DeaData, spec: &ModelSpec) -> Result<result::DeaResult> {
    match spec {
        ModelSpec::Basic(o) => radial::model_basic(data, o),
        ModelSpec::Fdh(o) => radial::model_fdh(data, o),
        ModelSpec::Rdm(o) => radial::model_rdm(data, o),
        ModelSpec::Multiplier(o) => multiplier::model_multiplier(data, o),
        ModelSpec::Nonradial(o) => nonradial::model_nonradial(data, o),
        ModelSpec::Deaps(o) => nonradial::model_deaps(data, o),
        ModelSpec::Additive(o) => additive::model_additive(data, o),
        ModelSpec::Addmin(o) => additive::model_addmin(data, o),
        ModelSpec::Sbmeff(o) => sbm::model_sbmeff(data, o),
        ModelSpec::Profit(o) => profit::model_profit(data, o),
        ModelSpec::Supereff(o) => supereff::model_supereff(data, o),
        ModelSpec::SbmSupereff(o) => supereff::model_sbmsupereff(data, o),
        ModelSpec::AddSupereff(o) => supereff::model_addsupereff(data, o),
    }
}

/// Reject special-variable flags a model does not implement.
pub(crate) fn reject_special(
    data: &DeaData,
    model: &str,
    allow_nc: bool,
    allow_nd: bool,
    allow_ud: bool,
) -> Result<()> {
    let sp = &data.special;
    if !allow_nc && (!sp.nc_inputs.is_empty() || !sp.nc_outputs.is_empty()) {
        return Err(DeaError::InvalidParameter(format!(
            "model '{model}' does not support non-controllable variables"
        )));
    }
    if !allow_nd && (!sp.nd_inputs.is_empty() || !sp.nd_outputs.is_empty()) {
        return Err(DeaError::InvalidParameter(format!(
            "model '{model}' does not support non-discretionary variables"
        )));
    }
    if !allow_ud && (!sp.ud_inputs.is_empty() || !sp.ud_outputs.is_empty()) {
        return Err(DeaError::InvalidParameter(format!(
            "model '{model}' does not support undesirable variables"
        )));
    }
    Ok(())
}
