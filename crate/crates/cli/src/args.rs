//! Command-line surface: one flat flag set dispatched on `--model`.

use clap::{Parser, ValueEnum};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Basic,
    Fdh,
    Rdm,
    Multiplier,
    Nonradial,
    Deaps,
    Additive,
    Addmin,
    Sbmeff,
    Profit,
    Supereff,
    Sbmsupereff,
    Addsupereff,
    Cross,
    Kaoliu,
    Malmquist,
    Bootstrap,
    Metafrontier,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OrientationArg {
    Io,
    Oo,
    Dir,
    No,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RtsArg {
    Crs,
    Vrs,
    Nirs,
    Ndrs,
    Grs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ArrangementArg {
    Horizontal,
    Vertical,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Type1Arg {
    Cont,
    Seq,
    Glob,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Type2Arg {
    Fgnz,
    Rd,
    Gl,
    Bias,
}

/// Data envelopment analysis from CSV datasets: efficiency models,
/// super-efficiency, cross-efficiency, fuzzy worst/best analysis, Malmquist
/// indices, bootstrap inference and metafrontier runs.
#[derive(Debug, Parser)]
#[command(name = "dea", version, disable_help_subcommand = true)]
pub struct Cli {
    /// Input CSV with a header row.
    #[arg(long)]
    pub data: std::path::PathBuf,

    /// DMU label column (1-based position or header name). Defaults to the
    /// first column.
    #[arg(long)]
    pub dmu_col: Option<String>,

    /// Number of input columns right after the DMU column.
    #[arg(long)]
    pub ni: Option<usize>,

    /// Number of output columns after the inputs.
    #[arg(long = "no")]
    pub n_outputs: Option<usize>,

    /// Input columns (comma list of 1-based positions or header names).
    #[arg(long)]
    pub inputs: Option<String>,

    /// Output columns (comma list of 1-based positions or header names).
    #[arg(long)]
    pub outputs: Option<String>,

    /// Non-controllable input positions (1-based variable indices).
    #[arg(long)]
    pub nc_inputs: Option<String>,
    #[arg(long)]
    pub nc_outputs: Option<String>,
    /// Non-discretionary input positions (1-based variable indices).
    #[arg(long)]
    pub nd_inputs: Option<String>,
    #[arg(long)]
    pub nd_outputs: Option<String>,
    /// Undesirable input positions (1-based variable indices).
    #[arg(long)]
    pub ud_inputs: Option<String>,
    #[arg(long)]
    pub ud_outputs: Option<String>,

    #[arg(long, value_enum)]
    pub model: ModelArg,

    #[arg(long, value_enum)]
    pub orientation: Option<OrientationArg>,

    #[arg(long, value_enum, default_value = "crs")]
    pub rts: RtsArg,

    /// Lower intensity-sum bound for generalized returns to scale.
    #[arg(long = "L", visible_alias = "rts-l")]
    pub l: Option<f64>,

    /// Upper intensity-sum bound for generalized returns to scale.
    #[arg(long = "U", visible_alias = "rts-u")]
    pub u: Option<f64>,

    /// Evaluated DMUs, 1-based ranges like `1-8,11`.
    #[arg(long)]
    pub dmu_eval: Option<String>,

    /// Reference DMUs, 1-based ranges like `1-8,11`.
    #[arg(long)]
    pub dmu_ref: Option<String>,

    /// Skip the max-slack second stage.
    #[arg(long)]
    pub no_maxslack: bool,

    /// Slack weights: scalar or per-input comma list.
    #[arg(long)]
    pub weight_slack_i: Option<String>,
    #[arg(long)]
    pub weight_slack_o: Option<String>,
    /// Non-radial max-slack weights (the factor-free side).
    #[arg(long)]
    pub weight_slack: Option<String>,
    /// Preference weights of the deaps objective.
    #[arg(long)]
    pub weight_eff: Option<String>,
    /// SBM input weights.
    #[arg(long)]
    pub weight_input: Option<String>,
    /// SBM output weights.
    #[arg(long)]
    pub weight_output: Option<String>,

    /// Directional-model input direction: scalar or per-input comma list.
    #[arg(long)]
    pub dir_input: Option<String>,
    #[arg(long)]
    pub dir_output: Option<String>,

    /// Undesirable translation for inputs: scalar or comma list with NA for
    /// "max + 1" entries.
    #[arg(long)]
    pub vtrans_i: Option<String>,
    #[arg(long)]
    pub vtrans_o: Option<String>,

    /// Non-Archimedean lower bound on multiplier weights.
    #[arg(long)]
    pub epsilon: Option<f64>,

    /// Exclude self-appraisal from cross-efficiency averages.
    #[arg(long)]
    pub no_selfapp: bool,

    /// Apply the negative cross-efficiency correction.
    #[arg(long)]
    pub correction: bool,

    #[arg(long)]
    pub no_m2: bool,
    #[arg(long)]
    pub no_m3: bool,

    /// SBM-Max: chase the best score over the efficient facets.
    #[arg(long)]
    pub kaizen: bool,

    /// Invert the range-directional directions.
    #[arg(long)]
    pub irdm: bool,

    /// Drop the factor bounds (deaps) or the optimal-activity bounds
    /// (cost/revenue models).
    #[arg(long)]
    pub unrestricted: bool,

    /// Unit input prices: scalar or per-input comma list.
    #[arg(long)]
    pub price_input: Option<String>,
    #[arg(long)]
    pub price_output: Option<String>,

    /// Crisp submodel run inside the fuzzy worst/best analysis.
    #[arg(long)]
    pub kaoliu_model: Option<String>,

    /// Alpha cuts: comma list in `[0,1]`, or a single integer count > 1 for
    /// equispaced levels.
    #[arg(long)]
    pub alpha: Option<String>,

    /// Fuzzy column maps, comma lists of column refs with NA gaps.
    #[arg(long)]
    pub inputs_ml: Option<String>,
    #[arg(long)]
    pub inputs_mr: Option<String>,
    #[arg(long)]
    pub inputs_dl: Option<String>,
    #[arg(long)]
    pub inputs_dr: Option<String>,
    #[arg(long)]
    pub outputs_ml: Option<String>,
    #[arg(long)]
    pub outputs_mr: Option<String>,
    #[arg(long)]
    pub outputs_dl: Option<String>,
    #[arg(long)]
    pub outputs_dr: Option<String>,

    /// Number of periods of a wide panel.
    #[arg(long)]
    pub nper: Option<usize>,

    /// Period column of a long panel (1-based position or name).
    #[arg(long)]
    pub percol: Option<String>,

    #[arg(long, value_enum, default_value = "horizontal")]
    pub arrangement: ArrangementArg,

    #[arg(long, value_enum, default_value = "cont")]
    pub type1: Type1Arg,

    #[arg(long, value_enum, default_value = "fgnz")]
    pub type2: Type2Arg,

    /// Compute the bias components of the Malmquist index under VRS.
    #[arg(long)]
    pub tc_vrs: bool,

    /// Bootstrap replications.
    #[arg(long, default_value_t = 2000)]
    pub b: usize,

    /// Bootstrap confidence parameter (intervals cover 1 - alpha).
    #[arg(long, default_value_t = 0.05)]
    pub ci_alpha: f64,

    /// Bandwidth rule: a number, `fixed:<h>`, or one of h1..h4.
    #[arg(long, default_value = "fixed:0.014")]
    pub bandwidth: String,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Metafrontier groups, like `G1=1-8;G2=9-14;G3=15-23` (1-based).
    #[arg(long)]
    pub groups: Option<String>,

    /// Output path (extension added per --format).
    #[arg(long)]
    pub out: Option<std::path::PathBuf>,

    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,

    /// Write one CSV per result facet instead of a merged table.
    #[arg(long)]
    pub split: bool,

    /// Print the unsolved first-stage programs and exit.
    #[arg(long)]
    pub emit_lp: bool,

    /// Print the reference graph in DOT form.
    #[arg(long)]
    pub emit_dot: bool,

    /// Write the bootstrap replication matrix as CSV.
    #[arg(long)]
    pub estimates_out: Option<std::path::PathBuf>,

    /// Reuse precomputed maximal-friends facets (JSON, DMU labels).
    #[arg(long)]
    pub maxfr_in: Option<std::path::PathBuf>,

    /// Write the maximal-friends facets used (JSON, DMU labels).
    #[arg(long)]
    pub maxfr_out: Option<std::path::PathBuf>,
}
