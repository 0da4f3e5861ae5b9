mod args;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;

use args::*;
use dea_core::bootstrap::{bootstrap_basic, BandwidthRule, BootstrapOptions, BootstrapResult};
use dea_core::data::{
    make_deadata, make_deadata_fuzzy, make_malmquist, ColRef, ColSpec, DeaData, FuzzyTableLayout,
    FuzzyVarCols, MalmquistLayout, SpecialSets, Table, TableLayout, Translation,
};
use dea_core::error::DeaError;
use dea_core::frontier::FacetSet;
use dea_core::fuzzy::{modelfuzzy_kaoliu, AlphaSpec, FuzzyDeaResult, KaoLiuOptions};
use dea_core::malmquist::{
    malmquist_index, Decomposition, FrontierScope, MalmquistOptions, MalmquistResult,
};
use dea_core::metafrontier::{metafrontier, Grouping, MetafrontierResult};
use dea_core::model::additive::{AdditiveOptions, AddminOptions};
use dea_core::model::cross::{cross_efficiency, CrossEffOptions, CrossEffResult};
use dea_core::model::multiplier::MultiplierOptions;
use dea_core::model::nonradial::{DeapsOptions, NonradialOptions};
use dea_core::model::profit::ProfitOptions;
use dea_core::model::radial::{BasicOptions, FdhOptions, RdmOptions};
use dea_core::model::sbm::SbmOptions;
use dea_core::model::supereff::{AddSupereffOptions, SbmSupereffOptions, SupereffOptions};
use dea_core::model::{run_model, ModelSpec, Orientation, Param, Rts};
use dea_core::results::{default_export_stem, reference_graph_dot, summary_export, ExportFormat};
use dea_core::DeaResult;

enum CliError {
    Validation(String),
    Io(String),
}

impl From<DeaError> for CliError {
    fn from(e: DeaError) -> Self {
        match e {
            // Unreadable files are I/O failures; malformed content is a
            // validation problem.
            DeaError::Io { .. } => CliError::Io(e.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn main() -> ExitCode {
    // Dying quietly on a closed pipe beats a panic when piping into head.
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}

// ---------------------------------------------------------------------------
// Flag parsing helpers
// ---------------------------------------------------------------------------

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

fn parse_col_ref(token: &str) -> ColRef {
    match token.trim().parse::<usize>() {
        Ok(p) => ColRef::Pos(p),
        Err(_) => ColRef::Name(token.trim().to_string()),
    }
}

fn parse_col_list(text: &str, flag: &str) -> CliResult<Vec<ColRef>> {
    let cols: Vec<ColRef> = text
        .split(',')
        .filter(|t| !t.trim().is_empty())
        .map(parse_col_ref)
        .collect();
    if cols.is_empty() {
        return Err(invalid(format!("--{flag}: empty column list")));
    }
    Ok(cols)
}

/// `1-8,11` as 1-based positions, returned 0-based.
fn parse_ranges(text: &str, flag: &str) -> CliResult<Vec<usize>> {
    let mut out = Vec::new();
    for part in text.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let bad = || invalid(format!("--{flag}: cannot parse range '{part}'"));
        if let Some((a, b)) = part.split_once('-') {
            let a: usize = a.trim().parse().map_err(|_| bad())?;
            let b: usize = b.trim().parse().map_err(|_| bad())?;
            if a == 0 || b < a {
                return Err(bad());
            }
            out.extend(a - 1..b);
        } else {
            let v: usize = part.parse().map_err(|_| bad())?;
            if v == 0 {
                return Err(bad());
            }
            out.push(v - 1);
        }
    }
    if out.is_empty() {
        return Err(invalid(format!("--{flag}: empty DMU list")));
    }
    Ok(out)
}

/// 1-based variable indices to a 0-based set.
fn parse_var_set(
    text: &Option<String>,
    flag: &str,
) -> CliResult<std::collections::BTreeSet<usize>> {
    match text {
        None => Ok(Default::default()),
        Some(t) => Ok(parse_ranges(t, flag)?.into_iter().collect()),
    }
}

fn parse_param(text: &str, flag: &str) -> CliResult<Param> {
    let values: Vec<f64> = text
        .split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| invalid(format!("--{flag}: '{t}' is not a number")))
        })
        .collect::<CliResult<_>>()?;
    match values.len() {
        0 => Err(invalid(format!("--{flag}: empty value"))),
        1 => Ok(Param::Scalar(values[0])),
        _ => Ok(Param::PerVariable(values)),
    }
}

fn opt_param(text: &Option<String>, flag: &str) -> CliResult<Option<Param>> {
    text.as_ref().map(|t| parse_param(t, flag)).transpose()
}

fn param_or_one(text: &Option<String>, flag: &str) -> CliResult<Param> {
    Ok(opt_param(text, flag)?.unwrap_or(Param::Scalar(1.0)))
}

fn parse_vtrans(text: &str, flag: &str) -> CliResult<Translation> {
    let tokens: Vec<&str> = text.split(',').map(str::trim).collect();
    if tokens.len() == 1 && !tokens[0].eq_ignore_ascii_case("na") {
        let v: f64 = tokens[0]
            .parse()
            .map_err(|_| invalid(format!("--{flag}: '{text}' is not a number")))?;
        return Ok(Translation::Scalar(v));
    }
    let entries = tokens
        .iter()
        .map(|t| {
            if t.eq_ignore_ascii_case("na") {
                Ok(None)
            } else {
                t.parse::<f64>()
                    .map(Some)
                    .map_err(|_| invalid(format!("--{flag}: '{t}' is not a number or NA")))
            }
        })
        .collect::<CliResult<Vec<_>>>()?;
    Ok(Translation::PerVariable(entries))
}

fn parse_alpha(text: &str) -> CliResult<AlphaSpec> {
    let tokens: Vec<&str> = text.split(',').map(str::trim).collect();
    if tokens.len() == 1 {
        if let Ok(k) = tokens[0].parse::<usize>() {
            if k > 1 {
                return Ok(AlphaSpec::Count(k));
            }
        }
    }
    let cuts = tokens
        .iter()
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| invalid(format!("--alpha: '{t}' is not a number")))
        })
        .collect::<CliResult<Vec<f64>>>()?;
    Ok(AlphaSpec::Cuts(cuts))
}

fn parse_bandwidth(text: &str) -> CliResult<BandwidthRule> {
    match text {
        "h1" => Ok(BandwidthRule::H1),
        "h2" => Ok(BandwidthRule::H2),
        "h3" => Ok(BandwidthRule::H3),
        "h4" => Ok(BandwidthRule::H4),
        other => {
            let h = other
                .strip_prefix("fixed:")
                .unwrap_or(other)
                .parse::<f64>()
                .map_err(|_| {
                    invalid(format!(
                        "--bandwidth: expected h1..h4, fixed:<h> or a number, got '{other}'"
                    ))
                })?;
            Ok(BandwidthRule::Fixed { h })
        }
    }
}

fn parse_groups(text: &str) -> CliResult<Grouping> {
    let mut names = Vec::new();
    let mut groups = Vec::new();
    for part in text.split(';') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let (name, spec) = part
            .split_once('=')
            .ok_or_else(|| invalid(format!("--groups: '{part}' is not NAME=RANGES")))?;
        names.push(name.trim().to_string());
        groups.push(parse_ranges(spec, "groups")?);
    }
    Grouping::new(names, groups).map_err(Into::into)
}

fn orientation_of(arg: Option<OrientationArg>, default: Orientation) -> Orientation {
    match arg {
        None => default,
        Some(OrientationArg::Io) => Orientation::Io,
        Some(OrientationArg::Oo) => Orientation::Oo,
        Some(OrientationArg::Dir) => Orientation::Dir,
        Some(OrientationArg::No) => Orientation::No,
    }
}

fn rts_of(cli: &Cli) -> CliResult<Rts> {
    Ok(match cli.rts {
        RtsArg::Crs => Rts::Crs,
        RtsArg::Vrs => Rts::Vrs,
        RtsArg::Nirs => Rts::Nirs,
        RtsArg::Ndrs => Rts::Ndrs,
        RtsArg::Grs => Rts::Grs {
            l: cli.l.unwrap_or(1.0),
            u: cli.u.unwrap_or(1.0),
        },
    })
}

// ---------------------------------------------------------------------------
// Data assembly
// ---------------------------------------------------------------------------

fn special_sets(cli: &Cli) -> CliResult<SpecialSets> {
    Ok(SpecialSets {
        nc_inputs: parse_var_set(&cli.nc_inputs, "nc-inputs")?,
        nc_outputs: parse_var_set(&cli.nc_outputs, "nc-outputs")?,
        nd_inputs: parse_var_set(&cli.nd_inputs, "nd-inputs")?,
        nd_outputs: parse_var_set(&cli.nd_outputs, "nd-outputs")?,
        ud_inputs: parse_var_set(&cli.ud_inputs, "ud-inputs")?,
        ud_outputs: parse_var_set(&cli.ud_outputs, "ud-outputs")?,
    })
}

fn colspec(count: Option<usize>, cols: &Option<String>, flag: &str) -> CliResult<ColSpec> {
    match (count, cols) {
        (Some(k), None) => Ok(ColSpec::Count(k)),
        (None, Some(list)) => Ok(ColSpec::Cols(parse_col_list(list, flag)?)),
        (Some(_), Some(_)) => Err(invalid(format!(
            "give either a count or --{flag}, not both"
        ))),
        (None, None) => Err(invalid(
            "inputs/outputs unspecified: use --ni/--no or --inputs/--outputs",
        )),
    }
}

fn load_table(cli: &Cli) -> CliResult<Table> {
    Table::from_csv_path(&cli.data).map_err(Into::into)
}

fn load_crisp(cli: &Cli) -> CliResult<DeaData> {
    let table = load_table(cli)?;
    let layout = TableLayout {
        dmu_col: cli.dmu_col.as_deref().map(parse_col_ref),
        inputs: colspec(cli.ni, &cli.inputs, "inputs")?,
        outputs: colspec(cli.n_outputs, &cli.outputs, "outputs")?,
    };
    make_deadata(&table, &layout, special_sets(cli)?).map_err(Into::into)
}

fn fuzzy_side(
    ml: &Option<String>,
    mr: &Option<String>,
    dl: &Option<String>,
    dr: &Option<String>,
    side: &str,
) -> CliResult<Vec<FuzzyVarCols>> {
    let ml = ml
        .as_ref()
        .ok_or_else(|| invalid(format!("--{side}-ml is required for fuzzy data")))?;
    let ml_cols = parse_col_list(ml, &format!("{side}-ml"))?;
    let optional = |text: &Option<String>, what: &str| -> CliResult<Vec<Option<ColRef>>> {
        match text {
            None => Ok(vec![None; ml_cols.len()]),
            Some(t) => {
                let entries: Vec<Option<ColRef>> = t
                    .split(',')
                    .map(|tok| {
                        let tok = tok.trim();
                        if tok.eq_ignore_ascii_case("na") {
                            None
                        } else {
                            Some(parse_col_ref(tok))
                        }
                    })
                    .collect();
                if entries.len() != ml_cols.len() {
                    return Err(invalid(format!(
                        "--{side}-{what}: {} entries for {} variables",
                        entries.len(),
                        ml_cols.len()
                    )));
                }
                Ok(entries)
            }
        }
    };
    let mr_cols = optional(mr, "mr")?;
    let dl_cols = optional(dl, "dl")?;
    let dr_cols = optional(dr, "dr")?;
    Ok(ml_cols
        .into_iter()
        .enumerate()
        .map(|(i, ml)| FuzzyVarCols {
            ml,
            mr: mr_cols[i].clone(),
            dl: dl_cols[i].clone(),
            dr: dr_cols[i].clone(),
        })
        .collect())
}

// ---------------------------------------------------------------------------
// Model construction
// ---------------------------------------------------------------------------

fn dmu_sets(cli: &Cli) -> CliResult<(Option<Vec<usize>>, Option<Vec<usize>>)> {
    let eval = cli
        .dmu_eval
        .as_ref()
        .map(|t| parse_ranges(t, "dmu-eval"))
        .transpose()?;
    let refs = cli
        .dmu_ref
        .as_ref()
        .map(|t| parse_ranges(t, "dmu-ref"))
        .transpose()?;
    Ok((eval, refs))
}

fn basic_options(cli: &Cli) -> CliResult<BasicOptions> {
    let (dmu_eval, dmu_ref) = dmu_sets(cli)?;
    Ok(BasicOptions {
        orientation: orientation_of(cli.orientation, Orientation::Io),
        rts: rts_of(cli)?,
        dmu_eval,
        dmu_ref,
        maxslack: !cli.no_maxslack,
        weight_slack_i: param_or_one(&cli.weight_slack_i, "weight-slack-i")?,
        weight_slack_o: param_or_one(&cli.weight_slack_o, "weight-slack-o")?,
        dir_input: opt_param(&cli.dir_input, "dir-input")?,
        dir_output: opt_param(&cli.dir_output, "dir-output")?,
        vtrans_i: cli
            .vtrans_i
            .as_ref()
            .map(|t| parse_vtrans(t, "vtrans-i"))
            .transpose()?,
        vtrans_o: cli
            .vtrans_o
            .as_ref()
            .map(|t| parse_vtrans(t, "vtrans-o"))
            .transpose()?,
    })
}

fn load_maxfr(cli: &Cli, data: &DeaData) -> CliResult<Option<FacetSet>> {
    match &cli.maxfr_in {
        None => Ok(None),
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
            let labels: Vec<Vec<String>> =
                serde_json::from_str(&text).map_err(|e| invalid(e.to_string()))?;
            Ok(Some(
                FacetSet::from_labels(&labels, data).map_err(CliError::from)?,
            ))
        }
    }
}

fn crisp_spec(cli: &Cli, model: ModelArg, data: &DeaData) -> CliResult<ModelSpec> {
    let (dmu_eval, dmu_ref) = dmu_sets(cli)?;
    let rts = rts_of(cli)?;
    let spec = match model {
        ModelArg::Basic => ModelSpec::Basic(basic_options(cli)?),
        ModelArg::Fdh => ModelSpec::Fdh(FdhOptions {
            orientation: orientation_of(cli.orientation, Orientation::Io),
            dmu_eval,
            dmu_ref,
            maxslack: !cli.no_maxslack,
            weight_slack_i: param_or_one(&cli.weight_slack_i, "weight-slack-i")?,
            weight_slack_o: param_or_one(&cli.weight_slack_o, "weight-slack-o")?,
            dir_input: opt_param(&cli.dir_input, "dir-input")?,
            dir_output: opt_param(&cli.dir_output, "dir-output")?,
        }),
        ModelArg::Rdm => ModelSpec::Rdm(RdmOptions {
            orientation: orientation_of(cli.orientation, Orientation::No),
            irdm: cli.irdm,
            dmu_eval,
            dmu_ref,
            maxslack: !cli.no_maxslack,
            weight_slack_i: param_or_one(&cli.weight_slack_i, "weight-slack-i")?,
            weight_slack_o: param_or_one(&cli.weight_slack_o, "weight-slack-o")?,
        }),
        ModelArg::Multiplier => ModelSpec::Multiplier(MultiplierOptions {
            orientation: orientation_of(cli.orientation, Orientation::Io),
            rts,
            epsilon: cli.epsilon.unwrap_or(0.0),
            dmu_eval,
            dmu_ref,
        }),
        ModelArg::Nonradial => ModelSpec::Nonradial(NonradialOptions {
            orientation: orientation_of(cli.orientation, Orientation::Io),
            rts,
            dmu_eval,
            dmu_ref,
            maxslack: !cli.no_maxslack,
            weight_slack: param_or_one(&cli.weight_slack, "weight-slack")?,
        }),
        ModelArg::Deaps => ModelSpec::Deaps(DeapsOptions {
            orientation: orientation_of(cli.orientation, Orientation::Io),
            rts,
            weight_eff: param_or_one(&cli.weight_eff, "weight-eff")?,
            restricted_eff: !cli.unrestricted,
            dmu_eval,
            dmu_ref,
            maxslack: !cli.no_maxslack,
            weight_slack: param_or_one(&cli.weight_slack, "weight-slack")?,
        }),
        ModelArg::Additive => ModelSpec::Additive(AdditiveOptions {
            rts,
            orientation: match cli.orientation {
                None | Some(OrientationArg::No) => None,
                Some(OrientationArg::Io) => Some(Orientation::Io),
                Some(OrientationArg::Oo) => Some(Orientation::Oo),
                Some(OrientationArg::Dir) => {
                    return Err(invalid("additive models take orientation io or oo"))
                }
            },
            weight_slack_i: param_or_one(&cli.weight_slack_i, "weight-slack-i")?,
            weight_slack_o: param_or_one(&cli.weight_slack_o, "weight-slack-o")?,
            dmu_eval,
            dmu_ref,
        }),
        ModelArg::Addmin => ModelSpec::Addmin(AddminOptions {
            rts,
            weight_slack_i: param_or_one(&cli.weight_slack_i, "weight-slack-i")?,
            weight_slack_o: param_or_one(&cli.weight_slack_o, "weight-slack-o")?,
            dmu_eval,
            dmu_ref,
            maxfr: load_maxfr(cli, data)?,
            silent: true,
        }),
        ModelArg::Sbmeff => ModelSpec::Sbmeff(SbmOptions {
            orientation: orientation_of(cli.orientation, Orientation::No),
            rts,
            weight_input: param_or_one(&cli.weight_input, "weight-input")?,
            weight_output: param_or_one(&cli.weight_output, "weight-output")?,
            kaizen: cli.kaizen,
            maxfr: load_maxfr(cli, data)?,
            silent: true,
            dmu_eval,
            dmu_ref,
        }),
        ModelArg::Profit => ModelSpec::Profit(ProfitOptions {
            rts,
            price_input: opt_param(&cli.price_input, "price-input")?,
            price_output: opt_param(&cli.price_output, "price-output")?,
            restricted_optimal: !cli.unrestricted,
            dmu_eval,
            dmu_ref,
        }),
        ModelArg::Supereff => ModelSpec::Supereff(SupereffOptions {
            orientation: orientation_of(cli.orientation, Orientation::Io),
            rts,
            dmu_eval,
            dmu_ref,
            maxslack: !cli.no_maxslack,
            weight_slack_i: param_or_one(&cli.weight_slack_i, "weight-slack-i")?,
            weight_slack_o: param_or_one(&cli.weight_slack_o, "weight-slack-o")?,
        }),
        ModelArg::Sbmsupereff => ModelSpec::SbmSupereff(SbmSupereffOptions {
            orientation: orientation_of(cli.orientation, Orientation::No),
            rts,
            weight_slack_i: param_or_one(&cli.weight_slack_i, "weight-slack-i")?,
            weight_slack_o: param_or_one(&cli.weight_slack_o, "weight-slack-o")?,
            dmu_eval,
            dmu_ref,
        }),
        ModelArg::Addsupereff => ModelSpec::AddSupereff(AddSupereffOptions {
            orientation: orientation_of(cli.orientation, Orientation::No),
            rts,
            weight_slack_i: opt_param(&cli.weight_slack_i, "weight-slack-i")?,
            weight_slack_o: opt_param(&cli.weight_slack_o, "weight-slack-o")?,
            dmu_eval,
            dmu_ref,
        }),
        other => return Err(invalid(format!("{other:?} is not a crisp per-DMU model"))),
    };
    Ok(spec)
}

// ---------------------------------------------------------------------------
// Output
// ---------------------------------------------------------------------------

fn out_stem(cli: &Cli) -> PathBuf {
    cli.out
        .clone()
        .unwrap_or_else(|| PathBuf::from(default_export_stem()))
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn write_json<T: serde::Serialize>(cli: &Cli, value: &T) -> CliResult<()> {
    let path = out_stem(cli).with_extension("json");
    let text = serde_json::to_string_pretty(value).map_err(|e| invalid(e.to_string()))?;
    write_text(&path, &text)
}

fn fmt_opt(v: &Option<f64>) -> String {
    match v {
        Some(x) => format!("{x}"),
        None => "NA".into(),
    }
}

fn print_scores(result: &DeaResult) {
    println!(
        "model: {} ({}, {})",
        result.modelname, result.orientation, result.rts
    );
    for rec in &result.records {
        println!("{}\t{}", rec.name, fmt_opt(&rec.efficiency));
    }
}

fn emit_dea_result(cli: &Cli, result: &DeaResult) -> CliResult<()> {
    if cli.emit_dot {
        print!("{}", reference_graph_dot(result).map_err(CliError::from)?);
    } else {
        print_scores(result);
    }
    let format = match cli.format {
        Some(FormatArg::Json) => Some(ExportFormat::Json),
        Some(FormatArg::Csv) => Some(ExportFormat::Csv),
        None if cli.out.is_some() => Some(ExportFormat::Json),
        None => None,
    };
    if let Some(format) = format {
        let paths = summary_export(result, format, Some(&out_stem(cli)), cli.split)?;
        for p in paths {
            println!("wrote {}", p.display());
        }
    }
    Ok(())
}

fn cross_csv(res: &CrossEffResult) -> String {
    let mut out = String::from("method,rater,rated,value\n");
    let methods: [(&str, Option<&dea_core::model::cross::CrossMethod>); 5] = [
        ("arbitrary", Some(&res.arbitrary)),
        ("m2_agg", res.m2_agg.as_ref()),
        ("m2_ben", res.m2_ben.as_ref()),
        ("m3_agg", res.m3_agg.as_ref()),
        ("m3_ben", res.m3_ben.as_ref()),
    ];
    for (name, method) in methods {
        let Some(method) = method else { continue };
        for (e, row) in method.cross_eff.iter().enumerate() {
            for (k, v) in row.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "{name},{},{},{}",
                    res.dmu_eval_names[e],
                    res.dmu_ref_names[k],
                    fmt_opt(v)
                );
            }
        }
    }
    out
}

fn fuzzy_csv(res: &FuzzyDeaResult) -> String {
    let mut out = String::from("dmu,alpha,lower,upper\n");
    for (dmu, alpha, lo, hi) in res.efficiency_bands() {
        let _ = writeln!(out, "{dmu},{alpha},{},{}", fmt_opt(&lo), fmt_opt(&hi));
    }
    out
}

fn malmquist_csv(res: &MalmquistResult) -> String {
    let mut out = String::from("dmu,period,index,value\n");
    let tables: [(&str, Option<&Vec<Vec<Option<f64>>>>); 8] = [
        ("mi", Some(&res.mi)),
        ("ec", res.ec.as_ref()),
        ("tc", Some(&res.tc)),
        ("pech", res.pech.as_ref()),
        ("sech", res.sech.as_ref()),
        ("matech", res.matech.as_ref()),
        ("obtech", res.obtech.as_ref()),
        ("ibtech", res.ibtech.as_ref()),
    ];
    for (name, table) in tables {
        let Some(table) = table else { continue };
        for (e, row) in table.iter().enumerate() {
            let dmu = &res.dmunames[res.dmu_eval[e]];
            for (t, v) in row.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "{dmu},{}->{},{name},{}",
                    res.period_labels[t],
                    res.period_labels[t + 1],
                    fmt_opt(v)
                );
            }
        }
    }
    out
}

fn bootstrap_csv(res: &BootstrapResult) -> String {
    let mut out = String::from("dmu,score,score_bc,bias,ci_low,ci_up,failures\n");
    for (e, &o) in res.dmu_eval.iter().enumerate() {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            res.dmunames[o],
            res.score[e],
            fmt_opt(&res.score_bc[e]),
            fmt_opt(&res.bias[e]),
            fmt_opt(&res.ci_low[e]),
            fmt_opt(&res.ci_up[e]),
            res.failures[e]
        );
    }
    out
}

fn metafrontier_csv(res: &MetafrontierResult) -> String {
    let mut out = String::from("dmu");
    for name in &res.grouping.names {
        let _ = write!(out, ",vs_{name}");
    }
    out.push_str(",nonconcave,concave\n");
    let mut row_at = 0usize;
    for (eg, group) in res.grouping.groups.iter().enumerate() {
        for (pos, &j) in group.iter().enumerate() {
            out.push_str(&res.dmunames[j]);
            for rg in 0..res.grouping.groups.len() {
                let _ = write!(out, ",{}", fmt_opt(&res.blocks[eg][rg][pos]));
            }
            let _ = writeln!(
                out,
                ",{},{}",
                fmt_opt(&res.nonconcave[row_at]),
                fmt_opt(&res.concave[row_at])
            );
            row_at += 1;
        }
    }
    out
}

fn emit_csv_or_json<T: serde::Serialize>(
    cli: &Cli,
    value: &T,
    csv: impl FnOnce() -> String,
) -> CliResult<()> {
    match cli.format {
        Some(FormatArg::Csv) => {
            let path = out_stem(cli).with_extension("csv");
            write_text(&path, &csv())
        }
        Some(FormatArg::Json) => write_json(cli, value),
        None => {
            if cli.out.is_some() {
                write_json(cli, value)
            } else {
                Ok(())
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Dispatch
// ---------------------------------------------------------------------------

fn run(cli: &Cli) -> CliResult<()> {
    match cli.model {
        ModelArg::Malmquist => run_malmquist(cli),
        ModelArg::Bootstrap => run_bootstrap(cli),
        ModelArg::Metafrontier => run_metafrontier(cli),
        ModelArg::Cross => run_cross(cli),
        ModelArg::Kaoliu => run_kaoliu(cli),
        _ => run_crisp(cli),
    }
}

fn run_crisp(cli: &Cli) -> CliResult<()> {
    let data = load_crisp(cli)?;
    if cli.emit_lp {
        return emit_lp(cli, &data);
    }
    if let Some(path) = &cli.maxfr_out {
        let facets = dea_core::frontier::maximal_friends(
            &data,
            &rts_of(cli)?,
            dmu_sets(cli)?.1.as_deref(),
            true,
        )
        .map_err(CliError::from)?;
        let text = serde_json::to_string_pretty(&facets.to_labels(&data))
            .map_err(|e| invalid(e.to_string()))?;
        write_text(path, &text)?;
    }
    let spec = crisp_spec(cli, cli.model, &data)?;
    let result = run_model(&data, &spec).map_err(CliError::from)?;
    emit_dea_result(cli, &result)
}

fn emit_lp(cli: &Cli, data: &DeaData) -> CliResult<()> {
    let programs = match cli.model {
        ModelArg::Basic => dea_core::model::radial::model_basic_lp(data, &basic_options(cli)?)
            .map_err(CliError::from)?,
        ModelArg::Multiplier => {
            let ModelSpec::Multiplier(opts) = crisp_spec(cli, ModelArg::Multiplier, data)? else {
                unreachable!()
            };
            dea_core::model::multiplier::model_multiplier_lp(data, &opts).map_err(CliError::from)?
        }
        ModelArg::Deaps => {
            let ModelSpec::Deaps(opts) = crisp_spec(cli, ModelArg::Deaps, data)? else {
                unreachable!()
            };
            dea_core::model::nonradial::model_deaps_lp(data, &opts).map_err(CliError::from)?
        }
        ModelArg::Additive => {
            let ModelSpec::Additive(opts) = crisp_spec(cli, ModelArg::Additive, data)? else {
                unreachable!()
            };
            dea_core::model::additive::model_additive_lp(data, &opts).map_err(CliError::from)?
        }
        other => {
            return Err(invalid(format!(
                "--emit-lp supports basic, multiplier, deaps and additive, not {other:?}"
            )))
        }
    };
    for (name, lp) in programs {
        println!("# {name}");
        print!("{}", lp.dump());
    }
    Ok(())
}

fn run_cross(cli: &Cli) -> CliResult<()> {
    let data = load_crisp(cli)?;
    let (dmu_eval, dmu_ref) = dmu_sets(cli)?;
    let res = cross_efficiency(
        &data,
        &CrossEffOptions {
            orientation: orientation_of(cli.orientation, Orientation::Io),
            rts: rts_of(cli)?,
            epsilon: cli.epsilon.unwrap_or(0.0),
            selfapp: !cli.no_selfapp,
            correction: cli.correction,
            m2: !cli.no_m2,
            m3: !cli.no_m3,
            dmu_eval,
            dmu_ref,
        },
    )
    .map_err(CliError::from)?;
    println!("cross-efficiency scores (arbitrary):");
    for (k, v) in res.dmu_ref_names.iter().zip(res.arbitrary.e.iter()) {
        println!("{k}\t{}", fmt_opt(v));
    }
    emit_csv_or_json(cli, &res, || cross_csv(&res))
}

fn run_kaoliu(cli: &Cli) -> CliResult<()> {
    let table = load_table(cli)?;
    let layout = FuzzyTableLayout {
        dmu_col: cli.dmu_col.as_deref().map(parse_col_ref),
        inputs: fuzzy_side(
            &cli.inputs_ml,
            &cli.inputs_mr,
            &cli.inputs_dl,
            &cli.inputs_dr,
            "inputs",
        )?,
        outputs: fuzzy_side(
            &cli.outputs_ml,
            &cli.outputs_mr,
            &cli.outputs_dl,
            &cli.outputs_dr,
            "outputs",
        )?,
    };
    let fuzzy = make_deadata_fuzzy(&table, &layout, special_sets(cli)?).map_err(CliError::from)?;
    let sub_name = cli
        .kaoliu_model
        .as_deref()
        .ok_or_else(|| invalid("--kaoliu-model is required with --model kaoliu"))?;
    let sub_arg = match sub_name {
        "basic" => ModelArg::Basic,
        "fdh" => ModelArg::Fdh,
        "rdm" => ModelArg::Rdm,
        "multiplier" => ModelArg::Multiplier,
        "nonradial" => ModelArg::Nonradial,
        "deaps" => ModelArg::Deaps,
        "additive" => ModelArg::Additive,
        "sbmeff" => ModelArg::Sbmeff,
        "profit" => ModelArg::Profit,
        "supereff" => ModelArg::Supereff,
        "sbmsupereff" => ModelArg::Sbmsupereff,
        "addsupereff" => ModelArg::Addsupereff,
        other => return Err(invalid(format!("unknown kaoliu submodel '{other}'"))),
    };
    // The submodel spec is built against the modal-value dataset; the fuzzy
    // driver swaps in scenario data and evaluation sets per run.
    let placeholder = DeaData::new(
        fuzzy.input.ml.clone(),
        fuzzy.output.ml.clone(),
        Some(fuzzy.dmunames.clone()),
        Some(fuzzy.input_names.clone()),
        Some(fuzzy.output_names.clone()),
        fuzzy.special.clone(),
    )
    .map_err(CliError::from)?;
    let spec = crisp_spec(cli, sub_arg, &placeholder)?;
    let (dmu_eval, dmu_ref) = dmu_sets(cli)?;
    let alpha = match &cli.alpha {
        Some(t) => parse_alpha(t)?,
        None => AlphaSpec::Cuts(vec![1.0]),
    };
    let res = modelfuzzy_kaoliu(
        &fuzzy,
        &spec,
        &KaoLiuOptions {
            alpha,
            dmu_eval,
            dmu_ref,
        },
    )
    .map_err(CliError::from)?;
    println!("fuzzy efficiency bands (dmu, alpha, lower, upper):");
    for (dmu, alpha, lo, hi) in res.efficiency_bands() {
        println!("{dmu}\t{alpha}\t{}\t{}", fmt_opt(&lo), fmt_opt(&hi));
    }
    emit_csv_or_json(cli, &res, || fuzzy_csv(&res))
}

fn run_malmquist(cli: &Cli) -> CliResult<()> {
    let table = load_table(cli)?;
    let dmu_col = cli.dmu_col.as_deref().map(parse_col_ref);
    let layout = match cli.arrangement {
        ArrangementArg::Horizontal => {
            let nper = cli
                .nper
                .ok_or_else(|| invalid("--nper is required for horizontal panels"))?;
            let (ni, no) = match (cli.ni, cli.n_outputs) {
                (Some(ni), Some(no)) => (ni, no),
                _ => return Err(invalid("--ni and --no are required for horizontal panels")),
            };
            MalmquistLayout::Wide {
                dmu_col,
                nper,
                ni,
                no,
            }
        }
        ArrangementArg::Vertical => {
            let percol = cli
                .percol
                .as_deref()
                .map(parse_col_ref)
                .ok_or_else(|| invalid("--percol is required for vertical panels"))?;
            MalmquistLayout::Long {
                dmu_col,
                period_col: percol,
                inputs: colspec(cli.ni, &cli.inputs, "inputs")?,
                outputs: colspec(cli.n_outputs, &cli.outputs, "outputs")?,
            }
        }
    };
    let series = make_malmquist(&table, &layout).map_err(CliError::from)?;
    let (dmu_eval, dmu_ref) = dmu_sets(cli)?;
    let res = malmquist_index(
        &series,
        &MalmquistOptions {
            orientation: orientation_of(cli.orientation, Orientation::Io),
            rts: rts_of(cli)?,
            type1: match cli.type1 {
                Type1Arg::Cont => FrontierScope::Cont,
                Type1Arg::Seq => FrontierScope::Seq,
                Type1Arg::Glob => FrontierScope::Glob,
            },
            type2: match cli.type2 {
                Type2Arg::Fgnz => Decomposition::Fgnz,
                Type2Arg::Rd => Decomposition::Rd,
                Type2Arg::Gl => Decomposition::Gl,
                Type2Arg::Bias => Decomposition::Bias,
            },
            tc_vrs: cli.tc_vrs,
            dmu_eval,
            dmu_ref,
        },
    )
    .map_err(CliError::from)?;
    println!("malmquist index (dmu, transition, mi):");
    for (e, row) in res.mi.iter().enumerate() {
        let dmu = &res.dmunames[res.dmu_eval[e]];
        for (t, v) in row.iter().enumerate() {
            println!(
                "{dmu}\t{}->{}\t{}",
                res.period_labels[t],
                res.period_labels[t + 1],
                fmt_opt(v)
            );
        }
    }
    emit_csv_or_json(cli, &res, || malmquist_csv(&res))
}

fn run_bootstrap(cli: &Cli) -> CliResult<()> {
    let data = load_crisp(cli)?;
    let res = bootstrap_basic(
        &data,
        &BootstrapOptions {
            orientation: orientation_of(cli.orientation, Orientation::Io),
            rts: rts_of(cli)?,
            b: cli.b,
            alpha: cli.ci_alpha,
            bandwidth: parse_bandwidth(&cli.bandwidth)?,
            seed: cli.seed,
        },
    )
    .map_err(CliError::from)?;
    println!("bootstrap (dmu, score, score_bc, ci_low, ci_up):");
    for (e, &o) in res.dmu_eval.iter().enumerate() {
        println!(
            "{}\t{}\t{}\t{}\t{}",
            res.dmunames[o],
            res.score[e],
            fmt_opt(&res.score_bc[e]),
            fmt_opt(&res.ci_low[e]),
            fmt_opt(&res.ci_up[e])
        );
    }
    if let Some(path) = &cli.estimates_out {
        let mut text = String::from("replication");
        for &o in &res.dmu_eval {
            let _ = write!(text, ",{}", res.dmunames[o]);
        }
        text.push('\n');
        for (bi, row) in res.estimates_bootstrap.iter().enumerate() {
            let _ = write!(text, "{}", bi + 1);
            for v in row {
                let _ = write!(text, ",{}", fmt_opt(v));
            }
            text.push('\n');
        }
        write_text(path, &text)?;
    }
    emit_csv_or_json(cli, &res, || bootstrap_csv(&res))
}

fn run_metafrontier(cli: &Cli) -> CliResult<()> {
    let data = load_crisp(cli)?;
    let groups = cli
        .groups
        .as_deref()
        .ok_or_else(|| invalid("--groups is required with --model metafrontier"))?;
    let grouping = parse_groups(groups)?;
    let mut opts = basic_options(cli)?;
    opts.dmu_eval = None;
    opts.dmu_ref = None;
    let res = metafrontier(&data, &grouping, &opts).map_err(CliError::from)?;
    println!("metafrontier (dmu, nonconcave, concave):");
    for (row, &j) in res.dmu_order.iter().enumerate() {
        println!(
            "{}\t{}\t{}",
            res.dmunames[j],
            fmt_opt(&res.nonconcave[row]),
            fmt_opt(&res.concave[row])
        );
    }
    emit_csv_or_json(cli, &res, || metafrontier_csv(&res))
}
