//! Smoothed-bootstrap bias correction and confidence intervals for basic
//! radial scores.
//!
//! Replications resample the score vector, smooth it with a Gaussian kernel
//! reflected about 1, apply the variance correction, rescale the data onto
//! the perturbed frontier and re-solve the radial model. Every replication
//! draws from its own counter-derived RNG stream, so results are identical
//! for any thread count.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::data::DeaData;
use crate::error::{DeaError, Result};
use crate::model::radial::{model_basic, radial_distance, BasicOptions};
use crate::model::{Orientation, Rts};

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "rule", rename_all = "lowercase")]
pub enum BandwidthRule {
    Fixed { h: f64 },
    H1,
    H2,
    H3,
    H4,
}

/// Sample standard deviation (n-1 denominator).
fn sd(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    var.sqrt()
}

/// Linear-interpolation quantile on a sorted sample (R's default type 7).
fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n as f64 - 1.0) * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
    }
}

fn iqr(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25)
}

/// Smoothing bandwidth for a score sample. The data-driven rules work on the
/// sample reflected about 1; `h2` swaps the 1.06 factor for 0.9, `h3` adds
/// the scale and sample-size adjustment, and `h4` is the Gaussian
/// kernel-density default on the raw scores.
pub fn bandwidth(scores: &[f64], rule: &BandwidthRule) -> Result<f64> {
    let h = match rule {
        BandwidthRule::Fixed { h } => *h,
        BandwidthRule::H1 | BandwidthRule::H2 | BandwidthRule::H3 => {
            if scores.len() < 2 {
                return Err(DeaError::InvalidParameter(
                    "data-driven bandwidth rules need at least two scores".into(),
                ));
            }
            let reflected: Vec<f64> = scores
                .iter()
                .copied()
                .chain(scores.iter().map(|v| 2.0 - v))
                .collect();
            let spread = sd(&reflected).min(iqr(&reflected) / 1.349);
            let factor = if matches!(rule, BandwidthRule::H2) {
                0.9
            } else {
                1.06
            };
            let base = factor * spread * (reflected.len() as f64).powf(-0.2);
            if matches!(rule, BandwidthRule::H3) {
                // Adjust for sample size (the rule saw 2n points) and scale.
                base * 2f64.powf(0.2) * sd(scores) / sd(&reflected)
            } else {
                base
            }
        }
        BandwidthRule::H4 => {
            if scores.len() < 2 {
                return Err(DeaError::InvalidParameter(
                    "data-driven bandwidth rules need at least two scores".into(),
                ));
            }
            // bw.nrd0: 0.9 min(sd, IQR/1.34) n^(-1/5) with its fallbacks.
            let s = sd(scores);
            let i = iqr(scores) / 1.34;
            let mut spread = s.min(if i > 0.0 { i } else { f64::INFINITY });
            if spread == 0.0 {
                spread = scores[0].abs().max(1.0);
            }
            0.9 * spread * (scores.len() as f64).powf(-0.2)
        }
    };
    if !(h > 0.0) || !h.is_finite() {
        return Err(DeaError::InvalidParameter(format!(
            "nonpositive bandwidth {h}"
        )));
    }
    Ok(h)
}

#[derive(Clone, Debug)]
pub struct BootstrapOptions {
    pub orientation: Orientation,
    pub rts: Rts,
    /// Number of bootstrap replications.
    pub b: usize,
    /// Confidence level parameter; intervals cover 1 - alpha.
    pub alpha: f64,
    pub bandwidth: BandwidthRule,
    pub seed: u64,
}

impl Default for BootstrapOptions {
    fn default() -> Self {
        BootstrapOptions {
            orientation: Orientation::Io,
            rts: Rts::Crs,
            b: 2000,
            alpha: 0.05,
            bandwidth: BandwidthRule::Fixed { h: 0.014 },
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct BootstrapDescriptives {
    pub mean: Vec<Option<f64>>,
    pub variance: Vec<Option<f64>>,
    pub median: Vec<Option<f64>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct BootstrapResult {
    pub orientation: Orientation,
    pub rts: Rts,
    pub b: usize,
    pub alpha: f64,
    pub bandwidth_rule: BandwidthRule,
    pub realized_h: f64,
    pub seed: u64,
    pub dmunames: Vec<String>,
    pub dmu_eval: Vec<usize>,
    /// Original radial scores.
    pub score: Vec<f64>,
    /// Bias-corrected scores, `score - bias` exactly.
    pub score_bc: Vec<Option<f64>>,
    pub bias: Vec<Option<f64>>,
    pub descriptives: BootstrapDescriptives,
    pub ci_low: Vec<Option<f64>>,
    pub ci_up: Vec<Option<f64>>,
    /// Replication scores, `b` rows by evaluated DMUs.
    pub estimates_bootstrap: Vec<Vec<Option<f64>>>,
    /// Per-DMU count of failed replications, excluded from the statistics.
    pub failures: Vec<usize>,
}

/// Smoothed bootstrap of the basic radial model.
pub fn bootstrap_basic(data: &DeaData, opts: &BootstrapOptions) -> Result<BootstrapResult> {
    if opts.b < 1 {
        return Err(DeaError::InvalidParameter("B must be at least 1".into()));
    }
    if !(opts.alpha > 0.0 && opts.alpha < 1.0) {
        return Err(DeaError::InvalidParameter(
            "alpha must lie strictly between 0 and 1".into(),
        ));
    }
    let io = match opts.orientation {
        Orientation::Io => true,
        Orientation::Oo => false,
        _ => {
            return Err(DeaError::InvalidParameter(
                "bootstrap takes orientation io or oo".into(),
            ))
        }
    };
    let n = data.num_dmus();
    let dmu_eval: Vec<usize> = (0..n).collect();

    let base = model_basic(
        data,
        &BasicOptions {
            orientation: opts.orientation,
            rts: opts.rts,
            maxslack: false,
            ..Default::default()
        },
    )?;
    let score: Vec<f64> = base
        .records
        .iter()
        .map(|r| {
            r.efficiency.ok_or_else(|| {
                DeaError::InvalidData(format!("original score unavailable for DMU '{}'", r.name))
            })
        })
        .collect::<Result<_>>()?;
    let h = bandwidth(&score, &opts.bandwidth)?;
    let sigma2 = {
        let s = sd(&score);
        s * s
    };
    if sigma2 <= 0.0 {
        return Err(DeaError::InvalidParameter(
            "degenerate score sample: zero variance".into(),
        ));
    }

    let neval = dmu_eval.len();
    let m = data.num_inputs();
    let s_rows = data.num_outputs();

    let estimates: Vec<Vec<Option<f64>>> = (0..opts.b)
        .into_par_iter()
        .map(|bi| -> Result<Vec<Option<f64>>> {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(bi as u64 + 1);
            // Resample, smooth with reflection, variance-correct.
            let resampled: Vec<f64> = (0..neval)
                .map(|_| score[rng.random_range(0..neval)])
                .collect();
            let mean_res = resampled.iter().sum::<f64>() / neval as f64;
            let correction = 1.0 / (1.0 + h * h / sigma2).sqrt();
            let perturbed: Vec<f64> = resampled
                .iter()
                .map(|&v| {
                    let eps: f64 = rng.sample(StandardNormal);
                    let smoothed = v + h * eps;
                    let reflected = if io {
                        if smoothed > 1.0 {
                            2.0 - smoothed
                        } else {
                            smoothed
                        }
                    } else if smoothed < 1.0 {
                        2.0 - smoothed
                    } else {
                        smoothed
                    };
                    mean_res + (reflected - mean_res) * correction
                })
                .collect();
            if perturbed.iter().any(|&v| v <= 1e-9) {
                // A nonpositive pseudo-score cannot scale the frontier.
                return Ok(vec![None; neval]);
            }
            // Pseudo reference set on the perturbed frontier.
            let mut xref = data.input.select(ndarray::Axis(1), &dmu_eval);
            let mut yref = data.output.select(ndarray::Axis(1), &dmu_eval);
            for (e, _) in dmu_eval.iter().enumerate() {
                let factor = score[e] / perturbed[e];
                if io {
                    for i in 0..m {
                        xref[(i, e)] *= factor;
                    }
                } else {
                    for r in 0..s_rows {
                        yref[(r, e)] *= factor;
                    }
                }
            }
            let mut row = Vec::with_capacity(neval);
            for &o in &dmu_eval {
                let x0: Vec<f64> = data.input.column(o).to_vec();
                let y0: Vec<f64> = data.output.column(o).to_vec();
                row.push(radial_distance(&xref, &yref, &opts.rts, io, &x0, &y0)?);
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;

    let mut bias = vec![None; neval];
    let mut score_bc = vec![None; neval];
    let mut mean_v = vec![None; neval];
    let mut var_v = vec![None; neval];
    let mut median_v = vec![None; neval];
    let mut ci_low = vec![None; neval];
    let mut ci_up = vec![None; neval];
    let mut failures = vec![0usize; neval];
    for e in 0..neval {
        let draws: Vec<f64> = estimates.iter().filter_map(|row| row[e]).collect();
        failures[e] = opts.b - draws.len();
        if draws.is_empty() {
            continue;
        }
        let k = draws.len() as f64;
        let mean = draws.iter().sum::<f64>() / k;
        bias[e] = Some(mean - score[e]);
        score_bc[e] = Some(score[e] - (mean - score[e]));
        mean_v[e] = Some(mean);
        var_v[e] = Some(if draws.len() > 1 {
            draws.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0)
        } else {
            0.0
        });
        let mut sorted = draws.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        median_v[e] = Some(quantile_sorted(&sorted, 0.5));
        // Percentile interval on the deviations from the original score.
        let devs: Vec<f64> = sorted.iter().map(|v| v - score[e]).collect();
        ci_low[e] = Some(score[e] - quantile_sorted(&devs, 1.0 - opts.alpha / 2.0));
        ci_up[e] = Some(score[e] - quantile_sorted(&devs, opts.alpha / 2.0));
    }

    Ok(BootstrapResult {
        orientation: opts.orientation,
        rts: opts.rts,
        b: opts.b,
        alpha: opts.alpha,
        bandwidth_rule: opts.bandwidth.clone(),
        realized_h: h,
        seed: opts.seed,
        dmunames: data.dmunames.clone(),
        dmu_eval,
        score,
        score_bc,
        bias,
        descriptives: BootstrapDescriptives {
            mean: mean_v,
            variance: var_v,
            median: median_v,
        },
        ci_low,
        ci_up,
        estimates_bootstrap: estimates,
        failures,
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
    fn fixed_rule_returns_h() {
        assert_abs_diff_eq!(
            bandwidth(&[0.5, 0.8], &BandwidthRule::Fixed { h: 0.014 }).unwrap(),
            0.014,
            epsilon = 1e-15
        );
    }

    #[test]
    fn degenerate_sample_fails_h1() {
        // All-efficient scores reflect onto themselves: zero spread.
        let err = bandwidth(&[1.0, 1.0, 1.0], &BandwidthRule::H1);
        assert!(err.is_err());
    }

    #[test]
    fn h2_is_h1_rescaled() {
        let scores = [0.5, 0.7, 0.9, 1.0];
        let h1 = bandwidth(&scores, &BandwidthRule::H1).unwrap();
        let h2 = bandwidth(&scores, &BandwidthRule::H2).unwrap();
        assert_abs_diff_eq!(h2 / h1, 0.9 / 1.06, epsilon = 1e-12);
    }

    #[test]
    fn shape_and_exact_identities() {
        let res = bootstrap_basic(
            &m1(),
            &BootstrapOptions {
                b: 25,
                seed: 7,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(res.estimates_bootstrap.len(), 25);
        assert_eq!(res.estimates_bootstrap[0].len(), 4);
        for e in 0..4 {
            let (bc, bias) = (res.score_bc[e].unwrap(), res.bias[e].unwrap());
            assert_eq!(bc, res.score[e] - bias); // exact, not approximate
            assert!(res.ci_low[e].unwrap() <= res.ci_up[e].unwrap() + 1e-15);
        }
    }

    #[test]
    fn single_replication_degenerates() {
        let res = bootstrap_basic(
            &m1(),
            &BootstrapOptions {
                b: 1,
                seed: 3,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(res.estimates_bootstrap.len(), 1);
        for e in 0..4 {
            if res.estimates_bootstrap[0][e].is_some() {
                assert_abs_diff_eq!(
                    res.ci_low[e].unwrap(),
                    res.ci_up[e].unwrap(),
                    epsilon = 1e-12
                );
            }
        }
    }

    #[test]
    fn same_seed_same_bits() {
        let opts = BootstrapOptions {
            b: 40,
            seed: 42,
            ..Default::default()
        };
        let a = bootstrap_basic(&m1(), &opts).unwrap();
        let b = bootstrap_basic(&m1(), &opts).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn thread_count_invariance() {
        let opts = BootstrapOptions {
            b: 32,
            seed: 11,
            ..Default::default()
        };
        let pool1 = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let pool8 = rayon::ThreadPoolBuilder::new()
            .num_threads(8)
            .build()
            .unwrap();
        let a = pool1.install(|| bootstrap_basic(&m1(), &opts)).unwrap();
        let b = pool8.install(|| bootstrap_basic(&m1(), &opts)).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }
}
