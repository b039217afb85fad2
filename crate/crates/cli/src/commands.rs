// SPDX-License-Identifier: MIT OR Apache-2.0

//! Subcommand implementations.

use crate::input::{read_all, read_series};
use crate::report::{
    finite, to_json, ChangePointReport, CommonReport, CommonResultReport, IntervalReport,
    ModelReport, PhiEstimateReport, PhiReport, ProbEntry, SegmentReport, SeriesRef, ShiftReport,
    LOG10_E,
};
use crate::{CliError, Family, Format, ModelArgs, OutputArgs};
use ebcp::comparison::{posterior_common, shift_credible_interval, shift_posterior, CommonChangePointQuery};
use ebcp::dispersion::estimate_dispersion_with;
use ebcp::emission::{BetaPrior, GammaPrior, NigPrior, NormalPrior};
use ebcp::segmentation::{changepoint_posterior, credible_interval, log_evidence, PowerTables, SegmentMatrix};
use ebcp::simulation::{run_abacus, write_abacus_csv, SimulationConfig, SimulationFamily};
use ebcp::{Model, Series, Tables};
use std::path::Path;

fn write_output(output: &OutputArgs, content: &str) -> Result<(), CliError> {
    match &output.out {
        Some(path) => std::fs::write(path, content)
            .map_err(|e| CliError::input(format!("{}: {e}", path.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

/// Emission model for one series, estimating φ from the data when asked.
fn build_model(args: &ModelArgs, series: &Series) -> Result<(Model, ModelReport), CliError> {
    match args.model {
        Family::Nb => {
            let prior = BetaPrior {
                alpha: args.prior_a.unwrap_or(0.5),
                beta: args.prior_b.unwrap_or(0.5),
            };
            let phi = match (args.phi, args.estimate_phi) {
                (Some(phi), _) => phi,
                (None, true) => {
                    let est = estimate_dispersion_with(series, 15)?;
                    est.phi_hat.ok_or_else(|| {
                        CliError::input(format!(
                            "series '{}': dispersion estimator fell back (window {}); the data \
                             look Poisson-or-less dispersed, use --model poisson",
                            series.label(),
                            est.window_used
                        ))
                    })?
                }
                (None, false) => {
                    return Err(CliError::input(
                        "--model nb needs --phi or --estimate-phi".into(),
                    ))
                }
            };
            let model = Model::neg_binomial_with(phi, prior)?;
            let report = ModelReport {
                family: "nb".into(),
                phi: Some(phi),
                sigma2: None,
                prior: vec![prior.alpha, prior.beta],
            };
            Ok((model, report))
        }
        Family::Poisson => {
            let prior = GammaPrior {
                shape: args.prior_a.unwrap_or(0.5),
                rate: args.prior_b.unwrap_or(0.5),
            };
            let model = Model::poisson_with(prior)?;
            let report = ModelReport {
                family: "poisson".into(),
                phi: None,
                sigma2: None,
                prior: vec![prior.shape, prior.rate],
            };
            Ok((model, report))
        }
        Family::GaussKnownVar => {
            let sigma2 = args
                .sigma2
                .ok_or_else(|| CliError::input("--model gauss-known-var needs --sigma2".into()))?;
            let prior = NormalPrior {
                mu0: args.prior_mu0.unwrap_or(0.0),
                v0: args.prior_v0.unwrap_or(1.0),
            };
            let model = Model::gaussian_known_variance_with(sigma2, prior)?;
            let report = ModelReport {
                family: "gauss-known-var".into(),
                phi: None,
                sigma2: Some(sigma2),
                prior: vec![prior.mu0, prior.v0],
            };
            Ok((model, report))
        }
        Family::GaussHetero => {
            let prior = NigPrior {
                mu0: args.prior_mu0.unwrap_or(0.0),
                v0: args.prior_v0.unwrap_or(1.0),
                a0: args.prior_a0.unwrap_or(0.5),
                b0: args.prior_b0.unwrap_or(0.5),
            };
            let model = Model::gaussian_heteroscedastic_with(prior)?;
            let report = ModelReport {
                family: "gauss-hetero".into(),
                phi: None,
                sigma2: None,
                prior: vec![prior.mu0, prior.v0, prior.a0, prior.b0],
            };
            Ok((model, report))
        }
    }
}

fn build_tables(series: &Series, model: &Model, big_k: usize) -> Result<Tables, CliError> {
    let matrix = SegmentMatrix::build(series, model)?;
    Ok(PowerTables::build(&matrix, big_k)?)
}

fn prob_entries<I: Iterator<Item = (i64, f64)>>(iter: I) -> Vec<ProbEntry> {
    iter.filter(|&(_, p)| p > 0.0)
        .map(|(at, p)| ProbEntry {
            at,
            p,
            log10_p: finite(p.ln() * LOG10_E),
        })
        .collect()
}

/// Broadcast a per-series argument: one value for all, or one per series.
fn broadcast(vals: &[usize], count: usize, what: &str) -> Result<Vec<usize>, CliError> {
    match vals.len() {
        1 => Ok(vec![vals[0]; count]),
        n if n == count => Ok(vals.to_vec()),
        n => Err(CliError::input(format!(
            "{what}: expected 1 or {count} value(s), got {n}"
        ))),
    }
}

pub fn segment(
    input: &Path,
    big_k: usize,
    level: f64,
    model_args: &ModelArgs,
    output: &OutputArgs,
) -> Result<(), CliError> {
    let mut series = read_series(input)?;
    if series.len() != 1 {
        return Err(CliError::input(format!(
            "{}: contains {} series; segment expects exactly one column",
            input.display(),
            series.len()
        )));
    }
    let series = series.remove(0);
    let (model, model_report) = build_model(model_args, &series)?;
    let tables = build_tables(&series, &model, big_k)?;
    let ev = log_evidence(&tables);

    let mut changepoints = Vec::with_capacity(big_k.saturating_sub(1));
    for k in 1..big_k {
        let post = changepoint_posterior(&tables, k)?;
        let ci = credible_interval(&post, level)?;
        changepoints.push(ChangePointReport {
            k,
            mode: post.mode() as i64,
            credible_interval: IntervalReport::from(ci),
            posterior: prob_entries(post.iter().map(|(t, p)| (t as i64, p))),
        });
    }

    let report = SegmentReport {
        command: "segment".into(),
        input: input.display().to_string(),
        series: series.label().to_string(),
        n: series.len(),
        segments: big_k,
        model: model_report,
        log_evidence_sum: ev.log_sum,
        log_partition_count: ev.log_partition_count,
        log_evidence: ev.log_prob(),
        changepoints,
    };

    match output.format {
        Format::Json => write_output(output, &to_json(&report)),
        Format::Csv => {
            let mut csv = String::from("k,t,p\n");
            for cp in &report.changepoints {
                for e in &cp.posterior {
                    csv.push_str(&format!("{},{},{}\n", cp.k, e.at, e.p));
                }
            }
            write_output(output, &csv)
        }
    }
}

pub fn compare_shift(
    inputs: &[std::path::PathBuf],
    segments: &[usize],
    indices: &[usize],
    level: f64,
    model_args: &ModelArgs,
    output: &OutputArgs,
) -> Result<(), CliError> {
    let series = read_all(inputs)?;
    if series.len() != 2 {
        return Err(CliError::input(format!(
            "compare-shift needs exactly 2 series, got {}",
            series.len()
        )));
    }
    let big_ks = broadcast(segments, 2, "--K")?;
    let ks = broadcast(indices, 2, "--k")?;

    let mut posteriors = Vec::new();
    let mut refs = Vec::new();
    for (((path, s), &big_k), &k) in series.iter().zip(&big_ks).zip(&ks) {
        let (model, _) = build_model(model_args, s)?;
        let tables = build_tables(s, &model, big_k)?;
        posteriors.push(changepoint_posterior(&tables, k)?);
        refs.push(SeriesRef {
            input: path.clone(),
            label: s.label().to_string(),
            big_k,
            k,
        });
    }

    let delta = shift_posterior(&posteriors[0], &posteriors[1])?;
    let si = shift_credible_interval(&delta, level)?;
    let report = ShiftReport {
        command: "compare-shift".into(),
        series: [refs[0].clone(), refs[1].clone()],
        n: delta.series_len(),
        shift: prob_entries(delta.iter()),
        credible_interval: IntervalReport::from(si.interval),
        contains_zero: si.contains_zero,
    };

    match output.format {
        Format::Json => write_output(output, &to_json(&report)),
        Format::Csv => {
            let mut csv = String::from("d,p\n");
            for e in &report.shift {
                csv.push_str(&format!("{},{}\n", e.at, e.p));
            }
            write_output(output, &csv)
        }
    }
}

/// `--p0` entries: plain value = global, `k=value` = override for index k.
fn parse_p0(entries: &[String]) -> Result<(f64, Vec<(usize, f64)>), CliError> {
    let mut global = 0.5;
    let mut overrides = Vec::new();
    for entry in entries {
        match entry.split_once('=') {
            Some((k, v)) => {
                let k: usize = k
                    .trim()
                    .parse()
                    .map_err(|_| CliError::input(format!("--p0 {entry}: bad index")))?;
                let v: f64 = v
                    .trim()
                    .parse()
                    .map_err(|_| CliError::input(format!("--p0 {entry}: bad value")))?;
                overrides.push((k, v));
            }
            None => {
                global = entry
                    .trim()
                    .parse()
                    .map_err(|_| CliError::input(format!("--p0 {entry}: bad value")))?;
            }
        }
    }
    Ok((global, overrides))
}

#[allow(clippy::too_many_arguments)]
pub fn compare_common(
    inputs: &[std::path::PathBuf],
    segments: &[usize],
    indices: &[usize],
    all_k: bool,
    p0_entries: &[String],
    model_args: &ModelArgs,
    output: &OutputArgs,
) -> Result<(), CliError> {
    let series = read_all(inputs)?;
    let count = series.len();
    if count < 2 {
        return Err(CliError::input(format!(
            "compare-common needs at least 2 series, got {count}"
        )));
    }
    let big_ks = broadcast(segments, count, "--K")?;
    let n = series[0].1.len();
    for (_, s) in &series {
        if s.len() != n {
            return Err(CliError::from_core(ebcp::Error::LengthMismatch {
                a: n,
                b: s.len(),
            }));
        }
    }
    let (p0_global, p0_overrides) = parse_p0(p0_entries)?;

    // one comparison per shared index under --all-k, or a single comparison
    // with per-series indices otherwise
    let k_sets: Vec<Vec<usize>> = if all_k {
        let min_k = big_ks.iter().min().unwrap();
        if *min_k < 2 {
            return Err(CliError::input("--all-k: smallest K leaves no change-points".into()));
        }
        (1..*min_k).map(|k| vec![k; count]).collect()
    } else {
        if indices.is_empty() {
            return Err(CliError::input("pass --k or --all-k".into()));
        }
        vec![broadcast(indices, count, "--k")?]
    };

    let mut tables = Vec::with_capacity(count);
    let mut refs = Vec::with_capacity(count);
    for ((path, s), &big_k) in series.iter().zip(&big_ks) {
        let (model, _) = build_model(model_args, s)?;
        tables.push(build_tables(s, &model, big_k)?);
        refs.push(SeriesRef {
            input: path.clone(),
            label: s.label().to_string(),
            big_k,
            k: 0,
        });
    }
    let table_refs: Vec<&Tables> = tables.iter().collect();

    let mut results = Vec::with_capacity(k_sets.len());
    for ks in &k_sets {
        let p0 = p0_overrides
            .iter()
            .find(|(k, _)| k == &ks[0])
            .map(|&(_, v)| v)
            .unwrap_or(p0_global);
        let specs: Vec<(usize, usize)> = big_ks.iter().copied().zip(ks.iter().copied()).collect();
        let query = CommonChangePointQuery::new(n, specs, p0)?;
        let res = posterior_common(&query, &table_refs)?;
        results.push(CommonResultReport {
            k: ks.clone(),
            p0,
            q0: res.q0,
            posterior_e0: res.posterior_e0,
            log10_posterior_e0: finite(res.log_posterior_e0 * LOG10_E),
            bayes_factor: finite(res.bayes_factor),
            bayes_factor_infinite: res.bayes_factor.is_infinite(),
            log10_bayes_factor: finite(res.bayes_factor.log10()),
            log_q_joint: res.log_q_joint,
            log_q_marg: res.log_q_marg,
        });
    }

    let report = CommonReport {
        command: "compare-common".into(),
        n,
        series: refs,
        results,
    };

    match output.format {
        Format::Json => write_output(output, &to_json(&report)),
        Format::Csv => {
            let mut csv = String::from("k,p0,q0,posterior_e0,bayes_factor\n");
            for r in &report.results {
                csv.push_str(&format!(
                    "{},{},{},{},{}\n",
                    r.k[0],
                    r.p0,
                    r.q0,
                    r.posterior_e0,
                    r.bayes_factor.map(|b| b.to_string()).unwrap_or_else(|| "inf".into()),
                ));
            }
            write_output(output, &csv)
        }
    }
}

pub fn estimate_phi(
    inputs: &[std::path::PathBuf],
    window: usize,
    output: &OutputArgs,
) -> Result<(), CliError> {
    let series = read_all(inputs)?;
    let mut reports = Vec::with_capacity(series.len());
    for (path, s) in &series {
        let est = estimate_dispersion_with(s, window)?;
        reports.push(PhiEstimateReport {
            input: path.clone(),
            label: s.label().to_string(),
            phi_hat: est.phi_hat,
            window_used: est.window_used,
            windows_evaluated: est.windows_evaluated,
            fallback_applied: est.fallback_applied,
        });
    }
    let report = PhiReport {
        command: "estimate-phi".into(),
        series: reports,
    };
    match output.format {
        Format::Json => write_output(output, &to_json(&report)),
        Format::Csv => {
            let mut csv = String::from(
                "input,label,phi_hat,window_used,windows_evaluated,fallback_applied\n",
            );
            for r in &report.series {
                csv.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    r.input,
                    r.label,
                    r.phi_hat.map(|p| p.to_string()).unwrap_or_default(),
                    r.window_used,
                    r.windows_evaluated,
                    r.fallback_applied
                ));
            }
            write_output(output, &csv)
        }
    }
}

#[allow(clippy::too_many_arguments)]
pub fn simulate(
    family: Family,
    p0_level: f64,
    lambda0: f64,
    phi: f64,
    odds_ratio: f64,
    replicates: usize,
    seed: u64,
    use_true_phi: bool,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let family = match family {
        Family::Nb => SimulationFamily::NegBinomial { p0: p0_level, phi },
        Family::Poisson => SimulationFamily::Poisson { lambda0 },
        _ => {
            return Err(CliError::input(
                "simulate supports --family nb or poisson".into(),
            ))
        }
    };
    let config = SimulationConfig {
        family,
        odds_ratio,
        replicates,
        seed,
        use_true_phi,
    };
    let rows = run_abacus(&config)?;
    let mut buf = Vec::new();
    write_abacus_csv(&mut buf, &config, &rows)
        .map_err(|e| CliError::input(format!("write failed: {e}")))?;
    let csv = String::from_utf8(buf).expect("csv is utf-8");
    match out {
        Some(path) => std::fs::write(path, csv)
            .map_err(|e| CliError::input(format!("{}: {e}", path.display()))),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}
