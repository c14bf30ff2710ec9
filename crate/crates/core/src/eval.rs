//! Masking protocols, nRMSE scoring and the experiment runner.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::Rng;

use crate::config::Config;
use crate::data::{CellIndex, Dataset, MaskSet, MaskStrategy};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::impute::{impute, MethodVariant};
use crate::io::fmt_decimal;
use crate::seed;

const MAX_REDRAW_ROUNDS: u64 = 64;

/// Masks each observed cell independently with probability `rate`.
///
/// The draw for a cell depends only on `(seed, visit, event, feature)`. If a
/// visit would lose every observation its cells are redrawn; should that keep
/// failing, the cell with the largest draw is kept.
pub fn mask_random(dataset: &Dataset, rate: f64, seed: u64) -> Result<MaskSet> {
    if !(0.0..=1.0).contains(&rate) {
        return Err(Error::Config(format!("mask rate must be in [0, 1], got {rate}")));
    }
    let mut entries = Vec::new();
    for (v, visit) in dataset.visits.iter().enumerate() {
        let observed: Vec<(CellIndex, f64)> = visit
            .events
            .iter()
            .enumerate()
            .flat_map(|(e, event)| {
                event
                    .values
                    .iter()
                    .enumerate()
                    .filter_map(move |(f, x)| x.map(|x| (CellIndex::new(v, e, f), x)))
            })
            .collect();
        if observed.is_empty() || rate == 0.0 {
            continue;
        }
        let draw = |cell: &CellIndex, round: u64| {
            seed::unit(
                seed,
                &[
                    seed::TAG_MASK,
                    cell.visit as u64,
                    cell.event as u64,
                    cell.feature as u64,
                    round,
                ],
            )
        };
        let mut chosen = None;
        for round in 0..MAX_REDRAW_ROUNDS {
            let masked: Vec<bool> = observed.iter().map(|(c, _)| draw(c, round) < rate).collect();
            if masked.iter().any(|m| !m) {
                chosen = Some(masked);
                break;
            }
        }
        let masked = chosen.unwrap_or_else(|| {
            let keep = (0..observed.len())
                .max_by(|&a, &b| draw(&observed[a].0, 0).total_cmp(&draw(&observed[b].0, 0)))
                .expect("visit has observations");
            (0..observed.len()).map(|i| i != keep).collect()
        });
        entries.extend(
            observed
                .into_iter()
                .zip(masked)
                .filter(|(_, m)| *m)
                .map(|(entry, _)| entry),
        );
    }
    Ok(MaskSet {
        entries,
        strategy: MaskStrategy::RandomRate(rate),
        seed,
    })
}

/// Masks exactly one observation of every (visit, feature) pair that has at
/// least two.
pub fn mask_one_per_feature_visit(dataset: &Dataset, seed: u64) -> MaskSet {
    let mut entries = Vec::new();
    for (v, visit) in dataset.visits.iter().enumerate() {
        for f in 0..dataset.n_features() {
            let obs: Vec<(usize, f64)> = visit
                .events
                .iter()
                .enumerate()
                .filter_map(|(e, event)| event.values[f].map(|x| (e, x)))
                .collect();
            if obs.len() < 2 {
                continue;
            }
            let mut rng = seed::rng(seed, &[seed::TAG_MASK, 1, v as u64, f as u64]);
            let (e, x) = obs[rng.random_range(0..obs.len())];
            entries.push((CellIndex::new(v, e, f), x));
        }
    }
    entries.sort_by_key(|(c, _)| *c);
    MaskSet {
        entries,
        strategy: MaskStrategy::OnePerFeatureVisit,
        seed,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MaskSpec {
    Rate(f64),
    OnePerFeatureVisit,
}

impl MaskSpec {
    pub fn draw(&self, dataset: &Dataset, seed: u64) -> Result<MaskSet> {
        match *self {
            MaskSpec::Rate(r) => mask_random(dataset, r, seed),
            MaskSpec::OnePerFeatureVisit => Ok(mask_one_per_feature_visit(dataset, seed)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureScore {
    pub feature: usize,
    pub name: String,
    pub masked: usize,
    /// `None` when the feature has no masked cells.
    pub nrmse: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub method: Option<MethodVariant>,
    pub strategy: MaskStrategy,
    pub mask_seed: u64,
    pub masked_cells: usize,
    pub features: Vec<FeatureScore>,
    /// Mean over features with at least one masked cell.
    pub macro_nrmse: Option<f64>,
    /// Effective configuration as `key = value` lines.
    pub config: Option<String>,
}

/// Range-normalized RMSE per feature over the masked cells.
///
/// Residuals are divided by the patient's (visit's) pre-mask observed range of
/// the feature (1 when that range is zero) and averaged over all masked cells
/// of the feature.
pub fn nrmse(mask: &MaskSet, reference: &Dataset, imputed: &Dataset) -> Result<EvalReport> {
    let d = reference.n_features();
    let mut ranges: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut sums = vec![0.0; d];
    let mut counts = vec![0usize; d];
    for &(cell, truth) in &mask.entries {
        let incomplete = Error::IncompleteImputation {
            visit: cell.visit,
            event: cell.event,
            feature: cell.feature,
        };
        if !imputed.contains(cell) {
            return Err(incomplete);
        }
        let estimate = imputed.get(cell).ok_or(incomplete)?;
        let range = *ranges.entry((cell.visit, cell.feature)).or_insert_with(|| {
            let values = reference.visits[cell.visit]
                .events
                .iter()
                .filter_map(|e| e.values[cell.feature]);
            let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
                (lo.min(x), hi.max(x))
            });
            if hi > lo {
                hi - lo
            } else {
                1.0
            }
        });
        let r = (estimate - truth) / range;
        sums[cell.feature] += r * r;
        counts[cell.feature] += 1;
    }
    let features: Vec<FeatureScore> = (0..d)
        .map(|f| FeatureScore {
            feature: f,
            name: reference.features[f].name.clone(),
            masked: counts[f],
            nrmse: (counts[f] > 0).then(|| (sums[f] / counts[f] as f64).sqrt()),
        })
        .collect();
    let scored: Vec<f64> = features.iter().filter_map(|s| s.nrmse).collect();
    let macro_nrmse = (!scored.is_empty()).then(|| scored.iter().sum::<f64>() / scored.len() as f64);
    Ok(EvalReport {
        method: None,
        strategy: mask.strategy,
        mask_seed: mask.seed,
        masked_cells: mask.len(),
        features,
        macro_nrmse,
        config: None,
    })
}

/// Mask, impute and score every (seed, mask, method) combination. Reports come
/// back ordered by seed, then mask, then method.
pub fn run_experiment(
    dataset: &Dataset,
    variants: &[MethodVariant],
    masks: &[MaskSpec],
    seeds: &[u64],
    config: &Config,
    execution: Execution,
) -> Result<Vec<EvalReport>> {
    config.check()?;
    let mut masked_sets = Vec::new();
    for &s in seeds {
        for spec in masks {
            let mask = spec.draw(dataset, s)?;
            let masked = dataset.apply_mask(&mask)?;
            masked_sets.push((s, mask, masked));
        }
    }
    let jobs: Vec<(usize, MethodVariant)> = (0..masked_sets.len())
        .flat_map(|i| variants.iter().map(move |&v| (i, v)))
        .collect();
    execution.try_map(jobs.len(), |j| {
        let (i, variant) = jobs[j];
        let (s, mask, masked) = &masked_sets[i];
        let run_config = Config {
            seed: *s,
            ..config.clone()
        };
        let out = impute(masked, variant, &run_config)?;
        let mut report = nrmse(mask, dataset, &out.data)?;
        report.method = Some(variant);
        report.config = Some(run_config.to_text());
        Ok(report)
    })
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "undefined".to_string(), fmt_decimal)
}

/// Renders reports in the block format described in the README.
pub fn render_reports(reports: &[EvalReport]) -> String {
    let mut s = String::new();
    for (i, r) in reports.iter().enumerate() {
        let _ = writeln!(s, "[report]");
        let _ = writeln!(s, "index = {i}");
        let _ = writeln!(s, "method = {}", r.method.map_or("unspecified", MethodVariant::name));
        let _ = writeln!(s, "mask.strategy = {}", r.strategy.name());
        if let Some(rate) = r.strategy.rate() {
            let _ = writeln!(s, "mask.rate = {}", fmt_decimal(rate));
        }
        let _ = writeln!(s, "mask.seed = {}", r.mask_seed);
        let _ = writeln!(s, "mask.cells = {}", r.masked_cells);
        let _ = writeln!(s, "macro_nrmse = {}", fmt_opt(r.macro_nrmse));
        if let Some(config) = &r.config {
            for line in config.lines() {
                let _ = writeln!(s, "config.{line}");
            }
        }
        let _ = writeln!(s, "[nrmse]");
        for f in &r.features {
            let _ = writeln!(s, "{}\t{}\t{}", f.name, f.masked, fmt_opt(f.nrmse));
        }
        let _ = writeln!(s, "[end]");
    }
    s
}

/// One parsed report block: its key/value header and nRMSE table rows.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReportRecord {
    pub fields: BTreeMap<String, String>,
    pub rows: Vec<(String, usize, Option<f64>)>,
}

pub fn parse_reports(text: &str) -> Result<Vec<ReportRecord>> {
    enum State {
        Outside,
        Header,
        Table,
    }
    let mut out = Vec::new();
    let mut cur = ReportRecord::default();
    let mut state = State::Outside;
    for (i, line) in text.lines().enumerate() {
        let bad = |msg: &str| Error::Parse {
            line: i as u64 + 1,
            message: msg.to_string(),
        };
        match (line, &state) {
            ("", _) => {}
            ("[report]", State::Outside) => state = State::Header,
            ("[nrmse]", State::Header) => state = State::Table,
            ("[end]", State::Table) => {
                out.push(std::mem::take(&mut cur));
                state = State::Outside;
            }
            (_, State::Header) => {
                let (k, v) = line.split_once(" = ").ok_or_else(|| bad("expected `key = value`"))?;
                cur.fields.insert(k.to_string(), v.to_string());
            }
            (_, State::Table) => {
                let cols: Vec<&str> = line.split('\t').collect();
                if cols.len() != 3 {
                    return Err(bad("expected 3 tab-separated columns"));
                }
                let masked = cols[1].parse().map_err(|_| bad("bad masked count"))?;
                let score = match cols[2] {
                    "undefined" => None,
                    x => Some(x.parse().map_err(|_| bad("bad nrmse"))?),
                };
                cur.rows.push((cols[0].to_string(), masked, score));
            }
            _ => return Err(bad("unexpected line")),
        }
    }
    if !matches!(state, State::Outside) {
        return Err(Error::Parse {
            line: text.lines().count() as u64,
            message: "unterminated report".into(),
        });
    }
    Ok(out)
}
