//! Cross-visit imputation from two tensorizations of the dataset.
//!
//! The feature view stacks every event of every visit into one
//! `(sum T_i) x D` matrix; the temporal view builds, per feature, an
//! `N x T_med` matrix whose columns are aligned time steps. Chained equations
//! run on each, and the compromise layer blends the two fills for visits no
//! longer than `T_med`.

use crate::config::{check_weights, Config, Truncation};
use crate::data::{CellGrid, CellIndex, Dataset};
use crate::error::{Error, Result};
use crate::mice::{run_chains, ChainSettings, HoleyMatrix};
use crate::seed;

/// A pooled fill and its spread across chains.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fill {
    pub value: f64,
    pub std: f64,
}

pub type ViewFills = CellGrid<Option<Fill>>;

#[derive(Debug, Clone)]
pub struct CfpView {
    pub matrix: HoleyMatrix,
    pub row_origin: Vec<(usize, usize)>,
}

impl CfpView {
    pub fn build(dataset: &Dataset) -> Self {
        let rows: Vec<Vec<Option<f64>>> = dataset
            .visits
            .iter()
            .flat_map(|v| v.events.iter().map(|e| e.values.clone()))
            .collect();
        let row_origin = dataset
            .visits
            .iter()
            .enumerate()
            .flat_map(|(v, visit)| (0..visit.len()).map(move |e| (v, e)))
            .collect();
        let matrix = if rows.is_empty() {
            HoleyMatrix::new(0, dataset.n_features())
        } else {
            HoleyMatrix::from_rows(&rows)
        };
        Self { matrix, row_origin }
    }
}

#[derive(Debug, Clone)]
pub struct CtpView {
    pub t_med: usize,
    /// One `N x T_med` matrix per feature.
    pub matrices: Vec<HoleyMatrix>,
    /// For each visit, the event shown in each of the `T_med` columns
    /// (`None` for placeholder columns).
    pub column_events: Vec<Vec<Option<usize>>>,
    pub pad_counts: Vec<usize>,
    pub trunc_counts: Vec<usize>,
}

impl CtpView {
    pub fn build(dataset: &Dataset, t_med: usize, truncate: Truncation) -> Self {
        let n = dataset.n_visits();
        let mut column_events: Vec<Vec<Option<usize>>> = Vec::with_capacity(n);
        let mut pad_counts = Vec::with_capacity(n);
        let mut trunc_counts = Vec::with_capacity(n);
        for visit in &dataset.visits {
            let t = visit.len();
            let offset = match truncate {
                Truncation::KeepLast if t > t_med => t - t_med,
                _ => 0,
            };
            column_events.push(
                (0..t_med)
                    .map(|m| (m < t).then_some(m + offset))
                    .collect(),
            );
            pad_counts.push(t_med.saturating_sub(t));
            trunc_counts.push(t.saturating_sub(t_med));
        }
        let matrices = (0..dataset.n_features())
            .map(|j| {
                let mut m = HoleyMatrix::new(n, t_med);
                for (i, visit) in dataset.visits.iter().enumerate() {
                    for (col, event) in column_events[i].iter().enumerate() {
                        if let Some(v) = event.and_then(|e| visit.events[e].values[j]) {
                            m.set(i, col, v);
                        }
                    }
                }
                m
            })
            .collect();
        Self {
            t_med,
            matrices,
            column_events,
            pad_counts,
            trunc_counts,
        }
    }
}

/// Chained equations on the stacked event-by-feature matrix.
pub fn cfp_impute(dataset: &Dataset, settings: &ChainSettings, seed: u64) -> Result<ViewFills> {
    let view = CfpView::build(dataset);
    let res = run_chains(&view.matrix, settings, seed::derive(seed, &[seed::TAG_CFP]))?;
    let mut out = CellGrid::filled(dataset, None);
    for (i, &(row, col)) in res.missing_cells.iter().enumerate() {
        let (visit, event) = view.row_origin[row];
        out.set(
            CellIndex::new(visit, event, col),
            Some(Fill {
                value: res.pooled_fill[i],
                std: res.per_cell_std[i],
            }),
        );
    }
    Ok(out)
}

/// Chained equations on each feature's visit-by-time-step matrix. Only real
/// cells are returned; placeholder fills are dropped.
pub fn ctp_impute(
    dataset: &Dataset,
    t_med: usize,
    settings: &ChainSettings,
    truncate: Truncation,
    seed: u64,
) -> Result<ViewFills> {
    if t_med == 0 {
        return Err(Error::InvalidInput("T_med must be >= 1".into()));
    }
    let view = CtpView::build(dataset, t_med, truncate);
    let per_feature = settings.execution.try_map(view.matrices.len(), |j| {
        let m = &view.matrices[j];
        let observed = (0..m.nrows())
            .flat_map(|r| (0..m.ncols()).map(move |c| (r, c)))
            .filter(|&(r, c)| m.is_observed(r, c))
            .count();
        if observed == 0 {
            return Err(Error::CtpViewDegenerate { feature: j });
        }
        run_chains(m, settings, seed::derive(seed, &[seed::TAG_CTP, j as u64]))
    })?;
    let mut out = CellGrid::filled(dataset, None);
    for (j, res) in per_feature.iter().enumerate() {
        for (i, &(visit, col)) in res.missing_cells.iter().enumerate() {
            if let Some(event) = view.column_events[visit][col] {
                out.set(
                    CellIndex::new(visit, event, j),
                    Some(Fill {
                        value: res.pooled_fill[i],
                        std: res.per_cell_std[i],
                    }),
                );
            }
        }
    }
    Ok(out)
}

/// The compromise layer: a `w1`/`w2` blend for visits with at most `T_med`
/// events, the feature-view fill alone otherwise.
pub fn compromise(
    cfp: f64,
    ctp: Option<f64>,
    t_i: usize,
    t_med: usize,
    w1: f64,
    w2: f64,
) -> Result<f64> {
    check_weights(w1, w2)?;
    if t_i > t_med {
        return Ok(cfp);
    }
    let ctp = ctp.ok_or_else(|| {
        Error::InvalidInput("temporal-view fill required when T_i <= T_med".into())
    })?;
    Ok(w1 * cfp + w2 * ctp)
}

#[derive(Debug, Clone)]
pub struct DualcvOutput {
    pub values: Dataset,
    /// Per-cell spread of the fill (0 on observed cells).
    pub cell_std: CellGrid<f64>,
    /// Mean spread over each visit's imputed cells; `None` when nothing was imputed.
    pub per_visit_sigma_m: Vec<Option<f64>>,
    pub t_med: usize,
}

/// Feature view plus temporal view fused by the compromise layer.
pub fn dualcv_impute(dataset: &Dataset, config: &Config) -> Result<DualcvOutput> {
    cross_visit_impute(dataset, config, true)
}

/// Feature view only; the temporal view is skipped.
pub fn cfp_only_impute(dataset: &Dataset, config: &Config) -> Result<DualcvOutput> {
    cross_visit_impute(dataset, config, false)
}

fn cross_visit_impute(dataset: &Dataset, config: &Config, with_ctp: bool) -> Result<DualcvOutput> {
    check_weights(config.w1, config.w2)?;
    let t_med = dataset.median_event_count()?;
    let settings = &config.chains;
    let cfp = cfp_impute(dataset, settings, config.seed)?;
    let ctp = if with_ctp && dataset.missing_count() > 0 {
        Some(ctp_impute(dataset, t_med, settings, config.ctp_truncate, config.seed)?)
    } else {
        None
    };

    let mut values = dataset.clone();
    let mut cell_std = CellGrid::filled(dataset, 0.0);
    let mut per_visit_sigma_m = vec![None; dataset.n_visits()];
    for (v, visit) in dataset.visits.iter().enumerate() {
        let t_i = visit.len();
        let mut spread_sum = 0.0;
        let mut imputed = 0usize;
        for (e, event) in visit.events.iter().enumerate() {
            for (f, value) in event.values.iter().enumerate() {
                if value.is_some() {
                    continue;
                }
                let cell = CellIndex::new(v, e, f);
                let c = cfp.get(cell).expect("feature view fills every hole");
                let (fill, std) = match &ctp {
                    Some(ctp) if t_i <= t_med => {
                        let t = ctp.get(cell).expect("temporal view covers short visits");
                        (
                            compromise(c.value, Some(t.value), t_i, t_med, config.w1, config.w2)?,
                            config.w1 * c.std + config.w2 * t.std,
                        )
                    }
                    _ => (c.value, c.std),
                };
                values.set(cell, Some(fill));
                cell_std.set(cell, std);
                spread_sum += std;
                imputed += 1;
            }
        }
        if imputed > 0 {
            per_visit_sigma_m[v] = Some(spread_sum / imputed as f64);
        }
    }
    Ok(DualcvOutput {
        values,
        cell_std,
        per_visit_sigma_m,
        t_med,
    })
}
