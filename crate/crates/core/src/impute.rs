//! Method dispatch: the full time-aware pipeline, its ablations, and the
//! non-iterative baselines.

use std::fmt;
use std::str::FromStr;

use crate::config::{Config, EcfWindows};
use crate::data::{CellGrid, CellIndex, Dataset, Violation};
use crate::dualcv::{cfp_only_impute, dualcv_impute, DualcvOutput};
use crate::error::{Error, Result};
use crate::gp::{gp_impute_visit, GpVisitResult};
use crate::normalize::NormalizationMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MethodVariant {
    /// Dual cross-visit imputation fused with within-visit GP.
    TaDualcv,
    /// GP only; cells GP cannot reach get the cross-visit mean.
    TaDualcvNoC,
    /// Dual cross-visit imputation without the GP augmentation.
    TaDualcvNoI,
    /// Feature-view chained equations fused with within-visit GP.
    ThreeDMice,
    /// Feature-view chained equations only.
    MiceOnly,
    MeanFill,
    Ecf,
}

impl MethodVariant {
    pub const ALL: [MethodVariant; 7] = [
        MethodVariant::TaDualcv,
        MethodVariant::TaDualcvNoC,
        MethodVariant::TaDualcvNoI,
        MethodVariant::ThreeDMice,
        MethodVariant::MiceOnly,
        MethodVariant::MeanFill,
        MethodVariant::Ecf,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MethodVariant::TaDualcv => "tadualcv",
            MethodVariant::TaDualcvNoC => "tadualcv-noC",
            MethodVariant::TaDualcvNoI => "tadualcv-noI",
            MethodVariant::ThreeDMice => "3dmice",
            MethodVariant::MiceOnly => "mice",
            MethodVariant::MeanFill => "meanfill",
            MethodVariant::Ecf => "ecf",
        }
    }
}

impl fmt::Display for MethodVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MethodVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MethodVariant::ALL
            .into_iter()
            .find(|v| v.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Config(format!("unknown method {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FusionWeights {
    pub theta1: f64,
    pub theta2: f64,
}

impl FusionWeights {
    /// Weights each source by the other's spread, so the noisier one counts less.
    /// Falls back to equal weights when the spreads are undefined or both zero.
    pub fn from_spreads(sigma_m: Option<f64>, sigma_g: Option<f64>) -> Self {
        match (sigma_m, sigma_g) {
            (Some(m), Some(g)) if m + g > 0.0 => Self {
                theta1: g / (m + g),
                theta2: m / (m + g),
            },
            _ => Self {
                theta1: 0.5,
                theta2: 0.5,
            },
        }
    }

    pub fn blend(&self, dualcv: f64, gp: f64) -> f64 {
        self.theta1 * dualcv + self.theta2 * gp
    }
}

/// Fuses one visit's imputed cells. Cells without a GP value keep the
/// cross-visit value.
pub fn fuse_visit(
    dualcv_vals: &[f64],
    gp_vals: &[Option<f64>],
    sigma_m: Option<f64>,
    sigma_g: Option<f64>,
) -> Vec<f64> {
    assert_eq!(dualcv_vals.len(), gp_vals.len());
    let w = FusionWeights::from_spreads(sigma_m, sigma_g);
    dualcv_vals
        .iter()
        .zip(gp_vals)
        .map(|(&m, g)| g.map_or(m, |g| w.blend(m, g)))
        .collect()
}

fn feature_means(dataset: &Dataset) -> Vec<Option<f64>> {
    (0..dataset.n_features())
        .map(|f| {
            let values = dataset.feature_values(f);
            (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
        })
        .collect()
}

fn require_means(dataset: &Dataset) -> Result<Vec<f64>> {
    feature_means(dataset)
        .into_iter()
        .enumerate()
        .map(|(f, m)| {
            m.ok_or_else(|| Error::FeatureHasNoObservations {
                name: dataset.features[f].name.clone(),
            })
        })
        .collect()
}

/// Fills each hole with the cross-visit mean of its feature.
pub fn mean_fill(dataset: &Dataset) -> Result<Dataset> {
    let means = require_means(dataset)?;
    let mut out = dataset.clone();
    for visit in &mut out.visits {
        for event in &mut visit.events {
            for (value, mean) in event.values.iter_mut().zip(&means) {
                value.get_or_insert(*mean);
            }
        }
    }
    Ok(out)
}

/// Carries the last in-visit observation forward while it is no older than
/// the feature kind's window; anything else gets the cross-visit mean.
pub fn ecf_fill(dataset: &Dataset, windows: &EcfWindows) -> Result<Dataset> {
    let means = require_means(dataset)?;
    let mut out = dataset.clone();
    for visit in &mut out.visits {
        for (f, spec) in dataset.features.iter().enumerate() {
            let window = windows.for_kind(spec.kind);
            let mut last: Option<(u64, f64)> = None;
            for event in &mut visit.events {
                match event.values[f] {
                    Some(x) => last = Some((event.time, x)),
                    None => {
                        let carried = last
                            .filter(|(t, _)| event.time - t <= window)
                            .map(|(_, x)| x);
                        event.values[f] = Some(carried.unwrap_or(means[f]));
                    }
                }
            }
        }
    }
    Ok(out)
}

/// 1 where the cell is missing, 0 where it is observed.
pub fn missing_indicators(dataset: &Dataset) -> CellGrid<u8> {
    let d = dataset.n_features();
    CellGrid::from_blocks(
        d,
        dataset
            .visits
            .iter()
            .map(|v| {
                v.events
                    .iter()
                    .flat_map(|e| e.values.iter().map(|x| u8::from(x.is_none())))
                    .collect()
            })
            .collect(),
    )
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct VisitStats {
    pub sigma_m: Option<f64>,
    pub sigma_g: Option<f64>,
    pub weights: Option<FusionWeights>,
}

#[derive(Debug, Clone)]
pub struct ImputationOutput {
    pub variant: MethodVariant,
    /// Complete data on the input scale.
    pub data: Dataset,
    /// Per-cell spread of the imputation on the input scale; 0 where observed
    /// and for methods without a dispersion estimate.
    pub cell_std: CellGrid<f64>,
    pub missing: CellGrid<u8>,
    pub visit_stats: Vec<VisitStats>,
    pub t_med: Option<usize>,
}

fn check_structure(dataset: &Dataset) -> Result<()> {
    // Masking legitimately empties events, so only structural problems count here.
    let violations: Vec<Violation> = dataset
        .validate()
        .into_iter()
        .filter(|v| !matches!(v, Violation::EmptyEvent { .. }))
        .collect();
    if violations.is_empty() {
        Ok(())
    } else {
        Err(Error::Invalid(violations))
    }
}

/// Imputes every missing cell of `dataset` with the chosen method.
pub fn impute(dataset: &Dataset, variant: MethodVariant, config: &Config) -> Result<ImputationOutput> {
    config.check()?;
    check_structure(dataset)?;
    let missing = missing_indicators(dataset);
    let n = dataset.n_visits();

    let (work, map) = if config.normalize {
        let map = NormalizationMap::fit(dataset);
        (map.apply(dataset), Some(map))
    } else {
        (dataset.clone(), None)
    };

    let (filled, cell_std, visit_stats, t_med) = match variant {
        MethodVariant::MeanFill => {
            let out = mean_fill(dataset)?;
            return Ok(baseline_output(variant, dataset, out, missing));
        }
        MethodVariant::Ecf => {
            let out = ecf_fill(dataset, &config.ecf_windows)?;
            return Ok(baseline_output(variant, dataset, out, missing));
        }
        MethodVariant::TaDualcvNoI | MethodVariant::MiceOnly => {
            let dv = if variant == MethodVariant::TaDualcvNoI {
                dualcv_impute(&work, config)?
            } else {
                cfp_only_impute(&work, config)?
            };
            let stats = dv
                .per_visit_sigma_m
                .iter()
                .map(|&s| VisitStats {
                    sigma_m: s,
                    ..VisitStats::default()
                })
                .collect();
            (dv.values, dv.cell_std, stats, Some(dv.t_med))
        }
        MethodVariant::TaDualcv | MethodVariant::ThreeDMice => {
            let dv = if variant == MethodVariant::TaDualcv {
                dualcv_impute(&work, config)?
            } else {
                cfp_only_impute(&work, config)?
            };
            let gp = gp_all_visits(&work, config);
            let t_med = dv.t_med;
            let (values, std, stats) = fuse_with_gp(&work, dv, &gp);
            (values, std, stats, Some(t_med))
        }
        MethodVariant::TaDualcvNoC => {
            let gp = gp_all_visits(&work, config);
            let means = require_means(&work)?;
            let mut values = work.clone();
            let mut std = CellGrid::filled(&work, 0.0);
            let mut stats = vec![VisitStats::default(); n];
            for (v, res) in gp.iter().enumerate() {
                for fill in &res.fills {
                    let cell = CellIndex::new(v, fill.event, fill.feature);
                    values.set(cell, Some(fill.mean));
                    std.set(cell, fill.std);
                }
                stats[v].sigma_g = res.mean_std();
            }
            for cell in values.missing_cells() {
                values.set(cell, Some(means[cell.feature]));
            }
            (values, std, stats, None)
        }
    };

    let mut data = dataset.clone();
    let mut out_std = CellGrid::filled(dataset, 0.0);
    for cell in dataset.missing_cells() {
        let y = filled.get(cell).ok_or(Error::IncompleteImputation {
            visit: cell.visit,
            event: cell.event,
            feature: cell.feature,
        })?;
        let s = *cell_std.get(cell);
        match &map {
            Some(map) => {
                let range = map.ranges[cell.feature];
                data.set(cell, Some(range.inverse(y)));
                out_std.set(cell, s * range.scale);
            }
            None => {
                data.set(cell, Some(y));
                out_std.set(cell, s);
            }
        }
    }
    Ok(ImputationOutput {
        variant,
        data,
        cell_std: out_std,
        missing,
        visit_stats,
        t_med,
    })
}

fn baseline_output(
    variant: MethodVariant,
    dataset: &Dataset,
    data: Dataset,
    missing: CellGrid<u8>,
) -> ImputationOutput {
    ImputationOutput {
        variant,
        data,
        cell_std: CellGrid::filled(dataset, 0.0),
        missing,
        visit_stats: vec![VisitStats::default(); dataset.n_visits()],
        t_med: None,
    }
}

fn gp_all_visits(dataset: &Dataset, config: &Config) -> Vec<GpVisitResult> {
    config
        .execution()
        .map(dataset.n_visits(), |v| gp_impute_visit(&dataset.visits[v], &config.gp))
}

fn fuse_with_gp(
    work: &Dataset,
    dv: DualcvOutput,
    gp: &[GpVisitResult],
) -> (Dataset, CellGrid<f64>, Vec<VisitStats>) {
    let DualcvOutput {
        mut values,
        mut cell_std,
        per_visit_sigma_m,
        ..
    } = dv;
    let mut stats = Vec::with_capacity(work.n_visits());
    for (v, res) in gp.iter().enumerate() {
        let sigma_m = per_visit_sigma_m[v];
        let sigma_g = res.mean_std();
        let w = FusionWeights::from_spreads(sigma_m, sigma_g);
        let cells: Vec<CellIndex> = res
            .fills
            .iter()
            .map(|f| CellIndex::new(v, f.event, f.feature))
            .collect();
        let m_vals: Vec<f64> = cells
            .iter()
            .map(|&c| values.get(c).expect("cross-visit fill present"))
            .collect();
        let g_vals: Vec<Option<f64>> = res.fills.iter().map(|f| Some(f.mean)).collect();
        let fused = fuse_visit(&m_vals, &g_vals, sigma_m, sigma_g);
        for ((&cell, value), fill) in cells.iter().zip(fused).zip(&res.fills) {
            values.set(cell, Some(value));
            let s = w.theta1 * *cell_std.get(cell) + w.theta2 * fill.std;
            cell_std.set(cell, s);
        }
        stats.push(VisitStats {
            sigma_m,
            sigma_g,
            weights: (!res.fills.is_empty()).then_some(w),
        });
    }
    (values, cell_std, stats)
}
