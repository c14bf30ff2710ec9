//! Per-feature min/max scaling to `[0, 1]`.

use crate::data::Dataset;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureRange {
    pub min: f64,
    /// `max - min`, or 1 for constant and unobserved features.
    pub scale: f64,
    pub constant: bool,
}

impl FeatureRange {
    pub fn forward(&self, x: f64) -> f64 {
        (x - self.min) / self.scale
    }

    pub fn inverse(&self, y: f64) -> f64 {
        y * self.scale + self.min
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalizationMap {
    pub ranges: Vec<FeatureRange>,
}

impl NormalizationMap {
    /// Ranges over the observed values of each feature.
    pub fn fit(dataset: &Dataset) -> Self {
        let ranges = (0..dataset.n_features())
            .map(|f| {
                let values = dataset.feature_values(f);
                if values.is_empty() {
                    return FeatureRange {
                        min: 0.0,
                        scale: 1.0,
                        constant: true,
                    };
                }
                let min = values.iter().copied().fold(f64::INFINITY, f64::min);
                let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let constant = max <= min;
                FeatureRange {
                    min,
                    scale: if constant { 1.0 } else { max - min },
                    constant,
                }
            })
            .collect();
        Self { ranges }
    }

    pub fn apply(&self, dataset: &Dataset) -> Dataset {
        self.map(dataset, FeatureRange::forward)
    }

    pub fn invert(&self, dataset: &Dataset) -> Dataset {
        self.map(dataset, FeatureRange::inverse)
    }

    fn map(&self, dataset: &Dataset, f: fn(&FeatureRange, f64) -> f64) -> Dataset {
        let mut out = dataset.clone();
        for visit in &mut out.visits {
            for event in &mut visit.events {
                for (value, range) in event.values.iter_mut().zip(&self.ranges) {
                    if let Some(x) = value {
                        *x = f(range, *x);
                    }
                }
            }
        }
        out
    }
}

pub fn normalize(dataset: &Dataset) -> (Dataset, NormalizationMap) {
    let map = NormalizationMap::fit(dataset);
    (map.apply(dataset), map)
}

pub fn denormalize(dataset: &Dataset, map: &NormalizationMap) -> Dataset {
    map.invert(dataset)
}
