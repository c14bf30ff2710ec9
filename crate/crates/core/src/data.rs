//! In-memory representation of irregular multivariate time series.
//!
//! A [`Dataset`] is a list of visits; each visit is a time-ordered list of
//! events; each event carries one optional value per feature. Absent values
//! are missing, either natively or because a [`MaskSet`] removed them.

use std::collections::HashSet;
use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FeatureKind {
    Lab,
    Vital,
    Other,
}

impl FeatureKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FeatureKind::Lab => "lab",
            FeatureKind::Vital => "vital",
            FeatureKind::Other => "other",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "lab" => Some(FeatureKind::Lab),
            "vital" => Some(FeatureKind::Vital),
            "other" => Some(FeatureKind::Other),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSpec {
    pub id: usize,
    pub name: String,
    pub kind: FeatureKind,
}

impl FeatureSpec {
    pub fn new(id: usize, name: impl Into<String>, kind: FeatureKind) -> Self {
        Self {
            id,
            name: name.into(),
            kind,
        }
    }
}

/// One timestamped row. `time` is in minutes since the start of the visit.
#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub time: u64,
    pub values: Vec<Option<f64>>,
}

impl Event {
    pub fn new(time: u64, values: Vec<Option<f64>>) -> Self {
        Self { time, values }
    }

    pub fn observed_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_some()).count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Visit {
    pub visit_id: String,
    pub events: Vec<Event>,
}

impl Visit {
    pub fn new(visit_id: impl Into<String>, events: Vec<Event>) -> Self {
        Self {
            visit_id: visit_id.into(),
            events,
        }
    }

    /// Number of events, `T_i`.
    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn times(&self) -> Vec<u64> {
        self.events.iter().map(|e| e.time).collect()
    }

    pub fn value(&self, event: usize, feature: usize) -> Option<f64> {
        self.events[event].values[feature]
    }

    pub fn observed_count(&self) -> usize {
        self.events.iter().map(Event::observed_count).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellIndex {
    pub visit: usize,
    pub event: usize,
    pub feature: usize,
}

impl CellIndex {
    pub fn new(visit: usize, event: usize, feature: usize) -> Self {
        Self {
            visit,
            event,
            feature,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MaskStrategy {
    RandomRate(f64),
    OnePerFeatureVisit,
}

impl MaskStrategy {
    pub fn name(&self) -> &'static str {
        match self {
            MaskStrategy::RandomRate(_) => "random_rate",
            MaskStrategy::OnePerFeatureVisit => "one_per_feature_visit",
        }
    }

    pub fn rate(&self) -> Option<f64> {
        match self {
            MaskStrategy::RandomRate(r) => Some(*r),
            MaskStrategy::OnePerFeatureVisit => None,
        }
    }
}

/// Artificially removed cells together with their pre-mask values.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskSet {
    pub entries: Vec<(CellIndex, f64)>,
    pub strategy: MaskStrategy,
    pub seed: u64,
}

impl MaskSet {
    pub fn empty(strategy: MaskStrategy, seed: u64) -> Self {
        Self {
            entries: Vec::new(),
            strategy,
            seed,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: Vec<FeatureSpec>,
    pub visits: Vec<Visit>,
}

/// A single broken invariant found by [`Dataset::validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NoVisits,
    NoFeatures,
    FeatureId { position: usize, id: usize },
    DuplicateFeatureName { name: String },
    EmptyVisit { visit: usize },
    WrongWidth { visit: usize, event: usize, width: usize },
    DuplicateEventTime { visit: usize, time: u64 },
    UnsortedEvents { visit: usize, event: usize },
    EmptyEvent { visit: usize, event: usize },
    NonFiniteValue { visit: usize, event: usize, feature: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoVisits => write!(f, "no visits"),
            Violation::NoFeatures => write!(f, "no features"),
            Violation::FeatureId { position, id } => {
                write!(f, "feature at position {position} has id {id}")
            }
            Violation::DuplicateFeatureName { name } => {
                write!(f, "duplicate feature name {name:?}")
            }
            Violation::EmptyVisit { visit } => write!(f, "visit {visit} has no events"),
            Violation::WrongWidth {
                visit,
                event,
                width,
            } => write!(f, "visit {visit} event {event} has {width} value slots"),
            Violation::DuplicateEventTime { visit, time } => {
                write!(f, "duplicate event time {time} in visit {visit}")
            }
            Violation::UnsortedEvents { visit, event } => {
                write!(f, "visit {visit} event {event} is out of time order")
            }
            Violation::EmptyEvent { visit, event } => {
                write!(f, "empty event: visit {visit} event {event} has no values")
            }
            Violation::NonFiniteValue {
                visit,
                event,
                feature,
            } => write!(
                f,
                "non-finite value at visit {visit} event {event} feature {feature}"
            ),
        }
    }
}

impl Dataset {
    pub fn new(features: Vec<FeatureSpec>, visits: Vec<Visit>) -> Self {
        Self { features, visits }
    }

    /// Number of features, `D`.
    pub fn n_features(&self) -> usize {
        self.features.len()
    }

    /// Number of visits, `N`.
    pub fn n_visits(&self) -> usize {
        self.visits.len()
    }

    pub fn n_events(&self) -> usize {
        self.visits.iter().map(Visit::len).sum()
    }

    pub fn get(&self, cell: CellIndex) -> Option<f64> {
        self.visits[cell.visit].events[cell.event].values[cell.feature]
    }

    pub fn contains(&self, cell: CellIndex) -> bool {
        cell.visit < self.visits.len()
            && cell.event < self.visits[cell.visit].events.len()
            && cell.feature < self.visits[cell.visit].events[cell.event].values.len()
    }

    pub fn set(&mut self, cell: CellIndex, value: Option<f64>) {
        self.visits[cell.visit].events[cell.event].values[cell.feature] = value;
    }

    pub fn observed_count(&self) -> usize {
        self.visits.iter().map(Visit::observed_count).sum()
    }

    pub fn missing_count(&self) -> usize {
        self.n_events() * self.n_features() - self.observed_count()
    }

    /// Cells in dataset order (visit, then event, then feature).
    pub fn cells(&self) -> impl Iterator<Item = (CellIndex, Option<f64>)> + '_ {
        self.visits.iter().enumerate().flat_map(|(v, visit)| {
            visit.events.iter().enumerate().flat_map(move |(e, event)| {
                event
                    .values
                    .iter()
                    .enumerate()
                    .map(move |(f, value)| (CellIndex::new(v, e, f), *value))
            })
        })
    }

    pub fn missing_cells(&self) -> Vec<CellIndex> {
        self.cells()
            .filter(|(_, v)| v.is_none())
            .map(|(c, _)| c)
            .collect()
    }

    pub fn is_complete(&self) -> bool {
        self.cells().all(|(_, v)| v.is_some())
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.features.iter().position(|f| f.name == name)
    }

    /// Observed values of one feature across all visits.
    pub fn feature_values(&self, feature: usize) -> Vec<f64> {
        self.visits
            .iter()
            .flat_map(|v| v.events.iter().filter_map(move |e| e.values[feature]))
            .collect()
    }

    /// Checks every structural invariant and lists what is broken.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.visits.is_empty() {
            out.push(Violation::NoVisits);
        }
        if self.features.is_empty() {
            out.push(Violation::NoFeatures);
        }
        let mut names = HashSet::new();
        for (position, f) in self.features.iter().enumerate() {
            if f.id != position {
                out.push(Violation::FeatureId {
                    position,
                    id: f.id,
                });
            }
            if !names.insert(f.name.as_str()) {
                out.push(Violation::DuplicateFeatureName {
                    name: f.name.clone(),
                });
            }
        }
        let d = self.features.len();
        for (v, visit) in self.visits.iter().enumerate() {
            if visit.events.is_empty() {
                out.push(Violation::EmptyVisit { visit: v });
            }
            for (e, event) in visit.events.iter().enumerate() {
                if event.values.len() != d {
                    out.push(Violation::WrongWidth {
                        visit: v,
                        event: e,
                        width: event.values.len(),
                    });
                }
                if e > 0 {
                    let prev = visit.events[e - 1].time;
                    if event.time == prev {
                        out.push(Violation::DuplicateEventTime {
                            visit: v,
                            time: event.time,
                        });
                    } else if event.time < prev {
                        out.push(Violation::UnsortedEvents { visit: v, event: e });
                    }
                }
                if event.observed_count() == 0 {
                    out.push(Violation::EmptyEvent { visit: v, event: e });
                }
                for (f, value) in event.values.iter().enumerate() {
                    if matches!(value, Some(x) if !x.is_finite()) {
                        out.push(Violation::NonFiniteValue {
                            visit: v,
                            event: e,
                            feature: f,
                        });
                    }
                }
            }
        }
        out
    }

    /// Median number of events per visit. For an even number of visits the
    /// lower middle value is used so the result is always some visit's `T_i`.
    pub fn median_event_count(&self) -> Result<usize> {
        if self.visits.is_empty() {
            return Err(Error::NoVisits);
        }
        let mut counts: Vec<usize> = self.visits.iter().map(Visit::len).collect();
        counts.sort_unstable();
        Ok(counts[(counts.len() - 1) / 2])
    }

    /// Returns a copy with every masked cell removed.
    pub fn apply_mask(&self, mask: &MaskSet) -> Result<Dataset> {
        let mut out = self.clone();
        for (cell, _) in &mask.entries {
            if !self.contains(*cell) {
                return Err(Error::MaskOutOfRange {
                    visit: cell.visit,
                    event: cell.event,
                    feature: cell.feature,
                });
            }
            if out.get(*cell).is_none() {
                return Err(Error::MaskTargetsMissingCell {
                    visit: cell.visit,
                    event: cell.event,
                    feature: cell.feature,
                });
            }
            out.set(*cell, None);
        }
        Ok(out)
    }

    /// Writes the mask's ground truth back into a copy of `self`.
    pub fn restore(&self, mask: &MaskSet) -> Result<Dataset> {
        let mut out = self.clone();
        for (cell, truth) in &mask.entries {
            if !self.contains(*cell) {
                return Err(Error::MaskOutOfRange {
                    visit: cell.visit,
                    event: cell.event,
                    feature: cell.feature,
                });
            }
            out.set(*cell, Some(*truth));
        }
        Ok(out)
    }
}

/// Values laid out like a dataset's cells: one row-major `T_i x D` block per visit.
#[derive(Debug, Clone, PartialEq)]
pub struct CellGrid<T> {
    n_features: usize,
    blocks: Vec<Vec<T>>,
}

impl<T: Clone> CellGrid<T> {
    pub fn filled(dataset: &Dataset, value: T) -> Self {
        let d = dataset.n_features();
        Self {
            n_features: d,
            blocks: dataset
                .visits
                .iter()
                .map(|v| vec![value.clone(); v.len() * d])
                .collect(),
        }
    }
}

impl<T> CellGrid<T> {
    pub fn from_blocks(n_features: usize, blocks: Vec<Vec<T>>) -> Self {
        Self { n_features, blocks }
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_visits(&self) -> usize {
        self.blocks.len()
    }

    pub fn get(&self, cell: CellIndex) -> &T {
        &self.blocks[cell.visit][cell.event * self.n_features + cell.feature]
    }

    pub fn get_mut(&mut self, cell: CellIndex) -> &mut T {
        &mut self.blocks[cell.visit][cell.event * self.n_features + cell.feature]
    }

    pub fn set(&mut self, cell: CellIndex, value: T) {
        *self.get_mut(cell) = value;
    }

    /// Row `event` of visit `visit`.
    pub fn row(&self, visit: usize, event: usize) -> &[T] {
        let d = self.n_features;
        &self.blocks[visit][event * d..(event + 1) * d]
    }

    pub fn visit_block(&self, visit: usize) -> &[T] {
        &self.blocks[visit]
    }

    pub fn iter(&self) -> impl Iterator<Item = &T> {
        self.blocks.iter().flatten()
    }
}
