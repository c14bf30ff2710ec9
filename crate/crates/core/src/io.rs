//! CSV formats.
//!
//! * long input: `visit_id,time_min,feature,value`, one observation per row.
//!   A row with an empty `value` declares the cell without observing it, which
//!   keeps events and features whose values were all masked.
//! * wide output: `visit_id,time_min,<feature names...>`, one event per row.
//!   The std and missing-indicator files use the same shape.
//! * mask: `visit_id,time_min,feature,truth`, preceded by a `#` metadata line.
//! * feature manifest: `feature,kind`.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Display;
use std::io::{Read, Write};

use crate::data::{
    CellGrid, CellIndex, Dataset, Event, FeatureKind, FeatureSpec, MaskSet, MaskStrategy, Visit,
    Violation,
};
use crate::error::{Error, Result};

/// Nine significant digits, printed in the shortest form that round-trips.
pub fn fmt_decimal(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let rounded: f64 = format!("{x:.8e}").parse().expect("formatted float parses");
    let s = rounded.to_string();
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

fn parse_err(line: u64, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn record_line(record: &csv::StringRecord) -> u64 {
    record.position().map_or(0, |p| p.line())
}

fn reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .flexible(false)
        .from_reader(input)
}

fn expect_header(rdr: &mut csv::Reader<impl Read>, expected: &[&str]) -> Result<()> {
    let header = rdr.headers()?.clone();
    let got: Vec<&str> = header.iter().collect();
    if got.is_empty() || (got.len() == 1 && got[0].is_empty()) {
        return Err(Error::NoRecords);
    }
    if got != expected {
        return Err(parse_err(1, format!("expected header {}", expected.join(","))));
    }
    Ok(())
}

pub fn read_feature_manifest<R: Read>(input: R) -> Result<Vec<FeatureSpec>> {
    let mut rdr = reader(input);
    expect_header(&mut rdr, &["feature", "kind"])?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = record_line(&rec);
        let kind = FeatureKind::parse(&rec[1])
            .ok_or_else(|| parse_err(line, format!("unknown feature kind {:?}", &rec[1])))?;
        out.push(FeatureSpec::new(out.len(), &rec[0], kind));
    }
    Ok(out)
}

pub fn write_feature_manifest<W: Write>(features: &[FeatureSpec], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["feature", "kind"])?;
    for f in features {
        w.write_record([f.name.as_str(), f.kind.as_str()])?;
    }
    w.flush()?;
    Ok(())
}

/// Cells of one visit keyed by event time.
type EventCells = BTreeMap<u64, Vec<(usize, Option<f64>)>>;

/// Reads long-format records into a validated dataset.
///
/// Visits keep first-appearance order and events are sorted by time. Features
/// come from `manifest` when given, otherwise in first-appearance order.
pub fn read_long_csv<R: Read>(input: R, manifest: Option<&[FeatureSpec]>) -> Result<Dataset> {
    let mut rdr = reader(input);
    expect_header(&mut rdr, &["visit_id", "time_min", "feature", "value"])?;
    let mut features: Vec<FeatureSpec> = manifest.map(<[_]>::to_vec).unwrap_or_default();
    let mut feature_ids: HashMap<String, usize> = features
        .iter()
        .enumerate()
        .map(|(i, f)| (f.name.clone(), i))
        .collect();
    let mut visit_order: Vec<String> = Vec::new();
    let mut visits: HashMap<String, EventCells> = HashMap::new();
    let mut seen: HashMap<(String, u64, usize), u64> = HashMap::new();
    let mut n_records = 0usize;
    for rec in rdr.records() {
        let rec = rec?;
        let line = record_line(&rec);
        n_records += 1;
        let visit_id = rec[0].to_string();
        if visit_id.is_empty() {
            return Err(parse_err(line, "empty visit_id"));
        }
        let time: u64 = rec[1]
            .parse()
            .map_err(|_| parse_err(line, format!("time_min must be a non-negative integer, got {:?}", &rec[1])))?;
        let name = &rec[2];
        if name.is_empty() {
            return Err(parse_err(line, "empty feature name"));
        }
        let feature = match feature_ids.get(name) {
            Some(&f) => f,
            None if manifest.is_some() => {
                return Err(parse_err(line, format!("feature {name:?} is not in the manifest")))
            }
            None => {
                let id = features.len();
                features.push(FeatureSpec::new(id, name, FeatureKind::Other));
                feature_ids.insert(name.to_string(), id);
                id
            }
        };
        let value = match &rec[3] {
            "" => None,
            s => {
                let x: f64 = s
                    .parse()
                    .map_err(|_| parse_err(line, format!("non-numeric value {s:?}")))?;
                if !x.is_finite() {
                    return Err(parse_err(line, format!("non-finite value {s:?}")));
                }
                Some(x)
            }
        };
        if let Some(first) = seen.insert((visit_id.clone(), time, feature), line) {
            return Err(parse_err(
                line,
                format!("duplicate ({visit_id}, {time}, {name}) record, first seen on line {first}"),
            ));
        }
        if !visits.contains_key(&visit_id) {
            visit_order.push(visit_id.clone());
        }
        visits
            .entry(visit_id)
            .or_default()
            .entry(time)
            .or_default()
            .push((feature, value));
    }
    if n_records == 0 {
        return Err(Error::NoRecords);
    }
    let d = features.len();
    let visits = visit_order
        .into_iter()
        .map(|id| {
            let events = visits
                .remove(&id)
                .expect("visit recorded")
                .into_iter()
                .map(|(time, cells)| {
                    let mut values = vec![None; d];
                    for (f, v) in cells {
                        values[f] = v;
                    }
                    Event::new(time, values)
                })
                .collect();
            Visit::new(id, events)
        })
        .collect();
    let dataset = Dataset::new(features, visits);
    // Events without values can only come from declared-missing rows.
    let violations: Vec<Violation> = dataset
        .validate()
        .into_iter()
        .filter(|v| !matches!(v, Violation::EmptyEvent { .. }))
        .collect();
    if !violations.is_empty() {
        return Err(Error::Invalid(violations));
    }
    Ok(dataset)
}

/// Writes observed cells as long records; with `declare_missing` every missing
/// cell also gets a row with an empty value.
pub fn write_long_csv<W: Write>(dataset: &Dataset, out: W, declare_missing: bool) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["visit_id", "time_min", "feature", "value"])?;
    for visit in &dataset.visits {
        for event in &visit.events {
            let time = event.time.to_string();
            for (f, value) in event.values.iter().enumerate() {
                let name = dataset.features[f].name.as_str();
                match value {
                    Some(x) => w.write_record([visit.visit_id.as_str(), &time, name, &fmt_decimal(*x)])?,
                    None if declare_missing => {
                        w.write_record([visit.visit_id.as_str(), &time, name, ""])?
                    }
                    None => {}
                }
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn write_wide<W: Write, F: Fn(CellIndex) -> String>(dataset: &Dataset, out: W, cell: F) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["visit_id".to_string(), "time_min".to_string()];
    header.extend(dataset.features.iter().map(|f| f.name.clone()));
    w.write_record(&header)?;
    for (v, visit) in dataset.visits.iter().enumerate() {
        for (e, event) in visit.events.iter().enumerate() {
            let mut row = vec![visit.visit_id.clone(), event.time.to_string()];
            row.extend((0..dataset.n_features()).map(|f| cell(CellIndex::new(v, e, f))));
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// One row per event; missing cells are empty fields.
pub fn write_wide_csv<W: Write>(dataset: &Dataset, out: W) -> Result<()> {
    write_wide(dataset, out, |c| dataset.get(c).map(fmt_decimal).unwrap_or_default())
}

pub fn write_std_csv<W: Write>(dataset: &Dataset, std: &CellGrid<f64>, out: W) -> Result<()> {
    write_wide(dataset, out, |c| fmt_decimal(*std.get(c)))
}

pub fn write_mi_csv<W: Write, T: Display>(dataset: &Dataset, mi: &CellGrid<T>, out: W) -> Result<()> {
    write_wide(dataset, out, |c| mi.get(c).to_string())
}

/// Reads a wide file. Feature kinds come from `manifest` when its names match
/// the header, otherwise every feature is `other`.
pub fn read_wide_csv<R: Read>(input: R, manifest: Option<&[FeatureSpec]>) -> Result<Dataset> {
    let mut rdr = reader(input);
    let header = rdr.headers()?.clone();
    if header.len() < 3 || &header[0] != "visit_id" || &header[1] != "time_min" {
        if header.iter().all(str::is_empty) {
            return Err(Error::NoRecords);
        }
        return Err(parse_err(1, "expected header visit_id,time_min,<features...>"));
    }
    let features: Vec<FeatureSpec> = header
        .iter()
        .skip(2)
        .enumerate()
        .map(|(i, name)| {
            let kind = manifest
                .and_then(|m| m.iter().find(|f| f.name == name))
                .map_or(FeatureKind::Other, |f| f.kind);
            FeatureSpec::new(i, name, kind)
        })
        .collect();
    let mut visit_order: Vec<String> = Vec::new();
    let mut visits: HashMap<String, Vec<Event>> = HashMap::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = record_line(&rec);
        let time: u64 = rec[1]
            .parse()
            .map_err(|_| parse_err(line, format!("bad time_min {:?}", &rec[1])))?;
        let values = rec
            .iter()
            .skip(2)
            .map(|s| match s {
                "" => Ok(None),
                s => s
                    .parse::<f64>()
                    .map(Some)
                    .map_err(|_| parse_err(line, format!("non-numeric value {s:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        let id = rec[0].to_string();
        if !visits.contains_key(&id) {
            visit_order.push(id.clone());
        }
        visits.entry(id).or_default().push(Event::new(time, values));
    }
    if visit_order.is_empty() {
        return Err(Error::NoRecords);
    }
    let visits = visit_order
        .into_iter()
        .map(|id| {
            let events = visits.remove(&id).expect("visit recorded");
            Visit::new(id, events)
        })
        .collect();
    let ds = Dataset::new(features, visits);
    let violations: Vec<Violation> = ds
        .validate()
        .into_iter()
        .filter(|v| !matches!(v, Violation::EmptyEvent { .. }))
        .collect();
    if !violations.is_empty() {
        return Err(Error::Invalid(violations));
    }
    Ok(ds)
}

pub fn write_mask_csv<W: Write>(dataset: &Dataset, mask: &MaskSet, mut out: W) -> Result<()> {
    match mask.strategy {
        MaskStrategy::RandomRate(r) => writeln!(
            out,
            "# strategy=random_rate rate={} seed={}",
            fmt_decimal(r),
            mask.seed
        )?,
        MaskStrategy::OnePerFeatureVisit => {
            writeln!(out, "# strategy=one_per_feature_visit seed={}", mask.seed)?
        }
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["visit_id", "time_min", "feature", "truth"])?;
    for (cell, truth) in &mask.entries {
        let visit = &dataset.visits[cell.visit];
        w.write_record([
            visit.visit_id.as_str(),
            &visit.events[cell.event].time.to_string(),
            dataset.features[cell.feature].name.as_str(),
            &fmt_decimal(*truth),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn parse_mask_meta(text: &str) -> (MaskStrategy, u64) {
    let mut strategy = MaskStrategy::OnePerFeatureVisit;
    let mut rate = None;
    let mut seed = 0;
    if let Some(first) = text.lines().next().and_then(|l| l.strip_prefix('#')) {
        for kv in first.split_whitespace() {
            match kv.split_once('=') {
                Some(("strategy", "random_rate")) => strategy = MaskStrategy::RandomRate(0.0),
                Some(("rate", r)) => rate = r.parse().ok(),
                Some(("seed", s)) => seed = s.parse().unwrap_or(0),
                _ => {}
            }
        }
    }
    if let (MaskStrategy::RandomRate(_), Some(r)) = (strategy, rate) {
        strategy = MaskStrategy::RandomRate(r);
    }
    (strategy, seed)
}

/// Reads a mask file and resolves its rows against `dataset` by
/// `(visit_id, time_min, feature)`.
pub fn read_mask_csv<R: Read>(mut input: R, dataset: &Dataset) -> Result<MaskSet> {
    let mut text = String::new();
    input.read_to_string(&mut text)?;
    let (strategy, seed) = parse_mask_meta(&text);
    let mut rdr = reader(text.as_bytes());
    expect_header(&mut rdr, &["visit_id", "time_min", "feature", "truth"])?;
    let index = EventIndex::new(dataset);
    let mut entries = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = record_line(&rec);
        let time: u64 = rec[1]
            .parse()
            .map_err(|_| parse_err(line, format!("bad time_min {:?}", &rec[1])))?;
        let cell = index
            .cell(dataset, &rec[0], time, &rec[2])
            .ok_or_else(|| parse_err(line, "mask row does not match any dataset cell"))?;
        let truth: f64 = rec[3]
            .parse()
            .map_err(|_| parse_err(line, format!("non-numeric truth {:?}", &rec[3])))?;
        entries.push((cell, truth));
    }
    Ok(MaskSet {
        entries,
        strategy,
        seed,
    })
}

/// Lookup from `(visit_id, time_min)` to event coordinates.
pub struct EventIndex {
    events: HashMap<(String, u64), (usize, usize)>,
}

impl EventIndex {
    pub fn new(dataset: &Dataset) -> Self {
        let events = dataset
            .visits
            .iter()
            .enumerate()
            .flat_map(|(v, visit)| {
                visit
                    .events
                    .iter()
                    .enumerate()
                    .map(move |(e, ev)| ((visit.visit_id.clone(), ev.time), (v, e)))
            })
            .collect();
        Self { events }
    }

    pub fn cell(&self, dataset: &Dataset, visit_id: &str, time: u64, feature: &str) -> Option<CellIndex> {
        let &(v, e) = self.events.get(&(visit_id.to_string(), time))?;
        let f = dataset.feature_index(feature)?;
        Some(CellIndex::new(v, e, f))
    }
}

/// Copies `source` values onto the event and feature layout of `layout`,
/// matching by visit id, time and feature name. Unmatched cells are missing.
pub fn align_to(layout: &Dataset, source: &Dataset) -> Dataset {
    let index = EventIndex::new(source);
    let mut out = layout.clone();
    for (v, visit) in layout.visits.iter().enumerate() {
        for (e, event) in visit.events.iter().enumerate() {
            for f in 0..layout.n_features() {
                let value = index
                    .cell(source, &visit.visit_id, event.time, &layout.features[f].name)
                    .and_then(|c| source.get(c));
                out.set(CellIndex::new(v, e, f), value);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::fixtures::two_visits;

    #[test]
    fn decimal_format() {
        assert_eq!(fmt_decimal(0.1), "0.1");
        assert_eq!(fmt_decimal(1.0 / 3.0), "0.333333333");
        assert_eq!(fmt_decimal(123456789012.0), "123456789000");
        assert_eq!(fmt_decimal(-0.0), "0");
        assert_eq!(fmt_decimal(2.0), "2");
    }

    #[test]
    fn long_ingest_basic() {
        let csv = "visit_id,time_min,feature,value\nv1,0,HR,80\nv1,30,HR,82\nv1,0,SBP,120\n";
        let ds = read_long_csv(csv.as_bytes(), None).unwrap();
        assert_eq!(ds.n_visits(), 1);
        assert_eq!(ds.visits[0].len(), 2);
        assert_eq!(ds.features[1].name, "SBP");
        assert_eq!(ds.visits[0].events[1].values, vec![Some(82.0), None]);
    }

    #[test]
    fn long_ingest_errors() {
        let dup = "visit_id,time_min,feature,value\nv1,30,HR,80\nv1,30,HR,81\n";
        let err = read_long_csv(dup.as_bytes(), None).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        assert!(matches!(read_long_csv("".as_bytes(), None), Err(Error::NoRecords)));
        let header_only = "visit_id,time_min,feature,value\n";
        assert!(matches!(read_long_csv(header_only.as_bytes(), None), Err(Error::NoRecords)));
        let bad = "visit_id,time_min,feature,value\nv1,0,HR,abc\n";
        assert!(matches!(read_long_csv(bad.as_bytes(), None), Err(Error::Parse { line: 2, .. })));
        let short = "visit_id,time_min,feature,value\nv1,0,HR\n";
        assert!(read_long_csv(short.as_bytes(), None).is_err());
    }

    #[test]
    fn manifest_controls_features() {
        let manifest = read_feature_manifest("feature,kind\nSBP,vital\nLac,lab\n".as_bytes()).unwrap();
        let csv = "visit_id,time_min,feature,value\nv1,0,Lac,1.5\n";
        let ds = read_long_csv(csv.as_bytes(), Some(&manifest)).unwrap();
        assert_eq!(ds.features[1].kind, FeatureKind::Lab);
        assert_eq!(ds.visits[0].events[0].values, vec![None, Some(1.5)]);
        let unknown = "visit_id,time_min,feature,value\nv1,0,HR,1\n";
        assert!(read_long_csv(unknown.as_bytes(), Some(&manifest)).is_err());
    }

    #[test]
    fn declared_missing_keeps_shape() {
        let mut ds = two_visits();
        ds.visits[0].events[1].values = vec![None, None];
        let mut buf = Vec::new();
        write_long_csv(&ds, &mut buf, true).unwrap();
        let back = read_long_csv(&buf[..], None).unwrap();
        assert_eq!(back, ds);
    }

    #[test]
    fn wide_round_trip_and_mi() {
        let ds = two_visits();
        let mut buf = Vec::new();
        write_wide_csv(&ds, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("visit_id,time_min,f0,f1\n"));
        let back = read_wide_csv(&buf[..], None).unwrap();
        assert_eq!(back, ds);
        let mut mi = Vec::new();
        write_mi_csv(&ds, &crate::impute::missing_indicators(&ds), &mut mi).unwrap();
        let mi = String::from_utf8(mi).unwrap();
        assert_eq!(mi.lines().nth(2), Some("a,30,0,1"));
    }

    #[test]
    fn mask_file_round_trip() {
        let ds = two_visits();
        let mask = MaskSet {
            entries: vec![(CellIndex::new(1, 1, 1), 5.0)],
            strategy: MaskStrategy::RandomRate(0.25),
            seed: 77,
        };
        let mut buf = Vec::new();
        write_mask_csv(&ds, &mask, &mut buf).unwrap();
        let back = read_mask_csv(&buf[..], &ds).unwrap();
        assert_eq!(back, mask);
    }
}
