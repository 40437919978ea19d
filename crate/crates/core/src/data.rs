//! SCR event schema, CSV ingestion, labelling, preprocessing, splitting and
//! a seeded synthetic generator.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;
use std::fs::File;
use std::io::{BufReader, Read, Write};
use std::path::Path;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, LogNormal, Normal};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 5] = ["elapsed_time", "scr_amplitude", "scr", "detected_scr_number", "amp_class"];
pub const FEATURE_NAMES: [&str; 4] = ["elapsed_time", "scr_amplitude", "scr", "detected_scr_number"];

/// Amplitude class boundaries in µS; each threshold belongs to the class above it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabelSchema {
    pub thresholds: [f64; 4],
}

impl Default for LabelSchema {
    fn default() -> Self {
        Self { thresholds: [0.1, 0.4, 0.7, 1.0] }
    }
}

impl LabelSchema {
    pub const CLASS_NAMES: [&'static str; 4] = ["low", "moderate", "high", "very high"];

    pub fn classify(&self, scr_amplitude: f64) -> Result<u8> {
        if !scr_amplitude.is_finite() {
            return Err(Error::Validation(format!("scr_amplitude {scr_amplitude} is not finite")));
        }
        if scr_amplitude < self.thresholds[0] {
            return Err(Error::BelowDetection(scr_amplitude));
        }
        Ok(self.thresholds[1..].iter().filter(|&&t| scr_amplitude >= t).count() as u8)
    }
}

/// Half-open binning of amplitude into classes 0..=3.
pub fn amp_class(scr_amplitude: f64) -> Result<u8> {
    LabelSchema::default().classify(scr_amplitude)
}

/// `{0, 1} → 0` (low), `{2, 3} → 1` (high).
pub fn to_binary(amp_class: u8) -> Result<u8> {
    match amp_class {
        0 | 1 => Ok(0),
        2 | 3 => Ok(1),
        c => Err(Error::Validation(format!("amp_class {c} outside 0..=3"))),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScrEvent {
    pub elapsed_time: f64,
    pub scr_amplitude: f64,
    pub scr: f64,
    pub detected_scr_number: u32,
    pub amp_class: u8,
}

impl ScrEvent {
    /// Builds an event, deriving `amp_class` from the amplitude.
    pub fn new(elapsed_time: f64, scr_amplitude: f64, scr: f64, detected_scr_number: u32) -> Result<Self> {
        let ev = Self { elapsed_time, scr_amplitude, scr, detected_scr_number, amp_class: amp_class(scr_amplitude)? };
        ev.validate()?;
        Ok(ev)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.elapsed_time >= 0.0 && self.elapsed_time.is_finite()) {
            return Err(Error::Validation(format!("elapsed_time {} must be >= 0", self.elapsed_time)));
        }
        if !(self.scr >= 0.0 && self.scr.is_finite()) {
            return Err(Error::Validation(format!("scr {} must be >= 0", self.scr)));
        }
        if self.detected_scr_number == 0 {
            return Err(Error::Validation("detected_scr_number must be positive".into()));
        }
        let expected = amp_class(self.scr_amplitude)?;
        if expected != self.amp_class {
            return Err(Error::Validation(format!(
                "amp_class {} inconsistent with scr_amplitude {} (expected {expected})",
                self.amp_class, self.scr_amplitude
            )));
        }
        Ok(())
    }

    pub fn features(&self) -> [f64; 4] {
        [self.elapsed_time, self.scr_amplitude, self.scr, f64::from(self.detected_scr_number)]
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    /// Low (classes 0–1) vs high (classes 2–3).
    #[default]
    Binary,
    Multiclass4,
}

impl Task {
    pub fn label(self, ev: &ScrEvent) -> usize {
        match self {
            Task::Binary => usize::from(ev.amp_class >= 2),
            Task::Multiclass4 => usize::from(ev.amp_class),
        }
    }

    pub fn n_classes(self) -> usize {
        match self {
            Task::Binary => 2,
            Task::Multiclass4 => 4,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub events: Vec<ScrEvent>,
    /// Where the rows came from (file path or generator seed).
    pub provenance: String,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Feature matrix in `FEATURE_NAMES` column order.
    pub fn features(&self) -> Vec<Vec<f64>> {
        self.events.iter().map(|e| e.features().to_vec()).collect()
    }

    pub fn labels(&self, task: Task) -> Vec<usize> {
        self.events.iter().map(|e| task.label(e)).collect()
    }

    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            events: indices.iter().map(|&i| self.events[i]).collect(),
            provenance: self.provenance.clone(),
        }
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut ds = Self::read_csv(BufReader::new(file))?;
        ds.provenance = path.display().to_string();
        Ok(ds)
    }

    /// Parses CSV with the four feature columns (any order) and an optional
    /// `amp_class` column that is cross-checked against the amplitude.
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
        let header = reader.headers()?.clone();
        let column = |name: &str| header.iter().position(|h| h == name);
        let mut cols = [0usize; 4];
        for (slot, name) in cols.iter_mut().zip(FEATURE_NAMES) {
            *slot = column(name).ok_or_else(|| Error::Schema(name.to_string()))?;
        }
        let class_col = column("amp_class");

        let mut events = Vec::new();
        let mut mismatched = Vec::new();
        for (i, rec) in reader.records().enumerate() {
            let row = i + 1;
            let rec = rec?;
            let cell = |c: usize| rec.get(c).unwrap_or("");
            let num = |c: usize| -> Result<f64> {
                cell(c)
                    .parse::<f64>()
                    .map_err(|_| Error::Parse { row, msg: format!("`{}` in column {}", cell(c), &header[c]) })
            };
            let count = cell(cols[3])
                .parse::<u32>()
                .map_err(|_| Error::Parse { row, msg: format!("`{}` in column detected_scr_number", cell(cols[3])) })?;
            let ev = ScrEvent::new(num(cols[0])?, num(cols[1])?, num(cols[2])?, count).map_err(|e| match e {
                Error::Validation(msg) => Error::Validation(format!("row {row}: {msg}")),
                other => other,
            })?;
            if let Some(c) = class_col {
                let stated = cell(c)
                    .parse::<u8>()
                    .map_err(|_| Error::Parse { row, msg: format!("`{}` in column amp_class", cell(c)) })?;
                if stated != ev.amp_class {
                    mismatched.push(row);
                }
            }
            events.push(ev);
        }
        if !mismatched.is_empty() {
            return Err(Error::ClassMismatch(mismatched));
        }
        Ok(Self { events, provenance: String::new() })
    }

    /// Canonical CSV: the exact five-column header, LF endings, shortest
    /// round-trip float formatting.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        w.write_record(CSV_HEADER)?;
        for e in &self.events {
            w.write_record([
                e.elapsed_time.to_string(),
                e.scr_amplitude.to_string(),
                e.scr.to_string(),
                e.detected_scr_number.to_string(),
                e.amp_class.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<dataset csv>", e))?;
        Ok(())
    }

    pub fn to_csv_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        buf
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv_bytes()).map_err(|e| Error::io(path, e))
    }

    /// SHA-256 of the canonical CSV, hex encoded.
    pub fn fingerprint(&self) -> String {
        Sha256::digest(self.to_csv_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Column-wise affine scaler fitted on one matrix and reusable on others.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinMaxScaler {
    pub mins: Vec<f64>,
    pub maxs: Vec<f64>,
    pub lower: f64,
    pub upper: f64,
}

impl MinMaxScaler {
    pub fn fit(x: &[Vec<f64>], range: (f64, f64)) -> Result<Self> {
        let d = x.first().map(Vec::len).ok_or_else(|| Error::Shape("cannot fit a scaler on no rows".into()))?;
        if d == 0 {
            return Err(Error::Shape("cannot fit a scaler on zero columns".into()));
        }
        if !(range.0 < range.1) {
            return Err(Error::Validation(format!("invalid target range [{}, {}]", range.0, range.1)));
        }
        let mut mins = vec![f64::INFINITY; d];
        let mut maxs = vec![f64::NEG_INFINITY; d];
        for (r, row) in x.iter().enumerate() {
            if row.len() != d {
                return Err(Error::Shape(format!("row {r} has {} columns, expected {d}", row.len())));
            }
            for (c, &v) in row.iter().enumerate() {
                mins[c] = mins[c].min(v);
                maxs[c] = maxs[c].max(v);
            }
        }
        Ok(Self { mins, maxs, lower: range.0, upper: range.1 })
    }

    pub fn transform_row(&self, row: &[f64]) -> Result<Vec<f64>> {
        if row.len() != self.mins.len() {
            return Err(Error::Shape(format!("row has {} columns, scaler expects {}", row.len(), self.mins.len())));
        }
        Ok(row
            .iter()
            .enumerate()
            .map(|(c, &v)| {
                let span = self.maxs[c] - self.mins[c];
                if span > 0.0 {
                    self.lower + (v - self.mins[c]) / span * (self.upper - self.lower)
                } else {
                    self.lower
                }
            })
            .collect())
    }

    pub fn transform(&self, x: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        x.iter().map(|r| self.transform_row(r)).collect()
    }
}

/// Fits on `x` and returns the scaled matrix together with the scaler.
pub fn minmax_scale(x: &[Vec<f64>], range: (f64, f64)) -> Result<(Vec<Vec<f64>>, MinMaxScaler)> {
    let scaler = MinMaxScaler::fit(x, range)?;
    Ok((scaler.transform(x)?, scaler))
}

pub fn l2_normalize(x: &[f64]) -> Result<Vec<f64>> {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::Normalization(format!("cannot L2-normalize a vector of norm {norm}")));
    }
    Ok(x.iter().map(|v| v / norm).collect())
}

/// Classical models see `[0, 1]` min-max features; quantum models see
/// `[0, π/2]` min-max features followed by per-row L2 normalization.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PipelineKind {
    Classical,
    Quantum,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Preprocessor {
    pub kind: PipelineKind,
    pub scaler: MinMaxScaler,
}

impl Preprocessor {
    pub fn fit(kind: PipelineKind, train: &[Vec<f64>]) -> Result<Self> {
        let range = match kind {
            PipelineKind::Classical => (0.0, 1.0),
            PipelineKind::Quantum => (0.0, FRAC_PI_2),
        };
        Ok(Self { kind, scaler: MinMaxScaler::fit(train, range)? })
    }

    pub fn transform_row(&self, row: &[f64]) -> Result<Vec<f64>> {
        let scaled = self.scaler.transform_row(row)?;
        match self.kind {
            PipelineKind::Classical => Ok(scaled),
            PipelineKind::Quantum => {
                // A row at every column minimum scales to zero; leave it as
                // the zero vector rather than failing.
                if scaled.iter().all(|v| *v == 0.0) {
                    Ok(scaled)
                } else {
                    l2_normalize(&scaled)
                }
            }
        }
    }

    pub fn transform(&self, x: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        x.iter().map(|r| self.transform_row(r)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    /// Indices into the source dataset, ascending.
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

fn group_by_class(indices: &[usize], labels: &[usize]) -> BTreeMap<usize, Vec<usize>> {
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &i in indices {
        groups.entry(labels[i]).or_default().push(i);
    }
    groups
}

/// Largest-remainder allocation of `total` test slots over class sizes,
/// keeping at least one train and one test member per class.
fn allocate_test(sizes: &[usize], total: usize) -> Vec<usize> {
    let n: usize = sizes.iter().sum();
    let quotas: Vec<f64> = sizes.iter().map(|&s| s as f64 * total as f64 / n as f64).collect();
    let mut alloc: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let mut rest: Vec<usize> = (0..sizes.len()).collect();
    rest.sort_by(|&a, &b| (quotas[b] - quotas[b].floor()).total_cmp(&(quotas[a] - quotas[a].floor())).then(a.cmp(&b)));
    let remaining = total.saturating_sub(alloc.iter().sum());
    for &c in rest.iter().take(remaining) {
        alloc[c] += 1;
    }
    for (a, &s) in alloc.iter_mut().zip(sizes) {
        *a = (*a).clamp(1, s - 1);
    }
    alloc
}

/// Seeded uniform sample of `n_sample` rows followed by a stratified
/// train/test split of the sample.
pub fn sample_and_split(labels: &[usize], n_sample: usize, train_fraction: f64, seed: u64) -> Result<Split> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::Validation(format!("train_fraction {train_fraction} outside (0, 1)")));
    }
    if n_sample == 0 || labels.len() < n_sample {
        return Err(Error::Shape(format!("cannot sample {n_sample} rows from {}", labels.len())));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let all: Vec<usize> = (0..labels.len()).collect();
    let sampled: Vec<usize> = all.choose_multiple(&mut rng, n_sample).copied().collect();

    let groups = group_by_class(&sampled, labels);
    if let Some((c, members)) = groups.iter().find(|(_, m)| m.len() < 2) {
        return Err(Error::Stratification { class: c.to_string(), count: members.len(), needed: 2 });
    }
    let n_test = ((n_sample as f64) * (1.0 - train_fraction)).round() as usize;
    let sizes: Vec<usize> = groups.values().map(Vec::len).collect();
    let alloc = allocate_test(&sizes, n_test);

    let (mut train, mut test) = (Vec::new(), Vec::new());
    for (members, t) in groups.into_values().zip(alloc) {
        test.extend_from_slice(&members[..t]);
        train.extend_from_slice(&members[t..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok(Split { train, test })
}

/// Stratified split of the given subset into `(train, validation)` index
/// lists, used to carve a validation set out of the training rows.
pub fn stratified_holdout(indices: &[usize], labels: &[usize], holdout_fraction: f64, seed: u64) -> Result<Split> {
    let local: Vec<usize> = indices.iter().map(|&i| labels[i]).collect();
    let split = sample_and_split(&local, local.len(), 1.0 - holdout_fraction, seed)?;
    Ok(Split {
        train: split.train.iter().map(|&i| indices[i]).collect(),
        test: split.test.iter().map(|&i| indices[i]).collect(),
    })
}

/// Stratified k-fold assignment over `indices`. Each class is shuffled and
/// dealt round-robin, continuing the deal across classes so fold sizes
/// differ by at most one. Returns the validation indices of each fold.
pub fn stratified_folds(indices: &[usize], labels: &[usize], k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::Validation(format!("k-fold needs k >= 2, got {k}")));
    }
    let groups = group_by_class(indices, labels);
    if let Some((c, members)) = groups.iter().find(|(_, m)| m.len() < k) {
        return Err(Error::Stratification { class: c.to_string(), count: members.len(), needed: k });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![Vec::new(); k];
    let mut next = 0;
    for mut members in groups.into_values() {
        members.shuffle(&mut rng);
        for m in members {
            folds[next].push(m);
            next = (next + 1) % k;
        }
    }
    folds.iter_mut().for_each(|f| f.sort_unstable());
    Ok(folds)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthParams {
    /// Mean gap between consecutive events, seconds.
    pub mean_interval: f64,
    /// Median SCR amplitude, µS.
    pub amplitude_median: f64,
    /// Log-space standard deviation of the amplitude.
    pub amplitude_sigma: f64,
    pub baseline_scr: f64,
    /// Mean and spread of the per-event tonic drift, µS.
    pub drift_mean: f64,
    pub drift_sd: f64,
    /// Events per simulated session; counters and drift reset between sessions.
    pub session_events: usize,
}

impl Default for SynthParams {
    fn default() -> Self {
        Self {
            mean_interval: 30.0,
            amplitude_median: 0.3,
            amplitude_sigma: 0.8,
            baseline_scr: 1.5,
            drift_mean: 0.01,
            drift_sd: 0.03,
            session_events: 40,
        }
    }
}

impl SynthParams {
    pub fn validate(&self) -> Result<()> {
        let checks = [
            ("mean_interval", self.mean_interval > 0.0),
            ("amplitude_median", self.amplitude_median > 0.0),
            ("amplitude_sigma", self.amplitude_sigma > 0.0),
            ("baseline_scr", self.baseline_scr >= 0.0),
            ("drift_sd", self.drift_sd >= 0.0),
            ("drift_mean", self.drift_mean.is_finite()),
            ("session_events", self.session_events >= 1),
        ];
        match checks.iter().find(|(_, ok)| !ok) {
            Some((name, _)) => Err(Error::Validation(format!("invalid generator parameter {name}"))),
            None => Ok(()),
        }
    }
}

fn round_to(v: f64, decimals: i32) -> f64 {
    let f = 10f64.powi(decimals);
    (v * f).round() / f
}

/// Seeded synthetic SCR events. Values are rounded to the precision of the
/// reference table (times and conductance to 0.01, amplitudes to 0.0001).
pub fn synth_generate(n_events: usize, seed: u64, params: &SynthParams) -> Result<Dataset> {
    if n_events == 0 {
        return Err(Error::Validation("n_events must be >= 1".into()));
    }
    params.validate()?;
    let bad = |e: &dyn std::fmt::Display| Error::Validation(format!("generator parameters: {e}"));
    let gap = Exp::new(1.0 / params.mean_interval).map_err(|e| bad(&e))?;
    let amp = LogNormal::new(params.amplitude_median.ln(), params.amplitude_sigma).map_err(|e| bad(&e))?;
    let drift = Normal::new(params.drift_mean, params.drift_sd).map_err(|e| bad(&e))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut events = Vec::with_capacity(n_events);
    let (mut t, mut tonic, mut count) = (0.0f64, 0.0f64, 0u32);
    for i in 0..n_events {
        if i % params.session_events == 0 {
            t = 0.0;
            tonic = 0.0;
            count = 0;
        }
        t = round_to(t + gap.sample(&mut rng), 2);
        tonic += drift.sample(&mut rng);
        count += 1;
        // truncated below the detection threshold by rejection
        let a = loop {
            let a = round_to(amp.sample(&mut rng), 4);
            if a >= 0.1 {
                break a;
            }
        };
        let scr = round_to((params.baseline_scr + tonic + a).max(0.0), 2);
        events.push(ScrEvent::new(t, a, scr, count)?);
    }
    Ok(Dataset { events, provenance: format!("synthetic(n={n_events}, seed={seed})") })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_rows_bin_correctly() {
        assert_eq!(amp_class(0.1059).unwrap(), 0);
        assert_eq!(amp_class(0.3558).unwrap(), 0);
        assert_eq!(amp_class(1.2).unwrap(), 3);
        assert_eq!(amp_class(0.4).unwrap(), 1);
        assert_eq!(amp_class(0.7).unwrap(), 2);
        assert_eq!(amp_class(1.0).unwrap(), 3);
        assert_eq!(amp_class(0.1).unwrap(), 0);
        assert!(matches!(amp_class(0.05), Err(Error::BelowDetection(_))));
    }

    #[test]
    fn binary_mapping() {
        assert_eq!([0, 1, 2, 3].map(|c| to_binary(c).unwrap()), [0, 0, 1, 1]);
        assert!(to_binary(4).is_err());
    }

    #[test]
    fn load_table_rows() {
        let csv = "elapsed_time,scr_amplitude,scr,detected_scr_number,amp_class\n\
                   12.12,0.1059,1.74,1,0\n60.98,0.3558,1.81,2,0\n158.47,1.2000,2.50,5,3\n";
        let ds = Dataset::read_csv(csv.as_bytes()).unwrap();
        assert_eq!(ds.len(), 3);
        assert_eq!(ds.events[0].amp_class, 0);
        assert_eq!(ds.events[2].amp_class, 3);
        assert_eq!(ds.events[2].features(), [158.47, 1.2, 2.5, 5.0]);
    }

    #[test]
    fn load_without_class_column() {
        let csv = "scr,elapsed_time,detected_scr_number,scr_amplitude\n1.74,12.12,1,0.75\n";
        let ds = Dataset::read_csv(csv.as_bytes()).unwrap();
        assert_eq!(ds.events[0].amp_class, 2);
    }

    #[test]
    fn load_errors() {
        let err = Dataset::read_csv("elapsed_time,scr,detected_scr_number\n1,2,3\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Schema(ref c) if c == "scr_amplitude"));
        let err = Dataset::read_csv(
            "elapsed_time,scr_amplitude,scr,detected_scr_number\n1,0.2,2,1\n2,abc,2,2\n".as_bytes(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Parse { row: 2, .. }));
        let err = Dataset::read_csv(
            "elapsed_time,scr_amplitude,scr,detected_scr_number,amp_class\n1,0.2,2,1,1\n2,0.5,2,2,1\n3,0.9,2,3,0\n"
                .as_bytes(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::ClassMismatch(ref rows) if rows == &vec![1, 3]));
    }

    #[test]
    fn minmax_examples() {
        let x = vec![vec![0.0, 3.0], vec![5.0, 3.0], vec![10.0, 3.0]];
        let (s, _) = minmax_scale(&x, (0.0, 1.0)).unwrap();
        assert_eq!(s.iter().map(|r| r[0]).collect::<Vec<_>>(), vec![0.0, 0.5, 1.0]);
        assert!(s.iter().all(|r| r[1] == 0.0));
        let (s, _) = minmax_scale(&x, (0.0, FRAC_PI_2)).unwrap();
        assert!((s[1][0] - std::f64::consts::FRAC_PI_4).abs() < 1e-15);
        assert!((s[2][0] - FRAC_PI_2).abs() < 1e-15);
        assert!(matches!(minmax_scale(&[], (0.0, 1.0)), Err(Error::Shape(_))));
    }

    #[test]
    fn scaler_reapplied_to_test_can_leave_range() {
        let (_, sc) = minmax_scale(&[vec![0.0], vec![10.0]], (0.0, 1.0)).unwrap();
        assert_eq!(sc.transform_row(&[20.0]).unwrap(), vec![2.0]);
    }

    #[test]
    fn l2_examples() {
        assert_eq!(l2_normalize(&[3.0, 4.0]).unwrap(), vec![0.6, 0.8]);
        assert_eq!(l2_normalize(&[0.0, 1.0]).unwrap(), vec![0.0, 1.0]);
        assert!(matches!(l2_normalize(&[0.0, 0.0]), Err(Error::Normalization(_))));
    }

    #[test]
    fn split_sizes_and_stratification() {
        let labels: Vec<usize> = (0..200).map(|i| i % 2).collect();
        let s = sample_and_split(&labels, 100, 0.8, 5).unwrap();
        assert_eq!((s.train.len(), s.test.len()), (80, 20));
        let test_pos = s.test.iter().filter(|&&i| labels[i] == 1).count();
        let sampled_pos = s.train.iter().chain(&s.test).filter(|&&i| labels[i] == 1).count();
        let expected = sampled_pos as f64 * 0.2;
        assert!((test_pos as f64 - expected).abs() <= 1.0);
        assert_eq!(s, sample_and_split(&labels, 100, 0.8, 5).unwrap());
    }

    #[test]
    fn tiny_class_fails_stratification() {
        let mut labels = vec![0usize; 100];
        labels[0] = 1;
        let err = sample_and_split(&labels, 100, 0.8, 0).unwrap_err();
        assert!(matches!(err, Error::Stratification { ref class, count: 1, .. } if class == "1"));
    }

    #[test]
    fn folds_partition() {
        let labels: Vec<usize> = (0..100).map(|i| usize::from(i % 3 == 0)).collect();
        let idx: Vec<usize> = (0..100).collect();
        let folds = stratified_folds(&idx, &labels, 5, 1).unwrap();
        assert!(folds.iter().all(|f| f.len() == 20));
        let mut all: Vec<usize> = folds.concat();
        all.sort_unstable();
        assert_eq!(all, idx);
        assert_eq!(folds, stratified_folds(&idx, &labels, 5, 1).unwrap());
    }

    #[test]
    fn synth_is_valid_and_deterministic() {
        let ds = synth_generate(500, 7, &SynthParams::default()).unwrap();
        for e in &ds.events {
            e.validate().unwrap();
        }
        for session in ds.events.chunks(SynthParams::default().session_events) {
            assert!(session.windows(2).all(|w| w[0].detected_scr_number <= w[1].detected_scr_number
                && w[0].elapsed_time <= w[1].elapsed_time));
        }
        let again = synth_generate(500, 7, &SynthParams::default()).unwrap();
        assert_eq!(ds.to_csv_bytes(), again.to_csv_bytes());
        assert!(synth_generate(0, 7, &SynthParams::default()).is_err());
        let bad = SynthParams { amplitude_sigma: -1.0, ..Default::default() };
        assert!(matches!(synth_generate(5, 7, &bad), Err(Error::Validation(_))));
    }

    #[test]
    fn canonical_csv_round_trips() {
        let ds = synth_generate(50, 3, &SynthParams::default()).unwrap();
        let bytes = ds.to_csv_bytes();
        assert!(bytes.starts_with(b"elapsed_time,scr_amplitude,scr,detected_scr_number,amp_class\n"));
        let back = Dataset::read_csv(bytes.as_slice()).unwrap();
        assert_eq!(back.to_csv_bytes(), bytes);
    }
}
