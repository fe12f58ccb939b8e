//! Vowel formant data: CSV ingestion, a synthetic stand-in, unstratified
//! train/test splitting with train-only z-scoring, and a logistic-regression
//! baseline.

use std::path::Path;

use rand::seq::SliceRandom;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::Rng;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FormantSample {
    pub f1: f64,
    pub f2: f64,
    pub label: String,
}

/// Binary task `(class 0, class 1)` identified by vowel code.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Task {
    pub class_a: String,
    pub class_b: String,
}

impl Task {
    pub fn new(class_a: &str, class_b: &str) -> Result<Self> {
        if class_a == class_b {
            return Err(Error::InvalidParameter(format!("task classes must differ, got {class_a} twice")));
        }
        Ok(Self { class_a: class_a.to_owned(), class_b: class_b.to_owned() })
    }

    /// Parses `"a-i"` or `"a,i"`.
    pub fn parse(spec: &str) -> Result<Self> {
        let parts: Vec<&str> = spec.split(['-', ',', '/']).map(str::trim).filter(|s| !s.is_empty()).collect();
        match parts.as_slice() {
            [a, b] => Self::new(a, b),
            _ => Err(Error::InvalidParameter(format!("task must look like 'a-i', got {spec:?}"))),
        }
    }

    pub fn class_of(&self, label: &str) -> Option<usize> {
        if label == self.class_a {
            Some(0)
        } else if label == self.class_b {
            Some(1)
        } else {
            None
        }
    }
}

impl std::fmt::Display for Task {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}-{}", self.class_a, self.class_b)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Dataset {
    pub samples: Vec<FormantSample>,
    pub task: Task,
}

impl Dataset {
    pub fn new(samples: Vec<FormantSample>, task: Task) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyDataset);
        }
        for class in [&task.class_a, &task.class_b] {
            if !samples.iter().any(|s| &s.label == class) {
                return Err(Error::MissingClass(class.clone()));
            }
        }
        if let Some(s) = samples.iter().find(|s| task.class_of(&s.label).is_none()) {
            return Err(Error::InvalidParameter(format!("label {:?} is not part of task {task}", s.label)));
        }
        if samples.iter().any(|s| !(s.f1 > 0.0 && s.f2 > 0.0)) {
            return Err(Error::InvalidParameter("formants must be positive".into()));
        }
        Ok(Self { samples, task })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn class(&self, idx: usize) -> usize {
        self.task.class_of(&self.samples[idx].label).expect("validated at construction")
    }
}

/// Reads a `vowel,f1,f2` CSV and keeps the rows of `task`. Every row is
/// validated, including rows of other vowels.
pub fn load_formant_csv(path: impl AsRef<Path>, task: &Task) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| Error::Io { path: path.to_owned(), source })?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let headers = reader.headers().map_err(|e| Error::MalformedRow { row: 1, reason: e.to_string() })?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::MalformedRow { row: 1, reason: format!("missing column {name:?}") })
    };
    let (vowel_col, f1_col, f2_col) = (col("vowel")?, col("f1")?, col("f2")?);

    let mut samples = Vec::new();
    let mut any_rows = false;
    for (idx, record) in reader.records().enumerate() {
        // header is line 1
        let row = idx + 2;
        let record = record.map_err(|e| Error::MalformedRow { row, reason: e.to_string() })?;
        any_rows = true;
        let field = |c: usize| record.get(c).ok_or_else(|| Error::MalformedRow { row, reason: "missing field".into() });
        let number = |c: usize, name: &str| -> Result<f64> {
            let raw = field(c)?;
            let v: f64 = raw
                .parse()
                .map_err(|_| Error::MalformedRow { row, reason: format!("{name} is not a number: {raw:?}") })?;
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::MalformedRow { row, reason: format!("{name} must be positive, got {v}") });
            }
            Ok(v)
        };
        let label = field(vowel_col)?.to_owned();
        let (f1, f2) = (number(f1_col, "f1")?, number(f2_col, "f2")?);
        if task.class_of(&label).is_some() {
            samples.push(FormantSample { f1, f2, label });
        }
    }
    if !any_rows {
        return Err(Error::EmptyDataset);
    }
    Dataset::new(samples, task.clone())
}

/// Round adult-speaker formant centers (Hz) used by the synthetic generator.
/// These are stand-ins, not measured data.
pub fn synthetic_center(vowel: &str) -> Option<(f64, f64)> {
    match vowel {
        "a" => Some((768.0, 1333.0)),
        "i" => Some((342.0, 2322.0)),
        "o" => Some((497.0, 910.0)),
        "u" => Some((378.0, 997.0)),
        _ => None,
    }
}

pub const SYNTHETIC_STD: (f64, f64) = (80.0, 120.0);

/// Two bivariate normal clusters around [`synthetic_center`] with per-axis
/// spread [`SYNTHETIC_STD`]; class `a` samples first, then class `b`.
pub fn synthesize_formants(task: &Task, n_per_class: usize, rng: &mut Rng) -> Result<Dataset> {
    if n_per_class == 0 {
        return Err(Error::InvalidParameter("n_per_class must be positive".into()));
    }
    let mut samples = Vec::with_capacity(2 * n_per_class);
    for label in [&task.class_a, &task.class_b] {
        let (c1, c2) = synthetic_center(label)
            .ok_or_else(|| Error::InvalidParameter(format!("no synthetic center for vowel {label:?}")))?;
        let d1 = Normal::new(c1, SYNTHETIC_STD.0).expect("positive std");
        let d2 = Normal::new(c2, SYNTHETIC_STD.1).expect("positive std");
        for _ in 0..n_per_class {
            let f1 = loop {
                let v = d1.sample(rng);
                if v > 0.0 {
                    break v;
                }
            };
            let f2 = loop {
                let v = d2.sample(rng);
                if v > 0.0 {
                    break v;
                }
            };
            samples.push(FormantSample { f1, f2, label: label.clone() });
        }
    }
    Dataset::new(samples, task.clone())
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    /// One value per input oscillator, already normalized.
    pub features: Vec<f64>,
    pub class: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    /// Per-feature (F1, F2) mean over the training partition.
    pub mean: [f64; 2],
    /// Per-feature population standard deviation over the training partition.
    pub std: [f64; 2],
}

impl Split {
    pub fn normalize(&self, s: &FormantSample) -> [f64; 2] {
        [(s.f1 - self.mean[0]) / self.std[0], (s.f2 - self.mean[1]) / self.std[1]]
    }

    fn samples(&self, ds: &Dataset, idx: &[usize]) -> Vec<Sample> {
        idx.iter().map(|&i| Sample { features: self.normalize(&ds.samples[i]).to_vec(), class: ds.class(i) }).collect()
    }

    pub fn train_samples(&self, ds: &Dataset) -> Vec<Sample> {
        self.samples(ds, &self.train)
    }

    pub fn test_samples(&self, ds: &Dataset) -> Vec<Sample> {
        self.samples(ds, &self.test)
    }
}

/// Seeded random permutation; the first `round(frac·n)` indices train.
/// Normalization statistics come from the training indices only.
pub fn split_and_normalize(ds: &Dataset, frac: f64, rng: &mut Rng) -> Result<Split> {
    if !(frac > 0.0 && frac < 1.0) {
        return Err(Error::InvalidParameter(format!("train fraction must lie in (0, 1), got {frac}")));
    }
    let n = ds.len();
    let n_train = (frac * n as f64).round() as usize;
    if n_train < 2 || n_train >= n {
        return Err(Error::InsufficientSamples { needed: 3, got: n });
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let test = perm.split_off(n_train);
    let train = perm;

    let stats = |get: fn(&FormantSample) -> f64| {
        let vals: Vec<f64> = train.iter().map(|&i| get(&ds.samples[i])).collect();
        let m = vals.iter().sum::<f64>() / vals.len() as f64;
        let var = vals.iter().map(|v| (v - m).powi(2)).sum::<f64>() / vals.len() as f64;
        (m, var.sqrt())
    };
    let (m1, s1) = stats(|s| s.f1);
    let (m2, s2) = stats(|s| s.f2);
    if !(s1 > 0.0 && s2 > 0.0) {
        return Err(Error::ZeroVariance);
    }
    Ok(Split { train, test, mean: [m1, m2], std: [s1, s2] })
}

const LOGISTIC_MAX_ITER: usize = 20_000;
const LOGISTIC_LR: f64 = 0.5;

/// Two-feature logistic regression fit by full-batch gradient descent on the
/// normalized training partition; returns test accuracy.
pub fn logistic_baseline(ds: &Dataset, split: &Split) -> f64 {
    let train = split.train_samples(ds);
    let test = split.test_samples(ds);
    let mut w = [0.0f64; 3];
    let n = train.len() as f64;
    for _ in 0..LOGISTIC_MAX_ITER {
        let mut grad = [0.0f64; 3];
        for s in &train {
            let z = w[0] + w[1] * s.features[0] + w[2] * s.features[1];
            let p = 1.0 / (1.0 + (-z).exp());
            let err = p - s.class as f64;
            grad[0] += err;
            grad[1] += err * s.features[0];
            grad[2] += err * s.features[1];
        }
        let gnorm = grad.iter().map(|g| (g / n).powi(2)).sum::<f64>().sqrt();
        for k in 0..3 {
            w[k] -= LOGISTIC_LR * grad[k] / n;
        }
        if gnorm < 1e-9 {
            break;
        }
    }
    let correct = test
        .iter()
        .filter(|s| {
            let z = w[0] + w[1] * s.features[0] + w[2] * s.features[1];
            usize::from(z > 0.0) == s.class
        })
        .count();
    correct as f64 / test.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use std::io::Write;

    fn write_csv(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    fn ai() -> Task {
        Task::new("a", "i").unwrap()
    }

    #[test]
    fn loads_and_filters_task() {
        let f = write_csv("vowel,f1,f2\na,700,1200\ni,300,2300\no,500,900\na,750,1300\n");
        let ds = load_formant_csv(f.path(), &ai()).unwrap();
        assert_eq!(ds.len(), 3);
        assert_eq!(ds.class(0), 0);
        assert_eq!(ds.class(1), 1);
    }

    #[test]
    fn header_only_is_empty() {
        let f = write_csv("vowel,f1,f2\n");
        let err = load_formant_csv(f.path(), &ai()).unwrap_err();
        assert!(matches!(err, Error::EmptyDataset));
        assert_eq!(err.to_string(), "empty dataset");
    }

    #[test]
    fn non_positive_formant_names_row() {
        let f = write_csv("vowel,f1,f2\na,700,1200\ni,0,2300\n");
        match load_formant_csv(f.path(), &ai()) {
            Err(Error::MalformedRow { row, .. }) => assert_eq!(row, 3),
            other => panic!("unexpected {other:?}"),
        }
        let f = write_csv("vowel,f1,f2\na,abc,1200\n");
        assert!(matches!(load_formant_csv(f.path(), &ai()), Err(Error::MalformedRow { row: 2, .. })));
    }

    #[test]
    fn missing_class_and_file() {
        let f = write_csv("vowel,f1,f2\na,700,1200\n");
        assert!(matches!(load_formant_csv(f.path(), &ai()), Err(Error::MissingClass(c)) if c == "i"));
        assert!(matches!(load_formant_csv("/nonexistent/formants.csv", &ai()), Err(Error::Io { .. })));
    }

    #[test]
    fn synthetic_is_reproducible() {
        let a = synthesize_formants(&ai(), 20, &mut seeded(5)).unwrap();
        let b = synthesize_formants(&ai(), 20, &mut seeded(5)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 40);
        assert!(synthesize_formants(&ai(), 0, &mut seeded(5)).is_err());
        assert!(synthesize_formants(&Task::new("a", "x").unwrap(), 5, &mut seeded(5)).is_err());
    }

    #[test]
    fn split_normalizes_with_train_statistics() {
        let ds = synthesize_formants(&ai(), 100, &mut seeded(1)).unwrap();
        let split = split_and_normalize(&ds, 0.8, &mut seeded(2)).unwrap();
        assert_eq!(split.train.len(), 160);
        assert_eq!(split.test.len(), 40);
        let mut all: Vec<usize> = split.train.iter().chain(&split.test).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..200).collect::<Vec<_>>());

        let train = split.train_samples(&ds);
        for k in 0..2 {
            let m: f64 = train.iter().map(|s| s.features[k]).sum::<f64>() / train.len() as f64;
            assert!(m.abs() < 1e-12);
        }
        let test = split.test_samples(&ds);
        let tm: f64 = test.iter().map(|s| s.features[0]).sum::<f64>() / test.len() as f64;
        assert!(tm != 0.0);

        let again = split_and_normalize(&ds, 0.8, &mut seeded(2)).unwrap();
        assert_eq!(split, again);
    }

    #[test]
    fn split_rounds_train_size() {
        let ds = synthesize_formants(&ai(), 138, &mut seeded(1)).unwrap();
        let ds = Dataset::new(ds.samples[..275].to_vec(), ai()).unwrap();
        let split = split_and_normalize(&ds, 0.8, &mut seeded(0)).unwrap();
        assert_eq!(split.train.len(), 220);
    }

    #[test]
    fn unstratified_splits_vary_class_balance() {
        let ds = synthesize_formants(&ai(), 138, &mut seeded(1)).unwrap();
        let ds = Dataset::new(ds.samples[..275].to_vec(), ai()).unwrap();
        let counts: Vec<usize> = (0..100)
            .map(|s| {
                let split = split_and_normalize(&ds, 0.8, &mut seeded(s)).unwrap();
                split.train.iter().filter(|&&i| ds.class(i) == 0).count()
            })
            .collect();
        let first = counts[0];
        assert!(counts.iter().any(|&c| c != first));
    }

    #[test]
    fn logistic_separates_synthetic_vowels() {
        let ds = synthesize_formants(&ai(), 200, &mut seeded(9)).unwrap();
        let split = split_and_normalize(&ds, 0.8, &mut seeded(10)).unwrap();
        assert!(logistic_baseline(&ds, &split) >= 0.99);
    }

    #[test]
    fn task_parsing() {
        assert_eq!(Task::parse("o-u").unwrap(), Task::new("o", "u").unwrap());
        assert_eq!(Task::parse("a,i").unwrap().to_string(), "a-i");
        assert!(Task::parse("a").is_err());
        assert!(Task::parse("a-a").is_err());
    }
}
