//! Records, datasets and conditioned linear queries, evaluated without noise.

use std::collections::{BTreeMap, BTreeSet};
use std::io::BufRead;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub id: String,
    /// Only read by [`LinearQuery::Sum`].
    #[serde(default)]
    pub value: f64,
}

impl Record {
    pub fn new(id: impl Into<String>, value: f64) -> Self {
        Record {
            id: id.into(),
            value,
        }
    }

    /// A record for counting queries, where the value is irrelevant.
    pub fn unit(id: impl Into<String>) -> Self {
        Record::new(id, 0.0)
    }
}

/// A set of records keyed by id.
///
/// Inserting an id that is already present leaves the dataset unchanged.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Dataset {
    records: BTreeMap<String, Record>,
    value_bound: Option<f64>,
}

impl Dataset {
    pub fn new() -> Self {
        Dataset::default()
    }

    /// An empty dataset whose record values must satisfy `|value| <= bound`.
    pub fn with_value_bound(bound: f64) -> Result<Self> {
        if !(bound > 0.0 && bound.is_finite()) {
            return Err(Error::MissingValueBound(Some(bound)));
        }
        Ok(Dataset {
            records: BTreeMap::new(),
            value_bound: Some(bound),
        })
    }

    /// Builds a counting dataset from bare ids.
    pub fn from_ids<I, S>(ids: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut d = Dataset::new();
        for id in ids {
            d.records
                .entry(id.into())
                .or_insert_with_key(|k| Record::unit(k.clone()));
        }
        d
    }

    /// Returns `true` if the record was added, `false` if its id was already present.
    pub fn insert(&mut self, record: Record) -> Result<bool> {
        if let Some(bound) = self.value_bound {
            if !(record.value.abs() <= bound) {
                return Err(Error::ValueOutOfBound {
                    id: record.id,
                    value: record.value,
                    bound,
                });
            }
        }
        if self.records.contains_key(&record.id) {
            return Ok(false);
        }
        self.records.insert(record.id.clone(), record);
        Ok(true)
    }

    pub fn contains(&self, id: &str) -> bool {
        self.records.contains_key(id)
    }

    pub fn get(&self, id: &str) -> Option<&Record> {
        self.records.get(id)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn value_bound(&self) -> Option<f64> {
        self.value_bound
    }

    /// Records in id order.
    pub fn records(&self) -> impl Iterator<Item = &Record> {
        self.records.values()
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.records.keys().map(String::as_str)
    }

    /// The records whose ids are in `ids`; unknown ids are skipped.
    pub fn subset<'a, I>(&self, ids: I) -> Dataset
    where
        I: IntoIterator<Item = &'a str>,
    {
        let records = ids
            .into_iter()
            .filter_map(|id| self.records.get_key_value(id))
            .map(|(k, r)| (k.clone(), r.clone()))
            .collect();
        Dataset {
            records,
            value_bound: self.value_bound,
        }
    }

    /// Reads one `{"id": string, "value": number}` object per line.
    ///
    /// Blank lines are skipped. `value_bound`, when given, is enforced on every record.
    pub fn load_jsonl(path: impl AsRef<Path>, value_bound: Option<f64>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut d = match value_bound {
            Some(b) => Dataset::with_value_bound(b)?,
            None => Dataset::new(),
        };
        for (n, line) in std::io::BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let record: Record = serde_json::from_str(&line).map_err(|e| Error::DataFormat {
                path: path.display().to_string(),
                line: n + 1,
                reason: e.to_string(),
            })?;
            if !record.value.is_finite() {
                return Err(Error::DataFormat {
                    path: path.display().to_string(),
                    line: n + 1,
                    reason: "value is not finite".into(),
                });
            }
            d.insert(record)?;
        }
        Ok(d)
    }
}

/// A query satisfying `q(A ∪ B) = q(A) + q(B)` for disjoint `A`, `B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LinearQuery {
    Count,
    Sum,
}

/// An explicit set of record ids restricting a query to `D_s ∩ D`.
///
/// Predicates such as "age > 10" are expected to be resolved to ids before
/// building a condition.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Condition {
    member_ids: BTreeSet<String>,
}

impl Condition {
    pub fn new<I, S>(ids: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Condition {
            member_ids: ids.into_iter().map(Into::into).collect(),
        }
    }

    /// Ids in canonical (sorted) order.
    pub fn member_ids(&self) -> impl ExactSizeIterator<Item = &str> {
        self.member_ids.iter().map(String::as_str)
    }

    pub fn contains(&self, id: &str) -> bool {
        self.member_ids.contains(id)
    }

    pub fn len(&self) -> usize {
        self.member_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.member_ids.is_empty()
    }
}

/// Exact value of `q` over `records`.
pub fn eval_query<'a, I>(q: LinearQuery, records: I) -> f64
where
    I: IntoIterator<Item = &'a Record>,
{
    match q {
        LinearQuery::Count => records.into_iter().count() as f64,
        LinearQuery::Sum => records.into_iter().map(|r| r.value).sum(),
    }
}

/// The effective record set `D_s ∩ D`.
pub fn apply_condition<'a>(s: &Condition, d: &'a Dataset) -> Vec<&'a Record> {
    // Walk whichever side is smaller.
    if s.len() <= d.len() {
        s.member_ids().filter_map(|id| d.get(id)).collect()
    } else {
        d.records().filter(|r| s.contains(&r.id)).collect()
    }
}

/// Global sensitivity: 1 for counts, the declared value bound for sums.
pub fn sensitivity(q: LinearQuery, d: &Dataset) -> Result<f64> {
    match q {
        LinearQuery::Count => Ok(1.0),
        LinearQuery::Sum => match d.value_bound() {
            Some(b) if b > 0.0 => Ok(b),
            other => Err(Error::MissingValueBound(other)),
        },
    }
}
