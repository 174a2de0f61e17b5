use std::collections::{HashMap, HashSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::Sample;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Numeric,
    /// Expanded to one 0/1 indicator per category.
    Categorical,
    Label,
    /// Present in the file but not used.
    Ignore,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub name: String,
    pub kind: ColumnKind,
    /// Fixed category list (categorical) or class list (label). When absent
    /// it is collected from the file in order of first appearance.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<String>>,
}

/// Column roles for a CSV file, matched to the header by name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schema {
    pub columns: Vec<ColumnSpec>,
}

impl Schema {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let schema: Schema = toml::from_str(text)?;
        schema.validate()?;
        Ok(schema)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    /// Every column numeric except `label`.
    pub fn numeric_with_label<S: AsRef<str>>(header: &[S], label: &str) -> Self {
        Schema {
            columns: header
                .iter()
                .map(|h| ColumnSpec {
                    name: h.as_ref().to_string(),
                    kind: if h.as_ref() == label {
                        ColumnKind::Label
                    } else {
                        ColumnKind::Numeric
                    },
                    values: None,
                })
                .collect(),
        }
    }

    fn validate(&self) -> Result<()> {
        let labels = self.columns.iter().filter(|c| c.kind == ColumnKind::Label).count();
        if labels != 1 {
            return Err(Error::Config(format!(
                "schema needs exactly one label column, found {labels}"
            )));
        }
        let mut names = HashSet::new();
        for c in &self.columns {
            if !names.insert(c.name.as_str()) {
                return Err(Error::Config(format!("column `{}` declared twice", c.name)));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub feature_names: Vec<String>,
    pub class_names: Vec<String>,
    pub samples: Vec<Sample>,
}

impl Dataset {
    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }
}

#[derive(Debug, Clone)]
struct Plan {
    position: usize,
    spec: ColumnSpec,
    index: HashMap<String, usize>,
}

/// A schema with its category and class lists frozen.
#[derive(Debug, Clone)]
pub struct Encoder {
    plans: Vec<Plan>,
    label: usize,
}

fn open(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    Ok(csv::ReaderBuilder::new().has_headers(true).from_path(path)?)
}

fn parse_err(path: &Path, line: usize, message: String) -> Error {
    Error::Parse {
        path: PathBuf::from(path),
        row: line,
        message,
    }
}

impl Encoder {
    /// Resolves `schema` against `path`'s header and collects any category
    /// or class lists the schema leaves open.
    pub fn fit(schema: &Schema, path: &Path) -> Result<Encoder> {
        schema.validate()?;
        let mut reader = open(path)?;
        let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
        let mut plans = Vec::with_capacity(schema.columns.len());
        for name in &header {
            let spec = schema
                .columns
                .iter()
                .find(|c| &c.name == name)
                .ok_or_else(|| parse_err(path, 1, format!("column `{name}` is not in the schema")))?;
            let position = plans.len();
            plans.push(Plan {
                position,
                spec: spec.clone(),
                index: HashMap::new(),
            });
        }
        for spec in &schema.columns {
            if !header.contains(&spec.name) {
                return Err(parse_err(
                    path,
                    1,
                    format!("schema column `{}` missing from header", spec.name),
                ));
            }
        }
        let label = plans
            .iter()
            .position(|p| p.spec.kind == ColumnKind::Label)
            .expect("validated");

        let open_lists: Vec<usize> = plans
            .iter()
            .enumerate()
            .filter(|(_, p)| {
                matches!(p.spec.kind, ColumnKind::Categorical | ColumnKind::Label) && p.spec.values.is_none()
            })
            .map(|(i, _)| i)
            .collect();
        let mut collected: Vec<Vec<String>> = vec![Vec::new(); plans.len()];
        if !open_lists.is_empty() {
            let mut seen: Vec<HashSet<String>> = vec![HashSet::new(); plans.len()];
            for (row, record) in reader.records().enumerate() {
                let record = record.map_err(|e| parse_err(path, row + 2, e.to_string()))?;
                for &i in &open_lists {
                    let value = record.get(i).unwrap_or("").trim();
                    if seen[i].insert(value.to_string()) {
                        collected[i].push(value.to_string());
                    }
                }
            }
        }
        // numeric class names collected from the data keep their numeric
        // order, so "0"/"1" files map to classes 0/1 whatever row comes first
        let numeric: Option<Vec<f64>> = collected[label].iter().map(|v| v.parse().ok()).collect();
        if let Some(keys) = numeric {
            let mut pairs: Vec<(f64, String)> = keys.into_iter().zip(collected[label].drain(..)).collect();
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
            collected[label] = pairs.into_iter().map(|p| p.1).collect();
        }
        for (i, plan) in plans.iter_mut().enumerate() {
            if matches!(plan.spec.kind, ColumnKind::Categorical | ColumnKind::Label) {
                let values = plan
                    .spec
                    .values
                    .get_or_insert_with(|| std::mem::take(&mut collected[i]));
                plan.index = values.iter().enumerate().map(|(k, v)| (v.clone(), k)).collect();
            }
        }
        Ok(Encoder { plans, label })
    }

    pub fn feature_names(&self) -> Vec<String> {
        let mut names = Vec::new();
        for p in &self.plans {
            match p.spec.kind {
                ColumnKind::Numeric => names.push(p.spec.name.clone()),
                ColumnKind::Categorical => {
                    for v in p.spec.values.as_deref().unwrap_or_default() {
                        names.push(format!("{}={v}", p.spec.name));
                    }
                }
                ColumnKind::Label | ColumnKind::Ignore => {}
            }
        }
        names
    }

    pub fn class_names(&self) -> Vec<String> {
        self.plans[self.label].spec.values.clone().unwrap_or_default()
    }

    /// Encodes `path` row by row, preserving row order.
    pub fn encode(&self, path: &Path) -> Result<Dataset> {
        let mut reader = open(path)?;
        let width = self.feature_names().len();
        let mut samples = Vec::new();
        let mut warned: HashSet<(usize, String)> = HashSet::new();
        for (row, record) in reader.records().enumerate() {
            let line = row + 2;
            let record = record.map_err(|e| parse_err(path, line, e.to_string()))?;
            if record.len() != self.plans.len() {
                return Err(parse_err(
                    path,
                    line,
                    format!("expected {} fields, found {}", self.plans.len(), record.len()),
                ));
            }
            let mut features = Vec::with_capacity(width);
            let mut label = 0;
            for p in &self.plans {
                let raw = record[p.position].trim();
                match p.spec.kind {
                    ColumnKind::Numeric => {
                        let v: f64 = raw
                            .parse()
                            .map_err(|_| parse_err(path, line, format!("`{}`: not a number: `{raw}`", p.spec.name)))?;
                        if !v.is_finite() {
                            return Err(parse_err(path, line, format!("`{}`: non-finite value", p.spec.name)));
                        }
                        features.push(v);
                    }
                    ColumnKind::Categorical => {
                        let k = p.index.len();
                        let start = features.len();
                        features.resize(start + k, 0.0);
                        match p.index.get(raw) {
                            Some(&i) => features[start + i] = 1.0,
                            None => {
                                if warned.insert((p.position, raw.to_string())) {
                                    log::warn!(
                                        "{}: row {line}: unseen category `{raw}` in `{}`; encoding as all zeros",
                                        path.display(),
                                        p.spec.name
                                    );
                                }
                            }
                        }
                    }
                    ColumnKind::Label => {
                        label = *p
                            .index
                            .get(raw)
                            .ok_or_else(|| parse_err(path, line, format!("unknown class `{raw}`")))?;
                    }
                    ColumnKind::Ignore => {}
                }
            }
            samples.push(Sample {
                id: row as u64,
                features,
                label,
            });
        }
        Ok(Dataset {
            feature_names: self.feature_names(),
            class_names: self.class_names(),
            samples,
        })
    }
}

/// Loads a time-ordered CSV file, one-hot encoding categorical columns.
pub fn load_csv(path: &Path, schema: &Schema) -> Result<Dataset> {
    Encoder::fit(schema, path)?.encode(path)
}
