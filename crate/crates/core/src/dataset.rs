//! Tabular datasets: schema, raw column storage, CSV ingestion, stratified
//! partitioning, one-hot encoding and synthetic fixtures.

use std::collections::hash_map::DefaultHasher;
use std::collections::{HashMap, HashSet};
use std::hash::{Hash, Hasher};
use std::path::Path;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureSet;
use crate::matrix::Matrix;
use crate::seed;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum FeatureKind {
    Numeric,
    /// Ordered category list; the order fixes the one-hot column order.
    Categorical(Vec<String>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawFeature", into = "RawFeature")]
pub struct FeatureSpec {
    pub name: String,
    pub kind: FeatureKind,
}

impl FeatureSpec {
    pub fn numeric(name: impl Into<String>) -> Self {
        FeatureSpec {
            name: name.into(),
            kind: FeatureKind::Numeric,
        }
    }

    pub fn categorical<S: Into<String>>(name: impl Into<String>, categories: impl IntoIterator<Item = S>) -> Self {
        FeatureSpec {
            name: name.into(),
            kind: FeatureKind::Categorical(categories.into_iter().map(Into::into).collect()),
        }
    }

    /// Number of encoded columns this feature occupies.
    pub fn encoded_width(&self) -> usize {
        match &self.kind {
            FeatureKind::Numeric => 1,
            FeatureKind::Categorical(c) => c.len(),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum KindTag {
    Numeric,
    Categorical,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFeature {
    name: String,
    kind: KindTag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    categories: Option<Vec<String>>,
}

impl TryFrom<RawFeature> for FeatureSpec {
    type Error = String;

    fn try_from(raw: RawFeature) -> std::result::Result<Self, String> {
        let kind = match (raw.kind, raw.categories) {
            (KindTag::Numeric, None) => FeatureKind::Numeric,
            (KindTag::Numeric, Some(_)) => {
                return Err(format!("numeric feature `{}` must not list categories", raw.name))
            }
            (KindTag::Categorical, Some(c)) => FeatureKind::Categorical(c),
            (KindTag::Categorical, None) => {
                return Err(format!("categorical feature `{}` needs a categories list", raw.name))
            }
        };
        Ok(FeatureSpec { name: raw.name, kind })
    }
}

impl From<FeatureSpec> for RawFeature {
    fn from(f: FeatureSpec) -> Self {
        match f.kind {
            FeatureKind::Numeric => RawFeature {
                name: f.name,
                kind: KindTag::Numeric,
                categories: None,
            },
            FeatureKind::Categorical(c) => RawFeature {
                name: f.name,
                kind: KindTag::Categorical,
                categories: Some(c),
            },
        }
    }
}

/// Column layout of a dataset: `d` feature columns plus one binary label
/// column with a designated positive value.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawSchema", into = "RawSchema")]
pub struct FeatureSchema {
    features: Vec<FeatureSpec>,
    label: String,
    label_values: [String; 2],
    positive: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSchema {
    label: String,
    label_values: Vec<String>,
    positive: String,
    features: Vec<FeatureSpec>,
}

impl TryFrom<RawSchema> for FeatureSchema {
    type Error = Error;

    fn try_from(raw: RawSchema) -> Result<Self> {
        let values: [String; 2] = raw
            .label_values
            .try_into()
            .map_err(|v: Vec<String>| Error::Schema(format!("label_values must list exactly 2 values, got {}", v.len())))?;
        FeatureSchema::new(raw.features, raw.label, values, raw.positive)
    }
}

impl From<FeatureSchema> for RawSchema {
    fn from(s: FeatureSchema) -> Self {
        RawSchema {
            label: s.label,
            label_values: s.label_values.to_vec(),
            positive: s.positive,
            features: s.features,
        }
    }
}

impl FeatureSchema {
    pub fn new(
        features: Vec<FeatureSpec>,
        label: impl Into<String>,
        label_values: [String; 2],
        positive: impl Into<String>,
    ) -> Result<Self> {
        let label = label.into();
        let positive = positive.into();
        if features.is_empty() {
            return Err(Error::Schema("at least one feature is required".into()));
        }
        let mut names = HashSet::new();
        for f in &features {
            if !names.insert(f.name.as_str()) {
                return Err(Error::Schema(format!("duplicate feature name `{}`", f.name)));
            }
            if let FeatureKind::Categorical(cats) = &f.kind {
                if cats.is_empty() {
                    return Err(Error::Schema(format!("feature `{}` has no categories", f.name)));
                }
                let uniq: HashSet<_> = cats.iter().collect();
                if uniq.len() != cats.len() {
                    return Err(Error::Schema(format!("feature `{}` has duplicate categories", f.name)));
                }
            }
        }
        if names.contains(label.as_str()) {
            return Err(Error::Schema(format!("label `{label}` is also a feature")));
        }
        if label_values[0] == label_values[1] {
            return Err(Error::Schema("label values must differ".into()));
        }
        if !label_values.contains(&positive) {
            return Err(Error::Schema(format!("positive class `{positive}` is not a declared label value")));
        }
        Ok(FeatureSchema {
            features,
            label,
            label_values,
            positive,
        })
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        Ok(toml::from_str(s)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("schema serializes")
    }

    /// Number of collectable features.
    pub fn d(&self) -> usize {
        self.features.len()
    }

    pub fn features(&self) -> &[FeatureSpec] {
        &self.features
    }

    pub fn feature(&self, i: usize) -> &FeatureSpec {
        &self.features[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.features.iter().position(|f| f.name == name)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn positive(&self) -> &str {
        &self.positive
    }

    pub fn label_values(&self) -> &[String; 2] {
        &self.label_values
    }

    pub fn all_features(&self) -> FeatureSet {
        FeatureSet::full(self.d())
    }

    pub fn encoded_width(&self, selected: &FeatureSet) -> usize {
        selected.iter().map(|f| self.features[f].encoded_width()).sum()
    }

    /// Stable within a build; used to tag encoded matrices.
    pub fn fingerprint(&self) -> u64 {
        let mut h = DefaultHasher::new();
        self.hash(&mut h);
        h.finish()
    }

    fn check_subset(&self, selected: &FeatureSet) -> Result<()> {
        match selected.last() {
            Some(m) if m >= self.d() => Err(Error::InvalidArgument(format!(
                "feature index {m} out of range for d = {}",
                self.d()
            ))),
            _ => Ok(()),
        }
    }
}

/// One raw column. Categorical cells hold the category's position in the
/// schema's category list.
#[derive(Clone, Debug, PartialEq)]
pub enum Column {
    Numeric(Vec<f64>),
    Categorical(Vec<u32>),
}

impl Column {
    fn len(&self) -> usize {
        match self {
            Column::Numeric(v) => v.len(),
            Column::Categorical(v) => v.len(),
        }
    }

    fn select(&self, rows: &[usize]) -> Column {
        match self {
            Column::Numeric(v) => Column::Numeric(rows.iter().map(|&r| v[r]).collect()),
            Column::Categorical(v) => Column::Categorical(rows.iter().map(|&r| v[r]).collect()),
        }
    }

    fn extend_from(&mut self, other: &Column) {
        match (self, other) {
            (Column::Numeric(a), Column::Numeric(b)) => a.extend_from_slice(b),
            (Column::Categorical(a), Column::Categorical(b)) => a.extend_from_slice(b),
            _ => panic!("column kind mismatch"),
        }
    }

    fn empty_like(&self) -> Column {
        match self {
            Column::Numeric(_) => Column::Numeric(Vec::new()),
            Column::Categorical(_) => Column::Categorical(Vec::new()),
        }
    }
}

/// Raw (un-encoded) instances over a feature set, stored column-wise in the
/// set's canonical order.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    features: FeatureSet,
    columns: Vec<Column>,
    rows: usize,
}

impl Table {
    pub fn new(features: FeatureSet, columns: Vec<Column>) -> Result<Self> {
        if features.len() != columns.len() {
            return Err(Error::LengthMismatch(features.len(), columns.len()));
        }
        let rows = columns.first().map_or(0, Column::len);
        if let Some(c) = columns.iter().find(|c| c.len() != rows) {
            return Err(Error::LengthMismatch(rows, c.len()));
        }
        Ok(Table {
            features,
            columns,
            rows,
        })
    }

    pub fn features(&self) -> &FeatureSet {
        &self.features
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn column(&self, feature: usize) -> Option<&Column> {
        self.features.position(feature).map(|p| &self.columns[p])
    }

    pub fn select_rows(&self, rows: &[usize]) -> Table {
        Table {
            features: self.features.clone(),
            columns: self.columns.iter().map(|c| c.select(rows)).collect(),
            rows: rows.len(),
        }
    }

    /// Projection onto `subset`, which must be contained in this table's
    /// feature set.
    pub fn restrict(&self, subset: &FeatureSet) -> Table {
        let columns = subset
            .iter()
            .map(|f| self.column(f).expect("restrict to a non-subset").clone())
            .collect();
        Table {
            features: subset.clone(),
            columns,
            rows: self.rows,
        }
    }

    /// `restrict(subset)` followed by `select_rows(rows)`, without copying
    /// unused columns.
    pub fn gather(&self, subset: &FeatureSet, rows: &[usize]) -> Table {
        let columns = subset
            .iter()
            .map(|f| self.column(f).expect("gather from a non-subset").select(rows))
            .collect();
        Table {
            features: subset.clone(),
            columns,
            rows: rows.len(),
        }
    }

    /// Empty table over `subset` with column kinds taken from `schema`.
    pub fn empty(schema: &FeatureSchema, subset: &FeatureSet) -> Table {
        let columns = subset
            .iter()
            .map(|f| match schema.feature(f).kind {
                FeatureKind::Numeric => Column::Numeric(Vec::new()),
                FeatureKind::Categorical(_) => Column::Categorical(Vec::new()),
            })
            .collect();
        Table {
            features: subset.clone(),
            columns,
            rows: 0,
        }
    }

    /// Empty table over `subset` with the same column kinds as `self`.
    pub fn empty_restricted(&self, subset: &FeatureSet) -> Table {
        let columns = subset
            .iter()
            .map(|f| self.column(f).expect("restrict to a non-subset").empty_like())
            .collect();
        Table {
            features: subset.clone(),
            columns,
            rows: 0,
        }
    }

    /// Appends the rows of `other` restricted to this table's features.
    pub fn append_restricted(&mut self, other: &Table) {
        for (f, col) in self.features.iter().zip(self.columns.iter_mut()) {
            col.extend_from(other.column(f).expect("source lacks a required feature"));
        }
        self.rows += other.rows;
    }
}

/// A labelled table over all schema features. Labels are 1 for the
/// positive class and 0 otherwise.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    schema: Arc<FeatureSchema>,
    table: Table,
    labels: Vec<u8>,
}

impl Dataset {
    pub fn new(schema: Arc<FeatureSchema>, table: Table, labels: Vec<u8>) -> Result<Self> {
        if table.features() != &schema.all_features() {
            return Err(Error::InvalidArgument("table does not cover every schema feature".into()));
        }
        if table.rows() != labels.len() {
            return Err(Error::LengthMismatch(table.rows(), labels.len()));
        }
        if labels.iter().any(|&y| y > 1) {
            return Err(Error::InvalidArgument("labels must be 0 or 1".into()));
        }
        Ok(Dataset { schema, table, labels })
    }

    pub fn schema(&self) -> &Arc<FeatureSchema> {
        &self.schema
    }

    pub fn table(&self) -> &Table {
        &self.table
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn rows(&self) -> usize {
        self.labels.len()
    }

    pub fn positives(&self) -> usize {
        self.labels.iter().filter(|&&y| y == 1).count()
    }

    pub fn select_rows(&self, rows: &[usize]) -> Dataset {
        Dataset {
            schema: self.schema.clone(),
            table: self.table.select_rows(rows),
            labels: rows.iter().map(|&r| self.labels[r]).collect(),
        }
    }

    /// Row indices grouped by class: `[negatives, positives]`.
    pub fn rows_by_class(&self) -> [Vec<usize>; 2] {
        let mut out = [Vec::new(), Vec::new()];
        for (i, &y) in self.labels.iter().enumerate() {
            out[y as usize].push(i);
        }
        out
    }
}

pub fn load_csv(path: impl AsRef<Path>, schema: Arc<FeatureSchema>) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, schema)
}

/// Reads CSV with a header row. Row numbers in errors are 1-based data
/// rows (the header is not counted).
pub fn read_csv<R: std::io::Read>(reader: R, schema: Arc<FeatureSchema>) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let header_pos: HashMap<&str, usize> = headers.iter().enumerate().map(|(i, h)| (h, i)).collect();
    for h in headers.iter() {
        if h != schema.label() && schema.index_of(h).is_none() {
            return Err(Error::UndeclaredColumn(h.to_string()));
        }
    }
    let col_of = |name: &str| header_pos.get(name).copied().ok_or_else(|| Error::MissingColumn(name.to_string()));
    let feature_cols = schema
        .features()
        .iter()
        .map(|f| col_of(&f.name))
        .collect::<Result<Vec<_>>>()?;
    let label_col = col_of(schema.label())?;

    let lookups: Vec<Option<HashMap<&str, u32>>> = schema
        .features()
        .iter()
        .map(|f| match &f.kind {
            FeatureKind::Numeric => None,
            FeatureKind::Categorical(cats) => Some(cats.iter().enumerate().map(|(i, c)| (c.as_str(), i as u32)).collect()),
        })
        .collect();
    let mut columns: Vec<Column> = schema
        .features()
        .iter()
        .map(|f| match f.kind {
            FeatureKind::Numeric => Column::Numeric(Vec::new()),
            FeatureKind::Categorical(_) => Column::Categorical(Vec::new()),
        })
        .collect();
    let mut labels = Vec::new();

    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = i as u64 + 1;
        for (f, spec) in schema.features().iter().enumerate() {
            let cell = rec.get(feature_cols[f]).unwrap_or("");
            if cell.is_empty() {
                return Err(Error::MissingValue {
                    row,
                    column: spec.name.clone(),
                });
            }
            match (&mut columns[f], &lookups[f]) {
                (Column::Numeric(v), _) => {
                    let x: f64 = cell.parse().map_err(|_| Error::BadNumber {
                        row,
                        column: spec.name.clone(),
                        value: cell.to_string(),
                    })?;
                    if !x.is_finite() {
                        return Err(Error::BadNumber {
                            row,
                            column: spec.name.clone(),
                            value: cell.to_string(),
                        });
                    }
                    v.push(x);
                }
                (Column::Categorical(v), Some(lookup)) => {
                    let code = lookup.get(cell).ok_or_else(|| Error::UnseenCategory {
                        row,
                        column: spec.name.clone(),
                        value: cell.to_string(),
                    })?;
                    v.push(*code);
                }
                (Column::Categorical(_), None) => unreachable!(),
            }
        }
        let label = rec.get(label_col).unwrap_or("");
        if label.is_empty() {
            return Err(Error::MissingValue {
                row,
                column: schema.label().to_string(),
            });
        }
        if !schema.label_values().iter().any(|v| v == label) {
            return Err(Error::BadLabel {
                row,
                value: label.to_string(),
            });
        }
        labels.push(u8::from(label == schema.positive()));
    }

    let table = Table::new(schema.all_features(), columns)?;
    Dataset::new(schema, table, labels)
}

/// Writes the dataset back out as CSV in schema column order.
pub fn write_csv<W: std::io::Write>(dataset: &Dataset, writer: W) -> Result<()> {
    let schema = dataset.schema();
    let mut w = csv::Writer::from_writer(writer);
    let mut header: Vec<&str> = schema.features().iter().map(|f| f.name.as_str()).collect();
    header.push(schema.label());
    w.write_record(&header)?;
    let negative = schema
        .label_values()
        .iter()
        .find(|v| *v != schema.positive())
        .expect("two distinct label values");
    let mut rec = Vec::with_capacity(header.len());
    for r in 0..dataset.rows() {
        rec.clear();
        for (f, spec) in schema.features().iter().enumerate() {
            match (dataset.table().column(f).unwrap(), &spec.kind) {
                (Column::Numeric(v), _) => rec.push(v[r].to_string()),
                (Column::Categorical(v), FeatureKind::Categorical(c)) => rec.push(c[v[r] as usize].clone()),
                _ => unreachable!(),
            }
        }
        rec.push(if dataset.labels()[r] == 1 {
            schema.positive().to_string()
        } else {
            negative.clone()
        });
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}

/// Disjoint acquisition pool and held-out test set.
#[derive(Clone, Debug)]
pub struct Partition {
    pub acquisition_pool: Dataset,
    pub test_set: Dataset,
    /// Source row indices, ascending.
    pub pool_rows: Vec<usize>,
    pub test_rows: Vec<usize>,
    pub test_fraction: f64,
    pub seed: u64,
}

/// Stratified split: each class contributes `round(fraction * count)` rows
/// to the test set. Both sides must keep at least one row of each class.
pub fn partition(dataset: &Dataset, test_fraction: f64, seed: u64) -> Result<Partition> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!("test fraction {test_fraction} not in (0,1)")));
    }
    let mut rng = seed::rng(seed);
    let mut pool_rows = Vec::new();
    let mut test_rows = Vec::new();
    for (class, mut rows) in dataset.rows_by_class().into_iter().enumerate() {
        if rows.len() < 2 {
            return Err(Error::Stratify(format!("class {class} has {} rows, need at least 2", rows.len())));
        }
        let take = (test_fraction * rows.len() as f64).round() as usize;
        if take == 0 || take == rows.len() {
            return Err(Error::Stratify(format!(
                "fraction {test_fraction} leaves one side without class {class} ({} rows)",
                rows.len()
            )));
        }
        rows.shuffle(&mut rng);
        test_rows.extend_from_slice(&rows[..take]);
        pool_rows.extend_from_slice(&rows[take..]);
    }
    pool_rows.sort_unstable();
    test_rows.sort_unstable();
    Ok(Partition {
        acquisition_pool: dataset.select_rows(&pool_rows),
        test_set: dataset.select_rows(&test_rows),
        pool_rows,
        test_rows,
        test_fraction,
        seed,
    })
}

/// Identifies the encoding a matrix was produced under.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EncodingSignature {
    pub features: FeatureSet,
    pub schema: u64,
}

/// Numeric matrix plus the encoding metadata needed to interpret it.
#[derive(Clone, Debug, PartialEq)]
pub struct EncodedMatrix {
    pub matrix: Matrix,
    pub signature: EncodingSignature,
    /// Raw feature index owning each encoded column.
    pub column_owner: Vec<usize>,
}

impl EncodedMatrix {
    pub fn rows(&self) -> usize {
        self.matrix.rows()
    }

    pub fn width(&self) -> usize {
        self.matrix.cols()
    }

    pub fn select_rows(&self, rows: &[usize]) -> EncodedMatrix {
        EncodedMatrix {
            matrix: self.matrix.select_rows(rows),
            signature: self.signature.clone(),
            column_owner: self.column_owner.clone(),
        }
    }
}

/// Numeric features pass through; categorical features expand to one
/// indicator column per declared category. Columns follow `selected` order.
pub fn encode(table: &Table, selected: &FeatureSet, schema: &FeatureSchema) -> Result<EncodedMatrix> {
    schema.check_subset(selected)?;
    if !selected.is_subset(table.features()) {
        return Err(Error::InvalidArgument(format!(
            "table over {} lacks columns for {}",
            table.features(),
            selected
        )));
    }
    let width = schema.encoded_width(selected);
    let rows = table.rows();
    let mut m = Matrix::zeros(rows, width);
    let mut column_owner = Vec::with_capacity(width);
    let mut offset = 0;
    for f in selected.iter() {
        let spec = schema.feature(f);
        match (table.column(f).unwrap(), &spec.kind) {
            (Column::Numeric(v), FeatureKind::Numeric) => {
                for (r, &x) in v.iter().enumerate() {
                    m.set(r, offset, x);
                }
            }
            (Column::Categorical(v), FeatureKind::Categorical(_)) => {
                for (r, &c) in v.iter().enumerate() {
                    m.set(r, offset + c as usize, 1.0);
                }
            }
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "column kind of `{}` disagrees with the schema",
                    spec.name
                )))
            }
        }
        column_owner.extend(std::iter::repeat(f).take(spec.encoded_width()));
        offset += spec.encoded_width();
    }
    Ok(EncodedMatrix {
        matrix: m,
        signature: EncodingSignature {
            features: selected.clone(),
            schema: schema.fingerprint(),
        },
        column_owner,
    })
}

/// Parameters for a synthetic fixture. Features `0..numeric` are numeric
/// (uniform on [0,1)), the rest categorical with four categories.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub rows: usize,
    pub numeric: usize,
    pub categorical: usize,
    pub informative: usize,
    pub noise: f64,
}

pub const SYNTH_CATEGORIES: usize = 4;

/// Label is `x >= 0.5` for a numeric informative feature, or
/// `category < 2` for a categorical one, flipped with probability `noise`.
pub fn synthesize(spec: &SynthSpec, seed: u64) -> Result<Dataset> {
    let d = spec.numeric + spec.categorical;
    if spec.informative >= d {
        return Err(Error::InvalidArgument(format!(
            "informative feature {} out of range for d = {d}",
            spec.informative
        )));
    }
    if !(0.0..0.5).contains(&spec.noise) {
        return Err(Error::InvalidArgument(format!("noise rate {} not in [0, 0.5)", spec.noise)));
    }
    let cats: Vec<String> = (0..SYNTH_CATEGORIES).map(|c| format!("c{c}")).collect();
    let features = (0..d)
        .map(|i| {
            if i < spec.numeric {
                FeatureSpec::numeric(format!("f{i}"))
            } else {
                FeatureSpec::categorical(format!("f{i}"), cats.clone())
            }
        })
        .collect();
    let schema = Arc::new(FeatureSchema::new(features, "label", ["0".into(), "1".into()], "1")?);

    let mut rng = seed::rng(seed);
    let mut columns: Vec<Column> = (0..d)
        .map(|i| {
            if i < spec.numeric {
                Column::Numeric(Vec::with_capacity(spec.rows))
            } else {
                Column::Categorical(Vec::with_capacity(spec.rows))
            }
        })
        .collect();
    let mut labels = Vec::with_capacity(spec.rows);
    for _ in 0..spec.rows {
        let mut y = 0u8;
        for (i, col) in columns.iter_mut().enumerate() {
            match col {
                Column::Numeric(v) => {
                    // two decimals keeps the CSV round trip exact
                    let x = (rng.gen_range(0..100) as f64) / 100.0;
                    if i == spec.informative {
                        y = u8::from(x >= 0.5);
                    }
                    v.push(x);
                }
                Column::Categorical(v) => {
                    let c = rng.gen_range(0..SYNTH_CATEGORIES as u32);
                    if i == spec.informative {
                        y = u8::from(c < 2);
                    }
                    v.push(c);
                }
            }
        }
        if spec.noise > 0.0 && rng.gen::<f64>() < spec.noise {
            y ^= 1;
        }
        labels.push(y);
    }
    let table = Table::new(schema.all_features(), columns)?;
    Dataset::new(schema, table, labels)
}
