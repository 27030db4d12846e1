//! Loss-matrix data model and CSV ingestion.
//!
//! A [`LossMatrix`] is a dense grid of per-(model, text) summed token
//! cross-entropy in nats, plus the token count each model's tokenizer
//! produced for that text. The pool-wide mean token length `n_bar` is
//! computed once at construction and is the shared normalizer for every
//! subset of the pool.

use std::collections::{HashMap, HashSet};
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const METADATA_HEADER: [&str; 3] = ["model_id", "family", "params_billions"];
pub const MATRIX_HEADER: [&str; 4] = ["model_id", "text_id", "sum_loss_nats", "token_count"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelMeta {
    pub model_id: String,
    pub family: String,
    /// Parameter count in units of 10^9.
    pub params_billions: f64,
}

impl ModelMeta {
    pub fn new(
        model_id: impl Into<String>,
        family: impl Into<String>,
        params_billions: f64,
    ) -> Self {
        ModelMeta {
            model_id: model_id.into(),
            family: family.into(),
            params_billions,
        }
    }

    fn validate(&self) -> Result<()> {
        let invalid = |reason: &str| Error::InvalidModel {
            model_id: self.model_id.clone(),
            reason: reason.to_string(),
        };
        if self.model_id.is_empty() {
            return Err(invalid("empty model_id"));
        }
        if self.family.is_empty() {
            return Err(invalid("empty family"));
        }
        if !(self.params_billions.is_finite() && self.params_billions > 0.0) {
            return Err(invalid("params_billions must be a positive finite number"));
        }
        Ok(())
    }
}

/// One (model, text) measurement.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LossCell {
    /// Sum of per-token negative log-likelihoods, nats.
    pub sum_loss: f64,
    /// Tokens under the owning model's tokenizer.
    pub token_count: u64,
}

/// Dense, validated (model x text) loss grid. Immutable after construction.
#[derive(Clone, Debug, PartialEq)]
pub struct LossMatrix {
    models: Vec<ModelMeta>,
    texts: Vec<String>,
    // model-major: index = model * n_texts + text
    sum_loss: Vec<f64>,
    token_count: Vec<u64>,
    n_bar: f64,
    index: HashMap<String, usize>,
    // canonical_rank[m] = position of model m when models are sorted by model_id
    canonical_rank: Vec<usize>,
}

impl LossMatrix {
    /// Builds a matrix from model metadata, text ids and model-major cells.
    pub fn new(models: Vec<ModelMeta>, texts: Vec<String>, cells: Vec<LossCell>) -> Result<Self> {
        if models.is_empty() {
            return Err(Error::EmptyMatrix("no models".into()));
        }
        if texts.is_empty() {
            return Err(Error::EmptyMatrix("no texts".into()));
        }
        let mut index = HashMap::with_capacity(models.len());
        for (i, m) in models.iter().enumerate() {
            m.validate()?;
            if index.insert(m.model_id.clone(), i).is_some() {
                return Err(Error::DuplicateId(format!("model_id {}", m.model_id)));
            }
        }
        let mut seen = HashSet::with_capacity(texts.len());
        for t in &texts {
            if !seen.insert(t.as_str()) {
                return Err(Error::DuplicateId(format!("text_id {t}")));
            }
        }
        let n_texts = texts.len();
        if cells.len() != models.len() * n_texts {
            // Report the first cell that has no slot.
            let m = (cells.len() / n_texts).min(models.len() - 1);
            let t = cells.len() % n_texts;
            return Err(Error::IncompleteMatrix {
                model_id: models[m].model_id.clone(),
                text_id: texts[t].clone(),
            });
        }
        for (i, c) in cells.iter().enumerate() {
            check_cell(
                &models[i / n_texts].model_id,
                &texts[i % n_texts],
                c.sum_loss,
                c.token_count as i64,
            )?;
        }

        let mut order: Vec<usize> = (0..models.len()).collect();
        order.sort_by(|&a, &b| models[a].model_id.cmp(&models[b].model_id));
        let mut canonical_rank = vec![0; models.len()];
        for (rank, &m) in order.iter().enumerate() {
            canonical_rank[m] = rank;
        }

        let sum_loss = cells.iter().map(|c| c.sum_loss).collect();
        let token_count: Vec<u64> = cells.iter().map(|c| c.token_count).collect();
        let n_bar = mean_of_counts(&token_count);
        Ok(LossMatrix {
            models,
            texts,
            sum_loss,
            token_count,
            n_bar,
            index,
            canonical_rank,
        })
    }

    pub fn models(&self) -> &[ModelMeta] {
        &self.models
    }

    pub fn texts(&self) -> &[String] {
        &self.texts
    }

    pub fn n_models(&self) -> usize {
        self.models.len()
    }

    pub fn n_texts(&self) -> usize {
        self.texts.len()
    }

    /// Cached pool-wide mean token length.
    pub fn n_bar(&self) -> f64 {
        self.n_bar
    }

    pub fn model_index(&self, model_id: &str) -> Result<usize> {
        self.index
            .get(model_id)
            .copied()
            .ok_or_else(|| Error::UnknownModel(model_id.to_string()))
    }

    pub fn cell(&self, model: usize, text: usize) -> LossCell {
        let i = model * self.texts.len() + text;
        LossCell {
            sum_loss: self.sum_loss[i],
            token_count: self.token_count[i],
        }
    }

    /// Text-level losses of one model, in text order.
    pub fn loss_row(&self, model: usize) -> &[f64] {
        let t = self.texts.len();
        &self.sum_loss[model * t..(model + 1) * t]
    }

    pub fn token_row(&self, model: usize) -> &[u64] {
        let t = self.texts.len();
        &self.token_count[model * t..(model + 1) * t]
    }

    /// Position of `model` in model_id sort order.
    pub fn canonical_rank(&self, model: usize) -> usize {
        self.canonical_rank[model]
    }

    /// Sorts model indices into canonical (model_id) order and removes repeats.
    pub fn canonicalize(&self, members: &mut Vec<usize>) {
        members.sort_by_key(|&m| self.canonical_rank[m]);
        members.dedup();
    }

    /// Sum of member parameter counts, accumulated in canonical member order
    /// so that equal sets always produce bit-identical totals.
    pub fn total_params(&self, canonical_members: &[usize]) -> f64 {
        canonical_members
            .iter()
            .map(|&m| self.models[m].params_billions)
            .sum()
    }

    /// Restricts the matrix to a subset of models (in the given order).
    /// `n_bar` is recomputed for the restricted pool.
    pub fn select_models(&self, models: &[usize]) -> Result<Self> {
        let metas = models.iter().map(|&m| self.models[m].clone()).collect();
        let cells = models
            .iter()
            .flat_map(|&m| (0..self.n_texts()).map(move |t| (m, t)))
            .map(|(m, t)| self.cell(m, t))
            .collect();
        LossMatrix::new(metas, self.texts.clone(), cells)
    }

    /// Reads the metadata and matrix CSVs from readers.
    pub fn from_readers<R1: Read, R2: Read>(metadata: R1, matrix: R2) -> Result<Self> {
        Self::from_readers_named(
            metadata,
            Path::new("<metadata>"),
            matrix,
            Path::new("<matrix>"),
        )
    }

    fn from_readers_named<R1: Read, R2: Read>(
        metadata: R1,
        metadata_name: &Path,
        matrix: R2,
        matrix_name: &Path,
    ) -> Result<Self> {
        let models = read_metadata(metadata, metadata_name)?;
        let mut index = HashMap::with_capacity(models.len());
        for (i, m) in models.iter().enumerate() {
            m.validate()?;
            if index.insert(m.model_id.clone(), i).is_some() {
                return Err(Error::DuplicateId(format!("model_id {}", m.model_id)));
            }
        }

        let mut texts: Vec<String> = Vec::new();
        let mut text_index: HashMap<String, usize> = HashMap::new();
        let mut cells: HashMap<(usize, usize), LossCell> = HashMap::new();
        let mut rdr = csv_reader(matrix);
        check_header(&mut rdr, &MATRIX_HEADER, matrix_name)?;
        for row in rdr.deserialize::<MatrixRow>() {
            let row = row.map_err(|e| Error::csv(matrix_name, e))?;
            let m = *index
                .get(&row.model_id)
                .ok_or_else(|| Error::UnknownModel(row.model_id.clone()))?;
            check_cell(
                &row.model_id,
                &row.text_id,
                row.sum_loss_nats,
                row.token_count,
            )?;
            let t = match text_index.get(&row.text_id) {
                Some(&t) => t,
                None => {
                    if row.text_id.is_empty() {
                        return Err(Error::InvalidCell {
                            model_id: row.model_id,
                            text_id: row.text_id,
                            reason: "empty text_id".into(),
                        });
                    }
                    texts.push(row.text_id.clone());
                    text_index.insert(row.text_id.clone(), texts.len() - 1);
                    texts.len() - 1
                }
            };
            let cell = LossCell {
                sum_loss: row.sum_loss_nats,
                token_count: row.token_count as u64,
            };
            if cells.insert((m, t), cell).is_some() {
                return Err(Error::DuplicateId(format!(
                    "cell ({}, {})",
                    row.model_id, row.text_id
                )));
            }
        }
        if texts.is_empty() {
            return Err(Error::EmptyMatrix("matrix file has no rows".into()));
        }

        let mut dense = Vec::with_capacity(models.len() * texts.len());
        for (m, meta) in models.iter().enumerate() {
            for (t, text_id) in texts.iter().enumerate() {
                match cells.get(&(m, t)) {
                    Some(c) => dense.push(*c),
                    None => {
                        return Err(Error::IncompleteMatrix {
                            model_id: meta.model_id.clone(),
                            text_id: text_id.clone(),
                        })
                    }
                }
            }
        }
        LossMatrix::new(models, texts, dense)
    }

    /// Canonical metadata CSV: rows sorted by model_id.
    pub fn write_metadata_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let path = Path::new("<metadata>");
        w.write_record(METADATA_HEADER)
            .map_err(|e| Error::csv(path, e))?;
        for m in self.canonical_model_order() {
            let meta = &self.models[m];
            w.write_record([
                meta.model_id.as_str(),
                meta.family.as_str(),
                &format_sig12(meta.params_billions),
            ])
            .map_err(|e| Error::csv(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    /// Canonical matrix CSV: rows sorted by (model_id, text_id).
    pub fn write_matrix_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let path = Path::new("<matrix>");
        w.write_record(MATRIX_HEADER)
            .map_err(|e| Error::csv(path, e))?;
        let mut text_order: Vec<usize> = (0..self.n_texts()).collect();
        text_order.sort_by(|&a, &b| self.texts[a].cmp(&self.texts[b]));
        for m in self.canonical_model_order() {
            for &t in &text_order {
                let c = self.cell(m, t);
                w.write_record([
                    self.models[m].model_id.as_str(),
                    self.texts[t].as_str(),
                    &format_sig12(c.sum_loss),
                    &c.token_count.to_string(),
                ])
                .map_err(|e| Error::csv(path, e))?;
            }
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    /// Writes both canonical CSVs to disk.
    pub fn save(&self, metadata_path: &Path, matrix_path: &Path) -> Result<()> {
        let mut meta = Vec::new();
        self.write_metadata_csv(&mut meta)?;
        let mut matrix = Vec::new();
        self.write_matrix_csv(&mut matrix)?;
        std::fs::write(metadata_path, meta).map_err(|e| Error::io(metadata_path, e))?;
        std::fs::write(matrix_path, matrix).map_err(|e| Error::io(matrix_path, e))
    }

    fn canonical_model_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.n_models()).collect();
        order.sort_by_key(|&m| self.canonical_rank[m]);
        order
    }
}

/// Loads and validates a loss matrix from the metadata and matrix CSV files.
/// Model order follows the metadata file; text order follows first appearance
/// in the matrix file.
pub fn load_loss_matrix(metadata_path: &Path, matrix_path: &Path) -> Result<LossMatrix> {
    let meta = std::fs::File::open(metadata_path).map_err(|e| Error::io(metadata_path, e))?;
    let matrix = std::fs::File::open(matrix_path).map_err(|e| Error::io(matrix_path, e))?;
    LossMatrix::from_readers_named(
        std::io::BufReader::new(meta),
        metadata_path,
        std::io::BufReader::new(matrix),
        matrix_path,
    )
}

/// Mean token count over every (model, text) cell, recomputed from the grid.
pub fn mean_token_length(matrix: &LossMatrix) -> f64 {
    mean_of_counts(&matrix.token_count)
}

fn mean_of_counts(counts: &[u64]) -> f64 {
    let total: u128 = counts.iter().map(|&c| c as u128).sum();
    total as f64 / counts.len() as f64
}

/// Shortest decimal rendering of `x` after rounding to 12 significant digits.
pub fn format_sig12(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{}", if x == 0.0 { 0.0 } else { x });
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    format!("{rounded}")
}

fn check_cell(model_id: &str, text_id: &str, sum_loss: f64, token_count: i64) -> Result<()> {
    let reason = if !sum_loss.is_finite() || sum_loss < 0.0 {
        Some(format!("sum_loss must be finite and >= 0, got {sum_loss}"))
    } else if token_count < 1 {
        Some(format!("token_count must be >= 1, got {token_count}"))
    } else {
        None
    };
    match reason {
        Some(reason) => Err(Error::InvalidCell {
            model_id: model_id.to_string(),
            text_id: text_id.to_string(),
            reason,
        }),
        None => Ok(()),
    }
}

#[derive(Deserialize)]
struct MatrixRow {
    model_id: String,
    text_id: String,
    sum_loss_nats: f64,
    token_count: i64,
}

fn csv_reader<R: Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .has_headers(true)
        .from_reader(r)
}

fn check_header<R: Read>(rdr: &mut csv::Reader<R>, expected: &[&str], path: &Path) -> Result<()> {
    let headers = rdr.headers().map_err(|e| Error::csv(path, e))?;
    if headers.iter().ne(expected.iter().copied()) {
        return Err(Error::BadHeader {
            path: path.to_path_buf(),
            reason: format!(
                "expected `{}`, found `{}`",
                expected.join(","),
                headers.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }
    Ok(())
}

fn read_metadata<R: Read>(r: R, path: &Path) -> Result<Vec<ModelMeta>> {
    let mut rdr = csv_reader(r);
    check_header(&mut rdr, &METADATA_HEADER, path)?;
    let mut models = Vec::new();
    for row in rdr.deserialize::<ModelMeta>() {
        models.push(row.map_err(|e| Error::csv(path, e))?);
    }
    if models.is_empty() {
        return Err(Error::EmptyMatrix("metadata file has no models".into()));
    }
    Ok(models)
}
