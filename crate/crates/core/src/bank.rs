//! Memory bank of per-sample scores from previous batches.
//!
//! Two dictionaries keyed by sample id: one holding the latest predicted
//! score of every sample seen so far (a gradient-free scalar), one holding
//! its ground-truth score. Assembling a batch against the bank widens the
//! sample set the monotonicity loss sees from the batch to everything
//! retained, without adding gradient paths — bank entries enter the loss as
//! constants.
//!
//! Single-writer: updates and evictions happen on the training thread; an
//! assembly is an immutable value once produced.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{ensure_finite, ensure_same_len, Error, Result};
use crate::soft_rank::GradTaggedScores;

/// Tolerance for deciding that a re-seen label disagrees with the stored
/// one. Labels are constants; anything beyond rounding noise is a bug in
/// the caller's data pipeline.
const LABEL_TOLERANCE: f64 = 1e-9;

/// Header of the line-oriented persistence format.
pub const BANK_FILE_HEADER: &str = "sample_id,pred,mos,epoch_stamp";

/// One stored score with the epoch it was last touched.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BankEntry {
    pub score: f64,
    pub epoch_stamp: u64,
}

#[derive(Debug, Clone)]
pub struct MemoryBank {
    predicted: BTreeMap<String, BankEntry>,
    ground_truth: BTreeMap<String, BankEntry>,
    retention_epochs: u64,
}

impl MemoryBank {
    /// A bank that keeps entries for the last `retention_epochs` epochs.
    pub fn new(retention_epochs: u64) -> Result<Self> {
        if retention_epochs == 0 {
            return Err(Error::InvalidConfig(
                "retention_epochs must be at least 1".into(),
            ));
        }
        Ok(Self {
            predicted: BTreeMap::new(),
            ground_truth: BTreeMap::new(),
            retention_epochs,
        })
    }

    pub fn retention_epochs(&self) -> u64 {
        self.retention_epochs
    }

    pub fn len(&self) -> usize {
        self.predicted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.predicted.is_empty()
    }

    pub fn contains(&self, id: &str) -> bool {
        self.predicted.contains_key(id)
    }

    pub fn predicted_entry(&self, id: &str) -> Option<&BankEntry> {
        self.predicted.get(id)
    }

    pub fn ground_truth_entry(&self, id: &str) -> Option<&BankEntry> {
        self.ground_truth.get(id)
    }

    /// Records a batch: predicted entries are overwritten with the new
    /// scalars and stamped with `epoch`; ground-truth entries are inserted
    /// on first sight and verified against on every later sight.
    ///
    /// Epochs are expected to be non-decreasing across calls; stamps never
    /// move backwards.
    pub fn update<S: AsRef<str>>(
        &mut self,
        ids: &[S],
        preds: &[f64],
        mos: &[f64],
        epoch: u64,
    ) -> Result<()> {
        ensure_same_len(ids.len(), preds.len())?;
        ensure_same_len(ids.len(), mos.len())?;
        ensure_finite("predicted scores", preds)?;
        ensure_finite("ground-truth scores", mos)?;

        // Validate labels before touching anything, so a conflict cannot
        // leave the bank half-updated.
        for (id, &label) in ids.iter().zip(mos) {
            if let Some(existing) = self.ground_truth.get(id.as_ref()) {
                if (existing.score - label).abs() > LABEL_TOLERANCE {
                    return Err(Error::LabelConflict {
                        id: id.as_ref().to_string(),
                        stored: existing.score,
                        incoming: label,
                    });
                }
            }
        }

        for ((id, &pred), &label) in ids.iter().zip(preds).zip(mos) {
            let id = id.as_ref();
            let stamp = |old: Option<&BankEntry>| match old {
                Some(entry) => entry.epoch_stamp.max(epoch),
                None => epoch,
            };
            let pred_stamp = stamp(self.predicted.get(id));
            self.predicted.insert(
                id.to_string(),
                BankEntry {
                    score: pred,
                    epoch_stamp: pred_stamp,
                },
            );
            let gt_stamp = stamp(self.ground_truth.get(id));
            let gt_score = self
                .ground_truth
                .get(id)
                .map(|entry| entry.score)
                .unwrap_or(label);
            self.ground_truth.insert(
                id.to_string(),
                BankEntry {
                    score: gt_score,
                    epoch_stamp: gt_stamp,
                },
            );
        }
        Ok(())
    }

    /// Drops every entry stamped at or before `current_epoch - retention`,
    /// jointly from both dictionaries.
    pub fn evict(&mut self, current_epoch: u64) {
        if current_epoch < self.retention_epochs {
            return;
        }
        let cutoff = current_epoch - self.retention_epochs;
        let stale: Vec<String> = self
            .predicted
            .iter()
            .filter(|(_, entry)| entry.epoch_stamp <= cutoff)
            .map(|(id, _)| id.clone())
            .collect();
        for id in &stale {
            self.predicted.remove(id);
            self.ground_truth.remove(id);
        }
    }

    /// Bank context for a batch: the (predicted, ground-truth) scores of
    /// every entry whose id is *not* in `exclude`, in sorted id order.
    pub fn context_excluding<S: AsRef<str>>(&self, exclude: &[S]) -> (Vec<f64>, Vec<f64>) {
        let current: std::collections::HashSet<&str> =
            exclude.iter().map(|s| s.as_ref()).collect();
        let mut preds = Vec::new();
        let mut labels = Vec::new();
        for (id, entry) in &self.predicted {
            if current.contains(id.as_str()) {
                continue;
            }
            preds.push(entry.score);
            labels.push(self.ground_truth[id].score);
        }
        (preds, labels)
    }

    /// Union of the current batch and the bank: current elements first with
    /// live gradients and their fresh predictions (a stale bank copy of the
    /// same sample is excluded), then the remaining bank entries in sorted
    /// id order as constants. The second vector is the aligned ground
    /// truth.
    pub fn assemble(
        &self,
        current_ids: &[String],
        current_preds: &[f64],
        current_mos: &[f64],
    ) -> Result<(GradTaggedScores, Vec<f64>)> {
        ensure_same_len(current_ids.len(), current_preds.len())?;
        ensure_same_len(current_ids.len(), current_mos.len())?;

        let excluded: std::collections::HashSet<&str> =
            current_ids.iter().map(|s| s.as_str()).collect();

        let mut values = current_preds.to_vec();
        let mut mask = vec![true; current_ids.len()];
        let mut ids = current_ids.to_vec();
        let mut mos = current_mos.to_vec();

        for (id, entry) in &self.predicted {
            if excluded.contains(id.as_str()) {
                continue;
            }
            values.push(entry.score);
            mask.push(false);
            ids.push(id.clone());
            mos.push(self.ground_truth[id].score);
        }

        let tagged = GradTaggedScores::with_ids(values, mask, ids)?;
        Ok((tagged, mos))
    }

    /// Writes all entries as `sample_id,pred,mos,epoch_stamp` lines after a
    /// header, with 17-significant-digit decimals so the round trip is
    /// lossless.
    pub fn write_to<W: Write>(&self, mut writer: W) -> Result<()> {
        writeln!(writer, "{BANK_FILE_HEADER}")?;
        for (id, entry) in &self.predicted {
            if id.contains(',') || id.contains('\n') {
                return Err(Error::InvalidConfig(format!(
                    "sample id {id:?} cannot be serialized: ids must not contain commas or newlines"
                )));
            }
            let label = &self.ground_truth[id];
            writeln!(
                writer,
                "{id},{},{},{}",
                format_f64(entry.score),
                format_f64(label.score),
                entry.epoch_stamp
            )?;
        }
        Ok(())
    }

    /// Reads a bank previously written by [`write_to`](Self::write_to).
    /// The retention horizon is configuration, not state, so the caller
    /// supplies it.
    pub fn read_from<R: BufRead>(reader: R, retention_epochs: u64) -> Result<Self> {
        let mut bank = Self::new(retention_epochs)?;
        let mut lines = reader.lines();
        let header = lines.next().transpose()?;
        if header.as_deref() != Some(BANK_FILE_HEADER) {
            return Err(Error::Parse {
                line: 1,
                message: format!("expected header {BANK_FILE_HEADER:?}"),
            });
        }
        for (offset, line) in lines.enumerate() {
            let line_no = offset + 2;
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 4 {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("expected 4 fields, got {}", fields.len()),
                });
            }
            let id = fields[0].to_string();
            if bank.predicted.contains_key(&id) {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("duplicate sample id {id:?}"),
                });
            }
            let pred = parse_f64(fields[1], line_no, "pred")?;
            let mos = parse_f64(fields[2], line_no, "mos")?;
            let stamp: u64 = fields[3].parse().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("invalid epoch_stamp {:?}", fields[3]),
            })?;
            bank.predicted.insert(
                id.clone(),
                BankEntry {
                    score: pred,
                    epoch_stamp: stamp,
                },
            );
            bank.ground_truth.insert(
                id,
                BankEntry {
                    score: mos,
                    epoch_stamp: stamp,
                },
            );
        }
        Ok(bank)
    }

    pub fn save<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_to(std::io::BufWriter::new(file))
    }

    pub fn load<P: AsRef<Path>>(path: P, retention_epochs: u64) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::read_from(std::io::BufReader::new(file), retention_epochs)
    }
}

/// 17 significant decimal digits: enough to reproduce any f64 exactly.
pub(crate) fn format_f64(value: f64) -> String {
    format!("{value:.16e}")
}

pub(crate) fn parse_f64(text: &str, line: usize, field: &str) -> Result<f64> {
    let value: f64 = text.parse().map_err(|_| Error::Parse {
        line,
        message: format!("invalid {field} value {text:?}"),
    })?;
    if !value.is_finite() {
        return Err(Error::Parse {
            line,
            message: format!("non-finite {field} value {text:?}"),
        });
    }
    Ok(value)
}
