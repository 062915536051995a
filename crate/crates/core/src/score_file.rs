//! The CSV score-file format consumed by the CLI: UTF-8, LF line endings,
//! `.` decimal separator, no quoting (ids must not contain commas).

use std::io::{BufRead, Write};
use std::path::Path;

use crate::bank::{format_f64, parse_f64};
use crate::error::{Error, Result};

pub const SCORE_FILE_HEADER: &str = "sample_id,mos,pred";

/// Parsed rows of `sample_id,mos,pred`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreFile {
    pub ids: Vec<String>,
    pub mos: Vec<f64>,
    pub preds: Vec<f64>,
}

impl ScoreFile {
    pub fn new(ids: Vec<String>, mos: Vec<f64>, preds: Vec<f64>) -> Result<Self> {
        if ids.len() != mos.len() || ids.len() != preds.len() {
            return Err(Error::LengthMismatch {
                left: ids.len(),
                right: mos.len().max(preds.len()),
            });
        }
        let mut seen = std::collections::HashSet::with_capacity(ids.len());
        for id in &ids {
            if id.is_empty() || id.contains(',') || id.contains('\n') {
                return Err(Error::InvalidConfig(format!(
                    "sample id {id:?} is empty or contains a comma/newline"
                )));
            }
            if !seen.insert(id.as_str()) {
                return Err(Error::DuplicateId { id: id.clone() });
            }
        }
        crate::error::ensure_finite("mos column", &mos)?;
        crate::error::ensure_finite("pred column", &preds)?;
        Ok(Self { ids, mos, preds })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn read_from<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader.lines();
        let header = lines.next().transpose()?;
        if header.as_deref() != Some(SCORE_FILE_HEADER) {
            return Err(Error::Parse {
                line: 1,
                message: format!("expected header {SCORE_FILE_HEADER:?}"),
            });
        }

        let mut ids = Vec::new();
        let mut mos = Vec::new();
        let mut preds = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for (offset, line) in lines.enumerate() {
            let line_no = offset + 2;
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 3 {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("expected 3 fields, got {}", fields.len()),
                });
            }
            let id = fields[0];
            if id.is_empty() {
                return Err(Error::Parse {
                    line: line_no,
                    message: "empty sample_id".into(),
                });
            }
            if !seen.insert(id.to_string()) {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("duplicate sample id {id:?}"),
                });
            }
            ids.push(id.to_string());
            mos.push(parse_f64(fields[1], line_no, "mos")?);
            preds.push(parse_f64(fields[2], line_no, "pred")?);
        }
        Ok(Self { ids, mos, preds })
    }

    /// 17-significant-digit rendering, so read-after-write reproduces every
    /// value exactly.
    pub fn write_to<W: Write>(&self, mut writer: W) -> Result<()> {
        writeln!(writer, "{SCORE_FILE_HEADER}")?;
        for ((id, &m), &p) in self.ids.iter().zip(&self.mos).zip(&self.preds) {
            writeln!(writer, "{id},{},{}", format_f64(m), format_f64(p))?;
        }
        Ok(())
    }

    pub fn load<P: AsRef<Path>>(path: P) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::read_from(std::io::BufReader::new(file))
    }

    pub fn save<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_to(std::io::BufWriter::new(file))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ScoreFile {
        ScoreFile::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![0.1 + 0.2, -1.0 / 3.0, 2.5],
            vec![std::f64::consts::E, 1e-17, -42.0],
        )
        .unwrap()
    }

    #[test]
    fn round_trip_reproduces_every_bit() {
        let original = sample();
        let mut buffer = Vec::new();
        original.write_to(&mut buffer).unwrap();
        let restored = ScoreFile::read_from(buffer.as_slice()).unwrap();
        assert_eq!(original.ids, restored.ids);
        for (a, b) in original.mos.iter().zip(&restored.mos) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        for (a, b) in original.preds.iter().zip(&restored.preds) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = ScoreFile::read_from("wrong_header\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));

        let text = format!("{SCORE_FILE_HEADER}\na,1.0,2.0\nb,oops,2.0\n");
        let err = ScoreFile::read_from(text.as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }));

        let text = format!("{SCORE_FILE_HEADER}\na,1.0,2.0\na,1.0,2.0\n");
        let err = ScoreFile::read_from(text.as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }));

        let text = format!("{SCORE_FILE_HEADER}\na,1.0\n");
        let err = ScoreFile::read_from(text.as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn rejects_non_finite_and_bad_ids() {
        assert!(ScoreFile::new(vec!["a,b".into()], vec![1.0], vec![1.0]).is_err());
        assert!(ScoreFile::new(vec!["a".into()], vec![f64::NAN], vec![1.0]).is_err());
        assert!(matches!(
            ScoreFile::new(
                vec!["a".into(), "a".into()],
                vec![1.0, 2.0],
                vec![1.0, 2.0]
            ),
            Err(Error::DuplicateId { .. })
        ));
    }
}
