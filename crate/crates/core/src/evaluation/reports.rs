//! CSV artifacts: `cv_report.csv`, `roc.csv`, `classification_report.csv`.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{CvResult, EvalError, MetricsReport, RocCurve};
use crate::dataset::PartyLabel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReportRow {
    pub model: String,
    /// Fold index, or `mean` for the summary row.
    pub fold: String,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocRow {
    pub model: String,
    pub threshold: f64,
    pub fpr: f64,
    pub tpr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationRow {
    pub model: String,
    pub threshold: f64,
    pub label: PartyLabel,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn write_rows<W: Write, T: Serialize>(
    writer: W,
    header: &[&str],
    rows: &[T],
) -> Result<(), EvalError> {
    let mut wtr = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(writer);
    wtr.write_record(header)?;
    for r in rows {
        wtr.serialize(r)?;
    }
    wtr.flush()?;
    Ok(())
}

fn read_rows<R: Read, T: for<'de> Deserialize<'de>>(
    reader: R,
    header: &[&str],
) -> Result<Vec<T>, EvalError> {
    let mut rdr = csv::Reader::from_reader(reader);
    let found: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if found != header {
        return Err(EvalError::BadReport(format!(
            "expected header {header:?}, found {found:?}"
        )));
    }
    rdr.deserialize()
        .map(|r| r.map_err(EvalError::from))
        .collect()
}

pub const CV_HEADER: [&str; 3] = ["model", "fold", "accuracy"];
pub const ROC_HEADER: [&str; 4] = ["model", "threshold", "fpr", "tpr"];
pub const CLASSIFICATION_HEADER: [&str; 6] =
    ["model", "threshold", "label", "precision", "recall", "f1"];

pub fn cv_rows(model: &str, cv: &CvResult) -> Vec<CvReportRow> {
    let mut rows: Vec<CvReportRow> = cv
        .fold_accuracies
        .iter()
        .enumerate()
        .map(|(f, &accuracy)| CvReportRow {
            model: model.to_string(),
            fold: f.to_string(),
            accuracy,
        })
        .collect();
    rows.push(CvReportRow {
        model: model.to_string(),
        fold: "mean".to_string(),
        accuracy: cv.mean_accuracy,
    });
    rows
}

pub fn roc_rows(model: &str, curve: &RocCurve) -> Vec<RocRow> {
    curve
        .points
        .iter()
        .map(|p| RocRow {
            model: model.to_string(),
            threshold: p.threshold,
            fpr: p.fpr,
            tpr: p.tpr,
        })
        .collect()
}

pub fn classification_rows(
    model: &str,
    threshold: f64,
    report: &MetricsReport,
) -> Vec<ClassificationRow> {
    PartyLabel::BOTH
        .into_iter()
        .map(|label| {
            let c = report.class(label);
            ClassificationRow {
                model: model.to_string(),
                threshold,
                label,
                precision: c.precision,
                recall: c.recall,
                f1: c.f1,
            }
        })
        .collect()
}

pub fn write_cv_report<W: Write>(writer: W, rows: &[CvReportRow]) -> Result<(), EvalError> {
    write_rows(writer, &CV_HEADER, rows)
}

pub fn read_cv_report<R: Read>(reader: R) -> Result<Vec<CvReportRow>, EvalError> {
    read_rows(reader, &CV_HEADER)
}

pub fn write_roc<W: Write>(writer: W, rows: &[RocRow]) -> Result<(), EvalError> {
    write_rows(writer, &ROC_HEADER, rows)
}

pub fn read_roc<R: Read>(reader: R) -> Result<Vec<RocRow>, EvalError> {
    read_rows(reader, &ROC_HEADER)
}

pub fn write_classification_report<W: Write>(
    writer: W,
    rows: &[ClassificationRow],
) -> Result<(), EvalError> {
    write_rows(writer, &CLASSIFICATION_HEADER, rows)
}

pub fn read_classification_report<R: Read>(reader: R) -> Result<Vec<ClassificationRow>, EvalError> {
    read_rows(reader, &CLASSIFICATION_HEADER)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluation::{metrics, roc};
    use proptest::prelude::*;
    use PartyLabel::{Dnc, Gop};

    proptest! {
        #[test]
        fn reports_round_trip(
            scores in prop::collection::vec(0.0f64..=1.0, 4..30),
            accs in prop::collection::vec(0.0f64..=1.0, 2..12),
            model in "[a-z_]{1,12}",
        ) {
            let y: Vec<_> = (0..scores.len()).map(|i| if i % 2 == 0 { Gop } else { Dnc }).collect();
            let curve = roc(&scores, &y).unwrap();
            let rows = roc_rows(&model, &curve);
            let mut buf = Vec::new();
            write_roc(&mut buf, &rows).unwrap();
            prop_assert_eq!(read_roc(buf.as_slice()).unwrap(), rows);

            let cv = CvResult {
                fold_of: vec![],
                mean_accuracy: accs.iter().sum::<f64>() / accs.len() as f64,
                fold_accuracies: accs,
                out_of_fold_p_gop: vec![],
            };
            let rows = cv_rows(&model, &cv);
            let mut buf = Vec::new();
            write_cv_report(&mut buf, &rows).unwrap();
            prop_assert_eq!(read_cv_report(buf.as_slice()).unwrap(), rows);

            let pred: Vec<_> = scores.iter().map(|&s| if s >= 0.5 { Gop } else { Dnc }).collect();
            let rows = classification_rows(&model, 0.5, &metrics(&y, &pred).unwrap());
            let mut buf = Vec::new();
            write_classification_report(&mut buf, &rows).unwrap();
            prop_assert_eq!(read_classification_report(buf.as_slice()).unwrap(), rows);
        }
    }

    #[test]
    fn header_is_checked() {
        let r = read_cv_report("model,fold,acc\n".as_bytes());
        assert!(matches!(r, Err(EvalError::BadReport(_))));
    }
}
