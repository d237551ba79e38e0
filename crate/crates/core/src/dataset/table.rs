use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use super::{DatasetError, ElectionYear, PartyLabel, StateId, StateYear};

/// Numeric source table keyed by (state, year), columns in the requested order.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTable {
    pub columns: Vec<String>,
    pub rows: BTreeMap<StateYear, Vec<f64>>,
}

impl RawTable {
    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn get(&self, key: &StateYear, column: &str) -> Option<f64> {
        let idx = self.column_index(column)?;
        self.rows.get(key).map(|r| r[idx])
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Loads a `state,year,<feature...>` CSV, keeping only `expected` columns.
/// Extra columns are ignored.
pub fn load_table(path: impl AsRef<Path>, expected: &[&str]) -> Result<RawTable, DatasetError> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| DatasetError::io(path, e))?;
    read_table(file, expected)
}

pub fn read_table<R: Read>(reader: R, expected: &[&str]) -> Result<RawTable, DatasetError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let find = |name: &str| -> Result<usize, DatasetError> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| DatasetError::MissingColumn(name.to_string()))
    };
    let state_idx = find("state")?;
    let year_idx = find("year")?;
    let value_idx: Vec<usize> = expected.iter().map(|c| find(c)).collect::<Result<_, _>>()?;

    let mut rows = BTreeMap::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let row = i + 1;
        let (state, year) = parse_key(&record, state_idx, year_idx, row)?;
        let mut values = Vec::with_capacity(expected.len());
        for (&idx, &col) in value_idx.iter().zip(expected) {
            let cell = record.get(idx).unwrap_or("");
            let v: f64 = cell
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| DatasetError::UnparseableCell {
                    row,
                    column: col.to_string(),
                })?;
            values.push(v);
        }
        if rows.insert((state, year), values).is_some() {
            return Err(DatasetError::DuplicateKey(state, year));
        }
    }
    Ok(RawTable {
        columns: expected.iter().map(|c| c.to_string()).collect(),
        rows,
    })
}

fn parse_key(
    record: &csv::StringRecord,
    state_idx: usize,
    year_idx: usize,
    row: usize,
) -> Result<StateYear, DatasetError> {
    let state = StateId::parse(record.get(state_idx).unwrap_or(""))?;
    let year_cell = record.get(year_idx).unwrap_or("");
    let year: u16 = year_cell
        .parse()
        .map_err(|_| DatasetError::UnparseableCell {
            row,
            column: "year".to_string(),
        })?;
    Ok((state, ElectionYear::new(year)?))
}

/// Loads `state,year,winner`.
pub fn load_outcomes(
    path: impl AsRef<Path>,
) -> Result<BTreeMap<StateYear, PartyLabel>, DatasetError> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| DatasetError::io(path, e))?;
    read_outcomes(file)
}

pub fn read_outcomes<R: Read>(reader: R) -> Result<BTreeMap<StateYear, PartyLabel>, DatasetError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| DatasetError::MissingColumn(name.to_string()))
    };
    let (state_idx, year_idx, winner_idx) = (find("state")?, find("year")?, find("winner")?);
    let mut out = BTreeMap::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let key = parse_key(&record, state_idx, year_idx, i + 1)?;
        let winner: PartyLabel = record.get(winner_idx).unwrap_or("").parse()?;
        if out.insert(key, winner).is_some() {
            return Err(DatasetError::DuplicateKey(key.0, key.1));
        }
    }
    Ok(out)
}

pub fn write_outcomes<W: std::io::Write>(
    writer: W,
    outcomes: &BTreeMap<StateYear, PartyLabel>,
) -> Result<(), DatasetError> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["state", "year", "winner"])?;
    for ((s, y), w) in outcomes {
        wtr.write_record([s.code(), &y.to_string(), w.as_str()])?;
    }
    wtr.flush().map_err(|e| DatasetError::Io(e.to_string()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_single_row() {
        let t = read_table("state,year,gdp\nCA,2016,2657798\n".as_bytes(), &["gdp"]).unwrap();
        assert_eq!(t.len(), 1);
        let key = (StateId::parse("CA").unwrap(), ElectionYear::Y2016);
        assert_eq!(t.get(&key, "gdp"), Some(2657798.0));
    }

    #[test]
    fn normalizes_full_names() {
        let t = read_table("state,year,gdp\ncalifornia,2016,1\n".as_bytes(), &["gdp"]).unwrap();
        assert_eq!(t.rows.keys().next().unwrap().0.code(), "CA");
    }

    #[test]
    fn missing_column() {
        let err = read_table("state,year,pop\nCA,2016,1\n".as_bytes(), &["gdp"]).unwrap_err();
        assert!(matches!(err, DatasetError::MissingColumn(c) if c == "gdp"));
    }

    #[test]
    fn duplicate_key() {
        let err = read_table(
            "state,year,gdp\nCA,2016,1\nCA,2016,2\n".as_bytes(),
            &["gdp"],
        )
        .unwrap_err();
        assert!(
            matches!(err, DatasetError::DuplicateKey(s, y) if s.code() == "CA" && y.get() == 2016)
        );
    }

    #[test]
    fn unparseable_and_unknown_state() {
        let err = read_table("state,year,gdp\nCA,2016,abc\n".as_bytes(), &["gdp"]).unwrap_err();
        assert!(
            matches!(err, DatasetError::UnparseableCell { row: 1, ref column } if column == "gdp")
        );
        let err = read_table("state,year,gdp\nZZ,2016,1\n".as_bytes(), &["gdp"]).unwrap_err();
        assert!(matches!(err, DatasetError::UnknownState(_)));
    }

    #[test]
    fn outcomes_round_trip() {
        let src = "state,year,winner\nAK,2012,GOP\nCA,2012,DNC\n";
        let o = read_outcomes(src.as_bytes()).unwrap();
        let mut buf = Vec::new();
        write_outcomes(&mut buf, &o).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), src);
    }
}
