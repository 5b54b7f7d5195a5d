//! CSV ingestion for the two series schemas and for generic output tables.
//!
//! Daily files have the header `date,value` with an optional `unit` column;
//! aggregated files have `period,value` with an optional `days` column.
//! Every rejected row is reported with its line number.

use std::fs::File;
use std::io::Read;
use std::path::Path;

use chrono::{Datelike, Duration, NaiveDate};
use csv::{ReaderBuilder, StringRecord, Trim};
use mkd_core::{AggregateUnit, AggregatedSeries, DailySeries};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Schema {
    Daily,
    Aggregated,
    Table,
}

/// A validated daily file.
#[derive(Debug, Clone, PartialEq)]
pub struct DailyFile {
    pub dates: Vec<NaiveDate>,
    pub values: Vec<u64>,
    /// Unit label per day; the calendar month when the file has no `unit` column.
    pub units: Vec<String>,
}

impl DailyFile {
    /// Consecutive runs of equal unit labels become the unit lengths.
    pub fn series(&self) -> DailySeries {
        let mut lengths = Vec::new();
        let mut i = 0;
        while i < self.units.len() {
            let j = (i..self.units.len())
                .find(|&j| self.units[j] != self.units[i])
                .unwrap_or(self.units.len());
            lengths.push(j - i);
            i = j;
        }
        DailySeries::new(self.values.clone(), lengths).expect("lengths cover a non-empty file")
    }

    pub fn as_f64(&self) -> Vec<f64> {
        self.values.iter().map(|&v| v as f64).collect()
    }
}

/// A validated aggregated file.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregatedFile {
    pub series: AggregatedSeries,
    /// First day of the first unit when the period labels are dates.
    pub start: Option<NaiveDate>,
}

/// Header plus string rows, for tables that are neither series schema.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Ingested {
    Daily(DailyFile),
    Aggregated(AggregatedFile),
    Table(Table),
}

pub fn ingest_csv(path: &Path, schema: Schema) -> CliResult<Ingested> {
    let name = path.display().to_string();
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    Ok(match schema {
        Schema::Daily => Ingested::Daily(parse_daily(file, &name)?),
        Schema::Aggregated => Ingested::Aggregated(parse_aggregated(file, &name)?),
        Schema::Table => Ingested::Table(parse_table(file, &name)?),
    })
}

pub fn read_daily(path: &Path) -> CliResult<DailyFile> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    parse_daily(file, &path.display().to_string())
}

pub fn read_aggregated(path: &Path) -> CliResult<AggregatedFile> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    parse_aggregated(file, &path.display().to_string())
}

pub fn read_table(path: &Path) -> CliResult<Table> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    parse_table(file, &path.display().to_string())
}

/// Series schemas are recognised by their exact header; anything else is a
/// plain table.
pub fn detect_schema(path: &Path) -> CliResult<Schema> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut rdr = reader(file);
    let header = rdr.headers().map_err(|e| csv_error(&path.display().to_string(), e))?;
    let fields: Vec<&str> = header.iter().collect();
    Ok(match fields.as_slice() {
        ["date", "value"] | ["date", "value", "unit"] => Schema::Daily,
        ["period", "value"] | ["period", "value", "days"] => Schema::Aggregated,
        _ => Schema::Table,
    })
}

fn reader<R: Read>(input: R) -> csv::Reader<R> {
    ReaderBuilder::new().trim(Trim::All).from_reader(input)
}

fn csv_error(name: &str, e: csv::Error) -> CliError {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    CliError::Row {
        path: name.to_string(),
        line,
        message: e.to_string(),
    }
}

fn row_error(name: &str, record: &StringRecord, message: impl Into<String>) -> CliError {
    CliError::Row {
        path: name.to_string(),
        line: record.position().map(|p| p.line()).unwrap_or(0),
        message: message.into(),
    }
}

fn check_header(name: &str, header: &StringRecord, required: &[&str], optional: &str) -> CliResult<bool> {
    let fields: Vec<&str> = header.iter().collect();
    let ok_required = fields.len() >= required.len() && fields[..required.len()] == *required;
    let extra = &fields[required.len().min(fields.len())..];
    let ok_extra = extra.is_empty() || extra == [optional];
    if !ok_required || !ok_extra {
        return Err(CliError::Row {
            path: name.to_string(),
            line: 1,
            message: format!(
                "expected header `{}` with optional `{}`, got `{}`",
                required.join(","),
                optional,
                fields.join(",")
            ),
        });
    }
    Ok(!extra.is_empty())
}

/// Non-negative integer count.
pub fn parse_count(field: &str) -> Result<u64, String> {
    if let Ok(v) = field.parse::<u64>() {
        return Ok(v);
    }
    match field.parse::<f64>() {
        Ok(v) if v < 0.0 => Err(format!("negative value `{}`", field)),
        Ok(_) => Err(format!("non-integer value `{}`", field)),
        Err(_) if field.starts_with('-') => Err(format!("negative value `{}`", field)),
        Err(_) => Err(format!("`{}` is not a number", field)),
    }
}

pub fn parse_daily<R: Read>(input: R, name: &str) -> CliResult<DailyFile> {
    let mut rdr = reader(input);
    let header = rdr.headers().map_err(|e| csv_error(name, e))?.clone();
    let has_unit = check_header(name, &header, &["date", "value"], "unit")?;

    let mut out = DailyFile {
        dates: Vec::new(),
        values: Vec::new(),
        units: Vec::new(),
    };
    for record in rdr.records() {
        let record = record.map_err(|e| csv_error(name, e))?;
        let date = NaiveDate::parse_from_str(&record[0], "%Y-%m-%d")
            .map_err(|_| row_error(name, &record, format!("invalid date `{}`", &record[0])))?;
        if let Some(&prev) = out.dates.last() {
            if date == prev {
                return Err(row_error(name, &record, format!("duplicate date {}", date)));
            }
            if date < prev {
                return Err(row_error(name, &record, format!("date {} is before {}", date, prev)));
            }
            if date != prev + Duration::days(1) {
                return Err(row_error(name, &record, format!("gap between {} and {}", prev, date)));
            }
        }
        let value = parse_count(&record[1]).map_err(|m| row_error(name, &record, m))?;
        let unit = if has_unit {
            let u = record[2].to_string();
            if u.is_empty() {
                return Err(row_error(name, &record, "empty unit label"));
            }
            u
        } else {
            format!("{:04}-{:02}", date.year(), date.month())
        };
        out.dates.push(date);
        out.values.push(value);
        out.units.push(unit);
    }
    if out.values.is_empty() {
        return Err(CliError::Validation(format!("{}: no data rows", name)));
    }
    Ok(out)
}

pub fn days_in_month(year: i32, month: u32) -> u32 {
    let next = if month == 12 {
        NaiveDate::from_ymd_opt(year + 1, 1, 1)
    } else {
        NaiveDate::from_ymd_opt(year, month + 1, 1)
    };
    next.and_then(|n| n.pred_opt()).map(|d| d.day()).unwrap_or(30)
}

/// First day and remaining length of a `YYYY-MM` or `YYYY-MM-DD` period label.
pub fn period_start(label: &str) -> Option<(NaiveDate, usize)> {
    if let Ok(d) = NaiveDate::parse_from_str(label, "%Y-%m-%d") {
        let len = days_in_month(d.year(), d.month()) - d.day() + 1;
        return Some((d, len as usize));
    }
    let d = NaiveDate::parse_from_str(&format!("{}-01", label), "%Y-%m-%d").ok()?;
    // reject labels such as "2022-1" that chrono would also accept
    if label.len() != 7 {
        return None;
    }
    Some((d, days_in_month(d.year(), d.month()) as usize))
}

pub fn parse_aggregated<R: Read>(input: R, name: &str) -> CliResult<AggregatedFile> {
    let mut rdr = reader(input);
    let header = rdr.headers().map_err(|e| csv_error(name, e))?.clone();
    let has_days = check_header(name, &header, &["period", "value"], "days")?;

    let mut units: Vec<AggregateUnit> = Vec::new();
    let mut start = None;
    for record in rdr.records() {
        let record = record.map_err(|e| csv_error(name, e))?;
        let label = record[0].to_string();
        if label.is_empty() {
            return Err(row_error(name, &record, "empty period label"));
        }
        if let Some(prev) = units.last() {
            if label <= prev.label {
                return Err(row_error(
                    name,
                    &record,
                    format!("period `{}` does not follow `{}`", label, prev.label),
                ));
            }
        }
        let value = parse_count(&record[1]).map_err(|m| row_error(name, &record, m))?;
        let calendar = period_start(&label);
        let length = if has_days {
            let days = parse_count(&record[2]).map_err(|m| row_error(name, &record, m))?;
            if days == 0 {
                return Err(row_error(name, &record, "days must be >= 1"));
            }
            days as usize
        } else {
            match calendar {
                Some((_, len)) => len,
                None => {
                    return Err(row_error(
                        name,
                        &record,
                        format!("cannot derive the length of period `{}`; add a days column", label),
                    ))
                }
            }
        };
        if units.is_empty() {
            start = calendar.map(|c| c.0);
        }
        units.push(AggregateUnit::new(label, value, length));
    }
    if units.is_empty() {
        return Err(CliError::Validation(format!("{}: no data rows", name)));
    }
    Ok(AggregatedFile {
        series: AggregatedSeries::new(units)?,
        start,
    })
}

pub fn parse_table<R: Read>(input: R, name: &str) -> CliResult<Table> {
    let mut rdr = reader(input);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| csv_error(name, e))?
        .iter()
        .map(String::from)
        .collect();
    if header.iter().all(|h| h.is_empty()) {
        return Err(CliError::Validation(format!("{}: missing header", name)));
    }
    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| csv_error(name, e))?;
        rows.push(record.iter().map(String::from).collect());
    }
    Ok(Table { header, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_of(err: CliError) -> u64 {
        match err {
            CliError::Row { line, .. } => line,
            other => panic!("expected a row error, got {:?}", other),
        }
    }

    #[test]
    fn aggregated_totals() {
        let text = "period,value\n2022-01,126\n2022-02,20\n2022-03,20\n2022-04,23\n2022-05,163\n2022-06,737\n2022-07,1491\n";
        let f = parse_aggregated(text.as_bytes(), "t").unwrap();
        assert_eq!(f.series.total(), 2580);
        assert_eq!(f.series.lengths(), vec![31, 28, 31, 30, 31, 30, 31]);
        assert_eq!(f.start, NaiveDate::from_ymd_opt(2022, 1, 1));
    }

    #[test]
    fn days_column_overrides_calendar() {
        let text = "period,value,days\n2022-06,737,30\n2022-07,1491,30\n";
        let f = parse_aggregated(text.as_bytes(), "t").unwrap();
        assert_eq!(f.series.lengths(), vec![30, 30]);
    }

    #[test]
    fn partial_first_month() {
        let text = "period,value\n2020-03-08,51\n2020-04,7616\n";
        let f = parse_aggregated(text.as_bytes(), "t").unwrap();
        assert_eq!(f.series.lengths(), vec![24, 30]);
    }

    #[test]
    fn opaque_labels_need_days() {
        assert!(parse_aggregated("period,value\nq1,5\n".as_bytes(), "t").is_err());
        let f = parse_aggregated("period,value,days\nq1,5,90\n".as_bytes(), "t").unwrap();
        assert_eq!(f.start, None);
    }

    #[test]
    fn empty_data_section() {
        let err = parse_daily("date,value\n".as_bytes(), "t").unwrap_err();
        assert!(matches!(err, CliError::Validation(_)));
        assert!(parse_aggregated("period,value\n".as_bytes(), "t").is_err());
    }

    #[test]
    fn negative_value_cites_line() {
        let err = parse_daily("date,value\n2022-01-14,3\n2022-01-15,-3\n".as_bytes(), "t").unwrap_err();
        assert_eq!(line_of(err), 3);
    }

    #[test]
    fn rejects_bad_rows() {
        let cases = [
            "date,value\n2022-01-01,1.5\n",
            "date,value\n2022-01-01,1\n2022-01-01,2\n",
            "date,value\n2022-01-01,1\n2022-01-03,2\n",
            "date,value\n2022-01-02,1\n2022-01-01,2\n",
            "date,value\n2022-13-01,1\n",
            "day,value\n2022-01-01,1\n",
            "date,value\n2022-01-01\n",
        ];
        for c in cases {
            assert!(parse_daily(c.as_bytes(), "t").is_err(), "{}", c);
        }
        assert!(parse_aggregated("period,value\n2022-02,1\n2022-01,2\n".as_bytes(), "t").is_err());
    }

    #[test]
    fn daily_units_default_to_months() {
        let mut text = String::from("date,value\n");
        for d in 0..40 {
            let date = NaiveDate::from_ymd_opt(2022, 1, 20).unwrap() + Duration::days(d);
            text.push_str(&format!("{},{}\n", date, d));
        }
        let f = parse_daily(text.as_bytes(), "t").unwrap();
        assert_eq!(f.series().unit_lengths(), &[12, 28]);
    }

    #[test]
    fn count_parsing() {
        assert_eq!(parse_count("17"), Ok(17));
        assert!(parse_count("-1").unwrap_err().contains("negative"));
        assert!(parse_count("2.5").unwrap_err().contains("non-integer"));
        assert!(parse_count("abc").is_err());
    }

    #[test]
    fn leap_february() {
        assert_eq!(days_in_month(2020, 2), 29);
        assert_eq!(days_in_month(2022, 2), 28);
        assert_eq!(days_in_month(2022, 12), 31);
    }
}
