//! Record CSV files and the plain-text schema, coefficient and key-value
//! formats.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use lifespan_core::design::{CovariateDecl, CovariateSchema, IndividualRecord, Profile};
use lifespan_core::likelihood::ParamVector;

use crate::error::{invalid, CliError, CliResult};

const FIXED_COLUMNS: [&str; 3] = ["entry_age", "exit_age", "event"];
const PERIOD_COLUMN: &str = "period";

/// Parses `name = cat1,cat2*,cat3` lines; `*` marks the reference category.
/// Blank lines and `#` comments are ignored.
pub fn parse_schema(text: &str) -> CliResult<Vec<CovariateDecl>> {
    let mut decls = Vec::new();
    for (line_no, (key, value)) in key_value_lines(text)? {
        let mut categories = Vec::new();
        let mut reference = None;
        for raw in value.split(',') {
            let raw = raw.trim();
            let label = raw.strip_suffix('*').unwrap_or(raw).trim();
            if label.is_empty() {
                return invalid(format!("schema line {line_no}: empty category in '{key}'"));
            }
            if raw.ends_with('*') {
                if reference.is_some() {
                    return invalid(format!("schema line {line_no}: '{key}' marks two references"));
                }
                reference = Some(categories.len());
            }
            categories.push(label.to_string());
        }
        decls.push(CovariateDecl { name: key, categories, reference });
    }
    Ok(decls)
}

pub fn format_schema(schema: &CovariateSchema) -> String {
    let mut out = String::new();
    for cov in schema.covariates() {
        let cats: Vec<String> = cov
            .categories()
            .iter()
            .enumerate()
            .map(|(i, c)| if i == cov.reference() { format!("{c}*") } else { c.clone() })
            .collect();
        out.push_str(&format!("{} = {}\n", cov.name(), cats.join(",")));
    }
    out
}

/// `key = value` lines with their 1-based line numbers, in file order.
pub(crate) fn key_value_lines(text: &str) -> CliResult<Vec<(usize, (String, String))>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return invalid(format!("line {}: expected 'key = value', got '{line}'", i + 1));
        };
        let key = k.trim();
        if key.is_empty() {
            return invalid(format!("line {}: empty key", i + 1));
        }
        out.push((i + 1, (key.to_string(), v.trim().to_string())));
    }
    Ok(out)
}

/// Key-value file as a map; duplicate keys are an error.
pub fn parse_key_values(text: &str) -> CliResult<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (line_no, (k, v)) in key_value_lines(text)? {
        if map.insert(k.clone(), v).is_some() {
            return invalid(format!("line {line_no}: duplicate key '{k}'"));
        }
    }
    Ok(map)
}

pub fn parse_f64(key: &str, value: &str) -> CliResult<f64> {
    value
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| CliError::Validation(format!("'{key}': expected a number, got '{value}'")))
}

/// Reads `beta.<column> = value` and `xi = value`. Every design column must
/// be given; other keys are ignored so truth sidecars can be reused.
pub fn parse_coefficients(text: &str, schema: &CovariateSchema) -> CliResult<ParamVector> {
    let map = parse_key_values(text)?;
    let columns = schema.column_names();
    for key in map.keys().filter_map(|k| k.strip_prefix("beta.")) {
        if !columns.iter().any(|c| c == key) {
            return invalid(format!("coefficient for unknown design column '{key}'"));
        }
    }
    let beta = columns
        .iter()
        .map(|c| {
            let key = format!("beta.{c}");
            match map.get(&key) {
                Some(v) => parse_f64(&key, v),
                None => invalid(format!("missing coefficient '{key}'")),
            }
        })
        .collect::<CliResult<Vec<f64>>>()?;
    let xi = match map.get("xi") {
        Some(v) => parse_f64("xi", v)?,
        None => return invalid("missing coefficient 'xi'"),
    };
    Ok(ParamVector::new(beta, xi))
}

pub fn format_coefficients(theta: &ParamVector, schema: &CovariateSchema) -> String {
    let mut out = String::new();
    for (c, b) in schema.column_names().iter().zip(&theta.beta) {
        out.push_str(&format!("beta.{c} = {b}\n"));
    }
    out.push_str(&format!("xi = {}\n", theta.xi));
    out
}

/// Parses `name=label,name=label` into a profile of `schema`.
pub fn parse_profile(spec: &str, schema: &CovariateSchema) -> CliResult<Profile> {
    let pairs = spec
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|kv| {
            kv.split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| CliError::Validation(format!("profile entry '{kv}' is not name=label")))
        })
        .collect::<CliResult<Vec<_>>>()?;
    Ok(schema.profile_from_labels(&pairs)?)
}

fn row_error(row: usize, msg: impl std::fmt::Display) -> CliError {
    CliError::Validation(format!("row {row}: {msg}"))
}

/// Reads records whose covariate labels are resolved against `decls`.
/// Rows are numbered from 1 after the header.
pub fn load_records<R: Read>(source: R, decls: &[CovariateDecl]) -> CliResult<Vec<IndividualRecord>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(source);
    let headers = reader
        .headers()
        .map_err(|e| CliError::Validation(format!("cannot read header: {e}")))?
        .clone();
    let find = |name: &str| headers.iter().position(|h| h == name);
    let mut fixed = [0usize; 3];
    for (slot, name) in fixed.iter_mut().zip(FIXED_COLUMNS) {
        *slot = find(name).ok_or_else(|| CliError::Validation(format!("missing column '{name}'")))?;
    }
    let covariate_cols = decls
        .iter()
        .map(|d| find(&d.name).ok_or_else(|| CliError::Validation(format!("missing column '{}'", d.name))))
        .collect::<CliResult<Vec<_>>>()?;
    let period_col = find(PERIOD_COLUMN);
    for h in headers.iter() {
        if !FIXED_COLUMNS.contains(&h) && h != PERIOD_COLUMN && !decls.iter().any(|d| d.name == h) {
            return invalid(format!("column '{h}' is not in the schema"));
        }
    }

    let mut records = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let n = i + 1;
        let row = row.map_err(|e| row_error(n, e))?;
        let number = |col: usize, name: &str| -> CliResult<f64> {
            let raw = row.get(col).unwrap_or("");
            raw.parse::<f64>()
                .map_err(|_| row_error(n, format!("{name} '{raw}' is not a number")))
        };
        let entry = number(fixed[0], "entry_age")?;
        let exit = number(fixed[1], "exit_age")?;
        let event = match row.get(fixed[2]).unwrap_or("") {
            "1" => true,
            "0" => false,
            other => return Err(row_error(n, format!("event must be 0 or 1, got '{other}'"))),
        };
        let mut levels = Vec::with_capacity(decls.len());
        for (decl, &col) in decls.iter().zip(&covariate_cols) {
            let label = row.get(col).unwrap_or("");
            if label.is_empty() {
                return Err(row_error(n, format!("missing label for covariate '{}'", decl.name)));
            }
            let level = decl.categories.iter().position(|c| c == label).ok_or_else(|| {
                row_error(n, format!("unknown category '{label}' for covariate '{}'", decl.name))
            })?;
            levels.push(level);
        }
        let mut record = IndividualRecord::new(entry, exit, event, Profile(levels)).map_err(|e| row_error(n, e))?;
        if let Some(col) = period_col {
            let raw = row.get(col).unwrap_or("");
            if !raw.is_empty() {
                let year = raw
                    .parse::<i32>()
                    .map_err(|_| row_error(n, format!("period '{raw}' is not a year")))?;
                record = record.with_period(year);
            }
        }
        records.push(record);
    }
    Ok(records)
}

/// Writes records in the layout `load_records` reads.
pub fn write_records<W: Write>(sink: W, records: &[IndividualRecord], schema: &CovariateSchema) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    let with_period = records.iter().any(|r| r.period.is_some());
    let mut header: Vec<&str> = FIXED_COLUMNS.to_vec();
    header.extend(schema.covariates().iter().map(|c| c.name()));
    if with_period {
        header.push(PERIOD_COLUMN);
    }
    w.write_record(&header)?;
    for r in records {
        let mut row = vec![
            format!("{}", r.entry_age),
            format!("{}", r.exit_age),
            if r.event { "1".into() } else { "0".into() },
        ];
        row.extend(schema.labels(&r.profile).into_iter().map(str::to_string));
        if with_period {
            row.push(r.period.map(|p| p.to_string()).unwrap_or_default());
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const SCHEMA: &str = "civ = widowed*,married\nedu = primary*,tertiary\nhht = collective*,single\norg = native*,other\nsex = female*,male\n";

    fn decls() -> Vec<CovariateDecl> {
        parse_schema(SCHEMA).unwrap()
    }

    fn load(text: &str) -> CliResult<Vec<IndividualRecord>> {
        load_records(text.as_bytes(), &decls())
    }

    const HEADER: &str = "entry_age,exit_age,event,civ,edu,hht,org,sex\n";

    #[test]
    fn parses_schema_with_and_without_reference() {
        let d = parse_schema("# comment\nsex = female,male*\n\nedu = a, b ,c\n").unwrap();
        assert_eq!(d[0].reference, Some(1));
        assert_eq!(d[1].categories, ["a", "b", "c"]);
        assert_eq!(d[1].reference, None);
        assert!(parse_schema("sex = a*,b*").is_err());
        assert!(parse_schema("sex female").is_err());
    }

    #[test]
    fn schema_round_trips_through_text() {
        let schema = CovariateSchema::new(decls()).unwrap();
        assert_eq!(CovariateSchema::new(parse_schema(&format_schema(&schema)).unwrap()).unwrap(), schema);
    }

    #[test]
    fn parses_a_death_row() {
        let r = load(&format!("{HEADER}90.0,101.3,1,widowed,primary,collective,native,female\n")).unwrap();
        assert_eq!(r.len(), 1);
        assert!(r[0].event);
        assert!((r[0].exit_age - 100.0 - 1.3).abs() < 1e-12);
        assert_eq!(r[0].profile, Profile(vec![0; 5]));
    }

    #[test]
    fn row_numbered_errors() {
        let bad_order = format!("{HEADER}90,101,1,widowed,primary,collective,native,female\n104.0,102.4,0,widowed,primary,collective,native,male\n");
        let msg = load(&bad_order).unwrap_err().to_string();
        assert!(msg.starts_with("row 2:"), "{msg}");
        let bad_num = format!("{HEADER}9o,101,1,widowed,primary,collective,native,female\n");
        assert!(load(&bad_num).unwrap_err().to_string().contains("row 1"));
        let unknown = format!("{HEADER}90,101,1,widowed,primary,castle,native,female\n");
        let msg = load(&unknown).unwrap_err().to_string();
        assert!(msg.contains("'castle'") && msg.contains("'hht'"), "{msg}");
        let msg = load("entry_age,exit_age,event,civ,edu,hht,org\n").unwrap_err().to_string();
        assert!(msg.contains("missing column 'sex'"), "{msg}");
        let bad_event = format!("{HEADER}90,101,yes,widowed,primary,collective,native,female\n");
        assert!(load(&bad_event).is_err());
    }

    #[test]
    fn optional_period_column() {
        let text = "entry_age,exit_age,event,civ,edu,hht,org,sex,period\n102.4,104.0,0,married,tertiary,single,other,male,2001\n";
        let r = load(text).unwrap();
        assert_eq!(r[0].period, Some(2001));
        assert!(!r[0].event);
        let schema = CovariateSchema::new(decls()).unwrap();
        let mut buf = Vec::new();
        write_records(&mut buf, &r, &schema).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), text.replace("104.0", "104"));
    }

    #[test]
    fn coefficient_files() {
        let schema = CovariateSchema::new(decls()).unwrap();
        let theta = ParamVector::new(vec![0.742, 0.098, 0.068, 0.279, 0.905, -0.202], -0.134);
        let text = format_coefficients(&theta, &schema);
        assert_eq!(parse_coefficients(&text, &schema).unwrap(), theta);
        assert!(parse_coefficients("xi = -0.1\n", &schema).is_err());
        assert!(parse_coefficients(&format!("{text}beta.sex:other = 1\n"), &schema).is_err());
    }

    #[test]
    fn profile_specs() {
        let schema = CovariateSchema::new(decls()).unwrap();
        let p = parse_profile("sex=male, org=native,civ=widowed,edu=tertiary,hht=single", &schema).unwrap();
        assert_eq!(p, Profile(vec![0, 1, 1, 0, 1]));
        assert!(parse_profile("sex=male", &schema).is_err());
        assert!(parse_profile("sex", &schema).is_err());
    }
}
