use std::path::Path;

use crate::CliError;

/// Reads per-cell values from CSV. Each row holds either `value` or
/// `x,value`; a non-numeric first row is taken as a header.
pub fn read_values(path: &Path) -> Result<Vec<f64>, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;

    let mut values = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let line = record.position().map_or(row as u64 + 1, |p| p.line());
        let Some(cell) = record.iter().next_back() else {
            continue;
        };
        match cell.parse::<f64>() {
            Ok(v) if v.is_finite() => values.push(v),
            _ if row == 0 => continue,
            _ => {
                return Err(CliError::Input(format!(
                    "{}: line {line}: cannot parse `{cell}` as a number",
                    path.display()
                )))
            }
        }
    }
    Ok(values)
}
