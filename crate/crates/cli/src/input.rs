//! Budget-file ingestion.
//!
//! Two formats, detected by extension and falling back to content sniffing:
//!
//! - CSV with a `club,budget` header, UTF-8, `.` decimal separator
//! - JSON array of `{"club": string, "budget": number}`
//!
//! Budgets must parse as positive finite numbers and a league needs at least
//! two rows. Errors carry line numbers so bad rows are easy to find.

use std::fs;
use std::path::Path;

use prizebalance::model::{BudgetDistribution, ModelError};
use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum InputError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: CSV header must contain `club` and `budget` columns")]
    MissingColumns { path: String },
    #[error("{path} line {line}: {message}")]
    BadRow {
        path: String,
        line: u64,
        message: String,
    },
    #[error("{path}: JSON line {line}, column {column}: {message}")]
    BadJson {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: {source}")]
    InvalidLeague {
        path: String,
        source: ModelError,
    },
    #[error("{path}: {source}")]
    Csv {
        path: String,
        source: csv::Error,
    },
}

#[derive(Debug, Deserialize)]
struct ClubRow {
    club: String,
    budget: f64,
}

fn check_budget(budget: f64) -> Result<(), String> {
    if !budget.is_finite() {
        Err(format!("budget `{budget}` is not a finite number"))
    } else if budget <= 0.0 {
        Err(format!("budget `{budget}` is not positive"))
    } else {
        Ok(())
    }
}

fn load_csv(path: &Path, display: &str) -> Result<BudgetDistribution, InputError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|source| InputError::Csv {
            path: display.to_string(),
            source,
        })?;
    let headers = reader.headers().map_err(|source| InputError::Csv {
        path: display.to_string(),
        source,
    })?;
    let club_col = headers.iter().position(|h| h == "club");
    let budget_col = headers.iter().position(|h| h == "budget");
    let (Some(club_col), Some(budget_col)) = (club_col, budget_col) else {
        return Err(InputError::MissingColumns {
            path: display.to_string(),
        });
    };

    let mut entries = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|source| InputError::Csv {
            path: display.to_string(),
            source,
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let bad_row = |message: String| InputError::BadRow {
            path: display.to_string(),
            line,
            message,
        };
        let club = record
            .get(club_col)
            .ok_or_else(|| bad_row("missing club field".into()))?;
        let raw = record
            .get(budget_col)
            .ok_or_else(|| bad_row("missing budget field".into()))?;
        let budget: f64 = raw
            .parse()
            .map_err(|_| bad_row(format!("budget `{raw}` is not a number")))?;
        check_budget(budget).map_err(bad_row)?;
        entries.push((club.to_string(), budget));
    }
    BudgetDistribution::canonicalize(entries).map_err(|source| InputError::InvalidLeague {
        path: display.to_string(),
        source,
    })
}

fn load_json(text: &str, display: &str) -> Result<BudgetDistribution, InputError> {
    let rows: Vec<ClubRow> =
        serde_json::from_str(text).map_err(|err| InputError::BadJson {
            path: display.to_string(),
            line: err.line(),
            column: err.column(),
            message: err.to_string(),
        })?;
    for (i, row) in rows.iter().enumerate() {
        check_budget(row.budget).map_err(|message| InputError::BadRow {
            path: display.to_string(),
            line: i as u64 + 1,
            message: format!("club {:?}: {message}", row.club),
        })?;
    }
    BudgetDistribution::canonicalize(rows.into_iter().map(|r| (r.club, r.budget))).map_err(
        |source| InputError::InvalidLeague {
            path: display.to_string(),
            source,
        },
    )
}

/// Loads a league from a CSV or JSON budget file.
pub fn load_distribution(path: &Path) -> Result<BudgetDistribution, InputError> {
    let display = path.display().to_string();
    let ext = path
        .extension()
        .map(|e| e.to_string_lossy().to_lowercase());
    match ext.as_deref() {
        Some("csv") => return load_csv(path, &display),
        Some("json") => {
            let text = fs::read_to_string(path).map_err(|source| InputError::Read {
                path: display.clone(),
                source,
            })?;
            return load_json(&text, &display);
        }
        _ => {}
    }
    // unknown extension: sniff the first non-whitespace byte
    let text = fs::read_to_string(path).map_err(|source| InputError::Read {
        path: display.clone(),
        source,
    })?;
    if text.trim_start().starts_with('[') {
        load_json(&text, &display)
    } else {
        load_csv(path, &display)
    }
}

/// Loads a per-club amounts file for the general rule: numbers separated by
/// newlines or commas, `#` comments allowed.
pub fn load_amounts(path: &Path) -> Result<Vec<f64>, InputError> {
    let display = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|source| InputError::Read {
        path: display.clone(),
        source,
    })?;
    let mut amounts = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        for field in line.split(',') {
            let field = field.trim();
            if field.is_empty() {
                continue;
            }
            let value: f64 = field.parse().map_err(|_| InputError::BadRow {
                path: display.clone(),
                line: i as u64 + 1,
                message: format!("amount `{field}` is not a number"),
            })?;
            amounts.push(value);
        }
    }
    Ok(amounts)
}
