//! Rendering of command reports as JSON or as aligned `key  value` text.

use serde::Serialize;
use serde_json::Value;

use crate::CliError;

pub fn emit<T: Serialize>(report: &T, json: bool) -> Result<(), CliError> {
    let value = serde_json::to_value(report).map_err(|e| CliError::Render(e.to_string()))?;
    if json {
        let text =
            serde_json::to_string_pretty(&value).map_err(|e| CliError::Render(e.to_string()))?;
        println!("{text}");
    } else {
        print!("{}", render_text(&value));
    }
    Ok(())
}

/// Flattens nested objects into dotted `key  value` lines. Arrays of objects
/// are printed afterwards as column-aligned tables.
pub fn render_text(value: &Value) -> String {
    let mut lines = Vec::new();
    let mut tables = Vec::new();
    flatten("", value, &mut lines, &mut tables);
    let width = lines.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    let mut out: String = lines
        .iter()
        .map(|(k, v)| format!("{k:<width$}  {v}\n"))
        .collect();
    for (name, rows) in tables {
        out.push('\n');
        out.push_str(&name);
        out.push_str(":\n");
        out.push_str(&render_table(rows));
    }
    out
}

type Table<'a> = (String, &'a [Value]);

fn flatten<'a>(
    prefix: &str,
    value: &'a Value,
    out: &mut Vec<(String, String)>,
    tables: &mut Vec<Table<'a>>,
) {
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten(&key, v, out, tables);
            }
        }
        Value::Array(items) if items.iter().any(Value::is_object) => {
            tables.push((prefix.to_string(), items));
        }
        Value::Array(items) => {
            let joined: Vec<String> = items.iter().map(scalar).collect();
            let shown = if joined.is_empty() {
                "-".to_string()
            } else {
                joined.join(", ")
            };
            out.push((prefix.to_string(), shown));
        }
        v => out.push((prefix.to_string(), scalar(v))),
    }
}

fn render_table(rows: &[Value]) -> String {
    let mut columns: Vec<&str> = Vec::new();
    for row in rows {
        for k in row.as_object().into_iter().flat_map(|m| m.keys()) {
            if !columns.contains(&k.as_str()) {
                columns.push(k);
            }
        }
    }
    let cells: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            columns
                .iter()
                .map(|c| r.get(*c).map_or("-".into(), scalar))
                .collect()
        })
        .collect();
    let widths: Vec<usize> = columns
        .iter()
        .enumerate()
        .map(|(i, c)| {
            cells
                .iter()
                .map(|r| r[i].len())
                .chain([c.len()])
                .max()
                .unwrap_or(0)
        })
        .collect();
    let line = |items: Vec<&str>| -> String {
        let padded: Vec<String> = items
            .iter()
            .zip(&widths)
            .map(|(s, w)| format!("{s:<w$}"))
            .collect();
        format!("  {}\n", padded.join("  ").trim_end())
    };
    let mut out = line(columns.clone());
    for r in &cells {
        out.push_str(&line(r.iter().map(String::as_str).collect()));
    }
    out
}

fn scalar(v: &Value) -> String {
    match v {
        Value::Null => "-".into(),
        Value::String(s) => s.clone(),
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().unwrap_or(f64::NAN);
            if x != 0.0 && (x.abs() < 1e-3 || x.abs() >= 1e6) {
                format!("{x:.6e}")
            } else {
                format!("{x:.8}")
            }
        }
        other => other.to_string(),
    }
}
