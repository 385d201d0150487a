//! Deterministic serialization: a small JSON value type with fixed key
//! order and explicit float formatting, CSV tables, matrix/subspace/function
//! converters, and atomic file writes. Identical inputs always produce
//! byte-identical output: no maps, no timestamps, no locale dependence.

use std::io::Write as _;
use std::path::Path;

use crate::convexity::ScalarFunction;
use crate::error::{Error, Result};
use crate::mat::Mat;
use crate::spectral::{SubspaceProjection, SymMatrix};

/// Shortest round-trip decimal form; non-finite values become "null".
/// Rust's plain float Display never uses scientific notation and parses
/// back to the identical bit pattern.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v}")
    } else {
        "null".into()
    }
}

/// Fixed 18-significant-digit scientific form for matrix entries; parses
/// back bit-exactly. Non-finite values become "null".
pub fn fmt_f64_precise(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.17e}")
    } else {
        "null".into()
    }
}

/// JSON value with deterministic rendering. Object keys keep insertion
/// order; numbers carry their formatting choice.
#[derive(Clone, Debug)]
pub enum Json {
    Null,
    Bool(bool),
    Int(i64),
    /// Shortest round-trip decimal.
    Num(f64),
    /// 18-significant-digit scientific, for matrix payloads.
    NumPrecise(f64),
    Str(String),
    Arr(Vec<Json>),
    Obj(Vec<(String, Json)>),
}

impl Json {
    pub fn obj(fields: Vec<(&str, Json)>) -> Json {
        Json::Obj(fields.into_iter().map(|(k, v)| (k.to_string(), v)).collect())
    }

    pub fn num_array(xs: &[f64]) -> Json {
        Json::Arr(xs.iter().map(|&v| Json::Num(v)).collect())
    }

    pub fn opt_num(v: Option<f64>) -> Json {
        match v {
            Some(v) => Json::Num(v),
            None => Json::Null,
        }
    }

    fn render_into(&self, out: &mut String) {
        match self {
            Json::Null => out.push_str("null"),
            Json::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
            Json::Int(i) => out.push_str(&i.to_string()),
            Json::Num(v) => out.push_str(&fmt_f64(*v)),
            Json::NumPrecise(v) => out.push_str(&fmt_f64_precise(*v)),
            Json::Str(s) => {
                out.push('"');
                for c in s.chars() {
                    match c {
                        '"' => out.push_str("\\\""),
                        '\\' => out.push_str("\\\\"),
                        '\n' => out.push_str("\\n"),
                        '\r' => out.push_str("\\r"),
                        '\t' => out.push_str("\\t"),
                        c if (c as u32) < 0x20 => {
                            out.push_str(&format!("\\u{:04x}", c as u32));
                        }
                        c => out.push(c),
                    }
                }
                out.push('"');
            }
            Json::Arr(items) => {
                out.push('[');
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    item.render_into(out);
                }
                out.push(']');
            }
            Json::Obj(fields) => {
                out.push('{');
                for (i, (k, v)) in fields.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    Json::Str(k.clone()).render_into(out);
                    out.push(':');
                    v.render_into(out);
                }
                out.push('}');
            }
        }
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        self.render_into(&mut out);
        out.push('\n');
        out
    }
}

/// {"dim": n, "rows": [[...], ...]} with 18-significant-digit entries.
pub fn matrix_to_json(h: &SymMatrix) -> Json {
    let n = h.dim();
    let rows: Vec<Json> = (0..n)
        .map(|i| Json::Arr((0..n).map(|j| Json::NumPrecise(h.get(i, j))).collect()))
        .collect();
    Json::obj(vec![("dim", Json::Int(n as i64)), ("rows", Json::Arr(rows))])
}

/// {"dim": n, "basis_cols": [[col entries], ...]}.
pub fn subspace_to_json(s: &SubspaceProjection) -> Json {
    let cols: Vec<Json> = (0..s.rank())
        .map(|j| {
            Json::Arr(
                s.basis()
                    .col(j)
                    .iter()
                    .map(|&v| Json::NumPrecise(v))
                    .collect(),
            )
        })
        .collect();
    Json::obj(vec![
        ("dim", Json::Int(s.dim() as i64)),
        ("basis_cols", Json::Arr(cols)),
    ])
}

/// {"name": ..., "interval": [lo|null, hi|null], "params": {...}} plus a
/// "points" array for polylines.
pub fn function_to_json(f: &ScalarFunction) -> Json {
    let side = |v: f64| if v.is_finite() { Json::Num(v) } else { Json::Null };
    let mut fields = vec![
        ("name".to_string(), Json::Str(f.name().to_string())),
        (
            "interval".to_string(),
            Json::Arr(vec![side(f.interval().lo()), side(f.interval().hi())]),
        ),
        (
            "params".to_string(),
            Json::Obj(
                f.params()
                    .iter()
                    .map(|(k, v)| (k.clone(), Json::Num(*v)))
                    .collect(),
            ),
        ),
    ];
    if let Some(points) = f.points() {
        fields.push((
            "points".to_string(),
            Json::Arr(
                points
                    .iter()
                    .map(|(x, y)| Json::Arr(vec![Json::Num(*x), Json::Num(*y)]))
                    .collect(),
            ),
        ));
    }
    Json::Obj(fields)
}

fn json_err(msg: impl Into<String>) -> Error {
    Error::BadMatrixJson { msg: msg.into() }
}

/// Parses {"dim": n, "rows": [[...], ...]} into a validated symmetric
/// matrix.
pub fn parse_matrix_json(text: &str) -> Result<SymMatrix> {
    let v: serde_json::Value =
        serde_json::from_str(text).map_err(|e| json_err(format!("invalid JSON: {e}")))?;
    let obj = v.as_object().ok_or_else(|| json_err("expected an object"))?;
    let dim = obj
        .get("dim")
        .and_then(|d| d.as_u64())
        .ok_or_else(|| json_err("missing integer field dim"))? as usize;
    let rows_v = obj
        .get("rows")
        .and_then(|r| r.as_array())
        .ok_or_else(|| json_err("missing array field rows"))?;
    if rows_v.len() != dim {
        return Err(json_err(format!(
            "dim is {dim} but rows has {} entries",
            rows_v.len()
        )));
    }
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(dim);
    for (i, row) in rows_v.iter().enumerate() {
        let row = row
            .as_array()
            .ok_or_else(|| json_err(format!("row {i} is not an array")))?;
        if row.len() != dim {
            return Err(json_err(format!(
                "row {i} has {} entries, expected {dim}",
                row.len()
            )));
        }
        let mut out = Vec::with_capacity(dim);
        for (j, cell) in row.iter().enumerate() {
            let x = cell
                .as_f64()
                .ok_or_else(|| json_err(format!("entry ({i}, {j}) is not a number")))?;
            out.push(x);
        }
        rows.push(out);
    }
    SymMatrix::from_rows(&rows)
}

/// Parses {"dim": n, "basis_cols": [[...], ...]} into a validated
/// orthonormal subspace basis.
pub fn parse_subspace_json(text: &str) -> Result<SubspaceProjection> {
    let v: serde_json::Value =
        serde_json::from_str(text).map_err(|e| json_err(format!("invalid JSON: {e}")))?;
    let obj = v.as_object().ok_or_else(|| json_err("expected an object"))?;
    let dim = obj
        .get("dim")
        .and_then(|d| d.as_u64())
        .ok_or_else(|| json_err("missing integer field dim"))? as usize;
    let cols_v = obj
        .get("basis_cols")
        .and_then(|c| c.as_array())
        .ok_or_else(|| json_err("missing array field basis_cols"))?;
    let m = cols_v.len();
    if m == 0 {
        return Err(json_err("basis_cols is empty"));
    }
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(m);
    for (j, col) in cols_v.iter().enumerate() {
        let col = col
            .as_array()
            .ok_or_else(|| json_err(format!("column {j} is not an array")))?;
        if col.len() != dim {
            return Err(json_err(format!(
                "column {j} has {} entries, expected {dim}",
                col.len()
            )));
        }
        let mut out = Vec::with_capacity(dim);
        for (i, cell) in col.iter().enumerate() {
            let x = cell
                .as_f64()
                .ok_or_else(|| json_err(format!("entry ({i}, {j}) is not a number")))?;
            out.push(x);
        }
        cols.push(out);
    }
    let basis = Mat::from_fn(dim, m, |i, j| cols[j][i]);
    SubspaceProjection::new(basis)
}

/// Comma-separated table: header row, LF line endings, no quoting. Cells
/// must not contain commas, quotes, or line breaks; multi-value cells use
/// ';' between items.
#[derive(Clone, Debug)]
pub struct CsvTable {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        let header: Vec<String> = header.iter().map(|s| s.to_string()).collect();
        for h in &header {
            assert_cell_clean(h);
        }
        CsvTable {
            header,
            rows: Vec::new(),
        }
    }

    pub fn push_row(&mut self, cells: Vec<String>) {
        assert_eq!(
            cells.len(),
            self.header.len(),
            "row width must match header"
        );
        for c in &cells {
            assert_cell_clean(c);
        }
        self.rows.push(cells);
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

fn assert_cell_clean(cell: &str) {
    assert!(
        !cell.contains(',') && !cell.contains('\n') && !cell.contains('"'),
        "CSV cell contains a reserved character: {cell:?}"
    );
}

/// Writes via a temporary file in the same directory plus an atomic rename,
/// so readers never observe partial output.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp~");
    {
        let mut file = std::fs::File::create(&tmp)?;
        file.write_all(bytes)?;
        file.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}
