//! Flat-file matrix and form format.
//!
//! A JSON object with `dim`, `complex` and row-major `data`. Entries are plain
//! numbers, or `[re, im]` pairs when `complex` is true. Form files carry the
//! same fields plus `space_dim` (equal to `dim`) and an optional `label`.
//!
//! ```json
//! {"dim": 2, "complex": false, "data": [2, 1, 1, 1]}
//! ```

use crate::error::{Error, Result};
use crate::forms::Form;
use crate::linalg::CMatrix;
use crate::psd::PsdMatrix;
use crate::tol::Tolerances;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::path::Path;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixFile {
    dim: usize,
    #[serde(default)]
    complex: bool,
    data: Vec<Entry>,
    space_dim: Option<usize>,
    label: Option<String>,
}

#[derive(Deserialize, Serialize)]
#[serde(untagged)]
enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

fn parse_file(text: &str) -> Result<MatrixFile> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

fn to_matrix(file: &MatrixFile) -> Result<CMatrix> {
    let n = file.dim;
    if file.data.len() != n * n {
        return Err(Error::NotSquare { dim: n, len: file.data.len() });
    }
    let mut entries = Vec::with_capacity(n * n);
    for e in &file.data {
        let z = match *e {
            Entry::Real(re) => Complex64::new(re, 0.0),
            Entry::Complex([re, im]) if file.complex => Complex64::new(re, im),
            Entry::Complex(_) => return Err(Error::Parse("complex entry in a file with \"complex\": false".into())),
        };
        if !z.re.is_finite() || !z.im.is_finite() {
            return Err(Error::Parse("non-finite entry".into()));
        }
        entries.push(z);
    }
    Ok(CMatrix::from_row_slice(n, n, &entries))
}

pub fn parse_matrix(text: &str) -> Result<CMatrix> {
    to_matrix(&parse_file(text)?)
}

pub fn parse_psd(text: &str, tol: &Tolerances) -> Result<PsdMatrix> {
    PsdMatrix::from_matrix(parse_matrix(text)?, tol)
}

pub fn parse_form(text: &str, tol: &Tolerances) -> Result<Form> {
    let file = parse_file(text)?;
    if let Some(sd) = file.space_dim {
        if sd != file.dim {
            return Err(Error::Parse(format!("space_dim {sd} differs from dim {}", file.dim)));
        }
    }
    let gram = PsdMatrix::from_matrix(to_matrix(&file)?, tol)?;
    let form = Form::new(gram);
    Ok(match file.label {
        Some(l) => form.with_label(l),
        None => form,
    })
}

pub fn matrix_to_json(m: &CMatrix) -> Value {
    let complex = m.iter().any(|z| z.im != 0.0);
    let mut data = Vec::with_capacity(m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let z = m[(i, j)];
            data.push(if complex { json!([z.re, z.im]) } else { json!(z.re) });
        }
    }
    json!({"dim": m.nrows(), "complex": complex, "data": data})
}

pub fn form_to_json(f: &Form) -> Value {
    let mut v = matrix_to_json(f.gram().matrix());
    v["space_dim"] = json!(f.space_dim());
    if let Some(label) = f.label() {
        v["label"] = json!(label);
    }
    v
}

fn read(path: &Path) -> Result<String> {
    Ok(std::fs::read_to_string(path)?)
}

fn write(path: &Path, v: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(v).map_err(|e| Error::Parse(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

pub fn read_matrix(path: &Path) -> Result<CMatrix> {
    parse_matrix(&read(path)?)
}

pub fn read_psd(path: &Path, tol: &Tolerances) -> Result<PsdMatrix> {
    parse_psd(&read(path)?, tol)
}

pub fn read_form(path: &Path, tol: &Tolerances) -> Result<Form> {
    parse_form(&read(path)?, tol)
}

pub fn write_matrix(path: &Path, m: &CMatrix) -> Result<()> {
    write(path, &matrix_to_json(m))
}

pub fn write_form(path: &Path, f: &Form) -> Result<()> {
    write(path, &form_to_json(f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::real_matrix;

    #[test]
    fn reads_real_and_complex() {
        let m = parse_matrix(r#"{"dim": 2, "data": [2, 1, 1, 1]}"#).unwrap();
        assert_eq!(m, real_matrix(&[&[2.0, 1.0], &[1.0, 1.0]]));
        let m = parse_matrix(r#"{"dim": 2, "complex": true, "data": [1, [0, 1], [0, -1], 2]}"#).unwrap();
        assert_eq!(m[(0, 1)], Complex64::new(0.0, 1.0));
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(matches!(parse_matrix(r#"{"dim": 2, "data": [1, 2, 3]}"#), Err(Error::NotSquare { dim: 2, len: 3 })));
        assert!(matches!(parse_matrix(r#"{"dim": 1, "data": [[1, 2]]}"#), Err(Error::Parse(_))));
        assert!(matches!(parse_matrix("not json"), Err(Error::Parse(_))));
    }

    #[test]
    fn form_fields() {
        let t = Tolerances::default();
        let f = parse_form(r#"{"dim": 2, "space_dim": 2, "label": "t", "data": [1, 0, 0, 0]}"#, &t).unwrap();
        assert_eq!(f.label(), Some("t"));
        assert_eq!(f.gram().rank(), 1);
        assert!(parse_form(r#"{"dim": 2, "space_dim": 3, "data": [1, 0, 0, 0]}"#, &t).is_err());
        let back = parse_form(&form_to_json(&f).to_string(), &t).unwrap();
        assert_eq!(back.gram().matrix(), f.gram().matrix());
        assert_eq!(back.label(), Some("t"));
    }

    #[test]
    fn writer_marks_complexity() {
        let v = matrix_to_json(&real_matrix(&[&[1.0]]));
        assert_eq!(v["complex"], json!(false));
        let mut m = real_matrix(&[&[1.0, 0.0], &[0.0, 1.0]]);
        m[(0, 1)] = Complex64::new(0.0, 0.5);
        let v = matrix_to_json(&m);
        assert_eq!(v["complex"], json!(true));
        assert_eq!(parse_matrix(&v.to_string()).unwrap(), m);
    }
}
