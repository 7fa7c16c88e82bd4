//! JSON and CSV formats.
//!
//! User-facing indices are 1-based. Tensor and instance documents keep full
//! precision so they round-trip exactly; reports are rounded to
//! [`REPORT_DIGITS`] significant digits. Non-finite numbers are written as
//! the strings `"inf"`, `"-inf"` and `"nan"`.

use std::io::Write;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::error::{Result, TcpError};
use crate::lab::ExperimentReport;
use crate::model::{FaceMask, TcpInstance};
use crate::properties::PropertyReport;
use crate::solver::SolutionSet;
use crate::tensor::Tensor;

pub const REPORT_DIGITS: usize = 12;

/// Rounds to `digits` significant decimal digits.
pub fn round_sig(x: f64, digits: usize) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    if !x.is_finite() {
        return x;
    }
    format!("{:.*e}", digits.saturating_sub(1), x).parse().unwrap_or(x)
}

fn number(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x.is_nan() {
        json!("nan")
    } else if x > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

/// Rounds every floating-point number in a JSON tree.
pub fn round_value(v: &mut Value, digits: usize) {
    match v {
        Value::Number(num) if num.is_f64() => {
            if let Some(x) = num.as_f64() {
                *v = json!(round_sig(x, digits));
            }
        }
        Value::Array(items) => items.iter_mut().for_each(|i| round_value(i, digits)),
        Value::Object(map) => map.values_mut().for_each(|i| round_value(i, digits)),
        _ => {}
    }
}

/// Serde adapter for `Option<f64>` fields that may hold infinities.
pub mod nonfinite {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            None => s.serialize_none(),
            Some(x) if x.is_finite() => s.serialize_f64(*x),
            Some(x) if x.is_nan() => s.serialize_str("nan"),
            Some(x) if *x > 0.0 => s.serialize_str("inf"),
            Some(_) => s.serialize_str("-inf"),
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Str(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        match Option::<Raw>::deserialize(d)? {
            None => Ok(None),
            Some(Raw::Num(x)) => Ok(Some(x)),
            Some(Raw::Str(s)) => match s.as_str() {
                "inf" => Ok(Some(f64::INFINITY)),
                "-inf" => Ok(Some(f64::NEG_INFINITY)),
                "nan" => Ok(Some(f64::NAN)),
                other => Err(de::Error::custom(format!("expected a number, got \"{other}\""))),
            },
        }
    }
}

fn parse_text(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| TcpError::Load(e.to_string()))
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str, path: &str) -> Result<&'a Value> {
    obj.get(key).ok_or_else(|| TcpError::Load(format!("{path}: missing field \"{key}\"")))
}

fn as_usize(v: &Value, path: &str) -> Result<usize> {
    v.as_u64().map(|u| u as usize).ok_or_else(|| TcpError::Load(format!("{path}: expected a nonnegative integer")))
}

fn as_real(v: &Value, path: &str) -> Result<f64> {
    let x = v.as_f64().ok_or_else(|| TcpError::Load(format!("{path}: expected a number")))?;
    if !x.is_finite() {
        return Err(TcpError::Load(format!("{path}: non-finite value")));
    }
    Ok(x)
}

fn as_reals(v: &Value, path: &str) -> Result<Vec<f64>> {
    v.as_array()
        .ok_or_else(|| TcpError::Load(format!("{path}: expected an array")))?
        .iter()
        .enumerate()
        .map(|(i, x)| as_real(x, &format!("{path}[{i}]")))
        .collect()
}

fn tensor_from_value(v: &Value, path: &str) -> Result<Tensor> {
    let obj = v.as_object().ok_or_else(|| TcpError::Load(format!("{path}: expected an object")))?;
    let m = as_usize(field(obj, "m", path)?, &format!("{path}.m"))?;
    let n = as_usize(field(obj, "n", path)?, &format!("{path}.n"))?;
    let format = obj.get("format").map(|f| f.as_str().unwrap_or("")).unwrap_or("dense");
    let epath = format!("{path}.entries");
    let entries = field(obj, "entries", path)?;
    let wrap = |e: TcpError| match e {
        TcpError::Load(_) => e,
        other => TcpError::Load(format!("{path}: {other}")),
    };
    match format {
        "dense" => {
            let vals = as_reals(entries, &epath)?;
            Tensor::new(m, n, vals).map_err(wrap)
        }
        "sparse" => {
            let items = entries.as_array().ok_or_else(|| TcpError::Load(format!("{epath}: expected an array")))?;
            let mut triples = Vec::with_capacity(items.len());
            for (k, item) in items.iter().enumerate() {
                let ipath = format!("{epath}[{k}]");
                let o = item.as_object().ok_or_else(|| TcpError::Load(format!("{ipath}: expected an object")))?;
                let idx_v = field(o, "index", &ipath)?;
                let idx = idx_v.as_array().ok_or_else(|| TcpError::Load(format!("{ipath}.index: expected an array")))?;
                if idx.len() != m {
                    return Err(TcpError::Load(format!("{ipath}.index: expected {m} indices, got {}", idx.len())));
                }
                let mut zero_based = Vec::with_capacity(m);
                for (j, i) in idx.iter().enumerate() {
                    let i = as_usize(i, &format!("{ipath}.index[{j}]"))?;
                    if i < 1 || i > n {
                        return Err(TcpError::Load(format!("{ipath}.index[{j}]: index {i} outside 1..={n}")));
                    }
                    zero_based.push(i - 1);
                }
                triples.push((zero_based, as_real(field(o, "value", &ipath)?, &format!("{ipath}.value"))?));
            }
            Tensor::from_sparse(m, n, &triples).map_err(|e| TcpError::Load(format!("{epath}: {e}")))
        }
        other => Err(TcpError::Load(format!("{path}.format: unknown format \"{other}\""))),
    }
}

pub fn parse_tensor(text: &str) -> Result<Tensor> {
    tensor_from_value(&parse_text(text)?, "tensor")
}

pub fn parse_instance(text: &str) -> Result<TcpInstance> {
    let v = parse_text(text)?;
    let obj = v.as_object().ok_or_else(|| TcpError::Load("instance: expected an object".into()))?;
    let tensor = tensor_from_value(field(obj, "tensor", "instance")?, "instance.tensor")?;
    let a = as_reals(field(obj, "a", "instance")?, "instance.a")?;
    TcpInstance::new(tensor, a).map_err(|e| TcpError::Load(format!("instance.a: {e}")))
}

/// Dense tensor document at full precision.
pub fn tensor_to_json(t: &Tensor) -> Value {
    json!({"m": t.order(), "n": t.dim(), "format": "dense", "entries": t.entries()})
}

pub fn instance_to_json(inst: &TcpInstance) -> Value {
    json!({"tensor": tensor_to_json(&inst.tensor), "a": inst.a})
}

fn face_json(f: FaceMask, n: usize) -> Value {
    json!(f.one_based(n))
}

pub fn solution_set_to_json(sol: &SolutionSet) -> Value {
    let n = sol.dim;
    let points: Vec<Value> = sol
        .points
        .iter()
        .map(|p| json!({"x": p.x, "face": face_json(p.face, n), "kkt_res": p.kkt_res}))
        .collect();
    let rays: Vec<Value> = sol.rays.iter().map(|r| json!({"direction": r.direction, "face": face_json(r.face, n)})).collect();
    let posdim: Vec<Value> = sol.posdim_suspect.iter().map(|f| face_json(*f, n)).collect();
    let mut v = json!({
        "status": sol.status.as_str(),
        "points": points,
        "rays": rays,
        "posdim_suspect": posdim,
        "meta": sol.meta,
    });
    round_value(&mut v, REPORT_DIGITS);
    v
}

fn rounded<T: Serialize>(x: &T) -> Result<Value> {
    let mut v = serde_json::to_value(x).map_err(|e| TcpError::Argument(format!("serialization failed: {e}")))?;
    round_value(&mut v, REPORT_DIGITS);
    Ok(v)
}

pub fn property_report_to_json(rep: &PropertyReport) -> Result<Value> {
    rounded(rep)
}

pub fn experiment_report_to_json(rep: &ExperimentReport) -> Result<Value> {
    rounded(rep)
}

/// CSV column order for experiment rows.
pub const CSV_COLUMNS: [&str; 7] = ["sample_id", "pert_norm_tensor", "pert_norm_vec", "n_points", "max_norm", "excess", "flags"];

fn csv_num(x: f64) -> String {
    match number(x) {
        Value::String(s) => s,
        _ => format!("{x}"),
    }
}

/// Writes experiment rows as CSV with shortest round-trip decimals. Flags
/// are joined with `;`.
pub fn write_report_csv<W: Write>(rep: &ExperimentReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io_err = |e: csv::Error| TcpError::Argument(format!("csv write failed: {e}"));
    w.write_record(CSV_COLUMNS).map_err(io_err)?;
    for r in &rep.rows {
        w.write_record([
            r.sample_id.to_string(),
            csv_num(r.pert_norm_tensor),
            csv_num(r.pert_norm_vec),
            r.n_points.to_string(),
            csv_num(r.max_norm),
            r.excess.map(csv_num).unwrap_or_default(),
            r.flags.join(";"),
        ])
        .map_err(io_err)?;
    }
    w.flush().map_err(|e| TcpError::Argument(format!("csv write failed: {e}")))?;
    Ok(())
}

/// Parsed form of a row written by [`write_report_csv`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub sample_id: usize,
    pub pert_norm_tensor: f64,
    pub pert_norm_vec: f64,
    pub n_points: usize,
    pub max_norm: f64,
    pub excess: Option<f64>,
    pub flags: String,
}

pub fn read_report_csv(text: &str) -> Result<Vec<CsvRow>> {
    csv::Reader::from_reader(text.as_bytes())
        .deserialize()
        .enumerate()
        .map(|(i, r)| r.map_err(|e| TcpError::Load(format!("csv row {}: {e}", i + 1))))
        .collect()
}
