//! JSON dumps of the main objects. Output is deterministic: object keys are
//! sorted and numbers are printed by `serde_json`'s shortest round-trip format.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde_json::{json, Value};

use crate::cartan::cartan_dump;
use crate::error::{Error, Result};
use crate::fusion::fused_space;
use crate::hecke::Sign;
use crate::rbox::{rbox_explicit, rbox_spectral};
use crate::rep::{rep_to_json, rho};
use crate::scalar::{QParam, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RForm {
    Spectral,
    Explicit,
}

impl std::str::FromStr for RForm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spectral" => Ok(RForm::Spectral),
            "explicit" => Ok(RForm::Explicit),
            other => Err(Error::Unsupported(format!("R-matrix form {other:?}"))),
        }
    }
}

pub fn cartan_json() -> Result<Value> {
    Ok(serde_json::to_value(cartan_dump()?).expect("cartan data serializes"))
}

pub fn rho_json<S: Scalar>(q: &QParam<S>, x: &S) -> Value {
    json!({ "x": x.to_json(), "q": q.q.to_json(), "images": rep_to_json(&rho(q, x)) })
}

pub fn rbox_json<S: Scalar>(q: &QParam<S>, u: &S, v: &S, x: &S, form: RForm) -> Result<Value> {
    let m = match form {
        RForm::Spectral => rbox_spectral(q, u, v, x)?,
        RForm::Explicit => rbox_explicit(q, u, v, x),
    };
    Ok(json!({
        "form": match form { RForm::Spectral => "spectral", RForm::Explicit => "explicit" },
        "q": q.q.to_json(),
        "u": u.to_json(),
        "v": v.to_json(),
        "x": x.to_json(),
        "matrix": m.to_json(),
    }))
}

/// Basis columns of `V_{±,x}` as a `4^n × d` matrix.
pub fn fused_basis_json(q: &QParam<Complex64>, n: usize, x: Complex64, sign: Sign) -> Result<Value> {
    let space = fused_space(q, n, &x, sign)?;
    Ok(json!({
        "n": n,
        "sign": sign.name(),
        "dim": space.dim(),
        "basis": space.basis.columns().to_json(),
    }))
}

/// Pretty-printed JSON with a trailing newline.
pub fn to_bytes(value: &Value) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(value).expect("JSON values serialize");
    s.push('\n');
    s.into_bytes()
}

pub fn write_json(path: &Path, value: &Value) -> Result<()> {
    fs::write(path, to_bytes(value)).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}
