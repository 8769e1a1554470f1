//! JSON encoding of [`WalkSchedule`].
//!
//! ```json
//! { "origin": 0,
//!   "steps": [ [ { "coins": { "1": [[0.7, 0], [-0.7, 0], [-0.7, 0], [-0.7, 0]], "-1": "X" },
//!                  "plates": { "-1": [ { "kind": "HWP", "angle": 45.0 } ] } } ] ] }
//! ```
//!
//! A coin is four `[re, im]` pairs in row-major `(H, V)` order, the same
//! nested as two rows, or a named alias (`I`, `X`, `C1_2`, `C2_1`, `C2_2`,
//! `C3_1`). Output always uses the flat four-pair form, and numbers are
//! written in shortest round-trip form, so encode → decode → encode is
//! byte-identical.

use std::collections::BTreeMap;

use serde_json::{json, Map, Value};

use crate::coin::{CoinOperator, C64};
use crate::error::{Error, Result};
use crate::reference::coin_alias;
use crate::walk::{SubStep, WalkSchedule};
use crate::waveplate::PlateSequence;

fn err(path: &str, msg: impl std::fmt::Display) -> Error {
    Error::Schedule(format!("{path}: {msg}"))
}

fn coin_to_json(m: &CoinOperator) -> Value {
    Value::Array(m.entries().map(|z| json!([z.re, z.im])).collect())
}

fn schedule_to_value(s: &WalkSchedule) -> Value {
    let steps: Vec<Value> = s
        .steps()
        .iter()
        .map(|step| {
            Value::Array(
                step.iter()
                    .map(|sub| {
                        let coins: Map<String, Value> = sub
                            .coins()
                            .iter()
                            .map(|(x, m)| (x.to_string(), coin_to_json(m)))
                            .collect();
                        let mut obj = Map::new();
                        obj.insert("coins".into(), Value::Object(coins));
                        if !sub.plates().is_empty() {
                            let plates: Map<String, Value> = sub
                                .plates()
                                .iter()
                                .map(|(x, p)| {
                                    (
                                        x.to_string(),
                                        serde_json::to_value(p).expect("plates serialize"),
                                    )
                                })
                                .collect();
                            obj.insert("plates".into(), Value::Object(plates));
                        }
                        Value::Object(obj)
                    })
                    .collect(),
            )
        })
        .collect();
    json!({ "origin": s.origin(), "steps": steps })
}

/// Canonical pretty-printed encoding.
pub fn to_json_string(s: &WalkSchedule) -> String {
    serde_json::to_string_pretty(&schedule_to_value(s)).expect("schedule serializes")
}

fn parse_complex(v: &Value, path: &str) -> Result<C64> {
    match v {
        Value::Number(n) => n
            .as_f64()
            .map(|re| C64::new(re, 0.0))
            .ok_or_else(|| err(path, "not a finite number")),
        Value::Array(a) if a.len() == 2 => {
            let re = a[0]
                .as_f64()
                .ok_or_else(|| err(path, "real part is not a number"))?;
            let im = a[1]
                .as_f64()
                .ok_or_else(|| err(path, "imaginary part is not a number"))?;
            Ok(C64::new(re, im))
        }
        _ => Err(err(path, "expected [re, im]")),
    }
}

fn parse_coin(v: &Value, path: &str) -> Result<CoinOperator> {
    match v {
        Value::String(name) => {
            coin_alias(name).ok_or_else(|| err(path, format!("unknown coin alias {name:?}")))
        }
        Value::Array(a) if a.len() == 4 => {
            let z: Vec<C64> = a
                .iter()
                .enumerate()
                .map(|(i, e)| parse_complex(e, &format!("{path}[{i}]")))
                .collect::<Result<_>>()?;
            Ok(CoinOperator::new([[z[0], z[1]], [z[2], z[3]]]))
        }
        Value::Array(rows) if rows.len() == 2 => {
            let mut m = [[C64::new(0.0, 0.0); 2]; 2];
            for (r, row) in rows.iter().enumerate() {
                let cells = row
                    .as_array()
                    .filter(|c| c.len() == 2)
                    .ok_or_else(|| err(&format!("{path}[{r}]"), "expected a row of two entries"))?;
                for (c, cell) in cells.iter().enumerate() {
                    m[r][c] = parse_complex(cell, &format!("{path}[{r}][{c}]"))?;
                }
            }
            Ok(CoinOperator::new(m))
        }
        _ => Err(err(
            path,
            "expected an alias, four [re, im] pairs, or a 2×2 matrix",
        )),
    }
}

fn parse_site(key: &str, path: &str) -> Result<i64> {
    key.trim()
        .parse()
        .map_err(|_| err(path, format!("site key {key:?} is not an integer")))
}

fn parse_substep(v: &Value, path: &str) -> Result<SubStep> {
    let obj = v
        .as_object()
        .ok_or_else(|| err(path, "expected an object"))?;
    if let Some(k) = obj.keys().find(|k| *k != "coins" && *k != "plates") {
        return Err(err(path, format!("unknown field {k:?}")));
    }
    let mut coins = BTreeMap::new();
    if let Some(c) = obj.get("coins") {
        let cpath = format!("{path}.coins");
        let map = c
            .as_object()
            .ok_or_else(|| err(&cpath, "expected an object"))?;
        for (k, v) in map {
            let p = format!("{cpath}.\"{k}\"");
            coins.insert(parse_site(k, &p)?, parse_coin(v, &p)?);
        }
    }
    let sub = SubStep::new(coins).map_err(|e| err(&format!("{path}.coins"), e))?;
    let mut plates = BTreeMap::new();
    if let Some(p) = obj.get("plates") {
        let ppath = format!("{path}.plates");
        let map = p
            .as_object()
            .ok_or_else(|| err(&ppath, "expected an object"))?;
        for (k, v) in map {
            let p = format!("{ppath}.\"{k}\"");
            let seq: PlateSequence = serde_json::from_value(v.clone()).map_err(|e| err(&p, e))?;
            plates.insert(parse_site(k, &p)?, seq);
        }
    }
    sub.with_plates(plates)
        .map_err(|e| err(&format!("{path}.plates"), e))
}

/// Decodes a schedule; errors name the offending field.
pub fn from_json_str(text: &str) -> Result<WalkSchedule> {
    let v: Value = serde_json::from_str(text)?;
    from_json_value(&v)
}

pub fn from_json_value(v: &Value) -> Result<WalkSchedule> {
    let obj = v
        .as_object()
        .ok_or_else(|| err("$", "expected an object"))?;
    if let Some(k) = obj.keys().find(|k| *k != "origin" && *k != "steps") {
        return Err(err("$", format!("unknown field {k:?}")));
    }
    let origin = match obj.get("origin") {
        None => 0,
        Some(o) => o
            .as_i64()
            .ok_or_else(|| err("origin", "expected an integer"))?,
    };
    let steps = obj
        .get("steps")
        .ok_or_else(|| err("steps", "missing"))?
        .as_array()
        .ok_or_else(|| err("steps", "expected an array"))?;
    let mut parsed = Vec::with_capacity(steps.len());
    for (i, step) in steps.iter().enumerate() {
        let path = format!("steps[{i}]");
        let subs = step
            .as_array()
            .ok_or_else(|| err(&path, "expected an array of sub-steps"))?;
        let subs = subs
            .iter()
            .enumerate()
            .map(|(k, s)| parse_substep(s, &format!("{path}[{k}]")))
            .collect::<Result<Vec<_>>>()?;
        parsed.push(subs);
    }
    WalkSchedule::new(origin, parsed)
}
