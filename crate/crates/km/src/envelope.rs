//! The single top-level object every command emits.

use km_core::Constants;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

pub const SCHEMA_VERSION: u32 = 1;

/// SHA-256 of the compact JSON of `inputs` (object keys are sorted).
pub fn digest(inputs: &Value) -> String {
    let bytes = serde_json::to_vec(inputs).expect("serializable");
    hex::encode(Sha256::digest(bytes))
}

pub fn envelope(
    command: &str,
    inputs: &Value,
    seed: Option<u64>,
    constants: &Constants,
    result: Value,
) -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "inputs_digest": digest(inputs),
        "seed": seed,
        "constants": constants,
        "result": result,
    })
}

/// Human rendering: one `key: value` line per top-level field, nested values
/// in compact JSON.
pub fn render_human(headline: &str, env: &Value) -> String {
    let mut out = String::new();
    if !headline.is_empty() {
        out.push_str(headline);
        out.push('\n');
    }
    if let Some(obj) = env.as_object() {
        for (k, v) in obj {
            if k == "result" {
                if let Some(r) = v.as_object() {
                    for (rk, rv) in r {
                        out.push_str(&format!("{rk}: {}\n", compact(rv)));
                    }
                    continue;
                }
            }
            out.push_str(&format!("{k}: {}\n", compact(v)));
        }
    }
    out
}

fn compact(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_ignores_key_order() {
        let a = json!({"a": 1, "b": [1, 2]});
        let b: Value = serde_json::from_str(r#"{"b":[1,2],"a":1}"#).unwrap();
        assert_eq!(digest(&a), digest(&b));
        assert_eq!(digest(&a).len(), 64);
    }
}
