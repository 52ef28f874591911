//! Layered configuration: built-in defaults, then a JSON document, then
//! command-line flags.

use std::path::Path;

use ntk_spectra::{Error, Result};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

/// Reads `--config`. Accepts either a bare parameter object or a full
/// report document, in which case its `config` block is used.
pub fn load(path: &Path, command: &str) -> Result<Value> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::config(format!("cannot read config {}: {e}", path.display())))?;
    let doc: Value = serde_json::from_str(&text)
        .map_err(|e| Error::config(format!("config {} is not valid JSON: {e}", path.display())))?;
    let Value::Object(mut obj) = doc else {
        return Err(Error::config("config document must be a JSON object"));
    };
    if let (Some(Value::Object(inner)), Some(cmd)) = (obj.get("config"), obj.get("command")) {
        if cmd.as_str() != Some(command) {
            return Err(Error::config(format!("config was written by `{cmd}`, not `{command}`")));
        }
        return Ok(Value::Object(inner.clone()));
    }
    obj.remove("command");
    Ok(Value::Object(obj))
}

/// Overlays `top` onto `base`, descending into nested objects.
pub fn merge(base: &mut Value, top: Value) {
    match (base, top) {
        (Value::Object(b), Value::Object(t)) => {
            for (k, v) in t {
                match b.get_mut(&k) {
                    Some(slot) if slot.is_object() && v.is_object() => merge(slot, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (b, t) => *b = t,
    }
}

/// `defaults ← file ← flags`, deserialized into the command's parameters.
pub fn resolve<P: Serialize + DeserializeOwned>(defaults: &P, file: Option<Value>, flags: Map<String, Value>) -> Result<P> {
    let mut value = serde_json::to_value(defaults)?;
    if let Some(file) = file {
        merge(&mut value, file);
    }
    merge(&mut value, Value::Object(flags));
    serde_json::from_value(value).map_err(|e| Error::config(e.to_string()))
}

/// Collects the flags that were actually given.
#[derive(Default)]
pub struct Flags(Map<String, Value>);

impl Flags {
    pub fn set<T: Serialize>(&mut self, key: &str, value: Option<T>) -> &mut Self {
        if let Some(v) = value {
            self.0.insert(key.to_string(), serde_json::to_value(v).expect("flag values serialize"));
        }
        self
    }

    pub fn into_map(self) -> Map<String, Value> {
        self.0
    }
}

#[cfg(test)]
mod tests {
    use serde::Deserialize;
    use serde_json::json;

    use super::*;

    #[derive(Debug, Serialize, Deserialize, PartialEq)]
    #[serde(deny_unknown_fields)]
    struct P {
        a: u32,
        b: f64,
        inner: Inner,
    }

    #[derive(Debug, Serialize, Deserialize, PartialEq)]
    #[serde(deny_unknown_fields)]
    struct Inner {
        x: u32,
        y: u32,
    }

    #[test]
    fn flags_win_over_file_over_defaults() {
        let d = P { a: 1, b: 2.0, inner: Inner { x: 1, y: 2 } };
        let file = json!({"a": 5, "inner": {"y": 7}});
        let mut flags = Flags::default();
        flags.set("a", Some(9u32)).set("b", None::<f64>);
        let p: P = resolve(&d, Some(file), flags.into_map()).unwrap();
        assert_eq!(p, P { a: 9, b: 2.0, inner: Inner { x: 1, y: 7 } });
    }

    #[test]
    fn unknown_keys_are_configuration_errors() {
        let d = P { a: 1, b: 2.0, inner: Inner { x: 1, y: 2 } };
        let err = resolve(&d, Some(json!({"c": 1})), Map::new()).unwrap_err();
        assert_eq!(err.class(), ntk_spectra::ErrorClass::Configuration);
    }
}
