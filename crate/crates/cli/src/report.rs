use serde_json::{Map, Value};

/// Ordered key/value output shared by both output modes, so human and JSON
/// output always carry the same values.
#[derive(Debug, Default)]
pub struct Report {
    fields: Vec<(String, Value)>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn put(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.fields.push((key.to_string(), value.into()));
        self
    }

    /// Stores `value` through its `Display` form, as exact numbers are.
    pub fn text(&mut self, key: &str, value: impl std::fmt::Display) -> &mut Self {
        self.put(key, value.to_string())
    }

    pub fn render(&self, json: bool) -> String {
        if json {
            let map: Map<String, Value> = self.fields.iter().cloned().collect();
            let mut s = serde_json::to_string_pretty(&Value::Object(map)).expect("report serializes");
            s.push('\n');
            return s;
        }
        let mut s = String::new();
        for (k, v) in &self.fields {
            match v {
                Value::String(t) => s.push_str(&format!("{k}: {t}\n")),
                Value::Array(items) => {
                    s.push_str(&format!("{k}:\n"));
                    for i in items {
                        match i {
                            Value::String(t) => s.push_str(&format!("  {t}\n")),
                            other => s.push_str(&format!("  {other}\n")),
                        }
                    }
                }
                other => s.push_str(&format!("{k}: {other}\n")),
            }
        }
        s
    }
}
