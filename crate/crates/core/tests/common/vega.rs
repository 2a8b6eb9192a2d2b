use std::sync::OnceLock;

use jsonschema::Validator;
use serde_json::Value;

pub fn validator() -> &'static Validator {
    static V: OnceLock<Validator> = OnceLock::new();
    V.get_or_init(|| {
        let mut schema: Value =
            serde_json::from_str(include_str!("../fixtures/vega-lite-v5.schema.json")).unwrap();
        encode_refs(&mut schema);
        jsonschema::validator_for(&schema).unwrap()
    })
}

/// Definition names such as `MarkPropDef<(Gradient|string|null)>` are not valid URI
/// references until percent-encoded.
fn encode_refs(v: &mut Value) {
    match v {
        Value::Object(m) => {
            for (k, child) in m.iter_mut() {
                match child {
                    Value::String(s) if k == "$ref" => {
                        let mut out = String::new();
                        for ch in s.chars() {
                            match ch {
                                '<' | '>' | '|' | '(' | ')' | '"' | ' ' | '[' | ']' => {
                                    out.push_str(&format!("%{:02X}", ch as u32))
                                }
                                _ => out.push(ch),
                            }
                        }
                        *s = out;
                    }
                    _ => encode_refs(child),
                }
            }
        }
        Value::Array(a) => a.iter_mut().for_each(encode_refs),
        _ => {}
    }
}
