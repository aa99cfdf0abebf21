//! JSON schemas shipped with the crate, and validation against them.

use std::sync::OnceLock;

use jsonschema::Validator;
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemaKind {
    Profile,
    Tensor,
    Point,
    Summary,
    RunConfig,
}

impl SchemaKind {
    pub const ALL: [SchemaKind; 5] = [
        SchemaKind::Profile,
        SchemaKind::Tensor,
        SchemaKind::Point,
        SchemaKind::Summary,
        SchemaKind::RunConfig,
    ];

    pub fn source(self) -> &'static str {
        match self {
            SchemaKind::Profile => include_str!("../schemas/profile.schema.json"),
            SchemaKind::Tensor => include_str!("../schemas/tensor.schema.json"),
            SchemaKind::Point => include_str!("../schemas/point.schema.json"),
            SchemaKind::Summary => include_str!("../schemas/summary.schema.json"),
            SchemaKind::RunConfig => include_str!("../schemas/run_config.schema.json"),
        }
    }

    fn validator(self) -> &'static Validator {
        static CACHE: [OnceLock<Validator>; 5] = [const { OnceLock::new() }; 5];
        CACHE[self as usize].get_or_init(|| {
            let schema: Value = serde_json::from_str(self.source()).expect("shipped schema is valid JSON");
            jsonschema::validator_for(&schema).expect("shipped schema compiles")
        })
    }
}

const MAX_MESSAGE: usize = 160;

/// All violations, each prefixed with its JSON pointer.
pub fn validate(kind: SchemaKind, instance: &Value) -> Result<(), Vec<String>> {
    let errors: Vec<String> = kind
        .validator()
        .iter_errors(instance)
        .map(|e| {
            let mut msg = e.to_string();
            if msg.len() > MAX_MESSAGE {
                let cut = (0..=MAX_MESSAGE).rev().find(|&i| msg.is_char_boundary(i)).unwrap_or(0);
                msg.truncate(cut);
                msg.push_str("...");
            }
            format!("at '{}': {msg}", e.instance_path)
        })
        .collect();
    if errors.is_empty() {
        Ok(())
    } else {
        Err(errors)
    }
}
