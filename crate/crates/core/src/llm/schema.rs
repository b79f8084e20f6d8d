use serde::{Deserialize, Serialize};
use serde_json::Value;

/// The six reconstruction stages, in execution order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Stage {
    ProcessElements,
    DecisionAnalysis,
    DataObjectCatalog,
    DataModel,
    ActivityDataMap,
    BpmnXml,
}

impl Stage {
    pub const ALL: [Stage; 6] = [
        Stage::ProcessElements,
        Stage::DecisionAnalysis,
        Stage::DataObjectCatalog,
        Stage::DataModel,
        Stage::ActivityDataMap,
        Stage::BpmnXml,
    ];

    /// 1-based position in the pipeline.
    pub fn number(self) -> usize {
        Self::ALL.iter().position(|s| *s == self).unwrap_or(0) + 1
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::ProcessElements => "process elements",
            Self::DecisionAnalysis => "decision analysis",
            Self::DataObjectCatalog => "data object catalog",
            Self::DataModel => "data model",
            Self::ActivityDataMap => "activity data map",
            Self::BpmnXml => "BPMN XML",
        }
    }

    /// Artifact file name inside a run directory.
    pub fn file_name(self) -> String {
        match self {
            Self::BpmnXml => "stage6.bpmn".to_owned(),
            other => format!("stage{}.json", other.number()),
        }
    }
}

type Check = Result<(), String>;

fn obj<'a>(v: &'a Value, at: &str) -> Result<&'a serde_json::Map<String, Value>, String> {
    v.as_object()
        .ok_or_else(|| format!("{at} must be an object"))
}

fn arr<'a>(v: &'a Value, at: &str) -> Result<&'a Vec<Value>, String> {
    v.as_array().ok_or_else(|| format!("{at} must be an array"))
}

fn required_str(o: &serde_json::Map<String, Value>, key: &str, at: &str) -> Check {
    match o.get(key) {
        Some(Value::String(s)) if !s.trim().is_empty() => Ok(()),
        Some(Value::String(_)) => Err(format!("{at}.{key} must not be empty")),
        Some(_) => Err(format!("{at}.{key} must be a string")),
        None => Err(format!("{at}.{key} is required")),
    }
}

fn optional_array(
    o: &serde_json::Map<String, Value>,
    key: &str,
    at: &str,
) -> Result<Vec<Value>, String> {
    match o.get(key) {
        None | Some(Value::Null) => Ok(Vec::new()),
        Some(v) => arr(v, &format!("{at}.{key}")).cloned(),
    }
}

/// Each element of `items` is an object with a non-empty string `key`.
fn each_named(items: &[Value], key: &str, at: &str) -> Check {
    for (i, item) in items.iter().enumerate() {
        let here = format!("{at}[{i}]");
        required_str(obj(item, &here)?, key, &here)?;
    }
    Ok(())
}

fn process_elements(v: &Value) -> Check {
    let o = obj(v, "payload")?;
    let b = obj(
        o.get("boundaries")
            .ok_or("payload.boundaries is required")?,
        "payload.boundaries",
    )?;
    required_str(b, "start", "boundaries")?;
    required_str(b, "end", "boundaries")?;
    let activities = arr(
        o.get("activities")
            .ok_or("payload.activities is required")?,
        "payload.activities",
    )?;
    if activities.is_empty() {
        return Err("payload.activities must list at least one activity".into());
    }
    each_named(activities, "name", "activities")?;
    each_named(
        &optional_array(o, "participants", "payload")?,
        "name",
        "participants",
    )?;
    each_named(
        &optional_array(o, "decisions", "payload")?,
        "name",
        "decisions",
    )?;
    for key in ["inputs", "outputs", "data_flows", "dependencies"] {
        optional_array(o, key, "payload")?;
    }
    Ok(())
}

fn decision_analysis(v: &Value) -> Check {
    for (i, d) in arr(v, "payload")?.iter().enumerate() {
        let at = format!("payload[{i}]");
        let o = obj(d, &at)?;
        required_str(o, "decision", &at)?;
        optional_array(o, "inputs", &at)?;
        let outcomes = arr(
            o.get("outcomes")
                .ok_or(format!("{at}.outcomes is required"))?,
            &format!("{at}.outcomes"),
        )?;
        each_named(outcomes, "label", &format!("{at}.outcomes"))?;
    }
    Ok(())
}

fn data_object_catalog(v: &Value) -> Check {
    for (i, d) in arr(v, "payload")?.iter().enumerate() {
        let at = format!("payload[{i}]");
        let o = obj(d, &at)?;
        required_str(o, "name", &at)?;
        match o.get("class").and_then(Value::as_str) {
            Some("primary" | "derived" | "temporary") => {}
            Some(other) => {
                return Err(format!(
                    "{at}.class must be primary, derived or temporary, got `{other}`"
                ))
            }
            None => return Err(format!("{at}.class is required")),
        }
        optional_array(o, "attributes", &at)?;
        optional_array(o, "relationships", &at)?;
    }
    Ok(())
}

fn data_model(v: &Value) -> Check {
    let o = obj(v, "payload")?;
    let entities = arr(
        o.get("entities").ok_or("payload.entities is required")?,
        "payload.entities",
    )?;
    for (i, e) in entities.iter().enumerate() {
        let at = format!("entities[{i}]");
        let eo = obj(e, &at)?;
        required_str(eo, "name", &at)?;
        each_named(
            &optional_array(eo, "attributes", &at)?,
            "name",
            &format!("{at}.attributes"),
        )?;
    }
    for (i, r) in optional_array(o, "relationships", "payload")?
        .iter()
        .enumerate()
    {
        let at = format!("relationships[{i}]");
        let ro = obj(r, &at)?;
        required_str(ro, "from", &at)?;
        required_str(ro, "to", &at)?;
    }
    Ok(())
}

fn activity_data_map(v: &Value) -> Check {
    for (i, a) in arr(v, "payload")?.iter().enumerate() {
        let at = format!("payload[{i}]");
        let o = obj(a, &at)?;
        required_str(o, "activity", &at)?;
        each_named(
            &optional_array(o, "inputs", &at)?,
            "object",
            &format!("{at}.inputs"),
        )?;
        each_named(
            &optional_array(o, "outputs", &at)?,
            "object",
            &format!("{at}.outputs"),
        )?;
    }
    Ok(())
}

/// Validates a stage payload and returns it. Array-shaped stages also accept
/// an object whose only member is the array. Unknown fields are kept.
pub fn validate_stage(stage: Stage, value: Value) -> Result<Value, String> {
    let expects_array = matches!(
        stage,
        Stage::DecisionAnalysis | Stage::DataObjectCatalog | Stage::ActivityDataMap
    );
    let value = match value {
        Value::Object(mut o)
            if expects_array && o.len() == 1 && o.values().all(Value::is_array) =>
        {
            o.values_mut().next().map(Value::take).unwrap_or_default()
        }
        other => other,
    };
    match stage {
        Stage::ProcessElements => process_elements(&value),
        Stage::DecisionAnalysis => decision_analysis(&value),
        Stage::DataObjectCatalog => data_object_catalog(&value),
        Stage::DataModel => data_model(&value),
        Stage::ActivityDataMap => activity_data_map(&value),
        Stage::BpmnXml => match &value {
            Value::String(s) if s.contains("definitions") => Ok(()),
            _ => Err("payload must be BPMN XML text".into()),
        },
    }?;
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn process_elements_minimal_and_extra_fields() {
        let v = json!({"boundaries": {"start": "Order placed", "end": "Order shipped"},
                       "activities": [{"name": "Pack", "participant": "Warehouse"}],
                       "notes": "kept"});
        assert_eq!(
            validate_stage(Stage::ProcessElements, v.clone()).unwrap(),
            v
        );
        let missing = json!({"activities": [{"name": "Pack"}]});
        assert!(validate_stage(Stage::ProcessElements, missing)
            .unwrap_err()
            .contains("boundaries"));
        let bad = json!({"boundaries": {"start": "a", "end": "b"}, "activities": [{}]});
        assert!(validate_stage(Stage::ProcessElements, bad)
            .unwrap_err()
            .contains("name"));
    }

    #[test]
    fn array_stages_unwrap_single_member_objects() {
        let wrapped =
            json!({"decisions": [{"decision": "In stock?", "outcomes": [{"label": "yes"}]}]});
        let v = validate_stage(Stage::DecisionAnalysis, wrapped).unwrap();
        assert!(v.is_array());
        assert!(validate_stage(Stage::DecisionAnalysis, json!([])).is_ok());
        assert!(validate_stage(Stage::DecisionAnalysis, json!([{"decision": "x"}])).is_err());
    }

    #[test]
    fn catalog_class_is_enumerated() {
        assert!(validate_stage(
            Stage::DataObjectCatalog,
            json!([{"name": "Order", "class": "primary"}])
        )
        .is_ok());
        assert!(validate_stage(
            Stage::DataObjectCatalog,
            json!([{"name": "Order", "class": "core"}])
        )
        .is_err());
    }

    #[test]
    fn data_model_and_map() {
        let m = json!({"entities": [{"name": "Order", "attributes": [{"name": "id", "type": "string"}], "keys": ["id"]}],
                       "relationships": [{"from": "Order", "to": "Item", "cardinality": "1..*"}]});
        assert!(validate_stage(Stage::DataModel, m).is_ok());
        assert!(validate_stage(Stage::DataModel, json!({"relationships": []})).is_err());
        let map = json!([{"activity": "Pack", "inputs": [{"object": "Order"}], "outputs": []}]);
        assert!(validate_stage(Stage::ActivityDataMap, map).is_ok());
        assert!(validate_stage(
            Stage::ActivityDataMap,
            json!([{"activity": "Pack", "inputs": [{}]}])
        )
        .is_err());
    }

    #[test]
    fn file_names() {
        assert_eq!(Stage::ProcessElements.file_name(), "stage1.json");
        assert_eq!(Stage::ActivityDataMap.file_name(), "stage5.json");
        assert_eq!(Stage::BpmnXml.file_name(), "stage6.bpmn");
    }
}
