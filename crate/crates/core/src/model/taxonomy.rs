use std::fmt;

use serde::{Deserialize, Serialize};

/// Functional category of a BPMN element. `Other` covers lanes, pools,
/// annotations, event definitions and anything else outside the five
/// categories; it never contributes to similarity metrics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ElementCategory {
    Task,
    Gateway,
    Event,
    Data,
    Flow,
    Other,
}

impl ElementCategory {
    /// The five metric categories, in canonical order.
    pub const METRIC: [ElementCategory; 5] = [
        ElementCategory::Task,
        ElementCategory::Gateway,
        ElementCategory::Event,
        ElementCategory::Data,
        ElementCategory::Flow,
    ];

    /// True for categories that become graph nodes.
    pub fn is_node(self) -> bool {
        matches!(self, Self::Task | Self::Gateway | Self::Event | Self::Data)
    }

    /// Task, gateway or event: the executable flow nodes.
    pub fn is_flow_node(self) -> bool {
        matches!(self, Self::Task | Self::Gateway | Self::Event)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Task => "Task",
            Self::Gateway => "Gateway",
            Self::Event => "Event",
            Self::Data => "Data",
            Self::Flow => "Flow",
            Self::Other => "Other",
        }
    }
}

impl fmt::Display for ElementCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Maps a local element name (prefix already stripped) to its category.
pub fn categorize_element(tag: &str) -> ElementCategory {
    use ElementCategory::*;
    match tag {
        "task" | "userTask" | "serviceTask" | "scriptTask" | "manualTask" | "sendTask"
        | "receiveTask" | "businessRuleTask" | "callActivity" | "subProcess" | "transaction"
        | "adHocSubProcess" => Task,
        "exclusiveGateway" | "parallelGateway" | "inclusiveGateway" | "eventBasedGateway"
        | "complexGateway" => Gateway,
        "startEvent"
        | "endEvent"
        | "intermediateCatchEvent"
        | "intermediateThrowEvent"
        | "boundaryEvent" => Event,
        "dataObject"
        | "dataObjectReference"
        | "dataStoreReference"
        | "dataInput"
        | "dataOutput"
        | "dataStore" => Data,
        "sequenceFlow"
        | "messageFlow"
        | "association"
        | "dataInputAssociation"
        | "dataOutputAssociation" => Flow,
        _ => Other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_tags() {
        assert_eq!(categorize_element("userTask"), ElementCategory::Task);
        assert_eq!(categorize_element("serviceTask"), ElementCategory::Task);
        assert_eq!(categorize_element("sequenceFlow"), ElementCategory::Flow);
        assert_eq!(
            categorize_element("parallelGateway"),
            ElementCategory::Gateway
        );
        assert_eq!(categorize_element("boundaryEvent"), ElementCategory::Event);
        assert_eq!(
            categorize_element("dataObjectReference"),
            ElementCategory::Data
        );
    }

    #[test]
    fn unknown_tags_are_other() {
        assert_eq!(categorize_element("textAnnotation"), ElementCategory::Other);
        assert_eq!(categorize_element("lane"), ElementCategory::Other);
        assert_eq!(categorize_element("UserTask"), ElementCategory::Other);
    }
}
