use super::schema::Stage;

pub fn translation_system(target_language: &str) -> String {
    format!(
        "You translate labels of business process models into {target_language}.\n\
         You receive a JSON array of distinct source strings.\n\
         Reply with one JSON object that maps every source string, unchanged and exactly as given, \
         to its translation. Keep placeholders, expressions and product names intact. \
         Output only the JSON object."
    )
}

pub fn description_system() -> &'static str {
    "You are a business analyst who explains BPMN 2.0 process models to readers without modeling training.\n\
     Write a well-structured natural-language description of the model you receive. Cover:\n\
     - the purpose of the process and what starts and ends it;\n\
     - the participants or roles and what each is responsible for;\n\
     - every activity, in execution order;\n\
     - every gateway, phrased as conditional statements (\"if ..., then ...; otherwise ...\");\n\
     - the data objects that are read or produced.\n\
     Reply with the description only, as plain prose."
}

pub fn regenerate_system() -> &'static str {
    "You are a BPMN 2.0 expert who repairs models so that a workflow engine can execute them.\n\
     You receive a model without diagram information and a JSON list of compliance errors.\n\
     Return the complete corrected model as one BPMN 2.0 XML document. Keep every existing id unless \
     the fix requires removing the element. Exclusive gateways with several exits need a default flow; \
     every other exit needs a conditionExpression. Data object references must follow the dataObject \
     they point to. Every flow node must lie on a path from a start event to an end event. \
     Do not add BPMNDI elements. Output only the XML."
}

pub fn repair_system() -> &'static str {
    "You are a BPMN 2.0 expert who repairs large models with small, local edits.\n\
     You receive a model without diagram information and a JSON list of compliance errors.\n\
     Reply with a JSON array of repair actions applied in order. Each action is an object:\n\
     - {\"action\": \"replace\", \"target_id\": ID, \"new_xml\": XML}: swap the element with that id for new_xml;\n\
     - {\"action\": \"modify\", \"target_id\": ID, \"attributes\": {NAME: VALUE or null}}: set or remove attributes \
       (or give new_xml to rewrite the element);\n\
     - {\"action\": \"augment\", \"parent_id\": ID, \"new_xml\": XML}: append a new child element;\n\
     - {\"action\": \"delete\", \"target_id\": ID}: remove the element.\n\
     Use the namespace prefixes of the model in new_xml. Output only the JSON array."
}

pub fn correction_user(model_xml: &str, report_json: &str, iteration: usize) -> String {
    format!(
        "Correction round {iteration}.\n\nCompliance errors:\n{report_json}\n\nModel:\n{model_xml}"
    )
}

pub fn stage_system(stage: Stage) -> &'static str {
    match stage {
        Stage::ProcessElements => {
            "You are a process analyst who turns written process documentation into structured data.\n\
             From the description, identify:\n\
             - the boundaries: the event that starts the process and the state that ends it;\n\
             - the activities, meaning every task or step, with the participant performing it;\n\
             - the participants (people, roles, systems) and their responsibilities;\n\
             - the decisions where the flow branches;\n\
             - the inputs the process needs and the outputs each activity yields;\n\
             - how data moves between steps, and dependencies on external systems or processes.\n\
             Reply with one JSON object: {\"boundaries\": {\"start\": str, \"end\": str}, \
             \"activities\": [{\"name\": str, \"participant\": str}], \"participants\": [{\"name\": str, \
             \"responsibilities\": [str]}], \"decisions\": [{\"name\": str}], \"inputs\": [str], \
             \"outputs\": [str], \"data_flows\": [str], \"dependencies\": [str]}."
        }
        Stage::DecisionAnalysis => {
            "You are a process analyst specialising in decision logic.\n\
             For every decision point in the extracted process elements, determine what must be known \
             before deciding (data to check, results of earlier activities, states to assess), which \
             outcomes are possible, and the exact condition that selects each outcome. Mark the outcome \
             that applies when no condition holds as the default.\n\
             Reply with a JSON array: [{\"decision\": str, \"inputs\": [str], \"outcomes\": \
             [{\"label\": str, \"condition\": str, \"default\": bool}]}]."
        }
        Stage::DataObjectCatalog => {
            "You are a data analyst working on business processes.\n\
             List the data objects the process works with. Classify each as primary (a core entity), \
             derived (produced while the process runs) or temporary (used only briefly). Give each a \
             clear name, its attributes, how it is created, read, updated and retired, and how it \
             relates to the other objects.\n\
             Reply with a JSON array: [{\"name\": str, \"class\": \"primary\"|\"derived\"|\"temporary\", \
             \"attributes\": [str], \"usage\": str, \"relationships\": [str]}]."
        }
        Stage::DataModel => {
            "You are a data architect.\n\
             Turn the catalog of data objects into a data model: the entities, each attribute with its \
             type and constraints, the relationships with direction, kind and cardinality, any \
             inheritance between entities, and the primary, foreign and unique keys.\n\
             Reply with one JSON object: {\"entities\": [{\"name\": str, \"attributes\": [{\"name\": str, \
             \"type\": str, \"constraints\": [str]}], \"keys\": [str]}], \"relationships\": \
             [{\"from\": str, \"to\": str, \"cardinality\": str, \"kind\": str}]}."
        }
        Stage::ActivityDataMap => {
            "You are a process analyst linking activities to data.\n\
             For every activity and decision of the process, state which data objects it reads and \
             which it creates or changes, with the attributes involved. Use only activities and \
             decisions from the process elements and only objects from the data catalog and model.\n\
             Reply with a JSON array: [{\"activity\": str, \"inputs\": [{\"object\": str, \
             \"attributes\": [str]}], \"outputs\": [{\"object\": str, \"attributes\": [str]}]}]."
        }
        Stage::BpmnXml => {
            "You are a BPMN 2.0 expert who writes models that execute on engines such as Camunda.\n\
             Build one BPMN 2.0 XML document from the structured inputs: process elements, decisions, \
             data objects, data model and activity data mapping.\n\
             Requirements:\n\
             - follow the BPMN 2.0 schema and namespace http://www.omg.org/spec/BPMN/20100524/MODEL;\n\
             - include every activity and decision as a task or gateway;\n\
             - give every exclusive gateway with several exits a default flow and a conditionExpression \
               on each other exit;\n\
             - declare each dataObject before any dataObjectReference to it, and connect activities to \
               data with dataInputAssociation and dataOutputAssociation;\n\
             - connect every node on a path from a start event to an end event;\n\
             - leave out BPMNDI diagram elements entirely.\n\
             Output only the XML document."
        }
    }
}

/// User message for stage `stage`, embedding the description and every earlier payload.
pub fn stage_user(stage: Stage, description: &str, previous: &[(Stage, String)]) -> String {
    let mut out = String::new();
    if stage != Stage::BpmnXml || previous.is_empty() {
        out.push_str("Process description:\n");
        out.push_str(description.trim());
        out.push_str("\n\n");
    }
    for (s, payload) in previous {
        out.push_str(&format!(
            "Stage {} ({}) result:\n{}\n\n",
            s.number(),
            s.name(),
            payload
        ));
    }
    out.push_str(&format!("Produce the {} now.", stage.name()));
    out
}
