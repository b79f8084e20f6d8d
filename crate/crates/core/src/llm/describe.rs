use super::{prompts, ChatMessage, LlmClient, LlmError};
use crate::xml::{serialize, strip_di, BpmnDocument};

/// Asks the model for a prose description of `doc`. Diagram interchange is
/// removed before the model is sent.
pub fn generate_description(doc: &BpmnDocument, llm: &LlmClient) -> Result<String, LlmError> {
    let (stripped, _) = strip_di(doc);
    let xml = String::from_utf8_lossy(&serialize(&stripped)).into_owned();
    let messages = [
        ChatMessage::system(prompts::description_system()),
        ChatMessage::user(format!("Describe this process model:\n\n{xml}")),
    ];
    llm.complete(&messages)
}
