//! BPMN 2.0 XML input/output.

mod codec;
pub mod di;
mod document;
pub mod layout;
pub mod strings;

use thiserror::Error;

pub use codec::{parse, parse_fragment, serialize, serialize_element};
pub use di::{reattach_di, strip_di, DiagramInterchange, Reattached};
pub use document::{
    Attribute, BpmnDocument, Element, Node, BPMNDI_NS, BPMN_MODEL_NS, DC_NS, DI_NS,
};
pub use layout::auto_layout;
pub use strings::{
    extract_strings, fuzzy_similarity, reinsert_strings, reinsert_strings_with, ExtractOptions,
    Reinsertion, StringLocation, TextSlot, TranslatableString, DEFAULT_FUZZY_THRESHOLD,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum XmlError {
    #[error("XML syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("root element is not a BPMN 2.0 `definitions` element: {found}")]
    MissingBpmnNamespace { found: String },
    #[error("document contains no process definition")]
    DocumentWithoutProcess,
}
