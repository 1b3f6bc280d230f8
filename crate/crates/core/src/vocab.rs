//! Predicate labels and node-id scheme shared by the registry, provenance
//! capture and the planner.

pub const NAME: &str = "name";
/// Secondary spelling of an attribute name, e.g. `hasWell` for `well`.
pub const ALT_NAME: &str = "alternativeName";

pub const IS_ATTRIBUTE_OF: &str = "isAttributeOf";
pub const IS_IDENTIFIER_OF: &str = "isIdentifierOf";
pub const REFERRED: &str = "referred";
pub const IS_MEMBER_OF_COMPLEX_ATTRIBUTE: &str = "isMemberOfComplexAttribute";
pub const WAS_RUN_ON: &str = "wasRunOn";
pub const IS_IN_STORE: &str = "isInStore";
pub const IS_SCHEMA_OF: &str = "isSchemaOf";
pub const IS_DATA_SCHEMA_OF: &str = "isDataSchemaOf";
pub const IS_STORED_IN_STORE: &str = "isStoredInStore";
pub const ALIAS: &str = "alias";

pub const WAS_DERIVED_FROM_WORKFLOW: &str = "wasDerivedFromWorkflow";
pub const WAS_MEMBER_OF_WORKFLOW_EXECUTION: &str = "wasMemberOfWorkflowExecution";
pub const WAS_DERIVED_FROM_TRANSFORMATION: &str = "wasDerivedFromDataTransformation";
pub const IS_TRANSFORMATION_OF: &str = "isDataTransformationOf";
pub const USES_ATTRIBUTE: &str = "usesAttribute";
pub const GENERATES_ATTRIBUTE: &str = "generatesAttribute";
pub const WAS_DERIVED_FROM_ATTRIBUTE: &str = "wasDerivedFromAttribute";
pub const VALUE: &str = "value";
pub const USED: &str = "used";
pub const WAS_GENERATED_BY: &str = "wasGeneratedBy";

/// Node ids. Names are percent-encoded so any display name (spaces
/// included) yields a valid id.
pub mod ids {
    use percent_encoding::{utf8_percent_encode, AsciiSet, NON_ALPHANUMERIC};

    use crate::catalog::NodeId;

    const NAME_SET: &AsciiSet = &NON_ALPHANUMERIC.remove(b'-').remove(b'_').remove(b'.').remove(b'~');

    pub const PREFIX: &str = "hk://id/";

    fn enc(name: &str) -> String {
        utf8_percent_encode(name, NAME_SET).to_string()
    }

    fn make(path: String) -> NodeId {
        NodeId::new(format!("{PREFIX}{path}")).expect("prefixed ids are always valid")
    }

    pub fn gcs_context() -> NodeId {
        make("context/gcs".into())
    }

    pub fn store_context(store: &str) -> NodeId {
        make(format!("context/store/{}", enc(store)))
    }

    pub fn workflow_context(workflow: &str) -> NodeId {
        make(format!("context/workflow/{}", enc(workflow)))
    }

    pub fn gcs_dataset(entity: &str) -> NodeId {
        make(format!("gcs/{}", enc(entity)))
    }

    pub fn gcs_attribute(entity: &str, attr: &str) -> NodeId {
        make(format!("gcs/{}/{}", enc(entity), enc(attr)))
    }

    pub fn store(store: &str) -> NodeId {
        make(format!("store/{}", enc(store)))
    }

    pub fn machine(machine: &str) -> NodeId {
        make(format!("machine/{}", enc(machine)))
    }

    pub fn database(store: &str, db: &str) -> NodeId {
        make(format!("store/{}/db/{}", enc(store), enc(db)))
    }

    pub fn database_schema(store: &str, db: &str, schema: &str) -> NodeId {
        make(format!("store/{}/db/{}/schema/{}", enc(store), enc(db), enc(schema)))
    }

    pub fn lcs_dataset(store: &str, dataset: &str) -> NodeId {
        make(format!("store/{}/dataset/{}", enc(store), enc(dataset)))
    }

    pub fn lcs_attribute(store: &str, dataset: &str, attr: &str) -> NodeId {
        make(format!("store/{}/dataset/{}/attr/{}", enc(store), enc(dataset), enc(attr)))
    }

    /// Workflows live directly under the prefix, as in `hk://id/<workflow>`.
    pub fn workflow(workflow: &str) -> NodeId {
        make(enc(workflow))
    }

    pub fn transformation(workflow: &str, transformation: &str) -> NodeId {
        make(format!("workflow/{}/transformation/{}", enc(workflow), enc(transformation)))
    }

    pub fn execution(seq: u64) -> NodeId {
        make(format!("wfe/{seq:010}"))
    }

    pub fn transformation_execution(execution: &NodeId, seq: usize) -> NodeId {
        NodeId::new(format!("{execution}/dte/{seq:04}")).expect("derived from a valid id")
    }

    pub fn attribute_value(dte: &NodeId, seq: usize) -> NodeId {
        NodeId::new(format!("{dte}/atv/{seq:04}")).expect("derived from a valid id")
    }

}
