//! The seismic interpretation scenario: one global `Seismic` entity whose
//! fragments live in a relational table, a triple store class, a document
//! collection and a file manifest, linked by a four-step ingestion workflow.
//!
//! Everything here is built programmatically; `fixtures/netherlands` holds
//! the same data on disk.

use crate::catalog::{CatalogGraph, NodeId};
use crate::federation::{Adapters, ColumnType, DocumentStore, FileMetaStore, RelationalStore, TripleStore};
use crate::provenance::{AttributeValueRecord, ProvenanceError, TransformationDef, WorkflowDef};
use crate::registry::{AliasMapping, AttributeDef, DataStoreDescriptor, DatasetSchemaDef, RegistryError, StoreKind};
use crate::value::Scalar;

pub const WORKFLOW: &str = "geological_data_ingestion_workflow";

pub const POSTGRES: &str = "PostgreSQL";
pub const ALLEGRO: &str = "AllegroGraph";
pub const MONGO: &str = "MongoDB";
pub const FILES: &str = "FileSystem";

pub const HEADER: &str = "SeismicHeader";
pub const KB: &str = "SeismicCls";
pub const DOCS: &str = "Seismic_data";
pub const TRAINING: &str = "Training File";

pub const QUALITY: &str = "Data quality assessment";
pub const INDEXING: &str = "Geospatial index generation";
pub const EXPERT: &str = "Expert Knowledge Ingestion";
pub const PREPARATION: &str = "Data preparation";

/// The Netherlands query as users write it.
pub const QUERY: &str = "select Seismic.inline, Seismic.crossline,
Seismic.hasWell, Seismic.hasHorizon, Seismic.epsg
where Seismic from geological_data_ingestion_workflow
and Seismic.name = \"Netherlands\"
";

/// The global entity. `well` and `horizon` are also reachable as
/// `hasWell` and `hasHorizon`.
pub fn gcs() -> Vec<DatasetSchemaDef> {
    vec![DatasetSchemaDef::new("Seismic", "URI", ["URI", "name", "inline", "crossline"])
        .with_attribute(AttributeDef::simple("well").also_known_as("hasWell"))
        .with_attribute(AttributeDef::simple("horizon").also_known_as("hasHorizon"))
        .with_attribute(AttributeDef::simple("epsg"))]
}

pub fn lcs() -> Vec<DataStoreDescriptor> {
    vec![
        DataStoreDescriptor::single(
            POSTGRES,
            StoreKind::RelationalDB,
            "db-host",
            "SeismicDB",
            "SeismicSQ",
            vec![DatasetSchemaDef::new(
                HEADER,
                "id",
                ["id", "name", "inline", "crossline", "header_info", "filepath"],
            )],
        ),
        DataStoreDescriptor::single(
            ALLEGRO,
            StoreKind::TripleStore,
            "kb-host",
            "Seismic catalog",
            "Seismic repo",
            vec![DatasetSchemaDef::new(KB, "URI", ["URI", "name", "hasWell", "hasHorizon"])],
        ),
        DataStoreDescriptor::single(
            MONGO,
            StoreKind::DocumentDB,
            "doc-host",
            "Seismicdb",
            "Seismic",
            vec![DatasetSchemaDef::new(DOCS, "identifier", ["identifier", "name", "num_ilines", "num_xlines", "epsg"])],
        ),
        DataStoreDescriptor::single(
            FILES,
            StoreKind::FileSystem,
            "file-host",
            "data",
            "training",
            vec![DatasetSchemaDef::new(TRAINING, "path", ["path", "size"])],
        ),
    ]
}

pub fn aliases() -> Vec<AliasMapping> {
    let a = AliasMapping::new;
    vec![
        a("Seismic.URI", "SeismicHeader.id", POSTGRES),
        a("Seismic.URI", "SeismicCls.URI", ALLEGRO),
        a("Seismic.URI", "Seismic_data.identifier", MONGO),
        a("Seismic.inline", "SeismicHeader.inline", POSTGRES),
        a("Seismic.crossline", "SeismicHeader.crossline", POSTGRES),
        a("Seismic.well", "SeismicCls.hasWell", ALLEGRO),
        a("Seismic.horizon", "SeismicCls.hasHorizon", ALLEGRO),
        a("Seismic.epsg", "Seismic_data.epsg", MONGO),
        a("Seismic.name", "SeismicCls.name", ALLEGRO),
        a("Seismic.name", "SeismicHeader.name", POSTGRES),
    ]
}

pub fn workflow() -> WorkflowDef {
    let t = |name: &str, used: &[&str], generated: &[&str]| TransformationDef {
        name: name.into(),
        used: used.iter().map(|s| (*s).to_owned()).collect(),
        generated: generated.iter().map(|s| (*s).to_owned()).collect(),
    };
    WorkflowDef {
        name: WORKFLOW.into(),
        transformations: vec![
            t(QUALITY, &[], &["SeismicHeader.id"]),
            t(INDEXING, &[], &["Seismic_data.identifier"]),
            t(EXPERT, &[], &["SeismicCls.URI"]),
            t(
                PREPARATION,
                &["SeismicHeader.id", "Seismic_data.identifier", "SeismicCls.URI"],
                &["Training File.path"],
            ),
        ],
    }
}

/// One seismic survey spread over the four stores.
#[derive(Debug, Clone, PartialEq)]
pub struct SeismicRecord {
    pub name: String,
    pub header_id: i64,
    pub uri: String,
    pub document_id: i64,
    pub training_path: String,
    pub inline: i64,
    pub crossline: i64,
    pub well: String,
    pub horizon: String,
    pub epsg: i64,
    pub size: i64,
}

impl SeismicRecord {
    pub fn netherlands() -> Self {
        SeismicRecord {
            name: "Netherlands".into(),
            header_id: 12345,
            uri: "http://oilandgas/Seismic#Netherlands".into(),
            document_id: 1111,
            training_path: "/data/netherlands.train".into(),
            inline: 651,
            crossline: 951,
            well: "http://oilandgas/Well#F02-1".into(),
            horizon: "http://oilandgas/Horizon#North_Sea_Group".into(),
            epsg: 23031,
            size: 16384,
        }
    }

    /// A second survey with no captured provenance.
    pub fn poseidon() -> Self {
        SeismicRecord {
            name: "Poseidon".into(),
            header_id: 12346,
            uri: "http://oilandgas/Seismic#Poseidon".into(),
            document_id: 1112,
            training_path: "/data/poseidon.train".into(),
            inline: 2801,
            crossline: 3201,
            well: "http://oilandgas/Well#Boreas-1".into(),
            horizon: "http://oilandgas/Horizon#Plover".into(),
            epsg: 28352,
            size: 32768,
        }
    }

    /// The row the Netherlands query returns for this record.
    pub fn expected_row(&self) -> Vec<Option<Scalar>> {
        vec![
            Some(self.inline.into()),
            Some(self.crossline.into()),
            Some(self.well.as_str().into()),
            Some(self.horizon.as_str().into()),
            Some(self.epsg.into()),
        ]
    }
}

/// Adapters for the four scenario stores.
#[derive(Debug, Clone)]
pub struct ScenarioStores {
    pub relational: RelationalStore,
    pub triples: TripleStore,
    pub documents: DocumentStore,
    pub files: FileMetaStore,
}

impl Default for ScenarioStores {
    fn default() -> Self {
        Self::new()
    }
}

impl ScenarioStores {
    pub fn new() -> Self {
        let mut relational = RelationalStore::new(POSTGRES);
        relational.create_table(
            HEADER,
            [
                ("id", ColumnType::Int),
                ("name", ColumnType::Str),
                ("inline", ColumnType::Int),
                ("crossline", ColumnType::Int),
                ("header_info", ColumnType::Str),
                ("filepath", ColumnType::Str),
            ],
        );
        let mut triples = TripleStore::new(ALLEGRO);
        triples.declare(KB, ["name", "hasWell", "hasHorizon"]);
        let mut documents = DocumentStore::new(MONGO);
        documents.declare(DOCS, ["identifier", "name", "num_ilines", "num_xlines", "epsg"]);
        let mut files = FileMetaStore::new(FILES);
        files.declare(TRAINING, Vec::<String>::new());
        ScenarioStores { relational, triples, documents, files }
    }

    pub fn insert(&mut self, r: &SeismicRecord) {
        let file = format!("/data/{}.sgy", r.name.to_lowercase());
        self.relational
            .insert(
                HEADER,
                vec![
                    Some(r.header_id.into()),
                    Some(r.name.as_str().into()),
                    Some(r.inline.into()),
                    Some(r.crossline.into()),
                    Some(format!("{} traces", r.inline * r.crossline).into()),
                    Some(file.into()),
                ],
            )
            .expect("row matches the header table");
        self.triples.insert(&r.uri, "a", KB);
        self.triples.insert(&r.uri, "name", r.name.as_str());
        self.triples.insert(&r.uri, "hasWell", r.well.as_str());
        self.triples.insert(&r.uri, "hasHorizon", r.horizon.as_str());
        self.documents.insert(
            DOCS,
            [
                ("identifier", Scalar::Int(r.document_id)),
                ("name", r.name.as_str().into()),
                ("num_ilines", r.inline.into()),
                ("num_xlines", r.crossline.into()),
                ("epsg", r.epsg.into()),
            ],
        );
        self.files.insert(TRAINING, &r.training_path, r.size, [("survey", Scalar::str(&r.name))]);
    }

    pub fn into_adapters(self) -> Adapters {
        Adapters::new()
            .with(self.relational)
            .with(self.triples)
            .with(self.documents)
            .with(self.files)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error(transparent)]
    Registry(#[from] RegistryError),
    #[error(transparent)]
    Provenance(#[from] ProvenanceError),
}

/// Registers the global entity, the four local schemas and the aliases.
pub fn register_schemas(catalog: &mut CatalogGraph) -> Result<(), RegistryError> {
    let mut reg = catalog.registry_mut();
    reg.register_gcs(&gcs())?;
    for d in lcs() {
        reg.register_lcs(&d)?;
    }
    for a in aliases() {
        reg.create_alias(&a)?;
    }
    Ok(())
}

/// Captures one workflow execution whose data references point at `r`.
pub fn capture(catalog: &mut CatalogGraph, r: &SeismicRecord) -> Result<NodeId, ProvenanceError> {
    let mut prov = catalog.provenance_mut();
    let wfe = prov.begin_workflow_execution(WORKFLOW)?;
    let header = || AttributeValueRecord::generated("SeismicHeader.id", r.header_id);
    let document = || AttributeValueRecord::generated("Seismic_data.identifier", r.document_id);
    let kb = || AttributeValueRecord::generated("SeismicCls.URI", r.uri.as_str());
    prov.record_transformation_execution(wfe.as_str(), QUALITY, &[header()])?;
    prov.record_transformation_execution(wfe.as_str(), INDEXING, &[document()])?;
    prov.record_transformation_execution(wfe.as_str(), EXPERT, &[kb()])?;
    let used = |mut v: AttributeValueRecord| {
        v.direction = crate::provenance::Direction::Used;
        v
    };
    prov.record_transformation_execution(
        wfe.as_str(),
        PREPARATION,
        &[
            used(header()),
            used(document()),
            used(kb()),
            AttributeValueRecord::generated("Training File.path", r.training_path.as_str()),
        ],
    )?;
    prov.end_workflow_execution(wfe.as_str())?;
    Ok(wfe)
}

/// The full scenario catalog: schemas, aliases, the workflow and one
/// execution per record in `captured`.
pub fn catalog(captured: &[SeismicRecord]) -> Result<CatalogGraph, ScenarioError> {
    let mut g = CatalogGraph::new();
    register_schemas(&mut g)?;
    g.provenance_mut().register_workflow(&workflow())?;
    for r in captured {
        capture(&mut g, r)?;
    }
    Ok(g)
}

/// Netherlands captured, Poseidon stored but never captured.
pub fn netherlands() -> (CatalogGraph, Adapters) {
    let g = catalog(&[SeismicRecord::netherlands()]).expect("scenario catalog is consistent");
    let mut stores = ScenarioStores::new();
    stores.insert(&SeismicRecord::netherlands());
    stores.insert(&SeismicRecord::poseidon());
    (g, stores.into_adapters())
}
