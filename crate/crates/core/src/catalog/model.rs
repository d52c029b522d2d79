use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Raw catalog document; every expression is kept as text.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CatalogFile {
    #[serde(default)]
    pub schema_version: u32,
    #[serde(default)]
    pub sample_pools: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub families: Vec<FamilySpec>,
    #[serde(default)]
    pub iso_rules: Vec<IsoRule>,
    #[serde(default)]
    pub table1: BTreeMap<String, Vec<Table1Row>>,
    #[serde(default)]
    pub operator_identities: Vec<OperatorIdentity>,
    #[serde(default)]
    pub closure_tables: Vec<ClosureTable>,
    #[serde(default)]
    pub obstructions: Vec<Obstruction>,
    #[serde(default)]
    pub manual_arguments: Vec<ManualArgument>,
    #[serde(default)]
    pub diagrams: Vec<Diagram>,
    #[serde(default)]
    pub witnesses: Vec<Witness>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamSpec {
    pub symbol: String,
    pub display: String,
    #[serde(default)]
    pub excluded: Vec<String>,
    /// Name of a shared pool in `sample_pools`.
    #[serde(default)]
    pub pool: Option<String>,
    /// Explicit grid, overriding any pool.
    #[serde(default)]
    pub samples: Option<Vec<String>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LieSpec {
    pub tag: String,
    #[serde(default)]
    pub lambda: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    pub name: String,
    pub display: String,
    pub letter: String,
    pub params: Vec<ParamSpec>,
    pub lie: LieSpec,
    /// `"ij" -> {"k": coefficient}` with one-based indices.
    pub products: BTreeMap<String, BTreeMap<String, String>>,
}

impl FamilySpec {
    pub fn symbols(&self) -> Vec<&str> {
        self.params.iter().map(|p| p.symbol.as_str()).collect()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IsoRule {
    pub family: String,
    pub relation: String,
    pub target_params: BTreeMap<String, String>,
    /// Columns are the new basis vectors.
    pub matrix: Vec<Vec<String>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Table1Row {
    #[serde(default)]
    pub zero: Vec<String>,
    pub dim: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdentityParam {
    pub symbol: String,
    pub pool: String,
    #[serde(default)]
    pub excluded: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorIdentity {
    pub name: String,
    #[serde(default)]
    pub params: Vec<IdentityParam>,
    pub expr: String,
    /// The certificate is `det T(x) = 0` rather than `T(x) = 0`.
    #[serde(default)]
    pub determinant: bool,
}

/// Selects instances of a family.
///
/// `params` fixes parameter values; `zero` and `nonzero` are conditions in the
/// family's own parameters.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Pattern {
    pub family: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub zero: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub nonzero: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClosureRow {
    pub source: Pattern,
    /// Target `params` are expressions in the source parameters.
    pub targets: Vec<Pattern>,
    #[serde(default)]
    pub note: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClosureTable {
    #[serde(rename = "type")]
    pub type_id: u32,
    pub name: String,
    pub rows: Vec<ClosureRow>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Obstruction {
    pub source: Pattern,
    pub target: Pattern,
    pub kind: String,
    #[serde(default)]
    pub payload: Option<serde_json::Value>,
    /// Conditions on the pair: source symbols lowercase, target symbols uppercase.
    #[serde(default)]
    pub pair_zero: Vec<String>,
    #[serde(default)]
    pub pair_nonzero: Vec<String>,
    pub group: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManualArgument {
    pub source: Pattern,
    pub target: Pattern,
    pub argument: String,
    pub group: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeStyle {
    Solid,
    Dotted,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagramEdge {
    pub from: String,
    pub to: String,
    pub style: EdgeStyle,
    #[serde(default)]
    pub relation: Vec<String>,
    /// The drawn arrow holds only for some of the instances it connects.
    #[serde(default)]
    pub restrictions_omitted: bool,
    /// The drawn arrow is wrong; the text explains why.
    #[serde(default)]
    pub erratum: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Diagram {
    #[serde(rename = "type")]
    pub type_id: u32,
    pub nodes: BTreeMap<String, Pattern>,
    pub edges: Vec<DiagramEdge>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Witness {
    pub id: String,
    #[serde(rename = "type")]
    pub type_id: u32,
    #[serde(default)]
    pub params: Vec<String>,
    #[serde(default)]
    pub nonzero: Vec<String>,
    /// Expressions that must vanish.
    #[serde(default)]
    pub constraints: Vec<String>,
    #[serde(default)]
    pub samples: Option<Vec<BTreeMap<String, String>>>,
    pub source: Pattern,
    pub target: Pattern,
    /// `g_t^{-1}`, row-major; its columns are the new basis.
    pub matrix: Vec<Vec<String>>,
    #[serde(default)]
    pub printed_matrix: Option<Vec<Vec<String>>>,
    #[serde(default)]
    pub note: Option<String>,
}
