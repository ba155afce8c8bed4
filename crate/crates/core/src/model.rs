use std::collections::HashSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::value::KgtkValue;

/// The four named KGTK column roles.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Role {
    Node1,
    Label,
    Node2,
    Id,
}

impl Role {
    pub fn column_name(self) -> &'static str {
        match self {
            Role::Node1 => "node1",
            Role::Label => "label",
            Role::Node2 => "node2",
            Role::Id => "id",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.column_name())
    }
}

/// Ordered column names of a KGTK file plus the positions of the role
/// columns, resolved by exact name.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColumnSchema {
    columns: Vec<String>,
    node1: Option<usize>,
    label: Option<usize>,
    node2: Option<usize>,
    id: Option<usize>,
}

impl ColumnSchema {
    /// Any list of unique, non-empty column names. Role columns are optional
    /// here; use [`ColumnSchema::edges`] for files that must be graphs.
    pub fn new<I, S>(columns: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let columns: Vec<String> = columns.into_iter().map(Into::into).collect();
        let mut seen = HashSet::new();
        for c in &columns {
            if c.is_empty() {
                return Err(Error::Schema("empty column name".into()));
            }
            if c.contains(['\t', '\n', '\r']) {
                return Err(Error::Schema(format!("column name {c:?} contains whitespace control characters")));
            }
            if !seen.insert(c.as_str()) {
                return Err(Error::Schema(format!("duplicate column name {c:?}")));
            }
        }
        let find = |name: &str| columns.iter().position(|c| c == name);
        Ok(ColumnSchema {
            node1: find("node1"),
            label: find("label"),
            node2: find("node2"),
            id: find("id"),
            columns,
        })
    }

    /// A schema valid for an edge file: `node1`, `label` and `node2` are all
    /// present, or `node1` alone for a node-list file.
    pub fn edges<I, S>(columns: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let schema = Self::new(columns)?;
        schema.validate_edge_roles()?;
        Ok(schema)
    }

    pub fn validate_edge_roles(&self) -> Result<()> {
        if self.node1.is_none() {
            return Err(Error::Schema(format!(
                "header {:?} has no node1 column",
                self.columns.join("\t")
            )));
        }
        match (self.label, self.node2) {
            (Some(_), Some(_)) | (None, None) => Ok(()),
            (None, _) => Err(Error::Schema("header has node2 but no label column".into())),
            (_, None) => Err(Error::Schema("header has label but no node2 column".into())),
        }
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn role(&self, role: Role) -> Option<usize> {
        match role {
            Role::Node1 => self.node1,
            Role::Label => self.label,
            Role::Node2 => self.node2,
            Role::Id => self.id,
        }
    }

    /// A file that lists nodes only (no label or node2 column).
    pub fn is_node_list(&self) -> bool {
        self.node1.is_some() && self.label.is_none() && self.node2.is_none()
    }

    pub fn header_line(&self) -> String {
        self.columns.join("\t")
    }
}

/// One row of an edge file, one value per schema column.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EdgeRecord {
    pub cells: Vec<KgtkValue>,
}

impl EdgeRecord {
    pub fn new(cells: Vec<KgtkValue>) -> Self {
        EdgeRecord { cells }
    }

    /// Value in a role column, `Empty` when the schema lacks that role.
    pub fn get(&self, schema: &ColumnSchema, role: Role) -> &KgtkValue {
        static EMPTY: KgtkValue = KgtkValue::Empty;
        schema.role(role).map(|i| &self.cells[i]).unwrap_or(&EMPTY)
    }

    pub fn node1<'a>(&'a self, schema: &ColumnSchema) -> &'a KgtkValue {
        self.get(schema, Role::Node1)
    }

    pub fn label<'a>(&'a self, schema: &ColumnSchema) -> &'a KgtkValue {
        self.get(schema, Role::Label)
    }

    pub fn node2<'a>(&'a self, schema: &ColumnSchema) -> &'a KgtkValue {
        self.get(schema, Role::Node2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roles_resolve_by_name() {
        let s = ColumnSchema::edges(["node1", "node2", "node1;label", "label"]).unwrap();
        assert_eq!(s.role(Role::Node1), Some(0));
        assert_eq!(s.role(Role::Node2), Some(1));
        assert_eq!(s.role(Role::Label), Some(3));
        assert_eq!(s.role(Role::Id), None);
    }

    #[test]
    fn edge_roles_are_required() {
        assert!(ColumnSchema::edges(["node1", "label"]).is_err());
        assert!(ColumnSchema::edges(["label", "node2"]).is_err());
        assert!(ColumnSchema::edges(["Node1", "label", "node2"]).is_err());
        assert!(ColumnSchema::edges(["node1"]).unwrap().is_node_list());
        assert!(ColumnSchema::new(["a", "a"]).is_err());
        // result headers need not be edge headers
        assert!(ColumnSchema::new(["node1", "node1;label", "node2"]).is_ok());
    }
}
