//! Correspondence maps linking target mesh elements to source mesh
//! elements over the shared region.
//!
//! Wire format: `{"mode":"vertex"|"face","pairs":{"<tgt>":<src>,...}}`,
//! indices zero-based. The map is a partial function; unmapped targets
//! mean "outside the transferred region".

use std::collections::BTreeMap;
use std::path::Path;

use serde::de::{MapAccess, Visitor};
use serde::{Deserialize, Deserializer};

use crate::error::{Error, Result};
use crate::mesh::UvMesh;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorrMode {
    /// target position-vertex index -> source position-vertex index
    Vertex,
    /// target face index -> source face index, corners aligned by order
    Face,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrespondenceMap {
    pub mode: CorrMode,
    pub pairs: BTreeMap<u32, u32>,
}

impl CorrespondenceMap {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Eager index validation against a concrete mesh pair.
    pub fn validate_against(&self, tgt: &UvMesh, src: &UvMesh) -> Result<()> {
        for (&t, &s) in &self.pairs {
            match self.mode {
                CorrMode::Vertex => {
                    check_index("target position", t, tgt.positions.len())?;
                    check_index("source position", s, src.positions.len())?;
                }
                CorrMode::Face => {
                    check_index("target face", t, tgt.faces.len())?;
                    check_index("source face", s, src.faces.len())?;
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let mode = match self.mode {
            CorrMode::Vertex => "vertex",
            CorrMode::Face => "face",
        };
        let pairs: BTreeMap<String, u32> = self
            .pairs
            .iter()
            .map(|(k, v)| (k.to_string(), *v))
            .collect();
        serde_json::json!({ "mode": mode, "pairs": pairs }).to_string()
    }
}

fn check_index(what: &'static str, index: u32, len: usize) -> Result<()> {
    if index as usize >= len {
        return Err(Error::IndexOutOfRange { what, index, len });
    }
    Ok(())
}

// serde_json's map types silently keep the last value for duplicate
// keys, so pairs are collected as a raw entry list and checked here.
struct PairEntries(Vec<(String, u32)>);

impl<'de> Deserialize<'de> for PairEntries {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = PairEntries;
            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("a map of target index to source index")
            }
            fn visit_map<A: MapAccess<'de>>(
                self,
                mut access: A,
            ) -> std::result::Result<Self::Value, A::Error> {
                let mut entries = Vec::new();
                while let Some((k, v)) = access.next_entry::<String, u32>()? {
                    entries.push((k, v));
                }
                Ok(PairEntries(entries))
            }
        }
        d.deserialize_map(V)
    }
}

#[derive(Deserialize)]
struct RawCorr {
    mode: String,
    pairs: PairEntries,
}

pub fn parse_correspondence(text: &str) -> Result<CorrespondenceMap> {
    let raw: RawCorr =
        serde_json::from_str(text).map_err(|e| Error::CorrSchema(e.to_string()))?;
    let mode = match raw.mode.as_str() {
        "vertex" => CorrMode::Vertex,
        "face" => CorrMode::Face,
        other => {
            return Err(Error::CorrSchema(format!(
                "mode must be \"vertex\" or \"face\", got \"{other}\""
            )))
        }
    };
    let mut pairs = BTreeMap::new();
    for (key, value) in raw.pairs.0 {
        let tgt: u32 = key
            .parse()
            .map_err(|_| Error::CorrSchema(format!("non-integer target key \"{key}\"")))?;
        if pairs.insert(tgt, value).is_some() {
            return Err(Error::DuplicateTarget(tgt));
        }
    }
    Ok(CorrespondenceMap { mode, pairs })
}

pub fn load_correspondence(path: impl AsRef<Path>) -> Result<CorrespondenceMap> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_correspondence(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vertex_mode_parses() {
        let m = parse_correspondence(r#"{"mode":"vertex","pairs":{"0":0,"1":1,"2":2}}"#).unwrap();
        assert_eq!(m.mode, CorrMode::Vertex);
        assert_eq!(m.len(), 3);
        assert_eq!(m.pairs[&1], 1);
    }

    #[test]
    fn face_mode_parses() {
        let m = parse_correspondence(r#"{"mode":"face","pairs":{"5":12}}"#).unwrap();
        assert_eq!(m.mode, CorrMode::Face);
        assert_eq!(m.len(), 1);
        assert_eq!(m.pairs[&5], 12);
    }

    #[test]
    fn duplicate_target_rejected() {
        let err =
            parse_correspondence(r#"{"mode":"vertex","pairs":{"0":1,"0":2}}"#).unwrap_err();
        assert!(matches!(err, Error::DuplicateTarget(0)));
    }

    #[test]
    fn bad_mode_rejected() {
        assert!(matches!(
            parse_correspondence(r#"{"mode":"edge","pairs":{}}"#),
            Err(Error::CorrSchema(_))
        ));
    }

    #[test]
    fn serialize_reload_is_identity() {
        let m = parse_correspondence(r#"{"mode":"face","pairs":{"5":12,"2":7}}"#).unwrap();
        let again = parse_correspondence(&m.to_json()).unwrap();
        assert_eq!(m, again);
    }
}
