use std::collections::HashSet;
use std::io::Read;
use std::path::Path;

use serde::Deserialize;

use super::{BasicConcept, Role};
use crate::error::{Error, Result};

const DEFAULT_TAXONOMY: &str = include_str!("../../data/taxonomy.csv");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Concept {
    pub id: String,
    pub phrase: String,
}

/// A reference concrete concept with its similar and dissimilar partners.
/// All three share the basic concept and the evaluative attribute.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConceptTriad {
    pub id: String,
    pub basic: BasicConcept,
    pub attribute: String,
    pub reference: Concept,
    pub similar: Concept,
    pub dissimilar: Concept,
}

impl ConceptTriad {
    pub fn concept(&self, role: Role) -> &Concept {
        match role {
            Role::Reference => &self.reference,
            Role::Similar => &self.similar,
            Role::Dissimilar => &self.dissimilar,
        }
    }

    pub fn concepts(&self) -> [(Role, &Concept); 3] {
        [
            (Role::Reference, &self.reference),
            (Role::Similar, &self.similar),
            (Role::Dissimilar, &self.dissimilar),
        ]
    }
}

#[derive(Deserialize)]
struct TriadRecord {
    triad_id: String,
    basic: String,
    attribute: String,
    reference_id: String,
    reference: String,
    similar_id: String,
    similar: String,
    dissimilar_id: String,
    dissimilar: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Taxonomy {
    triads: Vec<ConceptTriad>,
}

impl Taxonomy {
    pub fn new(triads: Vec<ConceptTriad>) -> Result<Self> {
        let mut triad_ids = HashSet::new();
        let mut concept_ids = HashSet::new();
        for t in &triads {
            if !triad_ids.insert(t.id.clone()) {
                return Err(Error::Schema(format!("duplicate triad id {}", t.id)));
            }
            for (_, c) in t.concepts() {
                if c.phrase.trim().is_empty() {
                    return Err(Error::Schema(format!("triad {} has an empty phrase", t.id)));
                }
                if !concept_ids.insert(c.id.clone()) {
                    return Err(Error::Schema(format!(
                        "concept id {} appears more than once in the taxonomy",
                        c.id
                    )));
                }
            }
        }
        Ok(Taxonomy { triads })
    }

    /// The bundled 39-triad taxonomy (three triads per basic concept).
    pub fn shipped() -> Self {
        Self::from_reader(DEFAULT_TAXONOMY.as_bytes()).expect("shipped taxonomy parses")
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_reader(file)
    }

    pub fn from_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let mut triads = Vec::new();
        for rec in rdr.deserialize::<TriadRecord>() {
            let rec = rec.map_err(|e| Error::Schema(format!("taxonomy: {e}")))?;
            triads.push(ConceptTriad {
                id: rec.triad_id,
                basic: rec.basic.parse()?,
                attribute: rec.attribute,
                reference: Concept {
                    id: rec.reference_id,
                    phrase: rec.reference,
                },
                similar: Concept {
                    id: rec.similar_id,
                    phrase: rec.similar,
                },
                dissimilar: Concept {
                    id: rec.dissimilar_id,
                    phrase: rec.dissimilar,
                },
            });
        }
        Self::new(triads)
    }

    pub fn triads(&self) -> &[ConceptTriad] {
        &self.triads
    }

    pub fn len(&self) -> usize {
        self.triads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triads.is_empty()
    }

    pub fn n_concepts(&self) -> usize {
        self.triads.len() * 3
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::tokenize;

    #[test]
    fn shipped_counts() {
        let tax = Taxonomy::shipped();
        assert_eq!(tax.len(), 39);
        assert_eq!(tax.n_concepts(), 117);
        for basic in BasicConcept::ALL {
            let n = tax.triads().iter().filter(|t| t.basic == *basic).count();
            assert_eq!(n, 3, "{basic}");
        }
    }

    #[test]
    fn shipped_partners_replace_the_same_positions() {
        for t in Taxonomy::shipped().triads() {
            let r = tokenize(&t.reference.phrase).unwrap();
            let mut changed = Vec::new();
            for other in [&t.similar, &t.dissimilar] {
                let o = tokenize(&other.phrase).unwrap();
                assert_eq!(r.len(), o.len(), "{}", other.id);
                let pos: Vec<usize> = (0..r.len()).filter(|&i| r[i] != o[i]).collect();
                assert!(!pos.is_empty(), "{}", other.id);
                assert!(pos.iter().all(|&i| !r.contains(&o[i])), "{} reuses a reference word", other.id);
                changed.push(pos);
            }
            assert_eq!(changed[0], changed[1], "{}", t.id);
        }
    }

    #[test]
    fn duplicate_concept_ids_rejected() {
        let csv = "triad_id,basic,attribute,reference_id,reference,similar_id,similar,dissimilar_id,dissimilar\n\
                   t1,evaluation,good,a,x a,b,x b,a,x c\n";
        assert!(matches!(Taxonomy::from_reader(csv.as_bytes()), Err(Error::Schema(_))));
    }
}
