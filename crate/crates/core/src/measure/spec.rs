use serde::{Deserialize, Serialize};

use super::{canonicalize, Family, IntensityMeasure, SquareLoopFamily};
use crate::error::{Error, Result};
use crate::lattice::Vertex;

/// On-disk measure specification.
///
/// ```json
/// {"dimension": 2,
///  "atoms": [{"offsets": [[0,0],[1,0]], "weight": 1.0}],
///  "families": [{"name": "square_loop", "params": {"max_scale": 8}}],
///  "symmetry_closed": true}
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureSpec {
    pub dimension: usize,
    #[serde(default)]
    pub atoms: Vec<AtomSpec>,
    #[serde(default)]
    pub families: Vec<FamilySpec>,
    #[serde(default)]
    pub symmetry_closed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomSpec {
    pub offsets: Vec<Vec<i64>>,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    pub name: String,
    #[serde(default)]
    pub params: serde_json::Value,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SquareLoopParams {
    max_scale: u32,
}

impl MeasureSpec {
    /// Builds the measure; with `symmetry_closed` set, atoms are closed under
    /// the lattice symmetries.
    pub fn build(&self) -> Result<IntensityMeasure> {
        let d = self.dimension;
        if d < 2 {
            return Err(Error::Spec(format!("dimension must be at least 2, got {d}")));
        }
        let mut atoms = Vec::with_capacity(self.atoms.len());
        for (i, a) in self.atoms.iter().enumerate() {
            let pts = a
                .offsets
                .iter()
                .map(|c| {
                    if c.len() != d {
                        return Err(Error::Spec(format!(
                            "atom {i}: offset {c:?} does not have dimension {d}"
                        )));
                    }
                    Vertex::new(c.clone()).map_err(|e| Error::Spec(format!("atom {i}: {e}")))
                })
                .collect::<Result<Vec<_>>>()?;
            let shape = canonicalize(pts).map_err(|e| Error::Spec(format!("atom {i}: {e}")))?;
            atoms.push((shape, a.weight));
        }
        let mut families = Vec::with_capacity(self.families.len());
        for f in &self.families {
            match f.name.as_str() {
                "square_loop" => {
                    let p: SquareLoopParams = serde_json::from_value(f.params.clone())
                        .map_err(|e| Error::Spec(format!("square_loop params: {e}")))?;
                    let fam = SquareLoopFamily::new(d, p.max_scale)
                        .map_err(|e| Error::Spec(e.to_string()))?;
                    families.push(Family::SquareLoop(fam));
                }
                other => return Err(Error::Spec(format!("unknown family name {other:?}"))),
            }
        }
        let m = IntensityMeasure::new(d, atoms, families).map_err(|e| match e {
            Error::InvalidMeasure(msg) => Error::Spec(msg),
            e => e,
        })?;
        if self.symmetry_closed {
            m.symmetry_closure()
        } else {
            Ok(m)
        }
    }
}
