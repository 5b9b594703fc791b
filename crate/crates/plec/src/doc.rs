//! JSON documents for bundles, cochains, and cycles.
//!
//! Every rational crosses this boundary as an exact `"p/q"` string with a
//! positive denominator in lowest terms; no floats appear anywhere.
//! Serialization is canonical — entries sorted by simplex, stable field
//! order — so equal inputs always produce byte-identical files, and a
//! content digest of the bundle file binds derived cochain and cycle
//! files to their source.

use std::collections::BTreeMap;

use num::bigint::BigInt;
use num::{BigRational, Zero};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::bundle::{
    BundleError, FiberOrientation, Simplex, SimplicialComplex, TriangulatedBundle, Vertex,
};
use crate::engine::{base_fundamental_cycle, simplicial_cycle_check, EulerCochain, Formula};

#[derive(Debug, Error)]
pub enum DocError {
    #[error("malformed rational {0:?}")]
    BadRational(String),
    #[error("simplex {0:?} is not strictly increasing")]
    NotStrictlyIncreasing(Vec<usize>),
    #[error("simplex {0:?} repeats a vertex")]
    RepeatedVertex(Vec<usize>),
    #[error("{got} orientation entries for {want} simplices")]
    OrientationCount { got: usize, want: usize },
    #[error("orientation signs must be +1 or -1, found {0}")]
    BadOrientation(i32),
    #[error("fiber sign key {0:?} is malformed")]
    BadSignKey(String),
    #[error("entry for simplex {0:?} appears twice")]
    DuplicateSimplex(String),
    #[error("unknown formula {0:?}")]
    BadFormula(String),
    #[error(transparent)]
    Bundle(#[from] BundleError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Formats a rational as `"p/q"`, keeping the denominator even when it
/// is one, e.g. `"-1/2"`, `"0/1"`, `"3/1"`.
pub fn rational_string(value: &BigRational) -> String {
    format!("{}/{}", value.numer(), value.denom())
}

/// Parses a `"p/q"` string; the denominator must be positive.
pub fn parse_rational(text: &str) -> Result<BigRational, DocError> {
    let bad = || DocError::BadRational(text.to_string());
    let (num, den) = text.split_once('/').ok_or_else(bad)?;
    let numer: BigInt = num.parse().map_err(|_| bad())?;
    let denom: BigInt = den.parse().map_err(|_| bad())?;
    if denom <= BigInt::zero() {
        return Err(bad());
    }
    Ok(BigRational::new(numer, denom))
}

/// `"sha256:<hex>"` digest of raw file bytes.
pub fn input_digest(bytes: &[u8]) -> String {
    format!("sha256:{:x}", Sha256::digest(bytes))
}

/// Pretty JSON with a trailing newline; the only serializer used for
/// output files, so equal documents give byte-identical files.
pub fn to_canonical_json<T: Serialize>(value: &T) -> Result<String, DocError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexDocument {
    pub vertices: Vec<String>,
    pub simplices: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orientations: Option<Vec<i32>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectionDocument {
    #[serde(rename = "vertexMap")]
    pub vertex_map: Vec<usize>,
}

/// Fiber orientation over one anchor vertex: top fiber simplices (keyed
/// by their comma-joined ascending vertex ids) mapped to signs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrientationComponent {
    pub anchor: usize,
    pub signs: BTreeMap<String, i32>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BundleDocument {
    pub n: usize,
    pub base: ComplexDocument,
    pub total: ComplexDocument,
    pub projection: ProjectionDocument,
    #[serde(rename = "fiberOrientation")]
    pub fiber_orientation: Vec<OrientationComponent>,
}

fn simplex_key(simplex: &[Vertex]) -> String {
    let parts: Vec<String> = simplex.iter().map(|v| v.to_string()).collect();
    parts.join(",")
}

fn parse_simplex_key(key: &str) -> Result<Simplex, DocError> {
    let bad = || DocError::BadSignKey(key.to_string());
    let simplex: Simplex = key
        .split(',')
        .map(|part| part.parse::<usize>().map_err(|_| bad()))
        .collect::<Result<_, _>>()?;
    ensure_strictly_increasing(&simplex).map_err(|_| bad())?;
    Ok(simplex)
}

fn ensure_strictly_increasing(simplex: &[usize]) -> Result<(), DocError> {
    if simplex.is_empty() || simplex.windows(2).any(|w| w[0] >= w[1]) {
        return Err(DocError::NotStrictlyIncreasing(simplex.to_vec()));
    }
    Ok(())
}

fn ensure_sign(sign: i32) -> Result<(), DocError> {
    if sign == 1 || sign == -1 {
        Ok(())
    } else {
        Err(DocError::BadOrientation(sign))
    }
}

/// Ascending copy of an oriented vertex list plus the sign of the
/// sorting permutation; repeated vertices are rejected.
fn sort_with_parity(simplex: &[usize]) -> Result<(Simplex, i32), DocError> {
    let mut inversions = 0usize;
    for i in 0..simplex.len() {
        for j in i + 1..simplex.len() {
            if simplex[i] == simplex[j] {
                return Err(DocError::RepeatedVertex(simplex.to_vec()));
            }
            if simplex[i] > simplex[j] {
                inversions += 1;
            }
        }
    }
    let mut sorted = simplex.to_vec();
    sorted.sort_unstable();
    Ok((sorted, if inversions % 2 == 0 { 1 } else { -1 }))
}

/// Signs of a coherent orientation for the listed base simplices, or
/// `None` when the base is not a closed orientable manifold (the
/// coherent top chain must be an honest cycle, one sign per listed
/// simplex, all exactly ±1).
fn coherent_base_signs(base: &SimplicialComplex, listed: &[Vec<usize>]) -> Option<Vec<i32>> {
    let fund = base_fundamental_cycle(base).ok()?;
    if fund.len() != listed.len() || !simplicial_cycle_check(&fund) {
        return None;
    }
    let one = BigRational::from_integer(1.into());
    listed
        .iter()
        .map(|simplex| match fund.get(simplex) {
            Some(value) if *value == one => Some(1),
            Some(value) if *value == -one.clone() => Some(-1),
            _ => None,
        })
        .collect()
}

impl BundleDocument {
    pub fn from_bundle(bundle: &TriangulatedBundle) -> Self {
        let labels = |count: usize| (0..count).map(|i| format!("v{i}")).collect();
        let maximal = |complex: &SimplicialComplex| -> Vec<Vec<usize>> {
            complex.maximal().into_iter().cloned().collect()
        };
        let fiber_orientation = bundle
            .orientations()
            .iter()
            .map(|component| OrientationComponent {
                anchor: component.anchor,
                signs: component
                    .signs
                    .iter()
                    .map(|(simplex, &sign)| (simplex_key(simplex), sign))
                    .collect(),
            })
            .collect();
        let base_simplices = maximal(bundle.base());
        let base_orientations = coherent_base_signs(bundle.base(), &base_simplices);
        BundleDocument {
            n: bundle.fiber_dim(),
            base: ComplexDocument {
                vertices: labels(bundle.base().vertex_count()),
                simplices: base_simplices,
                orientations: base_orientations,
            },
            total: ComplexDocument {
                vertices: labels(bundle.total().vertex_count()),
                simplices: maximal(bundle.total()),
                orientations: None,
            },
            projection: ProjectionDocument {
                vertex_map: bundle.vertex_map().to_vec(),
            },
            fiber_orientation,
        }
    }

    pub fn to_bundle(&self) -> Result<TriangulatedBundle, DocError> {
        for simplex in self.base.simplices.iter().chain(&self.total.simplices) {
            ensure_strictly_increasing(simplex)?;
        }
        if let Some(signs) = &self.base.orientations {
            if signs.len() != self.base.simplices.len() {
                return Err(DocError::OrientationCount {
                    got: signs.len(),
                    want: self.base.simplices.len(),
                });
            }
            for &sign in signs {
                ensure_sign(sign)?;
            }
        }
        let base = SimplicialComplex::from_maximal(self.base.vertices.len(), &self.base.simplices)?;
        let total =
            SimplicialComplex::from_maximal(self.total.vertices.len(), &self.total.simplices)?;
        let mut orientations = Vec::new();
        for component in &self.fiber_orientation {
            let mut signs = BTreeMap::new();
            for (key, &sign) in &component.signs {
                ensure_sign(sign)?;
                signs.insert(parse_simplex_key(key)?, sign);
            }
            orientations.push(FiberOrientation {
                anchor: component.anchor,
                signs,
            });
        }
        Ok(TriangulatedBundle::new(
            base,
            total,
            self.projection.vertex_map.clone(),
            self.n,
            orientations,
        )?)
    }
}

/// One simplex with a rational value; the vertex order carries the
/// orientation, and an odd reordering negates the value.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValueEntry {
    pub simplex: Vec<usize>,
    pub value: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CochainMetadata {
    pub formula: String,
    #[serde(rename = "toolVersion")]
    pub tool_version: String,
    #[serde(rename = "inputDigest")]
    pub input_digest: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CochainDocument {
    pub cochain: Vec<ValueEntry>,
    pub metadata: CochainMetadata,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CycleMetadata {
    #[serde(rename = "inputDigest")]
    pub input_digest: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CycleDocument {
    pub cycle: Vec<ValueEntry>,
    pub metadata: CycleMetadata,
}

/// Renders a cochain against the source document, honoring any stated
/// base orientations: a `-1` simplex is listed with its first two
/// vertices swapped and its value negated.  Entries are sorted by
/// ascending simplex ids.
pub fn cochain_document(
    cochain: &EulerCochain,
    source: &BundleDocument,
    tool_version: &str,
    input_digest: &str,
) -> Result<CochainDocument, DocError> {
    let mut stated: BTreeMap<&[usize], i32> = BTreeMap::new();
    if let Some(signs) = &source.base.orientations {
        if signs.len() != source.base.simplices.len() {
            return Err(DocError::OrientationCount {
                got: signs.len(),
                want: source.base.simplices.len(),
            });
        }
        for (simplex, &sign) in source.base.simplices.iter().zip(signs) {
            ensure_sign(sign)?;
            stated.insert(simplex.as_slice(), sign);
        }
    }
    let mut entries = Vec::new();
    for (simplex, value) in &cochain.values {
        let sign = stated.get(simplex.as_slice()).copied().unwrap_or(1);
        let (listed, signed) = if sign == 1 {
            (simplex.clone(), value.clone())
        } else {
            let mut swapped = simplex.clone();
            swapped.swap(0, 1);
            (swapped, -value.clone())
        };
        entries.push(ValueEntry {
            simplex: listed,
            value: rational_string(&signed),
        });
    }
    Ok(CochainDocument {
        cochain: entries,
        metadata: CochainMetadata {
            formula: cochain.formula.to_string(),
            tool_version: tool_version.to_string(),
            input_digest: input_digest.to_string(),
        },
    })
}

/// Normalizes entries to ascending vertex order, adjusting each value by
/// the permutation sign.
pub fn normalize_entries(
    entries: &[ValueEntry],
) -> Result<BTreeMap<Simplex, BigRational>, DocError> {
    let mut out = BTreeMap::new();
    for entry in entries {
        let (sorted, parity) = sort_with_parity(&entry.simplex)?;
        let value = parse_rational(&entry.value)? * BigRational::from_integer(parity.into());
        let key = simplex_key(&sorted);
        if out.insert(sorted, value).is_some() {
            return Err(DocError::DuplicateSimplex(key));
        }
    }
    Ok(out)
}

/// Reads a cochain document back into engine form plus its input digest.
pub fn parse_cochain(doc: &CochainDocument) -> Result<(EulerCochain, String), DocError> {
    let formula: Formula = doc.metadata.formula.parse().map_err(DocError::BadFormula)?;
    let values = normalize_entries(&doc.cochain)?;
    Ok((
        EulerCochain { formula, values },
        doc.metadata.input_digest.clone(),
    ))
}

/// Renders a simplex-keyed cycle, sorted ascending.
pub fn cycle_document(
    values: &BTreeMap<Simplex, BigRational>,
    input_digest: &str,
) -> CycleDocument {
    CycleDocument {
        cycle: values
            .iter()
            .map(|(simplex, value)| ValueEntry {
                simplex: simplex.clone(),
                value: rational_string(value),
            })
            .collect(),
        metadata: CycleMetadata {
            input_digest: input_digest.to_string(),
        },
    }
}

pub fn parse_cycle(
    doc: &CycleDocument,
) -> Result<(BTreeMap<Simplex, BigRational>, String), DocError> {
    let values = normalize_entries(&doc.cycle)?;
    Ok((values, doc.metadata.input_digest.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{euler_cochain_for_bundle, Formula};
    use crate::fixtures::{base_boundary3, base_simplex2, gen_trivial, identity_order};
    use proptest::prelude::*;

    fn ratio(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn rational_strings_keep_unit_denominators() {
        assert_eq!(rational_string(&ratio(0, 1)), "0/1");
        assert_eq!(rational_string(&ratio(3, 1)), "3/1");
        assert_eq!(rational_string(&ratio(-1, 2)), "-1/2");
        assert_eq!(parse_rational("-6/4").unwrap(), ratio(-3, 2));
        for bad in ["1/0", "1/-2", "x/2", "1", "", "1/2/3"] {
            assert!(parse_rational(bad).is_err(), "{bad}");
        }
    }

    proptest! {
        #[test]
        fn rational_round_trip(n in -1000i64..1000, d in 1i64..1000) {
            let value = ratio(n, d);
            prop_assert_eq!(parse_rational(&rational_string(&value)).unwrap(), value);
        }
    }

    #[test]
    fn bundle_documents_round_trip_through_json() {
        let bundle = gen_trivial(base_simplex2(), 3, &identity_order(3)).unwrap();
        let doc = BundleDocument::from_bundle(&bundle);
        let text = to_canonical_json(&doc).unwrap();
        let reread: BundleDocument = serde_json::from_str(&text).unwrap();
        let rebuilt = reread.to_bundle().unwrap();
        assert!(rebuilt.validate().all_passed());
        let before = euler_cochain_for_bundle(&bundle, Formula::Winding, None).unwrap();
        let after = euler_cochain_for_bundle(&rebuilt, Formula::Winding, None).unwrap();
        assert_eq!(before.values, after.values);
        // Canonical serialization is reproducible byte for byte.
        assert_eq!(text, to_canonical_json(&BundleDocument::from_bundle(&rebuilt)).unwrap());
    }

    #[test]
    fn closed_bases_state_a_coherent_orientation() {
        let bundle = gen_trivial(base_boundary3(), 3, &identity_order(3)).unwrap();
        let doc = BundleDocument::from_bundle(&bundle);
        let signs = doc.base.orientations.clone().unwrap();
        assert_eq!(signs.len(), 4);
        let stated: BTreeMap<Simplex, BigRational> = doc
            .base
            .simplices
            .iter()
            .cloned()
            .zip(signs.iter().map(|&s| BigRational::from_integer(s.into())))
            .collect();
        assert!(simplicial_cycle_check(&stated));
        // Disk bases stay unoriented.
        let disk = gen_trivial(base_simplex2(), 3, &identity_order(3)).unwrap();
        assert!(BundleDocument::from_bundle(&disk).base.orientations.is_none());
        // Values listed against the stated orientation sum to the pairing.
        let cochain = euler_cochain_for_bundle(&bundle, Formula::Winding, None).unwrap();
        let rendered = cochain_document(&cochain, &doc, "0.0.0", "sha256:test").unwrap();
        let mut sum = BigRational::zero();
        for entry in &rendered.cochain {
            sum += parse_rational(&entry.value).unwrap();
        }
        let fund = base_fundamental_cycle(bundle.base()).unwrap();
        assert_eq!(sum, crate::engine::pair_cochain_cycle(&cochain, &fund));
    }

    #[test]
    fn stated_orientations_swap_and_negate_entries() {
        let bundle = gen_trivial(base_simplex2(), 3, &identity_order(3)).unwrap();
        let mut doc = BundleDocument::from_bundle(&bundle);
        doc.base.orientations = Some(vec![-1]);
        let cochain = euler_cochain_for_bundle(&bundle, Formula::Winding, None).unwrap();
        let rendered = cochain_document(&cochain, &doc, "0.0.0", "sha256:test").unwrap();
        assert_eq!(rendered.cochain.len(), 1);
        assert_eq!(rendered.cochain[0].simplex, vec![1, 0, 2]);
        let listed = parse_rational(&rendered.cochain[0].value).unwrap();
        assert_eq!(listed, -cochain.values[&vec![0, 1, 2]].clone());
        // Normalization undoes the stated orientation.
        let (parsed, digest) = parse_cochain(&rendered).unwrap();
        assert_eq!(parsed.values, cochain.values);
        assert_eq!(digest, "sha256:test");
    }

    #[test]
    fn duplicate_and_degenerate_entries_are_rejected() {
        let entries = vec![
            ValueEntry {
                simplex: vec![0, 1, 2],
                value: "1/2".to_string(),
            },
            ValueEntry {
                simplex: vec![1, 0, 2],
                value: "1/2".to_string(),
            },
        ];
        assert!(matches!(
            normalize_entries(&entries),
            Err(DocError::DuplicateSimplex(_))
        ));
        let degenerate = vec![ValueEntry {
            simplex: vec![0, 0, 2],
            value: "1/2".to_string(),
        }];
        assert!(matches!(
            normalize_entries(&degenerate),
            Err(DocError::RepeatedVertex(_))
        ));
    }

    #[test]
    fn digests_are_stable_hex_strings() {
        let digest = input_digest(b"bundle bytes");
        assert!(digest.starts_with("sha256:"));
        assert_eq!(digest.len(), "sha256:".len() + 64);
        assert_eq!(digest, input_digest(b"bundle bytes"));
        assert_ne!(digest, input_digest(b"other bytes"));
    }
}
