//! Orientation transfer between a complex and its order-theoretic dual.
//!
//! The order complex (flag subdivision) of a graded poset does not change
//! when the poset is reversed, so a complex and its dual share a common
//! refinement.  Pushing a fundamental class into that refinement on both
//! sides and comparing the results gives a canonical way to carry an
//! orientation across the duality, without ever embedding anything.

use std::collections::BTreeMap;

use num::{BigRational, One, Signed, Zero};
use thiserror::Error;

use crate::chain::{ChainError, RationalChain};
use crate::complex::{CellComplex, CellId, OrientationClass};

#[derive(Debug, Error)]
pub enum OrientationError {
    #[error("complexes do not share a cell id ground set")]
    GroundSetMismatch,
    #[error("no consistent subdivision signs for cell {0}")]
    SubdivisionFailed(CellId),
    #[error("subdivided fundamental classes are not proportional")]
    NotProportional,
    #[error("chain is not a fundamental class: {0}")]
    NotFundamental(String),
    #[error(transparent)]
    Chain(#[from] ChainError),
}

/// Top-dimensional chain with the given coherent orientation signs.
pub fn fundamental_class(
    complex: &CellComplex,
    orientation: &OrientationClass,
) -> Result<RationalChain, ChainError> {
    let coeffs = complex
        .cells_of_dim(complex.top_dim())
        .iter()
        .map(|&c| (c, BigRational::from_integer(orientation.sign(c).into())))
        .collect();
    RationalChain::new(complex, complex.top_dim(), coeffs)
}

/// Formal linear combination of maximal flags, each flag identified by the
/// sorted ids of its cells.  The sign convention for a flag simplex is the
/// orientation induced by listing its cells in ascending id order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub(crate) struct FlagChain {
    terms: BTreeMap<Vec<CellId>, BigRational>,
}

impl FlagChain {
    fn add_scaled(&mut self, key: Vec<CellId>, value: BigRational) {
        use std::collections::btree_map::Entry;
        match self.terms.entry(key) {
            Entry::Vacant(slot) => {
                if !value.is_zero() {
                    slot.insert(value);
                }
            }
            Entry::Occupied(mut slot) => {
                *slot.get_mut() += value;
                if slot.get().is_zero() {
                    slot.remove();
                }
            }
        }
    }

    fn add_chain_scaled(&mut self, other: &FlagChain, factor: &BigRational) {
        for (key, value) in &other.terms {
            self.add_scaled(key.clone(), value * factor);
        }
    }

    /// The single rational `s` with `self == s * other`, if it exists.
    fn proportionality(&self, other: &FlagChain) -> Option<BigRational> {
        if self.terms.len() != other.terms.len() {
            return None;
        }
        let mut ratio: Option<BigRational> = None;
        for (key, value) in &self.terms {
            let base = other.terms.get(key)?;
            let r = value / base;
            match &ratio {
                None => ratio = Some(r),
                Some(existing) if *existing == r => {}
                Some(_) => return None,
            }
        }
        ratio
    }
}

/// Memoizing builder for flag-subdivision chains of single cells.
pub(crate) struct Subdivider<'a> {
    complex: &'a CellComplex,
    /// Maximal flags per cell, as chains of ids ordered by dimension.
    flags: BTreeMap<CellId, Vec<Vec<CellId>>>,
    chains: BTreeMap<CellId, FlagChain>,
}

impl<'a> Subdivider<'a> {
    pub(crate) fn new(complex: &'a CellComplex) -> Self {
        Subdivider {
            complex,
            flags: BTreeMap::new(),
            chains: BTreeMap::new(),
        }
    }

    fn flags_of(&mut self, cell: CellId) -> Vec<Vec<CellId>> {
        if let Some(found) = self.flags.get(&cell) {
            return found.clone();
        }
        let result = if self.complex.dim_of(cell) == 0 {
            vec![vec![cell]]
        } else {
            let mut out = Vec::new();
            for &(face, _) in self.complex.faces(cell) {
                for mut flag in self.flags_of(face) {
                    flag.push(cell);
                    out.push(flag);
                }
            }
            out
        };
        self.flags.insert(cell, result.clone());
        result
    }

    /// Subdivision chain of one cell: the signed sum of its maximal flags
    /// whose simplicial boundary matches the subdivided cell boundary.
    pub(crate) fn chain_of(&mut self, cell: CellId) -> Result<FlagChain, OrientationError> {
        if let Some(found) = self.chains.get(&cell) {
            return Ok(found.clone());
        }
        let dim = self.complex.dim_of(cell);
        let result = if dim == 0 {
            let mut c = FlagChain::default();
            c.add_scaled(vec![cell], BigRational::one());
            c
        } else {
            let mut target = FlagChain::default();
            for &(face, sign) in self.complex.faces(cell) {
                let sub = self.chain_of(face)?;
                target.add_chain_scaled(&sub, &BigRational::from_integer(sign.into()));
            }
            let flags = self.flags_of(cell);
            self.solve_cell(cell, &flags, &target)?
        };
        self.chains.insert(cell, result.clone());
        Ok(result)
    }

    fn solve_cell(
        &self,
        cell: CellId,
        flags: &[Vec<CellId>],
        target: &FlagChain,
    ) -> Result<FlagChain, OrientationError> {
        use crate::linalg::SparseRationalMatrix;

        // Rows are indexed by every length-(dim) flag key reachable from a
        // boundary term; columns by the maximal flags of the cell.
        let mut row_index: BTreeMap<Vec<CellId>, usize> = BTreeMap::new();
        let mut boundary_terms: Vec<Vec<(usize, i32)>> = Vec::with_capacity(flags.len());
        for flag in flags {
            let mut sorted = flag.clone();
            sorted.sort_unstable();
            let parity = sort_sign(flag);
            let mut terms = Vec::with_capacity(sorted.len());
            for drop in 0..sorted.len() {
                let mut key: Vec<CellId> = sorted.clone();
                key.remove(drop);
                let next = row_index.len();
                let row = *row_index.entry(key).or_insert(next);
                let sign = parity * if drop % 2 == 0 { 1 } else { -1 };
                terms.push((row, sign));
            }
            boundary_terms.push(terms);
        }
        for key in target.terms.keys() {
            if !row_index.contains_key(key) {
                return Err(OrientationError::SubdivisionFailed(cell));
            }
        }
        let mut matrix = SparseRationalMatrix::zero(row_index.len(), flags.len());
        for (col, terms) in boundary_terms.iter().enumerate() {
            for &(row, sign) in terms {
                matrix.add_to(row, col, &BigRational::from_integer(sign.into()));
            }
        }
        let mut rhs = vec![BigRational::zero(); row_index.len()];
        for (key, value) in &target.terms {
            rhs[row_index[key]] = value.clone();
        }
        let solution = matrix
            .solve(&rhs)
            .ok_or(OrientationError::SubdivisionFailed(cell))?;
        let one = BigRational::one();
        if solution.iter().any(|v| v.abs() != one) {
            return Err(OrientationError::SubdivisionFailed(cell));
        }
        let mut out = FlagChain::default();
        for (flag, value) in flags.iter().zip(solution) {
            let mut key = flag.clone();
            key.sort_unstable();
            let parity = BigRational::from_integer(sort_sign(flag).into());
            out.add_scaled(key, value * parity);
        }
        Ok(out)
    }

    /// Subdivision of a whole top-dimensional chain.
    pub(crate) fn chain_subdivision(
        &mut self,
        chain: &RationalChain,
    ) -> Result<FlagChain, OrientationError> {
        let mut out = FlagChain::default();
        for (cell, value) in chain.iter() {
            let sub = self.chain_of(cell)?;
            out.add_chain_scaled(&sub, value);
        }
        Ok(out)
    }
}

/// Sign of the permutation sorting `items` ascending (no repeats).
fn sort_sign(items: &[CellId]) -> i32 {
    let mut sign = 1;
    for i in 0..items.len() {
        for j in i + 1..items.len() {
            if items[i] > items[j] {
                sign = -sign;
            }
        }
    }
    sign
}

/// Carries a fundamental class from `primal` to the id-sharing dual
/// complex: the returned class on `dual` has the same flag subdivision as
/// `fund` does on `primal`.
pub fn transfer_orientation(
    primal: &CellComplex,
    fund: &RationalChain,
    dual: &CellComplex,
) -> Result<RationalChain, OrientationError> {
    if primal.len() != dual.len() {
        return Err(OrientationError::GroundSetMismatch);
    }
    if fund.dim() != primal.top_dim() {
        return Err(OrientationError::NotFundamental(format!(
            "dimension {} instead of {}",
            fund.dim(),
            primal.top_dim()
        )));
    }
    let one = BigRational::one();
    if fund.iter().any(|(_, v)| v.abs() != one) {
        return Err(OrientationError::NotFundamental(
            "coefficients are not unit".into(),
        ));
    }

    let primal_sub = Subdivider::new(primal).chain_subdivision(fund)?;

    let trial_orientation = dual
        .coherent_orientation(None)
        .map_err(|e| OrientationError::NotFundamental(e.to_string()))?;
    let trial = fundamental_class(dual, &trial_orientation)?;
    let dual_sub = Subdivider::new(dual).chain_subdivision(&trial)?;

    let ratio = dual_sub
        .proportionality(&primal_sub)
        .ok_or(OrientationError::NotProportional)?;
    if ratio.abs() != one {
        return Err(OrientationError::NotProportional);
    }
    // dual_sub = ratio * primal_sub, so dividing the trial class by the
    // ratio aligns the subdivisions exactly.
    Ok(trial.scaled(&(BigRational::one() / ratio)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{assign_incidence_signs, reversed_complex, GradedPoset};

    fn triangle_circle() -> CellComplex {
        let poset = GradedPoset::new(
            vec![0, 0, 0, 1, 1, 1],
            vec![(0, 3), (1, 3), (0, 4), (2, 4), (1, 5), (2, 5)],
        );
        assign_incidence_signs(&poset).unwrap()
    }

    fn tetra_sphere() -> CellComplex {
        let edges: Vec<(usize, usize)> =
            vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
        let tris: Vec<[usize; 3]> = vec![[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]];
        let mut dims = vec![0; 4];
        dims.extend(vec![1; edges.len()]);
        dims.extend(vec![2; tris.len()]);
        let mut covers = Vec::new();
        for (i, &(a, b)) in edges.iter().enumerate() {
            covers.push((a, 4 + i));
            covers.push((b, 4 + i));
        }
        for (i, t) in tris.iter().enumerate() {
            let tid = 4 + edges.len() + i;
            for (j, &(a, b)) in edges.iter().enumerate() {
                if t.contains(&a) && t.contains(&b) {
                    covers.push((4 + j, tid));
                }
            }
        }
        assign_incidence_signs(&GradedPoset::new(dims, covers)).unwrap()
    }

    #[test]
    fn edge_subdivision_has_opposite_half_signs() {
        let c = triangle_circle();
        let mut sub = Subdivider::new(&c);
        let chain = sub.chain_of(3).unwrap();
        // Edge 3 runs from vertex 0 to vertex 1; the halves are the flags
        // {0,3} and {1,3}, oriented away from and towards the barycenter.
        let one = BigRational::one();
        assert_eq!(chain.terms[&vec![0, 3]], one);
        assert_eq!(chain.terms[&vec![1, 3]], -one);
    }

    #[test]
    fn circle_transfer_round_trips() {
        let c = triangle_circle();
        let d = reversed_complex(&c).unwrap();
        let orientation = c.coherent_orientation(None).unwrap();
        let fund = fundamental_class(&c, &orientation).unwrap();
        let moved = transfer_orientation(&c, &fund, &d).unwrap();
        assert_eq!(moved.dim(), d.top_dim());
        let one = BigRational::one();
        assert!(moved.iter().all(|(_, v)| v.abs() == one));
        let back = transfer_orientation(&d, &moved, &c).unwrap();
        assert_eq!(back, fund);
    }

    #[test]
    fn sphere_transfer_round_trips_and_respects_negation() {
        let c = tetra_sphere();
        let d = reversed_complex(&c).unwrap();
        let orientation = c.coherent_orientation(None).unwrap();
        let fund = fundamental_class(&c, &orientation).unwrap();
        let moved = transfer_orientation(&c, &fund, &d).unwrap();
        let back = transfer_orientation(&d, &moved, &c).unwrap();
        assert_eq!(back, fund);

        let minus_one = BigRational::from_integer((-1).into());
        let negated = fund.scaled(&minus_one);
        let moved_neg = transfer_orientation(&c, &negated, &d).unwrap();
        assert_eq!(moved_neg, moved.scaled(&minus_one));
    }

    #[test]
    fn non_fundamental_input_is_rejected() {
        let c = triangle_circle();
        let d = reversed_complex(&c).unwrap();
        let half = RationalChain::new(
            &c,
            1,
            [(3, BigRational::new(1.into(), 2.into()))].into(),
        )
        .unwrap();
        assert!(matches!(
            transfer_orientation(&c, &half, &d),
            Err(OrientationError::NotFundamental(_))
        ));
    }
}
