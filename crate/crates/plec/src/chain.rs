//! Sparse chains with exact rational coefficients over a [`CellComplex`].
//!
//! A chain stores the token of the complex it belongs to, its dimension and
//! a sorted coefficient map; zero coefficients are never stored, so chain
//! equality is plain structural equality.  Rationals are kept in lowest
//! terms with positive denominators by the underlying [`num`] type.

use std::collections::BTreeMap;
use std::fmt;

use num::{BigRational, Signed, Zero};
use thiserror::Error;

use crate::complex::{CellComplex, CellId};

#[derive(Debug, Error)]
pub enum ChainError {
    #[error("chain belongs to a different complex")]
    ComplexMismatch,
    #[error("chains have different dimensions ({0} and {1})")]
    DimensionMismatch(usize, usize),
    #[error("cell {cell} is not a {dim}-cell of the complex")]
    CellMismatch { cell: CellId, dim: usize },
    #[error("boundary of a 0-chain is undefined")]
    DimensionZero,
    #[error("coboundary of a top-dimensional chain is undefined")]
    DimensionTop,
    #[error("weight for cell {cell} must be a positive rational")]
    BadWeight { cell: CellId },
}

/// Exact rational cellular chain.
#[derive(Clone, PartialEq, Eq)]
pub struct RationalChain {
    token: u64,
    dim: usize,
    coeffs: BTreeMap<CellId, BigRational>,
}

impl fmt::Debug for RationalChain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RationalChain(dim {}, {{", self.dim)?;
        for (i, (cell, coeff)) in self.coeffs.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{cell}: {coeff}")?;
        }
        write!(f, "}})")
    }
}

impl RationalChain {
    pub fn zero(complex: &CellComplex, dim: usize) -> Self {
        RationalChain {
            token: complex.token(),
            dim,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn from_cell(complex: &CellComplex, cell: CellId) -> Result<Self, ChainError> {
        Self::new(
            complex,
            complex.dim_of(cell),
            [(cell, BigRational::from_integer(1.into()))].into(),
        )
    }

    pub fn new(
        complex: &CellComplex,
        dim: usize,
        coeffs: BTreeMap<CellId, BigRational>,
    ) -> Result<Self, ChainError> {
        for (&cell, _) in &coeffs {
            if cell >= complex.len() || complex.dim_of(cell) != dim {
                return Err(ChainError::CellMismatch { cell, dim });
            }
        }
        let coeffs = coeffs.into_iter().filter(|(_, v)| !v.is_zero()).collect();
        Ok(RationalChain {
            token: complex.token(),
            dim,
            coeffs,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn token(&self) -> u64 {
        self.token
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, cell: CellId) -> BigRational {
        self.coeffs.get(&cell).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (CellId, &BigRational)> {
        self.coeffs.iter().map(|(&c, v)| (c, v))
    }

    pub fn support(&self) -> impl Iterator<Item = CellId> + '_ {
        self.coeffs.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn compatible(&self, other: &RationalChain) -> Result<(), ChainError> {
        if self.token != other.token {
            return Err(ChainError::ComplexMismatch);
        }
        if self.dim != other.dim {
            return Err(ChainError::DimensionMismatch(self.dim, other.dim));
        }
        Ok(())
    }

    pub fn add(&self, other: &RationalChain) -> Result<RationalChain, ChainError> {
        self.compatible(other)?;
        let mut coeffs = self.coeffs.clone();
        for (&cell, value) in &other.coeffs {
            let entry = coeffs.entry(cell).or_insert_with(BigRational::zero);
            *entry += value;
            if entry.is_zero() {
                coeffs.remove(&cell);
            }
        }
        Ok(RationalChain {
            token: self.token,
            dim: self.dim,
            coeffs,
        })
    }

    pub fn sub(&self, other: &RationalChain) -> Result<RationalChain, ChainError> {
        self.add(&other.scaled(&BigRational::from_integer((-1).into())))
    }

    pub fn scaled(&self, factor: &BigRational) -> RationalChain {
        if factor.is_zero() {
            return RationalChain {
                token: self.token,
                dim: self.dim,
                coeffs: BTreeMap::new(),
            };
        }
        RationalChain {
            token: self.token,
            dim: self.dim,
            coeffs: self
                .coeffs
                .iter()
                .map(|(&c, v)| (c, v * factor))
                .collect(),
        }
    }

    /// Adds `factor * other` in place semantics, returning the new chain.
    pub fn add_scaled(
        &self,
        factor: &BigRational,
        other: &RationalChain,
    ) -> Result<RationalChain, ChainError> {
        self.add(&other.scaled(factor))
    }
}

/// Optional positive cell weights, one per cell, defining the deformed
/// inner products.  The default (orthonormal cells) is the empty map.
/// Experimental: nothing downstream of the Laplacian kernel dimensions is
/// guaranteed under deformation.
#[derive(Debug, Clone, Default)]
pub struct CellWeights {
    weights: BTreeMap<CellId, BigRational>,
}

impl CellWeights {
    pub fn orthonormal() -> Self {
        CellWeights::default()
    }

    pub fn new(
        complex: &CellComplex,
        weights: BTreeMap<CellId, BigRational>,
    ) -> Result<Self, ChainError> {
        for (&cell, w) in &weights {
            if cell >= complex.len() {
                return Err(ChainError::CellMismatch { cell, dim: 0 });
            }
            if !w.is_positive() {
                return Err(ChainError::BadWeight { cell });
            }
        }
        Ok(CellWeights { weights })
    }

    pub fn weight(&self, cell: CellId) -> BigRational {
        self.weights
            .get(&cell)
            .cloned()
            .unwrap_or_else(|| BigRational::from_integer(1.into()))
    }
}

impl CellComplex {
    fn owns(&self, chain: &RationalChain) -> Result<(), ChainError> {
        if chain.token() != self.token() {
            return Err(ChainError::ComplexMismatch);
        }
        Ok(())
    }

    /// Boundary operator on chains of positive dimension.
    pub fn boundary(&self, chain: &RationalChain) -> Result<RationalChain, ChainError> {
        self.owns(chain)?;
        if chain.dim() == 0 {
            return Err(ChainError::DimensionZero);
        }
        let mut coeffs: BTreeMap<CellId, BigRational> = BTreeMap::new();
        for (cell, value) in chain.iter() {
            for &(face, sign) in self.faces(cell) {
                let entry = coeffs.entry(face).or_insert_with(BigRational::zero);
                *entry += value * BigRational::from_integer(sign.into());
                if entry.is_zero() {
                    coeffs.remove(&face);
                }
            }
        }
        Ok(RationalChain {
            token: chain.token(),
            dim: chain.dim() - 1,
            coeffs,
        })
    }

    /// Adjoint of the boundary operator with respect to the cellwise inner
    /// product given by `weights` (orthonormal when `None`).  Raises
    /// dimension by one; undefined on top-dimensional chains.
    pub fn coboundary(
        &self,
        chain: &RationalChain,
        weights: Option<&CellWeights>,
    ) -> Result<RationalChain, ChainError> {
        self.owns(chain)?;
        if chain.dim() >= self.top_dim() {
            return Err(ChainError::DimensionTop);
        }
        let mut coeffs: BTreeMap<CellId, BigRational> = BTreeMap::new();
        for (cell, value) in chain.iter() {
            let w_cell = weights.map(|w| w.weight(cell));
            for &(cof, sign) in self.cofaces(cell) {
                let mut term = value * BigRational::from_integer(sign.into());
                if let Some(w_cell) = &w_cell {
                    // <d* a, x>_{k+1} = <a, d x>_k forces the weight ratio.
                    let w_cof = weights.unwrap().weight(cof);
                    term = term * w_cell / w_cof;
                }
                let entry = coeffs.entry(cof).or_insert_with(BigRational::zero);
                *entry += term;
                if entry.is_zero() {
                    coeffs.remove(&cof);
                }
            }
        }
        Ok(RationalChain {
            token: chain.token(),
            dim: chain.dim() + 1,
            coeffs,
        })
    }

    /// Inner product of two chains of equal dimension.
    pub fn inner(
        &self,
        a: &RationalChain,
        b: &RationalChain,
        weights: Option<&CellWeights>,
    ) -> Result<BigRational, ChainError> {
        self.owns(a)?;
        a.compatible(b)?;
        let mut total = BigRational::zero();
        for (cell, value) in a.iter() {
            let other = b.coeffs.get(&cell);
            if let Some(other) = other {
                let mut term = value * other;
                if let Some(w) = weights {
                    term *= w.weight(cell);
                }
                total += term;
            }
        }
        Ok(total)
    }

    /// True when the chain is closed; 0-chains are closed by convention.
    pub fn is_cycle(&self, chain: &RationalChain) -> Result<bool, ChainError> {
        if chain.dim() == 0 {
            self.owns(chain)?;
            return Ok(true);
        }
        Ok(self.boundary(chain)?.is_zero())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{assign_incidence_signs, GradedPoset};

    fn triangle_circle() -> CellComplex {
        let poset = GradedPoset::new(
            vec![0, 0, 0, 1, 1, 1],
            vec![(0, 3), (1, 3), (0, 4), (2, 4), (1, 5), (2, 5)],
        );
        assign_incidence_signs(&poset).unwrap()
    }

    fn rational(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn boundary_of_oriented_edge() {
        let c = triangle_circle();
        // Edge 3 joins vertices 0 and 1 and points from 0 to 1.
        let e = RationalChain::from_cell(&c, 3).unwrap();
        let b = c.boundary(&e).unwrap();
        assert_eq!(b.coeff(0), rational(-1, 1));
        assert_eq!(b.coeff(1), rational(1, 1));
    }

    #[test]
    fn coboundary_of_vertex_on_triangle_circle() {
        let c = triangle_circle();
        // Vertex 0 lies on edges 3 (0->1) and 4 (0->2), entering both with
        // sign -1, so its coboundary is -e3 - e4.
        let v = RationalChain::from_cell(&c, 0).unwrap();
        let cb = c.coboundary(&v, None).unwrap();
        assert_eq!(cb.coeff(3), rational(-1, 1));
        assert_eq!(cb.coeff(4), rational(-1, 1));
        assert_eq!(cb.coeff(5), rational(0, 1));
    }

    #[test]
    fn coboundary_is_adjoint_to_boundary() {
        let c = triangle_circle();
        let v = RationalChain::new(
            &c,
            0,
            [(0, rational(2, 3)), (2, rational(-1, 5))].into(),
        )
        .unwrap();
        let e = RationalChain::new(
            &c,
            1,
            [(3, rational(1, 2)), (5, rational(7, 4))].into(),
        )
        .unwrap();
        let lhs = c.inner(&c.coboundary(&v, None).unwrap(), &e, None).unwrap();
        let rhs = c.inner(&v, &c.boundary(&e).unwrap(), None).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn weighted_coboundary_is_adjoint_for_weighted_product() {
        let c = triangle_circle();
        let weights = CellWeights::new(
            &c,
            [
                (0, rational(2, 1)),
                (1, rational(1, 3)),
                (3, rational(5, 2)),
                (5, rational(4, 7)),
            ]
            .into(),
        )
        .unwrap();
        let v = RationalChain::new(
            &c,
            0,
            [(0, rational(1, 1)), (1, rational(-2, 3))].into(),
        )
        .unwrap();
        let e = RationalChain::new(
            &c,
            1,
            [(3, rational(3, 1)), (4, rational(1, 6))].into(),
        )
        .unwrap();
        let lhs = c
            .inner(&c.coboundary(&v, Some(&weights)).unwrap(), &e, Some(&weights))
            .unwrap();
        let rhs = c
            .inner(&v, &c.boundary(&e).unwrap(), Some(&weights))
            .unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn zero_coefficients_are_dropped() {
        let c = triangle_circle();
        let a = RationalChain::new(&c, 1, [(3, rational(1, 2))].into()).unwrap();
        let b = a.scaled(&rational(-1, 1));
        let sum = a.add(&b).unwrap();
        assert!(sum.is_zero());
        assert_eq!(sum.len(), 0);
    }

    #[test]
    fn mismatched_complexes_are_rejected() {
        let c1 = triangle_circle();
        let c2 = triangle_circle();
        let a = RationalChain::from_cell(&c1, 3).unwrap();
        assert!(matches!(
            c2.boundary(&a),
            Err(ChainError::ComplexMismatch)
        ));
    }
}
