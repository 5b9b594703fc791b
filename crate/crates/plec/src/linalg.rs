//! Exact sparse linear algebra over the rationals.
//!
//! Elimination is fraction-free in the style of Bareiss: rows are scaled to
//! integers once, every update is `(pivot * row - lead * pivot_row) /
//! previous_pivot`, and the division is exact.  Pivoting is by position
//! (first remaining row with a nonzero entry in the current column), which
//! makes every derived quantity deterministic.
//!
//! On top of the solver the module provides boundary matrices, Hodge
//! Laplacians, Betti numbers via exact rank, cycle space bases, and the
//! minimum-norm preimage of the boundary operator used by the harmonic
//! extension step.

use std::collections::BTreeMap;

use num::{BigInt, BigRational, Integer, One, Zero};
use thiserror::Error;

use crate::chain::{CellWeights, ChainError, RationalChain};
use crate::complex::CellComplex;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("matrix shapes are incompatible ({0}x{1} vs {2}x{3})")]
    ShapeMismatch(usize, usize, usize, usize),
    #[error("chain is not closed, so it has no harmonic extension")]
    NotClosed,
    #[error("chain is closed but not exact, so it has no harmonic extension")]
    NotExact,
    #[error("no cells of dimension {0} above the chain; extension impossible")]
    NoRoom(usize),
    #[error(transparent)]
    Chain(#[from] ChainError),
}

/// Sparse rational matrix stored row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseRationalMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BTreeMap<usize, BigRational>>,
}

impl SparseRationalMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        SparseRationalMatrix {
            rows,
            cols,
            data: vec![BTreeMap::new(); rows],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn set(&mut self, i: usize, j: usize, value: BigRational) {
        assert!(i < self.rows && j < self.cols);
        if value.is_zero() {
            self.data[i].remove(&j);
        } else {
            self.data[i].insert(j, value);
        }
    }

    pub fn get(&self, i: usize, j: usize) -> BigRational {
        self.data[i]
            .get(&j)
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn add_to(&mut self, i: usize, j: usize, value: &BigRational) {
        let current = self.get(i, j);
        self.set(i, j, current + value);
    }

    pub fn row(&self, i: usize) -> &BTreeMap<usize, BigRational> {
        &self.data[i]
    }

    pub fn transpose(&self) -> SparseRationalMatrix {
        let mut out = SparseRationalMatrix::zero(self.cols, self.rows);
        for (i, row) in self.data.iter().enumerate() {
            for (&j, v) in row {
                out.data[j].insert(i, v.clone());
            }
        }
        out
    }

    pub fn matmul(&self, other: &SparseRationalMatrix) -> Result<SparseRationalMatrix, LinalgError> {
        if self.cols != other.rows {
            return Err(LinalgError::ShapeMismatch(
                self.rows, self.cols, other.rows, other.cols,
            ));
        }
        let mut out = SparseRationalMatrix::zero(self.rows, other.cols);
        for (i, row) in self.data.iter().enumerate() {
            let mut acc: BTreeMap<usize, BigRational> = BTreeMap::new();
            for (&k, v) in row {
                for (&j, w) in &other.data[k] {
                    let entry = acc.entry(j).or_insert_with(BigRational::zero);
                    *entry += v * w;
                }
            }
            acc.retain(|_, v| !v.is_zero());
            out.data[i] = acc;
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[BigRational]) -> Result<Vec<BigRational>, LinalgError> {
        if v.len() != self.cols {
            return Err(LinalgError::ShapeMismatch(self.rows, self.cols, v.len(), 1));
        }
        let mut out = vec![BigRational::zero(); self.rows];
        for (i, row) in self.data.iter().enumerate() {
            for (&j, value) in row {
                out[i] += value * &v[j];
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &SparseRationalMatrix) -> Result<SparseRationalMatrix, LinalgError> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(LinalgError::ShapeMismatch(
                self.rows, self.cols, other.rows, other.cols,
            ));
        }
        let mut out = self.clone();
        for (i, row) in other.data.iter().enumerate() {
            for (&j, v) in row {
                out.add_to(i, j, v);
            }
        }
        Ok(out)
    }

    pub fn scale_columns(&self, factors: &[BigRational]) -> SparseRationalMatrix {
        assert_eq!(factors.len(), self.cols);
        let mut out = SparseRationalMatrix::zero(self.rows, self.cols);
        for (i, row) in self.data.iter().enumerate() {
            for (&j, v) in row {
                let value = v * &factors[j];
                if !value.is_zero() {
                    out.data[i].insert(j, value);
                }
            }
        }
        out
    }

    pub fn is_symmetric(&self) -> bool {
        for (i, row) in self.data.iter().enumerate() {
            for (&j, v) in row {
                if self.get(j, i) != *v {
                    return false;
                }
            }
        }
        true
    }

    fn integer_rows(&self, rhs: Option<&[BigRational]>) -> Vec<BTreeMap<usize, BigInt>> {
        // Scales each row (and its right-hand side entry, stored at column
        // `cols`) by the lcm of the denominators involved.
        let mut out = Vec::with_capacity(self.rows);
        for (i, row) in self.data.iter().enumerate() {
            let mut scale = BigInt::one();
            for v in row.values() {
                scale = scale.lcm(v.denom());
            }
            if let Some(rhs) = rhs {
                scale = scale.lcm(rhs[i].denom());
            }
            let mut int_row: BTreeMap<usize, BigInt> = BTreeMap::new();
            for (&j, v) in row {
                let scaled = v * BigRational::from_integer(scale.clone());
                debug_assert!(scaled.denom().is_one());
                int_row.insert(j, scaled.to_integer());
            }
            if let Some(rhs) = rhs {
                let scaled = &rhs[i] * BigRational::from_integer(scale.clone());
                debug_assert!(scaled.denom().is_one());
                if !scaled.numer().is_zero() {
                    int_row.insert(self.cols, scaled.to_integer());
                }
            }
            out.push(int_row);
        }
        out
    }

    pub fn rank(&self) -> usize {
        let rows = self.integer_rows(None);
        echelon(rows, self.cols).pivots.len()
    }

    /// One exact solution of `self * x = rhs`, or `None` when the system is
    /// inconsistent.  Free variables are set to zero, so the result is
    /// deterministic.
    pub fn solve(&self, rhs: &[BigRational]) -> Option<Vec<BigRational>> {
        assert_eq!(rhs.len(), self.rows);
        let rows = self.integer_rows(Some(rhs));
        let ech = echelon(rows, self.cols);
        // Inconsistency: a pivot in the artificial right-hand-side column.
        if ech.pivots.iter().any(|&(_, col)| col == self.cols) {
            return None;
        }
        let mut x = vec![BigRational::zero(); self.cols];
        for &(row, col) in ech.pivots.iter().rev() {
            let r = &ech.rows[row];
            let mut acc = r
                .get(&self.cols)
                .map(|v| BigRational::from_integer(v.clone()))
                .unwrap_or_else(BigRational::zero);
            for (&j, v) in r.range(col + 1..self.cols) {
                acc -= BigRational::from_integer(v.clone()) * &x[j];
            }
            x[col] = acc / BigRational::from_integer(r[&col].clone());
        }
        Some(x)
    }

    /// Deterministic basis of the right nullspace.
    pub fn nullspace(&self) -> Vec<Vec<BigRational>> {
        let rows = self.integer_rows(None);
        let ech = echelon(rows, self.cols);
        let pivot_cols: Vec<usize> = ech.pivots.iter().map(|&(_, c)| c).collect();
        let mut basis = Vec::new();
        for free in 0..self.cols {
            if pivot_cols.contains(&free) {
                continue;
            }
            let mut x = vec![BigRational::zero(); self.cols];
            x[free] = BigRational::one();
            for &(row, col) in ech.pivots.iter().rev() {
                let r = &ech.rows[row];
                let mut acc = BigRational::zero();
                for (&j, v) in r.range(col + 1..self.cols) {
                    acc -= BigRational::from_integer(v.clone()) * &x[j];
                }
                x[col] = acc / BigRational::from_integer(r[&col].clone());
            }
            basis.push(x);
        }
        basis
    }
}

struct Echelon {
    rows: Vec<BTreeMap<usize, BigInt>>,
    /// (row index in `rows`, pivot column), in elimination order.
    pivots: Vec<(usize, usize)>,
}

/// Fraction-free row echelon form.  `width` is the number of genuine
/// columns; an extra augmented column may be present beyond it.
fn echelon(mut rows: Vec<BTreeMap<usize, BigInt>>, width: usize) -> Echelon {
    let ncols = width + 1; // allow for the augmented column
    let mut prev_pivot = BigInt::one();
    let mut rank = 0usize;
    let mut pivots = Vec::new();
    for col in 0..ncols {
        let pivot_row = (rank..rows.len()).find(|&r| {
            rows[r]
                .get(&col)
                .map(|v| !v.is_zero())
                .unwrap_or(false)
        });
        let Some(pivot_row) = pivot_row else {
            continue;
        };
        rows.swap(rank, pivot_row);
        let pivot_val = rows[rank][&col].clone();
        for r in rank + 1..rows.len() {
            let lead = match rows[r].get(&col) {
                Some(v) => v.clone(),
                None => {
                    // Still rescale to keep the fraction-free invariant:
                    // entry' = entry * pivot / prev_pivot.
                    let row = std::mem::take(&mut rows[r]);
                    rows[r] = row
                        .into_iter()
                        .map(|(j, v)| {
                            let num = v * &pivot_val;
                            debug_assert!((&num % &prev_pivot).is_zero());
                            (j, num / &prev_pivot)
                        })
                        .collect();
                    continue;
                }
            };
            let pivot_row_data: Vec<(usize, BigInt)> = rows[rank]
                .range(col..)
                .map(|(&j, v)| (j, v.clone()))
                .collect();
            let mut new_row: BTreeMap<usize, BigInt> = BTreeMap::new();
            // Entries strictly left of `col` are already zero in both rows.
            let old_row = std::mem::take(&mut rows[r]);
            for (j, v) in old_row.range(col + 1..).map(|(&j, v)| (j, v.clone())) {
                new_row.insert(j, v * &pivot_val);
            }
            for (j, v) in pivot_row_data {
                if j == col {
                    continue;
                }
                let entry = new_row.entry(j).or_insert_with(BigInt::zero);
                *entry -= v * &lead;
                if entry.is_zero() {
                    new_row.remove(&j);
                }
            }
            for v in new_row.values_mut() {
                debug_assert!((&*v % &prev_pivot).is_zero());
                *v = &*v / &prev_pivot;
            }
            rows[r] = new_row;
        }
        prev_pivot = pivot_val;
        pivots.push((rank, col));
        rank += 1;
    }
    Echelon { rows, pivots }
}

/// Matrix of the boundary operator from `k`-chains to `(k-1)`-chains, rows
/// and columns indexed by the position of each cell in
/// `cells_of_dim(k - 1)` and `cells_of_dim(k)`.
pub fn boundary_matrix(complex: &CellComplex, k: usize) -> SparseRationalMatrix {
    assert!(k >= 1, "boundary matrix needs k >= 1");
    let rows_cells = complex.cells_of_dim(k - 1);
    let cols_cells = complex.cells_of_dim(k);
    let row_index: BTreeMap<usize, usize> = rows_cells
        .iter()
        .enumerate()
        .map(|(i, &c)| (c, i))
        .collect();
    let mut m = SparseRationalMatrix::zero(rows_cells.len(), cols_cells.len());
    for (j, &cell) in cols_cells.iter().enumerate() {
        for &(face, sign) in complex.faces(cell) {
            m.set(
                row_index[&face],
                j,
                BigRational::from_integer(sign.into()),
            );
        }
    }
    m
}

pub fn chain_to_vec(complex: &CellComplex, chain: &RationalChain) -> Vec<BigRational> {
    let cells = complex.cells_of_dim(chain.dim());
    let index: BTreeMap<usize, usize> = cells.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let mut v = vec![BigRational::zero(); cells.len()];
    for (cell, value) in chain.iter() {
        v[index[&cell]] = value.clone();
    }
    v
}

pub fn vec_to_chain(
    complex: &CellComplex,
    dim: usize,
    v: &[BigRational],
) -> Result<RationalChain, ChainError> {
    let cells = complex.cells_of_dim(dim);
    assert_eq!(cells.len(), v.len());
    let coeffs = cells
        .iter()
        .zip(v.iter())
        .filter(|(_, value)| !value.is_zero())
        .map(|(&c, value)| (c, value.clone()))
        .collect();
    RationalChain::new(complex, dim, coeffs)
}

/// Hodge Laplacian on `k`-chains for the (optionally weighted) cellwise
/// inner product.  Without weights the matrix is symmetric; with weights it
/// is self-adjoint for the deformed product instead.
pub fn laplacian_matrix(
    complex: &CellComplex,
    k: usize,
    weights: Option<&CellWeights>,
) -> SparseRationalMatrix {
    let n_k = complex.cells_of_dim(k).len();
    let mut total = SparseRationalMatrix::zero(n_k, n_k);

    let weight_vec = |dim: usize| -> Vec<BigRational> {
        complex
            .cells_of_dim(dim)
            .iter()
            .map(|&c| {
                weights
                    .map(|w| w.weight(c))
                    .unwrap_or_else(BigRational::one)
            })
            .collect()
    };

    if k >= 1 {
        // Down-up term: d* d with d: C_k -> C_{k-1}.
        let b = boundary_matrix(complex, k);
        let bt = b.transpose();
        let term = if weights.is_some() {
            let wk = weight_vec(k);
            let wk1 = weight_vec(k - 1);
            let inv_wk: Vec<BigRational> = wk.iter().map(|w| BigRational::one() / w).collect();
            // d* = W_k^{-1} B^T W_{k-1}
            let adj = bt.scale_columns(&wk1);
            let adj = diag_scale_rows(&adj, &inv_wk);
            adj.matmul(&b).unwrap()
        } else {
            bt.matmul(&b).unwrap()
        };
        total = total.add(&term).unwrap();
    }
    if k < complex.top_dim() {
        // Up-down term: d d* with d: C_{k+1} -> C_k.
        let b = boundary_matrix(complex, k + 1);
        let bt = b.transpose();
        let term = if weights.is_some() {
            let wk = weight_vec(k);
            let wk1 = weight_vec(k + 1);
            let inv_wk1: Vec<BigRational> =
                wk1.iter().map(|w| BigRational::one() / w).collect();
            let adj = bt.scale_columns(&wk);
            let adj = diag_scale_rows(&adj, &inv_wk1);
            b.matmul(&adj).unwrap()
        } else {
            b.matmul(&bt).unwrap()
        };
        total = total.add(&term).unwrap();
    }
    total
}

fn diag_scale_rows(m: &SparseRationalMatrix, factors: &[BigRational]) -> SparseRationalMatrix {
    assert_eq!(factors.len(), m.rows());
    let mut out = SparseRationalMatrix::zero(m.rows(), m.cols());
    for i in 0..m.rows() {
        for (&j, v) in m.row(i) {
            out.set(i, j, v * &factors[i]);
        }
    }
    out
}

/// `k`-th rational Betti number as the kernel dimension of the Hodge
/// Laplacian, computed by exact rank.
pub fn betti(complex: &CellComplex, k: usize) -> usize {
    let n_k = complex.cells_of_dim(k).len();
    if n_k == 0 {
        return 0;
    }
    n_k - laplacian_matrix(complex, k, None).rank()
}

pub fn betti_vector(complex: &CellComplex) -> Vec<usize> {
    (0..=complex.top_dim()).map(|k| betti(complex, k)).collect()
}

/// Deterministic basis of the space of closed `k`-chains.
pub fn cycle_basis(complex: &CellComplex, k: usize) -> Vec<RationalChain> {
    if k == 0 {
        return complex
            .cells_of_dim(0)
            .iter()
            .map(|&c| RationalChain::from_cell(complex, c).unwrap())
            .collect();
    }
    boundary_matrix(complex, k)
        .nullspace()
        .into_iter()
        .map(|v| vec_to_chain(complex, k, &v).unwrap())
        .collect()
}

/// Minimum-norm solution of `boundary x = a`, i.e. the harmonic extension
/// of a closed exact chain one dimension up.
///
/// The minimiser of the (optionally deformed) norm among all preimages is
/// unique and orthogonal to every cycle; it is found by solving the normal
/// equations `B W^{-1} B^T y = a` and setting `x = W^{-1} B^T y`, which
/// never inverts a Laplacian and therefore also works when the extension
/// dimension carries kernel.
pub fn harmonic_extension(
    complex: &CellComplex,
    a: &RationalChain,
    weights: Option<&CellWeights>,
) -> Result<RationalChain, LinalgError> {
    let k = a.dim();
    if k + 1 > complex.top_dim() {
        return Err(LinalgError::NoRoom(k + 1));
    }
    if !complex.is_cycle(a)? {
        return Err(LinalgError::NotClosed);
    }
    let b = boundary_matrix(complex, k + 1);
    let bt = b.transpose();
    let bt = match weights {
        None => bt,
        Some(w) => {
            let inv: Vec<BigRational> = complex
                .cells_of_dim(k + 1)
                .iter()
                .map(|&c| BigRational::one() / w.weight(c))
                .collect();
            diag_scale_rows(&bt, &inv)
        }
    };
    let normal = b.matmul(&bt)?;
    let rhs = chain_to_vec(complex, a);
    let y = normal.solve(&rhs).ok_or(LinalgError::NotExact)?;
    let x = bt.mul_vec(&y)?;
    Ok(vec_to_chain(complex, k + 1, &x)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{assign_incidence_signs, GradedPoset};

    fn rational(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn triangle_circle() -> CellComplex {
        let poset = GradedPoset::new(
            vec![0, 0, 0, 1, 1, 1],
            vec![(0, 3), (1, 3), (0, 4), (2, 4), (1, 5), (2, 5)],
        );
        assign_incidence_signs(&poset).unwrap()
    }

    fn square_circle() -> CellComplex {
        // Vertices A=0, B=1, C=2, D=3; edges AB=4, AD=5, BC=6, CD=7.
        let poset = GradedPoset::new(
            vec![0, 0, 0, 0, 1, 1, 1, 1],
            vec![
                (0, 4),
                (1, 4),
                (0, 5),
                (3, 5),
                (1, 6),
                (2, 6),
                (2, 7),
                (3, 7),
            ],
        );
        assign_incidence_signs(&poset).unwrap()
    }

    fn tetra_sphere() -> CellComplex {
        let vertices = 4usize;
        let edges: Vec<(usize, usize)> =
            vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
        let tris: Vec<[usize; 3]> = vec![[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]];
        let mut dims = vec![0; vertices];
        dims.extend(vec![1; edges.len()]);
        dims.extend(vec![2; tris.len()]);
        let mut covers = Vec::new();
        for (i, &(a, b)) in edges.iter().enumerate() {
            covers.push((a, vertices + i));
            covers.push((b, vertices + i));
        }
        for (i, t) in tris.iter().enumerate() {
            let tid = vertices + edges.len() + i;
            for (j, &(a, b)) in edges.iter().enumerate() {
                if t.contains(&a) && t.contains(&b) {
                    covers.push((vertices + j, tid));
                }
            }
        }
        assign_incidence_signs(&GradedPoset::new(dims, covers)).unwrap()
    }

    #[test]
    fn triangle_vertex_laplacian_is_graph_laplacian() {
        let c = triangle_circle();
        let l = laplacian_matrix(&c, 0, None);
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { rational(2, 1) } else { rational(-1, 1) };
                assert_eq!(l.get(i, j), expect);
            }
        }
        assert!(l.is_symmetric());
    }

    #[test]
    fn betti_numbers_of_circle_and_sphere() {
        assert_eq!(betti_vector(&triangle_circle()), vec![1, 1]);
        assert_eq!(betti_vector(&square_circle()), vec![1, 1]);
        assert_eq!(betti_vector(&tetra_sphere()), vec![1, 0, 1]);
    }

    #[test]
    fn betti_of_wedge_defect_still_computes() {
        // Two triangles sharing one vertex: fails the link checks but rank
        // computations go through and give the wedge homology.
        let poset = GradedPoset::new(
            vec![0, 0, 0, 0, 0, 1, 1, 1, 1, 1, 1],
            vec![
                (0, 5),
                (1, 5),
                (1, 6),
                (2, 6),
                (0, 7),
                (2, 7),
                (0, 8),
                (3, 8),
                (3, 9),
                (4, 9),
                (0, 10),
                (4, 10),
            ],
        );
        let c = assign_incidence_signs(&poset).unwrap();
        assert_eq!(betti(&c, 0), 1);
        assert_eq!(betti(&c, 1), 2);
    }

    #[test]
    fn harmonic_extension_on_triangle_circle() {
        let c = triangle_circle();
        // a = B - A; edges: 3 = A->B, 4 = A->C, 5 = B->C.
        let a = RationalChain::new(
            &c,
            0,
            [(0, rational(-1, 1)), (1, rational(1, 1))].into(),
        )
        .unwrap();
        let x = harmonic_extension(&c, &a, None).unwrap();
        assert_eq!(x.coeff(3), rational(2, 3));
        assert_eq!(x.coeff(4), rational(1, 3));
        assert_eq!(x.coeff(5), rational(-1, 3));
        assert_eq!(c.boundary(&x).unwrap(), a);
    }

    #[test]
    fn harmonic_extension_on_square_circle() {
        let c = square_circle();
        // a = C - A; the minimum-norm preimage splits evenly between the
        // two arcs from A to C.
        let a = RationalChain::new(
            &c,
            0,
            [(0, rational(-1, 1)), (2, rational(1, 1))].into(),
        )
        .unwrap();
        let x = harmonic_extension(&c, &a, None).unwrap();
        // Edge ids: AB=4, AD=5, BC=6, CD=7 pointing to the larger vertex.
        assert_eq!(x.coeff(4), rational(1, 2));
        assert_eq!(x.coeff(6), rational(1, 2));
        assert_eq!(x.coeff(5), rational(1, 2));
        assert_eq!(x.coeff(7), rational(-1, 2));
    }

    #[test]
    fn harmonic_extension_rejects_inexact_input() {
        let c = triangle_circle();
        // A single vertex is closed (dimension zero) but not a boundary.
        let a = RationalChain::from_cell(&c, 0).unwrap();
        assert!(matches!(
            harmonic_extension(&c, &a, None),
            Err(LinalgError::NotExact)
        ));
    }

    #[test]
    fn harmonic_extension_at_codimension_one_with_kernel() {
        // On the tetrahedron sphere, extending a 1-cycle boundary into
        // 2-chains: the Laplacian on 2-chains has the fundamental class in
        // its kernel, and the least-norm branch handles it.
        let c = tetra_sphere();
        let tops = c.cells_of_dim(2).to_vec();
        let top_chain = RationalChain::from_cell(&c, tops[0]).unwrap();
        let a = c.boundary(&top_chain).unwrap();
        let x = harmonic_extension(&c, &a, None).unwrap();
        assert_eq!(c.boundary(&x).unwrap(), a);
        // Orthogonal to every 2-cycle.
        for z in cycle_basis(&c, 2) {
            assert_eq!(c.inner(&x, &z, None).unwrap(), rational(0, 1));
        }
    }

    #[test]
    fn weighted_extension_still_inverts_boundary() {
        let c = square_circle();
        let weights = crate::chain::CellWeights::new(
            &c,
            [
                (4, rational(3, 1)),
                (5, rational(1, 2)),
                (6, rational(5, 3)),
                (7, rational(2, 1)),
            ]
            .into(),
        )
        .unwrap();
        let a = RationalChain::new(
            &c,
            0,
            [(0, rational(-1, 1)), (2, rational(1, 1))].into(),
        )
        .unwrap();
        let x = harmonic_extension(&c, &a, Some(&weights)).unwrap();
        assert_eq!(c.boundary(&x).unwrap(), a);
        // Orthogonality holds in the deformed product.
        for z in cycle_basis(&c, 1) {
            assert_eq!(c.inner(&x, &z, Some(&weights)).unwrap(), rational(0, 1));
        }
    }

    #[test]
    fn rank_solve_nullspace_agree() {
        let mut m = SparseRationalMatrix::zero(3, 4);
        m.set(0, 0, rational(2, 1));
        m.set(0, 2, rational(1, 3));
        m.set(1, 1, rational(-1, 2));
        m.set(1, 3, rational(5, 1));
        m.set(2, 0, rational(4, 1));
        m.set(2, 2, rational(2, 3));
        assert_eq!(m.rank(), 2);
        assert_eq!(m.nullspace().len(), 2);
        for v in m.nullspace() {
            let image = m.mul_vec(&v).unwrap();
            assert!(image.iter().all(|x| x.is_zero()));
        }
        let rhs = vec![rational(1, 1), rational(0, 1), rational(2, 1)];
        assert!(m.solve(&rhs).is_some());
        let bad = vec![rational(1, 1), rational(0, 1), rational(3, 1)];
        assert!(m.solve(&bad).is_none());
    }

    #[test]
    fn solve_matches_multiplication() {
        let mut m = SparseRationalMatrix::zero(3, 3);
        m.set(0, 0, rational(1, 1));
        m.set(0, 1, rational(2, 1));
        m.set(1, 1, rational(3, 1));
        m.set(1, 2, rational(-1, 4));
        m.set(2, 0, rational(5, 7));
        m.set(2, 2, rational(1, 1));
        let x_true = vec![rational(3, 2), rational(-2, 3), rational(7, 5)];
        let rhs = m.mul_vec(&x_true).unwrap();
        let x = m.solve(&rhs).unwrap();
        assert_eq!(x, x_true);
    }
}
