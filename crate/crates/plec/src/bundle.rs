//! Triangulated spherical fiber bundles and their per-face tilings.
//!
//! A bundle is described by simplicial complexes for the total space and
//! the base, a vertex projection under which every total-space simplex
//! maps onto a base simplex, and an orientation of one reference fiber
//! per connected component of the base.
//!
//! The central construction: color every total-space vertex by its base
//! image.  Over a base face `F`, the simplices whose color support is
//! exactly `F` tile a sphere of the fiber dimension; the poset reversal
//! of that tiling is the dual cell complex on which all Euler-cochain
//! computations run.  Nested faces are connected by refinement chain
//! maps whose signs are solved, not guessed, and validated afterwards;
//! the reference-fiber orientation is transported along these maps to a
//! fundamental class on every dual complex.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num::{BigRational, One, Signed, Zero};
use thiserror::Error;

use crate::chain::{ChainError, RationalChain};
use crate::complex::{reversed_complex, CellComplex, CellId, ComplexError, ValidationReport};
use crate::linalg::{betti_vector, SparseRationalMatrix};
use crate::orientation::{transfer_orientation, OrientationError};

pub type Vertex = usize;
/// A simplex as a strictly increasing list of vertex indices.
pub type Simplex = Vec<Vertex>;

#[derive(Debug, Error)]
pub enum BundleError {
    #[error("simplex {0:?} is not a strictly increasing in-range vertex list")]
    MalformedSimplex(String),
    #[error("vertex {0} does not lie in any simplex")]
    UnusedVertex(Vertex),
    #[error("projection table has {got} entries for {want} total vertices")]
    ProjectionLength { got: usize, want: usize },
    #[error("projection sends vertex {vertex} to {image}, outside the base")]
    ProjectionRange { vertex: Vertex, image: Vertex },
    #[error("fiber dimension must be at least 1")]
    FiberDimension,
    #[error("total simplex {0:?} does not project onto a base simplex")]
    NotSimplicial(String),
    #[error("no total simplex covers the base face {0:?}")]
    EmptyTiling(String),
    #[error("face {face:?}: colored vertex {cell} has {count} incident top cells instead of {expect}")]
    LemmaViolation {
        face: String,
        cell: CellId,
        count: usize,
        expect: usize,
    },
    #[error("face {face:?}: two top simplices share the color-{color} trace {trace:?}")]
    InclusionAmbiguous {
        face: String,
        color: Vertex,
        trace: String,
    },
    #[error("face {face:?} has no top simplex with color-{color} trace {trace:?}")]
    InclusionMissing {
        face: String,
        color: Vertex,
        trace: String,
    },
    #[error(
        "refinement {from:?} -> {to:?} stalls on cell {cell}: {detail}; either the \
         bundle is malformed or the trace-extension refinement rule does not apply \
         to this complex"
    )]
    RefinementFailed {
        from: String,
        to: String,
        cell: CellId,
        detail: String,
    },
    #[error("no refinement chain from face {0:?} to face {1:?}")]
    NoRefinementPath(String, String),
    #[error("base component of vertex {0} has no oriented reference fiber")]
    OrientationMissing(Vertex),
    #[error("reference fiber over {anchor}: {detail}")]
    BadFiberOrientation { anchor: Vertex, detail: String },
    #[error("orientation transport is inconsistent at face {0:?}; the bundle is not fiber-orientable as given")]
    NonOrientableTransport(String),
    #[error("chain {0:?} is not a fundamental class on its complex")]
    NotFundamental(String),
    #[error("unknown base face {0:?}")]
    UnknownFace(String),
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error(transparent)]
    Orientation(#[from] OrientationError),
}

fn fmt_simplex(s: &[Vertex]) -> String {
    let parts: Vec<String> = s.iter().map(|v| v.to_string()).collect();
    parts.join(",")
}

/// An abstract simplicial complex, stored as the full set of nonempty
/// simplices (closed under taking faces), each a sorted vertex list.
#[derive(Debug, Clone)]
pub struct SimplicialComplex {
    vertex_count: usize,
    simplices: Vec<Simplex>,
    index: BTreeMap<Simplex, usize>,
}

impl SimplicialComplex {
    pub fn from_maximal(
        vertex_count: usize,
        maximal: &[Simplex],
    ) -> Result<Self, BundleError> {
        let mut set: BTreeSet<Simplex> = BTreeSet::new();
        for simplex in maximal {
            if simplex.is_empty()
                || simplex.windows(2).any(|w| w[0] >= w[1])
                || *simplex.last().unwrap() >= vertex_count
            {
                return Err(BundleError::MalformedSimplex(fmt_simplex(simplex)));
            }
            // Insert the full downward closure.
            let k = simplex.len();
            for mask in 1u32..(1 << k) {
                let sub: Simplex = (0..k)
                    .filter(|i| mask & (1 << i) != 0)
                    .map(|i| simplex[i])
                    .collect();
                set.insert(sub);
            }
        }
        let mut used = vec![false; vertex_count];
        for s in &set {
            for &v in s {
                used[v] = true;
            }
        }
        if let Some(v) = used.iter().position(|&u| !u) {
            return Err(BundleError::UnusedVertex(v));
        }
        let simplices: Vec<Simplex> = set.into_iter().collect();
        let index = simplices
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        Ok(SimplicialComplex {
            vertex_count,
            simplices,
            index,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn simplices(&self) -> &[Simplex] {
        &self.simplices
    }

    pub fn contains(&self, s: &[Vertex]) -> bool {
        self.index.contains_key(s)
    }

    pub fn simplices_of_dim(&self, d: usize) -> impl Iterator<Item = &Simplex> {
        self.simplices.iter().filter(move |s| s.len() == d + 1)
    }

    pub fn dim(&self) -> usize {
        self.simplices.iter().map(|s| s.len() - 1).max().unwrap_or(0)
    }

    /// The cell complex of this simplicial complex, with the canonical
    /// ascending-vertex-order incidence signs.  Cell ids are indices into
    /// [`SimplicialComplex::simplices`].
    pub fn to_cell_complex(&self) -> Result<CellComplex, ComplexError> {
        let dims: Vec<usize> = self.simplices.iter().map(|s| s.len() - 1).collect();
        let mut covers = Vec::new();
        for (id, simplex) in self.simplices.iter().enumerate() {
            if simplex.len() == 1 {
                continue;
            }
            for pos in 0..simplex.len() {
                let mut facet = simplex.clone();
                facet.remove(pos);
                let sign = if pos % 2 == 0 { 1 } else { -1 };
                covers.push((self.index[&facet], id, sign));
            }
        }
        CellComplex::from_signed(dims, covers)
    }

    /// Simplices not properly contained in any other simplex.
    pub fn maximal(&self) -> Vec<&Simplex> {
        self.simplices
            .iter()
            .filter(|s| {
                !self
                    .simplices
                    .iter()
                    .any(|t| t.len() > s.len() && s.iter().all(|v| t.contains(v)))
            })
            .collect()
    }
}

/// Coherent orientation of the fiber over one anchor vertex: one sign per
/// top fiber simplex, relative to the ascending-vertex-order orientation.
#[derive(Debug, Clone)]
pub struct FiberOrientation {
    pub anchor: Vertex,
    pub signs: BTreeMap<Simplex, i32>,
}

#[derive(Debug, Clone)]
pub struct TriangulatedBundle {
    base: SimplicialComplex,
    total: SimplicialComplex,
    vertex_map: Vec<Vertex>,
    fiber_dim: usize,
    orientations: Vec<FiberOrientation>,
}

impl TriangulatedBundle {
    pub fn new(
        base: SimplicialComplex,
        total: SimplicialComplex,
        vertex_map: Vec<Vertex>,
        fiber_dim: usize,
        orientations: Vec<FiberOrientation>,
    ) -> Result<Self, BundleError> {
        if vertex_map.len() != total.vertex_count() {
            return Err(BundleError::ProjectionLength {
                got: vertex_map.len(),
                want: total.vertex_count(),
            });
        }
        if let Some((vertex, &image)) = vertex_map
            .iter()
            .enumerate()
            .find(|(_, &image)| image >= base.vertex_count())
        {
            return Err(BundleError::ProjectionRange { vertex, image });
        }
        if fiber_dim == 0 {
            return Err(BundleError::FiberDimension);
        }
        Ok(TriangulatedBundle {
            base,
            total,
            vertex_map,
            fiber_dim,
            orientations,
        })
    }

    pub fn base(&self) -> &SimplicialComplex {
        &self.base
    }

    pub fn total(&self) -> &SimplicialComplex {
        &self.total
    }

    pub fn vertex_map(&self) -> &[Vertex] {
        &self.vertex_map
    }

    pub fn fiber_dim(&self) -> usize {
        self.fiber_dim
    }

    pub fn orientations(&self) -> &[FiberOrientation] {
        &self.orientations
    }

    /// The bundle with every stored fiber orientation negated.
    pub fn flipped(&self) -> TriangulatedBundle {
        let mut out = self.clone();
        for o in &mut out.orientations {
            for sign in o.signs.values_mut() {
                *sign = -*sign;
            }
        }
        out
    }

    pub fn color(&self, v: Vertex) -> Vertex {
        self.vertex_map[v]
    }

    /// Sorted set of base images of the simplex vertices.
    pub fn support(&self, s: &[Vertex]) -> Simplex {
        let mut colors: Vec<Vertex> = s.iter().map(|&v| self.color(v)).collect();
        colors.sort_unstable();
        colors.dedup();
        colors
    }

    /// Top fiber simplices over a base vertex, in sorted order.
    pub fn fiber_tops(&self, v: Vertex) -> Vec<Simplex> {
        self.total
            .simplices()
            .iter()
            .filter(|s| s.len() == self.fiber_dim + 1 && self.support(s) == [v])
            .cloned()
            .collect()
    }

    /// Structural validation: simplicial-map condition, fiber spheres over
    /// every base vertex, sphere checks for every face tiling and dual,
    /// the colored-vertex count, refinement chain maps, and orientation
    /// transport.  Failures are reported, not raised.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();

        let bad = self
            .total
            .simplices()
            .iter()
            .find(|s| !self.base.contains(&self.support(s)));
        report.push(
            "simplicial-map",
            bad.is_none(),
            bad.map(|s| format!("simplex {:?} projects outside the base", s)),
        );
        if bad.is_some() {
            return report;
        }

        let sphere = |complex: &CellComplex| -> (bool, String) {
            let inner = complex.validate();
            let betti = betti_vector(complex);
            let mut expect = vec![0usize; complex.top_dim() + 1];
            expect[0] = 1;
            expect[complex.top_dim()] = 1;
            let ok = inner.all_passed() && betti == expect;
            let detail = if ok {
                String::new()
            } else if !inner.all_passed() {
                inner.render().replace('\n', "; ")
            } else {
                format!("betti {:?}", betti)
            };
            (ok, detail)
        };

        let mut contexts = BTreeMap::new();
        for face in self.base.simplices() {
            match build_face_context(self, face) {
                Err(e) => {
                    report.push(
                        &format!("tiling[{}]", fmt_simplex(face)),
                        false,
                        Some(e.to_string()),
                    );
                    return report;
                }
                Ok(ctx) => {
                    let (t_ok, t_detail) = sphere(&ctx.tiling);
                    report.push(
                        &format!("tiling[{}]", fmt_simplex(face)),
                        t_ok,
                        (!t_ok).then_some(t_detail),
                    );
                    let (d_ok, d_detail) = sphere(&ctx.dual);
                    report.push(
                        &format!("dual[{}]", fmt_simplex(face)),
                        d_ok,
                        (!d_ok).then_some(d_detail),
                    );
                    contexts.insert(face.clone(), ctx);
                }
            }
        }

        // The colored-vertex count is asserted during construction; surface
        // it as an explicit PASS here for the record.
        report.push("colored-vertex-lemma", true, None);

        match build_refinements(self, &contexts) {
            Err(e) => {
                report.push("refinement-chain-maps", false, Some(e.to_string()));
                return report;
            }
            Ok(steps) => {
                let mut detail = None;
                let mut ok = true;
                'outer: for ((from, to), step) in &steps {
                    let src = &contexts[from];
                    let dst = &contexts[to];
                    if let Err(e) = step.validate(&src.dual, &dst.dual) {
                        ok = false;
                        detail = Some(format!(
                            "{} -> {}: {}",
                            fmt_simplex(from),
                            fmt_simplex(to),
                            e
                        ));
                        break 'outer;
                    }
                }
                report.push("refinement-chain-maps", ok, detail);
                if !ok {
                    return report;
                }

                match orient_family(self, &contexts, &steps) {
                    Err(e) => report.push("orientation-transport", false, Some(e.to_string())),
                    Ok(_) => report.push("orientation-transport", true, None),
                }
            }
        }
        report
    }

    /// Builds every per-face context, refinement map, and transported
    /// fundamental class.  Fails on the first structural violation.
    pub fn contexts(&self) -> Result<BundleContexts<'_>, BundleError> {
        if let Some(s) = self
            .total
            .simplices()
            .iter()
            .find(|s| !self.base.contains(&self.support(s)))
        {
            return Err(BundleError::NotSimplicial(fmt_simplex(s)));
        }
        let mut raw = BTreeMap::new();
        for face in self.base.simplices() {
            raw.insert(face.clone(), build_face_context(self, face)?);
        }
        let steps = build_refinements(self, &raw)?;
        let funds = orient_family(self, &raw, &steps)?;
        let mut contexts = BTreeMap::new();
        for (face, ctx) in raw {
            let fund = funds[&face].clone();
            contexts.insert(
                face,
                FaceContext {
                    face: ctx.face,
                    simplices: ctx.simplices,
                    ids: ctx.ids,
                    tiling: ctx.tiling,
                    dual: ctx.dual,
                    colored: ctx.colored,
                    traces: ctx.traces,
                    fund,
                },
            );
        }
        Ok(BundleContexts {
            bundle: self,
            contexts,
            steps,
        })
    }
}

/// Tiling and dual complex of the part of the bundle over one base face,
/// together with the transported fundamental class of the dual.
#[derive(Debug)]
pub struct FaceContext {
    face: Simplex,
    simplices: Vec<Simplex>,
    ids: BTreeMap<Simplex, CellId>,
    tiling: CellComplex,
    dual: CellComplex,
    /// Dual vertices dual to a top simplex with `fiber_dim + 1` vertices
    /// of a single color, keyed by cell id, value = that color.
    colored: BTreeMap<CellId, Vertex>,
    /// (color, fiber top simplex) -> dual vertex with that trace.
    traces: BTreeMap<(Vertex, Simplex), CellId>,
    fund: RationalChain,
}

impl FaceContext {
    pub fn face(&self) -> &Simplex {
        &self.face
    }

    pub fn tiling(&self) -> &CellComplex {
        &self.tiling
    }

    pub fn dual(&self) -> &CellComplex {
        &self.dual
    }

    /// Fundamental class of the dual complex, oriented by transport from
    /// the bundle's reference fiber.
    pub fn fund(&self) -> &RationalChain {
        &self.fund
    }

    pub fn simplex_of(&self, cell: CellId) -> &Simplex {
        &self.simplices[cell]
    }

    pub fn cell_of(&self, simplex: &[Vertex]) -> Option<CellId> {
        self.ids.get(simplex).copied()
    }

    pub fn vertex_color(&self, cell: CellId) -> Option<Vertex> {
        self.colored.get(&cell).copied()
    }

    /// Dual vertices of one color, each naming a fiber top simplex.
    pub fn colored_vertices(&self, color: Vertex) -> Vec<CellId> {
        self.colored
            .iter()
            .filter(|&(_, &c)| c == color)
            .map(|(&cell, _)| cell)
            .collect()
    }
}

struct RawContext {
    face: Simplex,
    simplices: Vec<Simplex>,
    ids: BTreeMap<Simplex, CellId>,
    tiling: CellComplex,
    dual: CellComplex,
    colored: BTreeMap<CellId, Vertex>,
    traces: BTreeMap<(Vertex, Simplex), CellId>,
}

fn build_face_context(
    bundle: &TriangulatedBundle,
    face: &Simplex,
) -> Result<RawContext, BundleError> {
    let n = bundle.fiber_dim();
    let simplices: Vec<Simplex> = bundle
        .total
        .simplices()
        .iter()
        .filter(|s| bundle.support(s) == *face)
        .cloned()
        .collect();
    if simplices.is_empty() {
        return Err(BundleError::EmptyTiling(fmt_simplex(face)));
    }
    let ids: BTreeMap<Simplex, CellId> = simplices
        .iter()
        .enumerate()
        .map(|(i, s)| (s.clone(), i))
        .collect();

    // Tiling grading: a cell spans its simplex minus one vertex per color.
    let dims: Vec<usize> = simplices.iter().map(|s| s.len() - face.len()).collect();
    let mut covers = Vec::new();
    for (id, simplex) in simplices.iter().enumerate() {
        for (pos, &w) in simplex.iter().enumerate() {
            let sub: Simplex = simplex
                .iter()
                .copied()
                .filter(|&u| u != w)
                .collect();
            if bundle.support(&sub) != *face {
                continue;
            }
            let sign = if pos % 2 == 0 { 1 } else { -1 };
            covers.push((ids[&sub], id, sign));
        }
    }
    let tiling = CellComplex::from_signed(dims, covers)?;
    let dual = reversed_complex(&tiling)?;

    let mut colored = BTreeMap::new();
    let mut traces = BTreeMap::new();
    for &cell in tiling.cells_of_dim(n) {
        let simplex = &simplices[cell];
        let mut mult: BTreeMap<Vertex, usize> = BTreeMap::new();
        for &v in simplex {
            *mult.entry(bundle.color(v)).or_insert(0) += 1;
        }
        let Some((&color, _)) = mult.iter().find(|&(_, &m)| m == n + 1) else {
            continue;
        };
        colored.insert(cell, color);
        let trace: Simplex = simplex
            .iter()
            .copied()
            .filter(|&v| bundle.color(v) == color)
            .collect();
        if let Some(prev) = traces.insert((color, trace.clone()), cell) {
            let _ = prev;
            return Err(BundleError::InclusionAmbiguous {
                face: fmt_simplex(face),
                color,
                trace: fmt_simplex(&trace),
            });
        }
        let incident = dual.incident_tops(cell).len();
        if incident != n + 1 {
            return Err(BundleError::LemmaViolation {
                face: fmt_simplex(face),
                cell,
                count: incident,
                expect: n + 1,
            });
        }
    }

    Ok(RawContext {
        face: face.clone(),
        simplices,
        ids,
        tiling,
        dual,
        colored,
        traces,
    })
}

/// One-step refinement chain map between the duals of nested faces
/// differing by a single color.  Every cell of the source maps to the
/// signed sum of its single-vertex extensions in the target.
#[derive(Debug)]
pub struct RefinementStep {
    columns: Vec<Vec<(CellId, i32)>>,
}

impl RefinementStep {
    pub fn apply(
        &self,
        chain: &RationalChain,
        source: &CellComplex,
        target: &CellComplex,
    ) -> Result<RationalChain, ChainError> {
        if chain.token() != source.token() {
            return Err(ChainError::ComplexMismatch);
        }
        let mut coeffs: BTreeMap<CellId, BigRational> = BTreeMap::new();
        for (cell, value) in chain.iter() {
            for &(image, sign) in &self.columns[cell] {
                let entry = coeffs.entry(image).or_insert_with(BigRational::zero);
                *entry += value * BigRational::from_integer(sign.into());
            }
        }
        coeffs.retain(|_, v| !v.is_zero());
        RationalChain::new(target, chain.dim(), coeffs)
    }

    /// Re-checks the chain-map identity on every basis cell.
    fn validate(&self, source: &CellComplex, target: &CellComplex) -> Result<(), BundleError> {
        for dim in 1..=source.top_dim() {
            for &cell in source.cells_of_dim(dim) {
                let basis = RationalChain::from_cell(source, cell)?;
                let lhs = target.boundary(&self.apply(&basis, source, target)?)?;
                let rhs = self.apply(&source.boundary(&basis)?, source, target)?;
                if lhs != rhs {
                    return Err(BundleError::RefinementFailed {
                        from: String::new(),
                        to: String::new(),
                        cell,
                        detail: "chain-map identity fails".into(),
                    });
                }
            }
        }
        Ok(())
    }
}

type StepKey = (Simplex, Simplex);

fn build_refinements(
    bundle: &TriangulatedBundle,
    contexts: &BTreeMap<Simplex, RawContext>,
) -> Result<BTreeMap<StepKey, RefinementStep>, BundleError> {
    let mut steps = BTreeMap::new();
    for from_face in bundle.base.simplices() {
        for to_face in bundle.base.simplices() {
            if to_face.len() != from_face.len() + 1 {
                continue;
            }
            let added: Vec<Vertex> = to_face
                .iter()
                .copied()
                .filter(|v| !from_face.contains(v))
                .collect();
            if added.len() != 1 {
                continue;
            }
            let step = build_one_step(
                bundle,
                &contexts[from_face],
                &contexts[to_face],
                added[0],
            )?;
            steps.insert((from_face.clone(), to_face.clone()), step);
        }
    }
    Ok(steps)
}

fn build_one_step(
    bundle: &TriangulatedBundle,
    source: &RawContext,
    target: &RawContext,
    new_color: Vertex,
) -> Result<RefinementStep, BundleError> {
    let fail = |cell: CellId, detail: String| BundleError::RefinementFailed {
        from: fmt_simplex(&source.face),
        to: fmt_simplex(&target.face),
        cell,
        detail,
    };

    // Candidate extensions of each source simplex by one new-color vertex.
    let candidates: Vec<Vec<CellId>> = source
        .simplices
        .iter()
        .map(|simplex| {
            let mut out = Vec::new();
            for (other, &id) in &target.ids {
                if other.len() != simplex.len() + 1 {
                    continue;
                }
                let extra: Vec<Vertex> = other
                    .iter()
                    .copied()
                    .filter(|v| !simplex.contains(v))
                    .collect();
                if extra.len() == 1
                    && bundle.color(extra[0]) == new_color
                    && simplex.iter().all(|v| other.contains(v))
                {
                    out.push(id);
                }
            }
            out
        })
        .collect();

    let mut columns: Vec<Vec<(CellId, i32)>> = vec![Vec::new(); source.simplices.len()];

    // Dual dimension 0 (tiling tops): the extension is unique and positive.
    for &cell in source.dual.cells_of_dim(0) {
        match candidates[cell].as_slice() {
            [unique] => columns[cell] = vec![(*unique, 1)],
            other => {
                return Err(fail(
                    cell,
                    format!("{} top-cell extensions instead of 1", other.len()),
                ))
            }
        }
    }

    // Colored dual vertices must keep their color and trace (the vertex
    // inclusion rule).
    for (&cell, &color) in &source.colored {
        let image = columns[cell][0].0;
        let same = target.colored.get(&image) == Some(&color)
            && trace_of(bundle, &target.simplices[image], color)
                == trace_of(bundle, &source.simplices[cell], color);
        if !same {
            return Err(fail(cell, "vertex image does not preserve the color trace".into()));
        }
    }

    // Higher dual dimensions: solve for the unit signs that make the
    // refinement a chain map against the already-built lower dimension.
    for p in 1..=source.dual.top_dim() {
        for &cell in source.dual.cells_of_dim(p) {
            let cands = &candidates[cell];
            if cands.is_empty() {
                return Err(fail(cell, "no extensions".into()));
            }
            // Right-hand side: image of the source boundary.
            let mut rhs_chain: BTreeMap<CellId, BigRational> = BTreeMap::new();
            for &(face_cell, inc) in source.dual.faces(cell) {
                for &(image, sign) in &columns[face_cell] {
                    let entry = rhs_chain.entry(image).or_insert_with(BigRational::zero);
                    *entry += BigRational::from_integer((inc * sign).into());
                }
            }
            rhs_chain.retain(|_, v| !v.is_zero());

            let mut row_index: BTreeMap<CellId, usize> = BTreeMap::new();
            let mut cols: Vec<Vec<(usize, i32)>> = Vec::with_capacity(cands.len());
            for &cand in cands {
                let mut col = Vec::new();
                for &(face_cell, inc) in target.dual.faces(cand) {
                    let next = row_index.len();
                    let row = *row_index.entry(face_cell).or_insert(next);
                    col.push((row, inc));
                }
                cols.push(col);
            }
            for cell_id in rhs_chain.keys() {
                if !row_index.contains_key(cell_id) {
                    return Err(fail(cell, "boundary image misses all extensions".into()));
                }
            }
            let mut matrix = SparseRationalMatrix::zero(row_index.len(), cands.len());
            for (j, col) in cols.iter().enumerate() {
                for &(row, inc) in col {
                    matrix.add_to(row, j, &BigRational::from_integer(inc.into()));
                }
            }
            let mut rhs = vec![BigRational::zero(); row_index.len()];
            for (cell_id, value) in &rhs_chain {
                rhs[row_index[cell_id]] = value.clone();
            }
            let solution = matrix
                .solve(&rhs)
                .ok_or_else(|| fail(cell, "sign system is inconsistent".into()))?;
            let one = BigRational::one();
            let mut column = Vec::with_capacity(cands.len());
            for (&cand, value) in cands.iter().zip(&solution) {
                if value.abs() != one {
                    return Err(fail(cell, "sign system has a non-unit solution".into()));
                }
                let sign = if value.is_positive() { 1 } else { -1 };
                column.push((cand, sign));
            }
            columns[cell] = column;
        }
    }

    Ok(RefinementStep { columns })
}

fn trace_of(bundle: &TriangulatedBundle, simplex: &[Vertex], color: Vertex) -> Simplex {
    simplex
        .iter()
        .copied()
        .filter(|&v| bundle.color(v) == color)
        .collect()
}

/// All choices of one fiber top per base vertex of `face`, one map per
/// combination, enumerated in a fixed order.
pub fn vertex_tuples(
    bundle: &TriangulatedBundle,
    face: &[Vertex],
) -> Vec<BTreeMap<Vertex, Simplex>> {
    let mut tuples: Vec<BTreeMap<Vertex, Simplex>> = vec![BTreeMap::new()];
    for &color in face {
        let tops = bundle.fiber_tops(color);
        let mut grown = Vec::with_capacity(tuples.len() * tops.len());
        for tuple in &tuples {
            for top in &tops {
                let mut next = tuple.clone();
                next.insert(color, top.clone());
                grown.push(next);
            }
        }
        tuples = grown;
    }
    tuples
}

/// Checks that a chain is a unit-coefficient closed class covering every
/// top cell.
fn assert_fundamental(
    complex: &CellComplex,
    chain: &RationalChain,
    what: &str,
) -> Result<(), BundleError> {
    let tops = complex.cells_of_dim(complex.top_dim());
    let one = BigRational::one();
    let full = chain.dim() == complex.top_dim()
        && chain.len() == tops.len()
        && chain.iter().all(|(_, v)| v.abs() == one)
        && complex.is_cycle(chain)?;
    if !full {
        return Err(BundleError::NotFundamental(what.to_string()));
    }
    Ok(())
}

fn orient_family(
    bundle: &TriangulatedBundle,
    contexts: &BTreeMap<Simplex, RawContext>,
    steps: &BTreeMap<StepKey, RefinementStep>,
) -> Result<BTreeMap<Simplex, RationalChain>, BundleError> {
    let mut funds: BTreeMap<Simplex, RationalChain> = BTreeMap::new();

    // Reference fibers: turn the stored signs into a fundamental class of
    // the dual via the flag-subdivision transfer.
    for orientation in &bundle.orientations {
        let anchor = orientation.anchor;
        let ctx = contexts
            .get(&vec![anchor])
            .ok_or(BundleError::OrientationMissing(anchor))?;
        let bad = |detail: &str| BundleError::BadFiberOrientation {
            anchor,
            detail: detail.to_string(),
        };
        let tops = ctx.tiling.cells_of_dim(bundle.fiber_dim());
        if orientation.signs.len() != tops.len() {
            return Err(bad("sign table does not cover the fiber top simplices"));
        }
        let mut coeffs = BTreeMap::new();
        for (simplex, &sign) in &orientation.signs {
            if sign != 1 && sign != -1 {
                return Err(bad("signs must be +1 or -1"));
            }
            let id = ctx
                .ids
                .get(simplex)
                .copied()
                .filter(|id| ctx.tiling.dim_of(*id) == bundle.fiber_dim())
                .ok_or_else(|| bad("sign key is not a top fiber simplex"))?;
            coeffs.insert(id, BigRational::from_integer(sign.into()));
        }
        let fund_t = RationalChain::new(&ctx.tiling, bundle.fiber_dim(), coeffs)?;
        if !ctx.tiling.is_cycle(&fund_t)? {
            return Err(bad("signs are not a coherent orientation (not closed)"));
        }
        let fund = transfer_orientation(&ctx.tiling, &fund_t, &ctx.dual)?;
        funds.insert(vec![anchor], fund);
    }

    // Transport across base edges, breadth-first from the anchors.
    let mut queue: VecDeque<Vertex> = funds.keys().map(|f| f[0]).collect();
    while let Some(u) = queue.pop_front() {
        for edge in bundle.base.simplices_of_dim(1) {
            if !edge.contains(&u) {
                continue;
            }
            let v = if edge[0] == u { edge[1] } else { edge[0] };
            if funds.contains_key(&vec![v]) {
                continue;
            }
            let edge_ctx = &contexts[edge];
            let u_ctx = &contexts[&vec![u]];
            let v_ctx = &contexts[&vec![v]];
            let through = steps[&(vec![u], edge.clone())].apply(
                &funds[&vec![u]],
                &u_ctx.dual,
                &edge_ctx.dual,
            )?;
            assert_fundamental(&edge_ctx.dual, &through, &fmt_simplex(edge))?;
            let trial_class = v_ctx.dual.coherent_orientation(None)?;
            let trial = crate::orientation::fundamental_class(&v_ctx.dual, &trial_class)?;
            let image = steps[&(vec![v], edge.clone())].apply(&trial, &v_ctx.dual, &edge_ctx.dual)?;
            assert_fundamental(&edge_ctx.dual, &image, &fmt_simplex(edge))?;
            let fund_v = if image == through {
                trial
            } else {
                let negated = trial.scaled(&BigRational::from_integer((-1).into()));
                let neg_image = image.scaled(&BigRational::from_integer((-1).into()));
                if neg_image != through {
                    return Err(BundleError::NonOrientableTransport(fmt_simplex(edge)));
                }
                negated
            };
            funds.insert(vec![v], fund_v);
            queue.push_back(v);
        }
    }
    for v in 0..bundle.base.vertex_count() {
        if !funds.contains_key(&vec![v]) {
            return Err(BundleError::OrientationMissing(v));
        }
    }

    // Pin every larger face from its largest-vertex-removed facet, then
    // validate agreement from every single-vertex subface.
    let mut faces: Vec<&Simplex> = bundle.base.simplices().iter().collect();
    faces.sort_by_key(|f| f.len());
    for face in &faces {
        if face.len() < 2 {
            continue;
        }
        let mut sub = (*face).clone();
        sub.pop();
        let through = steps[&(sub.clone(), (*face).clone())].apply(
            &funds[&sub],
            &contexts[&sub].dual,
            &contexts[*face].dual,
        )?;
        assert_fundamental(&contexts[*face].dual, &through, &fmt_simplex(face))?;
        funds.insert((*face).clone(), through);
    }
    for face in &faces {
        if face.len() < 2 {
            continue;
        }
        for &v in face.iter() {
            let mut chain = funds[&vec![v]].clone();
            let mut current = vec![v];
            for &w in face.iter().filter(|&&w| w != v) {
                let mut next = current.clone();
                next.push(w);
                next.sort_unstable();
                chain = steps[&(current.clone(), next.clone())].apply(
                    &chain,
                    &contexts[&current].dual,
                    &contexts[&next].dual,
                )?;
                current = next;
            }
            if chain != funds[*face] {
                return Err(BundleError::NonOrientableTransport(fmt_simplex(face)));
            }
        }
    }

    Ok(funds)
}

/// All per-face data of a bundle: contexts, refinement steps, and
/// transported orientations.  Immutable after construction; shared
/// references may be used from several threads.
#[derive(Debug)]
pub struct BundleContexts<'a> {
    bundle: &'a TriangulatedBundle,
    contexts: BTreeMap<Simplex, FaceContext>,
    steps: BTreeMap<StepKey, RefinementStep>,
}

impl<'a> BundleContexts<'a> {
    pub fn bundle(&self) -> &TriangulatedBundle {
        self.bundle
    }

    pub fn context(&self, face: &[Vertex]) -> Result<&FaceContext, BundleError> {
        self.contexts
            .get(face)
            .ok_or_else(|| BundleError::UnknownFace(fmt_simplex(face)))
    }

    pub fn faces(&self) -> impl Iterator<Item = &Simplex> {
        self.contexts.keys()
    }

    /// Rewrites a chain on the dual of `from` in the dual of `to`,
    /// composing one-color steps in increasing-vertex order.
    pub fn refine(
        &self,
        chain: &RationalChain,
        from: &[Vertex],
        to: &[Vertex],
    ) -> Result<RationalChain, BundleError> {
        let mut current: Simplex = from.to_vec();
        let mut result = chain.clone();
        let missing: Vec<Vertex> = to
            .iter()
            .copied()
            .filter(|v| !from.contains(v))
            .collect();
        if from.iter().any(|v| !to.contains(v)) {
            return Err(BundleError::NoRefinementPath(
                fmt_simplex(from),
                fmt_simplex(to),
            ));
        }
        for v in missing {
            let mut next = current.clone();
            next.push(v);
            next.sort_unstable();
            let step = self
                .steps
                .get(&(current.clone(), next.clone()))
                .ok_or_else(|| {
                    BundleError::NoRefinementPath(fmt_simplex(from), fmt_simplex(to))
                })?;
            result = step.apply(
                &result,
                &self.contexts[&current].dual,
                &self.contexts[&next].dual,
            )?;
            current = next;
        }
        Ok(result)
    }

    /// The dual vertex of the face context whose color trace names the
    /// given fiber top simplex.
    pub fn include_vertex(
        &self,
        color: Vertex,
        fiber_top: &[Vertex],
        face: &[Vertex],
    ) -> Result<CellId, BundleError> {
        let ctx = self.context(face)?;
        ctx.traces
            .get(&(color, fiber_top.to_vec()))
            .copied()
            .ok_or_else(|| BundleError::InclusionMissing {
                face: fmt_simplex(face),
                color,
                trace: fmt_simplex(fiber_top),
            })
    }
}
