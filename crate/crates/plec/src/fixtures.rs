//! Built-in example bundles.
//!
//! All fixtures here are circle bundles (fiber dimension 1): product
//! bundles over a triangle, a tetrahedron boundary, or a solid tetrahedron,
//! triangulated by staircases with a configurable fiber vertex order, with
//! stellar subdivision of fiber edges for variety, plus a checked-in
//! twisted bundle over the 2-sphere whose total space is a 12-vertex
//! 3-sphere.  The module also hosts an independent section-counting oracle
//! used to cross-check the engine on circle bundles.

use std::collections::BTreeMap;

use num::{BigRational, One, Zero};
use thiserror::Error;

use crate::bundle::{
    BundleContexts, BundleError, FaceContext, FiberOrientation, Simplex, SimplicialComplex,
    TriangulatedBundle, Vertex,
};
use crate::chain::{ChainError, RationalChain};
use crate::complex::CellId;
use crate::doc::BundleDocument;

#[derive(Debug, Error)]
pub enum FixtureError {
    #[error("fiber must have at least three vertices, got {0}")]
    FiberTooSmall(usize),
    #[error("fiber order is not a permutation of 0..{0}")]
    BadOrder(usize),
    #[error("{0}-{1} is not an edge inside one fiber")]
    NotFiberEdge(usize, usize),
    #[error("face {0:?} does not have exactly three vertices")]
    NotTriangle(String),
    #[error("chain is not an integer multiple of the fundamental class")]
    NotProportional,
    #[error(transparent)]
    Bundle(#[from] BundleError),
    #[error(transparent)]
    Chain(#[from] ChainError),
}

pub fn base_simplex2() -> SimplicialComplex {
    SimplicialComplex::from_maximal(3, &[vec![0, 1, 2]]).expect("static complex")
}

pub fn base_boundary3() -> SimplicialComplex {
    SimplicialComplex::from_maximal(
        4,
        &[vec![0, 1, 2], vec![0, 1, 3], vec![0, 2, 3], vec![1, 2, 3]],
    )
    .expect("static complex")
}

pub fn base_solid3() -> SimplicialComplex {
    SimplicialComplex::from_maximal(4, &[vec![0, 1, 2, 3]]).expect("static complex")
}

pub fn identity_order(m: usize) -> Vec<usize> {
    (0..m).collect()
}

/// Fiber vertices listed in staircase order after a cyclic rotation.
pub fn rotated_order(m: usize, shift: usize) -> Vec<usize> {
    (0..m).map(|i| (i + shift) % m).collect()
}

/// Product circle bundle, triangulated by staircases.
///
/// The fiber over every base vertex `b` is an `m`-gon on total vertices
/// `b*m..b*m+m`.  Over a base simplex, the product with each fiber edge is
/// cut into staircase simplices; `order` lists the fiber vertices in the
/// total order used for the staircase cuts, so different orders give
/// genuinely different (but isomorphic) triangulations of the same bundle.
pub fn gen_trivial(
    base: SimplicialComplex,
    m: usize,
    order: &[usize],
) -> Result<TriangulatedBundle, FixtureError> {
    if m < 3 {
        return Err(FixtureError::FiberTooSmall(m));
    }
    let mut rank = vec![usize::MAX; m];
    if order.len() == m {
        for (pos, &f) in order.iter().enumerate() {
            if f >= m || rank[f] != usize::MAX {
                return Err(FixtureError::BadOrder(m));
            }
            rank[f] = pos;
        }
    } else {
        return Err(FixtureError::BadOrder(m));
    }

    let mut fiber_edges: Vec<(usize, usize)> = (0..m - 1).map(|i| (i, i + 1)).collect();
    fiber_edges.push((0, m - 1));

    let mut maximal = Vec::new();
    for sigma in base.maximal() {
        let k = sigma.len() - 1;
        for &(f, g) in &fiber_edges {
            let (lo, hi) = if rank[f] < rank[g] { (f, g) } else { (g, f) };
            for split in 0..=k {
                let mut simplex: Simplex = Vec::with_capacity(k + 2);
                for (t, &b) in sigma.iter().enumerate() {
                    if t <= split {
                        simplex.push(b * m + lo);
                    }
                    if t >= split {
                        simplex.push(b * m + hi);
                    }
                }
                simplex.sort_unstable();
                maximal.push(simplex);
            }
        }
    }
    let vertex_count = base.vertex_count() * m;
    let total = SimplicialComplex::from_maximal(vertex_count, &maximal)?;
    let vertex_map: Vec<Vertex> = (0..vertex_count).map(|id| id / m).collect();

    let mut signs = BTreeMap::new();
    for i in 0..m - 1 {
        signs.insert(vec![i, i + 1], 1);
    }
    signs.insert(vec![0, m - 1], -1);
    let orientation = FiberOrientation { anchor: 0, signs };

    Ok(TriangulatedBundle::new(
        base,
        total,
        vertex_map,
        1,
        vec![orientation],
    )?)
}

/// Stellar subdivision of one fiber edge: a new vertex in the middle of
/// `{a, b}` (both over the same base vertex), splitting every simplex that
/// contains the edge.  The fiber orientation follows the split.
pub fn subdivide_fiber_edge(
    bundle: &TriangulatedBundle,
    a: Vertex,
    b: Vertex,
) -> Result<TriangulatedBundle, FixtureError> {
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    let edge = vec![lo, hi];
    if bundle.color(lo) != bundle.color(hi) || !bundle.total().contains(&edge) {
        return Err(FixtureError::NotFiberEdge(a, b));
    }
    let fresh = bundle.total().vertex_count();
    let mut maximal = Vec::new();
    for simplex in bundle.total().maximal() {
        if simplex.contains(&lo) && simplex.contains(&hi) {
            for &drop in &[lo, hi] {
                let mut copy: Simplex = simplex
                    .iter()
                    .copied()
                    .filter(|&v| v != drop)
                    .collect();
                copy.push(fresh);
                copy.sort_unstable();
                maximal.push(copy);
            }
        } else {
            maximal.push(simplex.clone());
        }
    }
    let total = SimplicialComplex::from_maximal(fresh + 1, &maximal)?;
    let mut vertex_map = bundle.vertex_map().to_vec();
    vertex_map.push(bundle.color(lo));

    let orientations = bundle
        .orientations()
        .iter()
        .map(|o| {
            if o.anchor != bundle.color(lo) {
                return o.clone();
            }
            let mut signs = BTreeMap::new();
            for (simplex, &sign) in &o.signs {
                if *simplex == edge {
                    // An oriented run lo -> hi becomes lo -> fresh -> hi.
                    signs.insert(vec![lo, fresh], sign);
                    signs.insert(vec![hi, fresh], -sign);
                } else {
                    signs.insert(simplex.clone(), sign);
                }
            }
            FiberOrientation {
                anchor: o.anchor,
                signs,
            }
        })
        .collect();

    Ok(TriangulatedBundle::new(
        bundle.base().clone(),
        total,
        vertex_map,
        bundle.fiber_dim(),
        orientations,
    )?)
}

/// Relabels the total-space vertices by a permutation (`perm[v]` is the
/// new name of vertex `v`), carrying the projection and the fiber
/// orientation data along.
pub fn permute_total_vertices(
    bundle: &TriangulatedBundle,
    perm: &[Vertex],
) -> Result<TriangulatedBundle, FixtureError> {
    let count = bundle.total().vertex_count();
    let mut seen = vec![false; count];
    if perm.len() != count {
        return Err(FixtureError::BadOrder(count));
    }
    for &image in perm {
        if image >= count || seen[image] {
            return Err(FixtureError::BadOrder(count));
        }
        seen[image] = true;
    }
    let maximal: Vec<Simplex> = bundle
        .total()
        .maximal()
        .iter()
        .map(|simplex| {
            let mut copy: Simplex = simplex.iter().map(|&v| perm[v]).collect();
            copy.sort_unstable();
            copy
        })
        .collect();
    let total = SimplicialComplex::from_maximal(count, &maximal)?;
    let mut vertex_map = vec![0; count];
    for v in 0..count {
        vertex_map[perm[v]] = bundle.color(v);
    }
    let orientations = bundle
        .orientations()
        .iter()
        .map(|o| {
            let mut signs = BTreeMap::new();
            for (simplex, &sign) in &o.signs {
                let mapped: Simplex = simplex.iter().map(|&v| perm[v]).collect();
                let (sorted, parity) = sort_with_sign(&mapped);
                signs.insert(sorted, sign * parity);
            }
            FiberOrientation {
                anchor: o.anchor,
                signs,
            }
        })
        .collect();
    Ok(TriangulatedBundle::new(
        bundle.base().clone(),
        total,
        vertex_map,
        bundle.fiber_dim(),
        orientations,
    )?)
}

/// Ascending copy of a vertex list and the sign of the sort permutation.
fn sort_with_sign(simplex: &[Vertex]) -> (Simplex, i32) {
    let mut inversions = 0usize;
    for i in 0..simplex.len() {
        for j in i + 1..simplex.len() {
            if simplex[i] > simplex[j] {
                inversions += 1;
            }
        }
    }
    let mut sorted = simplex.to_vec();
    sorted.sort_unstable();
    (sorted, if inversions % 2 == 0 { 1 } else { -1 })
}

/// A bundle together with the bookkeeping tests need: a short name, the
/// expected pairing of its Euler cochain against the fundamental cycle of
/// the base (when the base is a closed surface), and a note on where the
/// data comes from.
#[derive(Debug, Clone)]
pub struct BundleFixture {
    pub name: String,
    pub bundle: TriangulatedBundle,
    pub expected_pairing: Option<BigRational>,
    pub note: String,
}

/// The twisted circle bundle over the 4-vertex 2-sphere: 12 total
/// vertices, 36 tetrahedra, Euler number -1 with the stated fiber
/// orientation.  The data is checked in as JSON and validated by tests
/// rather than trusted; it was found by exhaustive search over the
/// bead-necklace solid tori above each base triangle (gluing four of
/// them along their boundary annuli) and certified by an independent
/// integral-homology computation showing the total space is a homology
/// 3-sphere.
pub fn hopf_fixture() -> BundleFixture {
    let doc: BundleDocument =
        serde_json::from_str(include_str!("../fixtures/hopf.json")).expect("static fixture json");
    let bundle = doc.to_bundle().expect("static fixture data");
    BundleFixture {
        name: "hopf".to_string(),
        bundle,
        expected_pairing: Some(-BigRational::one()),
        note: "checked-in twisted bundle; total space is a 12-vertex 3-sphere".to_string(),
    }
}

/// A labeled collection of circle bundles exercising different bases,
/// fiber sizes, staircase orders, subdivisions, and the twisted fixture.
pub fn fixture_suite() -> Vec<BundleFixture> {
    let product = |name: &str, bundle: TriangulatedBundle, closed: bool| BundleFixture {
        name: name.to_string(),
        bundle,
        expected_pairing: closed.then(BigRational::zero),
        note: "staircase product bundle".to_string(),
    };
    let mut suite = Vec::new();
    let tri3 = gen_trivial(base_simplex2(), 3, &identity_order(3)).expect("fixture");
    suite.push(product("triangle-m3", tri3.clone(), false));
    suite.push(product(
        "triangle-m3-rot1",
        gen_trivial(base_simplex2(), 3, &rotated_order(3, 1)).expect("fixture"),
        false,
    ));
    suite.push(product(
        "triangle-m4",
        gen_trivial(base_simplex2(), 4, &identity_order(4)).expect("fixture"),
        false,
    ));
    suite.push(product(
        "triangle-m4-mixed",
        gen_trivial(base_simplex2(), 4, &[1, 3, 0, 2]).expect("fixture"),
        false,
    ));
    suite.push(product(
        "triangle-m3-split-anchor",
        subdivide_fiber_edge(&tri3, 0, 1).expect("fixture"),
        false,
    ));
    suite.push(product(
        "triangle-m3-split-far",
        subdivide_fiber_edge(&tri3, 3 + 1, 3 + 2).expect("fixture"),
        false,
    ));
    suite.push(product(
        "sphere-m3",
        gen_trivial(base_boundary3(), 3, &identity_order(3)).expect("fixture"),
        true,
    ));
    suite.push(product(
        "solid-m3",
        gen_trivial(base_solid3(), 3, &identity_order(3)).expect("fixture"),
        false,
    ));
    suite.push(hopf_fixture());
    suite
}

/// The suite as plain `(name, bundle)` pairs.
pub fn circle_bundle_suite() -> Vec<(String, TriangulatedBundle)> {
    fixture_suite()
        .into_iter()
        .map(|fixture| (fixture.name, fixture.bundle))
        .collect()
}

fn proportional_to_fund(
    chain: &RationalChain,
    fund: &RationalChain,
) -> Result<BigRational, FixtureError> {
    if chain.is_zero() {
        return Ok(BigRational::zero());
    }
    let (cell, value) = chain.iter().next().expect("nonzero chain");
    let unit = fund.coeff(cell);
    if unit.is_zero() {
        return Err(FixtureError::NotProportional);
    }
    let ratio = value / &unit;
    if *chain == fund.scaled(&ratio) {
        Ok(ratio)
    } else {
        Err(FixtureError::NotProportional)
    }
}

/// Walks a necklace from one bead, following the fundamental class
/// direction, and returns the edge chain of the forward arc ending at
/// `to`.
fn forward_arc(
    ctx: &FaceContext,
    from: CellId,
    to: CellId,
) -> Result<RationalChain, FixtureError> {
    let dual = ctx.dual();
    let fund = ctx.fund();
    let mut coeffs: BTreeMap<CellId, BigRational> = BTreeMap::new();
    let mut current = from;
    let mut steps = 0usize;
    while current != to {
        let outgoing = dual.cofaces(current).iter().copied().find(|&(edge, inc)| {
            fund.coeff(edge) * BigRational::from_integer(inc.into()) == -BigRational::one()
        });
        let Some((edge, _)) = outgoing else {
            return Err(FixtureError::NotProportional);
        };
        coeffs.insert(edge, fund.coeff(edge));
        current = dual
            .faces(edge)
            .iter()
            .copied()
            .find(|&(bead, _)| bead != current)
            .map(|(bead, _)| bead)
            .expect("necklace edges join two beads");
        steps += 1;
        if steps > dual.cells_of_dim(1).len() {
            return Err(FixtureError::NotProportional);
        }
    }
    Ok(RationalChain::new(dual, 1, coeffs)?)
}

/// Independent per-tuple oracle for circle bundles: build all eight
/// boundary sections of the base triangle determined by the tuple (two
/// fiber arcs per base edge), refine each closed section loop into the
/// dual over the triangle, read its degree against the fundamental class,
/// and average.
pub fn n1_section_oracle(
    ctxs: &BundleContexts<'_>,
    sigma: &[Vertex],
    tuple: &BTreeMap<Vertex, Simplex>,
) -> Result<BigRational, FixtureError> {
    if sigma.len() != 3 {
        return Err(FixtureError::NotTriangle(format!("{sigma:?}")));
    }
    let ctx = ctxs.context(sigma)?;
    let fund = ctx.fund();

    // Positive arcs over the three boundary edges, in the cyclic pattern
    // r -> b, b -> g, g -> r, refined into the dual over the triangle.
    let cyclic = [
        (sigma[0], sigma[1]),
        (sigma[1], sigma[2]),
        (sigma[2], sigma[0]),
    ];
    let mut refined_arcs = Vec::new();
    for &(x, y) in &cyclic {
        let pair = if x < y { vec![x, y] } else { vec![y, x] };
        let pair_ctx = ctxs.context(&pair)?;
        let from = ctxs.include_vertex(x, &tuple[&x], &pair)?;
        let to = ctxs.include_vertex(y, &tuple[&y], &pair)?;
        let arc = forward_arc(pair_ctx, from, to)?;
        refined_arcs.push(ctxs.refine(&arc, &pair, sigma)?);
    }

    let mut total = BigRational::zero();
    let mut count = 0usize;
    for bits in 0..8u8 {
        let mut lap = RationalChain::zero(ctx.dual(), 1);
        for (i, arc) in refined_arcs.iter().enumerate() {
            lap = lap.add(arc)?;
            if bits & (1 << i) != 0 {
                lap = lap.sub(fund)?;
            }
        }
        if !ctx.dual().is_cycle(&lap)? {
            return Err(FixtureError::NotProportional);
        }
        let degree = proportional_to_fund(&lap, fund)?;
        if !degree.is_integer() {
            return Err(FixtureError::NotProportional);
        }
        total += degree;
        count += 1;
    }
    Ok(total / BigRational::from_integer(count.into()))
}
