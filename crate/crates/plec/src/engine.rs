//! Euler cochain evaluation.
//!
//! Three equivalent evaluation strategies produce, for every base simplex
//! one dimension above the fiber and every choice of one fiber top per
//! base vertex, an exact rational local value; averaging the values over
//! all choices yields the Euler cochain of the bundle.
//!
//! * `Harmonic` builds a nested family of minimum-norm chains by repeated
//!   harmonic extension and reads the proportionality constant of the
//!   alternating top sum against the fundamental class.
//! * `Winding` integrates the alternating boundary data by a winding
//!   sweep over the dual sphere and averages normalized winding chains.
//! * `Necklace` is a closed form for circle bundles: the cyclic order of
//!   the three chosen beads on the dual necklace decides between -1/2 and
//!   +1/2.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use num::{BigRational, One, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::bundle::{
    vertex_tuples, BundleContexts, BundleError, FaceContext, Simplex, SimplicialComplex,
    TriangulatedBundle, Vertex,
};
use crate::chain::{ChainError, RationalChain};
use crate::complex::{CellComplex, CellId, ComplexError};
use crate::linalg::{harmonic_extension, LinalgError};
use crate::orientation::fundamental_class;

/// One fiber top simplex chosen per base vertex.
pub type VertexTuple = BTreeMap<Vertex, Simplex>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Formula {
    Harmonic,
    Winding,
    Necklace,
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Formula::Harmonic => "harmonic",
            Formula::Winding => "winding",
            Formula::Necklace => "necklace",
        };
        f.write_str(name)
    }
}

impl std::str::FromStr for Formula {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "harmonic" => Ok(Formula::Harmonic),
            "winding" => Ok(Formula::Winding),
            "necklace" => Ok(Formula::Necklace),
            other => Err(format!("unknown formula {other:?}")),
        }
    }
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("the {formula} formula requires fiber dimension 1, found {fiber_dim}")]
    FormulaUnsupported { formula: Formula, fiber_dim: usize },
    #[error("face {0:?} is not a base simplex one dimension above the fiber")]
    NotEvaluationFace(String),
    #[error("tuple does not choose a fiber top for base vertex {0}")]
    IncompleteTuple(Vertex),
    #[error("chain over face {0:?} is not proportional to the fundamental class")]
    NotProportional(String),
    #[error("alternating chain over face {0:?} is not closed")]
    NotClosed(String),
    #[error("boundary terms fail to cancel over face {0:?}")]
    CancellationFailed(String),
    #[error("winding sweep is inconsistent: {0}")]
    WindingInconsistent(String),
    #[error(transparent)]
    Bundle(#[from] BundleError),
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

fn fmt_simplex(s: &[Vertex]) -> String {
    let parts: Vec<String> = s.iter().map(|v| v.to_string()).collect();
    parts.join(",")
}

/// Sorted copy of an oriented vertex list plus the sign of the sorting
/// permutation (+1 even, -1 odd).
fn canonical_orientation(sigma: &[Vertex]) -> (Simplex, i64) {
    let mut sorted = sigma.to_vec();
    let mut inversions = 0usize;
    for i in 0..sigma.len() {
        for j in i + 1..sigma.len() {
            if sigma[i] > sigma[j] {
                inversions += 1;
            }
        }
    }
    sorted.sort_unstable();
    (sorted, if inversions % 2 == 0 { 1 } else { -1 })
}

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

/// The constant `c` with `chain == c * fund`, or an error when the chain
/// is not a multiple of the fundamental class.
fn proportional(
    chain: &RationalChain,
    fund: &RationalChain,
    face: &[Vertex],
) -> Result<BigRational, EngineError> {
    if chain.is_zero() {
        return Ok(BigRational::zero());
    }
    let (cell, value) = chain.iter().next().expect("nonzero chain");
    let unit = fund.coeff(cell);
    if unit.is_zero() {
        return Err(EngineError::NotProportional(fmt_simplex(face)));
    }
    let c = value / &unit;
    if *chain == fund.scaled(&c) {
        Ok(c)
    } else {
        Err(EngineError::NotProportional(fmt_simplex(face)))
    }
}

/// Sweep schedule for the winding integration; all schedules must produce
/// the same normalized winding chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SweepPlan {
    #[default]
    Forward,
    Reverse,
    From(CellId),
}

/// Solves the discrete winding problem: a top chain whose boundary is the
/// given closed codimension-one chain, built cell by cell from a start
/// top, with every crossing checked for consistency.
pub fn winding_patch(
    dual: &CellComplex,
    rim: &RationalChain,
    plan: SweepPlan,
) -> Result<RationalChain, EngineError> {
    let top = dual.top_dim();
    let tops = dual.cells_of_dim(top);
    let inconsistent =
        |detail: &str| EngineError::WindingInconsistent(detail.to_string());
    if tops.is_empty() {
        return Err(inconsistent("no top cells"));
    }
    let (start, reverse) = match plan {
        SweepPlan::Forward => (tops[0], false),
        SweepPlan::Reverse => (*tops.last().expect("nonempty"), true),
        SweepPlan::From(cell) => (cell, false),
    };
    if !tops.contains(&start) {
        return Err(inconsistent("start cell is not a top cell"));
    }

    let mut coeffs: BTreeMap<CellId, BigRational> = BTreeMap::new();
    coeffs.insert(start, BigRational::zero());
    let mut queue = VecDeque::from([start]);
    while let Some(cell) = queue.pop_front() {
        let here = coeffs[&cell].clone();
        let faces: Vec<(CellId, i32)> = if reverse {
            dual.faces(cell).iter().rev().copied().collect()
        } else {
            dual.faces(cell).to_vec()
        };
        for (wall, inc_here) in faces {
            let cofaces = dual.cofaces(wall);
            if cofaces.len() != 2 {
                return Err(inconsistent("a wall without exactly two sides"));
            }
            let (other, inc_other) = cofaces
                .iter()
                .copied()
                .find(|&(c, _)| c != cell)
                .ok_or_else(|| inconsistent("a wall with a repeated side"))?;
            let crossing = (rim.coeff(wall)
                - &here * BigRational::from_integer(inc_here.into()))
                / BigRational::from_integer(inc_other.into());
            match coeffs.get(&other) {
                None => {
                    coeffs.insert(other, crossing);
                    queue.push_back(other);
                }
                Some(existing) if *existing != crossing => {
                    return Err(inconsistent("conflicting values across a wall"));
                }
                _ => {}
            }
        }
    }
    if coeffs.len() != tops.len() {
        return Err(inconsistent("sweep did not reach every top cell"));
    }
    coeffs.retain(|_, v| !v.is_zero());
    let patch = RationalChain::new(dual, top, coeffs)?;
    if dual.boundary(&patch)? != *rim {
        return Err(inconsistent("patch boundary differs from the rim"));
    }
    Ok(patch)
}

/// Base-point-free winding chain around a colored dual vertex: the patch
/// recentered so that the mean of its coefficients against the fundamental
/// class over the tops incident to the vertex is zero.
pub fn winding_chain(
    ctx: &FaceContext,
    vertex: CellId,
    rim: &RationalChain,
    plan: SweepPlan,
) -> Result<RationalChain, EngineError> {
    let dual = ctx.dual();
    let fund = ctx.fund();
    let patch = winding_patch(dual, rim, plan)?;
    let incident = dual.incident_tops(vertex);
    let count = BigRational::from_integer(incident.len().into());
    let mut mean = BigRational::zero();
    for cell in incident {
        mean += patch.coeff(cell) * fund.coeff(cell);
    }
    mean /= count;
    Ok(patch.add(&fund.scaled(&-mean))?)
}

type SigmaKey = (Simplex, Vec<Simplex>);

/// Local Euler value evaluator with a cache of the nested chain family,
/// shared across faces and tuples.
pub struct Evaluator<'a, 'b> {
    ctxs: &'b BundleContexts<'a>,
    cache: BTreeMap<SigmaKey, RationalChain>,
}

impl<'a, 'b> Evaluator<'a, 'b> {
    pub fn new(ctxs: &'b BundleContexts<'a>) -> Self {
        Evaluator {
            ctxs,
            cache: BTreeMap::new(),
        }
    }

    pub fn contexts(&self) -> &'b BundleContexts<'a> {
        self.ctxs
    }

    fn picks_for(&self, face: &[Vertex], tuple: &VertexTuple) -> Result<Vec<Simplex>, EngineError> {
        face.iter()
            .map(|v| {
                tuple
                    .get(v)
                    .cloned()
                    .ok_or(EngineError::IncompleteTuple(*v))
            })
            .collect()
    }

    /// Builds (and caches) the chain attached to a face and the tuple
    /// restriction: the included bead for a single vertex, and otherwise
    /// the minimum-norm chain filling the alternating sum of the refined
    /// chains of the facets.
    fn ensure_sigma(&mut self, face: &[Vertex], picks: &[Simplex]) -> Result<(), EngineError> {
        let key = (face.to_vec(), picks.to_vec());
        if self.cache.contains_key(&key) {
            return Ok(());
        }
        let ctx = self.ctxs.context(face)?;
        let chain = if face.len() == 1 {
            let bead = self.ctxs.include_vertex(face[0], &picks[0], face)?;
            RationalChain::from_cell(ctx.dual(), bead)?
        } else {
            let mut arg = RationalChain::zero(ctx.dual(), face.len() - 2);
            for m in 0..face.len() {
                let mut sub_face = face.to_vec();
                sub_face.remove(m);
                let mut sub_picks = picks.to_vec();
                sub_picks.remove(m);
                self.ensure_sigma(&sub_face, &sub_picks)?;
                let sub = self.cache[&(sub_face.clone(), sub_picks)].clone();
                let refined = self.ctxs.refine(&sub, &sub_face, face)?;
                arg = if m % 2 == 0 {
                    arg.add(&refined)?
                } else {
                    arg.sub(&refined)?
                };
            }
            harmonic_extension(ctx.dual(), &arg, None)?
        };
        self.cache.insert(key, chain);
        Ok(())
    }

    fn cached(&self, face: &[Vertex], picks: &[Simplex]) -> &RationalChain {
        self.cache
            .get(&(face.to_vec(), picks.to_vec()))
            .expect("sigma cache populated before use")
    }

    fn check_eval_face(&self, sigma: &[Vertex]) -> Result<(), EngineError> {
        let bundle = self.ctxs.bundle();
        let reachable = self.ctxs.context(sigma).is_ok();
        if sigma.len() != bundle.fiber_dim() + 2 || !reachable {
            return Err(EngineError::NotEvaluationFace(fmt_simplex(sigma)));
        }
        Ok(())
    }

    /// Populates the cache for one face/tuple pair without evaluating.
    pub fn precompute(
        &mut self,
        sigma: &[Vertex],
        tuple: &VertexTuple,
        formula: Formula,
    ) -> Result<(), EngineError> {
        self.check_eval_face(sigma)?;
        let picks = self.picks_for(sigma, tuple)?;
        match formula {
            Formula::Necklace => Ok(()),
            Formula::Harmonic => {
                for i in 0..sigma.len() {
                    let mut facet = sigma.to_vec();
                    facet.remove(i);
                    let mut facet_picks = picks.clone();
                    facet_picks.remove(i);
                    self.ensure_sigma(&facet, &facet_picks)?;
                }
                Ok(())
            }
            Formula::Winding => {
                for i in 0..sigma.len() {
                    for j in 0..sigma.len() {
                        if i == j {
                            continue;
                        }
                        let (lo, hi) = if i < j { (i, j) } else { (j, i) };
                        let mut sub = sigma.to_vec();
                        sub.remove(hi);
                        sub.remove(lo);
                        let mut sub_picks = picks.clone();
                        sub_picks.remove(hi);
                        sub_picks.remove(lo);
                        self.ensure_sigma(&sub, &sub_picks)?;
                    }
                }
                Ok(())
            }
        }
    }

    /// The alternating boundary chains, one per vertex of the face, each
    /// refined into the dual over the face.  Their sum cancels exactly.
    pub fn rim_family(
        &mut self,
        sigma: &[Vertex],
        tuple: &VertexTuple,
    ) -> Result<Vec<RationalChain>, EngineError> {
        self.check_eval_face(sigma)?;
        let picks = self.picks_for(sigma, tuple)?;
        let ctx = self.ctxs.context(sigma)?;
        let n = self.ctxs.bundle().fiber_dim();
        let mut family = Vec::with_capacity(sigma.len());
        for i in 0..sigma.len() {
            let mut rim = RationalChain::zero(ctx.dual(), n - 1);
            for j in 0..sigma.len() {
                if i == j {
                    continue;
                }
                let (lo, hi) = if i < j { (i, j) } else { (j, i) };
                let mut sub = sigma.to_vec();
                sub.remove(hi);
                sub.remove(lo);
                let mut sub_picks = picks.clone();
                sub_picks.remove(hi);
                sub_picks.remove(lo);
                self.ensure_sigma(&sub, &sub_picks)?;
                let refined = self
                    .ctxs
                    .refine(self.cached(&sub, &sub_picks), &sub, sigma)?;
                let positive = (i + j + usize::from(j > i)) % 2 == 0;
                rim = if positive {
                    rim.add(&refined)?
                } else {
                    rim.sub(&refined)?
                };
            }
            family.push(rim);
        }
        let mut total = RationalChain::zero(ctx.dual(), n - 1);
        for rim in &family {
            total = total.add(rim)?;
        }
        if !total.is_zero() {
            return Err(EngineError::CancellationFailed(fmt_simplex(sigma)));
        }
        Ok(family)
    }

    /// The exact local value over one face for one tuple.
    /// `sigma` may list its vertices in any order; the order fixes the
    /// simplex orientation, and an odd permutation negates the value.
    pub fn local_value(
        &mut self,
        sigma: &[Vertex],
        tuple: &VertexTuple,
        formula: Formula,
    ) -> Result<BigRational, EngineError> {
        let (sorted, sign) = canonical_orientation(sigma);
        self.precompute(&sorted, tuple, formula)?;
        let value = self.value_from_cache(&sorted, tuple, formula)?;
        Ok(value * ratio(sign, 1))
    }

    /// Evaluation that only reads the cache; `precompute` must already
    /// have run for this face, tuple, and formula.
    fn value_from_cache(
        &self,
        sigma: &[Vertex],
        tuple: &VertexTuple,
        formula: Formula,
    ) -> Result<BigRational, EngineError> {
        self.check_eval_face(sigma)?;
        let picks = self.picks_for(sigma, tuple)?;
        let ctx = self.ctxs.context(sigma)?;
        let n = self.ctxs.bundle().fiber_dim();
        match formula {
            Formula::Harmonic => {
                let mut total = RationalChain::zero(ctx.dual(), n);
                for i in 0..sigma.len() {
                    let mut facet = sigma.to_vec();
                    facet.remove(i);
                    let mut facet_picks = picks.clone();
                    facet_picks.remove(i);
                    let refined =
                        self.ctxs
                            .refine(self.cached(&facet, &facet_picks), &facet, sigma)?;
                    total = if i % 2 == 0 {
                        total.add(&refined)?
                    } else {
                        total.sub(&refined)?
                    };
                }
                if !ctx.dual().is_cycle(&total)? {
                    return Err(EngineError::NotClosed(fmt_simplex(sigma)));
                }
                proportional(&total, ctx.fund(), sigma)
            }
            Formula::Winding => {
                let family = self.rim_family_from_cache(sigma, &picks)?;
                let mut total = RationalChain::zero(ctx.dual(), n);
                for (i, rim) in family.iter().enumerate() {
                    for (j, &color) in sigma.iter().enumerate() {
                        if i == j {
                            continue;
                        }
                        let bead = self.ctxs.include_vertex(color, &picks[j], sigma)?;
                        let wind = winding_chain(ctx, bead, rim, SweepPlan::Forward)?;
                        total = total.add(&wind)?;
                    }
                }
                let averaged = total.scaled(&ratio(1, (n + 1) as i64));
                proportional(&averaged, ctx.fund(), sigma)
            }
            Formula::Necklace => {
                if n != 1 {
                    return Err(EngineError::FormulaUnsupported {
                        formula,
                        fiber_dim: n,
                    });
                }
                let beads: Vec<CellId> = sigma
                    .iter()
                    .enumerate()
                    .map(|(j, &color)| self.ctxs.include_vertex(color, &picks[j], sigma))
                    .collect::<Result<_, _>>()?;
                necklace_value(ctx, beads[0], beads[1], beads[2])
            }
        }
    }

    /// `rim_family` against an already-populated cache.
    fn rim_family_from_cache(
        &self,
        sigma: &[Vertex],
        picks: &[Simplex],
    ) -> Result<Vec<RationalChain>, EngineError> {
        let ctx = self.ctxs.context(sigma)?;
        let n = self.ctxs.bundle().fiber_dim();
        let mut family = Vec::with_capacity(sigma.len());
        for i in 0..sigma.len() {
            let mut rim = RationalChain::zero(ctx.dual(), n - 1);
            for j in 0..sigma.len() {
                if i == j {
                    continue;
                }
                let (lo, hi) = if i < j { (i, j) } else { (j, i) };
                let mut sub = sigma.to_vec();
                sub.remove(hi);
                sub.remove(lo);
                let mut sub_picks = picks.to_vec();
                sub_picks.remove(hi);
                sub_picks.remove(lo);
                let refined = self
                    .ctxs
                    .refine(self.cached(&sub, &sub_picks), &sub, sigma)?;
                let positive = (i + j + usize::from(j > i)) % 2 == 0;
                rim = if positive {
                    rim.add(&refined)?
                } else {
                    rim.sub(&refined)?
                };
            }
            family.push(rim);
        }
        let mut total = RationalChain::zero(ctx.dual(), n - 1);
        for rim in &family {
            total = total.add(rim)?;
        }
        if !total.is_zero() {
            return Err(EngineError::CancellationFailed(fmt_simplex(sigma)));
        }
        Ok(family)
    }
}

/// The bead reached from `bead` by crossing its outgoing edge in the
/// direction of the fundamental class.
fn forward_bead(
    dual: &CellComplex,
    fund: &RationalChain,
    bead: CellId,
) -> Result<CellId, EngineError> {
    let stuck = || EngineError::WindingInconsistent("necklace walk is stuck".to_string());
    let (edge, _) = dual
        .cofaces(bead)
        .iter()
        .copied()
        .find(|&(edge, inc)| {
            fund.coeff(edge) * BigRational::from_integer(inc.into()) == -BigRational::one()
        })
        .ok_or_else(stuck)?;
    dual.faces(edge)
        .iter()
        .copied()
        .find(|&(other, _)| other != bead)
        .map(|(other, _)| other)
        .ok_or_else(stuck)
}

/// Closed-form local value for circle bundles: walk the necklace forward
/// from the first bead; meeting the second bead before the third gives
/// -1/2, the other order gives +1/2.
pub fn necklace_value(
    ctx: &FaceContext,
    first: CellId,
    second: CellId,
    third: CellId,
) -> Result<BigRational, EngineError> {
    let dual = ctx.dual();
    let fund = ctx.fund();
    let mut current = first;
    for _ in 0..=dual.cells_of_dim(1).len() {
        current = forward_bead(dual, fund, current)?;
        if current == second {
            return Ok(ratio(-1, 2));
        }
        if current == third {
            return Ok(ratio(1, 2));
        }
    }
    Err(EngineError::WindingInconsistent(
        "necklace walk is stuck".to_string(),
    ))
}

/// The bead colors of a circle-bundle necklace, listed once around the
/// circle in the direction of the fundamental class.
pub fn necklace_word(ctx: &FaceContext) -> Result<Vec<Vertex>, EngineError> {
    let dual = ctx.dual();
    let fund = ctx.fund();
    let beads = dual.cells_of_dim(0);
    let start = *beads
        .first()
        .ok_or_else(|| EngineError::WindingInconsistent("empty necklace".to_string()))?;
    let mut word = Vec::with_capacity(beads.len());
    let mut current = start;
    loop {
        let color = ctx.vertex_color(current).ok_or_else(|| {
            EngineError::WindingInconsistent("necklace bead has no color".to_string())
        })?;
        word.push(color);
        current = forward_bead(dual, fund, current)?;
        if current == start {
            break;
        }
        if word.len() > beads.len() {
            return Err(EngineError::WindingInconsistent(
                "necklace walk does not close".to_string(),
            ));
        }
    }
    Ok(word)
}

/// Averaged local value of a circle-bundle necklace, computed directly
/// from its cyclic color word: with bead counts r, b, g for the three
/// colors in ascending order, the value is (#neg - #pos) / (2 r b g),
/// where a color triple is positive when walking forward from its
/// first-color bead meets its second-color bead before its third.
pub fn necklace_closed_form(
    word: &[Vertex],
    colors: &[Vertex; 3],
) -> Result<BigRational, EngineError> {
    let len = word.len();
    let positions = |color: Vertex| -> Vec<usize> {
        word.iter()
            .enumerate()
            .filter(|&(_, &c)| c == color)
            .map(|(i, _)| i)
            .collect()
    };
    let reds = positions(colors[0]);
    let blues = positions(colors[1]);
    let greens = positions(colors[2]);
    for (&color, found) in colors.iter().zip([&reds, &blues, &greens]) {
        if found.is_empty() {
            return Err(EngineError::IncompleteTuple(color));
        }
    }
    let mut positive = 0i64;
    let mut negative = 0i64;
    for &r in &reds {
        for &b in &blues {
            for &g in &greens {
                if (len + b - r) % len < (len + g - r) % len {
                    positive += 1;
                } else {
                    negative += 1;
                }
            }
        }
    }
    let triples = (reds.len() * blues.len() * greens.len()) as i64;
    Ok(ratio(negative - positive, 2 * triples))
}

/// The Euler cochain: one exact rational per base simplex one dimension
/// above the fiber, averaged over all vertex tuples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EulerCochain {
    pub formula: Formula,
    pub values: BTreeMap<Simplex, BigRational>,
}

/// Evaluates the cochain on every face.  `threads` bounds the worker pool
/// (`None` uses the rayon default); results are identical either way.
pub fn euler_cochain(
    ctxs: &BundleContexts<'_>,
    formula: Formula,
    threads: Option<usize>,
) -> Result<EulerCochain, EngineError> {
    let bundle = ctxs.bundle();
    let n = bundle.fiber_dim();
    if formula == Formula::Necklace && n != 1 {
        return Err(EngineError::FormulaUnsupported {
            formula,
            fiber_dim: n,
        });
    }
    let faces: Vec<Simplex> = bundle
        .base()
        .simplices_of_dim(n + 1)
        .cloned()
        .collect();

    let mut evaluator = Evaluator::new(ctxs);
    let mut jobs: Vec<(usize, VertexTuple)> = Vec::new();
    for (index, sigma) in faces.iter().enumerate() {
        for tuple in vertex_tuples(bundle, sigma) {
            evaluator.precompute(sigma, &tuple, formula)?;
            jobs.push((index, tuple));
        }
    }

    let run = || -> Result<Vec<BigRational>, EngineError> {
        jobs.par_iter()
            .map(|(index, tuple)| evaluator.value_from_cache(&faces[*index], tuple, formula))
            .collect()
    };
    let values = match threads {
        None => run()?,
        Some(count) => rayon::ThreadPoolBuilder::new()
            .num_threads(count)
            .build()
            .map_err(|e| EngineError::WindingInconsistent(e.to_string()))?
            .install(run)?,
    };

    let mut sums: Vec<(BigRational, usize)> =
        vec![(BigRational::zero(), 0); faces.len()];
    for ((index, _), value) in jobs.iter().zip(values) {
        sums[*index].0 += value;
        sums[*index].1 += 1;
    }
    let mut out = BTreeMap::new();
    for (sigma, (total, count)) in faces.into_iter().zip(sums) {
        let average = total / BigRational::from_integer(count.into());
        out.insert(sigma, average);
    }
    Ok(EulerCochain {
        formula,
        values: out,
    })
}

/// Pairs a cochain with a top-dimensional cycle of the base, both keyed
/// by sorted simplices.
pub fn pair_cochain_cycle(
    cochain: &EulerCochain,
    cycle: &BTreeMap<Simplex, BigRational>,
) -> BigRational {
    let mut total = BigRational::zero();
    for (simplex, weight) in cycle {
        if let Some(value) = cochain.values.get(simplex) {
            total += value * weight;
        }
    }
    total
}

/// Simplicial coboundary of the cochain, evaluated on every base simplex
/// one dimension higher.
pub fn cochain_coboundary(
    cochain: &EulerCochain,
    base: &SimplicialComplex,
    dim: usize,
) -> BTreeMap<Simplex, BigRational> {
    let mut out = BTreeMap::new();
    for simplex in base.simplices_of_dim(dim + 1) {
        let mut total = BigRational::zero();
        for p in 0..simplex.len() {
            let mut facet = simplex.clone();
            facet.remove(p);
            if let Some(value) = cochain.values.get(&facet) {
                if p % 2 == 0 {
                    total += value;
                } else {
                    total -= value;
                }
            }
        }
        out.insert(simplex.clone(), total);
    }
    out
}

/// Whether a simplex-keyed chain is closed under the simplicial boundary.
pub fn simplicial_cycle_check(values: &BTreeMap<Simplex, BigRational>) -> bool {
    let mut boundary: BTreeMap<Simplex, BigRational> = BTreeMap::new();
    for (simplex, weight) in values {
        for p in 0..simplex.len() {
            let mut facet = simplex.clone();
            facet.remove(p);
            let entry = boundary.entry(facet).or_insert_with(BigRational::zero);
            if p % 2 == 0 {
                *entry += weight;
            } else {
                *entry -= weight;
            }
        }
    }
    boundary.values().all(|v| v.is_zero())
}

/// Fundamental cycle of the base, oriented coherently from its first top
/// simplex, keyed by sorted simplices.
pub fn base_fundamental_cycle(
    base: &SimplicialComplex,
) -> Result<BTreeMap<Simplex, BigRational>, EngineError> {
    let complex = base.to_cell_complex()?;
    let class = complex.coherent_orientation(None)?;
    let fund = fundamental_class(&complex, &class)?;
    let mut out = BTreeMap::new();
    for (cell, value) in fund.iter() {
        out.insert(base.simplices()[cell].clone(), value.clone());
    }
    Ok(out)
}

/// Convenience wrapper: contexts, evaluation, and averaging in one call.
pub fn euler_cochain_for_bundle(
    bundle: &TriangulatedBundle,
    formula: Formula,
    threads: Option<usize>,
) -> Result<EulerCochain, EngineError> {
    let ctxs = bundle.contexts()?;
    euler_cochain(&ctxs, formula, threads)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{
        base_simplex2, base_solid3, circle_bundle_suite, gen_trivial, identity_order,
        n1_section_oracle,
    };

    #[test]
    fn winding_and_necklace_agree_per_tuple() {
        // Per-tuple values of the two strategies coincide; the harmonic
        // strategy normalizes differently per tuple and is compared at
        // the averaged level instead.
        let bundle = gen_trivial(base_simplex2(), 3, &identity_order(3)).unwrap();
        let ctxs = bundle.contexts().unwrap();
        let mut evaluator = Evaluator::new(&ctxs);
        let sigma = vec![0, 1, 2];
        for tuple in vertex_tuples(&bundle, &sigma) {
            let winding = evaluator
                .local_value(&sigma, &tuple, Formula::Winding)
                .unwrap();
            let necklace = evaluator
                .local_value(&sigma, &tuple, Formula::Necklace)
                .unwrap();
            assert_eq!(winding, necklace);
            assert!(winding == ratio(1, 2) || winding == ratio(-1, 2));
            let harmonic = evaluator
                .local_value(&sigma, &tuple, Formula::Harmonic)
                .unwrap();
            assert!(!harmonic.denom().is_zero());
        }
    }

    #[test]
    fn odd_vertex_permutations_negate_local_values() {
        let bundle = gen_trivial(base_simplex2(), 3, &identity_order(3)).unwrap();
        let ctxs = bundle.contexts().unwrap();
        let mut evaluator = Evaluator::new(&ctxs);
        let tuple = vertex_tuples(&bundle, &[0, 1, 2]).into_iter().next().unwrap();
        for formula in [Formula::Harmonic, Formula::Winding, Formula::Necklace] {
            let ascending = evaluator.local_value(&[0, 1, 2], &tuple, formula).unwrap();
            let swapped = evaluator.local_value(&[1, 0, 2], &tuple, formula).unwrap();
            let cycled = evaluator.local_value(&[2, 0, 1], &tuple, formula).unwrap();
            assert_eq!(swapped, -ascending.clone());
            assert_eq!(cycled, ascending);
        }
    }

    #[test]
    fn local_values_match_the_section_oracle() {
        let bundle = gen_trivial(base_simplex2(), 3, &identity_order(3)).unwrap();
        let ctxs = bundle.contexts().unwrap();
        let mut evaluator = Evaluator::new(&ctxs);
        let sigma = vec![0, 1, 2];
        for tuple in vertex_tuples(&bundle, &sigma) {
            let expected = n1_section_oracle(&ctxs, &sigma, &tuple).unwrap();
            let winding = evaluator
                .local_value(&sigma, &tuple, Formula::Winding)
                .unwrap();
            assert_eq!(winding, expected);
        }
    }

    #[test]
    fn product_bundles_have_zero_coboundary_and_pairing() {
        let bundle = gen_trivial(base_solid3(), 3, &identity_order(3)).unwrap();
        let ctxs = bundle.contexts().unwrap();
        let cochain = euler_cochain(&ctxs, Formula::Necklace, None).unwrap();
        let delta = cochain_coboundary(&cochain, bundle.base(), 2);
        assert!(delta.values().all(|v| v.is_zero()), "coboundary {delta:?}");

        let sphere = gen_trivial(crate::fixtures::base_boundary3(), 3, &identity_order(3))
            .unwrap();
        let sphere_ctxs = sphere.contexts().unwrap();
        let sphere_cochain = euler_cochain(&sphere_ctxs, Formula::Winding, None).unwrap();
        let cycle = base_fundamental_cycle(sphere.base()).unwrap();
        assert!(simplicial_cycle_check(&cycle));
        assert_eq!(
            pair_cochain_cycle(&sphere_cochain, &cycle),
            BigRational::zero()
        );
    }

    #[test]
    fn winding_chains_are_sweep_independent() {
        let bundle = gen_trivial(base_simplex2(), 3, &identity_order(3)).unwrap();
        let ctxs = bundle.contexts().unwrap();
        let mut evaluator = Evaluator::new(&ctxs);
        let sigma = vec![0, 1, 2];
        let tuple = vertex_tuples(&bundle, &sigma).into_iter().next().unwrap();
        let family = evaluator.rim_family(&sigma, &tuple).unwrap();
        let ctx = ctxs.context(&sigma).unwrap();
        let picks: Vec<Simplex> = sigma.iter().map(|v| tuple[v].clone()).collect();
        for (i, rim) in family.iter().enumerate() {
            let j = (i + 1) % sigma.len();
            let bead = ctxs.include_vertex(sigma[j], &picks[j], &sigma).unwrap();
            let w1 = winding_chain(ctx, bead, rim, SweepPlan::Forward).unwrap();
            let w2 = winding_chain(ctx, bead, rim, SweepPlan::Reverse).unwrap();
            let other = *ctx.dual().cells_of_dim(1).last().unwrap();
            let w3 = winding_chain(ctx, bead, rim, SweepPlan::From(other)).unwrap();
            assert_eq!(w1, w2);
            assert_eq!(w1, w3);
            assert_eq!(&ctx.dual().boundary(&w1).unwrap(), rim);
        }
    }

    #[test]
    fn cochain_is_identical_across_thread_counts() {
        let bundle = gen_trivial(crate::fixtures::base_boundary3(), 3, &identity_order(3))
            .unwrap();
        let ctxs = bundle.contexts().unwrap();
        let serial = euler_cochain(&ctxs, Formula::Harmonic, Some(1)).unwrap();
        let parallel = euler_cochain(&ctxs, Formula::Harmonic, Some(4)).unwrap();
        let default_pool = euler_cochain(&ctxs, Formula::Harmonic, None).unwrap();
        assert_eq!(serial, parallel);
        assert_eq!(serial, default_pool);
    }

    #[test]
    fn every_suite_member_gives_equal_formulas() {
        for (name, bundle) in circle_bundle_suite() {
            let ctxs = bundle.contexts().unwrap();
            let harmonic = euler_cochain(&ctxs, Formula::Harmonic, None).unwrap();
            let winding = euler_cochain(&ctxs, Formula::Winding, None).unwrap();
            let necklace = euler_cochain(&ctxs, Formula::Necklace, None).unwrap();
            assert_eq!(harmonic.values, winding.values, "{name}");
            assert_eq!(harmonic.values, necklace.values, "{name}");
        }
    }

    #[test]
    fn closed_form_matches_walked_words_and_examples() {
        // One bead per color in positive cyclic order.
        assert_eq!(
            necklace_closed_form(&[0, 1, 2], &[0, 1, 2]).unwrap(),
            ratio(-1, 2)
        );
        // Two beads per color, alternating.
        assert_eq!(
            necklace_closed_form(&[0, 1, 2, 0, 1, 2], &[0, 1, 2]).unwrap(),
            ratio(-1, 4)
        );
        // Reversing the word negates the value.
        assert_eq!(
            necklace_closed_form(&[2, 1, 0], &[0, 1, 2]).unwrap(),
            ratio(1, 2)
        );
        // A color missing from the word is an error.
        assert!(matches!(
            necklace_closed_form(&[0, 1, 0, 1], &[0, 1, 2]),
            Err(EngineError::IncompleteTuple(2))
        ));

        // The averaged cochain value equals the closed form of the word.
        for (name, bundle) in circle_bundle_suite() {
            let ctxs = bundle.contexts().unwrap();
            let cochain = euler_cochain(&ctxs, Formula::Necklace, None).unwrap();
            for (sigma, value) in &cochain.values {
                let ctx = ctxs.context(sigma).unwrap();
                let word = necklace_word(ctx).unwrap();
                let colors = [sigma[0], sigma[1], sigma[2]];
                let direct = necklace_closed_form(&word, &colors).unwrap();
                assert_eq!(value, &direct, "{name} {sigma:?}");
            }
        }
    }

    #[test]
    fn winding_patch_recovers_an_indicator_chain() {
        let complex = crate::fixtures::base_boundary3().to_cell_complex().unwrap();
        let dual = crate::complex::reversed_complex(&complex).unwrap();
        let tops = dual.cells_of_dim(2);
        let target = tops[0];
        let base = tops[1];
        let indicator = RationalChain::from_cell(&dual, target).unwrap();
        let rim = dual.boundary(&indicator).unwrap();
        let patch = winding_patch(&dual, &rim, SweepPlan::From(base)).unwrap();
        assert_eq!(patch, indicator);
    }

    #[test]
    fn winding_chains_are_additive_in_the_rim() {
        let bundle = gen_trivial(base_simplex2(), 3, &identity_order(3)).unwrap();
        let ctxs = bundle.contexts().unwrap();
        let ctx = ctxs.context(&[0, 1, 2]).unwrap();
        let dual = ctx.dual();
        let tops = dual.cells_of_dim(1);
        let bead = dual.cells_of_dim(0)[0];
        let one = RationalChain::from_cell(dual, tops[0]).unwrap();
        let other = RationalChain::from_cell(dual, tops[3]).unwrap();
        let rim_one = dual.boundary(&one).unwrap();
        let rim_other = dual.boundary(&other).unwrap();
        let rim_both = rim_one.add(&rim_other).unwrap();
        let w_one = winding_chain(ctx, bead, &rim_one, SweepPlan::Forward).unwrap();
        let w_other = winding_chain(ctx, bead, &rim_other, SweepPlan::Forward).unwrap();
        let w_both = winding_chain(ctx, bead, &rim_both, SweepPlan::Forward).unwrap();
        assert_eq!(w_both, w_one.add(&w_other).unwrap());
    }

    #[test]
    fn relabeling_total_vertices_leaves_the_cochain_unchanged() {
        let bundle = gen_trivial(base_simplex2(), 3, &identity_order(3)).unwrap();
        let count = bundle.total().vertex_count();
        // A fixed-point-free permutation of the nine total vertices.
        let perm: Vec<usize> = (0..count).map(|v| (v + 4) % count).collect();
        let relabeled = crate::fixtures::permute_total_vertices(&bundle, &perm).unwrap();
        for formula in [Formula::Winding, Formula::Harmonic] {
            let plain = euler_cochain_for_bundle(&bundle, formula, None).unwrap();
            let moved = euler_cochain_for_bundle(&relabeled, formula, None).unwrap();
            assert_eq!(plain.values, moved.values, "{formula}");
        }
    }

    #[test]
    fn flipping_the_fiber_orientation_negates_the_cochain() {
        let bundle = gen_trivial(base_simplex2(), 4, &identity_order(4)).unwrap();
        let flipped = bundle.flipped();
        for formula in [Formula::Harmonic, Formula::Winding, Formula::Necklace] {
            let plain = euler_cochain_for_bundle(&bundle, formula, None).unwrap();
            let negated = euler_cochain_for_bundle(&flipped, formula, None).unwrap();
            for (sigma, value) in &plain.values {
                assert_eq!(&-value.clone(), &negated.values[sigma], "{formula}");
            }
        }
    }

    #[test]
    fn evaluation_faces_must_match_fiber_dimension() {
        let bundle = gen_trivial(base_simplex2(), 3, &identity_order(3)).unwrap();
        let ctxs = bundle.contexts().unwrap();
        let mut evaluator = Evaluator::new(&ctxs);
        let tuple = vertex_tuples(&bundle, &[0, 1, 2]).into_iter().next().unwrap();
        // Evaluation faces must be one dimension above the fiber.
        assert!(matches!(
            evaluator.local_value(&[0, 1], &tuple, Formula::Necklace),
            Err(EngineError::NotEvaluationFace(_))
        ));
    }
}
