//! Finite regular CW complexes presented as graded posets with incidence
//! signs.
//!
//! A complex is described by the dimensions of its cells and by its
//! covering relation (codimension-one face pairs) together with a sign for
//! each such pair.  The signs satisfy the diamond condition: every interval
//! between a (p-1)-cell and a (p+1)-cell contains exactly two p-cells, and
//! the product of the four signs around the diamond is -1.  This is exactly
//! the condition making the boundary operator square to zero.
//!
//! [`assign_incidence_signs`] turns an unsigned graded poset with the
//! diamond property into a signed complex, choosing signs deterministically
//! by propagation inside each cell.  [`CellComplex::validate`] re-checks
//! everything from scratch and reports per-check results, including (for
//! complexes of dimension at most two) that cell boundaries and vertex
//! links are circles.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::sync::atomic::{AtomicU64, Ordering};

use thiserror::Error;

pub type CellId = usize;

static NEXT_TOKEN: AtomicU64 = AtomicU64::new(1);

#[derive(Debug, Error)]
pub enum ComplexError {
    #[error("covering pair ({lower}, {upper}) does not raise dimension by one")]
    BadCover { lower: CellId, upper: CellId },
    #[error("cell {cell} out of range")]
    BadCell { cell: CellId },
    #[error("diamond violation: interval ({bottom}, {top}) contains {count} middle cells")]
    DiamondViolation {
        bottom: CellId,
        top: CellId,
        count: usize,
    },
    #[error("1-cell {cell} has {count} vertices instead of two")]
    BadEdge { cell: CellId, count: usize },
    #[error("no consistent incidence signs inside cell {cell}")]
    SignInconsistency { cell: CellId },
    #[error("complex is not a closed pseudomanifold at cell {cell}")]
    NotPseudomanifold { cell: CellId },
    #[error("orientation propagation is inconsistent at cell {cell}")]
    NotOrientable { cell: CellId },
    #[error("complex has no cells of dimension {dim}")]
    EmptyDimension { dim: usize },
    #[error("top-dimensional cells are not connected through shared faces")]
    DisconnectedTop,
}

/// Unsigned input to [`assign_incidence_signs`]: cell dimensions plus the
/// covering relation of the face poset.
#[derive(Debug, Clone, Default)]
pub struct GradedPoset {
    pub dims: Vec<usize>,
    pub covers: Vec<(CellId, CellId)>,
}

impl GradedPoset {
    pub fn new(dims: Vec<usize>, covers: Vec<(CellId, CellId)>) -> Self {
        GradedPoset { dims, covers }
    }
}

/// A signed regular CW complex.  Cell ids are dense indices; `faces[c]`
/// lists the codimension-one faces of `c` with their incidence signs.
#[derive(Debug, Clone)]
pub struct CellComplex {
    dims: Vec<usize>,
    faces: Vec<Vec<(CellId, i32)>>,
    cofaces: Vec<Vec<(CellId, i32)>>,
    by_dim: Vec<Vec<CellId>>,
    top_dim: usize,
    token: u64,
}

impl CellComplex {
    /// Builds a complex from already-signed covering pairs.  Grading is
    /// checked; the diamond sign condition is checked cell by cell.
    pub fn from_signed(
        dims: Vec<usize>,
        signed_covers: Vec<(CellId, CellId, i32)>,
    ) -> Result<Self, ComplexError> {
        let n = dims.len();
        let mut faces = vec![Vec::new(); n];
        let mut cofaces = vec![Vec::new(); n];
        for &(lo, hi, sign) in &signed_covers {
            if lo >= n || hi >= n {
                return Err(ComplexError::BadCell {
                    cell: lo.max(hi),
                });
            }
            if dims[lo] + 1 != dims[hi] {
                return Err(ComplexError::BadCover { lower: lo, upper: hi });
            }
            faces[hi].push((lo, sign));
            cofaces[lo].push((hi, sign));
        }
        for list in faces.iter_mut().chain(cofaces.iter_mut()) {
            list.sort_unstable_by_key(|&(c, _)| c);
        }
        let top_dim = dims.iter().copied().max().unwrap_or(0);
        let mut by_dim = vec![Vec::new(); top_dim + 1];
        for (c, &d) in dims.iter().enumerate() {
            by_dim[d].push(c);
        }
        let complex = CellComplex {
            dims,
            faces,
            cofaces,
            by_dim,
            top_dim,
            token: NEXT_TOKEN.fetch_add(1, Ordering::Relaxed),
        };
        complex.check_diamonds(true)?;
        Ok(complex)
    }

    pub fn token(&self) -> u64 {
        self.token
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn dim_of(&self, cell: CellId) -> usize {
        self.dims[cell]
    }

    pub fn top_dim(&self) -> usize {
        self.top_dim
    }

    pub fn cells_of_dim(&self, d: usize) -> &[CellId] {
        self.by_dim.get(d).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn faces(&self, cell: CellId) -> &[(CellId, i32)] {
        &self.faces[cell]
    }

    pub fn cofaces(&self, cell: CellId) -> &[(CellId, i32)] {
        &self.cofaces[cell]
    }

    /// Incidence sign between a codimension-one pair, zero if unrelated.
    pub fn incidence(&self, face: CellId, cell: CellId) -> i32 {
        self.faces[cell]
            .iter()
            .find(|&&(f, _)| f == face)
            .map(|&(_, s)| s)
            .unwrap_or(0)
    }

    /// All cells in the closure of `cell` (including itself).
    pub fn closure(&self, cell: CellId) -> BTreeSet<CellId> {
        let mut seen = BTreeSet::new();
        let mut stack = vec![cell];
        while let Some(c) = stack.pop() {
            if seen.insert(c) {
                for &(f, _) in &self.faces[c] {
                    stack.push(f);
                }
            }
        }
        seen
    }

    /// All cells whose closure contains `cell` (including itself).
    pub fn star(&self, cell: CellId) -> BTreeSet<CellId> {
        let mut seen = BTreeSet::new();
        let mut stack = vec![cell];
        while let Some(c) = stack.pop() {
            if seen.insert(c) {
                for &(f, _) in &self.cofaces[c] {
                    stack.push(f);
                }
            }
        }
        seen
    }

    /// Top-dimensional cells whose closure contains `cell`.
    pub fn incident_tops(&self, cell: CellId) -> Vec<CellId> {
        self.star(cell)
            .into_iter()
            .filter(|&c| self.dims[c] == self.top_dim)
            .collect()
    }

    fn diamond_counts(&self) -> BTreeMap<(CellId, CellId), (usize, i64)> {
        // For every related pair (e, c) with dim c = dim e + 2, count the
        // middle cells and accumulate the diamond sign sum.
        let mut map: BTreeMap<(CellId, CellId), (usize, i64)> = BTreeMap::new();
        for c in 0..self.len() {
            for &(f, s1) in &self.faces[c] {
                for &(e, s2) in &self.faces[f] {
                    let entry = map.entry((e, c)).or_insert((0, 0));
                    entry.0 += 1;
                    entry.1 += i64::from(s1) * i64::from(s2);
                }
            }
        }
        map
    }

    fn check_diamonds(&self, signed: bool) -> Result<(), ComplexError> {
        for ((e, c), (count, signsum)) in self.diamond_counts() {
            if count != 2 {
                return Err(ComplexError::DiamondViolation {
                    bottom: e,
                    top: c,
                    count,
                });
            }
            if signed && signsum != 0 {
                return Err(ComplexError::SignInconsistency { cell: c });
            }
        }
        for &c in self.cells_of_dim(1) {
            if self.faces[c].len() != 2 {
                return Err(ComplexError::BadEdge {
                    cell: c,
                    count: self.faces[c].len(),
                });
            }
        }
        Ok(())
    }

    /// Full structural validation.  Never panics on malformed input: every
    /// check simply reports pass or fail.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();

        let mut edges_ok = true;
        let mut edge_detail = None;
        for &c in self.cells_of_dim(1) {
            if self.faces[c].len() != 2 {
                edges_ok = false;
                edge_detail = Some(format!("1-cell {} has {} vertices", c, self.faces[c].len()));
                break;
            }
        }
        report.push("edges_have_two_vertices", edges_ok, edge_detail);

        let mut diamond_ok = true;
        let mut dd_ok = true;
        let mut diamond_detail = None;
        let mut dd_detail = None;
        for ((e, c), (count, signsum)) in self.diamond_counts() {
            if count != 2 && diamond_ok {
                diamond_ok = false;
                diamond_detail = Some(format!("interval ({e}, {c}) has {count} middles"));
            }
            if signsum != 0 && dd_ok {
                dd_ok = false;
                dd_detail = Some(format!("boundary squared is nonzero on ({e}, {c})"));
            }
        }
        report.push("diamond_property", diamond_ok, diamond_detail);
        report.push("boundary_squares_to_zero", dd_ok, dd_detail);

        let mut pseudo_ok = !self.cells_of_dim(self.top_dim).is_empty();
        let mut pseudo_detail = if pseudo_ok {
            None
        } else {
            Some("no top-dimensional cells".to_string())
        };
        if self.top_dim > 0 {
            for &c in self.cells_of_dim(self.top_dim - 1) {
                let count = self.cofaces[c].len();
                if count != 2 {
                    pseudo_ok = false;
                    pseudo_detail =
                        Some(format!("codimension-one cell {c} has {count} cofaces"));
                    break;
                }
            }
        }
        report.push("pseudomanifold_two_cofaces", pseudo_ok, pseudo_detail);

        let connected = self.is_connected();
        report.push("connected", connected, None);

        let orientable = pseudo_ok
            && connected
            && self
                .coherent_orientation(self.cells_of_dim(self.top_dim).first().copied())
                .is_ok();
        report.push("orientable", orientable, None);

        if self.top_dim <= 2 {
            let (ok, detail) = self.low_dim_sphere_checks();
            report.push("low_dimensional_links", ok, detail);
        }

        report
    }

    fn is_connected(&self) -> bool {
        if self.is_empty() {
            return true;
        }
        let mut seen = vec![false; self.len()];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(c) = queue.pop_front() {
            for &(d, _) in self.faces[c].iter().chain(self.cofaces[c].iter()) {
                if !seen[d] {
                    seen[d] = true;
                    count += 1;
                    queue.push_back(d);
                }
            }
        }
        count == self.len()
    }

    /// For top dimension at most two: boundaries of 2-cells and links of
    /// vertices must be single circles, and in dimension one the whole
    /// complex must be a disjoint union of circles locally (every vertex
    /// with exactly two incident edges).
    fn low_dim_sphere_checks(&self) -> (bool, Option<String>) {
        match self.top_dim {
            0 | 1 => {
                if self.top_dim == 1 {
                    for &v in self.cells_of_dim(0) {
                        if self.cofaces[v].len() != 2 {
                            return (
                                false,
                                Some(format!(
                                    "vertex {v} has {} incident edges",
                                    self.cofaces[v].len()
                                )),
                            );
                        }
                    }
                }
                (true, None)
            }
            2 => {
                for &c in self.cells_of_dim(2) {
                    let edge_cells: Vec<CellId> =
                        self.faces[c].iter().map(|&(f, _)| f).collect();
                    let mut vertex_deg: BTreeMap<CellId, usize> = BTreeMap::new();
                    for &e in &edge_cells {
                        for &(v, _) in &self.faces[e] {
                            *vertex_deg.entry(v).or_insert(0) += 1;
                        }
                    }
                    let cycle = vertex_deg.values().all(|&d| d == 2)
                        && vertex_deg.len() == edge_cells.len()
                        && is_single_cycle(&edge_cells, |e| {
                            self.faces[e].iter().map(|&(v, _)| v).collect()
                        });
                    if !cycle {
                        return (false, Some(format!("boundary of 2-cell {c} is not a circle")));
                    }
                }
                for &v in self.cells_of_dim(0) {
                    let link_edges: Vec<CellId> = self.cofaces[v]
                        .iter()
                        .map(|&(e, _)| e)
                        .filter(|&e| self.dims[e] == 1)
                        .collect();
                    let link_faces: Vec<CellId> = self
                        .star(v)
                        .into_iter()
                        .filter(|&c| self.dims[c] == 2)
                        .collect();
                    // In the vertex link, incident 1-cells are nodes and
                    // incident 2-cells join the two incident 1-cells they
                    // cover.
                    let mut ok = link_edges.len() == link_faces.len() && !link_edges.is_empty();
                    if ok {
                        ok = is_single_cycle(&link_faces, |c| {
                            self.faces[c]
                                .iter()
                                .map(|&(e, _)| e)
                                .filter(|e| link_edges.contains(e))
                                .collect()
                        });
                    }
                    if !ok {
                        return (false, Some(format!("link of vertex {v} is not a circle")));
                    }
                }
                (true, None)
            }
            _ => (true, None),
        }
    }

    /// Coherent orientation of the top cells, propagated from a reference
    /// cell carrying sign +1.
    pub fn coherent_orientation(
        &self,
        reference: Option<CellId>,
    ) -> Result<OrientationClass, ComplexError> {
        let tops = self.cells_of_dim(self.top_dim);
        let reference = reference
            .or_else(|| tops.first().copied())
            .ok_or(ComplexError::EmptyDimension { dim: self.top_dim })?;
        if self.top_dim == 0 {
            // A zero-dimensional closed manifold: orient every point +1.
            let signs = tops.iter().map(|&c| (c, 1)).collect();
            return Ok(OrientationClass { signs, reference });
        }
        let mut signs: BTreeMap<CellId, i32> = BTreeMap::new();
        signs.insert(reference, 1);
        let mut queue = VecDeque::from([reference]);
        while let Some(c) = queue.pop_front() {
            let sc = signs[&c];
            for &(f, s_fc) in &self.faces[c] {
                if self.dims[f] + 1 != self.top_dim {
                    continue;
                }
                let cof = &self.cofaces[f];
                if cof.len() != 2 {
                    return Err(ComplexError::NotPseudomanifold { cell: f });
                }
                for &(other, s_fo) in cof {
                    if other == c {
                        continue;
                    }
                    // Coherence across f: sc * s_fc + so * s_fo = 0.
                    let so = -sc * s_fc * s_fo;
                    match signs.get(&other) {
                        None => {
                            signs.insert(other, so);
                            queue.push_back(other);
                        }
                        Some(&prev) if prev != so => {
                            return Err(ComplexError::NotOrientable { cell: f });
                        }
                        _ => {}
                    }
                }
            }
        }
        if signs.len() != tops.len() {
            return Err(ComplexError::DisconnectedTop);
        }
        Ok(OrientationClass { signs, reference })
    }
}

fn is_single_cycle<F>(edges: &[CellId], endpoints: F) -> bool
where
    F: Fn(CellId) -> Vec<CellId>,
{
    // `edges` are abstract edges over node ids returned by `endpoints`;
    // checks that they form exactly one closed cycle covering all of them.
    if edges.is_empty() {
        return false;
    }
    let mut adj: BTreeMap<CellId, Vec<usize>> = BTreeMap::new();
    for (i, &e) in edges.iter().enumerate() {
        let ends = endpoints(e);
        if ends.len() != 2 || ends[0] == ends[1] {
            return false;
        }
        for v in ends {
            adj.entry(v).or_default().push(i);
        }
    }
    if adj.values().any(|l| l.len() != 2) {
        return false;
    }
    let mut seen = vec![false; edges.len()];
    let mut frontier = vec![0usize];
    seen[0] = true;
    let mut count = 1;
    while let Some(i) = frontier.pop() {
        for v in endpoints(edges[i]) {
            for &j in &adj[&v] {
                if !seen[j] {
                    seen[j] = true;
                    count += 1;
                    frontier.push(j);
                }
            }
        }
    }
    count == edges.len()
}

/// Coherent signs on the top-dimensional cells of a complex, with one cell
/// singled out as the externally pinned reference.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrientationClass {
    pub signs: BTreeMap<CellId, i32>,
    pub reference: CellId,
}

impl OrientationClass {
    pub fn sign(&self, cell: CellId) -> i32 {
        self.signs.get(&cell).copied().unwrap_or(0)
    }

    pub fn negated(&self) -> OrientationClass {
        OrientationClass {
            signs: self.signs.iter().map(|(&c, &s)| (c, -s)).collect(),
            reference: self.reference,
        }
    }
}

/// Assigns incidence signs to an unsigned graded poset with the diamond
/// property.  Signs are chosen dimension by dimension; inside each cell the
/// relative signs of its facets are forced by the diamonds through
/// already-signed lower cells, so the result is deterministic given the
/// cell numbering.
pub fn assign_incidence_signs(poset: &GradedPoset) -> Result<CellComplex, ComplexError> {
    let n = poset.dims.len();
    let mut faces: Vec<Vec<CellId>> = vec![Vec::new(); n];
    for &(lo, hi) in &poset.covers {
        if lo >= n || hi >= n {
            return Err(ComplexError::BadCell { cell: lo.max(hi) });
        }
        if poset.dims[lo] + 1 != poset.dims[hi] {
            return Err(ComplexError::BadCover { lower: lo, upper: hi });
        }
        faces[hi].push(lo);
    }
    for list in faces.iter_mut() {
        list.sort_unstable();
        list.dedup();
    }

    // Unsigned diamond check up front so sign propagation cannot loop on
    // malformed intervals.
    {
        let mut counts: BTreeMap<(CellId, CellId), usize> = BTreeMap::new();
        for c in 0..n {
            for &f in &faces[c] {
                for &e in &faces[f] {
                    *counts.entry((e, c)).or_insert(0) += 1;
                }
            }
        }
        for ((e, c), count) in counts {
            if count != 2 {
                return Err(ComplexError::DiamondViolation {
                    bottom: e,
                    top: c,
                    count,
                });
            }
        }
    }

    let mut order: Vec<CellId> = (0..n).collect();
    order.sort_unstable_by_key(|&c| (poset.dims[c], c));

    let mut sign: BTreeMap<(CellId, CellId), i32> = BTreeMap::new();
    for &c in &order {
        let d = poset.dims[c];
        if d == 0 {
            continue;
        }
        if d == 1 {
            if faces[c].len() != 2 {
                return Err(ComplexError::BadEdge {
                    cell: c,
                    count: faces[c].len(),
                });
            }
            sign.insert((faces[c][0], c), -1);
            sign.insert((faces[c][1], c), 1);
            continue;
        }
        // Relative-sign constraints between facets f1, f2 of c sharing a
        // codimension-two cell e: s1*inc(e,f1) + s2*inc(e,f2) = 0.
        let facets = &faces[c];
        let mut shared: BTreeMap<CellId, Vec<usize>> = BTreeMap::new();
        for (i, &f) in facets.iter().enumerate() {
            for &e in &faces[f] {
                shared.entry(e).or_default().push(i);
            }
        }
        let mut adj: Vec<Vec<(usize, i32)>> = vec![Vec::new(); facets.len()];
        for (e, middle) in shared {
            if middle.len() != 2 {
                return Err(ComplexError::DiamondViolation {
                    bottom: e,
                    top: c,
                    count: middle.len(),
                });
            }
            let (i, j) = (middle[0], middle[1]);
            let si = sign[&(e, facets[i])];
            let sj = sign[&(e, facets[j])];
            // s_i = -(si*sj) * s_j
            let rel = -si * sj;
            adj[i].push((j, rel));
            adj[j].push((i, rel));
        }
        let mut assigned: Vec<i32> = vec![0; facets.len()];
        for start in 0..facets.len() {
            if assigned[start] != 0 {
                continue;
            }
            assigned[start] = 1;
            let mut queue = VecDeque::from([start]);
            while let Some(i) = queue.pop_front() {
                for &(j, rel) in &adj[i] {
                    let expect = assigned[i] * rel;
                    if assigned[j] == 0 {
                        assigned[j] = expect;
                        queue.push_back(j);
                    } else if assigned[j] != expect {
                        return Err(ComplexError::SignInconsistency { cell: c });
                    }
                }
            }
        }
        for (i, &f) in facets.iter().enumerate() {
            sign.insert((f, c), assigned[i]);
        }
    }

    let signed_covers = sign
        .into_iter()
        .map(|((lo, hi), s)| (lo, hi, s))
        .collect();
    CellComplex::from_signed(poset.dims.clone(), signed_covers)
}

/// Outcome of a named structural check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: Option<String>,
}

/// Ordered list of check outcomes with a stable text rendering.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn push(&mut self, name: &str, passed: bool, detail: Option<String>) {
        self.checks.push(CheckResult {
            name: name.to_string(),
            passed,
            detail,
        });
    }

    pub fn merge_prefixed(&mut self, prefix: &str, other: ValidationReport) {
        for check in other.checks {
            self.checks.push(CheckResult {
                name: format!("{prefix}.{}", check.name),
                passed: check.passed,
                detail: check.detail,
            });
        }
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for check in &self.checks {
            out.push_str(&check.name);
            out.push_str(": ");
            out.push_str(if check.passed { "PASS" } else { "FAIL" });
            if let Some(detail) = &check.detail {
                out.push_str(" (");
                out.push_str(detail);
                out.push(')');
            }
            out.push('\n');
        }
        out
    }
}

/// Reverses the face poset of a complex, complementing the grading at
/// `top_dim`.  Cell ids are preserved, which keeps the correspondence
/// between a complex and its dual explicit.  Signs are reassigned by
/// [`assign_incidence_signs`]; the diamond property is self-dual, so a
/// valid complex always reverses.
pub fn reversed_complex(complex: &CellComplex) -> Result<CellComplex, ComplexError> {
    let top = complex.top_dim();
    let dims = (0..complex.len())
        .map(|c| top - complex.dim_of(c))
        .collect();
    let mut covers = Vec::new();
    for c in 0..complex.len() {
        for &(f, _) in complex.faces(c) {
            // f covers c in the reversed order.
            covers.push((c, f));
        }
    }
    assign_incidence_signs(&GradedPoset::new(dims, covers))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Triangle circle: vertices A=0, B=1, C=2; edges AB=3, AC=4, BC=5.
    pub fn triangle_circle() -> CellComplex {
        let poset = GradedPoset::new(
            vec![0, 0, 0, 1, 1, 1],
            vec![(0, 3), (1, 3), (0, 4), (2, 4), (1, 5), (2, 5)],
        );
        assign_incidence_signs(&poset).unwrap()
    }

    #[test]
    fn edge_signs_follow_id_order() {
        let c = triangle_circle();
        // Smaller-id endpoint gets -1: the edge points from A to B.
        assert_eq!(c.incidence(0, 3), -1);
        assert_eq!(c.incidence(1, 3), 1);
    }

    #[test]
    fn triangle_circle_validates() {
        let c = triangle_circle();
        let report = c.validate();
        assert!(report.all_passed(), "{}", report.render());
    }

    #[test]
    fn sphere_of_tetrahedron_signs_square_to_zero() {
        // Boundary of the tetrahedron as a poset: 4 vertices, 6 edges,
        // 4 triangles.
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
        let complex = assign_incidence_signs(&GradedPoset::new(dims, covers)).unwrap();
        let report = complex.validate();
        assert!(report.all_passed(), "{}", report.render());
        let orientation = complex.coherent_orientation(None).unwrap();
        assert_eq!(orientation.signs.len(), 4);
    }

    #[test]
    fn three_middles_is_rejected() {
        // One vertex pair, three edges between them, one 2-cell on all
        // three edges: the interval (vertex, 2-cell) has three middles.
        let poset = GradedPoset::new(
            vec![0, 0, 1, 1, 1, 2],
            vec![
                (0, 2),
                (1, 2),
                (0, 3),
                (1, 3),
                (0, 4),
                (1, 4),
                (2, 5),
                (3, 5),
                (4, 5),
            ],
        );
        match assign_incidence_signs(&poset) {
            Err(ComplexError::DiamondViolation { count: 3, .. }) => {}
            other => panic!("expected diamond violation, got {other:?}"),
        }
    }

    #[test]
    fn theta_sheets_fail_two_coface_check() {
        // Three 2-cells glued along one common boundary circle.
        let mut dims = vec![0, 0, 0, 1, 1, 1];
        dims.extend(vec![2; 3]);
        let mut covers = vec![(0, 3), (1, 3), (0, 4), (2, 4), (1, 5), (2, 5)];
        for sheet in 6..9 {
            covers.push((3, sheet));
            covers.push((4, sheet));
            covers.push((5, sheet));
        }
        let complex = assign_incidence_signs(&GradedPoset::new(dims, covers)).unwrap();
        let report = complex.validate();
        let pseudo = report
            .checks
            .iter()
            .find(|c| c.name == "pseudomanifold_two_cofaces")
            .unwrap();
        assert!(!pseudo.passed);
    }

    fn surface_poset(vertices: usize, tris: &[[usize; 3]]) -> GradedPoset {
        let mut edge_ids: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut dims = vec![0; vertices];
        let mut covers = Vec::new();
        for t in tris {
            for &(a, b) in &[(t[0], t[1]), (t[0], t[2]), (t[1], t[2])] {
                let key = (a.min(b), a.max(b));
                if !edge_ids.contains_key(&key) {
                    let id = dims.len();
                    dims.push(1);
                    covers.push((key.0, id));
                    covers.push((key.1, id));
                    edge_ids.insert(key, id);
                }
            }
        }
        for t in tris {
            let tid = dims.len();
            dims.push(2);
            for &(a, b) in &[(t[0], t[1]), (t[0], t[2]), (t[1], t[2])] {
                covers.push((edge_ids[&(a.min(b), a.max(b))], tid));
            }
        }
        GradedPoset::new(dims, covers)
    }

    #[test]
    fn projective_plane_is_not_orientable() {
        // Minimal six-vertex triangulation of the real projective plane.
        let tris: Vec<[usize; 3]> = vec![
            [0, 1, 4],
            [0, 1, 5],
            [0, 2, 3],
            [0, 2, 5],
            [0, 3, 4],
            [1, 2, 3],
            [1, 2, 4],
            [1, 3, 5],
            [2, 4, 5],
            [3, 4, 5],
        ];
        let complex = assign_incidence_signs(&surface_poset(6, &tris)).unwrap();
        let report = complex.validate();
        assert!(
            report
                .checks
                .iter()
                .find(|c| c.name == "pseudomanifold_two_cofaces")
                .unwrap()
                .passed,
            "{}",
            report.render()
        );
        match complex.coherent_orientation(None) {
            Err(ComplexError::NotOrientable { .. }) => {}
            other => panic!("expected NotOrientable, got {other:?}"),
        }
    }

    #[test]
    fn reversal_preserves_validity() {
        let c = triangle_circle();
        let dual = reversed_complex(&c).unwrap();
        assert_eq!(dual.top_dim(), 1);
        assert!(dual.validate().all_passed());
        // Vertices of the dual are the edges of the circle.
        for cell in 0..c.len() {
            assert_eq!(dual.dim_of(cell), 1 - c.dim_of(cell));
        }
    }
}
