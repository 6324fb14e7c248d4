//! Hurwitz trees: validation of the axioms, extraction from a cover by the
//! cluster construction, realization as an explicit cover, and extension at a leaf.

mod realize;

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{is_exact, parse_ratfunc, AlgebraError, Elem, Field, Point, RatFunc};
use crate::swan::{Cover, SwanError};
use crate::valuation::{Place, TPoly};
use crate::Q;

pub use realize::{realize_tree, RealizeOptions, Realization};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TreeError {
    #[error(transparent)]
    Swan(#[from] SwanError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("a cover with {0} branch point(s) has a trivial deformation tree; at least 2 are needed")]
    TooFewBranchPoints(usize),
    #[error("branch points are not pairwise distinct")]
    RepeatedBranchPoint,
    #[error("malformed tree: {0}")]
    Malformed(String),
    #[error("invalid tree: {0}")]
    Invalid(String),
    #[error("no leaf with index {0}")]
    NoSuchLeaf(usize),
    #[error("split {split:?} does not sum to the leaf conductor {conductor}")]
    SplitMismatch { split: Vec<u64>, conductor: u64 },
    #[error("a split must have at least two parts")]
    TrivialSplit,
    #[error("the form {0} dx is not exact")]
    NotExact(String),
    #[error("the form {form} dx does not have type {split:?}")]
    FormTypeMismatch { form: String, split: Vec<u64> },
    #[error("realization search exhausted after {attempts} candidate covers ({reason})")]
    RealizationSearchExhausted { attempts: usize, reason: String },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vertex {
    /// None only for the root.
    pub parent: Option<usize>,
    /// Thickness of the edge to the parent (zero at the root).
    pub thickness: Q,
    pub depth: Q,
    /// Differential conductor ω = omega·dx; None at the root.
    pub omega: Option<RatFunc>,
    /// Position on the parent's component.
    pub at: Option<Elem>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Leaf {
    pub vertex: usize,
    pub conductor: u64,
    pub label: String,
    /// Marked point on the component of `vertex`.
    pub at: Option<Elem>,
}

/// A Z/p-Hurwitz tree. Vertex 0 is the root; its jump is the degeneration jump d.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HurwitzTree {
    field: Field,
    pub root_jump: u64,
    pub vertices: Vec<Vertex>,
    pub leaves: Vec<Leaf>,
}

impl HurwitzTree {
    /// Tree with a root of the given depth and jump and a single leaf of conductor jump + 1.
    pub fn trivial(field: Field, depth: Q, jump: u64) -> HurwitzTree {
        HurwitzTree {
            field,
            root_jump: jump,
            vertices: vec![Vertex { parent: None, thickness: Q::zero(), depth, omega: None, at: None }],
            leaves: vec![Leaf { vertex: 0, conductor: jump + 1, label: "0".into(), at: Some(field.zero()) }],
        }
    }

    pub fn new(field: Field, root_jump: u64, vertices: Vec<Vertex>, leaves: Vec<Leaf>) -> Result<HurwitzTree, TreeError> {
        let mut t = HurwitzTree { field, root_jump, vertices, leaves };
        t.check_structure()?;
        t.infer_positions();
        Ok(t)
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn p(&self) -> u32 {
        self.field.p()
    }

    pub fn root_depth(&self) -> Q {
        self.vertices[0].depth
    }

    pub fn children(&self, v: usize) -> Vec<usize> {
        (0..self.vertices.len()).filter(|&w| self.vertices[w].parent == Some(v)).collect()
    }

    pub fn leaves_at(&self, v: usize) -> Vec<usize> {
        (0..self.leaves.len()).filter(|&b| self.leaves[b].vertex == v).collect()
    }

    /// Multiset of leaf conductors, descending.
    pub fn tree_type(&self) -> Vec<u64> {
        let mut t: Vec<u64> = self.leaves.iter().map(|l| l.conductor).collect();
        t.sort_unstable_by(|a, b| b.cmp(a));
        t
    }

    /// Conductor sum of the leaves beyond vertex v.
    pub fn conductor_beyond(&self, v: usize) -> u64 {
        let own: u64 = self.leaves_at(v).iter().map(|&b| self.leaves[b].conductor).sum();
        own + self.children(v).into_iter().map(|w| self.conductor_beyond(w)).sum::<u64>()
    }

    /// Number of edges on the longest root-to-vertex path.
    pub fn height(&self) -> usize {
        (0..self.vertices.len()).map(|v| self.level(v)).max().unwrap_or(0)
    }

    fn level(&self, mut v: usize) -> usize {
        let mut k = 0;
        while let Some(u) = self.vertices[v].parent {
            v = u;
            k += 1;
        }
        k
    }

    /// d_e for the edge into v, read at the rootward point of C_v: ord_∞(ω_v) + 1.
    pub fn edge_jump(&self, v: usize) -> Option<i64> {
        self.vertices[v].omega.as_ref().map(|w| w.form_ord_at(Point::Infinity) + 1)
    }

    fn check_structure(&self) -> Result<(), TreeError> {
        let bad = |m: &str| Err(TreeError::Malformed(m.to_string()));
        if self.vertices.is_empty() {
            return bad("no root vertex");
        }
        if self.vertices[0].parent.is_some() {
            return bad("vertex 0 must be the root");
        }
        for (i, v) in self.vertices.iter().enumerate().skip(1) {
            match v.parent {
                Some(u) if u < i => {}
                _ => return bad(&format!("vertex {i} must have a parent with a smaller id")),
            }
            if v.omega.is_none() {
                return bad(&format!("vertex {i} has no differential conductor"));
            }
            if !v.thickness.is_positive() {
                return bad(&format!("edge into vertex {i} must have positive thickness"));
            }
        }
        for (i, l) in self.leaves.iter().enumerate() {
            if l.vertex >= self.vertices.len() {
                return bad(&format!("leaf {i} hangs from a missing vertex"));
            }
        }
        if self.leaves.is_empty() {
            return bad("a tree needs at least one leaf");
        }
        Ok(())
    }

    /// Fill missing marked points by matching pole orders of the parent's ω.
    fn infer_positions(&mut self) {
        let f = self.field;
        if self.vertices.len() > 1 && self.vertices[1].at.is_none() {
            for v in self.children(0) {
                self.vertices[v].at = Some(f.zero());
            }
        }
        for b in self.leaves_at(0) {
            if self.leaves[b].at.is_none() {
                self.leaves[b].at = Some(f.zero());
            }
        }
        for v in 1..self.vertices.len() {
            let omega = self.vertices[v].omega.clone().expect("checked");
            let mut poles: Vec<(Elem, u64)> = omega
                .den()
                .factor()
                .into_iter()
                .filter(|(g, _)| g.deg() == Some(1))
                .map(|(g, e)| (f.neg(g.coeff(0)), e as u64))
                .collect();
            poles.sort();
            let mut used: Vec<Elem> = Vec::new();
            let children = self.children(v);
            let leaves = self.leaves_at(v);
            for &w in &children {
                if let Some(a) = self.vertices[w].at {
                    used.push(a);
                }
            }
            for &b in &leaves {
                if let Some(a) = self.leaves[b].at {
                    used.push(a);
                }
            }
            let take = |order: Option<u64>, used: &mut Vec<Elem>| -> Elem {
                let hit = poles.iter().find(|(a, e)| Some(*e) == order && !used.contains(a)).map(|x| x.0);
                let a = hit.unwrap_or_else(|| f.elements().find(|a| !used.contains(a) && !poles.iter().any(|p| p.0 == *a)).unwrap_or(f.zero()));
                used.push(a);
                a
            };
            for &w in &children {
                if self.vertices[w].at.is_none() {
                    let order = self.edge_jump(w).map(|d| (d + 1).max(0) as u64);
                    self.vertices[w].at = Some(take(order, &mut used));
                }
            }
            for &b in &leaves {
                if self.leaves[b].at.is_none() {
                    let order = Some(self.leaves[b].conductor);
                    self.leaves[b].at = Some(take(order, &mut used));
                }
            }
        }
    }

    /// Replace leaf `leaf` by an edge of thickness 1 to a new vertex carrying `omega` and
    /// one new leaf per pole of `omega`.
    pub fn extend(&self, leaf: usize, split: &[u64], omega: &RatFunc) -> Result<HurwitzTree, TreeError> {
        let f = self.field;
        let l = self.leaves.get(leaf).ok_or(TreeError::NoSuchLeaf(leaf))?.clone();
        if split.len() < 2 {
            return Err(TreeError::TrivialSplit);
        }
        if split.iter().sum::<u64>() != l.conductor {
            return Err(TreeError::SplitMismatch { split: split.to_vec(), conductor: l.conductor });
        }
        if !is_exact(omega).exact {
            return Err(TreeError::NotExact(omega.to_string()));
        }
        let mismatch = || TreeError::FormTypeMismatch { form: omega.to_string(), split: split.to_vec() };
        if !omega.num().is_constant() {
            return Err(mismatch());
        }
        let mut poles: Vec<(Elem, u64)> = Vec::new();
        for (g, e) in omega.den().factor() {
            if g.deg() != Some(1) {
                return Err(mismatch());
            }
            poles.push((f.neg(g.coeff(0)), e as u64));
        }
        poles.sort();
        let mut got: Vec<u64> = poles.iter().map(|x| x.1).collect();
        let mut want = split.to_vec();
        got.sort_unstable();
        want.sort_unstable();
        if got != want {
            return Err(mismatch());
        }
        let mut t = self.clone();
        let parent_depth = self.vertices[l.vertex].depth;
        t.vertices.push(Vertex {
            parent: Some(l.vertex),
            thickness: Q::one(),
            depth: parent_depth + Q::from_integer(l.conductor as i64 - 1),
            omega: Some(omega.monic_numerator()),
            at: l.at,
        });
        let v = t.vertices.len() - 1;
        t.leaves.remove(leaf);
        for (i, (a, h)) in poles.into_iter().enumerate() {
            t.leaves.push(Leaf { vertex: v, conductor: h, label: format!("{}.{}", l.label, i + 1), at: Some(a) });
        }
        Ok(t)
    }
}

/// One failed condition, with the location and the two sides that disagree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub location: String,
    pub found: String,
    pub expected: String,
    pub note: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} ≠ {}", self.location, self.found, self.expected)?;
        if !self.note.is_empty() {
            write!(f, " ({})", self.note)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AxiomCheck {
    pub axiom: String,
    pub passed: bool,
    pub violations: Vec<Violation>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<AxiomCheck>,
    /// d_e is read as ord_∞(ω_{t(e)}) + 1, i.e. at the rootward point of the child component.
    pub edge_convention: String,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, axiom: &str) -> Option<&AxiomCheck> {
        self.checks.iter().find(|c| c.axiom == axiom)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{:<8} {}", c.axiom, if c.passed { "pass" } else { "FAIL" })?;
            for v in &c.violations {
                writeln!(f, "         {v}")?;
            }
        }
        write!(f, "convention: {}", self.edge_convention)
    }
}

fn violation(location: String, found: impl ToString, expected: impl ToString, note: &str) -> Violation {
    Violation { location, found: found.to_string(), expected: expected.to_string(), note: note.to_string() }
}

/// Check (H1)–(H6), exactness of every ω_v and d_e = Σ_{leaves beyond e} h_b − 1.
pub fn validate(t: &HurwitzTree) -> ValidationReport {
    let f = t.field;
    let p = f.p() as i64;
    let mut checks: BTreeMap<&str, Vec<Violation>> = BTreeMap::new();
    for k in ["H1", "H2", "H3", "H4", "H5", "H6", "exact", "lemma"] {
        checks.insert(k, Vec::new());
    }
    let vname = |v: usize| if v == 0 { "root".to_string() } else { format!("vertex {v}") };

    if t.root_depth().is_negative() {
        checks.get_mut("H1").unwrap().push(violation(vname(0), format!("depth {}", t.root_depth()), "depth ≥ 0", ""));
    }
    for (v, vx) in t.vertices.iter().enumerate().skip(1) {
        if !vx.depth.is_positive() {
            checks.get_mut("H1").unwrap().push(violation(vname(v), format!("depth {}", vx.depth), "depth > 0", ""));
        }
        let omega = vx.omega.as_ref().expect("checked");
        let mut special: Vec<Elem> = t.children(v).iter().filter_map(|&w| t.vertices[w].at).collect();
        special.extend(t.leaves_at(v).iter().filter_map(|&b| t.leaves[b].at));
        special.sort();
        let mut poles: Vec<Elem> = Vec::new();
        let mut irrational = false;
        for (g, _) in omega.den().factor() {
            if g.deg() == Some(1) {
                poles.push(f.neg(g.coeff(0)));
            } else {
                irrational = true;
            }
        }
        poles.sort();
        let fmt_pts = |xs: &[Elem]| format!("{{{}}}", xs.iter().map(|&a| f.fmt_elem(a)).collect::<Vec<_>>().join(","));
        if poles != special || irrational {
            checks.get_mut("H2").unwrap().push(violation(
                vname(v),
                format!("poles {}", fmt_pts(&poles)),
                format!("marked and singular points {}", fmt_pts(&special)),
                "",
            ));
        }
        if !omega.num().is_constant() {
            checks.get_mut("H2").unwrap().push(violation(
                vname(v),
                format!("numerator {}", omega.num().to_string_var("x")),
                "no zeros away from ∞",
                "",
            ));
        }
        if !is_exact(omega).exact {
            checks.get_mut("exact").unwrap().push(violation(vname(v), format!("{omega} dx"), "an exact form", ""));
        }
        let parent = vx.parent.expect("non-root");
        let d_e = t.edge_jump(v).expect("non-root");
        if d_e.rem_euclid(p) == 0 {
            checks.get_mut("H3").unwrap().push(violation(format!("edge into {}", vname(v)), format!("d_e = {d_e}"), "d_e prime to p", ""));
        }
        if parent != 0 {
            let pw = t.vertices[parent].omega.as_ref().expect("non-root");
            let at = vx.at.unwrap_or(f.zero());
            let d_parent = -pw.form_ord_at(Point::Finite(at)) - 1;
            if d_parent != d_e {
                checks.get_mut("H3").unwrap().push(violation(
                    format!("edge into {}", vname(v)),
                    format!("d_e = {d_e} at the child"),
                    format!("{d_parent} at the parent"),
                    "",
                ));
            }
        }
        let expect = t.vertices[parent].depth + vx.thickness * Q::from_integer(d_e);
        if expect != vx.depth {
            checks.get_mut("H5").unwrap().push(violation(
                format!("edge into {}", vname(v)),
                vx.depth,
                expect,
                &format!("{} + {}·{}", t.vertices[parent].depth, vx.thickness, d_e),
            ));
        }
        let beyond = t.conductor_beyond(v) as i64 - 1;
        if beyond != d_e {
            checks.get_mut("lemma").unwrap().push(violation(
                format!("edge into {}", vname(v)),
                format!("d_e = {d_e}"),
                format!("Σ h_b − 1 = {beyond}"),
                "",
            ));
        }
    }
    let top = t.children(0);
    if top.is_empty() {
        let h: u64 = t.leaves_at(0).iter().map(|&b| t.leaves[b].conductor).sum();
        if h != t.root_jump + 1 {
            checks.get_mut("H4").unwrap().push(violation(vname(0), format!("conductor {}", t.root_jump + 1), format!("leaf conductor {h}"), ""));
        }
    }
    for &v in &top {
        let d_e = t.edge_jump(v).expect("non-root");
        if d_e != t.root_jump as i64 {
            checks.get_mut("H4").unwrap().push(violation(
                format!("edge into {}", vname(v)),
                t.root_jump + 1,
                d_e + 1,
                &format!("as conductors; jumps {} and {}", t.root_jump, d_e),
            ));
        }
    }
    for (b, l) in t.leaves.iter().enumerate() {
        let name = format!("leaf {b} ({})", l.label);
        if l.conductor < 2 || l.conductor % p as u64 == 1 {
            checks.get_mut("H6").unwrap().push(violation(name.clone(), l.conductor, "a conductor ≥ 2 and ≢ 1 mod p", ""));
        }
        if l.vertex == 0 {
            continue;
        }
        let omega = t.vertices[l.vertex].omega.as_ref().expect("non-root");
        let ord = -omega.form_ord_at(Point::Finite(l.at.unwrap_or(f.zero())));
        if ord != l.conductor as i64 {
            checks.get_mut("H6").unwrap().push(violation(name, format!("pole order {ord}"), format!("h_b = {}", l.conductor), ""));
        }
    }
    let checks = checks
        .into_iter()
        .map(|(k, v)| AxiomCheck { axiom: k.to_string(), passed: v.is_empty(), violations: v })
        .collect();
    ValidationReport { checks, edge_convention: "d_e = ord_∞(ω_{t(e)}) + 1 = −ord_{x_e}(ω_{s(e)}) − 1".into() }
}

/// Nested cluster of branch-point indices.
struct Cluster {
    depth: Q,
    members: Vec<usize>,
    children: Vec<Cluster>,
}

fn build_cluster(points: &[TPoly], members: Vec<usize>) -> Cluster {
    let mut depth: Option<Q> = None;
    for (i, &a) in members.iter().enumerate() {
        for &b in &members[i + 1..] {
            let v = points[a].sub(&points[b]).valuation().expect("distinct");
            depth = Some(depth.map_or(v, |d: Q| d.min(v)));
        }
    }
    let depth = depth.expect("cluster of size ≥ 2");
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for &a in &members {
        let found = groups.iter_mut().find(|g| points[g[0]].sub(&points[a]).valuation().expect("distinct") > depth);
        match found {
            Some(g) => g.push(a),
            None => groups.push(vec![a]),
        }
    }
    let mut children: Vec<Cluster> = groups
        .into_iter()
        .map(|g| {
            if g.len() == 1 {
                Cluster { depth: Q::zero(), members: g, children: Vec::new() }
            } else {
                build_cluster(points, g)
            }
        })
        .collect();
    children.sort_by_key(|c| c.members.iter().copied().min());
    Cluster { depth, members, children }
}

/// The Hurwitz tree of a cover, via its cluster picture.
pub fn tree_from_cover(c: &Cover) -> Result<HurwitzTree, TreeError> {
    let f = c.field();
    let p = Q::from_integer(c.p() as i64);
    let branch = c.branch_locus();
    if branch.len() < 2 {
        return Err(TreeError::TooFewBranchPoints(branch.len()));
    }
    let points: Vec<TPoly> = branch.iter().map(|b| b.z.clone()).collect();
    for (i, a) in points.iter().enumerate() {
        if points[i + 1..].contains(a) {
            return Err(TreeError::RepeatedBranchPoint);
        }
    }
    let root_type = c.degeneration_type(&Place::origin(f, Q::zero()))?;
    let root_jump = root_type.boundary_swan(Point::Finite(f.zero())).max(0) as u64;
    let mut t = HurwitzTree {
        field: f,
        root_jump,
        vertices: vec![Vertex { parent: None, thickness: Q::zero(), depth: root_type.depth(), omega: None, at: None }],
        leaves: Vec::new(),
    };
    let top = build_cluster(&points, (0..points.len()).collect());
    add_cluster(c, &points, &top, 0, Q::zero(), Some(f.zero()), p, &mut t)?;
    Ok(t)
}

#[allow(clippy::too_many_arguments)]
fn add_cluster(
    c: &Cover,
    points: &[TPoly],
    cl: &Cluster,
    parent: usize,
    parent_s: Q,
    at: Option<Elem>,
    p: Q,
    t: &mut HurwitzTree,
) -> Result<(), TreeError> {
    let f = c.field();
    let centre = points[cl.children[0].members[0]].clone();
    let second = points[cl.children[1].members[0]].sub(&centre);
    let u = second.leading().expect("distinct children");
    let kind = c.degeneration_type(&Place { z: centre.clone(), s: cl.depth })?;
    let omega = kind.omega().map(|w| w.pullback_form(u, f.zero()).monic_numerator());
    t.vertices.push(Vertex { parent: Some(parent), thickness: (cl.depth - parent_s) / p, depth: kind.depth(), omega, at });
    let v = t.vertices.len() - 1;
    for child in &cl.children {
        let rep = &points[child.members[0]];
        let pos = match rep.sub(&centre).leading() {
            None => f.zero(),
            Some(lead) => f.div(lead, u),
        };
        if child.members.len() == 1 {
            let b = &c.branch_locus()[child.members[0]];
            t.leaves.push(Leaf { vertex: v, conductor: b.conductor, label: b.z.to_string(), at: Some(pos) });
        } else {
            add_cluster(c, points, child, v, cl.depth, Some(pos), p, t)?;
        }
    }
    Ok(())
}

/// Canonical key of ω up to affine changes of coordinate and scaling.
fn omega_key(w: &RatFunc) -> String {
    let f = w.field();
    let poles: Vec<Elem> = w
        .den()
        .factor()
        .into_iter()
        .filter(|(g, _)| g.deg() == Some(1))
        .map(|(g, _)| f.neg(g.coeff(0)))
        .collect();
    let mut best: Option<String> = None;
    let mut consider = |u: Elem, b: Elem| {
        let s = w.pullback_form(u, b).monic_numerator().to_string();
        if best.as_ref().is_none_or(|x| s < *x) {
            best = Some(s);
        }
    };
    match poles.len() {
        0 => consider(f.one(), f.zero()),
        1 => consider(f.one(), poles[0]),
        _ => {
            for &a in &poles {
                for &b in &poles {
                    if a != b {
                        consider(f.sub(b, a), a);
                    }
                }
            }
        }
    }
    best.unwrap_or_default()
}

fn signature(t: &HurwitzTree, v: usize) -> String {
    let vx = &t.vertices[v];
    let mut parts: Vec<String> = t.children(v).into_iter().map(|w| signature(t, w)).collect();
    parts.extend(t.leaves_at(v).into_iter().map(|b| format!("h{}", t.leaves[b].conductor)));
    parts.sort();
    let omega = vx.omega.as_ref().map(omega_key).unwrap_or_default();
    format!("[{}|{}|{}|{}]", vx.depth, vx.thickness, omega, parts.join(","))
}

/// Same shape, depths, thicknesses and conductors, with each ω equal up to affine maps and scalars.
pub fn isomorphic(a: &HurwitzTree, b: &HurwitzTree) -> bool {
    a.field.p() == b.field.p() && a.root_jump == b.root_jump && signature(a, 0) == signature(b, 0)
}

#[derive(Serialize, Deserialize)]
struct RootJson {
    depth: String,
    jump: u64,
}

#[derive(Serialize, Deserialize)]
struct VertexJson {
    id: usize,
    parent: usize,
    thickness: String,
    depth: String,
    omega: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    at: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct LeafJson {
    vertex: usize,
    conductor: u64,
    #[serde(default)]
    label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    at: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct TreeJson {
    p: u32,
    #[serde(default = "one", skip_serializing_if = "is_one")]
    m: u32,
    root: RootJson,
    vertices: Vec<VertexJson>,
    leaves: Vec<LeafJson>,
}

fn one() -> u32 {
    1
}

fn is_one(m: &u32) -> bool {
    *m == 1
}

fn parse_q(s: &str) -> Result<Q, TreeError> {
    s.trim().parse::<Q>().map_err(|_| TreeError::Malformed(format!("`{s}` is not a rational number")))
}

fn parse_elem(s: &str, f: Field) -> Result<Elem, TreeError> {
    let r = parse_ratfunc(s, f)?;
    if !r.is_constant() {
        return Err(TreeError::Malformed(format!("`{s}` is not a field element")));
    }
    Ok(r.num().coeff(0))
}

impl HurwitzTree {
    pub fn to_json(&self) -> serde_json::Value {
        let f = self.field;
        let j = TreeJson {
            p: f.p(),
            m: f.m(),
            root: RootJson { depth: self.root_depth().to_string(), jump: self.root_jump },
            vertices: self
                .vertices
                .iter()
                .enumerate()
                .skip(1)
                .map(|(id, v)| VertexJson {
                    id,
                    parent: v.parent.expect("non-root"),
                    thickness: v.thickness.to_string(),
                    depth: v.depth.to_string(),
                    omega: v.omega.as_ref().expect("non-root").to_string(),
                    at: v.at.map(|a| f.fmt_elem(a)),
                })
                .collect(),
            leaves: self
                .leaves
                .iter()
                .map(|l| LeafJson { vertex: l.vertex, conductor: l.conductor, label: l.label.clone(), at: l.at.map(|a| f.fmt_elem(a)) })
                .collect(),
        };
        serde_json::to_value(j).expect("serializable")
    }

    pub fn from_json_str(s: &str) -> Result<HurwitzTree, TreeError> {
        let j: TreeJson = serde_json::from_str(s).map_err(|e| TreeError::Malformed(e.to_string()))?;
        let f = Field::new(j.p, j.m).map_err(AlgebraError::from)?;
        let mut vertices = vec![Vertex { parent: None, thickness: Q::zero(), depth: parse_q(&j.root.depth)?, omega: None, at: None }];
        let mut ids = vec![0usize];
        for v in &j.vertices {
            ids.push(v.id);
        }
        let index = |id: usize| ids.iter().position(|&x| x == id).ok_or_else(|| TreeError::Malformed(format!("unknown vertex id {id}")));
        for v in &j.vertices {
            vertices.push(Vertex {
                parent: Some(index(v.parent)?),
                thickness: parse_q(&v.thickness)?,
                depth: parse_q(&v.depth)?,
                omega: Some(parse_ratfunc(&v.omega, f)?),
                at: v.at.as_deref().map(|a| parse_elem(a, f)).transpose()?,
            });
        }
        let leaves = j
            .leaves
            .iter()
            .map(|l| {
                Ok(Leaf {
                    vertex: index(l.vertex)?,
                    conductor: l.conductor,
                    label: l.label.clone(),
                    at: l.at.as_deref().map(|a| parse_elem(a, f)).transpose()?,
                })
            })
            .collect::<Result<Vec<_>, TreeError>>()?;
        HurwitzTree::new(f, j.root.jump, vertices, leaves)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const A: &str = "p=5; F=(-2*X+t^10)/((-2)*X^5*(X-t^10)^2*(X-t^5)^5)";

    #[test]
    fn golden_tree() {
        let c = Cover::parse(A).unwrap();
        let t = tree_from_cover(&c).unwrap();
        assert_eq!(t.root_jump, 11);
        let depths: Vec<Q> = t.vertices.iter().map(|v| v.depth).collect();
        assert_eq!(depths, vec![Q::zero(), Q::from_integer(11), Q::from_integer(17)]);
        assert_eq!(t.vertices[1].omega.as_ref().unwrap().to_string(), "1/(x^7*(x-1)^5)");
        assert_eq!(t.vertices[2].omega.as_ref().unwrap().to_string(), "1/(x^4*(x-1)^3)");
        let r = validate(&t);
        assert!(r.passed(), "{r}");
        let back = HurwitzTree::from_json_str(&t.to_json().to_string()).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn extension_chain_reaches_golden_tree() {
        let f = Field::prime(5).unwrap();
        let t0 = HurwitzTree::trivial(f, Q::zero(), 11);
        let t1 = t0.extend(0, &[5, 7], &parse_ratfunc("1/(x^7*(x-1)^5)", f).unwrap()).unwrap();
        let seven = t1.leaves.iter().position(|l| l.conductor == 7).unwrap();
        let t2 = t1.extend(seven, &[4, 3], &parse_ratfunc("1/(x^4*(x-1)^3)", f).unwrap()).unwrap();
        assert!(validate(&t2).passed());
        let golden = tree_from_cover(&Cover::parse(A).unwrap()).unwrap();
        assert!(isomorphic(&t2, &golden));
        assert_eq!(t0.extend(0, &[12], &parse_ratfunc("1/x^12", f).unwrap()), Err(TreeError::TrivialSplit));
    }
}
