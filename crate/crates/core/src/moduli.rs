//! Strata of the moduli space of Artin-Schreier curves of genus g and the directed
//! graph C_d of closure relations between them.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;
use std::sync::Mutex;

use petgraph::unionfind::UnionFind;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::algebra::is_prime;
use crate::forms::{chain_exists_memo, fmt_multiset, groupings, ChainWitness, ExactMemo, FormConfig, FormError, FormType};

#[derive(Debug, Error)]
pub enum ModuliError {
    #[error("p = {0} is not prime")]
    NotPrime(u32),
    #[error("AS_g is empty for p = {p}, g = {g}: (p−1) does not divide 2g")]
    Empty { p: u32, g: u64 },
    #[error("partitions have different sums ({0} and {1})")]
    SumMismatch(u64, u64),
    #[error(transparent)]
    Form(#[from] FormError),
}

/// A stratum Γ_E, indexed by a partition of d+2 in descending order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Stratum {
    pub partition: Vec<u64>,
    pub dimension: u64,
}

impl Stratum {
    pub fn label(&self) -> String {
        fmt_multiset(&self.partition)
    }

    /// All parts at most p: the closure is an irreducible component.
    pub fn is_top_dimensional(&self, p: u32) -> bool {
        self.partition.iter().all(|&h| h <= p as u64)
    }
}

/// d = 2g/(p−1), or None when AS_g is empty.
pub fn conductor_degree(p: u32, g: u64) -> Option<u64> {
    let q = p as u64 - 1;
    (2 * g % q == 0).then(|| 2 * g / q)
}

/// d − 1 − Σ⌊(h−1)/p⌋ with d + 2 = Σ h.
pub fn stratum_dimension(partition: &[u64], p: u32) -> u64 {
    let d = partition.iter().sum::<u64>() - 2;
    let drop: u64 = partition.iter().map(|h| (h - 1) / p as u64).sum();
    (d + 1).saturating_sub(drop + 2)
}

fn check_prime(p: u32) -> Result<(), ModuliError> {
    if is_prime(p) {
        Ok(())
    } else {
        Err(ModuliError::NotPrime(p))
    }
}

/// Partitions of d+2 into parts ≥ 2 and ≢ 1 mod p, in reverse lexicographic order.
pub fn enumerate_strata(p: u32, g: u64) -> Result<Vec<Stratum>, ModuliError> {
    check_prime(p)?;
    let d = conductor_degree(p, g).ok_or(ModuliError::Empty { p, g })?;
    let mut out = Vec::new();
    fn rec(p: u64, left: u64, max: u64, cur: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for h in (2..=max.min(left)).rev() {
            if h % p == 1 {
                continue;
            }
            cur.push(h);
            rec(p, left - h, h, cur, out);
            cur.pop();
        }
    }
    let mut parts = Vec::new();
    rec(p as u64, d + 2, d + 2, &mut Vec::new(), &mut parts);
    for partition in parts {
        let dimension = stratum_dimension(&partition, p);
        out.push(Stratum { partition, dimension });
    }
    Ok(out)
}

/// Memo tables shared across stratum pairs and genera.
#[derive(Default)]
pub struct ModuliCache {
    pub exact: ExactMemo,
    chains: Mutex<HashMap<(u32, u64, Vec<u64>), Option<ChainWitness>>>,
}

impl ModuliCache {
    fn chain(&self, p: u32, h: u64, block: &[u64], cfg: &FormConfig) -> Result<Option<ChainWitness>, ModuliError> {
        let mut key = block.to_vec();
        key.sort_unstable_by(|a, b| b.cmp(a));
        let k = (p, h, key);
        if let Some(v) = self.chains.lock().expect("chain memo").get(&k) {
            return Ok(v.clone());
        }
        let v = chain_exists_memo(p, h, &k.2, cfg, &self.exact)?;
        self.chains.lock().expect("chain memo").insert(k, v.clone());
        Ok(v)
    }
}

/// Per-part chain witnesses of a deformation E1 → E2.
#[derive(Clone, Debug)]
pub struct DeformationWitness {
    pub parts: Vec<(u64, Vec<u64>, Option<ChainWitness>)>,
}

fn sorted_desc(v: &[u64]) -> Vec<u64> {
    let mut v = v.to_vec();
    v.sort_unstable_by(|a, b| b.cmp(a));
    v
}

/// Whether a deformation of type E1 → E2 exists, searching over block assignments of E2
/// to the parts of E1.
pub fn deformation_exists(
    e1: &[u64],
    e2: &[u64],
    p: u32,
    cfg: &FormConfig,
    cache: &ModuliCache,
) -> Result<Option<DeformationWitness>, ModuliError> {
    let (s1, s2) = (e1.iter().sum::<u64>(), e2.iter().sum::<u64>());
    if s1 != s2 {
        return Err(ModuliError::SumMismatch(s1, s2));
    }
    let parts = sorted_desc(e1);
    if parts == sorted_desc(e2) {
        let trivial = parts.iter().map(|&h| (h, vec![h], None)).collect();
        return Ok(Some(DeformationWitness { parts: trivial }));
    }
    if e2.len() <= e1.len() {
        return Ok(None);
    }
    'assignment: for blocks in groupings(e2, e1.len()) {
        if blocks.len() != parts.len() {
            continue;
        }
        let mut sums: Vec<u64> = blocks.iter().map(|b| b.iter().sum()).collect();
        sums.sort_unstable_by(|a, b| b.cmp(a));
        if sums != parts {
            continue;
        }
        let mut witness = Vec::new();
        for b in &blocks {
            let h: u64 = b.iter().sum();
            if b.len() == 1 {
                witness.push((h, b.clone(), None));
                continue;
            }
            match cache.chain(p, h, b, cfg)? {
                Some(c) => witness.push((h, b.clone(), Some(c))),
                None => continue 'assignment,
            }
        }
        return Ok(Some(DeformationWitness { parts: witness }));
    }
    Ok(None)
}

/// Whether `fine` refines `coarse` as multisets of block sums.
pub fn refines(coarse: &[u64], fine: &[u64]) -> bool {
    if coarse.iter().sum::<u64>() != fine.iter().sum::<u64>() || fine.len() < coarse.len() {
        return false;
    }
    let target = sorted_desc(coarse);
    groupings(fine, coarse.len()).into_iter().filter(|b| b.len() == coarse.len()).any(|b| {
        let sums: Vec<u64> = b.iter().map(|x| x.iter().sum()).collect();
        sorted_desc(&sums) == target
    })
}

/// The graph C_d: an edge (i, j) means Γ_i lies in the closure of Γ_j.
#[derive(Clone, Debug)]
pub struct ModuliGraph {
    pub p: u32,
    pub g: u64,
    pub d: u64,
    pub strata: Vec<Stratum>,
    pub edges: Vec<(usize, usize)>,
    /// Weakly connected components, each sorted, ordered by first member.
    pub components: Vec<Vec<usize>>,
    /// No stratum lies in the closure of this one other than itself.
    pub closed: Vec<bool>,
    pub irreducible: Vec<bool>,
}

pub fn build_graph(p: u32, g: u64) -> Result<ModuliGraph, ModuliError> {
    build_graph_with(p, g, &FormConfig::default(), &ModuliCache::default())
}

pub fn build_graph_with(p: u32, g: u64, cfg: &FormConfig, cache: &ModuliCache) -> Result<ModuliGraph, ModuliError> {
    let strata = enumerate_strata(p, g)?;
    let d = conductor_degree(p, g).expect("checked by enumerate_strata");
    let pairs: Vec<(usize, usize)> = (0..strata.len())
        .flat_map(|i| (0..strata.len()).map(move |j| (i, j)))
        .filter(|&(i, j)| strata[j].partition.len() > strata[i].partition.len())
        .collect();
    let decided: Vec<Option<(usize, usize)>> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let w = deformation_exists(&strata[i].partition, &strata[j].partition, p, cfg, cache)?;
            Ok(w.map(|_| (i, j)))
        })
        .collect::<Result<_, ModuliError>>()?;
    let edges: Vec<(usize, usize)> = decided.into_iter().flatten().collect();
    let mut uf = UnionFind::<usize>::new(strata.len());
    for &(i, j) in &edges {
        uf.union(i, j);
    }
    let mut groups: HashMap<usize, Vec<usize>> = HashMap::new();
    for i in 0..strata.len() {
        groups.entry(uf.find(i)).or_default().push(i);
    }
    let mut components: Vec<Vec<usize>> = groups.into_values().collect();
    components.sort();
    let closed = (0..strata.len()).map(|j| !edges.iter().any(|e| e.1 == j)).collect();
    let irreducible = strata.iter().map(|s| s.is_top_dimensional(p)).collect();
    Ok(ModuliGraph { p, g, d, strata, edges, components, closed, irreducible })
}

/// Closedness by the sub-multiset criterion: Γ_E is not closed iff some sub-multiset of E
/// with at least two entries is the type of an exact form.
pub fn closed_by_submultisets(partition: &[u64], p: u32, cfg: &FormConfig, cache: &ModuliCache) -> Result<bool, ModuliError> {
    let mut seen: BTreeSet<Vec<u64>> = BTreeSet::new();
    let n = partition.len();
    for mask in 1u32..(1 << n) {
        if mask.count_ones() < 2 {
            continue;
        }
        let sub: Vec<u64> = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| partition[i]).collect();
        let sub = sorted_desc(&sub);
        // Pole orders summing to 1 mod p would give order −1 mod p at infinity.
        if sub.iter().sum::<u64>() % p as u64 == 1 || !seen.insert(sub.clone()) {
            continue;
        }
        let t = FormType::new(p, &sub)?;
        let key = (p, sub);
        let cached = cache.exact.lock().expect("memo").get(&key).copied();
        let exists = match cached {
            Some(v) => v,
            None => {
                let v = crate::forms::exact_form_exists(&t, cfg)?.exists;
                cache.exact.lock().expect("memo").insert(key, v);
                v
            }
        };
        if exists == Some(true) {
            return Ok(false);
        }
    }
    Ok(true)
}

impl ModuliGraph {
    pub fn connected(&self) -> bool {
        self.components.len() <= 1
    }

    pub fn index_of(&self, partition: &[u64]) -> Option<usize> {
        let key = sorted_desc(partition);
        self.strata.iter().position(|s| s.partition == key)
    }

    pub fn has_edge(&self, from: &[u64], to: &[u64]) -> bool {
        match (self.index_of(from), self.index_of(to)) {
            (Some(a), Some(b)) => self.edges.contains(&(a, b)),
            _ => false,
        }
    }

    /// Indices of the strata in the closure of stratum i.
    pub fn closure(&self, i: usize) -> BTreeSet<usize> {
        let mut out: BTreeSet<usize> = self.edges.iter().filter(|e| e.1 == i).map(|e| e.0).collect();
        out.insert(i);
        out
    }

    /// Strata in cl(Γ_a) ∩ cl(Γ_b).
    pub fn intersection(&self, a: &[u64], b: &[u64]) -> Vec<Stratum> {
        match (self.index_of(a), self.index_of(b)) {
            (Some(a), Some(b)) => self.closure(a).intersection(&self.closure(b)).map(|&i| self.strata[i].clone()).collect(),
            _ => Vec::new(),
        }
    }

    pub fn irreducible_components(&self) -> Vec<&Stratum> {
        self.strata.iter().zip(&self.irreducible).filter(|(_, &t)| t).map(|(s, _)| s).collect()
    }

    pub fn closed_strata(&self) -> Vec<&Stratum> {
        self.strata.iter().zip(&self.closed).filter(|(_, &c)| c).map(|(s, _)| s).collect()
    }

    /// Edges (a, c) that are not implied by a path a → b → c.
    pub fn reduced_edges(&self) -> Vec<(usize, usize)> {
        self.edges
            .iter()
            .copied()
            .filter(|&(a, c)| !self.edges.iter().any(|&(x, b)| x == a && b != c && self.edges.contains(&(b, c))))
            .collect()
    }

    fn labels(&self, idx: &[usize]) -> Vec<String> {
        idx.iter().map(|&i| self.strata[i].label()).collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let strata: Vec<_> = self
            .strata
            .iter()
            .enumerate()
            .map(|(i, s)| {
                json!({
                    "partition": s.label(),
                    "dimension": s.dimension,
                    "closed": self.closed[i],
                    "irreducible_component": self.irreducible[i],
                })
            })
            .collect();
        let edges: Vec<_> = self.edges.iter().map(|&(a, b)| json!([self.strata[a].label(), self.strata[b].label()])).collect();
        let components: Vec<_> = self.components.iter().map(|c| self.labels(c)).collect();
        json!({
            "schema": "hurwitz.moduli-graph/1",
            "p": self.p,
            "g": self.g,
            "d": self.d,
            "connected": self.connected(),
            "components": components,
            "edges": edges,
            "strata": strata,
        })
    }

    /// Graphviz rendering; closed strata are double circles and components share a colour.
    pub fn to_dot(&self, transitive_reduction: bool) -> String {
        const PALETTE: [&str; 8] = ["lightblue", "lightpink", "palegreen", "khaki", "plum", "lightsalmon", "lightcyan", "wheat"];
        let mut out = String::new();
        let _ = writeln!(out, "digraph C_{} {{", self.d);
        let _ = writeln!(out, "  // p = {}, g = {}", self.p, self.g);
        for (c, comp) in self.components.iter().enumerate() {
            for &i in comp {
                let s = &self.strata[i];
                let shape = if self.closed[i] { "doublecircle" } else { "circle" };
                let _ = writeln!(
                    out,
                    "  \"{}\" [label=\"{}\\ndim {}\", shape={}, style=filled, fillcolor={}];",
                    s.label(),
                    s.label(),
                    s.dimension,
                    shape,
                    PALETTE[c % PALETTE.len()]
                );
            }
        }
        let edges = if transitive_reduction { self.reduced_edges() } else { self.edges.clone() };
        for (a, b) in edges {
            let _ = writeln!(out, "  \"{}\" -> \"{}\";", self.strata[a].label(), self.strata[b].label());
        }
        out.push_str("}\n");
        out
    }
}

/// One row of a connectivity report.
#[derive(Clone, Debug, Serialize)]
pub struct ReportRow {
    pub g: u64,
    pub d: u64,
    pub strata: usize,
    pub connected: bool,
    pub components: Vec<Vec<String>>,
    pub closed: Vec<String>,
    pub irreducible: Vec<String>,
    /// For p+3 ≤ d+2 ≤ 2p−2: whether {3,2,…,2} (d+2 odd) or {2,…,2} (d+2 even) is closed.
    pub closed_witness: Option<(String, bool)>,
}

/// The stratum {3,2,…,2} or {2,…,2} with entries summing to n.
pub fn small_stratum(n: u64) -> Vec<u64> {
    let mut v = Vec::new();
    if n % 2 == 1 {
        v.push(3);
    }
    v.extend(std::iter::repeat_n(2, ((n - 3 * (n % 2)) / 2) as usize));
    v
}

/// Connectivity verdicts for every g in the range with AS_g nonempty.
pub fn connectivity_report(p: u32, gs: impl IntoIterator<Item = u64>, cfg: &FormConfig) -> Result<Vec<ReportRow>, ModuliError> {
    check_prime(p)?;
    let cache = ModuliCache::default();
    let mut rows = Vec::new();
    for g in gs {
        if conductor_degree(p, g).is_none() {
            continue;
        }
        let graph = build_graph_with(p, g, cfg, &cache)?;
        let n = graph.d + 2;
        let pp = p as u64;
        let closed_witness = (pp + 3 <= n && n <= 2 * pp - 2).then(|| {
            let e = small_stratum(n);
            let ok = graph.index_of(&e).is_some_and(|i| graph.closed[i]);
            (fmt_multiset(&e), ok)
        });
        rows.push(ReportRow {
            g,
            d: graph.d,
            strata: graph.strata.len(),
            connected: graph.connected(),
            components: graph.components.iter().map(|c| graph.labels(c)).collect(),
            closed: graph.closed_strata().iter().map(|s| s.label()).collect(),
            irreducible: graph.irreducible_components().iter().map(|s| s.label()).collect(),
            closed_witness,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strata_of_genus_fourteen() {
        let s = enumerate_strata(5, 14).unwrap();
        let labels: Vec<String> = s.iter().map(|x| x.label()).collect();
        assert_eq!(labels, ["{9}", "{7,2}", "{5,4}", "{5,2,2}", "{4,3,2}", "{3,3,3}", "{3,2,2,2}"]);
        assert_eq!(stratum_dimension(&[9], 5), 5);
        assert_eq!(stratum_dimension(&[3, 2, 2, 2], 5), 6);
        assert_eq!(stratum_dimension(&[5, 4], 5), 6);
        assert_eq!(enumerate_strata(5, 0).unwrap().len(), 1);
        let s = enumerate_strata(7, 3).unwrap();
        assert_eq!(s[0].partition, vec![3]);
        assert!(matches!(enumerate_strata(5, 3), Err(ModuliError::Empty { .. })));
    }

    #[test]
    fn refinement() {
        assert!(refines(&[9], &[3, 2, 2, 2]));
        assert!(refines(&[7, 2], &[5, 2, 2]));
        assert!(!refines(&[7, 2], &[3, 3, 3]));
        assert_eq!(small_stratum(9), vec![3, 2, 2, 2]);
        assert_eq!(small_stratum(10), vec![2; 5]);
    }

    #[test]
    fn deformations_of_c7() {
        let cfg = FormConfig::default();
        let cache = ModuliCache::default();
        assert!(deformation_exists(&[9], &[3, 2, 2, 2], 5, &cfg, &cache).unwrap().is_some());
        assert!(deformation_exists(&[7, 2], &[3, 2, 2, 2], 5, &cfg, &cache).unwrap().is_none());
        assert!(deformation_exists(&[5, 4], &[5, 4], 5, &cfg, &cache).unwrap().is_some());
    }

    #[test]
    fn graphs_are_transitive_dags_with_consistent_closed_marking() {
        let cfg = FormConfig::default();
        let cache = ModuliCache::default();
        for (p, g) in [(5, 10), (5, 12), (5, 16), (5, 18), (7, 15), (7, 18), (7, 21), (3, 6)] {
            let gr = build_graph_with(p, g, &cfg, &cache).unwrap();
            let dg = petgraph::graph::DiGraph::<(), ()>::from_edges(gr.edges.iter().map(|&(a, b)| (a as u32, b as u32)));
            assert!(!petgraph::algo::is_cyclic_directed(&dg), "p={p} g={g}");
            for &(a, b) in &gr.edges {
                assert!(refines(&gr.strata[a].partition, &gr.strata[b].partition));
                for &(b2, c) in &gr.edges {
                    if b2 == b {
                        assert!(gr.edges.contains(&(a, c)), "p={p} g={g}: {a}->{b}->{c}");
                    }
                }
            }
            for (s, &closed) in gr.strata.iter().zip(&gr.closed) {
                assert_eq!(closed, closed_by_submultisets(&s.partition, p, &cfg, &cache).unwrap(), "p={p} g={g} {}", s.label());
            }
        }
    }
}
