//! The Bruhat–Tits tree of SU(3) over Q_p, realized on τ-invariant lattices
//! of the hermitian space with gram t·diag(p, 1, p) over W(F_{p^2}).
//!
//! Type-1 vertices are superspecial lattices (pM^∨ ⊂^1 M ⊂^2 M^∨), type-3
//! vertices the self-dual ones. Edges are inclusions M ⊂ Λ.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::gf::{Fe, Gf};
use crate::hermlattice::{gram_schmidt_normalize, vertex_type, HermitianLattice, HermitianSpace, LatticeKey};
use crate::isocrystal::{j_neighbor, j_tilde};
use crate::mat::Mat;
use crate::strata::{FiniteHermSpace, FormKind};
use crate::witt::{make_context, max_enum, Ctx, Witt};

/// Working precision for building arithmetic; enough for balls of radius 5.
pub const BUILDING_PRECISION: u32 = 12;

/// Precision that keeps every lattice of a ball of the given radius inside
/// the HNF budget (indices grow by about one per two steps, plus guard and
/// the Gram–Schmidt loss).
pub fn precision_for_radius(radius: usize) -> u32 {
    BUILDING_PRECISION.max(2 * radius as u32 + 4)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeVertex {
    pub key: LatticeKey,
    pub vtype: u32,
    pub lattice: HermitianLattice,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Intersection {
    Equal,
    OnePoint,
    Disjoint,
}

pub struct Building {
    ctx: Ctx,
    space: Arc<HermitianSpace>,
    reps: Vec<(Witt, Witt)>,
    // ℓ^⊥ for every isotropic line ℓ of (F_{p^2})^3 with form t̄·I
    perps: Vec<Vec<Vec<Fe>>>,
}

impl Building {
    pub fn new(p: u64) -> Result<Self> {
        Self::with_precision(p, BUILDING_PRECISION)
    }

    pub fn with_precision(p: u64, n: u32) -> Result<Self> {
        let ctx = make_context(p, 1, n)?;
        let space = HermitianSpace::scaled_diagonal(ctx.clone(), &[1, 0, 1]);
        let gf: &Gf = ctx.residue_field();
        let reps = j_tilde(gf).into_iter().map(|(l, m)| (ctx.teichmuller(l), ctx.teichmuller(m))).collect();
        let fs = FiniteHermSpace::with_field(Arc::new(gf.clone()), 3, FormKind::Identity);
        let perps = fs.isotropic_lines()?.iter().map(|l| fs.perp(l).basis).collect();
        Ok(Building { ctx, space, reps, perps })
    }

    pub fn p(&self) -> u64 {
        self.ctx.p()
    }
    pub fn ctx(&self) -> &Ctx {
        &self.ctx
    }
    pub fn space(&self) -> &Arc<HermitianSpace> {
        &self.space
    }

    /// Wraps a lattice as a vertex, rejecting anything that is not a
    /// τ-invariant lattice of type 1 or 3.
    pub fn vertex(&self, lattice: HermitianLattice) -> Result<TreeVertex> {
        let vtype = vertex_type(&lattice, 0)?;
        if vtype != 1 && vtype != 3 {
            return Err(Error::NotAVertex(format!("type {vtype}")));
        }
        Ok(TreeVertex { key: lattice.key(), vtype, lattice })
    }

    /// The standard lattice (type 1) or its first neighbour (type 3).
    pub fn center(&self, vtype: u32) -> Result<TreeVertex> {
        let std = self.vertex(HermitianLattice::standard(&self.space))?;
        match vtype {
            1 => Ok(std),
            3 => Ok(self.neighbors_of_type1(&std)?.swap_remove(0)),
            _ => Err(Error::InvalidParameter(format!("center type must be 1 or 3, got {vtype}"))),
        }
    }

    pub fn neighbors_of_type1(&self, m: &TreeVertex) -> Result<Vec<TreeVertex>> {
        if m.vtype != 1 {
            return Err(Error::NotAVertex("expected a type-1 vertex".into()));
        }
        let nb = gram_schmidt_normalize(&m.lattice, 1, 2)?.permuted(&[1, 0, 2]);
        self.reps
            .iter()
            .map(|(l, mu)| {
                let lat = j_neighbor(&self.space, &nb.cols, nb.denom, *l, *mu)?;
                Ok(TreeVertex { key: lat.key(), vtype: 3, lattice: lat })
            })
            .collect()
    }

    pub fn neighbors_of_type3(&self, lam: &TreeVertex) -> Result<Vec<TreeVertex>> {
        if lam.vtype != 3 {
            return Err(Error::NotAVertex("expected a type-3 vertex".into()));
        }
        let c = &self.ctx;
        let nb = gram_schmidt_normalize(&lam.lattice, 3, 0)?;
        let p_lam = nb.cols.shl(c, 1);
        self.perps
            .iter()
            .map(|u| {
                let lifts: Vec<Vec<Witt>> = u
                    .iter()
                    .map(|row| {
                        let coeff: Vec<Witt> = row.iter().map(|&a| c.teichmuller(a)).collect();
                        nb.cols.apply(c, &coeff)
                    })
                    .collect();
                let gens = p_lam.hconcat(&Mat::from_cols(3, &lifts));
                let lat = HermitianLattice::from_generators(&self.space, &gens, nb.denom)?;
                Ok(TreeVertex { key: lat.key(), vtype: 1, lattice: lat })
            })
            .collect()
    }

    pub fn neighbors(&self, v: &TreeVertex) -> Result<Vec<TreeVertex>> {
        if v.vtype == 1 {
            self.neighbors_of_type1(v)
        } else {
            self.neighbors_of_type3(v)
        }
    }

    /// Number of vertices of a ball, from the valences p+1 and p³+1.
    pub fn ball_size(p: u64, center_type: u32, radius: usize) -> u128 {
        let (p, mut level, mut t) = (p as u128, 1u128, center_type);
        let mut total = 1u128;
        for r in 0..radius {
            let deg = if t == 1 { p + 1 } else { p * p * p + 1 };
            level = level.saturating_mul(if r == 0 { deg } else { deg - 1 });
            total = total.saturating_add(level);
            t = 4 - t;
        }
        total
    }

    /// Vertex budget for [`Building::ball`].
    pub fn max_ball_vertices() -> u128 {
        max_enum() >> 10
    }

    pub fn ball(&self, center: &TreeVertex, radius: usize) -> Result<TreeGraph> {
        let needed = Self::ball_size(self.p(), center.vtype, radius);
        let bound = Self::max_ball_vertices();
        if needed > bound {
            return Err(Error::BoundExceeded { needed, bound });
        }
        let mut g = TreeGraph {
            p: self.p(),
            radius,
            center: center.key.clone(),
            vertices: BTreeMap::new(),
            depth: BTreeMap::new(),
            edges: BTreeSet::new(),
        };
        g.vertices.insert(center.key.clone(), center.clone());
        g.depth.insert(center.key.clone(), 0);
        let mut frontier = vec![center.clone()];
        for r in 0..radius {
            let expanded = frontier.par_iter().map(|v| self.neighbors(v)).collect::<Result<Vec<_>>>()?;
            let mut next = Vec::new();
            for (v, nbrs) in frontier.iter().zip(expanded) {
                for w in nbrs {
                    g.edges.insert(edge(&v.key, &w.key));
                    if !g.vertices.contains_key(&w.key) {
                        g.depth.insert(w.key.clone(), r + 1);
                        g.vertices.insert(w.key.clone(), w.clone());
                        next.push(w);
                    }
                }
            }
            next.sort_by(|a, b| a.key.cmp(&b.key));
            frontier = next;
        }
        Ok(g)
    }

    pub fn intersection_multiplicity(&self, a: &TreeVertex, b: &TreeVertex) -> Result<(Intersection, Option<HermitianLattice>)> {
        if a.vtype != 3 || b.vtype != 3 {
            return Err(Error::NotAVertex("expected type-3 vertices".into()));
        }
        if a.key == b.key {
            return Ok((Intersection::Equal, None));
        }
        let i = a.lattice.intersect(&b.lattice)?;
        let one = i.is_tau_invariant()? && matches!(vertex_type(&i, 0), Ok(1));
        Ok(if one { (Intersection::OnePoint, Some(i)) } else { (Intersection::Disjoint, None) })
    }
}

fn edge(a: &LatticeKey, b: &LatticeKey) -> (LatticeKey, LatticeKey) {
    if a <= b {
        (a.clone(), b.clone())
    } else {
        (b.clone(), a.clone())
    }
}

/// Short content hash used in DOT labels.
pub fn key_hash(k: &LatticeKey) -> String {
    let d = Sha256::digest(k.to_hex().as_bytes());
    hex::encode(&d[..5])
}

#[derive(Clone, Debug)]
pub struct TreeGraph {
    pub p: u64,
    pub radius: usize,
    pub center: LatticeKey,
    pub vertices: BTreeMap<LatticeKey, TreeVertex>,
    pub depth: BTreeMap<LatticeKey, usize>,
    pub edges: BTreeSet<(LatticeKey, LatticeKey)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JsonVertex {
    pub key: String,
    #[serde(rename = "type")]
    pub vtype: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphJson {
    pub p: u64,
    pub radius: usize,
    pub vertices: Vec<JsonVertex>,
    pub edges: Vec<[String; 2]>,
}

impl TreeGraph {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }
    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Vertex count per type.
    pub fn census(&self) -> BTreeMap<u32, usize> {
        let mut c = BTreeMap::new();
        for v in self.vertices.values() {
            *c.entry(v.vtype).or_default() += 1;
        }
        c
    }

    pub fn adjacency(&self) -> BTreeMap<&LatticeKey, Vec<&LatticeKey>> {
        let mut adj: BTreeMap<&LatticeKey, Vec<&LatticeKey>> = self.vertices.keys().map(|k| (k, vec![])).collect();
        for (a, b) in &self.edges {
            adj.entry(a).or_default().push(b);
            adj.entry(b).or_default().push(a);
        }
        adj
    }

    pub fn is_connected(&self) -> bool {
        let adj = self.adjacency();
        let mut seen = BTreeSet::from([&self.center]);
        let mut queue = VecDeque::from([&self.center]);
        while let Some(v) = queue.pop_front() {
            for w in &adj[v] {
                if seen.insert(*w) {
                    queue.push_back(*w);
                }
            }
        }
        seen.len() == self.vertices.len()
    }

    pub fn is_tree(&self) -> bool {
        self.edges.len() + 1 == self.vertices.len() && self.is_connected()
    }

    pub fn is_bipartite_by_type(&self) -> bool {
        self.edges.iter().all(|(a, b)| self.vertices[a].vtype + self.vertices[b].vtype == 4)
    }

    /// Every vertex strictly inside the ball has valence p+1 (type 1) or
    /// p³+1 (type 3).
    pub fn interior_degrees_ok(&self) -> bool {
        let p = self.p as usize;
        let adj = self.adjacency();
        self.vertices.values().filter(|v| self.depth[&v.key] < self.radius).all(|v| {
            let want = if v.vtype == 1 { p + 1 } else { p * p * p + 1 };
            adj[&v.key].len() == want
        })
    }

    pub fn distance(&self, a: &LatticeKey, b: &LatticeKey) -> Result<usize> {
        if !self.vertices.contains_key(a) || !self.vertices.contains_key(b) {
            return Err(Error::NotInBall);
        }
        let adj = self.adjacency();
        let mut dist = BTreeMap::from([(a, 0usize)]);
        let mut queue = VecDeque::from([a]);
        while let Some(v) = queue.pop_front() {
            if v == b {
                return Ok(dist[v]);
            }
            let d = dist[v];
            for w in &adj[v] {
                if !dist.contains_key(*w) {
                    dist.insert(*w, d + 1);
                    queue.push_back(*w);
                }
            }
        }
        Err(Error::NotInBall)
    }

    pub fn to_dot(&self) -> String {
        let idx: BTreeMap<&LatticeKey, usize> = self.vertices.keys().enumerate().map(|(i, k)| (k, i)).collect();
        let mut s = String::from("graph tree {\n");
        for (k, v) in &self.vertices {
            let shape = if v.vtype == 1 { "box" } else { "circle" };
            let _ = writeln!(s, "  n{} [label=\"{}:{}\", shape={}];", idx[k], v.vtype, key_hash(k), shape);
        }
        for (a, b) in &self.edges {
            let _ = writeln!(s, "  n{} -- n{};", idx[a], idx[b]);
        }
        s.push_str("}\n");
        s
    }

    pub fn to_json_value(&self) -> GraphJson {
        GraphJson {
            p: self.p,
            radius: self.radius,
            vertices: self.vertices.values().map(|v| JsonVertex { key: v.key.to_hex(), vtype: v.vtype }).collect(),
            edges: self.edges.iter().map(|(a, b)| [a.to_hex(), b.to_hex()]).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_value()).expect("graph serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_size_formula() {
        assert_eq!(Building::ball_size(3, 3, 2), 113);
        assert_eq!(Building::ball_size(3, 1, 2), 113);
        assert_eq!(Building::ball_size(3, 1, 0), 1);
    }

    #[test]
    fn neighbour_counts_p3() {
        let b = Building::new(3).unwrap();
        let c = b.center(1).unwrap();
        assert_eq!(b.neighbors_of_type1(&c).unwrap().len(), 4);
        let l = b.center(3).unwrap();
        assert_eq!(b.neighbors_of_type3(&l).unwrap().len(), 28);
    }
}
