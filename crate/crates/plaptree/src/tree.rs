//! Finite weighted rooted trees.
//!
//! Vertices are stored in BFS order with contiguous indices, so the root is
//! always index 0, every parent index is smaller than its children, and each
//! level occupies a contiguous index range. All aggregate passes in this
//! crate rely on those three facts.

use crate::error::TreeError;
use crate::num::CompensatedSum;

pub type VertexId = usize;

/// One row of build input: an id, its parent (none for the root), the vertex
/// weight, and the weight of the edge towards the parent (none on the root).
#[derive(Debug, Clone)]
pub struct VertexSpec {
    pub id: String,
    pub parent: Option<String>,
    pub mu: f64,
    pub nu: Option<f64>,
}

impl VertexSpec {
    pub fn new(
        id: impl Into<String>,
        parent: Option<&str>,
        mu: f64,
        nu: Option<f64>,
    ) -> Self {
        Self {
            id: id.into(),
            parent: parent.map(str::to_owned),
            mu,
            nu,
        }
    }
}

/// A finite rooted tree with positive vertex weights `mu` and positive edge
/// weights `nu`, the latter indexed by the child endpoint.
///
/// The root's `mu` is accepted on input but never enters any functional:
/// every function considered here vanishes at the root.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedTree {
    labels: Vec<String>,
    parent: Vec<VertexId>, // parent[0] == 0, never read
    children: Vec<Vec<VertexId>>,
    level: Vec<u32>,
    level_start: Vec<usize>, // level_start[l]..level_start[l+1] is level l
    mu: Vec<f64>,
    nu: Vec<f64>, // nu[0] == 0.0 sentinel, never read
    max_level: u32,
}

impl WeightedTree {
    /// Validates and builds a tree from an edge list, re-indexing vertices in
    /// BFS order. Child order follows input order.
    pub fn build(spec: &[VertexSpec]) -> Result<Self, TreeError> {
        use std::collections::HashMap;

        let mut index_of: HashMap<&str, usize> = HashMap::with_capacity(spec.len());
        let mut root_spec: Option<usize> = None;
        for (k, v) in spec.iter().enumerate() {
            if index_of.insert(v.id.as_str(), k).is_some() {
                return Err(TreeError::DuplicateId(v.id.clone()));
            }
            if v.parent.is_none() {
                if let Some(r) = root_spec {
                    return Err(TreeError::MultipleRoots(
                        spec[r].id.clone(),
                        v.id.clone(),
                    ));
                }
                root_spec = Some(k);
            }
        }
        let root_spec = root_spec.ok_or(TreeError::NoRoot)?;

        // Adjacency in spec-index space, children in input order.
        let mut spec_children: Vec<Vec<usize>> = vec![Vec::new(); spec.len()];
        for (k, v) in spec.iter().enumerate() {
            if let Some(parent_id) = &v.parent {
                let p = *index_of.get(parent_id.as_str()).ok_or_else(|| {
                    TreeError::UnknownParent {
                        child: v.id.clone(),
                        parent: parent_id.clone(),
                    }
                })?;
                spec_children[p].push(k);
            }
        }

        // BFS re-indexing.
        let n = spec.len();
        let mut order = Vec::with_capacity(n); // new index -> spec index
        let mut new_index = vec![usize::MAX; n]; // spec index -> new index
        order.push(root_spec);
        new_index[root_spec] = 0;
        let mut head = 0;
        while head < order.len() {
            let s = order[head];
            head += 1;
            for &c in &spec_children[s] {
                new_index[c] = order.len();
                order.push(c);
            }
        }
        if order.len() < n {
            let missing = (0..n).find(|&k| new_index[k] == usize::MAX).unwrap();
            return Err(TreeError::Unreachable(spec[missing].id.clone()));
        }

        let mut labels = Vec::with_capacity(n);
        let mut parent = vec![0usize; n];
        let mut children: Vec<Vec<VertexId>> = vec![Vec::new(); n];
        let mut level = vec![0u32; n];
        let mut mu = vec![0.0; n];
        let mut nu = vec![0.0; n];

        for (i, &s) in order.iter().enumerate() {
            let v = &spec[s];
            labels.push(v.id.clone());
            if !v.mu.is_finite() || v.mu <= 0.0 {
                return Err(TreeError::BadWeight {
                    id: v.id.clone(),
                    value: v.mu,
                });
            }
            mu[i] = v.mu;
            if i == 0 {
                if v.nu.is_some() {
                    return Err(TreeError::RootEdgeWeight(v.id.clone()));
                }
            } else {
                let p = new_index[*index_of.get(v.parent.as_deref().unwrap()).unwrap()];
                parent[i] = p;
                children[p].push(i);
                level[i] = level[p] + 1;
                let edge = v.nu.ok_or_else(|| TreeError::MissingEdgeWeight(v.id.clone()))?;
                if !edge.is_finite() || edge <= 0.0 {
                    return Err(TreeError::BadWeight {
                        id: v.id.clone(),
                        value: edge,
                    });
                }
                nu[i] = edge;
            }
        }

        if children[0].is_empty() {
            return Err(TreeError::ChildlessRoot);
        }

        let max_level = *level.iter().max().unwrap();
        let mut level_start = vec![0usize; max_level as usize + 2];
        for &l in &level {
            level_start[l as usize + 1] += 1;
        }
        for l in 0..=max_level as usize {
            level_start[l + 1] += level_start[l];
        }

        Ok(Self {
            labels,
            parent,
            children,
            level,
            level_start,
            mu,
            nu,
            max_level,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.labels.len()
    }

    pub const fn root() -> VertexId {
        0
    }

    /// Parent of `i`, `None` at the root.
    pub fn parent(&self, i: VertexId) -> Option<VertexId> {
        (i != 0).then(|| self.parent[i])
    }

    /// Parent index of a non-root vertex.
    ///
    /// Callers iterating `non_root()` use this to skip the `Option`.
    pub fn parent_of(&self, i: VertexId) -> VertexId {
        debug_assert!(i != 0);
        self.parent[i]
    }

    pub fn children(&self, i: VertexId) -> &[VertexId] {
        &self.children[i]
    }

    pub fn level(&self, i: VertexId) -> u32 {
        self.level[i]
    }

    pub fn mu(&self, i: VertexId) -> f64 {
        self.mu[i]
    }

    /// Weight of the edge `(parent(i), i)`. Meaningless at the root.
    pub fn nu(&self, i: VertexId) -> f64 {
        debug_assert!(i != 0);
        self.nu[i]
    }

    pub fn max_level(&self) -> u32 {
        self.max_level
    }

    pub fn label(&self, i: VertexId) -> &str {
        &self.labels[i]
    }

    pub fn find(&self, label: &str) -> Option<VertexId> {
        self.labels.iter().position(|l| l == label)
    }

    /// All vertex indices, root first.
    pub fn vertices(&self) -> std::ops::Range<VertexId> {
        0..self.vertex_count()
    }

    /// All non-root vertex indices.
    pub fn non_root(&self) -> std::ops::Range<VertexId> {
        1..self.vertex_count()
    }

    pub fn is_leaf(&self, i: VertexId) -> bool {
        self.children[i].is_empty()
    }

    /// Vertices of the subtree rooted at `i` (including `i`), preorder.
    pub fn subtree_vertices(&self, i: VertexId) -> Result<Vec<VertexId>, TreeError> {
        if i >= self.vertex_count() {
            return Err(TreeError::UnknownVertex(i));
        }
        let mut out = Vec::new();
        let mut stack = vec![i];
        while let Some(v) = stack.pop() {
            out.push(v);
            for &c in self.children[v].iter().rev() {
                stack.push(c);
            }
        }
        Ok(out)
    }

    /// The path from the root's side down to `i`, root excluded, `i` included.
    pub fn path_to_root(&self, i: VertexId) -> Result<Vec<VertexId>, TreeError> {
        if i == 0 || i >= self.vertex_count() {
            return Err(TreeError::UnknownVertex(i));
        }
        let mut path = Vec::with_capacity(self.level[i] as usize);
        let mut v = i;
        while v != 0 {
            path.push(v);
            v = self.parent[v];
        }
        path.reverse();
        Ok(path)
    }

    /// Vertices at level exactly `n`.
    pub fn level_set(&self, n: u32) -> Result<Vec<VertexId>, TreeError> {
        if n > self.max_level {
            return Err(TreeError::LevelOutOfRange {
                m: n,
                max: self.max_level,
            });
        }
        Ok((self.level_start[n as usize]..self.level_start[n as usize + 1]).collect())
    }

    /// Vertices at levels `0..=n`.
    pub fn truncation_ball(&self, n: u32) -> Result<Vec<VertexId>, TreeError> {
        if n > self.max_level {
            return Err(TreeError::LevelOutOfRange {
                m: n,
                max: self.max_level,
            });
        }
        Ok((0..self.level_start[n as usize + 1]).collect())
    }

    /// Subtree vertex-weight masses, one reverse pass. `out[i]` sums `mu`
    /// over the subtree of `i` including `i` itself (the root entry therefore
    /// includes the root weight).
    pub(crate) fn subtree_mu_masses(&self) -> Vec<f64> {
        let n = self.vertex_count();
        let mut acc: Vec<CompensatedSum> = (0..n)
            .map(|i| {
                let mut s = CompensatedSum::new();
                s.add(self.mu[i]);
                s
            })
            .collect();
        for i in (1..n).rev() {
            let v = acc[i].value();
            acc[self.parent[i]].add(v);
        }
        acc.into_iter().map(|s| s.value()).collect()
    }

    /// The level-`m` truncation: keeps levels `0..=m`; vertices at level `m`
    /// absorb the vertex mass of their whole deleted subtree, edge weights
    /// are unchanged, so the total non-root mass is preserved exactly.
    pub fn truncate(&self, m: u32) -> Result<WeightedTree, TreeError> {
        if m < 1 || m > self.max_level {
            return Err(TreeError::LevelOutOfRange {
                m,
                max: self.max_level,
            });
        }
        let keep = self.level_start[m as usize + 1];
        let masses = self.subtree_mu_masses();
        let mut mu = self.mu[..keep].to_vec();
        for i in self.level_start[m as usize]..keep {
            mu[i] = masses[i];
        }
        let mut children: Vec<Vec<VertexId>> = self.children[..keep].to_vec();
        for i in self.level_start[m as usize]..keep {
            children[i].clear();
        }
        let mut level_start = self.level_start[..m as usize + 2].to_vec();
        *level_start.last_mut().unwrap() = keep;
        Ok(WeightedTree {
            labels: self.labels[..keep].to_vec(),
            parent: self.parent[..keep].to_vec(),
            children,
            level: self.level[..keep].to_vec(),
            level_start,
            mu,
            nu: self.nu[..keep].to_vec(),
            max_level: m,
        })
    }

    /// The standalone tree formed by the root and the subtree of one of its
    /// children, plus the map from branch indices back to indices in `self`.
    ///
    /// With the root value pinned to 0, a multi-child root decouples the
    /// eigenproblem into its branches; this is the piece each branch solve
    /// runs on.
    pub fn branch(&self, child: VertexId) -> Result<(WeightedTree, Vec<VertexId>), TreeError> {
        if self.parent(child) != Some(0) {
            return Err(TreeError::UnknownVertex(child));
        }
        let sub = self.subtree_vertices(child)?;
        let mut spec = Vec::with_capacity(sub.len() + 1);
        spec.push(VertexSpec::new(self.label(0), None, self.mu(0), None));
        for &v in &sub {
            spec.push(VertexSpec::new(
                self.label(v),
                Some(self.label(self.parent_of(v))),
                self.mu(v),
                Some(self.nu(v)),
            ));
        }
        let branch = WeightedTree::build(&spec)?;
        let index_of: std::collections::HashMap<&str, VertexId> = self
            .labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.as_str(), i))
            .collect();
        let map = branch
            .labels
            .iter()
            .map(|l| index_of[l.as_str()])
            .collect();
        Ok((branch, map))
    }

    /// Copy of the tree with a different root vertex weight (which no
    /// functional reads; used to test exactly that).
    pub fn with_root_mu(&self, value: f64) -> Result<WeightedTree, TreeError> {
        if !value.is_finite() || value <= 0.0 {
            return Err(TreeError::BadWeight {
                id: self.labels[0].clone(),
                value,
            });
        }
        let mut t = self.clone();
        t.mu[0] = value;
        Ok(t)
    }

    /// Copy of the tree with all vertex weights scaled by `mu_factor` and all
    /// edge weights by `nu_factor`.
    pub fn scaled(&self, mu_factor: f64, nu_factor: f64) -> Result<WeightedTree, TreeError> {
        for (name, v) in [("mu_factor", mu_factor), ("nu_factor", nu_factor)] {
            if !v.is_finite() || v <= 0.0 {
                return Err(TreeError::BadParameter {
                    name,
                    value: v,
                    range: "(0, inf)",
                });
            }
        }
        let mut t = self.clone();
        for w in &mut t.mu {
            *w *= mu_factor;
        }
        for w in &mut t.nu[1..] {
            *w *= nu_factor;
        }
        Ok(t)
    }
}

/// Homogeneous tree: the root has a single child, every other non-leaf vertex
/// has exactly `r` children, levels run to `max_level`, and the weights decay
/// geometrically: `mu = t^level`, `nu = a * t^level`.
pub fn generate_homogeneous(
    r: u32,
    max_level: u32,
    t: f64,
    a: f64,
) -> Result<WeightedTree, TreeError> {
    check_homogeneous_params(r, t, a)?;
    if max_level < 1 {
        return Err(TreeError::BadParameter {
            name: "max_level",
            value: max_level as f64,
            range: "[1, inf)",
        });
    }
    // 1 + 1 + r + r^2 + ... + r^(N-1) vertices; refuse absurd sizes.
    let mut count: u64 = 2;
    let mut width: u64 = 1;
    for _ in 2..=max_level {
        width = width.saturating_mul(r as u64);
        count = count.saturating_add(width);
        if count > 10_000_000 {
            return Err(TreeError::BadParameter {
                name: "max_level",
                value: max_level as f64,
                range: "small enough that r^(N-1) stays below 10^7 vertices",
            });
        }
    }

    let mut spec = Vec::with_capacity(count as usize);
    spec.push(VertexSpec::new("o", None, 1.0, None));
    // BFS construction; labels are decimal indices.
    let mut next_id = 1usize;
    let mut frontier: Vec<(usize, u32)> = Vec::new(); // (spec index, level)
    spec.push(VertexSpec::new("1", Some("o"), t, Some(a * t)));
    frontier.push((1, 1));
    next_id += 1;
    while let Some((parent_idx, lvl)) = frontier.first().copied() {
        if lvl >= max_level {
            break;
        }
        frontier.remove(0);
        let parent_label = spec[parent_idx].id.clone();
        let w = t.powi(lvl as i32 + 1);
        for _ in 0..r {
            let id = next_id.to_string();
            spec.push(VertexSpec::new(id, Some(parent_label.as_str()), w, Some(a * w)));
            frontier.push((spec.len() - 1, lvl + 1));
            next_id += 1;
        }
    }
    WeightedTree::build(&spec)
}

pub(crate) fn check_homogeneous_params(r: u32, t: f64, a: f64) -> Result<(), TreeError> {
    if r < 1 {
        return Err(TreeError::BadParameter {
            name: "r",
            value: r as f64,
            range: "[1, inf)",
        });
    }
    if !t.is_finite() || t <= 0.0 || t >= 1.0 / r as f64 {
        return Err(TreeError::BadParameter {
            name: "t",
            value: t,
            range: "(0, 1/r)",
        });
    }
    if !a.is_finite() || a <= 0.0 {
        return Err(TreeError::BadParameter {
            name: "a",
            value: a,
            range: "(0, inf)",
        });
    }
    Ok(())
}
