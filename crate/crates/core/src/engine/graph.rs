//! Communication graphs with unique identifiers in `[1, N]`.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::color::NodeId;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("graph must have at least one node")]
    Empty,
    #[error("identifier {0} is not in [1, {1}]")]
    IdOutOfRange(NodeId, u64),
    #[error("identifier {0} is used more than once")]
    DuplicateId(NodeId),
    #[error("self-loop at node {0}")]
    SelfLoop(NodeId),
    #[error("edge {0}-{1} listed more than once")]
    MultiEdge(NodeId, NodeId),
    #[error("adjacency is not symmetric: {0} lists {1} but not conversely")]
    Asymmetric(NodeId, NodeId),
    #[error("node {0} lists unknown neighbor {1}")]
    UnknownNeighbor(NodeId, NodeId),
    #[error("graph is not connected: node {0} is unreachable from node {1}")]
    Disconnected(NodeId, NodeId),
    #[error("identifier list has {got} entries but the graph has {expected} nodes")]
    IdCount { expected: usize, got: usize },
    #[error("circulant({n},{k}) requires n > 2k and k >= 1")]
    BadCirculant { n: usize, k: usize },
    #[error("invalid graph spec `{0}`")]
    BadSpec(String),
}

/// The on-disk graph document.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphFile {
    pub id_bound: u64,
    pub nodes: Vec<GraphFileNode>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphFileNode {
    pub id: NodeId,
    pub neighbors: Vec<NodeId>,
}

/// A simple connected undirected graph in canonical form.
///
/// Nodes are kept sorted by identifier and every adjacency list is ascending,
/// so a node's index equals its rank among identifiers.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GraphFile", into = "GraphFile")]
pub struct Graph {
    ids: Vec<NodeId>,
    index: HashMap<NodeId, usize>,
    adj: Vec<Vec<usize>>,
    id_bound: u64,
}

impl Graph {
    /// Builds a graph from identifier-keyed adjacency, validating every invariant.
    pub fn from_adjacency(
        adjacency: &BTreeMap<NodeId, Vec<NodeId>>,
        id_bound: u64,
    ) -> Result<Self, GraphError> {
        if adjacency.is_empty() {
            return Err(GraphError::Empty);
        }
        let ids: Vec<NodeId> = adjacency.keys().copied().collect();
        for &id in &ids {
            if id == 0 || id > id_bound {
                return Err(GraphError::IdOutOfRange(id, id_bound));
            }
        }
        let index: HashMap<NodeId, usize> = ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
        let mut adj = vec![Vec::new(); ids.len()];
        for (&v, nbrs) in adjacency {
            let mut seen = BTreeSet::new();
            for &u in nbrs {
                if u == v {
                    return Err(GraphError::SelfLoop(v));
                }
                if !seen.insert(u) {
                    return Err(GraphError::MultiEdge(v, u));
                }
                let Some(&ui) = index.get(&u) else {
                    return Err(GraphError::UnknownNeighbor(v, u));
                };
                adj[index[&v]].push(ui);
            }
        }
        for (vi, nbrs) in adj.iter_mut().enumerate() {
            nbrs.sort_unstable();
            for &ui in nbrs.iter() {
                if !adjacency[&ids[ui]].contains(&ids[vi]) {
                    return Err(GraphError::Asymmetric(ids[vi], ids[ui]));
                }
            }
        }
        let graph = Graph { ids, index, adj, id_bound };
        graph.check_connected()?;
        Ok(graph)
    }

    fn check_connected(&self) -> Result<(), GraphError> {
        let mut seen = vec![false; self.ids.len()];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(v) = queue.pop_front() {
            for &u in &self.adj[v] {
                if !seen[u] {
                    seen[u] = true;
                    queue.push_back(u);
                }
            }
        }
        match seen.iter().position(|s| !s) {
            Some(i) => Err(GraphError::Disconnected(self.ids[i], self.ids[0])),
            None => Ok(()),
        }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn id_bound(&self) -> u64 {
        self.id_bound
    }

    /// Identifiers in ascending order.
    pub fn ids(&self) -> &[NodeId] {
        &self.ids
    }

    pub fn id(&self, index: usize) -> NodeId {
        self.ids[index]
    }

    pub fn index_of(&self, id: NodeId) -> Option<usize> {
        self.index.get(&id).copied()
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.index.contains_key(&id)
    }

    /// Neighbor indices of the node at `index`, ascending.
    pub fn neighbor_indices(&self, index: usize) -> &[usize] {
        &self.adj[index]
    }

    /// Neighbor identifiers of `id`, ascending. Empty for unknown nodes.
    pub fn neighbors(&self, id: NodeId) -> Vec<NodeId> {
        self.index_of(id)
            .map(|i| self.adj[i].iter().map(|&u| self.ids[u]).collect())
            .unwrap_or_default()
    }

    pub fn degree(&self, id: NodeId) -> usize {
        self.index_of(id).map(|i| self.adj[i].len()).unwrap_or(0)
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn are_adjacent(&self, u: NodeId, v: NodeId) -> bool {
        match (self.index_of(u), self.index_of(v)) {
            (Some(ui), Some(vi)) => self.adj[ui].binary_search(&vi).is_ok(),
            _ => false,
        }
    }

    /// Every edge once, as `(smaller id, larger id)`.
    pub fn edges(&self) -> Vec<(NodeId, NodeId)> {
        let mut out = Vec::new();
        for (vi, nbrs) in self.adj.iter().enumerate() {
            for &ui in nbrs {
                if vi < ui {
                    out.push((self.ids[vi], self.ids[ui]));
                }
            }
        }
        out
    }

    pub fn is_cycle(&self) -> bool {
        self.len() >= 3 && self.adj.iter().all(|n| n.len() == 2)
    }

    pub fn to_file(&self) -> GraphFile {
        GraphFile {
            id_bound: self.id_bound,
            nodes: self
                .ids
                .iter()
                .enumerate()
                .map(|(i, &id)| GraphFileNode {
                    id,
                    neighbors: self.adj[i].iter().map(|&u| self.ids[u]).collect(),
                })
                .collect(),
        }
    }

    /// SHA-256 of the canonical graph document, hex encoded.
    pub fn hash(&self) -> String {
        let doc = serde_json::to_vec(&self.to_file()).expect("graph serializes");
        hex::encode(Sha256::digest(&doc))
    }
}

impl TryFrom<GraphFile> for Graph {
    type Error = GraphError;

    fn try_from(file: GraphFile) -> Result<Self, Self::Error> {
        let mut adjacency = BTreeMap::new();
        for node in file.nodes {
            if adjacency.insert(node.id, node.neighbors).is_some() {
                return Err(GraphError::DuplicateId(node.id));
            }
        }
        Graph::from_adjacency(&adjacency, file.id_bound)
    }
}

impl From<Graph> for GraphFile {
    fn from(g: Graph) -> Self {
        g.to_file()
    }
}

/// Graph families understood by [`build_graph`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Shape {
    Cycle(usize),
    Path(usize),
    Clique(usize),
    /// `u_i` adjacent to `u_{i±1}, …, u_{i±k}` (indices mod n).
    Circulant { n: usize, k: usize },
    /// Seeded random tree whose degrees never exceed `max_degree`.
    RandomTree { n: usize, max_degree: usize, seed: u64 },
    /// Explicit graph; node order of the document is the construction order.
    Explicit(GraphFile),
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shape::Cycle(n) => write!(f, "cycle:{n}"),
            Shape::Path(n) => write!(f, "path:{n}"),
            Shape::Clique(n) => write!(f, "clique:{n}"),
            Shape::Circulant { n, k } => write!(f, "circulant:{n},{k}"),
            Shape::RandomTree { n, max_degree, seed } => write!(f, "tree:{n},{max_degree},{seed}"),
            Shape::Explicit(_) => write!(f, "explicit"),
        }
    }
}

impl FromStr for Shape {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || GraphError::BadSpec(s.to_string());
        let (kind, args) = s.split_once(':').ok_or_else(bad)?;
        let nums: Vec<u64> = args
            .split(',')
            .map(|a| a.trim().parse::<u64>())
            .collect::<Result<_, _>>()
            .map_err(|_| bad())?;
        let shape = match (kind, nums.as_slice()) {
            ("cycle", [n]) => Shape::Cycle(*n as usize),
            ("path", [n]) => Shape::Path(*n as usize),
            ("clique", [n]) => Shape::Clique(*n as usize),
            ("circulant", [n, k]) => Shape::Circulant { n: *n as usize, k: *k as usize },
            ("tree", [n, d]) => Shape::RandomTree { n: *n as usize, max_degree: *d as usize, seed: 0 },
            ("tree", [n, d, seed]) => Shape::RandomTree { n: *n as usize, max_degree: *d as usize, seed: *seed },
            _ => return Err(bad()),
        };
        Ok(shape)
    }
}

/// A shape plus the optional identifier assignment and bound.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphSpec {
    pub shape: Shape,
    /// Identifier of the i-th constructed node; defaults to `i + 1`.
    pub ids: Option<Vec<NodeId>>,
    /// Identifier bound `N`; defaults to the largest identifier in use.
    pub id_bound: Option<u64>,
}

impl GraphSpec {
    pub fn new(shape: Shape) -> Self {
        GraphSpec { shape, ids: None, id_bound: None }
    }

    pub fn with_ids(mut self, ids: impl Into<Vec<NodeId>>) -> Self {
        self.ids = Some(ids.into());
        self
    }

    pub fn with_bound(mut self, bound: u64) -> Self {
        self.id_bound = Some(bound);
        self
    }
}

fn shape_edges(shape: &Shape) -> Result<(usize, Vec<(usize, usize)>), GraphError> {
    let out = match *shape {
        Shape::Cycle(n) => {
            if n < 3 {
                return Err(GraphError::BadSpec(format!("cycle:{n} needs at least 3 nodes")));
            }
            (n, (0..n).map(|i| (i, (i + 1) % n)).collect())
        }
        Shape::Path(n) => (n, (1..n).map(|i| (i - 1, i)).collect()),
        Shape::Clique(n) => {
            let mut e = Vec::new();
            for i in 0..n {
                for j in i + 1..n {
                    e.push((i, j));
                }
            }
            (n, e)
        }
        Shape::Circulant { n, k } => {
            if k == 0 || n <= 2 * k {
                return Err(GraphError::BadCirculant { n, k });
            }
            let mut e = Vec::new();
            for i in 0..n {
                for j in 1..=k {
                    e.push((i, (i + j) % n));
                }
            }
            (n, e)
        }
        Shape::RandomTree { n, max_degree, seed } => {
            if n > 2 && max_degree < 2 {
                return Err(GraphError::BadSpec(format!("tree:{n},{max_degree} cannot be connected")));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut degree = vec![0usize; n];
            let mut e = Vec::new();
            for v in 1..n {
                let open: Vec<usize> = (0..v).filter(|&u| degree[u] < max_degree.max(1)).collect();
                let u = open[rng.gen_range(0..open.len())];
                degree[u] += 1;
                degree[v] += 1;
                e.push((u, v));
            }
            (n, e)
        }
        Shape::Explicit(_) => unreachable!("explicit graphs are handled separately"),
    };
    Ok(out)
}

/// Builds the canonical graph described by `spec`.
pub fn build_graph(spec: &GraphSpec) -> Result<Graph, GraphError> {
    let mut adjacency: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
    match &spec.shape {
        Shape::Explicit(file) => {
            let relabel: Option<HashMap<NodeId, NodeId>> = match &spec.ids {
                Some(ids) => {
                    if ids.len() != file.nodes.len() {
                        return Err(GraphError::IdCount { expected: file.nodes.len(), got: ids.len() });
                    }
                    Some(file.nodes.iter().zip(ids).map(|(n, &id)| (n.id, id)).collect())
                }
                None => None,
            };
            let map = |id: NodeId| relabel.as_ref().and_then(|m| m.get(&id).copied()).unwrap_or(id);
            for node in &file.nodes {
                let nbrs = node.neighbors.iter().map(|&u| map(u)).collect();
                if adjacency.insert(map(node.id), nbrs).is_some() {
                    return Err(GraphError::DuplicateId(map(node.id)));
                }
            }
            let bound = spec.id_bound.unwrap_or_else(|| {
                if relabel.is_some() {
                    adjacency.keys().copied().max().unwrap_or(0)
                } else {
                    file.id_bound
                }
            });
            Graph::from_adjacency(&adjacency, bound)
        }
        shape => {
            let (n, edges) = shape_edges(shape)?;
            if n == 0 {
                return Err(GraphError::Empty);
            }
            let ids: Vec<NodeId> = match &spec.ids {
                Some(ids) if ids.len() != n => {
                    return Err(GraphError::IdCount { expected: n, got: ids.len() })
                }
                Some(ids) => ids.clone(),
                None => (1..=n as NodeId).collect(),
            };
            let mut distinct = BTreeSet::new();
            for &id in &ids {
                if !distinct.insert(id) {
                    return Err(GraphError::DuplicateId(id));
                }
                adjacency.insert(id, Vec::new());
            }
            for (a, b) in edges {
                adjacency.get_mut(&ids[a]).unwrap().push(ids[b]);
                adjacency.get_mut(&ids[b]).unwrap().push(ids[a]);
            }
            let bound = spec.id_bound.unwrap_or_else(|| ids.iter().copied().max().unwrap_or(0));
            Graph::from_adjacency(&adjacency, bound)
        }
    }
}
