//! Random node placement, spanning-tree construction (shortest path tree and
//! minimum spanning tree), pruning to a destination set, and the
//! breadth-first layer schedule used by the multicast session.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, VecDeque};
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of fresh placements tried before the communication range starts
/// growing.
pub const RESAMPLE_LIMIT: usize = 50;

/// Multiplicative step applied to the communication range once the
/// resampling budget is spent.
pub const RANGE_GROWTH: f64 = 1.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<usize> for NodeId {
    fn from(v: usize) -> Self {
        NodeId(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Undirected edge with `u < v`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub u: NodeId,
    pub v: NodeId,
    pub dist: f64,
}

/// Undirected weighted graph over nodes `0..n`.
///
/// Tree builders work on this type so that they can be exercised with
/// arbitrary positive weights; [`Topology`] wraps one whose weights are the
/// Euclidean distances between placed nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<(NodeId, f64)>>,
}

impl Graph {
    /// Builds a graph, rejecting self-loops, duplicate pairs, out-of-range
    /// endpoints and non-positive or non-finite weights.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        let mut adjacency = vec![Vec::new(); n];
        for (a, b, w) in edges {
            if a >= n || b >= n {
                return Err(Error::MalformedGraph(format!(
                    "edge ({a},{b}) references a node outside 0..{n}"
                )));
            }
            if a == b {
                return Err(Error::MalformedGraph(format!("self-loop at node {a}")));
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::MalformedGraph(format!(
                    "edge ({a},{b}) has invalid weight {w}"
                )));
            }
            let (u, v) = if a < b { (a, b) } else { (b, a) };
            if !seen.insert((u, v)) {
                return Err(Error::MalformedGraph(format!("duplicate edge ({u},{v})")));
            }
            adjacency[u].push((NodeId(v), w));
            adjacency[v].push((NodeId(u), w));
            out.push(Edge {
                u: NodeId(u),
                v: NodeId(v),
                dist: w,
            });
        }
        for list in &mut adjacency {
            list.sort_by_key(|&(id, _)| id);
        }
        Ok(Graph {
            n,
            edges: out,
            adjacency,
        })
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn neighbors(&self, v: NodeId) -> &[(NodeId, f64)] {
        &self.adjacency[v.0]
    }

    pub fn weight(&self, a: NodeId, b: NodeId) -> Option<f64> {
        self.adjacency
            .get(a.0)?
            .iter()
            .find(|&&(id, _)| id == b)
            .map(|&(_, w)| w)
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            for &(v, _) in &self.adjacency[u] {
                if !seen[v.0] {
                    seen[v.0] = true;
                    count += 1;
                    queue.push_back(v.0);
                }
            }
        }
        count == self.n
    }

    fn check_root(&self, root: NodeId) -> Result<()> {
        if root.0 >= self.n {
            return Err(Error::UnknownNode(root));
        }
        if !self.is_connected() {
            return Err(Error::MalformedGraph("graph is not connected".into()));
        }
        Ok(())
    }
}

/// Placed nodes plus their unit-disk connectivity graph.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    nodes: Vec<Point>,
    graph: Graph,
    area_side: f64,
    comm_range: f64,
}

impl Topology {
    /// Assembles a topology from explicit parts. Edge distances are taken
    /// from the node positions.
    pub fn from_parts(
        nodes: Vec<Point>,
        edges: impl IntoIterator<Item = (usize, usize)>,
        area_side: f64,
        comm_range: f64,
    ) -> Result<Self> {
        if !(area_side > 0.0) {
            return Err(Error::param("area_side", "must be positive"));
        }
        if !(comm_range > 0.0) {
            return Err(Error::param("comm_range", "must be positive"));
        }
        for (i, p) in nodes.iter().enumerate() {
            if !(0.0..=area_side).contains(&p.x) || !(0.0..=area_side).contains(&p.y) {
                return Err(Error::MalformedGraph(format!(
                    "node {i} at ({}, {}) lies outside the {area_side} m square",
                    p.x, p.y
                )));
            }
        }
        let n = nodes.len();
        let mut weighted = Vec::new();
        for (a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::MalformedGraph(format!(
                    "edge ({a},{b}) references a node outside 0..{n}"
                )));
            }
            let d = nodes[a].distance(&nodes[b]);
            if a != b && d == 0.0 {
                return Err(Error::CoLocated(NodeId(a), NodeId(b)));
            }
            weighted.push((a, b, d));
        }
        let graph = Graph::new(n, weighted)?;
        Ok(Topology {
            nodes,
            graph,
            area_side,
            comm_range,
        })
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn edges(&self) -> &[Edge] {
        self.graph.edges()
    }

    pub fn area_side(&self) -> f64 {
        self.area_side
    }

    pub fn comm_range(&self) -> f64 {
        self.comm_range
    }

    pub fn distance(&self, a: NodeId, b: NodeId) -> f64 {
        self.nodes[a.0].distance(&self.nodes[b.0])
    }

    /// Plain-text export: a `# area_side=.. comm_range=..` header, one
    /// `node_id,x,y` row per node, then one `u,v` row per edge. Floats use
    /// the shortest representation that round-trips exactly.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "# area_side={} comm_range={}\n",
            self.area_side, self.comm_range
        );
        for (i, p) in self.nodes.iter().enumerate() {
            out.push_str(&format!("{i},{},{}\n", p.x, p.y));
        }
        for e in self.graph.edges() {
            out.push_str(&format!("{},{}\n", e.u, e.v));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut area_side = None;
        let mut comm_range = None;
        let mut nodes = Vec::new();
        let mut edges = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            let parse_err = |reason: String| Error::Parse {
                line: line_no,
                reason,
            };
            if let Some(header) = line.strip_prefix('#') {
                for token in header.split_whitespace() {
                    let Some((key, value)) = token.split_once('=') else {
                        continue;
                    };
                    let value: f64 = value
                        .parse()
                        .map_err(|_| parse_err(format!("bad number `{value}` for {key}")))?;
                    match key {
                        "area_side" => area_side = Some(value),
                        "comm_range" => comm_range = Some(value),
                        other => return Err(parse_err(format!("unknown header key `{other}`"))),
                    }
                }
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            match fields.as_slice() {
                [id, x, y] => {
                    let id: usize = id
                        .parse()
                        .map_err(|_| parse_err(format!("bad node id `{id}`")))?;
                    if id != nodes.len() {
                        return Err(parse_err(format!(
                            "node ids must be consecutive from 0, expected {} got {id}",
                            nodes.len()
                        )));
                    }
                    let x: f64 = x.parse().map_err(|_| parse_err(format!("bad x `{x}`")))?;
                    let y: f64 = y.parse().map_err(|_| parse_err(format!("bad y `{y}`")))?;
                    nodes.push(Point::new(x, y));
                }
                [u, v] => {
                    let u: usize = u.parse().map_err(|_| parse_err(format!("bad node `{u}`")))?;
                    let v: usize = v.parse().map_err(|_| parse_err(format!("bad node `{v}`")))?;
                    edges.push((u, v));
                }
                _ => {
                    return Err(parse_err(format!(
                        "expected `node_id,x,y` or `u,v`, got {} fields",
                        fields.len()
                    )))
                }
            }
        }
        let area_side = area_side.ok_or(Error::Parse {
            line: 1,
            reason: "missing area_side header".into(),
        })?;
        let comm_range = comm_range.ok_or(Error::Parse {
            line: 1,
            reason: "missing comm_range header".into(),
        })?;
        Topology::from_parts(nodes, edges, area_side, comm_range)
    }
}

fn unit_disk(nodes: &[Point], range: f64) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for a in 0..nodes.len() {
        for b in a + 1..nodes.len() {
            let d = nodes[a].distance(&nodes[b]);
            if d <= range && d > 0.0 {
                edges.push((a, b));
            }
        }
    }
    edges
}

/// Places `n` nodes uniformly in the square and links every pair within
/// `comm_range`. Disconnected placements are redrawn up to
/// [`RESAMPLE_LIMIT`] times; after that the last placement is kept and the
/// range grows by [`RANGE_GROWTH`] until the graph connects.
pub fn generate_topology<R: Rng + ?Sized>(
    n: usize,
    area_side: f64,
    comm_range: f64,
    rng: &mut R,
) -> Result<Topology> {
    if n < 2 {
        return Err(Error::param("n_nodes", "at least two nodes are required"));
    }
    if !(area_side > 0.0 && area_side.is_finite()) {
        return Err(Error::param("area_side", "must be positive"));
    }
    if !(comm_range > 0.0 && comm_range.is_finite()) {
        return Err(Error::param("comm_range", "must be positive"));
    }
    let place = |rng: &mut R| -> Vec<Point> {
        (0..n)
            .map(|_| {
                Point::new(
                    rng.random_range(0.0..=area_side),
                    rng.random_range(0.0..=area_side),
                )
            })
            .collect()
    };

    let mut nodes = place(rng);
    for attempt in 0..RESAMPLE_LIMIT {
        let topo = Topology::from_parts(
            nodes.clone(),
            unit_disk(&nodes, comm_range),
            area_side,
            comm_range,
        )?;
        if topo.graph.is_connected() {
            return Ok(topo);
        }
        if attempt + 1 < RESAMPLE_LIMIT {
            nodes = place(rng);
        }
    }

    let diagonal = area_side * std::f64::consts::SQRT_2;
    let mut range = comm_range;
    loop {
        range = (range * RANGE_GROWTH).min(diagonal);
        let topo = Topology::from_parts(nodes.clone(), unit_disk(&nodes, range), area_side, range)?;
        if topo.graph.is_connected() || range >= diagonal {
            // Co-located nodes are the only way the full diagonal can still
            // leave the graph disconnected.
            if !topo.graph.is_connected() {
                return Err(Error::MalformedGraph(
                    "placement contains co-located nodes".into(),
                ));
            }
            return Ok(topo);
        }
    }
}

/// Rooted spanning tree (or subtree after pruning).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    root: NodeId,
    parent: BTreeMap<NodeId, NodeId>,
    children: BTreeMap<NodeId, Vec<NodeId>>,
    edge_dist: BTreeMap<NodeId, f64>,
}

impl Tree {
    /// Builds a tree from `child -> (parent, distance)` links, checking that
    /// every node reaches the root without cycles.
    pub fn from_parent_links(
        root: NodeId,
        links: impl IntoIterator<Item = (NodeId, NodeId, f64)>,
    ) -> Result<Self> {
        let mut parent = BTreeMap::new();
        let mut edge_dist = BTreeMap::new();
        let mut children: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
        for (child, par, d) in links {
            if child == root {
                return Err(Error::MalformedGraph(format!("root {root} given a parent")));
            }
            if parent.insert(child, par).is_some() {
                return Err(Error::MalformedGraph(format!("node {child} has two parents")));
            }
            edge_dist.insert(child, d);
            children.entry(par).or_default().push(child);
        }
        for list in children.values_mut() {
            list.sort();
        }
        let tree = Tree {
            root,
            parent,
            children,
            edge_dist,
        };
        tree.validate()?;
        Ok(tree)
    }

    fn validate(&self) -> Result<()> {
        for &par in self.children.keys() {
            if par != self.root && !self.parent.contains_key(&par) {
                return Err(Error::MalformedGraph(format!(
                    "node {par} has children but is not attached to the tree"
                )));
            }
        }
        // Walk up from every node; a walk longer than the node count is a cycle.
        let limit = self.parent.len() + 1;
        for &start in self.parent.keys() {
            let mut cur = start;
            let mut steps = 0;
            while cur != self.root {
                cur = self.parent[&cur];
                steps += 1;
                if steps > limit {
                    return Err(Error::MalformedGraph(format!(
                        "cycle through node {start}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn parent(&self, v: NodeId) -> Option<NodeId> {
        self.parent.get(&v).copied()
    }

    pub fn children(&self, v: NodeId) -> &[NodeId] {
        self.children.get(&v).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Distance from `v` to its parent.
    pub fn edge_dist(&self, v: NodeId) -> Option<f64> {
        self.edge_dist.get(&v).copied()
    }

    pub fn contains(&self, v: NodeId) -> bool {
        v == self.root || self.parent.contains_key(&v)
    }

    /// Spanned nodes in ascending id order.
    pub fn nodes(&self) -> Vec<NodeId> {
        let mut all: Vec<NodeId> = self.parent.keys().copied().collect();
        all.push(self.root);
        all.sort();
        all
    }

    pub fn node_count(&self) -> usize {
        self.parent.len() + 1
    }

    pub fn edge_count(&self) -> usize {
        self.parent.len()
    }

    /// Unordered edge set as `(min, max)` pairs.
    pub fn edge_set(&self) -> BTreeSet<(NodeId, NodeId)> {
        self.parent
            .iter()
            .map(|(&c, &p)| if c < p { (c, p) } else { (p, c) })
            .collect()
    }

    pub fn total_weight(&self) -> f64 {
        self.edge_dist.values().sum()
    }

    /// Nodes from the root down to `v`, inclusive.
    pub fn path_from_root(&self, v: NodeId) -> Option<Vec<NodeId>> {
        if !self.contains(v) {
            return None;
        }
        let mut path = vec![v];
        let mut cur = v;
        while let Some(p) = self.parent(cur) {
            path.push(p);
            cur = p;
        }
        path.reverse();
        Some(path)
    }

    pub fn root_distance(&self, v: NodeId) -> Option<f64> {
        let path = self.path_from_root(v)?;
        Some(path[1..].iter().map(|n| self.edge_dist[n]).sum())
    }

    pub fn depth(&self, v: NodeId) -> Option<usize> {
        self.path_from_root(v).map(|p| p.len() - 1)
    }

    pub fn leaves(&self) -> Vec<NodeId> {
        self.nodes()
            .into_iter()
            .filter(|v| self.children(*v).is_empty() && *v != self.root)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct HeapEntry {
    dist: f64,
    node: NodeId,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // Min-heap on distance, then on node id.
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Shortest path tree by Dijkstra. Equal-distance alternatives keep the
/// lower-id predecessor.
pub fn shortest_path_tree(graph: &Graph, root: NodeId) -> Result<Tree> {
    graph.check_root(root)?;
    let n = graph.node_count();
    let mut dist = vec![f64::INFINITY; n];
    let mut pred: Vec<Option<NodeId>> = vec![None; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[root.0] = 0.0;
    heap.push(HeapEntry {
        dist: 0.0,
        node: root,
    });
    while let Some(HeapEntry { dist: d, node: u }) = heap.pop() {
        if done[u.0] {
            continue;
        }
        done[u.0] = true;
        for &(v, w) in graph.neighbors(u) {
            if done[v.0] {
                continue;
            }
            let nd = d + w;
            let better = nd < dist[v.0] || (nd == dist[v.0] && pred[v.0].is_some_and(|p| u < p));
            if better {
                let improved = nd < dist[v.0];
                dist[v.0] = nd;
                pred[v.0] = Some(u);
                if improved {
                    heap.push(HeapEntry { dist: nd, node: v });
                }
            }
        }
    }
    let links = (0..n).filter_map(|i| {
        pred[i].map(|p| (NodeId(i), p, graph.weight(NodeId(i), p).expect("tree edge in graph")))
    });
    Tree::from_parent_links(root, links)
}

struct DisjointSet {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        DisjointSet {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = x;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            Ordering::Less => self.parent[ra] = rb,
            Ordering::Greater => self.parent[rb] = ra,
            Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        true
    }
}

/// Minimum spanning tree by Kruskal, re-rooted at `root`. Equal weights are
/// taken in lexicographic `(u, v)` order.
pub fn minimum_spanning_tree(graph: &Graph, root: NodeId) -> Result<Tree> {
    graph.check_root(root)?;
    let n = graph.node_count();
    let mut order: Vec<&Edge> = graph.edges().iter().collect();
    order.sort_by(|a, b| {
        a.dist
            .total_cmp(&b.dist)
            .then_with(|| a.u.cmp(&b.u))
            .then_with(|| a.v.cmp(&b.v))
    });
    let mut sets = DisjointSet::new(n);
    let mut adjacency: Vec<Vec<(NodeId, f64)>> = vec![Vec::new(); n];
    for e in order {
        if sets.union(e.u.0, e.v.0) {
            adjacency[e.u.0].push((e.v, e.dist));
            adjacency[e.v.0].push((e.u, e.dist));
        }
    }
    let mut links = Vec::with_capacity(n.saturating_sub(1));
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([root]);
    seen[root.0] = true;
    while let Some(u) = queue.pop_front() {
        for &(v, w) in &adjacency[u.0] {
            if !seen[v.0] {
                seen[v.0] = true;
                links.push((v, u, w));
                queue.push_back(v);
            }
        }
    }
    Tree::from_parent_links(root, links)
}

pub fn build_spt(topology: &Topology, root: NodeId) -> Result<Tree> {
    shortest_path_tree(topology.graph(), root)
}

pub fn build_mst(topology: &Topology, root: NodeId) -> Result<Tree> {
    minimum_spanning_tree(topology.graph(), root)
}

/// Keeps exactly the union of root-to-destination paths.
pub fn prune_tree(tree: &Tree, destinations: &BTreeSet<NodeId>) -> Result<Tree> {
    if destinations.is_empty() {
        return Err(Error::EmptyDestinations);
    }
    if destinations.contains(&tree.root) {
        return Err(Error::RootIsDestination(tree.root));
    }
    let mut keep = BTreeSet::new();
    for &d in destinations {
        let path = tree.path_from_root(d).ok_or(Error::UnknownNode(d))?;
        keep.extend(path);
    }
    let links = keep
        .iter()
        .filter_map(|&v| tree.parent(v).map(|p| (v, p, tree.edge_dist[&v])));
    Tree::from_parent_links(tree.root, links)
}

/// One transmitter event: a node and all of its children in the tree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerEntry {
    pub transmitter: NodeId,
    pub receivers: Vec<NodeId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerSchedule {
    pub entries: Vec<LayerEntry>,
}

impl LayerSchedule {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Index of the entry whose receivers include `v`.
    pub fn entry_of_receiver(&self, v: NodeId) -> Option<usize> {
        self.entries.iter().position(|e| e.receivers.contains(&v))
    }
}

/// Breadth-first schedule from the root; children are listed in ascending
/// id order.
pub fn layerize(tree: &Tree) -> LayerSchedule {
    let mut entries = Vec::new();
    let mut queue = VecDeque::from([tree.root]);
    while let Some(u) = queue.pop_front() {
        let kids = tree.children(u);
        if kids.is_empty() {
            continue;
        }
        entries.push(LayerEntry {
            transmitter: u,
            receivers: kids.to_vec(),
        });
        queue.extend(kids.iter().copied());
    }
    LayerSchedule { entries }
}

/// Picks `count` distinct non-root destinations uniformly at random; the
/// result is sorted.
pub fn choose_destinations<R: Rng + ?Sized>(
    n_nodes: usize,
    root: NodeId,
    count: usize,
    rng: &mut R,
) -> Result<BTreeSet<NodeId>> {
    if count == 0 {
        return Err(Error::EmptyDestinations);
    }
    if count >= n_nodes {
        return Err(Error::param(
            "n_dest",
            format!("{count} destinations need more than {n_nodes} nodes"),
        ));
    }
    let candidates: Vec<NodeId> = (0..n_nodes).map(NodeId).filter(|&v| v != root).collect();
    let picked = rand::seq::index::sample(rng, candidates.len(), count);
    Ok(picked.into_iter().map(|i| candidates[i]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ids(v: &[usize]) -> Vec<NodeId> {
        v.iter().copied().map(NodeId).collect()
    }

    fn set(v: &[usize]) -> BTreeSet<NodeId> {
        v.iter().copied().map(NodeId).collect()
    }

    #[test]
    fn two_nodes_in_range_share_one_edge() {
        let topo = Topology::from_parts(
            vec![Point::new(0.0, 0.0), Point::new(3.0, 4.0)],
            unit_disk(&[Point::new(0.0, 0.0), Point::new(3.0, 4.0)], 10.0),
            10.0,
            10.0,
        )
        .unwrap();
        assert_eq!(topo.edges().len(), 1);
        assert_eq!(topo.edges()[0].dist, 5.0);
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate_topology(30, 200.0, 60.0, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        let b = generate_topology(30, 200.0, 60.0, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn tiny_range_grows_until_connected() {
        let topo = generate_topology(10, 200.0, 1.0, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert!(topo.graph().is_connected());
        assert!(topo.comm_range() > 1.0);
        for e in topo.edges() {
            assert!(e.dist <= topo.comm_range());
        }
    }

    #[test]
    fn generation_rejects_bad_parameters() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(generate_topology(1, 200.0, 60.0, &mut rng).is_err());
        assert!(generate_topology(5, 0.0, 60.0, &mut rng).is_err());
        assert!(generate_topology(5, 200.0, -1.0, &mut rng).is_err());
    }

    #[test]
    fn graph_rejects_self_loops_and_duplicates() {
        assert!(Graph::new(3, [(1, 1, 1.0)]).is_err());
        assert!(Graph::new(3, [(0, 1, 1.0), (1, 0, 2.0)]).is_err());
        assert!(Graph::new(3, [(0, 5, 1.0)]).is_err());
        assert!(Graph::new(3, [(0, 1, 0.0)]).is_err());
    }

    #[test]
    fn spt_on_path_graph() {
        let g = Graph::new(4, [(1, 2, 1.0), (2, 3, 1.0), (0, 1, 1.0)]).unwrap();
        let t = shortest_path_tree(&g, NodeId(1)).unwrap();
        assert_eq!(t.parent(NodeId(2)), Some(NodeId(1)));
        assert_eq!(t.parent(NodeId(3)), Some(NodeId(2)));
        assert_eq!(t.parent(NodeId(0)), Some(NodeId(1)));
    }

    #[test]
    fn spt_tie_prefers_lower_predecessor() {
        // Square 0-1-3 and 0-2-3 with equal lengths.
        let g = Graph::new(4, [(0, 1, 1.0), (0, 2, 1.0), (1, 3, 1.0), (2, 3, 1.0)]).unwrap();
        let t = shortest_path_tree(&g, NodeId(0)).unwrap();
        assert_eq!(t.parent(NodeId(3)), Some(NodeId(1)));
        // Same graph, labels swapped so the later-popped node has the lower id.
        let g = Graph::new(4, [(0, 2, 1.0), (0, 1, 1.5), (2, 3, 1.5), (1, 3, 1.0)]).unwrap();
        let t = shortest_path_tree(&g, NodeId(0)).unwrap();
        assert_eq!(t.parent(NodeId(3)), Some(NodeId(1)));
    }

    #[test]
    fn mst_on_triangle() {
        let g = Graph::new(3, [(0, 1, 1.0), (1, 2, 2.0), (0, 2, 3.0)]).unwrap();
        let t = minimum_spanning_tree(&g, NodeId(0)).unwrap();
        assert_eq!(t.total_weight(), 3.0);
        assert_eq!(t.edge_set(), [(NodeId(0), NodeId(1)), (NodeId(1), NodeId(2))].into());
    }

    #[test]
    fn mst_edge_set_is_root_independent() {
        let g = Graph::new(
            5,
            [(0, 1, 1.0), (1, 2, 2.5), (0, 2, 3.0), (2, 3, 1.5), (3, 4, 4.0), (1, 4, 4.5)],
        )
        .unwrap();
        let a = minimum_spanning_tree(&g, NodeId(0)).unwrap();
        let b = minimum_spanning_tree(&g, NodeId(4)).unwrap();
        assert_eq!(a.edge_set(), b.edge_set());
        assert_eq!(b.root(), NodeId(4));
        assert_eq!(b.parent(NodeId(4)), None);
    }

    #[test]
    fn disconnected_graph_is_rejected() {
        let g = Graph::new(4, [(0, 1, 1.0), (2, 3, 1.0)]).unwrap();
        assert!(shortest_path_tree(&g, NodeId(0)).is_err());
        assert!(minimum_spanning_tree(&g, NodeId(0)).is_err());
        assert!(shortest_path_tree(&g, NodeId(9)).is_err());
    }

    /// Tree of the 15-node worked example after Dijkstra, including the
    /// non-destination node 14 hanging off node 8.
    pub(crate) fn worked_example_tree() -> Tree {
        let links = [
            (6, 1),
            (8, 1),
            (9, 1),
            (2, 1),
            (10, 2),
            (7, 8),
            (14, 8),
            (3, 2),
            (4, 3),
            (5, 9),
            (11, 6),
            (12, 11),
            (13, 9),
            (15, 13),
        ];
        Tree::from_parent_links(
            NodeId(1),
            links.iter().map(|&(c, p)| (NodeId(c), NodeId(p), 10.0)),
        )
        .unwrap()
    }

    #[test]
    fn prune_drops_non_relay_branches() {
        let tree = worked_example_tree();
        let pruned = prune_tree(&tree, &set(&[6, 7, 8, 9, 10])).unwrap();
        assert!(!pruned.contains(NodeId(14)));
        assert_eq!(pruned.parent(NodeId(7)), Some(NodeId(8)));
        assert_eq!(pruned.node_count(), 7);
        for leaf in pruned.leaves() {
            assert!([6, 7, 9, 10].contains(&leaf.0));
        }
    }

    #[test]
    fn prune_with_all_destinations_is_identity() {
        let tree = worked_example_tree();
        let all: BTreeSet<NodeId> = tree.nodes().into_iter().filter(|&v| v != NodeId(1)).collect();
        assert_eq!(prune_tree(&tree, &all).unwrap(), tree);
    }

    #[test]
    fn prune_star_to_one_leaf() {
        let star = Tree::from_parent_links(
            NodeId(0),
            [1, 2, 3].map(|c| (NodeId(c), NodeId(0), 1.0)),
        )
        .unwrap();
        let pruned = prune_tree(&star, &set(&[2])).unwrap();
        assert_eq!(pruned.edge_count(), 1);
        assert_eq!(pruned.parent(NodeId(2)), Some(NodeId(0)));
    }

    #[test]
    fn prune_errors() {
        let tree = worked_example_tree();
        assert_eq!(
            prune_tree(&tree, &BTreeSet::new()),
            Err(Error::EmptyDestinations)
        );
        assert_eq!(
            prune_tree(&tree, &set(&[1, 6])),
            Err(Error::RootIsDestination(NodeId(1)))
        );
        assert_eq!(
            prune_tree(&tree, &set(&[99])),
            Err(Error::UnknownNode(NodeId(99)))
        );
    }

    #[test]
    fn layerize_worked_example() {
        let pruned = prune_tree(&worked_example_tree(), &set(&[6, 7, 8, 9, 10])).unwrap();
        let schedule = layerize(&pruned);
        assert_eq!(schedule.len(), 3);
        assert_eq!(schedule.entries[0].transmitter, NodeId(1));
        assert_eq!(schedule.entries[0].receivers, ids(&[2, 6, 8, 9]));
        assert_eq!(schedule.entries[1].transmitter, NodeId(2));
        assert_eq!(schedule.entries[1].receivers, ids(&[10]));
        assert_eq!(schedule.entries[2].transmitter, NodeId(8));
        assert_eq!(schedule.entries[2].receivers, ids(&[7]));
    }

    #[test]
    fn layerize_single_edge_and_chain() {
        let edge = Tree::from_parent_links(NodeId(0), [(NodeId(1), NodeId(0), 2.0)]).unwrap();
        let s = layerize(&edge);
        assert_eq!(s.entries, vec![LayerEntry {
            transmitter: NodeId(0),
            receivers: ids(&[1]),
        }]);

        let chain = Tree::from_parent_links(
            NodeId(0),
            (1..=5).map(|i| (NodeId(i), NodeId(i - 1), 1.0)),
        )
        .unwrap();
        let s = layerize(&chain);
        assert_eq!(s.len(), 5);
        assert!(s.entries.iter().all(|e| e.receivers.len() == 1));
    }

    #[test]
    fn tree_rejects_cycles() {
        let r = Tree::from_parent_links(
            NodeId(0),
            [(NodeId(1), NodeId(2), 1.0), (NodeId(2), NodeId(1), 1.0)],
        );
        assert!(r.is_err());
    }

    #[test]
    fn text_round_trip_is_exact() {
        let topo = generate_topology(12, 200.0, 80.0, &mut ChaCha8Rng::seed_from_u64(11)).unwrap();
        let text = topo.to_text();
        let back = Topology::from_text(&text).unwrap();
        assert_eq!(back, topo);
        assert_eq!(back.to_text(), text);
    }

    #[test]
    fn text_parse_errors_carry_line_numbers() {
        let bad = "# area_side=10 comm_range=5\n0,1,1\n1,2,x\n";
        match Topology::from_text(bad) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(Topology::from_text("0,1,1\n").is_err());
    }

    #[test]
    fn destinations_exclude_root() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let d = choose_destinations(10, NodeId(0), 9, &mut rng).unwrap();
            assert_eq!(d.len(), 9);
            assert!(!d.contains(&NodeId(0)));
        }
        assert!(choose_destinations(10, NodeId(0), 10, &mut rng).is_err());
        assert!(choose_destinations(10, NodeId(0), 0, &mut rng).is_err());
    }
}
