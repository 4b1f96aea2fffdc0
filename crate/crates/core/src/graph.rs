//! Simple undirected connected graphs: the combinatorial families with
//! integral Laplacian spectra, plus edge-list ingestion for anything else.
//!
//! Family vertices are numbered in lexicographic order of their canonical
//! labels: ascending k-subsets for Johnson/Kneser, row-major tuples for
//! Hamming, rook and complete-square graphs, and `V1` before `V2` for the
//! complete bipartite graph.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::io::BufRead;
use std::str::FromStr;

use itertools::Itertools;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest graph accepted by [`check_vertex_transitive_bruteforce`].
pub const BRUTEFORCE_MAX_VERTICES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Johnson { n: usize, k: usize },
    Kneser { n: usize, k: usize },
    Hamming { d: usize, q: usize },
    Rook { m: usize, n: usize },
    /// `K_n □ C_4`.
    CompleteSquare { n: usize },
    CompleteBipartite { n1: usize, n2: usize },
    Custom,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Family::Johnson { n, k } => write!(f, "johnson({n},{k})"),
            Family::Kneser { n, k } => write!(f, "kneser({n},{k})"),
            Family::Hamming { d, q } => write!(f, "hamming({d},{q})"),
            Family::Rook { m, n } => write!(f, "rook({m},{n})"),
            Family::CompleteSquare { n } => write!(f, "complete-square({n})"),
            Family::CompleteBipartite { n1, n2 } => write!(f, "complete-bipartite({n1},{n2})"),
            Family::Custom => write!(f, "custom"),
        }
    }
}

impl Family {
    /// Builds a family tag from a name and its positional parameters.
    pub fn from_name(name: &str, params: &[usize]) -> Result<Family> {
        let want = |count: usize| -> Result<()> {
            if params.len() == count {
                Ok(())
            } else {
                Err(Error::ParameterOutOfRange(format!(
                    "{name} takes {count} parameter(s), got {}",
                    params.len()
                )))
            }
        };
        let family = match name {
            "johnson" => {
                want(2)?;
                Family::Johnson { n: params[0], k: params[1] }
            }
            "kneser" => {
                want(2)?;
                Family::Kneser { n: params[0], k: params[1] }
            }
            "hamming" => {
                want(2)?;
                Family::Hamming { d: params[0], q: params[1] }
            }
            "rook" => {
                want(2)?;
                Family::Rook { m: params[0], n: params[1] }
            }
            "complete-square" => {
                want(1)?;
                Family::CompleteSquare { n: params[0] }
            }
            "complete-bipartite" => {
                want(2)?;
                Family::CompleteBipartite { n1: params[0], n2: params[1] }
            }
            "custom" => {
                want(0)?;
                Family::Custom
            }
            other => {
                return Err(Error::ParameterOutOfRange(format!("unknown family '{other}'")))
            }
        };
        Ok(family)
    }

    /// Transitivity implied by the family definition.
    pub fn transitivity(&self) -> Transitivity {
        match *self {
            Family::CompleteBipartite { n1, n2 } if n1 != n2 => Transitivity::No,
            Family::Custom => Transitivity::Unknown,
            _ => Transitivity::Yes,
        }
    }
}

impl FromStr for Family {
    type Err = Error;

    /// Parses the [`Display`](fmt::Display) form, e.g. `johnson(5,2)`.
    fn from_str(s: &str) -> Result<Family> {
        let s = s.trim();
        let (name, params) = match s.split_once('(') {
            Some((name, rest)) => {
                let inner = rest.strip_suffix(')').ok_or_else(|| {
                    Error::ParameterOutOfRange(format!("malformed family '{s}'"))
                })?;
                let params = inner
                    .split(',')
                    .map(|p| {
                        p.trim().parse::<usize>().map_err(|_| {
                            Error::ParameterOutOfRange(format!("bad parameter '{p}' in '{s}'"))
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                (name, params)
            }
            None => (s, Vec::new()),
        };
        Family::from_name(name, &params)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Transitivity {
    Yes,
    No,
    Unknown,
}

/// A simple undirected connected graph on vertices `0..n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "GraphRecord", try_from = "GraphRecord")]
pub struct Graph {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
    family: Family,
    vertex_transitive: Transitivity,
}

/// JSON shape of a graph.
#[derive(Serialize, Deserialize)]
struct GraphRecord {
    n: usize,
    edges: Vec<[usize; 2]>,
    family: Option<String>,
    vertex_transitive: Transitivity,
}

impl From<Graph> for GraphRecord {
    fn from(g: Graph) -> Self {
        GraphRecord {
            n: g.n,
            edges: g.edges.iter().map(|&(u, v)| [u, v]).collect(),
            family: match g.family {
                Family::Custom => None,
                f => Some(f.to_string()),
            },
            vertex_transitive: g.vertex_transitive,
        }
    }
}

impl TryFrom<GraphRecord> for Graph {
    type Error = Error;

    fn try_from(r: GraphRecord) -> Result<Graph> {
        let family = match r.family {
            Some(name) => name.parse()?,
            None => Family::Custom,
        };
        Graph::with_tags(r.n, r.edges.iter().map(|e| (e[0], e[1])), family, r.vertex_transitive)
    }
}

impl Graph {
    /// Untagged graph from an edge list; duplicate edges collapse.
    pub fn custom(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Graph> {
        Graph::with_tags(n, edges, Family::Custom, Transitivity::Unknown)
    }

    fn with_tags(
        n: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
        family: Family,
        vertex_transitive: Transitivity,
    ) -> Result<Graph> {
        if n == 0 {
            return Err(Error::ParameterOutOfRange("graph needs at least one vertex".into()));
        }
        let mut set = BTreeSet::new();
        for (u, v) in edges {
            for w in [u, v] {
                if w >= n {
                    return Err(Error::VertexOutOfRange { vertex: w, n });
                }
            }
            if u == v {
                return Err(Error::ParameterOutOfRange(format!("self-loop at vertex {u}")));
            }
            set.insert((u.min(v), u.max(v)));
        }
        let g = Graph { n, edges: set, family, vertex_transitive };
        if !g.is_connected() {
            return Err(Error::Disconnected);
        }
        Ok(g)
    }

    /// Cycle `C_k` as an untagged graph.
    pub fn cycle(k: usize) -> Result<Graph> {
        if k < 3 {
            return Err(Error::ParameterOutOfRange(format!("cycle needs k >= 3, got {k}")));
        }
        Graph::custom(k, (0..k).map(|i| (i, (i + 1) % k)))
    }

    /// Path `P_k` as an untagged graph.
    pub fn path(k: usize) -> Result<Graph> {
        Graph::custom(k, (1..k).map(|i| (i - 1, i)))
    }

    pub fn build_family(family: Family) -> Result<Graph> {
        let range = |msg: String| Err(Error::ParameterOutOfRange(msg));
        let edges: Vec<(usize, usize)>;
        let n: usize;
        match family {
            Family::Johnson { n: size, k } => {
                if !(1 <= k && k < size) {
                    return range(format!("johnson needs 1 <= k < n, got n={size} k={k}"));
                }
                let subsets = (0..size).combinations(k).collect_vec();
                n = subsets.len();
                edges = pairs_where(&subsets, |a, b| intersection_size(a, b) == k - 1);
            }
            Family::Kneser { n: size, k } => {
                if k < 1 || size < 2 * k {
                    return range(format!("kneser needs k >= 1 and n >= 2k, got n={size} k={k}"));
                }
                let subsets = (0..size).combinations(k).collect_vec();
                n = subsets.len();
                edges = pairs_where(&subsets, |a, b| intersection_size(a, b) == 0);
            }
            Family::Hamming { d, q } => {
                if d < 1 || q < 2 {
                    return range(format!("hamming needs d >= 1 and q >= 2, got d={d} q={q}"));
                }
                let tuples = (0..d).map(|_| 0..q).multi_cartesian_product().collect_vec();
                n = tuples.len();
                edges = pairs_where(&tuples, |a, b| {
                    a.iter().zip(b).filter(|(x, y)| x != y).count() == 1
                });
            }
            Family::Rook { m, n: cols } => {
                if m < 2 || cols < 2 {
                    return range(format!("rook needs m, n >= 2, got m={m} n={cols}"));
                }
                let cells = (0..m).cartesian_product(0..cols).collect_vec();
                n = cells.len();
                edges = pairs_where(&cells, |a, b| (a.0 == b.0) != (a.1 == b.1));
            }
            Family::CompleteSquare { n: size } => {
                if size < 2 {
                    return range(format!("complete-square needs n >= 2, got n={size}"));
                }
                let cells = (0..size).cartesian_product(0..4usize).collect_vec();
                n = cells.len();
                edges = pairs_where(&cells, |a, b| {
                    if a.1 == b.1 {
                        a.0 != b.0
                    } else {
                        a.0 == b.0 && ((a.1 + 1) % 4 == b.1 || (b.1 + 1) % 4 == a.1)
                    }
                });
            }
            Family::CompleteBipartite { n1, n2 } => {
                if n1 < 1 || n2 < 1 {
                    return range(format!("complete-bipartite needs n1, n2 >= 1, got {n1},{n2}"));
                }
                n = n1 + n2;
                edges = (0..n1).cartesian_product(n1..n).collect();
            }
            Family::Custom => {
                return range("custom graphs are built from edge lists".into());
            }
        }
        Graph::with_tags(n, edges, family, family.transitivity())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn vertex_transitive(&self) -> Transitivity {
        self.vertex_transitive
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edges.contains(&(u.min(v), u.max(v)))
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for &(u, v) in &self.edges {
            deg[u] += 1;
            deg[v] += 1;
        }
        deg
    }

    pub fn neighbors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        adj
    }

    fn is_connected(&self) -> bool {
        let adj = self.neighbors();
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    queue.push_back(v);
                }
            }
        }
        count == self.n
    }

    /// Laplacian `L = D - A`.
    pub fn laplacian(&self) -> SymmetricMatrix {
        let mut m = DMatrix::zeros(self.n, self.n);
        for (v, d) in self.degrees().into_iter().enumerate() {
            m[(v, v)] = d as f64;
        }
        for &(u, v) in &self.edges {
            m[(u, v)] = -1.0;
            m[(v, u)] = -1.0;
        }
        SymmetricMatrix(m)
    }

    pub fn adjacency(&self) -> SymmetricMatrix {
        let mut m = DMatrix::zeros(self.n, self.n);
        for &(u, v) in &self.edges {
            m[(u, v)] = 1.0;
            m[(v, u)] = 1.0;
        }
        SymmetricMatrix(m)
    }

    /// Edge-list text accepted by [`load_edge_list`].
    pub fn to_edge_list(&self) -> String {
        self.edges.iter().map(|(u, v)| format!("{u} {v}\n")).collect()
    }
}

fn intersection_size(a: &[usize], b: &[usize]) -> usize {
    // both sorted ascending
    let (mut i, mut j, mut count) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                count += 1;
                i += 1;
                j += 1;
            }
        }
    }
    count
}

fn pairs_where<T>(labels: &[T], adjacent: impl Fn(&T, &T) -> bool) -> Vec<(usize, usize)> {
    (0..labels.len())
        .tuple_combinations()
        .filter(|&(i, j)| adjacent(&labels[i], &labels[j]))
        .collect()
}

/// Reads whitespace-separated `u v` pairs, one per line; `#` starts a comment.
pub fn load_edge_list(reader: impl BufRead) -> Result<Graph> {
    let mut edges = Vec::new();
    let mut max_vertex = None;
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = content.split_whitespace().collect();
        if tokens.len() != 2 {
            return Err(Error::Parse {
                line: lineno,
                message: format!("expected two vertex indices, found {}", tokens.len()),
            });
        }
        let parse = |tok: &str| {
            tok.parse::<usize>().map_err(|_| Error::Parse {
                line: lineno,
                message: format!("'{tok}' is not a vertex index"),
            })
        };
        let (u, v) = (parse(tokens[0])?, parse(tokens[1])?);
        if u == v {
            return Err(Error::Parse { line: lineno, message: format!("self-loop at vertex {u}") });
        }
        max_vertex = max_vertex.max(Some(u.max(v)));
        edges.push((u, v));
    }
    let n = match max_vertex {
        Some(m) => m + 1,
        None => return Err(Error::Parse { line: 0, message: "no edges".into() }),
    };
    Graph::custom(n, edges)
}

/// Decides vertex-transitivity by enumerating all vertex permutations.
pub fn check_vertex_transitive_bruteforce(g: &Graph) -> Result<bool> {
    let n = g.n();
    if n > BRUTEFORCE_MAX_VERTICES {
        return Err(Error::TooLarge { n, max: BRUTEFORCE_MAX_VERTICES });
    }
    // Transitive iff the automorphism orbit of vertex 0 is everything.
    let mut orbit = vec![false; n];
    for perm in (0..n).permutations(n) {
        if orbit[perm[0]] {
            continue;
        }
        if g.edges().all(|(u, v)| g.has_edge(perm[u], perm[v])) {
            orbit[perm[0]] = true;
        }
    }
    Ok(orbit.into_iter().all(|x| x))
}

/// Real symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix(DMatrix<f64>);

impl SymmetricMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<SymmetricMatrix> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch { expected: m.nrows(), found: m.ncols() });
        }
        for i in 0..m.nrows() {
            for j in 0..i {
                if m[(i, j)] != m[(j, i)] {
                    return Err(Error::ParameterOutOfRange(format!(
                        "matrix is not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        Ok(SymmetricMatrix(m))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn max_abs(&self) -> f64 {
        self.0.amax()
    }
}

impl std::ops::Index<(usize, usize)> for SymmetricMatrix {
    type Output = f64;

    fn index(&self, idx: (usize, usize)) -> &f64 {
        &self.0[idx]
    }
}
