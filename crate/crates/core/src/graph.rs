//! Communication digraphs and the spectral quantities used by the finite-time reference protocol.
//!
//! Edge convention: an edge `j → i` means agent `i` receives from agent `j`, so `a_ij = 1`
//! and `j` is an in-neighbor of `i`. The Laplacian is `L = D − A` with `D` the in-degree matrix.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{normalized_null_vector, symmetric_eigenvalues, LinalgError, Matrix};
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("a graph needs at least one agent")]
    Empty,
    #[error("adjacency must be {n}x{n}")]
    Shape { n: usize },
    #[error("adjacency entry ({row},{col}) = {value} is not binary")]
    NonBinaryWeight { row: usize, col: usize, value: f64 },
    #[error("self loop at agent {0}")]
    SelfLoop(usize),
    #[error("edge {from}->{to} references an agent outside 0..{n}")]
    EdgeOutOfRange { from: usize, to: usize, n: usize },
    #[error("graph is not strongly connected")]
    NotStronglyConnected,
    #[error("second smallest eigenvalue {lambda2} of HL + LᵀH is not positive")]
    DegenerateSpectrum { lambda2: f64 },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Unweighted directed communication graph.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Digraph {
    n: usize,
    /// `adjacency[i][j]` is `a_ij`: agent `i` listens to agent `j`.
    adjacency: Vec<Vec<bool>>,
}

impl Digraph {
    /// Builds a graph from `(from, to)` pairs with 0-based agent indices.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::Empty);
        }
        let mut adjacency = vec![vec![false; n]; n];
        for &(from, to) in edges {
            if from >= n || to >= n {
                return Err(GraphError::EdgeOutOfRange { from, to, n });
            }
            if from == to {
                return Err(GraphError::SelfLoop(from));
            }
            adjacency[to][from] = true;
        }
        Ok(Self { n, adjacency })
    }

    /// Builds a graph from a numeric adjacency matrix whose entries must be exactly 0 or 1.
    pub fn from_adjacency(rows: &[Vec<f64>]) -> Result<Self, GraphError> {
        let n = rows.len();
        if n == 0 {
            return Err(GraphError::Empty);
        }
        let mut adjacency = vec![vec![false; n]; n];
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(GraphError::Shape { n });
            }
            for (j, &value) in row.iter().enumerate() {
                if value != 0.0 && value != 1.0 {
                    return Err(GraphError::NonBinaryWeight { row: i, col: j, value });
                }
                if value == 1.0 {
                    if i == j {
                        return Err(GraphError::SelfLoop(i));
                    }
                    adjacency[i][j] = true;
                }
            }
        }
        Ok(Self { n, adjacency })
    }

    /// Directed ring `0 → 1 → … → n−1 → 0`.
    pub fn directed_cycle(n: usize) -> Result<Self, GraphError> {
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        if n == 1 {
            return Self::from_edges(1, &[]);
        }
        Self::from_edges(n, &edges)
    }

    /// Complete digraph on `n` agents.
    pub fn complete(n: usize) -> Result<Self, GraphError> {
        let edges: Vec<_> = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).collect();
        Self::from_edges(n, &edges)
    }

    pub fn agent_count(&self) -> usize {
        self.n
    }

    /// `a_ij` as a boolean.
    pub fn listens(&self, i: usize, j: usize) -> bool {
        self.adjacency[i][j]
    }

    /// In-neighbors of agent `i`.
    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.adjacency[i].iter().enumerate().filter(|(_, &a)| a).map(|(j, _)| j)
    }

    pub fn in_degree(&self, i: usize) -> usize {
        self.neighbors(i).count()
    }

    /// Edges as `(from, to)` pairs, ordered by receiver then sender.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in self.neighbors(i) {
                out.push((j, i));
            }
        }
        out
    }

    /// `L = D − A`.
    pub fn laplacian<T: Scalar>(&self) -> Matrix<T> {
        let mut l = Matrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for j in self.neighbors(i) {
                l[(i, j)] = -T::one();
            }
            l[(i, i)] = T::from_count(self.in_degree(i));
        }
        l
    }

    /// `ϖ = L s`, evaluated as `Σ_{j∈N_i}(s_i − s_j)` per agent.
    pub fn local_disagreement<T: Scalar>(&self, s: &[T]) -> Vec<T> {
        assert_eq!(s.len(), self.n);
        (0..self.n).map(|i| self.neighbors(i).map(|j| s[i] - s[j]).fold(T::zero(), |a, b| a + b)).collect()
    }

    /// True iff every ordered pair of agents is joined by a directed path.
    ///
    /// Checked by reachability from agent 0 along edges and along reversed edges.
    pub fn is_strongly_connected(&self) -> bool {
        let forward = self.reachable_from(0, false);
        let backward = self.reachable_from(0, true);
        forward.iter().all(|&v| v) && backward.iter().all(|&v| v)
    }

    fn reachable_from(&self, start: usize, reversed: bool) -> Vec<bool> {
        let mut seen = vec![false; self.n];
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(v) = stack.pop() {
            for w in 0..self.n {
                // forward: v → w exists when w listens to v.
                let edge = if reversed { self.adjacency[v][w] } else { self.adjacency[w][v] };
                if edge && !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen
    }
}

/// Left null vector data of a strongly connected Laplacian.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralData<T> {
    /// Positive left eigenvector of `L`, normalized to `hᵀ1 = 1`.
    pub h: Vec<T>,
    /// `Q = HL + LᵀH` with `H = diag(h)`.
    pub q: Matrix<T>,
    /// Eigenvalues of `Q`, ascending.
    pub eigenvalues: Vec<T>,
    pub lambda2: T,
    /// `max_i h_i`.
    pub hbar: T,
}

/// Positive left eigenvector `h` of `L` with `hᵀL = 0` and `hᵀ1 = 1`.
pub fn left_eigenvector<T: Scalar>(l: &Matrix<T>) -> Result<Vec<T>, GraphError> {
    let h = match normalized_null_vector(&l.transpose()) {
        Ok(h) => h,
        Err(LinalgError::RankDeficient) => return Err(GraphError::NotStronglyConnected),
        Err(e) => return Err(e.into()),
    };
    let floor = T::lit(1e-12).max(T::epsilon() * T::lit(64.0));
    if h.iter().any(|&v| v <= floor) {
        return Err(GraphError::NotStronglyConnected);
    }
    Ok(h)
}

/// Builds `Q = HL + LᵀH` and its second smallest eigenvalue.
///
/// `Q` is assembled entrywise as `h_i l_ij + l_ji h_j`, which is exactly symmetric.
pub fn spectral_data<T: Scalar>(l: &Matrix<T>, h: &[T]) -> Result<SpectralData<T>, GraphError> {
    let n = l.rows();
    if !l.is_square() || h.len() != n {
        return Err(GraphError::Shape { n });
    }
    let mut q = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            q[(i, j)] = h[i] * l[(i, j)] + l[(j, i)] * h[j];
        }
    }
    let eigenvalues = symmetric_eigenvalues(&q)?;
    let lambda2 = if n >= 2 { eigenvalues[1] } else { T::zero() };
    if lambda2 <= T::lit(1e-10) {
        return Err(GraphError::DegenerateSpectrum { lambda2: lambda2.as_f64() });
    }
    let hbar = h.iter().fold(T::zero(), |m, &v| m.max(v));
    Ok(SpectralData { h: h.to_vec(), q, eigenvalues, lambda2, hbar })
}

/// Laplacian, left eigenvector and `Q` spectrum of a strongly connected graph in one call.
pub fn analyze<T: Scalar>(g: &Digraph) -> Result<SpectralData<T>, GraphError> {
    if !g.is_strongly_connected() {
        return Err(GraphError::NotStronglyConnected);
    }
    let l = g.laplacian::<T>();
    let h = left_eigenvector(&l)?;
    spectral_data(&l, &h)
}
