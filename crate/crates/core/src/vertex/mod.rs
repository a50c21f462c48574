//! Face states, the cube vertex operator `W` and its diagonal extension `W_h`.
//!
//! A 2-face carries the four spins of its edges in role order
//! `(i1, i2, o1, o2)`. The face state index packs them into four bits with
//! `i1` most significant and spin `+1` stored as bit 0. A 3-cube reads three
//! incoming faces `0**`, `*1*`, `**0` and writes three outgoing faces `1**`,
//! `*0*`, `**1`; the cube operator is a 4096 × 4096 matrix whose support is
//! the set of edge-spin fields induced by vertex spins.

pub mod cover;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hypercube::{code, edge_roles, subfaces, HypercubeError, Orientation, SubfaceCode};
use crate::scalar::Scalar;
use crate::sparse::{pack, SparseOperator};

pub use cover::{
    cover_check, cover_energy, cover_histogram, cover_weight, cube_symmetries, realize_partition, search_cover,
    table_candidates, CoverAssignment, CoverError,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VertexError {
    #[error(transparent)]
    Hypercube(#[from] HypercubeError),
    #[error("{0} is not an edge of the 3-cube")]
    NotAnEdge(SubfaceCode),
    #[error("{0} is not a 2-face of the 3-cube")]
    NotAFace(SubfaceCode),
    #[error("cube {0} is not a 3-face")]
    NotACube(SubfaceCode),
}

/// State of one 2-face: four edge spins packed as `i1 i2 o1 o2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FaceState(pub u8);

impl FaceState {
    pub fn from_spins(spins: [i8; 4]) -> Self {
        FaceState(spins.iter().fold(0u8, |acc, &s| (acc << 1) | u8::from(s < 0)))
    }

    pub fn spins(self) -> [i8; 4] {
        std::array::from_fn(|k| if self.0 >> (3 - k) & 1 == 1 { -1 } else { 1 })
    }

    /// Product of the four edge spins.
    pub fn parity(self) -> i8 {
        self.spins().iter().product()
    }

    /// `i1 · o2`, the spin on the face diagonal.
    pub fn diagonal_spin(self) -> i8 {
        let s = self.spins();
        s[0] * s[3]
    }

    /// `(i1, i2, o1, o2) ↦ (o2, o1, i2, i1)`.
    pub fn a_swap(self) -> Self {
        let s = self.spins();
        Self::from_spins([s[3], s[2], s[1], s[0]])
    }
}

/// The face-swap involution as a permutation of the 16 face states.
pub fn a_permutation() -> [u32; 16] {
    std::array::from_fn(|k| FaceState(k as u8).a_swap().0 as u32)
}

/// `R[a][b] = 1` iff the face state whose four spins are `(a1, a2, b1, b2)`
/// has even parity, with `a, b ∈ {0..3}` read as two spin bits each.
pub fn r_matrix() -> [[u8; 4]; 4] {
    std::array::from_fn(|a| std::array::from_fn(|b| u8::from(FaceState(((a << 2) | b) as u8).parity() == 1)))
}

pub fn incoming_faces() -> [SubfaceCode; 3] {
    [code("0**"), code("*1*"), code("**0")]
}

pub fn outgoing_faces() -> [SubfaceCode; 3] {
    [code("1**"), code("*0*"), code("**1")]
}

/// The twelve edges of the 3-cube in sorted order.
pub fn cube_edges() -> Vec<SubfaceCode> {
    subfaces(&SubfaceCode::full(3), 1)
}

/// The six 2-faces of the 3-cube in sorted order.
pub fn cube_faces() -> Vec<SubfaceCode> {
    subfaces(&SubfaceCode::full(3), 2)
}

/// One consistent assignment of spins to the twelve cube edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeAssignment(u16);

impl EdgeAssignment {
    /// Spin on edge number `k` of [`cube_edges`].
    pub fn spin(self, k: usize) -> i8 {
        if self.0 >> k & 1 == 1 {
            -1
        } else {
            1
        }
    }

    pub fn spin_of(self, edge: &SubfaceCode) -> i8 {
        let k = cube_edges().binary_search(edge).expect("edge of the 3-cube");
        self.spin(k)
    }

    pub fn face_state(self, face: &SubfaceCode) -> FaceState {
        let edges = cube_edges();
        let roles = edge_roles(face).expect("2-face");
        let s = roles.as_array().map(|e| self.spin(edges.binary_search(&e).expect("edge of the 3-cube")));
        FaceState::from_spins(s)
    }

    pub fn input(self) -> u32 {
        pack(&incoming_faces().map(|f| self.face_state(&f).0 as u32))
    }

    pub fn output(self) -> u32 {
        pack(&outgoing_faces().map(|f| self.face_state(&f).0 as u32))
    }
}

fn vertex_index(v: &[u8]) -> usize {
    v.iter().fold(0, |acc, &b| (acc << 1) | b as usize)
}

/// Edge fields `s_e = σ_a σ_b` induced by the 256 vertex fields. Each field
/// and its global flip give the same result, so 128 assignments remain.
pub fn assignments_from_vertex_fields() -> Vec<EdgeAssignment> {
    let edges = cube_edges();
    let mut out: Vec<EdgeAssignment> = (0u16..256)
        .map(|field| {
            let sigma = |v: Vec<u8>| if field >> vertex_index(&v) & 1 == 1 { -1i8 } else { 1 };
            let bits = edges.iter().enumerate().fold(0u16, |acc, (k, e)| {
                let s = sigma(e.vertex(&[0])) * sigma(e.vertex(&[1]));
                acc | (u16::from(s < 0) << k)
            });
            EdgeAssignment(bits)
        })
        .collect();
    out.sort();
    out.dedup();
    out
}

/// Edge assignments with an even number of `−1` spins around every face.
pub fn assignments_from_face_parity() -> Vec<EdgeAssignment> {
    let faces = cube_faces();
    (0u16..1 << 12).map(EdgeAssignment).filter(|a| faces.iter().all(|f| a.face_state(f).parity() == 1)).collect()
}

/// Local description of one cube factor.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CubeSpec {
    /// The cube inside the ambient hypercube, or `***` when used alone.
    pub cube: SubfaceCode,
    /// Edges, in local coordinates, whose spins enter the exponent `t·Σ s_e`.
    pub edge_choice: Vec<SubfaceCode>,
    /// Faces, in local coordinates, whose diagonal spins enter `γ·Σ i1·o2`.
    /// Repeated faces count with multiplicity.
    pub diagonal_faces: Vec<SubfaceCode>,
    /// Relabel every face state by the face swap.
    pub conjugate_a: bool,
}

impl CubeSpec {
    pub fn local(edge_choice: Vec<SubfaceCode>) -> Self {
        Self { cube: SubfaceCode::full(3), edge_choice, diagonal_faces: Vec::new(), conjugate_a: false }
    }

    /// Builds a spec from edges given in ambient coordinates.
    pub fn from_ambient(cube: SubfaceCode, edges: &[SubfaceCode]) -> Result<Self, VertexError> {
        if cube.dimension() != 3 {
            return Err(VertexError::NotACube(cube));
        }
        let edge_choice = edges.iter().map(|e| e.localize(&cube)).collect::<Result<_, _>>()?;
        Ok(Self { cube, edge_choice, diagonal_faces: Vec::new(), conjugate_a: false })
    }

    pub fn with_diagonals(mut self, faces: Vec<SubfaceCode>) -> Self {
        self.diagonal_faces = faces;
        self
    }

    pub fn with_a(mut self, on: bool) -> Self {
        self.conjugate_a = on;
        self
    }

    pub fn validate(&self) -> Result<(), VertexError> {
        if self.cube.dimension() != 3 {
            return Err(VertexError::NotACube(self.cube));
        }
        for e in &self.edge_choice {
            if e.len() != 3 || e.dimension() != 1 {
                return Err(VertexError::NotAnEdge(*e));
            }
        }
        for f in &self.diagonal_faces {
            if f.len() != 3 || f.dimension() != 2 {
                return Err(VertexError::NotAFace(*f));
            }
        }
        Ok(())
    }

    /// Faces read by the cube, in ambient coordinates.
    pub fn ambient_faces(&self, orientation: Orientation) -> Vec<SubfaceCode> {
        let local = if orientation == Orientation::Incoming { incoming_faces() } else { outgoing_faces() };
        local.iter().map(|f| f.lift(&self.cube).expect("local face fits the cube")).collect()
    }

    pub fn ambient_edges(&self) -> Vec<SubfaceCode> {
        self.edge_choice.iter().map(|e| e.lift(&self.cube).expect("local edge fits the cube")).collect()
    }

    pub fn ambient_diagonals(&self) -> Vec<SubfaceCode> {
        self.diagonal_faces.iter().map(|f| f.lift(&self.cube).expect("local face fits the cube")).collect()
    }
}

/// `W_0` with every entry equal to one.
pub fn build_w0<T: Scalar>() -> SparseOperator<T> {
    SparseOperator::from_terms(
        3,
        assignments_from_vertex_fields().into_iter().map(|a| (a.output(), a.input(), T::one())).collect(),
    )
}

/// `W(t)`: each supported entry weighted by `exp(t·Σ_chosen s_e)`.
pub fn build_w<T: Scalar>(spec: &CubeSpec, t: T) -> Result<SparseOperator<T>, VertexError> {
    build_wh(spec, t, T::zero())
}

/// `W_h(t, γ)`: additionally weighted by `exp(γ·Σ_diagonal i1·o2)`.
/// With `γ = 0` the extra factor is exactly one.
pub fn build_wh<T: Scalar>(spec: &CubeSpec, t: T, gamma: T) -> Result<SparseOperator<T>, VertexError> {
    spec.validate()?;
    let edges = cube_edges();
    let chosen: Vec<usize> = spec
        .edge_choice
        .iter()
        .map(|e| edges.binary_search(e).map_err(|_| VertexError::NotAnEdge(*e)))
        .collect::<Result<_, _>>()?;
    let terms = assignments_from_vertex_fields()
        .into_iter()
        .map(|a| {
            let field: i64 = chosen.iter().map(|&k| a.spin(k) as i64).sum();
            let diag: i64 = spec.diagonal_faces.iter().map(|f| a.face_state(f).diagonal_spin() as i64).sum();
            let w = (t * T::of_int(field)).exp() * (gamma * T::of_int(diag)).exp();
            (a.output(), a.input(), w)
        })
        .collect();
    let op = SparseOperator::from_terms(3, terms);
    Ok(if spec.conjugate_a { op.map_face_states(&a_permutation()) } else { op })
}

/// The face swap on one slot as a permutation matrix.
pub fn a_operator<T: Scalar>() -> SparseOperator<T> {
    let p = a_permutation();
    SparseOperator::from_terms(1, (0..16u32).map(|k| (p[k as usize], k, T::one())).collect())
}

/// Number of supported entries of `W_0` grouped by input triple.
pub fn w0_fanout() -> BTreeMap<u32, usize> {
    let mut m = BTreeMap::new();
    for a in assignments_from_vertex_fields() {
        *m.entry(a.input()).or_insert(0) += 1;
    }
    m
}
