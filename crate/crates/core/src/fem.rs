//! Structured P1 finite elements on a rectangle with homogeneous Dirichlet
//! boundary conditions eliminated from the system.
//!
//! Each square cell is split along its lower-left to upper-right diagonal.
//! Interior nodes are numbered row by row, `dof = (j-1)(nx-1) + (i-1)`.

use crate::error::{check_len, Error, Result};
use crate::linalg::{dot, reverse_cuthill_mckee, CholeskyFactor, SparseMatrix};

#[derive(Debug, Clone)]
pub struct Mesh {
    lx: f64,
    ly: f64,
    h: f64,
    nx: usize,
    ny: usize,
    node_coords: Vec<(f64, f64)>,
    triangles: Vec<[usize; 3]>,
    interior_map: Vec<Option<usize>>,
    interior_nodes: Vec<usize>,
}

fn cells_along(len: f64, h: f64) -> Result<usize> {
    let cells = (len / h).round();
    if cells < 1.0 || (cells * h - len).abs() > 1e-12 * len.max(1.0) {
        return Err(Error::InvalidMesh(format!(
            "mesh size {h} does not divide side length {len}"
        )));
    }
    Ok(cells as usize)
}

impl Mesh {
    pub fn new(lx: f64, ly: f64, h: f64) -> Result<Self> {
        if !(lx > 0.0 && ly > 0.0 && h > 0.0) {
            return Err(Error::InvalidMesh(format!(
                "side lengths and mesh size must be positive (lx={lx}, ly={ly}, h={h})"
            )));
        }
        let nx = cells_along(lx, h)?;
        let ny = cells_along(ly, h)?;
        if nx < 2 || ny < 2 {
            return Err(Error::InvalidMesh(format!(
                "{nx}x{ny} cells leave no interior nodes"
            )));
        }

        let node = |i: usize, j: usize| j * (nx + 1) + i;
        let mut node_coords = Vec::with_capacity((nx + 1) * (ny + 1));
        for j in 0..=ny {
            for i in 0..=nx {
                node_coords.push((i as f64 * h, j as f64 * h));
            }
        }

        let mut triangles = Vec::with_capacity(2 * nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                let (p0, p1, p2, p3) = (node(i, j), node(i + 1, j), node(i + 1, j + 1), node(i, j + 1));
                triangles.push([p0, p1, p2]);
                triangles.push([p0, p2, p3]);
            }
        }

        let mut interior_map = vec![None; node_coords.len()];
        let mut interior_nodes = Vec::with_capacity((nx - 1) * (ny - 1));
        for j in 1..ny {
            for i in 1..nx {
                interior_map[node(i, j)] = Some(interior_nodes.len());
                interior_nodes.push(node(i, j));
            }
        }

        Ok(Self {
            lx,
            ly,
            h,
            nx,
            ny,
            node_coords,
            triangles,
            interior_map,
            interior_nodes,
        })
    }

    pub fn lx(&self) -> f64 {
        self.lx
    }

    pub fn ly(&self) -> f64 {
        self.ly
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn node_count(&self) -> usize {
        self.node_coords.len()
    }

    pub fn node_coords(&self) -> &[(f64, f64)] {
        &self.node_coords
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    /// Full node index → interior dof index, `None` on the boundary.
    pub fn interior_map(&self) -> &[Option<usize>] {
        &self.interior_map
    }

    pub fn n_dofs(&self) -> usize {
        self.interior_nodes.len()
    }

    pub fn dof_node(&self, dof: usize) -> usize {
        self.interior_nodes[dof]
    }

    pub fn dof_coords(&self, dof: usize) -> (f64, f64) {
        self.node_coords[self.interior_nodes[dof]]
    }

    pub fn dof_coords_iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.interior_nodes.iter().map(|&n| self.node_coords[n])
    }

    pub fn signed_area(&self, tri: usize) -> f64 {
        let [a, b, c] = self.triangles[tri];
        let (xa, ya) = self.node_coords[a];
        let (xb, yb) = self.node_coords[b];
        let (xc, yc) = self.node_coords[c];
        0.5 * ((xb - xa) * (yc - ya) - (xc - xa) * (yb - ya))
    }

    /// Extends interior values to every node, zero on the boundary.
    pub fn full_field(&self, interior: &[f64]) -> Result<Vec<f64>> {
        check_len(self.n_dofs(), interior.len())?;
        Ok(self
            .interior_map
            .iter()
            .map(|d| d.map_or(0.0, |d| interior[d]))
            .collect())
    }
}

pub fn build_mesh(lx: f64, ly: f64, h: f64) -> Result<Mesh> {
    Mesh::new(lx, ly, h)
}

/// Nodal values over the interior dofs; boundary values are implicitly zero.
#[derive(Debug, Clone, PartialEq)]
pub struct NodalFunction {
    values: Vec<f64>,
}

impl NodalFunction {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn zeros(n: usize) -> Self {
        Self::new(vec![0.0; n])
    }

    /// Interpolates `f` at the interior nodes of `mesh`.
    pub fn interpolate(mesh: &Mesh, f: impl Fn(f64, f64) -> f64) -> Self {
        Self::new(mesh.dof_coords_iter().map(|(x, y)| f(x, y)).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl From<Vec<f64>> for NodalFunction {
    fn from(values: Vec<f64>) -> Self {
        Self::new(values)
    }
}

/// Element mass matrix of a linear triangle: `area/12 · (1 + δ_ab)`.
pub fn element_mass(area: f64) -> [[f64; 3]; 3] {
    let mut m = [[area / 12.0; 3]; 3];
    for (a, row) in m.iter_mut().enumerate() {
        row[a] = area / 6.0;
    }
    m
}

/// Element stiffness `∫ ∇φ_a · ∇φ_b` of a linear triangle.
pub fn element_stiffness(p: [(f64, f64); 3]) -> [[f64; 3]; 3] {
    let area2 = (p[1].0 - p[0].0) * (p[2].1 - p[0].1) - (p[2].0 - p[0].0) * (p[1].1 - p[0].1);
    let grad = |a: usize| {
        let b = (a + 1) % 3;
        let c = (a + 2) % 3;
        ((p[b].1 - p[c].1) / area2, (p[c].0 - p[b].0) / area2)
    };
    let g = [grad(0), grad(1), grad(2)];
    let area = 0.5 * area2.abs();
    let mut k = [[0.0; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            k[a][b] = area * (g[a].0 * g[b].0 + g[a].1 * g[b].1);
        }
    }
    k
}

/// Assembled mass and stiffness over the interior dofs, with the stiffness
/// factored once for reuse.
#[derive(Debug)]
pub struct FemSystem {
    mesh: Mesh,
    mass: SparseMatrix,
    stiffness: SparseMatrix,
    ordering: Vec<usize>,
    stiffness_factor: CholeskyFactor,
}

impl FemSystem {
    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn mass(&self) -> &SparseMatrix {
        &self.mass
    }

    pub fn stiffness(&self) -> &SparseMatrix {
        &self.stiffness
    }

    pub fn stiffness_factor(&self) -> &CholeskyFactor {
        &self.stiffness_factor
    }

    /// Fill-reducing ordering shared by every matrix on this pattern.
    pub fn ordering(&self) -> &[usize] {
        &self.ordering
    }

    pub fn n_dofs(&self) -> usize {
        self.mass.n_rows()
    }

    pub fn m_inner(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        check_len(self.n_dofs(), x.len())?;
        let my = self.mass.spmv(y)?;
        Ok(dot(x, &my))
    }

    pub fn m_norm(&self, x: &[f64]) -> Result<f64> {
        Ok(self.m_inner(x, x)?.max(0.0).sqrt())
    }

    pub fn load_vector(&self, f: &NodalFunction) -> Result<Vec<f64>> {
        check_len(self.n_dofs(), f.len())?;
        self.mass.spmv(f.values())
    }
}

pub fn assemble(mesh: &Mesh) -> Result<FemSystem> {
    let n = mesh.n_dofs();
    let mut mass_t = Vec::with_capacity(mesh.triangles().len() * 9);
    let mut stiff_t = Vec::with_capacity(mesh.triangles().len() * 9);

    for (t, tri) in mesh.triangles().iter().enumerate() {
        let area = mesh.signed_area(t);
        if !(area > 0.0) {
            return Err(Error::InvalidMesh(format!("triangle {t} has area {area}")));
        }
        let coords = tri.map(|v| mesh.node_coords()[v]);
        let me = element_mass(area);
        let ke = element_stiffness(coords);
        for a in 0..3 {
            let Some(ia) = mesh.interior_map()[tri[a]] else {
                continue;
            };
            for b in 0..3 {
                let Some(ib) = mesh.interior_map()[tri[b]] else {
                    continue;
                };
                mass_t.push((ia, ib, me[a][b]));
                stiff_t.push((ia, ib, ke[a][b]));
            }
        }
    }

    let mass = SparseMatrix::from_triplets(n, n, &mass_t)?;
    let stiffness = SparseMatrix::from_triplets(n, n, &stiff_t)?;
    let ordering = reverse_cuthill_mckee(&mass);
    let stiffness_factor = CholeskyFactor::factor_with_ordering(&stiffness, ordering.clone())?;

    Ok(FemSystem {
        mesh: mesh.clone(),
        mass,
        stiffness,
        ordering,
        stiffness_factor,
    })
}

pub fn load_vector(sys: &FemSystem, f: &NodalFunction) -> Result<Vec<f64>> {
    sys.load_vector(f)
}

pub fn m_inner(sys: &FemSystem, x: &[f64], y: &[f64]) -> Result<f64> {
    sys.m_inner(x, y)
}

pub fn m_norm(sys: &FemSystem, x: &[f64]) -> Result<f64> {
    sys.m_norm(x)
}
