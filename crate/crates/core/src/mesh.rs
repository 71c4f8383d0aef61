//! Structured simplicial meshes of the four computational domains, with
//! uniform (red) refinement and the parent/child map needed to move nodal
//! data between nested levels.
//!
//! Conventions:
//! - 2D grid squares are split along the lower-left to upper-right diagonal,
//!   the same direction in every square.
//! - 3D grid cubes use the Kuhn split: 6 tetrahedra per cube, all sharing
//!   the main diagonal from the lowest to the highest corner. This is
//!   conforming across cube faces without any case analysis.
//! - The L-shape removes the half-open quadrant (0,1] x (0,1] and the
//!   Fichera domain removes (0,1]^3, so the re-entrant corner vertex at the
//!   origin belongs to the mesh exactly once.
//! - Boundary facets carry no markers: the schemes impose homogeneous
//!   Neumann conditions, which are natural in the weak form.

use std::collections::HashMap;

use crate::error::Error;

/// Which of the built-in computational domains a mesh discretises.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DomainTag {
    UnitSquare,
    UnitCube,
    LShape,
    Fichera,
    Interval,
}

impl DomainTag {
    /// Exact measure (area or volume) of the continuous domain.
    pub fn measure(&self) -> f64 {
        match self {
            DomainTag::UnitSquare | DomainTag::UnitCube | DomainTag::Interval => 1.0,
            DomainTag::LShape => 3.0,
            DomainTag::Fichera => 7.0,
        }
    }
}

/// Conforming simplicial triangulation with positively oriented cells.
///
/// Vertices always carry three coordinates; 2D meshes keep z = 0.
/// Cell connectivity is stored flat with stride `dim + 1`.
#[derive(Clone, Debug)]
pub struct Mesh {
    dim: usize,
    vertices: Vec<[f64; 3]>,
    cells: Vec<usize>,
    domain_tag: DomainTag,
    level: u32,
}

/// How each fine vertex of a refined mesh relates to the coarse mesh.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FineVertex {
    /// Same vertex, same index, on the coarse mesh.
    Coarse(usize),
    /// Midpoint of the coarse edge between the two given vertices.
    EdgeMidpoint(usize, usize),
}

/// Exact transfer of piecewise-linear nodal data from a mesh to its
/// uniform refinement (midpoint values are averages of the edge endpoints).
#[derive(Clone, Debug)]
pub struct Prolongation {
    pub coarse_level: u32,
    pub fine_level: u32,
    pub map: Vec<FineVertex>,
}

impl Prolongation {
    /// Interpolate coarse nodal data (comps values per vertex) to the fine mesh.
    pub fn apply(&self, coarse_values: &[f64], comps: usize) -> Vec<f64> {
        let mut fine = Vec::with_capacity(self.map.len() * comps);
        for origin in &self.map {
            match *origin {
                FineVertex::Coarse(i) => {
                    fine.extend_from_slice(&coarse_values[i * comps..(i + 1) * comps]);
                }
                FineVertex::EdgeMidpoint(a, b) => {
                    for c in 0..comps {
                        fine.push(0.5 * (coarse_values[a * comps + c] + coarse_values[b * comps + c]));
                    }
                }
            }
        }
        fine
    }
}

impl Mesh {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len() / (self.dim + 1)
    }

    pub fn vertex(&self, i: usize) -> [f64; 3] {
        self.vertices[i]
    }

    pub fn vertices(&self) -> &[[f64; 3]] {
        &self.vertices
    }

    /// Vertex indices of cell `c`, length `dim + 1`.
    pub fn cell(&self, c: usize) -> &[usize] {
        let n = self.dim + 1;
        &self.cells[c * n..(c + 1) * n]
    }

    pub fn domain_tag(&self) -> DomainTag {
        self.domain_tag
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    /// Signed measure of cell `c` (area in 2D, volume in 3D).
    pub fn cell_signed_measure(&self, c: usize) -> f64 {
        let v = self.cell(c);
        let p: Vec<[f64; 3]> = v.iter().map(|&i| self.vertices[i]).collect();
        match self.dim {
            2 => {
                let (e1, e2) = (sub(p[1], p[0]), sub(p[2], p[0]));
                0.5 * (e1[0] * e2[1] - e1[1] * e2[0])
            }
            3 => {
                let (e1, e2, e3) = (sub(p[1], p[0]), sub(p[2], p[0]), sub(p[3], p[0]));
                det3(e1, e2, e3) / 6.0
            }
            _ => unreachable!("mesh dim is 2 or 3"),
        }
    }

    pub fn cell_measure(&self, c: usize) -> f64 {
        self.cell_signed_measure(c).abs()
    }

    /// Longest edge of cell `c`.
    pub fn cell_diameter(&self, c: usize) -> f64 {
        let v = self.cell(c);
        let mut d2: f64 = 0.0;
        for i in 0..v.len() {
            for j in (i + 1)..v.len() {
                d2 = d2.max(dist2(self.vertices[v[i]], self.vertices[v[j]]));
            }
        }
        d2.sqrt()
    }

    /// Maximal cell diameter h.
    pub fn mesh_size(&self) -> f64 {
        (0..self.num_cells())
            .map(|c| self.cell_diameter(c))
            .fold(0.0, f64::max)
    }

    /// Diameter of the inscribed ball of cell `c`.
    pub fn cell_inball_diameter(&self, c: usize) -> f64 {
        let v = self.cell(c);
        let meas = self.cell_measure(c);
        match self.dim {
            2 => {
                // r = 2A / perimeter
                let p: Vec<[f64; 3]> = v.iter().map(|&i| self.vertices[i]).collect();
                let per = dist(p[0], p[1]) + dist(p[1], p[2]) + dist(p[2], p[0]);
                4.0 * meas / per
            }
            3 => {
                // r = 3V / (sum of face areas)
                let p: Vec<[f64; 3]> = v.iter().map(|&i| self.vertices[i]).collect();
                let faces = [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]];
                let area_sum: f64 = faces
                    .iter()
                    .map(|f| {
                        let e1 = sub(p[f[1]], p[f[0]]);
                        let e2 = sub(p[f[2]], p[f[0]]);
                        0.5 * norm(cross(e1, e2))
                    })
                    .sum();
                6.0 * meas / area_sum
            }
            _ => unreachable!(),
        }
    }

    /// Shape-regularity measure: max over cells of diameter / inscribed-ball
    /// diameter. Constant across refinement levels for the structured
    /// generators.
    pub fn quasi_uniformity_ratio(&self) -> f64 {
        (0..self.num_cells())
            .map(|c| self.cell_diameter(c) / self.cell_inball_diameter(c))
            .fold(0.0, f64::max)
    }

    /// Gradients of the P1 basis functions on cell `c` (constant per cell),
    /// one gradient per local vertex, together with the cell measure.
    pub fn grad_basis(&self, c: usize) -> ([[f64; 3]; 4], f64) {
        let v = self.cell(c);
        let mut grads = [[0.0; 3]; 4];
        match self.dim {
            2 => {
                let p: Vec<[f64; 3]> = v.iter().map(|&i| self.vertices[i]).collect();
                let a2 = 2.0 * self.cell_signed_measure(c);
                // grad of the barycentric function of local vertex i is the
                // inward normal of the opposite edge scaled by 1/(2A)
                for i in 0..3 {
                    let (j, k) = ((i + 1) % 3, (i + 2) % 3);
                    grads[i][0] = (p[j][1] - p[k][1]) / a2;
                    grads[i][1] = (p[k][0] - p[j][0]) / a2;
                }
            }
            3 => {
                let p: Vec<[f64; 3]> = v.iter().map(|&i| self.vertices[i]).collect();
                let e1 = sub(p[1], p[0]);
                let e2 = sub(p[2], p[0]);
                let e3 = sub(p[3], p[0]);
                let v6 = det3(e1, e2, e3); // 6 * signed volume
                // rows of the inverse Jacobian via cross products
                let g1 = scale(cross(e2, e3), 1.0 / v6);
                let g2 = scale(cross(e3, e1), 1.0 / v6);
                let g3 = scale(cross(e1, e2), 1.0 / v6);
                grads[1] = g1;
                grads[2] = g2;
                grads[3] = g3;
                for d in 0..3 {
                    grads[0][d] = -(g1[d] + g2[d] + g3[d]);
                }
            }
            _ => unreachable!(),
        }
        (grads, self.cell_measure(c))
    }

    /// Check positive orientation, conformity, and per-facet incidence.
    pub fn validate(&self) -> Result<(), Error> {
        for c in 0..self.num_cells() {
            if self.cell_signed_measure(c) <= 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "cell {c} has non-positive signed measure"
                )));
            }
        }
        for (_, count) in self.facet_incidence() {
            if count > 2 {
                return Err(Error::InvalidArgument(
                    "non-manifold facet shared by more than two cells".into(),
                ));
            }
        }
        Ok(())
    }

    /// Count, for every facet (edge in 2D, triangular face in 3D), how many
    /// cells contain it. Interior facets must appear exactly twice.
    pub fn facet_incidence(&self) -> HashMap<Vec<usize>, usize> {
        let mut counts: HashMap<Vec<usize>, usize> = HashMap::new();
        let nv = self.dim + 1;
        for c in 0..self.num_cells() {
            let cell = self.cell(c);
            for skip in 0..nv {
                let mut facet: Vec<usize> = (0..nv).filter(|&i| i != skip).map(|i| cell[i]).collect();
                facet.sort_unstable();
                *counts.entry(facet).or_insert(0) += 1;
            }
        }
        counts
    }

    /// Sum of all cell measures.
    pub fn total_measure(&self) -> f64 {
        (0..self.num_cells()).map(|c| self.cell_measure(c)).sum()
    }
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn det3(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> f64 {
    a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0])
        + a[2] * (b[0] * c[1] - b[1] * c[0])
}

fn scale(a: [f64; 3], s: f64) -> [f64; 3] {
    [a[0] * s, a[1] * s, a[2] * s]
}

fn norm(a: [f64; 3]) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

fn dist2(a: [f64; 3], b: [f64; 3]) -> f64 {
    let d = sub(a, b);
    d[0] * d[0] + d[1] * d[1] + d[2] * d[2]
}

fn dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    dist2(a, b).sqrt()
}

fn check_subdivisions(n: usize) -> Result<(), Error> {
    if n == 0 {
        Err(Error::InvalidArgument(
            "mesh subdivision count must be at least 1".into(),
        ))
    } else {
        Ok(())
    }
}

/// Triangulate [0,1]^2 with n subdivisions per axis: (n+1)^2 vertices and
/// 2n^2 triangles, every square split along its lower-left to upper-right
/// diagonal. h = sqrt(2)/n.
pub fn unit_square_mesh(n: usize) -> Result<Mesh, Error> {
    check_subdivisions(n)?;
    grid_mesh_2d(n, 0, n as isize, |_, _| true, DomainTag::UnitSquare)
}

/// Triangulate the L-shape [-1,1]^2 \ (0,1]^2 with n subdivisions per unit
/// length: (2n+1)^2 - n^2 vertices and 6n^2 triangles. The re-entrant corner
/// at the origin has opening angle 3*pi/2.
pub fn l_shape_mesh(n: usize) -> Result<Mesh, Error> {
    check_subdivisions(n)?;
    let n = n as isize;
    grid_mesh_2d(
        n as usize,
        -n,
        n,
        |i, j| !(i >= 0 && j >= 0), // square with lower-left corner at (i,j)/n removed
        DomainTag::LShape,
    )
}

// Shared 2D structured generator: grid indices range over [lo, hi] per axis,
// scaled by 1/n; `keep_square` decides by lower-left grid index.
fn grid_mesh_2d(
    n: usize,
    lo: isize,
    hi: isize,
    keep_square: impl Fn(isize, isize) -> bool,
    tag: DomainTag,
) -> Result<Mesh, Error> {
    let h = 1.0 / n as f64;
    let mut index: HashMap<(isize, isize), usize> = HashMap::new();
    let mut vertices = Vec::new();
    let keep_vertex = |i: isize, j: isize| -> bool {
        match tag {
            DomainTag::LShape => !(i > 0 && j > 0),
            _ => true,
        }
    };
    for j in lo..=hi {
        for i in lo..=hi {
            if keep_vertex(i, j) {
                index.insert((i, j), vertices.len());
                vertices.push([i as f64 * h, j as f64 * h, 0.0]);
            }
        }
    }
    let mut cells = Vec::new();
    for j in lo..hi {
        for i in lo..hi {
            if !keep_square(i, j) {
                continue;
            }
            let v00 = index[&(i, j)];
            let v10 = index[&(i + 1, j)];
            let v01 = index[&(i, j + 1)];
            let v11 = index[&(i + 1, j + 1)];
            cells.extend_from_slice(&[v00, v10, v11]);
            cells.extend_from_slice(&[v00, v11, v01]);
        }
    }
    Ok(Mesh {
        dim: 2,
        vertices,
        cells,
        domain_tag: tag,
        level: 0,
    })
}

/// Triangulate [0,1]^3 with n subdivisions per axis: (n+1)^3 vertices and
/// 6n^3 tetrahedra via the Kuhn split of each grid cube. All tetrahedra have
/// volume 1/(6n^3) and h = sqrt(3)/n.
pub fn unit_cube_mesh(n: usize) -> Result<Mesh, Error> {
    check_subdivisions(n)?;
    grid_mesh_3d(n, 0, n as isize, |_, _, _| true, DomainTag::UnitCube)
}

/// Triangulate [-1,1]^3 \ (0,1]^3 (Fichera corner at the origin) with n
/// subdivisions per unit length: 42n^3 tetrahedra, total volume 7.
pub fn fichera_mesh(n: usize) -> Result<Mesh, Error> {
    check_subdivisions(n)?;
    let n = n as isize;
    grid_mesh_3d(
        n as usize,
        -n,
        n,
        |i, j, k| !(i >= 0 && j >= 0 && k >= 0),
        DomainTag::Fichera,
    )
}

fn grid_mesh_3d(
    n: usize,
    lo: isize,
    hi: isize,
    keep_cube: impl Fn(isize, isize, isize) -> bool,
    tag: DomainTag,
) -> Result<Mesh, Error> {
    let h = 1.0 / n as f64;
    let mut index: HashMap<(isize, isize, isize), usize> = HashMap::new();
    let mut vertices = Vec::new();
    let keep_vertex = |i: isize, j: isize, k: isize| -> bool {
        match tag {
            DomainTag::Fichera => !(i > 0 && j > 0 && k > 0),
            _ => true,
        }
    };
    for k in lo..=hi {
        for j in lo..=hi {
            for i in lo..=hi {
                if keep_vertex(i, j, k) {
                    index.insert((i, j, k), vertices.len());
                    vertices.push([i as f64 * h, j as f64 * h, k as f64 * h]);
                }
            }
        }
    }
    // Kuhn split: walk from the low corner to the high corner of the cube
    // along each of the 6 axis orders; odd permutations get two vertices
    // swapped to restore positive orientation.
    const PERMS: [([usize; 3], bool); 6] = [
        ([0, 1, 2], true),
        ([0, 2, 1], false),
        ([1, 0, 2], false),
        ([1, 2, 0], true),
        ([2, 0, 1], true),
        ([2, 1, 0], false),
    ];
    let mut cells = Vec::new();
    for k in lo..hi {
        for j in lo..hi {
            for i in lo..hi {
                if !keep_cube(i, j, k) {
                    continue;
                }
                for (perm, even) in PERMS {
                    let mut at = [i, j, k];
                    let mut tet = [index[&(i, j, k)], 0, 0, 0];
                    for (step, &axis) in perm.iter().enumerate() {
                        at[axis] += 1;
                        tet[step + 1] = index[&(at[0], at[1], at[2])];
                    }
                    if !even {
                        // swap local 0 and 2: restores positive orientation
                        // while keeping the (0,2)/(1,3) midpoint pairing that
                        // the red refinement below relies on
                        tet.swap(0, 2);
                    }
                    cells.extend_from_slice(&tet);
                }
            }
        }
    }
    Ok(Mesh {
        dim: 3,
        vertices,
        cells,
        domain_tag: tag,
        level: 0,
    })
}

/// Uniform red refinement. Every triangle splits into 4 children via edge
/// midpoints; every tetrahedron splits into 8 (4 corner children plus the
/// interior octahedron cut along the diagonal joining the midpoints of
/// local edges 0-2 and 1-3). The returned map is exact for P1 data.
pub fn refine_uniform(mesh: &Mesh) -> (Mesh, Prolongation) {
    let nv_coarse = mesh.num_vertices();
    let mut vertices = mesh.vertices.clone();
    let mut map: Vec<FineVertex> = (0..nv_coarse).map(FineVertex::Coarse).collect();
    let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
    let mut mid = |a: usize, b: usize, vertices: &mut Vec<[f64; 3]>, map: &mut Vec<FineVertex>| {
        let key = (a.min(b), a.max(b));
        *midpoint.entry(key).or_insert_with(|| {
            let pa = vertices[a];
            let pb = vertices[b];
            vertices.push([
                0.5 * (pa[0] + pb[0]),
                0.5 * (pa[1] + pb[1]),
                0.5 * (pa[2] + pb[2]),
            ]);
            map.push(FineVertex::EdgeMidpoint(key.0, key.1));
            vertices.len() - 1
        })
    };

    let mut cells = Vec::with_capacity(mesh.cells.len() * if mesh.dim == 2 { 4 } else { 8 });
    for c in 0..mesh.num_cells() {
        let cell = mesh.cell(c).to_vec();
        if mesh.dim == 2 {
            let [v0, v1, v2] = [cell[0], cell[1], cell[2]];
            let m01 = mid(v0, v1, &mut vertices, &mut map);
            let m12 = mid(v1, v2, &mut vertices, &mut map);
            let m02 = mid(v0, v2, &mut vertices, &mut map);
            cells.extend_from_slice(&[v0, m01, m02]);
            cells.extend_from_slice(&[m01, v1, m12]);
            cells.extend_from_slice(&[m02, m12, v2]);
            cells.extend_from_slice(&[m01, m12, m02]);
        } else {
            let [v0, v1, v2, v3] = [cell[0], cell[1], cell[2], cell[3]];
            let m01 = mid(v0, v1, &mut vertices, &mut map);
            let m02 = mid(v0, v2, &mut vertices, &mut map);
            let m03 = mid(v0, v3, &mut vertices, &mut map);
            let m12 = mid(v1, v2, &mut vertices, &mut map);
            let m13 = mid(v1, v3, &mut vertices, &mut map);
            let m23 = mid(v2, v3, &mut vertices, &mut map);
            // four corner children plus the interior octahedron cut along
            // the diagonal joining the midpoints of local edges 0-2 and
            // 1-3; the child vertex orders below keep that labeling stable
            // under repeated refinement, so Kuhn-type grids reproduce
            // themselves and the shape classes never degrade
            for child in [
                [v0, m01, m02, m03],
                [m01, v1, m12, m13],
                [m02, m12, v2, m23],
                [m03, m13, m23, v3],
                [m01, m02, m03, m13],
                [m01, m02, m12, m13],
                [m02, m03, m13, m23],
                [m02, m12, m13, m23],
            ] {
                cells.extend_from_slice(&child);
            }
        }
    }

    let mut fine = Mesh {
        dim: mesh.dim,
        vertices,
        cells,
        domain_tag: mesh.domain_tag,
        level: mesh.level + 1,
    };
    // restore positive orientation where a child came out flipped; the
    // 0-2 swap keeps the midpoint pairing stable under further refinement
    for c in 0..fine.num_cells() {
        if fine.cell_signed_measure(c) < 0.0 {
            let n = fine.dim + 1;
            if fine.dim == 3 {
                fine.cells.swap(c * n, c * n + 2);
            } else {
                fine.cells.swap(c * n + 1, c * n + 2);
            }
        }
    }
    let prolongation = Prolongation {
        coarse_level: mesh.level,
        fine_level: fine.level,
        map,
    };
    (fine, prolongation)
}

/// Inverse-estimate factor: 1 in 1D, |log h|^(1/2) in 2D, h^(-1/2) in 3D.
pub fn inverse_estimate_factor(dim: usize, h: f64) -> f64 {
    match dim {
        1 => 1.0,
        2 => h.ln().abs().sqrt(),
        3 => 1.0 / h.sqrt(),
        _ => f64::NAN,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_square_counts() {
        let m = unit_square_mesh(1).unwrap();
        assert_eq!(m.num_vertices(), 4);
        assert_eq!(m.num_cells(), 2);
        let m = unit_square_mesh(2).unwrap();
        assert_eq!(m.num_vertices(), 9);
        assert_eq!(m.num_cells(), 8);
    }

    #[test]
    fn unit_square_equal_areas() {
        // shoelace areas of all 32 cells at n = 4 equal 1/32
        let m = unit_square_mesh(4).unwrap();
        assert_eq!(m.num_cells(), 32);
        for c in 0..m.num_cells() {
            assert!((m.cell_signed_measure(c) - 1.0 / 32.0).abs() < 1e-15);
        }
    }

    #[test]
    fn unit_cube_counts_and_volume() {
        let m = unit_cube_mesh(1).unwrap();
        assert_eq!(m.num_vertices(), 8);
        assert_eq!(m.num_cells(), 6);
        let m = unit_cube_mesh(2).unwrap();
        assert_eq!(m.num_vertices(), 27);
        assert_eq!(m.num_cells(), 48);
        assert!((m.total_measure() - 1.0).abs() < 1e-14);
        for c in 0..m.num_cells() {
            assert!((m.cell_signed_measure(c) - 1.0 / 48.0).abs() < 1e-15);
        }
    }

    #[test]
    fn l_shape_counts_and_area() {
        let m = l_shape_mesh(1).unwrap();
        assert_eq!(m.num_vertices(), 8);
        assert_eq!(m.num_cells(), 6);
        let m = l_shape_mesh(2).unwrap();
        assert_eq!(m.num_vertices(), 21);
        assert_eq!(m.num_cells(), 24);
        assert!((m.total_measure() - 3.0).abs() < 1e-14);
    }

    #[test]
    fn fichera_counts_and_volume() {
        let m = fichera_mesh(1).unwrap();
        assert_eq!(m.num_vertices(), 26);
        assert_eq!(m.num_cells(), 42);
        assert!((m.total_measure() - 7.0).abs() < 1e-13);
    }

    #[test]
    fn zero_subdivisions_rejected() {
        assert!(unit_square_mesh(0).is_err());
        assert!(unit_cube_mesh(0).is_err());
        assert!(l_shape_mesh(0).is_err());
        assert!(fichera_mesh(0).is_err());
    }

    #[test]
    fn mesh_sizes() {
        assert!((unit_square_mesh(4).unwrap().mesh_size() - 2f64.sqrt() / 4.0).abs() < 1e-14);
        assert!((unit_cube_mesh(2).unwrap().mesh_size() - 3f64.sqrt() / 2.0).abs() < 1e-14);
        assert!((l_shape_mesh(2).unwrap().mesh_size() - 2f64.sqrt() / 2.0).abs() < 1e-14);
    }

    #[test]
    fn refinement_matches_direct_generation() {
        let (fine, _) = refine_uniform(&unit_square_mesh(1).unwrap());
        assert_eq!(fine.num_vertices(), 9);
        assert_eq!(fine.num_cells(), 8);
        assert_eq!(fine.level(), 1);

        let (fine, _) = refine_uniform(&unit_cube_mesh(1).unwrap());
        assert_eq!(fine.num_cells(), 48);
        assert!((fine.total_measure() - 1.0).abs() < 1e-14);
        fine.validate().unwrap();
    }

    #[test]
    fn prolongation_exact_for_linear_fields() {
        let coarse = unit_square_mesh(2).unwrap();
        let (fine, p) = refine_uniform(&coarse);
        let f = |x: f64, y: f64| [x, y, x + y];
        let coarse_vals: Vec<f64> = coarse
            .vertices()
            .iter()
            .flat_map(|v| f(v[0], v[1]))
            .collect();
        let fine_vals = p.apply(&coarse_vals, 3);
        for (i, v) in fine.vertices().iter().enumerate() {
            let expect = f(v[0], v[1]);
            for c in 0..3 {
                assert_eq!(fine_vals[3 * i + c], expect[c]);
            }
        }
    }

    #[test]
    fn measures_match_domains_up_to_n8() {
        for n in 1..=8 {
            assert!((unit_square_mesh(n).unwrap().total_measure() - 1.0).abs() < 1e-12);
            assert!((l_shape_mesh(n).unwrap().total_measure() - 3.0).abs() < 1e-12);
        }
        for n in 1..=4 {
            assert!((unit_cube_mesh(n).unwrap().total_measure() - 1.0).abs() < 1e-12);
            assert!((fichera_mesh(n).unwrap().total_measure() - 7.0).abs() < 1e-12);
        }
    }

    #[test]
    fn conformity_all_generators() {
        let meshes = vec![
            unit_square_mesh(3).unwrap(),
            unit_cube_mesh(2).unwrap(),
            l_shape_mesh(2).unwrap(),
            fichera_mesh(1).unwrap(),
        ];
        for m in &meshes {
            m.validate().unwrap();
            for (_, count) in m.facet_incidence() {
                assert!(count == 1 || count == 2);
            }
        }
    }

    #[test]
    fn quasi_uniformity_stable_under_refinement() {
        for base in [unit_square_mesh(2).unwrap(), unit_cube_mesh(1).unwrap()] {
            let q0 = base.quasi_uniformity_ratio();
            let (l1, _) = refine_uniform(&base);
            let (l2, _) = refine_uniform(&l1);
            assert!((l1.quasi_uniformity_ratio() - q0).abs() < 1e-10 * q0);
            assert!((l2.quasi_uniformity_ratio() - q0).abs() < 1e-10 * q0);
        }
    }

    #[test]
    fn vertices_inside_declared_domain() {
        // no vertex may lie strictly inside the removed quadrant/octant
        let m = l_shape_mesh(3).unwrap();
        for v in m.vertices() {
            assert!(!(v[0] > 1e-12 && v[1] > 1e-12));
            assert!(v[0] >= -1.0 - 1e-12 && v[0] <= 1.0 + 1e-12);
            assert!(v[1] >= -1.0 - 1e-12 && v[1] <= 1.0 + 1e-12);
        }
        let m = fichera_mesh(2).unwrap();
        for v in m.vertices() {
            assert!(!(v[0] > 1e-12 && v[1] > 1e-12 && v[2] > 1e-12));
        }
    }
}
