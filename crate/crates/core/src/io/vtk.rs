//! Legacy ASCII VTK writer for field snapshots.
//!
//! Always emits three coordinates per point (2D meshes carry z = 0) and the
//! full 3-vector point data, so 2D snapshots keep the out-of-plane
//! component. Cell types: 5 (triangle) and 10 (tetrahedron). Numbers are
//! printed with 17 significant digits, enough for bit-exact f64 round trips.

use crate::assembly::NodalField;
use crate::error::Error;
use crate::mesh::Mesh;
use std::io::Write;
use std::path::Path;

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

/// Write one field snapshot as a legacy ASCII VTK unstructured grid.
pub fn write_vtk(mesh: &Mesh, field: &NodalField, path: &Path) -> Result<(), Error> {
    if field.num_vertices() != mesh.num_vertices() {
        return Err(Error::InvalidArgument(
            "vtk writer: field does not live on the mesh".into(),
        ));
    }
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let file = std::fs::File::create(path)?;
    let mut out = std::io::BufWriter::new(file);

    writeln!(out, "# vtk DataFile Version 3.0")?;
    writeln!(out, "llbfem field snapshot")?;
    writeln!(out, "ASCII")?;
    writeln!(out, "DATASET UNSTRUCTURED_GRID")?;

    let nv = mesh.num_vertices();
    writeln!(out, "POINTS {nv} double")?;
    for v in mesh.vertices() {
        writeln!(out, "{} {} {}", fmt(v[0]), fmt(v[1]), fmt(v[2]))?;
    }

    let nc = mesh.num_cells();
    let nloc = mesh.dim() + 1;
    writeln!(out, "CELLS {nc} {}", nc * (nloc + 1))?;
    for c in 0..nc {
        let cell = mesh.cell(c);
        let indices: Vec<String> = cell.iter().map(|i| i.to_string()).collect();
        writeln!(out, "{nloc} {}", indices.join(" "))?;
    }
    let cell_type = if mesh.dim() == 2 { 5 } else { 10 };
    writeln!(out, "CELL_TYPES {nc}")?;
    for _ in 0..nc {
        writeln!(out, "{cell_type}")?;
    }

    writeln!(out, "POINT_DATA {nv}")?;
    writeln!(out, "VECTORS u double")?;
    for i in 0..nv {
        let v = field.vec3(i);
        writeln!(out, "{} {} {}", fmt(v[0]), fmt(v[1]), fmt(v[2]))?;
    }
    out.flush()?;
    Ok(())
}
