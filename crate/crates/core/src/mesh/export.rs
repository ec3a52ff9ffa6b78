//! Plain-text mesh snapshots: `id x y` per vertex, then `id v0 v1 v2 subdomain` per triangle.

use std::io::Write;
use std::path::Path;

use super::Mesh;
use crate::error::Result;

pub fn write_mesh<W: Write>(m: &Mesh, mut w: W) -> Result<()> {
    writeln!(w, "# vertices {}", m.num_vertices())?;
    for (i, p) in m.vertices.iter().enumerate() {
        writeln!(w, "{i} {:.17e} {:.17e}", p.x, p.y)?;
    }
    writeln!(w, "# triangles {}", m.num_elements())?;
    for (i, (t, s)) in m.elements.iter().zip(&m.element_subdomain).enumerate() {
        writeln!(w, "{i} {} {} {} {s}", t[0], t[1], t[2])?;
    }
    Ok(())
}

pub fn export_mesh(m: &Mesh, path: &Path) -> Result<()> {
    let file = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_mesh(m, file)
}
