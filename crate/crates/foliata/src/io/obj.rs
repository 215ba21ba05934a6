//! Wavefront OBJ export. `v` lines carry the ambient-model coordinates (or
//! the chart coordinates on request); the chart coordinates of every vertex
//! are kept in `#vc` comment lines, the constant-`y` curves as `l` elements.

use std::io::{self, Write};

use foliata_core::{ChartKind, SurfaceMesh};

use super::fmt17;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VertexCoords {
    Ambient,
    Chart,
}

pub fn write_obj<W: Write>(mut w: W, mesh: &SurfaceMesh, coords: VertexCoords, header: &[String]) -> io::Result<()> {
    writeln!(w, "# foliata surface mesh")?;
    for line in header {
        writeln!(w, "# {line}")?;
    }
    if let Some(p) = mesh.params {
        writeln!(w, "# params c0 {} c {} d {} a {}", fmt17(p.c0), fmt17(p.c), fmt17(p.d), p.a.map_or("none".into(), fmt17))?;
    }
    let s = &mesh.spec;
    writeln!(w, "# grid {} {} {} {} {} {}", fmt17(s.x0), fmt17(s.x1), fmt17(s.y0), fmt17(s.y1), s.nx, s.ny)?;
    let model = match (coords, mesh.chart.kind) {
        (VertexCoords::Chart, _) | (_, ChartKind::EuclideanPlane) => "u1 u2 y",
        (_, ChartKind::PoincareDisk) => "hyperboloid X0 X1 X2, height y",
        (_, ChartKind::Stereographic) => "unit sphere p1 p2 p3, height y",
    };
    writeln!(w, "# chart {:?}, c0 {}", mesh.chart.kind, fmt17(mesh.chart.c0))?;
    writeln!(w, "# v: {model}")?;
    writeln!(w, "# vc: grid node, u1 u2 y")?;
    for (k, c) in mesh.chart_coords.iter().enumerate() {
        let v: &[f64] = match coords {
            VertexCoords::Ambient => &mesh.ambient[k],
            VertexCoords::Chart => c,
        };
        let parts: Vec<String> = v.iter().map(|&x| fmt17(x)).collect();
        writeln!(w, "v {}", parts.join(" "))?;
        writeln!(w, "#vc {} {} {} {}", mesh.nodes[k], fmt17(c[0]), fmt17(c[1]), fmt17(c[2]))?;
    }
    for f in &mesh.faces {
        writeln!(w, "f {} {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1, f[3] + 1)?;
    }
    for line in &mesh.foliation {
        let parts: Vec<String> = line.iter().map(|v| (v + 1).to_string()).collect();
        writeln!(w, "l {}", parts.join(" "))?;
    }
    w.flush()
}
