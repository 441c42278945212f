use super::{ChartKind, Charts, SimplicialMesh};
use crate::io::{fmt_f64, parse_f64, parse_usize};
use crate::{Error, Result};

/// Serializes a mesh. Chart labels are written, chart parameters are not.
pub fn write_mesh(mesh: &SimplicialMesh) -> String {
    let mut s = format!("meshdim {} embeddim {}\n", mesh.dim(), mesh.embed_dim());
    s.push_str(&format!("vertices {}\n", mesh.n_vertices()));
    for i in 0..mesh.n_vertices() {
        let row: Vec<String> = mesh.vertex(i).iter().map(|&x| fmt_f64(x)).collect();
        s.push_str(&row.join(" "));
        s.push('\n');
    }
    s.push_str(&format!("simplices {}\n", mesh.n_cells()));
    for c in 0..mesh.n_cells() {
        let row: Vec<String> = mesh.cell(c).iter().map(|v| v.to_string()).collect();
        s.push_str(&row.join(" "));
        s.push('\n');
    }
    if !mesh.dirichlet_faces().is_empty() {
        s.push_str(&format!("dirichlet {}\n", mesh.dirichlet_faces().len()));
        for f in mesh.dirichlet_faces() {
            let row: Vec<String> = f.iter().map(|v| v.to_string()).collect();
            s.push_str(&row.join(" "));
            s.push('\n');
        }
    }
    if let Some(ch) = mesh.charts() {
        s.push_str(&format!("charts {}\n", ch.labels.len()));
        for l in &ch.labels {
            s.push_str(&format!("{l}\n"));
        }
    }
    s
}

/// Parses the text format produced by [`write_mesh`]. Charts read back as
/// per-panel affine charts carrying the stored labels.
pub fn read_mesh(text: &str) -> Result<SimplicialMesh> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()).peekable();
    let mut next = |what: &str| -> Result<(usize, Vec<String>)> {
        let (ln, l) = lines.next().ok_or(Error::Parse { line: 0, msg: format!("unexpected end, expected {what}") })?;
        Ok((ln, l.split_whitespace().map(str::to_string).collect()))
    };
    let (ln, h) = next("header")?;
    if h.len() != 4 || h[0] != "meshdim" || h[2] != "embeddim" {
        return Err(Error::Parse { line: ln + 1, msg: "expected `meshdim <d> embeddim <d'>`".into() });
    }
    let d = parse_usize(&h[1], ln)?;
    let e = parse_usize(&h[3], ln)?;
    let (ln, h) = next("vertices")?;
    if h.len() != 2 || h[0] != "vertices" {
        return Err(Error::Parse { line: ln + 1, msg: "expected `vertices <n>`".into() });
    }
    let nv = parse_usize(&h[1], ln)?;
    let mut coords = Vec::with_capacity(nv * e);
    for _ in 0..nv {
        let (ln, f) = next("vertex")?;
        if f.len() != e {
            return Err(Error::Parse { line: ln + 1, msg: format!("expected {e} coordinates") });
        }
        for x in &f {
            coords.push(parse_f64(x, ln)?);
        }
    }
    let (ln, h) = next("simplices")?;
    if h.len() != 2 || h[0] != "simplices" {
        return Err(Error::Parse { line: ln + 1, msg: "expected `simplices <m>`".into() });
    }
    let nc = parse_usize(&h[1], ln)?;
    let mut cells = Vec::with_capacity(nc * (d + 1));
    for _ in 0..nc {
        let (ln, f) = next("simplex")?;
        if f.len() != d + 1 {
            return Err(Error::Parse { line: ln + 1, msg: format!("expected {} indices", d + 1) });
        }
        for x in &f {
            cells.push(parse_usize(x, ln)?);
        }
    }
    let mut dirichlet = Vec::new();
    let mut labels = None;
    while let Ok((ln, h)) = next("section") {
        match (h.first().map(String::as_str), h.len()) {
            (Some("dirichlet"), 2) => {
                for _ in 0..parse_usize(&h[1], ln)? {
                    let (ln, f) = next("face")?;
                    dirichlet.push(f.iter().map(|x| parse_usize(x, ln)).collect::<Result<Vec<_>>>()?);
                }
            }
            (Some("charts"), 2) => {
                let mut l = Vec::new();
                for _ in 0..parse_usize(&h[1], ln)? {
                    let (ln, f) = next("chart label")?;
                    l.push(f[0].parse::<u32>().map_err(|_| Error::Parse { line: ln + 1, msg: "bad label".into() })?);
                }
                labels = Some(l);
            }
            _ => return Err(Error::Parse { line: ln + 1, msg: format!("unknown section `{}`", h.join(" ")) }),
        }
    }
    let mesh = SimplicialMesh::new(d, e, coords, cells, dirichlet)?;
    match labels {
        Some(labels) => mesh.with_charts(Charts { kind: ChartKind::PanelAffine, labels, params: vec![] }),
        None => Ok(mesh),
    }
}

#[cfg(test)]
mod tests {
    use super::super::*;
    use super::*;

    #[test]
    fn round_trip() {
        let m = uniform_refine(&make_structured(Geometry::UnitSquare, 1, DirichletSpec::Boundary).unwrap());
        let back = read_mesh(&write_mesh(&m)).unwrap();
        assert_eq!(back.coords(), m.coords());
        assert_eq!(back.cells(), m.cells());
        assert_eq!(back.dirichlet_faces(), m.dirichlet_faces());
        assert_eq!(write_mesh(&back), write_mesh(&m));
    }

    #[test]
    fn reports_line_numbers() {
        let e = read_mesh("meshdim 1 embeddim 1\nvertices 2\n0\nx\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 4, .. }));
    }
}
