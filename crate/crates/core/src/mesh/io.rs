//! ASCII mesh readers and writers: OFF (triangles), TetGen `.node`/`.ele`
//! (tetrahedra) and a minimal `HEX` format (hexahedra, VTK corner order).

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::{MeshKind, VolumetricMesh};
use crate::error::{Error, Result};
use crate::Point3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Off,
    NodeEle,
    HexAscii,
}

impl MeshFormat {
    /// Guess the format from a file extension.
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "off" => Some(MeshFormat::Off),
            "node" | "ele" => Some(MeshFormat::NodeEle),
            "hex" | "hexmesh" => Some(MeshFormat::HexAscii),
            _ => None,
        }
    }

    pub fn for_kind(kind: MeshKind) -> Self {
        match kind {
            MeshKind::Tri2D => MeshFormat::Off,
            MeshKind::Tet => MeshFormat::NodeEle,
            MeshKind::Hex => MeshFormat::HexAscii,
        }
    }
}

impl FromStr for MeshFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "off" => Ok(MeshFormat::Off),
            "nodeele" | "node" | "ele" | "tetgen" => Ok(MeshFormat::NodeEle),
            "hex" | "hexascii" | "hexmesh" => Ok(MeshFormat::HexAscii),
            other => Err(Error::InvalidParameter(format!(
                "unknown mesh format '{other}'"
            ))),
        }
    }
}

pub fn load_mesh(path: impl AsRef<Path>, format: MeshFormat) -> Result<VolumetricMesh> {
    let path = path.as_ref();
    match format {
        MeshFormat::Off => read_off(path),
        MeshFormat::NodeEle => {
            let (node, ele) = tetgen_paths(path);
            read_node_ele(&node, &ele)
        }
        MeshFormat::HexAscii => read_hex(path),
    }
}

/// Writes `mesh` in `format`. For `NodeEle` the path may name either file or
/// the common stem; both files are written.
pub fn save_mesh(mesh: &VolumetricMesh, path: impl AsRef<Path>, format: MeshFormat) -> Result<()> {
    let path = path.as_ref();
    let expected = match format {
        MeshFormat::Off => MeshKind::Tri2D,
        MeshFormat::NodeEle => MeshKind::Tet,
        MeshFormat::HexAscii => MeshKind::Hex,
    };
    if mesh.kind() != expected {
        return Err(Error::InvalidParameter(format!(
            "{:?} meshes cannot be written as {format:?}",
            mesh.kind()
        )));
    }
    match format {
        MeshFormat::Off => write_text(path, &off_text(mesh)),
        MeshFormat::NodeEle => {
            let (node, ele) = tetgen_paths(path);
            let (node_text, ele_text) = node_ele_text(mesh);
            write_text(&node, &node_text)?;
            write_text(&ele, &ele_text)
        }
        MeshFormat::HexAscii => write_text(path, &hex_text(mesh)),
    }
}

fn tetgen_paths(path: &Path) -> (PathBuf, PathBuf) {
    let stem = match path.extension().and_then(|e| e.to_str()) {
        Some("node") | Some("ele") => path.with_extension(""),
        _ => path.to_path_buf(),
    };
    let mut node = stem.clone().into_os_string();
    node.push(".node");
    let mut ele = stem.into_os_string();
    ele.push(".ele");
    (node.into(), ele.into())
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

type TokenLines<'a> = Box<dyn Iterator<Item = (usize, Vec<&'a str>)> + 'a>;

/// Non-empty, comment-stripped lines with their 1-based line numbers.
struct Lines<'a> {
    path: &'a Path,
    lines: std::iter::Peekable<TokenLines<'a>>,
    last_line: usize,
}

impl<'a> Lines<'a> {
    fn new(path: &'a Path, text: &'a str) -> Self {
        let last_line = text.lines().count();
        let it: Box<dyn Iterator<Item = (usize, Vec<&'a str>)> + 'a> =
            Box::new(text.lines().enumerate().filter_map(|(i, line)| {
                let content = line.split('#').next().unwrap_or("");
                let tokens: Vec<&str> = content.split_whitespace().collect();
                (!tokens.is_empty()).then_some((i + 1, tokens))
            }));
        Self {
            path,
            lines: it.peekable(),
            last_line,
        }
    }

    fn next_line(&mut self, what: &str) -> Result<(usize, Vec<&'a str>)> {
        self.lines.next().ok_or_else(|| {
            Error::parse(
                self.path,
                self.last_line + 1,
                format!("unexpected end of file, expected {what}"),
            )
        })
    }

    fn expect_end(&mut self) -> Result<()> {
        match self.lines.next() {
            None => Ok(()),
            Some((line, _)) => Err(Error::parse(self.path, line, "unexpected trailing data")),
        }
    }

    fn err(&self, line: usize, message: impl Into<String>) -> Error {
        Error::parse(self.path, line, message)
    }
}

fn num<T: FromStr>(lines: &Lines, line: usize, token: &str) -> Result<T> {
    token
        .parse()
        .map_err(|_| lines.err(line, format!("cannot parse '{token}' as a number")))
}

fn need(lines: &Lines, line: usize, tokens: &[&str], n: usize, what: &str) -> Result<()> {
    if tokens.len() < n {
        Err(lines.err(
            line,
            format!("expected {n} fields for {what}, found {}", tokens.len()),
        ))
    } else {
        Ok(())
    }
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn read_off(path: &Path) -> Result<VolumetricMesh> {
    let text = read_file(path)?;
    let mut lines = Lines::new(path, &text);

    let (ln, magic) = lines.next_line("OFF header")?;
    if magic[0] != "OFF" {
        return Err(lines.err(ln, format!("expected 'OFF', found '{}'", magic[0])));
    }
    // counts may share the magic line
    let counts = if magic.len() > 1 {
        (ln, magic[1..].to_vec())
    } else {
        lines.next_line("vertex and face counts")?
    };
    need(&lines, counts.0, &counts.1, 2, "OFF counts")?;
    let nv: usize = num(&lines, counts.0, counts.1[0])?;
    let nf: usize = num(&lines, counts.0, counts.1[1])?;

    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (ln, t) = lines.next_line("vertex")?;
        need(&lines, ln, &t, 3, "vertex")?;
        vertices.push(Point3::new(
            num(&lines, ln, t[0])?,
            num(&lines, ln, t[1])?,
            num(&lines, ln, t[2])?,
        ));
    }
    let mut connectivity = Vec::with_capacity(3 * nf);
    for _ in 0..nf {
        let (ln, t) = lines.next_line("face")?;
        let n: usize = num(&lines, ln, t[0])?;
        if n != 3 {
            return Err(lines.err(ln, format!("only triangles are supported, found a {n}-gon")));
        }
        need(&lines, ln, &t, 4, "triangle")?;
        for tok in &t[1..4] {
            connectivity.push(num(&lines, ln, tok)?);
        }
    }
    lines.expect_end()?;
    VolumetricMesh::new(MeshKind::Tri2D, vertices, connectivity)
}

fn read_node_ele(node_path: &Path, ele_path: &Path) -> Result<VolumetricMesh> {
    let node_text = read_file(node_path)?;
    let mut lines = Lines::new(node_path, &node_text);
    let (ln, header) = lines.next_line(".node header")?;
    need(&lines, ln, &header, 2, ".node header")?;
    let nv: usize = num(&lines, ln, header[0])?;
    let dim: usize = num(&lines, ln, header[1])?;
    if dim != 3 {
        return Err(lines.err(ln, format!("expected dimension 3, found {dim}")));
    }

    let mut vertices = Vec::with_capacity(nv);
    let mut base = None;
    for k in 0..nv {
        let (ln, t) = lines.next_line("node")?;
        need(&lines, ln, &t, 4, "node")?;
        let idx: usize = num(&lines, ln, t[0])?;
        let b = *base.get_or_insert(idx);
        if b > 1 {
            return Err(lines.err(ln, format!("first node index must be 0 or 1, found {idx}")));
        }
        if idx != k + b {
            return Err(lines.err(ln, format!("expected node index {}, found {idx}", k + b)));
        }
        vertices.push(Point3::new(
            num(&lines, ln, t[1])?,
            num(&lines, ln, t[2])?,
            num(&lines, ln, t[3])?,
        ));
    }
    lines.expect_end()?;
    let base = base.unwrap_or(0);

    let ele_text = read_file(ele_path)?;
    let mut lines = Lines::new(ele_path, &ele_text);
    let (ln, header) = lines.next_line(".ele header")?;
    need(&lines, ln, &header, 2, ".ele header")?;
    let nc: usize = num(&lines, ln, header[0])?;
    let per: usize = num(&lines, ln, header[1])?;
    if per != 4 {
        return Err(lines.err(
            ln,
            format!("only 4-node tetrahedra are supported, found {per}"),
        ));
    }
    let mut connectivity = Vec::with_capacity(4 * nc);
    for _ in 0..nc {
        let (ln, t) = lines.next_line("element")?;
        need(&lines, ln, &t, 5, "element")?;
        for tok in &t[1..5] {
            let i: usize = num(&lines, ln, tok)?;
            if i < base {
                return Err(lines.err(
                    ln,
                    format!("node index {i} below the numbering base {base}"),
                ));
            }
            connectivity.push(i - base);
        }
    }
    lines.expect_end()?;
    VolumetricMesh::new(MeshKind::Tet, vertices, connectivity)
}

fn read_hex(path: &Path) -> Result<VolumetricMesh> {
    let text = read_file(path)?;
    let mut lines = Lines::new(path, &text);
    let (ln, header) = lines.next_line("HEX header")?;
    if header[0] != "HEX" {
        return Err(lines.err(ln, format!("expected 'HEX', found '{}'", header[0])));
    }
    need(&lines, ln, &header, 3, "HEX header")?;
    let nv: usize = num(&lines, ln, header[1])?;
    let nc: usize = num(&lines, ln, header[2])?;

    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (ln, t) = lines.next_line("vertex")?;
        need(&lines, ln, &t, 3, "vertex")?;
        vertices.push(Point3::new(
            num(&lines, ln, t[0])?,
            num(&lines, ln, t[1])?,
            num(&lines, ln, t[2])?,
        ));
    }
    let mut connectivity = Vec::with_capacity(8 * nc);
    for _ in 0..nc {
        let (ln, t) = lines.next_line("hexahedron")?;
        need(&lines, ln, &t, 8, "hexahedron")?;
        for tok in &t[..8] {
            connectivity.push(num(&lines, ln, tok)?);
        }
    }
    lines.expect_end()?;
    VolumetricMesh::new(MeshKind::Hex, vertices, connectivity)
}

fn push_xyz(out: &mut String, p: &Point3) {
    let _ = writeln!(out, "{} {} {}", p.x, p.y, p.z);
}

fn off_text(mesh: &VolumetricMesh) -> String {
    let mut out = format!("OFF\n{} {} 0\n", mesh.vertices().len(), mesh.num_cells());
    mesh.vertices().iter().for_each(|p| push_xyz(&mut out, p));
    for c in mesh.cells() {
        let _ = writeln!(out, "3 {} {} {}", c[0], c[1], c[2]);
    }
    out
}

fn node_ele_text(mesh: &VolumetricMesh) -> (String, String) {
    let mut node = format!("{} 3 0 0\n", mesh.vertices().len());
    for (i, p) in mesh.vertices().iter().enumerate() {
        let _ = write!(node, "{i} ");
        push_xyz(&mut node, p);
    }
    let mut ele = format!("{} 4 0\n", mesh.num_cells());
    for (i, c) in mesh.cells().enumerate() {
        let _ = writeln!(ele, "{i} {} {} {} {}", c[0], c[1], c[2], c[3]);
    }
    (node, ele)
}

fn hex_text(mesh: &VolumetricMesh) -> String {
    let mut out = format!("HEX {} {}\n", mesh.vertices().len(), mesh.num_cells());
    mesh.vertices().iter().for_each(|p| push_xyz(&mut out, p));
    for c in mesh.cells() {
        let ids: Vec<String> = c.iter().map(|i| i.to_string()).collect();
        out.push_str(&ids.join(" "));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes;
    use approx::assert_abs_diff_eq;

    fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
        let p = dir.join(name);
        fs::write(&p, text).unwrap();
        p
    }

    #[test]
    fn reads_smallest_off() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            dir.path(),
            "tri.off",
            "OFF\n# one triangle\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n",
        );
        let mesh = load_mesh(&p, MeshFormat::Off).unwrap();
        assert_eq!(mesh.kind(), MeshKind::Tri2D);
        assert_eq!(mesh.num_cells(), 1);
        assert_eq!(mesh.vertices().len(), 3);
    }

    #[test]
    fn reads_one_based_tetgen() {
        let dir = tempfile::tempdir().unwrap();
        write(
            dir.path(),
            "tet.node",
            "4 3 0 0\n1 0 0 0\n2 1 0 0\n3 0 1 0\n4 0 0 1\n",
        );
        write(dir.path(), "tet.ele", "1 4 0\n1 1 2 3 4\n");
        for name in ["tet.node", "tet.ele", "tet"] {
            let mesh = load_mesh(dir.path().join(name), MeshFormat::NodeEle).unwrap();
            assert_eq!(mesh.kind(), MeshKind::Tet);
            assert_eq!(mesh.num_cells(), 1);
            assert_eq!(mesh.cell(0), &[0, 1, 2, 3]);
        }
    }

    #[test]
    fn reads_unit_hex() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            dir.path(),
            "cube.hexmesh",
            "HEX 8 1\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n0 0 1\n1 0 1\n1 1 1\n0 1 1\n0 1 2 3 4 5 6 7\n",
        );
        let mesh = load_mesh(&p, MeshFormat::HexAscii).unwrap();
        assert_eq!(mesh.kind(), MeshKind::Hex);
        assert_eq!(mesh.num_cells(), 1);
        assert_abs_diff_eq!(mesh.cell_measure(0), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            dir.path(),
            "bad.off",
            "OFF\n3 1 0\n0 0 0\n1 zero 0\n0 1 0\n3 0 1 2\n",
        );
        match load_mesh(&p, MeshFormat::Off).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 4),
            e => panic!("unexpected {e}"),
        }
        let p = write(dir.path(), "short.off", "OFF\n3 1 0\n0 0 0\n1 0 0\n");
        assert!(matches!(
            load_mesh(&p, MeshFormat::Off).unwrap_err(),
            Error::Parse { line: 5, .. }
        ));
        let p = write(
            dir.path(),
            "quad.off",
            "OFF\n4 1 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 2 3\n",
        );
        assert!(matches!(
            load_mesh(&p, MeshFormat::Off).unwrap_err(),
            Error::Parse { line: 7, .. }
        ));
    }

    #[test]
    fn out_of_range_index_is_a_validation_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            dir.path(),
            "oob.off",
            "OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 7\n",
        );
        assert!(matches!(
            load_mesh(&p, MeshFormat::Off).unwrap_err(),
            Error::Validation(_)
        ));
    }

    #[test]
    fn missing_file_is_io_error_naming_the_path() {
        let err = load_mesh("/nonexistent/mesh.off", MeshFormat::Off).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
        assert!(err.to_string().contains("/nonexistent/mesh.off"));
    }

    #[test]
    fn round_trips_all_formats() {
        let dir = tempfile::tempdir().unwrap();
        let cases = [
            (shapes::single_triangle(), "t.off", MeshFormat::Off),
            (shapes::icosahedron(), "ico.node", MeshFormat::NodeEle),
            (
                shapes::hex_block(2, 2, 2, 1.0),
                "b.hexmesh",
                MeshFormat::HexAscii,
            ),
        ];
        for (mesh, name, fmt) in cases {
            let p = dir.path().join(name);
            save_mesh(&mesh, &p, fmt).unwrap();
            assert_eq!(load_mesh(&p, fmt).unwrap(), mesh);
        }
    }

    #[test]
    fn format_from_extension() {
        assert_eq!(
            MeshFormat::from_path(Path::new("a.OFF")),
            Some(MeshFormat::Off)
        );
        assert_eq!(
            MeshFormat::from_path(Path::new("a.ele")),
            Some(MeshFormat::NodeEle)
        );
        assert_eq!(
            MeshFormat::from_path(Path::new("a.hexmesh")),
            Some(MeshFormat::HexAscii)
        );
        assert_eq!(MeshFormat::from_path(Path::new("a.stl")), None);
    }
}
