//! Mesh, feature-edge, labeling and colored PLY files.
//!
//! Parsers work on strings so they can be tested without touching disk;
//! the `read_*` / `write_*` wrappers add paths to error messages.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use polycube_core::{Label, LabelError, Labeling, SurfaceMesh, Vec3};

use crate::error::ToolError;

/// Raw triangle soup as read from a file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RawMesh {
    pub vertices: Vec<Vec3>,
    pub triangles: Vec<[usize; 3]>,
}

/// Error from a string parser: 1-based line and message.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LineError {
    pub line: usize,
    pub message: String,
}

impl LineError {
    fn new(line: usize, message: impl Into<String>) -> Self {
        LineError { line, message: message.into() }
    }

    fn at(self, path: &Path) -> ToolError {
        ToolError::parse(path, self.line, self.message)
    }
}

fn read_text(path: &Path) -> Result<String, ToolError> {
    fs::read_to_string(path).map_err(|e| ToolError::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<(), ToolError> {
    fs::write(path, text).map_err(|e| ToolError::io(path, e))
}

fn parse_f64(tok: Option<&str>, line: usize) -> Result<f64, LineError> {
    let tok = tok.ok_or_else(|| LineError::new(line, "missing coordinate"))?;
    tok.parse().map_err(|_| LineError::new(line, format!("bad number '{tok}'")))
}

/// Wavefront OBJ: `v` and `f` records. Texture and normal indices in
/// faces are ignored, negative indices count back from the last vertex.
pub fn parse_obj(text: &str) -> Result<RawMesh, LineError> {
    let mut mesh = RawMesh::default();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let mut toks = raw.split_whitespace();
        match toks.next() {
            Some("v") => {
                let x = parse_f64(toks.next(), line)?;
                let y = parse_f64(toks.next(), line)?;
                let z = parse_f64(toks.next(), line)?;
                mesh.vertices.push(Vec3::new(x, y, z));
            }
            Some("f") => {
                let mut face = Vec::with_capacity(3);
                for tok in toks {
                    let idx = tok.split('/').next().unwrap_or("");
                    let n: i64 = idx.parse().map_err(|_| LineError::new(line, format!("bad face index '{tok}'")))?;
                    let count = mesh.vertices.len() as i64;
                    let v = match n {
                        n if n > 0 => n - 1,
                        n if n < 0 => count + n,
                        _ => return Err(LineError::new(line, "face index 0")),
                    };
                    if v < 0 || v >= count {
                        return Err(LineError::new(line, format!("face index {n} out of range")));
                    }
                    face.push(v as usize);
                }
                if face.len() != 3 {
                    return Err(LineError::new(line, "non-triangle face"));
                }
                mesh.triangles.push([face[0], face[1], face[2]]);
            }
            _ => {}
        }
    }
    Ok(mesh)
}

/// MEDIT `.mesh`: the `Vertices` and `Triangles` sections. Other element
/// sections are skipped; quadrilaterals are rejected.
pub fn parse_medit(text: &str) -> Result<RawMesh, LineError> {
    // (token, line) stream with comments removed.
    let tokens: Vec<(&str, usize)> = text
        .lines()
        .enumerate()
        .flat_map(|(i, l)| l.split('#').next().unwrap_or("").split_whitespace().map(move |t| (t, i + 1)))
        .collect();
    let mut mesh = RawMesh::default();
    let mut pos = 0;
    let next = |pos: &mut usize| -> Result<(&str, usize), LineError> {
        let last = tokens.last().map_or(1, |t| t.1);
        let t = tokens.get(*pos).copied().ok_or_else(|| LineError::new(last, "unexpected end of file"))?;
        *pos += 1;
        Ok(t)
    };
    let count = |pos: &mut usize| -> Result<usize, LineError> {
        let (t, line) = next(pos)?;
        t.parse().map_err(|_| LineError::new(line, format!("bad count '{t}'")))
    };
    let mut saw_vertices = false;
    while pos < tokens.len() {
        let (kw, line) = next(&mut pos)?;
        match kw {
            "MeshVersionFormatted" | "Dimension" => {
                let (v, l) = next(&mut pos)?;
                if kw == "Dimension" && v != "3" {
                    return Err(LineError::new(l, format!("dimension {v} is not supported")));
                }
            }
            "Vertices" => {
                let n = count(&mut pos)?;
                for _ in 0..n {
                    let mut c = [0.0; 3];
                    for x in &mut c {
                        let (t, l) = next(&mut pos)?;
                        *x = parse_f64(Some(t), l)?;
                    }
                    next(&mut pos)?;
                    mesh.vertices.push(Vec3::new(c[0], c[1], c[2]));
                }
                saw_vertices = true;
            }
            "Triangles" => {
                let n = count(&mut pos)?;
                for _ in 0..n {
                    let mut tri = [0usize; 3];
                    for v in &mut tri {
                        let (t, l) = next(&mut pos)?;
                        let i: usize = t.parse().map_err(|_| LineError::new(l, format!("bad index '{t}'")))?;
                        if i == 0 || (saw_vertices && i > mesh.vertices.len()) {
                            return Err(LineError::new(l, format!("vertex index {i} out of range")));
                        }
                        *v = i - 1;
                    }
                    next(&mut pos)?;
                    mesh.triangles.push(tri);
                }
            }
            "Quadrilaterals" => {
                if count(&mut pos)? > 0 {
                    return Err(LineError::new(line, "non-triangle face"));
                }
            }
            "End" => break,
            _ => {
                let width = match kw {
                    "Corners" | "Ridges" | "RequiredVertices" | "RequiredEdges" | "RequiredTriangles" => 1,
                    "NormalAtVertices" | "TangentAtVertices" => 2,
                    "Edges" | "Normals" | "Tangents" => 3,
                    "Tetrahedra" => 5,
                    "Prisms" => 7,
                    "Hexahedra" => 9,
                    _ => return Err(LineError::new(line, format!("unknown section '{kw}'"))),
                };
                let n = count(&mut pos)?;
                for _ in 0..n * width {
                    next(&mut pos)?;
                }
            }
        }
    }
    Ok(mesh)
}

/// Feature-edge sidecar: one zero-based `v1 v2` pair per line. Blank lines
/// and `#` comments are skipped.
pub fn parse_feature_edges(text: &str) -> Result<Vec<(usize, usize)>, LineError> {
    let mut pairs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let nums: Vec<&str> = body.split_whitespace().collect();
        let bad = || LineError::new(i + 1, format!("expected two vertex indices, got '{body}'"));
        if nums.len() != 2 {
            return Err(bad());
        }
        let a = nums[0].parse().map_err(|_| bad())?;
        let b = nums[1].parse().map_err(|_| bad())?;
        pairs.push((a, b));
    }
    Ok(pairs)
}

/// One label value per line. `expected` is the triangle count to check
/// against.
pub fn parse_labeling(text: &str, expected: Option<usize>) -> Result<Labeling, LineError> {
    let mut labels = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let tok = raw.trim();
        let value: u32 = tok.parse().map_err(|_| LineError::new(i + 1, format!("bad label '{tok}'")))?;
        labels.push(Label::new(value).map_err(|e| LineError::new(i + 1, e.to_string()))?);
    }
    if let Some(n) = expected {
        if labels.len() != n {
            let e = LabelError::LengthMismatch { labels: labels.len(), triangles: n };
            return Err(LineError::new(labels.len() + 1, e.to_string()));
        }
    }
    Ok(Labeling::new(labels))
}

pub fn format_labeling(labeling: &Labeling) -> String {
    let mut out = String::with_capacity(labeling.len() * 2);
    for l in labeling.iter() {
        writeln!(out, "{}", l.value()).unwrap();
    }
    out
}

/// Face color of a label: red, white and blue for X, Y and Z, darker for
/// the negative direction.
pub fn label_color(label: Label) -> [u8; 3] {
    match label.value() {
        0 => [230, 25, 25],
        1 => [115, 12, 12],
        2 => [240, 240, 240],
        3 => [120, 120, 120],
        4 => [25, 25, 230],
        _ => [12, 12, 115],
    }
}

/// ASCII PLY with double vertex coordinates and per-face RGB. Coordinates
/// are printed in shortest round-trip form, so they read back bit-exact.
pub fn format_colored_ply(mesh: &SurfaceMesh, labeling: &Labeling) -> String {
    let mut out = String::new();
    out.push_str("ply\nformat ascii 1.0\n");
    writeln!(out, "element vertex {}", mesh.vertex_count()).unwrap();
    out.push_str("property double x\nproperty double y\nproperty double z\n");
    writeln!(out, "element face {}", mesh.triangle_count()).unwrap();
    out.push_str("property list uchar int vertex_indices\n");
    out.push_str("property uchar red\nproperty uchar green\nproperty uchar blue\nend_header\n");
    for p in mesh.vertices() {
        writeln!(out, "{:?} {:?} {:?}", p.x, p.y, p.z).unwrap();
    }
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let [r, g, b] = label_color(labeling[t]);
        writeln!(out, "3 {} {} {} {r} {g} {b}", tri[0], tri[1], tri[2]).unwrap();
    }
    out
}

/// Mesh with per-face colors, as read back from a PLY file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ColoredMesh {
    pub mesh: RawMesh,
    pub colors: Vec<[u8; 3]>,
}

/// Reads the ASCII layout written by [`format_colored_ply`].
pub fn parse_colored_ply(text: &str) -> Result<ColoredMesh, LineError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let mut counts = (None, None);
    let mut ascii = false;
    loop {
        let (line, l) = lines.next().ok_or_else(|| LineError::new(1, "missing end_header"))?;
        let toks: Vec<&str> = l.split_whitespace().collect();
        match toks.as_slice() {
            ["end_header"] => break,
            ["format", "ascii", _] => ascii = true,
            ["format", ..] => return Err(LineError::new(line, "only ascii PLY is supported")),
            ["element", "vertex", n] => counts.0 = n.parse::<usize>().ok(),
            ["element", "face", n] => counts.1 = n.parse::<usize>().ok(),
            _ => {}
        }
    }
    let (Some(nv), Some(nf), true) = (counts.0, counts.1, ascii) else {
        return Err(LineError::new(1, "header lacks ascii format or vertex/face counts"));
    };
    let mut out = ColoredMesh::default();
    for _ in 0..nv {
        let (line, l) = lines.next().ok_or_else(|| LineError::new(0, "truncated vertex list"))?;
        let mut toks = l.split_whitespace();
        let x = parse_f64(toks.next(), line)?;
        let y = parse_f64(toks.next(), line)?;
        let z = parse_f64(toks.next(), line)?;
        out.mesh.vertices.push(Vec3::new(x, y, z));
    }
    for _ in 0..nf {
        let (line, l) = lines.next().ok_or_else(|| LineError::new(0, "truncated face list"))?;
        let nums: Result<Vec<usize>, _> = l.split_whitespace().map(str::parse).collect();
        let nums = nums.map_err(|_| LineError::new(line, "bad face record"))?;
        if nums.len() != 7 || nums[0] != 3 {
            return Err(LineError::new(line, "non-triangle face"));
        }
        let rgb = [nums[4], nums[5], nums[6]];
        if rgb.iter().any(|&c| c > 255) {
            return Err(LineError::new(line, "color component above 255"));
        }
        out.mesh.triangles.push([nums[1], nums[2], nums[3]]);
        out.colors.push(rgb.map(|c| c as u8));
    }
    Ok(out)
}

/// Read an OBJ or MEDIT mesh, chosen by extension (`.mesh` is MEDIT,
/// anything else OBJ).
pub fn read_raw_mesh(path: &Path) -> Result<RawMesh, ToolError> {
    let text = read_text(path)?;
    let medit = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("mesh"));
    let parsed = if medit { parse_medit(&text) } else { parse_obj(&text) };
    parsed.map_err(|e| e.at(path))
}

/// Read and index a mesh. Feature edges come from `features` when given,
/// otherwise from dihedral angles; `threshold` applies either way.
pub fn read_mesh(path: &Path, features: Option<&Path>, threshold: f64) -> Result<SurfaceMesh, ToolError> {
    let raw = read_raw_mesh(path)?;
    let mesh = SurfaceMesh::new(raw.vertices, raw.triangles)
        .map_err(|source| ToolError::Mesh { path: path.to_path_buf(), source })?;
    match features {
        None => Ok(mesh.with_feature_threshold(threshold)),
        Some(fp) => {
            let pairs = parse_feature_edges(&read_text(fp)?).map_err(|e| e.at(fp))?;
            mesh.with_supplied_features(&pairs, threshold)
                .map_err(|source| ToolError::Mesh { path: fp.to_path_buf(), source })
        }
    }
}

pub fn read_labeling(path: &Path, mesh: Option<&SurfaceMesh>) -> Result<Labeling, ToolError> {
    parse_labeling(&read_text(path)?, mesh.map(|m| m.triangle_count())).map_err(|e| e.at(path))
}

pub fn write_labeling(path: &Path, labeling: &Labeling) -> Result<(), ToolError> {
    write_text(path, &format_labeling(labeling))
}

pub fn export_colored_mesh(mesh: &SurfaceMesh, labeling: &Labeling, path: &Path) -> Result<(), ToolError> {
    if labeling.len() != mesh.triangle_count() {
        let source = LabelError::LengthMismatch { labels: labeling.len(), triangles: mesh.triangle_count() };
        return Err(ToolError::Label { path: path.to_path_buf(), source });
    }
    write_text(path, &format_colored_ply(mesh, labeling))
}

pub fn read_colored_ply(path: &Path) -> Result<ColoredMesh, ToolError> {
    parse_colored_ply(&read_text(path)?).map_err(|e| e.at(path))
}

/// Serialize `value` as pretty JSON with a trailing newline.
pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), ToolError> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    write_text(path, &text)
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, ToolError> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| ToolError::parse(path, e.line(), e.to_string()))
}

/// OBJ text of a mesh, vertices in shortest round-trip form.
pub fn format_obj(mesh: &SurfaceMesh) -> String {
    let mut out = String::new();
    for p in mesh.vertices() {
        writeln!(out, "v {:?} {:?} {:?}", p.x, p.y, p.z).unwrap();
    }
    for t in mesh.triangles() {
        writeln!(out, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1).unwrap();
    }
    out
}

pub fn write_obj(path: &Path, mesh: &SurfaceMesh) -> Result<(), ToolError> {
    write_text(path, &format_obj(mesh))
}
