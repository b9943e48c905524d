//! ASCII OFF and OBJ reading and writing (positions and faces only).

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use nalgebra::Vector3;

use super::TriMesh;
use crate::{Error, Result};

/// Supported mesh file formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Off,
    Obj,
}

impl MeshFormat {
    /// Guesses the format from a file extension.
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "off" => Some(Self::Off),
            "obj" => Some(Self::Obj),
            _ => None,
        }
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line: Some(line),
        message: message.into(),
    }
}

/// Reads and validates a mesh. Polygons are fan-triangulated.
pub fn load_mesh<R: Read>(source: R, format: MeshFormat) -> Result<TriMesh> {
    let (positions, faces) = match format {
        MeshFormat::Off => parse_off(source)?,
        MeshFormat::Obj => parse_obj(source)?,
    };
    TriMesh::new(positions, faces)
}

/// Reads a mesh from disk, picking the format from the extension.
pub fn load_mesh_file(path: impl AsRef<Path>) -> Result<TriMesh> {
    let path = path.as_ref();
    let format = MeshFormat::from_path(path).ok_or_else(|| Error::Parse {
        line: None,
        message: format!("unrecognized mesh extension: {}", path.display()),
    })?;
    let file = std::fs::File::open(path).map_err(|e| Error::Parse {
        line: None,
        message: format!("cannot read {}: {e}", path.display()),
    })?;
    let label = path
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Ok(load_mesh(BufReader::new(file), format)?.with_label(label))
}

fn lines<R: Read>(source: R) -> impl Iterator<Item = (usize, std::io::Result<String>)> {
    BufReader::new(source)
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
}

fn strip_comment(line: &str) -> &str {
    line.split('#').next().unwrap_or("").trim()
}

fn parse_f64(tok: &str, line: usize) -> Result<f64> {
    tok.parse::<f64>()
        .map_err(|_| parse_err(line, format!("expected a number, found {tok:?}")))
}

fn parse_usize(tok: &str, line: usize) -> Result<usize> {
    tok.parse::<usize>()
        .map_err(|_| parse_err(line, format!("expected an index, found {tok:?}")))
}

fn fan(poly: &[usize], faces: &mut Vec<[usize; 3]>) {
    for k in 1..poly.len() - 1 {
        faces.push([poly[0], poly[k], poly[k + 1]]);
    }
}

fn parse_off<R: Read>(source: R) -> Result<(Vec<Vector3<f64>>, Vec<[usize; 3]>)> {
    let mut tokens: Vec<(usize, String)> = Vec::new();
    let mut header_seen = false;
    for (no, line) in lines(source) {
        let line = line.map_err(|e| parse_err(no, e.to_string()))?;
        let mut body = strip_comment(&line);
        if body.is_empty() {
            continue;
        }
        if !header_seen {
            header_seen = true;
            match body.strip_prefix("OFF") {
                Some(rest) => body = rest.trim(),
                None => return Err(parse_err(no, "missing OFF header")),
            }
        }
        tokens.extend(body.split_whitespace().map(|t| (no, t.to_string())));
    }
    if !header_seen {
        return Err(Error::Parse {
            line: None,
            message: "empty OFF file".into(),
        });
    }
    let mut it = tokens.into_iter();
    let mut next = |what: &str| {
        it.next().ok_or_else(|| Error::Parse {
            line: None,
            message: format!("unexpected end of file reading {what}"),
        })
    };
    let (l, t) = next("vertex count")?;
    let nv = parse_usize(&t, l)?;
    let (l, t) = next("face count")?;
    let nf = parse_usize(&t, l)?;
    let (l, t) = next("edge count")?;
    parse_usize(&t, l)?;
    let mut positions = Vec::with_capacity(nv);
    for _ in 0..nv {
        let mut c = [0.0; 3];
        for x in &mut c {
            let (l, t) = next("vertex coordinate")?;
            *x = parse_f64(&t, l)?;
        }
        positions.push(Vector3::from(c));
    }
    let mut faces = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (l, t) = next("face size")?;
        let n = parse_usize(&t, l)?;
        if n < 3 {
            return Err(parse_err(l, format!("face with {n} vertices")));
        }
        let mut poly = Vec::with_capacity(n);
        for _ in 0..n {
            let (l, t) = next("face index")?;
            let v = parse_usize(&t, l)?;
            if v >= nv {
                return Err(parse_err(l, format!("vertex index {v} out of range")));
            }
            poly.push(v);
        }
        fan(&poly, &mut faces);
    }
    Ok((positions, faces))
}

fn parse_obj<R: Read>(source: R) -> Result<(Vec<Vector3<f64>>, Vec<[usize; 3]>)> {
    let mut positions = Vec::new();
    let mut faces = Vec::new();
    for (no, line) in lines(source) {
        let line = line.map_err(|e| parse_err(no, e.to_string()))?;
        let body = strip_comment(&line);
        let mut toks = body.split_whitespace();
        match toks.next() {
            Some("v") => {
                let c: Vec<f64> = toks
                    .take(3)
                    .map(|t| parse_f64(t, no))
                    .collect::<Result<_>>()?;
                if c.len() != 3 {
                    return Err(parse_err(no, "vertex needs three coordinates"));
                }
                positions.push(Vector3::new(c[0], c[1], c[2]));
            }
            Some("f") => {
                let mut poly = Vec::new();
                for t in toks {
                    let head = t.split('/').next().unwrap_or("");
                    let idx: i64 = head
                        .parse()
                        .map_err(|_| parse_err(no, format!("bad face index {t:?}")))?;
                    let resolved = match idx {
                        i if i > 0 => (i - 1) as usize,
                        i if i < 0 && (-i) as usize <= positions.len() => {
                            positions.len() - (-i) as usize
                        }
                        _ => return Err(parse_err(no, format!("face index {idx} out of range"))),
                    };
                    poly.push(resolved);
                }
                if poly.len() < 3 {
                    return Err(parse_err(no, "face needs at least three vertices"));
                }
                fan(&poly, &mut faces);
            }
            _ => {}
        }
    }
    let nv = positions.len();
    if let Some(v) = faces.iter().flatten().find(|&&v| v >= nv) {
        return Err(Error::Parse {
            line: None,
            message: format!("vertex index {} out of range", v + 1),
        });
    }
    Ok((positions, faces))
}

/// Writes the mesh as ASCII OFF.
pub fn write_off<W: Write>(mesh: &TriMesh, mut out: W) -> std::io::Result<()> {
    writeln!(out, "OFF")?;
    writeln!(
        out,
        "{} {} {}",
        mesh.vertex_count(),
        mesh.face_count(),
        mesh.edge_count()
    )?;
    for p in mesh.positions() {
        writeln!(out, "{:?} {:?} {:?}", p.x, p.y, p.z)?;
    }
    for f in mesh.faces() {
        writeln!(out, "3 {} {} {}", f[0], f[1], f[2])?;
    }
    Ok(())
}

/// Writes the mesh as ASCII OBJ.
pub fn write_obj<W: Write>(mesh: &TriMesh, mut out: W) -> std::io::Result<()> {
    for p in mesh.positions() {
        writeln!(out, "v {:?} {:?} {:?}", p.x, p.y, p.z)?;
    }
    for f in mesh.faces() {
        writeln!(out, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1)?;
    }
    Ok(())
}
