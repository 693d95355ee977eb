//! `ARBF1` model files.
//!
//! ```text
//! ARBF1
//! BASIS imq 1.0000000000000001e-1
//! LAMBDA 0e0
//! MODE aniso
//! N 14
//! P x y z value                  (one line per center)
//! S ax ay az bx by bz value
//! w                              (one line per weight)
//! ```
//!
//! Reals are written with 17 significant digits so doubles survive the
//! round trip unchanged.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{Basis, BasisKind, InterpolationCenter, InterpolationModel, Mode};
use crate::error::{Error, Result};
use crate::mesh::{CenterSegment, NodalValue};
use crate::Point3;

const MAGIC: &str = "ARBF1";

fn real(out: &mut String, v: f64) {
    let _ = write!(out, "{v:.16e}");
}

fn reals(out: &mut String, vs: &[f64]) {
    for (k, &v) in vs.iter().enumerate() {
        if k > 0 {
            out.push(' ');
        }
        real(out, v);
    }
    out.push('\n');
}

pub fn write_model(model: &InterpolationModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    out.push_str(MAGIC);
    out.push('\n');
    let _ = write!(out, "BASIS {} ", model.basis().kind().name());
    reals(&mut out, &[model.basis().shape()]);
    out.push_str("LAMBDA ");
    reals(&mut out, &[model.lambda()]);
    let _ = writeln!(out, "MODE {}", model.mode().name());
    let _ = writeln!(out, "N {}", model.len());
    for c in model.centers() {
        match c {
            InterpolationCenter::Point(p) => {
                out.push_str("P ");
                reals(
                    &mut out,
                    &[p.position.x, p.position.y, p.position.z, p.value],
                );
            }
            InterpolationCenter::Segment(s) => {
                out.push_str("S ");
                reals(
                    &mut out,
                    &[s.a.x, s.a.y, s.a.z, s.b.x, s.b.y, s.b.z, s.value],
                );
            }
        }
    }
    for &w in model.weights() {
        reals(&mut out, &[w]);
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn read_model(path: impl AsRef<Path>) -> Result<InterpolationModel> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split_whitespace().collect::<Vec<_>>()))
        .filter(|(_, t)| !t.is_empty());
    let last = text.lines().count() + 1;
    let mut next = |what: &str| {
        lines.next().ok_or_else(|| {
            Error::parse(
                path,
                last,
                format!("unexpected end of file, expected {what}"),
            )
        })
    };
    let num = |line: usize, tok: &str| -> Result<f64> {
        tok.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| {
                Error::parse(path, line, format!("cannot parse '{tok}' as a finite real"))
            })
    };
    let keyword = |line: usize, t: &[&str], key: &str, n: usize| -> Result<()> {
        if t[0] != key || t.len() != n + 1 {
            Err(Error::parse(
                path,
                line,
                format!("expected '{key}' followed by {n} value(s)"),
            ))
        } else {
            Ok(())
        }
    };

    let (ln, t) = next("magic")?;
    if t != [MAGIC] {
        return Err(Error::parse(path, ln, format!("expected '{MAGIC}'")));
    }
    let (ln, t) = next("BASIS line")?;
    keyword(ln, &t, "BASIS", 2)?;
    let kind: BasisKind = t[1]
        .parse()
        .map_err(|e: Error| Error::parse(path, ln, e.to_string()))?;
    let basis =
        Basis::new(kind, num(ln, t[2])?).map_err(|e| Error::parse(path, ln, e.to_string()))?;
    let (ln, t) = next("LAMBDA line")?;
    keyword(ln, &t, "LAMBDA", 1)?;
    let lambda = num(ln, t[1])?;
    let (ln, t) = next("MODE line")?;
    keyword(ln, &t, "MODE", 1)?;
    let mode: Mode = t[1]
        .parse()
        .map_err(|e: Error| Error::parse(path, ln, e.to_string()))?;
    let (ln, t) = next("N line")?;
    keyword(ln, &t, "N", 1)?;
    let n: usize = t[1]
        .parse()
        .map_err(|_| Error::parse(path, ln, format!("cannot parse '{}' as a count", t[1])))?;

    let mut centers = Vec::with_capacity(n);
    for _ in 0..n {
        let (ln, t) = next("center")?;
        let center = match t[0] {
            "P" if t.len() == 5 => InterpolationCenter::Point(NodalValue {
                position: Point3::new(num(ln, t[1])?, num(ln, t[2])?, num(ln, t[3])?),
                value: num(ln, t[4])?,
            }),
            "S" if t.len() == 8 => InterpolationCenter::Segment(CenterSegment {
                a: Point3::new(num(ln, t[1])?, num(ln, t[2])?, num(ln, t[3])?),
                b: Point3::new(num(ln, t[4])?, num(ln, t[5])?, num(ln, t[6])?),
                value: num(ln, t[7])?,
            }),
            _ => {
                return Err(Error::parse(
                    path,
                    ln,
                    "expected 'P x y z v' or 'S ax ay az bx by bz v'",
                ))
            }
        };
        centers.push(center);
    }
    let mut weights = Vec::with_capacity(n);
    for _ in 0..n {
        let (ln, t) = next("weight")?;
        if t.len() != 1 {
            return Err(Error::parse(path, ln, "expected a single weight"));
        }
        weights.push(num(ln, t[0])?);
    }
    if let Some((ln, _)) = lines.next() {
        return Err(Error::parse(path, ln, "unexpected trailing data"));
    }
    InterpolationModel::from_parts(centers, basis, mode, lambda, weights)
        .map_err(|e| Error::parse(path, last, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::assemble_center_set;
    use crate::shapes;

    #[test]
    fn round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        for (mode, kind) in [
            (Mode::Anisotropic, BasisKind::InverseMultiquadric),
            (Mode::Isotropic, BasisKind::ThinPlateSpline),
        ] {
            let basis = Basis::new(kind, 0.1).unwrap();
            let centers = assemble_center_set(&shapes::icosahedron(), mode);
            let model = InterpolationModel::fit(centers, basis, mode, 1e-9).unwrap();
            let p = dir.path().join("m.arbf");
            write_model(&model, &p).unwrap();
            let back = read_model(&p).unwrap();
            assert_eq!(back, model);
            let weights_bits: Vec<u64> = back.weights().iter().map(|w| w.to_bits()).collect();
            let orig_bits: Vec<u64> = model.weights().iter().map(|w| w.to_bits()).collect();
            assert_eq!(weights_bits, orig_bits);
        }
    }

    #[test]
    fn corrupted_files_fail_to_parse() {
        let dir = tempfile::tempdir().unwrap();
        let model = InterpolationModel::fit(
            assemble_center_set(&shapes::unit_tet(), Mode::Anisotropic),
            Basis::default(),
            Mode::Anisotropic,
            0.0,
        )
        .unwrap();
        let p = dir.path().join("m.arbf");
        write_model(&model, &p).unwrap();
        let good = fs::read_to_string(&p).unwrap();

        let truncated: String = good.lines().take(10).collect::<Vec<_>>().join("\n");
        let bad_magic = good.replacen("ARBF1", "ARBF2", 1);
        let bad_number = good.replacen("P ", "P x", 1);
        for text in [truncated, bad_magic, bad_number, String::new()] {
            fs::write(&p, text).unwrap();
            assert!(matches!(read_model(&p), Err(Error::Parse { .. })));
        }
    }
}
