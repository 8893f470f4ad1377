//! Minimal binary containers for volumes, images and signal records.
//!
//! Layout: a 6-byte magic line, `key=value` header lines, one blank line,
//! then little-endian `f64` payload.
//!
//! | magic      | payload order                        |
//! |------------|--------------------------------------|
//! | `FFLV1\n`  | x fastest, then y, then z            |
//! | `FFLI1\n`  | ξ fastest, then z                    |
//! | `FFLS1\n`  | `(t, sx, sy, sz)` per sample          |

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::forward::{SignalRecord, SignalSample};
use crate::grid::{Axis, Grid2D, Grid3D, Image2D, Volume3D};
use crate::linalg::Vec3;

pub const VOLUME_MAGIC: &[u8; 6] = b"FFLV1\n";
pub const IMAGE_MAGIC: &[u8; 6] = b"FFLI1\n";
pub const SIGNAL_MAGIC: &[u8; 6] = b"FFLS1\n";

fn fmt_list<T: std::fmt::Debug>(v: &[T]) -> String {
    v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(",")
}

fn encode(magic: &[u8; 6], header: &[(&str, String)], payload: &[f64]) -> Vec<u8> {
    let mut out = Vec::with_capacity(128 + payload.len() * 8);
    out.extend_from_slice(magic);
    for (k, v) in header {
        out.extend_from_slice(format!("{k}={v}\n").as_bytes());
    }
    out.push(b'\n');
    for x in payload {
        out.extend_from_slice(&x.to_le_bytes());
    }
    out
}

struct Container<'a> {
    source: String,
    header: BTreeMap<String, String>,
    payload: &'a [u8],
}

impl Container<'_> {
    fn header_err(&self, reason: impl Into<String>) -> Error {
        Error::Header {
            path: self.source.clone(),
            reason: reason.into(),
        }
    }

    fn get(&self, key: &str) -> Result<&str> {
        self.header
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| self.header_err(format!("missing key '{key}'")))
    }

    fn expect(&self, key: &str, value: &str) -> Result<()> {
        let got = self.get(key)?;
        if got == value {
            Ok(())
        } else {
            Err(self.header_err(format!("{key}={got}, expected {value}")))
        }
    }

    fn parse_list<T: std::str::FromStr>(&self, key: &str, len: usize) -> Result<Vec<T>> {
        let raw = self.get(key)?;
        let vals: Vec<T> = raw
            .split(',')
            .map(|p| p.trim().parse::<T>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| self.header_err(format!("cannot parse {key}={raw}")))?;
        if vals.len() != len {
            return Err(self.header_err(format!("{key} needs {len} entries, found {}", vals.len())));
        }
        Ok(vals)
    }

    fn floats(&self, count: usize) -> Result<Vec<f64>> {
        let expected = count * 8;
        if self.payload.len() < expected {
            return Err(Error::Truncated {
                path: self.source.clone(),
                expected,
                actual: self.payload.len(),
            });
        }
        if self.payload.len() > expected {
            return Err(self.header_err(format!(
                "payload has {} bytes but the header implies {expected}",
                self.payload.len()
            )));
        }
        Ok(self
            .payload
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect())
    }
}

fn decode<'a>(bytes: &'a [u8], magic: &[u8; 6], source: &str) -> Result<Container<'a>> {
    if bytes.len() < magic.len() || &bytes[..magic.len()] != magic {
        return Err(Error::BadMagic {
            path: source.to_string(),
            expected: String::from_utf8_lossy(&magic[..5]).into_owned(),
        });
    }
    let rest = &bytes[magic.len()..];
    let header_err = |reason: &str| Error::Header {
        path: source.to_string(),
        reason: reason.to_string(),
    };
    let end = if rest.first() == Some(&b'\n') {
        0
    } else {
        rest.windows(2)
            .position(|w| w == b"\n\n")
            .map(|p| p + 1)
            .ok_or_else(|| header_err("header is not terminated by a blank line"))?
    };
    let text = std::str::from_utf8(&rest[..end]).map_err(|_| header_err("header is not UTF-8"))?;
    let mut header = BTreeMap::new();
    for line in text.lines() {
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| header_err(&format!("line without '=': {line:?}")))?;
        header.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(Container {
        source: source.to_string(),
        header,
        payload: &rest[end + 1..],
    })
}

fn axes<const N: usize>(c: &Container<'_>) -> Result<[Axis<f64>; N]> {
    let dims: Vec<usize> = c.parse_list("dims", N)?;
    let ext: Vec<f64> = c.parse_list("extents", 2 * N)?;
    let mut out = Vec::with_capacity(N);
    for i in 0..N {
        out.push(Axis::new(ext[2 * i], ext[2 * i + 1], dims[i]).map_err(|e| c.header_err(e.to_string()))?);
    }
    Ok(out.try_into().unwrap_or_else(|_| unreachable!()))
}

fn axis_extents(axes: &[&Axis<f64>]) -> String {
    fmt_list(&axes.iter().flat_map(|a| [a.lo, a.hi]).collect::<Vec<_>>())
}

pub fn encode_volume(vol: &Volume3D<f64>) -> Vec<u8> {
    let g = &vol.grid;
    encode(
        VOLUME_MAGIC,
        &[
            ("dims", fmt_list(&g.dims())),
            ("extents", axis_extents(&[&g.x, &g.y, &g.z])),
            ("order", "xyz".into()),
            ("dtype", "f64le".into()),
        ],
        &vol.values,
    )
}

pub fn decode_volume(bytes: &[u8], source: &str) -> Result<Volume3D<f64>> {
    let c = decode(bytes, VOLUME_MAGIC, source)?;
    c.expect("order", "xyz")?;
    c.expect("dtype", "f64le")?;
    let [x, y, z] = axes::<3>(&c)?;
    let grid = Grid3D { x, y, z };
    Volume3D::from_values(grid, c.floats(grid.len())?)
}

pub fn encode_image(img: &Image2D<f64>) -> Vec<u8> {
    let g = &img.grid;
    encode(
        IMAGE_MAGIC,
        &[
            ("dims", fmt_list(&g.dims())),
            ("extents", axis_extents(&[&g.u, &g.v])),
            ("order", "uv".into()),
            ("dtype", "f64le".into()),
        ],
        &img.values,
    )
}

pub fn decode_image(bytes: &[u8], source: &str) -> Result<Image2D<f64>> {
    let c = decode(bytes, IMAGE_MAGIC, source)?;
    c.expect("order", "uv")?;
    c.expect("dtype", "f64le")?;
    let [u, v] = axes::<2>(&c)?;
    let grid = Grid2D::new(u, v);
    Image2D::from_values(grid, c.floats(grid.len())?)
}

pub fn encode_signal(rec: &SignalRecord<f64>) -> Vec<u8> {
    let payload: Vec<f64> = rec.samples.iter().flat_map(|s| [s.t, s.s.x, s.s.y, s.s.z]).collect();
    encode(
        SIGNAL_MAGIC,
        &[
            ("theta", format!("{:?}", rec.theta)),
            ("angle_index", rec.angle_index.to_string()),
            ("samples", rec.samples.len().to_string()),
            ("layout", "t,sx,sy,sz".into()),
            ("dtype", "f64le".into()),
        ],
        &payload,
    )
}

pub fn decode_signal(bytes: &[u8], source: &str) -> Result<SignalRecord<f64>> {
    let c = decode(bytes, SIGNAL_MAGIC, source)?;
    c.expect("layout", "t,sx,sy,sz")?;
    c.expect("dtype", "f64le")?;
    let theta: f64 = c.parse_list("theta", 1)?[0];
    let angle_index: usize = c.parse_list("angle_index", 1)?[0];
    let n: usize = c.parse_list("samples", 1)?[0];
    let vals = c.floats(4 * n)?;
    let samples = vals
        .chunks_exact(4)
        .map(|q| SignalSample {
            t: q[0],
            s: Vec3::new(q[1], q[2], q[3]),
        })
        .collect();
    Ok(SignalRecord {
        theta,
        angle_index,
        samples,
    })
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

pub fn read_volume(path: impl AsRef<Path>) -> Result<Volume3D<f64>> {
    let p = path.as_ref();
    decode_volume(&read(p)?, &p.display().to_string())
}

pub fn write_volume(path: impl AsRef<Path>, vol: &Volume3D<f64>) -> Result<()> {
    write(path.as_ref(), &encode_volume(vol))
}

pub fn read_image(path: impl AsRef<Path>) -> Result<Image2D<f64>> {
    let p = path.as_ref();
    decode_image(&read(p)?, &p.display().to_string())
}

pub fn write_image(path: impl AsRef<Path>, img: &Image2D<f64>) -> Result<()> {
    write(path.as_ref(), &encode_image(img))
}

pub fn read_signal(path: impl AsRef<Path>) -> Result<SignalRecord<f64>> {
    let p = path.as_ref();
    decode_signal(&read(p)?, &p.display().to_string())
}

pub fn write_signal(path: impl AsRef<Path>, rec: &SignalRecord<f64>) -> Result<()> {
    write(path.as_ref(), &encode_signal(rec))
}

/// Flat text export: one value per line, payload order.
pub fn values_to_csv(values: &[f64]) -> String {
    let mut s = String::with_capacity(values.len() * 24);
    for v in values {
        s.push_str(&format!("{v:?}\n"));
    }
    s
}
