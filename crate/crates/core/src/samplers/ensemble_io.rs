//! Ensemble files: long-format CSV and the compact `VVT1` binary format.
//!
//! Binary layout: optional text lines starting with `#` and ending in `\n`,
//! then, little endian, magic `VVT1`, `u64` path count, `u64` step count,
//! `f64` lifetime and `n_paths · (n_steps + 1)` `f64` values path by path.

use std::io::{Read, Write};

use crate::error::{invalid, Error, Result};
use crate::path::PathGrid;

pub const MAGIC: &[u8; 4] = b"VVT1";

/// Writes `path_id,t,value` rows. `comment` lines are emitted first, prefixed by `# `.
pub fn write_csv<'a, W, I>(mut out: W, comment: &str, paths: I) -> Result<()>
where
    W: Write,
    I: IntoIterator<Item = &'a PathGrid>,
{
    for line in comment.lines() {
        writeln!(out, "# {line}")?;
    }
    writeln!(out, "path_id,t,value")?;
    for (i, p) in paths.into_iter().enumerate() {
        for (k, v) in p.values().iter().enumerate() {
            writeln!(out, "{i},{:.16e},{:.16e}", p.time(k), v)?;
        }
    }
    out.flush()?;
    Ok(())
}

pub struct BinaryWriter<W: Write> {
    out: W,
    n_steps: usize,
    lifetime: f64,
    remaining: u64,
}

impl<W: Write> BinaryWriter<W> {
    pub fn new(out: W, n_paths: usize, n_steps: usize, lifetime: f64) -> Result<Self> {
        BinaryWriter::with_comment(out, "", n_paths, n_steps, lifetime)
    }

    /// Like [`BinaryWriter::new`], with `# ` comment lines ahead of the magic.
    pub fn with_comment(mut out: W, comment: &str, n_paths: usize, n_steps: usize, lifetime: f64) -> Result<Self> {
        for line in comment.lines() {
            writeln!(out, "# {line}")?;
        }
        out.write_all(MAGIC)?;
        out.write_all(&(n_paths as u64).to_le_bytes())?;
        out.write_all(&(n_steps as u64).to_le_bytes())?;
        out.write_all(&lifetime.to_le_bytes())?;
        Ok(BinaryWriter {
            out,
            n_steps,
            lifetime,
            remaining: n_paths as u64,
        })
    }

    pub fn push(&mut self, p: &PathGrid) -> Result<()> {
        if p.n_steps() != self.n_steps || p.lifetime() != self.lifetime {
            return Err(invalid("path grid does not match the file header"));
        }
        if self.remaining == 0 {
            return Err(invalid("more paths than announced in the header"));
        }
        let mut buf = Vec::with_capacity(8 * (self.n_steps + 1));
        for v in p.values() {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        self.out.write_all(&buf)?;
        self.remaining -= 1;
        Ok(())
    }

    pub fn finish(mut self) -> Result<W> {
        if self.remaining != 0 {
            return Err(invalid(format!("{} announced paths missing", self.remaining)));
        }
        self.out.flush()?;
        Ok(self.out)
    }
}

pub fn write_binary<W: Write>(out: W, paths: &[PathGrid]) -> Result<()> {
    let first = paths.first().ok_or_else(|| invalid("empty ensemble"))?;
    let mut w = BinaryWriter::new(out, paths.len(), first.n_steps(), first.lifetime())?;
    for p in paths {
        w.push(p)?;
    }
    w.finish()?;
    Ok(())
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

pub fn read_binary<R: Read>(mut input: R) -> Result<Vec<PathGrid>> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic[..1])?;
    while magic[0] == b'#' {
        let mut byte = [0u8; 1];
        loop {
            input.read_exact(&mut byte)?;
            if byte[0] == b'\n' {
                break;
            }
        }
        input.read_exact(&mut magic[..1])?;
    }
    input.read_exact(&mut magic[1..])?;
    if &magic != MAGIC {
        return Err(Error::MalformedPath("missing VVT1 magic".into()));
    }
    let n_paths = read_u64(&mut input)? as usize;
    let n_steps = read_u64(&mut input)? as usize;
    let lifetime = f64::from_bits(read_u64(&mut input)?);
    let mut paths = Vec::with_capacity(n_paths);
    let mut buf = vec![0u8; 8 * (n_steps + 1)];
    for _ in 0..n_paths {
        input.read_exact(&mut buf)?;
        let values = buf
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
            .collect();
        paths.push(PathGrid::new(lifetime, values)?);
    }
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn paths() -> Vec<PathGrid> {
        vec![
            PathGrid::new(1.0, vec![0.0, 0.5, -1.0]).unwrap(),
            PathGrid::new(1.0, vec![0.0, 1.0 / 3.0, 2.0]).unwrap(),
        ]
    }

    #[test]
    fn binary_comment_is_skipped() {
        let mut buf = Vec::new();
        let mut w = BinaryWriter::with_comment(&mut buf, "seed=1\nlaw=bm", 2, 2, 1.0).unwrap();
        for p in paths() {
            w.push(&p).unwrap();
        }
        w.finish().unwrap();
        assert!(buf.starts_with(b"# seed=1\n# law=bm\nVVT1"));
        assert_eq!(read_binary(&buf[..]).unwrap(), paths());
    }

    #[test]
    fn binary_round_trip() {
        let mut buf = Vec::new();
        write_binary(&mut buf, &paths()).unwrap();
        assert_eq!(&buf[..4], b"VVT1");
        assert_eq!(buf.len(), 4 + 24 + 2 * 3 * 8);
        assert_eq!(read_binary(&buf[..]).unwrap(), paths());
    }

    #[test]
    fn binary_rejects_bad_magic() {
        assert!(read_binary(&b"XXXX0000"[..]).is_err());
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        write_csv(&mut buf, "law=test seed=1", &paths()).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "# law=test seed=1");
        assert_eq!(lines[1], "path_id,t,value");
        assert_eq!(lines.len(), 2 + 6);
        assert!(lines[7].starts_with("1,1.0000000000000000e0,2.0000000000000000e0"));
    }
}
