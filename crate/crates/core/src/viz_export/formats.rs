//! Byte layouts (all multi-byte numbers little-endian):
//!
//! * KGRID: `"KGRD"`, u8 version (1), u8 axis count, then per axis u8 name
//!   length, name bytes, f64 min, f64 step, u32 count, u8 periodic; then the
//!   f64 values with the first axis slowest.
//! * FBANK: `"FBK1"`, u32 count, u32 height, u32 width, u8 complex flag,
//!   f64 spacing, then per filter its rows top to bottom (pairs re, im when
//!   complex).
//! * PGM/PPM: binary `P5`/`P6`, maxval 255.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use num_complex::Complex64;

use crate::filterbank::DiscreteFilter;
use crate::geometry::{Axis, FeatureGrid, GridField, Measure};
use crate::{Error, Result};

use super::{GrayImage, Projection2D, RgbImage};

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(bytes)?;
    Ok(())
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
    format: &'static str,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.bytes.len() - self.pos < n {
            return Err(Error::malformed(self.format, format!("truncated at byte {}", self.pos)));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn finish(&self) -> Result<()> {
        if self.pos != self.bytes.len() {
            return Err(Error::malformed(self.format, format!("{} trailing bytes", self.bytes.len() - self.pos)));
        }
        Ok(())
    }
}

fn netpbm_header(bytes: &[u8], magic: &[u8; 2], format: &'static str) -> Result<(usize, usize, usize)> {
    if bytes.len() < 2 || &bytes[..2] != magic {
        return Err(Error::malformed(format, "bad magic number"));
    }
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for slot in fields.iter_mut() {
        loop {
            match bytes.get(pos) {
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(_) => break,
                None => return Err(Error::malformed(format, "truncated header")),
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        *slot = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::malformed(format, "expected a decimal header field"))?;
    }
    if !bytes.get(pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(Error::malformed(format, "header must end with one whitespace byte"));
    }
    let [w, h, maxval] = fields;
    if maxval != 255 {
        return Err(Error::malformed(format, format!("only maxval 255 is supported (got {maxval})")));
    }
    if w == 0 || h == 0 {
        return Err(Error::malformed(format, "empty image"));
    }
    Ok((w, h, pos + 1))
}

pub fn write_pgm(path: &Path, img: &GrayImage) -> Result<()> {
    let mut bytes = format!("P5\n{} {}\n255\n", img.width, img.height).into_bytes();
    bytes.extend_from_slice(&img.pixels);
    write_file(path, &bytes)
}

pub fn read_pgm(path: &Path) -> Result<GrayImage> {
    let bytes = fs::read(path)?;
    let (width, height, start) = netpbm_header(&bytes, b"P5", "PGM")?;
    if bytes.len() - start != width * height {
        return Err(Error::malformed("PGM", format!("expected {} pixel bytes, found {}", width * height, bytes.len() - start)));
    }
    Ok(GrayImage { width, height, pixels: bytes[start..].to_vec() })
}

pub fn write_ppm(path: &Path, img: &RgbImage) -> Result<()> {
    let mut bytes = format!("P6\n{} {}\n255\n", img.width, img.height).into_bytes();
    bytes.extend_from_slice(&img.pixels);
    write_file(path, &bytes)
}

pub fn read_ppm(path: &Path) -> Result<RgbImage> {
    let bytes = fs::read(path)?;
    let (width, height, start) = netpbm_header(&bytes, b"P6", "PPM")?;
    if bytes.len() - start != 3 * width * height {
        return Err(Error::malformed("PPM", "pixel data has the wrong length"));
    }
    Ok(RgbImage { width, height, pixels: bytes[start..].to_vec() })
}

pub fn write_kgrid(path: &Path, field: &GridField) -> Result<()> {
    let axes = field.grid.axes();
    let mut b = Vec::with_capacity(8 + 32 * axes.len() + 8 * field.values.len());
    b.extend_from_slice(b"KGRD");
    b.push(1);
    b.push(u8::try_from(axes.len()).map_err(|_| Error::invalid("too many axes for KGRID"))?);
    for a in axes {
        let name = a.name.as_bytes();
        b.push(u8::try_from(name.len()).map_err(|_| Error::invalid("axis name longer than 255 bytes"))?);
        b.extend_from_slice(name);
        b.extend_from_slice(&a.min.to_le_bytes());
        b.extend_from_slice(&a.step.to_le_bytes());
        b.extend_from_slice(&u32::try_from(a.count).map_err(|_| Error::invalid("axis too long for KGRID"))?.to_le_bytes());
        b.push(a.periodic as u8);
    }
    for v in &field.values {
        b.extend_from_slice(&v.to_le_bytes());
    }
    write_file(path, &b)
}

/// Reads a KGRID file. The format does not store the measure; the grid
/// comes back with cell-volume weights.
pub fn read_kgrid(path: &Path) -> Result<GridField> {
    let bytes = fs::read(path)?;
    let mut r = Reader { bytes: &bytes, pos: 0, format: "KGRID" };
    if r.take(4)? != b"KGRD" {
        return Err(Error::malformed("KGRID", "bad magic"));
    }
    let version = r.u8()?;
    if version != 1 {
        return Err(Error::malformed("KGRID", format!("unsupported version {version}")));
    }
    let naxes = r.u8()? as usize;
    let mut axes = Vec::with_capacity(naxes);
    for _ in 0..naxes {
        let len = r.u8()? as usize;
        let name = std::str::from_utf8(r.take(len)?)
            .map_err(|_| Error::malformed("KGRID", "axis name is not UTF-8"))?
            .to_string();
        let (min, step, count) = (r.f64()?, r.f64()?, r.u32()? as usize);
        let periodic = match r.u8()? {
            0 => false,
            1 => true,
            b => return Err(Error::malformed("KGRID", format!("periodic flag {b}"))),
        };
        let axis = Axis::new(name, min, step, count).map_err(|e| Error::malformed("KGRID", e.to_string()))?;
        axes.push(axis.periodic(periodic));
    }
    let grid = FeatureGrid::new(axes, Measure::GridCell).map_err(|e| Error::malformed("KGRID", e.to_string()))?;
    let values = (0..grid.len()).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
    r.finish()?;
    GridField::new(grid, values)
}

pub fn write_fbank(path: &Path, filters: &[DiscreteFilter]) -> Result<()> {
    let first = filters.first().ok_or_else(|| Error::invalid("cannot write an empty bank"))?;
    let (h, w, delta) = (first.height(), first.width(), first.delta());
    if filters.iter().any(|f| f.height() != h || f.width() != w || f.delta() != delta) {
        return Err(Error::invalid("FBANK filters must share shape and spacing"));
    }
    let complex = filters.iter().any(|f| !f.is_real());
    let mut b = Vec::new();
    b.extend_from_slice(b"FBK1");
    for n in [filters.len(), h, w] {
        b.extend_from_slice(&u32::try_from(n).map_err(|_| Error::invalid("bank too large"))?.to_le_bytes());
    }
    b.push(complex as u8);
    b.extend_from_slice(&delta.to_le_bytes());
    for f in filters {
        for z in f.values().iter() {
            b.extend_from_slice(&z.re.to_le_bytes());
            if complex {
                b.extend_from_slice(&z.im.to_le_bytes());
            }
        }
    }
    write_file(path, &b)
}

pub fn read_fbank(path: &Path) -> Result<Vec<DiscreteFilter>> {
    let bytes = fs::read(path)?;
    let mut r = Reader { bytes: &bytes, pos: 0, format: "FBANK" };
    if r.take(4)? != b"FBK1" {
        return Err(Error::malformed("FBANK", "bad magic"));
    }
    let (count, h, w) = (r.u32()? as usize, r.u32()? as usize, r.u32()? as usize);
    let complex = match r.u8()? {
        0 => false,
        1 => true,
        b => return Err(Error::malformed("FBANK", format!("complex flag {b}"))),
    };
    let delta = r.f64()?;
    let per = h * w * if complex { 2 } else { 1 } * 8;
    if per.checked_mul(count) != Some(bytes.len() - r.pos) {
        return Err(Error::malformed("FBANK", "payload size does not match the header"));
    }
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let mut vals = Vec::with_capacity(h * w);
        for _ in 0..h * w {
            let re = r.f64()?;
            let im = if complex { r.f64()? } else { 0.0 };
            vals.push(Complex64::new(re, im));
        }
        let arr = Array2::from_shape_vec((h, w), vals).expect("shape checked");
        let f = if complex {
            DiscreteFilter::new(arr, delta)
        } else {
            DiscreteFilter::from_real(arr.mapv(|z| z.re), delta)
        };
        out.push(f.map_err(|e| Error::malformed("FBANK", e.to_string()))?);
    }
    r.finish()?;
    Ok(out)
}

/// Writes real filters as `<stem>_NNN.csv` (one row per line) plus a
/// `<stem>.manifest` holding `delta=<spacing>` and the file names.
pub fn write_csv_bank(dir: &Path, stem: &str, filters: &[DiscreteFilter]) -> Result<PathBuf> {
    let first = filters.first().ok_or_else(|| Error::invalid("cannot write an empty bank"))?;
    if filters.iter().any(|f| !f.is_real() || f.delta() != first.delta()) {
        return Err(Error::Unsupported("CSV banks hold real filters with a common spacing".into()));
    }
    let mut manifest = format!("delta={}\n", first.delta());
    for (k, f) in filters.iter().enumerate() {
        let name = format!("{stem}_{k:03}.csv");
        let mut text = String::new();
        for row in f.real_part().rows() {
            let line: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
            text.push_str(&line.join(","));
            text.push('\n');
        }
        write_file(&dir.join(&name), text.as_bytes())?;
        manifest.push_str(&name);
        manifest.push('\n');
    }
    let path = dir.join(format!("{stem}.manifest"));
    write_file(&path, manifest.as_bytes())?;
    Ok(path)
}

pub fn read_csv_bank(manifest: &Path) -> Result<Vec<DiscreteFilter>> {
    let text = fs::read_to_string(manifest)?;
    let dir = manifest.parent().unwrap_or(Path::new("."));
    let mut delta = None;
    let mut files = Vec::new();
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
        match line.strip_prefix("delta=") {
            Some(v) => {
                delta = Some(v.trim().parse::<f64>().map_err(|_| Error::malformed("CSV bank", format!("bad spacing `{v}`")))?)
            }
            None => files.push(line.to_string()),
        }
    }
    let delta = delta.ok_or_else(|| Error::malformed("CSV bank", "manifest lacks `delta=`"))?;
    files
        .iter()
        .map(|name| {
            let body = fs::read_to_string(dir.join(name))?;
            let rows: Vec<Vec<f64>> = body
                .lines()
                .filter(|l| !l.trim().is_empty())
                .map(|l| {
                    l.split(',')
                        .map(|c| c.trim().parse::<f64>().map_err(|_| Error::malformed("CSV bank", format!("{name}: bad number `{c}`"))))
                        .collect()
                })
                .collect::<Result<_>>()?;
            let w = rows.first().map_or(0, Vec::len);
            if w == 0 || rows.iter().any(|r| r.len() != w) {
                return Err(Error::malformed("CSV bank", format!("{name}: ragged or empty rows")));
            }
            let arr = Array2::from_shape_vec((rows.len(), w), rows.concat()).expect("rectangular");
            DiscreteFilter::from_real(arr, delta).map_err(|e| Error::malformed("CSV bank", e.to_string()))
        })
        .collect()
}

/// One line per node: axis coordinates then the value, with a header row.
pub fn write_projection_csv(path: &Path, p: &Projection2D) -> Result<()> {
    let g = &p.field.grid;
    let mut text: String = g.axes().iter().map(|a| a.name.as_str()).collect::<Vec<_>>().join(",");
    text.push_str(",value\n");
    for (i, v) in p.field.values.iter().enumerate() {
        for c in g.coords(i) {
            text.push_str(&format!("{c},"));
        }
        text.push_str(&format!("{v}\n"));
    }
    write_file(path, text.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::viz_export::project_max;

    #[test]
    fn pgm_and_ppm_round_trip_bit_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let g = GrayImage { width: 3, height: 2, pixels: vec![0, 10, 255, 7, 8, 9] };
        let p = dir.path().join("a.pgm");
        write_pgm(&p, &g).unwrap();
        assert_eq!(fs::read(&p).unwrap()[..11], *b"P5\n3 2\n255\n");
        assert_eq!(read_pgm(&p).unwrap(), g);
        let c = RgbImage { width: 1, height: 2, pixels: vec![1, 2, 3, 4, 5, 6] };
        let q = dir.path().join("a.ppm");
        write_ppm(&q, &c).unwrap();
        assert_eq!(read_ppm(&q).unwrap(), c);
    }

    #[test]
    fn pgm_header_comments_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.pgm");
        fs::write(&p, b"P5 # comment\n2 1\n# another\n255\n\x01\x02").unwrap();
        assert_eq!(read_pgm(&p).unwrap().pixels, vec![1, 2]);
        fs::write(&p, b"P2\n2 1\n255\n1 2").unwrap();
        assert!(matches!(read_pgm(&p), Err(Error::Malformed { .. })));
        fs::write(&p, b"P5\n2 2\n255\n\x01").unwrap();
        assert!(matches!(read_pgm(&p), Err(Error::Malformed { .. })));
        assert!(matches!(read_pgm(&dir.path().join("missing.pgm")), Err(Error::Io(_))));
    }

    #[test]
    fn kgrid_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let g = FeatureGrid::new(
            vec![
                Axis::new("x", -1.0, 0.5, 5).unwrap(),
                Axis::new("theta", 0.0, 0.3, 3).unwrap().periodic(true),
            ],
            Measure::GridCell,
        )
        .unwrap();
        let f = GridField::new(g.clone(), (0..15).map(|i| (i as f64).sin()).collect()).unwrap();
        let p = dir.path().join("f.kgrid");
        write_kgrid(&p, &f).unwrap();
        let bytes = fs::read(&p).unwrap();
        assert_eq!(&bytes[..6], b"KGRD\x01\x02");
        assert_eq!(bytes.len(), 6 + (1 + 1 + 21) + (1 + 5 + 21) + 15 * 8);
        assert_eq!(read_kgrid(&p).unwrap(), f);
        fs::write(&p, &bytes[..bytes.len() - 3]).unwrap();
        assert!(matches!(read_kgrid(&p), Err(Error::Malformed { .. })));
    }

    #[test]
    fn fbank_round_trip_real_and_complex() {
        let dir = tempfile::tempdir().unwrap();
        let real: Vec<DiscreteFilter> = (0..3)
            .map(|k| DiscreteFilter::from_real(Array2::from_shape_fn((2, 3), |(r, c)| (k * 6 + r * 3 + c) as f64), 0.25).unwrap())
            .collect();
        let p = dir.path().join("r.fbank");
        write_fbank(&p, &real).unwrap();
        assert_eq!(fs::metadata(&p).unwrap().len(), 4 + 12 + 1 + 8 + 3 * 6 * 8);
        assert_eq!(read_fbank(&p).unwrap(), real);
        let cplx = vec![DiscreteFilter::new(Array2::from_elem((2, 2), Complex64::new(1.0, -2.0)), 0.5).unwrap()];
        write_fbank(&p, &cplx).unwrap();
        assert_eq!(read_fbank(&p).unwrap(), cplx);
    }

    #[test]
    fn csv_bank_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let bank: Vec<DiscreteFilter> = (0..2)
            .map(|k| DiscreteFilter::from_real(Array2::from_shape_fn((3, 3), |(r, c)| 0.1 * (k + r) as f64 - c as f64 / 7.0), 1.0).unwrap())
            .collect();
        let m = write_csv_bank(dir.path(), "bank", &bank).unwrap();
        assert_eq!(read_csv_bank(&m).unwrap(), bank);
    }

    #[test]
    fn projection_csv_has_a_header_and_a_row_per_node() {
        let dir = tempfile::tempdir().unwrap();
        let g = FeatureGrid::new(
            vec![Axis::new("x", 0.0, 1.0, 2).unwrap(), Axis::new("y", 0.0, 1.0, 2).unwrap(), Axis::new("theta", 0.0, 1.0, 2).unwrap()],
            Measure::Counting,
        )
        .unwrap();
        let f = GridField::new(g, (0..8).map(f64::from).collect()).unwrap();
        let p = dir.path().join("p.csv");
        write_projection_csv(&p, &project_max(&f, "theta").unwrap()).unwrap();
        let text = fs::read_to_string(&p).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "x,y,value");
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[4], "1,1,7");
    }
}
