//! On-disk formats for volumes and sinograms.
//!
//! A file starts with one ASCII header line, space padded so that header plus
//! newline fill a multiple of 64 bytes, followed by little-endian `f64`
//! samples in the in-memory order of [`Volume`] (x fastest) or the sinogram
//! (`t` fastest for planes, `v` then `u` for lines).
//!
//! ```text
//! SIMRAD-VOL v1 N=<int> h=<float> origin=<f,f,f> dtype=f64
//! SIMRAD-SGM v1 kind=plane ntheta=<int> nphi=<int> nt=<int> tmax=<float> dtype=f64
//! SIMRAD-SGM v1 kind=line ntheta=<int> nphi=<int> nu=<int> uvmax=<float> dtype=f64
//! ```

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::Volume;
use crate::group::Vec3;
use crate::xform::{LineGeometry, LineSinogram, PlaneGeometry, PlaneSinogram, Sinogram};

const BLOCK: usize = 64;
const VOLUME_MAGIC: &str = "SIMRAD-VOL";
const SINOGRAM_MAGIC: &str = "SIMRAD-SGM";
const VERSION: &str = "v1";

fn write_header<W: Write>(w: &mut W, text: &str) -> Result<()> {
    let len = (text.len() + 1).div_ceil(BLOCK) * BLOCK;
    let mut line = text.as_bytes().to_vec();
    line.resize(len - 1, b' ');
    line.push(b'\n');
    w.write_all(&line)?;
    Ok(())
}

fn read_header<R: Read>(r: &mut R) -> Result<String> {
    let mut bytes = Vec::new();
    loop {
        let mut block = [0u8; BLOCK];
        r.read_exact(&mut block).map_err(|_| Error::Format("truncated header".into()))?;
        bytes.extend_from_slice(&block);
        if block[BLOCK - 1] == b'\n' {
            break;
        }
        if bytes.len() > 16 * BLOCK {
            return Err(Error::Format("header line not terminated".into()));
        }
    }
    String::from_utf8(bytes).map(|s| s.trim_end().to_string()).map_err(|_| Error::Format("header is not ASCII".into()))
}

struct Header {
    magic: String,
    fields: HashMap<String, String>,
}

impl Header {
    fn parse(text: &str) -> Result<Self> {
        let mut tokens = text.split_whitespace();
        let magic = tokens.next().unwrap_or_default().to_string();
        let version = tokens.next().unwrap_or_default();
        if version != VERSION {
            return Err(Error::Format(format!("unsupported version `{version}`")));
        }
        let mut fields = HashMap::new();
        for tok in tokens {
            let (k, v) = tok.split_once('=').ok_or_else(|| Error::Format(format!("malformed field `{tok}`")))?;
            fields.insert(k.to_string(), v.to_string());
        }
        if fields.get("dtype").map(String::as_str) != Some("f64") {
            return Err(Error::Format("dtype must be f64".into()));
        }
        Ok(Self { magic, fields })
    }

    fn get<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        let raw = self.fields.get(key).ok_or_else(|| Error::Format(format!("missing field `{key}`")))?;
        raw.parse().map_err(|_| Error::Format(format!("bad value `{raw}` for `{key}`")))
    }
}

fn write_samples<W: Write>(w: &mut W, data: &[f64]) -> Result<()> {
    for v in data {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

fn read_samples<R: Read>(r: &mut R, count: usize) -> Result<Vec<f64>> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() != count * 8 {
        return Err(Error::Format(format!("expected {} data bytes, found {}", count * 8, bytes.len())));
    }
    Ok(bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk"))).collect())
}

pub fn write_volume<W: Write>(w: &mut W, v: &Volume) -> Result<()> {
    let o = v.origin();
    let header =
        format!("{VOLUME_MAGIC} {VERSION} N={} h={} origin={},{},{} dtype=f64", v.n(), v.h(), o.x, o.y, o.z);
    write_header(w, &header)?;
    write_samples(w, v.data())
}

pub fn read_volume<R: Read>(r: &mut R) -> Result<Volume> {
    let header = Header::parse(&read_header(r)?)?;
    if header.magic != VOLUME_MAGIC {
        return Err(Error::Format(format!("not a volume file (magic `{}`)", header.magic)));
    }
    let n: usize = header.get("N")?;
    let h: f64 = header.get("h")?;
    let origin: String = header.get("origin")?;
    let parts: Vec<f64> = origin
        .split(',')
        .map(|p| p.parse().map_err(|_| Error::Format(format!("bad origin `{origin}`"))))
        .collect::<Result<_>>()?;
    if parts.len() != 3 {
        return Err(Error::Format(format!("origin needs three components, got `{origin}`")));
    }
    let data = read_samples(r, n.pow(3))?;
    Volume::from_data(n, h, Vec3::new(parts[0], parts[1], parts[2]), data)
}

pub fn write_sinogram<W: Write>(w: &mut W, s: &Sinogram) -> Result<()> {
    let header = match s {
        Sinogram::Plane(p) => {
            let g = p.geom;
            format!(
                "{SINOGRAM_MAGIC} {VERSION} kind=plane ntheta={} nphi={} nt={} tmax={} dtype=f64",
                g.n_theta, g.n_phi, g.n_t, g.t_max
            )
        }
        Sinogram::Line(l) => {
            let g = l.geom;
            format!(
                "{SINOGRAM_MAGIC} {VERSION} kind=line ntheta={} nphi={} nu={} uvmax={} dtype=f64",
                g.n_theta, g.n_phi, g.n_u, g.uv_max
            )
        }
    };
    write_header(w, &header)?;
    write_samples(w, s.data())
}

pub fn read_sinogram<R: Read>(r: &mut R) -> Result<Sinogram> {
    let header = Header::parse(&read_header(r)?)?;
    if header.magic != SINOGRAM_MAGIC {
        return Err(Error::Format(format!("not a sinogram file (magic `{}`)", header.magic)));
    }
    let kind: String = header.get("kind")?;
    match kind.as_str() {
        "plane" => {
            let g = PlaneGeometry::new(header.get("ntheta")?, header.get("nphi")?, header.get("nt")?, header.get("tmax")?)?;
            let data = read_samples(r, g.len())?;
            Ok(Sinogram::Plane(PlaneSinogram::from_data(g, data)?))
        }
        "line" => {
            let g = LineGeometry::new(header.get("ntheta")?, header.get("nphi")?, header.get("nu")?, header.get("uvmax")?)?;
            let data = read_samples(r, g.len())?;
            Ok(Sinogram::Line(LineSinogram::from_data(g, data)?))
        }
        other => Err(Error::Format(format!("unknown sinogram kind `{other}`"))),
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    match File::open(path) {
        Ok(f) => Ok(BufReader::new(f)),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Err(Error::FileNotFound(path.to_path_buf())),
        Err(e) => Err(e.into()),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

pub fn load_volume(path: impl AsRef<Path>) -> Result<Volume> {
    read_volume(&mut open(path.as_ref())?)
}

pub fn save_volume(path: impl AsRef<Path>, v: &Volume) -> Result<()> {
    let mut w = create(path.as_ref())?;
    write_volume(&mut w, v)?;
    w.flush()?;
    Ok(())
}

pub fn load_sinogram(path: impl AsRef<Path>) -> Result<Sinogram> {
    read_sinogram(&mut open(path.as_ref())?)
}

pub fn save_sinogram(path: impl AsRef<Path>, s: &Sinogram) -> Result<()> {
    let mut w = create(path.as_ref())?;
    write_sinogram(&mut w, s)?;
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Phantom;

    #[test]
    fn header_fills_whole_blocks() {
        let mut buf = Vec::new();
        write_header(&mut buf, "SIMRAD-VOL v1 N=2 h=1 origin=0,0,0 dtype=f64").unwrap();
        assert_eq!(buf.len(), 64);
        assert_eq!(*buf.last().unwrap(), b'\n');
        let long = "x".repeat(80);
        let mut buf = Vec::new();
        write_header(&mut buf, &long).unwrap();
        assert_eq!(buf.len(), 128);
    }

    #[test]
    fn volume_round_trip() {
        let v = Phantom::two_gaussians().sample(8, 1.2).unwrap();
        let mut buf = Vec::new();
        write_volume(&mut buf, &v).unwrap();
        assert_eq!(buf.len(), 64 + 8 * 512);
        let back = read_volume(&mut buf.as_slice()).unwrap();
        assert_eq!(back, v);
    }

    #[test]
    fn sinogram_round_trip_both_kinds() {
        let p = PlaneSinogram::from_fn(PlaneGeometry::new(3, 2, 5, 2.0).unwrap(), |n, t| n.x + t);
        let l = LineSinogram::from_fn(LineGeometry::new(2, 3, 4, 1.5).unwrap(), |n, q| n.z * q.x);
        for s in [Sinogram::Plane(p), Sinogram::Line(l)] {
            let mut buf = Vec::new();
            write_sinogram(&mut buf, &s).unwrap();
            assert_eq!(read_sinogram(&mut buf.as_slice()).unwrap(), s);
        }
    }

    #[test]
    fn rejects_wrong_magic_and_short_data() {
        let v = Volume::zeros(8, 1.0).unwrap();
        let mut buf = Vec::new();
        write_volume(&mut buf, &v).unwrap();
        assert!(matches!(read_sinogram(&mut buf.as_slice()), Err(Error::Format(_))));
        buf.pop();
        assert!(matches!(read_volume(&mut buf.as_slice()), Err(Error::Format(_))));
    }

    #[test]
    fn missing_file_is_reported_by_name() {
        let err = load_volume("/nonexistent/dir/vol.svol").unwrap_err();
        assert_eq!(err.name(), "FileNotFound");
    }
}
