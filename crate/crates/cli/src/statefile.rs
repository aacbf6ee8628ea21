//! Versioned state container: text header, little-endian IEEE-754 payload.
//!
//! Layout:
//!   magic line        "FBMHD1\n"
//!   header lines      n_r, n_theta, mode cutoff M, collar_delta, epsilon
//!                     (decimal text, one value per line)
//!   binary payload    eta coefficients for modes -M..=M as interleaved
//!                     re/im doubles (2·(2M+1) values), then v and B as
//!                     interleaved (vx, vy) per node, node index i·n_theta+j
//!                     (2·n_r·n_theta values each)
//!
//! Round-trips are bit-exact: floats in the header are written with the
//! shortest representation that parses back to the same bits.

use fbmhd::field::VectorField;
use fbmhd::surface::{build_surface, DomainChart, SurfaceGraph};
use fbmhd::{BoundarySeries, Complex64};
use std::io::{Read, Write};
use std::sync::Arc;

pub const MAGIC: &str = "FBMHD1";

#[derive(Debug)]
pub struct StateFile {
    pub n_r: usize,
    pub n_theta: usize,
    pub cutoff: usize,
    pub collar_delta: f64,
    pub epsilon: f64,
    pub eta: Vec<(f64, f64)>,
    pub v: Vec<f64>,
    pub b: Vec<f64>,
}

#[derive(Debug)]
pub enum LoadError {
    Io(std::io::Error),
    Format(String),
}

impl std::fmt::Display for LoadError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LoadError::Io(e) => write!(f, "i/o error: {e}"),
            LoadError::Format(m) => write!(f, "format error: {m}"),
        }
    }
}

impl From<std::io::Error> for LoadError {
    fn from(e: std::io::Error) -> Self {
        LoadError::Io(e)
    }
}

impl StateFile {
    pub fn from_parts(
        surface: &SurfaceGraph,
        v: &VectorField,
        b: &VectorField,
        epsilon: f64,
    ) -> StateFile {
        let chart = &v.chart;
        let cutoff = surface.eta.cutoff();
        let eta: Vec<(f64, f64)> = surface.eta.coeffs().iter().map(|c| (c.re, c.im)).collect();
        let pack = |f: &VectorField| -> Vec<f64> {
            let mut out = Vec::with_capacity(2 * f.vx.len());
            for i in 0..f.vx.len() {
                out.push(f.vx[i]);
                out.push(f.vy[i]);
            }
            out
        };
        StateFile {
            n_r: chart.n_r,
            n_theta: chart.n_theta,
            cutoff,
            collar_delta: surface.collar_delta,
            epsilon,
            eta,
            v: pack(v),
            b: pack(b),
        }
    }

    pub fn write_to(&self, w: &mut impl Write) -> std::io::Result<()> {
        writeln!(w, "{MAGIC}")?;
        writeln!(w, "{}", self.n_r)?;
        writeln!(w, "{}", self.n_theta)?;
        writeln!(w, "{}", self.cutoff)?;
        writeln!(w, "{}", self.collar_delta)?;
        writeln!(w, "{}", self.epsilon)?;
        let mut payload: Vec<f64> =
            Vec::with_capacity(2 * self.eta.len() + self.v.len() + self.b.len());
        for &(re, im) in &self.eta {
            payload.push(re);
            payload.push(im);
        }
        payload.extend_from_slice(&self.v);
        payload.extend_from_slice(&self.b);
        for value in payload {
            w.write_all(&value.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn save(&self, path: &std::path::Path) -> std::io::Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_to(&mut f)
    }

    pub fn read_from(r: &mut impl Read) -> Result<StateFile, LoadError> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        // header: 6 text lines
        let mut pos = 0usize;
        let mut lines: Vec<String> = Vec::new();
        for _ in 0..6 {
            let nl = bytes[pos..]
                .iter()
                .position(|&c| c == b'\n')
                .ok_or_else(|| LoadError::Format("truncated header".into()))?;
            let line = std::str::from_utf8(&bytes[pos..pos + nl])
                .map_err(|_| LoadError::Format("non-utf8 header".into()))?;
            lines.push(line.trim_end_matches('\r').to_string());
            pos += nl + 1;
        }
        if lines[0] != MAGIC {
            return Err(LoadError::Format(format!("bad magic '{}'", lines[0])));
        }
        let n_r: usize = lines[1].parse().map_err(|_| LoadError::Format("bad n_r".into()))?;
        let n_theta: usize =
            lines[2].parse().map_err(|_| LoadError::Format("bad n_theta".into()))?;
        let cutoff: usize = lines[3].parse().map_err(|_| LoadError::Format("bad cutoff".into()))?;
        let collar_delta: f64 =
            lines[4].parse().map_err(|_| LoadError::Format("bad collar_delta".into()))?;
        let epsilon: f64 =
            lines[5].parse().map_err(|_| LoadError::Format("bad epsilon".into()))?;

        let n_eta = 2 * cutoff + 1;
        let n_field = 2 * n_r * n_theta;
        let expected = 2 * n_eta + 2 * n_field;
        let payload = &bytes[pos..];
        if payload.len() != expected * 8 {
            return Err(LoadError::Format(format!(
                "payload length {} != expected {} doubles",
                payload.len() / 8,
                expected
            )));
        }
        let mut doubles = Vec::with_capacity(expected);
        for chunk in payload.chunks_exact(8) {
            doubles.push(f64::from_le_bytes(chunk.try_into().unwrap()));
        }
        let eta: Vec<(f64, f64)> =
            (0..n_eta).map(|m| (doubles[2 * m], doubles[2 * m + 1])).collect();
        let v = doubles[2 * n_eta..2 * n_eta + n_field].to_vec();
        let b = doubles[2 * n_eta + n_field..].to_vec();
        Ok(StateFile { n_r, n_theta, cutoff, collar_delta, epsilon, eta, v, b })
    }

    pub fn load(path: &std::path::Path) -> Result<StateFile, LoadError> {
        let mut f = std::io::BufReader::new(std::fs::File::open(path)?);
        Self::read_from(&mut f)
    }

    /// Reconstruct the in-memory types (surface + fields on its chart).
    pub fn unpack(&self) -> Result<(SurfaceGraph, VectorField, VectorField), LoadError> {
        let coeffs: Vec<Complex64> =
            self.eta.iter().map(|&(re, im)| Complex64::new(re, im)).collect();
        let eta = BoundarySeries::from_coeffs(coeffs);
        let surface = build_surface(eta, self.collar_delta)
            .map_err(|e| LoadError::Format(format!("invalid surface: {e}")))?;
        let chart = Arc::new(DomainChart::build(surface.clone(), self.n_r, self.n_theta));
        let unpack_field = |data: &[f64]| -> VectorField {
            let n = self.n_r * self.n_theta;
            let mut vx = vec![0.0; n];
            let mut vy = vec![0.0; n];
            for i in 0..n {
                vx[i] = data[2 * i];
                vy[i] = data[2 * i + 1];
            }
            VectorField { chart: chart.clone(), vx, vy, boundary: None, div_residual: None }
        };
        Ok((surface, unpack_field(&self.v), unpack_field(&self.b)))
    }
}
