//! CSV persistence for fields and trajectories.
//!
//! A field file has header `x1,..,xn,re_1,im_1,..,re_m,im_m` and one row per grid
//! point in row-major order (first axis slowest). Floats use `{:.16e}`, so writing
//! the same field twice yields identical bytes.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::semigroup::Trajectory;

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_field<W: Write>(f: &Field, out: W) -> Result<()> {
    let g = f.grid();
    let m = f.components();
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = (1..=g.dim()).map(|a| format!("x{a}")).collect();
    for c in 1..=m {
        header.push(format!("re_{c}"));
        header.push(format!("im_{c}"));
    }
    w.write_record(&header)?;
    let mut record = Vec::with_capacity(header.len());
    for p in 0..g.len() {
        record.clear();
        record.extend(g.point(p).into_iter().map(num));
        for v in f.at(p) {
            record.push(num(v.re));
            record.push(num(v.im));
        }
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_field(f: &Field, path: &Path) -> Result<()> {
    write_field(f, fs::File::create(path)?)
}

/// Reads a field and reconstructs its grid from the coordinate columns.
pub fn read_field<R: Read>(input: R) -> Result<Field> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    let dim = header.iter().take_while(|h| h.starts_with('x')).count();
    let rest = header.len() - dim;
    if dim == 0 || rest == 0 || rest % 2 != 0 {
        return Err(Error::Parse(format!("malformed field header {:?}", header.iter().collect::<Vec<_>>())));
    }
    for (a, h) in header.iter().take(dim).enumerate() {
        if h != format!("x{}", a + 1) {
            return Err(Error::Parse(format!("expected column x{}, found {h:?}", a + 1)));
        }
    }
    let m = rest / 2;
    let parse = |s: &str| s.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad number {s:?}")));
    let mut coords = Vec::new();
    let mut values = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        if rec.len() != header.len() {
            return Err(Error::Parse(format!("row has {} fields, expected {}", rec.len(), header.len())));
        }
        let row = rec.iter().map(parse).collect::<Result<Vec<f64>>>()?;
        coords.push(row[..dim].to_vec());
        values.extend(row[dim..].chunks(2).map(|c| Complex64::new(c[0], c[1])));
    }
    let rows = coords.len();
    let points = (rows as f64).powf(1.0 / dim as f64).round() as usize;
    if points.checked_pow(dim as u32) != Some(rows) || rows == 0 {
        return Err(Error::Parse(format!("{rows} rows do not form a {dim}-dimensional square grid")));
    }
    let grid = Grid::new(dim, -coords[0][0], points)?;
    let tol = 1e-9 * grid.half_extent();
    for (p, x) in coords.iter().enumerate() {
        if grid.point(p).iter().zip(x).any(|(a, b)| (a - b).abs() > tol) {
            return Err(Error::Parse(format!("row {} has coordinates {x:?} off the symmetric grid", p + 1)));
        }
    }
    Field::from_values(grid, m, values)
}

pub fn load_field(path: &Path) -> Result<Field> {
    read_field(fs::File::open(path)?)
}

/// Writes `index.csv` (`t,file`) and one `state_XXXX.csv` per time. Returns the index path.
pub fn save_trajectory(traj: &Trajectory, dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let index = dir.join("index.csv");
    let mut w = csv::Writer::from_path(&index)?;
    w.write_record(["t", "file"])?;
    for (i, (t, state)) in traj.times().iter().zip(traj.states()).enumerate() {
        let name = format!("state_{i:04}.csv");
        save_field(state, &dir.join(&name))?;
        w.write_record([num(*t), name])?;
    }
    w.flush()?;
    Ok(index)
}

pub fn load_trajectory(dir: &Path) -> Result<Trajectory> {
    let mut r = csv::Reader::from_path(dir.join("index.csv"))?;
    let mut times = Vec::new();
    let mut states = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let t = rec.get(0).unwrap_or("").parse::<f64>().map_err(|_| Error::Parse(format!("bad time in {rec:?}")))?;
        let file = rec.get(1).ok_or_else(|| Error::Parse("index row without file".into()))?;
        times.push(t);
        states.push(load_field(&dir.join(file))?);
    }
    Trajectory::new(times, states)
}
