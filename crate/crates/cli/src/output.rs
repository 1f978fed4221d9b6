//! CSV writers. Floats are written with 17 significant digits.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use qwgauge::lattice::{Dimension, WalkerState};
use qwgauge::observables::ContinuityReport;

use crate::error::{io_err, CliError};

pub fn f(v: f64) -> String {
    format!("{v:.16e}")
}

pub struct Csv {
    out: BufWriter<File>,
    path: std::path::PathBuf,
}

impl Csv {
    pub fn create(path: &Path, header: &[&str]) -> Result<Self, CliError> {
        let file = File::create(path).map_err(io_err(path))?;
        let mut csv = Csv {
            out: BufWriter::new(file),
            path: path.to_path_buf(),
        };
        csv.raw(&header.join(","))?;
        Ok(csv)
    }

    fn raw(&mut self, line: &str) -> Result<(), CliError> {
        writeln!(self.out, "{line}").map_err(io_err(&self.path))
    }

    pub fn row(&mut self, values: &[f64]) -> Result<(), CliError> {
        let line: Vec<String> = values.iter().map(|&v| f(v)).collect();
        self.raw(&line.join(","))
    }

    pub fn finish(mut self) -> Result<(), CliError> {
        self.out.flush().map_err(io_err(&self.path))
    }
}

pub fn write_snapshot(path: &Path, state: &WalkerState) -> Result<(), CliError> {
    let g = state.geom();
    let two_d = g.dim() == Dimension::Two;
    let header: &[&str] = if two_d {
        &["x", "y", "re_R", "im_R", "re_L", "im_L"]
    } else {
        &["x", "re_R", "im_R", "re_L", "im_L"]
    };
    let mut csv = Csv::create(path, header)?;
    for s in 0..g.sites() {
        let (ix, iy) = g.coords(s);
        let (x, y) = g.position(ix, iy);
        let [r, l] = state.spinor(s);
        if two_d {
            csv.row(&[x, y, r.re, r.im, l.re, l.im])?;
        } else {
            csv.row(&[x, r.re, r.im, l.re, l.im])?;
        }
    }
    csv.finish()
}

pub fn observables_header(dim: Dimension) -> &'static [&'static str] {
    match dim {
        Dimension::One => &["t", "x", "J0", "Jx", "residual"],
        Dimension::Two => &["t", "x", "y", "J0", "Jx", "Jy", "residual"],
    }
}

pub fn write_observables(csv: &mut Csv, state: &WalkerState, rep: &ContinuityReport) -> Result<(), CliError> {
    let g = state.geom();
    for s in 0..g.sites() {
        let (ix, iy) = g.coords(s);
        let (x, y) = g.position(ix, iy);
        match g.dim() {
            Dimension::One => csv.row(&[rep.t, x, rep.j0[s], rep.jx[s], rep.residual[s]])?,
            Dimension::Two => {
                csv.row(&[rep.t, x, y, rep.j0[s], rep.jx[s], rep.jy[s], rep.residual[s]])?
            }
        }
    }
    Ok(())
}
