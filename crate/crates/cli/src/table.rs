//! Potentials given as a CSV table `t,x,y,A0,A1,A2`.
//!
//! Lookups are exact on the sample points, up to rounding at 1e-9. A table holding a
//! single time value is treated as static.

use std::collections::HashMap;
use std::path::Path;
use std::sync::Arc;

use qwgauge::field::{ScalarFn, SharedFn};

use crate::error::{io_err, CliError};

const KEY_SCALE: f64 = 1e9;

fn key(v: f64) -> i64 {
    (v * KEY_SCALE).round() as i64
}

#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedPotential {
    values: HashMap<(i64, i64, i64), [f64; 3]>,
    static_time: Option<i64>,
}

impl TabulatedPotential {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        Self::parse(&text).map_err(|e| CliError::Validation(format!("potential.table {}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or("empty table")?;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        if cols != ["t", "x", "y", "A0", "A1", "A2"] {
            return Err(format!("header must be t,x,y,A0,A1,A2, got `{header}`"));
        }
        let mut values = HashMap::new();
        let mut times = std::collections::BTreeSet::new();
        for (no, line) in lines {
            let row: Vec<f64> = line
                .split(',')
                .map(|c| c.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|e| format!("line {}: {e}", no + 1))?;
            if row.len() != 6 {
                return Err(format!("line {}: expected 6 columns, got {}", no + 1, row.len()));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(format!("line {}: non-finite value", no + 1));
            }
            let k = (key(row[0]), key(row[1]), key(row[2]));
            times.insert(k.0);
            if values.insert(k, [row[3], row[4], row[5]]).is_some() {
                return Err(format!("line {}: duplicate sample point", no + 1));
            }
        }
        if values.is_empty() {
            return Err("table has no rows".into());
        }
        let static_time = if times.len() == 1 { times.into_iter().next() } else { None };
        Ok(TabulatedPotential { values, static_time })
    }

    pub fn lookup(&self, t: f64, x: f64, y: f64) -> Result<[f64; 3], String> {
        let kt = self.static_time.unwrap_or_else(|| key(t));
        self.values
            .get(&(kt, key(x), key(y)))
            .copied()
            .ok_or_else(|| format!("no table entry for (t, x, y) = ({t}, {x}, {y})"))
    }

    /// Component `0..3` as a scalar function.
    pub fn component(self: &Arc<Self>, index: usize) -> SharedFn {
        Arc::new(Component {
            table: Arc::clone(self),
            index,
        })
    }
}

struct Component {
    table: Arc<TabulatedPotential>,
    index: usize,
}

impl ScalarFn for Component {
    fn value(&self, t: f64, x: f64, y: f64) -> Result<f64, String> {
        self.table.lookup(t, x, y).map(|v| v[self.index])
    }
}
