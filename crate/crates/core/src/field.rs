//! Uniform cell-centered grids and nonnegative density fields.

use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::neumaier_sum;

/// Uniform grid on `[−L, L)^n_dim` with `N` cells per axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    n_dim: usize,
    cells: usize,
    half_width: f64,
}

impl Grid {
    pub fn new(n_dim: usize, cells: usize, half_width: f64) -> Result<Self> {
        if !(n_dim == 1 || n_dim == 2) {
            return Err(Error::Domain(format!("grid dimension must be 1 or 2, got {n_dim}")));
        }
        if cells < 8 || cells % 2 != 0 {
            return Err(Error::Domain(format!("N must be even and >= 8, got {cells}")));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::Domain(format!("L must be positive, got {half_width}")));
        }
        Ok(Self { n_dim, cells, half_width })
    }

    pub fn square(cells: usize, half_width: f64) -> Result<Self> {
        Self::new(2, cells, half_width)
    }

    pub fn n_dim(&self) -> usize {
        self.n_dim
    }

    pub fn cells_per_axis(&self) -> usize {
        self.cells
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.cells as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.n_dim as i32)
    }

    /// Total number of cells, `N^n_dim`.
    pub fn len(&self) -> usize {
        self.cells.pow(self.n_dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Coordinate of the center of cell `i` along an axis. Written as an
    /// offset from the middle so that the centers are exactly antisymmetric.
    pub fn center(&self, i: usize) -> f64 {
        (i as f64 + 0.5 - self.cells as f64 / 2.0) * self.spacing()
    }

    /// Cell center of flat index `idx` (row-major, first axis slowest).
    pub fn position(&self, idx: usize) -> [f64; 2] {
        match self.n_dim {
            1 => [self.center(idx), 0.0],
            _ => [self.center(idx / self.cells), self.center(idx % self.cells)],
        }
    }

    /// Euclidean distance of cell `idx` from the origin.
    pub fn radius(&self, idx: usize) -> f64 {
        let [x, y] = self.position(idx);
        x.hypot(y)
    }
}

/// Nonnegative cell averages on a [`Grid`], stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityField {
    grid: Grid,
    values: Vec<f64>,
}

impl DensityField {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Data(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::Data(format!("value {v} at cell {i} is not a finite nonnegative number")));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self { grid, values: vec![0.0; grid.len()] }
    }

    pub fn constant(grid: Grid, c: f64) -> Result<Self> {
        Self::new(grid, vec![c; grid.len()])
    }

    /// Samples `f` at the cell centers.
    pub fn from_fn(grid: Grid, f: impl Fn([f64; 2]) -> f64) -> Result<Self> {
        let values = (0..grid.len()).map(|i| f(grid.position(i))).collect();
        Self::new(grid, values)
    }

    /// Builds a field without the nonnegativity check; callers guarantee it.
    pub(crate) fn from_raw(grid: Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn mass(&self) -> f64 {
        neumaier_sum(self.values.iter().copied()) * self.grid.cell_volume()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Discrete `L^p` norm; `p = f64::INFINITY` gives the maximum.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        lp_norm_of(&self.values, self.grid.cell_volume(), p)
    }

    /// Total mass in the outer band of `N/16` cells along every face.
    pub fn boundary_mass(&self) -> f64 {
        let n = self.grid.cells;
        let band = (n / 16).max(1);
        let outer = |i: usize| i < band || i >= n - band;
        let sum = match self.grid.n_dim {
            1 => neumaier_sum((0..n).filter(|&i| outer(i)).map(|i| self.values[i])),
            _ => neumaier_sum((0..n).flat_map(|i| {
                let row = &self.values[i * n..(i + 1) * n];
                let cols: Box<dyn Iterator<Item = &f64>> = if outer(i) {
                    Box::new(row.iter())
                } else {
                    Box::new(row[..band].iter().chain(&row[n - band..]))
                };
                cols.copied()
            })),
        };
        sum * self.grid.cell_volume()
    }

    /// Translates by whole cells, filling vacated cells with zero. Mass that
    /// would leave the box is an error.
    pub fn shifted(&self, shift: [isize; 2]) -> Result<Self> {
        let n = self.grid.cells as isize;
        let mut out = vec![0.0; self.values.len()];
        for (idx, &v) in self.values.iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            let (i, j) = match self.grid.n_dim {
                1 => (idx as isize, 0),
                _ => ((idx / self.grid.cells) as isize, (idx % self.grid.cells) as isize),
            };
            let (si, sj) = (i + shift[0], j + if self.grid.n_dim == 1 { 0 } else { shift[1] });
            if si < 0 || si >= n || sj < 0 || sj >= n {
                return Err(Error::Domain("shift moves mass outside the box".into()));
            }
            let target = if self.grid.n_dim == 1 { si } else { si * n + sj };
            out[target as usize] = v;
        }
        Ok(Self::from_raw(self.grid, out))
    }

    /// CSV snapshot: header line `N,L,n_dim`, then one row per first-axis
    /// index holding 17-significant-digit values.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "N,L,n_dim")?;
        writeln!(w, "{},{:.16e},{}", self.grid.cells, self.grid.half_width, self.grid.n_dim)?;
        let row = if self.grid.n_dim == 1 { self.values.len() } else { self.grid.cells };
        for chunk in self.values.chunks(row) {
            let line: Vec<String> = chunk.iter().map(|v| format!("{v:.16e}")).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let mut next = || -> Result<String> {
            lines.next().ok_or_else(|| Error::Data("truncated snapshot".into()))?.map_err(Error::from)
        };
        if next()?.trim() != "N,L,n_dim" {
            return Err(Error::Data("missing snapshot header".into()));
        }
        let header = next()?;
        let fields: Vec<&str> = header.trim().split(',').collect();
        if fields.len() != 3 {
            return Err(Error::Data(format!("bad header line `{header}`")));
        }
        let parse_err = |s: &str| Error::Data(format!("cannot parse `{s}`"));
        let cells: usize = fields[0].parse().map_err(|_| parse_err(fields[0]))?;
        let half_width: f64 = fields[1].parse().map_err(|_| parse_err(fields[1]))?;
        let n_dim: usize = fields[2].parse().map_err(|_| parse_err(fields[2]))?;
        let grid = Grid::new(n_dim, cells, half_width)?;
        let mut values = Vec::with_capacity(grid.len());
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            for tok in line.trim().split(',') {
                values.push(tok.parse::<f64>().map_err(|_| parse_err(tok))?);
            }
        }
        Self::new(grid, values)
    }

    /// Little-endian binary snapshot: magic `AGDF`, `u32` N, `f64` L,
    /// `u32` n_dim, then the values.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(20 + 8 * self.values.len());
        out.extend_from_slice(b"AGDF");
        out.extend_from_slice(&(self.grid.cells as u32).to_le_bytes());
        out.extend_from_slice(&self.grid.half_width.to_le_bytes());
        out.extend_from_slice(&(self.grid.n_dim as u32).to_le_bytes());
        for v in &self.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 20 || &bytes[..4] != b"AGDF" {
            return Err(Error::Data("not a density snapshot".into()));
        }
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap()) as usize;
        let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
        let grid = Grid::new(u32_at(16), u32_at(4), f64_at(8))?;
        if bytes.len() != 20 + 8 * grid.len() {
            return Err(Error::Data("snapshot length does not match its header".into()));
        }
        let values = (0..grid.len()).map(|i| f64_at(20 + 8 * i)).collect();
        Self::new(grid, values)
    }
}

/// `(Σ v^p · w)^{1/p}` with the maximum factored out so large `p` cannot
/// overflow.
pub fn lp_norm_of(values: &[f64], cell_volume: f64, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::Domain(format!("L^p norm needs p >= 1, got {p}")));
    }
    let vmax = values.iter().copied().fold(0.0, f64::max);
    if p.is_infinite() || vmax == 0.0 {
        return Ok(vmax);
    }
    if p == 1.0 {
        return Ok(neumaier_sum(values.iter().copied()) * cell_volume);
    }
    let s = neumaier_sum(values.iter().map(|&v| (v / vmax).powf(p)));
    Ok(vmax * (s * cell_volume).powf(1.0 / p))
}

/// Shapes for the initial density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProfileKind {
    Gaussian { sigma: f64 },
    /// `exp(−1/(1 − r²/R²))` inside radius `R`.
    Bump { radius: f64 },
    /// Two bumps at `±separation/2` on the first axis.
    TwoBumps { radius: f64, separation: f64 },
    /// Annulus `exp(−(r − R)²/(2w²))`.
    Ring { radius: f64, width: f64 },
    /// Independent uniform values on the disk of the given radius.
    UniformRandom { radius: f64, seed: u64 },
}

/// An initial density together with its boundary-proximity flag.
#[derive(Debug, Clone)]
pub struct InitialProfile {
    pub field: DensityField,
    /// Set when the nominal support reaches beyond `L/2`.
    pub near_boundary: bool,
}

fn bump(r: f64, radius: f64) -> f64 {
    let q = r / radius;
    if q < 1.0 {
        (-1.0 / (1.0 - q * q)).exp()
    } else {
        0.0
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be positive, got {v}")))
    }
}

/// Discretizes `kind` and rescales it to `target_mass`.
pub fn init_profile(kind: &ProfileKind, grid: Grid, target_mass: f64) -> Result<InitialProfile> {
    positive("target mass", target_mass)?;
    let (values, support): (Vec<f64>, f64) = match *kind {
        ProfileKind::Gaussian { sigma } => {
            positive("sigma", sigma)?;
            let v = (0..grid.len())
                .map(|i| (-grid.radius(i).powi(2) / (2.0 * sigma * sigma)).exp())
                .collect();
            (v, 4.0 * sigma)
        }
        ProfileKind::Bump { radius } => {
            positive("radius", radius)?;
            ((0..grid.len()).map(|i| bump(grid.radius(i), radius)).collect(), radius)
        }
        ProfileKind::TwoBumps { radius, separation } => {
            positive("radius", radius)?;
            positive("separation", separation)?;
            let c = separation / 2.0;
            let v = (0..grid.len())
                .map(|i| {
                    let [x, y] = grid.position(i);
                    bump((x - c).hypot(y), radius) + bump((x + c).hypot(y), radius)
                })
                .collect();
            (v, c + radius)
        }
        ProfileKind::Ring { radius, width } => {
            positive("radius", radius)?;
            positive("width", width)?;
            let v = (0..grid.len())
                .map(|i| (-(grid.radius(i) - radius).powi(2) / (2.0 * width * width)).exp())
                .collect();
            (v, radius + 4.0 * width)
        }
        ProfileKind::UniformRandom { radius, seed } => {
            positive("radius", radius)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let v = (0..grid.len())
                .map(|i| {
                    let u: f64 = rng.gen();
                    if grid.radius(i) < radius {
                        u
                    } else {
                        0.0
                    }
                })
                .collect();
            (v, radius)
        }
    };
    let raw = neumaier_sum(values.iter().copied()) * grid.cell_volume();
    if !(raw > 0.0) {
        return Err(Error::Domain("profile has no mass on this grid".into()));
    }
    let scale = target_mass / raw;
    let field = DensityField::new(grid, values.into_iter().map(|v| v * scale).collect())?;
    Ok(InitialProfile { field, near_boundary: support > 0.5 * grid.half_width() })
}
