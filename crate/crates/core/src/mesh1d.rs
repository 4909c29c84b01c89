//! Non-uniform 1D meshes: the four grid families used throughout the
//! experiments (uniform, quasi-regular, random, repeating pattern blocks).

use crate::error::{Error, Result};
use crate::field::Field;
use crate::quadrature;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::fmt::Write as _;

/// How ghost cells are resolved at the domain ends.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundaryKind {
    /// Geometry and data wrap around.
    Periodic,
    /// Ghost cell copies the boundary cell (size and averages).
    Outflow,
    /// Ghost cell mirrors the boundary cell; momentum-like components are
    /// negated (component list supplied by the system).
    ReflectiveWall,
    /// No ghost cells: querying a missing neighbour is an error.
    None,
}

/// Recipe for one of the grid families.
#[derive(Clone, Debug)]
pub enum GridSpec {
    Uniform {
        n: usize,
    },
    /// Interfaces of a uniform grid pushed through x -> x + 0.02 sin(10 pi x)
    /// (on the reference interval [0,1]).
    QuasiRegular {
        n: usize,
    },
    /// Interior interfaces of a uniform grid moved by xi_j * h/4 with
    /// xi_j uniform in [-0.5, 0.5], drawn from a seeded PRNG.
    Random {
        n: usize,
        seed: u64,
    },
    /// Blocks of cells with sizes base * factors[0], base * factors[1], ...
    /// repeated until the domain is filled (base is adjusted to the nearest
    /// exact tiling).
    Pattern {
        base: f64,
        factors: Vec<f64>,
    },
}

impl GridSpec {
    /// Short label used in CSV headers and run manifests.
    pub fn label(&self) -> String {
        match self {
            GridSpec::Uniform { n } => format!("uniform,n={n}"),
            GridSpec::QuasiRegular { n } => format!("quasi-regular,n={n}"),
            GridSpec::Random { n, seed } => format!("random,n={n},seed={seed}"),
            GridSpec::Pattern { base, factors } => {
                let fs: Vec<String> = factors.iter().map(|f| format!("{f}")).collect();
                format!("pattern,base={base},factors=[{}]", fs.join(";"))
            }
        }
    }
}

/// Partition of an interval into cells. Immutable after construction.
#[derive(Clone, Debug)]
pub struct Mesh1D {
    interfaces: Vec<f64>,
    widths: Vec<f64>,
    centers: Vec<f64>,
    boundary: BoundaryKind,
    label: String,
}

const QUASI_AMPLITUDE: f64 = 0.02; // 0.1/5

fn quasi_map(x: f64) -> f64 {
    x + QUASI_AMPLITUDE * (10.0 * std::f64::consts::PI * x).sin()
}

impl Mesh1D {
    /// Build a mesh from explicit interface coordinates.
    pub fn from_interfaces(
        interfaces: Vec<f64>,
        boundary: BoundaryKind,
        label: String,
    ) -> Result<Self> {
        if interfaces.len() < 2 {
            return Err(Error::Mesh("need at least one cell".into()));
        }
        let n = interfaces.len() - 1;
        let mut widths = Vec::with_capacity(n);
        let mut centers = Vec::with_capacity(n);
        for j in 0..n {
            let h = interfaces[j + 1] - interfaces[j];
            if !(h > 0.0) {
                return Err(Error::Mesh(format!(
                    "non-positive cell {j}: [{}, {}]",
                    interfaces[j],
                    interfaces[j + 1]
                )));
            }
            widths.push(h);
            centers.push(0.5 * (interfaces[j] + interfaces[j + 1]));
        }
        let length = interfaces[n] - interfaces[0];
        let total: f64 = widths.iter().sum();
        if (total - length).abs() > 1e-14 * length.abs().max(1.0) {
            return Err(Error::Mesh("interfaces do not telescope".into()));
        }
        Ok(Mesh1D {
            interfaces,
            widths,
            centers,
            boundary,
            label,
        })
    }

    /// Generate a mesh of the given family on `domain = (a, b)`.
    pub fn generate(spec: &GridSpec, domain: (f64, f64), boundary: BoundaryKind) -> Result<Self> {
        let (a, b) = domain;
        if !(b > a) {
            return Err(Error::Mesh(format!("empty domain [{a}, {b}]")));
        }
        let length = b - a;
        let label = spec.label();
        let interfaces = match spec {
            GridSpec::Uniform { n } => {
                if *n == 0 {
                    return Err(Error::Mesh("need n >= 1".into()));
                }
                (0..=*n)
                    .map(|j| a + length * j as f64 / *n as f64)
                    .collect()
            }
            GridSpec::QuasiRegular { n } => {
                if *n == 0 {
                    return Err(Error::Mesh("need n >= 1".into()));
                }
                (0..=*n)
                    .map(|j| a + length * quasi_map(j as f64 / *n as f64))
                    .collect()
            }
            GridSpec::Random { n, seed } => {
                if *n == 0 {
                    return Err(Error::Mesh("need n >= 1".into()));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let h = 1.0 / *n as f64;
                let mut xs = Vec::with_capacity(n + 1);
                xs.push(a);
                for j in 1..*n {
                    let xi: f64 = rng.random::<f64>() - 0.5;
                    xs.push(a + length * (j as f64 * h + xi * h / 4.0));
                }
                xs.push(b);
                xs
            }
            GridSpec::Pattern { base, factors } => {
                if factors.is_empty() || factors.iter().any(|&f| !(f > 0.0)) {
                    return Err(Error::Mesh("pattern factors must all be positive".into()));
                }
                let block: f64 = factors.iter().sum::<f64>() * base;
                if !(block > 0.0) {
                    return Err(Error::Mesh("pattern base must be positive".into()));
                }
                let n_blocks = (length / block).round().max(1.0) as usize;
                if n_blocks * factors.len() < 5 {
                    return Err(Error::Mesh(
                        "pattern meshes need at least 5 cells".into(),
                    ));
                }
                // nearest exact tiling of the requested block size
                let scale = length / (n_blocks as f64 * factors.iter().sum::<f64>());
                let mut xs = Vec::with_capacity(n_blocks * factors.len() + 1);
                let mut x = a;
                xs.push(x);
                for _ in 0..n_blocks {
                    for &f in factors {
                        x += scale * f;
                        xs.push(x);
                    }
                }
                let last = xs.len() - 1;
                xs[last] = b; // kill accumulated roundoff
                xs
            }
        };
        Mesh1D::from_interfaces(interfaces, boundary, label)
    }

    pub fn n_cells(&self) -> usize {
        self.widths.len()
    }

    pub fn interfaces(&self) -> &[f64] {
        &self.interfaces
    }

    pub fn interface(&self, j: usize) -> f64 {
        self.interfaces[j]
    }

    pub fn width(&self, j: usize) -> f64 {
        self.widths[j]
    }

    pub fn widths(&self) -> &[f64] {
        &self.widths
    }

    pub fn center(&self, j: usize) -> f64 {
        self.centers[j]
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.interfaces[0], self.interfaces[self.interfaces.len() - 1])
    }

    pub fn length(&self) -> f64 {
        let (a, b) = self.domain();
        b - a
    }

    pub fn min_width(&self) -> f64 {
        self.widths.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn boundary(&self) -> BoundaryKind {
        self.boundary
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Width of the neighbour `offset` = -1 or +1 of cell `j`, resolving
    /// ghosts per the boundary kind.
    pub fn neighbor_width(&self, j: usize, offset: isize) -> Result<f64> {
        let n = self.n_cells() as isize;
        let k = j as isize + offset;
        if k >= 0 && k < n {
            return Ok(self.widths[k as usize]);
        }
        match self.boundary {
            BoundaryKind::Periodic => Ok(self.widths[(k.rem_euclid(n)) as usize]),
            // copy and mirror both reproduce the boundary cell's size
            BoundaryKind::Outflow | BoundaryKind::ReflectiveWall => {
                Ok(self.widths[j])
            }
            BoundaryKind::None => Err(Error::Mesh(format!(
                "cell {j} has no neighbour at offset {offset} (boundary kind None)"
            ))),
        }
    }

    /// Size ratios (beta, gamma) = (h_{j-1}/h_j, h_{j+1}/h_j).
    pub fn local_ratios(&self, j: usize) -> Result<(f64, f64)> {
        let h = self.widths[j];
        let left = self.neighbor_width(j, -1)?;
        let right = self.neighbor_width(j, 1)?;
        Ok((left / h, right / h))
    }

    /// Per-cell averages of a scalar function (3-node Gauss rule per cell).
    pub fn cell_averages<F: Fn(f64) -> f64>(&self, f: F) -> Field {
        let n = self.n_cells();
        let mut field = Field::zeros(n, 1);
        for j in 0..n {
            field.set(j, 0, quadrature::cell_average(&f, self.interfaces[j], self.interfaces[j + 1]));
        }
        field
    }

    /// Per-cell averages of an m-component function.
    pub fn cell_averages_vec<F: Fn(f64, &mut [f64])>(&self, m: usize, f: F) -> Field {
        let n = self.n_cells();
        let mut field = Field::zeros(n, m);
        let mut buf = vec![0.0; m];
        for j in 0..n {
            for c in 0..m {
                let fc = |x: f64| {
                    let mut tmp = vec![0.0; m];
                    f(x, &mut tmp);
                    tmp[c]
                };
                buf[c] = quadrature::cell_average(fc, self.interfaces[j], self.interfaces[j + 1]);
            }
            for c in 0..m {
                field.set(j, c, buf[c]);
            }
        }
        field
    }

    /// One CSV line per interface coordinate; the header records the grid
    /// family (and seed, when there is one).
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# grid={}", self.label);
        let _ = writeln!(out, "interface");
        for x in &self.interfaces {
            let _ = writeln!(out, "{x:.17e}");
        }
        out
    }
}
