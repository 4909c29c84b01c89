//! Two-dimensional CWENO reconstruction on locally refined quad-tree meshes
//! over the periodic unit square.
//!
//! Each cell fits a constrained least-squares quadratic P_OPT (exact central
//! average, LS over all edge/vertex neighbours) and four directional planes
//! over the NE/NW/SW/SE sectors; the central candidate is defined by
//! P_OPT = 1/2 P_C + 1/8 (P_NE + P_NW + P_SW + P_SE). Nonlinear weights come
//! from the multi-dimensional Jiang-Shu indicators with the configured
//! eps-policy evaluated at the cell width.

use crate::error::{Error, Result};
use crate::quadrature::{cell_average_2d, GL2_NODES};
use crate::reconstruction::{nonlinear_weights, EpsilonPolicy};
use nalgebra::{DMatrix, DVector};
use std::collections::HashMap;
use std::fmt::Write as _;

/// Linear weights: central candidate, then the four sector planes.
pub const LINEAR_WEIGHTS_2D: [f64; 5] = [0.5, 0.125, 0.125, 0.125, 0.125];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Leaf {
    pub level: u32,
    pub ix: u32,
    pub iy: u32,
}

fn key(level: u32, ix: u32, iy: u32) -> u64 {
    ((level as u64) << 56) | ((ix as u64) << 28) | iy as u64
}

/// Quad-tree over a base x base coarse grid of the unit square; leaves tile
/// the square, hanging nodes allowed, indices wrap periodically.
#[derive(Clone, Debug)]
pub struct QuadTreeMesh {
    base: usize,
    leaves: Vec<Leaf>,
    index: HashMap<u64, u32>,
    min_level: u32,
    max_level: u32,
}

impl QuadTreeMesh {
    pub fn uniform(base: usize) -> Self {
        assert!(base >= 2);
        let mut leaves = Vec::with_capacity(base * base);
        for ix in 0..base as u32 {
            for iy in 0..base as u32 {
                leaves.push(Leaf { level: 0, ix, iy });
            }
        }
        let mut mesh = QuadTreeMesh {
            base,
            leaves,
            index: HashMap::new(),
            min_level: 0,
            max_level: 0,
        };
        mesh.rebuild_index();
        mesh
    }

    fn rebuild_index(&mut self) {
        self.index = HashMap::with_capacity(self.leaves.len() * 2);
        self.min_level = u32::MAX;
        self.max_level = 0;
        for (i, leaf) in self.leaves.iter().enumerate() {
            self.index.insert(key(leaf.level, leaf.ix, leaf.iy), i as u32);
            self.min_level = self.min_level.min(leaf.level);
            self.max_level = self.max_level.max(leaf.level);
        }
    }

    pub fn n_leaves(&self) -> usize {
        self.leaves.len()
    }

    pub fn leaves(&self) -> &[Leaf] {
        &self.leaves
    }

    pub fn width(&self, i: usize) -> f64 {
        1.0 / (self.base as f64 * (1u64 << self.leaves[i].level) as f64)
    }

    /// Lower-left corner.
    pub fn origin(&self, i: usize) -> (f64, f64) {
        let leaf = self.leaves[i];
        let w = self.width(i);
        (leaf.ix as f64 * w, leaf.iy as f64 * w)
    }

    pub fn centroid(&self, i: usize) -> (f64, f64) {
        let (x0, y0) = self.origin(i);
        let w = self.width(i);
        (x0 + 0.5 * w, y0 + 0.5 * w)
    }

    /// Split the flagged leaves into four children each.
    pub fn refine_where(&mut self, flags: &[bool]) {
        assert_eq!(flags.len(), self.leaves.len());
        let mut next = Vec::with_capacity(self.leaves.len() + 3 * flags.iter().filter(|f| **f).count());
        for (leaf, flag) in self.leaves.iter().zip(flags.iter()) {
            if *flag {
                for dx in 0..2u32 {
                    for dy in 0..2u32 {
                        next.push(Leaf {
                            level: leaf.level + 1,
                            ix: 2 * leaf.ix + dx,
                            iy: 2 * leaf.iy + dy,
                        });
                    }
                }
            } else {
                next.push(*leaf);
            }
        }
        self.leaves = next;
        self.rebuild_index();
    }

    /// The mesh obtained by splitting every leaf into 4^k equal parts.
    pub fn refined_copy(&self, k: u32) -> Self {
        let factor = 1u32 << k;
        let mut leaves = Vec::with_capacity(self.leaves.len() * (factor as usize).pow(2));
        for leaf in &self.leaves {
            for dx in 0..factor {
                for dy in 0..factor {
                    leaves.push(Leaf {
                        level: leaf.level + k,
                        ix: factor * leaf.ix + dx,
                        iy: factor * leaf.iy + dy,
                    });
                }
            }
        }
        let mut mesh = QuadTreeMesh {
            base: self.base,
            leaves,
            index: HashMap::new(),
            min_level: 0,
            max_level: 0,
        };
        mesh.rebuild_index();
        mesh
    }

    /// Exact-to-quadrature cell averages of a function.
    pub fn averages<F: Fn(f64, f64) -> f64>(&self, u: F) -> Vec<f64> {
        (0..self.n_leaves())
            .map(|i| {
                let (x0, y0) = self.origin(i);
                cell_average_2d(&u, x0, y0, self.width(i))
            })
            .collect()
    }

    /// All edge- and vertex-adjacent leaves (periodic wrap).
    pub fn neighbors(&self, i: usize) -> Vec<u32> {
        let leaf = self.leaves[i];
        let mut out = Vec::with_capacity(12);
        for level in self.min_level..=self.max_level {
            let b = (self.base as u32) << level;
            // span of our cell at this level
            let (lo_x, hi_x, lo_y, hi_y) = if level >= leaf.level {
                let shift = level - leaf.level;
                (
                    leaf.ix << shift,
                    ((leaf.ix + 1) << shift) - 1,
                    leaf.iy << shift,
                    ((leaf.iy + 1) << shift) - 1,
                )
            } else {
                let shift = leaf.level - level;
                (
                    leaf.ix >> shift,
                    leaf.ix >> shift,
                    leaf.iy >> shift,
                    leaf.iy >> shift,
                )
            };
            let x_range = (lo_x as i64 - 1)..=(hi_x as i64 + 1);
            for jx in x_range {
                for jy in (lo_y as i64 - 1)..=(hi_y as i64 + 1) {
                    let inside_x = jx >= lo_x as i64 && jx <= hi_x as i64;
                    let inside_y = jy >= lo_y as i64 && jy <= hi_y as i64;
                    if inside_x && inside_y {
                        continue; // ancestors/descendants, not neighbours
                    }
                    // only the first ring touches our boundary
                    if level >= leaf.level {
                        let on_ring = jx == lo_x as i64 - 1
                            || jx == hi_x as i64 + 1
                            || jy == lo_y as i64 - 1
                            || jy == hi_y as i64 + 1;
                        if !on_ring {
                            continue;
                        }
                    }
                    let wx = jx.rem_euclid(b as i64) as u32;
                    let wy = jy.rem_euclid(b as i64) as u32;
                    if let Some(&idx) = self.index.get(&key(level, wx, wy)) {
                        if idx as usize != i {
                            out.push(idx);
                        }
                    }
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// One CSV row per leaf: x, y, width, level, average.
    pub fn to_csv(&self, averages: &[f64]) -> String {
        let mut out = String::from("x,y,width,level,average\n");
        for i in 0..self.n_leaves() {
            let (x, y) = self.centroid(i);
            let _ = writeln!(
                out,
                "{x:.12e},{y:.12e},{:.12e},{},{:.12e}",
                self.width(i),
                self.leaves[i].level,
                averages[i]
            );
        }
        out
    }
}

/// Gradient indicator: max |avg_nb - avg_i| / w_i over adjacent leaves.
pub fn gradient_indicator(mesh: &QuadTreeMesh, averages: &[f64], i: usize) -> f64 {
    let w = mesh.width(i);
    mesh.neighbors(i)
        .iter()
        .map(|&nb| (averages[nb as usize] - averages[i]).abs() / w)
        .fold(0.0, f64::max)
}

/// Locally refine a coarse grid with the gradient indicator: leaves whose
/// indicator exceeds the threshold are split, for a fixed number of sweeps.
pub fn build_adapted_grid<F: Fn(f64, f64) -> f64 + Copy>(
    u: F,
    coarse: usize,
    threshold: f64,
    sweeps: u32,
) -> QuadTreeMesh {
    let mut mesh = QuadTreeMesh::uniform(coarse);
    for _ in 0..sweeps {
        let averages = mesh.averages(u);
        let flags: Vec<bool> = (0..mesh.n_leaves())
            .map(|i| gradient_indicator(&mesh, &averages, i) > threshold)
            .collect();
        if !flags.iter().any(|f| *f) {
            break;
        }
        mesh.refine_where(&flags);
    }
    mesh
}

/// Bivariate quadratic in scaled local coordinates xi = (x-cx)/w,
/// eta = (y-cy)/w with basis {1, xi, eta, xi^2, xi*eta, eta^2}.
#[derive(Clone, Copy, Debug)]
pub struct Poly2D {
    pub cx: f64,
    pub cy: f64,
    pub w: f64,
    pub coeffs: [f64; 6],
}

impl Poly2D {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let xi = (x - self.cx) / self.w;
        let eta = (y - self.cy) / self.w;
        let c = &self.coeffs;
        c[0] + c[1] * xi + c[2] * eta + c[3] * xi * xi + c[4] * xi * eta + c[5] * eta * eta
    }

    /// Mean over its own cell: the quadratic basis terms have mean 1/12.
    pub fn own_cell_mean(&self) -> f64 {
        self.coeffs[0] + (self.coeffs[3] + self.coeffs[5]) / 12.0
    }

    /// Multi-dimensional Jiang-Shu indicator
    /// sum_{1<=|a|<=2} |cell|^{|a|-1} int (D^a P)^2, closed form on squares.
    pub fn indicator(&self) -> f64 {
        let c = &self.coeffs;
        c[1] * c[1]
            + c[2] * c[2]
            + (13.0 / 3.0) * (c[3] * c[3] + c[5] * c[5])
            + (7.0 / 6.0) * c[4] * c[4]
    }

    fn lin_comb(polys: &[(f64, &Poly2D)]) -> Poly2D {
        let first = polys[0].1;
        let mut coeffs = [0.0; 6];
        for (wgt, p) in polys {
            for (acc, c) in coeffs.iter_mut().zip(p.coeffs.iter()) {
                *acc += wgt * c;
            }
        }
        Poly2D {
            cx: first.cx,
            cy: first.cy,
            w: first.w,
            coeffs,
        }
    }
}

/// Exact means of the scaled monomials over a neighbour cell spanning
/// [s0,s1] x [t0,t1] in the central cell's scaled coordinates.
fn monomial_means(s0: f64, s1: f64, t0: f64, t1: f64) -> [f64; 5] {
    let ms = 0.5 * (s0 + s1);
    let mt = 0.5 * (t0 + t1);
    let ms2 = (s0 * s0 + s0 * s1 + s1 * s1) / 3.0;
    let mt2 = (t0 * t0 + t0 * t1 + t1 * t1) / 3.0;
    [ms, mt, ms2, ms * mt, mt2]
}

struct NeighborGeometry {
    /// Scaled span of the neighbour relative to the central cell.
    span: (f64, f64, f64, f64),
    /// Scaled centroid offset.
    offset: (f64, f64),
    average: f64,
}

fn neighbor_geometry(
    mesh: &QuadTreeMesh,
    center: usize,
    nb: usize,
    averages: &[f64],
) -> NeighborGeometry {
    let (cx, cy) = mesh.centroid(center);
    let w = mesh.width(center);
    let (nx, ny) = mesh.centroid(nb);
    let wn = mesh.width(nb);
    // minimal periodic image of the centroid offset
    let mut dx = nx - cx;
    let mut dy = ny - cy;
    dx -= dx.round();
    dy -= dy.round();
    let span = (
        (dx - 0.5 * wn) / w,
        (dx + 0.5 * wn) / w,
        (dy - 0.5 * wn) / w,
        (dy + 0.5 * wn) / w,
    );
    NeighborGeometry {
        span,
        offset: (dx / w, dy / w),
        average: averages[nb],
    }
}

/// Constrained least squares: exact central mean, LS over the rows of
/// zero-central-mean basis functions. `quadratic` selects the 5-parameter
/// quadratic basis or the 2-parameter plane basis.
fn constrained_fit(
    rows: &[[f64; 5]],
    targets: &[f64],
    quadratic: bool,
    cell: usize,
) -> Result<[f64; 5]> {
    let np = if quadratic { 5 } else { 2 };
    if rows.len() < np {
        return Err(Error::RankDeficient(cell));
    }
    let a = DMatrix::from_fn(rows.len(), np, |r, c| rows[r][c]);
    let y = DVector::from_column_slice(targets);
    let ata = a.transpose() * &a;
    let aty = a.transpose() * y;
    let sol = ata
        .lu()
        .solve(&aty)
        .ok_or(Error::RankDeficient(cell))?;
    let mut out = [0.0; 5];
    for k in 0..np {
        out[k] = sol[k];
    }
    Ok(out)
}

/// All five candidate polynomials of one cell.
pub struct StencilPolys {
    pub opt: Poly2D,
    /// NE, NW, SW, SE directional planes.
    pub sectors: [Poly2D; 4],
    pub central: Poly2D,
}

/// Sector membership test with the w/10 tolerance band; sectors are
/// NE, NW, SW, SE in that order.
fn in_sector(offset: (f64, f64), sector: usize) -> bool {
    let (dx, dy) = offset;
    let tol = 0.1; // offsets are in units of the central width
    match sector {
        0 => dx >= -tol && dy >= -tol,
        1 => dx <= tol && dy >= -tol,
        2 => dx <= tol && dy <= tol,
        _ => dx >= -tol && dy <= tol,
    }
}

const SECTOR_BISECTORS: [f64; 4] = [
    std::f64::consts::FRAC_PI_4,
    3.0 * std::f64::consts::FRAC_PI_4,
    -3.0 * std::f64::consts::FRAC_PI_4,
    -std::f64::consts::FRAC_PI_4,
];

fn angular_distance(a: f64, b: f64) -> f64 {
    let mut d = (a - b).abs() % (2.0 * std::f64::consts::PI);
    if d > std::f64::consts::PI {
        d = 2.0 * std::f64::consts::PI - d;
    }
    d
}

/// Fit P_OPT, the four sector planes and the central candidate of cell `i`.
pub fn fit_stencil_polynomials(
    mesh: &QuadTreeMesh,
    i: usize,
    averages: &[f64],
) -> Result<StencilPolys> {
    let neighbors = mesh.neighbors(i);
    if neighbors.len() < 5 {
        return Err(Error::RankDeficient(i));
    }
    let geoms: Vec<NeighborGeometry> = neighbors
        .iter()
        .map(|&nb| neighbor_geometry(mesh, i, nb as usize, averages))
        .collect();
    let u_center = averages[i];
    let (cx, cy) = mesh.centroid(i);
    let w = mesh.width(i);

    // P_OPT: all neighbours, 5 basis functions with zero central mean
    let rows: Vec<[f64; 5]> = geoms
        .iter()
        .map(|g| {
            let m = monomial_means(g.span.0, g.span.1, g.span.2, g.span.3);
            [m[0], m[1], m[2] - 1.0 / 12.0, m[3], m[4] - 1.0 / 12.0]
        })
        .collect();
    let targets: Vec<f64> = geoms.iter().map(|g| g.average - u_center).collect();
    let sol = constrained_fit(&rows, &targets, true, i)?;
    let opt = Poly2D {
        cx,
        cy,
        w,
        coeffs: [
            u_center - (sol[2] + sol[4]) / 12.0,
            sol[0],
            sol[1],
            sol[2],
            sol[3],
            sol[4],
        ],
    };

    // directional planes: exact centre + LS over the sector members
    let mut sectors = [opt; 4];
    for s in 0..4 {
        let mut members: Vec<usize> = (0..geoms.len())
            .filter(|&g| in_sector(geoms[g].offset, s))
            .collect();
        // a thin sector absorbs the nearest adjacent leaves by centroid angle
        while members.len() < 2 {
            let candidate = (0..geoms.len())
                .filter(|g| !members.contains(g))
                .min_by(|&a, &b| {
                    let ang = |g: usize| {
                        angular_distance(
                            geoms[g].offset.1.atan2(geoms[g].offset.0),
                            SECTOR_BISECTORS[s],
                        )
                    };
                    ang(a).partial_cmp(&ang(b)).unwrap()
                });
            match candidate {
                Some(c) => members.push(c),
                None => return Err(Error::RankDeficient(i)),
            }
        }
        let rows: Vec<[f64; 5]> = members
            .iter()
            .map(|&g| {
                let m = monomial_means(
                    geoms[g].span.0,
                    geoms[g].span.1,
                    geoms[g].span.2,
                    geoms[g].span.3,
                );
                [m[0], m[1], 0.0, 0.0, 0.0]
            })
            .collect();
        let targets: Vec<f64> = members.iter().map(|&g| geoms[g].average - u_center).collect();
        let sol = constrained_fit(&rows, &targets, false, i)?;
        sectors[s] = Poly2D {
            cx,
            cy,
            w,
            coeffs: [u_center, sol[0], sol[1], 0.0, 0.0, 0.0],
        };
    }

    // defining relation: P_OPT = 1/2 P_C + 1/8 sum(P_sector)
    let central = Poly2D::lin_comb(&[
        (2.0, &opt),
        (-0.25, &sectors[0]),
        (-0.25, &sectors[1]),
        (-0.25, &sectors[2]),
        (-0.25, &sectors[3]),
    ]);
    Ok(StencilPolys {
        opt,
        sectors,
        central,
    })
}

/// Nonlinearly weighted reconstruction polynomial of one cell.
pub struct Recon2D {
    pub poly: Poly2D,
    pub weights: [f64; 5],
    pub indicators: [f64; 5],
}

pub fn reconstruct2d(polys: &StencilPolys, epsilon: EpsilonPolicy, tau: i32) -> Recon2D {
    let indicators = [
        polys.central.indicator(),
        polys.sectors[0].indicator(),
        polys.sectors[1].indicator(),
        polys.sectors[2].indicator(),
        polys.sectors[3].indicator(),
    ];
    let eps = epsilon.eval(polys.opt.w);
    let weights = nonlinear_weights(LINEAR_WEIGHTS_2D, indicators, eps, tau);
    let poly = Poly2D::lin_comb(&[
        (weights[0], &polys.central),
        (weights[1], &polys.sectors[0]),
        (weights[2], &polys.sectors[1]),
        (weights[3], &polys.sectors[2]),
        (weights[4], &polys.sectors[3]),
    ]);
    Recon2D {
        poly,
        weights,
        indicators,
    }
}

/// Max error of the reconstruction at the 2-point Gauss nodes of every leaf
/// edge, for several eps-policies in one sweep (fits are policy-independent).
pub fn reconstruction_max_errors<F: Fn(f64, f64) -> f64 + Copy>(
    mesh: &QuadTreeMesh,
    u: F,
    policies: &[EpsilonPolicy],
    tau: i32,
) -> Result<Vec<f64>> {
    let averages = mesh.averages(u);
    let mut worst = vec![0.0f64; policies.len()];
    for i in 0..mesh.n_leaves() {
        let polys = fit_stencil_polynomials(mesh, i, &averages)?;
        let (x0, y0) = mesh.origin(i);
        let w = mesh.width(i);
        let mut nodes = [(0.0, 0.0); 8];
        for (k, &g) in GL2_NODES.iter().enumerate() {
            let along = x0 + 0.5 * w + 0.5 * w * g;
            let along_y = y0 + 0.5 * w + 0.5 * w * g;
            nodes[k] = (along, y0);
            nodes[2 + k] = (along, y0 + w);
            nodes[4 + k] = (x0, along_y);
            nodes[6 + k] = (x0 + w, along_y);
        }
        for (p, policy) in policies.iter().enumerate() {
            let rec = reconstruct2d(&polys, *policy, tau);
            for &(x, y) in &nodes {
                let err = (rec.poly.eval(x, y) - u(x, y)).abs();
                if err > worst[p] {
                    worst[p] = err;
                }
            }
        }
    }
    Ok(worst)
}

/// Error table over a family of grids G_0..G_k (each splitting every cell of
/// the previous one in four); rates are measured against sqrt(N).
pub struct ErrorTable2D {
    pub cells: Vec<usize>,
    /// errors[policy][grid]
    pub errors: Vec<Vec<f64>>,
}

impl ErrorTable2D {
    pub fn rates(&self, policy: usize) -> Vec<f64> {
        let e = &self.errors[policy];
        (1..e.len())
            .map(|k| {
                let nr = (self.cells[k] as f64 / self.cells[k - 1] as f64).sqrt();
                (e[k - 1] / e[k]).ln() / nr.ln()
            })
            .collect()
    }

    pub fn to_csv(&self, policies: &[EpsilonPolicy]) -> String {
        let mut out = String::from("grid,cells");
        for p in policies {
            let _ = write!(out, ",{} error,{} rate", p.label(), p.label());
        }
        out.push('\n');
        for k in 0..self.cells.len() {
            let _ = write!(out, "G{k},{}", self.cells[k]);
            for p in 0..policies.len() {
                let rate = if k == 0 {
                    String::new()
                } else {
                    let r = self.rates(p)[k - 1];
                    format!("{r:.2}")
                };
                let _ = write!(out, ",{:.6e},{rate}", self.errors[p][k]);
            }
            out.push('\n');
        }
        out
    }
}

/// The smooth wave used by the 2D reconstruction benchmark.
pub fn wave_2d(x: f64, y: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    (two_pi * x).sin() * (two_pi * y).cos()
}

/// Gradient threshold calibrated for `wave_2d` on a 32x32 coarse grid with
/// three sweeps (the sharpest refinement short of the indicator's sup 2pi).
pub const WAVE_2D_THRESHOLD: f64 = 6.2;

/// The locally adapted base grid of the 2D reconstruction benchmark.
pub fn wave_2d_base_grid() -> QuadTreeMesh {
    build_adapted_grid(wave_2d, 32, WAVE_2D_THRESHOLD, 3)
}

pub fn reconstruction_error_table<F: Fn(f64, f64) -> f64 + Copy>(
    u: F,
    g0: &QuadTreeMesh,
    max_k: u32,
    policies: &[EpsilonPolicy],
    tau: i32,
) -> Result<ErrorTable2D> {
    let mut cells = Vec::new();
    let mut errors = vec![Vec::new(); policies.len()];
    for k in 0..=max_k {
        let mesh = if k == 0 { g0.clone() } else { g0.refined_copy(k) };
        cells.push(mesh.n_leaves());
        let errs = reconstruction_max_errors(&mesh, u, policies, tau)?;
        for (p, e) in errs.into_iter().enumerate() {
            errors[p].push(e);
        }
    }
    Ok(ErrorTable2D { cells, errors })
}
