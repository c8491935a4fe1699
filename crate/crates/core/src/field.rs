//! Double-buffered population storage.
//!
//! Populations are stored direction-major (`q * n_cells + cell`), which turns
//! streaming into 19 row-shifted copies. Collision works in place on the
//! current buffer; [`FluidField::stream`] reads the current buffer and writes
//! the other one, then [`FluidField::swap`] flips them.

use crate::lattice::{self, CollisionConfig, Pdfs, D3Q19, Q};
use crate::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum CellFlag {
    Fluid = 0,
    /// Covered by a particle; not collided and never a source of valid data.
    Solid = 1,
}

#[derive(Debug, Clone)]
pub struct FluidField {
    dims: [usize; 3],
    periodic: [bool; 3],
    n: usize,
    bufs: [Vec<f64>; 2],
    current: usize,
    flags: Vec<CellFlag>,
}

impl FluidField {
    /// Creates a resting field at unit density.
    pub fn new(dims: [usize; 3], periodic: [bool; 3]) -> Self {
        assert!(dims.iter().all(|&d| d > 0), "grid dimensions must be positive");
        let n = dims[0] * dims[1] * dims[2];
        let mut field = Self {
            dims,
            periodic,
            n,
            bufs: [vec![0.0; n * Q], vec![0.0; n * Q]],
            current: 0,
            flags: vec![CellFlag::Fluid; n],
        };
        field.fill_equilibrium(1.0, &Vec3::zeros());
        field
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn periodic(&self) -> [bool; 3] {
        self.periodic
    }

    pub fn n_cells(&self) -> usize {
        self.n
    }

    #[inline(always)]
    pub fn index(&self, x: usize, y: usize, z: usize) -> usize {
        x + self.dims[0] * (y + self.dims[1] * z)
    }

    #[inline(always)]
    pub fn coords(&self, cell: usize) -> [usize; 3] {
        let x = cell % self.dims[0];
        let yz = cell / self.dims[0];
        [x, yz % self.dims[1], yz / self.dims[1]]
    }

    /// Cell center in lattice coordinates; cell `i` spans `[i, i + 1]`.
    #[inline]
    pub fn center(&self, cell: usize) -> Vec3 {
        let [x, y, z] = self.coords(cell);
        Vec3::new(x as f64 + 0.5, y as f64 + 0.5, z as f64 + 0.5)
    }

    /// Neighbor reached by `offset` integer steps, honoring periodic axes.
    #[inline]
    pub fn offset(&self, cell: usize, offset: [i64; 3]) -> Option<usize> {
        let c = self.coords(cell);
        let mut out = [0usize; 3];
        for a in 0..3 {
            let d = self.dims[a] as i64;
            let mut v = c[a] as i64 + offset[a];
            if v < 0 || v >= d {
                if !self.periodic[a] {
                    return None;
                }
                v = v.rem_euclid(d);
            }
            out[a] = v as usize;
        }
        Some(self.index(out[0], out[1], out[2]))
    }

    /// Neighbor along `k * c_q`.
    #[inline]
    pub fn neighbor(&self, cell: usize, q: usize, k: i64) -> Option<usize> {
        let c = D3Q19::C[q];
        self.offset(cell, [c[0] as i64 * k, c[1] as i64 * k, c[2] as i64 * k])
    }

    /// Wraps integer coordinates into the grid, or `None` outside a non-periodic axis.
    pub fn wrap(&self, coords: [i64; 3]) -> Option<usize> {
        let mut out = [0usize; 3];
        for a in 0..3 {
            let d = self.dims[a] as i64;
            let mut v = coords[a];
            if v < 0 || v >= d {
                if !self.periodic[a] {
                    return None;
                }
                v = v.rem_euclid(d);
            }
            out[a] = v as usize;
        }
        Some(self.index(out[0], out[1], out[2]))
    }

    pub fn flags(&self) -> &[CellFlag] {
        &self.flags
    }

    #[inline(always)]
    pub fn flag(&self, cell: usize) -> CellFlag {
        self.flags[cell]
    }

    #[inline(always)]
    pub fn is_fluid(&self, cell: usize) -> bool {
        self.flags[cell] == CellFlag::Fluid
    }

    pub fn set_flag(&mut self, cell: usize, flag: CellFlag) {
        self.flags[cell] = flag;
    }

    #[inline(always)]
    pub fn pdf(&self, cell: usize, q: usize) -> f64 {
        self.bufs[self.current][q * self.n + cell]
    }

    #[inline(always)]
    pub fn set_pdf(&mut self, cell: usize, q: usize, value: f64) {
        let n = self.n;
        self.bufs[self.current][q * n + cell] = value;
    }

    /// Value in the non-current (post-stream) buffer.
    #[inline(always)]
    pub fn next_pdf(&self, cell: usize, q: usize) -> f64 {
        self.bufs[1 - self.current][q * self.n + cell]
    }

    #[inline(always)]
    pub fn set_next_pdf(&mut self, cell: usize, q: usize, value: f64) {
        let n = self.n;
        self.bufs[1 - self.current][q * n + cell] = value;
    }

    #[inline]
    pub fn cell_pdfs(&self, cell: usize) -> Pdfs {
        let buf = &self.bufs[self.current];
        let mut f = [0.0; Q];
        for (q, v) in f.iter_mut().enumerate() {
            *v = buf[q * self.n + cell];
        }
        f
    }

    #[inline]
    pub fn set_cell_pdfs(&mut self, cell: usize, f: &Pdfs) {
        let n = self.n;
        let buf = &mut self.bufs[self.current];
        for (q, v) in f.iter().enumerate() {
            buf[q * n + cell] = *v;
        }
    }

    pub fn fill_equilibrium(&mut self, rho: f64, u: &Vec3) {
        let feq = lattice::equilibrium(rho, u);
        for buf in self.bufs.iter_mut() {
            for q in 0..Q {
                buf[q * self.n..(q + 1) * self.n].fill(feq[q]);
            }
        }
    }

    /// All populations of the current buffer, direction-major.
    pub fn current_buffer(&self) -> &[f64] {
        &self.bufs[self.current]
    }

    /// Collides every fluid cell in place. Returns the first fluid cell whose
    /// populations are not finite, if any.
    pub fn collide(&mut self, cfg: &CollisionConfig) -> Option<usize> {
        let n = self.n;
        let buf = &mut self.bufs[self.current];
        let mut bad = None;
        let mut tile = Tile::default();
        let mut start = 0;
        while start < n {
            let len = TILE.min(n - start);
            let flags = &self.flags[start..start + len];
            let all_fluid = flags.iter().all(|&f| f == CellFlag::Fluid);
            if !all_fluid && flags.iter().all(|&f| f != CellFlag::Fluid) {
                start += len;
                continue;
            }
            for q in 0..Q {
                tile.f[q][..len].copy_from_slice(&buf[q * n + start..q * n + start + len]);
            }
            tile.collide(cfg);
            for (i, &flag) in flags.iter().enumerate() {
                if flag == CellFlag::Fluid && !tile.f[0][i].is_finite() {
                    bad = bad.or(Some(start + i));
                }
            }
            for q in 0..Q {
                let dst = &mut buf[q * n + start..q * n + start + len];
                if all_fluid {
                    dst.copy_from_slice(&tile.f[q][..len]);
                } else {
                    for (i, &flag) in flags.iter().enumerate() {
                        if flag == CellFlag::Fluid {
                            dst[i] = tile.f[q][i];
                        }
                    }
                }
            }
            start += len;
        }
        bad
    }

    /// Applies `kernel` to the populations of every fluid cell, in cell order.
    /// Returns the first cell whose updated rest population is not finite;
    /// non-finite input anywhere in a cell reaches it through the density.
    #[inline]
    pub fn update_cells(&mut self, mut kernel: impl FnMut(usize, &mut Pdfs)) -> Option<usize> {
        // Cells are processed in tiles so that every direction is read and
        // written as a short contiguous run.
        let n = self.n;
        let buf = &mut self.bufs[self.current];
        let mut bad = None;
        let mut tile = [[0.0; TILE]; Q];
        let mut start = 0;
        while start < n {
            let len = TILE.min(n - start);
            let flags = &self.flags[start..start + len];
            if flags.iter().all(|&f| f != CellFlag::Fluid) {
                start += len;
                continue;
            }
            for q in 0..Q {
                tile[q][..len].copy_from_slice(&buf[q * n + start..q * n + start + len]);
            }
            for (i, &flag) in flags.iter().enumerate() {
                if flag != CellFlag::Fluid {
                    continue;
                }
                let mut f = [0.0; Q];
                for q in 0..Q {
                    f[q] = tile[q][i];
                }
                kernel(start + i, &mut f);
                if !f[0].is_finite() && bad.is_none() {
                    bad = Some(start + i);
                }
                for q in 0..Q {
                    tile[q][i] = f[q];
                }
            }
            for q in 0..Q {
                buf[q * n + start..q * n + start + len].copy_from_slice(&tile[q][..len]);
            }
            start += len;
        }
        bad
    }

    /// Pull streaming of the whole grid into the other buffer, wrapping around
    /// every axis. Slots whose source lies outside a non-periodic axis or
    /// inside a solid cell receive meaningless values and must be written by
    /// the boundary handling before the buffers are swapped.
    pub fn stream(&mut self) {
        let [nx, ny, nz] = self.dims;
        let n = self.n;
        let (a, b) = self.bufs.split_at_mut(1);
        let (src, dst) = if self.current == 0 {
            (&a[0], &mut b[0])
        } else {
            (&b[0], &mut a[0])
        };
        for q in 0..Q {
            let [cx, cy, cz] = D3Q19::C[q];
            let src_q = &src[q * n..(q + 1) * n];
            let dst_q = &mut dst[q * n..(q + 1) * n];
            for z in 0..nz {
                let sz = (z as i64 - cz as i64).rem_euclid(nz as i64) as usize;
                for y in 0..ny {
                    let sy = (y as i64 - cy as i64).rem_euclid(ny as i64) as usize;
                    let s0 = nx * (sy + ny * sz);
                    let d0 = nx * (y + ny * z);
                    let s_row = &src_q[s0..s0 + nx];
                    let d_row = &mut dst_q[d0..d0 + nx];
                    match cx {
                        0 => d_row.copy_from_slice(s_row),
                        1 => {
                            d_row[1..].copy_from_slice(&s_row[..nx - 1]);
                            d_row[0] = s_row[nx - 1];
                        }
                        _ => {
                            d_row[..nx - 1].copy_from_slice(&s_row[1..]);
                            d_row[nx - 1] = s_row[0];
                        }
                    }
                }
            }
        }
    }

    pub fn swap(&mut self) {
        self.current = 1 - self.current;
    }

    /// Density and pre-shift velocity of a cell in the current buffer.
    #[inline]
    pub fn moments(&self, cell: usize) -> lattice::MacroState {
        lattice::moments(&self.cell_pdfs(cell))
    }

    pub fn total_mass(&self) -> f64 {
        (0..self.n).filter(|&c| self.is_fluid(c)).map(|c| self.moments(c).rho).sum()
    }

    /// Sum of `sum_q f_q c_q` over fluid cells.
    pub fn total_momentum(&self) -> Vec3 {
        (0..self.n)
            .filter(|&c| self.is_fluid(c))
            .fold(Vec3::zeros(), |acc, c| acc + self.moments(c).velocity * lattice::RHO0)
    }
}

const TILE: usize = 128;

/// Populations of a run of cells, direction-major, so that the collision
/// vectorizes across cells. Operation order matches the single-cell
/// kernels in `lattice`, which keeps results bitwise equal.
struct Tile {
    f: [[f64; TILE]; Q],
    rho: [f64; TILE],
    u: [[f64; TILE]; 3],
    usq: [f64; TILE],
}

impl Default for Tile {
    fn default() -> Self {
        Self {
            f: [[0.0; TILE]; Q],
            rho: [0.0; TILE],
            u: [[0.0; TILE]; 3],
            usq: [0.0; TILE],
        }
    }
}

impl Tile {
    fn collide(&mut self, cfg: &CollisionConfig) {
        self.moments();
        match cfg.operator {
            lattice::CollisionOperator::Bgk => self.bgk(cfg),
            lattice::CollisionOperator::Trt => self.trt(cfg),
        }
    }

    fn moments(&mut self) {
        self.rho = [0.0; TILE];
        self.u = [[0.0; TILE]; 3];
        for q in 0..Q {
            let c = D3Q19::C[q].map(f64::from);
            let f = &self.f[q];
            for i in 0..TILE {
                self.rho[i] += f[i];
            }
            for a in 0..3 {
                let u = &mut self.u[a];
                for i in 0..TILE {
                    u[i] += f[i] * c[a];
                }
            }
        }
        for a in 0..3 {
            for v in self.u[a].iter_mut() {
                *v /= lattice::RHO0;
            }
        }
        let [ux, uy, uz] = &self.u;
        for i in 0..TILE {
            self.usq[i] = 1.5 * (ux[i] * ux[i] + uy[i] * uy[i] + uz[i] * uz[i]);
        }
    }

    /// Forcing term of direction `q` for cell `i`.
    #[inline(always)]
    fn forcing(&self, q: usize, i: usize, force: &[f64; 3], c: &[f64; 3]) -> f64 {
        let [ux, uy, uz] = [self.u[0][i], self.u[1][i], self.u[2][i]];
        let uf = ux * force[0] + uy * force[1] + uz * force[2];
        let cf = c[0] * force[0] + c[1] * force[1] + c[2] * force[2];
        let cu = c[0] * ux + c[1] * uy + c[2] * uz;
        D3Q19::W[q] * (3.0 * (cf - uf) + 9.0 * cu * cf)
    }

    fn bgk(&mut self, cfg: &CollisionConfig) {
        let omega = 1.0 / cfg.tau;
        let force = [cfg.force.x, cfg.force.y, cfg.force.z];
        let forced = force != [0.0; 3];
        for q in 0..Q {
            let c = D3Q19::C[q].map(f64::from);
            let w = D3Q19::W[q];
            for i in 0..TILE {
                let cu = c[0] * self.u[0][i] + c[1] * self.u[1][i] + c[2] * self.u[2][i];
                let feq = w * (self.rho[i] + lattice::RHO0 * (3.0 * cu + 4.5 * cu * cu - self.usq[i]));
                let frc = if forced { self.forcing(q, i, &force, &c) } else { 0.0 };
                let f = &mut self.f[q][i];
                *f += omega * (feq - *f) + frc;
            }
        }
    }

    fn trt(&mut self, cfg: &CollisionConfig) {
        let (lp, lm) = (cfg.lambda_plus, cfg.lambda_minus);
        let force = [cfg.force.x, cfg.force.y, cfg.force.z];
        let forced = force != [0.0; 3];
        let c0 = [0.0; 3];
        for i in 0..TILE {
            let e0 = D3Q19::W[0] * (self.rho[i] - lattice::RHO0 * self.usq[i]);
            let frc = if forced { self.forcing(0, i, &force, &c0) } else { 0.0 };
            let f = &mut self.f[0][i];
            *f += lp * (*f - e0) + frc;
        }
        for q in D3Q19::half() {
            let qb = q + 1;
            let c = D3Q19::C[q].map(f64::from);
            let cb = D3Q19::C[qb].map(f64::from);
            let w = D3Q19::W[q];
            for i in 0..TILE {
                let cu = c[0] * self.u[0][i] + c[1] * self.u[1][i] + c[2] * self.u[2][i];
                let e_plus = w * (self.rho[i] + lattice::RHO0 * (4.5 * cu * cu - self.usq[i]));
                let e_minus = w * lattice::RHO0 * 3.0 * cu;
                let (fq, fb) = (self.f[q][i], self.f[qb][i]);
                let d_plus = lp * (0.5 * (fq + fb) - e_plus);
                let d_minus = lm * (0.5 * (fq - fb) - e_minus);
                let (frc, frc_b) = if forced {
                    (self.forcing(q, i, &force, &c), self.forcing(qb, i, &force, &cb))
                } else {
                    (0.0, 0.0)
                };
                self.f[q][i] = fq + (d_plus + d_minus + frc);
                self.f[qb][i] = fb + (d_plus - d_minus + frc_b);
            }
        }
    }
}
