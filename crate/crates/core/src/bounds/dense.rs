//! Dense floating-point views of a problem for the switched-distribution
//! searches.
//!
//! Candidate input laws are composed with the (fixed) channel and all
//! entropic terms are evaluated in `f64`. Every candidate the optimizer
//! produces has full support (all atoms at or above an interior floor), so
//! the support of any induced pair marginal is determined by the channel
//! alone. That makes the common-part component structure of each pair a
//! constant of the search, computed once here from exact channel entries.

use num::{ToPrimitive, Zero};

use crate::prob::{Problem, Rat};

/// Shannon entropy of a (sub)probability vector, in bits.
pub(crate) fn entropy(p: &[f64]) -> f64 {
    let mut h = 0.0;
    for &v in p {
        if v > 0.0 {
            h -= v * v.log2();
        }
    }
    h
}

/// Connected components of a pair's support bipartite graph.
#[derive(Clone, Debug)]
pub(crate) struct PairComponents {
    /// Component id per left symbol.
    pub left: Vec<usize>,
    /// Number of components.
    pub count: usize,
}

pub(crate) fn pair_components(
    n_left: usize,
    n_right: usize,
    edge: impl Fn(usize, usize) -> bool,
) -> PairComponents {
    // Plain union-find over left ∪ right vertices.
    let total = n_left + n_right;
    let mut parent: Vec<usize> = (0..total).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for l in 0..n_left {
        for r in 0..n_right {
            if edge(l, r) {
                let a = find(&mut parent, l);
                let b = find(&mut parent, n_left + r);
                if a != b {
                    parent[a] = b;
                }
            }
        }
    }
    let mut ids: Vec<usize> = Vec::new();
    let mut left = vec![usize::MAX; n_left];
    for (l, slot) in left.iter_mut().enumerate() {
        let root = find(&mut parent, l);
        let id = match ids.iter().position(|&r| r == root) {
            Some(i) => i,
            None => {
                ids.push(root);
                ids.len() - 1
            }
        };
        *slot = id;
    }
    PairComponents { left, count: ids.len() }
}

fn rat_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or(0.0)
}

/// A problem flattened to dense `f64` arrays, plus the support structure
/// shared by all full-support candidates.
pub(crate) struct DenseProblem {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    /// Channel `w[(x·ny + y)·nz + z] = p(z|x,y)`.
    pub w: Vec<f64>,
    /// True input law, `pxy[x·ny + y]`.
    pub pxy: Vec<f64>,
    pub px: Vec<f64>,
    pub py: Vec<f64>,
    /// Output marginal induced by the true input law.
    pub pz: Vec<f64>,
    /// Components of the X–Z support pairs (`∃y: p(z|x,y) > 0`).
    pub comp_xz: PairComponents,
    /// Components of the Y–Z support pairs (`∃x: p(z|x,y) > 0`).
    pub comp_yz: PairComponents,
}

impl DenseProblem {
    pub fn new(problem: &Problem) -> Self {
        let nx = problem.x_alphabet().len();
        let ny = problem.y_alphabet().len();
        let nz = problem.z_alphabet().len();
        let ch = problem.channel();
        let mut w = vec![0.0; nx * ny * nz];
        for x in 0..nx as u32 {
            for y in 0..ny as u32 {
                for z in 0..nz as u32 {
                    w[(x as usize * ny + y as usize) * nz + z as usize] = rat_f64(ch.prob(x, y, z));
                }
            }
        }
        let mut pxy = vec![0.0; nx * ny];
        let input = problem.input();
        for (key, weight) in input.atoms() {
            pxy[key[0] as usize * ny + key[1] as usize] = rat_f64(weight);
        }
        let mut px = vec![0.0; nx];
        let mut py = vec![0.0; ny];
        let mut pz = vec![0.0; nz];
        for x in 0..nx {
            for y in 0..ny {
                let q = pxy[x * ny + y];
                px[x] += q;
                py[y] += q;
                for z in 0..nz {
                    pz[z] += q * w[(x * ny + y) * nz + z];
                }
            }
        }
        // Support edges from exact channel entries, not rounded floats.
        let supp = |x: usize, y: usize, z: usize| !ch.prob(x as u32, y as u32, z as u32).is_zero();
        let comp_xz = pair_components(nx, nz, |x, z| (0..ny).any(|y| supp(x, y, z)));
        let comp_yz = pair_components(ny, nz, |y, z| (0..nx).any(|x| supp(x, y, z)));
        DenseProblem { nx, ny, nz, w, pxy, px, py, pz, comp_xz, comp_yz }
    }

    /// Compose an input law with the channel into a full triple law.
    pub fn tri(&self, pxy: &[f64]) -> Tri {
        let (nx, ny, nz) = (self.nx, self.ny, self.nz);
        let mut j = vec![0.0; nx * ny * nz];
        let mut pxz = vec![0.0; nx * nz];
        let mut pyz = vec![0.0; ny * nz];
        let mut px = vec![0.0; nx];
        let mut py = vec![0.0; ny];
        let mut pz = vec![0.0; nz];
        let mut h_xyz = 0.0;
        for x in 0..nx {
            for y in 0..ny {
                let q = pxy[x * ny + y];
                if q <= 0.0 {
                    continue;
                }
                px[x] += q;
                py[y] += q;
                for z in 0..nz {
                    let p = q * self.w[(x * ny + y) * nz + z];
                    if p > 0.0 {
                        j[(x * ny + y) * nz + z] = p;
                        pxz[x * nz + z] += p;
                        pyz[y * nz + z] += p;
                        pz[z] += p;
                        h_xyz -= p * p.log2();
                    }
                }
            }
        }
        Tri { pxy: pxy.to_vec(), pxz, pyz, px, py, pz, h_xyz }
    }
}

/// A triple law `(X, Y, Z)` with its pair and single marginals.
pub(crate) struct Tri {
    pub pxy: Vec<f64>,
    pub pxz: Vec<f64>,
    pub pyz: Vec<f64>,
    pub px: Vec<f64>,
    pub py: Vec<f64>,
    pub pz: Vec<f64>,
    pub h_xyz: f64,
}

impl Tri {
    pub fn i_xy(&self) -> f64 {
        entropy(&self.px) + entropy(&self.py) - entropy(&self.pxy)
    }

    fn gk(marginal: &[f64], comp: &PairComponents) -> f64 {
        if comp.count <= 1 {
            return 0.0;
        }
        let mut pc = vec![0.0; comp.count];
        for (i, &c) in comp.left.iter().enumerate() {
            pc[c] += marginal[i];
        }
        entropy(&pc)
    }

    /// `RI(X;Z) = I(X;Z) − H(X ⊓ Z)` under the full-support component law.
    pub fn ri_xz(&self, dp: &DenseProblem) -> f64 {
        let i = entropy(&self.px) + entropy(&self.pz) - entropy(&self.pxz);
        i - Self::gk(&self.px, &dp.comp_xz)
    }

    /// `RI(Y;Z) = I(Y;Z) − H(Y ⊓ Z)` under the full-support component law.
    pub fn ri_yz(&self, dp: &DenseProblem) -> f64 {
        let i = entropy(&self.py) + entropy(&self.pz) - entropy(&self.pyz);
        i - Self::gk(&self.py, &dp.comp_yz)
    }

    pub fn h_xz_given_y(&self) -> f64 {
        self.h_xyz - entropy(&self.py)
    }

    pub fn h_yz_given_x(&self) -> f64 {
        self.h_xyz - entropy(&self.px)
    }

    pub fn h_xy_given_z(&self) -> f64 {
        self.h_xyz - entropy(&self.pz)
    }
}

/// Outer product of two marginals into a joint over `(X, Y)`.
pub(crate) fn product_joint(bx: &[f64], by: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; bx.len() * by.len()];
    for (x, &a) in bx.iter().enumerate() {
        for (y, &b) in by.iter().enumerate() {
            out[x * by.len() + y] = a * b;
        }
    }
    out
}

/// Joint from an X-marginal and per-`x` conditional rows over `Y`
/// (`conds` holds `nx` contiguous rows of length `ny`).
pub(crate) fn joint_from_x_conditionals(bx: &[f64], conds: &[f64], ny: usize) -> Vec<f64> {
    let mut out = vec![0.0; bx.len() * ny];
    for (x, &a) in bx.iter().enumerate() {
        for y in 0..ny {
            out[x * ny + y] = a * conds[x * ny + y];
        }
    }
    out
}

/// Joint from a Y-marginal and per-`y` conditional rows over `X`
/// (`conds` holds `ny` contiguous rows of length `nx`).
pub(crate) fn joint_from_y_conditionals(by: &[f64], conds: &[f64], nx: usize) -> Vec<f64> {
    let ny = by.len();
    let mut out = vec![0.0; nx * ny];
    for (y, &b) in by.iter().enumerate() {
        for x in 0..nx {
            out[x * ny + y] = b * conds[y * nx + x];
        }
    }
    out
}
