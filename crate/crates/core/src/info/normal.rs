//! Normal-form reductions.
//!
//! A problem `(p_XY, p_Z|XY)` is in normal form when no two input symbols are
//! interchangeable and no two output symbols have proportional channel
//! columns; a triple law `p_XYZ` is in normal form when no symbol has zero
//! probability and no two slices along any axis are proportional. Several
//! cut-set and security lemmas hold only on normal forms, so the reductions
//! here are applied before those checks.

use super::InfoError;
use crate::prob::{Alphabet, Channel, JointDist, Problem, Rat, Var};
use num::Zero;

/// Result of reducing a problem to normal form.
#[derive(Clone, Debug)]
pub struct NormalFormMap {
    /// Old X index → new X index (total: zero-probability symbols merge
    /// into whatever class absorbed them).
    pub x_map: Vec<u32>,
    pub y_map: Vec<u32>,
    pub z_map: Vec<u32>,
    pub reduced: Problem,
    /// False when the problem was already in normal form (identity maps).
    pub changed: bool,
}

impl NormalFormMap {
    pub fn is_identity(&self) -> bool {
        !self.changed
    }
}

/// Dense working copy of a problem during reduction.
struct Work {
    x_labels: Vec<String>,
    y_labels: Vec<String>,
    z_labels: Vec<String>,
    /// p[x][y]
    p: Vec<Vec<Rat>>,
    /// w[x][y][z]
    w: Vec<Vec<Vec<Rat>>>,
}

impl Work {
    fn from_problem(problem: &Problem) -> Result<Self, InfoError> {
        let nx = problem.x_alphabet().len();
        let ny = problem.y_alphabet().len();
        let nz = problem.z_alphabet().len();
        let mut p = vec![vec![Rat::zero(); ny]; nx];
        for (key, weight) in problem.input().atoms() {
            p[key[0] as usize][key[1] as usize] = weight.clone();
        }
        let mut w = vec![vec![vec![Rat::zero(); nz]; ny]; nx];
        for (x, row) in w.iter_mut().enumerate() {
            for (y, cell) in row.iter_mut().enumerate() {
                cell.clone_from_slice(problem.channel().row(x as u32, y as u32));
            }
        }
        Ok(Work {
            x_labels: problem.x_alphabet().symbols().to_vec(),
            y_labels: problem.y_alphabet().symbols().to_vec(),
            z_labels: problem.z_alphabet().symbols().to_vec(),
            p,
            w,
        })
    }

    fn nx(&self) -> usize {
        self.x_labels.len()
    }
    fn ny(&self) -> usize {
        self.y_labels.len()
    }
    fn nz(&self) -> usize {
        self.z_labels.len()
    }

    fn x_marginal(&self, x: usize) -> Rat {
        self.p[x].iter().sum()
    }
    fn y_marginal(&self, y: usize) -> Rat {
        self.p.iter().map(|row| row[y].clone()).sum()
    }

    /// Interchangeability of inputs `x` and `x'`: equal channel rows on every
    /// `y` where both have positive probability.
    fn x_equivalent(&self, a: usize, b: usize) -> bool {
        for y in 0..self.ny() {
            if !self.p[a][y].is_zero() && !self.p[b][y].is_zero() && self.w[a][y] != self.w[b][y]
            {
                return false;
            }
        }
        true
    }

    fn y_equivalent(&self, a: usize, b: usize) -> bool {
        for x in 0..self.nx() {
            if !self.p[x][a].is_zero() && !self.p[x][b].is_zero() && self.w[x][a] != self.w[x][b]
            {
                return false;
            }
        }
        true
    }

    /// Proportional output columns over the positive-probability inputs:
    /// some `c > 0` with `w[x][y][a] = c · w[x][y][b]` everywhere on the
    /// support. Zero columns are handled separately as drops.
    fn z_proportional(&self, a: usize, b: usize) -> bool {
        let mut c: Option<Rat> = None;
        for x in 0..self.nx() {
            for y in 0..self.ny() {
                if self.p[x][y].is_zero() {
                    continue;
                }
                let (wa, wb) = (&self.w[x][y][a], &self.w[x][y][b]);
                match (&c, wa.is_zero(), wb.is_zero()) {
                    (_, true, true) => {}
                    (_, true, false) | (_, false, true) => return false,
                    (None, false, false) => c = Some(wa / wb),
                    (Some(c), false, false) => {
                        if wa != &(c * wb) {
                            return false;
                        }
                    }
                }
            }
        }
        c.is_some()
    }

    fn z_column_is_zero(&self, z: usize) -> bool {
        for x in 0..self.nx() {
            for y in 0..self.ny() {
                if !self.p[x][y].is_zero() && !self.w[x][y][z].is_zero() {
                    return false;
                }
            }
        }
        true
    }

    /// Merge x-symbol `b` into `a`: probability rows add; where only `b` had
    /// support, its channel rows move over.
    fn merge_x(&mut self, a: usize, b: usize) {
        for y in 0..self.ny() {
            if self.p[a][y].is_zero() && !self.p[b][y].is_zero() {
                let row = self.w[b][y].clone();
                self.w[a][y] = row;
            }
            let add = self.p[b][y].clone();
            self.p[a][y] += add;
        }
        self.p.remove(b);
        self.w.remove(b);
        self.x_labels.remove(b);
    }

    fn merge_y(&mut self, a: usize, b: usize) {
        for x in 0..self.nx() {
            if self.p[x][a].is_zero() && !self.p[x][b].is_zero() {
                let row = self.w[x][b].clone();
                self.w[x][a] = row;
            }
            let add = self.p[x][b].clone();
            self.p[x][a] += add;
            self.p[x].remove(b);
            self.w[x].remove(b);
        }
        self.y_labels.remove(b);
    }

    /// Merge z-symbol `b` into `a` by adding columns (covers both the
    /// proportional case and the zero-column drop).
    fn merge_z(&mut self, a: usize, b: usize) {
        for x in 0..self.nx() {
            for y in 0..self.ny() {
                let add = self.w[x][y][b].clone();
                self.w[x][y][a] += add;
                self.w[x][y].remove(b);
            }
        }
        self.z_labels.remove(b);
    }

    fn into_problem(self) -> Result<Problem, InfoError> {
        let x = Var::new(crate::prob::var_names::X, Alphabet::new(self.x_labels)?);
        let y = Var::new(crate::prob::var_names::Y, Alphabet::new(self.y_labels)?);
        let z = Var::new(crate::prob::var_names::Z, Alphabet::new(self.z_labels)?);
        let mut weights = Vec::new();
        for (xi, row) in self.p.iter().enumerate() {
            for (yi, weight) in row.iter().enumerate() {
                if !weight.is_zero() {
                    weights.push((vec![xi as u32, yi as u32], weight.clone()));
                }
            }
        }
        let input = JointDist::new(vec![x.clone(), y.clone()], weights)?;
        let rows = self
            .w
            .iter()
            .flat_map(|row| row.iter().cloned())
            .collect::<Vec<_>>();
        let channel = Channel::new(x, y, z, rows)?;
        Ok(Problem::new(input, channel)?)
    }
}

/// Reduce a problem to normal form by repeatedly merging interchangeable
/// input symbols and proportional output symbols (dropping zero-probability
/// symbols along the way). The returned maps send each original symbol to its
/// class representative; the reduction is idempotent.
pub fn normal_form(problem: &Problem) -> Result<NormalFormMap, InfoError> {
    let mut work = Work::from_problem(problem)?;
    // Identity-seeded maps into the *current* working alphabets; merges keep
    // them up to date by remapping.
    let mut x_map: Vec<u32> = (0..work.nx() as u32).collect();
    let mut y_map: Vec<u32> = (0..work.ny() as u32).collect();
    let mut z_map: Vec<u32> = (0..work.nz() as u32).collect();
    let mut changed = false;

    let remap = |map: &mut Vec<u32>, a: usize, b: usize| {
        for slot in map.iter_mut() {
            if *slot as usize == b {
                *slot = a as u32;
            } else if (*slot as usize) > b {
                *slot -= 1;
            }
        }
    };

    loop {
        // Zero-probability inputs merge into symbol 0 (the relations hold
        // vacuously for them); the merge only removes an all-zero row.
        if let Some(x) =
            (0..work.nx()).find(|&x| work.x_marginal(x).is_zero() && work.nx() > 1)
        {
            let a = usize::from(x == 0);
            work.merge_x(a.min(x), a.max(x));
            remap(&mut x_map, a.min(x), a.max(x));
            changed = true;
            continue;
        }
        if let Some(y) =
            (0..work.ny()).find(|&y| work.y_marginal(y).is_zero() && work.ny() > 1)
        {
            let a = usize::from(y == 0);
            work.merge_y(a.min(y), a.max(y));
            remap(&mut y_map, a.min(y), a.max(y));
            changed = true;
            continue;
        }
        if let Some(z) =
            (0..work.nz()).find(|&z| work.z_column_is_zero(z) && work.nz() > 1)
        {
            let a = usize::from(z == 0);
            work.merge_z(a.min(z), a.max(z));
            remap(&mut z_map, a.min(z), a.max(z));
            changed = true;
            continue;
        }

        let mut merged = false;
        'x_scan: for a in 0..work.nx() {
            for b in a + 1..work.nx() {
                if work.x_equivalent(a, b) {
                    work.merge_x(a, b);
                    remap(&mut x_map, a, b);
                    merged = true;
                    break 'x_scan;
                }
            }
        }
        if merged {
            changed = true;
            continue;
        }
        'y_scan: for a in 0..work.ny() {
            for b in a + 1..work.ny() {
                if work.y_equivalent(a, b) {
                    work.merge_y(a, b);
                    remap(&mut y_map, a, b);
                    merged = true;
                    break 'y_scan;
                }
            }
        }
        if merged {
            changed = true;
            continue;
        }
        'z_scan: for a in 0..work.nz() {
            for b in a + 1..work.nz() {
                if work.z_proportional(a, b) {
                    work.merge_z(a, b);
                    remap(&mut z_map, a, b);
                    merged = true;
                    break 'z_scan;
                }
            }
        }
        if merged {
            changed = true;
            continue;
        }
        break;
    }

    Ok(NormalFormMap { x_map, y_map, z_map, reduced: work.into_problem()?, changed })
}

/// Result of reducing a triple law to normal form. Dropped (zero-probability)
/// symbols map to `None`; merged symbols map to their representative.
#[derive(Clone, Debug)]
pub struct XyzNormalForm {
    pub x_map: Vec<Option<u32>>,
    pub y_map: Vec<Option<u32>>,
    pub z_map: Vec<Option<u32>>,
    pub reduced: JointDist,
    pub changed: bool,
}

/// Reduce a three-variable law to normal form: drop zero-probability symbols
/// and merge symbols whose slices are exactly proportional, on each of the
/// three axes, to a fixpoint. Idempotent.
pub fn normal_form_xyz(dist: &JointDist) -> Result<XyzNormalForm, InfoError> {
    assert_eq!(dist.vars().len(), 3, "triple normal form needs exactly three variables");
    let sizes = [
        dist.vars()[0].alphabet.len(),
        dist.vars()[1].alphabet.len(),
        dist.vars()[2].alphabet.len(),
    ];
    // Dense cube of weights.
    let mut labels: [Vec<String>; 3] = [
        dist.vars()[0].alphabet.symbols().to_vec(),
        dist.vars()[1].alphabet.symbols().to_vec(),
        dist.vars()[2].alphabet.symbols().to_vec(),
    ];
    let mut cube: Vec<Vec<Vec<Rat>>> =
        vec![vec![vec![Rat::zero(); sizes[2]]; sizes[1]]; sizes[0]];
    for (key, w) in dist.atoms() {
        cube[key[0] as usize][key[1] as usize][key[2] as usize] = w.clone();
    }
    let mut maps: [Vec<Option<u32>>; 3] = [
        (0..sizes[0] as u32).map(Some).collect(),
        (0..sizes[1] as u32).map(Some).collect(),
        (0..sizes[2] as u32).map(Some).collect(),
    ];
    let mut changed = false;

    let slice = |cube: &Vec<Vec<Vec<Rat>>>, axis: usize, i: usize| -> Vec<Rat> {
        let mut out = Vec::new();
        match axis {
            0 => {
                for row in &cube[i] {
                    out.extend(row.iter().cloned());
                }
            }
            1 => {
                for plane in cube {
                    out.extend(plane[i].iter().cloned());
                }
            }
            _ => {
                for plane in cube {
                    for row in plane {
                        out.push(row[i].clone());
                    }
                }
            }
        }
        out
    };

    let axis_len = |cube: &Vec<Vec<Vec<Rat>>>, axis: usize| -> usize {
        match axis {
            0 => cube.len(),
            1 => cube[0].len(),
            _ => cube[0][0].len(),
        }
    };

    // Remove index `i` along `axis`, optionally adding its slice into `into`.
    let remove = |cube: &mut Vec<Vec<Vec<Rat>>>, axis: usize, i: usize, into: Option<usize>| {
        match axis {
            0 => {
                if let Some(a) = into {
                    let src = cube[i].clone();
                    for (y, row) in src.iter().enumerate() {
                        for (z, w) in row.iter().enumerate() {
                            cube[a][y][z] += w;
                        }
                    }
                }
                cube.remove(i);
            }
            1 => {
                for plane in cube.iter_mut() {
                    if let Some(a) = into {
                        let src = plane[i].clone();
                        for (z, w) in src.iter().enumerate() {
                            plane[a][z] += w;
                        }
                    }
                    plane.remove(i);
                }
            }
            _ => {
                for plane in cube.iter_mut() {
                    for row in plane.iter_mut() {
                        if let Some(a) = into {
                            let w = row[i].clone();
                            row[a] += w;
                        }
                        row.remove(i);
                    }
                }
            }
        }
    };

    let update_map = |map: &mut Vec<Option<u32>>, removed: usize, into: Option<usize>| {
        for slot in map.iter_mut() {
            match slot {
                Some(v) if *v as usize == removed => {
                    *slot = into.map(|a| a as u32);
                }
                Some(v) if (*v as usize) > removed => *v -= 1,
                _ => {}
            }
        }
    };

    let proportional = |a: &[Rat], b: &[Rat]| -> bool {
        let mut c: Option<Rat> = None;
        for (wa, wb) in a.iter().zip(b) {
            match (&c, wa.is_zero(), wb.is_zero()) {
                (_, true, true) => {}
                (_, true, false) | (_, false, true) => return false,
                (None, false, false) => c = Some(wa / wb),
                (Some(c), false, false) => {
                    if wa != &(c * wb) {
                        return false;
                    }
                }
            }
        }
        true
    };

    'outer: loop {
        for axis in 0..3 {
            let n = axis_len(&cube, axis);
            // Drop zero-probability symbols.
            for i in 0..n {
                if slice(&cube, axis, i).iter().all(Rat::is_zero) {
                    remove(&mut cube, axis, i, None);
                    update_map(&mut maps[axis], i, None);
                    labels[axis].remove(i);
                    changed = true;
                    continue 'outer;
                }
            }
            // Merge proportional slices.
            for a in 0..n {
                for b in a + 1..n {
                    if proportional(&slice(&cube, axis, a), &slice(&cube, axis, b)) {
                        remove(&mut cube, axis, b, Some(a));
                        update_map(&mut maps[axis], b, Some(a));
                        labels[axis].remove(b);
                        changed = true;
                        continue 'outer;
                    }
                }
            }
        }
        break;
    }

    let vars: Vec<Var> = (0..3)
        .map(|i| Ok(Var::new(&dist.vars()[i].name, Alphabet::new(labels[i].clone())?)))
        .collect::<Result<_, crate::prob::ProbError>>()?;
    let mut weights = Vec::new();
    for (x, plane) in cube.iter().enumerate() {
        for (y, row) in plane.iter().enumerate() {
            for (z, w) in row.iter().enumerate() {
                if !w.is_zero() {
                    weights.push((vec![x as u32, y as u32, z as u32], w.clone()));
                }
            }
        }
    }
    let [x_map, y_map, z_map] = maps;
    Ok(XyzNormalForm {
        x_map,
        y_map,
        z_map,
        reduced: JointDist::new(vars, weights)?,
        changed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::rat;

    fn bit_var(name: &str) -> Var {
        Var::new(name, Alphabet::from_labels(&["0", "1"]).unwrap())
    }

    fn and_problem() -> Problem {
        let x = bit_var("X");
        let y = bit_var("Y");
        let z = bit_var("Z");
        let ch = Channel::deterministic(x.clone(), y.clone(), z, |a, b| a & b).unwrap();
        Problem::new(JointDist::uniform(vec![x, y]).unwrap(), ch).unwrap()
    }

    #[test]
    fn and_problem_is_already_normal() {
        let nf = normal_form(&and_problem()).unwrap();
        assert!(nf.is_identity());
        assert_eq!(nf.x_map, vec![0, 1]);
        assert_eq!(nf.reduced.x_alphabet().len(), 2);
    }

    #[test]
    fn ignored_input_collapses() {
        // f(x, y) = x: the two y-symbols are interchangeable.
        let x = bit_var("X");
        let y = bit_var("Y");
        let z = bit_var("Z");
        let ch = Channel::deterministic(x.clone(), y.clone(), z, |a, _| a).unwrap();
        let p = Problem::new(JointDist::uniform(vec![x, y]).unwrap(), ch).unwrap();
        let nf = normal_form(&p).unwrap();
        assert!(nf.changed);
        assert_eq!(nf.reduced.y_alphabet().len(), 1);
        assert_eq!(nf.y_map, vec![0, 0]);
        assert_eq!(nf.reduced.x_alphabet().len(), 2);
        // Merged input keeps total probability.
        assert_eq!(nf.reduced.input().prob_of(&[0, 0]), rat(1, 2));
        // Idempotent.
        assert!(normal_form(&nf.reduced).unwrap().is_identity());
    }

    #[test]
    fn proportional_outputs_merge() {
        // A randomized channel whose outputs 1 and 2 have proportional
        // columns (c = 1 here after making them equal halves of output 0's
        // complement): z=1 and z=2 both occur with probability 1/4
        // regardless of input.
        let x = bit_var("X");
        let y = bit_var("Y");
        let z = Var::new("Z", Alphabet::from_labels(&["0", "1", "2"]).unwrap());
        let rows = vec![vec![rat(1, 2), rat(1, 4), rat(1, 4)]; 4];
        let ch = Channel::new(x.clone(), y.clone(), z, rows).unwrap();
        let p = Problem::new(JointDist::uniform(vec![x, y]).unwrap(), ch).unwrap();
        let nf = normal_form(&p).unwrap();
        assert!(nf.changed);
        // Everything collapses: inputs are interchangeable too.
        assert_eq!(nf.reduced.z_alphabet().len(), 1);
        assert_eq!(nf.reduced.x_alphabet().len(), 1);
        assert!(normal_form(&nf.reduced).unwrap().is_identity());
    }

    #[test]
    fn zero_probability_input_dropped() {
        let x = Var::new("X", Alphabet::from_labels(&["0", "1", "dead"]).unwrap());
        let y = bit_var("Y");
        let z = bit_var("Z");
        let ch =
            Channel::deterministic(x.clone(), y.clone(), z, |a, b| u32::from(a == 1) & b)
                .unwrap();
        let input = JointDist::new(
            vec![x, y],
            vec![
                (vec![0, 0], rat(1, 4)),
                (vec![0, 1], rat(1, 4)),
                (vec![1, 0], rat(1, 4)),
                (vec![1, 1], rat(1, 4)),
            ],
        )
        .unwrap();
        let p = Problem::new(input, ch).unwrap();
        let nf = normal_form(&p).unwrap();
        assert!(nf.changed);
        assert_eq!(nf.reduced.x_alphabet().len(), 2);
        assert_eq!(nf.x_map[2], 0); // dead symbol absorbed into class 0
    }

    fn triple(atoms: Vec<(Vec<u32>, Rat)>, sizes: (usize, usize, usize)) -> JointDist {
        JointDist::new(
            vec![
                Var::new("X", Alphabet::numeric(sizes.0).unwrap()),
                Var::new("Y", Alphabet::numeric(sizes.1).unwrap()),
                Var::new("Z", Alphabet::numeric(sizes.2).unwrap()),
            ],
            atoms,
        )
        .unwrap()
    }

    #[test]
    fn and_triple_is_normal() {
        let d = triple(
            vec![
                (vec![0, 0, 0], rat(1, 4)),
                (vec![0, 1, 0], rat(1, 4)),
                (vec![1, 0, 0], rat(1, 4)),
                (vec![1, 1, 1], rat(1, 4)),
            ],
            (2, 2, 2),
        );
        let nf = normal_form_xyz(&d).unwrap();
        assert!(!nf.changed);
        assert!(nf.reduced.same_distribution(&d));
    }

    #[test]
    fn zero_probability_symbol_removed() {
        let d = triple(
            vec![
                (vec![0, 0, 0], rat(1, 2)),
                (vec![2, 1, 1], rat(1, 2)), // x=1 never appears
            ],
            (3, 2, 2),
        );
        let nf = normal_form_xyz(&d).unwrap();
        assert!(nf.changed);
        assert_eq!(nf.x_map, vec![Some(0), None, Some(1)]);
        assert_eq!(nf.reduced.vars()[0].alphabet.len(), 2);
    }

    #[test]
    fn proportional_x_slices_merge() {
        // Rows x=0 and x=2 are proportional (factor 2); they merge.
        let d = triple(
            vec![
                (vec![0, 0, 0], rat(1, 8)),
                (vec![0, 1, 1], rat(1, 8)),
                (vec![2, 0, 0], rat(1, 4)),
                (vec![2, 1, 1], rat(1, 4)),
                (vec![1, 0, 1], rat(1, 4)),
            ],
            (3, 2, 2),
        );
        let nf = normal_form_xyz(&d).unwrap();
        assert!(nf.changed);
        assert_eq!(nf.x_map, vec![Some(0), Some(1), Some(0)]);
        assert_eq!(nf.reduced.prob_of(&[0, 0, 0]), rat(3, 8));
        // Idempotent.
        assert!(!normal_form_xyz(&nf.reduced).unwrap().changed);
    }
}
