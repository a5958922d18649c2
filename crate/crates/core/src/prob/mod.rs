//! Exact probability primitives: alphabets, joint distributions, channels,
//! and problem instances.
//!
//! All probability mass is held as arbitrary-precision rationals, atoms are
//! sparse (zero-probability entries are never stored), and structural checks
//! (normalization, conditional independence, support comparisons) are exact.
//! Entropic quantities are computed in bits as `f64`.

mod json;

pub use json::{parse_rational, rational_string};

use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};
use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

/// Exact probability weight.
pub type Rat = BigRational;

/// Convenience constructor for small rational constants.
pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

/// Canonical variable names used throughout the crate.
pub mod var_names {
    pub const X: &str = "X";
    pub const Y: &str = "Y";
    pub const Z: &str = "Z";
    pub const M12: &str = "M12";
    pub const M23: &str = "M23";
    pub const M31: &str = "M31";
}

/// Errors from the probability layer.
#[derive(Debug, thiserror::Error)]
pub enum ProbError {
    #[error("alphabet must be nonempty")]
    EmptyAlphabet,
    #[error("alphabet too large ({0} symbols; limit {max})", max = u32::MAX)]
    AlphabetTooLarge(usize),
    #[error("duplicate symbol `{0}` in alphabet")]
    DuplicateSymbol(String),
    #[error("symbol `{0}` is empty or contains a reserved character (`,` or `|`)")]
    BadSymbol(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("duplicate variable `{0}`")]
    DuplicateVariable(String),
    #[error("variable sets must be disjoint but `{0}` repeats")]
    OverlappingVariables(String),
    #[error("weights must sum to exactly 1 (got {0})")]
    NotNormalized(String),
    #[error("negative weight {0}")]
    NegativeWeight(String),
    #[error("atom index out of range for variable `{0}`")]
    IndexOutOfRange(String),
    #[error("atom has {got} coordinates, expected {expected}")]
    BadArity { got: usize, expected: usize },
    #[error("distribution has no atoms")]
    Empty,
    #[error("size guard exceeded: {actual} atoms would exceed the limit of {limit}")]
    SizeGuard { actual: u128, limit: u128 },
    #[error("channel row for ({0}) does not sum to 1")]
    ChannelRowNotNormalized(String),
    #[error("channel is not deterministic")]
    NotDeterministic,
    #[error("information quantity came out {0}, below the -1e-12 tolerance")]
    NegativeInformation(f64),
    #[error("variables do not match: expected `{expected}`, got `{got}`")]
    VariableMismatch { expected: String, got: String },
    #[error("parse error: {0}")]
    Parse(String),
}

/// Negative values strictly above this tolerance are treated as numerical
/// zeros; anything at or below it is surfaced as an error.
pub const NEG_TOLERANCE: f64 = -1e-12;

fn clip_information(v: f64) -> Result<f64, ProbError> {
    if v < 0.0 {
        if v > NEG_TOLERANCE {
            Ok(0.0)
        } else {
            Err(ProbError::NegativeInformation(v))
        }
    } else {
        Ok(v)
    }
}

/// A finite, ordered set of distinct symbol labels.
///
/// Labels are opaque except for two reserved characters: `,` (joins pair keys
/// in the JSON problem format) and `|` (joins lookup-table keys in the JSON
/// protocol format).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Alphabet {
    symbols: Vec<String>,
    index: HashMap<String, u32>,
}

impl Alphabet {
    pub fn new(symbols: Vec<String>) -> Result<Self, ProbError> {
        if symbols.is_empty() {
            return Err(ProbError::EmptyAlphabet);
        }
        if symbols.len() > u32::MAX as usize {
            return Err(ProbError::AlphabetTooLarge(symbols.len()));
        }
        let mut index = HashMap::with_capacity(symbols.len());
        for (i, s) in symbols.iter().enumerate() {
            if s.is_empty() || s.contains(',') || s.contains('|') {
                return Err(ProbError::BadSymbol(s.clone()));
            }
            if index.insert(s.clone(), i as u32).is_some() {
                return Err(ProbError::DuplicateSymbol(s.clone()));
            }
        }
        Ok(Alphabet { symbols, index })
    }

    pub fn from_labels(labels: &[&str]) -> Result<Self, ProbError> {
        Self::new(labels.iter().map(|s| s.to_string()).collect())
    }

    /// `{0, 1, ..., n-1}` with decimal labels.
    pub fn numeric(n: usize) -> Result<Self, ProbError> {
        Self::new((0..n).map(|i| i.to_string()).collect())
    }

    /// All length-`n` tuples over `self`, labels joined with `-`, in
    /// row-major order (first coordinate most significant).
    pub fn tuples(&self, n: usize) -> Result<Self, ProbError> {
        assert!(n >= 1, "tuple arity must be at least 1");
        let size = (self.len() as u128).checked_pow(n as u32);
        match size {
            Some(s) if s <= u32::MAX as u128 => {}
            _ => return Err(ProbError::AlphabetTooLarge(usize::MAX)),
        }
        let mut symbols = Vec::new();
        let mut idx = vec![0u32; n];
        loop {
            let mut label = String::new();
            for (k, &i) in idx.iter().enumerate() {
                if k > 0 {
                    label.push('-');
                }
                label.push_str(self.symbol(i));
            }
            symbols.push(label);
            // odometer increment
            let mut k = n;
            loop {
                if k == 0 {
                    return Alphabet::new(symbols);
                }
                k -= 1;
                idx[k] += 1;
                if (idx[k] as usize) < self.len() {
                    break;
                }
                idx[k] = 0;
            }
        }
    }

    /// Index of a length-`n` tuple of base indices in [`Alphabet::tuples`].
    pub fn tuple_index(&self, parts: &[u32]) -> u32 {
        let mut acc = 0u64;
        for &p in parts {
            acc = acc * self.len() as u64 + p as u64;
        }
        acc as u32
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn index_of(&self, symbol: &str) -> Option<u32> {
        self.index.get(symbol).copied()
    }

    pub fn symbol(&self, i: u32) -> &str {
        &self.symbols[i as usize]
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }
}

/// A named variable with its alphabet.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Var {
    pub name: String,
    pub alphabet: Alphabet,
}

impl Var {
    pub fn new(name: &str, alphabet: Alphabet) -> Self {
        Var { name: name.to_string(), alphabet }
    }
}

/// An exact joint probability distribution over a tuple of named variables.
///
/// Atoms are sparse: only strictly positive weights are stored, and the
/// stored weights sum to exactly 1. Variable order is fixed at construction
/// and preserved by [`JointDist::marginalize`], which keeps the serialization
/// of derived distributions deterministic.
#[derive(Clone, Debug)]
pub struct JointDist {
    vars: Vec<Var>,
    atoms: BTreeMap<Vec<u32>, Rat>,
}

impl JointDist {
    pub fn new(vars: Vec<Var>, weights: Vec<(Vec<u32>, Rat)>) -> Result<Self, ProbError> {
        let mut seen = HashMap::new();
        for v in &vars {
            if seen.insert(v.name.clone(), ()).is_some() {
                return Err(ProbError::DuplicateVariable(v.name.clone()));
            }
        }
        let mut atoms = BTreeMap::new();
        let mut total = Rat::zero();
        for (key, w) in weights {
            if key.len() != vars.len() {
                return Err(ProbError::BadArity { got: key.len(), expected: vars.len() });
            }
            for (i, &k) in key.iter().enumerate() {
                if k as usize >= vars[i].alphabet.len() {
                    return Err(ProbError::IndexOutOfRange(vars[i].name.clone()));
                }
            }
            if w.is_negative() {
                return Err(ProbError::NegativeWeight(w.to_string()));
            }
            if w.is_zero() {
                continue;
            }
            total += &w;
            *atoms.entry(key).or_insert_with(Rat::zero) += w;
        }
        if atoms.is_empty() {
            return Err(ProbError::Empty);
        }
        if !total.is_one() {
            return Err(ProbError::NotNormalized(total.to_string()));
        }
        Ok(JointDist { vars, atoms })
    }

    /// Distribution of a single variable from a dense pmf over its alphabet.
    pub fn single(var: Var, pmf: &[Rat]) -> Result<Self, ProbError> {
        assert_eq!(var.alphabet.len(), pmf.len(), "pmf length must match alphabet");
        let weights =
            pmf.iter().enumerate().map(|(i, w)| (vec![i as u32], w.clone())).collect();
        JointDist::new(vec![var], weights)
    }

    /// Uniform distribution over the full product of the given alphabets.
    pub fn uniform(vars: Vec<Var>) -> Result<Self, ProbError> {
        let total: u128 = vars.iter().map(|v| v.alphabet.len() as u128).product();
        if total > 10_000_000 {
            return Err(ProbError::SizeGuard { actual: total, limit: 10_000_000 });
        }
        let w = Rat::new(BigInt::one(), BigInt::from(total));
        let mut weights = Vec::with_capacity(total as usize);
        let mut key = vec![0u32; vars.len()];
        'outer: loop {
            weights.push((key.clone(), w.clone()));
            let mut k = vars.len();
            loop {
                if k == 0 {
                    break 'outer;
                }
                k -= 1;
                key[k] += 1;
                if (key[k] as usize) < vars[k].alphabet.len() {
                    break;
                }
                key[k] = 0;
            }
        }
        JointDist::new(vars, weights)
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    pub fn var_names(&self) -> Vec<&str> {
        self.vars.iter().map(|v| v.name.as_str()).collect()
    }

    pub fn var(&self, name: &str) -> Result<&Var, ProbError> {
        self.vars
            .iter()
            .find(|v| v.name == name)
            .ok_or_else(|| ProbError::UnknownVariable(name.to_string()))
    }

    pub fn atoms(&self) -> impl Iterator<Item = (&Vec<u32>, &Rat)> {
        self.atoms.iter()
    }

    pub fn support_size(&self) -> usize {
        self.atoms.len()
    }

    pub fn prob_of(&self, key: &[u32]) -> Rat {
        self.atoms.get(key).cloned().unwrap_or_else(Rat::zero)
    }

    /// Positions of `names` within this distribution's variable order.
    pub fn positions(&self, names: &[&str]) -> Result<Vec<usize>, ProbError> {
        let mut out = Vec::with_capacity(names.len());
        let mut seen = HashMap::new();
        for name in names {
            if seen.insert(*name, ()).is_some() {
                return Err(ProbError::OverlappingVariables(name.to_string()));
            }
            let pos = self
                .vars
                .iter()
                .position(|v| v.name == *name)
                .ok_or_else(|| ProbError::UnknownVariable(name.to_string()))?;
            out.push(pos);
        }
        Ok(out)
    }

    /// Marginal over `keep`, preserving this distribution's variable order
    /// (not the order of `keep`).
    pub fn marginalize(&self, keep: &[&str]) -> Result<JointDist, ProbError> {
        let positions = self.positions(keep)?;
        let mut ordered: Vec<usize> = positions;
        ordered.sort_unstable();
        let vars: Vec<Var> = ordered.iter().map(|&i| self.vars[i].clone()).collect();
        let mut atoms: BTreeMap<Vec<u32>, Rat> = BTreeMap::new();
        for (key, w) in &self.atoms {
            let sub: Vec<u32> = ordered.iter().map(|&i| key[i]).collect();
            *atoms.entry(sub).or_insert_with(Rat::zero) += w;
        }
        Ok(JointDist { vars, atoms })
    }

    fn disjoint_union<'a>(sets: &[&[&'a str]]) -> Result<Vec<&'a str>, ProbError> {
        let mut out = Vec::new();
        let mut seen = HashMap::new();
        for set in sets {
            for name in *set {
                if seen.insert(*name, ()).is_some() {
                    return Err(ProbError::OverlappingVariables(name.to_string()));
                }
                out.push(*name);
            }
        }
        Ok(out)
    }

    /// Shannon entropy `H(of | given)` in bits. The sets must be disjoint.
    pub fn entropy(&self, of: &[&str], given: &[&str]) -> Result<f64, ProbError> {
        if of.is_empty() {
            return Ok(0.0);
        }
        let all = Self::disjoint_union(&[of, given])?;
        let m = self.marginalize(&all)?;
        if given.is_empty() {
            let mut h = 0.0;
            for w in m.atoms.values() {
                let p = w.to_f64().unwrap_or(0.0);
                if p > 0.0 {
                    h -= p * p.log2();
                }
            }
            return clip_information(h);
        }
        let mg = self.marginalize(given)?;
        let gpos = m.positions(given)?;
        let mut h = 0.0;
        for (key, w) in &m.atoms {
            let gkey: Vec<u32> = gpos.iter().map(|&i| key[i]).collect();
            let p = w.to_f64().unwrap_or(0.0);
            let pg = mg.prob_of(&gkey).to_f64().unwrap_or(0.0);
            if p > 0.0 && pg > 0.0 {
                h += p * (pg / p).log2();
            }
        }
        clip_information(h)
    }

    /// Mutual information `I(a ; b | given)` in bits. Sets must be disjoint.
    pub fn mutual_information(
        &self,
        a: &[&str],
        b: &[&str],
        given: &[&str],
    ) -> Result<f64, ProbError> {
        Self::disjoint_union(&[a, b, given])?;
        let ab = Self::disjoint_union(&[a, b])?;
        let v = self.entropy(a, given)? + self.entropy(b, given)? - self.entropy(&ab, given)?;
        clip_information(v)
    }

    /// Exact test of `a ⊥ b | given`: every conditional slice must factor.
    pub fn is_conditionally_independent(
        &self,
        a: &[&str],
        b: &[&str],
        given: &[&str],
    ) -> Result<bool, ProbError> {
        let all = Self::disjoint_union(&[a, b, given])?;
        let m_abg = self.marginalize(&all)?;
        let m_ag = self.marginalize(&Self::disjoint_union(&[a, given])?)?;
        let m_bg = self.marginalize(&Self::disjoint_union(&[b, given])?)?;

        let gpos_abg = m_abg.positions(given)?;
        let gpos_ag = m_ag.positions(given)?;
        let gpos_bg = m_bg.positions(given)?;

        // Support counts: conditioned on each g, the (a, b) support must be
        // the full product of the a-support and the b-support.
        let mut count_ag: HashMap<Vec<u32>, u64> = HashMap::new();
        for key in m_ag.atoms.keys() {
            let g: Vec<u32> = gpos_ag.iter().map(|&i| key[i]).collect();
            *count_ag.entry(g).or_insert(0) += 1;
        }
        let mut count_bg: HashMap<Vec<u32>, u64> = HashMap::new();
        for key in m_bg.atoms.keys() {
            let g: Vec<u32> = gpos_bg.iter().map(|&i| key[i]).collect();
            *count_bg.entry(g).or_insert(0) += 1;
        }
        let mut count_abg: HashMap<Vec<u32>, u64> = HashMap::new();
        for key in m_abg.atoms.keys() {
            let g: Vec<u32> = gpos_abg.iter().map(|&i| key[i]).collect();
            *count_abg.entry(g).or_insert(0) += 1;
        }
        for (g, n_ab) in &count_abg {
            let na = count_ag.get(g).copied().unwrap_or(0);
            let nb = count_bg.get(g).copied().unwrap_or(0);
            if *n_ab != na * nb {
                return Ok(false);
            }
        }

        let mg = if given.is_empty() { None } else { Some(self.marginalize(given)?) };
        // Weight identity on the support: p(a,b,g) * p(g) == p(a,g) * p(b,g).
        // Keys for each marginal are rebuilt in that marginal's own variable
        // order by mapping names to values from the full atom.
        for (key, w) in &m_abg.atoms {
            let gkey: Vec<u32> = gpos_abg.iter().map(|&i| key[i]).collect();
            let mut by_name: HashMap<&str, u32> = HashMap::new();
            for (i, v) in m_abg.vars.iter().enumerate() {
                by_name.insert(v.name.as_str(), key[i]);
            }
            let ag: Vec<u32> = m_ag.vars.iter().map(|v| by_name[v.name.as_str()]).collect();
            let bg: Vec<u32> = m_bg.vars.iter().map(|v| by_name[v.name.as_str()]).collect();
            let p_g = match &mg {
                None => Rat::one(),
                Some(d) => d.prob_of(&gkey),
            };
            if w * &p_g != m_ag.prob_of(&ag) * m_bg.prob_of(&bg) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Product distribution with another over disjoint variable names.
    pub fn product(&self, other: &JointDist) -> Result<JointDist, ProbError> {
        for v in &other.vars {
            if self.vars.iter().any(|w| w.name == v.name) {
                return Err(ProbError::DuplicateVariable(v.name.clone()));
            }
        }
        let mut vars = self.vars.clone();
        vars.extend(other.vars.iter().cloned());
        let mut atoms = BTreeMap::new();
        for (k1, w1) in &self.atoms {
            for (k2, w2) in &other.atoms {
                let mut key = k1.clone();
                key.extend_from_slice(k2);
                atoms.insert(key, w1 * w2);
            }
        }
        Ok(JointDist { vars, atoms })
    }

    /// `n`-fold i.i.d. power: same variable names, tuple alphabets (labels
    /// joined with `-`), weights multiplied coordinatewise.
    ///
    /// Guarded: fails if the support would exceed `max_atoms`.
    pub fn iid_power(&self, n: usize, max_atoms: usize) -> Result<JointDist, ProbError> {
        assert!(n >= 1, "power must be at least 1");
        let support = (self.atoms.len() as u128).checked_pow(n as u32);
        match support {
            Some(s) if s <= max_atoms as u128 => {}
            _ => {
                return Err(ProbError::SizeGuard {
                    actual: support.unwrap_or(u128::MAX),
                    limit: max_atoms as u128,
                })
            }
        }
        let vars: Vec<Var> = self
            .vars
            .iter()
            .map(|v| Ok(Var::new(&v.name, v.alphabet.tuples(n)?)))
            .collect::<Result<_, ProbError>>()?;
        let base: Vec<(&Vec<u32>, &Rat)> = self.atoms.iter().collect();
        let mut atoms: BTreeMap<Vec<u32>, Rat> = BTreeMap::new();
        let mut stack = vec![0usize; n];
        'outer: loop {
            // Assemble the tuple atom from the selected base atoms.
            let mut key = Vec::with_capacity(self.vars.len());
            for (vi, v) in self.vars.iter().enumerate() {
                let parts: Vec<u32> = stack.iter().map(|&s| base[s].0[vi]).collect();
                key.push(v.alphabet.tuple_index(&parts));
            }
            let mut w = Rat::one();
            for &s in &stack {
                w *= base[s].1;
            }
            atoms.insert(key, w);
            let mut k = n;
            loop {
                if k == 0 {
                    break 'outer;
                }
                k -= 1;
                stack[k] += 1;
                if stack[k] < base.len() {
                    break;
                }
                stack[k] = 0;
            }
        }
        Ok(JointDist { vars, atoms })
    }

    /// Exact equality of variables, alphabets, and every atom weight.
    pub fn same_distribution(&self, other: &JointDist) -> bool {
        self.vars == other.vars && self.atoms == other.atoms
    }

    /// Human-readable atom listing (for error messages and reports).
    pub fn describe(&self) -> String {
        let mut s = String::new();
        for (key, w) in &self.atoms {
            let labels: Vec<&str> = key
                .iter()
                .enumerate()
                .map(|(i, &k)| self.vars[i].alphabet.symbol(k))
                .collect();
            let _ = writeln!(s, "({}) -> {}", labels.join(","), w);
        }
        s
    }
}

/// A conditional distribution `p(z | x, y)` with dense rows over `z`.
#[derive(Clone, Debug)]
pub struct Channel {
    x: Var,
    y: Var,
    z: Var,
    /// Row-major: `rows[x * |Y| + y][z]`; each row sums to exactly 1.
    rows: Vec<Vec<Rat>>,
}

impl Channel {
    pub fn new(x: Var, y: Var, z: Var, rows: Vec<Vec<Rat>>) -> Result<Self, ProbError> {
        let expected = x.alphabet.len() * y.alphabet.len();
        if rows.len() != expected {
            return Err(ProbError::BadArity { got: rows.len(), expected });
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != z.alphabet.len() {
                return Err(ProbError::BadArity { got: row.len(), expected: z.alphabet.len() });
            }
            let mut total = Rat::zero();
            for w in row {
                if w.is_negative() {
                    return Err(ProbError::NegativeWeight(w.to_string()));
                }
                total += w;
            }
            if !total.is_one() {
                let xi = (i / y.alphabet.len()) as u32;
                let yi = (i % y.alphabet.len()) as u32;
                return Err(ProbError::ChannelRowNotNormalized(format!(
                    "{},{}",
                    x.alphabet.symbol(xi),
                    y.alphabet.symbol(yi)
                )));
            }
        }
        Ok(Channel { x, y, z, rows })
    }

    /// Deterministic channel from a function on symbol indices.
    pub fn deterministic(
        x: Var,
        y: Var,
        z: Var,
        f: impl Fn(u32, u32) -> u32,
    ) -> Result<Self, ProbError> {
        let mut rows = Vec::with_capacity(x.alphabet.len() * y.alphabet.len());
        for xi in 0..x.alphabet.len() as u32 {
            for yi in 0..y.alphabet.len() as u32 {
                let zi = f(xi, yi);
                if zi as usize >= z.alphabet.len() {
                    return Err(ProbError::IndexOutOfRange(z.name.clone()));
                }
                let mut row = vec![Rat::zero(); z.alphabet.len()];
                row[zi as usize] = Rat::one();
                rows.push(row);
            }
        }
        Channel::new(x, y, z, rows)
    }

    pub fn x(&self) -> &Var {
        &self.x
    }
    pub fn y(&self) -> &Var {
        &self.y
    }
    pub fn z(&self) -> &Var {
        &self.z
    }

    pub fn row(&self, xi: u32, yi: u32) -> &[Rat] {
        &self.rows[xi as usize * self.y.alphabet.len() + yi as usize]
    }

    pub fn prob(&self, xi: u32, yi: u32, zi: u32) -> &Rat {
        &self.row(xi, yi)[zi as usize]
    }

    /// True when every row is a point mass.
    pub fn is_deterministic(&self) -> bool {
        self.rows.iter().all(|row| row.iter().filter(|w| !w.is_zero()).count() == 1)
    }

    /// The output index for `(x, y)` when the channel is deterministic.
    pub fn output_of(&self, xi: u32, yi: u32) -> Result<u32, ProbError> {
        let row = self.row(xi, yi);
        let mut out = None;
        for (zi, w) in row.iter().enumerate() {
            if !w.is_zero() {
                if w.is_one() && out.is_none() {
                    out = Some(zi as u32);
                } else {
                    return Err(ProbError::NotDeterministic);
                }
            }
        }
        out.ok_or(ProbError::NotDeterministic)
    }

    /// Joint distribution over `(X, Y, Z)` induced by an input law over `(X, Y)`.
    pub fn apply(&self, input: &JointDist) -> Result<JointDist, ProbError> {
        let pos = input.positions(&[&self.x.name, &self.y.name])?;
        if input.vars().len() != 2 {
            return Err(ProbError::VariableMismatch {
                expected: format!("{},{}", self.x.name, self.y.name),
                got: input.var_names().join(","),
            });
        }
        let vars = vec![self.x.clone(), self.y.clone(), self.z.clone()];
        let mut weights = Vec::new();
        for (key, w) in input.atoms() {
            let xi = key[pos[0]];
            let yi = key[pos[1]];
            for (zi, wz) in self.row(xi, yi).iter().enumerate() {
                if !wz.is_zero() {
                    weights.push((vec![xi, yi, zi as u32], w * wz));
                }
            }
        }
        JointDist::new(vars, weights)
    }

    /// `n`-fold memoryless extension over tuple alphabets.
    pub fn iid_power(&self, n: usize) -> Result<Channel, ProbError> {
        assert!(n >= 1, "power must be at least 1");
        let x = Var::new(&self.x.name, self.x.alphabet.tuples(n)?);
        let y = Var::new(&self.y.name, self.y.alphabet.tuples(n)?);
        let z = Var::new(&self.z.name, self.z.alphabet.tuples(n)?);
        let xl = self.x.alphabet.len() as u32;
        let yl = self.y.alphabet.len() as u32;
        let zl = self.z.alphabet.len() as u32;
        let decode = |mut i: u32, base: u32| -> Vec<u32> {
            let mut parts = vec![0u32; n];
            for k in (0..n).rev() {
                parts[k] = i % base;
                i /= base;
            }
            parts
        };
        let mut rows = Vec::new();
        for xi in 0..x.alphabet.len() as u32 {
            let xp = decode(xi, xl);
            for yi in 0..y.alphabet.len() as u32 {
                let yp = decode(yi, yl);
                let mut row = vec![Rat::zero(); z.alphabet.len()];
                for (zi, slot) in row.iter_mut().enumerate() {
                    let zp = decode(zi as u32, zl);
                    let mut w = Rat::one();
                    for k in 0..n {
                        w *= self.prob(xp[k], yp[k], zp[k]);
                        if w.is_zero() {
                            break;
                        }
                    }
                    *slot = w;
                }
                rows.push(row);
            }
        }
        Channel::new(x, y, z, rows)
    }
}

/// A computation instance: an input law over `(X, Y)` plus the output channel.
#[derive(Clone, Debug)]
pub struct Problem {
    input: JointDist,
    channel: Channel,
}

/// Default guard on support sizes produced by i.i.d. extension.
pub const IID_ATOM_GUARD: usize = 1_000_000;

impl Problem {
    pub fn new(input: JointDist, channel: Channel) -> Result<Self, ProbError> {
        if input.vars().len() != 2
            || input.vars()[0].name != channel.x.name
            || input.vars()[1].name != channel.y.name
            || input.vars()[0].alphabet != channel.x.alphabet
            || input.vars()[1].alphabet != channel.y.alphabet
        {
            return Err(ProbError::VariableMismatch {
                expected: format!("{},{}", channel.x.name, channel.y.name),
                got: input.var_names().join(","),
            });
        }
        Ok(Problem { input, channel })
    }

    pub fn input(&self) -> &JointDist {
        &self.input
    }

    pub fn channel(&self) -> &Channel {
        &self.channel
    }

    pub fn x_alphabet(&self) -> &Alphabet {
        &self.channel.x.alphabet
    }

    pub fn y_alphabet(&self) -> &Alphabet {
        &self.channel.y.alphabet
    }

    pub fn z_alphabet(&self) -> &Alphabet {
        &self.channel.z.alphabet
    }

    /// Joint law of `(X, Y, Z)` under the problem's own input distribution.
    pub fn joint(&self) -> Result<JointDist, ProbError> {
        self.channel.apply(&self.input)
    }

    /// Replace the input law (same variables and alphabets).
    pub fn with_input(&self, input: JointDist) -> Result<Problem, ProbError> {
        Problem::new(input, self.channel.clone())
    }

    /// True when every `(x, y)` pair has positive probability.
    pub fn input_has_full_support(&self) -> bool {
        self.input.support_size() == self.x_alphabet().len() * self.y_alphabet().len()
    }

    /// True when the input law is a product of its marginals (exact check).
    pub fn input_is_product(&self) -> Result<bool, ProbError> {
        self.input.is_conditionally_independent(
            &[&self.channel.x.name],
            &[&self.channel.y.name],
            &[],
        )
    }

    /// `n`-fold memoryless extension of both the input law and the channel.
    pub fn iid_extend(&self, n: usize) -> Result<Problem, ProbError> {
        let input = self.input.iid_power(n, IID_ATOM_GUARD)?;
        let channel = self.channel.iid_power(n)?;
        Problem::new(input, channel)
    }
}
