//! Correlated multi-secret sharing on the triangle, and secure sampling.
//!
//! A dealer holds a secret triple `(X, Y, Z)` and deals one share per edge
//! of the triangle — `M12`, `M23`, `M31` — so that every vertex recovers
//! its own secret from its two incident shares (Alice gets `X` from
//! `M12, M31`; Bob gets `Y` from `M12, M23`; Charlie gets `Z` from
//! `M23, M31`) while the share pair reveals nothing about the other two
//! secrets beyond the vertex's own. This module provides:
//!
//! * [`CmssScheme`] — an explicit dealer: a secret law plus a conditional
//!   share table, with [`verify_cmss`] checking all six correctness and
//!   privacy conditions exactly.
//! * [`protocol_to_cmss`] — the reduction from interactive secure
//!   computation: a perfectly secure protocol's transcripts, dealt as
//!   shares, form a scheme for the transcript-induced secret triple
//!   (reduced to normal form first).
//! * [`build_and_cmss`] — a three-symbol scheme for the AND triple whose
//!   shares are each uniform over three values, beating the `log 6`
//!   transcript entropy that any interactive protocol needs on the
//!   Alice–Bob link.
//! * [`cmss_bounds`] — share-entropy lower bounds, strengthened by
//!   searching over switched secret laws when the support allows it.
//! * [`sampling_bounds`] — transcript-entropy lower bounds for securely
//!   sampling a triple with no inputs.

use std::collections::BTreeMap;

use num::{One, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::bounds::dense::{entropy, pair_components};
use crate::bounds::{
    link_from_row_results, link_from_rows, row_constant, row_single, BoundReport, BoundsError,
    LinkBound, OptimizerConfig, SimplexObjective, Term,
};
use crate::info::{normal_form_xyz, residual_information, InfoError};
use crate::prob::{var_names, Alphabet, JointDist, ProbError, Rat, Var};
use crate::protocol::TranscriptDist;

#[derive(Debug, Error)]
pub enum CmssError {
    #[error(transparent)]
    Prob(#[from] ProbError),
    #[error(transparent)]
    Info(#[from] InfoError),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
    #[error("secret distribution must have exactly three variables, got {0}")]
    SecretArity(usize),
    #[error("secret variable {0} collides with a share name")]
    NameClash(String),
    #[error("share kernel {0}")]
    BadKernel(String),
    #[error("source protocol is not perfectly private: {0}")]
    InsecureSource(String),
}

/// Conditional share table: for each secret triple `(x, y, z)`, the dealt
/// share tuples `(m12, m23, m31)` with their probabilities.
pub type ShareKernel = BTreeMap<[u32; 3], Vec<([u32; 3], Rat)>>;

const SHARE_NAMES: [&str; 3] = [var_names::M12, var_names::M23, var_names::M31];

/// A dealer scheme: a secret law together with an explicit conditional
/// share table (no interaction; the dealer samples the share tuple from
/// the row of the realized secrets).
#[derive(Clone, Debug)]
pub struct CmssScheme {
    secrets: JointDist,
    share_alphabets: [Alphabet; 3],
    kernel: ShareKernel,
}

impl CmssScheme {
    /// Validates that the secret law has three variables whose names do not
    /// collide with the share names, that every positive-probability secret
    /// triple has a kernel row, and that each row is a probability
    /// distribution over in-range share tuples.
    pub fn new(
        secrets: JointDist,
        share_alphabets: [Alphabet; 3],
        kernel: ShareKernel,
    ) -> Result<Self, CmssError> {
        if secrets.vars().len() != 3 {
            return Err(CmssError::SecretArity(secrets.vars().len()));
        }
        for v in secrets.vars() {
            if SHARE_NAMES.contains(&v.name.as_str()) {
                return Err(CmssError::NameClash(v.name.clone()));
            }
        }
        for (key, _) in secrets.atoms() {
            let triple = [key[0], key[1], key[2]];
            let row = kernel.get(&triple).ok_or_else(|| {
                CmssError::BadKernel(format!(
                    "misses secret triple ({},{},{})",
                    key[0], key[1], key[2]
                ))
            })?;
            let mut total = Rat::zero();
            for (m, p) in row {
                if p < &Rat::zero() {
                    return Err(CmssError::BadKernel("has a negative weight".into()));
                }
                for (i, &mi) in m.iter().enumerate() {
                    if mi as usize >= share_alphabets[i].len() {
                        return Err(CmssError::BadKernel(format!(
                            "references symbol {} outside the {} alphabet",
                            mi, SHARE_NAMES[i]
                        )));
                    }
                }
                total += p;
            }
            if !total.is_one() {
                return Err(CmssError::BadKernel(format!(
                    "row for ({},{},{}) sums to {}",
                    key[0], key[1], key[2], total
                )));
            }
        }
        Ok(CmssScheme { secrets, share_alphabets, kernel })
    }

    pub fn secrets(&self) -> &JointDist {
        &self.secrets
    }

    pub fn share_alphabets(&self) -> &[Alphabet; 3] {
        &self.share_alphabets
    }

    /// Joint law of secrets and shares:
    /// `p(x,y,z) · k(m12,m23,m31 | x,y,z)`, exactly.
    pub fn full_joint(&self) -> Result<JointDist, CmssError> {
        let mut vars: Vec<Var> = self.secrets.vars().to_vec();
        for (name, alphabet) in SHARE_NAMES.iter().zip(&self.share_alphabets) {
            vars.push(Var::new(name, alphabet.clone()));
        }
        let mut atoms: BTreeMap<Vec<u32>, Rat> = BTreeMap::new();
        for (key, w) in self.secrets.atoms() {
            let row = &self.kernel[&[key[0], key[1], key[2]]];
            for (m, p) in row {
                if p.is_zero() {
                    continue;
                }
                let full = vec![key[0], key[1], key[2], m[0], m[1], m[2]];
                *atoms.entry(full).or_insert_with(Rat::zero) += w * p;
            }
        }
        Ok(JointDist::new(vars, atoms.into_iter().collect())?)
    }

    /// Share entropies `[H(M12), H(M23), H(M31)]` in bits.
    pub fn share_entropies(&self) -> [f64; 3] {
        let mut marginals: [BTreeMap<u32, Rat>; 3] =
            [BTreeMap::new(), BTreeMap::new(), BTreeMap::new()];
        for (key, w) in self.secrets.atoms() {
            let row = &self.kernel[&[key[0], key[1], key[2]]];
            for (m, p) in row {
                if p.is_zero() {
                    continue;
                }
                let wp = w * p;
                for (marginal, &mi) in marginals.iter_mut().zip(m.iter()) {
                    *marginal.entry(mi).or_insert_with(Rat::zero) += &wp;
                }
            }
        }
        let mut out = [0.0; 3];
        for (slot, marginal) in out.iter_mut().zip(&marginals) {
            let dense: Vec<f64> =
                marginal.values().map(|r| r.to_f64().unwrap_or(0.0)).collect();
            *slot = entropy(&dense);
        }
        out
    }
}

/// Outcome of the six exact checks on a dealer scheme.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct CmssReport {
    /// `X` is a function of `(M12, M31)` on the support.
    pub correctness_alice: bool,
    /// `Y` is a function of `(M12, M23)` on the support.
    pub correctness_bob: bool,
    /// `Z` is a function of `(M23, M31)` on the support.
    pub correctness_charlie: bool,
    /// `I(M12, M31; Y, Z | X) = 0`, exactly.
    pub privacy_alice: bool,
    /// `I(M12, M23; X, Z | Y) = 0`, exactly.
    pub privacy_bob: bool,
    /// `I(M23, M31; X, Y | Z) = 0`, exactly.
    pub privacy_charlie: bool,
}

impl CmssReport {
    pub fn all_pass(&self) -> bool {
        self.correctness_alice
            && self.correctness_bob
            && self.correctness_charlie
            && self.privacy_alice
            && self.privacy_bob
            && self.privacy_charlie
    }
}

/// Checks, in exact rational arithmetic, that every vertex reconstructs its
/// secret from its two incident shares (a support scan for determinism) and
/// that each vertex's share pair is conditionally independent of the other
/// two secrets given its own (an exact factorization test).
pub fn verify_cmss(scheme: &CmssScheme) -> Result<CmssReport, CmssError> {
    let full = scheme.full_joint()?;
    let names: Vec<String> =
        scheme.secrets.vars().iter().map(|v| v.name.clone()).collect();
    let (sx, sy, sz) = (names[0].as_str(), names[1].as_str(), names[2].as_str());
    let (m12, m23, m31) = (var_names::M12, var_names::M23, var_names::M31);
    Ok(CmssReport {
        correctness_alice: determined(&full, sx, &[m12, m31])?,
        correctness_bob: determined(&full, sy, &[m12, m23])?,
        correctness_charlie: determined(&full, sz, &[m23, m31])?,
        privacy_alice: full.is_conditionally_independent(&[m12, m31], &[sy, sz], &[sx])?,
        privacy_bob: full.is_conditionally_independent(&[m12, m23], &[sx, sz], &[sy])?,
        privacy_charlie: full.is_conditionally_independent(&[m23, m31], &[sx, sy], &[sz])?,
    })
}

/// Whether `target` takes a single value on each support slice of `given`.
fn determined(joint: &JointDist, target: &str, given: &[&str; 2]) -> Result<bool, CmssError> {
    let tpos = joint.positions(&[target])?[0];
    let gpos = joint.positions(given)?;
    let mut seen: BTreeMap<(u32, u32), u32> = BTreeMap::new();
    for (key, _) in joint.atoms() {
        let g = (key[gpos[0]], key[gpos[1]]);
        let t = key[tpos];
        match seen.get(&g) {
            Some(&prev) if prev != t => return Ok(false),
            _ => {
                seen.insert(g, t);
            }
        }
    }
    Ok(true)
}

/// A dealer scheme derived from a protocol's transcript distribution.
#[derive(Clone, Debug)]
pub struct CmssReduction {
    pub scheme: CmssScheme,
    /// Verification of the derived scheme; always all-pass (the reduction
    /// fails otherwise).
    pub report: CmssReport,
    /// True when the secret triple had to be reduced to normal form
    /// (zero-probability symbols dropped, proportional slices merged)
    /// before the shares could determine each secret.
    pub normal_form_applied: bool,
}

/// The reduction from interactive computation to a dealer: the transcripts
/// of a perfectly private protocol, dealt as shares, form a scheme for the
/// triple `(X, Y, Z)` the protocol induces.
///
/// The secret triple is reduced to normal form first. Merging is sound:
/// merged symbols have proportional slices, so the mixture weights inside a
/// merged class do not depend on the remaining coordinates and the privacy
/// factorizations survive. Requires the source to satisfy all three privacy
/// conditions exactly; fails with [`CmssError::InsecureSource`] otherwise.
pub fn protocol_to_cmss(td: &TranscriptDist) -> Result<CmssReduction, CmssError> {
    let joint = &td.joint;
    let vertex_checks: [(&str, [&str; 2], [&str; 2], &str); 3] = [
        (var_names::X, [var_names::M12, var_names::M31], [var_names::Y, var_names::Z], "Alice"),
        (var_names::Y, [var_names::M12, var_names::M23], [var_names::X, var_names::Z], "Bob"),
        (var_names::Z, [var_names::M23, var_names::M31], [var_names::X, var_names::Y], "Charlie"),
    ];
    for (own, shares, others, who) in vertex_checks {
        if !joint.is_conditionally_independent(&shares, &others, &[own])? {
            return Err(CmssError::InsecureSource(format!("privacy against {who} fails")));
        }
    }

    let p_xyz = joint.marginalize(&[var_names::X, var_names::Y, var_names::Z])?;
    let nf = normal_form_xyz(&p_xyz)?;
    let secrets = nf.reduced.clone();

    let pos = joint.positions(&[
        var_names::X,
        var_names::Y,
        var_names::Z,
        var_names::M12,
        var_names::M23,
        var_names::M31,
    ])?;
    let mut weights: BTreeMap<([u32; 3], [u32; 3]), Rat> = BTreeMap::new();
    for (key, w) in joint.atoms() {
        let map = |m: &[Option<u32>], i: usize| {
            m[key[pos[i]] as usize].expect("positive-probability symbol survives reduction")
        };
        let s = [map(&nf.x_map, 0), map(&nf.y_map, 1), map(&nf.z_map, 2)];
        let m = [key[pos[3]], key[pos[4]], key[pos[5]]];
        *weights.entry((s, m)).or_insert_with(Rat::zero) += w;
    }
    let mut kernel: ShareKernel = BTreeMap::new();
    for ((s, m), w) in weights {
        let denom = secrets.prob_of(&s);
        kernel.entry(s).or_default().push((m, w / denom));
    }

    let share_alphabet = |name: &str| -> Result<Alphabet, CmssError> {
        let p = joint.positions(&[name])?[0];
        Ok(joint.vars()[p].alphabet.clone())
    };
    let scheme = CmssScheme::new(
        secrets,
        [
            share_alphabet(var_names::M12)?,
            share_alphabet(var_names::M23)?,
            share_alphabet(var_names::M31)?,
        ],
        kernel,
    )?;
    let report = verify_cmss(&scheme)?;
    if !report.all_pass() {
        return Err(CmssError::InsecureSource(
            "the derived shares do not pass scheme verification".into(),
        ));
    }
    Ok(CmssReduction { scheme, report, normal_form_applied: nf.changed })
}

/// The three-symbol scheme for the AND triple (`X, Y` independent uniform
/// bits, `Z = X ∧ Y`): the dealer draws a uniform random permutation
/// `(α, β, γ)` of `{0, 1, 2}` and deals `M12 = α`, `M23 = α` if `Y = 1`
/// else `γ`, and `M31 = α` if `X = 1` else `β`. A vertex's secret is 1
/// exactly when its two shares agree, and every share is uniform over
/// three symbols, so all share entropies are `log 3` — strictly below the
/// `log 6` any interactive protocol must put on the Alice–Bob link.
pub fn build_and_cmss() -> CmssScheme {
    let bit = Alphabet::new(vec!["0".into(), "1".into()]).expect("valid alphabet");
    let three =
        Alphabet::new(vec!["0".into(), "1".into(), "2".into()]).expect("valid alphabet");
    let quarter = Rat::new(1.into(), 4.into());
    let sixth = Rat::new(1.into(), 6.into());
    let secrets = JointDist::new(
        vec![
            Var::new(var_names::X, bit.clone()),
            Var::new(var_names::Y, bit.clone()),
            Var::new(var_names::Z, bit),
        ],
        vec![
            (vec![0, 0, 0], quarter.clone()),
            (vec![0, 1, 0], quarter.clone()),
            (vec![1, 0, 0], quarter.clone()),
            (vec![1, 1, 1], quarter),
        ],
    )
    .expect("the AND triple is a valid distribution");

    let perms: [[u32; 3]; 6] =
        [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut kernel: ShareKernel = BTreeMap::new();
    for (x, y) in [(0u32, 0u32), (0, 1), (1, 0), (1, 1)] {
        let mut row: BTreeMap<[u32; 3], Rat> = BTreeMap::new();
        for [alpha, beta, gamma] in perms {
            let m12 = alpha;
            let m23 = if y == 1 { alpha } else { gamma };
            let m31 = if x == 1 { alpha } else { beta };
            *row.entry([m12, m23, m31]).or_insert_with(Rat::zero) += &sixth;
        }
        kernel.insert([x, y, x & y], row.into_iter().collect());
    }
    CmssScheme::new(secrets, [three.clone(), three.clone(), three], kernel)
        .expect("the AND scheme is well-formed")
}

// ---------------------------------------------------------------------------
// Share-entropy and sampling lower bounds.
// ---------------------------------------------------------------------------

/// The exact entropic terms of a secret law that the bounds combine.
struct SecretTerms {
    ri_xy: f64,
    ri_xz: f64,
    ri_yz: f64,
    h_xy_z: f64,
    h_yz_x: f64,
    h_xz_y: f64,
}

fn secret_terms(p: &JointDist) -> Result<SecretTerms, CmssError> {
    let v = p.vars();
    let (x, y, z) = (v[0].name.as_str(), v[1].name.as_str(), v[2].name.as_str());
    Ok(SecretTerms {
        ri_xy: residual_information(p, &[x], &[y])?,
        ri_xz: residual_information(p, &[x], &[z])?,
        ri_yz: residual_information(p, &[y], &[z])?,
        h_xy_z: p.entropy(&[x, y], &[z])?,
        h_yz_x: p.entropy(&[y, z], &[x])?,
        h_xz_y: p.entropy(&[x, z], &[y])?,
    })
}

#[derive(Clone, Copy)]
enum PairId {
    Xy,
    Xz,
    Yz,
}

/// A dense triple law with the marginals the switched objectives need.
struct TripleLaw {
    nx: usize,
    ny: usize,
    nz: usize,
    pxy: Vec<f64>,
    pxz: Vec<f64>,
    pyz: Vec<f64>,
    px: Vec<f64>,
    py: Vec<f64>,
    pz: Vec<f64>,
    h_xyz: f64,
}

impl TripleLaw {
    /// `q` is indexed `(x * ny + y) * nz + z`.
    fn new(q: &[f64], nx: usize, ny: usize, nz: usize) -> TripleLaw {
        let mut t = TripleLaw {
            nx,
            ny,
            nz,
            pxy: vec![0.0; nx * ny],
            pxz: vec![0.0; nx * nz],
            pyz: vec![0.0; ny * nz],
            px: vec![0.0; nx],
            py: vec![0.0; ny],
            pz: vec![0.0; nz],
            h_xyz: 0.0,
        };
        for x in 0..nx {
            for y in 0..ny {
                for z in 0..nz {
                    let p = q[(x * ny + y) * nz + z];
                    if p <= 0.0 {
                        continue;
                    }
                    t.pxy[x * ny + y] += p;
                    t.pxz[x * nz + z] += p;
                    t.pyz[y * nz + z] += p;
                    t.px[x] += p;
                    t.py[y] += p;
                    t.pz[z] += p;
                    t.h_xyz -= p * p.log2();
                }
            }
        }
        t
    }

    /// Residual information of a pair at this law, plus whether the pair's
    /// support bipartite graph is connected. Components are recomputed per
    /// candidate because switched laws move the support.
    fn residual(&self, pair: PairId) -> (f64, bool) {
        let (nl, nr, joint, ml, mr) = match pair {
            PairId::Xy => (self.nx, self.ny, &self.pxy, &self.px, &self.py),
            PairId::Xz => (self.nx, self.nz, &self.pxz, &self.px, &self.pz),
            PairId::Yz => (self.ny, self.nz, &self.pyz, &self.py, &self.pz),
        };
        let comp = pair_components(nl, nr, |l, r| joint[l * nr + r] > 0.0);
        let mut gk = 0.0;
        if comp.count > 1 {
            let mut masses = vec![0.0; comp.count];
            for (i, &c) in comp.left.iter().enumerate() {
                masses[c] += ml[i];
            }
            gk = entropy(&masses);
        }
        let mi = entropy(ml) + entropy(mr) - entropy(joint);
        ((mi - gk).max(0.0), comp.count <= 1)
    }

    fn h_xy_given_z(&self) -> f64 {
        self.h_xyz - entropy(&self.pz)
    }

    fn h_yz_given_x(&self) -> f64 {
        self.h_xyz - entropy(&self.px)
    }

    fn h_xz_given_y(&self) -> f64 {
        self.h_xyz - entropy(&self.py)
    }
}

#[derive(Clone, Copy)]
enum Share {
    M12,
    M23,
    M31,
}

impl Share {
    /// The pair whose support graph must stay connected for a switched law
    /// to bound this share: the switch may not disturb what the share's two
    /// endpoints jointly see.
    fn designated_pair(self) -> PairId {
        match self {
            Share::M12 => PairId::Xy,
            Share::M23 => PairId::Yz,
            Share::M31 => PairId::Xz,
        }
    }

    fn fixed_label(self) -> &'static str {
        match self {
            Share::M12 => "max{RI(X;Z), RI(Y;Z)} + H(X,Y|Z) at the secret law",
            Share::M23 => "max{RI(X;Z), RI(X;Y)} + H(Y,Z|X) at the secret law",
            Share::M31 => "max{RI(Y;Z), RI(X;Y)} + H(X,Z|Y) at the secret law",
        }
    }

    fn fixed_value(self, t: &SecretTerms) -> f64 {
        match self {
            Share::M12 => t.ri_xz.max(t.ri_yz) + t.h_xy_z,
            Share::M23 => t.ri_xz.max(t.ri_xy) + t.h_yz_x,
            Share::M31 => t.ri_yz.max(t.ri_xy) + t.h_xz_y,
        }
    }

    fn switched_label(self) -> &'static str {
        match self {
            Share::M12 => {
                "sup over switched secret laws with connected X-Y support: \
                 max{RI(X;Z), RI(Y;Z)} + H(X,Y|Z)"
            }
            Share::M23 => {
                "sup over switched secret laws with connected Y-Z support: \
                 max{RI(X;Z), RI(X;Y)} + H(Y,Z|X)"
            }
            Share::M31 => {
                "sup over switched secret laws with connected X-Z support: \
                 max{RI(Y;Z), RI(X;Y)} + H(X,Z|Y)"
            }
        }
    }

    /// The switched objective at a candidate law; candidates whose
    /// designated pair is disconnected are rejected outright.
    fn objective(self, t: &TripleLaw) -> f64 {
        let (_, connected) = t.residual(self.designated_pair());
        if !connected {
            return f64::NEG_INFINITY;
        }
        match self {
            Share::M12 => {
                let (ri_xz, _) = t.residual(PairId::Xz);
                let (ri_yz, _) = t.residual(PairId::Yz);
                ri_xz.max(ri_yz) + t.h_xy_given_z()
            }
            Share::M23 => {
                let (ri_xz, _) = t.residual(PairId::Xz);
                let (ri_xy, _) = t.residual(PairId::Xy);
                ri_xz.max(ri_xy) + t.h_yz_given_x()
            }
            Share::M31 => {
                let (ri_yz, _) = t.residual(PairId::Yz);
                let (ri_xy, _) = t.residual(PairId::Xy);
                ri_yz.max(ri_xy) + t.h_xz_given_y()
            }
        }
    }
}

/// How far the switched search may roam, determined by the secret law's
/// support. A switched law is only usable if the scheme's kernel still
/// covers its support and the share marginal is unchanged, which holds when
/// the switch preserves the support exactly.
enum Switching {
    /// Full-support secrets: any full-support triple law is admissible.
    FreeTriple,
    /// `p(x,y) > 0` everywhere: any full-support law on `(X, Y)` pushed
    /// through the secret law's fixed conditional `p(z|x,y)` (stored dense,
    /// indexed `(x * ny + y) * nz + z`).
    FixedChannel(Vec<f64>),
    /// Anything else: only the fixed-law rows apply.
    None,
}

fn detect_switching(p: &JointDist, nx: usize, ny: usize, nz: usize) -> Switching {
    if p.support_size() == nx * ny * nz {
        return Switching::FreeTriple;
    }
    let mut pxy = vec![Rat::zero(); nx * ny];
    for (key, w) in p.atoms() {
        pxy[key[0] as usize * ny + key[1] as usize] += w;
    }
    if pxy.iter().any(|w| w.is_zero()) {
        return Switching::None;
    }
    let mut channel = vec![0.0; nx * ny * nz];
    for (key, w) in p.atoms() {
        let xy = key[0] as usize * ny + key[1] as usize;
        channel[xy * nz + key[2] as usize] = (w / &pxy[xy]).to_f64().unwrap_or(0.0);
    }
    Switching::FixedChannel(channel)
}

/// Whether a pair's support graph is connected for every full-support
/// `q(x,y)` pushed through the channel (the `X`–`Y` graph is then complete,
/// so only the pairs involving `Z` can disconnect).
fn channel_pair_connected(channel: &[f64], nx: usize, ny: usize, nz: usize, pair: PairId) -> bool {
    match pair {
        PairId::Xy => true,
        PairId::Yz => {
            pair_components(ny, nz, |y, z| {
                (0..nx).any(|x| channel[(x * ny + y) * nz + z] > 0.0)
            })
            .count
                <= 1
        }
        PairId::Xz => {
            pair_components(nx, nz, |x, z| {
                (0..ny).any(|y| channel[(x * ny + y) * nz + z] > 0.0)
            })
            .count
                <= 1
        }
    }
}

fn joined_symbols(alphabets: &[&Alphabet]) -> Vec<String> {
    let mut out: Vec<String> = vec![String::new()];
    for a in alphabets {
        let mut next = Vec::with_capacity(out.len() * a.len());
        for prefix in &out {
            for s in a.symbols() {
                if prefix.is_empty() {
                    next.push(s.clone());
                } else {
                    next.push(format!("{prefix},{s}"));
                }
            }
        }
        out = next;
    }
    out
}

/// Lower bounds on the three share entropies of any valid scheme for
/// `p_xyz` (variables in the order `X, Y, Z`). The fixed-law rows always
/// apply; when the support allows, each share also gets a strengthened row
/// maximizing the same objective over switched secret laws, rejecting
/// candidates whose designated pair support disconnects. Rows whose search
/// domain exceeds the dimension guard are recorded as skipped.
pub fn cmss_bounds(
    p_xyz: &JointDist,
    config: &OptimizerConfig,
) -> Result<BoundReport, CmssError> {
    if p_xyz.vars().len() != 3 {
        return Err(CmssError::SecretArity(p_xyz.vars().len()));
    }
    let terms = secret_terms(p_xyz)?;
    let v = p_xyz.vars();
    let (nx, ny, nz) = (v[0].alphabet.len(), v[1].alphabet.len(), v[2].alphabet.len());
    let switching = detect_switching(p_xyz, nx, ny, nz);
    let theorem = match switching {
        Switching::None => "share-entropy bounds (at the secret law)",
        _ => "share-entropy bounds (with distribution switching)",
    };

    let share_link = |share: Share| -> Result<LinkBound, CmssError> {
        let fixed = row_constant(share.fixed_label(), share.fixed_value(&terms));
        let mut results = vec![(fixed.label.clone(), Ok(fixed))];
        let mut unavailable: Vec<String> = Vec::new();
        match &switching {
            Switching::FreeTriple => {
                let label = share.switched_label();
                let term = Term {
                    label: label.to_string(),
                    pinned: Vec::new(),
                    names: vec![format!(
                        "q({},{},{})",
                        v[0].name, v[1].name, v[2].name
                    )],
                    symbols: vec![joined_symbols(&[
                        &v[0].alphabet,
                        &v[1].alphabet,
                        &v[2].alphabet,
                    ])],
                    objective: SimplexObjective {
                        blocks: vec![nx * ny * nz],
                        constraint: None,
                        evaluator: Box::new(move |q: &[f64]| {
                            share.objective(&TripleLaw::new(q, nx, ny, nz))
                        }),
                    },
                };
                results.push((label.to_string(), row_single(label, &term, config)));
            }
            Switching::FixedChannel(channel) => {
                let label = share.switched_label();
                if channel_pair_connected(channel, nx, ny, nz, share.designated_pair()) {
                    let w = channel.clone();
                    let term = Term {
                        label: label.to_string(),
                        pinned: vec![format!(
                            "p({}|{},{}) fixed to the secret law's conditional",
                            v[2].name, v[0].name, v[1].name
                        )],
                        names: vec![format!("q({},{})", v[0].name, v[1].name)],
                        symbols: vec![joined_symbols(&[&v[0].alphabet, &v[1].alphabet])],
                        objective: SimplexObjective {
                            blocks: vec![nx * ny],
                            constraint: None,
                            evaluator: Box::new(move |q: &[f64]| {
                                let mut triple = vec![0.0; nx * ny * nz];
                                for xy in 0..nx * ny {
                                    for z in 0..nz {
                                        triple[xy * nz + z] = q[xy] * w[xy * nz + z];
                                    }
                                }
                                share.objective(&TripleLaw::new(&triple, nx, ny, nz))
                            }),
                        },
                    };
                    results.push((label.to_string(), row_single(label, &term, config)));
                } else {
                    unavailable
                        .push(format!("{label} [support disconnected at every candidate]"));
                }
            }
            Switching::None => {}
        }
        let mut link = link_from_row_results(results)?;
        link.skipped.extend(unavailable);
        Ok(link)
    };

    Ok(BoundReport {
        theorem: theorem.into(),
        r12: share_link(Share::M12)?,
        r23: share_link(Share::M23)?,
        r31: share_link(Share::M31)?,
        randomness: None,
        conditions: None,
    })
}

/// Lower bounds on the three transcript entropies of any protocol that
/// securely samples the triple `p_xyz` with no inputs: each link must carry
/// both residual informations toward the opposite vertex plus the
/// conditional entropy of its own endpoints' secrets.
///
/// The triple is reduced to normal form first (recorded in the report's
/// theorem string); without the reduction the formulas can overstate what
/// sampling requires — e.g. a triple of independent secrets collapses to a
/// point and genuinely needs no communication at all.
pub fn sampling_bounds(p_xyz: &JointDist) -> Result<BoundReport, CmssError> {
    if p_xyz.vars().len() != 3 {
        return Err(CmssError::SecretArity(p_xyz.vars().len()));
    }
    let nf = normal_form_xyz(p_xyz)?;
    let law = if nf.changed { &nf.reduced } else { p_xyz };
    let t = secret_terms(law)?;
    let theorem = if nf.changed {
        "secure-sampling transcript bounds (secrets reduced to normal form)"
    } else {
        "secure-sampling transcript bounds"
    };
    let row = |label: &str, value: f64| link_from_rows(vec![row_constant(label, value)]);
    Ok(BoundReport {
        theorem: theorem.into(),
        r12: row(
            "RI(X;Z) + RI(Y;Z) + H(X,Y|Z) at the secret law",
            t.ri_xz + t.ri_yz + t.h_xy_z,
        ),
        r23: row(
            "RI(X;Z) + RI(X;Y) + H(Y,Z|X) at the secret law",
            t.ri_xz + t.ri_xy + t.h_yz_x,
        ),
        r31: row(
            "RI(Y;Z) + RI(X;Y) + H(X,Z|Y) at the secret law",
            t.ri_yz + t.ri_xy + t.h_xz_y,
        ),
        randomness: None,
        conditions: None,
    })
}

#[cfg(test)]
mod tests;
