//! Deterministic-schedule protocol engine.
//!
//! A protocol is a fixed, finite schedule of rounds between the three users;
//! every round's next-message function is an explicit lookup table keyed by
//! the sender's input (if any), the messages the sender has seen on its two
//! links, and the sender's private randomness. Randomized behavior is modeled
//! entirely through the private randomness alphabets, so a replay is
//! deterministic given `(x, y, r1, r2, r3)` and the whole joint transcript
//! distribution is an exact finite enumeration.

mod json;

use crate::info::{normal_form, InfoError};
use crate::prob::{
    var_names, Alphabet, JointDist, ProbError, Problem, Rat, Var,
};
use num::{BigInt, One, Signed, ToPrimitive, Zero};
use std::collections::BTreeMap;

/// Errors from protocol construction and execution.
#[derive(Debug, thiserror::Error)]
pub enum ProtocolError {
    #[error(transparent)]
    Prob(#[from] ProbError),
    #[error(transparent)]
    Info(#[from] InfoError),
    #[error("round {round}: sender and receiver must differ")]
    SelfLoop { round: usize },
    #[error("round {round}: table entry for key `{key}` is missing")]
    UndefinedTableEntry { round: usize, key: String },
    #[error("output table entry for key `{0}` is missing")]
    UndefinedOutput(String),
    #[error("round {round}: {problem}")]
    BadRound { round: usize, problem: String },
    #[error("output table: {0}")]
    BadOutput(String),
    #[error("randomness of user {user}: {problem}")]
    BadRandomness { user: u8, problem: String },
    #[error("length map violates the Kraft inequality (sum {0} > 1)")]
    KraftViolation(String),
    #[error("enumeration of {actual} replays exceeds the guard of {limit}")]
    SizeGuard { actual: u128, limit: u128 },
    #[error("input distribution does not match the protocol alphabets: {0}")]
    InputMismatch(String),
    #[error("inputs must be independent for this check (I(X;Y) > 0)")]
    DependentInputs,
    #[error("problem is not in normal form: {0}")]
    NotNormalForm(String),
    #[error("bad parameter: {0}")]
    BadParameter(String),
}

/// Replay-enumeration guard.
pub const REPLAY_GUARD: u128 = 10_000_000;

/// The three users. Alice holds `X`, Bob holds `Y`, Charlie outputs `Z`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Party {
    Alice,
    Bob,
    Charlie,
}

impl Party {
    pub const ALL: [Party; 3] = [Party::Alice, Party::Bob, Party::Charlie];

    pub fn index(self) -> usize {
        match self {
            Party::Alice => 0,
            Party::Bob => 1,
            Party::Charlie => 2,
        }
    }

    /// User number as conventionally written (1, 2, 3).
    pub fn number(self) -> u8 {
        self.index() as u8 + 1
    }

    pub fn from_number(n: u8) -> Option<Party> {
        match n {
            1 => Some(Party::Alice),
            2 => Some(Party::Bob),
            3 => Some(Party::Charlie),
            _ => None,
        }
    }

    /// The two links this user is on, as [`Link`] values.
    pub fn links(self) -> [Link; 2] {
        match self {
            Party::Alice => [Link::L12, Link::L31],
            Party::Bob => [Link::L12, Link::L23],
            Party::Charlie => [Link::L23, Link::L31],
        }
    }

    pub fn has_input(self) -> bool {
        self != Party::Charlie
    }
}

/// The three pairwise links.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Link {
    L12,
    L23,
    L31,
}

impl Link {
    pub const ALL: [Link; 3] = [Link::L12, Link::L23, Link::L31];

    pub fn index(self) -> usize {
        match self {
            Link::L12 => 0,
            Link::L23 => 1,
            Link::L31 => 2,
        }
    }

    /// Transcript variable name for this link.
    pub fn var_name(self) -> &'static str {
        match self {
            Link::L12 => var_names::M12,
            Link::L23 => var_names::M23,
            Link::L31 => var_names::M31,
        }
    }

    pub fn between(a: Party, b: Party) -> Link {
        match (a.min(b), a.max(b)) {
            (Party::Alice, Party::Bob) => Link::L12,
            (Party::Bob, Party::Charlie) => Link::L23,
            (Party::Alice, Party::Charlie) => Link::L31,
            _ => unreachable!("a self-loop is rejected at construction"),
        }
    }

    pub fn touches(self, p: Party) -> bool {
        p.links().contains(&self)
    }
}

/// A private randomness source: an alphabet with an exact pmf.
#[derive(Clone, Debug)]
pub struct RandSource {
    pub alphabet: Alphabet,
    pub pmf: Vec<Rat>,
}

impl RandSource {
    pub fn new(alphabet: Alphabet, pmf: Vec<Rat>) -> Result<Self, ProtocolError> {
        if pmf.len() != alphabet.len() {
            return Err(ProtocolError::BadRandomness {
                user: 0,
                problem: format!(
                    "pmf has {} entries for an alphabet of {}",
                    pmf.len(),
                    alphabet.len()
                ),
            });
        }
        let mut total = Rat::zero();
        for w in &pmf {
            if w.is_negative() {
                return Err(ProtocolError::BadRandomness {
                    user: 0,
                    problem: format!("negative weight {w}"),
                });
            }
            total += w;
        }
        if !total.is_one() {
            return Err(ProtocolError::BadRandomness {
                user: 0,
                problem: format!("pmf sums to {total}"),
            });
        }
        Ok(RandSource { alphabet, pmf })
    }

    /// A deterministic (single-symbol) source, for users that need none.
    pub fn trivial() -> Self {
        RandSource {
            alphabet: Alphabet::from_labels(&["-"]).expect("static alphabet"),
            pmf: vec![Rat::one()],
        }
    }

    /// Uniform over `n` numeric symbols.
    pub fn uniform(n: usize) -> Result<Self, ProtocolError> {
        let alphabet = Alphabet::numeric(n).map_err(ProtocolError::Prob)?;
        let w = Rat::new(BigInt::one(), BigInt::from(n));
        Ok(RandSource { alphabet, pmf: vec![w; n] })
    }

    /// Uniform over explicit labels.
    pub fn uniform_labels(labels: &[&str]) -> Result<Self, ProtocolError> {
        let alphabet = Alphabet::from_labels(labels).map_err(ProtocolError::Prob)?;
        let w = Rat::new(BigInt::one(), BigInt::from(labels.len()));
        Ok(RandSource { alphabet, pmf: vec![w; labels.len()] })
    }

    fn iid_power(&self, n: usize) -> Result<RandSource, ProtocolError> {
        let alphabet = self.alphabet.tuples(n).map_err(ProtocolError::Prob)?;
        let mut pmf = Vec::with_capacity(alphabet.len());
        let mut idx = vec![0usize; n];
        loop {
            let mut w = Rat::one();
            for &i in &idx {
                w *= &self.pmf[i];
            }
            pmf.push(w);
            let mut k = n;
            loop {
                if k == 0 {
                    return Ok(RandSource { alphabet, pmf });
                }
                k -= 1;
                idx[k] += 1;
                if idx[k] < self.pmf.len() {
                    break;
                }
                idx[k] = 0;
            }
        }
    }
}

/// One scheduled message.
///
/// The table key is the concatenation of: the sender's input symbol index
/// (only when the sender holds an input), the symbols of all earlier rounds
/// on the sender's two links (in schedule order), and the sender's randomness
/// symbol index.
#[derive(Clone, Debug)]
pub struct Round {
    pub sender: Party,
    pub receiver: Party,
    pub alphabet: Alphabet,
    pub table: BTreeMap<Vec<u32>, u32>,
    /// Optional codeword bit-lengths per symbol; must satisfy Kraft.
    pub lengths: Option<Vec<u64>>,
}

impl Round {
    pub fn link(&self) -> Link {
        Link::between(self.sender, self.receiver)
    }
}

/// A complete protocol: alphabets, private randomness, schedule, output map.
#[derive(Clone, Debug)]
pub struct Protocol {
    pub x_alphabet: Alphabet,
    pub y_alphabet: Alphabet,
    pub z_alphabet: Alphabet,
    /// Private randomness of users 1, 2, 3.
    pub randomness: [RandSource; 3],
    pub rounds: Vec<Round>,
    /// Key: Charlie-visible round symbols (schedule order) plus Charlie's
    /// randomness index; value: output symbol index.
    pub output: BTreeMap<Vec<u32>, u32>,
}

impl Protocol {
    pub fn new(
        x_alphabet: Alphabet,
        y_alphabet: Alphabet,
        z_alphabet: Alphabet,
        randomness: [RandSource; 3],
        rounds: Vec<Round>,
        output: BTreeMap<Vec<u32>, u32>,
    ) -> Result<Self, ProtocolError> {
        for (i, round) in rounds.iter().enumerate() {
            if round.sender == round.receiver {
                return Err(ProtocolError::SelfLoop { round: i });
            }
            for &value in round.table.values() {
                if value as usize >= round.alphabet.len() {
                    return Err(ProtocolError::BadRound {
                        round: i,
                        problem: format!("table value {value} outside the round alphabet"),
                    });
                }
            }
            if let Some(lengths) = &round.lengths {
                if lengths.len() != round.alphabet.len() {
                    return Err(ProtocolError::BadRound {
                        round: i,
                        problem: "length map does not cover the round alphabet".to_string(),
                    });
                }
                let mut kraft = Rat::zero();
                for &l in lengths {
                    kraft += Rat::new(BigInt::one(), BigInt::from(2u8).pow(l as u32));
                }
                if kraft > Rat::one() {
                    return Err(ProtocolError::KraftViolation(kraft.to_string()));
                }
            }
        }
        for &z in output.values() {
            if z as usize >= z_alphabet.len() {
                return Err(ProtocolError::BadOutput(format!(
                    "output value {z} outside the z-alphabet"
                )));
            }
        }
        Ok(Protocol { x_alphabet, y_alphabet, z_alphabet, randomness, rounds, output })
    }

    /// Indices of rounds on each link, in schedule order.
    fn rounds_on(&self, link: Link) -> Vec<usize> {
        self.rounds
            .iter()
            .enumerate()
            .filter(|(_, r)| r.link() == link)
            .map(|(i, _)| i)
            .collect()
    }

    /// Indices of earlier rounds visible to `party` before round `t`
    /// (its two incident links), in schedule order.
    fn visible_before(&self, party: Party, t: usize) -> Vec<usize> {
        (0..t).filter(|&i| self.rounds[i].link().touches(party)).collect()
    }

    /// The tuple alphabet of a link's transcript: round symbols joined with
    /// `:`; a link with no rounds gets the single placeholder symbol `-`.
    fn link_alphabet(&self, link: Link) -> Result<Alphabet, ProbError> {
        let rounds = self.rounds_on(link);
        if rounds.is_empty() {
            return Alphabet::from_labels(&["-"]);
        }
        let mut labels = vec![String::new()];
        for &t in &rounds {
            let mut next = Vec::with_capacity(labels.len() * self.rounds[t].alphabet.len());
            for prefix in &labels {
                for s in self.rounds[t].alphabet.symbols() {
                    if prefix.is_empty() {
                        next.push(s.clone());
                    } else {
                        next.push(format!("{prefix}:{s}"));
                    }
                }
            }
            labels = next;
        }
        Alphabet::new(labels)
    }

    /// Dense index of a link transcript within [`Protocol::link_alphabet`].
    fn link_symbol_index(&self, link: Link, transcript: &[u32]) -> u32 {
        let rounds = self.rounds_on(link);
        let mut idx = 0u64;
        for &t in &rounds {
            idx = idx * self.rounds[t].alphabet.len() as u64 + transcript[t] as u64;
        }
        idx as u32
    }

    /// Run the protocol for fixed inputs and randomness. Returns the
    /// per-round transcript and the output index.
    fn replay(&self, x: u32, y: u32, r: [u32; 3]) -> Result<(Vec<u32>, u32), ProtocolError> {
        let mut transcript = Vec::with_capacity(self.rounds.len());
        for (t, round) in self.rounds.iter().enumerate() {
            let mut key = Vec::new();
            match round.sender {
                Party::Alice => key.push(x),
                Party::Bob => key.push(y),
                Party::Charlie => {}
            }
            for &v in &self.visible_before(round.sender, t) {
                key.push(transcript[v]);
            }
            key.push(r[round.sender.index()]);
            let sym = round.table.get(&key).ok_or_else(|| {
                ProtocolError::UndefinedTableEntry {
                    round: t,
                    key: format!("{key:?}"),
                }
            })?;
            transcript.push(*sym);
        }
        let mut out_key = Vec::new();
        for (t, round) in self.rounds.iter().enumerate() {
            if round.link().touches(Party::Charlie) {
                out_key.push(transcript[t]);
            }
        }
        out_key.push(r[2]);
        let z = self
            .output
            .get(&out_key)
            .ok_or_else(|| ProtocolError::UndefinedOutput(format!("{out_key:?}")))?;
        Ok((transcript, *z))
    }

    /// The `n`-fold memoryless product: the same schedule run over tuple
    /// alphabets, every table applied coordinatewise, randomness drawn
    /// i.i.d. per coordinate.
    pub fn iid_power(&self, n: usize) -> Result<Protocol, ProtocolError> {
        assert!(n >= 1, "power must be at least 1");
        let x_alphabet = self.x_alphabet.tuples(n).map_err(ProtocolError::Prob)?;
        let y_alphabet = self.y_alphabet.tuples(n).map_err(ProtocolError::Prob)?;
        let z_alphabet = self.z_alphabet.tuples(n).map_err(ProtocolError::Prob)?;
        let randomness = [
            self.randomness[0].iid_power(n)?,
            self.randomness[1].iid_power(n)?,
            self.randomness[2].iid_power(n)?,
        ];

        // A table over n-tuples: every combination of n base keys maps to
        // the tuple of the base values.
        let power_table = |table: &BTreeMap<Vec<u32>, u32>,
                           key_bases: &[usize],
                           value_base: usize,
                           round: usize|
         -> Result<BTreeMap<Vec<u32>, u32>, ProtocolError> {
            let size = (table.len() as u128).checked_pow(n as u32);
            match size {
                Some(s) if s <= 1_000_000 => {}
                _ => {
                    return Err(ProtocolError::SizeGuard {
                        actual: size.unwrap_or(u128::MAX),
                        limit: 1_000_000,
                    })
                }
            }
            let entries: Vec<(&Vec<u32>, &u32)> = table.iter().collect();
            let mut out = BTreeMap::new();
            let mut pick = vec![0usize; n];
            loop {
                // Tuple-encode each key coordinate and the value.
                let mut key = Vec::with_capacity(key_bases.len());
                for (ci, &base) in key_bases.iter().enumerate() {
                    let mut idx = 0u64;
                    for &p in &pick {
                        let part = entries[p].0.get(ci).copied().ok_or_else(|| {
                            ProtocolError::BadRound {
                                round,
                                problem: "ragged table keys".to_string(),
                            }
                        })?;
                        idx = idx * base as u64 + part as u64;
                    }
                    key.push(idx as u32);
                }
                let mut val = 0u64;
                for &p in &pick {
                    val = val * value_base as u64 + *entries[p].1 as u64;
                }
                out.insert(key, val as u32);
                let mut k = n;
                loop {
                    if k == 0 {
                        return Ok(out);
                    }
                    k -= 1;
                    pick[k] += 1;
                    if pick[k] < entries.len() {
                        break;
                    }
                    pick[k] = 0;
                }
            }
        };

        let mut rounds = Vec::with_capacity(self.rounds.len());
        for (t, round) in self.rounds.iter().enumerate() {
            let mut key_bases = Vec::new();
            match round.sender {
                Party::Alice => key_bases.push(self.x_alphabet.len()),
                Party::Bob => key_bases.push(self.y_alphabet.len()),
                Party::Charlie => {}
            }
            for &v in &self.visible_before(round.sender, t) {
                key_bases.push(self.rounds[v].alphabet.len());
            }
            key_bases.push(self.randomness[round.sender.index()].alphabet.len());
            let table = power_table(&round.table, &key_bases, round.alphabet.len(), t)?;
            let alphabet = round.alphabet.tuples(n).map_err(ProtocolError::Prob)?;
            let lengths = match &round.lengths {
                None => None,
                Some(lens) => {
                    // Tuple length = sum of coordinate lengths.
                    let mut out = Vec::with_capacity(alphabet.len());
                    let mut idx = vec![0usize; n];
                    loop {
                        out.push(idx.iter().map(|&i| lens[i]).sum());
                        let mut k = n;
                        let mut done = false;
                        loop {
                            if k == 0 {
                                done = true;
                                break;
                            }
                            k -= 1;
                            idx[k] += 1;
                            if idx[k] < lens.len() {
                                break;
                            }
                            idx[k] = 0;
                        }
                        if done {
                            break;
                        }
                    }
                    Some(out)
                }
            };
            rounds.push(Round {
                sender: round.sender,
                receiver: round.receiver,
                alphabet,
                table,
                lengths,
            });
        }

        let mut out_bases = Vec::new();
        for round in &self.rounds {
            if round.link().touches(Party::Charlie) {
                out_bases.push(round.alphabet.len());
            }
        }
        out_bases.push(self.randomness[2].alphabet.len());
        let output = power_table(&self.output, &out_bases, self.z_alphabet.len(), usize::MAX)?;

        Protocol::new(x_alphabet, y_alphabet, z_alphabet, randomness, rounds, output)
    }
}

/// The exact joint law of `(X, Y, Z, M12, M23, M31)` induced by a protocol
/// under an input distribution, plus exact expected lengths where the
/// schedule carries length maps.
#[derive(Clone, Debug)]
pub struct TranscriptDist {
    pub joint: JointDist,
    /// Expected transcript length in bits per link, when every round on the
    /// link has a length map (links with no rounds report zero).
    pub expected_lengths: [Option<Rat>; 3],
}

impl TranscriptDist {
    /// Entropy of one link's transcript, in bits.
    pub fn link_entropy(&self, link: Link) -> Result<f64, ProbError> {
        self.joint.entropy(&[link.var_name()], &[])
    }
}

/// Exact enumeration of the joint transcript distribution.
pub fn transcript_distribution(
    protocol: &Protocol,
    input: &JointDist,
) -> Result<TranscriptDist, ProtocolError> {
    if input.vars().len() != 2 {
        return Err(ProtocolError::InputMismatch(format!(
            "expected two input variables, got {}",
            input.var_names().join(",")
        )));
    }
    let xpos = input.positions(&[var_names::X]).map_err(ProtocolError::Prob)?[0];
    let ypos = input.positions(&[var_names::Y]).map_err(ProtocolError::Prob)?[0];
    if input.vars()[xpos].alphabet != protocol.x_alphabet
        || input.vars()[ypos].alphabet != protocol.y_alphabet
    {
        return Err(ProtocolError::InputMismatch(
            "input alphabets differ from the protocol's".to_string(),
        ));
    }
    let replays = protocol.x_alphabet.len() as u128
        * protocol.y_alphabet.len() as u128
        * protocol.randomness.iter().map(|r| r.alphabet.len() as u128).product::<u128>();
    if replays > REPLAY_GUARD {
        return Err(ProtocolError::SizeGuard { actual: replays, limit: REPLAY_GUARD });
    }

    let mut atoms: BTreeMap<Vec<u32>, Rat> = BTreeMap::new();
    let mut lengths: [Option<Rat>; 3] = Link::ALL.map(|link| {
        let rounds = protocol.rounds_on(link);
        if rounds.iter().all(|&t| protocol.rounds[t].lengths.is_some()) {
            Some(Rat::zero())
        } else {
            None
        }
    });

    for (key, w_in) in input.atoms() {
        let (x, y) = (key[xpos], key[ypos]);
        for (r1, w1) in protocol.randomness[0].pmf.iter().enumerate() {
            if w1.is_zero() {
                continue;
            }
            for (r2, w2) in protocol.randomness[1].pmf.iter().enumerate() {
                if w2.is_zero() {
                    continue;
                }
                for (r3, w3) in protocol.randomness[2].pmf.iter().enumerate() {
                    if w3.is_zero() {
                        continue;
                    }
                    let w = w_in * w1 * w2 * w3;
                    let (transcript, z) =
                        protocol.replay(x, y, [r1 as u32, r2 as u32, r3 as u32])?;
                    let atom = vec![
                        x,
                        y,
                        z,
                        protocol.link_symbol_index(Link::L12, &transcript),
                        protocol.link_symbol_index(Link::L23, &transcript),
                        protocol.link_symbol_index(Link::L31, &transcript),
                    ];
                    for link in Link::ALL {
                        if let Some(total) = &mut lengths[link.index()] {
                            for &t in &protocol.rounds_on(link) {
                                let lens = protocol.rounds[t]
                                    .lengths
                                    .as_ref()
                                    .expect("checked above");
                                *total += &w * Rat::from(BigInt::from(lens[transcript[t] as usize]));
                            }
                        }
                    }
                    *atoms.entry(atom).or_insert_with(Rat::zero) += w;
                }
            }
        }
    }

    let vars = vec![
        Var::new(var_names::X, protocol.x_alphabet.clone()),
        Var::new(var_names::Y, protocol.y_alphabet.clone()),
        Var::new(var_names::Z, protocol.z_alphabet.clone()),
        Var::new(var_names::M12, protocol.link_alphabet(Link::L12)?),
        Var::new(var_names::M23, protocol.link_alphabet(Link::L23)?),
        Var::new(var_names::M31, protocol.link_alphabet(Link::L31)?),
    ];
    let joint = JointDist::new(vars, atoms.into_iter().collect())?;
    Ok(TranscriptDist { joint, expected_lengths: lengths })
}

/// Re-run a protocol under a different input law. The conditional law of
/// `(Z, M12, M23, M31)` given `(x, y)` is identical to the original on the
/// common support, because the replay depends only on the protocol.
pub fn switch_distribution(
    protocol: &Protocol,
    new_input: &JointDist,
) -> Result<TranscriptDist, ProtocolError> {
    transcript_distribution(protocol, new_input)
}

/// Per-block rates of a transcript distribution.
#[derive(Clone, Debug, PartialEq)]
pub struct RateQuadruple {
    pub r12: f64,
    pub r23: f64,
    pub r31: f64,
    pub rho: f64,
    /// Expected lengths per link (bits / block), when available.
    pub expected_lengths: [Option<f64>; 3],
}

/// Rates: `r_ij = H(M_ij)/n` and `ρ = H(M12, M23, M31, Z | X, Y)/n`.
pub fn rate_quadruple(td: &TranscriptDist, n: usize) -> Result<RateQuadruple, ProbError> {
    assert!(n >= 1, "block length must be at least 1");
    let nf = n as f64;
    let r12 = td.joint.entropy(&[var_names::M12], &[])? / nf;
    let r23 = td.joint.entropy(&[var_names::M23], &[])? / nf;
    let r31 = td.joint.entropy(&[var_names::M31], &[])? / nf;
    let rho = td.joint.entropy(
        &[var_names::M12, var_names::M23, var_names::M31, var_names::Z],
        &[var_names::X, var_names::Y],
    )? / nf;
    let expected_lengths = [0, 1, 2].map(|i| {
        td.expected_lengths[i].as_ref().map(|r| r.to_f64().unwrap_or(f64::NAN) / nf)
    });
    Ok(RateQuadruple { r12, r23, r31, rho, expected_lengths })
}

/// One privacy condition: the exact verdict plus the leakage in bits.
#[derive(Clone, Copy, Debug)]
pub struct PrivacyCheck {
    pub exact_zero: bool,
    pub leakage_bits: f64,
}

/// Outcome of the security checks.
#[derive(Clone, Debug)]
pub struct SecurityReport {
    /// Exact distributional match of the induced output with the channel.
    pub correct: bool,
    /// Minimal `Pr[Ẑ ≠ Z]` over couplings with the target channel
    /// (0 exactly when `correct`).
    pub error_probability: f64,
    /// `I(M12, M31; Y, Z | X) = 0`?
    pub privacy_alice: PrivacyCheck,
    /// `I(M12, M23; X, Z | Y) = 0`?
    pub privacy_bob: PrivacyCheck,
    /// `I(M23, M31; X, Y | Z) = 0`?
    pub privacy_charlie: PrivacyCheck,
    /// Cut conditional entropies `H(X|M12,M31)`, `H(Y|M12,M23)`,
    /// `H(Z|M23,M31)` in bits.
    pub cut_alice: f64,
    pub cut_bob: f64,
    pub cut_charlie: f64,
}

impl SecurityReport {
    pub fn perfectly_secure(&self) -> bool {
        self.correct
            && self.privacy_alice.exact_zero
            && self.privacy_bob.exact_zero
            && self.privacy_charlie.exact_zero
    }
}

fn privacy_check(
    joint: &JointDist,
    messages: &[&str],
    others: &[&str],
    own: &[&str],
) -> Result<PrivacyCheck, ProbError> {
    let exact_zero = joint.is_conditionally_independent(messages, others, own)?;
    let leakage_bits = joint.mutual_information(messages, others, own)?;
    Ok(PrivacyCheck { exact_zero, leakage_bits })
}

/// Exact correctness comparison: induced `p(x, y, ẑ)` versus
/// `p(x, y) · W(z|x,y)`, plus the optimal-coupling error probability.
fn correctness(
    td: &TranscriptDist,
    problem: &Problem,
) -> Result<(bool, f64), ProtocolError> {
    let induced = td.joint.marginalize(&[var_names::X, var_names::Y, var_names::Z])?;
    let target = problem.joint()?;
    let correct = induced.same_distribution(&target);
    if correct {
        return Ok((true, 0.0));
    }
    // Σ_{x,y} p(x,y) · TV(induced(·|x,y), W(·|x,y)), the minimal error
    // probability achievable by coupling the produced output with the
    // target output. TV = Σ_z max(0, W − induced).
    let mut err = Rat::zero();
    for (key, w_in) in problem.input().atoms() {
        let (x, y) = (key[0], key[1]);
        for z in 0..problem.z_alphabet().len() as u32 {
            let target_w = w_in * problem.channel().prob(x, y, z);
            let induced_w = induced.prob_of(&[x, y, z]);
            if target_w > induced_w {
                err += target_w - induced_w;
            }
        }
    }
    Ok((false, err.to_f64().unwrap_or(f64::NAN)))
}

/// Full perfect-security verification: exact correctness and the three
/// exact conditional-independence privacy conditions.
pub fn verify_perfect_security(
    protocol: &Protocol,
    problem: &Problem,
) -> Result<SecurityReport, ProtocolError> {
    let td = transcript_distribution(protocol, problem.input())?;
    security_report(&td, problem)
}

/// The same checks evaluated on an existing transcript distribution.
pub fn security_report(
    td: &TranscriptDist,
    problem: &Problem,
) -> Result<SecurityReport, ProtocolError> {
    use var_names::{M12, M23, M31, X, Y, Z};
    let (correct, error_probability) = correctness(td, problem)?;
    let j = &td.joint;
    Ok(SecurityReport {
        correct,
        error_probability,
        privacy_alice: privacy_check(j, &[M12, M31], &[Y, Z], &[X])?,
        privacy_bob: privacy_check(j, &[M12, M23], &[X, Z], &[Y])?,
        privacy_charlie: privacy_check(j, &[M23, M31], &[X, Y], &[Z])?,
        cut_alice: j.entropy(&[X], &[M12, M31])?,
        cut_bob: j.entropy(&[Y], &[M12, M23])?,
        cut_charlie: j.entropy(&[Z], &[M23, M31])?,
    })
}

/// Block-length-`n` relaxed-security report: the protocol and problem are
/// extended memorylessly, the coupling error probability is computed, and
/// the three leakages are the asymptotic-style conditional informations
/// `I(M12,M31;Yⁿ|Xⁿ)`, `I(M12,M23;Xⁿ|Yⁿ)`, `I(M23,M31;Xⁿ,Yⁿ|Zⁿ)`.
pub fn epsilon_security_report(
    protocol: &Protocol,
    problem: &Problem,
    n: usize,
) -> Result<SecurityReport, ProtocolError> {
    use var_names::{M12, M23, M31, X, Y, Z};
    let (protocol_n, problem_n);
    let (protocol, problem) = if n == 1 {
        (protocol, problem)
    } else {
        protocol_n = protocol.iid_power(n)?;
        problem_n = problem.iid_extend(n).map_err(ProtocolError::Prob)?;
        (&protocol_n, &problem_n)
    };
    let td = transcript_distribution(protocol, problem.input())?;
    let (correct, error_probability) = correctness(&td, problem)?;
    let j = &td.joint;
    Ok(SecurityReport {
        correct,
        error_probability,
        privacy_alice: privacy_check(j, &[M12, M31], &[Y], &[X])?,
        privacy_bob: privacy_check(j, &[M12, M23], &[X], &[Y])?,
        privacy_charlie: privacy_check(j, &[M23, M31], &[X, Y], &[Z])?,
        cut_alice: j.entropy(&[X], &[M12, M31])?,
        cut_bob: j.entropy(&[Y], &[M12, M23])?,
        cut_charlie: j.entropy(&[Z], &[M23, M31])?,
    })
}

/// Exact cut determinism on a normal-form problem: whether each user's
/// incident transcripts determine its input/output symbol.
///
/// Returns `(x determined by (M12,M31), y determined by (M12,M23),
/// z determined by (M23,M31))`. Refuses problems not in normal form — the
/// determinism statement is false in general without it.
pub fn verify_cut_lemma(
    td: &TranscriptDist,
    problem: &Problem,
) -> Result<(bool, bool, bool), ProtocolError> {
    let nf = normal_form(problem)?;
    if !nf.is_identity() {
        return Err(ProtocolError::NotNormalForm(
            "the problem reduces further; apply the reduction first".to_string(),
        ));
    }
    use var_names::{M12, M23, M31, X, Y, Z};
    let determined = |secret: &str, shares: [&str; 2]| -> Result<bool, ProbError> {
        let m = td.joint.marginalize(&[secret, shares[0], shares[1]])?;
        let spos = m.positions(&[secret])?[0];
        let hpos = m.positions(&shares)?;
        let mut seen: BTreeMap<Vec<u32>, u32> = BTreeMap::new();
        for (key, _) in m.atoms() {
            let h: Vec<u32> = hpos.iter().map(|&i| key[i]).collect();
            if let Some(prev) = seen.insert(h, key[spos]) {
                if prev != key[spos] {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    };
    Ok((
        determined(X, [M12, M31])?,
        determined(Y, [M12, M23])?,
        determined(Z, [M23, M31])?,
    ))
}

/// The transcript information inequality for independent inputs: for each
/// rotation of the three links, `I(M_γα; M_βγ) ≥ I(M_γα; M_βγ | M_αβ)`.
/// Returns the three margins (left minus right), each provably ≥ 0 up to
/// float noise.
pub fn check_info_inequality(td: &TranscriptDist) -> Result<[f64; 3], ProtocolError> {
    use var_names::{M12, M23, M31, X, Y};
    if !td.joint.is_conditionally_independent(&[X], &[Y], &[])? {
        return Err(ProtocolError::DependentInputs);
    }
    let margin = |a: &str, b: &str, c: &str| -> Result<f64, ProbError> {
        Ok(td.joint.mutual_information(&[a], &[b], &[])?
            - td.joint.mutual_information(&[a], &[b], &[c])?)
    };
    Ok([
        margin(M31, M23, M12)?,
        margin(M12, M31, M23)?,
        margin(M23, M12, M31)?,
    ])
}

#[cfg(test)]
pub(crate) mod tests_support {
    use super::*;

    /// Three-round XOR protocol: Charlie deals a uniform pad `K` to Bob,
    /// Bob forwards `Y ⊕ K` to Alice, Alice sends `X ⊕ Y ⊕ K` to Charlie,
    /// who outputs the sum of his received and dealt symbols.
    pub fn xor_protocol() -> Protocol {
        let bits = Alphabet::from_labels(&["0", "1"]).unwrap();
        let mut deal = BTreeMap::new();
        for k in 0..2u32 {
            deal.insert(vec![k], k);
        }
        let mut add_y = BTreeMap::new();
        for y in 0..2u32 {
            for k in 0..2u32 {
                add_y.insert(vec![y, k, 0], y ^ k);
            }
        }
        let mut add_x = BTreeMap::new();
        for x in 0..2u32 {
            for m in 0..2u32 {
                add_x.insert(vec![x, m, 0], x ^ m);
            }
        }
        let mut output = BTreeMap::new();
        for k in 0..2u32 {
            for m in 0..2u32 {
                output.insert(vec![k, m, k], m ^ k);
            }
        }
        Protocol::new(
            bits.clone(),
            bits.clone(),
            bits.clone(),
            [RandSource::trivial(), RandSource::trivial(), RandSource::uniform(2).unwrap()],
            vec![
                Round {
                    sender: Party::Charlie,
                    receiver: Party::Bob,
                    alphabet: bits.clone(),
                    table: deal,
                    lengths: None,
                },
                Round {
                    sender: Party::Bob,
                    receiver: Party::Alice,
                    alphabet: bits.clone(),
                    table: add_y,
                    lengths: None,
                },
                Round {
                    sender: Party::Alice,
                    receiver: Party::Charlie,
                    alphabet: bits,
                    table: add_x,
                    lengths: None,
                },
            ],
            output,
        )
        .unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::rat;

    fn bits() -> Alphabet {
        Alphabet::from_labels(&["0", "1"]).unwrap()
    }

    fn uniform_bits_input() -> JointDist {
        JointDist::uniform(vec![
            Var::new(var_names::X, bits()),
            Var::new(var_names::Y, bits()),
        ])
        .unwrap()
    }

    /// Alice sends X verbatim on link 31; Charlie outputs it.
    fn echo_protocol() -> Protocol {
        let mut table = BTreeMap::new();
        table.insert(vec![0, 0], 0);
        table.insert(vec![1, 0], 1);
        let round = Round {
            sender: Party::Alice,
            receiver: Party::Charlie,
            alphabet: bits(),
            table,
            lengths: Some(vec![1, 1]),
        };
        let mut output = BTreeMap::new();
        output.insert(vec![0, 0], 0);
        output.insert(vec![1, 0], 1);
        Protocol::new(
            bits(),
            bits(),
            bits(),
            [RandSource::trivial(), RandSource::trivial(), RandSource::trivial()],
            vec![round],
            output,
        )
        .unwrap()
    }

    fn echo_problem() -> Problem {
        let x = Var::new(var_names::X, bits());
        let y = Var::new(var_names::Y, bits());
        let z = Var::new(var_names::Z, bits());
        let ch = crate::prob::Channel::deterministic(x.clone(), y.clone(), z, |a, _| a)
            .unwrap();
        Problem::new(uniform_bits_input(), ch).unwrap()
    }

    #[test]
    fn echo_transcript_matches_input_marginal() {
        let td = transcript_distribution(&echo_protocol(), &uniform_bits_input()).unwrap();
        let m31 = td.joint.marginalize(&[var_names::M31]).unwrap();
        assert_eq!(m31.prob_of(&[0]), rat(1, 2));
        assert_eq!(m31.prob_of(&[1]), rat(1, 2));
        // Input marginal recovered exactly.
        let back = td.joint.marginalize(&[var_names::X, var_names::Y]).unwrap();
        assert!(back.same_distribution(&uniform_bits_input()));
        // No randomness: rho counts only Z beyond the inputs, and Z = X.
        let rates = rate_quadruple(&td, 1).unwrap();
        assert!(rates.rho.abs() < 1e-12);
        assert!((rates.r31 - 1.0).abs() < 1e-12);
        assert_eq!(td.expected_lengths[Link::L31.index()], Some(Rat::one()));
        assert_eq!(td.expected_lengths[Link::L12.index()], Some(Rat::zero()));
    }

    #[test]
    fn echo_is_perfectly_secure_for_its_function() {
        let report = verify_perfect_security(&echo_protocol(), &echo_problem()).unwrap();
        assert!(report.perfectly_secure(), "{report:?}");
        assert_eq!(report.error_probability, 0.0);
        assert!(report.cut_alice.abs() < 1e-12);
    }

    /// Bob pads Y with his uniform key on link 23; Charlie outputs 0.
    fn pad_protocol() -> Protocol {
        let mut table = BTreeMap::new();
        for y in 0..2u32 {
            for k in 0..2u32 {
                table.insert(vec![y, k], y ^ k);
            }
        }
        let round = Round {
            sender: Party::Bob,
            receiver: Party::Charlie,
            alphabet: bits(),
            table,
            lengths: None,
        };
        let mut output = BTreeMap::new();
        output.insert(vec![0, 0], 0);
        output.insert(vec![1, 0], 0);
        Protocol::new(
            bits(),
            bits(),
            Alphabet::from_labels(&["c"]).unwrap(),
            [RandSource::trivial(), RandSource::uniform(2).unwrap(), RandSource::trivial()],
            vec![round],
            output,
        )
        .unwrap()
    }

    #[test]
    fn one_time_pad_hides_the_input() {
        let td = transcript_distribution(&pad_protocol(), &uniform_bits_input()).unwrap();
        assert!(td
            .joint
            .is_conditionally_independent(&[var_names::M23], &[var_names::Y], &[])
            .unwrap());
        let m23 = td.joint.marginalize(&[var_names::M23]).unwrap();
        assert_eq!(m23.prob_of(&[0]), rat(1, 2));
        // One uniform key bit beyond the inputs.
        let rates = rate_quadruple(&td, 1).unwrap();
        assert!((rates.rho - 1.0).abs() < 1e-12);
    }

    #[test]
    fn undefined_table_entry_reported() {
        let mut p = echo_protocol();
        p.rounds[0].table.remove(&vec![1, 0]);
        let err = transcript_distribution(&p, &uniform_bits_input()).unwrap_err();
        assert!(matches!(err, ProtocolError::UndefinedTableEntry { round: 0, .. }));
    }

    #[test]
    fn kraft_violation_rejected() {
        let mut p = echo_protocol();
        p.rounds[0].lengths = Some(vec![0, 0]); // two zero-length codewords
        let err = Protocol::new(
            p.x_alphabet.clone(),
            p.y_alphabet.clone(),
            p.z_alphabet.clone(),
            p.randomness.clone(),
            p.rounds.clone(),
            p.output.clone(),
        )
        .unwrap_err();
        assert!(matches!(err, ProtocolError::KraftViolation(_)));
    }

    #[test]
    fn empty_schedule_has_zero_margins() {
        let p = Protocol::new(
            bits(),
            bits(),
            Alphabet::from_labels(&["c"]).unwrap(),
            [RandSource::trivial(), RandSource::trivial(), RandSource::trivial()],
            vec![],
            BTreeMap::from([(vec![0], 0)]),
        )
        .unwrap();
        let td = transcript_distribution(&p, &uniform_bits_input()).unwrap();
        let margins = check_info_inequality(&td).unwrap();
        for m in margins {
            assert!(m.abs() < 1e-12);
        }
    }

    #[test]
    fn dependent_inputs_rejected_for_info_inequality() {
        let x = Var::new(var_names::X, bits());
        let y = Var::new(var_names::Y, bits());
        let correlated = JointDist::new(
            vec![x, y],
            vec![(vec![0, 0], rat(1, 2)), (vec![1, 1], rat(1, 2))],
        )
        .unwrap();
        let td = transcript_distribution(&echo_protocol(), &correlated).unwrap();
        assert!(matches!(
            check_info_inequality(&td),
            Err(ProtocolError::DependentInputs)
        ));
    }

    #[test]
    fn switch_preserves_the_conditional_kernel() {
        let td_uniform =
            transcript_distribution(&echo_protocol(), &uniform_bits_input()).unwrap();
        let x = Var::new(var_names::X, bits());
        let y = Var::new(var_names::Y, bits());
        let skewed = JointDist::new(
            vec![x, y],
            vec![
                (vec![0, 0], rat(1, 2)),
                (vec![0, 1], rat(1, 4)),
                (vec![1, 0], rat(1, 8)),
                (vec![1, 1], rat(1, 8)),
            ],
        )
        .unwrap();
        let td_skewed = switch_distribution(&echo_protocol(), &skewed).unwrap();
        // p(z, m | x, y) must agree atom-for-atom on the common support.
        for (key, w) in td_skewed.joint.atoms() {
            let (x, y) = (key[0], key[1]);
            let p_xy = skewed.prob_of(&[x, y]);
            let orig_w = td_uniform.joint.prob_of(key);
            let orig_xy = uniform_bits_input().prob_of(&[x, y]);
            assert_eq!(w / &p_xy, orig_w / orig_xy, "kernel mismatch at {key:?}");
        }
    }

    #[test]
    fn iid_power_runs_coordinatewise() {
        let p2 = echo_protocol().iid_power(2).unwrap();
        let input2 = uniform_bits_input().iid_power(2, 1_000_000).unwrap();
        let td = transcript_distribution(&p2, &input2).unwrap();
        let rates = rate_quadruple(&td, 2).unwrap();
        assert!((rates.r31 - 1.0).abs() < 1e-12, "per-symbol rate, got {}", rates.r31);
        assert!(rates.rho.abs() < 1e-12);
        // The echo still computes f(x,y) = x coordinatewise.
        let report = epsilon_security_report(&echo_protocol(), &echo_problem(), 2).unwrap();
        assert!(report.correct);
        assert_eq!(report.error_probability, 0.0);
        assert!(report.privacy_alice.exact_zero);
        assert!(report.privacy_charlie.exact_zero);
    }

    #[test]
    fn cut_lemma_on_echo() {
        let td = transcript_distribution(&echo_protocol(), &uniform_bits_input()).unwrap();
        // The echo problem (f(x,y) = x) is NOT in normal form: the two
        // y-symbols are interchangeable, so the engine must refuse.
        assert!(matches!(
            verify_cut_lemma(&td, &echo_problem()),
            Err(ProtocolError::NotNormalForm(_))
        ));
    }
}
