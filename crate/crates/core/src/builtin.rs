//! Constructors for the concrete optimal protocols: remote oblivious
//! transfer, group addition, controlled erasure, binary sum, and AND.
//!
//! Each builder returns the protocol together with its canonical problem
//! (input law and target channel) and the block length a single run covers,
//! so rates can be normalized per source symbol.

use crate::prob::{Alphabet, Channel, JointDist, ProbError, Problem, Rat, Var, var_names};
use crate::protocol::{Party, Protocol, ProtocolError, RandSource, Round};
use num::{BigInt, One, Signed, Zero};
use std::cmp::Reverse;
use std::collections::{BinaryHeap, BTreeMap};

/// A builtin instance: the protocol, the problem it solves, and the number
/// of source symbols one protocol run covers.
#[derive(Clone, Debug)]
pub struct Builtin {
    pub problem: Problem,
    pub protocol: Protocol,
    pub block_length: usize,
}

fn bad(msg: impl Into<String>) -> ProtocolError {
    ProtocolError::BadParameter(msg.into())
}

/// Fixed-width binary label, most significant bit first.
fn bits_label(v: u32, width: usize) -> String {
    (0..width)
        .map(|i| if v >> (width - 1 - i) & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// Alphabet of all `width`-bit strings in numeric order.
fn bit_strings(width: usize) -> Result<Alphabet, ProbError> {
    Alphabet::new((0..1u32 << width).map(|v| bits_label(v, width)).collect())
}

fn binary_alphabet() -> Alphabet {
    Alphabet::from_labels(&["0", "1"]).expect("static alphabet")
}

fn uniform_product_input(x: &Alphabet, y: &Alphabet) -> Result<JointDist, ProbError> {
    JointDist::uniform(vec![
        Var::new(var_names::X, x.clone()),
        Var::new(var_names::Y, y.clone()),
    ])
}

// ---------------------------------------------------------------------------
// Groups
// ---------------------------------------------------------------------------

/// Largest group order accepted by [`GroupSpec::new`].
pub const MAX_GROUP_ORDER: usize = 64;

/// A finite group given by its multiplication table. Construction verifies
/// the Latin-square property, associativity (exhaustively), the identity,
/// and two-sided inverses.
#[derive(Clone, Debug)]
pub struct GroupSpec {
    labels: Vec<String>,
    table: Vec<Vec<u32>>,
    identity: u32,
    inverse: Vec<u32>,
}

impl GroupSpec {
    pub fn new(labels: Vec<String>, table: Vec<Vec<u32>>) -> Result<Self, ProtocolError> {
        let n = labels.len();
        if n < 2 {
            return Err(bad("group order must be at least 2"));
        }
        if n > MAX_GROUP_ORDER {
            return Err(bad(format!("group order {n} exceeds the limit {MAX_GROUP_ORDER}")));
        }
        if table.len() != n || table.iter().any(|row| row.len() != n) {
            return Err(bad("multiplication table is not order × order"));
        }
        for row in &table {
            for &v in row {
                if v as usize >= n {
                    return Err(bad(format!("table entry {v} out of range")));
                }
            }
        }
        // Latin square: every row and every column is a permutation.
        for i in 0..n {
            let mut row_seen = vec![false; n];
            let mut col_seen = vec![false; n];
            for j in 0..n {
                row_seen[table[i][j] as usize] = true;
                col_seen[table[j][i] as usize] = true;
            }
            if row_seen.iter().any(|s| !s) || col_seen.iter().any(|s| !s) {
                return Err(bad("multiplication table is not a Latin square"));
            }
        }
        // Associativity, exhaustively.
        for a in 0..n {
            for b in 0..n {
                let ab = table[a][b] as usize;
                for c in 0..n {
                    let bc = table[b][c] as usize;
                    if table[ab][c] != table[a][bc] {
                        return Err(bad(format!(
                            "not associative at ({a}, {b}, {c})"
                        )));
                    }
                }
            }
        }
        // Identity.
        let identity = (0..n)
            .find(|&e| (0..n).all(|a| table[e][a] as usize == a && table[a][e] as usize == a))
            .ok_or_else(|| bad("no identity element"))? as u32;
        // Two-sided inverses.
        let mut inverse = vec![0u32; n];
        for (a, slot) in inverse.iter_mut().enumerate() {
            let b = (0..n)
                .find(|&b| table[a][b] == identity && table[b][a] == identity)
                .ok_or_else(|| bad(format!("element {a} has no two-sided inverse")))?;
            *slot = b as u32;
        }
        // Labels must form a valid alphabet.
        Alphabet::new(labels.clone()).map_err(ProtocolError::Prob)?;
        Ok(GroupSpec { labels, table, identity, inverse })
    }

    /// The cyclic group of order `n` with labels `0..n-1` and addition mod n.
    pub fn cyclic(n: usize) -> Result<Self, ProtocolError> {
        if n < 2 {
            return Err(bad("cyclic group order must be at least 2"));
        }
        let labels = (0..n).map(|i| i.to_string()).collect();
        let table = (0..n)
            .map(|a| (0..n).map(|b| ((a + b) % n) as u32).collect())
            .collect();
        GroupSpec::new(labels, table)
    }

    /// The symmetric group on three points. Element labels are the images
    /// `σ(0)σ(1)σ(2)`; the product is composition, `(σ⋆τ)(i) = σ(τ(i))`.
    pub fn symmetric_3() -> GroupSpec {
        let labels: Vec<String> = PERMS3
            .iter()
            .map(|p| p.iter().map(|d| d.to_string()).collect())
            .collect();
        let index_of = |p: &[u32; 3]| PERMS3.iter().position(|q| q == p).unwrap() as u32;
        let table = PERMS3
            .iter()
            .map(|s| {
                PERMS3
                    .iter()
                    .map(|t| {
                        let st = [
                            s[t[0] as usize],
                            s[t[1] as usize],
                            s[t[2] as usize],
                        ];
                        index_of(&st)
                    })
                    .collect()
            })
            .collect();
        GroupSpec::new(labels, table).expect("S3 is a group")
    }

    pub fn order(&self) -> usize {
        self.labels.len()
    }

    pub fn identity(&self) -> u32 {
        self.identity
    }

    pub fn mul(&self, a: u32, b: u32) -> u32 {
        self.table[a as usize][b as usize]
    }

    pub fn inv(&self, a: u32) -> u32 {
        self.inverse[a as usize]
    }

    pub fn alphabet(&self) -> Alphabet {
        Alphabet::new(self.labels.clone()).expect("validated at construction")
    }
}

/// The six permutations of `(0, 1, 2)` in lexicographic order of their
/// image strings.
const PERMS3: [[u32; 3]; 6] =
    [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

// ---------------------------------------------------------------------------
// Huffman coding
// ---------------------------------------------------------------------------

/// Binary Huffman codewords for exact weights.
///
/// Deterministic: the two smallest nodes by `(weight, creation index)` are
/// merged, the earlier-created node taking branch `0`. Returns one codeword
/// per weight, in order.
pub fn huffman_code(weights: &[Rat]) -> Result<Vec<String>, ProtocolError> {
    if weights.is_empty() {
        return Err(bad("cannot build a code for zero symbols"));
    }
    if weights.iter().any(|w| w.is_negative()) {
        return Err(bad("negative weight"));
    }
    if weights.len() == 1 {
        return Ok(vec!["0".to_string()]);
    }
    let mut children: Vec<Option<(usize, usize)>> = vec![None; weights.len()];
    let mut heap: BinaryHeap<Reverse<(Rat, usize)>> = weights
        .iter()
        .enumerate()
        .map(|(i, w)| Reverse((w.clone(), i)))
        .collect();
    while heap.len() >= 2 {
        let Reverse((wa, a)) = heap.pop().expect("two or more nodes");
        let Reverse((wb, b)) = heap.pop().expect("two or more nodes");
        let id = children.len();
        children.push(Some((a, b)));
        heap.push(Reverse((wa + wb, id)));
    }
    let Reverse((_, root)) = heap.pop().expect("one node remains");
    let mut codes = vec![String::new(); weights.len()];
    let mut stack = vec![(root, String::new())];
    while let Some((id, prefix)) = stack.pop() {
        match children[id] {
            Some((a, b)) => {
                stack.push((a, format!("{prefix}0")));
                stack.push((b, format!("{prefix}1")));
            }
            None => codes[id] = prefix,
        }
    }
    Ok(codes)
}

/// Exact Kraft sum `Σ 2^{-len}` of a set of codewords.
pub fn kraft_sum(code: &[String]) -> Rat {
    code.iter()
        .map(|c| Rat::new(BigInt::one(), BigInt::from(2u8).pow(c.len() as u32)))
        .sum()
}

fn validate_prefix_code(code: &[String], expected: usize) -> Result<(), ProtocolError> {
    if code.len() != expected {
        return Err(bad(format!(
            "code has {} words, need one per source block ({expected})",
            code.len()
        )));
    }
    for w in code {
        if w.is_empty() && expected > 1 {
            return Err(bad("empty codeword in a multi-word code"));
        }
        if !w.chars().all(|c| c == '0' || c == '1') {
            return Err(bad(format!("codeword `{w}` is not binary")));
        }
    }
    for (i, a) in code.iter().enumerate() {
        for (j, b) in code.iter().enumerate() {
            if i != j && b.starts_with(a.as_str()) {
                return Err(bad(format!(
                    "code is not prefix-free: `{a}` prefixes `{b}`"
                )));
            }
        }
    }
    if kraft_sum(code) > Rat::one() {
        return Err(ProtocolError::KraftViolation(kraft_sum(code).to_string()));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// AND
// ---------------------------------------------------------------------------

/// The AND protocol: Alice deals a uniform permutation `(α, β, γ)` of
/// `(0, 1, 2)` to Bob; Alice sends `α` if `X = 1`, else `β`; Bob sends `α`
/// if `Y = 1`, else `γ`; Charlie outputs 1 exactly when his two received
/// symbols agree.
pub fn build_and() -> Result<Builtin, ProtocolError> {
    let bits = binary_alphabet();
    let perm_labels: Vec<&str> = vec!["012", "021", "102", "120", "201", "210"];
    let perm_alphabet = Alphabet::from_labels(&perm_labels).map_err(ProtocolError::Prob)?;
    let trit = Alphabet::numeric(3).map_err(ProtocolError::Prob)?;

    let mut deal = BTreeMap::new();
    for x in 0..2u32 {
        for g in 0..6u32 {
            deal.insert(vec![x, g], g);
        }
    }
    let mut alice = BTreeMap::new();
    for x in 0..2u32 {
        for g in 0..6u32 {
            // α when X = 1, β when X = 0.
            let sym = PERMS3[g as usize][if x == 1 { 0 } else { 1 }];
            alice.insert(vec![x, g, g], sym);
        }
    }
    let mut bob = BTreeMap::new();
    for y in 0..2u32 {
        for g in 0..6u32 {
            // α when Y = 1, γ when Y = 0.
            let sym = PERMS3[g as usize][if y == 1 { 0 } else { 2 }];
            bob.insert(vec![y, g, 0], sym);
        }
    }
    let mut output = BTreeMap::new();
    for a in 0..3u32 {
        for b in 0..3u32 {
            output.insert(vec![a, b, 0], u32::from(a == b));
        }
    }
    let protocol = Protocol::new(
        bits.clone(),
        bits.clone(),
        bits.clone(),
        [RandSource::uniform_labels(&perm_labels)?, RandSource::trivial(), RandSource::trivial()],
        vec![
            Round {
                sender: Party::Alice,
                receiver: Party::Bob,
                alphabet: perm_alphabet,
                table: deal,
                lengths: None,
            },
            Round {
                sender: Party::Alice,
                receiver: Party::Charlie,
                alphabet: trit.clone(),
                table: alice,
                lengths: None,
            },
            Round {
                sender: Party::Bob,
                receiver: Party::Charlie,
                alphabet: trit,
                table: bob,
                lengths: None,
            },
        ],
        output,
    )?;
    let input = uniform_product_input(&bits, &bits).map_err(ProtocolError::Prob)?;
    let channel = Channel::deterministic(
        Var::new(var_names::X, bits.clone()),
        Var::new(var_names::Y, bits.clone()),
        Var::new(var_names::Z, bits),
        |x, y| x & y,
    )
    .map_err(ProtocolError::Prob)?;
    let problem = Problem::new(input, channel).map_err(ProtocolError::Prob)?;
    Ok(Builtin { problem, protocol, block_length: 1 })
}

// ---------------------------------------------------------------------------
// Binary sum
// ---------------------------------------------------------------------------

/// The integer-sum protocol: Charlie deals a uniform `K ∈ Z₃` to Alice, who
/// forwards `X + K`; Bob adds `Y`; Charlie removes `K`. `Z = X + Y` over the
/// integers, carried in mod-3 arithmetic.
pub fn build_sum() -> Result<Builtin, ProtocolError> {
    let bits = binary_alphabet();
    let trit = Alphabet::numeric(3).map_err(ProtocolError::Prob)?;

    let mut deal = BTreeMap::new();
    for k in 0..3u32 {
        deal.insert(vec![k], k);
    }
    let mut add_x = BTreeMap::new();
    for x in 0..2u32 {
        for k in 0..3u32 {
            add_x.insert(vec![x, k, 0], (x + k) % 3);
        }
    }
    let mut add_y = BTreeMap::new();
    for y in 0..2u32 {
        for s in 0..3u32 {
            add_y.insert(vec![y, s, 0], (s + y) % 3);
        }
    }
    let mut output = BTreeMap::new();
    for k in 0..3u32 {
        for s in 0..3u32 {
            output.insert(vec![k, s, k], (s + 3 - k) % 3);
        }
    }
    let protocol = Protocol::new(
        bits.clone(),
        bits.clone(),
        trit.clone(),
        [RandSource::trivial(), RandSource::trivial(), RandSource::uniform(3)?],
        vec![
            Round {
                sender: Party::Charlie,
                receiver: Party::Alice,
                alphabet: trit.clone(),
                table: deal,
                lengths: None,
            },
            Round {
                sender: Party::Alice,
                receiver: Party::Bob,
                alphabet: trit.clone(),
                table: add_x,
                lengths: None,
            },
            Round {
                sender: Party::Bob,
                receiver: Party::Charlie,
                alphabet: trit.clone(),
                table: add_y,
                lengths: None,
            },
        ],
        output,
    )?;
    let input = uniform_product_input(&bits, &bits).map_err(ProtocolError::Prob)?;
    let channel = Channel::deterministic(
        Var::new(var_names::X, bits.clone()),
        Var::new(var_names::Y, bits),
        Var::new(var_names::Z, trit),
        |x, y| x + y,
    )
    .map_err(ProtocolError::Prob)?;
    let problem = Problem::new(input, channel).map_err(ProtocolError::Prob)?;
    Ok(Builtin { problem, protocol, block_length: 1 })
}

// ---------------------------------------------------------------------------
// Group addition
// ---------------------------------------------------------------------------

/// The group-operation protocol: Charlie deals a uniform `K` to Bob, Bob
/// sends `Y⋆K` to Alice, Alice sends `X⋆(Y⋆K)` to Charlie, who outputs
/// `(X⋆Y⋆K)⋆K⁻¹`. Works for non-abelian groups because `K` enters and
/// leaves on the right.
pub fn build_group_add(group: &GroupSpec) -> Result<Builtin, ProtocolError> {
    let alphabet = group.alphabet();
    let g = group.order() as u32;

    let mut deal = BTreeMap::new();
    for k in 0..g {
        deal.insert(vec![k], k);
    }
    let mut bob = BTreeMap::new();
    for y in 0..g {
        for k in 0..g {
            bob.insert(vec![y, k, 0], group.mul(y, k));
        }
    }
    let mut alice = BTreeMap::new();
    for x in 0..g {
        for m in 0..g {
            alice.insert(vec![x, m, 0], group.mul(x, m));
        }
    }
    let mut output = BTreeMap::new();
    for k in 0..g {
        for m in 0..g {
            output.insert(vec![k, m, k], group.mul(m, group.inv(k)));
        }
    }
    let protocol = Protocol::new(
        alphabet.clone(),
        alphabet.clone(),
        alphabet.clone(),
        [RandSource::trivial(), RandSource::trivial(), RandSource::uniform_labels(
            &group.labels.iter().map(String::as_str).collect::<Vec<_>>(),
        )?],
        vec![
            Round {
                sender: Party::Charlie,
                receiver: Party::Bob,
                alphabet: alphabet.clone(),
                table: deal,
                lengths: None,
            },
            Round {
                sender: Party::Bob,
                receiver: Party::Alice,
                alphabet: alphabet.clone(),
                table: bob,
                lengths: None,
            },
            Round {
                sender: Party::Alice,
                receiver: Party::Charlie,
                alphabet: alphabet.clone(),
                table: alice,
                lengths: None,
            },
        ],
        output,
    )?;
    let input = uniform_product_input(&alphabet, &alphabet).map_err(ProtocolError::Prob)?;
    let channel = Channel::deterministic(
        Var::new(var_names::X, alphabet.clone()),
        Var::new(var_names::Y, alphabet.clone()),
        Var::new(var_names::Z, alphabet),
        |x, y| group.mul(x, y),
    )
    .map_err(ProtocolError::Prob)?;
    let problem = Problem::new(input, channel).map_err(ProtocolError::Prob)?;
    Ok(Builtin { problem, protocol, block_length: 1 })
}

// ---------------------------------------------------------------------------
// Remote oblivious transfer
// ---------------------------------------------------------------------------

/// Guard on table construction for remote OT.
const OT_TABLE_GUARD: u128 = 4_000_000;

/// The remote `(m choose 1)`-OT protocol over `n`-bit strings.
///
/// Alice holds `m` strings of `n` bits; Bob holds a selector in `0..m`;
/// Charlie learns the selected string and nothing else. Alice deals keys
/// `K_0..K_{m-1}` and a uniform cyclic shift `π` to Bob; sends the shifted
/// one-time-padded database to Charlie; Bob sends the shifted selector
/// `C = Y − π` and the key `K_Y`.
pub fn build_remote_ot(m: usize, n: usize) -> Result<Builtin, ProtocolError> {
    if m < 2 || n < 1 {
        return Err(bad("remote OT needs m ≥ 2 and n ≥ 1"));
    }
    if m * n > 20 {
        return Err(bad(format!(
            "input space of {} bits exceeds the 20-bit enumeration guard",
            m * n
        )));
    }
    let nm = n * m;
    // Table sizes are dominated by |X| · |randomness| = 2^{2nm} · m.
    let table_cost = (1u128 << (2 * nm)) * m as u128;
    if table_cost > OT_TABLE_GUARD {
        return Err(ProtocolError::SizeGuard { actual: table_cost, limit: OT_TABLE_GUARD });
    }

    let string_alphabet = bit_strings(n).map_err(ProtocolError::Prob)?;
    let x_alphabet = string_alphabet.tuples(m).map_err(ProtocolError::Prob)?;
    let y_alphabet = Alphabet::numeric(m).map_err(ProtocolError::Prob)?;
    let z_alphabet = string_alphabet.clone();

    let mask = (1u32 << n) - 1;
    // Component i (0-based, leftmost first) of a database index.
    let db_part = |db: u32, i: usize| -> u32 { (db >> (n * (m - 1 - i))) & mask };

    // Alice's randomness: all key tuples × all shifts, labels `k0-…-km−1-π`.
    let key_tuples = string_alphabet.tuples(m).map_err(ProtocolError::Prob)?;
    let mut rand_labels = Vec::with_capacity(key_tuples.len() * m);
    for kt in key_tuples.symbols() {
        for pi in 0..m {
            rand_labels.push(format!("{kt}-{pi}"));
        }
    }
    let rand_alphabet = Alphabet::new(rand_labels).map_err(ProtocolError::Prob)?;
    let r1_size = rand_alphabet.len() as u32;
    let weight = Rat::new(BigInt::one(), BigInt::from(r1_size));
    let r1 = RandSource::new(rand_alphabet.clone(), vec![weight; r1_size as usize])?;
    let decode_rand = |r: u32| -> (u32, u32) { (r / m as u32, r % m as u32) };

    // Round 0: Alice → Bob, the keys and the shift.
    let mut deal = BTreeMap::new();
    for x in 0..x_alphabet.len() as u32 {
        for r in 0..r1_size {
            deal.insert(vec![x, r], r);
        }
    }
    // Round 1: Alice → Charlie, the shifted padded database.
    let mut pad = BTreeMap::new();
    for x in 0..x_alphabet.len() as u32 {
        for r in 0..r1_size {
            let (kt, pi) = decode_rand(r);
            let mut msg = 0u32;
            for i in 0..m {
                let j = (pi as usize + i) % m;
                let part = db_part(x, j) ^ db_part(kt, j);
                msg = (msg << n) | part;
            }
            pad.insert(vec![x, r, r], msg);
        }
    }
    // Round 2: Bob → Charlie, the shifted selector and the selected key.
    // Labels `c-k`, index c·2ⁿ + k.
    let mut sel_labels = Vec::with_capacity(m << n);
    for c in 0..m {
        for k in string_alphabet.symbols() {
            sel_labels.push(format!("{c}-{k}"));
        }
    }
    let sel_alphabet = Alphabet::new(sel_labels).map_err(ProtocolError::Prob)?;
    let mut select = BTreeMap::new();
    for y in 0..m as u32 {
        for r in 0..r1_size {
            let (kt, pi) = decode_rand(r);
            let c = (y + m as u32 - pi) % m as u32;
            let key = db_part(kt, y as usize);
            select.insert(vec![y, r, 0], (c << n) | key);
        }
    }
    // Output: component C of the padded database, unpadded with the key.
    let mut output = BTreeMap::new();
    for msg in 0..x_alphabet.len() as u32 {
        for sel in 0..sel_alphabet.len() as u32 {
            let (c, key) = (sel >> n, sel & mask);
            output.insert(vec![msg, sel, 0], db_part(msg, c as usize) ^ key);
        }
    }
    let protocol = Protocol::new(
        x_alphabet.clone(),
        y_alphabet.clone(),
        z_alphabet.clone(),
        [r1, RandSource::trivial(), RandSource::trivial()],
        vec![
            Round {
                sender: Party::Alice,
                receiver: Party::Bob,
                alphabet: rand_alphabet,
                table: deal,
                lengths: None,
            },
            Round {
                sender: Party::Alice,
                receiver: Party::Charlie,
                alphabet: x_alphabet.clone(),
                table: pad,
                lengths: None,
            },
            Round {
                sender: Party::Bob,
                receiver: Party::Charlie,
                alphabet: sel_alphabet,
                table: select,
                lengths: None,
            },
        ],
        output,
    )?;
    let input = uniform_product_input(&x_alphabet, &y_alphabet).map_err(ProtocolError::Prob)?;
    let channel = Channel::deterministic(
        Var::new(var_names::X, x_alphabet),
        Var::new(var_names::Y, y_alphabet),
        Var::new(var_names::Z, z_alphabet),
        |x, y| db_part(x, y as usize),
    )
    .map_err(ProtocolError::Prob)?;
    let problem = Problem::new(input, channel).map_err(ProtocolError::Prob)?;
    Ok(Builtin { problem, protocol, block_length: 1 })
}

// ---------------------------------------------------------------------------
// Controlled erasure
// ---------------------------------------------------------------------------

/// The controlled-erasure protocol over an i.i.d. block of `n` coordinates.
///
/// `X_i ~ Bernoulli(p)` controls the erasure (`X_i = 0` erases), `Y_i ~
/// Bernoulli(q)`; `Z_i` is `e` when erased, else `Y_i`. Bob reveals his pad
/// `Kⁿ` to Alice and sends `Yⁿ ⊕ Kⁿ` to Charlie; Alice sends a prefix-free
/// codeword for `Xⁿ` plus the pad bits at the non-erased positions.
/// `code` supplies the codeword per `Xⁿ`-block (2ⁿ words, numeric order);
/// `None` builds the Huffman code for the block weights.
pub fn build_controlled_erasure(
    p: &Rat,
    q: &Rat,
    n: usize,
    code: Option<Vec<String>>,
) -> Result<Builtin, ProtocolError> {
    if n == 0 || n > 8 {
        return Err(bad("block length must be in 1..=8"));
    }
    for (name, v) in [("p", p), ("q", q)] {
        if v <= &Rat::zero() || v >= &Rat::one() {
            return Err(bad(format!("{name} must be strictly between 0 and 1")));
        }
    }
    let size = 1usize << n;
    let bits = binary_alphabet();
    // Input blocks use the tuple labels of the i.i.d. extension; the pad
    // messages use packed binary labels.
    let block = bits.tuples(n).map_err(ProtocolError::Prob)?;
    let pad_alphabet = bit_strings(n).map_err(ProtocolError::Prob)?;

    // Block weights for X.
    let x_weight = |x: u32| -> Rat {
        let mut w = Rat::one();
        for i in 0..n {
            if x >> (n - 1 - i) & 1 == 1 {
                w *= p;
            } else {
                w *= &(Rat::one() - p);
            }
        }
        w
    };
    let weights: Vec<Rat> = (0..size as u32).map(x_weight).collect();
    let code = match code {
        Some(c) => c,
        None => huffman_code(&weights)?,
    };
    validate_prefix_code(&code, size)?;

    // Round 2 alphabet: (block, revealed pad bits) with the codeword label.
    let popcount = |x: u32| x.count_ones() as usize;
    let mut offsets = vec![0u32; size];
    let mut labels = Vec::new();
    let mut lengths = Vec::new();
    for x in 0..size as u32 {
        offsets[x as usize] = labels.len() as u32;
        let w = popcount(x);
        for kb in 0..1u32 << w {
            if w == 0 {
                labels.push(code[x as usize].clone());
            } else {
                labels.push(format!("{}-{}", code[x as usize], bits_label(kb, w)));
            }
            lengths.push((code[x as usize].len() + w) as u64);
        }
    }
    let reveal_alphabet = Alphabet::new(labels).map_err(ProtocolError::Prob)?;

    // Pad bits of k at the positions where x is 1, ascending, packed
    // most-significant-first.
    let select_bits = |x: u32, k: u32| -> u32 {
        let mut kb = 0u32;
        for i in 0..n {
            if x >> (n - 1 - i) & 1 == 1 {
                kb = (kb << 1) | (k >> (n - 1 - i) & 1);
            }
        }
        kb
    };

    let mut deal = BTreeMap::new();
    for y in 0..size as u32 {
        for k in 0..size as u32 {
            deal.insert(vec![y, k], k);
        }
    }
    let mut pad = BTreeMap::new();
    for y in 0..size as u32 {
        for k in 0..size as u32 {
            pad.insert(vec![y, k, k], y ^ k);
        }
    }
    let mut reveal = BTreeMap::new();
    for x in 0..size as u32 {
        for k in 0..size as u32 {
            reveal.insert(vec![x, k, 0], offsets[x as usize] + select_bits(x, k));
        }
    }

    // Output: decode the block from the codeword symbol, unpad the kept
    // positions. z_i = e (index 0) when erased, else 1 + y_i.
    let ternary = Alphabet::from_labels(&["e", "0", "1"]).map_err(ProtocolError::Prob)?;
    let z_alphabet = ternary.tuples(n).map_err(ProtocolError::Prob)?;
    let mut output = BTreeMap::new();
    for s in 0..size as u32 {
        for x in 0..size as u32 {
            let w = popcount(x);
            for kb in 0..1u32 << w {
                let mut z = 0u32;
                let mut consumed = 0;
                for i in 0..n {
                    let zi = if x >> (n - 1 - i) & 1 == 1 {
                        let ki = kb >> (w - 1 - consumed) & 1;
                        consumed += 1;
                        let yi = (s >> (n - 1 - i) & 1) ^ ki;
                        1 + yi
                    } else {
                        0
                    };
                    z = z * 3 + zi;
                }
                output.insert(vec![s, offsets[x as usize] + kb, 0], z);
            }
        }
    }

    let k_weight = Rat::new(BigInt::one(), BigInt::from(size));
    let protocol = Protocol::new(
        block.clone(),
        block.clone(),
        z_alphabet,
        [
            RandSource::trivial(),
            RandSource::new(pad_alphabet.clone(), vec![k_weight; size])?,
            RandSource::trivial(),
        ],
        vec![
            Round {
                sender: Party::Bob,
                receiver: Party::Alice,
                alphabet: pad_alphabet.clone(),
                table: deal,
                lengths: Some(vec![n as u64; size]),
            },
            Round {
                sender: Party::Bob,
                receiver: Party::Charlie,
                alphabet: pad_alphabet,
                table: pad,
                lengths: Some(vec![n as u64; size]),
            },
            Round {
                sender: Party::Alice,
                receiver: Party::Charlie,
                alphabet: reveal_alphabet,
                table: reveal,
                lengths: Some(lengths),
            },
        ],
        output,
    )?;

    let base_input = JointDist::new(
        vec![Var::new(var_names::X, bits.clone()), Var::new(var_names::Y, bits.clone())],
        vec![
            (vec![0, 0], (Rat::one() - p) * (Rat::one() - q)),
            (vec![0, 1], (Rat::one() - p) * q),
            (vec![1, 0], p * (Rat::one() - q)),
            (vec![1, 1], p * q),
        ],
    )
    .map_err(ProtocolError::Prob)?;
    let base_channel = Channel::deterministic(
        Var::new(var_names::X, bits.clone()),
        Var::new(var_names::Y, bits),
        Var::new(var_names::Z, ternary),
        |x, y| if x == 0 { 0 } else { 1 + y },
    )
    .map_err(ProtocolError::Prob)?;
    let problem = Problem::new(base_input, base_channel)
        .and_then(|p| p.iid_extend(n))
        .map_err(ProtocolError::Prob)?;
    Ok(Builtin { problem, protocol, block_length: n })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::rat;
    use crate::protocol::{
        rate_quadruple, transcript_distribution, verify_cut_lemma,
        verify_perfect_security, Link,
    };

    fn log2(v: f64) -> f64 {
        v.log2()
    }

    #[test]
    fn huffman_deterministic_and_optimal_shape() {
        let code = huffman_code(&[rat(1, 2), rat(1, 4), rat(1, 4)]).unwrap();
        assert_eq!(code.iter().map(String::len).collect::<Vec<_>>(), vec![1, 2, 2]);
        let balanced = huffman_code(&[rat(1, 4), rat(1, 4), rat(1, 4), rat(1, 4)]).unwrap();
        assert!(balanced.iter().all(|c| c.len() == 2));
        assert_eq!(kraft_sum(&balanced), Rat::one());
        // Deterministic: same input, same code.
        assert_eq!(code, huffman_code(&[rat(1, 2), rat(1, 4), rat(1, 4)]).unwrap());
    }

    #[test]
    fn and_protocol_is_secure_with_claimed_rates() {
        let b = build_and().unwrap();
        let report = verify_perfect_security(&b.protocol, &b.problem).unwrap();
        assert!(report.perfectly_secure(), "{report:?}");
        let td = transcript_distribution(&b.protocol, b.problem.input()).unwrap();
        let rates = rate_quadruple(&td, b.block_length).unwrap();
        assert!((rates.r12 - log2(6.0)).abs() < 1e-12, "r12 = {}", rates.r12);
        assert!((rates.r23 - log2(3.0)).abs() < 1e-12);
        assert!((rates.r31 - log2(3.0)).abs() < 1e-12);
        assert!((rates.rho - log2(6.0)).abs() < 1e-12, "rho = {}", rates.rho);
    }

    #[test]
    fn sum_protocol_rates_and_cuts() {
        let b = build_sum().unwrap();
        let report = verify_perfect_security(&b.protocol, &b.problem).unwrap();
        assert!(report.perfectly_secure(), "{report:?}");
        let td = transcript_distribution(&b.protocol, b.problem.input()).unwrap();
        let rates = rate_quadruple(&td, 1).unwrap();
        for r in [rates.r12, rates.r23, rates.r31, rates.rho] {
            assert!((r - log2(3.0)).abs() < 1e-12, "rate {r}");
        }
        // The sum problem is already in normal form; each user's two
        // incident transcripts determine its symbol.
        assert_eq!(verify_cut_lemma(&td, &b.problem).unwrap(), (true, true, true));
    }

    #[test]
    fn sum_protocol_secure_under_switched_full_support_input() {
        let b = build_sum().unwrap();
        let skewed = JointDist::new(
            b.problem.input().vars().to_vec(),
            vec![
                (vec![0, 0], rat(1, 2)),
                (vec![0, 1], rat(1, 5)),
                (vec![1, 0], rat(1, 5)),
                (vec![1, 1], rat(1, 10)),
            ],
        )
        .unwrap();
        let switched = b.problem.with_input(skewed).unwrap();
        let report = verify_perfect_security(&b.protocol, &switched).unwrap();
        assert!(report.perfectly_secure(), "{report:?}");
        // Point mass stays secure (degenerate switch).
        let point = JointDist::new(
            b.problem.input().vars().to_vec(),
            vec![(vec![1, 1], Rat::one())],
        )
        .unwrap();
        let report = verify_perfect_security(&b.protocol, &b.problem.with_input(point).unwrap())
            .unwrap();
        assert!(report.perfectly_secure());
    }

    #[test]
    fn group_protocol_cyclic_and_symmetric() {
        for (group, expect) in [
            (GroupSpec::cyclic(2).unwrap(), 1.0),
            (GroupSpec::cyclic(3).unwrap(), log2(3.0)),
            (GroupSpec::symmetric_3(), log2(6.0)),
        ] {
            let b = build_group_add(&group).unwrap();
            let report = verify_perfect_security(&b.protocol, &b.problem).unwrap();
            assert!(report.perfectly_secure(), "order {}: {report:?}", group.order());
            let td = transcript_distribution(&b.protocol, b.problem.input()).unwrap();
            let rates = rate_quadruple(&td, 1).unwrap();
            for r in [rates.r12, rates.r23, rates.r31, rates.rho] {
                assert!((r - expect).abs() < 1e-12, "rate {r} vs {expect}");
            }
        }
    }

    #[test]
    fn symmetric_group_is_nonabelian_and_protocol_still_correct() {
        let s3 = GroupSpec::symmetric_3();
        let mut found = false;
        for a in 0..6 {
            for b in 0..6 {
                if s3.mul(a, b) != s3.mul(b, a) {
                    found = true;
                }
            }
        }
        assert!(found, "S3 must be non-abelian");
    }

    #[test]
    fn invalid_group_rejected() {
        // Not associative: subtraction mod 3 (still a Latin square).
        let labels: Vec<String> = (0..3).map(|i| i.to_string()).collect();
        let table = (0..3u32)
            .map(|a| (0..3u32).map(|b| (a + 2 * b) % 3).collect())
            .collect();
        assert!(matches!(
            GroupSpec::new(labels, table),
            Err(ProtocolError::BadParameter(_))
        ));
    }

    #[test]
    fn remote_ot_2_1_rates_and_security() {
        let b = build_remote_ot(2, 1).unwrap();
        let report = verify_perfect_security(&b.protocol, &b.problem).unwrap();
        assert!(report.perfectly_secure(), "{report:?}");
        let td = transcript_distribution(&b.protocol, b.problem.input()).unwrap();
        let rates = rate_quadruple(&td, 1).unwrap();
        assert!((rates.r12 - 3.0).abs() < 1e-12, "r12 = {}", rates.r12);
        assert!((rates.r23 - 2.0).abs() < 1e-12, "r23 = {}", rates.r23);
        assert!((rates.r31 - 2.0).abs() < 1e-12, "r31 = {}", rates.r31);
        assert!((rates.rho - 3.0).abs() < 1e-12, "rho = {}", rates.rho);
    }

    #[test]
    fn remote_ot_4_1_r23() {
        let b = build_remote_ot(4, 1).unwrap();
        let report = verify_perfect_security(&b.protocol, &b.problem).unwrap();
        assert!(report.perfectly_secure());
        let td = transcript_distribution(&b.protocol, b.problem.input()).unwrap();
        let rates = rate_quadruple(&td, 1).unwrap();
        assert!((rates.r23 - 3.0).abs() < 1e-12, "r23 = {}", rates.r23);
        assert!((rates.r12 - 6.0).abs() < 1e-12, "r12 = {}", rates.r12);
    }

    #[test]
    fn remote_ot_guard() {
        assert!(matches!(
            build_remote_ot(21, 1),
            Err(ProtocolError::BadParameter(_))
        ));
    }

    #[test]
    fn erasure_unit_block() {
        let b = build_controlled_erasure(&rat(1, 2), &rat(1, 2), 1, None).unwrap();
        let report = verify_perfect_security(&b.protocol, &b.problem).unwrap();
        assert!(report.perfectly_secure(), "{report:?}");
        let td = transcript_distribution(&b.protocol, b.problem.input()).unwrap();
        let rates = rate_quadruple(&td, 1).unwrap();
        assert!((rates.r12 - 1.0).abs() < 1e-12);
        assert!((rates.r23 - 1.0).abs() < 1e-12);
        assert!((rates.r31 - 1.5).abs() < 1e-12, "r31 = {}", rates.r31);
        assert!((rates.rho - 1.0).abs() < 1e-12);
        // Expected length on the reveal link: 1 codeword bit + p pad bits.
        assert_eq!(td.expected_lengths[Link::L31.index()], Some(rat(3, 2)));
    }

    #[test]
    fn erasure_block_two_quarter() {
        let b = build_controlled_erasure(&rat(1, 4), &rat(1, 3), 2, None).unwrap();
        let report = verify_perfect_security(&b.protocol, &b.problem).unwrap();
        assert!(report.perfectly_secure(), "{report:?}");
        let td = transcript_distribution(&b.protocol, b.problem.input()).unwrap();
        // Huffman on (9/16, 3/16, 3/16, 1/16): E|c| = 27/16; plus 2p = 1/2.
        assert_eq!(td.expected_lengths[Link::L31.index()], Some(rat(35, 16)));
        let h2 = |p: f64| -p * p.log2() - (1.0 - p) * (1.0 - p).log2();
        let e31 = 35.0 / 16.0;
        assert!(e31 < 2.0 * (h2(0.25) + 0.25) + 1.0);
        // Per-symbol entropy rate of the reveal link is H2(p) + p exactly
        // (the codeword determines the block; pad bits are fresh uniform).
        let rates = rate_quadruple(&td, 2).unwrap();
        assert!((rates.r31 - (h2(0.25) + 0.25)).abs() < 1e-9, "r31 = {}", rates.r31);
        assert!((rates.r12 - 1.0).abs() < 1e-12);
        assert!((rates.r23 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn erasure_rejects_bad_code() {
        let not_prefix_free = vec!["0".to_string(), "01".to_string()];
        assert!(build_controlled_erasure(&rat(1, 2), &rat(1, 2), 1, Some(not_prefix_free))
            .is_err());
        let wrong_count = vec!["0".to_string()];
        assert!(build_controlled_erasure(&rat(1, 2), &rat(1, 2), 1, Some(wrong_count)).is_err());
    }
}
