//! JSON serialization for protocols.
//!
//! Lookup keys are symbol labels joined with `|` (reserved in alphabets):
//! the sender's input label (when the sender holds one), the labels of the
//! earlier rounds the sender sees, and the sender's randomness label.

use super::{Party, Protocol, ProtocolError, RandSource, Round};
use crate::prob::{parse_rational, rational_string, Alphabet, ProbError, Rat};
use num::Zero;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Serialize, Deserialize)]
struct RandFile {
    symbols: Vec<String>,
    /// Label → weight (rationals as strings); omitted labels mean zero.
    pmf: BTreeMap<String, String>,
}

#[derive(Serialize, Deserialize)]
struct RoundFile {
    sender: u8,
    receiver: u8,
    symbols: Vec<String>,
    table: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    lengths: Option<BTreeMap<String, u64>>,
}

#[derive(Serialize, Deserialize)]
struct ProtocolFile {
    x_alphabet: Vec<String>,
    y_alphabet: Vec<String>,
    z_alphabet: Vec<String>,
    /// Randomness of users 1, 2, 3 in order.
    randomness: Vec<RandFile>,
    rounds: Vec<RoundFile>,
    output: BTreeMap<String, String>,
}

fn parse_err(msg: String) -> ProtocolError {
    ProtocolError::Prob(ProbError::Parse(msg))
}

/// The alphabets a key for round `t` draws its parts from, in order.
fn key_alphabets<'a>(
    x: &'a Alphabet,
    y: &'a Alphabet,
    randomness: &'a [RandSource; 3],
    rounds: &'a [Round],
    sender: Party,
    t: usize,
) -> Vec<&'a Alphabet> {
    let mut parts: Vec<&Alphabet> = Vec::new();
    match sender {
        Party::Alice => parts.push(x),
        Party::Bob => parts.push(y),
        Party::Charlie => {}
    }
    for round in rounds.iter().take(t) {
        if round.link().touches(sender) {
            parts.push(&round.alphabet);
        }
    }
    parts.push(&randomness[sender.index()].alphabet);
    parts
}

fn encode_key(key: &[u32], alphabets: &[&Alphabet]) -> String {
    key.iter()
        .zip(alphabets)
        .map(|(&i, a)| a.symbol(i).to_string())
        .collect::<Vec<_>>()
        .join("|")
}

fn decode_key(text: &str, alphabets: &[&Alphabet]) -> Result<Vec<u32>, ProtocolError> {
    let parts: Vec<&str> = text.split('|').collect();
    if parts.len() != alphabets.len() {
        return Err(parse_err(format!(
            "key `{text}` has {} parts, expected {}",
            parts.len(),
            alphabets.len()
        )));
    }
    parts
        .iter()
        .zip(alphabets)
        .map(|(p, a)| {
            a.index_of(p)
                .ok_or_else(|| parse_err(format!("unknown symbol `{p}` in key `{text}`")))
        })
        .collect()
}

impl Protocol {
    pub fn to_json(&self) -> String {
        let rand_file = |r: &RandSource| RandFile {
            symbols: r.alphabet.symbols().to_vec(),
            pmf: r
                .alphabet
                .symbols()
                .iter()
                .zip(&r.pmf)
                .filter(|(_, w)| !w.is_zero())
                .map(|(s, w)| (s.clone(), rational_string(w)))
                .collect(),
        };
        let rounds = self
            .rounds
            .iter()
            .enumerate()
            .map(|(t, round)| {
                let alphabets = key_alphabets(
                    &self.x_alphabet,
                    &self.y_alphabet,
                    &self.randomness,
                    &self.rounds,
                    round.sender,
                    t,
                );
                RoundFile {
                    sender: round.sender.number(),
                    receiver: round.receiver.number(),
                    symbols: round.alphabet.symbols().to_vec(),
                    table: round
                        .table
                        .iter()
                        .map(|(k, &v)| {
                            (encode_key(k, &alphabets), round.alphabet.symbol(v).to_string())
                        })
                        .collect(),
                    lengths: round.lengths.as_ref().map(|lens| {
                        round
                            .alphabet
                            .symbols()
                            .iter()
                            .zip(lens)
                            .map(|(s, &l)| (s.clone(), l))
                            .collect()
                    }),
                }
            })
            .collect();
        let out_alphabets = key_alphabets(
            &self.x_alphabet,
            &self.y_alphabet,
            &self.randomness,
            &self.rounds,
            Party::Charlie,
            self.rounds.len(),
        );
        let file = ProtocolFile {
            x_alphabet: self.x_alphabet.symbols().to_vec(),
            y_alphabet: self.y_alphabet.symbols().to_vec(),
            z_alphabet: self.z_alphabet.symbols().to_vec(),
            randomness: self.randomness.iter().map(rand_file).collect(),
            rounds,
            output: self
                .output
                .iter()
                .map(|(k, &z)| {
                    (encode_key(k, &out_alphabets), self.z_alphabet.symbol(z).to_string())
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("serializing to JSON cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Protocol, ProtocolError> {
        let file: ProtocolFile = serde_json::from_str(text)
            .map_err(|e| parse_err(format!("protocol JSON: {e}")))?;
        let x_alphabet = Alphabet::new(file.x_alphabet).map_err(ProtocolError::Prob)?;
        let y_alphabet = Alphabet::new(file.y_alphabet).map_err(ProtocolError::Prob)?;
        let z_alphabet = Alphabet::new(file.z_alphabet).map_err(ProtocolError::Prob)?;
        if file.randomness.len() != 3 {
            return Err(parse_err(format!(
                "expected randomness for 3 users, got {}",
                file.randomness.len()
            )));
        }
        let mut randomness = Vec::with_capacity(3);
        for (u, r) in file.randomness.into_iter().enumerate() {
            let alphabet = Alphabet::new(r.symbols).map_err(ProtocolError::Prob)?;
            let mut pmf = vec![Rat::zero(); alphabet.len()];
            for (label, w) in &r.pmf {
                let i = alphabet.index_of(label).ok_or_else(|| {
                    parse_err(format!("pmf of user {}: unknown symbol `{label}`", u + 1))
                })?;
                pmf[i as usize] = parse_rational(w).map_err(ProtocolError::Prob)?;
            }
            randomness.push(RandSource::new(alphabet, pmf).map_err(|e| match e {
                ProtocolError::BadRandomness { problem, .. } => {
                    ProtocolError::BadRandomness { user: u as u8 + 1, problem }
                }
                other => other,
            })?);
        }
        let randomness: [RandSource; 3] =
            randomness.try_into().expect("length checked above");

        let mut rounds: Vec<Round> = Vec::with_capacity(file.rounds.len());
        for (t, rf) in file.rounds.into_iter().enumerate() {
            let sender = Party::from_number(rf.sender)
                .ok_or_else(|| parse_err(format!("round {t}: bad sender {}", rf.sender)))?;
            let receiver = Party::from_number(rf.receiver)
                .ok_or_else(|| parse_err(format!("round {t}: bad receiver {}", rf.receiver)))?;
            let alphabet = Alphabet::new(rf.symbols).map_err(ProtocolError::Prob)?;
            let alphabets =
                key_alphabets(&x_alphabet, &y_alphabet, &randomness, &rounds, sender, t);
            let mut table = BTreeMap::new();
            for (k, v) in &rf.table {
                let key = decode_key(k, &alphabets)?;
                let value = alphabet
                    .index_of(v)
                    .ok_or_else(|| parse_err(format!("round {t}: unknown symbol `{v}`")))?;
                if table.insert(key, value).is_some() {
                    return Err(parse_err(format!("round {t}: duplicate key `{k}`")));
                }
            }
            let lengths = match rf.lengths {
                None => None,
                Some(map) => {
                    let mut lens = vec![0u64; alphabet.len()];
                    let mut seen = vec![false; alphabet.len()];
                    for (label, l) in map {
                        let i = alphabet.index_of(&label).ok_or_else(|| {
                            parse_err(format!("round {t}: length for unknown `{label}`"))
                        })? as usize;
                        lens[i] = l;
                        seen[i] = true;
                    }
                    if seen.iter().any(|s| !s) {
                        return Err(parse_err(format!(
                            "round {t}: length map does not cover the alphabet"
                        )));
                    }
                    Some(lens)
                }
            };
            rounds.push(Round { sender, receiver, alphabet, table, lengths });
        }

        let out_alphabets = key_alphabets(
            &x_alphabet,
            &y_alphabet,
            &randomness,
            &rounds,
            Party::Charlie,
            rounds.len(),
        );
        let mut output = BTreeMap::new();
        for (k, v) in &file.output {
            let key = decode_key(k, &out_alphabets)?;
            let value = z_alphabet
                .index_of(v)
                .ok_or_else(|| parse_err(format!("output: unknown symbol `{v}`")))?;
            if output.insert(key, value).is_some() {
                return Err(parse_err(format!("output: duplicate key `{k}`")));
            }
        }
        Protocol::new(x_alphabet, y_alphabet, z_alphabet, randomness, rounds, output)
    }
}

#[cfg(test)]
mod tests {
    use super::super::tests_support::xor_protocol;
    use super::*;
    use crate::prob::{var_names, JointDist, Var};

    #[test]
    fn protocol_json_round_trip() {
        let p = xor_protocol();
        let text = p.to_json();
        let q = Protocol::from_json(&text).unwrap();
        assert_eq!(p.to_json(), q.to_json());
        // Same transcript distribution after the round trip.
        let input = JointDist::uniform(vec![
            Var::new(var_names::X, p.x_alphabet.clone()),
            Var::new(var_names::Y, p.y_alphabet.clone()),
        ])
        .unwrap();
        let a = super::super::transcript_distribution(&p, &input).unwrap();
        let b = super::super::transcript_distribution(&q, &input).unwrap();
        assert!(a.joint.same_distribution(&b.joint));
    }

    #[test]
    fn bad_symbol_in_key_rejected() {
        let p = xor_protocol();
        let text = p.to_json().replace("\"0|0|-\"", "\"0|q|-\"");
        let err = Protocol::from_json(&text).unwrap_err();
        assert!(err.to_string().contains("unknown symbol"), "{err}");
    }
}
