//! JSON problem format.
//!
//! Probabilities are written as rational strings (`"3/4"`, `"1"`); JSON
//! numbers are deliberately not accepted for weights, so a file containing
//! float probabilities fails to parse instead of silently losing precision.
//!
//! ```json
//! {
//!   "x_alphabet": ["0", "1"],
//!   "y_alphabet": ["0", "1"],
//!   "z_alphabet": ["0", "1"],
//!   "input": { "0,0": "1/4", "0,1": "1/4", "1,0": "1/4", "1,1": "1/4" },
//!   "channel": { "1,1": { "1": "1" }, "0,0": { "0": "1" }, ... }
//! }
//! ```
//!
//! `input` maps `"x,y"` pairs to weights (omitted pairs have probability 0);
//! `channel` maps `"x,y"` pairs to `{z: weight}` rows and must cover every
//! pair of symbols.

use super::{Alphabet, Channel, JointDist, Problem, ProbError, Rat, Var};
use num::{BigInt, One, Signed, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::str::FromStr;

/// Parse `"num"` or `"num/den"` into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rat, ProbError> {
    let bad = || ProbError::Parse(format!("`{s}` is not a rational (use \"num\" or \"num/den\")"));
    let mut parts = s.splitn(2, '/');
    let num = BigInt::from_str(parts.next().unwrap_or("").trim()).map_err(|_| bad())?;
    let den = match parts.next() {
        None => BigInt::one(),
        Some(d) => BigInt::from_str(d.trim()).map_err(|_| bad())?,
    };
    if den.is_zero() {
        return Err(ProbError::Parse(format!("`{s}` has a zero denominator")));
    }
    Ok(Rat::new(num, den))
}

/// Canonical string form: `"num/den"`, or `"num"` when the denominator is 1.
pub fn rational_string(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

#[derive(Serialize, Deserialize)]
struct ProblemFile {
    x_alphabet: Vec<String>,
    y_alphabet: Vec<String>,
    z_alphabet: Vec<String>,
    /// `"x,y" -> weight`; omitted pairs carry zero probability.
    input: BTreeMap<String, String>,
    /// `"x,y" -> { z -> weight }`; every pair must be present.
    channel: BTreeMap<String, BTreeMap<String, String>>,
}

fn split_pair(key: &str) -> Result<(&str, &str), ProbError> {
    key.split_once(',')
        .ok_or_else(|| ProbError::Parse(format!("key `{key}` is not of the form \"x,y\"")))
}

fn lookup(alpha: &Alphabet, which: &str, symbol: &str) -> Result<u32, ProbError> {
    alpha.index_of(symbol).ok_or_else(|| {
        ProbError::Parse(format!("symbol `{symbol}` is not in the {which} alphabet"))
    })
}

impl Problem {
    pub fn from_json(text: &str) -> Result<Problem, ProbError> {
        let file: ProblemFile =
            serde_json::from_str(text).map_err(|e| ProbError::Parse(e.to_string()))?;
        let xa = Alphabet::new(file.x_alphabet)?;
        let ya = Alphabet::new(file.y_alphabet)?;
        let za = Alphabet::new(file.z_alphabet)?;
        let x = Var::new(super::var_names::X, xa);
        let y = Var::new(super::var_names::Y, ya);
        let z = Var::new(super::var_names::Z, za);

        let mut weights = Vec::new();
        for (key, w) in &file.input {
            let (xs, ys) = split_pair(key)?;
            let xi = lookup(&x.alphabet, "X", xs)?;
            let yi = lookup(&y.alphabet, "Y", ys)?;
            weights.push((vec![xi, yi], parse_rational(w)?));
        }
        let input = JointDist::new(vec![x.clone(), y.clone()], weights)?;

        let mut rows =
            vec![vec![Rat::zero(); z.alphabet.len()]; x.alphabet.len() * y.alphabet.len()];
        let mut covered = vec![false; rows.len()];
        for (key, row) in &file.channel {
            let (xs, ys) = split_pair(key)?;
            let xi = lookup(&x.alphabet, "X", xs)? as usize;
            let yi = lookup(&y.alphabet, "Y", ys)? as usize;
            let slot = xi * y.alphabet.len() + yi;
            if covered[slot] {
                return Err(ProbError::Parse(format!("duplicate channel row for `{key}`")));
            }
            covered[slot] = true;
            for (zs, w) in row {
                let zi = lookup(&z.alphabet, "Z", zs)? as usize;
                let w = parse_rational(w)?;
                if w.is_negative() {
                    return Err(ProbError::NegativeWeight(w.to_string()));
                }
                rows[slot][zi] = w;
            }
        }
        if let Some(slot) = covered.iter().position(|c| !c) {
            let xi = (slot / y.alphabet.len()) as u32;
            let yi = (slot % y.alphabet.len()) as u32;
            return Err(ProbError::Parse(format!(
                "channel row missing for `{},{}`",
                x.alphabet.symbol(xi),
                y.alphabet.symbol(yi)
            )));
        }
        let channel = Channel::new(x, y, z, rows)?;
        Problem::new(input, channel)
    }

    pub fn to_json(&self) -> String {
        let x = self.channel().x();
        let y = self.channel().y();
        let z = self.channel().z();
        let mut input = BTreeMap::new();
        for (key, w) in self.input().atoms() {
            let label =
                format!("{},{}", x.alphabet.symbol(key[0]), y.alphabet.symbol(key[1]));
            input.insert(label, rational_string(w));
        }
        let mut channel = BTreeMap::new();
        for xi in 0..x.alphabet.len() as u32 {
            for yi in 0..y.alphabet.len() as u32 {
                let mut row = BTreeMap::new();
                for (zi, w) in self.channel().row(xi, yi).iter().enumerate() {
                    if !w.is_zero() {
                        row.insert(z.alphabet.symbol(zi as u32).to_string(), rational_string(w));
                    }
                }
                let label =
                    format!("{},{}", x.alphabet.symbol(xi), y.alphabet.symbol(yi));
                channel.insert(label, row);
            }
        }
        let file = ProblemFile {
            x_alphabet: x.alphabet.symbols().to_vec(),
            y_alphabet: y.alphabet.symbols().to_vec(),
            z_alphabet: z.alphabet.symbols().to_vec(),
            input,
            channel,
        };
        serde_json::to_string_pretty(&file).expect("problem serialization cannot fail")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::rat;

    #[test]
    fn rational_round_trip() {
        for s in ["0", "1", "3/4", "-2/7", "10/4"] {
            let r = parse_rational(s).unwrap();
            let back = parse_rational(&rational_string(&r)).unwrap();
            assert_eq!(r, back);
        }
        assert_eq!(parse_rational("10/4").unwrap(), rat(5, 2));
        assert!(parse_rational("0.5").is_err());
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("").is_err());
    }

    const AND_JSON: &str = r#"{
        "x_alphabet": ["0", "1"],
        "y_alphabet": ["0", "1"],
        "z_alphabet": ["0", "1"],
        "input": { "0,0": "1/4", "0,1": "1/4", "1,0": "1/4", "1,1": "1/4" },
        "channel": {
            "0,0": { "0": "1" },
            "0,1": { "0": "1" },
            "1,0": { "0": "1" },
            "1,1": { "1": "1" }
        }
    }"#;

    #[test]
    fn problem_round_trip() {
        let p = Problem::from_json(AND_JSON).unwrap();
        assert!(p.channel().is_deterministic());
        assert_eq!(p.joint().unwrap().prob_of(&[1, 1, 1]), rat(1, 4));
        let p2 = Problem::from_json(&p.to_json()).unwrap();
        assert!(p.joint().unwrap().same_distribution(&p2.joint().unwrap()));
    }

    #[test]
    fn float_weights_rejected() {
        let bad = AND_JSON.replace("\"1/4\"", "0.25");
        let err = Problem::from_json(&bad).unwrap_err();
        assert!(matches!(err, ProbError::Parse(_)));
    }

    #[test]
    fn missing_channel_row_rejected() {
        let bad = AND_JSON.replace("\"1,1\": { \"1\": \"1\" }", "\"1,1\": { \"1\": \"1\" },");
        // Removing a row entirely:
        let bad2 = AND_JSON.replace("\"1,0\": { \"0\": \"1\" },", "");
        assert!(Problem::from_json(&bad).is_err() || Problem::from_json(&bad2).is_err());
        let err = Problem::from_json(&bad2).unwrap_err();
        assert!(err.to_string().contains("channel row missing"));
    }
}
