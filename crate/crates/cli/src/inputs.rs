//! Problem and protocol sources: the built-in families selected by flags,
//! JSON files, and the `--input-dist` grammar for switching the input law.

use clap::{Args, ValueEnum};

use secomp_core::builtin::{
    build_and, build_controlled_erasure, build_group_add, build_remote_ot, build_sum, Builtin,
    GroupSpec,
};
use secomp_core::prob::{rat, JointDist};
use secomp_core::protocol::Protocol;
use secomp_core::{Problem, Rat};

use crate::config::parse_exact_list;
use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BuiltinName {
    And,
    Sum,
    GroupAdd,
    RemoteOt,
    Erasure,
}

/// Flags selecting and parameterizing a built-in family.
#[derive(Args, Clone, Debug)]
pub struct BuiltinArgs {
    /// Built-in problem/protocol family.
    #[arg(long, value_enum)]
    pub builtin: Option<BuiltinName>,
    /// remote-ot: number of strings the receiver chooses from.
    #[arg(long)]
    pub m: Option<usize>,
    /// remote-ot: bits per string; erasure: block length.
    #[arg(long)]
    pub n: Option<usize>,
    /// erasure: erasure probability (exact rational or decimal).
    #[arg(long)]
    pub p: Option<String>,
    /// erasure: source probability of the symbol 1 (exact rational or decimal).
    #[arg(long)]
    pub q: Option<String>,
    /// group-add: group order for a cyclic group, or `s3`.
    #[arg(long)]
    pub order: Option<String>,
}

impl BuiltinArgs {
    /// Reject parameters that do not belong to the selected family, so a
    /// typo'd invocation fails loudly instead of being silently ignored.
    fn check_flags(&self, name: BuiltinName) -> Result<(), CliError> {
        let allowed: &[(&str, bool)] = match name {
            BuiltinName::And | BuiltinName::Sum => &[],
            BuiltinName::GroupAdd => &[("--order", true)],
            BuiltinName::RemoteOt => &[("--m", true), ("--n", true)],
            BuiltinName::Erasure => &[("--p", true), ("--q", true), ("--n", true)],
        };
        let given = [
            ("--m", self.m.is_some()),
            ("--n", self.n.is_some()),
            ("--p", self.p.is_some()),
            ("--q", self.q.is_some()),
            ("--order", self.order.is_some()),
        ];
        for (flag, present) in given {
            if present && !allowed.iter().any(|(a, _)| *a == flag) {
                return Err(CliError::parse(format!(
                    "{flag} does not apply to --builtin {}",
                    name.to_possible_value().expect("skip-less enum").get_name()
                )));
            }
        }
        Ok(())
    }

    pub fn build(&self) -> Result<Builtin, CliError> {
        let name = self
            .builtin
            .ok_or_else(|| CliError::parse("no --builtin given"))?;
        self.check_flags(name)?;
        let built = match name {
            BuiltinName::And => build_and(),
            BuiltinName::Sum => build_sum(),
            BuiltinName::GroupAdd => {
                let order = self
                    .order
                    .as_deref()
                    .ok_or_else(|| CliError::parse("group-add requires --order"))?;
                let spec = if order.eq_ignore_ascii_case("s3") {
                    GroupSpec::symmetric_3()
                } else {
                    let k: usize = order.parse().map_err(|_| {
                        CliError::parse(format!(
                            "--order must be an integer or `s3`, got `{order}`"
                        ))
                    })?;
                    GroupSpec::cyclic(k).map_err(CliError::run)?
                };
                build_group_add(&spec)
            }
            BuiltinName::RemoteOt => build_remote_ot(self.m.unwrap_or(2), self.n.unwrap_or(1)),
            BuiltinName::Erasure => {
                let p = exact_or_default(self.p.as_deref(), rat(1, 2))?;
                let q = exact_or_default(self.q.as_deref(), rat(1, 2))?;
                build_controlled_erasure(&p, &q, self.n.unwrap_or(1), None)
            }
        };
        built.map_err(CliError::run)
    }

    /// Alphabet size to use for the convenience conversion of rates into
    /// group-symbol units, when the family has one.
    pub fn symbol_base(&self) -> Option<u32> {
        match self.builtin? {
            BuiltinName::GroupAdd => {
                let order = self.order.as_deref()?;
                if order.eq_ignore_ascii_case("s3") {
                    Some(6)
                } else {
                    order.parse().ok()
                }
            }
            _ => None,
        }
    }
}

fn exact_or_default(given: Option<&str>, default: Rat) -> Result<Rat, CliError> {
    match given {
        Some(s) => Ok(parse_exact_list(s)?
            .into_iter()
            .next()
            .expect("parse_exact_list yields at least one value")),
        None => Ok(default),
    }
}

pub fn load_problem(path: &str) -> Result<Problem, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::parse(format!("cannot read problem `{path}`: {e}")))?;
    Problem::from_json(&text).map_err(|e| CliError::parse(format!("problem `{path}`: {e}")))
}

pub fn load_protocol(path: &str) -> Result<Protocol, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::parse(format!("cannot read protocol `{path}`: {e}")))?;
    Protocol::from_json(&text).map_err(|e| CliError::parse(format!("protocol `{path}`: {e}")))
}

/// Apply an `--input-dist` specification to a problem.
///
/// Grammar:
/// * `uniform` — the uniform product law on X × Y.
/// * `v1,…,vk-product` — independent inputs. With two values on binary
///   alphabets they are the probabilities of the symbol at index 1 (so
///   `0.456,0.397-product` means P(X=1) = 0.456, P(Y=1) = 0.397); otherwise
///   exactly |X| + |Y| values: the X pmf followed by the Y pmf.
/// * `v1,…,vk-joint` — a full joint pmf over X × Y in row-major order
///   (Y varying fastest).
///
/// Values are exact: fractions `a/b`, integers, or finite decimals.
pub fn apply_input_dist(problem: Problem, spec: &str) -> Result<Problem, CliError> {
    let spec = spec.trim();
    let x = problem.channel().x().clone();
    let y = problem.channel().y().clone();
    let (nx, ny) = (x.alphabet.len(), y.alphabet.len());

    let input = if spec.eq_ignore_ascii_case("uniform") {
        let w = Rat::new((1i64).into(), ((nx * ny) as i64).into());
        let mut atoms = Vec::new();
        for xi in 0..nx as u32 {
            for yi in 0..ny as u32 {
                atoms.push((vec![xi, yi], w.clone()));
            }
        }
        JointDist::new(vec![x, y], atoms)
    } else if let Some(vals) = spec.strip_suffix("-product") {
        let vals = parse_exact_list(vals)?;
        let (px, py) = if vals.len() == 2 && nx == 2 && ny == 2 {
            let one = Rat::new(1.into(), 1.into());
            (
                vec![&one - &vals[0], vals[0].clone()],
                vec![&one - &vals[1], vals[1].clone()],
            )
        } else if vals.len() == nx + ny {
            (vals[..nx].to_vec(), vals[nx..].to_vec())
        } else {
            return Err(CliError::parse(format!(
                "product spec needs 2 values (binary alphabets) or |X|+|Y| = {} values, got {}",
                nx + ny,
                vals.len()
            )));
        };
        let atoms = (0..nx)
            .flat_map(|xi| {
                let px = &px;
                let py = &py;
                (0..ny).map(move |yi| (vec![xi as u32, yi as u32], &px[xi] * &py[yi]))
            })
            .collect();
        JointDist::new(vec![x, y], atoms)
    } else if let Some(vals) = spec.strip_suffix("-joint") {
        let vals = parse_exact_list(vals)?;
        if vals.len() != nx * ny {
            return Err(CliError::parse(format!(
                "joint spec needs |X|·|Y| = {} values, got {}",
                nx * ny,
                vals.len()
            )));
        }
        let atoms = vals
            .into_iter()
            .enumerate()
            .map(|(i, w)| (vec![(i / ny) as u32, (i % ny) as u32], w))
            .collect();
        JointDist::new(vec![x, y], atoms)
    } else {
        return Err(CliError::parse(format!(
            "input-dist `{spec}` is not `uniform`, `…-product`, or `…-joint`"
        )));
    };

    let input = input.map_err(|e| CliError::parse(format!("input-dist: {e}")))?;
    problem
        .with_input(input)
        .map_err(|e| CliError::parse(format!("input-dist: {e}")))
}
