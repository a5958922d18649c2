//! Asymptotic (vanishing-error) rate lower bounds and the rate formulas of
//! the two matching asymptotic schemes.

use serde::Serialize;

use super::{link_from_rows, row_constant, BoundReport, BoundsError};
use crate::info::{
    conditional_graph_entropy, normal_form, residual_information, GraphEntropyConfig, Side,
};
use crate::prob::Problem;
use num::ToPrimitive;

/// Asymptotic coding schemes whose rates are reported in closed form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum AsymptoticScheme {
    /// Linear (syndrome) coding for addition over an abelian group: every
    /// rate equals `H(Z)`.
    KornerMarton,
    /// Prefix-free description of the erasure pattern plus side-information
    /// coding of the revealed values.
    SlepianWolfErasure,
}

/// Closed-form rates of one asymptotic scheme on a matching problem.
#[derive(Clone, Debug, Serialize)]
pub struct AsymptoticRateReport {
    pub scheme: String,
    pub r12: f64,
    pub r23: f64,
    pub r31: f64,
    pub rho: f64,
    /// How the finite-blocklength rates approach these numbers.
    pub slack: String,
}

impl AsymptoticRateReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_markdown(&self) -> String {
        format!(
            "# Asymptotic scheme rates ({})\n\n| quantity | bits |\n|---|---|\n| r12 | {:.6} |\n| r23 | {:.6} |\n| r31 | {:.6} |\n| rho | {:.6} |\n\n{}\n",
            self.scheme, self.r12, self.r23, self.r31, self.rho, self.slack
        )
    }
}

/// Vanishing-error lower bounds on the three links and the randomness rate.
///
/// Requires a deterministic output function. The dependent-input rows (via
/// conditional graph entropies) always apply; when the input law is a
/// full-support product and the function is in normal form, the stronger
/// independent-input rows are added, and each quantity reports the max of
/// its applicable rows.
pub fn asymptotic_bounds(problem: &Problem) -> Result<BoundReport, BoundsError> {
    if !problem.channel().is_deterministic() {
        return Err(BoundsError::RandomizedChannel);
    }
    let joint = problem.joint()?;
    let xn = problem.channel().x().name.clone();
    let yn = problem.channel().y().name.clone();
    let zn = problem.channel().z().name.clone();
    let (x, y, z) = (xn.as_str(), yn.as_str(), zn.as_str());

    let gcfg = GraphEntropyConfig::default();
    let hgx = conditional_graph_entropy(problem, Side::X, &gcfg)?;
    let hgy = conditional_graph_entropy(problem, Side::Y, &gcfg)?;
    let ri_xy = residual_information(&joint, &[x], &[y])?;
    let ri_xz = residual_information(&joint, &[x], &[z])?;
    let ri_yz = residual_information(&joint, &[y], &[z])?;
    let hz = joint.entropy(&[z], &[])?;
    let i_xy = joint.mutual_information(&[x], &[y], &[])?;

    let mut rows12 = vec![row_constant(
        "dependent-input: H_G(X|Y) + H_G(Y|X) - H(Z) + max{RI(X;Z), RI(Y;Z)}",
        hgx + hgy - hz + ri_xz.max(ri_yz),
    )];
    let mut rows23 = vec![row_constant("dependent-input: H_G(Y|X) + RI(X;Z)", hgy + ri_xz)];
    let mut rows31 = vec![row_constant("dependent-input: H_G(X|Y) + RI(Y;Z)", hgx + ri_yz)];
    let mut rows_rho = vec![
        row_constant(
            "dependent-input: H_G(X|Y) + H_G(Y|X) - H(Z) + RI(X;Z) + RI(Y;Z)",
            hgx + hgy - hz + ri_xz + ri_yz,
        ),
        row_constant(
            "dependent-input: H_G(X|Y) + H_G(Y|X) - I(X;Y) + RI(X;Y) + max{RI(X;Z), RI(Y;Z)} - H(Z)",
            hgx + hgy - i_xy + ri_xy + ri_xz.max(ri_yz) - hz,
        ),
    ];

    let independent = problem.input_is_product()?
        && problem.input_has_full_support()
        && normal_form(problem)?.is_identity();
    if independent {
        let h_xy_z = joint.entropy(&[x, y], &[z])?;
        let h_y_x = joint.entropy(&[y], &[x])?;
        let h_x_y = joint.entropy(&[x], &[y])?;
        rows12.push(row_constant(
            "independent-input: H(X,Y|Z) + RI(X;Z) + RI(Y;Z)",
            h_xy_z + ri_xz + ri_yz,
        ));
        rows23.push(row_constant("independent-input: H(Y|X) + RI(X;Z)", h_y_x + ri_xz));
        rows31.push(row_constant("independent-input: H(X|Y) + RI(Y;Z)", h_x_y + ri_yz));
        rows_rho.push(row_constant(
            "independent-input: H(X,Y|Z) + RI(X;Z) + RI(Y;Z)",
            h_xy_z + ri_xz + ri_yz,
        ));
    }

    let theorem = if independent {
        "asymptotic (dependent- and independent-input rows)".to_string()
    } else {
        "asymptotic (dependent-input rows)".to_string()
    };
    Ok(BoundReport {
        theorem,
        r12: link_from_rows(rows12),
        r23: link_from_rows(rows23),
        r31: link_from_rows(rows31),
        randomness: Some(link_from_rows(rows_rho)),
        conditions: None,
    })
}

/// Closed-form per-symbol rates of the named asymptotic scheme on `problem`,
/// after checking that the problem has the shape the scheme serves.
pub fn asymptotic_protocol_rates(
    scheme: AsymptoticScheme,
    problem: &Problem,
) -> Result<AsymptoticRateReport, BoundsError> {
    if !problem.channel().is_deterministic() {
        return Err(BoundsError::RandomizedChannel);
    }
    match scheme {
        AsymptoticScheme::KornerMarton => korner_marton_rates(problem),
        AsymptoticScheme::SlepianWolfErasure => erasure_rates(problem),
    }
}

fn korner_marton_rates(problem: &Problem) -> Result<AsymptoticRateReport, BoundsError> {
    let ch = problem.channel();
    let (nx, ny, nz) = (ch.x().alphabet.len(), ch.y().alphabet.len(), ch.z().alphabet.len());
    if nx != ny || ny != nz {
        return Err(BoundsError::ShapeMismatch(format!(
            "linear coding needs equal alphabet sizes, got |X|={nx}, |Y|={ny}, |Z|={nz}"
        )));
    }
    // Every row and every column of the output table must be a bijection
    // onto the output alphabet (a Latin square: group-like addition).
    for x in 0..nx as u32 {
        let mut seen = vec![false; nz];
        for y in 0..ny as u32 {
            let z = ch.output_of(x, y).expect("deterministic table") as usize;
            if seen[z] {
                return Err(BoundsError::ShapeMismatch(format!(
                    "row {x} of the output table is not a bijection"
                )));
            }
            seen[z] = true;
        }
    }
    for y in 0..ny as u32 {
        let mut seen = vec![false; nz];
        for x in 0..nx as u32 {
            let z = ch.output_of(x, y).expect("deterministic table") as usize;
            if seen[z] {
                return Err(BoundsError::ShapeMismatch(format!(
                    "column {y} of the output table is not a bijection"
                )));
            }
            seen[z] = true;
        }
    }
    let joint = problem.joint()?;
    let zn = problem.channel().z().name.clone();
    let hz = joint.entropy(&[zn.as_str()], &[])?;
    Ok(AsymptoticRateReport {
        scheme: "linear coding for group addition".into(),
        r12: hz,
        r23: hz,
        r31: hz,
        rho: hz,
        slack: "Each link and the randomness carry an extra eps per symbol that vanishes as the block length grows, with the error probability.".into(),
    })
}

fn erasure_rates(problem: &Problem) -> Result<AsymptoticRateReport, BoundsError> {
    let ch = problem.channel();
    let (nx, ny, nz) = (ch.x().alphabet.len(), ch.y().alphabet.len(), ch.z().alphabet.len());
    if nx != 2 || ny != 2 || nz != 3 {
        return Err(BoundsError::ShapeMismatch(format!(
            "erasure coding needs |X|=2, |Y|=2, |Z|=3, got |X|={nx}, |Y|={ny}, |Z|={nz}"
        )));
    }
    // One X symbol must erase (constant output), the other must reveal Y
    // (injective, avoiding the erasure symbol).
    let out = |x: u32, y: u32| ch.output_of(x, y).expect("deterministic table");
    let mut reveal_x = None;
    let mut erase_z = None;
    for x in 0..2u32 {
        if out(x, 0) == out(x, 1) {
            if erase_z.is_some() {
                return Err(BoundsError::ShapeMismatch("both X symbols erase".into()));
            }
            erase_z = Some(out(x, 0));
        } else {
            if reveal_x.is_some() {
                return Err(BoundsError::ShapeMismatch("no X symbol erases".into()));
            }
            reveal_x = Some(x);
        }
    }
    let (xr, ze) = match (reveal_x, erase_z) {
        (Some(xr), Some(ze)) => (xr, ze),
        _ => {
            return Err(BoundsError::ShapeMismatch(
                "need one erasing and one revealing X symbol".into(),
            ))
        }
    };
    if out(xr, 0) == ze || out(xr, 1) == ze {
        return Err(BoundsError::ShapeMismatch(
            "the revealing X symbol must avoid the erasure output".into(),
        ));
    }

    let input = problem.input();
    let xn = problem.channel().x().name.clone();
    let hx = input.entropy(&[xn.as_str()], &[])?;
    let p_reveal: f64 = (0..2u32)
        .map(|y| input.prob_of(&[xr, y]).to_f64().unwrap_or(0.0))
        .sum();
    let mut h_y_given_reveal = 0.0;
    if p_reveal > 0.0 {
        for y in 0..2u32 {
            let q = input.prob_of(&[xr, y]).to_f64().unwrap_or(0.0) / p_reveal;
            if q > 0.0 {
                h_y_given_reveal -= q * q.log2();
            }
        }
    }
    Ok(AsymptoticRateReport {
        scheme: "erasure-pattern coding with side information".into(),
        r12: 1.0,
        r23: p_reveal * h_y_given_reveal + (1.0 - p_reveal),
        r31: hx + p_reveal,
        rho: 1.0,
        slack: "The 3-1 link carries an extra 1/n from the prefix-free length header; the 2-3 rate is the side-information coding limit for large blocks.".into(),
    })
}
