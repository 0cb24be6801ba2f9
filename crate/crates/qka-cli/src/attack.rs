//! Compact attack-spec syntax for the command line:
//! `honest`, `flip:X|Z|Y`, `intercept:z|x|random`, `collude:A,B->C[:nobarrier]`.
//! Party names are letters (A = party 0) or 0-based indices.

use qka::adversary::{AttackModel, InterceptPolicy};
use qka::qcore::PauliOp;

#[derive(Clone, Debug, PartialEq)]
pub enum AttackSpec {
    Honest,
    Flip(PauliOp),
    Intercept(InterceptPolicy),
    Collude {
        colluders: (usize, usize),
        target: usize,
        nobarrier: bool,
    },
}

impl AttackSpec {
    pub fn parse(spec: &str) -> Result<Self, String> {
        let spec = spec.trim();
        if spec.eq_ignore_ascii_case("honest") {
            return Ok(AttackSpec::Honest);
        }
        if let Some(op) = spec.strip_prefix("flip:") {
            let op = match op.trim() {
                "X" | "x" => PauliOp::X,
                "Z" | "z" => PauliOp::Z,
                "Y" | "y" => PauliOp::Y,
                other => return Err(format!("unknown flip operation '{other}' (use X, Z, or Y)")),
            };
            return Ok(AttackSpec::Flip(op));
        }
        if let Some(policy) = spec.strip_prefix("intercept:") {
            let policy = match policy.trim().to_ascii_lowercase().as_str() {
                "z" => InterceptPolicy::AllZ,
                "x" => InterceptPolicy::AllX,
                "random" => InterceptPolicy::RandomZX,
                other => {
                    return Err(format!(
                        "unknown intercept basis policy '{other}' (use z, x, or random)"
                    ))
                }
            };
            return Ok(AttackSpec::Intercept(policy));
        }
        if let Some(rest) = spec.strip_prefix("collude:") {
            let (spec_part, nobarrier) = match rest.strip_suffix(":nobarrier") {
                Some(prefix) => (prefix, true),
                None => (rest, false),
            };
            let (colluder_part, target_part) = spec_part
                .split_once("->")
                .ok_or_else(|| "collusion spec needs 'A,B->C'".to_string())?;
            let mut colluders = colluder_part.split(',').map(parse_party);
            let a = colluders
                .next()
                .ok_or_else(|| "collusion spec needs two colluders".to_string())??;
            let b = colluders
                .next()
                .ok_or_else(|| "collusion spec needs two colluders".to_string())??;
            if colluders.next().is_some() {
                return Err("collusion spec supports exactly two colluders".to_string());
            }
            let target = parse_party(target_part)?;
            if a == b {
                return Err("colluders must be distinct".to_string());
            }
            if target == a || target == b {
                return Err("the target cannot collude".to_string());
            }
            return Ok(AttackSpec::Collude {
                colluders: (a, b),
                target,
                nobarrier,
            });
        }
        Err(format!(
            "unknown attack spec '{spec}' (use honest, flip:X|Z|Y, intercept:z|x|random, or collude:A,B->C[:nobarrier])"
        ))
    }

    /// The channel-level model this spec maps to (collusion is replayed at
    /// the run level, not on the channel).
    pub fn channel_model(&self) -> AttackModel {
        match self {
            AttackSpec::Honest | AttackSpec::Collude { .. } => AttackModel::Honest,
            AttackSpec::Flip(op) => AttackModel::Flip(*op),
            AttackSpec::Intercept(policy) => AttackModel::InterceptResend(*policy),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            AttackSpec::Honest => "honest".to_string(),
            AttackSpec::Flip(op) => format!("flip:{op}"),
            AttackSpec::Intercept(InterceptPolicy::AllZ) => "intercept:z".to_string(),
            AttackSpec::Intercept(InterceptPolicy::AllX) => "intercept:x".to_string(),
            AttackSpec::Intercept(InterceptPolicy::RandomZX) => "intercept:random".to_string(),
            AttackSpec::Collude {
                colluders,
                target,
                nobarrier,
            } => {
                let suffix = if *nobarrier { ":nobarrier" } else { "" };
                format!(
                    "collude:{},{}->{}{}",
                    party_name(colluders.0),
                    party_name(colluders.1),
                    party_name(*target),
                    suffix
                )
            }
        }
    }
}

fn parse_party(token: &str) -> Result<usize, String> {
    let token = token.trim();
    if token.is_empty() {
        return Err("empty party name".to_string());
    }
    if token.len() == 1 {
        let c = token.chars().next().expect("non-empty");
        if c.is_ascii_alphabetic() {
            return Ok((c.to_ascii_uppercase() as u8 - b'A') as usize);
        }
    }
    token
        .parse::<usize>()
        .map_err(|_| format!("invalid party '{token}' (use a letter like A or a 0-based index)"))
}

fn party_name(id: usize) -> String {
    if id < 26 {
        char::from(b'A' + id as u8).to_string()
    } else {
        id.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_the_documented_forms() {
        assert_eq!(AttackSpec::parse("honest").unwrap(), AttackSpec::Honest);
        assert_eq!(
            AttackSpec::parse("flip:X").unwrap(),
            AttackSpec::Flip(PauliOp::X)
        );
        assert_eq!(
            AttackSpec::parse("flip:z").unwrap(),
            AttackSpec::Flip(PauliOp::Z)
        );
        assert_eq!(
            AttackSpec::parse("intercept:random").unwrap(),
            AttackSpec::Intercept(InterceptPolicy::RandomZX)
        );
        assert_eq!(
            AttackSpec::parse("collude:A,B->C").unwrap(),
            AttackSpec::Collude {
                colluders: (0, 1),
                target: 2,
                nobarrier: false
            }
        );
        assert_eq!(
            AttackSpec::parse("collude:0,2->1:nobarrier").unwrap(),
            AttackSpec::Collude {
                colluders: (0, 2),
                target: 1,
                nobarrier: true
            }
        );
    }

    #[test]
    fn rejects_malformed_specs() {
        for bad in [
            "",
            "flip",
            "flip:I",
            "flip:W",
            "intercept:y",
            "collude:A->C",
            "collude:A,A->C",
            "collude:A,B->A",
            "collude:A,B,C->D",
            "teleport:X",
        ] {
            assert!(AttackSpec::parse(bad).is_err(), "accepted {bad:?}");
        }
    }

    #[test]
    fn describe_round_trips() {
        for spec in [
            "honest",
            "flip:X",
            "flip:Y",
            "intercept:z",
            "intercept:random",
            "collude:A,B->C",
            "collude:A,C->B:nobarrier",
        ] {
            let parsed = AttackSpec::parse(spec).unwrap();
            assert_eq!(AttackSpec::parse(&parsed.describe()).unwrap(), parsed);
        }
    }
}
