//! Experiment configuration: a TOML document whose fields can be overridden
//! from the command line.
//!
//! ```toml
//! d = 5
//! t = 2
//! h = 3
//! n = 4
//! m = 4
//! secret = "random"          # or an integer in 0..d
//! checks = "random:1"        # or a list of positions, e.g. [1, 3]
//! attack = "intercept:2"     # see AttackConfig
//! trials = 10000
//! seed = 7
//! localization_repeats = 1
//! ```

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use vqss_core::adversary::{AttackSpec, BasisGuess, CheaterInverse, FakeValue};
use vqss_core::protocol::{CheckSchedule, ProtocolConfig};
use vqss_core::vss::ThresholdParams;
use vqss_core::{Fe, Field};

use crate::error::{io_err, HarnessError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawSecret", into = "RawSecret")]
pub enum Secret {
    /// Drawn uniformly per trial.
    Random,
    Value(u64),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RawSecret {
    Value(u64),
    Text(String),
}

impl TryFrom<RawSecret> for Secret {
    type Error = String;

    fn try_from(raw: RawSecret) -> std::result::Result<Self, String> {
        match raw {
            RawSecret::Value(v) => Ok(Secret::Value(v)),
            RawSecret::Text(s) => s.parse(),
        }
    }
}

impl From<Secret> for RawSecret {
    fn from(s: Secret) -> Self {
        match s {
            Secret::Random => RawSecret::Text("random".into()),
            Secret::Value(v) => RawSecret::Value(v),
        }
    }
}

impl FromStr for Secret {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim() {
            "random" => Ok(Secret::Random),
            v => v.parse().map(Secret::Value).map_err(|_| format!("secret must be \"random\" or an integer, got {v:?}")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawChecks", into = "RawChecks")]
pub enum Checks {
    /// `k` positions drawn uniformly per trial.
    Random(usize),
    Fixed(Vec<usize>),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RawChecks {
    List(Vec<usize>),
    Text(String),
}

impl TryFrom<RawChecks> for Checks {
    type Error = String;

    fn try_from(raw: RawChecks) -> std::result::Result<Self, String> {
        match raw {
            RawChecks::List(v) => Ok(Checks::Fixed(v)),
            RawChecks::Text(s) => s.parse(),
        }
    }
}

impl From<Checks> for RawChecks {
    fn from(c: Checks) -> Self {
        match c {
            Checks::Random(k) => RawChecks::Text(format!("random:{k}")),
            Checks::Fixed(v) => RawChecks::List(v),
        }
    }
}

impl FromStr for Checks {
    type Err = String;

    /// `random:k`, `none`, or a comma-separated list of positions.
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim();
        if let Some(k) = s.strip_prefix("random:") {
            return k.parse().map(Checks::Random).map_err(|_| format!("bad check count in {s:?}"));
        }
        if s == "none" || s.is_empty() {
            return Ok(Checks::Fixed(Vec::new()));
        }
        s.split(',')
            .map(|p| p.trim().parse().map_err(|_| format!("bad check position {p:?}")))
            .collect::<std::result::Result<_, _>>()
            .map(Checks::Fixed)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fake {
    Offset(u64),
    Fixed(u64),
}

/// Attack description, written as a short string:
///
/// - `none`
/// - `intercept:GAP` or `intercept:GAP:basis=J` (Eve taps Bob_GAP -> Bob_GAP+1)
/// - `forge:PARTY:dp=A:dq=B[:inverse=undo|declared|refuse]`
/// - `wrong-broadcast:K=+OFFSET,K=VALUE,...`
/// - `conspiracy:K,K,...`
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum AttackConfig {
    #[default]
    None,
    Intercept { gap: usize, basis: Option<u64> },
    Forge { party: usize, dp: u64, dq: u64, inverse: CheaterInverse },
    WrongBroadcast(Vec<(usize, Fake)>),
    Conspiracy(Vec<usize>),
}

impl AttackConfig {
    /// The core attack over `field`.
    pub fn to_spec(&self, field: Field) -> Result<AttackSpec> {
        let elem = |v: u64| -> Result<Fe> {
            if v >= field.order() {
                return Err(HarnessError::Scenario(format!("attack value {v} is outside Z_{}", field.order())));
            }
            Ok(field.elem(v))
        };
        Ok(match self {
            AttackConfig::None => AttackSpec::None,
            AttackConfig::Intercept { gap, basis } => {
                let guess = match basis {
                    Some(j) => BasisGuess::Fixed(elem(*j)?),
                    None => BasisGuess::Uniform,
                };
                AttackSpec::intercept_resend(*gap, guess)
            }
            AttackConfig::Forge { party, dp, dq, inverse } => {
                AttackSpec::forged_unitary(*party, elem(*dp)?, elem(*dq)?, *inverse)?
            }
            AttackConfig::WrongBroadcast(fakes) => {
                let fakes = fakes
                    .iter()
                    .map(|&(k, f)| {
                        Ok((k, match f {
                            Fake::Offset(o) => FakeValue::Offset(elem(o)?),
                            Fake::Fixed(v) => FakeValue::Fixed(elem(v)?),
                        }))
                    })
                    .collect::<Result<Vec<_>>>()?;
                AttackSpec::wrong_broadcast(fakes)?
            }
            AttackConfig::Conspiracy(members) => AttackSpec::conspiracy(members.clone()),
        })
    }
}

impl fmt::Display for AttackConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: Vec<String>| v.join(",");
        match self {
            AttackConfig::None => write!(f, "none"),
            AttackConfig::Intercept { gap, basis: None } => write!(f, "intercept:{gap}"),
            AttackConfig::Intercept { gap, basis: Some(j) } => write!(f, "intercept:{gap}:basis={j}"),
            AttackConfig::Forge { party, dp, dq, inverse } => {
                let inv = match inverse {
                    CheaterInverse::UndoApplied => "undo",
                    CheaterInverse::InvertDeclared => "declared",
                    CheaterInverse::Refuse => "refuse",
                };
                write!(f, "forge:{party}:dp={dp}:dq={dq}:inverse={inv}")
            }
            AttackConfig::WrongBroadcast(fakes) => {
                let items = fakes
                    .iter()
                    .map(|(k, fake)| match fake {
                        Fake::Offset(o) => format!("{k}=+{o}"),
                        Fake::Fixed(v) => format!("{k}={v}"),
                    })
                    .collect();
                write!(f, "wrong-broadcast:{}", join(items))
            }
            AttackConfig::Conspiracy(members) => {
                write!(f, "conspiracy:{}", join(members.iter().map(ToString::to_string).collect()))
            }
        }
    }
}

impl FromStr for AttackConfig {
    type Err = HarnessError;

    fn from_str(input: &str) -> Result<Self> {
        let fail = |reason: &str| HarnessError::Attack { input: input.to_string(), reason: reason.to_string() };
        let int = |s: &str| s.trim().parse::<u64>().map_err(|_| fail(&format!("expected an integer, got {s:?}")));
        let pos = |s: &str| int(s).map(|v| v as usize);
        let mut parts = input.trim().split(':');
        let kind = parts.next().unwrap_or_default();
        let rest: Vec<&str> = parts.collect();
        match kind {
            "none" if rest.is_empty() => Ok(AttackConfig::None),
            "intercept" => {
                let gap = pos(rest.first().ok_or_else(|| fail("missing gap"))?)?;
                let basis = match rest.get(1) {
                    None => None,
                    Some(opt) => Some(int(opt.strip_prefix("basis=").ok_or_else(|| fail("expected basis=J"))?)?),
                };
                if rest.len() > 2 {
                    return Err(fail("too many fields"));
                }
                Ok(AttackConfig::Intercept { gap, basis })
            }
            "forge" => {
                let party = pos(rest.first().ok_or_else(|| fail("missing party"))?)?;
                let (mut dp, mut dq, mut inverse) = (0, 0, CheaterInverse::UndoApplied);
                for opt in &rest[1..] {
                    let (key, value) = opt.split_once('=').ok_or_else(|| fail("expected key=value"))?;
                    match key {
                        "dp" => dp = int(value)?,
                        "dq" => dq = int(value)?,
                        "inverse" => {
                            inverse = match value {
                                "undo" => CheaterInverse::UndoApplied,
                                "declared" => CheaterInverse::InvertDeclared,
                                "refuse" => CheaterInverse::Refuse,
                                _ => return Err(fail("inverse must be undo, declared or refuse")),
                            }
                        }
                        _ => return Err(fail(&format!("unknown option {key:?}"))),
                    }
                }
                Ok(AttackConfig::Forge { party, dp, dq, inverse })
            }
            "wrong-broadcast" if rest.len() == 1 => {
                let fakes = rest[0]
                    .split(',')
                    .map(|item| {
                        let (k, v) = item.split_once('=').ok_or_else(|| fail("expected K=+OFFSET or K=VALUE"))?;
                        let fake = match v.strip_prefix('+') {
                            Some(o) => Fake::Offset(int(o)?),
                            None => Fake::Fixed(int(v)?),
                        };
                        Ok((pos(k)?, fake))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(AttackConfig::WrongBroadcast(fakes))
            }
            "conspiracy" if rest.len() == 1 => {
                let members = rest[0].split(',').map(pos).collect::<Result<Vec<_>>>()?;
                Ok(AttackConfig::Conspiracy(members))
            }
            _ => Err(fail("unknown attack kind or wrong number of fields")),
        }
    }
}

impl TryFrom<String> for AttackConfig {
    type Error = HarnessError;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<AttackConfig> for String {
    fn from(a: AttackConfig) -> String {
        a.to_string()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub d: u64,
    pub t: usize,
    pub h: usize,
    pub n: usize,
    pub m: usize,
    pub secret: Secret,
    pub checks: Checks,
    pub attack: AttackConfig,
    pub trials: u64,
    pub seed: u64,
    pub localization_repeats: u32,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            d: 5,
            t: 2,
            h: 3,
            n: 4,
            m: 4,
            secret: Secret::Random,
            checks: Checks::Random(1),
            attack: AttackConfig::None,
            trials: 100,
            seed: 0,
            localization_repeats: 1,
        }
    }
}

impl Scenario {
    pub fn from_toml(text: &str) -> std::result::Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        Self::from_toml(&text).map_err(|reason| HarnessError::Parse { path: path.into(), reason })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    /// Rejects every constraint violation with a message naming it.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(HarnessError::Scenario(msg));
        let field = match Field::new(self.d) {
            Ok(f) => f,
            Err(_) => return bad(format!("d must be an odd prime below 2^32, got {}", self.d)),
        };
        if self.t == 0 || self.h == 0 {
            return bad(format!("t and h must be at least 1, got t = {}, h = {}", self.t, self.h));
        }
        if ThresholdParams::new(self.t, self.h).is_err() {
            return bad(format!(
                "threshold condition h > t(t-1) fails: h = {}, t(t-1) = {}",
                self.h,
                self.t * (self.t - 1)
            ));
        }
        if self.n == 0 || self.n as u64 > self.d - 1 {
            return bad(format!(
                "n must be between 1 and d-1 = {} (ids are distinct nonzero elements of Z_d), got {}",
                self.d - 1,
                self.n
            ));
        }
        if self.m == 0 || self.m > self.n {
            return bad(format!("m must be between 1 and n = {}, got {}", self.n, self.m));
        }
        if let Secret::Value(s) = self.secret {
            if s >= self.d {
                return bad(format!("secret must be in 0..{}, got {s}", self.d));
            }
        }
        if let Checks::Fixed(positions) = &self.checks {
            if let Some(u) = positions.iter().find(|&&u| u == 0 || u > self.m) {
                return bad(format!("check positions must be in 1..={}, got {u}", self.m));
            }
        }
        if self.localization_repeats == 0 {
            return bad("localization_repeats must be at least 1".into());
        }
        let attack = |e: HarnessError| HarnessError::Scenario(format!("attack {}: {e}", self.attack));
        let spec = self.attack.to_spec(field).map_err(attack)?;
        spec.validate(self.m).map_err(|e| attack(e.into()))?;
        Ok(())
    }

    pub fn field(&self) -> Result<Field> {
        Ok(Field::new(self.d)?)
    }

    pub fn params(&self) -> Result<ThresholdParams> {
        Ok(ThresholdParams::new(self.t, self.h)?)
    }

    pub fn protocol_config(&self) -> ProtocolConfig {
        let checks = match &self.checks {
            Checks::Random(k) => CheckSchedule::Random(*k),
            Checks::Fixed(v) => CheckSchedule::Fixed(v.clone()),
        };
        ProtocolConfig { checks, localization_repeats: self.localization_repeats }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn attack_strings_round_trip() {
        for s in [
            "none",
            "intercept:2",
            "intercept:1:basis=3",
            "forge:2:dp=1:dq=0:inverse=undo",
            "forge:4:dp=0:dq=2:inverse=refuse",
            "wrong-broadcast:1=+2,3=4",
            "conspiracy:1,2,3",
        ] {
            let a: AttackConfig = s.parse().unwrap();
            assert_eq!(a.to_string(), s);
        }
        let short: AttackConfig = "forge:2:dp=1".parse().unwrap();
        assert_eq!(short.to_string(), "forge:2:dp=1:dq=0:inverse=undo");
        for bad in ["", "intercept", "intercept:x", "forge:1:zz=1", "wrong-broadcast:1", "teleport:1", "none:1"] {
            assert!(bad.parse::<AttackConfig>().is_err(), "{bad}");
        }
    }

    #[test]
    fn toml_round_trip() {
        let s = Scenario {
            secret: Secret::Value(3),
            checks: Checks::Fixed(vec![1, 3]),
            attack: "intercept:2".parse().unwrap(),
            ..Scenario::default()
        };
        assert_eq!(Scenario::from_toml(&s.to_toml()).unwrap(), s);
        let parsed = Scenario::from_toml("d = 7\nchecks = \"random:2\"\nsecret = \"random\"\n").unwrap();
        assert_eq!(parsed.d, 7);
        assert_eq!(parsed.checks, Checks::Random(2));
        assert!(Scenario::from_toml("bogus = 1").is_err());
        assert!(Scenario::from_toml("attack = \"teleport\"").is_err());
    }
}
