//! Table rules and the shipped presets.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A payout ratio such as 3:2, kept exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Payout {
    pub num: u32,
    pub den: u32,
}

impl Payout {
    pub const THREE_TO_TWO: Payout = Payout { num: 3, den: 2 };

    pub fn as_f64(self) -> f64 {
        f64::from(self.num) / f64::from(self.den)
    }
}

impl fmt::Display for Payout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.num, self.den)
    }
}

impl FromStr for Payout {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (n, d) = s
            .split_once(':')
            .ok_or_else(|| Error::Config(format!("payout {s:?} is not of the form N:D")))?;
        let parse = |t: &str| {
            t.trim()
                .parse::<u32>()
                .map_err(|e| Error::Config(format!("payout {s:?}: {e}")))
        };
        let p = Payout { num: parse(n)?, den: parse(d)? };
        if p.num == 0 || p.den == 0 {
            return Err(Error::Config(format!("payout {s:?} must be positive")));
        }
        Ok(p)
    }
}

impl Serialize for Payout {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Payout {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rules {
    pub dealer_stands_soft_17: bool,
    pub blackjack_payout: Payout,
    pub dealer_peek: bool,
    pub double_any_two: bool,
    pub double_after_split: bool,
    /// Maximum number of hands a round may grow to by splitting.
    pub resplit_limit: u8,
    pub split_aces_one_card: bool,
    pub surrender_allowed: bool,
}

impl Rules {
    /// S17, 3:2, peek, double any two, DAS, resplit to four hands, split aces
    /// receive one card, no surrender.
    pub const fn benchmark() -> Rules {
        Rules {
            dealer_stands_soft_17: true,
            blackjack_payout: Payout::THREE_TO_TWO,
            dealer_peek: true,
            double_any_two: true,
            double_after_split: true,
            resplit_limit: 4,
            split_aces_one_card: true,
            surrender_allowed: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.resplit_limit < 1 {
            return Err(Error::Config("resplit_limit must be at least 1".into()));
        }
        if self.resplit_limit > 4 {
            return Err(Error::Config(format!(
                "resplit_limit {} exceeds the supported maximum of 4 hands",
                self.resplit_limit
            )));
        }
        if self.blackjack_payout.num == 0 || self.blackjack_payout.den == 0 {
            return Err(Error::Config("blackjack_payout must be positive".into()));
        }
        Ok(())
    }

    /// Largest split depth a hand can reach.
    pub fn max_depth(&self) -> u8 {
        self.resplit_limit - 1
    }

    pub fn from_toml_str(src: &str) -> Result<Rules> {
        let rules: Rules = toml::from_str(src).map_err(|e| Error::Config(e.to_string()))?;
        rules.validate()?;
        Ok(rules)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("rules serialize to toml")
    }
}

impl Default for Rules {
    fn default() -> Self {
        Rules::benchmark()
    }
}

/// The benchmark ruleset and its three sensitivity variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    Benchmark,
    H17,
    Surrender,
    NoDas,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::Benchmark, Variant::H17, Variant::Surrender, Variant::NoDas];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Benchmark => "benchmark",
            Variant::H17 => "h17",
            Variant::Surrender => "surrender",
            Variant::NoDas => "nodas",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Variant::Benchmark => "S17 (benchmark)",
            Variant::H17 => "H17",
            Variant::Surrender => "S17 + Surrender",
            Variant::NoDas => "S17, no DAS",
        }
    }

    pub fn rules(self) -> Rules {
        let base = Rules::benchmark();
        match self {
            Variant::Benchmark => base,
            Variant::H17 => Rules { dealer_stands_soft_17: false, ..base },
            Variant::Surrender => Rules { surrender_allowed: true, ..base },
            Variant::NoDas => Rules { double_after_split: false, ..base },
        }
    }

    /// Shipped preset file contents.
    pub fn preset_toml(self) -> &'static str {
        match self {
            Variant::Benchmark => include_str!("../../../presets/benchmark.toml"),
            Variant::H17 => include_str!("../../../presets/h17.toml"),
            Variant::Surrender => include_str!("../../../presets/surrender.toml"),
            Variant::NoDas => include_str!("../../../presets/nodas.toml"),
        }
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.to_ascii_lowercase().replace(['_', ' '], "-");
        match key.as_str() {
            "benchmark" | "s17" | "s17-benchmark" => Ok(Variant::Benchmark),
            "h17" => Ok(Variant::H17),
            "surrender" | "s17-surrender" | "s17+surrender" => Ok(Variant::Surrender),
            "nodas" | "no-das" | "s17-nodas" => Ok(Variant::NoDas),
            _ => Err(Error::InvalidArgument(format!(
                "unknown ruleset preset {s:?}; valid presets: {}",
                Variant::ALL.map(Variant::name).join(", ")
            ))),
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_parse_to_their_rules() {
        for v in Variant::ALL {
            let parsed = Rules::from_toml_str(v.preset_toml()).unwrap();
            assert_eq!(parsed, v.rules(), "{v}");
        }
    }

    #[test]
    fn benchmark_matches_table() {
        let r = Rules::benchmark();
        assert!(r.dealer_stands_soft_17 && r.dealer_peek && r.double_any_two && r.double_after_split);
        assert_eq!(r.blackjack_payout, Payout { num: 3, den: 2 });
        assert_eq!(r.resplit_limit, 4);
        assert!(r.split_aces_one_card);
        assert!(!r.surrender_allowed);
    }

    #[test]
    fn bad_toml_reports_location() {
        let err = Rules::from_toml_str("dealer_stands_soft_17 = yes\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 1"), "{msg}");
    }

    #[test]
    fn zero_resplit_limit_rejected() {
        let src = Rules { resplit_limit: 0, ..Rules::benchmark() }.to_toml_string();
        assert!(Rules::from_toml_str(&src).is_err());
    }

    #[test]
    fn unknown_variant_lists_presets() {
        let msg = "vegas".parse::<Variant>().unwrap_err().to_string();
        assert!(msg.contains("benchmark") && msg.contains("nodas"));
    }
}
