//! Version identifiers and upgrade levels.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Components with at least this many digits are taken to be dates
/// (`20110712`).
pub const DATE_LIKE_DIGITS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Compliant,
    /// Carries a suffix such as `-b02`, `-RC1` or `.Final`.
    Qualified,
    DateLike,
    /// A single numeric component.
    TooFew,
    /// More than three numeric components.
    TooMany,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Version {
    pub major: u64,
    pub minor: u64,
    pub patch: Option<u64>,
    /// Numeric components beyond the third, if any.
    pub extra: Vec<u64>,
    pub qualifier: Option<String>,
    pub raw: String,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SemverError {
    #[error("unparseable version `{0}`")]
    Unparseable(String),
    #[error("version `{0}` is not of the form X.Y[.Z]")]
    NotCompliant(String),
    #[error("`{to}` is not an upgrade of `{from}`")]
    NotAnUpgrade { from: String, to: String },
}

impl Version {
    pub fn is_compliant(&self) -> bool {
        self.verdict == Verdict::Compliant
    }

    pub fn is_date_like(&self) -> bool {
        self.verdict == Verdict::DateLike
    }

    /// Numeric ordering with a missing patch read as 0. Qualifiers are ignored.
    pub fn numeric_cmp(&self, other: &Version) -> Ordering {
        (self.major, self.minor, self.patch.unwrap_or(0), &self.extra).cmp(&(
            other.major,
            other.minor,
            other.patch.unwrap_or(0),
            &other.extra,
        ))
    }
}

impl fmt::Display for Version {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.raw)
    }
}

impl FromStr for Version {
    type Err = SemverError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_version(s)
    }
}

pub fn parse_version(s: &str) -> Result<Version, SemverError> {
    let raw = s.trim();
    let (numeric, mut qualifier) = match raw.split_once('-') {
        Some((n, q)) => (n, Some(q.to_string())),
        None => (raw, None),
    };
    let mut digits: Vec<&str> = Vec::new();
    let mut parts = numeric.split('.');
    for part in parts.by_ref() {
        if !part.is_empty() && part.bytes().all(|b| b.is_ascii_digit()) {
            digits.push(part);
            continue;
        }
        // `1.0.Final`, `2.3RC1`: the rest of the string is a qualifier
        let rest: Vec<&str> = std::iter::once(part).chain(parts.by_ref()).collect();
        let lead = part.bytes().take_while(u8::is_ascii_digit).count();
        if lead > 0 {
            digits.push(&part[..lead]);
        }
        let mut q = rest.join(".");
        q.drain(..lead);
        if let Some(existing) = qualifier.take() {
            q = format!("{q}-{existing}");
        }
        qualifier = Some(q);
        break;
    }
    if digits.is_empty() {
        return Err(SemverError::Unparseable(s.to_string()));
    }
    let values: Vec<u64> = digits.iter().map(|d| d.parse().unwrap_or(u64::MAX)).collect();
    let verdict = if digits.iter().any(|d| d.len() >= DATE_LIKE_DIGITS) {
        Verdict::DateLike
    } else if qualifier.is_some() {
        Verdict::Qualified
    } else if values.len() < 2 {
        Verdict::TooFew
    } else if values.len() > 3 {
        Verdict::TooMany
    } else {
        Verdict::Compliant
    };
    Ok(Version {
        major: values[0],
        minor: values.get(1).copied().unwrap_or(0),
        patch: values.get(2).copied(),
        extra: values.get(3..).map(<[u64]>::to_vec).unwrap_or_default(),
        qualifier,
        raw: raw.to_string(),
        verdict,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SemverLevel {
    Major,
    Minor,
    Patch,
    Dev,
}

impl SemverLevel {
    pub const ALL: [SemverLevel; 4] = [SemverLevel::Major, SemverLevel::Minor, SemverLevel::Patch, SemverLevel::Dev];

    pub fn as_str(self) -> &'static str {
        match self {
            SemverLevel::Major => "major",
            SemverLevel::Minor => "minor",
            SemverLevel::Patch => "patch",
            SemverLevel::Dev => "dev",
        }
    }
}

impl fmt::Display for SemverLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SemverLevel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SemverLevel::ALL
            .into_iter()
            .find(|l| l.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown semver level `{s}`"))
    }
}

pub fn classify_upgrade(v1: &Version, v2: &Version) -> Result<SemverLevel, SemverError> {
    for v in [v1, v2] {
        if !v.is_compliant() {
            return Err(SemverError::NotCompliant(v.raw.clone()));
        }
    }
    if v2.numeric_cmp(v1) != Ordering::Greater {
        return Err(SemverError::NotAnUpgrade { from: v1.raw.clone(), to: v2.raw.clone() });
    }
    Ok(if v1.major == 0 {
        SemverLevel::Dev
    } else if v1.major != v2.major {
        SemverLevel::Major
    } else if v1.minor != v2.minor {
        SemverLevel::Minor
    } else {
        SemverLevel::Patch
    })
}

/// Majors and initial-development releases may break; minors and patches
/// may not.
pub fn complies_with_semver(level: SemverLevel, breaking: bool) -> bool {
    match level {
        SemverLevel::Major | SemverLevel::Dev => true,
        SemverLevel::Minor | SemverLevel::Patch => !breaking,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(s: &str) -> Version {
        parse_version(s).unwrap()
    }

    #[test]
    fn parsing() {
        let x = v("3.0.1");
        assert_eq!((x.major, x.minor, x.patch), (3, 0, Some(1)));
        assert!(x.is_compliant());
        let q = v("4.0.0-b02");
        assert_eq!(q.qualifier.as_deref(), Some("b02"));
        assert_eq!(q.verdict, Verdict::Qualified);
        assert_eq!(v("2.5.20110712").verdict, Verdict::DateLike);
        assert_eq!(v("1.2").patch, None);
        assert!(v("1.2").is_compliant());
        assert_eq!(v("7").verdict, Verdict::TooFew);
        assert_eq!(v("1.2.3.4").verdict, Verdict::TooMany);
        assert_eq!(v("1.0.Final").qualifier.as_deref(), Some("Final"));
        assert_eq!(v("2.3RC1").qualifier.as_deref(), Some("RC1"));
        assert_eq!(v("20.0-jre").verdict, Verdict::Qualified);
        assert!(matches!(parse_version("abc"), Err(SemverError::Unparseable(_))));
        assert!(matches!(parse_version(""), Err(SemverError::Unparseable(_))));
    }

    #[test]
    fn levels() {
        assert_eq!(classify_upgrade(&v("3.1.0"), &v("4.0.0")), Ok(SemverLevel::Major));
        assert_eq!(classify_upgrade(&v("3.0.1"), &v("3.1.0")), Ok(SemverLevel::Minor));
        assert_eq!(classify_upgrade(&v("4.0.0"), &v("4.0.1")), Ok(SemverLevel::Patch));
        assert_eq!(classify_upgrade(&v("0.9.0"), &v("0.9.1")), Ok(SemverLevel::Dev));
        assert_eq!(classify_upgrade(&v("1.2"), &v("1.2.1")), Ok(SemverLevel::Patch));
        assert!(matches!(classify_upgrade(&v("1.0.0"), &v("1.0.0")), Err(SemverError::NotAnUpgrade { .. })));
        assert!(matches!(classify_upgrade(&v("1.0"), &v("1.0.0")), Err(SemverError::NotAnUpgrade { .. })));
        assert!(matches!(classify_upgrade(&v("1.0.0"), &v("2.0.0-rc1")), Err(SemverError::NotCompliant(_))));
    }

    #[test]
    fn compliance() {
        assert!(complies_with_semver(SemverLevel::Major, true));
        assert!(!complies_with_semver(SemverLevel::Patch, true));
        assert!(complies_with_semver(SemverLevel::Minor, false));
        assert!(complies_with_semver(SemverLevel::Dev, true));
    }

    fn severity(l: SemverLevel) -> u8 {
        match l {
            SemverLevel::Patch => 0,
            SemverLevel::Minor => 1,
            SemverLevel::Major => 2,
            SemverLevel::Dev => 3,
        }
    }

    proptest! {
        #[test]
        fn print_parse_identity(a in 0u64..1000, b in 0u64..1000, c in proptest::option::of(0u64..1000)) {
            let s = match c { Some(c) => format!("{a}.{b}.{c}"), None => format!("{a}.{b}") };
            let parsed = v(&s);
            prop_assert!(parsed.is_compliant());
            prop_assert_eq!(parsed.to_string(), s.clone());
            prop_assert_eq!(v(&parsed.to_string()), parsed);
        }

        #[test]
        fn transitive_severity(mut xs in proptest::collection::vec((1u64..4, 0u64..4, 0u64..4), 3)) {
            xs.sort();
            xs.dedup();
            prop_assume!(xs.len() == 3);
            let vs: Vec<Version> = xs.iter().map(|(a, b, c)| v(&format!("{a}.{b}.{c}"))).collect();
            let l12 = classify_upgrade(&vs[0], &vs[1]).unwrap();
            let l23 = classify_upgrade(&vs[1], &vs[2]).unwrap();
            let l13 = classify_upgrade(&vs[0], &vs[2]).unwrap();
            prop_assert!(severity(l13) >= severity(l12).max(severity(l23)));
        }

        #[test]
        fn dev_dominates(b1 in 0u64..50, c1 in 0u64..50, b2 in 0u64..50, c2 in 0u64..50, major2 in 0u64..3) {
            let v1 = v(&format!("0.{b1}.{c1}"));
            let v2 = v(&format!("{major2}.{b2}.{c2}"));
            if let Ok(level) = classify_upgrade(&v1, &v2) {
                prop_assert_eq!(level, SemverLevel::Dev);
            }
        }
    }
}
