//! Compact group notation: `SL10`, `SL9&O1`, `IL10&TL10`.
//!
//! Grammar: one or more terms joined by `&`; a term is a kind token
//! (`SL`, `TL`, `IL`, `O`, `R`) followed by a positive decimal count. Kinds
//! may not repeat.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::EpisodeConfig;
use crate::policy::{AgentSpec, Kind};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupNotation {
    terms: Vec<(Kind, usize)>,
}

fn parse_error(position: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        position,
        message: message.into(),
    }
}

impl GroupNotation {
    pub fn new(terms: Vec<(Kind, usize)>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::Config("group needs at least one term".into()));
        }
        for (i, &(kind, count)) in terms.iter().enumerate() {
            if count == 0 {
                return Err(Error::Config(format!("{kind} has zero count")));
            }
            if terms[..i].iter().any(|&(k, _)| k == kind) {
                return Err(Error::Config(format!("{kind} appears twice")));
            }
        }
        Ok(Self { terms })
    }

    pub fn parse(text: &str) -> Result<Self> {
        if text.is_empty() {
            return Err(parse_error(0, "empty group"));
        }
        let mut terms: Vec<(Kind, usize)> = Vec::new();
        let mut offset = 0;
        for part in text.split('&') {
            let token_len = part.bytes().take_while(u8::is_ascii_uppercase).count();
            let token = &part[..token_len];
            let kind = Kind::ALL
                .into_iter()
                .find(|k| k.token() == token)
                .ok_or_else(|| parse_error(offset, format!("unknown kind token {token:?}")))?;
            let digits = &part[token_len..];
            let digit_len = digits.bytes().take_while(u8::is_ascii_digit).count();
            if digit_len == 0 {
                return Err(parse_error(offset + token_len, format!("missing count after {token}")));
            }
            if digit_len < digits.len() {
                return Err(parse_error(
                    offset + token_len + digit_len,
                    "unexpected trailing characters",
                ));
            }
            let count: usize = digits
                .parse()
                .map_err(|_| parse_error(offset + token_len, "count out of range"))?;
            if count == 0 {
                return Err(parse_error(offset + token_len, format!("{token} has zero count")));
            }
            if terms.iter().any(|&(k, _)| k == kind) {
                return Err(parse_error(offset, format!("duplicate kind {token}")));
            }
            terms.push((kind, count));
            offset += part.len() + 1;
        }
        Ok(Self { terms })
    }

    pub fn terms(&self) -> &[(Kind, usize)] {
        &self.terms
    }

    pub fn total(&self) -> usize {
        self.terms.iter().map(|&(_, c)| c).sum()
    }

    pub fn is_homogeneous(&self) -> bool {
        self.terms.len() == 1
    }

    /// Agents with ids `0..n` in term order.
    pub fn roster(&self) -> Vec<AgentSpec> {
        EpisodeConfig::roster_from_counts(&self.terms)
    }

    /// Recovers the notation of a roster, with kinds in first-seen order.
    pub fn from_roster(roster: &[AgentSpec]) -> Result<Self> {
        let mut sorted = roster.to_vec();
        sorted.sort_by_key(|a| a.id);
        let mut terms: Vec<(Kind, usize)> = Vec::new();
        for a in sorted {
            match terms.iter_mut().find(|(k, _)| *k == a.kind) {
                Some((_, c)) => *c += 1,
                None => terms.push((a.kind, 1)),
            }
        }
        Self::new(terms)
    }
}

impl fmt::Display for GroupNotation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (kind, count)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str("&")?;
            }
            write!(f, "{kind}{count}")?;
        }
        Ok(())
    }
}

impl FromStr for GroupNotation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}
