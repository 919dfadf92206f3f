use std::sync::OnceLock;

use regex::Regex;

pub const NUM_TOKEN: &str = "<num>";
pub const MONEY_TOKEN: &str = "<money>";
pub const PROPER_TOKEN: &str = "<proper>";
pub const BOS: &str = "<s>";
pub const EOS: &str = "</s>";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TokenClass {
    Number,
    Money,
    Proper,
    Regular,
}

const NUMBER: &str = r"[+-]?(?:\d{1,3}(?:,\d{3})+|\d+)(?:\.\d+)?|[+-]?\.\d+";
const CURRENCY: &str = r"[$€£¥]";

fn number_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(&format!("^(?:{NUMBER})$")).unwrap())
}

fn money_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(&format!(
            r"^(?:[+-]?{CURRENCY}(?:{NUMBER})|(?:{NUMBER}){CURRENCY})$"
        ))
        .unwrap()
    })
}

/// Token class. `sentence_initial` suppresses capitalization as evidence of
/// a proper name; internal capitals count anywhere. Class tokens map to
/// their own class. Returns `None` for the empty token.
pub fn classify(token: &str, sentence_initial: bool) -> Option<TokenClass> {
    if token.is_empty() {
        return None;
    }
    Some(match token {
        NUM_TOKEN => TokenClass::Number,
        MONEY_TOKEN => TokenClass::Money,
        PROPER_TOKEN => TokenClass::Proper,
        _ if number_re().is_match(token) => TokenClass::Number,
        _ if money_re().is_match(token) => TokenClass::Money,
        _ => {
            let mut chars = token.chars();
            let first = chars.next().unwrap();
            let internal = chars.any(char::is_uppercase);
            if internal || (first.is_uppercase() && !sentence_initial) {
                TokenClass::Proper
            } else {
                TokenClass::Regular
            }
        }
    })
}

/// The vocabulary item a surface token is counted and scored as.
pub fn map_token(token: &str, sentence_initial: bool) -> String {
    match classify(token, sentence_initial) {
        Some(TokenClass::Number) => NUM_TOKEN.to_string(),
        Some(TokenClass::Money) => MONEY_TOKEN.to_string(),
        Some(TokenClass::Proper) => PROPER_TOKEN.to_string(),
        Some(TokenClass::Regular) | None => token.to_lowercase(),
    }
}
