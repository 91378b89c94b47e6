//! Tokenizer and parser for the controlled motion-sentence fragment:
//!
//! ```text
//! S   -> NP V PP?
//! NP  -> Det N
//! PP  -> P NP
//! Det -> the | a
//! P   -> to | from | towards | at
//! V, N from the lexicon
//! ```

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lexicon::{Lexicon, LexiconError, Prep};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("IllegalCharacterError: {ch:?} at byte {offset}")]
    IllegalCharacter { ch: char, offset: usize },
    #[error("UnknownWordError: `{0}`")]
    UnknownWord(String),
    #[error("GrammarError: {message} at token {position}")]
    Grammar { position: usize, message: String },
    #[error("PrepositionMismatchError: `{verb}` does not take `{prep}`")]
    PrepositionMismatch { verb: String, prep: Prep },
}

const DETERMINERS: [&str; 2] = ["the", "a"];

/// Splits on ASCII whitespace into case-folded alphabetic tokens. A single
/// trailing period is dropped; anything else non-alphabetic is rejected.
pub fn tokenize(input: &str) -> Result<Vec<String>, ParseError> {
    let trimmed = input.trim_end();
    let body = trimmed.strip_suffix('.').unwrap_or(trimmed);
    let mut tokens = Vec::new();
    let mut current = String::new();
    for (offset, ch) in body.char_indices() {
        if ch.is_ascii_alphabetic() {
            current.push(ch.to_ascii_lowercase());
        } else if ch.is_ascii_whitespace() {
            if !current.is_empty() {
                tokens.push(std::mem::take(&mut current));
            }
        } else {
            return Err(ParseError::IllegalCharacter { ch, offset });
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    Ok(tokens)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathPhrase {
    pub prep: Prep,
    pub ground: String,
}

/// A parsed motion event: which verb, what moves, and relative to what.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventFrame {
    pub verb: String,
    pub theme: String,
    pub path: Option<PathPhrase>,
}

impl EventFrame {
    pub fn new(verb: &str, theme: &str, path: Option<(Prep, &str)>) -> Self {
        Self {
            verb: verb.into(),
            theme: theme.into(),
            path: path.map(|(prep, ground)| PathPhrase {
                prep,
                ground: ground.into(),
            }),
        }
    }

    pub fn ground(&self) -> Option<&str> {
        self.path.as_ref().map(|p| p.ground.as_str())
    }

    pub fn prep(&self) -> Option<Prep> {
        self.path.as_ref().map(|p| p.prep)
    }

    /// Checks the frame against `lex`: every word resolves and the
    /// preposition is one the verb accepts.
    pub fn validate(&self, lex: &Lexicon) -> Result<(), ParseError> {
        let verb = lex.lookup_verb(&self.verb).map_err(word_error)?;
        lex.lookup_noun(&self.theme).map_err(word_error)?;
        if let Some(path) = &self.path {
            if !verb.allows(path.prep) {
                return Err(ParseError::PrepositionMismatch {
                    verb: verb.lemma.clone(),
                    prep: path.prep,
                });
            }
            lex.lookup_noun(&path.ground).map_err(word_error)?;
        }
        Ok(())
    }
}

fn word_error(e: LexiconError) -> ParseError {
    match e {
        LexiconError::UnknownWord(w) => ParseError::UnknownWord(w),
        other => ParseError::UnknownWord(other.to_string()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Category {
    Det,
    Noun,
    Verb,
    Prep,
}

impl Category {
    fn name(self) -> &'static str {
        match self {
            Category::Det => "determiner",
            Category::Noun => "noun",
            Category::Verb => "verb",
            Category::Prep => "preposition",
        }
    }
}

fn category(tok: &str, lex: &Lexicon) -> Option<Category> {
    if DETERMINERS.contains(&tok) {
        Some(Category::Det)
    } else if Prep::from_token(tok).is_some() {
        Some(Category::Prep)
    } else if lex.has_noun(tok) {
        Some(Category::Noun)
    } else if lex.has_verb_form(tok) {
        Some(Category::Verb)
    } else {
        None
    }
}

struct Cursor<'a> {
    tokens: &'a [String],
    pos: usize,
    lex: &'a Lexicon,
}

impl<'a> Cursor<'a> {
    /// Consumes a token of category `want`, distinguishing words the
    /// lexicon does not know from known words in the wrong slot.
    fn expect(&mut self, want: Category) -> Result<&'a str, ParseError> {
        let Some(tok) = self.tokens.get(self.pos) else {
            return Err(ParseError::Grammar {
                position: self.pos,
                message: format!("expected {} but the sentence ended", want.name()),
            });
        };
        match category(tok, self.lex) {
            Some(c) if c == want => {
                self.pos += 1;
                Ok(tok)
            }
            Some(c) => Err(ParseError::Grammar {
                position: self.pos,
                message: format!("expected {} but found {} `{tok}`", want.name(), c.name()),
            }),
            None => Err(ParseError::UnknownWord(tok.clone())),
        }
    }

    fn at_end(&self) -> bool {
        self.pos == self.tokens.len()
    }
}

/// Parses `Det N V (P Det N)?` into a frame satisfying [`EventFrame::validate`].
pub fn parse_sentence(tokens: &[String], lex: &Lexicon) -> Result<EventFrame, ParseError> {
    let mut cur = Cursor {
        tokens,
        pos: 0,
        lex,
    };
    cur.expect(Category::Det)?;
    let theme = cur.expect(Category::Noun)?;
    let verb_form = cur.expect(Category::Verb)?;
    let verb = lex.lookup_verb_by_form(verb_form).map_err(word_error)?;

    let path = if cur.at_end() {
        None
    } else {
        let prep_tok = cur.expect(Category::Prep)?;
        cur.expect(Category::Det)?;
        let ground = cur.expect(Category::Noun)?;
        if !cur.at_end() {
            return Err(ParseError::Grammar {
                position: cur.pos,
                message: format!("unexpected trailing `{}`", tokens[cur.pos]),
            });
        }
        let prep = Prep::from_token(prep_tok).expect("categorized as preposition");
        if !verb.allows(prep) {
            return Err(ParseError::PrepositionMismatch {
                verb: verb.lemma.clone(),
                prep,
            });
        }
        Some(PathPhrase {
            prep,
            ground: ground.to_string(),
        })
    };

    Ok(EventFrame {
        verb: verb.lemma.clone(),
        theme: theme.to_string(),
        path,
    })
}

/// Tokenizes and parses in one step.
pub fn parse_text(input: &str, lex: &Lexicon) -> Result<EventFrame, ParseError> {
    parse_sentence(&tokenize(input)?, lex)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexicon::builtin_lexicon;
    use proptest::prelude::*;

    fn toks(words: &[&str]) -> Vec<String> {
        words.iter().map(|w| w.to_string()).collect()
    }

    #[test]
    fn tokenize_running_example() {
        assert_eq!(
            tokenize("The ball rolled to the wall.").unwrap(),
            toks(&["the", "ball", "rolled", "to", "the", "wall"])
        );
    }

    #[test]
    fn tokenize_empty() {
        assert!(tokenize("").unwrap().is_empty());
    }

    #[test]
    fn tokenize_rejects_comma() {
        assert_eq!(
            tokenize("ball, rolled"),
            Err(ParseError::IllegalCharacter { ch: ',', offset: 4 })
        );
    }

    #[test]
    fn only_one_trailing_period() {
        assert!(matches!(
            tokenize("the ball rolled.."),
            Err(ParseError::IllegalCharacter { ch: '.', offset: 15 })
        ));
        assert!(matches!(
            tokenize("the. ball"),
            Err(ParseError::IllegalCharacter { ch: '.', .. })
        ));
    }

    #[test]
    fn parse_running_example() {
        let lex = builtin_lexicon();
        let f = parse_sentence(&toks(&["the", "ball", "rolled", "to", "the", "wall"]), &lex).unwrap();
        assert_eq!(f, EventFrame::new("roll", "ball", Some((Prep::To, "wall"))));
    }

    #[test]
    fn parse_bare() {
        let lex = builtin_lexicon();
        let f = parse_sentence(&toks(&["the", "ball", "slid"]), &lex).unwrap();
        assert_eq!(f, EventFrame::new("slide", "ball", None));
    }

    #[test]
    fn missing_preposition_is_grammar_error() {
        let lex = builtin_lexicon();
        let e = parse_sentence(&toks(&["the", "ball", "rolled", "the", "wall"]), &lex).unwrap_err();
        assert!(matches!(e, ParseError::Grammar { position: 3, .. }), "{e}");
    }

    #[test]
    fn word_order_is_grammar_error() {
        let lex = builtin_lexicon();
        let e = parse_text("ball the rolled", &lex).unwrap_err();
        assert!(matches!(e, ParseError::Grammar { position: 0, .. }), "{e}");
    }

    #[test]
    fn unknown_noun() {
        let lex = builtin_lexicon();
        assert_eq!(
            parse_text("the zorp rolled", &lex),
            Err(ParseError::UnknownWord("zorp".into()))
        );
    }

    #[test]
    fn preposition_mismatch() {
        let lex = builtin_lexicon();
        assert!(matches!(
            parse_text("the ball arrived to the wall", &lex),
            Err(ParseError::PrepositionMismatch { prep: Prep::To, .. })
        ));
        assert!(parse_text("the ball arrived at the wall", &lex).is_ok());
        assert!(parse_text("a ball left from the wall", &lex).is_ok());
    }

    #[test]
    fn trailing_tokens_rejected() {
        let lex = builtin_lexicon();
        assert!(matches!(
            parse_text("the ball rolled to the wall the", &lex),
            Err(ParseError::Grammar { position: 6, .. })
        ));
    }

    #[test]
    fn truncated_pp_rejected() {
        let lex = builtin_lexicon();
        assert!(matches!(
            parse_text("the ball rolled to the", &lex),
            Err(ParseError::Grammar { position: 5, .. })
        ));
    }

    const VOCAB: &[&str] = &[
        "the", "a", "ball", "wall", "bird", "block", "floor", "rolled", "slid", "flew", "left",
        "arrived", "to", "from", "towards", "at", "zorp", "roll",
    ];

    proptest! {
        #[test]
        fn frames_always_valid(idx in proptest::collection::vec(0..VOCAB.len(), 0..8)) {
            let lex = builtin_lexicon();
            let tokens: Vec<String> = idx.iter().map(|&i| VOCAB[i].to_string()).collect();
            let first = parse_sentence(&tokens, &lex);
            if let Ok(frame) = &first {
                prop_assert!(frame.validate(&lex).is_ok());
            }
            prop_assert_eq!(first, parse_sentence(&tokens, &lex));
        }
    }
}
