use std::fmt;

use super::TransformError;
use crate::frontend::lexer::{lex, Cursor, Tok};
use crate::frontend::Tid;

/// One edit, as written on the command line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EffectSpec {
    /// Swap two adjacent events of one thread.
    Reorder(String, String),
    /// Swap two adjacent plain reads of different locations.
    ReorderRr(String, String),
    Eliminate(String),
    /// New write `label: loc = value` placed between `after` and `before`;
    /// a missing side defaults to the anchor's immediate neighbour.
    Introduce { label: String, loc: String, value: i64, after: Option<String>, before: Option<String> },
    /// Run thread `.1` sequentially after thread `.0`, as thread `.0`.
    Inline(Tid, Tid),
}

impl fmt::Display for EffectSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EffectSpec::Reorder(a, b) => write!(f, "reorder {a} {b}"),
            EffectSpec::ReorderRr(a, b) => write!(f, "reorder_rr {a} {b}"),
            EffectSpec::Eliminate(l) => write!(f, "eliminate {l}"),
            EffectSpec::Introduce { label, loc, value, after, before } => {
                write!(f, "introduce {label} {loc}={value}")?;
                if let Some(a) = after {
                    write!(f, " after {a}")?;
                }
                if let Some(b) = before {
                    write!(f, " before {b}")?;
                }
                Ok(())
            }
            EffectSpec::Inline(a, b) => write!(f, "inline {a} {b}"),
        }
    }
}

fn thread_id(cur: &mut Cursor) -> Result<Tid, TransformError> {
    let bad = |s: &str| TransformError::Syntax(format!("expected a thread id, found `{s}`"));
    match cur.next() {
        Some(Tok::Int(n)) if n > 0 => Ok(n as Tid),
        Some(Tok::Ident(s)) => s.strip_prefix('T').and_then(|n| n.parse().ok()).filter(|&n| n > 0).ok_or_else(|| bad(&s)),
        other => Err(bad(&format!("{other:?}"))),
    }
}

/// Parses `reorder L1 L2`, `reorder_rr L1 L2`, `eliminate L`,
/// `introduce W x=v after L before L'` and `inline Ta Tb`, separated by
/// commas.
pub fn parse_effects(src: &str) -> Result<Vec<EffectSpec>, TransformError> {
    let syntax = |e: crate::frontend::FrontendError| TransformError::Syntax(e.to_string());
    let mut cur = Cursor::new(lex(src).map_err(syntax)?);
    let mut out = Vec::new();
    loop {
        let kind = cur.ident().map_err(syntax)?;
        let spec = match kind.as_str() {
            "reorder" => EffectSpec::Reorder(cur.ident().map_err(syntax)?, cur.ident().map_err(syntax)?),
            "reorder_rr" => EffectSpec::ReorderRr(cur.ident().map_err(syntax)?, cur.ident().map_err(syntax)?),
            "eliminate" => EffectSpec::Eliminate(cur.ident().map_err(syntax)?),
            "introduce" => {
                let label = cur.ident().map_err(syntax)?;
                let loc = cur.ident().map_err(syntax)?;
                cur.expect_sym("=").map_err(syntax)?;
                let value = cur.int().map_err(syntax)?;
                let mut after = None;
                let mut before = None;
                loop {
                    if cur.eat_kw("after") {
                        after = Some(cur.ident().map_err(syntax)?);
                    } else if cur.eat_kw("before") {
                        before = Some(cur.ident().map_err(syntax)?);
                    } else {
                        break;
                    }
                }
                EffectSpec::Introduce { label, loc, value, after, before }
            }
            "inline" => EffectSpec::Inline(thread_id(&mut cur)?, thread_id(&mut cur)?),
            other => return Err(TransformError::Syntax(format!("unknown effect `{other}`"))),
        };
        out.push(spec);
        if cur.at_end() {
            return Ok(out);
        }
        cur.expect_sym(",").map_err(syntax)?;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_each_form() {
        let specs = parse_effects("reorder W1 R1, eliminate WZ, introduce N w=1 after A before B, inline T3 1").unwrap();
        assert_eq!(
            specs,
            [
                EffectSpec::Reorder("W1".into(), "R1".into()),
                EffectSpec::Eliminate("WZ".into()),
                EffectSpec::Introduce {
                    label: "N".into(),
                    loc: "w".into(),
                    value: 1,
                    after: Some("A".into()),
                    before: Some("B".into())
                },
                EffectSpec::Inline(3, 1),
            ]
        );
    }

    #[test]
    fn display_parses_back() {
        let src = "reorder_rr R1 R2, introduce N w=1 after A, inline 3 1";
        let specs = parse_effects(src).unwrap();
        let printed: Vec<String> = specs.iter().map(|s| s.to_string()).collect();
        assert_eq!(parse_effects(&printed.join(", ")).unwrap(), specs);
    }

    #[test]
    fn rejects_unknown_effects() {
        assert!(matches!(parse_effects("hoist A"), Err(TransformError::Syntax(_))));
        assert!(matches!(parse_effects("inline T0 T1"), Err(TransformError::Syntax(_))));
    }
}
