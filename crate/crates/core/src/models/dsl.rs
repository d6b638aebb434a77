use super::{ExcuseMode, MemoryModel, ModelError, Rule, RuleKind};
use crate::frontend::lexer::{lex, Cursor, Tok};
use crate::relalg::{Atom, EventClass, Pattern, RelExpr};

/// Parses a model file:
///
/// ```text
/// model sc_rr
/// option per_path
/// a : mo_total
/// d : irreflexive rb;hb \ a_rr
/// f : acyclic po | rf
/// ```
///
/// `acyclic E` abbreviates `irreflexive (E)+`. Options: `per_path`,
/// `pairwise`, `final_reads_in_filters`, `frr_generalized`.
pub fn parse_model(src: &str, default_name: &str) -> Result<MemoryModel, ModelError> {
    let mut model = MemoryModel::new(default_name, Vec::new());
    for (lineno, line) in src.lines().enumerate() {
        let toks = lex(line).map_err(|e| ModelError::Parse(lineno + 1, e.to_string()))?;
        if toks.is_empty() {
            continue;
        }
        let mut cur = Cursor::new(toks);
        let err = |e: crate::frontend::FrontendError| ModelError::Parse(lineno + 1, e.to_string());
        let head = cur.ident().map_err(err)?;
        match head.as_str() {
            "model" => model.name = cur.ident().map_err(err)?,
            "option" => match cur.ident().map_err(err)?.as_str() {
                "per_path" => model.excuse = ExcuseMode::PerPath,
                "pairwise" => model.excuse = ExcuseMode::Pairwise,
                "final_reads_in_filters" => model.patterns.final_reads_in_filters = true,
                "frr_generalized" => model.patterns.frr_generalized = true,
                other => return Err(ModelError::Parse(lineno + 1, format!("unknown option `{other}`"))),
            },
            name => {
                cur.expect_sym(":").map_err(err)?;
                let kind = match cur.ident().map_err(err)?.as_str() {
                    "mo_total" => RuleKind::MoTotal,
                    "irreflexive" => RuleKind::Irreflexive(expr(&mut cur).map_err(err)?),
                    "acyclic" => RuleKind::Irreflexive(expr(&mut cur).map_err(err)?.plus()),
                    other => {
                        return Err(ModelError::Parse(lineno + 1, format!("unknown rule kind `{other}`")));
                    }
                };
                if model.rules.iter().any(|r| r.name == name) {
                    return Err(ModelError::Parse(lineno + 1, format!("rule `{name}` defined twice")));
                }
                model.rules.push(Rule { name: name.to_string(), kind });
            }
        }
        if !cur.at_end() {
            return Err(ModelError::Parse(lineno + 1, cur.unexpected("end of line").to_string()));
        }
    }
    if model.rules.is_empty() {
        return Err(ModelError::Parse(0, "model has no rules".into()));
    }
    Ok(model)
}

/// Parses a relation expression on its own.
pub fn parse_expr(src: &str) -> Result<RelExpr, ModelError> {
    let mut cur = Cursor::new(lex(src).map_err(|e| ModelError::Parse(1, e.to_string()))?);
    let e = expr(&mut cur).map_err(|e| ModelError::Parse(1, e.to_string()))?;
    if !cur.at_end() {
        return Err(ModelError::Parse(1, cur.unexpected("end of expression").to_string()));
    }
    Ok(e)
}

type PResult<T> = Result<T, crate::frontend::FrontendError>;

fn expr(cur: &mut Cursor) -> PResult<RelExpr> {
    let mut alts = vec![diff(cur)?];
    while cur.eat_sym("|") {
        alts.push(diff(cur)?);
    }
    Ok(RelExpr::alt(alts))
}

fn diff(cur: &mut Cursor) -> PResult<RelExpr> {
    let mut e = seq(cur)?;
    while cur.eat_sym("\\") {
        e = e.minus(seq(cur)?);
    }
    Ok(e)
}

fn seq(cur: &mut Cursor) -> PResult<RelExpr> {
    let mut parts = vec![postfix(cur)?];
    while cur.eat_sym(";") {
        parts.push(postfix(cur)?);
    }
    Ok(RelExpr::seq(parts))
}

fn postfix(cur: &mut Cursor) -> PResult<RelExpr> {
    let mut e = primary(cur)?;
    loop {
        if cur.eat_sym("?") {
            e = e.opt();
        } else if cur.eat_sym("+") {
            e = e.plus();
        } else if cur.eat_sym("^-1") {
            e = e.inverse();
        } else {
            return Ok(e);
        }
    }
}

fn primary(cur: &mut Cursor) -> PResult<RelExpr> {
    if cur.eat_sym("(") {
        let e = expr(cur)?;
        cur.expect_sym(")")?;
        return Ok(e);
    }
    if cur.eat_sym("[") {
        let class = if cur.eat_sym("{") {
            let mut labels = vec![cur.ident()?];
            while cur.eat_sym(",") {
                labels.push(cur.ident()?);
            }
            cur.expect_sym("}")?;
            EventClass::Labels(labels)
        } else {
            match cur.ident()?.as_str() {
                "R" => EventClass::Read,
                "W" => EventClass::Write,
                "rmw" => EventClass::Rmw,
                "frr" => EventClass::FenceRr,
                "final" => EventClass::Final,
                "plain" => EventClass::PlainRead,
                other => return Err(cur.error(format!("unknown event class `{other}`"))),
            }
        };
        cur.expect_sym("]")?;
        return Ok(RelExpr::Id(class));
    }
    match cur.peek() {
        Some(Tok::Ident(_)) => {
            let name = cur.ident()?;
            Ok(match name.as_str() {
                "a_rr" => RelExpr::Pattern(Pattern::ARr),
                "a_frr" => RelExpr::Pattern(Pattern::AFrr),
                "rmw_mid" => RelExpr::Pattern(Pattern::RmwMid),
                _ => RelExpr::Atom(Atom::from_name(&name)),
            })
        }
        _ => Err(cur.unexpected("relation")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expressions_round_trip_through_display() {
        for src in ["rb;mo?;hb \\ a_rr", "(po | rf)+", "[W];po;[R] | rf^-1;mo", "[{A1,B2}];po", "rb;(mo | hb)?"] {
            let e = parse_expr(src).unwrap();
            assert_eq!(parse_expr(&e.to_string()).unwrap(), e, "{src}");
        }
    }

    #[test]
    fn difference_binds_looser_than_sequence() {
        let e = parse_expr("rb;hb \\ a_rr").unwrap();
        assert!(matches!(e, RelExpr::Diff(..)));
    }

    #[test]
    fn bad_model_lines_report_line_numbers() {
        let err = parse_model("a : mo_total\nb : irreflexive po;", "m").unwrap_err();
        assert!(matches!(err, ModelError::Parse(2, _)));
        let err = parse_model("a : frobnicate po", "m").unwrap_err();
        assert!(err.to_string().contains("unknown rule kind"));
    }
}
