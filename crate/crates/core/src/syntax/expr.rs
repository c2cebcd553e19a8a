//! The expression syntax for objects and morphisms of the free structure.
//!
//! Limit shapes appear inline as `lim{[object a; arrow f : a -> b]: ...}` or
//! by reference to a named diagram block.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::fincat::FinCategory;
use crate::lexpr::{LimSpec, MorExpr, ObjExpr};

use super::category::parse_category_body;
use super::{lex, Cursor, PresentedCategory, SyntaxError, Tok};

pub(crate) struct ExprCtx<'a> {
    /// named diagram shapes usable in `lim{name: ...}`
    pub diagrams: &'a BTreeMap<String, PresentedCategory>,
}

impl ExprCtx<'_> {
    pub(crate) fn none() -> ExprCtx<'static> {
        static EMPTY: std::sync::OnceLock<BTreeMap<String, PresentedCategory>> =
            std::sync::OnceLock::new();
        ExprCtx {
            diagrams: EMPTY.get_or_init(BTreeMap::new),
        }
    }
}

pub(crate) fn parse_obj(cur: &mut Cursor, ctx: &ExprCtx) -> Result<ObjExpr, SyntaxError> {
    match cur.peek() {
        Some(Tok::Ident(word)) => match word.as_str() {
            "1" => {
                cur.next();
                Ok(ObjExpr::Terminal)
            }
            "gen" => {
                cur.next();
                cur.expect(Tok::LParen)?;
                let name = cur.cell_path()?;
                cur.expect(Tok::RParen)?;
                Ok(ObjExpr::Gen(name))
            }
            "pb" => {
                cur.next();
                cur.expect(Tok::LParen)?;
                let f = parse_mor(cur, ctx)?;
                cur.expect(Tok::Semi)?;
                let g = parse_mor(cur, ctx)?;
                cur.expect(Tok::RParen)?;
                Ok(ObjExpr::Pullback(Box::new(f), Box::new(g)))
            }
            "pi" => {
                cur.next();
                cur.expect(Tok::LParen)?;
                let f = parse_mor(cur, ctx)?;
                cur.expect(Tok::Semi)?;
                let g = parse_mor(cur, ctx)?;
                cur.expect(Tok::RParen)?;
                Ok(ObjExpr::Pi(Box::new(f), Box::new(g)))
            }
            "ihom" => {
                cur.next();
                cur.expect(Tok::LParen)?;
                let x = parse_obj(cur, ctx)?;
                cur.expect(Tok::Comma)?;
                let y = parse_obj(cur, ctx)?;
                cur.expect(Tok::RParen)?;
                Ok(ObjExpr::IHom(Box::new(x), Box::new(y)))
            }
            "poly" => {
                cur.next();
                cur.expect(Tok::LParen)?;
                let f = parse_mor(cur, ctx)?;
                cur.expect(Tok::Semi)?;
                let x = parse_obj(cur, ctx)?;
                cur.expect(Tok::RParen)?;
                Ok(ObjExpr::Poly(Box::new(f), Box::new(x)))
            }
            "lim" => {
                cur.next();
                Ok(ObjExpr::Lim(parse_lim(cur, ctx)?))
            }
            other => Err(cur.err(format!("expected an object expression, found `{other}`"))),
        },
        Some(t) => Err(cur.err(format!("expected an object expression, found {t}"))),
        None => Err(cur.err("expected an object expression, found end of input")),
    }
}

fn parse_lim(cur: &mut Cursor, ctx: &ExprCtx) -> Result<LimSpec, SyntaxError> {
    cur.expect(Tok::LBrace)?;
    let shape: Arc<FinCategory> = if cur.peek() == Some(&Tok::LBracket) {
        cur.next();
        let p = parse_category_body(cur)?;
        cur.expect(Tok::RBracket)?;
        Arc::new(crate::fincat::present_category(&p).map_err(SyntaxError::elaborate)?)
    } else {
        let name = cur.ident()?;
        ctx.diagrams
            .get(&name)
            .map(|c| c.cat.clone())
            .ok_or_else(|| cur.err(format!("unknown diagram `{name}`")))?
    };
    cur.expect(Tok::Colon)?;
    let mut objs = BTreeMap::new();
    let mut mors = BTreeMap::new();
    if cur.peek() != Some(&Tok::RBrace) {
        loop {
            let cell = cur.cell_path()?;
            cur.expect(Tok::Arrow)?;
            if shape.obj_ix(&cell).is_some() {
                objs.insert(cell, parse_obj(cur, ctx)?);
            } else if shape.mor_ix(&cell).is_some() {
                mors.insert(cell, parse_mor(cur, ctx)?);
            } else {
                return Err(cur.err(format!("`{cell}` is not a cell of the limit shape")));
            }
            match cur.peek() {
                Some(Tok::Comma) => {
                    cur.next();
                }
                _ => break,
            }
        }
    }
    cur.expect(Tok::RBrace)?;
    Ok(LimSpec { shape, objs, mors })
}

pub(crate) fn parse_mor(cur: &mut Cursor, ctx: &ExprCtx) -> Result<MorExpr, SyntaxError> {
    let mut acc = parse_mor_atom(cur, ctx)?;
    // `g . f` applies f first; a chain right-associates onto the accumulator
    while cur.peek() == Some(&Tok::Dot) {
        cur.next();
        let rhs = parse_mor_atom(cur, ctx)?;
        acc = MorExpr::Comp(Box::new(acc), Box::new(rhs));
    }
    Ok(acc)
}

fn parse_mor_atom(cur: &mut Cursor, ctx: &ExprCtx) -> Result<MorExpr, SyntaxError> {
    match cur.peek() {
        Some(Tok::LParen) => {
            cur.next();
            let e = parse_mor(cur, ctx)?;
            cur.expect(Tok::RParen)?;
            Ok(e)
        }
        Some(Tok::Ident(word)) => {
            let word = word.clone();
            match word.as_str() {
                "gen" => {
                    cur.next();
                    cur.expect(Tok::LParen)?;
                    let name = cur.cell_path()?;
                    cur.expect(Tok::RParen)?;
                    Ok(MorExpr::Gen(name))
                }
                "id" => {
                    cur.next();
                    cur.expect(Tok::LParen)?;
                    let x = parse_obj(cur, ctx)?;
                    cur.expect(Tok::RParen)?;
                    Ok(MorExpr::Id(Box::new(x)))
                }
                "bang" => {
                    cur.next();
                    cur.expect(Tok::LParen)?;
                    let x = parse_obj(cur, ctx)?;
                    cur.expect(Tok::RParen)?;
                    Ok(MorExpr::Bang(Box::new(x)))
                }
                "p1" | "p2" => {
                    cur.next();
                    cur.expect(Tok::LParen)?;
                    let f = parse_mor(cur, ctx)?;
                    cur.expect(Tok::Semi)?;
                    let g = parse_mor(cur, ctx)?;
                    cur.expect(Tok::RParen)?;
                    Ok(if word == "p1" {
                        MorExpr::PbProj1(Box::new(f), Box::new(g))
                    } else {
                        MorExpr::PbProj2(Box::new(f), Box::new(g))
                    })
                }
                "tuple" => {
                    cur.next();
                    cur.expect(Tok::LParen)?;
                    let f = parse_mor(cur, ctx)?;
                    cur.expect(Tok::Semi)?;
                    let g = parse_mor(cur, ctx)?;
                    cur.expect(Tok::Semi)?;
                    let left = parse_mor(cur, ctx)?;
                    cur.expect(Tok::Semi)?;
                    let right = parse_mor(cur, ctx)?;
                    cur.expect(Tok::RParen)?;
                    Ok(MorExpr::PbTuple {
                        f: Box::new(f),
                        g: Box::new(g),
                        left: Box::new(left),
                        right: Box::new(right),
                    })
                }
                "lam" => {
                    cur.next();
                    cur.expect(Tok::LParen)?;
                    let f = parse_mor(cur, ctx)?;
                    cur.expect(Tok::Semi)?;
                    let g = parse_mor(cur, ctx)?;
                    cur.expect(Tok::Semi)?;
                    let h = parse_mor(cur, ctx)?;
                    cur.expect(Tok::RParen)?;
                    Ok(MorExpr::PiTranspose {
                        f: Box::new(f),
                        g: Box::new(g),
                        h: Box::new(h),
                    })
                }
                "unlam" => {
                    cur.next();
                    cur.expect(Tok::LParen)?;
                    let f = parse_mor(cur, ctx)?;
                    cur.expect(Tok::Semi)?;
                    let g = parse_mor(cur, ctx)?;
                    cur.expect(Tok::Semi)?;
                    let p = parse_mor(cur, ctx)?;
                    cur.expect(Tok::Semi)?;
                    let k = parse_mor(cur, ctx)?;
                    cur.expect(Tok::RParen)?;
                    Ok(MorExpr::PiUntranspose {
                        f: Box::new(f),
                        g: Box::new(g),
                        p: Box::new(p),
                        k: Box::new(k),
                    })
                }
                "leg" => {
                    cur.next();
                    cur.expect(Tok::LParen)?;
                    cur.keyword("lim")?;
                    let lim = parse_lim(cur, ctx)?;
                    cur.expect(Tok::Semi)?;
                    let leg = cur.ident()?;
                    cur.expect(Tok::RParen)?;
                    Ok(MorExpr::LimLeg { lim, leg })
                }
                "ltuple" => {
                    cur.next();
                    cur.expect(Tok::LParen)?;
                    cur.keyword("lim")?;
                    let lim = parse_lim(cur, ctx)?;
                    cur.expect(Tok::Semi)?;
                    let mut legs = BTreeMap::new();
                    loop {
                        let o = cur.ident()?;
                        cur.expect(Tok::Arrow)?;
                        legs.insert(o, parse_mor(cur, ctx)?);
                        match cur.peek() {
                            Some(Tok::Comma) => {
                                cur.next();
                            }
                            _ => break,
                        }
                    }
                    cur.expect(Tok::RParen)?;
                    Ok(MorExpr::LimTuple { lim, legs })
                }
                "pre" => {
                    cur.next();
                    cur.expect(Tok::LParen)?;
                    let h = parse_mor(cur, ctx)?;
                    cur.expect(Tok::Semi)?;
                    let y = parse_obj(cur, ctx)?;
                    cur.expect(Tok::RParen)?;
                    Ok(MorExpr::Precompose {
                        h: Box::new(h),
                        y: Box::new(y),
                    })
                }
                "post" => {
                    cur.next();
                    cur.expect(Tok::LParen)?;
                    let h = parse_mor(cur, ctx)?;
                    cur.expect(Tok::Semi)?;
                    let x = parse_obj(cur, ctx)?;
                    cur.expect(Tok::RParen)?;
                    Ok(MorExpr::Postcompose {
                        h: Box::new(h),
                        x: Box::new(x),
                    })
                }
                "polym" => {
                    cur.next();
                    cur.expect(Tok::LParen)?;
                    let f = parse_mor(cur, ctx)?;
                    cur.expect(Tok::Semi)?;
                    let h = parse_mor(cur, ctx)?;
                    cur.expect(Tok::RParen)?;
                    Ok(MorExpr::PolyMor {
                        f: Box::new(f),
                        h: Box::new(h),
                    })
                }
                other => Err(cur.err(format!("expected a morphism expression, found `{other}`"))),
            }
        }
        Some(t) => Err(cur.err(format!("expected a morphism expression, found {t}"))),
        None => Err(cur.err("expected a morphism expression, found end of input")),
    }
}

/// Parses a standalone object expression.
pub fn parse_obj_expr(text: &str) -> Result<ObjExpr, SyntaxError> {
    let mut cur = Cursor::new(lex(text)?);
    let e = parse_obj(&mut cur, &ExprCtx::none())?;
    if !cur.at_end() {
        return Err(cur.err("unexpected trailing input"));
    }
    Ok(e)
}

/// Parses a standalone morphism expression.
pub fn parse_mor_expr(text: &str) -> Result<MorExpr, SyntaxError> {
    let mut cur = Cursor::new(lex(text)?);
    let e = parse_mor(&mut cur, &ExprCtx::none())?;
    if !cur.at_end() {
        return Err(cur.err("unexpected trailing input"));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn obj_expression_roundtrip() {
        for text in [
            "1",
            "gen(A)",
            "pb(gen(f); gen(g))",
            "pi(gen(f); id(gen(A)))",
            "ihom(1, gen(X))",
            "poly(gen(f); gen(X))",
            "lim{[object a; object b; arrow f : a -> b]: a -> gen(A), b -> gen(B), f -> gen(u)}",
        ] {
            let e = parse_obj_expr(text).unwrap();
            let printed = e.to_string();
            let again = parse_obj_expr(&printed).unwrap();
            assert_eq!(e, again, "text: {text} printed: {printed}");
        }
    }

    #[test]
    fn mor_expression_roundtrip() {
        for text in [
            "gen(f)",
            "id(1)",
            "(gen(g) . gen(f))",
            "bang(gen(A))",
            "p1(gen(f); gen(g))",
            "tuple(gen(f); gen(g); gen(a); gen(b))",
            "lam(gen(f); gen(g); p1(gen(f); gen(p)))",
            "pre(gen(h); gen(Y))",
            "post(gen(h); gen(X))",
            "polym(gen(f); gen(f))",
            "leg(lim{[object a]: a -> gen(A)}; a)",
            "ltuple(lim{[object a]: a -> gen(A)}; a -> gen(u))",
        ] {
            let e = parse_mor_expr(text).unwrap();
            let printed = e.to_string();
            let again = parse_mor_expr(&printed).unwrap();
            assert_eq!(e, again, "text: {text} printed: {printed}");
        }
    }

    #[test]
    fn composition_chain_groups_left() {
        let e = parse_mor_expr("gen(h) . gen(g) . gen(f)").unwrap();
        let printed = e.to_string();
        assert_eq!(printed, "((gen(h) . gen(g)) . gen(f))");
    }
}
