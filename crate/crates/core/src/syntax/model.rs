//! The finite-set format for model and interpretation files: `set` and `fun`
//! bindings over the objects and generating arrows of a base category.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::finset::{FinSetMor, FinSetObj, Value};
use crate::sketch::set_functor_from_generators;
use crate::finset::SetDiagram;

use super::{lex, Cursor, PresentedCategory, SyntaxError, Tok};

/// Parsed model file: named sets and named functions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelFile {
    pub sets: BTreeMap<String, FinSetObj>,
    /// name -> (dom set name, cod set name, graph)
    pub funs: BTreeMap<String, (String, String, Vec<(Value, Value)>)>,
}

pub(crate) fn parse_value(cur: &mut Cursor) -> Result<Value, SyntaxError> {
    match cur.peek() {
        Some(Tok::Ident(_)) => Ok(Value::Atom(cur.ident()?)),
        Some(Tok::Hash) => {
            cur.next();
            let tag = cur.ident()?;
            cur.expect(Tok::LParen)?;
            let v = parse_value(cur)?;
            cur.expect(Tok::RParen)?;
            Ok(Value::Tag(tag, Box::new(v)))
        }
        Some(Tok::LParen) => {
            cur.next();
            if cur.peek() == Some(&Tok::RParen) {
                cur.next();
                return Ok(Value::unit());
            }
            // record when the second token is `=`, pair otherwise
            if matches!(cur.peek(), Some(Tok::Ident(_))) && cur.peek2() == Some(&Tok::Equals) {
                let mut fields = Vec::new();
                loop {
                    let key = cur.ident()?;
                    cur.expect(Tok::Equals)?;
                    let v = parse_value(cur)?;
                    fields.push((key, v));
                    match cur.peek() {
                        Some(Tok::Comma) => {
                            cur.next();
                        }
                        _ => break,
                    }
                }
                cur.expect(Tok::RParen)?;
                return Ok(Value::record(fields));
            }
            let a = parse_value(cur)?;
            cur.expect(Tok::Comma)?;
            let b = parse_value(cur)?;
            cur.expect(Tok::RParen)?;
            Ok(Value::Pair(Box::new(a), Box::new(b)))
        }
        Some(Tok::LBrace) => {
            cur.next();
            let mut graph = Vec::new();
            if cur.peek() != Some(&Tok::RBrace) {
                loop {
                    let a = parse_value(cur)?;
                    cur.expect(Tok::MapsTo)?;
                    let b = parse_value(cur)?;
                    graph.push((a, b));
                    match cur.peek() {
                        Some(Tok::Comma) => {
                            cur.next();
                        }
                        _ => break,
                    }
                }
            }
            cur.expect(Tok::RBrace)?;
            Ok(Value::fun(graph))
        }
        Some(t) => Err(cur.err(format!("expected a value, found {t}"))),
        None => Err(cur.err("expected a value, found end of input")),
    }
}

pub fn parse_model(text: &str) -> Result<ModelFile, SyntaxError> {
    let mut cur = Cursor::new(lex(text)?);
    let mut file = ModelFile {
        sets: BTreeMap::new(),
        funs: BTreeMap::new(),
    };
    while !cur.at_end() {
        if cur.at_keyword("set") {
            cur.next();
            let name = cur.ident()?;
            cur.expect(Tok::Equals)?;
            cur.expect(Tok::LBrace)?;
            let mut elements = Vec::new();
            if cur.peek() != Some(&Tok::RBrace) {
                loop {
                    elements.push(parse_value(&mut cur)?);
                    match cur.peek() {
                        Some(Tok::Comma) => {
                            cur.next();
                        }
                        _ => break,
                    }
                }
            }
            cur.expect(Tok::RBrace)?;
            let set = FinSetObj::new(elements).map_err(SyntaxError::elaborate)?;
            file.sets.insert(name, set);
        } else if cur.at_keyword("fun") {
            cur.next();
            let name = cur.cell_path()?;
            cur.expect(Tok::Colon)?;
            let dom = cur.ident()?;
            cur.expect(Tok::Arrow)?;
            let cod = cur.ident()?;
            cur.expect(Tok::Equals)?;
            cur.expect(Tok::LBrace)?;
            let mut graph = Vec::new();
            if cur.peek() != Some(&Tok::RBrace) {
                loop {
                    let a = parse_value(&mut cur)?;
                    cur.expect(Tok::MapsTo)?;
                    let b = parse_value(&mut cur)?;
                    graph.push((a, b));
                    match cur.peek() {
                        Some(Tok::Comma) => {
                            cur.next();
                        }
                        _ => break,
                    }
                }
            }
            cur.expect(Tok::RBrace)?;
            file.funs.insert(name, (dom, cod, graph));
        } else {
            return Err(cur.err("expected `set` or `fun`"));
        }
    }
    Ok(file)
}

/// Binds a model file over a presented base: every base object needs a
/// `set`, every generating arrow a `fun`; composites are derived.
pub fn bind_model(
    base: &PresentedCategory,
    file: &ModelFile,
) -> Result<SetDiagram, SyntaxError> {
    let mut objs = BTreeMap::new();
    for (_, name) in base.cat.objects() {
        let set = file
            .sets
            .get(name)
            .ok_or_else(|| SyntaxError::elaborate(format!("unbound generator `{name}`")))?;
        objs.insert(name.to_string(), set.clone());
    }
    let mut gens: BTreeMap<String, FinSetMor> = BTreeMap::new();
    for g in base.generators() {
        let (dom, cod, graph) = file
            .funs
            .get(g)
            .ok_or_else(|| SyntaxError::elaborate(format!("unbound generator `{g}`")))?;
        let dom_set = file
            .sets
            .get(dom)
            .ok_or_else(|| SyntaxError::elaborate(format!("unknown set `{dom}`")))?;
        let cod_set = file
            .sets
            .get(cod)
            .ok_or_else(|| SyntaxError::elaborate(format!("unknown set `{cod}`")))?;
        let f = FinSetMor::new(dom_set.clone(), cod_set.clone(), graph)
            .map_err(SyntaxError::elaborate)?;
        gens.insert(g.to_string(), f);
    }
    set_functor_from_generators(&base.cat, &objs, &gens).map_err(SyntaxError::elaborate)
}

/// Canonical text of a model: one `set` line per object, one `fun` line per
/// generating arrow.
pub fn serialize_model(base: &PresentedCategory, model: &SetDiagram) -> String {
    let mut out = String::new();
    for (o, name) in base.cat.objects() {
        out.push_str(&format!("set {name} = {}\n", model.objs[o]));
    }
    let mut gens: Vec<&str> = base.generators().collect();
    gens.sort();
    for g in gens {
        let m = base.cat.mor_ix(g).expect("generator in category");
        let f = &model.mors[m];
        let entries: Vec<String> = f
            .graph()
            .iter()
            .map(|(a, b)| format!("{a} |-> {b}"))
            .collect();
        out.push_str(&format!(
            "fun {g} : {} -> {} = {{{}}}\n",
            base.cat.obj_name(base.cat.dom(m)),
            base.cat.obj_name(base.cat.cod(m)),
            entries.join(", ")
        ));
    }
    out
}

/// Convenience: bind over a bare finite category by recovering generators.
pub fn bind_model_on(
    cat: &Arc<crate::fincat::FinCategory>,
    file: &ModelFile,
) -> Result<SetDiagram, SyntaxError> {
    let presented = PresentedCategory {
        presentation: super::recover_presentation(cat),
        cat: cat.clone(),
    };
    bind_model(&presented, file)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_category;

    #[test]
    fn value_roundtrip() {
        for text in [
            "x",
            "()",
            "(a, b)",
            "(k=v, l=w)",
            "{a |-> b, c |-> d}",
            "#left(x)",
            "((a, b), {x |-> (u=1)})",
        ] {
            let mut cur = Cursor::new(lex(text).unwrap());
            let v = parse_value(&mut cur).unwrap();
            assert!(cur.at_end());
            let printed = v.to_string();
            let mut cur2 = Cursor::new(lex(&printed).unwrap());
            let v2 = parse_value(&mut cur2).unwrap();
            assert_eq!(v, v2);
        }
    }

    #[test]
    fn model_bind_and_roundtrip() {
        let base = parse_category("object EL object TY arrow El : EL -> TY").unwrap();
        let text = "set EL = {e}\nset TY = {bot, top}\nfun El : EL -> TY = {e |-> top}\n";
        let file = parse_model(text).unwrap();
        let model = bind_model(&base, &file).unwrap();
        assert_eq!(model.objs[base.cat.obj_ix("EL").unwrap()].len(), 1);
        let printed = serialize_model(&base, &model);
        let again = bind_model(&base, &parse_model(&printed).unwrap()).unwrap();
        assert_eq!(model, again);
    }

    #[test]
    fn unbound_generator_reported() {
        let base = parse_category("object EL object TY arrow El : EL -> TY").unwrap();
        let file = parse_model("set EL = {e}\nset TY = {t}\n").unwrap();
        let err = bind_model(&base, &file).unwrap_err();
        assert!(err.to_string().contains("unbound generator"));
    }
}
