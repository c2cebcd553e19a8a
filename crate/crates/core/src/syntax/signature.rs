//! The signature format: named category blocks, operation declarations, and
//! equations between derived terms.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::fincat::FinCategory;
use crate::sigalg::{Enrichment, Equation, EquationSet, MorTerm, ObjTerm, OpDecl, Signature, TermDiagram};

use super::category::{parse_category_body, recover_presentation, serialize_presentation};
use super::{lex, Cursor, PresentedCategory, SyntaxError, Tok};

/// A parsed signature file: the signature, its equations, and the named
/// categories it declared.
#[derive(Debug, Clone)]
pub struct SignatureDoc {
    pub signature: Signature,
    pub equations: EquationSet,
    pub categories: BTreeMap<String, PresentedCategory>,
}

fn parse_term_diagram(cur: &mut Cursor) -> Result<TermDiagram, SyntaxError> {
    cur.expect(Tok::LBracket)?;
    let mut d = TermDiagram::empty();
    if cur.peek() != Some(&Tok::RBracket) {
        loop {
            let kind = cur.ident()?;
            let cell = cur.cell_path()?;
            cur.expect(Tok::Arrow)?;
            match kind.as_str() {
                "obj" => {
                    d.objs.insert(cell, parse_obj_term(cur)?);
                }
                "mor" => {
                    d.mors.insert(cell, parse_mor_term(cur)?);
                }
                other => return Err(cur.err(format!("expected `obj` or `mor`, found `{other}`"))),
            }
            match cur.peek() {
                Some(Tok::Comma) => {
                    cur.next();
                }
                _ => break,
            }
        }
    }
    cur.expect(Tok::RBracket)?;
    Ok(d)
}

fn parse_obj_term(cur: &mut Cursor) -> Result<ObjTerm, SyntaxError> {
    let head = cur.ident()?;
    match head.as_str() {
        "var" => {
            cur.expect(Tok::LParen)?;
            let v = cur.cell_path()?;
            cur.expect(Tok::RParen)?;
            Ok(ObjTerm::Var(v))
        }
        "op" => {
            cur.expect(Tok::LParen)?;
            let op = cur.ident()?;
            cur.expect(Tok::Semi)?;
            let result_obj = cur.cell_path()?;
            cur.expect(Tok::Semi)?;
            let arg = parse_term_diagram(cur)?;
            cur.expect(Tok::RParen)?;
            Ok(ObjTerm::Op {
                op,
                result_obj,
                arg,
            })
        }
        other => Err(cur.err(format!("expected `var` or `op`, found `{other}`"))),
    }
}

fn parse_mor_term(cur: &mut Cursor) -> Result<MorTerm, SyntaxError> {
    let head = cur.ident()?;
    match head.as_str() {
        "var" => {
            cur.expect(Tok::LParen)?;
            let v = cur.cell_path()?;
            cur.expect(Tok::RParen)?;
            Ok(MorTerm::Var(v))
        }
        "op" => {
            cur.expect(Tok::LParen)?;
            let op = cur.ident()?;
            cur.expect(Tok::Semi)?;
            let result_mor = cur.cell_path()?;
            cur.expect(Tok::Semi)?;
            cur.keyword("src")?;
            cur.expect(Tok::Equals)?;
            let src = parse_term_diagram(cur)?;
            cur.expect(Tok::Semi)?;
            cur.keyword("tgt")?;
            cur.expect(Tok::Equals)?;
            let tgt = parse_term_diagram(cur)?;
            cur.expect(Tok::Semi)?;
            cur.keyword("nat")?;
            cur.expect(Tok::Equals)?;
            cur.expect(Tok::LBracket)?;
            let mut nat = BTreeMap::new();
            if cur.peek() != Some(&Tok::RBracket) {
                loop {
                    let cell = cur.cell_path()?;
                    cur.expect(Tok::Arrow)?;
                    nat.insert(cell, parse_mor_term(cur)?);
                    match cur.peek() {
                        Some(Tok::Comma) => {
                            cur.next();
                        }
                        _ => break,
                    }
                }
            }
            cur.expect(Tok::RBracket)?;
            cur.expect(Tok::RParen)?;
            Ok(MorTerm::Op {
                op,
                result_mor,
                src,
                tgt,
                nat,
            })
        }
        other => Err(cur.err(format!("expected `var` or `op`, found `{other}`"))),
    }
}

pub fn parse_signature(text: &str) -> Result<SignatureDoc, SyntaxError> {
    let mut cur = Cursor::new(lex(text)?);
    let mut categories: BTreeMap<String, PresentedCategory> = BTreeMap::new();
    let mut ops: Vec<OpDecl> = Vec::new();
    let mut enrichment = Enrichment::Cat;
    let mut groups: Vec<(String, Vec<Equation>)> = Vec::new();
    while !cur.at_end() {
        if cur.at_keyword("category") {
            cur.next();
            let name = cur.ident()?;
            cur.expect(Tok::LBrace)?;
            let p = parse_category_body(&mut cur)?;
            cur.expect(Tok::RBrace)?;
            categories.insert(name, PresentedCategory::from_presentation(p)?);
        } else if cur.at_keyword("enrichment") {
            cur.next();
            let e = cur.ident()?;
            enrichment = match e.as_str() {
                "cat" => Enrichment::Cat,
                "grpd" => Enrichment::Grpd,
                other => return Err(cur.err(format!("unknown enrichment `{other}`"))),
            };
        } else if cur.at_keyword("operation") {
            cur.next();
            let name = cur.ident()?;
            cur.expect(Tok::LBrace)?;
            cur.keyword("arity")?;
            let arity_name = cur.ident()?;
            cur.keyword("result")?;
            let result_name = cur.ident()?;
            cur.expect(Tok::RBrace)?;
            let arity = categories
                .get(&arity_name)
                .ok_or_else(|| cur.err(format!("unknown category `{arity_name}`")))?
                .cat
                .clone();
            let result = categories
                .get(&result_name)
                .ok_or_else(|| cur.err(format!("unknown category `{result_name}`")))?
                .cat
                .clone();
            ops.push(OpDecl {
                name,
                arity,
                result,
            });
        } else if cur.at_keyword("equation") {
            cur.next();
            let name = cur.ident()?;
            cur.expect(Tok::At)?;
            let arity_name = cur.ident()?;
            cur.expect(Tok::Colon)?;
            let kind = cur.ident()?;
            let eq = match kind.as_str() {
                "obj" => {
                    let lhs = parse_obj_term(&mut cur)?;
                    cur.expect(Tok::Equals)?;
                    let rhs = parse_obj_term(&mut cur)?;
                    Equation::Obj { name, lhs, rhs }
                }
                "mor" => {
                    let lhs = parse_mor_term(&mut cur)?;
                    cur.expect(Tok::Equals)?;
                    let rhs = parse_mor_term(&mut cur)?;
                    Equation::Mor { name, lhs, rhs }
                }
                other => return Err(cur.err(format!("expected `obj` or `mor`, found `{other}`"))),
            };
            match groups.iter_mut().find(|(n, _)| n == &arity_name) {
                Some((_, g)) => g.push(eq),
                None => groups.push((arity_name, vec![eq])),
            }
        } else {
            return Err(cur.err("expected `category`, `enrichment`, `operation`, or `equation`"));
        }
    }
    let mut equations = EquationSet::empty();
    for (arity_name, eqs) in groups {
        let arity = categories
            .get(&arity_name)
            .ok_or_else(|| SyntaxError::elaborate(format!("unknown category `{arity_name}`")))?
            .cat
            .clone();
        equations.groups.push((arity, eqs));
    }
    Ok(SignatureDoc {
        signature: Signature { ops, enrichment },
        equations,
        categories,
    })
}

fn write_term_diagram(out: &mut String, d: &TermDiagram) {
    out.push('[');
    let mut first = true;
    for (k, v) in &d.objs {
        if !first {
            out.push_str(", ");
        }
        first = false;
        out.push_str(&format!("obj {k} -> "));
        write_obj_term(out, v);
    }
    for (k, v) in &d.mors {
        if !first {
            out.push_str(", ");
        }
        first = false;
        out.push_str(&format!("mor {k} -> "));
        write_mor_term(out, v);
    }
    out.push(']');
}

fn write_obj_term(out: &mut String, t: &ObjTerm) {
    match t {
        ObjTerm::Var(v) => out.push_str(&format!("var({v})")),
        ObjTerm::Op {
            op,
            result_obj,
            arg,
        } => {
            out.push_str(&format!("op({op}; {result_obj}; "));
            write_term_diagram(out, arg);
            out.push(')');
        }
    }
}

fn write_mor_term(out: &mut String, t: &MorTerm) {
    match t {
        MorTerm::Var(v) => out.push_str(&format!("var({v})")),
        MorTerm::Op {
            op,
            result_mor,
            src,
            tgt,
            nat,
        } => {
            out.push_str(&format!("op({op}; {result_mor}; src="));
            write_term_diagram(out, src);
            out.push_str("; tgt=");
            write_term_diagram(out, tgt);
            out.push_str("; nat=[");
            let mut first = true;
            for (k, v) in nat {
                if !first {
                    out.push_str(", ");
                }
                first = false;
                out.push_str(&format!("{k} -> "));
                write_mor_term(out, v);
            }
            out.push_str("])");
        }
    }
}

/// Canonical text of a signature plus equations. Categories are named after
/// their role: `arity-<op>`, `result-<op>`, `eqarity-<i>` for equation-only
/// shapes.
pub fn serialize_signature(sig: &Signature, eqs: &EquationSet) -> String {
    let mut out = String::new();
    let mut named: Vec<(String, Arc<FinCategory>)> = Vec::new();
    let mut name_of = |cat: &Arc<FinCategory>, suggestion: String| -> String {
        if let Some((n, _)) = named.iter().find(|(_, c)| c == cat) {
            return n.clone();
        }
        named.push((suggestion.clone(), cat.clone()));
        suggestion
    };
    let mut decls = String::new();
    match sig.enrichment {
        Enrichment::Cat => decls.push_str("enrichment cat\n"),
        Enrichment::Grpd => decls.push_str("enrichment grpd\n"),
    }
    for op in &sig.ops {
        let slug = op.name.replace('/', "-");
        let a = name_of(&op.arity, format!("arity-{slug}"));
        let r = name_of(&op.result, format!("result-{slug}"));
        decls.push_str(&format!("operation {} {{ arity {a} result {r} }}\n", op.name));
    }
    for (i, (arity, group)) in eqs.groups.iter().enumerate() {
        let a = name_of(arity, format!("eqarity-{i}"));
        for eq in group {
            match eq {
                Equation::Obj { name, lhs, rhs } => {
                    decls.push_str(&format!("equation {name} @ {a} : obj "));
                    write_obj_term(&mut decls, lhs);
                    decls.push_str(" = ");
                    write_obj_term(&mut decls, rhs);
                    decls.push('\n');
                }
                Equation::Mor { name, lhs, rhs } => {
                    decls.push_str(&format!("equation {name} @ {a} : mor "));
                    write_mor_term(&mut decls, lhs);
                    decls.push_str(" = ");
                    write_mor_term(&mut decls, rhs);
                    decls.push('\n');
                }
            }
        }
    }
    for (name, cat) in &named {
        out.push_str(&format!("category {name} {{\n"));
        for line in serialize_presentation(&recover_presentation(cat)).lines() {
            out.push_str(&format!("  {line}\n"));
        }
        out.push_str("}\n");
    }
    out.push_str(&decls);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sigalg::lex_signature;

    #[test]
    fn lex_signature_roundtrips() {
        let (sig, eqs) = lex_signature(Enrichment::Cat);
        let text = serialize_signature(&sig, &eqs);
        let doc = parse_signature(&text).unwrap();
        assert_eq!(doc.signature.ops.len(), 4);
        assert_eq!(doc.equations.groups.len(), eqs.groups.len());
        for (a, b) in doc.signature.ops.iter().zip(sig.ops.iter()) {
            assert_eq!(a.name, b.name);
            assert_eq!(a.arity, b.arity);
            assert_eq!(a.result, b.result);
        }
        for ((ca, ga), (cb, gb)) in doc.equations.groups.iter().zip(eqs.groups.iter()) {
            assert_eq!(ca, cb);
            assert_eq!(ga, gb);
        }
        // serialization is stable
        assert_eq!(text, serialize_signature(&doc.signature, &doc.equations));
    }

    #[test]
    fn empty_signature_file() {
        let doc = parse_signature("enrichment cat\n").unwrap();
        assert!(doc.signature.ops.is_empty());
    }
}
