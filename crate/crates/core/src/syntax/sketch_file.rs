//! The sketch format: a base category block followed by marking blocks, each
//! giving generators, shape, embedding, realization, and image.

use std::collections::BTreeMap;

use crate::fincat::functor_via_paths;
use crate::lexpr::{LimSpec, MorExpr, ObjExpr};
use crate::sketch::{extend_realization, Marking, Sketch};

use super::category::{parse_category_body, recover_presentation, serialize_presentation};
use super::expr::{parse_mor, parse_obj, ExprCtx};
use super::{lex, Cursor, PresentedCategory, SyntaxError, Tok};

/// Parses a sketch file, returning the presented base and the sketch value.
pub fn parse_sketch(text: &str) -> Result<(PresentedCategory, Sketch), SyntaxError> {
    let mut cur = Cursor::new(lex(text)?);
    cur.keyword("category")?;
    cur.expect(Tok::LBrace)?;
    let base_p = parse_category_body(&mut cur)?;
    cur.expect(Tok::RBrace)?;
    let base = PresentedCategory::from_presentation(base_p)?;

    let mut diagrams: BTreeMap<String, PresentedCategory> = BTreeMap::new();
    let mut markings: Vec<Marking> = Vec::new();
    while !cur.at_end() {
        if cur.at_keyword("diagram") {
            cur.next();
            let name = cur.ident()?;
            cur.expect(Tok::LBrace)?;
            let p = parse_category_body(&mut cur)?;
            cur.expect(Tok::RBrace)?;
            diagrams.insert(name, PresentedCategory::from_presentation(p)?);
            continue;
        }
        cur.keyword("marking")?;
        let name = cur.ident()?;
        cur.expect(Tok::LBrace)?;

        cur.keyword("generators")?;
        cur.expect(Tok::LBrace)?;
        let gens_p = parse_category_body(&mut cur)?;
        cur.expect(Tok::RBrace)?;
        let generators = PresentedCategory::from_presentation(gens_p)?;

        cur.keyword("shape")?;
        cur.expect(Tok::LBrace)?;
        let shape_p = parse_category_body(&mut cur)?;
        cur.expect(Tok::RBrace)?;
        let shape = PresentedCategory::from_presentation(shape_p)?;

        let parse_pairs = |cur: &mut Cursor| -> Result<Vec<(String, String)>, SyntaxError> {
            cur.expect(Tok::LBrace)?;
            let mut out = Vec::new();
            if cur.peek() != Some(&Tok::RBrace) {
                loop {
                    let k = cur.cell_path()?;
                    cur.expect(Tok::Arrow)?;
                    let v = cur.cell_path()?;
                    out.push((k, v));
                    match cur.peek() {
                        Some(Tok::Comma) => {
                            cur.next();
                        }
                        _ => break,
                    }
                }
            }
            cur.expect(Tok::RBrace)?;
            Ok(out)
        };

        cur.keyword("embed")?;
        let embed = parse_pairs(&mut cur)?;

        cur.keyword("realize")?;
        cur.expect(Tok::LBrace)?;
        let mut k_obj: BTreeMap<String, ObjExpr> = BTreeMap::new();
        let mut k_mor: BTreeMap<String, MorExpr> = BTreeMap::new();
        let ctx = ExprCtx {
            diagrams: &diagrams,
        };
        if cur.peek() != Some(&Tok::RBrace) {
            loop {
                let cell = cur.cell_path()?;
                cur.expect(Tok::Arrow)?;
                let is_obj = shape.cat.obj_ix(&cell).is_some();
                let is_mor = shape.cat.mor_ix(&cell).is_some();
                match (is_obj, is_mor) {
                    (true, false) => {
                        k_obj.insert(cell, parse_obj(&mut cur, &ctx)?);
                    }
                    (false, true) => {
                        k_mor.insert(cell, parse_mor(&mut cur, &ctx)?);
                    }
                    (true, true) => {
                        return Err(cur.err(format!(
                            "`{cell}` names both an object and a morphism of the shape"
                        )))
                    }
                    (false, false) => {
                        return Err(cur.err(format!("`{cell}` is not a cell of the shape")))
                    }
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

        cur.keyword("image")?;
        let image = parse_pairs(&mut cur)?;
        cur.expect(Tok::RBrace)?;

        // embedding: split entries into objects and morphisms of the
        // generator category
        let mut jo = BTreeMap::new();
        let mut jm = BTreeMap::new();
        for (k, v) in embed {
            if generators.cat.obj_ix(&k).is_some() {
                jo.insert(k, v);
            } else {
                jm.insert(k, v);
            }
        }
        let j = functor_via_paths(
            generators.cat.clone(),
            shape.cat.clone(),
            &jo,
            &jm,
        )
        .map_err(SyntaxError::elaborate)?;

        // fill in the generator part of the realization, then composites
        for (o, gname) in generators.cat.objects() {
            let cell = shape.cat.obj_name(j.obj(o)).to_string();
            k_obj
                .entry(cell)
                .or_insert_with(|| ObjExpr::Gen(gname.to_string()));
        }
        for (m, gname) in generators.cat.morphisms() {
            if generators.cat.is_identity(m) {
                continue;
            }
            let img = j.mor(m);
            if shape.cat.is_identity(img) {
                continue;
            }
            let cell = shape.cat.mor_name(img).to_string();
            k_mor
                .entry(cell)
                .or_insert_with(|| MorExpr::Gen(gname.to_string()));
        }
        let k_mor = extend_realization(&shape.cat, &k_mor).map_err(SyntaxError::elaborate)?;

        let mut po = BTreeMap::new();
        let mut pm = BTreeMap::new();
        for (k, v) in image {
            if shape.cat.obj_ix(&k).is_some() {
                po.insert(k, v);
            } else {
                pm.insert(k, v);
            }
        }
        let phi = functor_via_paths(shape.cat.clone(), base.cat.clone(), &po, &pm)
            .map_err(SyntaxError::elaborate)?;

        markings.push(Marking {
            name,
            generators: generators.cat,
            shape: shape.cat,
            j,
            k_obj,
            k_mor,
            phi,
        });
    }
    let sketch = Sketch {
        base: base.cat.clone(),
        markings,
    };
    Ok((base, sketch))
}

fn indent_block(out: &mut String, body: &str) {
    for line in body.lines() {
        out.push_str("    ");
        out.push_str(line);
        out.push('\n');
    }
}

/// Canonical text of a sketch. Every realization cell is listed explicitly,
/// with limit shapes inline.
pub fn serialize_sketch(s: &Sketch) -> String {
    let mut out = String::from("category {\n");
    indent_block(&mut out, &serialize_presentation(&recover_presentation(&s.base)));
    out.push_str("}\n");
    for m in &s.markings {
        out.push_str(&format!("marking {} {{\n", m.name));
        out.push_str("  generators {\n");
        indent_block(
            &mut out,
            &serialize_presentation(&recover_presentation(&m.generators)),
        );
        out.push_str("  }\n  shape {\n");
        indent_block(
            &mut out,
            &serialize_presentation(&recover_presentation(&m.shape)),
        );
        out.push_str("  }\n  embed {");
        let mut first = true;
        for (o, name) in m.generators.objects() {
            if !first {
                out.push(',');
            }
            first = false;
            out.push_str(&format!(
                "\n    {name} -> {}",
                m.shape.obj_name(m.j.obj(o))
            ));
        }
        for (mm, name) in m.generators.morphisms() {
            if m.generators.is_identity(mm) || name.contains('.') {
                continue;
            }
            if !first {
                out.push(',');
            }
            first = false;
            out.push_str(&format!(
                "\n    {name} -> {}",
                m.shape.mor_name(m.j.mor(mm))
            ));
        }
        out.push_str("\n  }\n  realize {");
        first = true;
        for (k, v) in &m.k_obj {
            if !first {
                out.push(',');
            }
            first = false;
            out.push_str(&format!("\n    {k} -> {v}"));
        }
        for (k, v) in &m.k_mor {
            if !first {
                out.push(',');
            }
            first = false;
            out.push_str(&format!("\n    {k} -> {v}"));
        }
        out.push_str("\n  }\n  image {");
        first = true;
        for (o, name) in m.shape.objects() {
            if !first {
                out.push(',');
            }
            first = false;
            out.push_str(&format!(
                "\n    {name} -> {}",
                s.base.obj_name(m.phi.obj(o))
            ));
        }
        for (mm, name) in m.shape.morphisms() {
            if m.shape.is_identity(mm) || name.contains('.') {
                continue;
            }
            if !first {
                out.push(',');
            }
            first = false;
            out.push_str(&format!(
                "\n    {name} -> {}",
                s.base.mor_name(m.phi.mor(mm))
            ));
        }
        out.push_str("\n  }\n}\n");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sketch::validate_sketch;
    use crate::theories::{bool_sketch, pi_sketch, walking_tt};

    #[test]
    fn fixtures_roundtrip_through_the_dsl() {
        for (name, s) in [
            ("walking_tt", walking_tt()),
            ("pi", pi_sketch()),
            ("bool_weak", bool_sketch(false)),
            ("bool_strict", bool_sketch(true)),
        ] {
            let text = serialize_sketch(&s);
            let (_, parsed) = parse_sketch(&text)
                .unwrap_or_else(|e| panic!("{name}: parse failed: {e}"));
            assert_eq!(parsed, s, "{name} does not round-trip");
            validate_sketch(&parsed).unwrap();
            // stable serialization
            assert_eq!(text, serialize_sketch(&parsed), "{name} print unstable");
        }
    }

    #[test]
    fn empty_file_is_a_parse_error() {
        assert!(parse_sketch("").is_err());
        assert!(parse_sketch("// nothing\n").is_err());
    }
}
