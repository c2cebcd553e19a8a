//! The algebra format: a carrier category plus, per operation, the object
//! map of the structure functor given input-by-input. The morphism action is
//! derived where a unique natural transformation fits.

use std::collections::BTreeMap;

use crate::fincat::{functor_via_paths, Functor};
use crate::sigalg::{Algebra, AlgError, Signature};

use super::category::{parse_category_body, recover_presentation, serialize_presentation};
use super::{lex, Cursor, PresentedCategory, SyntaxError, Tok};

/// Parsed algebra file: the carrier and raw cell maps per operation.
#[derive(Debug, Clone)]
pub struct AlgebraDoc {
    pub carrier: PresentedCategory,
    /// op name -> list of (input cell map, output cell map)
    pub entries: BTreeMap<String, Vec<(BTreeMap<String, String>, BTreeMap<String, String>)>>,
}

fn parse_cell_map(cur: &mut Cursor) -> Result<BTreeMap<String, String>, SyntaxError> {
    cur.expect(Tok::LBracket)?;
    let mut map = BTreeMap::new();
    if cur.peek() != Some(&Tok::RBracket) {
        loop {
            let k = cur.cell_path()?;
            cur.expect(Tok::Arrow)?;
            let v = cur.cell_path()?;
            map.insert(k, v);
            match cur.peek() {
                Some(Tok::Comma) => {
                    cur.next();
                }
                _ => break,
            }
        }
    }
    cur.expect(Tok::RBracket)?;
    Ok(map)
}

pub fn parse_algebra(text: &str) -> Result<AlgebraDoc, SyntaxError> {
    let mut cur = Cursor::new(lex(text)?);
    cur.keyword("carrier")?;
    cur.expect(Tok::LBrace)?;
    let p = parse_category_body(&mut cur)?;
    cur.expect(Tok::RBrace)?;
    let carrier = PresentedCategory::from_presentation(p)?;
    let mut entries: BTreeMap<String, Vec<(BTreeMap<String, String>, BTreeMap<String, String>)>> =
        BTreeMap::new();
    while !cur.at_end() {
        cur.keyword("nu")?;
        let op = cur.ident()?;
        cur.expect(Tok::LBrace)?;
        let list = entries.entry(op).or_default();
        while cur.peek() == Some(&Tok::LBracket) {
            let input = parse_cell_map(&mut cur)?;
            cur.expect(Tok::FatArrow)?;
            let output = parse_cell_map(&mut cur)?;
            list.push((input, output));
        }
        cur.expect(Tok::RBrace)?;
    }
    Ok(AlgebraDoc { carrier, entries })
}

impl AlgebraDoc {
    /// Elaborates against a signature into a validated algebra.
    pub fn bind(&self, sig: &Signature) -> Result<Algebra, SyntaxError> {
        let carrier = self.carrier.cat.clone();
        let split =
            |cat: &crate::fincat::FinCategory,
             map: &BTreeMap<String, String>|
             -> (BTreeMap<String, String>, BTreeMap<String, String>) {
                let mut objs = BTreeMap::new();
                let mut mors = BTreeMap::new();
                for (k, v) in map {
                    if cat.obj_ix(k).is_some() {
                        objs.insert(k.clone(), v.clone());
                    } else {
                        mors.insert(k.clone(), v.clone());
                    }
                }
                (objs, mors)
            };
        // resolve every entry to a (input functor, output functor) pair
        let mut resolved: BTreeMap<String, Vec<(Functor, Functor)>> = BTreeMap::new();
        for decl in &sig.ops {
            let list = self.entries.get(&decl.name).ok_or_else(|| {
                SyntaxError::elaborate(format!("no `nu {}` block", decl.name))
            })?;
            let mut pairs = Vec::new();
            for (input, output) in list {
                let (iobj, imor) = split(&decl.arity, input);
                let fi = functor_via_paths(decl.arity.clone(), carrier.clone(), &iobj, &imor)
                    .map_err(SyntaxError::elaborate)?;
                let (oobj, omor) = split(&decl.result, output);
                let fo = functor_via_paths(decl.result.clone(), carrier.clone(), &oobj, &omor)
                    .map_err(SyntaxError::elaborate)?;
                pairs.push((fi, fo));
            }
            resolved.insert(decl.name.clone(), pairs);
        }
        Algebra::from_object_maps(sig, &carrier, |decl, f| {
            resolved[&decl.name]
                .iter()
                .find(|(fi, _)| fi.obj_maps() == f.obj_maps() && fi.mor_maps() == f.mor_maps())
                .map(|(_, fo)| fo.clone())
                .ok_or_else(|| {
                    AlgError::IllFormedTerm(format!(
                        "no `nu {}` entry matches an input diagram",
                        decl.name
                    ))
                })
        })
        .map_err(SyntaxError::elaborate)
    }
}

/// Canonical text for an algebra: the carrier, then per operation one line
/// per input functor, with cells listed on objects and generating arrows.
pub fn serialize_algebra(sig: &Signature, alg: &Algebra) -> String {
    let carrier_p = recover_presentation(&alg.carrier);
    let mut out = String::from("carrier {\n");
    for line in serialize_presentation(&carrier_p).lines() {
        out.push_str(&format!("  {line}\n"));
    }
    out.push_str("}\n");
    let gen_cells = |cat: &crate::fincat::FinCategory, f: &Functor| -> String {
        let mut parts = Vec::new();
        for (o, name) in cat.objects() {
            parts.push(format!("{name} -> {}", alg.carrier.obj_name(f.obj(o))));
        }
        for (m, name) in cat.morphisms() {
            if cat.is_identity(m) || name.contains('.') {
                continue;
            }
            parts.push(format!("{name} -> {}", alg.carrier.mor_name(f.mor(m))));
        }
        format!("[{}]", parts.join(", "))
    };
    for decl in sig.ops.iter() {
        let Some(st) = alg.ops.get(&decl.name) else {
            continue;
        };
        out.push_str(&format!("nu {} {{\n", decl.name));
        for (k, f) in st.arity_fc.functors.iter().enumerate() {
            let img = st
                .result_fc
                .functor_at_obj(st.nu.obj(st.arity_fc.functor_obj(k)));
            out.push_str(&format!(
                "  {} => {}\n",
                gen_cells(&decl.arity, f),
                gen_cells(&decl.result, img)
            ));
        }
        out.push_str("}\n");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fincat::shapes;
    use crate::sigalg::{lex_algebra, lex_signature, satisfies, Enrichment};
    use std::sync::Arc;

    #[test]
    fn divisor_algebra_roundtrips_and_satisfies() {
        let (sig, eqs) = lex_signature(Enrichment::Cat);
        let carrier = Arc::new(shapes::divisor_poset(6));
        let alg = lex_algebra(&sig, &carrier).unwrap().unwrap();
        let text = serialize_algebra(&sig, &alg);
        let doc = parse_algebra(&text).unwrap();
        let again = doc.bind(&sig).unwrap();
        assert_eq!(again.carrier, carrier);
        assert!(satisfies(&again, &sig, &eqs).unwrap().passed());
        assert_eq!(text, serialize_algebra(&sig, &again));
    }
}
