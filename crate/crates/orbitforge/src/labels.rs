//! Textual label grammar.
//!
//! ```text
//! types         := family ":" term ("+" term)*
//! term          := [count "*"] "D[" fields "]" args
//! distinguished := family ":" "uD[" fields "]" args ("+" term)*
//!                | "core=" distinguished [";" "residual=" types]
//! fields        := key "=" value ("," key "=" value)*     keys: eps, h, mod
//! args          := "(0)" | "(0,0)"
//! ```
//!
//! For σ₋ cores a missing sign defaults to `+1` and a missing modulus to `1`.

use crate::distinguished::{core_shape, DistinguishedLabel};
use crate::error::Error;
use crate::scalars::{parse_rational, rat, Rational};
use crate::structured::Family;
use crate::types::{type_shape, Kind, TypeLabel};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LabelSpec {
    Types(Vec<TypeLabel>),
    Distinguished(DistinguishedLabel, Vec<TypeLabel>),
}

fn parse_err(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

/// Split on `sep` outside brackets and parentheses.
fn split_top(s: &str, sep: char) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '[' | '(' => depth += 1,
            ']' | ')' => depth -= 1,
            c if c == sep && depth == 0 => {
                out.push(&s[start..i]);
                start = i + c.len_utf8();
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out
}

fn split_family(s: &str) -> Result<(Family, &str), Error> {
    let (fam, rest) = s.trim().split_once(':').ok_or_else(|| parse_err(format!("missing family prefix in {s:?}")))?;
    Ok((fam.trim().parse()?, rest.trim()))
}

struct Term {
    distinguished: bool,
    multiplicity: usize,
    eps: Option<i8>,
    h: usize,
    modulus: Option<Rational>,
    kind: Kind,
}

fn parse_term(t: &str) -> Result<Term, Error> {
    let t = t.trim();
    let (multiplicity, body) = match t.split_once('*') {
        Some((k, b)) => (k.trim().parse::<usize>().map_err(|_| parse_err(format!("bad count in {t:?}")))?, b.trim()),
        None => (1, t),
    };
    if multiplicity == 0 {
        return Err(parse_err("multiplicity must be positive"));
    }
    let (distinguished, body) = if let Some(b) = body.strip_prefix("uD[") {
        (true, b)
    } else if let Some(b) = body.strip_prefix("D[") {
        (false, b)
    } else {
        return Err(parse_err(format!("term {t:?} does not start with D[ or uD[")));
    };
    let (fields, args) = body.split_once(']').ok_or_else(|| parse_err(format!("unclosed [ in {t:?}")))?;
    let kind = match args.replace(' ', "").as_str() {
        "(0)" => Kind::Single,
        "(0,0)" => Kind::Double,
        a => return Err(parse_err(format!("bad eigenvalue arguments {a:?}"))),
    };
    let (mut eps, mut h, mut modulus) = (None, None, None);
    for f in fields.split(',').map(str::trim).filter(|f| !f.is_empty()) {
        let (k, v) = f.split_once('=').ok_or_else(|| parse_err(format!("bad field {f:?}")))?;
        match k.trim() {
            "eps" => {
                eps = Some(match v.trim() {
                    "+1" | "1" | "+" => 1,
                    "-1" | "-" => -1,
                    x => return Err(parse_err(format!("bad sign {x:?}"))),
                })
            }
            "h" => h = Some(v.trim().parse::<usize>().map_err(|_| parse_err(format!("bad height {v:?}")))?),
            "mod" => modulus = Some(parse_rational(v.trim())?),
            k => return Err(parse_err(format!("unknown field {k:?}"))),
        }
    }
    let h = h.ok_or_else(|| parse_err(format!("missing h in {t:?}")))?;
    Ok(Term { distinguished, multiplicity, eps, h, modulus, kind })
}

fn type_from_term(family: Family, t: Term) -> Result<TypeLabel, Error> {
    if t.distinguished {
        return Err(parse_err("a uD term can only be the core"));
    }
    if t.modulus.is_some() {
        return Err(Error::InvalidLabel("types carry no modulus".into()));
    }
    let l = TypeLabel::new(family, t.h, t.eps)?.times(t.multiplicity);
    if type_shape(family, t.h).0 != t.kind {
        return Err(Error::InvalidLabel(format!("{l} has a different number of eigenvalue arguments")));
    }
    Ok(l)
}

fn core_from_term(family: Family, t: Term) -> Result<DistinguishedLabel, Error> {
    if !t.distinguished || t.multiplicity != 1 {
        return Err(parse_err("the core must be a single uD term"));
    }
    let (mut eps, mut modulus) = (t.eps, t.modulus);
    if let Some((has_eps, has_mod)) = core_shape(family, t.h, t.kind) {
        if has_eps && eps.is_none() && family.sigma_sign() == Some(-1) {
            eps = Some(1);
        }
        if has_mod && modulus.is_none() {
            modulus = Some(rat(1));
        }
    }
    DistinguishedLabel::new(family, t.h, t.kind, eps, modulus)
}

pub fn parse_type_labels(s: &str) -> Result<Vec<TypeLabel>, Error> {
    let (family, rest) = split_family(s)?;
    if rest.is_empty() {
        return Ok(Vec::new());
    }
    split_top(rest, '+').into_iter().map(|t| type_from_term(family, parse_term(t)?)).collect()
}

pub fn parse_distinguished(s: &str) -> Result<(DistinguishedLabel, Vec<TypeLabel>), Error> {
    let s = s.trim();
    if let Some(rest) = s.strip_prefix("core=") {
        let parts: Vec<&str> = rest.splitn(2, ';').collect();
        let (core, mut residual) = parse_distinguished(parts[0])?;
        if let Some(r) = parts.get(1) {
            let r = r.trim().strip_prefix("residual=").ok_or_else(|| parse_err("expected residual="))?;
            if !r.trim().is_empty() {
                let more = parse_type_labels(r)?;
                if more.iter().any(|l| l.family != core.family) {
                    return Err(Error::InvalidLabel("residual family differs from the core".into()));
                }
                residual.extend(more);
            }
        }
        return Ok((core, residual));
    }
    let (family, rest) = split_family(s)?;
    let mut terms = split_top(rest, '+').into_iter();
    let core = core_from_term(family, parse_term(terms.next().unwrap_or(""))?)?;
    let residual = terms.map(|t| type_from_term(family, parse_term(t)?)).collect::<Result<_, _>>()?;
    Ok((core, residual))
}

pub fn parse_label(s: &str) -> Result<LabelSpec, Error> {
    let s = s.trim();
    if s.starts_with("core=") || s.contains(":uD[") {
        let (c, r) = parse_distinguished(s)?;
        Ok(LabelSpec::Distinguished(c, r))
    } else {
        Ok(LabelSpec::Types(parse_type_labels(s)?))
    }
}

pub fn render_types(labels: &[TypeLabel]) -> String {
    match labels.first() {
        None => String::new(),
        Some(first) => {
            let terms: Vec<String> = labels.iter().map(|l| l.term()).collect();
            format!("{}:{}", first.family, terms.join("+"))
        }
    }
}

pub fn render_distinguished(core: &DistinguishedLabel, residual: &[TypeLabel]) -> String {
    if residual.is_empty() {
        format!("core={core}")
    } else {
        format!("core={core}; residual={}", render_types(residual))
    }
}

pub fn render_label(spec: &LabelSpec) -> String {
    match spec {
        LabelSpec::Types(t) => render_types(t),
        LabelSpec::Distinguished(c, r) => render_distinguished(c, r),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distinguished::all_core_labels;
    use crate::scalars::ratio;
    use crate::types::all_type_labels;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        let l = parse_type_labels("o+:D[eps=+1,h=2](0)").unwrap();
        assert_eq!(l, vec![TypeLabel::new(Family::OPlus, 2, Some(1)).unwrap()]);
        let l = parse_type_labels("gl*:D[eps=+1,h=3](0)+D[eps=-1,h=3](0)").unwrap();
        assert_eq!(l.len(), 2);
        let l = parse_type_labels("gl+:3*D[h=0](0)").unwrap();
        assert_eq!(l[0].multiplicity, 3);
        assert_eq!(render_types(&l), "gl+:3*D[h=0](0)");
        let (c, r) = parse_distinguished("core=o+:uD[eps=+1,h=2,mod=2](0); residual=o+:D[eps=-1,h=2](0)").unwrap();
        assert_eq!(c.modulus, Some(rat(2)));
        assert_eq!(r, vec![TypeLabel::new(Family::OPlus, 2, Some(-1)).unwrap()]);
        let (c, _) = parse_distinguished("o-:uD[eps=+1,h=1](0,0)").unwrap();
        assert_eq!(c.modulus, Some(rat(1)));
        let (c, _) = parse_distinguished("sp-:uD[h=2](0,0)").unwrap();
        assert_eq!(c.eps, Some(1));
    }

    #[test]
    fn errors() {
        assert!(matches!(parse_type_labels("D[h=1](0)"), Err(Error::Parse(_))));
        assert!(matches!(parse_type_labels("o+:D[h=1](0"), Err(Error::Parse(_))));
        assert!(matches!(parse_type_labels("xx:D[h=1](0)"), Err(Error::Parse(_))));
        assert!(matches!(parse_distinguished("o+:uD[eps=+1,h=1](0)"), Err(Error::InvalidLabel(_))));
        assert!(matches!(parse_type_labels("o+:D[eps=+1,h=2](0,0)"), Err(Error::InvalidLabel(_))));
        assert!(matches!(parse_distinguished("o+:uD[eps=+1,h=2,mod=-1](0)"), Err(Error::InvalidLabel(_))));
        assert!(matches!(parse_label("o+:D[eps=+1,h=2,foo=1](0)"), Err(Error::Parse(_))));
    }

    #[test]
    fn render_parse_all_rows() {
        for f in Family::ALL {
            for l in all_type_labels(f, 6) {
                assert_eq!(parse_type_labels(&l.to_string()).unwrap(), vec![l.clone()]);
            }
            for c in all_core_labels(f, 5, &[ratio(1, 2), rat(3)]) {
                let s = render_distinguished(&c, &[]);
                assert_eq!(parse_distinguished(&s).unwrap(), (c.clone(), vec![]));
                assert_eq!(parse_distinguished(&c.to_string()).unwrap().0, c);
            }
        }
    }

    proptest! {
        #[test]
        fn round_trip(fi in 0usize..7, picks in proptest::collection::vec((0usize..40, 1usize..4), 0..4), ci in 0usize..40) {
            let f = Family::ALL[fi];
            let types = all_type_labels(f, 4);
            let residual: Vec<TypeLabel> = picks.iter().map(|&(i, k)| types[i % types.len()].clone().times(k)).collect();
            let cores = all_core_labels(f, 4, &[ratio(2, 3)]);
            let core = cores[ci % cores.len()].clone();
            let spec = LabelSpec::Distinguished(core, residual.clone());
            prop_assert_eq!(parse_label(&render_label(&spec)).unwrap(), spec);
            if !residual.is_empty() {
                let t = LabelSpec::Types(residual);
                prop_assert_eq!(parse_label(&render_label(&t)).unwrap(), t);
            }
        }
    }
}
