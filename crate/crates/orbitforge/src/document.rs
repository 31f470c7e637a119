//! Versioned JSON documents. Scalars are strings in the scalar grammar
//! (`"3/2-1/4*i"`), matrices are row-major arrays of such strings.

use serde::{Deserialize, Serialize};

use crate::affine::{AffineElement, EmbeddingContext};
use crate::distinguished::{ClassificationResult, Closure, Triple};
use crate::error::Error;
use crate::labels::render_types;
use crate::linalg::{Matrix, Subspace, Vector};
use crate::scalars::C;
use crate::structured::{AntiLinearMap, Family, Form, StructuredSpace};
use crate::types::Pair;

pub const FORMAT_VERSION: &str = "orbitforge/1";

pub type MatrixDoc = Vec<Vec<String>>;
pub type VectorDoc = Vec<String>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub version: String,
    pub payload: Payload,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Payload {
    Triple(TripleDoc),
    Pair(PairDoc),
    Label { label: String },
    Result(ResultDoc),
    AffineElement(AffineDoc),
    Matrix { matrix: MatrixDoc },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpaceDoc {
    pub family: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<MatrixDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub form: Option<MatrixDoc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairDoc {
    pub space: SpaceDoc,
    pub y: MatrixDoc,
    /// Basis vectors of the carrier; the whole space when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub carrier: Option<Vec<VectorDoc>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TripleDoc {
    #[serde(flatten)]
    pub pair: PairDoc,
    pub v0: VectorDoc,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResidualDoc {
    pub dim: usize,
    /// Lowest degree first.
    pub charpoly: VectorDoc,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResultDoc {
    pub core: String,
    pub residual: Vec<String>,
    pub parameter: String,
    pub closure: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v0_eigenvalue: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unclassified_residual: Option<ResidualDoc>,
    pub witness: MatrixDoc,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AffineDoc {
    pub family: String,
    pub n: usize,
    pub p: usize,
    pub linear: MatrixDoc,
    pub translation: VectorDoc,
}

pub fn matrix_doc(m: &Matrix) -> MatrixDoc {
    (0..m.rows()).map(|i| vector_doc(&m.row(i))).collect()
}

pub fn vector_doc(v: &[C]) -> VectorDoc {
    v.iter().map(|x| x.to_string()).collect()
}

pub fn parse_vector(v: &[String]) -> Result<Vector, Error> {
    v.iter().map(|s| s.parse::<C>()).collect()
}

pub fn parse_matrix(m: &MatrixDoc) -> Result<Matrix, Error> {
    let rows: Vec<Vector> = m.iter().map(|r| parse_vector(r)).collect::<Result<_, _>>()?;
    if rows.iter().any(|r| r.len() != rows.first().map_or(0, |f| f.len())) {
        return Err(Error::Parse("ragged matrix".into()));
    }
    Ok(Matrix::from_rows(rows))
}

impl SpaceDoc {
    pub fn from_space(s: &StructuredSpace) -> Self {
        SpaceDoc {
            family: s.family.to_string(),
            sigma: s.sigma.as_ref().map(|x| matrix_doc(&x.matrix)),
            form: s.form.as_ref().map(|f| matrix_doc(&f.matrix)),
        }
    }

    pub fn to_space(&self) -> Result<StructuredSpace, Error> {
        let family: Family = self.family.parse()?;
        let sigma = match (&self.sigma, family.sigma_sign()) {
            (Some(m), Some(sign)) => Some(AntiLinearMap::new(parse_matrix(m)?, sign)?),
            (None, None) => None,
            _ => return Err(Error::Malformed(format!("{family}: anti-linear map present/absent mismatch"))),
        };
        let form = match (&self.form, family.form_kind()) {
            (Some(m), Some(kind)) => Some(Form::new(parse_matrix(m)?, kind)?),
            (None, None) => None,
            _ => return Err(Error::Malformed(format!("{family}: form present/absent mismatch"))),
        };
        StructuredSpace::new(family, form, sigma)
    }
}

impl PairDoc {
    pub fn from_pair(p: &Pair) -> Self {
        let n = p.space.dim();
        let carrier = (p.carrier.dim() != n).then(|| p.carrier.basis().iter().map(|v| vector_doc(v)).collect());
        PairDoc { space: SpaceDoc::from_space(&p.space), y: matrix_doc(&p.y), carrier }
    }

    pub fn to_pair(&self) -> Result<Pair, Error> {
        let space = self.space.to_space()?;
        let y = parse_matrix(&self.y)?;
        let n = space.dim();
        if y.rows() != n || y.cols() != n {
            return Err(Error::DimensionMismatch(format!("Y must be {n}×{n}")));
        }
        let carrier = match &self.carrier {
            None => Subspace::full(n),
            Some(vs) => {
                let vs: Vec<Vector> = vs.iter().map(|v| parse_vector(v)).collect::<Result<_, _>>()?;
                if vs.iter().any(|v| v.len() != n) {
                    return Err(Error::DimensionMismatch("carrier vector of the wrong length".into()));
                }
                Subspace::span(n, &vs)
            }
        };
        Pair::new(space, y, carrier)
    }
}

impl TripleDoc {
    pub fn from_triple(t: &Triple) -> Self {
        TripleDoc { pair: PairDoc::from_pair(&t.pair), v0: vector_doc(&t.v0) }
    }

    pub fn to_triple(&self) -> Result<Triple, Error> {
        Triple::new(self.pair.to_pair()?, parse_vector(&self.v0)?)
    }
}

impl ResultDoc {
    pub fn from_result(r: &ClassificationResult) -> Self {
        ResultDoc {
            core: r.core.to_string(),
            residual: r.residual_types.iter().map(|l| render_types(std::slice::from_ref(l))).collect(),
            parameter: r.parameters.representative.to_string(),
            closure: match r.parameters.closure {
                Closure::Singleton => "singleton".into(),
                Closure::RealScaleClass => "real-scale-class".into(),
            },
            v0_eigenvalue: r.v0_eigenvalue.as_ref().map(|e| e.to_string()),
            unclassified_residual: r
                .unclassified_residual
                .as_ref()
                .map(|u| ResidualDoc { dim: u.dim, charpoly: vector_doc(&u.charpoly) }),
            witness: matrix_doc(&r.witness),
        }
    }
}

impl AffineDoc {
    pub fn from_element(ctx: &EmbeddingContext, a: &AffineElement) -> Self {
        AffineDoc {
            family: ctx.family.to_string(),
            n: ctx.n,
            p: ctx.p,
            linear: matrix_doc(&a.linear),
            translation: vector_doc(&a.translation),
        }
    }

    pub fn to_element(&self) -> Result<AffineElement, Error> {
        Ok(AffineElement { linear: parse_matrix(&self.linear)?, translation: parse_vector(&self.translation)? })
    }
}

impl Document {
    pub fn new(payload: Payload) -> Self {
        Document { version: FORMAT_VERSION.to_string(), payload }
    }

    pub fn parse(text: &str) -> Result<Self, Error> {
        let doc: Document = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if doc.version != FORMAT_VERSION {
            return Err(Error::Parse(format!("unsupported version {:?}", doc.version)));
        }
        Ok(doc)
    }

    pub fn render(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("documents serialize");
        s.push('\n');
        s
    }

    pub fn triple(&self) -> Result<Triple, Error> {
        match &self.payload {
            Payload::Triple(t) => t.to_triple(),
            _ => Err(Error::Parse("expected a triple document".into())),
        }
    }

    pub fn matrix(&self) -> Result<Matrix, Error> {
        match &self.payload {
            Payload::Matrix { matrix } => parse_matrix(matrix),
            _ => Err(Error::Parse("expected a matrix document".into())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distinguished::{classify, synthesize_distinguished, DistinguishedLabel};
    use crate::scalars::{rat, strategies::gaussian};
    use crate::types::{synthesize_type, Kind, TypeLabel};
    use num_traits::Zero;
    use proptest::prelude::*;

    fn doc_round_trip(d: &Document) {
        assert_eq!(&Document::parse(&d.render()).unwrap(), d);
    }

    #[test]
    fn triples_and_results() {
        let l = DistinguishedLabel::new(Family::SpPlus, 1, Kind::Single, Some(1), Some(rat(2))).unwrap();
        let t = synthesize_distinguished(&l, &[TypeLabel::new(Family::SpPlus, 0, None).unwrap()]).unwrap();
        let d = Document::new(Payload::Triple(TripleDoc::from_triple(&t)));
        doc_round_trip(&d);
        assert_eq!(Document::parse(&d.render()).unwrap().triple().unwrap(), t);
        let r = Document::new(Payload::Result(ResultDoc::from_result(&classify(&t).unwrap())));
        doc_round_trip(&r);
        assert!(r.render().contains("\"core\": \"sp+:uD[eps=+1,h=1,mod=2](0)\""));
        let p = synthesize_type(&TypeLabel::new(Family::GlMinus, 1, None).unwrap()).unwrap();
        let pd = PairDoc::from_pair(&p);
        assert_eq!(pd.to_pair().unwrap(), p);
        doc_round_trip(&Document::new(Payload::Pair(pd)));
        doc_round_trip(&Document::new(Payload::Label { label: l.to_string() }));
    }

    #[test]
    fn malformed() {
        assert!(matches!(Document::parse("{\"version\": \"orbitforge/1\", \"payl"), Err(Error::Parse(_))));
        assert!(matches!(Document::parse("{\"version\": \"x\", \"payload\": {\"kind\": \"label\", \"label\": \"\"}}"), Err(Error::Parse(_))));
        let bad = PairDoc {
            space: SpaceDoc { family: "o+".into(), sigma: Some(vec![vec!["1".into()]]), form: None },
            y: vec![vec!["0".into()]],
            carrier: None,
        };
        assert!(matches!(bad.to_pair(), Err(Error::Malformed(_))));
    }

    proptest! {
        #[test]
        fn matrix_documents(entries in proptest::collection::vec(gaussian(), 1..10), cols in 1usize..4) {
            let rows = entries.len().div_ceil(cols);
            let mut e = entries.clone();
            e.resize(rows * cols, C::zero());
            let m = Matrix::from_rows(e.chunks(cols).map(|c| c.to_vec()).collect());
            let d = Document::new(Payload::Matrix { matrix: matrix_doc(&m) });
            let back = Document::parse(&d.render()).unwrap();
            prop_assert_eq!(&back, &d);
            prop_assert_eq!(back.matrix().unwrap(), m);
        }
    }
}
