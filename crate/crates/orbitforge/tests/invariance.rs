use orbitforge::affine::build_context;
use orbitforge::distinguished::{all_core_labels, classify, random_group_element, synthesize_distinguished};
use orbitforge::document::{AffineDoc, Document, PairDoc, Payload, ResultDoc};
use orbitforge::labels::{parse_label, render_types, LabelSpec};
use orbitforge::linalg::Matrix;
use orbitforge::scalars::rat;
use orbitforge::structured::Family;
use orbitforge::types::{all_type_labels, collect_labels, decompose_nilpotent_pair, synthesize_type, Pair};
use proptest::prelude::*;

fn family() -> impl Strategy<Value = Family> {
    (0..Family::ALL.len()).prop_map(|i| Family::ALL[i])
}

fn types_pair(f: Family, picks: &[usize]) -> (Pair, Vec<orbitforge::types::TypeLabel>) {
    let all = all_type_labels(f, 3);
    let labels: Vec<_> = picks.iter().map(|&i| all[i % all.len()].clone()).collect();
    let parts: Vec<Pair> = labels.iter().map(|l| synthesize_type(l).unwrap()).collect();
    (Pair::direct_sum(&parts).unwrap(), labels)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn type_labels_survive_group_conjugation(f in family(), picks in proptest::collection::vec(0usize..8, 1..3), seed in 0u64..1000) {
        let (p, labels) = types_pair(f, &picks);
        let g = random_group_element(&p.space, &[], seed).unwrap();
        let y = &(&g * &p.y) * &g.inverse().unwrap();
        let q = Pair::full(p.space.clone(), y).unwrap();
        prop_assert_eq!(decompose_nilpotent_pair(&q).unwrap().labels, collect_labels(labels));
    }

    #[test]
    fn label_documents(f in family(), picks in proptest::collection::vec(0usize..8, 1..4)) {
        let (p, labels) = types_pair(f, &picks);
        let text = render_types(&collect_labels(labels.clone()));
        prop_assert_eq!(parse_label(&text).unwrap(), LabelSpec::Types(collect_labels(labels)));
        let d = Document::new(Payload::Pair(PairDoc::from_pair(&p)));
        let back = Document::parse(&d.render()).unwrap();
        prop_assert_eq!(&back, &d);
        let Payload::Pair(pd) = back.payload else { unreachable!() };
        prop_assert_eq!(pd.to_pair().unwrap(), p);
    }

    #[test]
    fn result_documents(f in family(), k in 0usize..20) {
        let cores = all_core_labels(f, 3, &[rat(2)]);
        let l = &cores[k % cores.len()];
        let r = classify(&synthesize_distinguished(l, &[]).unwrap()).unwrap();
        let d = Document::new(Payload::Result(ResultDoc::from_result(&r)));
        prop_assert_eq!(Document::parse(&d.render()).unwrap(), d);
    }

    #[test]
    fn affine_documents(k in 0usize..6, seed in 0u64..50) {
        let f = [Family::GlPlus, Family::OPlus, Family::SpPlus, Family::GlMinus, Family::OMinus, Family::SpMinus][k];
        let c = build_context(f, 2, 0).unwrap();
        let a = c.random_element(seed).unwrap();
        let d = Document::new(Payload::AffineElement(AffineDoc::from_element(&c, &a)));
        let back = Document::parse(&d.render()).unwrap();
        let Payload::AffineElement(ad) = back.payload else { unreachable!() };
        prop_assert_eq!(ad.to_element().unwrap(), a);
    }
}

#[test]
fn group_elements_are_not_trivial() {
    let (p, _) = types_pair(Family::OPlus, &[2, 3]);
    let g = random_group_element(&p.space, &[], 4).unwrap();
    assert_ne!(g, Matrix::identity(p.space.dim()));
}
