// temporary debugging comparison: series triple vs polynomial triple on
// identical fully-known truncated data

mod util;

use dmpva::bracket::{triple_bracket, BracketSpec};
use dmpva::diffop::LaurentTensor;
use dmpva::ncalg::{AlgebraSignature, NCPoly};
use dmpva::rational::*;
use dmpva::scalar::qi;
use dmpva::tensor::TensorElem;
use std::collections::BTreeMap;

#[test]
fn series_triple_matches_polynomial_triple_on_chopped_data() {
    let sig = AlgebraSignature::infinite(&["u"]);
    let u = NCPoly::gen(&sig, 0, 0).unwrap();
    let au_b = u.add(&NCPoly::one(&sig)).unwrap();
    let g = TensorElem::from_polys(&[&au_b, &au_b]).unwrap();
    // h_n = r_n (g • S^n(g^σ)) with r0 = 1, rn = 2 for 1 <= n <= cap
    let cap = 12i64;
    let mut lt = LaurentTensor::zero(&sig, 2, 1);
    let mut entry = SeriesEntry::new(&sig, 0, cap, Tail::Zero, Tail::Zero);
    for n in 0..=cap {
        let c = if n == 0 { qi(1) } else { qi(2) };
        let t = g.bullet(&g.sigma().shift(n)).unwrap().scale(&c);
        lt.add_term(vec![n], t.clone());
        entry.set(n, t);
    }
    let mut h = dmpva::diffop::DiffOpMatrix::zero(&sig, 1);
    h.set_entry(0, 0, lt);
    let pspec = BracketSpec::new(&sig, h).unwrap();
    let exact = triple_bracket(&pspec, &u, &u, &u).unwrap();

    let mut sspec = SeriesBracketSpec::new(&sig);
    sspec.set_series(0, 0, entry);
    let grid = triple_bracket_series(&sspec, &u, &u, &u, (-4, 4)).unwrap();
    assert!(grid.tainted_points().is_empty());
    for x in -4..=4i64 {
        for y in -4..=4i64 {
            let want = exact.coeff(&[x, y]);
            let got = grid
                .nonzero_points()
                .iter()
                .find(|(p, _)| *p == (x, y))
                .map(|(_, t)| (*t).clone())
                .unwrap_or_else(|| TensorElem::zero(&sig, 3));
            assert_eq!(got, want, "mismatch at ({x},{y})");
        }
    }
}
