use bscnoma::designs::*;

#[test]
fn every_admissible_pair_up_to_twelve() {
    let mut checked = 0;
    for w in 1..=12 {
        for v in 1..=8 {
            for hooked in [false, true] {
                if !admissible(w, v, hooked) {
                    continue;
                }
                let seq = langford_sequence(w, v, hooked).unwrap();
                assert!(verify_langford(&seq), "{seq}");
                let triples = triples_from_sequence(&seq);
                let mut values: Vec<usize> = triples.iter().flat_map(|t| [t.x, t.y, t.z]).collect();
                values.sort_unstable();
                assert_eq!(values, expected_triple_values(w, v, hooked), "w={w} v={v} hooked={hooked}");
                assert!(triples.iter().all(|t| t.x + t.y == t.z));
                let d = cbsec_from_triples(&triples, modulus_for(w, v), v - 1).unwrap();
                assert!(verify_cbsec(&d));
                checked += 1;
            }
        }
    }
    assert!(checked > 20);
}
