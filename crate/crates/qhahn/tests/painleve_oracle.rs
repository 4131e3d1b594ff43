use qhahn::ensemble::{gap_bruteforce_all, gap_direct_all, EnsembleSpec};
use qhahn::painleve::{reconstruct_gaps, seeds};
use qhahn::Ctx;

#[test]
fn recurrence_matches_determinants() {
    let ctx = Ctx::new(512).unwrap();
    let p = EnsembleSpec::new("0.7", 12, 3, "0.5", "0.5")
        .at(ctx)
        .unwrap();
    let d = gap_direct_all(&p).unwrap();
    let r = reconstruct_gaps(&p).unwrap();
    for s in p.k..=p.n + 1 {
        let e = d[s].rel_diff(r.get(s)).to_f64();
        println!("{s} {e:e}");
        assert!(e < 1e-20);
    }
}

#[test]
fn seeds_match_bruteforce() {
    let ctx = Ctx::new(256).unwrap();
    let p = EnsembleSpec::new("0.5", 6, 2, "0.5", "0.5")
        .at(ctx)
        .unwrap();
    let b = gap_bruteforce_all(&p).unwrap();
    let (d0, d1) = seeds(&p).unwrap();
    assert!(d0.rel_diff(&b[2]).to_f64() < 1e-30);
    assert!(d1.rel_diff(&b[3]).to_f64() < 1e-30);
}
