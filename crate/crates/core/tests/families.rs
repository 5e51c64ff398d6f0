use ddrec::families::{build_exponent, default_families, family, validate_nonnegativity};
use ddrec::oracle::{count_partitions, total, PartitionConstraint};
use ddrec::Rational;
use num_traits::One;

#[test]
fn closed_form_matches_catalog() {
    let cases = [
        family("whitney", &[("m", 3), ("c", 2)]).unwrap(),
        family("dowling", &[("m", 2)]).unwrap(),
        family("sheffer", &[("d", 3), ("a", 1)]).unwrap(),
        family("type_b", &[("m", 2), ("c", 1)]).unwrap(),
        family("assoc_stirling", &[("s", 2)]).unwrap(),
        family("r_whitney_assoc", &[("m", 2), ("r", 1), ("s", 2)]).unwrap(),
    ];
    for fam in &cases {
        let derived = build_exponent(&fam.spec).unwrap();
        assert_eq!(
            derived.exponent_series(20),
            fam.saddle.exponent_series(20),
            "{}",
            fam.invocation()
        );
    }
}

#[test]
fn default_triangles_are_nonnegative() {
    for fam in default_families() {
        let report = validate_nonnegativity(&fam.spec.triangle(40).unwrap());
        assert!(report.is_nonnegative(), "{}: {:?}", fam.invocation(), report.first_negative);
    }
}

#[test]
fn dowling_row_sums_are_enumerated_totals() {
    let fam = family("dowling", &[("m", 3)]).unwrap();
    let rows = fam.spec.triangle(7).unwrap();
    for row in rows {
        let c = PartitionConstraint::new(row.n, 1, 3, 1).unwrap();
        let counted = total(&count_partitions(&c).unwrap());
        assert_eq!(row.sum(), Rational::from_integer(counted.into()));
    }
}

#[test]
fn egf_at_one_gives_row_sums() {
    for fam in default_families() {
        let series = fam.egf_series(25).unwrap().eval_x(&Rational::one());
        let polys = fam.spec.generate(fam.spec.start_index() + 25).unwrap();
        for (j, p) in polys.iter().enumerate() {
            assert_eq!(series.egf_term(j).coeff(0), p.eval(&Rational::one()), "{}", fam.invocation());
        }
    }
}
