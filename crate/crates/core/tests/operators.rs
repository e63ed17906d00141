use oddbraid::algebra::{ExpSum, Scalar, SparseMatrix};
use oddbraid::braid::{
    build_braid, build_braid_custom, mismatched_pair_coefficients, random_params,
};
use oddbraid::operators::{
    build_lplus, build_transfer, build_x_basis, coproduct, extract_block, verify_block_law,
    verify_flip_duality, verify_lminus_degeneracy, verify_lminus_degeneracy_with, verify_rll,
    verify_theta_factorization, verify_traceless_decomposition, verify_transfer_exchange,
    verify_unit_value, verify_x_algebra, verify_x_closure, x_coordinates, x_product_rule, XLabel,
};
use oddbraid::projectors::{build_diagonalizer, build_flip, conjugate};
use oddbraid::{Error, OddDim, Sign};

fn dim(n: usize) -> OddDim {
    OddDim::new(n).unwrap()
}

#[test]
fn fundamental_operators_follow_from_the_braid_matrix() {
    for n in [3, 5, 7] {
        let r = build_braid(&random_params(dim(n), 1, true).unwrap());
        let (l, t) = (build_lplus(&r), build_transfer(&r));
        for report in [
            verify_flip_duality(&l, &t),
            verify_block_law(&r, &l),
            verify_unit_value(&l),
            verify_unit_value(&t),
        ] {
            assert!(report.pass, "N={n}: {report}");
        }
    }
}

#[test]
fn blocks_read_off_by_hand() {
    // L_ab = D(a,b)E_ba + A(a,b̄)E_b̄ā, with D and A the diagonal and
    // antidiagonal entries of R̂ at slot (a,b).
    let d = dim(5);
    let r = build_braid(&random_params(d, 6, true).unwrap());
    let l = build_lplus(&r);
    let size = d.size();
    for a in 1..=5 {
        for b in 1..=5 {
            let k = d.index(a, b);
            let mut want = SparseMatrix::zeros(5, 5, 1);
            let diag = r.matrix().entry(k, k);
            let anti = r.matrix().entry(k, size - 1 - k);
            if !diag.is_zero() {
                want.add_at(b - 1, a - 1, &diag).unwrap();
            }
            // The centre slot is its own antidiagonal partner.
            if !anti.is_zero() && k != size - 1 - k {
                want.add_at(d.bar(b) - 1, d.bar(a) - 1, &anti).unwrap();
            }
            assert_eq!(extract_block(&l, a, b).unwrap(), want, "L_{a}{b}");
        }
    }
    assert!(matches!(
        extract_block(&l, 0, 1),
        Err(Error::IndexOutOfRange(_))
    ));
    assert!(matches!(
        extract_block(&l, 1, 6),
        Err(Error::IndexOutOfRange(_))
    ));
}

#[test]
fn corrupted_transfer_breaks_duality() {
    let r = build_braid(&random_params(dim(3), 2, true).unwrap());
    let l = build_lplus(&r);
    let t = build_transfer(&r);
    let bad = t.with_matrix(l.matrix().clone()).unwrap();
    assert!(!verify_flip_duality(&l, &bad).pass);
}

#[test]
fn conjugated_operators_are_single_exponentials() {
    for n in [3, 5] {
        let d = dim(n);
        let params = random_params(d, 3, true).unwrap();
        let r = build_braid(&params);
        let m = build_diagonalizer(d);
        for op in [build_lplus(&r), build_transfer(&r)] {
            let report = verify_theta_factorization(&op, &params, &m);
            assert!(report.pass, "N={n} {}: {report}", op.kind());
            let c = conjugate(&m, op.matrix()).unwrap();
            assert!(c.entries().all(|(_, _, v)| v.is_monomial()));
        }
    }
}

#[test]
fn factorization_rejects_the_wrong_parameters() {
    let d = dim(5);
    let r = build_braid(&random_params(d, 3, true).unwrap());
    let other = random_params(d, 4, true).unwrap();
    let report = verify_theta_factorization(&build_lplus(&r), &other, &build_diagonalizer(d));
    assert!(!report.pass);
}

#[test]
fn x_algebra_matches_the_product_table() {
    for n in [3, 5] {
        let basis = build_x_basis(dim(n));
        assert_eq!(basis.len(), n * n);
        for report in [
            verify_x_algebra(&basis),
            verify_x_closure(&basis),
            verify_traceless_decomposition(&basis),
        ] {
            assert!(report.pass, "N={n}: {report}");
        }
    }
}

#[test]
fn x_products_worked_by_hand() {
    let d = dim(3);
    let basis = build_x_basis(d);
    let (plus, minus) = (Sign::Plus, Sign::Minus);
    let pi = |eps| XLabel::Pi { i: 1, eps };
    let ip = |eps| XLabel::Ip { i: 1, eps };
    // (E_pi + εE_pī)(E_ip + εE_īp) = 2E_pp, and 0 for opposite signs.
    let prod = &basis[&pi(plus)] * &basis[&ip(plus)];
    assert_eq!(prod, basis[&XLabel::Pp].scale(&Scalar::from_int(2)));
    assert!((&basis[&pi(plus)] * &basis[&ip(minus)]).is_zero());
    assert_eq!(
        x_product_rule(pi(plus), ip(plus)),
        Some(vec![(Scalar::from_int(2), XLabel::Pp)])
    );
    // E_pp·E_pp = E_pp.
    let pp = &basis[&XLabel::Pp];
    assert_eq!(&(pp * pp), pp);
}

#[test]
fn x_coordinates_reconstruct_matrices() {
    let d = dim(5);
    let basis = build_x_basis(d);
    let mut target = SparseMatrix::zeros(5, 5, 0);
    for (k, (_, x)) in basis.iter().enumerate() {
        target = &target + &x.scale(&Scalar::from_ratio(k as i64 - 7, 3));
    }
    let coords = x_coordinates(d, &target).unwrap();
    let rebuilt = coords
        .iter()
        .fold(SparseMatrix::zeros(5, 5, 0), |acc, (l, c)| {
            &acc + &basis[l].scale(c)
        });
    assert_eq!(rebuilt, target);
}

#[test]
fn exchange_relations_hold() {
    for n in [3, 5] {
        let r = build_braid(&random_params(dim(n), 5, true).unwrap());
        let (l, t) = (build_lplus(&r), build_transfer(&r));
        for report in [
            verify_rll(&r, &l),
            verify_transfer_exchange(&r, &t),
            verify_lminus_degeneracy(&r),
        ] {
            assert!(report.pass, "N={n}: {report}");
        }
    }
}

#[test]
fn exchange_needs_a_matching_braid_matrix() {
    let d = dim(3);
    let r = build_braid(&random_params(d, 5, true).unwrap());
    let other = build_braid(&random_params(d, 6, true).unwrap());
    assert!(!verify_rll(&other, &build_lplus(&r)).pass);

    let params = random_params(d, 5, true).unwrap();
    let broken = build_braid_custom(&mismatched_pair_coefficients(&params));
    assert!(!verify_rll(&broken, &build_lplus(&broken)).pass);
}

#[test]
fn lminus_must_be_the_same_operator() {
    let r = build_braid(&random_params(dim(3), 5, true).unwrap());
    let flip = build_flip(3).unwrap().with_arity(1).unwrap();
    assert!(!verify_lminus_degeneracy_with(&r, &flip).pass);
    // With R̂ = I the constant flip is the correct L⁻.
    let trivial = build_braid(&oddbraid::braid::ParamSet::zero(dim(3)));
    assert!(verify_lminus_degeneracy_with(&trivial, &flip).pass);
}

#[test]
fn two_site_coproduct_satisfies_rll() {
    let r = build_braid(&random_params(dim(3), 8, true).unwrap());
    let l = build_lplus(&r);
    let l2 = coproduct(&l, &l).unwrap();
    assert_eq!(l2.sites(), 2);
    assert_eq!(l2.quantum_dim(), 9);
    let report = verify_rll(&r, &l2);
    assert!(report.pass, "{report}");
    let t = build_transfer(&r);
    assert!(verify_transfer_exchange(&r, &coproduct(&t, &t).unwrap()).pass);
}

#[test]
fn coproduct_is_associative() {
    let r = build_braid(&random_params(dim(3), 9, true).unwrap());
    let l = build_lplus(&r);
    let left = coproduct(&coproduct(&l, &l).unwrap(), &l).unwrap();
    let right = coproduct(&l, &coproduct(&l, &l).unwrap()).unwrap();
    assert_eq!(left.matrix(), right.matrix());
    assert_eq!(left.sites(), 3);
}

#[test]
fn coproduct_blocks_are_index_sums() {
    let r = build_braid(&random_params(dim(3), 10, true).unwrap());
    let l = build_lplus(&r);
    let l2 = coproduct(&l, &l).unwrap();
    for a in 1..=3 {
        for b in 1..=3 {
            let mut want = SparseMatrix::zeros(9, 9, 1);
            for c in 1..=3 {
                let term = extract_block(&l, a, c)
                    .unwrap()
                    .kron(&extract_block(&l, c, b).unwrap())
                    .unwrap();
                want = &want + &term;
            }
            assert_eq!(extract_block(&l2, a, b).unwrap(), want);
        }
    }
}

#[test]
fn coproduct_rejects_mixed_operators() {
    let r3 = build_braid(&random_params(dim(3), 1, true).unwrap());
    let r5 = build_braid(&random_params(dim(5), 1, true).unwrap());
    assert!(matches!(
        coproduct(&build_lplus(&r3), &build_transfer(&r3)),
        Err(Error::OperatorMismatch(_))
    ));
    assert!(matches!(
        coproduct(&build_lplus(&r3), &build_lplus(&r5)),
        Err(Error::OperatorMismatch(_))
    ));
}

#[test]
fn x_labels_round_trip_through_text() {
    for l in XLabel::all(dim(5)) {
        let text = l.to_string();
        assert_eq!(text.parse::<XLabel>().unwrap(), l, "{text}");
    }
    assert_eq!(XLabel::all(dim(7)).len(), 49);
    let unit_trace = build_x_basis(dim(3))[&XLabel::Pp].trace();
    assert_eq!(unit_trace, ExpSum::one(0));
}
