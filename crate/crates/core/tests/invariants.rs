use knotforge::fixtures::PD_CODES_TXT;
use knotforge::invariants::{alexander_polynomial, determinant, parse_pd_list, KnotTable, LaurentPoly};

#[test]
fn every_pd_code_matches_its_table_row() {
    let table = KnotTable::builtin();
    let codes = parse_pd_list(PD_CODES_TXT).unwrap();
    assert_eq!(codes.len(), table.entries().len());
    for (name, d) in &codes {
        let entry = table.get(name).unwrap_or_else(|| panic!("{name} missing from table"));
        let a = alexander_polynomial::<i64>(d).unwrap();
        assert_eq!(a, entry.alexander, "{name}");
        assert_eq!(d.n_crossings() as u32, entry.crossing_number, "{name}");
        let cands = table.identify(d).unwrap();
        assert!(cands.iter().any(|e| &e.name == name), "{name}");
    }
}

type P = LaurentPoly<i64>;
type M = Vec<Vec<P>>;

fn mono(c: i64, k: i64) -> P {
    LaurentPoly::monomial(c, k)
}

fn matmul(a: &M, b: &M) -> M {
    let n = a.len();
    (0..n)
        .map(|i| (0..n).map(|j| (0..n).fold(P::zero(), |acc, k| acc.add(&a[i][k].mul(&b[k][j])))).collect())
        .collect()
}

/// Alexander polynomial of a closed braid from its reduced Burau matrix,
/// an oracle independent of diagrams. Generators are `1..`, negative for
/// inverses.
fn burau_alexander(strands: usize, word: &[i32]) -> P {
    let gen = |g: i32| -> M {
        match (strands, g) {
            (2, 1) => vec![vec![mono(-1, 1)]],
            (2, -1) => vec![vec![mono(-1, -1)]],
            (3, 1) => vec![vec![mono(-1, 1), P::one()], vec![P::zero(), P::one()]],
            (3, -1) => vec![vec![mono(-1, -1), mono(1, -1)], vec![P::zero(), P::one()]],
            (3, 2) => vec![vec![P::one(), P::zero()], vec![mono(1, 1), mono(-1, 1)]],
            (3, -2) => vec![vec![P::one(), P::zero()], vec![P::one(), mono(-1, -1)]],
            _ => unreachable!(),
        }
    };
    let n = strands - 1;
    let id: M = (0..n).map(|i| (0..n).map(|j| if i == j { P::one() } else { P::zero() }).collect()).collect();
    let m = word.iter().fold(id.clone(), |acc, &g| matmul(&acc, &gen(g)));
    let im: M = (0..n).map(|i| (0..n).map(|j| id[i][j].sub(&m[i][j])).collect()).collect();
    let det = if n == 1 { im[0][0].clone() } else { im[0][0].mul(&im[1][1]).sub(&im[0][1].mul(&im[1][0])) };
    let one_minus = |k: i64| P::one().sub(&mono(1, k));
    det.mul(&one_minus(1)).div_exact(&one_minus(strands as i64)).unwrap().normalize()
}

#[test]
fn braid_closures_agree_with_the_table() {
    let table = KnotTable::builtin();
    let cases: [(&str, usize, Vec<i32>); 5] = [
        ("3_1", 2, vec![1; 3]),
        ("5_1", 2, vec![1; 5]),
        ("7_1", 2, vec![1; 7]),
        ("4_1", 3, vec![1, -2, 1, -2]),
        ("8_19", 3, [1, 2].repeat(4)),
    ];
    for (name, strands, word) in cases {
        assert_eq!(burau_alexander(strands, &word), table.get(name).unwrap().alexander, "{name}");
    }
}

#[test]
fn mirror_keeps_polynomial_and_determinant() {
    for (name, d) in parse_pd_list(PD_CODES_TXT).unwrap() {
        let m = d.mirror();
        assert_eq!(alexander_polynomial::<i64>(&m).unwrap(), alexander_polynomial::<i64>(&d).unwrap(), "{name}");
        assert_eq!(determinant(&m).unwrap(), determinant(&d).unwrap(), "{name}");
    }
}
