//! Lie-algebra weight systems W_{g,R} for g = gl(N), so(N) in the defining
//! representation, evaluated as exact polynomials in N.
//!
//! Two independent routes are implemented:
//!
//! - the state sum ([`weight_poly`]): each chord is smoothed by the
//!   completeness relation of the orthonormal basis and the value is a loop
//!   count, N^loops for gl(N) and a signed 2-state sum with weights ±1/2
//!   for so(N); Jacobi diagrams are STU-expanded first;
//! - the literal contraction ([`weight_oracle`]): representation matrices
//!   at chord endpoints, structure-constant tensors at internal vertices,
//!   traced around the circle for one concrete N.
//!
//! The metric is ⟨x,y⟩ = tr(xy) in the defining representation. A vertex
//! with counterclockwise edge order (e1,e2,e3) contributes
//! tr(y1 y2 y3) - tr(y1 y3 y2); this is the convention coherent with the
//! STU resolution in [`crate::spaces`], which the tests cross-validate.

use num::{BigInt, One, Signed, Zero};
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::fmt;

use crate::diagrams::{ChordDiagram, JacobiDiagram, Port};
use crate::qlinalg::{fmt_rat, Echelon, Rat, SparseVec};
use crate::spaces::{DiagramVector, QuotientSpace, Variant};
use crate::{Error, Result};

/// Assignment budget for the literal contraction: (dim g)^edges.
const ORACLE_BUDGET: u64 = 200_000_000;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Algebra {
    Gl,
    So,
}

impl Algebra {
    pub fn name(self) -> &'static str {
        match self {
            Algebra::Gl => "gl",
            Algebra::So => "so",
        }
    }

    fn dim(self, n: usize) -> usize {
        match self {
            Algebra::Gl => n * n,
            Algebra::So => n * (n - 1) / 2,
        }
    }
}

impl std::str::FromStr for Algebra {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gl" => Ok(Algebra::Gl),
            "so" => Ok(Algebra::So),
            other => Err(Error::Invalid(format!(
                "unknown algebra {other:?}, expected gl|so"
            ))),
        }
    }
}

/// A polynomial in N with exact rational coefficients.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct WeightPolynomial {
    coeffs: BTreeMap<usize, Rat>,
}

impl WeightPolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn add_term(&mut self, exp: usize, coef: Rat) {
        if coef.is_zero() {
            return;
        }
        match self.coeffs.entry(exp) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(coef);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += coef;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn add_scaled(&mut self, other: &Self, c: &Rat) {
        for (e, v) in &other.coeffs {
            self.add_term(*e, v * c);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn eval(&self, n: u32) -> Rat {
        let nn = Rat::from(BigInt::from(n));
        let mut acc = Rat::zero();
        for (e, c) in &self.coeffs {
            let mut p = Rat::one();
            for _ in 0..*e {
                p *= &nn;
            }
            acc += c * p;
        }
        acc
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (usize, &Rat)> {
        self.coeffs.iter().map(|(e, c)| (*e, c))
    }
}

impl fmt::Display for WeightPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.coeffs.iter().rev() {
            let neg = c.is_negative();
            let mag = if neg { -c.clone() } else { c.clone() };
            if first {
                if neg {
                    write!(f, "-")?;
                }
                first = false;
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let unit = mag.is_one();
            match (*e, unit) {
                (0, _) => write!(f, "{}", fmt_rat(&mag))?,
                (1, true) => write!(f, "N")?,
                (1, false) => write!(f, "{} N", fmt_rat(&mag))?,
                (_, true) => write!(f, "N^{e}")?,
                (_, false) => write!(f, "{} N^{e}", fmt_rat(&mag))?,
            }
        }
        Ok(())
    }
}

/// Loop count after gluing arcs: `joins` lists pairs of arc indices glued
/// end to end; every arc appears in exactly two joins, so components are
/// circles.
fn loop_count(arcs: usize, joins: &[(usize, usize)]) -> usize {
    let mut parent: Vec<usize> = (0..arcs).collect();
    fn find(p: &mut Vec<usize>, mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut comps = arcs;
    for &(a, b) in joins {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra] = rb;
            comps -= 1;
        }
    }
    comps
}

/// State-sum weight of a chord diagram, as a polynomial in N.
pub fn weight_poly_chord(d: &ChordDiagram, algebra: Algebra) -> WeightPolynomial {
    let m = d.degree();
    let pairs = d.pairs();
    let arcs = 2 * m;
    let mut out = WeightPolynomial::zero();
    if m == 0 {
        out.add_term(1, Rat::one()); // trace of the identity
        return out;
    }
    // arc i runs from endpoint i to endpoint i+1; in(p) = arc p-1, out(p) = arc p
    let arc_in = |p: usize| (p + arcs - 1) % arcs;
    let arc_out = |p: usize| p;
    match algebra {
        Algebra::Gl => {
            let joins: Vec<(usize, usize)> = pairs
                .iter()
                .flat_map(|&(p, q)| [(arc_in(p), arc_out(q)), (arc_in(q), arc_out(p))])
                .collect();
            out.add_term(loop_count(arcs, &joins), Rat::one());
        }
        Algebra::So => {
            // 2-state sum: +1/2 orientation-preserving, -1/2 twisted
            for state in 0..(1u32 << m) {
                let mut joins = Vec::with_capacity(2 * m);
                let mut coef = Rat::one();
                for (k, &(p, q)) in pairs.iter().enumerate() {
                    if state >> k & 1 == 0 {
                        joins.push((arc_in(p), arc_out(q)));
                        joins.push((arc_in(q), arc_out(p)));
                        coef *= Rat::new(BigInt::one(), BigInt::from(2));
                    } else {
                        joins.push((arc_in(p), arc_in(q)));
                        joins.push((arc_out(p), arc_out(q)));
                        coef *= Rat::new(BigInt::from(-1), BigInt::from(2));
                    }
                }
                out.add_term(loop_count(arcs, &joins), coef);
            }
        }
    }
    out
}

/// Weight of any diagram: chord diagrams directly, Jacobi diagrams via STU
/// expansion followed by linear evaluation.
pub fn weight_poly(j: &JacobiDiagram, algebra: Algebra) -> Result<WeightPolynomial> {
    let expanded = crate::spaces::stu_expand(j)?;
    Ok(weight_on_vector(&expanded, algebra))
}

/// Linear extension of the state-sum weight to chord-diagram vectors.
pub fn weight_on_vector(v: &DiagramVector<ChordDiagram>, algebra: Algebra) -> WeightPolynomial {
    let mut out = WeightPolynomial::zero();
    for (d, c) in v.iter() {
        out.add_scaled(&weight_poly_chord(d, algebra), c);
    }
    out
}

/// Basis matrices (entries 0, ±1) of the defining representation.
fn basis_matrices(algebra: Algebra, n: usize) -> Vec<Vec<i64>> {
    let mut out = Vec::with_capacity(algebra.dim(n));
    match algebra {
        Algebra::Gl => {
            for i in 0..n {
                for j in 0..n {
                    let mut m = vec![0i64; n * n];
                    m[i * n + j] = 1;
                    out.push(m);
                }
            }
        }
        Algebra::So => {
            for p in 0..n {
                for q in (p + 1)..n {
                    let mut m = vec![0i64; n * n];
                    m[p * n + q] = 1;
                    m[q * n + p] = -1;
                    out.push(m);
                }
            }
        }
    }
    out
}

/// Basis matrices, structure tensor and metric data of gl(N) or so(N) in
/// the defining representation, with the bracket and antisymmetry
/// invariants checked on construction.
pub struct LieData {
    pub algebra: Algebra,
    pub n: usize,
    basis: Vec<Vec<i64>>,
    /// tr(xa xb xc) - tr(xa xc xb) over basis indices; empty until a
    /// diagram with internal vertices needs it.
    vertex: Vec<i64>,
}

impl LieData {
    pub fn new(algebra: Algebra, n: usize) -> Result<Self> {
        if !(2..=5).contains(&n) {
            return Err(Error::Invalid(format!("LieData requires 2 <= N <= 5, got {n}")));
        }
        let basis = basis_matrices(algebra, n);
        let dim = basis.len();
        // representation matrices close under the bracket
        for a in 0..dim {
            for b in 0..dim {
                let ab = mat_mul(n, &basis[a], &basis[b]);
                let ba = mat_mul(n, &basis[b], &basis[a]);
                let comm: Vec<i64> = ab.iter().zip(&ba).map(|(x, y)| x - y).collect();
                let in_span = match algebra {
                    Algebra::Gl => true,
                    Algebra::So => (0..n).all(|i| {
                        (0..n).all(|j| comm[i * n + j] == -comm[j * n + i])
                    }),
                };
                if !in_span {
                    return Err(Error::Invalid(
                        "bracket left the representation span".into(),
                    ));
                }
            }
        }
        let mut t = vec![0i64; dim * dim * dim];
        for a in 0..dim {
            for b in 0..dim {
                let ab = mat_mul(n, &basis[a], &basis[b]);
                for c in 0..dim {
                    t[(a * dim + b) * dim + c] = mat_trace(n, &mat_mul(n, &ab, &basis[c]));
                }
            }
        }
        let mut vertex = vec![0i64; dim * dim * dim];
        for a in 0..dim {
            for b in 0..dim {
                for c in 0..dim {
                    vertex[(a * dim + b) * dim + c] =
                        t[(a * dim + b) * dim + c] - t[(a * dim + c) * dim + b];
                }
            }
        }
        // total antisymmetry of the structure tensor
        for a in 0..dim {
            for b in 0..dim {
                for c in 0..dim {
                    let v = vertex[(a * dim + b) * dim + c];
                    if vertex[(b * dim + a) * dim + c] != -v
                        || vertex[(a * dim + c) * dim + b] != -v
                    {
                        return Err(Error::Invalid(
                            "structure tensor is not totally antisymmetric".into(),
                        ));
                    }
                }
            }
        }
        Ok(Self {
            algebra,
            n,
            basis,
            vertex,
        })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

/// Index of the dual basis element: gl duals are the transposed matrix
/// units (a permutation of the basis); so duals are -1/2 times the same
/// element, handled by a global scalar.
fn dual_index(algebra: Algebra, n: usize, a: usize) -> usize {
    match algebra {
        Algebra::Gl => {
            let (i, j) = (a / n, a % n);
            j * n + i
        }
        Algebra::So => a,
    }
}

fn mat_mul(n: usize, a: &[i64], b: &[i64]) -> Vec<i64> {
    let mut out = vec![0i64; n * n];
    for i in 0..n {
        for k in 0..n {
            let v = a[i * n + k];
            if v != 0 {
                for j in 0..n {
                    out[i * n + j] += v * b[k * n + j];
                }
            }
        }
    }
    out
}

fn mat_trace(n: usize, a: &[i64]) -> i64 {
    (0..n).map(|i| a[i * n + i]).sum()
}

/// The literal multi-sum: representation matrices at chord endpoints,
/// f-tensors at internal vertices, traced around the circle. Exact, for
/// one concrete N ≤ 5.
pub fn weight_oracle(j: &JacobiDiagram, algebra: Algebra, n: u32) -> Result<Rat> {
    if !(2..=5).contains(&n) {
        return Err(Error::Invalid(format!(
            "oracle requires 2 <= N <= 5, got {n}"
        )));
    }
    let n = n as usize;
    let dim = algebra.dim(n);
    let edges = j.edges();
    let e = edges.len();
    if j.legs() == 0 {
        // empty diagram: trace of the identity
        return Ok(Rat::from(BigInt::from(n as i64)));
    }
    if (dim as u64)
        .checked_pow(e as u32)
        .map_or(true, |c| c > ORACLE_BUDGET)
    {
        return Err(Error::Budget(format!(
            "oracle cost {dim}^{e} exceeds the configured budget"
        )));
    }

    let lie = LieData::new(algebra, n as u32 as usize)?;
    let basis = &lie.basis;
    let vtx = &lie.vertex;

    // for each leg (circle order) and each vertex slot: (edge, primal end?)
    let port_edge = |port: Port| -> (usize, bool) {
        for (k, &(p, q)) in edges.iter().enumerate() {
            if p == port {
                return (k, true); // first end carries the primal element
            }
            if q == port {
                return (k, false);
            }
        }
        unreachable!()
    };
    let legs: Vec<(usize, bool)> = (0..j.legs() as u32)
        .map(|l| port_edge(Port::Leg(l)))
        .collect();
    let verts: Vec<[(usize, bool); 3]> = (0..j.vertex_count() as u32)
        .map(|v| [0, 1, 2].map(|s| port_edge(Port::Slot(v, s))))
        .collect();

    let end_index = |assign: &[usize], (edge, primal): (usize, bool)| -> usize {
        if primal {
            assign[edge]
        } else {
            dual_index(algebra, n, assign[edge])
        }
    };

    let eval_assignment = |assign: &[usize]| -> i128 {
        let mut vfac: i128 = 1;
        for slots in &verts {
            let (a, b, c) = (
                end_index(assign, slots[0]),
                end_index(assign, slots[1]),
                end_index(assign, slots[2]),
            );
            vfac *= vtx[(a * dim + b) * dim + c] as i128;
            if vfac == 0 {
                return 0;
            }
        }
        let mut prod = basis[end_index(assign, legs[0])].clone();
        for leg in &legs[1..] {
            prod = mat_mul(n, &prod, &basis[end_index(assign, *leg)]);
        }
        vfac * mat_trace(n, &prod) as i128
    };

    // odometer over edge assignments, parallel over the first edge's index
    let total: BigInt = (0..dim)
        .into_par_iter()
        .map(|first| {
            let mut assign = vec![0usize; e];
            assign[0] = first;
            let mut acc: i128 = 0;
            let mut sum = BigInt::zero();
            loop {
                acc += eval_assignment(&assign);
                if acc.abs() > i128::MAX / 4 {
                    sum += BigInt::from(acc);
                    acc = 0;
                }
                let mut k = 1;
                while k < e {
                    assign[k] += 1;
                    if assign[k] < dim {
                        break;
                    }
                    assign[k] = 0;
                    k += 1;
                }
                if k >= e {
                    break;
                }
            }
            sum + BigInt::from(acc)
        })
        .reduce(BigInt::zero, |a, b| a + b);

    // global dual normalization: so duals are -1/2 each
    let scale = match algebra {
        Algebra::Gl => Rat::one(),
        Algebra::So => {
            let mut s = Rat::one();
            for _ in 0..e {
                s *= Rat::new(BigInt::from(-1), BigInt::from(2));
            }
            s
        }
    };
    Ok(Rat::from(total) * scale)
}

/// A probe family for the span-rank table: one row per (algebra, N).
#[derive(Clone, Debug)]
pub struct Probe {
    pub algebra: Algebra,
    pub n_values: Vec<u32>,
}

/// Rank of the matrix whose rows are the probe functionals evaluated on a
/// basis of A_m (framed). Always at most dim A_m.
pub fn weight_span_rank(m: usize, probes: &[Probe]) -> usize {
    let q = QuotientSpace::build(m, Variant::Framed);
    let basis: Vec<&ChordDiagram> = q.basis_diagrams().collect();
    let mut ech = Echelon::new(basis.len());
    for probe in probes {
        for &n in &probe.n_values {
            let row = SparseVec::from_pairs(
                basis
                    .iter()
                    .enumerate()
                    .map(|(i, d)| (i, weight_poly_chord(d, probe.algebra).eval(n))),
            );
            ech.push_rat(&row);
        }
    }
    ech.rank()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagrams::enumerate_jacobi_diagrams;
    use crate::qlinalg::rat;
    use crate::spaces::four_t_relation_vectors;

    fn chord(s: &str) -> ChordDiagram {
        s.parse().unwrap()
    }

    #[test]
    fn gl_small_values() {
        let empty = weight_poly_chord(&ChordDiagram::empty(), Algebra::Gl);
        assert_eq!(empty.to_string(), "N");
        let one = weight_poly_chord(&chord("1 1"), Algebra::Gl);
        assert_eq!(one.to_string(), "N^2");
        let cross = weight_poly_chord(&chord("1 2 1 2"), Algebra::Gl);
        assert_eq!(cross.to_string(), "N");
        let par = weight_poly_chord(&chord("1 1 2 2"), Algebra::Gl);
        assert_eq!(par.to_string(), "N^3");
    }

    #[test]
    fn so_casimir() {
        // one chord: dim so(N) = N(N-1)/2
        let one = weight_poly_chord(&chord("1 1"), Algebra::So);
        assert_eq!(one.eval(3), rat(3, 1));
        assert_eq!(one.eval(4), rat(6, 1));
        let oracle =
            weight_oracle(&JacobiDiagram::from_chord(&chord("1 1")), Algebra::So, 3).unwrap();
        assert_eq!(oracle, rat(3, 1));
    }

    #[test]
    fn oracle_empty_diagram() {
        let d = JacobiDiagram::from_chord(&ChordDiagram::empty());
        assert_eq!(weight_oracle(&d, Algebra::Gl, 3).unwrap(), rat(3, 1));
    }

    #[test]
    fn oracle_matches_state_sum_on_chords() {
        for m in 0..=3 {
            for d in crate::diagrams::enumerate_chord_diagrams(m) {
                let j = JacobiDiagram::from_chord(&d);
                for alg in [Algebra::Gl, Algebra::So] {
                    let poly = weight_poly_chord(&d, alg);
                    for n in [2u32, 3, 4] {
                        assert_eq!(
                            poly.eval(n),
                            weight_oracle(&j, alg, n).unwrap(),
                            "mismatch for {d} {} N={n}",
                            alg.name()
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn oracle_matches_stu_expansion_degree_two() {
        // the STU coherence check on every internal-vertex diagram of degree 2
        for j in enumerate_jacobi_diagrams(2, 2).unwrap() {
            if j.vertex_count() == 0 {
                continue;
            }
            for alg in [Algebra::Gl, Algebra::So] {
                let poly = weight_poly(&j, alg).unwrap();
                for n in [2u32, 3] {
                    assert_eq!(
                        poly.eval(n),
                        weight_oracle(&j, alg, n).unwrap(),
                        "STU incoherence at {} N={n}\n{j}",
                        alg.name()
                    );
                }
            }
        }
    }

    #[test]
    fn four_t_vectors_vanish() {
        for m in 2..=4 {
            for v in four_t_relation_vectors(m) {
                for alg in [Algebra::Gl, Algebra::So] {
                    assert!(
                        weight_on_vector(&v, alg).is_zero(),
                        "4T vector survived {} at m={m}",
                        alg.name()
                    );
                }
            }
        }
    }

    #[test]
    fn stu_expanded_as_pairs_vanish() {
        // the weight of (diagram + vertex-flipped diagram) is zero
        for inst in crate::spaces::as_instances(2, 2).unwrap() {
            let expanded = crate::spaces::stu_expand_vector(&inst).unwrap();
            for alg in [Algebra::Gl, Algebra::So] {
                assert!(weight_on_vector(&expanded, alg).is_zero());
            }
        }
    }

    #[test]
    fn linearity() {
        let mut v = DiagramVector::zero();
        v.add_term(chord("1 1 2 2"), rat(2, 1));
        v.add_term(chord("1 2 1 2"), rat(1, 3));
        let w = weight_on_vector(&v, Algebra::Gl);
        let mut expect = WeightPolynomial::zero();
        expect.add_scaled(&weight_poly_chord(&chord("1 1 2 2"), Algebra::Gl), &rat(2, 1));
        expect.add_scaled(&weight_poly_chord(&chord("1 2 1 2"), Algebra::Gl), &rat(1, 3));
        assert_eq!(w, expect);
    }

    #[test]
    fn span_rank_examples() {
        let probes = vec![
            Probe {
                algebra: Algebra::Gl,
                n_values: vec![2, 3, 4],
            },
            Probe {
                algebra: Algebra::So,
                n_values: vec![3, 4, 5],
            },
        ];
        assert_eq!(weight_span_rank(0, &probes), 1);
        assert_eq!(weight_span_rank(2, &probes), 2); // = dim A_2
        for m in 0..=4 {
            assert!(weight_span_rank(m, &probes) <= crate::spaces::dim_space(m, Variant::Framed));
        }
    }

    #[test]
    fn polynomial_display() {
        let mut p = WeightPolynomial::zero();
        p.add_term(3, rat(-1, 2));
        p.add_term(1, rat(3, 1));
        assert_eq!(p.to_string(), "-1/2 N^3 + 3 N");
        assert_eq!(WeightPolynomial::zero().to_string(), "0");
    }

    #[test]
    fn oracle_rejects_big_n() {
        assert!(matches!(
            weight_oracle(&JacobiDiagram::from_chord(&chord("1 1")), Algebra::Gl, 9),
            Err(Error::Invalid(_))
        ));
    }
}
