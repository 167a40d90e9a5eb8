//! Explicit matrices over GF(p) for a nilpotent `e` (or unipotent `u`) on
//! the natural module `V` and on the modules built from it.
//!
//! Basis conventions, fixed so that dumped matrices are stable:
//!
//! * `V`: blocks in ascending size order, and within block `r` the vectors
//!   `v_1 .. v_d` with `e v_j = v_{j-1}`.
//! * `V ⊗ V*` and `V ⊗ V`: `v_i ⊗ v_j^*` at index `i * n + j` (row-major).
//! * `∧²V`: `v_i ∧ v_j` for `i < j`, lexicographic.
//! * `S²V`: `v_i v_j` for `i <= j`, lexicographic.
//! * `sl(V) = Ker φ`: row-major over `(i, j)` with the slot `(i, i)` holding
//!   `v_i ⊗ v_i^* - v_{i+1} ⊗ v_{i+1}^*` for `i < n` and no `(n, n)` slot.
//! * `psl(V)`: the `sl` basis without its last diagonal element.
//!
//! The dual action is `(e·f)(v) = -f(e v)`, so `e` acts on `V*` by the
//! negative transpose. A unipotent `u` acts on `V*` by the inverse
//! transpose. Operators for unipotent elements store `action - 1`.

use std::cell::OnceCell;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::arith::{valuation, Prime};
use crate::error::{Error, Result};
use crate::gfp::{jordan_type_of_nilpotent, GFpMatrix};
use crate::jordan::{validate_partition_for_group, Family, GroupContext, JordanType};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Element {
    Nilpotent,
    Unipotent,
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Element::Nilpotent => "nilpotent",
            Element::Unipotent => "unipotent",
        })
    }
}

impl FromStr for Element {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "nilpotent" | "e" => Ok(Element::Nilpotent),
            "unipotent" | "u" => Ok(Element::Unipotent),
            _ => Err(Error::Unknown {
                kind: "element kind",
                input: s.to_string(),
            }),
        }
    }
}

/// Which isogeny class of type `A_{n-1}` an adjoint module belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Isogeny {
    SimplyConnected,
    Adjoint,
    /// Both isogenies inseparable; `g ≅ psl(V) ⊕ K`. Needs `p² | n`.
    Intermediate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ModuleSpec {
    NaturalV,
    TensorVVdual,
    TensorVV,
    Wedge2,
    Sym2,
    GL,
    SL,
    /// `L(ϖ₁ + ϖ_{n-1})`.
    PSL,
    /// `L(ϖ₂)` for `Sp(V)`.
    LOmega2Sp,
    /// `L(2ϖ₁)` for `SO(V)`.
    L2Omega1SO,
    Adjoint(Isogeny),
}

impl ModuleSpec {
    pub const ALL: [ModuleSpec; 13] = [
        ModuleSpec::NaturalV,
        ModuleSpec::TensorVVdual,
        ModuleSpec::TensorVV,
        ModuleSpec::Wedge2,
        ModuleSpec::Sym2,
        ModuleSpec::GL,
        ModuleSpec::SL,
        ModuleSpec::PSL,
        ModuleSpec::LOmega2Sp,
        ModuleSpec::L2Omega1SO,
        ModuleSpec::Adjoint(Isogeny::SimplyConnected),
        ModuleSpec::Adjoint(Isogeny::Adjoint),
        ModuleSpec::Adjoint(Isogeny::Intermediate),
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ModuleSpec::NaturalV => "natural",
            ModuleSpec::TensorVVdual => "tensor",
            ModuleSpec::TensorVV => "tensor-vv",
            ModuleSpec::Wedge2 => "wedge2",
            ModuleSpec::Sym2 => "sym2",
            ModuleSpec::GL => "gl",
            ModuleSpec::SL => "sl",
            ModuleSpec::PSL => "psl",
            ModuleSpec::LOmega2Sp => "l-omega2",
            ModuleSpec::L2Omega1SO => "l-2omega1",
            ModuleSpec::Adjoint(Isogeny::SimplyConnected) => "adjoint-sc",
            ModuleSpec::Adjoint(Isogeny::Adjoint) => "adjoint-ad",
            ModuleSpec::Adjoint(Isogeny::Intermediate) => "adjoint-int",
        }
    }

    /// Dimension of the module for `dim V = n`.
    pub fn dim(&self, n: usize, p: Prime) -> usize {
        let psl = if p.divides(n) { n * n - 2 } else { n * n - 1 };
        match self {
            ModuleSpec::NaturalV => n,
            ModuleSpec::TensorVVdual | ModuleSpec::TensorVV | ModuleSpec::GL => n * n,
            ModuleSpec::Wedge2 => n * (n - 1) / 2,
            ModuleSpec::Sym2 => n * (n + 1) / 2,
            ModuleSpec::SL | ModuleSpec::Adjoint(Isogeny::SimplyConnected | Isogeny::Adjoint) => {
                n * n - 1
            }
            ModuleSpec::PSL => psl,
            ModuleSpec::LOmega2Sp => psl - n * (n + 1) / 2,
            ModuleSpec::L2Omega1SO => psl - n * (n - 1) / 2,
            ModuleSpec::Adjoint(Isogeny::Intermediate) => psl + 1,
        }
    }

    /// Checks that the module makes sense for the group.
    pub fn check_compatible(&self, ctx: &GroupContext) -> Result<()> {
        let incompatible = || {
            Err(Error::IncompatibleModule {
                module: self.to_string(),
                group: ctx.to_string(),
            })
        };
        match (self, ctx.family()) {
            (ModuleSpec::LOmega2Sp, Family::Sp) | (ModuleSpec::L2Omega1SO, Family::SO) => Ok(()),
            (ModuleSpec::LOmega2Sp | ModuleSpec::L2Omega1SO, _) => incompatible(),
            (ModuleSpec::Adjoint(_), Family::Sp | Family::SO) => incompatible(),
            (ModuleSpec::Adjoint(Isogeny::Intermediate), Family::SL) => {
                let p2 = ctx.p().pow(2);
                if ctx.n().is_multiple_of(p2) {
                    Ok(())
                } else {
                    Err(Error::Divisibility(format!(
                        "the intermediate isogeny class needs p^2 | n (p = {}, n = {})",
                        ctx.p(),
                        ctx.n()
                    )))
                }
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for ModuleSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModuleSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase();
        let alias = match key.as_str() {
            "v" => "natural",
            "vvdual" | "v⊗v*" => "tensor",
            "vv" | "v⊗v" => "tensor-vv",
            "wedge" | "alt2" | "exterior" => "wedge2",
            "sym" | "symmetric" => "sym2",
            "l-omega1-omega-n-1" | "l(ϖ1+ϖn-1)" => "psl",
            "l-varpi2" => "l-omega2",
            "l-2varpi1" => "l-2omega1",
            "adjoint" => "adjoint-sc",
            other => other,
        };
        ModuleSpec::ALL
            .into_iter()
            .find(|m| m.name() == alias)
            .ok_or_else(|| Error::Unknown {
                kind: "module",
                input: s.to_string(),
            })
    }
}

impl Serialize for ModuleSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for ModuleSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A nilpotent matrix together with the basis it is written in.
///
/// For a unipotent element `u` the matrix is `u - 1` on the module.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NilpotentOperator {
    matrix: GFpMatrix,
    basis_labels: Vec<String>,
    module: ModuleSpec,
    element: Element,
    /// `dim V` and the Jordan type on `V` this operator came from.
    source: JordanType,
}

impl NilpotentOperator {
    /// Wraps a nilpotent matrix on `V` in an arbitrary basis `v1, …, vn`.
    /// For a unipotent element pass `u - 1`.
    pub fn from_matrix_on_v(matrix: GFpMatrix, element: Element) -> Result<Self> {
        let source = jordan_type_of_nilpotent(&matrix)?;
        if source.is_empty() {
            return Err(Error::InconsistentInput("empty Jordan type on V".into()));
        }
        Ok(NilpotentOperator {
            basis_labels: (1..=matrix.rows()).map(|i| format!("v{i}")).collect(),
            matrix,
            module: ModuleSpec::NaturalV,
            element,
            source,
        })
    }

    pub fn matrix(&self) -> &GFpMatrix {
        &self.matrix
    }

    pub fn basis_labels(&self) -> &[String] {
        &self.basis_labels
    }

    pub fn module(&self) -> ModuleSpec {
        self.module
    }

    pub fn element(&self) -> Element {
        self.element
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn natural_dim(&self) -> usize {
        self.source.total_dim()
    }

    pub fn source_type(&self) -> &JordanType {
        &self.source
    }

    pub fn p(&self) -> Prime {
        self.matrix.p()
    }

    pub fn jordan_type(&self) -> Result<JordanType> {
        jordan_type_of_nilpotent(&self.matrix)
    }

    fn derived(&self, matrix: GFpMatrix, basis_labels: Vec<String>, module: ModuleSpec) -> Self {
        debug_assert_eq!(matrix.rows(), basis_labels.len());
        NilpotentOperator {
            matrix,
            basis_labels,
            module,
            element: self.element,
            source: self.source.clone(),
        }
    }

    fn expect_module(&self, allowed: &[ModuleSpec], op: &str) -> Result<()> {
        if allowed.contains(&self.module) {
            Ok(())
        } else {
            Err(Error::Shape(format!(
                "{op} expects an operator on {allowed:?}, got {}",
                self.module
            )))
        }
    }
}

/// Block sizes of `jt` in basis order (ascending).
fn block_layout(jt: &JordanType) -> Vec<usize> {
    jt.sizes()
}

fn natural_labels(jt: &JordanType) -> Vec<String> {
    let blocks = block_layout(jt);
    let single = blocks.len() == 1;
    blocks
        .iter()
        .enumerate()
        .flat_map(|(r, &d)| {
            (1..=d).map(move |j| {
                if single {
                    format!("v{j}")
                } else {
                    format!("v{j}^({})", r + 1)
                }
            })
        })
        .collect()
}

/// Block-diagonal shift matrix with `e v_j = v_{j-1}` in each block.
fn shift_matrix(jt: &JordanType, p: Prime) -> GFpMatrix {
    let n = jt.total_dim();
    let mut m = GFpMatrix::zeros(p, n, n);
    let mut offset = 0;
    for d in block_layout(jt) {
        for j in 1..d {
            m.set(offset + j - 1, offset + j, 1);
        }
        offset += d;
    }
    m
}

/// The nilpotent `e` on `V` with Jordan type `jt`.
#[allow(non_snake_case)]
pub fn build_nilpotent_on_V(jt: &JordanType, p: Prime) -> Result<NilpotentOperator> {
    build_on_v(Element::Nilpotent, jt, p)
}

/// The unipotent `u = 1 + e` on `V` with Jordan type `jt`.
#[allow(non_snake_case)]
pub fn build_unipotent_on_V(jt: &JordanType, p: Prime) -> Result<GFpMatrix> {
    if jt.is_empty() {
        return Err(Error::InconsistentInput("empty Jordan type on V".into()));
    }
    shift_matrix(jt, p).add(&GFpMatrix::identity(p, jt.total_dim()))
}

/// Operator on `V` for either kind of element (for `u`, stores `u - 1`).
pub fn build_on_v(element: Element, jt: &JordanType, p: Prime) -> Result<NilpotentOperator> {
    if jt.is_empty() {
        return Err(Error::InconsistentInput("empty Jordan type on V".into()));
    }
    Ok(NilpotentOperator {
        matrix: shift_matrix(jt, p),
        basis_labels: natural_labels(jt),
        module: ModuleSpec::NaturalV,
        element,
        source: jt.clone(),
    })
}

fn group_element(op: &NilpotentOperator) -> Result<GFpMatrix> {
    op.matrix.add(&GFpMatrix::identity(op.p(), op.dim()))
}

fn minus_identity(m: GFpMatrix) -> Result<GFpMatrix> {
    let id = GFpMatrix::identity(m.p(), m.rows());
    m.sub(&id)
}

fn tensor_labels(labels: &[String], dual: bool) -> Vec<String> {
    let star = if dual { "*" } else { "" };
    labels
        .iter()
        .flat_map(|a| labels.iter().map(move |b| format!("{a}⊗{b}{star}")))
        .collect()
}

/// Action on `V ⊗ V*` (equivalently `gl(V)`).
pub fn lift_to_tensor_vvdual(op: &NilpotentOperator) -> Result<NilpotentOperator> {
    lift_to_tensor(op, true, ModuleSpec::TensorVVdual)
}

/// Action on `gl(V)`, the same matrix as on `V ⊗ V*` tagged as `gl`.
pub fn lift_to_gl(op: &NilpotentOperator) -> Result<NilpotentOperator> {
    lift_to_tensor(op, true, ModuleSpec::GL)
}

/// Action on `V ⊗ V`.
pub fn lift_to_tensor_vv(op: &NilpotentOperator) -> Result<NilpotentOperator> {
    lift_to_tensor(op, false, ModuleSpec::TensorVV)
}

fn lift_to_tensor(
    op: &NilpotentOperator,
    dual: bool,
    module: ModuleSpec,
) -> Result<NilpotentOperator> {
    op.expect_module(&[ModuleSpec::NaturalV], "tensor lift")?;
    let p = op.p();
    let n = op.dim();
    let id = GFpMatrix::identity(p, n);
    let matrix = match op.element {
        Element::Nilpotent => {
            let x = &op.matrix;
            let y = if dual { x.transpose().neg() } else { x.clone() };
            x.kron(&id)?.add(&id.kron(&y)?)?
        }
        Element::Unipotent => {
            let u = group_element(op)?;
            let w = if dual {
                u.inverse()?.transpose()
            } else {
                u.clone()
            };
            minus_identity(u.kron(&w)?)?
        }
    };
    Ok(op.derived(matrix, tensor_labels(&op.basis_labels, dual), module))
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum SquareKind {
    Wedge,
    Sym,
}

struct PairIndex {
    n: usize,
    kind: SquareKind,
    index: Vec<Option<usize>>,
    pairs: Vec<(usize, usize)>,
}

impl PairIndex {
    fn new(n: usize, kind: SquareKind) -> Self {
        let mut index = vec![None; n * n];
        let mut pairs = Vec::new();
        for i in 0..n {
            let start = if kind == SquareKind::Wedge { i + 1 } else { i };
            for j in start..n {
                index[i * n + j] = Some(pairs.len());
                pairs.push((i, j));
            }
        }
        PairIndex {
            n,
            kind,
            index,
            pairs,
        }
    }

    /// Basis index and sign of the product `v_k v_l` (or `v_k ∧ v_l`).
    fn locate(&self, k: usize, l: usize) -> Option<(usize, i64)> {
        match self.kind {
            SquareKind::Wedge if k == l => None,
            SquareKind::Wedge if k > l => Some((self.index[l * self.n + k]?, -1)),
            SquareKind::Sym if k > l => Some((self.index[l * self.n + k]?, 1)),
            _ => Some((self.index[k * self.n + l]?, 1)),
        }
    }
}

fn lift_to_square(op: &NilpotentOperator, kind: SquareKind) -> Result<NilpotentOperator> {
    op.expect_module(&[ModuleSpec::NaturalV], "square lift")?;
    let p = op.p();
    let n = op.dim();
    let idx = PairIndex::new(n, kind);
    let dim = idx.pairs.len();
    let mut out = GFpMatrix::zeros(p, dim, dim);
    let coeff = |m: &GFpMatrix, k: usize, i: usize| m.get(k, i) as i64;
    match op.element {
        Element::Nilpotent => {
            let x = &op.matrix;
            for (col, &(i, j)) in idx.pairs.iter().enumerate() {
                for k in 0..n {
                    // x v_i ⊗ v_j + v_i ⊗ x v_j
                    for (a, b, c) in [(k, j, coeff(x, k, i)), (i, k, coeff(x, k, j))] {
                        if c == 0 {
                            continue;
                        }
                        if let Some((row, sign)) = idx.locate(a, b) {
                            out.add_to(row, col, sign * c);
                        }
                    }
                }
            }
        }
        Element::Unipotent => {
            let u = group_element(op)?;
            for (col, &(i, j)) in idx.pairs.iter().enumerate() {
                for k in 0..n {
                    let a = coeff(&u, k, i);
                    if a == 0 {
                        continue;
                    }
                    for l in 0..n {
                        let b = coeff(&u, l, j);
                        if b == 0 {
                            continue;
                        }
                        if let Some((row, sign)) = idx.locate(k, l) {
                            out.add_to(row, col, sign * a * b);
                        }
                    }
                }
            }
            out = minus_identity(out)?;
        }
    }
    let sep = if kind == SquareKind::Wedge {
        "∧"
    } else {
        "·"
    };
    let labels = idx
        .pairs
        .iter()
        .map(|&(i, j)| format!("{}{sep}{}", op.basis_labels[i], op.basis_labels[j]))
        .collect();
    let module = match kind {
        SquareKind::Wedge => ModuleSpec::Wedge2,
        SquareKind::Sym => ModuleSpec::Sym2,
    };
    Ok(op.derived(out, labels, module))
}

/// Action on `∧²V`.
pub fn lift_to_wedge2(op: &NilpotentOperator) -> Result<NilpotentOperator> {
    if op.dim() < 2 {
        return Err(Error::Shape("∧²V needs dim V >= 2".into()));
    }
    lift_to_square(op, SquareKind::Wedge)
}

/// Action on `S²V` (the symmetric power, monomial basis).
pub fn lift_to_sym2(op: &NilpotentOperator) -> Result<NilpotentOperator> {
    lift_to_square(op, SquareKind::Sym)
}

/// Coordinates in the `Ker φ` basis of a trace-zero vector of `V ⊗ V*`.
fn sl_coordinates(x: &[u32], n: usize, p: Prime) -> Result<Vec<u32>> {
    let pm = p.get() as u64;
    let mut out = Vec::with_capacity(n * n - 1);
    let mut running = 0u64;
    for i in 0..n {
        for j in 0..n {
            let v = x[i * n + j];
            if i != j {
                out.push(v);
            } else {
                running = (running + v as u64) % pm;
                if i + 1 < n {
                    out.push(running as u32);
                } else if running != 0 {
                    return Err(Error::NotInvariant);
                }
            }
        }
    }
    Ok(out)
}

/// The `Ker φ` basis as vectors of `V ⊗ V*`, in basis order.
fn sl_basis(n: usize, p: Prime) -> Vec<Vec<u32>> {
    let minus_one = p.get() - 1;
    let mut basis = Vec::with_capacity(n * n - 1);
    for i in 0..n {
        for j in 0..n {
            let mut v = vec![0u32; n * n];
            if i != j {
                v[i * n + j] = 1;
            } else if i + 1 < n {
                v[i * n + i] = 1;
                v[(i + 1) * n + i + 1] = minus_one;
            } else {
                continue;
            }
            basis.push(v);
        }
    }
    basis
}

/// Restricts an operator on `V ⊗ V*` to `sl(V) = Ker φ`, where
/// `φ(v ⊗ f) = f(v)`.
pub fn restrict_to_sl(op: &NilpotentOperator) -> Result<NilpotentOperator> {
    op.expect_module(
        &[ModuleSpec::TensorVVdual, ModuleSpec::GL],
        "restrict_to_sl",
    )?;
    let n = op.natural_dim();
    let p = op.p();
    let basis = sl_basis(n, p);
    let mut out = GFpMatrix::zeros(p, basis.len(), basis.len());
    for (col, b) in basis.iter().enumerate() {
        let image = sl_coordinates(&op.matrix.apply(b), n, p)?;
        for (row, &c) in image.iter().enumerate() {
            if c != 0 {
                out.set(row, col, c as i64);
            }
        }
    }
    let labels: Vec<String> = {
        let v = &op.basis_labels;
        let nat: Vec<&str> = v.iter().step_by(n + 1).map(String::as_str).collect();
        let mut out = Vec::with_capacity(n * n - 1);
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    out.push(v[i * n + j].clone());
                } else if i + 1 < n {
                    out.push(format!("{} - {}", nat[i], nat[i + 1]));
                }
            }
        }
        out
    };
    Ok(op.derived(out, labels, ModuleSpec::SL))
}

/// Coordinates of `γ = Σ v_i ⊗ v_i^*` in the `sl` basis (needs `p | n`).
pub fn gamma_in_sl_basis(n: usize, p: Prime) -> Result<Vec<u32>> {
    sl_coordinates(&gamma_vector(n), n, p)
}

/// `γ` in the `V ⊗ V*` basis.
pub fn gamma_vector(n: usize) -> Vec<u32> {
    let mut g = vec![0u32; n * n];
    for i in 0..n {
        g[i * n + i] = 1;
    }
    g
}

/// Passes to the quotient of an operator by an invariant vector `g`
/// annihilated by it. The dropped basis vector is the last coordinate
/// where `g` is nonzero.
fn quotient_by_vector(op: &GFpMatrix, g: &[u32]) -> Result<(GFpMatrix, usize)> {
    let p = op.p();
    let pm = p.get() as u64;
    if op.apply(g).iter().any(|&x| x != 0) {
        return Err(Error::NotInvariant);
    }
    let q = g.iter().rposition(|&x| x != 0).ok_or(Error::NotInvariant)?;
    let gq_inv = crate::gfp::inv_mod(g[q], p.get()) as u64;
    let dim = op.rows();
    let keep: Vec<usize> = (0..dim).filter(|&k| k != q).collect();
    let mut out = GFpMatrix::zeros(p, dim - 1, dim - 1);
    for (col, &k) in keep.iter().enumerate() {
        let y = op.column(k);
        let f = y[q] as u64 * gq_inv % pm;
        for (row, &r) in keep.iter().enumerate() {
            let v = (y[r] as u64 + (pm - f) * g[r] as u64) % pm;
            if v != 0 {
                out.set(row, col, v as i64);
            }
        }
    }
    Ok((out, q))
}

/// Action on `psl(V) = Ker φ / <γ>`. Only defined when `p | n`; otherwise
/// `psl(V) ≅ sl(V)`.
pub fn quotient_by_gamma(op: &NilpotentOperator) -> Result<NilpotentOperator> {
    op.expect_module(&[ModuleSpec::SL], "quotient_by_gamma")?;
    let n = op.natural_dim();
    let p = op.p();
    if !p.divides(n) {
        return Err(Error::PslEqualsSl);
    }
    let gamma = gamma_in_sl_basis(n, p)?;
    let (matrix, dropped) = quotient_by_vector(&op.matrix, &gamma)?;
    let labels = op
        .basis_labels
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != dropped)
        .map(|(_, l)| l.clone())
        .collect();
    Ok(op.derived(matrix, labels, ModuleSpec::PSL))
}

/// The vectors `γ`, `δ_β` and `δ'_β` of `V ⊗ V*` for the standard
/// operator with Jordan type `jt`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistinguishedVectors {
    pub beta: u32,
    pub gamma: Vec<u32>,
    /// `Σ_r Σ_j v_{(j+1)p^β}^{(r)} ⊗ v_{jp^β+1}^{(r)*}`; `e^{p^β-1} δ = γ`.
    pub delta: Vec<u32>,
    /// `Σ_j v_{jp^β}^{(r')} ⊗ v_{jp^β}^{(r')*}` inside block `r'`;
    /// `e^{p^β} δ' = 0`.
    pub delta_prime: Vec<u32>,
    /// Index (0-based, basis order) of the block `r'` carrying `δ'_β`:
    /// the first block of minimal `p`-adic valuation.
    pub delta_prime_block: usize,
}

pub fn build_distinguished_vectors(
    jt: &JordanType,
    p: Prime,
    beta: u32,
) -> Result<DistinguishedVectors> {
    let blocks = block_layout(jt);
    if blocks.is_empty() {
        return Err(Error::InconsistentInput("empty Jordan type on V".into()));
    }
    let step = p.pow(beta);
    if let Some(&d) = blocks.iter().find(|&&d| d % step != 0) {
        return Err(Error::Divisibility(format!(
            "p^beta = {step} does not divide block size {d}"
        )));
    }
    let n = jt.total_dim();
    let mut delta = vec![0u32; n * n];
    let mut delta_prime = vec![0u32; n * n];
    let delta_prime_block = blocks
        .iter()
        .enumerate()
        .min_by_key(|&(r, &d)| (valuation(d, p), r))
        .map(|(r, _)| r)
        .unwrap();
    let mut offset = 0;
    for (r, &d) in blocks.iter().enumerate() {
        // 1-based position j in the block sits at offset + j - 1
        let at = |i: usize, j: usize| (offset + i - 1) * n + offset + j - 1;
        for j in 0..d / step {
            delta[at((j + 1) * step, j * step + 1)] = 1;
            if r == delta_prime_block {
                delta_prime[at((j + 1) * step, (j + 1) * step)] = 1;
            }
        }
        offset += d;
    }
    Ok(DistinguishedVectors {
        beta,
        gamma: gamma_vector(n),
        delta,
        delta_prime,
        delta_prime_block,
    })
}

/// Sparse action of the standard nilpotent `e` of Jordan type `jt` on
/// `V ⊗ V*`, for spaces too large for dense matrices.
#[derive(Debug, Clone)]
pub struct TensorAction {
    n: usize,
    p: Prime,
    /// For each basis index of `V`: whether `e v_i = v_{i-1}` (not first in block).
    has_prev: Vec<bool>,
    /// Whether `e·v_j^* = -v_{j+1}^*` (not last in block).
    has_next: Vec<bool>,
}

impl TensorAction {
    pub fn new(jt: &JordanType, p: Prime) -> Self {
        let n = jt.total_dim();
        let mut has_prev = vec![false; n];
        let mut has_next = vec![false; n];
        let mut offset = 0;
        for d in block_layout(jt) {
            for j in 0..d {
                has_prev[offset + j] = j > 0;
                has_next[offset + j] = j + 1 < d;
            }
            offset += d;
        }
        TensorAction {
            n,
            p,
            has_prev,
            has_next,
        }
    }

    pub fn dim(&self) -> usize {
        self.n * self.n
    }

    pub fn apply(&self, x: &[u32]) -> Vec<u32> {
        let n = self.n;
        let p = self.p.get();
        let mut out = vec![0u32; n * n];
        for i in 0..n {
            for j in 0..n {
                let c = x[i * n + j];
                if c == 0 {
                    continue;
                }
                if self.has_prev[i] {
                    let t = &mut out[(i - 1) * n + j];
                    *t = (*t + c) % p;
                }
                if self.has_next[j] {
                    let t = &mut out[i * n + j + 1];
                    *t = (*t + p - c) % p;
                }
            }
        }
        out
    }

    pub fn apply_pow(&self, x: &[u32], k: usize) -> Vec<u32> {
        (0..k).fold(x.to_vec(), |v, _| self.apply(&v))
    }
}

/// `φ(x) = Σ x_{ii}`, reduced mod `p`.
pub fn trace_functional(x: &[u32], n: usize, p: Prime) -> u32 {
    (0..n).fold(0u64, |s, i| (s + x[i * n + i] as u64) % p.get() as u64) as u32
}

/// A nilpotent `X` with Jordan type `jt` preserving a nondegenerate form
/// `B` (`Xᵀ B + B X = 0`), alternating for Sp and symmetric for SO.
///
/// Pairs `J_d ⊕ J_d` become hyperbolic pairs `diag(J, -Jᵀ)`; a lone block
/// carries the antidiagonal form `B_{i, d-1-i} = (-1)^i`, which is
/// alternating for even `d` and symmetric for odd `d`.
pub fn admissible_witness(
    jt: &JordanType,
    family: Family,
    p: Prime,
) -> Result<(GFpMatrix, GFpMatrix)> {
    let symmetric = match family {
        Family::Sp => false,
        Family::SO => true,
        Family::SL => {
            return Err(Error::InvalidGroup(
                "witness forms exist only for Sp and SO".into(),
            ))
        }
    };
    if p.get() == 2 {
        return Err(Error::BadCharacteristic(2, family.to_string()));
    }
    let n = jt.total_dim();
    let mut x = GFpMatrix::zeros(p, n, n);
    let mut b = GFpMatrix::zeros(p, n, n);
    let mut offset = 0;
    for (d, m) in jt.iter() {
        let lone_ok = (d % 2 == 1) == symmetric;
        let pairs = if lone_ok { 0 } else { m / 2 };
        if !lone_ok && m % 2 != 0 {
            return Err(Error::Inadmissible {
                partition: jt.to_string(),
                group: family.to_string(),
            });
        }
        for _ in 0..pairs {
            // W ⊕ W', X = diag(J, -Jᵀ), B = [[0, I], [±I, 0]]
            for j in 1..d {
                x.set(offset + j - 1, offset + j, 1);
                x.set(offset + d + j, offset + d + j - 1, -1);
            }
            for i in 0..d {
                b.set(offset + i, offset + d + i, 1);
                b.set(offset + d + i, offset + i, if symmetric { 1 } else { -1 });
            }
            offset += 2 * d;
        }
        if lone_ok {
            for _ in 0..m {
                for j in 1..d {
                    x.set(offset + j - 1, offset + j, 1);
                }
                for i in 0..d {
                    b.set(
                        offset + i,
                        offset + d - 1 - i,
                        if i % 2 == 0 { 1 } else { -1 },
                    );
                }
                offset += d;
            }
        }
    }
    Ok((x, b))
}

/// Jordan types computed from explicit matrices for one element on the
/// modules of one group, with the intermediate operators shared.
pub struct Oracle {
    jt: JordanType,
    ctx: GroupContext,
    element: Element,
    v: NilpotentOperator,
    gl: OnceCell<Result<NilpotentOperator>>,
    sl: OnceCell<Result<NilpotentOperator>>,
    types: std::cell::RefCell<std::collections::BTreeMap<ModuleSpec, Result<JordanType>>>,
}

impl Oracle {
    pub fn new(element: Element, jt: &JordanType, ctx: &GroupContext) -> Result<Self> {
        if !validate_partition_for_group(jt, ctx)? {
            return Err(Error::Inadmissible {
                partition: jt.to_string(),
                group: ctx.to_string(),
            });
        }
        Ok(Oracle {
            jt: jt.clone(),
            ctx: *ctx,
            element,
            v: build_on_v(element, jt, ctx.p())?,
            gl: OnceCell::new(),
            sl: OnceCell::new(),
            types: Default::default(),
        })
    }

    fn gl_op(&self) -> Result<&NilpotentOperator> {
        self.gl
            .get_or_init(|| lift_to_gl(&self.v))
            .as_ref()
            .map_err(Clone::clone)
    }

    fn sl_op(&self) -> Result<&NilpotentOperator> {
        self.sl
            .get_or_init(|| restrict_to_sl(self.gl_op()?))
            .as_ref()
            .map_err(Clone::clone)
    }

    pub fn jordan_type(&self, module: ModuleSpec) -> Result<JordanType> {
        if let Some(r) = self.types.borrow().get(&module) {
            return r.clone();
        }
        let r = self.compute(module);
        self.types.borrow_mut().insert(module, r.clone());
        r
    }

    fn compute(&self, module: ModuleSpec) -> Result<JordanType> {
        module.check_compatible(&self.ctx)?;
        let decomposition = |a: ModuleSpec, b: ModuleSpec| -> Result<JordanType> {
            self.jordan_type(a)?
                .diff(&self.jordan_type(b)?)
                .map_err(|e| Error::DecompositionViolated(format!("{module} = {a} - {b}: {e}")))
        };
        match module {
            ModuleSpec::NaturalV => self.v.jordan_type(),
            ModuleSpec::TensorVVdual => self.jordan_type(ModuleSpec::GL),
            ModuleSpec::GL => self.gl_op()?.jordan_type(),
            ModuleSpec::TensorVV => lift_to_tensor_vv(&self.v)?.jordan_type(),
            ModuleSpec::Wedge2 => lift_to_wedge2(&self.v)?.jordan_type(),
            ModuleSpec::Sym2 => lift_to_sym2(&self.v)?.jordan_type(),
            ModuleSpec::SL => self.sl_op()?.jordan_type(),
            ModuleSpec::PSL => {
                if self.ctx.p().divides(self.ctx.n()) {
                    quotient_by_gamma(self.sl_op()?)?.jordan_type()
                } else {
                    self.jordan_type(ModuleSpec::SL)
                }
            }
            ModuleSpec::LOmega2Sp => decomposition(ModuleSpec::PSL, ModuleSpec::Sym2),
            ModuleSpec::L2Omega1SO => decomposition(ModuleSpec::PSL, ModuleSpec::Wedge2),
            // pgl(V) ≅ sl(V)* has the same block sizes as sl(V)
            ModuleSpec::Adjoint(Isogeny::SimplyConnected | Isogeny::Adjoint) => {
                self.jordan_type(ModuleSpec::SL)
            }
            ModuleSpec::Adjoint(Isogeny::Intermediate) => Ok(self
                .jordan_type(ModuleSpec::PSL)?
                .sum(&JordanType::from_sizes([1]))),
        }
    }

    pub fn source(&self) -> &JordanType {
        &self.jt
    }

    pub fn element(&self) -> Element {
        self.element
    }
}

/// Jordan type of the nilpotent element with type `jt` on `module`,
/// computed from explicit matrices.
pub fn oracle_type(jt: &JordanType, ctx: &GroupContext, module: ModuleSpec) -> Result<JordanType> {
    Oracle::new(Element::Nilpotent, jt, ctx)?.jordan_type(module)
}

/// As [`oracle_type`] for either element kind.
pub fn oracle_type_for(
    element: Element,
    jt: &JordanType,
    ctx: &GroupContext,
    module: ModuleSpec,
) -> Result<JordanType> {
    Oracle::new(element, jt, ctx)?.jordan_type(module)
}
