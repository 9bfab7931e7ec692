use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use nalgebra::DMatrix;

use super::HilbertLayout;
use crate::{Error, Result, C64};

/// Tolerance below which `A − A†` counts as zero.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Dense complex operator on a composite Hilbert space.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    layout: HilbertLayout,
    matrix: DMatrix<C64>,
}

impl Operator {
    pub fn new(layout: HilbertLayout, matrix: DMatrix<C64>) -> Result<Self> {
        let n = layout.total();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: matrix.nrows().max(matrix.ncols()),
            });
        }
        Ok(Self { layout, matrix })
    }

    /// Wraps a square matrix as a single-subsystem operator.
    pub fn from_matrix(matrix: DMatrix<C64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::InvalidArgument(format!(
                "operator must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let layout = HilbertLayout::single(matrix.nrows())?;
        Ok(Self { layout, matrix })
    }

    pub fn identity(layout: &HilbertLayout) -> Self {
        let n = layout.total();
        Self { layout: layout.clone(), matrix: DMatrix::identity(n, n) }
    }

    pub fn zeros(layout: &HilbertLayout) -> Self {
        let n = layout.total();
        Self { layout: layout.clone(), matrix: DMatrix::zeros(n, n) }
    }

    pub fn diagonal(layout: &HilbertLayout, diag: &[C64]) -> Result<Self> {
        if diag.len() != layout.total() {
            return Err(Error::DimensionMismatch { expected: layout.total(), found: diag.len() });
        }
        let mut m = DMatrix::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        Ok(Self { layout: layout.clone(), matrix: m })
    }

    pub fn layout(&self) -> &HilbertLayout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.matrix[(row, col)]
    }

    /// Relabels the subsystem structure; the total dimension must agree.
    pub fn with_layout(self, layout: HilbertLayout) -> Result<Self> {
        Self::new(layout, self.matrix)
    }

    pub fn adjoint(&self) -> Self {
        Self { layout: self.layout.clone(), matrix: self.matrix.adjoint() }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { layout: self.layout.clone(), matrix: &self.matrix * s }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn commutator(&self, other: &Operator) -> Operator {
        let m = &self.matrix * &other.matrix - &other.matrix * &self.matrix;
        Self { layout: self.layout.clone(), matrix: m }
    }

    pub fn anticommutator(&self, other: &Operator) -> Operator {
        let m = &self.matrix * &other.matrix + &other.matrix * &self.matrix;
        Self { layout: self.layout.clone(), matrix: m }
    }

    /// Largest entry magnitude of `self − other`.
    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        self.matrix
            .iter()
            .zip(other.matrix.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Induced 1-norm (maximum absolute column sum).
    pub fn one_norm(&self) -> f64 {
        self.matrix
            .column_iter()
            .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Frobenius inner product `Tr(self† other)`.
    pub fn inner(&self, other: &Operator) -> C64 {
        self.matrix
            .iter()
            .zip(other.matrix.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn hermiticity_error(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_error() < HERMITIAN_TOL
    }

    pub fn is_finite(&self) -> bool {
        self.matrix.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Eigenvalues of a Hermitian operator, ascending.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self.matrix.clone().symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// `exp(scale·A)` by scaling and squaring of a Taylor series.
    pub fn exp(&self, scale: C64) -> Result<Operator> {
        matrix_exponential(self, scale)
    }
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        assert_eq!(self.dim(), rhs.dim(), "operator dimension mismatch");
        Operator { layout: self.layout.clone(), matrix: &self.matrix + &rhs.matrix }
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        assert_eq!(self.dim(), rhs.dim(), "operator dimension mismatch");
        Operator { layout: self.layout.clone(), matrix: &self.matrix - &rhs.matrix }
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        assert_eq!(self.dim(), rhs.dim(), "operator dimension mismatch");
        Operator { layout: self.layout.clone(), matrix: &self.matrix * &rhs.matrix }
    }
}

impl Neg for &Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        Operator { layout: self.layout.clone(), matrix: -&self.matrix }
    }
}

/// Kronecker product of the factors in order; the layout concatenates theirs.
pub fn tensor(factors: &[&Operator]) -> Result<Operator> {
    let (first, rest) = factors
        .split_first()
        .ok_or_else(|| Error::InvalidArgument("tensor of an empty factor list".into()))?;
    let mut layout = first.layout.clone();
    let mut matrix = first.matrix.clone();
    for f in rest {
        layout = layout.concat(&f.layout);
        matrix = matrix.kronecker(&f.matrix);
    }
    Ok(Operator { layout, matrix })
}

/// Places a single-subsystem operator at `slot` of `layout`, identity elsewhere.
pub fn embed(op: &Operator, slot: usize, layout: &HilbertLayout) -> Result<Operator> {
    if slot >= layout.subsystems() {
        return Err(Error::Layout(format!("slot {slot} out of range")));
    }
    if op.dim() != layout.dim(slot) {
        return Err(Error::DimensionMismatch { expected: layout.dim(slot), found: op.dim() });
    }
    let left: usize = layout.dims()[..slot].iter().product();
    let right: usize = layout.dims()[slot + 1..].iter().product();
    let m = DMatrix::<C64>::identity(left, left)
        .kronecker(&op.matrix)
        .kronecker(&DMatrix::<C64>::identity(right, right));
    Operator::new(layout.clone(), m)
}

/// Truncated annihilation operator with `a|n⟩ = √n |n−1⟩`.
pub fn ladder(dim: usize) -> Result<Operator> {
    if dim < 2 {
        return Err(Error::InvalidArgument(format!("ladder operator needs dim >= 2, got {dim}")));
    }
    let mut m = DMatrix::zeros(dim, dim);
    for n in 1..dim {
        m[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    Operator::from_matrix(m)
}

/// Number operator `a†a` on a single mode.
pub fn number(dim: usize) -> Result<Operator> {
    let diag: Vec<C64> = (0..dim).map(|n| C64::new(n as f64, 0.0)).collect();
    Operator::diagonal(&HilbertLayout::single(dim)?, &diag)
}

/// Single-qubit operators in the basis (|e⟩, |g⟩) with σᶻ|e⟩ = +|e⟩.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
    /// σ⁺ = |e⟩⟨g|
    Plus,
    /// σ⁻ = |g⟩⟨e|
    Minus,
}

impl Pauli {
    pub fn matrix(self) -> DMatrix<C64> {
        let o = C64::new(0.0, 0.0);
        let l = C64::new(1.0, 0.0);
        let i = C64::new(0.0, 1.0);
        let e = match self {
            Pauli::I => [l, o, o, l],
            Pauli::X => [o, l, l, o],
            Pauli::Y => [o, -i, i, o],
            Pauli::Z => [l, o, o, -l],
            Pauli::Plus => [o, l, o, o],
            Pauli::Minus => [o, o, l, o],
        };
        DMatrix::from_row_slice(2, 2, &e)
    }

    pub fn operator(self) -> Operator {
        Operator::from_matrix(self.matrix()).expect("2x2 is square")
    }
}

/// Pauli operator acting on qubit `qubit` (0 or 1) of `layout`.
pub fn qubit_op(p: Pauli, qubit: usize, layout: &HilbertLayout) -> Result<Operator> {
    if !layout.has_qubit_pair() || qubit > 1 {
        return Err(Error::Layout(format!("qubit {qubit} not present in layout {:?}", layout.dims())));
    }
    embed(&p.operator(), qubit, layout)
}

/// Annihilation operator of the bosonic mode at `slot`.
pub fn mode_op(slot: usize, layout: &HilbertLayout) -> Result<Operator> {
    let a = ladder(layout.dims().get(slot).copied().unwrap_or(0))?;
    embed(&a, slot, layout)
}

/// Axes of the collective spin `S = σ₁ + σ₂`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpinAxis {
    X,
    Y,
    Z,
    Plus,
    Minus,
    /// ½(S_z + iS_x)
    DressedPlus,
    /// ½(S_z − iS_x)
    DressedMinus,
}

impl FromStr for SpinAxis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "x" => SpinAxis::X,
            "y" => SpinAxis::Y,
            "z" => SpinAxis::Z,
            "+" | "plus" => SpinAxis::Plus,
            "-" | "minus" => SpinAxis::Minus,
            "x~+" | "dressed+" => SpinAxis::DressedPlus,
            "x~-" | "dressed-" => SpinAxis::DressedMinus,
            other => return Err(Error::InvalidArgument(format!("invalid spin axis `{other}`"))),
        })
    }
}

impl fmt::Display for SpinAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SpinAxis::X => "x",
            SpinAxis::Y => "y",
            SpinAxis::Z => "z",
            SpinAxis::Plus => "+",
            SpinAxis::Minus => "-",
            SpinAxis::DressedPlus => "x~+",
            SpinAxis::DressedMinus => "x~-",
        };
        f.write_str(s)
    }
}

/// Collective spin operator on the qubit pair of `layout`.
pub fn collective_spin(axis: SpinAxis, layout: &HilbertLayout) -> Result<Operator> {
    let sum = |p: Pauli| -> Result<Operator> {
        Ok(&qubit_op(p, 0, layout)? + &qubit_op(p, 1, layout)?)
    };
    let half = C64::new(0.5, 0.0);
    let i = C64::new(0.0, 1.0);
    match axis {
        SpinAxis::X => sum(Pauli::X),
        SpinAxis::Y => sum(Pauli::Y),
        SpinAxis::Z => sum(Pauli::Z),
        SpinAxis::Plus => sum(Pauli::Plus),
        SpinAxis::Minus => sum(Pauli::Minus),
        SpinAxis::DressedPlus => Ok((&sum(Pauli::Z)? + &sum(Pauli::X)?.scale(i)).scale(half)),
        SpinAxis::DressedMinus => Ok((&sum(Pauli::Z)? - &sum(Pauli::X)?.scale(i)).scale(half)),
    }
}

/// `exp(scale·A)` to about 1e-14 relative accuracy.
///
/// The argument is scaled by 2⁻ˢ until its 1-norm is below ½, a Taylor series
/// is summed until terms drop under machine precision, and the result is
/// squared `s` times.
pub fn matrix_exponential(a: &Operator, scale: C64) -> Result<Operator> {
    if !a.is_finite() || !scale.re.is_finite() || !scale.im.is_finite() {
        return Err(Error::NonFinite("matrix exponential argument"));
    }
    let x = &a.matrix * scale;
    let n = x.nrows();
    let norm = Operator { layout: a.layout.clone(), matrix: x.clone() }.one_norm();
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let x = x * C64::new(2f64.powi(-squarings), 0.0);

    let mut result = DMatrix::<C64>::identity(n, n);
    let mut term = DMatrix::<C64>::identity(n, n);
    for k in 1..40 {
        term = &term * &x * C64::new(1.0 / k as f64, 0.0);
        result += &term;
        let tn = term.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if tn < 1e-18 {
            break;
        }
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    let out = Operator { layout: a.layout.clone(), matrix: result };
    if !out.is_finite() {
        return Err(Error::NonFinite("matrix exponential result"));
    }
    Ok(out)
}
