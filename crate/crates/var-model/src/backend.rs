//! Evaluation backends.
//!
//! All model code is generic over [`FpBackend`]; the same operation
//! sequence then runs as direct p-bit arithmetic ([`FpDirect`]), as a
//! recorded scalar-op trace ([`TraceBackend`]), or as a circuit under
//! construction (the compiler crate's backend). That shared sequence is
//! what makes the compiled netlist bit-exact against the reference by
//! construction rather than by coincidence.

use crate::error::{ModelError, ModelResult};
use std::collections::VecDeque;
use tcvar_fp::{
    fp_add, fp_div_total, fp_exp, fp_iter_add, fp_mul, fp_sqrt_total, FpNum, Precision,
};

pub trait FpBackend {
    /// A p-bit scalar value (a number, a trace node, or a wire bundle).
    type V: Clone;
    /// A one-hot selector over a small index alphabet.
    type Sel: Clone;

    fn precision(&self) -> Precision;
    fn constant(&mut self, x: FpNum) -> Self::V;
    /// Pulls the next scalar model input, in the documented layout order.
    fn next_scalar_input(&mut self) -> ModelResult<Self::V>;
    /// Pulls the next token-index input over `arity` codebook rows.
    fn next_onehot_input(&mut self, arity: usize) -> ModelResult<Self::Sel>;

    fn neg(&mut self, a: &Self::V) -> Self::V;
    fn add(&mut self, a: &Self::V, b: &Self::V) -> ModelResult<Self::V>;
    fn mul(&mut self, a: &Self::V, b: &Self::V) -> ModelResult<Self::V>;
    /// Total division: a zero divisor yields the saturated fallback value
    /// (callers guard with `check_nonzero` where the contract demands an
    /// error).
    fn div_total(&mut self, a: &Self::V, b: &Self::V) -> ModelResult<Self::V>;
    fn iter_add(&mut self, xs: &[Self::V]) -> ModelResult<Self::V>;
    fn exp(&mut self, a: &Self::V) -> ModelResult<Self::V>;
    fn sqrt_total(&mut self, a: &Self::V) -> ModelResult<Self::V>;
    /// if_zero when the scrutinee is exactly zero, else if_nonzero. Both
    /// branches are already evaluated; this is a select, not control flow.
    fn choose_on_zero(
        &mut self,
        scrut: &Self::V,
        if_zero: &Self::V,
        if_nonzero: &Self::V,
    ) -> ModelResult<Self::V>;
    /// Reference-side guard for division hazards; circuit backends let the
    /// select above produce the fallback instead.
    fn check_nonzero(&mut self, v: &Self::V, err: ModelError) -> ModelResult<()>;
    /// Row lookup by one-hot selector; rows are constants.
    fn select_row(&mut self, sel: &Self::Sel, rows: &[Vec<FpNum>]) -> ModelResult<Vec<Self::V>>;
}

/// Concrete model inputs for the evaluating backends.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelInputs {
    pub scalars: Vec<FpNum>,
    pub tokens: Vec<usize>,
}

/// Direct evaluation in exact p-bit arithmetic.
pub struct FpDirect {
    p: Precision,
    scalars: VecDeque<FpNum>,
    tokens: VecDeque<usize>,
}

impl FpDirect {
    pub fn new(p: Precision, inputs: ModelInputs) -> Self {
        FpDirect {
            p,
            scalars: inputs.scalars.into(),
            tokens: inputs.tokens.into(),
        }
    }

    /// Backend for parameter-only computations (no inputs).
    pub fn closed(p: Precision) -> Self {
        FpDirect {
            p,
            scalars: VecDeque::new(),
            tokens: VecDeque::new(),
        }
    }
}

impl FpBackend for FpDirect {
    type V = FpNum;
    type Sel = usize;

    fn precision(&self) -> Precision {
        self.p
    }

    fn constant(&mut self, x: FpNum) -> FpNum {
        assert_eq!(x.precision(), self.p);
        x
    }

    fn next_scalar_input(&mut self) -> ModelResult<FpNum> {
        self.scalars
            .pop_front()
            .ok_or(ModelError::InputsExhausted("scalar"))
    }

    fn next_onehot_input(&mut self, arity: usize) -> ModelResult<usize> {
        let ix = self
            .tokens
            .pop_front()
            .ok_or(ModelError::InputsExhausted("token"))?;
        if ix >= arity {
            return Err(ModelError::IndexOutOfRange(ix, arity));
        }
        Ok(ix)
    }

    fn neg(&mut self, a: &FpNum) -> FpNum {
        a.neg()
    }

    fn add(&mut self, a: &FpNum, b: &FpNum) -> ModelResult<FpNum> {
        Ok(fp_add(a, b))
    }

    fn mul(&mut self, a: &FpNum, b: &FpNum) -> ModelResult<FpNum> {
        Ok(fp_mul(a, b))
    }

    fn div_total(&mut self, a: &FpNum, b: &FpNum) -> ModelResult<FpNum> {
        Ok(fp_div_total(a, b).num)
    }

    fn iter_add(&mut self, xs: &[FpNum]) -> ModelResult<FpNum> {
        Ok(fp_iter_add(xs)?)
    }

    fn exp(&mut self, a: &FpNum) -> ModelResult<FpNum> {
        Ok(fp_exp(a).num)
    }

    fn sqrt_total(&mut self, a: &FpNum) -> ModelResult<FpNum> {
        Ok(fp_sqrt_total(a).num)
    }

    fn choose_on_zero(
        &mut self,
        scrut: &FpNum,
        if_zero: &FpNum,
        if_nonzero: &FpNum,
    ) -> ModelResult<FpNum> {
        Ok(if scrut.is_zero() { *if_zero } else { *if_nonzero })
    }

    fn check_nonzero(&mut self, v: &FpNum, err: ModelError) -> ModelResult<()> {
        if v.is_zero() {
            return Err(err);
        }
        Ok(())
    }

    fn select_row(&mut self, sel: &usize, rows: &[Vec<FpNum>]) -> ModelResult<Vec<FpNum>> {
        rows.get(*sel)
            .cloned()
            .ok_or(ModelError::IndexOutOfRange(*sel, rows.len()))
    }
}

/// Recorded scalar-operation trace: node ids plus an op list. Replaying the
/// list through the scalar reference reproduces the model output exactly;
/// the trace is also the compiler's specification of evaluation order.
#[derive(Debug, Clone)]
pub enum TraceOp {
    Const(FpNum),
    Input,
    Neg(usize),
    Add(usize, usize),
    Mul(usize, usize),
    DivTotal(usize, usize),
    IterAdd(Vec<usize>),
    Exp(usize),
    SqrtTotal(usize),
    ChooseOnZero(usize, usize, usize),
    /// Codebook entry pick: the token index is part of the trace (indices
    /// are auxiliary inputs, not scalars).
    SelectEntry { token: usize, column: Vec<FpNum> },
}

pub struct TraceBackend {
    p: Precision,
    pub ops: Vec<TraceOp>,
    tokens: VecDeque<usize>,
    n_scalar_inputs: usize,
}

impl TraceBackend {
    pub fn new(p: Precision, tokens: Vec<usize>) -> Self {
        TraceBackend {
            p,
            ops: Vec::new(),
            tokens: tokens.into(),
            n_scalar_inputs: 0,
        }
    }

    fn push(&mut self, op: TraceOp) -> usize {
        self.ops.push(op);
        self.ops.len() - 1
    }

    /// Replays the trace against scalar inputs, returning every node value.
    pub fn replay(&self, scalars: &[FpNum]) -> ModelResult<Vec<FpNum>> {
        let mut vals: Vec<FpNum> = Vec::with_capacity(self.ops.len());
        let mut next_in = 0usize;
        for op in &self.ops {
            let v = match op {
                TraceOp::Const(x) => *x,
                TraceOp::Input => {
                    let v = scalars[next_in];
                    next_in += 1;
                    v
                }
                TraceOp::Neg(a) => vals[*a].neg(),
                TraceOp::Add(a, b) => fp_add(&vals[*a], &vals[*b]),
                TraceOp::Mul(a, b) => fp_mul(&vals[*a], &vals[*b]),
                TraceOp::DivTotal(a, b) => fp_div_total(&vals[*a], &vals[*b]).num,
                TraceOp::IterAdd(xs) => {
                    let terms: Vec<FpNum> = xs.iter().map(|&i| vals[i]).collect();
                    fp_iter_add(&terms)?
                }
                TraceOp::Exp(a) => fp_exp(&vals[*a]).num,
                TraceOp::SqrtTotal(a) => fp_sqrt_total(&vals[*a]).num,
                TraceOp::ChooseOnZero(s, z, nz) => {
                    if vals[*s].is_zero() {
                        vals[*z]
                    } else {
                        vals[*nz]
                    }
                }
                TraceOp::SelectEntry { token, column } => column[*token],
            };
            vals.push(v);
        }
        Ok(vals)
    }

    pub fn scalar_input_count(&self) -> usize {
        self.n_scalar_inputs
    }
}

impl FpBackend for TraceBackend {
    type V = usize;
    type Sel = usize;

    fn precision(&self) -> Precision {
        self.p
    }

    fn constant(&mut self, x: FpNum) -> usize {
        self.push(TraceOp::Const(x))
    }

    fn next_scalar_input(&mut self) -> ModelResult<usize> {
        self.n_scalar_inputs += 1;
        Ok(self.push(TraceOp::Input))
    }

    fn next_onehot_input(&mut self, arity: usize) -> ModelResult<usize> {
        let ix = self
            .tokens
            .pop_front()
            .ok_or(ModelError::InputsExhausted("token"))?;
        if ix >= arity {
            return Err(ModelError::IndexOutOfRange(ix, arity));
        }
        Ok(ix)
    }

    fn neg(&mut self, a: &usize) -> usize {
        self.push(TraceOp::Neg(*a))
    }

    fn add(&mut self, a: &usize, b: &usize) -> ModelResult<usize> {
        Ok(self.push(TraceOp::Add(*a, *b)))
    }

    fn mul(&mut self, a: &usize, b: &usize) -> ModelResult<usize> {
        Ok(self.push(TraceOp::Mul(*a, *b)))
    }

    fn div_total(&mut self, a: &usize, b: &usize) -> ModelResult<usize> {
        Ok(self.push(TraceOp::DivTotal(*a, *b)))
    }

    fn iter_add(&mut self, xs: &[usize]) -> ModelResult<usize> {
        Ok(self.push(TraceOp::IterAdd(xs.to_vec())))
    }

    fn exp(&mut self, a: &usize) -> ModelResult<usize> {
        Ok(self.push(TraceOp::Exp(*a)))
    }

    fn sqrt_total(&mut self, a: &usize) -> ModelResult<usize> {
        Ok(self.push(TraceOp::SqrtTotal(*a)))
    }

    fn choose_on_zero(
        &mut self,
        scrut: &usize,
        if_zero: &usize,
        if_nonzero: &usize,
    ) -> ModelResult<usize> {
        Ok(self.push(TraceOp::ChooseOnZero(*scrut, *if_zero, *if_nonzero)))
    }

    fn check_nonzero(&mut self, _v: &usize, _err: ModelError) -> ModelResult<()> {
        // Hazards are data, not control, on the recording side.
        Ok(())
    }

    fn select_row(&mut self, sel: &usize, rows: &[Vec<FpNum>]) -> ModelResult<Vec<usize>> {
        let token = *sel;
        if token >= rows.len() {
            return Err(ModelError::IndexOutOfRange(token, rows.len()));
        }
        let d = rows[0].len();
        Ok((0..d)
            .map(|col| {
                let column: Vec<FpNum> = rows.iter().map(|r| r[col]).collect();
                self.push(TraceOp::SelectEntry { token, column })
            })
            .collect())
    }
}
