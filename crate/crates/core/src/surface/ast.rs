use crate::diagnostic::Span;
use crate::level::LevelExpr;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CstrOp {
    Eq,
    Leq,
    Lt,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SurfaceConstraint {
    pub lhs: LevelExpr,
    pub op: CstrOp,
    pub rhs: LevelExpr,
}

/// A surface expression. Equality ignores spans.
#[derive(Debug, Clone)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl Eq for Expr {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExprKind {
    Ident(String),
    Num(u64),
    /// The keyword `Type`; only meaningful in type-macro telescopes.
    Type,
    Nat,
    Lam(String, Box<Expr>, Box<Expr>),
    LvlLam(Vec<String>, Box<Expr>),
    CstrLam(Vec<SurfaceConstraint>, Box<Expr>),
    Pi(String, Box<Expr>, Box<Expr>),
    Arrow(Box<Expr>, Box<Expr>),
    Sigma(String, Box<Expr>, Box<Expr>),
    Prod(Box<Expr>, Box<Expr>),
    LvlPi(Vec<String>, Box<Expr>),
    CstrPi(Vec<SurfaceConstraint>, Box<Expr>),
    Pair(Box<Expr>, Box<Expr>),
    Fst(Box<Expr>),
    Snd(Box<Expr>),
    App(Box<Expr>, Box<Expr>),
    LvlApp(Box<Expr>, LevelExpr),
    Suc(Box<Expr>),
    Rec(Box<Expr>, Box<Expr>, Box<Expr>, Box<Expr>),
    Id(Box<Expr>, Box<Expr>, Box<Expr>),
    Refl(Box<Expr>, Box<Expr>),
    J(Box<Expr>, Box<Expr>, Box<Expr>, Box<Expr>, Box<Expr>, Box<Expr>),
    Univ(LevelExpr),
    Decode(LevelExpr, Box<Expr>),
    CodeUniv(LevelExpr, LevelExpr),
    CodePi(LevelExpr, LevelExpr, Box<Expr>, Box<Expr>),
    CodeSigma(LevelExpr, LevelExpr, Box<Expr>, Box<Expr>),
    CodeNat(LevelExpr),
    CodeId(LevelExpr, Box<Expr>, Box<Expr>, Box<Expr>),
    Lift(LevelExpr, LevelExpr, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Param {
    /// `(x y : A)`
    Term(Vec<String>, Expr),
    /// `[a b]` or `[a b | a < b]`
    Levels(Vec<String>, Vec<SurfaceConstraint>),
    /// `[a < b]`
    Constraints(Vec<SurfaceConstraint>),
}

#[derive(Debug, Clone)]
pub struct Decl {
    pub name: String,
    pub params: Vec<Param>,
    pub ty: Expr,
    pub body: Expr,
    pub span: Span,
}

impl PartialEq for Decl {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.params == other.params && self.ty == other.ty && self.body == other.body
    }
}

impl Decl {
    /// `def NAME tel : Type = A ;` declares a type abbreviation.
    pub fn is_type_macro(&self) -> bool {
        self.ty.kind == ExprKind::Type
    }
}
