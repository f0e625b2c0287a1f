use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use super::lexer::{Keyword, Sym, Token, TokenKind};
use super::ParseError;
use crate::ast::*;

type PResult<T> = Result<T, ParseError>;

pub(crate) struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    pub(crate) fn new(toks: Vec<Token>) -> Self {
        Parser { toks, pos: 0 }
    }

    fn peek(&self) -> &TokenKind {
        &self.toks[self.pos].kind
    }

    fn peek_at(&self, offset: usize) -> &TokenKind {
        let i = (self.pos + offset).min(self.toks.len() - 1);
        &self.toks[i].kind
    }

    fn loc(&self) -> Loc {
        self.toks[self.pos].loc
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, expected: &[&str]) -> PResult<T> {
        Err(ParseError {
            loc: self.loc(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.peek().to_string(),
        })
    }

    fn at_kw(&self, k: Keyword) -> bool {
        *self.peek() == TokenKind::Keyword(k)
    }

    fn at_sym(&self, s: Sym) -> bool {
        *self.peek() == TokenKind::Sym(s)
    }

    fn eat_kw(&mut self, k: Keyword) -> bool {
        if self.at_kw(k) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_sym(&mut self, s: Sym) -> bool {
        if self.at_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn kw(&mut self, k: Keyword) -> PResult<()> {
        if self.eat_kw(k) {
            Ok(())
        } else {
            self.error(&[&format!("'{}'", k.text())])
        }
    }

    fn sym(&mut self, s: Sym) -> PResult<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.error(&[&format!("'{}'", s.text())])
        }
    }

    fn ident(&mut self) -> PResult<Ident> {
        match self.peek().clone() {
            TokenKind::Ident(s) => {
                self.bump();
                Ok(Ident::new(s))
            }
            _ => self.error(&["identifier"]),
        }
    }

    fn integer(&mut self) -> PResult<BigInt> {
        match self.peek().clone() {
            TokenKind::Integer(n) => {
                self.bump();
                Ok(n)
            }
            _ => self.error(&["integer"]),
        }
    }

    fn natural(&mut self) -> PResult<u64> {
        let loc = self.loc();
        let n = self.integer()?;
        n.to_u64().ok_or_else(|| ParseError {
            loc,
            expected: vec!["natural number below 2^64".into()],
            found: n.to_string(),
        })
    }

    fn at_ident(&self) -> bool {
        matches!(self.peek(), TokenKind::Ident(_))
    }

    pub(crate) fn expect_eof(&mut self) -> PResult<()> {
        if *self.peek() == TokenKind::Eof {
            Ok(())
        } else {
            self.error(&["end of input"])
        }
    }

    pub(crate) fn program(&mut self) -> PResult<Program> {
        let typedefs = self.typedefs()?;
        let constants = self.constant_defs()?;
        let inputs = if self.eat_kw(Keyword::Input) { self.var_decls()? } else { vec![] };
        let decls = self.declarations()?;
        let flow = self.flow()?;
        let initial = self.initial()?;
        let assertion_loc = self.loc();
        let assertion = self.opt_clause(Keyword::Assertion)?;
        let invariant_loc = self.loc();
        let invariant = self.opt_clause(Keyword::Invariant)?;
        self.expect_eof()?;
        Ok(Program {
            typedefs,
            constants,
            inputs,
            decls,
            flow,
            initial,
            assertion,
            invariant,
            assertion_loc,
            invariant_loc,
        })
    }

    fn typedefs(&mut self) -> PResult<Vec<EnumDef>> {
        let mut out = vec![];
        if !self.eat_kw(Keyword::Typedef) {
            return Ok(out);
        }
        loop {
            let loc = self.loc();
            self.kw(Keyword::Enum)?;
            let name = self.ident()?;
            self.sym(Sym::Equals)?;
            self.sym(Sym::LBrace)?;
            let mut ctors = vec![self.ident()?];
            while self.eat_sym(Sym::Comma) {
                ctors.push(self.ident()?);
            }
            self.sym(Sym::RBrace)?;
            self.sym(Sym::Semi)?;
            out.push(EnumDef { name, ctors, loc });
            if !self.at_kw(Keyword::Enum) {
                return Ok(out);
            }
        }
    }

    fn constant_defs(&mut self) -> PResult<Vec<ConstantDef>> {
        let mut out = vec![];
        if !self.eat_kw(Keyword::Constants) {
            return Ok(out);
        }
        loop {
            let loc = self.loc();
            let name = self.ident()?;
            self.sym(Sym::Equals)?;
            let value = self.constant()?;
            self.sym(Sym::Semi)?;
            out.push(ConstantDef { name, value, loc });
            if !self.at_ident() {
                return Ok(out);
            }
        }
    }

    fn at_constant_start(&self) -> bool {
        match self.peek() {
            TokenKind::Keyword(Keyword::True | Keyword::False | Keyword::Sint | Keyword::Uint)
            | TokenKind::Integer(_) => true,
            TokenKind::Sym(Sym::LParen) => self.at_negative_integer(),
            _ => false,
        }
    }

    /// `( - Integer )` starting at the current token.
    fn at_negative_integer(&self) -> bool {
        *self.peek() == TokenKind::Sym(Sym::LParen)
            && *self.peek_at(1) == TokenKind::Sym(Sym::Minus)
            && matches!(self.peek_at(2), TokenKind::Integer(_))
            && *self.peek_at(3) == TokenKind::Sym(Sym::RParen)
    }

    fn integer_const(&mut self) -> PResult<BigInt> {
        if self.at_negative_integer() {
            self.bump();
            self.bump();
            let n = self.integer()?;
            self.bump();
            Ok(-n)
        } else if matches!(self.peek(), TokenKind::Integer(_)) {
            self.integer()
        } else {
            self.error(&["integer constant"])
        }
    }

    fn constant(&mut self) -> PResult<Constant> {
        match self.peek() {
            TokenKind::Keyword(Keyword::True) => {
                self.bump();
                Ok(Constant::Bool(true))
            }
            TokenKind::Keyword(Keyword::False) => {
                self.bump();
                Ok(Constant::Bool(false))
            }
            TokenKind::Keyword(k @ (Keyword::Sint | Keyword::Uint)) => {
                let signed = *k == Keyword::Sint;
                self.bump();
                self.sym(Sym::LBracket)?;
                let width = self.natural()?;
                self.sym(Sym::RBracket)?;
                self.sym(Sym::LParen)?;
                let v = if signed { self.integer_const()? } else { self.integer()? };
                self.sym(Sym::RParen)?;
                Ok(if signed { Constant::SInt(width, v) } else { Constant::UInt(width, v) })
            }
            _ => {
                let num = self.integer_const()?;
                if self.at_sym(Sym::Slash) {
                    self.bump();
                    let loc = self.loc();
                    let den = self.integer_const()?;
                    if den.is_zero() {
                        return Err(ParseError {
                            loc,
                            expected: vec!["nonzero denominator".into()],
                            found: "0".into(),
                        });
                    }
                    Ok(Constant::Real(num, den))
                } else {
                    Ok(Constant::Int(num))
                }
            }
        }
    }

    fn base_type(&mut self) -> PResult<Type> {
        let t = match self.peek() {
            TokenKind::Keyword(Keyword::Bool) => Type::Bool,
            TokenKind::Keyword(Keyword::Int) => Type::Int,
            TokenKind::Keyword(Keyword::Real) => Type::Real,
            TokenKind::Keyword(k @ (Keyword::Sint | Keyword::Uint)) => {
                let signed = *k == Keyword::Sint;
                self.bump();
                self.sym(Sym::LBracket)?;
                let n = self.natural()?;
                self.sym(Sym::RBracket)?;
                return Ok(if signed { Type::SInt(n) } else { Type::UInt(n) });
            }
            _ => return self.error(&["type"]),
        };
        self.bump();
        Ok(t)
    }

    fn ty(&mut self) -> PResult<Type> {
        match self.peek() {
            TokenKind::Ident(_) => Ok(Type::Named(self.ident()?)),
            TokenKind::Sym(Sym::LParen) => {
                self.bump();
                self.sym(Sym::Hash)?;
                let mut ts = vec![self.ty()?];
                while !self.at_sym(Sym::RParen) {
                    ts.push(self.ty()?);
                }
                self.bump();
                Ok(Type::Prod(ts))
            }
            _ => {
                let base = self.base_type()?;
                if self.eat_sym(Sym::Caret) {
                    let n = self.natural()?;
                    Ok(Type::Pow(Box::new(base), n))
                } else {
                    Ok(base)
                }
            }
        }
    }

    fn typed_var(&mut self) -> PResult<TypedVar> {
        let loc = self.loc();
        let name = self.ident()?;
        self.sym(Sym::Colon)?;
        let ty = self.ty()?;
        Ok(TypedVar { name, ty, loc })
    }

    fn var_decls(&mut self) -> PResult<Vec<TypedVar>> {
        let mut out = vec![];
        loop {
            out.push(self.typed_var()?);
            self.sym(Sym::Semi)?;
            if !self.at_ident() {
                return Ok(out);
            }
        }
    }

    fn comma_typed_vars(&mut self) -> PResult<Vec<TypedVar>> {
        let mut out = vec![self.typed_var()?];
        while self.eat_sym(Sym::Comma) {
            out.push(self.typed_var()?);
        }
        Ok(out)
    }

    fn declarations(&mut self) -> PResult<Declarations> {
        let mut nodes = vec![];
        if self.eat_kw(Keyword::Nodes) {
            nodes.push(self.node()?);
            while self.at_kw(Keyword::Node) {
                nodes.push(self.node()?);
            }
        }
        let locals = if self.eat_kw(Keyword::Local) { self.var_decls()? } else { vec![] };
        let states = if self.eat_kw(Keyword::State) { self.var_decls()? } else { vec![] };
        Ok(Declarations { nodes, locals, states })
    }

    fn node(&mut self) -> PResult<Node> {
        let loc = self.loc();
        self.kw(Keyword::Node)?;
        let name = self.ident()?;
        self.sym(Sym::LParen)?;
        let params = if self.at_sym(Sym::RParen) { vec![] } else { self.comma_typed_vars()? };
        self.sym(Sym::RParen)?;
        self.kw(Keyword::Returns)?;
        self.sym(Sym::LParen)?;
        let returns = self.comma_typed_vars()?;
        self.sym(Sym::RParen)?;
        self.kw(Keyword::Let)?;
        let decls = self.declarations()?;
        let flow = self.flow()?;
        let mut automata = vec![];
        while self.at_kw(Keyword::Automaton) {
            automata.push(self.automaton()?);
        }
        let initial = self.initial()?;
        let assertion = self.opt_clause(Keyword::Assertion)?;
        self.kw(Keyword::Tel)?;
        Ok(Node { name, params, returns, decls, flow, automata, initial, assertion, loc })
    }

    fn flow(&mut self) -> PResult<Flow> {
        let mut definitions = vec![];
        if self.eat_kw(Keyword::Definition) {
            loop {
                definitions.push(self.instant_definition()?);
                self.sym(Sym::Semi)?;
                if !self.at_ident() {
                    break;
                }
            }
        }
        let mut transitions = vec![];
        if self.eat_kw(Keyword::Transition) {
            loop {
                let loc = self.loc();
                let target = match self.peek().clone() {
                    TokenKind::StateId(s) => {
                        self.bump();
                        Ident::new(s)
                    }
                    _ => return self.error(&["state identifier"]),
                };
                self.sym(Sym::Equals)?;
                let rhs = self.expr()?;
                self.sym(Sym::Semi)?;
                transitions.push(Transition { target, rhs, loc });
                if !matches!(self.peek(), TokenKind::StateId(_)) {
                    break;
                }
            }
        }
        Ok(Flow { definitions, transitions })
    }

    fn instant_definition(&mut self) -> PResult<InstantDefinition> {
        let loc = self.loc();
        let target = self.ident()?;
        self.sym(Sym::Equals)?;
        let rhs = if self.at_sym(Sym::LParen) && *self.peek_at(1) == TokenKind::Keyword(Keyword::Use) {
            self.bump();
            self.bump();
            let node = self.ident()?;
            let mut args = vec![];
            while !self.at_sym(Sym::RParen) {
                args.push(self.expr()?);
            }
            self.bump();
            Rhs::Use { node, args }
        } else {
            Rhs::Expr(self.expr()?)
        };
        Ok(InstantDefinition { target, rhs, loc })
    }

    fn automaton(&mut self) -> PResult<Automaton> {
        let loc = self.loc();
        self.kw(Keyword::Automaton)?;
        self.kw(Keyword::Let)?;
        let mut locations = vec![];
        loop {
            let lloc = self.loc();
            self.kw(Keyword::Location)?;
            let name = self.ident()?;
            self.kw(Keyword::Let)?;
            let flow = self.flow()?;
            self.kw(Keyword::Tel)?;
            locations.push(Location { name, flow, loc: lloc });
            if !self.at_kw(Keyword::Location) {
                break;
            }
        }
        self.kw(Keyword::Initial)?;
        let initial = self.ident()?;
        self.sym(Sym::Semi)?;
        let mut edges = vec![];
        while self.at_kw(Keyword::Edge) {
            let eloc = self.loc();
            self.bump();
            self.sym(Sym::LParen)?;
            let from = self.ident()?;
            self.sym(Sym::Comma)?;
            let to = self.ident()?;
            self.sym(Sym::RParen)?;
            self.sym(Sym::Colon)?;
            let cond = self.expr()?;
            self.sym(Sym::Semi)?;
            let priority = edges.len();
            edges.push(Edge { from, to, cond, priority, loc: eloc });
        }
        let mut defaults = vec![];
        if self.eat_kw(Keyword::Default) {
            loop {
                let dloc = self.loc();
                let target = self.ident()?;
                self.sym(Sym::Equals)?;
                let rhs = self.expr()?;
                defaults.push(DefaultDef { target, rhs, loc: dloc });
                if !self.eat_sym(Sym::Comma) {
                    break;
                }
            }
            self.sym(Sym::Semi)?;
        }
        self.kw(Keyword::Tel)?;
        Ok(Automaton { locations, initial, edges, defaults, loc })
    }

    fn initial(&mut self) -> PResult<Vec<StateInit>> {
        let mut out = vec![];
        if !self.eat_kw(Keyword::Initial) {
            return Ok(out);
        }
        loop {
            let loc = self.loc();
            let target = self.ident()?;
            self.sym(Sym::Equals)?;
            let value = self.expr()?;
            out.push(StateInit { target, value, loc });
            if !self.eat_sym(Sym::Comma) {
                break;
            }
        }
        self.sym(Sym::Semi)?;
        Ok(out)
    }

    fn opt_clause(&mut self, k: Keyword) -> PResult<Option<Expr>> {
        if !self.eat_kw(k) {
            return Ok(None);
        }
        let e = self.expr()?;
        self.sym(Sym::Semi)?;
        Ok(Some(e))
    }

    fn binop(&self) -> Option<BinOp> {
        Some(match self.peek() {
            TokenKind::Keyword(Keyword::Or) => BinOp::Or,
            TokenKind::Keyword(Keyword::And) => BinOp::And,
            TokenKind::Keyword(Keyword::Xor) => BinOp::Xor,
            TokenKind::Sym(Sym::Arrow) => BinOp::Implies,
            TokenKind::Sym(Sym::Equals) => BinOp::Eq,
            TokenKind::Sym(Sym::Lt) => BinOp::Lt,
            TokenKind::Sym(Sym::Gt) => BinOp::Gt,
            TokenKind::Sym(Sym::Le) => BinOp::Le,
            TokenKind::Sym(Sym::Ge) => BinOp::Ge,
            TokenKind::Sym(Sym::Plus) => BinOp::Plus,
            TokenKind::Sym(Sym::Minus) => BinOp::Minus,
            TokenKind::Sym(Sym::Star) => BinOp::Mul,
            TokenKind::Sym(Sym::Slash) => BinOp::RealDiv,
            TokenKind::Keyword(Keyword::Div) => BinOp::IntDiv,
            TokenKind::Keyword(Keyword::Mod) => BinOp::Mod,
            _ => return None,
        })
    }

    pub(crate) fn expr(&mut self) -> PResult<Expr> {
        if self.at_constant_start() {
            return Ok(Expr::Atom(Atom::Const(self.constant()?)));
        }
        match self.peek() {
            TokenKind::Ident(_) => return Ok(Expr::Atom(Atom::Var(self.ident()?))),
            TokenKind::Sym(Sym::LParen) => {}
            _ => return self.error(&["expression"]),
        }
        self.bump();
        let e = if self.eat_kw(Keyword::Not) {
            Expr::Unary(UnOp::Not, Box::new(self.expr()?))
        } else if let Some(op) = self.binop() {
            self.bump();
            let l = self.expr()?;
            let r = self.expr()?;
            Expr::Binary(op, Box::new(l), Box::new(r))
        } else if self.eat_kw(Keyword::Ite) {
            let c = self.expr()?;
            let t = self.expr()?;
            let f = self.expr()?;
            Expr::Ternary(TernOp::Ite, Box::new(c), Box::new(t), Box::new(f))
        } else if self.eat_sym(Sym::Hash) {
            let mut es = vec![];
            while !self.at_sym(Sym::RParen) {
                es.push(self.expr()?);
            }
            Expr::Prod(es)
        } else if self.eat_kw(Keyword::Project) {
            let x = self.ident()?;
            let i = self.natural()?;
            Expr::Project(x, i)
        } else if self.eat_kw(Keyword::Match) {
            let scrutinee = self.expr()?;
            self.sym(Sym::LBrace)?;
            let mut pats = vec![self.pattern()?];
            while self.eat_sym(Sym::Comma) {
                pats.push(self.pattern()?);
            }
            self.sym(Sym::RBrace)?;
            Expr::Match(Box::new(scrutinee), pats)
        } else {
            return self.error(&["operator", "'not'", "'ite'", "'#'", "'project'", "'match'"]);
        };
        self.sym(Sym::RParen)?;
        Ok(e)
    }

    fn pattern(&mut self) -> PResult<Pattern> {
        let head = if self.eat_sym(Sym::Underscore) { PatHead::Wildcard } else { PatHead::Ctor(self.ident()?) };
        self.sym(Sym::Dot)?;
        let body = self.expr()?;
        Ok(Pattern { head, body })
    }
}

#[cfg(test)]
mod tests {
    use super::super::{parse_expr, parse_program};
    use crate::ast::*;

    #[test]
    fn negative_integer_versus_subtraction() {
        assert_eq!(parse_expr("(- 1)").unwrap(), Expr::Atom(Atom::Const(Constant::Int((-1).into()))));
        assert_eq!(parse_expr("(- x 1)").unwrap(), Expr::binary(BinOp::Minus, Expr::var("x"), Expr::int(1)));
    }

    #[test]
    fn real_constants() {
        assert_eq!(parse_expr("(- 3)/4").unwrap(), Expr::Atom(Atom::Const(Constant::Real((-3).into(), 4.into()))));
        assert!(parse_expr("1/0").is_err());
    }

    #[test]
    fn sint_and_uint_constants() {
        assert_eq!(parse_expr("sint[8]((- 5))").unwrap(), Expr::Atom(Atom::Const(Constant::SInt(8, (-5).into()))));
        assert_eq!(parse_expr("uint[4](15)").unwrap(), Expr::Atom(Atom::Const(Constant::UInt(4, 15.into()))));
    }

    #[test]
    fn match_with_wildcard() {
        let e = parse_expr("(match y {E1.n, _.4})").unwrap();
        match e {
            Expr::Match(_, pats) => {
                assert_eq!(pats.len(), 2);
                assert_eq!(pats[0].head, PatHead::Ctor("E1".into()));
                assert_eq!(pats[1].head, PatHead::Wildcard);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn use_definition() {
        let p = parse_program("local x : int; definition x = (use N 1 (+ 2 3));").unwrap();
        match &p.flow.definitions[0].rhs {
            Rhs::Use { node, args } => {
                assert_eq!(node.as_str(), "N");
                assert_eq!(args.len(), 2);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_semicolon_reports_position() {
        let err = parse_program("local x : int\ndefinition x = 1;").unwrap_err();
        assert_eq!(err.loc.line, 2);
        assert!(err.expected.iter().any(|e| e.contains(';')));
    }

    #[test]
    fn empty_program() {
        assert_eq!(parse_program("-- nothing\n").unwrap(), Program::default());
    }

    #[test]
    fn edge_priorities_follow_text_order() {
        let src = "nodes node N() returns (y : int) let automaton let \
                   location A let definition y = 1; tel location B let definition y = 2; tel \
                   initial A; edge (A, B) : true; edge (A, A) : true; tel tel";
        let p = parse_program(src).unwrap();
        let a = &p.decls.nodes[0].automata[0];
        assert_eq!(a.edges.iter().map(|e| e.priority).collect::<Vec<_>>(), vec![0, 1]);
    }
}
