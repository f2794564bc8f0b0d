//! Random program generation for soundness fuzzing.
//!
//! Generation is type-directed so that most programs check, but annotations
//! are drawn independently (each is `dyn` with probability `dyn_bias`) and a
//! small fraction of expressions ignore the expected type, so ill-typed
//! programs appear too. Variables of type `dyn` are preferred operands,
//! which puts boundary crossings everywhere.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::syntax::*;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenConfig {
    pub seed: u64,
    pub max_top_stmts: usize,
    pub max_expr_depth: usize,
    pub max_classes: usize,
    /// Probability of writing `dyn` at each annotation site.
    pub dyn_bias: f64,
}

impl GenConfig {
    pub fn new(seed: u64, dyn_bias: f64) -> Self {
        GenConfig {
            seed,
            max_top_stmts: 8,
            max_expr_depth: 3,
            max_classes: 3,
            dyn_bias,
        }
    }
}

#[derive(Debug, Clone)]
struct Sig {
    name: String,
    param: Option<SurfaceType>,
    ret: SurfaceType,
    /// A body may only call callables of lower rank, so generated programs
    /// never recurse. Overrides share the rank of the method they override.
    rank: u32,
}

#[derive(Debug, Clone)]
struct ClassInfo {
    name: String,
    parent: Option<usize>,
    dynamic: bool,
    /// Fields visible on the class, inherited first.
    fields: Vec<(String, SurfaceType)>,
    /// Methods visible on the class, with overrides applied.
    methods: Vec<Sig>,
    /// Names of the methods the class itself declares.
    declared: Vec<String>,
}

#[derive(Debug, Clone, Default)]
struct Scope {
    vars: Vec<(String, SurfaceType)>,
    /// Module variables that may be read: all of them inside bodies, only the
    /// initialized ones at top level.
    globals: usize,
    in_loop: bool,
    /// Inside a `dyn class`, where every annotation must be `dyn`.
    untyped: bool,
}

const STRINGS: [&str; 4] = ["A", "B", "x", ""];
/// Chance that an expression ignores the type it is expected to have.
const WRONG: f64 = 0.004;

struct Gen {
    rng: ChaCha8Rng,
    cfg: GenConfig,
    classes: Vec<ClassInfo>,
    funcs: Vec<Sig>,
    globals: Vec<(String, SurfaceType)>,
    fresh: usize,
    /// Callables of at least this rank may not be called here.
    limit: u32,
    /// Classes at or past this index may not be instantiated here.
    new_limit: usize,
}

fn e(kind: ExprKind) -> Expr {
    Expr::new(kind)
}

fn stmt(kind: StmtKind) -> Stmt {
    Stmt {
        kind,
        span: Span::default(),
    }
}

fn bx(x: Expr) -> Box<Expr> {
    Box::new(x)
}

impl Gen {
    fn chance(&mut self, p: f64) -> bool {
        self.rng.gen_bool(p.clamp(0.0, 1.0))
    }

    fn fresh(&mut self, prefix: &str) -> String {
        self.fresh += 1;
        format!("{prefix}{}", self.fresh)
    }

    fn class_idx(&self, name: &str) -> Option<usize> {
        self.classes.iter().position(|c| c.name == name)
    }

    fn is_subclass(&self, c: &str, ancestor: &str) -> bool {
        if ancestor == "object" {
            return true;
        }
        let mut cur = self.class_idx(c);
        while let Some(i) = cur {
            if self.classes[i].name == ancestor {
                return true;
            }
            cur = self.classes[i].parent;
        }
        false
    }

    /// Whether a value of type `have` is statically usable as `want`.
    fn fits(&self, have: &SurfaceType, want: &SurfaceType) -> bool {
        use SurfaceType as S;
        match (have, want) {
            (S::Dyn, _) | (_, S::Dyn) => true,
            (S::Union(hs), _) if !is_optional(have) => hs.iter().all(|h| self.fits(h, want)),
            (_, S::Union(ws)) if is_optional(want) => {
                matches!(have, S::None)
                    || if is_optional(have) {
                        self.fits(&optional_inner(have), &optional_inner(want))
                    } else {
                        ws.iter().any(|w| self.fits(have, w))
                    }
            }
            (_, S::Union(_)) => true,
            (S::Bool, S::Int) => true,
            (S::Class(c), S::Class(d)) => self.is_subclass(c, d),
            (_, S::Class(d)) if d == "object" => true,
            (h, w) => h == w,
        }
    }

    fn ann(&mut self, untyped: bool) -> SurfaceType {
        if untyped || self.chance(self.cfg.dyn_bias) {
            SurfaceType::Dyn
        } else {
            self.precise(1)
        }
    }

    fn class_type(&mut self) -> SurfaceType {
        let names: Vec<String> = std::iter::once("object".to_string())
            .chain(self.classes.iter().map(|c| c.name.clone()))
            .collect();
        SurfaceType::Class(names.choose(&mut self.rng).unwrap().clone())
    }

    fn precise(&mut self, depth: usize) -> SurfaceType {
        use SurfaceType as S;
        match self.rng.gen_range(0..12) {
            0 | 1 => S::Int,
            2 => S::Bool,
            3 | 4 => S::Str,
            5 => S::None,
            6 if depth > 0 => {
                let inner = if self.chance(0.5) { self.class_type() } else { self.simple() };
                S::optional(inner)
            }
            7 | 8 => self.class_type(),
            9 if depth > 0 => {
                if self.chance(0.5) {
                    S::dict(S::Str, S::Int)
                } else {
                    S::dict(S::Dyn, S::Dyn)
                }
            }
            10 if depth > 0 && self.chance(0.5) => {
                let k = if self.chance(0.7) { S::Str } else { S::Int };
                let v = if self.chance(self.cfg.dyn_bias) { S::Dyn } else { self.precise(0) };
                S::checked_dict(k, v)
            }
            11 if depth > 0 => S::Union(vec![S::Int, S::Str]),
            _ => self.simple(),
        }
    }

    fn simple(&mut self) -> SurfaceType {
        [SurfaceType::Int, SurfaceType::Bool, SurfaceType::Str]
            .choose(&mut self.rng)
            .unwrap()
            .clone()
    }

    fn visible<'s>(&'s self, sc: &'s Scope) -> impl Iterator<Item = &'s (String, SurfaceType)> {
        sc.vars.iter().chain(self.globals[..sc.globals].iter())
    }

    /// A variable usable as `want`, preferring `dyn`-typed ones.
    fn var(&mut self, sc: &Scope, want: &SurfaceType) -> Option<Expr> {
        let candidates: Vec<(String, bool)> = self
            .visible(sc)
            .filter(|(_, t)| self.fits(t, want))
            .map(|(n, t)| (n.clone(), *t == SurfaceType::Dyn))
            .collect();
        if candidates.is_empty() {
            return None;
        }
        let dyns: Vec<&String> = candidates.iter().filter(|c| c.1).map(|c| &c.0).collect();
        let name = if !dyns.is_empty() && self.chance(0.6) {
            (*dyns.choose(&mut self.rng).unwrap()).clone()
        } else {
            candidates.choose(&mut self.rng).unwrap().0.clone()
        };
        Some(e(ExprKind::Var(name)))
    }

    fn literal(&mut self, want: &SurfaceType, sc: &Scope, depth: usize) -> Expr {
        use SurfaceType as S;
        match want {
            S::Dyn => {
                let mut t = self.precise(usize::from(depth > 0));
                if matches!(t, S::CheckedDict(..)) && self.chance(0.7) {
                    t = S::dict(S::Str, S::Int);
                }
                self.literal(&t, sc, depth)
            }
            S::Int => e(ExprKind::IntLit(self.rng.gen_range(0..4))),
            S::Bool => e(ExprKind::BoolLit(self.chance(0.5))),
            S::Str => e(ExprKind::StrLit(STRINGS.choose(&mut self.rng).unwrap().to_string())),
            S::None => e(ExprKind::NoneLit),
            S::Union(items) if is_optional(want) => {
                if self.chance(0.4) {
                    e(ExprKind::NoneLit)
                } else {
                    self.literal(&items[1], sc, depth)
                }
            }
            S::Union(items) => {
                let t = items.choose(&mut self.rng).unwrap().clone();
                self.literal(&t, sc, depth)
            }
            S::Optional(t) => self.literal(t, sc, depth),
            S::Class(c) => self.new_object(c, sc, depth),
            S::Dict(k, v) => {
                let entries = self.entries(k, v, sc, depth);
                e(ExprKind::DictLit(entries))
            }
            S::CheckedDict(k, v) => {
                let entries = self.entries(k, v, sc, depth);
                e(ExprKind::ChkDictLit((**k).clone(), (**v).clone(), entries))
            }
        }
    }

    fn entries(
        &mut self,
        k: &SurfaceType,
        v: &SurfaceType,
        sc: &Scope,
        depth: usize,
    ) -> Vec<(Expr, Expr)> {
        let n = if self.chance(0.15) { 0 } else { self.rng.gen_range(1..3) };
        let d = depth.saturating_sub(1);
        (0..n)
            .map(|i| {
                let key_ty = if *k == SurfaceType::Dyn { SurfaceType::Str } else { k.clone() };
                let key = match canonical_key(&key_ty) {
                    Some(c) if i == 0 => c,
                    _ => self.leafish(&key_ty, sc),
                };
                (key, self.expr(v, sc, d))
            })
            .collect()
    }

    /// Keys stay simple so that most of them are hashable, and are usually
    /// the key every non-empty literal starts with.
    fn leafish(&mut self, want: &SurfaceType, sc: &Scope) -> Expr {
        if let Some(c) = canonical_key(want) {
            if self.chance(0.7) {
                return c;
            }
        }
        if self.chance(0.2) {
            if let Some(v) = self.var(sc, want) {
                return v;
            }
        }
        self.literal(want, sc, 0)
    }

    fn new_object(&mut self, class: &str, sc: &Scope, depth: usize) -> Expr {
        let subs: Vec<usize> = (0..self.classes.len())
            .filter(|&i| i < self.new_limit && self.is_subclass(&self.classes[i].name, class))
            .collect();
        let Some(&i) = subs.choose(&mut self.rng) else {
            return e(ExprKind::New("object".into(), Vec::new()));
        };
        let c = self.classes[i].clone();
        let mut args = Vec::new();
        if let Some((_, t)) = c.fields.last() {
            if depth > 0 && self.chance(0.5) {
                args.push(self.expr(t, sc, depth - 1));
            }
        }
        e(ExprKind::New(c.name, args))
    }

    fn arg(&mut self, param: &Option<SurfaceType>, sc: &Scope, depth: usize) -> Vec<Expr> {
        match param {
            Some(t) => vec![self.expr(t, sc, depth)],
            None => Vec::new(),
        }
    }

    /// An expression expected to have type `want`.
    fn expr(&mut self, want: &SurfaceType, sc: &Scope, depth: usize) -> Expr {
        if self.chance(WRONG) {
            let t = self.precise(1);
            return self.literal(&t, sc, 0);
        }
        if depth == 0 || self.chance(0.3) {
            if self.chance(0.5) {
                if let Some(v) = self.var(sc, want) {
                    return v;
                }
            }
            return self.literal(want, sc, depth);
        }
        let d = depth - 1;
        for _ in 0..4 {
            if let Some(x) = self.compound(want, sc, d) {
                return x;
            }
        }
        self.literal(want, sc, depth)
    }

    fn compound(&mut self, want: &SurfaceType, sc: &Scope, d: usize) -> Option<Expr> {
        use SurfaceType as S;
        let wants_bool = self.fits(&S::Bool, want);
        match self.rng.gen_range(0..9) {
            0 | 1 => {
                let fs: Vec<Sig> = self
                    .funcs
                    .iter()
                    .filter(|f| f.rank < self.limit && self.fits(&f.ret, want))
                    .cloned()
                    .collect();
                let f = fs.choose(&mut self.rng)?.clone();
                let args = self.arg(&f.param, sc, d);
                Some(e(ExprKind::Call(f.name, args)))
            }
            2 | 3 => {
                let options: Vec<(String, Sig)> = self
                    .classes
                    .iter()
                    .flat_map(|c| c.methods.iter().map(move |m| (c.name.clone(), m.clone())))
                    .filter(|(_, m)| m.rank < self.limit && self.fits(&m.ret, want))
                    .collect();
                let (c, m) = options.choose(&mut self.rng)?.clone();
                let recv = self.receiver(c, sc, d);
                let args = self.arg(&m.param, sc, d);
                Some(e(ExprKind::MethodCall(bx(recv), m.name, args)))
            }
            4 => {
                let options: Vec<(String, String)> = self
                    .classes
                    .iter()
                    .flat_map(|c| c.fields.iter().map(move |f| (c.name.clone(), f.clone())))
                    .filter(|(_, (_, t))| self.fits(t, want))
                    .map(|(c, (f, _))| (c, f))
                    .collect();
                let (c, f) = options.choose(&mut self.rng)?.clone();
                let recv = self.receiver(c, sc, d);
                Some(e(ExprKind::FieldGet(bx(recv), f)))
            }
            5 => {
                let k = if self.chance(0.7) { S::Str } else { S::Int };
                let recv = self.dict_operand(&k, want, sc, d);
                let key = self.leafish(&k, sc);
                Some(e(ExprKind::Subscript(bx(recv), bx(key))))
            }
            6 if wants_bool => {
                let t = self.precise(1);
                let a = self.expr(&t, sc, d);
                let b = self.expr(&t, sc, d);
                Some(e(ExprKind::Eq(bx(a), bx(b))))
            }
            7 if wants_bool => {
                let t = if self.chance(0.5) { S::Dyn } else { self.precise(1) };
                let x = self.expr(&t, sc, d);
                Some(e(ExprKind::IsNone(bx(x))))
            }
            8 if wants_bool => {
                let t = self.precise(1);
                let x = self.expr(&t, sc, d);
                Some(e(ExprKind::Not(bx(x))))
            }
            _ => None,
        }
    }

    /// An expression of static type `dyn`, if one is at hand.
    fn dyn_operand(&mut self, sc: &Scope, depth: usize) -> Option<Expr> {
        let vars: Vec<String> = self
            .visible(sc)
            .filter(|(_, t)| *t == SurfaceType::Dyn)
            .map(|(n, _)| n.clone())
            .collect();
        if let Some(v) = vars.choose(&mut self.rng) {
            if depth == 0 || self.chance(0.7) {
                return Some(e(ExprKind::Var(v.clone())));
            }
        }
        let fs: Vec<Sig> = self.funcs.iter().filter(|f| f.rank < self.limit && f.ret == SurfaceType::Dyn).cloned().collect();
        let f = fs.choose(&mut self.rng)?.clone();
        let args = self.arg(&f.param, sc, depth.saturating_sub(1));
        Some(e(ExprKind::Call(f.name, args)))
    }

    /// A receiver for a member of class `c`: usually an instance, sometimes
    /// a `dyn` operand.
    fn receiver(&mut self, c: String, sc: &Scope, depth: usize) -> Expr {
        if self.chance(0.35) {
            if let Some(x) = self.dyn_operand(sc, depth) {
                return x;
            }
        }
        self.expr(&SurfaceType::Class(c), sc, depth)
    }

    /// A dictionary, checked or shallow, or a `dyn` operand.
    fn dict_operand(&mut self, k: &SurfaceType, v: &SurfaceType, sc: &Scope, depth: usize) -> Expr {
        let t = match self.rng.gen_range(0..6) {
            0 => SurfaceType::checked_dict(k.clone(), v.clone()),
            1..=4 => SurfaceType::dict(k.clone(), v.clone()),
            _ => match self.dyn_operand(sc, depth) {
                Some(x) => return x,
                None => SurfaceType::dict(k.clone(), v.clone()),
            },
        };
        self.expr(&t, sc, depth)
    }

    /// A set form, or a call, for use as a statement.
    fn effect(&mut self, sc: &Scope, depth: usize) -> Expr {
        use SurfaceType as S;
        match self.rng.gen_range(0..5) {
            0 => {
                let k = if self.chance(0.7) { S::Str } else { S::Int };
                let v = self.precise(0);
                let recv = self.dict_operand(&k, &v, sc, depth);
                let key = self.leafish(&k, sc);
                let val = self.expr(&v, sc, depth);
                e(ExprKind::SubscriptSet(bx(recv), bx(key), bx(val)))
            }
            1 => {
                let options: Vec<(String, (String, SurfaceType))> = self
                    .classes
                    .iter()
                    .flat_map(|c| c.fields.iter().map(move |f| (c.name.clone(), f.clone())))
                    .collect();
                match options.choose(&mut self.rng).cloned() {
                    Some((c, (f, t))) => {
                        let recv = self.receiver(c, sc, depth);
                        let val = self.expr(&t, sc, depth);
                        e(ExprKind::FieldSet(bx(recv), f, bx(val)))
                    }
                    None => self.expr(&S::Dyn, sc, depth),
                }
            }
            _ => self.expr(&S::Dyn, sc, depth),
        }
    }

    fn block(&mut self, sc: &mut Scope, ret: &SurfaceType, budget: usize, nest: usize) -> Block {
        let depth = self.cfg.max_expr_depth;
        let n = self.rng.gen_range(1..=budget.max(1));
        let mut out = Vec::new();
        let outer = sc.vars.len();
        for _ in 0..n {
            let s = match self.rng.gen_range(0..10) {
                0..=2 => {
                    let name = self.fresh("x");
                    let (ann, ty) = if self.chance(0.3) {
                        (None, SurfaceType::Dyn)
                    } else {
                        let t = self.ann(sc.untyped);
                        (Some(t.clone()), t)
                    };
                    let init_ty = if ty == SurfaceType::Dyn { self.precise(1) } else { ty.clone() };
                    let init = self.expr(&init_ty, sc, depth);
                    sc.vars.push((name.clone(), ty));
                    StmtKind::LocalDef { name, ann, init }
                }
                3 if !sc.vars.is_empty() => {
                    let (name, t) = sc.vars.choose(&mut self.rng).unwrap().clone();
                    let value = self.expr(&t, sc, depth);
                    StmtKind::Assign { name, value }
                }
                4 if nest < 2 => {
                    let cond = self.expr(&SurfaceType::Bool, sc, depth);
                    let then = self.nested(sc, ret, budget / 2, nest, sc.in_loop);
                    let els = if self.chance(0.5) {
                        self.nested(sc, ret, budget / 2, nest, sc.in_loop)
                    } else {
                        Vec::new()
                    };
                    StmtKind::If { cond, then, els }
                }
                5 if nest < 2 => {
                    let cond = if self.chance(0.3) {
                        e(ExprKind::BoolLit(true))
                    } else {
                        self.expr(&SurfaceType::Bool, sc, depth)
                    };
                    let mut body = self.nested(sc, ret, budget / 2, nest, true);
                    if self.chance(0.97) {
                        body.push(stmt(StmtKind::Break));
                    }
                    StmtKind::While { cond, body }
                }
                6 if sc.in_loop => StmtKind::Break,
                7 => StmtKind::Return(Some(self.expr(ret, sc, depth))),
                _ => StmtKind::Expr(self.effect(sc, depth)),
            };
            out.push(stmt(s));
        }
        sc.vars.truncate(outer);
        out
    }

    fn nested(
        &mut self,
        sc: &mut Scope,
        ret: &SurfaceType,
        budget: usize,
        nest: usize,
        in_loop: bool,
    ) -> Block {
        let saved = sc.in_loop;
        sc.in_loop = in_loop;
        let b = self.block(sc, ret, budget, nest + 1);
        sc.in_loop = saved;
        b
    }

    fn body(
        &mut self,
        params: Vec<(String, SurfaceType)>,
        ret: &SurfaceType,
        untyped: bool,
        rank: u32,
    ) -> Block {
        self.limit = rank;
        let b = self.body_at(params, ret, untyped);
        self.limit = u32::MAX;
        b
    }

    fn body_at(&mut self, params: Vec<(String, SurfaceType)>, ret: &SurfaceType, untyped: bool) -> Block {
        let mut sc = Scope {
            vars: params,
            globals: self.globals.len(),
            in_loop: false,
            untyped,
        };
        let mut b = self.block(&mut sc, ret, 4, 0);
        let needs_return = !matches!(ret, SurfaceType::Dyn | SurfaceType::None);
        if needs_return && self.chance(0.9) || self.chance(0.3) {
            let depth = self.cfg.max_expr_depth;
            // Locals of the top block are still in scope at the end.
            let mut end = sc;
            collect_locals(&b, &mut end.vars);
            b.push(stmt(StmtKind::Return(Some(self.expr(ret, &end, depth)))));
        }
        b
    }

    fn signature(&mut self, name: String, untyped: bool) -> Sig {
        let param = if self.chance(0.7) { Some(self.ann(untyped)) } else { None };
        Sig {
            name,
            param,
            ret: self.ann(untyped),
            rank: self.rng.gen(),
        }
    }

    fn declare_classes(&mut self) {
        let n = self.rng.gen_range(0..=self.cfg.max_classes);
        for i in 0..n {
            let name = format!("C{i}");
            let parent = if i > 0 && self.chance(0.7) {
                Some(self.rng.gen_range(0..i))
            } else {
                None
            };
            let dynamic = self.chance(self.cfg.dyn_bias.max(0.2) * 0.6);
            let (mut fields, mut methods) = match parent {
                Some(p) => (self.classes[p].fields.clone(), self.classes[p].methods.clone()),
                None => (Vec::new(), Vec::new()),
            };
            // Placeholder so that annotations may mention the class itself.
            self.classes.push(ClassInfo {
                name: name.clone(),
                parent,
                dynamic,
                fields: fields.clone(),
                methods: methods.clone(),
                declared: Vec::new(),
            });
            let mut declared = Vec::new();
            if self.chance(0.6) {
                fields.push((format!("a{i}"), self.ann(dynamic)));
            }
            for m in methods.iter_mut() {
                if self.chance(0.4) {
                    declared.push(m.name.clone());
                    *m = if dynamic {
                        Sig {
                            name: m.name.clone(),
                            param: m.param.as_ref().map(|_| SurfaceType::Dyn),
                            ret: SurfaceType::Dyn,
                            rank: m.rank,
                        }
                    } else if self.chance(0.85) {
                        m.clone()
                    } else {
                        Sig {
                            rank: m.rank,
                            ..self.signature(m.name.clone(), false)
                        }
                    };
                }
            }
            if self.chance(0.7) {
                declared.push(format!("m{i}"));
                methods.push(self.signature(format!("m{i}"), dynamic));
            }
            let c = self.classes.last_mut().unwrap();
            c.fields = fields;
            c.methods = methods;
            c.declared = declared;
        }
    }

    fn class_def(&mut self, i: usize) -> ClassDef {
        let c = self.classes[i].clone();
        let inherited = c.parent.map(|p| self.classes[p].clone());
        let field = match (&inherited, c.fields.last()) {
            (Some(p), Some(_)) if p.fields.len() == c.fields.len() => None,
            (_, Some((name, ann))) => {
                let sc = Scope {
                    globals: 0,
                    untyped: c.dynamic,
                    ..Scope::default()
                };
                self.limit = 0;
                self.new_limit = i;
                let default = self.expr(ann, &sc, 1);
                self.limit = u32::MAX;
                self.new_limit = usize::MAX;
                Some(FieldDef {
                    name: name.clone(),
                    ann: ann.clone(),
                    default,
                    span: Span::default(),
                })
            }
            (_, None) => None,
        };
        let mut methods = Vec::new();
        for m in &c.methods {
            if !c.declared.contains(&m.name) {
                continue;
            }
            let self_ty = if c.dynamic {
                SurfaceType::Dyn
            } else {
                SurfaceType::Class(c.name.clone())
            };
            let mut params = vec![("self".to_string(), self_ty)];
            if let Some(t) = &m.param {
                params.push(("p".to_string(), t.clone()));
            }
            let body = self.body(params, &m.ret, c.dynamic, m.rank);
            methods.push(FuncDef {
                name: m.name.clone(),
                param: m.param.as_ref().map(|t| Param {
                    name: "p".into(),
                    ann: t.clone(),
                }),
                ret: m.ret.clone(),
                body,
                span: Span::default(),
            });
        }
        ClassDef {
            name: c.name.clone(),
            parent: inherited.map_or_else(|| "object".to_string(), |p| p.name),
            dynamic: c.dynamic,
            field,
            methods,
            span: Span::default(),
        }
    }

    fn program(&mut self) -> SurfaceProgram {
        self.declare_classes();
        let nfuncs = self.rng.gen_range(1..=3);
        for i in 0..nfuncs {
            let sig = self.signature(format!("f{i}"), false);
            self.funcs.push(sig);
        }
        let ntop = self.rng.gen_range(1..=self.cfg.max_top_stmts);
        let nglobals = self.rng.gen_range(0..=ntop.min(3));
        for i in 0..nglobals {
            let ann = self.ann(false);
            self.globals.push((format!("g{i}"), ann));
        }

        let mut stmts = Vec::new();
        for i in 0..self.classes.len() {
            let c = self.class_def(i);
            stmts.push(TopStmt::Class(c));
        }
        for i in 0..self.funcs.len() {
            let f = self.funcs[i].clone();
            let params = f.param.iter().map(|t| ("p".to_string(), t.clone())).collect();
            let body = self.body(params, &f.ret, false, f.rank);
            stmts.push(TopStmt::Func(FuncDef {
                name: f.name,
                param: f.param.map(|ann| Param {
                    name: "p".into(),
                    ann,
                }),
                ret: f.ret,
                body,
                span: Span::default(),
            }));
        }

        let depth = self.cfg.max_expr_depth;
        let mut defined = 0;
        let globals_first = self.chance(0.8);
        let mut exprs = ntop.saturating_sub(nglobals).max(1);
        while defined < nglobals || exprs > 0 {
            let sc = Scope {
                globals: defined,
                ..Scope::default()
            };
            if defined < nglobals && (exprs == 0 || globals_first || self.chance(0.5)) {
                let (name, ann) = self.globals[defined].clone();
                let init_ty = if ann == SurfaceType::Dyn { self.precise(1) } else { ann.clone() };
                // Mostly keep initializers from calling code that reads
                // variables defined later.
                if self.chance(0.7) {
                    self.limit = 0;
                }
                let init = self.expr(&init_ty, &sc, depth);
                self.limit = u32::MAX;
                stmts.push(TopStmt::Var(VarDef {
                    name,
                    ann,
                    init,
                    span: Span::default(),
                }));
                defined += 1;
            } else {
                exprs -= 1;
                if defined > 0 && self.chance(0.005) {
                    let (name, ann) = self.globals[self.rng.gen_range(0..defined)].clone();
                    let value = self.expr(&ann, &sc, depth);
                    stmts.push(TopStmt::Assign {
                        name,
                        value,
                        span: Span::default(),
                    });
                    continue;
                }
                let x = if self.chance(0.2) {
                    self.effect(&sc, depth)
                } else {
                    let t = self.precise(1);
                    self.expr(&t, &sc, depth)
                };
                stmts.push(TopStmt::Expr(x));
            }
        }
        SurfaceProgram { stmts }
    }
}

fn canonical_key(t: &SurfaceType) -> Option<Expr> {
    match t {
        SurfaceType::Str => Some(e(ExprKind::StrLit("A".into()))),
        SurfaceType::Int => Some(e(ExprKind::IntLit(0))),
        _ => None,
    }
}

fn is_optional(t: &SurfaceType) -> bool {
    matches!(t, SurfaceType::Union(items) if items.len() == 2 && items[0] == SurfaceType::None)
}

fn optional_inner(t: &SurfaceType) -> SurfaceType {
    match t {
        SurfaceType::Union(items) => items[1].clone(),
        other => other.clone(),
    }
}

fn collect_locals(b: &Block, out: &mut Vec<(String, SurfaceType)>) {
    for s in b {
        if let StmtKind::LocalDef { name, ann, .. } = &s.kind {
            out.push((name.clone(), ann.clone().unwrap_or(SurfaceType::Dyn)));
        }
    }
}

/// Generates a parseable, name-resolved program. The same configuration
/// always yields the same program.
pub fn generate_program(cfg: &GenConfig) -> SurfaceProgram {
    let mut g = Gen {
        rng: ChaCha8Rng::seed_from_u64(cfg.seed),
        cfg: *cfg,
        classes: Vec::new(),
        funcs: Vec::new(),
        globals: Vec::new(),
        fresh: 0,
        limit: u32::MAX,
        new_limit: usize::MAX,
    };
    g.program()
}
