#include "darboux/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace darboux {

const char* func_name(FuncId f) {
    switch (f) {
        case FuncId::Sin: return "sin";
        case FuncId::Cos: return "cos";
        case FuncId::Exp: return "exp";
        case FuncId::Log: return "log";
        case FuncId::Sqrt: return "sqrt";
        case FuncId::Tanh: return "tanh";
    }
    return "?";
}

namespace {

NodePtr make(NodeKind k, NodePtr a = nullptr, NodePtr b = nullptr) {
    auto n = std::make_shared<ExprNode>();
    n->kind = k;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}

bool is_const(const NodePtr& n) { return n->kind == NodeKind::Number; }

}  // namespace

NodePtr Expr::number_node(double v) {
    auto n = std::make_shared<ExprNode>();
    n->kind = NodeKind::Number;
    n->value = v;
    return n;
}

Expr Expr::number(double v) { return Expr(number_node(v)); }

Expr Expr::variable(std::string name) {
    auto n = std::make_shared<ExprNode>();
    n->kind = NodeKind::Variable;
    n->name = std::move(name);
    return Expr(std::move(n));
}

Expr operator+(const Expr& a, const Expr& b) {
    if (a.is_number(0.0)) return b;
    if (b.is_number(0.0)) return a;
    if (a.is_number() && b.is_number())
        return Expr::number(a.node().value + b.node().value);
    return Expr(make(NodeKind::Add, a.ptr(), b.ptr()));
}

Expr operator-(const Expr& a, const Expr& b) {
    if (b.is_number(0.0)) return a;
    if (a.is_number(0.0)) return -b;
    if (a.is_number() && b.is_number())
        return Expr::number(a.node().value - b.node().value);
    return Expr(make(NodeKind::Sub, a.ptr(), b.ptr()));
}

Expr operator*(const Expr& a, const Expr& b) {
    if (a.is_number(0.0) || b.is_number(0.0)) return Expr::number(0.0);
    if (a.is_number(1.0)) return b;
    if (b.is_number(1.0)) return a;
    if (a.is_number() && b.is_number())
        return Expr::number(a.node().value * b.node().value);
    return Expr(make(NodeKind::Mul, a.ptr(), b.ptr()));
}

Expr operator/(const Expr& a, const Expr& b) {
    if (a.is_number(0.0) && !b.is_number(0.0)) return Expr::number(0.0);
    if (b.is_number(1.0)) return a;
    if (a.is_number() && b.is_number() && b.node().value != 0.0)
        return Expr::number(a.node().value / b.node().value);
    return Expr(make(NodeKind::Div, a.ptr(), b.ptr()));
}

Expr operator-(const Expr& a) {
    if (a.is_number()) return Expr::number(-a.node().value);
    if (a.node().kind == NodeKind::Neg) return Expr(a.node().a);
    return Expr(make(NodeKind::Neg, a.ptr()));
}

Expr pow(const Expr& a, const Expr& b) {
    if (b.is_number(1.0)) return a;
    if (b.is_number(0.0)) return Expr::number(1.0);
    if (a.is_number(1.0)) return Expr::number(1.0);
    return Expr(make(NodeKind::Pow, a.ptr(), b.ptr()));
}

Expr apply(FuncId f, const Expr& a) {
    auto n = std::make_shared<ExprNode>();
    n->kind = NodeKind::Call;
    n->func = f;
    n->a = a.ptr();
    return Expr(std::move(n));
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

double check_finite(double v, const char* what) {
    if (!std::isfinite(v))
        throw EvalError(std::string("non-finite result in ") + what);
    return v;
}

double eval_pow(double base, double expo) {
    if (base == 0.0 && expo < 0.0)
        throw EvalError("zero base with negative exponent");
    if (base < 0.0 && expo != std::floor(expo))
        throw EvalError("negative base with non-integer exponent");
    return check_finite(std::pow(base, expo), "power");
}

double eval_func(FuncId f, double v) {
    switch (f) {
        case FuncId::Sin: return std::sin(v);
        case FuncId::Cos: return std::cos(v);
        case FuncId::Exp: return check_finite(std::exp(v), "exp");
        case FuncId::Log:
            if (v <= 0.0) throw EvalError("log of non-positive value");
            return std::log(v);
        case FuncId::Sqrt:
            if (v < 0.0) throw EvalError("sqrt of negative value");
            return std::sqrt(v);
        case FuncId::Tanh: return std::tanh(v);
    }
    throw EvalError("unknown function");
}

double eval_node(const ExprNode& n, const Env& env) {
    switch (n.kind) {
        case NodeKind::Number: return n.value;
        case NodeKind::Variable: {
            auto it = env.find(n.name);
            if (it == env.end())
                throw EvalError("unbound variable \"" + n.name + "\"");
            return it->second;
        }
        case NodeKind::Neg: return -eval_node(*n.a, env);
        case NodeKind::Add: return eval_node(*n.a, env) + eval_node(*n.b, env);
        case NodeKind::Sub: return eval_node(*n.a, env) - eval_node(*n.b, env);
        case NodeKind::Mul: return eval_node(*n.a, env) * eval_node(*n.b, env);
        case NodeKind::Div: {
            double d = eval_node(*n.b, env);
            if (d == 0.0) throw EvalError("division by zero");
            return check_finite(eval_node(*n.a, env) / d, "division");
        }
        case NodeKind::Pow:
            return eval_pow(eval_node(*n.a, env), eval_node(*n.b, env));
        case NodeKind::Call:
            return eval_func(n.func, eval_node(*n.a, env));
    }
    throw EvalError("corrupt expression node");
}

}  // namespace

double Expr::eval(const Env& env) const {
    return check_finite(eval_node(*node_, env), "expression");
}

// ---------------------------------------------------------------------------
// Differentiation

namespace {

Expr diff_node(const NodePtr& n, const std::string& var) {
    Expr e(n);
    switch (n->kind) {
        case NodeKind::Number: return Expr::number(0.0);
        case NodeKind::Variable:
            return Expr::number(n->name == var ? 1.0 : 0.0);
        case NodeKind::Neg: return -diff_node(n->a, var);
        case NodeKind::Add: return diff_node(n->a, var) + diff_node(n->b, var);
        case NodeKind::Sub: return diff_node(n->a, var) - diff_node(n->b, var);
        case NodeKind::Mul: {
            Expr a(n->a), b(n->b);
            return diff_node(n->a, var) * b + a * diff_node(n->b, var);
        }
        case NodeKind::Div: {
            Expr a(n->a), b(n->b);
            return (diff_node(n->a, var) * b - a * diff_node(n->b, var)) / (b * b);
        }
        case NodeKind::Pow: {
            Expr a(n->a), b(n->b);
            Expr da = diff_node(n->a, var);
            if (is_const(n->b)) {
                double c = n->b->value;
                return Expr::number(c) * pow(a, Expr::number(c - 1.0)) * da;
            }
            Expr db = diff_node(n->b, var);
            // a^b * (b' log a + b a'/a)
            return pow(a, b) * (db * apply(FuncId::Log, a) + b * da / a);
        }
        case NodeKind::Call: {
            Expr a(n->a);
            Expr da = diff_node(n->a, var);
            switch (n->func) {
                case FuncId::Sin: return apply(FuncId::Cos, a) * da;
                case FuncId::Cos: return -(apply(FuncId::Sin, a) * da);
                case FuncId::Exp: return apply(FuncId::Exp, a) * da;
                case FuncId::Log: return da / a;
                case FuncId::Sqrt:
                    return da / (Expr::number(2.0) * apply(FuncId::Sqrt, a));
                case FuncId::Tanh: {
                    Expr t = apply(FuncId::Tanh, a);
                    return (Expr::number(1.0) - t * t) * da;
                }
            }
            break;
        }
    }
    throw EvalError("corrupt expression node");
}

}  // namespace

Expr Expr::diff(const std::string& var) const { return diff_node(node_, var); }

namespace {

void collect_vars(const ExprNode& n, std::set<std::string>& out) {
    if (n.kind == NodeKind::Variable) out.insert(n.name);
    if (n.a) collect_vars(*n.a, out);
    if (n.b) collect_vars(*n.b, out);
}

}  // namespace

std::set<std::string> Expr::free_vars() const {
    std::set<std::string> out;
    collect_vars(*node_, out);
    return out;
}

namespace {

Expr subst_node(const NodePtr& n, const std::map<std::string, Expr>& repl) {
    switch (n->kind) {
        case NodeKind::Number: return Expr(n);
        case NodeKind::Variable: {
            auto it = repl.find(n->name);
            return it != repl.end() ? it->second : Expr(n);
        }
        case NodeKind::Neg: return -subst_node(n->a, repl);
        case NodeKind::Add: return subst_node(n->a, repl) + subst_node(n->b, repl);
        case NodeKind::Sub: return subst_node(n->a, repl) - subst_node(n->b, repl);
        case NodeKind::Mul: return subst_node(n->a, repl) * subst_node(n->b, repl);
        case NodeKind::Div: return subst_node(n->a, repl) / subst_node(n->b, repl);
        case NodeKind::Pow: return pow(subst_node(n->a, repl), subst_node(n->b, repl));
        case NodeKind::Call: return apply(n->func, subst_node(n->a, repl));
    }
    throw EvalError("corrupt expression node");
}

}  // namespace

Expr Expr::substitute(const std::map<std::string, Expr>& repl) const {
    return subst_node(node_, repl);
}

bool Expr::same_tree(const Expr& other) const {
    // Structural equality.
    struct Cmp {
        static bool eq(const ExprNode& x, const ExprNode& y) {
            if (x.kind != y.kind) return false;
            switch (x.kind) {
                case NodeKind::Number: return x.value == y.value;
                case NodeKind::Variable: return x.name == y.name;
                case NodeKind::Call:
                    if (x.func != y.func) return false;
                    break;
                default: break;
            }
            if (!!x.a != !!y.a || !!x.b != !!y.b) return false;
            if (x.a && !eq(*x.a, *y.a)) return false;
            if (x.b && !eq(*x.b, *y.b)) return false;
            return true;
        }
    };
    return Cmp::eq(*node_, *other.node_);
}

// ---------------------------------------------------------------------------
// Printing

namespace {

// Precedence levels: Add/Sub 1, Mul/Div 2, Neg 3, Pow 4, atoms 5.
int prec(const ExprNode& n) {
    switch (n.kind) {
        case NodeKind::Add:
        case NodeKind::Sub: return 1;
        case NodeKind::Mul:
        case NodeKind::Div: return 2;
        case NodeKind::Neg: return 3;
        case NodeKind::Pow: return 4;
        default: return 5;
    }
}

void print_node(const ExprNode& n, std::ostream& os, int parent_prec) {
    int p = prec(n);
    bool parens = p < parent_prec;
    if (parens) os << '(';
    switch (n.kind) {
        case NodeKind::Number: {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.17g", n.value);
            if (n.value < 0) {
                os << '(' << buf << ')';
            } else {
                os << buf;
            }
            break;
        }
        case NodeKind::Variable: os << n.name; break;
        case NodeKind::Neg:
            os << '-';
            print_node(*n.a, os, p + 1);
            break;
        case NodeKind::Add:
            print_node(*n.a, os, p);
            os << " + ";
            print_node(*n.b, os, p + 1);
            break;
        case NodeKind::Sub:
            print_node(*n.a, os, p);
            os << " - ";
            print_node(*n.b, os, p + 1);
            break;
        case NodeKind::Mul:
            print_node(*n.a, os, p);
            os << '*';
            print_node(*n.b, os, p + 1);
            break;
        case NodeKind::Div:
            print_node(*n.a, os, p);
            os << '/';
            print_node(*n.b, os, p + 1);
            break;
        case NodeKind::Pow:
            print_node(*n.a, os, p + 1);  // ^ is right-assoc
            os << '^';
            print_node(*n.b, os, p);
            break;
        case NodeKind::Call:
            os << func_name(n.func) << '(';
            print_node(*n.a, os, 0);
            os << ')';
            break;
    }
    if (parens) os << ')';
}

}  // namespace

std::string Expr::str() const {
    std::ostringstream os;
    print_node(*node_, os, 0);
    return os.str();
}

// ---------------------------------------------------------------------------
// Parsing
//
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := '-' factor | atom ('^' factor)?
//   atom   := number | ident | ident '(' expr ')' | '(' expr ')'
//
// '^' binds tighter than unary minus, so "-x^2" is -(x^2).

namespace {

class Parser {
public:
    explicit Parser(std::string_view src) : src_(src) {}

    Expr run() {
        Expr e = expr();
        skip_ws();
        if (pos_ != src_.size())
            fail("expected operator or end of input");
        return e;
    }

private:
    std::string_view src_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& expected) {
        throw ParseError("syntax error at offset " + std::to_string(pos_) +
                             ": " + expected,
                         pos_);
    }

    void skip_ws() {
        while (pos_ < src_.size() && std::isspace((unsigned char)src_[pos_])) ++pos_;
    }

    char peek() {
        skip_ws();
        return pos_ < src_.size() ? src_[pos_] : '\0';
    }

    bool accept(char c) {
        if (peek() == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    Expr expr() {
        Expr e = term();
        for (;;) {
            if (accept('+')) e = e + term();
            else if (accept('-')) e = e - term();
            else return e;
        }
    }

    Expr term() {
        Expr e = factor();
        for (;;) {
            if (accept('*')) e = e * factor();
            else if (accept('/')) e = e / factor();
            else return e;
        }
    }

    Expr factor() {
        if (accept('-')) return -factor();
        Expr base = atom();
        if (accept('^')) return pow(base, factor());
        return base;
    }

    Expr atom() {
        char c = peek();
        if (c == '(') {
            ++pos_;
            Expr e = expr();
            if (!accept(')')) fail("expected ')'");
            return e;
        }
        if (std::isdigit((unsigned char)c) || c == '.') return number();
        if (std::isalpha((unsigned char)c)) return ident();
        fail("expected number, identifier, '(' or '-'");
    }

    Expr number() {
        std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isdigit((unsigned char)src_[pos_]) || src_[pos_] == '.'))
            ++pos_;
        // exponent part
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            std::size_t save = pos_;
            ++pos_;
            if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
            if (pos_ < src_.size() && std::isdigit((unsigned char)src_[pos_])) {
                while (pos_ < src_.size() && std::isdigit((unsigned char)src_[pos_]))
                    ++pos_;
            } else {
                pos_ = save;  // "e" was an identifier start, not an exponent
            }
        }
        std::string tok(src_.substr(start, pos_ - start));
        try {
            std::size_t used = 0;
            double v = std::stod(tok, &used);
            if (used != tok.size()) throw std::invalid_argument(tok);
            return Expr::number(v);
        } catch (const std::exception&) {
            pos_ = start;
            fail("malformed number \"" + tok + "\"");
        }
    }

    Expr ident() {
        std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum((unsigned char)src_[pos_]) || src_[pos_] == '_'))
            ++pos_;
        std::string name(src_.substr(start, pos_ - start));
        if (accept('(')) {
            FuncId f;
            if (name == "sin") f = FuncId::Sin;
            else if (name == "cos") f = FuncId::Cos;
            else if (name == "exp") f = FuncId::Exp;
            else if (name == "log") f = FuncId::Log;
            else if (name == "sqrt") f = FuncId::Sqrt;
            else if (name == "tanh") f = FuncId::Tanh;
            else {
                pos_ = start;
                fail("unknown function \"" + name + "\"");
            }
            Expr arg = expr();
            if (!accept(')')) fail("expected ')'");
            return apply(f, arg);
        }
        return Expr::variable(std::move(name));
    }
};

}  // namespace

Expr parse_expr(std::string_view src) { return Parser(src).run(); }

// ---------------------------------------------------------------------------
// Compilation to a postfix program

namespace {

void emit(const ExprNode& n, const std::vector<std::string>& layout,
          std::vector<CompiledExpr::Instr>& code, int depth, int& max_depth) {
    using I = CompiledExpr::Instr;
    max_depth = std::max(max_depth, depth + 1);
    switch (n.kind) {
        case NodeKind::Number:
            code.push_back({I::PushConst, 0, n.value});
            return;
        case NodeKind::Variable: {
            for (std::size_t s = 0; s < layout.size(); ++s) {
                if (layout[s] == n.name) {
                    code.push_back({I::PushSlot, (int)s, 0.0});
                    return;
                }
            }
            throw EvalError("unbound variable \"" + n.name + "\" in compile");
        }
        case NodeKind::Neg:
            emit(*n.a, layout, code, depth, max_depth);
            code.push_back({I::Neg, 0, 0.0});
            return;
        case NodeKind::Add:
        case NodeKind::Sub:
        case NodeKind::Mul:
        case NodeKind::Div:
        case NodeKind::Pow: {
            emit(*n.a, layout, code, depth, max_depth);
            emit(*n.b, layout, code, depth + 1, max_depth);
            I::Op op = n.kind == NodeKind::Add   ? I::Add
                       : n.kind == NodeKind::Sub ? I::Sub
                       : n.kind == NodeKind::Mul ? I::Mul
                       : n.kind == NodeKind::Div ? I::Div
                                                 : I::Pow;
            code.push_back({op, 0, 0.0});
            return;
        }
        case NodeKind::Call: {
            emit(*n.a, layout, code, depth, max_depth);
            I::Op op;
            switch (n.func) {
                case FuncId::Sin: op = I::Sin; break;
                case FuncId::Cos: op = I::Cos; break;
                case FuncId::Exp: op = I::Exp; break;
                case FuncId::Log: op = I::Log; break;
                case FuncId::Sqrt: op = I::Sqrt; break;
                case FuncId::Tanh: op = I::Tanh; break;
                default: throw EvalError("unknown function");
            }
            code.push_back({op, 0, 0.0});
            return;
        }
    }
    throw EvalError("corrupt expression node");
}

}  // namespace

CompiledExpr Expr::compile(const std::vector<std::string>& layout) const {
    CompiledExpr c;
    int max_depth = 1;
    emit(*node_, layout, c.code_, 0, max_depth);
    c.max_stack_ = max_depth;
    return c;
}

double CompiledExpr::eval(std::span<const double> slots,
                          std::span<double> stack) const {
    using I = Instr;
    int sp = 0;
    for (const Instr& in : code_) {
        switch (in.op) {
            case I::PushConst: stack[sp++] = in.value; break;
            case I::PushSlot: stack[sp++] = slots[in.slot]; break;
            case I::Neg: stack[sp - 1] = -stack[sp - 1]; break;
            case I::Add: --sp; stack[sp - 1] += stack[sp]; break;
            case I::Sub: --sp; stack[sp - 1] -= stack[sp]; break;
            case I::Mul: --sp; stack[sp - 1] *= stack[sp]; break;
            case I::Div: {
                --sp;
                if (stack[sp] == 0.0) throw EvalError("division by zero");
                stack[sp - 1] /= stack[sp];
                break;
            }
            case I::Pow: --sp; stack[sp - 1] = eval_pow(stack[sp - 1], stack[sp]); break;
            case I::Sin: stack[sp - 1] = std::sin(stack[sp - 1]); break;
            case I::Cos: stack[sp - 1] = std::cos(stack[sp - 1]); break;
            case I::Exp: stack[sp - 1] = eval_func(FuncId::Exp, stack[sp - 1]); break;
            case I::Log: stack[sp - 1] = eval_func(FuncId::Log, stack[sp - 1]); break;
            case I::Sqrt: stack[sp - 1] = eval_func(FuncId::Sqrt, stack[sp - 1]); break;
            case I::Tanh: stack[sp - 1] = std::tanh(stack[sp - 1]); break;
        }
    }
    return check_finite(stack[0], "expression");
}

}  // namespace darboux
