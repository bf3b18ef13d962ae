#pragma once

#include <map>
#include <memory>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace darboux {

// Scalar expression trees over the variables of a PDE system.
// Immutable after construction; cheap to copy (shared subtrees).

enum class NodeKind { Number, Variable, Neg, Add, Sub, Mul, Div, Pow, Call };

enum class FuncId { Sin, Cos, Exp, Log, Sqrt, Tanh };

const char* func_name(FuncId f);

struct ExprNode;
using NodePtr = std::shared_ptr<const ExprNode>;

struct ExprNode {
    NodeKind kind;
    double value = 0.0;     // Number
    std::string name;       // Variable
    FuncId func = FuncId::Sin;  // Call
    NodePtr a, b;           // operands
};

using Env = std::map<std::string, double>;

struct ParseError : std::runtime_error {
    std::size_t offset;
    ParseError(std::string msg, std::size_t off)
        : std::runtime_error(std::move(msg)), offset(off) {}
};

struct EvalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

class CompiledExpr;

class Expr {
public:
    Expr() : node_(number_node(0.0)) {}
    explicit Expr(NodePtr n) : node_(std::move(n)) {}

    static Expr number(double v);
    static Expr variable(std::string name);

    const ExprNode& node() const { return *node_; }
    NodePtr ptr() const { return node_; }

    bool is_number() const { return node_->kind == NodeKind::Number; }
    bool is_number(double v) const {
        return is_number() && node_->value == v;
    }

    double eval(const Env& env) const;
    Expr diff(const std::string& var) const;
    std::set<std::string> free_vars() const;
    Expr substitute(const std::map<std::string, Expr>& repl) const;
    std::string str() const;

    // Resolves variable names against `layout` for slot-indexed evaluation.
    CompiledExpr compile(const std::vector<std::string>& layout) const;

    bool same_tree(const Expr& other) const;

private:
    static NodePtr number_node(double v);
    NodePtr node_;
};

// Smart constructors with identity elimination and constant folding.
Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
Expr pow(const Expr& a, const Expr& b);
Expr apply(FuncId f, const Expr& a);

Expr parse_expr(std::string_view src);

// Postfix program for the solver hot loop: evaluates against a flat
// slot vector instead of a string-keyed environment.
class CompiledExpr {
public:
    struct Instr {
        enum Op : unsigned char {
            PushConst, PushSlot, Neg, Add, Sub, Mul, Div, Pow,
            Sin, Cos, Exp, Log, Sqrt, Tanh
        };
        Op op;
        int slot = 0;
        double value = 0.0;
    };

    double eval(std::span<const double> slots, std::span<double> stack) const;
    int stack_size() const { return max_stack_; }

private:
    friend class Expr;
    std::vector<Instr> code_;
    int max_stack_ = 1;
};

}  // namespace darboux
