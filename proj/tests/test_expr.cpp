#include "doctest.h"

#include <cmath>
#include <random>

#include "darboux/expr.hpp"

using namespace darboux;

namespace {

double ev(const std::string& src, const Env& env = {}) {
    return parse_expr(src).eval(env);
}

// Central finite difference as the independent check on diff().
double fd(const Expr& e, const std::string& var, Env env, double h = 1e-5) {
    double x = env.at(var);
    env[var] = x + h;
    double hi = e.eval(env);
    env[var] = x - h;
    double lo = e.eval(env);
    return (hi - lo) / (2 * h);
}

}  // namespace

TEST_CASE("parsing and evaluation") {
    CHECK(ev("1 + 2*3") == 7.0);
    CHECK(ev("(1 + 2)*3") == 9.0);
    CHECK(ev("2^3^2") == 512.0);  // right associative
    CHECK(ev("-2^2") == -4.0);    // exponent binds tighter than the sign
    CHECK(ev("x1^-2", {{"x1", 2.0}}) == 0.25);
    CHECK(ev("7/2") == 3.5);
    CHECK(ev("1e-3 + 1E2") == doctest::Approx(100.001));
    CHECK(ev("sin(0) + cos(0)") == 1.0);
    CHECK(ev("tanh(0)") == 0.0);
    CHECK(ev("sqrt(9)") == 3.0);
    CHECK(ev("log(exp(2))") == doctest::Approx(2.0));
    CHECK(ev("x1 - x2", {{"x1", 5.0}, {"x2", 3.0}}) == 2.0);
}

TEST_CASE("parse errors carry the offset") {
    CHECK_THROWS_AS(parse_expr(""), ParseError);
    CHECK_THROWS_AS(parse_expr("1 +"), ParseError);
    CHECK_THROWS_AS(parse_expr("(1 + 2"), ParseError);
    CHECK_THROWS_AS(parse_expr("1 2"), ParseError);
    CHECK_THROWS_AS(parse_expr("foo(1)"), ParseError);
    try {
        parse_expr("x1 + + x2");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.offset == 5);
    }
}

TEST_CASE("evaluation errors") {
    CHECK_THROWS_AS(ev("log(-1)"), EvalError);
    CHECK_THROWS_AS(ev("sqrt(-4)"), EvalError);
    CHECK_THROWS_AS(ev("1/0"), EvalError);
    CHECK_THROWS_AS(ev("x1", {}), EvalError);  // unbound variable
    CHECK_THROWS_AS(ev("0^-1"), EvalError);
    CHECK_THROWS_AS(ev("(-2)^0.5"), EvalError);
}

TEST_CASE("derivative rules") {
    Env at{{"x1", 0.7}, {"x2", -0.3}};
    for (const char* src :
         {"x1*x2 + x2^3", "sin(x1)*cos(x2)", "exp(x1 + 2*x2)", "x1/x2",
          "log(2 + x1^2)", "sqrt(1 + x2^2)", "tanh(x1*x2)", "x1^x1",
          "(1 + x1^2)^x2", "-x1^3 + 2"}) {
        Expr e = parse_expr(src);
        for (const char* v : {"x1", "x2"}) {
            CAPTURE(src);
            CAPTURE(v);
            CHECK(e.diff(v).eval(at) ==
                  doctest::Approx(fd(e, v, at)).epsilon(1e-7));
        }
    }
    CHECK(parse_expr("3").diff("x1").is_number(0.0));
    CHECK(parse_expr("x1").diff("x1").is_number(1.0));
    CHECK(parse_expr("x2").diff("x1").is_number(0.0));
}

TEST_CASE("free variables and substitution") {
    Expr e = parse_expr("x1*sin(u) + w_2");
    CHECK(e.free_vars() == std::set<std::string>{"x1", "u", "w_2"});
    Expr s = e.substitute({{"u", parse_expr("x1 + x2")}});
    CHECK(s.free_vars() == std::set<std::string>{"x1", "x2", "w_2"});
    Env env{{"x1", 0.5}, {"x2", 0.25}, {"w_2", 2.0}};
    CHECK(s.eval(env) == doctest::Approx(0.5 * std::sin(0.75) + 2.0));
}

TEST_CASE("printer round trip") {
    Env at{{"x1", 1.3}, {"x2", -0.4}};
    for (const char* src :
         {"x1 - (x2 - 1)", "-(x1 + x2)", "2^x1^2", "(x1 + 1)*(x2 - 2)",
          "x1/(x2*x2 + 1)", "-x1^2", "sin(cos(x1))"}) {
        Expr e = parse_expr(src);
        Expr back = parse_expr(e.str());
        CHECK(back.eval(at) == doctest::Approx(e.eval(at)).epsilon(1e-14));
    }
}

TEST_CASE("smart constructors fold identities") {
    Expr x = Expr::variable("x1");
    CHECK((x + Expr::number(0)).same_tree(x));
    CHECK((x * Expr::number(1)).same_tree(x));
    CHECK((x * Expr::number(0)).is_number(0.0));
    CHECK((Expr::number(2) + Expr::number(3)).is_number(5.0));
    CHECK(pow(x, Expr::number(1)).same_tree(x));
}

TEST_CASE("compiled evaluation matches the tree walker") {
    std::vector<std::string> layout{"x1", "x2", "u"};
    for (const char* src :
         {"x1 + u*x2", "sin(x1)*exp(x2) - u^2", "tanh(x1 - u/(2 + x2^2))"}) {
        Expr e = parse_expr(src);
        CompiledExpr c = e.compile(layout);
        std::vector<double> stack(c.stack_size());
        for (double t : {-0.8, -0.1, 0.4, 1.7}) {
            std::vector<double> slots{t, 0.5 - t, t * t};
            Env env{{"x1", slots[0]}, {"x2", slots[1]}, {"u", slots[2]}};
            CHECK(c.eval(slots, stack) == doctest::Approx(e.eval(env)).epsilon(1e-15));
        }
    }
    CHECK_THROWS(parse_expr("v").compile(layout));
}

namespace {

// Random trees over a palette that keeps evaluation finite on [-1,1]^2.
Expr random_tree(std::mt19937& rng, int depth) {
    std::uniform_real_distribution<double> coef(-2.0, 2.0);
    std::uniform_int_distribution<int> pick(0, depth <= 0 ? 1 : 8);
    switch (pick(rng)) {
        case 0: return Expr::number(coef(rng));
        case 1: {
            std::uniform_int_distribution<int> v(1, 2);
            return Expr::variable("x" + std::to_string(v(rng)));
        }
        case 2: return random_tree(rng, depth - 1) + random_tree(rng, depth - 1);
        case 3: return random_tree(rng, depth - 1) - random_tree(rng, depth - 1);
        case 4: return random_tree(rng, depth - 1) * random_tree(rng, depth - 1);
        case 5: return -random_tree(rng, depth - 1);
        case 6: {
            std::uniform_int_distribution<int> f(0, 3);
            FuncId ids[] = {FuncId::Sin, FuncId::Cos, FuncId::Tanh, FuncId::Exp};
            return apply(ids[f(rng)], random_tree(rng, depth - 1));
        }
        case 7: {
            std::uniform_int_distribution<int> k(2, 3);
            return pow(random_tree(rng, depth - 1), Expr::number(k(rng)));
        }
        default:
            // keep denominators away from zero
            return random_tree(rng, depth - 1) /
                   (Expr::number(2.0) + pow(random_tree(rng, depth - 1),
                                            Expr::number(2)));
    }
}

}  // namespace

TEST_CASE("symbolic derivative agrees with finite differences on random trees") {
    std::mt19937 rng(12345);
    std::uniform_real_distribution<double> point(-1.0, 1.0);
    int checked = 0;
    while (checked < 1000) {
        Expr e = random_tree(rng, 4);
        Env at{{"x1", point(rng)}, {"x2", point(rng)}};
        double v, d, n;
        try {
            v = e.eval(at);
            d = e.diff("x1").eval(at);
            n = fd(e, "x1", at);
        } catch (const EvalError&) {
            continue;  // overflow in a deep exp nest; tree rejected
        }
        if (!std::isfinite(v) || !std::isfinite(d) || !std::isfinite(n) ||
            std::fabs(v) > 1e6 || std::fabs(d) > 1e6)
            continue;
        ++checked;
        CAPTURE(e.str());
        CHECK(std::fabs(d - n) <= 1e-5 * (1.0 + std::fabs(v)) +
                                      1e-5 * std::fabs(d));
    }
}
