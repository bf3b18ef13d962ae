#include "darboux/specfile.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace darboux {

namespace {

struct Token {
    enum Kind { Section, Word, Equals, QuotedString } kind;
    std::string text;
    int line;
};

std::vector<Token> tokenize(const std::string& text) {
    std::vector<Token> out;
    int line = 1;
    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n) {
        char c = text[i];
        if (c == '\n') {
            ++line;
            ++i;
        } else if (std::isspace((unsigned char)c)) {
            ++i;
        } else if (c == '#') {
            while (i < n && text[i] != '\n') ++i;
        } else if (c == '[') {
            std::size_t j = text.find(']', i);
            if (j == std::string::npos || text.find('\n', i) < j)
                throw SpecFileError("unterminated section header", line);
            out.push_back({Token::Section, text.substr(i + 1, j - i - 1), line});
            i = j + 1;
        } else if (c == '=') {
            out.push_back({Token::Equals, "=", line});
            ++i;
        } else if (c == '"') {
            std::size_t j = text.find('"', i + 1);
            if (j == std::string::npos || text.find('\n', i) < j)
                throw SpecFileError("unterminated string", line);
            out.push_back({Token::QuotedString, text.substr(i + 1, j - i - 1), line});
            i = j + 1;
        } else {
            std::size_t j = i;
            while (j < n && !std::isspace((unsigned char)text[j]) && text[j] != '=' &&
                   text[j] != '#' && text[j] != '[' && text[j] != '"')
                ++j;
            out.push_back({Token::Word, text.substr(i, j - i), line});
            i = j;
        }
    }
    return out;
}

double to_double(const Token& t) {
    try {
        std::size_t pos = 0;
        double v = std::stod(t.text, &pos);
        if (pos != t.text.size()) throw std::invalid_argument("");
        return v;
    } catch (...) {
        throw SpecFileError("expected a number, got \"" + t.text + "\"", t.line);
    }
}

int to_int(const Token& t) {
    int v = 0;
    auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    if (ec != std::errc{} || p != t.text.data() + t.text.size())
        throw SpecFileError("expected an integer, got \"" + t.text + "\"", t.line);
    return v;
}

// Key -> value tokens within one section. A value runs until the next
// `word =` pair, section header, or end of input.
using Record = std::vector<std::pair<std::string, std::vector<Token>>>;

struct Section {
    std::string name;
    int line;
    Record entries;
};

std::vector<Section> group_sections(const std::vector<Token>& toks) {
    std::vector<Section> out;
    std::size_t i = 0;
    while (i < toks.size()) {
        if (toks[i].kind != Token::Section)
            throw SpecFileError("expected a [section] header before \"" +
                                    toks[i].text + "\"",
                                toks[i].line);
        Section sec{toks[i].text, toks[i].line, {}};
        ++i;
        while (i < toks.size() && toks[i].kind != Token::Section) {
            if (toks[i].kind != Token::Word || i + 1 >= toks.size() ||
                toks[i + 1].kind != Token::Equals)
                throw SpecFileError("expected `key = value`, got \"" +
                                        toks[i].text + "\"",
                                    toks[i].line);
            std::string key = toks[i].text;
            int key_line = toks[i].line;
            i += 2;
            std::vector<Token> value;
            while (i < toks.size() && toks[i].kind != Token::Section &&
                   !(toks[i].kind == Token::Word && i + 1 < toks.size() &&
                     toks[i + 1].kind == Token::Equals)) {
                if (toks[i].kind == Token::Equals)
                    throw SpecFileError("stray `=`", toks[i].line);
                value.push_back(toks[i]);
                ++i;
            }
            if (value.empty())
                throw SpecFileError("key \"" + key + "\" has no value", key_line);
            sec.entries.emplace_back(std::move(key), std::move(value));
        }
        out.push_back(std::move(sec));
    }
    return out;
}

class RecordView {
public:
    RecordView(const Section& s) : sec_(s) {}

    const std::vector<Token>* find(const std::string& key) {
        for (auto& [k, v] : sec_.entries)
            if (k == key) {
                used_.push_back(k);
                return &v;
            }
        return nullptr;
    }

    const std::vector<Token>& require(const std::string& key) {
        const auto* v = find(key);
        if (!v)
            throw SpecFileError("[" + sec_.name + "] is missing key \"" + key + "\"",
                                sec_.line);
        return *v;
    }

    void check_no_extras() {
        for (auto& [k, v] : sec_.entries)
            if (std::find(used_.begin(), used_.end(), k) == used_.end())
                throw SpecFileError("unknown key \"" + k + "\" in [" + sec_.name + "]",
                                    v.front().line);
    }

private:
    const Section& sec_;
    std::vector<std::string> used_;
};

const Token& single(const std::vector<Token>& v) {
    if (v.size() != 1)
        throw SpecFileError("expected a single value", v.front().line);
    return v.front();
}

Expr expr_value(const std::vector<Token>& v) {
    const Token& t = single(v);
    if (t.kind != Token::QuotedString)
        throw SpecFileError("expressions must be quoted", t.line);
    try {
        return parse_expr(t.text);
    } catch (const ParseError& e) {
        throw SpecFileError("bad expression \"" + t.text + "\": " + e.what(), t.line);
    }
}

}  // namespace

JobSpec parse_spec_text(const std::string& text) {
    JobSpec job;
    bool saw_vars = false, saw_picard = false;
    auto sections = group_sections(tokenize(text));
    for (const Section& sec : sections) {
        RecordView rec(sec);
        if (sec.name == "vars") {
            if (saw_vars) throw SpecFileError("duplicate [vars]", sec.line);
            saw_vars = true;
            job.system.n = to_int(single(rec.require("n")));
            for (const Token& t : rec.require("base"))
                job.system.base.push_back(to_double(t));
            if ((int)job.system.base.size() != job.system.n)
                throw SpecFileError("base needs n entries", sec.line);
        } else if (sec.name == "unknown") {
            UnknownSpec u;
            u.name = single(rec.require("name")).text;
            std::vector<int> idx;
            for (const Token& t : rec.require("index")) idx.push_back(to_int(t));
            u.index = MultiIndex(std::move(idx));
            if (const auto* d = rec.find("dim")) u.dim = to_int(single(*d));
            job.system.unknowns.push_back(std::move(u));
        } else if (sec.name == "equation") {
            std::string name = single(rec.require("unknown")).text;
            int axis = to_int(single(rec.require("axis")));
            int comp = 1;
            if (const auto* c = rec.find("component")) comp = to_int(single(*c));
            Expr rhs = expr_value(rec.require("rhs"));
            auto key = std::make_tuple(name, axis, comp);
            if (job.system.equations.count(key))
                throw SpecFileError("duplicate equation for " + name + ", axis " +
                                        std::to_string(axis),
                                    sec.line);
            job.system.equations.emplace(key, std::move(rhs));
        } else if (sec.name == "data") {
            std::string name = single(rec.require("unknown")).text;
            int comp = 1;
            if (const auto* c = rec.find("component")) comp = to_int(single(*c));
            Expr e = expr_value(rec.require("expr"));
            auto key = std::make_pair(name, comp);
            if (job.system.data.count(key))
                throw SpecFileError("duplicate data for " + name, sec.line);
            job.system.data.emplace(key, std::move(e));
        } else if (sec.name == "solve") {
            if (job.solve) throw SpecFileError("duplicate [solve]", sec.line);
            SolveParams sp;
            for (const Token& t : rec.require("halfwidth"))
                sp.halfwidth.push_back(to_double(t));
            for (const Token& t : rec.require("points"))
                sp.points.push_back(to_int(t));
            job.solve = std::move(sp);
        } else if (sec.name == "picard") {
            if (saw_picard) throw SpecFileError("duplicate [picard]", sec.line);
            saw_picard = true;
            if (const auto* t = rec.find("tol"))
                job.picard.tol = to_double(single(*t));
            if (const auto* t = rec.find("max_iter"))
                job.picard.max_iter = to_int(single(*t));
            if (const auto* t = rec.find("init")) {
                const std::string& v = single(*t).text;
                if (v == "data_extension")
                    job.picard.init = InitMode::DataExtension;
                else if (v == "zeros")
                    job.picard.init = InitMode::Zeros;
                else
                    throw SpecFileError("init must be data_extension or zeros",
                                        single(*t).line);
            }
        } else {
            throw SpecFileError("unknown section [" + sec.name + "]", sec.line);
        }
        rec.check_no_extras();
    }
    if (!saw_vars) throw SpecFileError("missing [vars] section", 1);
    if (job.solve) {
        if ((int)job.solve->halfwidth.size() != job.system.n ||
            (int)job.solve->points.size() != job.system.n)
            throw SpecFileError("[solve] halfwidth and points need n entries", 1);
        for (int m : job.solve->points)
            if (m < 1 || m % 2 == 0)
                throw SpecFileError("[solve] points must be odd and positive", 1);
    }
    return job;
}

JobSpec parse_spec_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open \"" + path + "\"");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_spec_text(ss.str());
}

std::map<std::string, Expr> parse_candidate_text(const std::string& text) {
    std::map<std::string, Expr> out;
    std::istringstream in(text);
    std::string line;
    int ln = 0;
    while (std::getline(in, line)) {
        ++ln;
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        auto notspace = [](unsigned char c) { return !std::isspace(c); };
        auto b = std::find_if(line.begin(), line.end(), notspace);
        if (b == line.end()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw SpecFileError("expected `name = expression`", ln);
        std::string name = line.substr(0, eq);
        std::string expr = line.substr(eq + 1);
        auto trim = [&](std::string& s) {
            while (!s.empty() && std::isspace((unsigned char)s.back())) s.pop_back();
            while (!s.empty() && std::isspace((unsigned char)s.front())) s.erase(s.begin());
        };
        trim(name);
        trim(expr);
        if (expr.size() >= 2 && expr.front() == '"' && expr.back() == '"')
            expr = expr.substr(1, expr.size() - 2);
        if (name.empty() || expr.empty())
            throw SpecFileError("expected `name = expression`", ln);
        if (out.count(name)) throw SpecFileError("duplicate entry \"" + name + "\"", ln);
        try {
            out.emplace(name, parse_expr(expr));
        } catch (const ParseError& e) {
            throw SpecFileError("bad expression for \"" + name + "\": " + e.what(), ln);
        }
    }
    return out;
}

std::map<std::string, Expr> parse_candidate_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open \"" + path + "\"");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_candidate_text(ss.str());
}

}  // namespace darboux
