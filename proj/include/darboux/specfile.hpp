#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "darboux/determined.hpp"
#include "darboux/system.hpp"

namespace darboux {

struct SpecFileError : std::runtime_error {
    int line;
    SpecFileError(std::string msg, int ln)
        : std::runtime_error(std::move(msg) + " (line " + std::to_string(ln) + ")"),
          line(ln) {}
};

struct SolveParams {
    std::vector<double> halfwidth;  // per axis
    std::vector<int> points;        // per axis, odd
};

struct PicardParams {
    double tol = 1e-12;
    int max_iter = 200;
    InitMode init = InitMode::DataExtension;
};

// One parsed system-spec file: the raw system plus optional solver sections.
struct JobSpec {
    SystemSpec system;
    std::optional<SolveParams> solve;
    PicardParams picard;
};

// Line-oriented sections: [vars], [unknown], [equation], [data], [solve],
// [picard]. Key = value pairs; expressions quoted; `#` starts a comment.
// Unrecognized sections or keys are errors.
JobSpec parse_spec_text(const std::string& text);
JobSpec parse_spec_file(const std::string& path);

// Candidate / reference files: one `name = "expression"` per line.
std::map<std::string, Expr> parse_candidate_text(const std::string& text);
std::map<std::string, Expr> parse_candidate_file(const std::string& path);

}  // namespace darboux
