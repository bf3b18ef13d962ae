#include "doctest.h"

#include "darboux/specfile.hpp"

using namespace darboux;

TEST_CASE("a full spec file parses into its parts") {
    JobSpec job = parse_spec_file(std::string(FIXTURE_DIR) + "/triangular2d.sys");
    CHECK(job.system.n == 2);
    CHECK(job.system.base == std::vector<double>{0.0, 0.0});
    REQUIRE(job.system.unknowns.size() == 3);
    CHECK(job.system.unknowns[2].name == "w");
    CHECK(job.system.unknowns[2].index == MultiIndex{1, 2});
    CHECK(job.system.equations.size() == 4);
    CHECK(job.system.data.size() == 3);
    REQUIRE(job.solve.has_value());
    CHECK(job.solve->halfwidth == std::vector<double>{0.25, 0.25});
    CHECK(job.solve->points == std::vector<int>{33, 33});
    CHECK(job.picard.tol == 1e-12);
    CHECK(job.picard.max_iter == 100);
    CHECK(job.picard.init == InitMode::DataExtension);
}

TEST_CASE("keys may continue on following lines") {
    JobSpec job = parse_spec_text(
        "[vars]\n"
        "n = 2\n"
        "base = 0 0\n"
        "[unknown]\n"
        "name = u\n"
        "index = 1\n"
        "[equation] unknown = u axis = 1 rhs = \"x2\"  # comment\n"
        "[data] unknown = u expr = \"0\"\n"
        "[picard] init = zeros\n");
    CHECK(job.system.n == 2);
    CHECK(job.system.unknowns[0].index == MultiIndex{1});
    CHECK(job.picard.init == InitMode::Zeros);
    CHECK_FALSE(job.solve.has_value());
}

TEST_CASE("malformed spec files are rejected with a line number") {
    auto bad = [](const std::string& text) {
        CHECK_THROWS_AS(parse_spec_text(text), SpecFileError);
    };
    bad("");                                          // no [vars]
    bad("[vars] n = 1 base = 0 0");                   // base length
    bad("[vars] n = 1 base = 0 junk = 3");            // unknown key
    bad("[vars] n = 1 base = 0 [nope] a = 1");        // unknown section
    bad("[vars] n = 1 base = 0 [unknown] name = u");  // missing index
    bad("[vars] n = 1 base = 0 [equation] unknown = u axis = 1 rhs = x2");
    bad("[vars] n = 1 base = 0 [solve] halfwidth = 1 points = 32");  // even
    bad("[vars] n = 1 base = 0 [picard] init = maybe");
    bad("n = 1");  // key before any section
    bad("[vars] n = one base = 0");
    bad("[vars] n = 1 base = 0\n[equation] unknown = u axis = 1 rhs = \"x1 +\"");
    try {
        parse_spec_text("[vars] n = 1 base = 0\n[vars] n = 1 base = 0");
        FAIL("duplicate [vars] accepted");
    } catch (const SpecFileError& e) {
        CHECK(e.line == 2);
    }
}

TEST_CASE("duplicate equations and data are rejected") {
    CHECK_THROWS_AS(
        parse_spec_text("[vars] n = 1 base = 0\n"
                        "[equation] unknown = u axis = 1 rhs = \"0\"\n"
                        "[equation] unknown = u axis = 1 rhs = \"1\"\n"),
        SpecFileError);
    CHECK_THROWS_AS(parse_spec_text("[vars] n = 1 base = 0\n"
                                    "[data] unknown = u expr = \"0\"\n"
                                    "[data] unknown = u expr = \"1\"\n"),
                    SpecFileError);
}

TEST_CASE("candidate files") {
    auto m = parse_candidate_text(
        "# closed forms\n"
        "u = \"exp(x1)\"\n"
        "w = x1 + x2\n"
        "\n");
    REQUIRE(m.size() == 2);
    CHECK(m.at("u").str() == parse_expr("exp(x1)").str());
    CHECK(m.at("w").eval({{"x1", 1.0}, {"x2", 2.0}}) == 3.0);
    CHECK_THROWS_AS(parse_candidate_text("u exp(x1)"), SpecFileError);
    CHECK_THROWS_AS(parse_candidate_text("u = \"exp(\""), SpecFileError);
    CHECK_THROWS_AS(parse_candidate_text("u = 1\nu = 2"), SpecFileError);
    CHECK_THROWS(parse_candidate_file("/nonexistent/file"));
}
