#include "holoseries/cli_commands.hpp"
#include "holoseries/errors.hpp"
#include "holoseries/model_json.hpp"

#include "test_helpers.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

using namespace holoseries;
using namespace holoseries::testing;
using nlohmann::json;
namespace cli = holoseries::cli;

namespace {

struct TempFile {
    std::filesystem::path path;

    explicit TempFile(const std::string& contents) {
        static int counter = 0;
        path = std::filesystem::temp_directory_path() /
               ("holoseries_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++) +
                ".json");
        std::ofstream out(path);
        out << contents;
    }
    ~TempFile() { std::filesystem::remove(path); }
};

const char* kOuModel = R"({
  "dimension": 1,
  "k_max": 4,
  "domain_box": {"lo": [-1.0], "hi": [1.0]},
  "drift": {"const": [0.0], "linear": [[-1.0]]},
  "diffusion": {"const": [[2.0]], "linear": [[[0.0]]]}
})";

const char* kCpModel = R"({
  "dimension": 1,
  "k_max": 12,
  "drift": {"const": [0.0], "linear": [[0.0]]},
  "diffusion": {"const": [[0.0]], "linear": [[[0.0]]]},
  "jumps": {"lambda0": 0.5, "lambda1": [0.0], "law": {"type": "dirac", "z": [1.0]}}
})";

} // namespace

TEST_CASE("model parsing") {
    SUBCASE("ou model round trip") {
        TempFile f(kOuModel);
        const ModelSpec spec = parse_model_file(f.path.string());
        CHECK(spec.parts.n == 1);
        CHECK(spec.parts.k_max == 4);
        CHECK(spec.parts.drift_linear[0][0] == -1.0);
        const GeneratorSpec gen = to_generator(spec);
        CHECK(gen.coeffs().size() == 2);

        // serialization is idempotent
        const json once = model_to_json(spec);
        const ModelSpec reparsed = parse_model_json(once);
        const json twice = model_to_json(reparsed);
        CHECK(once.dump() == twice.dump());
    }
    SUBCASE("moments derived from the law") {
        TempFile f(kCpModel);
        const ModelSpec spec = parse_model_file(f.path.string());
        REQUIRE(spec.parts.jumps.has_value());
        for (int l = 2; l <= 12; ++l) {
            CHECK(spec.parts.jumps->moments.at(MultiIndex(std::vector<int>{l})) == 1.0);
        }
        CHECK(to_sde_model(spec).jumps.has_value());
    }
    SUBCASE("jumps with moments but no law simulate-fails, series-works") {
        json doc = json::parse(kCpModel);
        doc["jumps"].erase("law");
        json moments = json::array();
        for (int l = 2; l <= 12; ++l) {
            moments.push_back({{"alpha", {l}}, {"value", 1.0}});
        }
        doc["jumps"]["moments"] = moments;
        const ModelSpec spec = parse_model_json(doc);
        CHECK_NOTHROW(to_generator(spec));
        CHECK_THROWS_AS(to_sde_model(spec), ConfigError);
    }
    SUBCASE("validation failures") {
        CHECK_THROWS_AS(parse_model_json(json::parse(R"({"k_max": 4})")), ConfigError);
        CHECK_THROWS_AS(parse_model_json(json::parse(R"({"dimension": 0})")), ConfigError);
        CHECK_THROWS_AS(parse_model_json(json::parse(R"({"dimension": 1, "k_max": 1})")),
                        ConfigError);
        json bad_box = json::parse(kOuModel);
        bad_box["domain_box"]["lo"] = {0.5};
        CHECK_THROWS_AS(parse_model_json(bad_box), ConfigError);
        json bad_jumps = json::parse(kCpModel);
        bad_jumps["jumps"].erase("law");
        CHECK_THROWS_AS(parse_model_json(bad_jumps), ConfigError);
        json low_moment = json::parse(kCpModel);
        low_moment["jumps"]["moments"] = {{{"alpha", {1}}, {"value", 0.5}}};
        CHECK_THROWS_AS(parse_model_json(low_moment), ConfigError);
        CHECK_THROWS_AS(parse_model_file("/nonexistent/model.json"), ConfigError);
    }
}

TEST_CASE("grid parsing") {
    SUBCASE("range form") {
        const auto v = cli::parse_axis("0:1:5");
        REQUIRE(v.size() == 5);
        CHECK(v[0] == 0.0);
        CHECK(v[4] == 1.0);
        CHECK(v[2] == doctest::Approx(0.5));
        CHECK(cli::parse_axis("2:9:1") == std::vector<double>{2.0});
    }
    SUBCASE("list and scalar forms") {
        CHECK(cli::parse_axis("1,2,3") == std::vector<double>{1.0, 2.0, 3.0});
        CHECK(cli::parse_axis("-0.5") == std::vector<double>{-0.5});
    }
    SUBCASE("cartesian points, last axis fastest") {
        const auto pts = cli::parse_points("0,1;5,6", 2);
        REQUIRE(pts.size() == 4);
        CHECK(pts[0] == std::vector<double>{0.0, 5.0});
        CHECK(pts[1] == std::vector<double>{0.0, 6.0});
        CHECK(pts[2] == std::vector<double>{1.0, 5.0});
        CHECK(pts[3] == std::vector<double>{1.0, 6.0});
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(cli::parse_axis("abc"), ConfigError);
        CHECK_THROWS_AS(cli::parse_axis("0:1:0"), ConfigError);
        CHECK_THROWS_AS(cli::parse_points("0;1", 1), ConfigError);
        CHECK_THROWS_AS(cli::parse_method("magic"), ConfigError);
    }
}

TEST_CASE("identities command") {
    SUBCASE("passes and exits zero") {
        std::ostringstream out, err;
        cli::IdentitiesOptions opts;
        opts.k_max = 10;
        CHECK(cli::run_identities(opts, out, err) == 0);
        CHECK(out.str().find("FAIL") == std::string::npos);
        CHECK(out.str().find("PASS stirling-row-sums") != std::string::npos);
    }
    SUBCASE("k_max = 0 is a vacuous pass") {
        std::ostringstream out, err;
        cli::IdentitiesOptions opts;
        opts.k_max = 0;
        CHECK(cli::run_identities(opts, out, err) == 0);
        CHECK(out.str().find("vacuous") != std::string::npos);
    }
    SUBCASE("perturbed table fails with nonzero exit") {
        std::ostringstream out, err;
        cli::IdentitiesOptions opts;
        opts.k_max = 10;
        opts.perturb_stirling = true;
        CHECK(cli::run_identities(opts, out, err) != 0);
        CHECK(out.str().find("FAIL") != std::string::npos);
    }
}

TEST_CASE("eval command") {
    TempFile f(kOuModel);
    SUBCASE("qseries at s = 0 gives cos/sin rows") {
        std::ostringstream out, err;
        cli::EvalOptionsCli opts;
        opts.model_file = f.path.string();
        opts.method = cli::Method::qseries;
        opts.s_spec = "0";
        opts.x_spec = "0.4";
        opts.u_spec = "2";
        opts.eta = 1.0;
        opts.r_max = 20;
        REQUIRE(cli::run_eval(opts, out, err) == 0);
        std::istringstream is(out.str());
        std::string header, row;
        std::getline(is, header);
        std::getline(is, row);
        CHECK(header == "s,x_1,u_1,re_phat,im_phat,method,n_terms,tail_estimate");
        double s, x, u, re, im;
        char m[32];
        REQUIRE(std::sscanf(row.c_str(), "%lf,%lf,%lf,%lf,%lf,%31[^,]", &s, &x, &u, &re, &im, m) ==
                6);
        CHECK(re == doctest::Approx(std::cos(0.8)).epsilon(1e-12));
        CHECK(im == doctest::Approx(std::sin(0.8)).epsilon(1e-12));
        CHECK(std::string(m) == "qseries");
    }
    SUBCASE("mc rows are deterministic given the seed") {
        auto run = [&] {
            std::ostringstream out, err;
            cli::EvalOptionsCli opts;
            opts.model_file = f.path.string();
            opts.method = cli::Method::mc;
            opts.s_spec = "0.5";
            opts.x_spec = "0.2";
            opts.u_spec = "1";
            opts.n_paths = 2000;
            opts.seed = 42;
            cli::run_eval(opts, out, err);
            return out.str();
        };
        CHECK(run() == run());
    }
    SUBCASE("row count is the grid product") {
        std::ostringstream out, err;
        cli::EvalOptionsCli opts;
        opts.model_file = f.path.string();
        opts.method = cli::Method::riccati;
        opts.s_spec = "0:1:3";
        opts.x_spec = "-0.5,0.5";
        opts.u_spec = "1,2";
        REQUIRE(cli::run_eval(opts, out, err) == 0);
        int lines = 0;
        std::istringstream is(out.str());
        std::string line;
        while (std::getline(is, line)) ++lines;
        CHECK(lines == 1 + 3 * 2 * 2);
    }
}

TEST_CASE("compare command exit codes") {
    TempFile f(kOuModel);
    cli::CompareOptions opts;
    opts.model_file = f.path.string();
    opts.methods = {cli::Method::qseries, cli::Method::riccati};
    opts.compare_tol = 1e-8;
    opts.s_spec = "0:1:5";
    opts.x_spec = "-0.5,0,0.5";
    opts.u_spec = "1";
    opts.eta = 1.0;
    opts.r_max = 60;
    SUBCASE("agreement exits zero") {
        std::ostringstream out, err;
        CHECK(cli::run_compare(opts, out, err) == 0);
        CHECK(err.str().find("within") != std::string::npos);
    }
    SUBCASE("skewed drift negative control exits nonzero") {
        std::ostringstream out, err;
        opts.skew_drift = cli::Method::riccati;
        CHECK(cli::run_compare(opts, out, err) != 0);
    }
    SUBCASE("a single method is rejected") {
        std::ostringstream out, err;
        opts.methods = {cli::Method::qseries};
        CHECK_THROWS_AS(cli::run_compare(opts, out, err), ConfigError);
    }
}

TEST_CASE("expand command") {
    TempFile f(kOuModel);
    std::ostringstream out, err;
    cli::ExpandOptions opts;
    opts.model_file = f.path.string();
    opts.u_spec = "1";
    opts.eta = 1.0;
    opts.r_max = 2;
    REQUIRE(cli::run_expand(opts, out, err) == 0);
    const json doc = json::parse(out.str());
    CHECK(doc.at("eta").get<double>() == 1.0);
    CHECK(doc.at("eta_provenance").get<std::string>() == "user");
    REQUIRE(doc.at("g").size() == 3);
    // g_1 = -1 - ix
    const auto& g1 = doc.at("g")[1].at("terms");
    REQUIRE(g1.size() == 2);
    CHECK(g1[0].at("re").get<double>() == doctest::Approx(-1.0));
    CHECK(g1[1].at("im").get<double>() == doctest::Approx(-1.0));
}
