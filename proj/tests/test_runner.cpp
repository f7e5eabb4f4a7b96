#include <algorithm>
#include <doctest.h>

#include "expconc/plot.hpp"
#include "expconc/runner.hpp"

#include <cmath>
#include <string>

using namespace expconc;

namespace {

std::string config_error(const Json& config) {
  try {
    execute(config, 1, false);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("potential specs") {
  const auto p = parse_potential(Json::parse(R"({"builtin": "neg_log", "dimension": 2, "scale": 0.5})"));
  CHECK(p.known_eta().value() == doctest::Approx(1.0));
  const auto composite = parse_potential(Json::parse(R"({"sum": [
      {"potential": {"lift": {"builtin": "neg_log", "dimension": 1}, "dimension": 2, "coordinate": 0}},
      {"potential": {"lift": {"builtin": "neg_log", "dimension": 1}, "dimension": 2, "coordinate": 1}, "eta": 0.5}]})"));
  CHECK(composite.known_eta().value() == doctest::Approx(1.0 / 3.0));
  CHECK(composite.value(Vector::Constant(2, 0.5)) == doctest::Approx(-2.0 * std::log(0.5)));
  const auto nonsmooth = parse_potential(Json::parse(
      R"({"smooth": {"builtin": "gaussian", "dimension": 1}, "nonsmooth": {"builtin": "l1_norm", "dimension": 1}})"));
  CHECK(nonsmooth.value(Vector::Constant(1, -2.0)) == doctest::Approx(4.0));
  const auto scaled_p = parse_potential(Json::parse(R"({"builtin": "neg_log", "dimension": 1, "multiply": 4, "eta": 0.1})"));
  CHECK(scaled_p.known_eta().value() == 0.1);
  CHECK(scaled_p.value(Vector::Constant(1, 0.5)) == doctest::Approx(-4.0 * std::log(0.5)));
}

TEST_CASE("potential spec errors name the key") {
  auto message = [](const char* text) {
    try {
      parse_potential(Json::parse(text));
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message(R"({"builtin": "nope"})").find("potential.builtin") == 0);
  CHECK(message(R"({"builtin": "neg_log", "dimension": 1, "sigma": 2})").find("potential.sigma") == 0);
  CHECK(message(R"({"builtin": "neg_log", "dimension": "one"})").find("potential.dimension") == 0);
  CHECK(message(R"({"sum": [{"potential": {"builtin": "gaussian", "dimension": 1}}]})").find("potential.sum[0].eta") == 0);
  CHECK(message(R"({"lift": {"builtin": "neg_log", "dimension": 1}, "dimension": 3})").find("potential.coordinate") == 0);
  CHECK_FALSE(message(R"([1, 2])").empty());
}

TEST_CASE("bound specs") {
  CHECK(parse_bound(Json::parse(R"({"kind": "exp_concave", "eta": 0.5})")).label() == "exp_concave(eta=0.5)");
  CHECK(parse_bound(Json::parse(R"({"kind": "log_concave", "d": 3})")).d == 3);
  CHECK_THROWS_AS(parse_bound(Json::parse(R"({"kind": "exp_concave"})")), ConfigError);
  CHECK_THROWS_AS(parse_bound(Json::parse(R"({"kind": "exp_concave", "eta": -1})")), ConfigError);
  CHECK_THROWS_AS(parse_bound(Json::parse(R"({"kind": "gamma"})")), ConfigError);
}

TEST_CASE("experiment configuration errors") {
  const Json base = Json::parse(R"({"experiment": "tails", "potential": {"builtin": "neg_log", "dimension": 1},
                                    "sampler": {"n": 1000}, "t_grid": [0.5, 1]})");
  CHECK(config_error(base).empty());
  Json c = base;
  c["t_grid"] = {1.0, 0.5};
  CHECK(config_error(c).find("t_grid") == 0);
  c = base;
  c["t_grid"] = Json::array();
  CHECK(config_error(c).find("t_grid") == 0);
  c = base;
  c.erase("t_grid");
  CHECK(config_error(c).find("t_grid") == 0);
  c = base;
  c["experiment"] = "nothing";
  CHECK(config_error(c).find("experiment") == 0);
  c = base;
  c["tgrid"] = {1.0};
  CHECK(config_error(c).find("tgrid") == 0);
  c = base;
  c["sampler"]["method"] = "gibbs";
  CHECK(config_error(c).find("sampler.method") == 0);
  c = base;
  c["sampler"]["thinning"] = 0;
  CHECK(config_error(c).find("sampler") == 0);
  c = base;
  c["confidence"] = 1.5;
  CHECK(config_error(c).find("confidence") == 0);
  c = base;
  c["schema_version"] = 2;
  CHECK(config_error(c).find("schema_version") == 0);
  CHECK(config_error(Json::parse(R"({"experiment": "hpd", "potential": {"builtin": "gaussian", "dimension": 1}})"))
            .find("eta") == 0);
  CHECK(config_error(Json::parse(R"({"experiment": "info_density", "rho": 1, "t_grid": [1]})")).find("rho") == 0);
  CHECK(config_error(Json::parse(R"({"experiment": "counterexample", "lambda": 0.5, "truncations": [1e-4, 1e-2]})"))
            .find("truncations") == 0);
  CHECK(config_error(Json::parse(R"({"experiment": "exp_weights", "losses": [{"builtin": "gaussian", "dimension": 1}],
                                     "rounds": 2})"))
            .find("losses") == 0);
}

TEST_CASE("experiments run from configuration") {
  const auto tails = execute(Json::parse(R"({"experiment": "tails", "potential": {"builtin": "neg_log", "dimension": 1},
                                             "sampler": {"method": "exact", "n": 20000}, "t_grid": [0.5, 1, 2]})"),
                             4, true);
  CHECK(tails.passed());
  REQUIRE(tails.verdicts.size() == 1);
  CHECK(tails.verdicts[0].name == "UCB dominated by exp_concave(eta=1)");
  REQUIRE(tails.files.size() == 2);
  CHECK(tails.files[0].first == "tails.csv");
  CHECK(tails.files[1].second.rfind("<svg", 0) == 0);

  const auto gaussian = execute(Json::parse(R"({"experiment": "tails", "potential": {"builtin": "gaussian", "dimension": 2},
                                                "sampler": {"n": 20000}, "t_grid": [1, 2]})"),
                                4, false);
  CHECK(gaussian.payload["tails"]["bounds"][0]["kind"] == "log_concave");
  CHECK(gaussian.annotations.size() == 1);

  const auto table = execute(Json::parse(R"({"experiment": "regime_table", "etas": [0.1, 1], "d": 10, "t_grid": [1, 10]})"),
                             0, false);
  CHECK(table.verdicts.empty());
  CHECK(table.passed());
  CHECK(table.files[0].second.rfind("t,log_concave,exp_concave_eta_0.1,exp_concave_eta_1", 0) == 0);

  const auto hpd = execute(Json::parse(R"({"experiment": "hpd", "potential": {"builtin": "neg_log", "dimension": 1, "scale": 5},
                                           "n": 5, "trials": 3, "sampler": {"n": 5000}})"),
                           2, false);
  CHECK(hpd.passed());
  CHECK(hpd.annotations.size() == 1);
  CHECK(hpd.payload["trials"].size() == 3);
}

TEST_CASE("report numbers") {
  CHECK(number(1.5) == Json(1.5));
  CHECK(number(INFINITY) == Json("inf"));
  CHECK(number(-INFINITY) == Json("-inf"));
  CHECK(number(NAN) == Json("nan"));
  EtaCertificate c;
  c.local_eta = {1.0, INFINITY};
  c.global_eta = 1.0;
  const auto j = to_json(c);
  CHECK(j["local_eta"][1] == "inf");
  CHECK(j["passed"] == true);
  CHECK(j["declared_eta"].is_null());
}

TEST_CASE("svg rendering") {
  plot::Figure f{"a < b & c", "t", "p", true, {{"s", {0.0, 1.0, 2.0}, {1.0, 0.0, 1e-3}, false}}};
  const auto svg = plot::render_svg(f);
  CHECK(svg.find("a &lt; b &amp; c") != std::string::npos);
  CHECK(svg.find("</svg>") != std::string::npos);
  // the zero is dropped on the log axis
  CHECK(std::count(svg.begin(), svg.end(), ',') >= 2);
  CHECK_FALSE(plot::render_svg(plot::Figure{}).empty());
}

TEST_CASE("builtin listing") {
  const auto text = list_builtins();
  for (Builtin b : all_builtins()) CHECK(text.find(std::string(builtin_name(b))) != std::string::npos);
}

}  // TEST_SUITE
