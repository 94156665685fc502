// Configuration layer and experiment registry: grammar and error reporting,
// the canonical echo round trip, typed parameter access, and one smoke run
// per experiment checking the documented CSV/JSON output contract.

#include "doctest.h"

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "fflab/config.hpp"
#include "fflab/experiments.hpp"

using namespace fflab;
using nlohmann::json;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

int error_line(const std::string& text) {
  try {
    (void)parse_config_text(text);
  } catch (const ConfigError& e) {
    return e.line();
  }
  return -1;
}

ExperimentConfig base_config(const std::string& name, const std::string& out) {
  ExperimentConfig c;
  c.experiment = name;
  c.seed = 20240817;
  c.threads = 1;
  c.output = out;
  return c;
}

// First line of a CSV file, without the trailing CRLF.
std::string csv_header(const std::string& path) {
  const std::string text = slurp(path);
  const std::size_t eol = text.find("\r\n");
  REQUIRE(eol != std::string::npos);
  return text.substr(0, eol);
}

std::size_t csv_data_rows(const std::string& path) {
  const std::string text = slurp(path);
  std::size_t rows = 0, pos = 0;
  while ((pos = text.find("\r\n", pos)) != std::string::npos) {
    ++rows;
    pos += 2;
  }
  return rows - 1;  // minus the header
}

// Shared checks on the JSON document every run writes.
json check_doc(const ExperimentConfig& cfg, const RunOutputs& out) {
  const json doc = json::parse(slurp(out.json_path));
  CHECK(doc.at("experiment") == cfg.experiment);
  CHECK(doc.at("spec_hash").get<std::string>() == spec_hash(cfg));
  CHECK(doc.at("seed") == cfg.seed);
  CHECK(doc.at("experiment_seed") == experiment_seed(cfg));
  CHECK(doc.at("checks_passed") == out.checks_passed);
  CHECK(doc.at("outputs").at("csv") == out.csv_path);
  // the embedded echo reproduces the config exactly
  CHECK(parse_config_text(doc.at("config").get<std::string>()) == cfg);
  // the CSV on disk matches the rows embedded in the document
  CHECK(doc.at("rows").size() == csv_data_rows(out.csv_path));
  return doc;
}

const std::string kOut = "cfg_out";

}  // namespace

TEST_CASE("config text parses with defaults and round-trips through its echo") {
  const std::string text =
      "# batch header comment\n"
      "[experiment]\n"
      "name = perc-event\n"
      "seed = 99\n"
      "threads = 3\n"
      "output = runs/demo\n"
      "assert = true\n"
      "\n"
      "[params]\n"
      "p-grid = 0.3, 0.7   # trailing comment is part of the value? no: full-line only\n"
      "replicas = 250\n";
  // '#' only comments out whole lines, so the first param keeps its tail
  const ExperimentConfig c = parse_config_text(text);
  CHECK(c.experiment == "perc-event");
  CHECK(c.seed == 99);
  CHECK(c.threads == 3);
  CHECK(c.output == "runs/demo");
  CHECK(c.assert_checks);
  CHECK(c.params.at("replicas") == "250");
  CHECK(c.params.at("p-grid").find("0.3, 0.7") == 0);

  CHECK(parse_config_text(echo_config(c)) == c);

  // minimal config: everything except the name comes from defaults
  const ExperimentConfig m = parse_config_text("[experiment]\nname = snapshot\n");
  CHECK(m.seed == 1);
  CHECK(m.threads == 1);
  CHECK(m.output.empty());
  CHECK_FALSE(m.assert_checks);
  CHECK(m.params.empty());
  CHECK(parse_config_text(echo_config(m)) == m);

  // zeta = inf survives the round trip as an opaque string
  ExperimentConfig z = m;
  z.experiment = "origin-burn";
  z.params["zeta"] = "inf";
  z.params["N-grid"] = "2,3";
  CHECK(parse_config_text(echo_config(z)) == z);

  // file-based parse agrees with the text parse
  std::filesystem::create_directories(kOut);
  const std::string path = kOut + "/sample.cfg";
  std::ofstream(path, std::ios::binary) << echo_config(z);
  CHECK(parse_config_file(path) == z);
  CHECK_THROWS_AS(parse_config_file(kOut + "/nope.cfg"), ConfigError);
}

TEST_CASE("parse failures carry their line numbers") {
  CHECK(error_line("[experiment\nname = snapshot\n") == 1);
  CHECK(error_line("[experiment]\nname = snapshot\n[weird]\n") == 3);
  CHECK(error_line("stray = 1\n") == 1);
  CHECK(error_line("[experiment]\nname = snapshot\nnonsense line\n") == 3);
  CHECK(error_line("[experiment]\nname = snapshot\nbad key! = 1\n") == 3);
  CHECK(error_line("[experiment]\nname = not-a-thing\n") == 2);
  CHECK(error_line("[experiment]\nname = snapshot\nname = snapshot\n") == 3);
  CHECK(error_line("[experiment]\nname = snapshot\n[experiment]\n") == 3);
  CHECK(error_line("[experiment]\nname = snapshot\n[params]\n[params]\n") == 4);
  CHECK(error_line("[experiment]\nname = snapshot\n[params]\nk = 1\nk = 2\n") == 5);
  CHECK(error_line("[experiment]\nname = snapshot\ncolor = red\n") == 3);
  CHECK(error_line("[experiment]\nname = snapshot\nthreads = 0\n") == 3);
  CHECK(error_line("[experiment]\nname = snapshot\nthreads = 9999\n") == 3);
  CHECK(error_line("[experiment]\nname = snapshot\nseed = -4\n") == 3);
  CHECK(error_line("[experiment]\nname = snapshot\nassert = yes\n") == 3);
  // file-level problems report line 0
  CHECK(error_line("") == 0);
  CHECK(error_line("[params]\nk = 1\n") == 0);
  CHECK(error_line("[experiment]\nseed = 4\n") == 0);
}

TEST_CASE("scalar parsers accept the documented forms") {
  CHECK(parse_u64("18446744073709551615", 0, "x") == 18446744073709551615ull);
  CHECK_THROWS_AS(parse_u64("12x", 0, "x"), ConfigError);
  CHECK_THROWS_AS(parse_u64("", 0, "x"), ConfigError);

  CHECK(parse_i64("-5", 0, "x") == -5);
  CHECK(parse_real("2.5e-3", 0, "x") == doctest::Approx(0.0025));
  CHECK_THROWS_AS(parse_real("inf", 0, "x"), ConfigError);
  CHECK_THROWS_AS(parse_real("nan", 0, "x"), ConfigError);
  CHECK_THROWS_AS(parse_real("1.2.3", 0, "x"), ConfigError);

  CHECK(parse_bool("true", 0, "x"));
  CHECK_FALSE(parse_bool("false", 0, "x"));
  CHECK_THROWS_AS(parse_bool("True", 0, "x"), ConfigError);

  CHECK(std::isinf(parse_zeta("inf", 0, "x")));
  CHECK(parse_zeta("0.5", 0, "x") == 0.5);
  CHECK_THROWS_AS(parse_zeta("0", 0, "x"), ConfigError);
  CHECK_THROWS_AS(parse_zeta("-1", 0, "x"), ConfigError);
  CHECK_THROWS_AS(parse_zeta("infinite", 0, "x"), ConfigError);
}

TEST_CASE("parameter readers type-check against the allowed key set") {
  ExperimentConfig c;
  c.experiment = "perc-event";
  c.params = {{"a", "1"},   {"list", " 2 , 3 "}, {"x", "0.5"},
              {"z", "inf"}, {"flag", "true"},    {"reals", "1.5,2.5"}};

  CHECK_THROWS_AS(ParamReader(c, {"a", "list"}), ConfigError);
  const ParamReader pr(c, {"a", "list", "x", "z", "flag", "reals"});

  CHECK(pr.has("a"));
  CHECK_FALSE(pr.has("missing"));
  CHECK(pr.str("a") == "1");
  CHECK(pr.str_or("missing", "dflt") == "dflt");
  CHECK(pr.integer("a") == 1);
  CHECK(pr.integer_or("missing", 7) == 7);
  CHECK(pr.real("x") == 0.5);
  CHECK(pr.real_or("missing", 2.5) == 2.5);
  CHECK(std::isinf(pr.zeta("z")));
  CHECK(pr.zeta_or("missing", 3.0) == 3.0);
  CHECK(pr.flag_or("flag", false));
  CHECK(pr.flag_or("missing", true));
  CHECK(pr.int_list("list") == std::vector<std::int64_t>{2, 3});
  CHECK(pr.int_list_or("missing", {9}) == std::vector<std::int64_t>{9});
  CHECK(pr.real_list("reals") == std::vector<double>{1.5, 2.5});

  CHECK_THROWS_AS(pr.str("missing"), ConfigError);
  CHECK_THROWS_AS(pr.integer("x"), ConfigError);   // "0.5" is not an integer
  CHECK_THROWS_AS(pr.real("flag"), ConfigError);   // "true" is not a number
  CHECK_THROWS_AS(pr.int_list("x"), ConfigError);  // "0.5" fails element parse
}

TEST_CASE("experiment names, derived seeds, and spec hashes") {
  int known = 0;
  for (const char* name : kExperimentNames) known += known_experiment(name);
  CHECK(known == 11);
  CHECK_FALSE(known_experiment("bogus"));
  CHECK_FALSE(known_experiment(""));

  ExperimentConfig a = base_config("perc-event", "");
  ExperimentConfig b = base_config("char-length", "");
  CHECK(experiment_seed(a) != experiment_seed(b));  // same master seed, split keys

  // the hash identifies scientific content only
  const std::string h = spec_hash(a);
  CHECK(h.size() == 16);
  ExperimentConfig a2 = a;
  a2.output = "elsewhere/run7";
  a2.threads = 4;
  a2.assert_checks = true;
  CHECK(spec_hash(a2) == h);
  ExperimentConfig a3 = a;
  a3.seed = 7;
  CHECK(spec_hash(a3) != h);
  ExperimentConfig a4 = a;
  a4.params["replicas"] = "10";
  CHECK(spec_hash(a4) != h);

  ExperimentConfig bad = base_config("perc-event", "");
  bad.experiment = "bogus";
  CHECK_THROWS_AS(run_experiment(bad), ConfigError);
}

TEST_CASE("experiment runs write the documented outputs") {
  std::filesystem::create_directories(kOut);
  const std::string est_p = "experiment,spec_hash,p,n,replicas,p_hat,ci_low,ci_high,seed";
  const std::string est_z = "experiment,spec_hash,zeta,n,replicas,p_hat,ci_low,ci_high,seed";

  SUBCASE("perc-event") {
    ExperimentConfig cfg = base_config("perc-event", kOut + "/pe");
    cfg.params = {{"domain", "rhombus"}, {"n", "4"},        {"event", "h-cross"},
                  {"p-grid", "0.3,0.7"}, {"replicas", "400"}};
    const RunOutputs out = run_experiment(cfg);
    CHECK(out.checks_passed);
    CHECK(csv_header(out.csv_path) == est_p);
    CHECK(csv_data_rows(out.csv_path) == 2);
    const json doc = check_doc(cfg, out);
    CHECK(doc.at("resolved").at("replicas") == 400);
    REQUIRE(doc.at("rows").size() == 2);
    // crossing probability rises sharply through the symmetric point
    const double lo = std::stod(doc.at("rows")[0][5].get<std::string>());
    const double hi = std::stod(doc.at("rows")[1][5].get<std::string>());
    CHECK(lo < 0.35);
    CHECK(hi > 0.65);
  }

  SUBCASE("char-length: a single grid point leaves the slope unfit") {
    ExperimentConfig cfg = base_config("char-length", kOut + "/cl");
    cfg.params = {{"p-grid", "0.2"}, {"replicas", "5000"}, {"cap", "16"}};
    const RunOutputs out = run_experiment(cfg);
    CHECK_FALSE(out.checks_passed);  // one point cannot carry a power-law fit
    CHECK(csv_header(out.csv_path) == est_p);
    const json doc = check_doc(cfg, out);
    REQUIRE(doc.at("lengths").size() == 1);
    CHECK(doc.at("lengths")[0].at("above_cap") == false);
    CHECK(doc.at("lengths")[0].at("L").get<double>() >= 1.0);
    REQUIRE(doc.at("verdicts").size() == 1);
    CHECK(doc.at("verdicts")[0].at("id") == "char-length-slope");
    CHECK(doc.at("verdicts")[0].at("pass") == false);
  }

  SUBCASE("arm-exponent") {
    ExperimentConfig cfg = base_config("arm-exponent", kOut + "/ae");
    cfg.params = {{"n-grid", "2,3,5"}, {"replicas", "2000"}, {"tolerance", "10"}};
    const RunOutputs out = run_experiment(cfg);
    CHECK(out.checks_passed);  // the huge tolerance makes this a wiring test
    CHECK(csv_header(out.csv_path) == est_p);
    CHECK(csv_data_rows(out.csv_path) == 3);
    const json doc = check_doc(cfg, out);
    REQUIRE(doc.at("fits").size() == 1);
    CHECK(doc.at("fits")[0].at("id") == "one-arm-exponent");
    CHECK(doc.at("fits")[0].at("pass") == true);
  }

  SUBCASE("cone-arm-exponent resolves pi-divided angles") {
    ExperimentConfig cfg = base_config("cone-arm-exponent", kOut + "/cae");
    cfg.params = {{"alpha", "pi/2"}, {"n-grid", "2,3,5"}, {"replicas", "2000"},
                  {"tolerance", "10"}};
    const RunOutputs out = run_experiment(cfg);
    CHECK(out.checks_passed);
    const json doc = check_doc(cfg, out);
    CHECK(doc.at("resolved").at("alpha").get<double>() ==
          doctest::Approx(1.5707963267948966));
    CHECK(doc.at("resolved").at("target").get<double>() == doctest::Approx(-1.0 / 3.0));
  }

  SUBCASE("origin-burn with a probe time") {
    ExperimentConfig cfg = base_config("origin-burn", kOut + "/ob");
    cfg.params = {{"N-grid", "2,3"}, {"zeta", "1"}, {"time-probe", "1.5"},
                  {"replicas", "500"}};
    const RunOutputs out = run_experiment(cfg);
    CHECK(csv_header(out.csv_path) == est_z);
    CHECK(csv_data_rows(out.csv_path) == 2);
    const json doc = check_doc(cfg, out);
    // with a probe the polynomial bound is out of scope; only the trend runs
    REQUIRE(doc.at("verdicts").size() == 1);
    CHECK(doc.at("verdicts")[0].at("id") == "monotone-trend");
  }

  SUBCASE("long-path") {
    ExperimentConfig cfg = base_config("long-path", kOut + "/lp");
    cfg.params = {{"n-grid", "2,3,4"}, {"zeta", "1"}, {"replicas", "1500"},
                  {"slope-max", "5"}};
    const RunOutputs out = run_experiment(cfg);
    CHECK(out.checks_passed);
    CHECK(csv_header(out.csv_path) == est_z);
    const json doc = check_doc(cfg, out);
    REQUIRE(doc.at("fits").size() == 1);
    CHECK(doc.at("fits")[0].at("id") == "long-path-decay");
  }

  SUBCASE("fire-depth") {
    ExperimentConfig cfg = base_config("fire-depth", kOut + "/fd");
    cfg.params = {{"N-grid", "8,12"}, {"zeta", "1"}, {"delta", "0.0714285714"},
                  {"beta", "0.71"},   {"replicas", "400"}};
    const RunOutputs out = run_experiment(cfg);
    CHECK(csv_header(out.csv_path) == est_z);
    CHECK(csv_data_rows(out.csv_path) == 2);
    const json doc = check_doc(cfg, out);
    REQUIRE(doc.at("verdicts").size() == 1);
    CHECK(doc.at("verdicts")[0].at("id") == "deep-reach-trend");
  }

  SUBCASE("cone-count") {
    ExperimentConfig cfg = base_config("cone-count", kOut + "/cc");
    cfg.params = {{"halfwidth", "1"}, {"alpha", "pi/3"}, {"n", "2"},
                  {"variant", "standard"}, {"zeta", "1"}, {"replicas", "30"}};
    const RunOutputs out = run_experiment(cfg);
    CHECK(out.checks_passed);
    CHECK(csv_header(out.csv_path) == "n,alpha,delta,variant,replica,count");
    CHECK(csv_data_rows(out.csv_path) == 30);
    const json doc = check_doc(cfg, out);
    CHECK(doc.at("count_stats").contains("mean"));
    CHECK(doc.at("count_stats").at("min").get<std::int64_t>() >= 0);
    CHECK(doc.at("count_stats").at("max").get<std::int64_t>() <= 3);
  }

  SUBCASE("bounded-cluster") {
    ExperimentConfig cfg = base_config("bounded-cluster", kOut + "/bc");
    cfg.params = {{"width", "8"}, {"height", "4"}, {"zeta", "1"},
                  {"L-grid", "0,2,8"}, {"replicas", "500"}};
    const RunOutputs out = run_experiment(cfg);
    CHECK(out.checks_passed);
    CHECK(csv_header(out.csv_path) == est_z);
    CHECK(csv_data_rows(out.csv_path) == 3);
    const json doc = check_doc(cfg, out);
    REQUIRE(doc.at("rows").size() == 3);
    // P(max cluster <= L) grows with L
    const double p0 = std::stod(doc.at("rows")[0][5].get<std::string>());
    const double p2 = std::stod(doc.at("rows")[2][5].get<std::string>());
    CHECK(p0 <= p2);
  }

  SUBCASE("scaling-check") {
    ExperimentConfig cfg = base_config("scaling-check", kOut + "/sc");
    cfg.params = {{"p-grid", "0.8,0.85"},    {"length-replicas", "5000"},
                  {"pi-replicas", "2000"},   {"theta-replicas", "400"},
                  {"cap", "16"},             {"ratio-bound", "10"}};
    const RunOutputs out = run_experiment(cfg);
    CHECK(out.checks_passed);  // nearby off-critical points keep ratios near 1
    CHECK(csv_header(out.csv_path) == "p,L,pi4_at_L,theta,pi1_at_L");
    CHECK(csv_data_rows(out.csv_path) == 2);
    const json doc = check_doc(cfg, out);
    CHECK(doc.at("measurements").size() == 2);
    REQUIRE(doc.at("relations").size() == 2);
    CHECK(doc.at("relations")[0].at("status") == "ok");
    CHECK(doc.at("relations")[0].at("max_over_min").get<double>() <= 10.0);
  }

  SUBCASE("snapshot writes a rendering next to the fire log") {
    ExperimentConfig cfg = base_config("snapshot", kOut + "/sn");
    cfg.params = {{"N", "6"}, {"zeta", "0.5"}, {"t", "0.9"}, {"horizon", "1.0"}};
    const RunOutputs out = run_experiment(cfg);
    CHECK(out.checks_passed);
    CHECK(csv_header(out.csv_path) == "t,trigger_site,cluster_size");
    CHECK(out.svg_path == kOut + "/sn.svg");
    const std::string svg = slurp(out.svg_path);
    CHECK(svg.find("<svg") != std::string::npos);
    const json doc = check_doc(cfg, out);
    CHECK(doc.at("stats").contains("burnt_total"));
    CHECK(doc.at("outputs").at("svg") == out.svg_path);
  }
}

TEST_CASE("estimate tables are byte-identical across reruns and thread counts") {
  std::filesystem::create_directories(kOut);
  ExperimentConfig cfg = base_config("perc-event", kOut + "/det1");
  cfg.params = {{"domain", "rhombus"}, {"n", "4"}, {"event", "h-cross"},
                {"p-grid", "0.4"},     {"replicas", "3000"}};
  const RunOutputs first = run_experiment(cfg);

  ExperimentConfig again = cfg;
  again.output = kOut + "/det2";
  again.threads = 3;  // worker count must not leak into the estimates
  const RunOutputs second = run_experiment(again);

  CHECK(slurp(first.csv_path) == slurp(second.csv_path));
  CHECK(spec_hash(cfg) == spec_hash(again));
}
