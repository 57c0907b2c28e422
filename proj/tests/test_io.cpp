#include <doctest.h>

#include <clocale>
#include <sstream>

#include "dq/error.hpp"
#include "dq/io.hpp"

using dq::Rational;

TEST_CASE("decimal formatting") {
  CHECK(dq::format_decimal(1.0) == "1");
  CHECK(dq::format_decimal(0.25) == "0.25");
  CHECK(dq::format_decimal(1.0 / 35) == "0.02857142857");
  CHECK(dq::format_decimal(1.0 / 3) == "0.3333333333");
  CHECK(dq::format_decimal(2.5e-7) == "2.5e-07");
  CHECK(dq::format_decimal(-0.125) == "-0.125");
  CHECK(dq::format_decimal(std::nan("")) == "");
  // The C locale of the process does not leak into the output.
  const char* previous = std::setlocale(LC_NUMERIC, nullptr);
  if (std::setlocale(LC_NUMERIC, "de_DE.UTF-8") != nullptr) {
    CHECK(dq::format_decimal(0.5) == "0.5");
    CHECK(dq::parse_double("0.5") == 0.5);
    std::setlocale(LC_NUMERIC, previous);
  }
}

TEST_CASE("number parsing") {
  CHECK(dq::parse_double(" 0.5 ") == 0.5);
  CHECK(dq::parse_double("+1e-3") == 1e-3);
  CHECK_FALSE(dq::parse_double("").has_value());
  CHECK_FALSE(dq::parse_double("0.5x").has_value());
  CHECK_FALSE(dq::parse_double("gene").has_value());
}

TEST_CASE("RFC 4180 records") {
  std::istringstream in("a,\"b,c\",\"say \"\"hi\"\"\"\r\n1,2,3\n\"multi\nline\",x,y\n");
  const auto r = dq::read_csv(in);
  REQUIRE(r.size() == 3);
  CHECK(r[0].fields == std::vector<std::string>{"a", "b,c", "say \"hi\""});
  CHECK(r[1].line == 2);
  CHECK(r[2].fields[0] == "multi\nline");
  CHECK(r[2].line == 3);
  std::istringstream bad("a,\"open\n");
  CHECK_THROWS_AS(dq::read_csv(bad), dq::ParseError);
  CHECK(dq::csv_escape("plain") == "plain");
  CHECK(dq::csv_escape("a,b") == "\"a,b\"");
  CHECK(dq::csv_escape("q\"") == "\"q\"\"\"");
}

TEST_CASE("P-value files") {
  std::istringstream lines("0.5\n1\n\n0.02857142857\n");
  CHECK(dq::read_pvalues(lines) == std::vector<double>{0.5, 1.0, 0.02857142857});
  std::istringstream column("gene,pvalue,other\ng1,0.1,x\ng2,0.9,y\n");
  CHECK(dq::read_pvalues(column) == std::vector<double>{0.1, 0.9});
  std::istringstream header("p\n0.3\n");
  CHECK(dq::read_pvalues(header) == std::vector<double>{0.3});
  std::istringstream bad("0.5\nabc\n");
  try {
    (void)dq::read_pvalues(bad);
    FAIL("expected ParseError");
  } catch (const dq::ParseError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  std::istringstream zero("0.5\n0\n");
  CHECK_THROWS_AS(dq::read_pvalues(zero), dq::ParseError);
  std::istringstream empty("");
  CHECK_THROWS_AS(dq::read_pvalues(empty), dq::ParseError);
}

TEST_CASE("matrix files") {
  std::istringstream with_ids("gene,a1,a2,b1,b2\ng1,1,2,3,4\ng2,5,6,7,8\n");
  const auto m = dq::read_matrix(with_ids);
  CHECK(m.header.size() == 5);
  CHECK(m.ids == std::vector<std::string>{"g1", "g2"});
  CHECK(m.rows[1] == std::vector<double>{5, 6, 7, 8});

  std::istringstream numeric_ids("1,0.1,0.2,0.3,0.4\n2,0.5,0.6,0.7,0.8\n");
  const auto n = dq::read_matrix(numeric_ids, 4);
  CHECK(n.ids == std::vector<std::string>{"1", "2"});
  CHECK(n.rows[0].size() == 4);

  std::istringstream plain("1,2,3,4\n5,6,7,8\n");
  const auto p = dq::read_matrix(plain);
  CHECK(p.header.empty());
  CHECK(p.ids.empty());
  CHECK(p.rows.size() == 2);

  std::istringstream ragged("1,2,3,4\n5,6,7\n");
  CHECK_THROWS_AS(dq::read_matrix(ragged), dq::ParseError);
  std::istringstream cell("1,2,3,4\n5,x,7,8\n");
  try {
    (void)dq::read_matrix(cell, 4);
    FAIL("expected ParseError");
  } catch (const dq::ParseError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  std::istringstream width("1,2,3\n");
  CHECK_THROWS_AS(dq::read_matrix(width, 5), dq::ParseError);
}

TEST_CASE("support specifications") {
  CHECK(dq::parse_support_spec("uniform:35") == dq::classical_uniform_support(35));
  CHECK(dq::parse_support_spec("ks:4:4") == dq::exact_support(dq::TestKind::ks, 4, 4));
  CHECK(dq::parse_support_spec("abs:5:5") == dq::classical_uniform_support(126));
  CHECK(dq::parse_support_spec("signed_rank:5:0") == dq::signed_rank_support(5));
  const auto s = dq::parse_support_spec("8/35, 1/35 27/35,1");
  CHECK(s[0] == Rational(1, 35));
  CHECK(s.size() == 4);
  CHECK_THROWS(dq::parse_support_spec("t:4:4"));
  CHECK_THROWS(dq::parse_support_spec("1/2,3/4"));
  CHECK_THROWS(dq::parse_support_spec("bogus:1"));
}

TEST_CASE("config parsing") {
  const auto c = dq::parse_config(R"({"family":"scale","m":50,"n1":8,"n2":8,"delta":0.3,
      "dependence":"dependent","test":"ansari_bradley","replicates":10,"alpha":0.1,
      "seed":18446744073709551615,"methods":["SS","chen","Real"]})");
  CHECK(c.family == dq::Family::scale);
  CHECK(c.m == 50);
  CHECK(c.dependence == dq::DependenceSpec::dependent());
  CHECK(c.test == dq::TestKind::ansari_bradley);
  CHECK(c.seed == UINT64_MAX);
  CHECK(c.methods == std::vector<dq::Pi0Method>{dq::Pi0Method::ss, dq::Pi0Method::chen, dq::Pi0Method::real});

  const auto defaults = dq::parse_config("{}");
  CHECK(defaults == dq::ScenarioConfig{});

  try {
    (void)dq::parse_config(R"({"m":"100","colour":1,"methods":["SS","Storey"],"test":"x"})");
    FAIL("expected ParseError");
  } catch (const dq::ParseError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("$.m") != std::string::npos);
    CHECK(msg.find("$.colour: unknown key") != std::string::npos);
    CHECK(msg.find("$.methods[1]") != std::string::npos);
    CHECK(msg.find("$.test") != std::string::npos);
  }
  CHECK_THROWS_AS(dq::parse_config(R"({"delta":1.5})"), dq::ParseError);
  CHECK_THROWS_AS(dq::parse_config("[1,2]"), dq::ParseError);
  CHECK_THROWS_AS(dq::parse_config("{"), dq::ParseError);
  CHECK(dq::parse_config(dq::config_to_json(c)) == c);
}

TEST_CASE("report round trip") {
  dq::ScenarioConfig c;
  c.m = 30;
  c.replicates = 4;
  c.seed = 12;
  const auto report = dq::run_monte_carlo(c, 1);
  CHECK(dq::report_from_json(dq::report_to_json(report)) == report);

  c.replicates = 1;
  c.delta = 0.0;
  const auto single = dq::run_monte_carlo(c, 1);
  CHECK(dq::report_from_json(dq::report_to_json(single)) == single);
  const auto csv = dq::report_to_csv(single);
  CHECK(csv.rfind("method,fdr,power,bias,sd,mean_rejections\n", 0) == 0);
  CHECK(csv.find("SS,0,,") != std::string::npos);

  c.test = dq::TestKind::ji;
  c.ji.bandwidth = 0.7;
  c.delta = 0.5;
  c.replicates = 2;
  const auto ji = dq::run_monte_carlo(c, 1);
  CHECK(dq::report_from_json(dq::report_to_json(ji)) == ji);
}

TEST_CASE("analysis tables") {
  const std::vector<std::vector<double>> rows = {
      {1, 2, 3, 4, 11, 12, 13, 14}, {1, 5, 3, 7, 2, 6, 4, 8}, {1, 1, 2, 3, 4, 5, 6, 7}};
  const dq::RowTester tester(dq::TestKind::wilcoxon, 4, 4);
  dq::AnalysisOptions o;
  o.methods = {dq::Pi0Method::ss, dq::Pi0Method::liang};
  o.alpha_grid = {0.05, 0.5};
  const std::vector<std::string> ids = {"a", "b", "c"};
  const auto r = dq::analyze_matrix(rows, ids, tester, o);
  CHECK(r.variables[0].exact == Rational(1, 35));
  CHECK_FALSE(r.variables[2].pvalue.has_value());
  CHECK(r.variables[2].error.find("tied") != std::string::npos);
  const auto csv = dq::analysis_to_csv(r);
  CHECK(csv.rfind("id,pvalue,fraction,q_SS,q_Liang,rejected_SS,rejected_Liang,error\n", 0) == 0);
  CHECK(csv.find("a,0.02857142857,1/35,") != std::string::npos);
  CHECK(dq::analysis_summary_csv(r).rfind("method,pi0,raw,lambda,fallback,alpha,rejections\n", 0) == 0);
  CHECK(dq::analysis_sweep_csv(r).find("0.5,") != std::string::npos);
  CHECK(dq::analysis_to_json(r).find("\"error\"") != std::string::npos);
}
