#include "dq/io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <iterator>
#include <sstream>

#include <json.hpp>

#include "dq/error.hpp"

namespace dq {

using nlohmann::json;

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

bool blank_record(const CsvRecord& r) {
  return r.fields.size() == 1 && trim(r.fields[0]).empty();
}

std::string line_prefix(std::size_t line) { return "line " + std::to_string(line) + ": "; }

json optional_number(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

}  // namespace

std::string format_decimal(double value) {
  if (std::isnan(value)) return {};
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value,
                                 std::chars_format::general, 10);
  std::string out(buf.data(), res.ptr);
  // Drop trailing zeros left by the fixed precision.
  const auto exp = out.find('e');
  std::string mantissa = out.substr(0, exp);
  const std::string tail = exp == std::string::npos ? "" : out.substr(exp);
  if (mantissa.find('.') != std::string::npos) {
    while (mantissa.back() == '0') mantissa.pop_back();
    if (mantissa.back() == '.') mantissa.pop_back();
  }
  return mantissa + tail;
}

std::optional<double> parse_double(std::string_view text) noexcept {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  if (text.empty()) return std::nullopt;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  return v;
}

std::vector<CsvRecord> read_csv(std::istream& in) {
  const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  std::vector<CsvRecord> records;
  CsvRecord current{1, {}};
  std::string field;
  bool quoted = false;
  bool field_was_quoted = false;
  std::size_t line = 1;
  std::size_t i = 0;
  // UTF-8 byte order mark.
  if (text.size() >= 3 && text.compare(0, 3, "\xEF\xBB\xBF") == 0) i = 3;
  auto end_record = [&] {
    current.fields.push_back(std::move(field));
    field.clear();
    field_was_quoted = false;
    records.push_back(std::move(current));
    current = CsvRecord{line, {}};
  };
  for (; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!trim(field).empty() || field_was_quoted) {
          throw ParseError(line_prefix(line) + "unexpected quote inside a field");
        }
        field.clear();
        quoted = true;
        field_was_quoted = true;
        break;
      case ',':
        current.fields.push_back(std::move(field));
        field.clear();
        field_was_quoted = false;
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') break;
        ++line;
        end_record();
        break;
      case '\n':
        ++line;
        end_record();
        break;
      default:
        field.push_back(c);
    }
  }
  if (quoted) throw ParseError(line_prefix(current.line) + "unterminated quoted field");
  if (!field.empty() || !current.fields.empty() || field_was_quoted) end_record();
  return records;
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::vector<double> read_pvalues(std::istream& in) {
  auto records = read_csv(in);
  std::erase_if(records, blank_record);
  if (records.empty()) throw ParseError("no P-values found");

  std::size_t column = 0;
  std::size_t first = 0;
  const auto& head = records.front().fields;
  const auto named = std::find_if(head.begin(), head.end(),
                                  [](const std::string& f) { return lower(trim(f)) == "pvalue"; });
  if (named != head.end()) {
    column = static_cast<std::size_t>(named - head.begin());
    first = 1;
  } else if (head.size() == 1 && !parse_double(head[0])) {
    first = 1;  // a single-column header with another name
  }

  std::vector<double> out;
  for (std::size_t r = first; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (first == 0 && rec.fields.size() != 1) {
      throw ParseError(line_prefix(rec.line) + "expected one P-value per line");
    }
    if (column >= rec.fields.size()) throw ParseError(line_prefix(rec.line) + "missing pvalue column");
    const auto v = parse_double(rec.fields[column]);
    if (!v) throw ParseError(line_prefix(rec.line) + "not a number: '" + rec.fields[column] + "'");
    if (!(*v > 0.0 && *v <= 1.0)) {
      throw ParseError(line_prefix(rec.line) + "P-value " + rec.fields[column] + " outside (0, 1]");
    }
    out.push_back(*v);
  }
  if (out.empty()) throw ParseError("no P-values found");
  return out;
}

DataMatrix read_matrix(std::istream& in, std::optional<int> columns) {
  auto records = read_csv(in);
  std::erase_if(records, blank_record);
  if (records.empty()) throw ParseError("empty matrix file");

  DataMatrix out;
  std::size_t first = 0;
  const auto& head = records.front().fields;
  if (std::any_of(head.begin(), head.end(), [](const std::string& f) { return !parse_double(f); })) {
    out.header = head;
    first = 1;
  }
  if (first == records.size()) throw ParseError("matrix file has a header but no rows");

  const std::size_t width = records[first].fields.size();
  bool id_column = false;
  if (columns && width == static_cast<std::size_t>(*columns) + 1) {
    id_column = true;
  } else {
    for (std::size_t r = first; r < records.size() && !id_column; ++r) {
      id_column = !records[r].fields.empty() && !parse_double(records[r].fields[0]);
    }
  }
  if (columns && width != static_cast<std::size_t>(*columns) + (id_column ? 1 : 0)) {
    throw ParseError(line_prefix(records[first].line) + "expected " + std::to_string(*columns) +
                     " data columns, found " + std::to_string(width - (id_column ? 1 : 0)));
  }
  if (!out.header.empty() && out.header.size() != width) {
    throw ParseError(line_prefix(records.front().line) + "header has " +
                     std::to_string(out.header.size()) + " fields, rows have " +
                     std::to_string(width));
  }

  for (std::size_t r = first; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.fields.size() != width) {
      throw ParseError(line_prefix(rec.line) + "expected " + std::to_string(width) +
                       " fields, found " + std::to_string(rec.fields.size()));
    }
    std::size_t c = 0;
    if (id_column) out.ids.emplace_back(trim(rec.fields[c++]));
    std::vector<double> row;
    row.reserve(width - c);
    for (; c < width; ++c) {
      const auto v = parse_double(rec.fields[c]);
      if (!v || !std::isfinite(*v)) {
        throw ParseError(line_prefix(rec.line) + "column " + std::to_string(c + 1) +
                         ": not a finite number: '" + rec.fields[c] + "'");
      }
      row.push_back(*v);
    }
    out.rows.push_back(std::move(row));
  }
  return out;
}

Support parse_support_spec(std::string_view spec) {
  spec = trim(spec);
  const auto colon = spec.find(':');
  if (colon != std::string_view::npos) {
    const auto name = spec.substr(0, colon);
    const auto rest = spec.substr(colon + 1);
    auto integer = [&](std::string_view s) {
      const auto v = Rational::parse(s);
      if (v.den() != 1) throw ParseError("support spec: expected an integer, got '" + std::string(s) + "'");
      return v.num();
    };
    if (name == "uniform") return classical_uniform_support(integer(rest));
    const auto kind = parse_test_kind(name);
    const auto colon2 = rest.find(':');
    if (!kind || colon2 == std::string_view::npos) {
      throw ParseError("support spec must be 'uniform:N', '<test>:<n1>:<n2>' or a list of fractions");
    }
    const auto n1 = integer(rest.substr(0, colon2));
    const auto n2 = integer(rest.substr(colon2 + 1));
    if (n1 < 1 || n2 < 0 || n1 > 64 || n2 > 64) throw ParseError("support spec: sample sizes out of range");
    auto support = pvalue_support(*kind, static_cast<int>(n1), static_cast<int>(n2));
    if (!support) throw ParseError("support spec: '" + std::string(name) + "' has continuous P-values");
    return *support;
  }
  std::vector<Rational> points;
  std::string token;
  auto flush = [&] {
    if (!token.empty()) points.push_back(Rational::parse(token));
    token.clear();
  };
  for (char c : spec) {
    if (c == ',' || c == ' ' || c == '\t' || c == ';' || c == '\n') {
      flush();
    } else {
      token.push_back(c);
    }
  }
  flush();
  if (points.empty()) throw ParseError("empty support spec");
  std::sort(points.begin(), points.end());
  return Support(std::move(points));
}

namespace {

const std::array<std::string_view, 13> kConfigKeys = {
    "family", "mu", "m", "n1", "n2", "delta", "dependence", "test",
    "replicates", "alpha", "seed", "methods", "bandwidth"};

class ConfigReader {
 public:
  explicit ConfigReader(const json& j) : j_(j) {}

  void number(const char* key, double& out) {
    if (!j_.contains(key)) return;
    const auto& v = j_.at(key);
    if (!v.is_number()) return fail(key, "expected a number");
    out = v.get<double>();
  }
  void integer(const char* key, int& out) {
    if (!j_.contains(key)) return;
    const auto& v = j_.at(key);
    if (!v.is_number_integer()) return fail(key, "expected an integer");
    const auto x = v.get<std::int64_t>();
    if (x < INT32_MIN || x > INT32_MAX) return fail(key, "integer out of range");
    out = static_cast<int>(x);
  }
  void seed(const char* key, std::uint64_t& out) {
    if (!j_.contains(key)) return;
    const auto& v = j_.at(key);
    if (!v.is_number_unsigned()) return fail(key, "expected a non-negative integer");
    out = v.get<std::uint64_t>();
  }
  template <class F>
  void string(const char* key, F&& assign) {
    if (!j_.contains(key)) return;
    const auto& v = j_.at(key);
    if (!v.is_string()) return fail(key, "expected a string");
    if (!assign(v.get<std::string>())) fail(key, "unknown value '" + v.get<std::string>() + "'");
  }
  void methods(const char* key, std::vector<Pi0Method>& out) {
    if (!j_.contains(key)) return;
    const auto& v = j_.at(key);
    if (!v.is_array()) return fail(key, "expected an array of method names");
    std::vector<Pi0Method> parsed;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const std::string path = std::string(key) + "[" + std::to_string(i) + "]";
      if (!v[i].is_string()) {
        fail(path, "expected a string");
        continue;
      }
      const auto m = parse_pi0_method(v[i].get<std::string>());
      if (!m) {
        fail(path, "unknown method '" + v[i].get<std::string>() + "'");
      } else if (std::find(parsed.begin(), parsed.end(), *m) != parsed.end()) {
        fail(path, "duplicate method");
      } else {
        parsed.push_back(*m);
      }
    }
    out = std::move(parsed);
  }
  void fail(std::string_view path, const std::string& what) {
    errors_.push_back("$." + std::string(path) + ": " + what);
  }
  std::vector<std::string>& errors() { return errors_; }

 private:
  const json& j_;
  std::vector<std::string> errors_;
};

[[noreturn]] void throw_errors(const std::vector<std::string>& errors) {
  std::string msg = "invalid config:";
  for (const auto& e : errors) msg += "\n  " + e;
  throw ParseError(msg);
}

ScenarioConfig config_from(const json& j) {
  if (!j.is_object()) throw ParseError("invalid config:\n  $: expected an object");
  ScenarioConfig c;
  ConfigReader r(j);
  for (const auto& [key, value] : j.items()) {
    if (std::find(kConfigKeys.begin(), kConfigKeys.end(), key) == kConfigKeys.end()) {
      r.fail(key, "unknown key");
    }
  }
  r.string("family", [&](const std::string& s) {
    const auto f = parse_family(s);
    if (f) c.family = *f;
    return f.has_value();
  });
  r.number("mu", c.mu);
  r.integer("m", c.m);
  r.integer("n1", c.n1);
  r.integer("n2", c.n2);
  r.number("delta", c.delta);
  r.string("dependence", [&](const std::string& s) {
    if (s == "independent") c.dependence = DependenceSpec::independent();
    else if (s == "dependent") c.dependence = DependenceSpec::dependent();
    else return false;
    return true;
  });
  r.string("test", [&](const std::string& s) {
    const auto t = parse_test_kind(s);
    if (t) c.test = *t;
    return t.has_value();
  });
  r.integer("replicates", c.replicates);
  r.number("alpha", c.alpha);
  r.seed("seed", c.seed);
  r.methods("methods", c.methods);
  r.number("bandwidth", c.ji.bandwidth);
  if (!r.errors().empty()) throw_errors(r.errors());
  try {
    c.validate();
  } catch (const DomainError& e) {
    throw_errors({std::string("$: ") + e.what()});
  }
  return c;
}

json config_json(const ScenarioConfig& c) {
  json methods = json::array();
  for (auto m : c.methods) methods.push_back(std::string(to_string(m)));
  json j = {
      {"family", std::string(to_string(c.family))},
      {"mu", c.mu},
      {"m", c.m},
      {"n1", c.n1},
      {"n2", c.n2},
      {"delta", c.delta},
      {"dependence", std::string(to_string(c.dependence.kind))},
      {"test", std::string(to_string(c.test))},
      {"replicates", c.replicates},
      {"alpha", c.alpha},
      {"seed", c.seed},
      {"methods", methods},
  };
  if (c.test == TestKind::ji) j["bandwidth"] = c.ji.bandwidth;
  return j;
}

json parse_json(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
}

std::string lambda_field(const Pi0Estimate& e) {
  return e.lambda ? format_decimal(*e.lambda) : std::string();
}

json pi0_json(const Pi0Estimate& e) {
  return {{"method", std::string(to_string(e.method))},
          {"value", e.value},
          {"raw", e.raw},
          {"lambda", optional_number(e.lambda)},
          {"fallback", e.fallback}};
}

}  // namespace

ScenarioConfig parse_config(std::string_view json_text) { return config_from(parse_json(json_text)); }

std::string config_to_json(const ScenarioConfig& config) { return config_json(config).dump(2) + "\n"; }

std::string report_to_json(const McReport& report) {
  json methods = json::array();
  for (const auto& s : report.methods) {
    methods.push_back({{"method", std::string(to_string(s.method))},
                       {"fdr", s.fdr},
                       {"power", optional_number(s.power)},
                       {"bias", s.pi0_bias},
                       {"sd", optional_number(s.pi0_sd)},
                       {"mean_rejections", s.mean_rejections}});
  }
  const json j = {{"config", config_json(report.config)}, {"results", methods}};
  return j.dump(2) + "\n";
}

McReport report_from_json(std::string_view json_text) {
  const json j = parse_json(json_text);
  if (!j.is_object() || !j.contains("config") || !j.contains("results") || !j["results"].is_array()) {
    throw ParseError("report JSON needs 'config' and 'results'");
  }
  McReport report;
  report.config = config_from(j["config"]);
  try {
    for (const auto& r : j["results"]) {
      MethodSummary s;
      const auto m = parse_pi0_method(r.at("method").get<std::string>());
      if (!m) throw ParseError("unknown method in report");
      s.method = *m;
      s.fdr = r.at("fdr").get<double>();
      if (!r.at("power").is_null()) s.power = r.at("power").get<double>();
      s.pi0_bias = r.at("bias").get<double>();
      if (!r.at("sd").is_null()) s.pi0_sd = r.at("sd").get<double>();
      s.mean_rejections = r.at("mean_rejections").get<double>();
      report.methods.push_back(s);
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed report: ") + e.what());
  }
  return report;
}

std::string report_to_csv(const McReport& report) {
  std::string out = "method,fdr,power,bias,sd,mean_rejections\n";
  for (const auto& s : report.methods) {
    out += std::string(to_string(s.method)) + "," + format_decimal(s.fdr) + "," +
           (s.power ? format_decimal(*s.power) : "") + "," + format_decimal(s.pi0_bias) + "," +
           (s.pi0_sd ? format_decimal(*s.pi0_sd) : "") + "," + format_decimal(s.mean_rejections) +
           "\n";
  }
  return out;
}

std::string support_to_csv(const Support& support) {
  std::string out = "point,fraction,decimal,mass\n";
  for (std::size_t i = 0; i < support.size(); ++i) {
    const auto mass = support[i] - (i == 0 ? Rational(0) : support[i - 1]);
    out += std::to_string(i + 1) + "," + support[i].str() + "," + format_decimal(support.value(i)) +
           "," + mass.str() + "\n";
  }
  return out;
}

std::string support_to_json(const Support& support) {
  json points = json::array();
  for (std::size_t i = 0; i < support.size(); ++i) {
    points.push_back({{"fraction", support[i].str()}, {"decimal", support.value(i)}});
  }
  return json{{"support", points}}.dump(2) + "\n";
}

std::string pi0_to_csv(const std::vector<Pi0Estimate>& estimates) {
  std::string out = "method,value,raw,lambda,fallback\n";
  for (const auto& e : estimates) {
    out += std::string(to_string(e.method)) + "," + format_decimal(e.value) + "," +
           format_decimal(e.raw) + "," + lambda_field(e) + "," + (e.fallback ? "1" : "0") + "\n";
  }
  return out;
}

std::string pi0_to_json(const std::vector<Pi0Estimate>& estimates) {
  json arr = json::array();
  for (const auto& e : estimates) arr.push_back(pi0_json(e));
  return json{{"pi0", arr}}.dump(2) + "\n";
}

std::string analysis_to_csv(const AnalysisResult& result) {
  std::string out = "id,pvalue,fraction";
  for (const auto& m : result.methods) out += ",q_" + std::string(to_string(m.pi0.method));
  for (const auto& m : result.methods) out += ",rejected_" + std::string(to_string(m.pi0.method));
  out += ",error\n";
  for (std::size_t i = 0; i < result.variables.size(); ++i) {
    const auto& v = result.variables[i];
    out += csv_escape(v.id) + "," + (v.pvalue ? format_decimal(*v.pvalue) : "") + "," +
           (v.exact ? v.exact->str() : "");
    for (const auto& m : result.methods) out += "," + format_decimal(m.qvalues[i]);
    for (const auto& m : result.methods) out += v.pvalue ? (m.rejected[i] ? ",1" : ",0") : ",";
    out += "," + csv_escape(v.error) + "\n";
  }
  return out;
}

std::string analysis_summary_csv(const AnalysisResult& result) {
  std::string out = "method,pi0,raw,lambda,fallback,alpha,rejections\n";
  for (const auto& m : result.methods) {
    out += std::string(to_string(m.pi0.method)) + "," + format_decimal(m.pi0.value) + "," +
           format_decimal(m.pi0.raw) + "," + lambda_field(m.pi0) + "," +
           (m.pi0.fallback ? "1" : "0") + "," + format_decimal(result.alpha) + "," +
           std::to_string(m.rejections) + "\n";
  }
  return out;
}

std::string analysis_sweep_csv(const AnalysisResult& result) {
  std::string out = "alpha";
  for (const auto& m : result.methods) out += "," + std::string(to_string(m.pi0.method));
  out += "\n";
  for (std::size_t k = 0; k < result.alpha_grid.size(); ++k) {
    out += format_decimal(result.alpha_grid[k]);
    for (const auto& m : result.methods) out += "," + std::to_string(m.sweep[k]);
    out += "\n";
  }
  return out;
}

std::string analysis_to_json(const AnalysisResult& result) {
  json vars = json::array();
  for (std::size_t i = 0; i < result.variables.size(); ++i) {
    const auto& v = result.variables[i];
    json q = json::object();
    json rej = json::object();
    for (const auto& m : result.methods) {
      const std::string name(to_string(m.pi0.method));
      q[name] = std::isnan(m.qvalues[i]) ? json(nullptr) : json(m.qvalues[i]);
      rej[name] = v.pvalue ? json(static_cast<bool>(m.rejected[i])) : json(nullptr);
    }
    json entry = {{"id", v.id},
                  {"pvalue", optional_number(v.pvalue)},
                  {"fraction", v.exact ? json(v.exact->str()) : json(nullptr)},
                  {"q", q},
                  {"rejected", rej}};
    if (!v.error.empty()) entry["error"] = v.error;
    vars.push_back(entry);
  }
  json summary = json::array();
  for (const auto& m : result.methods) {
    auto s = pi0_json(m.pi0);
    s["rejections"] = m.rejections;
    if (!result.alpha_grid.empty()) s["sweep"] = m.sweep;
    summary.push_back(s);
  }
  json j = {{"alpha", result.alpha}, {"variables", vars}, {"summary", summary}};
  if (!result.alpha_grid.empty()) j["alpha_grid"] = result.alpha_grid;
  return j.dump(2) + "\n";
}

}  // namespace dq
