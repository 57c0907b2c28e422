#pragma once

// File formats: CSV input, support specifications, JSON configs and the
// CSV / JSON reports written by the command-line tool.

#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dq/analysis.hpp"
#include "dq/pi0.hpp"
#include "dq/pvalue_core.hpp"
#include "dq/simulation.hpp"

namespace dq {

/// Shortest form with at most 10 significant digits, '.' as decimal
/// separator regardless of locale. Empty for NaN.
std::string format_decimal(double value);

/// Locale-independent parse of a whole field (surrounding blanks allowed).
std::optional<double> parse_double(std::string_view text) noexcept;

/// RFC 4180 records. Returns each record with the line it started on.
struct CsvRecord {
  std::size_t line = 0;
  std::vector<std::string> fields;
};
std::vector<CsvRecord> read_csv(std::istream& in);

/// One field per record, quoted when needed.
std::string csv_escape(std::string_view field);

/// One P-value per line, or the column named `pvalue` of a CSV with a header.
/// ParseError names the offending line.
std::vector<double> read_pvalues(std::istream& in);

struct DataMatrix {
  std::vector<std::string> header;  // empty when the file has none
  std::vector<std::string> ids;     // empty when there is no id column
  std::vector<std::vector<double>> rows;
};

/// Rows are variables, columns samples. The first record is a header when
/// any of its fields is not numeric. A leading id column is recognised when
/// its values are not numeric, or when the row has exactly `columns` + 1
/// fields. Ragged rows and non-numeric cells raise ParseError.
DataMatrix read_matrix(std::istream& in, std::optional<int> columns = std::nullopt);

/// "uniform:N", "<test>:<n1>:<n2>" (test support) or a list of fractions
/// separated by commas or blanks.
Support parse_support_spec(std::string_view spec);

/// Parses a scenario JSON object. Missing keys take their defaults; unknown
/// keys, wrong types and invalid values raise ParseError listing every
/// problem with its field path.
ScenarioConfig parse_config(std::string_view json_text);
std::string config_to_json(const ScenarioConfig& config);

std::string report_to_json(const McReport& report);
McReport report_from_json(std::string_view json_text);
/// method,fdr,power,bias,sd,mean_rejections; undefined cells left empty.
std::string report_to_csv(const McReport& report);

/// point,fraction,decimal,mass
std::string support_to_csv(const Support& support);
std::string support_to_json(const Support& support);

/// method,value,raw,lambda,fallback
std::string pi0_to_csv(const std::vector<Pi0Estimate>& estimates);
std::string pi0_to_json(const std::vector<Pi0Estimate>& estimates);

/// Per-variable table: id, pvalue, fraction, q_<method>..., rejected_<method>..., error.
std::string analysis_to_csv(const AnalysisResult& result);
/// method,pi0,raw,lambda,fallback,rejections
std::string analysis_summary_csv(const AnalysisResult& result);
/// alpha,<method>... rejection counts.
std::string analysis_sweep_csv(const AnalysisResult& result);
std::string analysis_to_json(const AnalysisResult& result);

}  // namespace dq
