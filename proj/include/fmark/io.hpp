#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "fmark/core.hpp"
#include "fmark/estimators.hpp"
#include "fmark/inference.hpp"

namespace fmark::io {

/// Thrown for unreadable or unwritable files (exit code 1 at the CLI).
class io_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// 17 significant digits; NaN is written as NA.
std::string format_number(double v);

/// Parses a finite decimal or NA (-> NaN when allow_na). Throws parse_error
/// mentioning `where`.
double parse_number(std::string_view text, std::string_view where, bool allow_na = false);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// Comma-separated, no quoting; blank lines are skipped, whitespace trimmed.
CsvTable read_csv(const std::filesystem::path& path);

struct LoadedData {
  std::vector<std::string> ids;
  PointPattern pattern;
  std::optional<FunctionalMarkSet> marks;
};

/// Pattern CSV `id,x,y[,type]` plus zero or more marks CSVs (one per
/// channel) `id,t_<t0>,t_<t1>,...`, joined on id.
LoadedData load_pattern(const std::filesystem::path& pattern_csv,
                        const std::vector<std::filesystem::path>& marks_csvs,
                        const Window& window);

/// Point ids default to 1..n.
std::vector<std::string> default_ids(std::size_t n);

void write_pattern_csv(const std::filesystem::path& path, const PointPattern& pattern,
                       const std::vector<std::string>& ids);
void write_marks_csv(const std::filesystem::path& path, const FunctionalMarkSet& marks,
                     std::size_t channel, const std::vector<std::string>& ids);

/// `r,observed`.
void write_curve_csv(const std::filesystem::path& path, const SummaryCurve& curve);
/// `r,observed,lower,upper,theoretical`.
void write_envelope_csv(const std::filesystem::path& path, const EnvelopeBand& band);

struct CurveTable {
  std::vector<double> r;
  std::vector<double> observed;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<double> theoretical;
  bool has_band() const { return !lower.empty(); }
};

CurveTable read_curve_csv(const std::filesystem::path& path);

/// `index,value` rows for the scalar nearest-neighbour indices.
void write_nn_csv(const std::filesystem::path& path, const IndexReport& report);
/// `k,K_k,Gamma_k,D_k`.
void write_knn_csv(const std::filesystem::path& path, const IndexReport& report);

/// Writes text, creating parent directories; throws io_error with the path.
void write_text(const std::filesystem::path& path, std::string_view text);

}  // namespace fmark::io
