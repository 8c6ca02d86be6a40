#include "fmark/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace fmark::io {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.emplace_back(trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string where(const std::filesystem::path& path, std::size_t row, std::string_view column) {
  return path.filename().string() + " row " + std::to_string(row) + " column " + std::string(column);
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw io_error("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot open " + path.string() + " for writing");
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw io_error("write failed for " + path.string());
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "NA";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

double parse_number(std::string_view text, std::string_view at, bool allow_na) {
  text = trim(text);
  if (text.empty()) throw parse_error("empty cell at " + std::string(at) + " (gaps are not imputed)");
  if (text == "NA") {
    if (allow_na) return std::numeric_limits<double>::quiet_NaN();
    throw parse_error("NA not allowed at " + std::string(at));
  }
  double v = 0.0;
  const char* first = text.data();
  if (*first == '+') ++first;
  const auto res = std::from_chars(first, text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size() || !std::isfinite(v)) {
    throw parse_error("cannot parse '" + std::string(text) + "' as a number at " + std::string(at));
  }
  return v;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open " + path.string());
  CsvTable table;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    if (!have_header) {
      table.header = split(line);
      have_header = true;
    } else {
      table.rows.push_back(split(line));
    }
  }
  if (!have_header) throw schema_error(path.filename().string() + " is empty");
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    if (table.rows[i].size() != table.header.size()) {
      throw schema_error(path.filename().string() + " row " + std::to_string(i + 1) + " has " +
                         std::to_string(table.rows[i].size()) + " cells, expected " +
                         std::to_string(table.header.size()));
    }
  }
  return table;
}

std::vector<std::string> default_ids(std::size_t n) {
  std::vector<std::string> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = std::to_string(i + 1);
  return ids;
}

LoadedData load_pattern(const std::filesystem::path& pattern_csv,
                        const std::vector<std::filesystem::path>& marks_csvs,
                        const Window& window) {
  const CsvTable pt = read_csv(pattern_csv);
  const auto& hdr = pt.header;
  const bool typed = hdr.size() == 4 && hdr[3] == "type";
  if (hdr.size() < 3 || hdr[0] != "id" || hdr[1] != "x" || hdr[2] != "y" ||
      (hdr.size() == 4 && !typed) || hdr.size() > 4) {
    throw schema_error(pattern_csv.filename().string() + ": header must be id,x,y[,type]");
  }
  std::vector<std::string> ids;
  std::vector<Point> points;
  std::vector<int> labels;
  std::map<std::string, std::size_t> index;
  for (std::size_t r = 0; r < pt.rows.size(); ++r) {
    const auto& row = pt.rows[r];
    if (row[0].empty()) throw schema_error(where(pattern_csv, r + 1, "id") + ": empty id");
    if (!index.emplace(row[0], r).second) {
      throw schema_error(pattern_csv.filename().string() + ": duplicate point id '" + row[0] + "'");
    }
    const Point p{parse_number(row[1], where(pattern_csv, r + 1, "x")),
                  parse_number(row[2], where(pattern_csv, r + 1, "y"))};
    if (!window.contains(p)) {
      throw domain_error("point id '" + row[0] + "' lies outside the window");
    }
    if (typed) {
      int t = 0;
      const auto res = std::from_chars(row[3].data(), row[3].data() + row[3].size(), t);
      if (res.ec != std::errc() || res.ptr != row[3].data() + row[3].size() || t < 1) {
        throw parse_error("type at " + where(pattern_csv, r + 1, "type") +
                          " must be an integer >= 1");
      }
      labels.push_back(t);
    }
    ids.push_back(row[0]);
    points.push_back(p);
  }
  LoadedData data{ids,
                  PointPattern(window, std::move(points),
                               typed ? std::optional<std::vector<int>>(std::move(labels)) : std::nullopt),
                  std::nullopt};
  if (marks_csvs.empty()) return data;

  const std::size_t n = ids.size();
  std::optional<std::vector<double>> times;
  std::vector<double> values;
  const std::size_t p = marks_csvs.size();
  std::vector<std::vector<double>> channel_values(p);
  for (std::size_t ch = 0; ch < p; ++ch) {
    const auto& path = marks_csvs[ch];
    const CsvTable mt = read_csv(path);
    if (mt.header.size() < 2 || mt.header[0] != "id") {
      throw schema_error(path.filename().string() + ": header must be id,t_<t0>,t_<t1>,...");
    }
    std::vector<double> t;
    for (std::size_t c = 1; c < mt.header.size(); ++c) {
      const std::string& h = mt.header[c];
      if (h.rfind("t_", 0) != 0) {
        throw schema_error(path.filename().string() + ": time column '" + h + "' must start with t_");
      }
      t.push_back(parse_number(std::string_view(h).substr(2), path.filename().string() + " header " + h));
      if (t.size() > 1 && !(t.back() > t[t.size() - 2])) {
        throw schema_error(path.filename().string() + ": time header is not strictly increasing at " + h);
      }
    }
    if (!times) {
      times = t;
    } else if (*times != t) {
      throw schema_error(path.filename().string() + ": time header differs from " +
                         marks_csvs.front().filename().string());
    }
    const std::size_t width = t.size();
    std::vector<double>& vals = channel_values[ch];
    vals.assign(n * width, 0.0);
    std::vector<char> seen(n, 0);
    for (std::size_t r = 0; r < mt.rows.size(); ++r) {
      const auto& row = mt.rows[r];
      const auto it = index.find(row[0]);
      if (it == index.end()) {
        throw schema_error(path.filename().string() + " row " + std::to_string(r + 1) +
                           ": point id '" + row[0] + "' is not in the pattern");
      }
      if (seen[it->second]) {
        throw schema_error(path.filename().string() + ": duplicate row for point id '" + row[0] + "'");
      }
      seen[it->second] = 1;
      for (std::size_t c = 1; c < row.size(); ++c) {
        vals[it->second * width + (c - 1)] = parse_number(row[c], where(path, r + 1, mt.header[c]));
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (!seen[i]) {
        throw schema_error(path.filename().string() + " has no row for point id '" + ids[i] + "'");
      }
    }
  }
  const std::size_t width = times->size();
  FunctionalMarkSet marks(TimeGrid(*times), n, p);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t ch = 0; ch < p; ++ch) {
      auto curve = marks.curve(i, ch);
      for (std::size_t k = 0; k < width; ++k) curve[k] = channel_values[ch][i * width + k];
    }
  }
  data.marks = std::move(marks);
  return data;
}

void write_pattern_csv(const std::filesystem::path& path, const PointPattern& pattern,
                       const std::vector<std::string>& ids) {
  if (ids.size() != pattern.size()) throw domain_error("id count differs from point count");
  auto out = open_out(path);
  out << (pattern.has_labels() ? "id,x,y,type\n" : "id,x,y\n");
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    out << ids[i] << ',' << format_number(pattern[i].x) << ',' << format_number(pattern[i].y);
    if (pattern.has_labels()) out << ',' << pattern.labels()[i];
    out << '\n';
  }
  finish(out, path);
}

void write_marks_csv(const std::filesystem::path& path, const FunctionalMarkSet& marks,
                     std::size_t channel, const std::vector<std::string>& ids) {
  if (ids.size() != marks.num_points()) throw domain_error("id count differs from point count");
  if (channel >= marks.num_channels()) throw domain_error("channel out of range");
  auto out = open_out(path);
  out << "id";
  for (double t : marks.grid().samples()) out << ",t_" << format_number(t);
  out << '\n';
  for (std::size_t i = 0; i < marks.num_points(); ++i) {
    out << ids[i];
    for (double v : marks.curve(i, channel)) out << ',' << format_number(v);
    out << '\n';
  }
  finish(out, path);
}

void write_curve_csv(const std::filesystem::path& path, const SummaryCurve& curve) {
  auto out = open_out(path);
  out << "r,observed\n";
  for (std::size_t k = 0; k < curve.r.size(); ++k) {
    out << format_number(curve.r[k]) << ',' << format_number(curve.values[k]) << '\n';
  }
  finish(out, path);
}

void write_envelope_csv(const std::filesystem::path& path, const EnvelopeBand& band) {
  auto out = open_out(path);
  out << "r,observed,lower,upper,theoretical\n";
  for (std::size_t k = 0; k < band.r.size(); ++k) {
    out << format_number(band.r[k]) << ',' << format_number(band.observed[k]) << ','
        << format_number(band.lower[k]) << ',' << format_number(band.upper[k]) << ','
        << format_number(band.theoretical[k]) << '\n';
  }
  finish(out, path);
}

CurveTable read_curve_csv(const std::filesystem::path& path) {
  const CsvTable t = read_csv(path);
  const bool plain = t.header == std::vector<std::string>{"r", "observed"};
  const bool band =
      t.header == std::vector<std::string>{"r", "observed", "lower", "upper", "theoretical"};
  if (!plain && !band) {
    throw schema_error(path.filename().string() +
                       ": header must be r,observed or r,observed,lower,upper,theoretical");
  }
  CurveTable out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    out.r.push_back(parse_number(row[0], where(path, r + 1, "r")));
    out.observed.push_back(parse_number(row[1], where(path, r + 1, "observed"), true));
    if (band) {
      out.lower.push_back(parse_number(row[2], where(path, r + 1, "lower"), true));
      out.upper.push_back(parse_number(row[3], where(path, r + 1, "upper"), true));
      out.theoretical.push_back(parse_number(row[4], where(path, r + 1, "theoretical"), true));
    }
  }
  return out;
}

void write_nn_csv(const std::filesystem::path& path, const IndexReport& report) {
  auto out = open_out(path);
  out << "index,value\n";
  const std::pair<const char*, double> rows[] = {
      {"gamma_nn", report.gamma_nn},       {"gamma_nn_raw", report.gamma_nn_raw},
      {"kappa_nn", report.kappa_nn},       {"c_nn", report.c_nn},
      {"tau_nn", report.tau_nn},           {"c_dotl_nn", report.c_dotl_nn},
      {"kappa_dotl_nn", report.kappa_dotl_nn},
  };
  for (const auto& [name, v] : rows) out << name << ',' << format_number(v) << '\n';
  finish(out, path);
}

void write_knn_csv(const std::filesystem::path& path, const IndexReport& report) {
  auto out = open_out(path);
  out << "k,K_k,Gamma_k,D_k\n";
  for (std::size_t k = 0; k < report.K_k.size(); ++k) {
    out << (k + 1) << ',' << format_number(report.K_k[k]) << ',' << format_number(report.Gamma_k[k])
        << ',' << format_number(report.D_k[k]) << '\n';
  }
  finish(out, path);
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  auto out = open_out(path);
  out << text;
  finish(out, path);
}

}  // namespace fmark::io
