#include <algorithm>
#include <cstdio>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "nearfield/bench.hpp"

namespace nearfield {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

std::string to_csv_row(const ResultRecord& r) {
  std::string row;
  row += r.method;
  row += ',' + r.sweep_name;
  row += ',' + fmt(r.sweep_value);
  row += ',' + std::to_string(r.trial);
  row += ',' + std::to_string(r.seed);
  row += ',' + fmt(r.nmse_linear);
  row += ',' + fmt(r.nmse_db);
  row += ',' + fmt(r.wall_ms);
  return row;
}

void write_csv(std::ostream& out, const std::vector<ResultRecord>& records, bool header) {
  if (header) out << kCsvHeader << '\n';
  for (const auto& r : records) out << to_csv_row(r) << '\n';
}

std::vector<ResultRecord> read_csv(std::istream& in) {
  std::vector<ResultRecord> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line == kCsvHeader) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 8)
      throw std::runtime_error("csv line " + std::to_string(lineno) + ": expected 8 fields");
    try {
      ResultRecord r;
      r.method = cells[0];
      r.sweep_name = cells[1];
      r.sweep_value = std::stod(cells[2]);
      r.trial = std::stoi(cells[3]);
      r.seed = std::stoull(cells[4]);
      r.nmse_linear = std::stod(cells[5]);
      r.nmse_db = std::stod(cells[6]);
      r.wall_ms = std::stod(cells[7]);
      out.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw std::runtime_error("csv line " + std::to_string(lineno) + ": malformed field");
    }
  }
  return out;
}

std::vector<SummaryRow> summarize(const std::vector<ResultRecord>& records,
                                  std::uint64_t bootstrap_seed, int resamples) {
  std::map<std::pair<std::string, double>, std::vector<const ResultRecord*>> groups;
  for (const auto& r : records) groups[{r.method, r.sweep_value}].push_back(&r);

  std::vector<SummaryRow> rows;
  for (const auto& [key, group] : groups) {
    SummaryRow row;
    row.method = key.first;
    row.sweep_value = key.second;
    row.trials = static_cast<int>(group.size());
    std::vector<double> x;
    x.reserve(group.size());
    for (const auto* r : group) {
      x.push_back(r->nmse_linear);
      if (!r->error.empty()) ++row.failures;
    }
    const double n = static_cast<double>(x.size());
    row.mean_linear = std::accumulate(x.begin(), x.end(), 0.0) / n;
    row.mean_db = to_db(row.mean_linear);

    // Percentile bootstrap of the mean, reported in dB.
    std::mt19937_64 rng(bootstrap_seed);
    std::uniform_int_distribution<std::size_t> pick(0, x.size() - 1);
    std::vector<double> means(std::max(resamples, 1));
    for (double& m : means) {
      double s = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) s += x[pick(rng)];
      m = s / n;
    }
    std::sort(means.begin(), means.end());
    auto quantile = [&](double q) {
      const double pos = q * (means.size() - 1);
      const auto lo = static_cast<std::size_t>(pos);
      const auto hi = std::min(lo + 1, means.size() - 1);
      return means[lo] + (pos - lo) * (means[hi] - means[lo]);
    };
    row.ci_low_db = to_db(quantile(0.025));
    row.ci_high_db = to_db(quantile(0.975));
    rows.push_back(row);
  }
  return rows;
}

void write_summary(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << "method,sweep_value,trials,mean_nmse_linear,mean_nmse_db,ci_low_db,ci_high_db,failures\n";
  for (const auto& r : rows) {
    out << r.method << ',' << fmt(r.sweep_value) << ',' << r.trials << ',' << fmt(r.mean_linear)
        << ',' << fmt(r.mean_db) << ',' << fmt(r.ci_low_db) << ',' << fmt(r.ci_high_db) << ','
        << r.failures << '\n';
  }
}

void write_traces(std::ostream& out, const std::vector<ResultRecord>& records) {
  out << "method,sweep_value,trial,iteration,objective\n";
  for (const auto& r : records) {
    for (std::size_t i = 0; i < r.objective_trace.size(); ++i)
      out << r.method << ',' << fmt(r.sweep_value) << ',' << r.trial << ',' << i << ','
          << fmt(r.objective_trace[i]) << '\n';
  }
}

void write_svg(std::ostream& out, const std::vector<SummaryRow>& rows, const std::string& x_label) {
  constexpr double W = 640, H = 420, left = 70, right = 150, top = 20, bottom = 50;
  const double pw = W - left - right, ph = H - top - bottom;

  double x0 = 0, x1 = 1, y0 = 0, y1 = 0;
  bool any_x = false, any_y = false;
  for (const auto& r : rows) {
    x0 = any_x ? std::min(x0, r.sweep_value) : r.sweep_value;
    x1 = any_x ? std::max(x1, r.sweep_value) : r.sweep_value;
    any_x = true;
    if (std::isfinite(r.mean_db)) {
      y0 = any_y ? std::min(y0, r.mean_db) : r.mean_db;
      y1 = any_y ? std::max(y1, r.mean_db) : r.mean_db;
      any_y = true;
    }
  }
  if (x1 == x0) x1 = x0 + 1;
  y0 = std::floor(y0 / 5) * 5;
  y1 = std::ceil(y1 / 5) * 5;
  if (y1 == y0) y1 = y0 + 5;
  auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return top + (y1 - y) / (y1 - y0) * ph; };

  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                 "#9467bd", "#8c564b", "#17becf"};
  std::map<std::string, std::vector<const SummaryRow*>> series;
  for (const auto& r : rows) series[r.method].push_back(&r);

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (double y = y0; y <= y1 + 1e-9; y += 5) {
    out << "<line x1=\"" << left << "\" x2=\"" << left + pw << "\" y1=\"" << py(y) << "\" y2=\""
        << py(y) << "\" stroke=\"#ddd\"/>\n";
    out << "<text x=\"" << left - 6 << "\" y=\"" << py(y) + 4 << "\" text-anchor=\"end\">" << y
        << "</text>\n";
  }
  for (int i = 0; i <= 4; ++i) {
    const double x = x0 + (x1 - x0) * i / 4;
    out << "<text x=\"" << px(x) << "\" y=\"" << top + ph + 16 << "\" text-anchor=\"middle\">"
        << fmt(std::round(x * 100) / 100) << "</text>\n";
  }
  out << "<text x=\"" << left + pw / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\">"
      << x_label << "</text>\n";
  out << "<text transform=\"translate(16," << top + ph / 2
      << ") rotate(-90)\" text-anchor=\"middle\">NMSE (dB)</text>\n";

  int k = 0;
  for (const auto& [method, pts] : series) {
    const char* c = colors[k % 7];
    out << "<polyline fill=\"none\" stroke=\"" << c << "\" stroke-width=\"2\" points=\"";
    for (const auto* p : pts)
      if (std::isfinite(p->mean_db)) out << px(p->sweep_value) << ',' << py(p->mean_db) << ' ';
    out << "\"/>\n";
    const double ly = top + 14 + 18 * k;
    out << "<line x1=\"" << left + pw + 10 << "\" x2=\"" << left + pw + 30 << "\" y1=\"" << ly - 4
        << "\" y2=\"" << ly - 4 << "\" stroke=\"" << c << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << left + pw + 36 << "\" y=\"" << ly << "\">" << method << "</text>\n";
    ++k;
  }
  out << "</svg>\n";
}

}  // namespace nearfield
