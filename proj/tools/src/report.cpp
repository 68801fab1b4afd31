#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "demoforge_cli/cli.hpp"

namespace demoforge::cli {

namespace {

std::string fixed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string render(const std::vector<std::vector<std::string>>& table) {
  std::vector<std::size_t> width;
  for (const auto& row : table) {
    width.resize(std::max(width.size(), row.size()), 0);
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::string out;
  for (std::size_t r = 0; r < table.size(); ++r) {
    for (std::size_t c = 0; c < table[r].size(); ++c) {
      const auto& cell = table[r][c];
      out += c ? "  " : "";
      out += cell + std::string(width[c] - cell.size(), ' ');
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    out += "\n";
    if (r == 0) {
      std::size_t total = 0;
      for (auto w : width) total += w;
      out += std::string(total + 2 * (width.size() - 1), '-') + "\n";
    }
  }
  return out;
}

std::string file_safe(std::string s) {
  std::replace_if(s.begin(), s.end(), [](char c) { return !std::isalnum(static_cast<unsigned char>(c)) && c != '_'; }, '_');
  return s;
}

}  // namespace

std::string format_results_table(const std::vector<ResultRow>& rows) {
  std::vector<std::vector<std::string>> table = {{"setting", "seed", "metric", "value"}};
  for (const auto& r : rows) table.push_back({r.setting, std::to_string(r.seed), r.metric, fixed(r.value)});
  return render(table);
}

std::string render_report(const std::filesystem::path& dir) {
  const auto rows = read_results_csv(dir / "results.csv");

  std::vector<std::string> settings, metrics;
  std::map<std::pair<std::string, std::string>, std::vector<double>> values;
  for (const auto& r : rows) {
    if (std::find(settings.begin(), settings.end(), r.setting) == settings.end()) settings.push_back(r.setting);
    if (std::find(metrics.begin(), metrics.end(), r.metric) == metrics.end()) metrics.push_back(r.metric);
    values[{r.setting, r.metric}].push_back(r.value);
  }
  const auto stats = [](const std::vector<double>& v) {
    double m = 0.0, s = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    for (double x : v) s += (x - m) * (x - m);
    return std::pair{m, std::sqrt(s / static_cast<double>(v.size()))};
  };

  std::vector<std::vector<std::string>> summary = {{"setting"}};
  for (const auto& m : metrics) summary[0].push_back(m);
  for (const auto& s : settings) {
    std::vector<std::string> row = {s};
    for (const auto& m : metrics) {
      const auto it = values.find({s, m});
      if (it == values.end()) {
        row.push_back("-");
        continue;
      }
      const auto [mean, sd] = stats(it->second);
      row.push_back(it->second.size() > 1 ? fixed(mean) + " +- " + fixed(sd) : fixed(mean));
    }
    summary.push_back(std::move(row));
  }

  const std::string text = format_results_table(rows) + "\n" + render(summary);
  FILE* f = std::fopen((dir / "report.txt").c_str(), "w");
  if (!f) throw IoError("cannot write " + (dir / "report.txt").string());
  std::fputs(text.c_str(), f);
  std::fclose(f);

  for (const auto& m : metrics) {
    std::string dat = "# index setting mean std n  (" + m + ")\n";
    for (std::size_t i = 0; i < settings.size(); ++i) {
      const auto it = values.find({settings[i], m});
      if (it == values.end()) continue;
      const auto [mean, sd] = stats(it->second);
      dat += std::to_string(i) + " \"" + settings[i] + "\" " + fixed(mean) + " " + fixed(sd) + " " +
             std::to_string(it->second.size()) + "\n";
    }
    FILE* d = std::fopen((dir / ("report_" + file_safe(m) + ".dat")).c_str(), "w");
    if (!d) throw IoError("cannot write .dat for " + m);
    std::fputs(dat.c_str(), d);
    std::fclose(d);
  }
  return text;
}

}  // namespace demoforge::cli
