#include "robgan/tables.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "robgan/config_json.hpp"

namespace robgan {

namespace {

std::string num(double v) {
  if (std::isnan(v)) {
    return "nan";
  }
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string short_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot write '" + path.string() + "'");
  }
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) {
    throw std::runtime_error("write failed for '" + path.string() + "'");
  }
}

std::string axis_label(const CellKey& k) {
  std::ostringstream s;
  s << to_string(k.q.family) << "(t=" << short_num(k.q.t) << ") eps=" << short_num(k.eps) << " p=" << k.p
    << " n=" << k.n;
  return s.str();
}

} // namespace

TableFormat table_format_from_string(std::string_view name) {
  if (name == "csv") return TableFormat::Csv;
  if (name == "markdown" || name == "md") return TableFormat::Markdown;
  throw std::invalid_argument("unknown table format '" + std::string(name) + "'");
}

std::string format_cell(double mean, double sd) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f (%.4f)", mean, sd);
  return buf;
}

std::vector<std::filesystem::path> emit_tables(const ExperimentResult& res, TableFormat fmt,
                                               const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw std::runtime_error("cannot create '" + dir.string() + "': " + ec.message());
  }
  const std::string config_line = to_json(res.config).dump();
  const std::string fingerprint = build_fingerprint();
  const std::string& name = res.config.name;
  std::vector<std::filesystem::path> written;

  {
    const auto path = dir / (name + "_cells.csv");
    std::ofstream out = open_out(path);
    out << "# config: " << config_line << '\n' << "# build: " << fingerprint << '\n';
    out << "q,t,eps,p,n,method,label,mean,sd,mean_l1_w,mean_op_error,failed,errors\n";
    for (const CellRecord& c : res.cells) {
      out << to_string(c.key.q.family) << ',' << num(c.key.q.t) << ',' << num(c.key.eps) << ',' << c.key.p << ','
          << c.key.n << ',' << to_string(c.method) << ',' << c.key.label << ',' << num(c.mean_error) << ','
          << num(c.sd_error) << ',' << (c.mean_l1_w ? num(*c.mean_l1_w) : "") << ','
          << (c.mean_op_error ? num(*c.mean_op_error) : "") << ',' << (c.failed() ? 1 : 0) << ',';
      for (std::size_t r = 0; r < c.errors.size(); ++r) {
        out << (r ? ";" : "") << num(c.errors[r]);
      }
      out << '\n';
    }
    finish(out, path);
    written.push_back(path);
  }

  {
    // Pivot: one row per axis point, one column per estimator, in config order.
    std::vector<std::string> labels;
    for (const EstimatorSpec& e : res.config.estimators) {
      labels.push_back(e.label);
    }
    std::vector<std::string> row_names;
    std::map<std::string, std::map<std::string, std::string>> rows;
    for (const CellRecord& c : res.cells) {
      const std::string r = axis_label(c.key);
      if (!rows.contains(r)) {
        row_names.push_back(r);
      }
      rows[r][c.key.label] = c.failed() ? "failed" : format_cell(c.mean_error, c.sd_error);
    }
    const bool md = fmt == TableFormat::Markdown;
    const auto path = dir / (name + (md ? "_table.md" : "_table.csv"));
    std::ofstream out = open_out(path);
    if (md) {
      out << "<!-- config: " << config_line << " -->\n<!-- build: " << fingerprint << " -->\n\n";
      out << "| setting |";
      for (const auto& l : labels) out << ' ' << l << " |";
      out << "\n|---|";
      for (std::size_t i = 0; i < labels.size(); ++i) out << "---|";
      out << '\n';
      for (const auto& r : row_names) {
        out << "| " << r << " |";
        for (const auto& l : labels) out << ' ' << rows[r][l] << " |";
        out << '\n';
      }
    } else {
      out << "# config: " << config_line << '\n' << "# build: " << fingerprint << '\n';
      out << "setting";
      for (const auto& l : labels) out << ',' << l;
      out << '\n';
      for (const auto& r : row_names) {
        out << r;
        for (const auto& l : labels) out << ',' << rows[r][l];
        out << '\n';
      }
    }
    finish(out, path);
    written.push_back(path);
  }

  {
    const auto path = dir / (name + "_summary.json");
    Json j;
    j["config"] = to_json(res.config);
    j["build"] = fingerprint;
    Json cells = Json::array();
    for (const CellRecord& c : res.cells) {
      Json cj;
      cj["setting"] = axis_label(c.key);
      cj["label"] = c.key.label;
      cj["mean"] = c.mean_error;
      cj["sd"] = c.sd_error;
      cj["runtime_seconds"] = c.runtime_seconds;
      cj["failures"] = c.failures;
      cells.push_back(cj);
    }
    j["cells"] = cells;
    std::ofstream out = open_out(path);
    out << j.dump(2) << '\n';
    finish(out, path);
    written.push_back(path);
  }
  return written;
}

} // namespace robgan
