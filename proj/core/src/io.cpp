#include "dyncop/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace dyncop {

namespace {

using ordered_json = nlohmann::ordered_json;

[[noreturn]] void io_fail(const std::string& path, int line,
                          const std::string& what) {
  std::ostringstream os;
  os << path << ":" << line << ": " << what;
  throw std::runtime_error(os.str());
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  return out;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& path, int line, const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    io_fail(path, line, "expected a number, got '" + s + "'");
  }
  if (used != s.size())
    io_fail(path, line, "trailing characters in number '" + s + "'");
  return v;
}

std::string join_params(const CopulaSpec& spec) {
  const Eigen::VectorXd p = spec.params();
  std::string out;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (i) out.push_back(';');
    out += fmt_g(p[i]);
  }
  return out;
}

std::vector<double> split_params(const std::string& path, int line,
                                 const std::string& s) {
  std::vector<double> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, ';'))
    if (!cur.empty()) out.push_back(parse_double(path, line, cur));
  return out;
}

CopulaSpec spec_from(const std::string& path, int line,
                     const std::string& family,
                     const std::vector<double>& params) {
  Family fam;
  try {
    fam = family_from_name(family);
  } catch (const std::exception&) {
    io_fail(path, line, "unknown family '" + family + "'");
  }
  const std::size_t need = fam == Family::StudentT ? 2 : 1;
  if (params.size() != need)
    io_fail(path, line, "wrong parameter count for family '" + family + "'");
  switch (fam) {
    case Family::Gaussian: return CopulaSpec::gaussian(params[0]);
    case Family::StudentT: return CopulaSpec::student_t(params[0], params[1]);
    case Family::Clayton: return CopulaSpec::clayton(params[0]);
  }
  io_fail(path, line, "unknown family '" + family + "'");
}

}  // namespace

std::string fmt_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

SeriesCsv read_series_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);

  SeriesCsv out;
  std::string line;
  int lineno = 0;
  bool have_header = false;
  bool has_date = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    const std::vector<std::string> f = split_csv(line);
    if (!have_header) {
      if (f.size() == 3 && f[0] == "date" && f[1] == "asset1" &&
          f[2] == "asset2")
        has_date = true;
      else if (f.size() == 2 && f[0] == "asset1" && f[1] == "asset2")
        has_date = false;
      else
        io_fail(path, lineno,
                "expected header 'date,asset1,asset2' or 'asset1,asset2'");
      have_header = true;
      continue;
    }
    const std::size_t need = has_date ? 3 : 2;
    if (f.size() != need)
      io_fail(path, lineno, "wrong field count (got " +
                                std::to_string(f.size()) + ", expected " +
                                std::to_string(need) + ")");
    std::size_t k = 0;
    if (has_date) out.dates.push_back(f[k++]);
    out.asset1.push_back(parse_double(path, lineno, f[k]));
    out.asset2.push_back(parse_double(path, lineno, f[k + 1]));
  }
  if (!have_header) throw std::runtime_error(path + ": empty file");
  return out;
}

void write_series_csv(const std::string& path, const Eigen::ArrayX2d& data,
                      const std::vector<std::string>& dates) {
  if (!dates.empty() && static_cast<Eigen::Index>(dates.size()) != data.rows())
    throw std::invalid_argument("write_series_csv: dates/rows mismatch");
  std::ofstream out = open_out(path);
  out << "# schema: series.v1\n";
  out << (dates.empty() ? "asset1,asset2\n" : "date,asset1,asset2\n");
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    if (!dates.empty()) out << dates[static_cast<std::size_t>(i)] << ',';
    out << fmt_g(data(i, 0)) << ',' << fmt_g(data(i, 1)) << '\n';
  }
}

void write_segments_jsonl(const std::string& path,
                          const std::vector<Segment>& segments,
                          const std::vector<std::string>& dates) {
  std::ofstream out = open_out(path);
  bool first = true;
  Family prev = Family::Gaussian;
  for (const Segment& s : segments) {
    ordered_json j;
    j["schema"] = "segments.v1";
    j["start"] = s.start + 1;  // serialized as 1-based inclusive
    j["end"] = s.end;
    if (!dates.empty() && s.start < static_cast<int>(dates.size()) &&
        s.end <= static_cast<int>(dates.size()) && s.end > s.start) {
      j["start_date"] = dates[static_cast<std::size_t>(s.start)];
      j["end_date"] = dates[static_cast<std::size_t>(s.end) - 1];
    } else {
      j["start_date"] = nullptr;
      j["end_date"] = nullptr;
    }
    j["family"] = family_name(s.fit.spec.family);
    j["params"] = s.fit.spec.params();
    j["converged"] = s.fit.converged;
    if (first) {
      j["change_type"] = "initial";
    } else if (prev == s.fit.spec.family) {
      j["change_type"] = "parameter";
    } else {
      j["change_type"] = std::string(family_name(prev)) + "->" +
                         family_name(s.fit.spec.family);
    }
    first = false;
    prev = s.fit.spec.family;
    out << j.dump() << '\n';
  }
}

std::vector<Segment> read_segments_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::vector<Segment> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    ordered_json j;
    try {
      j = ordered_json::parse(line);
    } catch (const std::exception& e) {
      io_fail(path, lineno, e.what());
    }
    try {
      if (j.at("schema").get<std::string>() != "segments.v1")
        io_fail(path, lineno, "unexpected schema");
      Segment s;
      s.start = j.at("start").get<int>() - 1;
      s.end = j.at("end").get<int>();
      s.fit.spec = spec_from(path, lineno, j.at("family").get<std::string>(),
                             j.at("params").get<std::vector<double>>());
      s.fit.converged = j.value("converged", true);
      if (s.start < 0 || s.end <= s.start)
        io_fail(path, lineno, "invalid segment bounds");
      out.push_back(std::move(s));
    } catch (const ordered_json::exception& e) {
      io_fail(path, lineno, e.what());
    }
  }
  return out;
}

void write_events_csv(const std::string& path,
                      const std::vector<DetectionEvent>& events) {
  std::ofstream out = open_out(path);
  out << "# schema: events.v1\n";
  out << "detected_at,change_point,crossed,statistic\n";
  for (const DetectionEvent& e : events) {
    out << e.detected_at << ',' << e.change_point << ','
        << (e.crossed == Crossed::WLL ? "WLL" : "CLL") << ','
        << fmt_g(e.statistic) << '\n';
  }
}

void write_risk_csv(const std::string& path,
                    const std::vector<RiskPoint>& points,
                    const std::vector<std::string>& dates, bool plot_sign) {
  std::ofstream out = open_out(path);
  const double sign = plot_sign ? -1.0 : 1.0;
  out << "# schema: risk.v1\n";
  out << "date,t,var,es,family,params,sigma1,sigma2\n";
  for (const RiskPoint& p : points) {
    if (!dates.empty() && p.t >= 0 &&
        p.t < static_cast<int>(dates.size()))
      out << dates[static_cast<std::size_t>(p.t)];
    out << ',' << p.t << ',' << fmt_g(sign * p.var_value) << ','
        << fmt_g(sign * p.es_value) << ',' << family_name(p.spec_used.family)
        << ',' << join_params(p.spec_used) << ','
        << fmt_g(p.sigma_forecasts[0]) << ',' << fmt_g(p.sigma_forecasts[1])
        << '\n';
  }
}

std::vector<RiskPoint> read_risk_csv(const std::string& path, bool plot_sign) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  const double sign = plot_sign ? -1.0 : 1.0;
  std::vector<RiskPoint> out;
  std::string line;
  int lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    if (!have_header) {
      if (line != "date,t,var,es,family,params,sigma1,sigma2")
        io_fail(path, lineno, "unexpected risk CSV header");
      have_header = true;
      continue;
    }
    const std::vector<std::string> f = split_csv(line);
    if (f.size() != 8) io_fail(path, lineno, "wrong field count");
    RiskPoint p;
    p.t = static_cast<int>(parse_double(path, lineno, f[1]));
    p.var_value = sign * parse_double(path, lineno, f[2]);
    p.es_value = sign * parse_double(path, lineno, f[3]);
    p.spec_used = spec_from(path, lineno, f[4], split_params(path, lineno, f[5]));
    p.sigma_forecasts[0] = parse_double(path, lineno, f[6]);
    p.sigma_forecasts[1] = parse_double(path, lineno, f[7]);
    out.push_back(std::move(p));
  }
  if (!have_header) throw std::runtime_error(path + ": empty file");
  return out;
}

void write_comparison_csv(const std::string& path,
                          const std::vector<ComparisonRow>& rows) {
  std::ofstream out = open_out(path);
  out << "# schema: comparison.v1\n";
  out << "scenario,method,seed,true_cp,detected_cp,delay,family,params\n";
  for (const ComparisonRow& r : rows) {
    out << r.scenario << ',' << method_name(r.method) << ',' << r.seed_index
        << ',' << r.true_cp << ',';
    if (r.detected_cp) out << *r.detected_cp;
    out << ',';
    if (r.delay) out << *r.delay;
    out << ',';
    if (r.new_spec)
      out << family_name(r.new_spec->family) << ',' << join_params(*r.new_spec);
    else
      out << ',';
    out << '\n';
  }
}

void write_summary_csv(const std::string& path,
                       const std::vector<ComparisonSummary>& summaries) {
  std::ofstream out = open_out(path);
  out << "# schema: comparison_summary.v1\n";
  out << "scenario,method,n_runs,n_detected,detection_rate,delay_median,"
         "delay_iqr,false_alarms\n";
  for (const ComparisonSummary& s : summaries) {
    out << s.scenario << ',' << method_name(s.method) << ',' << s.n_runs << ','
        << s.n_detected << ',' << fmt_g(s.detection_rate) << ','
        << fmt_g(s.delay_median) << ',' << fmt_g(s.delay_iqr) << ','
        << s.false_alarms << '\n';
  }
}

}  // namespace dyncop
