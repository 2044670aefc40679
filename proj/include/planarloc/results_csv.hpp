#pragma once

// Per-trial result rows. Column order is fixed:
//   trial_id,method,noise_sigma_px,outlier_rate,n_matches,rotation_err_deg,
//   translation_err_m,direction_err_deg,inlier_count,status,wall_time_us
// Lines starting with '#' are comments. Floats are printed with 17
// significant digits; errors of failed trials are written as "nan".
// wall_time_us is the only nondeterministic column.

#include <cstdint>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace planarloc {

inline constexpr const char* kResultsCsvHeader =
    "trial_id,method,noise_sigma_px,outlier_rate,n_matches,rotation_err_deg,"
    "translation_err_m,direction_err_deg,inlier_count,status,wall_time_us";
inline constexpr int kResultsCsvVersion = 1;

struct TrialRecord {
  std::uint64_t trial_id = 0;
  std::string method;
  double noise_sigma_px = 0.0;
  double outlier_rate = 0.0;
  int n_matches = 0;
  double rotation_err_deg = 0.0;
  double translation_err_m = 0.0;
  double direction_err_deg = 0.0;
  std::uint64_t inlier_count = 0;
  std::string status;
  double wall_time_us = 0.0;

  bool has_pose() const {
    return status == "Success" || status == "RefinementWarning";
  }
};

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline void write_results_csv(std::ostream& os,
                              const std::vector<TrialRecord>& rows,
                              const std::vector<std::string>& comments = {}) {
  os << "# planarloc results v" << kResultsCsvVersion << '\n';
  for (const auto& c : comments) os << "# " << c << '\n';
  os << kResultsCsvHeader << '\n';
  for (const TrialRecord& r : rows) {
    os << r.trial_id << ',' << r.method << ',' << format_double(r.noise_sigma_px)
       << ',' << format_double(r.outlier_rate) << ',' << r.n_matches << ','
       << format_double(r.rotation_err_deg) << ','
       << format_double(r.translation_err_m) << ','
       << format_double(r.direction_err_deg) << ',' << r.inlier_count << ','
       << r.status << ',' << format_double(r.wall_time_us) << '\n';
  }
}

inline std::vector<TrialRecord> read_results_csv(std::istream& is) {
  std::vector<TrialRecord> rows;
  std::string line;
  bool header_seen = false;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line != kResultsCsvHeader) {
        throw std::runtime_error("results csv: unexpected header on line " +
                                 std::to_string(line_no));
      }
      header_seen = true;
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 11) {
      throw std::runtime_error("results csv: expected 11 columns on line " +
                               std::to_string(line_no));
    }
    try {
      TrialRecord r;
      r.trial_id = std::stoull(cells[0]);
      r.method = cells[1];
      r.noise_sigma_px = std::stod(cells[2]);
      r.outlier_rate = std::stod(cells[3]);
      r.n_matches = std::stoi(cells[4]);
      r.rotation_err_deg = std::stod(cells[5]);
      r.translation_err_m = std::stod(cells[6]);
      r.direction_err_deg = std::stod(cells[7]);
      r.inlier_count = std::stoull(cells[8]);
      r.status = cells[9];
      r.wall_time_us = std::stod(cells[10]);
      rows.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw std::runtime_error("results csv: bad value on line " +
                               std::to_string(line_no));
    }
  }
  if (!header_seen) throw std::runtime_error("results csv: missing header");
  return rows;
}

}  // namespace planarloc
