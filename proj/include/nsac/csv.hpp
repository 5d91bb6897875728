#pragma once
// Diagnostic time series as CSV.  One fixed column set, doubles written with
// %.17g so a read-back reproduces every value bit for bit.

#include <cstdlib>
#include <string>
#include <vector>

#include <nsac/diagnostics.hpp>
#include <nsac/errors.hpp>
#include <nsac/ioutil.hpp>

namespace nsac {

inline constexpr const char* kReportCsvHeader =
    "t,kinetic_macro,kinetic_micro,interface,configuration,total,d0,dreg,"
    "g_value,d_cross,phi_mean,pi_mean,f_integral,crossterm,residual";

namespace detail {

inline double* report_fields(EnergyReport& r, int i) {
  // column order matches kReportCsvHeader
  double* f[] = {&r.t,        &r.kinetic_macro, &r.kinetic_micro, &r.interface,
                 &r.configuration, &r.total,    &r.d0,            &r.dreg,
                 &r.g_value,  &r.d_cross,       &r.phi_mean,      &r.pi_mean,
                 &r.f_integral, &r.crossterm,   &r.residual};
  return f[i];
}

inline const double* report_fields(const EnergyReport& r, int i) {
  return report_fields(const_cast<EnergyReport&>(r), i);
}

inline constexpr int kReportColumns = 15;

}  // namespace detail

inline std::string reports_to_csv(const std::vector<EnergyReport>& reports) {
  std::string out = kReportCsvHeader;
  out += '\n';
  for (const EnergyReport& r : reports) {
    for (int i = 0; i < detail::kReportColumns; ++i) {
      if (i) out += ',';
      out += ioutil::g17(*detail::report_fields(r, i));
    }
    out += '\n';
  }
  return out;
}

inline std::vector<EnergyReport> parse_reports_csv(const std::string& text) {
  std::vector<std::string> lines = ioutil::split(text, '\n');
  if (lines.empty() || ioutil::trim(lines[0]) != kReportCsvHeader)
    throw SnapshotError("report CSV: missing or mismatched header");
  std::vector<EnergyReport> out;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    if (ioutil::trim(lines[li]).empty()) continue;
    std::vector<std::string> cells = ioutil::split(lines[li], ',');
    if (static_cast<int>(cells.size()) != detail::kReportColumns)
      throw SnapshotError("report CSV: line " + std::to_string(li + 1) + " has " +
                          std::to_string(cells.size()) + " columns, expected 15");
    EnergyReport r;
    for (int i = 0; i < detail::kReportColumns; ++i) {
      const std::string cell = ioutil::trim(cells[i]);
      char* end = nullptr;
      double v = std::strtod(cell.c_str(), &end);
      if (cell.empty() || end != cell.c_str() + cell.size())
        throw SnapshotError("report CSV: line " + std::to_string(li + 1) +
                            ": bad number '" + cells[i] + "'");
      *detail::report_fields(r, i) = v;
    }
    out.push_back(r);
  }
  return out;
}

inline void write_reports_csv(const std::string& path, const std::vector<EnergyReport>& reports) {
  ioutil::write_text_file(path, reports_to_csv(reports));
}

inline std::vector<EnergyReport> read_reports_csv(const std::string& path) {
  return parse_reports_csv(ioutil::read_text_file(path));
}

}  // namespace nsac
