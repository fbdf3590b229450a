#pragma once

#include <ostream>

#include "tailgrid/diagnostics.hpp"
#include "tailgrid/grid_io.hpp"

namespace tailgrid {

// One CSV block of the full ratio trace followed by the one-line summary
// record. Doubles carry 17 significant digits so reruns diff byte-exactly.
inline void write_report_csv(std::ostream& os, const DiagnosticReport& rep) {
    os << "probe,shift,ratio\n";
    for (std::size_t i = 0; i < rep.probes.size(); ++i) {
        for (std::size_t j = 0; j < rep.ratios[i].size(); ++j) {
            double col = j < rep.columns.size() ? rep.columns[j] : static_cast<double>(j);
            os << detail::fmt17(rep.probes[i]) << "," << detail::fmt17(col) << ","
               << detail::fmt17(rep.ratios[i][j]) << "\n";
        }
    }
    os << "check,target,limit_estimate,trend,verdict,certificate,excess_contamination\n";
    os << rep.check << "," << (std::isnan(rep.target) ? "" : detail::fmt17(rep.target)) << ","
       << detail::fmt17(rep.limit_estimate) << "," << to_string(rep.trend) << ","
       << to_string(rep.verdict) << ","
       << (rep.certificate ? detail::fmt17(*rep.certificate) : "") << ","
       << detail::fmt17(rep.excess_contamination) << "\n";
}

// The one-row form used by summary.csv. The flags column carries
// hypothesis-unverified marks (e.g. a Kesten certificate computed for a law
// that did not pass the subexponentiality gate).
inline constexpr const char* kSummaryHeader =
    "check,verdict,limit_estimate,target,certificate,flags";

inline void write_summary_row(std::ostream& os, const std::string& name,
                              const DiagnosticReport& rep) {
    os << name << "," << to_string(rep.verdict) << "," << detail::fmt17(rep.limit_estimate)
       << "," << (std::isnan(rep.target) ? "" : detail::fmt17(rep.target)) << ","
       << (rep.certificate ? detail::fmt17(*rep.certificate) : "") << ","
       << (rep.hypothesis_unverified ? "hypothesis-unverified" : "") << "\n";
}

}  // namespace tailgrid
