#pragma once

#include <map>
#include <sstream>
#include <string>

#include "tailgrid/grid_io.hpp"
#include "tailgrid/levy.hpp"

namespace tailgrid {

// Text form of a Levy triplet: key-value lines with one optional nested
// section. The jump measure is either a named density family with parameters
// or a reference to a GridMeasure CSV file.
//
//   triplet {
//     a = 0
//     b2 = 0.5
//     cutoff = 0.05
//     density {
//       family = powerlaw_split
//       small_exponent = 1.5
//       tail_exponent = 3
//       split = 1
//       hi = inf
//     }
//   }
struct TripletDoc {
    double a = 0.0;
    double b2 = 0.0;
    double cutoff = 0.0;
    std::string family;                    // empty when measure_csv is used
    std::map<std::string, double> params;  // family parameters
    std::string measure_csv;               // empty when a family is used
};

namespace detail {

inline std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline double parse_real(const std::string& v, const std::string& key) {
    if (v == "inf") return std::numeric_limits<double>::infinity();
    char* end = nullptr;
    double x = std::strtod(v.c_str(), &end);
    if (end == v.c_str())
        fail(ErrorCode::invalid_argument, "triplet: field " + key + " is not a number");
    return x;
}

}  // namespace detail

inline void write_triplet(std::ostream& os, const TripletDoc& doc) {
    os << "triplet {\n";
    os << "  a = " << detail::fmt17(doc.a) << "\n";
    os << "  b2 = " << detail::fmt17(doc.b2) << "\n";
    os << "  cutoff = " << detail::fmt17(doc.cutoff) << "\n";
    if (!doc.family.empty()) {
        os << "  density {\n";
        os << "    family = " << doc.family << "\n";
        for (const auto& [k, v] : doc.params) os << "    " << k << " = " << detail::fmt17(v) << "\n";
        os << "  }\n";
    } else if (!doc.measure_csv.empty()) {
        os << "  measure_csv = " << doc.measure_csv << "\n";
    }
    os << "}\n";
}

inline TripletDoc parse_triplet(std::istream& is) {
    TripletDoc doc;
    std::string line;
    int depth = 0;
    bool in_density = false;
    bool seen_triplet = false;
    while (std::getline(is, line)) {
        std::string s = detail::trim(line);
        if (s.empty() || s[0] == '#') continue;
        if (s.back() == '{') {
            std::string name = detail::trim(s.substr(0, s.size() - 1));
            if (depth == 0 && name == "triplet") {
                seen_triplet = true;
            } else if (depth == 1 && name == "density") {
                in_density = true;
            } else {
                fail(ErrorCode::invalid_argument, "triplet: unexpected section '" + name + "'");
            }
            ++depth;
            continue;
        }
        if (s == "}") {
            --depth;
            if (depth == 1) in_density = false;
            if (depth < 0) fail(ErrorCode::invalid_argument, "triplet: unbalanced braces");
            continue;
        }
        auto eq = s.find('=');
        if (eq == std::string::npos)
            fail(ErrorCode::invalid_argument, "triplet: malformed line '" + s + "'");
        std::string key = detail::trim(s.substr(0, eq));
        std::string val = detail::trim(s.substr(eq + 1));
        if (in_density) {
            if (key == "family")
                doc.family = val;
            else
                doc.params[key] = detail::parse_real(val, key);
        } else if (key == "a") {
            doc.a = detail::parse_real(val, key);
        } else if (key == "b2") {
            doc.b2 = detail::parse_real(val, key);
        } else if (key == "cutoff") {
            doc.cutoff = detail::parse_real(val, key);
        } else if (key == "measure_csv") {
            doc.measure_csv = val;
        } else {
            fail(ErrorCode::invalid_argument, "triplet: unknown field '" + key + "'");
        }
    }
    if (!seen_triplet || depth != 0)
        fail(ErrorCode::invalid_argument, "triplet: missing or unterminated 'triplet' section");
    return doc;
}

// Named jump density families understood by the triplet grammar.
inline LevyDensity density_from_family(const std::string& family,
                                       const std::map<std::string, double>& params) {
    auto get = [&](const std::string& key, double fallback,
                   bool required = false) -> double {
        auto it = params.find(key);
        if (it == params.end()) {
            if (required)
                fail(ErrorCode::invalid_argument, "density family missing parameter " + key);
            return fallback;
        }
        return it->second;
    };
    if (family == "powerlaw_split") {
        // x^{-p_small} below the split, x^{-p_tail} above it, on (lo, hi)
        double ps = get("small_exponent", 0.0, true);
        double pt = get("tail_exponent", 0.0, true);
        double split = get("split", 1.0);
        double lo = get("lo", 0.0);
        double hi = get("hi", std::numeric_limits<double>::infinity());
        LevyDensity d;
        d.lo = lo;
        d.hi = hi;
        d.g = [=](double x) {
            if (x <= lo || x >= hi || x <= 0.0) return 0.0;
            return x <= split ? std::pow(x, -ps) : std::pow(x, -pt);
        };
        return d;
    }
    if (family == "power_tail_exp_left") {
        // x^{-p} above pos_cutoff, left_scale * e^{x} below -neg_cutoff
        double p = get("exponent", 0.0, true);
        double pc = get("pos_cutoff", 0.0, true);
        double nc = get("neg_cutoff", pc);
        double ls = get("left_scale", 1.0);
        LevyDensity d;
        d.lo = -std::numeric_limits<double>::infinity();
        d.hi = std::numeric_limits<double>::infinity();
        d.g = [=](double x) {
            if (x >= pc) return std::pow(x, -p);
            if (x <= -nc) return ls * std::exp(x);
            return 0.0;
        };
        return d;
    }
    fail(ErrorCode::invalid_argument, "unknown density family '" + family + "'");
}

inline LevyTriplet to_triplet(const TripletDoc& doc) {
    LevyTriplet t;
    t.drift = doc.a;
    t.gauss_var = doc.b2;
    t.small_jump_cutoff = doc.cutoff;
    if (!doc.family.empty()) {
        t.density = density_from_family(doc.family, doc.params);
    } else if (!doc.measure_csv.empty()) {
        t.jump_measure = read_measure_csv_file(doc.measure_csv);
    }
    return t;
}

}  // namespace tailgrid
