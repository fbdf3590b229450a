#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "tailgrid/grid_distribution.hpp"

namespace tailgrid {

namespace detail {

// Full decimal precision (17 significant digits): values round-trip exactly.
inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline double parse_header_field(const std::string& header, const std::string& key) {
    auto pos = header.find(key + "=");
    if (pos == std::string::npos)
        fail(ErrorCode::invalid_argument, "CSV header missing field " + key);
    return std::strtod(header.c_str() + pos + key.size() + 1, nullptr);
}

}  // namespace detail

inline void write_csv(std::ostream& os, const GridDistribution& f) {
    os << "# origin=" << detail::fmt17(f.lattice().origin())
       << " span=" << detail::fmt17(f.lattice().span()) << " len=" << f.lattice().len()
       << " left_excess=" << detail::fmt17(f.left_excess())
       << " right_excess=" << detail::fmt17(f.right_excess()) << "\n";
    for (std::size_t k = 0; k < f.mass().size(); ++k)
        if (f.mass()[k] != 0.0) os << k << "," << detail::fmt17(f.mass()[k]) << "\n";
}

inline void write_csv(std::ostream& os, const GridMeasure& nu) {
    os << "# origin=" << detail::fmt17(nu.lattice().origin())
       << " span=" << detail::fmt17(nu.lattice().span()) << " len=" << nu.lattice().len()
       << " total=" << detail::fmt17(nu.total()) << "\n";
    for (std::size_t k = 0; k < nu.mass().size(); ++k)
        if (nu.mass()[k] != 0.0) os << k << "," << detail::fmt17(nu.mass()[k]) << "\n";
}

template <class T>
void write_csv_file(const std::string& path, const T& obj) {
    std::ofstream os(path);
    if (!os) fail(ErrorCode::invalid_argument, "cannot open " + path + " for writing");
    write_csv(os, obj);
}

inline GridDistribution read_distribution_csv(std::istream& is) {
    std::string header;
    if (!std::getline(is, header) || header.empty() || header[0] != '#')
        fail(ErrorCode::invalid_argument, "distribution CSV: missing header line");
    double origin = detail::parse_header_field(header, "origin");
    double span = detail::parse_header_field(header, "span");
    auto len = static_cast<std::size_t>(detail::parse_header_field(header, "len"));
    double lx = detail::parse_header_field(header, "left_excess");
    double rx = detail::parse_header_field(header, "right_excess");
    std::vector<double> mass(len, 0.0);
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        auto comma = line.find(',');
        if (comma == std::string::npos)
            fail(ErrorCode::invalid_argument, "distribution CSV: malformed row '" + line + "'");
        auto idx = static_cast<std::size_t>(std::strtoull(line.c_str(), nullptr, 10));
        if (idx >= len) fail(ErrorCode::invalid_argument, "distribution CSV: index out of range");
        mass[idx] = std::strtod(line.c_str() + comma + 1, nullptr);
    }
    return GridDistribution(Lattice(origin, span, len), std::move(mass), lx, rx);
}

inline GridMeasure read_measure_csv(std::istream& is) {
    std::string header;
    if (!std::getline(is, header) || header.empty() || header[0] != '#')
        fail(ErrorCode::invalid_argument, "measure CSV: missing header line");
    double origin = detail::parse_header_field(header, "origin");
    double span = detail::parse_header_field(header, "span");
    auto len = static_cast<std::size_t>(detail::parse_header_field(header, "len"));
    std::vector<double> mass(len, 0.0);
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        auto comma = line.find(',');
        if (comma == std::string::npos)
            fail(ErrorCode::invalid_argument, "measure CSV: malformed row '" + line + "'");
        auto idx = static_cast<std::size_t>(std::strtoull(line.c_str(), nullptr, 10));
        if (idx >= len) fail(ErrorCode::invalid_argument, "measure CSV: index out of range");
        mass[idx] = std::strtod(line.c_str() + comma + 1, nullptr);
    }
    return GridMeasure(Lattice(origin, span, len), std::move(mass));
}

inline GridDistribution read_distribution_csv_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) fail(ErrorCode::invalid_argument, "cannot open " + path);
    return read_distribution_csv(is);
}

inline GridMeasure read_measure_csv_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) fail(ErrorCode::invalid_argument, "cannot open " + path);
    return read_measure_csv(is);
}

}  // namespace tailgrid
