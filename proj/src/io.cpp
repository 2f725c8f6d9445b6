#include "qnd/io.hpp"

#include <charconv>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "qnd/linalg.hpp"

namespace qnd {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (v == 0.0) return "0";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string csv_row(const std::vector<double>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ',';
        out += format_double(values[i]);
    }
    return out;
}

void read_two_column(const std::string& path, std::vector<double>& a, std::vector<double>& b) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open table '" + path + "'");
    a.clear();
    b.clear();
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::replace(line.begin(), line.end(), ',', ' ');
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        std::istringstream row(line);
        double x = 0.0, y = 0.0;
        if (!(row >> x >> y)) {
            if (a.empty() && lineno == 1) continue;  // header
            throw InvalidInput(path + ":" + std::to_string(lineno) + ": expected two numeric columns");
        }
        a.push_back(x);
        b.push_back(y);
    }
}

}  // namespace qnd
