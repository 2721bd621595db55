#include "raf/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace raf {

const std::vector<std::string>& csv_columns() {
    static const std::vector<std::string> cols{"sweep_value", "alpha", "eps", "mu1",    "mustar",     "lambda",
                                               "loss",        "m",     "q",   "V",      "e_gen",      "e_mem",
                                               "source",      "stderr_gen", "stderr_mem", "status"};
    return cols;
}

std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace {

// statuses and names never contain commas or quotes, but be safe
std::string clean(const std::string& s) {
    std::string out = s;
    for (char& c : out)
        if (c == ',' || c == '\n' || c == '\r' || c == '"') c = ';';
    return out;
}

double parse_number(const std::string& s, const std::string& column) {
    if (s == "nan") return std::nan("");
    if (s == "inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw std::invalid_argument("csv: bad number '" + s + "' in column " + column);
    return v;
}

}  // namespace

void write_csv_header(std::ostream& os) {
    const auto& cols = csv_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
    os << '\n';
}

void write_csv_row(std::ostream& os, const CsvRow& r) {
    os << format_number(r.sweep_value) << ',' << format_number(r.alpha) << ',' << format_number(r.eps) << ','
       << format_number(r.mu1) << ',' << format_number(r.mustar) << ',' << format_number(r.lambda) << ','
       << clean(r.loss) << ',' << format_number(r.m) << ',' << format_number(r.q) << ',' << format_number(r.V)
       << ',' << format_number(r.e_gen) << ',' << format_number(r.e_mem) << ',' << clean(r.source) << ','
       << (r.stderr_gen ? format_number(*r.stderr_gen) : "") << ','
       << (r.stderr_mem ? format_number(*r.stderr_mem) : "") << ',' << clean(r.status) << '\n';
}

void write_csv(std::ostream& os, const std::vector<CsvRow>& rows) {
    write_csv_header(os);
    for (const auto& r : rows) write_csv_row(os, r);
}

std::vector<CsvRow> read_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw std::invalid_argument("csv: empty input");
    std::string expected;
    for (const auto& c : csv_columns()) expected += (expected.empty() ? "" : ",") + c;
    if (line != expected) throw std::invalid_argument("csv: unexpected header");
    const auto& cols = csv_columns();
    std::vector<CsvRow> rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) f.push_back(cell);
        if (!line.empty() && line.back() == ',') f.emplace_back();
        if (f.size() != cols.size()) throw std::invalid_argument("csv: wrong field count");
        CsvRow r;
        r.sweep_value = parse_number(f[0], cols[0]);
        r.alpha = parse_number(f[1], cols[1]);
        r.eps = parse_number(f[2], cols[2]);
        r.mu1 = parse_number(f[3], cols[3]);
        r.mustar = parse_number(f[4], cols[4]);
        r.lambda = parse_number(f[5], cols[5]);
        r.loss = f[6];
        r.m = parse_number(f[7], cols[7]);
        r.q = parse_number(f[8], cols[8]);
        r.V = parse_number(f[9], cols[9]);
        r.e_gen = parse_number(f[10], cols[10]);
        r.e_mem = parse_number(f[11], cols[11]);
        r.source = f[12];
        if (!f[13].empty()) r.stderr_gen = parse_number(f[13], cols[13]);
        if (!f[14].empty()) r.stderr_mem = parse_number(f[14], cols[14]);
        r.status = f[15];
        rows.push_back(std::move(r));
    }
    return rows;
}

}  // namespace raf
