#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace raf {

// One output row of a sweep. Numbers that do not apply are NaN; the stderr fields
// are empty for theory rows.
struct CsvRow {
    double sweep_value = 0.0;
    double alpha = 0.0;
    double eps = 0.0;
    double mu1 = 0.0;
    double mustar = 0.0;
    double lambda = 0.0;
    std::string loss;
    double m = 0.0;
    double q = 0.0;
    double V = 0.0;
    double e_gen = 0.0;
    double e_mem = 0.0;
    std::string source = "theory";  // theory | mc
    std::optional<double> stderr_gen;
    std::optional<double> stderr_mem;
    std::string status = "ok";
    bool failed = false;  // not serialized; set when the point did not converge
};

const std::vector<std::string>& csv_columns();

// Shortest decimal that reads back to the same double (17 significant digits).
std::string format_number(double x);

void write_csv_header(std::ostream& os);
void write_csv_row(std::ostream& os, const CsvRow& row);
void write_csv(std::ostream& os, const std::vector<CsvRow>& rows);

// Reads a file written by write_csv. `failed` is not recovered.
std::vector<CsvRow> read_csv(std::istream& is);

}  // namespace raf
