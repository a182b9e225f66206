#include "annulus/csv.hpp"

#include <cstdio>

#include "annulus/errors.hpp"

namespace annulus {

std::string csv_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

CsvWriter::CsvWriter(const std::filesystem::path& path,
                     const std::string& header)
    : out_(path) {
    if (!out_) {
        throw InvalidInputError("cannot open output file: " + path.string());
    }
    out_ << header << "\n";
}

void CsvWriter::row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out_ << ",";
        out_ << cells[i];
    }
    out_ << "\n";
}

} // namespace annulus
