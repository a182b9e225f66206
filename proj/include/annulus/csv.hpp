#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace annulus {

/// Format a double with 17 significant digits (lossless round trip).
std::string csv_number(double v);

/// Line-oriented CSV writer; numbers go through csv_number so identical
/// data produces byte-identical files.
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::string& header);

    void row(const std::vector<std::string>& cells);

private:
    std::ofstream out_;
};

} // namespace annulus
