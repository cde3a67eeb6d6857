#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace fasm {

// File-level failures: unreadable paths, malformed cells, failed writes.
class io_error : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

struct CsvMatrix {
    Eigen::MatrixXd values;
    std::vector<std::string> header;  // empty when the file had none
};

// Comma-separated numeric matrix, UTF-8, LF newlines. A non-numeric first row
// is treated as a header. nan/inf tokens parse as their IEEE values; anything
// else malformed raises with its 1-based row and column.
CsvMatrix read_csv_matrix(const std::filesystem::path& path);

// Values are printed in shortest round-trip form, so writing and re-reading
// reproduces every entry bitwise.
void write_csv_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& values,
                      const std::vector<std::string>& header = {});

// Shortest decimal form that parses back to exactly the same double.
std::string format_double(double value);

// Write via a temporary file in the same directory plus rename, so readers
// never observe a partial file.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace fasm
