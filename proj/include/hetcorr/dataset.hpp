#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace hetcorr {

/// Rectangular numeric table, column-major.
struct Dataset {
    std::vector<std::string> column_names;
    std::vector<std::vector<double>> columns;
    std::size_t row_count = 0;
    std::vector<std::size_t> tie_counts;  // per column

    std::size_t column_count() const noexcept { return columns.size(); }
};

/// Thrown for malformed input; carries a location in the message.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Comma-separated numeric data. `selection` picks columns by header name or
/// 1-based index; empty keeps all columns.
Dataset parse_csv(std::istream& is, bool header, const std::vector<std::string>& selection = {});
Dataset load_csv(const std::string& path, bool header,
                 const std::vector<std::string>& selection = {});

/// Index of a column given its name or 1-based position.
std::size_t resolve_column(const Dataset& data, const std::string& key);

}  // namespace hetcorr
