#include "hetcorr/dataset.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <sstream>

#include "hetcorr/rank.hpp"

namespace hetcorr {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        const auto b = cell.find_first_not_of(" \t\r\"");
        const auto e = cell.find_last_not_of(" \t\r\"");
        cells.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

bool parse_number(const std::string& s, double& out) {
    if (s.empty()) return false;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (*first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last;
}

}  // namespace

std::size_t resolve_column(const Dataset& data, const std::string& key) {
    for (std::size_t i = 0; i < data.column_names.size(); ++i) {
        if (data.column_names[i] == key) return i;
    }
    std::size_t idx = 0;
    const auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), idx);
    if (ec == std::errc{} && ptr == key.data() + key.size() && idx >= 1 &&
        idx <= data.column_count()) {
        return idx - 1;
    }
    throw DataError("unknown column '" + key + "'");
}

Dataset parse_csv(std::istream& is, bool header, const std::vector<std::string>& selection) {
    Dataset all;
    std::string line;
    std::size_t line_no = 0;
    std::size_t width = 0;
    std::size_t row = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        auto cells = split_line(line);
        if (header && all.column_names.empty()) {
            all.column_names = std::move(cells);
            width = all.column_names.size();
            all.columns.resize(width);
            continue;
        }
        if (width == 0) {
            width = cells.size();
            all.columns.resize(width);
            for (std::size_t c = 0; c < width; ++c) all.column_names.push_back(std::to_string(c + 1));
        }
        ++row;
        if (cells.size() != width) {
            throw DataError("row " + std::to_string(row) + " (line " + std::to_string(line_no) +
                            "): expected " + std::to_string(width) + " fields, found " +
                            std::to_string(cells.size()));
        }
        for (std::size_t c = 0; c < width; ++c) {
            double v = 0.0;
            if (!parse_number(cells[c], v)) {
                throw DataError("row " + std::to_string(row) + ", column " + std::to_string(c + 1) +
                                " (line " + std::to_string(line_no) + "): non-numeric cell '" +
                                cells[c] + "'");
            }
            all.columns[c].push_back(v);
        }
    }
    if (row == 0) throw DataError("empty file: no data rows");
    all.row_count = row;

    Dataset out;
    if (selection.empty()) {
        out = std::move(all);
    } else {
        out.row_count = all.row_count;
        for (const auto& key : selection) {
            const auto idx = resolve_column(all, key);
            out.column_names.push_back(all.column_names[idx]);
            out.columns.push_back(all.columns[idx]);
        }
    }
    for (const auto& col : out.columns) out.tie_counts.push_back(count_ties(col));
    return out;
}

Dataset load_csv(const std::string& path, bool header, const std::vector<std::string>& selection) {
    std::ifstream is(path);
    if (!is) throw DataError("cannot open '" + path + "'");
    return parse_csv(is, header, selection);
}

}  // namespace hetcorr
