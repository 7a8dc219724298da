#include "mldoa/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mldoa {

CsvWriter::CsvWriter(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvWriter::start_row() { rows_.emplace_back(); }

void CsvWriter::add(const std::string& v) {
    if (rows_.empty()) throw std::logic_error("CsvWriter: no open row");
    rows_.back().push_back(v);
}

std::string format_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void CsvWriter::add(double v) { add(format_full(v)); }
void CsvWriter::add(int v) { add(std::to_string(v)); }
void CsvWriter::add(std::optional<double> v) { add(v ? format_full(*v) : std::string()); }

std::string CsvWriter::str() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < header_.size(); ++i) os << (i ? "," : "") << header_[i];
    os << "\n";
    for (const auto& row : rows_) {
        if (row.size() != header_.size())
            throw std::logic_error("CsvWriter: row width does not match header");
        for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
        os << "\n";
    }
    return os.str();
}

void CsvWriter::write(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("CsvWriter: cannot open '" + path + "'");
    out << str();
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (!line.empty() && line.back() == ',') cells.emplace_back();
        rows.push_back(std::move(cells));
    }
    return rows;
}

}  // namespace mldoa
