#pragma once

#include <optional>
#include <string>
#include <vector>

namespace mldoa {

/// Minimal CSV table with full-precision numeric formatting (17 significant
/// digits, so emitted values re-parse bit-exactly). Empty cells encode
/// absent optionals.
class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header);

    void start_row();
    void add(const std::string& v);
    void add(double v);
    void add(int v);
    void add(std::optional<double> v);

    std::string str() const;
    void write(const std::string& path) const;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

std::string format_full(double v);

/// Parse CSV text into rows of cells (no quoting; the schema is plain).
std::vector<std::vector<std::string>> parse_csv(const std::string& text);

}  // namespace mldoa
